use std::path::PathBuf;
use std::process::ExitCode;

use beurling_cli::{run, Command, CommandConfig};
use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};

/// Numerical checks of sharp Lp constants for the Beurling transform and related operators.
///
/// Settings are taken from the defaults, then the `--config` file, then the
/// flags, each overriding the previous. `--tol-<check>` sets the tolerance
/// of one check; the checks are burkholder, convexity, scaling, norms,
/// stretch, stretch-max, mode-functional, crosscheck, hext and structural.
#[derive(Debug, Parser)]
#[command(name = "beurling", version)]
struct Args {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Suite to run.
    #[arg(long, value_enum)]
    command: Option<Command>,
    /// Exponent; repeat for several.
    #[arg(long = "p")]
    p: Vec<f64>,
    /// Smallest node of the log-spaced half-line grid.
    #[arg(long)]
    grid_min: Option<f64>,
    /// Largest node of the log-spaced half-line grid.
    #[arg(long)]
    grid_max: Option<f64>,
    /// Number of grid nodes.
    #[arg(long)]
    grid_n: Option<usize>,
    /// Side length in samples of the planar fields (a power of two).
    #[arg(long)]
    field_n: Option<usize>,
    /// Side of the periodic square.
    #[arg(long)]
    extent: Option<f64>,
    /// Seed of every random draw.
    #[arg(long)]
    seed: Option<u64>,
    /// Where to write the JSON report.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A `key`, `value` pair in config-file form.
type Setting = (String, String);

/// Splits `--tol-<check> <value>` and `--tol-<check>=<value>` out of the
/// arguments, since clap cannot declare a flag family.
fn take_tolerances(args: Vec<String>) -> Result<(Vec<String>, Vec<Setting>), String> {
    let mut rest = Vec::new();
    let mut tols = Vec::new();
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        match arg.strip_prefix("--tol-") {
            Some(spec) => {
                let (check, value) = match spec.split_once('=') {
                    Some((c, v)) => (c.to_string(), v.to_string()),
                    None => (spec.to_string(), it.next().ok_or(format!("{arg} needs a value"))?),
                };
                tols.push((format!("tol-{check}"), value));
            }
            None => rest.push(arg),
        }
    }
    Ok((rest, tols))
}

fn build_config(args: Vec<String>) -> Result<CommandConfig, String> {
    let (rest, tols) = take_tolerances(args)?;
    let a = match Args::try_parse_from(rest) {
        Ok(a) => a,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => return Err(e.to_string()),
    };
    let mut config = CommandConfig::default();
    if let Some(path) = &a.config {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        config.merge_text(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    if let Some(c) = a.command {
        config.command = c;
    }
    if !a.p.is_empty() {
        config.p_list = a.p;
    }
    let g = &mut config.grid_spec;
    g.u_min = a.grid_min.unwrap_or(g.u_min);
    g.u_max = a.grid_max.unwrap_or(g.u_max);
    g.n = a.grid_n.unwrap_or(g.n);
    let f = &mut config.field_spec;
    f.n = a.field_n.unwrap_or(f.n);
    f.extent = a.extent.unwrap_or(f.extent);
    config.seed = a.seed.unwrap_or(config.seed);
    if let Some(out) = a.out {
        config.output_path = out;
    }
    for (key, value) in tols {
        config.set(&key, &value)?;
    }
    config.validate().map_err(|e| e.to_string())?;
    Ok(config)
}

fn main() -> ExitCode {
    let config = match build_config(std::env::args().collect()) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("{}\n", msg.trim_end());
            eprintln!("{}", Args::command().render_usage());
            return ExitCode::from(2);
        }
    };
    let report = run(&config);
    print!("{}", report.summary());
    if let Err(e) = std::fs::write(&config.output_path, report.to_json()) {
        eprintln!("cannot write {}: {e}", config.output_path.display());
        return ExitCode::FAILURE;
    }
    println!("report written to {}", config.output_path.display());
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
