//! Run configuration and its flat `key = value` file format.
//!
//! ```text
//! # beurling run configuration
//! command = norms
//! p = 1.5, 2
//! grid-min = 1e-6
//! grid-max = 1e6
//! grid-n = 4000
//! field-n = 256
//! extent = 20
//! seed = 0
//! out = report.json
//! tol-norms = 0.05
//! ```
//!
//! Keys match the command-line flags without their leading dashes. Every
//! quantity is dimensionless: grid bounds are values of the half-line
//! variable and `extent` is the side of the periodic square in the same
//! units. Blank lines and lines starting with `#` are ignored.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use beurling_core::GridSpec;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Pointwise,
    Norms,
    Stretch,
    #[value(name = "crosscheck2d")]
    Crosscheck2d,
    Heat,
    All,
}

impl Command {
    pub const ALL: [Command; 6] =
        [Command::Pointwise, Command::Norms, Command::Stretch, Command::Crosscheck2d, Command::Heat, Command::All];

    pub fn name(self) -> &'static str {
        match self {
            Command::Pointwise => "pointwise",
            Command::Norms => "norms",
            Command::Stretch => "stretch",
            Command::Crosscheck2d => "crosscheck2d",
            Command::Heat => "heat",
            Command::All => "all",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| invalid(format!("unknown command {s:?}")))
    }
}

/// Names accepted after `tol-`, with their default tolerances.
pub const CHECKS: [(&str, f64); 10] = [
    ("burkholder", 1e-12),
    ("convexity", 1e-9),
    ("scaling", 1e-6),
    ("norms", 0.05),
    ("stretch", 1e-9),
    ("stretch-max", 0.05),
    ("mode-functional", 1e-8),
    ("crosscheck", 0.02),
    ("hext", 1e-2),
    ("structural", 1e-10),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FieldSpec {
    pub n: usize,
    pub extent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CommandConfig {
    pub command: Command,
    pub p_list: Vec<f64>,
    pub grid_spec: GridSpec,
    pub field_spec: FieldSpec,
    pub seed: u64,
    /// Overrides only; see [`CommandConfig::tolerance`].
    pub tolerances: BTreeMap<String, f64>,
    pub output_path: PathBuf,
}

impl Default for CommandConfig {
    fn default() -> Self {
        Self {
            command: Command::All,
            p_list: vec![4.0 / 3.0, 1.5, 2.0, 3.0],
            grid_spec: GridSpec::DEFAULT,
            field_spec: FieldSpec { n: 256, extent: 20.0 },
            seed: 0,
            tolerances: BTreeMap::new(),
            output_path: PathBuf::from("report.json"),
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
    value.trim().parse().map_err(|_| format!("{key}: cannot parse {value:?}"))
}

impl CommandConfig {
    /// Tolerance of a check: the override if present, else the default.
    pub fn tolerance(&self, check: &str) -> f64 {
        self.tolerances.get(check).copied().unwrap_or_else(|| {
            CHECKS
                .iter()
                .find(|(name, _)| *name == check)
                .map(|&(_, v)| v)
                .unwrap_or_else(|| panic!("unknown check {check}"))
        })
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let value = value.trim();
        match key {
            "command" => self.command = value.parse().map_err(|e: ConfigError| e.to_string())?,
            "p" => {
                self.p_list = if value.is_empty() {
                    Vec::new()
                } else {
                    value.split(',').map(|v| parse_num("p", v)).collect::<Result<_, _>>()?
                }
            }
            "grid-min" => self.grid_spec.u_min = parse_num(key, value)?,
            "grid-max" => self.grid_spec.u_max = parse_num(key, value)?,
            "grid-n" => self.grid_spec.n = parse_num(key, value)?,
            "field-n" => self.field_spec.n = parse_num(key, value)?,
            "extent" => self.field_spec.extent = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "out" => {
                if value.is_empty() {
                    return Err("out: empty path".into());
                }
                self.output_path = PathBuf::from(value)
            }
            _ => match key.strip_prefix("tol-") {
                Some(check) if CHECKS.iter().any(|(name, _)| *name == check) => {
                    self.tolerances.insert(check.to_string(), parse_num(key, value)?);
                }
                _ => return Err(format!("unknown key {key:?}")),
            },
        }
        Ok(())
    }

    /// Parses the file format on top of the defaults. Later keys override
    /// earlier ones. The result is validated.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut config = Self::default();
        config.merge_text(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Applies the settings of a config file without validating.
    pub fn merge_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::Parse { line: i + 1, msg: "expected `key = value`".into() })?;
            self.set(key.trim(), value).map_err(|msg| ConfigError::Parse { line: i + 1, msg })?;
        }
        Ok(())
    }

    /// Writes every setting, including defaults, so that [`CommandConfig::parse`]
    /// reproduces `self` exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# beurling run configuration\n");
        let p: Vec<String> = self.p_list.iter().map(|p| p.to_string()).collect();
        let mut line = |k: &str, v: String| writeln!(out, "{k} = {v}").expect("writing to a String");
        line("command", self.command.to_string());
        line("p", p.join(", "));
        line("grid-min", self.grid_spec.u_min.to_string());
        line("grid-max", self.grid_spec.u_max.to_string());
        line("grid-n", self.grid_spec.n.to_string());
        line("field-n", self.field_spec.n.to_string());
        line("extent", self.field_spec.extent.to_string());
        line("seed", self.seed.to_string());
        line("out", self.output_path.display().to_string());
        for (check, v) in &self.tolerances {
            line(&format!("tol-{check}"), v.to_string());
        }
        out
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.p_list.is_empty() {
            return Err(invalid("the p list is empty"));
        }
        if let Some(p) = self.p_list.iter().find(|p| !(p.is_finite() && **p > 1.0 && **p <= 100.0)) {
            return Err(invalid(format!("p = {p} is outside (1, 100]")));
        }
        let g = &self.grid_spec;
        if !(g.u_min > 0.0 && g.u_max.is_finite() && g.u_max > g.u_min) {
            return Err(invalid(format!("grid bounds [{}, {}] must satisfy 0 < min < max < inf", g.u_min, g.u_max)));
        }
        if !(10..=1_000_000).contains(&g.n) {
            return Err(invalid(format!("grid-n = {} is outside [10, 1000000]", g.n)));
        }
        let f = &self.field_spec;
        if !(f.n.is_power_of_two() && (16..=4096).contains(&f.n)) {
            return Err(invalid(format!("field-n = {} must be a power of two in [16, 4096]", f.n)));
        }
        if !(f.extent > 0.0 && f.extent.is_finite()) {
            return Err(invalid(format!("extent = {} must be positive", f.extent)));
        }
        if let Some((k, v)) = self.tolerances.iter().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(invalid(format!("tol-{k} = {v} must be positive")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = CommandConfig::default();
        assert_eq!(CommandConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn keys_override_defaults() {
        let c = CommandConfig::parse("command = norms\np = 2\n# note\n\ntol-norms = 0.1\ngrid-n=100").unwrap();
        assert_eq!(c.command, Command::Norms);
        assert_eq!(c.p_list, vec![2.0]);
        assert_eq!(c.grid_spec.n, 100);
        assert_eq!(c.tolerance("norms"), 0.1);
        assert_eq!(c.tolerance("hext"), 1e-2);
    }

    #[test]
    fn bad_files_are_rejected() {
        assert_eq!(
            CommandConfig::parse("seed = 1\nnonsense").unwrap_err(),
            ConfigError::Parse { line: 2, msg: "expected `key = value`".into() }
        );
        assert!(matches!(CommandConfig::parse("p ="), Err(ConfigError::Invalid(_))));
        assert!(matches!(CommandConfig::parse("p = 0.5"), Err(ConfigError::Invalid(_))));
        assert!(matches!(CommandConfig::parse("field-n = 100"), Err(ConfigError::Invalid(_))));
        assert!(matches!(CommandConfig::parse("tol-unknown = 1"), Err(ConfigError::Parse { .. })));
        assert!(matches!(CommandConfig::parse("command = plot"), Err(ConfigError::Parse { .. })));
    }
}
