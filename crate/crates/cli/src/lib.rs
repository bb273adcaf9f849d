//! Runs the checks of a [`CommandConfig`] and assembles a JSON [`Report`].

pub mod checks;
pub mod config;

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

pub use config::{Command, CommandConfig, ConfigError, FieldSpec};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Record {
    pub name: String,
    pub paper_anchor: String,
    pub values: Value,
    pub tolerance: f64,
    pub pass: bool,
}

impl Record {
    pub fn new(name: &str, anchor: &str, values: Value, tolerance: f64, pass: bool) -> Self {
        Self { name: name.into(), paper_anchor: anchor.into(), values, tolerance, pass }
    }

    pub fn failed(name: &str, anchor: &str, tolerance: f64, error: String) -> Self {
        Self::new(name, anchor, serde_json::json!({ "error": error }), tolerance, false)
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub schema_version: u32,
    pub command: Command,
    pub config: CommandConfig,
    pub records: Vec<Record>,
    pub pass: bool,
    /// Wall-clock seconds per suite and in total.
    pub timings: BTreeMap<String, f64>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// The report as JSON with `timings` removed, for comparing runs.
    pub fn deterministic_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("reports serialize");
        if let Value::Object(map) = &mut v {
            map.remove("timings");
        }
        serde_json::to_string_pretty(&v).expect("reports serialize")
    }

    /// One line per record, then the overall verdict.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let verdict = if r.pass { "PASS" } else { "FAIL" };
            out.push_str(&format!("{verdict}  {:<44} [{}]\n", r.name, r.paper_anchor));
        }
        let passed = self.records.iter().filter(|r| r.pass).count();
        out.push_str(&format!(
            "{}: {passed}/{} checks passed\n",
            if self.pass { "PASS" } else { "FAIL" },
            self.records.len()
        ));
        out
    }
}

type Suite = fn(&CommandConfig) -> Vec<Record>;

fn suites(command: Command) -> Vec<(&'static str, Suite)> {
    let pointwise: (&str, Suite) = ("pointwise", checks::pointwise);
    let norms: (&str, Suite) = ("norms", checks::norms);
    let stretch: (&str, Suite) = ("stretch", checks::stretch);
    let crosscheck: (&str, Suite) = ("crosscheck2d", checks::crosscheck2d);
    let heat: (&str, Suite) = ("heat", checks::heat);
    let structural: (&str, Suite) = ("structural", checks::structural);
    match command {
        Command::Pointwise => vec![pointwise],
        Command::Norms => vec![norms],
        Command::Stretch => vec![stretch],
        Command::Crosscheck2d => vec![crosscheck],
        Command::Heat => vec![heat],
        Command::All => vec![pointwise, norms, stretch, crosscheck, heat, structural],
    }
}

/// Runs every suite of the configured command. The config is assumed valid.
pub fn run(config: &CommandConfig) -> Report {
    let start = Instant::now();
    let mut records = Vec::new();
    let mut timings = BTreeMap::new();
    for (name, suite) in suites(config.command) {
        let t = Instant::now();
        records.extend(suite(config));
        timings.insert(name.to_string(), t.elapsed().as_secs_f64());
    }
    timings.insert("total".to_string(), start.elapsed().as_secs_f64());
    let pass = records.iter().all(|r| r.pass);
    Report { schema_version: SCHEMA_VERSION, command: config.command, config: config.clone(), records, pass, timings }
}
