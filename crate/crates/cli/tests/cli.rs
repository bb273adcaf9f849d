use std::path::PathBuf;
use std::process::Command as Process;

use beurling_cli::{run, Command, CommandConfig, ConfigError};
use beurling_core::GridSpec;
use proptest::prelude::*;

const ANCHORS: [&str; 10] = ["Bur1", "detdefp", "normH", "normH_Ireal", "normH_I", "g", "BWpr", "HI", "hext", "fact"];

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("beurling-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn small(command: Command) -> CommandConfig {
    CommandConfig {
        command,
        p_list: vec![1.5, 3.0],
        grid_spec: GridSpec { u_min: 1e-4, u_max: 1e4, n: 200 },
        seed: 11,
        ..CommandConfig::default()
    }
}

#[test]
fn norms_at_two_on_the_default_grid() {
    let config = CommandConfig { command: Command::Norms, p_list: vec![2.0], ..CommandConfig::default() };
    let report = run(&config);
    assert!(report.pass, "{}", report.summary());
    let estimate = |name: &str| {
        let r = report.records.iter().find(|r| r.name == name).unwrap();
        r.values["estimate"].as_f64().unwrap()
    };
    assert!((estimate("norm_hardy[p=2]") - 2.0).abs() < 0.05 * 2.0);
    assert!((estimate("norm_hardy_minus_id[p=2]") - 1.0).abs() < 0.05);
}

#[test]
fn empty_p_list_is_invalid() {
    assert!(matches!(CommandConfig::parse("p =\n"), Err(ConfigError::Invalid(_))));
    let path = scratch("empty.conf");
    std::fs::write(&path, "command = norms\np =\n").unwrap();
    let out = Process::new(env!("CARGO_BIN_EXE_beurling")).arg("--config").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("p list is empty"));
}

#[test]
fn all_is_deterministic() {
    let config = small(Command::All);
    let a = run(&config);
    let b = run(&config);
    assert_eq!(a.deterministic_json(), b.deterministic_json());
    assert!(a.records.iter().all(|r| ANCHORS.contains(&r.paper_anchor.as_str())));
    assert_eq!(a.pass, a.records.iter().all(|r| r.pass));
    let names: Vec<&str> = a.records.iter().map(|r| r.name.as_str()).collect();
    for expected in ["burkholder", "norm_hardy[p=1.5]", "stretch_random[p=3]", "crosscheck", "hext", "structural"] {
        assert!(names.contains(&expected), "{expected} missing from {names:?}");
    }
}

#[test]
fn binary_writes_the_same_report_twice() {
    let mut reports = Vec::new();
    for i in 0..2 {
        let out_path = scratch(&format!("pointwise-{i}.json"));
        let status = Process::new(env!("CARGO_BIN_EXE_beurling"))
            .args(["--command", "pointwise", "--p", "1.5", "--p", "3", "--seed", "5"])
            .arg("--out")
            .arg(&out_path)
            .output()
            .unwrap()
            .status;
        assert_eq!(status.code(), Some(0));
        let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
        assert_eq!(v["schemaVersion"], 1);
        v.as_object_mut().unwrap().remove("timings");
        v["config"].as_object_mut().unwrap().remove("outputPath");
        reports.push(serde_json::to_string(&v).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn failing_checks_set_the_exit_code() {
    let out_path = scratch("strict.json");
    let status = Process::new(env!("CARGO_BIN_EXE_beurling"))
        .args(["--command", "norms", "--p", "2", "--grid-n", "50", "--tol-norms=1e-6"])
        .arg("--out")
        .arg(&out_path)
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(v["pass"], false);
    assert_eq!(v["config"]["tolerances"]["norms"], 1e-6);
}

#[test]
fn flags_override_the_config_file() {
    let path = scratch("base.conf");
    std::fs::write(&path, "command = heat\nfield-n = 64\nseed = 3\n").unwrap();
    let out_path = scratch("heat.json");
    let status = Process::new(env!("CARGO_BIN_EXE_beurling"))
        .arg("--config")
        .arg(&path)
        .args(["--seed", "4", "--tol-hext", "0.05"])
        .arg("--out")
        .arg(&out_path)
        .output()
        .unwrap()
        .status;
    assert!(status.code().is_some());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(v["command"], "heat");
    assert_eq!(v["config"]["seed"], 4);
    assert_eq!(v["config"]["fieldSpec"]["n"], 64);
    assert_eq!(v["records"][0]["tolerance"], 0.05);
}

#[test]
fn unknown_flags_are_usage_errors() {
    let out = Process::new(env!("CARGO_BIN_EXE_beurling")).args(["--tol-nothing", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Process::new(env!("CARGO_BIN_EXE_beurling")).args(["--colour"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

fn config() -> impl Strategy<Value = CommandConfig> {
    (
        prop::sample::select(Command::ALL.to_vec()),
        prop::collection::vec(1.0001f64..50.0, 1..5),
        (1e-9f64..1.0, 2.0f64..1e9, 10usize..100_000),
        (4u32..12, 0.5f64..1e3),
        any::<u64>(),
        prop::collection::btree_map(prop::sample::select(vec!["norms", "hext", "burkholder"]), 1e-15f64..1.0, 0..3),
        "[a-z][a-z0-9_./-]{0,20}",
    )
        .prop_map(|(command, p_list, (u_min, u_max, n), (k, extent), seed, tols, out)| CommandConfig {
            command,
            p_list,
            grid_spec: GridSpec { u_min, u_max, n },
            field_spec: beurling_cli::FieldSpec { n: 1 << k, extent },
            seed,
            tolerances: tols.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            output_path: out.into(),
        })
}

proptest! {
    #[test]
    fn config_text_round_trips(c in config()) {
        prop_assert_eq!(CommandConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn config_parser_never_panics(text in "[ -~\n]{0,200}") {
        let _ = CommandConfig::parse(&text);
    }
}
