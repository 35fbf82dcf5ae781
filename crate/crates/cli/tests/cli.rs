use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

/// Runs the binary and returns (exit code, JSON report if written, stderr).
fn run(cmd: &str, config: &Path, extra: &[&str]) -> (i32, Option<Value>, String) {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let output = Command::new(env!("CARGO_BIN_EXE_prodsys"))
        .args([cmd, "--config"])
        .arg(config)
        .arg("--out")
        .arg(&out)
        .args(extra)
        .output()
        .unwrap();
    let report = std::fs::read_to_string(&out).ok().map(|s| serde_json::from_str(&s).unwrap());
    (output.status.code().unwrap(), report, String::from_utf8_lossy(&output.stderr).into_owned())
}

fn shipped(cmd: &str, name: &str) -> (i32, Value) {
    let (code, report, err) = run(cmd, &configs().join(name), &[]);
    (code, report.unwrap_or_else(|| panic!("no report for {name}: {err}")))
}

fn check<'a>(report: &'a Value, id: &str, subject: &str) -> &'a Value {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["id"] == id && c["subject"] == subject)
        .unwrap_or_else(|| panic!("no {id} for {subject}"))
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn example2_check_passes_with_small_residuals() {
    let (code, r) = shipped("check", "example2.json");
    assert_eq!(code, 0);
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["passed"], true);
    for c in r["checks"].as_array().unwrap() {
        for (_, v) in c["residuals"].as_object().unwrap() {
            assert!(v.as_f64().unwrap() < 1e-10, "{c}");
        }
    }
}

#[test]
fn tt_check_reports_two_dimensional_fibers() {
    let (code, r) = shipped("check", "tt.json");
    assert_eq!(code, 0);
    let fibers = &r["fibers"][0];
    assert_eq!(fibers["system"], "T");
    for entry in fibers["dims"].as_array().unwrap() {
        assert_eq!(entry[1], 2);
    }
    assert_eq!(check(&r, "inclusion::check_strong_morphism", "E -> T")["passed"], true);
}

#[test]
fn corrupted_beta_fails_and_names_the_check() {
    let (code, r) = shipped("check", "corrupted_beta.json");
    assert_eq!(code, 1);
    assert_eq!(r["passed"], false);
    let c = check(&r, "inclusion::check_axioms", "broken");
    assert_eq!(c["passed"], false);
    assert!(c["failures"][0].as_str().unwrap().contains("isometry"));
    assert_eq!(check(&r, "inclusion::check_axioms", "E")["passed"], true);
}

#[test]
fn index_of_scalar_powers_configurations() {
    for (name, want) in [("powers_normalized.json", 0), ("powers_defect.json", 1)] {
        let (code, r) = shipped("index", name);
        assert_eq!(code, 0, "{name}");
        let ix = &r["index"];
        assert_eq!(ix["index_estimate"], want);
        assert_eq!(ix["prediction"]["predicted"], want);
        assert_eq!(ix["prediction"]["matches"], true);
    }
    let (_, r) = shipped("index", "powers_defect.json");
    assert!((r["index"]["prediction"]["p"].as_f64().unwrap() - 1.0).abs() < 1e-8);
}

#[test]
fn index_of_three_example2_units() {
    let (code, r) = shipped("index", "example2_index.json");
    assert_eq!(code, 0);
    assert_eq!(r["index"]["index_estimate"], 1);
    assert_eq!(r["index"]["labels"].as_array().unwrap().len(), 3);
}

#[test]
fn powers_comparisons() {
    let (code, r) = shipped("powers", "powers_defect.json");
    assert_eq!(code, 0);
    assert!(r["powers"]["max_discrepancy"].as_f64().unwrap() < 1e-8);
    for t in r["powers"]["times"].as_array().unwrap() {
        assert_eq!((t["dim_tau"].as_u64(), t["dim_amalgam"].as_u64()), (Some(2), Some(2)));
    }
    let (code, r) = shipped("powers", "powers_normalized.json");
    assert_eq!(code, 0);
    assert!(r["powers"]["max_discrepancy"].as_f64().unwrap() < 1e-12);
    for t in r["powers"]["times"].as_array().unwrap() {
        assert_eq!((t["dim_tau"].as_u64(), t["dim_amalgam"].as_u64()), (Some(1), Some(1)));
    }
    let (code, r) = shipped("powers", "powers_matrix.json");
    assert_eq!(code, 0, "{r}");
}

#[test]
fn non_contractive_corner_is_rejected() {
    let (code, r) = shipped("powers", "powers_noncontractive.json");
    assert_eq!(code, 1);
    let c = check(&r, "cp_semigroup::powers_corner", "powers");
    assert!(c["failures"][0].as_str().unwrap().contains("contractive"));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    for (cmd, name) in [("check", "example2.json"), ("index", "powers_defect.json"), ("powers", "powers_defect.json")] {
        let mut outs = Vec::new();
        for i in 0..2 {
            let out = dir.path().join(format!("{cmd}-{i}.json"));
            let status = Command::new(env!("CARGO_BIN_EXE_prodsys"))
                .args([cmd, "--config"])
                .arg(configs().join(name))
                .arg("--out")
                .arg(&out)
                .args(["--format", "json"])
                .output()
                .unwrap();
            assert_eq!(status.status.code(), Some(0));
            // stdout in json format matches the written file
            let file = std::fs::read(&out).unwrap();
            assert_eq!(status.stdout, file);
            outs.push(file);
        }
        assert_eq!(outs[0], outs[1], "{cmd} {name}");
    }
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("{ \"systems\": { \"E\": { \"kind\": \"example2\" } ", "line"),
        ("{ \"systems\": { \"E\": { \"kind\": \"nonsense\" } } }", "systems.E"),
        ("{ \"systemz\": {} }", "unknown field"),
        ("{ \"systems\": { \"X\": { \"kind\": \"scaled\", \"inner\": \"missing\", \"factor\": 1.0 } } }", "unknown system `missing`"),
        (
            "{ \"systems\": { \"T\": { \"kind\": \"cp\", \"hamiltonian\": [[[0,0],[1,0]],[[1,0]]] } } }",
            "row 1 has 1 entries",
        ),
        ("{ \"systems\": { \"E\": { \"kind\": \"example2\" } }, \"probe_times\": [[1, 99999999999]] }", "exponent"),
        ("{ \"systems\": {} }", "index"),
    ];
    for (i, (text, needle)) in cases.iter().enumerate() {
        let cmd = if i == cases.len() - 1 { "index" } else { "check" };
        let (code, report, err) = run(cmd, &write_config(dir.path(), text), &[]);
        assert_eq!(code, 2, "case {i}: {err}");
        assert!(report.is_none());
        assert!(err.contains(needle), "case {i}: {err}");
    }
    let (code, _, _) = run("check", &dir.path().join("absent.json"), &[]);
    assert_eq!(code, 2);
    let (code, _, _) = run("check", &configs().join("example2.json"), &["--tol", "-1"]);
    assert_eq!(code, 2);
}

#[test]
fn overrides_change_thresholds_and_depth() {
    let (code, r, _) = run("check", &configs().join("example2.json"), &["--tol", "1e-12"]);
    assert_eq!(code, 0);
    assert_eq!(check(r.as_ref().unwrap(), "inclusion::check_axioms", "E")["threshold"], 1e-10);
    // too shallow for the Cauchy test: convergence failures are check failures
    let (code, r, _) = run("index", &configs().join("example2_index.json"), &["--depth", "2"]);
    assert_eq!(code, 1);
    let r = r.unwrap();
    assert!(r["covariances"].as_array().unwrap().iter().any(|c| c["error"].is_string()));
}

#[test]
fn library_entry_points() {
    let cfg = prodsys_cli::config::load(&configs().join("tt.json")).unwrap();
    let settings = prodsys_cli::Settings::new(&cfg, None, None).unwrap();
    let report = prodsys_cli::execute("check", &cfg, settings).unwrap();
    assert!(report.passed);
    assert!(report.to_table().contains("cp_semigroup::gns_fiber"));
    assert!(prodsys_cli::execute("bogus", &cfg, settings).is_err());
    assert_eq!(prodsys_cli::run(["prodsys", "check", "--config", configs().join("tt.json").to_str().unwrap(), "--format", "json"]), 0);
    assert_eq!(prodsys_cli::run(["prodsys", "frobnicate"]), 2);
}
