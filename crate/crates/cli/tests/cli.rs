use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn condatom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_condatom")).args(args).output().expect("binary runs")
}

fn with_scenario(command: &str, file: &str) -> Output {
    let path = data(file);
    condatom(&[command, "--scenario", path.to_str().unwrap()])
}

fn report(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

#[test]
fn check_atomless_exits_zero() {
    let out = with_scenario("check", "lebesgue.json");
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["verdict"]["atomless"], true);
}

#[test]
fn check_with_atom_exits_one_and_names_it() {
    let out = with_scenario("check", "atom.json");
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["verdict"]["witness"]["location"], "1/2");
    assert_eq!(r["verdict"]["witness"]["weight"], "1/2");
}

#[test]
fn split_reports_left_half() {
    let out = with_scenario("split", "lebesgue.json");
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["B"]["fibers"][0]["intervals"], serde_json::json!([["0", "1/2"]]));
}

#[test]
fn bad_weights_are_an_input_error() {
    let out = with_scenario("check", "bad_weights.json");
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("fiber weights sum to 7/8, expected 1"), "{err}");
}

#[test]
fn unknown_command_and_missing_file_are_input_errors() {
    assert_eq!(
        condatom(&["frobnicate", "--scenario", data("lebesgue.json").to_str().unwrap()]).status.code(),
        Some(2)
    );
    assert_eq!(condatom(&["check", "--scenario", "/nonexistent/scenario.json"]).status.code(), Some(2));
    assert_eq!(condatom(&["check"]).status.code(), Some(2));
    assert_eq!(condatom(&["check", "--depth", "deep"]).status.code(), Some(2));
}

#[test]
fn missing_section_is_an_input_error() {
    let out = with_scenario("densities", "lebesgue.json");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("measures"));
}

#[test]
fn every_command_runs_on_a_suitable_scenario() {
    for (command, file) in [
        ("shrink", "two_fibers.json"),
        ("family", "two_fibers.json"),
        ("uniform", "two_fibers.json"),
        ("scan", "lebesgue.json"),
        ("kernel", "two_fibers.json"),
        ("densities", "two_measures.json"),
    ] {
        let out = with_scenario(command, file);
        assert_eq!(out.status.code(), Some(0), "{command}: {}", String::from_utf8_lossy(&out.stderr));
        let r = report(&out);
        assert_eq!(r["command"], command);
        assert_eq!(r["passed"], true);
    }
}

#[test]
fn commands_needing_the_atomless_property_fail_on_atoms() {
    for command in ["family", "uniform", "kernel"] {
        assert_eq!(with_scenario(command, "atom.json").status.code(), Some(1), "{command}");
    }
}

#[test]
fn densities_of_lebesgue_and_steep() {
    let r = report(&with_scenario("densities", "two_measures.json"));
    assert_eq!(r["cells"][0]["base"], "3/4");
    assert_eq!(r["cells"][1]["base"], "1/4");
    assert_eq!(r["cells"][0]["density"], serde_json::json!(["2/3", "4/3"]));
    assert_eq!(r["cells"][1]["density"], serde_json::json!(["2", "0"]));
    assert_eq!(r["blocks"], 2);
}

#[test]
fn depth_flag_overrides_scenario() {
    let path = data("lebesgue.json");
    let r = report(&condatom(&["family", "--scenario", path.to_str().unwrap(), "--depth", "1"]));
    assert_eq!(r["depth"], 1);
    assert_eq!(r["levels"].as_array().unwrap().len(), 3);
}

#[test]
fn selftest_is_byte_identical_and_out_writes_file() {
    let a = condatom(&["selftest", "--seed", "7", "--count", "10"]);
    let b = condatom(&["selftest", "--seed", "7", "--count", "10"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);

    let target = std::env::temp_dir().join(format!("condatom-report-{}.json", std::process::id()));
    let c = condatom(&["selftest", "--seed", "7", "--count", "10", "--out", target.to_str().unwrap()]);
    assert_eq!(c.status.code(), Some(0));
    assert!(c.stdout.is_empty());
    assert_eq!(std::fs::read(&target).unwrap(), a.stdout);
    let _ = std::fs::remove_file(target);
}
