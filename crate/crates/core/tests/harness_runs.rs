use std::path::{Path, PathBuf};
use std::process::Command;

use rinverse::harness::{
    emit, run_in_memory, run_scenario, HarnessError, Mode, OutputFormat, Scenario, EXIT_CONFIG, EXIT_FAIL, EXIT_PASS,
};

fn scenario_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(format!("{name}.json"))
}

#[test]
fn bundled_single_factor_scenarios_pass() {
    for name in ["k1_e2_lambda0", "k1_e2_lambda1", "k2_lambda1", "graph_lambda0"] {
        let (report, _) = run_scenario(&scenario_path(name)).unwrap();
        let failing: Vec<_> = report.checks.iter().filter(|c| !c.pass).map(|c| &c.name).collect();
        assert!(report.pass, "{name}: {failing:?} {:?}", report.errors);
        assert!(report.points.len() >= 200, "{name}: {} points", report.points.len());
        assert_eq!(report.residuals.len(), report.points.len());
    }
}

#[test]
fn negative_controls_fail_their_rows() {
    let (report, _) = run_scenario(&scenario_path("corrupted_rotation")).unwrap();
    assert!(!report.pass);
    assert!(!report.check("transform_stack").unwrap().pass);
    assert!(!report.check("rotation_commutes").unwrap().pass);

    let (report, _) = run_scenario(&scenario_path("invalid_surface")).unwrap();
    assert!(!report.pass);
    assert!(!report.check("descriptor_valid").unwrap().pass);
}

#[test]
fn reports_are_deterministic_across_thread_counts() {
    let scenario = Scenario::load(&scenario_path("k1_e1_complex")).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| run_in_memory(&scenario, Mode::Run).unwrap().0.to_json().unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(4));
}

#[test]
fn csv_has_one_row_per_point_and_check() {
    let dir = tempfile::tempdir().unwrap();
    let (report, timings) = run_scenario(&scenario_path("k1_e2_lambda0")).unwrap();
    let files = emit(&report, Some(&timings), &OutputFormat::Csv, dir.path()).unwrap();
    let text = std::fs::read_to_string(&files[0]).unwrap();
    assert_eq!(text.lines().count(), 1 + report.points.len() * report.checks.len());
    assert!(files[1].ends_with("k1_e2_lambda0.timings.json"));
}

#[test]
fn verify_skips_residual_statistics() {
    let scenario = Scenario::load(&scenario_path("k1_e2_lambda0")).unwrap();
    let (report, _) = run_in_memory(&scenario, Mode::Verify).unwrap();
    assert!(report.pass);
    assert!(report.stats.is_none());
    assert!(report.check("closed_form_constant").is_none());
    assert!(report.check("right_inverse").is_some());
}

#[test]
fn config_errors_are_typed() {
    let mut scenario = Scenario::load(&scenario_path("k1_e2_lambda0")).unwrap();
    scenario.jet_order = 9;
    let err = run_in_memory(&scenario, Mode::Run).unwrap_err();
    assert!(matches!(err, HarnessError::Config { .. }));
    assert_eq!(err.exit_code(), EXIT_CONFIG);
}

#[test]
fn cli_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_rinverse");
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| {
        Command::new(bin)
            .args(args)
            .env("RINVERSE_THREADS", "2")
            .output()
            .unwrap()
            .status
            .code()
            .unwrap()
    };
    let out = dir.path().to_str().unwrap();
    let pass = scenario_path("graph_lambda0");
    let fail = scenario_path("corrupted_rotation");
    assert_eq!(code(&["run", pass.to_str().unwrap(), "--out", out]), EXIT_PASS);
    assert_eq!(code(&["run", fail.to_str().unwrap(), "--out", out]), EXIT_FAIL);
    assert_eq!(code(&["verify", pass.to_str().unwrap(), "--out", out, "--format", "csv"]), EXIT_PASS);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"name\": \"x\"}").unwrap();
    assert_eq!(code(&["run", bad.to_str().unwrap(), "--out", out]), EXIT_CONFIG);
    assert_eq!(code(&["fixtures", "list"]), EXIT_PASS);
    assert!(dir.path().join("graph_lambda0.report.json").exists());
    assert!(dir.path().join("graph_lambda0.report.csv").exists());
}
