use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cal_cli::config::ExperimentConfig;
use cal_core::charpoly::{cal_to_charpoly, roots};
use cal_core::dynamics::State;
use cal_core::overload::{b_phase_exit, design_reset_coefficients};
use cal_core::params::CALParameters;
use serde_json::{json, Value};
use tempfile::TempDir;

fn cal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cal"))
        .args(args)
        .output()
        .expect("binary runs")
}

struct Case {
    dir: TempDir,
}

impl Case {
    fn new(config: &Value) -> Self {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("config.json"), serde_json::to_string_pretty(config).unwrap()).unwrap();
        Self { dir }
    }

    fn config(&self) -> PathBuf {
        self.dir.path().join("config.json")
    }

    fn out(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn run(&self, sub: &str, out: &str, extra: &[&str]) -> Output {
        let cfg = self.config();
        let dir = self.out(out);
        let mut args = vec![sub, "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()];
        args.extend_from_slice(extra);
        cal(&args)
    }
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

fn derived(theta: f64, mu: f64, nu: f64, gamma: f64, k: f64) -> Value {
    json!({"derived": {"theta": theta, "mu": mu, "nu": nu, "gamma": gamma, "k": k}})
}

#[test]
fn analyze_predicate_example() {
    let case = Case::new(&json!({"parameters": derived(1.0, 1.0, 0.0, 0.0, 1.0), "run": {"horizon": 1}}));
    let o = case.run("analyze", "out", &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&case.out("out"));
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["status"], "ok");
    let cp = &r["result"]["charpoly"];
    assert_eq!([f(&cp["b"]), f(&cp["c"]), f(&cp["d"]), f(&cp["e"])], [2.0, 1.0, 0.0, 1.0]);
    assert_eq!(r["result"]["hurwitz_stable"], false);
    assert!(r["result"]["coercive"].is_null());
}

#[test]
fn analyze_quadruple_root() {
    // θ = 2, μ = 1, γ = 1, ν = 0, k = 1 gives (x + 1)⁴
    let case = Case::new(&json!({"parameters": derived(2.0, 1.0, 0.0, 1.0, 1.0), "run": {"horizon": 1}}));
    assert_eq!(case.run("analyze", "out", &[]).status.code(), Some(0));
    let r = &report(&case.out("out"))["result"];
    let cp = &r["charpoly"];
    assert_eq!([f(&cp["b"]), f(&cp["c"]), f(&cp["d"]), f(&cp["e"])], [4.0, 6.0, 4.0, 1.0]);
    assert_eq!(r["hurwitz_stable"], true);
    let class = r["reality_class"].as_str().unwrap();
    assert!(["RealThreeEqual", "TwoPairsEqualReal", "AllZeroLike", "RealTwoEqual"].contains(&class), "{class}");
    for z in r["roots"]["roots"].as_array().unwrap() {
        // a quadruple root is only resolved to about ε^{1/4}
        assert!((f(&z[0]) + 1.0).abs() < 1e-3 && f(&z[1]).abs() < 1e-3, "{z}");
    }
}

#[test]
fn analyze_raw_parameters_reports_coercivity() {
    let raw = json!({"raw": {"alpha": 0.75, "beta": 1.75, "gamma1": 0.5, "gamma2": 0.5, "k": 1, "theta": 1}});
    let case = Case::new(&json!({"parameters": raw, "run": {"horizon": 1}}));
    assert_eq!(case.run("analyze", "out", &[]).status.code(), Some(0));
    let r = &report(&case.out("out"))["result"];
    assert_eq!(r["coercive"], true);
    assert_eq!(f(&r["parameters"]["mu"]), 1.0);
    assert_eq!(f(&r["parameters"]["gamma"]), 0.25);
    assert!(r["proposition_conditions"].is_boolean());
}

#[test]
fn both_parameter_blocks_exit_with_config_error() {
    let params = json!({
        "raw": {"alpha": 1, "beta": 1, "gamma1": 0, "gamma2": 0, "k": 1, "theta": 1},
        "derived": {"theta": 1, "mu": 1, "nu": 0, "gamma": 0, "k": 1}
    });
    let case = Case::new(&json!({"parameters": params, "run": {"horizon": 1}}));
    let o = case.run("analyze", "out", &[]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("parameters") && err.contains("line"), "{err}");
    assert!(!case.out("out").join("report.json").exists());
}

#[test]
fn malformed_json_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.json");
    fs::write(&p, "{\"parameters\": ").unwrap();
    let o = cal(&["simulate", "--config", p.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let missing = dir.path().join("missing.json");
    let o = cal(&["simulate", "--config", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn simulate_zero_problem() {
    let case = Case::new(&json!({
        "parameters": derived(1.0, 1.0, 2.0, 0.5, 1.0),
        "potential": {"kind": "zero", "dim": 2},
        "run": {"horizon": 1, "step": 0.01}
    }));
    assert_eq!(case.run("simulate", "out", &[]).status.code(), Some(0));
    let out = case.out("out");
    let r = report(&out);
    assert_eq!(f(&r["result"]["action"]), 0.0);
    let csv = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap().split(',').count(), 9);
    let mut rows = 0;
    for l in lines {
        rows += 1;
        assert!(l.split(',').skip(1).all(|x| x.parse::<f64>().unwrap() == 0.0));
    }
    assert_eq!(rows, 101);
    assert!(out.join("trajectory.csv.meta.json").exists());
    assert!(out.join("trajectory_q2.dat").exists());
    assert!(out.join("timing.json").exists());
}

#[test]
fn unstable_parameters_exit_two_with_blow_up_time() {
    let p = CALParameters::new(1.0, 1.0, 0.0, 0.0, -1e4).unwrap();
    let growth = roots(&cal_to_charpoly(&p).unwrap()).max_real_part();
    assert!(growth > 5.0);
    let case = Case::new(&json!({
        "parameters": derived(1.0, 1.0, 0.0, 0.0, -1e4),
        "run": {"horizon": 400, "step": 0.01, "cauchy": {"q0": [1], "q1": [0]}}
    }));
    assert_eq!(case.run("simulate", "out", &[]).status.code(), Some(2));
    let r = report(&case.out("out"));
    assert_eq!(r["status"], "numerical_failure");
    let t = f(&r["failure"]["blow_up_time"]);
    // e^{λt} crosses the f64 range near t = ln(f64::MAX)/λ
    let expected = f64::MAX.ln() / growth;
    assert!(t > 0.8 * expected && t < 1.5 * expected, "blow-up at {t}, expected about {expected}");
}

fn reset_config() -> Value {
    json!({
        "parameters": derived(1.0, 1.0, 2.0, 0.5, 1.0),
        "potential": {"kind": "quadratic_tracking", "dim": 2, "weight": 1.0},
        "input": {"kind": "sinusoid", "amplitude": [0.05, 0.02], "frequency": [0.1, 0.2]},
        "schedule": {"period_a": 1.0, "period_b": 1.0, "count": 3},
        "run": {
            "horizon": 6, "step": 0.001,
            "cauchy": {"q0": [0.1, -0.1], "q1": [0.01, 0.0]},
            "reset": {"epsilon": 0.05}
        }
    })
}

fn state(v: &Value) -> State {
    serde_json::from_value(v.clone()).unwrap()
}

#[test]
fn simulate_with_reset_schedule() {
    let case = Case::new(&reset_config());
    assert_eq!(case.run("simulate", "out", &[]).status.code(), Some(0));
    let r = &report(&case.out("out"))["result"];
    let phases = r["b_phases"].as_array().unwrap();
    assert_eq!(phases.len(), 3);
    for b in phases {
        // independent replay of the B-phase from its entry state
        let rho = f(&b["rho"]);
        let design = design_reset_coefficients(rho, rho).unwrap();
        let entry = state(&b["entry"]);
        let exit = b_phase_exit(&design, &entry, f(&b["end"]) - f(&b["start"])).unwrap();
        let drift = entry
            .q
            .iter()
            .zip(&exit.q)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!((drift - f(&b["drift"])).abs() < 1e-12);
        assert!(f(&b["drift"]) < 0.05, "drift {}", b["drift"]);
    }
    assert_eq!(r["drift_within_bound"], true);
    assert!(case.out("out").join("b_drift.dat").exists());
}

#[test]
fn reset_experiment_compares_modes() {
    let case = Case::new(&reset_config());
    assert_eq!(case.run("reset-experiment", "out", &["--seed", "3"]).status.code(), Some(0));
    let out = case.out("out");
    let r = report(&out);
    assert_eq!(r["config"]["run"]["seed"], 3);
    let res = &r["result"];
    let phases = res["phases"].as_array().unwrap();
    assert_eq!(phases.len(), 3);
    for c in phases {
        assert_eq!(f(&c["drift_hard_reset"]), 0.0);
        let decay: Vec<f64> = c["decay"]
            .as_array()
            .unwrap()
            .iter()
            .map(|d| f(&d["exit_derivative_norm"]))
            .collect();
        // ρ = 1, 2, 4, ...: monotone once ρ|B| ≥ 4, with a transient bump below
        assert!(decay[2..].windows(2).all(|w| w[1] < w[0]), "{decay:?}");
        assert!(decay[5] < 1e-6 * decay[0], "{decay:?}");
    }
    assert_eq!(res["latch"]["trials"], 100);
    assert!(out.join("simulate_b.csv").exists() && out.join("hard_reset.csv").exists());
    assert!(out.join("decay_b0.dat").exists());

    let no_schedule = Case::new(&json!({"parameters": derived(1.0, 1.0, 2.0, 0.5, 1.0), "run": {"horizon": 1}}));
    assert_eq!(no_schedule.run("reset-experiment", "out", &[]).status.code(), Some(1));
}

fn gradient_flow_config(thetas: &[f64], mechanics: bool) -> Value {
    json!({
        "parameters": derived(1.0, 1.0, 0.0, 0.0, 1.0),
        "run": {"horizon": 5, "step": 1e-4, "thetas": thetas, "mechanics": mechanics,
                "cauchy": {"q0": [1], "q1": [0]}}
    })
}

#[test]
fn gradient_flow_limit() {
    for mechanics in [false, true] {
        let case = Case::new(&gradient_flow_config(&[10.0, 100.0, 1000.0], mechanics));
        assert_eq!(case.run("compare-gradient-flow", "out", &[]).status.code(), Some(0));
        let r = &report(&case.out("out"))["result"];
        assert_eq!(r["monotone_decrease"], true);
        let d: Vec<f64> = r["distances"].as_array().unwrap().iter().map(|x| f(&x["sup_distance"])).collect();
        assert!(d[2] < 1e-2, "{d:?}");
        // reference is e^{−t}
        let csv = fs::read_to_string(case.out("out").join("gradient_flow.csv")).unwrap();
        for l in csv.lines().skip(1).step_by(5000) {
            let cols: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            assert!((cols[1] - (-cols[0]).exp()).abs() < 1e-12);
        }
    }
}

#[test]
fn gradient_flow_single_theta_and_bad_lists() {
    let case = Case::new(&gradient_flow_config(&[10.0], false));
    assert_eq!(case.run("compare-gradient-flow", "out", &["--step", "0.001"]).status.code(), Some(0));
    let r = report(&case.out("out"));
    assert!(r["result"]["monotone_decrease"].is_null());
    assert_eq!(f(&r["config"]["run"]["step"]), 0.001);

    let increasing = Case::new(&gradient_flow_config(&[1000.0, 10.0], false));
    assert_eq!(increasing.run("compare-gradient-flow", "out", &["--step", "0.001"]).status.code(), Some(2));
    assert_eq!(report(&increasing.out("out"))["status"], "check_failed");

    let empty = Case::new(&gradient_flow_config(&[], false));
    assert_eq!(empty.run("compare-gradient-flow", "out", &[]).status.code(), Some(1));
}

#[test]
fn action_oracle_zero_problem() {
    let case = Case::new(&json!({
        "parameters": derived(1.0, 1.0, 2.0, 0.5, 1.0),
        "potential": {"kind": "zero", "dim": 1},
        "run": {"horizon": 1, "step": 0.01}
    }));
    assert_eq!(case.run("action-oracle", "out", &[]).status.code(), Some(0));
    let r = &report(&case.out("out"))["result"];
    for key in ["action_discrete", "action_oracle", "action_ode", "sup_distance"] {
        assert_eq!(f(&r[key]), 0.0, "{key}");
    }
}

#[test]
fn action_oracle_tracking_converges() {
    let distance = |h: f64| {
        let case = Case::new(&json!({
            "parameters": derived(1.0, 1.0, 2.0, 0.5, 1.0),
            "potential": {"kind": "quadratic_tracking", "dim": 2, "weight": 1.0},
            "input": {"kind": "piecewise_constant", "breakpoints": [], "values": [[1.0, -0.5]]},
            "run": {"horizon": 2, "step": h, "cauchy": {"q0": [0.2, 0.0], "q1": [0.5, -1.0]}}
        }));
        assert_eq!(case.run("action-oracle", "out", &[]).status.code(), Some(0));
        let r = report(&case.out("out"))["result"].clone();
        assert!(f(&r["action_gap"]).abs() < 1e-2, "{}", r["action_gap"]);
        f(&r["sup_distance"])
    };
    let (d1, d2) = (distance(0.02), distance(0.01));
    assert!(d1 / d2 > 3.5 && d1 / d2 < 4.5, "{d1} {d2}");
}

#[test]
fn action_oracle_rejects_non_quadratic_potential() {
    let case = Case::new(&json!({
        "parameters": derived(1.0, 1.0, 2.0, 0.5, 1.0),
        "potential": {"kind": "feature_demo", "input_dim": 2, "hidden": 1, "nonlinearity": "tanh"},
        "run": {"horizon": 1, "step": 0.01}
    }));
    let o = case.run("action-oracle", "out", &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("quadratic"));
}

#[test]
fn identical_runs_are_byte_identical() {
    let case = Case::new(&reset_config());
    for out in ["a", "b"] {
        assert_eq!(case.run("reset-experiment", out, &["--seed", "11"]).status.code(), Some(0));
    }
    for file in ["report.json", "simulate_b.csv", "hard_reset.csv", "simulate_b.csv.meta.json", "b_drift.dat"] {
        let a = fs::read(case.out("a").join(file)).unwrap();
        let b = fs::read(case.out("b").join(file)).unwrap();
        assert!(a == b, "{file} differs");
    }
}

#[test]
fn report_echo_round_trips() {
    let mut cfg = reset_config();
    cfg["run"]["cauchy"]["q2"] = json!([0.1, 1e-300]);
    cfg["run"]["step"] = json!(0.1 + 0.2 - 0.3 + 0.001);
    let case = Case::new(&cfg);
    assert_eq!(case.run("simulate", "out", &["--seed", "5"]).status.code(), Some(0));
    let echo = report(&case.out("out"))["config"].clone();
    let reparsed = ExperimentConfig::parse(&echo.to_string()).unwrap();
    let mut expected = ExperimentConfig::parse(&cfg.to_string()).unwrap();
    expected.run.seed = 5;
    expected.run.kind = Some(cal_cli::config::ExperimentKind::Simulate);
    assert_eq!(reparsed, expected);
}

#[test]
fn sweep_runs_each_config_into_its_own_directory() {
    let dir = tempfile::tempdir().unwrap();
    let mut paths = Vec::new();
    let configs = [
        json!({"parameters": derived(1.0, 1.0, 0.0, 0.0, 1.0), "run": {"horizon": 1, "kind": "analyze"}}),
        json!({"parameters": derived(1.0, 1.0, 2.0, 0.5, 1.0), "run": {"horizon": 1, "step": 0.01, "kind": "simulate"}}),
        json!({"parameters": derived(1.0, 1.0, 2.0, 0.5, 1.0), "run": {"horizon": 1}}),
    ];
    for (i, c) in configs.iter().enumerate() {
        let p = dir.path().join(format!("c{i}.json"));
        fs::write(&p, c.to_string()).unwrap();
        paths.push(p.to_str().unwrap().to_string());
    }
    let out = dir.path().join("sweep");
    let mut args = vec!["sweep", "--out", out.to_str().unwrap(), "--jobs", "2", "--configs"];
    args.extend(paths.iter().map(String::as_str));
    let o = cal(&args);
    assert_eq!(o.status.code(), Some(1), "third config lacks run.kind");
    let summary: Value = serde_json::from_str(&fs::read_to_string(out.join("sweep.json")).unwrap()).unwrap();
    let codes: Vec<i64> = summary.as_array().unwrap().iter().map(|e| e["exit_code"].as_i64().unwrap()).collect();
    assert_eq!(codes, vec![0, 0, 1]);
    assert!(out.join("0_c0/report.json").exists());
    assert!(out.join("1_c1/trajectory.csv").exists());
}

#[test]
fn kind_mismatch_is_rejected() {
    let case = Case::new(&json!({"parameters": derived(1.0, 1.0, 0.0, 0.0, 1.0), "run": {"horizon": 1, "kind": "analyze"}}));
    assert_eq!(case.run("simulate", "out", &[]).status.code(), Some(1));
}
