//! The experiments behind each subcommand.

use cal_core::charpoly::{
    cal_to_charpoly, classify_reality, depress, roots, routh_hurwitz_stable, DepressedQuartic,
    QuarticCoefficients, RealityClass, RootSet, TAU_EQ,
};
use cal_core::dynamics::{
    action_value, boundary_residual, integrate, integrate_gradient_flow,
    integrate_pure_gradient_flow, minimize_discrete_action, BoundaryResidual, CauchyData, State,
    Trajectory,
};
use cal_core::overload::{
    derivative_decay, design_reset_coefficients, random_entry_state, run_schedule, weight_latch,
    AdaptiveReset, BPhaseReport, DecayPoint, PhaseCoefficients, ResetMode, Schedule, ScheduleRun,
};
use cal_core::params::{
    coercivity_ok, gradient_flow_params, is_gradient_flow_regime, mechanics_gradient_flow_params,
    proposition_ok, CALParameters, Xi,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{ExperimentConfig, ExperimentKind, ResetSpec};
use crate::error::{CliError, CliResult};
use crate::output::OutDir;

/// Result section of a report plus an optional failed post-condition.
pub struct CommandOutput {
    pub result: serde_json::Value,
    pub check_failure: Option<String>,
}

impl CommandOutput {
    fn ok<T: Serialize>(result: &T) -> Self {
        Self {
            result: serde_json::to_value(result).expect("result serializes"),
            check_failure: None,
        }
    }
}

pub fn run_kind(kind: ExperimentKind, cfg: &ExperimentConfig, out: &OutDir) -> CliResult<CommandOutput> {
    match kind {
        ExperimentKind::Analyze => analyze(cfg),
        ExperimentKind::Simulate => simulate(cfg, out),
        ExperimentKind::CompareGradientFlow => compare_gradient_flow(cfg, out),
        ExperimentKind::ActionOracle => action_oracle(cfg, out),
        ExperimentKind::ResetExperiment => reset_experiment(cfg, out),
    }
}

#[derive(Debug, Serialize)]
pub struct AnalyzeResult {
    pub parameters: CALParameters,
    pub charpoly: QuarticCoefficients,
    pub hurwitz_stable: bool,
    pub depressed: DepressedQuartic,
    pub discriminant: f64,
    pub reality_class: RealityClass,
    pub roots: RootSet,
    pub max_real_part: f64,
    /// All roots real within the equality tolerance.
    pub aperiodic: bool,
    /// Only for raw parameters.
    pub coercive: Option<bool>,
    pub proposition_conditions: Option<bool>,
    pub gradient_flow_regime: bool,
}

pub fn analyze(cfg: &ExperimentConfig) -> CliResult<CommandOutput> {
    let p = cfg.parameters.cal()?;
    let cp = cal_to_charpoly(&p)?;
    let dq = depress(&cp);
    let rs = roots(&cp);
    let raw = cfg.parameters.raw();
    let proposition_conditions = match raw {
        Some(r) => Some(proposition_ok(r.theta, p.mu, p.nu, r.gamma1, r.gamma2, r.k)?),
        None => None,
    };
    let xi = raw.map_or(Xi::Plus, |r| r.xi);
    Ok(CommandOutput::ok(&AnalyzeResult {
        parameters: p,
        charpoly: cp,
        hurwitz_stable: routh_hurwitz_stable(&cp),
        depressed: dq,
        discriminant: dq.delta,
        reality_class: classify_reality(&dq),
        roots: rs,
        max_real_part: rs.max_real_part(),
        aperiodic: rs.max_abs_imag() <= TAU_EQ * (1.0 + rs.max_modulus()),
        coercive: raw.map(|r| coercivity_ok(&p, r)),
        proposition_conditions,
        gradient_flow_regime: is_gradient_flow_regime(&p, xi, 1e-12),
    }))
}

struct ResetSetup {
    coeffs: PhaseCoefficients,
    adaptive: Option<AdaptiveReset>,
    mode: ResetMode,
    vandermonde_bound: f64,
}

fn reset_setup(spec: &ResetSpec, a_phase: CALParameters) -> CliResult<ResetSetup> {
    let unit = design_reset_coefficients(1.0, spec.gamma_bar.unwrap_or(1.0))?;
    let c = spec.vandermonde_bound.unwrap_or(unit.vandermonde_bound);
    let (b_phase, adaptive) = if let Some(epsilon) = spec.epsilon {
        let a = AdaptiveReset {
            epsilon,
            vandermonde_bound: c,
            gamma_bar: spec.gamma_bar,
        };
        (unit.coefficients, Some(a))
    } else if let Some(b) = &spec.b_parameters {
        (b.cal()?, None)
    } else {
        let rho = spec.rho.unwrap_or(1.0);
        (design_reset_coefficients(rho, spec.gamma_bar.unwrap_or(rho))?.coefficients, None)
    };
    Ok(ResetSetup {
        coeffs: PhaseCoefficients::new(a_phase, b_phase)?,
        adaptive,
        mode: spec.mode,
        vandermonde_bound: c,
    })
}

fn schedule_of(cfg: &ExperimentConfig) -> CliResult<Option<Schedule>> {
    cfg.schedule.as_ref().map(|s| s.build(cfg.run.horizon)).transpose()
}

/// Coefficients in force at the horizon: the last B-phase's when the
/// schedule ends in B.
fn final_params(run: &ScheduleRun, sched: &Schedule, coeffs: &PhaseCoefficients) -> CALParameters {
    match run.b_phases.last() {
        Some(b) if (b.end - sched.horizon()).abs() <= 1e-9 * sched.horizon().max(1.0) => {
            b.params.unwrap_or(coeffs.b_phase)
        }
        _ => coeffs.a_phase,
    }
}

fn run_with_schedule(
    cfg: &ExperimentConfig,
    sched: &Schedule,
    setup: &ResetSetup,
    mode: ResetMode,
) -> CliResult<ScheduleRun> {
    Ok(run_schedule(
        &setup.coeffs,
        sched,
        &cfg.potential,
        &cfg.input_signal(),
        &cfg.cauchy(),
        cfg.run.step,
        mode,
        setup.adaptive.as_ref(),
    )?)
}

#[derive(Debug, Serialize)]
pub struct SimulateResult {
    pub method: String,
    pub steps: usize,
    pub step: f64,
    pub final_state: State,
    /// Coefficients used for the endpoint residual.
    pub boundary_params: CALParameters,
    pub boundary_residual: BoundaryResidual,
    /// Only without a schedule.
    pub action: Option<f64>,
    pub b_phases: Vec<BPhaseReport>,
    pub max_b_drift: Option<f64>,
    /// Every B-phase drift below `ε` (adaptive design only).
    pub drift_within_bound: Option<bool>,
}

fn write_run(out: &OutDir, name: &str, traj: &Trajectory) -> CliResult<()> {
    out.write_trajectory(&format!("{name}.csv"), traj)?;
    out.write_q_plots(name, traj)
}

pub fn simulate(cfg: &ExperimentConfig, out: &OutDir) -> CliResult<CommandOutput> {
    let p = cfg.parameters.cal()?;
    let input = cfg.input_signal();
    let (traj, b_phases, boundary_params, action) = match schedule_of(cfg)? {
        None => {
            let traj = integrate(&p, &cfg.potential, &input, &cfg.cauchy(), cfg.run.horizon, cfg.run.step)?;
            let action = action_value(&traj, &p, &cfg.potential, &input)?;
            (traj, Vec::new(), p, Some(action))
        }
        Some(sched) => {
            let setup = reset_setup(&cfg.run.reset.clone().unwrap_or_default(), p)?;
            let run = run_with_schedule(cfg, &sched, &setup, setup.mode)?;
            let fp = final_params(&run, &sched, &setup.coeffs);
            (run.trajectory, run.b_phases, fp, None)
        }
    };
    write_run(out, "trajectory", &traj)?;
    if !b_phases.is_empty() {
        let rows: Vec<(f64, f64)> = b_phases.iter().map(|b| (b.index as f64, b.drift)).collect();
        out.write_dat("b_drift.dat", ("b_index", "drift"), &rows)?;
    }
    let max_b_drift = b_phases.iter().map(|b| b.drift).reduce(f64::max);
    let drift_within_bound = if b_phases.iter().any(|b| b.bound.is_some()) {
        Some(b_phases.iter().all(|b| b.bound.is_none_or(|e| b.drift < e)))
    } else {
        None
    };
    Ok(CommandOutput::ok(&SimulateResult {
        method: traj.meta.method.clone(),
        steps: traj.states.len() - 1,
        step: traj.step(),
        final_state: traj.last().clone(),
        boundary_params,
        boundary_residual: boundary_residual(&traj, &boundary_params),
        action,
        b_phases,
        max_b_drift,
        drift_within_bound,
    }))
}

#[derive(Debug, Serialize)]
pub struct ThetaDistance {
    pub theta: f64,
    pub sup_distance: f64,
    pub final_distance: f64,
}

#[derive(Debug, Serialize)]
pub struct GradientFlowResult {
    pub k: f64,
    pub mechanics: bool,
    pub distances: Vec<ThetaDistance>,
    /// Strict decrease along the θ list; absent for a single θ.
    pub monotone_decrease: Option<bool>,
}

pub fn compare_gradient_flow(cfg: &ExperimentConfig, out: &OutDir) -> CliResult<CommandOutput> {
    let thetas = &cfg.run.thetas;
    if thetas.is_empty() {
        return Err(CliError::config("run.thetas", "needs at least one theta"));
    }
    if let Some(t) = thetas.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return Err(CliError::config("run.thetas", format!("theta must be positive, got {t}")));
    }
    let k = cfg.parameters.cal()?.k;
    let input = cfg.input_signal();
    let cauchy = cfg.cauchy();
    let (horizon, h) = (cfg.run.horizon, cfg.run.step);
    let reference = integrate_pure_gradient_flow(k, &cfg.potential, &input, &cauchy.q0, horizon, h)?;
    write_run(out, "gradient_flow", &reference)?;

    let mut distances = Vec::with_capacity(thetas.len());
    for (i, &theta) in thetas.iter().enumerate() {
        let mode = if cfg.run.mechanics {
            mechanics_gradient_flow_params(theta, k)?
        } else {
            gradient_flow_params(theta, k)?
        };
        let reduced = integrate_gradient_flow(&mode, &cfg.potential, &input, &cauchy, horizon, h)?;
        write_run(out, &format!("reduced_{}", i + 1), &reduced)?;
        let last = |t: &Trajectory| t.last().q.clone();
        let final_distance = last(&reduced)
            .iter()
            .zip(last(&reference))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        distances.push(ThetaDistance {
            theta,
            sup_distance: reduced.sup_distance_q(&reference),
            final_distance,
        });
    }
    let rows: Vec<(f64, f64)> = distances.iter().map(|d| (d.theta, d.sup_distance)).collect();
    out.write_dat("distance.dat", ("theta", "sup_distance"), &rows)?;

    let monotone_decrease = (distances.len() > 1).then(|| {
        distances
            .windows(2)
            .all(|w| w[1].sup_distance < w[0].sup_distance)
    });
    let check_failure = (monotone_decrease == Some(false))
        .then(|| "distance to the gradient flow does not decrease along the theta list".to_string());
    Ok(CommandOutput {
        check_failure,
        ..CommandOutput::ok(&GradientFlowResult {
            k,
            mechanics: cfg.run.mechanics,
            distances,
            monotone_decrease,
        })
    })
}

#[derive(Debug, Serialize)]
pub struct OracleResult {
    /// Discrete functional at the grid minimizer.
    pub action_discrete: f64,
    /// Quadrature of the action along the minimizer.
    pub action_oracle: f64,
    /// Quadrature of the action along the ODE solution.
    pub action_ode: f64,
    /// `action_oracle − action_ode`.
    pub action_gap: f64,
    pub ode_seed: CauchyData,
    pub sup_distance: f64,
    pub boundary_residual_oracle: BoundaryResidual,
    pub boundary_residual_ode: BoundaryResidual,
}

pub fn action_oracle(cfg: &ExperimentConfig, out: &OutDir) -> CliResult<CommandOutput> {
    if !cfg.potential.is_quadratic() {
        return Err(CliError::config(
            "potential",
            format!(
                "the action oracle needs a potential quadratic in q, got {}",
                cfg.potential.name()
            ),
        ));
    }
    let p = cfg.parameters.cal()?;
    let input = cfg.input_signal();
    let cauchy = cfg.cauchy();
    let (horizon, h) = (cfg.run.horizon, cfg.run.step);
    let sol = minimize_discrete_action(&p, &cfg.potential, &input, &cauchy.q0, &cauchy.q1, horizon, h)?;
    let s0 = sol.trajectory.first();
    let seed = CauchyData::full(cauchy.q0.clone(), cauchy.q1.clone(), s0.d2q.clone(), s0.d3q.clone());
    let ode = integrate(&p, &cfg.potential, &input, &seed, horizon, h)?;
    write_run(out, "oracle", &sol.trajectory)?;
    write_run(out, "ode", &ode)?;

    let action_oracle = action_value(&sol.trajectory, &p, &cfg.potential, &input)?;
    let action_ode = action_value(&ode, &p, &cfg.potential, &input)?;
    Ok(CommandOutput::ok(&OracleResult {
        action_discrete: sol.action,
        action_oracle,
        action_ode,
        action_gap: action_oracle - action_ode,
        ode_seed: seed,
        sup_distance: ode.sup_distance_q(&sol.trajectory),
        boundary_residual_oracle: boundary_residual(&sol.trajectory, &p),
        boundary_residual_ode: boundary_residual(&ode, &p),
    }))
}

pub const DECAY_RHOS: [f64; 6] = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0];
pub const DEFAULT_TRIALS: usize = 100;

#[derive(Debug, Serialize)]
pub struct PhaseComparison {
    pub index: usize,
    pub start: f64,
    pub end: f64,
    pub rho: Option<f64>,
    pub drift_simulate_b: f64,
    pub drift_hard_reset: f64,
    /// `max_i |qᵢ|` difference between the two modes at B exit.
    pub exit_distance: f64,
    pub exit_derivative_norm_simulate_b: f64,
    pub within_bound: Option<bool>,
    /// End-of-B derivative norm from this entry state over ρ.
    pub decay: Vec<DecayPoint>,
}

#[derive(Debug, Serialize)]
pub struct LatchTally {
    pub trials: usize,
    pub epsilon: f64,
    pub vandermonde_bound: f64,
    pub length: f64,
    pub within_bound: usize,
    pub worst_drift: f64,
}

#[derive(Debug, Serialize)]
pub struct ResetExperimentResult {
    pub vandermonde_bound: f64,
    pub phases: Vec<PhaseComparison>,
    pub max_exit_distance: f64,
    pub boundary_residual_simulate_b: BoundaryResidual,
    pub boundary_residual_hard_reset: BoundaryResidual,
    pub latch: Option<LatchTally>,
}

pub fn reset_experiment(cfg: &ExperimentConfig, out: &OutDir) -> CliResult<CommandOutput> {
    let sched = schedule_of(cfg)?
        .ok_or_else(|| CliError::config("schedule", "reset-experiment needs a schedule"))?;
    let p = cfg.parameters.cal()?;
    let spec = cfg.run.reset.clone().unwrap_or_default();
    let setup = reset_setup(&spec, p)?;
    let sim = run_with_schedule(cfg, &sched, &setup, ResetMode::SimulateB)?;
    let hard = run_with_schedule(cfg, &sched, &setup, ResetMode::HardReset)?;
    write_run(out, "simulate_b", &sim.trajectory)?;
    write_run(out, "hard_reset", &hard.trajectory)?;

    let mut phases = Vec::with_capacity(sim.b_phases.len());
    for (s, r) in sim.b_phases.iter().zip(&hard.b_phases) {
        let exit_distance = s
            .exit
            .q
            .iter()
            .zip(&r.exit.q)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let decay = derivative_decay(&s.entry, &DECAY_RHOS, s.end - s.start)?;
        let rows: Vec<(f64, f64)> = decay.iter().map(|d| (d.rho, d.exit_derivative_norm)).collect();
        out.write_dat(&format!("decay_b{}.dat", s.index), ("rho", "exit_derivative_norm"), &rows)?;
        phases.push(PhaseComparison {
            index: s.index,
            start: s.start,
            end: s.end,
            rho: s.rho,
            drift_simulate_b: s.drift,
            drift_hard_reset: r.drift,
            exit_distance,
            exit_derivative_norm_simulate_b: s.exit_derivative_norm,
            within_bound: s.bound.map(|e| s.drift < e),
            decay,
        });
    }
    let rows: Vec<(f64, f64)> = phases.iter().map(|c| (c.index as f64, c.drift_simulate_b)).collect();
    out.write_dat("b_drift.dat", ("b_index", "drift"), &rows)?;

    let latch = match spec.epsilon {
        Some(epsilon) => {
            let trials = spec.trials.unwrap_or(DEFAULT_TRIALS);
            let length = phases.first().map_or(1.0, |c| c.end - c.start);
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.run.seed);
            let n = cfg.potential.weight_dim();
            let (mut within, mut worst) = (0, 0.0f64);
            for _ in 0..trials {
                let entry = random_entry_state(&mut rng, n, 1.0);
                let o = weight_latch(&entry, epsilon, setup.vandermonde_bound, length)?;
                within += o.within_bound() as usize;
                worst = worst.max(o.drift);
            }
            Some(LatchTally {
                trials,
                epsilon,
                vandermonde_bound: setup.vandermonde_bound,
                length,
                within_bound: within,
                worst_drift: worst,
            })
        }
        None => None,
    };

    let fp_sim = final_params(&sim, &sched, &setup.coeffs);
    let fp_hard = final_params(&hard, &sched, &setup.coeffs);
    Ok(CommandOutput::ok(&ResetExperimentResult {
        vandermonde_bound: setup.vandermonde_bound,
        max_exit_distance: phases.iter().map(|c| c.exit_distance).fold(0.0, f64::max),
        phases,
        boundary_residual_simulate_b: boundary_residual(&sim.trajectory, &fp_sim),
        boundary_residual_hard_reset: boundary_residual(&hard.trajectory, &fp_hard),
        latch,
    }))
}
