use serde::{Deserialize, Serialize};

use super::{design_reset_coefficients, gate_input, hard_reset, rho_for_epsilon};
use super::{PhaseCoefficients, PhaseKind, Schedule};
use crate::charpoly::{cal_to_charpoly, roots};
use crate::dynamics::{
    check_finite, grid, CalSystem, CauchyData, FreeSolution, Rk4, State, Trajectory,
    TrajectoryMeta,
};
use crate::error::{CalError, Result};
use crate::input::InputSignal;
use crate::params::CALParameters;
use crate::potential::PotentialSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResetMode {
    /// Integrate the B-phase equation.
    SimulateB,
    /// Zero the derivatives at B entry and hold `q`.
    HardReset,
}

/// Per-B-phase coefficient design from the entry state: `ρ` from
/// [`rho_for_epsilon`], then [`design_reset_coefficients`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveReset {
    pub epsilon: f64,
    pub vandermonde_bound: f64,
    /// `γ̄`; defaults to `ρ`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_bar: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BPhaseMethod {
    ClosedForm,
    Rk4,
    HardReset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BPhaseReport {
    pub index: usize,
    pub start: f64,
    pub end: f64,
    pub entry: State,
    pub exit: State,
    pub method: BPhaseMethod,
    /// Coefficients used on this B-phase (absent for hard resets).
    pub params: Option<CALParameters>,
    pub rho: Option<f64>,
    /// Target drift bound ε when the adaptive design is on.
    pub bound: Option<f64>,
    /// `max_i |qᵢ(exit) − qᵢ(entry)|`.
    pub drift: f64,
    pub entry_derivative_norm: f64,
    pub exit_derivative_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleRun {
    pub trajectory: Trajectory,
    pub b_phases: Vec<BPhaseReport>,
}

/// Grid index of each breakpoint; they must sit on the step grid.
fn breakpoint_indices(schedule: &Schedule, h: f64) -> Result<Vec<usize>> {
    schedule
        .breakpoints()
        .iter()
        .map(|&b| {
            let i = (b / h).round();
            if (i * h - b).abs() > 1e-9 * b.max(1.0) {
                Err(CalError::InvalidSchedule(format!(
                    "breakpoint {b} is not a multiple of the step {h}"
                )))
            } else {
                Ok(i as usize)
            }
        })
        .collect()
}

pub fn schedule_id(schedule: &Schedule) -> String {
    let bps: Vec<String> = schedule.breakpoints().iter().map(|b| b.to_string()).collect();
    format!("ab[{}]/T={}", bps.join(","), schedule.horizon())
}

/// Simulates the switched system on `[0, T]` with `T` the schedule horizon.
/// A-phases integrate the A coefficients with the gated input by RK4;
/// B-phases follow `mode`, with the B coefficients from `coeffs` or, when
/// `adaptive` is given, designed per phase from its entry state.
#[allow(clippy::too_many_arguments)]
pub fn run_schedule(
    coeffs: &PhaseCoefficients,
    schedule: &Schedule,
    potential: &PotentialSpec,
    input: &InputSignal,
    cauchy: &CauchyData,
    h: f64,
    mode: ResetMode,
    adaptive: Option<&AdaptiveReset>,
) -> Result<ScheduleRun> {
    coeffs.validate()?;
    schedule.validate()?;
    let horizon = schedule.horizon();
    let (steps, h) = grid(horizon, h)?;
    let cuts = breakpoint_indices(schedule, h)?;
    let gated = gate_input(input.clone(), schedule.clone());
    let mut sys_a = CalSystem::new(&coeffs.a_phase, potential, &gated)?;
    let n = potential.weight_dim();

    let start = cauchy.to_state(n)?;
    let mut y = vec![0.0; 4 * n];
    start.pack(&mut y);
    check_finite(&y, 0.0)?;
    let mut states = Vec::with_capacity(steps + 1);
    states.push(start);
    let mut rk = Rk4::new(4 * n);
    let mut b_phases = Vec::new();

    let mut edges = vec![0usize];
    edges.extend(&cuts);
    edges.push(steps);
    for (j, iv) in schedule.intervals().iter().enumerate() {
        let (i0, i1) = (edges[j], edges[j + 1]);
        match iv.kind {
            PhaseKind::A => {
                for i in i0..i1 {
                    let t = i as f64 * h;
                    rk.step(&mut |t, y, dy| sys_a.eval(t, y, dy), t, h, &mut y)?;
                    let t1 = (i + 1) as f64 * h;
                    check_finite(&y, t1)?;
                    states.push(State::unpack(t1, &y, n));
                }
            }
            PhaseKind::B => {
                let entry = states[i0].clone();
                let report = run_b_phase(
                    coeffs, potential, &gated, &entry, i0, i1, h, mode, adaptive, &mut states,
                )?;
                states.last().expect("nonempty").pack(&mut y);
                b_phases.push(BPhaseReport {
                    index: iv.index,
                    start: iv.start,
                    end: iv.end,
                    ..report
                });
            }
        }
    }

    Ok(ScheduleRun {
        trajectory: Trajectory {
            states,
            meta: TrajectoryMeta {
                method: match mode {
                    ResetMode::SimulateB => "schedule_simulate_b".into(),
                    ResetMode::HardReset => "schedule_hard_reset".into(),
                },
                step: h,
                params: Some(coeffs.a_phase),
                schedule_id: Some(schedule_id(schedule)),
                potential_id: potential.name().into(),
                input_id: input.name().into(),
            },
        },
        b_phases,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_b_phase(
    coeffs: &PhaseCoefficients,
    potential: &PotentialSpec,
    gated: &InputSignal,
    entry: &State,
    i0: usize,
    i1: usize,
    h: f64,
    mode: ResetMode,
    adaptive: Option<&AdaptiveReset>,
    states: &mut Vec<State>,
) -> Result<BPhaseReport> {
    let t0 = i0 as f64 * h;
    let mut rho = None;
    let mut params = None;
    let method = match mode {
        ResetMode::HardReset => {
            let held = hard_reset(entry);
            for i in i0 + 1..=i1 {
                states.push(State {
                    t: i as f64 * h,
                    ..held.clone()
                });
            }
            BPhaseMethod::HardReset
        }
        ResetMode::SimulateB => {
            let (p, exact_roots) = match adaptive {
                Some(a) => {
                    let r = rho_for_epsilon(a.epsilon, entry, a.vandermonde_bound)?;
                    let design = design_reset_coefficients(r, a.gamma_bar.unwrap_or(r))?;
                    rho = Some(r);
                    (design.coefficients, design.complex_roots())
                }
                None => {
                    let p = coeffs.b_phase;
                    (p, roots(&cal_to_charpoly(&p)?).roots)
                }
            };
            params = Some(p);
            match FreeSolution::with_roots(exact_roots, &CauchyData::from_state(entry), t0) {
                Ok(sol) => {
                    for i in i0 + 1..=i1 {
                        let s = sol.eval(i as f64 * h);
                        if !s.is_finite() {
                            return Err(CalError::NonFinite { t: s.t });
                        }
                        states.push(s);
                    }
                    BPhaseMethod::ClosedForm
                }
                Err(CalError::ConfluentRoots { .. }) => {
                    let mut sys = CalSystem::new(&p, potential, gated)?;
                    let n = entry.dim();
                    let mut y = vec![0.0; 4 * n];
                    entry.pack(&mut y);
                    let mut rk = Rk4::new(4 * n);
                    for i in i0..i1 {
                        let t = i as f64 * h;
                        rk.step(&mut |t, y, dy| sys.eval(t, y, dy), t, h, &mut y)?;
                        let t1 = (i + 1) as f64 * h;
                        check_finite(&y, t1)?;
                        states.push(State::unpack(t1, &y, n));
                    }
                    BPhaseMethod::Rk4
                }
                Err(e) => return Err(e),
            }
        }
    };
    let exit = states.last().expect("nonempty").clone();
    let drift = entry
        .q
        .iter()
        .zip(&exit.q)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(BPhaseReport {
        index: 0,
        start: t0,
        end: i1 as f64 * h,
        entry_derivative_norm: entry.derivative_max_abs(),
        exit_derivative_norm: exit.derivative_max_abs(),
        entry: entry.clone(),
        exit,
        method,
        params,
        rho,
        bound: adaptive.map(|a| a.epsilon),
        drift,
    })
}

/// [`run_schedule`] with the fixed B coefficients, returning only the
/// trajectory.
pub fn simulate_with_schedule(
    coeffs: &PhaseCoefficients,
    schedule: &Schedule,
    potential: &PotentialSpec,
    input: &InputSignal,
    cauchy: &CauchyData,
    h: f64,
    mode: ResetMode,
) -> Result<Trajectory> {
    run_schedule(coeffs, schedule, potential, input, cauchy, h, mode, None).map(|r| r.trajectory)
}
