use serde::{Deserialize, Serialize};

use super::{check_input, State, Trajectory};
use crate::error::Result;
use crate::input::InputSignal;
use crate::params::CALParameters;
use crate::potential::PotentialSpec;

/// Natural right-endpoint conditions evaluated at the final sample, with
/// the common factor `e^{θT}` divided out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryResidual {
    /// `μq̈ + γq̇`
    pub r1: Vec<f64>,
    /// `μq⁽³⁾ + θμq̈ + (θγ − ν)q̇`
    pub r2: Vec<f64>,
    pub r1_norm: f64,
    pub r2_norm: f64,
    pub r1_normalized: f64,
    pub r2_normalized: f64,
}

impl BoundaryResidual {
    pub fn max_normalized(&self) -> f64 {
        self.r1_normalized.max(self.r2_normalized)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn boundary_residual_at(state: &State, params: &CALParameters) -> BoundaryResidual {
    let CALParameters {
        theta,
        mu,
        nu,
        gamma,
        ..
    } = *params;
    let r1: Vec<f64> = (0..state.dim())
        .map(|i| mu * state.d2q[i] + gamma * state.dq[i])
        .collect();
    let r2: Vec<f64> = (0..state.dim())
        .map(|i| mu * state.d3q[i] + theta * mu * state.d2q[i] + (theta * gamma - nu) * state.dq[i])
        .collect();
    let (n1, n2) = (norm(&r1), norm(&r2));
    let scale = 1.0 + state.max_abs();
    BoundaryResidual {
        r1,
        r2,
        r1_norm: n1,
        r2_norm: n2,
        r1_normalized: n1 / scale,
        r2_normalized: n2 / scale,
    }
}

pub fn boundary_residual(traj: &Trajectory, params: &CALParameters) -> BoundaryResidual {
    boundary_residual_at(traj.last(), params)
}

/// Composite Simpson weights for `intervals` equal panels of width `h`;
/// an odd count gets one trapezoid panel at the end.
pub fn simpson_weights(intervals: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; intervals + 1];
    let even = intervals - intervals % 2;
    for p in (0..even).step_by(2) {
        w[p] += h / 3.0;
        w[p + 1] += 4.0 * h / 3.0;
        w[p + 2] += h / 3.0;
    }
    if even < intervals {
        w[intervals - 1] += h / 2.0;
        w[intervals] += h / 2.0;
    }
    w
}

/// Lagrangian `μ/2|q̈|² + ν/2|q̇|² + γq̇·q̈ + k/2|q|² + U` at one sample.
pub(crate) fn lagrangian(
    p: &CALParameters,
    potential: &PotentialSpec,
    s: &State,
    u: &[f64],
) -> Result<f64> {
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    Ok(0.5 * p.mu * dot(&s.d2q, &s.d2q)
        + 0.5 * p.nu * dot(&s.dq, &s.dq)
        + p.gamma * dot(&s.dq, &s.d2q)
        + 0.5 * p.k * dot(&s.q, &s.q)
        + potential.eval(&s.q, u)?)
}

/// `e^{−θT}·Γ`: Simpson quadrature of the integrand with the bounded weight
/// `e^{θ(t−T)}`.
pub fn rescaled_action_value(
    traj: &Trajectory,
    params: &CALParameters,
    potential: &PotentialSpec,
    input: &InputSignal,
) -> Result<f64> {
    check_input(potential, input)?;
    let horizon = traj.horizon();
    let w = simpson_weights(traj.states.len() - 1, traj.step());
    let mut u = vec![0.0; input.dim()];
    let mut sum = 0.0;
    for (s, wi) in traj.states.iter().zip(w) {
        input.eval_into(s.t, &mut u);
        sum += wi * (params.theta * (s.t - horizon)).exp() * lagrangian(params, potential, s, &u)?;
    }
    Ok(sum)
}

/// The cognitive action `Γ = ∫₀ᵀ e^{θt} L dt` by composite Simpson.
/// `θ = 0` gives the unweighted integral.
pub fn action_value(
    traj: &Trajectory,
    params: &CALParameters,
    potential: &PotentialSpec,
    input: &InputSignal,
) -> Result<f64> {
    let scaled = rescaled_action_value(traj, params, potential, input)?;
    Ok((params.theta * traj.horizon()).exp() * scaled)
}
