use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{PhaseKind, Schedule};
use crate::dynamics::State;
use crate::error::{CalError, Result};
use crate::input::InputSignal;
use crate::params::CALParameters;

/// Margin making the ρ bound strict.
pub const RHO_MARGIN: f64 = 1e-6;

/// Normalized nonzero reset roots; the design uses `ρ·(−1, −2, −3)`.
pub const NORMALIZED_ROOTS: [f64; 3] = [-1.0, -2.0, -3.0];

/// Coefficients in force on A-phases and on B-phases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseCoefficients {
    pub a_phase: CALParameters,
    pub b_phase: CALParameters,
}

impl PhaseCoefficients {
    pub fn new(a_phase: CALParameters, b_phase: CALParameters) -> Result<Self> {
        let c = Self { a_phase, b_phase };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        for p in [&self.a_phase, &self.b_phase] {
            if !(p.theta > 0.0) {
                return Err(CalError::InvalidTheta(p.theta));
            }
            if p.mu == 0.0 {
                return Err(CalError::DegenerateMass);
            }
        }
        Ok(())
    }

    pub fn for_phase(&self, kind: PhaseKind) -> &CALParameters {
        match kind {
            PhaseKind::A => &self.a_phase,
            PhaseKind::B => &self.b_phase,
        }
    }
}

/// B-phase coefficients placing the characteristic roots at
/// `{0, −ρ, −2ρ, −3ρ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResetDesign {
    pub rho: f64,
    pub roots: [f64; 4],
    pub coefficients: CALParameters,
    /// `C = max |Λₖⱼ|`.
    pub vandermonde_bound: f64,
    /// `Λ = V⁻¹` with `Vₖⱼ = λⱼᵏ`, `k = 1..3`, over the normalized roots.
    pub lambda_inv: [[f64; 3]; 3],
}

impl ResetDesign {
    pub fn complex_roots(&self) -> [Complex64; 4] {
        self.roots.map(|r| Complex64::new(r, 0.0))
    }
}

/// `V(λ)ₖⱼ = λⱼᵏ` for `k = 1..3`.
pub fn reset_vandermonde(lambdas: [f64; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|k, j| lambdas[j].powi(k as i32 + 1))
}

/// `(Λ, C)` for the given normalized roots.
pub fn vandermonde_inverse(lambdas: [f64; 3]) -> Result<([[f64; 3]; 3], f64)> {
    let inv = reset_vandermonde(lambdas)
        .try_inverse()
        .ok_or_else(|| CalError::InvalidArgument("reset roots must be distinct and nonzero".into()))?;
    let mut out = [[0.0; 3]; 3];
    let mut c: f64 = 0.0;
    for (k, row) in out.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = inv[(k, j)];
            c = c.max(x.abs());
        }
    }
    Ok((out, c))
}

/// `θ̄ = 3ρ`, `μ̄ = 1`, `k̄ = 0`, `ν̄ = 3ργ̄ − 2ρ²`. The structural
/// constraint `d = θ̄(c − θ̄²)` holds for this root family at every ρ.
pub fn design_reset_coefficients(rho: f64, gamma_bar: f64) -> Result<ResetDesign> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(CalError::InvalidRho(rho));
    }
    let coefficients = CALParameters::new(3.0 * rho, 1.0, 3.0 * rho * gamma_bar - 2.0 * rho * rho, gamma_bar, 0.0)?;
    let (lambda_inv, vandermonde_bound) = vandermonde_inverse(NORMALIZED_ROOTS)?;
    Ok(ResetDesign {
        rho,
        roots: [0.0, -rho, -2.0 * rho, -3.0 * rho],
        coefficients,
        vandermonde_bound,
        lambda_inv,
    })
}

/// Smallest admissible scale: `max(1 + δ, √(9CM/ε)·(1 + δ))` with
/// `M = max_k |q⁽ᵏ⁾(tᵢ)|`, k = 1..3.
pub fn rho_for_epsilon(epsilon: f64, state_at_ti: &State, c: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(CalError::InvalidEpsilon(epsilon));
    }
    let m = state_at_ti.derivative_max_abs();
    let bound = (9.0 * c * m / epsilon).sqrt() * (1.0 + RHO_MARGIN);
    Ok(bound.max(1.0 + RHO_MARGIN))
}

/// Keeps `q`, zeroes every derivative.
pub fn hard_reset(state: &State) -> State {
    let n = state.dim();
    State {
        t: state.t,
        q: state.q.clone(),
        dq: vec![0.0; n],
        d2q: vec![0.0; n],
        d3q: vec![0.0; n],
    }
}

/// `input` on A-phases, the exact zero vector elsewhere.
pub fn gate_input(input: InputSignal, schedule: Schedule) -> InputSignal {
    InputSignal::Gated {
        inner: Box::new(input),
        schedule,
    }
}
