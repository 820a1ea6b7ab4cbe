//! Isolated B-phase experiments for the derivative-vanishing and
//! weight-latching properties of the reset design.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{design_reset_coefficients, rho_for_epsilon, ResetDesign};
use crate::dynamics::{CauchyData, FreeSolution, State};
use crate::error::Result;

/// State after a B-phase of length `length` under `design`, from `entry`.
pub fn b_phase_exit(design: &ResetDesign, entry: &State, length: f64) -> Result<State> {
    let sol = FreeSolution::with_roots(design.complex_roots(), &CauchyData::from_state(entry), entry.t)?;
    Ok(sol.eval(entry.t + length))
}

/// Random entry state: `q` uniform in `[−1, 1]`, every derivative entry
/// uniform in `[−max_derivative, max_derivative]`.
pub fn random_entry_state<R: Rng>(rng: &mut R, n: usize, max_derivative: f64) -> State {
    let mut draw = |s: f64| -> Vec<f64> { (0..n).map(|_| s * rng.random_range(-1.0..=1.0)).collect() };
    State {
        t: 0.0,
        q: draw(1.0),
        dq: draw(max_derivative),
        d2q: draw(max_derivative),
        d3q: draw(max_derivative),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayPoint {
    pub rho: f64,
    /// `max_k |q⁽ᵏ⁾|` at B exit, k = 1..3.
    pub exit_derivative_norm: f64,
}

/// End-of-B derivative norms for each ρ (with `γ̄ = ρ`).
pub fn derivative_decay(entry: &State, rhos: &[f64], length: f64) -> Result<Vec<DecayPoint>> {
    rhos.iter()
        .map(|&rho| {
            let design = design_reset_coefficients(rho, rho)?;
            let exit = b_phase_exit(&design, entry, length)?;
            Ok(DecayPoint {
                rho,
                exit_derivative_norm: exit.derivative_max_abs(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatchOutcome {
    pub rho: f64,
    pub epsilon: f64,
    /// `max_k |q⁽ᵏ⁾(tᵢ)|`
    pub entry_derivative_norm: f64,
    /// `max_i |qᵢ(t_{i+1}) − qᵢ(tᵢ)|`
    pub drift: f64,
    pub exit_derivative_norm: f64,
}

impl LatchOutcome {
    pub fn within_bound(&self) -> bool {
        self.drift < self.epsilon
    }
}

/// One B-phase with `ρ = rho_for_epsilon(ε, entry, C)` and `γ̄ = ρ`.
pub fn weight_latch(entry: &State, epsilon: f64, c: f64, length: f64) -> Result<LatchOutcome> {
    let rho = rho_for_epsilon(epsilon, entry, c)?;
    let design = design_reset_coefficients(rho, rho)?;
    let exit = b_phase_exit(&design, entry, length)?;
    let drift = entry
        .q
        .iter()
        .zip(&exit.q)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(LatchOutcome {
        rho,
        epsilon,
        entry_derivative_norm: entry.derivative_max_abs(),
        drift,
        exit_derivative_norm: exit.derivative_max_abs(),
    })
}

/// Exact drift of the designed B-phase in the limit `|B|ρ → ∞`, per
/// coordinate: `(q⁽³⁾ + 6ρq̈ + 11ρ²q̇)/(6ρ³)`.
pub fn asymptotic_drift(entry: &State, rho: f64) -> Vec<f64> {
    (0..entry.dim())
        .map(|i| {
            (entry.d3q[i] + 6.0 * rho * entry.d2q[i] + 11.0 * rho * rho * entry.dq[i])
                / (6.0 * rho.powi(3))
        })
        .collect()
}
