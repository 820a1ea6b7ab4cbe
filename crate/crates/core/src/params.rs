//! Coefficient data model and admissibility predicates.
//!
//! The kinetic term is parameterized by `(α, β, γ₁, γ₂)`; the equations of
//! motion only see the aggregated coefficients `μ = α + γ₂²`,
//! `ν = β + γ₁²` and `γ = γ₁γ₂`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::charpoly::{cal_to_charpoly, roots, routh_hurwitz_stable, TAU_EQ};
use crate::error::{CalError, Result};

/// Sign of the regularization term: `+1` for the minimization setting,
/// `-1` for the classic mechanical action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Xi {
    #[default]
    Plus,
    Minus,
}

impl TryFrom<i8> for Xi {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Self, Self::Error> {
        match v {
            1 => Ok(Xi::Plus),
            -1 => Ok(Xi::Minus),
            other => Err(format!("xi must be +1 or -1, got {other}")),
        }
    }
}

impl From<Xi> for i8 {
    fn from(x: Xi) -> i8 {
        match x {
            Xi::Plus => 1,
            Xi::Minus => -1,
        }
    }
}

impl Xi {
    pub fn sign(self) -> f64 {
        match self {
            Xi::Plus => 1.0,
            Xi::Minus => -1.0,
        }
    }
}

/// Kinetic-term coefficients as they appear in the Lagrangian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawParameters {
    pub alpha: f64,
    pub beta: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub k: f64,
    pub theta: f64,
    #[serde(default)]
    pub xi: Xi,
}

/// Aggregated coefficients of the fourth-order equation
/// `μq⁽⁴⁾ + 2θμq⁽³⁾ + (θ²μ+θγ−ν)q̈ + (θ²γ−θν)q̇ + kq + ∇U = 0`.
///
/// Fields are public so that limiting cases (e.g. `θ = 0` in quadrature
/// checks) can be built directly; [`CALParameters::new`] enforces `θ > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CALParameters {
    pub theta: f64,
    pub mu: f64,
    pub nu: f64,
    pub gamma: f64,
    pub k: f64,
}

impl CALParameters {
    pub fn new(theta: f64, mu: f64, nu: f64, gamma: f64, k: f64) -> Result<Self> {
        check_theta(theta)?;
        Ok(Self {
            theta,
            mu,
            nu,
            gamma,
            k,
        })
    }

    /// Coefficients of `(q⁽⁴⁾, q⁽³⁾, q̈, q̇, q)` in the equation of motion.
    pub fn ode_coefficients(&self) -> [f64; 5] {
        let th = self.theta;
        [
            self.mu,
            2.0 * th * self.mu,
            th * th * self.mu + th * self.gamma - self.nu,
            th * th * self.gamma - th * self.nu,
            self.k,
        ]
    }

    pub fn is_finite(&self) -> bool {
        [self.theta, self.mu, self.nu, self.gamma, self.k]
            .iter()
            .all(|v| v.is_finite())
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(CalError::InvalidTheta(theta))
    }
}

pub fn derive(raw: &RawParameters) -> Result<CALParameters> {
    check_theta(raw.theta)?;
    Ok(CALParameters {
        theta: raw.theta,
        mu: raw.alpha + raw.gamma2 * raw.gamma2,
        nu: raw.beta + raw.gamma1 * raw.gamma1,
        gamma: raw.gamma1 * raw.gamma2,
        k: raw.k,
    })
}

/// Coercivity: `μ > γ₂²`, `ν > γ₁²`, `k > 0`. Under these the action is
/// bounded below and attains its minimum.
pub fn coercivity_ok(p: &CALParameters, raw: &RawParameters) -> bool {
    p.mu > raw.gamma2 * raw.gamma2 && p.nu > raw.gamma1 * raw.gamma1 && p.k > 0.0
}

/// The stability/aperiodicity sufficient condition, with every inequality
/// direction taken literally:
///
/// `μ<γ₂², ν<γ₁², ν<θγ₁γ₂, 0<k<(ν−θγ₁γ₂)²/(4μ)` and
/// `(γ₁<0 ∧ γ₂<γ₁/θ) ∨ (γ₁>0 ∧ γ₂>γ₁/θ)`.
///
/// Note the first two inequalities are the reverse of [`coercivity_ok`].
pub fn proposition_ok(theta: f64, mu: f64, nu: f64, gamma1: f64, gamma2: f64, k: f64) -> Result<bool> {
    check_theta(theta)?;
    if mu == 0.0 {
        return Err(CalError::DivisionByZero("proposition_ok: k bound (mu = 0)"));
    }
    let coupling = theta * gamma1 * gamma2;
    let k_max = (nu - coupling).powi(2) / (4.0 * mu);
    let sign_branch =
        (gamma1 < 0.0 && gamma2 < gamma1 / theta) || (gamma1 > 0.0 && gamma2 > gamma1 / theta);
    Ok(mu < gamma2 * gamma2
        && nu < gamma1 * gamma1
        && nu < coupling
        && k > 0.0
        && k < k_max
        && sign_branch)
}

/// Second-order reduction `θ⁻¹q̈ + q̇ = −kq − ∇U` reached with `μ = ν = 0`,
/// `γ = 1/θ²` (or, in mechanics mode, `ξ = −1`, `μ = γ = 0`, `ν = 1/θ`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientFlowMode {
    pub theta: f64,
    /// Coefficient of q̈, i.e. `1/θ`.
    pub inertia: f64,
    /// Coefficient of q̇; always 1 for this reduction.
    pub damping: f64,
    pub k: f64,
    pub xi: Xi,
}

impl GradientFlowMode {
    pub fn coefficients(&self) -> (f64, f64, f64) {
        (self.inertia, self.damping, self.k)
    }
}

pub fn gradient_flow_params(theta: f64, k: f64) -> Result<GradientFlowMode> {
    check_theta(theta)?;
    Ok(GradientFlowMode {
        theta,
        inertia: 1.0 / theta,
        damping: 1.0,
        k,
        xi: Xi::Plus,
    })
}

/// Mechanics-mode reduction. The Euler–Lagrange equation
/// `−θ⁻¹q̈ − q̇ − kq − ∇U = 0` is the same ODE with opposite overall sign.
pub fn mechanics_gradient_flow_params(theta: f64, k: f64) -> Result<GradientFlowMode> {
    let mut mode = gradient_flow_params(theta, k)?;
    mode.xi = Xi::Minus;
    Ok(mode)
}

/// Whether `p` matches the gradient-flow reduction for the given `ξ`
/// (coefficients compared with absolute tolerance `tol`).
pub fn is_gradient_flow_regime(p: &CALParameters, xi: Xi, tol: f64) -> bool {
    match xi {
        Xi::Plus => {
            p.mu.abs() <= tol
                && p.nu.abs() <= tol
                && (p.gamma - 1.0 / (p.theta * p.theta)).abs() <= tol
        }
        Xi::Minus => {
            p.mu.abs() <= tol && p.gamma.abs() <= tol && (p.nu - 1.0 / p.theta).abs() <= tol
        }
    }
}

/// A tuple `(θ, μ, ν, γ₁, γ₂, k)` as used by [`proposition_ok`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropositionTuple {
    pub theta: f64,
    pub mu: f64,
    pub nu: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub k: f64,
}

impl PropositionTuple {
    pub fn satisfies(&self) -> Result<bool> {
        proposition_ok(self.theta, self.mu, self.nu, self.gamma1, self.gamma2, self.k)
    }

    /// CAL coefficients with `γ = γ₁γ₂`.
    pub fn cal(&self) -> Result<CALParameters> {
        CALParameters::new(self.theta, self.mu, self.nu, self.gamma1 * self.gamma2, self.k)
    }
}

/// Draws a tuple satisfying [`proposition_ok`] by sampling each inequality's
/// admissible interval in turn (θ up to 5, |γ₁| up to 3). For tests and
/// reports only; not a description of the whole region.
pub fn sample_proposition_tuple<R: Rng>(rng: &mut R) -> PropositionTuple {
    loop {
        let theta = rng.random_range(0.1..5.0);
        let gamma1: f64 = rng.random_range(-3.0..3.0);
        if gamma1.abs() < 1e-3 {
            continue;
        }
        let pivot = gamma1 / theta;
        let gamma2 = if gamma1 > 0.0 {
            pivot + rng.random_range(0.0..3.0)
        } else {
            pivot - rng.random_range(0.0..3.0)
        };
        let mu = rng.random_range(0.0..1.0) * gamma2 * gamma2;
        let nu_max = (gamma1 * gamma1).min(theta * gamma1 * gamma2);
        let nu = nu_max - rng.random_range(0.0..5.0);
        if mu <= 0.0 {
            continue;
        }
        let k_max = (nu - theta * gamma1 * gamma2).powi(2) / (4.0 * mu);
        let k = rng.random_range(0.0..1.0) * k_max;
        let t = PropositionTuple {
            theta,
            mu,
            nu,
            gamma1,
            gamma2,
            k,
        };
        if t.satisfies() == Ok(true) {
            return t;
        }
    }
}

/// Observed stability (Routh–Hurwitz) and aperiodicity (all characteristic
/// roots real within `τ_eq` relative to the root scale) of a tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropositionVerdict {
    pub stable: bool,
    pub aperiodic: bool,
}

pub fn proposition_verdict(t: &PropositionTuple) -> Result<PropositionVerdict> {
    let cp = cal_to_charpoly(&t.cal()?)?;
    let rs = roots(&cp);
    Ok(PropositionVerdict {
        stable: routh_hurwitz_stable(&cp),
        aperiodic: rs.max_abs_imag() <= TAU_EQ * (1.0 + rs.max_modulus()),
    })
}
