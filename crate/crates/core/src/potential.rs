//! Potentials `U(q, u) ≥ 0` with analytic gradients.
//!
//! Every built-in is multiplied by an input-activity gate that is zero only
//! at the exact zero input, so `U(q, 0) = 0` holds for all of them and the
//! free dynamics on gated intervals is linear.

use serde::{Deserialize, Serialize};

use crate::error::{CalError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Nonlinearity {
    Tanh,
    Logistic,
}

impl Nonlinearity {
    fn apply(self, a: f64) -> (f64, f64) {
        match self {
            Nonlinearity::Tanh => {
                let z = a.tanh();
                (z, 1.0 - z * z)
            }
            Nonlinearity::Logistic => {
                let z = 1.0 / (1.0 + (-a).exp());
                (z, z * (1.0 - z))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    /// `U ≡ 0` on `n` weights; any input dimension is accepted.
    Zero { dim: usize },
    /// `U = (w/2)|q − u|²` with `m = n`.
    QuadraticTracking { dim: usize, weight: f64 },
    /// Squared residual of a linear model: `u = (x₁..xₙ, y)`,
    /// `U = ½(q·x − y)²`.
    LinearRegression { features: usize },
    /// One-hidden-layer autoencoder `û = W₂σ(W₁u + b₁) + b₂`,
    /// `U = ½|u − û|²`, with `q = (W₁, b₁, W₂, b₂)` flattened row-major.
    FeatureDemo {
        input_dim: usize,
        hidden: usize,
        nonlinearity: Nonlinearity,
    },
}

/// `U(q) = ½qᵀHq − bᵀq + c` for a fixed input; used by the discrete
/// variational solver.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    /// Row-major `n × n`.
    pub hessian: Vec<f64>,
    pub linear: Vec<f64>,
    pub constant: f64,
}

fn gate(u: &[f64]) -> f64 {
    if u.iter().all(|&x| x == 0.0) {
        0.0
    } else {
        1.0
    }
}

fn check_dim(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(CalError::DimensionMismatch {
            what,
            expected,
            found,
        })
    }
}

impl PotentialSpec {
    /// Number of weights `n`.
    pub fn weight_dim(&self) -> usize {
        match *self {
            PotentialSpec::Zero { dim } => dim,
            PotentialSpec::QuadraticTracking { dim, .. } => dim,
            PotentialSpec::LinearRegression { features } => features,
            PotentialSpec::FeatureDemo {
                input_dim, hidden, ..
            } => 2 * hidden * input_dim + hidden + input_dim,
        }
    }

    /// Required input dimension `m`; `None` when any dimension is accepted.
    pub fn input_dim(&self) -> Option<usize> {
        match *self {
            PotentialSpec::Zero { .. } => None,
            PotentialSpec::QuadraticTracking { dim, .. } => Some(dim),
            PotentialSpec::LinearRegression { features } => Some(features + 1),
            PotentialSpec::FeatureDemo { input_dim, .. } => Some(input_dim),
        }
    }

    pub fn is_quadratic(&self) -> bool {
        !matches!(self, PotentialSpec::FeatureDemo { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            PotentialSpec::Zero { .. } => "zero",
            PotentialSpec::QuadraticTracking { .. } => "quadratic_tracking",
            PotentialSpec::LinearRegression { .. } => "linear_regression",
            PotentialSpec::FeatureDemo { .. } => "feature_demo",
        }
    }

    fn check(&self, q: &[f64], u: &[f64]) -> Result<()> {
        check_dim("potential weights", self.weight_dim(), q.len())?;
        if let Some(m) = self.input_dim() {
            check_dim("potential input", m, u.len())?;
        }
        Ok(())
    }

    pub fn eval(&self, q: &[f64], u: &[f64]) -> Result<f64> {
        self.check(q, u)?;
        let g = gate(u);
        if g == 0.0 {
            return Ok(0.0);
        }
        let value = match *self {
            PotentialSpec::Zero { .. } => 0.0,
            PotentialSpec::QuadraticTracking { weight, .. } => {
                0.5 * weight * q.iter().zip(u).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
            }
            PotentialSpec::LinearRegression { features } => {
                let r = dot(q, &u[..features]) - u[features];
                0.5 * r * r
            }
            PotentialSpec::FeatureDemo {
                input_dim,
                hidden,
                nonlinearity,
            } => {
                let net = Autoencoder::new(q, input_dim, hidden);
                let (_, _, residual) = net.forward(u, nonlinearity);
                0.5 * residual.iter().map(|r| r * r).sum::<f64>()
            }
        };
        Ok(g * value)
    }

    pub fn grad(&self, q: &[f64], u: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; q.len()];
        self.grad_into(q, u, &mut out)?;
        Ok(out)
    }

    /// Writes `∇_qU(q, u)` into `out` (overwriting it).
    pub fn grad_into(&self, q: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        self.check(q, u)?;
        check_dim("gradient buffer", q.len(), out.len())?;
        out.iter_mut().for_each(|x| *x = 0.0);
        if gate(u) == 0.0 {
            return Ok(());
        }
        match *self {
            PotentialSpec::Zero { .. } => {}
            PotentialSpec::QuadraticTracking { weight, .. } => {
                for ((o, a), b) in out.iter_mut().zip(q).zip(u) {
                    *o = weight * (a - b);
                }
            }
            PotentialSpec::LinearRegression { features } => {
                let x = &u[..features];
                let r = dot(q, x) - u[features];
                for (o, xi) in out.iter_mut().zip(x) {
                    *o = r * xi;
                }
            }
            PotentialSpec::FeatureDemo {
                input_dim,
                hidden,
                nonlinearity,
            } => {
                let net = Autoencoder::new(q, input_dim, hidden);
                net.backward(u, nonlinearity, out);
            }
        }
        Ok(())
    }

    /// Exact quadratic representation for a fixed input, or `None` for
    /// non-quadratic potentials.
    pub fn quadratic_form(&self, u: &[f64]) -> Result<Option<QuadraticForm>> {
        let n = self.weight_dim();
        if let Some(m) = self.input_dim() {
            check_dim("potential input", m, u.len())?;
        }
        let g = gate(u);
        let mut hessian = vec![0.0; n * n];
        let mut linear = vec![0.0; n];
        let mut constant = 0.0;
        match *self {
            PotentialSpec::Zero { .. } => {}
            PotentialSpec::QuadraticTracking { weight, .. } => {
                for i in 0..n {
                    hessian[i * n + i] = g * weight;
                    linear[i] = g * weight * u[i];
                }
                constant = 0.5 * g * weight * dot(u, u);
            }
            PotentialSpec::LinearRegression { features } => {
                let x = &u[..features];
                let y = u[features];
                for i in 0..n {
                    for j in 0..n {
                        hessian[i * n + j] = g * x[i] * x[j];
                    }
                    linear[i] = g * y * x[i];
                }
                constant = 0.5 * g * y * y;
            }
            PotentialSpec::FeatureDemo { .. } => return Ok(None),
        }
        Ok(Some(QuadraticForm {
            hessian,
            linear,
            constant,
        }))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Autoencoder<'a> {
    m: usize,
    h: usize,
    w1: &'a [f64],
    b1: &'a [f64],
    w2: &'a [f64],
    b2: &'a [f64],
}

impl<'a> Autoencoder<'a> {
    fn new(q: &'a [f64], m: usize, h: usize) -> Self {
        let (w1, rest) = q.split_at(h * m);
        let (b1, rest) = rest.split_at(h);
        let (w2, b2) = rest.split_at(m * h);
        Self {
            m,
            h,
            w1,
            b1,
            w2,
            b2,
        }
    }

    /// Returns (hidden activations, activation slopes, residual û − u).
    fn forward(&self, u: &[f64], act: Nonlinearity) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let mut z = vec![0.0; self.h];
        let mut slope = vec![0.0; self.h];
        for j in 0..self.h {
            let a = self.b1[j] + dot(&self.w1[j * self.m..(j + 1) * self.m], u);
            (z[j], slope[j]) = act.apply(a);
        }
        let residual = (0..self.m)
            .map(|i| self.b2[i] + dot(&self.w2[i * self.h..(i + 1) * self.h], &z) - u[i])
            .collect();
        (z, slope, residual)
    }

    fn backward(&self, u: &[f64], act: Nonlinearity, out: &mut [f64]) {
        let (m, h) = (self.m, self.h);
        let (z, slope, residual) = self.forward(u, act);
        let (gw1, rest) = out.split_at_mut(h * m);
        let (gb1, rest) = rest.split_at_mut(h);
        let (gw2, gb2) = rest.split_at_mut(m * h);
        for i in 0..m {
            gb2[i] = residual[i];
            for j in 0..h {
                gw2[i * h + j] = residual[i] * z[j];
            }
        }
        for j in 0..h {
            let back: f64 = (0..m).map(|i| self.w2[i * h + j] * residual[i]).sum();
            let da = back * slope[j];
            gb1[j] = da;
            for (g, x) in gw1[j * m..(j + 1) * m].iter_mut().zip(u) {
                *g = da * x;
            }
        }
    }
}

/// Max over coordinates of `|analytic − central difference| / (1 + |analytic|)`
/// with per-coordinate step `step·(1 + |qᵢ|)`.
pub fn fd_check(p: &PotentialSpec, q: &[f64], u: &[f64], step: f64) -> Result<f64> {
    if !(step > 0.0) {
        return Err(CalError::InvalidArgument(format!("finite-difference step must be > 0, got {step}")));
    }
    let analytic = p.grad(q, u)?;
    let mut probe = q.to_vec();
    let mut worst: f64 = 0.0;
    for i in 0..q.len() {
        let hi = step * (1.0 + q[i].abs());
        probe[i] = q[i] + hi;
        let up = p.eval(&probe, u)?;
        probe[i] = q[i] - hi;
        let down = p.eval(&probe, u)?;
        probe[i] = q[i];
        let numeric = (up - down) / (2.0 * hi);
        worst = worst.max((analytic[i] - numeric).abs() / (1.0 + analytic[i].abs()));
    }
    Ok(worst)
}
