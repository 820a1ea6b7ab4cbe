//! Causal integration of the fourth-order equations and of the
//! gradient-flow reduction, plus the closed-form free solution, endpoint
//! residuals, action quadrature and the discrete variational solver.

mod closed_form;
mod export;
mod functional;
mod oracle;

pub use closed_form::{closed_form_free, FreeSolution};
pub use export::{csv_header, write_csv};
pub use functional::{
    action_value, boundary_residual, boundary_residual_at, rescaled_action_value, simpson_weights,
    BoundaryResidual,
};
pub use oracle::{discrete_action, minimize_discrete_action, DiscreteSolution};

use serde::{Deserialize, Serialize};

use crate::error::{CalError, Result};
use crate::input::InputSignal;
use crate::params::{CALParameters, GradientFlowMode};
use crate::potential::PotentialSpec;

/// Weights and their first three time derivatives at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub t: f64,
    pub q: Vec<f64>,
    pub dq: Vec<f64>,
    pub d2q: Vec<f64>,
    pub d3q: Vec<f64>,
}

impl State {
    pub fn zeros(t: f64, n: usize) -> Self {
        Self {
            t,
            q: vec![0.0; n],
            dq: vec![0.0; n],
            d2q: vec![0.0; n],
            d3q: vec![0.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self
                .components()
                .iter()
                .all(|v| v.iter().all(|x| x.is_finite()))
    }

    pub fn components(&self) -> [&Vec<f64>; 4] {
        [&self.q, &self.dq, &self.d2q, &self.d3q]
    }

    /// Largest absolute entry over q and all three derivatives.
    pub fn max_abs(&self) -> f64 {
        self.components()
            .iter()
            .flat_map(|v| v.iter())
            .fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `max_k |q⁽ᵏ⁾|` over k ∈ {1, 2, 3} and all coordinates.
    pub fn derivative_max_abs(&self) -> f64 {
        self.components()[1..]
            .iter()
            .flat_map(|v| v.iter())
            .fold(0.0, |m, x| m.max(x.abs()))
    }

    pub(crate) fn pack(&self, y: &mut [f64]) {
        let n = self.dim();
        for (k, v) in self.components().iter().enumerate() {
            y[k * n..(k + 1) * n].copy_from_slice(v);
        }
    }

    pub(crate) fn unpack(t: f64, y: &[f64], n: usize) -> Self {
        Self {
            t,
            q: y[..n].to_vec(),
            dq: y[n..2 * n].to_vec(),
            d2q: y[2 * n..3 * n].to_vec(),
            d3q: y[3 * n..4 * n].to_vec(),
        }
    }
}

/// Initial data `(q⁰, q¹, q²₀, q³₀)`; the last two default to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyData {
    pub q0: Vec<f64>,
    pub q1: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q2: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q3: Option<Vec<f64>>,
}

impl CauchyData {
    pub fn new(q0: Vec<f64>, q1: Vec<f64>) -> Self {
        Self {
            q0,
            q1,
            q2: None,
            q3: None,
        }
    }

    pub fn full(q0: Vec<f64>, q1: Vec<f64>, q2: Vec<f64>, q3: Vec<f64>) -> Self {
        Self {
            q0,
            q1,
            q2: Some(q2),
            q3: Some(q3),
        }
    }

    pub fn from_state(s: &State) -> Self {
        Self::full(s.q.clone(), s.dq.clone(), s.d2q.clone(), s.d3q.clone())
    }

    pub fn dim(&self) -> usize {
        self.q0.len()
    }

    /// The state at `t = 0`, checking every block has length `n`.
    pub fn to_state(&self, n: usize) -> Result<State> {
        let n0 = self.q0.len();
        let zeros = vec![0.0; n0];
        let q2 = self.q2.as_ref().unwrap_or(&zeros);
        let q3 = self.q3.as_ref().unwrap_or(&zeros);
        for (what, v) in [
            ("cauchy q0", &self.q0),
            ("cauchy q1", &self.q1),
            ("cauchy q2", q2),
            ("cauchy q3", q3),
        ] {
            if v.len() != n {
                return Err(CalError::DimensionMismatch {
                    what,
                    expected: n,
                    found: v.len(),
                });
            }
        }
        Ok(State {
            t: 0.0,
            q: self.q0.clone(),
            dq: self.q1.clone(),
            d2q: q2.clone(),
            d3q: q3.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    /// How the samples were produced (`rk4`, `gradient_flow_rk4`, ...).
    pub method: String,
    pub step: f64,
    pub params: Option<CALParameters>,
    pub schedule_id: Option<String>,
    pub potential_id: String,
    pub input_id: String,
}

/// Samples on the uniform grid `tᵢ = i·h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub states: Vec<State>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, State::dim)
    }

    pub fn step(&self) -> f64 {
        self.meta.step
    }

    pub fn first(&self) -> &State {
        &self.states[0]
    }

    pub fn last(&self) -> &State {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn horizon(&self) -> f64 {
        self.last().t
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.states.iter().map(|s| s.t)
    }

    /// Sample whose time is closest to `t`.
    pub fn nearest(&self, t: f64) -> &State {
        let i = (t / self.meta.step).round().clamp(0.0, (self.states.len() - 1) as f64);
        &self.states[i as usize]
    }

    /// `sup_i |q_a(tᵢ) − q_b(tᵢ)|_∞` over the common prefix.
    pub fn sup_distance_q(&self, other: &Trajectory) -> f64 {
        self.states
            .iter()
            .zip(&other.states)
            .flat_map(|(a, b)| a.q.iter().zip(&b.q).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

/// Number of steps and the effective step so that `n·h = T` exactly.
pub fn grid(horizon: f64, h: f64) -> Result<(usize, f64)> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(CalError::InvalidArgument(format!(
            "horizon must be positive and finite, got {horizon}"
        )));
    }
    if !(h > 0.0 && h <= horizon) {
        return Err(CalError::InvalidArgument(format!(
            "step must satisfy 0 < h <= T, got h = {h}, T = {horizon}"
        )));
    }
    let n = ((horizon / h).round() as usize).max(1);
    Ok((n, horizon / n as f64))
}

/// `q⁽⁴⁾` from the equation of motion at one state.
pub fn rhs(
    params: &CALParameters,
    potential: &PotentialSpec,
    u_at_t: &[f64],
    state: &State,
) -> Result<Vec<f64>> {
    if params.mu == 0.0 {
        return Err(CalError::DegenerateMass);
    }
    let n = state.dim();
    let mut out = vec![0.0; n];
    let grad = potential.grad(&state.q, u_at_t)?;
    fourth_derivative(params, state, &grad, &mut out);
    Ok(out)
}

fn fourth_derivative(p: &CALParameters, s: &State, grad: &[f64], out: &mut [f64]) {
    let [mu, c3, c2, c1, k] = p.ode_coefficients();
    for i in 0..out.len() {
        out[i] = -(c3 * s.d3q[i] + c2 * s.d2q[i] + c1 * s.dq[i] + k * s.q[i] + grad[i]) / mu;
    }
}

/// Classic RK4 on `y' = f(t, y)` with reusable stage buffers.
pub(crate) struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub(crate) fn new(len: usize) -> Self {
        Self {
            k1: vec![0.0; len],
            k2: vec![0.0; len],
            k3: vec![0.0; len],
            k4: vec![0.0; len],
            tmp: vec![0.0; len],
        }
    }

    pub(crate) fn step<F>(&mut self, f: &mut F, t: f64, h: f64, y: &mut [f64]) -> Result<()>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    {
        let half = 0.5 * h;
        f(t, y, &mut self.k1)?;
        for i in 0..y.len() {
            self.tmp[i] = y[i] + half * self.k1[i];
        }
        f(t + half, &self.tmp, &mut self.k2)?;
        for i in 0..y.len() {
            self.tmp[i] = y[i] + half * self.k2[i];
        }
        f(t + half, &self.tmp, &mut self.k3)?;
        for i in 0..y.len() {
            self.tmp[i] = y[i] + h * self.k3[i];
        }
        f(t + h, &self.tmp, &mut self.k4)?;
        for i in 0..y.len() {
            y[i] += h / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
        Ok(())
    }
}

/// First-order form of the fourth-order equation; `y = (q, q̇, q̈, q⁽³⁾)`.
pub(crate) struct CalSystem<'a> {
    params: CALParameters,
    potential: &'a PotentialSpec,
    input: &'a InputSignal,
    n: usize,
    u: Vec<f64>,
    grad: Vec<f64>,
}

impl<'a> CalSystem<'a> {
    pub(crate) fn new(
        params: &CALParameters,
        potential: &'a PotentialSpec,
        input: &'a InputSignal,
    ) -> Result<Self> {
        if params.mu == 0.0 {
            return Err(CalError::DegenerateMass);
        }
        check_input(potential, input)?;
        let n = potential.weight_dim();
        Ok(Self {
            params: *params,
            potential,
            input,
            n,
            u: vec![0.0; input.dim()],
            grad: vec![0.0; n],
        })
    }

    pub(crate) fn eval(&mut self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let n = self.n;
        self.input.eval_into(t, &mut self.u);
        self.potential.grad_into(&y[..n], &self.u, &mut self.grad)?;
        let [mu, c3, c2, c1, k] = self.params.ode_coefficients();
        dy[..3 * n].copy_from_slice(&y[n..]);
        for i in 0..n {
            dy[3 * n + i] = -(c3 * y[3 * n + i]
                + c2 * y[2 * n + i]
                + c1 * y[n + i]
                + k * y[i]
                + self.grad[i])
                / mu;
        }
        Ok(())
    }
}

pub(crate) fn check_input(potential: &PotentialSpec, input: &InputSignal) -> Result<()> {
    input.validate()?;
    if let Some(m) = potential.input_dim() {
        if input.dim() != m {
            return Err(CalError::DimensionMismatch {
                what: "input signal",
                expected: m,
                found: input.dim(),
            });
        }
    }
    Ok(())
}

pub(crate) fn check_finite(y: &[f64], t: f64) -> Result<()> {
    if y.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(CalError::NonFinite { t })
    }
}

/// Integrates the fourth-order equation with fixed-step RK4 from the
/// Cauchy data. The step is adjusted to `T / round(T/h)`.
pub fn integrate(
    params: &CALParameters,
    potential: &PotentialSpec,
    input: &InputSignal,
    cauchy: &CauchyData,
    horizon: f64,
    h: f64,
) -> Result<Trajectory> {
    let mut sys = CalSystem::new(params, potential, input)?;
    let (steps, h) = grid(horizon, h)?;
    let n = potential.weight_dim();
    let start = cauchy.to_state(n)?;
    let mut y = vec![0.0; 4 * n];
    start.pack(&mut y);
    check_finite(&y, 0.0)?;

    let mut rk = Rk4::new(4 * n);
    let mut states = Vec::with_capacity(steps + 1);
    states.push(start);
    for i in 0..steps {
        let t = i as f64 * h;
        rk.step(&mut |t, y, dy| sys.eval(t, y, dy), t, h, &mut y)?;
        let t1 = (i + 1) as f64 * h;
        check_finite(&y, t1)?;
        states.push(State::unpack(t1, &y, n));
    }
    Ok(Trajectory {
        states,
        meta: TrajectoryMeta {
            method: "rk4".into(),
            step: h,
            params: Some(*params),
            schedule_id: None,
            potential_id: potential.name().into(),
            input_id: input.name().into(),
        },
    })
}

/// Integrates `θ⁻¹q̈ + q̇ = −kq − ∇U` (as `inertia·q̈ + damping·q̇`) with
/// RK4. `d2q` is filled from the equation; `d3q` is not tracked and left 0.
pub fn integrate_gradient_flow(
    mode: &GradientFlowMode,
    potential: &PotentialSpec,
    input: &InputSignal,
    cauchy: &CauchyData,
    horizon: f64,
    h: f64,
) -> Result<Trajectory> {
    if !(mode.theta > 0.0) {
        return Err(CalError::InvalidTheta(mode.theta));
    }
    check_input(potential, input)?;
    let (steps, h) = grid(horizon, h)?;
    let n = potential.weight_dim();
    let start = cauchy.to_state(n)?;
    let (inertia, damping, k) = mode.coefficients();

    let mut u = vec![0.0; input.dim()];
    let mut grad = vec![0.0; n];
    let mut accel = |t: f64, q: &[f64], dq: &[f64], out: &mut [f64]| -> Result<()> {
        input.eval_into(t, &mut u);
        potential.grad_into(q, &u, &mut grad)?;
        for i in 0..n {
            out[i] = -(k * q[i] + grad[i] + damping * dq[i]) / inertia;
        }
        Ok(())
    };

    let snapshot = |t: f64, y: &[f64], d2q: Vec<f64>| State {
        t,
        q: y[..n].to_vec(),
        dq: y[n..].to_vec(),
        d2q,
        d3q: vec![0.0; n],
    };

    let mut y = [start.q.clone(), start.dq.clone()].concat();
    check_finite(&y, 0.0)?;
    let mut a = vec![0.0; n];
    accel(0.0, &y[..n], &y[n..], &mut a)?;
    let mut states = Vec::with_capacity(steps + 1);
    states.push(snapshot(0.0, &y, a.clone()));

    let mut rk = Rk4::new(2 * n);
    for i in 0..steps {
        let t = i as f64 * h;
        rk.step(
            &mut |t, y: &[f64], dy: &mut [f64]| {
                dy[..n].copy_from_slice(&y[n..]);
                accel(t, &y[..n], &y[n..], &mut dy[n..])
            },
            t,
            h,
            &mut y,
        )?;
        let t1 = (i + 1) as f64 * h;
        check_finite(&y, t1)?;
        accel(t1, &y[..n], &y[n..], &mut a)?;
        states.push(snapshot(t1, &y, a.clone()));
    }
    Ok(Trajectory {
        states,
        meta: TrajectoryMeta {
            method: "gradient_flow_rk4".into(),
            step: h,
            params: None,
            schedule_id: None,
            potential_id: potential.name().into(),
            input_id: input.name().into(),
        },
    })
}

/// Classic gradient flow `q̇ = −kq − ∇U(q, u(t))` from `q0` by RK4. `dq`
/// holds the velocity; higher derivatives are left at zero.
pub fn integrate_pure_gradient_flow(
    k: f64,
    potential: &PotentialSpec,
    input: &InputSignal,
    q0: &[f64],
    horizon: f64,
    h: f64,
) -> Result<Trajectory> {
    check_input(potential, input)?;
    let (steps, h) = grid(horizon, h)?;
    let n = potential.weight_dim();
    if q0.len() != n {
        return Err(CalError::DimensionMismatch {
            what: "q0",
            expected: n,
            found: q0.len(),
        });
    }
    let mut u = vec![0.0; input.dim()];
    let mut velocity = |t: f64, q: &[f64], out: &mut [f64]| -> Result<()> {
        input.eval_into(t, &mut u);
        potential.grad_into(q, &u, out)?;
        for i in 0..n {
            out[i] = -(k * q[i] + out[i]);
        }
        Ok(())
    };
    let mut y = q0.to_vec();
    check_finite(&y, 0.0)?;
    let mut v = vec![0.0; n];
    let mut snapshot = |t: f64, y: &[f64], v: &mut Vec<f64>| -> Result<State> {
        velocity(t, y, v)?;
        let mut s = State::zeros(t, n);
        s.q.copy_from_slice(y);
        s.dq.clone_from(v);
        Ok(s)
    };
    let mut states = Vec::with_capacity(steps + 1);
    states.push(snapshot(0.0, &y, &mut v)?);

    let mut u2 = vec![0.0; input.dim()];
    let mut rk = Rk4::new(n);
    for i in 0..steps {
        let t = i as f64 * h;
        rk.step(
            &mut |t, y: &[f64], dy: &mut [f64]| {
                input.eval_into(t, &mut u2);
                potential.grad_into(y, &u2, dy)?;
                for j in 0..n {
                    dy[j] = -(k * y[j] + dy[j]);
                }
                Ok(())
            },
            t,
            h,
            &mut y,
        )?;
        let t1 = (i + 1) as f64 * h;
        check_finite(&y, t1)?;
        states.push(snapshot(t1, &y, &mut v)?);
    }
    Ok(Trajectory {
        states,
        meta: TrajectoryMeta {
            method: "pure_gradient_flow_rk4".into(),
            step: h,
            params: None,
            schedule_id: None,
            potential_id: potential.name().into(),
            input_id: input.name().into(),
        },
    })
}

/// One explicit Euler step `q ← q − η(kq + ∇U(q, u))`.
pub fn euler_step(
    k: f64,
    potential: &PotentialSpec,
    u: &[f64],
    q: &[f64],
    eta: f64,
) -> Result<Vec<f64>> {
    let grad = potential.grad(q, u)?;
    Ok(q.iter()
        .zip(&grad)
        .map(|(qi, gi)| qi - eta * (k * qi + gi))
        .collect())
}

/// `steps` Euler updates from `q0`; update `j` sees `u(j·dt)`. Returns all
/// iterates including `q0`.
pub fn euler_iterates(
    k: f64,
    potential: &PotentialSpec,
    input: &InputSignal,
    q0: &[f64],
    eta: f64,
    steps: usize,
    dt: f64,
) -> Result<Vec<Vec<f64>>> {
    check_input(potential, input)?;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(q0.to_vec());
    for j in 0..steps {
        let u = input.eval(j as f64 * dt);
        let next = euler_step(k, potential, &u, &out[j], eta)?;
        check_finite(&next, (j + 1) as f64 * dt)?;
        out.push(next);
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
