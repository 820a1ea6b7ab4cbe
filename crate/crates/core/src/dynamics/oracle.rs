//! Direct minimization of a finite-difference discretization of the action
//! for potentials quadratic in `q`.
//!
//! The grid is `tᵢ = i·h`, `i = −1..=N+1`, with one ghost node past each
//! end. The discrete functional is
//!
//! `J_h(q) = Σᵢ₌₀ᴺ wᵢ e^{θ(tᵢ−T)} [μ/2|D₂qᵢ|² + ν/2|D₁qᵢ|² + γD₁qᵢ·D₂qᵢ + k/2|qᵢ|² + U(qᵢ, u(tᵢ))]`
//!
//! with trapezoid weights `wᵢ` and the central three-point stencils `D₁`,
//! `D₂`. The left data enter as `q₀ = q⁰` and `(q₁ − q₋₁)/(2h) = q¹`; both
//! are eliminated, so the unknowns are `q₁..q_{N+1}` and the right end is
//! free. The stationarity system is symmetric positive definite and banded.
//! Derivative samples of the result use only the real nodes `0..=N`.

use super::{check_input, State, Trajectory, TrajectoryMeta};
use crate::banded::BandedSpd;
use crate::error::{CalError, Result};
use crate::fd::node_stencil;
use crate::input::InputSignal;
use crate::params::CALParameters;
use crate::potential::PotentialSpec;

/// Grid minimizer plus its finite-difference reconstruction.
#[derive(Debug, Clone)]
pub struct DiscreteSolution {
    /// `extended[i + 1]` is `q(tᵢ)` for `i = −1..=N+1`, ghosts included.
    pub extended: Vec<Vec<f64>>,
    pub trajectory: Trajectory,
    /// `J_h` at the minimizer, unscaled (multiplied back by `e^{θT}`).
    pub action: f64,
}

impl DiscreteSolution {
    /// Values at the real nodes `0..=N`.
    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.extended[1..self.extended.len() - 1]
    }
}

/// Affine dependence of one grid unknown on the reduced vector `z`.
struct Affine {
    z: Option<(usize, f64)>,
    c: f64,
}

struct Reduction<'a> {
    n: usize,
    h: f64,
    q0: &'a [f64],
    q1: &'a [f64],
}

impl Reduction<'_> {
    /// `slot` is the extended index `i + 1`.
    fn map(&self, slot: usize, coord: usize) -> Affine {
        match slot {
            0 => Affine {
                z: Some((coord, 1.0)),
                c: -2.0 * self.h * self.q1[coord],
            },
            1 => Affine {
                z: None,
                c: self.q0[coord],
            },
            _ => Affine {
                z: Some(((slot - 2) * self.n + coord, 1.0)),
                c: 0.0,
            },
        }
    }

    fn expand(&self, z: &[f64], slots: usize) -> Vec<Vec<f64>> {
        (0..slots)
            .map(|i| {
                (0..self.n)
                    .map(|c| {
                        let a = self.map(i, c);
                        a.c + a.z.map_or(0.0, |(j, p)| p * z[j])
                    })
                    .collect()
            })
            .collect()
    }
}

/// Accumulates `½xᵀAx − fᵀx` in the reduced coordinates.
struct Assembler<'a> {
    red: Reduction<'a>,
    mat: BandedSpd,
    rhs: Vec<f64>,
}

impl Assembler<'_> {
    /// Ordered-pair contribution `½·a·x_r·x_s`.
    fn quad(&mut self, r: (usize, usize), s: (usize, usize), a: f64) {
        let xr = self.red.map(r.0, r.1);
        let xs = self.red.map(s.0, s.1);
        if let Some((zr, pr)) = xr.z {
            self.rhs[zr] -= a * pr * xs.c;
            if let Some((zs, ps)) = xs.z {
                // each unordered pair arrives in both orders; keep one
                if zr >= zs {
                    self.mat.add(zr, zs, a * pr * ps);
                }
            }
        }
    }

    /// Linear contribution `−f·x_r`.
    fn linear(&mut self, r: (usize, usize), f: f64) {
        if let Some((zr, pr)) = self.red.map(r.0, r.1).z {
            self.rhs[zr] += f * pr;
        }
    }
}

fn trapezoid_weight(i: usize, last: usize, h: f64) -> f64 {
    if i == 0 || i == last {
        0.5 * h
    } else {
        h
    }
}

/// Central first and second difference weights over `(i−1, i, i+1)`.
fn central(h: f64) -> ([f64; 3], [f64; 3]) {
    let d1 = [-0.5 / h, 0.0, 0.5 / h];
    let d2 = [1.0 / (h * h), -2.0 / (h * h), 1.0 / (h * h)];
    (d1, d2)
}

fn check_problem(
    potential: &PotentialSpec,
    input: &InputSignal,
    q0: &[f64],
    q1: &[f64],
) -> Result<usize> {
    if !potential.is_quadratic() {
        return Err(CalError::InvalidArgument(format!(
            "the discrete solver needs a potential quadratic in q, got {}",
            potential.name()
        )));
    }
    check_input(potential, input)?;
    let n = potential.weight_dim();
    for (what, v) in [("q0", q0), ("q1", q1)] {
        if v.len() != n {
            return Err(CalError::DimensionMismatch {
                what,
                expected: n,
                found: v.len(),
            });
        }
    }
    Ok(n)
}

fn steps_for(horizon: f64, h: f64) -> Result<(usize, f64)> {
    let (steps, h) = super::grid(horizon, h)?;
    if steps < 4 {
        return Err(CalError::InvalidArgument(format!(
            "the discrete solver needs at least 4 intervals, got {steps}"
        )));
    }
    Ok((steps, h))
}

/// Minimizes `J_h` over grid functions meeting the left data.
pub fn minimize_discrete_action(
    params: &CALParameters,
    potential: &PotentialSpec,
    input: &InputSignal,
    q0: &[f64],
    q1: &[f64],
    horizon: f64,
    h: f64,
) -> Result<DiscreteSolution> {
    let n = check_problem(potential, input, q0, q1)?;
    let (last, h) = steps_for(horizon, h)?;
    let nz = (last + 1) * n;
    let mut asm = Assembler {
        red: Reduction { n, h, q0, q1 },
        mat: BandedSpd::zeros(nz, 3 * n),
        rhs: vec![0.0; nz],
    };

    let CALParameters {
        theta,
        mu,
        nu,
        gamma,
        k,
    } = *params;
    let (d1, d2) = central(h);
    for i in 0..=last {
        let t = i as f64 * h;
        let w = trapezoid_weight(i, last, h) * (theta * (t - horizon)).exp();
        let slot = i + 1;

        // kinetic part: w·(μ/2 a² + ν/2 v² + γ v a) with a = D₂q, v = D₁q
        for j in 0..3 {
            for l in 0..3 {
                let m = w
                    * (mu * d2[j] * d2[l] + nu * d1[j] * d1[l] + gamma * (d2[j] * d1[l] + d1[j] * d2[l]));
                if m != 0.0 {
                    for c in 0..n {
                        asm.quad((i + j, c), (i + l, c), m);
                    }
                }
            }
        }

        for c in 0..n {
            asm.quad((slot, c), (slot, c), w * k);
        }

        let u = input.eval(t);
        let form = potential
            .quadratic_form(&u)?
            .expect("checked quadratic above");
        for r in 0..n {
            for s in 0..n {
                let hrs = form.hessian[r * n + s];
                if hrs != 0.0 {
                    asm.quad((slot, r), (slot, s), w * hrs);
                }
            }
            asm.linear((slot, r), w * form.linear[r]);
        }
    }

    let z = asm.mat.solve(&asm.rhs)?;
    let extended = asm.red.expand(&z, last + 3);
    let trajectory = reconstruct(&extended[1..=last + 1], h, params, potential, input);
    let action = discrete_action(params, potential, input, &extended, horizon)?;
    Ok(DiscreteSolution {
        extended,
        trajectory,
        action,
    })
}

fn apply(st: &[(usize, f64)], nodes: &[Vec<f64>], c: usize) -> f64 {
    st.iter().map(|&(j, w)| w * nodes[j][c]).sum()
}

fn reconstruct(
    nodes: &[Vec<f64>],
    h: f64,
    params: &CALParameters,
    potential: &PotentialSpec,
    input: &InputSignal,
) -> Trajectory {
    let last = nodes.len() - 1;
    let n = nodes[0].len();
    let states = (0..=last)
        .map(|i| {
            let mut s = State::zeros(i as f64 * h, n);
            s.q.clone_from(&nodes[i]);
            for (order, out) in [(1, &mut s.dq), (2, &mut s.d2q), (3, &mut s.d3q)] {
                let st = node_stencil(i, last, order, h);
                for (c, o) in out.iter_mut().enumerate() {
                    *o = apply(&st, nodes, c);
                }
            }
            s
        })
        .collect();
    Trajectory {
        states,
        meta: TrajectoryMeta {
            method: "discrete_action".into(),
            step: h,
            params: Some(*params),
            schedule_id: None,
            potential_id: potential.name().into(),
            input_id: input.name().into(),
        },
    }
}

/// `J_h` (times `e^{θT}`) of a grid function on the extended grid
/// `extended[0..=N+2]` (ghost, real nodes `0..=N`, ghost) over `[0, T]`;
/// the functional minimized by [`minimize_discrete_action`].
pub fn discrete_action(
    params: &CALParameters,
    potential: &PotentialSpec,
    input: &InputSignal,
    extended: &[Vec<f64>],
    horizon: f64,
) -> Result<f64> {
    check_input(potential, input)?;
    if extended.len() < 4 {
        return Err(CalError::InvalidArgument(
            "the discrete action needs at least two real nodes plus ghosts".into(),
        ));
    }
    let last = extended.len() - 3;
    let h = horizon / last as f64;
    let n = extended[0].len();
    let (d1, d2) = central(h);
    let mut sum = 0.0;
    for i in 0..=last {
        let t = i as f64 * h;
        let w = trapezoid_weight(i, last, h) * (params.theta * (t - horizon)).exp();
        let q = &extended[i + 1];
        let mut l = potential.eval(q, &input.eval(t))?;
        for c in 0..n {
            let v: f64 = (0..3).map(|j| d1[j] * extended[i + j][c]).sum();
            let a: f64 = (0..3).map(|j| d2[j] * extended[i + j][c]).sum();
            l += 0.5 * params.mu * a * a
                + 0.5 * params.nu * v * v
                + params.gamma * v * a
                + 0.5 * params.k * q[c] * q[c];
        }
        sum += w * l;
    }
    Ok((params.theta * horizon).exp() * sum)
}
