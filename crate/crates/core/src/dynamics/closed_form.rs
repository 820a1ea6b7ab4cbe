use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;

use super::{CauchyData, State};
use crate::charpoly::{cal_to_charpoly, roots};
use crate::error::{CalError, Result};
use crate::params::CALParameters;

/// Relative root separation below which the modal expansion is refused.
const CONFLUENT_GAP: f64 = 1e-6;

/// Modal expansion `q(t) = Σⱼ cⱼ e^{λⱼt}` of the null-input dynamics, one
/// coefficient vector per coordinate.
#[derive(Debug, Clone)]
pub struct FreeSolution {
    roots: [Complex64; 4],
    coeffs: Vec<[Complex64; 4]>,
    t0: f64,
}

impl FreeSolution {
    /// Uses the characteristic roots of `params`.
    pub fn new(params: &CALParameters, cauchy: &CauchyData) -> Result<Self> {
        let rs = roots(&cal_to_charpoly(params)?);
        Self::with_roots(rs.roots, cauchy, 0.0)
    }

    /// Expansion with known roots, matching `cauchy` at time `t0`.
    pub fn with_roots(roots: [Complex64; 4], cauchy: &CauchyData, t0: f64) -> Result<Self> {
        let scale = roots.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        let mut gap = f64::INFINITY;
        for i in 0..4 {
            for j in i + 1..4 {
                gap = gap.min((roots[i] - roots[j]).norm());
            }
        }
        if gap <= CONFLUENT_GAP * scale || gap == 0.0 {
            return Err(CalError::ConfluentRoots { gap });
        }
        let v = Matrix4::from_fn(|k, j| roots[j].powi(k as i32));
        let lu = v.lu();
        let start = cauchy.to_state(cauchy.dim())?;
        let mut coeffs = Vec::with_capacity(start.dim());
        for i in 0..start.dim() {
            let rhs = Vector4::new(
                Complex64::from(start.q[i]),
                Complex64::from(start.dq[i]),
                Complex64::from(start.d2q[i]),
                Complex64::from(start.d3q[i]),
            );
            let c = lu
                .solve(&rhs)
                .ok_or(CalError::ConfluentRoots { gap })?;
            coeffs.push([c[0], c[1], c[2], c[3]]);
        }
        Ok(Self { roots, coeffs, t0 })
    }

    pub fn roots(&self) -> &[Complex64; 4] {
        &self.roots
    }

    /// Modal coefficients of coordinate `i`.
    pub fn coefficients(&self, i: usize) -> &[Complex64; 4] {
        &self.coeffs[i]
    }

    pub fn eval(&self, t: f64) -> State {
        let n = self.coeffs.len();
        let mut s = State::zeros(t, n);
        let tau = t - self.t0;
        let modes: Vec<Complex64> = self.roots.iter().map(|l| (l * tau).exp()).collect();
        for (i, c) in self.coeffs.iter().enumerate() {
            let mut acc = [Complex64::new(0.0, 0.0); 4];
            for j in 0..4 {
                let mut term = c[j] * modes[j];
                for a in acc.iter_mut() {
                    *a += term;
                    term *= self.roots[j];
                }
            }
            s.q[i] = acc[0].re;
            s.dq[i] = acc[1].re;
            s.d2q[i] = acc[2].re;
            s.d3q[i] = acc[3].re;
        }
        s
    }
}

/// State at time `t` of the null-input dynamics started from `cauchy`.
pub fn closed_form_free(params: &CALParameters, cauchy: &CauchyData, t: f64) -> Result<State> {
    Ok(FreeSolution::new(params, cauchy)?.eval(t))
}
