//! The monic quartic `χ(x) = x⁴ + bx³ + cx² + dx + e` that governs the free
//! (null-input) dynamics: construction from the equation coefficients,
//! Routh–Hurwitz stability, depression to `z⁴ + qz² + rz + s`, reality
//! classification and numerical roots.

use std::cmp::Ordering;

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CalError, Result};
use crate::params::CALParameters;

/// Relative tolerance for the measure-zero equalities of the reality
/// classification (`Δ = 0`, `s = q²/4`, ...).
pub const TAU_EQ: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuarticCoefficients {
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
}

impl QuarticCoefficients {
    pub fn new(b: f64, c: f64, d: f64, e: f64) -> Self {
        Self { b, c, d, e }
    }

    /// Monic quartic with the given roots.
    pub fn from_roots(roots: [f64; 4]) -> Self {
        let [r1, r2, r3, r4] = roots;
        Self {
            b: -(r1 + r2 + r3 + r4),
            c: r1 * r2 + r1 * r3 + r1 * r4 + r2 * r3 + r2 * r4 + r3 * r4,
            d: -(r1 * r2 * r3 + r1 * r2 * r4 + r1 * r3 * r4 + r2 * r3 * r4),
            e: r1 * r2 * r3 * r4,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.b.is_finite() && self.c.is_finite() && self.d.is_finite() && self.e.is_finite()
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.b.abs().max(self.c.abs()).max(self.d.abs()).max(self.e.abs())
    }

    /// `1 + max|coefficient|`.
    pub fn scale(&self) -> f64 {
        1.0 + self.max_abs_coefficient()
    }

    /// Coefficients from the leading term down: `[1, b, c, d, e]`.
    pub fn monic(&self) -> [f64; 5] {
        [1.0, self.b, self.c, self.d, self.e]
    }

    pub fn eval(&self, x: f64) -> f64 {
        (((x + self.b) * x + self.c) * x + self.d) * x + self.e
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        horner(&self.monic(), z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepressedQuartic {
    pub q: f64,
    pub r: f64,
    pub s: f64,
    /// Discriminant of `z⁴ + qz² + rz + s`.
    pub delta: f64,
}

impl DepressedQuartic {
    pub fn new(q: f64, r: f64, s: f64) -> Self {
        Self {
            q,
            r,
            s,
            delta: discriminant(q, r, s),
        }
    }

    pub fn eval(&self, z: f64) -> f64 {
        ((z * z + self.q) * z + self.r) * z + self.s
    }

    pub fn scale(&self) -> f64 {
        1.0 + self.q.abs().max(self.r.abs()).max(self.s.abs())
    }
}

/// Discriminant of the depressed quartic, i.e. the product of squared root
/// differences `Π_{i<j} (zᵢ − zⱼ)²`.
pub fn discriminant(q: f64, r: f64, s: f64) -> f64 {
    discriminant_terms(q, r, s).iter().sum()
}

fn discriminant_terms(q: f64, r: f64, s: f64) -> [f64; 6] {
    let q2 = q * q;
    let r2 = r * r;
    let s2 = s * s;
    [
        256.0 * s2 * s,
        -128.0 * q2 * s2,
        144.0 * q * r2 * s,
        -27.0 * r2 * r2,
        16.0 * q2 * q2 * s,
        -4.0 * q2 * q * r2,
    ]
}

/// Lemma-style classification of when all four roots are real. Variants
/// follow the five sufficient cases in order, plus the complement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RealityClass {
    /// `q<0`, `4s−q²<0`, `Δ>0`.
    FourDistinctReal,
    /// `−q²/12 < s < q²/4`, `Δ=0`.
    RealTwoEqual,
    /// `q<0`, `s=q²/4`, `Δ=0`.
    TwoPairsEqualReal,
    /// `q<0`, `s=−q²/12`, `Δ=0`.
    RealThreeEqual,
    /// `q=0`, `s=0`, `Δ=0`.
    AllZeroLike,
    HasComplex,
}

impl RealityClass {
    pub fn all_real(self) -> bool {
        !matches!(self, RealityClass::HasComplex)
    }
}

/// Four complex roots sorted by `(Re, Im)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub roots: [Complex64; 4],
}

impl RootSet {
    pub fn max_real_part(&self) -> f64 {
        self.roots.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs_imag(&self) -> f64 {
        self.roots.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn max_modulus(&self) -> f64 {
        self.roots.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Smallest pairwise distance between roots.
    pub fn min_gap(&self) -> f64 {
        let mut gap = f64::INFINITY;
        for i in 0..4 {
            for j in (i + 1)..4 {
                gap = gap.min((self.roots[i] - self.roots[j]).norm());
            }
        }
        gap
    }

    pub fn iter(&self) -> impl Iterator<Item = &Complex64> {
        self.roots.iter()
    }
}

pub fn cal_to_charpoly(params: &CALParameters) -> Result<QuarticCoefficients> {
    let CALParameters {
        theta,
        mu,
        nu,
        gamma,
        k,
    } = *params;
    if mu == 0.0 {
        return Err(CalError::DegenerateMass);
    }
    Ok(QuarticCoefficients {
        b: 2.0 * theta,
        c: (theta * theta * mu + theta * gamma - nu) / mu,
        d: (theta * theta * gamma - theta * nu) / mu,
        e: k / mu,
    })
}

/// Routh–Hurwitz for a monic quartic:
/// `b>0, c>0, 0<d<bc, 0<e<(bcd−d²)/b²`.
pub fn routh_hurwitz_stable(p: &QuarticCoefficients) -> bool {
    let QuarticCoefficients { b, c, d, e } = *p;
    b > 0.0 && c > 0.0 && d > 0.0 && d < b * c && e > 0.0 && e < (b * c * d - d * d) / (b * b)
}

/// Substitutes `x = z − b/4`.
pub fn depress(p: &QuarticCoefficients) -> DepressedQuartic {
    let QuarticCoefficients { b, c, d, e } = *p;
    let b2 = b * b;
    let q = c - 3.0 * b2 / 8.0;
    let r = b2 * b / 8.0 - b * c / 2.0 + d;
    let s = b2 * c / 16.0 - 3.0 * b2 * b2 / 256.0 - b * d / 4.0 + e;
    DepressedQuartic::new(q, r, s)
}

/// Tolerance-aware comparisons on depressed-quartic quantities. Strict
/// inequalities exclude the equality band so that the measure-zero cases
/// remain reachable.
struct Cmp {
    base: f64,
}

impl Cmp {
    fn tol(&self, a: f64, b: f64) -> f64 {
        TAU_EQ * (self.base + a.abs() + b.abs())
    }

    fn eq(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.tol(a, b)
    }

    fn lt(&self, a: f64, b: f64) -> bool {
        a < b - self.tol(a, b)
    }
}

/// Returns the first matching case, checked in order 1 → 5.
pub fn classify_reality(dq: &DepressedQuartic) -> RealityClass {
    let DepressedQuartic { q, r, s, delta } = *dq;
    let cmp = Cmp { base: dq.scale() };
    // Δ is a degree-5 form in the coefficients; its rounding error scales
    // with the magnitude of its individual terms, not with Δ itself.
    let delta_band = TAU_EQ * discriminant_terms(q, r, s).iter().map(|t| t.abs()).sum::<f64>();
    let delta_zero = delta.abs() <= delta_band;
    let delta_pos = delta > delta_band;
    let q2 = q * q;

    if cmp.lt(q, 0.0) && cmp.lt(4.0 * s, q2) && delta_pos {
        RealityClass::FourDistinctReal
    } else if cmp.lt(-q2 / 12.0, s) && cmp.lt(s, q2 / 4.0) && delta_zero {
        RealityClass::RealTwoEqual
    } else if cmp.lt(q, 0.0) && cmp.eq(s, q2 / 4.0) && delta_zero {
        RealityClass::TwoPairsEqualReal
    } else if cmp.lt(q, 0.0) && cmp.eq(s, -q2 / 12.0) && delta_zero {
        RealityClass::RealThreeEqual
    } else if cmp.eq(q, 0.0) && cmp.eq(s, 0.0) && delta_zero {
        RealityClass::AllZeroLike
    } else {
        RealityClass::HasComplex
    }
}

fn horner(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Coefficients of the j-th derivative (highest degree first).
fn derivative_coeffs(coeffs: &[f64], order: usize) -> Vec<f64> {
    let mut cur = coeffs.to_vec();
    for _ in 0..order {
        let deg = cur.len() - 1;
        cur = cur[..deg]
            .iter()
            .enumerate()
            .map(|(i, &c)| c * (deg - i) as f64)
            .collect();
    }
    cur
}

/// Roots from the eigenvalues of the companion matrix, followed by
/// guarded Newton polishing, collapse of numerically multiple roots and
/// conjugate symmetrization.
pub fn roots(p: &QuarticCoefficients) -> RootSet {
    let coeffs = p.monic();
    #[rustfmt::skip]
    let companion = Matrix4::new(
        -p.b, -p.c, -p.d, -p.e,
        1.0,  0.0,  0.0,  0.0,
        0.0,  1.0,  0.0,  0.0,
        0.0,  0.0,  1.0,  0.0,
    );
    let eig = companion.complex_eigenvalues();
    let mut zs: Vec<Complex64> = eig.iter().copied().collect();

    let collapsed = collapse_multiple(&coeffs, &mut zs);
    for (z, fixed) in zs.iter_mut().zip(&collapsed) {
        if !fixed {
            *z = polish(&coeffs, *z);
        }
    }
    symmetrize_conjugates(&mut zs);

    zs.sort_by(|a, b| match a.re.total_cmp(&b.re) {
        Ordering::Equal => a.im.total_cmp(&b.im),
        o => o,
    });
    RootSet {
        roots: [zs[0], zs[1], zs[2], zs[3]],
    }
}

fn polish(coeffs: &[f64], z0: Complex64) -> Complex64 {
    let dcoeffs = derivative_coeffs(coeffs, 1);
    let mut z = z0;
    let mut fz = horner(coeffs, z).norm();
    for _ in 0..8 {
        if fz == 0.0 {
            break;
        }
        let dp = horner(&dcoeffs, z);
        if dp.norm() == 0.0 {
            break;
        }
        let mut cand = z - horner(coeffs, z) / dp;
        if z.im == 0.0 {
            cand.im = 0.0;
        }
        let fc = horner(coeffs, cand).norm();
        if !(fc < fz) {
            break;
        }
        z = cand;
        fz = fc;
    }
    z
}

/// Groups nearby roots and replaces a group of size m by its centroid when
/// the first m−1 derivatives (and the value) vanish there to rounding
/// level, i.e. the group is a perturbed m-fold root. Runs on the raw
/// eigenvalues, whose centroid inherits the accuracy of the trace.
fn collapse_multiple(coeffs: &[f64], zs: &mut [Complex64]) -> Vec<bool> {
    let radius = 1e-2 * (1.0 + zs.iter().map(|z| z.norm()).fold(0.0, f64::max));
    let n = zs.len();
    let mut group: Vec<usize> = (0..n).collect();
    // single-linkage union
    for i in 0..n {
        for j in (i + 1)..n {
            if (zs[i] - zs[j]).norm() <= radius {
                let (gi, gj) = (group[i], group[j]);
                if gi != gj {
                    for g in group.iter_mut() {
                        if *g == gj {
                            *g = gi;
                        }
                    }
                }
            }
        }
    }
    let mut seen = vec![false; n];
    let mut collapsed = vec![false; n];
    for i in 0..n {
        if seen[group[i]] {
            continue;
        }
        seen[group[i]] = true;
        let members: Vec<usize> = (0..n).filter(|&j| group[j] == group[i]).collect();
        let m = members.len();
        if m < 2 {
            continue;
        }
        let centroid = members.iter().map(|&j| zs[j]).sum::<Complex64>() / m as f64;
        let multiple = (0..m).all(|order| {
            let dc = derivative_coeffs(coeffs, order);
            let value = horner(&dc, centroid).norm();
            let abs_coeffs: Vec<f64> = dc.iter().map(|c| c.abs()).collect();
            let bound = horner(&abs_coeffs, Complex64::new(centroid.norm(), 0.0)).re;
            value <= 1e-12 * bound
        });
        if multiple {
            let c = if centroid.im.abs() <= 1e-12 * (1.0 + centroid.re.abs()) {
                Complex64::new(centroid.re, 0.0)
            } else {
                centroid
            };
            for &j in &members {
                zs[j] = c;
                collapsed[j] = true;
            }
        }
    }
    collapsed
}

fn symmetrize_conjugates(zs: &mut [Complex64]) {
    let n = zs.len();
    let mut done = vec![false; n];
    for i in 0..n {
        if done[i] || zs[i].im <= 0.0 {
            continue;
        }
        let target = zs[i].conj();
        let partner = (0..n)
            .filter(|&j| j != i && !done[j] && zs[j].im < 0.0)
            .min_by(|&a, &b| (zs[a] - target).norm().total_cmp(&(zs[b] - target).norm()));
        if let Some(j) = partner {
            let avg = (zs[i] + zs[j].conj()) / 2.0;
            zs[i] = avg;
            zs[j] = avg.conj();
            done[i] = true;
            done[j] = true;
        }
    }
}
