//! Interpolation on the annulus `A = {1 < |z| < e}` with `ℓ_q` pseudolattices.
//!
//! Elements of the J-space are finitely supported two-sided sequences
//! `{b_n}` of vectors, identified with Laurent polynomials `f(z) = Σ z^n b_n`.
//! The space `B_s` consists of the values `f(s)` with the quotient norm
//! `inf { ‖{b_n}‖_J : Σ s^n b_n = x }`.

use std::f64::consts::E;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::convex::{ellipsoid_minimize, EllipsoidOptions};
use crate::error::{check_dim, LabError, Result};
use crate::functors::NormBracket;
use crate::sampling::{random_laurent, substream};
use crate::spaces::{lp_norm, BanachCouple, Exponent, WeightedSpace};
use crate::verdict::CheckReport;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// The couple of pseudolattices `(ℓ_{q0}(Z), ℓ_{q1}(Z))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PseudolatticeCouple {
    pub q0: Exponent,
    pub q1: Exponent,
}

impl PseudolatticeCouple {
    pub fn new(q0: Exponent, q1: Exponent) -> Self {
        PseudolatticeCouple { q0, q1 }
    }
}

/// A point `s` of the open annulus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnulusPoint {
    value: Complex64,
}

impl AnnulusPoint {
    pub fn new(value: Complex64) -> Result<Self> {
        let r = value.norm();
        if !(r > 1.0 && r < E) {
            return Err(LabError::Input(format!("|s| = {r} is outside the annulus (1, e)")));
        }
        Ok(AnnulusPoint { value })
    }

    pub fn from_polar(modulus: f64, angle: f64) -> Result<Self> {
        AnnulusPoint::new(Complex64::from_polar(modulus, angle))
    }

    pub fn value(&self) -> Complex64 {
        self.value
    }

    pub fn modulus(&self) -> f64 {
        self.value.norm()
    }
}

/// `δ(s) = max{(|s| − 1)^{−1}, (e − |s|)^{−1}}`.
pub fn delta_constant(s: &AnnulusPoint) -> f64 {
    delta_of_modulus(s.modulus())
}

pub(crate) fn delta_of_modulus(r: f64) -> f64 {
    (1.0 / (r - 1.0)).max(1.0 / (E - r))
}

/// Finitely supported sequence `{b_n}_{n = lo..=hi}` of vectors in `C^dim`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaurentElement {
    lo: i64,
    coeffs: Vec<Vec<Complex64>>,
}

impl LaurentElement {
    pub fn new(lo: i64, coeffs: Vec<Vec<Complex64>>) -> Result<Self> {
        let Some(first) = coeffs.first() else {
            return Err(LabError::Input("Laurent element needs at least one coefficient".into()));
        };
        let dim = first.len();
        if dim == 0 {
            return Err(LabError::Input("coefficients must have positive dimension".into()));
        }
        for c in &coeffs {
            check_dim(dim, c.len())?;
        }
        Ok(LaurentElement { lo, coeffs })
    }

    pub fn zero(dim: usize) -> Self {
        LaurentElement {
            lo: 0,
            coeffs: vec![vec![ZERO; dim]],
        }
    }

    pub fn constant(x: Vec<Complex64>) -> Result<Self> {
        LaurentElement::new(0, vec![x])
    }

    /// `z^n x`.
    pub fn monomial(n: i64, x: Vec<Complex64>) -> Result<Self> {
        LaurentElement::new(n, vec![x])
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.coeffs.len() as i64 - 1
    }

    pub fn dim(&self) -> usize {
        self.coeffs[0].len()
    }

    pub fn coeffs(&self) -> &[Vec<Complex64>] {
        &self.coeffs
    }

    /// `b_n`, zero outside the support.
    pub fn coeff(&self, n: i64) -> Vec<Complex64> {
        if n < self.lo || n > self.hi() {
            vec![ZERO; self.dim()]
        } else {
            self.coeffs[(n - self.lo) as usize].clone()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.iter().all(|z| *z == ZERO))
    }

    /// `Σ z^n b_n`.
    pub fn evaluate(&self, z: Complex64) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.dim()];
        for (k, c) in self.coeffs.iter().enumerate() {
            let zn = z.powi((self.lo + k as i64) as i32);
            for (o, v) in out.iter_mut().zip(c) {
                *o += zn * v;
            }
        }
        out
    }

    /// `Σ n z^{n−1} b_n`.
    pub fn derivative(&self, z: Complex64) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.dim()];
        for (k, c) in self.coeffs.iter().enumerate() {
            let n = self.lo + k as i64;
            if n == 0 {
                continue;
            }
            let w = z.powi((n - 1) as i32) * n as f64;
            for (o, v) in out.iter_mut().zip(c) {
                *o += w * v;
            }
        }
        out
    }

    /// `{e^{inτ} b_n}`; satisfies `rotate(b, τ)(z) = b(z e^{iτ})`.
    pub fn rotate(&self, tau: f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let f = Complex64::from_polar(1.0, (self.lo + k as i64) as f64 * tau);
                c.iter().map(|v| v * f).collect()
            })
            .collect();
        LaurentElement { lo: self.lo, coeffs }
    }

    fn combine(&self, other: &Self, a: Complex64, b: Complex64) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        let lo = self.lo.min(other.lo);
        let hi = self.hi().max(other.hi());
        let coeffs = (lo..=hi)
            .map(|n| {
                let (x, y) = (self.coeff(n), other.coeff(n));
                x.iter().zip(&y).map(|(u, v)| a * u + b * v).collect()
            })
            .collect();
        Ok(LaurentElement { lo, coeffs })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        LaurentElement {
            lo: self.lo,
            coeffs: self.coeffs.iter().map(|v| v.iter().map(|z| z * c).collect()).collect(),
        }
    }

    /// `(a + b z) f(z)`.
    pub fn mul_linear(&self, a: Complex64, b: Complex64) -> Self {
        let lo = self.lo;
        let hi = self.hi() + 1;
        let coeffs = (lo..=hi)
            .map(|n| {
                let (x, y) = (self.coeff(n), self.coeff(n - 1));
                x.iter().zip(&y).map(|(u, v)| a * u + b * v).collect()
            })
            .collect();
        LaurentElement { lo, coeffs }
    }

    /// Applies a matrix to every coefficient.
    pub fn map_coeffs(&self, f: impl Fn(&[Complex64]) -> Vec<Complex64>) -> Result<Self> {
        LaurentElement::new(self.lo, self.coeffs.iter().map(|c| f(c)).collect())
    }
}

/// `max(‖(‖b_n‖_{B_0})_n‖_{ℓ_{q0}}, ‖(e^n ‖b_n‖_{B_1})_n‖_{ℓ_{q1}})`.
pub fn j_norm(b: &LaurentElement, p: &PseudolatticeCouple, couple: &BanachCouple) -> Result<f64> {
    check_dim(couple.dim(), b.dim())?;
    let (a, c) = j_parts(b, couple);
    Ok(lp_norm(p.q0, &a).max(lp_norm(p.q1, &c)))
}

fn j_parts(b: &LaurentElement, couple: &BanachCouple) -> (Vec<f64>, Vec<f64>) {
    let mut a = Vec::with_capacity(b.coeffs.len());
    let mut c = Vec::with_capacity(b.coeffs.len());
    for (k, v) in b.coeffs.iter().enumerate() {
        let n = (b.lo + k as i64) as f64;
        let mags: Vec<f64> = v.iter().map(|z| z.norm()).collect();
        a.push(couple.space0.norm_abs(&mags));
        c.push(n.exp() * couple.space1.norm_abs(&mags));
    }
    (a, c)
}

/// `Σ_n |s|^n max_i |f_{n,i}|`, the scale against which `f(s) = 0` is tested.
fn vanishing_scale(f: &LaurentElement, s: Complex64) -> f64 {
    let r = s.norm();
    f.coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| r.powi((f.lo + k as i64) as i32) * c.iter().map(|z| z.norm()).fold(0.0, f64::max))
        .sum()
}

/// Divides `f` by `(z − s)` when `f(s) = 0`.
///
/// Returns `g` supported in `[f.lo, f.hi − 1]` with `g_n = Σ_{k≥0} s^k f_{n+k+1}`.
/// Because `f(s) = 0` this equals `−Σ_{k≥0} s^{−k−1} f_{n−k}`, which is the form
/// evaluated here: it only involves powers of modulus below one.
pub fn cancel_divide(f: &LaurentElement, s: &AnnulusPoint) -> Result<LaurentElement> {
    let s = s.value();
    let scale = vanishing_scale(f, s);
    let at_s = f.evaluate(s);
    let residual = at_s.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if residual > 1e-12 * scale {
        return Err(LabError::Precondition(format!(
            "f(s) must vanish: max |f(s)_i| = {residual:e} against scale {scale:e}"
        )));
    }
    let dim = f.dim();
    if f.coeffs.len() == 1 {
        return Ok(LaurentElement {
            lo: f.lo,
            coeffs: vec![vec![ZERO; dim]],
        });
    }
    let inv = 1.0 / s;
    let mut coeffs = Vec::with_capacity(f.coeffs.len() - 1);
    let mut prev = vec![ZERO; dim];
    for c in &f.coeffs[..f.coeffs.len() - 1] {
        let g: Vec<Complex64> = prev.iter().zip(c).map(|(p, v)| (p - v) * inv).collect();
        coeffs.push(g.clone());
        prev = g;
    }
    Ok(LaurentElement { lo: f.lo, coeffs })
}

/// Bracket for `‖x‖_{B_s}` with the representation found.
#[derive(Debug, Clone, Serialize)]
pub struct BSpaceNorm {
    /// Lower end: a dual bound valid for representations over all of `Z`.
    /// Upper end: `j_norm` of `representation`, supported in the window.
    pub bracket: NormBracket,
    /// Certified lower bound for the optimum over representations in the window.
    pub window_lower: f64,
    pub representation: LaurentElement,
    pub converged: bool,
    pub iterations: usize,
}

struct WindowProblem<'a> {
    couple: &'a BanachCouple,
    lo: i64,
    w: usize,
    d: usize,
    r: Vec<f64>,
    pow: Vec<f64>,
    pivot: Vec<usize>,
    free: Vec<(usize, usize)>,
    outer0: WeightedSpace,
    outer1: WeightedSpace,
}

impl WindowProblem<'_> {
    fn full(&self, z: &[f64]) -> Vec<f64> {
        let mut rho = vec![0.0; self.w * self.d];
        for (k, &(n, i)) in self.free.iter().enumerate() {
            rho[n * self.d + i] = z[k];
        }
        for i in 0..self.d {
            if self.r[i] == 0.0 {
                continue;
            }
            let ps = self.pivot[i];
            let rest: f64 = (0..self.w).filter(|&n| n != ps).map(|n| self.pow[n] * rho[n * self.d + i]).sum();
            rho[ps * self.d + i] = (self.r[i] - rest) / self.pow[ps];
        }
        rho
    }

    fn j_value(&self, rho: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
        let mut a = vec![0.0; self.w];
        let mut c = vec![0.0; self.w];
        for n in 0..self.w {
            let mags: Vec<f64> = rho[n * self.d..(n + 1) * self.d].iter().map(|v| v.abs()).collect();
            a[n] = self.couple.space0.norm_abs(&mags);
            c[n] = self.couple.space1.norm_abs(&mags);
        }
        let j = self.outer0.norm_abs(&a).max(self.outer1.norm_abs(&c));
        (j, a, c)
    }

    /// Value and gradient with respect to all coordinates of `ρ`.
    fn full_gradient(&self, rho: &[f64]) -> (f64, Vec<f64>) {
        let (j, a, c) = self.j_value(rho);
        let use0 = self.outer0.norm_abs(&a) >= self.outer1.norm_abs(&c);
        let (outer, inner, vals) = if use0 {
            (&self.outer0, &self.couple.space0, &a)
        } else {
            (&self.outer1, &self.couple.space1, &c)
        };
        let go = outer.norm_gradient_abs(vals);
        let mut g = vec![0.0; rho.len()];
        for n in 0..self.w {
            if go[n] == 0.0 {
                continue;
            }
            let row = &rho[n * self.d..(n + 1) * self.d];
            let mags: Vec<f64> = row.iter().map(|v| v.abs()).collect();
            let gi = inner.norm_gradient_abs(&mags);
            for i in 0..self.d {
                let sgn = if row[i] < 0.0 { -1.0 } else { 1.0 };
                g[n * self.d + i] = sgn * go[n] * gi[i];
            }
        }
        (j, g)
    }

    fn reduced(&self, z: &[f64]) -> (f64, Vec<f64>) {
        let rho = self.full(z);
        let (j, g) = self.full_gradient(&rho);
        let gz = self
            .free
            .iter()
            .map(|&(n, i)| {
                let ps = self.pivot[i];
                g[n * self.d + i] - g[ps * self.d + i] * self.pow[n] / self.pow[ps]
            })
            .collect();
        (j, gz)
    }

    /// Multipliers of the constraints `Σ_n |s|^n ρ_{n,i} = |x_i|` at `ρ`.
    fn multipliers(&self, rho: &[f64]) -> Vec<f64> {
        let (_, g) = self.full_gradient(rho);
        (0..self.d)
            .map(|i| {
                if self.r[i] == 0.0 {
                    0.0
                } else {
                    let ps = self.pivot[i];
                    (g[ps * self.d + i] / self.pow[ps]).abs()
                }
            })
            .collect()
    }
}

/// Dual lower bound `<|x|, y> / min_m (‖y‖_{B_0^*} A_m + ‖y‖_{B_1^*} C_m)` where
/// `A_m`, `C_m` are `ℓ_{q'}` norms of `|s|^n` over `n ≤ m` and of `(|s|/e)^n`
/// over `n > m`, taken over `window` or over all of `Z`.
fn dual_lower_bound(r: &[f64], y: &[f64], u: f64, p: &PseudolatticeCouple, couple: &BanachCouple, window: Option<(i64, i64)>) -> f64 {
    let pairing: f64 = r.iter().zip(y).map(|(a, b)| a * b).sum();
    if pairing <= 0.0 {
        return 0.0;
    }
    let alpha = couple.space0.dual_norm_abs(y);
    let beta = couple.space1.dual_norm_abs(y);
    let (q0c, q1c) = (p.q0.conjugate(), p.q1.conjugate());
    let v = u / E;
    let mut best = f64::INFINITY;
    match window {
        None => {
            let g0 = match q0c {
                Exponent::Infinite => 1.0,
                Exponent::Finite(q) => (1.0 / (1.0 - u.powf(-q))).powf(1.0 / q),
            };
            let g1 = match q1c {
                Exponent::Infinite => 1.0,
                Exponent::Finite(q) => (1.0 / (1.0 - v.powf(q))).powf(1.0 / q),
            };
            for m in -200..=200 {
                let val = alpha * u.powi(m) * g0 + beta * v.powi(m + 1) * g1;
                best = best.min(val);
            }
        }
        Some((lo, hi)) => {
            for m in (lo - 1)..=hi {
                let left: Vec<f64> = (lo..=m.min(hi)).map(|n| u.powi(n as i32)).collect();
                let right: Vec<f64> = ((m + 1).max(lo)..=hi).map(|n| v.powi(n as i32)).collect();
                let val = alpha * lp_norm(q0c, &left) + beta * lp_norm(q1c, &right);
                best = best.min(val);
            }
        }
    }
    if best > 0.0 && best.is_finite() {
        pairing / best
    } else {
        0.0
    }
}

/// Best dual bound over a few natural functionals.
fn best_dual_bound(r: &[f64], multipliers: Option<&[f64]>, u: f64, p: &PseudolatticeCouple, couple: &BanachCouple, window: Option<(i64, i64)>) -> f64 {
    let g0 = couple.space0.norm_gradient_abs(r);
    let g1 = couple.space1.norm_gradient_abs(r);
    let mut candidates: Vec<Vec<f64>> = Vec::new();
    for lambda in [0.0, 0.25, 0.5, 0.75, 1.0] {
        candidates.push(g0.iter().zip(&g1).map(|(a, b)| (1.0 - lambda) * a + lambda * b).collect());
    }
    if let Some(m) = multipliers {
        candidates.push(m.to_vec());
    }
    candidates
        .iter()
        .map(|y| dual_lower_bound(r, y, u, p, couple, window))
        .fold(0.0, f64::max)
}

/// Bracket for `‖x‖_{B_s}`.
///
/// The upper end minimizes `j_norm` over representations supported in
/// `window`; WLOG `b_{n,i} = ρ_{n,i} (x_i/|x_i|)(|s|/s)^n` with `ρ ≥ 0` and
/// `Σ_n |s|^n ρ_{n,i} = |x_i|`, a convex problem in the real `ρ`. `hint`, if
/// given, must be a representation of `x` at `s`; it bounds the search region.
pub fn bspace_norm(
    x: &[Complex64],
    s: &AnnulusPoint,
    p: &PseudolatticeCouple,
    couple: &BanachCouple,
    window: (i64, i64),
    tol: f64,
    hint: Option<&LaurentElement>,
) -> Result<BSpaceNorm> {
    check_dim(couple.dim(), x.len())?;
    let (lo, hi) = window;
    if lo > hi {
        return Err(LabError::Input(format!("empty window [{lo}, {hi}]")));
    }
    if !(tol > 0.0) {
        return Err(LabError::Input(format!("tolerance must be positive, got {tol}")));
    }
    let d = x.len();
    let w = (hi - lo + 1) as usize;
    let u = s.modulus();
    let r: Vec<f64> = x.iter().map(|z| z.norm()).collect();
    if r.iter().all(|v| *v == 0.0) {
        return Ok(BSpaceNorm {
            bracket: NormBracket::exact(0.0),
            window_lower: 0.0,
            representation: LaurentElement::new(lo, vec![vec![ZERO; d]; w])?,
            converged: true,
            iterations: 0,
        });
    }
    let pow: Vec<f64> = (lo..=hi).map(|n| u.powi(n as i32)).collect();
    let cost = |n: usize, i: usize| couple.space0.weights[i].max(((lo + n as i64) as f64).exp() * couple.space1.weights[i]);
    let pivot: Vec<usize> = (0..d)
        .map(|i| {
            (0..w)
                .min_by(|&a, &b| (cost(a, i) / pow[a]).total_cmp(&(cost(b, i) / pow[b])))
                .unwrap_or(0)
        })
        .collect();
    let mut free = Vec::new();
    for n in 0..w {
        for i in 0..d {
            if r[i] > 0.0 && n != pivot[i] {
                free.push((n, i));
            }
        }
    }
    let prob = WindowProblem {
        couple,
        lo,
        w,
        d,
        r: r.clone(),
        pow,
        pivot,
        free,
        outer0: WeightedSpace { p: p.q0, weights: vec![1.0; w] },
        outer1: WeightedSpace {
            p: p.q1,
            weights: (lo..=hi).map(|n| (n as f64).exp()).collect(),
        },
    };

    // Feasible starting points: all mass at the pivots, and the hint.
    let mut start = vec![0.0; prob.free.len()];
    let mut j_start = prob.j_value(&prob.full(&start)).0;
    if let Some(h) = hint {
        if h.dim() == d && h.lo() >= lo && h.hi() <= hi {
            let hz = hint_to_free(h, &prob, s);
            let jh = prob.j_value(&prob.full(&hz)).0;
            if jh < j_start {
                j_start = jh;
                start = hz;
            }
        }
    }

    let (best_z, window_lower, converged, iterations) = if prob.free.is_empty() {
        (start, j_start, true, 0)
    } else {
        let boxes: Vec<f64> = prob.free.iter().map(|&(n, i)| j_start / cost(n, i)).collect();
        let center: Vec<f64> = boxes.iter().map(|b| 0.5 * b).collect();
        let radius = 0.5 * boxes.iter().map(|b| b * b).sum::<f64>().sqrt() * (1.0 + 1e-9);
        let opts = EllipsoidOptions {
            rel_tol: tol,
            abs_tol: 0.0,
            max_iterations: 80_000,
            ball_contains_minimizer: true,
            certify_every: 200,
        };
        let window_bound = |z: &[f64]| {
            let rho = prob.full(z);
            best_dual_bound(&prob.r, Some(&prob.multipliers(&rho)), u, p, couple, Some((lo, hi)))
        };
        let out = ellipsoid_minimize(|z| prob.reduced(z), window_bound, &center, radius, &opts);
        let (bz, lower) = if out.upper <= j_start { (out.x, out.lower) } else { (start, out.lower) };
        (bz, lower, out.converged, out.iterations)
    };

    // Rebuild a nonnegative representation that satisfies the constraint exactly.
    let mut rho: Vec<f64> = prob.full(&best_z).iter().map(|v| v.abs()).collect();
    for i in 0..d {
        if r[i] == 0.0 {
            continue;
        }
        let total: f64 = (0..w).map(|n| prob.pow[n] * rho[n * d + i]).sum();
        for n in 0..w {
            rho[n * d + i] *= r[i] / total;
        }
    }
    let rot = Complex64::new(u, 0.0) / s.value();
    let coeffs: Vec<Vec<Complex64>> = (0..w)
        .map(|n| {
            let turn = rot.powi((lo + n as i64) as i32);
            (0..d)
                .map(|i| if r[i] > 0.0 { x[i] / r[i] * rho[n * d + i] * turn } else { ZERO })
                .collect()
        })
        .collect();
    let representation = LaurentElement::new(lo, coeffs)?;
    let upper = j_norm(&representation, p, couple)?;
    let lower = best_dual_bound(&r, Some(&prob.multipliers(&rho)), u, p, couple, None).min(upper);
    Ok(BSpaceNorm {
        bracket: NormBracket::new(lower, upper),
        window_lower: window_lower.min(upper),
        representation,
        converged,
        iterations,
    })
}

/// Coordinates of `|h|` (rescaled to satisfy the constraint) in the reduced variables.
fn hint_to_free(h: &LaurentElement, prob: &WindowProblem<'_>, s: &AnnulusPoint) -> Vec<f64> {
    let _ = s;
    let mut rho = vec![0.0; prob.w * prob.d];
    for n in 0..prob.w {
        let c = h.coeff(prob.lo + n as i64);
        for i in 0..prob.d {
            rho[n * prob.d + i] = c[i].norm();
        }
    }
    for i in 0..prob.d {
        if prob.r[i] == 0.0 {
            continue;
        }
        let total: f64 = (0..prob.w).map(|n| prob.pow[n] * rho[n * prob.d + i]).sum();
        if total > 0.0 {
            for n in 0..prob.w {
                rho[n * prob.d + i] *= prob.r[i] / total;
            }
        }
    }
    prob.free.iter().map(|&(n, i)| rho[n * prob.d + i]).collect()
}

/// Constructive representation of `f(ω)` built from a representation `f_x` of `f(s)`.
#[derive(Debug, Clone, Serialize)]
pub struct Transport {
    /// `(f − f_x)/(z − s)`.
    pub h: LaurentElement,
    /// `f_x + (ω − s) h`, a representation of `f(ω)` at `ω`.
    pub representation: LaurentElement,
    pub j_representation: f64,
    pub j_fx: f64,
    pub j_difference: f64,
    /// `j_norm(f_x) + δ(s)|ω − s| j_norm(f − f_x)`.
    pub certificate_bound: f64,
}

impl Transport {
    pub fn certificate_holds(&self, slack: f64) -> bool {
        self.j_representation <= self.certificate_bound * (1.0 + 1e-12) + slack
    }
}

pub fn transport_representation(
    f: &LaurentElement,
    f_x: &LaurentElement,
    s: &AnnulusPoint,
    omega: &AnnulusPoint,
    p: &PseudolatticeCouple,
    couple: &BanachCouple,
) -> Result<Transport> {
    let diff = f.sub(f_x)?;
    let h = cancel_divide(&diff, s)?;
    let step = omega.value() - s.value();
    let representation = f_x.add(&h.scale(step))?;
    let j_fx = j_norm(f_x, p, couple)?;
    let j_difference = j_norm(&diff, p, couple)?;
    Ok(Transport {
        j_representation: j_norm(&representation, p, couple)?,
        certificate_bound: j_fx + delta_constant(s) * step.norm() * j_difference,
        h,
        representation,
        j_fx,
        j_difference,
    })
}

/// Settings for [`kernel_distance_probe`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub samples: usize,
    pub seed: u64,
    pub support: (i64, i64),
    pub tol: f64,
    pub slack: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            samples: 200,
            seed: 0,
            support: (-4, 4),
            tol: 1e-6,
            slack: 1e-8,
        }
    }
}

struct ProbeSample {
    certificate_ok: bool,
    unit_ball_ok: bool,
    estimate: f64,
    witness: serde_json::Value,
}

/// Samples `f` with `j_norm(f) = 1` and checks the transport certificate
/// `‖f(ω)‖_{B_ω} ≤ j_norm(r) ≤ j_norm(f_x) + δ(s)|ω−s| j_norm(f − f_x)`, where
/// `f_x` is a near-optimal representation of `f(s)`, together with the
/// unit-ball form `j_norm(r) ≤ ‖f(s)‖_{B_s} + δ(s)|ω−s|` (upper brackets).
/// The second does not follow from the first since `j_norm(f − f_x)` may
/// reach 2; violations are counted separately. Also records the empirical
/// lower estimate `max(0, lo(ω) − up(s), lo(s) − up(ω))` of the distance
/// `sup |‖f(s)‖_{B_s} − ‖f(ω)‖_{B_ω}|`, asserted to stay below `δ(s)|ω−s|`.
pub fn kernel_distance_probe(
    p: &PseudolatticeCouple,
    couple: &BanachCouple,
    s: &AnnulusPoint,
    omega: &AnnulusPoint,
    cfg: &ProbeConfig,
) -> Result<CheckReport> {
    let delta = delta_constant(s);
    let step = (omega.value() - s.value()).norm();
    let bound = delta * step;
    let (lo, hi) = cfg.support;
    let results: Vec<Result<ProbeSample>> = (0..cfg.samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = substream(cfg.seed, k as u64);
            let raw = random_laurent(&mut rng, couple.dim(), lo, hi);
            let f = raw.scale(Complex64::new(1.0 / j_norm(&raw, p, couple)?, 0.0));
            let x = f.evaluate(s.value());
            let at_s = bspace_norm(&x, s, p, couple, (lo, hi), cfg.tol, Some(&f))?;
            let tr = transport_representation(&f, &at_s.representation, s, omega, p, couple)?;
            let y = f.evaluate(omega.value());
            let at_w = bspace_norm(&y, omega, p, couple, (lo, hi), cfg.tol, Some(&tr.representation))?;
            let up_w = at_w.bracket.upper.min(tr.j_representation);
            let estimate = (at_w.bracket.lower - at_s.bracket.upper)
                .max(at_s.bracket.lower - up_w)
                .max(0.0);
            Ok(ProbeSample {
                certificate_ok: tr.certificate_holds(cfg.slack),
                unit_ball_ok: tr.j_representation <= at_s.bracket.upper + bound + cfg.slack,
                estimate,
                witness: json!({
                    "sample": k,
                    "j_representation": tr.j_representation,
                    "certificate_bound": tr.certificate_bound,
                    "norm_at_s": at_s.bracket,
                    "norm_at_omega": at_w.bracket,
                }),
            })
        })
        .collect();
    let mut report = CheckReport::new("kernel-distance");
    let mut unit_ball_violations = 0usize;
    let mut sup_estimate = 0.0f64;
    for res in results {
        let sample = res?;
        let w = sample.witness;
        report.record(sample.certificate_ok && sample.unit_ball_ok, || w.clone());
        report.record(sample.estimate <= bound + cfg.slack, || w.clone());
        if !sample.unit_ball_ok {
            unit_ball_violations += 1;
        }
        sup_estimate = sup_estimate.max(sample.estimate);
    }
    report.diagnostic("delta_times_step", bound);
    report.diagnostic("empirical_distance_lower", sup_estimate);
    report.diagnostic("unit_ball_form_violations", unit_ball_violations as f64);
    Ok(report)
}

/// One cancellation case: `f` projected so that `f(s) = 0`, then divided.
#[derive(Debug, Clone, Serialize)]
pub struct CancellationCase {
    pub j_f: f64,
    pub j_g: f64,
    pub delta: f64,
    pub identity_error: f64,
    pub derivative_error: f64,
}

/// Subtracts `f(s)` from the constant coefficient so that the result vanishes at `s`.
pub fn project_to_kernel(f: &LaurentElement, s: &AnnulusPoint) -> Result<LaurentElement> {
    let v = f.evaluate(s.value());
    let c = LaurentElement::constant(v)?;
    f.sub(&c)
}

/// Checks `j(g) ≤ δ(s) j(f)`, `(z − s)g(z) = f(z)` at sample points, and `g(s) = f'(s)`.
pub fn cancellation_case(f: &LaurentElement, s: &AnnulusPoint, p: &PseudolatticeCouple, couple: &BanachCouple, points: &[Complex64]) -> Result<CancellationCase> {
    let g = cancel_divide(f, s)?;
    let j_f = j_norm(f, p, couple)?;
    let j_g = j_norm(&g, p, couple)?;
    let mut identity_error = 0.0f64;
    for &z in points {
        let gz = g.evaluate(z);
        let fz = f.evaluate(z);
        for (a, b) in gz.iter().zip(&fz) {
            identity_error = identity_error.max(((z - s.value()) * a - b).norm());
        }
    }
    let gs = g.evaluate(s.value());
    let fp = f.derivative(s.value());
    let derivative_error = gs.iter().zip(&fp).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    Ok(CancellationCase {
        j_f,
        j_g,
        delta: delta_constant(s),
        identity_error,
        derivative_error,
    })
}

/// `count` points spread over the annulus, deterministic.
pub fn annulus_sample_points(count: usize) -> Vec<Complex64> {
    (0..count)
        .map(|k| {
            let t = (k as f64 + 0.5) / count as f64;
            let r = 1.0 + (E - 1.0) * (0.05 + 0.9 * ((k * 7) % count) as f64 / count as f64);
            Complex64::from_polar(r, std::f64::consts::TAU * t)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::rng;
    use crate::spaces::complexify;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit_couple(d: usize) -> BanachCouple {
        BanachCouple::diagonal(WeightedSpace::unweighted(Exponent::Infinite, d).unwrap()).unwrap()
    }

    fn inf_pair() -> PseudolatticeCouple {
        PseudolatticeCouple::new(Exponent::Infinite, Exponent::Infinite)
    }

    #[test]
    fn delta_examples() {
        let s = AnnulusPoint::from_polar(0.5f64.exp(), 0.0).unwrap();
        assert!((delta_constant(&s) - 1.541_494_082_536_798).abs() < 1e-12);
        let mid = AnnulusPoint::from_polar((1.0 + E) / 2.0, 1.0).unwrap();
        assert!((delta_constant(&mid) - 2.0 / (E - 1.0)).abs() < 1e-14);
        let near = AnnulusPoint::from_polar(1.1, 0.0).unwrap();
        assert!((delta_constant(&near) - 10.0).abs() < 1e-12);
        assert!(AnnulusPoint::new(c(1.0, 0.0)).is_err());
        assert!(AnnulusPoint::new(c(E, 0.0)).is_err());
        // δ is minimized at the midpoint of (1, e).
        for k in 1..200 {
            let r = 1.0 + (E - 1.0) * k as f64 / 200.0;
            assert!(delta_of_modulus(r) >= 2.0 / (E - 1.0) - 1e-15);
        }
    }

    #[test]
    fn j_norm_examples() {
        let b = unit_couple(2);
        let p = inf_pair();
        assert_eq!(j_norm(&LaurentElement::zero(2), &p, &b).unwrap(), 0.0);
        let x = vec![c(1.0, 2.0), c(-0.5, 0.0)];
        let nx = b.space0.norm(&x).unwrap();
        let one = LaurentElement::constant(x.clone()).unwrap();
        assert!((j_norm(&one, &p, &b).unwrap() - nx).abs() < 1e-15);
        let two = LaurentElement::new(0, vec![x.clone(), x.clone()]).unwrap();
        assert!((j_norm(&two, &p, &b).unwrap() - E * nx).abs() < 1e-14);
        let wrong = LaurentElement::constant(vec![c(1.0, 0.0)]).unwrap();
        assert!(j_norm(&wrong, &p, &b).is_err());
    }

    #[test]
    fn evaluate_examples() {
        let s = c(1.3, 0.4);
        let x = vec![c(0.7, -0.1)];
        let b = LaurentElement::new(-1, vec![vec![-s * x[0]], x.clone()]).unwrap();
        assert!(b.evaluate(s)[0].norm() < 1e-15);
        let k = LaurentElement::constant(x.clone()).unwrap();
        assert_eq!(k.evaluate(c(2.0, 1.0)), x);
        assert!(LaurentElement::zero(1).evaluate(s)[0] == ZERO);
    }

    #[test]
    fn rotation_examples() {
        let mut r = rng(3);
        let b = random_laurent(&mut r, 2, -3, 3);
        assert_eq!(b.rotate(0.0), b);
        let cpl = unit_couple(2);
        let p = PseudolatticeCouple::new(Exponent::new(2.0).unwrap(), Exponent::new(1.0).unwrap());
        for tau in [0.1, 2.0, 5.0] {
            let rb = b.rotate(tau);
            let (j0, j1) = (j_norm(&b, &p, &cpl).unwrap(), j_norm(&rb, &p, &cpl).unwrap());
            assert!((j0 - j1).abs() <= 1e-14 * j0);
            let z = c(1.2, 0.9);
            let lhs = rb.evaluate(z);
            let rhs = b.evaluate(z * Complex64::from_polar(1.0, tau));
            for (a, bb) in lhs.iter().zip(&rhs) {
                assert!((a - bb).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn cancellation_examples() {
        let s = AnnulusPoint::new(c(1.5, 0.5)).unwrap();
        let f = LaurentElement::new(-1, vec![vec![-s.value()], vec![c(1.0, 0.0)]]).unwrap();
        let g = cancel_divide(&f, &s).unwrap();
        assert_eq!((g.lo(), g.hi()), (-1, -1));
        assert!((g.coeff(-1)[0] - c(1.0, 0.0)).norm() < 1e-15);
        let z = cancel_divide(&LaurentElement::zero(2), &s).unwrap();
        assert!(z.is_zero());
        // (z − s) z^k divides to z^k.
        for k in [-3i64, 0, 2] {
            let mono = LaurentElement::monomial(k, vec![c(0.3, 0.2)]).unwrap();
            let f = mono.mul_linear(-s.value(), c(1.0, 0.0));
            let g = cancel_divide(&f, &s).unwrap();
            assert!((g.coeff(k)[0] - c(0.3, 0.2)).norm() < 1e-14);
            for n in g.lo()..=g.hi() {
                if n != k {
                    assert!(g.coeff(n)[0].norm() < 1e-14);
                }
            }
        }
        let bad = LaurentElement::constant(vec![c(1.0, 0.0)]).unwrap();
        assert!(matches!(cancel_divide(&bad, &s), Err(LabError::Precondition(_))));
    }

    #[test]
    fn cancellation_bound_on_random_samples() {
        let mut r = rng(11);
        let cpl = BanachCouple::new(
            WeightedSpace::new(Exponent::new(2.0).unwrap(), vec![1.0, 3.0]).unwrap(),
            WeightedSpace::new(Exponent::Infinite, vec![0.5, 0.2]).unwrap(),
        )
        .unwrap();
        let pts = annulus_sample_points(16);
        for (q0, q1) in [(1.0, 2.0), (f64::INFINITY, 1.0), (2.0, 2.0)] {
            let p = PseudolatticeCouple::new(Exponent::new(q0).unwrap(), Exponent::new(q1).unwrap());
            for s in [c(0.3f64.exp(), 0.0), Complex64::from_polar(0.5f64.exp(), 0.4), c(1.1, 0.0)] {
                let s = AnnulusPoint::new(s).unwrap();
                for _ in 0..20 {
                    let f = project_to_kernel(&random_laurent(&mut r, 2, -4, 4), &s).unwrap();
                    let case = cancellation_case(&f, &s, &p, &cpl, &pts).unwrap();
                    assert!(case.j_g <= case.delta * case.j_f * (1.0 + 1e-12), "{case:?}");
                    assert!(case.identity_error <= 1e-9 * case.j_f);
                    assert!(case.derivative_error <= 1e-9 * case.j_f.max(1.0));
                }
            }
        }
    }

    #[test]
    fn single_index_window_is_exact() {
        let cpl = BanachCouple::new(
            WeightedSpace::new(Exponent::new(2.0).unwrap(), vec![1.0, 2.0]).unwrap(),
            WeightedSpace::new(Exponent::new(1.0).unwrap(), vec![3.0, 0.5]).unwrap(),
        )
        .unwrap();
        let p = inf_pair();
        let s = AnnulusPoint::new(c(1.4, 0.3)).unwrap();
        let x = vec![c(1.0, -1.0), c(0.2, 0.5)];
        let b = bspace_norm(&x, &s, &p, &cpl, (0, 0), 1e-9, None).unwrap();
        let expect = cpl.space0.norm(&x).unwrap().max(cpl.space1.norm(&x).unwrap());
        assert!((b.bracket.upper - expect).abs() < 1e-14 * expect);
        assert!(b.bracket.lower <= b.bracket.upper);
        let z = bspace_norm(&complexify(&[0.0, 0.0]), &s, &p, &cpl, (-2, 2), 1e-9, None).unwrap();
        assert_eq!(z.bracket, NormBracket::exact(0.0));
    }

    /// Oracle: dense grid over `b_{−1}, b_1 ≥ 0` for a scalar with real `s`, where
    /// `b_0 = x − b_{−1}/s − s b_1` is determined.
    #[test]
    fn three_term_window_matches_grid_search() {
        let cpl = unit_couple(1);
        let p = inf_pair();
        let s = AnnulusPoint::new(c(1.6, 0.0)).unwrap();
        let x = vec![c(1.0, 0.0)];
        let b = bspace_norm(&x, &s, &p, &cpl, (-1, 1), 1e-10, None).unwrap();
        let sv = 1.6;
        let mut best = f64::INFINITY;
        let n = 400;
        for i in 0..=n {
            for k in 0..=n {
                let bm = i as f64 / n as f64;
                let bp = 0.4 * k as f64 / n as f64;
                let b0 = 1.0 - bm / sv - sv * bp;
                let j = bm.max(b0.abs()).max(E * bp);
                best = best.min(j);
            }
        }
        let exact = 1.0 / (1.0 + 1.0 / sv + sv / E);
        assert!(best >= exact - 1e-12);
        assert!((b.bracket.upper - exact).abs() < 1e-8, "{} vs {exact}", b.bracket.upper);
        assert!(best - b.bracket.upper < 5e-3);
        assert!(b.window_lower <= b.bracket.upper);
        assert!(b.bracket.lower <= b.window_lower * (1.0 + 1e-12));
    }

    #[test]
    fn wider_windows_do_not_increase_the_upper_bracket() {
        let mut r = rng(5);
        let cpl = BanachCouple::new(
            WeightedSpace::new(Exponent::new(2.0).unwrap(), vec![1.0, 0.4]).unwrap(),
            WeightedSpace::new(Exponent::new(1.0).unwrap(), vec![0.3, 2.0]).unwrap(),
        )
        .unwrap();
        let p = PseudolatticeCouple::new(Exponent::new(2.0).unwrap(), Exponent::Infinite);
        let s = AnnulusPoint::new(Complex64::from_polar(0.5f64.exp(), 0.7)).unwrap();
        for _ in 0..5 {
            let x = crate::sampling::complex_vector(&mut r, 2);
            let mut last = f64::INFINITY;
            let mut prev: Option<LaurentElement> = None;
            for width in 0..4i64 {
                let b = bspace_norm(&x, &s, &p, &cpl, (-width, width), 1e-8, prev.as_ref()).unwrap();
                assert!(b.bracket.upper <= last * (1.0 + 1e-8), "{width}: {} > {last}", b.bracket.upper);
                let ev = b.representation.evaluate(s.value());
                for (a, bb) in ev.iter().zip(&x) {
                    assert!((a - bb).norm() < 1e-12 * bb.norm().max(1.0));
                }
                last = b.bracket.upper;
                prev = Some(b.representation);
            }
        }
    }

    #[test]
    fn transport_examples() {
        let cpl = unit_couple(2);
        let p = inf_pair();
        let s = AnnulusPoint::new(c(1.5, 0.0)).unwrap();
        let mut r = rng(9);
        let f = random_laurent(&mut r, 2, -2, 2);
        let t = transport_representation(&f, &f, &s, &s, &p, &cpl).unwrap();
        assert!(t.h.is_zero());
        assert!((t.certificate_bound - t.j_fx).abs() < 1e-15);
        let w = AnnulusPoint::new(c(1.55, 0.05)).unwrap();
        let x = f.evaluate(s.value());
        let fx = bspace_norm(&x, &s, &p, &cpl, (-2, 2), 1e-8, Some(&f)).unwrap().representation;
        let t = transport_representation(&f, &fx, &s, &w, &p, &cpl).unwrap();
        assert!(t.certificate_holds(0.0));
        let fw = f.evaluate(w.value());
        for (a, b) in t.representation.evaluate(w.value()).iter().zip(&fw) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn probe_at_zero_displacement() {
        let cpl = unit_couple(2);
        let p = inf_pair();
        let s = AnnulusPoint::new(c(1.5, 0.2)).unwrap();
        let cfg = ProbeConfig { samples: 8, support: (-2, 2), ..Default::default() };
        let rep = kernel_distance_probe(&p, &cpl, &s, &s, &cfg).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert_eq!(rep.diagnostics["empirical_distance_lower"], 0.0);
    }
}
