//! The K-functional `K(t, x; X_0, X_1) = inf { ‖x_0‖_0 + t‖x_1‖_1 : x = x_0 + x_1 }`.
//!
//! Because both spaces are solid, an optimal split can be taken coordinatewise
//! between `0` and `x`: `x_0 = a ⊙ x` with `a ∈ [0, 1]^d`. The search therefore
//! runs over the magnitudes `u = |x_0| ∈ [0, |x|]`. Lower bounds come from the
//! duality `K(t, x) ≥ <|x|, y> / max(‖y‖_{X_0^*}, ‖y‖_{X_1^*}/t)` for `y ≥ 0`,
//! evaluated at gradients of the two norms at the current split.

use num_complex::Complex64;
use serde::Serialize;

use crate::convex::{ellipsoid_minimize, golden_section, EllipsoidOptions};
use crate::error::{check_dim, LabError, Result};
use crate::spaces::{BanachCouple, Exponent, WeightedSpace};

/// Default relative gap for K evaluations.
pub const DEFAULT_K_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KMethod {
    /// Zero vector, one dimension, or `p_0 = p_1 = 1`.
    ClosedForm,
    /// Both exponents in `{1, ∞}`: exact scan over the breakpoints of a
    /// piecewise-linear convex function of the level `m`.
    BreakpointScan,
    /// One exponent infinite: one-dimensional convex search over the level.
    LevelSearch,
    /// General case: ellipsoid method.
    Ellipsoid,
}

/// One evaluation of the K-functional with its certificate.
#[derive(Debug, Clone, Serialize)]
pub struct KEvaluation {
    pub t: f64,
    /// Certified lower bound.
    pub value: f64,
    /// `‖x_0‖_0 + t‖x_1‖_1 − value` for the returned split.
    pub gap: f64,
    #[serde(skip)]
    pub splitter: (Vec<Complex64>, Vec<Complex64>),
    /// `‖x_0‖_0` and `‖x_1‖_1` of the returned split. The line
    /// `τ ↦ split_norms.0 + τ·split_norms.1` bounds `K(τ, x)` from above for every `τ`.
    pub split_norms: (f64, f64),
    pub method: KMethod,
}

impl KEvaluation {
    pub fn lower(&self) -> f64 {
        self.value
    }

    pub fn upper(&self) -> f64 {
        self.value + self.gap
    }
}

/// Result of the magnitude-level solver.
#[derive(Debug, Clone)]
pub(crate) struct MagnitudeSplit {
    pub u: Vec<f64>,
    pub lower: f64,
    pub upper: f64,
    pub norms: (f64, f64),
    pub method: KMethod,
    pub converged: bool,
    pub iterations: usize,
}

fn split_objective(r: &[f64], u: &[f64], couple: &BanachCouple) -> (f64, f64) {
    let v: Vec<f64> = r.iter().zip(u).map(|(a, b)| (a - b).abs()).collect();
    let n0 = couple.space0.norm_abs(u);
    let n1 = couple.space1.norm_abs(&v);
    (n0, n1)
}

/// Maps an arbitrary real vector onto the order interval `[0, r]` without
/// increasing the objective.
fn clamp_split(r: &[f64], u: &[f64]) -> Vec<f64> {
    r.iter().zip(u).map(|(ri, ui)| ui.abs().min(*ri)).collect()
}

fn dual_bound(t: f64, r: &[f64], y: &[f64], couple: &BanachCouple) -> f64 {
    let pairing: f64 = r.iter().zip(y).map(|(a, b)| a * b).sum();
    if pairing <= 0.0 {
        return 0.0;
    }
    let denom = couple.space0.dual_norm_abs(y).max(couple.space1.dual_norm_abs(y) / t);
    if denom > 0.0 && denom.is_finite() {
        pairing / denom
    } else {
        0.0
    }
}

/// Best dual lower bound built from the norm gradients at the split `u`.
fn certify(t: f64, r: &[f64], u: &[f64], couple: &BanachCouple) -> f64 {
    let u = clamp_split(r, u);
    let v: Vec<f64> = r.iter().zip(&u).map(|(a, b)| (a - b).max(0.0)).collect();
    let ya = couple.space0.norm_gradient_abs(&u);
    let yb: Vec<f64> = couple.space1.norm_gradient_abs(&v).iter().map(|g| t * g).collect();
    let mut best = 0.0f64;
    for lambda in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let y: Vec<f64> = ya.iter().zip(&yb).map(|(a, b)| (1.0 - lambda) * a + lambda * b).collect();
        best = best.max(dual_bound(t, r, &y, couple));
    }
    // The extreme splits `u = 0` and `u = r` have their own natural functionals.
    best = best.max(dual_bound(t, r, &couple.space1.norm_gradient_abs(r).iter().map(|g| t * g).collect::<Vec<_>>(), couple));
    best = best.max(dual_bound(t, r, &couple.space0.norm_gradient_abs(r), couple));
    best
}

fn finish(t: f64, r: &[f64], u: Vec<f64>, lower: f64, method: KMethod, couple: &BanachCouple) -> MagnitudeSplit {
    let u = clamp_split(r, &u);
    let (n0, n1) = split_objective(r, &u, couple);
    let upper = n0 + t * n1;
    let lower = if method == KMethod::Ellipsoid || method == KMethod::LevelSearch {
        lower.min(upper)
    } else {
        upper
    };
    MagnitudeSplit {
        u,
        lower,
        upper,
        norms: (n0, n1),
        method,
        converged: true,
        iterations: 0,
    }
}

/// Minimizes `coef_level·m + coef_other·N((r − m/lw)_+)` over `m ≥ 0` for a
/// polyhedral `N` (exponent 1 or ∞) by scanning candidate breakpoints.
fn breakpoint_scan(r: &[f64], lw: &[f64], coef_level: f64, other: &WeightedSpace, coef_other: f64) -> f64 {
    let d = r.len();
    let mut candidates: Vec<f64> = vec![0.0];
    for i in 0..d {
        candidates.push(lw[i] * r[i]);
    }
    if other.p.is_infinite() {
        let w = &other.weights;
        for i in 0..d {
            for j in (i + 1)..d {
                let slope = w[i] / lw[i] - w[j] / lw[j];
                if slope != 0.0 {
                    let m = (w[i] * r[i] - w[j] * r[j]) / slope;
                    if m > 0.0 && m.is_finite() {
                        candidates.push(m);
                    }
                }
            }
        }
    }
    let phi = |m: f64| {
        let rest: Vec<f64> = r.iter().zip(lw).map(|(ri, li)| (ri - m / li).max(0.0)).collect();
        coef_level * m + coef_other * other.norm_abs(&rest)
    };
    let mut best = (0.0, f64::INFINITY);
    for m in candidates {
        let v = phi(m);
        if v < best.1 {
            best = (m, v);
        }
    }
    best.0
}

/// Solves the magnitude problem. `warm` is an optional starting split. The
/// returned bracket is always valid; `converged` reports whether its relative
/// width reached `tol`.
pub(crate) fn solve_magnitudes(
    t: f64,
    r: &[f64],
    couple: &BanachCouple,
    tol: f64,
    warm: Option<&[f64]>,
) -> MagnitudeSplit {
    let d = r.len();
    let (s0, s1) = (&couple.space0, &couple.space1);
    if r.iter().all(|&v| v == 0.0) {
        return finish(t, r, vec![0.0; d], 0.0, KMethod::ClosedForm, couple);
    }
    if d == 1 {
        let u = if s0.weights[0] <= t * s1.weights[0] { r.to_vec() } else { vec![0.0] };
        return finish(t, r, u, 0.0, KMethod::ClosedForm, couple);
    }
    if s0.p.is_one() && s1.p.is_one() {
        let u = (0..d)
            .map(|i| if s0.weights[i] <= t * s1.weights[i] { r[i] } else { 0.0 })
            .collect();
        return finish(t, r, u, 0.0, KMethod::ClosedForm, couple);
    }
    let polyhedral = |p: Exponent| p.is_one() || p.is_infinite();
    if s1.p.is_infinite() && polyhedral(s0.p) {
        let m = breakpoint_scan(r, &s1.weights, t, s0, 1.0);
        let u = r.iter().zip(&s1.weights).map(|(ri, wi)| (ri - m / wi).max(0.0)).collect();
        return finish(t, r, u, 0.0, KMethod::BreakpointScan, couple);
    }
    if s0.p.is_infinite() && polyhedral(s1.p) {
        let m = breakpoint_scan(r, &s0.weights, 1.0, s1, t);
        let u = r.iter().zip(&s0.weights).map(|(ri, wi)| ri.min(m / wi)).collect();
        return finish(t, r, u, 0.0, KMethod::BreakpointScan, couple);
    }

    let target = |lower: f64, upper: f64| upper - lower <= tol * upper.abs().max(f64::MIN_POSITIVE);

    if s1.p.is_infinite() || s0.p.is_infinite() {
        let u = if s1.p.is_infinite() {
            let top = r.iter().zip(&s1.weights).map(|(a, w)| a * w).fold(0.0, f64::max);
            let phi = |m: f64| {
                let rest: Vec<f64> = r.iter().zip(&s1.weights).map(|(ri, wi)| (ri - m / wi).max(0.0)).collect();
                t * m + s0.norm_abs(&rest)
            };
            let (m, _) = golden_section(phi, 0.0, top, 1e-15);
            r.iter().zip(&s1.weights).map(|(ri, wi)| (ri - m / wi).max(0.0)).collect::<Vec<_>>()
        } else {
            let top = r.iter().zip(&s0.weights).map(|(a, w)| a * w).fold(0.0, f64::max);
            let psi = |m: f64| {
                let rest: Vec<f64> = r.iter().zip(&s0.weights).map(|(ri, wi)| (ri - m / wi).max(0.0)).collect();
                m + t * s1.norm_abs(&rest)
            };
            let (m, _) = golden_section(psi, 0.0, top, 1e-15);
            r.iter().zip(&s0.weights).map(|(ri, wi)| ri.min(m / wi)).collect::<Vec<_>>()
        };
        let lower = certify(t, r, &u, couple);
        let sol = finish(t, r, u, lower, KMethod::LevelSearch, couple);
        if target(sol.lower, sol.upper) {
            return sol;
        }
    }

    let objective = |x: &[f64]| {
        let v: Vec<f64> = r.iter().zip(x).map(|(a, b)| a - b).collect();
        let au: Vec<f64> = x.iter().map(|a| a.abs()).collect();
        let av: Vec<f64> = v.iter().map(|a| a.abs()).collect();
        let n0 = s0.norm_abs(&au);
        let n1 = s1.norm_abs(&av);
        let g0 = s0.norm_gradient_abs(&au);
        let g1 = s1.norm_gradient_abs(&av);
        let g = (0..d)
            .map(|i| sign(x[i]) * g0[i] - t * sign(v[i]) * g1[i])
            .collect();
        (n0 + t * n1, g)
    };
    let cert = |x: &[f64]| certify(t, r, x, couple);
    let r_norm = r.iter().map(|a| a * a).sum::<f64>().sqrt();
    let opts = EllipsoidOptions {
        rel_tol: tol,
        abs_tol: 0.0,
        max_iterations: 60_000,
        ball_contains_minimizer: false,
        certify_every: 10,
    };
    if let Some(w) = warm {
        if w.len() == d {
            let small = EllipsoidOptions { max_iterations: 4_000, ..opts };
            let out = ellipsoid_minimize(objective, cert, w, 0.05 * r_norm, &small);
            let sol = finish(t, r, out.x, out.lower, KMethod::Ellipsoid, couple);
            if target(sol.lower, sol.upper) {
                return sol;
            }
        }
    }
    let center: Vec<f64> = r.iter().map(|a| 0.5 * a).collect();
    let full = EllipsoidOptions { ball_contains_minimizer: true, ..opts };
    let out = ellipsoid_minimize(objective, cert, &center, 0.5 * r_norm * (1.0 + 1e-9) + f64::MIN_POSITIVE, &full);
    let iterations = out.iterations;
    let mut sol = finish(t, r, out.x, out.lower, KMethod::Ellipsoid, couple);
    sol.converged = target(sol.lower, sol.upper);
    sol.iterations = iterations;
    sol
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn validate(t: f64, x: &[Complex64], couple: &BanachCouple, tol: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(LabError::Input(format!("t must be positive and finite, got {t}")));
    }
    if !(tol > 0.0) {
        return Err(LabError::Input(format!("tolerance must be positive, got {tol}")));
    }
    check_dim(couple.dim(), x.len())
}

/// Evaluates `K(t, x; X_0, X_1)` with a certified relative gap `≤ tol`.
pub fn k_functional(t: f64, x: &[Complex64], couple: &BanachCouple, tol: f64) -> Result<KEvaluation> {
    validate(t, x, couple, tol)?;
    let r: Vec<f64> = x.iter().map(|z| z.norm()).collect();
    let sol = solve_magnitudes(t, &r, couple, tol, None);
    if !sol.converged {
        return Err(LabError::Solver {
            lower: sol.lower,
            upper: sol.upper,
            iterations: sol.iterations,
        });
    }
    Ok(to_evaluation(t, x, &r, sol))
}

pub(crate) fn to_evaluation(t: f64, x: &[Complex64], r: &[f64], sol: MagnitudeSplit) -> KEvaluation {
    let x0: Vec<Complex64> = x
        .iter()
        .zip(r)
        .zip(&sol.u)
        .map(|((z, ri), ui)| if *ri > 0.0 { *z * (ui / ri) } else { Complex64::new(0.0, 0.0) })
        .collect();
    let x1: Vec<Complex64> = x.iter().zip(&x0).map(|(a, b)| a - b).collect();
    KEvaluation {
        t,
        value: sol.lower,
        gap: (sol.upper - sol.lower).max(0.0),
        splitter: (x0, x1),
        split_norms: sol.norms,
        method: sol.method,
    }
}

/// Exact K-functional for `p_0 = p_1 = 1`: `Σ_i |x_i| min(w0_i, t·w1_i)`.
pub fn k_closed_form_l1(t: f64, x: &[Complex64], couple: &BanachCouple) -> Result<f64> {
    if !(couple.space0.p.is_one() && couple.space1.p.is_one()) {
        return Err(LabError::Input("closed-form K requires both exponents equal to 1".into()));
    }
    validate(t, x, couple, 1.0)?;
    Ok(x
        .iter()
        .zip(couple.space0.weights.iter().zip(&couple.space1.weights))
        .map(|(z, (w0, w1))| z.norm() * w0.min(t * w1))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::complexify;

    fn couple(p0: f64, w0: &[f64], p1: f64, w1: &[f64]) -> BanachCouple {
        BanachCouple::new(
            WeightedSpace::new(Exponent::new(p0).unwrap(), w0.to_vec()).unwrap(),
            WeightedSpace::new(Exponent::new(p1).unwrap(), w1.to_vec()).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn zero_vector_has_zero_k() {
        let c = couple(2.0, &[1.0, 2.0], 4.0, &[3.0, 1.0]);
        let k = k_functional(0.7, &complexify(&[0.0, 0.0]), &c, 1e-8).unwrap();
        assert_eq!(k.value, 0.0);
        assert_eq!(k.gap, 0.0);
    }

    #[test]
    fn equal_spaces_give_min_one_t() {
        let c = couple(1.0, &[1.0, 1.0], 1.0, &[1.0, 1.0]);
        let k = k_functional(1.0, &complexify(&[1.0, 1.0]), &c, 1e-8).unwrap();
        assert!((k.value - 2.0).abs() < 1e-15);
        let c = couple(2.0, &[1.0, 3.0], 2.0, &[1.0, 3.0]);
        for t in [0.1, 1.0, 7.0] {
            let x = complexify(&[0.5, -1.5]);
            let n = c.space0.norm(&x).unwrap();
            let k = k_functional(t, &x, &c, 1e-10).unwrap();
            assert!(k.lower() <= t.min(1.0) * n + 1e-12 && k.upper() >= t.min(1.0) * n - 1e-12);
            assert!(k.gap <= 1e-9 * n);
        }
    }

    #[test]
    fn l1_example_from_closed_form() {
        let c = couple(1.0, &[1.0, 1.0], 1.0, &[3.0, 0.5]);
        let x = complexify(&[1.0, 2.0]);
        assert!((k_functional(1.0, &x, &c, 1e-8).unwrap().value - 2.0).abs() < 1e-15);
        assert!((k_closed_form_l1(1.0, &x, &c).unwrap() - 2.0).abs() < 1e-15);
        let c2 = couple(1.0, &[2.0, 1.0], 1.0, &[1.0, 1.0]);
        assert_eq!(k_closed_form_l1(1.0, &complexify(&[1.0, 0.0]), &c2).unwrap(), 1.0);
        let c3 = couple(1.0, &[1.0, 1.0], 1.0, &[1.0, 1.0]);
        assert_eq!(k_closed_form_l1(1e6, &complexify(&[1.0, 1.0]), &c3).unwrap(), 2.0);
        assert!(k_closed_form_l1(1.0, &x, &couple(2.0, &[1.0, 1.0], 1.0, &[1.0, 1.0])).is_err());
    }

    #[test]
    fn splitter_reproduces_upper_value() {
        let c = couple(1.5, &[1.0, 0.2, 3.0], 2.0, &[0.5, 2.0, 1.0]);
        let x = vec![Complex64::new(1.0, 1.0), Complex64::new(-0.3, 0.2), Complex64::new(0.0, 2.0)];
        let k = k_functional(0.8, &x, &c, 1e-9).unwrap();
        let (x0, x1) = &k.splitter;
        let obj = c.space0.norm(x0).unwrap() + 0.8 * c.space1.norm(x1).unwrap();
        assert!(obj >= k.value - 1e-12);
        assert!(obj <= k.value + k.gap + 1e-12);
        for i in 0..3 {
            assert!((x0[i] + x1[i] - x[i]).norm() < 1e-14);
        }
        assert!(k.gap <= 1e-9 * k.upper());
    }

    #[test]
    fn mixed_polyhedral_exponents_are_exact() {
        // p0 = 1, p1 = ∞ and the reverse against a dense level scan.
        let x = complexify(&[1.0, 2.0, 0.5]);
        for (p0, p1) in [(1.0, f64::INFINITY), (f64::INFINITY, 1.0), (f64::INFINITY, f64::INFINITY)] {
            let c = couple(p0, &[1.0, 0.3, 2.0], p1, &[0.7, 1.5, 0.4]);
            let k = k_functional(0.9, &x, &c, 1e-10).unwrap();
            assert_eq!(k.method, KMethod::BreakpointScan);
            let mut best = f64::INFINITY;
            let n = 60;
            for a in 0..=n {
                for b in 0..=n {
                    for e in 0..=n {
                        let u = [a as f64 / n as f64 * 1.0, b as f64 / n as f64 * 2.0, e as f64 / n as f64 * 0.5];
                        let v = [1.0 - u[0], 2.0 - u[1], 0.5 - u[2]];
                        best = best.min(c.space0.norm_abs(&u) + 0.9 * c.space1.norm_abs(&v));
                    }
                }
            }
            assert!(k.value <= best + 1e-12, "{p0} {p1}: {} vs {best}", k.value);
            assert!(k.value >= best - 0.05);
        }
    }

    /// Oracle: exhaustive grid over splits `u ∈ [0, |x|]` (phase-aligned), refined
    /// once around the best cell.
    fn brute_force(t: f64, r: &[f64], c: &BanachCouple) -> f64 {
        let d = r.len();
        let mut lo = vec![0.0; d];
        let mut hi = r.to_vec();
        let mut best = f64::INFINITY;
        for _ in 0..4 {
            let n = if d == 3 { 40 } else { 200 };
            let mut best_u = lo.clone();
            let total = (n + 1usize).pow(d as u32);
            for idx in 0..total {
                let mut k = idx;
                let mut u = vec![0.0; d];
                for i in 0..d {
                    u[i] = lo[i] + (hi[i] - lo[i]) * (k % (n + 1)) as f64 / n as f64;
                    k /= n + 1;
                }
                let v: Vec<f64> = r.iter().zip(&u).map(|(a, b)| a - b).collect();
                let f = c.space0.norm_abs(&u) + t * c.space1.norm_abs(&v);
                if f < best {
                    best = f;
                    best_u = u;
                }
            }
            for i in 0..d {
                let h = 2.0 * (hi[i] - lo[i]) / n as f64;
                lo[i] = (best_u[i] - h).max(0.0);
                hi[i] = (best_u[i] + h).min(r[i]);
            }
        }
        best
    }

    #[test]
    fn general_exponents_match_brute_force() {
        let cases = [
            (1.5, 2.0, vec![1.0, 0.3], vec![0.4, 2.0], vec![1.0, -2.0]),
            (4.0, 1.0, vec![2.0, 1.0, 0.5], vec![1.0, 3.0, 0.2], vec![0.5, 1.0, 2.0]),
            (2.0, f64::INFINITY, vec![1.0, 1.0, 3.0], vec![0.7, 2.0, 1.0], vec![1.0, 1.0, -1.0]),
            (f64::INFINITY, 1.5, vec![0.2, 5.0], vec![1.0, 1.0], vec![3.0, 0.1]),
            (2.0, 2.0, vec![1.0, 4.0, 0.5], vec![2.0, 0.5, 1.0], vec![0.2, 0.7, -1.1]),
        ];
        for (p0, p1, w0, w1, x) in cases {
            let c = couple(p0, &w0, p1, &w1);
            let r: Vec<f64> = x.iter().map(|v: &f64| v.abs()).collect();
            for t in [0.05, 0.6, 1.0, 3.0, 40.0] {
                let k = k_functional(t, &complexify(&x), &c, 1e-8).unwrap();
                let b = brute_force(t, &r, &c);
                assert!(k.lower() <= b + 1e-12, "{p0} {p1} t={t}: {} > {b}", k.lower());
                assert!((k.upper() - b).abs() < 1e-4, "{p0} {p1} t={t}: {} vs {b}", k.upper());
                assert!(k.gap <= 1e-8 * k.upper() + 1e-300);
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn exponent() -> impl Strategy<Value = f64> {
            prop_oneof![Just(1.0), Just(1.5), Just(2.0), Just(4.0), Just(f64::INFINITY)]
        }

        fn instance() -> impl Strategy<Value = (BanachCouple, Vec<Complex64>)> {
            (1usize..=3).prop_flat_map(|d| {
                (
                    exponent(),
                    exponent(),
                    prop::collection::vec(-2.0f64..2.0, d),
                    prop::collection::vec(-2.0f64..2.0, d),
                    prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), d),
                )
                    .prop_map(|(p0, p1, l0, l1, x)| {
                        let w0: Vec<f64> = l0.iter().map(|v| v.exp()).collect();
                        let w1: Vec<f64> = l1.iter().map(|v| v.exp()).collect();
                        let x = x.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
                        (couple(p0, &w0, p1, &w1), x)
                    })
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn monotone_and_concave_in_t((c, x) in instance(), t1 in 0.01f64..10.0, ratio in 1.0f64..20.0) {
                let t2 = t1 * ratio;
                let k1 = k_functional(t1, &x, &c, 1e-9).unwrap();
                let k2 = k_functional(t2, &x, &c, 1e-9).unwrap();
                prop_assert!(k1.lower() <= k2.upper() * (1.0 + 1e-12));
                prop_assert!(k2.lower() / t2 <= k1.upper() / t1 * (1.0 + 1e-12));
                let n0 = c.space0.norm(&x).unwrap();
                let n1 = c.space1.norm(&x).unwrap();
                prop_assert!(k1.lower() >= 0.0);
                prop_assert!(k1.lower() <= n0.min(t1 * n1) * (1.0 + 1e-12));
            }

            #[test]
            fn absolutely_homogeneous((c, x) in instance(), t in 0.01f64..10.0, re in -3.0f64..3.0, im in -3.0f64..3.0) {
                let alpha = Complex64::new(re, im);
                let k = k_functional(t, &x, &c, 1e-9).unwrap();
                let ax: Vec<Complex64> = x.iter().map(|z| alpha * z).collect();
                let ka = k_functional(t, &ax, &c, 1e-9).unwrap();
                let a = alpha.norm();
                prop_assert!(ka.lower() <= a * k.upper() * (1.0 + 1e-12) + 1e-300);
                prop_assert!(a * k.lower() <= ka.upper() * (1.0 + 1e-12) + 1e-300);
            }
        }
    }
}
