//! Quantitative stability of invertibility along an interpolation scale.

use std::f64::consts::E;

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::ckmr::{cancel_divide, delta_constant, delta_of_modulus, j_norm, AnnulusPoint, LaurentElement, PseudolatticeCouple};
use crate::error::{check_dim, LabError, Result};
use crate::functors::{calderon_space_unchecked, intersection_norm, real_norm, sum_norm, FamilyKind, NormBracket, QuadratureConfig};
use crate::operators::{invert_matrix, CoupleOperator, Matrix};
use crate::spaces::{BanachCouple, Exponent};
use crate::verdict::CheckReport;

/// `η(θ) = max{(e^θ − 1)^{−1}, (e − e^θ)^{−1}}`.
pub fn eta(theta: f64) -> f64 {
    delta_of_modulus(theta.exp())
}

/// `r = [2δ(s)(1 + ‖T‖‖T_s^{−1}‖)]^{−1}`.
pub fn annulus_radius(delta: f64, op_norm: f64, inv_norm: f64) -> f64 {
    1.0 / (2.0 * delta * (1.0 + op_norm * inv_norm))
}

/// `ε = [2e η(θ*)(1 + ‖T‖‖T_{θ*}^{−1}‖)]^{−1}`.
pub fn theta_radius(theta_star: f64, op_norm: f64, inv_norm: f64) -> f64 {
    1.0 / (2.0 * E * eta(theta_star) * (1.0 + op_norm * inv_norm))
}

/// Where a neighbourhood of invertibility is centred.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasePoint {
    /// A point of the annulus; the inverse is measured at `θ = ln|s|`.
    Annulus { re: f64, im: f64 },
    Theta(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityBound {
    pub base: BasePoint,
    /// `δ(s)` or `η(θ*)`.
    pub delta_or_eta: f64,
    pub op_norm: f64,
    pub inv_norm: f64,
    pub radius: f64,
}

/// Radius of the guaranteed neighbourhood of invertibility, from upper
/// brackets of `‖T‖_{X⃗→Y⃗}` and of the inverse at the base point.
pub fn stability_radius(t: &CoupleOperator, family: FamilyKind, base: BasePoint) -> Result<StabilityBound> {
    let theta = match base {
        BasePoint::Annulus { re, im } => AnnulusPoint::new(Complex64::new(re, im))?.modulus().ln(),
        BasePoint::Theta(th) => th,
    };
    let kind = family.at(theta);
    kind.validate()?;
    let gate = t.gate();
    if !gate.invertible {
        return Err(LabError::NotInvertible {
            smallest_singular_value: gate.smallest_singular_value,
            largest_singular_value: gate.largest_singular_value,
        });
    }
    let op_norm = t.couple_norm().upper;
    let inv_norm = t.interpolated_inverse_norm(kind)?.upper();
    let (delta_or_eta, radius) = match base {
        BasePoint::Annulus { re, im } => {
            let d = delta_constant(&AnnulusPoint::new(Complex64::new(re, im))?);
            (d, annulus_radius(d, op_norm, inv_norm))
        }
        BasePoint::Theta(th) => (eta(th), theta_radius(th, op_norm, inv_norm)),
    };
    Ok(StabilityBound {
        base,
        delta_or_eta,
        op_norm,
        inv_norm,
        radius,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub theta: f64,
    pub invertible: bool,
    pub norm: NormBracket,
    pub inverse_norm: Option<NormBracket>,
    /// `ε(θ)` when invertible.
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub family: FamilyKind,
    pub points: Vec<SweepPoint>,
    /// Maximal open intervals of invertibility at grid resolution.
    pub intervals: Vec<(f64, f64)>,
    pub verdicts: Vec<CheckReport>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }
}

/// Invertibility of `T_θ` over `grid`, with the FACTOR2 and RADIUS verdicts:
/// every grid `θ` with `|θ − θ*| < ε(θ*)` is invertible and satisfies
/// `‖T_θ^{−1}‖ ≤ 2‖T_{θ*}^{−1}‖(1 + slack)` (upper brackets on both sides).
pub fn sweep(t: &CoupleOperator, family: FamilyKind, grid: &[f64], slack: f64) -> Result<SweepReport> {
    if grid.is_empty() {
        return Err(LabError::Input("theta grid is empty".into()));
    }
    for (i, th) in grid.iter().enumerate() {
        if !(*th > 0.0 && *th < 1.0) {
            return Err(LabError::Input(format!("grid[{i}] = {th} is outside (0, 1)")));
        }
        if i > 0 && grid[i - 1] >= *th {
            return Err(LabError::Input(format!("grid must be strictly increasing at index {i}")));
        }
    }
    let gate = t.gate();
    let op_norm = t.couple_norm().upper;
    let points: Vec<SweepPoint> = grid
        .par_iter()
        .map(|&theta| -> Result<SweepPoint> {
            let kind = family.at(theta);
            let norm = t.interpolated_norm(kind)?.bracket;
            if !gate.invertible {
                return Ok(SweepPoint {
                    theta,
                    invertible: false,
                    norm,
                    inverse_norm: None,
                    epsilon: None,
                });
            }
            let inv = t.interpolated_inverse_norm(kind)?.bracket;
            let finite = inv.upper.is_finite();
            Ok(SweepPoint {
                theta,
                invertible: finite,
                norm,
                inverse_norm: Some(inv),
                epsilon: finite.then(|| theta_radius(theta, op_norm, inv.upper)),
            })
        })
        .collect::<Result<_>>()?;

    let intervals = invertibility_intervals(&points);
    let mut factor2 = CheckReport::new("FACTOR2");
    let mut radius = CheckReport::new("RADIUS");
    for base in &points {
        let (Some(eps), Some(base_inv)) = (base.epsilon, base.inverse_norm) else {
            continue;
        };
        for p in &points {
            if (p.theta - base.theta).abs() >= eps {
                continue;
            }
            radius.record(p.invertible, || json!({"theta_star": base.theta, "theta": p.theta, "epsilon": eps}));
            if let Some(inv) = p.inverse_norm {
                let limit = 2.0 * base_inv.upper * (1.0 + slack);
                factor2.record(inv.upper <= limit, || {
                    json!({"theta_star": base.theta, "theta": p.theta, "inverse_norm": inv.upper, "limit": limit})
                });
            }
        }
        radius.diagnostic_min("min_epsilon", eps);
        radius.diagnostic_max("max_epsilon", eps);
    }
    Ok(SweepReport {
        family,
        points,
        intervals,
        verdicts: vec![factor2, radius],
    })
}

/// Runs of invertible grid points, extended to the neighbouring failures (or
/// the ends of `(0, 1)`), which stay excluded.
fn invertibility_intervals(points: &[SweepPoint]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < points.len() {
        if !points[i].invertible {
            i += 1;
            continue;
        }
        let start = i;
        while i < points.len() && points[i].invertible {
            i += 1;
        }
        let left = if start == 0 { 0.0 } else { points[start - 1].theta };
        let right = if i == points.len() { 1.0 } else { points[i].theta };
        out.push((left, right));
    }
    out
}

fn family_space_norm(x: &[Complex64], couple: &BanachCouple, family: FamilyKind, theta: f64, cfg: &QuadratureConfig) -> Result<NormBracket> {
    match family {
        FamilyKind::Calderon => Ok(NormBracket::exact(calderon_space_unchecked(couple, theta).norm(x)?)),
        FamilyKind::Real { q } => real_norm(x, couple, theta, q, cfg),
    }
}

/// Inverses at `θ_0` and `θ_1` agree on the samples, and are bounded for the
/// intersection norms (and, for Calderón spaces, the sum norms) of the two
/// interpolation spaces by the larger of the two inverse norms.
pub fn check_inverse_compatibility(
    t: &CoupleOperator,
    theta0: f64,
    theta1: f64,
    family: FamilyKind,
    samples: &[Vec<Complex64>],
    cfg: &QuadratureConfig,
) -> Result<CheckReport> {
    let gate = t.gate();
    if !gate.invertible {
        return Err(LabError::NotInvertible {
            smallest_singular_value: gate.smallest_singular_value,
            largest_singular_value: gate.largest_singular_value,
        });
    }
    let inv0 = t.interpolated_inverse_norm(family.at(theta0))?.upper();
    let inv1 = t.interpolated_inverse_norm(family.at(theta1))?.upper();
    let bound = inv0.max(inv1);
    let inverse = invert_matrix(t.matrix())?;
    let (x_couple, y_couple) = (t.domain(), t.codomain());
    let mut report = CheckReport::new("inverse-compatibility");
    report.diagnostic("inverse_norm_bound", bound);
    for (k, y) in samples.iter().enumerate() {
        check_dim(y_couple.dim(), y.len())?;
        let yv = DVector::from_column_slice(y);
        let x0 = &inverse * &yv;
        let x1 = &inverse * &yv;
        report.record(x0 == x1, || json!({"sample": k}));

        let x: Vec<Complex64> = x0.iter().copied().collect();
        let lhs = family_space_norm(&x, x_couple, family, theta0, cfg)?
            .lower
            .max(family_space_norm(&x, x_couple, family, theta1, cfg)?.lower);
        let rhs = family_space_norm(y, y_couple, family, theta0, cfg)?
            .upper
            .max(family_space_norm(y, y_couple, family, theta1, cfg)?.upper);
        report.record(lhs <= bound * rhs * (1.0 + 1e-12), || {
            json!({"sample": k, "intersection_lhs": lhs, "intersection_rhs": bound * rhs})
        });

        if family == FamilyKind::Calderon {
            let (xa, xb) = (calderon_space_unchecked(x_couple, theta0), calderon_space_unchecked(x_couple, theta1));
            let (ya, yb) = (calderon_space_unchecked(y_couple, theta0), calderon_space_unchecked(y_couple, theta1));
            debug_assert!((intersection_norm(&x, &xa, &xb)? - lhs).abs() <= 1e-12 * lhs.max(1.0));
            let sx = sum_norm(&x, &xa, &xb, 1e-9)?;
            let sy = sum_norm(y, &ya, &yb, 1e-9)?;
            report.record(sx.lower <= bound * sy.upper * (1.0 + 1e-12), || {
                json!({"sample": k, "sum_lhs": sx.lower, "sum_rhs": bound * sy.upper})
            });
        }
    }
    Ok(report)
}

/// Invertibility at the real parameters `(θ*, q)` given invertibility at the
/// Calderón parameter `θ*`, with the ratios `‖T^{−1}‖_{θ*,q} / ‖T^{−1}‖_{[θ*]}`.
pub fn complex_to_real_transfer(t: &CoupleOperator, theta_star: f64, qs: &[Exponent]) -> Result<CheckReport> {
    let gate = t.gate();
    if !gate.invertible {
        return Err(LabError::NotInvertible {
            smallest_singular_value: gate.smallest_singular_value,
            largest_singular_value: gate.largest_singular_value,
        });
    }
    let complex = t.interpolated_inverse_norm(FamilyKind::Calderon.at(theta_star))?.bracket;
    let mut report = CheckReport::new("complex-to-real");
    report.diagnostic("calderon_inverse_norm_upper", complex.upper);
    for &q in qs {
        let real = t.interpolated_inverse_norm(FamilyKind::Real { q }.at(theta_star))?.bracket;
        report.record(real.upper.is_finite(), || json!({"q": q, "bracket": real}));
        report.diagnostic(format!("ratio_q_{q}_upper"), real.upper / complex.lower.max(f64::MIN_POSITIVE));
        report.diagnostic(format!("ratio_q_{q}_lower"), real.lower / complex.upper);
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticSolverConfig {
    /// Must exceed `‖T_s^{−1}‖`; defaults to a slight enlargement of its upper bracket.
    pub c1: Option<f64>,
    /// Defaults to `4(1 + c1‖T̃‖)δ(s)`.
    pub c: Option<f64>,
    pub max_terms: usize,
    pub targets: Vec<Complex64>,
    pub residual_tol: f64,
    pub pseudolattice: PseudolatticeCouple,
}

impl Default for AnalyticSolverConfig {
    fn default() -> Self {
        AnalyticSolverConfig {
            c1: None,
            c: None,
            max_terms: 30,
            targets: Vec::new(),
            residual_tol: 1e-10,
            pseudolattice: PseudolatticeCouple::new(Exponent::Infinite, Exponent::Infinite),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesTerm {
    pub n: usize,
    pub j_g: f64,
    pub j_h: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TargetReport {
    pub omega: Complex64,
    /// `j_norm(T G_m + (ω − z) H_m − k)` for `m = 0, 1, …`.
    pub residuals: Vec<f64>,
    /// `g̃_m(ω) = Σ_{n ≤ m} g_n (ω − s)^n` at the last term.
    pub g_tilde: Vec<Complex64>,
    /// `max_i |g̃_m(ω)_i − (T^{−1} k(ω))_i|`.
    pub consistency_error: f64,
    /// First `m` with residual below tolerance.
    pub terms_to_tolerance: Option<usize>,
    /// `ρ|ω − s| < 1` with `ρ` the measured growth rate of `j_norm(h_n)`.
    pub within_measured_radius: bool,
    /// `residual_m ≤ j(h_0)/ρ · (ρ|ω−s|)^{m+1}` up to rounding, for every `m`.
    pub decay_bound_holds: bool,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyticSeries {
    pub s: Complex64,
    pub c1: f64,
    pub c: f64,
    /// `1/c`, the radius the constants guarantee.
    pub guaranteed_radius: f64,
    pub growth_rate: f64,
    pub terms: Vec<SeriesTerm>,
    pub targets: Vec<TargetReport>,
}

/// Solves `T g(ω) + (ω − z) h(ω) = k` near `ω = s` by power series
/// `g(ω) = Σ g_n (ω − s)^n`, `h(ω) = Σ h_n (ω − s)^n`, with `g_n` constant:
/// `T g_0 + (s − z)h_0 = k` and `T g_n + (s − z)h_n = −h_{n−1}`.
pub fn solve_analytic_equation(
    t: &CoupleOperator,
    k: &LaurentElement,
    s: &AnnulusPoint,
    cfg: &AnalyticSolverConfig,
) -> Result<AnalyticSeries> {
    if t.domain() != t.codomain() {
        return Err(LabError::Input("the analytic equation needs an operator from a couple to itself".into()));
    }
    let couple = t.domain();
    check_dim(couple.dim(), k.dim())?;
    if cfg.max_terms == 0 {
        return Err(LabError::Input("max_terms must be positive".into()));
    }
    for (i, w) in cfg.targets.iter().enumerate() {
        AnnulusPoint::new(*w).map_err(|e| LabError::Input(format!("targets[{i}]: {e}")))?;
    }
    let gate = t.gate();
    if !gate.invertible {
        return Err(LabError::NotInvertible {
            smallest_singular_value: gate.smallest_singular_value,
            largest_singular_value: gate.largest_singular_value,
        });
    }
    let inverse = invert_matrix(t.matrix())?;
    let p = &cfg.pseudolattice;
    let theta_s = s.modulus().ln();
    let inv_norm = t.interpolated_inverse_norm(FamilyKind::Calderon.at(theta_s))?.upper();
    let c1 = cfg.c1.unwrap_or(inv_norm * (1.0 + 1e-6));
    if !(c1 > inv_norm) {
        return Err(LabError::Input(format!("c1 = {c1} must exceed the inverse norm {inv_norm}")));
    }
    let t_norm = t.couple_norm().upper;
    let c = cfg.c.unwrap_or(4.0 * (1.0 + c1 * t_norm) * delta_constant(s));

    let apply = |m: &Matrix, v: &[Complex64]| -> Vec<Complex64> { (m * DVector::from_column_slice(v)).iter().copied().collect() };
    let apply_t = |f: &LaurentElement| f.map_coeffs(|v| apply(t.matrix(), v));
    let neg = Complex64::new(-1.0, 0.0);

    let mut gs: Vec<Vec<Complex64>> = Vec::new();
    let mut hs: Vec<LaurentElement> = Vec::new();
    let g0 = apply(&inverse, &k.evaluate(s.value()));
    let r0 = k.sub(&apply_t(&LaurentElement::constant(g0.clone())?)?)?;
    gs.push(g0);
    hs.push(cancel_divide(&r0, s)?.scale(neg));
    while gs.len() < cfg.max_terms {
        let prev = hs.last().expect("nonempty");
        if prev.is_zero() {
            break;
        }
        let g = apply(&inverse, &prev.evaluate(s.value())).into_iter().map(|z| -z).collect::<Vec<_>>();
        let rhs = prev.scale(neg).sub(&apply_t(&LaurentElement::constant(g.clone())?)?)?;
        gs.push(g);
        hs.push(cancel_divide(&rhs, s)?.scale(neg));
    }

    let mut terms = Vec::with_capacity(gs.len());
    for (n, (g, h)) in gs.iter().zip(&hs).enumerate() {
        terms.push(SeriesTerm {
            n,
            j_g: j_norm(&LaurentElement::constant(g.clone())?, p, couple)?,
            j_h: j_norm(h, p, couple)?,
        });
    }
    let jh0 = terms[0].j_h;
    let growth_rate = if jh0 == 0.0 {
        0.0
    } else {
        terms
            .iter()
            .skip(1)
            .map(|tm| (tm.j_h / jh0).powf(1.0 / tm.n as f64))
            .fold(0.0, f64::max)
    };

    let mut targets = Vec::with_capacity(cfg.targets.len());
    for &omega in &cfg.targets {
        let step = omega - s.value();
        let mut big_g = vec![Complex64::new(0.0, 0.0); couple.dim()];
        let mut big_h = LaurentElement::zero(couple.dim());
        let mut residuals = Vec::with_capacity(gs.len());
        let mut power = Complex64::new(1.0, 0.0);
        let mut scale = j_norm(k, p, couple)?;
        for (g, h) in gs.iter().zip(&hs) {
            for (acc, v) in big_g.iter_mut().zip(g) {
                *acc += power * v;
            }
            big_h = big_h.add(&h.scale(power))?;
            let lhs = apply_t(&LaurentElement::constant(big_g.clone())?)?.add(&big_h.mul_linear(omega, neg))?;
            residuals.push(j_norm(&lhs.sub(k)?, p, couple)?);
            scale = scale.max(j_norm(&big_h, p, couple)?);
            power *= step;
        }
        let exact = apply(&inverse, &k.evaluate(omega));
        let consistency_error = big_g.iter().zip(&exact).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        let terms_to_tolerance = residuals.iter().position(|r| *r <= cfg.residual_tol);
        let ratio = growth_rate * step.norm();
        let within_measured_radius = ratio < 1.0;
        let rounding = 1e-13 * scale.max(1.0);
        let decay_bound_holds = growth_rate == 0.0
            || residuals
                .iter()
                .enumerate()
                .all(|(m, r)| *r <= jh0 / growth_rate * ratio.powi(m as i32 + 1) * (1.0 + 1e-9) + rounding);
        let terminated = hs.last().is_some_and(|h| h.is_zero());
        targets.push(TargetReport {
            omega,
            converged: (within_measured_radius || terminated) && terms_to_tolerance.is_some(),
            residuals,
            g_tilde: big_g,
            consistency_error,
            terms_to_tolerance,
            within_measured_radius,
            decay_bound_holds,
        });
    }
    Ok(AnalyticSeries {
        s: s.value(),
        c1,
        c,
        guaranteed_radius: 1.0 / c,
        growth_rate,
        terms,
        targets,
    })
}
