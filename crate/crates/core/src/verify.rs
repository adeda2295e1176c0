//! The acceptance suite: seeded property checks over random corpora.
//!
//! Each function returns one [`CheckReport`]; [`verify_all`] runs them in order.
//! Sample counts scale with [`VerifyOptions::scale`] (1 = full counts).

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::ckmr::{
    annulus_sample_points, cancellation_case, j_norm, kernel_distance_probe, project_to_kernel, AnnulusPoint, LaurentElement, ProbeConfig,
    PseudolatticeCouple,
};
use crate::error::Result;
use crate::functors::{calderon_space_unchecked, delta_condition_check, real_norm, reiteration_check, FamilyKind, QuadratureConfig};
use crate::kfunctional::{k_closed_form_l1, k_functional};
use crate::lattice::{
    calderon_reiteration_check, cwikel_nilsson_check, lattice_transfer_check, order_iso_sweep, power_inequality_check, ConeSampling,
};
use crate::operators::{eigenvalues, real_matrix, CoupleOperator, Matrix};
use crate::sampling::{
    complex_vector, couple_like, invertible_matrix, pick_exponent, positive_matrix, random_couple, random_laurent, random_space, rng,
    substream,
};
use crate::spaces::{BanachCouple, Exponent, WeightedSpace};
use crate::stability::{solve_analytic_equation, sweep, AnalyticSolverConfig};
use crate::verdict::CheckReport;

const EXPONENTS: [f64; 3] = [1.0, 2.0, f64::INFINITY];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Multiplies every sample count; counts never drop below one.
    pub scale: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { seed: 42, scale: 1.0 }
    }
}

impl VerifyOptions {
    fn count(&self, full: usize) -> usize {
        ((full as f64 * self.scale).round() as usize).max(1)
    }

    /// Independent seed for criterion `k`.
    fn seed_for(&self, k: u64) -> u64 {
        self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k)
    }
}

fn exponent(p: f64) -> Exponent {
    Exponent::new(p).expect("valid exponent")
}

fn pseudolattice<R: Rng>(r: &mut R) -> PseudolatticeCouple {
    PseudolatticeCouple::new(pick_exponent(r, &EXPONENTS), pick_exponent(r, &EXPONENTS))
}

fn annulus(z: Complex64) -> AnnulusPoint {
    AnnulusPoint::new(z).expect("point inside the annulus")
}

/// Points `s` used by the cancellation suite.
pub fn cancellation_points() -> Vec<AnnulusPoint> {
    vec![
        annulus(Complex64::new(0.3f64.exp(), 0.0)),
        annulus(Complex64::from_polar(0.5f64.exp(), 0.4)),
        annulus(Complex64::new(1.1, 0.0)),
    ]
}

/// Random kernel elements (`f(s) = 0`) checked against `j(g) ≤ δ(s) j(f)`,
/// the division identity at 16 annulus points and `g(s) = f'(s)`.
pub fn cancellation_batch(seed: u64, samples: usize, dim: usize, support: (i64, i64), points: &[AnnulusPoint]) -> Result<CheckReport> {
    if points.is_empty() {
        return Err(crate::LabError::Input("at least one point s is required".into()));
    }
    let zs = annulus_sample_points(16);
    let mut report = CheckReport::new("cancellation");
    for k in 0..samples {
        let mut r = substream(seed, k as u64);
        let couple = random_couple(&mut r, dim, &EXPONENTS, 2.0);
        let p = pseudolattice(&mut r);
        let s = points[k % points.len()];
        let f = project_to_kernel(&random_laurent(&mut r, dim, support.0, support.1), &s)?;
        let case = cancellation_case(&f, &s, &p, &couple, &zs)?;
        let ok = case.j_g <= case.delta * case.j_f * (1.0 + 1e-12)
            && case.identity_error <= 1e-9 * case.j_f
            && case.derivative_error <= 1e-9;
        report.diagnostic_max("max_ratio_to_delta", case.j_g / (case.delta * case.j_f));
        report.diagnostic_max("max_identity_error", case.identity_error / case.j_f);
        report.diagnostic_max("max_derivative_error", case.derivative_error);
        report.record(ok, || json!({"sample": k, "case": case}));
    }
    Ok(report)
}

/// Criterion 1: the cancellation batch at full size.
pub fn cancellation_suite(opts: &VerifyOptions) -> Result<CheckReport> {
    cancellation_batch(opts.seed_for(1), opts.count(1000), 2, (-4, 4), &cancellation_points())
}

/// Criterion 2: the transport certificate and the distance estimate.
pub fn distance_suite(opts: &VerifyOptions) -> Result<CheckReport> {
    let s = annulus(Complex64::new(0.5f64.exp(), 0.0));
    let seed = opts.seed_for(2);
    let mut r = rng(seed);
    let pairs = [
        (0.01, PseudolatticeCouple::new(Exponent::Infinite, Exponent::Infinite)),
        (0.05, PseudolatticeCouple::new(exponent(2.0), Exponent::Infinite)),
        (0.1, PseudolatticeCouple::new(exponent(1.0), exponent(2.0))),
    ];
    let mut report = CheckReport::new("distance");
    for (k, (step, p)) in pairs.into_iter().enumerate() {
        let couple = random_couple(&mut r, 2, &EXPONENTS, 2.0);
        let omega = annulus(s.value() + Complex64::from_polar(step, 2.0 * PI * k as f64 / 3.0));
        let cfg = ProbeConfig {
            samples: opts.count(200),
            seed: seed.wrapping_add(k as u64 + 1),
            support: (-4, 4),
            tol: 1e-6,
            slack: 1e-8,
        };
        let mut sub = kernel_distance_probe(&p, &couple, &s, &omega, &cfg)?;
        sub.name = format!("step-{step}");
        report.absorb(sub);
    }
    Ok(report)
}

/// Criterion 3: `j(rotate(b, τ)) = j(b)` to 1e-14 relative.
pub fn rotation_suite(opts: &VerifyOptions) -> Result<CheckReport> {
    let seed = opts.seed_for(3);
    let mut report = CheckReport::new("rotation");
    for k in 0..opts.count(500) {
        let mut r = substream(seed, k as u64);
        let couple = random_couple(&mut r, 2, &EXPONENTS, 2.0);
        let p = pseudolattice(&mut r);
        let b = random_laurent(&mut r, 2, -4, 4);
        let j = j_norm(&b, &p, &couple)?;
        for tau in [0.1, FRAC_PI_2, PI, 5.0] {
            let jr = j_norm(&b.rotate(tau), &p, &couple)?;
            let err = (jr - j).abs() / j;
            report.diagnostic_max("max_relative_error", err);
            report.record(err <= 1e-14, || json!({"sample": k, "tau": tau, "j": j, "j_rotated": jr}));
        }
    }
    Ok(report)
}

/// Criterion 4: RADIUS and FACTOR2 over a random operator corpus, θ step 0.01.
pub fn radius_factor2_suite(opts: &VerifyOptions) -> Result<CheckReport> {
    let seed = opts.seed_for(4);
    let grid: Vec<f64> = (1..100).map(|k| k as f64 / 100.0).collect();
    let families = [
        FamilyKind::Calderon,
        FamilyKind::Real { q: exponent(1.0) },
        FamilyKind::Real { q: exponent(2.0) },
        FamilyKind::Real { q: Exponent::Infinite },
    ];
    let reports: Vec<Result<Vec<CheckReport>>> = (0..opts.count(100))
        .into_par_iter()
        .map(|k| {
            let mut r = substream(seed, k as u64);
            let dim = r.random_range(2..=6);
            let domain = random_couple(&mut r, dim, &EXPONENTS, 4.0);
            let codomain = couple_like(&mut r, &domain, 4.0);
            let t = CoupleOperator::new(invertible_matrix(&mut r, dim), domain, codomain)?;
            families
                .iter()
                .map(|&family| {
                    let rep = sweep(&t, family, &grid, 1e-6)?;
                    let mut out = CheckReport::new(format!("operator-{k}"));
                    // ε is usually below the grid step, so also probe just inside the radius.
                    let mut probes = CheckReport::new("OFFGRID");
                    for pt in &rep.points {
                        let (Some(eps), Some(base)) = (pt.epsilon, pt.inverse_norm) else {
                            continue;
                        };
                        for theta in [pt.theta - 0.99 * eps, pt.theta + 0.99 * eps] {
                            if theta <= 0.0 || theta >= 1.0 {
                                continue;
                            }
                            let inv = t.interpolated_inverse_norm(family.at(theta))?.bracket;
                            let limit = 2.0 * base.upper * (1.0 + 1e-6);
                            probes.record(inv.upper <= limit, || {
                                json!({"theta_star": pt.theta, "theta": theta, "inverse_norm": inv.upper, "limit": limit})
                            });
                        }
                    }
                    for v in rep.verdicts {
                        out.absorb(v);
                    }
                    probes.diagnostic("count", probes.cases as f64);
                    out.absorb(probes);
                    Ok(out)
                })
                .collect()
        })
        .collect();
    let mut report = CheckReport::new("radius-factor2");
    let mut nonvacuous = 0usize;
    for res in reports {
        for sub in res? {
            nonvacuous += sub.diagnostics.get("OFFGRID.count").copied().unwrap_or(0.0) as usize;
            report.cases += sub.cases;
            report.failures += sub.failures;
            report.passed &= sub.passed;
            if report.witness.is_none() {
                report.witness = sub.witness;
            }
            if let Some(e) = sub.diagnostics.get("RADIUS.min_epsilon") {
                report.diagnostic_min("min_epsilon", *e);
            }
            if let Some(e) = sub.diagnostics.get("RADIUS.max_epsilon") {
                report.diagnostic_max("max_epsilon", *e);
            }
        }
    }
    report.diagnostic("off_grid_probes", nonvacuous as f64);
    Ok(report)
}

/// Criterion 5: the real method on `(X, X)` against `min(1, t)‖x‖`.
pub fn quadrature_suite(opts: &VerifyOptions) -> Result<CheckReport> {
    let mut r = rng(opts.seed_for(5));
    let cfg = QuadratureConfig::default();
    let mut report = CheckReport::new("quadrature");
    for p in EXPONENTS {
        let x_space = random_space(&mut r, 3, exponent(p), 2.0);
        let couple = BanachCouple::diagonal(x_space.clone())?;
        let x = complex_vector(&mut r, 3);
        let nx = x_space.norm(&x)?;
        for theta in [0.1, 0.5, 0.9] {
            for q in [1.0f64, 2.0] {
                let closed = (1.0 / ((1.0 - theta) * q) + 1.0 / (theta * q)).powf(1.0 / q) * nx;
                let b = real_norm(&x, &couple, theta, exponent(q), &cfg)?;
                report.diagnostic_max("max_relative_width", b.relative_width());
                report.record(b.contains(closed) && b.relative_width() < 1e-6, || {
                    json!({"p": p, "theta": theta, "q": q, "bracket": b, "closed_form": closed})
                });
            }
            let b = real_norm(&x, &couple, theta, Exponent::Infinite, &cfg)?;
            // Exact up to the rounding of the K evaluations.
            report.record(b.contains(nx) && b.relative_width() <= 1e-12, || json!({"p": p, "theta": theta, "q": "inf", "bracket": b, "closed_form": nx}));
        }
    }
    Ok(report)
}

/// `K(t, x)` by nested one-dimensional searches over the magnitude split `0 ≤ u ≤ |x|`.
///
/// Minimizing a convex function over some coordinates leaves a convex function of
/// the rest, so each level is unimodal: a coarse grid brackets the minimum and
/// golden-section search refines it.
pub fn brute_force_k(t: f64, x: &[Complex64], couple: &BanachCouple) -> f64 {
    let r: Vec<f64> = x.iter().map(|z| z.norm()).collect();
    let mut u = vec![0.0; r.len()];
    nested_min(0, &r, &mut u, &|u: &[f64]| {
        let rest: Vec<f64> = r.iter().zip(u).map(|(a, b)| (a - b).max(0.0)).collect();
        couple.space0.norm_abs(&rest) + t * couple.space1.norm_abs(u)
    })
}

fn nested_min(level: usize, r: &[f64], u: &mut Vec<f64>, f: &dyn Fn(&[f64]) -> f64) -> f64 {
    if level == r.len() {
        return f(u);
    }
    let eval = |v: f64, u: &mut Vec<f64>| {
        u[level] = v;
        nested_min(level + 1, r, u, f)
    };
    const GRID: usize = 16;
    let h = r[level] / GRID as f64;
    let (mut best_k, mut best) = (0, f64::INFINITY);
    for k in 0..=GRID {
        let v = eval(k as f64 * h, u);
        if v < best {
            (best_k, best) = (k, v);
        }
    }
    let (mut a, mut b) = (best_k.saturating_sub(1) as f64 * h, (best_k + 1).min(GRID) as f64 * h);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fd) = (eval(c, u), eval(d, u));
    for _ in 0..40 {
        if fc < fd {
            (b, d, fd) = (d, c, fc);
            c = b - g * (b - a);
            fc = eval(c, u);
        } else {
            (a, c, fc) = (c, d, fd);
            d = a + g * (b - a);
            fd = eval(d, u);
        }
    }
    best.min(fc).min(fd)
}

/// `K(t, x)` for weighted `ℓ_∞` endpoints: `min_m m + max_i w0_i (r_i − m/(t w1_i))_+`,
/// a convex piecewise linear function of the level `m`, minimized over its kinks.
pub fn k_closed_form_linf(t: f64, x: &[Complex64], couple: &BanachCouple) -> f64 {
    let r: Vec<f64> = x.iter().map(|z| z.norm()).collect();
    let (w0, w1) = (&couple.space0.weights, &couple.space1.weights);
    let a: Vec<f64> = w1.iter().map(|w| 1.0 / (t * w)).collect();
    let g = |m: f64| m + (0..r.len()).map(|i| w0[i] * (r[i] - m * a[i]).max(0.0)).fold(0.0, f64::max);
    let mut candidates = vec![0.0];
    for i in 0..r.len() {
        candidates.push(r[i] / a[i]);
        for j in 0..r.len() {
            let den = w0[i] * a[i] - w0[j] * a[j];
            if den != 0.0 {
                let m = (w0[i] * r[i] - w0[j] * r[j]) / den;
                if m > 0.0 {
                    candidates.push(m);
                }
            }
        }
    }
    candidates.into_iter().map(g).fold(f64::INFINITY, f64::min)
}

/// Criterion 6: `k_functional` against brute force and the `ℓ_1`/`ℓ_∞` closed forms.
pub fn k_functional_suite(opts: &VerifyOptions) -> Result<CheckReport> {
    let seed = opts.seed_for(6);
    let mut report = CheckReport::new("k-functional");
    for k in 0..opts.count(100) {
        let mut r = substream(seed, k as u64);
        let dim = r.random_range(1..=3);
        let couple = random_couple(&mut r, dim, &[1.0, 1.5, 2.0, 3.0, f64::INFINITY], 1.5);
        let x = complex_vector(&mut r, dim);
        let t = 10f64.powf(r.random_range(-2.0..=2.0));
        let ev = k_functional(t, &x, &couple, 1e-10)?;
        let brute = brute_force_k(t, &x, &couple);
        let err = (ev.value - brute).abs();
        report.diagnostic_max("max_brute_force_error", err);
        report.record(err <= 1e-4 && ev.lower() <= brute * (1.0 + 1e-12), || {
            json!({"case": k, "t": t, "k": ev.value, "brute_force": brute})
        });
        for p in [1.0, f64::INFINITY] {
            let c = BanachCouple::new(
                WeightedSpace::new(exponent(p), couple.space0.weights.clone())?,
                WeightedSpace::new(exponent(p), couple.space1.weights.clone())?,
            )?;
            let ev = k_functional(t, &x, &c, 1e-12)?;
            let closed = if p == 1.0 { k_closed_form_l1(t, &x, &c)? } else { k_closed_form_linf(t, &x, &c) };
            let err = (ev.value - closed).abs();
            report.diagnostic_max("max_closed_form_error", err);
            report.record(err <= 1e-10, || json!({"case": k, "p": p, "t": t, "k": ev.value, "closed_form": closed}));
        }
    }
    Ok(report)
}

/// Criterion 7: (Δ)-condition for the real family, log-convexity for the Calderón family.
pub fn delta_suite(opts: &VerifyOptions) -> Result<CheckReport> {
    let seed = opts.seed_for(7);
    let cfg = QuadratureConfig {
        points_per_decade: 8,
        ..Default::default()
    };
    let results: Vec<Result<CheckReport>> = (0..opts.count(100))
        .into_par_iter()
        .map(|k| {
            let mut r = substream(seed, k as u64);
            let dim = r.random_range(1..=3);
            let couple = random_couple(&mut r, dim, &EXPONENTS, 2.0);
            let theta0 = r.random_range(0.05..0.5);
            let theta1 = r.random_range(theta0 + 0.05..0.95);
            let samples: Vec<Vec<Complex64>> = (0..2).map(|_| complex_vector(&mut r, dim)).collect();
            let mut out = CheckReport::new(format!("couple-{k}"));
            for q in EXPONENTS {
                let mut sub = delta_condition_check(&couple, theta0, theta1, FamilyKind::Real { q: exponent(q) }, &samples, &cfg)?;
                sub.name = format!("real-q{q}");
                out.absorb(sub);
            }
            out.absorb(delta_condition_check(&couple, theta0, theta1, FamilyKind::Calderon, &samples, &cfg)?);
            Ok(out)
        })
        .collect();
    let mut report = CheckReport::new("delta-condition");
    for res in results {
        let sub = res?;
        for (key, v) in &sub.diagnostics {
            if key.ends_with("max_ratio_to_endpoints") {
                report.diagnostic_max("max_ratio_to_endpoints", *v);
            }
        }
        report.cases += sub.cases;
        report.failures += sub.failures;
        report.passed &= sub.passed;
        if report.witness.is_none() {
            report.witness = sub.witness;
        }
    }
    Ok(report)
}

/// Criterion 8: Calderón reiteration identities on random parameters.
pub fn reiteration_suite(opts: &VerifyOptions) -> Result<CheckReport> {
    let seed = opts.seed_for(8);
    let cfg = QuadratureConfig::default();
    let mut report = CheckReport::new("reiteration");
    for k in 0..opts.count(100) {
        let mut r = substream(seed, k as u64);
        let dim = r.random_range(1..=4);
        let couple = random_couple(&mut r, dim, &[1.0, 1.5, 2.0, 4.0, f64::INFINITY], 3.0);
        let (theta0, theta1, lambda) = (r.random_range(0.01..0.99), r.random_range(0.01..0.99), r.random_range(0.01..0.99));
        let a = reiteration_check(&couple, theta0, theta1, lambda, FamilyKind::Calderon, &[], &cfg)?;
        let b = calderon_reiteration_check(&couple, theta0, theta1, lambda)?;
        for sub in [a, b] {
            report.cases += sub.cases;
            report.failures += sub.failures;
            report.passed &= sub.passed;
            if let Some(e) = sub.diagnostics.get("max_weight_relative_error") {
                report.diagnostic_max("max_weight_relative_error", *e);
            }
            if report.witness.is_none() {
                report.witness = sub.witness.map(|w| json!({"draw": k, "detail": w}));
            }
        }
    }
    Ok(report)
}

/// The dimension-2 shear `[[1, 1], [0, 1]]` on `w_0 = (1, 1)`, `w_1 = (e^4, e^{−4})`, `p = 2`.
pub fn shear_example() -> Result<CoupleOperator> {
    let couple = BanachCouple::new(
        WeightedSpace::new(exponent(2.0), vec![1.0, 1.0])?,
        WeightedSpace::new(exponent(2.0), vec![4f64.exp(), (-4f64).exp()])?,
    )?;
    CoupleOperator::endomorphism(real_matrix(&[&[1.0, 1.0], &[0.0, 1.0]]), couple)
}

/// Criterion 9: the analytic-equation series for the shear example.
pub fn analytic_suite(_opts: &VerifyOptions) -> Result<CheckReport> {
    let t = shear_example()?;
    let s = annulus(Complex64::new(0.5f64.exp(), 0.0));
    let y = vec![Complex64::new(1.0, 0.5), Complex64::new(-0.3, 1.0)];
    let zero = vec![Complex64::new(0.0, 0.0); 2];
    let mut report = CheckReport::new("analytic-equation");

    // The z^{-1} term keeps every divided difference nonzero.
    let w = vec![Complex64::new(0.2, -0.7), Complex64::new(0.9, 0.1)];
    let k = LaurentElement::new(-1, vec![w, zero, y.clone(), y.clone()])?;
    let omega = s.value() * 0.02f64.exp();
    let cfg = AnalyticSolverConfig {
        targets: vec![omega],
        max_terms: 30,
        ..Default::default()
    };
    let out = solve_analytic_equation(&t, &k, &s, &cfg)?;
    let target = &out.targets[0];
    report.diagnostic("growth_rate", out.growth_rate);
    report.diagnostic("final_residual", *target.residuals.last().unwrap_or(&f64::NAN));
    report.diagnostic("terms_to_tolerance", target.terms_to_tolerance.map_or(f64::NAN, |m| m as f64));
    report.record(target.terms_to_tolerance.is_some_and(|m| m < 30) && target.decay_bound_holds, || {
        json!({"kind": "non-constant", "residuals": target.residuals})
    });

    let k = LaurentElement::constant(y.clone())?;
    let targets: Vec<Complex64> = (0..5).map(|i| s.value() * Complex64::from_polar(1.0 + 0.01 * i as f64, 0.015 * i as f64)).collect();
    let cfg = AnalyticSolverConfig { targets, ..cfg };
    let out = solve_analytic_equation(&t, &k, &s, &cfg)?;
    let mut deviation = 0.0f64;
    for a in &out.targets {
        for b in &out.targets {
            for (u, v) in a.g_tilde.iter().zip(&b.g_tilde) {
                deviation = deviation.max((u - v).norm());
            }
        }
    }
    let worst = out.targets.iter().map(|tr| tr.consistency_error).fold(0.0, f64::max);
    report.diagnostic("max_pairwise_deviation", deviation);
    report.diagnostic("max_inverse_error", worst);
    report.record(deviation <= 1e-9 && worst <= 1e-9, || json!({"kind": "constant", "deviation": deviation, "error": worst}));
    Ok(report)
}

/// Greedy matching of two eigenvalue lists within `tol·max(1, |λ|)`.
pub fn same_multiset(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    for x in a {
        let hit = (0..b.len())
            .filter(|&j| !used[j])
            .min_by(|&i, &j| (b[i] - x).norm().total_cmp(&(b[j] - x).norm()));
        match hit {
            Some(j) if (b[j] - x).norm() <= tol * x.norm().max(1.0) => used[j] = true,
            _ => return false,
        }
    }
    true
}

/// Criterion 10: spectra do not depend on `θ` or the functor, and resolvent
/// norms dominate `1/dist(λ, σ)`.
pub fn spectrum_suite(opts: &VerifyOptions) -> Result<CheckReport> {
    let seed = opts.seed_for(10);
    let thetas = [0.1, 0.5, 0.9];
    let mut report = CheckReport::new("spectrum");
    for k in 0..opts.count(20) {
        let mut r = substream(seed, k as u64);
        let dim = r.random_range(2..=5);
        let couple = random_couple(&mut r, dim, &EXPONENTS, 2.0);
        let t = CoupleOperator::endomorphism(invertible_matrix(&mut r, dim), couple.clone())?;
        let base = t.spectrum()?;
        for &theta in &thetas {
            // On the Calderón space the operator is T conjugated by the weights.
            let w = calderon_space_unchecked(&couple, theta).weights;
            let conj = DMatrix::from_fn(dim, dim, |i, j| t.matrix()[(i, j)] * (w[i] / w[j]));
            let calderon = eigenvalues(&conj)?;
            let real = t.spectrum()?;
            report.record(same_multiset(&base, &calderon, 1e-10) && same_multiset(&base, &real, 1e-10), || {
                json!({"operator": k, "theta": theta})
            });
        }
        let radius = base.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let lambdas: Vec<Complex64> = (0..5)
            .flat_map(|i| (0..5).map(move |j| Complex64::new(-1.2 + 0.6 * i as f64, -1.2 + 0.6 * j as f64) * radius + 0.013))
            .collect();
        for family in [FamilyKind::Real { q: exponent(2.0) }, FamilyKind::Calderon] {
            for pt in t.resolvent_profile(&lambdas, &thetas, family)? {
                let lambda = Complex64::new(pt.lambda_re, pt.lambda_im);
                let dist = base.iter().map(|z| (z - lambda).norm()).fold(f64::INFINITY, f64::min);
                let Some(b) = pt.bracket else {
                    report.record(dist <= 1e-8 * radius.max(1.0), || json!({"operator": k, "lambda": [pt.lambda_re, pt.lambda_im], "singular": true}));
                    continue;
                };
                report.record(b.lower >= (1.0 / dist) * (1.0 - 1e-9), || {
                    json!({"operator": k, "lambda": [pt.lambda_re, pt.lambda_im], "theta": pt.theta, "bracket": b, "inverse_distance": 1.0 / dist})
                });
            }
        }
    }
    Ok(report)
}

/// Criterion 11: the lattice suite.
pub fn lattice_suite(opts: &VerifyOptions) -> Result<CheckReport> {
    let seed = opts.seed_for(11);
    let mut report = CheckReport::new("lattice");

    let mut power = CheckReport::new("power-inequality");
    for k in 0..opts.count(1000) {
        let mut r = substream(seed, k as u64);
        let (rows, cols) = (r.random_range(1..=4), r.random_range(1..=4));
        let p = positive_matrix(&mut r, rows, cols);
        let x: Vec<f64> = (0..cols).map(|_| r.random::<f64>() * 10.0).collect();
        let y: Vec<f64> = (0..cols).map(|_| r.random::<f64>() * 10.0).collect();
        let theta = r.random::<f64>();
        let sub = power_inequality_check(&p, &x, &y, theta)?;
        power.record(sub.passed, || json!({"instance": k, "detail": sub.witness}));
    }
    report.absorb(power);

    let grid: Vec<f64> = (1..20).map(|k| k as f64 / 20.0).collect();
    let mut iso = CheckReport::new("order-iso");
    for k in 0..opts.count(50) {
        let mut r = substream(seed ^ 0x5A5A, k as u64);
        let dim = r.random_range(2..=4);
        let domain = random_couple(&mut r, dim, &EXPONENTS, 2.0);
        let codomain = couple_like(&mut r, &domain, 2.0);
        let m = positive_matrix(&mut r, dim, dim) + Matrix::identity(dim, dim);
        let t = CoupleOperator::new(m, domain, codomain)?;
        let theta0 = r.random_range(0.1..0.9);
        let sampling = ConeSampling { combinations: 32, seed: seed.wrapping_add(k as u64) };
        let sub = order_iso_sweep(&t, theta0, &grid, &sampling)?;
        if let Some(v) = sub.diagnostics.get("min_ratio_over_bound") {
            iso.diagnostic_min("min_ratio_over_bound", *v);
        }
        iso.record(sub.passed, || json!({"instance": k, "detail": sub.witness}));
    }
    report.absorb(iso);

    let mut cn = CheckReport::new("cwikel-nilsson");
    for k in 0..opts.count(100) {
        let mut r = substream(seed ^ 0xC3C3, k as u64);
        let dim = r.random_range(1..=4);
        let couple = random_couple(&mut r, dim, &EXPONENTS, 2.0);
        let (theta, alpha) = (r.random_range(0.05..0.95), r.random_range(0.05..0.95));
        let f = vec![complex_vector(&mut r, dim)];
        let gs: Vec<Vec<Complex64>> = (0..8).map(|_| complex_vector(&mut r, dim)).collect();
        let sub = cwikel_nilsson_check(&couple, theta, alpha, &f, &gs)?;
        if let Some(v) = sub.diagnostics.get("max_witness_relative_error") {
            cn.diagnostic_max("max_witness_relative_error", *v);
        }
        cn.record(sub.passed, || json!({"instance": k, "detail": sub.witness}));
    }
    report.absorb(cn);

    let qs = [exponent(1.0), exponent(2.0), Exponent::Infinite];
    let grid: Vec<f64> = (1..10).map(|k| k as f64 / 10.0).collect();
    let mut composite = CheckReport::new("lattice-transfer");
    for k in 0..opts.count(20) {
        let mut r = substream(seed ^ 0x3C3C, k as u64);
        let dim = r.random_range(2..=4);
        let couple = random_couple(&mut r, dim, &EXPONENTS, 2.0);
        let m = positive_matrix(&mut r, dim, dim) + Matrix::identity(dim, dim);
        let t = CoupleOperator::endomorphism(m, couple)?;
        let sampling = ConeSampling { combinations: 16, seed: seed.wrapping_add(k as u64) };
        let sub = lattice_transfer_check(&t, 0.5, &grid, &qs, &sampling)?;
        composite.record(sub.passed, || json!({"instance": k, "detail": sub.witness}));
    }
    report.absorb(composite);
    Ok(report)
}

/// Numbered criteria run by [`verify_all`].
/// A named acceptance check.
pub type Criterion = fn(&VerifyOptions) -> Result<CheckReport>;

pub const CRITERIA: [(&str, Criterion); 11] = [
    ("cancellation", cancellation_suite),
    ("distance", distance_suite),
    ("rotation", rotation_suite),
    ("radius-factor2", radius_factor2_suite),
    ("quadrature", quadrature_suite),
    ("k-functional", k_functional_suite),
    ("delta-condition", delta_suite),
    ("reiteration", reiteration_suite),
    ("analytic-equation", analytic_suite),
    ("spectrum", spectrum_suite),
    ("lattice", lattice_suite),
];

pub fn verify_all(opts: &VerifyOptions) -> Result<Vec<CheckReport>> {
    CRITERIA.iter().map(|(_, f)| f(opts)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::complexify;

    #[test]
    fn linf_closed_form_examples() {
        let c = BanachCouple::diagonal(WeightedSpace::unweighted(Exponent::Infinite, 2).unwrap()).unwrap();
        let x = complexify(&[1.0, 0.5]);
        for t in [0.1, 0.5, 1.0, 3.0] {
            assert!((k_closed_form_linf(t, &x, &c) - t.min(1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn brute_force_matches_closed_forms() {
        let mut r = rng(2);
        for _ in 0..10 {
            let c = random_couple(&mut r, 2, &[1.0], 1.0);
            let x = complex_vector(&mut r, 2);
            let t = 0.7;
            assert!((brute_force_k(t, &x, &c) - k_closed_form_l1(t, &x, &c).unwrap()).abs() < 1e-8);
            let ci = BanachCouple::new(
                WeightedSpace::new(Exponent::Infinite, c.space0.weights.clone()).unwrap(),
                WeightedSpace::new(Exponent::Infinite, c.space1.weights.clone()).unwrap(),
            )
            .unwrap();
            assert!((brute_force_k(t, &x, &ci) - k_closed_form_linf(t, &x, &ci)).abs() < 1e-8);
        }
    }

    #[test]
    fn multiset_matching() {
        let a = [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 2.0)];
        let b = [Complex64::new(0.0, 2.0), Complex64::new(1.0, 1e-12), Complex64::new(1.0, 0.0)];
        assert!(same_multiset(&a, &b, 1e-10));
        let c = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 2.0), Complex64::new(0.0, 2.0)];
        assert!(!same_multiset(&a, &c, 1e-10));
    }

    #[test]
    fn quick_suites_pass() {
        let opts = VerifyOptions { seed: 1, scale: 0.02 };
        for f in [cancellation_suite, rotation_suite, quadrature_suite, analytic_suite, reiteration_suite] {
            let rep = f(&opts).unwrap();
            assert!(rep.passed, "{rep:?}");
        }
    }
}
