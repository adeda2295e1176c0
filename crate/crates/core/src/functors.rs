//! Interpolation-space norms over a couple.
//!
//! Real-method norms are brackets: the K-functional is sampled on a log grid
//! and integrated with bounds that only use `K` nondecreasing, `K(t)/t`
//! nonincreasing, concavity, and the exact saturation regimes
//! `K(t) = t‖x‖_1` for `t ≤ 1/‖I‖_{X_0→X_1}` and `K(t) = ‖x‖_0` for
//! `t ≥ ‖I‖_{X_1→X_0}`. Calderón (complex) spaces of weighted `ℓ_p` couples are
//! weighted `ℓ_p` spaces and are computed exactly.

use std::fmt;

use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::json;

use crate::error::{check_dim, LabError, Result};
use crate::kfunctional::{k_functional, solve_magnitudes};
use crate::spaces::{identity_norm, BanachCouple, Exponent, WeightedSpace};
use crate::verdict::CheckReport;

/// K tolerance used when sampling profiles.
const PROFILE_K_TOL: f64 = 1e-9;
/// Pieces per grid cell in the quadrature bounds.
const SUBDIVISIONS: usize = 8;
/// Relative widening applied to closed-form brackets to absorb rounding.
const ROUNDING_SLACK: f64 = 1e-14;

/// A certified enclosure `[lower, upper]` of a nonnegative quantity.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct NormBracket {
    pub lower: f64,
    pub upper: f64,
}

impl NormBracket {
    pub fn new(lower: f64, upper: f64) -> Self {
        NormBracket {
            lower: lower.max(0.0).min(upper),
            upper,
        }
    }

    pub fn exact(value: f64) -> Self {
        NormBracket { lower: value, upper: value }
    }

    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// Width relative to the upper end (0 for the zero bracket).
    pub fn relative_width(&self) -> f64 {
        if self.upper == 0.0 {
            0.0
        } else {
            self.width() / self.upper
        }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }

    pub fn scaled(&self, factor: f64) -> Self {
        NormBracket::new(self.lower * factor, self.upper * factor)
    }

    fn widened(&self, rel: f64) -> Self {
        NormBracket::new(self.lower * (1.0 - rel), self.upper * (1.0 + rel))
    }
}

impl Serialize for NormBracket {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("NormBracket", 3)?;
        st.serialize_field("lower", &self.lower)?;
        st.serialize_field("upper", &self.upper)?;
        st.serialize_field("exact", &self.is_exact())?;
        st.end()
    }
}

impl fmt::Display for NormBracket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.12e}, {:.12e}]", self.lower, self.upper)
    }
}

/// Log-grid parameters for real-method quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub points_per_decade: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            t_min: 1e-8,
            t_max: 1e8,
            points_per_decade: 32,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_min > 0.0 && self.t_min < 1.0 && self.t_max > 1.0 && self.t_max.is_finite()) {
            return Err(LabError::Input(format!(
                "quadrature window must satisfy 0 < t_min < 1 < t_max, got [{}, {}]",
                self.t_min, self.t_max
            )));
        }
        if self.points_per_decade == 0 {
            return Err(LabError::Input("points_per_decade must be positive".into()));
        }
        Ok(())
    }

    fn refined(&self) -> Self {
        QuadratureConfig {
            points_per_decade: self.points_per_decade.saturating_mul(2),
            ..*self
        }
    }
}

/// The interpolation functor applied to a couple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum FunctorKind {
    /// Real K-method `(θ, q)`.
    Real { theta: f64, q: Exponent },
    /// Complex method, realized as the Calderón product.
    Calderon { theta: f64 },
}

impl FunctorKind {
    pub fn theta(&self) -> f64 {
        match *self {
            FunctorKind::Real { theta, .. } | FunctorKind::Calderon { theta } => theta,
        }
    }

    /// Same functor family at another parameter.
    pub fn at(&self, theta: f64) -> FunctorKind {
        match *self {
            FunctorKind::Real { q, .. } => FunctorKind::Real { theta, q },
            FunctorKind::Calderon { .. } => FunctorKind::Calderon { theta },
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            FunctorKind::Real { theta, q } => validate_real_params(theta, q),
            FunctorKind::Calderon { theta } => validate_open_theta(theta),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctorSpec {
    pub kind: FunctorKind,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
}

impl FunctorSpec {
    pub fn new(kind: FunctorKind) -> Self {
        FunctorSpec {
            kind,
            quadrature: QuadratureConfig::default(),
        }
    }

    /// Norm of `x` in `F(couple)`.
    pub fn norm(&self, x: &[Complex64], couple: &BanachCouple) -> Result<NormBracket> {
        match self.kind {
            FunctorKind::Real { theta, q } => real_norm(x, couple, theta, q, &self.quadrature),
            FunctorKind::Calderon { theta } => {
                let space = calderon_complex_space(couple, theta)?;
                Ok(NormBracket::exact(space.norm(x)?))
            }
        }
    }
}

fn validate_open_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta < 1.0 {
        Ok(())
    } else {
        Err(LabError::Input(format!("theta must lie in (0, 1), got {theta}")))
    }
}

fn validate_real_params(theta: f64, q: Exponent) -> Result<()> {
    if q.is_infinite() && (0.0..=1.0).contains(&theta) {
        return Ok(());
    }
    validate_open_theta(theta)
}

/// One quadrature piece `[c, d]` on which
/// `max(a_lo, b_lo·t) ≤ K(t) ≤ min(d_up, c_up·t)`.
#[derive(Debug, Clone, Copy)]
struct Piece {
    c: f64,
    d: f64,
    a_lo: f64,
    b_lo: f64,
    d_up: f64,
    c_up: f64,
}

/// A sampled node of the K profile.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct KNode {
    pub t: f64,
    pub lower: f64,
    pub upper: f64,
    /// `‖x_0‖_0` and `‖x_1‖_1` of the split found at `t`.
    split: (f64, f64),
}

/// The K-functional of one vector, sampled once and reusable for every
/// `(θ, q)`. Values are stored divided by `scale = ‖x‖_0`.
#[derive(Debug, Clone)]
pub struct KProfile {
    scale: f64,
    n1: f64,
    c_lo: f64,
    c_hi: f64,
    nodes: Vec<KNode>,
    pieces: Vec<Piece>,
    /// Every K solve reached the profile tolerance.
    pub converged: bool,
}

impl KProfile {
    pub fn new(x: &[Complex64], couple: &BanachCouple, cfg: &QuadratureConfig) -> Result<Self> {
        cfg.validate()?;
        check_dim(couple.dim(), x.len())?;
        let r: Vec<f64> = x.iter().map(|z| z.norm()).collect();
        let scale = couple.space0.norm_abs(&r);
        if scale == 0.0 {
            return Ok(KProfile {
                scale: 0.0,
                n1: 0.0,
                c_lo: 1.0,
                c_hi: 1.0,
                nodes: Vec::new(),
                pieces: Vec::new(),
                converged: true,
            });
        }
        let r: Vec<f64> = r.iter().map(|v| v / scale).collect();
        let n1 = couple.space1.norm_abs(&r);
        let c_lo = 1.0 / identity_norm(&couple.space0, &couple.space1);
        let c_hi = identity_norm(&couple.space1, &couple.space0).max(c_lo);

        let mut profile = KProfile {
            scale,
            n1,
            c_lo,
            c_hi,
            nodes: Vec::new(),
            pieces: Vec::new(),
            converged: true,
        };
        if c_hi <= c_lo {
            return Ok(profile);
        }

        let g_lo = cfg.t_min.clamp(c_lo, c_hi);
        let g_hi = cfg.t_max.clamp(c_lo, c_hi);
        let mut ts = vec![g_lo];
        let ppd = cfg.points_per_decade as f64;
        let k_start = (g_lo.log10() * ppd).floor() as i64 + 1;
        let k_end = (g_hi.log10() * ppd).ceil() as i64 - 1;
        for k in k_start..=k_end {
            let t = 10f64.powf(k as f64 / ppd);
            if t > g_lo && t < g_hi {
                ts.push(t);
            }
        }
        if g_hi > g_lo {
            ts.push(g_hi);
        }

        let mut warm: Option<Vec<f64>> = None;
        for &t in &ts {
            let node = if t <= c_lo {
                KNode { t, lower: t * n1, upper: t * n1, split: (0.0, n1) }
            } else if t >= c_hi {
                KNode { t, lower: 1.0, upper: 1.0, split: (1.0, 0.0) }
            } else {
                let sol = solve_magnitudes(t, &r, couple, PROFILE_K_TOL, warm.as_deref());
                profile.converged &= sol.converged;
                let node = KNode {
                    t,
                    lower: sol.lower,
                    upper: sol.upper.min(1.0).min(t * n1),
                    split: sol.norms,
                };
                warm = Some(sol.u);
                node
            };
            profile.nodes.push(node);
        }
        profile.build_pieces();
        Ok(profile)
    }

    fn upper_at(&self, t: f64, a: &KNode, b: &KNode) -> f64 {
        let mut u = b.upper.min(a.upper * t / a.t).min(1.0).min(t * self.n1);
        u = u.min(a.split.0 + t * a.split.1).min(b.split.0 + t * b.split.1);
        u
    }

    fn lower_at(&self, t: f64, a: &KNode, b: &KNode) -> f64 {
        let chord = a.lower + (b.lower - a.lower) * (t - a.t) / (b.t - a.t);
        a.lower.max(b.lower * t / b.t).max(chord)
    }

    fn build_pieces(&mut self) {
        let (Some(first), Some(last)) = (self.nodes.first().copied(), self.nodes.last().copied()) else {
            return;
        };
        if first.t > self.c_lo {
            // Between the exact lower regime and the first node.
            self.pieces.push(Piece {
                c: self.c_lo,
                d: first.t,
                a_lo: self.c_lo * self.n1,
                b_lo: first.lower / first.t,
                d_up: first.upper,
                c_up: self.n1,
            });
        }
        for w in self.nodes.windows(2) {
            let (a, b) = (w[0], w[1]);
            let ratio = b.t / a.t;
            let mut prev_t = a.t;
            let mut prev = (a.lower, a.upper);
            for j in 1..=SUBDIVISIONS {
                let t = if j == SUBDIVISIONS {
                    b.t
                } else {
                    (a.t * ratio.powf(j as f64 / SUBDIVISIONS as f64)).clamp(prev_t, b.t)
                };
                let cur = if j == SUBDIVISIONS {
                    (b.lower, b.upper)
                } else {
                    (self.lower_at(t, &a, &b), self.upper_at(t, &a, &b))
                };
                self.pieces.push(Piece {
                    c: prev_t,
                    d: t,
                    a_lo: prev.0,
                    b_lo: cur.0 / t,
                    d_up: cur.1,
                    c_up: prev.1 / prev_t,
                });
                prev_t = t;
                prev = cur;
            }
        }
        if last.t < self.c_hi {
            self.pieces.push(Piece {
                c: last.t,
                d: self.c_hi,
                a_lo: last.lower,
                b_lo: 1.0 / self.c_hi,
                d_up: 1.0,
                c_up: last.upper / last.t,
            });
        }
    }

    /// Sampled nodes in original units.
    pub fn nodes(&self) -> Vec<KNode> {
        self.nodes
            .iter()
            .map(|n| KNode {
                t: n.t,
                lower: n.lower * self.scale,
                upper: n.upper * self.scale,
                split: (n.split.0 * self.scale, n.split.1 * self.scale),
            })
            .collect()
    }

    /// The saturation thresholds `(1/‖I‖_{X_0→X_1}, ‖I‖_{X_1→X_0})`.
    pub fn saturation(&self) -> (f64, f64) {
        (self.c_lo, self.c_hi)
    }

    /// Bracket for `‖x‖_{θ,q}`.
    pub fn norm(&self, theta: f64, q: Exponent) -> Result<NormBracket> {
        validate_real_params(theta, q)?;
        if self.scale == 0.0 {
            return Ok(NormBracket::exact(0.0));
        }
        let b = match q {
            Exponent::Infinite => self.sup_norm(theta),
            Exponent::Finite(q) => self.integral_norm(theta, q),
        };
        Ok(b.widened(ROUNDING_SLACK).scaled(self.scale))
    }

    fn integral_norm(&self, theta: f64, q: f64) -> NormBracket {
        let e_lo = (1.0 - theta) * q;
        let e_hi = -theta * q;
        // Exact regimes.
        let exact = self.n1.powf(q) * self.c_lo.powf(e_lo) / e_lo + self.c_hi.powf(e_hi) / (-e_hi);
        let (mut lo, mut up) = (exact, exact);
        for p in &self.pieces {
            let t_star = if p.b_lo > 0.0 { (p.a_lo / p.b_lo).clamp(p.c, p.d) } else { p.d };
            lo += p.a_lo.powf(q) * power_integral(e_hi, p.c, t_star) + p.b_lo.powf(q) * power_integral(e_lo, t_star, p.d);
            let t_dag = if p.c_up > 0.0 { (p.d_up / p.c_up).clamp(p.c, p.d) } else { p.c };
            up += p.c_up.powf(q) * power_integral(e_lo, p.c, t_dag) + p.d_up.powf(q) * power_integral(e_hi, t_dag, p.d);
        }
        NormBracket::new(lo.powf(1.0 / q), up.powf(1.0 / q))
    }

    fn sup_norm(&self, theta: f64) -> NormBracket {
        let exact = (self.c_lo.powf(1.0 - theta) * self.n1).max(self.c_hi.powf(-theta));
        let (mut lo, mut up) = (exact, exact);
        for n in &self.nodes {
            lo = lo.max(n.t.powf(-theta) * n.lower);
        }
        for p in &self.pieces {
            let t_dag = if p.c_up > 0.0 { (p.d_up / p.c_up).clamp(p.c, p.d) } else { p.c };
            up = up.max(t_dag.powf(-theta) * p.d_up.min(p.c_up * t_dag));
        }
        NormBracket::new(lo, up)
    }

    /// Midpoint estimate of `K(t)` (original units), exact outside the band.
    fn k_estimate(&self, t: f64) -> f64 {
        if t <= self.c_lo {
            return t * self.n1 * self.scale;
        }
        if t >= self.c_hi {
            return self.scale;
        }
        for p in &self.pieces {
            if t >= p.c && t <= p.d {
                let lo = p.a_lo.max(p.b_lo * t);
                let up = p.d_up.min(p.c_up * t);
                return 0.5 * (lo + up) * self.scale;
            }
        }
        self.scale
    }
}

/// `∫_c^d t^{e−1} dt` for `e ≠ 0`, evaluated without cancellation.
fn power_integral(e: f64, c: f64, d: f64) -> f64 {
    if d <= c {
        return 0.0;
    }
    c.powf(e) * (e * (d / c).ln()).exp_m1() / e
}

/// Bracket for `‖x‖_{θ,q} = (∫_0^∞ (t^{−θ}K(t,x))^q dt/t)^{1/q}` (supremum for `q = ∞`).
pub fn real_norm(x: &[Complex64], couple: &BanachCouple, theta: f64, q: Exponent, cfg: &QuadratureConfig) -> Result<NormBracket> {
    validate_real_params(theta, q)?;
    KProfile::new(x, couple, cfg)?.norm(theta, q)
}

/// Refines the grid until the relative bracket width is at most `rel_tol`.
pub fn real_norm_to_tolerance(
    x: &[Complex64],
    couple: &BanachCouple,
    theta: f64,
    q: Exponent,
    cfg: &QuadratureConfig,
    rel_tol: f64,
    max_refinements: u32,
) -> Result<NormBracket> {
    let mut cfg = *cfg;
    let mut bracket = real_norm(x, couple, theta, q, &cfg)?;
    for _ in 0..max_refinements {
        if bracket.relative_width() <= rel_tol {
            return Ok(bracket);
        }
        cfg = cfg.refined();
        bracket = real_norm(x, couple, theta, q, &cfg)?;
    }
    if bracket.relative_width() <= rel_tol {
        Ok(bracket)
    } else {
        Err(LabError::Precision { bracket, target: rel_tol })
    }
}

/// Calderón product space for any `θ ∈ [0, 1]`.
pub(crate) fn calderon_space_unchecked(couple: &BanachCouple, theta: f64) -> WeightedSpace {
    let (s0, s1) = (&couple.space0, &couple.space1);
    let p = Exponent::from_recip((1.0 - theta) * s0.p.recip() + theta * s1.p.recip());
    let weights = s0
        .weights
        .iter()
        .zip(&s1.weights)
        .map(|(a, b)| ((1.0 - theta) * a.ln() + theta * b.ln()).exp())
        .collect();
    WeightedSpace { p, weights }
}

/// The Calderón product `X_0^{1−θ} X_1^{θ}`: weighted `ℓ_p` with
/// `1/p = (1−θ)/p_0 + θ/p_1` and weights `w_0^{1−θ} w_1^{θ}`.
pub fn calderon_complex_space(couple: &BanachCouple, theta: f64) -> Result<WeightedSpace> {
    validate_open_theta(theta)?;
    Ok(calderon_space_unchecked(couple, theta))
}

/// `‖x‖_{A∩B} = max(‖x‖_A, ‖x‖_B)`.
pub fn intersection_norm(x: &[Complex64], a: &WeightedSpace, b: &WeightedSpace) -> Result<f64> {
    Ok(a.norm(x)?.max(b.norm(x)?))
}

/// `‖x‖_{A+B} = K(1, x; A, B)`.
pub fn sum_norm(x: &[Complex64], a: &WeightedSpace, b: &WeightedSpace, tol: f64) -> Result<NormBracket> {
    let couple = BanachCouple::new(a.clone(), b.clone())?;
    let k = k_functional(1.0, x, &couple, tol)?;
    Ok(NormBracket::new(k.lower(), k.upper()))
}

/// Norm of the Gagliardo completion of `X_endpoint`: `sup_t t^{−j} K(t, x)`.
pub fn gagliardo_norm(x: &[Complex64], couple: &BanachCouple, endpoint: usize, cfg: &QuadratureConfig) -> Result<NormBracket> {
    if endpoint > 1 {
        return Err(LabError::Input(format!("endpoint must be 0 or 1, got {endpoint}")));
    }
    real_norm(x, couple, endpoint as f64, Exponent::Infinite, cfg)
}

/// A one-parameter family of functors, indexed by `θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum FamilyKind {
    Real { q: Exponent },
    Calderon,
}

impl FamilyKind {
    pub fn at(&self, theta: f64) -> FunctorKind {
        match *self {
            FamilyKind::Real { q } => FunctorKind::Real { theta, q },
            FamilyKind::Calderon => FunctorKind::Calderon { theta },
        }
    }
}

fn theta_grid(theta0: f64, theta1: f64, steps: usize) -> Vec<f64> {
    (0..=steps)
        .map(|k| theta0 + (theta1 - theta0) * k as f64 / steps as f64)
        .collect()
}

/// Checks the (Δ)-type inequalities between the scale at `θ_0`, `θ_1` and the
/// parameters in between, on the given sample vectors.
///
/// Real: `‖x‖_{θ,q} ≤ 2 max(‖x‖_{θ_0,q}, ‖x‖_{θ_1,q})` comparing upper against
/// lower brackets, and `max(‖x‖_{θ_0,q}, ‖x‖_{θ_1,q}) ≤ sup_θ ‖x‖_{θ,q}` over a
/// grid that contains both ends. Calderón: `‖x‖_θ ≤ ‖x‖_{θ_0}^{1−λ} ‖x‖_{θ_1}^{λ}`.
pub fn delta_condition_check(
    couple: &BanachCouple,
    theta0: f64,
    theta1: f64,
    method: FamilyKind,
    samples: &[Vec<Complex64>],
    cfg: &QuadratureConfig,
) -> Result<CheckReport> {
    if !(0.0 < theta0 && theta0 < theta1 && theta1 < 1.0) {
        return Err(LabError::Input(format!(
            "need 0 < theta0 < theta1 < 1, got {theta0}, {theta1}"
        )));
    }
    let grid = theta_grid(theta0, theta1, 8);
    let mut report = CheckReport::new("delta-condition");
    match method {
        FamilyKind::Real { q } => {
            for x in samples {
                let profile = KProfile::new(x, couple, cfg)?;
                let norms = grid.iter().map(|&th| profile.norm(th, q)).collect::<Result<Vec<_>>>()?;
                let (b0, b1) = (norms[0], norms[grid.len() - 1]);
                let ends_lower = b0.lower.max(b1.lower);
                let mut sup_upper = 0.0f64;
                for (th, b) in grid.iter().zip(&norms) {
                    sup_upper = sup_upper.max(b.upper);
                    let ok = b.upper <= 2.0 * ends_lower * (1.0 + 1e-12);
                    if ends_lower > 0.0 {
                        report.diagnostic_max("max_ratio_to_endpoints", b.upper / ends_lower);
                    }
                    report.record(ok, || json!({"x": format!("{x:?}"), "theta": th, "norm": b, "theta0": b0, "theta1": b1}));
                }
                report.record(ends_lower <= sup_upper, || json!({"x": format!("{x:?}"), "kind": "sup"}));
            }
        }
        FamilyKind::Calderon => {
            let e0 = calderon_space_unchecked(couple, theta0);
            let e1 = calderon_space_unchecked(couple, theta1);
            for x in samples {
                let (n0, n1) = (e0.norm(x)?, e1.norm(x)?);
                for &th in &grid[1..grid.len() - 1] {
                    let lambda = (th - theta0) / (theta1 - theta0);
                    let nt = calderon_space_unchecked(couple, th).norm(x)?;
                    let bound = n0.powf(1.0 - lambda) * n1.powf(lambda);
                    report.record(nt <= bound * (1.0 + 1e-12), || json!({"x": format!("{x:?}"), "theta": th, "norm": nt, "bound": bound}));
                }
            }
        }
    }
    Ok(report)
}

fn weights_match(a: &WeightedSpace, b: &WeightedSpace, rel: f64) -> bool {
    (a.p.recip() - b.p.recip()).abs() <= rel
        && a.weights.iter().zip(&b.weights).all(|(x, y)| (x - y).abs() <= rel * x.abs().max(y.abs()))
}

/// Reiteration at `θ = (1−λ)θ_0 + λθ_1`.
///
/// Calderón: the iterated product space must coincide with the direct one
/// (exponent and weights to 1e-12 relative). Real: the ratio of the iterated
/// norm (via the Holmstedt formula on the same K profile) to the direct norm is
/// measured on the samples and its spread `sup/inf` is reported.
pub fn reiteration_check(
    couple: &BanachCouple,
    theta0: f64,
    theta1: f64,
    lambda: f64,
    method: FamilyKind,
    samples: &[Vec<Complex64>],
    cfg: &QuadratureConfig,
) -> Result<CheckReport> {
    for (name, v) in [("theta0", theta0), ("theta1", theta1), ("lambda", lambda)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(LabError::Input(format!("{name} must lie in (0, 1), got {v}")));
        }
    }
    let theta = (1.0 - lambda) * theta0 + lambda * theta1;
    let mut report = CheckReport::new("reiteration");
    match method {
        FamilyKind::Calderon => {
            let inner = BanachCouple {
                space0: calderon_space_unchecked(couple, theta0),
                space1: calderon_space_unchecked(couple, theta1),
            };
            let iterated = calderon_space_unchecked(&inner, lambda);
            let direct = calderon_space_unchecked(couple, theta);
            report.record(weights_match(&iterated, &direct, 1e-12), || {
                json!({"iterated": iterated, "direct": direct})
            });
        }
        FamilyKind::Real { q } => {
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for x in samples {
                let profile = KProfile::new(x, couple, cfg)?;
                let direct = profile.norm(theta, q)?;
                if direct.upper == 0.0 {
                    continue;
                }
                let iterated = holmstedt_iterated_norm(&profile, theta0, theta1, lambda, q, cfg);
                let ratio = iterated / direct.midpoint();
                report.record(ratio.is_finite() && ratio > 0.0, || json!({"x": format!("{x:?}"), "ratio": ratio}));
                lo = lo.min(ratio);
                hi = hi.max(ratio);
            }
            if hi > 0.0 {
                report.diagnostic("ratio_min", lo);
                report.diagnostic("ratio_max", hi);
                report.diagnostic("equivalence_spread", hi / lo);
            }
        }
    }
    Ok(report)
}

/// `(X_{θ0,q}, X_{θ1,q})_{λ,q}` norm estimate from Holmstedt's formula
/// `K(t; X_{θ0,q}, X_{θ1,q}) ≈ (∫_0^{s} (u^{−θ0}K)^q du/u)^{1/q} + t(∫_s^∞ (u^{−θ1}K)^q du/u)^{1/q}`,
/// `s = t^{1/(θ1−θ0)}`. Diagnostic only: trapezoid rule, midpoint K.
fn holmstedt_iterated_norm(profile: &KProfile, theta0: f64, theta1: f64, lambda: f64, q: Exponent, cfg: &QuadratureConfig) -> f64 {
    let (c_lo, c_hi) = profile.saturation();
    let span = theta1 - theta0;
    let qf = if let Exponent::Finite(q) = q { q } else { 1.0 };
    let decay = (span * lambda.min(1.0 - lambda) * qf).max(1e-3);
    let extra = (14.0 / decay).min(200.0);
    let (a, b) = (c_lo.min(cfg.t_min).log10() - extra, c_hi.max(cfg.t_max).log10() + extra);
    let ppd = cfg.points_per_decade.max(8) as f64;
    let n = ((b - a) * ppd).ceil() as usize + 1;
    let ls: Vec<f64> = (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect();
    let s: Vec<f64> = ls.iter().map(|l| 10f64.powf(*l)).collect();
    let k: Vec<f64> = s.iter().map(|&t| profile.k_estimate(t)).collect();
    let h = (b - a) / (n - 1) as f64 * std::f64::consts::LN_10;
    match q {
        Exponent::Finite(q) => {
            let f0: Vec<f64> = s.iter().zip(&k).map(|(t, kv)| (t.powf(-theta0) * kv).powf(q)).collect();
            let f1: Vec<f64> = s.iter().zip(&k).map(|(t, kv)| (t.powf(-theta1) * kv).powf(q)).collect();
            let n1 = profile.n1 * profile.scale;
            let mut cum0 = vec![n1.powf(q) * s[0].powf((1.0 - theta0) * q) / ((1.0 - theta0) * q); n];
            for i in 1..n {
                cum0[i] = cum0[i - 1] + 0.5 * h * (f0[i - 1] + f0[i]);
            }
            let mut cum1 = vec![profile.scale.powf(q) * s[n - 1].powf(-theta1 * q) / (theta1 * q); n];
            for i in (0..n - 1).rev() {
                cum1[i] = cum1[i + 1] + 0.5 * h * (f1[i] + f1[i + 1]);
            }
            let g: Vec<f64> = (0..n)
                .map(|i| {
                    let t = s[i].powf(span);
                    (t.powf(-lambda) * (cum0[i].powf(1.0 / q) + t * cum1[i].powf(1.0 / q))).powf(q)
                })
                .collect();
            let total: f64 = (1..n).map(|i| 0.5 * h * span * (g[i - 1] + g[i])).sum();
            total.powf(1.0 / q)
        }
        Exponent::Infinite => {
            let mut run0 = vec![0.0; n];
            let mut acc = 0.0f64;
            for i in 0..n {
                acc = acc.max(s[i].powf(-theta0) * k[i]);
                run0[i] = acc;
            }
            let mut run1 = vec![0.0; n];
            acc = 0.0;
            for i in (0..n).rev() {
                acc = acc.max(s[i].powf(-theta1) * k[i]);
                run1[i] = acc;
            }
            (0..n)
                .map(|i| {
                    let t = s[i].powf(span);
                    t.powf(-lambda) * (run0[i] + t * run1[i])
                })
                .fold(0.0, f64::max)
        }
    }
}
