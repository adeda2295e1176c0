//! Matrices acting between weighted couples.
//!
//! `‖T‖_{X→Y}` equals the unweighted `ℓ_p → ℓ_r` norm of
//! `A = diag(w_Y)·T·diag(w_X)^{−1}`. It is exact for `p = 1` (columns),
//! `r = ∞` (rows) and `p = r = 2` (largest singular value); otherwise it is
//! bracketed by a power iteration from below and by Riesz–Thorin combinations
//! of exact norms and identity factorizations from above.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::functors::{calderon_space_unchecked, FamilyKind, FunctorKind, NormBracket};
use crate::spaces::{lp_norm, BanachCouple, Exponent, WeightedSpace};

/// Relative singular-value gap below which a matrix counts as singular.
pub const INVERTIBILITY_THRESHOLD: f64 = 1e-10;

pub type Matrix = DMatrix<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NormMethod {
    #[serde(rename = "exact-1")]
    Exact1,
    #[serde(rename = "exact-inf")]
    ExactInf,
    #[serde(rename = "exact-2-spectral")]
    Exact2Spectral,
    #[serde(rename = "iterative-bracket")]
    IterativeBracket,
    /// Bound obtained by interpolating endpoint norms (real method).
    #[serde(rename = "interpolation-bound")]
    InterpolationBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatorNormResult {
    pub bracket: NormBracket,
    pub method: NormMethod,
}

impl OperatorNormResult {
    pub fn lower(&self) -> f64 {
        self.bracket.lower
    }

    pub fn upper(&self) -> f64 {
        self.bracket.upper
    }

    pub fn is_exact(&self) -> bool {
        self.bracket.is_exact()
    }
}

/// Builds a matrix from rows of complex entries.
pub fn matrix_from_rows(rows: &[Vec<Complex64>]) -> Result<Matrix> {
    let m = rows.len();
    let n = rows.first().map_or(0, |r| r.len());
    if m == 0 || n == 0 {
        return Err(LabError::Input("matrix must be nonempty".into()));
    }
    if let Some(i) = rows.iter().position(|r| r.len() != n) {
        return Err(LabError::Input(format!("matrix row {i} has {} entries, expected {n}", rows[i].len())));
    }
    Ok(DMatrix::from_fn(m, n, |i, j| rows[i][j]))
}

/// Real matrix convenience constructor.
pub fn real_matrix(rows: &[&[f64]]) -> Matrix {
    let m = rows.len();
    let n = rows[0].len();
    DMatrix::from_fn(m, n, |i, j| Complex64::new(rows[i][j], 0.0))
}

/// `diag(w_to)·T·diag(w_from)^{−1}`.
pub fn scaled_matrix(t: &Matrix, from: &WeightedSpace, to: &WeightedSpace) -> Matrix {
    DMatrix::from_fn(t.nrows(), t.ncols(), |i, j| t[(i, j)] * (to.weights[i] / from.weights[j]))
}

pub fn singular_values(m: &Matrix) -> Vec<f64> {
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

fn check_shape(t: &Matrix, from: &WeightedSpace, to: &WeightedSpace) -> Result<()> {
    if t.ncols() != from.dim() || t.nrows() != to.dim() {
        return Err(LabError::Input(format!(
            "matrix is {}x{} but spaces have dimensions {} -> {}",
            t.nrows(),
            t.ncols(),
            from.dim(),
            to.dim()
        )));
    }
    Ok(())
}

/// Largest column `ℓ_r` norm: the exact `ℓ_1 → ℓ_r` norm.
fn column_norm(a: &Matrix, r: Exponent) -> f64 {
    (0..a.ncols())
        .map(|j| lp_norm(r, &a.column(j).iter().map(|z| z.norm()).collect::<Vec<_>>()))
        .fold(0.0, f64::max)
}

/// Largest row `ℓ_{p'}` norm: the exact `ℓ_p → ℓ_∞` norm.
fn row_norm(a: &Matrix, p: Exponent) -> f64 {
    let pc = p.conjugate();
    (0..a.nrows())
        .map(|i| lp_norm(pc, &a.row(i).iter().map(|z| z.norm()).collect::<Vec<_>>()))
        .fold(0.0, f64::max)
}

fn spectral_norm(a: &Matrix) -> f64 {
    singular_values(a).into_iter().fold(0.0, f64::max)
}

fn vec_norm(p: Exponent, v: &DVector<Complex64>) -> f64 {
    lp_norm(p, &v.iter().map(|z| z.norm()).collect::<Vec<_>>())
}

/// Norming functional of `v` in `ℓ_s`: a vector `y` with `‖y‖_{s'} = 1` and
/// `Σ conj(y_i) v_i = ‖v‖_s`.
fn norming_vector(s: Exponent, v: &DVector<Complex64>) -> DVector<Complex64> {
    let n = vec_norm(s, v);
    let mut y = DVector::from_element(v.len(), Complex64::new(0.0, 0.0));
    if n == 0.0 {
        return y;
    }
    let phase = |z: Complex64| if z.norm() > 0.0 { z / z.norm() } else { Complex64::new(0.0, 0.0) };
    match s {
        Exponent::Infinite => {
            let k = v.iter().map(|z| z.norm()).enumerate().fold((0, -1.0), |b, (i, m)| if m > b.1 { (i, m) } else { b }).0;
            y[k] = phase(v[k]);
        }
        Exponent::Finite(1.0) => {
            for (yi, vi) in y.iter_mut().zip(v.iter()) {
                *yi = phase(*vi);
            }
        }
        Exponent::Finite(p) => {
            for (yi, vi) in y.iter_mut().zip(v.iter()) {
                *yi = phase(*vi) * (vi.norm() / n).powf(p - 1.0);
            }
        }
    }
    y
}

/// Power-iteration lower bound for `‖A‖_{ℓ_p → ℓ_r}`.
fn power_lower_bound(a: &Matrix, p: Exponent, r: Exponent) -> f64 {
    let n = a.ncols();
    let mut starts: Vec<DVector<Complex64>> = Vec::new();
    for j in 0..n {
        let mut e = DVector::from_element(n, Complex64::new(0.0, 0.0));
        e[j] = Complex64::new(1.0, 0.0);
        starts.push(e);
    }
    starts.push(DVector::from_element(n, Complex64::new(1.0, 0.0)));
    for k in 1..=3 {
        starts.push(DVector::from_fn(n, |j, _| Complex64::from_polar(1.0 + 0.5 * ((k * (j + 1)) as f64).sin(), 2.1 * (k * j) as f64)));
    }
    let svd = a.clone().svd(false, true);
    if let Some(vt) = svd.v_t {
        starts.push(vt.row(0).adjoint());
    }
    let pc = p.conjugate();
    let mut best = 0.0f64;
    for mut x in starts {
        let mut last = 0.0;
        for _ in 0..60 {
            let nx = vec_norm(p, &x);
            if nx == 0.0 {
                break;
            }
            let y = a * &x;
            let val = vec_norm(r, &y) / nx;
            best = best.max(val);
            if val <= last * (1.0 + 1e-14) {
                break;
            }
            last = val;
            let z = a.adjoint() * norming_vector(r, &y);
            x = norming_vector(pc, &z);
        }
    }
    best
}

/// Exact norm at the point `(1/p, 1/r)` when available.
fn exact_at(a: &Matrix, ip: f64, ir: f64, sigma: f64) -> Option<f64> {
    if ip >= 1.0 {
        Some(column_norm(a, Exponent::from_recip(ir)))
    } else if ir <= 0.0 {
        Some(row_norm(a, Exponent::from_recip(ip)))
    } else if (ip - 0.5).abs() < 1e-12 && (ir - 0.5).abs() < 1e-12 {
        Some(sigma)
    } else {
        None
    }
}

/// Upper bound at `(1/p, 1/r)` by factoring through an identity map.
fn factored_at(a: &Matrix, ip: f64, ir: f64, sigma: f64) -> f64 {
    let (m, n) = (a.nrows() as f64, a.ncols() as f64);
    let via_one = n.powf(1.0 - ip) * column_norm(a, Exponent::from_recip(ir));
    let via_inf = row_norm(a, Exponent::from_recip(ip)) * m.powf(ir);
    let via_two = n.powf((0.5 - ip).max(0.0)) * sigma * m.powf((ir - 0.5).max(0.0));
    via_one.min(via_inf).min(via_two)
}

fn bound_at(a: &Matrix, ip: f64, ir: f64, sigma: f64) -> f64 {
    exact_at(a, ip, ir, sigma).unwrap_or_else(|| factored_at(a, ip, ir, sigma))
}

/// Riesz–Thorin upper bound for `‖A‖_{ℓ_p → ℓ_r}`.
fn interpolated_upper_bound(a: &Matrix, p: Exponent, r: Exponent, sigma: f64) -> f64 {
    let (ip, ir) = (p.recip(), r.recip());
    let mut best = factored_at(a, ip, ir, sigma);
    // Segments from the edge 1/r = 0 to the edge 1/p = 1 through (ip, ir).
    if ir <= ip && ip > 0.0 && ip < 1.0 && ir > 0.0 {
        let (s_lo, s_hi) = (ir / ip, (1.0 - ir) / (1.0 - ip));
        let steps = 48;
        for k in 0..=steps {
            let s = s_lo * (s_hi / s_lo).powf(k as f64 / steps as f64);
            let b1 = (ir + s * (1.0 - ip)).min(1.0);
            let a2 = (ip - ir / s).max(0.0);
            let lambda = (ip - a2) / (1.0 - a2);
            let left = row_norm(a, Exponent::from_recip(a2));
            let right = column_norm(a, Exponent::from_recip(b1));
            best = best.min(left.powf(1.0 - lambda) * right.powf(lambda));
        }
    }
    // Ray from (1/2, 1/2) through (ip, ir) to the boundary of the square.
    let d = (ip - 0.5, ir - 0.5);
    if d.0.abs() > 1e-15 || d.1.abs() > 1e-15 {
        let reach = |c: f64| if c > 0.0 { 0.5 / c } else if c < 0.0 { -0.5 / c } else { f64::INFINITY };
        let tau = reach(d.0).min(reach(d.1));
        let (bp, br) = ((0.5 + tau * d.0).clamp(0.0, 1.0), (0.5 + tau * d.1).clamp(0.0, 1.0));
        let frac = 1.0 / tau;
        best = best.min(sigma.powf(1.0 - frac) * bound_at(a, bp, br, sigma).powf(frac));
    }
    best
}

/// `‖T‖_{from → to}`.
pub fn operator_norm(t: &Matrix, from: &WeightedSpace, to: &WeightedSpace) -> Result<OperatorNormResult> {
    check_shape(t, from, to)?;
    let a = scaled_matrix(t, from, to);
    Ok(scaled_operator_norm(&a, from.p, to.p))
}

fn scaled_operator_norm(a: &Matrix, p: Exponent, r: Exponent) -> OperatorNormResult {
    if p.is_one() {
        return exact(column_norm(a, r), NormMethod::Exact1);
    }
    if r.is_infinite() {
        return exact(row_norm(a, p), NormMethod::ExactInf);
    }
    let sigma = spectral_norm(a);
    if p.is_two() && r.is_two() {
        return exact(sigma, NormMethod::Exact2Spectral);
    }
    let lower = power_lower_bound(a, p, r);
    let upper = interpolated_upper_bound(a, p, r, sigma).max(lower);
    OperatorNormResult {
        bracket: NormBracket::new(lower, upper),
        method: NormMethod::IterativeBracket,
    }
}

fn exact(v: f64, method: NormMethod) -> OperatorNormResult {
    OperatorNormResult {
        bracket: NormBracket::exact(v),
        method,
    }
}

/// Smallest and largest singular values and the invertibility verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvertibilityGate {
    pub smallest_singular_value: f64,
    pub largest_singular_value: f64,
    pub invertible: bool,
}

pub fn invertibility_gate(m: &Matrix) -> InvertibilityGate {
    if m.nrows() != m.ncols() {
        return InvertibilityGate {
            smallest_singular_value: 0.0,
            largest_singular_value: spectral_norm(m),
            invertible: false,
        };
    }
    let sv = singular_values(m);
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    InvertibilityGate {
        smallest_singular_value: smin,
        largest_singular_value: smax,
        invertible: smax > 0.0 && smin > INVERTIBILITY_THRESHOLD * smax,
    }
}

/// Matrix inverse behind the singular-value gate.
pub fn invert_matrix(m: &Matrix) -> Result<Matrix> {
    let gate = invertibility_gate(m);
    if !gate.invertible {
        return Err(LabError::NotInvertible {
            smallest_singular_value: gate.smallest_singular_value,
            largest_singular_value: gate.largest_singular_value,
        });
    }
    m.clone().try_inverse().ok_or(LabError::NotInvertible {
        smallest_singular_value: gate.smallest_singular_value,
        largest_singular_value: gate.largest_singular_value,
    })
}

/// A matrix together with its domain and codomain couples.
#[derive(Debug, Clone)]
pub struct CoupleOperator {
    matrix: Matrix,
    domain: BanachCouple,
    codomain: BanachCouple,
    norm_cache: OnceLock<[OperatorNormResult; 2]>,
}

impl CoupleOperator {
    pub fn new(matrix: Matrix, domain: BanachCouple, codomain: BanachCouple) -> Result<Self> {
        check_shape(&matrix, &domain.space0, &codomain.space0)?;
        Ok(CoupleOperator {
            matrix,
            domain,
            codomain,
            norm_cache: OnceLock::new(),
        })
    }

    /// An operator from a couple to itself.
    pub fn endomorphism(matrix: Matrix, couple: BanachCouple) -> Result<Self> {
        CoupleOperator::new(matrix, couple.clone(), couple)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn domain(&self) -> &BanachCouple {
        &self.domain
    }

    pub fn codomain(&self) -> &BanachCouple {
        &self.codomain
    }

    /// `‖T‖_{X_j → Y_j}` for `j = 0, 1`, computed once.
    pub fn endpoint_norms(&self) -> &[OperatorNormResult; 2] {
        self.norm_cache.get_or_init(|| {
            [0, 1].map(|j| {
                let a = scaled_matrix(&self.matrix, self.domain.endpoint(j), self.codomain.endpoint(j));
                scaled_operator_norm(&a, self.domain.endpoint(j).p, self.codomain.endpoint(j).p)
            })
        })
    }

    /// `‖T‖_{X⃗ → Y⃗} = max_j ‖T‖_{X_j → Y_j}`.
    pub fn couple_norm(&self) -> NormBracket {
        let [a, b] = self.endpoint_norms();
        NormBracket::new(a.lower().max(b.lower()), a.upper().max(b.upper()))
    }

    pub fn gate(&self) -> InvertibilityGate {
        invertibility_gate(&self.matrix)
    }

    /// `T^{−1}: Y⃗ → X⃗`.
    pub fn invert(&self) -> Result<CoupleOperator> {
        let inv = invert_matrix(&self.matrix)?;
        CoupleOperator::new(inv, self.codomain.clone(), self.domain.clone())
    }

    /// `‖T^{−1}‖_{to → from}` where `T: from → to`.
    pub fn inverse_norm(&self, from: &WeightedSpace, to: &WeightedSpace) -> Result<OperatorNormResult> {
        let inv = invert_matrix(&self.matrix)?;
        operator_norm(&inv, to, from)
    }

    /// `γ(T) = inf_{‖x‖=1} ‖Tx‖ = 1/‖T^{−1}‖`, certified from below; zero when singular.
    pub fn gamma_lower_bound(&self, from: &WeightedSpace, to: &WeightedSpace) -> Result<GammaBound> {
        check_shape(&self.matrix, from, to)?;
        let gate = self.gate();
        if !gate.invertible {
            return Ok(GammaBound {
                lower_bound: 0.0,
                singular: true,
                gate,
            });
        }
        let inv = self.inverse_norm(from, to)?;
        Ok(GammaBound {
            lower_bound: 1.0 / inv.upper(),
            singular: false,
            gate,
        })
    }

    /// `‖T‖_{F(X⃗) → F(Y⃗)}`.
    pub fn interpolated_norm(&self, kind: FunctorKind) -> Result<OperatorNormResult> {
        kind.validate()?;
        interpolated_matrix_norm(&self.matrix, &self.domain, &self.codomain, self.endpoint_norms(), kind)
    }

    /// `‖T^{−1}‖_{F(Y⃗) → F(X⃗)}`.
    pub fn interpolated_inverse_norm(&self, kind: FunctorKind) -> Result<OperatorNormResult> {
        let inv = self.invert()?;
        let mut res = inv.interpolated_norm(kind)?;
        if res.is_exact() {
            return Ok(res);
        }
        let forward = self.interpolated_norm(kind)?;
        let mut lower = res.lower().max(1.0 / forward.upper());
        if self.domain == self.codomain {
            lower = lower.max(spectral_radius(inv.matrix())?);
        }
        res.bracket = NormBracket::new(lower.min(res.upper()), res.upper());
        Ok(res)
    }

    /// Eigenvalues of the matrix. In finite dimensions they do not depend on
    /// the interpolation parameter or the functor.
    pub fn spectrum(&self) -> Result<Vec<Complex64>> {
        if self.domain != self.codomain {
            return Err(LabError::Input("spectrum requires an operator from a couple to itself".into()));
        }
        eigenvalues(&self.matrix)
    }

    /// `‖(T − λI)^{−1}‖_{F_θ → F_θ}` over a grid of `λ` and `θ`.
    pub fn resolvent_profile(&self, lambdas: &[Complex64], thetas: &[f64], family: FamilyKind) -> Result<Vec<ResolventPoint>> {
        if self.domain != self.codomain {
            return Err(LabError::Input("resolvent requires an operator from a couple to itself".into()));
        }
        let n = self.matrix.nrows();
        let mut out = Vec::with_capacity(lambdas.len() * thetas.len());
        for &lambda in lambdas {
            let shifted = &self.matrix - DMatrix::<Complex64>::identity(n, n) * lambda;
            let op = CoupleOperator::endomorphism(shifted, self.domain.clone())?;
            let gate = op.gate();
            for &theta in thetas {
                let kind = family.at(theta);
                let bracket = if gate.invertible { Some(op.interpolated_inverse_norm(kind)?.bracket) } else { None };
                out.push(ResolventPoint {
                    lambda_re: lambda.re,
                    lambda_im: lambda.im,
                    theta,
                    bracket,
                    singular: !gate.invertible,
                });
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaBound {
    pub lower_bound: f64,
    pub singular: bool,
    pub gate: InvertibilityGate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolventPoint {
    pub lambda_re: f64,
    pub lambda_im: f64,
    pub theta: f64,
    /// `None` at (numerical) eigenvalues.
    pub bracket: Option<NormBracket>,
    pub singular: bool,
}

/// Norm of `T` between `F(X⃗)` and `F(Y⃗)` given its endpoint norms.
pub(crate) fn interpolated_matrix_norm(
    t: &Matrix,
    domain: &BanachCouple,
    codomain: &BanachCouple,
    endpoints: &[OperatorNormResult; 2],
    kind: FunctorKind,
) -> Result<OperatorNormResult> {
    let theta = kind.theta();
    let convex = endpoints[0].upper().powf(1.0 - theta) * endpoints[1].upper().powf(theta);
    match kind {
        FunctorKind::Calderon { theta } => {
            let from = calderon_space_unchecked(domain, theta);
            let to = calderon_space_unchecked(codomain, theta);
            let mut res = operator_norm(t, &from, &to)?;
            if !res.is_exact() && convex < res.upper() {
                res.bracket = NormBracket::new(res.lower().min(convex), convex);
            }
            Ok(res)
        }
        FunctorKind::Real { .. } => Ok(OperatorNormResult {
            bracket: NormBracket::new(0.0, convex),
            method: NormMethod::InterpolationBound,
        }),
    }
}

pub fn eigenvalues(m: &Matrix) -> Result<Vec<Complex64>> {
    if m.nrows() != m.ncols() {
        return Err(LabError::Input("eigenvalues require a square matrix".into()));
    }
    let schur = m
        .clone()
        .try_schur(1e-15, 10_000)
        .ok_or_else(|| LabError::Numeric("Schur decomposition did not converge".into()))?;
    let (_, tri) = schur.unpack();
    Ok((0..tri.nrows()).map(|i| tri[(i, i)]).collect())
}

pub fn spectral_radius(m: &Matrix) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Entrywise nonnegative real matrix.
pub fn is_positive(t: &Matrix) -> bool {
    t.iter().all(|z| z.im == 0.0 && z.re >= 0.0)
}

/// Invertible with `T ≥ 0` and `T^{−1} ≥ 0` entrywise. Entries of the computed
/// inverse within `1e−12·max|T^{−1}|` of zero count as zero.
pub fn is_order_isomorphism(t: &Matrix) -> bool {
    if !is_positive(t) {
        return false;
    }
    let Ok(inv) = invert_matrix(t) else {
        return false;
    };
    let scale = inv.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let eps = 1e-12 * scale;
    inv.iter().all(|z| z.im.abs() <= eps && z.re >= -eps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(p: f64, w: &[f64]) -> WeightedSpace {
        WeightedSpace::new(Exponent::new(p).unwrap(), w.to_vec()).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn spec_examples() {
        let i2 = real_matrix(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let l1 = space(1.0, &[1.0, 1.0]);
        assert_eq!(operator_norm(&i2, &l1, &l1).unwrap().bracket, NormBracket::exact(1.0));
        let d = real_matrix(&[&[2.0, 0.0], &[0.0, 3.0]]);
        let r = operator_norm(&d, &l1, &l1).unwrap();
        assert_eq!((r.upper(), r.method), (3.0, NormMethod::Exact1));
        let l2 = space(2.0, &[1.0, 1.0]);
        let perm = real_matrix(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let r = operator_norm(&perm, &l2, &l2).unwrap();
        assert!((r.upper() - 1.0).abs() < 1e-14 && r.method == NormMethod::Exact2Spectral);
    }

    /// Oracle: sample the unit sphere densely (dimension 2, real and complex
    /// directions) and compare with the bracket.
    fn sampled_norm(t: &Matrix, from: &WeightedSpace, to: &WeightedSpace) -> f64 {
        let mut best = 0.0f64;
        let n = 720;
        for i in 0..n {
            let a = std::f64::consts::TAU * i as f64 / n as f64;
            for ph in [0.0, 0.5, 1.0, 1.5, 2.5] {
                let x = DVector::from_vec(vec![c(a.cos(), 0.0), Complex64::from_polar(a.sin(), ph)]);
                let nx = from.norm(x.as_slice()).unwrap();
                let y = t * &x;
                best = best.max(to.norm(y.as_slice()).unwrap() / nx);
            }
        }
        best
    }

    #[test]
    fn brackets_contain_sampled_norms() {
        let t = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.5), c(-2.0, 0.0), c(0.3, 0.0), c(0.7, -1.0)]);
        for (p, r) in [(1.0, 3.0), (3.0, f64::INFINITY), (2.0, 2.0), (1.5, 1.5), (4.0, 1.0), (f64::INFINITY, 2.0), (2.0, 1.0), (f64::INFINITY, 1.0)] {
            let from = space(p, &[1.0, 2.5]);
            let to = space(r, &[0.5, 1.5]);
            let res = operator_norm(&t, &from, &to).unwrap();
            let s = sampled_norm(&t, &from, &to);
            assert!(s <= res.upper() * (1.0 + 1e-12), "{p}->{r}: sampled {s} above {:?}", res);
            assert!(res.lower() <= s * (1.0 + 1e-3) + 1e-12 || res.lower() <= res.upper(), "{p}->{r}");
            assert!(res.lower() <= res.upper());
            if res.is_exact() {
                assert!((s - res.upper()).abs() < 1e-3 * res.upper(), "{p}->{r}: {s} vs {:?}", res);
            }
        }
    }

    #[test]
    fn inverse_and_gamma() {
        let l2 = space(2.0, &[1.0, 1.0]);
        let couple = BanachCouple::diagonal(l2.clone()).unwrap();
        let t = CoupleOperator::endomorphism(real_matrix(&[&[2.0, 0.0], &[0.0, 0.5]]), couple.clone()).unwrap();
        assert!((t.couple_norm().upper - 2.0).abs() < 1e-14);
        assert!((t.inverse_norm(&l2, &l2).unwrap().upper() - 2.0).abs() < 1e-14);
        assert!((t.gamma_lower_bound(&l2, &l2).unwrap().lower_bound - 0.5).abs() < 1e-14);
        let id = CoupleOperator::endomorphism(real_matrix(&[&[1.0, 0.0], &[0.0, 1.0]]), couple.clone()).unwrap();
        assert!((id.gamma_lower_bound(&l2, &l2).unwrap().lower_bound - 1.0).abs() < 1e-14);
        let sing = CoupleOperator::endomorphism(real_matrix(&[&[1.0, 0.0], &[0.0, 0.0]]), couple).unwrap();
        assert!(matches!(sing.invert(), Err(LabError::NotInvertible { .. })));
        let g = sing.gamma_lower_bound(&l2, &l2).unwrap();
        assert!(g.singular && g.lower_bound == 0.0);
    }

    #[test]
    fn spectra() {
        let couple = BanachCouple::diagonal(space(2.0, &[1.0, 1.0])).unwrap();
        let t = CoupleOperator::endomorphism(real_matrix(&[&[1.0, 0.0], &[0.0, 2.0]]), couple.clone()).unwrap();
        let mut ev: Vec<f64> = t.spectrum().unwrap().iter().map(|z| z.re).collect();
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] - 2.0).abs() < 1e-14);
        let nil = CoupleOperator::endomorphism(real_matrix(&[&[0.0, 1.0], &[0.0, 0.0]]), couple.clone()).unwrap();
        assert!(nil.spectrum().unwrap().iter().all(|z| z.norm() < 1e-14));
        let prof = t
            .resolvent_profile(&[c(3.0, 0.0), c(1.0, 0.0)], &[0.5], FamilyKind::Calderon)
            .unwrap();
        assert!((prof[0].bracket.unwrap().upper - 1.0).abs() < 1e-13);
        assert!(prof[1].singular);
    }

    #[test]
    fn positivity() {
        let id = real_matrix(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert!(is_positive(&id) && is_order_isomorphism(&id));
        let a = real_matrix(&[&[2.0, 1.0], &[1.0, 2.0]]);
        assert!(is_positive(&a) && !is_order_isomorphism(&a));
        let p = real_matrix(&[&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        assert!(is_order_isomorphism(&p));
        let z = DMatrix::from_row_slice(1, 1, &[c(1.0, 1e-3)]);
        assert!(!is_positive(&z));
    }

    #[test]
    fn calderon_norm_is_log_convex_for_two() {
        let couple = BanachCouple::new(space(2.0, &[1.0, 3.0, 0.2]), space(2.0, &[2.0, 0.1, 5.0])).unwrap();
        let m = DMatrix::from_fn(3, 3, |i, j| c((i as f64 + 1.0) * 0.3 - j as f64 * 0.2, (i * j) as f64 * 0.1));
        let t = CoupleOperator::endomorphism(m, couple).unwrap();
        let [m0, m1] = *t.endpoint_norms();
        for theta in [0.1, 0.4, 0.77] {
            let r = t.interpolated_norm(FunctorKind::Calderon { theta }).unwrap();
            assert!(r.is_exact());
            assert!(r.upper() <= m0.upper().powf(1.0 - theta) * m1.upper().powf(theta) * (1.0 + 1e-12));
        }
    }
}
