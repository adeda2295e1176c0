//! Finite-dimensional weighted sequence spaces and couples of them.
//!
//! Every space is `C^dim` with the norm `(Σ (w_i |x_i|)^p)^{1/p}` (or the
//! weighted maximum for `p = ∞`). These are Banach lattices with the Fatou
//! property, so the intersection, the sum, and every intermediate space of a
//! couple coincide as sets and only the norms differ.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{check_dim, LabError, Result};

/// Lebesgue exponent in `[1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_infinite() && p > 0.0 {
            Ok(Exponent::Infinite)
        } else if p.is_finite() && p >= 1.0 {
            Ok(Exponent::Finite(p))
        } else {
            Err(LabError::Input(format!("exponent must lie in [1, inf], got {p}")))
        }
    }

    /// `1/p`, with `1/∞ = 0`.
    pub fn recip(self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Infinite => 0.0,
        }
    }

    /// Inverse of [`Exponent::recip`]. Values within 1e-12 of 0, 1/2 or 1 snap
    /// to the exact exponents so that closed-form operator norms stay available.
    pub fn from_recip(r: f64) -> Self {
        if r <= 1e-12 {
            Exponent::Infinite
        } else if (r - 1.0).abs() <= 1e-12 {
            Exponent::Finite(1.0)
        } else if (r - 0.5).abs() <= 1e-12 {
            Exponent::Finite(2.0)
        } else {
            Exponent::Finite(1.0 / r.min(1.0))
        }
    }

    /// Hölder conjugate exponent.
    pub fn conjugate(self) -> Self {
        Exponent::from_recip(1.0 - self.recip())
    }

    pub fn is_one(self) -> bool {
        matches!(self, Exponent::Finite(p) if p == 1.0)
    }

    pub fn is_two(self) -> bool {
        matches!(self, Exponent::Finite(p) if p == 2.0)
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinite)
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => s.serialize_f64(*p),
            Exponent::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let p = match Raw::deserialize(d)? {
            Raw::Num(p) => p,
            Raw::Text(s) => match s.trim().to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "∞" => f64::INFINITY,
                other => other
                    .parse::<f64>()
                    .map_err(|_| serde::de::Error::custom(format!("invalid exponent '{s}'")))?,
            },
        };
        Exponent::new(p).map_err(serde::de::Error::custom)
    }
}

/// Weighted `ℓ_p` norm of a vector of magnitudes, computed with rescaling so
/// that large weights do not overflow.
pub(crate) fn weighted_norm_abs(p: Exponent, weights: &[f64], mags: &[f64]) -> f64 {
    match p {
        Exponent::Infinite => weights
            .iter()
            .zip(mags)
            .map(|(w, a)| w * a.abs())
            .fold(0.0, f64::max),
        Exponent::Finite(1.0) => weights.iter().zip(mags).map(|(w, a)| w * a.abs()).sum(),
        Exponent::Finite(p) => {
            let scale = weights
                .iter()
                .zip(mags)
                .map(|(w, a)| w * a.abs())
                .fold(0.0, f64::max);
            if scale == 0.0 {
                return 0.0;
            }
            let sum: f64 = weights
                .iter()
                .zip(mags)
                .map(|(w, a)| (w * a.abs() / scale).powf(p))
                .sum();
            scale * sum.powf(1.0 / p)
        }
    }
}

/// Unweighted `ℓ_p` norm of magnitudes.
pub(crate) fn lp_norm(p: Exponent, mags: &[f64]) -> f64 {
    match p {
        Exponent::Infinite => mags.iter().fold(0.0, |m, a| m.max(a.abs())),
        Exponent::Finite(1.0) => mags.iter().map(|a| a.abs()).sum(),
        Exponent::Finite(p) => {
            let scale = mags.iter().fold(0.0, |m: f64, a| m.max(a.abs()));
            if scale == 0.0 {
                return 0.0;
            }
            scale * mags.iter().map(|a| (a.abs() / scale).powf(p)).sum::<f64>().powf(1.0 / p)
        }
    }
}

/// A weighted `ℓ_p` space on `C^dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedSpace {
    pub p: Exponent,
    pub weights: Vec<f64>,
}

impl WeightedSpace {
    pub fn new(p: Exponent, weights: Vec<f64>) -> Result<Self> {
        let space = WeightedSpace { p, weights };
        space.validate()?;
        Ok(space)
    }

    /// Unweighted `ℓ_p` on `C^dim`.
    pub fn unweighted(p: Exponent, dim: usize) -> Result<Self> {
        WeightedSpace::new(p, vec![1.0; dim])
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.is_empty() {
            return Err(LabError::Input("space must have positive dimension".into()));
        }
        if let Exponent::Finite(p) = self.p {
            if !(p.is_finite() && p >= 1.0) {
                return Err(LabError::Input(format!("exponent must lie in [1, inf], got {p}")));
            }
        }
        for (i, w) in self.weights.iter().enumerate() {
            if !(w.is_finite() && *w > 0.0) {
                return Err(LabError::Input(format!(
                    "weights[{i}] must be strictly positive and finite, got {w}"
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn norm(&self, x: &[Complex64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        let mags: Vec<f64> = x.iter().map(|z| z.norm()).collect();
        Ok(self.norm_abs(&mags))
    }

    /// Norm of a vector given by coordinate magnitudes (no dimension check).
    pub fn norm_abs(&self, mags: &[f64]) -> f64 {
        weighted_norm_abs(self.p, &self.weights, mags)
    }

    /// Norm of the dual space: weighted `ℓ_{p'}` with reciprocal weights.
    pub fn dual_norm_abs(&self, mags: &[f64]) -> f64 {
        match self.p.conjugate() {
            Exponent::Infinite => self
                .weights
                .iter()
                .zip(mags)
                .map(|(w, a)| a.abs() / w)
                .fold(0.0, f64::max),
            q => {
                let scaled: Vec<f64> = self.weights.iter().zip(mags).map(|(w, a)| a.abs() / w).collect();
                lp_norm(q, &scaled)
            }
        }
    }

    /// A subgradient of the norm at the magnitude vector `mags` (all entries
    /// nonnegative). The result `y` satisfies `<mags, y> = norm(mags)` and has
    /// dual norm one, or is zero when `mags = 0`.
    pub fn norm_gradient_abs(&self, mags: &[f64]) -> Vec<f64> {
        let n = self.norm_abs(mags);
        let mut grad = vec![0.0; mags.len()];
        if n == 0.0 {
            return grad;
        }
        match self.p {
            Exponent::Infinite => {
                let (k, _) = self
                    .weights
                    .iter()
                    .zip(mags)
                    .map(|(w, a)| w * a)
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });
                grad[k] = self.weights[k];
            }
            Exponent::Finite(1.0) => {
                grad.copy_from_slice(&self.weights);
            }
            Exponent::Finite(p) => {
                for (i, g) in grad.iter_mut().enumerate() {
                    let w = self.weights[i];
                    *g = w * (w * mags[i] / n).powf(p - 1.0);
                }
            }
        }
        grad
    }
}

/// Exact norm of the diagonal map `x ↦ (d_i x_i)` between two weighted spaces.
///
/// For `p_from ≤ p_to` this is the largest weighted entry; otherwise it is the
/// `ℓ_s` norm of the weighted entries with `1/s = 1/p_to − 1/p_from`.
pub fn diagonal_norm(diag: &[f64], from: &WeightedSpace, to: &WeightedSpace) -> f64 {
    let scaled: Vec<f64> = diag
        .iter()
        .zip(from.weights.iter().zip(&to.weights))
        .map(|(d, (wf, wt))| d.abs() * wt / wf)
        .collect();
    let gap = to.p.recip() - from.p.recip();
    if gap <= 0.0 {
        lp_norm(Exponent::Infinite, &scaled)
    } else {
        lp_norm(Exponent::from_recip(gap), &scaled)
    }
}

/// Norm of the identity map `from → to`.
pub fn identity_norm(from: &WeightedSpace, to: &WeightedSpace) -> f64 {
    diagonal_norm(&vec![1.0; from.dim()], from, to)
}

/// Standard weighted `ℓ_p` norm of `x` in `space`.
pub fn space_norm(x: &[Complex64], space: &WeightedSpace) -> Result<f64> {
    space.norm(x)
}

/// An ordered pair `(X_0, X_1)` of weighted spaces on the same index set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BanachCouple {
    pub space0: WeightedSpace,
    pub space1: WeightedSpace,
}

impl BanachCouple {
    pub fn new(space0: WeightedSpace, space1: WeightedSpace) -> Result<Self> {
        space0.validate()?;
        space1.validate()?;
        check_dim(space0.dim(), space1.dim())?;
        Ok(BanachCouple { space0, space1 })
    }

    /// The couple `(X, X)`.
    pub fn diagonal(space: WeightedSpace) -> Result<Self> {
        BanachCouple::new(space.clone(), space)
    }

    pub fn dim(&self) -> usize {
        self.space0.dim()
    }

    pub fn endpoint(&self, j: usize) -> &WeightedSpace {
        if j == 0 {
            &self.space0
        } else {
            &self.space1
        }
    }

    /// The couple `(X_1, X_0)`; parameter `θ` of the original corresponds to `1 − θ`.
    pub fn reversed(&self) -> Self {
        BanachCouple {
            space0: self.space1.clone(),
            space1: self.space0.clone(),
        }
    }
}

/// Convenience: embed a real vector into `C^n`.
pub fn complexify(x: &[f64]) -> Vec<Complex64> {
    x.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: &[f64]) -> Vec<Complex64> {
        complexify(v)
    }

    #[test]
    fn norm_examples() {
        let l1 = WeightedSpace::unweighted(Exponent::Finite(1.0), 2).unwrap();
        let l2 = WeightedSpace::unweighted(Exponent::Finite(2.0), 2).unwrap();
        assert_eq!(space_norm(&c(&[0.0, 0.0]), &l1).unwrap(), 0.0);
        assert_eq!(space_norm(&c(&[1.0, 2.0]), &l1).unwrap(), 3.0);
        assert!((space_norm(&c(&[3.0, 4.0]), &l2).unwrap() - 5.0).abs() < 1e-15);
    }

    #[test]
    fn infinite_exponent_uses_weighted_max() {
        let s = WeightedSpace::new(Exponent::Infinite, vec![2.0, 0.5]).unwrap();
        assert_eq!(s.norm(&c(&[1.0, 3.0])).unwrap(), 2.0);
    }

    #[test]
    fn rejects_bad_weights_and_dimensions() {
        assert!(WeightedSpace::new(Exponent::Finite(2.0), vec![1.0, 0.0]).is_err());
        assert!(WeightedSpace::new(Exponent::Finite(2.0), vec![1.0, f64::NAN]).is_err());
        assert!(Exponent::new(0.5).is_err());
        let s = WeightedSpace::unweighted(Exponent::Finite(2.0), 3).unwrap();
        assert!(matches!(s.norm(&c(&[1.0])), Err(LabError::Dimension { .. })));
        let t = WeightedSpace::unweighted(Exponent::Finite(2.0), 2).unwrap();
        assert!(BanachCouple::new(s, t).is_err());
    }

    #[test]
    fn dual_norm_and_gradient_are_consistent() {
        for p in [1.0, 1.5, 2.0, 4.0, f64::INFINITY] {
            let s = WeightedSpace::new(Exponent::new(p).unwrap(), vec![0.5, 2.0, 3.0]).unwrap();
            let a = [0.3, 1.2, 0.7];
            let g = s.norm_gradient_abs(&a);
            let pairing: f64 = g.iter().zip(&a).map(|(x, y)| x * y).sum();
            assert!((pairing - s.norm_abs(&a)).abs() < 1e-12, "p={p}");
            assert!((s.dual_norm_abs(&g) - 1.0).abs() < 1e-12, "p={p}");
        }
    }

    #[test]
    fn diagonal_norm_matches_sampling() {
        let from = WeightedSpace::new(Exponent::Finite(4.0), vec![1.0, 2.0]).unwrap();
        let to = WeightedSpace::new(Exponent::Finite(1.5), vec![3.0, 0.5]).unwrap();
        let d = [1.0, -2.0];
        let exact = diagonal_norm(&d, &from, &to);
        let mut best: f64 = 0.0;
        for k in 0..=2000 {
            let phi = k as f64 / 2000.0 * std::f64::consts::FRAC_PI_2;
            let x = [phi.cos(), phi.sin()];
            let y = [d[0] * x[0], d[1] * x[1]];
            best = best.max(to.norm_abs(&y) / from.norm_abs(&x));
        }
        assert!(best <= exact * (1.0 + 1e-12));
        assert!(best >= exact * (1.0 - 1e-4));
    }

    #[test]
    fn exponent_parses_from_text() {
        let e: Exponent = serde_json::from_str("\"inf\"").unwrap();
        assert_eq!(e, Exponent::Infinite);
        let e: Exponent = serde_json::from_str("2.5").unwrap();
        assert_eq!(e, Exponent::Finite(2.5));
        assert!(serde_json::from_str::<Exponent>("0.2").is_err());
    }
}
