//! Small-dimensional convex minimization with certified lower bounds.
//!
//! The central-cut ellipsoid method is slow per digit but every iterate where
//! the objective is evaluated yields a valid global lower bound
//! `f(x_k) − sqrt(g_kᵀ P_k g_k)` as long as the minimizer lies in the initial
//! ball. Callers may also supply an independent certificate (typically a dual
//! feasible point) which is checked periodically.

/// Options for [`ellipsoid_minimize`].
#[derive(Debug, Clone, Copy)]
pub struct EllipsoidOptions {
    /// Stop once `upper − lower ≤ abs_tol + rel_tol·|upper|`.
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iterations: usize,
    /// Whether the initial ball is known to contain a minimizer. When false the
    /// ellipsoid bound is not reported and only the external certificate counts.
    pub ball_contains_minimizer: bool,
    /// Evaluate the external certificate every this many iterations.
    pub certify_every: usize,
}

impl Default for EllipsoidOptions {
    fn default() -> Self {
        EllipsoidOptions {
            abs_tol: 0.0,
            rel_tol: 1e-10,
            max_iterations: 50_000,
            ball_contains_minimizer: true,
            certify_every: 25,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConvexOutcome {
    pub x: Vec<f64>,
    pub upper: f64,
    pub lower: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl ConvexOutcome {
    pub fn gap(&self) -> f64 {
        (self.upper - self.lower).max(0.0)
    }
}

fn tolerance_met(upper: f64, lower: f64, opts: &EllipsoidOptions) -> bool {
    upper - lower <= opts.abs_tol + opts.rel_tol * upper.abs()
}

/// Minimizes a convex function given by value and subgradient, starting from
/// the ball of the given radius around `center`.
pub fn ellipsoid_minimize<F, C>(
    mut objective: F,
    mut certificate: C,
    center: &[f64],
    radius: f64,
    opts: &EllipsoidOptions,
) -> ConvexOutcome
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
    C: FnMut(&[f64]) -> f64,
{
    let n = center.len();
    let mut x = center.to_vec();
    let (f0, _) = objective(&x);
    let mut best_x = x.clone();
    let mut best_f = f0;
    let mut lower = certificate(&best_x);
    if n == 0 || radius <= 0.0 {
        return ConvexOutcome {
            x: best_x,
            upper: best_f,
            lower: lower.min(best_f),
            iterations: 0,
            converged: true,
        };
    }
    if n == 1 {
        return bisect_1d(objective, certificate, center[0], radius, opts);
    }

    // P stored dense row-major.
    let mut p = vec![0.0; n * n];
    for i in 0..n {
        p[i * n + i] = radius * radius;
    }
    let nf = n as f64;
    let expand = nf * nf / (nf * nf - 1.0);
    let step = 1.0 / (nf + 1.0);
    let shrink = 2.0 / (nf + 1.0);
    let mut pg = vec![0.0; n];

    for it in 1..=opts.max_iterations {
        let (fx, g) = objective(&x);
        if fx < best_f {
            best_f = fx;
            best_x.copy_from_slice(&x);
        }
        for i in 0..n {
            let row = &p[i * n..(i + 1) * n];
            pg[i] = row.iter().zip(&g).map(|(a, b)| a * b).sum();
        }
        let gpg: f64 = g.iter().zip(&pg).map(|(a, b)| a * b).sum();
        if !(gpg > 0.0) || !gpg.is_finite() {
            // Zero subgradient: x is a minimizer.
            if gpg == 0.0 {
                lower = lower.max(fx);
            }
            return ConvexOutcome {
                x: best_x,
                upper: best_f,
                lower: lower.min(best_f),
                iterations: it,
                converged: gpg == 0.0,
            };
        }
        let root = gpg.sqrt();
        if opts.ball_contains_minimizer {
            lower = lower.max(fx - root);
        }
        if it % opts.certify_every.max(1) == 0 {
            lower = lower.max(certificate(&best_x));
        }
        if tolerance_met(best_f, lower, opts) {
            return ConvexOutcome {
                x: best_x,
                upper: best_f,
                lower: lower.min(best_f),
                iterations: it,
                converged: true,
            };
        }
        for i in 0..n {
            x[i] -= step * pg[i] / root;
        }
        let c = shrink / gpg;
        for i in 0..n {
            for j in i..n {
                let v = expand * (p[i * n + j] - c * pg[i] * pg[j]);
                p[i * n + j] = v;
                p[j * n + i] = v;
            }
        }
    }
    lower = lower.max(certificate(&best_x));
    ConvexOutcome {
        x: best_x,
        upper: best_f,
        lower: lower.min(best_f),
        iterations: opts.max_iterations,
        converged: tolerance_met(best_f, lower, opts),
    }
}

/// One-dimensional specialization: bisection on the sign of the subgradient.
fn bisect_1d<F, C>(
    mut objective: F,
    mut certificate: C,
    center: f64,
    radius: f64,
    opts: &EllipsoidOptions,
) -> ConvexOutcome
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
    C: FnMut(&[f64]) -> f64,
{
    let (mut lo, mut hi) = (center - radius, center + radius);
    let mut best_x = center;
    let mut best_f = objective(&[center]).0;
    let mut lower = certificate(&[best_x]);
    for it in 1..=opts.max_iterations {
        let mid = 0.5 * (lo + hi);
        let (fm, g) = objective(&[mid]);
        if fm < best_f {
            best_f = fm;
            best_x = mid;
        }
        let slope = g[0];
        if opts.ball_contains_minimizer {
            // Minimizer lies in [lo, hi]; the tangent at mid bounds f there.
            let reach = if slope >= 0.0 { mid - lo } else { hi - mid };
            lower = lower.max(fm - slope.abs() * reach);
        }
        if slope == 0.0 {
            lower = lower.max(fm);
        }
        if tolerance_met(best_f, lower, opts) || hi - lo <= f64::EPSILON * (1.0 + center.abs() + radius) {
            lower = lower.max(certificate(&[best_x]));
            return ConvexOutcome {
                x: vec![best_x],
                upper: best_f,
                lower: lower.min(best_f),
                iterations: it,
                converged: tolerance_met(best_f, lower, opts),
            };
        }
        if slope > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    ConvexOutcome {
        x: vec![best_x],
        upper: best_f,
        lower: lower.min(best_f),
        iterations: opts.max_iterations,
        converged: tolerance_met(best_f, lower, opts),
    }
}

/// Golden-section search for a convex function on `[a, b]`. Returns the best
/// abscissa and value. No certificate; callers certify separately.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, rel_width: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let scale = (b - a).abs().max(f64::MIN_POSITIVE);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let (fa, fb) = (f(a), f(b));
    let (mut best_x, mut best_f) = if fa <= fb { (a, fa) } else { (b, fb) };
    for _ in 0..200 {
        if (b - a) <= rel_width * scale {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        for (x, v) in [(c, fc), (d, fd)] {
            if v < best_f {
                best_f = v;
                best_x = x;
            }
        }
    }
    (best_x, best_f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ellipsoid_finds_quadratic_minimum_with_valid_bound() {
        let target = [0.3, -1.2, 2.0];
        let f = |x: &[f64]| {
            let v: f64 = x.iter().zip(&target).map(|(a, b)| (a - b) * (a - b)).sum();
            let g = x.iter().zip(&target).map(|(a, b)| 2.0 * (a - b)).collect();
            (v + 1.0, g)
        };
        let opts = EllipsoidOptions { abs_tol: 1e-10, rel_tol: 0.0, ..Default::default() };
        let out = ellipsoid_minimize(f, |_| f64::NEG_INFINITY, &[0.0; 3], 5.0, &opts);
        assert!(out.converged);
        assert!(out.lower <= 1.0 + 1e-15 && out.upper >= 1.0);
        assert!(out.gap() <= 1e-10);
    }

    #[test]
    fn ellipsoid_handles_nonsmooth_objective() {
        // f(x) = |x0 - 1| + 2|x1 + 0.5|, minimum 0.
        let f = |x: &[f64]| {
            let v = (x[0] - 1.0).abs() + 2.0 * (x[1] + 0.5).abs();
            (v, vec![(x[0] - 1.0).signum(), 2.0 * (x[1] + 0.5).signum()])
        };
        let opts = EllipsoidOptions { abs_tol: 1e-9, rel_tol: 0.0, ..Default::default() };
        let out = ellipsoid_minimize(f, |_| f64::NEG_INFINITY, &[0.0, 0.0], 3.0, &opts);
        assert!(out.converged, "{out:?}");
        assert!(out.lower <= 0.0 && out.upper <= 1e-9);
    }

    #[test]
    fn bisection_in_one_dimension() {
        let f = |x: &[f64]| ((x[0] - 0.25).abs() + 3.0, vec![(x[0] - 0.25).signum()]);
        let opts = EllipsoidOptions { abs_tol: 1e-12, rel_tol: 0.0, ..Default::default() };
        let out = ellipsoid_minimize(f, |_| f64::NEG_INFINITY, &[0.0], 1.0, &opts);
        assert!(out.lower <= 3.0 && out.upper - 3.0 <= 1e-12);
    }

    #[test]
    fn golden_section_on_parabola() {
        let (x, v) = golden_section(|t| (t - 0.7) * (t - 0.7), 0.0, 2.0, 1e-12);
        assert!((x - 0.7).abs() < 1e-6 && v < 1e-12);
    }
}
