//! Shared numerical kernels: quadrature, root bracketing, extremum search and
//! finite-difference stencils used by the physics modules.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point Gauss-Legendre rule on [-1, 1].
///
/// Computed by Newton iteration on the Legendre recurrence; accurate to a few
/// ulps for the orders used here (n <= 64).
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 2);
    let mut out = Vec::with_capacity(n);
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-like initial guess for the i-th positive root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((-x, w));
        if !(n % 2 == 1 && i == 0) {
            out.push((x, w));
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Cached 24-point rule for hot quadrature paths.
pub fn gauss_legendre_24() -> &'static [(f64, f64)] {
    use std::sync::OnceLock;
    static CELL: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    CELL.get_or_init(|| gauss_legendre(24))
}

/// Cached 32-point rule.
pub fn gauss_legendre_32() -> &'static [(f64, f64)] {
    use std::sync::OnceLock;
    static CELL: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    CELL.get_or_init(|| gauss_legendre(32))
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Integrate `f` over [a, b] with a fixed Gauss-Legendre rule.
pub fn integrate_gl(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, rule: &[(f64, f64)]) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    for &(x, w) in rule {
        acc += w * f(c + h * x);
    }
    acc * h
}

/// Adaptive Simpson quadrature for complex-valued integrands.
///
/// `tol` is an absolute tolerance on the result. The classic |S2-S1|/15
/// estimate controls subdivision; `max_depth` bounds recursion.
pub fn adaptive_simpson_complex(
    f: &mut dyn FnMut(f64) -> Complex64,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: usize,
) -> Complex64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &mut dyn FnMut(f64) -> Complex64,
    a: f64,
    b: f64,
    fa: Complex64,
    fm: Complex64,
    fb: Complex64,
    whole: Complex64,
    tol: f64,
    depth: usize,
) -> Complex64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.norm() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Real-valued adaptive Simpson.
pub fn adaptive_simpson(
    f: &mut dyn FnMut(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: usize,
) -> f64 {
    adaptive_simpson_complex(&mut |x| Complex64::new(f(x), 0.0), a, b, tol, max_depth).re
}

/// Composite Simpson over tabulated values on a uniform grid.
///
/// The node count must be odd (even panel count).
pub fn simpson_tabulated_complex(values: &[Complex64], h: f64) -> Complex64 {
    assert!(values.len() >= 3 && values.len() % 2 == 1, "need odd node count");
    let mut acc = values[0] + values[values.len() - 1];
    for (i, v) in values.iter().enumerate().skip(1).take(values.len() - 2) {
        acc += *v * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * (h / 3.0)
}

pub fn simpson_tabulated(values: &[f64], h: f64) -> f64 {
    assert!(values.len() >= 3 && values.len() % 2 == 1, "need odd node count");
    let mut acc = values[0] + values[values.len() - 1];
    for (i, v) in values.iter().enumerate().skip(1).take(values.len() - 2) {
        acc += *v * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * (h / 3.0)
}

/// Bisection root refinement; the bracket must straddle a sign change.
pub fn bisect(f: &mut dyn FnMut(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Resolution(format!(
            "bisection bracket [{lo}, {hi}] does not straddle a sign change"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= tol {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Golden-section search for a maximum of `f` on [lo, hi].
pub fn golden_max(f: &mut dyn FnMut(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (hi - lo).abs() > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Derivative of the quartic Lagrange interpolant through five nodes,
/// evaluated at `x`. Handles non-uniform spacing.
pub fn lagrange5_derivative(xs: &[f64; 5], ys: &[f64; 5], x: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..5 {
        // d/dx prod_{j != i} (x - x_j)/(x_i - x_j)
        let mut denom = 1.0;
        for j in 0..5 {
            if j != i {
                denom *= xs[i] - xs[j];
            }
        }
        let mut dsum = 0.0;
        for k in 0..5 {
            if k == i {
                continue;
            }
            let mut prod = 1.0;
            for j in 0..5 {
                if j != i && j != k {
                    prod *= x - xs[j];
                }
            }
            dsum += prod;
        }
        acc += ys[i] * dsum / denom;
    }
    acc
}

/// Central difference with one Richardson level, complex-valued.
pub fn richardson_derivative_complex(
    f: &mut dyn FnMut(f64) -> Complex64,
    x: f64,
    h: f64,
) -> Complex64 {
    let d = |f: &mut dyn FnMut(f64) -> Complex64, h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    let d1 = d(f, h);
    let d2 = d(f, 0.5 * h);
    (4.0 * d2 - d1) / 3.0
}

/// Map an angle to the principal interval (-pi, pi].
pub fn principal_angle(a: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut r = a % two_pi;
    if r <= -std::f64::consts::PI {
        r += two_pi;
    } else if r > std::f64::consts::PI {
        r -= two_pi;
    }
    r
}

/// Least-squares slope of y against x.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

/// Log-spaced grid with `n` nodes from `lo` to `hi` inclusive.
pub fn geomspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let r = (hi / lo).ln() / (n - 1) as f64;
    (0..n).map(|i| lo * (r * i as f64).exp()).collect()
}

/// Uniform grid with `n` nodes from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    let h = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + h * i as f64).collect()
}
