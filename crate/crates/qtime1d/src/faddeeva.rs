//! Faddeeva w-function on the complex plane.
//!
//! w(z) = exp(-z^2) erfc(-iz) is entire and is the basic propagator kernel
//! for Schrodinger transient modes. The evaluation strategy is
//!
//! * Taylor series  w(z) = sum_n (iz)^n / Gamma(n/2 + 1)  inside a disk,
//! * the uniform large-|z| expansion  w(z) ~ i/(sqrt(pi) z) [1 + sum_m
//!   (2m-1)!! / (2 z^2)^m]  outside (valid for Im z >= 0),
//! * the reflection  w(-z) = 2 exp(-z^2) - w(z)  for the lower half plane.
//!
//! The series terms reach exp(|z|^2) before they decay, so a plain double
//! summation loses ~|z|^2/ln(10) digits to cancellation. The partial sums are
//! therefore accumulated in double-double arithmetic, which keeps the series
//! accurate out to the radius where the truncated asymptotic expansion takes
//! over at full double precision.

use num_complex::Complex64;

use crate::error::{Error, Result};

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Accuracy policy for [`w_eval`]: where to switch expansions and how hard
/// to push them.
#[derive(Debug, Clone, Copy)]
pub struct WAccuracyPolicy {
    /// Lower bound on the series region radius. The effective switch radius
    /// is never below this, and never above the radius where the truncated
    /// asymptotic expansion meets `target_rel_err`.
    pub series_radius: f64,
    /// Maximum number of correction terms of the asymptotic expansion.
    pub asym_terms: usize,
    /// Requested relative accuracy, in (0, 1e-6].
    pub target_rel_err: f64,
}

impl Default for WAccuracyPolicy {
    fn default() -> Self {
        Self { series_radius: 4.0, asym_terms: 20, target_rel_err: 1e-12 }
    }
}

impl WAccuracyPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.series_radius > 0.0 && self.series_radius.is_finite()) {
            return Err(Error::Config("series_radius must be positive".into()));
        }
        if self.asym_terms == 0 {
            return Err(Error::Config("asym_terms must be positive".into()));
        }
        if !(self.target_rel_err > 0.0 && self.target_rel_err <= 1e-6) {
            return Err(Error::Config("target_rel_err must lie in (0, 1e-6]".into()));
        }
        Ok(())
    }

    /// Radius at which evaluation switches from the Taylor series to the
    /// asymptotic expansion: the smallest radius >= `series_radius` at which
    /// the best truncation of the asymptotic series reaches `target_rel_err`.
    ///
    /// Capped at 6.0: beyond that the compensated series itself starts losing
    /// digits, while the asymptotic expansion is already at machine accuracy.
    pub fn switch_radius(&self) -> f64 {
        let mut r = self.series_radius.min(6.0);
        while r < 6.0 && asym_best_error(r, self.asym_terms) > 0.5 * self.target_rel_err {
            r += 0.05;
        }
        r.min(6.0)
    }
}

/// Smallest term of the truncated asymptotic expansion at radius `r`,
/// relative to the leading term.
fn asym_best_error(r: f64, m_max: usize) -> f64 {
    let x = 2.0 * r * r;
    let mut term = 1.0;
    let mut best = 1.0;
    for m in 1..=m_max {
        term *= (2.0 * m as f64 - 1.0) / x;
        if term < best {
            best = term;
        } else {
            break;
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Double-double arithmetic (Dekker/Knuth error-free transforms, no FMA).

#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn split(a: f64) -> (f64, f64) {
    const SPLITTER: f64 = 134_217_729.0; // 2^27 + 1
    let t = SPLITTER * a;
    let hi = t - (t - a);
    (hi, a - hi)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    (p, ((ah * bh - p) + ah * bl + al * bh) + al * bl)
}

impl Dd {
    const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    #[inline]
    fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    #[inline]
    fn add(self, o: Dd) -> Dd {
        let (s1, e1) = two_sum(self.hi, o.hi);
        let (s2, e2) = two_sum(self.lo, o.lo);
        let (s1, e1) = quick_two_sum(s1, e1 + s2);
        let (hi, lo) = quick_two_sum(s1, e1 + e2);
        Dd { hi, lo }
    }

    #[inline]
    fn sub(self, o: Dd) -> Dd {
        self.add(Dd { hi: -o.hi, lo: -o.lo })
    }

    #[inline]
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + self.hi * o.lo + self.lo * o.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    #[inline]
    fn div_f64(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let (p, e) = two_prod(q1, b);
        let r = self.sub(Dd { hi: p, lo: e });
        let q2 = r.hi / b;
        let (p2, e2) = two_prod(q2, b);
        let r2 = r.sub(Dd { hi: p2, lo: e2 });
        let q3 = r2.hi / b;
        let (s, e) = quick_two_sum(q1, q2);
        let (hi, lo) = quick_two_sum(s, e + q3);
        Dd { hi, lo }
    }

    #[inline]
    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

#[derive(Debug, Clone, Copy)]
struct DdC {
    re: Dd,
    im: Dd,
}

impl DdC {
    const ZERO: DdC = DdC { re: Dd::ZERO, im: Dd::ZERO };

    #[inline]
    fn from(z: Complex64) -> DdC {
        DdC { re: Dd::from(z.re), im: Dd::from(z.im) }
    }

    #[inline]
    fn add(self, o: DdC) -> DdC {
        DdC { re: self.re.add(o.re), im: self.im.add(o.im) }
    }

    #[inline]
    fn mul(self, o: DdC) -> DdC {
        DdC {
            re: self.re.mul(o.re).sub(self.im.mul(o.im)),
            im: self.re.mul(o.im).add(self.im.mul(o.re)),
        }
    }

    #[inline]
    fn div_f64(self, b: f64) -> DdC {
        DdC { re: self.re.div_f64(b), im: self.im.div_f64(b) }
    }

    #[inline]
    fn to_complex(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    #[inline]
    fn norm_hi(self) -> f64 {
        self.re.hi.hypot(self.im.hi)
    }
}

/// pi as head + tail; the tail is the classic sin(pi_f64) residual.
const PI_DD: Dd = Dd { hi: std::f64::consts::PI, lo: 1.224_646_799_147_353_2e-16 };

fn dd_sqrt(a: Dd) -> Dd {
    let x0 = a.hi.sqrt();
    // One Newton step performed in double-double.
    let (p, e) = two_prod(x0, x0);
    let r = a.sub(Dd { hi: p, lo: e });
    Dd::from(x0).add(r.div_f64(2.0 * x0))
}

fn dd_div(a: Dd, b: Dd) -> Dd {
    let q0 = a.hi / b.hi;
    let r0 = a.sub(b.mul(Dd::from(q0)));
    let q1 = r0.hi / b.hi;
    let r1 = r0.sub(b.mul(Dd::from(q1)));
    let q2 = r1.hi / b.hi;
    let (s, e) = quick_two_sum(q0, q1);
    let (hi, lo) = quick_two_sum(s, e + q2);
    Dd { hi, lo }
}

/// 2/sqrt(pi) in double-double precision, derived once from `PI_DD`.
fn two_over_sqrt_pi() -> Dd {
    use std::sync::OnceLock;
    static CELL: OnceLock<(f64, f64)> = OnceLock::new();
    let (hi, lo) = *CELL.get_or_init(|| {
        let v = dd_div(Dd::from(2.0), dd_sqrt(PI_DD));
        (v.hi, v.lo)
    });
    Dd { hi, lo }
}

// ---------------------------------------------------------------------------

/// Evaluate w(z) under the given accuracy policy.
///
/// The lower half plane always goes through the reflection
/// w(z) = 2 exp(-z^2) - w(-z); direct asymptotics there would sit on the
/// exponentially dominant branch near the bisectors.
pub fn w_eval(z: Complex64, policy: &WAccuracyPolicy) -> Result<Complex64> {
    policy.validate()?;
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Domain("w argument must be finite".into()));
    }
    if z.im < 0.0 {
        let refl = 2.0 * (-z * z).exp();
        if !refl.re.is_finite() || !refl.im.is_finite() {
            return Err(Error::Overflow(format!(
                "w({z}) exceeds the double range in the lower half plane"
            )));
        }
        return Ok(refl - w_upper(-z, policy));
    }
    Ok(w_upper(z, policy))
}

/// w on the closed upper half plane.
fn w_upper(z: Complex64, policy: &WAccuracyPolicy) -> Complex64 {
    let r = z.norm();
    if r < policy.switch_radius() {
        series_dd(z, usize::MAX)
    } else {
        let mut w = asym_sum(z, policy.asym_terms);
        if z.im == 0.0 {
            // Half-residue of the defining integral: on the real axis the
            // principal-value part is purely imaginary, so Re w(x) = exp(-x^2)
            // exactly, below all orders of the expansion.
            w += Complex64::new((-z.re * z.re).exp(), 0.0);
        }
        w
    }
}

/// Partial sum of the defining Taylor series, sum_{n=0}^{n_terms-1}
/// (iz)^n / Gamma(n/2 + 1), accumulated in double-double arithmetic.
///
/// Pass `usize::MAX` to sum to convergence.
pub fn w_series(z: Complex64, n_terms: usize) -> Complex64 {
    series_dd(z, n_terms)
}

fn series_dd(z: Complex64, n_terms: usize) -> Complex64 {
    if n_terms == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let iz = Complex64::new(-z.im, z.re);
    let z2 = DdC::from(z).mul(DdC::from(z));
    let neg_z2 = DdC { re: z2.re.neg(), im: z2.im.neg() };

    // Even terms: (-z^2)^m / m!   (n = 2m)
    // Odd terms:  iz (-z^2)^m / Gamma(m + 3/2)   (n = 2m + 1)
    let mut even = DdC::from(Complex64::new(1.0, 0.0));
    let mut odd = DdC::from(iz).mul(DdC { re: two_over_sqrt_pi(), im: Dd::ZERO });
    let mut sum = DdC::ZERO;
    let mut n_used = 0usize;
    let mut m = 0usize;
    let r2 = (z.norm_sqr()).max(1.0);
    loop {
        if n_used < n_terms {
            sum = sum.add(even);
            n_used += 1;
        }
        if n_used < n_terms {
            sum = sum.add(odd);
            n_used += 1;
        }
        if n_used >= n_terms {
            break;
        }
        // Converged once past the term peak at m ~ |z|^2.
        if m as f64 > r2 && even.norm_hi().max(odd.norm_hi()) < 1e-35 {
            break;
        }
        if m > 400 {
            break;
        }
        even = even.mul(neg_z2).div_f64(m as f64 + 1.0);
        odd = odd.mul(neg_z2).div_f64(m as f64 + 1.5);
        m += 1;
    }
    sum.to_complex()
}

/// Truncated asymptotic expansion with `m_terms` correction terms,
/// plus the reflection exponential when Im z < 0.
pub fn w_asymptotic(z: Complex64, m_terms: usize) -> Result<Complex64> {
    if z.norm() == 0.0 {
        return Err(Error::Domain("asymptotic expansion undefined at z = 0".into()));
    }
    let mut w = asym_sum(z, m_terms);
    if z.im < 0.0 {
        let e = 2.0 * (-z * z).exp();
        if !e.re.is_finite() || !e.im.is_finite() {
            return Err(Error::Overflow("exp(-z^2) overflow in lower-half asymptotics".into()));
        }
        w += e;
    }
    Ok(w)
}

fn asym_sum(z: Complex64, m_terms: usize) -> Complex64 {
    let inv_2z2 = 0.5 / (z * z);
    let mut term = Complex64::new(1.0, 0.0);
    let mut s = term;
    let mut last = f64::INFINITY;
    for m in 1..=m_terms {
        term *= (2.0 * m as f64 - 1.0) * inv_2z2;
        let t = term.norm();
        if t > last {
            break; // divergent tail reached
        }
        s += term;
        last = t;
        if t < 1e-18 {
            break;
        }
    }
    Complex64::new(0.0, 1.0) * s / (SQRT_PI * z)
}
