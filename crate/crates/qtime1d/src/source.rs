//! Sharp-onset point source radiating into an evanescent medium.
//!
//! Works in the dimensionless form of the Schrodinger equation
//! i psi_t = -psi_xx + psi (dispersion omega = 1 + k^2), driven by the
//! boundary value psi(0, t) = exp(-i omega_0 t) Theta(t) with omega_0 < 1.
//! The exact field is a pair of Faddeeva functions; the saddle and pole
//! (monochromatic front) contributions carry the transient structure, with
//! the traversal time tau = x / (2 kappa_0) setting every scale.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::faddeeva::{w_eval, WAccuracyPolicy};

/// Sharp-onset source problem: frequency and observation point.
#[derive(Debug, Clone, Copy)]
pub struct SourceSpec {
    pub omega0: f64,
    pub x: f64,
}

impl SourceSpec {
    pub fn new(omega0: f64, x: f64) -> Result<Self> {
        if !(omega0 > 0.0 && omega0 < 1.0) {
            return Err(Error::Domain(format!(
                "evanescent case needs 0 < omega0 < 1, got {omega0}"
            )));
        }
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::Domain(format!("observation point must be positive, got {x}")));
        }
        Ok(Self { omega0, x })
    }

    pub fn kappa0(&self) -> f64 {
        (1.0 - self.omega0).sqrt()
    }

    /// Traversal time tau = x / (2 kappa_0).
    pub fn tau(&self) -> f64 {
        self.x / (2.0 * self.kappa0())
    }
}

/// Characteristic scales of the transient: traversal time, forerunner peak,
/// transient duration, and the saddle frequency omega_s(t).
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct TransientScales {
    pub kappa0: f64,
    pub tau: f64,
    /// Forerunner density peak at tau / sqrt(3).
    pub t_f: f64,
    /// Saddle-to-pole crossover [x e^{kappa0 x} / (2 kappa0^2 sqrt(pi))]^{2/3}.
    pub t_tr: f64,
    /// The t_tr formula assumed tau << t_tr; false when the separation is
    /// less than a factor 5.
    pub valid: bool,
    x: f64,
}

impl TransientScales {
    /// Average local instantaneous frequency of the forerunner,
    /// omega_s = 1 + x^2 / (4 t^2).
    pub fn omega_s(&self, t: f64) -> f64 {
        1.0 + self.x * self.x / (4.0 * t * t)
    }
}

pub fn transient_scales(spec: &SourceSpec) -> TransientScales {
    let kappa0 = spec.kappa0();
    let tau = spec.tau();
    let t_f = tau / 3.0f64.sqrt();
    let t_tr = (spec.x * (kappa0 * spec.x).exp()
        / (2.0 * kappa0 * kappa0 * std::f64::consts::PI.sqrt()))
    .powf(2.0 / 3.0);
    TransientScales { kappa0, tau, t_f, t_tr, valid: t_tr >= 5.0 * tau, x: spec.x }
}

/// The two w-function arguments of the exact solution.
fn u_args(spec: &SourceSpec, t: f64) -> (Complex64, Complex64) {
    let k0 = spec.kappa0();
    let tau = spec.tau();
    let pre = Complex64::new(1.0, 1.0) / 2.0f64.sqrt() * t.sqrt() * k0;
    let u_prime = pre * Complex64::new(-tau / t, -1.0);
    let u_second = pre * Complex64::new(-tau / t, 1.0);
    (u_prime, u_second)
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!(
            "field is zero for t <= 0 by causality; got t = {t}"
        )));
    }
    Ok(())
}

/// Exact field psi(x, t) = (1/2) e^{-i t + i k_s^2 t} [w(-u0') + w(-u0'')],
/// k_s = x / (2 t).
pub fn source_exact(spec: &SourceSpec, t: f64) -> Result<Complex64> {
    check_time(t)?;
    let (u1, u2) = u_args(spec, t);
    let ks = spec.x / (2.0 * t);
    let policy = WAccuracyPolicy::default();
    let w1 = w_eval(-u1, &policy)?;
    let w2 = w_eval(-u2, &policy)?;
    let phase = Complex64::new(0.0, (ks * ks - 1.0) * t).exp();
    Ok(0.5 * phase * (w1 + w2))
}

/// Saddle contribution (e^{-i t + i k_s^2 t} / (2 i sqrt(pi))) (1/u0' + 1/u0'').
pub fn source_saddle(spec: &SourceSpec, t: f64) -> Result<Complex64> {
    check_time(t)?;
    let (u1, u2) = u_args(spec, t);
    let ks = spec.x / (2.0 * t);
    let phase = Complex64::new(0.0, (ks * ks - 1.0) * t).exp();
    Ok(phase / (Complex64::new(0.0, 2.0) * std::f64::consts::PI.sqrt()) * (1.0 / u1 + 1.0 / u2))
}

/// Monochromatic front e^{-i omega0 t} e^{-kappa0 x} Theta(t - tau).
pub fn source_residue(spec: &SourceSpec, t: f64) -> Complex64 {
    if t <= spec.tau() {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::new(0.0, -spec.omega0 * t).exp() * (-spec.kappa0() * spec.x).exp()
}

/// Saddle + residue approximation; degrades in a window around t = tau where
/// the pole crosses the steepest-descent path.
pub fn source_approximation(spec: &SourceSpec, t: f64) -> Result<Complex64> {
    Ok(source_saddle(spec, t)? + source_residue(spec, t))
}

/// Pole-to-saddle modulus ratio
/// R(t) = (2 sqrt(pi)/x) e^{-kappa0 x} t^{3/2} (x^2/(4 t^2) + kappa0^2).
pub fn pole_saddle_ratio(spec: &SourceSpec, t: f64) -> Result<f64> {
    check_time(t)?;
    let k0 = spec.kappa0();
    Ok(2.0 * std::f64::consts::PI.sqrt() / spec.x
        * (-k0 * spec.x).exp()
        * t.powf(1.5)
        * (spec.x * spec.x / (4.0 * t * t) + k0 * k0))
}

/// Time at which the pole and saddle contributions balance, R(t*) = 1,
/// by bracketed bisection from tau upward. Compare with `t_tr`.
pub fn transient_crossover(spec: &SourceSpec) -> Result<f64> {
    let tau = spec.tau();
    let f = |t: f64| pole_saddle_ratio(spec, t).unwrap() - 1.0;
    if f(tau) >= 0.0 {
        // Pole already dominant at tau: weak attenuation, no transient window.
        return Err(Error::Resolution(
            "R(tau) >= 1: no saddle-dominated transient regime to cross".into(),
        ));
    }
    let mut hi = tau * 2.0;
    while f(hi) < 0.0 {
        hi *= 2.0;
        if hi > tau * 1e12 {
            return Err(Error::Resolution("R(t) = 1 crossing not found".into()));
        }
    }
    crate::numerics::bisect(&mut |t| f(t), tau, hi, 1e-12 * hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        assert!(SourceSpec::new(1.2, 1.0).is_err());
        assert!(SourceSpec::new(0.5, -1.0).is_err());
        assert!(SourceSpec::new(0.5, 2.0).is_ok());
    }

    #[test]
    fn boundary_value_at_origin() {
        // x -> 0: psi = e^{-i omega0 t}, forced by the reflection identity.
        let spec = SourceSpec { omega0: 0.75, x: 1e-300 };
        for t in [0.3, 2.0, 17.0] {
            let v = source_exact(&spec, t).unwrap();
            let expect = Complex64::new(0.0, -0.75 * t).exp();
            assert!((v - expect).norm() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn stationary_limit() {
        let spec = SourceSpec::new(0.75, 10.0).unwrap();
        let v = source_exact(&spec, 1e6).unwrap();
        assert!((v.norm() - (-0.5 * 10.0f64).exp()).abs() < 1e-7);
    }

    #[test]
    fn scales_reference_case() {
        let spec = SourceSpec::new(0.75, 10.0).unwrap();
        let s = transient_scales(&spec);
        assert!((s.kappa0 - 0.5).abs() < 1e-15);
        assert!((s.tau - 10.0).abs() < 1e-12);
        assert!((s.t_f - 10.0 / 3.0f64.sqrt()).abs() < 1e-12);
        assert!(s.omega_s(5.0) > 1.0);
    }

    #[test]
    fn residue_is_a_step() {
        let spec = SourceSpec::new(0.75, 20.0).unwrap();
        let tau = spec.tau();
        assert_eq!(source_residue(&spec, 0.9 * tau).norm(), 0.0);
        let v = source_residue(&spec, 1.5 * tau).norm();
        assert!((v - (-0.5 * 20.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn ratio_at_tau_closed_form() {
        let spec = SourceSpec::new(0.75, 20.0).unwrap(); // kappa0 x = 10
        let r = pole_saddle_ratio(&spec, spec.tau()).unwrap();
        let expect = (-10.0f64).exp() * (2.0 * std::f64::consts::PI * 10.0).sqrt();
        assert!((r - expect).abs() <= 1e-12 * expect);
        assert!((expect - 3.599e-4).abs() < 1e-6);
    }

    #[test]
    fn ratio_monotone_past_tau() {
        let spec = SourceSpec::new(0.6, 12.0).unwrap();
        let tau = spec.tau();
        let mut prev = pole_saddle_ratio(&spec, tau).unwrap();
        for i in 1..60 {
            let t = tau * (1.0 + 0.2 * i as f64);
            let r = pole_saddle_ratio(&spec, t).unwrap();
            assert!(r > prev);
            prev = r;
        }
    }

    #[test]
    fn causality_domain_error() {
        let spec = SourceSpec::new(0.75, 10.0).unwrap();
        assert!(source_exact(&spec, 0.0).is_err());
        assert!(source_exact(&spec, -2.0).is_err());
    }

    #[test]
    fn crossover_agrees_with_ttr_at_strong_attenuation() {
        let spec = SourceSpec::new(0.75, 20.0).unwrap(); // kappa0 x = 10
        let t_star = transient_crossover(&spec).unwrap();
        let s = transient_scales(&spec);
        assert!((t_star - s.t_tr).abs() / s.t_tr < 0.10, "{t_star} vs {}", s.t_tr);
    }
}
