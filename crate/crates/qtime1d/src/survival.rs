//! Survival amplitude from resonance pole expansions.
//!
//! The resolvent kernel M(q) = sum_k a_k / (q - q_k) fixes the survival
//! amplitude A(t) as a contour integral that deforms onto the diagonal of
//! the second and fourth momentum quadrants, where the evolution factor
//! becomes a real Gaussian. Each pole contributes half a Faddeeva function:
//!
//! ```text
//! A(t) = sum_k (1/2) a_k w(-u_k),   u_k = q_k / f,   f = (1-i) sqrt(m hbar / t)
//! ```
//!
//! equivalently an exponential part E_k (for poles crossed in the
//! deformation) plus a w-function correction D_k. The independent check is
//! direct adaptive quadrature along the diagonal plus explicit residues.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::faddeeva::{w_eval, WAccuracyPolicy};
use crate::numerics::adaptive_simpson_complex;

/// One simple pole of M(q): residue and position in momentum units.
#[derive(Debug, Clone, Copy)]
pub struct Pole {
    pub residue: Complex64,
    pub position: Complex64,
}

/// Pole expansion of M(q) with the mass/hbar scale of the underlying
/// Hamiltonian. Upper-half poles must sit on the imaginary axis (bound
/// states); higher-order poles are not representable.
#[derive(Debug, Clone)]
pub struct PoleSet {
    poles: Vec<Pole>,
    mass: f64,
    hbar: f64,
}

impl PoleSet {
    pub fn new(poles: Vec<Pole>, mass: f64, hbar: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) || !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::Config("mass and hbar must be positive and finite".into()));
        }
        for (i, p) in poles.iter().enumerate() {
            let q = p.position;
            if !(q.re.is_finite() && q.im.is_finite() && p.residue.re.is_finite() && p.residue.im.is_finite()) {
                return Err(Error::PoleFormat { index: i, reason: "non-finite value".into() });
            }
            if q.norm() == 0.0 {
                return Err(Error::PoleFormat { index: i, reason: "pole at the origin".into() });
            }
            if q.im > 0.0 && q.re.abs() > 1e-12 * q.norm() {
                return Err(Error::PoleFormat {
                    index: i,
                    reason: format!("upper-half pole off the imaginary axis: {q}"),
                });
            }
        }
        for i in 0..poles.len() {
            for j in 0..i {
                let d = (poles[i].position - poles[j].position).norm();
                let scale = poles[i].position.norm().max(poles[j].position.norm());
                if d < 1e-12 * scale {
                    return Err(Error::PoleFormat {
                        index: i,
                        reason: format!("coincides with pole {j}; higher-order poles unsupported"),
                    });
                }
            }
        }
        Ok(Self { poles, mass, hbar })
    }

    /// Parse `{"poles": [[re_a, im_a, re_q, im_q], ...], "mass": 1, "hbar": 1}`.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(serde::Deserialize)]
        struct Doc {
            poles: Vec<[f64; 4]>,
            #[serde(default = "crate::survival::one")]
            mass: f64,
            #[serde(default = "crate::survival::one")]
            hbar: f64,
        }
        let doc: Doc = serde_json::from_str(text)?;
        let poles = doc
            .poles
            .iter()
            .map(|v| Pole {
                residue: Complex64::new(v[0], v[1]),
                position: Complex64::new(v[2], v[3]),
            })
            .collect();
        Self::new(poles, doc.mass, doc.hbar)
    }

    pub fn poles(&self) -> &[Pole] {
        &self.poles
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// M(q) = sum a_k / (q - q_k).
    pub fn m_of_q(&self, q: Complex64) -> Complex64 {
        self.poles.iter().map(|p| p.residue / (q - p.position)).sum()
    }

    /// sum a_k q_k^n, the short-time moment combinations.
    pub fn moment(&self, n: i32) -> Complex64 {
        self.poles.iter().map(|p| p.residue * p.position.powi(n)).sum()
    }
}

pub(crate) fn one() -> f64 {
    1.0
}

/// f(t) = (1 - i) sqrt(m hbar / t): the diagonal scale variable.
fn diagonal_scale(ps: &PoleSet, t: f64) -> Complex64 {
    Complex64::new(1.0, -1.0) * (ps.mass() * ps.hbar() / t).sqrt()
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("time must be positive, got {t}")));
    }
    Ok(())
}

/// A(t) = sum_k (1/2) a_k w(-u_k).
pub fn survival_w_sum(ps: &PoleSet, t: f64) -> Result<Complex64> {
    check_time(t)?;
    let f = diagonal_scale(ps, t);
    let policy = WAccuracyPolicy::default();
    let mut acc = Complex64::new(0.0, 0.0);
    for p in ps.poles() {
        let u = p.position / f;
        acc += 0.5 * p.residue * w_eval(-u, &policy)?;
    }
    Ok(acc)
}

/// A(t) split into the exponential-decay part and the w-function correction.
#[derive(Debug, Clone, Copy)]
pub struct SurvivalSplit {
    /// sum of E_k = a_k exp(-i q_k^2 t / (2 m hbar)) over crossed poles.
    pub exponential: Complex64,
    /// sum of D_k = -(a_k/2) sign(Im u_k) w(sign(Im u_k) u_k).
    pub correction: Complex64,
}

impl SurvivalSplit {
    pub fn total(&self) -> Complex64 {
        self.exponential + self.correction
    }
}

/// E_k + D_k decomposition; algebraically identical to [`survival_w_sum`]
/// through the reflection identity of the w-function.
pub fn survival_split(ps: &PoleSet, t: f64) -> Result<SurvivalSplit> {
    check_time(t)?;
    let f = diagonal_scale(ps, t);
    let policy = WAccuracyPolicy::default();
    let phase = -Complex64::new(0.0, 1.0) * t / (2.0 * ps.mass() * ps.hbar());
    let mut exponential = Complex64::new(0.0, 0.0);
    let mut correction = Complex64::new(0.0, 0.0);
    for p in ps.poles() {
        let u = p.position / f;
        if u.im.abs() <= 1e-14 * u.norm() {
            return Err(Error::Resolution(format!(
                "pole {} lies on the integration diagonal; the split is ambiguous",
                p.position
            )));
        }
        let s = u.im.signum();
        correction += -0.5 * p.residue * s * w_eval(s * u, &policy)?;
        if u.im > 0.0 {
            exponential += p.residue * (phase * p.position * p.position).exp();
        }
    }
    Ok(SurvivalSplit { exponential, correction })
}

/// Independent route: adaptive quadrature of (i/2 pi) exp(-u^2) M(f u) f du
/// along the diagonal, plus residues of the poles crossed when deforming the
/// original contour onto it. An entire addend to M(q) may be supplied; it is
/// integrated along the diagonal with the same Gaussian weight.
pub fn survival_contour_quadrature_with(
    ps: &PoleSet,
    entire: Option<&dyn Fn(Complex64) -> Complex64>,
    t: f64,
) -> Result<Complex64> {
    check_time(t)?;
    let f = diagonal_scale(ps, t);
    let phase = -Complex64::new(0.0, 1.0) * t / (2.0 * ps.mass() * ps.hbar());

    // Residues of poles between the original contour (above everything) and
    // the diagonal: the whole upper half plane plus the fourth-quadrant
    // wedge arg q in (-pi/4, 0), i.e. Im u_k > 0.
    let mut acc = Complex64::new(0.0, 0.0);
    let mut splits = vec![-8.5f64, 8.5];
    for p in ps.poles() {
        let u = p.position / f;
        if u.im.abs() <= 1e-8 * u.norm().max(1.0) {
            return Err(Error::Resolution(format!(
                "pole {} within 1e-8 of the integration diagonal; shift it or use the w-sum",
                p.position
            )));
        }
        if u.im > 0.0 {
            acc += p.residue * (phase * p.position * p.position).exp();
        }
        if u.im.abs() < 3.0 && u.re.abs() < 8.5 {
            splits.push(u.re);
        }
    }
    splits.sort_by(|a, b| a.total_cmp(b));
    splits.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let pref = Complex64::new(0.0, 1.0) / (2.0 * std::f64::consts::PI) * f;
    let integrand = |u: f64| -> Complex64 {
        let q = f * u;
        let mut m = ps.m_of_q(q);
        if let Some(g) = entire {
            m += g(q);
        }
        (-u * u).exp() * m
    };

    // Two passes: a scale estimate, then refinement against it.
    let mut rough = Complex64::new(0.0, 0.0);
    for w in splits.windows(2) {
        rough += adaptive_simpson_complex(&mut |u| integrand(u), w[0], w[1], 1e-10, 30);
    }
    let scale = (pref * rough + acc).norm().max(rough.norm() * f.norm() / (2.0 * std::f64::consts::PI));
    let tol = (1e-12 * scale / f.norm().max(1e-300)).max(1e-300);
    let mut integral = Complex64::new(0.0, 0.0);
    for w in splits.windows(2) {
        integral += adaptive_simpson_complex(&mut |u| integrand(u), w[0], w[1], tol, 42);
    }
    Ok(acc + pref * integral)
}

pub fn survival_contour_quadrature(ps: &PoleSet, t: f64) -> Result<Complex64> {
    survival_contour_quadrature_with(ps, None, t)
}

/// Truncated short-time expansion: per pole,
/// sum_{n < n_terms} [q_k (1-i)/2 * sqrt(t/(m hbar))]^n / Gamma(n/2 + 1),
/// weighted by a_k / 2.
pub fn short_time_series(ps: &PoleSet, t: f64, n_terms: usize) -> Result<Complex64> {
    check_time(t)?;
    if n_terms == 0 {
        return Err(Error::Range("need at least one term".into()));
    }
    let root = (t / (ps.mass() * ps.hbar())).sqrt();
    let max_x = ps
        .poles()
        .iter()
        .map(|p| p.position.norm() * root * std::f64::consts::FRAC_1_SQRT_2)
        .fold(0.0f64, f64::max);
    // Term ratio at the truncation order ~ |x| / sqrt(n/2).
    if max_x / ((n_terms as f64) / 2.0).sqrt() >= 0.5 {
        return Err(Error::Range(format!(
            "t = {t} too large for {n_terms} terms: truncation ratio >= 0.5"
        )));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for p in ps.poles() {
        let x = p.position * Complex64::new(1.0, -1.0) * 0.5 * root;
        // Interleaved even/odd recurrences in n.
        let mut even = Complex64::new(1.0, 0.0);
        let mut odd = x * 2.0 / std::f64::consts::PI.sqrt();
        let x2 = x * x;
        let mut sum = Complex64::new(0.0, 0.0);
        let mut used = 0;
        let mut m = 0usize;
        while used < n_terms {
            sum += even;
            used += 1;
            if used < n_terms {
                sum += odd;
                used += 1;
            }
            even *= x2 / (m as f64 + 1.0);
            odd *= x2 / (m as f64 + 1.5);
            m += 1;
        }
        acc += 0.5 * p.residue * sum;
    }
    Ok(acc)
}

/// Closed-form long-time tail A(t) ~ (1-i)/(2 m sqrt(pi)) a1 (m hbar / t)^{3/2},
/// with a1 the linear Taylor coefficient of the resolvent diagonal element.
pub fn long_time_asymptote(a1: Complex64, mass: f64, hbar: f64, t: f64) -> Complex64 {
    Complex64::new(1.0, -1.0) / (2.0 * mass * std::f64::consts::PI.sqrt())
        * a1
        * (mass * hbar / t).powf(1.5)
}

/// Linear Taylor coefficient a1 of (m/q) M(q) about q = 0 for a pure pole
/// expansion: a1 = -m sum_k a_k / q_k^3. Requires M(0) = 0, i.e.
/// sum a_k / q_k = 0, for the tail to be the leading term.
pub fn resolvent_linear_coeff(ps: &PoleSet) -> Complex64 {
    -ps.mass() * ps.moment(-3)
}

/// Tabulated survival curve.
#[derive(Debug, Clone)]
pub struct SurvivalCurve {
    pub t: Vec<f64>,
    pub a_t: Vec<Complex64>,
    pub s_t: Vec<f64>,
}

pub fn survival_curve(ps: &PoleSet, times: &[f64]) -> Result<SurvivalCurve> {
    let mut a_t = Vec::with_capacity(times.len());
    for &t in times {
        a_t.push(survival_w_sum(ps, t)?);
    }
    let s_t = a_t.iter().map(|a| a.norm_sqr()).collect();
    Ok(SurvivalCurve { t: times.to_vec(), a_t, s_t })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_set() -> PoleSet {
        PoleSet::new(
            vec![
                Pole { residue: Complex64::new(1.1, 0.3), position: Complex64::new(1.0, -0.2) },
                Pole { residue: Complex64::new(-0.4, 0.8), position: Complex64::new(2.3, -0.9) },
                Pole { residue: Complex64::new(0.9, 0.0), position: Complex64::new(0.0, 0.7) },
            ],
            1.0,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn w_sum_equals_split() {
        let ps = sample_set();
        for &t in &[0.1, 1.0, 10.0] {
            let a = survival_w_sum(&ps, t).unwrap();
            let s = survival_split(&ps, t).unwrap().total();
            assert!((a - s).norm() <= 1e-12 * a.norm().max(1.0), "t={t}");
        }
    }

    #[test]
    fn empty_set_is_zero() {
        let ps = PoleSet::new(Vec::new(), 1.0, 1.0).unwrap();
        assert_eq!(survival_contour_quadrature(&ps, 2.0).unwrap().norm(), 0.0);
        assert_eq!(survival_w_sum(&ps, 2.0).unwrap().norm(), 0.0);
    }

    #[test]
    fn bound_state_pole_residue_is_purely_oscillatory() {
        let ps = PoleSet::new(
            vec![Pole { residue: Complex64::new(1.0, 0.0), position: Complex64::new(0.0, 0.8) }],
            1.0,
            1.0,
        )
        .unwrap();
        // The crossed-pole residue has constant modulus; the w correction
        // decays, so |A| settles on |a_1| at large t.
        for &t in &[3.0, 30.0, 300.0] {
            let split = survival_split(&ps, t).unwrap();
            assert!((split.exponential.norm() - 1.0).abs() < 1e-13, "t={t}");
        }
        let d1 = survival_split(&ps, 50.0).unwrap().correction.norm();
        let d2 = survival_split(&ps, 5000.0).unwrap().correction.norm();
        assert!(d2 < 0.2 * d1, "correction must decay: {d1} -> {d2}");
        let a = survival_w_sum(&ps, 1e6).unwrap().norm();
        assert!((a - 1.0).abs() < 1e-3, "{a}");
    }

    #[test]
    fn rejects_time_domain() {
        let ps = sample_set();
        assert!(survival_w_sum(&ps, 0.0).is_err());
        assert!(survival_w_sum(&ps, -1.0).is_err());
    }

    #[test]
    fn rejects_upper_half_off_axis_pole() {
        let r = PoleSet::new(
            vec![Pole { residue: Complex64::new(1.0, 0.0), position: Complex64::new(0.5, 0.5) }],
            1.0,
            1.0,
        );
        assert!(r.is_err());
    }

    #[test]
    fn rejects_duplicate_poles() {
        let p = Pole { residue: Complex64::new(1.0, 0.0), position: Complex64::new(1.0, -0.5) };
        assert!(PoleSet::new(tovec(p), 1.0, 1.0).is_err());
    }

    fn tovec(p: Pole) -> Vec<Pole> {
        vec![p, p]
    }

    #[test]
    fn rejects_on_diagonal_pole_in_quadrature() {
        // arg q = -pi/4 puts u exactly on the real axis.
        let ps = PoleSet::new(
            vec![Pole {
                residue: Complex64::new(1.0, 0.0),
                position: Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4),
            }],
            1.0,
            1.0,
        )
        .unwrap();
        assert!(survival_contour_quadrature(&ps, 1.0).is_err());
        assert!(survival_split(&ps, 1.0).is_err());
    }

    #[test]
    fn short_time_leading_term() {
        let ps = sample_set();
        let v = short_time_series(&ps, 1e-12, 1).unwrap();
        let expect = 0.5 * ps.moment(0);
        assert!((v - expect).norm() < 1e-12);
    }

    #[test]
    fn short_time_range_guard() {
        let ps = sample_set();
        assert!(short_time_series(&ps, 1e3, 4).is_err());
    }

    #[test]
    fn parse_pole_json() {
        let ps =
            PoleSet::from_json(r#"{"poles":[[1.0,0.0,1.0,-0.2]],"mass":2.0,"hbar":1.0}"#).unwrap();
        assert_eq!(ps.poles().len(), 1);
        assert_eq!(ps.mass(), 2.0);
    }

    #[test]
    fn asymptote_power_law() {
        let a1 = Complex64::new(0.3, -0.1);
        let v1 = long_time_asymptote(a1, 1.0, 1.0, 100.0).norm();
        let v2 = long_time_asymptote(a1, 1.0, 1.0, 200.0).norm();
        assert!((v1 / v2 - 2.0f64.powf(1.5)).abs() < 1e-12);
    }
}
