//! Stationary-state time quantities: dwell times, phase times, the Eisenbud
//! delay matrix and Smith lifetime matrix, the Breit-Wigner resonance model,
//! negative-delay bounds and the Hartman transition estimate.
//!
//! The on-shell S matrix is indexed by incidence channel (rows) and exit
//! channel (columns), channels (+, -) = (0, 1):
//!
//! ```text
//!     S = | T    R^l |
//!         | R^r  T   |
//! ```
//!
//! With this ordering the diagonal lifetime Q_{++} is the probability-
//! weighted average delay for left incidence for arbitrary (also asymmetric)
//! potentials.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{gauss_legendre, integrate_gl};
use crate::potential::PiecewisePotential;
use crate::scattering::{amplitudes, PhaseCurve, ScatteredWave};

pub type Mat2 = [[Complex64; 2]; 2];

/// On-shell S matrix at energy e > 0.
pub fn smatrix(pot: &PiecewisePotential, e: f64) -> Result<Mat2> {
    if !(e > 0.0 && e.is_finite()) {
        return Err(Error::Domain(format!("energy must be positive, got {e}")));
    }
    let p = (2.0 * pot.mass() * e).sqrt();
    let a = amplitudes(pot, p)?;
    Ok([[a.t, a.r_l], [a.r_r, a.t]])
}

/// Entrywise dS/dE by central differences with one Richardson level.
///
/// The step floors at 5e-5 absolute: below that the amplitude-evaluation
/// noise (~1e-15) divided by 2h dominates and Hermiticity of Q degrades
/// past 1e-10 at sub-unit energies.
fn smatrix_derivative(pot: &PiecewisePotential, e: f64) -> Result<Mat2> {
    let h = (1e-4 * e.max(0.5)).min(0.5 * e);
    let at = |e: f64| smatrix(pot, e);
    let d = |h: f64| -> Result<Mat2> {
        let sp = at(e + h)?;
        let sm = at(e - h)?;
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = (sp[i][j] - sm[i][j]) / (2.0 * h);
            }
        }
        Ok(out)
    };
    let d1 = d(h)?;
    let d2 = d(0.5 * h)?;
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = (4.0 * d2[i][j] - d1[i][j]) / 3.0;
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Dwell time

/// Per-momentum dwell time: integral of |<x|p+>|^2 over [a, b] divided by
/// the incident flux p/(m h).
///
/// The integral runs per sub-interval (split at segment boundaries) with a
/// 32-node Gauss-Legendre rule, panels subdivided so each holds a bounded
/// number of oscillations.
pub fn dwell_time_stationary(
    pot: &PiecewisePotential,
    a: f64,
    b: f64,
    p: f64,
) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::Domain(format!("momentum must be positive, got {p}")));
    }
    if b < a {
        return Err(Error::Domain(format!("need a <= b, got [{a}, {b}]")));
    }
    if b == a {
        return Ok(0.0);
    }
    let wave = ScatteredWave::new(pot, p)?;
    let m = pot.mass();
    let hbar = pot.hbar();
    let h = 2.0 * std::f64::consts::PI * hbar;

    // Split points: segment edges inside [a, b].
    let mut cuts = vec![a];
    for s in pot.segments() {
        for x in [s.x_lo, s.x_hi] {
            if x > a && x < b {
                cuts.push(x);
            }
        }
    }
    cuts.push(b);
    cuts.sort_by(|x, y| x.total_cmp(y));
    cuts.dedup();

    let rule = gauss_legendre(32);
    let e = p * p / (2.0 * m);
    let mut integral = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let v_local = pot.value_at(0.5 * (lo + hi));
        let k_local = (2.0 * m * (e - v_local).abs()).sqrt() / hbar;
        let panels = (((2.0 * k_local * (hi - lo)) / 20.0).ceil() as usize).max(1);
        let step = (hi - lo) / panels as f64;
        for i in 0..panels {
            let x0 = lo + i as f64 * step;
            integral += integrate_gl(
                &mut |x| wave.value(x).norm_sqr(),
                x0,
                x0 + step,
                &rule,
            );
        }
    }
    Ok(integral / (p / (m * h)))
}

// ---------------------------------------------------------------------------
// Phase times

/// Transmission phase time m [b - x0 + hbar Phi_T'(p)] / p.
pub fn phase_time_transmission(x0: f64, b: f64, p: f64, curve: &PhaseCurve) -> Result<f64> {
    let dphi = curve.derivative_at(p)?;
    Ok(curve.mass() * (b - x0 + curve.hbar() * dphi) / p)
}

/// Reflection phase time m [-a - x0 + hbar Phi_R'(p)] / p.
pub fn phase_time_reflection(x0: f64, a: f64, p: f64, curve: &PhaseCurve) -> Result<f64> {
    let dphi = curve.derivative_at(p)?;
    Ok(curve.mass() * (-a - x0 + curve.hbar() * dphi) / p)
}

/// Extrapolated phase time m d / p + (m hbar / p) Phi_T'(p): the barrier-edge
/// referenced diagnostic, not a literal traversal duration.
pub fn extrapolated_phase_time(d: f64, p: f64, curve: &PhaseCurve) -> Result<f64> {
    phase_time_transmission(0.0, d, p, curve)
}

// ---------------------------------------------------------------------------
// Delay and lifetime matrices

/// Eisenbud delay-time matrix. Entries where |S_{ab}| < 1e-12 are undefined
/// (vanishing amplitude) and flagged None rather than extrapolated.
#[derive(Debug, Clone, Copy)]
pub struct DelayMatrix {
    pub e: f64,
    pub dt: [[Option<f64>; 2]; 2],
}

pub fn delay_matrix(pot: &PiecewisePotential, e: f64) -> Result<DelayMatrix> {
    let s = smatrix(pot, e)?;
    let ds = smatrix_derivative(pot, e)?;
    let hbar = pot.hbar();
    let mut dt = [[None; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            if s[i][j].norm() >= 1e-12 {
                let v = (Complex64::new(0.0, -hbar) * ds[i][j] / s[i][j]).re;
                dt[i][j] = Some(v);
            }
        }
    }
    Ok(DelayMatrix { e, dt })
}

/// Smith lifetime matrix Q = i hbar S dS^dagger/dE.
#[derive(Debug, Clone, Copy)]
pub struct QMatrix {
    pub e: f64,
    pub q: Mat2,
}

impl QMatrix {
    /// Max |Q - Q^dagger| entry.
    pub fn hermiticity_residual(&self) -> f64 {
        let mut r: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                r = r.max((self.q[i][j] - self.q[j][i].conj()).norm());
            }
        }
        r
    }

    pub fn trace(&self) -> Complex64 {
        self.q[0][0] + self.q[1][1]
    }

    /// Eigenvalues of the Hermitian part, descending.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.q[0][0].re;
        let d = self.q[1][1].re;
        let b = 0.5 * (self.q[0][1] + self.q[1][0].conj());
        let tr = a + d;
        let disc = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        [0.5 * tr + disc, 0.5 * tr - disc]
    }
}

pub fn q_matrix(pot: &PiecewisePotential, e: f64) -> Result<QMatrix> {
    let s = smatrix(pot, e)?;
    let ds = smatrix_derivative(pot, e)?;
    let hbar = pot.hbar();
    let mut q = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..2 {
                acc += s[i][k] * ds[j][k].conj();
            }
            q[i][j] = Complex64::new(0.0, hbar) * acc;
        }
    }
    Ok(QMatrix { e, q })
}

// ---------------------------------------------------------------------------
// Breit-Wigner model

/// Isolated-resonance S-matrix model S(E) = 1 - i A / (E - E0 + i Gamma/2)
/// with factorized coupling A_{ab} = gamma_a gamma_b^*.
#[derive(Debug, Clone, Copy)]
pub struct BreitWignerModel {
    pub e0: f64,
    pub gamma: f64,
    pub gamma_vec: [Complex64; 2],
    pub hbar: f64,
}

impl BreitWignerModel {
    /// Width is fixed by unitarity: Gamma = sum |gamma_a|^2.
    pub fn new(e0: f64, gamma_vec: [Complex64; 2], hbar: f64) -> Result<Self> {
        let gamma = gamma_vec[0].norm_sqr() + gamma_vec[1].norm_sqr();
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Domain("Breit-Wigner width must be positive".into()));
        }
        Ok(Self { e0, gamma, gamma_vec, hbar })
    }

    pub fn coupling_matrix(&self) -> Mat2 {
        let g = self.gamma_vec;
        [[g[0] * g[0].conj(), g[0] * g[1].conj()], [g[1] * g[0].conj(), g[1] * g[1].conj()]]
    }

    pub fn s_matrix(&self, e: f64) -> Mat2 {
        let a = self.coupling_matrix();
        let d = Complex64::new(e - self.e0, 0.5 * self.gamma);
        let mut s = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let unit = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
                s[i][j] = unit - Complex64::new(0.0, 1.0) * a[i][j] / d;
            }
        }
        s
    }

    /// Largest diagonal lifetime q_m(E) = hbar Gamma / [(E-E0)^2 + Gamma^2/4].
    pub fn q_max(&self, e: f64) -> f64 {
        self.hbar * self.gamma / ((e - self.e0).powi(2) + 0.25 * self.gamma * self.gamma)
    }

    /// Q(E) = P q_m with the rank-1 projector P = A / Gamma.
    pub fn q_matrix(&self, e: f64) -> Mat2 {
        let a = self.coupling_matrix();
        let qm = self.q_max(e);
        let mut q = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                q[i][j] = a[i][j] / self.gamma * qm;
            }
        }
        q
    }
}

pub fn breit_wigner_s(model: &BreitWignerModel, e: f64) -> Mat2 {
    model.s_matrix(e)
}

pub fn breit_wigner_qmax(model: &BreitWignerModel, e: f64) -> f64 {
    model.q_max(e)
}

// ---------------------------------------------------------------------------
// Negative-delay bounds

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundVariant {
    /// -m d / p: assumes positivity of the extrapolated phase time and may
    /// be violated near a loosely bound state.
    Naive,
    /// (m/p)(-d - hbar/(2p)) with d = 2b, for even potentials supported on
    /// [-b, b]; the weaker closed form of the rigorous bound.
    Rigorous,
}

/// Lower bound on the transmission delay. For `Naive` pass the barrier
/// width d; for `Rigorous` pass the half-support b.
pub fn negative_delay_bound(
    p: f64,
    d_or_b: f64,
    variant: BoundVariant,
    mass: f64,
    hbar: f64,
) -> f64 {
    match variant {
        BoundVariant::Naive => -mass * d_or_b / p,
        BoundVariant::Rigorous => {
            let d = 2.0 * d_or_b;
            mass / p * (-d - hbar / (2.0 * p))
        }
    }
}

/// Sharper oscillatory form of the rigorous bound, available when the
/// eigenphases are known. Follows from the channel-wise log-derivative
/// identities at the support edge: the even channel obeys
/// delta_0' >= -b/hbar - sin(2pb/hbar + 2 delta_0)/(2p), the odd channel
/// delta_1' >= -b/hbar + sin(2pb/hbar + 2 delta_1)/(2p), so
///
/// Delta t_{++} >= (m/p){-2b + (hbar/2p)[sin(2pb/hbar + 2 delta_1)
///                                        - sin(2pb/hbar + 2 delta_0)]}.
pub fn oscillatory_delay_bound(
    p: f64,
    b: f64,
    delta0: f64,
    delta1: f64,
    mass: f64,
    hbar: f64,
) -> f64 {
    let x = 2.0 * p * b / hbar;
    mass / p
        * (-2.0 * b + hbar / (2.0 * p) * ((x + 2.0 * delta1).sin() - (x + 2.0 * delta0).sin()))
}

// ---------------------------------------------------------------------------
// Hartman transition

/// Width scale separating the Hartman plateau from quasiclassical growth for
/// a square barrier, in both its exact and approximate forms.
#[derive(Debug, Clone, Copy)]
pub struct HartmanTransition {
    pub kappa_c: f64,
    /// First above-barrier transmission resonance momentum (|T| = 1).
    pub p_resonance: f64,
    /// hbar sqrt(-ln |T(p_c)|) / |p_r - p_c|.
    pub delta_exact: f64,
    /// hbar sqrt(kappa_c d) / |p_r - p_c|.
    pub delta_approx: f64,
}

/// Locate the first above-barrier |T| = 1 resonance in (p0, 3 p0],
/// p0 = sqrt(2 m V0), and evaluate the packet-width transition scale.
pub fn hartman_transition_width(
    pot: &PiecewisePotential,
    p_c: f64,
) -> Result<HartmanTransition> {
    let segs = pot.segments();
    if segs.len() != 1 || segs[0].v <= 0.0 {
        return Err(Error::Domain("Hartman transition is defined for a single square barrier".into()));
    }
    let v0 = segs[0].v;
    let d = segs[0].width();
    let m = pot.mass();
    let hbar = pot.hbar();
    let e_c = p_c * p_c / (2.0 * m);
    if !(e_c < v0) {
        return Err(Error::Domain(format!("need E_c < V0, got E_c = {e_c}, V0 = {v0}")));
    }
    let kappa_c = (2.0 * m * (v0 - e_c)).sqrt() / hbar;

    let p0 = (2.0 * m * v0).sqrt();
    let tmag = |p: f64| amplitudes(pot, p).map(|a| a.t.norm()).unwrap_or(0.0);
    // Scan for the first local maximum above the barrier, then refine.
    let n = 4000;
    let mut bracket = None;
    let mut prev2 = tmag(p0 * (1.0 + 1e-6));
    let mut prev1 = tmag(p0 * (1.0 + 2.0 / n as f64));
    for i in 2..=n {
        let p = p0 * (1.0 + 2.0 * i as f64 / n as f64);
        let cur = tmag(p);
        if prev1 >= prev2 && prev1 >= cur && prev1 > 0.9 {
            bracket = Some((p0 * (1.0 + 2.0 * (i - 2) as f64 / n as f64), p));
            break;
        }
        prev2 = prev1;
        prev1 = cur;
    }
    let (lo, hi) = bracket.ok_or_else(|| {
        Error::Resolution(format!("no |T| = 1 resonance found in ({p0}, {}]", 3.0 * p0))
    })?;
    let (p_r, t_max) = crate::numerics::golden_max(&mut |p| tmag(p), lo, hi, 1e-12 * p0);
    if t_max < 1.0 - 1e-8 {
        return Err(Error::Resolution(format!(
            "candidate resonance at p = {p_r} only reaches |T| = {t_max}"
        )));
    }
    let t_pc = tmag(p_c);
    let delta_exact = hbar * (-t_pc.ln()).sqrt() / (p_r - p_c).abs();
    let delta_approx = hbar * (kappa_c * d).sqrt() / (p_r - p_c).abs();
    Ok(HartmanTransition { kappa_c, p_resonance: p_r, delta_exact, delta_approx })
}
