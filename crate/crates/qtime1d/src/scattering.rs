//! Stationary 1D scattering off piecewise-constant potentials.
//!
//! Amplitudes come from a 2x2 transfer-matrix product over segments. Each
//! segment propagates (psi, psi') with a plane or evanescent closed form
//! chosen by the sign of E - v; opaque segments factor out the growing
//! exponential and track its logarithm so products stay finite for
//! kappa * width far beyond 700.
//!
//! Conventions: the incident wave carries the h^{-1/2} plane-wave
//! normalization; transmission satisfies T^r = T^l (time reversal), so a
//! single `t` is reported. Unwrapped phases are anchored at the
//! high-momentum end where the transmission phase tends to zero.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::principal_angle;
use crate::potential::PiecewisePotential;

/// T, R^l, R^r at one momentum.
#[derive(Debug, Clone, Copy)]
pub struct ScatteringAmplitudes {
    pub p: f64,
    pub t: Complex64,
    pub r_l: Complex64,
    pub r_r: Complex64,
}

impl ScatteringAmplitudes {
    /// |T|^2 + |R|^2 - 1 for the worse of the two reflection channels.
    pub fn unitarity_residual(&self) -> f64 {
        let t2 = self.t.norm_sqr();
        let a = (t2 + self.r_l.norm_sqr() - 1.0).abs();
        let b = (t2 + self.r_r.norm_sqr() - 1.0).abs();
        a.max(b)
    }

    /// Distance of 2 Phi_T - Phi_Rr - Phi_Rl from pi, mod 2 pi.
    pub fn phase_relation_residual(&self) -> f64 {
        let v = 2.0 * self.t.arg() - self.r_r.arg() - self.r_l.arg();
        principal_angle(v - std::f64::consts::PI).abs()
    }
}

/// Real (psi, psi') propagator across one segment, with the growing
/// exponential factored out as exp(log_scale).
#[derive(Debug, Clone, Copy)]
struct SegmentStep {
    m: [[f64; 2]; 2],
    log_scale: f64,
}

fn segment_step(q2: f64, w: f64) -> SegmentStep {
    if q2.abs() * w * w < 1e-12 {
        // Near the band edge both branches coincide with the linear drift.
        let m = [[1.0 - 0.5 * q2 * w * w, w], [-q2 * w, 1.0 - 0.5 * q2 * w * w]];
        return SegmentStep { m, log_scale: 0.0 };
    }
    if q2 > 0.0 {
        let k = q2.sqrt();
        let (s, c) = (k * w).sin_cos();
        SegmentStep { m: [[c, s / k], [-k * s, c]], log_scale: 0.0 }
    } else {
        let kap = (-q2).sqrt();
        let kw = kap * w;
        if kw > 50.0 {
            let e2 = (-2.0 * kw).exp();
            let c = 0.5 * (1.0 + e2);
            let s = 0.5 * (1.0 - e2);
            SegmentStep { m: [[c, s / kap], [kap * s, c]], log_scale: kw }
        } else {
            let c = kw.cosh();
            let s = kw.sinh();
            SegmentStep { m: [[c, s / kap], [kap * s, c]], log_scale: 0.0 }
        }
    }
}

/// Product of all segment steps at energy E, as (matrix, log scale).
fn full_propagator(pot: &PiecewisePotential, e: f64) -> ([[f64; 2]; 2], f64) {
    let m = pot.mass();
    let h2 = pot.hbar() * pot.hbar();
    let mut acc = [[1.0, 0.0], [0.0, 1.0]];
    let mut log_scale = 0.0;
    for s in pot.segments() {
        let q2 = 2.0 * m * (e - s.v) / h2;
        let step = segment_step(q2, s.width());
        acc = mat_mul(step.m, acc);
        log_scale += step.log_scale;
        // Keep entries O(1) between opaque segments.
        let mx = acc.iter().flatten().fold(0.0f64, |a, &b| a.max(b.abs()));
        if mx > 1e100 {
            let ln = mx.ln();
            let inv = 1.0 / mx;
            for row in &mut acc {
                for v in row {
                    *v *= inv;
                }
            }
            log_scale += ln;
        }
    }
    (acc, log_scale)
}

fn mat_mul(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

/// Plane-wave coefficient matrix M with (gamma, delta) = M (alpha, beta):
/// the map from incoming-side to outgoing-side plane-wave coefficients,
/// scaled so the true matrix is exp(log_scale) * M.
fn coefficient_matrix(pot: &PiecewisePotential, p: f64) -> ([[Complex64; 2]; 2], f64) {
    let (a, b) = pot.support();
    let k = p / pot.hbar();
    let e = p * p / (2.0 * pot.mass());
    let (phi, log_scale) = full_propagator(pot, e);
    let i = Complex64::new(0.0, 1.0);
    let ika = i * k * a;
    let ikb = i * k * b;
    // W_a columns: (e^{ika}, ik e^{ika}), (e^{-ika}, -ik e^{-ika}).
    let wa = [[ika.exp(), (-ika).exp()], [i * k * ika.exp(), -i * k * (-ika).exp()]];
    // W_b^{-1} rows.
    let wb_inv = [
        [0.5 * (-ikb).exp(), 0.5 * (-ikb).exp() / (i * k)],
        [0.5 * ikb.exp(), -0.5 * ikb.exp() / (i * k)],
    ];
    let phi_c = [
        [Complex64::new(phi[0][0], 0.0), Complex64::new(phi[0][1], 0.0)],
        [Complex64::new(phi[1][0], 0.0), Complex64::new(phi[1][1], 0.0)],
    ];
    let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
    let tmp = cmat_mul(phi_c, wa);
    let full = cmat_mul(wb_inv, tmp);
    m.clone_from(&full);
    (m, log_scale)
}

fn cmat_mul(a: [[Complex64; 2]; 2], b: [[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

/// Transmission and reflection amplitudes at momentum p > 0.
pub fn amplitudes(pot: &PiecewisePotential, p: f64) -> Result<ScatteringAmplitudes> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::Domain(format!("momentum must be positive and finite, got {p}")));
    }
    if pot.is_free() {
        return Ok(ScatteringAmplitudes {
            p,
            t: Complex64::new(1.0, 0.0),
            r_l: Complex64::new(0.0, 0.0),
            r_r: Complex64::new(0.0, 0.0),
        });
    }
    let (m, log_scale) = coefficient_matrix(pot, p);
    let t = (-log_scale).exp() / m[1][1];
    let r_l = -m[1][0] / m[1][1];
    let r_r = m[0][1] / m[1][1];
    Ok(ScatteringAmplitudes { p, t, r_l, r_r })
}

/// Determinant defect |det M - 1| of the unscaled coefficient matrix;
/// only meaningful when no exponential scaling was factored out.
pub fn wronskian_defect(pot: &PiecewisePotential, p: f64) -> Result<f64> {
    if pot.is_free() {
        return Ok(0.0);
    }
    let (m, log_scale) = coefficient_matrix(pot, p);
    let det = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * (2.0 * log_scale).exp();
    Ok((det - Complex64::new(1.0, 0.0)).norm())
}

// ---------------------------------------------------------------------------
// Scattering wavefunction

/// The stationary state <x|p+> for left incidence, evaluable anywhere.
pub struct ScatteredWave {
    pot: PiecewisePotential,
    p: f64,
    amps: ScatteringAmplitudes,
    /// (psi, psi') at the left edge of each segment.
    states: Vec<(Complex64, Complex64)>,
    norm: f64,
}

impl ScatteredWave {
    pub fn new(pot: &PiecewisePotential, p: f64) -> Result<Self> {
        let amps = amplitudes(pot, p)?;
        let hbar = pot.hbar();
        let norm = 1.0 / (2.0 * std::f64::consts::PI * hbar).sqrt();
        let (a, _) = pot.support();
        let k = p / hbar;
        let i = Complex64::new(0.0, 1.0);
        let e_ika = (i * k * a).exp();
        let mut psi = e_ika + amps.r_l * e_ika.conj();
        let mut dpsi = i * k * (e_ika - amps.r_l * e_ika.conj());
        let e = p * p / (2.0 * pot.mass());
        let h2 = hbar * hbar;
        let mut states = Vec::with_capacity(pot.segments().len());
        for s in pot.segments() {
            states.push((psi, dpsi));
            let q2 = 2.0 * pot.mass() * (e - s.v) / h2;
            let (np, nd) = propagate_value(q2, s.width(), psi, dpsi);
            psi = np;
            dpsi = nd;
        }
        Ok(Self { pot: pot.clone(), p, amps, states, norm })
    }

    pub fn amplitudes(&self) -> &ScatteringAmplitudes {
        &self.amps
    }

    pub fn momentum(&self) -> f64 {
        self.p
    }

    /// Wave value at x, h^{-1/2}-normalized.
    pub fn value(&self, x: f64) -> Complex64 {
        self.value_and_derivative(x).0
    }

    /// Wave value and spatial derivative at x.
    pub fn value_and_derivative(&self, x: f64) -> (Complex64, Complex64) {
        let (a, b) = self.pot.support();
        let k = self.p / self.pot.hbar();
        let i = Complex64::new(0.0, 1.0);
        if self.pot.is_free() || x <= a {
            let ep = (i * k * x).exp();
            let em = ep.conj();
            let r = if self.pot.is_free() { Complex64::new(0.0, 0.0) } else { self.amps.r_l };
            return (
                self.norm * (ep + r * em),
                self.norm * i * k * (ep - r * em),
            );
        }
        if x >= b {
            let ep = (i * k * x).exp();
            return (self.norm * self.amps.t * ep, self.norm * self.amps.t * i * k * ep);
        }
        let idx = self
            .pot
            .segments()
            .iter()
            .position(|s| x >= s.x_lo && x < s.x_hi)
            .expect("x inside support must fall in a segment");
        let s = self.pot.segments()[idx];
        let (psi0, dpsi0) = self.states[idx];
        let e = self.p * self.p / (2.0 * self.pot.mass());
        let q2 = 2.0 * self.pot.mass() * (e - s.v) / (self.pot.hbar() * self.pot.hbar());
        let (psi, dpsi) = propagate_value(q2, x - s.x_lo, psi0, dpsi0);
        (self.norm * psi, self.norm * dpsi)
    }
}

/// Advance (psi, psi') a distance w through a region with psi'' = -q2 psi.
fn propagate_value(q2: f64, w: f64, psi: Complex64, dpsi: Complex64) -> (Complex64, Complex64) {
    if q2.abs() * w * w < 1e-12 {
        return (psi + w * dpsi - 0.5 * q2 * w * w * psi, dpsi - q2 * w * psi);
    }
    if q2 > 0.0 {
        let k = q2.sqrt();
        let (s, c) = (k * w).sin_cos();
        (c * psi + s / k * dpsi, -k * s * psi + c * dpsi)
    } else {
        // Growth/decay split keeps opaque segments finite.
        let kap = (-q2).sqrt();
        let grow = 0.5 * (psi + dpsi / kap);
        let decay = 0.5 * (psi - dpsi / kap);
        let ep = (kap * w).exp();
        let em = (-kap * w).exp();
        (grow * ep + decay * em, kap * (grow * ep - decay * em))
    }
}

/// Tabulated stationary wave on a caller grid.
#[derive(Debug, Clone)]
pub struct StationaryWave {
    pub p: f64,
    pub grid: Vec<f64>,
    pub psi: Vec<Complex64>,
}

pub fn scattering_wave(pot: &PiecewisePotential, p: f64, grid: &[f64]) -> Result<StationaryWave> {
    let wave = ScatteredWave::new(pot, p)?;
    let psi = grid.iter().map(|&x| wave.value(x)).collect();
    Ok(StationaryWave { p, grid: grid.to_vec(), psi })
}

// ---------------------------------------------------------------------------
// Unwrapped phase curves

/// Which phase a [`PhaseCurve`] tracks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseKind {
    T,
    RLeft,
    RRight,
    Delta0,
    Delta1,
}

/// Unwrapped continuous phase over an ascending momentum grid, anchored so
/// the largest-momentum value is the principal branch (Phi(inf) = 0
/// convention for the transmission phase).
#[derive(Debug, Clone)]
pub struct PhaseCurve {
    momenta: Vec<f64>,
    phi: Vec<f64>,
    kind: PhaseKind,
    mass: f64,
    hbar: f64,
}

impl PhaseCurve {
    pub fn momenta(&self) -> &[f64] {
        &self.momenta
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn kind(&self) -> PhaseKind {
        self.kind
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    fn window(&self, p: f64) -> Result<usize> {
        let n = self.momenta.len();
        if n < 5 {
            return Err(Error::Resolution("phase curve needs at least 5 nodes".into()));
        }
        if !(p >= self.momenta[2] && p <= self.momenta[n - 3]) {
            return Err(Error::Domain(format!(
                "p = {p} too close to the phase-curve edge [{}, {}]",
                self.momenta[0],
                self.momenta[n - 1]
            )));
        }
        let i = self.momenta.partition_point(|&q| q < p).min(n - 3).max(2);
        Ok(i - 2)
    }

    /// d phi / d p by the derivative of the local 5-point Lagrange
    /// interpolant; p must sit at least two nodes inside the grid.
    pub fn derivative_at(&self, p: f64) -> Result<f64> {
        let s = self.window(p)?;
        let xs: [f64; 5] = self.momenta[s..s + 5].try_into().unwrap();
        let ys: [f64; 5] = self.phi[s..s + 5].try_into().unwrap();
        Ok(crate::numerics::lagrange5_derivative(&xs, &ys, p))
    }

    /// Interpolated phase value.
    pub fn value_at(&self, p: f64) -> Result<f64> {
        let s = self.window(p)?;
        let mut acc = 0.0;
        for i in 0..5 {
            let mut l = 1.0;
            for j in 0..5 {
                if j != i {
                    l *= (p - self.momenta[s + j]) / (self.momenta[s + i] - self.momenta[s + j]);
                }
            }
            acc += self.phi[s + i] * l;
        }
        Ok(acc)
    }
}

/// Raw principal angle of the tracked amplitude at one momentum. Delta kinds
/// return twice the eigenphase (2 delta_j) so the same unwrap machinery
/// applies; the curve is halved at the end.
fn raw_angle(pot: &PiecewisePotential, kind: PhaseKind, p: f64) -> Result<f64> {
    let amp = amplitudes(pot, p)?;
    let v = match kind {
        PhaseKind::T => amp.t,
        PhaseKind::RLeft => amp.r_l,
        PhaseKind::RRight => amp.r_r,
        PhaseKind::Delta0 => amp.t + amp.r_l,
        PhaseKind::Delta1 => amp.t - amp.r_l,
    };
    if v.norm() < 1e-13 {
        return Err(Error::Resolution(format!(
            "amplitude magnitude below 1e-13 at p = {p}; phase undefined"
        )));
    }
    Ok(v.arg())
}

/// True phase change theta(p_hi) - theta(p_lo), resolved by interval
/// bisection so that no hidden 2 pi wrap survives.
fn resolved_delta(
    pot: &PiecewisePotential,
    kind: PhaseKind,
    p_lo: f64,
    th_lo: f64,
    p_hi: f64,
    th_hi: f64,
    depth: usize,
) -> Result<f64> {
    let raw = principal_angle(th_hi - th_lo);
    if raw.abs() < 0.5 && depth < 12 {
        return Ok(raw);
    }
    if depth == 0 {
        return Err(Error::Resolution(format!(
            "phase unwrap cannot be resolved on ({p_lo}, {p_hi}) after 12 bisection levels"
        )));
    }
    let pm = 0.5 * (p_lo + p_hi);
    let thm = raw_angle(pot, kind, pm)?;
    let left = resolved_delta(pot, kind, p_lo, th_lo, pm, thm, depth - 1)?;
    let right = resolved_delta(pot, kind, pm, thm, p_hi, th_hi, depth - 1)?;
    Ok(left + right)
}

/// Continuous unwrapped phase of the requested kind on the given grid.
///
/// Fails with a resolution error naming the offending interval when the true
/// phase step between adjacent grid nodes reaches pi/2.
pub fn phase_curve(
    pot: &PiecewisePotential,
    momenta: &[f64],
    kind: PhaseKind,
) -> Result<PhaseCurve> {
    if momenta.len() < 5 {
        return Err(Error::Config("phase curve grid needs at least 5 nodes".into()));
    }
    if momenta.windows(2).any(|w| w[1] <= w[0]) || momenta[0] <= 0.0 {
        return Err(Error::Config("momentum grid must be positive and strictly ascending".into()));
    }
    let delta_kind = matches!(kind, PhaseKind::Delta0 | PhaseKind::Delta1);
    let work_pot;
    let pot_ref = if delta_kind {
        if !pot.is_symmetric() {
            return Err(Error::Domain("eigenphases require a symmetric potential".into()));
        }
        let (a, b) = pot.support();
        work_pot = pot.shifted(-0.5 * (a + b));
        &work_pot
    } else {
        pot
    };

    let n = momenta.len();
    let mut theta = Vec::with_capacity(n);
    for &p in momenta {
        theta.push(raw_angle(pot_ref, kind, p)?);
    }
    let mut phi = vec![0.0; n];
    // Anchor: principal value at the high-momentum end.
    phi[n - 1] = theta[n - 1];
    for i in (0..n - 1).rev() {
        let d = resolved_delta(pot_ref, kind, momenta[i], theta[i], momenta[i + 1], theta[i + 1], 12)?;
        if d.abs() >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::Resolution(format!(
                "phase step {:.4} rad on ({}, {}) reaches pi/2; refine the grid",
                d,
                momenta[i],
                momenta[i + 1]
            )));
        }
        phi[i] = phi[i + 1] - d;
    }
    if delta_kind {
        for v in &mut phi {
            *v *= 0.5;
        }
    }
    Ok(PhaseCurve {
        momenta: momenta.to_vec(),
        phi,
        kind,
        mass: pot.mass(),
        hbar: pot.hbar(),
    })
}

/// Real eigenphase shifts (delta_0, delta_1) of a symmetric potential,
/// coordinates re-centered at the symmetry point, each on the principal
/// branch (-pi/2, pi/2].
pub fn eigenphases(pot: &PiecewisePotential, p: f64) -> Result<(f64, f64)> {
    if !pot.is_symmetric() {
        return Err(Error::Domain("eigenphases require a symmetric potential".into()));
    }
    let (a, b) = pot.support();
    let centered = pot.shifted(-0.5 * (a + b));
    let amp = amplitudes(&centered, p)?;
    let s0 = amp.t + amp.r_l;
    let s1 = amp.t - amp.r_l;
    for (name, s) in [("e^{2i delta_0}", s0), ("e^{2i delta_1}", s1)] {
        if (s.norm() - 1.0).abs() > 1e-8 {
            return Err(Error::Resolution(format!("|{name}| deviates from 1 by {:.2e}", (s.norm() - 1.0).abs())));
        }
    }
    Ok((0.5 * s0.arg(), 0.5 * s1.arg()))
}

/// Outcome of a Levinson check.
#[derive(Debug, Clone, Copy)]
pub struct LevinsonReport {
    /// Phi_T(0+) - Phi_T(p_max).
    pub phase_drop: f64,
    pub n_b: usize,
    /// |phase_drop - pi (n_b - 1/2)| under the generic T(0) = 0 branch.
    pub residual: f64,
}

/// Compare the transmission-phase drop against pi (n_b - 1/2).
///
/// Free motion is rejected: T is identically 1 there, the amplitude has no
/// zero at p = 0 and the theorem's -pi/2 offset does not apply.
pub fn levinson_check(
    pot: &PiecewisePotential,
    p_max: f64,
    n_grid: usize,
) -> Result<LevinsonReport> {
    if pot.is_free() {
        return Err(Error::Domain(
            "Levinson check not applicable to free motion (T has no zero at p = 0)".into(),
        ));
    }
    if n_grid < 16 {
        return Err(Error::Config("levinson_check needs at least 16 grid nodes".into()));
    }
    let grid = crate::numerics::geomspace(p_max * 1e-7, p_max, n_grid);
    let curve = phase_curve(pot, &grid, PhaseKind::T)?;
    let phi = curve.phi();
    let tail = phi[phi.len() - 1];
    if tail.abs() >= 0.01 {
        return Err(Error::Domain(format!(
            "p_max too small: |Phi_T(p_max)| = {:.3} >= 0.01",
            tail.abs()
        )));
    }
    let n_b = crate::potential::count_bound_states(pot).n_b;
    let phase_drop = phi[0] - tail;
    let residual = (phase_drop - std::f64::consts::PI * (n_b as f64 - 0.5)).abs();
    Ok(LevinsonReport { phase_drop, n_b, residual })
}
