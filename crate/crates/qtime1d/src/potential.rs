//! Finite-support piecewise-constant potentials and their bound states.
//!
//! Only piecewise-constant potentials are first class: each segment has a
//! closed-form plane/evanescent solution, so every downstream quantity stays
//! analytically checkable. Smooth potentials must be pre-discretized by the
//! caller.

use serde::Deserialize;

use crate::error::{Error, Result};

/// One constant-potential segment `[x_lo, x_hi)` at energy `v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub x_lo: f64,
    pub x_hi: f64,
    pub v: f64,
}

impl Segment {
    pub fn width(&self) -> f64 {
        self.x_hi - self.x_lo
    }
}

/// A finite-support potential: contiguous constant segments, V = 0 outside.
///
/// Atomic units by default (`mass` = `hbar` = 1). Immutable after
/// construction and shareable across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePotential {
    segments: Vec<Segment>,
    mass: f64,
    hbar: f64,
}

#[derive(Deserialize)]
struct PotentialDoc {
    segments: Vec<[f64; 3]>,
    #[serde(default = "one")]
    mass: f64,
    #[serde(default = "one")]
    hbar: f64,
}

fn one() -> f64 {
    1.0
}

impl PiecewisePotential {
    pub fn new(segments: Vec<Segment>, mass: f64, hbar: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::Config(format!("mass must be positive and finite, got {mass}")));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::Config(format!("hbar must be positive and finite, got {hbar}")));
        }
        for (i, s) in segments.iter().enumerate() {
            if !(s.x_lo.is_finite() && s.x_hi.is_finite() && s.v.is_finite()) {
                return Err(Error::PotentialFormat { index: i, reason: "non-finite value".into() });
            }
            if s.x_lo >= s.x_hi {
                return Err(Error::PotentialFormat {
                    index: i,
                    reason: format!("empty or reversed interval [{}, {}]", s.x_lo, s.x_hi),
                });
            }
        }
        for i in 1..segments.len() {
            let prev = segments[i - 1].x_hi;
            let cur = segments[i].x_lo;
            if cur < prev {
                return Err(Error::PotentialFormat {
                    index: i,
                    reason: format!("overlap: starts at {cur} before previous end {prev}"),
                });
            }
            if cur > prev {
                return Err(Error::PotentialFormat {
                    index: i,
                    reason: format!("gap: starts at {cur} after previous end {prev}"),
                });
            }
        }
        Ok(Self { segments, mass, hbar })
    }

    /// Free motion (no segments), atomic units.
    pub fn free() -> Self {
        Self { segments: Vec::new(), mass: 1.0, hbar: 1.0 }
    }

    /// Single square barrier/well of height `v0` on `[0, d]`, atomic units.
    pub fn square(v0: f64, d: f64) -> Result<Self> {
        Self::new(vec![Segment { x_lo: 0.0, x_hi: d, v: v0 }], 1.0, 1.0)
    }

    /// Parse the on-disk JSON form
    /// `{"segments": [[x_lo, x_hi, v], ...], "mass": m, "hbar": h}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: PotentialDoc = serde_json::from_str(text)?;
        let segments =
            doc.segments.iter().map(|s| Segment { x_lo: s[0], x_hi: s[1], v: s[2] }).collect();
        Self::new(segments, doc.mass, doc.hbar)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Support interval; (0, 0) for free motion.
    pub fn support(&self) -> (f64, f64) {
        match (self.segments.first(), self.segments.last()) {
            (Some(a), Some(b)) => (a.x_lo, b.x_hi),
            _ => (0.0, 0.0),
        }
    }

    pub fn is_free(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn value_at(&self, x: f64) -> f64 {
        for s in &self.segments {
            if x >= s.x_lo && x < s.x_hi {
                return s.v;
            }
        }
        0.0
    }

    pub fn min_v(&self) -> f64 {
        self.segments.iter().map(|s| s.v).fold(0.0, f64::min)
    }

    pub fn max_abs_v(&self) -> f64 {
        self.segments.iter().map(|s| s.v.abs()).fold(0.0, f64::max)
    }

    /// Translate the support by `dx`.
    pub fn shifted(&self, dx: f64) -> Self {
        let segments = self
            .segments
            .iter()
            .map(|s| Segment { x_lo: s.x_lo + dx, x_hi: s.x_hi + dx, v: s.v })
            .collect();
        Self { segments, mass: self.mass, hbar: self.hbar }
    }

    /// True when the potential is mirror-symmetric about its support midpoint.
    pub fn is_symmetric(&self) -> bool {
        let n = self.segments.len();
        if n == 0 {
            return true;
        }
        let (a, b) = self.support();
        let mid = 0.5 * (a + b);
        let tol = 1e-12 * (b - a).max(1.0);
        for i in 0..n {
            let s = &self.segments[i];
            let t = &self.segments[n - 1 - i];
            let lo = 2.0 * mid - t.x_hi;
            let hi = 2.0 * mid - t.x_lo;
            if (s.x_lo - lo).abs() > tol || (s.x_hi - hi).abs() > tol || (s.v - t.v).abs() > 1e-12 {
                return false;
            }
        }
        true
    }

    /// Dimensionless well strength sqrt(2 m |min V|) * width / hbar; zero for
    /// non-negative potentials. Sets the bound-state scan density.
    pub fn well_strength(&self) -> f64 {
        let depth = -self.min_v();
        if depth <= 0.0 {
            return 0.0;
        }
        let (a, b) = self.support();
        (2.0 * self.mass * depth).sqrt() * (b - a) / self.hbar
    }
}

/// Bound-state census of a potential.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundStateCount {
    pub n_b: usize,
    /// Strictly negative, sorted ascending (deepest first).
    pub energies: Vec<f64>,
}

/// Count bound states by sign-change bracketing plus bisection of the
/// transfer-matrix matching condition on the negative-energy axis.
///
/// The condition function F(E) propagates the solution growing from the left
/// (psi ~ e^{+kappa x}) across the support and demands a purely decaying tail
/// on the right: F(E) = psi'(b) + kappa psi(b).
pub fn count_bound_states(pot: &PiecewisePotential) -> BoundStateCount {
    if pot.min_v() >= 0.0 {
        return BoundStateCount { n_b: 0, energies: Vec::new() };
    }
    let e_min = pot.min_v();
    // Weyl-type density: enough grid points that no level is skipped at
    // desk scale.
    let n_grid =
        ((10.0 * pot.segments().len() as f64 * pot.well_strength()).ceil() as usize).clamp(64, 40_000);
    let e_hi = -1e-14 * e_min.abs();
    let mut energies = Vec::new();
    let mut prev_e = e_min * (1.0 - 1e-12);
    let mut prev_f = matching_condition(pot, prev_e);
    for i in 1..=n_grid {
        let e = e_min + (e_hi - e_min) * (i as f64 / n_grid as f64);
        let f = matching_condition(pot, e);
        if prev_f == 0.0 {
            energies.push(prev_e);
        } else if prev_f.signum() != f.signum() && f != 0.0 {
            let root = crate::numerics::bisect(
                &mut |e| matching_condition(pot, e),
                prev_e,
                e,
                1e-12 * e_min.abs().max(1.0),
            );
            if let Ok(r) = root {
                energies.push(r);
            }
        }
        prev_e = e;
        prev_f = f;
    }
    energies.sort_by(|a, b| a.total_cmp(b));
    energies.dedup_by(|a, b| (*a - *b).abs() < 1e-10 * e_min.abs().max(1.0));
    BoundStateCount { n_b: energies.len(), energies }
}

/// F(E) for the bound-state search, renormalized segment by segment to keep
/// the magnitude O(1); positive rescaling preserves sign changes.
fn matching_condition(pot: &PiecewisePotential, e: f64) -> f64 {
    let m = pot.mass();
    let hbar = pot.hbar();
    let kappa_out = (-2.0 * m * e).sqrt() / hbar;
    let mut psi = 1.0_f64;
    let mut dpsi = kappa_out;
    for s in pot.segments() {
        let w = s.width();
        let q2 = 2.0 * m * (e - s.v) / (hbar * hbar);
        let (psi1, dpsi1) = if q2 >= 0.0 {
            let k = q2.sqrt();
            if k * w < 1e-8 {
                (psi + w * dpsi, dpsi - q2 * w * psi)
            } else {
                (
                    (k * w).cos() * psi + (k * w).sin() / k * dpsi,
                    -k * (k * w).sin() * psi + (k * w).cos() * dpsi,
                )
            }
        } else {
            let kap = (-q2).sqrt();
            // cosh/sinh with the growing exponential factored out.
            let (c, sh) = if kap * w > 30.0 {
                (0.5, 0.5)
            } else {
                let ch = (kap * w).cosh();
                let sh = (kap * w).sinh();
                let scale = ch.max(1.0);
                (ch / scale, sh / scale)
            };
            (c * psi + sh / kap * dpsi, kap * sh * psi + c * dpsi)
        };
        let norm = psi1.abs().max(dpsi1.abs() / kappa_out.max(1.0)).max(1e-300);
        psi = psi1 / norm;
        dpsi = dpsi1 / norm;
    }
    dpsi + kappa_out * psi
}
