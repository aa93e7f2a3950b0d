//! Crank-Nicolson grid propagator: the independent dynamical oracle for the
//! analytic wave-packet and source machinery.
//!
//! The step is the unitary Cayley form (1 + i dt H/2 hbar) psi^{n+1} =
//! (1 - i dt H/2 hbar) psi^n on a uniform grid with Dirichlet ends; the end
//! value can be driven by a time-dependent boundary source. Optional
//! absorbing layers add a negative imaginary potential ramp at the edges.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::potential::PiecewisePotential;

/// Quartic absorbing ramp of the given width and strength at the grid edges.
#[derive(Debug, Clone, Copy)]
pub struct Absorber {
    pub width: f64,
    pub strength: f64,
    pub left: bool,
    pub right: bool,
}

/// One propagation request.
pub struct PropagationConfig<'a> {
    pub dt: f64,
    pub steps: usize,
    /// Record the probability inside (a, b) at every step.
    pub window: Option<(f64, f64)>,
    /// Record psi at the nearest grid node of each probe point.
    pub probes: &'a [f64],
    pub absorber: Option<Absorber>,
    /// Driven value of the leftmost grid point, psi(x_0, t).
    pub drive: Option<&'a dyn Fn(f64) -> Complex64>,
}

impl<'a> PropagationConfig<'a> {
    pub fn new(dt: f64, steps: usize) -> Self {
        Self { dt, steps, window: None, probes: &[], absorber: None, drive: None }
    }
}

/// Propagation record: times include t = 0.
pub struct Propagation {
    pub times: Vec<f64>,
    /// Discrete norm sum |psi|^2 dx per recorded time.
    pub norms: Vec<f64>,
    pub window_prob: Option<Vec<f64>>,
    /// probe_values[i][k] = psi at probe i, time k.
    pub probe_values: Vec<Vec<Complex64>>,
    pub final_state: Vec<Complex64>,
}

/// Propagate `psi0` on `grid` for `cfg.steps` Crank-Nicolson steps.
pub fn grid_propagate(
    pot: &PiecewisePotential,
    grid: &[f64],
    psi0: &[Complex64],
    cfg: &PropagationConfig,
) -> Result<Propagation> {
    let n = grid.len();
    if n < 8 {
        return Err(Error::Config("grid needs at least 8 nodes".into()));
    }
    if psi0.len() != n {
        return Err(Error::Config("psi0 length must match the grid".into()));
    }
    let dx = grid[1] - grid[0];
    if dx <= 0.0 || grid.windows(2).any(|w| ((w[1] - w[0]) - dx).abs() > 1e-9 * dx) {
        return Err(Error::Config("grid must be uniform and ascending".into()));
    }
    if !(cfg.dt > 0.0 && cfg.dt.is_finite()) || cfg.steps == 0 {
        return Err(Error::Config("need dt > 0 and steps >= 1".into()));
    }
    let hbar = pot.hbar();
    if cfg.dt * pot.max_abs_v() / hbar > 0.1 {
        return Err(Error::Config(format!(
            "dt max|V|/hbar = {:.3} > 0.1: potential phase per step too coarse",
            cfg.dt * pot.max_abs_v() / hbar
        )));
    }

    let m = pot.mass();
    let kin = hbar * hbar / (2.0 * m * dx * dx);
    // H diag and off-diagonal; the absorber contributes -i W on the diagonal.
    let mut diag = Vec::with_capacity(n);
    for &x in grid {
        let mut v = Complex64::new(2.0 * kin + pot.value_at(x), 0.0);
        if let Some(ab) = &cfg.absorber {
            let mut w = 0.0;
            if ab.left {
                let d = (x - grid[0]) / ab.width;
                if d < 1.0 {
                    w += ab.strength * (1.0 - d).powi(4);
                }
            }
            if ab.right {
                let d = (grid[n - 1] - x) / ab.width;
                if d < 1.0 {
                    w += ab.strength * (1.0 - d).powi(4);
                }
            }
            v += Complex64::new(0.0, -w);
        }
        diag.push(v);
    }
    let off = Complex64::new(-kin, 0.0);

    let lam = Complex64::new(0.0, 0.5 * cfg.dt / hbar);
    // A = 1 + lam H, B = 1 - lam H; rows 0 and n-1 pinned to identity.
    let a_diag: Vec<Complex64> = diag.iter().map(|&d| 1.0 + lam * d).collect();
    let a_off = lam * off;
    let b_diag: Vec<Complex64> = diag.iter().map(|&d| 1.0 - lam * d).collect();
    let b_off = -lam * off;

    // Thomas prefactorization of A with identity first/last rows.
    let mut c_prime = vec![Complex64::new(0.0, 0.0); n];
    let mut denom = vec![Complex64::new(0.0, 0.0); n];
    denom[0] = Complex64::new(1.0, 0.0);
    c_prime[0] = Complex64::new(0.0, 0.0);
    for i in 1..n - 1 {
        denom[i] = a_diag[i] - a_off * c_prime[i - 1];
        c_prime[i] = a_off / denom[i];
    }
    denom[n - 1] = Complex64::new(1.0, 0.0);

    let probe_idx: Vec<usize> = cfg
        .probes
        .iter()
        .map(|&x| {
            let i = ((x - grid[0]) / dx).round() as i64;
            i.clamp(0, n as i64 - 1) as usize
        })
        .collect();

    let window_cells = cfg.window.map(|(a, b)| {
        if !(a < b) {
            return Err(Error::Config("window needs a < b".into()));
        }
        Ok((a, b))
    });
    let window_cells = match window_cells {
        Some(Err(e)) => return Err(e),
        Some(Ok(w)) => Some(w),
        None => None,
    };

    let mut psi = psi0.to_vec();
    let mut times = Vec::with_capacity(cfg.steps + 1);
    let mut norms = Vec::with_capacity(cfg.steps + 1);
    let mut window_prob = window_cells.map(|_| Vec::with_capacity(cfg.steps + 1));
    let mut probe_values: Vec<Vec<Complex64>> = vec![Vec::with_capacity(cfg.steps + 1); probe_idx.len()];

    let record = |psi: &[Complex64],
                  t: f64,
                  times: &mut Vec<f64>,
                  norms: &mut Vec<f64>,
                  window_prob: &mut Option<Vec<f64>>,
                  probe_values: &mut Vec<Vec<Complex64>>| {
        times.push(t);
        norms.push(psi.iter().map(|v| v.norm_sqr()).sum::<f64>() * dx);
        if let (Some(wp), Some((a, b))) = (window_prob.as_mut(), window_cells) {
            wp.push(window_probability(grid, psi, dx, a, b));
        }
        for (k, &idx) in probe_idx.iter().enumerate() {
            probe_values[k].push(psi[idx]);
        }
    };

    record(&psi, 0.0, &mut times, &mut norms, &mut window_prob, &mut probe_values);

    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    let mut work = vec![Complex64::new(0.0, 0.0); n];
    for step in 0..cfg.steps {
        let t_next = (step as f64 + 1.0) * cfg.dt;
        // rhs = B psi with pinned ends.
        rhs[0] = match &cfg.drive {
            Some(g) => g(t_next),
            None => Complex64::new(0.0, 0.0),
        };
        rhs[n - 1] = Complex64::new(0.0, 0.0);
        for i in 1..n - 1 {
            rhs[i] = b_off * psi[i - 1] + b_diag[i] * psi[i] + b_off * psi[i + 1];
        }
        // Thomas solve A psi' = rhs.
        work[0] = rhs[0];
        for i in 1..n - 1 {
            work[i] = (rhs[i] - a_off * work[i - 1]) / denom[i];
        }
        work[n - 1] = rhs[n - 1];
        psi[n - 1] = work[n - 1];
        for i in (1..n - 1).rev() {
            psi[i] = work[i] - c_prime[i] * psi[i + 1];
        }
        psi[0] = work[0];
        record(&psi, t_next, &mut times, &mut norms, &mut window_prob, &mut probe_values);
    }

    Ok(Propagation { times, norms, window_prob, probe_values, final_state: psi })
}

/// Trapezoid probability in [a, b] with linear partial end cells.
fn window_probability(grid: &[f64], psi: &[Complex64], dx: f64, a: f64, b: f64) -> f64 {
    let n = grid.len();
    let dens = |i: usize| psi[i].norm_sqr();
    let x0 = grid[0];
    let lo = ((a - x0) / dx).ceil().max(0.0) as usize;
    let hi = (((b - x0) / dx).floor() as usize).min(n - 1);
    if lo >= hi {
        return 0.0;
    }
    let mut acc = 0.5 * (dens(lo) + dens(hi));
    for i in lo + 1..hi {
        acc += dens(i);
    }
    let mut total = acc * dx;
    // Partial cells at both ends.
    if lo > 0 && a < grid[lo] {
        let f = (grid[lo] - a) / dx;
        let da = dens(lo - 1) * f + dens(lo) * (1.0 - f);
        total += 0.5 * (da + dens(lo)) * (grid[lo] - a);
    }
    if hi + 1 < n && b > grid[hi] {
        let f = (b - grid[hi]) / dx;
        let db = dens(hi) * (1.0 - f) + dens(hi + 1) * f;
        total += 0.5 * (dens(hi) + db) * (b - grid[hi]);
    }
    total
}
