//! Independent numerical oracles shared by the integration tests.
//!
//! Everything here deliberately avoids the library's analytic evaluation
//! paths: the w-function is integrated from its defining contour integral,
//! scattering is solved by Numerov ODE integration seeded on the far side,
//! bound states come from the even/odd transcendental conditions, free
//! evolution from the propagator convolution, and the source field from a
//! steepest-descent-path quadrature.

#![allow(dead_code)]

use num_complex::Complex64;
use qtime1d::numerics::{adaptive_simpson_complex, principal_angle};
use qtime1d::potential::PiecewisePotential;

/// w(z) by adaptive quadrature of (1/i pi) int e^{-u^2}/(u - z) du along a
/// contour passing below the pole: the real axis shifted down by
/// max(0, 0.5 - Im z) for the upper half plane, and the exact reflection
/// identity for Im z < 0 (the shifted contour is exponentially
/// ill-conditioned there).
pub fn w_oracle(z: Complex64) -> Complex64 {
    if z.im < 0.0 {
        return 2.0 * (-z * z).exp() - w_oracle(-z);
    }
    let s = (0.5 - z.im).max(0.0);
    let f = |t: f64| {
        let u = Complex64::new(t, -s);
        (-u * u).exp() / (u - z)
    };
    let v = adaptive_simpson_complex(&mut |t| f(t), -8.0, 8.0, 1e-14, 48);
    v / Complex64::new(0.0, std::f64::consts::PI)
}

/// Closed-form amplitudes of a single square barrier/well on [0, d].
pub fn square_amplitudes_closed(v0: f64, d: f64, m: f64, hbar: f64, p: f64) -> (Complex64, Complex64) {
    let k = p / hbar;
    let e = p * p / (2.0 * m);
    let i = Complex64::new(0.0, 1.0);
    let eikd = (i * k * d).exp();
    if e < v0 {
        let kap = (2.0 * m * (v0 - e)).sqrt() / hbar;
        let (ch, sh) = ((kap * d).cosh(), (kap * d).sinh());
        let denom = ch + 0.5 * i * (kap / k - k / kap) * sh;
        let t = 1.0 / (eikd * denom);
        let r = -0.5 * i * (k / kap + kap / k) * sh * t * eikd;
        (t, r)
    } else {
        // Analytic continuation kappa -> i k' of the tunneling form; the
        // free limit k' -> k forces the minus sign (denom -> e^{-i k d}).
        let kp = (2.0 * m * (e - v0)).sqrt() / hbar;
        let (c, s) = ((kp * d).cos(), (kp * d).sin());
        let denom = c - 0.5 * i * (k / kp + kp / k) * s;
        let t = 1.0 / (eikd * denom);
        let r = 0.5 * i * (kp / k - k / kp) * s * t * eikd;
        (t, r)
    }
}

/// Stationary scattering solved by marching the first-order system
/// (psi, psi') with classic RK4 from the transmitted side, one sub-grid per
/// segment so no step ever straddles a potential jump, then decomposing into
/// incident + reflected plane waves at the left support edge. Returns
/// (t, r_l) and the h^{-1/2}-normalized wave tabulated on the march nodes.
pub struct OdeSolution {
    pub t: Complex64,
    pub r_l: Complex64,
    pub xs: Vec<f64>,
    pub psi: Vec<Complex64>,
}

pub fn ode_scatter(pot: &PiecewisePotential, p: f64, h_target: f64) -> OdeSolution {
    let (a, b) = pot.support();
    let m = pot.mass();
    let hbar = pot.hbar();
    let e = p * p / (2.0 * m);
    let k = p / hbar;
    let i = Complex64::new(0.0, 1.0);

    // Seed: pure transmitted wave e^{ikx} at x = b.
    let mut psi = (i * k * b).exp();
    let mut dpsi = i * k * psi;
    let mut xs = vec![b];
    let mut vals = vec![psi];

    let rk4 = |psi: &mut Complex64, dpsi: &mut Complex64, f: f64, h: f64| {
        // y = (psi, dpsi), y' = (dpsi, f psi); f constant over the step.
        let (y1, y2) = (*psi, *dpsi);
        let k1 = (y2, f * y1);
        let k2 = (y2 + 0.5 * h * k1.1, f * (y1 + 0.5 * h * k1.0));
        let k3 = (y2 + 0.5 * h * k2.1, f * (y1 + 0.5 * h * k2.0));
        let k4 = (y2 + h * k3.1, f * (y1 + h * k3.0));
        *psi = y1 + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        *dpsi = y2 + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
    };

    for s in pot.segments().iter().rev() {
        let f = 2.0 * m * (s.v - e) / (hbar * hbar);
        let n = ((s.width() / h_target).ceil() as usize).max(4);
        let h = -s.width() / n as f64;
        for j in 0..n {
            rk4(&mut psi, &mut dpsi, f, h);
            xs.push(s.x_hi + (j + 1) as f64 * h);
            vals.push(psi);
        }
    }
    debug_assert!((xs.last().unwrap() - a).abs() < 1e-9);

    // psi = A e^{ika} + B e^{-ika} at the left edge, exactly.
    let a_coef = 0.5 * (-i * k * a).exp() * (psi + dpsi / (i * k));
    let b_coef = 0.5 * (i * k * a).exp() * (psi - dpsi / (i * k));
    let t = 1.0 / a_coef;
    let r_l = b_coef / a_coef;
    let norm = 1.0 / (2.0 * std::f64::consts::PI * hbar).sqrt();
    let psi_tab = vals.iter().map(|v| v / a_coef * norm).collect();
    OdeSolution { t, r_l, xs, psi: psi_tab }
}

/// Even/odd transcendental bound-state count of the symmetric square well
/// of depth v0 > 0 and full width `width`: sign changes of
/// k sin(k w) - kappa cos(k w) (even) and k cos(k w) + kappa sin(k w) (odd),
/// k in (0, K), kappa = sqrt(K^2 - k^2).
pub fn square_well_bound_count(v0: f64, width: f64, m: f64, hbar: f64) -> usize {
    assert!(v0 > 0.0);
    let w = 0.5 * width;
    let big_k = (2.0 * m * v0).sqrt() / hbar;
    let even = |k: f64| {
        let kap = (big_k * big_k - k * k).max(0.0).sqrt();
        k * (k * w).sin() - kap * (k * w).cos()
    };
    let odd = |k: f64| {
        let kap = (big_k * big_k - k * k).max(0.0).sqrt();
        k * (k * w).cos() + kap * (k * w).sin()
    };
    let n = 200_000;
    let mut count = 0;
    for g in [&even as &dyn Fn(f64) -> f64, &odd] {
        let mut prev = g(big_k * 1e-9);
        for i in 1..=n {
            let k = big_k * (i as f64 / n as f64) * (1.0 - 1e-12);
            let cur = g(k);
            if prev.signum() != cur.signum() {
                count += 1;
            }
            prev = cur;
        }
    }
    count
}

/// Free evolution by direct convolution with the propagator
/// (m/(i h t))^{1/2} exp[i m (x-x')^2 / (2 hbar t)].
pub fn free_propagate_convolution(
    psi0: &dyn Fn(f64) -> Complex64,
    m: f64,
    hbar: f64,
    x: f64,
    t: f64,
    x_lo: f64,
    x_hi: f64,
) -> Complex64 {
    let h = 2.0 * std::f64::consts::PI * hbar;
    let pref = (Complex64::new(0.0, -1.0) * m / (h * t)).sqrt();
    let integrand = |xp: f64| {
        let d = x - xp;
        psi0(xp) * Complex64::new(0.0, m * d * d / (2.0 * hbar * t)).exp()
    };
    pref * adaptive_simpson_complex(&mut |xp| integrand(xp), x_lo, x_hi, 1e-12, 48)
}

/// Sharp-onset source field by quadrature along the steepest-descent line
/// through the saddle k_s = x/(2t), plus the pole residue once the line has
/// crossed it (t > tau). Valid for t > 0; the straight-line momentum contour
/// represents the causal field only there.
pub fn source_oracle(omega0: f64, x: f64, t: f64) -> Complex64 {
    assert!(t > 0.0);
    let kappa0 = (1.0 - omega0).sqrt();
    let i = Complex64::new(0.0, 1.0);
    let ks = x / (2.0 * t);
    let dir = Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4);
    let poles = [i * kappa0, -i * kappa0];
    let g = |s: f64| -> Complex64 {
        let k = ks + dir * s;
        let mut acc = Complex64::new(0.0, 0.0);
        for q in poles {
            acc += 1.0 / (k - q);
        }
        acc * (-s * s * t).exp()
    };
    let s_max = 12.0 / t.sqrt();
    // Split at the projections of the poles onto the line.
    let mut cuts = vec![-s_max, s_max];
    for q in poles {
        let s_near = ((q - ks) * dir.conj()).re;
        if s_near.abs() < s_max {
            cuts.push(s_near);
        }
    }
    cuts.sort_by(|p, q| p.total_cmp(q));
    let mut sd = Complex64::new(0.0, 0.0);
    for w in cuts.windows(2) {
        sd += adaptive_simpson_complex(&mut |s| g(s), w[0], w[1], 1e-13, 48);
    }
    let phase = (i * ks * ks * t).exp();
    let mut psi = -Complex64::new(0.0, -t).exp() / (2.0 * std::f64::consts::PI * i)
        * phase
        * dir
        * sd;
    if ks < kappa0 {
        // Residue picked up when the path crossed i kappa0 at t = tau.
        psi += Complex64::new(0.0, -omega0 * t).exp() * (-kappa0 * x).exp();
    }
    psi
}

/// Causality route: the frequency-plane contour of the same source field,
/// psi = (1/2 pi i) int dw e^{-i w t + i sqrt(w - 1) x} / (w0 - w), taken on
/// a line Im w = c above all singularities. The representation is
/// c-independent, and for t < 0 lifting the line makes the integrand
/// uniformly negligible: the quadrature exhibits the causal zero.
pub fn source_causality_oracle(omega0: f64, x: f64, t: f64) -> Complex64 {
    assert!(t < 0.0);
    let c = 35.0 / t.abs();
    let w_max = 300.0 * c.max(1.0);
    let f = |a: f64| -> Complex64 {
        let w = Complex64::new(a, c);
        let k = (w - 1.0).sqrt(); // principal branch: Im k > 0 above the cut
        (Complex64::new(0.0, -t) * w + Complex64::new(0.0, x) * k).exp() / (omega0 - w)
    };
    let v = adaptive_simpson_complex(&mut |a| f(a), -w_max, w_max, 1e-14, 52);
    v / (2.0 * std::f64::consts::PI * Complex64::new(0.0, 1.0))
}

/// Sequentially unwrapped phase of tabulated complex values, anchored at the
/// principal value of the last entry.
pub fn unwrap_phases(values: &[Complex64]) -> Vec<f64> {
    let n = values.len();
    let mut out = vec![0.0; n];
    out[n - 1] = values[n - 1].arg();
    for i in (0..n - 1).rev() {
        let d = principal_angle(values[i + 1].arg() - values[i].arg());
        out[i] = out[i + 1] - d;
    }
    out
}

/// Deterministic xorshift for reproducible random sweeps without external
/// seeding ceremony.
pub struct XorShift(u64);

impl XorShift {
    pub fn new(seed: u64) -> Self {
        Self(seed.max(1))
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }
}

/// Random contiguous piecewise potential with n segments in [v_lo, v_hi].
pub fn random_potential(
    rng: &mut XorShift,
    n_seg: usize,
    v_lo: f64,
    v_hi: f64,
) -> PiecewisePotential {
    use qtime1d::potential::Segment;
    let mut edges = vec![rng.range(-1.5, -0.5)];
    for _ in 0..n_seg {
        let last = *edges.last().unwrap();
        edges.push(last + rng.range(0.2, 1.2));
    }
    let segments: Vec<Segment> = edges
        .windows(2)
        .map(|w| Segment { x_lo: w[0], x_hi: w[1], v: rng.range(v_lo, v_hi) })
        .collect();
    PiecewisePotential::new(segments, 1.0, 1.0).unwrap()
}

/// Least-squares slope of ln y against ln x.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    qtime1d::numerics::fit_slope(&lx, &ly)
}
