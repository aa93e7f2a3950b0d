use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;

use qtime1d::faddeeva::{w_asymptotic, w_eval, w_series, WAccuracyPolicy};
use qtime1d::numerics::{geomspace, linspace};
use qtime1d::potential::PiecewisePotential;
use qtime1d::scattering::{amplitudes, phase_curve, PhaseKind};
use qtime1d::survival::{survival_contour_quadrature, survival_w_sum, PoleSet};
use qtime1d::times::{
    delay_matrix, dwell_time_stationary, extrapolated_phase_time, negative_delay_bound,
    q_matrix, BoundVariant,
};
use qtime1d::wavepacket::{
    gaussian_momentum_amplitude, free_decay_slope, passage_instants, suppressed_momentum_amplitude,
    GaussianPacketSpec, PacketScattering, WaveKind,
};
use qtime1d::source::{
    pole_saddle_ratio, source_exact, source_residue, source_saddle, transient_scales,
    SourceSpec,
};

use crate::emit::{fmt, resolve_format, write_out, Format, Table};
use crate::{AmpChoice, Command, Figure, TimesQuantity};

type AnyError = Box<dyn std::error::Error>;

fn load_potential(path: &Path) -> Result<PiecewisePotential, AnyError> {
    PiecewisePotential::from_path(path)
        .map_err(|e| format!("cannot load potential {}: {e}", path.display()).into())
}

pub fn run(cmd: Command) -> Result<(), AnyError> {
    match cmd {
        Command::Amplitudes { potential, pmin, pmax, n, out, format } => {
            let pot = load_potential(&potential)?;
            let format = resolve_format(format.map(Into::into), out.as_deref());
            run_amplitudes(&pot, pmin, pmax, n, out, format)
        }
        Command::Times { potential, quantity, pmin, pmax, emin, emax, n, a, b, out, format } => {
            let pot = load_potential(&potential)?;
            let format = resolve_format(format.map(Into::into), out.as_deref());
            run_times(&pot, quantity, pmin, pmax, emin, emax, n, a, b, out, format)
        }
        Command::Packet { potential, xc, pc, delta, a, b, tmin, tmax, n, out, format } => {
            let pot = load_potential(&potential)?;
            let format = resolve_format(format.map(Into::into), out.as_deref());
            run_packet(&pot, xc, pc, delta, a, b, tmin, tmax, n, out, format)
        }
        Command::PacketTimes { potential, xc, pc, delta, a, b, out } => {
            let pot = load_potential(&potential)?;
            let spec = GaussianPacketSpec::new(xc, pc, delta)?;
            let record = passage_instants(&pot, &spec, a, b)?;
            let mut s = serde_json::to_string_pretty(&record)?;
            s.push('\n');
            write_out(out.as_ref(), &s)?;
            Ok(())
        }
        Command::DecaySlope { amp, p0, x0, delta, alpha, x, tmin, tmax, n, out, format } => {
            let format = resolve_format(format.map(Into::into), out.as_deref());
            run_decay_slope(amp, p0, x0, delta, alpha, x, tmin, tmax, n, out, format)
        }
        Command::Survival { poles, tmin, tmax, n, out, format } => {
            let text = std::fs::read_to_string(&poles)
                .map_err(|e| format!("cannot read pole set {}: {e}", poles.display()))?;
            let ps = PoleSet::from_json(&text)?;
            let format = resolve_format(format.map(Into::into), out.as_deref());
            run_survival(&ps, tmin, tmax, n, out, format)
        }
        Command::Source { omega0, x, tmin, tmax, n, out, format } => {
            let spec = SourceSpec::new(omega0, x)?;
            let format = resolve_format(format.map(Into::into), out.as_deref());
            run_source(&spec, tmin, tmax, n, out, format)
        }
        Command::SourceScales { omega0, x, out } => {
            let spec = SourceSpec::new(omega0, x)?;
            let scales = transient_scales(&spec);
            let mut s = serde_json::to_string_pretty(&scales)?;
            s.push('\n');
            write_out(out.as_ref(), &s)?;
            Ok(())
        }
        Command::FaddeevaSelftest { out } => run_faddeeva_selftest(out),
        Command::Reproduce { figure, out, format } => {
            let format = resolve_format(format.map(Into::into), out.as_deref());
            match figure {
                Figure::Fig1 => run_fig1(out, format),
                Figure::Fig2 => run_fig2(out, format),
            }
        }
    }
}

fn run_amplitudes(
    pot: &PiecewisePotential,
    pmin: f64,
    pmax: f64,
    n: usize,
    out: Option<PathBuf>,
    format: Format,
) -> Result<(), AnyError> {
    if !(pmin > 0.0 && pmax > pmin) {
        return Err("need 0 < pmin < pmax".into());
    }
    if n < 5 {
        return Err("need n >= 5".into());
    }
    let grid = linspace(pmin, pmax, n);
    let curve = phase_curve(pot, &grid, PhaseKind::T)?;
    let rows: Result<Vec<Vec<f64>>, qtime1d::Error> = grid
        .par_iter()
        .zip(curve.phi().par_iter())
        .map(|(&p, &phi)| {
            let a = amplitudes(pot, p)?;
            Ok(vec![
                p,
                a.t.re,
                a.t.im,
                a.t.norm_sqr(),
                phi,
                a.r_l.re,
                a.r_l.im,
                a.r_r.re,
                a.r_r.im,
            ])
        })
        .collect();
    let table = Table {
        header: vec!["p", "re_t", "im_t", "t2", "phi_t", "re_r_l", "im_r_l", "re_r_r", "im_r_r"],
        rows: rows?,
    };
    write_out(out.as_ref(), &table.render(format))?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_times(
    pot: &PiecewisePotential,
    quantity: TimesQuantity,
    pmin: Option<f64>,
    pmax: Option<f64>,
    emin: Option<f64>,
    emax: Option<f64>,
    n: usize,
    a: Option<f64>,
    b: Option<f64>,
    out: Option<PathBuf>,
    format: Format,
) -> Result<(), AnyError> {
    let p_grid = || -> Result<Vec<f64>, AnyError> {
        let (lo, hi) = (pmin.ok_or("--pmin required")?, pmax.ok_or("--pmax required")?);
        if !(lo > 0.0 && hi > lo && n >= 5) {
            return Err("need 0 < pmin < pmax and n >= 5".into());
        }
        Ok(linspace(lo, hi, n))
    };
    let e_grid = || -> Result<Vec<f64>, AnyError> {
        let (lo, hi) = (emin.ok_or("--emin required")?, emax.ok_or("--emax required")?);
        if !(lo > 0.0 && hi > lo && n >= 2) {
            return Err("need 0 < emin < emax and n >= 2".into());
        }
        Ok(linspace(lo, hi, n))
    };
    let table = match quantity {
        TimesQuantity::Dwell => {
            let grid = p_grid()?;
            let (slo, shi) = pot.support();
            let (a, b) = (a.unwrap_or(slo), b.unwrap_or(shi));
            let rows: Result<Vec<_>, qtime1d::Error> = grid
                .par_iter()
                .map(|&p| Ok(vec![p, dwell_time_stationary(pot, a, b, p)?]))
                .collect();
            Table { header: vec!["p", "tau_dwell"], rows: rows? }
        }
        TimesQuantity::Phase => {
            let grid = p_grid()?;
            let curve = phase_curve(pot, &grid, PhaseKind::T)?;
            let (slo, shi) = pot.support();
            let d = shi - slo;
            let mut rows = Vec::new();
            for (i, &p) in grid.iter().enumerate() {
                if i < 2 || i + 2 >= grid.len() {
                    continue; // derivative stencil must stay interior
                }
                let dphi = curve.derivative_at(p)?;
                let tau = extrapolated_phase_time(d, p, &curve)?;
                rows.push(vec![p, curve.phi()[i], dphi, tau]);
            }
            Table { header: vec!["p", "phi_t", "dphi_dp", "tau_phase_extrapolated"], rows }
        }
        TimesQuantity::Delay => {
            let grid = e_grid()?;
            let rows: Result<Vec<_>, qtime1d::Error> = grid
                .par_iter()
                .map(|&e| {
                    let dm = delay_matrix(pot, e)?;
                    let get = |i: usize, j: usize| dm.dt[i][j].unwrap_or(f64::NAN);
                    Ok(vec![e, get(0, 0), get(0, 1), get(1, 0), get(1, 1)])
                })
                .collect();
            Table { header: vec!["e", "dt_pp", "dt_pm", "dt_mp", "dt_mm"], rows: rows? }
        }
        TimesQuantity::Qmatrix => {
            let grid = e_grid()?;
            let h = 2.0 * std::f64::consts::PI * pot.hbar();
            let rows: Result<Vec<_>, qtime1d::Error> = grid
                .par_iter()
                .map(|&e| {
                    let q = q_matrix(pot, e)?;
                    Ok(vec![
                        e,
                        q.q[0][0].re,
                        q.q[1][1].re,
                        q.q[0][1].re,
                        q.q[0][1].im,
                        q.trace().re / h,
                        q.hermiticity_residual(),
                    ])
                })
                .collect();
            Table {
                header: vec!["e", "q_pp", "q_mm", "re_q_pm", "im_q_pm", "trace_over_h", "herm_residual"],
                rows: rows?,
            }
        }
        TimesQuantity::Bounds => {
            if !pot.is_symmetric() {
                return Err("bounds require an even (mirror-symmetric) potential".into());
            }
            let grid = p_grid()?;
            let (slo, shi) = pot.support();
            let d = shi - slo;
            let half = 0.5 * d;
            let m = pot.mass();
            let hbar = pot.hbar();
            let rows: Result<Vec<_>, qtime1d::Error> = grid
                .par_iter()
                .map(|&p| {
                    let e = p * p / (2.0 * m);
                    let dm = delay_matrix(pot, e)?;
                    Ok(vec![
                        p,
                        dm.dt[0][0].unwrap_or(f64::NAN),
                        negative_delay_bound(p, d, BoundVariant::Naive, m, hbar),
                        negative_delay_bound(p, half, BoundVariant::Rigorous, m, hbar),
                    ])
                })
                .collect();
            Table { header: vec!["p", "dt_pp", "naive_bound", "rigorous_bound"], rows: rows? }
        }
    };
    write_out(out.as_ref(), &table.render(format))?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_packet(
    pot: &PiecewisePotential,
    xc: f64,
    pc: f64,
    delta: f64,
    a: f64,
    b: f64,
    tmin: f64,
    tmax: f64,
    n: usize,
    out: Option<PathBuf>,
    format: Format,
) -> Result<(), AnyError> {
    if !(tmax > tmin && n >= 3) {
        return Err("need tmin < tmax and n >= 3".into());
    }
    let spec = GaussianPacketSpec::new(xc, pc, delta)?;
    spec.validate_against(pot)?;
    let ctx = PacketScattering::new(pot, &spec)?;
    let ts = linspace(tmin, tmax, n);
    let fluxes: Result<Vec<(f64, f64)>, qtime1d::Error> = ts
        .par_iter()
        .map(|&t| {
            let j_in = ctx.flux(WaveKind::Incident, a, t)?;
            let j_r = ctx.flux(WaveKind::Reflected, a, t)?;
            let j_b = ctx.flux(WaveKind::Transmitted, b, t)?;
            Ok((j_in + j_r, j_b))
        })
        .collect();
    let fluxes = fluxes?;
    // Running interval probability from the net edge fluxes.
    let dt = ts[1] - ts[0];
    let mut p_ab = 0.0;
    let mut rows = Vec::with_capacity(n);
    let mut prev: Option<(f64, f64)> = None;
    for (&t, &(ja, jb)) in ts.iter().zip(&fluxes) {
        if let Some((pja, pjb)) = prev {
            p_ab += 0.5 * dt * ((pja - pjb) + (ja - jb));
        }
        rows.push(vec![t, ja, jb, p_ab]);
        prev = Some((ja, jb));
    }
    let table = Table { header: vec!["t", "j_a", "j_b", "p_ab"], rows };
    write_out(out.as_ref(), &table.render(format))?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_decay_slope(
    amp: AmpChoice,
    p0: f64,
    x0: f64,
    delta: f64,
    alpha: f64,
    x: f64,
    tmin: f64,
    tmax: f64,
    n: usize,
    out: Option<PathBuf>,
    format: Format,
) -> Result<(), AnyError> {
    if !(tmin > 0.0 && tmax > tmin && n >= 3) {
        return Err("need 0 < tmin < tmax and n >= 3".into());
    }
    let amp = match amp {
        AmpChoice::Gauss => gaussian_momentum_amplitude(p0, x0, delta, 1.0, 4097)?,
        AmpChoice::Suppressed => suppressed_momentum_amplitude(p0, x0, delta, alpha, 1.0, 4097)?,
    };
    let ts = geomspace(tmin, tmax, n);
    let slopes = free_decay_slope(&amp, 1.0, 1.0, x, &ts)?;
    let rows = slopes.iter().map(|&(t, s)| vec![t, s]).collect();
    let table = Table { header: vec!["t", "slope"], rows };
    write_out(out.as_ref(), &table.render(format))?;
    Ok(())
}

fn run_survival(
    ps: &PoleSet,
    tmin: f64,
    tmax: f64,
    n: usize,
    out: Option<PathBuf>,
    format: Format,
) -> Result<(), AnyError> {
    if !(tmin > 0.0 && tmax > tmin && n >= 2) {
        return Err("need 0 < tmin < tmax and n >= 2".into());
    }
    let ts = geomspace(tmin, tmax, n);
    let rows: Result<Vec<_>, qtime1d::Error> = ts
        .par_iter()
        .map(|&t| {
            let a = survival_w_sum(ps, t)?;
            let c = survival_contour_quadrature(ps, t)?;
            let resid = (a - c).norm() / a.norm().max(1e-300);
            Ok(vec![t, a.re, a.im, a.norm_sqr(), resid])
        })
        .collect();
    let table = Table { header: vec!["t", "re_a", "im_a", "s", "method_residual"], rows: rows? };
    write_out(out.as_ref(), &table.render(format))?;
    Ok(())
}

fn run_source(
    spec: &SourceSpec,
    tmin: f64,
    tmax: f64,
    n: usize,
    out: Option<PathBuf>,
    format: Format,
) -> Result<(), AnyError> {
    if !(tmin > 0.0 && tmax > tmin && n >= 2) {
        return Err("need 0 < tmin < tmax and n >= 2".into());
    }
    let ts = linspace(tmin, tmax, n);
    let rows: Result<Vec<_>, qtime1d::Error> = ts
        .par_iter()
        .map(|&t| {
            let psi = source_exact(spec, t)?;
            let s = source_saddle(spec, t)?;
            let r = source_residue(spec, t);
            Ok(vec![
                t,
                psi.re,
                psi.im,
                psi.norm_sqr(),
                s.norm_sqr(),
                r.norm_sqr(),
                pole_saddle_ratio(spec, t)?,
            ])
        })
        .collect();
    let table = Table {
        header: vec!["t", "re_psi", "im_psi", "dens", "saddle2", "residue2", "ratio"],
        rows: rows?,
    };
    write_out(out.as_ref(), &table.render(format))?;
    Ok(())
}

fn run_faddeeva_selftest(out: Option<PathBuf>) -> Result<(), AnyError> {
    let policy = WAccuracyPolicy::default();
    let w = |z: Complex64| w_eval(z, &policy).unwrap();
    let mut reflection = 0.0f64;
    let mut conjugation = 0.0f64;
    // Deterministic polar grid over |z| <= 10.
    for ir in 1..=40 {
        for ith in 0..48 {
            let r = 10.0 * ir as f64 / 40.0;
            let th = 2.0 * std::f64::consts::PI * ith as f64 / 48.0;
            let z = Complex64::from_polar(r, th);
            let lhs = w(-z);
            let rhs = 2.0 * (-z * z).exp() - w(z);
            reflection = reflection.max((lhs - rhs).norm() / (1.0 + w(z).norm()));
            let c = (w(z.conj()) - w(-z).conj()).norm() / w(-z).norm().max(1.0);
            conjugation = conjugation.max(c);
        }
    }
    let mut real_axis = 0.0f64;
    for i in 0..400 {
        let x = -10.0 + 20.0 * i as f64 / 399.0;
        let v = w(Complex64::new(x, 0.0));
        real_axis = real_axis.max((v.re - (-x * x).exp()).abs());
    }
    // Series vs truncated asymptotics on the switch circle.
    let r = policy.switch_radius();
    let mut overlap = 0.0f64;
    for ith in 0..64 {
        let th = std::f64::consts::PI * (0.01 + 0.98 * ith as f64 / 63.0);
        let z = Complex64::from_polar(r + 0.01, th);
        let a = w_series(z, usize::MAX);
        let b = w_asymptotic(z, policy.asym_terms).unwrap();
        overlap = overlap.max((a - b).norm() / b.norm());
    }
    let doc = serde_json::json!({
        "reflection_max": fmt(reflection),
        "conjugation_max": fmt(conjugation),
        "real_axis_max": fmt(real_axis),
        "series_asymptotic_overlap_max": fmt(overlap),
    });
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    write_out(out.as_ref(), &s)?;
    Ok(())
}

/// Transmission-phase curves of the square barrier V0 = 5 for widths
/// d = 1, 2, 3 (atomic units) over p in (0, 6].
fn run_fig1(out: Option<PathBuf>, format: Format) -> Result<(), AnyError> {
    let grid = linspace(0.01, 6.0, 600);
    let mut columns = Vec::new();
    for d in [1.0, 2.0, 3.0] {
        let pot = PiecewisePotential::square(5.0, d)?;
        let curve = phase_curve(&pot, &grid, PhaseKind::T)?;
        columns.push(curve.phi().to_vec());
    }
    let rows = grid
        .iter()
        .enumerate()
        .map(|(i, &p)| vec![p, columns[0][i], columns[1][i], columns[2][i]])
        .collect();
    let table = Table { header: vec!["p", "phi_t_d1", "phi_t_d2", "phi_t_d3"], rows };
    write_out(out.as_ref(), &table.render(format))?;
    Ok(())
}

/// Long-time density slope curves for the plain and p = 0 suppressed
/// Gaussian packets (p0 = 1, x0 = -10, alpha = 0.5, delta = 1, x = 0, m = 1).
fn run_fig2(out: Option<PathBuf>, format: Format) -> Result<(), AnyError> {
    let gauss = gaussian_momentum_amplitude(1.0, -10.0, 1.0, 1.0, 4097)?;
    let supp = suppressed_momentum_amplitude(1.0, -10.0, 1.0, 0.5, 1.0, 4097)?;
    let ts = geomspace(1.0, 2e4, 61);
    let sg = free_decay_slope(&gauss, 1.0, 1.0, 0.0, &ts)?;
    let ss = free_decay_slope(&supp, 1.0, 1.0, 0.0, &ts)?;
    let rows = sg
        .iter()
        .zip(&ss)
        .map(|(&(t, a), &(_, b))| vec![t, a, b])
        .collect();
    let table = Table { header: vec!["t", "slope_gaussian", "slope_suppressed"], rows };
    write_out(out.as_ref(), &table.render(format))?;
    Ok(())
}
