//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured margins (visible under `--nocapture`).

mod support;

use num_complex::Complex64;
use qtime1d::numerics::{golden_max, linspace, simpson_tabulated};
use qtime1d::potential::{count_bound_states, PiecewisePotential, Segment};
use qtime1d::scattering::{amplitudes, levinson_check, phase_curve, PhaseKind};
use qtime1d::times::{
    breit_wigner_qmax, delay_matrix, extrapolated_phase_time, negative_delay_bound, q_matrix,
    smatrix, BoundVariant, BreitWignerModel,
};
use qtime1d::wavepacket::{
    free_decay_slope, gaussian_momentum_amplitude, mean_delay_q, packet_momentum_amplitude,
    passage_instants, suppressed_momentum_amplitude, GaussianPacketSpec,
};
use qtime1d::survival::{
    survival_contour_quadrature, survival_split, survival_w_sum, Pole, PoleSet,
};
use qtime1d::source::{
    pole_saddle_ratio, source_exact, source_saddle, transient_crossover, transient_scales,
    SourceSpec,
};
use support::{
    loglog_slope, random_potential, source_oracle, square_amplitudes_closed,
    square_well_bound_count, unwrap_phases, w_oracle, XorShift,
};

#[test]
fn criterion_01_unitarity_and_phase_relation() {
    let mut rng = XorShift::new(0xace_0001);
    let mut worst_u = 0.0f64;
    let mut worst_ph = 0.0f64;
    for _ in 0..1000 {
        let n_seg = 1 + (rng.next_u64() % 4) as usize;
        let pot = random_potential(&mut rng, n_seg, -4.0, 6.0);
        let p = rng.range(0.05, 5.0);
        let a = amplitudes(&pot, p).unwrap();
        worst_u = worst_u.max(a.unitarity_residual());
        if a.r_l.norm() > 1e-10 && a.r_r.norm() > 1e-10 {
            worst_ph = worst_ph.max(a.phase_relation_residual());
        }
    }
    assert!(worst_u <= 1e-10, "unitarity residual {worst_u:e}");
    assert!(worst_ph <= 1e-8, "phase-relation residual {worst_ph:e}");
    println!(
        "acceptance 01 unitarity+phase relation: PASS (|T|^2+|R|^2-1 max {worst_u:.2e}, phase residual max {worst_ph:.2e})"
    );
}

#[test]
fn criterion_02_levinson() {
    // Square barrier: no bound states, drop -pi/2.
    let barrier = PiecewisePotential::square(5.0, 1.0).unwrap();
    let rep = levinson_check(&barrier, 600.0, 4000).unwrap();
    assert_eq!(rep.n_b, 0);
    assert!(
        (rep.phase_drop + std::f64::consts::FRAC_PI_2).abs() < 0.02,
        "barrier drop {}",
        rep.phase_drop
    );
    let d_barrier = rep.phase_drop;

    // Wells with one and two bound states, counted independently.
    let mut drops = Vec::new();
    for (v0, w, expect_nb) in [(0.3, 1.2, 1usize), (2.0, 2.0, 2usize)] {
        assert_eq!(square_well_bound_count(v0, w, 1.0, 1.0), expect_nb);
        let well = PiecewisePotential::square(-v0, w).unwrap();
        let rep = levinson_check(&well, 600.0, 4000).unwrap();
        assert_eq!(rep.n_b, expect_nb, "counted bound states");
        let target = std::f64::consts::PI * (expect_nb as f64 - 0.5);
        assert!(
            (rep.phase_drop - target).abs() < 0.02,
            "well v0={v0}: drop {} vs {}",
            rep.phase_drop,
            target
        );
        drops.push(rep.phase_drop);
    }
    println!(
        "acceptance 02 Levinson: PASS (barrier {d_barrier:.4} ~ -pi/2; wells {:.4}, {:.4} ~ pi/2, 3pi/2)",
        drops[0], drops[1]
    );
}

#[test]
fn criterion_03_fig1_reproduction() {
    let grid = linspace(0.01, 6.0, 600);
    let mut slopes_at_1 = Vec::new();
    let mut worst = 0.0f64;
    for d in [1.0, 2.0, 3.0] {
        let pot = PiecewisePotential::square(5.0, d).unwrap();
        let curve = phase_curve(&pot, &grid, PhaseKind::T).unwrap();
        // Independent closed-form curve, unwrapped with the same convention.
        let closed: Vec<Complex64> =
            grid.iter().map(|&p| square_amplitudes_closed(5.0, d, 1.0, 1.0, p).0).collect();
        let phi_closed = unwrap_phases(&closed);
        for (a, b) in curve.phi().iter().zip(&phi_closed) {
            worst = worst.max((a - b).abs());
        }
        slopes_at_1.push(curve.derivative_at(1.0).unwrap());
    }
    assert!(worst <= 1e-9, "pointwise phase deviation {worst:e}");
    // Tunneling-region slope more negative as the barrier widens.
    assert!(
        slopes_at_1[0] > slopes_at_1[1] && slopes_at_1[1] > slopes_at_1[2],
        "slopes {slopes_at_1:?}"
    );
    println!(
        "acceptance 03 figure-1 curves: PASS (max closed-form deviation {worst:.2e}; dPhi/dp at p=1: {:.3} > {:.3} > {:.3})",
        slopes_at_1[0], slopes_at_1[1], slopes_at_1[2]
    );
}

#[test]
fn criterion_04_hartman_plateau_and_crossover() {
    // Plateau: extrapolated phase time within 1% of 2m/(p kappa) once
    // kappa d >= 8.
    let v0 = 5.0f64;
    let mut worst_rel = 0.0f64;
    for p in [0.6, 1.0, 1.4] {
        let kappa = (2.0 * (v0 - 0.5 * p * p)).sqrt();
        let d = (8.0 / kappa).max(3.0);
        let pot = PiecewisePotential::square(v0, d).unwrap();
        let grid = linspace(0.7 * p, 1.3 * p, 121);
        let curve = phase_curve(&pot, &grid, PhaseKind::T).unwrap();
        let tau = extrapolated_phase_time(d, p, &curve).unwrap();
        let hartman = 2.0 / (p * kappa);
        let rel = (tau - hartman).abs() / hartman;
        worst_rel = worst_rel.max(rel);
        assert!(rel <= 0.01, "p={p}: tau {tau} vs plateau {hartman}");
    }

    // Crossover: the packet-averaged transmitted exit instant. Below the
    // width-transition scale of the packet the under-barrier momenta carry
    // the average and it barely moves; past it the above-barrier momenta
    // take over (the dominant transmitted momentum jumps across
    // sqrt(2 m V0)) and the average grows quasi-linearly with d.
    let spec = GaussianPacketSpec::new(-40.0, 1.5, 2.0).unwrap();
    let amp = packet_momentum_amplitude(&spec, 1.0).unwrap();
    let mean_exit = |d: f64| -> (f64, f64) {
        let pot = PiecewisePotential::square(v0, d).unwrap();
        let g = amp.grid();
        let h = amp.spacing();
        let t_tab: Vec<Complex64> = g.iter().map(|&p| amplitudes(&pot, p).unwrap().t).collect();
        let mut w = Vec::with_capacity(g.len());
        let mut num = Vec::with_capacity(g.len());
        let mut p_dom = (0.0, 0.0);
        for i in 0..g.len() {
            let p = g[i];
            let asq = amp.amp()[i].norm_sqr();
            let t2 = t_tab[i].norm_sqr();
            if asq * t2 > p_dom.1 {
                p_dom = (p, asq * t2);
            }
            let dt = if i == 0 {
                (t_tab[1] - t_tab[0]) / h
            } else if i == g.len() - 1 {
                (t_tab[i] - t_tab[i - 1]) / h
            } else {
                (t_tab[i + 1] - t_tab[i - 1]) / (2.0 * h)
            };
            let t2_dphi = (t_tab[i].conj() * dt).im;
            w.push(asq * t2);
            num.push(asq / p * ((d - spec.x_c) * t2 + t2_dphi));
        }
        (simpson_tabulated(&num, h) / simpson_tabulated(&w, h), p_dom.0)
    };
    // Predicted transition width for this packet (first above-barrier
    // resonance near the crossover scale).
    let kappa_c = (2.0f64 * (v0 - 0.5 * spec.p_c * spec.p_c)).sqrt();
    let p_r = (2.0f64 * v0 + (std::f64::consts::PI / 6.0).powi(2)).sqrt();
    let d_star = spec.delta * spec.delta * (p_r - spec.p_c).powi(2) / kappa_c;
    let p0 = (2.0f64 * v0).sqrt();
    // Dominant momentum switches sides across d*.
    let (t_lo1, p_below) = mean_exit((d_star - 1.0).max(2.0));
    let (_, p_above) = mean_exit(d_star + 1.0);
    assert!(p_below < p0 && p_above > p0,
        "dominant momentum {p_below} / {p_above} does not bracket p0 = {p0} at d* = {d_star}");
    // Plateau: small variation across the tunneling regime.
    let (t_lo0, _) = mean_exit(2.0);
    let plateau_var = (t_lo1 - t_lo0).abs();
    assert!(plateau_var < 0.15 * t_lo0, "plateau variation {plateau_var} vs {t_lo0}");
    // Quasi-linear growth above the crossover.
    let ds = [8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0];
    let times: Vec<f64> = ds.iter().map(|&d| mean_exit(d).0).collect();
    let slope = qtime1d::numerics::fit_slope(&ds, &times);
    let mean_t = times.iter().sum::<f64>() / times.len() as f64;
    let mean_d = ds.iter().sum::<f64>() / ds.len() as f64;
    let ss_res: f64 = ds
        .iter()
        .zip(&times)
        .map(|(d, t)| {
            let fit = mean_t + slope * (d - mean_d);
            (t - fit) * (t - fit)
        })
        .sum();
    let ss_tot: f64 = times.iter().map(|t| (t - mean_t) * (t - mean_t)).sum();
    let r2 = 1.0 - ss_res / ss_tot;
    assert!(slope > 0.2 && slope < 3.0, "late growth slope {slope}");
    assert!(r2 >= 0.85, "late growth not quasi-linear: R^2 = {r2}");
    let growth = times[times.len() - 1] - times[0];
    assert!(growth > 3.0 * plateau_var, "growth {growth} vs plateau variation {plateau_var}");
    println!(
        "acceptance 04 Hartman: PASS (plateau rel dev max {worst_rel:.2e}; crossover d* = {d_star:.2} with dominant p {p_below:.2} -> {p_above:.2} across p0 = {p0:.2}; late slope {slope:.2}, R^2 = {r2:.3})"
    );
}

/// The six-case dual-route regression set shared with the module tests.
fn regression_cases() -> Vec<(PiecewisePotential, GaussianPacketSpec, f64, f64)> {
    let seg = |x_lo, x_hi, v| Segment { x_lo, x_hi, v };
    vec![
        (
            PiecewisePotential::square(5.0, 2.0).unwrap(),
            GaussianPacketSpec::new(-40.0, 1.5, 2.0).unwrap(),
            -18.0,
            20.0,
        ),
        (
            PiecewisePotential::square(-1.0, 2.0).unwrap(),
            GaussianPacketSpec::new(-50.0, 1.0, 4.0).unwrap(),
            -22.0,
            24.0,
        ),
        (
            PiecewisePotential::free(),
            GaussianPacketSpec::new(-45.0, 1.0, 4.0).unwrap(),
            -21.0,
            21.0,
        ),
        (
            PiecewisePotential::new(
                vec![seg(0.0, 0.5, 4.0), seg(0.5, 1.5, 0.0), seg(1.5, 2.0, 4.0)],
                1.0,
                1.0,
            )
            .unwrap(),
            GaussianPacketSpec::new(-45.0, 1.8, 2.5).unwrap(),
            -20.0,
            22.0,
        ),
        (
            PiecewisePotential::new(vec![seg(0.0, 1.0, 2.0), seg(1.0, 2.0, 4.0)], 1.0, 1.0)
                .unwrap(),
            GaussianPacketSpec::new(-38.0, 2.0, 2.0).unwrap(),
            -16.0,
            18.0,
        ),
        (
            PiecewisePotential::square(5.0, 1.0).unwrap(),
            GaussianPacketSpec::new(-55.0, 1.2, 3.0).unwrap(),
            -24.0,
            25.0,
        ),
    ]
}

#[test]
fn criterion_05_dual_route_wavepacket_checks() {
    let mut worst_passage = 0.0f64;
    let mut worst_q = 0.0f64;
    for (i, (pot, spec, a, b)) in regression_cases().iter().enumerate() {
        let rec = passage_instants(pot, spec, *a, *b).unwrap();
        let r = rec.residuals.in_a.max(rec.residuals.out_b).max(rec.residuals.out_a);
        worst_passage = worst_passage.max(r);
        assert!(r <= 5e-3, "case {i}: passage residual {r}");
        if !pot.is_free() {
            let d = mean_delay_q(pot, spec).unwrap();
            worst_q = worst_q.max(d.residual);
            assert!(d.residual <= 1e-2, "case {i}: <Q> residual {}", d.residual);
        }
    }
    println!(
        "acceptance 05 dual-route packet checks: PASS (worst passage residual {worst_passage:.2e} <= 0.5%, worst <Q> residual {worst_q:.2e} <= 1%)"
    );
}

#[test]
fn criterion_06_q_matrix_identities() {
    let pot = PiecewisePotential::square(-2.0, 2.0).unwrap();
    let mut worst_h = 0.0f64;
    let mut worst_diag = 0.0f64;
    for j in 0..50 {
        let e = 0.1 + 0.06 * j as f64;
        let q = q_matrix(&pot, e).unwrap();
        worst_h = worst_h.max(q.hermiticity_residual());
        let s = smatrix(&pot, e).unwrap();
        let dm = delay_matrix(&pot, e).unwrap();
        for al in 0..2 {
            let mut acc = 0.0;
            let mut ok = true;
            for be in 0..2 {
                match dm.dt[al][be] {
                    Some(v) => acc += s[al][be].norm_sqr() * v,
                    None => ok = false,
                }
            }
            if ok {
                worst_diag = worst_diag.max((q.q[al][al].re - acc).abs());
            }
        }
    }
    assert!(worst_h <= 1e-10, "hermiticity {worst_h:e}");
    assert!(worst_diag <= 1e-8, "diagonal decomposition {worst_diag:e}");

    // Spectral trace identity at the reference point.
    let e = 0.5;
    let q = q_matrix(&pot, e).unwrap();
    let p = 1.0;
    let grid = linspace(0.6, 1.4, 161);
    let curve = phase_curve(&pot, &grid, PhaseKind::T).unwrap();
    let rhs = curve.derivative_at(p).unwrap() / p / std::f64::consts::PI;
    let lhs = q.trace().re / (2.0 * std::f64::consts::PI);
    let trace_resid = (lhs - rhs).abs();
    assert!(trace_resid <= 1e-5 * rhs.abs().max(1.0), "trace identity {lhs} vs {rhs}");

    // Breit-Wigner: Q eigenvalues {q_m, 0} and q_m(E0) = 4 hbar / Gamma.
    let mut rng = XorShift::new(0xace_0006);
    let mut worst_bw = 0.0f64;
    for _ in 0..100 {
        let model = BreitWignerModel::new(
            rng.range(0.5, 3.0),
            [
                Complex64::new(rng.range(-1.0, 1.0), rng.range(-1.0, 1.0)),
                Complex64::new(rng.range(-1.0, 1.0), rng.range(-1.0, 1.0)),
            ],
            1.0,
        )
        .unwrap();
        let e = rng.range(0.2, 4.0);
        let qm = breit_wigner_qmax(&model, e);
        let q = model.q_matrix(e);
        let a = q[0][0].re;
        let d = q[1][1].re;
        let b = q[0][1];
        let disc = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        let l1 = 0.5 * (a + d) + disc;
        let l2 = 0.5 * (a + d) - disc;
        worst_bw = worst_bw.max(((l1 - qm) / qm).abs()).max((l2 / qm).abs());
        let qm0 = breit_wigner_qmax(&model, model.e0);
        assert!(
            (qm0 - 4.0 / model.gamma).abs() <= 1e-10 * qm0,
            "q_m(E0) = {qm0} vs 4/Gamma"
        );
    }
    assert!(worst_bw <= 1e-10, "Breit-Wigner eigenvalues {worst_bw:e}");
    println!(
        "acceptance 06 Q identities: PASS (hermiticity {worst_h:.2e}, diagonal {worst_diag:.2e}, trace {trace_resid:.2e}, BW eigenvalues {worst_bw:.2e})"
    );
}

#[test]
fn criterion_07_delay_bounds() {
    // 200 even wells respect the rigorous bound.
    let mut rng = XorShift::new(0xace_0007);
    let mut count = 0;
    let mut margin = f64::INFINITY;
    while count < 200 {
        let depth = rng.range(0.2, 6.0);
        let b = rng.range(0.4, 2.0);
        let pot = PiecewisePotential::new(
            vec![Segment { x_lo: -b, x_hi: b, v: -depth }],
            1.0,
            1.0,
        )
        .unwrap();
        let p = rng.range(0.05, 3.0);
        let e = 0.5 * p * p;
        let dt = match delay_matrix(&pot, e).unwrap().dt[0][0] {
            Some(v) => v,
            None => continue,
        };
        let bound = negative_delay_bound(p, b, BoundVariant::Rigorous, 1.0, 1.0);
        assert!(dt >= bound - 1e-7 * bound.abs(), "depth={depth}, b={b}, p={p}: {dt} < {bound}");
        margin = margin.min(dt - bound);
        count += 1;
    }

    // Engineered threshold well: the naive bound breaks, the rigorous holds.
    let k = std::f64::consts::FRAC_PI_2 + 0.02;
    let pot = PiecewisePotential::new(
        vec![Segment { x_lo: -1.0, x_hi: 1.0, v: -0.5 * k * k }],
        1.0,
        1.0,
    )
    .unwrap();
    assert_eq!(count_bound_states(&pot).n_b, 2);
    let mut violated_at = None;
    for i in 1..=60 {
        let p = 0.02 + 0.01 * i as f64;
        let e = 0.5 * p * p;
        let dt = delay_matrix(&pot, e).unwrap().dt[0][0].unwrap();
        let naive = negative_delay_bound(p, 2.0, BoundVariant::Naive, 1.0, 1.0);
        let rigorous = negative_delay_bound(p, 1.0, BoundVariant::Rigorous, 1.0, 1.0);
        assert!(dt >= rigorous * (1.0 + 1e-9) - 1e-9);
        if dt < naive && violated_at.is_none() {
            violated_at = Some((p, dt, naive));
        }
    }
    let (p_v, dt_v, naive_v) = violated_at.expect("no naive-bound violation near threshold");
    println!(
        "acceptance 07 delay bounds: PASS (200 samples respect the rigorous bound, min margin {margin:.3}; naive bound violated at p = {p_v:.2}: {dt_v:.2} < {naive_v:.2})"
    );
}

/// Paired pole set builder (mirror partners, A(0+) normalized to 1).
fn paired_set(base: &[(Complex64, Complex64)]) -> PoleSet {
    let mut poles = Vec::new();
    let mut sum = Complex64::new(0.0, 0.0);
    for &(q, a) in base {
        sum += a + a.conj();
        poles.push(Pole { residue: a, position: q });
        poles.push(Pole { residue: a.conj(), position: -q.conj() });
    }
    let scale = 2.0 / sum.re;
    for p in &mut poles {
        p.residue *= scale;
    }
    PoleSet::new(poles, 1.0, 1.0).unwrap()
}

#[test]
fn criterion_08_survival_triple_equivalence_and_exponents() {
    // Moment-constrained regression sets (see the survival module tests).
    let generic = paired_set(&[
        (Complex64::new(1.0, -0.4), Complex64::new(1.0, 0.0)),
        (Complex64::new(1.8, -0.7), Complex64::new(0.8, 0.3)),
    ]);
    let beta2 = (0.4 + 0.7) / 1.8;
    let first_zero = paired_set(&[
        (Complex64::new(1.0, -0.4), Complex64::new(1.0, 0.0)),
        (Complex64::new(1.8, -0.7), Complex64::new(1.0, beta2)),
    ]);
    let both_zero = {
        let q = [
            Complex64::new(1.0, -0.4),
            Complex64::new(1.8, -0.7),
            Complex64::new(2.6, -0.5),
        ];
        let q3: Vec<Complex64> = q.iter().map(|v| v * v * v).collect();
        let b1 = 0.2;
        let r1 = -(q[0].im + b1 * q[0].re + q[1].im + q[2].im);
        let r3 = -(q3[0].im + b1 * q3[0].re + q3[1].im + q3[2].im);
        let det = q[1].re * q3[2].re - q[2].re * q3[1].re;
        let b2 = (r1 * q3[2].re - q[2].re * r3) / det;
        let b3 = (q[1].re * r3 - r1 * q3[1].re) / det;
        paired_set(&[
            (q[0], Complex64::new(1.0, b1)),
            (q[1], Complex64::new(1.0, b2)),
            (q[2], Complex64::new(1.0, b3)),
        ])
    };
    let m0_zero = {
        let q1 = Complex64::new(1.0, -0.4);
        let q2 = Complex64::new(1.8, -0.7);
        let t1 = (q1.conj() / q1.norm_sqr()).im;
        let b2 = (-t1 - (q2.conj() / q2.norm_sqr()).im) / ((q2.conj() / q2.norm_sqr()).re);
        paired_set(&[(q1, Complex64::new(1.0, 0.0)), (q2, Complex64::new(1.0, b2))])
    };

    // Triple equivalence over t in [1e-3, 1e3].
    let mut worst_triple = 0.0f64;
    for ps in [&generic, &first_zero, &both_zero, &m0_zero] {
        for j in 0..20 {
            let t = 1e-3 * (1e6f64).powf(j as f64 / 19.0);
            let a = survival_w_sum(ps, t).unwrap();
            let b = survival_split(ps, t).unwrap().total();
            let c = survival_contour_quadrature(ps, t).unwrap();
            let rel = ((a - b).norm() + (a - c).norm()) / a.norm();
            worst_triple = worst_triple.max(rel);
            assert!(rel <= 1e-9, "t={t:e}: triple residual {rel:e}");
        }
    }

    // Short-time exponents of 1 - S(t).
    let fit = |ps: &PoleSet, lo: f64, hi: f64| {
        let n = 12;
        let mut ts = Vec::new();
        let mut ys = Vec::new();
        for i in 0..n {
            let t = lo * (hi / lo).powf(i as f64 / (n - 1) as f64);
            ts.push(t);
            ys.push(1.0 - survival_w_sum(ps, t).unwrap().norm_sqr());
        }
        loglog_slope(&ts, &ys)
    };
    let e_half = fit(&generic, 1e-6, 1e-4);
    assert!((e_half - 0.5).abs() <= 0.03, "sqrt-class exponent {e_half}");
    let e_mid = fit(&first_zero, 1e-6, 1e-4);
    assert!((1.0..2.0).contains(&e_mid), "middle-class exponent {e_mid}");
    let e_two = fit(&both_zero, 1e-5, 1e-3);
    assert!((e_two - 2.0).abs() <= 0.05, "quadratic-class exponent {e_two}");

    // Long-time exponents of S(t): -3 when M(0) = 0, -1 otherwise.
    let ts: Vec<f64> = (0..10).map(|i| 100.0 * (10.0f64).powf(i as f64 / 9.0)).collect();
    let s3: Vec<f64> =
        ts.iter().map(|&t| survival_contour_quadrature(&m0_zero, t).unwrap().norm_sqr()).collect();
    let slope3 = loglog_slope(&ts, &s3);
    assert!((slope3 + 3.0).abs() <= 0.05, "generic long-time slope {slope3}");
    let s1: Vec<f64> =
        ts.iter().map(|&t| survival_contour_quadrature(&generic, t).unwrap().norm_sqr()).collect();
    let slope1 = loglog_slope(&ts, &s1);
    assert!((slope1 + 1.0).abs() <= 0.05, "M(0) != 0 long-time slope {slope1}");
    println!(
        "acceptance 08 survival: PASS (triple residual {worst_triple:.2e}; short-time exponents {e_half:.3}/{e_mid:.3}/{e_two:.3}; long-time slopes {slope3:.3}/{slope1:.3})"
    );
}

#[test]
fn criterion_09_fig2_reproduction() {
    // Canonical parameters p0 = 1, x0 = -10, alpha = 0.5, delta = 1, x = 0.
    let gauss = gaussian_momentum_amplitude(1.0, -10.0, 1.0, 1.0, 4097).unwrap();
    let supp = suppressed_momentum_amplitude(1.0, -10.0, 1.0, 0.5, 1.0, 4097).unwrap();
    let ts: Vec<f64> = (0..17).map(|i| 100.0 * (100.0f64).powf(i as f64 / 16.0)).collect();
    let sg = free_decay_slope(&gauss, 1.0, 1.0, 0.0, &ts).unwrap();
    let ss = free_decay_slope(&supp, 1.0, 1.0, 0.0, &ts).unwrap();
    // Monotone approach over the window, and the window-limit of the slope
    // curve (t^{-1/2} convergence acceleration) within +-0.1.
    for s in [&sg, &ss] {
        for w in s.windows(2) {
            assert!(w[1].1 > w[0].1 - 1e-6, "approach not monotone: {w:?}");
        }
    }
    let extrapolate = |s: &[(f64, f64)]| -> f64 {
        let (t1, s1) = s[2];
        let (t2, s2) = *s.last().unwrap();
        let c = (s1 - s2) / (1.0 / t1.sqrt() - 1.0 / t2.sqrt());
        s2 - c / t2.sqrt()
    };
    let lim_g = extrapolate(&sg);
    let lim_s = extrapolate(&ss);
    let end_g = sg.last().unwrap().1;
    let end_s = ss.last().unwrap().1;
    assert!((lim_g + 1.0).abs() <= 0.1, "gaussian window limit {lim_g}");
    assert!((lim_s + 3.0).abs() <= 0.1, "suppressed window limit {lim_s}");
    println!(
        "acceptance 09 figure-2 slopes: PASS (window limits {lim_g:.3} -> -1, {lim_s:.3} -> -3; raw endpoint slopes {end_g:.3}, {end_s:.3} at t = 1e4)"
    );
}

#[test]
fn criterion_10_source_transients() {
    // Exact vs steepest-descent quadrature over the (omega0, x, t) grid.
    let mut worst_quad = 0.0f64;
    for &omega0 in &[0.3, 0.5, 0.7, 0.9] {
        for &x in &[2.0, 10.0] {
            let spec = SourceSpec::new(omega0, x).unwrap();
            let tau = spec.tau();
            let mut count = 0;
            let mut j = 0;
            while count < 20 {
                let t = 0.2 * tau * (25.0f64).powf(j as f64 / 21.0);
                j += 1;
                if (t - tau).abs() < 0.05 * tau {
                    continue;
                }
                count += 1;
                let d = (source_exact(&spec, t).unwrap() - source_oracle(omega0, x, t)).norm();
                worst_quad = worst_quad.max(d);
                assert!(d <= 1e-8, "omega0={omega0}, x={x}, t={t}: {d:e}");
            }
        }
    }

    // Boundary value at the source point.
    let mut worst_bc = 0.0f64;
    for &t in &[0.1, 1.0, 12.0] {
        let v = source_exact(&SourceSpec { omega0: 0.6, x: 0.0 }, t).unwrap();
        worst_bc = worst_bc.max((v - Complex64::new(0.0, -0.6 * t).exp()).norm());
    }
    assert!(worst_bc < 1e-13, "boundary value residual {worst_bc:e}");

    // R(tau) closed form to 1e-12.
    let spec = SourceSpec::new(0.75, 20.0).unwrap();
    let r_tau = pole_saddle_ratio(&spec, spec.tau()).unwrap();
    let k0x = spec.kappa0() * spec.x;
    let expect = (-k0x).exp() * (2.0 * std::f64::consts::PI * k0x).sqrt();
    assert!((r_tau - expect).abs() <= 1e-12 * expect, "R(tau) {r_tau} vs {expect}");

    // Forerunner peak at tau/sqrt(3) within 0.1%.
    let scales = transient_scales(&spec);
    let (t_peak, _) = golden_max(
        &mut |t| source_saddle(&spec, t).unwrap().norm_sqr(),
        0.2 * scales.tau,
        2.0 * scales.tau,
        1e-10,
    );
    let peak_rel = (t_peak - scales.t_f).abs() / scales.t_f;
    assert!(peak_rel <= 1e-3, "forerunner peak {t_peak} vs {}", scales.t_f);

    // Crossover R = 1 vs the closed-form transient duration, kappa0 x >= 8.
    let mut worst_cross = 0.0f64;
    for &(omega0, x) in &[(0.75, 16.0), (0.75, 20.0), (0.64, 20.0)] {
        let spec = SourceSpec::new(omega0, x).unwrap();
        assert!(spec.kappa0() * x >= 8.0);
        let t_star = transient_crossover(&spec).unwrap();
        let s = transient_scales(&spec);
        let rel = (t_star - s.t_tr).abs() / s.t_tr;
        worst_cross = worst_cross.max(rel);
        assert!(rel <= 0.10, "kappa0 x = {}: crossover {rel}", spec.kappa0() * x);
    }
    println!(
        "acceptance 10 source transients: PASS (quadrature dev {worst_quad:.2e}, boundary {worst_bc:.2e}, R(tau) exact, peak dev {peak_rel:.2e}, crossover dev {worst_cross:.2e})"
    );
}

#[test]
fn criterion_11_faddeeva() {
    let policy = qtime1d::faddeeva::WAccuracyPolicy::default();
    let w = |z: Complex64| qtime1d::faddeeva::w_eval(z, &policy).unwrap();
    let mut rng = XorShift::new(0xace_0011);
    let mut worst_refl = 0.0f64;
    let mut worst_conj = 0.0f64;
    for _ in 0..1000 {
        let z = Complex64::from_polar(rng.range(0.0, 10.0), rng.range(0.0, 2.0 * std::f64::consts::PI));
        let refl = (w(-z) - (2.0 * (-z * z).exp() - w(z))).norm() / (1.0 + w(z).norm());
        worst_refl = worst_refl.max(refl);
        let conj = (w(z.conj()) - w(-z).conj()).norm() / w(-z).norm().max(1.0);
        worst_conj = worst_conj.max(conj);
    }
    assert!(worst_refl <= 1e-11, "reflection {worst_refl:e}");
    assert!(worst_conj <= 1e-11, "conjugation {worst_conj:e}");

    let mut worst_oracle = 0.0f64;
    for ix in 0..20 {
        for iy in 0..20 {
            let z = Complex64::new(-5.0 + 10.0 * ix as f64 / 19.0, -5.0 + 10.0 * iy as f64 / 19.0);
            let rel = (w(z) - w_oracle(z)).norm() / w_oracle(z).norm();
            worst_oracle = worst_oracle.max(rel);
        }
    }
    assert!(worst_oracle <= 1e-9, "oracle agreement {worst_oracle:e}");
    println!(
        "acceptance 11 Faddeeva: PASS (reflection {worst_refl:.2e}, conjugation {worst_conj:.2e}, quadrature-oracle {worst_oracle:.2e})"
    );
}
