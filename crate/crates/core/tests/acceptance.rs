//! Acceptance gate: one test per shipping criterion, each printing a
//! `[acceptance]` line with the measured value next to its threshold.
//!
//! Criterion 4's halving clause is asserted exactly as stated even though the
//! free-packet deviation at fixed x/t falls off as 1/t², so doubling t
//! quarters it; that test records the measured factor and is expected to fail.

use std::f64::consts::PI;
use std::time::Instant;

use itw_core::classical::{check_determinant_identity, integrate, shoot, suggested_dt};
use itw_core::error::ItwError;
use itw_core::grid::SpatialGrid;
use itw_core::harness::{builtin, convergence_scan_with, transition_zone_table};
use itw_core::imaging::{
    density_ratio_check, free_it, probability_transport, two_time_invariance,
    validity_report_with,
};
use itw_core::potential::PotentialSpec;
use itw_core::qprop::{analytic_free_gaussian, observables, propagate, PropagatorConfig};
use itw_core::units::Units;
use itw_core::wavefunction::{gaussian_packet, l2_relative_diff, to_momentum, MomentumWaveFunction};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const U: Units = Units { hbar: 1.0, mass: 1.0 };

fn report(criterion: &str, label: &str, pass: bool, measured: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("[acceptance] criterion {criterion} ({label}): {verdict}  {measured}");
}

fn launch_phi(half: f64, n: usize, sigma: f64, p0: f64) -> MomentumWaveFunction {
    let grid = SpatialGrid::symmetric(half, n).unwrap();
    let psi = gaussian_packet(&grid, &U, sigma, 0.0, p0).unwrap();
    to_momentum(&psi, &U).unwrap()
}

#[test]
fn criterion_1_split_operator_matches_free_oracle() {
    let start = Instant::now();
    let grid = SpatialGrid::symmetric(80.0, 4096).unwrap();
    let psi0 = gaussian_packet(&grid, &U, 1.0, 0.0, 0.0).unwrap();
    let cfg = PropagatorConfig::for_duration(10.0, &grid, &U);
    let evolved = propagate(&psi0, &PotentialSpec::Free, &cfg, &U).unwrap();
    let oracle = analytic_free_gaussian(&grid, &U, 1.0, 0.0, 0.0, 10.0);
    let err = l2_relative_diff(&oracle, &evolved);
    let secs = start.elapsed().as_secs_f64();

    let pass = err <= 1e-8;
    report(
        "1",
        "split-operator free oracle",
        pass,
        &format!("l2_error={err:.3e} (limit 1e-8), n=4096 box +-80 t=10, runtime={secs:.2}s"),
    );
    assert!(pass, "free split-operator drifted from the closed form: {err:.3e}");
}

#[test]
fn criterion_2_free_reconstruction_converges_at_first_order() {
    // slope of ln(l2_error) over ln(hbar t / m sigma^2) across one decade
    let s = builtin("free-gaussian").unwrap();
    let t_grid: Vec<f64> = (0..5).map(|k| 10.0 * 10f64.powf(k as f64 / 4.0)).collect();
    let scan = convergence_scan_with(&s, &t_grid, 3.0).unwrap();
    let slope_ok = (-1.15..=-0.85).contains(&scan.slope);

    // center density error at spread ratio 100
    let grid = SpatialGrid::symmetric(600.0, 8192).unwrap();
    let phi = launch_phi(600.0, 8192, 1.0, 0.0);
    let exact = analytic_free_gaussian(&grid, &U, 1.0, 0.0, 0.0, 100.0);
    let center = exact.grid.nearest_index(0.0);
    let rec = free_it(exact.grid.x(center), 100.0, &phi, 0.0, 0.0, &U).unwrap();
    let center_err = (rec.amp.norm_sqr() / exact.density(center) - 1.0).abs();
    let center_ok = center_err < 0.05;

    let pass = slope_ok && center_ok;
    report(
        "2",
        "error decay with spread ratio",
        pass,
        &format!(
            "slope={:.4} (want -1.0 +-0.15), center density error at ratio 100: {center_err:.3e} (limit 0.05)",
            scan.slope
        ),
    );
    assert!(pass, "slope {:.4}, center error {center_err:.3e}", scan.slope);
}

#[test]
fn criterion_3_determinant_identity_over_random_endpoints() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(0xacce_0003);
    let mut worst_quad = 0.0_f64;
    for v in [PotentialSpec::Free, PotentialSpec::Linear { force: 0.4 }] {
        for _ in 0..20 {
            let x_f = rng.gen_range(-4.0..4.0);
            let t = rng.gen_range(0.5..5.0);
            let dev = check_determinant_identity(x_f, t, 0.0, 0.0, &v, t / 16.0, &U)
                .unwrap()
                .deviation;
            worst_quad = worst_quad.max(dev);
        }
    }
    let quad_ok = worst_quad <= 1e-5;

    let harmonic = PotentialSpec::Harmonic { omega: 1.0 };
    let mut worst_harm = 0.0_f64;
    let mut evaluated = 0;
    for _ in 0..20 {
        let x_f: f64 = rng.gen_range(-4.0..4.0);
        let t = rng.gen_range(0.1..0.8 * PI);
        match check_determinant_identity(x_f, t, 0.0, 0.0, &harmonic, 1e-4, &U) {
            Ok(check) => {
                worst_harm = worst_harm.max(check.deviation);
                evaluated += 1;
            }
            // the identity is singular at a focus; the check refuses rather than bounds
            Err(ItwError::CausticSingular { .. }) => continue,
            Err(e) => panic!("unexpected failure: {e}"),
        }
    }
    let harm_ok = worst_harm <= 1e-4 && evaluated >= 18;
    let secs = start.elapsed().as_secs_f64();

    let pass = quad_ok && harm_ok;
    report(
        "3",
        "determinant identity sweep",
        pass,
        &format!(
            "free/linear worst={worst_quad:.3e} (limit 1e-5), harmonic worst={worst_harm:.3e} (limit 1e-4, {evaluated}/20 off-focus), runtime={secs:.2}s"
        ),
    );
    assert!(pass, "free/linear {worst_quad:.3e}, harmonic {worst_harm:.3e}");
}

#[test]
fn criterion_4a_free_density_ratio_is_m_over_t() {
    let t = 12.5;
    let grid = SpatialGrid::symmetric(120.0, 4096).unwrap();
    let phi = launch_phi(120.0, 4096, 1.0, 0.0);
    let psi = analytic_free_gaussian(&grid, &U, 1.0, 0.0, 0.0, t);
    let check =
        density_ratio_check(&psi, &phi, 5.0, &PotentialSpec::Free, 0.0, 0.0, &U, t / 16.0)
            .unwrap();
    let gap = (check.rhs - U.mass / t).abs();

    let pass = gap <= 1e-12;
    report(
        "4a",
        "free trajectory density m/t",
        pass,
        &format!("|rhs - m/t|={gap:.3e} (limit 1e-12) at t={t}"),
    );
    assert!(pass, "rhs missed m/t by {gap:.3e}");
}

#[test]
fn criterion_4b_density_ratio_deviation_halves_when_t_doubles() {
    // fixed x/t = 0.8 so both times probe the same reduced coordinate
    let grid = SpatialGrid::symmetric(400.0, 8192).unwrap();
    let phi = launch_phi(400.0, 8192, 1.0, 0.0);
    let mut dev = [0.0_f64; 2];
    for (k, t) in [20.0, 40.0].into_iter().enumerate() {
        let psi = analytic_free_gaussian(&grid, &U, 1.0, 0.0, 0.0, t);
        let check = density_ratio_check(
            &psi,
            &phi,
            0.8 * t,
            &PotentialSpec::Free,
            0.0,
            0.0,
            &U,
            t / 16.0,
        )
        .unwrap();
        dev[k] = check.deviation;
    }
    let factor = dev[1] / dev[0];

    let pass = (0.4..=0.6).contains(&factor);
    report(
        "4b",
        "deviation halves when t doubles",
        pass,
        &format!(
            "dev(t=20)={:.3e}, dev(t=40)={:.3e}, factor={factor:.3} (want 0.5 +-20%; the free packet deviation scales as 1/t^2, so the true factor is 0.25)",
            dev[0], dev[1]
        ),
    );
    assert!(pass, "doubling t scaled the deviation by {factor:.3}, not 0.5 +-20%");
}

#[test]
fn criterion_5_transport_identity_and_two_time_invariance() {
    let harmonic = PotentialSpec::Harmonic { omega: 1.0 };
    let cases = [
        (PotentialSpec::Free, 1.0, 10.0),
        (PotentialSpec::Linear { force: 0.2 }, 0.0, 4.0),
        (harmonic.clone(), 1.0, 1.5),
    ];
    let mut worst_bins = 0.0_f64;
    for (v, p0, t) in &cases {
        let phi = launch_phi(40.0, 1024, 1.0, *p0);
        let edges = [p0 - 2.0, p0 - 1.0, p0 + 1.0, p0 + 2.0];
        let dt = suggested_dt(v, &U, 1.0, *t);
        let check = probability_transport(&phi, v, 0.0, 0.0, *t, &edges, &U, dt).unwrap();
        worst_bins = worst_bins.max(check.max_deviation);
    }
    let bins_ok = worst_bins <= 1e-6;

    let two_time = [
        (PotentialSpec::Free, 1.0, 5.0, 5.0, 10.0),
        (PotentialSpec::Linear { force: 0.2 }, 0.0, 2.0, 4.0, 7.0),
        (harmonic, 1.0, 0.8, 1.0, 2.0),
    ];
    let mut worst_pair = 0.0_f64;
    for (v, p0, x1, t1, t2) in &two_time {
        let phi = launch_phi(40.0, 1024, 1.0, *p0);
        let dt = suggested_dt(v, &U, 1.0, *t2);
        let check = two_time_invariance(&phi, v, 0.0, 0.0, *x1, *t1, *t2, &U, dt).unwrap();
        worst_pair = worst_pair.max(check.deviation);
    }
    let pair_ok = worst_pair <= 1e-8;

    let pass = bins_ok && pair_ok;
    report(
        "5",
        "probability transport",
        pass,
        &format!(
            "worst bin deviation={worst_bins:.3e} (limit 1e-6), worst two-time deviation={worst_pair:.3e} (limit 1e-8)"
        ),
    );
    assert!(pass, "bins {worst_bins:.3e}, two-time {worst_pair:.3e}");
}

#[test]
fn criterion_6_transition_zone_reference_numbers() {
    let rows = transition_zone_table(&[1.0, 1836.0], 1.0, &[100.0], 1.0).unwrap();
    let electron_ok = rows[0].x_i == 100.0 && rows[0].t_i == 1.0e4;
    let proton_ok = rows[1].t_i == 1.836e7;
    let edge = validity_report_with(1.0, 2.0, 10.0, &U).unwrap();
    let edge_ok = edge.action_ratio == 1.0;

    let pass = electron_ok && proton_ok && edge_ok;
    report(
        "6",
        "transition zone numbers",
        pass,
        &format!(
            "electron x_i={}, t_i={}; proton t_i={:.4e}; action ratio at f=sqrt(2): {}",
            rows[0].x_i, rows[0].t_i, rows[1].t_i, edge.action_ratio
        ),
    );
    assert!(pass, "zone table missed its reference values");
}

#[test]
fn criterion_7_classical_engine_property_suite() {
    let start = Instant::now();
    let potentials = [
        PotentialSpec::Free,
        PotentialSpec::Linear { force: 0.4 },
        PotentialSpec::Harmonic { omega: 1.0 },
        PotentialSpec::double_well(0.05, 0.5),
    ];
    let mut rng = StdRng::seed_from_u64(0xacce_0007);
    let mut worst_det = 0.0_f64;
    let mut worst_drift = 0.0_f64;
    for v in &potentials {
        for _ in 0..12 {
            let x_i: f64 = rng.gen_range(-2.0..2.0);
            let p_i = rng.gen_range(-2.0..2.0);
            let t = rng.gen_range(0.3..2.8);
            let dt = suggested_dt(v, &U, x_i.abs() + 3.0, t);
            let traj = integrate(x_i, p_i, 0.0, t, v, dt, &U).unwrap();
            worst_det = worst_det.max((traj.monodromy.det() - 1.0).abs());
            worst_drift = worst_drift.max(traj.energy_drift);
        }
    }

    // round trip closes on the single-branch potentials at these scales
    let mut worst_round = 0.0_f64;
    for v in &potentials[..3] {
        for _ in 0..12 {
            let x_i: f64 = rng.gen_range(-2.0..2.0);
            let p_i: f64 = rng.gen_range(-2.0..2.0);
            let t = rng.gen_range(0.3..2.8);
            let dt = suggested_dt(v, &U, x_i.abs() + 3.0, t);
            let traj = integrate(x_i, p_i, 0.0, t, v, dt, &U).unwrap();
            let back = shoot(x_i, 0.0, traj.end.x, t, p_i + 0.1, v, dt, &U).unwrap();
            worst_round = worst_round.max((back.p_i - p_i).abs() / p_i.abs().max(1.0));
        }
    }

    let harmonic = PotentialSpec::Harmonic { omega: 1.0 };
    let focus = integrate(0.0, 1.0, 0.0, PI, &harmonic, 1e-4, &U).unwrap();
    let caustic_ok = focus.near_caustic && focus.monodromy.m12.abs() < 1e-3;

    let secs = start.elapsed().as_secs_f64();
    let pass = worst_det <= 1e-9 && worst_drift <= 1e-8 && worst_round <= 1e-9 && caustic_ok
        && secs < 60.0;
    report(
        "7",
        "classical engine properties",
        pass,
        &format!(
            "det={worst_det:.3e} (limit 1e-9), drift={worst_drift:.3e} (limit 1e-8), round trip={worst_round:.3e} (limit 1e-9), focus flagged at t=pi: {caustic_ok}, runtime={secs:.2}s (limit 60s)"
        ),
    );
    assert!(pass, "det {worst_det:.3e}, drift {worst_drift:.3e}, round {worst_round:.3e}");
}

#[test]
fn criterion_8_expectation_values_ride_classical_trajectories() {
    let grid = SpatialGrid::symmetric(60.0, 1024).unwrap();
    let mut worst = 0.0_f64;
    for v in [PotentialSpec::Free, PotentialSpec::Linear { force: 0.2 }] {
        let mut psi = gaussian_packet(&grid, &U, 1.0, 0.0, 0.5).unwrap();
        let mut prev_t = 0.0;
        for t in [2.0, 5.0, 8.0] {
            let cfg = PropagatorConfig::for_duration(t - prev_t, &grid, &U);
            psi = propagate(&psi, &v, &cfg, &U).unwrap();
            prev_t = t;
            let obs = observables(&psi, &v, &U);
            let classical = integrate(0.0, 0.5, 0.0, t, &v, t / 16.0, &U).unwrap().end;
            let dx = (obs.x_mean - classical.x).abs() / classical.x.abs().max(1.0);
            let dp = (obs.p_mean - classical.p).abs() / classical.p.abs().max(1.0);
            worst = worst.max(dx).max(dp);
        }
    }

    let pass = worst <= 1e-6;
    report(
        "8",
        "expectation values vs classical",
        pass,
        &format!("worst relative mismatch={worst:.3e} (limit 1e-6) over free and linear runs"),
    );
    assert!(pass, "expectation trajectories diverged: {worst:.3e}");
}
