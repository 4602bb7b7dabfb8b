//! Browser bindings for the workbench demo page.
//!
//! Every export takes plain numbers and text, runs the core machinery, and
//! returns a JSON string; failures come back as `{"error": "..."}` so the
//! page can render them without an exception path. Potentials use the same
//! text form as the CLI: `free`, `linear:f=0.2`, `harmonic:omega=1`,
//! `poly:c0,c1,...`.

use itw_core::classical::{integrate, shoot, suggested_dt};
use itw_core::grid::SpatialGrid;
use itw_core::harness::{transition_zone_table, ZoneRow};
use itw_core::imaging::{it_from_shot, it_wavefunction};
use itw_core::potential::PotentialSpec;
use itw_core::qprop::analytic_propagate;
use itw_core::wavefunction::{gaussian_packet, to_momentum};
use itw_core::{ItwError, Result, Units};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Densities below this fraction of the peak are off-scale on the plot.
const PLOT_FLOOR: f64 = 1e-6;
/// Point budget per curve; the canvas cannot resolve more.
const MAX_POINTS: usize = 257;
/// Grid cap keeping a single evaluation interactive.
const MAX_GRID: usize = 16_384;
/// Time samples per trajectory track.
const FAN_SAMPLES: usize = 33;

fn to_json<T: Serialize>(result: Result<T>) -> String {
    let value = match result {
        Ok(payload) => {
            serde_json::to_value(&payload).map_err(|e| ItwError::InvalidInput(e.to_string()))
        }
        Err(e) => Err(e),
    };
    match value {
        Ok(v) => v.to_string(),
        Err(e) => serde_json::json!({ "error": e.to_string() }).to_string(),
    }
}

#[derive(Serialize)]
struct ComparePayload {
    t: f64,
    x: Vec<f64>,
    exact_density: Vec<f64>,
    it_density: Vec<f64>,
    l2_error: f64,
    skipped: usize,
}

#[derive(Serialize)]
struct FanTrack {
    p: f64,
    x: Vec<f64>,
}

#[derive(Serialize)]
struct FanPayload {
    t: Vec<f64>,
    trajectories: Vec<FanTrack>,
}

fn free_spread(sigma: f64, t: f64, units: &Units) -> f64 {
    let r = units.hbar * t / (units.mass * sigma * sigma);
    sigma * (1.0 + r * r).sqrt()
}

fn compare_inner(potential: &str, sigma: f64, p0: f64, t: f64) -> Result<ComparePayload> {
    let v: PotentialSpec = potential.parse()?;
    let units = Units::atomic();
    if !(t.is_finite() && t > 0.0) {
        return Err(ItwError::InvalidInput(format!("need t > 0, got {t}")));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(ItwError::InvalidInput(format!("need sigma > 0, got {sigma}")));
    }
    if !p0.is_finite() {
        return Err(ItwError::InvalidInput(format!("p0 must be finite, got {p0}")));
    }
    let spread = free_spread(sigma, t, &units);
    let x_scale = p0.abs() * t + spread;
    // floor on dt keeps a browser call bounded; plot accuracy is unaffected
    let dt = suggested_dt(&v, &units, x_scale, t).max(t / 4096.0);

    // box sized from the classical center plus the free-dispersion envelope
    let center = integrate(0.0, p0, 0.0, t, &v, dt, &units)?.end.x;
    let half = center.abs() + 8.0 * spread + 10.0 * sigma;
    let mut n = 1024_usize;
    while 2.0 * half / n as f64 > sigma / 4.0 && n < MAX_GRID {
        n *= 2;
    }
    let grid = SpatialGrid::symmetric(half, n)?;
    let psi0 = gaussian_packet(&grid, &units, sigma, 0.0, p0)?;
    let phi = to_momentum(&psi0, &units)?;
    let exact = analytic_propagate(&psi0, &v, t, &units)?;

    let peak = (0..grid.n)
        .max_by(|a, b| exact.density(*a).total_cmp(&exact.density(*b)))
        .expect("non-empty grid");
    // one certified evaluation at the peak settles uniqueness and caustics
    it_wavefunction(grid.x(peak), t, &phi, &v, 0.0, 0.0, &units, dt)?;

    let floor = PLOT_FLOOR * exact.density(peak);
    let support: Vec<usize> = (0..grid.n).filter(|&j| exact.density(j) > floor).collect();
    let stride = support.len().div_ceil(MAX_POINTS).max(1);

    let mut x = Vec::new();
    let mut exact_density = Vec::new();
    let mut it_density = Vec::new();
    let mut skipped = 0_usize;
    let mut num = 0.0;
    let mut den = 0.0;
    for &j in support.iter().step_by(stride) {
        let x_f = grid.x(j);
        let p_guess = units.mass * x_f / t;
        let sample = shoot(0.0, 0.0, x_f, t, p_guess, &v, dt, &units)
            .and_then(|root| it_from_shot(&root, &phi, &units));
        let Ok(sample) = sample else {
            skipped += 1;
            continue;
        };
        let rho_it = sample.amp.norm_sqr();
        let rho_exact = exact.density(j);
        num += (rho_it - rho_exact).powi(2);
        den += rho_exact * rho_exact;
        x.push(x_f);
        exact_density.push(rho_exact);
        it_density.push(rho_it);
    }
    if x.is_empty() {
        return Err(ItwError::InvalidInput(
            "no reconstructable points in the density support".into(),
        ));
    }
    Ok(ComparePayload {
        t,
        x,
        exact_density,
        it_density,
        l2_error: (num / den).sqrt(),
        skipped,
    })
}

fn trajectory_fan_inner(
    potential: &str,
    x0: f64,
    t: f64,
    p_lo: f64,
    p_hi: f64,
    count: f64,
) -> Result<FanPayload> {
    let v: PotentialSpec = potential.parse()?;
    let units = Units::atomic();
    if !(t.is_finite() && t > 0.0) {
        return Err(ItwError::InvalidInput(format!("need t > 0, got {t}")));
    }
    if !(p_lo.is_finite() && p_hi.is_finite() && p_hi > p_lo) {
        return Err(ItwError::InvalidInput(format!(
            "bad momentum range [{p_lo}, {p_hi}]"
        )));
    }
    if !count.is_finite() {
        return Err(ItwError::InvalidInput(format!("bad track count {count}")));
    }
    let count = (count.round() as i64).clamp(2, 48) as usize;
    let x_scale = x0.abs() + p_lo.abs().max(p_hi.abs()) * t + 1.0;
    let dt = suggested_dt(&v, &units, x_scale, t).max(t / 4096.0);
    let times: Vec<f64> = (0..=FAN_SAMPLES)
        .map(|k| t * k as f64 / FAN_SAMPLES as f64)
        .collect();

    let mut trajectories = Vec::with_capacity(count);
    for i in 0..count {
        let p = p_lo + (p_hi - p_lo) * i as f64 / (count - 1) as f64;
        let mut xs = vec![x0];
        let (mut x_cur, mut p_cur) = (x0, p);
        for pair in times.windows(2) {
            let leg = integrate(x_cur, p_cur, pair[0], pair[1], &v, dt, &units)?;
            x_cur = leg.end.x;
            p_cur = leg.end.p;
            xs.push(x_cur);
        }
        trajectories.push(FanTrack { p, x: xs });
    }
    Ok(FanPayload { t: times, trajectories })
}

fn parse_list(text: &str, what: &str) -> Result<Vec<f64>> {
    let values: Vec<f64> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| ItwError::InvalidInput(format!("bad {what} entry {s:?}")))
        })
        .collect::<std::result::Result<_, _>>()?;
    if values.is_empty() {
        return Err(ItwError::InvalidInput(format!("need at least one {what} value")));
    }
    Ok(values)
}

fn zone_rows_inner(masses: &str, fs: &str, sigma: f64, hbar: f64) -> Result<Vec<ZoneRow>> {
    let masses = parse_list(masses, "mass")?;
    let fs = parse_list(fs, "f")?;
    transition_zone_table(&masses, sigma, &fs, hbar)
}

/// Exact vs reconstructed density at time `t` for a Gaussian launched from
/// x = 0 with spread `sigma` and mean momentum `p0`. JSON fields: aligned
/// arrays `x`, `exact_density`, `it_density`, plus `l2_error` (relative, over
/// the sampled densities), `skipped` (points lost to failed reconstruction),
/// and `t`.
#[wasm_bindgen]
pub fn compare(potential: &str, sigma: f64, p0: f64, t: f64) -> String {
    to_json(compare_inner(potential, sigma, p0, t))
}

/// Classical trajectories from `x0` for `count` launch momenta evenly spaced
/// over [p_lo, p_hi]. JSON fields: shared time axis `t` and `trajectories`
/// as `{p, x: [...]}` rows.
#[wasm_bindgen]
pub fn trajectory_fan(potential: &str, x0: f64, t: f64, p_lo: f64, p_hi: f64, count: f64) -> String {
    to_json(trajectory_fan_inner(potential, x0, t, p_lo, p_hi, count))
}

/// Launch-zone table for comma-separated mass and spread-ratio lists. JSON
/// rows carry `mass`, `f`, `t_i`, `x_i`.
#[wasm_bindgen]
pub fn zone_rows(masses: &str, fs: &str, sigma: f64, hbar: f64) -> String {
    to_json(zone_rows_inner(masses, fs, sigma, hbar))
}
