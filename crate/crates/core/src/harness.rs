use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classical::{check_determinant_identity, integrate, multi_start_scan, shoot, suggested_dt};
use crate::error::{ItwError, Result};
use crate::grid::SpatialGrid;
use crate::imaging::{
    density_ratio_check, it_from_shot, probability_transport, validity_report_with, DEFAULT_F_MIN,
};
use crate::potential::PotentialSpec;
use crate::qprop::{analytic_propagate, propagate, PropagatorConfig};
use crate::units::Units;
use crate::wavefunction::{gaussian_packet, to_momentum, MomentumWaveFunction, WaveFunction};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Density support for L² and fidelity comparisons, relative to the peak.
pub const SUPPORT_FLOOR: f64 = 1e-12;
/// Core region (relative to the peak) sampled by the density-ratio check.
pub const CORE_FLOOR: f64 = 1e-3;
/// Sample budget per observation time for the density-ratio check.
pub const MAX_RATIO_POINTS: usize = 33;

const AUTO_DX_PER_SIGMA: f64 = 0.25;
const AUTO_SPREAD_SIGMAS: f64 = 8.0;
const AUTO_PAD_SIGMAS: f64 = 6.0;
const AUTO_MAX_N: usize = 1 << 22;
const AUTO_CENTER_SEGMENTS: usize = 64;

/// Gaussian launch state: width σ, center x0, mean momentum p0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialPacket {
    pub sigma: f64,
    #[serde(default)]
    pub x0: f64,
    #[serde(default)]
    pub p0: f64,
}

/// Explicit grid request; omit in a scenario to auto-size from the trajectory fan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn resolve(&self) -> Result<SpatialGrid> {
        SpatialGrid::new(self.x_min, self.x_max, self.n)
    }
}

/// Per-time checks a scenario can enable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// launch-time zone membership via the validity report
    Validity,
    /// exact-vs-reconstructed wavefunction comparison (L² error and fidelity)
    Convergence,
    /// pointwise density ratio against the trajectory compression factor
    DensityRatio,
    /// Van Vleck determinant identity at a probe point
    DetIdentity,
    /// momentum-bin to position-interval probability bookkeeping
    Transport,
}

impl Check {
    pub fn name(&self) -> &'static str {
        match self {
            Check::Validity => "validity",
            Check::Convergence => "convergence",
            Check::DensityRatio => "density_ratio",
            Check::DetIdentity => "det_identity",
            Check::Transport => "transport",
        }
    }
}

/// A reproducible experiment: one potential, one launch packet, a schedule of
/// observation times, and the checks to run at each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    /// claims this scenario evidences, in plain words (emitted as metadata)
    #[serde(default)]
    pub evidence: Vec<String>,
    pub potential: PotentialSpec,
    pub initial: InitialPacket,
    #[serde(default)]
    pub units: Units,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    pub schedule: Vec<f64>,
    pub checks: Vec<Check>,
    /// classical integrator step; omit for a potential-aware default
    #[serde(default)]
    pub classical_dt: Option<f64>,
}

/// One row of metrics at a single observation time. Metrics whose check is not
/// enabled stay None.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub scenario: String,
    pub t: f64,
    /// ħt/mσ², the spread ratio driving the asymptotics
    pub validity_ratio: f64,
    /// relative L² distance between exact and reconstructed wavefunctions
    pub l2_error: Option<f64>,
    pub sup_density_error_at_classical_points: Option<f64>,
    /// |⟨Ψ_exact|Ψ_rec⟩| normalized over the common support
    pub fidelity: Option<f64>,
    pub det_identity_deviation: Option<f64>,
    pub transport_deviation: Option<f64>,
}

impl MetricRow {
    /// Column names in emission order.
    pub const FIELDS: [&'static str; 8] = [
        "scenario",
        "t",
        "validity_ratio",
        "l2_error",
        "sup_density_error_at_classical_points",
        "fidelity",
        "det_identity_deviation",
        "transport_deviation",
    ];
}

/// One transition-zone row: launch time and distance for a mass and spread ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZoneRow {
    pub mass: f64,
    pub f: f64,
    pub t_i: f64,
    pub x_i: f64,
}

/// Convergence scan output: fitted slope plus the underlying rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    /// least-squares slope of ln(l2_error) against ln(validity_ratio)
    pub slope: f64,
    pub rows: Vec<MetricRow>,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(ItwError::InvalidInput("scenario name must be non-empty".into()));
        }
        self.potential.validate()?;
        let ip = &self.initial;
        if !(ip.sigma.is_finite() && ip.sigma > 0.0) || !ip.x0.is_finite() || !ip.p0.is_finite() {
            return Err(ItwError::InvalidInput(format!(
                "bad initial packet: sigma={}, x0={}, p0={}",
                ip.sigma, ip.x0, ip.p0
            )));
        }
        if !(self.units.hbar.is_finite() && self.units.hbar > 0.0)
            || !(self.units.mass.is_finite() && self.units.mass > 0.0)
        {
            return Err(ItwError::InvalidInput(format!(
                "units must be positive and finite: hbar={}, mass={}",
                self.units.hbar, self.units.mass
            )));
        }
        if self.schedule.is_empty() {
            return Err(ItwError::InvalidInput("schedule must be non-empty".into()));
        }
        if self.schedule.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(ItwError::InvalidInput("schedule times must be finite and >= 0".into()));
        }
        if self.schedule.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ItwError::InvalidInput("schedule must be strictly increasing".into()));
        }
        if self.checks.is_empty() {
            return Err(ItwError::InvalidInput("scenario must enable at least one check".into()));
        }
        if let Some(dt) = self.classical_dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(ItwError::InvalidInput(format!(
                    "classical_dt must be positive, got {dt}"
                )));
            }
        }
        if let Some(g) = &self.grid {
            g.resolve()?;
        }
        Ok(())
    }

    fn has(&self, c: Check) -> bool {
        self.checks.contains(&c)
    }
}

/// Checks in their fixed execution order (duplicates collapsed): metrics must
/// not depend on the order a scenario file happens to list them in.
fn canonical_checks(s: &Scenario) -> Vec<Check> {
    [Check::Validity, Check::Convergence, Check::DensityRatio, Check::DetIdentity, Check::Transport]
        .into_iter()
        .filter(|c| s.has(*c))
        .collect()
}

fn check_failed(s: &Scenario, check: &str, t: f64, source: ItwError) -> ItwError {
    match source {
        already @ ItwError::ScenarioCheckFailed { .. } => already,
        source => ItwError::ScenarioCheckFailed {
            scenario: s.name.clone(),
            check: check.to_string(),
            t,
            source: Box::new(source),
        },
    }
}

/// Free-spreading width law; an upper bound for harmonic breathing as well.
fn spread(sigma: f64, t: f64, u: &Units) -> f64 {
    let r = u.hbar * t / (u.mass * sigma * sigma);
    sigma * (1.0 + r * r).sqrt()
}

fn classical_step(s: &Scenario, duration: f64, x_scale: f64) -> f64 {
    s.classical_dt
        .unwrap_or_else(|| suggested_dt(&s.potential, &s.units, x_scale, duration))
}

/// Size a grid around the classical fan: the packet-center trajectory sampled
/// along the schedule, padded by the free-spreading width on each side, with dx
/// fine enough for both the packet and the momentum content it will acquire.
fn auto_grid(s: &Scenario) -> Result<SpatialGrid> {
    let u = &s.units;
    let ip = &s.initial;
    let t_max = *s.schedule.last().expect("validated non-empty");

    let mut x_lo = ip.x0 - AUTO_SPREAD_SIGMAS * ip.sigma;
    let mut x_hi = ip.x0 + AUTO_SPREAD_SIGMAS * ip.sigma;
    let mut p_need = ip.p0.abs();
    if t_max > 0.0 {
        let x_scale = ip.x0.abs() + ip.p0.abs() * t_max / u.mass + 10.0 * ip.sigma;
        let dt = classical_step(s, t_max, x_scale);
        let (mut x, mut p, mut t) = (ip.x0, ip.p0, 0.0);
        for k in 1..=AUTO_CENTER_SEGMENTS {
            let t_next = t_max * k as f64 / AUTO_CENTER_SEGMENTS as f64;
            let traj = integrate(x, p, t, t_next, &s.potential, dt, u)?;
            x = traj.end.x;
            p = traj.end.p;
            t = t_next;
            let w = AUTO_SPREAD_SIGMAS * spread(ip.sigma, t, u);
            x_lo = x_lo.min(x - w);
            x_hi = x_hi.max(x + w);
            p_need = p_need.max(p.abs());
        }
    }
    x_lo -= AUTO_PAD_SIGMAS * ip.sigma;
    x_hi += AUTO_PAD_SIGMAS * ip.sigma;

    // momentum headroom: packet width plus curvature-driven momentum gain
    let mut d2_max = 0.0_f64;
    for i in 0..=AUTO_CENTER_SEGMENTS {
        let xs = x_lo + (x_hi - x_lo) * i as f64 / AUTO_CENTER_SEGMENTS as f64;
        d2_max = d2_max.max(s.potential.eval(xs, u).d2v.abs());
    }
    let p_pad =
        AUTO_SPREAD_SIGMAS * (u.hbar / ip.sigma).max(ip.sigma * (u.mass * d2_max).sqrt());
    let dx = (AUTO_DX_PER_SIGMA * ip.sigma)
        .min(std::f64::consts::PI * u.hbar / (1.15 * (p_need + p_pad)));

    let n = (((x_hi - x_lo) / dx).ceil() as usize).next_power_of_two().max(16);
    if n > AUTO_MAX_N {
        return Err(ItwError::InvalidInput(format!(
            "auto grid needs {n} points (> {AUTO_MAX_N}); provide an explicit grid"
        )));
    }
    let extra = n as f64 * dx - (x_hi - x_lo);
    SpatialGrid::new(x_lo - extra / 2.0, x_hi + extra / 2.0, n)
}

fn resolve_grid(s: &Scenario) -> Result<SpatialGrid> {
    match &s.grid {
        Some(g) => g.resolve(),
        None => auto_grid(s),
    }
}

/// Advance the exact side by `duration`: closed composition where the potential
/// admits one, split-operator stepping otherwise.
fn evolve_exact(
    psi: &WaveFunction,
    v: &PotentialSpec,
    duration: f64,
    grid: &SpatialGrid,
    u: &Units,
) -> Result<WaveFunction> {
    match v {
        PotentialSpec::Polynomial { .. } => {
            propagate(psi, v, &PropagatorConfig::for_duration(duration, grid, u), u)
        }
        _ => analytic_propagate(psi, v, duration, u),
    }
}

struct WaveComparison {
    l2_error: f64,
    fidelity: f64,
}

/// Reconstruct the wavefunction over the support region and compare with the
/// exact one. The shooting problem is certified single-branch once per time at
/// the density peak; each point then shoots from its own free-motion guess.
fn wave_comparison(
    s: &Scenario,
    psi: &WaveFunction,
    phi: &MomentumWaveFunction,
    t: f64,
    dt: f64,
) -> Result<WaveComparison> {
    let u = &s.units;
    let grid = &psi.grid;
    let x0 = s.initial.x0;
    let rho_max = (0..grid.n).map(|j| psi.density(j)).fold(0.0_f64, f64::max);
    let floor = SUPPORT_FLOOR * rho_max;
    let support: Vec<usize> = (0..grid.n).filter(|&j| psi.density(j) > floor).collect();
    if support.is_empty() {
        return Err(ItwError::InvalidInput("empty density support".into()));
    }

    let peak = (0..grid.n)
        .max_by(|a, b| psi.density(*a).total_cmp(&psi.density(*b)))
        .expect("non-empty grid");
    let branches = multi_start_scan(
        x0,
        0.0,
        grid.x(peak),
        t,
        (phi.grid.p_min(), phi.grid.p_max()),
        16,
        &s.potential,
        dt,
        u,
    )?;
    if branches.len() > 1 {
        return Err(ItwError::MultipleRoots { count: branches.len() });
    }

    let reconstruct = |j: &usize| -> Result<Complex64> {
        let x_f = grid.x(*j);
        let p_guess = u.mass * (x_f - x0) / t;
        let root = shoot(x0, 0.0, x_f, t, p_guess, &s.potential, dt, u)?;
        Ok(it_from_shot(&root, phi, u)?.amp)
    };
    #[cfg(feature = "parallel")]
    let samples: Vec<Result<Complex64>> = support.par_iter().map(reconstruct).collect();
    #[cfg(not(feature = "parallel"))]
    let samples: Vec<Result<Complex64>> = support.iter().map(reconstruct).collect();

    // sequential reduction in index order keeps results bit-identical
    let dx = grid.dx();
    let mut num = 0.0;
    let mut den = 0.0;
    let mut rec_sq = 0.0;
    let mut overlap = Complex64::new(0.0, 0.0);
    for (&j, sample) in support.iter().zip(samples) {
        let it_amp = sample?;
        let exact = psi.amps[j];
        num += (it_amp - exact).norm_sqr() * dx;
        den += exact.norm_sqr() * dx;
        rec_sq += it_amp.norm_sqr() * dx;
        overlap += exact.conj() * it_amp * dx;
    }
    Ok(WaveComparison {
        l2_error: (num / den).sqrt(),
        fidelity: overlap.norm() / (den.sqrt() * rec_sq.sqrt()),
    })
}

/// Sup of the density-ratio deviation over evenly spaced points of the core
/// region (density within CORE_FLOOR of the peak).
fn ratio_sup(
    s: &Scenario,
    psi: &WaveFunction,
    phi: &MomentumWaveFunction,
    dt: f64,
) -> Result<f64> {
    let grid = &psi.grid;
    let rho_max = (0..grid.n).map(|j| psi.density(j)).fold(0.0_f64, f64::max);
    let core: Vec<usize> =
        (0..grid.n).filter(|&j| psi.density(j) >= CORE_FLOOR * rho_max).collect();
    debug_assert!(!core.is_empty());
    let picks = MAX_RATIO_POINTS.min(core.len());
    let mut sup = 0.0_f64;
    let mut last = usize::MAX;
    for k in 0..picks {
        let j = core[if picks == 1 { 0 } else { k * (core.len() - 1) / (picks - 1) }];
        if j == last {
            continue;
        }
        last = j;
        let check = density_ratio_check(
            psi,
            phi,
            grid.x(j),
            &s.potential,
            s.initial.x0,
            0.0,
            &s.units,
            dt,
        )?;
        sup = sup.max(check.deviation);
    }
    Ok(sup)
}

/// Determinant identity probed one packet width beyond the carried center.
fn identity_at(s: &Scenario, t: f64, dt: f64) -> Result<f64> {
    let u = &s.units;
    let center = integrate(s.initial.x0, s.initial.p0, 0.0, t, &s.potential, dt, u)?.end.x;
    let x_f = center + s.initial.sigma;
    Ok(check_determinant_identity(x_f, t, s.initial.x0, 0.0, &s.potential, dt, u)?.deviation)
}

/// Default transport bins: one and two packet momentum widths around p0.
pub fn default_transport_edges(initial: &InitialPacket, u: &Units) -> [f64; 4] {
    let w = u.hbar / initial.sigma;
    [initial.p0 - 2.0 * w, initial.p0 - w, initial.p0 + w, initial.p0 + 2.0 * w]
}

fn transport_at(s: &Scenario, phi: &MomentumWaveFunction, t: f64, dt: f64) -> Result<f64> {
    let edges = default_transport_edges(&s.initial, &s.units);
    let check = probability_transport(
        phi,
        &s.potential,
        s.initial.x0,
        0.0,
        t,
        &edges,
        &s.units,
        dt,
    )?;
    Ok(check.max_deviation)
}

fn validate_row(row: &MetricRow) -> Result<()> {
    let metrics = [
        ("validity_ratio", Some(row.validity_ratio)),
        ("l2_error", row.l2_error),
        ("sup_density_error_at_classical_points", row.sup_density_error_at_classical_points),
        ("fidelity", row.fidelity),
        ("det_identity_deviation", row.det_identity_deviation),
        ("transport_deviation", row.transport_deviation),
    ];
    for (name, value) in metrics {
        if let Some(v) = value {
            if !v.is_finite() || v < 0.0 {
                return Err(ItwError::InvalidInput(format!(
                    "metric {name} violated its invariant: {v}"
                )));
            }
        }
    }
    if let Some(f) = row.fidelity {
        if f > 1.0 + 1e-9 {
            return Err(ItwError::InvalidInput(format!("fidelity exceeded unity: {f}")));
        }
    }
    Ok(())
}

/// Run one scenario: evolve the exact side along the schedule and emit one
/// MetricRow per observation time. Fully deterministic for a fixed scenario;
/// the first failing check aborts with the check and time named.
pub fn run_scenario(s: &Scenario) -> Result<Vec<MetricRow>> {
    s.validate()?;
    let u = s.units;
    let checks = canonical_checks(s);
    // the exact evolution is only paid for when a check compares against it
    let needs_exact =
        checks.iter().any(|c| matches!(c, Check::Convergence | Check::DensityRatio));
    let needs_packet =
        needs_exact || checks.iter().any(|c| matches!(c, Check::Transport));

    let mut state: Option<(SpatialGrid, WaveFunction, MomentumWaveFunction)> = if needs_packet {
        let grid = resolve_grid(s)?;
        let psi0 = gaussian_packet(&grid, &u, s.initial.sigma, s.initial.x0, s.initial.p0)?;
        let phi = to_momentum(&psi0, &u)?;
        Some((grid, psi0, phi))
    } else {
        None
    };

    let x_scale = state
        .as_ref()
        .map(|(g, _, _)| g.x_min.abs().max(g.x_max.abs()))
        .unwrap_or_else(|| s.initial.x0.abs() + 10.0 * s.initial.sigma);

    let mut rows = Vec::with_capacity(s.schedule.len());
    let mut prev_t = 0.0;
    for &t in &s.schedule {
        if needs_exact {
            if let Some((grid, psi, _)) = &mut state {
                if t > prev_t {
                    *psi = evolve_exact(psi, &s.potential, t - prev_t, grid, &u)
                        .map_err(|e| check_failed(s, "propagation", t, e))?;
                }
            }
        }
        let dt = classical_step(s, t.max(prev_t), x_scale);
        let mut row = MetricRow {
            scenario: s.name.clone(),
            t,
            validity_ratio: u.hbar * t / (u.mass * s.initial.sigma * s.initial.sigma),
            l2_error: None,
            sup_density_error_at_classical_points: None,
            fidelity: None,
            det_identity_deviation: None,
            transport_deviation: None,
        };
        for check in &checks {
            let wrap = |e| check_failed(s, check.name(), t, e);
            match check {
                Check::Validity => {
                    let report = validity_report_with(s.initial.sigma, t, DEFAULT_F_MIN, &u)
                        .map_err(wrap)?;
                    if !report.inside_zone {
                        return Err(check_failed(
                            s,
                            check.name(),
                            t,
                            ItwError::InvalidInput(format!(
                                "launch outside the semiclassical zone: f = {:.3} < {}",
                                report.f_factor, report.f_min
                            )),
                        ));
                    }
                }
                Check::Convergence => {
                    let (_, psi, phi) = state.as_ref().expect("packet built for convergence");
                    let cmp = wave_comparison(s, psi, phi, t, dt).map_err(wrap)?;
                    row.l2_error = Some(cmp.l2_error);
                    row.fidelity = Some(cmp.fidelity);
                }
                Check::DensityRatio => {
                    let (_, psi, phi) = state.as_ref().expect("packet built for density ratio");
                    row.sup_density_error_at_classical_points =
                        Some(ratio_sup(s, psi, phi, dt).map_err(wrap)?);
                }
                Check::DetIdentity => {
                    row.det_identity_deviation = Some(identity_at(s, t, dt).map_err(wrap)?);
                }
                Check::Transport => {
                    let (_, _, phi) = state.as_ref().expect("packet built for transport");
                    row.transport_deviation = Some(transport_at(s, phi, t, dt).map_err(wrap)?);
                }
            }
        }
        validate_row(&row)?;
        rows.push(row);
        prev_t = t;
    }
    Ok(rows)
}

/// Run several scenarios (concurrently under the `parallel` feature); each
/// scenario's internal check order stays serial and deterministic.
pub fn run_scenarios(list: &[Scenario]) -> Result<Vec<Vec<MetricRow>>> {
    #[cfg(feature = "parallel")]
    {
        list.par_iter().map(run_scenario).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        list.iter().map(run_scenario).collect()
    }
}

/// Least-squares slope of ln(l2_error) against ln(validity_ratio) over a time
/// grid, with zone membership enforced at threshold `f_min`.
///
/// Preconditions: at least 5 strictly increasing times spanning at least a
/// decade, all inside the zone for `f_min`.
pub fn convergence_scan_with(s: &Scenario, t_grid: &[f64], f_min: f64) -> Result<ScanResult> {
    if t_grid.len() < 5 {
        return Err(ItwError::InvalidInput(format!(
            "convergence scan needs at least 5 times, got {}",
            t_grid.len()
        )));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ItwError::InvalidInput("scan times must be strictly increasing".into()));
    }
    let span = t_grid[t_grid.len() - 1] / t_grid[0];
    if !(span >= 10.0 * (1.0 - 1e-12)) {
        return Err(ItwError::InvalidInput(format!(
            "scan times must span at least a decade, got ratio {span:.3}"
        )));
    }
    for &t in t_grid {
        let report = validity_report_with(s.initial.sigma, t, f_min, &s.units)?;
        if !report.inside_zone {
            return Err(ItwError::InvalidInput(format!(
                "scan time {t} lies outside the zone: f = {:.3} < {f_min}",
                report.f_factor
            )));
        }
    }

    let mut scan_scenario = s.clone();
    scan_scenario.schedule = t_grid.to_vec();
    scan_scenario.checks = vec![Check::Convergence];
    let rows = run_scenario(&scan_scenario)?;

    let points: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.validity_ratio.ln(), r.l2_error.expect("convergence enabled").ln()))
        .collect();
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    Ok(ScanResult { slope: sxy / sxx, rows })
}

/// Convergence scan with the default zone threshold.
pub fn convergence_scan(s: &Scenario, t_grid: &[f64]) -> Result<ScanResult> {
    convergence_scan_with(s, t_grid, DEFAULT_F_MIN)
}

/// Launch time t_i = m f²σ²/ħ and distance x_i = fσ for each (mass, f) pair.
pub fn transition_zone_table(
    masses: &[f64],
    sigma: f64,
    fs: &[f64],
    hbar: f64,
) -> Result<Vec<ZoneRow>> {
    if !(sigma.is_finite() && sigma > 0.0) || !(hbar.is_finite() && hbar > 0.0) {
        return Err(ItwError::InvalidInput(format!(
            "sigma and hbar must be positive, got sigma={sigma}, hbar={hbar}"
        )));
    }
    if masses.is_empty() || fs.is_empty() {
        return Err(ItwError::InvalidInput("need at least one mass and one f value".into()));
    }
    if masses.iter().chain(fs).any(|v| !v.is_finite() || *v <= 0.0) {
        return Err(ItwError::InvalidInput("masses and f values must be positive".into()));
    }
    let mut rows = Vec::with_capacity(masses.len() * fs.len());
    for &m in masses {
        for &f in fs {
            rows.push(ZoneRow { mass: m, f, t_i: m * f * f * sigma * sigma / hbar, x_i: f * sigma });
        }
    }
    Ok(rows)
}

/// Names of the packaged scenarios.
pub fn builtin_names() -> &'static [&'static str] {
    &["free-gaussian", "linear-field", "harmonic-caustic", "hydrogen-electron", "hydrogen-proton"]
}

/// Look up a packaged scenario by name.
pub fn builtin(name: &str) -> Result<Scenario> {
    let s = match name {
        "free-gaussian" => Scenario {
            name: "free-gaussian".into(),
            description:
                "Drifting free Gaussian packet; reconstruction error shrinks as the spread ratio grows"
                    .into(),
            evidence: vec![
                "closed-form free Gaussian evolution".into(),
                "free-motion reconstruction with momentum m x / t".into(),
                "error decay against the spread ratio ħt/mσ²".into(),
            ],
            potential: PotentialSpec::Free,
            initial: InitialPacket { sigma: 1.0, x0: 0.0, p0: 1.0 },
            units: Units::atomic(),
            grid: None,
            schedule: vec![1.0, 3.0, 10.0, 30.0, 100.0],
            checks: vec![Check::Convergence, Check::DensityRatio, Check::DetIdentity, Check::Transport],
            classical_dt: None,
        },
        "linear-field" => Scenario {
            name: "linear-field".into(),
            description: "Gaussian packet falling in a uniform force field".into(),
            evidence: vec![
                "uniform-force trajectories and action in closed form".into(),
                "reconstruction error measured under a nonzero force".into(),
            ],
            potential: PotentialSpec::Linear { force: 0.2 },
            initial: InitialPacket { sigma: 1.0, x0: 0.0, p0: 0.0 },
            units: Units::atomic(),
            grid: None,
            schedule: vec![1.0, 3.0, 10.0, 30.0],
            checks: vec![Check::Convergence, Check::DensityRatio, Check::DetIdentity, Check::Transport],
            classical_dt: None,
        },
        "harmonic-caustic" => Scenario {
            name: "harmonic-caustic".into(),
            description:
                "Displaced packet in a harmonic well; the half-period focus is a caustic and aborts the run"
                    .into(),
            evidence: vec![
                "harmonic monodromy rotation".into(),
                "trajectory-density divergence at the half-period focus".into(),
            ],
            potential: PotentialSpec::Harmonic { omega: 1.0 },
            initial: InitialPacket { sigma: 1.0, x0: 2.0, p0: 0.0 },
            units: Units::atomic(),
            grid: None,
            schedule: vec![0.5, 1.5, std::f64::consts::PI],
            checks: vec![Check::DetIdentity, Check::Transport],
            classical_dt: None,
        },
        "hydrogen-electron" => Scenario {
            name: "hydrogen-electron".into(),
            description:
                "Electron-mass zone onset: one atomic-unit packet enters the imaging zone near t = 10^4 a.u."
                    .into(),
            evidence: vec![
                "electron transition-zone onset near one hundred atomic units of distance".into(),
            ],
            potential: PotentialSpec::Free,
            initial: InitialPacket { sigma: 1.0, x0: 0.0, p0: 0.0 },
            units: Units::atomic(),
            grid: None,
            schedule: vec![1e4],
            checks: vec![Check::Validity],
            classical_dt: None,
        },
        "hydrogen-proton" => Scenario {
            name: "hydrogen-proton".into(),
            description:
                "Proton-mass zone onset: the same spread ratio is reached later by the mass ratio"
                    .into(),
            evidence: vec!["proton transition-zone onset scaled by the mass ratio".into()],
            potential: PotentialSpec::Free,
            initial: InitialPacket { sigma: 1.0, x0: 0.0, p0: 0.0 },
            units: Units::new(1.0, 1836.0),
            grid: None,
            schedule: vec![1.836e7],
            checks: vec![Check::Validity],
            classical_dt: None,
        },
        other => {
            return Err(ItwError::InvalidInput(format!(
                "unknown builtin scenario '{other}'; available: {}",
                builtin_names().join(", ")
            )))
        }
    };
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_gaussian_errors_shrink_with_time() {
        let rows = run_scenario(&builtin("free-gaussian").unwrap()).unwrap();
        assert_eq!(rows.len(), 5);
        for pair in rows.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            assert!(
                b.l2_error.unwrap() < a.l2_error.unwrap(),
                "l2 must shrink: {} -> {}",
                a.l2_error.unwrap(),
                b.l2_error.unwrap()
            );
        }
        let last = rows.last().unwrap();
        assert!(last.l2_error.unwrap() < 0.01);
        assert!(last.fidelity.unwrap() <= 1.0 + 1e-9);
        assert!(last.fidelity.unwrap() > 0.999);
        for row in &rows {
            assert!(row.det_identity_deviation.unwrap() < 1e-6);
            assert!(row.transport_deviation.unwrap() < 1e-6);
        }
    }

    #[test]
    fn linear_field_runs_clean() {
        let rows = run_scenario(&builtin("linear-field").unwrap()).unwrap();
        assert_eq!(rows.len(), 4);
        let last = rows.last().unwrap();
        assert!(last.l2_error.unwrap() < rows[0].l2_error.unwrap());
        assert!(last.transport_deviation.unwrap() < 1e-6);
        assert!(last.det_identity_deviation.unwrap() < 1e-5);
    }

    #[test]
    fn harmonic_focus_aborts_with_named_check() {
        let err = run_scenario(&builtin("harmonic-caustic").unwrap()).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("caustic"), "message should mention the caustic: {msg}");
        match err {
            ItwError::ScenarioCheckFailed { check, t, .. } => {
                assert_eq!(check, "det_identity");
                assert!((t - std::f64::consts::PI).abs() < 1e-12);
            }
            other => panic!("expected a named check failure, got {other:?}"),
        }
    }

    #[test]
    fn hydrogen_rows_sit_on_zone_onset() {
        let e = run_scenario(&builtin("hydrogen-electron").unwrap()).unwrap();
        assert_eq!(e.len(), 1);
        assert!((e[0].validity_ratio - 1e4).abs() < 1e-9);

        let p = run_scenario(&builtin("hydrogen-proton").unwrap()).unwrap();
        assert!((p[0].validity_ratio - 1e4).abs() < 1e-6);
    }

    #[test]
    fn validity_gate_rejects_early_launch() {
        let mut s = builtin("hydrogen-electron").unwrap();
        s.schedule = vec![10.0]; // f ~ 3.2, far outside the default zone
        let err = run_scenario(&s).unwrap_err();
        match err {
            ItwError::ScenarioCheckFailed { check, .. } => assert_eq!(check, "validity"),
            other => panic!("expected validity failure, got {other:?}"),
        }
    }

    #[test]
    fn zone_table_reproduces_reference_numbers() {
        let rows = transition_zone_table(&[1.0, 1836.0], 1.0, &[100.0], 1.0).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].t_i, 1e4);
        assert_eq!(rows[0].x_i, 100.0);
        assert_eq!(rows[1].t_i, 1.836e7);

        let edge = transition_zone_table(&[1.0], 1.0, &[1.0], 1.0).unwrap();
        assert_eq!(edge[0].x_i, 1.0);
    }

    #[test]
    fn zone_table_rejects_bad_inputs() {
        assert!(transition_zone_table(&[], 1.0, &[1.0], 1.0).is_err());
        assert!(transition_zone_table(&[1.0], -1.0, &[1.0], 1.0).is_err());
        assert!(transition_zone_table(&[1.0], 1.0, &[0.0], 1.0).is_err());
    }

    #[test]
    fn convergence_scan_free_slope_near_minus_one() {
        let s = builtin("free-gaussian").unwrap();
        let t_grid = [10.0, 17.783, 31.623, 56.234, 100.0];
        let scan = convergence_scan_with(&s, &t_grid, 3.0).unwrap();
        assert!(
            (-1.15..=-0.85).contains(&scan.slope),
            "slope {} outside the expected band",
            scan.slope
        );
    }

    #[test]
    fn convergence_scan_preconditions() {
        let s = builtin("free-gaussian").unwrap();
        // too few points
        assert!(convergence_scan_with(&s, &[10.0, 20.0, 40.0, 100.0], 3.0).is_err());
        // less than a decade
        assert!(
            convergence_scan_with(&s, &[10.0, 20.0, 30.0, 40.0, 50.0], 3.0).is_err()
        );
        // outside the zone at the default threshold
        assert!(convergence_scan(&s, &[10.0, 17.783, 31.623, 56.234, 100.0]).is_err());
    }

    #[test]
    fn scenario_json_round_trips() {
        let s = builtin("linear-field").unwrap();
        let text = serde_json::to_string_pretty(&s).unwrap();
        let back: Scenario = serde_json::from_str(&text).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn scenario_validation_catches_bad_schedules() {
        let mut s = builtin("free-gaussian").unwrap();
        s.schedule = vec![1.0, 1.0];
        assert!(s.validate().is_err());
        s.schedule = vec![-1.0, 2.0];
        assert!(s.validate().is_err());
        s.schedule = vec![];
        assert!(s.validate().is_err());
        s.schedule = vec![1.0];
        s.checks = vec![];
        assert!(s.validate().is_err());
    }

    #[test]
    fn reruns_are_bit_identical() {
        let s = builtin("linear-field").unwrap();
        let a = run_scenario(&s).unwrap();
        let b = run_scenario(&s).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unknown_builtin_is_rejected() {
        assert!(builtin("nope").is_err());
        assert_eq!(builtin_names().len(), 5);
    }
}
