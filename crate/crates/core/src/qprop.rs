use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::error::{ItwError, Result};
use crate::grid::{MomentumGrid, SpatialGrid};
use crate::potential::PotentialSpec;
use crate::units::Units;
use crate::wavefunction::{to_momentum_raw, WaveFunction};

/// Kinetic phase per step must stay below this for the spectral step to be alias-safe.
pub const ALIAS_PHASE_LIMIT: f64 = std::f64::consts::FRAC_PI_4;
/// Probability mass allowed in the boundary band after propagation.
pub const BOX_ESCAPE_TOL: f64 = 1e-10;

/// Splitting order of the spectral propagator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitOrder {
    /// Symmetric second-order splitting: half kick, drift, half kick.
    Strang2,
}

/// Time-stepping plan for `propagate`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorConfig {
    pub dt: f64,
    pub n_steps: usize,
    pub order: SplitOrder,
}

impl PropagatorConfig {
    pub fn new(dt: f64, n_steps: usize) -> Self {
        PropagatorConfig { dt, n_steps, order: SplitOrder::Strang2 }
    }

    /// Largest alias-safe dt for a grid: phase at the grid's momentum edge stays
    /// below `ALIAS_PHASE_LIMIT`.
    pub fn max_safe_dt(grid: &SpatialGrid, units: &Units) -> f64 {
        let pgrid = MomentumGrid::conjugate(grid, units);
        let p_edge = pgrid.dp * (grid.n as f64 / 2.0);
        ALIAS_PHASE_LIMIT * 2.0 * units.mass * units.hbar / (p_edge * p_edge)
    }

    /// Config covering `duration` with the largest alias-safe dt (steps land exactly).
    pub fn for_duration(duration: f64, grid: &SpatialGrid, units: &Units) -> Self {
        let dt_max = Self::max_safe_dt(grid, units) * 0.999;
        let n_steps = (duration / dt_max).ceil().max(1.0) as usize;
        PropagatorConfig::new(duration / n_steps as f64, n_steps)
    }
}

struct SpectralStepper {
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    /// kinetic multiplier in FFT bin order, 1/n inverse scaling folded in
    kinetic: Vec<Complex64>,
}

impl SpectralStepper {
    /// Kinetic drift by time-weight `w` (may be negative for backward shears).
    fn new(grid: &SpatialGrid, units: &Units, w: f64) -> Self {
        let n = grid.n;
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        let ifft = planner.plan_fft_inverse(n);
        let pgrid = MomentumGrid::conjugate(grid, units);
        let inv_n = 1.0 / n as f64;
        let kinetic = (0..n)
            .map(|b| {
                let k = if b < n / 2 { b as f64 } else { b as f64 - n as f64 };
                let p = k * pgrid.dp;
                Complex64::from_polar(inv_n, -p * p * w / (2.0 * units.mass * units.hbar))
            })
            .collect();
        SpectralStepper { fft, ifft, kinetic }
    }

    fn drift(&self, amps: &mut [Complex64]) {
        self.fft.process(amps);
        for (a, k) in amps.iter_mut().zip(&self.kinetic) {
            *a *= k;
        }
        self.ifft.process(amps);
    }
}

fn kick_multiplier(grid: &SpatialGrid, units: &Units, v: &PotentialSpec, w: f64) -> Vec<Complex64> {
    (0..grid.n)
        .map(|j| {
            let val = v.eval(grid.x(j), units).v;
            Complex64::from_polar(1.0, -val * w / units.hbar)
        })
        .collect()
}

fn apply(amps: &mut [Complex64], mult: &[Complex64]) {
    for (a, m) in amps.iter_mut().zip(mult) {
        *a *= m;
    }
}

fn check_box_escape(psi: &WaveFunction) -> Result<()> {
    let band = (psi.grid.n / 64).max(2);
    let mass = psi.boundary_mass(band);
    if mass > BOX_ESCAPE_TOL {
        return Err(ItwError::BoxEscape { boundary_mass: mass, limit: BOX_ESCAPE_TOL });
    }
    Ok(())
}

fn check_alias(grid: &SpatialGrid, units: &Units, dt: f64) -> Result<()> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(ItwError::InvalidInput(format!("dt must be finite and positive, got {dt}")));
    }
    let pgrid = MomentumGrid::conjugate(grid, units);
    let p_edge = pgrid.dp * (grid.n as f64 / 2.0);
    let phase = p_edge * p_edge * dt / (2.0 * units.mass * units.hbar);
    if phase >= ALIAS_PHASE_LIMIT {
        return Err(ItwError::AliasRisk {
            phase,
            limit: ALIAS_PHASE_LIMIT,
            dt_max: PropagatorConfig::max_safe_dt(grid, units),
        });
    }
    Ok(())
}

/// Evolve `psi` by `cfg.n_steps` symmetric split-operator steps under potential `v`.
///
/// Each step is exp(-iV dt/2ħ) · exp(-iT dt/ħ) · exp(-iV dt/2ħ) applied spectrally;
/// consecutive half kicks are merged. The step is unitary, so the norm is conserved
/// to rounding. Fails up front on alias risk and afterwards if probability reached
/// the box boundary.
pub fn propagate(
    psi: &WaveFunction,
    v: &PotentialSpec,
    cfg: &PropagatorConfig,
    units: &Units,
) -> Result<WaveFunction> {
    v.validate()?;
    if cfg.n_steps == 0 {
        return Ok(psi.clone());
    }
    check_alias(&psi.grid, units, cfg.dt)?;

    let stepper = SpectralStepper::new(&psi.grid, units, cfg.dt);
    let half_kick = kick_multiplier(&psi.grid, units, v, cfg.dt / 2.0);
    let full_kick = kick_multiplier(&psi.grid, units, v, cfg.dt);

    let mut amps = psi.amps.clone();
    apply(&mut amps, &half_kick);
    for step in 0..cfg.n_steps {
        stepper.drift(&mut amps);
        if step + 1 < cfg.n_steps {
            apply(&mut amps, &full_kick);
        } else {
            apply(&mut amps, &half_kick);
        }
    }

    let out = WaveFunction {
        grid: psi.grid,
        amps,
        t: psi.t + cfg.dt * cfg.n_steps as f64,
    };
    check_box_escape(&out)?;
    Ok(out)
}

/// Closed-form free evolution of a Gaussian packet (σ, x0, p0) launched at t = 0,
/// sampled on `grid` at time t.
///
/// Ψ(x,t) = (σ²/π)^(1/4) (σ² + iħt/m)^(-1/2)
///          · exp[-ξ²/2(σ² + iħt/m)] · exp[i(p0(x-x0) - p0²t/2m)/ħ],
/// with ξ = x - x0 - p0 t/m. At t = 0 this is exactly the initial packet.
pub fn analytic_free_gaussian(
    grid: &SpatialGrid,
    units: &Units,
    sigma: f64,
    x0: f64,
    p0: f64,
    t: f64,
) -> WaveFunction {
    let denom = Complex64::new(sigma * sigma, units.hbar * t / units.mass);
    let pref = (sigma * sigma / std::f64::consts::PI).powf(0.25) / denom.sqrt();
    let center = x0 + p0 * t / units.mass;
    let amps = (0..grid.n)
        .map(|j| {
            let x = grid.x(j);
            let xi = x - center;
            let phase = (p0 * (x - x0) - p0 * p0 * t / (2.0 * units.mass)) / units.hbar;
            pref * (-xi * xi / (2.0 * denom) + Complex64::new(0.0, phase)).exp()
        })
        .collect();
    WaveFunction { grid: *grid, amps, t }
}

/// Exact propagation for the quadratic reference potentials via closed kick/drift
/// compositions (no splitting error):
///
/// - Free: one spectral drift.
/// - Linear (V = -Fx): half kick, drift, half kick, times the global phase
///   exp(-i F²τ³/24mħ); the kick-drift-kick shear composition reproduces the
///   constant-force map exactly and the residual is a central phase.
/// - Harmonic: shear decomposition with kick weight tan(ωτ/2)/ω and drift weight
///   sin(ωτ)/ω, split into substeps with ωτ ≤ π/2 so the shear weights stay
///   bounded through focal times.
///
/// Polynomial potentials have no closed-form kernel and are rejected.
pub fn analytic_propagate(
    psi: &WaveFunction,
    v: &PotentialSpec,
    duration: f64,
    units: &Units,
) -> Result<WaveFunction> {
    v.validate()?;
    if !(duration.is_finite() && duration >= 0.0) {
        return Err(ItwError::InvalidInput(format!(
            "duration must be finite and non-negative, got {duration}"
        )));
    }
    if duration == 0.0 {
        return Ok(psi.clone());
    }
    let mut amps = psi.amps.clone();
    match v {
        PotentialSpec::Free => {
            SpectralStepper::new(&psi.grid, units, duration).drift(&mut amps);
        }
        PotentialSpec::Linear { .. } => {
            let half_kick = kick_multiplier(&psi.grid, units, v, duration / 2.0);
            apply(&mut amps, &half_kick);
            SpectralStepper::new(&psi.grid, units, duration).drift(&mut amps);
            apply(&mut amps, &half_kick);
            let force = match v {
                PotentialSpec::Linear { force } => *force,
                _ => unreachable!(),
            };
            let global = Complex64::from_polar(
                1.0,
                -force * force * duration.powi(3) / (24.0 * units.mass * units.hbar),
            );
            for a in &mut amps {
                *a *= global;
            }
        }
        PotentialSpec::Harmonic { omega } => {
            let n_sub = ((omega * duration).abs() / std::f64::consts::FRAC_PI_2)
                .ceil()
                .max(1.0) as usize;
            let tau = duration / n_sub as f64;
            let kick_w = (omega * tau / 2.0).tan() / omega;
            let drift_w = (omega * tau).sin() / omega;
            let kick = kick_multiplier(&psi.grid, units, v, kick_w);
            let stepper = SpectralStepper::new(&psi.grid, units, drift_w);
            for _ in 0..n_sub {
                apply(&mut amps, &kick);
                stepper.drift(&mut amps);
                apply(&mut amps, &kick);
            }
        }
        PotentialSpec::Polynomial { .. } => {
            return Err(ItwError::UnsupportedPotential(v.label()));
        }
    }
    let out = WaveFunction { grid: psi.grid, amps, t: psi.t + duration };
    check_box_escape(&out)?;
    Ok(out)
}

/// Quadrature expectation values used by the correspondence checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub x_mean: f64,
    pub p_mean: f64,
    /// ⟨V'(x)⟩, the force expectation up to sign
    pub dv_mean: f64,
    pub kinetic: f64,
    pub potential: f64,
}

impl Observables {
    pub fn energy(&self) -> f64 {
        self.kinetic + self.potential
    }
}

/// ⟨x⟩, ⟨p⟩, ⟨V'⟩, ⟨T⟩, ⟨V⟩ of a normalized state under `v`.
pub fn observables(psi: &WaveFunction, v: &PotentialSpec, units: &Units) -> Observables {
    let dx = psi.grid.dx();
    let norm_sq = psi.norm_sq();
    let mut x_mean = 0.0;
    let mut dv_mean = 0.0;
    let mut pot = 0.0;
    for (j, a) in psi.amps.iter().enumerate() {
        let w = a.norm_sqr() * dx;
        let x = psi.grid.x(j);
        let pv = v.eval(x, units);
        x_mean += x * w;
        dv_mean += pv.dv * w;
        pot += pv.v * w;
    }
    let phi = to_momentum_raw(psi, units);
    let mut p_mean = 0.0;
    let mut kin = 0.0;
    for (j, a) in phi.amps.iter().enumerate() {
        let w = a.norm_sqr() * phi.grid.dp;
        let p = phi.grid.p(j);
        p_mean += p * w;
        kin += p * p / (2.0 * units.mass) * w;
    }
    Observables {
        x_mean: x_mean / norm_sq,
        p_mean: p_mean / norm_sq,
        dv_mean: dv_mean / norm_sq,
        kinetic: kin / norm_sq,
        potential: pot / norm_sq,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavefunction::{gaussian_packet, l2_relative_diff};

    const U: Units = Units { hbar: 1.0, mass: 1.0 };

    #[test]
    fn zero_steps_is_identity() {
        let grid = SpatialGrid::symmetric(20.0, 256).unwrap();
        let psi = gaussian_packet(&grid, &U, 1.0, 0.0, 0.0).unwrap();
        let out = propagate(&psi, &PotentialSpec::Free, &PropagatorConfig::new(0.1, 0), &U).unwrap();
        assert_eq!(out, psi);
    }

    #[test]
    fn alias_risk_detected() {
        let grid = SpatialGrid::symmetric(20.0, 1024).unwrap();
        let psi = gaussian_packet(&grid, &U, 1.0, 0.0, 0.0).unwrap();
        let dt_max = PropagatorConfig::max_safe_dt(&grid, &U);
        let bad = PropagatorConfig::new(dt_max * 1.5, 10);
        assert!(matches!(
            propagate(&psi, &PotentialSpec::Free, &bad, &U),
            Err(ItwError::AliasRisk { .. })
        ));
        let good = PropagatorConfig::new(dt_max * 0.5, 10);
        assert!(propagate(&psi, &PotentialSpec::Free, &good, &U).is_ok());
    }

    #[test]
    fn free_split_step_matches_closed_form() {
        let grid = SpatialGrid::symmetric(40.0, 1024).unwrap();
        let psi = gaussian_packet(&grid, &U, 1.0, 0.0, 0.0).unwrap();
        let cfg = PropagatorConfig::for_duration(3.0, &grid, &U);
        let num = propagate(&psi, &PotentialSpec::Free, &cfg, &U).unwrap();
        let exact = analytic_free_gaussian(&grid, &U, 1.0, 0.0, 0.0, 3.0);
        assert!(l2_relative_diff(&exact, &num) < 1e-10);
    }

    #[test]
    fn norm_conserved_per_step() {
        let grid = SpatialGrid::symmetric(16.0, 256).unwrap();
        let psi = gaussian_packet(&grid, &U, 1.0, 1.0, 0.0).unwrap();
        let v = PotentialSpec::Harmonic { omega: 1.0 };
        let mut state = psi;
        let cfg = PropagatorConfig::new(1e-3, 1);
        for _ in 0..100 {
            state = propagate(&state, &v, &cfg, &U).unwrap();
        }
        assert!((state.norm_sq() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn box_escape_detected() {
        // fast packet in a small box runs into the wall
        let grid = SpatialGrid::symmetric(12.0, 256).unwrap();
        let psi = gaussian_packet(&grid, &U, 1.0, 0.0, 4.0).unwrap();
        let cfg = PropagatorConfig::for_duration(3.0, &grid, &U);
        assert!(matches!(
            propagate(&psi, &PotentialSpec::Free, &cfg, &U),
            Err(ItwError::BoxEscape { .. })
        ));
    }

    #[test]
    fn analytic_free_gaussian_reduces_to_packet_at_t0() {
        let grid = SpatialGrid::symmetric(20.0, 512).unwrap();
        let packet = gaussian_packet(&grid, &U, 1.3, 0.5, 2.0).unwrap();
        let closed = analytic_free_gaussian(&grid, &U, 1.3, 0.5, 2.0, 0.0);
        assert!(l2_relative_diff(&packet, &closed) < 1e-13);
    }

    #[test]
    fn polynomial_has_no_closed_form() {
        let grid = SpatialGrid::symmetric(20.0, 256).unwrap();
        let psi = gaussian_packet(&grid, &U, 1.0, 0.0, 0.0).unwrap();
        let v = PotentialSpec::Polynomial { coefficients: vec![0.0, 0.0, 0.0, 0.1] };
        assert!(matches!(
            analytic_propagate(&psi, &v, 1.0, &U),
            Err(ItwError::UnsupportedPotential(_))
        ));
    }

    #[test]
    fn observables_of_boosted_packet() {
        let grid = SpatialGrid::symmetric(20.0, 512).unwrap();
        let psi = gaussian_packet(&grid, &U, 1.0, 2.0, 1.5).unwrap();
        let obs = observables(&psi, &PotentialSpec::Free, &U);
        assert!((obs.x_mean - 2.0).abs() < 1e-10);
        assert!((obs.p_mean - 1.5).abs() < 1e-10);
        // ⟨T⟩ = p0²/2m + ħ²/4mσ²
        assert!((obs.kinetic - (1.5 * 1.5 / 2.0 + 0.25)).abs() < 1e-9);
    }
}
