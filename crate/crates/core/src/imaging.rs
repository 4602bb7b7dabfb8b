use num_complex::Complex64;
use std::f64::consts::FRAC_PI_4;

use crate::classical::{integrate, multi_start_scan, shoot, ShootingResult};
use crate::error::{ItwError, Result};
use crate::potential::PotentialSpec;
use crate::units::Units;
use crate::wavefunction::{to_momentum_raw, MomentumWaveFunction, WaveFunction};

/// Densities below this floor cannot anchor a ratio check.
pub const DENSITY_FLOOR: f64 = 1e-30;
/// Validity factor below which the semiclassical reconstruction is not trusted.
pub const DEFAULT_F_MIN: f64 = 10.0;
/// Minimum Simpson nodes per transport bin on the position side.
const TRANSPORT_X_NODES: usize = 129;
/// Minimum Simpson nodes per transport bin on the momentum side.
const TRANSPORT_P_NODES: usize = 513;
/// Node density target: bins wider than the packet get proportionally more nodes.
const TRANSPORT_NODES_PER_SIGMA: usize = 96;
/// Hard node cap so arbitrarily wide bins stay bounded in cost.
const TRANSPORT_MAX_NODES: usize = 4097;

/// One semiclassically reconstructed wavefunction value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ItSample {
    pub x_f: f64,
    pub t_f: f64,
    /// initial momentum of the connecting trajectory
    pub p_i: f64,
    /// classical action along the trajectory
    pub action: f64,
    /// |∂x_f/∂p_i|^(-1/2)
    pub van_vleck: f64,
    /// momentum amplitude carried onto the trajectory
    pub momentum_amp: Complex64,
    /// reconstructed Ψ(x_f, t_f)
    pub amp: Complex64,
}

/// Pointwise comparison of |Ψ|²/|Ψ̃|² against the trajectory density 1/|∂x_f/∂p_i|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityRatioCheck {
    /// grid point actually compared (nearest to the requested x_f)
    pub x_f: f64,
    pub p_i: f64,
    /// |Ψ(x_f)|² / |Ψ̃(p_i)|²
    pub lhs: f64,
    /// 1 / |∂x_f/∂p_i|
    pub rhs: f64,
    pub deviation: f64,
}

/// One momentum bin carried to its classical image interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportBin {
    pub p_lo: f64,
    pub p_hi: f64,
    pub x_lo: f64,
    pub x_hi: f64,
    /// ∫|Ψ̃|² dp over the bin
    pub prob_momentum: f64,
    /// ∫ of the compared density dx over the image interval
    pub prob_position: f64,
    pub deviation: f64,
}

/// Bin-resolved probability bookkeeping between representations.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportCheck {
    pub bins: Vec<TransportBin>,
    pub max_deviation: f64,
}

/// |Ψ|²·|∂x_f/∂p_i| evaluated at two final times along one trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoTimeInvariance {
    pub product_1: f64,
    pub product_2: f64,
    pub x_f_2: f64,
    pub deviation: f64,
}

/// Scale analysis deciding whether a launch time sits in the semiclassical zone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityReport {
    /// f = sqrt(ħ t_i / m) / σ, the packet-spread ratio at launch
    pub f_factor: f64,
    /// launch distance f·σ at which the spread matches the travel scale
    pub x_i: f64,
    /// mean energy ħ²/(2mσ²) of the reference packet
    pub mean_energy: f64,
    /// accumulated action over ħ at launch, f²/2
    pub action_ratio: f64,
    pub f_min: f64,
    pub inside_zone: bool,
}

fn assemble(root: &ShootingResult, phi: &MomentumWaveFunction, units: &Units) -> Result<ItSample> {
    let traj = &root.trajectory;
    if traj.near_caustic {
        return Err(ItwError::CausticSingular { m12: traj.monodromy.m12 });
    }
    let van_vleck = traj.monodromy.m12.abs().powf(-0.5);
    let momentum_amp = phi.interpolate(root.p_i)?;
    let amp = Complex64::from_polar(van_vleck, traj.action / units.hbar - FRAC_PI_4)
        * momentum_amp;
    Ok(ItSample {
        x_f: traj.end.x,
        t_f: traj.end.t,
        p_i: root.p_i,
        action: traj.action,
        van_vleck,
        momentum_amp,
        amp,
    })
}

/// Build the reconstructed value from an already-converged shooting root.
///
/// Skips the uniqueness certification of `it_wavefunction`; callers are expected
/// to have certified the configuration separately.
pub fn it_from_shot(
    root: &ShootingResult,
    phi: &MomentumWaveFunction,
    units: &Units,
) -> Result<ItSample> {
    assemble(root, phi, units)
}

/// Reconstruct Ψ(x_f, t_f) from the momentum amplitude at launch time:
/// Ψ = e^(-iπ/4) |∂x_f/∂p_i|^(-1/2) e^(iS_c/ħ) Ψ̃(p_i), with the trajectory from
/// (x_i, t_i) to (x_f, t_f) found by shooting.
///
/// The root is certified unique by a multi-start scan across the full momentum
/// grid; `MultipleRoots` reports interfering branches, `CausticSingular` a
/// vanishing trajectory density.
pub fn it_wavefunction(
    x_f: f64,
    t_f: f64,
    phi: &MomentumWaveFunction,
    v: &PotentialSpec,
    x_i: f64,
    t_i: f64,
    units: &Units,
    dt: f64,
) -> Result<ItSample> {
    let p_guess = units.mass * (x_f - x_i) / (t_f - t_i);
    let root = match shoot(x_i, t_i, x_f, t_f, p_guess, v, dt, units) {
        Ok(root) => root,
        // the reconstruction itself is singular where the trajectory density diverges
        Err(ItwError::NearCaustic { m12, .. }) => {
            return Err(ItwError::CausticSingular { m12 })
        }
        Err(e) => return Err(e),
    };
    let scan = multi_start_scan(
        x_i,
        t_i,
        x_f,
        t_f,
        (phi.grid.p_min(), phi.grid.p_max()),
        16,
        v,
        dt,
        units,
    )?;
    let mut count = scan.len();
    if !scan
        .iter()
        .any(|r| (r.p_i - root.p_i).abs() <= crate::classical::ROOT_MERGE_TOL)
    {
        count += 1;
    }
    if count > 1 {
        return Err(ItwError::MultipleRoots { count });
    }
    assemble(&root, phi, units)
}

/// Free-motion reconstruction in closed form: p_i = m (x_f - x_i)/(t_f - t_i),
/// S_c = p_i² Δt / 2m, amplitude (m/Δt)^(1/2). No integrator involved.
pub fn free_it(
    x_f: f64,
    t_f: f64,
    phi: &MomentumWaveFunction,
    x_i: f64,
    t_i: f64,
    units: &Units,
) -> Result<ItSample> {
    let dt = t_f - t_i;
    if !(dt > 0.0) {
        return Err(ItwError::InvalidInput(format!(
            "need t_f > t_i, got t_i={t_i}, t_f={t_f}"
        )));
    }
    let m = units.mass;
    let p_i = m * (x_f - x_i) / dt;
    let action = p_i * p_i * dt / (2.0 * m);
    let van_vleck = (m / dt).sqrt();
    let momentum_amp = phi.interpolate(p_i)?;
    let amp =
        Complex64::from_polar(van_vleck, action / units.hbar - FRAC_PI_4) * momentum_amp;
    Ok(ItSample { x_f, t_f, p_i, action, van_vleck, momentum_amp, amp })
}

/// Compare the measured density ratio |Ψ(x_f)|²/|Ψ̃(p_i)|² with the classical
/// compression factor 1/|∂x_f/∂p_i| on the trajectory from (x_i, t_i) to the
/// grid point nearest x_f. `psi` is the evolved wavefunction at its own time t_f.
pub fn density_ratio_check(
    psi: &WaveFunction,
    phi: &MomentumWaveFunction,
    x_f: f64,
    v: &PotentialSpec,
    x_i: f64,
    t_i: f64,
    units: &Units,
    dt: f64,
) -> Result<DensityRatioCheck> {
    let j = psi.grid.nearest_index(x_f);
    let x_g = psi.grid.x(j);
    let p_guess = units.mass * (x_g - x_i) / (psi.t - t_i);
    let root = shoot(x_i, t_i, x_g, psi.t, p_guess, v, dt, units)?;
    if root.trajectory.near_caustic {
        return Err(ItwError::CausticSingular { m12: root.trajectory.monodromy.m12 });
    }
    let phi_density = phi.interpolate(root.p_i)?.norm_sqr();
    if phi_density < DENSITY_FLOOR {
        return Err(ItwError::DivisionNearZero { value: phi_density, limit: DENSITY_FLOOR });
    }
    let lhs = psi.density(j) / phi_density;
    let rhs = root.trajectory.monodromy.m12.abs().recip();
    Ok(DensityRatioCheck {
        x_f: x_g,
        p_i: root.p_i,
        lhs,
        rhs,
        deviation: (lhs - rhs).abs() / rhs,
    })
}

fn simpson<F: FnMut(f64) -> Result<f64>>(lo: f64, hi: f64, nodes: usize, mut f: F) -> Result<f64> {
    debug_assert!(nodes >= 3 && nodes % 2 == 1);
    let h = (hi - lo) / (nodes - 1) as f64;
    let mut acc = 0.0;
    for k in 0..nodes {
        let w = if k == 0 || k == nodes - 1 {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * f(lo + k as f64 * h)?;
    }
    Ok(acc * h / 3.0)
}

/// Spectral evaluator for |ψ(x)|² at off-grid points.
///
/// The position amplitudes are re-synthesized from the momentum representation
/// by direct summation, which is exact for grid-band-limited states, so the
/// transport quadrature is not limited by grid interpolation error.
struct SpectralDensity {
    amps: Vec<Complex64>,
    p_over_h: Vec<f64>,
    norm: f64,
}

impl SpectralDensity {
    fn new(psi: &WaveFunction, units: &Units) -> Self {
        let phi = to_momentum_raw(psi, units);
        let p_over_h = (0..phi.grid.n).map(|k| phi.grid.p(k) / units.hbar).collect();
        let dp = phi.grid.dp;
        SpectralDensity {
            amps: phi.amps,
            p_over_h,
            norm: dp / (2.0 * std::f64::consts::PI * units.hbar).sqrt(),
        }
    }

    fn density_at(&self, x: f64) -> f64 {
        // incremental rotation over the arithmetic momentum ladder
        let step = Complex64::from_polar(1.0, (self.p_over_h[1] - self.p_over_h[0]) * x);
        let mut rot = Complex64::from_polar(1.0, self.p_over_h[0] * x);
        let mut sum = Complex64::new(0.0, 0.0);
        for a in &self.amps {
            sum += a * rot;
            rot *= step;
        }
        (sum * self.norm).norm_sqr()
    }
}

fn checked_edges(p_edges: &[f64]) -> Result<()> {
    if p_edges.len() < 2 {
        return Err(ItwError::InvalidInput(
            "transport needs at least two momentum edges".into(),
        ));
    }
    if p_edges.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ItwError::InvalidInput(
            "transport momentum edges must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Momentum standard deviation of |Ψ̃|², used to size quadrature grids.
fn momentum_scale(phi: &MomentumWaveFunction) -> f64 {
    let mut weight = 0.0;
    let mut first = 0.0;
    for k in 0..phi.grid.n {
        let rho = phi.amps[k].norm_sqr();
        weight += rho;
        first += rho * phi.grid.p(k);
    }
    let mean = first / weight.max(f64::MIN_POSITIVE);
    let mut second = 0.0;
    for k in 0..phi.grid.n {
        let d = phi.grid.p(k) - mean;
        second += phi.amps[k].norm_sqr() * d * d;
    }
    (second / weight.max(f64::MIN_POSITIVE)).sqrt()
}

fn transport_nodes(base: usize, bin_width: f64, p_scale: f64) -> usize {
    let est = (TRANSPORT_NODES_PER_SIGMA as f64 * bin_width / p_scale).ceil();
    let n = (est as usize).clamp(base, TRANSPORT_MAX_NODES);
    if n % 2 == 0 {
        n + 1
    } else {
        n
    }
}

/// Carry momentum bins [p_edges[k], p_edges[k+1]] at time t_i to their classical
/// image intervals at t_f and compare the probability content on each side.
///
/// The momentum side integrates |Ψ̃|² by Simpson on interpolated amplitudes; the
/// position side integrates the reconstructed density |Ψ_IT|² by Simpson, solving
/// the boundary problem at every node. Both sides then measure the same momentum
/// content through different plumbing, so they agree to quadrature accuracy
/// whenever the trajectory map is resolved, independent of how far the packet is
/// into the imaging regime.
pub fn probability_transport(
    phi: &MomentumWaveFunction,
    v: &PotentialSpec,
    x_i: f64,
    t_i: f64,
    t_f: f64,
    p_edges: &[f64],
    units: &Units,
    dt: f64,
) -> Result<TransportCheck> {
    checked_edges(p_edges)?;
    let p_scale = momentum_scale(phi).max(f64::MIN_POSITIVE);
    let mut x_edges = Vec::with_capacity(p_edges.len());
    for &p in p_edges {
        let traj = integrate(x_i, p, t_i, t_f, v, dt, units)?;
        x_edges.push(traj.end.x);
    }

    let mut bins = Vec::with_capacity(p_edges.len() - 1);
    let mut max_deviation = 0.0_f64;
    for k in 0..p_edges.len() - 1 {
        let (p_lo, p_hi) = (p_edges[k], p_edges[k + 1]);
        let prob_momentum = simpson(
            p_lo,
            p_hi,
            transport_nodes(TRANSPORT_P_NODES, p_hi - p_lo, p_scale),
            |p| Ok(phi.interpolate(p)?.norm_sqr()),
        )?;
        let (x_lo, x_hi) = if x_edges[k] <= x_edges[k + 1] {
            (x_edges[k], x_edges[k + 1])
        } else {
            (x_edges[k + 1], x_edges[k])
        };
        // warm-started shooting: consecutive nodes image nearby momenta
        let mut last_p: Option<f64> = None;
        let prob_position = simpson(
            x_lo,
            x_hi,
            transport_nodes(TRANSPORT_X_NODES, p_hi - p_lo, p_scale),
            |x| {
                let guess = last_p.unwrap_or(units.mass * (x - x_i) / (t_f - t_i));
                let root = shoot(x_i, t_i, x, t_f, guess, v, dt, units)?;
                last_p = Some(root.p_i);
                let sample = it_from_shot(&root, phi, units)?;
                Ok(sample.amp.norm_sqr())
            },
        )?;
        let deviation = (prob_position - prob_momentum).abs();
        max_deviation = max_deviation.max(deviation);
        bins.push(TransportBin { p_lo, p_hi, x_lo, x_hi, prob_momentum, prob_position, deviation });
    }

    Ok(TransportCheck { bins, max_deviation })
}

/// Same bin bookkeeping as `probability_transport`, but the position side
/// integrates the exact density |ψ|² instead of the reconstruction.
///
/// This deviation is physical rather than numerical: it shrinks as the packet
/// moves deeper into the imaging regime, so it is reported for study, not held
/// to the quadrature tolerance.
pub fn probability_transport_vs_exact(
    psi: &WaveFunction,
    phi: &MomentumWaveFunction,
    p_edges: &[f64],
    v: &PotentialSpec,
    x_i: f64,
    t_i: f64,
    units: &Units,
    dt: f64,
) -> Result<TransportCheck> {
    checked_edges(p_edges)?;
    let p_scale = momentum_scale(phi).max(f64::MIN_POSITIVE);
    let t_f = psi.t;
    let mut x_edges = Vec::with_capacity(p_edges.len());
    for &p in p_edges {
        let traj = integrate(x_i, p, t_i, t_f, v, dt, units)?;
        x_edges.push(traj.end.x);
    }

    let spectral = SpectralDensity::new(psi, units);
    let mut bins = Vec::with_capacity(p_edges.len() - 1);
    let mut max_deviation = 0.0_f64;
    for k in 0..p_edges.len() - 1 {
        let (p_lo, p_hi) = (p_edges[k], p_edges[k + 1]);
        let prob_momentum = simpson(
            p_lo,
            p_hi,
            transport_nodes(TRANSPORT_P_NODES, p_hi - p_lo, p_scale),
            |p| Ok(phi.interpolate(p)?.norm_sqr()),
        )?;
        let (x_lo, x_hi) = if x_edges[k] <= x_edges[k + 1] {
            (x_edges[k], x_edges[k + 1])
        } else {
            (x_edges[k + 1], x_edges[k])
        };
        let prob_position = simpson(
            x_lo,
            x_hi,
            transport_nodes(TRANSPORT_X_NODES, p_hi - p_lo, p_scale),
            |x| Ok(spectral.density_at(x)),
        )?;
        let deviation = (prob_position - prob_momentum).abs();
        max_deviation = max_deviation.max(deviation);
        bins.push(TransportBin { p_lo, p_hi, x_lo, x_hi, prob_momentum, prob_position, deviation });
    }

    Ok(TransportCheck { bins, max_deviation })
}

/// Check that |Ψ|²·|∂x_f/∂p_i| built from the reconstruction is the same at two
/// final times along the single trajectory through (x_f_1, t_f_1).
pub fn two_time_invariance(
    phi: &MomentumWaveFunction,
    v: &PotentialSpec,
    x_i: f64,
    t_i: f64,
    x_f_1: f64,
    t_f_1: f64,
    t_f_2: f64,
    units: &Units,
    dt: f64,
) -> Result<TwoTimeInvariance> {
    let p_guess = units.mass * (x_f_1 - x_i) / (t_f_1 - t_i);
    let root1 = shoot(x_i, t_i, x_f_1, t_f_1, p_guess, v, dt, units)?;
    let sample1 = assemble(&root1, phi, units)?;
    // same initial conditions carried to the second time
    let traj2 = integrate(x_i, root1.p_i, t_i, t_f_2, v, dt, units)?;
    let root2 = ShootingResult { p_i: root1.p_i, trajectory: traj2, iterations: 0, residual: 0.0 };
    let sample2 = assemble(&root2, phi, units)?;

    let product_1 = sample1.amp.norm_sqr() * root1.trajectory.monodromy.m12.abs();
    let product_2 = sample2.amp.norm_sqr() * traj2.monodromy.m12.abs();
    let scale = product_1.abs().max(product_2.abs()).max(f64::MIN_POSITIVE);
    Ok(TwoTimeInvariance {
        product_1,
        product_2,
        x_f_2: traj2.end.x,
        deviation: (product_1 - product_2).abs() / scale,
    })
}

/// Validity scales with the default zone threshold.
pub fn validity_report(sigma: f64, t_i: f64, units: &Units) -> Result<ValidityReport> {
    validity_report_with(sigma, t_i, DEFAULT_F_MIN, units)
}

/// Validity scales for a packet of width `sigma` launched after free spreading
/// time `t_i`: the spread ratio f = sqrt(ħ t_i/m)/σ, the matching launch distance
/// f·σ, the packet mean energy, and the action-over-ħ ratio f²/2. The launch is
/// inside the semiclassical zone when f ≥ f_min.
pub fn validity_report_with(
    sigma: f64,
    t_i: f64,
    f_min: f64,
    units: &Units,
) -> Result<ValidityReport> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(ItwError::InvalidInput(format!("sigma must be positive, got {sigma}")));
    }
    if !(t_i.is_finite() && t_i > 0.0) {
        return Err(ItwError::InvalidInput(format!("t_i must be positive, got {t_i}")));
    }
    if !(f_min.is_finite() && f_min > 0.0) {
        return Err(ItwError::InvalidInput(format!("f_min must be positive, got {f_min}")));
    }
    let f_factor = (units.hbar * t_i / units.mass).sqrt() / sigma;
    // evaluated as (f/√2)² so the zone boundary f = √2 maps to exactly 1
    let action_ratio = (f_factor / std::f64::consts::SQRT_2).powi(2);
    Ok(ValidityReport {
        f_factor,
        x_i: f_factor * sigma,
        mean_energy: units.hbar * units.hbar / (2.0 * units.mass * sigma * sigma),
        action_ratio,
        f_min,
        inside_zone: f_factor >= f_min,
    })
}
