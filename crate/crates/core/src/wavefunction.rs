use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{ItwError, Result};
use crate::grid::{MomentumGrid, SpatialGrid};
use crate::units::Units;

/// Probability mass allowed outside the box before a packet counts as clipped.
pub const CLIP_TOL: f64 = 1e-12;
/// Normalization slack accepted on transform inputs.
pub const NORM_INPUT_TOL: f64 = 1e-6;

/// Position-space state on a uniform grid at a fixed time.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    pub grid: SpatialGrid,
    pub amps: Vec<Complex64>,
    pub t: f64,
}

/// Momentum-space state on the conjugate grid (ascending p order).
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumWaveFunction {
    pub grid: MomentumGrid,
    pub amps: Vec<Complex64>,
    pub t: f64,
}

impl WaveFunction {
    /// Σ |ψ|² dx over the grid.
    pub fn norm_sq(&self) -> f64 {
        let dx = self.grid.dx();
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>() * dx
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// |ψ(x_j)|².
    pub fn density(&self, j: usize) -> f64 {
        self.amps[j].norm_sqr()
    }

    /// ⟨x⟩ by grid quadrature.
    pub fn expectation_x(&self) -> f64 {
        let dx = self.grid.dx();
        let s: f64 = self
            .amps
            .iter()
            .enumerate()
            .map(|(j, a)| self.grid.x(j) * a.norm_sqr())
            .sum();
        s * dx / self.norm_sq()
    }

    /// Probability mass in the outermost `band` points on each side.
    pub fn boundary_mass(&self, band: usize) -> f64 {
        let n = self.grid.n;
        let band = band.min(n / 2);
        let dx = self.grid.dx();
        let left: f64 = self.amps[..band].iter().map(|a| a.norm_sqr()).sum();
        let right: f64 = self.amps[n - band..].iter().map(|a| a.norm_sqr()).sum();
        (left + right) * dx
    }
}

impl MomentumWaveFunction {
    /// Σ |φ|² dp over the grid.
    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.dp
    }

    /// ⟨p⟩ by grid quadrature.
    pub fn expectation_p(&self) -> f64 {
        let s: f64 = self
            .amps
            .iter()
            .enumerate()
            .map(|(j, a)| self.grid.p(j) * a.norm_sqr())
            .sum();
        s * self.grid.dp / self.norm_sq()
    }

    /// Cubic (4-point Lagrange) interpolation of the complex amplitude at momentum p.
    ///
    /// Errors with `MomentumOutOfRange` when p lacks a full interpolation stencil.
    pub fn interpolate(&self, p: f64) -> Result<Complex64> {
        let n = self.grid.n;
        let idx = self.grid.index_of(p);
        // need j-1..j+2 in range, so the fractional index must sit in [1, n-2]
        if !(idx >= 1.0 && idx <= (n - 2) as f64) {
            return Err(ItwError::MomentumOutOfRange {
                p,
                p_lo: self.grid.p(1),
                p_hi: self.grid.p(n - 2),
            });
        }
        let j = (idx.floor() as usize).clamp(1, n - 3);
        let s = idx - j as f64; // in [0, 1] within the stencil cell
        // Lagrange weights on nodes -1, 0, 1, 2
        let w_m1 = -s * (s - 1.0) * (s - 2.0) / 6.0;
        let w_0 = (s * s - 1.0) * (s - 2.0) / 2.0;
        let w_1 = -s * (s + 1.0) * (s - 2.0) / 2.0;
        let w_2 = s * (s * s - 1.0) / 6.0;
        Ok(self.amps[j - 1] * w_m1 + self.amps[j] * w_0 + self.amps[j + 1] * w_1 + self.amps[j + 2] * w_2)
    }
}

/// ⟨a|b⟩ = Σ a* b dx (grids must match).
pub fn inner(a: &WaveFunction, b: &WaveFunction) -> Complex64 {
    debug_assert_eq!(a.grid, b.grid);
    let dx = a.grid.dx();
    a.amps
        .iter()
        .zip(&b.amps)
        .map(|(x, y)| x.conj() * y)
        .sum::<Complex64>()
        * dx
}

/// Relative L² distance ||a - b|| / ||a||.
pub fn l2_relative_diff(a: &WaveFunction, b: &WaveFunction) -> f64 {
    debug_assert_eq!(a.grid, b.grid);
    let dx = a.grid.dx();
    let num: f64 = a
        .amps
        .iter()
        .zip(&b.amps)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        * dx;
    (num / a.norm_sq()).sqrt()
}

/// Normalized Gaussian packet (πσ²)^(-1/4) exp(-(x-x0)²/2σ² + i p0 (x-x0)/ħ).
///
/// Fails with `GridTooCoarse` when σ < 4 dx and with `PacketClipped` when the
/// analytic probability mass outside the box (in x or in the conjugate p range)
/// exceeds `CLIP_TOL`. The returned amplitudes are the exact continuum samples;
/// for an admissible packet the grid norm is 1 to ~1e-15 without rescaling.
pub fn gaussian_packet(
    grid: &SpatialGrid,
    units: &Units,
    sigma: f64,
    x0: f64,
    p0: f64,
) -> Result<WaveFunction> {
    if !(sigma.is_finite() && sigma > 0.0) || !x0.is_finite() || !p0.is_finite() {
        return Err(ItwError::InvalidInput(format!(
            "gaussian packet needs finite parameters with sigma > 0, got sigma={sigma}, x0={x0}, p0={p0}"
        )));
    }
    let dx = grid.dx();
    if sigma < 4.0 * dx {
        return Err(ItwError::GridTooCoarse { sigma, dx });
    }
    // |ψ|² = (πσ²)^(-1/2) exp(-(x-x0)²/σ²); mass beyond a is erfc(a/σ)/2 per side.
    let tail_x = 0.5
        * (libm::erfc((x0 - grid.x_min) / sigma) + libm::erfc((grid.x_max - x0) / sigma));
    if !(tail_x <= CLIP_TOL) {
        return Err(ItwError::PacketClipped { tail_mass: tail_x, limit: CLIP_TOL });
    }
    // momentum side: |φ|² has width ħ/σ around p0
    let pgrid = MomentumGrid::conjugate(grid, units);
    let p_scale = units.hbar / sigma;
    let tail_p = 0.5
        * (libm::erfc((p0 - pgrid.p_min()) / p_scale)
            + libm::erfc((pgrid.p_max() - p0) / p_scale));
    if !(tail_p <= CLIP_TOL) {
        return Err(ItwError::PacketClipped { tail_mass: tail_p, limit: CLIP_TOL });
    }

    let norm = (std::f64::consts::PI * sigma * sigma).powf(-0.25);
    let amps = (0..grid.n)
        .map(|j| {
            let d = grid.x(j) - x0;
            let phase = p0 * d / units.hbar;
            Complex64::from_polar(norm * (-d * d / (2.0 * sigma * sigma)).exp(), phase)
        })
        .collect();
    Ok(WaveFunction { grid: *grid, amps, t: 0.0 })
}

fn check_normalized(norm_sq: f64) -> Result<()> {
    let dev = (norm_sq.sqrt() - 1.0).abs();
    if dev > NORM_INPUT_TOL {
        return Err(ItwError::NotNormalized { deviation: dev });
    }
    Ok(())
}

/// Forward transform φ(p) = (2πħ)^(-1/2) ∫ e^(-ipx/ħ) ψ(x) dx on the conjugate grid.
///
/// The x_min-dependent phase is applied explicitly, so the result depends only on
/// the physical samples, not on where the box sits. Input must be normalized.
pub fn to_momentum(psi: &WaveFunction, units: &Units) -> Result<MomentumWaveFunction> {
    check_normalized(psi.norm_sq())?;
    Ok(to_momentum_raw(psi, units))
}

/// Inverse transform ψ(x) = (2πħ)^(-1/2) ∫ e^(ipx/ħ) φ(p) dp onto `grid`.
///
/// `grid` must be conjugate to φ's momentum grid (same n, matching dp).
pub fn from_momentum(
    phi: &MomentumWaveFunction,
    grid: &SpatialGrid,
    units: &Units,
) -> Result<WaveFunction> {
    let conj = MomentumGrid::conjugate(grid, units);
    if conj.n != phi.grid.n || ((conj.dp - phi.grid.dp) / phi.grid.dp).abs() > 1e-12 {
        return Err(ItwError::InvalidInput(format!(
            "spatial grid is not conjugate to the momentum grid: dp {} vs {}",
            conj.dp, phi.grid.dp
        )));
    }
    check_normalized(phi.norm_sq())?;
    Ok(from_momentum_raw(phi, grid, units))
}

pub(crate) fn to_momentum_raw(psi: &WaveFunction, units: &Units) -> MomentumWaveFunction {
    let n = psi.grid.n;
    let dx = psi.grid.dx();
    let pgrid = MomentumGrid::conjugate(&psi.grid, units);

    let mut buf = psi.amps.clone();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    // bin b holds Σ_j ψ_j e^(-2πi b j / n); natural index j_nat = k + n/2, b = k mod n
    let scale = dx / (2.0 * std::f64::consts::PI * units.hbar).sqrt();
    let amps = (0..n)
        .map(|j_nat| {
            let b = (j_nat + n / 2) % n;
            let p = pgrid.p(j_nat);
            let phase = Complex64::from_polar(1.0, -p * psi.grid.x_min / units.hbar);
            buf[b] * phase * scale
        })
        .collect();
    MomentumWaveFunction { grid: pgrid, amps, t: psi.t }
}

pub(crate) fn from_momentum_raw(
    phi: &MomentumWaveFunction,
    grid: &SpatialGrid,
    units: &Units,
) -> WaveFunction {
    let n = grid.n;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for j_nat in 0..n {
        let b = (j_nat + n / 2) % n;
        let p = phi.grid.p(j_nat);
        let phase = Complex64::from_polar(1.0, p * grid.x_min / units.hbar);
        buf[b] = phi.amps[j_nat] * phase;
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let scale = phi.grid.dp / (2.0 * std::f64::consts::PI * units.hbar).sqrt();
    let amps = buf.into_iter().map(|a| a * scale).collect();
    WaveFunction { grid: *grid, amps, t: phi.t }
}
