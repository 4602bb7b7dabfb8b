use serde::{Deserialize, Serialize};

use crate::error::{ItwError, Result};
use crate::potential::PotentialSpec;
use crate::units::Units;

/// |∂x_f/∂p_i| below CAUSTIC_EPS·(t_f-t_i)/m marks a near-caustic trajectory.
pub const CAUSTIC_EPS: f64 = 1e-3;
/// Relative energy drift allowed over a whole integration.
pub const ENERGY_DRIFT_LIMIT: f64 = 1e-8;
/// Shooting accepts |x_f(p) - target| <= SHOOT_XTOL_REL * max(1, |target|).
pub const SHOOT_XTOL_REL: f64 = 1e-10;
/// Newton iteration cap for shooting searches.
pub const MAX_NEWTON_ITER: usize = 50;
/// Momentum roots closer than this are treated as the same trajectory.
pub const ROOT_MERGE_TOL: f64 = 1e-6;

/// Point of classical phase space at a time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpacePoint {
    pub x: f64,
    pub p: f64,
    pub t: f64,
}

/// Tangent map of the flow: (δx_f, δp_f) = M (δx_i, δp_i).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monodromy {
    /// ∂x_f/∂x_i
    pub m11: f64,
    /// ∂x_f/∂p_i
    pub m12: f64,
    /// ∂p_f/∂x_i
    pub m21: f64,
    /// ∂p_f/∂p_i
    pub m22: f64,
}

impl Monodromy {
    pub fn identity() -> Self {
        Monodromy { m11: 1.0, m12: 0.0, m21: 0.0, m22: 1.0 }
    }

    pub fn det(&self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }
}

/// One integrated trajectory with action and stability information.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryResult {
    pub start: PhaseSpacePoint,
    pub end: PhaseSpacePoint,
    /// S_c = ∫ (p²/2m - V) dt along the discrete path
    pub action: f64,
    pub monodromy: Monodromy,
    pub near_caustic: bool,
    /// relative energy drift over the run (diagnostic; already bounded by the integrator)
    pub energy_drift: f64,
}

/// Converged two-point boundary solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingResult {
    pub p_i: f64,
    pub trajectory: TrajectoryResult,
    pub iterations: usize,
    pub residual: f64,
}

/// Legendre-transformed (mixed position-momentum) action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedAction {
    /// S̃ = S_c + p (x_launch - x_ref)
    pub s_tilde: f64,
    /// launch point found by shooting on x at fixed initial momentum
    pub launch_x: f64,
    pub trajectory: TrajectoryResult,
}

/// Independently evaluated factors of the Van Vleck determinant identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeterminantIdentity {
    /// |∂x_f/∂x_i|^(-1/2) · |∂²S̃/∂p²|^(-1/2) (monodromy × finite differences)
    pub lhs: f64,
    /// |∂²S_c/∂x_f ∂x_i|^(1/2) from the monodromy alone
    pub rhs: f64,
    pub deviation: f64,
    pub p_i: f64,
}

fn caustic_threshold(t_i: f64, t_f: f64, units: &Units) -> f64 {
    CAUSTIC_EPS * (t_f - t_i) / units.mass
}

/// Step size giving integrator error well under the workbench tolerances.
///
/// Quadratic potentials are exact in both kinematics and (Simpson) action, so a
/// handful of steps suffice; curved potentials are stepped so the symplectic
/// energy oscillation (ω dt)²/8 stays near 1e-9. `x_scale` bounds the region
/// sampled for the curvature estimate.
pub fn suggested_dt(v: &PotentialSpec, units: &Units, x_scale: f64, duration: f64) -> f64 {
    let coarse = duration / 16.0;
    match v {
        PotentialSpec::Free | PotentialSpec::Linear { .. } => coarse,
        _ => {
            let mut d2_max = 0.0_f64;
            let samples = 64;
            for i in 0..=samples {
                let x = -x_scale + 2.0 * x_scale * i as f64 / samples as f64;
                d2_max = d2_max.max(v.eval(x, units).d2v.abs());
            }
            let omega = (d2_max / units.mass).sqrt().max(1e-12);
            (1e-4 / omega).min(coarse).min(duration / 64.0)
        }
    }
}

/// Integrate Hamilton's equations from (x_i, p_i, t_i) to t_f with velocity-Verlet
/// steps of at most `dt`, carrying the action and the tangent map along.
///
/// The per-step tangent update has unit determinant in exact arithmetic, so
/// det M = 1 holds to rounding. The action uses a Simpson rule on the in-step
/// Taylor interpolant, which is exact for quadratic potentials. Fails with
/// `StepTooLarge` when the relative energy drift exceeds `ENERGY_DRIFT_LIMIT`.
pub fn integrate(
    x_i: f64,
    p_i: f64,
    t_i: f64,
    t_f: f64,
    v: &PotentialSpec,
    dt: f64,
    units: &Units,
) -> Result<TrajectoryResult> {
    v.validate()?;
    if !(t_f > t_i) {
        return Err(ItwError::InvalidInput(format!(
            "need t_f > t_i, got t_i={t_i}, t_f={t_f}"
        )));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(ItwError::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    let span = t_f - t_i;
    let n = (span / dt).ceil().max(1.0) as usize;
    let h = span / n as f64;
    let m = units.mass;

    let mut x = x_i;
    let mut p = p_i;
    let mut mono = Monodromy::identity();
    let mut action = 0.0;

    let pv0 = v.eval(x, units);
    let e0 = p * p / (2.0 * m) + pv0.v;
    // energy magnitude along the whole path; a rest start contributes nothing
    let mut e_scale = (p * p / (2.0 * m) + pv0.v.abs()).max(e0.abs());
    let mut f0 = -pv0.dv;
    let mut d2v0 = pv0.d2v;
    let mut v0 = pv0.v;

    for _ in 0..n {
        let x_new = x + p * h / m + f0 * h * h / (2.0 * m);
        let pv1 = v.eval(x_new, units);
        let f1 = -pv1.dv;
        let p_new = p + 0.5 * (f0 + f1) * h;

        // Simpson on the in-step Taylor interpolant (exact through quadratic V)
        let x_mid = x + p * h / (2.0 * m) + f0 * h * h / (8.0 * m);
        let p_mid = p + 0.5 * f0 * h;
        let v_mid = v.eval(x_mid, units).v;
        let l0 = p * p / (2.0 * m) - v0;
        let lm = p_mid * p_mid / (2.0 * m) - v_mid;
        let l1 = p_new * p_new / (2.0 * m) - pv1.v;
        action += h * (l0 + 4.0 * lm + l1) / 6.0;

        // tangent map of this step; unit determinant by construction
        let a = d2v0;
        let b = pv1.d2v;
        let j11 = 1.0 - a * h * h / (2.0 * m);
        let j12 = h / m;
        let j21 = -0.5 * h * (a + b * j11);
        let j22 = 1.0 - b * h * h / (2.0 * m);
        mono = Monodromy {
            m11: j11 * mono.m11 + j12 * mono.m21,
            m12: j11 * mono.m12 + j12 * mono.m22,
            m21: j21 * mono.m11 + j22 * mono.m21,
            m22: j21 * mono.m12 + j22 * mono.m22,
        };

        x = x_new;
        p = p_new;
        f0 = f1;
        d2v0 = pv1.d2v;
        v0 = pv1.v;
        e_scale = e_scale.max(p * p / (2.0 * m) + v0.abs());
    }

    let e1 = p * p / (2.0 * m) + v0;
    let drift = (e1 - e0).abs() / e_scale.max(f64::MIN_POSITIVE);
    if drift > ENERGY_DRIFT_LIMIT {
        return Err(ItwError::StepTooLarge { drift, limit: ENERGY_DRIFT_LIMIT });
    }

    Ok(TrajectoryResult {
        start: PhaseSpacePoint { x: x_i, p: p_i, t: t_i },
        end: PhaseSpacePoint { x, p, t: t_f },
        action,
        monodromy: mono,
        near_caustic: mono.m12.abs() < caustic_threshold(t_i, t_f, units),
        energy_drift: drift,
    })
}

/// Newton shooting on the initial momentum: find p_i so the trajectory from
/// (x_i, t_i) reaches x_f at t_f. The Newton derivative is ∂x_f/∂p_i = M12.
///
/// Iterates past the acceptance tolerance while the residual keeps improving, so
/// converged results are machine-tight; fails with `NearCaustic` when the
/// derivative degenerates and `NoConvergence` when the residual stays above
/// tolerance after `MAX_NEWTON_ITER` rounds.
pub fn shoot(
    x_i: f64,
    t_i: f64,
    x_f: f64,
    t_f: f64,
    p_guess: f64,
    v: &PotentialSpec,
    dt: f64,
    units: &Units,
) -> Result<ShootingResult> {
    let tol = SHOOT_XTOL_REL * x_f.abs().max(1.0);
    let caustic_thresh = caustic_threshold(t_i, t_f, units);

    let mut p = p_guess;
    let mut best: Option<(f64, f64, TrajectoryResult)> = None;
    let mut prev_resid = f64::INFINITY;
    let mut iterations = 0;

    for iter in 1..=MAX_NEWTON_ITER {
        iterations = iter;
        let traj = integrate(x_i, p, t_i, t_f, v, dt, units)?;
        let resid = traj.end.x - x_f;
        if best.map_or(true, |(r, _, _)| resid.abs() < r) {
            best = Some((resid.abs(), p, traj));
        }
        // stalled at rounding level: quadratic convergence exhausted
        if resid.abs() <= tol && resid.abs() >= 0.25 * prev_resid {
            break;
        }
        prev_resid = resid.abs();
        let m12 = traj.monodromy.m12;
        if m12.abs() < caustic_thresh {
            return Err(ItwError::NearCaustic { m12, threshold: caustic_thresh });
        }
        p -= resid / m12;
    }

    let (residual, p_i, trajectory) = best.expect("at least one iteration ran");
    if residual <= tol {
        Ok(ShootingResult { p_i, trajectory, iterations, residual })
    } else {
        Err(ItwError::NoConvergence { iterations, residual })
    }
}

/// Scan `n_starts` initial momenta across `p_range`, shoot from each, and merge
/// converged roots that agree within `ROOT_MERGE_TOL`. Failed starts are dropped.
/// Returns roots sorted by p_i; empty when no start converges.
pub fn multi_start_scan(
    x_i: f64,
    t_i: f64,
    x_f: f64,
    t_f: f64,
    p_range: (f64, f64),
    n_starts: usize,
    v: &PotentialSpec,
    dt: f64,
    units: &Units,
) -> Result<Vec<ShootingResult>> {
    if n_starts < 8 {
        return Err(ItwError::InvalidInput(format!(
            "multi-start scan needs at least 8 starts, got {n_starts}"
        )));
    }
    let (lo, hi) = p_range;
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(ItwError::InvalidInput(format!("bad momentum range [{lo}, {hi}]")));
    }
    let mut roots: Vec<ShootingResult> = Vec::new();
    for i in 0..n_starts {
        let guess = lo + (hi - lo) * i as f64 / (n_starts - 1) as f64;
        let Ok(hit) = shoot(x_i, t_i, x_f, t_f, guess, v, dt, units) else {
            continue;
        };
        // keep roots inside the scanned window (a start may converge far outside)
        if hit.p_i < lo - ROOT_MERGE_TOL || hit.p_i > hi + ROOT_MERGE_TOL {
            continue;
        }
        match roots.iter_mut().find(|r| (r.p_i - hit.p_i).abs() <= ROOT_MERGE_TOL) {
            Some(existing) => {
                if hit.residual < existing.residual {
                    *existing = hit;
                }
            }
            None => roots.push(hit),
        }
    }
    roots.sort_by(|a, b| a.p_i.total_cmp(&b.p_i));
    Ok(roots)
}

/// Semiclassical amplitude |∂²S_c/∂x_f∂x_i|^(1/2) = |∂x_f/∂p_i|^(-1/2).
///
/// Fails with `CausticSingular` when the trajectory is flagged near-caustic.
pub fn van_vleck_amp(traj: &TrajectoryResult) -> Result<f64> {
    if traj.near_caustic {
        return Err(ItwError::CausticSingular { m12: traj.monodromy.m12 });
    }
    Ok(traj.monodromy.m12.abs().powf(-0.5))
}

/// Mixed position-momentum action S̃(x_f, t_f; p, t_i) = S_c + p (x - x_ref),
/// where x is the launch point with initial momentum exactly p whose trajectory
/// reaches x_f at t_f (found by Newton on x with derivative ∂x_f/∂x_i = M11).
///
/// The action is corrected to first order for the shooting residual
/// (∂S_c/∂x_f = p_f), so finite differences of S̃ are clean to rounding.
/// ∂S̃/∂p = x - x_ref and ∂²S̃/∂p² = ∂x/∂p|_{x_f} hold for the returned values.
pub fn mixed_action(
    x_f: f64,
    t_f: f64,
    p: f64,
    t_i: f64,
    x_ref: f64,
    v: &PotentialSpec,
    dt: f64,
    units: &Units,
) -> Result<MixedAction> {
    let tol = SHOOT_XTOL_REL * x_f.abs().max(1.0);
    let mut x = x_f - p * (t_f - t_i) / units.mass; // free-motion inverse as first guess
    let mut best: Option<(f64, f64, TrajectoryResult)> = None;
    let mut prev_resid = f64::INFINITY;
    let mut iterations = 0;

    for iter in 1..=MAX_NEWTON_ITER {
        iterations = iter;
        let traj = integrate(x, p, t_i, t_f, v, dt, units)?;
        let resid = traj.end.x - x_f;
        if best.map_or(true, |(r, _, _)| resid.abs() < r) {
            best = Some((resid.abs(), x, traj));
        }
        if resid.abs() <= tol && resid.abs() >= 0.25 * prev_resid {
            break;
        }
        prev_resid = resid.abs();
        let m11 = traj.monodromy.m11;
        if m11.abs() < 1e-12 {
            break; // degenerate launch map; report best residual below
        }
        x -= resid / m11;
    }

    let (residual, launch_x, trajectory) = best.expect("at least one iteration ran");
    if residual > tol {
        return Err(ItwError::NoConvergence { iterations, residual });
    }
    let s_endpoint_corrected =
        trajectory.action + trajectory.end.p * (x_f - trajectory.end.x);
    Ok(MixedAction {
        s_tilde: s_endpoint_corrected + p * (launch_x - x_ref),
        launch_x,
        trajectory,
    })
}

/// Evaluate both sides of the Van Vleck determinant identity independently:
/// lhs = |∂x_f/∂x_i|^(-1/2) |∂²S̃/∂p²|^(-1/2) with the second factor from central
/// finite differences of `mixed_action`, rhs = |∂²S_c/∂x_f∂x_i|^(1/2) from the
/// monodromy. The trajectory is found by shooting from (x_i, t_i) to (x_f, t_f).
///
/// Fails with `CausticSingular` near either the position-space caustic (M12 → 0)
/// or the mixed-representation caustic (M11 → 0), where the Legendre transform
/// degenerates.
pub fn check_determinant_identity(
    x_f: f64,
    t_f: f64,
    x_i: f64,
    t_i: f64,
    v: &PotentialSpec,
    dt: f64,
    units: &Units,
) -> Result<DeterminantIdentity> {
    let p_guess = units.mass * (x_f - x_i) / (t_f - t_i);
    let root = match shoot(x_i, t_i, x_f, t_f, p_guess, v, dt, units) {
        Ok(root) => root,
        // the identity itself is singular where the shooting derivative vanishes
        Err(ItwError::NearCaustic { m12, .. }) => {
            return Err(ItwError::CausticSingular { m12 })
        }
        Err(e) => return Err(e),
    };
    let mono = root.trajectory.monodromy;
    if root.trajectory.near_caustic {
        return Err(ItwError::CausticSingular { m12: mono.m12 });
    }
    if mono.m11.abs() < CAUSTIC_EPS {
        return Err(ItwError::CausticSingular { m12: mono.m11 });
    }

    let h = 1e-3 * root.p_i.abs().max(1.0);
    let sm = mixed_action(x_f, t_f, root.p_i - h, t_i, x_i, v, dt, units)?;
    let s0 = mixed_action(x_f, t_f, root.p_i, t_i, x_i, v, dt, units)?;
    let sp = mixed_action(x_f, t_f, root.p_i + h, t_i, x_i, v, dt, units)?;
    let d2s = (sp.s_tilde - 2.0 * s0.s_tilde + sm.s_tilde) / (h * h);

    let lhs = mono.m11.abs().powf(-0.5) * d2s.abs().powf(-0.5);
    let rhs = mono.m12.abs().recip().sqrt();
    Ok(DeterminantIdentity {
        lhs,
        rhs,
        deviation: (lhs - rhs).abs() / rhs,
        p_i: root.p_i,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const U: Units = Units { hbar: 1.0, mass: 1.0 };

    #[test]
    fn free_trajectory_closed_form() {
        // start (0, 2) evolved for t = 5: x_f = 10, S = 10, M12 = 5
        let traj = integrate(0.0, 2.0, 0.0, 5.0, &PotentialSpec::Free, 0.5, &U).unwrap();
        assert_abs_diff_eq!(traj.end.x, 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(traj.end.p, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(traj.action, 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(traj.monodromy.m12, 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(traj.monodromy.det(), 1.0, epsilon = 1e-14);
        assert!(!traj.near_caustic);
    }

    #[test]
    fn linear_field_kinematics_exact() {
        // V = -Fx with F = 1: from rest, x(t) = t²/2, p(t) = t
        let v = PotentialSpec::Linear { force: 1.0 };
        let traj = integrate(0.0, 0.0, 0.0, 2.0, &v, 0.1, &U).unwrap();
        assert_abs_diff_eq!(traj.end.x, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(traj.end.p, 2.0, epsilon = 1e-12);
        // S = ∫(p²/2m + Fx)dt = ∫ t² dt = 8/3 (Simpson is exact here)
        assert_abs_diff_eq!(traj.action, 8.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(traj.monodromy.m12, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn harmonic_monodromy_matches_rotation() {
        let omega = 1.3_f64;
        let v = PotentialSpec::Harmonic { omega };
        let t = 1.7_f64;
        let traj = integrate(0.7, -0.4, 0.0, t, &v, 2e-5, &U).unwrap();
        let (s, c) = (omega * t).sin_cos();
        assert_abs_diff_eq!(traj.monodromy.m11, c, epsilon = 1e-8);
        assert_abs_diff_eq!(traj.monodromy.m12, s / omega, epsilon = 1e-8);
        assert_abs_diff_eq!(traj.monodromy.m21, -omega * s, epsilon = 1e-8);
        assert_abs_diff_eq!(traj.monodromy.m22, c, epsilon = 1e-8);
        assert_abs_diff_eq!(traj.monodromy.det(), 1.0, epsilon = 1e-11);
    }

    #[test]
    fn harmonic_caustic_flagged_at_half_period() {
        let v = PotentialSpec::Harmonic { omega: 1.0 };
        let t = std::f64::consts::PI;
        let traj = integrate(1.0, 0.0, 0.0, t, &v, 5e-5, &U).unwrap();
        assert!(traj.near_caustic);
        assert!(matches!(van_vleck_amp(&traj), Err(ItwError::CausticSingular { .. })));
    }

    #[test]
    fn step_too_large_detected() {
        let v = PotentialSpec::Harmonic { omega: 1.0 };
        assert!(matches!(
            integrate(1.0, 0.0, 0.0, 10.0, &v, 0.05, &U),
            Err(ItwError::StepTooLarge { .. })
        ));
    }

    #[test]
    fn shoot_free_is_one_newton_step() {
        let hit = shoot(1.0, 0.0, 7.0, 3.0, 0.0, &PotentialSpec::Free, 0.5, &U).unwrap();
        assert_abs_diff_eq!(hit.p_i, 2.0, epsilon = 1e-12);
        assert!(hit.residual <= SHOOT_XTOL_REL * 7.0);
    }

    #[test]
    fn shoot_linear_closed_form() {
        // p_i = m x_f / t - F t / 2 for launch from the origin
        let v = PotentialSpec::Linear { force: 0.8 };
        let (x_f, t) = (3.0, 2.0);
        let hit = shoot(0.0, 0.0, x_f, t, 0.3, &v, 0.05, &U).unwrap();
        assert_abs_diff_eq!(hit.p_i, x_f / t - 0.8 * t / 2.0, epsilon = 1e-11);
    }

    #[test]
    fn shoot_near_caustic_errors() {
        let v = PotentialSpec::Harmonic { omega: 1.0 };
        let err = shoot(0.0, 0.0, 1.0, std::f64::consts::PI, 1.0, &v, 5e-5, &U).unwrap_err();
        assert!(
            matches!(err, ItwError::NearCaustic { .. }) || matches!(err, ItwError::NoConvergence { .. }),
            "got {err:?}"
        );
        let msg = format!("{}", ItwError::NearCaustic { m12: 0.0, threshold: 1.0 });
        assert!(msg.contains("caustic"));
    }

    #[test]
    fn round_trip_recovers_momentum() {
        for (v, dt) in [
            (PotentialSpec::Free, 0.3),
            (PotentialSpec::Linear { force: 0.5 }, 0.05),
            (PotentialSpec::Harmonic { omega: 1.0 }, 5e-5),
        ] {
            let p_true = 1.27;
            let fwd = integrate(0.3, p_true, 0.0, 2.0, &v, dt, &U).unwrap();
            let hit = shoot(0.3, 0.0, fwd.end.x, 2.0, 0.5, &v, dt, &U).unwrap();
            assert_abs_diff_eq!(hit.p_i, p_true, epsilon = 1e-9);
        }
    }

    #[test]
    fn van_vleck_free_amplitude() {
        let traj = integrate(0.0, 1.0, 0.0, 4.0, &PotentialSpec::Free, 0.5, &U).unwrap();
        assert_abs_diff_eq!(van_vleck_amp(&traj).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn mixed_action_free_closed_form() {
        // S̃ = p x_f - p² Δt / 2m with x_ref = 0
        let (x_f, t, p) = (5.0, 2.0, 1.2);
        let ma = mixed_action(x_f, t, p, 0.0, 0.0, &PotentialSpec::Free, 0.25, &U).unwrap();
        assert_abs_diff_eq!(ma.s_tilde, p * x_f - p * p * t / 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(ma.launch_x, x_f - p * t, epsilon = 1e-10);
    }

    #[test]
    fn mixed_action_reduces_to_action_when_launch_is_reference() {
        // choose p so the launch point coincides with x_ref = 0
        let (x_f, t) = (4.0, 2.0);
        let p = x_f / t;
        let ma = mixed_action(x_f, t, p, 0.0, 0.0, &PotentialSpec::Free, 0.25, &U).unwrap();
        assert_abs_diff_eq!(ma.s_tilde, ma.trajectory.action, epsilon = 1e-10);
    }

    #[test]
    fn determinant_identity_free_exact() {
        let id = check_determinant_identity(6.0, 3.0, 0.0, 0.0, &PotentialSpec::Free, 0.25, &U).unwrap();
        // both sides equal (m/t)^(1/2)
        assert_abs_diff_eq!(id.rhs, (1.0_f64 / 3.0).sqrt(), epsilon = 1e-12);
        assert!(id.deviation < 1e-8, "deviation {}", id.deviation);
    }

    #[test]
    fn multi_start_finds_single_free_root() {
        let roots = multi_start_scan(
            0.0, 0.0, 5.0, 2.5, (-4.0, 4.0), 16, &PotentialSpec::Free, 0.25, &U,
        )
        .unwrap();
        assert_eq!(roots.len(), 1);
        assert_abs_diff_eq!(roots[0].p_i, 2.0, epsilon = 1e-10);
    }
}
