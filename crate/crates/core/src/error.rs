use thiserror::Error;

/// Unified error type for every fallible operation in the workbench.
///
/// Numerical failures (caustics, escaped probability, failed root searches)
/// are distinct variants so callers can map them to exit codes or retry with
/// different discretization; input validation failures carry a reason string.
#[derive(Debug, Error)]
pub enum ItwError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("grid too coarse: sigma = {sigma} requires dx <= sigma/4, got dx = {dx}")]
    GridTooCoarse { sigma: f64, dx: f64 },

    #[error("packet clipped by grid: tail mass outside box = {tail_mass:.3e} (limit {limit:.1e})")]
    PacketClipped { tail_mass: f64, limit: f64 },

    #[error("state not normalized: |norm - 1| = {deviation:.3e}")]
    NotNormalized { deviation: f64 },

    #[error("alias risk: kinetic phase per step = {phase:.3} rad exceeds {limit:.3} (reduce dt below {dt_max:.3e})")]
    AliasRisk { phase: f64, limit: f64, dt_max: f64 },

    #[error("box escape: boundary probability mass = {boundary_mass:.3e} exceeds {limit:.1e}")]
    BoxEscape { boundary_mass: f64, limit: f64 },

    #[error("unsupported potential for closed-form propagation: {0}")]
    UnsupportedPotential(String),

    #[error("step too large: relative energy drift = {drift:.3e} exceeds {limit:.1e}")]
    StepTooLarge { drift: f64, limit: f64 },

    #[error("no convergence after {iterations} iterations: residual = {residual:.3e}")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("near caustic: |dx_f/dp_i| = {m12:.3e} below threshold {threshold:.3e}")]
    NearCaustic { m12: f64, threshold: f64 },

    #[error("caustic singularity: trajectory density diverges (|dx_f/dp_i| = {m12:.3e})")]
    CausticSingular { m12: f64 },

    #[error("multiple classical roots: {count} distinct trajectories reach the requested point")]
    MultipleRoots { count: usize },

    #[error("momentum out of range: p = {p:.6} outside interpolable grid [{p_lo:.6}, {p_hi:.6}]")]
    MomentumOutOfRange { p: f64, p_lo: f64, p_hi: f64 },

    #[error("division near zero: reference density = {value:.3e} below {limit:.1e}")]
    DivisionNearZero { value: f64, limit: f64 },

    #[error("scenario '{scenario}' check '{check}' failed at t = {t}: {source}")]
    ScenarioCheckFailed {
        scenario: String,
        check: String,
        t: f64,
        #[source]
        source: Box<ItwError>,
    },
}

pub type Result<T> = std::result::Result<T, ItwError>;

impl ItwError {
    /// True for failures of the numerics (as opposed to bad input or configuration).
    pub fn is_numerical(&self) -> bool {
        match self {
            ItwError::InvalidInput(_)
            | ItwError::GridTooCoarse { .. }
            | ItwError::PacketClipped { .. }
            | ItwError::NotNormalized { .. }
            | ItwError::UnsupportedPotential(_)
            | ItwError::AliasRisk { .. } => false,
            ItwError::ScenarioCheckFailed { source, .. } => source.is_numerical(),
            _ => true,
        }
    }
}
