use thiserror::Error;

pub type Result<T> = std::result::Result<T, DglError>;

/// Every failure the library reports.
///
/// Variants split into two families: validation errors (bad input, violated
/// preconditions) and numerical failures (a solver did not deliver).
/// [`DglError::is_validation`] tells them apart; the CLI maps them to
/// different exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DglError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("PotentialPair decay certificate violated: {0}")]
    DecayCertificate(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("state error: {0}")]
    State(String),

    #[error("eigensolver failure: {0}")]
    Eigen(String),
    #[error("eigenfunction does not decay (boundary amplitude {amplitude:.3e}); enlarge the domain")]
    Truncation { amplitude: f64 },
    #[error("ODE integration failed at k = {k}: {msg}")]
    Integrator { k: f64, msg: String },
    #[error("edge resonance: |gamma+| = {gamma:.3e} is below the threshold {threshold:.3e}")]
    Resonance { gamma: f64, threshold: f64 },
    #[error("Newton iteration failed at a = {a}: residual {residual:.3e} after {iterations} iterations")]
    Newton { a: f64, iterations: usize, residual: f64 },
    #[error("branch goes the wrong way: omega - omega0 = {shift:.3e} but <u0, N(u0)> = {projection:.3e}")]
    BranchDirection { shift: f64, projection: f64 },
    #[error("modulation breakdown at t = {t}: determinant {det:.3e} below {bound:.3e}")]
    ModulationBreakdown { t: f64, det: f64, bound: f64 },
    #[error("blow-up at t = {t}: sup norm {sup:.3e}")]
    BlowUp { t: f64, sup: f64 },
    #[error("projection residual {residual:.3e} exceeds {bound:.3e} at t = {t}")]
    Projection { t: f64, residual: f64, bound: f64 },
}

impl DglError {
    /// True for errors caused by the caller's input rather than by a solver.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            DglError::Grid(_)
                | DglError::Dimension(_)
                | DglError::NonFinite(_)
                | DglError::DecayCertificate(_)
                | DglError::InvalidArgument(_)
                | DglError::State(_)
        )
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            DglError::Grid(_) => "grid",
            DglError::Dimension(_) => "dimension",
            DglError::NonFinite(_) => "non_finite",
            DglError::DecayCertificate(_) => "decay_certificate",
            DglError::InvalidArgument(_) => "invalid_argument",
            DglError::State(_) => "state",
            DglError::Eigen(_) => "eigensolver",
            DglError::Truncation { .. } => "truncation",
            DglError::Integrator { .. } => "integrator",
            DglError::Resonance { .. } => "resonance",
            DglError::Newton { .. } => "newton",
            DglError::BranchDirection { .. } => "branch_direction",
            DglError::ModulationBreakdown { .. } => "modulation_breakdown",
            DglError::BlowUp { .. } => "blow_up",
            DglError::Projection { .. } => "projection",
        }
    }
}
