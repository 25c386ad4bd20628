use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid {n1}x{n2}: each size must be even and at least 8")]
    InvalidGrid { n1: usize, n2: usize },

    #[error("field has {got} values but the grid holds {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite value at flat index {index}")]
    NonFinite { index: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("gauge error: {field} has mean {mean:e}; elliptic inversion needs a zero-mean field")]
    Gauge { field: &'static str, mean: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("blow-up: non-finite values after the step from t = {t}")]
    BlowUp { t: f64 },

    #[error("front lost: no level crossing in the column at x1 = {x1}")]
    FrontLost { x1: f64 },

    #[error("front collapse at t = {t}: f+ <= f- at x1 = {x1}")]
    FrontCollapse { t: f64, x1: f64 },

    #[error("front breakdown at t = {t}: {reason}")]
    FrontBreakdown { t: f64, reason: String },

    #[error("particle {id} left the finite range")]
    ParticleNonFinite { id: usize },

    #[error("time stamps must be strictly increasing (index {index})")]
    NonMonotoneTime { index: usize },

    #[error("front windows differ between consecutive pairs")]
    WindowMismatch,

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
}
