use thiserror::Error;

pub type Result<T> = std::result::Result<T, PlacementError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlacementError {
    /// A numeric argument fell outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("LED index {index} out of range 1..={count}")]
    IndexOutOfRange { index: usize, count: usize },

    /// Spacings that push the grid through a wall.
    #[error("infeasible geometry: {0}")]
    Geometry(String),

    #[error("invalid configuration field `{field}`: {reason}")]
    Config { field: String, reason: String },

    /// Receiver outside the field of view of every LED.
    #[error("receiver {receiver} at ({x:.3}, {y:.3}) is outside every LED's field of view")]
    UncoveredReceiver { receiver: usize, x: f64, y: f64 },

    #[error("link from LED {led} to receiver {receiver} has zero gain")]
    UnservableLink { led: usize, receiver: usize },

    /// Empty feasible set for the uniformity constraint.
    #[error("uniformity threshold {threshold} unattainable; tightest achievable CV(RMSE) is {tightest_cv:.6}")]
    UniformityInfeasible { threshold: f64, tightest_cv: f64 },

    #[error("power fixed point did not converge: {0}")]
    PowerDivergence(String),

    #[error("no feasible candidate: {0}")]
    NoFeasibleCandidate(String),

    #[error("io error: {0}")]
    Io(String),
}

impl PlacementError {
    /// True for errors caused by an unattainable problem instance rather
    /// than by bad input.
    pub fn is_infeasibility(&self) -> bool {
        matches!(
            self,
            PlacementError::UncoveredReceiver { .. }
                | PlacementError::UnservableLink { .. }
                | PlacementError::UniformityInfeasible { .. }
                | PlacementError::PowerDivergence(_)
                | PlacementError::NoFeasibleCandidate(_)
                | PlacementError::Geometry(_)
        )
    }

    pub(crate) fn config(field: &str, reason: impl Into<String>) -> Self {
        PlacementError::Config {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for PlacementError {
    fn from(e: std::io::Error) -> Self {
        PlacementError::Io(e.to_string())
    }
}
