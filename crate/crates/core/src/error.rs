use thiserror::Error;

/// Errors raised by game construction, enumeration and equilibrium checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("invalid mixed profile: {0}")]
    InvalidMixedProfile(String),

    #[error("enumeration budget exceeded: {what} requires {required} evaluations, budget is {budget}")]
    BudgetExceeded {
        what: &'static str,
        required: u128,
        budget: u64,
    },

    #[error("profile is not a Nash equilibrium: player {player} gains by switching from strategy {from} to {to}")]
    NotNash {
        player: usize,
        from: usize,
        to: usize,
    },

    #[error("profile is not coherent: player {player} playing {strategy} is beaten by deviation {deviation} against every opponent profile")]
    Incoherent {
        player: usize,
        strategy: usize,
        deviation: usize,
    },

    #[error("logit response did not converge after {iterations} iterations (residual {residual:e})")]
    QreNotConverged { iterations: usize, residual: f64 },

    #[error("structure: {0}")]
    Structure(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
