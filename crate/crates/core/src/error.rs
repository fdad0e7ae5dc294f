use thiserror::Error;

/// Everything that can go wrong while building, deriving or solving a game.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("invalid mixed profile: {0}")]
    InvalidMixedProfile(String),

    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),

    #[error("too many players: {0} (at most {max})", max = crate::game::MAX_PLAYERS)]
    TooManyPlayers(usize),

    #[error("invalid coalition: {0}")]
    InvalidCoalition(String),

    #[error("invalid synergy at coalition {coalition}: {value}")]
    InvalidSynergy { coalition: String, value: f64 },

    #[error("incomplete characteristic table: {0}")]
    IncompleteTable(String),

    #[error("infeasible allocation at profile {profile}: base payoffs sum to {base_total} > v(N) = {grand}")]
    InfeasibleAllocation {
        profile: String,
        base_total: f64,
        grand: f64,
    },

    #[error("payoff oracle returned a non-finite value at {0}")]
    Oracle(String),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("boundary case: {0}")]
    BoundaryCase(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
