use thiserror::Error;

/// Errors raised by geometry, metric and chain operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point is off the sphere by {deviation:e} (tolerance {tolerance:e})")]
    OffSphere { deviation: f64, tolerance: f64 },

    #[error("shortcut scale {0} is outside (0, 1]")]
    InvalidScale(f64),

    #[error(
        "sphere (center norm {center_norm}, radius {radius}) does not fit inside the unit ball"
    )]
    NotAdmissible { center_norm: f64, radius: f64 },

    #[error("not in family: {0}")]
    NotInFamily(String),

    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("no chain joins the query points in this family")]
    NoChain,

    #[error("invalid boundary function: {0}")]
    InvalidFunction(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("strict gap at x = {x:?} has no verifiable witness")]
    UnverifiedGap { x: [f64; 3] },
}

pub type Result<T> = std::result::Result<T, Error>;
