use thiserror::Error;

/// Which coordinate of a state fell outside the model domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coordinate {
    Rho,
    W,
}

impl std::fmt::Display for Coordinate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Coordinate::Rho => f.write_str("rho"),
            Coordinate::W => f.write_str("w"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{coordinate} = {value} lies outside the model domain [{lo}, {hi}]")]
    Domain {
        coordinate: Coordinate,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("degenerate eigenvector at rho = {rho}, m = {m}")]
    DegenerateEigenvector { rho: f64, m: f64 },

    #[error("degenerate point: gradient of {which} vanishes at rho = {rho}, m = {m}")]
    DegenerateGradient { which: &'static str, rho: f64, m: f64 },

    #[error("invariant region is empty: Phi(C2) - C1 = {cap} is below inf P = {inf_p}")]
    EmptyRegion { cap: f64, inf_p: f64 },

    #[error("solution blew up at t = {t}, cell {cell} (x = {x}): {reason}")]
    Blowup {
        t: f64,
        cell: usize,
        x: f64,
        reason: String,
    },

    #[error(
        "invariant region violated at t = {t}, x = {x}: G1 = {g1}, G2 = {g2} (tolerance {tolerance})"
    )]
    RegionViolation {
        t: f64,
        x: f64,
        g1: f64,
        g2: f64,
        tolerance: f64,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("not enough snapshots: need at least {needed}, got {got}")]
    TooFewSnapshots { needed: usize, got: usize },

    #[error("empty window: {0}")]
    EmptyWindow(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
