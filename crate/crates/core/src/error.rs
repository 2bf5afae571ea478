use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter `{name}` = {value} is outside its domain ({domain})")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),

    #[error("herald probability is zero for m = {m}; the conditional state is undefined")]
    DegenerateHerald { m: u32 },

    #[error("series did not converge within {terms} terms")]
    SeriesNotConverged { terms: usize },

    #[error("truncation at {cutoff} leaves {deficit:e} of probability unaccounted for")]
    TruncationInsufficient { cutoff: usize, deficit: f64 },

    #[error("only {samples} samples per run, below the floor of {floor}")]
    InsufficientSamples { samples: u64, floor: u64 },

    #[error("threshold curve for m = {curve} cannot certify statistics for m = {stats}")]
    OrderMismatch { curve: u32, stats: u32 },

    #[error("invalid threshold curve: {0}")]
    InvalidCurve(&'static str),

    #[error("click outcome m = {m} impossible for a cascade of n = {n} diodes")]
    ClickOutOfRange { m: u32, n: u32 },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
