use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("site {site} out of range 1..={n}")]
    SiteOutOfRange { site: usize, n: usize },

    #[error("sites not pairwise distinct")]
    RepeatedSites,

    #[error("empty factor list")]
    EmptyFactors,

    #[error("factors act on different gl_N ({0} vs {1})")]
    LieRankMismatch(usize, usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("truncation window too small: need exponents down to {required_lo} and valid up to {required_hi}, window is [{lo}, {hi}]")]
    Truncation {
        lo: i32,
        hi: i32,
        required_lo: i32,
        required_hi: i32,
    },

    #[error("truncation re-run at a wider window changed retained coefficient {label}")]
    TruncationUnstable { label: String },

    #[error("eigenvalue iteration did not converge after {iterations} sweeps")]
    NonConvergence { iterations: usize },

    #[error("eigenbasis ill-conditioned (condition estimate {condition:e})")]
    IllConditioned { condition: f64 },

    #[error("eigenpair residual {residual:e} exceeds bound {bound:e}")]
    Residual { residual: f64, bound: f64 },

    #[error("subspace not invariant under {member} (residual {residual:e})")]
    NotInvariant { member: String, residual: f64 },

    #[error("family members do not commute: {0} and {1}")]
    NotCommuting(String, String),

    #[error("factor {0} is not the standard module")]
    NonStandardFactor(usize),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("could not parse rational {0:?}")]
    ParseRational(String),
}

pub type Result<T> = std::result::Result<T, Error>;
