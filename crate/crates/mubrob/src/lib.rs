//! Noise robustness of mutually unbiased bases.
//!
//! This crate quantifies the incompatibility of sets of quantum measurements
//! through their white-noise robustness. It provides:
//!
//! - exact arithmetic in finite fields GF(p^r) and Galois rings GR(4,r)
//!   ([`galois`]), used to build complete sets of MUB in prime-power
//!   dimensions ([`mub`]);
//! - closed-form and enumerative upper/lower bounds on the robustness
//!   ([`bounds`]);
//! - an interior-point SDP solver for the exact robustness with duality
//!   certificates ([`sdp`]);
//! - parent-POVM constructions and tightness certificates ([`parent`]);
//! - subset enumeration, qubit optimality checks and the steering mapping
//!   ([`analysis`]).

pub mod analysis;
pub mod bounds;
pub mod galois;
pub mod linalg;
pub mod mub;
pub mod parent;
pub mod report;
pub mod robustness;
pub mod sdp;

use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("size budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("matrix is not Hermitian within tolerance {tol}: max deviation {dev}")]
    NotHermitian { dev: f64, tol: f64 },
    #[error("eigensolver did not converge after {0} sweeps")]
    EighNoConvergence(usize),
    #[error("degenerate polynomial (all coefficients zero)")]
    DegeneratePolynomial,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("all measurement operators are proportional to identity (zero denominator)")]
    TrivialMeasurements,
    #[error("measurements are not rank-one projective")]
    NotRankOneProjective,
    #[error("parent POVM guess invalid: {0}")]
    ParentGuessInvalid(String),
    #[error("parent POVM marginal check failed: {0}")]
    ParentCheckFailed(String),
    #[error("SDP solver failed: {0}")]
    SdpFailure(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
