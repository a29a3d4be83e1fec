use thiserror::Error;

/// Errors shared across the library.
#[derive(Error, Debug)]
pub enum Error {
    #[error("input must be positive, got {0}")]
    NonPositiveInput(f64),
    #[error("invalid partial quotient at index {index}: {reason}")]
    InvalidQuotient { index: usize, reason: String },
    #[error("alpha classified as numerically rational ({detail}); pass assume_irrational to override")]
    RationalAlpha { detail: String },
    #[error("no cutoff denominator <= {q_max} beyond q_0 = 1")]
    CutoffUnderflow { q_max: u64 },
    #[error("(alpha, rho) lies within {distance:.3e} of the Doney class rho + {k} = {l}/alpha")]
    DoneyClass { k: i64, l: i64, distance: f64 },
    #[error("gamma pole: argument {z} is within {tol:.1e} of a nonpositive integer")]
    GammaPole { z: f64, tol: f64 },
    #[error("near-singular sine product: |sin(pi * {arg})| = {value:.3e} below floor {floor:.1e}")]
    NearSingularProduct { arg: f64, value: f64, floor: f64 },
    #[error("inadmissible parameters: {0}")]
    Admissibility(String),
    #[error("shell budget {max_shell} exhausted before convergence")]
    ShellBudgetExhausted {
        max_shell: usize,
        partial: Box<crate::series::DensityResult>,
    },
    #[error("pathological construction supports at most {max} levels, requested {requested}")]
    LevelBudget { requested: usize, max: usize },
    #[error("working precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("x = {x} is outside the estimate grid [{lo}, {hi}]")]
    OutOfRange { x: f64, lo: f64, hi: f64 },
    #[error("unsupported asymptotic side for this branch: {0}")]
    Unsupported(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
