//! Supremum density of strictly alpha-stable Levy processes via the
//! rearranged double series with continued-fraction cutoffs.
//!
//! The crate is organized bottom-up:
//! - [`hp`]: exact-rational "high-precision real" values and sine-argument
//!   reduction modulo 2;
//! - [`contfrac`]: continued-fraction expansion, convergents, and the
//!   cutoff denominators q_k(2/alpha);
//! - [`params`]: admissible (alpha, rho) pairs with rationality and
//!   Doney-class screening;
//! - [`gamma`] / [`signedlog`] / [`coeffs`]: log-space evaluation of the
//!   series coefficients a_{m,n}, b_{m,n};
//! - [`series`]: the triangular (Theorem-1) and absolute summation schemes,
//!   dual asymptotics, normalization, and CDF helpers;
//! - [`diagnostics`]: Diophantine exhibits (secant products, Buslaev
//!   averages, the pathological Example-1 number);
//! - [`oracle`]: an independent Monte Carlo estimate of the same density.

pub mod coeffs;
pub mod contfrac;
pub mod diagnostics;
pub mod error;
pub mod gamma;
pub mod hp;
pub mod oracle;
pub mod params;
pub mod series;
pub mod signedlog;

pub use error::{Error, Result};
pub use hp::HpReal;
pub use params::{AlphaClass, Branch, ParamOptions, StableParams};
pub use series::{DensityResult, Method, Side, TriangularSumTrace, Verdict, Warning};
pub use signedlog::SignedLogValue;
