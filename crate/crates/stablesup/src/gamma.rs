//! Real log-gamma with sign tracking.

use crate::error::{Error, Result};
use crate::signedlog::SignedLogValue;

// Lanczos approximation, g = 7, 9 coefficients (double precision).
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln Gamma(x) for x > 0.
pub fn ln_gamma_positive(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < 0.5 {
        // one reflection keeps the Lanczos kernel on x >= 0.5
        let s = (std::f64::consts::PI * x).sin();
        return std::f64::consts::PI.ln() - s.ln() - ln_gamma_positive(1.0 - x);
    }
    let z = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// log|Gamma(z)| and sign(Gamma(z)) for real z.
///
/// Arguments below 0.5 go through the reflection
/// Gamma(z) Gamma(1-z) = pi / sin(pi z), so large negative arguments never
/// reach the raw kernel. Arguments within `pole_tolerance` of a nonpositive
/// integer are rejected; hitting one of those from the coefficient formulas
/// signals a Doney-type degeneracy upstream.
pub fn signed_log_gamma(z: f64, pole_tolerance: f64) -> Result<SignedLogValue> {
    if z >= 0.5 {
        return Ok(SignedLogValue::new(ln_gamma_positive(z), 1));
    }
    let dist = (z - z.round()).abs();
    if z.round() <= 0.0 && dist < pole_tolerance {
        return Err(Error::GammaPole {
            z,
            tol: pole_tolerance,
        });
    }
    // sin(pi z) with the argument reduced to the nearest integer first
    let u = z - z.round();
    let s = (std::f64::consts::PI * u).sin();
    let sin_piz = if (z.round() as i64).rem_euclid(2) == 0 {
        s
    } else {
        -s
    };
    let log_mag = std::f64::consts::PI.ln() - sin_piz.abs().ln() - ln_gamma_positive(1.0 - z);
    let sign = if sin_piz > 0.0 { 1 } else { -1 };
    Ok(SignedLogValue::new(log_mag, sign))
}
