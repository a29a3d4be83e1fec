//! Log-magnitude/sign representation and compensated accumulation.
//!
//! Coefficients of the double series mix factors like Gamma(alpha*rho + m +
//! alpha*n) (overflows f64 past m + alpha*n ~ 170) with long sine products
//! that underflow. All coefficient arithmetic therefore happens as
//! (log|value|, sign) pairs and is only exponentiated term by term.

use serde::Serialize;

/// A real number stored as the natural log of its absolute value plus a sign.
///
/// `sign == 0` iff `log_mag == -inf` (the value is exactly zero).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignedLogValue {
    pub log_mag: f64,
    pub sign: i8,
}

impl SignedLogValue {
    pub const ZERO: SignedLogValue = SignedLogValue {
        log_mag: f64::NEG_INFINITY,
        sign: 0,
    };
    pub const ONE: SignedLogValue = SignedLogValue {
        log_mag: 0.0,
        sign: 1,
    };

    pub fn new(log_mag: f64, sign: i8) -> Self {
        debug_assert!(sign == -1 || sign == 0 || sign == 1);
        if sign == 0 || log_mag == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        Self { log_mag, sign }
    }

    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            Self {
                log_mag: v.abs().ln(),
                sign: if v > 0.0 { 1 } else { -1 },
            }
        }
    }

    pub fn to_f64(self) -> f64 {
        self.sign as f64 * self.log_mag.exp()
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn mul(self, other: Self) -> Self {
        Self::new(self.log_mag + other.log_mag, self.sign * other.sign)
    }

    pub fn div(self, other: Self) -> Self {
        debug_assert!(other.sign != 0, "division by exact zero");
        Self::new(self.log_mag - other.log_mag, self.sign * other.sign)
    }

    pub fn neg(self) -> Self {
        Self::new(self.log_mag, -self.sign)
    }

    /// Scale by exp(shift) without leaving log space.
    pub fn scale_log(self, shift: f64) -> Self {
        Self::new(self.log_mag + shift, self.sign)
    }

    /// Sum in log space with sign resolution, routed through the larger
    /// magnitude to avoid overflow.
    pub fn add(self, other: Self) -> Self {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let (hi, lo) = if self.log_mag >= other.log_mag {
            (self, other)
        } else {
            (other, self)
        };
        let ratio = (lo.log_mag - hi.log_mag).exp(); // in [0, 1]
        let inner = if hi.sign == lo.sign {
            1.0 + ratio
        } else {
            1.0 - ratio
        };
        if inner == 0.0 {
            return Self::ZERO;
        }
        Self::new(hi.log_mag + inner.abs().ln(), hi.sign * inner.signum() as i8)
    }
}

/// Neumaier (Kahan-Babuska) compensated accumulator.
///
/// The triangular partial sums cancel through many orders of magnitude
/// (condition numbers ~1e9 at the edge of the usable x range), so plain
/// f64 accumulation order would dominate the cross-method comparison.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
    abs_sum: f64,
    max_abs: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
        self.abs_sum += x.abs();
        if x.abs() > self.max_abs {
            self.max_abs = x.abs();
        }
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    /// Sum of absolute values seen so far; `value()/abs_sum()` measures
    /// cancellation severity.
    pub fn abs_sum(&self) -> f64 {
        self.abs_sum
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs
    }
}
