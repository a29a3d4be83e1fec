//! High-precision positive reals backed by exact big rationals.
//!
//! A value is stored as a rational approximation together with an absolute
//! error bound of 2^-prec (or zero when the rational is the value itself).
//! This is enough machinery for continued-fraction expansion, cutoff
//! denominators, and sine-argument reduction; it is deliberately not a
//! general multiprecision float type.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub const DEFAULT_PRECISION_BITS: u32 = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct HpReal {
    value: BigRational,
    /// `None` means the rational is exact; `Some(p)` means the target real
    /// lies within 2^-p of `value`.
    prec_bits: Option<u32>,
}

fn pow2(bits: u32) -> BigInt {
    BigInt::one() << bits
}

impl HpReal {
    pub fn exact(value: BigRational) -> Self {
        Self {
            value,
            prec_bits: None,
        }
    }

    pub fn approx(value: BigRational, prec_bits: u32) -> Self {
        Self {
            value,
            prec_bits: Some(prec_bits),
        }
    }

    /// The f64 is taken at face value as an exact rational.
    pub fn from_f64(x: f64) -> Result<Self> {
        let r = BigRational::from_float(x)
            .ok_or_else(|| Error::InvalidConfig(format!("non-finite input {x}")))?;
        Ok(Self::exact(r))
    }

    /// Parse a decimal literal such as "1.4142135623" into its exact rational.
    pub fn from_decimal_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (sign, body) = match s.strip_prefix('-') {
            Some(rest) => (-1, rest),
            None => (1, s.strip_prefix('+').unwrap_or(s)),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((a, b)) => (a, b),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(Error::InvalidConfig(format!("cannot parse '{s}' as a decimal")));
        }
        let digits: String = format!("{int_part}{frac_part}");
        if !digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(Error::InvalidConfig(format!("cannot parse '{s}' as a decimal")));
        }
        let num: BigInt = digits.parse().map_err(|_| {
            Error::InvalidConfig(format!("cannot parse '{s}' as a decimal"))
        })?;
        let den = BigInt::from(10u32).pow(frac_part.len() as u32);
        Ok(Self::exact(BigRational::new(num * sign, den)))
    }

    pub fn approx_or_exact(value: BigRational, prec_bits: Option<u32>) -> Self {
        Self { value, prec_bits }
    }

    pub fn value(&self) -> &BigRational {
        &self.value
    }

    pub fn prec_bits(&self) -> Option<u32> {
        self.prec_bits
    }

    pub fn is_exact(&self) -> bool {
        self.prec_bits.is_none()
    }

    /// Absolute error bound as a rational (zero when exact).
    pub fn err_bound(&self) -> BigRational {
        match self.prec_bits {
            None => BigRational::zero(),
            Some(p) => BigRational::new(BigInt::one(), pow2(p)),
        }
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.value)
    }

    pub fn recip(&self) -> Result<Self> {
        if self.value.is_zero() {
            return Err(Error::NonPositiveInput(0.0));
        }
        let v = self.value.recip();
        let prec = match self.prec_bits {
            None => None,
            Some(p) => {
                // |1/x - 1/x~| <= err / (|x~| (|x~| - err)); degrade
                // conservatively by the magnitude of 1/x^2.
                let x = self.to_f64().abs();
                let loss = if x < 1.0 {
                    (2.0 * (1.0 / x).log2()).ceil() as i64 + 1
                } else {
                    0
                };
                Some((p as i64 - loss).max(8) as u32)
            }
        };
        Ok(Self {
            value: v,
            prec_bits: prec,
        })
    }

    /// 2/x, the argument whose convergent denominators drive the cutoffs.
    pub fn two_over(&self) -> Result<Self> {
        let r = self.recip()?;
        Ok(Self {
            value: r.value * BigRational::from_integer(BigInt::from(2)),
            prec_bits: r.prec_bits.map(|p| p.saturating_sub(1).max(8)),
        })
    }

    pub fn scale_int(&self, k: i64) -> Self {
        Self {
            value: &self.value * BigRational::from_integer(BigInt::from(k)),
            prec_bits: self.prec_bits.map(|p| {
                let loss = (64 - k.unsigned_abs().leading_zeros()) as u32;
                p.saturating_sub(loss).max(8)
            }),
        }
    }

    /// sqrt(n) for a nonnegative integer, correct to `prec` bits.
    pub fn sqrt_u64(n: u64, prec: u32) -> Self {
        Self::sqrt_rational(&BigRational::from_integer(BigInt::from(n)), prec)
    }

    /// sqrt(r) via integer square root of a scaled numerator.
    pub fn sqrt_rational(r: &BigRational, prec: u32) -> Self {
        assert!(!r.is_negative(), "sqrt of a negative rational");
        // sqrt(p/q) = isqrt(p*q*4^prec) / (q*2^prec) with error < 2^-prec
        let p = r.numer();
        let q = r.denom();
        let scaled = p * q * pow2(2 * prec);
        let root = scaled.sqrt();
        Self::approx(BigRational::new(root, q * pow2(prec)), prec)
    }

    /// pi via Machin's formula, integer fixed point.
    pub fn pi(prec: u32) -> Self {
        let guard = prec + 32;
        let scale = pow2(guard);
        let pi_scaled = &arctan_recip_scaled(5, &scale) * 16 - &arctan_recip_scaled(239, &scale) * 4;
        Self::approx(BigRational::new(pi_scaled, scale), prec)
    }

    /// Euler's number from the factorial series, integer fixed point.
    pub fn e(prec: u32) -> Self {
        let guard = prec + 32;
        let scale = pow2(guard);
        let mut term = scale.clone();
        let mut sum = scale.clone();
        let mut k = BigInt::one();
        while !term.is_zero() {
            term = &term / &k;
            sum += &term;
            k += 1;
        }
        Self::approx(BigRational::new(sum, scale), prec)
    }

    /// (1 + sqrt(5)) / 2.
    pub fn golden_ratio(prec: u32) -> Self {
        let s5 = Self::sqrt_u64(5, prec + 2);
        Self::approx(
            (s5.value + BigRational::one()) / BigRational::from_integer(BigInt::from(2)),
            prec,
        )
    }
}

/// atan(1/x) * scale, truncated series with alternating correction.
fn arctan_recip_scaled(x: u64, scale: &BigInt) -> BigInt {
    let x = BigInt::from(x);
    let xx = &x * &x;
    let mut term = scale / &x;
    let mut sum = term.clone();
    let mut k: u64 = 1;
    while !term.is_zero() {
        term = &term / &xx;
        let contrib = &term / BigInt::from(2 * k + 1);
        if k % 2 == 1 {
            sum -= contrib;
        } else {
            sum += contrib;
        }
        k += 1;
    }
    sum
}

/// Correctly rounded enough conversion of a big rational to f64.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let neg = r.is_negative();
    let num = r.numer().abs();
    let den = r.denom().abs();
    // scale so that the integer quotient keeps ~80 significant bits
    let shift = (den.bits() as i64 - num.bits() as i64) + 80;
    let q = if shift >= 0 {
        (num << shift as u64).div_floor(&den)
    } else {
        num.div_floor(&(den << (-shift) as u64))
    };
    let q = q.to_f64().unwrap_or(f64::INFINITY);
    let v = q * 2f64.powi(-shift as i32);
    if neg {
        -v
    } else {
        v
    }
}

/// Reduce `r` modulo 2 into [0, 2).
pub fn mod_two(r: &BigRational) -> BigRational {
    let two_den = r.denom() * 2;
    let mut m = r.numer().mod_floor(&two_den);
    if m.sign() == Sign::Minus {
        m += &two_den;
    }
    BigRational::new(m, r.denom().clone())
}

/// sin(pi * r) evaluated after exact reduction of `r` mod 2.
///
/// The reduced offset from the nearest integer is formed in rational
/// arithmetic, so the result has full f64 relative accuracy even when `r`
/// is huge or lies extremely close to an integer.
pub fn sin_pi_rational(r: &BigRational) -> f64 {
    let red = mod_two(r); // [0, 2)
    // distance to nearest integer among {0, 1, 2}
    let k = (&red + BigRational::new(BigInt::one(), BigInt::from(2)))
        .floor()
        .to_integer();
    let u = rational_to_f64(&(red - BigRational::from_integer(k.clone())));
    let s = (std::f64::consts::PI * u).sin();
    if k.is_odd() {
        -s
    } else {
        s
    }
}

/// cos(pi * r) with the same exact reduction.
pub fn cos_pi_rational(r: &BigRational) -> f64 {
    // cos(pi r) = sin(pi (r + 1/2))
    sin_pi_rational(&(r + BigRational::new(BigInt::one(), BigInt::from(2))))
}

/// Incrementally tracks k * step (+ offset) mod 2 for k = 0, 1, 2, ...
/// keeping the rational exact so sine arguments never lose precision.
#[derive(Debug, Clone)]
pub struct ModTwoLadder {
    step: BigRational,
    current: BigRational,
}

impl ModTwoLadder {
    pub fn new(step: BigRational, offset: BigRational) -> Self {
        Self {
            step: mod_two(&step),
            current: mod_two(&offset),
        }
    }

    pub fn current(&self) -> &BigRational {
        &self.current
    }

    /// Advance to the next multiple and return the reduced value.
    pub fn advance(&mut self) -> &BigRational {
        self.current = mod_two(&(&self.current + &self.step));
        &self.current
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_parse() {
        let x = HpReal::from_decimal_str("1.5").unwrap();
        assert_eq!(x.value(), &BigRational::new(BigInt::from(3), BigInt::from(2)));
        assert!(x.is_exact());
        let y = HpReal::from_decimal_str("-0.25").unwrap();
        assert_eq!(y.to_f64(), -0.25);
        assert!(HpReal::from_decimal_str("abc").is_err());
    }

    #[test]
    fn sqrt_matches_f64() {
        let s = HpReal::sqrt_u64(2, 256);
        assert!((s.to_f64() - std::f64::consts::SQRT_2).abs() < 1e-15);
        // squared value within the error bound
        let sq = s.value() * s.value();
        let diff = (sq - BigRational::from_integer(BigInt::from(2))).abs();
        assert!(diff < BigRational::new(BigInt::from(1), BigInt::one() << 250));
    }

    #[test]
    fn pi_and_e_to_f64() {
        assert!((HpReal::pi(256).to_f64() - std::f64::consts::PI).abs() < 1e-15);
        assert!((HpReal::e(256).to_f64() - std::f64::consts::E).abs() < 1e-15);
        assert!((HpReal::golden_ratio(200).to_f64() - 1.618033988749895).abs() < 1e-15);
    }

    #[test]
    fn sin_pi_near_integer() {
        // sin(pi * (10^9 + 1e-20)) should come out ~ pi * 1e-20, not noise
        let tiny = BigRational::new(BigInt::one(), BigInt::from(10u64).pow(20));
        let arg = BigRational::from_integer(BigInt::from(1_000_000_001u64)) + tiny;
        let s = sin_pi_rational(&arg);
        let expect = -std::f64::consts::PI * 1e-20;
        assert!((s / expect - 1.0).abs() < 1e-12, "s = {s}");
    }

    #[test]
    fn ladder_tracks_multiples() {
        let step = BigRational::new(BigInt::from(7), BigInt::from(5));
        let mut ladder = ModTwoLadder::new(step.clone(), BigRational::zero());
        for k in 1..50 {
            let red = ladder.advance().clone();
            let direct = mod_two(&(&step * BigRational::from_integer(BigInt::from(k))));
            assert_eq!(red, direct);
        }
    }
}
