//! Continued-fraction expansion, convergents, and the cutoff denominators.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::hp::HpReal;
use crate::params::{AlphaClass, StableParams};

pub const DEFAULT_QUOTIENT_CAP: u64 = 1_000_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationReason {
    MaxTerms,
    PrecisionExhausted,
    TerminatedRational,
}

#[derive(Debug, Clone)]
pub struct ContinuedFractionExpansion {
    pub quotients: Vec<BigInt>,
    /// (p_n, q_n) pairs aligned with `quotients`.
    pub convergents: Vec<(BigInt, BigInt)>,
    pub truncation_reason: TruncationReason,
}

/// Partial quotients of `x` by the fractional-part iteration.
///
/// The expansion runs on the interval [x - err, x + err] implied by the
/// declared precision: a quotient is emitted only while both interval
/// endpoints agree on it, so every returned quotient is trustworthy at the
/// stated precision. `quotient_cap` additionally stops the expansion when a
/// quotient grows past the point where rational termination and a huge
/// irrational quotient can no longer be told apart.
pub fn expand(
    x: &HpReal,
    max_terms: usize,
    quotient_cap: Option<&BigInt>,
) -> Result<ContinuedFractionExpansion> {
    if max_terms == 0 {
        return Err(Error::InvalidConfig("max_terms must be >= 1".into()));
    }
    if !x.value().is_positive() {
        return Err(Error::NonPositiveInput(x.to_f64()));
    }
    let err = x.err_bound();
    let mut lo = x.value() - &err;
    let mut hi = x.value() + &err;
    let mut quotients: Vec<BigInt> = Vec::new();
    let mut reason = TruncationReason::MaxTerms;

    for i in 0..max_terms {
        let a_lo = lo.floor().to_integer();
        let a_hi = hi.floor().to_integer();
        if a_lo != a_hi {
            reason = TruncationReason::PrecisionExhausted;
            break;
        }
        let a = a_lo;
        if i > 0 && a < BigInt::one() {
            // interval slipped below 1 between quotients; the tail is noise
            reason = TruncationReason::PrecisionExhausted;
            break;
        }
        if let Some(cap) = quotient_cap {
            if &a > cap {
                reason = TruncationReason::PrecisionExhausted;
                break;
            }
        }
        quotients.push(a.clone());
        let fa = BigRational::from_integer(a);
        let frac_lo = &lo - &fa;
        let frac_hi = &hi - &fa;
        if frac_hi.is_zero() && x.is_exact() {
            reason = TruncationReason::TerminatedRational;
            break;
        }
        if !frac_lo.is_positive() {
            // cannot bound the next quotient from below
            reason = TruncationReason::PrecisionExhausted;
            break;
        }
        // reciprocal swaps the endpoints
        let new_lo = frac_hi.recip();
        let new_hi = frac_lo.recip();
        lo = new_lo;
        hi = new_hi;
    }

    let convergents = convergents(&quotients)?;
    Ok(ContinuedFractionExpansion {
        quotients,
        convergents,
        truncation_reason: reason,
    })
}

/// Exact (p_n, q_n) from the two-term recurrence seeded
/// p_{-1} = 1, p_{-2} = 0, q_{-1} = 0, q_{-2} = 1.
pub fn convergents(quotients: &[BigInt]) -> Result<Vec<(BigInt, BigInt)>> {
    for (i, a) in quotients.iter().enumerate() {
        if i == 0 && a.is_negative() {
            return Err(Error::InvalidQuotient {
                index: 0,
                reason: format!("a_0 must be >= 0, got {a}"),
            });
        }
        if i > 0 && a < &BigInt::one() {
            return Err(Error::InvalidQuotient {
                index: i,
                reason: format!("a_{i} must be >= 1, got {a}"),
            });
        }
    }
    let mut out = Vec::with_capacity(quotients.len());
    let (mut p_prev2, mut p_prev) = (BigInt::zero(), BigInt::one());
    let (mut q_prev2, mut q_prev) = (BigInt::one(), BigInt::zero());
    for a in quotients {
        let p = a * &p_prev + &p_prev2;
        let q = a * &q_prev + &q_prev2;
        out.push((p.clone(), q.clone()));
        p_prev2 = std::mem::replace(&mut p_prev, p);
        q_prev2 = std::mem::replace(&mut q_prev, q);
    }
    Ok(out)
}

/// All convergent denominators q_k(2/alpha) up to `q_max`, deduplicated and
/// strictly increasing. These are the only cutoffs along which the
/// triangular partial sums are guaranteed to converge.
pub fn cutoff_sequence(params: &StableParams, q_max: u64) -> Result<Vec<u64>> {
    if params.alpha_class() == AlphaClass::NumericallyRational {
        return Err(Error::RationalAlpha {
            detail: format!("alpha = {} classified rational", params.alpha()),
        });
    }
    let two_over_alpha = params.alpha_hp().two_over()?;
    // enough terms: q_k at least doubles every two steps, so 2*64 covers u64
    let exp = expand(&two_over_alpha, 192, None)?;
    let mut out: Vec<u64> = Vec::new();
    for (_, q) in &exp.convergents {
        match q.to_u64() {
            Some(q) if q <= q_max => {
                if out.last() != Some(&q) {
                    if let Some(&last) = out.last() {
                        debug_assert!(q > last);
                    }
                    out.push(q);
                }
            }
            _ => break,
        }
    }
    if out.is_empty() {
        out.push(1);
    }
    if out == [1] {
        return Err(Error::CutoffUnderflow { q_max });
    }
    Ok(out)
}
