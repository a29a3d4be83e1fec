//! Diophantine exhibits: secant-product growth along convergent
//! denominators, the Buslaev log-sine average, the per-k exponential bound,
//! and the constructed pathological number whose secant products blow up.
//!
//! Everything here works on the exact rational representation of the input:
//! the interesting digits of sec(pi l tau) for the pathological tau live
//! ~2^1000 below the integer part of l*tau, so arguments are reduced mod 2
//! in big-rational arithmetic before any floating trigonometry.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::contfrac;
use crate::error::{Error, Result};
use crate::hp::{cos_pi_rational, sin_pi_rational, HpReal, ModTwoLadder};
use crate::signedlog::CompensatedSum;

/// Longest sine/secant product this module will stream.
const PRODUCT_LENGTH_BUDGET: u64 = 2_000_000;
/// Required absolute resolution of pi*l*tau for a trustworthy factor.
const ARG_RESOLUTION: f64 = 1e-3;

/// Largest construction level: a_4 = 2^{q_3^2} would need ~2^2188 bits of
/// storage for the quotient alone, so level 4 is unreachable on any machine.
pub const MAX_PATHOLOGICAL_LEVELS: usize = 3;

#[derive(Debug, Clone, Serialize)]
pub struct SecantRow {
    pub k: usize,
    pub q_k: BigInt,
    /// log of prod_{l=1}^{q_k - 1} |sec(pi l tau)|.
    pub log_product: f64,
    /// log_product - q_k ln 6, the Lemma-1 margin.
    pub log_bound_gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SecantProductReport {
    pub tau: f64,
    pub rows: Vec<SecantRow>,
    /// max over rows of exp(log_bound_gap); finite and stable in k when the
    /// lemma's bound describes the growth.
    pub c_estimate: f64,
    /// True when rows stop early because q_k outgrew the length budget or
    /// the stated precision of tau.
    pub truncated: bool,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BuslaevRow {
    pub q_k: u64,
    /// (1/q_k) sum_{l<q_k} ln(2 |sin(pi l beta)|).
    pub average: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AuditRow {
    pub k: u64,
    /// (1/k) log prod_{l<=k} |sec(pi l tau)|.
    pub log_product_over_k: f64,
}

/// The Example-1 number tau = [1; 2, 2^4, 2^{q_2^2}, ...] together with its
/// exact convergents and a precision declaration tight enough that
/// re-expanding the value recovers every quotient built.
#[derive(Debug, Clone)]
pub struct PathologicalNumber {
    pub levels: usize,
    pub quotients: Vec<BigInt>,
    pub convergents: Vec<(BigInt, BigInt)>,
    pub precision_bits: u32,
    pub value: HpReal,
}

/// Build the pathological tau down to quotient a_levels.
///
/// a_0 = 1, a_1 = 2, and a_{n+1} = 2^{q_n^2} thereafter; the denominators
/// q_n are kept exact, and the returned value is the convergent
/// p_levels / q_levels with precision covering both the paper's
/// 2^{-q_{levels-1}^2} approximation claim and full quotient recovery.
pub fn build_pathological(levels: usize) -> Result<PathologicalNumber> {
    if levels == 0 || levels > MAX_PATHOLOGICAL_LEVELS {
        return Err(Error::LevelBudget {
            requested: levels,
            max: MAX_PATHOLOGICAL_LEVELS,
        });
    }
    let mut quotients: Vec<BigInt> = vec![BigInt::one(), BigInt::from(2)];
    let mut convergents = contfrac::convergents(&quotients)?;
    while quotients.len() <= levels {
        let q_prev = &convergents.last().unwrap().1;
        let exp = (q_prev * q_prev)
            .to_u64()
            .expect("q_n^2 fits in u64 for levels <= 3");
        quotients.push(BigInt::one() << exp);
        convergents = contfrac::convergents(&quotients)?;
    }
    quotients.truncate(levels + 1);
    convergents.truncate(levels + 1);
    let (p_last, q_last) = convergents.last().unwrap().clone();
    let (p_prev, q_prev) = convergents[levels - 1].clone();
    // Precision must cover both the paper's 2^{-q_{levels-1}^2} claim and
    // full quotient recovery (the cylinder of the built quotient list has
    // width ~ 1/q_levels^2).
    let q_prev_sq = (&q_prev * &q_prev).to_u64().unwrap_or(u64::MAX);
    let recovery_bits = 2 * q_last.bits() + 64;
    let precision_bits = q_prev_sq
        .saturating_add(64)
        .max(recovery_bits)
        .min(u32::MAX as u64) as u32;
    // The bare convergent p/q sits on the boundary of its own cylinder, so
    // expanding it back at finite precision would lose the last quotient.
    // Append a tail-marker quotient K large enough to stand in for the
    // (unrepresentable) true continuation, small enough that the value
    // stays a safe distance inside the cylinder at the stated precision.
    let k_tail = BigInt::one() << (precision_bits as u64 - 2 * q_last.bits() - 8);
    let num = &p_last * &k_tail + &p_prev;
    let den = &q_last * &k_tail + &q_prev;
    let value = HpReal::approx(BigRational::new(num, den), precision_bits);
    Ok(PathologicalNumber {
        levels,
        quotients,
        convergents,
        precision_bits,
        value,
    })
}

/// How many ladder steps the stated precision of `x` supports before the
/// reduced argument loses `ARG_RESOLUTION` absolute accuracy.
fn resolvable_steps(x: &HpReal) -> u64 {
    match x.prec_bits() {
        None => u64::MAX,
        Some(p) => {
            // l * 2^-p < ARG_RESOLUTION
            let bits = f64::from(p) + ARG_RESOLUTION.log2();
            if bits >= 63.0 {
                u64::MAX
            } else if bits <= 0.0 {
                0
            } else {
                2f64.powf(bits) as u64
            }
        }
    }
}

/// Secant products along the Lemma-1 cutoffs q_k(2 tau).
pub fn secant_product_report(tau: &HpReal, k_max: usize) -> Result<SecantProductReport> {
    if !tau.value().is_positive() {
        return Err(Error::NonPositiveInput(tau.to_f64()));
    }
    if k_max == 0 {
        return Err(Error::InvalidConfig("k_max must be >= 1".into()));
    }
    let two_tau = HpReal::approx_or_exact(
        tau.value() * BigRational::from_integer(BigInt::from(2)),
        tau.prec_bits().map(|p| p.saturating_sub(1)),
    );
    let exp = contfrac::expand(&two_tau, k_max, None)?;
    let l_budget = PRODUCT_LENGTH_BUDGET.min(resolvable_steps(tau));

    let mut ladder = ModTwoLadder::new(tau.value().clone(), BigRational::zero());
    let mut acc = CompensatedSum::new();
    let mut next_l: u64 = 1;
    let mut rows = Vec::new();
    let mut truncated = exp.convergents.len() < k_max;
    for (k, (_, q)) in exp.convergents.iter().enumerate() {
        let q_u64 = match q.to_u64() {
            Some(v) if v <= l_budget => v,
            _ => {
                truncated = true;
                break;
            }
        };
        while next_l < q_u64 {
            let c = cos_pi_rational(ladder.advance());
            acc.add(-c.abs().ln());
            next_l += 1;
        }
        let log_product = acc.value();
        rows.push(SecantRow {
            k,
            q_k: q.clone(),
            log_product,
            log_bound_gap: log_product - q_u64 as f64 * 6f64.ln(),
        });
    }
    if rows.is_empty() {
        return Err(Error::PrecisionExhausted(
            "no convergent denominator resolvable at the stated precision".into(),
        ));
    }
    let c_estimate = rows
        .iter()
        .map(|r| r.log_bound_gap.exp())
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(SecantProductReport {
        tau: tau.to_f64(),
        rows,
        c_estimate,
        truncated,
    })
}

/// Per-factor logs ln|sec(pi l tau)| for l = 1..=l_max; the cross-check
/// surface for the streaming accumulation above.
pub fn secant_factor_logs(tau: &HpReal, l_max: u64) -> Result<Vec<f64>> {
    if l_max > PRODUCT_LENGTH_BUDGET.min(resolvable_steps(tau)) {
        return Err(Error::PrecisionExhausted(format!(
            "cannot resolve {l_max} ladder steps at the stated precision"
        )));
    }
    let mut ladder = ModTwoLadder::new(tau.value().clone(), BigRational::zero());
    let mut out = Vec::with_capacity(l_max as usize);
    for _ in 0..l_max {
        let c = cos_pi_rational(ladder.advance());
        out.push(-c.abs().ln());
    }
    Ok(out)
}

/// Pairwise (tree) summation; reference reduction for the streaming sums.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

/// Buslaev averages (1/q_k) sum_{l<q_k} ln(2 |sin(pi l beta)|) along the
/// convergent denominators q_k(beta).
pub fn buslaev_average(beta: &HpReal, k_max: usize) -> Result<Vec<BuslaevRow>> {
    if !beta.value().is_positive() {
        return Err(Error::NonPositiveInput(beta.to_f64()));
    }
    if k_max == 0 {
        return Err(Error::InvalidConfig("k_max must be >= 1".into()));
    }
    let exp = contfrac::expand(beta, k_max, None)?;
    let l_budget = PRODUCT_LENGTH_BUDGET.min(resolvable_steps(beta));
    let ln2 = std::f64::consts::LN_2;

    let mut ladder = ModTwoLadder::new(beta.value().clone(), BigRational::zero());
    let mut acc = CompensatedSum::new();
    let mut next_l: u64 = 1;
    let mut rows: Vec<BuslaevRow> = Vec::new();
    for (_, q) in &exp.convergents {
        let q_u64 = match q.to_u64() {
            Some(v) if v <= l_budget => v,
            _ => break,
        };
        if rows.last().map_or(false, |r| r.q_k == q_u64) {
            continue;
        }
        while next_l < q_u64 {
            let s = sin_pi_rational(ladder.advance());
            acc.add(s.abs().ln() + ln2);
            next_l += 1;
        }
        rows.push(BuslaevRow {
            q_k: q_u64,
            average: acc.value() / q_u64 as f64,
        });
    }
    if rows.is_empty() {
        return Err(Error::PrecisionExhausted(
            "no convergent denominator resolvable at the stated precision".into(),
        ));
    }
    Ok(rows)
}

/// (1/k) log prod_{l=1}^{k} |sec(pi l tau)| for every k up to k_max — the
/// bound-(12) audit surface, where pathological tau spikes at k = q_n.
pub fn exponential_bound_audit(tau: &HpReal, k_max: u64) -> Result<Vec<AuditRow>> {
    if !tau.value().is_positive() {
        return Err(Error::NonPositiveInput(tau.to_f64()));
    }
    if k_max == 0 {
        return Err(Error::InvalidConfig("k_max must be >= 1".into()));
    }
    let l_budget = PRODUCT_LENGTH_BUDGET.min(resolvable_steps(tau));
    let mut ladder = ModTwoLadder::new(tau.value().clone(), BigRational::zero());
    let mut acc = CompensatedSum::new();
    let mut rows = Vec::new();
    for k in 1..=k_max.min(l_budget) {
        let c = cos_pi_rational(ladder.advance());
        acc.add(-c.abs().ln());
        rows.push(AuditRow {
            k,
            log_product_over_k: acc.value() / k as f64,
        });
    }
    if rows.is_empty() {
        return Err(Error::PrecisionExhausted(
            "zero resolvable factors at the stated precision".into(),
        ));
    }
    Ok(rows)
}
