//! Admissible (alpha, rho) pairs with rationality and Doney-class screening.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::contfrac::{self, TruncationReason, DEFAULT_QUOTIENT_CAP};
use crate::error::{Error, Result};
use crate::hp::HpReal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaClass {
    Irrational,
    NumericallyRational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// alpha in (0, 1): series in b_{m,n+1} x^{-m-alpha n}.
    LowAlpha,
    /// alpha in (1, 2): series in a_{m,n} x^{m+alpha n}.
    HighAlpha,
}

/// Closest solution of rho + k = l/alpha found by the screening scan.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DoneyProximity {
    pub k: i64,
    pub l: i64,
    pub distance: f64,
}

#[derive(Debug, Clone)]
pub struct ParamOptions {
    pub precision_bits: u32,
    pub quotient_cap: u64,
    /// A terminating expansion whose final denominator is below this is
    /// treated as genuinely rational; above it, as a truncated irrational.
    pub rational_denominator_cap: u64,
    pub doney_tolerance: f64,
    pub pole_tolerance: f64,
    pub sin_floor: f64,
    pub doney_k_range: i64,
    pub doney_l_range: i64,
    /// Treat the supplied (necessarily rational) decimal as a truncation of
    /// an irrational target, skipping the rationality gate.
    pub assume_irrational: bool,
}

impl Default for ParamOptions {
    fn default() -> Self {
        Self {
            precision_bits: crate::hp::DEFAULT_PRECISION_BITS,
            quotient_cap: DEFAULT_QUOTIENT_CAP,
            rational_denominator_cap: 1_000_000,
            doney_tolerance: 1e-9,
            pole_tolerance: 1e-9,
            sin_floor: 1e-280,
            doney_k_range: 50,
            doney_l_range: 100,
            assume_irrational: false,
        }
    }
}

/// Admissible stable-law parameters in the (alpha, rho) parameterization,
/// with rho = P(X_1 > 0).
#[derive(Debug, Clone)]
pub struct StableParams {
    alpha: f64,
    rho: f64,
    alpha_hp: HpReal,
    rho_rat: BigRational,
    alpha_class: AlphaClass,
    doney_proximity: Option<DoneyProximity>,
    opts: ParamOptions,
}

impl StableParams {
    pub fn new(alpha_hp: HpReal, rho: f64, opts: ParamOptions) -> Result<Self> {
        let alpha = alpha_hp.to_f64();
        if !(alpha > 0.0 && alpha < 2.0) || alpha == 1.0 {
            return Err(Error::Admissibility(format!(
                "alpha must lie in (0,1) or (1,2), got {alpha}"
            )));
        }
        let rho_ok = if alpha < 1.0 {
            rho > 0.0 && rho < 1.0
        } else {
            rho >= 1.0 - 1.0 / alpha && rho <= 1.0 / alpha
        };
        if !rho_ok {
            return Err(Error::Admissibility(format!(
                "rho = {rho} inadmissible for alpha = {alpha}"
            )));
        }

        let alpha_class = if opts.assume_irrational {
            AlphaClass::Irrational
        } else {
            classify(&alpha_hp, &opts)?
        };

        // Doney screening: the series below assume rho + k != l/alpha.
        let mut closest: Option<DoneyProximity> = None;
        for k in -opts.doney_k_range..=opts.doney_k_range {
            for l in 1..=opts.doney_l_range {
                let d = (rho + k as f64 - l as f64 / alpha).abs();
                if closest.map_or(true, |c| d < c.distance) {
                    closest = Some(DoneyProximity { k, l, distance: d });
                }
            }
        }
        if let Some(c) = closest {
            if c.distance < opts.doney_tolerance {
                return Err(Error::DoneyClass {
                    k: c.k,
                    l: c.l,
                    distance: c.distance,
                });
            }
        }

        let rho_rat = BigRational::from_float(rho)
            .ok_or_else(|| Error::Admissibility(format!("non-finite rho {rho}")))?;
        Ok(Self {
            alpha,
            rho,
            alpha_hp,
            rho_rat,
            alpha_class,
            doney_proximity: closest,
            opts,
        })
    }

    /// Convenience constructor taking alpha at face f64 value.
    pub fn from_f64(alpha: f64, rho: f64, opts: ParamOptions) -> Result<Self> {
        Self::new(HpReal::from_f64(alpha)?, rho, opts)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn alpha_hp(&self) -> &HpReal {
        &self.alpha_hp
    }

    pub fn alpha_rat(&self) -> &BigRational {
        self.alpha_hp.value()
    }

    pub fn rho_rat(&self) -> &BigRational {
        &self.rho_rat
    }

    pub fn inv_alpha_rat(&self) -> BigRational {
        self.alpha_hp.value().recip()
    }

    pub fn alpha_class(&self) -> AlphaClass {
        self.alpha_class
    }

    pub fn doney_proximity(&self) -> Option<DoneyProximity> {
        self.doney_proximity
    }

    pub fn options(&self) -> &ParamOptions {
        &self.opts
    }

    pub fn branch(&self) -> Branch {
        if self.alpha < 1.0 {
            Branch::LowAlpha
        } else {
            Branch::HighAlpha
        }
    }

    pub fn require_irrational(&self) -> Result<()> {
        if self.alpha_class == AlphaClass::NumericallyRational {
            return Err(Error::RationalAlpha {
                detail: format!("alpha = {}", self.alpha),
            });
        }
        Ok(())
    }
}

/// Rationality gate: a finite decimal is always rational, so the question
/// is whether its expansion terminates (or hits an astronomical quotient)
/// while the denominator is still small enough to be a plausible target.
fn classify(alpha_hp: &HpReal, opts: &ParamOptions) -> Result<AlphaClass> {
    let cap = BigInt::from(opts.quotient_cap);
    let exp = contfrac::expand(alpha_hp, 128, Some(&cap))?;
    let last_q = exp
        .convergents
        .last()
        .map(|(_, q)| q.clone())
        .unwrap_or_else(|| BigInt::from(1));
    let small = last_q.to_u64().map_or(false, |q| q <= opts.rational_denominator_cap);
    match exp.truncation_reason {
        TruncationReason::TerminatedRational | TruncationReason::PrecisionExhausted if small => {
            Ok(AlphaClass::NumericallyRational)
        }
        _ => Ok(AlphaClass::Irrational),
    }
}
