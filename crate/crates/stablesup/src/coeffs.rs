//! The double-series coefficients a_{m,n} and b_{m,n} in log space.
//!
//! Both families share the same two sine products
//!
//!   P_m = prod_{j<=m} sin(pi (alpha rho + j - 1)/alpha) / sin(pi j/alpha)
//!   Q_n = prod_{j<=n} sin(pi alpha (rho + j - 1)) / sin(pi alpha j)
//!
//! maintained incrementally, so extending a grid by one row or column costs
//! O(1) gamma and sine evaluations. The reciprocal gamma factors with large
//! negative arguments are rewritten through 1/Gamma(1-w) = Gamma(w)
//! sin(pi w)/pi once and for all, and every sine argument is reduced modulo
//! 2 in exact rational arithmetic before any f64 trigonometry happens: the
//! small-denominator factors sin(pi j/alpha) are precisely where double
//! rounding of the raw argument would destroy the result.
//!
//! For b_{m,n} the gamma-ratio prefactor is cancelled against a_{m,n}
//! analytically, leaving
//!
//!   b_{m,n} = (-1)^{m+n} / (Gamma(1+n+m/alpha) Gamma(-m-alpha n)) P_m Q_n,
//!
//! which never forms the two huge intermediate factors.

use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::gamma::ln_gamma_positive;
use crate::hp::{rational_to_f64, sin_pi_rational, ModTwoLadder};
use crate::params::{Branch, StableParams};
use crate::signedlog::SignedLogValue;

const LN_PI: f64 = 1.1447298858494002;

#[derive(Debug, Clone)]
struct SineProduct {
    values: Vec<SignedLogValue>, // values[j] = product of first j factors
    num_ladder: ModTwoLadder,
    den_ladder: ModTwoLadder,
}

impl SineProduct {
    fn new(num_step: BigRational, num_offset: BigRational, den_step: BigRational) -> Self {
        Self {
            values: vec![SignedLogValue::ONE],
            num_ladder: ModTwoLadder::new(num_step.clone(), num_offset),
            den_ladder: ModTwoLadder::new(den_step, BigRational::zero()),
        }
    }

    fn extend_to(&mut self, j_max: usize, sin_floor: f64) -> Result<()> {
        while self.values.len() <= j_max {
            let j = self.values.len(); // factor index, 1-based
            let (num_arg, den_arg) = if j == 1 {
                (self.num_ladder.current().clone(), self.den_ladder.advance().clone())
            } else {
                self.num_ladder.advance();
                (self.num_ladder.current().clone(), self.den_ladder.advance().clone())
            };
            let num = sin_pi_rational(&num_arg);
            let den = sin_pi_rational(&den_arg);
            if den.abs() < sin_floor {
                return Err(Error::NearSingularProduct {
                    arg: rational_to_f64(&den_arg),
                    value: den.abs(),
                    floor: sin_floor,
                });
            }
            let factor = SignedLogValue::from_f64(num).div(SignedLogValue::from_f64(den));
            let prev = *self.values.last().unwrap();
            self.values.push(prev.mul(factor));
        }
        Ok(())
    }
}

/// Shared evaluation state for all coefficients of one parameter pair.
#[derive(Debug, Clone)]
pub struct CoefficientGrid {
    params: StableParams,
    branch: Branch,
    p_prod: SineProduct,
    q_prod: SineProduct,
    /// (m / alpha) mod 2 as f64, exact reduction done in rationals.
    m_inv_frac: Vec<f64>,
    m_inv_ladder: ModTwoLadder,
    /// (alpha n) mod 2 as f64.
    n_alpha_frac: Vec<f64>,
    n_alpha_ladder: ModTwoLadder,
    inv_alpha: f64,
}

impl CoefficientGrid {
    pub fn new(params: &StableParams) -> Self {
        let alpha_rat = params.alpha_rat().clone();
        let inv_alpha_rat = params.inv_alpha_rat();
        let rho_rat = params.rho_rat().clone();
        let alpha_rho = &alpha_rat * &rho_rat;
        let p_prod = SineProduct::new(inv_alpha_rat.clone(), rho_rat.clone(), inv_alpha_rat.clone());
        let q_prod = SineProduct::new(alpha_rat.clone(), alpha_rho, alpha_rat.clone());
        Self {
            params: params.clone(),
            branch: params.branch(),
            p_prod,
            q_prod,
            m_inv_frac: vec![0.0],
            m_inv_ladder: ModTwoLadder::new(inv_alpha_rat, BigRational::zero()),
            n_alpha_frac: vec![0.0],
            n_alpha_ladder: ModTwoLadder::new(alpha_rat, BigRational::zero()),
            inv_alpha: 1.0 / params.alpha(),
        }
    }

    pub fn params(&self) -> &StableParams {
        &self.params
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    /// Grow product and reduction tables so that a(m, n) / b(m, n) can be
    /// evaluated for all m <= m_max, n <= n_max.
    pub fn ensure(&mut self, m_max: usize, n_max: usize) -> Result<()> {
        let floor = self.params.options().sin_floor;
        self.p_prod.extend_to(m_max, floor)?;
        self.q_prod.extend_to(n_max, floor)?;
        while self.m_inv_frac.len() <= m_max {
            self.m_inv_frac.push(rational_to_f64(self.m_inv_ladder.advance()));
        }
        while self.n_alpha_frac.len() <= n_max {
            self.n_alpha_frac.push(rational_to_f64(self.n_alpha_ladder.advance()));
        }
        Ok(())
    }

    pub fn ensured_bounds(&self) -> (usize, usize) {
        (self.p_prod.values.len() - 1, self.q_prod.values.len() - 1)
    }

    /// a_{m,n}; requires a prior `ensure` covering (m, n).
    pub fn a(&self, m: usize, n: usize) -> Result<SignedLogValue> {
        let pm = self.p_prod.values[m];
        let qn = self.q_prod.values[n];
        if pm.is_zero() || qn.is_zero() {
            return Ok(SignedLogValue::ZERO);
        }
        // 1/Gamma(1 - rho - n - m/alpha) = Gamma(w) sin(pi w) / pi, w = rho + n + m/alpha
        let w = self.params.rho() + n as f64 + m as f64 * self.inv_alpha;
        let w_red = fract2(self.params.rho() + (n % 2) as f64 + self.m_inv_frac[m]);
        let (sin_w, sin_sign) = sin_pi_reduced(w_red);
        // 1 - rho - n - m/alpha sits on a pole exactly when w is an integer
        self.pole_check(w_red, 1.0 - w)?;
        let g_w = ln_gamma_positive(w);
        let g_pos = ln_gamma_positive(self.params.alpha() * self.params.rho() + m as f64 + self.params.alpha() * n as f64);
        let log_mag = g_w + sin_w.abs().ln() - LN_PI - g_pos + pm.log_mag + qn.log_mag;
        let sign = parity_sign(m + n) * sin_sign * pm.sign * qn.sign;
        Ok(SignedLogValue::new(log_mag, sign))
    }

    /// b_{m,n} in the cancelled form; n >= 1.
    pub fn b(&self, m: usize, n: usize) -> Result<SignedLogValue> {
        if n == 0 {
            return Err(Error::InvalidConfig(
                "b_{m,0} is never consumed by the density series".into(),
            ));
        }
        let pm = self.p_prod.values[m];
        let qn = self.q_prod.values[n];
        if pm.is_zero() || qn.is_zero() {
            return Ok(SignedLogValue::ZERO);
        }
        // 1/Gamma(-m - alpha n) = -Gamma(1+u) sin(pi u) / pi, u = m + alpha n
        let u = m as f64 + self.params.alpha() * n as f64;
        let u_red = fract2((m % 2) as f64 + self.n_alpha_frac[n]);
        let (sin_u, sin_sign) = sin_pi_reduced(u_red);
        self.pole_check(u_red, -u)?;
        let g1 = ln_gamma_positive(1.0 + n as f64 + m as f64 * self.inv_alpha);
        let g2 = ln_gamma_positive(1.0 + u);
        let log_mag = g2 + sin_u.abs().ln() - LN_PI - g1 + pm.log_mag + qn.log_mag;
        let sign = parity_sign(m + n) * (-sin_sign) * pm.sign * qn.sign;
        Ok(SignedLogValue::new(log_mag, sign))
    }

    fn pole_check(&self, reduced: f64, z: f64) -> Result<()> {
        let dist = (reduced - reduced.round()).abs();
        if dist < self.params.options().pole_tolerance {
            return Err(Error::GammaPole {
                z,
                tol: self.params.options().pole_tolerance,
            });
        }
        Ok(())
    }

    /// From-scratch evaluation of a_{m,n}: every sine factor is recomputed
    /// with its own reduction instead of reusing the running products.
    pub fn a_direct(&self, m: usize, n: usize) -> Result<SignedLogValue> {
        let (pm, qn) = self.direct_products(m, n)?;
        let with_products = |v: SignedLogValue| v.mul(pm).mul(qn);
        let base = self.base_a(m, n)?;
        Ok(with_products(base))
    }

    /// From-scratch b_{m,n}.
    pub fn b_direct(&self, m: usize, n: usize) -> Result<SignedLogValue> {
        if n == 0 {
            return Err(Error::InvalidConfig(
                "b_{m,0} is never consumed by the density series".into(),
            ));
        }
        let (pm, qn) = self.direct_products(m, n)?;
        let u = m as f64 + self.params.alpha() * n as f64;
        let u_red = fract2((m % 2) as f64 + rational_to_f64(&crate::hp::mod_two(
            &(self.params.alpha_rat() * BigRational::from_integer(n.into())),
        )));
        let (sin_u, sin_sign) = sin_pi_reduced(u_red);
        self.pole_check(u_red, -u)?;
        let g1 = ln_gamma_positive(1.0 + n as f64 + m as f64 * self.inv_alpha);
        let g2 = ln_gamma_positive(1.0 + u);
        let base = SignedLogValue::new(
            g2 + sin_u.abs().ln() - LN_PI - g1,
            parity_sign(m + n) * (-sin_sign),
        );
        Ok(base.mul(pm).mul(qn))
    }

    fn base_a(&self, m: usize, n: usize) -> Result<SignedLogValue> {
        let w = self.params.rho() + n as f64 + m as f64 * self.inv_alpha;
        let w_red = fract2(
            self.params.rho()
                + (n % 2) as f64
                + rational_to_f64(&crate::hp::mod_two(
                    &(self.params.inv_alpha_rat() * BigRational::from_integer(m.into())),
                )),
        );
        let (sin_w, sin_sign) = sin_pi_reduced(w_red);
        self.pole_check(w_red, 1.0 - w)?;
        let g_w = ln_gamma_positive(w);
        let g_pos = ln_gamma_positive(
            self.params.alpha() * self.params.rho() + m as f64 + self.params.alpha() * n as f64,
        );
        Ok(SignedLogValue::new(
            g_w + sin_w.abs().ln() - LN_PI - g_pos,
            parity_sign(m + n) * sin_sign,
        ))
    }

    fn direct_products(&self, m: usize, n: usize) -> Result<(SignedLogValue, SignedLogValue)> {
        let floor = self.params.options().sin_floor;
        let inv_alpha_rat = self.params.inv_alpha_rat();
        let alpha_rat = self.params.alpha_rat().clone();
        let rho_rat = self.params.rho_rat().clone();
        let mut pm = SignedLogValue::ONE;
        for j in 1..=m {
            let jr = BigRational::from_integer(j.into());
            let num_arg = &rho_rat + &inv_alpha_rat * (&jr - BigRational::from_integer(1.into()));
            let den_arg = &inv_alpha_rat * &jr;
            let num = sin_pi_rational(&num_arg);
            let den = sin_pi_rational(&den_arg);
            if den.abs() < floor {
                return Err(Error::NearSingularProduct {
                    arg: rational_to_f64(&den_arg),
                    value: den.abs(),
                    floor,
                });
            }
            pm = pm.mul(SignedLogValue::from_f64(num).div(SignedLogValue::from_f64(den)));
        }
        let mut qn = SignedLogValue::ONE;
        for j in 1..=n {
            let jr = BigRational::from_integer(j.into());
            let num_arg = &alpha_rat * (&rho_rat + &jr - BigRational::from_integer(1.into()));
            let den_arg = &alpha_rat * &jr;
            let num = sin_pi_rational(&num_arg);
            let den = sin_pi_rational(&den_arg);
            if den.abs() < floor {
                return Err(Error::NearSingularProduct {
                    arg: rational_to_f64(&den_arg),
                    value: den.abs(),
                    floor,
                });
            }
            qn = qn.mul(SignedLogValue::from_f64(num).div(SignedLogValue::from_f64(den)));
        }
        Ok((pm, qn))
    }
}

fn parity_sign(k: usize) -> i8 {
    if k % 2 == 0 {
        1
    } else {
        -1
    }
}

fn fract2(x: f64) -> f64 {
    let r = x % 2.0;
    if r < 0.0 {
        r + 2.0
    } else {
        r
    }
}

/// sin(pi y) for y already reduced into [0, 2); returns (value, sign as i8).
fn sin_pi_reduced(y: f64) -> (f64, i8) {
    let k = y.round();
    let u = y - k;
    let s = (std::f64::consts::PI * u).sin();
    let v = if (k as i64) % 2 == 0 { s } else { -s };
    (v, if v > 0.0 { 1 } else if v < 0.0 { -1 } else { 0 })
}
