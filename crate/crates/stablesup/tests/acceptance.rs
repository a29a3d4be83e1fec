//! Acceptance gate: one test per criterion, each printing a single
//! machine-greppable PASS/FAIL line (run with `--nocapture` to see them on
//! success; failures always surface through the panic message too).

use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use stablesup::coeffs::CoefficientGrid;
use stablesup::contfrac;
use stablesup::diagnostics;
use stablesup::gamma::signed_log_gamma;
use stablesup::hp::{self, HpReal};
use stablesup::oracle::{self, Estimator, SimulationConfig};
use stablesup::params::{ParamOptions, StableParams};
use stablesup::series::{self, Side};

fn criterion(n: u32, desc: &str, f: impl FnOnce() -> Result<String, String>) {
    // write straight to stdout so the line survives libtest's output capture
    use std::io::Write;
    match f() {
        Ok(detail) => {
            let _ = writeln!(
                std::io::stdout(),
                "ACCEPTANCE {n}: PASS - {desc} [{detail}]"
            );
        }
        Err(e) => {
            let _ = writeln!(std::io::stdout(), "ACCEPTANCE {n}: FAIL - {desc}: {e}");
            panic!("acceptance criterion {n} failed: {e}");
        }
    }
}

fn params(alpha: HpReal, rho: f64) -> StableParams {
    StableParams::new(alpha, rho, ParamOptions::default()).expect("admissible test parameters")
}

/// The four reference parameter pairs used by criteria 2 and 3.
fn reference_pairs() -> Vec<(&'static str, StableParams)> {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let third = BigRational::new(BigInt::one(), BigInt::from(3));
    vec![
        ("alpha=sqrt2, rho=0.5", params(HpReal::sqrt_u64(2, 256), 0.5)),
        ("alpha=sqrt3, rho=0.55", params(HpReal::sqrt_u64(3, 256), 0.55)),
        (
            "alpha=1/sqrt2, rho=0.3",
            params(HpReal::sqrt_rational(&half, 256), 0.3),
        ),
        (
            "alpha=1/sqrt3, rho=0.7",
            params(HpReal::sqrt_rational(&third, 256), 0.7),
        ),
    ]
}

#[test]
fn criterion_1_example_reproduction() {
    criterion(1, "Example 1 pathological tau at levels 3", || {
        let t0 = Instant::now();
        let p = diagnostics::build_pathological(3).map_err(|e| e.to_string())?;
        let expect_quots = vec![
            BigInt::from(1),
            BigInt::from(2),
            BigInt::from(16),
            BigInt::from(2).pow(1089),
        ];
        if p.quotients != expect_quots {
            return Err(format!("quotients mismatch: got {:?}", p.quotients.len()));
        }
        let ps: Vec<BigInt> = p.convergents.iter().map(|(a, _)| a.clone()).collect();
        let qs: Vec<BigInt> = p.convergents.iter().map(|(_, b)| b.clone()).collect();
        if ps[..3] != [BigInt::from(1), BigInt::from(3), BigInt::from(49)] {
            return Err(format!("p prefix mismatch: {:?}", &ps[..3]));
        }
        if qs[..3] != [BigInt::from(1), BigInt::from(2), BigInt::from(33)] {
            return Err(format!("q prefix mismatch: {:?}", &qs[..3]));
        }
        if !ps.iter().all(|pn| pn.bit(0)) {
            return Err("not every p_n is odd".into());
        }
        // q_1 = 2 and alpha = 2/tau, so q_1/alpha = tau
        let sec = 1.0 / hp::cos_pi_rational(p.value.value()).abs();
        let bound = 16.0 / std::f64::consts::PI;
        if sec <= bound {
            return Err(format!("|sec(pi tau)| = {sec} <= 16/pi = {bound}"));
        }
        let dt = t0.elapsed();
        if dt.as_secs_f64() >= 1.0 {
            return Err(format!("took {dt:?}, budget 1 s"));
        }
        Ok(format!("|sec| = {sec:.2} > {bound:.2}, {dt:?}"))
    });
}

#[test]
fn criterion_2_rearrangement_equivalence() {
    criterion(2, "triangular vs absolute-order agreement 1e-8", || {
        let t0 = Instant::now();
        let mut worst = 0.0f64;
        for (label, p) in reference_pairs() {
            let cutoffs =
                contfrac::cutoff_sequence(&p, series::DEFAULT_Q_MAX).map_err(|e| e.to_string())?;
            for &x in &[0.25, 1.0, 4.0] {
                let tri = series::density_triangular(&p, x, &cutoffs, 1e-12)
                    .map_err(|e| format!("{label}, x={x}: {e}"))?
                    .value;
                let abs = series::density_absolute(&p, x, 1e-12, series::DEFAULT_MAX_SHELL)
                    .map_err(|e| format!("{label}, x={x}: {e}"))?
                    .value;
                let rel = ((tri - abs) / tri).abs();
                worst = worst.max(rel);
                if rel >= 1e-8 {
                    return Err(format!(
                        "{label}, x={x}: tri={tri}, abs={abs}, rel={rel:.2e}"
                    ));
                }
            }
        }
        let dt = t0.elapsed();
        if dt.as_secs() >= 60 {
            return Err(format!("took {dt:?}, budget 1 min"));
        }
        Ok(format!("worst rel diff {worst:.2e}, {dt:?}"))
    });
}

#[test]
fn criterion_3_normalization() {
    criterion(3, "total mass 1 within 1e-4 for four parameter pairs", || {
        let t0 = Instant::now();
        let mut worst = 0.0f64;
        for (label, p) in reference_pairs() {
            let mass = series::total_mass(&p, 1e-10)
                .map_err(|e| format!("{label}: {e}"))?
                .total;
            let gap = (mass - 1.0).abs();
            worst = worst.max(gap);
            if gap >= 1e-4 {
                return Err(format!("{label}: mass = {mass}"));
            }
        }
        let dt = t0.elapsed();
        if dt.as_secs() >= 300 {
            return Err(format!("took {dt:?}, budget 5 min"));
        }
        Ok(format!("worst |mass-1| = {worst:.2e}, {dt:?}"))
    });
}

#[test]
fn criterion_4_monte_carlo_agreement() {
    criterion(4, "series within 5% of bias-extrapolated MC (1e6 x 1e4)", || {
        let t0 = Instant::now();
        let p = params(HpReal::sqrt_u64(2, 256), 0.5);
        let xs = [0.5, 1.0, 2.0];
        let rows = oracle::extrapolated_density(
            &p,
            &xs,
            1_000_000,
            10_000,
            2024,
            &Estimator::Histogram {
                bins: oracle::DEFAULT_BINS,
                range: None,
            },
        )
        .map_err(|e| e.to_string())?;
        let cutoffs =
            contfrac::cutoff_sequence(&p, series::DEFAULT_Q_MAX).map_err(|e| e.to_string())?;
        let mut details = Vec::new();
        for (x, p_mc, se) in rows {
            let p_series = series::density_triangular(&p, x, &cutoffs, 1e-12)
                .map_err(|e| e.to_string())?
                .value;
            let rel = ((p_series - p_mc) / p_series).abs();
            details.push(format!("x={x}: rel={rel:.3} (se {se:.1e})"));
            if rel >= 0.05 {
                return Err(format!(
                    "x = {x}: series {p_series} vs extrapolated MC {p_mc} (se {se:.2e}), rel {rel:.3}"
                ));
            }
        }
        let dt = t0.elapsed();
        if dt.as_secs() >= 1800 {
            return Err(format!("took {dt:?}, budget 30 min"));
        }
        Ok(format!("{}; {dt:?}", details.join(", ")))
    });
}

#[test]
fn criterion_5_parameterization_pin() {
    criterion(5, "P(X>0)=rho at 4 sigma and ECF at 6 points within 5 sigma", || {
        let alpha = 3.0f64.sqrt();
        let rho = 0.9 / alpha;
        let p = params(HpReal::sqrt_u64(3, 256), rho);
        let n = 1_000_000usize;
        let xs = oracle::sample_increments(&p, n, 1.0, 77).map_err(|e| e.to_string())?;
        let frac = xs.iter().filter(|&&v| v > 0.0).count() as f64 / n as f64;
        let sigma = (rho * (1.0 - rho) / n as f64).sqrt();
        let dev = (frac - rho).abs() / sigma;
        if dev >= 4.0 {
            return Err(format!("P(X>0) = {frac} vs rho = {rho}: {dev:.1} sigma"));
        }
        let mut worst_z = 0.0f64;
        for &z in &[0.5f64, -0.5, 1.0, -1.0, 2.0, -2.0] {
            let theta = std::f64::consts::PI * alpha * (0.5 - rho) * z.signum();
            let psi_re = z.abs().powf(alpha) * theta.cos();
            let psi_im = z.abs().powf(alpha) * theta.sin();
            let want_re = (-psi_re).exp() * psi_im.cos();
            let want_im = -(-psi_re).exp() * psi_im.sin();
            let (mut sc, mut ss, mut sc2, mut ss2) = (0.0, 0.0, 0.0, 0.0);
            for &x in &xs {
                let (s, c) = (z * x).sin_cos();
                sc += c;
                ss += s;
                sc2 += c * c;
                ss2 += s * s;
            }
            let nf = n as f64;
            let (mc, ms) = (sc / nf, ss / nf);
            let se_c = ((sc2 / nf - mc * mc) / nf).sqrt();
            let se_s = ((ss2 / nf - ms * ms) / nf).sqrt();
            let z_re = ((mc - want_re) / se_c).abs();
            let z_im = ((ms - want_im) / se_s).abs();
            worst_z = worst_z.max(z_re).max(z_im);
            if z_re >= 5.0 || z_im >= 5.0 {
                return Err(format!(
                    "z = {z}: ECF deviation {z_re:.1}/{z_im:.1} sigma (re/im)"
                ));
            }
        }
        Ok(format!(
            "sign dev {dev:.2} sigma, worst ECF dev {worst_z:.2} sigma"
        ))
    });
}

#[test]
fn criterion_6_lemma_1_trend() {
    criterion(6, "secant-product bound for 5 quadratic irrationals + Buslaev", || {
        let two = BigRational::from_integer(BigInt::from(2));
        let mk = |v: BigRational, bits: u32| HpReal::approx_or_exact(v, Some(bits));
        let taus: Vec<(&str, HpReal)> = vec![
            ("golden/2", mk(HpReal::golden_ratio(256).value() / &two, 255)),
            ("sqrt2/2", mk(HpReal::sqrt_u64(2, 256).value() / &two, 255)),
            ("sqrt3/2", mk(HpReal::sqrt_u64(3, 256).value() / &two, 255)),
            ("sqrt5/2", mk(HpReal::sqrt_u64(5, 256).value() / &two, 255)),
            (
                "(1+sqrt2)/2",
                mk(
                    (HpReal::sqrt_u64(2, 256).value() + BigRational::one()) / &two,
                    255,
                ),
            ),
        ];
        let mut details = Vec::new();
        for (label, tau) in &taus {
            let rep =
                diagnostics::secant_product_report(tau, 14).map_err(|e| format!("{label}: {e}"))?;
            if rep.rows.len() < 6 {
                return Err(format!("{label}: only {} rows resolvable", rep.rows.len()));
            }
            // bounded above: the exponential-bound gap never runs away
            for r in &rep.rows {
                if !(r.log_bound_gap < 10.0) {
                    return Err(format!(
                        "{label}: log_bound_gap = {} at k = {}",
                        r.log_bound_gap, r.k
                    ));
                }
            }
            let half_max = rep.rows[..rep.rows.len() / 2]
                .iter()
                .map(|r| r.log_bound_gap.exp())
                .fold(f64::NEG_INFINITY, f64::max);
            if !(rep.c_estimate <= 2.0 * half_max && half_max <= 2.0 * rep.c_estimate) {
                return Err(format!(
                    "{label}: c_estimate unstable: half {half_max}, full {}",
                    rep.c_estimate
                ));
            }
            details.push(format!("{label}: c={:.3}", rep.c_estimate));
        }
        let phi = HpReal::golden_ratio(256);
        let rows = diagnostics::buslaev_average(&phi, 16).map_err(|e| e.to_string())?;
        let last = rows.last().ok_or("no Buslaev rows")?;
        if !(last.average.abs() < 0.05) {
            return Err(format!(
                "Buslaev average {} at q_k = {}",
                last.average, last.q_k
            ));
        }
        details.push(format!(
            "buslaev(golden) |avg| = {:.4} at q = {}",
            last.average.abs(),
            last.q_k
        ));
        Ok(details.join("; "))
    });
}

#[test]
fn criterion_7_leading_asymptotics() {
    criterion(7, "p(x) approaches its leading term on both sides", || {
        // alpha in (1,2): p(x) x^{1 - alpha rho} -> a_{0,0} as x -> 0
        let p = params(HpReal::sqrt_u64(2, 256), 0.5);
        let cutoffs =
            contfrac::cutoff_sequence(&p, series::DEFAULT_Q_MAX).map_err(|e| e.to_string())?;
        let (_, a00) = series::leading_asymptotic(&p, Side::Zero).map_err(|e| e.to_string())?;
        let a00 = a00.to_f64();
        let mut prev = f64::INFINITY;
        let mut final_gap = f64::NAN;
        for &x in &[0.1, 0.01, 0.001] {
            let d = series::density_triangular(&p, x, &cutoffs, 1e-13)
                .map_err(|e| e.to_string())?
                .value;
            let scaled = d * x.powf(1.0 - p.alpha() * p.rho());
            let gap = ((scaled - a00) / a00).abs();
            if gap >= prev {
                return Err(format!("x -> 0 approach not monotone at x = {x}"));
            }
            prev = gap;
            final_gap = gap;
        }
        if !(final_gap < 1e-3) {
            return Err(format!("x -> 0 final rel gap {final_gap:.2e}"));
        }
        let zero_gap = final_gap;

        // alpha in (0,1): p(x) x^{1 + alpha} -> b_{0,1} as x -> infinity
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let p = params(HpReal::sqrt_rational(&half, 256), 0.5);
        let cutoffs =
            contfrac::cutoff_sequence(&p, series::DEFAULT_Q_MAX).map_err(|e| e.to_string())?;
        let (_, b01) = series::leading_asymptotic(&p, Side::Infinity).map_err(|e| e.to_string())?;
        let b01 = b01.to_f64();
        let mut prev = f64::INFINITY;
        let mut final_gap = f64::NAN;
        // past x ~ 100 the two leading corrections stop competing and the
        // approach is monotone
        for &x in &[300.0, 3000.0, 30000.0] {
            let d = series::density_triangular(&p, x, &cutoffs, 1e-13)
                .map_err(|e| e.to_string())?
                .value;
            let scaled = d * x.powf(1.0 + p.alpha());
            let gap = ((scaled - b01) / b01).abs();
            if gap >= prev {
                return Err(format!("x -> inf approach not monotone at x = {x}"));
            }
            prev = gap;
            final_gap = gap;
        }
        if !(final_gap < 1e-3) {
            return Err(format!("x -> inf final rel gap {final_gap:.2e}"));
        }
        Ok(format!(
            "x->0 gap {zero_gap:.1e}, x->inf gap {final_gap:.1e}"
        ))
    });
}

#[test]
fn criterion_8_property_suite() {
    criterion(8, "deterministic spot checks of the property suite", || {
        // determinant identity along pi's expansion
        let e = contfrac::expand(&HpReal::pi(256), 20, None).map_err(|e| e.to_string())?;
        for n in 1..e.convergents.len() {
            let (p, q) = &e.convergents[n];
            let (pp, qp) = &e.convergents[n - 1];
            let det = p * qp - pp * q;
            let expect = if (n - 1) % 2 == 0 {
                BigInt::one()
            } else {
                -BigInt::one()
            };
            if det != expect {
                return Err(format!("determinant identity failed at n = {n}"));
            }
        }
        // gamma reflection at spot points
        for &z in &[-0.7f64, -3.3, -10.6, 0.2, -25.9] {
            let lhs = signed_log_gamma(z, 1e-9)
                .map_err(|e| e.to_string())?
                .mul(signed_log_gamma(1.0 - z, 1e-9).map_err(|e| e.to_string())?);
            let s = hp::sin_pi_rational(&BigRational::from_float(z).unwrap());
            let rhs = std::f64::consts::PI.ln() - s.abs().ln();
            if (lhs.log_mag - rhs).abs() > 1e-9 * (1.0 + rhs.abs()) {
                return Err(format!("gamma reflection failed at z = {z}"));
            }
        }
        // incremental vs direct coefficients
        let p = params(HpReal::sqrt_u64(2, 256), 0.5);
        let mut grid = CoefficientGrid::new(&p);
        grid.ensure(7, 5).map_err(|e| e.to_string())?;
        let inc = grid.a(7, 5).map_err(|e| e.to_string())?;
        let dir = grid.a_direct(7, 5).map_err(|e| e.to_string())?;
        if inc.sign != dir.sign || (inc.log_mag - dir.log_mag).abs() > 1e-9 {
            return Err("a(7,5) incremental vs direct mismatch".into());
        }
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let p = params(HpReal::sqrt_rational(&half, 256), 0.3);
        let mut grid = CoefficientGrid::new(&p);
        grid.ensure(6, 4).map_err(|e| e.to_string())?;
        let inc = grid.b(6, 4).map_err(|e| e.to_string())?;
        let dir = grid.b_direct(6, 4).map_err(|e| e.to_string())?;
        if inc.sign != dir.sign || (inc.log_mag - dir.log_mag).abs() > 1e-9 {
            return Err("b(6,4) incremental vs direct mismatch".into());
        }
        // histogram normalization and seed determinism
        let p = params(HpReal::sqrt_u64(2, 256), 0.5);
        let est = oracle::estimate_sup_density(&SimulationConfig {
            params: p.clone(),
            n_paths: 10_000,
            n_steps: 100,
            seed: 99,
            estimator: Estimator::Histogram {
                bins: 200,
                range: None,
            },
        })
        .map_err(|e| e.to_string())?;
        let width = (est.range.1 - est.range.0) / 200.0;
        let mass: f64 = est.density.iter().map(|d| d * width).sum();
        if (mass + est.upper_tail_mass - 1.0).abs() > 1e-9 {
            return Err(format!("histogram mass {mass} + tail != 1"));
        }
        let a = oracle::sample_increments(&p, 4096, 1.0, 5).map_err(|e| e.to_string())?;
        let b = oracle::sample_increments(&p, 4096, 1.0, 5).map_err(|e| e.to_string())?;
        if a != b {
            return Err("seed determinism violated".into());
        }
        Ok("determinant, reflection, coefficients, histogram, determinism all pass".into())
    });
}
