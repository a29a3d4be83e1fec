//! Monte Carlo oracle: exact stable increments, supremum-density estimation,
//! and comparison against the series evaluator.
//!
//! Increments are drawn with the Chambers–Mallows–Stuck method written
//! directly in the (alpha, rho) parameterization used by the series. With
//! `phi = pi * alpha * (rho - 1/2)`, V uniform on (-pi/2, pi/2) and W a unit
//! exponential,
//!
//! ```text
//! X = sin(alpha V + phi) / (cos V)^(1/alpha)
//!     * ( cos((1 - alpha) V - phi) / W )^((1-alpha)/alpha)
//! ```
//!
//! has characteristic exponent Psi(z) = |z|^alpha exp(i pi alpha (1/2 - rho)
//! sgn z) and positivity parameter P(X > 0) = rho: the sign of X is the sign
//! of sin(alpha V + phi), which is positive on a V-interval of length
//! pi (1/2 + (rho - 1/2)) = pi rho. An increment over a time step dt is
//! dt^(1/alpha) X by self-similarity.
//!
//! The supremum of the path skeleton is biased low by O(n_steps^(-1/alpha));
//! `extrapolated_density` removes the leading term with a two-level
//! Richardson step at n_steps and n_steps / 4.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::contfrac;
use crate::error::{Error, Result};
use crate::params::StableParams;
use crate::series::{self, DEFAULT_Q_MAX};

/// Default histogram resolution for the supremum density estimate.
pub const DEFAULT_BINS: usize = 400;
/// Upper edge of the automatic histogram range: the empirical 0.995 quantile.
pub const DEFAULT_RANGE_QUANTILE: f64 = 0.995;
/// Paths (or raw samples) handled per deterministic RNG stream.
const CHUNK: usize = 4096;
/// Series evaluation is flagged when it sits more than this many Monte Carlo
/// standard errors from the histogram estimate.
pub const FLAG_Z: f64 = 5.0;

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Estimator {
    Histogram {
        bins: usize,
        /// Bin edges span this interval; `None` means [0, q_0.995].
        range: Option<(f64, f64)>,
    },
    Kde {
        bandwidth: f64,
        grid_points: usize,
    },
}

impl Default for Estimator {
    fn default() -> Self {
        Estimator::Histogram {
            bins: DEFAULT_BINS,
            range: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub params: StableParams,
    pub n_paths: usize,
    /// Skeleton steps per unit-time path; at least 100.
    pub n_steps: usize,
    pub seed: u64,
    pub estimator: Estimator,
}

#[derive(Debug, Clone, Serialize)]
pub struct SupremumEstimate {
    /// Evaluation points (bin centers for the histogram estimator).
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    /// Per-point standard error of `density`.
    pub stderr: Vec<f64>,
    pub range: (f64, f64),
    pub n_paths: usize,
    pub n_steps: usize,
    /// Fraction of suprema beyond `range.1` (histogram only).
    pub upper_tail_mass: f64,
    pub bias_note: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareRow {
    pub x: f64,
    pub p_series: f64,
    pub p_mc: f64,
    pub stderr: f64,
    pub z: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub rows: Vec<CompareRow>,
    pub any_flagged: bool,
}

/// Per-draw constants of the CMS transform.
#[derive(Clone, Copy)]
struct Cms {
    alpha: f64,
    phi: f64,
    inv_alpha: f64,
    /// (1 - alpha) / alpha
    skew_exp: f64,
}

impl Cms {
    fn new(params: &StableParams) -> Self {
        let alpha = params.alpha();
        Cms {
            alpha,
            phi: std::f64::consts::PI * alpha * (params.rho() - 0.5),
            inv_alpha: 1.0 / alpha,
            skew_exp: (1.0 - alpha) / alpha,
        }
    }

    #[inline]
    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        let v = (rng.gen::<f64>() - 0.5) * std::f64::consts::PI;
        // 1 - U in (0, 1] keeps the log finite
        let w = -(1.0 - rng.gen::<f64>()).ln();
        let num = ((1.0 - self.alpha) * v - self.phi).cos();
        // the cosine is positive a.s. for admissible (alpha, rho); clamp the
        // measure-zero boundary so powf never sees a negative base
        let num = num.max(f64::MIN_POSITIVE);
        let w = w.max(f64::MIN_POSITIVE);
        (self.alpha * v + self.phi).sin() / v.cos().powf(self.inv_alpha)
            * (num / w).powf(self.skew_exp)
    }
}

/// `n` independent increments of the process over a time step `dt`.
///
/// Deterministic in `seed`: samples are produced in fixed-size chunks, one
/// ChaCha8 stream per chunk, and merged in chunk order, so the output is
/// bit-identical regardless of thread count.
pub fn sample_increments(params: &StableParams, n: usize, dt: f64, seed: u64) -> Result<Vec<f64>> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidConfig(format!("dt must be positive, got {dt}")));
    }
    let cms = Cms::new(params);
    let scale = dt.powf(cms.inv_alpha);
    let n_chunks = n.div_ceil(CHUNK);
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(n_chunks);
    (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c as u64);
            let len = CHUNK.min(n - c * CHUNK);
            (0..len).map(|_| scale * cms.draw(&mut rng)).collect::<Vec<f64>>()
        })
        .collect_into_vec(&mut out);
    Ok(out.concat())
}

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Supremum and terminal value of each simulated unit-time path skeleton.
///
/// The supremum is over the skeleton including time 0, so it is always
/// >= max(terminal, 0). Chunked exactly like [`sample_increments`].
pub fn simulate_paths(
    params: &StableParams,
    n_paths: usize,
    n_steps: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    if n_steps < 100 {
        return Err(Error::InvalidConfig(format!(
            "n_steps must be >= 100, got {n_steps}"
        )));
    }
    if n_paths == 0 {
        return Err(Error::InvalidConfig("n_paths must be >= 1".into()));
    }
    let cms = Cms::new(params);
    let scale = (1.0 / n_steps as f64).powf(cms.inv_alpha);
    let n_chunks = n_paths.div_ceil(CHUNK);
    let mut out: Vec<Vec<(f64, f64)>> = Vec::with_capacity(n_chunks);
    (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c as u64);
            let len = CHUNK.min(n_paths - c * CHUNK);
            (0..len)
                .map(|_| {
                    let mut sum = 0.0f64;
                    let mut max = 0.0f64;
                    for _ in 0..n_steps {
                        sum += cms.draw(&mut rng);
                        if sum > max {
                            max = sum;
                        }
                    }
                    (scale * max, scale * sum)
                })
                .collect::<Vec<_>>()
        })
        .collect_into_vec(&mut out);
    Ok(out.concat())
}

/// Suprema of `n_paths` unit-time path skeletons.
pub fn simulate_suprema(
    params: &StableParams,
    n_paths: usize,
    n_steps: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    Ok(simulate_paths(params, n_paths, n_steps, seed)?
        .into_iter()
        .map(|(s, _)| s)
        .collect())
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let idx = ((sorted.len() as f64 - 1.0) * q).round() as usize;
    sorted[idx.min(sorted.len() - 1)]
}

/// Density estimate for the supremum from freshly simulated paths.
pub fn estimate_sup_density(config: &SimulationConfig) -> Result<SupremumEstimate> {
    let sups = simulate_suprema(&config.params, config.n_paths, config.n_steps, config.seed)?;
    estimate_from_samples(&sups, config)
}

/// Density estimate from an existing supremum sample (lets callers reuse one
/// expensive simulation for several estimators).
pub fn estimate_from_samples(sups: &[f64], config: &SimulationConfig) -> Result<SupremumEstimate> {
    if sups.is_empty() {
        return Err(Error::InvalidConfig("empty sample".into()));
    }
    let n = sups.len();
    let bias_note = format!(
        "suprema taken over a {}-step skeleton; the estimate is biased low by \
         O(n_steps^(-1/alpha)) ~ {:.2e}",
        config.n_steps,
        (config.n_steps as f64).powf(-1.0 / config.params.alpha())
    );
    match config.estimator {
        Estimator::Histogram { bins, range } => {
            if bins == 0 {
                return Err(Error::InvalidConfig("bins must be >= 1".into()));
            }
            let (lo, hi) = match range {
                Some((lo, hi)) if hi > lo => (lo, hi),
                Some((lo, hi)) => {
                    return Err(Error::InvalidConfig(format!(
                        "empty histogram range [{lo}, {hi}]"
                    )))
                }
                None => {
                    let mut sorted = sups.to_vec();
                    sorted.sort_by(|a, b| a.total_cmp(b));
                    (0.0, quantile(&sorted, DEFAULT_RANGE_QUANTILE))
                }
            };
            let width = (hi - lo) / bins as f64;
            let mut counts = vec![0u64; bins];
            let mut above = 0u64;
            for &s in sups {
                if s >= hi {
                    above += 1;
                } else if s >= lo {
                    counts[((s - lo) / width) as usize] += 1;
                }
            }
            let nf = n as f64;
            let mut grid = Vec::with_capacity(bins);
            let mut density = Vec::with_capacity(bins);
            let mut stderr = Vec::with_capacity(bins);
            for (i, &c) in counts.iter().enumerate() {
                let p = c as f64 / nf;
                grid.push(lo + (i as f64 + 0.5) * width);
                density.push(p / width);
                // binomial error on the bin count
                stderr.push((p * (1.0 - p) / nf).sqrt() / width);
            }
            Ok(SupremumEstimate {
                grid,
                density,
                stderr,
                range: (lo, hi),
                n_paths: n,
                n_steps: config.n_steps,
                upper_tail_mass: above as f64 / nf,
                bias_note,
            })
        }
        Estimator::Kde {
            bandwidth,
            grid_points,
        } => {
            if !(bandwidth > 0.0) || grid_points < 2 {
                return Err(Error::InvalidConfig(
                    "kde needs bandwidth > 0 and grid_points >= 2".into(),
                ));
            }
            let mut sorted = sups.to_vec();
            sorted.sort_by(|a, b| a.total_cmp(b));
            let (lo, hi) = (0.0, quantile(&sorted, DEFAULT_RANGE_QUANTILE));
            let step = (hi - lo) / (grid_points - 1) as f64;
            let nf = n as f64;
            let norm = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * bandwidth * nf);
            // integral of the squared Gaussian kernel, for the variance
            let kernel_l2 = 0.5 / std::f64::consts::PI.sqrt();
            let mut grid = Vec::with_capacity(grid_points);
            let mut density = Vec::with_capacity(grid_points);
            let mut stderr = Vec::with_capacity(grid_points);
            for i in 0..grid_points {
                let x = lo + i as f64 * step;
                let mut acc = 0.0;
                for &s in sups {
                    let u = (x - s) / bandwidth;
                    if u.abs() < 8.0 {
                        acc += (-0.5 * u * u).exp();
                    }
                }
                let d = norm * acc;
                grid.push(x);
                density.push(d);
                stderr.push((d * kernel_l2 / (nf * bandwidth)).sqrt());
            }
            Ok(SupremumEstimate {
                grid,
                density,
                stderr,
                range: (lo, hi),
                n_paths: n,
                n_steps: config.n_steps,
                upper_tail_mass: 0.0,
                bias_note,
            })
        }
    }
}

/// The estimate (value, standard error) at `x`, read off the nearest grid
/// cell; errors with [`Error::OutOfRange`] when `x` is outside the covered
/// interval.
pub fn density_at(est: &SupremumEstimate, x: f64) -> Result<(f64, f64)> {
    let (lo, hi) = est.range;
    if !(x >= lo && x < hi) {
        return Err(Error::OutOfRange { x, lo, hi });
    }
    let width = (hi - lo) / est.grid.len() as f64;
    let i = (((x - lo) / width) as usize).min(est.grid.len() - 1);
    Ok((est.density[i], est.stderr[i]))
}

/// Two-level Richardson extrapolation of the histogram density at `xs`.
///
/// Runs the simulation at `n_steps` and `n_steps / 4` with paired seeds
/// (`seed`, `seed + 1`). The skeleton supremum is biased like
/// c n^(-1/alpha), so with r = 4^(-1/alpha) the combination
/// (p_fine - r p_coarse) / (1 - r) cancels the leading bias term.
/// Returns (x, extrapolated density, propagated stderr) rows.
pub fn extrapolated_density(
    params: &StableParams,
    xs: &[f64],
    n_paths: usize,
    n_steps: usize,
    seed: u64,
    estimator: &Estimator,
) -> Result<Vec<(f64, f64, f64)>> {
    if n_steps / 4 < 100 {
        return Err(Error::InvalidConfig(format!(
            "n_steps / 4 must still be >= 100, got n_steps = {n_steps}"
        )));
    }
    let fine = estimate_sup_density(&SimulationConfig {
        params: params.clone(),
        n_paths,
        n_steps,
        seed,
        estimator: estimator.clone(),
    })?;
    let coarse = estimate_sup_density(&SimulationConfig {
        params: params.clone(),
        n_paths,
        n_steps: n_steps / 4,
        seed: seed.wrapping_add(1),
        estimator: estimator.clone(),
    })?;
    let r = 4.0f64.powf(-1.0 / params.alpha());
    let mut out = Vec::with_capacity(xs.len());
    for &x in xs {
        let (pf, sf) = density_at(&fine, x)?;
        let (pc, sc) = density_at(&coarse, x)?;
        let p = (pf - r * pc) / (1.0 - r);
        let se = (sf * sf + r * r * sc * sc).sqrt() / (1.0 - r);
        out.push((x, p, se));
    }
    Ok(out)
}

/// Series density vs. a Monte Carlo estimate at each `x`, with z-scores in
/// Monte Carlo standard errors; rows with |z| > [`FLAG_Z`] are flagged.
pub fn compare_with_series(
    params: &StableParams,
    xs: &[f64],
    mc: &SupremumEstimate,
    series_tol: f64,
) -> Result<CompareReport> {
    let cutoffs = contfrac::cutoff_sequence(params, DEFAULT_Q_MAX)?;
    let mut rows = Vec::with_capacity(xs.len());
    let mut any_flagged = false;
    for &x in xs {
        let p_series = series::density_triangular(params, x, &cutoffs, series_tol)?.value;
        let (p_mc, stderr) = density_at(mc, x)?;
        let z = if stderr > 0.0 {
            (p_series - p_mc) / stderr
        } else {
            f64::INFINITY
        };
        let flagged = !(z.abs() <= FLAG_Z);
        any_flagged |= flagged;
        rows.push(CompareRow {
            x,
            p_series,
            p_mc,
            stderr,
            z,
            flagged,
        });
    }
    Ok(CompareReport { rows, any_flagged })
}
