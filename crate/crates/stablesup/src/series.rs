//! The two summation schemes for the supremum density, plus the dual
//! asymptotic expansions and analytic normalization built on them.
//!
//! For alpha in (1, 2) the convergent representation is
//!     p(x) = x^{alpha rho - 1} sum a_{m,n} x^{m + alpha n},
//! and for alpha in (0, 1)
//!     p(x) = x^{-1-alpha} sum b_{m,n+1} x^{-(m + alpha n)}.
//! The rearranged (triangular) scheme sums lattice points inside
//! m + 1 + alpha (n + 1/2) < q_k for consecutive convergent denominators
//! q_k(2/alpha); the absolute scheme sums unit shells of t = m + alpha n
//! ascending. Each coefficient family also serves as an asymptotic
//! expansion on the opposite side of its convergence region, truncated at
//! the envelope minimum; the tail guard, the normalization integral, and
//! the CDF helper are built from those four pieces.

use serde::Serialize;

use crate::coeffs::CoefficientGrid;
use crate::contfrac;
use crate::error::{Error, Result};
use crate::params::{Branch, StableParams};
use crate::signedlog::{CompensatedSum, SignedLogValue};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_Q_MAX: u64 = 4000;
pub const DEFAULT_MAX_SHELL: usize = 400;
/// Outside [X_RANGE_LO, X_RANGE_HI] the series is hopeless in f64 and the
/// one-term asymptotic is returned with a TailRegime warning.
pub const X_RANGE_LO: f64 = 1e-6;
pub const X_RANGE_HI: f64 = 1e6;
/// A shell whose magnitude jumps by this factor over its two predecessors
/// (beyond shell 10) flags Liouville-type behavior: benign irrationals
/// produce shell-to-shell ratios of at most ~1e5 from small convergent
/// denominators, while constructed Liouville-type alpha spike by 1e70+.
const SPIKE_FACTOR: f64 = 1e10;
const SPIKE_ONSET_SHELL: usize = 10;
/// Enumeration budget (in t = m + alpha n) for the divergent expansions.
const ASYM_T_BUDGET: f64 = 240.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Triangular,
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Converged,
    NotConverged,
    CutoffCapped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Zero,
    Infinity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    /// Cancellation produced a (tiny) negative density; clamped to zero.
    NegativeDensity { raw: f64 },
    /// Term magnitudes spiked along a shell: absolute-order summation is
    /// not trustworthy for this alpha.
    AbsoluteOrderUnsafe { shell: usize, spike_ratio: f64 },
    /// x fell outside the summable range; the value is the one-term
    /// asymptotic on that side.
    TailRegime { side: Side },
    /// The cutoff list ended before the stopping rule fired.
    CutoffExhausted { q_last: u64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceEntry {
    pub q_k: u64,
    /// Cumulative lattice points inside the triangle at this cutoff.
    pub terms_added: usize,
    /// Density estimate (prefactor applied) at this cutoff.
    pub partial_sum: f64,
    /// |partial_sum - previous partial_sum|; for the first entry, the
    /// magnitude of the partial sum itself.
    pub delta: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TriangularSumTrace {
    pub x: f64,
    pub branch: Branch,
    pub entries: Vec<TraceEntry>,
    pub verdict: Verdict,
    pub estimated_value: f64,
    pub estimated_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DensityResult {
    pub value: f64,
    pub method: Method,
    pub trace: Option<TriangularSumTrace>,
    pub warnings: Vec<Warning>,
}

/// Normalization report: total = head + tail, where the two pieces come
/// from term-wise analytic integration of the convergent series on its own
/// side and the envelope-truncated asymptotic family on the other, joined
/// at switch_x.
#[derive(Debug, Clone, Serialize)]
pub struct MassReport {
    pub total: f64,
    pub switch_x: f64,
    pub head: f64,
    pub tail: f64,
    /// Relative disagreement of the two density representations at
    /// switch_x; an internal accuracy indicator for the split.
    pub switch_rel_diff: f64,
}

/// Which coefficient family a sum ranges over. `A` weights x^{+t}, `B`
/// weights x^{-t} through b_{m,n+1}; each is convergent on one branch and
/// asymptotic on the other.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Family {
    A,
    B,
}

fn coeff(grid: &CoefficientGrid, family: Family, m: usize, n: usize) -> Result<SignedLogValue> {
    match family {
        Family::A => grid.a(m, n),
        Family::B => grid.b(m, n + 1),
    }
}

fn ensure_for(
    grid: &mut CoefficientGrid,
    family: Family,
    m_max: usize,
    n_max: usize,
) -> Result<()> {
    match family {
        Family::A => grid.ensure(m_max, n_max),
        Family::B => grid.ensure(m_max, n_max + 1),
    }
}

fn convergent_family(branch: Branch) -> Family {
    match branch {
        Branch::HighAlpha => Family::A,
        Branch::LowAlpha => Family::B,
    }
}

/// sign * exp(log_mag + ln_weight) with an overflow guard.
fn weighted_term(c: SignedLogValue, ln_w: f64) -> Result<f64> {
    let e = c.log_mag + ln_w;
    if e > 700.0 {
        return Err(Error::PrecisionExhausted(format!(
            "term magnitude exp({e:.1}) overflows f64"
        )));
    }
    Ok(c.sign as f64 * e.exp())
}

/// Lattice points with q_lo <= m + 1 + alpha (n + 1/2) < q_hi, sorted by
/// ascending t = m + alpha n. Membership uses the literal Theorem-1
/// expression in working precision; boundary ties go outside (strict `<`).
fn annulus_points(alpha: f64, q_lo: f64, q_hi: f64) -> Vec<(usize, usize, f64)> {
    let mut pts = Vec::new();
    let mut n = 0usize;
    loop {
        let base = 1.0 + alpha * (n as f64 + 0.5);
        if base >= q_hi {
            break;
        }
        let mut m = if base >= q_lo {
            0usize
        } else {
            (q_lo - base).floor().max(0.0) as usize
        };
        while m as f64 + base < q_lo {
            m += 1;
        }
        while m > 0 && (m - 1) as f64 + base >= q_lo {
            m -= 1;
        }
        while (m as f64) + base < q_hi {
            pts.push((m, n, m as f64 + alpha * n as f64));
            m += 1;
        }
        n += 1;
    }
    pts.sort_by(|a, b| a.2.partial_cmp(&b.2).unwrap());
    pts
}

/// Points with t = m + alpha n < t_max, sorted by ascending t.
fn points_below_t(alpha: f64, t_max: f64) -> Vec<(usize, usize, f64)> {
    let mut pts = Vec::new();
    let mut n = 0usize;
    while alpha * (n as f64) < t_max {
        let an = alpha * n as f64;
        let mut m = 0usize;
        while m as f64 + an < t_max {
            pts.push((m, n, m as f64 + an));
            m += 1;
        }
        n += 1;
    }
    pts.sort_by(|a, b| a.2.partial_cmp(&b.2).unwrap());
    pts
}

struct TriRun {
    /// (q_k, cumulative points, raw compensated sum) per accepted cutoff.
    raw_sums: Vec<(u64, usize, f64)>,
    final_sum: f64,
    verdict: Verdict,
}

/// One pass of the triangular scheme with an arbitrary positive log-space
/// weight ln_w(t); used for both point values and term-wise integrals.
fn triangular_run(
    grid: &mut CoefficientGrid,
    family: Family,
    cutoffs: &[u64],
    tol: Option<f64>,
    ln_w: impl Fn(f64) -> f64,
) -> Result<TriRun> {
    let alpha = grid.params().alpha();
    let mut acc = CompensatedSum::new();
    let mut raw_sums: Vec<(u64, usize, f64)> = Vec::new();
    let mut count = 0usize;
    let mut prev_q = 0.0f64;
    let mut small_deltas = 0usize;
    let mut verdict = if tol.is_some() {
        Verdict::NotConverged
    } else {
        Verdict::CutoffCapped
    };
    for &q in cutoffs {
        let qf = q as f64;
        let pts = annulus_points(alpha, prev_q, qf);
        prev_q = qf;
        let m_hi = pts.iter().map(|p| p.0).max().unwrap_or(0);
        let n_hi = pts.iter().map(|p| p.1).max().unwrap_or(0);
        ensure_for(grid, family, m_hi, n_hi)?;
        for &(m, n, t) in &pts {
            let c = coeff(grid, family, m, n)?;
            if c.is_zero() {
                continue;
            }
            acc.add(weighted_term(c, ln_w(t))?);
        }
        count += pts.len();
        let s = acc.value();
        if let Some(tol) = tol {
            if let Some(&(_, _, prev)) = raw_sums.last() {
                let delta = (s - prev).abs();
                if delta < tol * s.abs().max(1.0) {
                    small_deltas += 1;
                } else {
                    small_deltas = 0;
                }
            }
        }
        raw_sums.push((q, count, s));
        if small_deltas >= 2 {
            verdict = Verdict::Converged;
            break;
        }
    }
    Ok(TriRun {
        final_sum: acc.value(),
        raw_sums,
        verdict,
    })
}

/// Envelope-truncated evaluation of a (generally divergent) expansion:
/// terms are walked in ascending t; if the magnitudes pass through a global
/// minimum the sum is cut there and the first omitted term is the error
/// estimate. Returns (value, estimated absolute error).
fn asymptotic_sum(
    grid: &mut CoefficientGrid,
    family: Family,
    ln_w: impl Fn(f64) -> f64,
) -> Result<(f64, f64)> {
    let alpha = grid.params().alpha();
    let pts = points_below_t(alpha, ASYM_T_BUDGET);
    let m_hi = pts.iter().map(|p| p.0).max().unwrap_or(0);
    let n_hi = pts.iter().map(|p| p.1).max().unwrap_or(0);
    ensure_for(grid, family, m_hi, n_hi)?;

    let mut terms: Vec<f64> = Vec::new();
    let mut min_abs = f64::INFINITY;
    let mut min_idx = 0usize;
    let mut partial = 0.0f64;
    let mut tiny_streak = 0usize;
    let mut numerically_converged = false;
    for &(m, n, t) in &pts {
        let c = coeff(grid, family, m, n)?;
        let v = if c.is_zero() {
            0.0
        } else {
            let e = c.log_mag + ln_w(t);
            if e > 700.0 {
                break; // far past the envelope minimum
            }
            c.sign as f64 * e.exp()
        };
        terms.push(v);
        partial += v;
        let a = v.abs();
        if a > 0.0 && a < min_abs {
            min_abs = a;
            min_idx = terms.len() - 1;
        }
        if a < 1e-17 * partial.abs().max(f64::MIN_POSITIVE) {
            tiny_streak += 1;
            if tiny_streak >= 5 {
                numerically_converged = true;
                break;
            }
        } else {
            tiny_streak = 0;
        }
        if a > 1e6 * min_abs && terms.len() > min_idx + 3 {
            break; // safely past the minimum
        }
    }
    if terms.is_empty() {
        return Err(Error::PrecisionExhausted(
            "asymptotic expansion produced no usable terms".into(),
        ));
    }
    if numerically_converged {
        let mut acc = CompensatedSum::new();
        for &v in &terms {
            acc.add(v);
        }
        return Ok((acc.value(), terms.last().unwrap().abs()));
    }
    let mut acc = CompensatedSum::new();
    for &v in &terms[..min_idx] {
        acc.add(v);
    }
    Ok((acc.value(), terms[min_idx].abs()))
}

/// log-prefactor of the convergent representation on this branch.
fn prefactor_ln(params: &StableParams, x: f64) -> f64 {
    match params.branch() {
        Branch::HighAlpha => (params.alpha() * params.rho() - 1.0) * x.ln(),
        Branch::LowAlpha => (-1.0 - params.alpha()) * x.ln(),
    }
}

/// Point-value weight of family `family` at position x, as ln.
fn point_ln_w(family: Family, x: f64) -> impl Fn(f64) -> f64 {
    let ln_x = x.ln();
    move |t: f64| match family {
        Family::A => t * ln_x,
        Family::B => -t * ln_x,
    }
}

/// Full asymptotic point value of family `family` at x (prefactor applied).
fn asymptotic_density(
    grid: &mut CoefficientGrid,
    family: Family,
    x: f64,
) -> Result<(f64, f64)> {
    let params = grid.params().clone();
    let pre = match family {
        Family::A => (params.alpha() * params.rho() - 1.0) * x.ln(),
        Family::B => (-1.0 - params.alpha()) * x.ln(),
    };
    let (raw, err) = asymptotic_sum(grid, family, point_ln_w(family, x))?;
    Ok((raw * pre.exp(), err * pre.exp()))
}

fn tail_regime_result(params: &StableParams, x: f64, method: Method) -> Result<DensityResult> {
    let mut grid = CoefficientGrid::new(params);
    grid.ensure(0, 1)?;
    let (side, value) = if x < X_RANGE_LO {
        // p(x) ~ a_{0,0} x^{alpha rho - 1} as x -> 0 on either branch
        let a00 = grid.a(0, 0)?;
        let ln_v = a00.log_mag + (params.alpha() * params.rho() - 1.0) * x.ln();
        (Side::Zero, a00.sign as f64 * ln_v.exp())
    } else {
        // p(x) ~ b_{0,1} x^{-1-alpha} as x -> infinity
        let b01 = grid.b(0, 1)?;
        let ln_v = b01.log_mag + (-1.0 - params.alpha()) * x.ln();
        (Side::Infinity, b01.sign as f64 * ln_v.exp())
    };
    Ok(DensityResult {
        value,
        method,
        trace: None,
        warnings: vec![Warning::TailRegime { side }],
    })
}

fn clamp_density(value: f64, warnings: &mut Vec<Warning>) -> f64 {
    if value < 0.0 {
        warnings.push(Warning::NegativeDensity { raw: value });
        0.0
    } else {
        value
    }
}

fn build_trace(
    params: &StableParams,
    x: f64,
    run: &TriRun,
    pre: f64,
) -> TriangularSumTrace {
    let mut entries = Vec::with_capacity(run.raw_sums.len());
    let mut prev: Option<f64> = None;
    for &(q, count, raw) in &run.raw_sums {
        let partial = raw * pre;
        let delta = match prev {
            Some(p) => (partial - p).abs(),
            None => partial.abs(),
        };
        entries.push(TraceEntry {
            q_k: q,
            terms_added: count,
            partial_sum: partial,
            delta,
        });
        prev = Some(partial);
    }
    let estimated_value = run.final_sum * pre;
    let estimated_error = entries.last().map_or(f64::NAN, |e| e.delta);
    TriangularSumTrace {
        x,
        branch: params.branch(),
        entries,
        verdict: run.verdict,
        estimated_value,
        estimated_error,
    }
}

/// Theorem-1 rearranged evaluation of p(x) along the given cutoffs.
pub fn density_triangular(
    params: &StableParams,
    x: f64,
    cutoffs: &[u64],
    tol: f64,
) -> Result<DensityResult> {
    params.require_irrational()?;
    if !(x > 0.0) {
        return Err(Error::NonPositiveInput(x));
    }
    if cutoffs.is_empty() {
        return Err(Error::InvalidConfig("empty cutoff list".into()));
    }
    if !(X_RANGE_LO..=X_RANGE_HI).contains(&x) {
        return tail_regime_result(params, x, Method::Triangular);
    }
    let family = convergent_family(params.branch());
    let mut grid = CoefficientGrid::new(params);
    let run = triangular_run(&mut grid, family, cutoffs, Some(tol), point_ln_w(family, x))?;
    let pre = prefactor_ln(params, x).exp();
    let trace = build_trace(params, x, &run, pre);
    let mut warnings = Vec::new();
    if run.verdict != Verdict::Converged {
        warnings.push(Warning::CutoffExhausted {
            q_last: *cutoffs.last().unwrap(),
        });
    }
    let value = clamp_density(run.final_sum * pre, &mut warnings);
    Ok(DensityResult {
        value,
        method: Method::Triangular,
        trace: Some(trace),
        warnings,
    })
}

/// Absolute-order (ascending unit shells of t) evaluation of p(x).
pub fn density_absolute(
    params: &StableParams,
    x: f64,
    tol: f64,
    max_shell: usize,
) -> Result<DensityResult> {
    params.require_irrational()?;
    if !(x > 0.0) {
        return Err(Error::NonPositiveInput(x));
    }
    if !(X_RANGE_LO..=X_RANGE_HI).contains(&x) {
        return tail_regime_result(params, x, Method::Absolute);
    }
    let family = convergent_family(params.branch());
    let alpha = params.alpha();
    let mut grid = CoefficientGrid::new(params);
    let ln_w = point_ln_w(family, x);
    let mut acc = CompensatedSum::new();
    let mut shell_hist: Vec<f64> = Vec::new();
    let mut warnings: Vec<Warning> = Vec::new();
    let mut quiet_shells = 0usize;
    let mut converged = false;
    for shell in 0..max_shell {
        let lo = shell as f64;
        let hi = lo + 1.0;
        let mut pts = Vec::new();
        let mut n = 0usize;
        while alpha * (n as f64) < hi {
            let an = alpha * n as f64;
            let mut m = (lo - an).max(0.0).floor() as usize;
            while m as f64 + an < lo {
                m += 1;
            }
            while m > 0 && (m - 1) as f64 + an >= lo {
                m -= 1;
            }
            while (m as f64) + an < hi {
                pts.push((m, n, m as f64 + an));
                m += 1;
            }
            n += 1;
        }
        pts.sort_by(|a, b| a.2.partial_cmp(&b.2).unwrap());
        let m_hi = pts.iter().map(|p| p.0).max().unwrap_or(0);
        let n_hi = pts.iter().map(|p| p.1).max().unwrap_or(0);
        ensure_for(&mut grid, family, m_hi, n_hi)?;
        let mut shell_abs = 0.0f64;
        for &(m, n, t) in &pts {
            let c = coeff(&mut grid, family, m, n)?;
            if c.is_zero() {
                continue;
            }
            let v = weighted_term(c, ln_w(t))?;
            acc.add(v);
            shell_abs += v.abs();
        }
        if shell > SPIKE_ONSET_SHELL && shell_hist.len() >= 2 {
            let recent = shell_hist[shell_hist.len() - 1].max(shell_hist[shell_hist.len() - 2]);
            if recent > 0.0 && shell_abs > SPIKE_FACTOR * recent {
                let already = warnings
                    .iter()
                    .any(|w| matches!(w, Warning::AbsoluteOrderUnsafe { .. }));
                if !already {
                    warnings.push(Warning::AbsoluteOrderUnsafe {
                        shell,
                        spike_ratio: shell_abs / recent,
                    });
                }
            }
        }
        shell_hist.push(shell_abs);
        if shell_abs < tol * acc.value().abs().max(1.0) {
            quiet_shells += 1;
            if quiet_shells >= 3 {
                converged = true;
                break;
            }
        } else {
            quiet_shells = 0;
        }
    }
    let pre = prefactor_ln(params, x).exp();
    let value = clamp_density(acc.value() * pre, &mut warnings);
    let result = DensityResult {
        value,
        method: Method::Absolute,
        trace: None,
        warnings,
    };
    if !converged {
        return Err(Error::ShellBudgetExhausted {
            max_shell,
            partial: Box::new(result),
        });
    }
    Ok(result)
}

/// Per-cutoff trace over the full cutoff list, no stopping rule applied.
pub fn partial_sum_trace(
    params: &StableParams,
    x: f64,
    cutoffs: &[u64],
) -> Result<TriangularSumTrace> {
    params.require_irrational()?;
    if !(x > 0.0) {
        return Err(Error::NonPositiveInput(x));
    }
    if cutoffs.is_empty() {
        return Err(Error::InvalidConfig("empty cutoff list".into()));
    }
    let family = convergent_family(params.branch());
    let mut grid = CoefficientGrid::new(params);
    let run = triangular_run(&mut grid, family, cutoffs, None, point_ln_w(family, x))?;
    let pre = prefactor_ln(params, x).exp();
    Ok(build_trace(params, x, &run, pre))
}

/// Leading-order behavior of p(x) on the side covered by the convergent
/// expansion of this branch: (exponent, coefficient).
pub fn leading_asymptotic(params: &StableParams, side: Side) -> Result<(f64, SignedLogValue)> {
    params.require_irrational()?;
    let mut grid = CoefficientGrid::new(params);
    grid.ensure(0, 1)?;
    match (params.branch(), side) {
        (Branch::HighAlpha, Side::Zero) => Ok((
            params.alpha() * params.rho() - 1.0,
            grid.a(0, 0)?,
        )),
        (Branch::LowAlpha, Side::Infinity) => Ok((-1.0 - params.alpha(), grid.b(0, 1)?)),
        (b, s) => Err(Error::Unsupported(format!(
            "branch {b:?} has no convergent expansion at side {s:?}"
        ))),
    }
}

/// ln-weight of the term-wise integral: int_0^X x^{alpha rho - 1 + t} dx.
fn head_integral_ln_w(params: &StableParams, x_split: f64) -> impl Fn(f64) -> f64 {
    let ar = params.alpha() * params.rho();
    let ln_x = x_split.ln();
    move |t: f64| (ar + t) * ln_x - (ar + t).ln()
}

/// ln-weight of the term-wise integral: int_X^inf x^{-1-alpha-t} dx.
fn tail_integral_ln_w(params: &StableParams, x_split: f64) -> impl Fn(f64) -> f64 {
    let alpha = params.alpha();
    let ln_x = x_split.ln();
    move |t: f64| -(alpha + t) * ln_x - (alpha + t).ln()
}

/// Pick the hand-off point between the convergent and asymptotic
/// representations by minimizing their pointwise disagreement.
fn pick_switch_x(
    params: &StableParams,
    cutoffs: &[u64],
    tol: f64,
) -> Result<(f64, f64)> {
    let candidates: &[f64] = match params.branch() {
        Branch::HighAlpha => &[2.0, 2.5, 3.0, 3.5, 4.0, 5.0],
        Branch::LowAlpha => &[0.05, 0.08, 0.1, 0.125, 0.15, 0.2, 0.3],
    };
    let conv_family = convergent_family(params.branch());
    let asym_family = match conv_family {
        Family::A => Family::B,
        Family::B => Family::A,
    };
    let mut best = (candidates[0], f64::INFINITY);
    for &x in candidates {
        let mut grid = CoefficientGrid::new(params);
        let run = triangular_run(&mut grid, conv_family, cutoffs, Some(tol), point_ln_w(conv_family, x))?;
        let conv = run.final_sum * prefactor_ln(params, x).exp();
        let (asym, _) = asymptotic_density(&mut grid, asym_family, x)?;
        let rel = ((conv - asym) / conv.abs().max(f64::MIN_POSITIVE)).abs();
        if rel < best.1 {
            best = (x, rel);
        }
    }
    Ok(best)
}

/// Total mass int_0^inf p(x) dx by fully analytic term-wise integration.
pub fn total_mass(params: &StableParams, tol: f64) -> Result<MassReport> {
    params.require_irrational()?;
    let cutoffs = contfrac::cutoff_sequence(params, DEFAULT_Q_MAX)?;
    let (switch_x, switch_rel_diff) = pick_switch_x(params, &cutoffs, tol)?;
    let mut grid = CoefficientGrid::new(params);
    let (head, tail) = match params.branch() {
        Branch::HighAlpha => {
            let run = triangular_run(
                &mut grid,
                Family::A,
                &cutoffs,
                Some(tol),
                head_integral_ln_w(params, switch_x),
            )?;
            let (tail, _) =
                asymptotic_sum(&mut grid, Family::B, tail_integral_ln_w(params, switch_x))?;
            (run.final_sum, tail)
        }
        Branch::LowAlpha => {
            let run = triangular_run(
                &mut grid,
                Family::B,
                &cutoffs,
                Some(tol),
                tail_integral_ln_w(params, switch_x),
            )?;
            let (head, _) =
                asymptotic_sum(&mut grid, Family::A, head_integral_ln_w(params, switch_x))?;
            (head, run.final_sum)
        }
    };
    Ok(MassReport {
        total: head + tail,
        switch_x,
        head,
        tail,
        switch_rel_diff,
    })
}

/// P(S_1 <= x) by the same analytic pieces as `total_mass`.
pub fn cumulative_below(params: &StableParams, x: f64, tol: f64) -> Result<f64> {
    params.require_irrational()?;
    if !(x > 0.0) {
        return Err(Error::NonPositiveInput(x));
    }
    let cutoffs = contfrac::cutoff_sequence(params, DEFAULT_Q_MAX)?;
    let mass = total_mass(params, tol)?;
    let mut grid = CoefficientGrid::new(params);
    match params.branch() {
        Branch::HighAlpha => {
            if x <= mass.switch_x {
                let run = triangular_run(
                    &mut grid,
                    Family::A,
                    &cutoffs,
                    Some(tol),
                    head_integral_ln_w(params, x),
                )?;
                Ok(run.final_sum)
            } else {
                let (tail, _) =
                    asymptotic_sum(&mut grid, Family::B, tail_integral_ln_w(params, x))?;
                Ok(mass.total - tail)
            }
        }
        Branch::LowAlpha => {
            if x >= mass.switch_x {
                let run = triangular_run(
                    &mut grid,
                    Family::B,
                    &cutoffs,
                    Some(tol),
                    tail_integral_ln_w(params, x),
                )?;
                Ok(mass.total - run.final_sum)
            } else {
                let (head, _) =
                    asymptotic_sum(&mut grid, Family::A, head_integral_ln_w(params, x))?;
                Ok(head)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hp::HpReal;
    use crate::params::ParamOptions;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn sqrt2_params() -> StableParams {
        StableParams::new(HpReal::sqrt_u64(2, 256), 0.5, ParamOptions::default()).unwrap()
    }

    fn inv_sqrt2_params(rho: f64) -> StableParams {
        let a = HpReal::sqrt_rational(&BigRational::new(BigInt::from(1), BigInt::from(2)), 256);
        StableParams::new(a, rho, ParamOptions::default()).unwrap()
    }

    fn cutoffs(p: &StableParams) -> Vec<u64> {
        contfrac::cutoff_sequence(p, DEFAULT_Q_MAX).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn high_alpha_reference_values() {
        // alpha = sqrt(2), rho = 1/2; reference densities to 1e-13
        let p = sqrt2_params();
        let cs = cutoffs(&p);
        for (x, expect, tol) in [
            (0.25, 0.69343460885618189, 1e-9),
            (0.5, 0.55075570104538509, 1e-9),
            (1.0, 0.3598187798670719, 1e-9),
            (2.0, 0.12740810781195966, 1e-8),
            (4.0, 0.0198768303120176, 2e-6),
        ] {
            let r = density_triangular(&p, x, &cs, 1e-12).unwrap();
            assert!(rel(r.value, expect) < tol, "x = {x}: {} vs {expect}", r.value);
            assert_eq!(r.trace.as_ref().unwrap().verdict, Verdict::Converged);
        }
    }

    #[test]
    fn low_alpha_reference_values() {
        let p = inv_sqrt2_params(0.5);
        let cs = cutoffs(&p);
        for (x, expect, tol) in [
            (0.25, 0.675366301615235, 1e-5),
            (1.0, 0.169802080803109, 1e-9),
            (3.0, 0.0349952760642128, 1e-9),
            (4.0, 0.0222193890212082, 1e-9),
        ] {
            let r = density_triangular(&p, x, &cs, 1e-12).unwrap();
            assert!(rel(r.value, expect) < tol, "x = {x}: {} vs {expect}", r.value);
        }
        let p = inv_sqrt2_params(0.3);
        let r = density_triangular(&p, 0.25, &cutoffs(&p), 1e-12).unwrap();
        assert!(rel(r.value, 0.501693960350997) < 1e-5, "{}", r.value);
    }

    #[test]
    fn cross_method_agreement() {
        let p = sqrt2_params();
        let cs = cutoffs(&p);
        for x in [0.25, 1.0, 2.0] {
            let tri = density_triangular(&p, x, &cs, 1e-12).unwrap();
            let abs = density_absolute(&p, x, 1e-12, DEFAULT_MAX_SHELL).unwrap();
            assert!(abs.warnings.is_empty());
            assert!(
                rel(tri.value, abs.value) < 1e-8,
                "x = {x}: {} vs {}",
                tri.value,
                abs.value
            );
        }
        let p = inv_sqrt2_params(0.5);
        let cs = cutoffs(&p);
        for x in [1.0, 3.0] {
            let tri = density_triangular(&p, x, &cs, 1e-12).unwrap();
            let abs = density_absolute(&p, x, 1e-12, DEFAULT_MAX_SHELL).unwrap();
            assert!(rel(tri.value, abs.value) < 1e-8);
        }
    }

    #[test]
    fn small_x_leading_term() {
        let p = sqrt2_params();
        let cs = cutoffs(&p);
        let x = 1e-3;
        let r = density_triangular(&p, x, &cs, 1e-12).unwrap();
        let a00 = 0.43839588249557738;
        let scaled = r.value * x.powf(1.0 - p.alpha() * p.rho());
        assert!(rel(scaled, a00) < 2e-3, "{scaled}");
    }

    #[test]
    fn trace_properties() {
        let p = sqrt2_params();
        // cutoff 1 admits no lattice points
        let t = partial_sum_trace(&p, 1.0, &[1]).unwrap();
        assert_eq!(t.entries[0].terms_added, 0);
        assert_eq!(t.entries[0].partial_sum, 0.0);

        let t = partial_sum_trace(&p, 1.0, &[2, 5, 12, 29, 70]).unwrap();
        assert_eq!(t.verdict, Verdict::CutoffCapped);
        // deltas decreasing after the second entry
        for w in t.entries[1..].windows(2) {
            assert!(w[1].delta <= w[0].delta, "{:?}", t.entries);
        }
        // lattice count ~ q^2 / (2 alpha)
        let alpha = p.alpha();
        for e in &t.entries {
            if e.q_k >= 29 {
                let ratio = e.terms_added as f64 / (e.q_k as f64).powi(2);
                let expect = 1.0 / (2.0 * alpha);
                assert!(
                    ratio > 0.9 * expect && ratio < 1.1 * expect,
                    "q = {}, ratio = {ratio}",
                    e.q_k
                );
            }
        }
    }

    #[test]
    fn tail_regime_guard() {
        let p = sqrt2_params();
        let cs = cutoffs(&p);
        let x = 1e-8;
        let r = density_triangular(&p, x, &cs, 1e-10).unwrap();
        assert!(matches!(r.warnings[0], Warning::TailRegime { side: Side::Zero }));
        let a00 = 0.43839588249557738;
        assert!(rel(r.value, a00 * x.powf(p.alpha() * p.rho() - 1.0)) < 1e-10);
        let r = density_triangular(&p, 1e8, &cs, 1e-10).unwrap();
        assert!(matches!(
            r.warnings[0],
            Warning::TailRegime {
                side: Side::Infinity
            }
        ));
    }

    #[test]
    fn leading_asymptotic_sides() {
        let p = sqrt2_params();
        let (e, c) = leading_asymptotic(&p, Side::Zero).unwrap();
        assert!((e - (p.alpha() * 0.5 - 1.0)).abs() < 1e-15);
        assert!(rel(c.to_f64(), 0.43839588249557738) < 1e-12);
        assert!(leading_asymptotic(&p, Side::Infinity).is_err());

        let p = inv_sqrt2_params(0.5);
        let (e, c) = leading_asymptotic(&p, Side::Infinity).unwrap();
        assert!((e - (-1.0 - p.alpha())).abs() < 1e-15);
        assert!(rel(c.to_f64(), 0.25954395275825418) < 1e-12);
        assert!(leading_asymptotic(&p, Side::Zero).is_err());
    }

    #[test]
    fn rational_alpha_rejected() {
        let p = StableParams::from_f64(1.5, 0.5, ParamOptions::default()).unwrap();
        assert!(matches!(
            density_triangular(&p, 1.0, &[2, 5], 1e-10),
            Err(Error::RationalAlpha { .. })
        ));
    }

    #[test]
    fn normalization_high_alpha() {
        let p = sqrt2_params();
        let m = total_mass(&p, 1e-12).unwrap();
        assert!(
            (m.total - 1.0).abs() < 1e-4,
            "total = {}, switch = {}, rel = {}",
            m.total,
            m.switch_x,
            m.switch_rel_diff
        );
    }

    #[test]
    fn normalization_low_alpha() {
        let p = inv_sqrt2_params(0.5);
        let m = total_mass(&p, 1e-12).unwrap();
        assert!(
            (m.total - 1.0).abs() < 1e-4,
            "total = {}, switch = {}, rel = {}",
            m.total,
            m.switch_x,
            m.switch_rel_diff
        );
    }

    #[test]
    fn cdf_monotone_and_bounded() {
        let p = inv_sqrt2_params(0.5);
        let mut prev = 0.0;
        for x in [0.25, 0.5, 1.0, 2.0, 4.0] {
            let c = cumulative_below(&p, x, 1e-12).unwrap();
            assert!(c > prev && c < 1.0, "x = {x}, cdf = {c}");
            prev = c;
        }
    }

    #[test]
    fn pathological_alpha_flags_absolute_order() {
        // tau = 49/33 + 2^-256: the level-2 Example-1 rational nudged so the
        // blow-up factor sin(pi * 33 tau) ~ 1e-75 stays above sin_floor
        let tau = BigRational::new(BigInt::from(49), BigInt::from(33))
            + BigRational::new(BigInt::from(1), BigInt::from(2).pow(256));
        let alpha = HpReal::exact(BigRational::from_integer(BigInt::from(2)) / tau);
        let mut opts = ParamOptions::default();
        opts.assume_irrational = true;
        // rho = 0.45: rho = 1/2 would sit exactly on the Doney class
        // rho + 24 = 33 tau / 2 of this tau
        let p = StableParams::new(alpha, 0.45, opts).unwrap();
        let err = density_absolute(&p, 1.0, 0.0, 80);
        match err {
            Err(Error::ShellBudgetExhausted { partial, .. }) => {
                assert!(
                    partial
                        .warnings
                        .iter()
                        .any(|w| matches!(w, Warning::AbsoluteOrderUnsafe { .. })),
                    "warnings: {:?}",
                    partial.warnings
                );
            }
            other => panic!("expected ShellBudgetExhausted, got {other:?}"),
        }
    }
}
