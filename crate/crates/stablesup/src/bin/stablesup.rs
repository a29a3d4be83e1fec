//! Command-line front end: every library operation behind one executable,
//! with machine-readable output and a reproducible run manifest per run.
//!
//! Exit codes: 0 success; 2 domain error (rational alpha, Doney class,
//! inadmissible parameters, ...); 3 convergence failure (the best estimate is
//! still emitted); 64 usage error.

use std::io::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use stablesup::contfrac;
use stablesup::coeffs::CoefficientGrid;
use stablesup::diagnostics;
use stablesup::hp::HpReal;
use stablesup::oracle::{self, Estimator, SimulationConfig};
use stablesup::params::{ParamOptions, StableParams};
use stablesup::series::{self, Method, Verdict, Warning};
use stablesup::Error;

#[derive(Parser)]
#[command(
    name = "stablesup",
    version,
    about = "Density of the supremum of a strictly alpha-stable process \
             via rearranged double series, with diagnostics and a Monte \
             Carlo oracle"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Treat decimal inputs as truncations of irrational targets,
    /// skipping the rationality gate.
    #[arg(long, global = true)]
    assume_irrational: bool,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Working precision in bits.
    #[arg(long, global = true, env = "STABLESUP_PRECISION")]
    precision: Option<u32>,
    /// Output file (default: stdout). The run manifest is written next to it
    /// as <out>.manifest.json; with stdout output it is embedded in JSON
    /// documents or written to ./stablesup-manifest.json otherwise.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    /// Triangular partial sums cut at convergent denominators of 2/alpha.
    Tri,
    /// Absolute-order summation over unit shells of m + alpha n.
    Abs,
}

#[derive(Clone, Copy, ValueEnum)]
enum WhichCoeff {
    A,
    B,
}

#[derive(Args)]
struct ParamArgs {
    /// Stability index alpha in (0,1) or (1,2), as a decimal.
    alpha: String,
    /// Positivity parameter rho = P(X_1 > 0).
    rho: f64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Continued-fraction expansion of a positive decimal.
    Cf {
        x: String,
        #[arg(long, default_value_t = 32)]
        terms: usize,
    },
    /// One series coefficient: sign, log-magnitude, and linear value.
    Coeff {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(short, long)]
        m: usize,
        #[arg(short, long)]
        n: usize,
        /// a-family (small x, alpha > 1) or b-family (large x, alpha < 1).
        #[arg(long, value_enum, default_value = "a")]
        which: WhichCoeff,
    },
    /// Supremum density p(x) at one point.
    Density {
        #[command(flatten)]
        params: ParamArgs,
        x: f64,
        #[arg(long, value_enum, default_value = "tri")]
        method: MethodArg,
        #[arg(long, default_value_t = series::DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = series::DEFAULT_Q_MAX)]
        qmax: u64,
        #[arg(long, default_value_t = series::DEFAULT_MAX_SHELL)]
        max_shell: usize,
        /// Emit JSON instead of a human-readable line.
        #[arg(long)]
        json: bool,
    },
    /// CSV table of p(x) over a geometric grid of x.
    Table {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        xmin: f64,
        #[arg(long)]
        xmax: f64,
        #[arg(long)]
        points: usize,
        #[arg(long, value_enum, default_value = "tri")]
        method: MethodArg,
        #[arg(long, default_value_t = series::DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = series::DEFAULT_Q_MAX)]
        qmax: u64,
    },
    /// Per-cutoff triangular partial-sum trace as JSON.
    Trace {
        #[command(flatten)]
        params: ParamArgs,
        x: f64,
        #[arg(long, default_value_t = series::DEFAULT_Q_MAX)]
        qmax: u64,
    },
    /// Number-theoretic diagnostics.
    Diag {
        #[command(subcommand)]
        which: DiagCmd,
    },
    /// Monte Carlo estimate of the supremum density (CSV).
    Mc {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 100_000)]
        paths: usize,
        #[arg(long, default_value_t = 400)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = oracle::DEFAULT_BINS)]
        bins: usize,
    },
    /// Series density vs. Monte Carlo with z-scores (JSON).
    Compare {
        #[command(flatten)]
        params: ParamArgs,
        /// Comma-separated evaluation points, e.g. 0.5,1,2
        #[arg(long)]
        xs: String,
        #[arg(long, default_value_t = 100_000)]
        paths: usize,
        #[arg(long, default_value_t = 400)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = series::DEFAULT_TOL)]
        tol: f64,
        /// Richardson-extrapolate the Monte Carlo estimate in step count.
        #[arg(long)]
        extrapolate: bool,
    },
}

#[derive(Subcommand)]
enum DiagCmd {
    /// Secant products along the convergent denominators of 2*tau (Lemma 1).
    Sec {
        tau: String,
        #[arg(long, default_value_t = 12)]
        kmax: usize,
    },
    /// Buslaev-type averages along the convergent denominators of beta.
    Buslaev {
        beta: String,
        #[arg(long, default_value_t = 12)]
        kmax: usize,
    },
    /// Construct the pathological tau of Example 1 up to the given level.
    Patho {
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
}

#[derive(Serialize)]
struct RunManifest {
    subcommand: String,
    argv: Vec<String>,
    version: String,
    precision_bits: u32,
    seeds: Vec<u64>,
    wall_time_seconds: f64,
    warnings: Vec<String>,
}

enum Body {
    Json(Value),
    Csv(String),
    Text(String),
}

struct CmdOutput {
    body: Body,
    seeds: Vec<u64>,
    warnings: Vec<String>,
    exit: i32,
}

impl CmdOutput {
    fn json(v: Value) -> Self {
        CmdOutput {
            body: Body::Json(v),
            seeds: vec![],
            warnings: vec![],
            exit: 0,
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => 0,
                // usage errors exit 64, not clap's default 2
                _ => 64,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Some(t) = cli.threads {
        // a failed build means a pool already exists; keep going
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global();
    }
    let start = Instant::now();
    let precision = cli.precision.unwrap_or(stablesup::hp::DEFAULT_PRECISION_BITS);
    match run(&cli, precision) {
        Ok(out) => {
            let manifest = RunManifest {
                subcommand: subcommand_name(&cli.cmd).to_string(),
                argv: std::env::args().collect(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                precision_bits: precision,
                seeds: out.seeds,
                wall_time_seconds: start.elapsed().as_secs_f64(),
                warnings: out.warnings,
            };
            if let Err(e) = emit(out.body, &manifest, cli.out.as_deref()) {
                eprintln!("error: kind=io msg=\"{e}\"");
                std::process::exit(1);
            }
            std::process::exit(out.exit);
        }
        Err(e) => {
            eprintln!(
                "error: kind={} msg=\"{}\"",
                error_kind(&e),
                e.to_string().replace('"', "'")
            );
            std::process::exit(error_exit_code(&e));
        }
    }
}

fn subcommand_name(cmd: &Cmd) -> &'static str {
    match cmd {
        Cmd::Cf { .. } => "cf",
        Cmd::Coeff { .. } => "coeff",
        Cmd::Density { .. } => "density",
        Cmd::Table { .. } => "table",
        Cmd::Trace { .. } => "trace",
        Cmd::Diag { .. } => "diag",
        Cmd::Mc { .. } => "mc",
        Cmd::Compare { .. } => "compare",
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::NonPositiveInput(_) => "non_positive_input",
        Error::InvalidQuotient { .. } => "invalid_quotient",
        Error::RationalAlpha { .. } => "rational_alpha",
        Error::CutoffUnderflow { .. } => "cutoff_underflow",
        Error::DoneyClass { .. } => "doney_class",
        Error::GammaPole { .. } => "gamma_pole",
        Error::NearSingularProduct { .. } => "near_singular_product",
        Error::Admissibility(_) => "admissibility",
        Error::ShellBudgetExhausted { .. } => "shell_budget_exhausted",
        Error::LevelBudget { .. } => "level_budget",
        Error::PrecisionExhausted(_) => "precision_exhausted",
        Error::OutOfRange { .. } => "out_of_range",
        Error::Unsupported(_) => "unsupported",
        Error::InvalidConfig(_) => "invalid_config",
    }
}

fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidConfig(_) => 64,
        Error::ShellBudgetExhausted { .. } | Error::CutoffUnderflow { .. } => 3,
        _ => 2,
    }
}

fn emit(body: Body, manifest: &RunManifest, out: Option<&std::path::Path>) -> std::io::Result<()> {
    let rendered = match &body {
        Body::Json(v) => {
            let mut v = v.clone();
            if out.is_none() {
                // stdout JSON carries its manifest inline
                v.as_object_mut()
                    .expect("top-level JSON output is always an object")
                    .insert("manifest".into(), serde_json::to_value(manifest).unwrap());
            }
            format!("{}\n", serde_json::to_string_pretty(&v).unwrap())
        }
        Body::Csv(s) => s.clone(),
        Body::Text(s) => format!("{s}\n"),
    };
    match out {
        Some(path) => {
            std::fs::write(path, rendered)?;
            let mut mpath = path.as_os_str().to_owned();
            mpath.push(".manifest.json");
            std::fs::write(
                mpath,
                format!("{}\n", serde_json::to_string_pretty(manifest).unwrap()),
            )?;
        }
        None => {
            std::io::stdout().write_all(rendered.as_bytes())?;
            if !matches!(body, Body::Json(_)) {
                std::fs::write(
                    "stablesup-manifest.json",
                    format!("{}\n", serde_json::to_string_pretty(manifest).unwrap()),
                )?;
            }
        }
    }
    Ok(())
}

fn parse_params(cli: &Cli, p: &ParamArgs, precision: u32) -> stablesup::Result<StableParams> {
    let mut alpha = HpReal::from_decimal_str(&p.alpha)?;
    if cli.assume_irrational {
        alpha = HpReal::approx_or_exact(alpha.value().clone(), Some(precision));
    }
    let mut opts = ParamOptions::default();
    opts.precision_bits = precision;
    opts.assume_irrational = cli.assume_irrational;
    StableParams::new(alpha, p.rho, opts)
}

fn warning_strings(ws: &[Warning]) -> Vec<String> {
    ws.iter()
        .map(|w| serde_json::to_string(w).unwrap())
        .collect()
}

fn run(cli: &Cli, precision: u32) -> stablesup::Result<CmdOutput> {
    match &cli.cmd {
        Cmd::Cf { x, terms } => {
            let x = HpReal::from_decimal_str(x)?;
            let e = contfrac::expand(
                &x,
                *terms,
                Some(&num_bigint::BigInt::from(contfrac::DEFAULT_QUOTIENT_CAP)),
            )?;
            Ok(CmdOutput::json(json!({
                "input": x.to_f64(),
                "quotients": e.quotients.iter().map(|q| q.to_string()).collect::<Vec<_>>(),
                "convergents": e.convergents.iter()
                    .map(|(p, q)| json!({"p": p.to_string(), "q": q.to_string()}))
                    .collect::<Vec<_>>(),
                "truncation_reason": e.truncation_reason,
            })))
        }
        Cmd::Coeff {
            params, m, n, which,
        } => {
            let sp = parse_params(cli, params, precision)?;
            let mut grid = CoefficientGrid::new(&sp);
            grid.ensure(*m, *n)?;
            let v = match which {
                WhichCoeff::A => grid.a(*m, *n)?,
                WhichCoeff::B => grid.b(*m, *n)?,
            };
            let linear = v.to_f64();
            Ok(CmdOutput::json(json!({
                "which": match which { WhichCoeff::A => "a", WhichCoeff::B => "b" },
                "m": m,
                "n": n,
                "sign": v.sign,
                "log_mag": v.log_mag,
                "value": if linear.is_finite() { Value::from(linear) } else { Value::Null },
            })))
        }
        Cmd::Density {
            params,
            x,
            method,
            tol,
            qmax,
            max_shell,
            json: as_json,
        } => {
            let sp = parse_params(cli, params, precision)?;
            let (result, exit) = match method {
                MethodArg::Tri => {
                    let cutoffs = contfrac::cutoff_sequence(&sp, *qmax)?;
                    let r = series::density_triangular(&sp, *x, &cutoffs, *tol)?;
                    let bad = r
                        .trace
                        .as_ref()
                        .is_some_and(|t| t.verdict != Verdict::Converged);
                    (r, if bad { 3 } else { 0 })
                }
                MethodArg::Abs => match series::density_absolute(&sp, *x, *tol, *max_shell) {
                    Ok(r) => (r, 0),
                    // emit the best partial estimate on shell exhaustion
                    Err(Error::ShellBudgetExhausted { partial, .. }) => (*partial, 3),
                    Err(e) => return Err(e),
                },
            };
            let est_error = result.trace.as_ref().map(|t| t.estimated_error);
            let verdict = result
                .trace
                .as_ref()
                .map_or(Verdict::Converged, |t| t.verdict);
            let warnings = warning_strings(&result.warnings);
            let body = if *as_json {
                Body::Json(json!({
                    "alpha": sp.alpha(),
                    "rho": sp.rho(),
                    "x": x,
                    "value": result.value,
                    "method": result.method,
                    "est_error": est_error,
                    "verdict": verdict,
                    "warnings": result.warnings,
                }))
            } else {
                Body::Text(format!(
                    "p({x}) = {:.17} [{}]{}",
                    result.value,
                    match result.method {
                        Method::Triangular => "triangular",
                        Method::Absolute => "absolute",
                    },
                    if warnings.is_empty() {
                        String::new()
                    } else {
                        format!(" warnings: {}", warnings.join("; "))
                    }
                ))
            };
            Ok(CmdOutput {
                body,
                seeds: vec![],
                warnings,
                exit,
            })
        }
        Cmd::Table {
            params,
            xmin,
            xmax,
            points,
            method,
            tol,
            qmax,
        } => {
            if !(*xmin > 0.0 && *xmax > *xmin && *points >= 2) {
                return Err(Error::InvalidConfig(
                    "need 0 < xmin < xmax and points >= 2".into(),
                ));
            }
            let sp = parse_params(cli, params, precision)?;
            let cutoffs = contfrac::cutoff_sequence(&sp, *qmax)?;
            let ratio = (xmax / xmin).powf(1.0 / (*points as f64 - 1.0));
            let mut wtr = csv::Writer::from_writer(Vec::new());
            wtr.write_record(["x", "p", "method", "est_error", "warnings"])
                .unwrap();
            let mut all_warnings = Vec::new();
            let mut exit = 0;
            for i in 0..*points {
                let x = xmin * ratio.powi(i as i32);
                let r = match method {
                    MethodArg::Tri => series::density_triangular(&sp, x, &cutoffs, *tol)?,
                    MethodArg::Abs => {
                        series::density_absolute(&sp, x, *tol, series::DEFAULT_MAX_SHELL)?
                    }
                };
                if r.trace
                    .as_ref()
                    .is_some_and(|t| t.verdict != Verdict::Converged)
                {
                    exit = 3;
                }
                let ws = warning_strings(&r.warnings);
                wtr.write_record([
                    format!("{x:.12e}"),
                    format!("{:.17e}", r.value),
                    serde_json::to_string(&r.method).unwrap().replace('"', ""),
                    r.trace
                        .as_ref()
                        .map_or(String::new(), |t| format!("{:.3e}", t.estimated_error)),
                    ws.join(";"),
                ])
                .unwrap();
                all_warnings.extend(ws);
            }
            let csv = String::from_utf8(wtr.into_inner().unwrap()).unwrap();
            Ok(CmdOutput {
                body: Body::Csv(csv),
                seeds: vec![],
                warnings: all_warnings,
                exit,
            })
        }
        Cmd::Trace { params, x, qmax } => {
            let sp = parse_params(cli, params, precision)?;
            let cutoffs = contfrac::cutoff_sequence(&sp, *qmax)?;
            let trace = series::partial_sum_trace(&sp, *x, &cutoffs)?;
            // a full trace has no stopping rule: cutoff_capped is its
            // normal completion, only not_converged signals failure
            let exit = if trace.verdict == Verdict::NotConverged { 3 } else { 0 };
            Ok(CmdOutput {
                body: Body::Json(json!({
                    "alpha": sp.alpha(),
                    "rho": sp.rho(),
                    "trace": trace,
                })),
                seeds: vec![],
                warnings: vec![],
                exit,
            })
        }
        Cmd::Diag { which } => run_diag(which, precision),
        Cmd::Mc {
            params,
            paths,
            steps,
            seed,
            bins,
        } => {
            let sp = parse_params(cli, params, precision)?;
            let est = oracle::estimate_sup_density(&SimulationConfig {
                params: sp,
                n_paths: *paths,
                n_steps: *steps,
                seed: *seed,
                estimator: Estimator::Histogram {
                    bins: *bins,
                    range: None,
                },
            })?;
            let mut wtr = csv::Writer::from_writer(Vec::new());
            wtr.write_record(["x", "density", "stderr"]).unwrap();
            for i in 0..est.grid.len() {
                wtr.write_record([
                    format!("{:.12e}", est.grid[i]),
                    format!("{:.12e}", est.density[i]),
                    format!("{:.12e}", est.stderr[i]),
                ])
                .unwrap();
            }
            let csv = String::from_utf8(wtr.into_inner().unwrap()).unwrap();
            Ok(CmdOutput {
                body: Body::Csv(csv),
                seeds: vec![*seed],
                warnings: vec![est.bias_note],
                exit: 0,
            })
        }
        Cmd::Compare {
            params,
            xs,
            paths,
            steps,
            seed,
            tol,
            extrapolate,
        } => {
            let sp = parse_params(cli, params, precision)?;
            let xs: Vec<f64> = xs
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::InvalidConfig(format!("bad x '{s}': {e}")))
                })
                .collect::<stablesup::Result<_>>()?;
            let report = if *extrapolate {
                let rows = oracle::extrapolated_density(
                    &sp,
                    &xs,
                    *paths,
                    *steps,
                    *seed,
                    &Estimator::default(),
                )?;
                let cutoffs = contfrac::cutoff_sequence(&sp, series::DEFAULT_Q_MAX)?;
                let mut out = Vec::new();
                let mut any_flagged = false;
                for (x, p_mc, stderr) in rows {
                    let p_series = series::density_triangular(&sp, x, &cutoffs, *tol)?.value;
                    let z = (p_series - p_mc) / stderr;
                    let flagged = !(z.abs() <= oracle::FLAG_Z);
                    any_flagged |= flagged;
                    out.push(oracle::CompareRow {
                        x,
                        p_series,
                        p_mc,
                        stderr,
                        z,
                        flagged,
                    });
                }
                oracle::CompareReport {
                    rows: out,
                    any_flagged,
                }
            } else {
                let est = oracle::estimate_sup_density(&SimulationConfig {
                    params: sp.clone(),
                    n_paths: *paths,
                    n_steps: *steps,
                    seed: *seed,
                    estimator: Estimator::default(),
                })?;
                oracle::compare_with_series(&sp, &xs, &est, *tol)?
            };
            Ok(CmdOutput {
                body: Body::Json(json!({
                    "alpha": sp.alpha(),
                    "rho": sp.rho(),
                    "n_paths": paths,
                    "n_steps": steps,
                    "extrapolated": extrapolate,
                    "rows": report.rows,
                    "any_flagged": report.any_flagged,
                })),
                seeds: vec![*seed],
                warnings: vec![],
                exit: 0,
            })
        }
    }
}

fn run_diag(which: &DiagCmd, precision: u32) -> stablesup::Result<CmdOutput> {
    match which {
        DiagCmd::Sec { tau, kmax } => {
            let tau = HpReal::approx_or_exact(
                HpReal::from_decimal_str(tau)?.value().clone(),
                Some(precision),
            );
            let rep = diagnostics::secant_product_report(&tau, *kmax)?;
            Ok(CmdOutput::json(json!({
                "tau": rep.tau,
                "rows": rep.rows.iter().map(|r| json!({
                    "k": r.k,
                    "q_k": r.q_k.to_string(),
                    "log_product": r.log_product,
                    "log_bound_gap": r.log_bound_gap,
                })).collect::<Vec<_>>(),
                "c_estimate": rep.c_estimate,
                "truncated": rep.truncated,
            })))
        }
        DiagCmd::Buslaev { beta, kmax } => {
            let beta = HpReal::approx_or_exact(
                HpReal::from_decimal_str(beta)?.value().clone(),
                Some(precision),
            );
            let rows = diagnostics::buslaev_average(&beta, *kmax)?;
            Ok(CmdOutput::json(json!({
                "beta": beta.to_f64(),
                "rows": rows,
            })))
        }
        DiagCmd::Patho { levels } => {
            let p = diagnostics::build_pathological(*levels)?;
            let all_p_odd = p.convergents.iter().all(|(pn, _)| pn.bit(0));
            Ok(CmdOutput::json(json!({
                "levels": p.levels,
                "quotients": p.quotients.iter().map(|q| q.to_string()).collect::<Vec<_>>(),
                "convergents": p.convergents.iter()
                    .map(|(pn, qn)| json!({"p": pn.to_string(), "q": qn.to_string()}))
                    .collect::<Vec<_>>(),
                "precision_bits": p.precision_bits,
                "all_p_odd": all_p_odd,
            })))
        }
    }
}
