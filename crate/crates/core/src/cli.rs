//! Command-line front end. Data goes to files or stdout, diagnostics to
//! stderr; the process exit code is the return value of [`run_from`].

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{log_grid, rate_table, run_trajectory, start_pair, trace_distances, TestFunction, TrajectoryBound};
use crate::certificate::{certified_rate, certify_point, optimal_tuning, smallest_unit_root, VerificationReport};
use crate::model::{AlgoParams, ConditionClass};
use crate::sdpsearch::{bisect_tau, BetaRule, Verdict};
use crate::Error;

pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const FAILED: i32 = 2;
    pub const NO_RATE: i32 = 3;
    pub const DIVERGED: i32 = 4;
}

pub const RATES_HEADER: &str = "kappa,tau_bp,tau_lq,tau_nq,tau_ours,tau_ng,beta_classic,beta_opt";
pub const TRACE_HEADER: &str = "step,tau,feasible,residual";
pub const TRAJECTORY_HEADER: &str = "t,dist,bound";

#[derive(Debug, Parser)]
#[command(
    name = "nesterov-cert",
    version,
    about = "Certified convergence rates for Nesterov's accelerated method"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate reference rates and momentum rules on a log grid of κ.
    Rates(RatesArgs),
    /// Build and verify the closed-form certificate for (m, L).
    Certify(CertifyArgs),
    /// Bisect on τ with an SDP feasibility test.
    Search(SearchArgs),
    /// Run the method and compare distances against the certified envelope.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
struct RatesArgs {
    #[arg(long)]
    kappa_min: f64,
    #[arg(long)]
    kappa_max: f64,
    #[arg(long)]
    points: usize,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CertifyArgs {
    #[arg(long)]
    m: f64,
    #[arg(long = "L")]
    l: f64,
    /// Certify this momentum instead of the optimal one.
    #[arg(long)]
    beta: Option<f64>,
    /// Certify this rate instead of the smallest one the closed form allows.
    #[arg(long)]
    tau: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RuleArg {
    Optimal,
    Nesterov,
}

#[derive(Debug, Args)]
struct SearchArgs {
    #[arg(long)]
    kappa: f64,
    #[arg(long, value_enum, default_value = "optimal")]
    beta_rule: RuleArg,
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    /// Write the bisection trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FunctionArg {
    Quadratic,
    Logcosh,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    function: FunctionArg,
    #[arg(long)]
    m: f64,
    #[arg(long = "L")]
    l: f64,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 2000)]
    iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run with this momentum; it must be certifiable by the closed form.
    #[arg(long)]
    beta: Option<f64>,
}

/// Formats like C's `%.8e`: nine significant digits, two-digit signed
/// exponent.
pub fn sci(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.8e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

pub fn run() -> i32 {
    run_from(std::env::args_os(), &mut io::stdout().lock(), &mut io::stderr().lock())
}

pub fn run_from<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(err, "{e}");
                exit::USAGE
            } else {
                let _ = write!(out, "{e}");
                exit::OK
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Rates(a) => rates(a, out),
        Command::Certify(a) => certify(a, out),
        Command::Search(a) => search(a, out),
        Command::Simulate(a) => simulate(a, out, err),
    };
    match result {
        Ok(code) => code,
        Err(failure) => {
            let _ = writeln!(err, "error: {}", failure.message);
            failure.code
        }
    }
}

struct Failure {
    code: i32,
    message: String,
}

type CmdResult = Result<i32, Failure>;

fn usage(message: impl ToString) -> Failure {
    Failure {
        code: exit::USAGE,
        message: message.to_string(),
    }
}

fn classify(e: Error) -> Failure {
    let code = match e {
        Error::InvalidCondition(_)
        | Error::InvalidParameter { .. }
        | Error::DimensionMismatch { .. }
        | Error::EmptyGrid => exit::USAGE,
        Error::NoRootInUnitInterval { .. } | Error::CertificateRejected(_) => exit::FAILED,
        Error::NoRateFound { .. } => exit::NO_RATE,
        Error::Divergence { .. } => exit::DIVERGED,
    };
    Failure {
        code,
        message: e.to_string(),
    }
}

fn emit(path: Option<&PathBuf>, content: &str, out: &mut dyn Write) -> Result<(), Failure> {
    let written = match path {
        Some(p) => fs::write(p, content).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => out
            .write_all(content.as_bytes())
            .map_err(|e| format!("cannot write output: {e}")),
    };
    written.map_err(usage)
}

fn rates(a: RatesArgs, out: &mut dyn Write) -> CmdResult {
    if !(a.kappa_min >= 1.0) {
        return Err(usage(format!("--kappa-min {} must be at least 1", a.kappa_min)));
    }
    let grid = log_grid(a.kappa_min, a.kappa_max, a.points).map_err(usage)?;
    let rows = rate_table(&grid, &[]).map_err(classify)?;
    let mut csv = format!("{RATES_HEADER}\n");
    for r in rows {
        let cells = [r.kappa, r.bp, r.lq, r.nq, r.ours, r.ng, r.beta_classic, r.beta_opt].map(sci);
        csv.push_str(&cells.join(","));
        csv.push('\n');
    }
    emit(a.out.as_ref(), &csv, out)?;
    Ok(exit::OK)
}

fn certify(a: CertifyArgs, out: &mut dyn Write) -> CmdResult {
    let cond = ConditionClass::new(a.m, a.l).map_err(classify)?;
    let kappa = cond.kappa();
    let alpha = 1.0 / cond.L();

    if a.beta.is_none() && a.tau.is_none() {
        let rate = match certified_rate(&cond) {
            Ok(rate) => rate,
            Err(Error::CertificateRejected(report)) => {
                let tuning = optimal_tuning(kappa).map_err(classify)?;
                write_report(out, kappa, alpha, tuning.beta, tuning.tau, Some(&report));
                return Ok(exit::FAILED);
            }
            Err(e) => return Err(classify(e)),
        };
        write_report(out, kappa, alpha, rate.params.beta, rate.tau, rate.verified());
        return Ok(exit::OK);
    }

    if kappa == 1.0 {
        return Err(usage("explicit --beta/--tau need m < L"));
    }
    let beta = match a.beta {
        Some(b) => b,
        None => optimal_tuning(kappa).map_err(classify)?.beta,
    };
    let tau = match a.tau {
        Some(t) => t,
        None => match smallest_unit_root(kappa, beta) {
            Ok(omega) => omega.sqrt(),
            Err(e) => {
                let _ = writeln!(out, "verdict: FAIL ({e})");
                let _ = writeln!(out, "summary: status=FAIL kappa={} beta={}", sci(kappa), sci(beta));
                return Ok(exit::FAILED);
            }
        },
    };
    let (_, report) = certify_point(kappa, beta, tau).map_err(classify)?;
    write_report(out, kappa, alpha, beta, tau, Some(&report));
    Ok(if report.passed() { exit::OK } else { exit::FAILED })
}

fn write_report(out: &mut dyn Write, kappa: f64, alpha: f64, beta: f64, tau: f64, report: Option<&VerificationReport>) {
    let status = report.is_none_or(VerificationReport::passed);
    let status = if status { "PASS" } else { "FAIL" };
    let mut s = String::new();
    let mut line = |k: &str, v: String| s.push_str(&format!("{k:<28} {v}\n"));
    line("kappa", sci(kappa));
    line("alpha", sci(alpha));
    line("beta", sci(beta));
    line("tau", sci(tau));
    match report {
        None => line("certificate", "not needed: kappa = 1 converges in one step".into()),
        Some(r) => {
            line("lambda_min(P)", sci(r.min_eig_p));
            line("lambda_min(H)", sci(r.min_eig_h));
            line("norm_inf(H)", sci(r.h_norm_inf));
            line("kappa_P", sci(r.kappa_p));
            line("schur lambda_min(H3)", sci(r.schur_h3_min_eig));
            line("schur range residual", sci(r.schur_range_residual));
            line("schur complement min eig", sci(r.schur_complement_min_eig));
            line("det(H3)", sci(r.det_h3));
            line("det(H3) relative", sci(r.det_h3_relative));
            let minors: Vec<String> = r.sylvester_minors.iter().map(|&v| sci(v)).collect();
            line("sylvester minors", minors.join(" "));
            let v = &r.verdicts;
            line(
                "checks",
                format!(
                    "P>0 {} H>=0 {} schur {} sylvester {}",
                    v.p_positive_definite,
                    v.h_psd,
                    v.schur(),
                    v.sylvester
                ),
            );
        }
    }
    line("verdict", status.into());
    s.push_str(&format!(
        "summary: status={status} kappa={} alpha={} beta={} tau={}",
        sci(kappa),
        sci(alpha),
        sci(beta),
        sci(tau)
    ));
    if let Some(r) = report {
        s.push_str(&format!(
            " min_eig_p={} min_eig_h={} kappa_p={}",
            sci(r.min_eig_p),
            sci(r.min_eig_h),
            sci(r.kappa_p)
        ));
    }
    s.push('\n');
    let _ = out.write_all(s.as_bytes());
}

fn search(a: SearchArgs, out: &mut dyn Write) -> CmdResult {
    if !(a.kappa > 1.0) {
        return Err(usage(format!("--kappa {} must exceed 1", a.kappa)));
    }
    let rule = match a.beta_rule {
        RuleArg::Optimal => BetaRule::Optimal,
        RuleArg::Nesterov => BetaRule::Nesterov,
    };
    let beta = rule.beta_at(a.kappa, 0).map_err(classify)?;
    let result = bisect_tau(a.kappa, beta, a.tol).map_err(classify)?;

    if let Some(path) = &a.trace {
        let mut csv = format!("{TRACE_HEADER}\n");
        for (step, p) in result.trace.iter().enumerate() {
            let flag = match p.verdict {
                Verdict::Feasible => 1,
                Verdict::Infeasible => 0,
                Verdict::Indeterminate => -1,
            };
            csv.push_str(&format!("{step},{},{flag},{}\n", sci(p.tau), sci(p.residual)));
        }
        emit(Some(path), &csv, out)?;
    }
    let line = format!(
        "summary: kappa={} beta={} tau_star={} iterations={} residual={} bracket_lo={} indeterminate={} non_monotone={}\n",
        sci(result.kappa),
        sci(result.beta),
        sci(result.tau_star),
        result.iterations,
        sci(result.residual),
        sci(result.bracket.0),
        result.indeterminate_probes,
        result.non_monotone
    );
    emit(None, &line, out)?;
    Ok(exit::OK)
}

fn simulate(a: SimulateArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let cond = ConditionClass::new(a.m, a.l).map_err(classify)?;
    if cond.m() >= cond.L() {
        return Err(usage("simulate needs m < L"));
    }
    let f = match a.function {
        FunctionArg::Quadratic => TestFunction::quadratic_linspace(&cond, a.dim),
        FunctionArg::Logcosh => TestFunction::logcosh(&cond, a.dim),
    }
    .map_err(classify)?;

    let kappa = cond.kappa();
    let (x0, x1) = start_pair(f.dim(), a.seed);
    let (params, bound) = match a.beta {
        None => {
            let rate = certified_rate(&cond).map_err(classify)?;
            let (cert, report) = rate.certificate.as_ref().expect("m < L yields a certificate");
            (
                rate.params,
                TrajectoryBound::from_verified(cert, report).map_err(classify)?,
            )
        }
        Some(beta) => {
            let params = AlgoParams::new(1.0 / cond.L(), beta).map_err(classify)?;
            let bound = smallest_unit_root(kappa, beta)
                .and_then(|omega| certify_point(kappa, beta, omega.sqrt()))
                .and_then(|(cert, report)| TrajectoryBound::from_verified(&cert, &report));
            match bound {
                Ok(bound) => (params, bound),
                Err(e) => {
                    // Divergence is the more specific diagnosis, so run anyway.
                    trace_distances(&f, &params, &x0, &x1, a.iters + 1).map_err(classify)?;
                    return Err(Failure {
                        code: exit::FAILED,
                        message: format!("beta = {beta} has no closed-form certificate: {e}"),
                    });
                }
            }
        }
    };

    let record = run_trajectory(&f, &params, &x0, &x1, a.iters + 1, &bound).map_err(classify)?;

    let mut csv = format!("{TRAJECTORY_HEADER}\n");
    for (t, &d) in record.distances.iter().enumerate() {
        csv.push_str(&format!("{t},{},{}\n", sci(d), sci(record.envelope(t))));
    }
    emit(a.out.as_ref(), &csv, out)?;

    let fitted = record.fitted_rate.map_or_else(|| "none".to_string(), sci);
    let summary = format!(
        "summary: function={} kappa={} beta={} tau={} kappa_p={} c0={} fitted_rate={} violations={}\n",
        f.name(),
        sci(kappa),
        sci(params.beta),
        sci(record.tau_used),
        sci(record.kappa_p),
        sci(record.c0),
        fitted,
        record.bound_violations
    );
    let summary_stream: &mut dyn Write = if a.out.is_some() { out } else { err };
    let _ = summary_stream.write_all(summary.as_bytes());

    Ok(if record.bound_violations > 0 {
        exit::FAILED
    } else {
        exit::OK
    })
}
