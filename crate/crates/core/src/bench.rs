//! Runs the method on functions with known minimizers and checks observed
//! distances against the certified envelope `√κ_P · C₀ · τᵗ`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::certificate::{optimal_tuning, Certificate, VerificationReport};
use crate::error::{invalid, Error, Result};
use crate::model::{classic_beta, nam_step, reference_rate, AlgoParams, ConditionClass, RateKind};
use crate::sdpsearch::{bisect_tau, BetaRule};

/// Multiplicative slack on the envelope.
pub const BOUND_SLACK: f64 = 1e-8;
/// Distances below this fraction of `d₀` are roundoff and excluded from fits.
pub const FIT_FLOOR: f64 = 1e-13;
/// A trajectory exceeding this multiple of `d₀` is declared divergent.
pub const DIVERGENCE_FACTOR: f64 = 1e6;
pub const START_RADIUS: f64 = 10.0;
const SECANT_REL_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
enum Shape {
    Quadratic { spectrum: Vec<f64> },
    LogCosh { dim: usize },
}

/// A member of the strongly convex class with minimizer at the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction {
    m: f64,
    l: f64,
    shape: Shape,
}

impl TestFunction {
    /// `f(x) = ½ Σ λᵢ xᵢ²`. The spectrum must lie in `[m, L]` and contain
    /// both endpoints.
    pub fn quadratic(cond: &ConditionClass, spectrum: Vec<f64>) -> Result<Self> {
        let (m, l) = (cond.m(), cond.L());
        if spectrum.is_empty() {
            return Err(invalid("spectrum", "empty"));
        }
        if let Some(bad) = spectrum.iter().find(|&&v| !(v >= m && v <= l)) {
            return Err(invalid("spectrum", format!("{bad} outside [{m}, {l}]")));
        }
        if !spectrum.contains(&m) || !spectrum.contains(&l) {
            return Err(invalid("spectrum", format!("must contain both {m} and {l}")));
        }
        Ok(Self {
            m,
            l,
            shape: Shape::Quadratic { spectrum },
        })
    }

    /// Quadratic with `dim ≥ 2` eigenvalues evenly spaced from `m` to `L`.
    pub fn quadratic_linspace(cond: &ConditionClass, dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(invalid("dim", format!("{dim} must be at least 2")));
        }
        let (m, l) = (cond.m(), cond.L());
        let spectrum = (0..dim)
            .map(|i| match i {
                0 => m,
                i if i == dim - 1 => l,
                i => m + (l - m) * i as f64 / (dim - 1) as f64,
            })
            .collect();
        Self::quadratic(cond, spectrum)
    }

    /// `f(x) = (m/2)‖x‖² + (L − m) Σ log cosh xᵢ`.
    pub fn logcosh(cond: &ConditionClass, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dim", "must be at least 1"));
        }
        if cond.m() >= cond.L() {
            return Err(Error::InvalidCondition(format!(
                "logcosh needs m < L, got m = {}, L = {}",
                cond.m(),
                cond.L()
            )));
        }
        Ok(Self {
            m: cond.m(),
            l: cond.L(),
            shape: Shape::LogCosh { dim },
        })
    }

    pub fn name(&self) -> &'static str {
        match self.shape {
            Shape::Quadratic { .. } => "quadratic",
            Shape::LogCosh { .. } => "logcosh",
        }
    }

    pub fn dim(&self) -> usize {
        match &self.shape {
            Shape::Quadratic { spectrum } => spectrum.len(),
            Shape::LogCosh { dim } => *dim,
        }
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    #[allow(non_snake_case)]
    pub fn L(&self) -> f64 {
        self.l
    }

    pub fn minimizer(&self) -> Vec<f64> {
        vec![0.0; self.dim()]
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match &self.shape {
            Shape::Quadratic { spectrum } => 0.5 * spectrum.iter().zip(x).map(|(l, v)| l * v * v).sum::<f64>(),
            Shape::LogCosh { .. } => {
                let quad = 0.5 * self.m * x.iter().map(|v| v * v).sum::<f64>();
                quad + (self.l - self.m) * x.iter().map(|&v| log_cosh(v)).sum::<f64>()
            }
        }
    }

    pub fn gradient(&self, x: &[f64], out: &mut [f64]) {
        match &self.shape {
            Shape::Quadratic { spectrum } => {
                for ((o, l), v) in out.iter_mut().zip(spectrum).zip(x) {
                    *o = l * v;
                }
            }
            Shape::LogCosh { .. } => {
                for (o, &v) in out.iter_mut().zip(x) {
                    *o = self.m * v + (self.l - self.m) * v.tanh();
                }
            }
        }
    }
}

fn log_cosh(v: f64) -> f64 {
    let a = v.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SecantReport {
    pub pairs: usize,
    /// Smallest observed `⟨∇f(x)−∇f(y), x−y⟩ / ‖x−y‖²`.
    pub min_ratio: f64,
    /// Largest observed ratio.
    pub max_ratio: f64,
    pub violations: usize,
}

/// Samples `pairs` random `(x, y)` and checks
/// `m‖x−y‖² ≤ ⟨∇f(x)−∇f(y), x−y⟩ ≤ L‖x−y‖²` up to a relative `1e-9`.
pub fn secant_check(f: &TestFunction, pairs: usize, seed: u64) -> SecantReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = f.dim();
    let (mut gx, mut gy) = (vec![0.0; n], vec![0.0; n]);
    let mut report = SecantReport {
        pairs,
        min_ratio: f64::INFINITY,
        max_ratio: f64::NEG_INFINITY,
        violations: 0,
    };
    for _ in 0..pairs {
        let x: Vec<f64> = (0..n)
            .map(|_| START_RADIUS * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let y: Vec<f64> = (0..n)
            .map(|_| START_RADIUS * rng.sample::<f64, _>(StandardNormal))
            .collect();
        f.gradient(&x, &mut gx);
        f.gradient(&y, &mut gy);
        let sq: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
        if sq == 0.0 {
            continue;
        }
        let inner: f64 = (0..n).map(|i| (gx[i] - gy[i]) * (x[i] - y[i])).sum();
        let ratio = inner / sq;
        report.min_ratio = report.min_ratio.min(ratio);
        report.max_ratio = report.max_ratio.max(ratio);
        if ratio < f.m * (1.0 - SECANT_REL_TOL) || ratio > f.l * (1.0 + SECANT_REL_TOL) {
            report.violations += 1;
        }
    }
    report
}

/// A point on the sphere of radius [`START_RADIUS`].
pub fn random_start<R: Rng>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            return v.into_iter().map(|x| START_RADIUS * x / norm).collect();
        }
    }
}

/// Independent starting pair `(x₀, x₁)` determined by `seed`.
pub fn start_pair(dim: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0 = random_start(dim, &mut rng);
    let x1 = random_start(dim, &mut rng);
    (x0, x1)
}

/// Rate and conditioning taken from a certificate that passed verification.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryBound {
    pub tau: f64,
    pub kappa_p: f64,
}

impl TrajectoryBound {
    pub fn from_verified(cert: &Certificate, report: &VerificationReport) -> Result<Self> {
        if !report.passed() {
            return Err(Error::CertificateRejected(Box::new(*report)));
        }
        Ok(Self {
            tau: cert.tau(),
            kappa_p: report.kappa_p,
        })
    }

    /// `√κ_P · c0 · τᵗ`; underflows to zero for large `t`.
    pub fn envelope(&self, c0: f64, t: usize) -> f64 {
        self.kappa_p.sqrt() * c0 * self.tau.powi(t as i32)
    }

    fn exceeded_by(&self, c0: f64, t: usize, d: f64) -> bool {
        if d == 0.0 {
            return false;
        }
        if c0 == 0.0 {
            return true;
        }
        let log_bound = 0.5 * self.kappa_p.ln() + c0.ln() + t as f64 * self.tau.ln() + BOUND_SLACK.ln_1p();
        d.ln() > log_bound
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    /// `d_t = ‖x_t − x*‖` for `t = 0..=T`.
    pub distances: Vec<f64>,
    pub c0: f64,
    pub tau_used: f64,
    pub kappa_p: f64,
    /// `None` when fewer than two distances clear the roundoff floor.
    pub fitted_rate: Option<f64>,
    pub bound_violations: usize,
}

impl TrajectoryRecord {
    pub fn bound(&self) -> TrajectoryBound {
        TrajectoryBound {
            tau: self.tau_used,
            kappa_p: self.kappa_p,
        }
    }

    pub fn envelope(&self, t: usize) -> f64 {
        self.bound().envelope(self.c0, t)
    }
}

/// Distances `‖x_t − x*‖` for `t = 0..=steps` from the pair `(x₀, x₁)`.
/// Fails on dimension mismatch or divergence.
pub fn trace_distances(
    f: &TestFunction,
    params: &AlgoParams,
    x0: &[f64],
    x1: &[f64],
    steps: usize,
) -> Result<Vec<f64>> {
    let n = f.dim();
    for x in [x0, x1] {
        if x.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: x.len(),
            });
        }
    }
    let star = f.minimizer();
    let dist = |x: &[f64]| x.iter().zip(&star).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();

    let mut out = Vec::with_capacity(steps + 1);
    out.push(dist(x0));
    if steps == 0 {
        return Ok(out);
    }
    out.push(dist(x1));
    let reference = if out[0] > 0.0 { out[0] } else { out[1] };
    let limit = DIVERGENCE_FACTOR * reference;

    let (mut prev, mut cur) = (x0.to_vec(), x1.to_vec());
    for t in 2..=steps {
        let (next, _) = nam_step(&cur, &prev, |y, g| f.gradient(y, g), params)?;
        let d = dist(&next);
        if !(d <= limit) {
            return Err(Error::Divergence { t, distance: d, limit });
        }
        out.push(d);
        prev = std::mem::replace(&mut cur, next);
    }
    Ok(out)
}

/// Runs `T` iterations from `(x₀, x₁)` and checks every `d_t` against the
/// envelope of `bound`.
pub fn run_trajectory(
    f: &TestFunction,
    params: &AlgoParams,
    x0: &[f64],
    x1: &[f64],
    steps: usize,
    bound: &TrajectoryBound,
) -> Result<TrajectoryRecord> {
    if steps == 0 {
        return Err(invalid("T", "need at least the initial pair"));
    }
    let distances = trace_distances(f, params, x0, x1, steps)?;
    let c0 = (distances[0].powi(2) + distances[1].powi(2)).sqrt();
    let bound_violations = distances
        .iter()
        .enumerate()
        .filter(|&(t, &d)| bound.exceeded_by(c0, t, d))
        .count();
    let fitted_rate = fit_tail_rate(&distances);
    Ok(TrajectoryRecord {
        distances,
        c0,
        tau_used: bound.tau,
        kappa_p: bound.kappa_p,
        fitted_rate,
        bound_violations,
    })
}

/// Least-squares slope of `log d_t` over `t ∈ [T/2, T]`, skipping values
/// below the roundoff floor. When the floor is reached before `T/2` the
/// window becomes the second half of the stretch above the floor.
pub fn fit_tail_rate(distances: &[f64]) -> Option<f64> {
    let reference = distances.iter().copied().find(|&d| d > 0.0)?;
    let floor = FIT_FLOOR * reference;
    let usable = |d: f64| d > 0.0 && d >= floor;

    let last = distances.len() - 1;
    let window: Vec<(f64, f64)> = (last / 2..=last)
        .filter(|&t| usable(distances[t]))
        .map(|t| (t as f64, distances[t].ln()))
        .collect();
    let window = if window.len() >= 2 {
        window
    } else {
        let end = distances.iter().position(|&d| !usable(d)).unwrap_or(distances.len());
        if end < 2 {
            return None;
        }
        let end = end - 1;
        (end / 2..=end).map(|t| (t as f64, distances[t].ln())).collect()
    };
    if window.len() < 2 {
        return None;
    }

    let n = window.len() as f64;
    let (st, sy) = window.iter().fold((0.0, 0.0), |(a, b), (t, y)| (a + t, b + y));
    let (mt, my) = (st / n, sy / n);
    let (num, den) = window.iter().fold((0.0, 0.0), |(a, b), (t, y)| {
        (a + (t - mt) * (y - my), b + (t - mt) * (t - mt))
    });
    Some((num / den).exp())
}

/// One κ with every reference rate and both momentum rules side by side.
#[derive(Clone, Debug, PartialEq)]
pub struct RateRow {
    pub kappa: f64,
    pub bp: f64,
    pub lq: f64,
    pub nq: f64,
    pub ours: f64,
    pub ng: f64,
    pub beta_classic: f64,
    pub beta_opt: f64,
    /// Bisection result per requested rule; `None` where the search failed.
    pub searched: Vec<Option<f64>>,
}

impl RateRow {
    pub fn rate(&self, kind: RateKind) -> f64 {
        match kind {
            RateKind::BP => self.bp,
            RateKind::LQ => self.lq,
            RateKind::NQ => self.nq,
            RateKind::OURS => self.ours,
            RateKind::NG => self.ng,
        }
    }
}

/// Tolerance on `τ` used for the searched columns of [`rate_table`].
pub const TABLE_TOL_TAU: f64 = 1e-4;

/// One row per grid point. `rules` adds a bisection column per rule.
pub fn rate_table(kappa_grid: &[f64], rules: &[BetaRule]) -> Result<Vec<RateRow>> {
    if kappa_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    kappa_grid
        .iter()
        .enumerate()
        .map(|(i, &kappa)| {
            let rate = |kind| reference_rate(kind, kappa);
            let searched = rules
                .iter()
                .map(|rule| {
                    let beta = rule.beta_at(kappa, i).ok()?;
                    bisect_tau(kappa, beta, TABLE_TOL_TAU).ok().map(|r| r.tau_star)
                })
                .collect();
            Ok(RateRow {
                kappa,
                bp: rate(RateKind::BP)?,
                lq: rate(RateKind::LQ)?,
                nq: rate(RateKind::NQ)?,
                ours: rate(RateKind::OURS)?,
                ng: rate(RateKind::NG)?,
                beta_classic: classic_beta(kappa),
                beta_opt: optimal_tuning(kappa)?.beta,
                searched,
            })
        })
        .collect()
}

/// `points` log-spaced values from `lo` to `hi`, endpoints exact.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return Err(invalid("grid", format!("need 0 < {lo} < {hi}")));
    }
    if points < 2 {
        return Err(invalid("points", format!("{points} must be at least 2")));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..points)
        .map(|i| match i {
            0 => lo,
            i if i == points - 1 => hi,
            i => (a + (b - a) * i as f64 / (points - 1) as f64).exp(),
        })
        .collect())
}
