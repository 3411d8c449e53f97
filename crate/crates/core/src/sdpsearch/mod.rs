//! Numerical route to the rate: for fixed `(κ, β)` bisect on `τ`, deciding
//! at each probe whether some `P ⪰ 0` makes the LMI hold with `λ = 1`,
//! `ρ = τ`, `α = L = 1`.
//!
//! The closed form in [`crate::certificate`] never enters this module, so
//! the two routes can be checked against each other.

mod barrier;

use rayon::prelude::*;

use crate::certificate::assemble_h;
use crate::error::{invalid, Error, Result};
use crate::linalg::{eig_sym, SymMat};
use crate::model::{build_realization, classic_beta, AlgoParams, ConditionClass};

use barrier::Outcome;

/// `ε` in `P ⪰ εI`.
pub const P_MARGIN: f64 = 1e-9;
/// `δ` in `H ⪰ −δI`.
pub const H_SLACK: f64 = 1e-9;
/// Largest rate probed.
pub const TAU_CEILING: f64 = 1.0 - 1e-9;
pub const MIN_TOL_TAU: f64 = 1e-6;

/// One LMI feasibility question in normalized units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeasibilityProblem {
    kappa: f64,
    beta: f64,
    tau: f64,
}

impl FeasibilityProblem {
    pub fn new(kappa: f64, beta: f64, tau: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa >= 1.0) {
            return Err(invalid("kappa", format!("{kappa} must be >= 1")));
        }
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(invalid("beta", format!("{beta} must be nonnegative")));
        }
        if !(tau > 0.0 && tau < 1.0) {
            return Err(invalid("tau", format!("{tau} must lie in (0, 1)")));
        }
        Ok(Self { kappa, beta, tau })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn operator(&self) -> LmiOperator {
        let cond = ConditionClass::normalized(self.kappa).expect("kappa validated");
        let params = AlgoParams::new(1.0, self.beta).expect("beta validated");
        let realization = build_realization(&cond, &params, self.tau).expect("tau validated");
        let offset = assemble_h(&realization, &SymMat::zeros(), 1.0, self.tau);
        let basis = std::array::from_fn(|k| {
            let mut v = [0.0; 6];
            v[k] = 1.0;
            assemble_h(&realization, &barrier::p_from_vec(&v), 0.0, self.tau)
        });
        LmiOperator { offset, basis }
    }
}

/// The affine map `P ↦ H(P) = offset + Σ p_k basis[k]` over the free entries
/// `p = (P₀₀, P₀₁, P₀₂, P₁₁, P₁₂, P₂₂)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LmiOperator {
    pub offset: SymMat<4>,
    pub basis: [SymMat<4>; 6],
}

impl LmiOperator {
    pub fn apply(&self, p: &[f64; 6]) -> SymMat<4> {
        self.basis
            .iter()
            .zip(p)
            .fold(self.offset, |acc, (b, &pk)| acc + *b * pk)
    }

    pub fn apply_matrix(&self, p: &SymMat<3>) -> SymMat<4> {
        self.apply(&[p[(0, 0)], p[(0, 1)], p[(0, 2)], p[(1, 1)], p[(1, 2)], p[(2, 2)]])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Feasible,
    Infeasible,
    /// The solver could not separate the margin from zero.
    Indeterminate,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Feasibility {
    pub verdict: Verdict,
    /// Last iterate; a witness when the verdict is feasible.
    pub p: SymMat<3>,
    /// For feasible verdicts, the worst violation of `P ⪰ εI`, `H ⪰ −δI` by
    /// `p` (zero for a genuine witness). For infeasible verdicts, a lower
    /// bound on how far the best `P` misses.
    pub residual: f64,
    pub newton_steps: usize,
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        self.verdict == Verdict::Feasible
    }
}

/// Decides whether `P ⪰ εI` and `H(P) ⪰ −δI` admit a solution.
pub fn feasibility(prob: &FeasibilityProblem) -> Feasibility {
    let op = prob.operator();
    let result = barrier::solve(&op, P_MARGIN, H_SLACK);
    match result.outcome {
        Outcome::Feasible => {
            let p_min = eig_sym(&result.p)[0].value;
            let h_min = eig_sym(&op.apply_matrix(&result.p))[0].value;
            let residual = (P_MARGIN - p_min).max(-H_SLACK - h_min).max(0.0);
            Feasibility {
                verdict: Verdict::Feasible,
                p: result.p,
                residual,
                newton_steps: result.newton_steps,
            }
        }
        Outcome::Infeasible { upper_bound } => Feasibility {
            verdict: Verdict::Infeasible,
            p: result.p,
            residual: -upper_bound,
            newton_steps: result.newton_steps,
        },
        Outcome::Undecided => Feasibility {
            verdict: Verdict::Indeterminate,
            p: result.p,
            residual: result.margin.abs(),
            newton_steps: result.newton_steps,
        },
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Probe {
    pub tau: f64,
    pub verdict: Verdict,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    pub kappa: f64,
    pub beta: f64,
    pub tau_star: f64,
    pub p_star: SymMat<3>,
    pub feasible_at_tau_star: bool,
    /// Bisection probes, not counting post-hoc checks.
    pub iterations: usize,
    pub residual: f64,
    /// Final `(infeasible, feasible)` endpoints.
    pub bracket: (f64, f64),
    /// Whether re-solving at the lower endpoint still says "not feasible".
    pub bracket_confirmed: bool,
    /// Probes that came back indeterminate (counted as infeasible).
    pub indeterminate_probes: usize,
    /// A feasible point turned up below the lower endpoint.
    pub non_monotone: bool,
    pub trace: Vec<Probe>,
}

/// Smallest feasible `τ` to within `tol_tau`, starting from the bracket
/// `[0, 1)` with a first probe at `τ = 0.5`.
pub fn bisect_tau(kappa: f64, beta: f64, tol_tau: f64) -> Result<SearchResult> {
    if !(kappa.is_finite() && kappa > 1.0) {
        return Err(invalid("kappa", format!("{kappa} must exceed 1")));
    }
    if !(beta.is_finite() && beta > 0.0) {
        return Err(invalid("beta", format!("{beta} must be positive")));
    }
    if !(tol_tau >= MIN_TOL_TAU) {
        return Err(invalid("tol_tau", format!("{tol_tau} must be at least {MIN_TOL_TAU}")));
    }

    let solve_at = |tau: f64| feasibility(&FeasibilityProblem::new(kappa, beta, tau).expect("tau in (0,1)"));

    let (mut lo, mut hi) = (0.0, TAU_CEILING);
    let mut best: Option<Feasibility> = None;
    let mut trace = Vec::new();
    let mut indeterminate_probes = 0;

    let mut tau = 0.5;
    while hi - lo > tol_tau {
        let f = solve_at(tau);
        trace.push(Probe {
            tau,
            verdict: f.verdict,
            residual: f.residual,
        });
        match f.verdict {
            Verdict::Feasible => {
                hi = tau;
                best = Some(f);
            }
            Verdict::Infeasible => lo = tau,
            Verdict::Indeterminate => {
                indeterminate_probes += 1;
                lo = tau;
            }
        }
        tau = 0.5 * (lo + hi);
    }
    let iterations = trace.len();

    let best = match best {
        Some(b) => b,
        None => {
            let f = solve_at(TAU_CEILING);
            if !f.is_feasible() {
                return Err(Error::NoRateFound { kappa, beta });
            }
            f
        }
    };

    let bracket_confirmed = lo == 0.0 || !solve_at(lo).is_feasible();
    let non_monotone = lo > 0.0 && [0.25, 0.5, 0.75].iter().any(|&f| solve_at(f * lo).is_feasible());

    Ok(SearchResult {
        kappa,
        beta,
        tau_star: hi,
        p_star: best.p,
        feasible_at_tau_star: true,
        iterations,
        residual: best.residual,
        bracket: (lo, hi),
        bracket_confirmed,
        indeterminate_probes,
        non_monotone,
        trace,
    })
}

/// How `β` is chosen per `κ` in a sweep.
#[derive(Clone, Debug, PartialEq)]
pub enum BetaRule {
    /// The momentum minimizing the certified rate.
    Optimal,
    /// `(√κ − 1)/(√κ + 1)`.
    Nesterov,
    /// One value per grid point.
    Explicit(Vec<f64>),
}

impl BetaRule {
    pub fn beta_at(&self, kappa: f64, index: usize) -> Result<f64> {
        match self {
            BetaRule::Optimal => Ok(crate::certificate::optimal_tuning(kappa)?.beta),
            BetaRule::Nesterov => Ok(classic_beta(kappa)),
            BetaRule::Explicit(values) => values
                .get(index)
                .copied()
                .ok_or_else(|| invalid("beta_rule", format!("no explicit beta for grid index {index}"))),
        }
    }
}

/// Runs [`bisect_tau`] per grid point, in parallel. Per-point failures are
/// kept in place; the sweep itself only fails on bad input.
pub fn sweep(kappa_grid: &[f64], rule: &BetaRule, tol_tau: f64) -> Result<Vec<Result<SearchResult>>> {
    if kappa_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if let BetaRule::Explicit(values) = rule {
        if values.len() != kappa_grid.len() {
            return Err(invalid(
                "beta_rule",
                format!("{} explicit betas for {} grid points", values.len(), kappa_grid.len()),
            ));
        }
    }
    Ok(kappa_grid
        .par_iter()
        .enumerate()
        .map(|(i, &kappa)| bisect_tau(kappa, rule.beta_at(kappa, i)?, tol_tau))
        .collect())
}
