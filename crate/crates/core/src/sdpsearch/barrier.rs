//! Max-margin feasibility for the pair `P ⪰ εI`, `H(P) ⪰ −δI` by a primal
//! log-barrier method on seven unknowns: the six free entries of `P` and the
//! margin `t`.
//!
//! ```text
//! maximize t  s.t.  P − (ε + t) I ≻ 0,  H(P) + (δ − t) I ≻ 0,  tr P < R
//! ```
//!
//! The pair is feasible iff the optimum is `≥ 0`. The method stops as soon
//! as an iterate reaches `t ≥ 0` (that iterate is a witness) or the
//! duality-gap bound `t + m/T` on the optimum drops below zero.

use crate::linalg::{eig_sym, solve_spd, spectral_map, EigenPair, SymMat};

use super::LmiOperator;

const VARS: usize = 7;
/// Sum of the barrier orders: 3 + 4 + 1.
const BARRIER_PARAMETER: f64 = 8.0;
const TRACE_BOUND: f64 = 1e3;
const T_GROWTH: f64 = 8.0;
const T_MAX: f64 = 1e14;
const CENTERING_TOL: f64 = 1e-10;
const MAX_NEWTON_PER_CENTERING: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Outcome {
    /// The returned point has `t ≥ 0`.
    Feasible,
    /// The optimum is bounded above by `upper_bound < 0`.
    Infeasible { upper_bound: f64 },
    /// Neither decided before the barrier weight hit its ceiling or the
    /// Newton system broke down.
    Undecided,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct BarrierResult {
    pub outcome: Outcome,
    pub p: SymMat<3>,
    pub margin: f64,
    pub newton_steps: usize,
}

struct Evaluation {
    value: f64,
    grad: [f64; VARS],
    hess: [[f64; VARS]; VARS],
}

struct Barrier<'a> {
    op: &'a LmiOperator,
    p_margin: f64,
    h_slack: f64,
}

pub(crate) fn p_from_vec(x: &[f64]) -> SymMat<3> {
    SymMat::from_rows([[x[0], x[1], x[2]], [x[1], x[3], x[4]], [x[2], x[4], x[5]]])
}

fn p_basis(k: usize) -> SymMat<3> {
    let mut v = [0.0; 6];
    v[k] = 1.0;
    p_from_vec(&v)
}

impl Barrier<'_> {
    fn slack_p(&self, x: &[f64; VARS]) -> SymMat<3> {
        p_from_vec(&x[..6]) - SymMat::identity() * (self.p_margin + x[6])
    }

    fn slack_h(&self, x: &[f64; VARS]) -> SymMat<4> {
        let p: [f64; 6] = std::array::from_fn(|k| x[k]);
        self.op.apply(&p) + SymMat::identity() * (self.h_slack - x[6])
    }

    fn slack_trace(&self, x: &[f64; VARS]) -> f64 {
        TRACE_BOUND - (x[0] + x[3] + x[5])
    }

    /// Barrier value only; `None` outside the domain.
    fn value(&self, x: &[f64; VARS], weight: f64) -> Option<f64> {
        let s3 = self.slack_trace(x);
        if s3 <= 0.0 {
            return None;
        }
        let ld1 = log_det(&eig_sym(&self.slack_p(x)))?;
        let ld2 = log_det(&eig_sym(&self.slack_h(x)))?;
        Some(-weight * x[6] - ld1 - ld2 - s3.ln())
    }

    fn evaluate(&self, x: &[f64; VARS], weight: f64) -> Option<Evaluation> {
        let s3 = self.slack_trace(x);
        if s3 <= 0.0 {
            return None;
        }
        let e1 = eig_sym(&self.slack_p(x));
        let e2 = eig_sym(&self.slack_h(x));
        let value = -weight * x[6] - log_det(&e1)? - log_det(&e2)? - s3.ln();

        let mut grad = [0.0; VARS];
        let mut hess = [[0.0; VARS]; VARS];
        grad[6] = -weight;

        let d1: [SymMat<3>; VARS] = std::array::from_fn(|k| if k < 6 { p_basis(k) } else { SymMat::identity() * -1.0 });
        accumulate_log_det(&e1, &d1, &mut grad, &mut hess);
        let d2: [SymMat<4>; VARS] = std::array::from_fn(|k| {
            if k < 6 {
                self.op.basis[k]
            } else {
                SymMat::identity() * -1.0
            }
        });
        accumulate_log_det(&e2, &d2, &mut grad, &mut hess);

        let dtrace = [1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0];
        for a in 0..VARS {
            grad[a] += dtrace[a] / s3;
            for b in 0..VARS {
                hess[a][b] += dtrace[a] * dtrace[b] / (s3 * s3);
            }
        }
        Some(Evaluation { value, grad, hess })
    }
}

fn log_det<const N: usize>(pairs: &[EigenPair<N>]) -> Option<f64> {
    if pairs[0].value <= 0.0 {
        return None;
    }
    Some(pairs.iter().map(|p| p.value.ln()).sum())
}

// Adds the gradient and Hessian of −ln det S(x) where ∂S/∂x_a = deriv[a].
fn accumulate_log_det<const N: usize>(
    pairs: &[EigenPair<N>],
    deriv: &[SymMat<N>; VARS],
    grad: &mut [f64; VARS],
    hess: &mut [[f64; VARS]; VARS],
) {
    let inv = spectral_map(pairs, |l| 1.0 / l);
    let w: Vec<[[f64; N]; N]> = deriv
        .iter()
        .map(|d| crate::linalg::matmul(inv.rows(), d.rows()))
        .collect();
    for a in 0..VARS {
        grad[a] -= (0..N).map(|i| w[a][i][i]).sum::<f64>();
        for b in a..VARS {
            let mut tr = 0.0;
            for i in 0..N {
                for j in 0..N {
                    tr += w[a][i][j] * w[b][j][i];
                }
            }
            hess[a][b] += tr;
            if a != b {
                hess[b][a] += tr;
            }
        }
    }
}

pub(crate) fn solve(op: &LmiOperator, p_margin: f64, h_slack: f64) -> BarrierResult {
    let barrier = Barrier { op, p_margin, h_slack };

    // Start from P = I with the margin pushed below both minimum eigenvalues.
    let mut x = [1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0];
    let h_min = eig_sym(&barrier.slack_h(&x))[0].value;
    let p_min = eig_sym(&barrier.slack_p(&x))[0].value;
    x[6] = h_min.min(p_min) - 1.0;

    let mut weight = 1.0;
    let mut newton_steps = 0;
    let finish = |x: &[f64; VARS], outcome, steps| BarrierResult {
        outcome,
        p: p_from_vec(&x[..6]),
        margin: x[6],
        newton_steps: steps,
    };

    while weight <= T_MAX {
        let mut centered = false;
        for _ in 0..MAX_NEWTON_PER_CENTERING {
            let Some(eval) = barrier.evaluate(&x, weight) else {
                return finish(&x, Outcome::Undecided, newton_steps);
            };
            let neg_grad = eval.grad.map(|g| -g);
            let Some(step) = newton_direction(&eval.hess, &neg_grad) else {
                return finish(&x, Outcome::Undecided, newton_steps);
            };
            let decrement_sq: f64 = step.iter().zip(&neg_grad).map(|(s, g)| s * g).sum();
            if decrement_sq / 2.0 <= CENTERING_TOL {
                centered = true;
                break;
            }

            let slope = -decrement_sq;
            let mut alpha = 1.0;
            let accepted = loop {
                let trial: [f64; VARS] = std::array::from_fn(|k| x[k] + alpha * step[k]);
                if let Some(v) = barrier.value(&trial, weight) {
                    if v <= eval.value + 0.25 * alpha * slope {
                        break Some(trial);
                    }
                }
                alpha *= 0.5;
                if alpha < 1e-20 {
                    break None;
                }
            };
            let Some(next) = accepted else {
                // No descent left at working precision: treat as centered.
                centered = true;
                break;
            };
            x = next;
            newton_steps += 1;
            if x[6] >= 0.0 {
                return finish(&x, Outcome::Feasible, newton_steps);
            }
        }
        if centered {
            let upper_bound = x[6] + 1.5 * BARRIER_PARAMETER / weight;
            if upper_bound < 0.0 {
                return finish(&x, Outcome::Infeasible { upper_bound }, newton_steps);
            }
        }
        weight *= T_GROWTH;
    }
    finish(&x, Outcome::Undecided, newton_steps)
}

fn newton_direction(hess: &[[f64; VARS]; VARS], rhs: &[f64; VARS]) -> Option<[f64; VARS]> {
    if let Some(step) = solve_spd(hess, rhs) {
        return Some(step);
    }
    // Tikhonov retry for a numerically semidefinite Hessian.
    let scale = (0..VARS).map(|i| hess[i][i].abs()).fold(0.0, f64::max);
    let mut h = *hess;
    for (i, row) in h.iter_mut().enumerate() {
        row[i] += 1e-12 * scale.max(1.0);
    }
    solve_spd(&h, rhs)
}
