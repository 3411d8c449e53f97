//! Problem data, the accelerated iteration, its state-space form and the
//! classical rate bounds it is compared against.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

/// Strong convexity modulus `m` and gradient Lipschitz constant `L` of the
/// function class, with `κ = L/m` and `s = 1/κ` cached.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionClass {
    m: f64,
    l: f64,
    kappa: f64,
    s: f64,
}

impl ConditionClass {
    pub fn new(m: f64, l: f64) -> Result<Self> {
        if !(m.is_finite() && l.is_finite()) {
            return Err(Error::InvalidCondition(format!("m = {m} and L = {l} must be finite")));
        }
        if m <= 0.0 {
            return Err(Error::InvalidCondition(format!("m = {m} must be positive")));
        }
        if l < m {
            return Err(Error::InvalidCondition(format!("L = {l} must be at least m = {m}")));
        }
        Ok(Self {
            m,
            l,
            kappa: l / m,
            s: m / l,
        })
    }

    /// Unit-Lipschitz representative `(1/κ, 1)` of the class.
    pub fn normalized(kappa: f64) -> Result<Self> {
        check_kappa(kappa)?;
        Self::new(1.0 / kappa, 1.0)
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    #[allow(non_snake_case)]
    pub fn L(&self) -> f64 {
        self.l
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn s(&self) -> f64 {
        self.s
    }
}

pub(crate) fn check_kappa(kappa: f64) -> Result<()> {
    if kappa.is_finite() && kappa >= 1.0 {
        Ok(())
    } else {
        Err(invalid("kappa", format!("{kappa} must be a finite number >= 1")))
    }
}

/// Step size `alpha` and momentum `beta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlgoParams {
    pub alpha: f64,
    pub beta: f64,
}

impl AlgoParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(invalid("alpha", format!("{alpha} must be positive")));
        }
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(invalid("beta", format!("{beta} must be nonnegative")));
        }
        Ok(Self { alpha, beta })
    }

    /// `alpha = 1/L`, `beta = (√κ − 1)/(√κ + 1)`.
    pub fn classic(cond: &ConditionClass) -> Self {
        Self {
            alpha: 1.0 / cond.L(),
            beta: classic_beta(cond.kappa()),
        }
    }
}

pub fn classic_beta(kappa: f64) -> f64 {
    let r = kappa.sqrt();
    (r - 1.0) / (r + 1.0)
}

/// Linear system `ξ_{t+1} = Â ξ_t + B̂ u_t` with probe output `Ĉ ξ_t + D̂ u_t`.
///
/// The state is `ξ_t = (x_t, x_{t−1}, w_t)`; on `R^p` every entry acts as a
/// multiple of the `p×p` identity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateSpaceRealization {
    pub a_hat: [[f64; 3]; 3],
    pub b_hat: [f64; 3],
    pub c_hat: [[f64; 3]; 2],
    pub d_hat: [f64; 2],
    pub rho: f64,
}

impl StateSpaceRealization {
    /// Momentum, read back from `Â[0][1] = −β`.
    pub fn beta(&self) -> f64 {
        -self.a_hat[0][1]
    }
}

pub fn build_realization(cond: &ConditionClass, params: &AlgoParams, rho: f64) -> Result<StateSpaceRealization> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(invalid("rho", format!("{rho} must be positive")));
    }
    let (m, l) = (cond.m(), cond.L());
    let AlgoParams { alpha, beta } = *params;
    Ok(StateSpaceRealization {
        a_hat: [
            [1.0 + beta, -beta, 0.0],
            [1.0, 0.0, 0.0],
            [l * (-beta - 1.0), beta * l, 0.0],
        ],
        b_hat: [-alpha, 0.0, 1.0],
        c_hat: [
            [l * (beta + 1.0), -l * beta, rho * rho],
            [-m * (beta + 1.0), m * beta, 0.0],
        ],
        d_hat: [-1.0, 1.0],
        rho,
    })
}

/// One step of the accelerated method:
///
/// ```text
/// y_t     = (1 + β) x_t − β x_{t−1}
/// x_{t+1} = y_t − α ∇f(y_t)
/// ```
///
/// `grad(y, out)` must write `∇f(y)` into `out`. Returns `(x_{t+1}, y_t)`.
pub fn nam_step<G>(x_t: &[f64], x_prev: &[f64], grad: G, params: &AlgoParams) -> Result<(Vec<f64>, Vec<f64>)>
where
    G: Fn(&[f64], &mut [f64]),
{
    if x_t.len() != x_prev.len() {
        return Err(Error::DimensionMismatch {
            expected: x_t.len(),
            actual: x_prev.len(),
        });
    }
    let AlgoParams { alpha, beta } = *params;
    let y: Vec<f64> = x_t
        .iter()
        .zip(x_prev)
        .map(|(&xt, &xp)| (1.0 + beta) * xt - beta * xp)
        .collect();
    let mut g = vec![0.0; y.len()];
    grad(&y, &mut g);
    let x_next = y.iter().zip(&g).map(|(&yi, &gi)| yi - alpha * gi).collect();
    Ok((x_next, y))
}

/// Runs the feedback loop `ξ_{t+1} = (Â⊗I_p) ξ_t + (B̂⊗I_p) u_t` with
/// `u_t = ∇f((1+β)x_t − βx_{t−1})`.
///
/// `xi0` is the stacked `(x_1, x_0, w_0)`; the result holds `T + 1` states
/// starting with `xi0`. The Kronecker lift is applied block by block.
pub fn simulate_state_space<G>(
    realization: &StateSpaceRealization,
    grad: G,
    xi0: &[f64],
    steps: usize,
) -> Result<Vec<Vec<f64>>>
where
    G: Fn(&[f64], &mut [f64]),
{
    if !xi0.len().is_multiple_of(3) || xi0.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: 3 * (xi0.len() / 3).max(1),
            actual: xi0.len(),
        });
    }
    let p = xi0.len() / 3;
    let a = &realization.a_hat;
    let beta = realization.beta();
    let b = &realization.b_hat;

    let mut states = Vec::with_capacity(steps + 1);
    states.push(xi0.to_vec());
    let mut y = vec![0.0; p];
    let mut u = vec![0.0; p];
    for _ in 0..steps {
        let xi = states.last().expect("non-empty");
        for k in 0..p {
            y[k] = (1.0 + beta) * xi[k] - beta * xi[p + k];
        }
        grad(&y, &mut u);
        let mut next = vec![0.0; 3 * p];
        for (r, row) in a.iter().enumerate() {
            for k in 0..p {
                let mut acc = b[r] * u[k];
                for (c, &arc) in row.iter().enumerate() {
                    if arc != 0.0 {
                        acc += arc * xi[c * p + k];
                    }
                }
                next[r * p + k] = acc;
            }
        }
        states.push(next);
    }
    Ok(states)
}

/// The reference rates plotted against each other.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RateKind {
    /// Nesterov's general bound `√(1 − 1/√κ)`.
    NG,
    /// Nesterov's quadratic bound `1 − 1/√κ`.
    NQ,
    /// Lower bound for any first-order method `1 − 2/√(κ+1)`.
    BP,
    /// Quadratic-tuned bound `1 − 2/√(3κ+1)`.
    LQ,
    /// The certified rate `√(1 − √(2κ−1)/κ)`.
    OURS,
}

impl RateKind {
    pub const ALL: [RateKind; 5] = [RateKind::BP, RateKind::LQ, RateKind::NQ, RateKind::OURS, RateKind::NG];

    pub fn name(self) -> &'static str {
        match self {
            RateKind::NG => "ng",
            RateKind::NQ => "nq",
            RateKind::BP => "bp",
            RateKind::LQ => "lq",
            RateKind::OURS => "ours",
        }
    }
}

impl fmt::Display for RateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RateKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| invalid("rate kind", format!("unknown rate `{s}`")))
    }
}

/// Evaluates the named closed-form rate. `BP` is returned raw and is
/// negative for `κ < 3`.
pub fn reference_rate(kind: RateKind, kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    Ok(match kind {
        RateKind::NG => (1.0 - 1.0 / kappa.sqrt()).sqrt(),
        RateKind::NQ => 1.0 - 1.0 / kappa.sqrt(),
        RateKind::BP => 1.0 - 2.0 / (kappa + 1.0).sqrt(),
        RateKind::LQ => 1.0 - 2.0 / (3.0 * kappa + 1.0).sqrt(),
        RateKind::OURS => optimal_omega(kappa).sqrt(),
    })
}

/// `1 − √(2κ−1)/κ`, clamped at zero against roundoff near `κ = 1`.
pub(crate) fn optimal_omega(kappa: f64) -> f64 {
    (1.0 - (2.0 * kappa - 1.0).sqrt() / kappa).max(0.0)
}

/// Step size and momentum tuned for quadratics, `α = 4/(3L + m)`,
/// `β = (√(3κ+1) − 2)/(√(3κ+1) + 2)`.
pub fn quadratic_tuning(cond: &ConditionClass) -> AlgoParams {
    let r = (3.0 * cond.kappa() + 1.0).sqrt();
    AlgoParams {
        alpha: 4.0 / (3.0 * cond.L() + cond.m()),
        beta: (r - 2.0) / (r + 2.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_square(x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(x);
    }

    #[test]
    fn condition_class_rejects_bad_input() {
        assert!(ConditionClass::new(0.0, 1.0).is_err());
        assert!(ConditionClass::new(2.0, 1.0).is_err());
        assert!(ConditionClass::new(1.0, f64::INFINITY).is_err());
        let c = ConditionClass::new(0.25, 1.0).unwrap();
        assert_eq!(c.kappa(), 4.0);
        assert_eq!(c.s(), 0.25);
    }

    #[test]
    fn realization_unit_case() {
        let cond = ConditionClass::new(1.0, 1.0).unwrap();
        let r = build_realization(&cond, &AlgoParams::new(1.0, 0.0).unwrap(), 1.0).unwrap();
        assert_eq!(r.a_hat, [[1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]);
        assert_eq!(r.c_hat, [[1.0, 0.0, 1.0], [-1.0, 0.0, 0.0]]);
        assert_eq!(r.b_hat, [-1.0, 0.0, 1.0]);
        assert_eq!(r.d_hat, [-1.0, 1.0]);
    }

    #[test]
    fn realization_optimal_tuning_kappa4() {
        let cond = ConditionClass::new(0.25, 1.0).unwrap();
        let params = AlgoParams::new(1.0, 0.3275964).unwrap();
        let r = build_realization(&cond, &params, 0.5818610).unwrap();
        assert_eq!(r.a_hat[0], [1.3275964, -0.3275964, 0.0]);
        assert_eq!(r.c_hat[0][2], 0.5818610 * 0.5818610);
    }

    #[test]
    fn realization_rejects_nonpositive_rho() {
        let cond = ConditionClass::new(1.0, 1.0).unwrap();
        let params = AlgoParams::new(1.0, 0.0).unwrap();
        assert!(build_realization(&cond, &params, 0.0).is_err());
        assert!(build_realization(&cond, &params, -1.0).is_err());
    }

    #[test]
    fn nam_step_examples() {
        let (x, y) = nam_step(&[2.0], &[2.0], half_square, &AlgoParams::new(1.0, 0.0).unwrap()).unwrap();
        assert_eq!((x, y), (vec![0.0], vec![2.0]));
        let (x, y) = nam_step(&[1.0], &[0.0], half_square, &AlgoParams::new(1.0, 0.5).unwrap()).unwrap();
        assert_eq!((x, y), (vec![0.0], vec![1.5]));
    }

    #[test]
    fn nam_step_fixed_point_and_mismatch() {
        let params = AlgoParams::new(0.3, 0.7).unwrap();
        let grad = |x: &[f64], out: &mut [f64]| {
            out[0] = 2.0 * (x[0] - 3.0);
            out[1] = 5.0 * (x[1] + 1.0);
        };
        let star = [3.0, -1.0];
        let (x, y) = nam_step(&star, &star, grad, &params).unwrap();
        assert_eq!(x, star);
        assert_eq!(y, star);
        assert!(matches!(
            nam_step(&[1.0, 2.0], &[1.0], grad, &params),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn state_space_zero_steps() {
        let cond = ConditionClass::new(1.0, 1.0).unwrap();
        let params = AlgoParams::new(1.0, 0.0).unwrap();
        let r = build_realization(&cond, &params, 1.0).unwrap();
        let states = simulate_state_space(&r, half_square, &[2.0, 2.0, 0.0], 0).unwrap();
        assert_eq!(states, vec![vec![2.0, 2.0, 0.0]]);
    }

    #[test]
    fn state_space_gradient_step_hits_minimizer() {
        let cond = ConditionClass::new(1.0, 1.0).unwrap();
        let params = AlgoParams::new(1.0, 0.0).unwrap();
        let r = build_realization(&cond, &params, 1.0).unwrap();
        let states = simulate_state_space(&r, half_square, &[2.0, 2.0, 0.0], 4).unwrap();
        let firsts: Vec<f64> = states.iter().map(|s| s[0]).collect();
        assert_eq!(firsts, vec![2.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn state_space_rejects_bad_dimension() {
        let cond = ConditionClass::new(1.0, 1.0).unwrap();
        let r = build_realization(&cond, &AlgoParams::new(1.0, 0.0).unwrap(), 1.0).unwrap();
        assert!(simulate_state_space(&r, half_square, &[1.0, 2.0], 3).is_err());
    }

    #[test]
    fn reference_rate_examples() {
        let at = |k| reference_rate(k, 100.0).unwrap();
        assert!((at(RateKind::NQ) - 0.9).abs() < 1e-15);
        assert!((at(RateKind::NG) - 0.948_683_298_050_513_8).abs() < 1e-15);
        assert!((at(RateKind::LQ) - 0.884_721_916_459_153).abs() < 1e-15);
        assert!((at(RateKind::BP) - 0.800_992_561_958_002_2).abs() < 1e-15);
        assert_eq!(reference_rate(RateKind::OURS, 1.0).unwrap(), 0.0);
        assert!(reference_rate(RateKind::BP, 2.0).unwrap() < 0.0);
        assert!(reference_rate(RateKind::NG, 0.5).is_err());
    }

    #[test]
    fn rate_kind_parses() {
        for k in RateKind::ALL {
            assert_eq!(k.name().parse::<RateKind>().unwrap(), k);
        }
        assert!("xx".parse::<RateKind>().is_err());
    }
}
