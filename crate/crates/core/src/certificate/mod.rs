//! The Lyapunov LMI for the accelerated method, its closed-form solution and
//! a numerical verifier for arbitrary candidate certificates.
//!
//! All closed forms live in normalized units: `L = 1`, `α = 1`, `λ = 1`,
//! `ρ = τ`, with `s = 1/κ` playing the role of `m`. Running the iteration
//! with `α = 1/L` on `f` produces the same iterates as `α = 1` on `f/L`, so a
//! certificate in these units carries over to any `(m, L)` with the same
//! condition number.

pub mod cubic;

use crate::error::{invalid, Error, Result};
use crate::linalg::{eig_sym, leading_minors, matmul, pinv2, SymMat};
use crate::model::{build_realization, check_kappa, optimal_omega, AlgoParams, ConditionClass, StateSpaceRealization};

/// Relative PSD slack: `λ_min ≥ −PSD_REL_TOL · ‖H‖_∞` counts as PSD.
pub const PSD_REL_TOL: f64 = 1e-8;
/// Absolute slack for residuals that vanish analytically.
pub const EQ_ABS_TOL: f64 = 1e-8;

/// Candidate `(P, λ, τ, ρ)` for the LMI, with `ω = τ²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Certificate {
    p: SymMat<3>,
    lambda: f64,
    tau: f64,
    rho: f64,
    omega: f64,
}

impl Certificate {
    /// Requires `λ ≥ 0`, `0 < τ < 1` and `0 < ρ ≤ τ`. `P` is not checked;
    /// that is the verifier's job.
    pub fn new(p: SymMat<3>, lambda: f64, tau: f64, rho: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(invalid("lambda", format!("{lambda} must be nonnegative")));
        }
        if !(tau > 0.0 && tau < 1.0) {
            return Err(invalid("tau", format!("{tau} must lie in (0, 1)")));
        }
        if !(rho > 0.0 && rho <= tau) {
            return Err(invalid("rho", format!("{rho} must lie in (0, tau = {tau}]")));
        }
        Ok(Self {
            p,
            lambda,
            tau,
            rho,
            omega: tau * tau,
        })
    }

    pub fn p(&self) -> &SymMat<3> {
        &self.p
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }
}

/// `H = −([ÂᵀPÂ − τ²P, ÂᵀPB̂; B̂ᵀPÂ, B̂ᵀPB̂] + λ [Ĉ D̂]ᵀ M [Ĉ D̂])` with
/// `M = [[0, 1], [1, 0]]`. The LMI holds iff `H ⪰ 0`.
pub fn assemble_h(realization: &StateSpaceRealization, p: &SymMat<3>, lambda: f64, tau: f64) -> SymMat<4> {
    let a = &realization.a_hat;
    let b = realization.b_hat;
    let pm = p.rows();

    let pa = matmul(pm, a);
    let pb: [f64; 3] = std::array::from_fn(|i| (0..3).map(|k| pm[i][k] * b[k]).sum());

    let mut m = [[0.0; 4]; 4];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = (0..3).map(|k| a[k][i] * pa[k][j]).sum::<f64>() - tau * tau * pm[i][j];
        }
        let apb: f64 = (0..3).map(|k| a[k][i] * pb[k]).sum();
        m[i][3] = apb;
        m[3][i] = apb;
    }
    m[3][3] = (0..3).map(|k| b[k] * pb[k]).sum();

    // [Ĉ D̂]ᵀ M [Ĉ D̂] = r0ᵀ r1 + r1ᵀ r0 with r_i the rows of [Ĉ D̂].
    let row = |i: usize| {
        let c = realization.c_hat[i];
        [c[0], c[1], c[2], realization.d_hat[i]]
    };
    let (r0, r1) = (row(0), row(1));
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] += lambda * (r0[i] * r1[j] + r1[i] * r0[j]);
        }
    }
    for v in m.iter_mut().flatten() {
        *v = -*v;
    }
    SymMat::symmetrize(&m)
}

/// The 2×2 blocks `(H₁, H₂, H₃)` of `H = [H₁ H₂; H₂ᵀ H₃]`.
pub fn split_blocks(h: &SymMat<4>) -> (SymMat<2>, [[f64; 2]; 2], SymMat<2>) {
    let h1 = SymMat::from_upper(|i, j| h[(i, j)]);
    let h3 = SymMat::from_upper(|i, j| h[(i + 2, j + 2)]);
    let h2 = [[h[(0, 2)], h[(0, 3)]], [h[(1, 2)], h[(1, 3)]]];
    (h1, h2, h3)
}

/// Closed-form certificate matrix for normalized data, given a root `ω`
/// of the rate polynomial.
pub fn closed_form_p(kappa: f64, beta: f64, omega: f64) -> Result<SymMat<3>> {
    if !(kappa.is_finite() && kappa > 1.0) {
        return Err(invalid("kappa", format!("{kappa} must exceed 1")));
    }
    if !(beta.is_finite() && beta > 0.0) {
        return Err(invalid("beta", format!("{beta} must be positive")));
    }
    if !(omega > 0.0 && omega < 1.0) {
        return Err(invalid("omega", format!("{omega} must lie in (0, 1)")));
    }
    let s = 1.0 / kappa;
    let d = (1.0 - s) * beta;
    if d == 0.0 {
        return Err(invalid("beta", "beta * (1 - 1/kappa) vanishes"));
    }

    let a = -(1.0 / beta + 2.0) * omega + 2.0 * (beta + 2.0) + beta * (s - 1.0) / omega - 2.0 * (beta + 1.0) * s;
    let b = 0.5 * ((2.0 * beta + 1.0) * (s - 1.0) + omega);
    let c = beta - omega * (s + omega - 1.0) / (2.0 * beta * (s - 1.0)) - (beta + 1.0) * s - omega + 1.0;
    let e = omega - d;
    let f = omega * omega / d;
    Ok(SymMat::from_rows([[a, b, c], [b, d, e], [c, e, f]]))
}

/// The rate polynomial in `ω`, evaluated term by term as written:
/// `−4(1−κ)²β²(ω−2) + ω(κ−1+κω)² − 4(1−κ)βω(1−3κ+κω)`.
pub fn rate_polynomial(kappa: f64, beta: f64, omega: f64) -> f64 {
    let k1 = -kappa + 1.0;
    -4.0 * k1 * k1 * beta * beta * (-2.0 + omega) + omega * (kappa - 1.0 + kappa * omega).powi(2)
        - 4.0 * k1 * beta * omega * (-3.0 * kappa + 1.0 + kappa * omega)
}

/// Coefficients `[ω³, ω², ω, 1]` of [`rate_polynomial`].
pub fn rate_polynomial_coefficients(kappa: f64, beta: f64) -> [f64; 4] {
    let km = kappa - 1.0;
    [
        kappa * kappa,
        2.0 * kappa * km + 4.0 * km * beta * kappa,
        km * km - 4.0 * km * km * beta * beta + 4.0 * km * beta * (1.0 - 3.0 * kappa),
        8.0 * km * km * beta * beta,
    ]
}

/// All real roots `ω` of the rate polynomial, ascending.
pub fn rate_cubic_roots(kappa: f64, beta: f64) -> Result<Vec<f64>> {
    if !(kappa.is_finite() && kappa > 1.0) {
        return Err(invalid("kappa", format!("{kappa} must exceed 1")));
    }
    if !(beta.is_finite() && beta > 0.0) {
        return Err(invalid("beta", format!("{beta} must be positive")));
    }
    Ok(cubic::real_roots(rate_polynomial_coefficients(kappa, beta)))
}

/// Smallest root of the rate polynomial inside `(0, 1)`.
pub fn smallest_unit_root(kappa: f64, beta: f64) -> Result<f64> {
    rate_cubic_roots(kappa, beta)?
        .into_iter()
        .find(|&w| w > 0.0 && w < 1.0)
        .ok_or(Error::NoRootInUnitInterval { kappa, beta })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tuning {
    pub beta: f64,
    pub tau: f64,
    pub omega: f64,
}

/// Momentum minimizing the certified rate, and the rate itself:
/// `β = (2κ − √(2κ−1) − 1) / (2(κ + √(2κ−1)))`, `τ = √(1 − √(2κ−1)/κ)`.
pub fn optimal_tuning(kappa: f64) -> Result<Tuning> {
    check_kappa(kappa)?;
    let r = (2.0 * kappa - 1.0).sqrt();
    let beta = ((2.0 * kappa - r - 1.0) / (2.0 * (kappa + r))).max(0.0);
    let omega = optimal_omega(kappa);
    Ok(Tuning {
        beta,
        tau: omega.sqrt(),
        omega,
    })
}

/// Where the discriminant of the rate polynomial, viewed as a quadratic in
/// `β`, changes sign: `ω* = 1 − √(2κ−1)/κ`.
pub fn discriminant_threshold(kappa: f64) -> f64 {
    optimal_omega(kappa)
}

/// Discriminant of the rate polynomial as a quadratic in `β`:
/// `2(κ−1)²(ω−1)ω(κ(κ(ω−1)²−2)+1)`. Real `β` exist iff this is `≥ 0`.
pub fn beta_discriminant(kappa: f64, omega: f64) -> f64 {
    let km = kappa - 1.0;
    2.0 * km * km * (omega - 1.0) * omega * (kappa * (kappa * (omega - 1.0).powi(2) - 2.0) + 1.0)
}

/// Pass/fail per condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Verdicts {
    /// `λ_min(P) > 0`.
    pub p_positive_definite: bool,
    /// `λ_min(H) ≥ −tol`.
    pub h_psd: bool,
    /// `H₃ ⪰ 0`.
    pub h3_psd: bool,
    /// `(I − H₃H₃†)H₂ᵀ = 0`.
    pub range_condition: bool,
    /// `H₁ − H₂H₃†H₂ᵀ ⪰ 0`.
    pub schur_complement_psd: bool,
    /// Leading minors of the permuted `P` all positive.
    pub sylvester: bool,
}

impl Verdicts {
    /// The three-condition Schur characterization of `H ⪰ 0`.
    pub fn schur(&self) -> bool {
        self.h3_psd && self.range_condition && self.schur_complement_psd
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerificationReport {
    pub min_eig_p: f64,
    pub min_eig_h: f64,
    pub h_norm_inf: f64,
    pub schur_h3_min_eig: f64,
    /// Max-abs entry of `(I − H₃H₃†)H₂ᵀ`.
    pub schur_range_residual: f64,
    pub schur_complement_min_eig: f64,
    /// Max-abs entry of `H₁ − H₂H₃†H₂ᵀ`.
    pub schur_complement_max_abs: f64,
    pub det_h3: f64,
    /// `|det H₃| / ‖H₃‖_∞²`.
    pub det_h3_relative: f64,
    /// Leading minors of `P` with rows/columns reordered `(3, 2, 1)`.
    pub sylvester_minors: [f64; 3],
    /// `σ_max(P)/σ_min(P)`.
    pub kappa_p: f64,
    pub verdicts: Verdicts,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        let v = &self.verdicts;
        v.p_positive_definite && v.h_psd && v.schur() && v.sylvester
    }

    /// Constant multiplying `C₀ τᵗ` in the trajectory bound.
    pub fn bound_constant(&self) -> f64 {
        self.kappa_p.sqrt()
    }
}

/// Checks every condition of the LMI for `cert` on the class `cond` under
/// step parameters `params`. Never fails; failures show up in the verdicts.
pub fn verify_certificate(cond: &ConditionClass, params: &AlgoParams, cert: &Certificate) -> VerificationReport {
    let realization = build_realization(cond, params, cert.rho).expect("certificate invariant guarantees rho > 0");
    let h = assemble_h(&realization, &cert.p, cert.lambda, cert.tau);
    verify_h(&cert.p, &h)
}

fn verify_h(p: &SymMat<3>, h: &SymMat<4>) -> VerificationReport {
    let p_eigs = eig_sym(p);
    let min_eig_p = p_eigs[0].value;
    let max_abs_p = p_eigs.iter().fold(0.0f64, |m, e| m.max(e.value.abs()));
    let min_abs_p = p_eigs.iter().fold(f64::INFINITY, |m, e| m.min(e.value.abs()));
    let kappa_p = max_abs_p / min_abs_p;

    let h_norm = h.norm_inf();
    let psd_tol = PSD_REL_TOL * h_norm;
    let min_eig_h = eig_sym(h)[0].value;

    let (h1, h2, h3) = split_blocks(h);
    let h3_min = eig_sym(&h3)[0].value;
    let h3_pinv = pinv2(&h3);
    let h2t = [[h2[0][0], h2[1][0]], [h2[0][1], h2[1][1]]];

    // (I − H₃H₃†) H₂ᵀ
    let proj = matmul(h3.rows(), h3_pinv.rows());
    let complement = [[1.0 - proj[0][0], -proj[0][1]], [-proj[1][0], 1.0 - proj[1][1]]];
    let range = matmul(&complement, &h2t);
    let range_residual = range.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));

    let correction = matmul(&matmul(&h2, h3_pinv.rows()), &h2t);
    let sc_raw: [[f64; 2]; 2] = std::array::from_fn(|i| std::array::from_fn(|j| h1[(i, j)] - correction[i][j]));
    let sc = SymMat::symmetrize(&sc_raw);
    let sc_min = eig_sym(&sc)[0].value;

    let det_h3 = h3.det();
    let h3_norm = h3.norm_inf();
    let det_h3_relative = if h3_norm > 0.0 {
        det_h3.abs() / (h3_norm * h3_norm)
    } else {
        0.0
    };

    let minors = leading_minors(&p.permuted([2, 1, 0]));

    let verdicts = Verdicts {
        p_positive_definite: min_eig_p > 0.0,
        h_psd: min_eig_h >= -psd_tol,
        h3_psd: h3_min >= -psd_tol,
        range_condition: range_residual <= EQ_ABS_TOL,
        schur_complement_psd: sc_min >= -psd_tol,
        sylvester: minors.iter().all(|&m| m > 0.0),
    };

    VerificationReport {
        min_eig_p,
        min_eig_h,
        h_norm_inf: h_norm,
        schur_h3_min_eig: h3_min,
        schur_range_residual: range_residual,
        schur_complement_min_eig: sc_min,
        schur_complement_max_abs: sc.max_abs(),
        det_h3,
        det_h3_relative,
        sylvester_minors: minors,
        kappa_p,
        verdicts,
    }
}

/// A rate valid on the original `(m, L)` together with the normalized
/// certificate that proves it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertifiedRate {
    /// Parameters for the original problem: `α = 1/L` and the tuned `β`.
    pub params: AlgoParams,
    pub tau: f64,
    pub omega: f64,
    /// Smallest root of the rate polynomial in `(0, 1)` at the tuned `β`,
    /// as an independent check on `omega`.
    pub cubic_omega: Option<f64>,
    /// `None` only for `κ = 1`, where the rate follows by continuity and
    /// the closed form is undefined.
    pub certificate: Option<(Certificate, VerificationReport)>,
}

impl CertifiedRate {
    pub fn verified(&self) -> Option<&VerificationReport> {
        self.certificate.as_ref().map(|(_, r)| r)
    }
}

/// Certifies the optimally tuned method for `cond`.
///
/// Fails with [`Error::CertificateRejected`] if the closed-form certificate
/// does not pass verification.
pub fn certified_rate(cond: &ConditionClass) -> Result<CertifiedRate> {
    let kappa = cond.kappa();
    let tuning = optimal_tuning(kappa)?;
    let params = AlgoParams {
        alpha: 1.0 / cond.L(),
        beta: tuning.beta,
    };

    if tuning.beta == 0.0 || tuning.omega == 0.0 || kappa == 1.0 {
        return Ok(CertifiedRate {
            params,
            tau: tuning.tau,
            omega: tuning.omega,
            cubic_omega: None,
            certificate: None,
        });
    }

    let (cert, report) = certify_point(kappa, tuning.beta, tuning.tau)?;
    if !report.passed() {
        return Err(Error::CertificateRejected(Box::new(report)));
    }
    Ok(CertifiedRate {
        params,
        tau: tuning.tau,
        omega: tuning.omega,
        cubic_omega: smallest_unit_root(kappa, tuning.beta).ok(),
        certificate: Some((cert, report)),
    })
}

/// Builds the closed-form certificate at an arbitrary `(κ, β, τ)` in
/// normalized units and verifies it. The report may legitimately fail when
/// `τ²` is not a root of the rate polynomial.
pub fn certify_point(kappa: f64, beta: f64, tau: f64) -> Result<(Certificate, VerificationReport)> {
    let omega = tau * tau;
    let p = closed_form_p(kappa, beta, omega)?;
    let cert = Certificate::new(p, 1.0, tau, tau)?;
    let cond = ConditionClass::normalized(kappa)?;
    let params = AlgoParams::new(1.0, beta)?;
    let report = verify_certificate(&cond, &params, &cert);
    Ok((cert, report))
}

/// How `ρ` moves when scanning `τ` with `P` held fixed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RhoCoupling {
    Fixed(f64),
    EqualsTau,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonotonicityScan {
    pub taus: Vec<f64>,
    pub min_eigs: Vec<f64>,
    /// Indices `i` where `λ_min(H)` drops from `taus[i]` to `taus[i + 1]`.
    pub violations: Vec<usize>,
}

/// Tracks `λ_min(H)` along an increasing `τ` grid with `P` and `λ = 1` fixed
/// in normalized units.
pub fn lmi_monotonicity_scan(
    kappa: f64,
    beta: f64,
    p: &SymMat<3>,
    taus: &[f64],
    rho: RhoCoupling,
) -> Result<MonotonicityScan> {
    let cond = ConditionClass::normalized(kappa)?;
    let params = AlgoParams::new(1.0, beta)?;
    let mut min_eigs = Vec::with_capacity(taus.len());
    for &tau in taus {
        let rho = match rho {
            RhoCoupling::Fixed(r) => r,
            RhoCoupling::EqualsTau => tau,
        };
        let realization = build_realization(&cond, &params, rho)?;
        let h = assemble_h(&realization, p, 1.0, tau);
        min_eigs.push(eig_sym(&h)[0].value);
    }
    // Roundoff-level dips are not violations.
    let violations = min_eigs
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1] < w[0] - 1e-12 * w[0].abs().max(1.0))
        .map(|(i, _)| i)
        .collect();
    Ok(MonotonicityScan {
        taus: taus.to_vec(),
        min_eigs,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_realization, AlgoParams, ConditionClass};

    // High-precision (30-digit) evaluations of the closed forms.
    const BETA_4: f64 = 0.327_596_421_016_083_53;
    const TAU_4: f64 = 0.581_860_956_100_211_6;
    const OMEGA_4: f64 = 0.338_562_172_233_852_4;
    const BETA_100: f64 = 0.810_176_815_737_164_6;
    const TAU_100: f64 = 0.926_786_189_044_345_4;
    const OMEGA_100: f64 = 0.858_932_640_203_341_2;

    fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
            .collect()
    }

    #[test]
    fn assemble_zero() {
        let cond = ConditionClass::new(1.0, 1.0).unwrap();
        let r = build_realization(&cond, &AlgoParams::new(1.0, 0.0).unwrap(), 1.0).unwrap();
        assert_eq!(assemble_h(&r, &SymMat::zeros(), 0.0, 0.5), SymMat::zeros());
    }

    #[test]
    fn assemble_identity_by_hand() {
        // β = 0, α = 1, L = m = 1: Â = [[1,0,0],[1,0,0],[−1,0,0]], B̂ = (−1,0,1).
        // ÂᵀÂ = e₀e₀ᵀ·3, ÂᵀB̂ = (−2, 0, 0), B̂ᵀB̂ = 2.
        let cond = ConditionClass::new(1.0, 1.0).unwrap();
        let r = build_realization(&cond, &AlgoParams::new(1.0, 0.0).unwrap(), 1.0).unwrap();
        let h = assemble_h(&r, &SymMat::identity(), 0.0, 1.0);
        let want = [
            [-2.0, 0.0, 0.0, 2.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [2.0, 0.0, 0.0, -2.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(h[(i, j)], want[i][j], "entry ({i},{j}) of {h:?}");
            }
        }
    }

    #[test]
    fn assemble_multiplier_term_by_hand() {
        // P = 0, λ = 1, β = 0, L = m = 1, ρ = 1:
        // r0 = (1, 0, 1, −1), r1 = (−1, 0, 0, 1); H = −(r0ᵀr1 + r1ᵀr0).
        let cond = ConditionClass::new(1.0, 1.0).unwrap();
        let r = build_realization(&cond, &AlgoParams::new(1.0, 0.0).unwrap(), 1.0).unwrap();
        let h = assemble_h(&r, &SymMat::zeros(), 1.0, 0.5);
        let r0 = [1.0, 0.0, 1.0, -1.0];
        let r1 = [-1.0, 0.0, 0.0, 1.0];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(h[(i, j)], -(r0[i] * r1[j] + r1[i] * r0[j]));
            }
        }
    }

    #[test]
    fn closed_form_entries_kappa4() {
        let p = closed_form_p(4.0, BETA_4, OMEGA_4).unwrap();
        assert!((p[(1, 1)] - 0.245_697_315_762_062_65).abs() < 1e-12);
        assert!((p[(1, 2)] - 0.092_864_856_471_789_71).abs() < 1e-12);
        assert!((p[(2, 2)] - 0.466_526_645_243_079_6).abs() < 1e-12);
        assert!((p[(0, 1)] + 0.451_416_229_645_136_47).abs() < 1e-12);
    }

    #[test]
    fn closed_form_rejects_degenerate_input() {
        assert!(closed_form_p(1.0, 0.1, 0.5).is_err());
        assert!(closed_form_p(4.0, 0.0, 0.5).is_err());
        assert!(closed_form_p(4.0, 0.3, 0.0).is_err());
        assert!(closed_form_p(4.0, 0.3, 1.0).is_err());
    }

    #[test]
    fn cubic_roots_match_optimal_tuning() {
        for (kappa, beta, omega) in [(4.0, BETA_4, OMEGA_4), (100.0, BETA_100, OMEGA_100)] {
            let w = smallest_unit_root(kappa, beta).unwrap();
            assert!((w - omega).abs() < 1e-12, "kappa {kappa}: {w} vs {omega}");
            for r in rate_cubic_roots(kappa, beta).unwrap() {
                let scale: f64 = rate_polynomial_coefficients(kappa, beta).iter().map(|c| c.abs()).sum();
                assert!(rate_polynomial(kappa, beta, r).abs() <= 1e-9 * scale);
            }
        }
    }

    #[test]
    fn coefficients_agree_with_direct_form() {
        for &kappa in &[1.5, 4.0, 37.0, 1e3] {
            for &beta in &[0.1, 0.5, 0.9] {
                let c = rate_polynomial_coefficients(kappa, beta);
                for &w in &[-0.5, 0.0, 0.3, 0.9, 1.7] {
                    let direct = rate_polynomial(kappa, beta, w);
                    let expanded = cubic::eval(c, w);
                    assert!((direct - expanded).abs() <= 1e-10 * direct.abs().max(kappa * kappa));
                }
            }
        }
    }

    #[test]
    fn cubic_bisection_oracle() {
        // Brute force: bisect the directly evaluated polynomial on (0, ω*+δ)
        // after locating a sign change on a fine grid.
        for kappa in [2.0, 4.0, 100.0, 1e4] {
            let t = optimal_tuning(kappa).unwrap();
            let f = |w: f64| rate_polynomial(kappa, t.beta, w);
            let grid: Vec<f64> = (1..20000).map(|i| i as f64 / 20000.0).collect();
            let mut root = None;
            for w in grid.windows(2) {
                if f(w[0]) == 0.0 || f(w[0]).signum() != f(w[1]).signum() {
                    let (mut lo, mut hi) = (w[0], w[1]);
                    for _ in 0..80 {
                        let mid = 0.5 * (lo + hi);
                        if f(lo).signum() == f(mid).signum() {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    root = Some(0.5 * (lo + hi));
                    break;
                }
            }
            let root = root.expect("sign change");
            let got = smallest_unit_root(kappa, t.beta).unwrap();
            assert!((root - got).abs() < 1e-9, "kappa {kappa}: {root} vs {got}");
        }
    }

    #[test]
    fn optimal_tuning_examples() {
        assert_eq!(
            optimal_tuning(1.0).unwrap(),
            Tuning {
                beta: 0.0,
                tau: 0.0,
                omega: 0.0
            }
        );
        let t = optimal_tuning(4.0).unwrap();
        assert!((t.beta - BETA_4).abs() < 1e-15);
        assert!((t.tau - TAU_4).abs() < 1e-15);
        assert!((t.omega - OMEGA_4).abs() < 1e-15);
        let t = optimal_tuning(100.0).unwrap();
        assert!((t.beta - BETA_100).abs() < 1e-15);
        assert!((t.tau - TAU_100).abs() < 1e-15);
        assert!(optimal_tuning(0.9).is_err());
    }

    #[test]
    fn discriminant_changes_sign_at_threshold() {
        assert!((discriminant_threshold(4.0) - OMEGA_4).abs() < 1e-15);
        assert!(discriminant_threshold(1.0 + 1e-12) < 1e-5);
        for kappa in log_grid(1.01, 1e6, 40) {
            let w = discriminant_threshold(kappa);
            if w > 2e-4 {
                assert!(beta_discriminant(kappa, w - 1e-4) < 0.0, "kappa {kappa}");
            }
            assert!(beta_discriminant(kappa, (w + 1e-4).min(0.99999)) >= 0.0);
            for i in 1..50 {
                let below = w * i as f64 / 50.0;
                assert!(beta_discriminant(kappa, below) < 0.0);
            }
        }
    }

    #[test]
    fn certificate_rejects_bad_fields() {
        let p = SymMat::identity();
        assert!(Certificate::new(p, -1.0, 0.5, 0.5).is_err());
        assert!(Certificate::new(p, 1.0, 1.0, 0.5).is_err());
        assert!(Certificate::new(p, 1.0, 0.5, 0.6).is_err());
        assert!(Certificate::new(p, 1.0, 0.5, 0.0).is_err());
        let c = Certificate::new(p, 1.0, 0.5, 0.25).unwrap();
        assert_eq!(c.omega(), 0.25);
    }

    #[test]
    fn verify_closed_form_kappa4() {
        let (_, report) = certify_point(4.0, BETA_4, TAU_4).unwrap();
        assert!(report.passed(), "{report:#?}");
        assert!(report.det_h3_relative <= 1e-10);
        assert!(report.schur_complement_max_abs <= 1e-8);
        assert!(report.min_eig_h >= -1e-9);
    }

    #[test]
    fn verify_rejects_identity_certificate() {
        let cond = ConditionClass::normalized(4.0).unwrap();
        let params = AlgoParams::new(1.0, crate::model::classic_beta(4.0)).unwrap();
        let cert = Certificate::new(SymMat::identity(), 1.0, 0.5, 0.5).unwrap();
        let report = verify_certificate(&cond, &params, &cert);
        assert!(report.min_eig_h < 0.0);
        assert!(!report.passed());
        assert!(!report.verdicts.h_psd);
        assert!(!report.verdicts.schur());
    }

    #[test]
    fn verify_rejects_zero_p() {
        let cond = ConditionClass::normalized(4.0).unwrap();
        let params = AlgoParams::new(1.0, BETA_4).unwrap();
        let cert = Certificate::new(SymMat::zeros(), 1.0, TAU_4, TAU_4).unwrap();
        let report = verify_certificate(&cond, &params, &cert);
        assert!(!report.verdicts.p_positive_definite);
        assert!(!report.passed());
    }

    #[test]
    fn certified_rate_examples() {
        let r = certified_rate(&ConditionClass::new(1.0, 4.0).unwrap()).unwrap();
        assert!((r.tau - TAU_4).abs() < 1e-15);
        assert_eq!(r.params.alpha, 0.25);
        assert!(r.verified().unwrap().passed());

        let r = certified_rate(&ConditionClass::new(1.0, 1.0).unwrap()).unwrap();
        assert_eq!((r.tau, r.params.beta), (0.0, 0.0));
        assert!(r.certificate.is_none());

        let a = certified_rate(&ConditionClass::new(1.0, 4.0).unwrap()).unwrap();
        let b = certified_rate(&ConditionClass::new(2.0, 8.0).unwrap()).unwrap();
        assert_eq!((a.tau, a.params.beta), (b.tau, b.params.beta));
        assert_eq!(b.params.alpha, 0.125);
    }

    #[test]
    fn schur_collapse_and_sylvester_sweep() {
        for kappa in log_grid(1.001, 1e6, 200) {
            let t = optimal_tuning(kappa).unwrap();
            let (_, rep) = certify_point(kappa, t.beta, t.tau).unwrap();
            assert!(rep.det_h3_relative <= 1e-10, "kappa {kappa}: {}", rep.det_h3_relative);
            assert!(rep.schur_complement_max_abs <= 1e-8, "kappa {kappa}");
            assert!(rep.sylvester_minors.iter().all(|&m| m > 0.0), "kappa {kappa}");
            let w = smallest_unit_root(kappa, t.beta).unwrap();
            assert!((w - t.omega).abs() <= 1e-9, "kappa {kappa}: {w} vs {}", t.omega);
        }
    }

    #[test]
    fn lmi_monotone_in_tau_with_rho_fixed() {
        for kappa in [2.0, 4.0, 100.0, 1e4] {
            let t = optimal_tuning(kappa).unwrap();
            let p = closed_form_p(kappa, t.beta, t.omega).unwrap();
            let taus: Vec<f64> = (0..100).map(|i| t.tau + (0.999 - t.tau) * i as f64 / 99.0).collect();
            let fixed = lmi_monotonicity_scan(kappa, t.beta, &p, &taus, RhoCoupling::Fixed(t.tau)).unwrap();
            assert!(fixed.violations.is_empty(), "kappa {kappa}: {:?}", fixed.violations);
            // With ρ tied to τ the multiplier term moves too and the minimum
            // eigenvalue falls; the scan must report it.
            let coupled = lmi_monotonicity_scan(kappa, t.beta, &p, &taus, RhoCoupling::EqualsTau).unwrap();
            assert!(!coupled.violations.is_empty(), "kappa {kappa}");
        }
    }
}
