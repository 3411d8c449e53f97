//! Dense symmetric linear algebra for the tiny matrices that show up in the
//! certificate (orders 2 to 4), plus a handful of fixed-size helpers.
//!
//! Everything here works on stack arrays; nothing allocates except the
//! returned eigenpair list.

use std::fmt;
use std::ops::{Add, Index, Mul, Sub};

/// Symmetric matrix of order `N`, stored in full row-major form.
///
/// Every constructor writes both triangles from the same value, so
/// `self[(i, j)] == self[(j, i)]` holds bit-for-bit.
#[derive(Clone, Copy, PartialEq)]
pub struct SymMat<const N: usize> {
    entries: [[f64; N]; N],
}

/// A single eigenpair: the eigenvector has unit Euclidean norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenPair<const N: usize> {
    pub value: f64,
    pub vector: [f64; N],
}

impl<const N: usize> SymMat<N> {
    pub fn zeros() -> Self {
        Self { entries: [[0.0; N]; N] }
    }

    pub fn identity() -> Self {
        Self::diagonal([1.0; N])
    }

    pub fn diagonal(diag: [f64; N]) -> Self {
        let mut m = Self::zeros();
        for (i, d) in diag.into_iter().enumerate() {
            m.entries[i][i] = d;
        }
        m
    }

    /// Builds the matrix from its upper triangle: `f(i, j)` is called once
    /// for every `i <= j`.
    pub fn from_upper(mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for j in i..N {
                let v = f(i, j);
                m.entries[i][j] = v;
                m.entries[j][i] = v;
            }
        }
        m
    }

    /// Symmetric part `(A + Aᵀ) / 2` of an arbitrary square array.
    pub fn symmetrize(a: &[[f64; N]; N]) -> Self {
        Self::from_upper(|i, j| if i == j { a[i][i] } else { 0.5 * (a[i][j] + a[j][i]) })
    }

    /// Panics if `rows` is not exactly symmetric.
    pub fn from_rows(rows: [[f64; N]; N]) -> Self {
        for i in 0..N {
            for j in 0..i {
                assert!(
                    rows[i][j] == rows[j][i],
                    "SymMat::from_rows: entry ({i},{j}) differs from ({j},{i})"
                );
            }
        }
        Self { entries: rows }
    }

    pub fn order(&self) -> usize {
        N
    }

    pub fn rows(&self) -> &[[f64; N]; N] {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..N).map(|i| self.entries[i][i]).sum()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        self.entries
            .iter()
            .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_fro(&self) -> f64 {
        self.entries.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_upper(|i, j| s * self.entries[i][j])
    }

    /// `Sᵀ A S` for a symmetric similarity given as an index permutation:
    /// row/column `k` of the result is row/column `perm[k]` of `self`.
    pub fn permuted(&self, perm: [usize; N]) -> Self {
        Self::from_upper(|i, j| self.entries[perm[i]][perm[j]])
    }

    pub fn quad_form(&self, x: &[f64; N]) -> f64 {
        let mut acc = 0.0;
        for i in 0..N {
            for j in 0..N {
                acc += x[i] * self.entries[i][j] * x[j];
            }
        }
        acc
    }

    pub fn det(&self) -> f64 {
        det(&self.entries)
    }
}

impl<const N: usize> Default for SymMat<N> {
    fn default() -> Self {
        Self::zeros()
    }
}

impl<const N: usize> Index<(usize, usize)> for SymMat<N> {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.entries[i][j]
    }
}

impl<const N: usize> Add for SymMat<N> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self::from_upper(|i, j| self.entries[i][j] + rhs.entries[i][j])
    }
}

impl<const N: usize> Sub for SymMat<N> {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        Self::from_upper(|i, j| self.entries[i][j] - rhs.entries[i][j])
    }
}

impl<const N: usize> Mul<f64> for SymMat<N> {
    type Output = Self;

    fn mul(self, rhs: f64) -> Self {
        self.scale(rhs)
    }
}

impl<const N: usize> fmt::Debug for SymMat<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.entries.iter()).finish()
    }
}

const JACOBI_MAX_SWEEPS: usize = 64;
const JACOBI_REL_TOL: f64 = 1e-14;

/// Eigendecomposition by cyclic Jacobi rotations, sorted ascending.
///
/// Sweeps visit the upper triangle in row-major order and stop once the
/// off-diagonal Frobenius norm drops below `1e-14 * ‖A‖_F`.
pub fn eig_sym<const N: usize>(a: &SymMat<N>) -> Vec<EigenPair<N>> {
    let mut m = a.entries;
    let mut v = [[0.0; N]; N];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }

    let threshold = JACOBI_REL_TOL * a.norm_fro();
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&m) <= threshold {
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                if m[p][q] != 0.0 {
                    rotate(&mut m, &mut v, p, q);
                }
            }
        }
    }

    let mut pairs: Vec<EigenPair<N>> = (0..N)
        .map(|k| {
            let mut vector = [0.0; N];
            for (i, x) in vector.iter_mut().enumerate() {
                *x = v[i][k];
            }
            EigenPair { value: m[k][k], vector }
        })
        .collect();
    pairs.sort_by(|x, y| x.value.total_cmp(&y.value));
    pairs
}

fn off_diagonal_norm<const N: usize>(m: &[[f64; N]; N]) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        for j in 0..N {
            if i != j {
                acc += m[i][j] * m[i][j];
            }
        }
    }
    acc.sqrt()
}

// One rotation annihilating m[p][q]; accumulates into the columns of v.
fn rotate<const N: usize>(m: &mut [[f64; N]; N], v: &mut [[f64; N]; N], p: usize, q: usize) {
    let apq = m[p][q];
    let theta = (m[q][q] - m[p][p]) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    for k in 0..N {
        let mkp = m[k][p];
        let mkq = m[k][q];
        m[k][p] = c * mkp - s * mkq;
        m[k][q] = s * mkp + c * mkq;
    }
    for k in 0..N {
        let mpk = m[p][k];
        let mqk = m[q][k];
        m[p][k] = c * mpk - s * mqk;
        m[q][k] = s * mpk + c * mqk;
    }
    m[p][q] = 0.0;
    m[q][p] = 0.0;

    for row in v.iter_mut() {
        let vkp = row[p];
        let vkq = row[q];
        row[p] = c * vkp - s * vkq;
        row[q] = s * vkp + c * vkq;
    }
}

pub fn eigenvalues<const N: usize>(a: &SymMat<N>) -> [f64; N] {
    let mut out = [0.0; N];
    for (o, pair) in out.iter_mut().zip(eig_sym(a)) {
        *o = pair.value;
    }
    out
}

/// Smallest eigenvalue. The caller decides what tolerance counts as PSD.
pub fn psd_min_eig<const N: usize>(a: &SymMat<N>) -> f64 {
    eig_sym(a)[0].value
}

/// Rebuilds `Σ f(λᵢ) vᵢ vᵢᵀ` from an eigendecomposition.
pub fn spectral_map<const N: usize>(pairs: &[EigenPair<N>], f: impl Fn(f64) -> f64) -> SymMat<N> {
    let weights: Vec<f64> = pairs.iter().map(|p| f(p.value)).collect();
    SymMat::from_upper(|i, j| {
        pairs
            .iter()
            .zip(&weights)
            .map(|(p, w)| w * p.vector[i] * p.vector[j])
            .sum()
    })
}

/// Singular values of a symmetric matrix below `PINV_RANK_TOL * ‖A‖_∞` are
/// treated as zero.
pub const PINV_RANK_TOL: f64 = 1e-12;

/// Moore–Penrose pseudoinverse of a symmetric 2×2 matrix.
pub fn pinv2(a: &SymMat<2>) -> SymMat<2> {
    let cutoff = PINV_RANK_TOL * a.norm_inf();
    let pairs = eig_sym(a);
    spectral_map(&pairs, |lambda| if lambda.abs() > cutoff { 1.0 / lambda } else { 0.0 })
}

/// Determinants of the leading `k×k` blocks, `k = 1..=N`.
pub fn leading_minors<const N: usize>(a: &SymMat<N>) -> [f64; N] {
    let mut out = [0.0; N];
    for (k, o) in out.iter_mut().enumerate() {
        *o = det_leading(&a.entries, k + 1);
    }
    out
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det<const N: usize>(a: &[[f64; N]; N]) -> f64 {
    det_leading(a, N)
}

fn det_leading<const N: usize>(a: &[[f64; N]; N], k: usize) -> f64 {
    let mut m = *a;
    let mut det = 1.0;
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))
            .unwrap_or(col);
        if m[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        det *= m[col][col];
        for row in (col + 1)..k {
            let factor = m[row][col] / m[col][col];
            for c in col..k {
                m[row][c] -= factor * m[col][c];
            }
        }
    }
    det
}

/// Solves `A x = b` for symmetric positive definite `A` by Cholesky.
/// Returns `None` when a pivot is not strictly positive.
pub fn solve_spd<const N: usize>(a: &[[f64; N]; N], b: &[f64; N]) -> Option<[f64; N]> {
    let mut l = [[0.0; N]; N];
    for i in 0..N {
        for j in 0..=i {
            let mut sum = a[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return None;
                }
                l[i][i] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    let mut y = [0.0; N];
    for i in 0..N {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i][k] * y[k];
        }
        y[i] = sum / l[i][i];
    }
    let mut x = [0.0; N];
    for i in (0..N).rev() {
        let mut sum = y[i];
        for k in (i + 1)..N {
            sum -= l[k][i] * x[k];
        }
        x[i] = sum / l[i][i];
    }
    Some(x)
}

pub fn matmul<const R: usize, const K: usize, const C: usize>(a: &[[f64; K]; R], b: &[[f64; C]; K]) -> [[f64; C]; R] {
    let mut out = [[0.0; C]; R];
    for i in 0..R {
        for k in 0..K {
            let aik = a[i][k];
            for j in 0..C {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

pub fn transpose<const R: usize, const C: usize>(a: &[[f64; C]; R]) -> [[f64; R]; C] {
    let mut out = [[0.0; R]; C];
    for i in 0..R {
        for j in 0..C {
            out[j][i] = a[i][j];
        }
    }
    out
}
