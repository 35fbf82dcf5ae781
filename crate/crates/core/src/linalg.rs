//! Dense complex linear algebra shared by every other module.
//!
//! Matrices are `nalgebra` dense matrices over `Complex64`. Tensor products
//! use the convention that index `(i, k)` of `a ⊗ b` means row `i` of `a`
//! and row `k` of `b`, so `kron(a, b)[(i * b.rows + k, ..)]`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Verification checks accept residuals up to `CHECK_SLACK * residual_eps`,
/// leaving room for rounding accumulated across several factorizations.
pub const CHECK_SLACK: f64 = 100.0;

/// Thresholds used by rank decisions and identity-residual checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    /// Singular values at or below `rank_eps * sigma_max` count as zero.
    pub rank_eps: f64,
    /// Allowed deviation in identities such as `E*E = I`.
    pub residual_eps: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rank_eps: 1e-8, residual_eps: 1e-10 }
    }
}

impl Tolerance {
    pub fn new(rank_eps: f64, residual_eps: f64) -> Result<Self> {
        for (name, v) in [("rank_eps", rank_eps), ("residual_eps", residual_eps)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidTolerance(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Tolerance { rank_eps, residual_eps })
    }
}

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> CMatrix {
    CMatrix::zeros(rows, cols)
}

/// Standard basis vector `e_i` of `C^n`.
pub fn basis_vector(n: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(n);
    v[i] = C64::new(1.0, 0.0);
    v
}

/// Matrix unit `|e_i><e_j|` of shape `rows x cols`.
pub fn matrix_unit(rows: usize, cols: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols);
    m[(i, j)] = C64::new(1.0, 0.0);
    m
}

/// Real diagonal matrix.
pub fn diag(values: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_iterator(values.len(), values.iter().map(|&v| re(v))))
}

pub fn ensure_finite(a: &CMatrix, what: &'static str) -> Result<()> {
    if a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

pub fn ensure_square(a: &CMatrix) -> Result<usize> {
    if a.nrows() == a.ncols() {
        Ok(a.nrows())
    } else {
        Err(Error::NotSquare { rows: a.nrows(), cols: a.ncols() })
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let rows = a.nrows().checked_mul(b.nrows());
    let cols = a.ncols().checked_mul(b.ncols());
    match (rows, cols) {
        (Some(r), Some(c)) if r.checked_mul(c).is_some() => Ok(a.kronecker(b)),
        _ => Err(Error::DimensionOverflow(format!(
            "{}x{} ⊗ {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        ))),
    }
}

/// Tensor product of two vectors, same index convention as [`kron`].
pub fn kron_vec(x: &CVector, y: &CVector) -> CVector {
    let mut out = CVector::zeros(x.len() * y.len());
    for (i, xi) in x.iter().enumerate() {
        for (k, yk) in y.iter().enumerate() {
            out[i * y.len() + k] = xi * yk;
        }
    }
    out
}

/// Column-stacking vectorization.
pub fn vectorize(x: &CMatrix) -> CVector {
    CVector::from_column_slice(x.as_slice())
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &CVector, rows: usize, cols: usize) -> Result<CMatrix> {
    if v.len() != rows * cols {
        return Err(Error::DimensionMismatch(format!(
            "cannot reshape length {} into {rows}x{cols}",
            v.len()
        )));
    }
    Ok(CMatrix::from_column_slice(rows, cols, v.as_slice()))
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entry of `|a - b|`; infinite when shapes differ.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// Spectral norm (largest singular value). Zero for empty matrices.
pub fn op_norm(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().singular_values().iter().cloned().fold(0.0, f64::max)
}

/// `max |a* a - I|`, the isometry defect of `a`.
pub fn isometry_residual(a: &CMatrix) -> f64 {
    max_abs_diff(&(a.adjoint() * a), &identity(a.ncols()))
}

/// Eigenvalues of the Hermitian part of `a`, ascending.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Result<Vec<f64>> {
    let n = ensure_square(a)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(hermitian_part(a)).eigenvalues.iter().cloned().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    Ok(ev)
}

pub fn min_hermitian_eigenvalue(a: &CMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(a)?.first().cloned().unwrap_or(0.0))
}

/// Number of singular values above `rank_eps * sigma_max`.
pub fn numerical_rank(a: &CMatrix, tol: &Tolerance) -> usize {
    if a.is_empty() {
        return 0;
    }
    let sv = a.clone().singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if !(smax > 0.0) {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol.rank_eps * smax).count()
}

/// `true` iff the largest singular value is at most `1 + residual_eps`.
pub fn contraction_check(d: &CMatrix, tol: &Tolerance) -> bool {
    op_norm(d) <= 1.0 + tol.residual_eps
}

/// Moore-Penrose pseudoinverse with the relative rank threshold of `tol`.
pub fn pinv(a: &CMatrix, tol: &Tolerance) -> CMatrix {
    if a.is_empty() {
        return CMatrix::zeros(a.ncols(), a.nrows());
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let u = svd.u.expect("requested u");
    let vt = svd.v_t.expect("requested v_t");
    let mut out = CMatrix::zeros(a.ncols(), a.nrows());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if smax > 0.0 && s > tol.rank_eps * smax {
            out += vt.row(k).adjoint() * u.column(k).adjoint() * re(1.0 / s);
        }
    }
    out
}

/// Spectral factor of a positive semidefinite Gram matrix.
///
/// `factor` is `rank x n` with `factor* factor = g` (up to the discarded
/// eigenvalues) and `factor factor* = diag(eigenvalues)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramQuotient {
    pub rank: usize,
    pub factor: CMatrix,
    /// Retained eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
}

impl GramQuotient {
    /// Pseudoinverse of `factor`, i.e. `factor* diag(1/λ)`.
    pub fn factor_pinv(&self) -> CMatrix {
        let mut p = self.factor.adjoint();
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            p.column_mut(k).scale_mut(1.0 / lam);
        }
        p
    }

    pub fn ambient_dim(&self) -> usize {
        self.factor.ncols()
    }
}

/// Quotient of `C^n` by the null space of the semi-inner product `g`.
pub fn gram_quotient(g: &CMatrix, tol: &Tolerance) -> Result<GramQuotient> {
    let n = ensure_square(g)?;
    ensure_finite(g, "Gram matrix")?;
    if n == 0 {
        return Ok(GramQuotient { rank: 0, factor: CMatrix::zeros(0, 0), eigenvalues: vec![] });
    }
    let eig = SymmetricEigen::new(hermitian_part(g));
    let lam_max = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lam_min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if lam_min < -tol.residual_eps * lam_max.max(1.0) {
        return Err(Error::NotPsd { min_eigenvalue: lam_min });
    }
    let mut order: Vec<usize> = (0..n)
        .filter(|&k| lam_max > 0.0 && eig.eigenvalues[k] > tol.rank_eps * lam_max)
        .collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let rank = order.len();
    let mut factor = CMatrix::zeros(rank, n);
    let mut eigenvalues = Vec::with_capacity(rank);
    for (row, &k) in order.iter().enumerate() {
        let lam = eig.eigenvalues[k];
        let mut v = eig.eigenvectors.column(k).into_owned();
        // fix the phase: largest-magnitude component real positive
        let pivot = v
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bi, bm), (i, z)| if z.norm() > bm + 1e-12 { (i, z.norm()) } else { (bi, bm) })
            .0;
        let phase = v[pivot] / v[pivot].norm();
        v *= phase.conj();
        for j in 0..n {
            factor[(row, j)] = v[j].conj() * lam.sqrt();
        }
        eigenvalues.push(lam);
    }
    Ok(GramQuotient { rank, factor, eigenvalues })
}

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
// 1-norm bounds below which each Padé degree meets unit roundoff
const THETA: [f64; 5] = [1.495585217958292e-2, 2.539398330063230e-1, 9.504178996162932e-1, 2.097847961257068e0, 5.371920351148152e0];

fn norm1(a: &CMatrix) -> f64 {
    a.column_iter().map(|col| col.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

fn pade_low(a: &CMatrix, b: &[f64]) -> (CMatrix, CMatrix) {
    let n = a.nrows();
    let a2 = a * a;
    let mut power = identity(n);
    let mut u = CMatrix::zeros(n, n);
    let mut v = CMatrix::zeros(n, n);
    for k in 0..b.len() / 2 {
        u += &power * re(b[2 * k + 1]);
        v += &power * re(b[2 * k]);
        power = &power * &a2;
    }
    (a * u, v)
}

fn pade13(a: &CMatrix) -> (CMatrix, CMatrix) {
    let n = a.nrows();
    let b = |k: usize| re(PADE13[k]);
    let i = identity(n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9));
    let u = a * (inner_u + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &i * b(1));
    let inner_v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8));
    let v = inner_v + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &i * b(0);
    (u, v)
}

/// Matrix exponential by scaling and squaring around a diagonal Padé core.
pub fn matexp(a: &CMatrix) -> Result<CMatrix> {
    let n = ensure_square(a)?;
    ensure_finite(a, "matexp input")?;
    if n == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    let nrm = norm1(a);
    let (scaled, squarings) = match THETA.iter().position(|&th| nrm <= th) {
        Some(idx) if idx < 4 => (a.clone(), (idx, 0u32)),
        _ => {
            let s = if nrm > THETA[4] { (nrm / THETA[4]).log2().ceil() as u32 } else { 0 };
            (a.unscale(2f64.powi(s as i32)), (4, s))
        }
    };
    let (degree, s) = squarings;
    let (u, v) = match degree {
        0 => pade_low(&scaled, &PADE3),
        1 => pade_low(&scaled, &PADE5),
        2 => pade_low(&scaled, &PADE7),
        3 => pade_low(&scaled, &PADE9),
        _ => pade13(&scaled),
    };
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).ok_or(Error::NonFinite("Padé denominator is singular"))?;
    for _ in 0..s {
        r = &r * &r;
    }
    ensure_finite(&r, "matexp output")?;
    Ok(r)
}
