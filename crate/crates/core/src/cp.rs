//! Completely positive semigroups on matrix algebras and the inclusion
//! system of their Stinespring fibers.
//!
//! A semigroup is stored through its generator as a superoperator acting on
//! column-stacked matrices, so `tau_t = exp(t L)` acts as
//! `vec(tau_t(X)) = exp(t L) vec(X)`.
//!
//! The fiber `E_t` is the quotient of `H* ⊗ H` by the null space of
//! `<g1⊗h1, g2⊗h2> = <h1, tau_t(|g1><g2|) h2>`. With raw basis index
//! `(g, h) ↦ g·n + h` this Gram matrix coincides entry for entry with the
//! Choi matrix `Σ E_gg' ⊗ tau_t(E_gg')`.

use crate::dyadic::DyadicTime;
use crate::error::{Error, Result};
use crate::linalg::{
    basis_vector, ensure_square, gram_quotient, hermitian_part, identity, isometry_residual, kron, matexp, matrix_unit,
    max_abs, max_abs_diff, min_hermitian_eigenvalue, op_norm, re, unvectorize, vectorize, CMatrix, GramQuotient, Tolerance,
    C64, CHECK_SLACK,
};

#[derive(Debug, Clone, PartialEq)]
pub struct CpSemigroup {
    dim_h: usize,
    generator: CMatrix,
}

/// Build the matrix of a linear map on `rows x cols` matrices by evaluating
/// it on matrix units. `f` is only ever called on real matrix units, which
/// makes maps of the form `Z ↦ L(Z*)*` well defined through linear extension.
pub fn superoperator(rows: usize, cols: usize, f: impl Fn(&CMatrix) -> CMatrix) -> CMatrix {
    let n = rows * cols;
    let mut out = CMatrix::zeros(n, n);
    for j in 0..cols {
        for i in 0..rows {
            let img = f(&matrix_unit(rows, cols, i, j));
            out.column_mut(j * rows + i).copy_from(&vectorize(&img));
        }
    }
    out
}

/// Generator of `X ↦ a X + X b` on `rows x cols` matrices.
pub fn sandwich_generator(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let rows = ensure_square(a)?;
    let cols = ensure_square(b)?;
    Ok(kron(&identity(cols), a)? + kron(&b.transpose(), &identity(rows))?)
}

/// Generator of `Ad(e^{ith})`: `X ↦ i(hX - Xh)`.
pub fn hamiltonian_generator(h: &CMatrix) -> Result<CMatrix> {
    let ih = h * C64::i();
    sandwich_generator(&ih, &(-ih.clone()))
}

/// Heisenberg-picture Lindblad generator
/// `X ↦ i[h, X] + Σ (L* X L - ½{L*L, X})`.
pub fn lindblad_generator(h: &CMatrix, jumps: &[CMatrix]) -> Result<CMatrix> {
    let n = ensure_square(h)?;
    let mut gen = hamiltonian_generator(h)?;
    for l in jumps {
        if l.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!("jump operator is {}x{}, expected {n}x{n}", l.nrows(), l.ncols())));
        }
        let ld = l.adjoint();
        let ldl = &ld * l;
        gen += kron(&l.transpose(), &ld)?;
        gen -= sandwich_generator(&(&ldl * re(0.5)), &(&ldl * re(0.5)))?;
    }
    Ok(gen)
}

/// `tau_t([[a, b], [c, d]]) = e^{-alpha t} [[a + t d, b], [c, d]]` on `B(C^2)`.
pub fn example_tt(alpha: f64) -> CpSemigroup {
    let mut gen = CMatrix::identity(4, 4) * re(-alpha);
    // X[1,1] feeds X[0,0]; vec indices 3 -> 0
    gen[(0, 3)] += re(1.0);
    CpSemigroup { dim_h: 2, generator: gen }
}

/// Times `horizon · 2^-k` for `k = 0..=depth`.
pub fn sample_times(horizon: f64, depth: u32) -> Vec<f64> {
    (0..=depth).map(|k| horizon / (k as f64).exp2()).collect()
}

fn default_samples() -> Vec<f64> {
    let mut t = sample_times(1.0, 6);
    t.extend([2.0, 4.0]);
    t
}

impl CpSemigroup {
    pub fn new(dim_h: usize, generator: CMatrix) -> Result<Self> {
        if dim_h == 0 {
            return Err(Error::DimensionMismatch("dim_h must be positive".into()));
        }
        if generator.shape() != (dim_h * dim_h, dim_h * dim_h) {
            return Err(Error::DimensionMismatch(format!(
                "generator is {}x{}, expected {n}x{n}",
                generator.nrows(),
                generator.ncols(),
                n = dim_h * dim_h
            )));
        }
        crate::linalg::ensure_finite(&generator, "generator")?;
        Ok(CpSemigroup { dim_h, generator })
    }

    pub fn identity(dim_h: usize) -> Self {
        CpSemigroup { dim_h, generator: CMatrix::zeros(dim_h * dim_h, dim_h * dim_h) }
    }

    pub fn dim_h(&self) -> usize {
        self.dim_h
    }

    pub fn generator(&self) -> &CMatrix {
        &self.generator
    }

    /// `exp(t L)` as a superoperator.
    pub fn propagator(&self, t: f64) -> Result<CMatrix> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidTime(format!("t = {t}")));
        }
        matexp(&(&self.generator * re(t)))
    }

    pub fn apply(&self, t: f64, x: &CMatrix) -> Result<CMatrix> {
        if x.shape() != (self.dim_h, self.dim_h) {
            return Err(Error::DimensionMismatch(format!(
                "argument is {}x{}, expected {n}x{n}",
                x.nrows(),
                x.ncols(),
                n = self.dim_h
            )));
        }
        let p = self.propagator(t)?;
        unvectorize(&(p * vectorize(x)), self.dim_h, self.dim_h)
    }

    pub fn choi(&self, t: f64) -> Result<ChoiMatrix> {
        let n = self.dim_h;
        let p = self.propagator(t)?;
        let mut entries = CMatrix::zeros(n * n, n * n);
        for i in 0..n {
            for j in 0..n {
                let img = unvectorize(&(&p * vectorize(&matrix_unit(n, n, i, j))), n, n)?;
                entries.view_mut((i * n, j * n), (n, n)).copy_from(&img);
            }
        }
        Ok(ChoiMatrix { dim_h: n, entries })
    }

    /// Sampled checks of Hermiticity preservation, complete positivity and
    /// contractivity.
    pub fn validate(&self, times: &[f64], tol: &Tolerance) -> Result<()> {
        let n = self.dim_h;
        for &t in times {
            let choi = self.choi(t)?;
            let scale = max_abs(&choi.entries).max(1.0);
            let herm = max_abs_diff(&choi.entries, &choi.entries.adjoint());
            if herm > tol.residual_eps * scale {
                return Err(Error::Constraint(format!("tau_{t} does not preserve Hermiticity (residual {herm:.3e})")));
            }
            let min_eig = min_hermitian_eigenvalue(&choi.entries)?;
            if min_eig < -tol.residual_eps * scale {
                return Err(Error::NotCompletelyPositive { t, min_eigenvalue: min_eig });
            }
            let unit = self.apply(t, &identity(n))?;
            let excess = -min_hermitian_eigenvalue(&(identity(n) - hermitian_part(&unit)))?;
            if excess > tol.residual_eps * scale {
                return Err(Error::NotContractiveSemigroup { t, excess });
            }
        }
        Ok(())
    }

    pub fn validate_default(&self, tol: &Tolerance) -> Result<()> {
        self.validate(&default_samples(), tol)
    }
}

/// Block matrix `[tau(|e_i><e_j|)]_{ij}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    pub dim_h: usize,
    pub entries: CMatrix,
}

impl ChoiMatrix {
    pub fn block(&self, i: usize, j: usize) -> CMatrix {
        let n = self.dim_h;
        self.entries.view((i * n, j * n), (n, n)).into_owned()
    }
}

/// Kraus operators `K_m` with `tau(X) = Σ K_m X K_m*`.
pub fn kraus(c: &ChoiMatrix, tol: &Tolerance) -> Result<Vec<CMatrix>> {
    let n = c.dim_h;
    let q = gram_quotient(&c.entries, tol)?;
    let mut ops = Vec::with_capacity(q.rank);
    for row in 0..q.rank {
        // factor row = sqrt(λ) v*, so K[h, i] = conj(factor[row, (i, h)])
        let mut k = CMatrix::zeros(n, n);
        for i in 0..n {
            for h in 0..n {
                k[(h, i)] = q.factor[(row, i * n + h)].conj();
            }
        }
        ops.push(k);
    }
    Ok(ops)
}

pub fn apply_kraus(ops: &[CMatrix], x: &CMatrix) -> CMatrix {
    ops.iter().fold(CMatrix::zeros(x.nrows(), x.nrows()), |acc, k| acc + k * x * k.adjoint())
}

/// The fiber `E_t` in quotient coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct GnsFiber {
    pub t: DyadicTime,
    pub dim: usize,
    /// `dim x dim_h²`; column `(g, h)` is the class of `g ⊗ h`.
    pub q: CMatrix,
    quotient: GramQuotient,
}

impl GnsFiber {
    pub fn q_pinv(&self) -> CMatrix {
        self.quotient.factor_pinv()
    }

    /// Class of `g ⊗ h` for raw basis vectors.
    pub fn class_of(&self, g: usize, h: usize, dim_h: usize) -> crate::linalg::CVector {
        self.q.column(g * dim_h + h).into_owned()
    }
}

/// Gram matrix of the fiber form on the raw basis of `H* ⊗ H`.
pub fn gns_gram(sg: &CpSemigroup, t: f64) -> Result<CMatrix> {
    Ok(sg.choi(t)?.entries)
}

pub fn gns_fiber(sg: &CpSemigroup, t: DyadicTime, tol: &Tolerance) -> Result<GnsFiber> {
    let g = gns_gram(sg, t.value())?;
    let quotient = gram_quotient(&hermitian_part(&g), tol)?;
    Ok(GnsFiber { t, dim: quotient.rank, q: quotient.factor.clone(), quotient })
}

/// Raw linking map `g⊗h ↦ Σ_k [g⊗f_k] ⊗ [f_k⊗h]` for the orthonormal basis
/// given by the columns of `basis`. The first slot of each pair is
/// antilinear, so `[f_k⊗h] = Σ_j conj(W_jk) [e_j⊗h]`.
pub fn raw_linking_map(n: usize, basis: &CMatrix) -> Result<CMatrix> {
    if basis.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!("basis is {}x{}, expected {n}x{n}", basis.nrows(), basis.ncols())));
    }
    let n2 = n * n;
    let mut r = CMatrix::zeros(n2 * n2, n2);
    for g in 0..n {
        for h in 0..n {
            let col = g * n + h;
            for k in 0..n {
                for l in 0..n {
                    for j in 0..n {
                        let first = g * n + l;
                        let second = j * n + h;
                        r[(first * n2 + second, col)] += basis[(l, k)] * basis[(j, k)].conj();
                    }
                }
            }
        }
    }
    Ok(r)
}

fn beta_from_fibers(fs: &GnsFiber, ft: &GnsFiber, fst: &GnsFiber, raw: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    let beta = kron(&fs.q, &ft.q)? * raw * fst.q_pinv();
    let residual = isometry_residual(&beta);
    if residual > tol.residual_eps * CHECK_SLACK {
        return Err(Error::NotIsometric { residual });
    }
    Ok(beta)
}

pub fn gns_beta(sg: &CpSemigroup, s: DyadicTime, t: DyadicTime, tol: &Tolerance) -> Result<CMatrix> {
    gns_beta_in_basis(sg, s, t, &identity(sg.dim_h), tol)
}

/// [`gns_beta`] built from an arbitrary orthonormal basis of `H`.
pub fn gns_beta_in_basis(sg: &CpSemigroup, s: DyadicTime, t: DyadicTime, basis: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    let st = s.checked_add(&t).ok_or_else(|| Error::InvalidTime(format!("{s} + {t} overflows")))?;
    let fs = gns_fiber(sg, s, tol)?;
    let ft = gns_fiber(sg, t, tol)?;
    let fst = gns_fiber(sg, st, tol)?;
    let raw = raw_linking_map(sg.dim_h, basis)?;
    beta_from_fibers(&fs, &ft, &fst, &raw, tol)
}

/// Variant used by cached inclusion systems that already hold the fibers.
pub(crate) fn gns_beta_cached(
    dim_h: usize,
    fs: &GnsFiber,
    ft: &GnsFiber,
    fst: &GnsFiber,
    tol: &Tolerance,
) -> Result<CMatrix> {
    let raw = raw_linking_map(dim_h, &identity(dim_h))?;
    beta_from_fibers(fs, ft, fst, &raw, tol)
}

/// A CP semigroup on `B(H ⊕ K)` with diagonal parts `phi`, `psi` and an
/// off-diagonal corner semigroup `eta` on `B(K, H)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockCpSemigroup {
    pub tau: CpSemigroup,
    pub phi: CpSemigroup,
    pub psi: CpSemigroup,
    /// Generator of `eta` on column-stacked `dim_h x dim_k` matrices.
    pub eta: CMatrix,
}

impl BlockCpSemigroup {
    pub fn dim_h(&self) -> usize {
        self.phi.dim_h
    }

    pub fn dim_k(&self) -> usize {
        self.psi.dim_h
    }

    /// `eta_t(Y)`.
    pub fn apply_corner(&self, t: f64, y: &CMatrix) -> Result<CMatrix> {
        let (n, m) = (self.dim_h(), self.dim_k());
        if y.shape() != (n, m) {
            return Err(Error::DimensionMismatch(format!("corner argument is {}x{}, expected {n}x{m}", y.nrows(), y.ncols())));
        }
        let p = matexp(&(&self.eta * re(t)))?;
        unvectorize(&(p * vectorize(y)), n, m)
    }

    /// The cross-Gram `<h, eta_t(|g><g'|) h'>` with `(g, h)` over `H* ⊗ H`
    /// and `(g', h')` over `K* ⊗ K`. Raw-basis version of the corner
    /// morphism `D_t: F_t → E_t`.
    pub fn corner_gram(&self, t: f64) -> Result<CMatrix> {
        let (n, m) = (self.dim_h(), self.dim_k());
        let mut c = CMatrix::zeros(n * n, m * m);
        for g in 0..n {
            for gp in 0..m {
                let img = self.apply_corner(t, &matrix_unit(n, m, g, gp))?;
                for h in 0..n {
                    for hp in 0..m {
                        c[(g * n + h, gp * m + hp)] = img[(h, hp)];
                    }
                }
            }
        }
        Ok(c)
    }

    /// `D_t` in the quotient coordinates of the fibers of `phi` and `psi`.
    pub fn corner_morphism(&self, fe: &GnsFiber, ff: &GnsFiber, t: f64) -> Result<CMatrix> {
        let c = self.corner_gram(t)?;
        Ok(fe.q_pinv().adjoint() * c * ff.q_pinv())
    }
}

pub fn block_cp_semigroup(l_phi: &CMatrix, l_psi: &CMatrix, l_eta: &CMatrix, tol: &Tolerance) -> Result<BlockCpSemigroup> {
    let n = superop_dim(l_phi)?;
    let m = superop_dim(l_psi)?;
    if l_eta.shape() != (n * m, n * m) {
        return Err(Error::DimensionMismatch(format!(
            "corner generator is {}x{}, expected {k}x{k}",
            l_eta.nrows(),
            l_eta.ncols(),
            k = n * m
        )));
    }
    let big = n + m;
    let act = |gen: &CMatrix, x: &CMatrix| -> CMatrix {
        let v = gen * vectorize(x);
        CMatrix::from_column_slice(x.nrows(), x.ncols(), v.as_slice())
    };
    let generator = superoperator(big, big, |full| {
        let x = full.view((0, 0), (n, n)).into_owned();
        let y = full.view((0, n), (n, m)).into_owned();
        let z = full.view((n, 0), (m, n)).into_owned();
        let w = full.view((n, n), (m, m)).into_owned();
        let mut out = CMatrix::zeros(big, big);
        out.view_mut((0, 0), (n, n)).copy_from(&act(l_phi, &x));
        out.view_mut((0, n), (n, m)).copy_from(&act(l_eta, &y));
        out.view_mut((n, 0), (m, n)).copy_from(&act(l_eta, &z.adjoint()).adjoint());
        out.view_mut((n, n), (m, m)).copy_from(&act(l_psi, &w));
        out
    });
    let tau = CpSemigroup::new(big, generator)?;
    tau.validate_default(tol)?;
    Ok(BlockCpSemigroup {
        tau,
        phi: CpSemigroup::new(n, l_phi.clone())?,
        psi: CpSemigroup::new(m, l_psi.clone())?,
        eta: l_eta.clone(),
    })
}

fn superop_dim(gen: &CMatrix) -> Result<usize> {
    let n2 = ensure_square(gen)?;
    let n = (n2 as f64).sqrt().round() as usize;
    if n * n != n2 || n == 0 {
        return Err(Error::DimensionMismatch(format!("{n2}x{n2} is not a superoperator on a matrix algebra")));
    }
    Ok(n)
}

/// Block semigroup with `phi_t = Ad(e^{it h_phi})`, `psi_t = Ad(e^{it h_psi})`
/// and corner `Y ↦ e^{ta} Y e^{t b*}`.
pub fn powers_corner(h_phi: &CMatrix, a: &CMatrix, h_psi: &CMatrix, b: &CMatrix, tol: &Tolerance) -> Result<BlockCpSemigroup> {
    let n = ensure_square(h_phi)?;
    let m = ensure_square(h_psi)?;
    if a.shape() != (n, n) || b.shape() != (m, m) {
        return Err(Error::DimensionMismatch("contraction generators must match the Hamiltonians".into()));
    }
    for t in default_samples() {
        for (gen, ham) in [(a, h_phi), (b, h_psi)] {
            let u = matexp(&(gen * re(t)))?;
            let norm = op_norm(&u);
            if norm > 1.0 + tol.residual_eps {
                return Err(Error::NotContractive { norm });
            }
            let w = matexp(&(ham * C64::new(0.0, t)))?;
            let dim = ham.nrows();
            let mut residual: f64 = 0.0;
            for i in 0..dim {
                for j in 0..dim {
                    let x = matrix_unit(dim, dim, i, j);
                    let lhs = &w * &x * w.adjoint() * &u;
                    residual = residual.max(max_abs_diff(&lhs, &(&u * &x)));
                }
            }
            if residual > tol.residual_eps * CHECK_SLACK {
                return Err(Error::IntertwiningViolation { t, residual });
            }
        }
    }
    let l_eta = sandwich_generator(a, &b.adjoint())?;
    block_cp_semigroup(&hamiltonian_generator(h_phi)?, &hamiltonian_generator(h_psi)?, &l_eta, tol)
}

/// Scalar Powers data `H = K = C`, `U_t = e^{-λt}`, `V_t = e^{-μt}`.
pub fn scalar_powers(lambda: f64, mu: f64, tol: &Tolerance) -> Result<BlockCpSemigroup> {
    let s = |x: f64| CMatrix::from_element(1, 1, re(x));
    powers_corner(&s(0.0), &s(-lambda), &s(0.0), &s(-mu), tol)
}

/// Vector `e_g ⊗ e_h` of the raw basis.
pub fn raw_basis(dim_h: usize, g: usize, h: usize) -> crate::linalg::CVector {
    basis_vector(dim_h * dim_h, g * dim_h + h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, diag, hermitian_eigenvalues, numerical_rank};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn dt(m: u64, k: u32) -> DyadicTime {
        DyadicTime::new(m, k).unwrap()
    }

    #[test]
    fn apply_examples() {
        let tt = example_tt(1.0);
        let x = CMatrix::from_row_slice(2, 2, &[c(1.0, 2.0), re(3.0), re(-1.0), c(0.5, 0.5)]);
        assert!(max_abs_diff(&tt.apply(0.0, &x).unwrap(), &x) < 1e-15);
        let img = tt.apply(1.0, &identity(2)).unwrap();
        let e = (-1f64).exp();
        assert!(max_abs_diff(&img, &diag(&[2.0 * e, e])) < 1e-14);
        let id = CpSemigroup::identity(2);
        assert!(max_abs_diff(&id.apply(3.5, &x).unwrap(), &x) < 1e-15);
        // generic point from the displayed formula
        let t = 0.7;
        let expect = CMatrix::from_row_slice(2, 2, &[x[(0, 0)] + x[(1, 1)] * t, x[(0, 1)], x[(1, 0)], x[(1, 1)]]) * re((-t).exp());
        assert!(max_abs_diff(&tt.apply(t, &x).unwrap(), &expect) < 1e-14);
    }

    #[test]
    fn apply_semigroup_law() {
        let tt = example_tt(1.0);
        let x = CMatrix::from_row_slice(2, 2, &[re(1.0), c(0.0, 1.0), re(2.0), re(-3.0)]);
        let lhs = tt.apply(0.25, &tt.apply(0.5, &x).unwrap()).unwrap();
        let rhs = tt.apply(0.75, &x).unwrap();
        assert!(max_abs_diff(&lhs, &rhs) < 1e-13);
    }

    #[test]
    fn choi_examples() {
        let id = CpSemigroup::identity(2).choi(1.0).unwrap();
        assert_eq!(numerical_rank(&id.entries, &tol()), 1);
        assert!(min_hermitian_eigenvalue(&id.entries).unwrap() > -1e-14);

        let cst = 0.4;
        let p = scalar_powers(0.3, 0.1, &tol()).unwrap();
        let t = 0.5;
        let ev = hermitian_eigenvalues(&p.tau.choi(t).unwrap().entries).unwrap();
        let decay = (-cst * t).exp();
        let expect = [0.0, 0.0, 1.0 - decay, 1.0 + decay];
        for (a, b) in ev.iter().zip(expect) {
            assert!((a - b).abs() < 1e-13, "{ev:?}");
        }

        let tt = example_tt(1.0).choi(1.0).unwrap();
        assert!((tt.entries.trace() - re(3.0 * (-1f64).exp())).norm() < 1e-14);
    }

    #[test]
    fn kraus_reconstruction() {
        let id = CpSemigroup::identity(2).choi(1.0).unwrap();
        let ops = kraus(&id, &tol()).unwrap();
        assert_eq!(ops.len(), 1);
        // single operator is a phase times the identity
        let k = &ops[0];
        assert!(max_abs_diff(&(k.adjoint() * k), &identity(2)) < 1e-14);
        assert!(k[(0, 1)].norm() < 1e-14 && (k[(0, 0)] - k[(1, 1)]).norm() < 1e-14);

        // X ↦ tr(X) ρ with ρ full rank
        let rho = diag(&[0.7, 0.3]);
        let depol = superoperator(2, 2, |x| &rho * x.trace());
        let ch = CpSemigroup { dim_h: 2, generator: CMatrix::zeros(4, 4) };
        let _ = ch;
        let mut entries = CMatrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                let img = unvectorize(&(&depol * vectorize(&matrix_unit(2, 2, i, j))), 2, 2).unwrap();
                entries.view_mut((i * 2, j * 2), (2, 2)).copy_from(&img);
            }
        }
        let choi = ChoiMatrix { dim_h: 2, entries };
        let ops = kraus(&choi, &tol()).unwrap();
        assert_eq!(ops.len(), 4);
        let x = CMatrix::from_row_slice(2, 2, &[re(1.0), c(0.0, 2.0), re(-1.0), re(0.5)]);
        assert!(max_abs_diff(&apply_kraus(&ops, &x), &(&rho * x.trace())) < 1e-13);

        let tt = example_tt(1.0);
        let ops = kraus(&tt.choi(1.0).unwrap(), &tol()).unwrap();
        let x = CMatrix::from_row_slice(2, 2, &[re(0.3), c(1.0, -1.0), re(2.0), re(-0.4)]);
        assert!(max_abs_diff(&apply_kraus(&ops, &x), &tt.apply(1.0, &x).unwrap()) < 1e-10);
    }

    #[test]
    fn identity_channel_fiber_is_one_dimensional() {
        // Gram = Choi = |Ω><Ω| for the identity channel
        let f = gns_fiber(&CpSemigroup::identity(2), dt(1, 0), &tol()).unwrap();
        assert_eq!(f.dim, 1);
    }

    #[test]
    fn tt_fiber_gram_by_hand() {
        for t in [dt(1, 2), dt(1, 1), dt(1, 0)] {
            let tv = t.value();
            let e = (-tv).exp();
            let mut hand = CMatrix::zeros(4, 4);
            for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
                hand[(i, j)] = re(e);
            }
            hand[(2, 2)] = re(tv * e);
            let g = gns_gram(&example_tt(1.0), tv).unwrap();
            assert!(max_abs_diff(&g, &hand) < 1e-14);
            let f = gns_fiber(&example_tt(1.0), t, &tol()).unwrap();
            assert_eq!(f.dim, 2);
            // fiber inner products reproduce the Gram form
            assert!(max_abs_diff(&(f.q.adjoint() * &f.q), &hand) < 1e-14);
        }
    }

    #[test]
    fn scalar_powers_fiber_dims() {
        let p = scalar_powers(0.3, 0.2, &tol()).unwrap();
        assert_eq!(gns_fiber(&p.tau, dt(1, 0), &tol()).unwrap().dim, 2);
        let p0 = scalar_powers(0.0, 0.0, &tol()).unwrap();
        assert_eq!(gns_fiber(&p0.tau, dt(1, 0), &tol()).unwrap().dim, 1);
    }

    #[test]
    fn beta_isometric_and_basis_independent() {
        let tt = example_tt(1.0);
        let (s, t) = (dt(1, 2), dt(1, 1));
        let b = gns_beta(&tt, s, t, &tol()).unwrap();
        assert!(isometry_residual(&b) < 1e-10);
        let theta = 0.37f64;
        let w = CMatrix::from_row_slice(2, 2, &[re(theta.cos()), c(0.0, theta.sin()), c(0.0, theta.sin()), re(theta.cos())]);
        let bf = gns_beta_in_basis(&tt, s, t, &w, &tol()).unwrap();
        assert!(max_abs_diff(&b, &bf) < 1e-10);

        let id = CpSemigroup::identity(2);
        let b = gns_beta(&id, s, t, &tol()).unwrap();
        assert_eq!(b.shape(), (1, 1));
        assert!((b[(0, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn block_semigroup_examples() {
        let zero1 = CMatrix::zeros(1, 1);
        let b = block_cp_semigroup(&zero1, &zero1, &zero1, &tol()).unwrap();
        assert!(max_abs(b.tau.generator()) == 0.0);

        let corner = |cst: f64| CMatrix::from_element(1, 1, re(-cst));
        let ok = block_cp_semigroup(&zero1, &zero1, &corner(0.5), &tol()).unwrap();
        let x = CMatrix::from_row_slice(2, 2, &[re(1.0), re(2.0), re(3.0), re(4.0)]);
        let img = ok.tau.apply(1.0, &x).unwrap();
        let d = (-0.5f64).exp();
        let expect = CMatrix::from_row_slice(2, 2, &[re(1.0), re(2.0 * d), re(3.0 * d), re(4.0)]);
        assert!(max_abs_diff(&img, &expect) < 1e-14);
        match block_cp_semigroup(&zero1, &zero1, &corner(-0.5), &tol()) {
            Err(Error::NotCompletelyPositive { min_eigenvalue, .. }) => assert!(min_eigenvalue < 0.0),
            other => panic!("expected CP failure, got {other:?}"),
        }

        // Lindblad data on H ⊕ H restricted to the blocks
        let h = diag(&[0.0, 1.0]);
        let l = CMatrix::from_row_slice(2, 2, &[re(0.0), re(0.5), re(0.0), re(0.0)]);
        let gen = lindblad_generator(&h, std::slice::from_ref(&l)).unwrap();
        let half = (l.adjoint() * &l) * re(0.5);
        let ih = &h * C64::i();
        let corner = sandwich_generator(&(&ih - &half), &(-&ih - &half)).unwrap() + kron(&l.transpose(), &l.adjoint()).unwrap();
        let b = block_cp_semigroup(&gen, &gen, &corner, &tol()).unwrap();
        let mut big_h = CMatrix::zeros(4, 4);
        let mut big_l = CMatrix::zeros(4, 4);
        for off in [0, 2] {
            big_h.view_mut((off, off), (2, 2)).copy_from(&h);
            big_l.view_mut((off, off), (2, 2)).copy_from(&l);
        }
        let direct = lindblad_generator(&big_h, &[big_l]).unwrap();
        assert!(max_abs_diff(b.tau.generator(), &direct) < 1e-14);
    }

    #[test]
    fn lindblad_generator_is_unital_cp() {
        let h = diag(&[0.0, 1.0]);
        let l = CMatrix::from_row_slice(2, 2, &[re(0.0), re(0.7), re(0.0), re(0.0)]);
        let sg = CpSemigroup::new(2, lindblad_generator(&h, &[l]).unwrap()).unwrap();
        sg.validate_default(&tol()).unwrap();
        assert!(max_abs_diff(&sg.apply(1.3, &identity(2)).unwrap(), &identity(2)) < 1e-13);
    }

    #[test]
    fn powers_examples() {
        let p = scalar_powers(0.3, 0.2, &tol()).unwrap();
        let x = CMatrix::from_row_slice(2, 2, &[re(1.0), re(1.0), re(1.0), re(1.0)]);
        let img = p.tau.apply(2.0, &x).unwrap();
        assert!((img[(0, 1)] - re((-1.0f64).exp())).norm() < 1e-14);

        let p0 = scalar_powers(0.0, 0.0, &tol()).unwrap();
        assert_eq!(numerical_rank(&p0.tau.choi(1.0).unwrap().entries, &tol()), 1);

        let h = diag(&[0.0, 1.0]);
        let a = &h * C64::i() - identity(2) * re(0.25);
        let ok = powers_corner(&h, &a, &h, &a, &tol());
        assert!(ok.is_ok(), "{ok:?}");

        let bad_a = diag(&[-0.25, -0.5]);
        assert!(matches!(powers_corner(&h, &bad_a, &h, &bad_a, &tol()), Err(Error::IntertwiningViolation { .. })));
        let s = |x: f64| CMatrix::from_element(1, 1, re(x));
        assert!(matches!(powers_corner(&s(0.0), &s(0.1), &s(0.0), &s(-0.2), &tol()), Err(Error::NotContractive { .. })));
    }

    #[test]
    fn corner_morphism_scalar() {
        let p = scalar_powers(0.3, 0.2, &tol()).unwrap();
        let t = dt(1, 0);
        let fe = gns_fiber(&p.phi, t, &tol()).unwrap();
        let ff = gns_fiber(&p.psi, t, &tol()).unwrap();
        let d = p.corner_morphism(&fe, &ff, 1.0).unwrap();
        assert!((d[(0, 0)] - re((-0.5f64).exp())).norm() < 1e-14);
    }
}
