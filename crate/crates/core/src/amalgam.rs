//! Amalgamation `H ⊕_D K` of two finite-dimensional Hilbert spaces through
//! a contraction `D: K → H`.
//!
//! The semi-inner product on `H ⊕ K` is `<(u1,v1),(u2,v2)> = <(u1,v1), D̃ (u2,v2)>`
//! with `D̃ = [[I, D], [D*, I]]`. In finite dimension the range of `D̃` is closed,
//! so the amalgamation is just the quotient by `ker D̃`, and every vector is a
//! class `[u; v]`. Coordinates on the quotient come from the spectral factor
//! of `D̃`; the two embeddings are the column blocks of that factor.

use crate::error::{Error, Result};
use crate::linalg::{
    contraction_check, gram_quotient, isometry_residual, kron, max_abs_diff, numerical_rank, op_norm, CMatrix, GramQuotient,
    Tolerance,
};

#[derive(Debug, Clone, PartialEq)]
pub struct AmalgamatedSpace {
    pub dim_g: usize,
    /// `dim_g x dim_h`, the image of `H` as `u ↦ [u; 0]`.
    pub embed_left: CMatrix,
    /// `dim_g x dim_k`, the image of `K` as `v ↦ [0; v]`.
    pub embed_right: CMatrix,
    pub d: CMatrix,
    quotient: GramQuotient,
}

/// Residuals of the three defining properties of an [`AmalgamatedSpace`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmalgamResiduals {
    pub left_isometry: f64,
    pub right_isometry: f64,
    pub cross: f64,
    pub spans: bool,
}

impl AmalgamResiduals {
    pub fn max_residual(&self) -> f64 {
        self.left_isometry.max(self.right_isometry).max(self.cross)
    }
}

/// `D̃ = [[I, d], [d*, I]]`.
pub fn dilation_gram(d: &CMatrix) -> CMatrix {
    let (h, k) = d.shape();
    let mut g = CMatrix::identity(h + k, h + k);
    g.view_mut((0, h), (h, k)).copy_from(d);
    g.view_mut((h, 0), (k, h)).copy_from(&d.adjoint());
    g
}

pub fn amalgamate(dim_h: usize, dim_k: usize, d: &CMatrix, tol: &Tolerance) -> Result<AmalgamatedSpace> {
    if dim_h == 0 || dim_k == 0 {
        return Err(Error::DimensionMismatch("amalgamated spaces must be nonzero".into()));
    }
    if d.shape() != (dim_h, dim_k) {
        return Err(Error::DimensionMismatch(format!(
            "contraction is {}x{}, expected {dim_h}x{dim_k}",
            d.nrows(),
            d.ncols()
        )));
    }
    if !contraction_check(d, tol) {
        return Err(Error::NotContractive { norm: op_norm(d) });
    }
    let quotient = gram_quotient(&dilation_gram(d), tol)?;
    let embed_left = quotient.factor.columns(0, dim_h).into_owned();
    let embed_right = quotient.factor.columns(dim_h, dim_k).into_owned();
    Ok(AmalgamatedSpace { dim_g: quotient.rank, embed_left, embed_right, d: d.clone(), quotient })
}

impl AmalgamatedSpace {
    pub fn dim_h(&self) -> usize {
        self.embed_left.ncols()
    }

    pub fn dim_k(&self) -> usize {
        self.embed_right.ncols()
    }

    /// `[embed_left | embed_right]`, the class map `(u, v) ↦ [u; v]`.
    pub fn class_map(&self) -> &CMatrix {
        &self.quotient.factor
    }

    /// Right inverse of [`Self::class_map`]: minimal-norm representative of a class.
    pub fn representative_map(&self) -> CMatrix {
        self.quotient.factor_pinv()
    }

    pub fn residuals(&self, tol: &Tolerance) -> AmalgamResiduals {
        let cross = max_abs_diff(&(self.embed_left.adjoint() * &self.embed_right), &self.d);
        AmalgamResiduals {
            left_isometry: isometry_residual(&self.embed_left),
            right_isometry: isometry_residual(&self.embed_right),
            cross,
            spans: numerical_rank(self.class_map(), tol) == self.dim_g,
        }
    }
}

/// The unique contraction `d` with `<L u, R v> = <u, d v>`, namely `L* R`.
pub fn recover_contraction(embed_left: &CMatrix, embed_right: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    if embed_left.nrows() != embed_right.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "embeddings land in spaces of dimension {} and {}",
            embed_left.nrows(),
            embed_right.nrows()
        )));
    }
    for e in [embed_left, embed_right] {
        let residual = isometry_residual(e);
        if residual > tol.residual_eps {
            return Err(Error::NotIsometric { residual });
        }
    }
    Ok(embed_left.adjoint() * embed_right)
}

/// The map `[u1⊗u2; v1⊗v2] ↦ [u1;0]⊗[u2;0] + [0;v1]⊗[0;v2]` from the
/// amalgamation of the tensor products over `d_s ⊗ d_t` into `G_s ⊗ G_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorEmbedding {
    /// `(E_s⊗E_t) ⊕_{d_s⊗d_t} (F_s⊗F_t)`.
    pub source: AmalgamatedSpace,
    /// `dim(G_s)·dim(G_t) x source.dim_g`.
    pub map: CMatrix,
}

pub fn embed_tensor(pair: (&AmalgamatedSpace, &AmalgamatedSpace), tol: &Tolerance) -> Result<TensorEmbedding> {
    let (gs, gt) = pair;
    let d = kron(&gs.d, &gt.d)?;
    let source = amalgamate(gs.dim_h() * gt.dim_h(), gs.dim_k() * gt.dim_k(), &d, tol)?;
    let left = kron(&gs.embed_left, &gt.embed_left)?;
    let right = kron(&gs.embed_right, &gt.embed_right)?;
    let mut raw = CMatrix::zeros(left.nrows(), left.ncols() + right.ncols());
    raw.columns_mut(0, left.ncols()).copy_from(&left);
    raw.columns_mut(left.ncols(), right.ncols()).copy_from(&right);
    let map = raw * source.representative_map();
    let residual = isometry_residual(&map);
    if residual > tol.residual_eps {
        return Err(Error::NotIsometric { residual });
    }
    Ok(TensorEmbedding { source, map })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, re, zeros};

    fn scalar(x: f64) -> CMatrix {
        CMatrix::from_element(1, 1, re(x))
    }

    #[test]
    fn orthogonal_direct_sum() {
        let a = amalgamate(1, 1, &zeros(1, 1), &Tolerance::default()).unwrap();
        assert_eq!(a.dim_g, 2);
        let ip = (a.embed_left.adjoint() * &a.embed_right)[(0, 0)];
        assert_eq!(ip.norm(), 0.0);
    }

    #[test]
    fn unitary_contraction_identifies_copies() {
        let a = amalgamate(1, 1, &scalar(1.0), &Tolerance::default()).unwrap();
        assert_eq!(a.dim_g, 1);
        assert!(max_abs_diff(&a.embed_left, &a.embed_right) < 1e-15);
    }

    #[test]
    fn half_contraction() {
        let a = amalgamate(1, 1, &scalar(0.5), &Tolerance::default()).unwrap();
        assert_eq!(a.dim_g, 2);
        let ip = (a.embed_left.adjoint() * &a.embed_right)[(0, 0)];
        assert!((ip - re(0.5)).norm() < 1e-15);
        let r = a.residuals(&Tolerance::default());
        assert!(r.max_residual() < 1e-14 && r.spans);
    }

    #[test]
    fn rejects_bad_inputs() {
        let tol = Tolerance::default();
        assert!(matches!(amalgamate(1, 1, &scalar(2.0), &tol), Err(Error::NotContractive { .. })));
        assert!(matches!(amalgamate(2, 1, &scalar(0.5), &tol), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn recover_examples() {
        let tol = Tolerance::default();
        let l = CMatrix::from_column_slice(2, 1, &[re(1.0), re(0.0)]);
        let r = CMatrix::from_column_slice(2, 1, &[re(0.0), re(1.0)]);
        assert_eq!(recover_contraction(&l, &r, &tol).unwrap(), zeros(1, 1));
        let i2 = identity(2);
        assert_eq!(recover_contraction(&i2, &i2, &tol).unwrap(), identity(2));
        let bad = l.scale(2.0);
        assert!(matches!(recover_contraction(&bad, &r, &tol), Err(Error::NotIsometric { .. })));
    }

    #[test]
    fn tensor_embedding_scalar_cases() {
        let tol = Tolerance::default();
        let zero = amalgamate(1, 1, &zeros(1, 1), &tol).unwrap();
        let emb = embed_tensor((&zero, &zero), &tol).unwrap();
        assert_eq!(emb.map.shape(), (4, 2));
        let left_img = emb.map.column(0).into_owned();
        let right_img = emb.map.column(1).into_owned();
        assert!(left_img.dotc(&right_img).norm() < 1e-15);

        let one = amalgamate(1, 1, &scalar(1.0), &tol).unwrap();
        let emb = embed_tensor((&one, &one), &tol).unwrap();
        assert_eq!(emb.map.shape(), (1, 1));
        assert!((emb.map[(0, 0)].norm() - 1.0).abs() < 1e-14);

        let half = amalgamate(1, 1, &scalar(0.5), &tol).unwrap();
        let emb = embed_tensor((&half, &half), &tol).unwrap();
        assert!(isometry_residual(&emb.map) < 1e-10);
    }
}
