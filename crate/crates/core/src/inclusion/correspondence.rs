//! Explicit unitaries between fibers of systems known to be isomorphic.

use std::sync::Arc;

use super::{AmalgamatedSystem, CpSystem, InclusionSystem, MorphismFamily};
use crate::cp::{gns_fiber, BlockCpSemigroup};
use crate::dyadic::DyadicTime;
use crate::error::{Error, Result};
use crate::linalg::{isometry_residual, max_abs_diff, re, CMatrix, Tolerance};

/// `W_t: E_t → T_t` from the two-dimensional example system into the fibers
/// of the semigroup `e^{-t} [[a + td, b], [c, d]]`, sending `e0` and `e1` to
/// the normalized classes of `e0⊗e0` and `e1⊗e0`.
pub fn example2_to_tt(tt: Arc<CpSystem>) -> MorphismFamily {
    MorphismFamily::new(0.0, move |t| {
        let dim = tt.dim(t)?;
        let mut w = CMatrix::zeros(dim, 2);
        for (col, (g, h)) in [(0, 0), (1, 0)].into_iter().enumerate() {
            let v = tt.class(t, g, h)?;
            let n = v.norm();
            if n == 0.0 {
                return Err(Error::ZeroFamily(format!("class of e{g}⊗e{h} vanishes at {t}")));
            }
            w.column_mut(col).copy_from(&(v * re(1.0 / n)));
        }
        Ok(w)
    })
}

/// Gram comparison between the fibers of a block semigroup `τ` and the
/// amalgamation of its diagonal parts at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct PowersComparison {
    pub t: DyadicTime,
    pub dim_tau: usize,
    pub dim_amalgam: usize,
    /// Max entry gap between the Gram matrices of `{[e_i;0], [0;f_j]}` in
    /// `G_t` and of their images in the fiber of `τ`.
    pub gram_discrepancy: f64,
    /// `W_t: G_t → fiber of τ`.
    pub correspondence: CMatrix,
    pub unitarity_residual: f64,
}

/// Maps from `E_t` and `F_t` (GNS coordinates of `phi` and `psi`) into the
/// fiber of `τ`; `q(g⊗h) ↦ q_τ(g⊗h)` on each diagonal block.
fn block_maps(block: &BlockCpSemigroup, tau: &CpSystem, t: DyadicTime, tol: &Tolerance) -> Result<(CMatrix, CMatrix)> {
    let (n, m) = (block.dim_h(), block.dim_k());
    let big = n + m;
    let fiber = tau.fiber(t)?;
    let pick = |offset: usize, size: usize| {
        let mut cols = CMatrix::zeros(fiber.dim, size * size);
        for g in 0..size {
            for h in 0..size {
                cols.column_mut(g * size + h).copy_from(&fiber.q.column((offset + g) * big + offset + h));
            }
        }
        cols
    };
    let fe = gns_fiber(&block.phi, t, tol)?;
    let ff = gns_fiber(&block.psi, t, tol)?;
    Ok((pick(0, n) * fe.q_pinv(), pick(n, m) * ff.q_pinv()))
}

/// Requires the component systems of `g` to carry the GNS coordinates of
/// `block.phi` and `block.psi` (trivially true for one-dimensional blocks).
pub fn powers_comparison(
    block: &BlockCpSemigroup,
    tau: &CpSystem,
    g: &AmalgamatedSystem,
    t: DyadicTime,
    tol: &Tolerance,
) -> Result<PowersComparison> {
    let (je, jf) = block_maps(block, tau, t, tol)?;
    let space = g.space(t)?;
    if je.ncols() != space.dim_h() || jf.ncols() != space.dim_k() {
        return Err(Error::DimensionMismatch(format!(
            "component fibers have dimensions ({}, {}), block semigroup gives ({}, {})",
            space.dim_h(),
            space.dim_k(),
            je.ncols(),
            jf.ncols()
        )));
    }
    let mut images = CMatrix::zeros(je.nrows(), je.ncols() + jf.ncols());
    images.columns_mut(0, je.ncols()).copy_from(&je);
    images.columns_mut(je.ncols(), jf.ncols()).copy_from(&jf);
    let classes = space.class_map();
    let gram_discrepancy = max_abs_diff(&(classes.adjoint() * classes), &(images.adjoint() * &images));
    let correspondence = images * space.representative_map();
    let unitarity_residual = if correspondence.nrows() == correspondence.ncols() {
        isometry_residual(&correspondence).max(isometry_residual(&correspondence.adjoint()))
    } else {
        f64::INFINITY
    };
    Ok(PowersComparison {
        t,
        dim_tau: tau.dim(t)?,
        dim_amalgam: space.dim_g,
        gram_discrepancy,
        correspondence,
        unitarity_residual,
    })
}

/// [`PowersComparison::correspondence`] as a morphism family `G → τ`.
pub fn powers_correspondence(
    block: Arc<BlockCpSemigroup>,
    tau: Arc<CpSystem>,
    g: Arc<AmalgamatedSystem>,
    tol: Tolerance,
) -> MorphismFamily {
    MorphismFamily::new(0.0, move |t| Ok(powers_comparison(&block, &tau, &g, t, &tol)?.correspondence))
}
