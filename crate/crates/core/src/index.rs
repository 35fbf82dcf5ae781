//! Covariance kernels, their centered ranks, and the exponential units of
//! symmetric Fock space used as a reference.

use crate::dyadic::DyadicTime;
use crate::error::{Error, Result};
use crate::inclusion::{GridUnit, InclusionSystem};
use crate::limits::{covariance, LimitOptions};
use crate::linalg::{hermitian_eigenvalues, isometry_residual, max_abs_diff, CMatrix, CVector, Tolerance, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct CovKernel {
    pub labels: Vec<String>,
    pub gamma: CMatrix,
    /// Entrywise accuracy of `gamma`; singular values of the centered kernel
    /// below it are treated as zero. Zero for exactly known kernels.
    pub accuracy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelDiagnostics {
    pub hermitian_residual: f64,
    /// Smallest eigenvalue of `γ` compressed to `{c : Σ c_i = 0}`.
    pub cpd_min_eigenvalue: f64,
}

impl CovKernel {
    pub fn new(labels: Vec<String>, gamma: CMatrix, accuracy: f64) -> Result<Self> {
        if gamma.nrows() != gamma.ncols() || gamma.nrows() != labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "kernel is {}x{} for {} labels",
                gamma.nrows(),
                gamma.ncols(),
                labels.len()
            )));
        }
        for (i, a) in labels.iter().enumerate() {
            if labels[..i].contains(a) {
                return Err(Error::Constraint(format!("duplicate label {a}")));
            }
        }
        Ok(CovKernel { labels, gamma, accuracy })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.labels.iter().position(|l| l == label).ok_or_else(|| Error::Constraint(format!("unknown label {label}")))
    }

    pub fn diagnostics(&self) -> Result<KernelDiagnostics> {
        let n = self.len();
        let hermitian_residual = max_abs_diff(&self.gamma, &self.gamma.adjoint());
        let cpd_min_eigenvalue = if n < 2 {
            0.0
        } else {
            // orthonormal basis of the sum-zero subspace: e_1 - e_j differences, orthonormalized
            let mut diffs = CMatrix::zeros(n, n - 1);
            for j in 1..n {
                diffs[(0, j - 1)] = C64::new(1.0, 0.0);
                diffs[(j, j - 1)] = C64::new(-1.0, 0.0);
            }
            let q = diffs.qr().q();
            let herm = (&self.gamma + self.gamma.adjoint()) * C64::new(0.5, 0.0);
            let compressed = q.adjoint() * herm * &q;
            hermitian_eigenvalues(&compressed)?[0]
        };
        Ok(KernelDiagnostics { hermitian_residual, cpd_min_eigenvalue })
    }

    /// Hermitian and conditionally positive definite to `eps`.
    pub fn validate(&self, eps: f64) -> Result<KernelDiagnostics> {
        let d = self.diagnostics()?;
        if d.hermitian_residual > eps {
            return Err(Error::Constraint(format!("kernel is not Hermitian (residual {:.3e})", d.hermitian_residual)));
        }
        if d.cpd_min_eigenvalue < -eps {
            return Err(Error::NotPsd { min_eigenvalue: d.cpd_min_eigenvalue });
        }
        Ok(d)
    }
}

/// Pairwise covariances over a labelled unit set.
pub fn cov_kernel(
    sys: &dyn InclusionSystem,
    units: &[(String, GridUnit)],
    probes: &[DyadicTime],
    opts: &LimitOptions,
    tol: &Tolerance,
) -> Result<CovKernel> {
    let n = units.len();
    let mut gamma = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let g = covariance(sys, &units[i].1, &units[j].1, probes, opts, tol)?.gamma;
            gamma[(i, j)] = g;
            gamma[(j, i)] = g.conj();
        }
    }
    let kernel = CovKernel::new(units.iter().map(|(l, _)| l.clone()).collect(), gamma, opts.agreement_tol)?;
    Ok(kernel)
}

/// `L[i,j] = γ(i,j) - γ(i,r) - γ(r,j) + γ(r,r)`.
pub fn centered(kernel: &CovKernel, reference: &str, tol: &Tolerance) -> Result<CMatrix> {
    let r = kernel.position(reference)?;
    let g = &kernel.gamma;
    let n = kernel.len();
    let l = CMatrix::from_fn(n, n, |i, j| g[(i, j)] - g[(i, r)] - g[(r, j)] + g[(r, r)]);
    let min = if n == 0 { 0.0 } else { hermitian_eigenvalues(&((&l + l.adjoint()) * C64::new(0.5, 0.0)))?[0] };
    let slack = tol.residual_eps.max(kernel.accuracy);
    if min < -slack * CMatrixNorm::scale(&l) {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    Ok(l)
}

struct CMatrixNorm;

impl CMatrixNorm {
    fn scale(m: &CMatrix) -> f64 {
        m.iter().map(|z| z.norm()).fold(1.0, f64::max)
    }
}

/// Rank of the centered kernel at the first label: a lower bound for the
/// index certified by this unit set.
pub fn index_estimate(kernel: &CovKernel, tol: &Tolerance) -> Result<usize> {
    let Some(first) = kernel.labels.first() else {
        return Ok(0);
    };
    let l = centered(kernel, first, tol)?;
    let sv = l.singular_values();
    // measured against the kernel itself so that a vanishing L reads as rank 0
    let scale = sv.iter().copied().fold(CMatrixNorm::scale(&kernel.gamma), f64::max);
    let cut = (tol.rank_eps * scale).max(kernel.accuracy);
    Ok(sv.iter().filter(|s| **s > cut).count())
}

/// `p = -(γ(u0,u0) + γ(v0,v0))`.
pub fn defect_p(gamma_u0: C64, gamma_v0: C64, tol: &Tolerance) -> Result<f64> {
    let p = -(gamma_u0 + gamma_v0);
    if p.im.abs() > tol.residual_eps {
        return Err(Error::Constraint(format!("self-covariances have imaginary part {}", p.im)));
    }
    if p.re < -tol.residual_eps {
        return Err(Error::Constraint(format!("p = {} is negative: the amalgamating units are not contractive", p.re)));
    }
    Ok(p.re.max(0.0))
}

pub fn predicted_amalgam_index(ind_e: usize, ind_f: usize, p: f64, tol: f64) -> usize {
    if p <= tol {
        ind_e + ind_f
    } else {
        ind_e + ind_f + 1
    }
}

/// `e^{qt} e(x 1_{[0,t]})`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpUnit {
    pub q: C64,
    pub x: CVector,
}

impl ExpUnit {
    pub fn new(q: C64, x: CVector) -> Self {
        ExpUnit { q, x }
    }
}

/// `γ((α,x),(β,y)) = ᾱ + β + <x, y>`.
pub fn exp_cov(a: &ExpUnit, b: &ExpUnit) -> Result<C64> {
    if a.x.len() != b.x.len() {
        return Err(Error::DimensionMismatch(format!("reference vectors of lengths {} and {}", a.x.len(), b.x.len())));
    }
    Ok(a.q.conj() + b.q + a.x.dotc(&b.x))
}

/// `dim span {x - x0 : x ∈ set}` with `x0` the first element, via the rank
/// of the Gram matrix of differences.
pub fn fock_generated_index(set: &[CVector], tol: &Tolerance) -> Result<usize> {
    let Some(x0) = set.first() else {
        return Err(Error::Constraint("the generating set is empty".into()));
    };
    if set.iter().any(|x| x.len() != x0.len()) {
        return Err(Error::DimensionMismatch("vectors of different lengths".into()));
    }
    let diffs: Vec<CVector> = set[1..].iter().map(|x| x - x0).collect();
    if diffs.is_empty() {
        return Ok(0);
    }
    let gram = CMatrix::from_fn(diffs.len(), diffs.len(), |i, j| diffs[i].dotc(&diffs[j]));
    // rank_eps is a singular value threshold; the Gram squares singular values
    let sq = Tolerance { rank_eps: tol.rank_eps * tol.rank_eps, ..*tol };
    Ok(crate::linalg::numerical_rank(&gram, &sq))
}

/// `[q, z, U]` acting on exponential units.
#[derive(Debug, Clone, PartialEq)]
pub struct Automorphism {
    pub q: f64,
    pub z: CVector,
    pub u: CMatrix,
}

impl Automorphism {
    pub fn new(q: f64, z: CVector, u: CMatrix, tol: &Tolerance) -> Result<Self> {
        if u.nrows() != u.ncols() || u.nrows() != z.len() {
            return Err(Error::DimensionMismatch(format!("U is {}x{}, z has length {}", u.nrows(), u.ncols(), z.len())));
        }
        let residual = isometry_residual(&u);
        if residual > tol.residual_eps {
            return Err(Error::NotIsometric { residual });
        }
        Ok(Automorphism { q, z, u })
    }

    pub fn identity(dim: usize) -> Self {
        Automorphism { q: 0.0, z: CVector::zeros(dim), u: CMatrix::identity(dim, dim) }
    }

    /// `[-q, -U* z, U*]`.
    pub fn adjoint(&self) -> Self {
        let ud = self.u.adjoint();
        Automorphism { q: -self.q, z: -(&ud * &self.z), u: ud }
    }
}

/// `(q - i·φ.q - ‖z‖²/2 - <z, U x>, z + U x)`.
pub fn apply_automorphism(phi: &Automorphism, u: &ExpUnit) -> Result<ExpUnit> {
    if u.x.len() != phi.z.len() {
        return Err(Error::DimensionMismatch(format!("unit lives in dimension {}, automorphism in {}", u.x.len(), phi.z.len())));
    }
    let ux = &phi.u * &u.x;
    let q = u.q - C64::new(0.0, phi.q) - C64::new(phi.z.norm_squared() / 2.0, 0.0) - phi.z.dotc(&ux);
    Ok(ExpUnit { q, x: &phi.z + ux })
}
