use std::fmt;
use std::sync::Arc;

use super::{sum, CheckReport, InclusionSystem};
use crate::dyadic::DyadicTime;
use crate::error::{Error, Result};
use crate::linalg::{identity, kron, max_abs_diff, op_norm, re, CMatrix, Tolerance, CHECK_SLACK};

type MapFn = dyn Fn(DyadicTime) -> Result<CMatrix> + Send + Sync;

/// An exponentially bounded family `A_t: E_t → F_t` with `‖A_t‖ ≤ e^{t k}`.
#[derive(Clone)]
pub struct MorphismFamily {
    map: Arc<MapFn>,
    pub growth_bound: f64,
}

impl fmt::Debug for MorphismFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MorphismFamily").field("growth_bound", &self.growth_bound).finish_non_exhaustive()
    }
}

impl MorphismFamily {
    pub fn new(growth_bound: f64, map: impl Fn(DyadicTime) -> Result<CMatrix> + Send + Sync + 'static) -> Self {
        MorphismFamily { map: Arc::new(map), growth_bound }
    }

    pub fn identity(sys: Arc<dyn InclusionSystem>) -> Self {
        Self::new(0.0, move |t| Ok(identity(sys.dim(t)?)))
    }

    pub fn zero(source: Arc<dyn InclusionSystem>, target: Arc<dyn InclusionSystem>) -> Self {
        Self::new(f64::NEG_INFINITY, move |t| Ok(CMatrix::zeros(target.dim(t)?, source.dim(t)?)))
    }

    /// `c · A_t`; the growth bound shifts by `ln|c|`.
    pub fn scaled(&self, c: f64) -> Self {
        let inner = self.map.clone();
        Self::new(self.growth_bound + c.abs().ln(), move |t| Ok(inner(t)? * re(c)))
    }

    pub fn adjoint(&self) -> Self {
        let inner = self.map.clone();
        Self::new(self.growth_bound, move |t| Ok(inner(t)?.adjoint()))
    }

    pub fn at(&self, t: DyadicTime) -> Result<CMatrix> {
        (self.map)(t)
    }
}

fn shape_ok(e: &dyn InclusionSystem, f: &dyn InclusionSystem, a: &CMatrix, t: DyadicTime) -> Result<()> {
    let want = (f.dim(t)?, e.dim(t)?);
    if a.shape() != want {
        return Err(Error::DimensionMismatch(format!(
            "A_{t} is {}x{}, expected {}x{}",
            a.nrows(),
            a.ncols(),
            want.0,
            want.1
        )));
    }
    Ok(())
}

fn growth_excess(a: &MorphismFamily, t: DyadicTime, at: &CMatrix) -> f64 {
    let bound = (t.value() * a.growth_bound).exp();
    if at.iter().all(|z| *z == re(0.0)) {
        return 0.0;
    }
    (op_norm(at) / bound - 1.0).max(0.0)
}

enum Kind {
    Weak,
    Strong,
}

fn check_morphism(
    kind: Kind,
    e: &dyn InclusionSystem,
    f: &dyn InclusionSystem,
    a: &MorphismFamily,
    times: &[DyadicTime],
    tol: &Tolerance,
) -> CheckReport {
    let name = match kind {
        Kind::Weak => "inclusion::check_weak_morphism",
        Kind::Strong => "inclusion::check_strong_morphism",
    };
    let mut report = CheckReport::new(name, tol.residual_eps * CHECK_SLACK);
    let mut identity_res: f64 = 0.0;
    let mut growth: f64 = 0.0;
    for &t in times {
        match a.at(t).and_then(|at| shape_ok(e, f, &at, t).map(|_| at)) {
            Ok(at) => growth = growth.max(growth_excess(a, t, &at)),
            Err(err) => report.fail(format!("A_{t}: {err}")),
        }
    }
    for &s in times {
        for &t in times {
            let res = (|| -> Result<f64> {
                let st = sum(s, t)?;
                let tensor = kron(&a.at(s)?, &a.at(t)?)?;
                let beta = e.beta(s, t)?;
                let gamma = f.beta(s, t)?;
                let ast = a.at(st)?;
                shape_ok(e, f, &ast, st)?;
                Ok(match kind {
                    Kind::Weak => max_abs_diff(&ast, &(gamma.adjoint() * tensor * beta)),
                    Kind::Strong => max_abs_diff(&(gamma * ast), &(tensor * beta)),
                })
            })();
            match res {
                Ok(r) => identity_res = identity_res.max(r),
                Err(err) => report.fail(format!("pair ({s}, {t}): {err}")),
            }
            report.samples += 1;
        }
    }
    if growth > tol.residual_eps {
        report.fail(format!("norm exceeds e^(t·{}) by a factor 1 + {growth:.3e}", a.growth_bound));
    }
    report.record("identity", identity_res);
    report.record("growth_excess", growth);
    report.finish()
}

/// `A_{s+t} = γ*_{s,t} (A_s ⊗ A_t) β_{s,t}` over all sampled pairs.
pub fn check_weak_morphism(
    e: &dyn InclusionSystem,
    f: &dyn InclusionSystem,
    a: &MorphismFamily,
    times: &[DyadicTime],
    tol: &Tolerance,
) -> CheckReport {
    check_morphism(Kind::Weak, e, f, a, times, tol)
}

/// `γ_{s,t} A_{s+t} = (A_s ⊗ A_t) β_{s,t}` over all sampled pairs.
pub fn check_strong_morphism(
    e: &dyn InclusionSystem,
    f: &dyn InclusionSystem,
    a: &MorphismFamily,
    times: &[DyadicTime],
    tol: &Tolerance,
) -> CheckReport {
    check_morphism(Kind::Strong, e, f, a, times, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cp::example_tt;
    use crate::inclusion::{example2_system, from_cp};

    fn times() -> Vec<DyadicTime> {
        vec![DyadicTime::new(1, 2).unwrap(), DyadicTime::new(1, 1).unwrap(), DyadicTime::ONE]
    }

    #[test]
    fn identity_passes_both() {
        let tol = Tolerance::default();
        let sys: Arc<dyn InclusionSystem> = Arc::new(example2_system());
        let id = MorphismFamily::identity(sys.clone());
        assert!(check_weak_morphism(&*sys, &*sys, &id, &times(), &tol).passed);
        assert!(check_strong_morphism(&*sys, &*sys, &id, &times(), &tol).passed);
        let tt: Arc<dyn InclusionSystem> = Arc::new(from_cp(example_tt(1.0), tol));
        let id = MorphismFamily::identity(tt.clone());
        assert!(check_strong_morphism(&*tt, &*tt, &id, &times(), &tol).passed);
    }

    #[test]
    fn doubled_identity_fails() {
        let tol = Tolerance::default();
        let sys: Arc<dyn InclusionSystem> = Arc::new(example2_system());
        let two = MorphismFamily::new(0.0, |_| Ok(identity(2) * re(2.0)));
        let rep = check_weak_morphism(&*sys, &*sys, &two, &times(), &tol);
        assert!(!rep.passed);
        assert!(rep.residual("identity").unwrap() > 1.0);
        assert!(rep.residual("growth_excess").unwrap() > 0.5);
    }

    #[test]
    fn shape_mismatch_reported() {
        let tol = Tolerance::default();
        let sys: Arc<dyn InclusionSystem> = Arc::new(example2_system());
        let wrong = MorphismFamily::new(0.0, |_| Ok(identity(3)));
        let rep = check_weak_morphism(&*sys, &*sys, &wrong, &times(), &tol);
        assert!(!rep.passed && !rep.failures.is_empty());
    }
}
