//! Inclusion systems over dyadic times.
//!
//! A system assigns a finite-dimensional fiber `E_t` (in orthonormal
//! coordinates) to every dyadic `t` and an isometry
//! `beta(s, t): E_{s+t} → E_s ⊗ E_t` to every pair, with coassociativity
//! `(β_{r,s} ⊗ 1) β_{r+s,t} = (1 ⊗ β_{s,t}) β_{r,s+t}`.

mod amalgamated;
mod correspondence;
mod morphism;
mod report;
mod systems;
mod unit;

pub use amalgamated::{amalgamate_systems, decompose_unit, embed_unit_left, embed_unit_right, unit_from_components, AmalgamatedSystem};
pub use correspondence::{example2_to_tt, powers_comparison, powers_correspondence, PowersComparison};
pub use morphism::{check_strong_morphism, check_weak_morphism, MorphismFamily};
pub use report::CheckReport;
pub use systems::{example2_system, from_cp, CpSystem, Example2System, ScaledBeta, TrivialSystem};
pub use unit::{
    check_unit, check_unit_section, example2_unit, pullback_unit, rank_one_morphism, scalar_unit, unit_square_root, ClosedFormUnit,
    GridUnit, UnitSection,
};

use crate::dyadic::DyadicTime;
use crate::error::{Error, Result};
use crate::linalg::{identity, isometry_residual, kron, kron_vec, max_abs_diff, CMatrix, CVector, Tolerance, CHECK_SLACK};

pub trait InclusionSystem: Send + Sync {
    fn dim(&self, t: DyadicTime) -> Result<usize>;

    /// `β_{s,t}` as a `dim(s)·dim(t) x dim(s+t)` matrix.
    fn beta(&self, s: DyadicTime, t: DyadicTime) -> Result<CMatrix>;

    fn label(&self) -> String {
        "inclusion system".into()
    }
}

pub(crate) fn sum(s: DyadicTime, t: DyadicTime) -> Result<DyadicTime> {
    s.checked_add(&t).ok_or_else(|| Error::InvalidTime(format!("{s} + {t} is not representable")))
}

/// `β*_{s,t}(x ⊗ y)`.
pub fn product(sys: &dyn InclusionSystem, s: DyadicTime, t: DyadicTime, x: &CVector, y: &CVector) -> Result<CVector> {
    let (ds, dt) = (sys.dim(s)?, sys.dim(t)?);
    if x.len() != ds || y.len() != dt {
        return Err(Error::DimensionMismatch(format!(
            "factors have lengths {} and {}, fibers have dimensions {ds} and {dt}",
            x.len(),
            y.len()
        )));
    }
    Ok(sys.beta(s, t)?.adjoint() * kron_vec(x, y))
}

/// Coassociativity residual for one triple.
pub fn coassociativity_residual(sys: &dyn InclusionSystem, r: DyadicTime, s: DyadicTime, t: DyadicTime) -> Result<f64> {
    let lhs = kron(&sys.beta(r, s)?, &identity(sys.dim(t)?))? * sys.beta(sum(r, s)?, t)?;
    let rhs = kron(&identity(sys.dim(r)?), &sys.beta(s, t)?)? * sys.beta(r, sum(s, t)?)?;
    Ok(max_abs_diff(&lhs, &rhs))
}

pub fn check_axioms(sys: &dyn InclusionSystem, times: &[DyadicTime], tol: &Tolerance) -> CheckReport {
    let mut report = CheckReport::new("inclusion::check_axioms", tol.residual_eps * CHECK_SLACK);
    let mut iso: f64 = 0.0;
    let mut coassoc: f64 = 0.0;
    for &s in times {
        for &t in times {
            match sys.beta(s, t) {
                Ok(b) => iso = iso.max(isometry_residual(&b)),
                Err(e) => {
                    iso = f64::INFINITY;
                    report.fail(format!("beta({s}, {t}): {e}"));
                }
            }
            report.samples += 1;
        }
    }
    for &r in times {
        for &s in times {
            for &t in times {
                match coassociativity_residual(sys, r, s, t) {
                    Ok(x) => coassoc = coassoc.max(x),
                    Err(e) => {
                        coassoc = f64::INFINITY;
                        report.fail(format!("coassociativity at ({r}, {s}, {t}): {e}"));
                    }
                }
                report.samples += 1;
            }
        }
    }
    report.record("isometry", iso);
    report.record("coassociativity", coassoc);
    report.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cp::{example_tt, CpSemigroup};
    use crate::dyadic::grid;
    use crate::linalg::{basis_vector, c, re};
    use proptest::prelude::*;
    use std::sync::Arc;

    fn dt(m: u64, k: u32) -> DyadicTime {
        DyadicTime::new(m, k).unwrap()
    }

    #[test]
    fn example2_axioms_exact() {
        let sys = example2_system();
        let rep = check_axioms(&sys, &grid(2, DyadicTime::ONE), &Tolerance::default());
        assert!(rep.passed, "{rep:?}");
        assert!(rep.max_residual() < 1e-12);
    }

    #[test]
    fn cp_system_axioms() {
        let sys = from_cp(example_tt(1.0), Tolerance::default());
        let rep = check_axioms(&sys, &[dt(1, 2), dt(1, 1), dt(3, 2)], &Tolerance::default());
        assert!(rep.passed, "{rep:?}");
        assert!(rep.max_residual() < 1e-8);
        let trivial = from_cp(CpSemigroup::identity(1), Tolerance::default());
        assert_eq!(trivial.dim(dt(1, 0)).unwrap(), 1);
        assert!((trivial.beta(dt(1, 0), dt(1, 1)).unwrap()[(0, 0)] - re(1.0)).norm() < 1e-14);
    }

    #[test]
    fn corrupted_beta_fails() {
        let bad = ScaledBeta::new(Arc::new(example2_system()), 1.01);
        let rep = check_axioms(&bad, &[dt(1, 1), dt(1, 0)], &Tolerance::default());
        assert!(!rep.passed);
        assert!(rep.residual("isometry").unwrap() > 1e-3);
    }

    #[test]
    fn product_examples() {
        let sys = example2_system();
        let e0 = basis_vector(2, 0);
        let e1 = basis_vector(2, 1);
        let (s, t) = (dt(1, 0), dt(3, 0));
        assert!((product(&sys, s, t, &e0, &e0).unwrap() - &e0).norm() < 1e-15);
        let m = product(&sys, s, t, &e1, &e0).unwrap();
        assert!((m - &e1 * re((1.0f64 / 4.0).sqrt())).norm() < 1e-15);
        let z = product(&sys, s, t, &e1, &CVector::zeros(2)).unwrap();
        assert_eq!(z.norm(), 0.0);
        assert!(matches!(product(&sys, s, t, &CVector::zeros(3), &e0), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn example2_beta_formula() {
        let sys = example2_system();
        let b = sys.beta(dt(1, 0), dt(1, 0)).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expect = CVector::from_vec(vec![re(0.0), re(h), re(h), re(0.0)]);
        assert!((b.column(1) - expect).norm() < 1e-15);
        // threefold expansion of e1
        let (r, s, t) = (dt(1, 2), dt(1, 1), dt(3, 0));
        let lhs = kron(&sys.beta(r, s).unwrap(), &identity(2)).unwrap() * sys.beta(sum(r, s).unwrap(), t).unwrap();
        let tot = r.value() + s.value() + t.value();
        let col = lhs.column(1);
        // indices of e1e0e0, e0e1e0, e0e0e1
        for (idx, w) in [(4, r.value()), (2, s.value()), (1, t.value())] {
            assert!((col[idx] - re((w / tot).sqrt())).norm() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn product_is_associative(
            xs in proptest::collection::vec(-1.0f64..1.0, 6),
            (kr, ks, kt) in (0u32..4, 0u32..4, 0u32..4),
        ) {
            let sys = example2_system();
            let v = |i: usize| CVector::from_vec(vec![c(xs[i], xs[i + 1]), c(xs[i + 1], -xs[i])]);
            let (x, y, z) = (v(0), v(2), v(4));
            let (r, s, t) = (dt(1, kr), dt(1, ks), dt(3, kt));
            let left = product(&sys, sum(r, s).unwrap(), t, &product(&sys, r, s, &x, &y).unwrap(), &z).unwrap();
            let right = product(&sys, r, sum(s, t).unwrap(), &x, &product(&sys, s, t, &y, &z).unwrap()).unwrap();
            prop_assert!((left - right).norm() < 1e-12);
        }
    }
}
