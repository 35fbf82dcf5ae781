use std::fmt;
use std::sync::Arc;

use super::{product, sum, CheckReport, InclusionSystem, MorphismFamily};
use crate::dyadic::DyadicTime;
use crate::error::{Error, Result};
use crate::linalg::{identity, kron, pinv, CMatrix, CVector, Tolerance, C64, CHECK_SLACK};

/// A unit given at arbitrary dyadic times.
pub trait UnitSection: Send + Sync {
    fn at(&self, t: DyadicTime) -> Result<CVector>;

    /// `k` with `‖u_t‖ ≤ e^{tk}`.
    fn growth_bound(&self) -> f64;
}

type SectionFn = dyn Fn(DyadicTime) -> CVector + Send + Sync;

#[derive(Clone)]
pub struct ClosedFormUnit {
    f: Arc<SectionFn>,
    growth_bound: f64,
}

impl fmt::Debug for ClosedFormUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClosedFormUnit").field("growth_bound", &self.growth_bound).finish_non_exhaustive()
    }
}

impl ClosedFormUnit {
    pub fn new(growth_bound: f64, f: impl Fn(DyadicTime) -> CVector + Send + Sync + 'static) -> Self {
        ClosedFormUnit { f: Arc::new(f), growth_bound }
    }
}

impl UnitSection for ClosedFormUnit {
    fn at(&self, t: DyadicTime) -> Result<CVector> {
        Ok((self.f)(t))
    }

    fn growth_bound(&self) -> f64 {
        self.growth_bound
    }
}

/// `u_t = e^{at} (1, b√t)` in the two-dimensional example system.
///
/// `‖u_t‖² = e^{2 Re(a) t} (1 + |b|² t) ≤ e^{(2 Re(a) + |b|²) t}`.
pub fn example2_unit(a: C64, b: C64) -> ClosedFormUnit {
    ClosedFormUnit::new(a.re + b.norm_sqr() / 2.0, move |t| {
        let tv = t.value();
        let e = (a * tv).exp();
        CVector::from_vec(vec![e, e * b * tv.sqrt()])
    })
}

/// `u_t = e^{at}` in a one-dimensional system.
pub fn scalar_unit(a: C64) -> ClosedFormUnit {
    ClosedFormUnit::new(a.re, move |t| CVector::from_element(1, (a * t.value()).exp()))
}

/// Finite-depth surrogate of a unit: `seeds[k]` lives in `E_{horizon/2^k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridUnit {
    pub horizon: DyadicTime,
    pub seeds: Vec<CVector>,
    pub growth_bound: f64,
}

impl GridUnit {
    pub fn new(horizon: DyadicTime, seeds: Vec<CVector>, growth_bound: f64) -> Result<Self> {
        if seeds.is_empty() {
            return Err(Error::ZeroFamily("a grid unit needs at least one seed".into()));
        }
        Ok(GridUnit { horizon, seeds, growth_bound })
    }

    pub fn from_section(u: &dyn UnitSection, horizon: DyadicTime, depth: u32) -> Result<Self> {
        let seeds = (0..=depth).map(|k| u.at(horizon.halved(k))).collect::<Result<Vec<_>>>()?;
        Self::new(horizon, seeds, u.growth_bound())
    }

    pub fn depth(&self) -> u32 {
        (self.seeds.len() - 1) as u32
    }

    pub fn time(&self, level: u32) -> DyadicTime {
        self.horizon.halved(level)
    }

    /// Level of `t` below the horizon.
    pub fn level_of(&self, t: DyadicTime) -> Result<u32> {
        self.horizon
            .levels_above(&t)
            .ok_or_else(|| Error::TimeUnavailable(t.to_string(), format!("not a dyadic refinement of horizon {}", self.horizon)))
    }

    pub fn seed_at(&self, t: DyadicTime) -> Result<&CVector> {
        let level = self.level_of(t)?;
        self.seeds.get(level as usize).ok_or(Error::InsufficientDepth { needed: level, available: self.depth() })
    }

    /// Extend the seeds to `depth` by repeated [`unit_square_root`].
    pub fn deepen(&self, sys: &dyn InclusionSystem, depth: u32, tol: &Tolerance) -> Result<GridUnit> {
        let mut out = self.clone();
        while out.depth() < depth {
            let level = out.depth();
            let next = unit_square_root(sys, out.time(level), &out.seeds[level as usize], tol)?;
            out.seeds.push(next);
        }
        Ok(out)
    }

    /// The same unit viewed from the lower horizon `t`.
    pub fn restrict(&self, t: DyadicTime) -> Result<GridUnit> {
        let level = self.level_of(t)? as usize;
        if level >= self.seeds.len() {
            return Err(Error::InsufficientDepth { needed: level as u32, available: self.depth() });
        }
        GridUnit::new(t, self.seeds[level..].to_vec(), self.growth_bound)
    }
}

impl UnitSection for GridUnit {
    fn at(&self, t: DyadicTime) -> Result<CVector> {
        self.seed_at(t).cloned()
    }

    fn growth_bound(&self) -> f64 {
        self.growth_bound
    }
}

fn relative_gap(a: &CVector, b: &CVector) -> f64 {
    (a - b).camax() / b.camax().max(1.0)
}

fn bound_excess(norm: f64, t: DyadicTime, growth: f64) -> f64 {
    (norm / (t.value() * growth).exp() - 1.0).max(0.0)
}

/// Consistency across levels, exponential bound and nontriviality.
pub fn check_unit(sys: &dyn InclusionSystem, u: &GridUnit, tol: &Tolerance) -> CheckReport {
    let mut report = CheckReport::new("inclusion::check_unit", tol.residual_eps * CHECK_SLACK);
    let mut consistency: f64 = 0.0;
    let mut growth: f64 = 0.0;
    for (k, seed) in u.seeds.iter().enumerate() {
        let t = u.time(k as u32);
        match sys.dim(t) {
            Ok(d) if d == seed.len() => {}
            Ok(d) => report.fail(format!("seed {k} has length {}, fiber at {t} has dimension {d}", seed.len())),
            Err(e) => report.fail(format!("fiber at {t}: {e}")),
        }
        growth = growth.max(bound_excess(seed.norm(), t, u.growth_bound));
    }
    if u.seeds[0].camax() <= tol.residual_eps {
        report.fail("seed at the horizon vanishes".into());
    }
    for k in 0..u.seeds.len().saturating_sub(1) {
        let half = u.time(k as u32 + 1);
        let next = &u.seeds[k + 1];
        match product(sys, half, half, next, next) {
            Ok(p) => consistency = consistency.max(relative_gap(&p, &u.seeds[k])),
            Err(e) => report.fail(format!("level {k}: {e}")),
        }
        report.samples += 1;
    }
    if growth > tol.residual_eps {
        report.fail(format!("seeds exceed the exponential bound e^(t·{}) by 1 + {growth:.3e}", u.growth_bound));
    }
    report.record("consistency", consistency);
    report.record("growth_excess", growth);
    report.finish()
}

/// `u_{s+t} = β*_{s,t}(u_s ⊗ u_t)` for every sampled pair.
pub fn check_unit_section(sys: &dyn InclusionSystem, u: &dyn UnitSection, times: &[DyadicTime], tol: &Tolerance) -> CheckReport {
    let mut report = CheckReport::new("inclusion::check_unit", tol.residual_eps * CHECK_SLACK);
    let mut consistency: f64 = 0.0;
    let mut growth: f64 = 0.0;
    for &s in times {
        match u.at(s) {
            Ok(v) => {
                if v.camax() <= tol.residual_eps {
                    report.fail(format!("unit vanishes at {s}"));
                }
                growth = growth.max(bound_excess(v.norm(), s, u.growth_bound()));
            }
            Err(e) => report.fail(format!("u at {s}: {e}")),
        }
        for &t in times {
            let res = (|| -> Result<f64> {
                let lhs = u.at(sum(s, t)?)?;
                Ok(relative_gap(&product(sys, s, t, &u.at(s)?, &u.at(t)?)?, &lhs))
            })();
            match res {
                Ok(r) => consistency = consistency.max(r),
                Err(e) => report.fail(format!("pair ({s}, {t}): {e}")),
            }
            report.samples += 1;
        }
    }
    if growth > tol.residual_eps {
        report.fail(format!("unit exceeds e^(t·{}) by 1 + {growth:.3e}", u.growth_bound()));
    }
    report.record("consistency", consistency);
    report.record("growth_excess", growth);
    report.finish()
}

/// `(A*_t v_t)` for a weak morphism `A: E → F` and a unit `v` of `F`.
pub fn pullback_unit(a: &MorphismFamily, v: &GridUnit) -> Result<GridUnit> {
    let mut seeds = Vec::with_capacity(v.seeds.len());
    for (k, seed) in v.seeds.iter().enumerate() {
        let at = a.at(v.time(k as u32))?;
        if at.nrows() != seed.len() {
            return Err(Error::DimensionMismatch(format!(
                "A at level {k} has {} rows, seed has length {}",
                at.nrows(),
                seed.len()
            )));
        }
        seeds.push(at.adjoint() * seed);
    }
    let scale = v.seeds[0].camax().max(1.0);
    if seeds[0].camax() <= 1e-14 * scale {
        return Err(Error::ZeroFamily("A*v vanishes at the horizon".into()));
    }
    GridUnit::new(v.horizon, seeds, a.growth_bound + v.growth_bound)
}

/// `D_t = |u0_t><v0_t|: F_t → E_t`, gated on `‖u0_t‖ ‖v0_t‖ ≤ 1` at the sampled times.
pub fn rank_one_morphism(
    u0: Arc<dyn UnitSection>,
    v0: Arc<dyn UnitSection>,
    times: &[DyadicTime],
    tol: &Tolerance,
) -> Result<MorphismFamily> {
    for &t in times {
        let p = u0.at(t)?.norm() * v0.at(t)?.norm();
        if p > 1.0 + tol.residual_eps {
            return Err(Error::Constraint(format!("‖u0‖·‖v0‖ = {p} exceeds 1 at t = {t}")));
        }
    }
    let growth = u0.growth_bound() + v0.growth_bound();
    Ok(MorphismFamily::new(growth, move |t| {
        let u = u0.at(t)?;
        let v = v0.at(t)?;
        Ok(u * v.adjoint())
    }))
}

/// Square root of `x ∈ E_t` under the unit product: `y ∈ E_{t/2}` with
/// `β*(y ⊗ y) = x`.
///
/// The start point reads `y ⊗ y ≈ β x` as a symmetric matrix `M = y yᵀ` and
/// takes `M[:, j] / √M[j, j]` for the dominant diagonal entry, with the
/// principal square root. Newton's method then refines it.
pub fn unit_square_root(sys: &dyn InclusionSystem, t: DyadicTime, x: &CVector, tol: &Tolerance) -> Result<CVector> {
    let dim_t = sys.dim(t)?;
    if x.len() != dim_t {
        return Err(Error::DimensionMismatch(format!("vector has length {}, fiber has dimension {dim_t}", x.len())));
    }
    let scale = x.camax();
    if scale == 0.0 {
        return Err(Error::ZeroFamily("cannot take the square root of zero".into()));
    }
    let h = t.half();
    let n = sys.dim(h)?;
    let beta = sys.beta(h, h)?;
    let m = &beta * x;
    let j = (0..n).max_by(|&a, &b| m[a * n + a].norm().total_cmp(&m[b * n + b].norm())).expect("nonempty fiber");
    let pivot = m[j * n + j];
    if pivot.norm() <= tol.residual_eps * scale {
        return Err(Error::NoConvergence { iterations: 0, residual: scale });
    }
    if pivot.re < 0.0 && pivot.im.abs() <= tol.rank_eps * pivot.norm() {
        return Err(Error::BranchAmbiguity);
    }
    let r = pivot.sqrt();
    let mut y = CVector::from_fn(n, |i, _| m[i * n + j] / r);
    let beta_adj = beta.adjoint();
    let eye = identity(n);
    let target = tol.residual_eps * scale.max(1.0);
    let mut residual = f64::INFINITY;
    const MAX_ITER: usize = 60;
    for _ in 0..MAX_ITER {
        let yy = CMatrix::from_column_slice(n, 1, y.as_slice());
        let f = &beta_adj * crate::linalg::kron_vec(&y, &y) - x;
        residual = f.camax();
        if residual <= target {
            return Ok(y);
        }
        let jac = &beta_adj * (kron(&eye, &yy)? + kron(&yy, &eye)?);
        y -= pinv(&jac, tol) * f;
    }
    Err(Error::NoConvergence { iterations: MAX_ITER, residual })
}
