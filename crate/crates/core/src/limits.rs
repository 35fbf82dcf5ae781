//! Inner products in the generated product system by dyadic refinement.
//!
//! For units `u, v` the uniform partition of `(0, t]` into `2^k` blocks gives
//! `<u_s, v_s> = <u_{t/2^k}, v_{t/2^k}>^{2^k}`; the lifted inner product is
//! the limit `k → ∞`, and `<û_t, v̂_t> = e^{t γ(u, v)}` defines the covariance.

use std::f64::consts::PI;

use crate::dyadic::DyadicTime;
use crate::error::{Error, Result};
use crate::inclusion::{GridUnit, InclusionSystem};
use crate::linalg::{Tolerance, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitOptions {
    /// Relative Cauchy tolerance between consecutive levels.
    pub cauchy_tol: f64,
    /// Levels evaluated before convergence may be declared.
    pub min_levels: u32,
    pub max_depth: u32,
    /// Allowed spread of covariance estimates across probe times.
    pub agreement_tol: f64,
    /// Richardson step `2 v_k - v_{k-1}`, cancelling the error term linear
    /// in the mesh `t / 2^k`.
    pub extrapolate: bool,
}

impl Default for LimitOptions {
    fn default() -> Self {
        LimitOptions { cauchy_tol: 1e-7, min_levels: 4, max_depth: 20, agreement_tol: 1e-6, extrapolate: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceResult {
    /// Limit estimate: the last level, or its extrapolation.
    pub value: C64,
    pub converged: bool,
    pub levels_used: u32,
    /// Relative change `|v_k - v_{k-1}| / max(1, |v_k|)` between consecutive
    /// estimates (extrapolated ones when enabled).
    pub residual_history: Vec<f64>,
    /// `partition_inner` at each evaluated level.
    pub values: Vec<C64>,
}

fn seed_level(u: &GridUnit, t: DyadicTime, k: u32) -> Result<usize> {
    let base = u.level_of(t)?;
    let level = base + k;
    if level > u.depth() {
        return Err(Error::InsufficientDepth { needed: level, available: u.depth() });
    }
    Ok(level as usize)
}

/// `<u_{t/2^k}, v_{t/2^k}>^{2^k}`.
pub fn partition_inner(sys: &dyn InclusionSystem, u: &GridUnit, v: &GridUnit, t: DyadicTime, k: u32) -> Result<C64> {
    if k > 31 {
        return Err(Error::InvalidTime(format!("level {k} exceeds 31")));
    }
    let (iu, iv) = (seed_level(u, t, k)?, seed_level(v, t, k)?);
    let (x, y) = (&u.seeds[iu], &v.seeds[iv]);
    let dim = sys.dim(t.halved(k))?;
    if x.len() != dim || y.len() != dim {
        return Err(Error::DimensionMismatch(format!(
            "seeds of lengths {} and {} in a fiber of dimension {dim}",
            x.len(),
            y.len()
        )));
    }
    Ok(x.dotc(y).powu(1u32 << k))
}

fn ensure_level(sys: &dyn InclusionSystem, u: &mut GridUnit, t: DyadicTime, k: u32, tol: &Tolerance) -> Result<()> {
    let need = u.level_of(t)? + k;
    if u.depth() < need {
        *u = u.deepen(sys, need, tol)?;
    }
    Ok(())
}

/// Iterates [`partition_inner`] over levels until the relative Cauchy
/// criterion holds. Units are deepened by square roots when their stored
/// seeds run out.
pub fn lifted_inner(
    sys: &dyn InclusionSystem,
    u: &GridUnit,
    v: &GridUnit,
    t: DyadicTime,
    opts: &LimitOptions,
    tol: &Tolerance,
) -> Result<CovarianceResult> {
    let (mut u, mut v) = (u.clone(), v.clone());
    let mut values: Vec<C64> = Vec::new();
    let mut history = Vec::new();
    let mut estimate: Option<C64> = None;
    for k in 0..=opts.max_depth {
        ensure_level(sys, &mut u, t, k, tol)?;
        ensure_level(sys, &mut v, t, k, tol)?;
        let val = partition_inner(sys, &u, &v, t, k)?;
        let next = match (opts.extrapolate, values.last()) {
            (false, _) => Some(val),
            (true, Some(prev)) => Some(val * 2.0 - prev),
            (true, None) => None,
        };
        values.push(val);
        if let (Some(prev), Some(cur)) = (estimate, next) {
            history.push((cur - prev).norm() / cur.norm().max(1.0));
        }
        estimate = next.or(estimate);
        let enough = k + 1 >= opts.min_levels;
        if enough && history.last().is_some_and(|r| *r <= opts.cauchy_tol) {
            let value = estimate.expect("estimate after a residual");
            return Ok(CovarianceResult { value, converged: true, levels_used: k + 1, residual_history: history, values });
        }
    }
    let value = estimate.unwrap_or(values[0]);
    Ok(CovarianceResult { value, converged: false, levels_used: opts.max_depth + 1, residual_history: history, values })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeEstimate {
    pub t: DyadicTime,
    pub gamma: C64,
    pub lifted: CovarianceResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Covariance {
    /// Mean of the per-probe estimates.
    pub gamma: C64,
    /// Largest pairwise gap between probe estimates.
    pub spread: f64,
    pub probes: Vec<ProbeEstimate>,
}

/// Logarithm of the last value, with the branch carried by continuity
/// from the principal logarithm at level 0.
fn tracked_log(values: &[C64], tol: f64) -> Result<C64> {
    let mut current: Option<C64> = None;
    for &v in values {
        if v.norm() <= f64::MIN_POSITIVE {
            return Err(Error::ZeroInnerProduct);
        }
        if v.re < 0.0 && v.im.abs() <= tol * v.norm() {
            return Err(Error::BranchAmbiguity);
        }
        let principal = v.ln();
        current = Some(match current {
            None => principal,
            Some(prev) => {
                let turns = ((prev.im - principal.im) / (2.0 * PI)).round();
                C64::new(principal.re, principal.im + 2.0 * PI * turns)
            }
        });
    }
    current.ok_or(Error::ZeroInnerProduct)
}

/// `γ(u, v) = log <û_t, v̂_t> / t`, required to agree across probe times.
pub fn covariance(
    sys: &dyn InclusionSystem,
    u: &GridUnit,
    v: &GridUnit,
    probes: &[DyadicTime],
    opts: &LimitOptions,
    tol: &Tolerance,
) -> Result<Covariance> {
    if probes.is_empty() {
        return Err(Error::InvalidTime("no probe times given".into()));
    }
    let mut out = Vec::with_capacity(probes.len());
    for &t in probes {
        let lifted = lifted_inner(sys, u, v, t, opts, tol)?;
        if !lifted.converged {
            return Err(Error::NoConvergence {
                iterations: lifted.levels_used as usize,
                residual: lifted.residual_history.last().copied().unwrap_or(f64::INFINITY),
            });
        }
        let mut path = lifted.values.clone();
        path.push(lifted.value);
        let gamma = tracked_log(&path, opts.cauchy_tol)? / t.value();
        out.push(ProbeEstimate { t, gamma, lifted });
    }
    let mut spread: f64 = 0.0;
    for a in &out {
        for b in &out {
            spread = spread.max((a.gamma - b.gamma).norm());
        }
    }
    let gamma = out.iter().map(|p| p.gamma).sum::<C64>() / out.len() as f64;
    if spread > opts.agreement_tol * gamma.norm().max(1.0) {
        return Err(Error::ProbeDisagreement(spread));
    }
    Ok(Covariance { gamma, spread, probes: out })
}
