use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use super::{sum, InclusionSystem};
use crate::cp::{gns_beta_cached, gns_fiber, CpSemigroup, GnsFiber};
use crate::dyadic::DyadicTime;
use crate::error::Result;
use crate::linalg::{re, CMatrix, CVector, Tolerance};

/// Two-dimensional fibers with `β e0 = e0⊗e0` and
/// `β e1 = (√s e1⊗e0 + √t e0⊗e1) / √(s+t)`.
///
/// Its units are `u_t = e^{at} (1, b√t)` for complex `a, b`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Example2System;

pub fn example2_system() -> Example2System {
    Example2System
}

impl InclusionSystem for Example2System {
    fn dim(&self, _t: DyadicTime) -> Result<usize> {
        Ok(2)
    }

    fn beta(&self, s: DyadicTime, t: DyadicTime) -> Result<CMatrix> {
        sum(s, t)?;
        let (sv, tv) = (s.value(), t.value());
        let norm = (sv + tv).sqrt();
        let mut b = CMatrix::zeros(4, 2);
        b[(0, 0)] = re(1.0);
        // e1⊗e0 sits at index 2, e0⊗e1 at index 1
        b[(2, 1)] = re(sv.sqrt() / norm);
        b[(1, 1)] = re(tv.sqrt() / norm);
        Ok(b)
    }

    fn label(&self) -> String {
        "example2".into()
    }
}

/// `E_t = C` with `β = 1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct TrivialSystem;

impl InclusionSystem for TrivialSystem {
    fn dim(&self, _t: DyadicTime) -> Result<usize> {
        Ok(1)
    }

    fn beta(&self, s: DyadicTime, t: DyadicTime) -> Result<CMatrix> {
        sum(s, t)?;
        Ok(CMatrix::from_element(1, 1, re(1.0)))
    }

    fn label(&self) -> String {
        "trivial".into()
    }
}

/// The inclusion system of Stinespring fibers of a CP semigroup. Fibers are
/// memoized per time.
pub struct CpSystem {
    sg: CpSemigroup,
    tol: Tolerance,
    fibers: Mutex<HashMap<DyadicTime, Arc<GnsFiber>>>,
}

pub fn from_cp(sg: CpSemigroup, tol: Tolerance) -> CpSystem {
    CpSystem { sg, tol, fibers: Mutex::new(HashMap::new()) }
}

impl CpSystem {
    pub fn semigroup(&self) -> &CpSemigroup {
        &self.sg
    }

    pub fn fiber(&self, t: DyadicTime) -> Result<Arc<GnsFiber>> {
        if let Some(f) = self.fibers.lock().expect("fiber cache poisoned").get(&t) {
            return Ok(f.clone());
        }
        let f = Arc::new(gns_fiber(&self.sg, t, &self.tol)?);
        // a concurrent insert of the same fiber is harmless; keep the first
        let mut cache = self.fibers.lock().expect("fiber cache poisoned");
        Ok(cache.entry(t).or_insert(f).clone())
    }

    /// Class of `e_g ⊗ e_h` in `E_t`.
    pub fn class(&self, t: DyadicTime, g: usize, h: usize) -> Result<CVector> {
        Ok(self.fiber(t)?.class_of(g, h, self.sg.dim_h()))
    }
}

impl InclusionSystem for CpSystem {
    fn dim(&self, t: DyadicTime) -> Result<usize> {
        Ok(self.fiber(t)?.dim)
    }

    fn beta(&self, s: DyadicTime, t: DyadicTime) -> Result<CMatrix> {
        let st = sum(s, t)?;
        gns_beta_cached(self.sg.dim_h(), &*self.fiber(s)?, &*self.fiber(t)?, &*self.fiber(st)?, &self.tol)
    }

    fn label(&self) -> String {
        format!("cp(dim_h = {})", self.sg.dim_h())
    }
}

/// Wraps a system and multiplies every `β` by a constant. Used as a
/// negative control: any factor other than a phase breaks isometry.
pub struct ScaledBeta {
    inner: Arc<dyn InclusionSystem>,
    factor: f64,
}

impl ScaledBeta {
    pub fn new(inner: Arc<dyn InclusionSystem>, factor: f64) -> Self {
        ScaledBeta { inner, factor }
    }
}

impl InclusionSystem for ScaledBeta {
    fn dim(&self, t: DyadicTime) -> Result<usize> {
        self.inner.dim(t)
    }

    fn beta(&self, s: DyadicTime, t: DyadicTime) -> Result<CMatrix> {
        Ok(self.inner.beta(s, t)? * re(self.factor))
    }

    fn label(&self) -> String {
        format!("{} with beta scaled by {}", self.inner.label(), self.factor)
    }
}
