use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use super::{sum, GridUnit, InclusionSystem, MorphismFamily};
use crate::amalgam::{amalgamate, embed_tensor, AmalgamatedSpace};
use crate::dyadic::DyadicTime;
use crate::error::{Error, Result};
use crate::linalg::{max_abs_diff, op_norm, pinv, CMatrix, CVector, Tolerance, CHECK_SLACK};

/// Fiberwise amalgamation `G_t = E_t ⊕_{D_t} F_t` with
/// `δ_{s,t} = i_{s,t} (β_{s,t} ⊕_D γ_{s,t})`.
pub struct AmalgamatedSystem {
    e: Arc<dyn InclusionSystem>,
    f: Arc<dyn InclusionSystem>,
    d: MorphismFamily,
    tol: Tolerance,
    spaces: Mutex<HashMap<DyadicTime, Arc<AmalgamatedSpace>>>,
}

/// `d: F → E` must be a contractive weak morphism; contractivity is checked
/// at the sampled times.
pub fn amalgamate_systems(
    e: Arc<dyn InclusionSystem>,
    f: Arc<dyn InclusionSystem>,
    d: MorphismFamily,
    times: &[DyadicTime],
    tol: Tolerance,
) -> Result<AmalgamatedSystem> {
    let sys = AmalgamatedSystem { e, f, d, tol, spaces: Mutex::new(HashMap::new()) };
    for &t in times {
        let dt = sys.d.at(t)?;
        let norm = op_norm(&dt);
        if norm > 1.0 + tol.residual_eps {
            return Err(Error::NotContractive { norm });
        }
        sys.space(t)?;
    }
    Ok(sys)
}

impl AmalgamatedSystem {
    pub fn left(&self) -> &Arc<dyn InclusionSystem> {
        &self.e
    }

    pub fn right(&self) -> &Arc<dyn InclusionSystem> {
        &self.f
    }

    pub fn morphism(&self) -> &MorphismFamily {
        &self.d
    }

    pub fn space(&self, t: DyadicTime) -> Result<Arc<AmalgamatedSpace>> {
        if let Some(s) = self.spaces.lock().expect("space cache poisoned").get(&t) {
            return Ok(s.clone());
        }
        let d = self.d.at(t)?;
        let space = Arc::new(amalgamate(self.e.dim(t)?, self.f.dim(t)?, &d, &self.tol)?);
        let mut cache = self.spaces.lock().expect("space cache poisoned");
        Ok(cache.entry(t).or_insert(space).clone())
    }
}

impl InclusionSystem for AmalgamatedSystem {
    fn dim(&self, t: DyadicTime) -> Result<usize> {
        Ok(self.space(t)?.dim_g)
    }

    fn beta(&self, s: DyadicTime, t: DyadicTime) -> Result<CMatrix> {
        let st = sum(s, t)?;
        let (gs, gt, gst) = (self.space(s)?, self.space(t)?, self.space(st)?);
        let emb = embed_tensor((&gs, &gt), &self.tol)?;
        let beta = self.e.beta(s, t)?;
        let gamma = self.f.beta(s, t)?;
        let mut sum_map = CMatrix::zeros(beta.nrows() + gamma.nrows(), beta.ncols() + gamma.ncols());
        sum_map.view_mut((0, 0), beta.shape()).copy_from(&beta);
        sum_map.view_mut((beta.nrows(), beta.ncols()), gamma.shape()).copy_from(&gamma);
        // (u, v) ↦ [βu; γv] on representatives, read in the tensor amalgamation
        let direct_sum = emb.source.class_map() * sum_map * gst.representative_map();
        Ok(emb.map * direct_sum)
    }

    fn label(&self) -> String {
        format!("{} ⊕_D {}", self.e.label(), self.f.label())
    }
}

/// `u ↦ [u; 0]`.
pub fn embed_unit_left(g: &AmalgamatedSystem, u: &GridUnit) -> Result<GridUnit> {
    map_seeds(g, u, |space, seed| Ok(&space.embed_left * seed))
}

/// `v ↦ [0; v]`.
pub fn embed_unit_right(g: &AmalgamatedSystem, v: &GridUnit) -> Result<GridUnit> {
    map_seeds(g, v, |space, seed| Ok(&space.embed_right * seed))
}

fn map_seeds(
    g: &AmalgamatedSystem,
    u: &GridUnit,
    f: impl Fn(&AmalgamatedSpace, &CVector) -> Result<CVector>,
) -> Result<GridUnit> {
    let seeds = u
        .seeds
        .iter()
        .enumerate()
        .map(|(k, seed)| f(&*g.space(u.time(k as u32))?, seed))
        .collect::<Result<Vec<_>>>()?;
    GridUnit::new(u.horizon, seeds, u.growth_bound)
}

/// For a unit `w` of `G` with classes `[u_t; v_t]`, the families
/// `u + D v = L* w` of `E` and `D* u + v = R* w` of `F`.
pub fn decompose_unit(g: &AmalgamatedSystem, w: &GridUnit) -> Result<(GridUnit, GridUnit)> {
    let mut left = Vec::with_capacity(w.seeds.len());
    let mut right = Vec::with_capacity(w.seeds.len());
    for (k, seed) in w.seeds.iter().enumerate() {
        let space = g.space(w.time(k as u32))?;
        if seed.len() != space.dim_g {
            return Err(Error::DimensionMismatch(format!("seed {k} has length {}, fiber has dimension {}", seed.len(), space.dim_g)));
        }
        left.push(space.embed_left.adjoint() * seed);
        right.push(space.embed_right.adjoint() * seed);
    }
    for (side, seeds) in [("left", &left), ("right", &right)] {
        if seeds[0].camax() <= g.tol.residual_eps {
            return Err(Error::ZeroFamily(format!("{side} component vanishes at the horizon")));
        }
    }
    // ‖L* w‖ ≤ ‖w‖ so the bound of w carries over
    Ok((GridUnit::new(w.horizon, left, w.growth_bound)?, GridUnit::new(w.horizon, right, w.growth_bound)?))
}

/// The family `w` of `G` with `L* w = e` and `R* w = f`. Fails when no such
/// class exists at some level.
pub fn unit_from_components(g: &AmalgamatedSystem, e: &GridUnit, f: &GridUnit) -> Result<GridUnit> {
    if e.horizon != f.horizon || e.seeds.len() != f.seeds.len() {
        return Err(Error::DimensionMismatch("component units must share horizon and depth".into()));
    }
    let mut seeds = Vec::with_capacity(e.seeds.len());
    for (k, (a, b)) in e.seeds.iter().zip(&f.seeds).enumerate() {
        let space = g.space(e.time(k as u32))?;
        let adj = space.class_map().adjoint();
        let rhs = CVector::from_iterator(a.len() + b.len(), a.iter().chain(b.iter()).copied());
        if rhs.len() != adj.nrows() {
            return Err(Error::DimensionMismatch(format!("components at level {k} do not match the fibers")));
        }
        let w = pinv(&adj, &g.tol) * &rhs;
        let gap = max_abs_diff(&CMatrix::from_column_slice(rhs.len(), 1, (&adj * &w).as_slice()), &CMatrix::from_column_slice(rhs.len(), 1, rhs.as_slice()));
        if gap > g.tol.residual_eps * CHECK_SLACK * rhs.camax().max(1.0) {
            return Err(Error::Constraint(format!("components at level {k} are not of the form (u + Dv, D*u + v); gap {gap:.3e}")));
        }
        seeds.push(w);
    }
    // smallest bound valid on the grid that is no better than the components'
    let mut growth = e.growth_bound.max(f.growth_bound);
    for (k, s) in seeds.iter().enumerate() {
        let norm = s.norm();
        if norm > 0.0 {
            growth = growth.max(norm.ln() / e.time(k as u32).value());
        }
    }
    let out = GridUnit::new(e.horizon, seeds, growth)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::grid;
    use crate::inclusion::{
        check_axioms, check_strong_morphism, check_unit, check_weak_morphism, example2_system, example2_unit, rank_one_morphism,
        scalar_unit, TrivialSystem, UnitSection,
    };
    use crate::linalg::{c, re};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn times() -> Vec<DyadicTime> {
        grid(2, DyadicTime::ONE)
    }

    fn scalar_powers_system(lambda: f64, mu: f64) -> AmalgamatedSystem {
        let u0: Arc<dyn UnitSection> = Arc::new(scalar_unit(re(-lambda)));
        let v0: Arc<dyn UnitSection> = Arc::new(scalar_unit(re(-mu)));
        let d = rank_one_morphism(u0, v0, &times(), &tol()).unwrap();
        amalgamate_systems(Arc::new(TrivialSystem), Arc::new(TrivialSystem), d, &times(), tol()).unwrap()
    }

    #[test]
    fn orthogonal_trivial_amalgam() {
        let triv: Arc<dyn InclusionSystem> = Arc::new(TrivialSystem);
        let d = MorphismFamily::zero(triv.clone(), triv.clone());
        let g = amalgamate_systems(triv.clone(), triv, d, &times(), tol()).unwrap();
        assert_eq!(g.dim(DyadicTime::ONE).unwrap(), 2);
        let rep = check_axioms(&g, &times(), &tol());
        assert!(rep.passed, "{rep:?}");
        // block-diagonal δ: [1;0] ↦ [1;0]⊗[1;0]
        let b = g.beta(DyadicTime::ONE, DyadicTime::ONE).unwrap();
        let left = g.space(DyadicTime::ONE).unwrap().embed_left.clone();
        let img = &b * &left;
        let expect = crate::linalg::kron(&left, &left).unwrap();
        assert!(max_abs_diff(&img, &expect) < 1e-14);
    }

    #[test]
    fn identity_corner_identifies_copies() {
        let g = scalar_powers_system(0.0, 0.0);
        assert_eq!(g.dim(DyadicTime::ONE).unwrap(), 1);
        assert!(check_axioms(&g, &times(), &tol()).passed);
    }

    #[test]
    fn scalar_powers_axioms_and_embeddings() {
        let g = scalar_powers_system(0.3, 0.2);
        assert_eq!(g.dim(DyadicTime::ONE).unwrap(), 2);
        let rep = check_axioms(&g, &times(), &tol());
        assert!(rep.passed, "{rep:?}");
        for t in times() {
            let space = g.space(t).unwrap();
            let ip = (space.embed_left.adjoint() * &space.embed_right)[(0, 0)];
            assert!((ip - re((-0.5 * t.value()).exp())).norm() < 1e-14);
        }
        let g = Arc::new(g);
        let triv: Arc<dyn InclusionSystem> = Arc::new(TrivialSystem);
        for embed_left in [true, false] {
            let gc = g.clone();
            let m = MorphismFamily::new(0.0, move |t| {
                let s = gc.space(t)?;
                Ok(if embed_left { s.embed_left.clone() } else { s.embed_right.clone() })
            });
            let rep = check_strong_morphism(&*triv, &*g, &m, &times(), &tol());
            assert!(rep.passed, "left = {embed_left}: {rep:?}");
            assert!(check_weak_morphism(&*triv, &*g, &m, &times(), &tol()).passed);
        }
    }

    #[test]
    fn embedded_units_and_decomposition() {
        let (lambda, mu) = (0.3, 0.2);
        let g = scalar_powers_system(lambda, mu);
        let u = GridUnit::from_section(&scalar_unit(re(-lambda)), DyadicTime::ONE, 10).unwrap();
        let v = GridUnit::from_section(&scalar_unit(re(-mu)), DyadicTime::ONE, 10).unwrap();
        let lu = embed_unit_left(&g, &u).unwrap();
        let rv = embed_unit_right(&g, &v).unwrap();
        assert!(check_unit(&g, &lu, &tol()).passed);
        assert!(check_unit(&g, &rv, &tol()).passed);

        let (a, b) = decompose_unit(&g, &lu).unwrap();
        assert!((&a.seeds[3] - &u.seeds[3]).camax() < 1e-14);
        let t = lu.time(3).value();
        assert!((b.seeds[3][0] - u.seeds[3][0] * (-(lambda + mu) * t).exp()).norm() < 1e-14);

        let e = GridUnit::from_section(&scalar_unit(c(0.1, 0.4)), DyadicTime::ONE, 10).unwrap();
        let f = GridUnit::from_section(&scalar_unit(re(-0.7)), DyadicTime::ONE, 10).unwrap();
        let w = unit_from_components(&g, &e, &f).unwrap();
        let rep = check_unit(&g, &w, &tol());
        assert!(rep.passed, "{rep:?}");
        let (a, b) = decompose_unit(&g, &w).unwrap();
        assert!(check_unit(&TrivialSystem, &a, &tol()).passed && check_unit(&TrivialSystem, &b, &tol()).passed);
    }

    #[test]
    fn orthogonal_embedded_units() {
        let triv: Arc<dyn InclusionSystem> = Arc::new(TrivialSystem);
        let g = amalgamate_systems(triv.clone(), triv.clone(), MorphismFamily::zero(triv.clone(), triv), &times(), tol()).unwrap();
        let u = GridUnit::from_section(&scalar_unit(re(0.2)), DyadicTime::ONE, 4).unwrap();
        let (lu, ru) = (embed_unit_left(&g, &u).unwrap(), embed_unit_right(&g, &u).unwrap());
        for (x, y) in lu.seeds.iter().zip(&ru.seeds) {
            assert_eq!(x.dotc(y).norm(), 0.0);
        }
        // d = 0 leaves both components unchanged; the right one vanishes here
        assert!(matches!(decompose_unit(&g, &lu), Err(Error::ZeroFamily(_))));
        let (x, y) = GridUnit::from_section(&scalar_unit(re(-0.1)), DyadicTime::ONE, 4).map(|v| (v.clone(), v)).unwrap();
        let w = unit_from_components(&g, &x, &y).unwrap();
        let (a, b) = decompose_unit(&g, &w).unwrap();
        assert!((&a.seeds[2] - &x.seeds[2]).camax() < 1e-14 && (&b.seeds[2] - &y.seeds[2]).camax() < 1e-14);
    }

    #[test]
    fn non_contractive_corner_rejected() {
        let big: Arc<dyn UnitSection> = Arc::new(scalar_unit(re(0.5)));
        let d = MorphismFamily::new(0.5, move |t| Ok(big.at(t)? * big.at(t)?.adjoint()));
        let triv: Arc<dyn InclusionSystem> = Arc::new(TrivialSystem);
        assert!(matches!(amalgamate_systems(triv.clone(), triv, d, &times(), tol()), Err(Error::NotContractive { .. })));
    }

    #[test]
    fn example2_with_rank_one_corner() {
        let e: Arc<dyn InclusionSystem> = Arc::new(example2_system());
        let u0: Arc<dyn UnitSection> = Arc::new(example2_unit(re(-0.3), re(0.5)));
        let v0: Arc<dyn UnitSection> = Arc::new(example2_unit(re(-0.4), c(0.0, 0.3)));
        let d = rank_one_morphism(u0, v0, &times(), &tol()).unwrap();
        assert!(check_weak_morphism(&*e, &*e, &d.adjoint(), &times(), &tol()).passed);
        // rank one corners are weak but not strong
        assert!(!check_strong_morphism(&*e, &*e, &d.adjoint(), &times(), &tol()).passed);
        let g = amalgamate_systems(e.clone(), e, d, &times(), tol()).unwrap();
        let rep = check_axioms(&g, &times(), &tol());
        assert!(rep.passed, "{rep:?}");
    }
}
