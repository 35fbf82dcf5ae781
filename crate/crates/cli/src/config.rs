//! Experiment configuration files and their resolution into library objects.
//!
//! Complex numbers are `[re, im]` pairs, matrices are arrays of rows, and
//! dyadic times are `[m, k]` meaning `m / 2^k`.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use prodsys::cp::{example_tt, hamiltonian_generator, lindblad_generator, powers_corner, scalar_powers, BlockCpSemigroup, CpSemigroup};
use prodsys::dyadic::grid;
use prodsys::inclusion::{
    amalgamate_systems, embed_unit_left, embed_unit_right, example2_unit, from_cp, rank_one_morphism, scalar_unit, unit_from_components,
    AmalgamatedSystem, CpSystem, GridUnit, InclusionSystem, ScaledBeta, TrivialSystem, UnitSection,
};
use prodsys::limits::LimitOptions;
use prodsys::{CMatrix, CVector, DyadicTime, Tolerance, C64};

pub type Complex = [f64; 2];
pub type Matrix = Vec<Vec<Complex>>;
pub type Time = [u64; 2];

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub systems: BTreeMap<String, SystemSpec>,
    #[serde(default)]
    pub units: BTreeMap<String, UnitSpec>,
    /// Times at which covariances are probed; defaults to `1/2, 1`.
    #[serde(default)]
    pub probe_times: Option<Vec<Time>>,
    /// Times sampled by axiom and morphism checks; defaults to multiples of `1/4` up to 1.
    #[serde(default)]
    pub check_times: Option<Vec<Time>>,
    #[serde(default)]
    pub tolerance: Option<ToleranceSpec>,
    #[serde(default)]
    pub limits: Option<LimitSpec>,
    #[serde(default)]
    pub max_depth: Option<u32>,
    #[serde(default)]
    pub checks: Option<Vec<CheckSpec>>,
    #[serde(default)]
    pub index: Option<IndexSpec>,
    #[serde(default)]
    pub powers: Option<PowersSpec>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    pub rank_eps: Option<f64>,
    pub residual_eps: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct LimitSpec {
    pub cauchy_tol: Option<f64>,
    pub min_levels: Option<u32>,
    pub agreement_tol: Option<f64>,
    pub extrapolate: Option<bool>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    Example2,
    Trivial,
    /// A CP semigroup given by one of: a superoperator generator on
    /// column-stacked matrices, a Hamiltonian with jump operators, or the
    /// named example `tt` with rate `alpha`.
    Cp {
        generator: Option<Matrix>,
        hamiltonian: Option<Matrix>,
        #[serde(default)]
        jumps: Vec<Matrix>,
        example: Option<String>,
        alpha: Option<f64>,
    },
    /// The block semigroup with the Powers corner.
    Powers(PowersSpec),
    /// `E ⊗_D F` with `D_t = |u0_t><v0_t|`.
    Amalgam { left: String, right: String, u0: String, v0: String },
    /// `inner` with every `β` multiplied by `factor`.
    Scaled { inner: String, factor: f64 },
}

/// Either the scalar data `U_t = e^{-λt}`, `V_t = e^{-μt}` or general
/// Hamiltonians and contraction generators.
#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct PowersSpec {
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub h_phi: Option<Matrix>,
    pub a: Option<Matrix>,
    pub h_psi: Option<Matrix>,
    pub b: Option<Matrix>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum UnitSpec {
    /// `e^{at} (1, b√t)` in the two-dimensional example system.
    Example2 { system: String, a: Complex, b: Complex },
    /// `e^{at}` in a system with one-dimensional fibers.
    Scalar { system: String, a: Complex },
    /// Explicit seeds at `horizon / 2^k`, `k = 0, 1, ...`.
    Seeds { system: String, horizon: Time, seeds: Vec<Vec<Complex>>, growth_bound: f64 },
    EmbedLeft { system: String, unit: String },
    EmbedRight { system: String, unit: String },
    /// The unit of an amalgamation with the given left and right components.
    Components { system: String, left: String, right: String },
}

impl UnitSpec {
    pub fn system(&self) -> &str {
        match self {
            UnitSpec::Example2 { system, .. }
            | UnitSpec::Scalar { system, .. }
            | UnitSpec::Seeds { system, .. }
            | UnitSpec::EmbedLeft { system, .. }
            | UnitSpec::EmbedRight { system, .. }
            | UnitSpec::Components { system, .. } => system,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckSpec {
    Axioms { system: String },
    Unit { unit: String },
    CpValidate { system: String },
    FiberDims { system: String, expect: Option<usize> },
    WeakMorphism { source: String, target: String, morphism: MorphismSpec },
    StrongMorphism { source: String, target: String, morphism: MorphismSpec },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MorphismSpec {
    Identity,
    /// `|u0><v0|` from the system of `v0` into the system of `u0`.
    RankOne { u0: String, v0: String },
    /// The isomorphism from the two-dimensional example onto a `tt` semigroup.
    Example2ToTt,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexSpec {
    pub system: String,
    pub units: Vec<String>,
    /// Unit sets certifying the component indices of an amalgamation;
    /// default to `[u0]` and `[v0]`.
    pub left_units: Option<Vec<String>>,
    pub right_units: Option<Vec<String>>,
    pub expect_index: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: line {line}, column {column}, field `{field}`: {message}")]
    Parse { path: String, line: usize, column: usize, field: String, message: String },
    #[error("{0}")]
    Invalid(String),
}

pub fn load(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    parse(&text, &path.display().to_string())
}

pub fn parse(text: &str, origin: &str) -> Result<ExperimentConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        ConfigError::Parse { path: origin.into(), line: inner.line(), column: inner.column(), field, message: inner.to_string() }
    })
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

pub fn complex(z: Complex) -> C64 {
    C64::new(z[0], z[1])
}

pub fn matrix(m: &Matrix, what: &str) -> Result<CMatrix, ConfigError> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    if rows == 0 || cols == 0 {
        return Err(invalid(format!("{what}: matrix is empty")));
    }
    if let Some(i) = m.iter().position(|r| r.len() != cols) {
        return Err(invalid(format!("{what}: row {i} has {} entries, row 0 has {cols}", m[i].len())));
    }
    if m.iter().flatten().any(|z| !z[0].is_finite() || !z[1].is_finite()) {
        return Err(invalid(format!("{what}: entries must be finite")));
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| complex(m[i][j])))
}

pub fn time(t: Time, what: &str) -> Result<DyadicTime, ConfigError> {
    let k = u32::try_from(t[1]).map_err(|_| invalid(format!("{what}: exponent {} is too large", t[1])))?;
    DyadicTime::new(t[0], k).map_err(|e| invalid(format!("{what}: {e}")))
}

/// Resolved run settings after command-line overrides.
#[derive(Debug, Clone, Copy)]
pub struct Settings {
    pub tol: Tolerance,
    pub limits: LimitOptions,
}

impl Settings {
    pub fn new(cfg: &ExperimentConfig, depth: Option<u32>, residual_eps: Option<f64>) -> Result<Self, ConfigError> {
        let base = Tolerance::default();
        let spec = cfg.tolerance.clone().unwrap_or_default();
        let tol = Tolerance::new(spec.rank_eps.unwrap_or(base.rank_eps), residual_eps.or(spec.residual_eps).unwrap_or(base.residual_eps))
            .map_err(|e| invalid(e.to_string()))?;
        let mut limits = LimitOptions::default();
        if let Some(l) = &cfg.limits {
            limits.cauchy_tol = l.cauchy_tol.unwrap_or(limits.cauchy_tol);
            limits.min_levels = l.min_levels.unwrap_or(limits.min_levels);
            limits.agreement_tol = l.agreement_tol.unwrap_or(limits.agreement_tol);
            limits.extrapolate = l.extrapolate.unwrap_or(limits.extrapolate);
        }
        limits.max_depth = depth.or(cfg.max_depth).unwrap_or(limits.max_depth);
        if limits.max_depth > 30 {
            return Err(invalid(format!("max_depth {} exceeds 30", limits.max_depth)));
        }
        for (name, v) in [("cauchy_tol", limits.cauchy_tol), ("agreement_tol", limits.agreement_tol)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Settings { tol, limits })
    }
}

pub enum BuiltSystem {
    Plain(Arc<dyn InclusionSystem>),
    Cp(Arc<CpSystem>),
    Powers(Arc<BlockCpSemigroup>, Arc<CpSystem>),
    Amalgam(Arc<AmalgamatedSystem>),
}

impl BuiltSystem {
    pub fn as_dyn(&self) -> Arc<dyn InclusionSystem> {
        match self {
            BuiltSystem::Plain(s) => s.clone(),
            BuiltSystem::Cp(s) | BuiltSystem::Powers(_, s) => s.clone(),
            BuiltSystem::Amalgam(s) => s.clone(),
        }
    }

    pub fn cp(&self) -> Option<&CpSystem> {
        match self {
            BuiltSystem::Cp(s) | BuiltSystem::Powers(_, s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Clone)]
pub struct BuiltUnit {
    pub system: String,
    pub grid: GridUnit,
    pub section: Arc<dyn UnitSection>,
}

/// Lazily resolves named systems and units, which may refer to each other.
pub struct Resolver<'a> {
    cfg: &'a ExperimentConfig,
    pub settings: Settings,
    pub horizon: DyadicTime,
    pub check_times: Vec<DyadicTime>,
    pub probe_times: Vec<DyadicTime>,
    systems: HashMap<String, Arc<BuiltSystem>>,
    units: HashMap<String, BuiltUnit>,
    active: Vec<String>,
}

impl<'a> Resolver<'a> {
    pub fn new(cfg: &'a ExperimentConfig, settings: Settings) -> Result<Self, ConfigError> {
        let times = |v: &Option<Vec<Time>>, what: &str| -> Result<Option<Vec<DyadicTime>>, ConfigError> {
            v.as_ref().map(|ts| ts.iter().map(|&t| time(t, what)).collect::<Result<Vec<_>, _>>()).transpose()
        };
        let probe_times = times(&cfg.probe_times, "probe_times")?.unwrap_or_else(|| vec![DyadicTime::ONE.half(), DyadicTime::ONE]);
        let check_times = times(&cfg.check_times, "check_times")?.unwrap_or_else(|| grid(2, DyadicTime::ONE));
        if probe_times.is_empty() || check_times.is_empty() {
            return Err(invalid("probe_times and check_times must be nonempty"));
        }
        let horizon = *probe_times.iter().max().expect("nonempty");
        Ok(Resolver { cfg, settings, horizon, check_times, probe_times, systems: HashMap::new(), units: HashMap::new(), active: Vec::new() })
    }

    fn enter(&mut self, key: String) -> Result<(), ConfigError> {
        if self.active.contains(&key) {
            return Err(invalid(format!("circular reference through {key}")));
        }
        self.active.push(key);
        Ok(())
    }

    pub fn system(&mut self, name: &str) -> Result<Arc<BuiltSystem>, ConfigError> {
        if let Some(s) = self.systems.get(name) {
            return Ok(s.clone());
        }
        let spec = self.cfg.systems.get(name).ok_or_else(|| invalid(format!("unknown system `{name}`")))?.clone();
        self.enter(format!("system `{name}`"))?;
        let built = self.build_system(name, &spec);
        self.active.pop();
        let built = Arc::new(built?);
        self.systems.insert(name.into(), built.clone());
        Ok(built)
    }

    fn build_system(&mut self, name: &str, spec: &SystemSpec) -> Result<BuiltSystem, ConfigError> {
        let tol = self.settings.tol;
        let ctx = |e: prodsys::Error| invalid(format!("system `{name}`: {e}"));
        Ok(match spec {
            SystemSpec::Example2 => BuiltSystem::Plain(Arc::new(prodsys::inclusion::example2_system())),
            SystemSpec::Trivial => BuiltSystem::Plain(Arc::new(TrivialSystem)),
            SystemSpec::Cp { generator, hamiltonian, jumps, example, alpha } => {
                let sg = cp_semigroup(name, generator.as_ref(), hamiltonian.as_ref(), jumps, example.as_deref(), *alpha)?;
                BuiltSystem::Cp(Arc::new(from_cp(sg, tol)))
            }
            SystemSpec::Powers(p) => {
                let block = powers_block(p, &tol).map_err(|e| match e {
                    PowersError::Config(c) => c,
                    PowersError::Library(l) => ctx(l),
                })?;
                let tau = from_cp(block.tau.clone(), tol);
                BuiltSystem::Powers(Arc::new(block), Arc::new(tau))
            }
            SystemSpec::Amalgam { left, right, u0, v0 } => {
                let e = self.system(left)?.as_dyn();
                let f = self.system(right)?.as_dyn();
                let u = self.unit(u0)?;
                let v = self.unit(v0)?;
                if &u.system != left || &v.system != right {
                    return Err(invalid(format!("system `{name}`: u0 must be a unit of `{left}` and v0 a unit of `{right}`")));
                }
                let d = rank_one_morphism(u.section.clone(), v.section.clone(), &self.check_times, &tol).map_err(ctx)?;
                BuiltSystem::Amalgam(Arc::new(amalgamate_systems(e, f, d, &self.check_times, tol).map_err(ctx)?))
            }
            SystemSpec::Scaled { inner, factor } => {
                if !factor.is_finite() {
                    return Err(invalid(format!("system `{name}`: factor must be finite")));
                }
                BuiltSystem::Plain(Arc::new(ScaledBeta::new(self.system(inner)?.as_dyn(), *factor)))
            }
        })
    }

    pub fn unit(&mut self, name: &str) -> Result<BuiltUnit, ConfigError> {
        if let Some(u) = self.units.get(name) {
            return Ok(u.clone());
        }
        let spec = self.cfg.units.get(name).ok_or_else(|| invalid(format!("unknown unit `{name}`")))?.clone();
        self.enter(format!("unit `{name}`"))?;
        let built = self.build_unit(name, &spec);
        self.active.pop();
        let built = built?;
        self.units.insert(name.into(), built.clone());
        Ok(built)
    }

    fn amalgam(&mut self, name: &str, unit: &str) -> Result<Arc<AmalgamatedSystem>, ConfigError> {
        match &*self.system(name)? {
            BuiltSystem::Amalgam(g) => Ok(g.clone()),
            _ => Err(invalid(format!("unit `{unit}`: system `{name}` is not an amalgamation"))),
        }
    }

    fn build_unit(&mut self, name: &str, spec: &UnitSpec) -> Result<BuiltUnit, ConfigError> {
        let depth = self.settings.limits.max_depth;
        let ctx = |e: prodsys::Error| invalid(format!("unit `{name}`: {e}"));
        let system = spec.system().to_string();
        let closed = |sec: Arc<dyn UnitSection>, horizon: DyadicTime| -> Result<BuiltUnit, ConfigError> {
            let grid = GridUnit::from_section(&*sec, horizon, depth).map_err(ctx)?;
            Ok(BuiltUnit { system: system.clone(), grid, section: sec })
        };
        let from_grid = |grid: GridUnit| BuiltUnit { system: system.clone(), section: Arc::new(grid.clone()), grid };
        let sys = self.system(spec.system())?;
        match spec {
            UnitSpec::Example2 { a, b, .. } => closed(Arc::new(example2_unit(complex(*a), complex(*b))), self.horizon),
            UnitSpec::Scalar { a, .. } => {
                let d = sys.as_dyn().dim(self.horizon).map_err(ctx)?;
                if d != 1 {
                    return Err(invalid(format!("unit `{name}`: scalar units need one-dimensional fibers, `{system}` has {d}")));
                }
                closed(Arc::new(scalar_unit(complex(*a))), self.horizon)
            }
            UnitSpec::Seeds { horizon, seeds, growth_bound, .. } => {
                let h = time(*horizon, &format!("unit `{name}` horizon"))?;
                if seeds.is_empty() {
                    return Err(invalid(format!("unit `{name}`: no seeds")));
                }
                let seeds = seeds.iter().map(|s| CVector::from_iterator(s.len(), s.iter().map(|&z| complex(z)))).collect();
                Ok(from_grid(GridUnit::new(h, seeds, *growth_bound).map_err(ctx)?))
            }
            UnitSpec::EmbedLeft { system: g, unit } | UnitSpec::EmbedRight { system: g, unit } => {
                let gsys = self.amalgam(g, name)?;
                let inner = self.unit(unit)?;
                let left = matches!(spec, UnitSpec::EmbedLeft { .. });
                let side = self.side_name(g, left)?;
                if inner.system != side {
                    return Err(invalid(format!("unit `{name}`: `{unit}` lives in `{}`, expected `{side}`", inner.system)));
                }
                let grid = if left { embed_unit_left(&gsys, &inner.grid) } else { embed_unit_right(&gsys, &inner.grid) };
                Ok(from_grid(grid.map_err(ctx)?))
            }
            UnitSpec::Components { system: g, left, right } => {
                let gsys = self.amalgam(g, name)?;
                let (l, r) = (self.unit(left)?, self.unit(right)?);
                let grid = unit_from_components(&gsys, &l.grid, &r.grid).map_err(ctx)?;
                Ok(from_grid(grid))
            }
        }
    }

    /// Name of the left or right component system of the amalgamation `g`.
    pub fn side_name(&self, g: &str, left: bool) -> Result<String, ConfigError> {
        match self.cfg.systems.get(g) {
            Some(SystemSpec::Amalgam { left: l, right: r, .. }) => Ok(if left { l.clone() } else { r.clone() }),
            _ => Err(invalid(format!("system `{g}` is not an amalgamation"))),
        }
    }

    /// `(u0, v0)` of the amalgamation `g`.
    pub fn reference_units(&self, g: &str) -> Option<(String, String)> {
        match self.cfg.systems.get(g) {
            Some(SystemSpec::Amalgam { u0, v0, .. }) => Some((u0.clone(), v0.clone())),
            _ => None,
        }
    }
}

fn cp_semigroup(
    name: &str,
    generator: Option<&Matrix>,
    hamiltonian: Option<&Matrix>,
    jumps: &[Matrix],
    example: Option<&str>,
    alpha: Option<f64>,
) -> Result<CpSemigroup, ConfigError> {
    let ctx = |e: prodsys::Error| invalid(format!("system `{name}`: {e}"));
    match (generator, hamiltonian, example) {
        (Some(g), None, None) if jumps.is_empty() => {
            let g = matrix(g, &format!("system `{name}` generator"))?;
            let n = (g.nrows() as f64).sqrt().round() as usize;
            if n * n != g.nrows() {
                return Err(invalid(format!("system `{name}`: generator size {} is not a square", g.nrows())));
            }
            CpSemigroup::new(n, g).map_err(ctx)
        }
        (None, Some(h), None) => {
            let h = matrix(h, &format!("system `{name}` hamiltonian"))?;
            let ls = jumps.iter().enumerate().map(|(i, l)| matrix(l, &format!("system `{name}` jump {i}"))).collect::<Result<Vec<_>, _>>()?;
            let gen = if ls.is_empty() { hamiltonian_generator(&h) } else { lindblad_generator(&h, &ls) }.map_err(ctx)?;
            CpSemigroup::new(h.nrows(), gen).map_err(ctx)
        }
        (None, None, Some("tt")) if jumps.is_empty() => Ok(example_tt(alpha.unwrap_or(1.0))),
        (None, None, Some(other)) => Err(invalid(format!("system `{name}`: unknown example `{other}`"))),
        _ => Err(invalid(format!("system `{name}`: give exactly one of `generator`, `hamiltonian` (with optional `jumps`) or `example`"))),
    }
}

pub enum PowersError {
    Config(ConfigError),
    Library(prodsys::Error),
}

pub fn powers_block(p: &PowersSpec, tol: &Tolerance) -> Result<BlockCpSemigroup, PowersError> {
    match (p.lambda, p.mu, &p.h_phi, &p.a, &p.h_psi, &p.b) {
        (Some(l), Some(m), None, None, None, None) => scalar_powers(l, m, tol).map_err(PowersError::Library),
        (None, None, Some(hp), Some(a), Some(hq), Some(b)) => {
            let conv = |m: &Matrix, w: &str| matrix(m, &format!("powers {w}")).map_err(PowersError::Config);
            powers_corner(&conv(hp, "h_phi")?, &conv(a, "a")?, &conv(hq, "h_psi")?, &conv(b, "b")?, tol).map_err(PowersError::Library)
        }
        _ => Err(PowersError::Config(invalid("powers data needs either `lambda` and `mu` or all of `h_phi`, `a`, `h_psi`, `b`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolver(cfg: &ExperimentConfig) -> Resolver<'_> {
        Resolver::new(cfg, Settings::new(cfg, None, None).unwrap()).unwrap()
    }

    #[test]
    fn matrices_and_times() {
        let m = matrix(&vec![vec![[1.0, 0.0], [0.0, 2.0]]], "m").unwrap();
        assert_eq!(m.shape(), (1, 2));
        assert_eq!(m[(0, 1)], C64::new(0.0, 2.0));
        assert!(matrix(&vec![], "m").is_err());
        assert!(matrix(&vec![vec![[f64::NAN, 0.0]]], "m").is_err());
        assert_eq!(time([3, 2], "t").unwrap().value(), 0.75);
        assert!(time([0, 1], "t").is_err());
    }

    #[test]
    fn settings_overrides() {
        let cfg = parse(r#"{ "tolerance": { "rank_eps": 1e-6 }, "max_depth": 9, "limits": { "extrapolate": false } }"#, "inline").unwrap();
        let s = Settings::new(&cfg, Some(12), Some(1e-9)).unwrap();
        assert_eq!((s.tol.rank_eps, s.tol.residual_eps, s.limits.max_depth, s.limits.extrapolate), (1e-6, 1e-9, 12, false));
        assert!(Settings::new(&cfg, Some(40), None).is_err());
    }

    #[test]
    fn circular_references_are_reported() {
        let cfg = parse(
            r#"{ "systems": { "A": { "kind": "scaled", "inner": "B", "factor": 1.0 }, "B": { "kind": "scaled", "inner": "A", "factor": 1.0 } } }"#,
            "inline",
        )
        .unwrap();
        let err = resolver(&cfg).system("A").err().unwrap().to_string();
        assert!(err.contains("circular"), "{err}");
    }

    #[test]
    fn units_resolve_against_their_systems() {
        let cfg = parse(
            r#"{ "systems": { "E": { "kind": "example2" }, "T": { "kind": "trivial" } },
                 "units": { "u": { "kind": "scalar", "system": "E", "a": [0, 0] },
                            "w": { "kind": "scalar", "system": "T", "a": [0.5, 0] } } }"#,
            "inline",
        )
        .unwrap();
        let mut r = resolver(&cfg);
        assert!(r.unit("u").err().unwrap().to_string().contains("one-dimensional"));
        let w = r.unit("w").unwrap();
        assert_eq!(w.grid.depth(), LimitOptions::default().max_depth);
        assert!(r.unit("zz").is_err());
    }

    #[test]
    fn cp_generator_forms() {
        let h = vec![vec![[1.0, 0.0], [0.0, 0.0]], vec![[0.0, 0.0], [-1.0, 0.0]]];
        assert_eq!(cp_semigroup("s", None, Some(&h), &[], None, None).unwrap().dim_h(), 2);
        let g = vec![vec![[0.0, 0.0]; 3]; 3];
        assert!(cp_semigroup("s", Some(&g), None, &[], None, None).is_err());
        assert!(cp_semigroup("s", None, None, &[], Some("other"), None).is_err());
        assert!(cp_semigroup("s", None, None, &[], None, None).is_err());
    }
}
