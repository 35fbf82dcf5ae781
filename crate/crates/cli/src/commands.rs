use std::sync::Arc;

use prodsys::index::{centered, defect_p, index_estimate, predicted_amalgam_index, CovKernel};
use prodsys::inclusion::{
    amalgamate_systems, check_axioms, check_strong_morphism, check_unit, check_weak_morphism, example2_to_tt, from_cp,
    powers_comparison, powers_correspondence, rank_one_morphism, scalar_unit, InclusionSystem, MorphismFamily, TrivialSystem,
    UnitSection,
};
use prodsys::limits::covariance;
use prodsys::linalg::{hermitian_eigenvalues, hermitian_part, CHECK_SLACK};
use prodsys::{CMatrix, C64};

use crate::config::{powers_block, BuiltSystem, BuiltUnit, CheckSpec, ConfigError, ExperimentConfig, MorphismSpec, PowersError, Resolver, Settings};
use crate::report::{num, pair, time, CheckEntry, CovarianceEntry, FiberEntry, IndexEntry, PowersEntry, PowersTime, Prediction, ProbeEntry, Report};

fn default_checks(cfg: &ExperimentConfig, r: &mut Resolver) -> Result<Vec<CheckSpec>, ConfigError> {
    let mut out = Vec::new();
    for name in cfg.systems.keys() {
        out.push(CheckSpec::Axioms { system: name.clone() });
        if r.system(name)?.cp().is_some() {
            out.push(CheckSpec::CpValidate { system: name.clone() });
        }
        out.push(CheckSpec::FiberDims { system: name.clone(), expect: None });
    }
    for name in cfg.units.keys() {
        out.push(CheckSpec::Unit { unit: name.clone() });
    }
    Ok(out)
}

fn morphism(r: &mut Resolver, source: &str, target: &str, spec: &MorphismSpec) -> Result<MorphismFamily, ConfigError> {
    let invalid = |m: String| ConfigError::Invalid(m);
    match spec {
        MorphismSpec::Identity => {
            if source != target {
                return Err(invalid(format!("identity morphism needs source = target, got `{source}` and `{target}`")));
            }
            Ok(MorphismFamily::identity(r.system(source)?.as_dyn()))
        }
        MorphismSpec::RankOne { u0, v0 } => {
            let (u, v) = (r.unit(u0)?, r.unit(v0)?);
            if v.system != source || u.system != target {
                return Err(invalid(format!("|{u0}><{v0}| maps `{}` into `{}`, not `{source}` into `{target}`", v.system, u.system)));
            }
            rank_one_morphism(u.section, v.section, &r.check_times, &r.settings.tol).map_err(|e| invalid(format!("rank one morphism: {e}")))
        }
        MorphismSpec::Example2ToTt => match &*r.system(target)? {
            BuiltSystem::Cp(tt) => Ok(example2_to_tt(tt.clone())),
            _ => Err(invalid(format!("example2_to_tt needs a cp target, `{target}` is not one"))),
        },
    }
}

pub fn cmd_check(cfg: &ExperimentConfig, settings: Settings) -> Result<Report, ConfigError> {
    let mut r = Resolver::new(cfg, settings)?;
    let mut report = Report::new("check");
    let checks = match &cfg.checks {
        Some(c) => c.clone(),
        None => default_checks(cfg, &mut r)?,
    };
    let tol = settings.tol;
    for check in &checks {
        match check {
            CheckSpec::Axioms { system } => {
                let sys = r.system(system)?.as_dyn();
                report.push(CheckEntry::from_report(system, &check_axioms(&*sys, &r.check_times, &tol)));
            }
            CheckSpec::Unit { unit } => {
                let u = r.unit(unit)?;
                let sys = r.system(&u.system)?.as_dyn();
                report.push(CheckEntry::from_report(unit, &check_unit(&*sys, &u.grid, &tol)));
            }
            CheckSpec::CpValidate { system } => {
                let built = r.system(system)?;
                let cp = built.cp().ok_or_else(|| ConfigError::Invalid(format!("system `{system}` is not a CP semigroup")))?;
                let entry = match cp.semigroup().validate_default(&tol) {
                    Ok(()) => CheckEntry::outcome("cp_semigroup::validate", system, true, vec![]),
                    Err(e) => CheckEntry::error("cp_semigroup::validate", system, e),
                };
                report.push(entry);
            }
            CheckSpec::FiberDims { system, expect } => {
                let sys = r.system(system)?.as_dyn();
                let mut dims = Vec::new();
                let mut failures = Vec::new();
                for &t in &r.check_times {
                    match sys.dim(t) {
                        Ok(d) => {
                            if expect.is_some_and(|e| e != d) {
                                failures.push(format!("dimension {d} at {t}, expected {}", expect.unwrap_or_default()));
                            }
                            dims.push((time(t), d));
                        }
                        Err(e) => failures.push(format!("fiber at {t}: {e}")),
                    }
                }
                if expect.is_some() || !failures.is_empty() {
                    report.push(CheckEntry::outcome("cp_semigroup::gns_fiber", system, failures.is_empty(), failures));
                }
                report.fibers.push(FiberEntry { system: system.clone(), dims });
            }
            CheckSpec::WeakMorphism { source, target, morphism: m } | CheckSpec::StrongMorphism { source, target, morphism: m } => {
                let a = morphism(&mut r, source, target, m)?;
                let (e, f) = (r.system(source)?.as_dyn(), r.system(target)?.as_dyn());
                let rep = if matches!(check, CheckSpec::WeakMorphism { .. }) {
                    check_weak_morphism(&*e, &*f, &a, &r.check_times, &tol)
                } else {
                    check_strong_morphism(&*e, &*f, &a, &r.check_times, &tol)
                };
                report.push(CheckEntry::from_report(&format!("{source} -> {target}"), &rep));
            }
        }
    }
    Ok(report.finish())
}

struct KernelRun {
    entries: Vec<CovarianceEntry>,
    kernel: Option<CovKernel>,
}

/// Pairwise covariances; failures are recorded per pair instead of aborting.
fn kernel_run(r: &Resolver, sys: &dyn InclusionSystem, units: &[(String, BuiltUnit)]) -> KernelRun {
    let n = units.len();
    let mut gamma = CMatrix::zeros(n, n);
    let mut entries = Vec::new();
    let mut ok = true;
    for i in 0..n {
        for j in i..n {
            let (lu, u) = &units[i];
            let (lv, v) = &units[j];
            match covariance(sys, &u.grid, &v.grid, &r.probe_times, &r.settings.limits, &r.settings.tol) {
                Ok(c) => {
                    gamma[(i, j)] = c.gamma;
                    gamma[(j, i)] = c.gamma.conj();
                    let probes = c
                        .probes
                        .iter()
                        .map(|p| ProbeEntry {
                            t: time(p.t),
                            gamma: pair(p.gamma),
                            levels: p.lifted.levels_used,
                            residual_history: p.lifted.residual_history.iter().map(|x| num(*x)).collect(),
                        })
                        .collect();
                    entries.push(CovarianceEntry { left: lu.clone(), right: lv.clone(), gamma: Some(pair(c.gamma)), spread: num(c.spread), probes, error: None });
                }
                Err(e) => {
                    ok = false;
                    entries.push(CovarianceEntry { left: lu.clone(), right: lv.clone(), gamma: None, spread: None, probes: vec![], error: Some(e.to_string()) });
                }
            }
        }
    }
    let kernel = ok.then(|| CovKernel::new(units.iter().map(|(l, _)| l.clone()).collect(), gamma, r.settings.limits.agreement_tol)).and_then(|k| k.ok());
    KernelRun { entries, kernel }
}

fn units_of(r: &mut Resolver, system: &str, names: &[String]) -> Result<Vec<(String, BuiltUnit)>, ConfigError> {
    if names.is_empty() {
        return Err(ConfigError::Invalid(format!("no units given for `{system}`")));
    }
    let mut out = Vec::new();
    for name in names {
        let u = r.unit(name)?;
        if u.system != system {
            return Err(ConfigError::Invalid(format!("unit `{name}` lives in `{}`, not `{system}`", u.system)));
        }
        out.push((name.clone(), u));
    }
    Ok(out)
}

fn failed_pairs(run: &KernelRun) -> Vec<String> {
    run.entries.iter().filter_map(|e| e.error.as_ref().map(|m| format!("({}, {}): {m}", e.left, e.right))).collect()
}

pub fn cmd_index(cfg: &ExperimentConfig, settings: Settings) -> Result<Report, ConfigError> {
    let spec = cfg.index.as_ref().ok_or_else(|| ConfigError::Invalid("config has no `index` section".into()))?;
    let mut r = Resolver::new(cfg, settings)?;
    let mut report = Report::new("index");
    let tol = settings.tol;
    let eps = tol.residual_eps * CHECK_SLACK;
    let sys = r.system(&spec.system)?.as_dyn();
    let units = units_of(&mut r, &spec.system, &spec.units)?;
    let run = kernel_run(&r, &*sys, &units);
    report.covariances = run.entries.clone();
    let Some(kernel) = run.kernel.clone() else {
        report.push(CheckEntry::outcome("index_theory::cov_kernel", &spec.system, false, failed_pairs(&run)));
        return Ok(report.finish());
    };
    let diag = kernel.diagnostics().map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let mut entry = CheckEntry::outcome("index_theory::cov_kernel", &spec.system, true, vec![]);
    entry.threshold = num(eps);
    entry.residuals.insert("hermitian".into(), num(diag.hermitian_residual));
    entry.residuals.insert("cpd_violation".into(), num((-diag.cpd_min_eigenvalue).max(0.0)));
    if let Err(e) = kernel.validate(eps) {
        entry.passed = false;
        entry.failures.push(e.to_string());
    }
    report.push(entry);

    let (spectrum, estimate) = match centered(&kernel, &kernel.labels[0], &tol) {
        Ok(l) => {
            let spectrum = hermitian_eigenvalues(&hermitian_part(&l)).unwrap_or_default();
            report.push(CheckEntry::outcome("index_theory::centered", &spec.system, true, vec![]));
            (spectrum, index_estimate(&kernel, &tol).unwrap_or(0))
        }
        Err(e) => {
            report.push(CheckEntry::error("index_theory::centered", &spec.system, e));
            (vec![], 0)
        }
    };

    let mut prediction = None;
    if let Some((u0, v0)) = r.reference_units(&spec.system) {
        let mut side = |left: bool, names: &Option<Vec<String>>, reference: &str| -> Result<(KernelRun, Option<C64>), ConfigError> {
            let sys_name = r.side_name(&spec.system, left)?;
            let names = names.clone().unwrap_or_else(|| vec![reference.to_string()]);
            let units = units_of(&mut r, &sys_name, &names)?;
            let side_sys = r.system(&sys_name)?.as_dyn();
            let run = kernel_run(&r, &*side_sys, &units);
            let refunit = r.unit(reference)?;
            let self_cov = covariance(&*side_sys, &refunit.grid, &refunit.grid, &r.probe_times, &r.settings.limits, &tol).ok().map(|c| c.gamma);
            Ok((run, self_cov))
        };
        let (left, gu) = side(true, &spec.left_units, &u0)?;
        let (right, gv) = side(false, &spec.right_units, &v0)?;
        report.covariances.extend(left.entries.iter().cloned());
        report.covariances.extend(right.entries.iter().cloned());
        let id = "index_theory::predicted_amalgam_index";
        match (&left.kernel, &right.kernel, gu, gv) {
            (Some(kl), Some(kr), Some(gu), Some(gv)) => {
                let il = index_estimate(kl, &tol).unwrap_or(0);
                let ir = index_estimate(kr, &tol).unwrap_or(0);
                match defect_p(gu, gv, &tol) {
                    Ok(p) => {
                        let predicted = predicted_amalgam_index(il, ir, p, eps);
                        let matches = predicted == estimate;
                        let failures = if matches { vec![] } else { vec![format!("estimated {estimate}, predicted {predicted}")] };
                        report.push(CheckEntry::outcome(id, &spec.system, matches, failures));
                        prediction = Some(Prediction { index_left: il, index_right: ir, p: num(p), predicted, matches });
                    }
                    Err(e) => report.push(CheckEntry::error(id, &spec.system, e)),
                }
            }
            _ => {
                let mut failures = failed_pairs(&left);
                failures.extend(failed_pairs(&right));
                if failures.is_empty() {
                    failures.push("self-covariance of a reference unit failed".into());
                }
                report.push(CheckEntry::outcome(id, &spec.system, false, failures));
            }
        }
    }
    if let Some(want) = spec.expect_index {
        let ok = want == estimate;
        let failures = if ok { vec![] } else { vec![format!("estimated {estimate}, expected {want}")] };
        report.push(CheckEntry::outcome("index_theory::index_estimate", &spec.system, ok, failures));
    }
    let n = kernel.len();
    report.index = Some(IndexEntry {
        system: spec.system.clone(),
        labels: kernel.labels.clone(),
        kernel: (0..n).map(|i| (0..n).map(|j| pair(kernel.gamma[(i, j)])).collect()).collect(),
        hermitian_residual: num(diag.hermitian_residual),
        cpd_min_eigenvalue: num(diag.cpd_min_eigenvalue),
        centered_spectrum: spectrum.into_iter().map(num).collect(),
        index_estimate: estimate,
        prediction,
        expected: spec.expect_index,
    });
    Ok(report.finish())
}

pub fn cmd_powers(cfg: &ExperimentConfig, settings: Settings) -> Result<Report, ConfigError> {
    let spec = cfg.powers.as_ref().ok_or_else(|| ConfigError::Invalid("config has no `powers` section".into()))?;
    let r = Resolver::new(cfg, settings)?;
    let tol = settings.tol;
    let mut report = Report::new("powers");
    let block = match powers_block(spec, &tol) {
        Ok(b) => Arc::new(b),
        Err(PowersError::Config(e)) => return Err(e),
        Err(PowersError::Library(e)) => {
            report.push(CheckEntry::error("cp_semigroup::powers_corner", "powers", e));
            return Ok(report.finish());
        }
    };
    report.push(CheckEntry::outcome("cp_semigroup::powers_corner", "powers", true, vec![]));
    let tau = Arc::new(from_cp(block.tau.clone(), tol));
    let built = (|| -> prodsys::Result<_> {
        let (e, f, d): (Arc<dyn InclusionSystem>, Arc<dyn InclusionSystem>, MorphismFamily) = match (spec.lambda, spec.mu) {
            (Some(l), Some(m)) => {
                let u0: Arc<dyn UnitSection> = Arc::new(scalar_unit(C64::new(-l, 0.0)));
                let v0: Arc<dyn UnitSection> = Arc::new(scalar_unit(C64::new(-m, 0.0)));
                (Arc::new(TrivialSystem), Arc::new(TrivialSystem), rank_one_morphism(u0, v0, &r.check_times, &tol)?)
            }
            _ => {
                let (e, f) = (Arc::new(from_cp(block.phi.clone(), tol)), Arc::new(from_cp(block.psi.clone(), tol)));
                let (ec, fc, b) = (e.clone(), f.clone(), block.clone());
                let d = MorphismFamily::new(0.0, move |t| b.corner_morphism(&*ec.fiber(t)?, &*fc.fiber(t)?, t.value()));
                (e, f, d)
            }
        };
        Ok(Arc::new(amalgamate_systems(e, f, d, &r.check_times, tol)?))
    })();
    let g = match built {
        Ok(g) => g,
        Err(e) => {
            report.push(CheckEntry::error("inclusion::amalgamate_systems", "powers", e));
            return Ok(report.finish());
        }
    };
    report.push(CheckEntry::from_report("tau", &check_axioms(&*tau, &r.check_times, &tol)));
    report.push(CheckEntry::from_report("amalgam", &check_axioms(&*g, &r.check_times, &tol)));

    let threshold = tol.residual_eps * CHECK_SLACK;
    let mut times = Vec::new();
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for &t in &r.probe_times {
        match powers_comparison(&block, &tau, &g, t, &tol) {
            Ok(c) => {
                worst = worst.max(c.gram_discrepancy);
                if c.dim_tau != c.dim_amalgam {
                    failures.push(format!("dimensions {} and {} at {t}", c.dim_tau, c.dim_amalgam));
                }
                times.push(PowersTime {
                    t: time(t),
                    dim_tau: c.dim_tau,
                    dim_amalgam: c.dim_amalgam,
                    gram_discrepancy: num(c.gram_discrepancy),
                    unitarity_residual: num(c.unitarity_residual),
                });
            }
            Err(e) => failures.push(format!("at {t}: {e}")),
        }
    }
    if worst > threshold {
        failures.push(format!("inner products differ by {worst:.3e}"));
    }
    let mut entry = CheckEntry::outcome("inclusion::powers_comparison", "tau vs amalgam", failures.is_empty(), failures);
    entry.threshold = num(threshold);
    entry.residuals.insert("gram_discrepancy".into(), num(worst));
    entry.samples = r.probe_times.len();
    report.push(entry);
    let w = powers_correspondence(block, tau.clone(), g.clone(), tol);
    report.push(CheckEntry::from_report("amalgam -> tau", &check_strong_morphism(&*g, &*tau, &w, &r.check_times, &tol)));
    report.powers = Some(PowersEntry { times, max_discrepancy: num(worst), threshold: num(threshold) });
    Ok(report.finish())
}
