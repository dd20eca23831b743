use std::f64::consts::{PI, TAU};
use std::path::Path;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use serde_json::json;
use teichkit_core::acceptance;
use teichkit_core::bers::{
    ahlfors_weill, bers_map_with, bilipschitz_representative_with, equivalent_with,
    hyperbolic_distortion_at, BersOptions, DEFAULT_DELTA,
};
use teichkit_core::boundary::{
    ba_extend, besov_characterization_check_with, besov_seminorm, boundary_map, boundary_trace,
    extension_norm, log_besov, welding_identity, welding_with, CharacterizationOptions,
    ExtensionKernel, WeldingOptions,
};
use teichkit_core::domains::{
    ainf_norm, analytic_besov_norm, ap_norm, mp_norm, BeltramiCoefficient, CoefficientKind,
    CoefficientSpec, DomainTag, HolomorphicFunction,
};
use teichkit_core::solver::{
    solve_disk_with, solve_half_plane, solve_plane_with, symmetry_defect, QuasiconformalMap,
    SolverOptions,
};

use crate::cache;
use crate::config::{ExperimentConfig, FamilyConfig, FunctionSpec};
use crate::error::{config, Result};
use crate::result::{cell, ExperimentResult, StageError, Table};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn key(name: &str, p: f64) -> String {
    format!("{name}[p={p}]")
}

/// Runs one experiment, consulting the cache when `TEICHKIT_CACHE_DIR` is set.
///
/// Configuration errors are returned; failures inside a computation are
/// recorded in the result with their stage name, next to the partial output.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let cache_dir = std::env::var_os(cache::CACHE_ENV);
    let entry = cache_dir
        .as_deref()
        .and_then(|d| cache::entry_path(Path::new(d), cfg));
    if let Some(path) = &entry {
        if let Some(r) = cache::load(path) {
            return Ok(r);
        }
    }
    let start = Instant::now();
    let mut res = ExperimentResult::new(cfg.clone());
    execute(cfg, &mut res)?;
    res.wall_time = start.elapsed().as_secs_f64();
    if let (Some(path), None) = (&entry, &res.error) {
        cache::store(path, &res)?;
    }
    Ok(res)
}

/// Records a stage failure; `None` tells the caller to stop.
fn stage<T>(res: &mut ExperimentResult, name: &str, r: teichkit_core::Result<T>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            res.error = Some(StageError {
                stage: name.to_string(),
                message: e.to_string(),
            });
            None
        }
    }
}

fn execute(cfg: &ExperimentConfig, res: &mut ExperimentResult) -> Result<()> {
    match cfg.command.as_str() {
        "norm" => norm(cfg, res),
        "solve" => solve(cfg, res),
        "bers" => bers(cfg, res),
        "aw" => aw(cfg, res),
        "bilip" => bilip(cfg, res),
        "weld" => weld(cfg, res),
        "besov" => besov(cfg, res),
        "extend" => extend(cfg, res),
        "characterize" => characterize(cfg, res),
        "roundtrip" => roundtrip(cfg, res),
        "constants" => constants(cfg, res),
        "verify-all" => verify_all(cfg, res),
        other => Err(crate::error::CliError::UnknownCommand(other.to_string())),
    }
}

fn mu_spec(cfg: &ExperimentConfig) -> Result<&CoefficientSpec> {
    cfg.mu
        .as_ref()
        .ok_or_else(|| config(format!("{} needs a coefficient (mu)", cfg.command)))
}

fn coefficient(cfg: &ExperimentConfig) -> Result<BeltramiCoefficient> {
    Ok(mu_spec(cfg)?.build()?)
}

fn solver_options(cfg: &ExperimentConfig, default: SolverOptions) -> Result<SolverOptions> {
    Ok(match cfg.grid {
        Some(g) => SolverOptions::with_grid(g.n, g.half_width.unwrap_or(default.grid.half_width))?,
        None => default,
    })
}

fn bers_options(cfg: &ExperimentConfig) -> Result<BersOptions> {
    Ok(BersOptions {
        solver: solver_options(cfg, SolverOptions::default())?,
        ..BersOptions::default()
    })
}

fn welding_options(cfg: &ExperimentConfig, base: WeldingOptions) -> Result<WeldingOptions> {
    Ok(WeldingOptions {
        solver: solver_options(cfg, base.solver)?,
        ..base
    })
}

fn characterization_options(cfg: &ExperimentConfig) -> Result<CharacterizationOptions> {
    let base = CharacterizationOptions::default();
    Ok(CharacterizationOptions {
        welding: welding_options(cfg, base.welding)?,
        bers: bers_options(cfg)?,
        skip_roundtrip: false,
    })
}

/// Seeded sample points in the parameter domain of `domain`.
fn sample_points(domain: DomainTag, seed: u64, n: usize) -> Vec<Complex64> {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    (0..n)
        .map(|_| match domain {
            DomainTag::UnitDisk => {
                Complex64::from_polar(0.95 * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..TAU))
            }
            DomainTag::UpperHalfPlane => c(rng.gen_range(-2.0..2.0), rng.gen_range(0.05..2.0)),
            _ => c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
        })
        .collect()
}

fn on_circle(r: f64, n: usize) -> impl Iterator<Item = Complex64> {
    (0..n).map(move |k| Complex64::from_polar(r, TAU * (k as f64 + 0.5) / n as f64))
}

fn norm(cfg: &ExperimentConfig, res: &mut ExperimentResult) -> Result<()> {
    let mu = coefficient(cfg)?;
    res.datum("sup_norm", mu.sup_norm());
    let mut finite = serde_json::Map::new();
    for p in cfg.p_values() {
        let Some(r) = stage(res, &key("mp_norm", p), mp_norm(&mu, p)) else {
            return Ok(());
        };
        finite.insert(format!("{p}"), json!(r.is_finite()));
        res.report(key("mp_norm", p), r);
    }
    res.datum("finite", finite);
    Ok(())
}

fn solve(cfg: &ExperimentConfig, res: &mut ExperimentResult) -> Result<()> {
    let mu = coefficient(cfg)?;
    let f = match (mu.kind(), mu.domain()) {
        (CoefficientKind::PowerMap { alpha }, _) => {
            stage(res, "solve", QuasiconformalMap::power(*alpha))
        }
        (_, DomainTag::UnitDisk) => {
            let o = solver_options(cfg, SolverOptions::default())?;
            stage(res, "solve", solve_disk_with(&mu, &o))
        }
        (_, DomainTag::UpperHalfPlane) => {
            let o = solver_options(cfg, SolverOptions::default())?;
            stage(res, "solve", solve_half_plane(&mu, &o))
        }
        _ => {
            let o = solver_options(cfg, SolverOptions::default())?;
            stage(res, "solve", solve_plane_with(&mu, &o))
        }
    };
    let Some(f) = f else { return Ok(()) };
    if let Some(d) = f.diagnostics() {
        res.verdict("residual", d.residual <= cfg.tolerance("residual"));
        res.verdict("neumann_ratio", d.max_ratio <= mu.sup_norm() + 0.1);
        res.datum("diagnostics", d);
    }
    let Some(defect) = stage(res, "normalization", f.normalization_defect()) else {
        return Ok(());
    };
    res.datum("normalization_defect", defect);
    if f.domain() == DomainTag::UnitDisk && !mu.is_zero() {
        let Some(s) = stage(res, "symmetry", symmetry_defect(&f)) else {
            return Ok(());
        };
        res.datum("symmetry_defect", s);
    }
    let mut t = Table::new(&["z_re", "z_im", "f_re", "f_im"]);
    for z in sample_points(mu.domain(), cfg.seed, 64) {
        let Some(w) = stage(res, "evaluate", f.eval(z)) else {
            return Ok(());
        };
        t.push(vec![cell(z.re), cell(z.im), cell(w.re), cell(w.im)]);
    }
    res.tables.insert("samples".into(), t);
    Ok(())
}

fn laurent_table(v: &serde_json::Value) -> Table {
    let mut t = Table::new(&["order", "re", "im"]);
    if let Some(rows) = v.get("laurent").and_then(|l| l.as_array()) {
        for row in rows {
            let get = |i: usize| row.get(i).and_then(|x| x.as_f64()).unwrap_or(f64::NAN);
            t.push(vec![
                format!("{}", get(0) as i64),
                cell(get(1)),
                cell(get(2)),
            ]);
        }
    }
    t
}

fn bers(cfg: &ExperimentConfig, res: &mut ExperimentResult) -> Result<()> {
    let mu = coefficient(cfg)?;
    let o = bers_options(cfg)?;
    let ps = cfg.p_values();
    let Some(t) = stage(res, "bers_map", bers_map_with(&mu, ps[0], &o)) else {
        return Ok(());
    };
    res.verdict("laurent_consistency", t.consistency <= o.consistency_tol);
    res.report("ainf_norm", t.ainf_norm_report.clone());
    for &p in &ps {
        let Some(r) = stage(res, &key("ap_norm", p), ap_norm(&t.bers_image, p)) else {
            return Ok(());
        };
        res.report(key("ap_norm", p), r);
    }
    let v = t.bers_image.eval(c(2.0, 0.0));
    res.datum("value_at_2", [v.re, v.im]);
    let point = t.to_json();
    res.tables.insert("laurent".into(), laurent_table(&point));
    res.datum("teichmuller_point", point);
    Ok(())
}

fn aw(cfg: &ExperimentConfig, res: &mut ExperimentResult) -> Result<()> {
    let o = bers_options(cfg)?;
    let phi = match (&cfg.phi, &cfg.mu) {
        (Some(spec), _) => {
            if !spec.on_exterior() {
                return Err(config(
                    "aw needs phi on the exterior disk (disk_schwarzian)",
                ));
            }
            spec.build()?
        }
        (None, Some(m)) => {
            let mu = m.build()?;
            let Some(t) = stage(res, "bers_map", bers_map_with(&mu, 2.0, &o)) else {
                return Ok(());
            };
            t.bers_image
        }
        (None, None) => return Err(config("aw needs phi or mu")),
    };
    let Some(sup) = stage(res, "ainf_norm", ainf_norm(&phi)) else {
        return Ok(());
    };
    let Some(sigma) = stage(res, "ahlfors_weill", ahlfors_weill(&phi)) else {
        return Ok(());
    };
    res.datum("section_sup_norm", sigma.sup_norm());
    res.report("ainf_norm", sup);
    let Some(back) = stage(res, "bers_map_of_section", bers_map_with(&sigma, 2.0, &o)) else {
        return Ok(());
    };
    let defect = on_circle(2.0, 32)
        .map(|z| (back.bers_image.eval(z) - phi.eval(z)).norm())
        .fold(0.0, f64::max);
    res.datum("section_defect", defect);
    res.verdict("section", defect <= cfg.tolerance("section"));
    Ok(())
}

fn bilip(cfg: &ExperimentConfig, res: &mut ExperimentResult) -> Result<()> {
    let mu = coefficient(cfg)?;
    let o = bers_options(cfg)?;
    let delta = cfg.delta.unwrap_or(DEFAULT_DELTA);
    let Some(r) = stage(
        res,
        "bilipschitz_representative",
        bilipschitz_representative_with(&mu, delta, &o),
    ) else {
        return Ok(());
    };
    res.datum("steps", r.steps);
    res.datum("distortion", [r.distortion.0, r.distortion.1]);
    let tol = cfg.tolerance("equivalence");
    let Some((same, d)) = stage(res, "equivalent", equivalent_with(&r.nu, &mu, tol, &o)) else {
        return Ok(());
    };
    res.datum("distance", d);
    res.verdict("equivalent", same);
    let pts = sample_points(DomainTag::UnitDisk, cfg.seed, 64);
    let Some((lo, hi)) = stage(
        res,
        "sampled_distortion",
        hyperbolic_distortion_at(&r.map, &pts),
    ) else {
        return Ok(());
    };
    res.datum("sampled_distortion", [lo, hi]);
    let (a, b) = r.distortion;
    res.verdict(
        "bilipschitz",
        a > 0.0 && b.is_finite() && lo > 0.0 && hi.is_finite(),
    );
    Ok(())
}

fn weld(cfg: &ExperimentConfig, res: &mut ExperimentResult) -> Result<()> {
    let mu = coefficient(cfg)?;
    let o = welding_options(cfg, WeldingOptions::default())?;
    let Some(w) = stage(res, "welding", welding_with(&mu, &o)) else {
        return Ok(());
    };
    res.datum("consistency", w.consistency);
    res.verdict("welding", w.consistency <= cfg.tolerance("welding"));
    let mut t = Table::new(&["x", "h", "direct"]);
    for (&x, &y) in w.h.params().iter().zip(w.h.values()) {
        t.push(vec![cell(x), cell(y), cell(w.direct.eval(x))]);
    }
    res.tables.insert("boundary".into(), t);
    let Some(id) = stage(res, "welding_identity", welding_identity(&w)) else {
        return Ok(());
    };
    res.datum("identity_discrepancy", id.sup_discrepancy);
    res.verdict("identity", id.sup_discrepancy <= cfg.tolerance("identity"));
    Ok(())
}

fn besov(cfg: &ExperimentConfig, res: &mut ExperimentResult) -> Result<()> {
    if let Some(spec) = &cfg.phi {
        if spec.on_exterior() {
            return Err(config("besov needs phi on the disk"));
        }
        let phi = spec.build()?;
        let Some(trace) = stage(res, "trace", boundary_trace(&phi, 1024)) else {
            return Ok(());
        };
        let u = trace.function();
        let mut ratios = serde_json::Map::new();
        for p in cfg.p_values() {
            let Some(b) = stage(res, &key("besov", p), besov_seminorm(&u, p)) else {
                return Ok(());
            };
            let Some(a) = stage(res, &key("analytic_besov", p), analytic_besov_norm(&phi, p))
            else {
                return Ok(());
            };
            ratios.insert(format!("{p}"), json!(b.value / a.value));
            res.report(key("besov", p), b);
            res.report(key("analytic_besov", p), a);
        }
        res.datum("ratio", ratios);
        return Ok(());
    }
    let mu = coefficient(cfg)?;
    let o = characterization_options(cfg)?;
    let Some((h, consistency)) = stage(res, "boundary_map", boundary_map(&mu, &o)) else {
        return Ok(());
    };
    if let Some(w) = consistency {
        res.datum("welding_consistency", w);
    }
    for p in cfg.p_values() {
        let Some((r, gap)) = stage(res, &key("log_besov", p), log_besov(&h, p)) else {
            return Ok(());
        };
        res.report(key("log_besov", p), r);
        res.datum("log_derivative_gap", gap);
    }
    Ok(())
}

fn extend(cfg: &ExperimentConfig, res: &mut ExperimentResult) -> Result<()> {
    let mu = coefficient(cfg)?;
    let o = characterization_options(cfg)?;
    let kernel = match cfg.kernel.as_deref() {
        Some("box") => ExtensionKernel::Box,
        _ => ExtensionKernel::Gaussian,
    };
    res.datum("kernel", kernel);
    let Some((h, _)) = stage(res, "boundary_map", boundary_map(&mu, &o)) else {
        return Ok(());
    };
    let Some(ext) = stage(res, "ba_extend", ba_extend(&h, kernel)) else {
        return Ok(());
    };
    res.datum("extension_sup_norm", ext.sup_norm());
    if kernel == ExtensionKernel::Box {
        // The box kernel is a comparison only; norms use the Gaussian extension.
        return Ok(());
    }
    for p in cfg.p_values() {
        let Some(r) = stage(res, &key("extension_norm", p), extension_norm(&h, p)) else {
            return Ok(());
        };
        res.report(key("extension_norm", p), r);
    }
    Ok(())
}

fn characterize(cfg: &ExperimentConfig, res: &mut ExperimentResult) -> Result<()> {
    let mu = coefficient(cfg)?;
    let o = characterization_options(cfg)?;
    for p in cfg.p_values() {
        let Some(r) = stage(
            res,
            &key("characterization", p),
            besov_characterization_check_with(&mu, p, &o),
        ) else {
            return Ok(());
        };
        res.verdict(key("coherent", p), r.coherent);
        res.datum(key("characterization", p), &r);
    }
    Ok(())
}

fn roundtrip(cfg: &ExperimentConfig, res: &mut ExperimentResult) -> Result<()> {
    let mu = coefficient(cfg)?;
    let o = characterization_options(cfg)?;
    let p = cfg.p_values()[0];
    let Some(r) = stage(
        res,
        "characterization",
        besov_characterization_check_with(&mu, p, &o),
    ) else {
        return Ok(());
    };
    match (
        r.roundtrip.distance,
        &r.roundtrip.skipped,
        &r.roundtrip.error,
    ) {
        (Some(d), _, _) => {
            res.datum("distance", d);
            res.verdict("roundtrip", d <= cfg.tolerance("roundtrip"));
        }
        (None, Some(why), _) => res.datum("skipped", why),
        (None, None, Some(e)) => {
            res.error = Some(StageError {
                stage: "roundtrip".into(),
                message: e.clone(),
            });
        }
        (None, None, None) => {}
    }
    res.datum("coherent", r.coherent);
    Ok(())
}

/// `a / b`, with `0/0` reported as `NaN` (`NA` in tables).
fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        f64::NAN
    } else {
        a / b
    }
}

fn running_max(m: &mut f64, r: f64) -> f64 {
    if r.is_finite() {
        *m = if m.is_finite() { m.max(r) } else { r };
    }
    *m
}

fn constants(cfg: &ExperimentConfig, res: &mut ExperimentResult) -> Result<()> {
    let family = cfg.family.clone().unwrap_or_default();
    let FamilyConfig { k: ks, r: rs } = &family;
    if ks.is_empty() || rs.is_empty() {
        return Err(config("empty constants family"));
    }
    let o = bers_options(cfg)?;
    let mut members = Vec::new();
    for &k in ks {
        for &r in rs {
            let mu = if k == 0.0 {
                BeltramiCoefficient::zero(DomainTag::UnitDisk)
            } else {
                BeltramiCoefficient::constant_disk(c(k, 0.0), r)?
            };
            let Some(t) = stage(res, "bers_map", bers_map_with(&mu, 2.0, &o)) else {
                return Ok(());
            };
            members.push((k, r, mu, t.bers_image));
        }
    }
    let mut image = Table::new(&[
        "k",
        "r",
        "p",
        "ap_norm",
        "mp_norm",
        "ratio",
        "running_max",
        "ainf_norm",
        "ordering_ratio",
        "ordering_running_max",
    ]);
    let mut big_c = serde_json::Map::new();
    let mut small_c = serde_json::Map::new();
    for p in cfg.p_values() {
        let (mut m, mut mo) = (f64::NAN, f64::NAN);
        for (k, r, mu, phi) in &members {
            let Some(a) = stage(res, "ap_norm", ap_norm(phi, p)) else {
                return Ok(());
            };
            let Some(n) = stage(res, "mp_norm", mp_norm(mu, p)) else {
                return Ok(());
            };
            let Some(s) = stage(res, "ainf_norm", ainf_norm(phi)) else {
                return Ok(());
            };
            let q = ratio(a.value, n.value);
            let qo = ratio(s.value, a.value);
            image.push(vec![
                format!("{k}"),
                format!("{r}"),
                format!("{p}"),
                cell(a.value),
                cell(n.value),
                cell(q),
                cell(running_max(&mut m, q)),
                cell(s.value),
                cell(qo),
                cell(running_max(&mut mo, qo)),
            ]);
        }
        big_c.insert(format!("{p}"), json!(m.is_finite().then_some(m)));
        small_c.insert(format!("{p}"), json!(mo.is_finite().then_some(mo)));
    }
    res.tables.insert("bers_constant".into(), image);
    res.datum("bers_constant", big_c);
    res.datum("ordering_constant", small_c);

    let functions: [(&str, HolomorphicFunction); 4] = [
        ("z", HolomorphicFunction::monomial(1)),
        ("z^2", HolomorphicFunction::monomial(2)),
        ("z^3", HolomorphicFunction::monomial(3)),
        (
            "1/(z-2)",
            FunctionSpec::SimplePole { a: [2.0, 0.0] }.build()?,
        ),
    ];
    let mut trace = Table::new(&[
        "function",
        "p",
        "trace_besov",
        "analytic_besov",
        "ratio",
        "running_constant",
        "douglas",
    ]);
    let mut trace_c = serde_json::Map::new();
    for p in cfg.p_values().into_iter().filter(|&p| p > 1.0) {
        let mut cp = f64::NAN;
        for (name, phi) in &functions {
            let Some(u) = stage(res, "trace", boundary_trace(phi, 1024)) else {
                return Ok(());
            };
            let Some(b) = stage(res, "besov", besov_seminorm(&u.function(), p)) else {
                return Ok(());
            };
            let Some(a) = stage(res, "analytic_besov", analytic_besov_norm(phi, p)) else {
                return Ok(());
            };
            let q = ratio(b.value, a.value);
            let two_sided = if q > 0.0 { q.max(1.0 / q) } else { f64::NAN };
            let douglas = if p == 2.0 { cell(q) } else { "NA".into() };
            if p == 2.0 {
                res.verdict(
                    format!("douglas[{name}]"),
                    (q - 2.0 * PI.sqrt()).abs() <= 1e-2 * 2.0 * PI.sqrt(),
                );
            }
            trace.push(vec![
                name.to_string(),
                format!("{p}"),
                cell(b.value),
                cell(a.value),
                cell(q),
                cell(running_max(&mut cp, two_sided)),
                douglas,
            ]);
        }
        trace_c.insert(format!("{p}"), json!(cp.is_finite().then_some(cp)));
    }
    res.tables.insert("trace_constant".into(), trace);
    res.datum("trace_constant", trace_c);
    Ok(())
}

fn verify_all(cfg: &ExperimentConfig, res: &mut ExperimentResult) -> Result<()> {
    let ids: Vec<u8> = match &cfg.criteria {
        Some(v) => v.clone(),
        None => acceptance::CRITERIA.iter().map(|(i, _)| *i).collect(),
    };
    let mut t = Table::new(&["id", "name", "passed", "detail"]);
    // Timings vary between runs, so they stay out of the result.
    let mut rows = Vec::new();
    for id in ids {
        let r = acceptance::run(id).map_err(|e| config(e.to_string()))?;
        res.verdict(format!("criterion_{:02}", r.id), r.passed);
        t.push(vec![
            r.id.to_string(),
            r.name.clone(),
            r.passed.to_string(),
            r.detail.clone(),
        ]);
        rows.push(json!({"id": r.id, "name": r.name, "passed": r.passed, "detail": r.detail}));
    }
    res.datum("criteria", rows);
    res.tables.insert("criteria".into(), t);
    Ok(())
}
