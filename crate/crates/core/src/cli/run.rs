use std::path::PathBuf;

use serde::Serialize;
use serde_json::{json, Value};

use super::config::{name, Command, Format, RunConfig};
use crate::carleson::{consistency_report_with, DiscreteMeasure};
use crate::error::{Error, Result};
use crate::geometry::{inner, mobius, norm_sq, rho, Point, Region};
use crate::kernels::{besov_norm, besov_tilt, default_order};
use crate::sampling::{sample_ball, sandwich_constants, RegionSampler, SamplerConfig};
use crate::weights::class_certify;

/// Example measure shipped with the toolkit: 8 atoms of mass 1/8 on `|z| = 7/8`.
pub const BUNDLED_MEASURE: &str = include_str!("../../data/example_measure.csv");

pub const TOOL: &str = "besov";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A number known in closed form.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Exact {
    pub value: f64,
    pub exact: bool,
}

pub fn exact(value: f64) -> Exact {
    Exact { value, exact: true }
}

#[derive(Clone, Debug, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub timestamp_unix: u64,
}

/// Report document; everything that may vary between identical runs lives in `header`.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub header: Header,
    pub body: Value,
}

impl Report {
    pub fn body_json(&self) -> String {
        serde_json::to_string_pretty(&self.body).expect("report bodies serialize")
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => Ok(serde_json::to_string_pretty(self).expect("reports serialize") + "\n"),
            Format::Csv => self.csv(),
        }
    }

    /// `field,value` rows for scalar fields; estimates and lists stay in the JSON form.
    fn csv(&self) -> Result<String> {
        let mut rows = vec![
            ("header.tool".to_string(), self.header.tool.to_string()),
            ("header.version".to_string(), self.header.version.to_string()),
            ("header.timestamp_unix".to_string(), self.header.timestamp_unix.to_string()),
        ];
        if let Some(c) = self.body.get("command") {
            rows.push(("command".into(), scalar(c).unwrap_or_default()));
        }
        if let Some(r) = self.body.get("result") {
            flatten("result", r, &mut rows);
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| Error::Config(format!("csv export failed: {e}"));
        w.write_record(["field", "value"]).map_err(err)?;
        for (k, v) in rows {
            w.write_record([k, v]).map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Config(format!("csv export failed: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Null => Some(String::new()),
        _ => None,
    }
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) if m.contains_key("stderr") || m.contains_key("exact") => {}
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&format!("{prefix}.{k}"), x, rows);
            }
        }
        Value::Array(_) => {}
        _ => rows.push((prefix.to_string(), scalar(v).unwrap_or_default())),
    }
}

#[derive(Serialize)]
struct Identities {
    samples: u64,
    mobius_involution: f64,
    mobius_norm_identity: f64,
    rho_symmetry: f64,
    rho_factorization: f64,
    tolerance: f64,
    within_tolerance: bool,
}

fn identities(n: usize, count: u64, seed: u64) -> Result<Identities> {
    let cfg = SamplerConfig::new(seed, 3 * count)?;
    let pts: Vec<Point> = sample_ball(n, &cfg)?.map(|(p, _)| p).collect();
    let mut out = Identities {
        samples: count,
        mobius_involution: 0.0,
        mobius_norm_identity: 0.0,
        rho_symmetry: 0.0,
        rho_factorization: 0.0,
        tolerance: 1e-10,
        within_tolerance: false,
    };
    for t in pts.chunks_exact(3) {
        let (a, z, w) = (&t[0], &t[1], &t[2]);
        let pz = mobius(a, z)?;
        let back = mobius(a, &pz)?;
        let d = back.coords().iter().zip(z.coords()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        out.mobius_involution = out.mobius_involution.max(d);
        let one = num_complex::Complex64::new(1.0, 0.0);
        let lhs = (1.0 - pz.norm_sq()) * (one - inner(z.coords(), a.coords())).norm_sqr();
        let rhs = (1.0 - a.norm_sq()) * (1.0 - z.norm_sq());
        out.mobius_norm_identity = out.mobius_norm_identity.max((lhs - rhs).abs());
        out.rho_symmetry = out.rho_symmetry.max((rho(z, w)? - rho(w, z)?).abs());
        let m = (one - inner(z.coords(), w.coords())).norm();
        let tt = ((1.0 - z.norm_sq()) * (1.0 - w.norm_sq())).sqrt() / m;
        let phi = mobius(z, w)?;
        out.rho_factorization = out.rho_factorization.max((rho(z, w)? * (1.0 + tt) - m * norm_sq(phi.coords())).abs());
    }
    out.within_tolerance = [out.mobius_involution, out.mobius_norm_identity, out.rho_symmetry, out.rho_factorization]
        .iter()
        .all(|r| *r <= out.tolerance);
    Ok(out)
}

fn geom_check(cfg: &RunConfig) -> Result<Value> {
    let n = cfg.n;
    let sampler = cfg.sampler()?;
    let ids = identities(n, cfg.geometry.identity_samples, cfg.seed)?;
    let mut volumes = Vec::new();
    for &r in &cfg.geometry.volume_radii {
        let region = Region::pseudo_ball(Point::origin(n), r)?;
        let est = RegionSampler::new(&region)?.sample(&sampler)?.volume()?;
        let closed = (2.0 * r - r * r).powi(n as i32);
        volumes.push(json!({
            "radius": r,
            "estimate": est,
            "closed_form": exact(closed),
            "relative_error": (est.value - closed).abs() / closed,
        }));
    }
    let mut sandwich = Vec::new();
    let (mut worst_c, mut lo, mut hi) = (0.0f64, f64::INFINITY, 0.0f64);
    for &norm in &cfg.geometry.sandwich_norms {
        for &r in &cfg.geometry.sandwich_radii {
            let s = sandwich_constants(&Point::on_axis(n, norm), r, &sampler)?;
            worst_c = worst_c.max(s.outer).max(s.inner);
            lo = lo.min(s.volume_ratio.value);
            hi = hi.max(s.volume_ratio.value);
            sandwich.push(json!({ "center_norm": norm, "radius": r, "constants": s }));
        }
    }
    Ok(json!({
        "identities": ids,
        "volumes": volumes,
        "sandwich": sandwich,
        "sandwich_max_constant": worst_c,
        "volume_ratio_min": lo,
        "volume_ratio_max": hi,
    }))
}

fn weight_certify(cfg: &RunConfig) -> Result<Value> {
    let p = cfg.p.expect("validated");
    let report = class_certify(&cfg.weight, p, &cfg.family, &cfg.sampler()?.with_samples(cfg.certify_samples))?;
    Ok(serde_json::to_value(report).expect("class reports serialize"))
}

fn besov(cfg: &RunConfig) -> Result<Value> {
    let (p, s) = (cfg.p.expect("validated"), cfg.s.expect("validated"));
    let k = cfg.k.unwrap_or_else(|| default_order(s));
    let est = besov_norm(&cfg.function, cfg.n, s, p, Some(k), &cfg.weight, &cfg.sampler()?)?;
    Ok(json!({ "k": k, "tilt": besov_tilt(s, p, k, &cfg.weight), "norm": est }))
}

fn load_measure(cfg: &RunConfig) -> Result<(DiscreteMeasure, String)> {
    let (mu, source) = match &cfg.measure {
        Some(path) => {
            let resolved: PathBuf = match &cfg.base_dir {
                Some(base) if path.is_relative() => base.join(path),
                _ => path.clone(),
            };
            (DiscreteMeasure::from_csv(&resolved)?, path.display().to_string())
        }
        None => (DiscreteMeasure::from_reader(BUNDLED_MEASURE.as_bytes())?, "bundled:example_measure".to_string()),
    };
    if mu.dim() != cfg.n {
        return Err(Error::Config(format!("measure has n = {}, config has n = {}", mu.dim(), cfg.n)));
    }
    Ok((mu, source))
}

fn carleson(cfg: &RunConfig, mu: &DiscreteMeasure, source: &str) -> Result<Value> {
    let (p, s) = (cfg.p.expect("validated"), cfg.s.expect("validated"));
    let sampler = cfg.sampler()?;
    let class = class_certify(&cfg.weight, p, &cfg.family, &sampler.with_samples(cfg.certify_samples))?;
    let report = consistency_report_with(mu, &cfg.weight, s, p, class, &cfg.tests, &sampler)?;
    Ok(json!({
        "measure": { "source": source, "atoms": mu.len(), "total_mass": mu.total_mass() },
        "report": report,
    }))
}

/// Runs the pipeline selected by `cfg.command`.
pub fn execute(cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    // input errors surface before any computation
    let measure = if cfg.needs(Command::CarlesonTest) { Some(load_measure(cfg)?) } else { None };
    let result = match cfg.command {
        Command::GeomCheck => geom_check(cfg)?,
        Command::WeightCertify => weight_certify(cfg)?,
        Command::BesovNorm => besov(cfg)?,
        Command::CarlesonTest => {
            let (mu, src) = measure.as_ref().expect("loaded");
            carleson(cfg, mu, src)?
        }
        Command::FullSuite => {
            let (mu, src) = measure.as_ref().expect("loaded");
            json!({
                "geom_check": geom_check(cfg)?,
                "weight_certify": weight_certify(cfg)?,
                "besov_norm": besov(cfg)?,
                "carleson_test": carleson(cfg, mu, src)?,
            })
        }
    };
    let body = json!({
        "command": name(cfg.command),
        "config": cfg,
        "result": result,
    });
    let timestamp_unix = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    Ok(Report { header: Header { tool: TOOL, version: VERSION, timestamp_unix }, body })
}
