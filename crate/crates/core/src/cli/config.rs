use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::carleson::TestFamilySpec;
use crate::error::{Error, Result};
use crate::kernels::{default_order, TestFunction};
use crate::sampling::SamplerConfig;
use crate::weights::{FamilySpec, Weight};

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_SAMPLES: u64 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    GeomCheck,
    WeightCertify,
    BesovNorm,
    CarlesonTest,
    FullSuite,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Named parameter sets; explicit config fields take precedence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    /// `n = 1`, `p = 2`, `s = 1/2`, `w = (1 - |z|)^{1/2}`.
    #[serde(rename = "power-half-n1")]
    PowerHalfN1,
}

/// Options for the geometry checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeomSpec {
    #[serde(default = "default_identity_samples")]
    pub identity_samples: u64,
    #[serde(default = "default_volume_radii")]
    pub volume_radii: Vec<f64>,
    #[serde(default = "default_sandwich_norms")]
    pub sandwich_norms: Vec<f64>,
    #[serde(default = "default_sandwich_radii")]
    pub sandwich_radii: Vec<f64>,
}

fn default_identity_samples() -> u64 {
    10_000
}
fn default_volume_radii() -> Vec<f64> {
    vec![0.1, 0.5]
}
fn default_sandwich_norms() -> Vec<f64> {
    vec![0.0, 0.5, 0.9]
}
fn default_sandwich_radii() -> Vec<f64> {
    vec![0.5, 0.1, 0.02]
}

impl Default for GeomSpec {
    fn default() -> Self {
        GeomSpec {
            identity_samples: default_identity_samples(),
            volume_radii: default_volume_radii(),
            sandwich_norms: default_sandwich_norms(),
            sandwich_radii: default_sandwich_radii(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    command: Option<Command>,
    preset: Option<Preset>,
    n: Option<usize>,
    p: Option<f64>,
    s: Option<f64>,
    k: Option<u32>,
    weight: Option<Weight>,
    function: Option<TestFunction>,
    measure: Option<PathBuf>,
    seed: Option<u64>,
    samples: Option<u64>,
    family: Option<FamilySpec>,
    tests: Option<TestFamilySpec>,
    certify_samples: Option<u64>,
    geometry: Option<GeomSpec>,
}

/// Fully validated run parameters. `out` and `format` are not echoed in reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub preset: Option<Preset>,
    pub n: usize,
    pub p: Option<f64>,
    pub s: Option<f64>,
    pub k: Option<u32>,
    pub weight: Weight,
    pub function: TestFunction,
    /// `None` selects the bundled example measure.
    pub measure: Option<PathBuf>,
    pub seed: u64,
    pub samples: u64,
    pub family: FamilySpec,
    pub tests: TestFamilySpec,
    pub certify_samples: u64,
    pub geometry: GeomSpec,
    /// Directory that relative measure paths are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub format: Format,
}

impl RunConfig {
    pub fn sampler(&self) -> Result<SamplerConfig> {
        SamplerConfig::new(self.seed, self.samples)
    }

    pub fn needs(&self, c: Command) -> bool {
        self.command == c || self.command == Command::FullSuite
    }

    /// Checks every precondition of the modules the command will run.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        if self.samples == 0 {
            return Err(Error::Config("samples must be positive".into()));
        }
        let needs_p = self.command != Command::GeomCheck;
        if needs_p {
            let p = self.p.ok_or_else(|| Error::Config("missing field `p`".into()))?;
            if !(p > 1.0) || !p.is_finite() {
                return Err(Error::Config("p > 1 required".into()));
            }
        }
        let needs_s = self.needs(Command::BesovNorm) || self.needs(Command::CarlesonTest);
        if needs_s {
            let s = self.s.ok_or_else(|| Error::Config("missing field `s`".into()))?;
            if !s.is_finite() {
                return Err(Error::Config("s must be finite".into()));
            }
            if self.needs(Command::CarlesonTest) && !(s > 0.0) {
                return Err(Error::Config("s > 0 required for Carleson tests".into()));
            }
            let k = self.k.unwrap_or_else(|| default_order(s));
            if (k as f64) <= s {
                return Err(Error::Config(format!("k > s required (k = {k}, s = {s})")));
            }
        }
        self.weight.validate()?;
        if self.needs(Command::WeightCertify) || self.needs(Command::CarlesonTest) {
            if self.family.n != self.n {
                return Err(Error::Config(format!("family.n = {} differs from n = {}", self.family.n, self.n)));
            }
            self.family.validate()?;
            if self.certify_samples == 0 {
                return Err(Error::Config("certify_samples must be positive".into()));
            }
        }
        if self.needs(Command::BesovNorm) {
            self.function.validate(self.n)?;
            if !self.function.is_holomorphic() {
                return Err(Error::Config("besov-norm needs a holomorphic function".into()));
            }
        }
        if self.needs(Command::CarlesonTest) && self.tests.clusters == 0 && !self.tests.include_constant {
            return Err(Error::Config("the embedding test family is empty".into()));
        }
        let g = &self.geometry;
        if self.needs(Command::GeomCheck) {
            if g.identity_samples == 0 {
                return Err(Error::Config("geometry.identity_samples must be positive".into()));
            }
            if g.volume_radii.iter().chain(&g.sandwich_radii).any(|r| !(*r > 0.0 && *r <= 2.0)) {
                return Err(Error::Config("radii must lie in (0, 2]".into()));
            }
            if g.sandwich_norms.iter().any(|r| !(*r >= 0.0 && *r < 1.0)) {
                return Err(Error::Config("sandwich centre norms must lie in [0, 1)".into()));
            }
        }
        Ok(())
    }
}

/// Parses and validates a JSON configuration. `command` fills in a missing
/// `command` field and must agree with it when both are given.
pub fn parse_config(text: &str, command: Option<Command>) -> Result<RunConfig> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let command = match (raw.command, command) {
        (Some(a), Some(b)) if a != b => {
            return Err(Error::Config(format!("config is for `{}`, not `{}`", name(a), name(b))));
        }
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => return Err(Error::Config("missing field `command`".into())),
    };
    let (pn, pp, ps, pw) = match raw.preset {
        Some(Preset::PowerHalfN1) => (Some(1), Some(2.0), Some(0.5), Some(Weight::power(0.5))),
        None => (None, None, None, None),
    };
    let n = raw.n.or(pn).unwrap_or(1);
    let cfg = RunConfig {
        command,
        preset: raw.preset,
        n,
        p: raw.p.or(pp),
        s: raw.s.or(ps),
        k: raw.k,
        weight: raw.weight.or(pw).unwrap_or(Weight::constant(1.0)),
        function: raw.function.unwrap_or(TestFunction::Constant { c: 1.0 }),
        measure: raw.measure,
        seed: raw.seed.unwrap_or(DEFAULT_SEED),
        samples: raw.samples.unwrap_or(DEFAULT_SAMPLES),
        family: raw.family.unwrap_or_else(|| FamilySpec::new(n)),
        tests: raw.tests.unwrap_or_default(),
        certify_samples: raw.certify_samples.unwrap_or(20_000),
        geometry: raw.geometry.unwrap_or_default(),
        base_dir: None,
        out: None,
        format: Format::Json,
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn name(c: Command) -> &'static str {
    match c {
        Command::GeomCheck => "geom-check",
        Command::WeightCertify => "weight-certify",
        Command::BesovNorm => "besov-norm",
        Command::CarlesonTest => "carleson-test",
        Command::FullSuite => "full-suite",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(r#"{"command":"geom-check"}"#, None).unwrap();
        assert_eq!(c.seed, 0);
        assert_eq!(c.samples, 100_000);
        assert_eq!(c.n, 1);
    }

    #[test]
    fn rejects_bad_parameters() {
        let e = parse_config(r#"{"p": 1}"#, Some(Command::WeightCertify)).unwrap_err();
        assert!(e.to_string().contains("p > 1 required"), "{e}");
        let e = parse_config(r#"{"p": 2, "s": 1.0, "k": 1}"#, Some(Command::BesovNorm)).unwrap_err();
        assert!(e.to_string().contains("k > s"), "{e}");
        let e = parse_config(r#"{"command":"geom-check","bogus":1}"#, None).unwrap_err();
        assert!(e.to_string().contains("bogus"), "{e}");
        let e = parse_config("{\n  \"command\": \"geom-check\",\n  \"n\": }", None).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e:?}");
        assert!(parse_config(r#"{"command":"geom-check"}"#, Some(Command::BesovNorm)).is_err());
    }

    #[test]
    fn preset_fills_missing_fields() {
        let c = parse_config(r#"{"preset":"power-half-n1","samples":10}"#, Some(Command::CarlesonTest)).unwrap();
        assert_eq!((c.n, c.p, c.s), (1, Some(2.0), Some(0.5)));
        assert_eq!(c.weight, Weight::power(0.5));
        let c = parse_config(r#"{"preset":"power-half-n1","s":0.25}"#, Some(Command::CarlesonTest)).unwrap();
        assert_eq!(c.s, Some(0.25));
    }
}
