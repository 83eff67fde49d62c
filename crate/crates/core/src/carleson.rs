//! Carleson-measure testing for weighted Besov spaces on finite atomic measures.
//!
//! Every constant produced here is a lower bound on an embedding constant,
//! obtained by maximising a ratio over a finite test family.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{inner, Point, Region, SpherePoint};
use crate::kernels::{besov_norm, bounded_kernel_regime, TestFunction, MIXTURE_LAMBDA};
use crate::sampling::{splitmix, Estimate, Proposal, RegionSampler, SampleSet, SamplerConfig};
use crate::weights::{class_certify, ClassReport, FamilySpec, Verdict, Weight};

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub point: Point,
    pub mass: f64,
}

/// Finite positive measure `sum mass_j delta_{z_j}` with atoms in the open ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    n: usize,
    atoms: Vec<Atom>,
}

impl DiscreteMeasure {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("dimension must be at least 1".into()));
        }
        Ok(DiscreteMeasure { n, atoms: Vec::new() })
    }

    pub fn push(&mut self, point: Point, mass: f64) -> Result<()> {
        check_dim(self.n, point.dim())?;
        if point.norm_sq() >= 1.0 {
            return Err(Error::Measure("atoms must lie strictly inside the ball".into()));
        }
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::Measure(format!("atom masses must be positive and finite, got {mass}")));
        }
        self.atoms.push(Atom { point, mass });
        Ok(())
    }

    /// `2^j` equal atoms of total mass 1 on the circle `|z_1| = 1 - 2^{-j}`, other coordinates 0.
    pub fn boundary_circle(n: usize, j: u32) -> Result<Self> {
        let mut mu = DiscreteMeasure::new(n)?;
        let count = 1u64 << j;
        let r = 1.0 - (-(j as f64)).exp2();
        for k in 0..count {
            let th = std::f64::consts::TAU * k as f64 / count as f64;
            let mut c = vec![Complex64::new(0.0, 0.0); n];
            c[0] = Complex64::from_polar(r, th);
            mu.push(Point::new(c)?, 1.0 / count as f64)?;
        }
        Ok(mu)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        let mut mu = DiscreteMeasure::new(self.n)?;
        for a in &self.atoms {
            mu.push(a.point.clone(), a.mass * c)?;
        }
        Ok(mu)
    }

    /// `(sum mass |f(atom)|^p)^{1/p}`, exact.
    pub fn lp_norm<F: Fn(&[Complex64]) -> Complex64>(&self, f: F, p: f64) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.mass * f(a.point.coords()).norm().powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    }

    /// `mu(T(eta, R))` with strict tent membership.
    pub fn tent_mass(&self, vertex: &SpherePoint, radius: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| (ONE - inner(a.point.coords(), vertex.coords())).norm() < radius)
            .map(|a| a.mass)
            .sum()
    }

    pub fn header(n: usize) -> Vec<String> {
        let mut h: Vec<String> = (1..=n).flat_map(|i| [format!("re_z{i}"), format!("im_z{i}")]).collect();
        h.push("mass".into());
        h
    }

    /// Reads `re_z1,im_z1,...,re_zn,im_zn,mass`; `n` comes from the header.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let parse_err = |line: u64, column: usize, message: String| Error::Parse { line: line as usize, column, message };
        let header = rdr.headers().map_err(|e| parse_err(1, 1, e.to_string()))?.clone();
        if header.len() < 3 || header.len() % 2 == 0 {
            return Err(parse_err(1, 1, format!("expected 2n + 1 columns, found {}", header.len())));
        }
        let n = (header.len() - 1) / 2;
        for (i, (got, want)) in header.iter().zip(Self::header(n)).enumerate() {
            if got != want {
                return Err(parse_err(1, i + 1, format!("expected column `{want}`, found `{got}`")));
            }
        }
        let mut mu = DiscreteMeasure::new(n)?;
        for rec in rdr.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                parse_err(line, 1, e.to_string())
            })?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            let vals: Vec<f64> = rec
                .iter()
                .enumerate()
                .map(|(i, f)| f.parse::<f64>().map_err(|e| parse_err(line, i + 1, format!("`{f}`: {e}"))))
                .collect::<Result<_>>()?;
            let point = Point::from_re_im(&vals[..2 * n]).map_err(|e| parse_err(line, 1, e.to_string()))?;
            mu.push(point, vals[2 * n]).map_err(|e| parse_err(line, 2 * n + 1, e.to_string()))?;
        }
        Ok(mu)
    }

    pub fn from_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        Self::from_reader(file)
    }

    pub fn to_writer<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Measure(e.to_string());
        w.write_record(Self::header(self.n)).map_err(io)?;
        for a in &self.atoms {
            let mut row: Vec<String> = a.point.coords().iter().flat_map(|c| [c.re.to_string(), c.im.to_string()]).collect();
            row.push(a.mass.to_string());
            w.write_record(row).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Measure(e.to_string()))
    }
}

/// Boundary centres times dyadic radii.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TentFamily {
    pub centers: Vec<SpherePoint>,
    pub radii: Vec<f64>,
}

impl TentFamily {
    /// Centres above every atom plus `e_1`; radii `2^{-k}` from 1 down to
    /// a quarter of the smallest atom depth.
    pub fn for_measure(mu: &DiscreteMeasure) -> Self {
        let n = mu.dim();
        let mut centers = vec![SpherePoint::normalized(Point::on_axis(n, 1.0).into_coords()).expect("unit vector")];
        for a in mu.atoms() {
            if a.point.norm() > 0.0 {
                let c = SpherePoint::normalized(a.point.coords().to_vec()).expect("nonzero");
                if !centers.contains(&c) {
                    centers.push(c);
                }
            }
        }
        let min_depth = mu.atoms().iter().map(|a| 1.0 - a.point.norm()).fold(1.0, f64::min).max(1e-12);
        let kmax = ((1.0 / min_depth).log2().ceil() as u32 + 2).min(48);
        TentFamily { centers, radii: (0..=kmax).map(|k| (-(k as f64)).exp2()).collect() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TentTest {
    pub exponent: f64,
    pub constant: f64,
    /// Tent attaining the supremum (first in family order on ties).
    pub center: SpherePoint,
    pub radius: f64,
    pub mass: f64,
}

/// `sup mu(T(eta, R)) / R^exponent` over the family, exact.
pub fn tent_test(mu: &DiscreteMeasure, exponent: f64, family: &TentFamily) -> Result<TentTest> {
    if !(exponent > 0.0) || !exponent.is_finite() {
        return Err(Error::Parameter(format!("tent exponent must be positive, got {exponent}")));
    }
    if family.centers.is_empty() || family.radii.is_empty() {
        return Err(Error::Parameter("tent family is empty".into()));
    }
    for c in &family.centers {
        check_dim(mu.dim(), c.dim())?;
    }
    if family.radii.iter().any(|r| !(*r > 0.0 && *r <= 2.0)) {
        return Err(Error::Parameter("tent radii must lie in (0, 2]".into()));
    }
    let per_center: Vec<(f64, f64, f64)> = family
        .centers
        .par_iter()
        .map(|c| {
            let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
            for &r in &family.radii {
                let m = mu.tent_mass(c, r);
                let v = m / r.powf(exponent);
                if v > best.0 {
                    best = (v, r, m);
                }
            }
            best
        })
        .collect();
    let mut best = (f64::NEG_INFINITY, 0usize, 0.0, 0.0);
    for (i, (v, r, m)) in per_center.into_iter().enumerate() {
        if v > best.0 {
            best = (v, i, r, m);
        }
    }
    Ok(TentTest {
        exponent,
        constant: best.0,
        center: family.centers[best.1].clone(),
        radius: best.2,
        mass: best.3,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// `||f||_{L^p(mu)} / ||f||_{B_s^p(w)}` over holomorphic test functions.
    I,
    /// Holomorphic potential of order `s + 1/p` over `L^p(w dv)`.
    Ii,
    /// Modulus potential of order `s + 1/p` over `L^p(w dv)`.
    Iii,
}

/// Test-family parameters for the embedding estimates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestFamilySpec {
    /// Number of representative atoms, spread evenly through the atom list.
    #[serde(default = "default_clusters")]
    pub clusters: usize,
    /// Tent radii are these multiples of the atom depth `1 - |a|`; ball radii half of them.
    #[serde(default = "default_apertures")]
    pub apertures: Vec<f64>,
    #[serde(default = "default_true")]
    pub include_constant: bool,
    #[serde(default = "default_true")]
    pub include_kernels: bool,
}

fn default_clusters() -> usize {
    4
}
fn default_apertures() -> Vec<f64> {
    vec![2.0, 8.0, 32.0]
}
fn default_true() -> bool {
    true
}

impl Default for TestFamilySpec {
    fn default() -> Self {
        TestFamilySpec {
            clusters: default_clusters(),
            apertures: default_apertures(),
            include_constant: true,
            include_kernels: true,
        }
    }
}

/// Concrete test functions: nonnegative ones for modes ii/iii, holomorphic ones for mode i.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestFamily {
    pub positive: Vec<TestFunction>,
    pub holomorphic: Vec<TestFunction>,
}

impl TestFamily {
    pub fn build(mu: &DiscreteMeasure, p: f64, spec: &TestFamilySpec, extra_tents: &[(SpherePoint, f64)]) -> Result<Self> {
        let n = mu.dim();
        let mut positive = Vec::new();
        let mut holomorphic = Vec::new();
        if spec.include_constant {
            positive.push(TestFunction::Constant { c: 1.0 });
            holomorphic.push(TestFunction::Constant { c: 1.0 });
        }
        let b = 2.0 * (n as f64 + 1.0) / p;
        let atoms = mu.atoms();
        let k = spec.clusters.min(atoms.len());
        for i in 0..k {
            let a = &atoms[i * atoms.len() / k].point;
            let r = a.norm();
            if r == 0.0 {
                continue;
            }
            let depth = 1.0 - r;
            let dir = SpherePoint::normalized(a.coords().to_vec())?;
            for &ap in &spec.apertures {
                let rt = (ap * depth).min(2.0);
                positive.push(TestFunction::Indicator { region: Region::tent(dir.clone(), rt)? });
                let rb = (0.5 * ap * depth).min(2.0);
                positive.push(TestFunction::Indicator { region: Region::pseudo_ball(a.clone(), rb)? });
            }
            if spec.include_kernels {
                let pole = dir.as_point().scaled(1.0 - 0.5 * depth);
                positive.push(TestFunction::KernelModulus { pole: pole.coords().to_vec(), b, a: 0.0 });
                holomorphic.push(TestFunction::kernel(&pole, b, 0.0)?);
            }
        }
        for (c, r) in extra_tents {
            let f = TestFunction::Indicator { region: Region::tent(c.clone(), *r)? };
            if !positive.contains(&f) {
                positive.push(f);
            }
        }
        Ok(TestFamily { positive, holomorphic })
    }
}

/// Lower bound on an embedding constant and the test function attaining it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmbedEstimate {
    pub mode: Mode,
    pub estimate: Estimate,
    /// Index into the relevant family, `None` when the measure is empty.
    pub argmax: Option<usize>,
    pub ratios: Vec<Estimate>,
}

impl EmbedEstimate {
    fn from_ratios(mode: Mode, ratios: Vec<Estimate>, seed: u64) -> Self {
        let mut best: Option<usize> = None;
        for (i, r) in ratios.iter().enumerate() {
            if best.is_none_or(|b| r.value > ratios[b].value) {
                best = Some(i);
            }
        }
        let estimate = match best {
            Some(i) => ratios[i],
            None => Estimate { value: 0.0, stderr: 0.0, samples: 0, seed },
        };
        EmbedEstimate { mode, estimate, argmax: best, ratios }
    }
}

/// Weighted point cloud: `int g dv ~ (1/total) sum weight_i g(y_i)`.
struct Cloud {
    n: usize,
    coords: Vec<Complex64>,
    weights: Vec<f64>,
    total: u64,
}

impl Cloud {
    fn point(&self, i: usize) -> &[Complex64] {
        &self.coords[i * self.n..(i + 1) * self.n]
    }

    fn draw(f: &TestFunction, n: usize, cfg: &SamplerConfig) -> Result<Self> {
        match f {
            TestFunction::Indicator { region } => {
                let sampler = RegionSampler::new(region)?;
                let s = sampler.sample(cfg)?;
                let m = s.enclosing_measure();
                let coords: Vec<Complex64> = s.points().flat_map(|p| p.iter().copied()).collect();
                let weights = vec![m; s.accepted()];
                Ok(Cloud { n, coords, weights, total: s.attempts() })
            }
            _ => {
                let proposal = match f.focus() {
                    Some(pole) => Proposal::mixture(pole, MIXTURE_LAMBDA, 0.0)?,
                    None => Proposal::uniform(),
                };
                let set = SampleSet::draw(n, &proposal, cfg.seed, cfg.samples)?;
                let coords = (0..set.len()).flat_map(|i| set.point(i).iter().copied()).collect();
                let weights = (0..set.len()).map(|i| set.weight(i)).collect();
                Ok(Cloud { n, coords, weights, total: set.len() as u64 })
            }
        }
    }
}

/// Kernel value `(1 - <z, y>)^{-beta}` and its modulus.
#[inline]
fn both_kernels(z: &[Complex64], y: &[Complex64], beta: f64) -> (Complex64, f64) {
    let w = ONE - inner(z, y);
    let l = w.ln();
    let modulus = (-beta * l.re).exp();
    (Complex64::from_polar(modulus, -beta * l.im), modulus)
}

/// Ratios for modes ii and iii of one nonnegative test function, on shared samples.
///
/// Standard errors come from the delta method applied to the joint
/// per-sample influence of numerator and denominator.
fn potential_ratio(
    mu: &DiscreteMeasure,
    w: &Weight,
    f: &TestFunction,
    beta: f64,
    p: f64,
    cfg: &SamplerConfig,
) -> Result<(Estimate, Estimate, Cloud, f64)> {
    let n = mu.dim();
    let cloud = Cloud::draw(f, n, cfg)?;
    let total = cloud.total as f64;
    let len = cloud.weights.len();
    let fw: Vec<f64> = (0..len).map(|i| cloud.weights[i] * f.eval(cloud.point(i)).re).collect();
    let dens: Vec<f64> = (0..len)
        .map(|i| {
            let y = cloud.point(i);
            cloud.weights[i] * f.eval(y).norm().powf(p) * w.value(y)
        })
        .collect();
    let integral = dens.iter().sum::<f64>() / total;
    let pots: Vec<(Complex64, f64)> = mu
        .atoms()
        .par_iter()
        .map(|a| {
            let z = a.point.coords();
            let mut h = Complex64::new(0.0, 0.0);
            let mut m = 0.0;
            for (i, c) in fw.iter().enumerate() {
                let (k, km) = both_kernels(z, cloud.point(i), beta);
                h += k * c;
                m += km * c;
            }
            (h / total, m / total)
        })
        .collect();
    let num_ii = mu.atoms().iter().zip(&pots).map(|(a, (h, _))| a.mass * h.norm().powf(p)).sum::<f64>().powf(1.0 / p);
    let num_iii = mu.atoms().iter().zip(&pots).map(|(a, (_, m))| a.mass * m.powf(p)).sum::<f64>().powf(1.0 / p);
    let den = integral.max(0.0).powf(1.0 / p);
    let seed = cfg.seed;
    if !(den > 0.0) {
        return Err(Error::Parameter("test function has zero L^p(w) norm".into()));
    }
    // influence coefficients d num / d pot_a
    let coef = |num: f64, modulus: f64, mass: f64| {
        if num > 0.0 && modulus > 0.0 {
            num.powf(1.0 - p) * mass * modulus.powf(p - 1.0)
        } else {
            0.0
        }
    };
    let c_ii: Vec<(f64, Complex64)> = mu
        .atoms()
        .iter()
        .zip(&pots)
        .map(|(a, (h, _))| {
            let u = if h.norm() > 0.0 { h.conj() / h.norm() } else { Complex64::new(0.0, 0.0) };
            (coef(num_ii, h.norm(), a.mass), u)
        })
        .collect();
    let c_iii: Vec<f64> = mu.atoms().iter().zip(&pots).map(|(a, (_, m))| coef(num_iii, *m, a.mass)).collect();
    let dden = if integral > 0.0 { integral.powf(1.0 / p - 1.0) / p } else { 0.0 };
    let infl: Vec<(f64, f64)> = (0..len)
        .into_par_iter()
        .map(|i| {
            let y = cloud.point(i);
            let (mut a2, mut a3) = (0.0, 0.0);
            for (j, atom) in mu.atoms().iter().enumerate() {
                let (k, km) = both_kernels(atom.point.coords(), y, beta);
                a2 += c_ii[j].0 * (c_ii[j].1 * k * fw[i]).re;
                a3 += c_iii[j] * km * fw[i];
            }
            let d = dden * dens[i];
            (a2 / den - num_ii * d / (den * den), a3 / den - num_iii * d / (den * den))
        })
        .collect();
    let se = |pick: fn(&(f64, f64)) -> f64| {
        let s1: f64 = infl.iter().map(pick).sum();
        let s2: f64 = infl.iter().map(|v| pick(v).powi(2)).sum();
        let mean = s1 / total;
        let var = (s2 / total - mean * mean).max(0.0) * total / (total - 1.0).max(1.0);
        (var / total).sqrt()
    };
    let ii = Estimate { value: num_ii / den, stderr: se(|v| v.0), samples: cloud.total, seed };
    let iii = Estimate { value: num_iii / den, stderr: se(|v| v.1), samples: cloud.total, seed };
    Ok((ii, iii, cloud, integral))
}

fn check_embed(mu: &DiscreteMeasure, w: &Weight, s: f64, p: f64, cfg: &SamplerConfig) -> Result<()> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::Parameter("p > 1 required".into()));
    }
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Parameter(format!("s must be positive, got {s}")));
    }
    w.validate()?;
    cfg.validate()?;
    if mu.dim() == 0 {
        return Err(Error::Parameter("dimension must be at least 1".into()));
    }
    Ok(())
}

fn member_seed(seed: u64, i: usize) -> u64 {
    splitmix(seed ^ splitmix(0xca71_e500 + i as u64))
}

struct PotentialRun {
    ii: Vec<Estimate>,
    iii: Vec<Estimate>,
    volumes: Vec<Option<f64>>,
    /// `int |f|^p w dv` per test function.
    weighted: Vec<f64>,
}

fn potential_run(
    mu: &DiscreteMeasure,
    w: &Weight,
    s: f64,
    p: f64,
    family: &[TestFunction],
    cfg: &SamplerConfig,
) -> Result<PotentialRun> {
    let beta = mu.dim() as f64 + 1.0 - (s + 1.0 / p);
    let mut run = PotentialRun { ii: Vec::new(), iii: Vec::new(), volumes: Vec::new(), weighted: Vec::new() };
    for (i, f) in family.iter().enumerate() {
        f.validate(mu.dim())?;
        if !matches!(f, TestFunction::Indicator { .. } | TestFunction::KernelModulus { .. })
            && !matches!(f, TestFunction::Constant { c } if *c >= 0.0)
        {
            return Err(Error::Parameter("potential modes need nonnegative test functions".into()));
        }
        let c = cfg.with_seed(member_seed(cfg.seed, i));
        let (ii, iii, cloud, weighted) = potential_ratio(mu, w, f, beta, p, &c)?;
        run.weighted.push(weighted);
        run.ii.push(ii);
        run.iii.push(iii);
        run.volumes.push(match f {
            TestFunction::Indicator { .. } => Some(cloud.weights.iter().sum::<f64>() / cloud.total as f64),
            _ => None,
        });
    }
    Ok(run)
}

fn besov_run(mu: &DiscreteMeasure, w: &Weight, s: f64, p: f64, family: &[TestFunction], cfg: &SamplerConfig) -> Result<Vec<Estimate>> {
    family
        .iter()
        .enumerate()
        .map(|(i, f)| {
            if !f.is_holomorphic() {
                return Err(Error::Parameter("mode i needs holomorphic test functions".into()));
            }
            let c = cfg.with_seed(member_seed(cfg.seed, i));
            let num = mu.lp_norm(|z| f.eval(z), p);
            let den = besov_norm(f, mu.dim(), s, p, None, w, &c)?;
            if !(den.value > 0.0) {
                return Err(Error::Parameter("test function has zero Besov norm".into()));
            }
            let value = num / den.value;
            Ok(Estimate { value, stderr: value * den.stderr / den.value, samples: den.samples, seed: c.seed })
        })
        .collect()
}

/// Lower bound on the best constant of the embedding in the given mode.
pub fn embed_estimate(
    mu: &DiscreteMeasure,
    w: &Weight,
    s: f64,
    p: f64,
    mode: Mode,
    family: &TestFamily,
    cfg: &SamplerConfig,
) -> Result<EmbedEstimate> {
    check_embed(mu, w, s, p, cfg)?;
    if mu.is_empty() {
        return Ok(EmbedEstimate::from_ratios(mode, Vec::new(), cfg.seed));
    }
    let ratios = match mode {
        Mode::I => besov_run(mu, w, s, p, &family.holomorphic, cfg)?,
        Mode::Ii => potential_run(mu, w, s, p, &family.positive, cfg)?.ii,
        Mode::Iii => potential_run(mu, w, s, p, &family.positive, cfg)?.iii,
    };
    Ok(EmbedEstimate::from_ratios(mode, ratios, cfg.seed))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConsistencyOptions {
    #[serde(default)]
    pub tests: TestFamilySpec,
    /// Family for the class certification; `None` means the default for `n`.
    #[serde(default)]
    pub class_family: Option<FamilySpec>,
    /// Samples per region in the class certification.
    #[serde(default = "default_certify_samples")]
    pub certify_samples: u64,
}

fn default_certify_samples() -> u64 {
    20_000
}

impl Default for ConsistencyOptions {
    fn default() -> Self {
        ConsistencyOptions { tests: TestFamilySpec::default(), class_family: None, certify_samples: default_certify_samples() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypothesisFlags {
    pub ap_verdict: Verdict,
    pub bp_verdict: Verdict,
    /// Fitted doubling exponent of boundary-touching balls.
    pub tau_fit: f64,
    /// `tau_fit - 1`, the `tau` of the doubling order `tau + 1`.
    pub tau: f64,
    pub tau_minus_sp: f64,
    /// `0 <= tau - sp < 1`.
    pub tau_minus_sp_in_range: bool,
    /// `tau < 1 + sp`.
    pub tau_below_one_plus_sp: bool,
    /// Kernel exponent `n + 1 - (s + 1/p)` is nonpositive.
    pub bounded_kernel_regime: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExponentSource {
    PowerWeight,
    TauFit,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TentSummary {
    pub source: ExponentSource,
    pub exponent: f64,
    /// `None` when the exponent is not positive.
    pub test: Option<TentTest>,
}

/// Tent constant against the mode-iii ratio of the extremal tent's indicator.
///
/// For atoms in `T = T(eta, R)` the modulus potential of `1_T` is at least
/// `v(T) (4R)^{-beta}`, so `mu(T) <= ratio^p w(T) (4R)^{p beta} / v(T)^p`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Necessity {
    pub factor: f64,
    pub tent_ratio: Estimate,
    /// `tent constant <= factor * (kernel_iii + 3 stderr)^p`.
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct EmbeddingReport {
    pub n: usize,
    pub s: f64,
    pub p: f64,
    pub weight: Weight,
    pub atoms: usize,
    pub total_mass: f64,
    pub tent: TentSummary,
    pub kernel_iii_lowerbound: EmbedEstimate,
    pub kernel_ii_lowerbound: EmbedEstimate,
    pub besov_i_lowerbound: EmbedEstimate,
    pub iii_over_ii: Option<Estimate>,
    pub iii_over_i: Option<Estimate>,
    /// `kernel_ii <= kernel_iii + 3 stderr`.
    pub mode_domination: bool,
    pub necessity: Option<Necessity>,
    pub flags: HypothesisFlags,
    pub class: ClassReport,
}

fn ratio(a: &Estimate, b: &Estimate) -> Option<Estimate> {
    if !(b.value > 0.0) || !(a.value > 0.0) {
        return None;
    }
    let v = a.value / b.value;
    let rel = ((a.stderr / a.value).powi(2) + (b.stderr / b.value).powi(2)).sqrt();
    Some(Estimate { value: v, stderr: v * rel, samples: a.samples.min(b.samples), seed: a.seed })
}

/// Runs class certification, the tent test and all three embedding modes.
pub fn consistency_report(
    mu: &DiscreteMeasure,
    w: &Weight,
    s: f64,
    p: f64,
    opts: &ConsistencyOptions,
    cfg: &SamplerConfig,
) -> Result<EmbeddingReport> {
    check_embed(mu, w, s, p, cfg)?;
    let n = mu.dim();
    let spec = opts.class_family.clone().unwrap_or_else(|| FamilySpec::new(n));
    check_dim(n, spec.n)?;
    let class = class_certify(w, p, &spec, &cfg.with_samples(opts.certify_samples))?;
    consistency_report_with(mu, w, s, p, class, &opts.tests, cfg)
}

/// As [`consistency_report`], reusing a class certification of `w`.
pub fn consistency_report_with(
    mu: &DiscreteMeasure,
    w: &Weight,
    s: f64,
    p: f64,
    class: ClassReport,
    tests: &TestFamilySpec,
    cfg: &SamplerConfig,
) -> Result<EmbeddingReport> {
    check_embed(mu, w, s, p, cfg)?;
    let n = mu.dim();
    let t = s + 1.0 / p;
    let beta = n as f64 + 1.0 - t;
    let tau = class.tau_fit.value - 1.0;
    let flags = HypothesisFlags {
        ap_verdict: class.ap_verdict,
        bp_verdict: class.bp_verdict,
        tau_fit: class.tau_fit.value,
        tau,
        tau_minus_sp: tau - s * p,
        tau_minus_sp_in_range: (0.0..1.0).contains(&(tau - s * p)),
        tau_below_one_plus_sp: tau < 1.0 + s * p,
        bounded_kernel_regime: bounded_kernel_regime(n, t),
    };
    let (source, exponent) = match w.power_exponent() {
        Some(alpha) if matches!(w, Weight::Power { .. } | Weight::Constant { .. }) => {
            (ExponentSource::PowerWeight, n as f64 + alpha - s * p)
        }
        _ => (ExponentSource::TauFit, tau - s * p),
    };
    let test = if exponent > 0.0 && !mu.is_empty() {
        Some(tent_test(mu, exponent, &TentFamily::for_measure(mu))?)
    } else {
        None
    };
    let extra: Vec<(SpherePoint, f64)> = test
        .iter()
        .filter(|t| t.mass > 0.0)
        .map(|t| (t.center.clone(), t.radius))
        .collect();
    let family = TestFamily::build(mu, p, tests, &extra)?;
    let empty = |m| EmbedEstimate::from_ratios(m, Vec::new(), cfg.seed);
    let (ii, iii, i, necessity) = if mu.is_empty() {
        (empty(Mode::Ii), empty(Mode::Iii), empty(Mode::I), None)
    } else {
        let run = potential_run(mu, w, s, p, &family.positive, cfg)?;
        let ii = EmbedEstimate::from_ratios(Mode::Ii, run.ii.clone(), cfg.seed);
        let iii = EmbedEstimate::from_ratios(Mode::Iii, run.iii.clone(), cfg.seed);
        let i = EmbedEstimate::from_ratios(Mode::I, besov_run(mu, w, s, p, &family.holomorphic, cfg)?, cfg.seed);
        let nec = necessity_check(test.as_ref(), &family, &run, p, beta, &iii)?;
        (ii, iii, i, nec)
    };
    let combined = ii.estimate.stderr.hypot(iii.estimate.stderr);
    Ok(EmbeddingReport {
        n,
        s,
        p,
        weight: w.clone(),
        atoms: mu.len(),
        total_mass: mu.total_mass(),
        tent: TentSummary { source, exponent, test },
        mode_domination: ii.estimate.value <= iii.estimate.value + 3.0 * combined,
        iii_over_ii: ratio(&iii.estimate, &ii.estimate),
        iii_over_i: ratio(&iii.estimate, &i.estimate),
        kernel_iii_lowerbound: iii,
        kernel_ii_lowerbound: ii,
        besov_i_lowerbound: i,
        necessity,
        flags,
        class,
    })
}

fn necessity_check(
    test: Option<&TentTest>,
    family: &TestFamily,
    run: &PotentialRun,
    p: f64,
    beta: f64,
    iii: &EmbedEstimate,
) -> Result<Option<Necessity>> {
    let Some(t) = test.filter(|t| t.mass > 0.0) else { return Ok(None) };
    if beta <= 0.0 {
        return Ok(None);
    }
    let target = TestFunction::Indicator { region: Region::tent(t.center.clone(), t.radius)? };
    let Some(idx) = family.positive.iter().position(|f| *f == target) else { return Ok(None) };
    let volume = run.volumes[idx].unwrap_or(0.0);
    if !(volume > 0.0) {
        return Ok(None);
    }
    let r = t.radius;
    let factor = run.weighted[idx] * (4.0 * r).powf(p * beta) / (volume.powf(p) * r.powf(t.exponent));
    let k = iii.estimate.value + 3.0 * iii.estimate.stderr;
    Ok(Some(Necessity { factor, tent_ratio: run.iii[idx], holds: t.constant <= factor * k.powf(p) }))
}
