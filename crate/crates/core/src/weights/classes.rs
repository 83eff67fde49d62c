//! Two-average brackets, tent masses, doubling exponents and class verdicts.
//!
//! Sup-type constants are estimated over finite families of regions, so a
//! report can refute membership at the tested scales or support it, never
//! more. The verdict vocabulary reflects that.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Weight;
use crate::error::{Error, Result};
use crate::geometry::{Point, Region, SpherePoint};
use crate::sampling::region::RegionSample;
use crate::sampling::{draw_sphere, par_chunks, splitmix, Estimate, RegionSampler, SamplerConfig, CHUNK};

/// Outcome of a grid-based class test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Supported,
    RefutedAtScale,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, Default)]
struct PairMoments {
    n: u64,
    mx: f64,
    my: f64,
    sxx: f64,
    syy: f64,
    sxy: f64,
}

impl PairMoments {
    fn push(&mut self, x: f64, y: f64) {
        self.n += 1;
        let k = self.n as f64;
        let dx = x - self.mx;
        let dy = y - self.my;
        self.mx += dx / k;
        self.my += dy / k;
        self.sxx += dx * (x - self.mx);
        self.syy += dy * (y - self.my);
        self.sxy += dx * (y - self.my);
    }

    fn merge(&mut self, o: &PairMoments) {
        if o.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *o;
            return;
        }
        let (na, nb) = (self.n as f64, o.n as f64);
        let n = na + nb;
        let dx = o.mx - self.mx;
        let dy = o.my - self.my;
        self.mx += dx * nb / n;
        self.my += dy * nb / n;
        self.sxx += o.sxx + dx * dx * na * nb / n;
        self.syy += o.syy + dy * dy * na * nb / n;
        self.sxy += o.sxy + dx * dy * na * nb / n;
        self.n += o.n;
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::Parameter("p > 1 required".into()));
    }
    Ok(())
}

/// Bracket `avg(w) * avg(w^{-1/(p-1)})^{p-1}` over accepted points, with a
/// delta-method standard error that accounts for the covariance of the two averages.
fn bracket_on(sample: &RegionSample, w: &Weight, p: f64) -> Result<Estimate> {
    sample.require_nonempty()?;
    let q = -1.0 / (p - 1.0);
    let k = sample.accepted() as u64;
    let parts = par_chunks(k, |c, count| {
        let start = (c * CHUNK) as usize;
        let mut m = PairMoments::default();
        for i in start..start + count {
            let v = w.value(sample.point(i));
            m.push(v, v.powf(q));
        }
        m
    });
    let mut m = PairMoments::default();
    parts.iter().for_each(|x| m.merge(x));
    let (a, b) = (m.mx, m.my);
    let value = a * b.powf(p - 1.0);
    let stderr = if m.n > 1 {
        let d = (m.n - 1) as f64;
        let ga = b.powf(p - 1.0);
        let gb = (p - 1.0) * a * b.powf(p - 2.0);
        let var = ga * ga * m.sxx / d + gb * gb * m.syy / d + 2.0 * ga * gb * m.sxy / d;
        (var.max(0.0) / m.n as f64).sqrt()
    } else {
        0.0
    };
    Ok(Estimate { value, stderr, samples: m.n, seed: sample.seed() })
}

/// A_p bracket of `w` over one region (volume or surface averages).
pub fn ap_bracket(w: &Weight, region: &Region, p: f64, cfg: &SamplerConfig) -> Result<Estimate> {
    check_p(p)?;
    w.validate()?;
    let sample = RegionSampler::new(region)?.sample(cfg)?;
    bracket_on(&sample, w, p)
}

/// `int_T w dv` over the tent `T(vertex, radius)`.
pub fn tent_mass(w: &Weight, vertex: &SpherePoint, radius: f64, cfg: &SamplerConfig) -> Result<Estimate> {
    w.validate()?;
    let tent = Region::tent(vertex.clone(), radius)?;
    RegionSampler::new(&tent)?.sample(cfg)?.integral(|y| w.value(y))
}

fn default_shells() -> Vec<f64> {
    vec![0.0, 0.5, 0.9, 0.99, 0.999]
}
fn default_grid_dirs() -> usize {
    2
}
fn default_random_dirs() -> usize {
    2
}
fn default_levels() -> Vec<u32> {
    (1..=9).collect()
}
fn default_true() -> bool {
    true
}
fn default_max_constant() -> f64 {
    50.0
}
fn default_refine_base() -> u64 {
    1000
}
fn default_refine_levels() -> u32 {
    4
}
fn default_replicates() -> u32 {
    5
}

/// Enumerates the regions used to estimate sup-type constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub n: usize,
    /// Center norms `|z|` of the pseudoball centres.
    #[serde(default = "default_shells")]
    pub shells: Vec<f64>,
    #[serde(default = "default_grid_dirs")]
    pub grid_directions: usize,
    #[serde(default = "default_random_dirs")]
    pub random_directions: usize,
    /// Dyadic levels `k`; radii are `2^{-k}`.
    #[serde(default = "default_levels")]
    pub levels: Vec<u32>,
    #[serde(default = "default_true")]
    pub include_tents: bool,
    /// Brackets above this value refute membership at the tested scale.
    #[serde(default = "default_max_constant")]
    pub max_constant: f64,
    #[serde(default = "default_refine_base")]
    pub refine_base: u64,
    #[serde(default = "default_refine_levels")]
    pub refine_levels: u32,
    #[serde(default = "default_replicates")]
    pub replicates: u32,
    #[serde(default)]
    pub direction_seed: u64,
}

impl FamilySpec {
    pub fn new(n: usize) -> Self {
        FamilySpec {
            n,
            shells: default_shells(),
            grid_directions: default_grid_dirs(),
            random_directions: default_random_dirs(),
            levels: default_levels(),
            include_tents: true,
            max_constant: default_max_constant(),
            refine_base: default_refine_base(),
            refine_levels: default_refine_levels(),
            replicates: default_replicates(),
            direction_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("family dimension must be at least 1".into()));
        }
        if self.levels.is_empty() || self.grid_directions + self.random_directions == 0 {
            return Err(Error::Config("empty region family".into()));
        }
        if self.shells.is_empty() && !self.include_tents {
            return Err(Error::Config("empty region family".into()));
        }
        if self.shells.iter().any(|s| !(0.0..1.0).contains(s)) {
            return Err(Error::Config("shell radii must lie in [0, 1)".into()));
        }
        if self.levels.iter().any(|&k| k > 60) {
            return Err(Error::Config("dyadic levels above 60 are not supported".into()));
        }
        if self.refine_levels < 2 || self.replicates == 0 || self.refine_base == 0 {
            return Err(Error::Config("refinement needs two levels and one replicate".into()));
        }
        Ok(())
    }

    /// Unit directions: the grid ones first, then the random ones.
    pub fn directions(&self) -> Vec<SpherePoint> {
        let n = self.n;
        let mut out = Vec::new();
        for j in 0..self.grid_directions {
            let v: Vec<Complex64> = match j {
                0 => (0..n).map(|i| Complex64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0)).collect(),
                _ => {
                    let phase = std::f64::consts::FRAC_PI_4 * j as f64;
                    (0..n).map(|i| Complex64::from_polar(1.0, phase * (i + 1) as f64)).collect()
                }
            };
            out.push(SpherePoint::normalized(v).expect("nonzero direction"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix(self.direction_seed));
        for _ in 0..self.random_directions {
            let mut v = vec![Complex64::new(0.0, 0.0); n];
            draw_sphere(&mut rng, &mut v);
            out.push(SpherePoint::normalized(v).expect("nonzero direction"));
        }
        out
    }

    fn is_grid(&self, direction: usize) -> bool {
        direction < self.grid_directions
    }
}

/// Bracket of one tested region.
#[derive(Clone, Debug, Serialize)]
pub struct RegionBracket {
    /// `pseudo_ball` or `tent`.
    pub shape: &'static str,
    /// Center norm (1 for tents).
    pub shell: f64,
    pub direction: usize,
    pub grid: bool,
    pub level: u32,
    pub radius: f64,
    pub touches: bool,
    pub acceptance: f64,
    pub bracket: Estimate,
}

/// Largest brackets at one dyadic level.
#[derive(Clone, Debug, Serialize)]
pub struct LevelTrace {
    pub level: u32,
    pub radius: f64,
    pub ap_max: f64,
    pub bp_max: f64,
}

/// Replicate medians of one region's bracket at growing sample counts.
#[derive(Clone, Debug, Serialize)]
pub struct Refinement {
    pub shape: &'static str,
    pub shell: f64,
    pub radius: f64,
    pub samples: Vec<u64>,
    pub medians: Vec<f64>,
    /// Least-squares slope of `log median` against `log samples`.
    pub slope: f64,
    /// Hill estimates of the tail index of the sampled `w` and `w^{-1/(p-1)}`
    /// values at the largest sample count; an index below 1 means an infinite mean.
    pub tail_index_weight: f64,
    pub tail_index_dual: f64,
    pub divergent: bool,
}

/// Least-squares doubling exponent with the spread across directions.
#[derive(Clone, Debug, Serialize)]
pub struct TauFit {
    pub value: f64,
    pub band: [f64; 2],
    pub per_direction: Vec<f64>,
    pub radii: Vec<f64>,
}

/// Certification summary for one weight.
#[derive(Clone, Debug, Serialize)]
pub struct ClassReport {
    pub n: usize,
    pub p: f64,
    pub ap_sup: Estimate,
    pub bp_sup: Estimate,
    pub ap_grid_max: f64,
    pub ap_random_max: f64,
    pub bp_grid_max: f64,
    pub bp_random_max: f64,
    /// Exponent fitted to masses of `U(z, 2^k R)` at centres touching the boundary scale.
    pub tau_fit: TauFit,
    /// Exponent fitted with the interior-ball normalisation `(1-|z|^2 + R) / (1-|z|^2 + 2^k R)`.
    pub tau_interior_fit: TauFit,
    pub levels: Vec<LevelTrace>,
    pub ap_stability: f64,
    pub bp_stability: f64,
    pub ap_refinement: Refinement,
    pub bp_refinement: Refinement,
    pub ap_verdict: Verdict,
    pub bp_verdict: Verdict,
    pub max_constant: f64,
    /// `tau_fit <= p (n + 1) + 0.1`.
    pub tau_within_bp_bound: bool,
    pub regions: Vec<RegionBracket>,
}

fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn region_seed(seed: u64, index: u64) -> u64 {
    splitmix(seed ^ splitmix(index.wrapping_add(0x51ed_2701)))
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Hill estimator of the tail index from the top `k^{0.6}` order statistics.
pub(crate) fn tail_index(values: &mut Vec<f64>) -> f64 {
    values.retain(|v| v.is_finite() && *v > 0.0);
    let k = values.len();
    if k < 20 {
        return f64::INFINITY;
    }
    values.sort_by(|a, b| b.total_cmp(a));
    let m = ((k as f64).powf(0.6).ceil() as usize).clamp(10, k - 1);
    let base = values[m].ln();
    let xi = values[..m].iter().map(|v| v.ln() - base).sum::<f64>() / m as f64;
    if xi <= 0.0 {
        f64::INFINITY
    } else {
        1.0 / xi
    }
}

fn refine(w: &Weight, p: f64, rb: &RegionBracket, region: &Region, spec: &FamilySpec, seed: u64) -> Result<Refinement> {
    let sampler = RegionSampler::new(region)?;
    let mut samples = Vec::new();
    let mut medians = Vec::new();
    let (mut top_w, mut top_dual) = (Vec::new(), Vec::new());
    for j in 0..spec.refine_levels {
        let count = spec.refine_base * 4u64.pow(j);
        let mut vals = Vec::new();
        for r in 0..spec.replicates {
            let cfg = SamplerConfig::new(region_seed(seed, ((j as u64) << 32) | r as u64), count)?;
            let s = sampler.sample(&cfg)?;
            if j + 1 == spec.refine_levels {
                for y in s.points() {
                    let v = w.value(y);
                    top_w.push(v);
                    top_dual.push(v.powf(-1.0 / (p - 1.0)));
                }
            }
            if let Ok(b) = bracket_on(&s, w, p) {
                if b.value.is_finite() {
                    vals.push(b.value);
                }
            }
        }
        if vals.is_empty() {
            continue;
        }
        samples.push(count);
        medians.push(median(&mut vals));
    }
    let s = if samples.len() >= 2 {
        let lx: Vec<f64> = samples.iter().map(|&c| (c as f64).ln()).collect();
        let ly: Vec<f64> = medians.iter().map(|m| m.ln()).collect();
        least_squares_slope(&lx, &ly)
    } else {
        0.0
    };
    let tail_index_weight = tail_index(&mut top_w);
    let tail_index_dual = tail_index(&mut top_dual);
    Ok(Refinement {
        shape: rb.shape,
        shell: rb.shell,
        radius: rb.radius,
        samples,
        medians,
        slope: s,
        tail_index_weight,
        tail_index_dual,
        divergent: s > 0.1 || tail_index_weight.min(tail_index_dual) < 1.0,
    })
}

fn stability(levels: &[(u32, f64)]) -> f64 {
    let mut v: Vec<(u32, f64)> = levels.iter().copied().filter(|(_, m)| m.is_finite() && *m > 0.0).collect();
    v.sort_by_key(|(k, _)| *k);
    if v.len() < 2 {
        return 1.0;
    }
    let half = v.len() / 2;
    let coarse = v[..half].iter().map(|x| x.1).fold(0.0, f64::max);
    let fine = v[half..].iter().map(|x| x.1).fold(0.0, f64::max);
    fine / coarse
}

fn verdict(max: f64, stab: f64, refinement: &Refinement, threshold: f64) -> Verdict {
    if refinement.divergent || !max.is_finite() || max > threshold {
        Verdict::RefutedAtScale
    } else if stab > 2.0 {
        Verdict::Inconclusive
    } else {
        Verdict::Supported
    }
}

const TAU_BASE: f64 = 1.0 / 4096.0;

/// Depth `1 - |z|^2` of the centres used for the boundary doubling fit. It is
/// far below every tested radius so that the balls are in the regime
/// `2^k R >> 1 - |z|^2` where the doubling exponent is read off.
const TAU_DEPTH: f64 = 1.0 / 68_719_476_736.0;

/// Least-squares exponent of the weighted masses `w(U(z, 2^k R_0))`, `k = 0..6`,
/// with `R_0 = 2^{-12}`. `interior = false` uses centres at depth [`TAU_DEPTH`]
/// with the normalisation `R / (1 - |z|^2 + R)`; `interior = true` uses
/// `|z| = 1/2` and the normalisation `(1 - |z|^2 + R) / (1 - |z|^2 + 2^k R)`.
pub fn tau_fit(w: &Weight, spec: &FamilySpec, cfg: &SamplerConfig, interior: bool) -> Result<TauFit> {
    w.validate()?;
    spec.validate()?;
    let r = if interior { 0.5 } else { (1.0 - TAU_DEPTH).sqrt() };
    let h = 1.0 - r * r;
    let ks: Vec<f64> = (0..=6).map(|k| k as f64).collect();
    let radii: Vec<f64> = ks.iter().map(|k| TAU_BASE * 2f64.powf(*k)).collect();
    let mut per_direction = Vec::new();
    for (d, dir) in spec.directions().iter().enumerate() {
        let z = dir.as_point().scaled(r);
        let mut ys = Vec::new();
        let mut m0 = 0.0;
        for (k, &rad) in radii.iter().enumerate() {
            let region = Region::pseudo_ball(z.clone(), rad)?;
            let c = cfg.with_seed(region_seed(cfg.seed, 0x7a00_0000 + (d * 16 + k) as u64));
            let mass = RegionSampler::new(&region)?.sample(&c)?.integral(|y| w.value(y))?.value;
            if k == 0 {
                m0 = mass;
            }
            let norm = if interior { (h + TAU_BASE) / (h + rad) } else { (h + TAU_BASE) / TAU_BASE };
            ys.push((mass / m0 * norm).log2());
        }
        let s = least_squares_slope(&ks, &ys);
        per_direction.push(if interior { s + 1.0 } else { s });
    }
    let value = per_direction.iter().sum::<f64>() / per_direction.len() as f64;
    let lo = per_direction.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = per_direction.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(TauFit { value, band: [lo, hi], per_direction, radii })
}

/// Estimates A_p and B_p constants over the family, the doubling exponents,
/// and verdicts for both classes.
pub fn class_certify(w: &Weight, p: f64, spec: &FamilySpec, cfg: &SamplerConfig) -> Result<ClassReport> {
    check_p(p)?;
    w.validate()?;
    spec.validate()?;
    cfg.validate()?;
    let dirs = spec.directions();
    let mut regions: Vec<(RegionBracket, Region)> = Vec::new();
    let mut index = 0u64;
    let mut push = |shape: &'static str, shell: f64, d: usize, level: u32, region: Region| -> Result<()> {
        index += 1;
        let touches = region.touches_boundary();
        let radius = region.radius();
        let c = cfg.with_seed(region_seed(cfg.seed, index));
        let sample = RegionSampler::new(&region)?.sample(&c)?;
        if sample.accepted() == 0 {
            return Ok(());
        }
        let bracket = bracket_on(&sample, w, p)?;
        regions.push((
            RegionBracket {
                shape,
                shell,
                direction: d,
                grid: spec.is_grid(d),
                level,
                radius,
                touches,
                acceptance: sample.acceptance(),
                bracket,
            },
            region,
        ));
        Ok(())
    };
    for &level in &spec.levels {
        let radius = 0.5f64.powi(level as i32);
        for (d, dir) in dirs.iter().enumerate() {
            for &shell in &spec.shells {
                if shell == 0.0 && d > 0 {
                    continue;
                }
                let z: Point = dir.as_point().scaled(shell);
                push("pseudo_ball", shell, d, level, Region::pseudo_ball(z, radius)?)?;
            }
            if spec.include_tents && radius <= 2.0 {
                push("tent", 1.0, d, level, Region::tent(dir.clone(), radius)?)?;
            }
        }
    }
    if regions.is_empty() {
        return Err(Error::Config("no region of the family accepted any sample".into()));
    }

    let pick = |touching_only: bool| {
        let mut best: Option<usize> = None;
        let (mut grid, mut random) = (0.0f64, 0.0f64);
        let mut by_level: Vec<(u32, f64)> = Vec::new();
        for (i, (rb, _)) in regions.iter().enumerate() {
            if touching_only && !rb.touches {
                continue;
            }
            let v = rb.bracket.value;
            if rb.grid {
                grid = grid.max(v);
            } else {
                random = random.max(v);
            }
            match by_level.iter_mut().find(|(k, _)| *k == rb.level) {
                Some(e) => e.1 = e.1.max(v),
                None => by_level.push((rb.level, v)),
            }
            if best.is_none_or(|b| v > regions[b].0.bracket.value) {
                best = Some(i);
            }
        }
        (best, grid, random, by_level)
    };
    let (ap_best, ap_grid, ap_random, ap_levels) = pick(false);
    let (bp_best, bp_grid, bp_random, bp_levels) = pick(true);
    let ap_best = ap_best.expect("nonempty family");
    let bp_best = bp_best.ok_or_else(|| Error::Config("family has no boundary-touching region".into()))?;

    let ap_ref = refine(w, p, &regions[ap_best].0, &regions[ap_best].1, spec, cfg.seed ^ 0xa9)?;
    let bp_ref = if bp_best == ap_best {
        ap_ref.clone()
    } else {
        refine(w, p, &regions[bp_best].0, &regions[bp_best].1, spec, cfg.seed ^ 0xb9)?
    };
    let ap_stability = stability(&ap_levels);
    let bp_stability = stability(&bp_levels);
    let ap_sup = regions[ap_best].0.bracket;
    let bp_sup = regions[bp_best].0.bracket;

    let tau = tau_fit(w, spec, cfg, false)?;
    let tau_interior = tau_fit(w, spec, cfg, true)?;
    let levels = spec
        .levels
        .iter()
        .map(|&k| LevelTrace {
            level: k,
            radius: 0.5f64.powi(k as i32),
            ap_max: ap_levels.iter().find(|x| x.0 == k).map_or(f64::NAN, |x| x.1),
            bp_max: bp_levels.iter().find(|x| x.0 == k).map_or(f64::NAN, |x| x.1),
        })
        .collect();
    let n = spec.n;
    Ok(ClassReport {
        n,
        p,
        ap_sup,
        bp_sup,
        ap_grid_max: ap_grid,
        ap_random_max: ap_random,
        bp_grid_max: bp_grid,
        bp_random_max: bp_random,
        tau_within_bp_bound: tau.value <= p * (n as f64 + 1.0) + 0.1,
        tau_fit: tau,
        tau_interior_fit: tau_interior,
        levels,
        ap_verdict: verdict(ap_sup.value, ap_stability, &ap_ref, spec.max_constant),
        bp_verdict: verdict(bp_sup.value, bp_stability, &bp_ref, spec.max_constant),
        ap_stability,
        bp_stability,
        ap_refinement: ap_ref,
        bp_refinement: bp_ref,
        max_constant: spec.max_constant,
        regions: regions.into_iter().map(|(rb, _)| rb).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e1(n: usize) -> SpherePoint {
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[0] = Complex64::new(1.0, 0.0);
        SpherePoint::new(v).unwrap()
    }

    #[test]
    fn constant_weight_bracket_is_one() {
        let cfg = SamplerConfig::new(1, 5_000).unwrap();
        let r = Region::pseudo_ball(Point::on_axis(2, 0.5), 0.1).unwrap();
        for p in [1.5, 2.0, 4.0] {
            let b = ap_bracket(&Weight::constant(3.0), &r, p, &cfg).unwrap();
            assert!((b.value - 1.0).abs() < 1e-12, "{b:?}");
        }
        assert!(ap_bracket(&Weight::constant(1.0), &r, 1.0, &cfg).is_err());
    }

    #[test]
    fn jensen_and_duality() {
        let cfg = SamplerConfig::new(2, 20_000).unwrap();
        let w = Weight::power(0.5);
        let r = Region::tent(e1(1), 0.25).unwrap();
        let p = 3.0;
        let a = ap_bracket(&w, &r, p, &cfg).unwrap();
        assert!(a.value >= 1.0);
        let pp = p / (p - 1.0);
        let dual = ap_bracket(&Weight::pow(w, -1.0 / (p - 1.0)), &r, pp, &cfg).unwrap();
        assert!((a.value - dual.value.powf(p - 1.0)).abs() < 1e-10 * a.value);
    }

    #[test]
    fn tent_mass_is_monotone() {
        let cfg = SamplerConfig::new(3, 20_000).unwrap();
        let w = Weight::power(1.0);
        let small = tent_mass(&w, &e1(2), 0.1, &cfg).unwrap();
        let big = tent_mass(&w, &e1(2), 0.2, &cfg).unwrap();
        assert!(small.value <= big.value + 3.0 * big.stderr);
    }

    #[test]
    fn family_validation() {
        let mut spec = FamilySpec::new(1);
        spec.levels.clear();
        let cfg = SamplerConfig::new(0, 100).unwrap();
        assert!(matches!(class_certify(&Weight::constant(1.0), 2.0, &spec, &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn directions_are_unit_and_deterministic() {
        let spec = FamilySpec::new(3);
        let a = spec.directions();
        let b = spec.directions();
        assert_eq!(a, b);
        assert_eq!(a.len(), 4);
    }

    #[test]
    fn small_certification_of_constant_weight() {
        let spec = FamilySpec { shells: vec![0.0, 0.9], levels: vec![2, 4, 6], refine_base: 200, ..FamilySpec::new(1) };
        let cfg = SamplerConfig::new(4, 4_000).unwrap();
        let rep = class_certify(&Weight::constant(1.0), 2.0, &spec, &cfg).unwrap();
        assert!((rep.ap_sup.value - 1.0).abs() < 1e-12);
        assert!(rep.ap_sup.value >= rep.bp_sup.value);
        assert_eq!(rep.bp_verdict, Verdict::Supported);
        assert!((rep.tau_fit.value - 2.0).abs() < 0.1, "{:?}", rep.tau_fit);
        assert!((rep.tau_interior_fit.value - 2.0).abs() < 0.1, "{:?}", rep.tau_interior_fit);
    }
}
