//! Seeded Monte Carlo over the ball, the sphere and sub-regions.
//!
//! Samples are generated in fixed chunks of [`CHUNK`] draws. Chunk `c` reads
//! from a ChaCha8 stream selected by `(seed, c)`, so the sample sequence does
//! not depend on how chunks are spread over threads, and chunk statistics are
//! merged in chunk order. The result is bit-identical for any worker count.

pub mod radial;
pub mod region;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{mobius_into, mobius_jacobian, norm_sq, Point, Region, SpherePoint};

pub use radial::{radial_integrate, QuadConfig};
pub use region::{integrate_region, sandwich_constants, RegionIntegral, RegionSample, RegionSampler, Sandwich};

/// Number of draws per independently seeded chunk.
pub const CHUNK: u64 = 4096;

pub(crate) fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Runs `f(chunk, count)` for every chunk in parallel and returns the results in chunk order.
pub(crate) fn par_chunks<T, F>(samples: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, usize) -> T + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| f(c, (samples - c * CHUNK).min(CHUNK) as usize))
        .collect()
}

/// Streaming mean and variance (Welford, merged with Chan's formula).
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Moments {
    pub n: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, o: &Moments) {
        if o.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *o;
            return;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        self.mean += d * o.n as f64 / n as f64;
        self.m2 += o.m2 + d * d * (self.n as f64) * (o.n as f64) / n as f64;
        self.n = n;
    }

    pub fn variance(&self) -> f64 {
        if self.n > 1 {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        } else {
            0.0
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

/// Monte Carlo result. For complex values `stderr` is the standard error of
/// the complex mean, `sqrt(var(re) + var(im)) / sqrt(samples)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate<V = f64> {
    pub value: V,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

impl Estimate<f64> {
    pub fn exact(value: f64) -> Self {
        Estimate { value, stderr: 0.0, samples: 1, seed: 0 }
    }

    pub(crate) fn from_moments(m: &Moments, seed: u64) -> Self {
        Estimate { value: m.mean, stderr: m.stderr(), samples: m.n, seed }
    }

    /// `|value - target| <= k * stderr`, with a floor for rounding.
    pub fn agrees_with(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.stderr + 1e-12 * self.value.abs().max(target.abs())
    }

    pub fn scaled(&self, c: f64) -> Self {
        Estimate { value: self.value * c, stderr: self.stderr * c.abs(), ..*self }
    }
}

impl Estimate<Complex64> {
    pub fn agrees_with(&self, target: Complex64, k: f64) -> bool {
        (self.value - target).norm() <= k * self.stderr + 1e-12 * self.value.norm().max(target.norm())
    }

    pub fn modulus(&self) -> Estimate<f64> {
        Estimate { value: self.value.norm(), stderr: self.stderr, samples: self.samples, seed: self.seed }
    }
}

/// Seed, sample budget and radial importance exponent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub seed: u64,
    pub samples: u64,
    /// Radial tilt: radii are drawn with density proportional to `(1 - r^2)^gamma`.
    #[serde(default)]
    pub gamma: f64,
}

impl SamplerConfig {
    pub fn new(seed: u64, samples: u64) -> Result<Self> {
        if samples == 0 {
            return Err(Error::Config("samples must be at least 1".into()));
        }
        Ok(SamplerConfig { seed, samples, gamma: 0.0 })
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        if !(gamma > -1.0) || !gamma.is_finite() {
            return Err(Error::Config(format!("importance exponent must exceed -1, got {gamma}")));
        }
        self.gamma = gamma;
        Ok(self)
    }

    pub fn with_seed(self, seed: u64) -> Self {
        SamplerConfig { seed, ..self }
    }

    pub fn with_samples(self, samples: u64) -> Self {
        SamplerConfig { samples: samples.max(1), ..self }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        SamplerConfig::new(self.seed, self.samples)?.with_gamma(self.gamma).map(|_| ())
    }
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig { seed: 0, samples: 100_000, gamma: 0.0 }
    }
}

/// Writes a uniform point of the unit sphere of `C^m` into `out`.
#[inline]
pub(crate) fn draw_sphere<R: Rng + ?Sized>(rng: &mut R, out: &mut [Complex64]) {
    loop {
        for o in out.iter_mut() {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            *o = Complex64::new(re, im);
        }
        let r = norm_sq(out).sqrt();
        if r > 1e-150 {
            out.iter_mut().for_each(|o| *o /= r);
            return;
        }
    }
}

/// `n! / prod_{j=1}^n (gamma + j)`: the constant relating the tilted and the uniform radial laws.
pub(crate) fn tilt_constant(n: usize, gamma: f64) -> f64 {
    (1..=n).fold(1.0, |acc, j| acc * j as f64 / (gamma + j as f64))
}

/// Importance proposal over the ball. Weights are `dv / dq` at the drawn point.
#[derive(Clone, Debug)]
pub enum Proposal {
    /// Radius law `(1 - r^2)^gamma`; `gamma = 0` is uniform.
    Radial { gamma: f64 },
    /// Defensive mixture of the radial law and the image of `v` under `phi_a`,
    /// which concentrates near `a`.
    Mixture { center: Vec<Complex64>, lambda: f64, gamma: f64 },
}

impl Proposal {
    pub fn uniform() -> Self {
        Proposal::Radial { gamma: 0.0 }
    }

    pub fn radial(gamma: f64) -> Result<Self> {
        if !(gamma > -1.0) || !gamma.is_finite() {
            return Err(Error::Config(format!("importance exponent must exceed -1, got {gamma}")));
        }
        Ok(Proposal::Radial { gamma })
    }

    /// Mixture centred at `center`, pulled inside `|a| <= 0.999` if needed.
    pub fn mixture(center: &[Complex64], lambda: f64, gamma: f64) -> Result<Self> {
        Proposal::radial(gamma)?;
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::Config("mixture weight must lie in [0, 1]".into()));
        }
        let r = norm_sq(center).sqrt();
        let center = if r > 0.999 {
            center.iter().map(|c| c * (0.999 / r)).collect()
        } else {
            center.to_vec()
        };
        Ok(Proposal::Mixture { center, lambda, gamma })
    }

    #[inline]
    fn draw_radial<R: Rng + ?Sized>(rng: &mut R, beta: Option<&Beta<f64>>, out: &mut [Complex64]) {
        let n = out.len();
        draw_sphere(rng, out);
        let t = match beta {
            None => rng.random::<f64>().powf(1.0 / n as f64),
            Some(b) => b.sample(rng),
        };
        let r = t.sqrt();
        out.iter_mut().for_each(|o| *o *= r);
    }

    /// Density of the radial law with respect to `v` at a point with `|y|^2 = t`.
    #[inline]
    fn radial_density(n: usize, gamma: f64, t: f64) -> f64 {
        if gamma == 0.0 {
            1.0
        } else {
            (1.0 - t).max(0.0).powf(gamma) / tilt_constant(n, gamma)
        }
    }
}

/// A proposal prepared for one dimension.
pub(crate) struct PreparedProposal {
    n: usize,
    proposal: Proposal,
    beta: Option<Beta<f64>>,
}

impl PreparedProposal {
    pub fn new(n: usize, proposal: &Proposal) -> Result<Self> {
        let gamma = match proposal {
            Proposal::Radial { gamma } | Proposal::Mixture { gamma, .. } => *gamma,
        };
        if let Proposal::Mixture { center, .. } = proposal {
            crate::error::check_dim(n, center.len())?;
        }
        let beta = if gamma == 0.0 {
            None
        } else {
            Some(Beta::new(n as f64, gamma + 1.0).map_err(|e| Error::Config(e.to_string()))?)
        };
        Ok(PreparedProposal { n, proposal: proposal.clone(), beta })
    }

    /// Draws into `out`, returning the importance weight `dv/dq`.
    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [Complex64]) -> f64 {
        match &self.proposal {
            Proposal::Radial { gamma } => {
                Proposal::draw_radial(rng, self.beta.as_ref(), out);
                if *gamma == 0.0 {
                    1.0
                } else {
                    let t = norm_sq(out).min(1.0);
                    tilt_constant(self.n, *gamma) * (1.0 - t).powf(-*gamma)
                }
            }
            Proposal::Mixture { center, lambda, gamma } => {
                if rng.random::<f64>() < *lambda {
                    Proposal::draw_radial(rng, self.beta.as_ref(), out);
                } else {
                    let mut x = vec![Complex64::new(0.0, 0.0); self.n];
                    Proposal::draw_radial(rng, None, &mut x);
                    mobius_into(center, &x, out);
                }
                let t = norm_sq(out).min(1.0);
                let q = lambda * Proposal::radial_density(self.n, *gamma, t)
                    + (1.0 - lambda) * mobius_jacobian(center, out);
                1.0 / q
            }
        }
    }
}

/// Integration domain for [`mc_integrate`].
#[derive(Clone, Debug)]
pub enum Domain {
    /// Unit ball of `C^n` with normalised volume.
    Ball(usize),
    /// Unit sphere of `C^m` with normalised surface measure.
    Sphere(usize),
    /// Volume (or, for boundary caps, surface) measure restricted to a region.
    Region(Region),
}

fn real_chunks<F>(samples: u64, seed: u64, dim: usize, draw: &F) -> Vec<Moments>
where
    F: Fn(&mut ChaCha8Rng, &mut [Complex64]) -> f64 + Sync,
{
    par_chunks(samples, |c, count| {
        let mut rng = chunk_rng(seed, c);
        let mut y = vec![Complex64::new(0.0, 0.0); dim];
        let mut m = Moments::default();
        for _ in 0..count {
            m.push(draw(&mut rng, &mut y));
        }
        m
    })
}

fn merge_all(parts: &[Moments]) -> Moments {
    parts.iter().fold(Moments::default(), |mut acc, m| {
        acc.merge(m);
        acc
    })
}

/// Estimates `int f dv` over the ball under an importance proposal.
pub fn integrate_ball<F>(n: usize, proposal: &Proposal, seed: u64, samples: u64, f: F) -> Result<Estimate>
where
    F: Fn(&[Complex64]) -> f64 + Sync,
{
    check_n(n)?;
    let prep = PreparedProposal::new(n, proposal)?;
    let parts = real_chunks(samples.max(1), seed, n, &|rng, y| {
        let w = prep.draw(rng, y);
        w * f(y)
    });
    Ok(Estimate::from_moments(&merge_all(&parts), seed))
}

/// Complex-valued version of [`integrate_ball`].
pub fn integrate_ball_complex<F>(
    n: usize,
    proposal: &Proposal,
    seed: u64,
    samples: u64,
    f: F,
) -> Result<Estimate<Complex64>>
where
    F: Fn(&[Complex64]) -> Complex64 + Sync,
{
    check_n(n)?;
    let prep = PreparedProposal::new(n, proposal)?;
    let parts = par_chunks(samples.max(1), |c, count| {
        let mut rng = chunk_rng(seed, c);
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        let (mut re, mut im) = (Moments::default(), Moments::default());
        for _ in 0..count {
            let w = prep.draw(&mut rng, &mut y);
            let v = f(&y) * w;
            re.push(v.re);
            im.push(v.im);
        }
        (re, im)
    });
    let (mut re, mut im) = (Moments::default(), Moments::default());
    for (a, b) in &parts {
        re.merge(a);
        im.merge(b);
    }
    Ok(Estimate {
        value: Complex64::new(re.mean, im.mean),
        stderr: ((re.variance() + im.variance()) / re.n as f64).sqrt(),
        samples: re.n,
        seed,
    })
}

/// Estimates `int f dsigma` over the unit sphere of `C^m`.
pub fn integrate_sphere<F>(m: usize, seed: u64, samples: u64, f: F) -> Result<Estimate>
where
    F: Fn(&[Complex64]) -> f64 + Sync,
{
    check_n(m)?;
    let parts = real_chunks(samples.max(1), seed, m, &|rng, y| {
        draw_sphere(rng, y);
        f(y)
    });
    Ok(Estimate::from_moments(&merge_all(&parts), seed))
}

/// Unbiased estimate of `int f d(mu_ref)` over the domain.
///
/// Ball integrals use the radial tilt `cfg.gamma`; region integrals are
/// computed by rejection from an enclosing set, see [`integrate_region`].
pub fn mc_integrate<F>(domain: &Domain, f: F, cfg: &SamplerConfig) -> Result<Estimate>
where
    F: Fn(&[Complex64]) -> f64 + Sync,
{
    cfg.validate()?;
    match domain {
        Domain::Ball(n) => integrate_ball(*n, &Proposal::radial(cfg.gamma)?, cfg.seed, cfg.samples, f),
        Domain::Sphere(m) => integrate_sphere(*m, cfg.seed, cfg.samples, f),
        Domain::Region(r) => Ok(integrate_region(r, f, cfg)?.integral),
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Parameter("dimension must be at least 1".into()));
    }
    Ok(())
}

/// Iterator over ball samples `(point, importance weight)`.
pub struct BallSamples {
    prep: PreparedProposal,
    seed: u64,
    remaining: u64,
    index: u64,
    rng: ChaCha8Rng,
}

impl Iterator for BallSamples {
    type Item = (Point, f64);

    fn next(&mut self) -> Option<Self::Item> {
        if self.remaining == 0 {
            return None;
        }
        if self.index > 0 && self.index % CHUNK == 0 {
            self.rng = chunk_rng(self.seed, self.index / CHUNK);
        }
        let mut y = vec![Complex64::new(0.0, 0.0); self.prep.n];
        let w = self.prep.draw(&mut self.rng, &mut y);
        self.remaining -= 1;
        self.index += 1;
        Some((Point::new(y).expect("finite sample"), w))
    }
}

/// Stream of points of `B^n` drawn under the radial tilt `cfg.gamma`,
/// each paired with the weight that makes weighted means estimate `int f dv`.
pub fn sample_ball(n: usize, cfg: &SamplerConfig) -> Result<BallSamples> {
    check_n(n)?;
    cfg.validate()?;
    Ok(BallSamples {
        prep: PreparedProposal::new(n, &Proposal::radial(cfg.gamma)?)?,
        seed: cfg.seed,
        remaining: cfg.samples,
        index: 0,
        rng: chunk_rng(cfg.seed, 0),
    })
}

/// Iterator over uniform sphere samples.
pub struct SphereSamples {
    m: usize,
    seed: u64,
    remaining: u64,
    index: u64,
    rng: ChaCha8Rng,
}

impl Iterator for SphereSamples {
    type Item = SpherePoint;

    fn next(&mut self) -> Option<SpherePoint> {
        if self.remaining == 0 {
            return None;
        }
        if self.index > 0 && self.index % CHUNK == 0 {
            self.rng = chunk_rng(self.seed, self.index / CHUNK);
        }
        let mut y = vec![Complex64::new(0.0, 0.0); self.m];
        draw_sphere(&mut self.rng, &mut y);
        self.remaining -= 1;
        self.index += 1;
        Some(SpherePoint::normalized(y).expect("nonzero sample"))
    }
}

/// Stream of uniform points of the unit sphere of `C^m`.
pub fn sample_sphere(m: usize, cfg: &SamplerConfig) -> Result<SphereSamples> {
    check_n(m)?;
    cfg.validate()?;
    Ok(SphereSamples { m, seed: cfg.seed, remaining: cfg.samples, index: 0, rng: chunk_rng(cfg.seed, 0) })
}

/// A stored batch of weighted ball samples, used when several integrands
/// must see the same points (common random numbers).
#[derive(Clone, Debug)]
pub struct SampleSet {
    n: usize,
    seed: u64,
    coords: Vec<Complex64>,
    weights: Vec<f64>,
}

impl SampleSet {
    pub fn draw(n: usize, proposal: &Proposal, seed: u64, samples: u64) -> Result<Self> {
        check_n(n)?;
        let prep = PreparedProposal::new(n, proposal)?;
        let parts = par_chunks(samples.max(1), |c, count| {
            let mut rng = chunk_rng(seed, c);
            let mut coords = vec![Complex64::new(0.0, 0.0); n * count];
            let mut weights = Vec::with_capacity(count);
            for y in coords.chunks_mut(n) {
                weights.push(prep.draw(&mut rng, y));
            }
            (coords, weights)
        });
        let mut coords = Vec::with_capacity(n * samples as usize);
        let mut weights = Vec::with_capacity(samples as usize);
        for (c, w) in parts {
            coords.extend(c);
            weights.extend(w);
        }
        Ok(SampleSet { n, seed, coords, weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn point(&self, i: usize) -> &[Complex64] {
        &self.coords[i * self.n..(i + 1) * self.n]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// Weighted mean of `f`, i.e. an estimate of `int f dv`.
    pub fn estimate<F>(&self, f: F) -> Estimate
    where
        F: Fn(&[Complex64]) -> f64 + Sync,
    {
        let parts = par_chunks(self.len() as u64, |c, count| {
            let start = (c * CHUNK) as usize;
            let mut m = Moments::default();
            for i in start..start + count {
                m.push(self.weights[i] * f(self.point(i)));
            }
            m
        });
        Estimate::from_moments(&merge_all(&parts), self.seed)
    }

    /// Complex weighted mean.
    pub fn estimate_complex<F>(&self, f: F) -> Estimate<Complex64>
    where
        F: Fn(&[Complex64]) -> Complex64 + Sync,
    {
        let parts = par_chunks(self.len() as u64, |c, count| {
            let start = (c * CHUNK) as usize;
            let (mut re, mut im) = (Moments::default(), Moments::default());
            for i in start..start + count {
                let v = f(self.point(i)) * self.weights[i];
                re.push(v.re);
                im.push(v.im);
            }
            (re, im)
        });
        let (mut re, mut im) = (Moments::default(), Moments::default());
        for (a, b) in &parts {
            re.merge(a);
            im.merge(b);
        }
        Estimate {
            value: Complex64::new(re.mean, im.mean),
            stderr: ((re.variance() + im.variance()) / re.n.max(1) as f64).sqrt(),
            samples: re.n,
            seed: self.seed,
        }
    }
}

/// 64-bit mixing of a seed with the bits of a point, for seeding nested samplers.
pub(crate) fn point_seed(seed: u64, z: &[Complex64]) -> u64 {
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    for c in z {
        for bits in [c.re.to_bits(), c.im.to_bits()] {
            h = splitmix(h ^ bits);
        }
    }
    h
}

#[inline]
pub(crate) fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_of_one_is_exact() {
        let cfg = SamplerConfig::new(7, 10_000).unwrap();
        let e = mc_integrate(&Domain::Ball(2), |_| 1.0, &cfg).unwrap();
        assert_eq!(e.value, 1.0);
        assert_eq!(e.stderr, 0.0);
        let s = mc_integrate(&Domain::Sphere(3), |_| 1.0, &cfg).unwrap();
        assert_eq!(s.value, 1.0);
    }

    #[test]
    fn uniform_ball_moments() {
        let cfg = SamplerConfig::new(1, 200_000).unwrap();
        let e = mc_integrate(&Domain::Ball(1), |y| y[0].re, &cfg).unwrap();
        assert!(e.agrees_with(0.0, 3.0), "{e:?}");
        let e = mc_integrate(&Domain::Ball(1), |y| norm_sq(y), &cfg).unwrap();
        assert!(e.agrees_with(0.5, 3.0), "{e:?}");
        let e = mc_integrate(&Domain::Ball(1), |y| (1.0 - norm_sq(y)).sqrt(), &cfg).unwrap();
        assert!(e.agrees_with(2.0 / 3.0, 3.0), "{e:?}");
    }

    #[test]
    fn sphere_moments() {
        let cfg = SamplerConfig::new(3, 100_000).unwrap();
        let e = mc_integrate(&Domain::Sphere(3), |y| y[0].norm_sqr(), &cfg).unwrap();
        assert!(e.agrees_with(1.0 / 3.0, 3.0), "{e:?}");
        let e = mc_integrate(&Domain::Sphere(2), |y| y[0].im, &cfg).unwrap();
        assert!(e.agrees_with(0.0, 3.0), "{e:?}");
    }

    #[test]
    fn tilted_matches_untilted() {
        for (n, beta, gamma) in [(1, 0.5, -0.5), (2, -0.3, -0.5), (3, 1.5, 2.0), (2, 0.4, 0.6)] {
            let f = |y: &[Complex64]| (1.0 - norm_sq(y)).powf(beta);
            let base = SamplerConfig::new(11, 200_000).unwrap();
            let a = mc_integrate(&Domain::Ball(n), f, &base).unwrap();
            let b = mc_integrate(&Domain::Ball(n), f, &base.with_gamma(gamma).unwrap()).unwrap();
            let tol = 3.0 * (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
            assert!((a.value - b.value).abs() <= tol, "{a:?} {b:?}");
        }
    }

    #[test]
    fn tilt_weights_average_to_one() {
        let cfg = SamplerConfig::new(5, 100_000).unwrap().with_gamma(0.8).unwrap();
        let e = mc_integrate(&Domain::Ball(2), |_| 1.0, &cfg).unwrap();
        assert!(e.agrees_with(1.0, 3.0), "{e:?}");
    }

    #[test]
    fn mixture_is_unbiased() {
        let a = [Complex64::new(0.7, 0.2), Complex64::new(0.0, -0.3)];
        let p = Proposal::mixture(&a, 0.5, 0.3).unwrap();
        let f = |y: &[Complex64]| y[0].norm_sqr() + 0.5;
        let e = integrate_ball(2, &p, 9, 200_000, f).unwrap();
        // int |y1|^2 dv = 1/(n+1) on B^2
        assert!(e.agrees_with(1.0 / 3.0 + 0.5, 3.0), "{e:?}");
    }

    #[test]
    fn gamma_validation() {
        let cfg = SamplerConfig::new(0, 10).unwrap();
        assert!(cfg.with_gamma(-1.0).is_err());
        assert!(SamplerConfig::new(0, 0).is_err());
    }

    #[test]
    fn streams_match_integrator() {
        let cfg = SamplerConfig::new(4, 10_000).unwrap().with_gamma(0.5).unwrap();
        let mut m = Moments::default();
        for (p, w) in sample_ball(2, &cfg).unwrap() {
            m.push(w * p.coords()[1].re);
        }
        let e = mc_integrate(&Domain::Ball(2), |y| y[1].re, &cfg).unwrap();
        assert_eq!(m.n, e.samples);
        assert!((m.mean - e.value).abs() < 1e-12);
        assert_eq!(sample_sphere(3, &cfg).unwrap().count(), 10_000);
    }

    #[test]
    fn worker_count_does_not_change_bits() {
        let cfg = SamplerConfig::new(42, 50_000).unwrap().with_gamma(0.3).unwrap();
        let f = |y: &[Complex64]| (y[0].re * 3.0).sin() + norm_sq(y);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| mc_integrate(&Domain::Ball(2), f, &cfg).unwrap())
        };
        let a = run(1);
        let b = run(3);
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
    }
}
