//! Rejection sampling of regions from explicit enclosing sets.
//!
//! Each ball region sits inside a set `E = D(c, a) x B(0, b)` written in the
//! frame of its centre: a disk in the normal coordinate and a complex ball of
//! radius `b` in the `n - 1` tangential ones. `E` has normalised volume
//! `n a^2 b^{2(n-1)}`, and `int_R f dv = v(E) E[f 1_R]` under uniform draws
//! from `E`. Boundary caps are sampled on the sphere through the law of the
//! normal coordinate, which has density `(m-1)(1-|x|^2)^{m-2}/pi` on the disk.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use super::{chunk_rng, draw_sphere, par_chunks, Estimate, Moments, SamplerConfig};
use crate::error::{Error, Result};
use crate::geometry::{norm_sq, polydisk_scale_needed, rho_raw, Frame, Point, PreparedRegion, Region};

#[derive(Clone, Debug)]
enum Kind {
    WholeBall,
    Enclosed { frame: Frame, disk_center: f64, disk_radius: f64, tail_radius: f64 },
    Arc { center: Complex64, half_angle: f64 },
    Cap { frame: Frame, radius: f64 },
}

/// Proposal sampler for a single region.
#[derive(Clone, Debug)]
pub struct RegionSampler {
    prepared: PreparedRegion,
    kind: Kind,
    dim: usize,
    measure: f64,
}

/// Normal-direction disk radius and tangential ball radius enclosing `U(z, R)`.
///
/// From `|1 - r x_1| < R + sqrt(h (1 - |w|^2))` with `h = 1 - r^2`: the normal
/// offset obeys `d^2 - 2 R d - 2 R h < R^2`-type bounds giving `d < R + sqrt(R^2 + 2 R h)`,
/// and the tangential part obeys `|t|^2 <= 1 - |x_1|^2 <= 2 (h + d)` together with
/// `|t|^2 < 2 R (h + d) / h` from the same inequality.
fn pseudo_ball_box(r: f64, radius: f64) -> (f64, f64) {
    let h = (1.0 - r * r).max(0.0);
    let d = radius + (radius * radius + 2.0 * radius * h).sqrt();
    let mut t2 = 2.0 * (h + d);
    if h > 0.0 {
        t2 = t2.min(2.0 * radius * (h + d) / h);
    }
    (d, t2.min(1.0).sqrt())
}

impl RegionSampler {
    pub fn new(region: &Region) -> Result<Self> {
        let n = region.dim();
        let prepared = region.prepare();
        let (kind, measure) = match region {
            Region::BoundaryCap { center, radius } => {
                let c = center.coords();
                if n == 1 {
                    let half_angle = 2.0 * (radius / 2.0).min(1.0).asin();
                    (Kind::Arc { center: c[0], half_angle }, half_angle / std::f64::consts::PI)
                } else {
                    let frame = Frame::aligned_with(c);
                    ((Kind::Cap { frame, radius: *radius }), (n as f64 - 1.0) * radius * radius)
                }
            }
            _ => {
                let (frame, c, a, b) = match region {
                    Region::PseudoBall { center, radius } => {
                        let r = center.norm();
                        let (a, b) = pseudo_ball_box(r, *radius);
                        (Frame::aligned_with(center.coords()), r, a, b)
                    }
                    Region::Tent { vertex, radius } => (
                        Frame::aligned_with(vertex.coords()),
                        1.0,
                        *radius,
                        (2.0 * radius).min(1.0).sqrt(),
                    ),
                    Region::Polydisk { center, radius } => {
                        let r = center.norm();
                        let h = (1.0 - r * r).max(0.0);
                        let a = radius + (radius * h).sqrt();
                        let b = ((n as f64 - 1.0) * radius).min(1.0).sqrt();
                        (Frame::aligned_with(center.coords()), r, a, b)
                    }
                    Region::BoundaryCap { .. } => unreachable!(),
                };
                let a = a.min(1.0 + c);
                let vol = n as f64 * a * a * b.powi(2 * (n as i32 - 1));
                if vol >= 1.0 {
                    (Kind::WholeBall, 1.0)
                } else {
                    (Kind::Enclosed { frame, disk_center: c, disk_radius: a, tail_radius: b }, vol)
                }
            }
        };
        Ok(RegionSampler { prepared, kind, dim: n, measure })
    }

    pub fn region(&self) -> &Region {
        self.prepared.region()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Reference measure of the proposal set (normalised `v` or `sigma`).
    pub fn enclosing_measure(&self) -> f64 {
        self.measure
    }

    /// Draws one candidate into `out`; returns whether it was accepted.
    pub(crate) fn propose<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [Complex64], x: &mut [Complex64]) -> bool {
        let n = self.dim;
        match &self.kind {
            Kind::WholeBall => {
                draw_sphere(rng, out);
                let r = rng.random::<f64>().powf(0.5 / n as f64);
                out.iter_mut().for_each(|o| *o *= r);
            }
            Kind::Enclosed { frame, disk_center, disk_radius, tail_radius } => {
                let rr = disk_radius * rng.random::<f64>().sqrt();
                let th = std::f64::consts::TAU * rng.random::<f64>();
                x[0] = Complex64::new(*disk_center, 0.0) + Complex64::from_polar(rr, th);
                if n > 1 {
                    let tail = &mut x[1..];
                    draw_sphere(rng, tail);
                    let s = tail_radius * rng.random::<f64>().powf(0.5 / (n - 1) as f64);
                    tail.iter_mut().for_each(|t| *t *= s);
                }
                frame.from_frame(x, out);
            }
            Kind::Arc { center, half_angle } => {
                let th = half_angle * (2.0 * rng.random::<f64>() - 1.0);
                out[0] = center * Complex64::from_polar(1.0, th);
                return (Complex64::new(1.0, 0.0) - out[0] * center.conj()).norm() < self.region().radius();
            }
            Kind::Cap { frame, radius } => {
                let rr = radius * rng.random::<f64>().sqrt();
                let th = std::f64::consts::TAU * rng.random::<f64>();
                x[0] = Complex64::new(1.0, 0.0) + Complex64::from_polar(rr, th);
                let h = 1.0 - x[0].norm_sqr();
                let keep = rng.random::<f64>();
                if h <= 0.0 || (n > 2 && keep >= h.powi(n as i32 - 2)) {
                    return false;
                }
                let tail = &mut x[1..];
                draw_sphere(rng, tail);
                let s = h.sqrt();
                tail.iter_mut().for_each(|t| *t *= s);
                frame.from_frame(x, out);
            }
        }
        self.prepared.contains_raw(out)
    }

    /// Draws `cfg.samples` candidates and keeps the accepted ones.
    pub fn sample(&self, cfg: &SamplerConfig) -> Result<RegionSample> {
        cfg.validate()?;
        let n = self.dim;
        let parts = par_chunks(cfg.samples, |c, count| {
            let mut rng = chunk_rng(cfg.seed, c);
            let mut out = vec![Complex64::new(0.0, 0.0); n];
            let mut x = vec![Complex64::new(0.0, 0.0); n];
            let mut kept = Vec::new();
            for _ in 0..count {
                if self.propose(&mut rng, &mut out, &mut x) {
                    kept.extend_from_slice(&out);
                }
            }
            kept
        });
        let coords: Vec<Complex64> = parts.into_iter().flatten().collect();
        Ok(RegionSample { dim: n, coords, attempts: cfg.samples, measure: self.measure, seed: cfg.seed })
    }
}

/// Accepted points of one rejection run.
#[derive(Clone, Debug)]
pub struct RegionSample {
    dim: usize,
    coords: Vec<Complex64>,
    attempts: u64,
    measure: f64,
    seed: u64,
}

impl RegionSample {
    pub fn accepted(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn attempts(&self) -> u64 {
        self.attempts
    }

    pub fn acceptance(&self) -> f64 {
        self.accepted() as f64 / self.attempts as f64
    }

    pub fn point(&self, i: usize) -> &[Complex64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[Complex64]> {
        self.coords.chunks(self.dim)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn enclosing_measure(&self) -> f64 {
        self.measure
    }

    pub(crate) fn require_nonempty(&self) -> Result<()> {
        if self.accepted() == 0 {
            return Err(Error::DegenerateRegion { attempts: self.attempts });
        }
        Ok(())
    }

    fn accepted_moments<F: Fn(&[Complex64]) -> f64 + Sync>(&self, f: &F) -> Moments {
        let k = self.accepted() as u64;
        let parts = par_chunks(k, |c, count| {
            let start = (c * super::CHUNK) as usize;
            let mut m = Moments::default();
            for i in start..start + count {
                m.push(f(self.point(i)));
            }
            m
        });
        parts.iter().fold(Moments::default(), |mut acc, m| {
            acc.merge(m);
            acc
        })
    }

    /// Average of `f` over the region (ratio estimator over accepted points).
    pub fn mean<F: Fn(&[Complex64]) -> f64 + Sync>(&self, f: F) -> Result<Estimate> {
        self.require_nonempty()?;
        Ok(Estimate::from_moments(&self.accepted_moments(&f), self.seed))
    }

    /// `int_R f dmu_ref`, counting rejected draws as zeros.
    pub fn integral<F: Fn(&[Complex64]) -> f64 + Sync>(&self, f: F) -> Result<Estimate> {
        self.require_nonempty()?;
        let mut m = self.accepted_moments(&f);
        let zeros = Moments { n: self.attempts - m.n, mean: 0.0, m2: 0.0 };
        m.merge(&zeros);
        Ok(Estimate::from_moments(&m, self.seed).scaled(self.measure))
    }

    /// Reference measure of the region.
    pub fn volume(&self) -> Result<Estimate> {
        self.require_nonempty()?;
        let k = self.accepted() as f64;
        let n = self.attempts as f64;
        let p = k / n;
        let var = if n > 1.0 { p * (1.0 - p) * n / (n - 1.0) } else { 0.0 };
        Ok(Estimate { value: p * self.measure, stderr: (var / n).sqrt() * self.measure, samples: self.attempts, seed: self.seed })
    }
}

/// Integral, volume and acceptance rate of one region run.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RegionIntegral {
    pub integral: Estimate,
    pub volume: Estimate,
    pub acceptance: f64,
}

/// `int_R f dmu_ref` by rejection from the region's enclosing set.
///
/// Fails with [`Error::DegenerateRegion`] when no draw is accepted.
pub fn integrate_region<F>(region: &Region, f: F, cfg: &SamplerConfig) -> Result<RegionIntegral>
where
    F: Fn(&[Complex64]) -> f64 + Sync,
{
    let sample = RegionSampler::new(region)?.sample(cfg)?;
    Ok(RegionIntegral { integral: sample.integral(f)?, volume: sample.volume()?, acceptance: sample.acceptance() })
}

/// Empirical inclusion constants between pseudoballs and polydisks at one centre.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Sandwich {
    /// Smallest sampled `C` with `U(z, R)` inside `P(z, C R)`.
    pub outer: f64,
    /// Smallest `C` (on a bisection grid) with sampled points of `P(z, R / C)` inside `U(z, R)`.
    pub inner: f64,
    /// `v(U(z, R)) / (R^n (R + 1 - |z|^2))`.
    pub volume_ratio: Estimate,
}

/// Estimates the two inclusion constants and the volume ratio at `(z, R)`.
pub fn sandwich_constants(center: &Point, radius: f64, cfg: &SamplerConfig) -> Result<Sandwich> {
    let n = center.dim();
    let ball = Region::pseudo_ball(center.clone(), radius)?;
    let sample = RegionSampler::new(&ball)?.sample(cfg)?;
    let frame = Frame::aligned_with(center.coords());
    let r = center.norm();
    let outer = sample
        .points()
        .map(|w| polydisk_scale_needed(&frame, r, w, radius))
        .fold(0.0f64, f64::max);
    let volume = sample.volume()?;
    let h = 1.0 - r * r;
    let scale = radius.powi(n as i32) * (radius + h);
    let volume_ratio = volume.scaled(1.0 / scale);

    // Unit-polydisk shapes, rescaled for each trial radius.
    let shapes = par_chunks(cfg.samples, |c, count| {
        let mut rng = chunk_rng(cfg.seed ^ 0x5a5a_5a5a, c);
        let mut v = Vec::with_capacity(count * n);
        for _ in 0..count {
            for _ in 0..n {
                let rr = rng.random::<f64>().sqrt();
                let th = std::f64::consts::TAU * rng.random::<f64>();
                v.push(Complex64::from_polar(rr, th));
            }
        }
        v
    })
    .concat();
    let fits = |rp: f64| {
        let big = rp + (rp * h).sqrt();
        let small = rp.sqrt();
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        let mut w = vec![Complex64::new(0.0, 0.0); n];
        shapes.chunks(n).all(|u| {
            x[0] = Complex64::new(r, 0.0) + u[0] * big;
            for i in 1..n {
                x[i] = u[i] * small;
            }
            frame.from_frame(&x, &mut w);
            norm_sq(&w) >= 1.0 || rho_raw(center.coords(), &w) < radius
        })
    };
    let (mut lo, mut hi) = (1.0f64, 1.0f64);
    while !fits(radius / hi) {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            break;
        }
    }
    if lo == hi {
        // Already fits at C = 1; search below.
        lo = 1.0 / 1024.0;
    }
    for _ in 0..40 {
        let mid = (lo * hi).sqrt();
        if fits(radius / mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Sandwich { outer, inner: hi, volume_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SpherePoint;
    use crate::sampling::{mc_integrate, Domain};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Every region point drawn by plain uniform rejection from the ball must
    /// lie in the enclosing set, otherwise the rejection sampler is biased.
    fn check_enclosure(region: &Region) {
        let sampler = RegionSampler::new(region).unwrap();
        let Kind::Enclosed { frame, disk_center, disk_radius, tail_radius } = &sampler.kind else {
            return;
        };
        let prepared = region.prepare();
        let cfg = SamplerConfig::new(99, 400_000).unwrap();
        let mut x = vec![c(0.0, 0.0); region.dim()];
        let mut hits = 0;
        for (p, _) in super::super::sample_ball(region.dim(), &cfg).unwrap() {
            if prepared.contains_raw(p.coords()) {
                hits += 1;
                frame.to_frame(p.coords(), &mut x);
                assert!((x[0] - c(*disk_center, 0.0)).norm() <= *disk_radius + 1e-12, "{region:?}");
                assert!(norm_sq(&x[1..]).sqrt() <= *tail_radius + 1e-12, "{region:?}");
            }
        }
        assert!(hits > 0);
    }

    #[test]
    fn enclosing_sets_contain_regions() {
        for n in 1..=3 {
            for &r in &[0.0, 0.5, 0.9] {
                for &rad in &[0.05, 0.2, 0.6] {
                    let mut z = Point::origin(n);
                    if r > 0.0 {
                        z = Point::new((0..n).map(|i| c(r / (n as f64).sqrt(), 0.1 * i as f64 * 0.0)).collect()).unwrap();
                    }
                    check_enclosure(&Region::pseudo_ball(z.clone(), rad).unwrap());
                    check_enclosure(&Region::polydisk(z, rad).unwrap());
                }
                let zeta = SpherePoint::normalized((0..n).map(|i| c(1.0, i as f64)).collect()).unwrap();
                check_enclosure(&Region::tent(zeta, 0.3).unwrap());
            }
        }
    }

    #[test]
    fn pseudo_ball_volume_closed_form() {
        let cfg = SamplerConfig::new(1, 200_000).unwrap();
        for n in 1..=2 {
            for &rad in &[0.1, 0.5] {
                let reg = Region::pseudo_ball(Point::origin(n), rad).unwrap();
                let v = integrate_region(&reg, |_| 1.0, &cfg).unwrap().volume;
                let want = (2.0 * rad - rad * rad).powi(n as i32);
                assert!(v.agrees_with(want, 4.0), "{v:?} {want}");
            }
        }
    }

    #[test]
    fn rejection_matches_membership_counting() {
        let z = Point::new(vec![c(0.6, 0.2), c(-0.1, 0.3)]).unwrap();
        let reg = Region::pseudo_ball(z, 0.2).unwrap();
        let cfg = SamplerConfig::new(3, 400_000).unwrap();
        let via = integrate_region(&reg, |_| 1.0, &cfg).unwrap().integral;
        let prepared = reg.prepare();
        let direct = mc_integrate(&Domain::Ball(2), |y| if prepared.contains_raw(y) { 1.0 } else { 0.0 }, &cfg).unwrap();
        let tol = 3.0 * (via.stderr.powi(2) + direct.stderr.powi(2)).sqrt();
        assert!((via.value - direct.value).abs() <= tol, "{via:?} {direct:?}");
    }

    #[test]
    fn cap_measures() {
        let cfg = SamplerConfig::new(2, 200_000).unwrap();
        // m = 1: exact arc length
        let arc = Region::boundary_cap(SpherePoint::new(vec![c(0.0, 1.0)]).unwrap(), 1.0).unwrap();
        let s = RegionSampler::new(&arc).unwrap();
        assert!((s.enclosing_measure() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.sample(&cfg).unwrap().acceptance(), 1.0);
        // m = 2: sigma(cap) = R^2 / 4 (x_1 uniform on the disk)
        for m in 2..=3 {
            let mut v = vec![c(0.0, 0.0); m];
            v[m - 1] = c(1.0, 0.0);
            let cap = Region::boundary_cap(SpherePoint::new(v).unwrap(), 0.5).unwrap();
            let vol = integrate_region(&cap, |_| 1.0, &cfg).unwrap().volume;
            let prepared = cap.prepare();
            let direct = mc_integrate(&Domain::Sphere(m), |y| if prepared.contains_raw(y) { 1.0 } else { 0.0 }, &cfg).unwrap();
            let tol = 3.0 * (vol.stderr.powi(2) + direct.stderr.powi(2)).sqrt();
            assert!((vol.value - direct.value).abs() <= tol, "m={m} {vol:?} {direct:?}");
        }
    }

    #[test]
    fn degenerate_region_is_an_error() {
        let reg = Region::pseudo_ball(Point::origin(1), 1e-9).unwrap();
        let cfg = SamplerConfig::new(0, 10).unwrap();
        let r = integrate_region(&reg, |_| 1.0, &cfg);
        assert!(r.is_ok() || matches!(r, Err(Error::DegenerateRegion { .. })));
    }

    #[test]
    fn sandwich_is_moderate() {
        let cfg = SamplerConfig::new(5, 20_000).unwrap();
        let s = sandwich_constants(&Point::on_axis(2, 0.9), 0.01, &cfg).unwrap();
        assert!(s.outer > 0.0 && s.outer <= 16.0, "{s:?}");
        assert!(s.inner >= 1.0 / 1024.0 && s.inner <= 16.0, "{s:?}");
        assert!(s.volume_ratio.value > 1.0 / 8.0 && s.volume_ratio.value < 8.0);
    }
}
