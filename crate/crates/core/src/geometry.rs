//! Geometry of the closed unit ball of `C^n`.
//!
//! Everything here is exact and deterministic: the pseudodistance
//! `rho(z, w) = |1 - <z, w>| - sqrt(1 - |z|^2) sqrt(1 - |w|^2)`, the involutive
//! automorphisms `phi_a`, the lift of a ball point to a circle in the sphere of
//! `C^{n+1}`, and membership predicates for the four region shapes used by the
//! rest of the crate. All membership tests use strict inequalities.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Tolerance used when validating unit-norm inputs.
pub const UNIT_TOL: f64 = 1e-12;

/// Hermitian product `<z, w> = sum z_i conj(w_i)`.
#[inline]
pub fn inner(z: &[Complex64], w: &[Complex64]) -> Complex64 {
    z.iter()
        .zip(w)
        .fold(Complex64::new(0.0, 0.0), |acc, (a, b)| acc + a * b.conj())
}

#[inline]
pub fn norm_sq(z: &[Complex64]) -> f64 {
    z.iter().map(|c| c.re * c.re + c.im * c.im).sum()
}

/// A point of `C^n`. Interior-ball operations check `|z| <= 1` themselves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<Complex64>);

impl Point {
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Parameter("a point needs at least one coordinate".into()));
        }
        if coords.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Parameter("point coordinates must be finite".into()));
        }
        Ok(Point(coords))
    }

    /// Origin of `C^n`.
    pub fn origin(n: usize) -> Self {
        Point(vec![Complex64::new(0.0, 0.0); n])
    }

    /// `scale * e_1` in `C^n`.
    pub fn on_axis(n: usize, scale: f64) -> Self {
        let mut p = Point::origin(n);
        p.0[0] = Complex64::new(scale, 0.0);
        p
    }

    /// Builds a point from interleaved `(re, im)` pairs.
    pub fn from_re_im(parts: &[f64]) -> Result<Self> {
        if parts.len() % 2 != 0 {
            return Err(Error::Parameter("expected an even number of reals".into()));
        }
        Point::new(parts.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<Complex64> {
        self.0
    }

    pub fn norm_sq(&self) -> f64 {
        norm_sq(&self.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scaled(&self, t: f64) -> Point {
        Point(self.0.iter().map(|c| c * t).collect())
    }

    /// `z / |z|`, or `e_1` for the origin.
    pub fn direction(&self) -> Point {
        let r = self.norm();
        if r == 0.0 {
            Point::on_axis(self.dim(), 1.0)
        } else {
            self.scaled(1.0 / r)
        }
    }

    pub(crate) fn check_closed_ball(&self) -> Result<()> {
        if self.norm_sq() > 1.0 + UNIT_TOL {
            return Err(Error::Domain(format!(
                "point outside the closed unit ball (|z| = {})",
                self.norm()
            )));
        }
        Ok(())
    }
}

/// A point of the unit sphere of `C^{m}`, unit norm to `1e-12`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct SpherePoint(Vec<Complex64>);

impl SpherePoint {
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Parameter("a sphere point needs a coordinate".into()));
        }
        let r2 = norm_sq(&coords);
        if (r2 - 1.0).abs() > UNIT_TOL {
            return Err(Error::Domain(format!("sphere point has |z|^2 = {r2}")));
        }
        Ok(SpherePoint(coords))
    }

    /// Normalises an arbitrary nonzero vector onto the sphere.
    pub fn normalized(coords: Vec<Complex64>) -> Result<Self> {
        let r = norm_sq(&coords).sqrt();
        if r == 0.0 || !r.is_finite() {
            return Err(Error::Domain("cannot normalise the zero vector".into()));
        }
        Ok(SpherePoint(coords.into_iter().map(|c| c / r).collect()))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.0
    }

    pub fn as_point(&self) -> Point {
        Point(self.0.clone())
    }
}

impl TryFrom<Vec<Complex64>> for SpherePoint {
    type Error = Error;
    fn try_from(v: Vec<Complex64>) -> Result<Self> {
        SpherePoint::new(v)
    }
}

impl From<SpherePoint> for Vec<Complex64> {
    fn from(p: SpherePoint) -> Self {
        p.0
    }
}

#[inline]
pub(crate) fn rho_raw(z: &[Complex64], w: &[Complex64]) -> f64 {
    let hz = (1.0 - norm_sq(z)).max(0.0);
    let hw = (1.0 - norm_sq(w)).max(0.0);
    let d = (Complex64::new(1.0, 0.0) - inner(z, w)).norm() - (hz * hw).sqrt();
    d.max(0.0)
}

/// Pseudodistance on the closed ball.
pub fn rho(z: &Point, w: &Point) -> Result<f64> {
    check_dim(z.dim(), w.dim())?;
    z.check_closed_ball()?;
    w.check_closed_ball()?;
    Ok(rho_raw(z.coords(), w.coords()))
}

/// `phi_a(z) = (a - P_a z - sqrt(1-|a|^2) Q_a z) / (1 - <z, a>)`, writing into `out`.
pub(crate) fn mobius_into(a: &[Complex64], z: &[Complex64], out: &mut [Complex64]) {
    let a2 = norm_sq(a);
    let za = inner(z, a);
    let denom = Complex64::new(1.0, 0.0) - za;
    if a2 == 0.0 {
        for (o, zi) in out.iter_mut().zip(z) {
            *o = -zi;
        }
        return;
    }
    let s = (1.0 - a2).sqrt();
    let proj = za / a2;
    for i in 0..a.len() {
        let p = proj * a[i];
        let q = z[i] - p;
        out[i] = (a[i] - p - q * s) / denom;
    }
}

/// The automorphism of the ball interchanging `a` and `0`.
pub fn mobius(a: &Point, z: &Point) -> Result<Point> {
    check_dim(a.dim(), z.dim())?;
    if a.norm_sq() >= 1.0 {
        return Err(Error::Domain("mobius center must satisfy |a| < 1".into()));
    }
    z.check_closed_ball()?;
    let mut out = vec![Complex64::new(0.0, 0.0); a.dim()];
    mobius_into(a.coords(), z.coords(), &mut out);
    Ok(Point(out))
}

/// Real Jacobian of `phi_a` at `y` with respect to normalised volume,
/// `((1 - |a|^2) / |1 - <y, a>|^2)^{n+1}`.
#[inline]
pub(crate) fn mobius_jacobian(a: &[Complex64], y: &[Complex64]) -> f64 {
    let n = a.len() as i32;
    let d = (Complex64::new(1.0, 0.0) - inner(y, a)).norm_sqr();
    ((1.0 - norm_sq(a)) / d).powi(n + 1)
}

/// `(z, sqrt(1-|z|^2) e^{i theta})` on the sphere of `C^{n+1}`.
pub fn lift(z: &Point, theta: f64) -> Result<SpherePoint> {
    z.check_closed_ball()?;
    let h = (1.0 - z.norm_sq()).max(0.0).sqrt();
    let mut c = z.coords().to_vec();
    c.push(Complex64::from_polar(h, theta));
    Ok(SpherePoint(c))
}

/// Drops the last coordinate.
pub fn project(zeta: &SpherePoint) -> Result<Point> {
    if zeta.dim() < 2 {
        return Err(Error::Parameter("projection needs a point of C^{n+1}, n >= 1".into()));
    }
    Ok(Point(zeta.0[..zeta.dim() - 1].to_vec()))
}

/// Orthonormal frame whose first vector is a prescribed unit direction.
///
/// `to_frame(w)_i = <w, b_i>` so the direction itself maps to `e_1`.
#[derive(Clone, Debug)]
pub struct Frame {
    basis: Vec<Vec<Complex64>>,
}

impl Frame {
    pub fn identity(n: usize) -> Self {
        let basis = (0..n)
            .map(|i| {
                let mut v = vec![Complex64::new(0.0, 0.0); n];
                v[i] = Complex64::new(1.0, 0.0);
                v
            })
            .collect();
        Frame { basis }
    }

    /// Frame sending `z / |z|` to `e_1`; the identity at the origin.
    pub fn aligned_with(z: &[Complex64]) -> Self {
        let n = z.len();
        let r = norm_sq(z).sqrt();
        if r == 0.0 {
            return Frame::identity(n);
        }
        let mut basis: Vec<Vec<Complex64>> = vec![z.iter().map(|c| c / r).collect()];
        // Gram-Schmidt against the standard basis, most orthogonal first.
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| basis[0][i].norm().total_cmp(&basis[0][j].norm()));
        for &k in &order {
            if basis.len() == n {
                break;
            }
            let mut v = vec![Complex64::new(0.0, 0.0); n];
            v[k] = Complex64::new(1.0, 0.0);
            for _ in 0..2 {
                for b in &basis {
                    let c = inner(&v, b);
                    for (vi, bi) in v.iter_mut().zip(b) {
                        *vi -= c * bi;
                    }
                }
            }
            let nv = norm_sq(&v).sqrt();
            if nv > 1e-8 {
                basis.push(v.into_iter().map(|c| c / nv).collect());
            }
        }
        Frame { basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn to_frame(&self, w: &[Complex64], out: &mut [Complex64]) {
        for (o, b) in out.iter_mut().zip(&self.basis) {
            *o = inner(w, b);
        }
    }

    pub fn from_frame(&self, x: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
        for (xi, b) in x.iter().zip(&self.basis) {
            for (o, bi) in out.iter_mut().zip(b) {
                *o += xi * bi;
            }
        }
    }
}

/// Tagged geometric region. Radii live in `(0, 2]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Region {
    /// `U(z, R) = { w : rho(z, w) < R }`.
    PseudoBall { center: Point, radius: f64 },
    /// Polydisk of size `R + sqrt(R (1-|z|^2))` in the normal direction and
    /// `sqrt(R)` in each complex-tangential direction.
    Polydisk { center: Point, radius: f64 },
    /// `T(zeta, R) = { z : |1 - <z, zeta>| < R }` for `zeta` on the sphere.
    Tent { vertex: SpherePoint, radius: f64 },
    /// Nonisotropic cap `{ eta on the sphere : |1 - <eta, c>| < R }`.
    BoundaryCap { center: SpherePoint, radius: f64 },
}

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0 && r <= 2.0) {
        return Err(Error::Parameter(format!("radius must lie in (0, 2], got {r}")));
    }
    Ok(())
}

impl Region {
    pub fn pseudo_ball(center: Point, radius: f64) -> Result<Self> {
        check_radius(radius)?;
        center.check_closed_ball()?;
        Ok(Region::PseudoBall { center, radius })
    }

    pub fn polydisk(center: Point, radius: f64) -> Result<Self> {
        check_radius(radius)?;
        center.check_closed_ball()?;
        Ok(Region::Polydisk { center, radius })
    }

    pub fn tent(vertex: SpherePoint, radius: f64) -> Result<Self> {
        check_radius(radius)?;
        Ok(Region::Tent { vertex, radius })
    }

    pub fn boundary_cap(center: SpherePoint, radius: f64) -> Result<Self> {
        check_radius(radius)?;
        Ok(Region::BoundaryCap { center, radius })
    }

    pub fn dim(&self) -> usize {
        match self {
            Region::PseudoBall { center, .. } | Region::Polydisk { center, .. } => center.dim(),
            Region::Tent { vertex, .. } => vertex.dim(),
            Region::BoundaryCap { center, .. } => center.dim(),
        }
    }

    pub fn radius(&self) -> f64 {
        match self {
            Region::PseudoBall { radius, .. }
            | Region::Polydisk { radius, .. }
            | Region::Tent { radius, .. }
            | Region::BoundaryCap { radius, .. } => *radius,
        }
    }

    /// Whether the region is a subset of the sphere rather than of the ball.
    pub fn is_boundary(&self) -> bool {
        matches!(self, Region::BoundaryCap { .. })
    }

    /// Whether a pseudoball's closure meets the boundary sphere,
    /// i.e. `rho(z, z/|z|) = 1 - |z| <= R`. Tents always touch.
    pub fn touches_boundary(&self) -> bool {
        match self {
            Region::PseudoBall { center, radius } => 1.0 - center.norm() <= *radius,
            Region::Tent { .. } => true,
            Region::Polydisk { center, radius } => {
                let r = center.norm();
                r + radius + (radius * (1.0 - r * r).max(0.0)).sqrt() >= 1.0
            }
            Region::BoundaryCap { .. } => true,
        }
    }

    pub fn prepare(&self) -> PreparedRegion {
        PreparedRegion::new(self)
    }
}

/// A region with its frame precomputed for repeated membership tests.
#[derive(Clone, Debug)]
pub struct PreparedRegion {
    region: Region,
    frame: Option<Frame>,
    center_norm: f64,
}

impl PreparedRegion {
    fn new(region: &Region) -> Self {
        let (frame, center_norm) = match region {
            Region::Polydisk { center, .. } => {
                (Some(Frame::aligned_with(center.coords())), center.norm())
            }
            _ => (None, 0.0),
        };
        PreparedRegion {
            region: region.clone(),
            frame,
            center_norm,
        }
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    /// Membership without dimension checks; `p` must have the region's dimension.
    pub fn contains_raw(&self, p: &[Complex64]) -> bool {
        let one = Complex64::new(1.0, 0.0);
        match &self.region {
            Region::BoundaryCap { center, radius } => {
                (norm_sq(p) - 1.0).abs() <= 1e-9 && (one - inner(p, center.coords())).norm() < *radius
            }
            _ if norm_sq(p) > 1.0 => false,
            Region::PseudoBall { center, radius } => rho_raw(center.coords(), p) < *radius,
            Region::Tent { vertex, radius } => (one - inner(p, vertex.coords())).norm() < *radius,
            Region::Polydisk { radius, .. } => {
                let frame = self.frame.as_ref().expect("polydisk frame");
                let r = self.center_norm;
                let big = *radius + (*radius * (1.0 - r * r).max(0.0)).sqrt();
                let small = radius.sqrt();
                let mut first = Complex64::new(0.0, 0.0);
                for (i, b) in frame.basis.iter().enumerate() {
                    let x = inner(p, b);
                    if i == 0 {
                        first = x;
                    } else if x.norm() >= small {
                        return false;
                    }
                }
                (Complex64::new(r, 0.0) - first).norm() < big
            }
        }
    }
}

/// Membership predicate for a region.
pub fn region_contains(region: &Region, p: &Point) -> Result<bool> {
    check_dim(region.dim(), p.dim())?;
    Ok(region.prepare().contains_raw(p.coords()))
}

/// Smallest `c` with `w` inside the polydisk `P(z, c R)`; `z` given by its frame.
pub(crate) fn polydisk_scale_needed(frame: &Frame, r: f64, w: &[Complex64], radius: f64) -> f64 {
    let h = (1.0 - r * r).max(0.0);
    let mut x = vec![Complex64::new(0.0, 0.0); w.len()];
    frame.to_frame(w, &mut x);
    let d = (Complex64::new(r, 0.0) - x[0]).norm();
    // R' + sqrt(h R') > d  <=>  sqrt(R') > (sqrt(h + 4d) - sqrt(h)) / 2
    let s = ((h + 4.0 * d).sqrt() - h.sqrt()) / 2.0;
    let mut need = s * s;
    for xi in &x[1..] {
        need = need.max(xi.norm_sqr());
    }
    need / radius
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rho_examples() {
        let z = Point::new(vec![c(0.6, 0.0)]).unwrap();
        let o = Point::origin(1);
        assert!((rho(&z, &o).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(rho(&z, &z).unwrap(), 0.0);
        let a = Point::new(vec![c(0.6, 0.8)]).unwrap();
        let b = Point::new(vec![c(0.0, 1.0)]).unwrap();
        let expected = (c(1.0, 0.0) - inner(a.coords(), b.coords())).norm();
        assert!((rho(&a, &b).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn rho_rejects_bad_input() {
        let z = Point::origin(1);
        let w = Point::origin(2);
        assert!(matches!(rho(&z, &w), Err(Error::DimensionMismatch { .. })));
        let out = Point::on_axis(1, 1.5);
        assert!(rho(&z, &out).is_err());
    }

    #[test]
    fn mobius_basics() {
        let a = Point::new(vec![c(0.3, -0.2), c(0.1, 0.4)]).unwrap();
        let at_a = mobius(&a, &a).unwrap();
        assert!(at_a.norm() < 1e-15);
        let at_0 = mobius(&a, &Point::origin(2)).unwrap();
        for (x, y) in at_0.coords().iter().zip(a.coords()) {
            assert!((x - y).norm() < 1e-15);
        }
        assert!(mobius(&Point::on_axis(2, 1.0), &a).is_err());
    }

    #[test]
    fn lift_and_project() {
        let zero = lift(&Point::origin(1), 0.0).unwrap();
        assert_eq!(zero.coords(), &[c(0.0, 0.0), c(1.0, 0.0)]);
        let z = Point::new(vec![c(0.3, 0.1), c(-0.2, 0.5)]).unwrap();
        let l = lift(&z, 1.3).unwrap();
        assert_eq!(project(&l).unwrap(), z);
        let last = l.coords()[2].norm_sqr();
        assert!((project(&l).unwrap().norm_sq() - (1.0 - last)).abs() < 1e-15);
    }

    #[test]
    fn frame_is_unitary() {
        let z = [c(0.2, 0.1), c(-0.3, 0.4), c(0.0, 0.2)];
        let f = Frame::aligned_with(&z);
        assert_eq!(f.dim(), 3);
        let mut x = [c(0.0, 0.0); 3];
        f.to_frame(&z, &mut x);
        let r = norm_sq(&z).sqrt();
        assert!((x[0] - c(r, 0.0)).norm() < 1e-14);
        assert!(x[1].norm() < 1e-14 && x[2].norm() < 1e-14);
        let w = [c(0.5, -0.1), c(0.1, 0.1), c(-0.2, 0.3)];
        let mut back = [c(0.0, 0.0); 3];
        f.to_frame(&w, &mut x);
        f.from_frame(&x, &mut back);
        for (a, b) in back.iter().zip(&w) {
            assert!((a - b).norm() < 1e-14);
        }
        assert!((norm_sq(&x) - norm_sq(&w)).abs() < 1e-14);
    }

    #[test]
    fn membership_examples() {
        let ball = Region::pseudo_ball(Point::origin(1), 0.3).unwrap();
        let bound = (2.0f64 * 0.3 - 0.09).sqrt();
        assert!(region_contains(&ball, &Point::on_axis(1, bound * 0.999)).unwrap());
        assert!(!region_contains(&ball, &Point::on_axis(1, bound * 1.001)).unwrap());
        let e1 = SpherePoint::new(vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let tent = Region::tent(e1, 0.5).unwrap();
        assert!(!region_contains(&tent, &Point::origin(2)).unwrap());
        assert!(region_contains(&tent, &Point::on_axis(2, 0.6)).unwrap());
        assert!(region_contains(&tent, &Point::origin(1)).is_err());
    }

    #[test]
    fn strict_boundaries() {
        let e1 = SpherePoint::new(vec![c(1.0, 0.0)]).unwrap();
        let tent = Region::tent(e1, 0.5).unwrap();
        assert!(!region_contains(&tent, &Point::on_axis(1, 0.5)).unwrap());
        let pd = Region::polydisk(Point::origin(1), 0.25).unwrap();
        // size R + sqrt(R) = 0.75 at the origin
        assert!(!region_contains(&pd, &Point::on_axis(1, 0.75)).unwrap());
        assert!(region_contains(&pd, &Point::on_axis(1, 0.7499)).unwrap());
    }

    #[test]
    fn radius_validation() {
        assert!(Region::pseudo_ball(Point::origin(1), 0.0).is_err());
        assert!(Region::pseudo_ball(Point::origin(1), 2.5).is_err());
        assert!(Region::pseudo_ball(Point::origin(1), 2.0).is_ok());
    }
}
