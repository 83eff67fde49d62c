//! Weight families on the ball and their class certification.

pub mod classes;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{inner, norm_sq, Point, Region, SpherePoint};
use crate::sampling::radial::{integrate, QuadConfig};
use crate::sampling::{draw_sphere, point_seed, RegionSampler};

pub use classes::{
    ap_bracket, class_certify, tau_fit, tent_mass, ClassReport, FamilySpec, LevelTrace, Refinement, RegionBracket, TauFit,
    Verdict,
};

fn default_aperture() -> f64 {
    2.0
}

fn default_inner() -> u64 {
    4096
}

/// A weight on the sphere of `C^n`, used to build induced weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryWeight {
    Constant { c: f64 },
    /// `|1 - <zeta, center>|^beta`.
    CapPower { center: Vec<Complex64>, beta: f64 },
}

impl BoundaryWeight {
    fn value(&self, zeta: &[Complex64]) -> f64 {
        match self {
            BoundaryWeight::Constant { c } => *c,
            BoundaryWeight::CapPower { center, beta } => {
                (Complex64::new(1.0, 0.0) - inner(zeta, center)).norm().powf(*beta)
            }
        }
    }

    fn validate(&self, n: Option<usize>) -> Result<()> {
        match self {
            BoundaryWeight::Constant { c } => check_positive(*c, "boundary constant"),
            BoundaryWeight::CapPower { center, beta } => {
                if let Some(n) = n {
                    crate::error::check_dim(n, center.len())?;
                }
                SpherePoint::new(center.clone())?;
                if !beta.is_finite() || *beta <= -1.0 {
                    return Err(Error::Parameter("cap power exponent must exceed -1".into()));
                }
                Ok(())
            }
        }
    }
}

/// Weight specification. Values are evaluated at points of the open ball
/// (or, for `Lifted`, at points of the ball or sphere one dimension up).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Weight {
    Constant { c: f64 },
    /// `(1 - |z|)^alpha`.
    Power { alpha: f64 },
    /// `phi(1 - |z|)` for a continuous piecewise power `phi`: `t^{a_0}` up to
    /// the first knot, then `phi(t_j) (t / t_j)^{a_j}` on `(t_j, t_{j+1}]`.
    Phi { knots: Vec<f64>, exponents: Vec<f64> },
    /// `(1 - |z|^2)^{-n} int_{I_z} w dsigma` with
    /// `I_z = { zeta : |1 - <z/|z|, zeta>| <= aperture (1 - |z|^2) }` and `I_0` the whole sphere.
    Induced {
        boundary: BoundaryWeight,
        #[serde(default = "default_aperture")]
        aperture: f64,
        #[serde(default = "default_inner")]
        inner_samples: u64,
        #[serde(default)]
        seed: u64,
    },
    /// `w_l(z_1, ..., z_{n+1}) = w(z_1, ..., z_n)`.
    Lifted { base: Box<Weight> },
    /// Average of `base` over `U(z, eps (1 - |z|^2))`.
    Regularized {
        base: Box<Weight>,
        eps: f64,
        #[serde(default = "default_inner")]
        inner_samples: u64,
        #[serde(default)]
        seed: u64,
    },
    Product { factors: Vec<Weight> },
    Pow { base: Box<Weight>, exponent: f64 },
}

fn check_positive(x: f64, what: &str) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Parameter(format!("{what} must be positive and finite, got {x}")));
    }
    Ok(())
}

impl Weight {
    pub fn constant(c: f64) -> Self {
        Weight::Constant { c }
    }

    pub fn power(alpha: f64) -> Self {
        Weight::Power { alpha }
    }

    pub fn lifted(base: Weight) -> Self {
        Weight::Lifted { base: Box::new(base) }
    }

    pub fn pow(base: Weight, exponent: f64) -> Self {
        Weight::Pow { base: Box::new(base), exponent }
    }

    /// Structural validation of parameters.
    pub fn validate(&self) -> Result<()> {
        match self {
            Weight::Constant { c } => check_positive(*c, "constant"),
            Weight::Power { alpha } => {
                if !alpha.is_finite() {
                    return Err(Error::Parameter("power exponent must be finite".into()));
                }
                Ok(())
            }
            Weight::Phi { knots, exponents } => {
                if exponents.len() != knots.len() + 1 {
                    return Err(Error::Parameter("phi needs one more exponent than knots".into()));
                }
                if knots.windows(2).any(|w| w[0] >= w[1]) || knots.iter().any(|k| !(*k > 0.0 && *k <= 1.0)) {
                    return Err(Error::Parameter("phi knots must increase within (0, 1]".into()));
                }
                let up = exponents.iter().all(|a| *a >= 0.0);
                let down = exponents.iter().all(|a| *a <= 0.0);
                if !(up || down) || exponents.iter().any(|a| !a.is_finite()) {
                    return Err(Error::Parameter("phi exponents must share a sign (monotone phi)".into()));
                }
                Ok(())
            }
            Weight::Induced { boundary, aperture, inner_samples, .. } => {
                boundary.validate(None)?;
                check_positive(*aperture, "aperture")?;
                if *inner_samples == 0 {
                    return Err(Error::Parameter("inner_samples must be positive".into()));
                }
                Ok(())
            }
            Weight::Lifted { base } => base.validate(),
            Weight::Regularized { base, eps, inner_samples, .. } => {
                if !(*eps > 0.0 && *eps < 1.0) {
                    return Err(Error::Parameter(format!("eps must lie in (0, 1), got {eps}")));
                }
                if *inner_samples == 0 {
                    return Err(Error::Parameter("inner_samples must be positive".into()));
                }
                base.validate()
            }
            Weight::Product { factors } => {
                if factors.is_empty() {
                    return Err(Error::Parameter("product needs at least one factor".into()));
                }
                factors.iter().try_for_each(Weight::validate)
            }
            Weight::Pow { base, exponent } => {
                if !exponent.is_finite() {
                    return Err(Error::Parameter("pow exponent must be finite".into()));
                }
                base.validate()
            }
        }
    }

    /// The exponent `alpha` when the weight is exactly `(1 - |z|)^alpha`.
    pub fn power_exponent(&self) -> Option<f64> {
        match self {
            Weight::Power { alpha } => Some(*alpha),
            Weight::Constant { .. } => Some(0.0),
            _ => None,
        }
    }

    /// Unchecked evaluation; callers guarantee `|z| < 1`.
    pub fn value(&self, z: &[Complex64]) -> f64 {
        match self {
            Weight::Constant { c } => *c,
            Weight::Power { alpha } => (1.0 - norm_sq(z).sqrt()).powf(*alpha),
            Weight::Phi { knots, exponents } => phi(knots, exponents, 1.0 - norm_sq(z).sqrt()),
            Weight::Induced { boundary, aperture, inner_samples, seed } => {
                induced(boundary, *aperture, *inner_samples, *seed, z)
            }
            Weight::Lifted { base } => base.value(&z[..z.len() - 1]),
            Weight::Regularized { base, eps, inner_samples, seed } => {
                regularized(base, *eps, *inner_samples, *seed, z)
            }
            Weight::Product { factors } => factors.iter().map(|f| f.value(z)).product(),
            Weight::Pow { base, exponent } => base.value(z).powf(*exponent),
        }
    }
}

fn phi(knots: &[f64], exponents: &[f64], t: f64) -> f64 {
    let mut value = 1.0;
    let mut from = 0.0;
    for (j, a) in exponents.iter().enumerate() {
        let end = knots.get(j).copied().unwrap_or(f64::INFINITY);
        if j == 0 {
            if t <= end {
                return t.powf(*a);
            }
            value = end.powf(*a);
        } else {
            if t <= end {
                return value * (t / from).powf(*a);
            }
            value *= (end / from).powf(*a);
        }
        from = end;
    }
    value
}

/// Normalised surface measure of `{ zeta in S^{2m-1} : |1 - <zeta, c>| < r }`.
pub fn cap_measure(m: usize, r: f64) -> f64 {
    if r >= 2.0 {
        return 1.0;
    }
    let cfg = QuadConfig { abs_tol: 1e-14, rel_tol: 1e-11, max_depth: 30 };
    let arc = |rho: f64| -> f64 {
        // fraction of the circle |x| = rho inside the disk D(1, r)
        if rho <= 0.0 {
            return if r > 1.0 { 1.0 } else { 0.0 };
        }
        let c = (1.0 + rho * rho - r * r) / (2.0 * rho);
        if c >= 1.0 {
            0.0
        } else if c <= -1.0 {
            1.0
        } else {
            c.acos() / std::f64::consts::PI
        }
    };
    if m == 1 {
        return arc(1.0);
    }
    let f = |rho: f64| 2.0 * (m as f64 - 1.0) * rho * (1.0 - rho * rho).max(0.0).powi(m as i32 - 2) * arc(rho);
    let lo = (1.0 - r).abs();
    let mut breaks = vec![0.0];
    if lo > 0.0 && lo < 1.0 {
        breaks.push(lo);
    }
    breaks.push(1.0);
    breaks.windows(2).map(|w| integrate(f, w[0], w[1], &cfg)).sum()
}

fn induced(boundary: &BoundaryWeight, aperture: f64, inner: u64, seed: u64, z: &[Complex64]) -> f64 {
    let n = z.len();
    let r2 = norm_sq(z);
    let h = 1.0 - r2;
    let reach = if r2 == 0.0 { f64::INFINITY } else { aperture * h };
    if let BoundaryWeight::Constant { c } = boundary {
        let mass = if reach >= 2.0 { 1.0 } else { cap_measure(n, reach) };
        return c * mass / h.powi(n as i32);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(point_seed(seed, z));
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    if reach >= 2.0 {
        let mut total = 0.0;
        for _ in 0..inner {
            draw_sphere(&mut rng, &mut y);
            total += boundary.value(&y);
        }
        return total / inner as f64 / h.powi(n as i32);
    }
    let dir = SpherePoint::normalized(z.to_vec()).expect("nonzero point");
    let cap = Region::boundary_cap(dir, reach).expect("radius in range");
    let sampler = RegionSampler::new(&cap).expect("cap sampler");
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    let mut total = 0.0;
    for _ in 0..inner {
        if sampler.propose(&mut rng, &mut y, &mut x) {
            total += boundary.value(&y);
        }
    }
    sampler.enclosing_measure() * total / inner as f64 / h.powi(n as i32)
}

fn regularized(base: &Weight, eps: f64, inner: u64, seed: u64, z: &[Complex64]) -> f64 {
    let n = z.len();
    let h = 1.0 - norm_sq(z);
    let radius = (eps * h).min(2.0);
    let ball = Region::pseudo_ball(Point::new(z.to_vec()).expect("finite"), radius).expect("radius in range");
    let sampler = RegionSampler::new(&ball).expect("ball sampler");
    let mut rng = ChaCha8Rng::seed_from_u64(point_seed(seed, z));
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    let (mut total, mut kept, mut attempts) = (0.0, 0u64, 0u64);
    let cap = inner.saturating_mul(1000);
    while kept < inner && attempts < cap {
        attempts += 1;
        if sampler.propose(&mut rng, &mut y, &mut x) {
            total += base.value(&y);
            kept += 1;
        }
    }
    if kept == 0 {
        base.value(z)
    } else {
        total / kept as f64
    }
}

/// Checked evaluation at an interior point.
pub fn eval_weight(w: &Weight, z: &Point) -> Result<f64> {
    w.validate()?;
    let c = z.coords();
    let inner_point = match w {
        Weight::Lifted { .. } => {
            if z.dim() < 2 {
                return Err(Error::Parameter("lifted weights live in dimension at least 2".into()));
            }
            if z.norm_sq() > 1.0 + 1e-12 {
                return Err(Error::Domain("lifted weights are evaluated on the closed ball".into()));
            }
            &c[..c.len() - 1]
        }
        _ => c,
    };
    if norm_sq(inner_point) >= 1.0 {
        return Err(Error::Domain("weights are evaluated at interior points (|z| < 1)".into()));
    }
    if let Weight::Induced { boundary, .. } = w {
        boundary.validate(Some(z.dim()))?;
    }
    let v = w.value(c);
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::Domain(format!("weight value {v} is not positive and finite")));
    }
    Ok(v)
}

/// Wraps `w` as its regularisation over `U(z, eps (1 - |z|^2))`.
pub fn regularize(w: Weight, eps: f64, inner_samples: u64, seed: u64) -> Result<Weight> {
    let r = Weight::Regularized { base: Box::new(w), eps, inner_samples, seed };
    r.validate()?;
    Ok(r)
}
