//! Radial-derivative calculus, potentials, the Bergman projector and Besov norms.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{inner, mobius_into, norm_sq, Point, Region};
use crate::sampling::{radial_integrate, QuadConfig};
use crate::sampling::{
    chunk_rng, draw_sphere, integrate_ball, integrate_ball_complex, par_chunks, Estimate, Moments, Proposal,
    RegionSampler, SamplerConfig,
};
use crate::weights::Weight;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Weight of the radial component in the defensive mixtures used below.
pub const MIXTURE_LAMBDA: f64 = 0.5;

/// One monomial `c z^m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub exponents: Vec<u32>,
    pub coeff: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct PolyRepr {
    n: usize,
    terms: Vec<Term>,
}

/// Sparse holomorphic polynomial in `n` variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolyRepr", into = "PolyRepr")]
pub struct HoloPolynomial {
    n: usize,
    terms: BTreeMap<Vec<u32>, Complex64>,
}

impl TryFrom<PolyRepr> for HoloPolynomial {
    type Error = Error;
    fn try_from(r: PolyRepr) -> Result<Self> {
        let mut p = HoloPolynomial::zero(r.n)?;
        for t in r.terms {
            p.add_term(&t.exponents, t.coeff)?;
        }
        Ok(p)
    }
}

impl From<HoloPolynomial> for PolyRepr {
    fn from(p: HoloPolynomial) -> Self {
        PolyRepr {
            n: p.n,
            terms: p.terms.into_iter().map(|(exponents, coeff)| Term { exponents, coeff }).collect(),
        }
    }
}

impl HoloPolynomial {
    pub fn zero(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("polynomials need at least one variable".into()));
        }
        Ok(HoloPolynomial { n, terms: BTreeMap::new() })
    }

    pub fn monomial(exponents: &[u32], coeff: Complex64) -> Result<Self> {
        let mut p = HoloPolynomial::zero(exponents.len())?;
        p.add_term(exponents, coeff)?;
        Ok(p)
    }

    pub fn add_term(&mut self, exponents: &[u32], coeff: Complex64) -> Result<()> {
        check_dim(self.n, exponents.len())?;
        let e = self.terms.entry(exponents.to_vec()).or_insert(ZERO);
        *e += coeff;
        if *e == ZERO {
            self.terms.remove(exponents);
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.iter().sum()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], Complex64)> {
        self.terms.iter().map(|(m, c)| (m.as_slice(), *c))
    }

    /// Monomial sum with per-variable power tables.
    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        let deg = self.degree() as usize;
        let mut powers = vec![ONE; self.n * (deg + 1)];
        for (i, zi) in z.iter().enumerate().take(self.n) {
            for d in 1..=deg {
                powers[i * (deg + 1) + d] = powers[i * (deg + 1) + d - 1] * zi;
            }
        }
        self.terms
            .iter()
            .map(|(m, c)| {
                m.iter()
                    .enumerate()
                    .fold(*c, |acc, (i, &e)| acc * powers[i * (deg + 1) + e as usize])
            })
            .sum()
    }

    /// Multiplies the coefficient of `z^m` by `(1 + |m|)^k`.
    pub fn radial_power(&self, k: i32) -> HoloPolynomial {
        HoloPolynomial {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let deg: u32 = m.iter().sum();
                    (m.clone(), c * (1.0 + deg as f64).powi(k))
                })
                .collect(),
        }
    }
}

/// `(I + R)^k f` for polynomials.
pub fn radial_power(f: &HoloPolynomial, k: i32) -> HoloPolynomial {
    f.radial_power(k)
}

/// Test functions on the ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestFunction {
    Poly { poly: HoloPolynomial },
    /// `z -> (1 - |pole|^2)^a (1 - <z, pole>)^{-b}` on the principal branch.
    Kernel { pole: Vec<Complex64>, b: f64, #[serde(default)] a: f64 },
    /// Modulus of a kernel function, a positive profile.
    KernelModulus { pole: Vec<Complex64>, b: f64, #[serde(default)] a: f64 },
    Indicator { region: Region },
    Constant { c: f64 },
}

/// `(1 - u)^{-beta}` on the principal branch.
#[inline]
pub(crate) fn cpow_neg(one_minus_u: Complex64, beta: f64) -> Complex64 {
    (-beta * one_minus_u.ln()).exp()
}

impl TestFunction {
    pub fn kernel(pole: &Point, b: f64, a: f64) -> Result<Self> {
        if pole.norm_sq() >= 1.0 {
            return Err(Error::Domain("kernel poles must lie in the open ball".into()));
        }
        if !(b > 0.0) {
            return Err(Error::Parameter("kernel exponent b must be positive".into()));
        }
        Ok(TestFunction::Kernel { pole: pole.coords().to_vec(), b, a })
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            TestFunction::Poly { poly } => check_dim(n, poly.dim()),
            TestFunction::Kernel { pole, b, a } | TestFunction::KernelModulus { pole, b, a } => {
                check_dim(n, pole.len())?;
                if norm_sq(pole) >= 1.0 {
                    return Err(Error::Domain("kernel poles must lie in the open ball".into()));
                }
                if !(*b > 0.0) || !a.is_finite() || *a < 0.0 {
                    return Err(Error::Parameter("kernel needs b > 0 and a >= 0".into()));
                }
                Ok(())
            }
            TestFunction::Indicator { region } => {
                if region.is_boundary() {
                    return Err(Error::Parameter("indicator regions must lie in the ball".into()));
                }
                check_dim(n, region.dim())
            }
            TestFunction::Constant { c } => {
                if !c.is_finite() {
                    return Err(Error::Parameter("constant must be finite".into()));
                }
                Ok(())
            }
        }
    }

    pub fn is_holomorphic(&self) -> bool {
        matches!(self, TestFunction::Poly { .. } | TestFunction::Kernel { .. } | TestFunction::Constant { .. })
    }

    pub fn is_zero(&self) -> bool {
        match self {
            TestFunction::Poly { poly } => poly.is_zero(),
            TestFunction::Constant { c } => *c == 0.0,
            _ => false,
        }
    }

    /// A point where the function concentrates, if any.
    pub fn focus(&self) -> Option<&[Complex64]> {
        match self {
            TestFunction::Kernel { pole, .. } | TestFunction::KernelModulus { pole, .. } => Some(pole),
            _ => None,
        }
    }

    /// Evaluates the function; callers guarantee matching dimension.
    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        match self {
            TestFunction::Poly { poly } => poly.eval(z),
            TestFunction::Kernel { pole, b, a } => {
                let scale = (1.0 - norm_sq(pole)).powf(*a);
                cpow_neg(ONE - inner(z, pole), *b) * scale
            }
            TestFunction::KernelModulus { pole, b, a } => {
                let scale = (1.0 - norm_sq(pole)).powf(*a);
                Complex64::new((ONE - inner(z, pole)).norm().powf(-*b) * scale, 0.0)
            }
            TestFunction::Indicator { region } => {
                if region.prepare().contains_raw(z) {
                    ONE
                } else {
                    ZERO
                }
            }
            TestFunction::Constant { c } => Complex64::new(*c, 0.0),
        }
    }

    /// Closed form of `(I + R)^k f` for holomorphic test functions.
    pub fn radial_derivative(&self, k: u32) -> Result<RadialDerivative> {
        match self {
            TestFunction::Poly { poly } => Ok(RadialDerivative::Poly(poly.radial_power(k as i32))),
            TestFunction::Constant { c } => Ok(RadialDerivative::Constant(*c)),
            TestFunction::Kernel { pole, b, a } => {
                let scale = (1.0 - norm_sq(pole)).powf(*a);
                // (I + R)(1 - u)^{-beta} = (1 - beta)(1 - u)^{-beta} + beta (1 - u)^{-beta - 1}
                let mut coeffs = vec![scale];
                for _ in 0..k {
                    let mut next = vec![0.0; coeffs.len() + 1];
                    for (j, c) in coeffs.iter().enumerate() {
                        let beta = b + j as f64;
                        next[j] += c * (1.0 - beta);
                        next[j + 1] += c * beta;
                    }
                    coeffs = next;
                }
                Ok(RadialDerivative::Kernel { pole: pole.clone(), b: *b, coeffs })
            }
            _ => Err(Error::Parameter("radial derivatives need a holomorphic test function".into())),
        }
    }
}

/// `(I + R)^k` applied to a holomorphic test function.
#[derive(Clone, Debug)]
pub enum RadialDerivative {
    Poly(HoloPolynomial),
    Constant(f64),
    /// `sum_j coeffs[j] (1 - <z, pole>)^{-(b + j)}`.
    Kernel { pole: Vec<Complex64>, b: f64, coeffs: Vec<f64> },
}

impl RadialDerivative {
    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        match self {
            RadialDerivative::Poly(p) => p.eval(z),
            RadialDerivative::Constant(c) => Complex64::new(*c, 0.0),
            RadialDerivative::Kernel { pole, b, coeffs } => {
                let w = ONE - inner(z, pole);
                let base = cpow_neg(w, *b);
                let inv = 1.0 / w;
                let mut acc = ZERO;
                let mut pw = base;
                for c in coeffs {
                    acc += pw * *c;
                    pw *= inv;
                }
                acc
            }
        }
    }
}

/// `(I + R)^{-m} f(z) = (1 / Gamma(m)) int_0^1 (log 1/r)^{m-1} f(r z) dr`.
pub fn inv_radial<F>(f: F, m: f64, z: &Point, cfg: &QuadConfig) -> Result<Complex64>
where
    F: Fn(&[Complex64]) -> Complex64,
{
    if !(m > 0.0) {
        return Err(Error::Domain(format!("order must be positive, got {m}")));
    }
    z.check_closed_ball()?;
    let at = |r: f64| f(&z.coords().iter().map(|c| c * r).collect::<Vec<_>>());
    let re = radial_integrate(|r| at(r).re, m, cfg)?;
    let im = radial_integrate(|r| at(r).im, m, cfg)?;
    Ok(Complex64::new(re, im) / libm::tgamma(m))
}

/// Kernel used by the ball potentials.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialMode {
    /// `|1 - <z, y>|^{-(n + 1 - t)}`.
    Modulus,
    /// `(1 - <z, y>)^{-(n + 1 - t)}`.
    Holomorphic,
}

#[inline]
pub(crate) fn potential_kernel(z: &[Complex64], y: &[Complex64], beta: f64, mode: PotentialMode) -> Complex64 {
    let w = ONE - inner(z, y);
    match mode {
        PotentialMode::Modulus => Complex64::new(w.norm().powf(-beta), 0.0),
        PotentialMode::Holomorphic => cpow_neg(w, beta),
    }
}

/// Whether the potential kernel exponent `n + 1 - t` is nonpositive.
pub fn bounded_kernel_regime(n: usize, t: f64) -> bool {
    t >= n as f64 + 1.0
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Parameter(format!("potential order t must be positive, got {t}")));
    }
    Ok(())
}

/// `int f(y) K(z, y) dv(y)` with the modulus or holomorphic kernel of order `t`.
///
/// Indicators are integrated over their region directly; other functions use
/// a defensive mixture concentrated at `z` and at the function's pole.
pub fn ball_potential(
    f: &TestFunction,
    t: f64,
    z: &Point,
    mode: PotentialMode,
    cfg: &SamplerConfig,
) -> Result<Estimate<Complex64>> {
    check_t(t)?;
    cfg.validate()?;
    let n = z.dim();
    f.validate(n)?;
    z.check_closed_ball()?;
    let beta = n as f64 + 1.0 - t;
    let zc = z.coords();
    if let TestFunction::Indicator { region } = f {
        let sample = RegionSampler::new(region)?.sample(cfg)?;
        let re = sample.integral(|y| potential_kernel(zc, y, beta, mode).re)?;
        let im = sample.integral(|y| potential_kernel(zc, y, beta, mode).im)?;
        return Ok(Estimate {
            value: Complex64::new(re.value, im.value),
            stderr: re.stderr.hypot(im.stderr),
            samples: re.samples,
            seed: cfg.seed,
        });
    }
    let center = f.focus().unwrap_or(zc);
    let proposal = Proposal::mixture(center, MIXTURE_LAMBDA, cfg.gamma)?;
    integrate_ball_complex(n, &proposal, cfg.seed, cfg.samples, |y| f.eval(y) * potential_kernel(zc, y, beta, mode))
}

/// `K_s[f](z) = int_S f(eta) |1 - <z, eta>|^{-(m - s)} dsigma(eta)` on the sphere of `C^m`.
///
/// Uses a defensive mixture of `sigma` and its image under `phi_a`,
/// `a` the (clipped) evaluation point, whose density is the invariant Poisson kernel.
pub fn sphere_potential<F>(f: F, s: f64, z: &Point, cfg: &SamplerConfig) -> Result<Estimate>
where
    F: Fn(&[Complex64]) -> f64 + Sync,
{
    cfg.validate()?;
    let m = z.dim();
    if !(s > 0.0 && s < m as f64) {
        return Err(Error::Parameter(format!("s must lie in (0, {m}), got {s}")));
    }
    z.check_closed_ball()?;
    let zc = z.coords();
    let r = z.norm();
    let a: Vec<Complex64> = if r > 0.999 { zc.iter().map(|c| c * (0.999 / r)).collect() } else { zc.to_vec() };
    let ha = 1.0 - norm_sq(&a);
    let beta = m as f64 - s;
    let lambda = MIXTURE_LAMBDA;
    let parts = par_chunks(cfg.samples, |c, count| {
        let mut rng = chunk_rng(cfg.seed, c);
        let mut x = vec![ZERO; m];
        let mut eta = vec![ZERO; m];
        let mut mom = Moments::default();
        for _ in 0..count {
            use rand::Rng;
            if rng.random::<f64>() < lambda {
                draw_sphere(&mut rng, &mut eta);
            } else {
                draw_sphere(&mut rng, &mut x);
                mobius_into(&a, &x, &mut eta);
            }
            let poisson = (ha / (ONE - inner(&eta, &a)).norm_sqr()).powi(m as i32);
            let q = lambda + (1.0 - lambda) * poisson;
            let k = (ONE - inner(zc, &eta)).norm().powf(-beta);
            mom.push(f(&eta) * k / q);
        }
        mom
    });
    let mut all = Moments::default();
    parts.iter().for_each(|p| all.merge(p));
    Ok(Estimate { value: all.mean, stderr: all.stderr(), samples: all.n, seed: cfg.seed })
}

/// `Bf(z) = int f(y) (1 - <z, y>)^{-(n+1)} dv(y)`.
pub fn bergman_project<F>(f: F, z: &Point, cfg: &SamplerConfig) -> Result<Estimate<Complex64>>
where
    F: Fn(&[Complex64]) -> Complex64 + Sync,
{
    cfg.validate()?;
    if z.norm_sq() >= 1.0 {
        return Err(Error::Domain("the Bergman projection is evaluated at interior points".into()));
    }
    let n = z.dim();
    let zc = z.coords();
    let proposal = Proposal::mixture(zc, MIXTURE_LAMBDA, 0.0)?;
    integrate_ball_complex(n, &proposal, cfg.seed, cfg.samples, |y| f(y) / (ONE - inner(zc, y)).powi(n as i32 + 1))
}

/// Radial tilt used by [`besov_norm`], kept inside `[-0.95, 50]`.
pub fn besov_tilt(s: f64, p: f64, k: u32, w: &Weight) -> f64 {
    let base = (k as f64 - s) * p - 1.0 + w.power_exponent().unwrap_or(0.0);
    base.clamp(-0.95, 50.0)
}

/// Smallest admissible order `floor(s) + 1` (and at least 0).
pub fn default_order(s: f64) -> u32 {
    (s.floor() + 1.0).max(0.0) as u32
}

/// `( int |(I+R)^k f|^p (1 - |y|^2)^{(k-s)p-1} w dv )^{1/p}`.
pub fn besov_norm(
    f: &TestFunction,
    n: usize,
    s: f64,
    p: f64,
    k: Option<u32>,
    w: &Weight,
    cfg: &SamplerConfig,
) -> Result<Estimate> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::Parameter("p > 1 required".into()));
    }
    if !s.is_finite() {
        return Err(Error::Parameter("s must be finite".into()));
    }
    let k = k.unwrap_or_else(|| default_order(s));
    if (k as f64) <= s {
        return Err(Error::Parameter(format!("k > s required (k = {k}, s = {s})")));
    }
    cfg.validate()?;
    w.validate()?;
    f.validate(n)?;
    if !f.is_holomorphic() {
        return Err(Error::Parameter("Besov norms need a holomorphic test function".into()));
    }
    if f.is_zero() {
        return Ok(Estimate { value: 0.0, stderr: 0.0, samples: cfg.samples, seed: cfg.seed });
    }
    let d = f.radial_derivative(k)?;
    let expo = (k as f64 - s) * p - 1.0;
    let gamma = besov_tilt(s, p, k, w);
    let proposal = match f.focus() {
        Some(pole) => Proposal::mixture(pole, MIXTURE_LAMBDA, gamma)?,
        None => Proposal::radial(gamma)?,
    };
    let integral = integrate_ball(n, &proposal, cfg.seed, cfg.samples, |y| {
        let h = 1.0 - norm_sq(y);
        d.eval(y).norm().powf(p) * h.powf(expo) * w.value(y)
    })?;
    let value = integral.value.max(0.0).powf(1.0 / p);
    let stderr = if integral.value > 0.0 {
        integral.stderr * integral.value.powf(1.0 / p - 1.0) / p
    } else {
        0.0
    };
    Ok(Estimate { value, stderr, samples: integral.samples, seed: cfg.seed })
}

/// `L^p(w dv)` norm of a test function, `( int |f|^p w dv )^{1/p}`.
pub fn weighted_lp_norm(f: &TestFunction, n: usize, p: f64, w: &Weight, cfg: &SamplerConfig) -> Result<Estimate> {
    f.validate(n)?;
    let integral = if let TestFunction::Indicator { region } = f {
        RegionSampler::new(region)?.sample(cfg)?.integral(|y| w.value(y))?
    } else {
        let gamma = w.power_exponent().unwrap_or(0.0).clamp(-0.95, 50.0);
        let proposal = match f.focus() {
            Some(pole) => Proposal::mixture(pole, MIXTURE_LAMBDA, gamma)?,
            None => Proposal::radial(gamma)?,
        };
        integrate_ball(n, &proposal, cfg.seed, cfg.samples, |y| f.eval(y).norm().powf(p) * w.value(y))?
    };
    let value = integral.value.max(0.0).powf(1.0 / p);
    let stderr = if integral.value > 0.0 { integral.stderr * integral.value.powf(1.0 / p - 1.0) / p } else { 0.0 };
    Ok(Estimate { value, stderr, samples: integral.samples, seed: cfg.seed })
}
