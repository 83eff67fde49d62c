//! Independent oracles: adaptive Simpson quadrature and closed-form tent integrals.
#![allow(dead_code)]

use std::f64::consts::PI;

fn simpson_step<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson on `[a, b]`.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, 24)
}

/// Area of the intersection of the unit disk with the disk of radius `b` at distance `d`.
pub fn lens_area(b: f64, d: f64) -> f64 {
    if d >= 1.0 + b {
        return 0.0;
    }
    if d <= (1.0 - b).abs() {
        return PI * b.min(1.0).powi(2);
    }
    let a1 = ((d * d + 1.0 - b * b) / (2.0 * d)).clamp(-1.0, 1.0).acos();
    let a2 = ((d * d + b * b - 1.0) / (2.0 * d * b)).clamp(-1.0, 1.0).acos();
    let k = ((-d + 1.0 + b) * (d + 1.0 - b) * (d - 1.0 + b) * (d + 1.0 + b)).max(0.0).sqrt();
    a1 + b * b * a2 - 0.5 * k
}

/// `sigma{eta in S^{2n-1} : |1 - r eta_1| < R}` for `n` in {1, 2}.
pub fn shell_fraction(n: usize, r: f64, big_r: f64) -> f64 {
    if r == 0.0 {
        return if big_r > 1.0 { 1.0 } else { 0.0 };
    }
    match n {
        1 => {
            let c = (1.0 + r * r - big_r * big_r) / (2.0 * r);
            if c <= -1.0 {
                1.0
            } else if c >= 1.0 {
                0.0
            } else {
                c.acos() / PI
            }
        }
        2 => lens_area(big_r / r, 1.0 / r) / PI,
        _ => panic!("oracle covers n = 1, 2"),
    }
}

/// `int_{T(e_1, R)} (1 - |z|)^alpha dv` for `alpha > -1`, normalised `v(B) = 1`.
///
/// Uses `u = (1 - r)^{alpha + 1} / (alpha + 1)` to absorb the boundary factor.
pub fn power_tent_mass(n: usize, alpha: f64, big_r: f64) -> f64 {
    assert!(alpha > -1.0);
    let a1 = alpha + 1.0;
    let lo = (1.0 - big_r).max(0.0);
    let umax = (1.0 - lo).powf(a1) / a1;
    let g = |u: f64| {
        let r = 1.0 - (a1 * u).powf(1.0 / a1);
        2.0 * n as f64 * r.powi(2 * n as i32 - 1) * shell_fraction(n, r, big_r)
    };
    let scale = big_r.powf(n as f64 + 1.0 + alpha);
    simpson(g, 0.0, umax, 1e-9 * scale)
}

/// Bekollé bracket of `(1 - |z|)^alpha` over `T(e_1, R)`.
pub fn power_tent_bracket(n: usize, alpha: f64, p: f64, big_r: f64) -> f64 {
    let v = power_tent_mass(n, 0.0, big_r);
    let w = power_tent_mass(n, alpha, big_r) / v;
    let d = power_tent_mass(n, -alpha / (p - 1.0), big_r) / v;
    w * d.powf(p - 1.0)
}

pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    (0..m)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=m {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}
