use besov::geometry::Point;
use besov::kernels::{ball_potential, bergman_project, besov_norm, sphere_potential, HoloPolynomial, PotentialMode, TestFunction};
use besov::sampling::SamplerConfig;
use besov::weights::Weight;
use num_complex::Complex64;

#[test]
fn projection_kills_antiholomorphic_monomials() {
    let cfg = SamplerConfig::new(21, 200_000).unwrap();
    for t in [0.0, 0.5, 0.9] {
        let z = Point::on_axis(2, t);
        let e = bergman_project(|y| y[0].conj(), &z, &cfg).unwrap();
        assert!(e.agrees_with(Complex64::new(0.0, 0.0), 4.0), "{:?}", e);
    }
}

#[test]
fn sphere_potential_of_one_is_one_at_the_centre_and_bounded() {
    let cfg = SamplerConfig::new(22, 50_000).unwrap();
    let at0 = sphere_potential(|_| 1.0, 0.5, &Point::origin(2), &cfg).unwrap();
    assert!((at0.value - 1.0).abs() < 1e-12);
    let mut last = at0.value;
    for t in [0.5, 0.9, 0.99, 0.999] {
        let e = sphere_potential(|_| 1.0, 0.5, &Point::on_axis(2, t), &cfg).unwrap();
        assert!(e.value >= last - 4.0 * e.stderr);
        assert!(e.value < 10.0, "K_s[1] at |z| = {t}: {}", e.value);
        last = e.value;
    }
}

#[test]
fn modulus_potential_dominates_holomorphic_one() {
    let cfg = SamplerConfig::new(23, 20_000).unwrap();
    let f = TestFunction::Constant { c: 1.0 };
    for t in [0.3, 0.9] {
        let z = Point::on_axis(1, t);
        let m = ball_potential(&f, 0.8, &z, PotentialMode::Modulus, &cfg).unwrap();
        let h = ball_potential(&f, 0.8, &z, PotentialMode::Holomorphic, &cfg).unwrap();
        assert!(h.value.norm() <= m.value.re + 3.0 * (h.stderr + m.stderr));
    }
}

#[test]
fn besov_norm_of_zero_is_exactly_zero() {
    let cfg = SamplerConfig::new(24, 100).unwrap();
    let zero = TestFunction::Poly { poly: HoloPolynomial::zero(1).unwrap() };
    let e = besov_norm(&zero, 1, 0.5, 2.0, None, &Weight::power(0.5), &cfg).unwrap();
    assert_eq!(e.value, 0.0);
    assert_eq!(e.stderr, 0.0);
}

#[test]
fn besov_norm_grows_with_the_kernel_pole() {
    let cfg = SamplerConfig::new(25, 20_000).unwrap();
    let w = Weight::constant(1.0);
    let norms: Vec<f64> = [0.5, 0.9, 0.99]
        .iter()
        .map(|&r| {
            let f = TestFunction::kernel(&Point::on_axis(1, r), 2.0, 0.0).unwrap();
            besov_norm(&f, 1, 0.5, 2.0, None, &w, &cfg).unwrap().value
        })
        .collect();
    assert!(norms[0] < norms[1] && norms[1] < norms[2], "{norms:?}");
}
