use besov::carleson::{tent_test, DiscreteMeasure, TentFamily};
use besov::geometry::{inner, mobius, rho, Point};
use besov::kernels::{inv_radial, radial_power, HoloPolynomial};
use besov::sampling::QuadConfig;
use num_complex::Complex64;
use proptest::prelude::*;

/// Points of the open ball in `C^n`, built from a direction and a radius below `max_r`.
fn ball_point(n: usize, max_r: f64) -> impl Strategy<Value = Point> {
    (prop::collection::vec(-1.0f64..1.0, 2 * n), 0.0f64..max_r).prop_filter_map("zero direction", |(v, r)| {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-3 {
            return None;
        }
        let scaled: Vec<f64> = v.iter().map(|x| x * r / norm).collect();
        Point::from_re_im(&scaled).ok()
    })
}

fn measure(n: usize) -> impl Strategy<Value = DiscreteMeasure> {
    prop::collection::vec((ball_point(n, 0.999), 1e-3f64..10.0), 1..12).prop_map(move |atoms| {
        let mut mu = DiscreteMeasure::new(n).unwrap();
        for (z, m) in atoms {
            mu.push(z, m).unwrap();
        }
        mu
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mobius_is_an_involution((a, z) in (1usize..4).prop_flat_map(|n| (ball_point(n, 0.99), ball_point(n, 0.999)))) {
        let back = mobius(&a, &mobius(&a, &z).unwrap()).unwrap();
        for (x, y) in back.coords().iter().zip(z.coords()) {
            prop_assert!((x - y).norm() < 1e-9);
        }
    }

    #[test]
    fn mobius_norm_identity((a, z) in (1usize..4).prop_flat_map(|n| (ball_point(n, 0.99), ball_point(n, 0.99)))) {
        let pz = mobius(&a, &z).unwrap();
        let lhs = (1.0 - pz.norm_sq()) * (Complex64::new(1.0, 0.0) - inner(z.coords(), a.coords())).norm_sqr();
        let rhs = (1.0 - a.norm_sq()) * (1.0 - z.norm_sq());
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn rho_symmetric_bounded_and_zero_on_diagonal((z, w) in (1usize..4).prop_flat_map(|n| (ball_point(n, 1.0), ball_point(n, 1.0)))) {
        let d = rho(&z, &w).unwrap();
        prop_assert_eq!(d, rho(&w, &z).unwrap());
        prop_assert!((0.0..=2.0).contains(&d));
        prop_assert!(rho(&z, &z).unwrap() < 1e-12);
    }

    #[test]
    fn tent_test_scales_linearly_with_mass(mu in measure(2), c in 0.01f64..100.0, e in 0.5f64..4.0) {
        let fam = TentFamily::for_measure(&mu);
        let a = tent_test(&mu, e, &fam).unwrap();
        let b = tent_test(&mu.scaled(c).unwrap(), e, &fam).unwrap();
        prop_assert!((b.constant - c * a.constant).abs() <= 1e-12 * b.constant.max(1.0));
    }

    #[test]
    fn tent_test_is_monotone_in_the_measure(mu in measure(1), extra in ball_point(1, 0.999), m in 1e-3f64..1.0, e in 0.5f64..4.0) {
        let fam = TentFamily::for_measure(&mu);
        let before = tent_test(&mu, e, &fam).unwrap().constant;
        let mut bigger = mu.clone();
        bigger.push(extra, m).unwrap();
        prop_assert!(tent_test(&bigger, e, &fam).unwrap().constant >= before);
    }

    #[test]
    fn lp_norm_scales_as_root(mu in measure(2), c in 0.01f64..100.0, p in 1.1f64..6.0) {
        let f = |z: &[Complex64]| Complex64::new(1.0, 0.0) + z[0] * z[1];
        let a = mu.lp_norm(f, p);
        let b = mu.scaled(c).unwrap().lp_norm(f, p);
        prop_assert!((b - c.powf(1.0 / p) * a).abs() <= 1e-12 * b.max(1.0));
    }

    #[test]
    fn csv_roundtrip_is_exact(mu in (1usize..4).prop_flat_map(measure)) {
        let mut buf = Vec::new();
        mu.to_writer(&mut buf).unwrap();
        prop_assert_eq!(DiscreteMeasure::from_reader(buf.as_slice()).unwrap(), mu);
    }

    #[test]
    fn inv_radial_undoes_radial_power(
        terms in prop::collection::vec(((0u32..6, 0u32..6), -1.0f64..1.0, -1.0f64..1.0), 1..6),
        z in ball_point(2, 0.95),
        m in 1i32..4,
    ) {
        let mut p = HoloPolynomial::zero(2).unwrap();
        for ((i, j), re, im) in terms {
            p.add_term(&[i, j], Complex64::new(re, im)).unwrap();
        }
        let q = radial_power(&p, m);
        let v = inv_radial(|y| q.eval(y), m as f64, &z, &QuadConfig::default()).unwrap();
        prop_assert!((v - p.eval(z.coords())).norm() < 1e-8);
    }
}
