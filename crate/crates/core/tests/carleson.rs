mod common;

use std::f64::consts::PI;

use besov::carleson::{consistency_report, embed_estimate, tent_test, ConsistencyOptions, DiscreteMeasure, Mode, TentFamily, TestFamily, TestFamilySpec};
use besov::cli::BUNDLED_MEASURE;
use besov::error::Error;
use besov::geometry::{Point, Region, SpherePoint};
use besov::kernels::TestFunction;
use besov::sampling::SamplerConfig;
use besov::weights::Weight;
use num_complex::Complex64;

fn atom(re: f64, im: f64) -> Point {
    Point::new(vec![Complex64::new(re, im)]).unwrap()
}

#[test]
fn single_atom_tent_test_matches_brute_force() {
    let z = atom(0.6, 0.7);
    let mut mu = DiscreteMeasure::new(1).unwrap();
    mu.push(z.clone(), 0.3).unwrap();
    let fam = TentFamily::for_measure(&mu);
    let e = 1.7;
    let mut best = 0.0f64;
    for c in &fam.centers {
        for &r in &fam.radii {
            let d = (Complex64::new(1.0, 0.0) - z.coords()[0] * c.coords()[0].conj()).norm();
            if d < r {
                best = best.max(0.3 / r.powf(e));
            }
        }
    }
    let t = tent_test(&mu, e, &fam).unwrap();
    assert!(best > 0.0);
    assert_eq!(t.constant, best);
    assert_eq!(t.mass, 0.3);
}

#[test]
fn tent_family_reaches_below_the_deepest_atom() {
    let mu = DiscreteMeasure::boundary_circle(1, 6).unwrap();
    let fam = TentFamily::for_measure(&mu);
    assert_eq!(fam.centers.len(), 64);
    assert!(*fam.radii.last().unwrap() <= 0.25 * (-6f64).exp2());
}

#[test]
fn empty_measure_has_zero_constants() {
    let mu = DiscreteMeasure::new(2).unwrap();
    let fam = TentFamily { centers: vec![SpherePoint::normalized(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]).unwrap()], radii: vec![1.0, 0.5] };
    assert_eq!(tent_test(&mu, 2.0, &fam).unwrap().constant, 0.0);
    let tests = TestFamily::build(&mu, 2.0, &TestFamilySpec::default(), &[]).unwrap();
    let cfg = SamplerConfig::new(1, 500).unwrap();
    for mode in [Mode::I, Mode::Ii, Mode::Iii] {
        let e = embed_estimate(&mu, &Weight::constant(1.0), 0.5, 2.0, mode, &tests, &cfg).unwrap();
        assert_eq!(e.estimate.value, 0.0);
    }
}

/// `int_{|y| < r0} |1 - a conj(y)|^{-beta} dA(y) / pi` by tensor Gauss-Legendre in polar coordinates.
fn disk_potential(a: f64, r0: f64, beta: f64) -> f64 {
    let gl = common::gauss_legendre(64);
    let mut sum = 0.0;
    for &(x, wx) in &gl {
        let r = 0.5 * r0 * (x + 1.0);
        for &(t, wt) in &gl {
            let th = PI * (t + 1.0);
            let d = (1.0 - 2.0 * a * r * th.cos() + a * a * r * r).sqrt();
            sum += wx * wt * r * d.powf(-beta);
        }
    }
    0.5 * r0 * sum
}

#[test]
fn mode_iii_indicator_ratio_matches_quadrature() {
    let (s, p, big_r, a) = (0.3, 2.0, 0.5, 0.5);
    let mut mu = DiscreteMeasure::new(1).unwrap();
    mu.push(atom(a, 0.0), 0.8).unwrap();
    let ball = Region::pseudo_ball(Point::origin(1), big_r).unwrap();
    let family = TestFamily { positive: vec![TestFunction::Indicator { region: ball }], holomorphic: vec![] };
    let cfg = SamplerConfig::new(5, 200_000).unwrap();
    let e = embed_estimate(&mu, &Weight::constant(1.0), s, p, Mode::Iii, &family, &cfg).unwrap();
    let r0 = (2.0 * big_r - big_r * big_r).sqrt();
    let beta = 2.0 - (s + 1.0 / p);
    let potential = disk_potential(a, r0, beta);
    let oracle = (0.8 * potential.powf(p)).powf(1.0 / p) / (r0 * r0).powf(1.0 / p);
    let est = e.estimate;
    assert!((est.value - oracle).abs() <= 4.0 * est.stderr + 1e-3 * oracle, "{} +- {} vs {oracle}", est.value, est.stderr);
}

#[test]
fn potential_modes_are_ordered_and_scale_with_the_measure() {
    let mu = DiscreteMeasure::from_reader(BUNDLED_MEASURE.as_bytes()).unwrap();
    let tests = TestFamily::build(&mu, 2.0, &TestFamilySpec::default(), &[]).unwrap();
    let cfg = SamplerConfig::new(9, 2000).unwrap();
    let w = Weight::power(0.5);
    let ii = embed_estimate(&mu, &w, 0.5, 2.0, Mode::Ii, &tests, &cfg).unwrap();
    let iii = embed_estimate(&mu, &w, 0.5, 2.0, Mode::Iii, &tests, &cfg).unwrap();
    for (x, y) in ii.ratios.iter().zip(&iii.ratios) {
        assert!(x.value <= y.value * (1.0 + 1e-12));
    }
    let c: f64 = 9.0;
    let scaled = embed_estimate(&mu.scaled(c).unwrap(), &w, 0.5, 2.0, Mode::Iii, &tests, &cfg).unwrap();
    let rel = (scaled.estimate.value - c.sqrt() * iii.estimate.value).abs() / scaled.estimate.value;
    assert!(rel < 1e-12, "relative deviation {rel}");
}

#[test]
fn consistency_report_on_bundled_measure() {
    let mu = DiscreteMeasure::from_reader(BUNDLED_MEASURE.as_bytes()).unwrap();
    let opts = ConsistencyOptions { certify_samples: 2000, ..Default::default() };
    let cfg = SamplerConfig::new(3, 2000).unwrap();
    let r = consistency_report(&mu, &Weight::power(0.5), 0.5, 2.0, &opts, &cfg).unwrap();
    assert!(r.kernel_ii_lowerbound.estimate.value <= r.kernel_iii_lowerbound.estimate.value);
    assert!(r.tent.test.as_ref().is_some_and(|t| t.constant > 0.0));
    assert!(r.necessity.is_some_and(|n| n.holds));
}

#[test]
fn invalid_parameters_are_rejected() {
    let mu = DiscreteMeasure::boundary_circle(1, 3).unwrap();
    let tests = TestFamily::build(&mu, 2.0, &TestFamilySpec::default(), &[]).unwrap();
    let cfg = SamplerConfig::new(1, 100).unwrap();
    let err = embed_estimate(&mu, &Weight::constant(1.0), 0.5, 1.0, Mode::Iii, &tests, &cfg).unwrap_err();
    assert!(err.to_string().contains("p > 1 required"));
    let mut bad = DiscreteMeasure::new(1).unwrap();
    assert!(matches!(bad.push(atom(1.0, 0.0), 1.0), Err(Error::Measure(_))));
    assert!(matches!(bad.push(atom(0.1, 0.0), -1.0), Err(Error::Measure(_))));
}

#[test]
fn malformed_csv_reports_line_and_column() {
    let text = "re_z1,im_z1,mass\n0.1,0.2,0.5\n0.3,abc,0.5\n";
    match DiscreteMeasure::from_reader(text.as_bytes()) {
        Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (3, 2)),
        other => panic!("expected a parse error, got {other:?}"),
    }
    let outside = "re_z1,im_z1,mass\n0.9,0.9,0.5\n";
    assert!(matches!(DiscreteMeasure::from_reader(outside.as_bytes()), Err(Error::Parse { line: 2, .. })));
}
