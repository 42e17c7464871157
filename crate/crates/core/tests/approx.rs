use std::sync::Arc;

use flatcover::approx::*;
use flatcover::cover::*;
use flatcover::cylinders::*;
use flatcover::examples::*;
use flatcover::numfield::*;
use flatcover::surface::*;
use proptest::prelude::*;

/// A 2 x 1/2 rectangle glued into a torus; the horizontal cylinder has
/// area 1 and holonomy (2, 0), and w is dual to it.
fn thin_torus() -> (CoverSpec, LiftClass) {
    let f = Field::rationals();
    let half = f.from_ratio(1, 2);
    let rect = Polygon::new(vec![
        PlanarVector::from_ints(&f, 0, 0),
        PlanarVector::from_ints(&f, 2, 0),
        PlanarVector::new(f.from_i64(2), half.clone()),
        PlanarVector::new(f.zero(), half),
    ]);
    let glue = [(EdgeRef::new(0, 0), EdgeRef::new(0, 2)), (EdgeRef::new(0, 1), EdgeRef::new(0, 3))];
    let s = build_surface(vec![rect], &glue, &[0]).unwrap();
    let w = s.cycle_from_edges(&[(EdgeRef::new(0, 1), 1)]);
    let cover = make_cover(Arc::new(s), w).unwrap();
    let d = cylinder_decomposition(cover.base(), &PlanarVector::from_ints(&f, 1, 0), &rat_int(10)).decomposition().unwrap();
    let lc = classify_cylinder_lift(&cover, &d.cylinders[0]);
    (cover, lc)
}

fn point(x: (i64, i64), y: (i64, i64)) -> PlanarVector {
    let f = Field::rationals();
    PlanarVector::new(f.from_ratio(x.0, x.1), f.from_ratio(y.0, y.1))
}

#[test]
fn closed_form_stage_quantities() {
    let (_, strip) = thin_torus();
    let f = Field::rationals();
    assert!(strip.is_strip());
    assert_eq!(strip.area, f.one());
    let st = stage_quantities(&strip, 1, &rat(1, 2)).unwrap();
    assert_eq!(st.h_sq, f.from_ratio(1, 16));
    assert_eq!(st.c, rat(3, 2));
    assert_eq!(st.eta_sq, f.from_ratio(1, 4096));
    assert!(st.band_fits());
    assert!(matches!(stage_quantities(&strip, 1, &rat_int(1)), Err(ApproxError::BadEps)));
    assert!(matches!(stage_quantities(&strip, 1, &rat_int(0)), Err(ApproxError::BadEps)));
}

fn example_strips() -> Vec<(CoverSpec, LiftClass)> {
    let mut out = Vec::new();
    for b in [staircase().unwrap(), double_octagon_hw().unwrap(), by_name("reg8").unwrap()] {
        let cover = b.cover();
        for d in periodic_directions(&b.surface, &rat_int(5)).directions {
            for c in &d.decomposition.cylinders {
                let lc = classify_cylinder_lift(&cover, c);
                if lc.is_strip() {
                    out.push((cover.clone(), lc));
                }
            }
        }
    }
    out
}

#[test]
fn band_fits_exactly_when_area_reaches_eps() {
    let strips = example_strips();
    assert!(strips.len() >= 8);
    for (_, s) in &strips {
        for k in 1..10 {
            let eps = rat(k, 10);
            let st = stage_quantities(s, 0, &eps).unwrap();
            // 16 eta^2 <= eps^2 h^2 reduces to eps <= A
            assert_eq!(st.band_fits(), st.area_at_least_eps());
            if st.area_at_least_eps() {
                let two_eta = 2.0 * st.eta();
                assert!(two_eta <= k as f64 / 20.0 * st.h() * (1.0 + 1e-12));
            }
        }
    }
}

#[test]
fn rectangle_examples() {
    let (cover, strip) = thin_torus();
    let f = Field::rationals();
    let along = Direction::Exact(PlanarVector::from_ints(&f, 1, 0));
    let eps = rat(1, 4);
    assert!(admits_rectangle(&cover, 0, &point((1, 3), (1, 4)), &strip, &along, &eps).unwrap());
    assert!(!admits_rectangle(&cover, 0, &point((1, 3), (0, 1)), &strip, &along, &eps).unwrap());
    assert!(!admits_rectangle(&cover, 0, &point((1, 3), (1, 2)), &strip, &along, &eps).unwrap());
}

#[test]
fn points_near_the_core_admit_rectangles() {
    let (cover, strip) = thin_torus();
    let f = Field::rationals();
    for k in 1..10 {
        let eps = rat(k, 10);
        let st = stage_quantities(&strip, 0, &eps).unwrap();
        let two_eta = 2.0 * st.eta();
        let mut tested = 0;
        for n in 1..200 {
            let u = PlanarVector::from_ints(&f, n, 1);
            let theta = Direction::Exact(u);
            if !flatcover::veech::satisfies_strip_inequality(&strip.v, &strip.area, &theta, &eps) {
                continue;
            }
            for j in -4..=4 {
                // offsets strictly inside 2 eta of the core line y = 1/4
                let off = two_eta * j as f64 / 5.0;
                let y = f.from_ratio(1, 4) + f.from_ratio((off * 1e9).round() as i64, 1_000_000_000);
                let x = PlanarVector::new(f.from_ratio(2, 3), y);
                assert!(admits_rectangle(&cover, 0, &x, &strip, &theta, &eps).unwrap(), "eps {eps} n {n} j {j}");
                tested += 1;
            }
        }
        assert!(tested > 0);
    }
}

#[test]
fn band_measure_closed_forms() {
    let (cover, strip) = thin_torus();
    let a = band_measure(cover.base(), &strip.cylinder, 1.0 / 16.0, 100_000, 7);
    // band of half-width 1/16 around a core of length 2
    assert!((a.estimate - 0.25).abs() <= 4.0 * a.sigma, "{a:?}");
    assert_eq!(a, band_measure(cover.base(), &strip.cylinder, 1.0 / 16.0, 100_000, 7));
    let full = band_measure(cover.base(), &strip.cylinder, 1.0, 10_000, 3);
    assert_eq!(full.estimate, 1.0);

    let f = Field::rationals();
    let torus = square_torus(&f);
    let d = cylinder_decomposition(&torus, &PlanarVector::from_ints(&f, 1, 0), &rat_int(4)).decomposition().unwrap();
    let b = band_measure(&torus, &d.cylinders[0], 1.0 / 8.0, 50_000, 11);
    assert!((b.estimate - 0.25).abs() <= 4.0 * b.sigma);
    assert!((b.radius95 - 1.96 * b.sigma).abs() < 1e-15);
}

#[test]
fn sigma_prime_bound_for_example_strips() {
    let strips = example_strips();
    for (cover, s) in strips.iter().step_by(4) {
        let eps = rat(1, 10);
        let m = sigma_prime_measure(cover, s, &eps, 100_000, 2024).unwrap();
        let bound = 0.01 / 4.0;
        assert!(m.estimate >= bound - 3.0 * m.sigma, "{m:?}");
        assert_eq!(&m, &sigma_prime_measure(cover, s, &eps, 100_000, 2024).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn admits_is_monotone_in_eps(n in -40i64..40, m in 1i64..6, yn in 1i64..99, k in 2i64..10, j in 1i64..10) {
        prop_assume!(j < k);
        let (cover, strip) = thin_torus();
        let f = Field::rationals();
        let theta = Direction::Exact(PlanarVector::from_ints(&f, n, m));
        let x = PlanarVector::new(f.from_ratio(1, 2), f.from_ratio(yn, 200));
        let big = admits_rectangle(&cover, 0, &x, &strip, &theta, &rat(k, 10)).unwrap();
        let small = admits_rectangle(&cover, 0, &x, &strip, &theta, &rat(j, 10)).unwrap();
        prop_assert!(!big || small);
    }
}
