use gperiod_core::cm::{class_number, class_number_by_a, is_discriminant, j_of_tau_any, tau_of_form};
use gperiod_core::family::{classify_coordinates, j_invariant, FamilySpec};
use gperiod_core::gfunctions::{proximity, radius, GSeries, Place, ProximityPlace, RadiusEstimate};
use gperiod_core::heights::{siegel_table, weil_height, AlgebraicNumber};
use gperiod_core::numerics::{recognize_algebraic, ComplexBall, Embedding, NumberField, Precision, Rational};
use gperiod_core::picard_fuchs::{det_residual, gauss_manin_for_map, normalized_solution, ode_residual};
use gperiod_core::numerics::RationalFunction;
use proptest::prelude::*;

fn prec(bits: u32) -> Precision {
    Precision::new(bits).unwrap()
}

fn q(n: i64, d: i64) -> Rational {
    Rational::from((n, d))
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (-1000i64..=1000, 1i64..=1000).prop_map(|(n, d)| q(n, d))
}

fn quad_disc() -> impl Strategy<Value = i64> {
    prop::sample::select(vec![-1i64, -2, -3, -7, -11, 2, 3, 5, 6, 7])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn ball_operations_enclose_exact_results(a in small_rational(), b in small_rational(), c in small_rational()) {
        let p = prec(64);
        let (ba, bb, bc) = (ComplexBall::from_rational(&a, p), ComplexBall::from_rational(&b, p), ComplexBall::from_rational(&c, p));
        let zero = Rational::new();
        let s = ba.add(&bb).mul(&bc);
        prop_assert!(s.contains_rational(&((a.clone() + &b) * &c), &zero));
        let d = ba.sub(&bb).sqr();
        let diff = Rational::from(&a - &b);
        prop_assert!(d.contains_rational(&(diff.clone() * &diff), &zero));
        if c != 0 {
            let r = ba.div(&bc).unwrap();
            prop_assert!(r.contains_rational(&(a.clone() / &c), &zero));
        }
    }

    #[test]
    fn rational_arithmetic_is_exact(a in small_rational(), b in small_rational()) {
        prop_assume!(b != 0);
        let r = Rational::from(&a / &b) * &b;
        prop_assert_eq!(r, a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn recognition_inverts_embedding(d in quad_disc(), a in -20i64..=20, b in -20i64..=20, den in 1i64..=20) {
        let k = NumberField::quadratic(d).unwrap();
        let x = k.elem(vec![q(a, den), q(b, den)]).unwrap();
        let p = prec(256);
        let z = x.embed(Embedding(0), p);
        let y = recognize_algebraic(&z, &k, 20.0, p).unwrap();
        prop_assert_eq!(y, x);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn j_is_invariant_under_anharmonic_group(l in small_rational()) {
        prop_assume!(l != 0 && l != 1);
        let j = j_invariant(&l).unwrap();
        prop_assert_eq!(&j, &j_invariant(&(Rational::from(1) - &l)).unwrap());
        prop_assert_eq!(&j, &j_invariant(&Rational::from(l.clone().recip())).unwrap());
        prop_assert_eq!(&j, &j_invariant(&Rational::from(l.clone() / (l.clone() - 1u32))).unwrap());
    }

    #[test]
    fn classification_does_not_depend_on_precision(n in -50i64..=50, d in 1i64..=50) {
        let a = q(n, d);
        let spec = FamilySpec::new(&[&format!("x + {}", a)]).unwrap();
        let lo = classify_coordinates(&spec, prec(128));
        let hi = classify_coordinates(&spec, prec(256));
        prop_assert_eq!(lo, hi);
    }

    #[test]
    fn padic_slope_is_invariant_under_unit_scaling(p in prop::sample::select(vec![2u32, 3, 5, 7]), u in 1i64..=50, v in 1i64..=50) {
        let pi = p as i64;
        prop_assume!(u % pi != 0 && v % pi != 0);
        let spec = FamilySpec::new(&["x + 1/2"]).unwrap();
        let series = gperiod_core::relations::family_series(&spec, 40).unwrap();
        let unit = q(u, v);
        for s in &series {
            let scaled: Vec<Rational> = (0..s.len()).map(|n| s.coefficient(n).as_rational().unwrap() * &unit).collect();
            let a = radius(s, Place::Prime(p)).unwrap();
            let b = radius(&GSeries::rational(s.label, scaled), Place::Prime(p)).unwrap();
            prop_assert_eq!(a.estimate, b.estimate);
        }
    }

    #[test]
    fn proximity_is_monotone_in_the_radius(n in -99i64..=99, d in 1i64..=100) {
        let x = NumberField::rationals().from_rational(q(n, d));
        let series = gperiod_core::relations::family_series(&FamilySpec::default_family(), 40).unwrap();
        let mut reports: Vec<_> = series.iter().map(|s| radius(s, Place::Archimedean).unwrap()).collect();
        let near = proximity(&x, ProximityPlace::Archimedean(Embedding(0)), &reports, prec(128));
        for r in &mut reports {
            if let RadiusEstimate::Real(v) = r.estimate {
                r.estimate = RadiusEstimate::Real(v * 0.5);
            }
        }
        let smaller = proximity(&x, ProximityPlace::Archimedean(Embedding(0)), &reports, prec(128));
        if let (Ok(false), Ok(s)) = (near, smaller) {
            prop_assert!(!s);
        }
    }

    #[test]
    fn weil_height_scales_with_powers(d in quad_disc(), a in -9i64..=9, b in -9i64..=9, den in 1i64..=9, n in 1u32..=5) {
        prop_assume!(a != 0 || b != 0);
        let k = NumberField::quadratic(d).unwrap();
        let x = k.elem(vec![q(a, den), q(b, den)]).unwrap();
        let p = prec(256);
        let hx = weil_height(&AlgebraicNumber::from_field_elem(&x, p).unwrap(), p).unwrap();
        let hn = weil_height(&AlgebraicNumber::from_field_elem(&x.pow(n), p).unwrap(), p).unwrap();
        prop_assert!(hn.overlaps(&hx.mul_i64(n as i64)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn gauss_manin_solution_satisfies_ode_and_det(n in -30i64..=30, d in 1i64..=30) {
        let a = q(n, d);
        prop_assume!(a != 0 && a != 1);
        let g = RationalFunction::parse(&format!("x + {}", a)).unwrap();
        let gm = gauss_manin_for_map(&g, 0).unwrap();
        let y = normalized_solution(&gm, 30).unwrap();
        prop_assert_eq!(ode_residual(&y, &gm).unwrap(), None);
        prop_assert_eq!(det_residual(&y), None);
    }

    #[test]
    fn j_is_modular_at_cm_points(d in prop::sample::select(vec![-3i64, -4, -7, -8, -11, -15, -20, -23, -24, -31, -39, -47])) {
        let p = prec(256);
        let o = class_number(d).unwrap();
        for f in &o.forms {
            let tau = tau_of_form(f, d, p);
            let j = j_of_tau_any(&tau, p).unwrap();
            let shifted = j_of_tau_any(&tau.add(&ComplexBall::one(p)), p).unwrap();
            let inverted = j_of_tau_any(&tau.inv().unwrap().neg(), p).unwrap();
            prop_assert!(j.overlaps(&shifted));
            prop_assert!(j.overlaps(&inverted));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn class_number_agrees_across_algorithms(m in 3i64..=20_000) {
        let d = -m;
        prop_assume!(is_discriminant(d));
        prop_assert_eq!(class_number(d).unwrap().h, class_number_by_a(d).unwrap());
    }
}

#[test]
fn archimedean_radius_is_stable_under_doubling_the_order() {
    for spec in [FamilySpec::default_family(), FamilySpec::new(&["x + 1/3"]).unwrap()] {
        let long = gperiod_core::relations::family_series(&spec, 400).unwrap();
        for s in &long {
            let a = radius(&s.truncated(201), Place::Archimedean).unwrap().estimate.to_f64();
            let b = radius(s, Place::Archimedean).unwrap().estimate.to_f64();
            assert!((a - b).abs() <= 0.05 * b, "{}: {a} vs {b}", s.label_string());
        }
    }
}

#[test]
fn cm_j_values_form_h_distinct_clusters() {
    let p = prec(128);
    for m in 3..=1000i64 {
        let d = -m;
        if !is_discriminant(d) {
            continue;
        }
        let pts = gperiod_core::cm::cm_points(d, p).unwrap();
        let h = pts.len();
        for i in 0..h {
            for k in i + 1..h {
                assert!(!pts[i].j_value.overlaps(&pts[k].j_value), "D = {d}: j-values {i}, {k} coincide");
            }
        }
        assert_eq!(h, class_number_by_a(d).unwrap());
    }
}

#[test]
fn siegel_rows_do_not_depend_on_the_range() {
    let eps = vec![q(1, 10), q(1, 4)];
    let p = prec(128);
    let small = siegel_table(300, &eps, p).unwrap();
    let large = siegel_table(1000, &eps, p).unwrap();
    for row in &small.rows {
        let other = large.rows.iter().find(|r| r.d == row.d).expect("row present");
        assert_eq!((row.fundamental, row.h), (other.fundamental, other.h));
        for (a, b) in row.ratios.iter().zip(&other.ratios) {
            assert!(a.overlaps(b));
        }
    }
    let fund: Vec<i64> = large.rows.iter().filter(|r| r.fundamental && r.d.abs() <= 300).map(|r| r.d).collect();
    let fund_small: Vec<i64> = small.rows.iter().filter(|r| r.fundamental).map(|r| r.d).collect();
    assert_eq!(fund, fund_small);
}
