use gperiod_core::family::FamilySpec;
use gperiod_core::heights::{galois_orbit_bound_report, HeightError, OrbitConfig};
use gperiod_core::numerics::{ComplexBall, FieldElem, Precision, Rational};
use gperiod_core::periods::legendre_periods;
use gperiod_core::picard_fuchs::{gauss_manin, singular_first_column};
use gperiod_core::relations::{
    build_relation, family_series, locate_cm_fibers, trivial_relation_numeric_check, RelationOptions,
};

fn prec(bits: u32) -> Precision {
    Precision::new(bits).unwrap()
}

fn located_point() -> FieldElem {
    FieldElem::parse("5/2 - 2*sqrt(2)").unwrap()
}

#[test]
fn locator_finds_the_d_minus_8_fiber() {
    let spec = FamilySpec::new(&["x + 1/2"]).unwrap();
    let fibers = locate_cm_fibers(&spec, 0.5, prec(256)).unwrap();
    let f = fibers.iter().find(|f| f.discriminant == -8).expect("D = -8 fiber");
    assert_eq!(f.t, located_point());
    assert!(fibers.iter().all(|f| f.abs_t <= 0.5));
}

#[test]
fn relation_invariants_hold_at_a_cm_fiber() {
    for spec in [FamilySpec::new(&["x + 1/2"]).unwrap(), FamilySpec::default_family()] {
        let out = build_relation(&spec, &located_point(), RelationOptions::default()).unwrap();
        let p = &out.polynomial;
        assert!(p.homogeneous);
        assert!(p.degree <= out.degree_bound());
        assert!(!p.terms.is_empty());
        assert_eq!(out.certificates.len(), out.local_factors.len());
        assert!(out.certificates.iter().all(|c| c.residual.contains_zero()));
        assert!(out.coherent);
        assert!(!out.nontriviality.coefficient.is_zero());
        assert_eq!(out.field.degree(), 4);
    }
}

#[test]
fn orbit_report_needs_an_all_cm_fiber() {
    let single = FamilySpec::new(&["x + 1/2"]).unwrap();
    let out = build_relation(&single, &located_point(), RelationOptions::default()).unwrap();
    assert!(out.all_cm);
    let rep = galois_orbit_bound_report(&out, &out.certificates, &OrbitConfig::default(), prec(256)).unwrap();
    let expected = ((4f64).ln() + (2.5 + 2.0 * 2f64.sqrt()).ln()) / 2.0;
    assert!((rep.height.mid_f64().0 - expected).abs() < 1e-12);
    assert_eq!(rep.max_abs_disc, 8);

    let pair = FamilySpec::default_family();
    let out = build_relation(&pair, &located_point(), RelationOptions::default()).unwrap();
    assert!(!out.all_cm);
    let err = galois_orbit_bound_report(&out, &out.certificates, &OrbitConfig::default(), prec(256)).unwrap_err();
    assert!(matches!(err, HeightError::MissingCertificates(_)));
}

#[test]
fn non_cm_rational_point_is_rejected() {
    let t = FieldElem::parse("1/3").unwrap();
    assert!(build_relation(&FamilySpec::default_family(), &t, RelationOptions::default()).is_err());
}

#[test]
fn legendre_relation_holds_along_a_path() {
    let p = prec(256);
    let ms: Vec<_> = [(1, 7), (1, 3), (1, 2), (2, 3), (9, 10)]
        .iter()
        .map(|&(n, d)| legendre_periods(&ComplexBall::from_rational(&Rational::from((n, d)), p), p).unwrap())
        .collect();
    let rep = trivial_relation_numeric_check(&ms).unwrap();
    assert!(rep.max_radius < 1e-60);
}

#[test]
fn singular_first_column_matches_family_series() {
    let spec = FamilySpec::default_family();
    let g = gauss_manin(&spec, 0).unwrap();
    let fc = singular_first_column(&g, 30, prec(256)).unwrap();
    let series = family_series(&spec, 30).unwrap();
    for (i, s) in series.iter().filter(|s| s.label.1 == 1 && s.label.2 == 1).enumerate() {
        for n in 0..30 {
            assert_eq!(fc.column[i].coeffs[n], s.coeffs[n], "entry {i}, index {n}");
        }
    }
}
