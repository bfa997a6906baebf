//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero on any FAIL
//! only when `ACCEPTANCE_STRICT=1`.

use std::time::{Duration, Instant};

use gperiod_core::cm::{agm_period_1728, chowla_selberg_period, class_number, class_number_by_a, heegner_scan};
use gperiod_core::family::FamilySpec;
use gperiod_core::gfunctions::{radius, Place, RadiusEstimate};
use gperiod_core::heights::{default_epsilons, siegel_table};
use gperiod_core::numerics::{recognize_in_embedding, ComplexBall, Embedding, Integer, NumberField, Precision, Rational};
use gperiod_core::periods::{legendre_periods, monodromy_by_continuation};
use gperiod_core::picard_fuchs::{all_normalized_solutions, gauss_manin, normalized_solution};
use gperiod_core::relations::{
    build_relation, cm_adapted_factorization, eval_map_field, family_series, fiber_discriminant, locate_cm_fibers, trivial_relation_numeric_check, trivial_relation_series_check,
    RelationOptions,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn bits(b: u32) -> Precision {
    Precision::new(b).unwrap()
}

fn q(n: i64, d: i64) -> Rational {
    Rational::from((n, d))
}

fn ok(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn c1_exact_trivial() -> Outcome {
    let spec = FamilySpec::default_family();
    let ys = match all_normalized_solutions(&spec, 50) {
        Ok(y) => y,
        Err(e) => return ok(false, e.to_string()),
    };
    match trivial_relation_series_check(&ys, 50) {
        Ok(r) => ok(!r.checked.is_empty(), format!("det Y_k - 1 = 0 mod x^50 exactly for smooth coordinates {:?}", r.checked)),
        Err(e) => ok(false, e.to_string()),
    }
}

fn c2_numeric_trivial() -> Outcome {
    let prec = bits(256);
    let mut ps = Vec::new();
    for k in 1..=50 {
        match legendre_periods(&ComplexBall::from_rational(&q(k, 51), prec), prec) {
            Ok(p) => ps.push(p),
            Err(e) => return ok(false, format!("lambda = {k}/51: {e}")),
        }
    }
    match trivial_relation_numeric_check(&ps) {
        Ok(r) => {
            let max_rad = r.residuals.iter().map(|b| b.rad_f64()).fold(0.0, f64::max);
            ok(max_rad <= 1e-40, format!("50 samples contain 0; max radius {max_rad:.3e} (tolerance 1e-40)"))
        }
        Err(e) => ok(false, e.to_string()),
    }
}

fn c3_factorization() -> Outcome {
    let spec = FamilySpec::default_family();
    let r = match cm_adapted_factorization(&spec, 1, &q(1, 64), 200, bits(512)) {
        Ok(r) => r,
        Err(e) => return ok(false, e.to_string()),
    };
    let off_zero = r.pi_from_series[0][1].contains_zero() && r.pi_from_series[1][0].contains_zero();
    let one = ComplexBall::one(bits(512));
    let product_ok = r.product.overlaps(&one) && r.product.sub(&one).abs_upper().to_f64() <= 1e-25;
    let agree = (0..2).all(|i| (0..2).all(|j| r.pi[i][j].sub(&r.pi_from_series[i][j]).abs_upper().to_f64() <= 1e-25));
    let pass = r.factorization_residual <= 1e-25 && off_zero && r.off_diagonal <= 1e-25 && product_ok && agree;
    ok(
        pass,
        format!(
            "|Y(1/64)·Pi - P| <= {:.2e}; off-diagonal of Pi <= {:.2e} (contain 0: {off_zero}); (2 pi i Pi11)·Pi22 - 1 <= {:.2e}; B_dR = {:?}",
            r.factorization_residual,
            r.off_diagonal,
            r.product.sub(&one).abs_upper().to_f64(),
            r.basis.b_dr.iter().map(|row| row.iter().map(|c| c.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>()
        ),
    )
}

fn c4_cm_period() -> Outcome {
    let prec = bits(512);
    let (agm, cs) = match (agm_period_1728(prec), chowla_selberg_period(-4, prec)) {
        (Ok(a), Ok(c)) => (a, c),
        (Err(e), _) | (_, Err(e)) => return ok(false, e.to_string()),
    };
    let ratio = match agm.div(&cs) {
        Ok(r) => r,
        Err(e) => return ok(false, e.to_string()),
    };
    let k = NumberField::quadratic(2).unwrap();
    match recognize_in_embedding(&ratio, &k, Embedding(0), 10.0, prec) {
        Ok(rec) => ok(
            rec.height <= 10.0 && rec.residual <= 1e-50,
            format!("AGM/CS ratio = {} (height {:.3}, residual {:.2e})", rec.value, rec.height, rec.residual),
        ),
        Err(e) => ok(false, e.to_string()),
    }
}

fn c5_class_numbers() -> Outcome {
    let want = [(-3, 1), (-4, 1), (-7, 1), (-8, 1), (-11, 1), (-15, 2), (-23, 3)];
    let mut bad = Vec::new();
    for (d, h) in want {
        let a = class_number(d).map(|o| o.h).ok();
        let b = class_number_by_a(d).ok();
        if a != Some(h) || b != Some(h) {
            bad.push(format!("h({d}) = {a:?}/{b:?}, want {h}"));
        }
    }
    let mut heeg = heegner_scan(200, false);
    heeg.sort_unstable_by(|a, b| b.cmp(a));
    let heeg_ok = heeg == [-3, -4, -7, -8, -11, -19, -43, -67, -163];
    ok(bad.is_empty() && heeg_ok, format!("class numbers {}; Heegner scan |D| <= 200: {heeg:?}", if bad.is_empty() { "match".into() } else { bad.join(", ") }))
}

fn c6_relation() -> Outcome {
    let spec = FamilySpec::default_family();
    let prec = bits(512);
    let fibers = match locate_cm_fibers(&spec, 0.5, bits(256)) {
        Ok(f) => f,
        Err(e) => return ok(false, e.to_string()),
    };
    let opts = RelationOptions { prec, check_order: 50, ..Default::default() };
    // Screen by the exact fiber discriminants before building any certificate.
    let all_cm = |t: &gperiod_core::numerics::FieldElem| -> bool {
        spec.coords.iter().all(|c| {
            eval_map_field(&c.g, t).ok().and_then(|l| fiber_discriminant(&l, opts.max_abs_d, bits(256)).ok().flatten()).is_some()
        })
    };
    let target = fibers.iter().find(|f| all_cm(&f.t));
    let Some(f) = target.or(fibers.first()) else {
        return ok(false, "no CM fiber located with |x| < 1/2");
    };
    let out = match build_relation(&spec, &f.t, opts) {
        Ok(o) => o,
        Err(e) => return ok(false, format!("t = {}: {e}", f.t)),
    };
    let cert_ok = out.polynomial.homogeneous
        && out.polynomial.degree <= out.degree_bound()
        && out.certificates.iter().all(|c| c.residual.contains_zero() && c.residual.abs_upper().to_f64() <= 1e-20)
        && out.coherent;
    let summary = format!(
        "t = {}: deg R = {} <= 2[L_s:Q] = {}, max residual {:.2e}, witness x^{} coefficient {}, fiber discriminants {:?}",
        out.point,
        out.polynomial.degree,
        out.degree_bound(),
        out.max_residual(),
        out.nontriviality.order_of_vanishing,
        out.nontriviality.coefficient,
        out.fiber_discriminants
    );
    if out.all_cm {
        ok(cert_ok, format!("all-CM fiber {summary}"))
    } else {
        let v = if cert_ok { "valid" } else { "invalid" };
        ok(false, format!("no all-CM fiber among {} located with |x| < 1/2; certificate {v} at nearest {summary}", fibers.len()))
    }
}

/// `v_p` of a nonzero rational, independent of the library's valuation helper.
fn vp(x: &Rational, p: u32) -> i64 {
    let count = |n: &Integer| {
        let mut n = n.clone().abs();
        let mut k = 0;
        while n.is_divisible_u(p) {
            n /= p;
            k += 1;
        }
        k
    };
    count(x.numer()) - count(x.denom())
}

fn c7_radii() -> Outcome {
    let spec = FamilySpec::default_family();
    let series = match family_series(&spec, 201) {
        Ok(s) => s,
        Err(e) => return ok(false, e.to_string()),
    };
    let mut notes = Vec::new();
    let mut arch_ok = true;
    let mut arch = Vec::new();
    for s in &series {
        let r = radius(s, Place::Archimedean).unwrap().estimate.to_f64();
        arch.push(format!("{}:{r:.4}", s.label_string()));
        arch_ok &= (0.9..=1.1).contains(&r);
    }
    notes.push(format!("archimedean [{}]", arch.join(" ")));
    let mut padic_ok = true;
    for p in [3u32, 5, 7] {
        let off: Vec<String> = series
            .iter()
            .filter_map(|s| match radius(s, Place::Prime(p)).unwrap().estimate {
                RadiusEstimate::PAdic { slope, .. } if slope == 0 => None,
                e => Some(format!("{}:{e}", s.label_string())),
            })
            .collect();
        if !off.is_empty() {
            padic_ok = false;
            notes.push(format!("p = {p} radius != 1 for [{}]", off.join(" ")));
        }
    }
    let mut two_ok = true;
    for s in &series {
        let n = s.coeffs.len();
        let start = (n - n.div_ceil(2)).max(1);
        let oracle = (start..n).filter(|&i| s.coeffs[i] != 0).map(|i| q(-vp(&s.coeffs[i], 2), i as i64)).max();
        match (radius(s, Place::Prime(2)).unwrap().estimate, oracle) {
            (RadiusEstimate::PAdic { slope, .. }, Some(o)) => two_ok &= slope == o && slope > 0,
            _ => two_ok = false,
        }
    }
    notes.push(format!("p = 2 slopes match valuation scan and radius < 1: {two_ok}"));
    ok(arch_ok && padic_ok && two_ok, notes.join("; "))
}

fn c8_monodromy() -> Outcome {
    let spec = FamilySpec::default_family();
    let g = gauss_manin(&spec, 0).unwrap();
    let y = normalized_solution(&g, 200).unwrap();
    match monodromy_by_continuation(&g, &y, &q(1, 4), 16, bits(256)) {
        Ok(r) => {
            let diff = r.recovered_n.sub(&ComplexBall::from_rational(&r.series_n, bits(256))).abs_upper().to_f64();
            let (re, im) = r.recovered_n.mid_f64();
            ok(
                r.unipotent && diff <= 1e-20,
                format!("unipotent: {}; recovered N = {re:.12} + {im:.1e}i vs series N = {} (|diff| <= {diff:.2e})", r.unipotent, r.series_n),
            )
        }
        Err(e) => ok(false, e.to_string()),
    }
}

fn c9_siegel() -> Outcome {
    let eps = default_epsilons();
    let (a, b) = match (siegel_table(10_000, &eps, bits(256)), siegel_table(10_000, &eps, bits(256))) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return ok(false, e.to_string()),
    };
    let same = a.minima == b.minima && a.summary_csv() == b.summary_csv() && a.to_csv() == b.to_csv();
    let mut fund = heegner_scan(10_000, false);
    fund.sort_unstable_by(|x, y| y.cmp(x));
    let mut all = heegner_scan(10_000, true);
    all.sort_unstable_by(|x, y| y.cmp(x));
    let subset_ok = a.class_number_one(true) == fund && a.class_number_one(false) == all;
    let mins: Vec<String> = a.minima.iter().map(|m| format!("eps {}: D = {}, h = {}", m.epsilon, m.d, m.h)).collect();
    ok(same && subset_ok, format!("identical across runs: {same}; h = 1 rows match scan: {subset_ok} ({} fundamental); {}", fund.len(), mins.join(", ")))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 9] = [
        ("exact trivial relation", c1_exact_trivial, Duration::from_secs(10)),
        ("numeric trivial relation", c2_numeric_trivial, Duration::from_secs(30)),
        ("CM-adapted factorization", c3_factorization, Duration::from_secs(120)),
        ("CM period cross-check", c4_cm_period, Duration::from_secs(60)),
        ("class numbers", c5_class_numbers, Duration::from_secs(5)),
        ("relation certificate", c6_relation, Duration::from_secs(300)),
        ("radii", c7_radii, Duration::from_secs(30)),
        ("monodromy", c8_monodromy, Duration::from_secs(60)),
        ("Siegel table", c9_siegel, Duration::from_secs(120)),
    ];
    let mut passed = 0;
    for (i, (name, f, budget)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = f();
        let el = t.elapsed();
        let timing = if el <= *budget { String::new() } else { format!(" [over runtime target {budget:?}]") };
        println!("{} criterion {} ({name}): {} [{:.2?}]{timing}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail, el);
        passed += o.pass as usize;
    }
    println!("acceptance: {passed}/{} criteria PASS", criteria.len());
    if passed < criteria.len() && std::env::var("ACCEPTANCE_STRICT").as_deref() == Ok("1") {
        std::process::exit(1);
    }
}
