//! Analytic data of the G-series `y_{i,j,k}`: radii of convergence at each
//! place, proximity of a point to `x = 0`, truncated sizes and coefficient heights.

use std::fmt;

use rayon::prelude::*;
use rug::{Integer, Rational};
use serde::Serialize;
use thiserror::Error;

use crate::numerics::{ComplexBall, Embedding, FieldElem, NumberField, NumericsError, Precision};
use crate::series::{log_abs, ratio_estimate};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum GFunctionError {
    #[error("need at least {needed} coefficients, got {got}")]
    TooFewCoefficients { needed: usize, got: usize },
    #[error("|x|_v straddles the radius threshold at this precision")]
    UndecidableAtPrecision,
    #[error("no radius report for the requested place")]
    MissingPlace,
    #[error("{0} splits in the field of x; its places are not distinguished")]
    SplitPrime(u32),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub const MIN_TERMS: usize = 20;

/// `scale · Σ a_n xⁿ` with `a_n ∈ ℚ` and `scale` in a number field.
#[derive(Clone, Debug, PartialEq)]
pub struct GSeries {
    /// `(i, j, k)`, one-based.
    pub label: (usize, usize, usize),
    pub scale: FieldElem,
    pub coeffs: Vec<Rational>,
}

impl GSeries {
    pub fn new(label: (usize, usize, usize), scale: FieldElem, coeffs: Vec<Rational>) -> Self {
        GSeries { label, scale, coeffs }
    }

    pub fn rational(label: (usize, usize, usize), coeffs: Vec<Rational>) -> Self {
        GSeries { label, scale: NumberField::rationals().one(), coeffs }
    }

    pub fn truncated(&self, len: usize) -> Self {
        let mut c = self.coeffs.clone();
        c.truncate(len);
        GSeries { label: self.label, scale: self.scale.clone(), coeffs: c }
    }

    /// Number of stored coefficients, `N + 1`.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coefficient(&self, n: usize) -> FieldElem {
        self.scale.mul_rational(&self.coeffs[n])
    }

    pub fn label_string(&self) -> String {
        format!("{},{},{}", self.label.0, self.label.1, self.label.2)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "label": [self.label.0, self.label.1, self.label.2],
            "scale": self.scale.to_json(),
            "coeffs": self.coeffs.iter().map(|q| q.to_string()).collect::<Vec<_>>(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Place {
    Archimedean,
    Prime(u32),
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Archimedean => write!(f, "inf"),
            Place::Prime(p) => write!(f, "{p}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RadiusEstimate {
    /// Ratio-test estimate.
    Real(f64),
    /// Exactly `p^{−slope}`.
    PAdic { p: u32, slope: Rational },
}

impl RadiusEstimate {
    pub fn to_f64(&self) -> f64 {
        match self {
            RadiusEstimate::Real(r) => *r,
            RadiusEstimate::PAdic { p, slope } => (*p as f64).powf(-slope.to_f64()),
        }
    }
}

impl fmt::Display for RadiusEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadiusEstimate::Real(r) => write!(f, "{r:.6}"),
            RadiusEstimate::PAdic { p, slope } => write!(f, "{p}^(-({slope}))"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RadiusMethod {
    RatioTest,
    ValuationSlope,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RadiusReport {
    pub label: (usize, usize, usize),
    pub place: Place,
    pub estimate: RadiusEstimate,
    pub method: RadiusMethod,
    pub terms: usize,
}

/// `v_p(q)` for nonzero `q`.
pub fn p_valuation(q: &Rational, p: u32) -> i64 {
    let pz = Integer::from(p);
    let count = |z: &Integer| {
        let mut z = z.clone().abs();
        let mut k = 0i64;
        while z.is_divisible(&pz) {
            z /= &pz;
            k += 1;
        }
        k
    };
    count(q.numer()) - count(q.denom())
}

/// Exact valuation slope `max_{n ∈ tail} v_p(a_n)/(−n)` over the last `⌈N/2⌉`
/// nonzero coefficients.
pub fn valuation_slope(coeffs: &[Rational], p: u32) -> Option<Rational> {
    let n = coeffs.len();
    let start = (n - n.div_ceil(2)).max(1);
    (start..n)
        .filter(|&i| coeffs[i] != 0)
        .map(|i| Rational::from((-p_valuation(&coeffs[i], p), i as i64)))
        .max()
}

pub fn radius(series: &GSeries, place: Place) -> Result<RadiusReport, GFunctionError> {
    let n = series.len();
    if n < MIN_TERMS {
        return Err(GFunctionError::TooFewCoefficients { needed: MIN_TERMS, got: n });
    }
    let (estimate, method) = match place {
        Place::Archimedean => {
            let start = n - n.div_ceil(2);
            let r = ratio_estimate(&series.coeffs, start).unwrap_or(f64::INFINITY);
            (RadiusEstimate::Real(r), RadiusMethod::RatioTest)
        }
        Place::Prime(p) => {
            let slope = valuation_slope(&series.coeffs, p).unwrap_or_else(Rational::new);
            (RadiusEstimate::PAdic { p, slope }, RadiusMethod::ValuationSlope)
        }
    };
    Ok(RadiusReport { label: series.label, place, estimate, method, terms: n })
}

pub fn radii(family: &[GSeries], place: Place) -> Result<Vec<RadiusReport>, GFunctionError> {
    family.par_iter().map(|s| radius(s, place)).collect()
}

/// `R_v` of a family: the minimum over members (joint convergence); the
/// maximum is reported alongside.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyRadius {
    pub place: Place,
    pub min: RadiusEstimate,
    pub max: RadiusEstimate,
}

fn cmp_estimates(a: &RadiusEstimate, b: &RadiusEstimate) -> std::cmp::Ordering {
    match (a, b) {
        // Larger slope means smaller radius.
        (RadiusEstimate::PAdic { slope: sa, .. }, RadiusEstimate::PAdic { slope: sb, .. }) => sb.cmp(sa),
        _ => a.to_f64().total_cmp(&b.to_f64()),
    }
}

pub fn family_radius(reports: &[RadiusReport], place: Place) -> Option<FamilyRadius> {
    let at: Vec<&RadiusEstimate> = reports.iter().filter(|r| r.place == place).map(|r| &r.estimate).collect();
    let min = at.iter().min_by(|a, b| cmp_estimates(a, b))?;
    let max = at.iter().max_by(|a, b| cmp_estimates(a, b))?;
    Some(FamilyRadius { place, min: (*min).clone(), max: (*max).clone() })
}

/// Place of the field of `x(s)` at which proximity is tested.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProximityPlace {
    Archimedean(Embedding),
    Prime(u32),
}

fn splits_in_quadratic(d: i64, p: u32) -> bool {
    if p == 2 {
        return d.rem_euclid(8) == 1;
    }
    let pz = Integer::from(p);
    let dz = Integer::from(d);
    !dz.is_divisible(&pz) && dz.legendre(&pz) == 1
}

/// `v_w(x)` at the unique place `w | p`, normalized so `v_w(p) = 1`.
fn field_valuation(x: &FieldElem, p: u32) -> Result<Rational, GFunctionError> {
    if let Some(q) = x.as_rational() {
        return Ok(Rational::from(p_valuation(&q, p)));
    }
    let k = x.field();
    let gens = k.generators();
    for mask in 1u32..(1 << gens.len()) {
        let d = crate::numerics::field::squarefree_part(
            gens.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, g)| *g).product::<i64>(),
        );
        if splits_in_quadratic(d, p) {
            return Err(GFunctionError::SplitPrime(p));
        }
    }
    let norm = x.norm();
    Ok(Rational::from((p_valuation(&norm, p), k.degree() as i64)))
}

/// `|x(s)|_v < min{1, R_v}` with `R_v` the family minimum.
pub fn proximity(
    x: &FieldElem,
    place: ProximityPlace,
    family_radii: &[RadiusReport],
    prec: Precision,
) -> Result<bool, GFunctionError> {
    if x.is_zero() {
        return Ok(true);
    }
    match place {
        ProximityPlace::Archimedean(emb) => {
            let fr = family_radius(family_radii, Place::Archimedean).ok_or(GFunctionError::MissingPlace)?;
            let r = fr.min.to_f64().min(1.0);
            let z = x.embed(emb, prec);
            let hi = z.abs_upper().to_f64();
            let lo = z.abs_lower().to_f64();
            if hi < r {
                Ok(true)
            } else if lo >= r {
                Ok(false)
            } else {
                Err(GFunctionError::UndecidableAtPrecision)
            }
        }
        ProximityPlace::Prime(p) => {
            let fr = family_radius(family_radii, Place::Prime(p)).ok_or(GFunctionError::MissingPlace)?;
            let RadiusEstimate::PAdic { slope, .. } = fr.min else {
                return Err(GFunctionError::MissingPlace);
            };
            // |x|_p = p^{−v} < p^{−max(0, slope)}
            let v = field_valuation(x, p)?;
            let bound = if slope > 0 { slope } else { Rational::new() };
            Ok(v > bound)
        }
    }
}

fn lcm_den(c: &FieldElem) -> Integer {
    c.coeffs().iter().fold(Integer::from(1), |acc, q| acc.lcm(q.denom()))
}

/// Largest absolute value over all embeddings.
fn house_log(c: &FieldElem) -> Option<f64> {
    if c.is_zero() {
        return None;
    }
    let prec = Precision::new(64).unwrap();
    let k = c.field();
    let best = k
        .embeddings()
        .into_iter()
        .map(|e| c.embed(e, prec).abs_upper().to_f64())
        .fold(0.0, f64::max);
    Some(best.ln())
}

/// Truncated size `σ_N = (1/N)·Σ_{n≤N} [log den(a₀..a_n)/(n+1) + log⁺ max_{m≤n} |a_m|]`.
pub fn size_proxy(series: &GSeries) -> f64 {
    let n = series.len();
    if n == 0 || series.coeffs.iter().all(|c| *c == 0) {
        return 0.0;
    }
    let scale_den = lcm_den(&series.scale);
    let scale_house = house_log(&series.scale).unwrap_or(f64::NEG_INFINITY);
    let mut den = scale_den;
    let mut max_log = f64::NEG_INFINITY;
    let mut total = 0.0;
    for (i, a) in series.coeffs.iter().enumerate() {
        if *a != 0 {
            den = den.lcm(&(Integer::from(a.denom()) * lcm_den(&series.scale)));
            max_log = max_log.max(log_abs(a) + scale_house);
        }
        let ld = rug::Float::with_val(64, &den).ln().to_f64();
        total += ld / (i + 1) as f64 + max_log.max(0.0);
    }
    let big_n = (n - 1).max(1);
    total / big_n as f64
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeightRow {
    pub label: (usize, usize, usize),
    pub n: usize,
    pub den: Integer,
    pub log_den: f64,
    /// `log⁺` of the largest conjugate.
    pub log_abs_max: f64,
}

pub fn coefficient_height_table(family: &[GSeries]) -> Vec<HeightRow> {
    family
        .iter()
        .flat_map(|s| {
            (0..s.len()).map(move |n| {
                let c = s.coefficient(n);
                let den = lcm_den(&c);
                let log_den = rug::Float::with_val(64, &den).ln().to_f64();
                let log_abs_max = house_log(&c).map_or(0.0, |v| v.max(0.0));
                HeightRow { label: s.label, n, den, log_den, log_abs_max }
            })
        })
        .collect()
}

pub fn height_table_csv(rows: &[HeightRow]) -> String {
    let mut out = String::from("label,n,log_den,log_abs_max\n");
    for r in rows {
        out.push_str(&format!("\"{},{},{}\",{},{:.12},{:.12}\n", r.label.0, r.label.1, r.label.2, r.n, r.log_den, r.log_abs_max));
    }
    out
}

/// Value of `x(s)` as a ball in one embedding, for reporting.
pub fn abs_at(x: &FieldElem, emb: Embedding, prec: Precision) -> ComplexBall {
    x.embed(emb, prec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn central(n: usize) -> Vec<Rational> {
        let mut out = Vec::with_capacity(n);
        let mut c = Rational::from(1);
        for k in 0..n {
            out.push(Rational::from(c.square_ref()));
            // C(2k+2, k+1)/4^{k+1} = C(2k,k)/4^k · (2k+1)/(2k+2)
            c *= Rational::from((2 * k as i64 + 1, 2 * k as i64 + 2));
        }
        out
    }

    #[test]
    fn archimedean_radius_of_central_binomials() {
        let s = GSeries::rational((1, 1, 1), central(201));
        let r = radius(&s, Place::Archimedean).unwrap();
        let v = r.estimate.to_f64();
        assert!((0.97..=1.03).contains(&v), "{v}");
    }

    #[test]
    fn p_adic_radii() {
        let s = GSeries::rational((1, 1, 1), central(201));
        let r3 = radius(&s, Place::Prime(3)).unwrap();
        assert!(r3.estimate.to_f64() >= 1.0);
        let r2 = radius(&s, Place::Prime(2)).unwrap();
        let RadiusEstimate::PAdic { slope, .. } = &r2.estimate else { panic!() };
        assert!(*slope > 0);
        // Independent scan: v₂(C(2n,n)²/16ⁿ) = 2·s₂(n) − 4n.
        let best = (100..201usize)
            .map(|n| Rational::from((4 * n as i64 - 2 * n.count_ones() as i64, n as i64)))
            .max()
            .unwrap();
        assert_eq!(*slope, best);
    }

    #[test]
    fn p_adic_unit_invariance() {
        let c = central(60);
        let scaled: Vec<Rational> = c.iter().map(|q| Rational::from(q * Rational::from((7, 5)))).collect();
        let a = radius(&GSeries::rational((1, 1, 1), c), Place::Prime(3)).unwrap();
        let b = radius(&GSeries::rational((1, 1, 1), scaled), Place::Prime(3)).unwrap();
        assert_eq!(a.estimate, b.estimate);
    }

    #[test]
    fn too_few() {
        let s = GSeries::rational((1, 1, 1), central(5));
        assert!(matches!(radius(&s, Place::Archimedean), Err(GFunctionError::TooFewCoefficients { .. })));
    }

    #[test]
    fn proximity_examples() {
        let s = GSeries::rational((1, 1, 1), central(201));
        let reps = vec![radius(&s, Place::Archimedean).unwrap(), radius(&s, Place::Prime(2)).unwrap()];
        let q = NumberField::rationals();
        let prec = Precision::default();
        let x = q.from_rational(Rational::from((1, 64)));
        assert!(proximity(&x, ProximityPlace::Archimedean(Embedding(0)), &reps, prec).unwrap());
        let far = q.from_rational(Rational::from((3, 2)));
        assert!(!proximity(&far, ProximityPlace::Archimedean(Embedding(0)), &reps, prec).unwrap());
        // 2-adically |1/64|_2 = 64 > 1.
        assert!(!proximity(&x, ProximityPlace::Prime(2), &reps, prec).unwrap());
        let y = q.from_rational(Rational::from(64));
        let RadiusEstimate::PAdic { slope, .. } = &reps[1].estimate else { panic!() };
        assert_eq!(proximity(&y, ProximityPlace::Prime(2), &reps, prec).unwrap(), Rational::from(6) > *slope);
    }

    #[test]
    fn sizes() {
        let zero = GSeries::rational((1, 1, 1), vec![Rational::new(); 30]);
        assert_eq!(size_proxy(&zero), 0.0);
        let geo = GSeries::rational((1, 1, 1), vec![Rational::from(1); 30]);
        assert_eq!(size_proxy(&geo), 0.0);
        let a = size_proxy(&GSeries::rational((1, 1, 1), central(101)));
        let b = size_proxy(&GSeries::rational((1, 1, 1), central(201)));
        assert!(a.is_finite() && ((a - b) / a).abs() < 0.1, "{a} {b}");
    }

    #[test]
    fn height_rows() {
        let t = coefficient_height_table(&[GSeries::rational((1, 1, 1), vec![Rational::from((1, 2))])]);
        assert_eq!(t.len(), 1);
        assert!((t[0].log_den - 2f64.ln()).abs() < 1e-12);
        let t = coefficient_height_table(&[GSeries::rational((1, 1, 1), central(3))]);
        assert_eq!(t[2].den, 64);
        let z = coefficient_height_table(&[GSeries::rational((1, 1, 1), vec![Rational::new(); 3])]);
        assert!(z.iter().all(|r| r.log_den == 0.0 && r.log_abs_max == 0.0));
    }
}
