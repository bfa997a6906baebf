//! Weil heights, class-number tables against `|D|^{1/2−ε}`, and the
//! degree–discriminant bookkeeping for located CM fibers.

use rayon::prelude::*;
use rug::{Integer, Rational};
use serde::Serialize;
use thiserror::Error;

use crate::cm::{class_number, is_discriminant, is_fundamental};
use crate::numerics::roots::isolate_roots;
use crate::numerics::{ComplexBall, FieldElem, NumericsError, Precision, QPoly};
use crate::relations::{RelationCertificate, RelationOutcome};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum HeightError {
    #[error("root isolation failed: {0}")]
    RootIsolationFailed(String),
    #[error("invalid minimal polynomial: {0}")]
    InvalidPolynomial(String),
    #[error("missing certificates: {0}")]
    MissingCertificates(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// An algebraic number given by its minimal polynomial and an isolating ball.
#[derive(Clone, Debug)]
pub struct AlgebraicNumber {
    /// Primitive integer coefficients, constant term first, positive leading coefficient.
    pub min_poly: Vec<Integer>,
    pub approx: ComplexBall,
}

impl AlgebraicNumber {
    pub fn rational(q: &Rational, prec: Precision) -> Self {
        AlgebraicNumber {
            min_poly: vec![Integer::from(-q.numer()), q.denom().clone()],
            approx: ComplexBall::from_rational(q, prec),
        }
    }

    /// From a polynomial that is a power of an irreducible one; `approx` is
    /// matched against the isolated roots.
    pub fn from_poly(p: &QPoly, approx: &ComplexBall, prec: Precision) -> Result<Self, HeightError> {
        if p.degree().unwrap_or(0) == 0 {
            return Err(HeightError::InvalidPolynomial("constant polynomial".into()));
        }
        let sq = p.div_rem(&p.gcd(&p.derivative()))?.0;
        let min_poly = sq.primitive_integer();
        let roots = isolate_roots(&min_poly, prec).map_err(|e| HeightError::RootIsolationFailed(e.to_string()))?;
        let hits: Vec<&ComplexBall> = roots.iter().filter(|r| r.overlaps(approx)).collect();
        match hits.as_slice() {
            [r] => Ok(AlgebraicNumber { min_poly, approx: (*r).clone() }),
            [] => Err(HeightError::InvalidPolynomial("no root near the given approximation".into())),
            _ => Err(HeightError::RootIsolationFailed("approximation does not isolate a root".into())),
        }
    }

    /// Minimal polynomial from the characteristic polynomial, root picked by the first embedding.
    pub fn from_field_elem(x: &FieldElem, prec: Precision) -> Result<Self, HeightError> {
        if let Some(q) = x.as_rational() {
            return Ok(Self::rational(&q, prec));
        }
        let approx = x.embed(crate::numerics::Embedding(0), prec);
        Self::from_poly(&QPoly::new(x.char_poly()), &approx, prec)
    }

    pub fn degree(&self) -> usize {
        self.min_poly.len() - 1
    }
}

/// `log⁺|z|` as a real ball.
fn log_plus_abs(z: &ComplexBall) -> Result<ComplexBall, NumericsError> {
    let prec = z.precision();
    let lo = z.abs_lower().to_f64();
    let hi = z.abs_upper().to_f64();
    if hi <= 1.0 {
        return Ok(ComplexBall::zero(prec));
    }
    let n2 = z.mul(&z.conj()).real_part();
    let l = n2.log()?.real_part().mul_rational(&Rational::from((1, 2)));
    if lo >= 1.0 {
        Ok(l)
    } else {
        Ok(l.union(&ComplexBall::zero(prec)))
    }
}

/// Absolute logarithmic Weil height `(log|a_d| + Σ log⁺|αᵢ|)/d`.
pub fn weil_height(x: &AlgebraicNumber, prec: Precision) -> Result<ComplexBall, HeightError> {
    let d = x.degree();
    if d == 0 {
        return Err(HeightError::InvalidPolynomial("degree 0".into()));
    }
    let roots = isolate_roots(&x.min_poly, prec).map_err(|e| HeightError::RootIsolationFailed(e.to_string()))?;
    if roots.len() != d {
        return Err(HeightError::RootIsolationFailed(format!("{} of {d} roots isolated", roots.len())));
    }
    let lead = ComplexBall::from_integer(&x.min_poly[d], prec);
    let mut acc = lead.log()?;
    for r in &roots {
        acc = acc.add(&log_plus_abs(r)?);
    }
    Ok(acc.mul_rational(&Rational::from((1, d as i64))).real_part())
}

// ---------------------------------------------------------------------------
// Class numbers against |D|^{1/2−ε}.

#[derive(Clone, Debug)]
pub struct SiegelRow {
    pub d: i64,
    pub fundamental: bool,
    pub h: usize,
    /// `h/|D|^{1/2−ε}` per configured ε.
    pub ratios: Vec<ComplexBall>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SiegelMin {
    pub epsilon: String,
    pub d: i64,
    pub h: usize,
    pub ratio_mid: String,
    pub ratio_rad: String,
}

#[derive(Clone, Debug)]
pub struct SiegelTable {
    pub max_abs_d: i64,
    pub epsilons: Vec<Rational>,
    pub rows: Vec<SiegelRow>,
    pub minima: Vec<SiegelMin>,
}

pub fn default_epsilons() -> Vec<Rational> {
    [(1, 20), (1, 10), (1, 4), (9, 20)].iter().map(|&p| Rational::from(p)).collect()
}

fn eps_decimal(e: &Rational) -> String {
    let v = e.to_f64();
    format!("{}", (v * 1e6).round() / 1e6)
}

/// Rows for every discriminant `−max_abs_d ≤ D ≤ −3`, ordered `D = −3, −4, …`.
pub fn siegel_table(max_abs_d: i64, epsilons: &[Rational], prec: Precision) -> Result<SiegelTable, HeightError> {
    for e in epsilons {
        if *e <= 0 || *e > Rational::from((1, 2)) {
            return Err(HeightError::InvalidPolynomial(format!("epsilon {e} outside (0, 1/2]")));
        }
    }
    let ds: Vec<i64> = (3..=max_abs_d.max(3)).map(|n| -n).filter(|&d| is_discriminant(d)).collect();
    let rows: Vec<SiegelRow> = ds
        .par_iter()
        .map(|&d| {
            let h = class_number(d).expect("valid discriminant").h;
            let ad = ComplexBall::from_integer(&Integer::from(-d), prec);
            let ratios = epsilons
                .iter()
                .map(|e| {
                    let ex = Rational::from(e - Rational::from((1, 2)));
                    ad.pow_rational_real(&ex).expect("positive base").mul_rational(&Rational::from(h as u64)).real_part()
                })
                .collect();
            SiegelRow { d, fundamental: is_fundamental(d), h, ratios }
        })
        .collect();
    let mut minima = Vec::new();
    for (i, e) in epsilons.iter().enumerate() {
        let best = rows
            .iter()
            .min_by(|a, b| a.ratios[i].re().partial_cmp(b.ratios[i].re()).expect("finite ratios").then(b.d.cmp(&a.d)))
            .expect("nonempty range");
        let (mid, _) = best.ratios[i].mid_strings(20);
        minima.push(SiegelMin { epsilon: e.to_string(), d: best.d, h: best.h, ratio_mid: mid, ratio_rad: best.ratios[i].rad_string() });
    }
    Ok(SiegelTable { max_abs_d, epsilons: epsilons.to_vec(), rows, minima })
}

impl SiegelTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("D,fundamental,h");
        for e in &self.epsilons {
            let s = eps_decimal(e);
            out.push_str(&format!(",ratio_eps_{s}_mid,ratio_eps_{s}_rad"));
        }
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!("{},{},{}", r.d, r.fundamental, r.h));
            for b in &r.ratios {
                out.push_str(&format!(",{},{}", b.mid_strings(20).0, b.rad_string()));
            }
            out.push('\n');
        }
        out
    }

    /// The summary rows, one line per ε.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("epsilon,argmin_D,h,min_ratio_mid,min_ratio_rad\n");
        for m in &self.minima {
            out.push_str(&format!("{},{},{},{},{}\n", m.epsilon, m.d, m.h, m.ratio_mid, m.ratio_rad));
        }
        out
    }

    pub fn class_number_one(&self, fundamental_only: bool) -> Vec<i64> {
        self.rows.iter().filter(|r| r.h == 1 && (r.fundamental || !fundamental_only)).map(|r| r.d).collect()
    }
}

// ---------------------------------------------------------------------------
// Degree–discriminant bookkeeping.

/// A constant of the inequality shapes: a number or a named parameter.
#[derive(Clone, Debug, PartialEq)]
pub enum Constant {
    Symbolic(String),
    Numeric(f64),
}

impl Constant {
    fn show(&self) -> String {
        match self {
            Constant::Symbolic(s) => s.clone(),
            Constant::Numeric(v) => format!("{v}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct OrbitConfig {
    pub c1: Constant,
    pub c2: Constant,
    pub c01: Constant,
}

impl Default for OrbitConfig {
    fn default() -> Self {
        OrbitConfig { c1: Constant::Symbolic("c1".into()), c2: Constant::Symbolic("c2".into()), c01: Constant::Symbolic("c01".into()) }
    }
}

#[derive(Clone, Debug)]
pub struct OrbitReport {
    pub height: ComplexBall,
    pub relation_degree: usize,
    pub field_degree: usize,
    pub base_degree: usize,
    pub max_abs_disc: i64,
    pub degree_inequality: String,
    pub height_inequality: String,
    /// Evaluated when all constants are numeric.
    pub degree_inequality_holds: Option<bool>,
}

impl OrbitReport {
    pub fn to_json(&self) -> serde_json::Value {
        let (m, _) = self.height.mid_strings(25);
        serde_json::json!({
            "height": { "mid": m, "rad": self.height.rad_string() },
            "relation_degree": self.relation_degree,
            "field_degree": self.field_degree,
            "base_degree": self.base_degree,
            "max_abs_disc": self.max_abs_disc,
            "degree_inequality": self.degree_inequality,
            "height_inequality": self.height_inequality,
            "degree_inequality_holds": self.degree_inequality_holds,
        })
    }
}

/// Assembles `h(x(s))`, `deg R`, `[L_s:ℚ]` and `max |D_k|` and states
/// `[K(s):ℚ] ≥ c₁·M^{c₂}` and `h(x(s)) ≤ c₀₁·deg(R)^{c₂}` with them substituted.
pub fn galois_orbit_bound_report(
    outcome: &RelationOutcome,
    certificates: &[RelationCertificate],
    config: &OrbitConfig,
    prec: Precision,
) -> Result<OrbitReport, HeightError> {
    if certificates.is_empty() {
        return Err(HeightError::MissingCertificates("no relation certificates".into()));
    }
    let missing: Vec<usize> = outcome.fiber_discriminants.iter().enumerate().filter(|(_, d)| d.is_none()).map(|(k, _)| k + 1).collect();
    if !missing.is_empty() {
        return Err(HeightError::MissingCertificates(format!("coordinates {missing:?} are not CM at this fiber")));
    }
    let x = AlgebraicNumber::from_field_elem(&outcome.point, prec)?;
    let height = weil_height(&x, prec)?;
    let max_abs_disc = outcome.fiber_discriminants.iter().flatten().map(|d| d.abs()).max().unwrap_or(0);
    let base_degree = x.degree();
    let relation_degree = outcome.polynomial.degree;
    let field_degree = outcome.field.degree();
    let (hm, _) = height.mid_strings(12);
    let degree_inequality =
        format!("[K(s):Q] >= {}*M^{} with M = {max_abs_disc}, [K(s):Q] = {base_degree}", config.c1.show(), config.c2.show());
    let height_inequality = format!(
        "h(x(s)) <= {}*deg(R)^{} with h(x(s)) = {hm}, deg(R) = {relation_degree}, [L_s:Q] = {field_degree}",
        config.c01.show(),
        config.c2.show()
    );
    let degree_inequality_holds = match (&config.c1, &config.c2) {
        (Constant::Numeric(c1), Constant::Numeric(c2)) => Some(base_degree as f64 >= c1 * (max_abs_disc as f64).powf(*c2)),
        _ => None,
    };
    Ok(OrbitReport { height, relation_degree, field_degree, base_degree, max_abs_disc, degree_inequality, height_inequality, degree_inequality_holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::NumberField;

    fn prec() -> Precision {
        Precision::new(256).unwrap()
    }

    fn close(b: &ComplexBall, v: f64) -> bool {
        (b.mid_f64().0 - v).abs() < 1e-12
    }

    #[test]
    fn heights_of_small_numbers() {
        let half = AlgebraicNumber::rational(&Rational::from((1, 2)), prec());
        assert!(close(&weil_height(&half, prec()).unwrap(), 2f64.ln()));
        let zero = AlgebraicNumber::rational(&Rational::new(), prec());
        assert!(close(&weil_height(&zero, prec()).unwrap(), 0.0));
        let k = NumberField::quadratic(2).unwrap();
        let r2 = AlgebraicNumber::from_field_elem(&k.sqrt_of(2).unwrap(), prec()).unwrap();
        assert_eq!(r2.min_poly, vec![Integer::from(-2), Integer::new(), Integer::from(1)]);
        assert!(close(&weil_height(&r2, prec()).unwrap(), 0.5 * 2f64.ln()));
    }

    #[test]
    fn height_of_located_point() {
        let k = NumberField::quadratic(2).unwrap();
        let t = k.elem(vec![Rational::from((5, 2)), Rational::from(-2)]).unwrap();
        let x = AlgebraicNumber::from_field_elem(&t, prec()).unwrap();
        assert_eq!(x.min_poly, vec![Integer::from(-7), Integer::from(-20), Integer::from(4)]);
        let want = (4f64.ln() + (2.5 + 2.0 * 2f64.sqrt()).ln()) / 2.0;
        assert!(close(&weil_height(&x, prec()).unwrap(), want));
    }

    #[test]
    fn siegel_small_range() {
        let t = siegel_table(200, &[Rational::from((1, 10)), Rational::from((1, 2))], prec()).unwrap();
        assert_eq!(t.class_number_one(true), vec![-3, -4, -7, -8, -11, -19, -43, -67, -163]);
        assert!(t.rows.iter().any(|r| r.d == -163 && r.h == 1));
        assert!(t.rows.iter().all(|r| r.ratios[1].mid_f64().0 >= 1.0));
        let t3 = siegel_table(1000, &[Rational::from((1, 10))], prec()).unwrap();
        assert_eq!(t3.minima[0].h, 1);
        assert_eq!(t3.to_csv(), siegel_table(1000, &[Rational::from((1, 10))], prec()).unwrap().to_csv());
    }
}
