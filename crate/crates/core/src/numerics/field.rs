//! Exact arithmetic in multi-quadratic number fields ℚ(√d₁, …, √d_r).
//!
//! An element is stored on the power basis indexed by subsets `S` of the
//! generators, `b_S = ∏_{i∈S} √d_i`, so `b_S·b_T = (∏_{i∈S∩T} d_i)·b_{S△T}`.
//! The rational field is `r = 0`; a quadratic field is `r = 1`.

use std::fmt;

use rug::{Integer, Rational};
use serde::Serialize;

use super::ball::{ComplexBall, Precision};
use super::NumericsError;

/// Largest number of square-root generators accepted.
pub const MAX_GENERATORS: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct NumberField {
    gens: Vec<i64>,
}

/// Squarefree part of a nonzero integer, keeping the sign.
pub fn squarefree_part(n: i64) -> i64 {
    assert!(n != 0);
    let sign = n.signum();
    let mut m = n.unsigned_abs();
    let mut out: u64 = 1;
    let mut p = 2u64;
    while p * p <= m {
        let mut e = 0;
        while m % p == 0 {
            m /= p;
            e += 1;
        }
        if e % 2 == 1 {
            out *= p;
        }
        p += 1;
    }
    out *= m;
    sign * out as i64
}

impl NumberField {
    pub fn rationals() -> Self {
        NumberField { gens: Vec::new() }
    }

    /// ℚ(√d) for a squarefree `d ∉ {0, 1}`.
    pub fn quadratic(d: i64) -> Result<Self, NumericsError> {
        Self::new(&[d])
    }

    /// ℚ(√d₁, …, √d_r). Generators must be squarefree, ≠ 0, 1, and independent
    /// modulo squares.
    pub fn new(gens: &[i64]) -> Result<Self, NumericsError> {
        if gens.len() > MAX_GENERATORS {
            return Err(NumericsError::InvalidField(format!("at most {MAX_GENERATORS} generators")));
        }
        for &d in gens {
            if d == 0 || d == 1 || squarefree_part(d) != d {
                return Err(NumericsError::InvalidField(format!("{d} is not a squarefree integer other than 0, 1")));
            }
        }
        let r = gens.len();
        for mask in 1usize..(1 << r) {
            let mut prod: i64 = 1;
            for (i, &d) in gens.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    prod = squarefree_part(prod * d);
                }
            }
            if prod == 1 {
                return Err(NumericsError::InvalidField("generators are dependent modulo squares".into()));
            }
        }
        Ok(NumberField { gens: gens.to_vec() })
    }

    pub fn generators(&self) -> &[i64] {
        &self.gens
    }

    pub fn degree(&self) -> usize {
        1 << self.gens.len()
    }

    pub fn is_rational(&self) -> bool {
        self.gens.is_empty()
    }

    /// Quadratic discriminant datum `d` of ℚ(√d), if the field is quadratic.
    pub fn quadratic_disc(&self) -> Option<i64> {
        (self.gens.len() == 1).then(|| self.gens[0])
    }

    /// Whether every generator of `self` is a generator of `other`.
    pub fn is_subfield_of(&self, other: &NumberField) -> bool {
        self.gens.iter().all(|g| other.gens.contains(g))
    }

    /// The compositum, with generators in first-seen order.
    pub fn compositum(&self, other: &NumberField) -> Result<NumberField, NumericsError> {
        let mut gens = self.gens.clone();
        for g in &other.gens {
            if !gens.contains(g) {
                gens.push(*g);
            }
        }
        NumberField::new(&gens)
    }

    /// Integer content of the basis element `b_S`: its square equals this value.
    pub fn basis_square(&self, mask: usize) -> i64 {
        let mut prod = 1i64;
        for (i, &d) in self.gens.iter().enumerate() {
            if mask >> i & 1 == 1 {
                prod *= d;
            }
        }
        prod
    }

    fn basis_product(&self, s: usize, t: usize) -> (i64, usize) {
        let mut c = 1i64;
        for (i, &d) in self.gens.iter().enumerate() {
            if (s & t) >> i & 1 == 1 {
                c *= d;
            }
        }
        (c, s ^ t)
    }

    /// Sign vectors of all embeddings, as bitmasks: bit `i` set means √d_i ↦ −√d_i.
    pub fn embeddings(&self) -> Vec<Embedding> {
        (0..self.degree()).map(Embedding).collect()
    }

    /// Ball value of `√d` under the chosen sign (principal root for sign `+`).
    fn sqrt_gen(&self, i: usize, emb: Embedding, prec: Precision) -> ComplexBall {
        let d = self.gens[i];
        let root = ComplexBall::from_i64(d.abs(), prec).sqrt().expect("positive");
        let root = if d < 0 { root.mul_i() } else { root };
        if emb.0 >> i & 1 == 1 {
            root.neg()
        } else {
            root
        }
    }

    /// Ball values of the power basis under an embedding.
    pub fn basis_values(&self, emb: Embedding, prec: Precision) -> Vec<ComplexBall> {
        let roots: Vec<ComplexBall> = (0..self.gens.len()).map(|i| self.sqrt_gen(i, emb, prec)).collect();
        (0..self.degree())
            .map(|mask| {
                let mut v = ComplexBall::one(prec);
                for (i, r) in roots.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        v = v.mul(r);
                    }
                }
                v
            })
            .collect()
    }

    /// Whether the embedding lands in ℝ.
    pub fn embedding_is_real(&self) -> bool {
        self.gens.iter().all(|&d| d > 0)
    }

    pub fn zero(&self) -> FieldElem {
        FieldElem { field: self.clone(), coeffs: vec![Rational::new(); self.degree()] }
    }

    pub fn one(&self) -> FieldElem {
        self.from_rational(Rational::from(1))
    }

    pub fn from_rational(&self, q: Rational) -> FieldElem {
        let mut e = self.zero();
        e.coeffs[0] = q;
        e
    }

    pub fn from_i64(&self, v: i64) -> FieldElem {
        self.from_rational(Rational::from(v))
    }

    /// The basis element `b_S`.
    pub fn basis(&self, mask: usize) -> FieldElem {
        let mut e = self.zero();
        e.coeffs[mask] = Rational::from(1);
        e
    }

    /// `√d` for a generator `d` of the field or a product of generators.
    pub fn sqrt_of(&self, d: i64) -> Option<FieldElem> {
        if d == 0 {
            return Some(self.zero());
        }
        (0..self.degree()).find_map(|m| {
            // d = b²·r² with r rational
            let ratio = Rational::from((d, self.basis_square(m)));
            let (n, q) = (ratio.numer().clone(), ratio.denom().clone());
            if n < 0 || !n.is_perfect_square() || !q.is_perfect_square() {
                return None;
            }
            Some(self.basis(m).mul_rational(&Rational::from((n.sqrt(), q.sqrt()))))
        })
    }

    /// Element with the given power-basis coordinates.
    pub fn elem(&self, coeffs: Vec<Rational>) -> Result<FieldElem, NumericsError> {
        if coeffs.len() != self.degree() {
            return Err(NumericsError::InvalidField("coordinate vector has wrong length".into()));
        }
        Ok(FieldElem { field: self.clone(), coeffs })
    }

    /// Short human label such as `Q(sqrt(2), sqrt(-1))`.
    pub fn label(&self) -> String {
        if self.gens.is_empty() {
            return "Q".into();
        }
        let parts: Vec<String> = self.gens.iter().map(|d| format!("sqrt({d})")).collect();
        format!("Q({})", parts.join(", "))
    }
}

/// An embedding of a multi-quadratic field into ℂ, as a sign mask.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Embedding(pub usize);

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldElem {
    field: NumberField,
    coeffs: Vec<Rational>,
}

/// Elements of a quadratic field: the one-generator case of [`FieldElem`].
pub type QuadFieldElem = FieldElem;

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (mask, c) in self.coeffs.iter().enumerate() {
            if *c == 0 {
                continue;
            }
            if mask == 0 {
                parts.push(c.to_string());
            } else {
                let b = self.field.basis_square(mask);
                let c_str = if *c == 1 { String::new() } else if *c == -1 { "-".into() } else { format!("{c}*") };
                parts.push(format!("{c_str}sqrt({b})"));
            }
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + ").replace("+ -", "- "))
        }
    }
}

impl FieldElem {
    /// Parses sums of terms `c`, `sqrt(d)` and `c*sqrt(d)` with rational `c` and
    /// integer `d`, as printed by `Display`, into the smallest multi-quadratic field.
    pub fn parse(src: &str) -> Result<Self, NumericsError> {
        let bad = |m: &str| NumericsError::Parse(format!("{m} in `{src}`"));
        let s: String = src.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(bad("empty expression"));
        }
        let mut terms: Vec<(Rational, i64)> = Vec::new();
        let mut depth = 0;
        let mut start = 0;
        let bytes = s.as_bytes();
        let mut pieces = Vec::new();
        for (i, &b) in bytes.iter().enumerate() {
            match b {
                b'(' => depth += 1,
                b')' => depth -= 1,
                b'+' | b'-' if depth == 0 && i > start => {
                    pieces.push(&s[start..i]);
                    start = i;
                }
                _ => {}
            }
        }
        pieces.push(&s[start..]);
        for p in pieces {
            let (sign, body) = match p.strip_prefix('-') {
                Some(r) => (-1, r),
                None => (1, p.strip_prefix('+').unwrap_or(p)),
            };
            let (coef, rad) = match body.find("sqrt(") {
                Some(pos) => {
                    let inner = body[pos + 5..].strip_suffix(')').ok_or_else(|| bad("unclosed sqrt"))?;
                    let d: i64 = inner.parse().map_err(|_| bad("non-integer radicand"))?;
                    let c = match &body[..pos] {
                        "" => Rational::from(1),
                        c => c.strip_suffix('*').ok_or_else(|| bad("missing `*`"))?.parse::<Rational>().map_err(|_| bad("bad coefficient"))?,
                    };
                    (c, d)
                }
                None => (body.parse::<Rational>().map_err(|_| bad("bad rational"))?, 1),
            };
            terms.push((coef * sign, rad));
        }
        let mut gens: Vec<i64> = Vec::new();
        for &(_, d) in &terms {
            let sf = squarefree_part(d);
            if sf != 1 && NumberField::new(&gens)?.sqrt_of(sf).is_none() {
                gens.push(sf);
            }
        }
        let k = NumberField::new(&gens)?;
        let mut acc = k.zero();
        for (c, d) in terms {
            let r = k.sqrt_of(d).ok_or_else(|| bad("radicand outside the field"))?;
            acc = acc.add(&r.mul_rational(&c));
        }
        Ok(acc)
    }

    /// `a + b·√disc` in ℚ(√disc).
    pub fn quadratic(a: Rational, b: Rational, disc: i64) -> Result<Self, NumericsError> {
        let k = NumberField::quadratic(disc)?;
        k.elem(vec![a, b])
    }

    pub fn field(&self) -> &NumberField {
        &self.field
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// For a quadratic element, the pair `(a, b)` of `a + b√d`.
    pub fn quadratic_parts(&self) -> Option<(&Rational, &Rational)> {
        (self.coeffs.len() == 2).then(|| (&self.coeffs[0], &self.coeffs[1]))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0)
    }

    pub fn is_rational(&self) -> bool {
        self.coeffs.iter().skip(1).all(|c| *c == 0)
    }

    pub fn as_rational(&self) -> Option<Rational> {
        self.is_rational().then(|| self.coeffs[0].clone())
    }

    /// Re-expresses the element in a larger multi-quadratic field.
    pub fn lift(&self, target: &NumberField) -> Result<FieldElem, NumericsError> {
        if !self.field.is_subfield_of(target) {
            return Err(NumericsError::InvalidField(format!("{} is not inside {}", self.field.label(), target.label())));
        }
        let pos: Vec<usize> = self.field.gens.iter().map(|g| target.gens.iter().position(|h| h == g).unwrap()).collect();
        let mut out = target.zero();
        for (mask, c) in self.coeffs.iter().enumerate() {
            let mut m = 0usize;
            for (i, p) in pos.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    m |= 1 << p;
                }
            }
            out.coeffs[m] = c.clone();
        }
        Ok(out)
    }

    fn common(&self, other: &FieldElem) -> (FieldElem, FieldElem) {
        if self.field == other.field {
            return (self.clone(), other.clone());
        }
        let k = self.field.compositum(&other.field).expect("compatible fields");
        (self.lift(&k).unwrap(), other.lift(&k).unwrap())
    }

    pub fn add(&self, other: &FieldElem) -> FieldElem {
        let (a, b) = self.common(other);
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| Rational::from(x + y)).collect();
        FieldElem { field: a.field, coeffs }
    }

    pub fn sub(&self, other: &FieldElem) -> FieldElem {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> FieldElem {
        FieldElem { field: self.field.clone(), coeffs: self.coeffs.iter().map(|c| Rational::from(-c)).collect() }
    }

    pub fn mul(&self, other: &FieldElem) -> FieldElem {
        let (a, b) = self.common(other);
        let k = a.field.clone();
        let mut out = k.zero();
        for (s, x) in a.coeffs.iter().enumerate() {
            if *x == 0 {
                continue;
            }
            for (t, y) in b.coeffs.iter().enumerate() {
                if *y == 0 {
                    continue;
                }
                let (c, u) = k.basis_product(s, t);
                out.coeffs[u] += Rational::from(x * y) * Integer::from(c);
            }
        }
        out
    }

    pub fn mul_rational(&self, q: &Rational) -> FieldElem {
        FieldElem { field: self.field.clone(), coeffs: self.coeffs.iter().map(|c| Rational::from(c * q)).collect() }
    }

    /// Image under the automorphism flipping the generators in `emb`.
    pub fn conjugate(&self, emb: Embedding) -> FieldElem {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(mask, c)| if (mask & emb.0).count_ones() % 2 == 1 { Rational::from(-c) } else { c.clone() })
            .collect();
        FieldElem { field: self.field.clone(), coeffs }
    }

    /// Field norm to ℚ.
    pub fn norm(&self) -> Rational {
        let mut acc = self.field.one();
        for e in self.field.embeddings() {
            acc = acc.mul(&self.conjugate(e));
        }
        acc.coeffs[0].clone()
    }

    pub fn inv(&self) -> Result<FieldElem, NumericsError> {
        if self.is_zero() {
            return Err(NumericsError::DivisionByZero);
        }
        let mut acc = self.field.one();
        for e in self.field.embeddings().into_iter().skip(1) {
            acc = acc.mul(&self.conjugate(e));
        }
        let n = self.mul(&acc).coeffs[0].clone();
        Ok(acc.mul_rational(&Rational::from(n.recip_ref())))
    }

    pub fn div(&self, other: &FieldElem) -> Result<FieldElem, NumericsError> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, n: u32) -> FieldElem {
        let mut acc = self.field.one();
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Complex ball value under an embedding.
    pub fn embed(&self, emb: Embedding, prec: Precision) -> ComplexBall {
        let basis = self.field.basis_values(emb, prec);
        let mut acc = ComplexBall::zero(prec);
        for (c, b) in self.coeffs.iter().zip(&basis) {
            if *c != 0 {
                acc = acc.add(&b.mul_rational(c));
            }
        }
        acc
    }

    /// Characteristic polynomial over ℚ, coefficients from constant term up.
    pub fn char_poly(&self) -> Vec<Rational> {
        // Multiply out ∏ (t − σ(x)) with coefficients in the field.
        let k = &self.field;
        let mut poly: Vec<FieldElem> = vec![k.one()];
        for e in k.embeddings() {
            let root = self.conjugate(e);
            let mut next = vec![k.zero(); poly.len() + 1];
            for (i, c) in poly.iter().enumerate() {
                next[i + 1] = next[i + 1].add(c);
                next[i] = next[i].sub(&c.mul(&root));
            }
            poly = next;
        }
        poly.into_iter().map(|c| c.coeffs[0].clone()).collect()
    }

    /// Absolute logarithmic Weil height, evaluated in double precision.
    pub fn weil_height_f64(&self) -> f64 {
        let cp = self.char_poly();
        let mut den = Integer::from(1);
        for c in &cp {
            den.lcm_mut(c.denom());
        }
        let ints: Vec<Integer> = cp.iter().map(|c| Integer::from(c.numer() * &den) / c.denom()).collect();
        let mut content = Integer::new();
        for v in &ints {
            content.gcd_mut(v);
        }
        let lead = Integer::from(ints.last().unwrap() / &content).abs();
        let prec = Precision::new(128).unwrap();
        let mut s = lead.to_f64().ln();
        for e in self.field.embeddings() {
            let z = self.embed(e, prec);
            let a = z.abs_upper().to_f64();
            if a > 1.0 {
                s += a.ln();
            }
        }
        s / self.field.degree() as f64
    }

    /// Squared-free display suitable for JSON output.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "field": self.field.label(),
            "coords": self.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            "value": self.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn quadratic_multiplication() {
        let x = FieldElem::quadratic(q(1, 1), q(1, 1), 2).unwrap();
        let y = x.mul(&x);
        assert_eq!(y.coeffs(), &[q(3, 1), q(2, 1)]);
        assert_eq!(x.norm(), q(-1, 1));
    }

    #[test]
    fn biquadratic_basis_products() {
        let k = NumberField::new(&[2, -1]).unwrap();
        let s2 = k.sqrt_of(2).unwrap();
        let i = k.sqrt_of(-1).unwrap();
        let s_2 = k.sqrt_of(-2).unwrap();
        assert_eq!(s2.mul(&i), s_2);
        assert_eq!(s_2.mul(&s_2), k.from_i64(-2));
        assert_eq!(i.mul(&s_2), s2.neg());
    }

    #[test]
    fn inverse_and_embedding() {
        let k = NumberField::new(&[2, -1]).unwrap();
        let x = k.elem(vec![q(1, 2), q(3, 1), q(-1, 5), q(7, 3)]).unwrap();
        let y = x.inv().unwrap();
        assert_eq!(x.mul(&y), k.one());
        let prec = Precision::new(128).unwrap();
        for e in k.embeddings() {
            let prod = x.embed(e, prec).mul(&y.embed(e, prec));
            assert!(prod.overlaps(&ComplexBall::one(prec)));
        }
    }

    #[test]
    fn dependent_generators_rejected() {
        assert!(NumberField::new(&[2, 8]).is_err());
        assert!(NumberField::new(&[2, 3, 6]).is_err());
        assert!(NumberField::new(&[4]).is_err());
    }

    #[test]
    fn heights() {
        let k = NumberField::quadratic(2).unwrap();
        let r2 = k.sqrt_of(2).unwrap();
        assert!((r2.weil_height_f64() - 0.5 * 2f64.ln()).abs() < 1e-12);
        let half = k.from_rational(q(1, 2));
        assert!((half.weil_height_f64() - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn lift_into_compositum() {
        let a = FieldElem::quadratic(q(0, 1), q(1, 1), -1).unwrap();
        let b = FieldElem::quadratic(q(0, 1), q(1, 1), 2).unwrap();
        let c = a.mul(&b);
        assert_eq!(c.field().degree(), 4);
        assert_eq!(c.mul(&c).as_rational(), Some(q(-2, 1)));
    }

    #[test]
    fn parse_round_trip() {
        for src in ["5/2 - 2*sqrt(2)", "-1/4*sqrt(3)", "7", "sqrt(-1) + 1/2*sqrt(2)", "-15/32 + 3/32*sqrt(-7)"] {
            let x = FieldElem::parse(src).unwrap();
            assert_eq!(FieldElem::parse(&x.to_string()).unwrap(), x);
        }
        let x = FieldElem::parse("2*sqrt(8)").unwrap();
        assert_eq!(x, FieldElem::quadratic(Rational::new(), Rational::from(4), 2).unwrap());
        assert!(FieldElem::parse("2 sqrt(2").is_err());
        assert!(FieldElem::parse("").is_err());
    }
}
