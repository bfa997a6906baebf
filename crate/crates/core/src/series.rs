//! Truncated power series with exact coefficients and their ball evaluation.

use rug::float::Round;
use rug::{Float, Rational};
use thiserror::Error;

use crate::numerics::ball::{mag_add, mag_from_f64, MAG_PREC};
use crate::numerics::{ComplexBall, FieldElem, NumberField, NumericsError, RationalFunction};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum SeriesError {
    #[error("truncation tail bound {tail:e} exceeds the allowed {allowed:e}")]
    TruncationDominates { tail: f64, allowed: f64 },
    #[error("evaluation point lies outside the estimated disc of convergence")]
    OutsideDisc,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// `Σ_{n<N} a_n x^n mod x^N` over ℚ.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QSeries {
    coeffs: Vec<Rational>,
}

impl QSeries {
    pub fn zero(len: usize) -> Self {
        QSeries { coeffs: vec![Rational::new(); len] }
    }

    pub fn one(len: usize) -> Self {
        Self::constant(Rational::from(1), len)
    }

    pub fn constant(c: Rational, len: usize) -> Self {
        let mut s = Self::zero(len);
        if len > 0 {
            s.coeffs[0] = c;
        }
        s
    }

    pub fn from_coeffs(coeffs: Vec<Rational>) -> Self {
        QSeries { coeffs }
    }

    pub fn from_rational_function(f: &RationalFunction, len: usize) -> Result<Self, NumericsError> {
        if len == 0 {
            return Ok(Self::zero(0));
        }
        Ok(QSeries { coeffs: f.taylor(len - 1)? })
    }

    /// Number of stored coefficients `N` (the series is known mod `x^N`).
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> &Rational {
        &self.coeffs[n]
    }

    pub fn truncate(&self, len: usize) -> Self {
        QSeries { coeffs: self.coeffs[..len.min(self.len())].to_vec() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0)
    }

    /// Index of the first nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| *c != 0)
    }

    pub fn add(&self, o: &QSeries) -> QSeries {
        let n = self.len().min(o.len());
        QSeries { coeffs: (0..n).map(|i| Rational::from(&self.coeffs[i] + &o.coeffs[i])).collect() }
    }

    pub fn sub(&self, o: &QSeries) -> QSeries {
        let n = self.len().min(o.len());
        QSeries { coeffs: (0..n).map(|i| Rational::from(&self.coeffs[i] - &o.coeffs[i])).collect() }
    }

    pub fn neg(&self) -> QSeries {
        QSeries { coeffs: self.coeffs.iter().map(|c| Rational::from(-c)).collect() }
    }

    pub fn scale(&self, q: &Rational) -> QSeries {
        QSeries { coeffs: self.coeffs.iter().map(|c| Rational::from(c * q)).collect() }
    }

    pub fn mul(&self, o: &QSeries) -> QSeries {
        let n = self.len().min(o.len());
        let mut out = vec![Rational::new(); n];
        for (i, a) in self.coeffs.iter().take(n).enumerate() {
            if *a == 0 {
                continue;
            }
            for (j, b) in o.coeffs.iter().take(n - i).enumerate() {
                if *b != 0 {
                    out[i + j] += Rational::from(a * b);
                }
            }
        }
        QSeries { coeffs: out }
    }

    /// The Euler operator `θ = x d/dx`.
    pub fn theta(&self) -> QSeries {
        QSeries { coeffs: self.coeffs.iter().enumerate().map(|(n, c)| Rational::from(c * n as u32)).collect() }
    }

    /// Ball value at `x`, adding the geometric-majorant tail bound.
    pub fn eval(&self, x: &ComplexBall, max_tail: f64) -> Result<ComplexBall, SeriesError> {
        eval_with_tail(&self.coeffs, x, max_tail)
    }
}

/// Ratio-test radius estimate `(|a_i|/|a_j|)^{1/(j−i)}` across the nonzero
/// coefficients of the window `[start, end)`.
pub fn ratio_estimate(coeffs: &[Rational], start: usize) -> Option<f64> {
    let idx: Vec<usize> = (start..coeffs.len()).filter(|&i| coeffs[i] != 0).collect();
    if idx.len() < 2 {
        return None;
    }
    let (i, j) = (idx[0], *idx.last().unwrap());
    let li = log_abs(&coeffs[i]);
    let lj = log_abs(&coeffs[j]);
    Some(((li - lj) / (j - i) as f64).exp())
}

/// `log |q|` for a nonzero rational, robust to huge numerators and denominators.
pub fn log_abs(q: &Rational) -> f64 {
    let n = Float::with_val(64, q.numer()).abs().ln().to_f64();
    let d = Float::with_val(64, q.denom()).ln().to_f64();
    n - d
}

/// Tail majorant for `Σ_{n≥N} a_n x^n`: geometric bound `|a_n| ≤ C r^{-n}` fitted
/// on the last ten coefficients, `r = 0.9 ×` the ratio-test estimate.
pub fn tail_bound(coeffs: &[Rational], abs_x: f64) -> Result<f64, SeriesError> {
    let n = coeffs.len();
    if n == 0 {
        return Err(SeriesError::OutsideDisc);
    }
    let start = n - n.div_ceil(2);
    let Some(rhat) = ratio_estimate(coeffs, start) else {
        // Polynomial data: treat as exact once the tail window is all zero.
        let window = n.saturating_sub(10);
        return if coeffs[window..].iter().all(|c| *c == 0) { Ok(0.0) } else { Err(SeriesError::OutsideDisc) };
    };
    let r = 0.9 * rhat;
    let q = abs_x / r;
    if !(q < 1.0) {
        return Err(SeriesError::OutsideDisc);
    }
    let mut log_c = f64::NEG_INFINITY;
    for (i, c) in coeffs.iter().enumerate().skip(n.saturating_sub(10)) {
        if *c != 0 {
            log_c = log_c.max(log_abs(c) + i as f64 * r.ln());
        }
    }
    if log_c == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    if abs_x == 0.0 {
        return Ok(0.0);
    }
    Ok((log_c + n as f64 * q.ln() - (1.0 - q).ln()).exp())
}

pub fn eval_with_tail(coeffs: &[Rational], x: &ComplexBall, max_tail: f64) -> Result<ComplexBall, SeriesError> {
    let prec = x.precision();
    let mut acc = ComplexBall::zero(prec);
    for c in coeffs.iter().rev() {
        acc = acc.mul(x);
        if *c != 0 {
            acc = acc.add(&ComplexBall::from_rational(c, prec));
        }
    }
    let tail = tail_bound(coeffs, x.abs_upper().to_f64())?;
    if tail > max_tail {
        return Err(SeriesError::TruncationDominates { tail, allowed: max_tail });
    }
    let t = Float::with_val_round(MAG_PREC, tail * (1.0 + 1e-12), Round::Up).0;
    Ok(acc.inflate(&mag_add(&t, &mag_from_f64(0.0))))
}

/// 2×2 matrix of series.
pub type SeriesMatrix = [[QSeries; 2]; 2];

pub fn mat_mul(a: &SeriesMatrix, b: &SeriesMatrix) -> SeriesMatrix {
    let e = |i: usize, j: usize| a[i][0].mul(&b[0][j]).add(&a[i][1].mul(&b[1][j]));
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

pub fn mat_det(a: &SeriesMatrix) -> QSeries {
    a[0][0].mul(&a[1][1]).sub(&a[0][1].mul(&a[1][0]))
}

/// Right multiplication by a constant rational matrix.
pub fn mat_mul_const_right(a: &SeriesMatrix, c: &[[Rational; 2]; 2]) -> SeriesMatrix {
    let e = |i: usize, j: usize| a[i][0].scale(&c[0][j]).add(&a[i][1].scale(&c[1][j]));
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

/// Left multiplication by a constant rational matrix.
pub fn mat_mul_const_left(c: &[[Rational; 2]; 2], a: &SeriesMatrix) -> SeriesMatrix {
    let e = |i: usize, j: usize| a[0][j].scale(&c[i][0]).add(&a[1][j].scale(&c[i][1]));
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

/// Power series with coefficients in a multi-quadratic field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldSeries {
    field: NumberField,
    coeffs: Vec<FieldElem>,
}

impl FieldSeries {
    pub fn zero(field: &NumberField, len: usize) -> Self {
        FieldSeries { field: field.clone(), coeffs: vec![field.zero(); len] }
    }

    pub fn constant(c: &FieldElem, len: usize) -> Self {
        let mut s = Self::zero(c.field(), len);
        if len > 0 {
            s.coeffs[0] = c.clone();
        }
        s
    }

    pub fn from_qseries(s: &QSeries, field: &NumberField) -> Self {
        FieldSeries { field: field.clone(), coeffs: s.coeffs().iter().map(|c| field.from_rational(c.clone())).collect() }
    }

    pub fn coeffs(&self) -> &[FieldElem] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, o: &FieldSeries) -> FieldSeries {
        let n = self.len().min(o.len());
        FieldSeries { field: self.field.clone(), coeffs: (0..n).map(|i| self.coeffs[i].add(&o.coeffs[i])).collect() }
    }

    pub fn scale(&self, c: &FieldElem) -> FieldSeries {
        FieldSeries { field: self.field.clone(), coeffs: self.coeffs.iter().map(|a| a.mul(c)).collect() }
    }

    pub fn mul(&self, o: &FieldSeries) -> FieldSeries {
        let n = self.len().min(o.len());
        let mut out = vec![self.field.zero(); n];
        for (i, a) in self.coeffs.iter().take(n).enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().take(n - i).enumerate() {
                if !b.is_zero() {
                    out[i + j] = out[i + j].add(&a.mul(b));
                }
            }
        }
        FieldSeries { field: self.field.clone(), coeffs: out }
    }

    /// Index and value of the first nonzero coefficient.
    pub fn lowest_nonzero(&self) -> Option<(usize, &FieldElem)> {
        self.coeffs.iter().enumerate().find(|(_, c)| !c.is_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Precision;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn geometric_series_product() {
        let f = RationalFunction::parse("1/(1-x)").unwrap();
        let s = QSeries::from_rational_function(&f, 6).unwrap();
        let sq = s.mul(&s);
        assert_eq!(sq.coeffs(), &[q(1, 1), q(2, 1), q(3, 1), q(4, 1), q(5, 1), q(6, 1)]);
        assert_eq!(s.theta().coeffs()[3], q(3, 1));
    }

    #[test]
    fn evaluation_encloses_closed_form() {
        let prec = Precision::new(256).unwrap();
        let f = RationalFunction::parse("1/(1-x)").unwrap();
        let s = QSeries::from_rational_function(&f, 120).unwrap();
        let x = ComplexBall::from_rational(&q(1, 8), prec);
        let v = s.eval(&x, 1e-30).unwrap();
        assert!(v.contains_rational(&q(8, 7), &Rational::new()));
        assert!(v.rad_f64() < 1e-60);
    }

    #[test]
    fn outside_disc_is_refused() {
        let prec = Precision::new(128).unwrap();
        let f = RationalFunction::parse("1/(1-x)").unwrap();
        let s = QSeries::from_rational_function(&f, 50).unwrap();
        let x = ComplexBall::from_rational(&q(3, 2), prec);
        assert!(s.eval(&x, 1.0).is_err());
    }
}
