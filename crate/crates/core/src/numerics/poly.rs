//! Dense polynomials and rational functions over ℚ, plus a parser for
//! rational functions of `x` written in ordinary infix notation.

use std::fmt;

use rug::{Integer, Rational};

use super::NumericsError;

/// Polynomial `Σ c_i x^i` with exact rational coefficients, no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct QPoly {
    coeffs: Vec<Rational>,
}

impl fmt::Debug for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if *c == 0 {
                continue;
            }
            let neg = *c < 0;
            let a = Rational::from(c.abs_ref());
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let coef = if a == 1 && i > 0 { String::new() } else if a.denom() == &1 { a.to_string() } else { format!("({a})") };
            let star = if coef.is_empty() || i == 0 { "" } else { "*" };
            match i {
                0 => write!(f, "{coef}")?,
                1 => write!(f, "{coef}{star}x")?,
                _ => write!(f, "{coef}{star}x^{i}")?,
            }
        }
        Ok(())
    }
}

impl QPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().map_or(false, |c| *c == 0) {
            coeffs.pop();
        }
        QPoly { coeffs }
    }

    pub fn zero() -> Self {
        QPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        QPoly::new(vec![c])
    }

    pub fn x() -> Self {
        QPoly::new(vec![Rational::new(), Rational::from(1)])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    pub fn add(&self, o: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        QPoly::new((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }

    pub fn neg(&self) -> QPoly {
        QPoly { coeffs: self.coeffs.iter().map(|c| Rational::from(-c)).collect() }
    }

    pub fn sub(&self, o: &QPoly) -> QPoly {
        self.add(&o.neg())
    }

    pub fn scale(&self, q: &Rational) -> QPoly {
        QPoly::new(self.coeffs.iter().map(|c| Rational::from(c * q)).collect())
    }

    pub fn mul(&self, o: &QPoly) -> QPoly {
        if self.is_zero() || o.is_zero() {
            return QPoly::zero();
        }
        let mut out = vec![Rational::new(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == 0 {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += Rational::from(a * b);
            }
        }
        QPoly::new(out)
    }

    pub fn pow(&self, n: u32) -> QPoly {
        let mut acc = QPoly::constant(Rational::from(1));
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn derivative(&self) -> QPoly {
        QPoly::new(self.coeffs.iter().enumerate().skip(1).map(|(i, c)| Rational::from(c * i as u32)).collect())
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Euclidean division: returns `(q, r)` with `self = q·d + r`.
    pub fn div_rem(&self, d: &QPoly) -> Result<(QPoly, QPoly), NumericsError> {
        let dd = d.degree().ok_or(NumericsError::DivisionByZero)?;
        let mut r = self.coeffs.clone();
        let mut q = vec![Rational::new(); r.len().saturating_sub(dd)];
        let lead = d.lead();
        while r.len() > dd && !r.is_empty() {
            let k = r.len() - 1 - dd;
            let c = Rational::from(&r[r.len() - 1] / &lead);
            for (i, dc) in d.coeffs.iter().enumerate() {
                r[k + i] -= Rational::from(&c * dc);
            }
            q[k] = c;
            r.pop();
            while r.last().map_or(false, |c| *c == 0) {
                r.pop();
            }
        }
        Ok((QPoly::new(q), QPoly::new(r)))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, o: &QPoly) -> QPoly {
        let mut a = self.clone();
        let mut b = o.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        if a.is_zero() {
            return a;
        }
        let l = a.lead();
        a.scale(&Rational::from(l.recip_ref()))
    }

    /// Multiplicity of the root `x = 0`.
    pub fn order_at_zero(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| *c != 0)
    }

    /// Integer coefficients of a primitive multiple with positive leading coefficient.
    pub fn primitive_integer(&self) -> Vec<Integer> {
        let mut den = Integer::from(1);
        for c in &self.coeffs {
            den.lcm_mut(c.denom());
        }
        let mut ints: Vec<Integer> = self.coeffs.iter().map(|c| Integer::from(c.numer() * &den) / c.denom()).collect();
        let mut g = Integer::new();
        for v in &ints {
            g.gcd_mut(v);
        }
        if g != 0 {
            for v in ints.iter_mut() {
                *v /= &g;
            }
        }
        if ints.last().map_or(false, |l| *l < 0) {
            for v in ints.iter_mut() {
                *v = Integer::from(-&*v);
            }
        }
        ints
    }
}

/// A reduced quotient `num/den` with monic denominator.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalFunction {
    num: QPoly,
    den: QPoly,
}

impl fmt::Debug for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.degree() == Some(0) {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl Default for RationalFunction {
    fn default() -> Self {
        RationalFunction::constant(Rational::new())
    }
}

impl RationalFunction {
    pub fn new(num: QPoly, den: QPoly) -> Result<Self, NumericsError> {
        if den.is_zero() {
            return Err(NumericsError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(RationalFunction { num, den: QPoly::constant(Rational::from(1)) });
        }
        let g = num.gcd(&den);
        let (n, _) = num.div_rem(&g)?;
        let (d, _) = den.div_rem(&g)?;
        let l = Rational::from(d.lead().recip_ref());
        Ok(RationalFunction { num: n.scale(&l), den: d.scale(&l) })
    }

    pub fn from_poly(p: QPoly) -> Self {
        RationalFunction { num: p, den: QPoly::constant(Rational::from(1)) }
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_poly(QPoly::constant(c))
    }

    pub fn x() -> Self {
        Self::from_poly(QPoly::x())
    }

    pub fn num(&self) -> &QPoly {
        &self.num
    }

    pub fn den(&self) -> &QPoly {
        &self.den
    }

    pub fn is_constant(&self) -> bool {
        self.num.degree().unwrap_or(0) == 0 && self.den.degree() == Some(0)
    }

    pub fn add(&self, o: &Self) -> Result<Self, NumericsError> {
        Self::new(self.num.mul(&o.den).add(&o.num.mul(&self.den)), self.den.mul(&o.den))
    }

    pub fn sub(&self, o: &Self) -> Result<Self, NumericsError> {
        Self::new(self.num.mul(&o.den).sub(&o.num.mul(&self.den)), self.den.mul(&o.den))
    }

    pub fn mul(&self, o: &Self) -> Result<Self, NumericsError> {
        Self::new(self.num.mul(&o.num), self.den.mul(&o.den))
    }

    pub fn div(&self, o: &Self) -> Result<Self, NumericsError> {
        if o.num.is_zero() {
            return Err(NumericsError::DivisionByZero);
        }
        Self::new(self.num.mul(&o.den), self.den.mul(&o.num))
    }

    pub fn neg(&self) -> Self {
        RationalFunction { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn scale(&self, q: &Rational) -> Self {
        Self::new(self.num.scale(q), self.den.clone()).expect("nonzero den")
    }

    pub fn pow(&self, n: u32) -> Self {
        RationalFunction { num: self.num.pow(n), den: self.den.pow(n) }
    }

    pub fn derivative(&self) -> Self {
        let n = self.num.derivative().mul(&self.den).sub(&self.num.mul(&self.den.derivative()));
        Self::new(n, self.den.mul(&self.den)).expect("nonzero den")
    }

    /// Value at a rational point, or `None` at a pole.
    pub fn eval(&self, x: &Rational) -> Option<Rational> {
        let d = self.den.eval(x);
        (d != 0).then(|| self.num.eval(x) / d)
    }

    /// Value at `x = 0`: `Some(Some(v))` finite, `Some(None)` a pole.
    pub fn value_at_zero(&self) -> Option<Rational> {
        self.eval(&Rational::new())
    }

    /// Order of vanishing at `x = 0` (negative for a pole).
    pub fn order_at_zero(&self) -> Option<i64> {
        let a = self.num.order_at_zero()? as i64;
        let b = self.den.order_at_zero().expect("nonzero den") as i64;
        Some(a - b)
    }

    /// Taylor coefficients at `x = 0` through `x^order`.
    pub fn taylor(&self, order: usize) -> Result<Vec<Rational>, NumericsError> {
        let d0 = self.den.coeff(0);
        if d0 == 0 {
            return Err(NumericsError::PoleAtZero);
        }
        let inv0 = Rational::from(d0.recip_ref());
        let mut out = Vec::with_capacity(order + 1);
        for n in 0..=order {
            let mut acc = self.num.coeff(n);
            for (k, dk) in self.den.coeffs().iter().enumerate().skip(1) {
                if k > n {
                    break;
                }
                acc -= Rational::from(dk * &out[n - k]);
            }
            out.push(acc * &inv0);
        }
        Ok(out)
    }

    /// Parses a rational function of `x`, e.g. `"(x+1)/2"` or `"x + 1/2"`.
    pub fn parse(src: &str) -> Result<Self, NumericsError> {
        let mut p = Parser { s: src.as_bytes(), pos: 0 };
        let v = p.expr()?;
        p.skip_ws();
        if p.pos != p.s.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(v)
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> NumericsError {
        NumericsError::Parse(format!("{msg} at byte {}", self.pos))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<RationalFunction, NumericsError> {
        let mut acc = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                b'+' => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?)?;
                }
                b'-' => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?)?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<RationalFunction, NumericsError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?)?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    let d = self.unary()?;
                    acc = acc.div(&d).map_err(|_| self.err("division by zero"))?;
                }
                // Implicit multiplication such as `2x` or `3(x+1)`.
                Some(c) if c == b'x' || c == b'(' => {
                    acc = acc.mul(&self.unary()?)?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<RationalFunction, NumericsError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<RationalFunction, NumericsError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let neg = if self.peek() == Some(b'-') {
                self.pos += 1;
                true
            } else {
                false
            };
            let e = self.integer()?;
            let e: u32 = e.to_u32().filter(|&v| v <= 64).ok_or_else(|| self.err("exponent out of range"))?;
            let p = base.pow(e);
            return if neg {
                RationalFunction::constant(Rational::from(1)).div(&p).map_err(|_| self.err("division by zero"))
            } else {
                Ok(p)
            };
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<Integer, NumericsError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected integer"));
        }
        let txt = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        Integer::from_str_radix(txt, 10).map_err(|_| self.err("bad integer"))
    }

    fn atom(&mut self) -> Result<RationalFunction, NumericsError> {
        match self.peek() {
            Some(b'x') => {
                self.pos += 1;
                Ok(RationalFunction::x())
            }
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                // Decimal literals are read exactly.
                if self.s.get(self.pos) == Some(&b'.') {
                    self.pos += 1;
                    let start = self.pos;
                    while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                    let frac = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
                    let scale = Integer::from(Integer::u_pow_u(10, frac.len() as u32));
                    let f = if frac.is_empty() { Integer::new() } else { Integer::from_str_radix(frac, 10).unwrap() };
                    let v = Rational::from((n * &scale + f, scale));
                    return Ok(RationalFunction::constant(v));
                }
                Ok(RationalFunction::constant(Rational::from(n)))
            }
            _ => Err(self.err("expected number, 'x' or '('")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn parse_simple_forms() {
        let g = RationalFunction::parse("(x+1)/2").unwrap();
        assert_eq!(g.eval(&q(1, 1)), Some(q(1, 1)));
        let h = RationalFunction::parse("x + 1/2").unwrap();
        assert_eq!(h.value_at_zero(), Some(q(1, 2)));
        let k = RationalFunction::parse("1/(1-x)^2").unwrap();
        assert_eq!(k.taylor(3).unwrap(), vec![q(1, 1), q(2, 1), q(3, 1), q(4, 1)]);
        let m = RationalFunction::parse("2x^2 - 3*x + 0.25").unwrap();
        assert_eq!(m.eval(&q(1, 1)), Some(q(-3, 4)));
    }

    #[test]
    fn parse_errors() {
        assert!(RationalFunction::parse("x +").is_err());
        assert!(RationalFunction::parse("(x").is_err());
        assert!(RationalFunction::parse("1/(x-x)").is_err());
        assert!(RationalFunction::parse("y").is_err());
    }

    #[test]
    fn reduction_cancels_common_factors() {
        let g = RationalFunction::parse("(x^2-1)/(x-1)").unwrap();
        assert_eq!(g, RationalFunction::parse("x+1").unwrap());
        assert_eq!(g.order_at_zero(), Some(0));
        let h = RationalFunction::parse("x^2/(x^3+x)").unwrap();
        assert_eq!(h.order_at_zero(), Some(1));
    }

    #[test]
    fn polynomial_gcd_and_division() {
        let a = QPoly::new(vec![q(-1, 1), q(0, 1), q(1, 1)]);
        let b = QPoly::new(vec![q(1, 1), q(1, 1)]);
        let (qq, r) = a.div_rem(&b).unwrap();
        assert!(r.is_zero());
        assert_eq!(qq, QPoly::new(vec![q(-1, 1), q(1, 1)]));
        assert_eq!(a.gcd(&b), b);
    }
}
