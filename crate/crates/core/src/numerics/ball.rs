//! Complex midpoint–radius balls over MPFR floats.
//!
//! A [`ComplexBall`] is the closed disc `{ z : |z - (re + i·im)| <= rad }`.
//! Midpoints are rounded to nearest at the working precision; every rounding
//! and every propagated input radius is folded into `rad`, which is itself
//! kept at [`MAG_PREC`] bits and always rounded upward.

use std::cmp::Ordering;
use std::fmt;

use rug::float::{Constant, Round};
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use super::NumericsError;

/// Mantissa bits used for error radii.
pub const MAG_PREC: u32 = 64;

/// Working mantissa precision in bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Precision(u32);

impl Precision {
    pub const MIN_BITS: u32 = 64;

    pub fn new(bits: u32) -> Result<Self, NumericsError> {
        if bits < Self::MIN_BITS {
            return Err(NumericsError::PrecisionTooLow(bits));
        }
        Ok(Precision(bits))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    /// The same precision plus `extra` guard bits.
    pub fn with_guard(self, extra: u32) -> Self {
        Precision(self.0 + extra)
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision(256)
    }
}

// Upward-rounded helpers on radii.

pub(crate) fn mag_zero() -> Float {
    Float::new(MAG_PREC)
}

pub(crate) fn mag_from_f64(x: f64) -> Float {
    Float::with_val_round(MAG_PREC, x.abs(), Round::Up).0
}

pub(crate) fn mag_add(a: &Float, b: &Float) -> Float {
    Float::with_val_round(MAG_PREC, a + b, Round::Up).0
}

pub(crate) fn mag_mul(a: &Float, b: &Float) -> Float {
    Float::with_val_round(MAG_PREC, a * b, Round::Up).0
}

pub(crate) fn mag_abs(x: &Float) -> Float {
    Float::with_val_round(MAG_PREC, x.abs_ref(), Round::Up).0
}

fn mag_hypot(a: &Float, b: &Float) -> Float {
    Float::with_val_round(MAG_PREC, a.hypot_ref(b), Round::Up).0
}

fn low_hypot(a: &Float, b: &Float) -> Float {
    Float::with_val_round(MAG_PREC, a.hypot_ref(b), Round::Down).0
}

/// Upper bound on `|x| * 2^(k - prec)`.
fn mag_ulps(x: &Float, prec: u32, k: i32) -> Float {
    let ax = mag_abs(x);
    let scale = Float::with_val(MAG_PREC, Float::i_exp(1, k - prec as i32));
    mag_mul(&ax, &scale)
}

/// `2^e` as a radius.
pub(crate) fn mag_pow2(e: i32) -> Float {
    Float::with_val(MAG_PREC, Float::i_exp(1, e))
}

/// Rounds `x` to `p` bits, returning the value and a bound on the rounding error.
fn rounded(p: u32, x: Float) -> (Float, Float) {
    let (v, ord) = Float::with_val_round(p, &x, Round::Nearest);
    if ord == Ordering::Equal {
        (v, mag_zero())
    } else {
        let e = mag_ulps(&v, p, 0);
        (v, e)
    }
}

/// Extra bits needed so that a sum of the two floats is exact.
fn exp_gap(a: &Float, b: &Float) -> u32 {
    match (a.get_exp(), b.get_exp()) {
        (Some(x), Some(y)) => (x - y).unsigned_abs().min(1 << 20),
        _ => 0,
    }
}

#[derive(Clone, PartialEq)]
pub struct ComplexBall {
    re: Float,
    im: Float,
    rad: Float,
}

impl fmt::Debug for ComplexBall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for ComplexBall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = ((self.prec() as f64) * std::f64::consts::LOG10_2).ceil() as usize;
        let digits = digits.min(40);
        write!(
            f,
            "({} + {}i) +/- {}",
            self.re.to_string_radix(10, Some(digits)),
            self.im.to_string_radix(10, Some(digits)),
            self.rad.to_string_radix(10, Some(6))
        )
    }
}

impl ComplexBall {
    pub fn new(re: Float, im: Float, rad: Float) -> Self {
        let rad = Float::with_val_round(MAG_PREC, rad.abs(), Round::Up).0;
        let prec = re.prec().max(im.prec());
        let re = Float::with_val(prec, re);
        let im = Float::with_val(prec, im);
        ComplexBall { re, im, rad }
    }

    pub fn zero(prec: Precision) -> Self {
        ComplexBall {
            re: Float::new(prec.bits()),
            im: Float::new(prec.bits()),
            rad: mag_zero(),
        }
    }

    pub fn one(prec: Precision) -> Self {
        Self::from_i64(1, prec)
    }

    pub fn i(prec: Precision) -> Self {
        ComplexBall {
            re: Float::new(prec.bits()),
            im: Float::with_val(prec.bits(), 1),
            rad: mag_zero(),
        }
    }

    pub fn from_i64(v: i64, prec: Precision) -> Self {
        let re = Float::with_val(prec.bits(), v);
        let rad = if Integer::from(v) == re { mag_zero() } else { mag_ulps(&re, prec.bits(), 1) };
        ComplexBall { re, im: Float::new(prec.bits()), rad }
    }

    pub fn from_integer(v: &Integer, prec: Precision) -> Self {
        let re = Float::with_val(prec.bits(), v);
        let rad = if *v == re { mag_zero() } else { mag_ulps(&re, prec.bits(), 1) };
        ComplexBall { re, im: Float::new(prec.bits()), rad }
    }

    pub fn from_rational(v: &Rational, prec: Precision) -> Self {
        Self::from_rational_parts(v, &Rational::new(), prec)
    }

    pub fn from_rational_parts(re: &Rational, im: &Rational, prec: Precision) -> Self {
        let p = prec.bits();
        let fr = Float::with_val(p, re);
        let fi = Float::with_val(p, im);
        let mut rad = mag_zero();
        if *re != fr {
            rad = mag_add(&rad, &mag_ulps(&fr, p, 1));
        }
        if *im != fi {
            rad = mag_add(&rad, &mag_ulps(&fi, p, 1));
        }
        ComplexBall { re: fr, im: fi, rad }
    }

    pub fn from_f64(re: f64, im: f64, prec: Precision) -> Self {
        ComplexBall {
            re: Float::with_val(prec.bits(), re),
            im: Float::with_val(prec.bits(), im),
            rad: mag_zero(),
        }
    }

    /// A real ball `[mid - rad, mid + rad]`.
    pub fn real(mid: Float, rad: Float) -> Self {
        let p = mid.prec();
        Self::new(mid, Float::new(p), rad)
    }

    pub fn pi(prec: Precision) -> Self {
        let p = prec.bits();
        let v = Float::with_val(p, Constant::Pi);
        let rad = mag_ulps(&v, p, 1);
        ComplexBall { re: v, im: Float::new(p), rad }
    }

    /// `2πi`.
    pub fn two_pi_i(prec: Precision) -> Self {
        let pi = Self::pi(prec);
        ComplexBall { re: Float::new(prec.bits()), im: Float::with_val(prec.bits(), &pi.re * 2u32), rad: mag_mul(&pi.rad, &mag_from_f64(2.0)) }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn precision(&self) -> Precision {
        Precision(self.prec())
    }

    pub fn re(&self) -> &Float {
        &self.re
    }

    pub fn im(&self) -> &Float {
        &self.im
    }

    pub fn rad(&self) -> &Float {
        &self.rad
    }

    pub fn rad_f64(&self) -> f64 {
        self.rad.to_f64()
    }

    pub fn mid_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    pub fn with_rad(&self, rad: Float) -> Self {
        ComplexBall { re: self.re.clone(), im: self.im.clone(), rad: Float::with_val_round(MAG_PREC, rad.abs(), Round::Up).0 }
    }

    /// Enlarges the radius by `extra`.
    pub fn inflate(&self, extra: &Float) -> Self {
        ComplexBall { re: self.re.clone(), im: self.im.clone(), rad: mag_add(&self.rad, &mag_abs(extra)) }
    }

    /// Changes the working precision of the midpoint, accounting for rounding.
    pub fn set_prec(&self, prec: Precision) -> Self {
        let p = prec.bits();
        let re = Float::with_val(p, &self.re);
        let im = Float::with_val(p, &self.im);
        let mut rad = self.rad.clone();
        if re != self.re {
            rad = mag_add(&rad, &mag_ulps(&re, p, 1));
        }
        if im != self.im {
            rad = mag_add(&rad, &mag_ulps(&im, p, 1));
        }
        ComplexBall { re, im, rad }
    }

    /// Upper bound on `|z|` over the ball.
    pub fn abs_upper(&self) -> Float {
        mag_add(&mag_hypot(&self.re, &self.im), &self.rad)
    }

    /// Lower bound on `|z|` over the ball (zero if the ball contains 0).
    pub fn abs_lower(&self) -> Float {
        let h = low_hypot(&self.re, &self.im);
        let d = Float::with_val_round(MAG_PREC, &h - &self.rad, Round::Down).0;
        if d.is_sign_negative() {
            mag_zero()
        } else {
            d
        }
    }

    pub fn contains_zero(&self) -> bool {
        self.abs_lower().is_zero()
    }

    /// Whether the exact rational point `re + i·im` lies in the ball.
    pub fn contains_rational(&self, re: &Rational, im: &Rational) -> bool {
        let p = self.prec() + 64;
        let dr = Float::with_val_round(p, Float::with_val(p, re) - &self.re, Round::Nearest).0;
        let di = Float::with_val_round(p, Float::with_val(p, im) - &self.im, Round::Nearest).0;
        let d = low_hypot(&dr, &di);
        // Slack for the two roundings above.
        let slack = mag_ulps(&mag_add(&mag_abs(&dr), &mag_abs(&di)), p, 2);
        let d = Float::with_val_round(MAG_PREC, &d - &slack, Round::Down).0;
        d <= self.rad
    }

    /// Whether `other` lies entirely inside `self`.
    pub fn contains(&self, other: &ComplexBall) -> bool {
        let d = self.sub(other).mid_abs_upper();
        mag_add(&d, &other.rad) <= self.rad
    }

    /// Whether the two balls intersect.
    pub fn overlaps(&self, other: &ComplexBall) -> bool {
        let diff = self.sub_mid(other);
        let d = low_hypot(&diff.0, &diff.1);
        d <= mag_add(&self.rad, &other.rad)
    }

    fn mid_abs_upper(&self) -> Float {
        mag_hypot(&self.re, &self.im)
    }

    fn sub_mid(&self, other: &ComplexBall) -> (Float, Float) {
        let p = self.prec().max(other.prec()) + 8;
        (Float::with_val(p, &self.re - &other.re), Float::with_val(p, &self.im - &other.im))
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn neg(&self) -> Self {
        ComplexBall { re: Float::with_val(self.prec(), -&self.re), im: Float::with_val(self.prec(), -&self.im), rad: self.rad.clone() }
    }

    pub fn conj(&self) -> Self {
        ComplexBall { re: self.re.clone(), im: Float::with_val(self.prec(), -&self.im), rad: self.rad.clone() }
    }

    /// Multiplication by `i`.
    pub fn mul_i(&self) -> Self {
        ComplexBall { re: Float::with_val(self.prec(), -&self.im), im: self.re.clone(), rad: self.rad.clone() }
    }

    pub fn real_part(&self) -> Self {
        ComplexBall { re: self.re.clone(), im: Float::new(self.prec()), rad: self.rad.clone() }
    }

    pub fn imag_part(&self) -> Self {
        ComplexBall { re: self.im.clone(), im: Float::new(self.prec()), rad: self.rad.clone() }
    }

    pub fn add(&self, other: &ComplexBall) -> Self {
        let p = self.prec().max(other.prec());
        let (re, er) = rounded(p, Float::with_val(p + 1 + exp_gap(&self.re, &other.re), &self.re + &other.re));
        let (im, ei) = rounded(p, Float::with_val(p + 1 + exp_gap(&self.im, &other.im), &self.im + &other.im));
        let mut rad = mag_add(&self.rad, &other.rad);
        rad = mag_add(&rad, &er);
        rad = mag_add(&rad, &ei);
        ComplexBall { re, im, rad }
    }

    pub fn sub(&self, other: &ComplexBall) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &ComplexBall) -> Self {
        let p = self.prec().max(other.prec());
        // Products of p-bit mantissas are exact at 2p bits.
        let q = 2 * p;
        let rr = Float::with_val(q, &self.re * &other.re);
        let ii = Float::with_val(q, &self.im * &other.im);
        let ri = Float::with_val(q, &self.re * &other.im);
        let ir = Float::with_val(q, &self.im * &other.re);
        let (re, er) = rounded(p, Float::with_val(q + 1 + exp_gap(&rr, &ii), &rr - &ii));
        let (im, ei) = rounded(p, Float::with_val(q + 1 + exp_gap(&ri, &ir), &ri + &ir));
        let a = self.mid_abs_upper();
        let b = other.mid_abs_upper();
        let mut rad = mag_mul(&a, &other.rad);
        rad = mag_add(&rad, &mag_mul(&b, &self.rad));
        rad = mag_add(&rad, &mag_mul(&self.rad, &other.rad));
        rad = mag_add(&rad, &er);
        rad = mag_add(&rad, &ei);
        ComplexBall { re, im, rad }
    }

    pub fn sqr(&self) -> Self {
        self.mul(self)
    }

    pub fn mul_rational(&self, q: &Rational) -> Self {
        self.mul(&ComplexBall::from_rational(q, self.precision()))
    }

    pub fn mul_i64(&self, v: i64) -> Self {
        self.mul(&ComplexBall::from_i64(v, self.precision()))
    }

    pub fn div_i64(&self, v: i64) -> Result<Self, NumericsError> {
        self.div(&ComplexBall::from_i64(v, self.precision()))
    }

    /// Scaling by `2^e` is exact on the midpoint.
    pub fn mul_2exp(&self, e: i32) -> Self {
        let p = self.prec();
        let s = Float::with_val(MAG_PREC, Float::i_exp(1, e));
        ComplexBall {
            re: Float::with_val(p, &self.re * &s),
            im: Float::with_val(p, &self.im * &s),
            rad: mag_mul(&self.rad, &s),
        }
    }

    pub fn inv(&self) -> Result<Self, NumericsError> {
        let low = self.abs_lower();
        if low.is_zero() {
            return Err(NumericsError::DivisorContainsZero);
        }
        let p = self.prec();
        let q = self.precision().with_guard(16).bits();
        let n2 = Float::with_val(q, self.re.square_ref()) + Float::with_val(q, self.im.square_ref());
        let re = Float::with_val(p, &self.re / &n2);
        let im = Float::with_val(p, -(Float::with_val(q, &self.im / &n2)));
        let mid = mag_hypot(&self.re, &self.im);
        // |1/z - 1/w| <= r / (|w| (|w| - r)) for |z - w| <= r.
        let denom = Float::with_val_round(MAG_PREC, &mid * &low, Round::Down).0;
        let mut rad = Float::with_val_round(MAG_PREC, &self.rad / &denom, Round::Up).0;
        let inv_mag = Float::with_val_round(MAG_PREC, 1 / &low, Round::Up).0;
        rad = mag_add(&rad, &mag_mul(&inv_mag, &mag_pow2(3 - p as i32)));
        Ok(ComplexBall { re, im, rad })
    }

    pub fn div(&self, other: &ComplexBall) -> Result<Self, NumericsError> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow_u(&self, mut n: u32) -> Self {
        let mut base = self.clone();
        let mut acc = ComplexBall::one(self.precision());
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.sqr();
            }
        }
        acc
    }

    pub fn pow_i(&self, n: i32) -> Result<Self, NumericsError> {
        if n >= 0 {
            Ok(self.pow_u(n as u32))
        } else {
            self.pow_u(n.unsigned_abs()).inv()
        }
    }

    /// Whether the ball meets the closed negative real axis `(-inf, 0]`.
    pub fn touches_negative_axis(&self) -> bool {
        let dist = if self.re.is_sign_negative() && !self.re.is_zero() {
            Float::with_val_round(MAG_PREC, self.im.abs_ref(), Round::Down).0
        } else {
            low_hypot(&self.re, &self.im)
        };
        dist <= self.rad
    }

    /// Principal square root, cut along the negative reals.
    pub fn sqrt(&self) -> Result<Self, NumericsError> {
        if self.touches_negative_axis() {
            if self.im.is_zero() && self.rad.is_zero() && self.re.is_zero() {
                return Ok(self.clone());
            }
            return Err(NumericsError::BranchCutStraddle);
        }
        let p = self.prec();
        let q = p + 16;
        let x = Float::with_val(q, &self.re);
        let y = Float::with_val(q, &self.im);
        let r = Float::with_val(q, x.hypot_ref(&y));
        let (re, im) = if !x.is_sign_negative() {
            let s = Float::with_val(q, Float::with_val(q, &r + &x) / 2u32).sqrt();
            let t = Float::with_val(q, &y / Float::with_val(q, &s * 2u32));
            (s, t)
        } else {
            let mut t = Float::with_val(q, Float::with_val(q, &r - &x) / 2u32).sqrt();
            if y.is_sign_negative() {
                t = -t;
            }
            let s = Float::with_val(q, &y / Float::with_val(q, &t * 2u32));
            (s, t)
        };
        let re = Float::with_val(p, re);
        let im = Float::with_val(p, im);
        let out_mag = mag_hypot(&re, &im);
        let mut rad = mag_mul(&out_mag, &mag_pow2(3 - p as i32));
        if !self.rad.is_zero() {
            // |sqrt(z) - sqrt(w)| <= r / (2 sqrt(|w| - r)) on a ball avoiding the cut.
            let low = self.abs_lower();
            let s = Float::with_val_round(MAG_PREC, low.sqrt_ref(), Round::Down).0;
            let d = Float::with_val_round(MAG_PREC, &s * 2u32, Round::Down).0;
            rad = mag_add(&rad, &Float::with_val_round(MAG_PREC, &self.rad / &d, Round::Up).0);
        }
        Ok(ComplexBall { re, im, rad })
    }

    /// Principal logarithm, cut along the negative reals.
    pub fn log(&self) -> Result<Self, NumericsError> {
        if self.touches_negative_axis() {
            return Err(NumericsError::BranchCutStraddle);
        }
        let p = self.prec();
        let q = p + 16;
        let x = Float::with_val(q, &self.re);
        let y = Float::with_val(q, &self.im);
        let r = Float::with_val(q, x.hypot_ref(&y));
        let re = Float::with_val(p, r.ln());
        let im = Float::with_val(p, y.atan2_ref(&x));
        let mut rad = mag_mul(&mag_add(&mag_abs(&re), &mag_from_f64(4.0)), &mag_pow2(2 - p as i32));
        if !self.rad.is_zero() {
            let low = self.abs_lower();
            rad = mag_add(&rad, &Float::with_val_round(MAG_PREC, &self.rad / &low, Round::Up).0);
        }
        Ok(ComplexBall { re, im, rad })
    }

    pub fn exp(&self) -> Self {
        let p = self.prec();
        let q = p + 16;
        let ex = Float::with_val(q, self.re.exp_ref());
        let c = Float::with_val(q, self.im.cos_ref());
        let s = Float::with_val(q, self.im.sin_ref());
        let re = Float::with_val(p, &ex * &c);
        let im = Float::with_val(p, &ex * &s);
        let exm = mag_abs(&ex);
        let mut rad = mag_mul(&exm, &mag_pow2(2 - p as i32));
        if !self.rad.is_zero() {
            // |e^(w+d) - e^w| <= |e^w| (e^r - 1).
            let er = Float::with_val_round(MAG_PREC, self.rad.exp_m1_ref(), Round::Up).0;
            rad = mag_add(&rad, &mag_mul(&mag_mul(&exm, &mag_from_f64(1.0 + 1e-15)), &er));
        }
        ComplexBall { re, im, rad }
    }

    /// Real gamma function of a positive real ball without radius.
    pub fn gamma_real(x: &Rational, prec: Precision) -> Self {
        let p = prec.bits();
        let q = p + 32;
        let fx = Float::with_val(q, x);
        let exact_arg = fx == *x;
        let g = Float::with_val(q, fx.gamma());
        let mid = Float::with_val(p, &g);
        let mut rad = mag_ulps(&mid, p, 1);
        if !exact_arg {
            // The argument was rounded at q bits; bound the effect via |Γ'/Γ| <= |ψ(x)| + 1.
            let psi = Float::with_val(MAG_PREC, Float::with_val(q, x).digamma());
            let slope = mag_add(&mag_abs(&psi), &mag_from_f64(1.0));
            let dx = mag_ulps(&Float::with_val(q, x), q, 1);
            rad = mag_add(&rad, &mag_mul(&mag_mul(&slope, &dx), &mag_mul(&mag_abs(&mid), &mag_from_f64(2.0))));
        }
        ComplexBall::real(mid, rad)
    }

    /// Real power `self^e` for a positive real ball and rational exponent.
    pub fn pow_rational_real(&self, e: &Rational) -> Result<Self, NumericsError> {
        if !self.is_real() {
            return Err(NumericsError::BranchCutStraddle);
        }
        let l = self.log()?;
        Ok(l.mul_rational(e).exp())
    }

    /// Union-free hull: the smallest ball (up to rounding) containing both.
    pub fn union(&self, other: &ComplexBall) -> Self {
        let p = self.prec().max(other.prec());
        let re = Float::with_val(p, Float::with_val(p + 1, &self.re + &other.re) / 2u32);
        let im = Float::with_val(p, Float::with_val(p + 1, &self.im + &other.im) / 2u32);
        let c = ComplexBall { re, im, rad: mag_zero() };
        let d1 = mag_add(&c.sub(self).mid_abs_upper(), &self.rad);
        let d2 = mag_add(&c.sub(other).mid_abs_upper(), &other.rad);
        let r = if d1 > d2 { d1 } else { d2 };
        c.with_rad(mag_add(&r, &mag_ulps(&c.mid_abs_upper(), p, 2)))
    }

    /// Compares the real midpoint against a float; only meaningful for real balls.
    pub fn cmp_re(&self, v: f64) -> Option<Ordering> {
        self.re.partial_cmp(&v)
    }

    /// `log2` of the radius, for reporting.
    pub fn rad_log10(&self) -> f64 {
        if self.rad.is_zero() {
            f64::NEG_INFINITY
        } else {
            let l = Float::with_val(MAG_PREC, self.rad.log10_ref());
            l.to_f64()
        }
    }

    /// Rational approximation of the midpoint.
    pub fn mid_rational(&self) -> (Rational, Rational) {
        (
            self.re.to_rational().unwrap_or_default(),
            self.im.to_rational().unwrap_or_default(),
        )
    }

    /// Decimal rendering of the midpoint real and imaginary parts.
    pub fn mid_strings(&self, digits: usize) -> (String, String) {
        (self.re.to_string_radix(10, Some(digits)), self.im.to_string_radix(10, Some(digits)))
    }

    /// The radius rendered in scientific notation.
    pub fn rad_string(&self) -> String {
        self.rad.to_string_radix(10, Some(6))
    }

    /// `{"mid": [re, im], "rad": r}` with `digits` significant digits.
    pub fn to_json(&self, digits: usize) -> serde_json::Value {
        let (re, im) = self.mid_strings(digits);
        serde_json::json!({ "mid": [re, im], "rad": self.rad_string() })
    }
}

/// A ball of radius `2^e` around zero.
pub fn error_ball(e: i32, prec: Precision) -> ComplexBall {
    ComplexBall::zero(prec).with_rad(mag_pow2(e))
}

/// The float `10^-k` as an upward-rounded radius.
pub fn ten_pow_neg(k: u32) -> Float {
    let t = Float::with_val(MAG_PREC + 64, 10u32).pow(k);
    Float::with_val_round(MAG_PREC, 1 / t, Round::Up).0
}
