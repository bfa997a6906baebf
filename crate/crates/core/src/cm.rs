//! Imaginary quadratic orders: reduced forms and class numbers, CM points and
//! `j(τ)` by q-expansion, and the Chowla–Selberg period.

use rayon::prelude::*;
use rug::float::Round;
use rug::{Float, Integer, Rational};
use thiserror::Error;

use crate::family::{j_invariant_ball, RATIONAL_SINGULAR_MODULI};
use crate::numerics::ball::{mag_add, MAG_PREC};
use crate::numerics::recognize::recognize_integer;
use crate::numerics::{ComplexBall, NumericsError, Precision};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum CmError {
    #[error("{0} is not a negative discriminant (D < 0, D ≡ 0, 1 mod 4)")]
    InvalidDiscriminant(i64),
    #[error("τ is not reduced: Im τ must exceed 1/2")]
    NotReduced,
    #[error("{0} is not a fundamental discriminant")]
    NonFundamental(i64),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Primitive positive definite form `a x² + b x y + c y²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Form {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CMOrder {
    pub d: i64,
    pub h: usize,
    pub forms: Vec<Form>,
}

#[derive(Clone, Debug)]
pub struct CMPoint {
    pub d: i64,
    pub tau: ComplexBall,
    pub j_value: ComplexBall,
    pub degree: usize,
}

pub fn is_discriminant(d: i64) -> bool {
    d < 0 && matches!(d.rem_euclid(4), 0 | 1)
}

fn is_squarefree(n: i64) -> bool {
    let n = n.unsigned_abs();
    let mut p = 2u64;
    while p * p <= n {
        if n % (p * p) == 0 {
            return false;
        }
        p += 1;
    }
    true
}

pub fn is_fundamental(d: i64) -> bool {
    if !is_discriminant(d) {
        return false;
    }
    if d.rem_euclid(4) == 1 {
        return is_squarefree(d);
    }
    let m = d / 4;
    matches!(m.rem_euclid(4), 2 | 3) && is_squarefree(m)
}

fn gcd3(a: i64, b: i64, c: i64) -> i64 {
    let g = Integer::from(a).gcd(&Integer::from(b)).gcd(&Integer::from(c));
    g.to_i64().unwrap_or(1)
}

fn isqrt(n: i64) -> i64 {
    Integer::from(n).sqrt().to_i64().unwrap_or(0)
}

/// Reduced primitive forms of discriminant `d`, enumerated by `b`.
pub fn class_number(d: i64) -> Result<CMOrder, CmError> {
    if !is_discriminant(d) {
        return Err(CmError::InvalidDiscriminant(d));
    }
    let mut forms = Vec::new();
    let bmax = isqrt(-d / 3);
    let mut b = d.rem_euclid(2);
    while b <= bmax {
        let m = (b * b - d) / 4;
        let mut a = b.max(1);
        while a * a <= m {
            if m % a == 0 {
                let c = m / a;
                if gcd3(a, b, c) == 1 {
                    forms.push(Form { a, b, c });
                    if b > 0 && b < a && a < c {
                        forms.push(Form { a, b: -b, c });
                    }
                }
            }
            a += 1;
        }
        b += 2;
    }
    forms.sort();
    Ok(CMOrder { d, h: forms.len(), forms })
}

/// Same count by scanning `a` then `b`, used as an independent check.
pub fn class_number_by_a(d: i64) -> Result<usize, CmError> {
    if !is_discriminant(d) {
        return Err(CmError::InvalidDiscriminant(d));
    }
    let mut h = 0;
    let amax = isqrt(-d / 3);
    for a in 1..=amax {
        for b in (-a + 1)..=a {
            let num = b * b - d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (a == c && b < 0) {
                continue;
            }
            if gcd3(a, b, c) == 1 {
                h += 1;
            }
        }
    }
    Ok(h)
}

/// Discriminants `−3 ≥ D ≥ −max_abs_d` of class number one.
pub fn heegner_scan(max_abs_d: i64, include_nonfundamental: bool) -> Vec<i64> {
    let ds: Vec<i64> = (3..=max_abs_d).map(|n| -n).filter(|&d| is_discriminant(d)).collect();
    ds.into_par_iter()
        .filter(|&d| include_nonfundamental || is_fundamental(d))
        .filter(|&d| class_number(d).map(|o| o.h == 1).unwrap_or(false))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanRow {
    pub d: i64,
    pub fundamental: bool,
    pub h: usize,
    pub min_a: i64,
}

pub fn class_number_scan(max_abs_d: i64) -> Vec<ScanRow> {
    let ds: Vec<i64> = (3..=max_abs_d).map(|n| -n).filter(|&d| is_discriminant(d)).collect();
    ds.into_par_iter()
        .map(|d| {
            let o = class_number(d).expect("valid discriminant");
            ScanRow { d, fundamental: is_fundamental(d), h: o.h, min_a: o.forms.iter().map(|f| f.a).min().unwrap_or(0) }
        })
        .collect()
}

pub fn scan_csv(rows: &[ScanRow]) -> String {
    let mut out = String::from("D,fundamental,h,min_a\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.d, r.fundamental, r.h, r.min_a));
    }
    out
}

/// `τ = (−b + √D)/(2a)` of a form.
pub fn tau_of_form(f: &Form, d: i64, prec: Precision) -> ComplexBall {
    let s = ComplexBall::from_i64(-d, prec).sqrt().expect("positive").mul_i();
    s.sub(&ComplexBall::from_i64(f.b, prec)).div_i64(2 * f.a).expect("a > 0")
}

/// Moves `τ` into the standard fundamental domain; the transformations are
/// applied in ball arithmetic, only the choice of move uses midpoints.
pub fn reduce_tau(tau: &ComplexBall) -> Result<ComplexBall, CmError> {
    let mut t = tau.clone();
    if t.im().is_sign_negative() || t.im().is_zero() {
        return Err(CmError::NotReduced);
    }
    for _ in 0..1000 {
        let shift = Float::with_val(64, t.re()).round().to_f64() as i64;
        if shift != 0 {
            t = t.sub(&ComplexBall::from_i64(shift, t.precision()));
        }
        let (re, im) = t.mid_f64();
        if re * re + im * im < 1.0 - 1e-12 {
            t = t.inv()?.neg();
        } else {
            return Ok(t);
        }
    }
    Ok(t)
}

fn sigma_table(n: usize, k: u32) -> Vec<Integer> {
    let mut s = vec![Integer::new(); n + 1];
    for d in 1..=n {
        let p = Integer::from(Integer::u_pow_u(d as u32, k));
        let mut m = d;
        while m <= n {
            s[m] += &p;
            m += d;
        }
    }
    s
}

/// `1 + c·Σ_{n≥1} σ_k(n) qⁿ` with the tail `Σ_{n>N} n^{k+1}|q|ⁿ` in the radius.
fn eisenstein(q: &ComplexBall, k: u32, c: i64, log_q: f64, bits: u32) -> ComplexBall {
    let prec = q.precision();
    // Choose N with (N+1)^{k+1}|q|^{N+1} < 2^{−bits−8} and a geometric ratio ≤ 1/2.
    let target = -((bits + 8) as f64) * 2f64.ln();
    let mut n = 1usize;
    loop {
        let m = (n + 1) as f64;
        let term = (k + 1) as f64 * m.ln() + m * log_q;
        let ratio = (k + 1) as f64 * ((m + 1.0) / m).ln() + log_q;
        if term < target && ratio < -(2f64.ln()) {
            break;
        }
        n += 1;
    }
    let sig = sigma_table(n, k);
    let mut acc = ComplexBall::zero(prec);
    for i in (1..=n).rev() {
        acc = acc.add(&ComplexBall::from_integer(&sig[i], prec)).mul(q);
    }
    let m = (n + 1) as f64;
    let log_tail = (k + 1) as f64 * m.ln() + m * log_q + 2f64.ln() + (c.unsigned_abs() as f64).ln();
    let mut tail = Float::with_val_round(MAG_PREC, log_tail, Round::Up).0;
    tail.exp_round(Round::Up);
    acc.mul_i64(c).add(&ComplexBall::one(prec)).inflate(&mag_add(&tail, &tail))
}

/// `j(τ) = 1728·E₄³/(E₄³ − E₆²)` for `Im τ > 1/2`.
pub fn j_of_tau(tau: &ComplexBall, prec: Precision) -> Result<ComplexBall, CmError> {
    let half = Float::with_val(64, 0.5);
    let im_lower = Float::with_val_round(64, tau.im() - tau.rad(), Round::Down).0;
    if im_lower <= half {
        return Err(CmError::NotReduced);
    }
    let work = prec.with_guard(32 + (tau.im().to_f64() * 2.0 * std::f64::consts::PI / 2f64.ln()) as u32);
    let t = tau.set_prec(work);
    let q = ComplexBall::two_pi_i(work).mul(&t).exp();
    let log_q = -2.0 * std::f64::consts::PI * im_lower.to_f64();
    let e4 = eisenstein(&q, 3, 240, log_q, work.bits());
    let e6 = eisenstein(&q, 5, -504, log_q, work.bits());
    let e43 = e4.pow_u(3);
    let delta = e43.sub(&e6.sqr());
    Ok(e43.mul_i64(1728).div(&delta)?.set_prec(prec))
}

/// `j(τ)` for any `τ` in the upper half plane, after reduction.
pub fn j_of_tau_any(tau: &ComplexBall, prec: Precision) -> Result<ComplexBall, CmError> {
    j_of_tau(&reduce_tau(tau)?, prec)
}

/// CM points of the reduced forms of `d`.
pub fn cm_points(d: i64, prec: Precision) -> Result<Vec<CMPoint>, CmError> {
    let o = class_number(d)?;
    o.forms
        .iter()
        .map(|f| {
            let tau = tau_of_form(f, d, prec);
            let j_value = j_of_tau(&tau, prec)?;
            Ok(CMPoint { d, tau, j_value, degree: o.h })
        })
        .collect()
}

pub fn unit_count(d: i64) -> i64 {
    match d {
        -3 => 6,
        -4 => 4,
        _ => 2,
    }
}

/// `√π·∏_{0<a<|D|} Γ(a/|D|)^{χ_D(a)·w/(4h)}`.
pub fn chowla_selberg_period(d: i64, prec: Precision) -> Result<ComplexBall, CmError> {
    if !is_fundamental(d) {
        return Err(CmError::NonFundamental(d));
    }
    let work = prec.with_guard(32);
    let h = class_number(d)?.h as i64;
    let w = unit_count(d);
    let n = -d;
    let dz = Integer::from(d);
    let mut log_sum = ComplexBall::pi(work).log()?.mul_2exp(-1);
    for a in 1..n {
        let chi = dz.kronecker(&Integer::from(a));
        if chi == 0 {
            continue;
        }
        let g = ComplexBall::gamma_real(&Rational::from((a, n)), work);
        let e = Rational::from((chi as i64 * w, 4 * h));
        log_sum = log_sum.add(&g.log()?.mul_rational(&e));
    }
    Ok(log_sum.exp().set_prec(prec))
}

/// Real period `4K(1/2)` of the `j = 1728` Legendre curve, by AGM.
pub fn agm_period_1728(prec: Precision) -> Result<ComplexBall, CmError> {
    let work = prec.with_guard(16);
    let half = ComplexBall::from_rational(&Rational::from((1, 2)), work);
    let (k, _) = crate::periods::ellip_ke(&half, work).map_err(|_| CmError::Numerics(NumericsError::NotFound))?;
    Ok(k.mul_i64(4).set_prec(prec))
}

/// Class-number-one discriminant of a ball `λ`, if `j(λ)` is one of the
/// rational singular moduli.
pub fn cm_discriminant_of_lambda(lambda: &ComplexBall) -> Option<i64> {
    let j = j_invariant_ball(lambda).ok()?;
    let v = recognize_integer(&j)?;
    RATIONAL_SINGULAR_MODULI.iter().find(|(_, jj)| Integer::from(*jj) == v).map(|(d, _)| *d)
}

/// Discriminant of `End(E_λ)` from `τ = iK(1−λ)/K(λ)`: an integer relation
/// `aτ² + bτ + c = 0` with `|b² − 4ac| ≤ max_abs_d`, confirmed by `j(τ) = j(λ)`.
/// `None` means no such relation at this precision.
pub fn cm_discriminant_numeric(lambda: &ComplexBall, max_abs_d: i64, prec: Precision) -> Result<Option<i64>, CmError> {
    let work = prec.with_guard(16);
    let l = lambda.set_prec(work);
    let one = ComplexBall::one(work);
    let images = [
        Ok(l.clone()),
        Ok(one.sub(&l)),
        l.inv(),
        one.sub(&l).inv(),
        l.div(&l.sub(&one)),
        l.sub(&one).div(&l),
    ];
    let Some(p) = images.into_iter().flatten().find_map(|m| crate::periods::legendre_periods(&m, work).ok()) else {
        return Ok(None);
    };
    let mut tau = p.entries[0][1].div(&p.entries[0][0])?;
    if tau.im().is_sign_negative() {
        tau = tau.neg();
    }
    let tau = reduce_tau(&tau)?;
    let Some(rel) = crate::numerics::recognize::integer_relation(&[tau.sqr(), tau.clone(), ComplexBall::one(work)], work) else {
        return Ok(None);
    };
    let (Some(a), Some(b), Some(c)) = (rel[0].to_i64(), rel[1].to_i64(), rel[2].to_i64()) else {
        return Ok(None);
    };
    let g = gcd3(a, b, c).abs().max(1);
    let (a, b, c) = (a / g, b / g, c / g);
    let d = b * b - 4 * a * c;
    if a == 0 || d >= 0 || -d > max_abs_d {
        return Ok(None);
    }
    let j_tau = j_of_tau(&tau, work)?;
    let j_lam = j_invariant_ball(&l).map_err(|_| CmError::NotReduced)?;
    Ok(j_tau.overlaps(&j_lam).then_some(d))
}
