//! Complex roots of integer polynomials: Durand–Kerner approximation in
//! double precision, refined by Newton steps in balls and certified by
//! disjoint inclusion discs `|z − r| ≤ n·|p(z)/p′(z)|`.

use num_complex::Complex64;
use rug::float::Round;
use rug::{Float, Integer};

use super::ball::{ComplexBall, Precision, MAG_PREC};
use super::NumericsError;

/// Approximate roots of `Σ c_i x^i` (constant term first) in double precision.
pub fn approx_roots_f64(coeffs: &[f64]) -> Vec<Complex64> {
    let mut c: Vec<f64> = coeffs.to_vec();
    while c.last().map_or(false, |v| *v == 0.0) {
        c.pop();
    }
    let n = c.len().saturating_sub(1);
    if n == 0 {
        return Vec::new();
    }
    let lead = c[n];
    let monic: Vec<Complex64> = c.iter().map(|v| Complex64::new(v / lead, 0.0)).collect();
    let eval = |z: Complex64| monic.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + a);
    let bound = 1.0 + monic[..n].iter().map(|a| a.norm()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * bound.min(2.0)).collect();
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            if den.norm() == 0.0 {
                den = Complex64::new(1e-300, 0.0);
            }
            let step = eval(z[i]) / den;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    z
}

fn eval_ball(coeffs: &[Integer], z: &ComplexBall) -> (ComplexBall, ComplexBall) {
    let prec = z.precision();
    let mut p = ComplexBall::zero(prec);
    let mut dp = ComplexBall::zero(prec);
    for c in coeffs.iter().rev() {
        dp = dp.mul(z).add(&p);
        p = p.mul(z).add(&ComplexBall::from_integer(c, prec));
    }
    (p, dp)
}

/// Certified enclosures of all roots of a squarefree integer polynomial.
pub fn isolate_roots(coeffs: &[Integer], prec: Precision) -> Result<Vec<ComplexBall>, NumericsError> {
    let n = coeffs.len().saturating_sub(1);
    if n == 0 {
        return Ok(Vec::new());
    }
    let approx = approx_roots_f64(&coeffs.iter().map(|c| c.to_f64()).collect::<Vec<_>>());
    let mut out = Vec::with_capacity(n);
    for a in approx {
        let mut z = ComplexBall::from_f64(a.re, a.im, prec);
        // Newton refinement at the midpoint.
        for _ in 0..(prec.bits() / 8 + 8) {
            let (p, dp) = eval_ball(coeffs, &z);
            let step = match p.div(&dp) {
                Ok(s) => s,
                Err(_) => break,
            };
            let mid = z.sub(&step);
            z = mid.with_rad(Float::new(MAG_PREC));
            if step.abs_upper().to_f64() < 2f64.powi(-(prec.bits() as i32) + 4) {
                break;
            }
        }
        let (p, dp) = eval_ball(coeffs, &z);
        let ratio = p.div(&dp).map_err(|_| NumericsError::DivisorContainsZero)?;
        let r = Float::with_val_round(MAG_PREC, ratio.abs_upper() * n as u32, Round::Up).0;
        out.push(z.with_rad(r));
    }
    for i in 0..n {
        for j in i + 1..n {
            if out[i].overlaps(&out[j]) {
                return Err(NumericsError::NotFound);
            }
        }
    }
    Ok(out)
}
