//! Recognition of ball-enclosed complex numbers as elements of a given
//! multi-quadratic field, by integer-relation search on `{z, b_1, …, b_m}`.

use rug::float::Round;
use rug::{Float, Integer, Rational};

use super::ball::{mag_add, ComplexBall, Precision, MAG_PREC};
use super::field::{Embedding, FieldElem, NumberField};
use super::lll::{default_delta, lll_reduce};
use super::NumericsError;

/// Outcome details of a successful recognition.
#[derive(Clone, Debug)]
pub struct Recognition {
    pub value: FieldElem,
    pub height: f64,
    /// Upper bound on `|z_mid - ι(value)|`.
    pub residual: f64,
}

fn separation_log(field: &NumberField, height_bound: f64) -> f64 {
    // Two distinct elements of height ≤ H differ by at least exp(-sep) at every
    // embedding (Liouville with the product formula).
    let m = field.degree() as f64;
    if field.degree() == 1 {
        2.0 * height_bound
    } else {
        m * (2.0 * height_bound + std::f64::consts::LN_2)
    }
}

fn to_scaled_integer(x: &Float, scale_bits: i32) -> Integer {
    let p = x.prec() + 64;
    let s = Float::with_val(p, x * Float::with_val(p, Float::i_exp(1, scale_bits)));
    s.to_integer().unwrap_or_default()
}

/// Finds the unique element of `field` of height ≤ `height_bound` whose image
/// under the identity embedding lies within `4·rad(z)` of `z`.
pub fn recognize_algebraic(z: &ComplexBall, field: &NumberField, height_bound: f64, prec: Precision) -> Result<FieldElem, NumericsError> {
    recognize_in_embedding(z, field, Embedding(0), height_bound, prec).map(|r| r.value)
}

/// As [`recognize_algebraic`] with an explicit embedding and full report.
pub fn recognize_in_embedding(
    z: &ComplexBall,
    field: &NumberField,
    emb: Embedding,
    height_bound: f64,
    prec: Precision,
) -> Result<Recognition, NumericsError> {
    let bits = prec.bits();
    let tol = mag_add(&Float::with_val(MAG_PREC, z.rad() * 4u32), &Float::with_val(MAG_PREC, Float::i_exp(1, 8 - bits as i32)));
    let tol_f = tol.to_f64();
    if tol_f > 0.0 && (2.0 * tol_f).ln() >= -separation_log(field, height_bound) {
        return Err(NumericsError::AmbiguousCandidate);
    }
    let residual_cap = 2f64.powf(-(bits as f64) / 4.0);
    let work = prec.with_guard(32);
    let z = z.set_prec(work);
    let basis = field.basis_values(emb, work);
    // Scale so the lattice resolves the input to its actual accuracy.
    let acc_bits = if z.rad().is_zero() {
        bits as i32
    } else {
        let l = Float::with_val(MAG_PREC, z.rad().log2_ref()).to_f64();
        ((-l).floor() as i32).min(bits as i32)
    };
    let scale = (acc_bits - 4).max(16);
    let values: Vec<&ComplexBall> = std::iter::once(&z).chain(basis.iter()).collect();
    let n = values.len();
    let rows: Vec<Vec<Integer>> = values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let mut r = vec![Integer::new(); n + 2];
            r[i] = Integer::from(1);
            r[n] = to_scaled_integer(v.re(), scale);
            r[n + 1] = to_scaled_integer(v.im(), scale);
            r
        })
        .collect();
    let reduced = lll_reduce(rows, &default_delta());
    let mut best: Option<Recognition> = None;
    for row in &reduced {
        if row[0] == 0 {
            continue;
        }
        let q0 = Rational::from(&row[0]);
        let coeffs: Vec<Rational> = row[1..n].iter().map(|c| Rational::from(-c) / &q0).collect();
        let cand = field.elem(coeffs)?;
        let h = cand.weil_height_f64();
        if h > height_bound + 1e-9 {
            continue;
        }
        let diff = cand.embed(emb, work).sub(&z.with_rad(Float::new(MAG_PREC)));
        let res = Float::with_val_round(MAG_PREC, diff.abs_upper(), Round::Up).0;
        let res_f = res.to_f64();
        if res > tol || res_f > residual_cap {
            continue;
        }
        let better = best.as_ref().map_or(true, |b| res_f < b.residual);
        if better {
            best = Some(Recognition { value: cand, height: h, residual: res_f });
        }
    }
    best.ok_or(NumericsError::NotFound)
}

/// Recognizes a ball as an integer: returns `n` if the ball contains exactly one integer
/// and has radius below 1/4.
pub fn recognize_integer(z: &ComplexBall) -> Option<Integer> {
    if z.rad_f64() >= 0.25 || !z.is_real() && z.im().clone().abs() > 0.25 {
        return None;
    }
    let n = z.re().to_integer()?;
    z.contains_rational(&Rational::from(&n), &Rational::new()).then_some(n)
}

/// Searches for a small integer relation `Σ c_i v_i = 0` among real balls,
/// returning the shortest vector found by LLL if its residual is tiny.
pub fn integer_relation(values: &[ComplexBall], prec: Precision) -> Option<Vec<Integer>> {
    let n = values.len();
    let max_rad = values.iter().map(|v| v.rad_f64()).fold(0.0, f64::max);
    let acc_bits = if max_rad == 0.0 { prec.bits() as i32 } else { ((-max_rad.log2()).floor() as i32).min(prec.bits() as i32) };
    let scale = (acc_bits - 8).max(16);
    let rows: Vec<Vec<Integer>> = values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let mut r = vec![Integer::new(); n + 2];
            r[i] = Integer::from(1);
            r[n] = to_scaled_integer(v.re(), scale);
            r[n + 1] = to_scaled_integer(v.im(), scale);
            r
        })
        .collect();
    let reduced = lll_reduce(rows, &default_delta());
    let first = reduced.into_iter().next()?;
    let coeffs: Vec<Integer> = first[..n].to_vec();
    let mut acc = ComplexBall::zero(values[0].precision());
    for (c, v) in coeffs.iter().zip(values) {
        acc = acc.add(&v.mul(&ComplexBall::from_integer(c, v.precision())));
    }
    acc.contains_zero().then_some(coeffs)
}
