//! Periods and quasi-periods of Legendre curves by AGM iterations, the
//! connection constants `Π` relating them to the normalized series solution,
//! and analytic continuation of the period matrix around `x = 0`.
//!
//! With `γ₁` the cycle vanishing as `λ → 0` and `γ₂` oriented so the
//! determinant is positive, the normalized period matrix is
//!
//! ```text
//! 𝒫(λ) = (1/2πi)·[[∫γ₁ω₁, ∫γ₂ω₁], [∫γ₁ω₂, ∫γ₂ω₂]]
//!      = [[K/(πi), K′/π], [(K−E)/(πi), E′/π]],
//! ```
//!
//! `K = K(λ)`, `E = E(λ)`, `K′ = K(1−λ)`, `E′ = E(1−λ)` in the parameter
//! convention, valid for λ off `(−∞, 0] ∪ [1, ∞)`. Legendre's relation gives
//! `det 𝒫 = 1/(2πi)`.

use rug::float::Round;
use rug::{Float, Rational};
use thiserror::Error;

use crate::numerics::ball::{mag_add, mag_mul, mag_pow2, MAG_PREC};
use crate::numerics::roots::approx_roots_f64;
use crate::numerics::{recognize_algebraic, ComplexBall, FieldElem, NumberField, NumericsError, Precision, RationalFunction};
use crate::picard_fuchs::{GMatrix, GaussManinMatrix, MonodromyFactor, QMat};
use crate::series::SeriesError;
use crate::family::LimitValue;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum PeriodsError {
    #[error("AGM iteration did not converge")]
    NonConvergence,
    #[error("λ is outside the domain of the closed-form periods: {0}")]
    DomainError(String),
    #[error("truncation tail dominates: {0}")]
    TruncationDominates(String),
    #[error("connection constants are not of the expected form: {0}")]
    FormViolated(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

impl From<SeriesError> for PeriodsError {
    fn from(e: SeriesError) -> Self {
        match e {
            SeriesError::Numerics(n) => PeriodsError::Numerics(n),
            other => PeriodsError::TruncationDominates(other.to_string()),
        }
    }
}

/// 2×2 matrix of complex balls.
pub type BallMat = [[ComplexBall; 2]; 2];

pub fn bm_mul(a: &BallMat, b: &BallMat) -> BallMat {
    let e = |i: usize, j: usize| a[i][0].mul(&b[0][j]).add(&a[i][1].mul(&b[1][j]));
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

pub fn bm_det(a: &BallMat) -> ComplexBall {
    a[0][0].mul(&a[1][1]).sub(&a[0][1].mul(&a[1][0]))
}

pub fn bm_inv(a: &BallMat) -> Result<BallMat, NumericsError> {
    let d = bm_det(a).inv()?;
    Ok([[a[1][1].mul(&d), a[0][1].neg().mul(&d)], [a[1][0].neg().mul(&d), a[0][0].mul(&d)]])
}

pub fn bm_sub(a: &BallMat, b: &BallMat) -> BallMat {
    let e = |i: usize, j: usize| a[i][j].sub(&b[i][j]);
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

pub fn bm_identity(prec: Precision) -> BallMat {
    let o = ComplexBall::one(prec);
    let z = ComplexBall::zero(prec);
    [[o.clone(), z.clone()], [z, o]]
}

pub fn bm_from_q(m: &QMat, prec: Precision) -> BallMat {
    let e = |i: usize, j: usize| ComplexBall::from_rational(&m[i][j], prec);
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

pub fn bm_from_field(m: &[[FieldElem; 2]; 2], emb: crate::numerics::Embedding, prec: Precision) -> BallMat {
    let e = |i: usize, j: usize| m[i][j].embed(emb, prec);
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

/// Largest radius among the entries.
pub fn bm_max_rad(a: &BallMat) -> f64 {
    a.iter().flatten().map(|b| b.rad_f64()).fold(0.0, f64::max)
}

/// Arithmetic–geometric mean with the right choice of square root.
pub fn agm(a: &ComplexBall, b: &ComplexBall, prec: Precision) -> Result<ComplexBall, PeriodsError> {
    Ok(agm_sequence(a, b, prec)?.limit)
}

struct AgmRun {
    limit: ComplexBall,
    /// `c_n = (a_{n−1} − b_{n−1})/2` for `n ≥ 1`.
    cs: Vec<ComplexBall>,
    final_gap: Float,
}

fn right_sqrt(ab: &ComplexBall, a: &ComplexBall, b: &ComplexBall, mean: &ComplexBall) -> Result<ComplexBall, PeriodsError> {
    let r = match ab.sqrt() {
        Ok(r) => r,
        Err(_) => {
            let sa = a.sqrt().map_err(|_| PeriodsError::NonConvergence)?;
            let sb = b.sqrt().map_err(|_| PeriodsError::NonConvergence)?;
            sa.mul(&sb)
        }
    };
    let d1 = mean.sub(&r).abs_upper();
    let d2 = mean.add(&r).abs_upper();
    Ok(if d1 <= d2 { r } else { r.neg() })
}

fn agm_sequence(a0: &ComplexBall, b0: &ComplexBall, prec: Precision) -> Result<AgmRun, PeriodsError> {
    if a0.contains_zero() || b0.contains_zero() {
        return Err(PeriodsError::NonConvergence);
    }
    let work = prec.with_guard(16);
    let mut a = a0.set_prec(work);
    let mut b = b0.set_prec(work);
    let mut cs = Vec::new();
    let target = mag_pow2(-(work.bits() as i32));
    for _ in 0..(4 * work.bits()) {
        let gap = a.sub(&b);
        let gap_mid = Float::with_val_round(MAG_PREC, gap.re().hypot_ref(gap.im()), Round::Up).0;
        let scale = a.abs_upper();
        let floor = mag_add(&mag_mul(&scale, &target), &mag_add(a.rad(), b.rad()));
        if gap_mid <= floor {
            let total = mag_add(&gap.abs_upper(), &mag_mul(&scale, &target));
            let limit = a.inflate(&total).set_prec(prec);
            return Ok(AgmRun { limit, cs, final_gap: total });
        }
        let mean = a.add(&b).mul_2exp(-1);
        let prod = a.mul(&b);
        let root = right_sqrt(&prod, &a, &b, &mean)?;
        cs.push(gap.mul_2exp(-1));
        a = mean;
        b = root;
    }
    Err(PeriodsError::NonConvergence)
}

/// Complete elliptic integrals `K(m)`, `E(m)` for `m` off `[1, ∞)`.
pub fn ellip_ke(m: &ComplexBall, prec: Precision) -> Result<(ComplexBall, ComplexBall), PeriodsError> {
    let work = prec.with_guard(16);
    let m = m.set_prec(work);
    let one = ComplexBall::one(work);
    let kp = one.sub(&m).sqrt().map_err(|_| PeriodsError::DomainError("m on [1, ∞)".into()))?;
    let run = agm_sequence(&one, &kp, work)?;
    let pi = ComplexBall::pi(work);
    let k = pi.div(&run.limit.mul_2exp(1))?;
    // E = K·(1 − Σ_{n≥0} 2^{n−1} c_n²), c₀² = m.
    let mut sum = m.mul_2exp(-1);
    for (i, c) in run.cs.iter().enumerate() {
        let n = i as i32 + 1;
        sum = sum.add(&c.sqr().mul_2exp(n - 1));
    }
    // Remaining terms decay quadratically; 2^{n+1}·gap² dominates them.
    let n = run.cs.len() as i32 + 1;
    let tail = mag_mul(&mag_mul(&run.final_gap, &run.final_gap), &mag_pow2(n + 1));
    let sum = sum.inflate(&tail);
    let e = k.mul(&one.sub(&sum));
    Ok((k.set_prec(prec), e.set_prec(prec)))
}

/// Period matrix of one coordinate, in the normalization with `1/(2πi)`.
#[derive(Clone, Debug)]
pub struct PeriodMatrix {
    pub entries: BallMat,
    pub coordinate_index: Option<usize>,
    /// Always `true`: entries carry the `1/(2πi)` factor.
    pub normalized: bool,
}

impl PeriodMatrix {
    pub fn det(&self) -> ComplexBall {
        bm_det(&self.entries)
    }

    /// `det 𝒫 − 1/(2πi)`.
    pub fn legendre_residual(&self) -> Result<ComplexBall, NumericsError> {
        let prec = self.entries[0][0].precision();
        let t = ComplexBall::two_pi_i(prec).inv()?;
        Ok(self.det().sub(&t))
    }

    /// The matrix with its two cycles exchanged (orientation flipped).
    pub fn swapped_cycles(&self) -> PeriodMatrix {
        let e = &self.entries;
        PeriodMatrix {
            entries: [[e[0][1].clone(), e[0][0].clone()], [e[1][1].clone(), e[1][0].clone()]],
            coordinate_index: self.coordinate_index,
            normalized: self.normalized,
        }
    }

    /// Complex conjugate entries.
    pub fn conj(&self) -> PeriodMatrix {
        let e = |i: usize, j: usize| self.entries[i][j].conj();
        PeriodMatrix { entries: [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]], coordinate_index: self.coordinate_index, normalized: true }
    }
}

/// Period matrix of `v² = u(u−1)(u−λ)`.
pub fn legendre_periods(lambda: &ComplexBall, prec: Precision) -> Result<PeriodMatrix, PeriodsError> {
    let work = prec.with_guard(24);
    let l = lambda.set_prec(work);
    let one = ComplexBall::one(work);
    let lc = one.sub(&l);
    if l.contains_zero() || lc.contains_zero() {
        return Err(PeriodsError::DomainError("λ contains 0 or 1".into()));
    }
    if l.touches_negative_axis() || lc.touches_negative_axis() {
        return Err(PeriodsError::DomainError("λ meets the cuts (−∞, 0] ∪ [1, ∞)".into()));
    }
    let (k, e) = ellip_ke(&l, work)?;
    let (kp, ep) = ellip_ke(&lc, work)?;
    let pi = ComplexBall::pi(work);
    let pii = pi.mul_i();
    let entries = [[k.div(&pii)?, kp.div(&pi)?], [k.sub(&e).div(&pii)?, ep.div(&pi)?]];
    let entries = entries.map(|row| row.map(|b| b.set_prec(prec)));
    Ok(PeriodMatrix { entries, coordinate_index: None, normalized: true })
}

/// `x^{G₀} = I + G₀·log x` for nilpotent `G₀`.
pub fn log_factor(g0: &QMat, x: &ComplexBall) -> Result<BallMat, NumericsError> {
    let prec = x.precision();
    let lx = x.log()?;
    let e = |i: usize, j: usize| {
        let base = if i == j { ComplexBall::one(prec) } else { ComplexBall::zero(prec) };
        if g0[i][j] == 0 {
            base
        } else {
            base.add(&lx.mul_rational(&g0[i][j]))
        }
    };
    Ok([[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]])
}

/// Ball value of the truncated normalized solution `S(x)` with tail bounds.
pub fn eval_gmatrix(y: &GMatrix, x: &ComplexBall, max_tail: f64) -> Result<BallMat, PeriodsError> {
    let e = |i: usize, j: usize| y.entries[i][j].eval(x, max_tail);
    Ok([[e(0, 0)?, e(0, 1)?], [e(1, 0)?, e(1, 1)?]])
}

/// Ball value of `g(x)` for a rational function.
pub fn eval_rational_function(g: &RationalFunction, x: &ComplexBall) -> Result<ComplexBall, NumericsError> {
    let prec = x.precision();
    let horner = |c: &[Rational]| {
        let mut acc = ComplexBall::zero(prec);
        for a in c.iter().rev() {
            acc = acc.mul(x).add(&ComplexBall::from_rational(a, prec));
        }
        acc
    };
    horner(g.num().coeffs()).div(&horner(g.den().coeffs()))
}

/// Frame adapted to the degeneration: the vanishing cycle must come first.
/// At λ → 1 the vanishing cycle is `γ₂`, so the frame is rotated by `[[0,−1],[1,0]]`.
pub fn degeneration_frame(limit: &LimitValue, prec: Precision) -> BallMat {
    match limit {
        LimitValue::Finite(l) if *l == 1 => {
            let z = ComplexBall::zero(prec);
            let o = ComplexBall::one(prec);
            [[z.clone(), o.neg()], [o, z]]
        }
        _ => bm_identity(prec),
    }
}

/// Period matrix at `x₀` in the de Rham basis of `G` (base change applied) and
/// the degeneration-adapted frame.
pub fn periods_on_chart(g: &GaussManinMatrix, x0: &ComplexBall, prec: Precision) -> Result<PeriodMatrix, PeriodsError> {
    let lam = eval_rational_function(&g.g, x0)?;
    let p = legendre_periods(&lam, prec)?;
    let b = bm_from_q(&g.basis_change, prec);
    let f = degeneration_frame(&g.class.limit_lambda, prec);
    Ok(PeriodMatrix { entries: bm_mul(&bm_mul(&b, &p.entries), &f), coordinate_index: Some(g.coordinate_index), normalized: true })
}

#[derive(Clone, Debug)]
pub struct ConnectionConstants {
    pub pi: BallMat,
    /// `ϖ` when `Π = diag(ϖ/(2πi), ϖ⁻¹)` within ball tolerance.
    pub cm_form: Option<ComplexBall>,
    /// Largest truncation tail folded into the evaluation.
    pub tail_allowed: f64,
}

impl ConnectionConstants {
    pub fn off_diagonal_max(&self) -> f64 {
        self.pi[0][1].abs_upper().to_f64().max(self.pi[1][0].abs_upper().to_f64())
    }

    /// `(2πi·Π₁₁)·Π₂₂`, which should contain 1 in the CM form.
    pub fn varpi_product(&self) -> ComplexBall {
        let prec = self.pi[0][0].precision();
        self.pi[0][0].mul(&ComplexBall::two_pi_i(prec)).mul(&self.pi[1][1])
    }
}

/// `Π = (S(x₀)·x₀^{G₀})⁻¹·𝒫(x₀)`.
pub fn connection_constants(
    y: &GMatrix,
    x0: &ComplexBall,
    p: &PeriodMatrix,
    monodromy: Option<&MonodromyFactor>,
    prec: Precision,
) -> Result<ConnectionConstants, PeriodsError> {
    let max_tail = 2f64.powf(-(prec.bits() as f64) / 2.0);
    let s = eval_gmatrix(y, &x0.set_prec(prec), max_tail)?;
    let full = match monodromy {
        Some(_) => bm_mul(&s, &log_factor(&y.residue, &x0.set_prec(prec))?),
        None => s,
    };
    let pi = bm_mul(&bm_inv(&full)?, &p.entries);
    let cm_form = diagonal_form(&pi);
    Ok(ConnectionConstants { pi, cm_form, tail_allowed: max_tail })
}

/// Extracts `ϖ` if `pi` is `diag(ϖ/(2πi), ϖ⁻¹)` within ball tolerance.
pub fn diagonal_form(pi: &BallMat) -> Option<ComplexBall> {
    if !pi[0][1].contains_zero() || !pi[1][0].contains_zero() {
        return None;
    }
    let prec = pi[0][0].precision();
    let varpi = pi[0][0].mul(&ComplexBall::two_pi_i(prec));
    let prod = varpi.mul(&pi[1][1]);
    prod.overlaps(&ComplexBall::one(prec)).then_some(varpi)
}

/// Constants `(d, d′)` with first column `d·S[:,0] + d′·S[:,1]` of the period
/// matrix of a singular coordinate, recognized in ℚ(i).
pub fn first_column_constants(g: &GaussManinMatrix, y: &GMatrix, prec: Precision) -> Result<(FieldElem, FieldElem), PeriodsError> {
    let work = prec.max(Precision::new(256).unwrap());
    let x0 = ComplexBall::from_rational(&Rational::from((1, 64)), work);
    let p = periods_on_chart(g, &x0, work)?;
    let c = connection_constants(y, &x0, &p, y.monodromy().as_ref(), work)?;
    let k = NumberField::quadratic(-1)?;
    let d = recognize_algebraic(&c.pi[0][0], &k, 10.0, work)?;
    let d_prime = if c.pi[1][0].contains_zero() { k.zero() } else { recognize_algebraic(&c.pi[1][0], &k, 10.0, work)? };
    Ok((d, d_prime))
}

/// Result of continuing the period matrix once around `x = 0`.
#[derive(Clone, Debug)]
pub struct MonodromyReport {
    pub start: BallMat,
    pub end: BallMat,
    /// `T = 𝒫_start⁻¹·𝒫_end`, acting on cycles.
    pub cycle_monodromy: BallMat,
    /// `(S(x₀)⁻¹·𝒫_end·𝒫_start⁻¹·S(x₀))₁₂ / (2πi)`.
    pub recovered_n: ComplexBall,
    pub series_n: Rational,
    pub unipotent: bool,
    pub vertices: usize,
    pub steps: usize,
}

fn shift_poly(c: &[Rational], center: &ComplexBall, len: usize) -> Vec<ComplexBall> {
    // Coefficients of p(center + h) in h, via repeated synthetic division.
    let prec = center.precision();
    let mut work: Vec<ComplexBall> = c.iter().map(|a| ComplexBall::from_rational(a, prec)).collect();
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        if work.is_empty() {
            out.push(ComplexBall::zero(prec));
            continue;
        }
        let mut acc = ComplexBall::zero(prec);
        let mut quotient = vec![ComplexBall::zero(prec); work.len().saturating_sub(1)];
        for i in (0..work.len()).rev() {
            acc = acc.mul(center).add(&work[i]);
            if i > 0 {
                quotient[i - 1] = acc.clone();
            }
        }
        out.push(acc);
        work = quotient;
    }
    out
}

fn series_div(num: &[ComplexBall], den: &[ComplexBall], len: usize) -> Result<Vec<ComplexBall>, NumericsError> {
    let inv0 = den[0].inv()?;
    let mut out: Vec<ComplexBall> = Vec::with_capacity(len);
    for n in 0..len {
        let mut acc = num.get(n).cloned().unwrap_or_else(|| ComplexBall::zero(inv0.precision()));
        for k in 1..=n.min(den.len() - 1) {
            acc = acc.sub(&den[k].mul(&out[n - k]));
        }
        out.push(acc.mul(&inv0));
    }
    Ok(out)
}

/// Finite singular points of `θ − G` in the `x`-plane (poles of `G(x)/x`).
pub fn singular_points(g: &GaussManinMatrix) -> Vec<(f64, f64)> {
    let mut pts = vec![(0.0, 0.0)];
    for row in &g.entries {
        for e in row {
            let c: Vec<f64> = e.den().coeffs().iter().map(|q| q.to_f64()).collect();
            for r in approx_roots_f64(&c) {
                pts.push((r.re, r.im));
            }
        }
    }
    pts
}

/// Transports a fundamental matrix along the segment `from → to` for `dY/dx = (G(x)/x)·Y`.
fn transport_segment(
    g: &GaussManinMatrix,
    sing: &[(f64, f64)],
    from: &ComplexBall,
    to: &ComplexBall,
    y: &BallMat,
    order: usize,
    steps: &mut usize,
) -> Result<BallMat, PeriodsError> {
    let prec = from.precision();
    let (fx, fy) = from.mid_f64();
    let (tx, ty) = to.mid_f64();
    let len = ((tx - fx).powi(2) + (ty - fy).powi(2)).sqrt();
    let dist_seg = |px: f64, py: f64| -> f64 {
        let (dx, dy) = (tx - fx, ty - fy);
        let t = (((px - fx) * dx + (py - fy) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
        ((fx + t * dx - px).powi(2) + (fy + t * dy - py).powi(2)).sqrt()
    };
    let rho = sing.iter().map(|&(px, py)| dist_seg(px, py)).fold(f64::INFINITY, f64::min);
    let pieces = (len / (rho / 5.0)).ceil().max(1.0) as usize;
    let mut y = y.clone();
    let mut c = from.clone();
    let delta = to.sub(from).div_i64(pieces as i64)?;
    // A(x) = G(x)/x: numerators times 1, denominators times x.
    let xden = |e: &RationalFunction| {
        let mut d = vec![Rational::new()];
        d.extend(e.den().coeffs().iter().cloned());
        d
    };
    for piece in 0..pieces {
        let target = if piece + 1 == pieces { to.clone() } else { c.add(&delta) };
        let h = target.sub(&c);
        let mut a: Vec<[[ComplexBall; 2]; 2]> = vec![bm_identity(prec); order];
        for i in 0..2 {
            for j in 0..2 {
                let e = &g.entries[i][j];
                let num = shift_poly(e.num().coeffs(), &c, order);
                let den = shift_poly(&xden(e), &c, order);
                let s = series_div(&num, &den, order)?;
                for (m, v) in s.into_iter().enumerate() {
                    a[m][i][j] = v;
                }
            }
        }
        // (n+1)·Y_{n+1} = Σ_m A_m·Y_{n−m}
        let mut ys: Vec<BallMat> = vec![y.clone()];
        for n in 0..order - 1 {
            let mut acc = [[ComplexBall::zero(prec), ComplexBall::zero(prec)], [ComplexBall::zero(prec), ComplexBall::zero(prec)]];
            for m in 0..=n {
                let t = bm_mul(&a[m], &ys[n - m]);
                for i in 0..2 {
                    for j in 0..2 {
                        acc[i][j] = acc[i][j].add(&t[i][j]);
                    }
                }
            }
            let k = (n + 1) as i64;
            ys.push(acc.map(|row| row.map(|b| b.div_i64(k).expect("nonzero"))));
        }
        // Evaluate at h with a geometric tail bound on the last terms.
        let habs = h.abs_upper().to_f64();
        let mut out = ys[order - 1].clone();
        for n in (0..order - 1).rev() {
            out = out.map(|row| row.map(|b| b.mul(&h)));
            for i in 0..2 {
                for j in 0..2 {
                    out[i][j] = out[i][j].add(&ys[n][i][j]);
                }
            }
        }
        let q = habs / (0.9 * rho);
        let last: f64 = ys[order - 10..]
            .iter()
            .enumerate()
            .map(|(k, m)| {
                let mx = m.iter().flatten().map(|b| b.abs_upper().to_f64()).fold(0.0, f64::max);
                mx * habs.powi((order - 10 + k) as i32)
            })
            .fold(0.0, f64::max);
        let tail = 4.0 * last * q / (1.0 - q);
        let tail_f = Float::with_val_round(MAG_PREC, tail, Round::Up).0;
        y = out.map(|row| row.map(|b| b.inflate(&tail_f)));
        c = target;
        *steps += 1;
    }
    Ok(y)
}

/// Continues `𝒫` of a singular coordinate once counterclockwise around `x = 0`
/// along a regular polygon through `x₀`, and recovers `N_k`.
pub fn monodromy_by_continuation(
    g: &GaussManinMatrix,
    y: &GMatrix,
    x0: &Rational,
    vertices: usize,
    prec: Precision,
) -> Result<MonodromyReport, PeriodsError> {
    let work = prec.with_guard(32);
    let mf = y.monodromy().ok_or_else(|| PeriodsError::FormViolated("coordinate has trivial residue".into()))?;
    let x0b = ComplexBall::from_rational(x0, work);
    let start = periods_on_chart(g, &x0b, work)?.entries;
    let sing = singular_points(g);
    let pi2 = ComplexBall::pi(work).mul_2exp(1);
    let pts: Vec<ComplexBall> = (0..=vertices)
        .map(|k| {
            if k == 0 || k == vertices {
                return x0b.clone();
            }
            let ang = pi2.mul_rational(&Rational::from((k as i64, vertices as i64)));
            x0b.mul(&ang.mul_i().exp())
        })
        .collect();
    let order = 90;
    let mut cur = start.clone();
    let mut steps = 0;
    for w in pts.windows(2) {
        cur = transport_segment(g, &sing, &w[0], &w[1], &cur, order, &mut steps)?;
    }
    let end = cur;
    let t = bm_mul(&bm_inv(&start)?, &end);
    let s = eval_gmatrix(y, &x0b, 2f64.powf(-(work.bits() as f64) / 2.0))?;
    let conj = bm_mul(&bm_mul(&bm_inv(&s)?, &bm_mul(&end, &bm_inv(&start)?)), &s);
    let recovered = conj[0][1].div(&ComplexBall::two_pi_i(work))?;
    let tm = bm_sub(&t, &bm_identity(work));
    let sq = bm_mul(&tm, &tm);
    let trace = t[0][0].add(&t[1][1]);
    let unipotent = sq.iter().flatten().all(|b| b.contains_zero())
        && trace.overlaps(&ComplexBall::from_i64(2, work))
        && !tm.iter().flatten().all(|b| b.contains_zero());
    let cast = |m: BallMat| m.map(|row| row.map(|b| b.set_prec(prec)));
    Ok(MonodromyReport {
        start: cast(start),
        end: cast(end),
        cycle_monodromy: cast(t),
        recovered_n: recovered.set_prec(prec),
        series_n: mf.n_k,
        unipotent,
        vertices,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::ball::ten_pow_neg;
    use crate::picard_fuchs::{gauss_manin_for_map, normalized_solution};

    fn p(b: u32) -> Precision {
        Precision::new(b).unwrap()
    }

    #[test]
    fn agm_fixed_points() {
        let prec = p(128);
        let one = ComplexBall::one(prec);
        let two = ComplexBall::from_i64(2, prec);
        assert!(agm(&one, &one, prec).unwrap().overlaps(&one));
        assert!(agm(&two, &two, prec).unwrap().overlaps(&two));
    }

    #[test]
    fn lemniscate_constant() {
        // 2∫₀¹ dt/√(1−t⁴) = π/agm(1, √2); compare with Γ(1/4)²/(2√(2π)).
        let prec = p(256);
        let s2 = ComplexBall::from_i64(2, prec).sqrt().unwrap();
        let m = agm(&ComplexBall::one(prec), &s2, prec).unwrap();
        let lhs = ComplexBall::pi(prec).div(&m).unwrap();
        let g = ComplexBall::gamma_real(&Rational::from((1, 4)), prec);
        let rhs = g.sqr().div(&ComplexBall::pi(prec).mul_2exp(1).sqrt().unwrap().mul_2exp(1)).unwrap();
        assert!(lhs.overlaps(&rhs));
        assert!(lhs.rad_f64() < 1e-60);
    }

    #[test]
    fn legendre_relation_at_one_third() {
        let prec = p(256);
        let lam = ComplexBall::from_rational(&Rational::from((1, 3)), prec);
        let pm = legendre_periods(&lam, prec).unwrap();
        let r = pm.legendre_residual().unwrap();
        assert!(r.contains_zero());
        assert!(r.abs_upper() < ten_pow_neg(40));
        assert!(!pm.swapped_cycles().legendre_residual().unwrap().contains_zero());
    }

    #[test]
    fn conjugate_symmetry() {
        let prec = p(192);
        let lam = ComplexBall::from_f64(0.3, 0.2, prec);
        let a = legendre_periods(&lam, prec).unwrap();
        let b = legendre_periods(&lam.conj(), prec).unwrap();
        // Conjugation maps the period of the conjugate curve; the 1/(πi) column flips sign.
        for i in 0..2 {
            assert!(a.entries[i][0].conj().neg().overlaps(&b.entries[i][0]));
            assert!(a.entries[i][1].conj().overlaps(&b.entries[i][1]));
        }
    }

    #[test]
    fn domain_errors() {
        let prec = p(128);
        assert!(legendre_periods(&ComplexBall::zero(prec), prec).is_err());
        assert!(legendre_periods(&ComplexBall::one(prec), prec).is_err());
        assert!(legendre_periods(&ComplexBall::from_i64(-2, prec), prec).is_err());
    }

    #[test]
    fn first_column_of_node() {
        let g = gauss_manin_for_map(&RationalFunction::parse("x").unwrap(), 0).unwrap();
        let y = normalized_solution(&g, 120).unwrap();
        let (d, dp) = first_column_constants(&g, &y, p(256)).unwrap();
        let k = NumberField::quadratic(-1).unwrap();
        assert_eq!(d, k.elem(vec![Rational::new(), Rational::from((-1, 2))]).unwrap());
        assert!(dp.is_zero());
    }
}
