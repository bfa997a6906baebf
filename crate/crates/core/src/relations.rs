//! Polynomial relations among the values of the G-series `y_{i,j,k}`.
//!
//! The determinant relations `det Y_k = 1` (one per smooth coordinate) hold
//! identically; [`zariski_closure_report`] searches for anything else of low
//! degree. At a fiber whose CM coordinates are located exactly,
//! [`build_relation`] produces a homogeneous relation that holds at every
//! archimedean place where the point is close to `x = 0` but not identically.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Integer, Rational};
use thiserror::Error;

use crate::cm::{cm_discriminant_numeric, CmError};
use crate::family::{
    classify_coordinates, is_gao_admissible, j_invariant, rational_cm_discriminant, AdmissibleClause, CoordKind, FamilyError, FamilySpec,
    RATIONAL_SINGULAR_MODULI,
};
use crate::gfunctions::{proximity, radius, GFunctionError, GSeries, Place, ProximityPlace, RadiusReport};
use crate::numerics::field::squarefree_part;
use crate::numerics::recognize::integer_relation;
use crate::numerics::roots::isolate_roots;
use crate::numerics::{recognize_in_embedding, ComplexBall, Embedding, FieldElem, NumberField, NumericsError, Precision};
use crate::periods::{
    bm_det, bm_from_field, bm_inv, bm_max_rad, bm_mul, bm_sub, diagonal_form, eval_gmatrix, eval_rational_function, legendre_periods, BallMat,
    PeriodMatrix, PeriodsError,
};
use crate::picard_fuchs::{gauss_manin, normalized_solution, GMatrix, PicardFuchsError, QMat};
use crate::series::{FieldSeries, QSeries};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum RelationError {
    #[error("det Y − 1 has nonzero coefficient {coefficient} at x^{index} for coordinate {coordinate}")]
    ResidualNonZero { coordinate: usize, index: usize, coefficient: String },
    #[error("det 𝒫 − 1/(2πi) excludes zero at sample {index}: {residual}")]
    ResidualExcludesZero { index: usize, residual: String },
    #[error("{0} vanishing relation(s) outside the determinant ideal")]
    UnexpectedRelationFound(usize),
    #[error("recognition failed: {0}")]
    RecognitionFailed(String),
    #[error("fiber is not CM at this coordinate")]
    NotCMFiber,
    #[error("family is not admissible: {0}")]
    NotGAOAdmissible(String),
    #[error("no CM coordinate of the family is CM at this point")]
    NonCMFiber,
    #[error("not implemented: {0}")]
    NotImplementedCase(String),
    #[error("substituted series vanish identically mod x^{0}")]
    TrivialRelationProduced(usize),
    #[error("no archimedean place is close to x = 0")]
    NoProximatePlace,
    #[error("point is degenerate for coordinate {0}")]
    DegeneratePoint(usize),
    #[error(transparent)]
    PicardFuchs(#[from] PicardFuchsError),
    #[error(transparent)]
    Periods(#[from] PeriodsError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    GFunction(#[from] GFunctionError),
    #[error(transparent)]
    Cm(#[from] CmError),
}

/// Variable `X_{i,j,k}`, one-based.
pub type Var = (usize, usize, usize);

/// 2×2 matrix over a number field.
pub type FMat = [[FieldElem; 2]; 2];

pub fn fmat_identity(k: &NumberField) -> FMat {
    [[k.one(), k.zero()], [k.zero(), k.one()]]
}

pub fn fmat_mul(a: &FMat, b: &FMat) -> FMat {
    let e = |i: usize, j: usize| a[i][0].mul(&b[0][j]).add(&a[i][1].mul(&b[1][j]));
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

pub fn fmat_det(a: &FMat) -> FieldElem {
    a[0][0].mul(&a[1][1]).sub(&a[0][1].mul(&a[1][0]))
}

pub fn fmat_inv(a: &FMat) -> Result<FMat, NumericsError> {
    let d = fmat_det(a).inv()?;
    Ok([[a[1][1].mul(&d), a[0][1].neg().mul(&d)], [a[1][0].neg().mul(&d), a[0][0].mul(&d)]])
}

pub fn fmat_lift(a: &FMat, k: &NumberField) -> Result<FMat, NumericsError> {
    let e = |i: usize, j: usize| a[i][j].lift(k);
    Ok([[e(0, 0)?, e(0, 1)?], [e(1, 0)?, e(1, 1)?]])
}

pub fn fmat_conjugate(a: &FMat, sigma: Embedding) -> FMat {
    let e = |i: usize, j: usize| a[i][j].conjugate(sigma);
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

/// `ℚ(√D)` for a negative discriminant `D`.
pub fn cm_field(d: i64) -> Result<NumberField, NumericsError> {
    NumberField::quadratic(squarefree_part(d))
}

/// `K(√d)`, or `K` itself when `√d ∈ K`.
pub fn adjoin_sqrt(k: &NumberField, d: i64) -> Result<NumberField, NumericsError> {
    let d = squarefree_part(d);
    if d == 1 || k.sqrt_of(d).is_some() {
        return Ok(k.clone());
    }
    k.compositum(&NumberField::quadratic(d)?)
}

fn fmat_to_q(a: &FMat) -> Option<QMat> {
    let e = |i: usize, j: usize| a[i][j].as_rational();
    Some([[e(0, 0)?, e(0, 1)?], [e(1, 0)?, e(1, 1)?]])
}

fn fmat_json(a: &FMat) -> serde_json::Value {
    serde_json::json!(a.iter().map(|r| r.iter().map(|c| c.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn ball_json(b: &ComplexBall) -> serde_json::Value {
    b.to_json(30)
}

/// `Σ c_i xⁱ` at a field element.
pub fn eval_poly_field(c: &[Rational], x: &FieldElem) -> FieldElem {
    let mut acc = x.field().zero();
    for a in c.iter().rev() {
        acc = acc.mul(x).add(&x.field().from_rational(a.clone()));
    }
    acc
}

pub fn eval_map_field(g: &crate::numerics::RationalFunction, x: &FieldElem) -> Result<FieldElem, NumericsError> {
    eval_poly_field(g.num().coeffs(), x).div(&eval_poly_field(g.den().coeffs(), x))
}

/// `j(λ) = 256(λ² − λ + 1)³/(λ²(1 − λ)²)` over a number field.
pub fn j_invariant_field(l: &FieldElem) -> Result<FieldElem, NumericsError> {
    let k = l.field();
    let one = k.one();
    let num = l.mul(l).sub(l).add(&one).pow(3).mul_rational(&Rational::from(256));
    let om = one.sub(l);
    let den = l.mul(l).mul(&om).mul(&om);
    num.div(&den)
}

/// The G-series of the family: all four entries of `Y_k` for smooth
/// coordinates, the log-free first column for singular ones.
pub fn family_series(spec: &FamilySpec, order: usize) -> Result<Vec<GSeries>, RelationError> {
    let mut out = Vec::new();
    for k in 0..spec.n {
        let g = gauss_manin(spec, k)?;
        let y = normalized_solution(&g, order)?;
        for i in 0..2 {
            for j in 0..2 {
                if g.is_singular() && j == 1 {
                    continue;
                }
                out.push(GSeries::rational((i + 1, j + 1, k + 1), y.entries[i][j].coeffs().to_vec()));
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Trivial relations.

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesCheckReport {
    pub order: usize,
    /// One-based indices of the smooth coordinates checked.
    pub checked: Vec<usize>,
}

/// `det Y_k − 1 ≡ 0 mod x^order` for every smooth block.
pub fn trivial_relation_series_check(blocks: &[GMatrix], order: usize) -> Result<SeriesCheckReport, RelationError> {
    let mut checked = Vec::new();
    for y in blocks {
        if y.monodromy().is_some() {
            continue;
        }
        let t = |i: usize, j: usize| y.entries[i][j].truncate(order);
        let det = t(0, 0).mul(&t(1, 1)).sub(&t(0, 1).mul(&t(1, 0)));
        let res = det.sub(&QSeries::one(det.len()));
        if let Some(v) = res.valuation() {
            return Err(RelationError::ResidualNonZero {
                coordinate: y.coordinate_index + 1,
                index: v,
                coefficient: res.coeff(v).to_string(),
            });
        }
        checked.push(y.coordinate_index + 1);
    }
    Ok(SeriesCheckReport { order, checked })
}

/// Test fixture: every basis form multiplied by `factor`.
pub fn rescaled_basis(y: &GMatrix, factor: &Rational) -> GMatrix {
    let mut out = y.clone();
    for row in out.entries.iter_mut() {
        for e in row.iter_mut() {
            *e = e.scale(factor);
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct NumericCheckReport {
    pub residuals: Vec<ComplexBall>,
    pub max_radius: f64,
}

/// `det 𝒫 − 1/(2πi) ∋ 0` for each period matrix.
pub fn trivial_relation_numeric_check(ps: &[PeriodMatrix]) -> Result<NumericCheckReport, RelationError> {
    let mut residuals = Vec::with_capacity(ps.len());
    for (index, p) in ps.iter().enumerate() {
        let r = p.legendre_residual()?;
        if !r.contains_zero() {
            let (re, im) = r.mid_strings(20);
            return Err(RelationError::ResidualExcludesZero { index, residual: format!("{re} + {im}i ± {}", r.rad_string()) });
        }
        residuals.push(r);
    }
    let max_radius = residuals.iter().map(|r| r.abs_upper().to_f64()).fold(0.0, f64::max);
    Ok(NumericCheckReport { residuals, max_radius })
}

// ---------------------------------------------------------------------------
// Low-degree closure search.

/// Exponent vectors of total degree `≤ d` in `n` variables, by degree then lexicographically.
pub fn monomials(n: usize, d: usize) -> Vec<Vec<u32>> {
    let mut out = vec![vec![0u32; n]];
    let mut layer = vec![vec![0u32; n]];
    for _ in 0..d {
        let mut next = Vec::new();
        for m in &layer {
            let last = m.iter().rposition(|&e| e > 0).unwrap_or(0);
            for v in last..n {
                let mut e = m.clone();
                e[v] += 1;
                next.push(e);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Basis of `{c : A·c = 0}` for a dense rational matrix.
pub fn nullspace(a: &[Vec<Rational>], cols: usize) -> Vec<Vec<Rational>> {
    let mut m: Vec<Vec<Rational>> = a.to_vec();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        let Some(p) = (row..m.len()).find(|&r| m[r][col] != 0) else { continue };
        m.swap(row, p);
        let inv = Rational::from(m[row][col].recip_ref());
        for c in col..cols {
            m[row][c] *= &inv;
        }
        for r in 0..m.len() {
            if r != row && m[r][col] != 0 {
                let f = m[r][col].clone();
                for c in col..cols {
                    let t = Rational::from(&f * &m[row][c]);
                    m[r][c] -= t;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == m.len() {
            break;
        }
    }
    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Rational::new(); cols];
        v[free] = Rational::from(1);
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = Rational::from(-&m[r][free]);
        }
        basis.push(v);
    }
    basis
}

fn rank(rows: &[Vec<Rational>], cols: usize) -> usize {
    // rank = cols − dim ker(rows)
    cols - nullspace(rows, cols).len()
}

#[derive(Clone, Debug)]
pub struct ClosureReport {
    pub variables: Vec<Var>,
    pub max_degree: usize,
    pub monomial_count: usize,
    pub order: usize,
    pub vanishing_dim: usize,
    pub expected_dim: usize,
    pub contains_expected: bool,
    pub basis: Vec<Vec<Rational>>,
    pub sampled: usize,
    pub sampled_vanishing: usize,
}

impl ClosureReport {
    pub fn unexpected(&self) -> usize {
        self.vanishing_dim.saturating_sub(self.expected_dim)
    }

    pub fn check(&self) -> Result<(), RelationError> {
        match self.unexpected() {
            0 if self.contains_expected && self.sampled_vanishing == 0 => Ok(()),
            0 => Err(RelationError::UnexpectedRelationFound(self.sampled_vanishing)),
            n => Err(RelationError::UnexpectedRelationFound(n)),
        }
    }
}

/// Variables of the ambient space: all four entries for smooth coordinates,
/// the log-free first column for singular ones.
pub fn closure_variables(spec: &FamilySpec, order: usize) -> Result<(Vec<Var>, Vec<QSeries>, Vec<usize>), RelationError> {
    let mut vars = Vec::new();
    let mut series = Vec::new();
    let mut smooth = Vec::new();
    for k in 0..spec.n {
        let g = gauss_manin(spec, k)?;
        let y = normalized_solution(&g, order)?;
        if g.is_singular() {
            for i in 0..2 {
                vars.push((i + 1, 1, k + 1));
                series.push(y.entries[i][0].clone());
            }
        } else {
            smooth.push(vars.len());
            for i in 0..2 {
                for j in 0..2 {
                    vars.push((i + 1, j + 1, k + 1));
                    series.push(y.entries[i][j].clone());
                }
            }
        }
    }
    Ok((vars, series, smooth))
}

fn monomial_series(m: &[u32], series: &[QSeries], order: usize) -> QSeries {
    let mut acc = QSeries::one(order);
    for (v, &e) in m.iter().enumerate() {
        for _ in 0..e {
            acc = acc.mul(&series[v]);
        }
    }
    acc
}

pub fn zariski_closure_report(spec: &FamilySpec, order: usize, max_degree: usize, samples: usize, seed: u64) -> Result<ClosureReport, RelationError> {
    let (variables, series, smooth) = closure_variables(spec, order)?;
    let n = variables.len();
    let mons = monomials(n, max_degree);
    let msers: Vec<QSeries> = mons.iter().map(|m| monomial_series(m, &series, order)).collect();
    let a: Vec<Vec<Rational>> = (0..order).map(|i| msers.iter().map(|s| s.coeff(i).clone()).collect()).collect();
    let basis = nullspace(&a, mons.len());
    let index = |e: Vec<u32>| mons.iter().position(|m| *m == e).expect("monomial present");
    let mut expected = Vec::new();
    if max_degree >= 2 {
        for &s in &smooth {
            let mut v = vec![Rational::new(); mons.len()];
            let unit = |a: usize, b: usize| {
                let mut e = vec![0u32; n];
                e[s + a] += 1;
                e[s + b] += 1;
                e
            };
            v[index(unit(0, 3))] += 1;
            v[index(unit(1, 2))] -= 1;
            v[0] -= 1;
            expected.push(v);
        }
    }
    let apply = |v: &[Rational]| -> bool {
        a.iter().all(|row| row.iter().zip(v).fold(Rational::new(), |acc, (x, y)| acc + Rational::from(x * y)) == 0)
    };
    let contains_expected = expected.iter().all(|v| apply(v));
    let base_rank = rank(&expected, mons.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sampled = 0;
    let mut sampled_vanishing = 0;
    while sampled < samples {
        let v: Vec<Rational> = (0..mons.len()).map(|_| Rational::from(rng.gen_range(-3i64..=3))).collect();
        if v.iter().all(|c| *c == 0) {
            continue;
        }
        let mut with = expected.clone();
        with.push(v.clone());
        if rank(&with, mons.len()) == base_rank {
            continue;
        }
        sampled += 1;
        let mut acc = QSeries::zero(order);
        for (c, s) in v.iter().zip(&msers) {
            if *c != 0 {
                acc = acc.add(&s.scale(c));
            }
        }
        if acc.is_zero() {
            sampled_vanishing += 1;
        }
    }
    Ok(ClosureReport {
        variables,
        max_degree,
        monomial_count: mons.len(),
        order,
        vanishing_dim: basis.len(),
        expected_dim: expected.len(),
        contains_expected,
        basis,
        sampled,
        sampled_vanishing,
    })
}

// ---------------------------------------------------------------------------
// CM bases.

/// Bases with `B_dR·𝒫·B_b = diag(ϖ/(2πi), ϖ⁻¹)`, `det B_dR = det B_b = 1`.
#[derive(Clone, Debug)]
pub struct CmBasis {
    pub field: NumberField,
    pub embedding: Embedding,
    pub b_dr: FMat,
    pub b_b: FMat,
    pub diagonal: BallMat,
    pub varpi: ComplexBall,
    pub off_diagonal: f64,
}

impl CmBasis {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "field": self.field.label(),
            "embedding": self.embedding.0,
            "b_dr": fmat_json(&self.b_dr),
            "b_b": fmat_json(&self.b_b),
            "varpi": ball_json(&self.varpi),
            "off_diagonal_bound": format!("{:e}", self.off_diagonal),
        })
    }
}

/// Recognizes the CM-adapted bases for a period matrix of a CM curve.
///
/// With rows `(p₁, p₂)`, `(q₁, q₂)`, the lattice ratio `r = p₂/p₁` lies in the
/// CM field and `s = r̄` is its conjugate; `B_dR = [[1, 0], [β, 1]]` makes the
/// second row an eigen-covector, `β = (s q₁ − q₂)/(p₂ − s p₁)`, and
/// `B_b = [[−s, −r/(r−s)], [1, 1/(r−s)]]`.
pub fn cm_basis_recognition(p: &BallMat, field: &NumberField, emb: Embedding, prec: Precision) -> Result<CmBasis, RelationError> {
    let id = fmat_identity(field);
    let off = |m: &BallMat| m[0][1].abs_upper().to_f64().max(m[1][0].abs_upper().to_f64());
    if let Some(varpi) = diagonal_form(p) {
        return Ok(CmBasis { field: field.clone(), embedding: emb, b_dr: id.clone(), b_b: id, diagonal: p.clone(), varpi, off_diagonal: off(p) });
    }
    let r = p[0][1].div(&p[0][0])?;
    if r.imag_part().contains_zero() {
        return Err(RelationError::NotCMFiber);
    }
    let s = r.conj();
    let beta = s.mul(&p[1][0]).sub(&p[1][1]).div(&p[0][1].sub(&s.mul(&p[0][0])))?;
    let rec = |z: &ComplexBall, what: &str| {
        recognize_in_embedding(z, field, emb, 24.0, prec)
            .map(|r| r.value)
            .map_err(|e| RelationError::RecognitionFailed(format!("{what} in {}: {e}", field.label())))
    };
    let (r, s, beta) = (rec(&r, "r")?, rec(&s, "s")?, rec(&beta, "β")?);
    let rs = r.sub(&s);
    let rs_inv = rs.inv()?;
    let b_dr = [[field.one(), field.zero()], [beta, field.one()]];
    let b_b = [[s.neg(), r.mul(&rs_inv).neg()], [field.one(), rs_inv]];
    if fmat_det(&b_b) != field.one() || fmat_det(&b_dr) != field.one() {
        return Err(RelationError::RecognitionFailed("recognized bases are not unimodular".into()));
    }
    let diagonal = bm_mul(&bm_mul(&bm_from_field(&b_dr, emb, prec), p), &bm_from_field(&b_b, emb, prec));
    let varpi = diagonal_form(&diagonal).ok_or_else(|| RelationError::RecognitionFailed("B_dR·𝒫·B_b is not of the CM form".into()))?;
    Ok(CmBasis { field: field.clone(), embedding: emb, b_dr, b_b, off_diagonal: off(&diagonal), diagonal, varpi })
}

/// `Y′(x₀)·Π′ = 𝒫′(g(x₀))` in the CM-adapted basis of a smooth CM coordinate,
/// with `Π′ = B_dR·𝒫(g(0))·B_b` computed at `x = 0` independently of the series.
#[derive(Clone, Debug)]
pub struct FactorizationReport {
    pub coordinate: usize,
    pub basis: CmBasis,
    /// `Π′` from the base fiber.
    pub pi: BallMat,
    /// `Y′(x₀)⁻¹·𝒫′(g(x₀))`, from the series.
    pub pi_from_series: BallMat,
    pub factorization_residual: f64,
    pub off_diagonal: f64,
    /// `(2πi·Π′₁₁)·Π′₂₂`.
    pub product: ComplexBall,
}

pub fn cm_adapted_factorization(
    spec: &FamilySpec,
    k: usize,
    x0: &Rational,
    order: usize,
    prec: Precision,
) -> Result<FactorizationReport, RelationError> {
    let g = gauss_manin(spec, k)?;
    let d = g.class.cm_discriminant.ok_or(RelationError::NotCMFiber)?;
    let l0 = g.g.value_at_zero().ok_or(RelationError::DegeneratePoint(k + 1))?;
    let work = prec.with_guard(32);
    let p0 = legendre_periods(&ComplexBall::from_rational(&l0, work), work)?;
    let field = cm_field(d)?;
    let basis = cm_basis_recognition(&p0.entries, &field, Embedding(0), work)?;
    let b_q = fmat_to_q(&basis.b_dr).ok_or_else(|| RelationError::RecognitionFailed("B_dR is not rational".into()))?;
    let gp = g.conjugate_by(&b_q)?;
    let y = normalized_solution(&gp, order)?;
    let xb = ComplexBall::from_rational(x0, work);
    let lam = eval_rational_function(&g.g, &xb)?;
    let px = legendre_periods(&lam, work)?;
    let bdr = bm_from_field(&basis.b_dr, Embedding(0), work);
    let bb = bm_from_field(&basis.b_b, Embedding(0), work);
    let target = bm_mul(&bm_mul(&bdr, &px.entries), &bb);
    let yx = eval_gmatrix(&y, &xb, 2f64.powf(-(work.bits() as f64) / 2.0))?;
    let pi = basis.diagonal.clone();
    let diff = bm_sub(&bm_mul(&yx, &pi), &target);
    let factorization_residual = diff.iter().flatten().map(|b| b.abs_upper().to_f64()).fold(0.0, f64::max);
    let pi_from_series = bm_mul(&bm_inv(&yx)?, &target);
    let off_diagonal = pi_from_series[0][1].abs_upper().to_f64().max(pi_from_series[1][0].abs_upper().to_f64());
    let product = pi_from_series[0][0].mul(&ComplexBall::two_pi_i(work)).mul(&pi_from_series[1][1]);
    let cast = |m: BallMat| m.map(|r| r.map(|b| b.set_prec(prec)));
    Ok(FactorizationReport {
        coordinate: k + 1,
        basis,
        pi: cast(pi),
        pi_from_series: cast(pi_from_series),
        factorization_residual,
        off_diagonal,
        product: product.set_prec(prec),
    })
}

// ---------------------------------------------------------------------------
// Locating CM fibers.

#[derive(Clone, Debug, PartialEq)]
pub struct LocatedFiber {
    pub t: FieldElem,
    /// Zero-based coordinate whose fiber is CM.
    pub coordinate: usize,
    pub discriminant: i64,
    pub lambda: FieldElem,
    pub abs_t: f64,
}

fn quadratic_from_relation(z: &ComplexBall, rel: &[Integer]) -> Option<FieldElem> {
    let (a, b, c) = (rel[0].clone(), rel[1].clone(), rel[2].clone());
    if a == 0 {
        if b == 0 {
            return None;
        }
        return Some(NumberField::rationals().from_rational(Rational::from((-c, b))));
    }
    let disc = Integer::from(&b * &b) - Integer::from(4) * &a * &c;
    let dv = disc.to_i64()?;
    if dv == 0 {
        return Some(NumberField::rationals().from_rational(Rational::from((-b, Integer::from(2) * &a))));
    }
    let d = squarefree_part(dv);
    let f2 = Rational::from((dv, d));
    let f = f2.numer().clone().sqrt();
    if Rational::from(&f * &f) != f2 {
        return None;
    }
    let k = if d == 1 { NumberField::rationals() } else { NumberField::quadratic(d).ok()? };
    let two_a = Integer::from(2) * &a;
    let base = k.from_rational(Rational::from((Integer::from(-&b), two_a.clone())));
    let root = if d == 1 { k.one() } else { k.sqrt_of(d)? };
    let step = root.mul_rational(&Rational::from((f, two_a)));
    let prec = z.precision();
    [base.add(&step), base.sub(&step)].into_iter().find(|x| x.embed(Embedding(0), prec).overlaps(z))
}

/// Points `x ≠ 0` with `|x| < max_abs_t` where a coordinate that is CM at `x = 0`
/// is again CM with a rational singular modulus, certified by exact evaluation of `j`.
pub fn locate_cm_fibers(spec: &FamilySpec, max_abs_t: f64, prec: Precision) -> Result<Vec<LocatedFiber>, RelationError> {
    let classes = classify_coordinates(spec, prec);
    let mut out: Vec<LocatedFiber> = Vec::new();
    for (k, cls) in classes.iter().enumerate() {
        if cls.kind != CoordKind::SmoothCM {
            continue;
        }
        let g = &spec.coords[k].g;
        let (n, dn) = (g.num().clone(), g.den().clone());
        let q = n.mul(&n).sub(&n.mul(&dn)).add(&dn.mul(&dn));
        let q3 = q.pow(3).scale(&Rational::from(256));
        let w = n.mul(&n).mul(&dn.sub(&n).pow(2)).mul(&dn.mul(&dn));
        for (d, j) in RATIONAL_SINGULAR_MODULI {
            let poly = q3.sub(&w.scale(&Rational::from(j)));
            let sq = poly.div_rem(&poly.gcd(&poly.derivative()))?.0;
            let ints = sq.primitive_integer();
            let Ok(roots) = isolate_roots(&ints, prec) else { continue };
            for z in roots {
                let a = z.abs_upper().to_f64();
                if z.contains_zero() || a >= max_abs_t {
                    continue;
                }
                let Some(rel) = integer_relation(&[z.sqr(), z.clone(), ComplexBall::one(prec)], prec) else { continue };
                let Some(t) = quadratic_from_relation(&z, &rel) else { continue };
                let Ok(lam) = eval_map_field(g, &t) else { continue };
                let jv = match j_invariant_field(&lam) {
                    Ok(v) => v,
                    Err(_) => continue,
                };
                if jv.as_rational() != Some(Rational::from(j)) {
                    continue;
                }
                if out.iter().any(|f| f.t == t && f.coordinate == k) {
                    continue;
                }
                out.push(LocatedFiber { t, coordinate: k, discriminant: d, lambda: lam, abs_t: a });
            }
        }
    }
    out.sort_by(|a, b| {
        let key = |f: &LocatedFiber| {
            let (re, im) = f.t.embed(Embedding(0), Precision::new(64).unwrap()).mid_f64();
            (f.abs_t, re, im)
        };
        key(a).partial_cmp(&key(b)).unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(out)
}

// ---------------------------------------------------------------------------
// Relations at CM fibers.

/// Homogeneous polynomial in the `X_{i,j,k}` with coefficients in a number field.
#[derive(Clone, Debug, PartialEq)]
pub struct RelationPolynomial {
    pub variables: Vec<Var>,
    pub terms: Vec<(Vec<u32>, FieldElem)>,
    pub degree: usize,
    pub homogeneous: bool,
}

type PolyMap = BTreeMap<Vec<u32>, FieldElem>;

fn poly_mul(a: &PolyMap, b: &PolyMap) -> PolyMap {
    let mut out = PolyMap::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            let c = ca.mul(cb);
            let slot = out.entry(e).or_insert_with(|| c.field().zero());
            *slot = slot.add(&c);
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn poly_add(a: &PolyMap, b: &PolyMap) -> PolyMap {
    let mut out = a.clone();
    for (e, c) in b {
        let slot = out.entry(e.clone()).or_insert_with(|| c.field().zero());
        *slot = slot.add(c);
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn poly_scale(a: &PolyMap, c: &FieldElem) -> PolyMap {
    let mut out: PolyMap = a.iter().map(|(e, v)| (e.clone(), v.mul(c))).collect();
    out.retain(|_, c| !c.is_zero());
    out
}

impl RelationPolynomial {
    fn from_map(variables: Vec<Var>, m: PolyMap) -> Self {
        let degs: Vec<u32> = m.keys().map(|e| e.iter().sum()).collect();
        let degree = degs.iter().copied().max().unwrap_or(0) as usize;
        let homogeneous = degs.iter().all(|&d| d as usize == degree);
        RelationPolynomial { variables, terms: m.into_iter().collect(), degree, homogeneous }
    }

    fn map(&self) -> PolyMap {
        self.terms.iter().cloned().collect()
    }

    pub fn conjugate(&self, sigma: Embedding) -> RelationPolynomial {
        RelationPolynomial {
            variables: self.variables.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c.conjugate(sigma))).collect(),
            degree: self.degree,
            homogeneous: self.homogeneous,
        }
    }

    pub fn eval_ball(&self, values: &[ComplexBall], emb: Embedding, prec: Precision) -> ComplexBall {
        let mut acc = ComplexBall::zero(prec);
        for (e, c) in &self.terms {
            let mut t = c.embed(emb, prec);
            for (v, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = t.mul(&values[v].pow_u(k));
                }
            }
            acc = acc.add(&t);
        }
        acc
    }

    pub fn eval_series(&self, values: &[FieldSeries], field: &NumberField, len: usize) -> FieldSeries {
        let mut acc = FieldSeries::zero(field, len);
        for (e, c) in &self.terms {
            let mut t = FieldSeries::constant(c, len);
            for (v, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    t = t.mul(&values[v]);
                }
            }
            acc = acc.add(&t);
        }
        acc
    }

    pub fn to_json(&self) -> serde_json::Value {
        let name = |(i, j, k): &Var| format!("X_{i}{j}{k}");
        let terms: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let mono: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &k)| k > 0)
                    .map(|(v, &k)| if k == 1 { name(&self.variables[v]) } else { format!("{}^{k}", name(&self.variables[v])) })
                    .collect();
                serde_json::json!({ "monomial": mono.join("*"), "coefficient": c.to_string() })
            })
            .collect();
        serde_json::json!({ "degree": self.degree, "homogeneous": self.homogeneous, "terms": terms })
    }
}

#[derive(Clone, Debug)]
pub struct RelationCertificate {
    pub point: FieldElem,
    pub place: Embedding,
    /// `ι_v(R_{s,∞})(𝒴(ι_v x(s)))`.
    pub residual: ComplexBall,
    /// The local factor of this place alone.
    pub local_residual: ComplexBall,
    /// `max |Y(ι_v x(s))·Π − 𝒫(g(ι_v x(s)))|` before the change of bases.
    pub factorization_residual: f64,
    pub degree_bound_check: bool,
    pub field_degree: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NontrivialityWitness {
    pub order_of_vanishing: usize,
    pub coefficient: FieldElem,
    pub truncation: usize,
}

#[derive(Clone, Debug)]
pub struct RelationOutcome {
    pub point: FieldElem,
    pub base_field: NumberField,
    pub field: NumberField,
    pub polynomial: RelationPolynomial,
    pub local_factors: Vec<(Embedding, RelationPolynomial)>,
    pub certificates: Vec<RelationCertificate>,
    pub nontriviality: NontrivialityWitness,
    /// Coordinates carrying a local factor, with their CM discriminants.
    pub carriers: Vec<(usize, i64)>,
    /// Per coordinate: discriminant of the fiber if CM was detected.
    pub fiber_discriminants: Vec<Option<i64>>,
    pub all_cm: bool,
    pub coherent: bool,
    pub proximity_radius: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct RelationOptions {
    pub prec: Precision,
    /// Truncation order of the nontriviality check.
    pub check_order: usize,
    /// Largest `|D|` accepted by numeric CM detection.
    pub max_abs_d: i64,
}

impl Default for RelationOptions {
    fn default() -> Self {
        RelationOptions { prec: Precision::new(512).unwrap(), check_order: 50, max_abs_d: 10_000 }
    }
}

impl RelationOutcome {
    pub fn max_residual(&self) -> f64 {
        self.certificates.iter().map(|c| c.residual.abs_upper().to_f64()).fold(0.0, f64::max)
    }

    pub fn degree_bound(&self) -> usize {
        2 * self.field.degree()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let places: Vec<serde_json::Value> = self
            .certificates
            .iter()
            .map(|c| {
                let (re, im) = c.residual.mid_strings(20);
                serde_json::json!({
                    "embedding": c.place.0,
                    "point_value": ball_json(&c.point.embed(c.place, Precision::new(128).unwrap())),
                    "residual_mid": [re, im],
                    "residual_rad": c.residual.rad_string(),
                    "local_residual": c.local_residual.to_json(20),
                    "factorization_residual_bound": format!("{:e}", c.factorization_residual),
                })
            })
            .collect();
        let n = self.fiber_discriminants.len();
        serde_json::json!({
            "point": self.point.to_json(),
            "field": {
                "generators": self.field.generators(),
                "label": self.field.label(),
                "degree": self.field.degree(),
            },
            "base_field": { "label": self.base_field.label(), "degree": self.base_field.degree() },
            "places": places,
            "polynomial": self.polynomial.to_json(),
            "degree_bound": { "degree": self.polynomial.degree, "bound": self.degree_bound(), "holds": self.polynomial.degree <= self.degree_bound() },
            "field_degree_bookkeeping": format!(
                "[L_s:Q] = {} <= 2^{n}*c0({n})*[K(s):Q] = {}*c0({n})",
                self.field.degree(),
                (1usize << n) * self.base_field.degree()
            ),
            "nontriviality": {
                "order_of_vanishing": self.nontriviality.order_of_vanishing,
                "witness_coefficient": self.nontriviality.coefficient.to_string(),
                "truncation": self.nontriviality.truncation,
            },
            "carriers": self.carriers.iter().map(|(k, d)| serde_json::json!({ "coordinate": k + 1, "discriminant": d })).collect::<Vec<_>>(),
            "fiber_discriminants": self.fiber_discriminants,
            "all_cm": self.all_cm,
            "conjugation_coherent": self.coherent,
            "proximity_radius_estimate": format!("{:e}", self.proximity_radius),
        })
    }
}

/// Discriminant of the fiber `λ ∈ K(s)`: exact for rational `j`, numeric otherwise.
pub fn fiber_discriminant(lambda: &FieldElem, max_abs_d: i64, prec: Precision) -> Result<Option<i64>, RelationError> {
    let j = j_invariant_field(lambda)?;
    if let Some(q) = j.as_rational() {
        if let Some(d) = rational_cm_discriminant(&q) {
            return Ok(Some(d));
        }
        if lambda.is_rational() {
            return Ok(None);
        }
    }
    Ok(cm_discriminant_numeric(&lambda.embed(Embedding(0), prec), max_abs_d, prec)?)
}

fn eval_order_for(abs_t: f64, radius: f64, bits: u32) -> usize {
    let q = abs_t / (0.9 * radius);
    let need = (bits as f64 / 4.0 + 16.0) * 2f64.ln();
    ((need / -q.ln()).ceil() as usize + 20).clamp(60, 2000)
}

/// Builds `R_{s,∞}` at the point `x(s) = t` (an exact element of `K(s)`).
pub fn build_relation(spec: &FamilySpec, t: &FieldElem, opts: RelationOptions) -> Result<RelationOutcome, RelationError> {
    let prec = opts.prec;
    // Recognition over a degree-4 field needs about 512 bits regardless of the requested output precision.
    let work = prec.max(Precision::new(512).expect("valid")).with_guard(32);
    let classes = classify_coordinates(spec, prec);
    let adm = is_gao_admissible(&classes);
    match adm.clause {
        None => return Err(RelationError::NotGAOAdmissible(adm.reason)),
        Some(AdmissibleClause::TwoSingular) => {
            return Err(RelationError::NotImplementedCase("relations for families with two singular coordinates".into()))
        }
        Some(AdmissibleClause::Cm) => {}
    }
    if t.is_zero() {
        return Err(RelationError::DegeneratePoint(0));
    }
    let base_field = t.field().clone();
    let mut lambdas = Vec::with_capacity(spec.n);
    for (k, c) in spec.coords.iter().enumerate() {
        let l = eval_map_field(&c.g, t).map_err(|_| RelationError::DegeneratePoint(k + 1))?;
        if l.is_zero() || l == base_field.one() {
            return Err(RelationError::DegeneratePoint(k + 1));
        }
        lambdas.push(l);
    }
    let fiber_discriminants: Vec<Option<i64>> =
        lambdas.iter().map(|l| fiber_discriminant(l, opts.max_abs_d, work)).collect::<Result<_, _>>()?;
    let carriers: Vec<(usize, i64)> = classes
        .iter()
        .enumerate()
        .filter(|(_, c)| c.kind == CoordKind::SmoothCM)
        .filter_map(|(k, _)| fiber_discriminants[k].map(|d| (k, d)))
        .collect();
    if carriers.is_empty() {
        return Err(RelationError::NonCMFiber);
    }
    let all_cm = fiber_discriminants.iter().all(|d| d.is_some());

    // L_s: K(s) with the CM fields of the carriers at s and at the base point.
    let mut field = base_field.clone();
    for &(k, d) in &carriers {
        let d0 = classes[k].cm_discriminant.expect("smooth CM");
        field = adjoin_sqrt(&adjoin_sqrt(&field, d)?, d0)?;
    }
    let t_l = t.lift(&field)?;

    // Series, radii and the places close to 0.
    let radii_reports: Vec<RadiusReport> =
        family_series(spec, 200)?.iter().map(|s| radius(s, Place::Archimedean)).collect::<Result<_, _>>()?;
    let gms: Vec<_> = (0..spec.n).map(|k| gauss_manin(spec, k)).collect::<Result<_, _>>()?;
    let r_inf = radii_reports.iter().map(|r| r.estimate.to_f64()).fold(f64::INFINITY, f64::min);
    let mut places = Vec::new();
    for e in field.embeddings() {
        match proximity(&t_l, ProximityPlace::Archimedean(e), &radii_reports, work) {
            Ok(true) => places.push(e),
            Ok(false) => {}
            Err(GFunctionError::UndecidableAtPrecision) => {}
            Err(err) => return Err(err.into()),
        }
    }
    if places.is_empty() {
        return Err(RelationError::NoProximatePlace);
    }
    let abs_t = places.iter().map(|&e| t_l.embed(e, work).abs_upper().to_f64()).fold(0.0, f64::max);
    let order = eval_order_for(abs_t, r_inf, work.bits()).max(opts.check_order);
    let ys: Vec<GMatrix> = carriers.iter().map(|&(k, _)| normalized_solution(&gms[k], order)).collect::<Result<_, _>>()?;

    // Variables: the four entries of each carrier.
    let mut variables = Vec::new();
    for &(k, _) in &carriers {
        for i in 0..2 {
            for j in 0..2 {
                variables.push((i + 1, j + 1, k + 1));
            }
        }
    }
    let nv = variables.len();
    let max_tail = 2f64.powf(-(work.bits() as f64) / 4.0).min(1e-30);

    let mut local_factors = Vec::new();
    let mut certificates = Vec::new();
    let mut place_values = Vec::new();
    let mut fact_res = Vec::new();
    for &e in &places {
        let te = t_l.embed(e, work);
        let mut factor: PolyMap = BTreeMap::from([(vec![0u32; nv], field.one())]);
        let mut values = Vec::with_capacity(nv);
        let mut fres = 0.0f64;
        for (ci, &(k, _)) in carriers.iter().enumerate() {
            let g = &gms[k];
            let l0 = g.g.value_at_zero().expect("smooth");
            let p0 = legendre_periods(&ComplexBall::from_rational(&l0, work), work)?;
            let ls = eval_rational_function(&g.g, &te)?;
            let ps = legendre_periods(&ls, work)?;
            let b0 = cm_basis_recognition(&p0.entries, &field, e, work)?;
            let bs = cm_basis_recognition(&ps.entries, &field, e, work)?;
            let yv = eval_gmatrix(&ys[ci], &te, max_tail)?;
            let check = bm_sub(&bm_mul(&yv, &p0.entries), &ps.entries);
            fres = fres.max(check.iter().flatten().map(|b| b.abs_upper().to_f64()).fold(0.0, f64::max));
            for row in &yv {
                values.extend(row.iter().cloned());
            }
            // Z = B_s·X·B₀⁻¹, F = B_{s,b}⁻¹·B_{0,b}.
            let a = &bs.b_dr;
            let b0i = fmat_inv(&b0.b_dr)?;
            let f = fmat_mul(&fmat_inv(&bs.b_b)?, &b0.b_b);
            let base = 4 * ci;
            let z = |i: usize, j: usize| -> PolyMap {
                let mut m = PolyMap::new();
                for p in 0..2 {
                    for q in 0..2 {
                        let c = a[i][p].mul(&b0i[q][j]);
                        if !c.is_zero() {
                            let mut ex = vec![0u32; nv];
                            ex[base + 2 * p + q] = 1;
                            m = poly_add(&m, &BTreeMap::from([(ex, c)]));
                        }
                    }
                }
                m
            };
            let lhs = poly_scale(&poly_mul(&z(0, 0), &z(1, 1)), &f[0][1].mul(&f[1][0]));
            let rhs = poly_scale(&poly_mul(&z(0, 1), &z(1, 0)), &f[0][0].mul(&f[1][1]).neg());
            let r_k = poly_add(&lhs, &rhs);
            if r_k.is_empty() {
                return Err(RelationError::RecognitionFailed("local factor is identically zero".into()));
            }
            factor = poly_mul(&factor, &r_k);
        }
        let lf = RelationPolynomial::from_map(variables.clone(), factor);
        local_factors.push((e, lf));
        place_values.push(values);
        fact_res.push(fres);
    }

    // R_{s,∞} = ∏_v R_{s,v}.
    let mut total: PolyMap = BTreeMap::from([(vec![0u32; nv], field.one())]);
    for (_, lf) in &local_factors {
        total = poly_mul(&total, &lf.map());
    }
    let polynomial = RelationPolynomial::from_map(variables.clone(), total);
    let degree_ok = polynomial.homogeneous && polynomial.degree <= 2 * field.degree();
    for (idx, &e) in places.iter().enumerate() {
        let residual = polynomial.eval_ball(&place_values[idx], e, work).set_prec(prec);
        let local_residual = local_factors[idx].1.eval_ball(&place_values[idx], e, work).set_prec(prec);
        certificates.push(RelationCertificate {
            point: t.clone(),
            place: e,
            residual,
            local_residual,
            factorization_residual: fact_res[idx],
            degree_bound_check: degree_ok,
            field_degree: field.degree(),
        });
    }

    // Conjugation coherence: ι_v = ι_{v₀}∘σ implies R_{s,v} = σ(R_{s,v₀}).
    let (e0, r0) = &local_factors[0];
    let coherent = local_factors.iter().all(|(e, r)| r0.conjugate(Embedding(e.0 ^ e0.0)) == *r);

    // Nontriviality mod x^N.
    let n_chk = opts.check_order;
    let mut sers = Vec::with_capacity(nv);
    for y in &ys {
        for row in &y.entries {
            for s in row {
                sers.push(FieldSeries::from_qseries(&s.truncate(n_chk), &field));
            }
        }
    }
    let subst = polynomial.eval_series(&sers, &field, n_chk);
    let (ord, coeff) = subst.lowest_nonzero().ok_or(RelationError::TrivialRelationProduced(n_chk))?;
    let nontriviality = NontrivialityWitness { order_of_vanishing: ord, coefficient: coeff.clone(), truncation: n_chk };

    Ok(RelationOutcome {
        point: t.clone(),
        base_field,
        field,
        polynomial,
        local_factors,
        certificates,
        nontriviality,
        carriers,
        fiber_discriminants,
        all_cm,
        coherent,
        proximity_radius: r_inf.min(1.0),
    })
}

/// Degree, residual and determinant data of a period matrix, for reporting.
pub fn period_summary(p: &BallMat) -> (ComplexBall, f64) {
    (bm_det(p), bm_max_rad(p))
}

/// `j` of a rational λ with the class-number-one discriminant, when it has one.
pub fn rational_fiber_discriminant(lambda: &Rational) -> Option<i64> {
    j_invariant(lambda).ok().and_then(|j| rational_cm_discriminant(&j))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::picard_fuchs::all_normalized_solutions;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn exact_trivial_relation() {
        let spec = FamilySpec::default_family();
        let ys = all_normalized_solutions(&spec, 50).unwrap();
        let r = trivial_relation_series_check(&ys, 50).unwrap();
        assert_eq!(r.checked, vec![2]);
        assert!(trivial_relation_series_check(&ys, 1).is_ok());
        let bad: Vec<GMatrix> = ys.iter().map(|y| rescaled_basis(y, &q(2, 1))).collect();
        assert!(matches!(trivial_relation_series_check(&bad, 50), Err(RelationError::ResidualNonZero { coordinate: 2, index: 0, .. })));
    }

    #[test]
    fn numeric_trivial_relation() {
        let prec = Precision::new(256).unwrap();
        let p = legendre_periods(&ComplexBall::from_rational(&q(1, 3), prec), prec).unwrap();
        let r = trivial_relation_numeric_check(std::slice::from_ref(&p)).unwrap();
        assert!(r.max_radius < 1e-40);
        assert!(matches!(trivial_relation_numeric_check(&[p.swapped_cycles()]), Err(RelationError::ResidualExcludesZero { .. })));
    }

    #[test]
    fn nullspace_small() {
        let a = vec![vec![q(1, 1), q(2, 1), q(3, 1)], vec![q(2, 1), q(4, 1), q(6, 1)]];
        let k = nullspace(&a, 3);
        assert_eq!(k.len(), 2);
        for v in k {
            assert_eq!(Rational::from(&v[0] + &v[1] * Rational::from(2)) + Rational::from(&v[2] * Rational::from(3)), 0);
        }
        assert_eq!(monomials(3, 2).len(), 10);
    }

    #[test]
    fn closure_of_default_family() {
        let spec = FamilySpec::default_family();
        let r = zariski_closure_report(&spec, 50, 2, 200, 7).unwrap();
        assert_eq!(r.vanishing_dim, 1);
        assert!(r.contains_expected);
        assert_eq!(r.sampled_vanishing, 0);
        assert!(r.check().is_ok());
        let lin = zariski_closure_report(&spec, 50, 1, 50, 7).unwrap();
        assert_eq!(lin.vanishing_dim, 0);
    }

    #[test]
    fn closure_flags_repeated_coordinates() {
        let spec = FamilySpec::new(&["x", "x", "x + 1/2"]).unwrap();
        let r = zariski_closure_report(&spec, 40, 1, 10, 1).unwrap();
        assert_eq!(r.vanishing_dim, 2);
        assert!(matches!(r.check(), Err(RelationError::UnexpectedRelationFound(2))));
    }

    #[test]
    fn cm_basis_at_lambda_half() {
        let prec = Precision::new(512).unwrap();
        let p = legendre_periods(&ComplexBall::from_rational(&q(1, 2), prec), prec).unwrap();
        let k = NumberField::quadratic(-1).unwrap();
        let b = cm_basis_recognition(&p.entries, &k, Embedding(0), prec).unwrap();
        assert_eq!(b.b_dr[1][0], k.from_rational(q(-1, 2)));
        assert_eq!(fmat_det(&b.b_b), k.one());
        assert!(b.off_diagonal < 1e-25);
        let again = cm_basis_recognition(&b.diagonal, &k, Embedding(0), prec).unwrap();
        assert_eq!(again.b_dr, fmat_identity(&k));
        assert_eq!(again.b_b, fmat_identity(&k));
    }

    #[test]
    fn locator_finds_the_d8_fiber() {
        let spec = FamilySpec::default_family();
        let f = locate_cm_fibers(&spec, 0.5, Precision::new(256).unwrap()).unwrap();
        let first = &f[0];
        assert_eq!(first.discriminant, -8);
        let k = NumberField::quadratic(2).unwrap();
        assert_eq!(first.t, k.elem(vec![q(5, 2), q(-2, 1)]).unwrap());
    }

    #[test]
    fn non_cm_point_is_rejected() {
        let spec = FamilySpec::default_family();
        let t = NumberField::rationals().from_rational(q(1, 3));
        let o = RelationOptions { prec: Precision::new(256).unwrap(), ..Default::default() };
        assert!(matches!(build_relation(&spec, &t, o), Err(RelationError::NonCMFiber)));
        let two = FamilySpec::new(&["x", "x/(x-1)"]).unwrap();
        assert!(matches!(build_relation(&two, &t, o), Err(RelationError::NotImplementedCase(_))));
    }
}
