//! Gauss–Manin systems `θ − G_k` of pulled-back Legendre curves and their
//! normalized solutions as exact truncated series.
//!
//! On `v² = u(u−1)(u−λ)` with basis `ω₁ = du/2v`, `ω₂ = u·du/2v` the connection is
//!
//! ```text
//! d/dλ (ω₁, ω₂)ᵀ = M(λ)·(ω₁, ω₂)ᵀ,
//! M(λ) = [[ 1/(2(1−λ)), −1/(2λ(1−λ)) ],
//!         [ 1/(2(1−λ)), −1/(2(1−λ))  ]],
//! ```
//!
//! so along `λ = g(x)` the Euler-operator system is `G(x) = x·g′(x)·M(g(x))`.
//! `tr M = 0`, hence `det Y ≡ 1` for the normalized solution.

use rayon::prelude::*;
use rug::Rational;
use thiserror::Error;

use crate::family::{classify_map, CoordClass, CoordKind, FamilySpec, LimitValue};
use crate::gfunctions::GSeries;
use crate::numerics::{FieldElem, NumericsError, Precision, RationalFunction};
use crate::series::{mat_det, QSeries, SeriesMatrix};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum PicardFuchsError {
    #[error("coordinate index {0} out of range")]
    BadIndex(usize),
    #[error("the pullback is not defined on the working chart: {0}")]
    NotDefinedAtChart(String),
    #[error("recurrence is not covered by the unipotent normal form: {0}")]
    ResonanceUnresolved(String),
    #[error("coordinate {0} is not singular")]
    NotSingular(usize),
    #[error("first-column constants could not be certified: {0}")]
    ConstantsUncertified(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type QMat = [[Rational; 2]; 2];

pub fn qmat_identity() -> QMat {
    [[Rational::from(1), Rational::new()], [Rational::new(), Rational::from(1)]]
}

pub fn qmat_mul(a: &QMat, b: &QMat) -> QMat {
    let e = |i: usize, j: usize| Rational::from(&a[i][0] * &b[0][j]) + Rational::from(&a[i][1] * &b[1][j]);
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

pub fn qmat_det(a: &QMat) -> Rational {
    Rational::from(&a[0][0] * &a[1][1]) - Rational::from(&a[0][1] * &a[1][0])
}

pub fn qmat_inv(a: &QMat) -> Result<QMat, NumericsError> {
    let d = qmat_det(a);
    if d == 0 {
        return Err(NumericsError::DivisionByZero);
    }
    let di = Rational::from(d.recip_ref());
    Ok([
        [Rational::from(&a[1][1] * &di), Rational::from(-Rational::from(&a[0][1] * &di))],
        [Rational::from(-Rational::from(&a[1][0] * &di)), Rational::from(&a[0][0] * &di)],
    ])
}

fn qmat_is_zero(a: &QMat) -> bool {
    a.iter().flatten().all(|c| *c == 0)
}

/// Connection matrix of `∇_θ` for one coordinate, optionally in a basis
/// `ω′ = B·ω` changed by a constant rational matrix `B`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussManinMatrix {
    pub entries: [[RationalFunction; 2]; 2],
    pub coordinate_index: usize,
    pub g: RationalFunction,
    pub class: CoordClass,
    /// de Rham base change applied to the Legendre basis (identity by default).
    pub basis_change: QMat,
}

/// The Legendre connection matrix pulled back along `g`.
pub fn gauss_manin_for_map(g: &RationalFunction, k: usize) -> Result<GaussManinMatrix, PicardFuchsError> {
    let class = classify_map(g);
    if class.limit_lambda == LimitValue::Infinity {
        return Err(PicardFuchsError::NotDefinedAtChart(format!(
            "coordinate {} tends to λ = ∞, where local monodromy is not unipotent",
            k + 1
        )));
    }
    let one = RationalFunction::constant(Rational::from(1));
    let half = Rational::from((1, 2));
    let h = RationalFunction::x().mul(&g.derivative())?;
    let entries = if h.num().is_zero() {
        let z = RationalFunction::constant(Rational::new());
        [[z.clone(), z.clone()], [z.clone(), z]]
    } else {
        let one_minus = one.sub(g)?;
        let a = h.div(&one_minus)?.scale(&half);
        let b = h.div(&g.mul(&one_minus)?)?.scale(&half).neg();
        [[a.clone(), b], [a.clone(), a.neg()]]
    };
    for row in &entries {
        for e in row {
            if e.value_at_zero().is_none() {
                return Err(PicardFuchsError::NotDefinedAtChart(format!("coordinate {} has a pole of G at x = 0", k + 1)));
            }
        }
    }
    Ok(GaussManinMatrix { entries, coordinate_index: k, g: g.clone(), class, basis_change: qmat_identity() })
}

/// Connection matrix of coordinate `k` (0-based) of the family.
pub fn gauss_manin(spec: &FamilySpec, k: usize) -> Result<GaussManinMatrix, PicardFuchsError> {
    let c = spec.coords.get(k).ok_or(PicardFuchsError::BadIndex(k))?;
    gauss_manin_for_map(&c.g, k)
}

impl GaussManinMatrix {
    /// `G(0)`, the residue of the connection at `x = 0`.
    pub fn residue(&self) -> QMat {
        let v = |i: usize, j: usize| self.entries[i][j].value_at_zero().expect("checked at construction");
        [[v(0, 0), v(0, 1)], [v(1, 0), v(1, 1)]]
    }

    pub fn is_singular(&self) -> bool {
        self.class.kind == CoordKind::Singular
    }

    /// The system in the basis `ω′ = B·ω`: `G′ = B·G·B⁻¹`.
    pub fn conjugate_by(&self, b: &QMat) -> Result<GaussManinMatrix, PicardFuchsError> {
        let bi = qmat_inv(b)?;
        let mut out: [[RationalFunction; 2]; 2] = Default::default();
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                let mut acc = RationalFunction::constant(Rational::new());
                for p in 0..2 {
                    for q in 0..2 {
                        let c = Rational::from(&b[i][p] * &bi[q][j]);
                        if c != 0 {
                            acc = acc.add(&self.entries[p][q].scale(&c))?;
                        }
                    }
                }
                *cell = acc;
            }
        }
        Ok(GaussManinMatrix {
            entries: out,
            coordinate_index: self.coordinate_index,
            g: self.g.clone(),
            class: self.class.clone(),
            basis_change: qmat_mul(b, &self.basis_change),
        })
    }

    /// Taylor coefficients `G_m` for `m < len`.
    pub fn series(&self, len: usize) -> Result<[[QSeries; 2]; 2], PicardFuchsError> {
        let s = |i: usize, j: usize| QSeries::from_rational_function(&self.entries[i][j], len);
        Ok([[s(0, 0)?, s(0, 1)?], [s(1, 0)?, s(1, 1)?]])
    }
}

/// Log-monodromy datum `[[1, N_k·log x], [0, 1]]` of a singular coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonodromyFactor {
    pub n_k: Rational,
}

/// Normalized uniform solution `Y = S(x)·x^{G(0)}`, `S(0) = I`, truncated mod `x^N`.
#[derive(Clone, Debug, PartialEq)]
pub struct GMatrix {
    pub entries: SeriesMatrix,
    pub order: usize,
    pub coordinate_index: usize,
    pub residue: QMat,
    pub basis_change: QMat,
}

impl GMatrix {
    /// The unipotent factor, present iff the residue is nonzero.
    pub fn monodromy(&self) -> Option<MonodromyFactor> {
        if qmat_is_zero(&self.residue) {
            return None;
        }
        // A nilpotent [[a, b], [c, −a]] is conjugate by a unipotent lower-triangular
        // matrix to [[0, b], [0, 0]] when b ≠ 0, and otherwise is already [[0, 0], [c, 0]].
        let b = &self.residue[0][1];
        let n = if *b != 0 { b.clone() } else { Rational::from(-&self.residue[1][0]) };
        Some(MonodromyFactor { n_k: n })
    }

    pub fn det(&self) -> QSeries {
        mat_det(&self.entries)
    }

    pub fn entry(&self, i: usize, j: usize) -> &QSeries {
        &self.entries[i][j]
    }
}

fn ad(g0: &QMat, x: &QMat) -> QMat {
    let a = qmat_mul(g0, x);
    let b = qmat_mul(x, g0);
    let e = |i: usize, j: usize| Rational::from(&a[i][j] - &b[i][j]);
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

/// Solves `θS = G·S − S·G(0)` with `S(0) = I` term by term over ℚ.
pub fn normalized_solution(g: &GaussManinMatrix, order: usize) -> Result<GMatrix, PicardFuchsError> {
    let g0 = g.residue();
    let sq = qmat_mul(&g0, &g0);
    if !qmat_is_zero(&sq) {
        return Err(PicardFuchsError::ResonanceUnresolved(format!(
            "residue of coordinate {} is not nilpotent",
            g.coordinate_index + 1
        )));
    }
    let gs = g.series(order)?;
    let gm: Vec<QMat> = (0..order)
        .map(|m| [[gs[0][0].coeff(m).clone(), gs[0][1].coeff(m).clone()], [gs[1][0].coeff(m).clone(), gs[1][1].coeff(m).clone()]])
        .collect();
    let mut s: Vec<QMat> = Vec::with_capacity(order);
    if order > 0 {
        s.push(qmat_identity());
    }
    for n in 1..order {
        let mut r: QMat = Default::default();
        for m in 1..=n {
            if qmat_is_zero(&gm[m]) {
                continue;
            }
            let t = qmat_mul(&gm[m], &s[n - m]);
            for i in 0..2 {
                for j in 0..2 {
                    r[i][j] += &t[i][j];
                }
            }
        }
        // (n − ad)⁻¹ = (1/n)(1 + ad/n + ad²/n²) since ad³ = 0 for nilpotent G(0).
        let ninv = Rational::from((1, n as u64));
        let a1 = ad(&g0, &r);
        let a2 = ad(&g0, &a1);
        let mut sn: QMat = Default::default();
        for i in 0..2 {
            for j in 0..2 {
                let v = Rational::from(&a2[i][j] * &ninv) + &a1[i][j];
                let v = v * &ninv + &r[i][j];
                sn[i][j] = v * &ninv;
            }
        }
        s.push(sn);
    }
    let col = |i: usize, j: usize| QSeries::from_coeffs(s.iter().map(|m| m[i][j].clone()).collect());
    Ok(GMatrix {
        entries: [[col(0, 0), col(0, 1)], [col(1, 0), col(1, 1)]],
        order,
        coordinate_index: g.coordinate_index,
        residue: g0,
        basis_change: g.basis_change.clone(),
    })
}

/// Normalized solutions of every coordinate, computed in parallel.
pub fn all_normalized_solutions(spec: &FamilySpec, order: usize) -> Result<Vec<GMatrix>, PicardFuchsError> {
    (0..spec.n).into_par_iter().map(|k| normalized_solution(&gauss_manin(spec, k)?, order)).collect()
}

/// First `(n, i, j)` where `θS + S·G(0) − G·S` has a nonzero coefficient, if any.
pub fn ode_residual(y: &GMatrix, g: &GaussManinMatrix) -> Result<Option<(usize, usize, usize)>, PicardFuchsError> {
    let n = y.order;
    let gs = g.series(n)?;
    let g0 = &y.residue;
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = y.entries[i][j].theta();
            for p in 0..2 {
                acc = acc.add(&y.entries[i][p].scale(&g0[p][j]));
                acc = acc.sub(&gs[i][p].mul(&y.entries[p][j]));
            }
            if let Some(v) = acc.valuation() {
                return Ok(Some((v, i, j)));
            }
        }
    }
    Ok(None)
}

/// First column `d·(y₁₁, y₂₁) + d′·(y₁₂, y₂₂)` of a singular coordinate in the
/// vanishing-cycle frame, with exactly recognized constants.
#[derive(Clone, Debug)]
pub struct FirstColumn {
    pub column: [GSeries; 2],
    pub d: FieldElem,
    pub d_prime: FieldElem,
}

/// Builds the first column of a singular coordinate. The constants `d, d′` are
/// obtained by matching against AGM periods (see [`crate::periods::first_column_constants`]).
pub fn singular_first_column(g: &GaussManinMatrix, order: usize, prec: Precision) -> Result<FirstColumn, PicardFuchsError> {
    if !g.is_singular() {
        return Err(PicardFuchsError::NotSingular(g.coordinate_index + 1));
    }
    let work = order.max(60);
    let y = normalized_solution(g, work)?;
    let (d, d_prime) = crate::periods::first_column_constants(g, &y, prec)
        .map_err(|e| PicardFuchsError::ConstantsUncertified(e.to_string()))?;
    if !d_prime.is_zero() {
        return Err(PicardFuchsError::ConstantsUncertified("d′ ≠ 0: first column is not log-free in this frame".into()));
    }
    let k = g.coordinate_index;
    let trunc = |i: usize| y.entries[i][0].truncate(order.max(1));
    let col = |i: usize| {
        let mut s = GSeries::new((i + 1, 1, k + 1), d.clone(), trunc(i).coeffs().to_vec());
        if order == 0 {
            s = s.truncated(1);
        }
        s
    };
    Ok(FirstColumn { column: [col(0), col(1)], d, d_prime })
}

/// Checks `det Y − 1 ≡ 0 mod x^N`; returns the first nonzero residual index.
pub fn det_residual(y: &GMatrix) -> Option<usize> {
    let d = y.det();
    let one = QSeries::one(d.len());
    d.sub(&one).valuation()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::Integer;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    fn gm(src: &str) -> GaussManinMatrix {
        gauss_manin_for_map(&RationalFunction::parse(src).unwrap(), 0).unwrap()
    }

    #[test]
    fn residues() {
        let g = gm("x").residue();
        assert_eq!(g, [[q(0, 1), q(-1, 2)], [q(0, 1), q(0, 1)]]);
        assert!(qmat_is_zero(&qmat_mul(&g, &g)));
        assert!(qmat_is_zero(&gm("x + 1/2").residue()));
        assert!(qmat_is_zero(&gm("x + 1/3").residue()));
        let at_one = gm("1 - x").residue();
        assert!(qmat_is_zero(&qmat_mul(&at_one, &at_one)) && !qmat_is_zero(&at_one));
        assert!(gauss_manin_for_map(&RationalFunction::parse("1/x").unwrap(), 0).is_err());
    }

    #[test]
    fn legendre_central_binomial_squares() {
        let y = normalized_solution(&gm("x"), 30).unwrap();
        for n in 0..30u32 {
            let c = Integer::from(Integer::binomial_u(2 * n, n)) ;
            let a = Rational::from((c, Integer::from(Integer::u_pow_u(4, n))));
            assert_eq!(*y.entry(0, 0).coeff(n as usize), Rational::from(a.square_ref()));
        }
        assert_eq!(y.entry(0, 0).coeffs()[..3], [q(1, 1), q(1, 4), q(9, 64)]);
    }

    #[test]
    fn exact_ode_and_determinant() {
        for src in ["x", "x + 1/2", "x + 1/3", "1 - x", "(x+1)/2 - x^2"] {
            let g = gm(src);
            let y = normalized_solution(&g, 50).unwrap();
            assert_eq!(ode_residual(&y, &g).unwrap(), None, "{src}");
            assert_eq!(det_residual(&y), None, "{src}");
        }
    }

    #[test]
    fn conjugated_basis_keeps_determinant() {
        let b = [[q(1, 1), q(0, 1)], [q(-1, 2), q(1, 1)]];
        let g = gm("x + 1/2").conjugate_by(&b).unwrap();
        let y = normalized_solution(&g, 40).unwrap();
        assert_eq!(ode_residual(&y, &g).unwrap(), None);
        assert_eq!(det_residual(&y), None);
    }

    #[test]
    fn monodromy_factor_of_node() {
        let y = normalized_solution(&gm("x"), 10).unwrap();
        assert_eq!(y.monodromy().unwrap().n_k, q(-1, 2));
        assert!(normalized_solution(&gm("x + 1/2"), 10).unwrap().monodromy().is_none());
    }
}
