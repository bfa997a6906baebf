//! Families of products of Legendre curves over a curve with a marked point,
//! given by λ-coordinates `g_k(x) ∈ ℚ(x)` in a local parameter `x`.

use std::fmt;
use std::path::Path;

use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{ComplexBall, NumericsError, Precision, RationalFunction};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum FamilyError {
    #[error("invalid family: {0}")]
    Invalid(String),
    #[error("could not read family file: {0}")]
    Io(String),
    #[error("pole of the j-map at the input")]
    PoleAtInput,
    #[error("numeric j-invariant matches no tabulated singular modulus")]
    CMDetectionInconclusive,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Class-number-one orders and their rational singular moduli.
pub const RATIONAL_SINGULAR_MODULI: [(i64, i64); 13] = [
    (-3, 0),
    (-4, 1728),
    (-7, -3375),
    (-8, 8000),
    (-11, -32768),
    (-12, 54000),
    (-16, 287496),
    (-19, -884736),
    (-27, -12288000),
    (-28, 16581375),
    (-43, -884736000),
    (-67, -147197952000),
    (-163, -262537412640768000),
];

/// A λ-coordinate map `x ↦ g(x)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMap {
    pub source: String,
    pub g: RationalFunction,
}

impl RationalMap {
    pub fn parse(src: &str) -> Result<Self, FamilyError> {
        let g = RationalFunction::parse(src)?;
        Ok(RationalMap { source: src.trim().to_string(), g })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilySpec {
    pub n: usize,
    pub coords: Vec<RationalMap>,
    pub base_field_label: String,
}

#[derive(Deserialize, Serialize)]
struct FamilyFile {
    n: usize,
    coords: Vec<CoordEntry>,
    #[serde(default)]
    base_field: Option<String>,
}

#[derive(Deserialize, Serialize)]
struct CoordEntry {
    g: String,
}

impl FamilySpec {
    pub fn new(coords: &[&str]) -> Result<Self, FamilyError> {
        let coords = coords.iter().map(|s| RationalMap::parse(s)).collect::<Result<Vec<_>, _>>()?;
        let spec = FamilySpec { n: coords.len(), coords, base_field_label: "Q".into() };
        spec.validate()?;
        Ok(spec)
    }

    /// `g₁ = x` (singular at 0) and `g₂ = x + 1/2` (CM at 0, D = −4).
    pub fn default_family() -> Self {
        Self::new(&["x", "x + 1/2"]).expect("valid default family")
    }

    pub fn from_json_str(s: &str) -> Result<Self, FamilyError> {
        let f: FamilyFile = serde_json::from_str(s).map_err(|e| FamilyError::Invalid(e.to_string()))?;
        let coords = f.coords.iter().map(|c| RationalMap::parse(&c.g)).collect::<Result<Vec<_>, _>>()?;
        if coords.len() != f.n {
            return Err(FamilyError::Invalid(format!("n = {} but {} coordinates given", f.n, coords.len())));
        }
        let spec = FamilySpec { n: f.n, coords, base_field_label: f.base_field.unwrap_or_else(|| "Q".into()) };
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self, FamilyError> {
        let s = std::fs::read_to_string(path).map_err(|e| FamilyError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&s)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "coords": self.coords.iter().map(|c| serde_json::json!({ "g": c.source })).collect::<Vec<_>>(),
        })
    }

    fn validate(&self) -> Result<(), FamilyError> {
        if self.n == 0 || self.coords.len() != self.n {
            return Err(FamilyError::Invalid("a family needs n ≥ 1 coordinates".into()));
        }
        for (k, c) in self.coords.iter().enumerate() {
            if c.g.is_constant() {
                let v = c.g.value_at_zero();
                if v == Some(Rational::new()) || v == Some(Rational::from(1)) {
                    return Err(FamilyError::Invalid(format!("coordinate {} is identically 0 or 1", k + 1)));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CoordKind {
    Smooth,
    SmoothCM,
    Singular,
}

/// Value of `g_k(0)`, possibly infinite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LimitValue {
    Finite(Rational),
    Infinity,
}

impl fmt::Display for LimitValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LimitValue::Finite(q) => write!(f, "{q}"),
            LimitValue::Infinity => write!(f, "inf"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoordClass {
    pub kind: CoordKind,
    pub cm_discriminant: Option<i64>,
    pub limit_lambda: LimitValue,
    /// j-invariant of the limit fiber, when finite.
    pub j_limit: Option<Rational>,
}

/// `j(λ) = 256(λ² − λ + 1)³ / (λ²(1 − λ)²)`.
pub fn j_invariant(lambda: &Rational) -> Result<Rational, FamilyError> {
    if *lambda == 0 || *lambda == 1 {
        return Err(FamilyError::PoleAtInput);
    }
    let l2 = Rational::from(lambda.square_ref());
    let num = Rational::from(&l2 - lambda) + 1u32;
    let num = Rational::from(&num * &num) * &num * 256u32;
    let one_minus = Rational::from(1 - lambda.clone());
    let den = l2 * Rational::from(one_minus.square_ref());
    Ok(num / den)
}

/// Ball version of [`j_invariant`].
pub fn j_invariant_ball(lambda: &ComplexBall) -> Result<ComplexBall, FamilyError> {
    let prec = lambda.precision();
    let one = ComplexBall::one(prec);
    let l2 = lambda.sqr();
    let num = l2.sub(lambda).add(&one).pow_u(3).mul_i64(256);
    let den = l2.mul(&one.sub(lambda).sqr());
    num.div(&den).map_err(|_| FamilyError::PoleAtInput)
}

/// Discriminant of the class-number-one order with the given rational j, if any.
pub fn rational_cm_discriminant(j: &Rational) -> Option<i64> {
    if *j.denom() != 1 {
        return None;
    }
    RATIONAL_SINGULAR_MODULI.iter().find(|(_, v)| Integer::from(*v) == *j.numer()).map(|(d, _)| *d)
}

/// Classifies each coordinate at `x = 0`. Limits of rational maps are rational,
/// so CM detection is exact: a rational j is singular iff it is one of the
/// thirteen class-number-one values. The precision argument is accepted for
/// interface symmetry with ball inputs and does not affect the result.
pub fn classify_coordinates(spec: &FamilySpec, _prec: Precision) -> Vec<CoordClass> {
    spec.coords.iter().map(|c| classify_map(&c.g)).collect()
}

pub fn classify_map(g: &RationalFunction) -> CoordClass {
    match g.value_at_zero() {
        None => CoordClass { kind: CoordKind::Singular, cm_discriminant: None, limit_lambda: LimitValue::Infinity, j_limit: None },
        Some(l) if l == 0 || l == 1 => CoordClass { kind: CoordKind::Singular, cm_discriminant: None, limit_lambda: LimitValue::Finite(l), j_limit: None },
        Some(l) => {
            let j = j_invariant(&l).expect("λ ∉ {0, 1}");
            let d = rational_cm_discriminant(&j);
            CoordClass {
                kind: if d.is_some() { CoordKind::SmoothCM } else { CoordKind::Smooth },
                cm_discriminant: d,
                limit_lambda: LimitValue::Finite(l),
                j_limit: Some(j),
            }
        }
    }
}

/// Which clause of G_AO-admissibility holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AdmissibleClause {
    Cm,
    TwoSingular,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Admissibility {
    pub admissible: bool,
    pub clause: Option<AdmissibleClause>,
    pub reason: String,
}

pub fn is_gao_admissible(classes: &[CoordClass]) -> Admissibility {
    let cm = classes.iter().filter(|c| c.kind == CoordKind::SmoothCM).count();
    let sing = classes.iter().filter(|c| c.kind == CoordKind::Singular).count();
    if cm >= 1 {
        Admissibility { admissible: true, clause: Some(AdmissibleClause::Cm), reason: format!("CM clause: {cm} CM coordinate(s)") }
    } else if sing >= 2 {
        Admissibility {
            admissible: true,
            clause: Some(AdmissibleClause::TwoSingular),
            reason: format!("two singular clause: {sing} singular coordinates"),
        }
    } else {
        Admissibility { admissible: false, clause: None, reason: format!("no CM coordinate and only {sing} singular coordinate(s)") }
    }
}
