//! Exact and ball arithmetic shared by the rest of the crate.

pub mod ball;
pub mod field;
pub mod lll;
pub mod poly;
pub mod recognize;
pub mod roots;

pub use ball::{ComplexBall, Precision};
pub use field::{Embedding, FieldElem, NumberField, QuadFieldElem};
pub use poly::{QPoly, RationalFunction};
pub use recognize::{recognize_algebraic, recognize_in_embedding, Recognition};
pub use rug::{Integer, Rational};

use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum NumericsError {
    #[error("precision {0} bits is below the 64-bit minimum")]
    PrecisionTooLow(u32),
    #[error("divisor ball contains zero")]
    DivisorContainsZero,
    #[error("ball straddles the branch cut along the negative reals")]
    BranchCutStraddle,
    #[error("division by exact zero")]
    DivisionByZero,
    #[error("pole at x = 0")]
    PoleAtZero,
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("no algebraic candidate within tolerance; raise precision")]
    NotFound,
    #[error("several candidates within tolerance; precision too low")]
    AmbiguousCandidate,
    #[error("parse error: {0}")]
    Parse(String),
}
