//! Exact construction and verification of Saito matrices for the divisors
//! F = x^(d−α) F1 + y^(v+α+1) F2 + x^β y^(d−β−1) z in three variables.

pub mod export;
pub mod family;
pub mod field;
pub mod linalg;
pub mod oracle;
pub mod parser;
pub mod pipeline;
pub mod poly;
pub mod saito;

pub use field::{Field, FieldError, Scalar};
pub use parser::{parse_poly, ParseError};
pub use poly::{Monomial, Poly, PolyError, Var};
