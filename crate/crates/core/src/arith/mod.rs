//! Exact arithmetic: arbitrary-precision integers, the field `F_{q^2}` as an
//! explicit degree-2e extension of `F_p`, and dense polynomials over it with
//! deterministic factorization.

pub mod factor;
pub mod field;
pub mod intfactor;
pub mod poly;

pub use factor::{poly_factor, PolyFactorization};
pub use field::{field_pow, find_multiplicative_generator, ExtFieldElement, FieldParams};
pub use poly::{poly_divmod, poly_gcd, Poly};
