//! Discrete logarithms in subfields of residue class rings.
//!
//! Given a prime power `p^n`, the library embeds `F_{p^n}` into `F_{q^{2m}}`
//! represented as `F_{q^2}[x]/g(x)` for an irreducible factor `g` of a
//! specially selected `h(x) = h_1(x) x^q - h_0(x)`, generates multiplicative
//! relations that hold in the residue class ring `F_{q^2}[x]/h(x)`, and
//! extracts discrete logarithms from them with linear algebra that works
//! modulo a composite group order of unknown factorization.
//!
//! Pipeline stages, each with its own module:
//!
//! - [`arith`] -- exact arithmetic: `F_{q^2}` as an explicit extension of
//!   `F_p`, dense polynomials over it, deterministic factorization.
//! - [`ringstruct`] -- structure of `F[x]/h(x)`: unit group orders by CRT,
//!   smooth/non-smooth order splitting, cyclicity obstruction checks.
//! - [`polyselect`] -- embedding parameters and the C-good search for
//!   `h(x) = h_1 x^q - h_0`, plus the Kummer special case.
//! - [`relgen`] -- relation generation from Moebius substitutions into
//!   `x^q - x`, for the factorbase and for descent steps.
//! - [`modlinalg`] -- rank mod `l`, recursive elimination with modulus
//!   splitting, integer Smith normal form, dlog extraction.
//! - [`descent`] -- recursive rewriting of a target as a factorbase product,
//!   salvaging relations that involve factors of `h`.
//! - [`dlp`] -- Pohlig-Hellman on the smooth component, CRT combination,
//!   generator construction, and the brute-force oracle.
//! - [`fileio`] -- the line-oriented artifact formats shared with the CLI.

pub mod arith;
pub mod descent;
pub mod dlp;
pub mod error;
pub mod fileio;
pub mod modlinalg;
pub mod polyselect;
pub mod relgen;
pub mod ringstruct;

pub use error::{Error, Result};
