use num_bigint::BigUint;

/// Errors surfaced by the pipeline, labelled by the condition that failed so
/// callers can map them onto diagnostics and exit codes.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("zero base with negative exponent")]
    ZeroToNegativePower,

    #[error("polynomial division by zero")]
    PolyDivisionByZero,

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("gcd of both-zero polynomials is undefined")]
    GcdOfZeros,

    #[error("element is not a unit modulo {modulus}")]
    NonUnit { modulus: String },

    #[error("g does not divide h")]
    GDoesNotDivideH,

    #[error("no C-good candidate with C={c}, D={d} ({tried} candidates tried)")]
    FailureExhausted { c: u32, d: u32, tried: usize },

    #[error("no pivot usable modulo {modulus}: rank below required (witness factor {modulus})")]
    RankDeficient { modulus: BigUint },

    #[error("all columns pivoted modulo {modulus}: quotient trivial, no generator column")]
    NoGeneratorColumn { modulus: BigUint },

    #[error("modulus {l} does not divide the largest invariant factor {d_last}")]
    SnfDivisibility { l: BigUint, d_last: BigUint },

    #[error("no proper modulus split: gcd(r, L) trivial or support-complete")]
    NoProperSplit,

    #[error("descent rank deficient modulo factor {modulus} (V-column {column} not eliminable)")]
    DescentRankDeficient { modulus: BigUint, column: usize },

    #[error("no relations found in the substitution sweep for P = {p}")]
    NoRelations { p: String },

    #[error("descent attempts exhausted for {p} after {attempts} tries")]
    DescentExhausted { p: String, attempts: usize },

    #[error("randomization attempts exhausted (bound {bound})")]
    RandomizeExhausted { bound: usize },

    #[error("group order {order} exceeds the brute-force cap {cap}")]
    OracleCapExceeded { order: BigUint, cap: u64 },

    #[error("target is outside the subgroup generated by the base")]
    NotInSubgroup,

    #[error("target is not a unit modulo g")]
    TargetNotUnit,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("selection conditions violated: {0}")]
    Obstruction(String),
}

pub type Result<T> = std::result::Result<T, Error>;
