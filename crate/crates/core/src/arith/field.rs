//! The coefficient field `F_{q^2}`, represented directly as one extension of
//! degree 2e over the prime field `F_p` (no tower). The defining modulus is
//! the smallest monic irreducible of degree 2e in lexicographic coefficient
//! order, so two runs always agree on the representation.

use crate::arith::intfactor;
use crate::error::{Error, Result};
use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, ToPrimitive, Zero};
use std::fmt;
use std::sync::Arc;

/// Parameters of `F_{q^2}` with `q = p^e`.
///
/// Residues are kept in machine words; group orders and exponents, which do
/// overflow words at desk scale, live in `BigUint` throughout.
#[derive(Debug)]
pub struct FieldParams {
    /// Characteristic, prime (checked by trial division).
    pub p: u64,
    /// Extension exponent: q = p^e.
    pub e: u32,
    /// Cached q = p^e.
    pub q: u64,
    /// Monic irreducible of degree 2e over F_p, little-endian, length 2e+1.
    pub modulus_poly: Vec<u64>,
}

pub type Field = Arc<FieldParams>;

impl FieldParams {
    /// Builds `F_{q^2}` for `q = p^e`, selecting the defining polynomial
    /// deterministically.
    pub fn new(p: u64, e: u32) -> Result<Field> {
        if !intfactor::is_prime_u64(p) {
            return Err(Error::NotPrime(p));
        }
        let q = p.checked_pow(e).expect("q fits u64 at desk scale");
        assert!(q <= 1 << 20, "desk scale: q = p^e must stay below 2^20");
        let degree = 2 * e as usize;
        let modulus_poly = smallest_irreducible(p, degree);
        Ok(Arc::new(FieldParams {
            p,
            e,
            q,
            modulus_poly,
        }))
    }

    /// Degree of the extension over F_p (always 2e).
    pub fn degree(&self) -> usize {
        2 * self.e as usize
    }

    /// q^2 = |F_{q^2}|.
    pub fn q2(&self) -> u64 {
        self.q * self.q
    }

    /// Multiplicative group order q^2 - 1.
    pub fn unit_order(&self) -> u64 {
        self.q2() - 1
    }

    pub fn zero(self: &Field) -> ExtFieldElement {
        ExtFieldElement {
            coeffs: vec![0; self.degree()],
            field: self.clone(),
        }
    }

    pub fn one(self: &Field) -> ExtFieldElement {
        self.from_prime(1)
    }

    /// Embeds a prime-field residue.
    pub fn from_prime(self: &Field, c: u64) -> ExtFieldElement {
        let mut coeffs = vec![0; self.degree()];
        coeffs[0] = c % self.p;
        ExtFieldElement {
            coeffs,
            field: self.clone(),
        }
    }

    /// Element from little-endian coefficients over F_p (length <= 2e).
    pub fn element(self: &Field, coeffs: &[u64]) -> ExtFieldElement {
        assert!(coeffs.len() <= self.degree());
        let mut full = vec![0; self.degree()];
        for (i, &c) in coeffs.iter().enumerate() {
            full[i] = c % self.p;
        }
        ExtFieldElement {
            coeffs: full,
            field: self.clone(),
        }
    }

    /// The element of enumeration rank `idx` in coefficient-lexicographic
    /// order, with the constant coefficient most significant.
    pub fn element_by_rank(self: &Field, idx: u64) -> ExtFieldElement {
        let n = self.degree();
        let mut coeffs = vec![0u64; n];
        let mut r = idx;
        for i in (0..n).rev() {
            coeffs[i] = r % self.p;
            r /= self.p;
        }
        assert!(r == 0, "rank out of range");
        ExtFieldElement {
            coeffs,
            field: self.clone(),
        }
    }

    /// All q^2 elements in canonical enumeration order.
    pub fn all_elements(self: &Field) -> Vec<ExtFieldElement> {
        (0..self.q2()).map(|i| self.element_by_rank(i)).collect()
    }

    /// The subfield F_q inside F_{q^2}: fixed points of z -> z^q.
    pub fn subfield_q(self: &Field) -> Vec<ExtFieldElement> {
        self.all_elements()
            .into_iter()
            .filter(|z| &z.frobenius_q() == z)
            .collect()
    }
}

/// Element of `F_{q^2}`: exactly 2e residues mod p, little-endian by degree.
#[derive(Clone)]
pub struct ExtFieldElement {
    coeffs: Vec<u64>,
    field: Field,
}

impl PartialEq for ExtFieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}
impl Eq for ExtFieldElement {}

impl PartialOrd for ExtFieldElement {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for ExtFieldElement {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.coeffs.cmp(&other.coeffs)
    }
}
impl std::hash::Hash for ExtFieldElement {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.coeffs.hash(state);
    }
}

impl fmt::Debug for ExtFieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for ExtFieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

impl ExtFieldElement {
    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0] == 1 && self.coeffs[1..].iter().all(|&c| c == 0)
    }

    /// Enumeration rank; inverse of `element_by_rank`.
    pub fn rank(&self) -> u64 {
        let mut r = 0u64;
        for &c in &self.coeffs {
            r = r * self.field.p + c;
        }
        r
    }

    pub fn add(&self, other: &Self) -> Self {
        let p = self.field.p;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a + b) % p)
            .collect();
        Self {
            coeffs,
            field: self.field.clone(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let p = self.field.p;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a + p - b) % p)
            .collect();
        Self {
            coeffs,
            field: self.field.clone(),
        }
    }

    pub fn neg(&self) -> Self {
        let p = self.field.p;
        let coeffs = self.coeffs.iter().map(|a| (p - a) % p).collect();
        Self {
            coeffs,
            field: self.field.clone(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let p = self.field.p;
        let n = self.field.degree();
        let mut prod = vec![0u64; 2 * n - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                prod[i + j] = ((prod[i + j] as u128 + a as u128 * b as u128) % p as u128) as u64;
            }
        }
        pf_reduce(&mut prod, &self.field.modulus_poly, p);
        prod.truncate(n);
        prod.resize(n, 0);
        Self {
            coeffs: prod,
            field: self.field.clone(),
        }
    }

    pub fn scale(&self, c: u64) -> Self {
        let p = self.field.p;
        let c = c % p;
        let coeffs = self
            .coeffs
            .iter()
            .map(|a| ((*a as u128 * c as u128) % p as u128) as u64)
            .collect();
        Self {
            coeffs,
            field: self.field.clone(),
        }
    }

    /// a^k for machine-word k >= 0.
    pub fn pow_u64(&self, mut k: u64) -> Self {
        let mut base = self.clone();
        let mut acc = self.field.one();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        Some(self.pow_u64(self.field.unit_order() - 1))
    }

    /// Frobenius over the subfield: a^q. Linear over F_q, which the descent
    /// machinery relies on.
    pub fn frobenius_q(&self) -> Self {
        self.pow_u64(self.field.q)
    }

    /// Exact multiplicative order (desk scale; factors q^2 - 1).
    pub fn multiplicative_order(&self) -> Option<u64> {
        if self.is_zero() {
            return None;
        }
        let full = self.field.unit_order();
        let mut ord = full;
        for (prime, _) in intfactor::factorize(&BigUint::from(full)) {
            let prime = prime.to_u64().expect("desk scale");
            while ord.is_multiple_of(prime) && self.pow_u64(ord / prime).is_one() {
                ord /= prime;
            }
        }
        Some(ord)
    }
}

/// a^k with an arbitrary-precision, possibly negative exponent.
///
/// Negative exponents invert first, so a zero base with k < 0 is an error;
/// a^0 = 1 for any nonzero a, and 0^k = 0 for k > 0.
pub fn field_pow(a: &ExtFieldElement, k: &BigInt) -> Result<ExtFieldElement> {
    let field = a.field().clone();
    if a.is_zero() {
        return match k.sign() {
            Sign::Minus => Err(Error::ZeroToNegativePower),
            Sign::NoSign => Ok(field.one()),
            Sign::Plus => Ok(field.zero()),
        };
    }
    // Lagrange: reduce the exponent modulo q^2 - 1.
    let order = BigInt::from(field.unit_order());
    let k = ((k % &order) + &order) % &order;
    Ok(a.pow_u64(k.to_u64().expect("reduced exponent fits")))
}

/// The canonical generator of `F_{q^2}^x`: the smallest element in
/// coefficient-lexicographic order whose multiplicative order is q^2 - 1.
pub fn find_multiplicative_generator(field: &Field) -> ExtFieldElement {
    let order = field.unit_order();
    let primes: Vec<u64> = intfactor::factorize(&BigUint::from(order))
        .into_keys()
        .map(|p| p.to_u64().expect("desk scale"))
        .collect();
    for idx in 1..field.q2() {
        let cand = field.element_by_rank(idx);
        if primes.iter().all(|&r| !cand.pow_u64(order / r).is_one()) {
            return cand;
        }
    }
    unreachable!("F_{{q^2}}^x is cyclic, a generator exists");
}

/// Discrete-log table for constants: element rank -> k with lambda^k = element.
/// Size q^2 - 1; fine at desk scale.
pub fn lambda_dlog_table(lambda: &ExtFieldElement) -> std::collections::HashMap<u64, u64> {
    let mut table = std::collections::HashMap::new();
    let mut acc = lambda.field().one();
    let order = lambda.field().unit_order();
    for k in 0..order {
        table.insert(acc.rank(), k);
        acc = acc.mul(lambda);
    }
    table
}

// ---------------------------------------------------------------------------
// Polynomials over the prime field F_p, used only to construct the defining
// modulus of F_{q^2}. Little-endian u64 coefficient vectors.
// ---------------------------------------------------------------------------

fn pf_trim(f: &mut Vec<u64>) {
    while f.last() == Some(&0) {
        f.pop();
    }
}

fn pf_reduce(f: &mut Vec<u64>, modulus: &[u64], p: u64) {
    let m = modulus.len() - 1;
    while f.len() > m {
        let lead = *f.last().unwrap();
        let k = f.len() - 1 - m;
        if lead != 0 {
            // modulus is monic: subtract lead * modulus * x^k
            for (i, &mc) in modulus.iter().enumerate() {
                let sub = (lead as u128 * mc as u128 % p as u128) as u64;
                f[k + i] = (f[k + i] + p - sub) % p;
            }
        }
        f.pop();
    }
}

fn pf_mulmod(a: &[u64], b: &[u64], modulus: &[u64], p: u64) -> Vec<u64> {
    let mut prod = vec![0u64; a.len() + b.len()];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = ((prod[i + j] as u128 + x as u128 * y as u128) % p as u128) as u64;
        }
    }
    pf_reduce(&mut prod, modulus, p);
    pf_trim(&mut prod);
    prod
}

fn pf_powmod(base: &[u64], mut k: BigUint, modulus: &[u64], p: u64) -> Vec<u64> {
    let mut b = base.to_vec();
    pf_trim(&mut b);
    let mut acc = vec![1u64];
    let two = BigUint::from(2u32);
    while !k.is_zero() {
        if (&k % &two).is_one() {
            acc = pf_mulmod(&acc, &b, modulus, p);
        }
        b = pf_mulmod(&b, &b, modulus, p);
        k >>= 1;
    }
    acc
}

fn pf_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    pf_trim(&mut a);
    pf_trim(&mut b);
    while !b.is_empty() {
        // a mod b
        let lead_inv = mod_inv_u64(*b.last().unwrap(), p);
        while a.len() >= b.len() && !a.is_empty() {
            let coef = (*a.last().unwrap() as u128 * lead_inv as u128 % p as u128) as u64;
            let k = a.len() - b.len();
            for (i, &bc) in b.iter().enumerate() {
                let sub = (coef as u128 * bc as u128 % p as u128) as u64;
                a[k + i] = (a[k + i] + p - sub) % p;
            }
            pf_trim(&mut a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    a
}

fn mod_inv_u64(a: u64, p: u64) -> u64 {
    // Fermat; p prime and a != 0 mod p.
    let mut acc = 1u64;
    let mut base = a % p;
    let mut k = p - 2;
    while k > 0 {
        if k & 1 == 1 {
            acc = (acc as u128 * base as u128 % p as u128) as u64;
        }
        base = (base as u128 * base as u128 % p as u128) as u64;
        k >>= 1;
    }
    acc
}

fn pf_is_irreducible(f: &[u64], p: u64) -> bool {
    let n = f.len() - 1;
    if n == 0 {
        return false;
    }
    let x = vec![0u64, 1];
    // x^{p^n} == x mod f
    let xpn = pf_powmod(&x, BigUint::from(p).pow(n as u32), f, p);
    let mut diff = xpn.clone();
    diff.resize(diff.len().max(2), 0);
    diff[1] = (diff[1] + p - 1) % p;
    pf_trim(&mut diff);
    if !diff.is_empty() {
        return false;
    }
    // gcd(x^{p^{n/r}} - x, f) = 1 for every prime r | n
    for r in intfactor::factorize(&BigUint::from(n as u64)).keys() {
        let r = r.to_u64().unwrap() as usize;
        let xp = pf_powmod(&x, BigUint::from(p).pow((n / r) as u32), f, p);
        let mut d = xp;
        d.resize(d.len().max(2), 0);
        d[1] = (d[1] + p - 1) % p;
        pf_trim(&mut d);
        let g = pf_gcd(&d, f, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

fn smallest_irreducible(p: u64, degree: usize) -> Vec<u64> {
    let total = (p as u128).pow(degree as u32);
    for rank in 0..total {
        let mut coeffs = vec![0u64; degree + 1];
        coeffs[degree] = 1;
        let mut r = rank;
        for i in (0..degree).rev() {
            coeffs[i] = (r % p as u128) as u64;
            r /= p as u128;
        }
        if pf_is_irreducible(&coeffs, p) {
            return coeffs;
        }
    }
    unreachable!("irreducibles of every degree exist over F_p");
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn f9() -> Field {
        FieldParams::new(3, 1).unwrap()
    }

    #[test]
    fn modulus_is_smallest_lex() {
        // F_9 = F_3[y]/(y^2 + 1)
        assert_eq!(f9().modulus_poly, vec![1, 0, 1]);
        // F_4 = F_2[y]/(y^2 + y + 1)
        let f4 = FieldParams::new(2, 1).unwrap();
        assert_eq!(f4.modulus_poly, vec![1, 1, 1]);
        // F_16 = F_2[y]/(y^4 + y^3 + 1)
        let f16 = FieldParams::new(2, 2).unwrap();
        assert_eq!(f16.modulus_poly, vec![1, 0, 0, 1, 1]);
    }

    #[test]
    fn rejects_composite_characteristic() {
        assert!(matches!(FieldParams::new(6, 1), Err(Error::NotPrime(6))));
    }

    #[test]
    fn pow_empty_product_is_one() {
        let f = f9();
        for idx in 1..f.q2() {
            let a = f.element_by_rank(idx);
            assert!(field_pow(&a, &BigInt::zero()).unwrap().is_one());
        }
    }

    #[test]
    fn square_of_y_plus_one_in_f9() {
        // (y+1)^2 = 2y, using y^2 = -1.
        let f = f9();
        let a = f.element(&[1, 1]);
        let sq = field_pow(&a, &BigInt::from(2)).unwrap();
        assert_eq!(sq, f.element(&[0, 2]));
    }

    #[test]
    fn lagrange_on_random_elements() {
        let f = FieldParams::new(2, 2).unwrap(); // F_256 ambient of q=4
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let order = BigInt::from(f.unit_order());
        for _ in 0..20 {
            let idx = rng.gen_range(1..f.q2());
            let a = f.element_by_rank(idx);
            assert!(field_pow(&a, &order).unwrap().is_one());
        }
    }

    #[test]
    fn zero_to_negative_power_is_error() {
        let f = f9();
        assert!(matches!(
            field_pow(&f.zero(), &BigInt::from(-1)),
            Err(Error::ZeroToNegativePower)
        ));
    }

    #[test]
    fn generator_of_f9_is_y_plus_one() {
        let f = f9();
        let lam = find_multiplicative_generator(&f);
        assert_eq!(lam, f.element(&[1, 1]));
        assert_eq!(lam.multiplicative_order(), Some(8));
        // enumerate powers: all eight units hit exactly once
        let mut seen = std::collections::HashSet::new();
        let mut acc = f.one();
        for _ in 0..8 {
            acc = acc.mul(&lam);
            seen.insert(acc.rank());
        }
        assert_eq!(seen.len(), 8);
    }

    #[test]
    fn generator_of_f4_lies_outside_f2() {
        let f = FieldParams::new(2, 1).unwrap();
        let lam = find_multiplicative_generator(&f);
        assert_eq!(lam.multiplicative_order(), Some(3));
        assert!(lam.coeffs()[1] != 0);
    }

    #[test]
    fn generator_of_f25_has_order_24() {
        let f = FieldParams::new(5, 1).unwrap();
        let lam = find_multiplicative_generator(&f);
        for ell in [2u64, 3] {
            assert!(!lam.pow_u64(24 / ell).is_one());
        }
        assert!(lam.pow_u64(24).is_one());
    }

    #[test]
    fn ring_axioms_on_random_triples() {
        let f = FieldParams::new(3, 1).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let a = f.element_by_rank(rng.gen_range(0..f.q2()));
            let b = f.element_by_rank(rng.gen_range(0..f.q2()));
            let c = f.element_by_rank(rng.gen_range(0..f.q2()));
            assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            assert_eq!(a.add(&b), b.add(&a));
        }
    }

    #[test]
    fn inverse_times_self_is_one() {
        let f = FieldParams::new(2, 2).unwrap();
        for idx in 1..f.q2() {
            let a = f.element_by_rank(idx);
            assert!(a.mul(&a.inverse().unwrap()).is_one());
        }
    }

    #[test]
    fn frobenius_is_additive() {
        let f = FieldParams::new(2, 2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let a = f.element_by_rank(rng.gen_range(0..f.q2()));
            let b = f.element_by_rank(rng.gen_range(0..f.q2()));
            assert_eq!(a.add(&b).frobenius_q(), a.frobenius_q().add(&b.frobenius_q()));
        }
    }

    #[test]
    fn subfield_has_q_elements() {
        let f = FieldParams::new(2, 2).unwrap();
        let sub = f.subfield_q();
        assert_eq!(sub.len(), 4);
        for z in &sub {
            assert_eq!(&z.frobenius_q(), z);
        }
    }
}
