//! Dense polynomials over `F_{q^2}`, little-endian, with no trailing zeros.
//! The zero polynomial has an empty coefficient vector and `degree() == None`,
//! the distinguished encoding of degree minus infinity; every degree
//! comparison in the crate goes through `Option<usize>` so the sentinel
//! cannot be confused with degree zero.

use crate::arith::field::{ExtFieldElement, Field};
use crate::error::{Error, Result};
use num_bigint::BigUint;
use num_traits::Zero;
use std::fmt;

#[derive(Clone)]
pub struct Poly {
    coeffs: Vec<ExtFieldElement>,
    field: Field,
}

impl PartialEq for Poly {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}
impl Eq for Poly {}

impl std::hash::Hash for Poly {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        for c in &self.coeffs {
            c.hash(state);
        }
    }
}

impl PartialOrd for Poly {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Poly {
    /// Canonical order: by degree, then by the little-endian coefficient
    /// sequence. Gives factor lists and symbol tables a stable sort.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.coeffs
            .len()
            .cmp(&other.coeffs.len())
            .then_with(|| self.coeffs.cmp(&other.coeffs))
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.canonical())
    }
}

impl Poly {
    pub fn zero(field: &Field) -> Self {
        Poly {
            coeffs: Vec::new(),
            field: field.clone(),
        }
    }

    pub fn one(field: &Field) -> Self {
        Poly::constant(field.one())
    }

    pub fn x(field: &Field) -> Self {
        Poly {
            coeffs: vec![field.zero(), field.one()],
            field: field.clone(),
        }
    }

    pub fn constant(c: ExtFieldElement) -> Self {
        let field = c.field().clone();
        let coeffs = if c.is_zero() { Vec::new() } else { vec![c] };
        Poly { coeffs, field }
    }

    pub fn from_coeffs(field: &Field, mut coeffs: Vec<ExtFieldElement>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly {
            coeffs,
            field: field.clone(),
        }
    }

    /// c_k x^k.
    pub fn monomial(field: &Field, c: ExtFieldElement, k: usize) -> Self {
        if c.is_zero() {
            return Poly::zero(field);
        }
        let mut coeffs = vec![field.zero(); k + 1];
        coeffs[k] = c;
        Poly {
            coeffs,
            field: field.clone(),
        }
    }

    /// The monic linear x - beta.
    pub fn x_minus(beta: &ExtFieldElement) -> Self {
        let field = beta.field().clone();
        Poly::from_coeffs(&field, vec![beta.neg(), field.one()])
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn coeffs(&self) -> &[ExtFieldElement] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> ExtFieldElement {
        self.coeffs.get(k).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn leading_coeff(&self) -> Option<&ExtFieldElement> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading_coeff().is_some_and(|c| c.is_one())
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for i in 0..n {
            coeffs.push(self.coeff(i).add(&other.coeff(i)));
        }
        Poly::from_coeffs(&self.field, coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for i in 0..n {
            coeffs.push(self.coeff(i).sub(&other.coeff(i)));
        }
        Poly::from_coeffs(&self.field, coeffs)
    }

    pub fn neg(&self) -> Self {
        Poly::from_coeffs(&self.field, self.coeffs.iter().map(|c| c.neg()).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Poly::zero(&self.field);
        }
        let mut coeffs = vec![self.field.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j].add(&a.mul(b));
            }
        }
        Poly::from_coeffs(&self.field, coeffs)
    }

    pub fn mul_elem(&self, c: &ExtFieldElement) -> Self {
        Poly::from_coeffs(&self.field, self.coeffs.iter().map(|a| a.mul(c)).collect())
    }

    /// (leading coefficient, self made monic). Zero stays zero with unit 1.
    pub fn monic(&self) -> (ExtFieldElement, Poly) {
        match self.leading_coeff() {
            None => (self.field.one(), self.clone()),
            Some(lc) => {
                let inv = lc.inverse().expect("nonzero leading coefficient");
                (lc.clone(), self.mul_elem(&inv))
            }
        }
    }

    pub fn eval(&self, at: &ExtFieldElement) -> ExtFieldElement {
        let mut acc = self.field.zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(at).add(c);
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Poly::zero(&self.field);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c.scale(i as u64 % self.field.p))
            .collect();
        Poly::from_coeffs(&self.field, coeffs)
    }

    /// Coefficient-wise Frobenius: every coefficient raised to the q-th power.
    pub fn frobenius_coeffs(&self) -> Self {
        Poly::from_coeffs(
            &self.field,
            self.coeffs.iter().map(|c| c.frobenius_q()).collect(),
        )
    }

    pub fn rem(&self, modulus: &Self) -> Self {
        poly_divmod(self, modulus).expect("nonzero modulus").1
    }

    pub fn pow_mod(&self, exp: &BigUint, modulus: &Self) -> Self {
        let mut acc = Poly::one(&self.field);
        let mut base = self.rem(modulus);
        let mut k = exp.clone();
        while !k.is_zero() {
            if k.bit(0) {
                acc = acc.mul(&base).rem(modulus);
            }
            base = base.mul(&base).rem(modulus);
            k >>= 1;
        }
        acc
    }

    /// Inverse modulo `modulus` via extended Euclid.
    pub fn inverse_mod(&self, modulus: &Self) -> Result<Self> {
        let (g, u, _) = ext_gcd(self, modulus);
        if g.degree() != Some(0) {
            return Err(Error::NonUnit {
                modulus: modulus.canonical(),
            });
        }
        let ginv = g.coeff(0).inverse().expect("nonzero constant");
        Ok(u.mul_elem(&ginv).rem(modulus))
    }

    /// Canonical text encoding: little-endian terms joined by " + ", each
    /// coefficient as bracketed residues, e.g. `"[1,0] + [0,1]*x^2"`.
    pub fn canonical(&self) -> String {
        if self.is_zero() {
            let zeros = vec!["0"; self.field.degree()];
            return format!("[{}]", zeros.join(","));
        }
        let mut parts = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if k == 0 {
                parts.push(format!("{}", c));
            } else {
                parts.push(format!("{}*x^{}", c, k));
            }
        }
        parts.join(" + ")
    }

    /// Space-free encoding for single-token file fields.
    pub fn compact(&self) -> String {
        self.canonical().replace(' ', "")
    }
}

/// Division with remainder: a = q*b + r with deg r < deg b.
pub fn poly_divmod(a: &Poly, b: &Poly) -> Result<(Poly, Poly)> {
    if b.is_zero() {
        return Err(Error::PolyDivisionByZero);
    }
    let field = a.field().clone();
    let db = b.degree().unwrap();
    let lc_inv = b.leading_coeff().unwrap().inverse().unwrap();
    let mut rem = a.coeffs.clone();
    if rem.len() < db + 1 {
        return Ok((Poly::zero(&field), a.clone()));
    }
    let mut quot = vec![field.zero(); rem.len() - db];
    for k in (db..rem.len()).rev() {
        let c = rem[k].mul(&lc_inv);
        if !c.is_zero() {
            quot[k - db] = c.clone();
            for (i, bc) in b.coeffs.iter().enumerate() {
                rem[k - db + i] = rem[k - db + i].sub(&c.mul(bc));
            }
        }
    }
    Ok((
        Poly::from_coeffs(&field, quot),
        Poly::from_coeffs(&field, rem),
    ))
}

/// Monic greatest common divisor; requires the inputs not both zero.
pub fn poly_gcd(a: &Poly, b: &Poly) -> Poly {
    assert!(!(a.is_zero() && b.is_zero()), "gcd of two zero polynomials");
    let mut a = a.clone();
    let mut b = b.clone();
    while !b.is_zero() {
        let r = a.rem(&b);
        a = b;
        b = r;
    }
    a.monic().1
}

/// Extended Euclid: returns (g, u, v) with u*a + v*b = g (g not normalized).
pub fn ext_gcd(a: &Poly, b: &Poly) -> (Poly, Poly, Poly) {
    let field = a.field().clone();
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut s0, mut s1) = (Poly::one(&field), Poly::zero(&field));
    let (mut t0, mut t1) = (Poly::zero(&field), Poly::one(&field));
    while !r1.is_zero() {
        let (q, r) = poly_divmod(&r0, &r1).expect("r1 nonzero");
        r0 = std::mem::replace(&mut r1, r);
        let s = s0.sub(&q.mul(&s1));
        s0 = std::mem::replace(&mut s1, s);
        let t = t0.sub(&q.mul(&t1));
        t0 = std::mem::replace(&mut t1, t);
    }
    (r0, s0, t0)
}

/// Parses the canonical/compact polynomial encodings. Accepts bracketed
/// element coefficients, bare integers, and bare x powers:
/// `"[1,0] + [0,1]*x^2"`, `"x^3+[2,0]*x"`, `"5"`.
pub fn parse_poly(s: &str, field: &Field) -> Result<Poly> {
    let cleaned: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if cleaned.is_empty() {
        return Err(Error::Parse("empty polynomial".into()));
    }
    let mut acc = Poly::zero(field);
    for term in cleaned.split('+') {
        if term.is_empty() {
            return Err(Error::Parse(format!("empty term in {:?}", s)));
        }
        let (coeff, rest) = if let Some(stripped) = term.strip_prefix('[') {
            let end = stripped
                .find(']')
                .ok_or_else(|| Error::Parse(format!("unterminated '[' in {:?}", term)))?;
            let inner = &stripped[..end];
            let mut residues = Vec::new();
            for part in inner.split(',') {
                let v: u64 = part
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad residue {:?}", part)))?;
                residues.push(v);
            }
            if residues.len() > field.degree() {
                return Err(Error::Parse(format!(
                    "element has {} residues, field degree is {}",
                    residues.len(),
                    field.degree()
                )));
            }
            (field.element(&residues), &stripped[end + 1..])
        } else if term.starts_with('x') {
            (field.one(), term as &str)
        } else {
            let v: u64 = term
                .parse()
                .map_err(|_| Error::Parse(format!("bad term {:?}", term)))?;
            (field.from_prime(v), "")
        };
        let degree = match rest {
            "" => 0,
            "*x" | "x" => 1,
            _ => {
                let pow = rest
                    .strip_prefix("*x^")
                    .or_else(|| rest.strip_prefix("x^"))
                    .ok_or_else(|| Error::Parse(format!("bad term tail {:?}", rest)))?;
                pow.parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad exponent {:?}", pow)))?
            }
        };
        acc = acc.add(&Poly::monomial(field, coeff, degree));
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::field::{find_multiplicative_generator, FieldParams};
    use rand::{Rng, SeedableRng};

    fn f9() -> Field {
        FieldParams::new(3, 1).unwrap()
    }

    fn random_poly(field: &Field, rng: &mut impl Rng, max_deg: usize) -> Poly {
        let deg = rng.gen_range(0..=max_deg);
        let coeffs = (0..=deg)
            .map(|_| field.element_by_rank(rng.gen_range(0..field.q2())))
            .collect();
        Poly::from_coeffs(field, coeffs)
    }

    #[test]
    fn kummer_divmod_is_exact() {
        // h = x^3 - lambda*x, g = x^2 - lambda over F_9: h = x*g.
        let f = f9();
        let lam = find_multiplicative_generator(&f);
        let h = Poly::from_coeffs(&f, vec![f.zero(), lam.neg(), f.zero(), f.one()]);
        let g = Poly::from_coeffs(&f, vec![lam.neg(), f.zero(), f.one()]);
        let (q, r) = poly_divmod(&h, &g).unwrap();
        assert_eq!(q, Poly::x(&f));
        assert!(r.is_zero());
    }

    #[test]
    fn division_by_unit_polynomial() {
        let f = f9();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let a = random_poly(&f, &mut rng, 6);
        let (q, r) = poly_divmod(&a, &Poly::one(&f)).unwrap();
        assert_eq!(q, a);
        assert!(r.is_zero());
    }

    #[test]
    fn long_division_over_f3() {
        // (x^2 + 1) / (x + 1) = (x + 2) rem 2 over F_3.
        let f = f9();
        let a = parse_poly("[1] + x^2", &f).unwrap();
        let b = parse_poly("[1] + x", &f).unwrap();
        let (q, r) = poly_divmod(&a, &b).unwrap();
        assert_eq!(q, parse_poly("[2] + x", &f).unwrap());
        assert_eq!(r, parse_poly("[2]", &f).unwrap());
    }

    #[test]
    fn divide_by_zero_is_error() {
        let f = f9();
        assert!(matches!(
            poly_divmod(&Poly::x(&f), &Poly::zero(&f)),
            Err(Error::PolyDivisionByZero)
        ));
    }

    #[test]
    fn gcd_with_zero_is_monic_other() {
        let f = f9();
        let lam = find_multiplicative_generator(&f);
        let a = Poly::x(&f).mul_elem(&lam);
        assert_eq!(poly_gcd(&a, &Poly::zero(&f)), Poly::x(&f));
    }

    #[test]
    fn gcd_of_divisor_pair() {
        let f = f9();
        let lam = find_multiplicative_generator(&f);
        let g = Poly::from_coeffs(&f, vec![lam.neg(), f.zero(), f.one()]);
        let h = g.mul(&Poly::x(&f));
        assert_eq!(poly_gcd(&g, &h), g);
    }

    #[test]
    fn divmod_reconstructs_random_pairs() {
        let f = FieldParams::new(2, 2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let a = random_poly(&f, &mut rng, 8);
            let mut b = random_poly(&f, &mut rng, 4);
            if b.is_zero() {
                b = Poly::x(&f);
            }
            let (q, r) = poly_divmod(&a, &b).unwrap();
            assert_eq!(q.mul(&b).add(&r), a);
            if !r.is_zero() {
                assert!(r.degree().unwrap() < b.degree().unwrap());
            }
        }
    }

    #[test]
    fn poly_ring_axioms() {
        let f = f9();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let a = random_poly(&f, &mut rng, 4);
            let b = random_poly(&f, &mut rng, 4);
            let c = random_poly(&f, &mut rng, 4);
            assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        }
    }

    #[test]
    fn inverse_mod_irreducible() {
        let f = f9();
        let lam = find_multiplicative_generator(&f);
        let g = Poly::from_coeffs(&f, vec![lam.neg(), f.zero(), f.one()]);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..40 {
            let a = random_poly(&f, &mut rng, 1);
            if a.is_zero() {
                continue;
            }
            let inv = a.inverse_mod(&g).unwrap();
            assert_eq!(a.mul(&inv).rem(&g), Poly::one(&f));
        }
    }

    #[test]
    fn encoding_round_trips() {
        let f = f9();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let a = random_poly(&f, &mut rng, 5);
            assert_eq!(parse_poly(&a.canonical(), &f).unwrap(), a);
            assert_eq!(parse_poly(&a.compact(), &f).unwrap(), a);
        }
        let spec_example = parse_poly("[1,0] + [0,1]*x^2", &f).unwrap();
        assert_eq!(spec_example.degree(), Some(2));
        assert_eq!(spec_example.canonical(), "[1,0] + [0,1]*x^2");
    }

    #[test]
    fn zero_degree_sentinel() {
        let f = f9();
        assert_eq!(Poly::zero(&f).degree(), None);
        assert_eq!(Poly::one(&f).degree(), Some(0));
        assert!(Poly::zero(&f).degree() < Poly::one(&f).degree());
    }
}
