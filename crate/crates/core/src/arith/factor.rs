//! Deterministic polynomial factorization over `F_{q^2}`: squarefree
//! decomposition, distinct-degree splitting, then equal-degree splitting via
//! the Frobenius-fixed subalgebra, enumerating constant shifts in canonical
//! order. No randomness anywhere, so factor lists are reproducible.

use crate::arith::field::ExtFieldElement;
#[cfg(test)]
use crate::arith::field::Field;
use crate::arith::poly::{poly_gcd, Poly};
use crate::error::Result;
use num_bigint::BigUint;

/// `unit * prod factor_i^mult_i` with distinct monic irreducible factors,
/// sorted by (degree, coefficient order).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyFactorization {
    pub unit: ExtFieldElement,
    pub factors: Vec<(Poly, u32)>,
}

impl PolyFactorization {
    /// Multiplies the factorization back together.
    pub fn product(&self) -> Poly {
        let field = self.unit.field().clone();
        let mut acc = Poly::constant(self.unit.clone());
        for (f, m) in &self.factors {
            for _ in 0..*m {
                acc = acc.mul(f);
            }
        }
        if acc.is_zero() {
            Poly::zero(&field)
        } else {
            acc
        }
    }

    /// Valuation of the factorization at a given monic irreducible.
    pub fn multiplicity_of(&self, g: &Poly) -> u32 {
        self.factors
            .iter()
            .find(|(f, _)| f == g)
            .map(|(_, m)| *m)
            .unwrap_or(0)
    }
}

/// Factors a nonzero polynomial into monic irreducibles.
pub fn poly_factor(a: &Poly) -> Result<PolyFactorization> {
    assert!(!a.is_zero(), "cannot factor the zero polynomial");
    let (unit, monic) = a.monic();
    let mut factors: Vec<(Poly, u32)> = Vec::new();
    for (part, mult) in squarefree_decomposition(&monic) {
        for (prod, d) in distinct_degree(&part) {
            for irr in equal_degree(&prod, d) {
                debug_assert_eq!(irr.degree(), Some(d), "distinct-degree certificate");
                factors.push((irr, mult));
            }
        }
    }
    factors.sort_by(|(f, _), (g, _)| f.cmp(g));
    debug_assert!({
        let refolded = PolyFactorization {
            unit: unit.clone(),
            factors: factors.clone(),
        }
        .product();
        refolded == *a
    });
    Ok(PolyFactorization { unit, factors })
}

/// True iff the polynomial is irreducible (degree >= 1 and a single factor).
pub fn is_irreducible(a: &Poly) -> bool {
    match a.degree() {
        None | Some(0) => false,
        Some(d) => {
            let f = poly_factor(a).expect("nonzero");
            f.factors.len() == 1 && f.factors[0].1 == 1 && f.factors[0].0.degree() == Some(d)
        }
    }
}

/// Pairwise-coprime squarefree parts with multiplicities (char-p aware).
fn squarefree_decomposition(f: &Poly) -> Vec<(Poly, u32)> {
    fn inner(f: &Poly, scale: u32, out: &mut Vec<(Poly, u32)>) {
        if f.degree().is_none_or(|d| d == 0) {
            return;
        }
        let df = f.derivative();
        if df.is_zero() {
            inner(&pth_root(f), scale * f.field().p as u32, out);
            return;
        }
        let mut c = poly_gcd(f, &df);
        let mut w = crate::arith::poly::poly_divmod(f, &c).unwrap().0;
        let mut i = 1u32;
        while w.degree() != Some(0) {
            let y = poly_gcd(&w, &c);
            let z = crate::arith::poly::poly_divmod(&w, &y).unwrap().0;
            if z.degree().is_some_and(|d| d > 0) {
                out.push((z, i * scale));
            }
            c = crate::arith::poly::poly_divmod(&c, &y).unwrap().0;
            w = y;
            i += 1;
        }
        if c.degree().is_some_and(|d| d > 0) {
            inner(&pth_root(&c), scale * f.field().p as u32, out);
        }
    }
    let mut out = Vec::new();
    inner(f, 1, &mut out);
    out
}

/// p-th root of a polynomial whose derivative vanishes: every exponent is a
/// multiple of p and coefficients are p-th powers (the field is perfect).
fn pth_root(f: &Poly) -> Poly {
    let field = f.field().clone();
    let p = field.p as usize;
    // a^(1/p) = a^(q^2/p)
    let root_exp = field.q2() / field.p;
    let mut coeffs = Vec::new();
    for (k, c) in f.coeffs().iter().enumerate() {
        if k % p == 0 {
            coeffs.push(c.pow_u64(root_exp));
        } else {
            debug_assert!(c.is_zero());
        }
    }
    Poly::from_coeffs(&field, coeffs)
}

/// Splits a monic squarefree polynomial into (product of irreducibles of
/// degree d, d) pairs via iterated gcd with x^(Q^d) - x.
fn distinct_degree(f: &Poly) -> Vec<(Poly, usize)> {
    let field = f.field().clone();
    let q2 = BigUint::from(field.q2());
    let mut out = Vec::new();
    let mut rest = f.clone();
    let mut h = Poly::x(&field).rem(&rest);
    let mut d = 0usize;
    while rest.degree().is_some_and(|deg| deg >= 1) {
        d += 1;
        if 2 * d > rest.degree().unwrap() {
            let deg = rest.degree().unwrap();
            out.push((rest.clone(), deg));
            break;
        }
        h = h.pow_mod(&q2, &rest);
        let g = poly_gcd(&h.sub(&Poly::x(&field)), &rest);
        if g.degree().is_some_and(|deg| deg > 0) {
            out.push((g.clone(), d));
            rest = crate::arith::poly::poly_divmod(&rest, &g).unwrap().0;
            h = h.rem(&rest);
        }
    }
    out
}

/// Deterministic equal-degree splitting: kernel basis of Frobenius - id on
/// F[x]/f separates the factors; shifting by every field constant in
/// canonical order realizes the splits.
fn equal_degree(f: &Poly, d: usize) -> Vec<Poly> {
    let field = f.field().clone();
    let n = f.degree().unwrap();
    if n == d {
        return vec![f.clone()];
    }
    let r = n / d;
    let basis = frobenius_kernel_basis(f);
    debug_assert_eq!(basis.len(), r, "Berlekamp subalgebra dimension");
    let mut found = vec![f.clone()];
    'outer: for v in &basis {
        if v.is_constant() {
            continue;
        }
        for idx in 0..field.q2() {
            let c = field.element_by_rank(idx);
            let shifted = v.sub(&Poly::constant(c));
            let mut next = Vec::with_capacity(found.len());
            for u in &found {
                if u.degree() == Some(d) {
                    next.push(u.clone());
                    continue;
                }
                let g = poly_gcd(&shifted.rem(u), u);
                let gd = g.degree().unwrap_or(0);
                if gd > 0 && gd < u.degree().unwrap() {
                    let q = crate::arith::poly::poly_divmod(u, &g).unwrap().0;
                    next.push(g);
                    next.push(q);
                } else {
                    next.push(u.clone());
                }
            }
            found = next;
            if found.len() == r {
                break 'outer;
            }
        }
    }
    assert!(
        found.iter().all(|u| u.degree() == Some(d)),
        "equal-degree splitting incomplete"
    );
    found.sort();
    found
}

/// Kernel basis of (Frobenius - identity) acting on F[x]/f.
fn frobenius_kernel_basis(f: &Poly) -> Vec<Poly> {
    let field = f.field().clone();
    let n = f.degree().unwrap();
    let q2 = BigUint::from(field.q2());
    let xq = Poly::x(&field).pow_mod(&q2, f);
    // columns of M: x^(j*Q) mod f
    let mut cols: Vec<Vec<ExtFieldElement>> = Vec::with_capacity(n);
    let mut acc = Poly::one(&field);
    for _ in 0..n {
        let mut col: Vec<ExtFieldElement> = (0..n).map(|i| acc.coeff(i)).collect();
        cols.push(std::mem::take(&mut col));
        acc = acc.mul(&xq).rem(f);
    }
    // rows of (M - I)
    let mut mat: Vec<Vec<ExtFieldElement>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut e = cols[j][i].clone();
                    if i == j {
                        e = e.sub(&field.one());
                    }
                    e
                })
                .collect()
        })
        .collect();
    // Gaussian elimination, tracking pivot columns.
    let mut pivot_cols = Vec::new();
    let mut row = 0usize;
    for col in 0..n {
        if let Some(r) = (row..n).find(|&r| !mat[r][col].is_zero()) {
            mat.swap(row, r);
            let inv = mat[row][col].inverse().unwrap();
            for j in 0..n {
                mat[row][j] = mat[row][j].mul(&inv);
            }
            for r2 in 0..n {
                if r2 != row && !mat[r2][col].is_zero() {
                    let c = mat[r2][col].clone();
                    for j in 0..n {
                        let sub = c.mul(&mat[row][j]);
                        mat[r2][j] = mat[r2][j].sub(&sub);
                    }
                }
            }
            pivot_cols.push(col);
            row += 1;
        }
    }
    let mut basis = Vec::new();
    for free in 0..n {
        if pivot_cols.contains(&free) {
            continue;
        }
        let mut v = vec![field.zero(); n];
        v[free] = field.one();
        for (r, &pc) in pivot_cols.iter().enumerate() {
            v[pc] = mat[r][free].neg();
        }
        basis.push(Poly::from_coeffs(&field, v));
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::field::{find_multiplicative_generator, FieldParams};
    use crate::arith::poly::parse_poly;
    use rand::{Rng, SeedableRng};

    fn f9() -> Field {
        FieldParams::new(3, 1).unwrap()
    }

    /// Exhaustive root-search factorizer for polynomials that split into
    /// linears: the independent oracle for the small cases.
    fn linear_factor_oracle(a: &Poly) -> Vec<(ExtFieldElement, u32)> {
        let field = a.field().clone();
        let mut out = Vec::new();
        let mut rest = a.monic().1;
        for idx in 0..field.q2() {
            let r = field.element_by_rank(idx);
            let lin = Poly::x_minus(&r);
            let mut mult = 0;
            loop {
                let (q, rem) = crate::arith::poly::poly_divmod(&rest, &lin).unwrap();
                if rem.is_zero() {
                    mult += 1;
                    rest = q;
                } else {
                    break;
                }
            }
            if mult > 0 {
                out.push((r, mult));
            }
        }
        out
    }

    #[test]
    fn kummer_h_factors_as_x_times_g() {
        let f = f9();
        let lam = find_multiplicative_generator(&f);
        let h = Poly::from_coeffs(&f, vec![f.zero(), lam.neg(), f.zero(), f.one()]);
        let fac = poly_factor(&h).unwrap();
        let g = Poly::from_coeffs(&f, vec![lam.neg(), f.zero(), f.one()]);
        assert_eq!(fac.unit, f.one());
        assert_eq!(fac.factors, vec![(Poly::x(&f), 1), (g, 1)]);
    }

    #[test]
    fn irreducible_input_is_single_factor() {
        let f = f9();
        let lam = find_multiplicative_generator(&f);
        let g = Poly::from_coeffs(&f, vec![lam.neg(), f.zero(), f.one()]);
        let fac = poly_factor(&g).unwrap();
        assert_eq!(fac.factors, vec![(g.clone(), 1)]);
        assert!(is_irreducible(&g));
    }

    #[test]
    fn repeated_linear_factors_over_f3() {
        // (x+1)^2 (x+2), checked against the exhaustive root oracle.
        let f = f9();
        let xp1 = parse_poly("[1] + x", &f).unwrap();
        let xp2 = parse_poly("[2] + x", &f).unwrap();
        let prod = xp1.mul(&xp1).mul(&xp2);
        let fac = poly_factor(&prod).unwrap();
        assert_eq!(fac.factors, vec![(xp1.clone(), 2), (xp2.clone(), 1)]);
        let oracle = linear_factor_oracle(&prod);
        let expect: Vec<(Poly, u32)> = oracle
            .into_iter()
            .map(|(r, m)| (Poly::x_minus(&r), m))
            .collect();
        let mut sorted = expect;
        sorted.sort_by(|(a, _), (b, _)| a.cmp(b));
        assert_eq!(fac.factors, sorted);
    }

    #[test]
    fn random_polys_refactor_bit_exact() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for field in [f9(), FieldParams::new(2, 2).unwrap()] {
            for _ in 0..100 {
                let deg = rng.gen_range(1..=12);
                let mut coeffs: Vec<_> = (0..deg)
                    .map(|_| field.element_by_rank(rng.gen_range(0..field.q2())))
                    .collect();
                coeffs.push(field.element_by_rank(rng.gen_range(1..field.q2())));
                let a = Poly::from_coeffs(&field, coeffs);
                let fac = poly_factor(&a).unwrap();
                assert_eq!(fac.product(), a, "refold mismatch for {:?}", a);
                for ((f1, _), (f2, _)) in fac.factors.iter().zip(fac.factors.iter().skip(1)) {
                    assert!(f1 < f2, "factors must be sorted and distinct");
                }
            }
        }
    }

    #[test]
    fn coprime_irreducibles_have_unit_gcd() {
        let f = FieldParams::new(2, 2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let mut irreducibles = Vec::new();
        while irreducibles.len() < 2 {
            let coeffs: Vec<_> = (0..3)
                .map(|_| f.element_by_rank(rng.gen_range(0..f.q2())))
                .chain(std::iter::once(f.one()))
                .collect();
            let cand = Poly::from_coeffs(&f, coeffs);
            if is_irreducible(&cand) && !irreducibles.contains(&cand) {
                irreducibles.push(cand);
            }
        }
        let g = poly_gcd(&irreducibles[0], &irreducibles[1]);
        assert_eq!(g, Poly::one(&f));
    }

    #[test]
    fn char_p_power_factors() {
        // x^3 + 2x^2 + x = x (x+1)^2 over F_3 exercises gcd(f, f') paths;
        // (x^2 - lambda)^3 exercises the p-th root branch.
        let f = f9();
        let lam = find_multiplicative_generator(&f);
        let g = Poly::from_coeffs(&f, vec![lam.neg(), f.zero(), f.one()]);
        let cube = g.mul(&g).mul(&g);
        let fac = poly_factor(&cube).unwrap();
        assert_eq!(fac.factors, vec![(g, 3)]);
    }
}
