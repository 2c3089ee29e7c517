//! Structure of the residue class ring `F_h = F[x]/h(x)`: CRT decomposition
//! of the unit group, smooth/non-smooth order splitting, and the cyclicity
//! obstruction criteria that decide whether relations modulo `h` can ever
//! determine discrete logarithms modulo a given prime.

use crate::arith::factor::{poly_factor, PolyFactorization};
use crate::arith::field::Field;
use crate::arith::intfactor;
use crate::arith::poly::{poly_gcd, Poly};
use crate::error::{Error, Result};
use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Zero};

/// `F[x]/modulus` together with the factorization of the modulus.
#[derive(Debug, Clone)]
pub struct ResidueRing {
    pub modulus: Poly,
    pub factorization: PolyFactorization,
    pub field: Field,
}

impl ResidueRing {
    pub fn new(modulus: Poly) -> Result<Self> {
        assert!(
            modulus.degree().is_some_and(|d| d >= 1),
            "modulus must be non-constant"
        );
        let field = modulus.field().clone();
        let factorization = poly_factor(&modulus)?;
        debug_assert_eq!(factorization.product(), modulus);
        Ok(ResidueRing {
            modulus,
            factorization,
            field,
        })
    }

    pub fn reduce(&self, a: &Poly) -> Poly {
        a.rem(&self.modulus)
    }

    pub fn mul(&self, a: &Poly, b: &Poly) -> Poly {
        a.mul(b).rem(&self.modulus)
    }

    pub fn is_unit(&self, a: &Poly) -> bool {
        !a.is_zero() && poly_gcd(a, &self.modulus).degree() == Some(0)
    }

    pub fn inverse(&self, a: &Poly) -> Result<Poly> {
        a.inverse_mod(&self.modulus)
    }

    pub fn pow(&self, a: &Poly, k: &BigUint) -> Poly {
        a.pow_mod(k, &self.modulus)
    }

    /// a^k with signed exponent; inverts first when k < 0.
    pub fn pow_signed(&self, a: &Poly, k: &BigInt) -> Result<Poly> {
        match k.sign() {
            Sign::NoSign => Ok(Poly::one(&self.field)),
            Sign::Plus => Ok(self.pow(a, k.magnitude())),
            Sign::Minus => {
                let inv = self.inverse(a)?;
                Ok(self.pow(&inv, k.magnitude()))
            }
        }
    }

    /// All residues (polynomials of degree below deg modulus), enumeration
    /// order by coefficient ranks. Desk scale only.
    pub fn all_residues(&self) -> Vec<Poly> {
        let n = self.modulus.degree().unwrap();
        let q2 = self.field.q2();
        let total = q2
            .checked_pow(n as u32)
            .expect("desk-scale residue enumeration");
        assert!(total <= 2_000_000, "residue enumeration too large");
        (0..total).map(|r| poly_by_rank(&self.field, r, n)).collect()
    }
}

/// Residue of `rank` written in base q^2, little-endian by degree.
pub fn poly_by_rank(field: &Field, rank: u64, len: usize) -> Poly {
    let q2 = field.q2();
    let mut coeffs = Vec::with_capacity(len);
    let mut r = rank;
    for _ in 0..len {
        coeffs.push(field.element_by_rank(r % q2));
        r /= q2;
    }
    Poly::from_coeffs(field, coeffs)
}

/// Per-CRT-component unit group orders: for a factor of degree d with
/// multiplicity a over F_{q^2}, the component order is q^(2da) - q^(2d(a-1)).
#[derive(Debug, Clone)]
pub struct UnitGroupProfile {
    pub component_orders: Vec<(Poly, u32, BigUint)>,
    pub total_order: BigUint,
}

pub fn unit_group_profile(ring: &ResidueRing) -> UnitGroupProfile {
    let q2 = BigUint::from(ring.field.q2());
    let mut component_orders = Vec::new();
    let mut total_order = BigUint::one();
    for (factor, mult) in &ring.factorization.factors {
        let d = factor.degree().unwrap() as u32;
        let order = q2.pow(d * mult) - q2.pow(d * (mult - 1));
        total_order *= &order;
        component_orders.push((factor.clone(), *mult, order));
    }
    UnitGroupProfile {
        component_orders,
        total_order,
    }
}

/// The split `order = v * L` with `v` the largest factor all of whose primes
/// are at most `bound`, computed by extracting primes up to the bound by
/// trial division. `L` is never factored here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderSplit {
    pub smooth: BigUint,
    pub nonsmooth: BigUint,
    pub bound: BigUint,
}

pub fn smooth_split(order: &BigUint, bound: &BigUint) -> OrderSplit {
    assert!(!order.is_zero(), "order must be positive");
    let bound_u = crate::arith::intfactor::to_u64_checked(bound);
    let mut smooth = BigUint::one();
    let mut rest = order.clone();
    for p in sieve_primes(bound_u) {
        let pb = BigUint::from(p);
        while (&rest % &pb).is_zero() {
            smooth *= &pb;
            rest /= &pb;
        }
        if rest.is_one() {
            break;
        }
    }
    OrderSplit {
        smooth,
        nonsmooth: rest,
        bound: bound.clone(),
    }
}

fn sieve_primes(bound: u64) -> Vec<u64> {
    assert!(bound <= 1 << 24, "desk-scale smoothness bound");
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for p in 2..=n {
        if !composite[p] {
            primes.push(p as u64);
            let mut k = p * p;
            while k <= n {
                composite[k] = true;
                k += p;
            }
        }
    }
    primes
}

/// Whether the l-primary part of the unit group is cyclic: at most one CRT
/// component order may be divisible by l, and that component's l-part must
/// itself be cyclic. Field components are always cyclic; components with
/// multiplicity above one are decided by brute force.
pub fn ell_primary_cyclic(ring: &ResidueRing, profile: &UnitGroupProfile, ell: &BigUint) -> bool {
    let divisible: Vec<usize> = profile
        .component_orders
        .iter()
        .enumerate()
        .filter(|(_, (_, _, order))| (order % ell).is_zero())
        .map(|(i, _)| i)
        .collect();
    match divisible.len() {
        0 | 1 => (),
        _ => return false,
    }
    let Some(&idx) = divisible.first() else {
        return true; // trivial l-part
    };
    let (factor, mult, _) = &profile.component_orders[idx];
    if *mult == 1 {
        return true; // field component, cyclic unit group
    }
    component_ell_part_cyclic(&ring.field, factor, *mult, ell)
}

/// Brute force on one component F[x]/factor^mult: the l-part is cyclic iff
/// u^l = 1 has at most l solutions among the units.
fn component_ell_part_cyclic(field: &Field, factor: &Poly, mult: u32, ell: &BigUint) -> bool {
    let mut modulus = Poly::one(field);
    for _ in 0..mult {
        modulus = modulus.mul(factor);
    }
    let ring = ResidueRing::new(modulus).expect("component modulus");
    let mut solutions = BigUint::zero();
    for r in ring.all_residues() {
        if r.is_zero() || !ring.is_unit(&r) {
            continue;
        }
        if ring.pow(&r, ell) == Poly::one(field) {
            solutions += 1u32;
        }
    }
    solutions <= *ell
}

/// Outcome of the polynomial-selection conditions for a candidate (h, g),
/// with witnesses for diagnostics.
#[derive(Debug, Clone)]
pub struct ConditionReport {
    /// Condition 1: g^2 does not divide h.
    pub g_square_not_dividing: bool,
    /// Condition 2: gcd(|F_{h/g}^x|, |F_g^x|) is q^(2C)-smooth.
    pub gcd_smooth: bool,
    /// Consequence: for every prime l | L the l-primary part of F_h^x is cyclic.
    pub ell_parts_cyclic: bool,
    /// The gcd from condition 2.
    pub shared_order_gcd: BigUint,
    /// Non-smooth part L of |F_g^x|.
    pub nonsmooth_part: BigUint,
    /// Human-readable witnesses for any failed condition.
    pub witnesses: Vec<String>,
}

impl ConditionReport {
    pub fn all_hold(&self) -> bool {
        self.g_square_not_dividing && self.gcd_smooth && self.ell_parts_cyclic
    }
}

/// Checks the selection conditions for g | h at smoothness exponent C.
pub fn check_selection_conditions(h: &Poly, g: &Poly, c_bound: u32) -> Result<ConditionReport> {
    let field = h.field().clone();
    let (_, rem) = crate::arith::poly::poly_divmod(h, g)?;
    if !rem.is_zero() {
        return Err(Error::GDoesNotDivideH);
    }
    let ring_h = ResidueRing::new(h.clone())?;
    let profile_h = unit_group_profile(&ring_h);
    let mut witnesses = Vec::new();

    let g_mult = ring_h.factorization.multiplicity_of(&g.monic().1);
    let g_square_not_dividing = g_mult == 1;
    if !g_square_not_dividing {
        witnesses.push(format!(
            "repeated factor: ({})^{} divides h",
            g.compact(),
            g_mult
        ));
    }

    let bound = BigUint::from(field.q2()).pow(c_bound);
    let m = g.degree().unwrap() as u32;
    let order_g = BigUint::from(field.q2()).pow(m) - BigUint::one();
    let cofactor = crate::arith::poly::poly_divmod(h, g)?.0;
    let order_cofactor = if cofactor.is_constant() {
        BigUint::one()
    } else {
        let ring_cof = ResidueRing::new(cofactor)?;
        unit_group_profile(&ring_cof).total_order
    };
    let shared_order_gcd = num_integer::Integer::gcd(&order_g, &order_cofactor);
    let gcd_split = smooth_split(&shared_order_gcd, &bound);
    let gcd_smooth = gcd_split.nonsmooth.is_one();
    if !gcd_smooth {
        witnesses.push(format!(
            "gcd(|F_h/g^x|, |F_g^x|) = {} has non-smooth part {} above bound {}",
            shared_order_gcd, gcd_split.nonsmooth, bound
        ));
    }

    let nonsmooth_part = smooth_split(&order_g, &bound).nonsmooth;
    let mut ell_parts_cyclic = true;
    if !nonsmooth_part.is_one() {
        for ell in intfactor::prime_divisors(&nonsmooth_part) {
            if !ell_primary_cyclic(&ring_h, &profile_h, &ell) {
                ell_parts_cyclic = false;
                witnesses.push(format!("{}-primary part of F_h^x is not cyclic", ell));
            }
        }
    }

    Ok(ConditionReport {
        g_square_not_dividing,
        gcd_smooth,
        ell_parts_cyclic,
        shared_order_gcd,
        nonsmooth_part,
        witnesses,
    })
}
