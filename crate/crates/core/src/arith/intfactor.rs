//! Integer factorization at desk scale: trial division up to 10^6, then
//! Pollard rho with deterministic parameters. Group orders here stay far
//! below cryptographic sizes, so nothing cleverer is warranted.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::BTreeMap;

const TRIAL_BOUND: u64 = 1_000_000;

/// Deterministic Miller-Rabin, valid for all inputs below 3.3 * 10^24.
pub fn is_prime(n: &BigUint) -> bool {
    let two = BigUint::from(2u32);
    if n < &two {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let p = BigUint::from(p);
        if n == &p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    let n_minus_1 = n - 1u32;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Trial division primality for machine-word inputs.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn pollard_rho(n: &BigUint) -> BigUint {
    // Brent's cycle finding with deterministic increments; n is composite,
    // odd, and has no factor below TRIAL_BOUND when we get here.
    let one = BigUint::one();
    for c in 1u64..64 {
        let c = BigUint::from(c);
        let mut x = BigUint::from(2u32);
        let mut y = x.clone();
        let mut d = BigUint::one();
        let step = |v: &BigUint| (v * v + &c) % n;
        while d.is_one() {
            x = step(&x);
            y = step(&step(&y));
            let diff = if x > y { &x - &y } else { &y - &x };
            if diff.is_zero() {
                break;
            }
            d = diff.gcd(n);
        }
        if !d.is_one() && &d != n {
            return d;
        }
    }
    // Unreachable at desk scale; fall back to slow trial division.
    let mut d = BigUint::from(TRIAL_BOUND);
    loop {
        d += &one;
        if (n % &d).is_zero() {
            return d;
        }
    }
}

/// Full prime factorization, returned as prime -> exponent in ascending order.
pub fn factorize(n: &BigUint) -> BTreeMap<BigUint, u32> {
    let mut out = BTreeMap::new();
    let mut n = n.clone();
    if n.is_zero() || n.is_one() {
        return out;
    }
    let mut d = 2u64;
    while d <= TRIAL_BOUND {
        let db = BigUint::from(d);
        if &db * &db > n {
            break;
        }
        while (&n % &db).is_zero() {
            *out.entry(db.clone()).or_insert(0) += 1;
            n /= &db;
        }
        d += if d == 2 { 1 } else { 2 };
    }
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        if m.is_one() {
            continue;
        }
        if is_prime(&m) {
            *out.entry(m).or_insert(0) += 1;
        } else {
            let f = pollard_rho(&m);
            stack.push(&m / &f);
            stack.push(f);
        }
    }
    out
}

/// Distinct prime divisors in ascending order.
pub fn prime_divisors(n: &BigUint) -> Vec<BigUint> {
    factorize(n).into_keys().collect()
}

/// Narrows to u64, panicking past desk scale.
pub fn to_u64_checked(n: &BigUint) -> u64 {
    n.to_u64().expect("value exceeds desk scale (u64)")
}

/// Multiplies a factorization back together; the oracle side of tests.
pub fn refold(factors: &BTreeMap<BigUint, u32>) -> BigUint {
    let mut n = BigUint::one();
    for (p, e) in factors {
        n *= p.pow(*e);
    }
    n
}

/// CRT for pairwise coprime moduli; returns the residue modulo their product.
pub fn crt(residues: &[(BigUint, BigUint)]) -> BigUint {
    let mut r = BigUint::zero();
    let mut m = BigUint::one();
    for (ri, mi) in residues {
        // r' = r mod m, r' = ri mod mi
        let mi_int: num_bigint::BigInt = mi.clone().into();
        let m_int: num_bigint::BigInt = m.clone().into();
        let inv = m_int.extended_gcd(&mi_int).x;
        let inv = ((inv % &mi_int) + &mi_int) % &mi_int;
        let inv: BigUint = inv.to_biguint().expect("normalized");
        let delta = ((ri + mi - (&r % mi)) % mi * inv) % mi;
        r += &delta * &m;
        m *= mi;
    }
    r
}
