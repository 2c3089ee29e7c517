//! Top-level solver: Pohlig-Hellman on the smooth component of |F_g^x|,
//! the relation/descent machinery on the non-smooth component L, CRT
//! combination, and construction of a full-order generator. Every answer is
//! verified by exponentiation before it is returned; a brute-force oracle
//! backs the test suites.

use crate::arith::field::Field;
use crate::arith::intfactor;
use crate::arith::poly::{poly_gcd, Poly};
use crate::descent::{beta_l_element, full_descent, projection_exponent, DescentTree};
use crate::error::{Error, Result};
use crate::modlinalg::{decompose_and_solve, rank_mod_ell, solve_dlog_ratio, DlogResult};
use crate::polyselect::{
    choose_embedding, select, EmbeddingParams, SelectedPolynomials, SelectionStrategy,
};
use crate::relgen::{collect_factorbase_relations, FactorbaseRelations, RelationContext};
use crate::ringstruct::{check_selection_conditions, smooth_split, ConditionReport, OrderSplit};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::HashMap;

const ORACLE_CAP: u64 = 10_000_000;

/// Minimal k with base^k = target in F_g^x, by enumeration. Desk-scale
/// verification oracle; refuses groups above the cap.
pub fn brute_force_dlog(
    g: &Poly,
    base: &Poly,
    target: &Poly,
    group_order: &BigUint,
) -> Result<Option<BigUint>> {
    let cap = BigUint::from(ORACLE_CAP);
    if group_order > &cap {
        return Err(Error::OracleCapExceeded {
            order: group_order.clone(),
            cap: ORACLE_CAP,
        });
    }
    let field = g.field().clone();
    let base = base.rem(g);
    let target = target.rem(g);
    let mut acc = Poly::one(&field);
    let order = group_order.to_u64().expect("cap checked");
    for k in 0..order {
        if acc == target {
            return Ok(Some(BigUint::from(k)));
        }
        acc = acc.mul(&base).rem(g);
    }
    Ok(None)
}

/// Discrete log of `target` in the group generated by `base` of smooth order
/// v with known factorization, prime power by prime power with baby-step
/// giant-step inside each prime.
pub fn pohlig_hellman(
    g: &Poly,
    base: &Poly,
    target: &Poly,
    v: &BigUint,
    v_factors: &std::collections::BTreeMap<BigUint, u32>,
) -> Result<BigUint> {
    if v.is_one() {
        return Ok(BigUint::zero());
    }
    let mut residues = Vec::new();
    for (ell, &k) in v_factors {
        let ell_k = ell.pow(k);
        let cof = v / &ell_k;
        let gamma = base.pow_mod(&cof, g);
        let t = target.pow_mod(&cof, g);
        // digit-by-digit lift in the order-ell^k subgroup
        let gamma1 = gamma.pow_mod(&ell.pow(k - 1), g); // order ell
        let mut x = BigUint::zero();
        let gamma_inv = gamma.inverse_mod(g)?;
        for j in 0..k {
            // target_j = (t * gamma^-x)^(ell^(k-1-j)) lies in <gamma1>
            let partial = t.mul(&gamma_inv.pow_mod(&x, g)).rem(g);
            let tj = partial.pow_mod(&ell.pow(k - 1 - j), g);
            let digit = bsgs(g, &gamma1, &tj, ell)?;
            x += digit * ell.pow(j);
        }
        residues.push((x, ell_k));
    }
    Ok(intfactor::crt(&residues))
}

/// Baby-step giant-step in the subgroup of prime order ell.
fn bsgs(g: &Poly, gamma: &Poly, target: &Poly, ell: &BigUint) -> Result<BigUint> {
    let field = g.field().clone();
    let ell_u = ell.to_u64().expect("smooth prime fits a word");
    let m = (ell_u as f64).sqrt().ceil() as u64;
    let mut table: HashMap<Poly, u64> = HashMap::new();
    let mut acc = Poly::one(&field);
    for j in 0..m {
        table.entry(acc.clone()).or_insert(j);
        acc = acc.mul(gamma).rem(g);
    }
    // giant step: gamma^-m
    let giant = gamma
        .inverse_mod(g)?
        .pow_mod(&BigUint::from(m), g);
    let mut cur = target.rem(g);
    for i in 0..=m {
        if let Some(&j) = table.get(&cur) {
            return Ok(BigUint::from(i * m + j) % ell);
        }
        cur = cur.mul(&giant).rem(g);
    }
    Err(Error::NotInSubgroup)
}

/// A generator of F_g^x assembled from a smooth-part generator (found by
/// projecting candidates and order-testing) and beta_L from the relation
/// engine.
#[derive(Debug, Clone)]
pub struct GlobalGenerator {
    pub smooth_part: Poly,
    pub l_part: Poly,
    pub combined: Poly,
    pub order: BigUint,
}

/// All the artifacts one instance needs to solve discrete logs.
pub struct Pipeline {
    pub params: EmbeddingParams,
    pub field: Field,
    pub sel: SelectedPolynomials,
    pub ctx: RelationContext,
    pub fb: FactorbaseRelations,
    pub conditions: ConditionReport,
    pub split: OrderSplit,
    /// Factorization of the smooth part v.
    pub v_factors: std::collections::BTreeMap<BigUint, u32>,
    /// Measured rank of the factorbase matrix modulo each prime of L
    /// (diagnostic; the solver itself never factors L).
    pub ranks: Vec<(BigUint, usize)>,
    pub fb_logs: Option<DlogResult>,
    pub generator: GlobalGenerator,
}

/// One solved instance: p, n and the target (and optional base) presented
/// as polynomials modulo g.
#[derive(Debug, Clone)]
pub struct DlpInstance {
    pub p: u64,
    pub n: u32,
    pub target: Poly,
    pub base: Option<Poly>,
}

impl Pipeline {
    /// Builds every stage for (p, n, C, D). `l_override` replaces the
    /// natural smooth split (used to drive the relation path on desk-scale
    /// instances where the natural L is 1).
    pub fn build(
        p: u64,
        n: u32,
        c: u32,
        d: u32,
        strategy: SelectionStrategy,
        l_override: Option<BigUint>,
    ) -> Result<Pipeline> {
        let params = choose_embedding(p, n, c, d)?;
        let field = params.build_field()?;
        let sel = select(&params, &field, strategy)?;
        Pipeline::from_selection(params, field, sel, l_override)
    }

    /// Builds the later stages from an existing selection (cached params
    /// files and test hooks enter here).
    pub fn from_selection(
        params: EmbeddingParams,
        field: Field,
        sel: SelectedPolynomials,
        l_override: Option<BigUint>,
    ) -> Result<Pipeline> {
        Pipeline::from_selection_cached(params, field, sel, l_override, None, None)
    }

    /// Same, reusing cached relation and log artifacts when supplied.
    /// Cached logs are still re-validated in field arithmetic.
    pub fn from_selection_cached(
        params: EmbeddingParams,
        field: Field,
        sel: SelectedPolynomials,
        l_override: Option<BigUint>,
        cached_fb: Option<FactorbaseRelations>,
        cached_logs: Option<DlogResult>,
    ) -> Result<Pipeline> {
        let conditions = check_selection_conditions(&sel.h, &sel.g, params.c)?;
        if !conditions.all_hold() {
            let mut msg = Vec::new();
            if !conditions.g_square_not_dividing {
                msg.push("condition 1 violated (g^2 divides h)".to_string());
            }
            if !conditions.gcd_smooth {
                msg.push("condition 2 violated (shared order gcd not smooth)".to_string());
            }
            if !conditions.ell_parts_cyclic {
                msg.push("obstruction: non-cyclic l-primary part".to_string());
            }
            msg.extend(conditions.witnesses.iter().cloned());
            return Err(Error::Obstruction(msg.join("; ")));
        }
        let ctx = RelationContext::new(&sel)?;
        let fb = match cached_fb {
            Some(fb) => fb,
            None => collect_factorbase_relations(&ctx)?,
        };
        let order = params.group_order();
        let split = match l_override {
            None => smooth_split(&order, &params.smoothness_bound()),
            Some(l) => {
                assert!((&order % &l).is_zero(), "L must divide |F_g^x|");
                let v = &order / &l;
                assert!(v.gcd(&l).is_one(), "L must be coprime to its cofactor");
                OrderSplit {
                    smooth: v,
                    nonsmooth: l.clone(),
                    bound: params.smoothness_bound(),
                }
            }
        };
        let v_factors = intfactor::factorize(&split.smooth);
        let l = split.nonsmooth.clone();
        let mut ranks = Vec::new();
        if !l.is_one() {
            for ell in intfactor::prime_divisors(&l) {
                ranks.push((ell.clone(), rank_mod_ell(&fb.matrix, &ell)));
            }
        }
        let fb_logs = if l.is_one() {
            None
        } else if let Some(logs) = cached_logs.filter(|logs| logs.modulus == l) {
            validate_factorbase_logs(&ctx, &fb, &logs, &l)?;
            Some(logs)
        } else {
            let dec = decompose_and_solve(&fb.matrix, &l)?;
            if !dec.violations.is_empty() {
                return Err(Error::Obstruction(format!(
                    "{} trailing-row consistency violations in the relation system",
                    dec.violations.len()
                )));
            }
            let logs = dec.to_dlog_result(&l);
            validate_factorbase_logs(&ctx, &fb, &logs, &l)?;
            Some(logs)
        };
        let generator = build_generator(&ctx, &fb, fb_logs.as_ref(), &split, &v_factors)?;
        Ok(Pipeline {
            params,
            field,
            sel,
            ctx,
            fb,
            conditions,
            split,
            v_factors,
            ranks,
            fb_logs,
            generator,
        })
    }

    /// Discrete log of `target` with respect to the global generator,
    /// verified by one exponentiation. Smooth part by Pohlig-Hellman,
    /// non-smooth part by descent, combined by CRT.
    pub fn solve(&self, target: &Poly, seed: u64) -> Result<BigUint> {
        let g = &self.sel.g;
        let target = target.rem(g);
        if target.is_zero() || poly_gcd(&target, g).degree() != Some(0) {
            return Err(Error::TargetNotUnit);
        }
        let order = self.params.group_order();
        let v = &self.split.smooth;
        let l = &self.split.nonsmooth;
        let mut residues = Vec::new();
        if !v.is_one() {
            let kv = projection_exponent(&order, v);
            let tv = target.pow_mod(&kv, g);
            let xv = pohlig_hellman(g, &self.generator.smooth_part, &tv, v, &self.v_factors)?;
            residues.push((xv, v.clone()));
        }
        if !l.is_one() {
            let fb_logs = self.fb_logs.as_ref().expect("logs exist when L > 1");
            let (xl, _tree) = full_descent(&self.ctx, &self.fb, fb_logs, &target, l, seed)?;
            residues.push((xl, l.clone()));
        }
        let x = intfactor::crt(&residues);
        // final check: generator^x = target
        if self.generator.combined.pow_mod(&x, g) != target {
            return Err(Error::Obstruction(
                "solved exponent failed the verification exponentiation".into(),
            ));
        }
        Ok(x)
    }

    /// Same but with the descent tree for reporting.
    pub fn solve_with_trace(&self, target: &Poly, seed: u64) -> Result<(BigUint, Option<DescentTree>)> {
        let g = &self.sel.g;
        let target = target.rem(g);
        if target.is_zero() || poly_gcd(&target, g).degree() != Some(0) {
            return Err(Error::TargetNotUnit);
        }
        let order = self.params.group_order();
        let v = &self.split.smooth;
        let l = &self.split.nonsmooth;
        let mut residues = Vec::new();
        let mut trace = None;
        if !v.is_one() {
            let kv = projection_exponent(&order, v);
            let tv = target.pow_mod(&kv, g);
            let xv = pohlig_hellman(g, &self.generator.smooth_part, &tv, v, &self.v_factors)?;
            residues.push((xv, v.clone()));
        }
        if !l.is_one() {
            let fb_logs = self.fb_logs.as_ref().expect("logs exist when L > 1");
            let (xl, tree) = full_descent(&self.ctx, &self.fb, fb_logs, &target, l, seed)?;
            residues.push((xl, l.clone()));
            trace = Some(tree);
        }
        let x = intfactor::crt(&residues);
        if self.generator.combined.pow_mod(&x, g) != target {
            return Err(Error::Obstruction(
                "solved exponent failed the verification exponentiation".into(),
            ));
        }
        Ok((x, trace))
    }

    /// Solves an instance, rebasing onto the caller's base when one is
    /// given: None means the target lies outside the subgroup generated by
    /// the base.
    pub fn solve_instance(&self, inst: &DlpInstance, seed: u64) -> Result<Option<BigUint>> {
        let x_t = self.solve(&inst.target, seed)?;
        match &inst.base {
            None => Ok(Some(x_t)),
            Some(base) => {
                let x_b = self.solve(base, seed.wrapping_add(1))?;
                let order = self.params.group_order();
                Ok(solve_dlog_ratio(
                    &BigInt::from(x_t),
                    &BigInt::from(x_b),
                    &order,
                ))
            }
        }
    }
}

/// Field-arithmetic validation of extracted factorbase logs: for every
/// symbol s, beta_L^log(s) must equal the projection of s to `F_g^x[L]`.
pub fn validate_factorbase_logs(
    ctx: &RelationContext,
    fb: &FactorbaseRelations,
    logs: &DlogResult,
    l: &BigUint,
) -> Result<()> {
    let g = &ctx.sel.g;
    let order = ctx.sel.params.group_order();
    let k = projection_exponent(&order, l);
    let beta = beta_l_element(fb, logs, ctx, l);
    for ord in 0..fb.symbols.len() {
        let s = fb.symbols.value(ord).rem(g);
        if beta.pow_mod(&logs.logs[ord], g) != s.pow_mod(&k, g) {
            return Err(Error::Obstruction(format!(
                "factorbase log of {} fails field verification",
                fb.symbols.token(ord)
            )));
        }
    }
    Ok(())
}

fn build_generator(
    ctx: &RelationContext,
    fb: &FactorbaseRelations,
    fb_logs: Option<&DlogResult>,
    split: &OrderSplit,
    v_factors: &std::collections::BTreeMap<BigUint, u32>,
) -> Result<GlobalGenerator> {
    let g = &ctx.sel.g;
    let field = ctx.field.clone();
    let order = ctx.sel.params.group_order();
    let v = &split.smooth;
    let l = &split.nonsmooth;

    let smooth_part = if v.is_one() {
        Poly::one(&field)
    } else {
        let kv = projection_exponent(&order, v);
        let mut found = None;
        // candidates in canonical enumeration order; v is smooth so the
        // order test is cheap
        let m = g.degree().unwrap();
        let q2 = field.q2();
        let total = q2.checked_pow(m as u32).expect("desk scale");
        'search: for rank in 1..total {
            let cand = crate::ringstruct::poly_by_rank(&field, rank, m);
            if cand.is_zero() || poly_gcd(&cand, g).degree() != Some(0) {
                continue;
            }
            let proj = cand.pow_mod(&kv, g);
            for ell in v_factors.keys() {
                if proj.pow_mod(&(v / ell), g) == Poly::one(&field) {
                    continue 'search;
                }
            }
            found = Some(proj);
            break;
        }
        found.expect("the v-torsion is cyclic of order v, generators exist")
    };

    let l_part = match fb_logs {
        Some(logs) if !l.is_one() => beta_l_element(fb, logs, ctx, l),
        _ => Poly::one(&field),
    };
    let combined = smooth_part.mul(&l_part).rem(g);

    // order verification over the known smooth primes and the L-part
    for ell in v_factors.keys() {
        if combined.pow_mod(&(&order / ell), g) == Poly::one(&field) {
            return Err(Error::Obstruction(format!(
                "combined generator has order dividing |F_g^x|/{}",
                ell
            )));
        }
    }
    if !l.is_one() {
        // beta_L's own order and the combined element, checked against the
        // primes of L (verification only; the extraction never factored L)
        for ell in intfactor::prime_divisors(l) {
            if l_part.pow_mod(&(l / &ell), g) == Poly::one(&field) {
                return Err(Error::Obstruction(format!(
                    "beta_L has order dividing L/{}",
                    ell
                )));
            }
            if combined.pow_mod(&(&order / &ell), g) == Poly::one(&field) {
                return Err(Error::Obstruction(format!(
                    "combined generator has order dividing |F_g^x|/{}",
                    ell
                )));
            }
        }
    }
    Ok(GlobalGenerator {
        smooth_part,
        l_part,
        combined,
        order,
    })
}
