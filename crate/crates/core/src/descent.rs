//! The descent: recursively rewrites a target polynomial as a product of
//! factorbase elements modulo L, one halving step at a time. Each step
//! sweeps the Moebius substitutions for the node polynomial P, salvages
//! relations that touch factors of h by re-tagging them modulo
//! `hhat = h / (involved factors)`, and eliminates the translate classes
//! V_P = {(P - beta)/gcd(P - beta, h/g)} together with the trapped factors
//! G_P in one linear system.

use crate::arith::factor::poly_factor;
use crate::arith::field::ExtFieldElement;
use crate::arith::poly::{poly_gcd, Poly};
use crate::error::{Error, Result};
use crate::modlinalg::{eliminate, DlogResult, RelationMatrix};
use crate::relgen::{
    split_off_h_factors, try_relation, verify_relation, FactorbaseRelations, ModulusTag,
    Provenance, Relation, RelationContext, SweepOutcome, SweepStats, SymbolIndex,
};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};

/// One descent step: the node polynomial, its V-block (translate classes of
/// degree above the halving bound plus the involved h-factors), the salvage
/// modulus hhat, and the collected relations.
#[derive(Debug)]
pub struct DescentNode {
    pub p: Poly,
    pub degree: usize,
    pub smoothness_degree: usize,
    pub symbols: SymbolIndex,
    pub relations: Vec<Relation>,
    /// Ordinals of the V-block: translate classes needing elimination plus
    /// the members of G_P.
    pub v_ordinals: Vec<usize>,
    /// Factors of h appearing with nonzero net exponent in some relation.
    pub g_p: Vec<Poly>,
    /// h with every involved factor's full power removed; every relation
    /// verifies modulo this.
    pub hhat: Poly,
    pub stats: SweepStats,
}

impl DescentNode {
    /// Children: U-side monic irreducibles of degree >= 2 (these need their
    /// own descent; linears resolve against the factorbase).
    pub fn children(&self) -> Vec<Poly> {
        let v_set: BTreeSet<usize> = self.v_ordinals.iter().copied().collect();
        let mut out = Vec::new();
        for (i, m) in self.symbols.monics().iter().enumerate() {
            let ord = i + 2;
            if v_set.contains(&ord) {
                continue;
            }
            if m.degree().is_some_and(|d| d >= 2) {
                out.push(m.clone());
            }
        }
        out
    }
}

/// Runs the substitution sweep for P, augments with translate factorization
/// identities, and assembles the node. Fails with NoRelations on an empty
/// sweep.
pub fn descend_step(ctx: &RelationContext, p: &Poly) -> Result<DescentNode> {
    let field = ctx.field.clone();
    let w = p.degree().expect("nonzero P");
    assert!(w >= 2, "descend from degree >= 2");
    assert!(
        w < ctx.sel.h.degree().unwrap(),
        "node degree below deg h (targets are reduced mod g first)"
    );
    assert!(p.is_monic());
    assert_eq!(
        poly_gcd(p, &ctx.sel.h).degree(),
        Some(0),
        "node polynomial must be a unit mod h"
    );
    let sd = w.div_ceil(2);
    let mut symbols = SymbolIndex::new(ctx.sel.lambda.clone(), ctx.sel.h1.clone());
    let mut relations: Vec<Relation> = Vec::new();
    let mut seen: BTreeSet<Vec<(usize, BigInt)>> = BTreeSet::new();
    let mut stats = SweepStats::default();
    let mut involved: BTreeSet<Poly> = BTreeSet::new();

    for m in &ctx.reps {
        stats.attempted += 1;
        match try_relation(ctx, m, p, sd, &mut symbols)? {
            SweepOutcome::NotSmooth => stats.not_smooth += 1,
            SweepOutcome::Degenerate => stats.degenerate += 1,
            SweepOutcome::GDividesN => stats.g_divides_n += 1,
            SweepOutcome::Relation(rel) => {
                let key: Vec<(usize, BigInt)> =
                    rel.exponents.iter().map(|(&c, e)| (c, e.clone())).collect();
                if !seen.insert(key) {
                    stats.duplicates += 1;
                    continue;
                }
                involved.extend(rel.involved.iter().cloned());
                relations.push(rel);
            }
        }
    }
    if relations.is_empty() {
        return Err(Error::NoRelations { p: p.compact() });
    }

    // V-block prepass over all translates: classes above the halving bound
    // become unknowns; classes that factor over the bound also contribute an
    // identity row. Small classes live on the U side inside the relations.
    let mut v_ords: BTreeSet<usize> = BTreeSet::new();
    for rank in 0..field.q2() {
        let beta = field.element_by_rank(rank);
        let translate = p.sub(&Poly::constant(beta));
        let (class, _) = split_off_h_factors(ctx, &translate);
        if class.is_constant() || class.degree().unwrap() <= sd {
            continue;
        }
        let ord = symbols.intern(class.clone());
        v_ords.insert(ord);
        let fac = poly_factor(&class)?;
        if fac
            .factors
            .iter()
            .all(|(f, _)| f.degree().unwrap() <= sd)
        {
            debug_assert!(fac.unit.is_one(), "monic class splits with unit 1");
            let mut exps: BTreeMap<usize, BigInt> = BTreeMap::new();
            exps.insert(ord, BigInt::one());
            for (f, mult) in &fac.factors {
                let u = symbols.intern(f.clone());
                *exps.entry(u).or_default() -= BigInt::from(*mult);
            }
            relations.push(Relation {
                exponents: exps,
                tag: ModulusTag::H,
                provenance: Provenance::TranslateSplit { beta_rank: rank },
                source: p.clone(),
                involved: BTreeSet::new(),
            });
        }
    }

    // G_P: h-factors appearing as symbols in some relation.
    let mut g_p = Vec::new();
    for (f, _) in ctx.cofactor_factors() {
        if let Some(ord) = symbols.ordinal_of(f) {
            if relations.iter().any(|r| r.exponents.contains_key(&ord)) {
                v_ords.insert(ord);
                g_p.push(f.clone());
            }
        }
    }

    let hhat = ctx.hhat_for(&involved);
    // Every relation holds modulo hhat (H-tagged rows hold modulo h, hence
    // modulo the divisor hhat as well); re-verified here per step.
    for rel in &relations {
        debug_assert!(
            verify_relation(rel, &symbols, &hhat)?,
            "relation must verify modulo hhat: {:?}",
            rel.provenance
        );
    }

    // Fan-out bound: |V_P| <= q^2 + number of h-factors, by construction.
    assert!(v_ords.len() <= (field.q2() as usize) + ctx.cofactor_factors().len());

    Ok(DescentNode {
        p: p.clone(),
        degree: w,
        smoothness_degree: sd,
        symbols,
        relations,
        v_ordinals: v_ords.into_iter().collect(),
        g_p,
        hhat,
        stats,
    })
}

/// Eliminates the V-block of a node modulo L: every translate class and
/// every G_P member expressed over {lambda, h_1, U_P}. The rank condition
/// is tested by the engine itself, which fails with
/// DescentRankDeficient when some V-column cannot be pivoted.
pub fn eliminate_step(
    node: &DescentNode,
    l: &BigUint,
) -> Result<BTreeMap<usize, Vec<BigUint>>> {
    let cols = node.symbols.len();
    let mut matrix = RelationMatrix::new(cols);
    for rel in &node.relations {
        matrix.push_row(rel.dense_row(cols), format!("m={}", rel.provenance.m_index()));
    }
    let elim = eliminate(&matrix, &node.v_ordinals, l)?;
    Ok(elim.expressions)
}

/// Checks an elimination in field arithmetic: for each v in the V-block,
/// the projections of v and of its U-expression to `F_g^x[L]` must coincide.
pub fn verify_eliminations(
    ctx: &RelationContext,
    node: &DescentNode,
    l: &BigUint,
    expressions: &BTreeMap<usize, Vec<BigUint>>,
) -> Result<()> {
    let g = &ctx.sel.g;
    let order_g = ctx.sel.params.group_order();
    let cofactor = &order_g / l;
    assert!(cofactor.gcd(l).is_one(), "L must split off |F_g^x| cleanly");
    // pi(x) = x^K with K = cofactor * (cofactor^-1 mod L): kills the
    // non-L part and fixes the L-torsion.
    let k = projection_exponent(&order_g, l);
    for (&v_ord, expr) in expressions {
        let v = node.symbols.value(v_ord).rem(g);
        let lhs = v.pow_mod(&k, g);
        let mut rhs = Poly::one(&ctx.field);
        for (u_ord, coeff) in expr.iter().enumerate() {
            if coeff.is_zero() || u_ord == v_ord {
                continue;
            }
            let base = node.symbols.value(u_ord).rem(g);
            rhs = rhs.mul(&base.pow_mod(coeff, g)).rem(g);
        }
        let rhs = rhs.pow_mod(&k, g);
        if lhs != rhs {
            return Err(Error::Obstruction(format!(
                "elimination of {} fails the projection check",
                node.symbols.value(v_ord).compact()
            )));
        }
    }
    Ok(())
}

/// K = c * (c^-1 mod L) for c = order/L: projection onto the L-torsion.
pub fn projection_exponent(order: &BigUint, l: &BigUint) -> BigUint {
    if l.is_one() {
        return order.clone();
    }
    let c = order / l;
    let c_int = BigInt::from(c.clone());
    let l_int = BigInt::from(l.clone());
    let inv = c_int.extended_gcd(&l_int).x;
    let inv = ((inv % &l_int) + &l_int) % &l_int;
    &c * inv.to_biguint().expect("normalized")
}

/// Seeded re-randomization of the descent start: returns `target^e mod g`
/// with e coprime to |F_g^x| and the result coprime to h. The first draw is
/// e = 1, so already-coprime targets descend unchanged.
pub fn randomize_start(
    ctx: &RelationContext,
    target: &Poly,
    rng: &mut ChaCha8Rng,
    first_attempt: bool,
) -> Result<(Poly, BigUint)> {
    let g = &ctx.sel.g;
    let order = ctx.sel.params.group_order();
    assert!(
        poly_gcd(target, g).degree() == Some(0),
        "target must be a unit mod g"
    );
    let bound = 64;
    for i in 0..bound {
        let e = if first_attempt && i == 0 {
            BigUint::one()
        } else {
            // draw below the group order until coprime
            let raw = rng.gen_range(1..u64::MAX);
            let e = BigUint::from(raw) % &order;
            if e.is_zero() || !e.gcd(&order).is_one() {
                continue;
            }
            e
        };
        let p = target.pow_mod(&e, g);
        if !p.is_zero() && poly_gcd(&p, &ctx.sel.h).degree() == Some(0) {
            return Ok((p, e));
        }
    }
    Err(Error::RandomizeExhausted { bound })
}

/// Per-node record kept for reporting and the structural property checks.
#[derive(Debug, Clone)]
pub struct NodeSummary {
    pub p: Poly,
    pub degree: usize,
    pub smoothness_degree: usize,
    pub depth: usize,
    pub relation_count: usize,
    pub v_count: usize,
    pub g_p: Vec<Poly>,
    pub hhat: Poly,
    pub children: Vec<Poly>,
    pub max_child_degree: usize,
}

/// The resolved tree: every node that was built, the symbol cache, and the
/// final statistics.
#[derive(Debug, Default)]
pub struct DescentTree {
    pub nodes: Vec<NodeSummary>,
    pub resolved: BTreeMap<Poly, BigUint>,
    pub max_depth: usize,
    pub attempts: usize,
}

struct Resolver<'a> {
    ctx: &'a RelationContext,
    fb: &'a FactorbaseRelations,
    fb_logs: &'a DlogResult,
    l: BigUint,
    memo: BTreeMap<Poly, BigUint>,
    tree: DescentTree,
}

impl<'a> Resolver<'a> {
    /// dlog of an arbitrary nonzero residue: leading unit plus monic part.
    fn resolve_value(&mut self, v: &Poly, depth: usize) -> Result<BigUint> {
        let v = v.rem(&self.ctx.sel.g);
        assert!(!v.is_zero());
        let (lc, monic) = v.monic();
        let mut acc = self.constant_log(&lc);
        let fac = poly_factor(&monic)?;
        for (f, mult) in &fac.factors {
            let part = self.resolve_monic(f, depth)?;
            acc = (acc + part * BigUint::from(*mult)) % &self.l;
        }
        Ok(acc)
    }

    fn constant_log(&self, c: &ExtFieldElement) -> BigUint {
        let k = self.ctx.lambda_log(c);
        (BigUint::from(k) * &self.fb_logs.logs[0]) % &self.l
    }

    fn resolve_monic(&mut self, f: &Poly, depth: usize) -> Result<BigUint> {
        if let Some(hit) = self.memo.get(f) {
            return Ok(hit.clone());
        }
        self.tree.max_depth = self.tree.max_depth.max(depth);
        let log = match f.degree().unwrap() {
            0 => BigUint::zero(),
            1 => {
                let ord = self
                    .fb
                    .symbols
                    .ordinal_of(f)
                    .expect("monic linear is in the factorbase");
                self.fb_logs.logs[ord].clone()
            }
            _ => {
                let divides_h = crate::arith::poly::poly_divmod(&self.ctx.sel.h, f)
                    .map(|(_, r)| r.is_zero())
                    .unwrap_or(false);
                if divides_h {
                    self.resolve_trap(f, depth)?
                } else {
                    self.resolve_by_node(f, depth)?
                }
            }
        };
        self.memo.insert(f.clone(), log.clone());
        Ok(log)
    }

    fn resolve_by_node(&mut self, f: &Poly, depth: usize) -> Result<BigUint> {
        let node = descend_step(self.ctx, f)?;
        let expressions = eliminate_step(&node, &self.l)?;
        verify_eliminations(self.ctx, &node, &self.l, &expressions)?;
        self.record_node(&node, depth);
        let my_ord = node
            .symbols
            .ordinal_of(f)
            .expect("own class is a V-column");
        let expr = expressions[&my_ord].clone();
        self.eval_expression(&node, &expr, depth)
    }

    /// Resolves a trap factor g_i of h through constructed auxiliary nodes
    /// whose V-block contains g_i: P = g_i + beta or g_i (x - r) + beta.
    fn resolve_trap(&mut self, gi: &Poly, depth: usize) -> Result<BigUint> {
        let field = self.ctx.field.clone();
        let mut candidates: Vec<Poly> = Vec::new();
        for rank in 1..field.q2() {
            let beta = field.element_by_rank(rank);
            candidates.push(gi.add(&Poly::constant(beta)));
        }
        for r_rank in 0..field.q2() {
            let lin = Poly::x_minus(&field.element_by_rank(r_rank));
            for b_rank in 1..field.q2() {
                let beta = field.element_by_rank(b_rank);
                candidates.push(gi.mul(&lin).add(&Poly::constant(beta)));
            }
        }
        let mut attempts = 0usize;
        for p in candidates {
            if attempts >= 48 {
                break;
            }
            if p.degree().is_none_or(|d| d >= self.ctx.sel.h.degree().unwrap()) {
                continue;
            }
            if poly_gcd(&p, &self.ctx.sel.h).degree() != Some(0) {
                continue;
            }
            if p.rem(&self.ctx.sel.g).is_constant() {
                continue;
            }
            attempts += 1;
            let Ok(node) = descend_step(self.ctx, &p) else {
                continue;
            };
            let Some(gi_ord) = node.symbols.ordinal_of(gi) else {
                continue;
            };
            if !node.v_ordinals.contains(&gi_ord) {
                continue;
            }
            let Ok(expressions) = eliminate_step(&node, &self.l) else {
                continue;
            };
            if verify_eliminations(self.ctx, &node, &self.l, &expressions).is_err() {
                continue;
            }
            self.record_node(&node, depth);
            let expr = expressions[&gi_ord].clone();
            if let Ok(log) = self.eval_expression(&node, &expr, depth) {
                return Ok(log);
            }
        }
        Err(Error::DescentExhausted {
            p: gi.compact(),
            attempts,
        })
    }

    /// Sum of coeff * dlog(symbol) over the U-side of an expression.
    fn eval_expression(
        &mut self,
        node: &DescentNode,
        expr: &[BigUint],
        depth: usize,
    ) -> Result<BigUint> {
        let mut acc = BigUint::zero();
        for (ord, coeff) in expr.iter().enumerate() {
            if coeff.is_zero() {
                continue;
            }
            let part = match ord {
                0 => self.fb_logs.logs[0].clone(),
                1 => self.fb_logs.logs[1].clone(),
                _ => {
                    let value = node.symbols.value(ord);
                    self.resolve_monic(&value, depth + 1)?
                }
            };
            acc = (acc + part * coeff) % &self.l;
        }
        Ok(acc)
    }

    fn record_node(&mut self, node: &DescentNode, depth: usize) {
        let children = node.children();
        let max_child_degree = children
            .iter()
            .map(|c| c.degree().unwrap())
            .max()
            .unwrap_or(0);
        self.tree.nodes.push(NodeSummary {
            p: node.p.clone(),
            degree: node.degree,
            smoothness_degree: node.smoothness_degree,
            depth,
            relation_count: node.relations.len(),
            v_count: node.v_ordinals.len(),
            g_p: node.g_p.clone(),
            hhat: node.hhat.clone(),
            children,
            max_child_degree,
        });
        self.tree.max_depth = self.tree.max_depth.max(depth);
    }
}

/// beta_L as a field element: the projection of the generator description's
/// image to `F_g^x[L]`.
pub fn beta_l_element(
    fb: &FactorbaseRelations,
    fb_logs: &DlogResult,
    ctx: &RelationContext,
    l: &BigUint,
) -> Poly {
    let g = &ctx.sel.g;
    let order = ctx.sel.params.group_order();
    let k = projection_exponent(&order, l);
    let mut acc = Poly::one(&ctx.field);
    for (ord, e) in fb_logs.generator_description.iter().enumerate() {
        if e.is_zero() {
            continue;
        }
        let base = fb.symbols.value(ord).rem(g);
        acc = acc.mul(&base.pow_mod(e, g)).rem(g);
    }
    acc.pow_mod(&k, g)
}

/// Full recursive descent: discrete log of the target's projection in
/// `F_g^x[L]` with respect to beta_L. Retries with fresh randomizations when a
/// node fails its rank condition; every success is verified in field
/// arithmetic before being returned.
pub fn full_descent(
    ctx: &RelationContext,
    fb: &FactorbaseRelations,
    fb_logs: &DlogResult,
    target: &Poly,
    l: &BigUint,
    seed: u64,
) -> Result<(BigUint, DescentTree)> {
    let g = &ctx.sel.g;
    let target = target.rem(g);
    if target.is_zero() || poly_gcd(&target, g).degree() != Some(0) {
        return Err(Error::TargetNotUnit);
    }
    if l.is_one() {
        return Ok((BigUint::zero(), DescentTree::default()));
    }
    let order = ctx.sel.params.group_order();
    let mut resolver = Resolver {
        ctx,
        fb,
        fb_logs,
        l: l.clone(),
        memo: BTreeMap::new(),
        tree: DescentTree::default(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let attempts = 24;
    let mut last_err = None;
    for attempt in 0..attempts {
        resolver.tree.attempts = attempt + 1;
        // Attempt 0 resolves the target directly (factoring handles shared
        // h-factors through the trap machinery); later attempts rerandomize
        // for fresh node luck. Targets whose powers never become h-coprime
        // (monomials in the Kummer case) cannot rerandomize, so a failed
        // draw ends the retries rather than erroring out immediately.
        let drawn = if attempt == 0 {
            Ok((target.clone(), BigUint::one()))
        } else {
            randomize_start(ctx, &target, &mut rng, false)
        };
        let (p, e) = match drawn {
            Ok(pe) => pe,
            Err(err) => {
                last_err = Some(err);
                break;
            }
        };
        match resolver.resolve_value(&p, 0) {
            Ok(log_p) => {
                // unwind the randomization: log(target) = e^-1 * log(P') mod L
                let e_int = BigInt::from(e.clone());
                let l_int = BigInt::from(l.clone());
                let inv = e_int.extended_gcd(&l_int).x;
                let inv = (((inv % &l_int) + &l_int) % &l_int)
                    .to_biguint()
                    .expect("normalized");
                let log = (log_p * inv) % l;
                // final verification: beta_L^log equals the target projection
                let beta = beta_l_element(fb, fb_logs, ctx, l);
                let k = projection_exponent(&order, l);
                if beta.pow_mod(&log, g) == target.pow_mod(&k, g) {
                    let mut tree = std::mem::take(&mut resolver.tree);
                    tree.resolved = resolver.memo.clone();
                    return Ok((log, tree));
                }
                last_err = Some(Error::Obstruction(
                    "descent result failed the final projection check".into(),
                ));
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or(Error::DescentExhausted {
        p: target.compact(),
        attempts,
    }))
}
