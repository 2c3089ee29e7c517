//! Relation generation over `F_h` from Moebius-substituted versions of the
//! identity `prod_{a in F_q} (x - a) = x^q - x`: substituting
//! `x -> (aP+b)/(cP+d)` and then `x^q -> h_0/h_1` turns smooth numerators
//! into multiplicative relations between translates of `P` and small-degree
//! polynomials. Used with `P = x` for the factorbase and with general `P`
//! by the descent.

use crate::arith::factor::poly_factor;
use crate::arith::field::{lambda_dlog_table, ExtFieldElement, Field};
use crate::arith::poly::{poly_divmod, Poly};
use crate::error::Result;
use crate::modlinalg::RelationMatrix;
use crate::polyselect::SelectedPolynomials;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet, HashMap};

/// Representative of a left coset `PGL(2,q) * m` inside `PGL(2,q^2)`,
/// normalized so the first nonzero entry of (a, b, c, d) is 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoebiusRep {
    pub a: ExtFieldElement,
    pub b: ExtFieldElement,
    pub c: ExtFieldElement,
    pub d: ExtFieldElement,
    pub index: usize,
}

impl MoebiusRep {
    pub fn determinant(&self) -> ExtFieldElement {
        self.a.mul(&self.d).sub(&self.b.mul(&self.c))
    }

    pub fn is_identity(&self) -> bool {
        self.a.is_one() && self.b.is_zero() && self.c.is_zero() && self.d.is_one()
    }
}

type Mat = [ExtFieldElement; 4];

fn mat_key(m: &Mat) -> [u64; 4] {
    [m[0].rank(), m[1].rank(), m[2].rank(), m[3].rank()]
}

fn mat_mul(x: &Mat, y: &Mat) -> Mat {
    [
        x[0].mul(&y[0]).add(&x[1].mul(&y[2])),
        x[0].mul(&y[1]).add(&x[1].mul(&y[3])),
        x[2].mul(&y[0]).add(&x[3].mul(&y[2])),
        x[2].mul(&y[1]).add(&x[3].mul(&y[3])),
    ]
}

fn mat_det(m: &Mat) -> ExtFieldElement {
    m[0].mul(&m[3]).sub(&m[1].mul(&m[2]))
}

fn normalize(m: &Mat) -> Mat {
    let lead = m.iter().find(|e| !e.is_zero()).expect("nonzero matrix");
    let inv = lead.inverse().expect("nonzero");
    [
        m[0].mul(&inv),
        m[1].mul(&inv),
        m[2].mul(&inv),
        m[3].mul(&inv),
    ]
}

/// Normalized elements of PGL(2, k) for a coefficient set `k` (the subfield
/// or the whole field), sorted by entry ranks.
fn pgl_elements(elems: &[ExtFieldElement]) -> Vec<Mat> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for a in elems {
        for b in elems {
            for c in elems {
                for d in elems {
                    let m: Mat = [a.clone(), b.clone(), c.clone(), d.clone()];
                    if mat_det(&m).is_zero() {
                        continue;
                    }
                    let n = normalize(&m);
                    if seen.insert(mat_key(&n)) {
                        out.push(n);
                    }
                }
            }
        }
    }
    out
}

/// All q^3 + q left-coset representatives of PGL(2,q) in PGL(2,q^2), found
/// by exhaustive normal-form classification: the class key of `m` is the
/// minimal normalized `gamma * m` over gamma in PGL(2,q). The trivial coset
/// is represented by the identity, every other coset by its minimal element;
/// the list is sorted by class key.
pub fn pgl_coset_reps(field: &Field) -> Vec<MoebiusRep> {
    let subfield = field.subfield_q();
    let subgroup = pgl_elements(&subfield);
    let ambient = pgl_elements(&field.all_elements());
    let identity_key = {
        let id: Mat = [field.one(), field.zero(), field.zero(), field.one()];
        coset_key(&id, &subgroup)
    };
    let mut classes: BTreeMap<[u64; 4], Mat> = BTreeMap::new();
    for m in &ambient {
        let key = coset_key(m, &subgroup);
        classes.entry(key).or_insert_with(|| min_of_coset(m, &subgroup));
    }
    let expected = {
        let q = field.q as u128;
        (q * q * q + q) as usize
    };
    assert_eq!(classes.len(), expected, "coset count q^3 + q");
    classes
        .into_iter()
        .enumerate()
        .map(|(index, (key, m))| {
            let m = if key == identity_key {
                [field.one(), field.zero(), field.zero(), field.one()]
            } else {
                m
            };
            MoebiusRep {
                a: m[0].clone(),
                b: m[1].clone(),
                c: m[2].clone(),
                d: m[3].clone(),
                index,
            }
        })
        .collect()
}

fn coset_key(m: &Mat, subgroup: &[Mat]) -> [u64; 4] {
    mat_key(&min_of_coset(m, subgroup))
}

fn min_of_coset(m: &Mat, subgroup: &[Mat]) -> Mat {
    let mut best: Option<Mat> = None;
    for g in subgroup {
        let cand = normalize(&mat_mul(g, m));
        if best.as_ref().is_none_or(|b| mat_key(&cand) < mat_key(b)) {
            best = Some(cand);
        }
    }
    best.expect("nonempty subgroup")
}

/// Relation symbols: the field generator, h_1, then monic polynomials.
/// Ordinals are stable: lambda = 0, h_1 = 1, monics from 2 up.
#[derive(Debug, Clone)]
#[allow(clippy::len_without_is_empty)] // never empty: lambda and h_1 are always present
pub struct SymbolIndex {
    pub lambda: ExtFieldElement,
    pub h1: Poly,
    monics: Vec<Poly>,
    map: BTreeMap<Poly, usize>,
}

impl SymbolIndex {
    pub fn new(lambda: ExtFieldElement, h1: Poly) -> Self {
        SymbolIndex {
            lambda,
            h1,
            monics: Vec::new(),
            map: BTreeMap::new(),
        }
    }

    /// The factorbase S: lambda, h_1, and every monic linear polynomial in
    /// canonical order; |S| = q^2 + 2.
    pub fn factorbase(field: &Field, lambda: ExtFieldElement, h1: Poly) -> Self {
        let mut idx = SymbolIndex::new(lambda, h1);
        for rank in 0..field.q2() {
            let beta = field.element_by_rank(rank);
            idx.intern(Poly::x_minus(&beta.neg())); // x + beta, ranks in order
        }
        idx
    }

    /// Number of symbols (always at least 2: lambda and h_1).
    pub fn len(&self) -> usize {
        2 + self.monics.len()
    }

    /// Ordinal of a monic polynomial, interning it if new.
    pub fn intern(&mut self, p: Poly) -> usize {
        debug_assert!(p.is_monic());
        if let Some(&i) = self.map.get(&p) {
            return i;
        }
        let i = 2 + self.monics.len();
        self.map.insert(p.clone(), i);
        self.monics.push(p);
        i
    }

    pub fn ordinal_of(&self, p: &Poly) -> Option<usize> {
        self.map.get(p).copied()
    }

    /// The polynomial value of an ordinal (lambda as a constant).
    pub fn value(&self, ordinal: usize) -> Poly {
        match ordinal {
            0 => Poly::constant(self.lambda.clone()),
            1 => self.h1.clone(),
            i => self.monics[i - 2].clone(),
        }
    }

    pub fn token(&self, ordinal: usize) -> String {
        match ordinal {
            0 => "lambda".into(),
            1 => "h1".into(),
            i => self.monics[i - 2].compact(),
        }
    }

    pub fn monics(&self) -> &[Poly] {
        &self.monics
    }
}

/// Which modulus a relation holds for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModulusTag {
    H,
    HHat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    /// From the Moebius sweep; carries the coset index.
    Sweep { m_index: usize },
    /// The explicit Kummer relation x^(q-1) = lambda mod g.
    KummerPower,
    /// lambda^(q^2 - 1) = 1.
    LambdaOrder,
    /// h_1 expressed through its own factorization.
    H1Value,
    /// A translate that factors over the allowed degrees, recorded as an
    /// identity (descent side).
    TranslateSplit { beta_rank: u64 },
    /// The substituted full-field identity x^(q^2) - x (descent side).
    FieldEquation,
    /// Re-parsed from a relation file; the original non-sweep kind is not
    /// recorded in the line format.
    Added,
}

impl Provenance {
    pub fn m_index(&self) -> i64 {
        match self {
            Provenance::Sweep { m_index } => *m_index as i64,
            _ => -1,
        }
    }
}

/// A multiplicative relation: `prod symbol^exp = 1` modulo the tagged
/// modulus. Exponents are integers over symbol ordinals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub exponents: BTreeMap<usize, BigInt>,
    pub tag: ModulusTag,
    pub provenance: Provenance,
    /// P(x) the relation came from (x for the factorbase).
    pub source: Poly,
    /// Factors of h whose powers were cancelled or appear as symbols; the
    /// relation holds modulo h with these removed.
    pub involved: BTreeSet<Poly>,
}

impl Relation {
    pub fn dense_row(&self, cols: usize) -> Vec<BigInt> {
        let mut row = vec![BigInt::zero(); cols];
        for (&c, e) in &self.exponents {
            row[c] = e.clone();
        }
        row
    }
}

/// Direct check of the defining identity: evaluates `prod s^e mod modulus`
/// and compares with 1. Symbols with negative exponents must be units.
pub fn verify_relation(rel: &Relation, symbols: &SymbolIndex, modulus: &Poly) -> Result<bool> {
    let field = modulus.field().clone();
    let ring = ResidueRingLite { modulus };
    let mut acc = Poly::one(&field);
    for (&ordinal, exp) in &rel.exponents {
        let value = symbols.value(ordinal).rem(modulus);
        let part = ring.pow_signed(&value, exp)?;
        acc = acc.mul(&part).rem(modulus);
    }
    Ok(acc == Poly::one(&field))
}

/// Minimal modular-arithmetic view over an arbitrary modulus polynomial,
/// avoiding a full ResidueRing (no factorization needed to verify).
struct ResidueRingLite<'a> {
    modulus: &'a Poly,
}

impl ResidueRingLite<'_> {
    fn pow_signed(&self, a: &Poly, k: &BigInt) -> Result<Poly> {
        if k.is_zero() {
            return Ok(Poly::one(&a.field().clone()));
        }
        let base = if k.is_negative() {
            a.inverse_mod(self.modulus)?
        } else {
            a.clone()
        };
        Ok(base.pow_mod(k.magnitude(), self.modulus))
    }
}

/// Shared context for relation generation over one selected instance.
pub struct RelationContext {
    pub sel: SelectedPolynomials,
    pub field: Field,
    pub reps: Vec<MoebiusRep>,
    pub subfield: Vec<ExtFieldElement>,
    lambda_logs: HashMap<u64, u64>,
    /// Factors of h with multiplicities (g first, then cofactor factors).
    pub h_factors: Vec<(Poly, u32)>,
}

impl RelationContext {
    pub fn new(sel: &SelectedPolynomials) -> Result<Self> {
        let field = sel.field.clone();
        let reps = pgl_coset_reps(&field);
        let subfield = field.subfield_q();
        assert_eq!(subfield.len(), field.q as usize);
        let lambda_logs = lambda_dlog_table(&sel.lambda);
        let mut h_factors = vec![(sel.g.clone(), 1u32)];
        for (f, m) in &sel.cofactor_factorization.factors {
            if f == &sel.g {
                h_factors[0].1 += m;
            } else {
                h_factors.push((f.clone(), *m));
            }
        }
        Ok(RelationContext {
            sel: sel.clone(),
            field,
            reps,
            subfield,
            lambda_logs,
            h_factors,
        })
    }

    /// dlog of a nonzero constant with respect to lambda.
    pub fn lambda_log(&self, c: &ExtFieldElement) -> u64 {
        *self
            .lambda_logs
            .get(&c.rank())
            .expect("nonzero constant has a lambda-log")
    }

    /// Cofactor factors of h (everything except g), with multiplicities.
    pub fn cofactor_factors(&self) -> &[(Poly, u32)] {
        &self.h_factors[1..]
    }

    /// h with the full power of every listed cofactor factor removed; the
    /// modulus all trap-involved relations remain valid for.
    pub fn hhat_for(&self, involved: &BTreeSet<Poly>) -> Poly {
        let mut hhat = self.sel.h.clone();
        for (f, mult) in self.cofactor_factors() {
            if involved.contains(f) {
                for _ in 0..*mult {
                    hhat = poly_divmod(&hhat, f).expect("factor divides").0;
                }
            }
        }
        hhat
    }
}

/// The substituted identity as a fraction: N/D with D a power of h_1.
/// deg N <= (1 + deg h_0,1) * deg P.
pub fn numerator_denominator(
    m: &MoebiusRep,
    p: &Poly,
    h0: &Poly,
    h1: &Poly,
) -> (Poly, Poly) {
    let field = p.field();
    let w = p.degree().expect("P nonzero");
    let ptilde = p.frobenius_coeffs();
    // psub = sum_i ptilde_i h0^i h1^(w-i): P-tilde evaluated at h0/h1, cleared
    let mut h0_pows = vec![Poly::one(field)];
    let mut h1_pows = vec![Poly::one(field)];
    for i in 1..=w {
        h0_pows.push(h0_pows[i - 1].mul(h0));
        h1_pows.push(h1_pows[i - 1].mul(h1));
    }
    let mut psub = Poly::zero(field);
    for i in 0..=w {
        let c = ptilde.coeff(i);
        if c.is_zero() {
            continue;
        }
        psub = psub.add(&h0_pows[i].mul(&h1_pows[w - i]).mul_elem(&c));
    }
    let h1w = h1_pows[w].clone();
    let term_a = psub.mul_elem(&m.a.frobenius_q()).add(&h1w.mul_elem(&m.b.frobenius_q()));
    let term_c = psub.mul_elem(&m.c.frobenius_q()).add(&h1w.mul_elem(&m.d.frobenius_q()));
    let cp_d = p.mul_elem(&m.c).add(&Poly::constant(m.d.clone()));
    let ap_b = p.mul_elem(&m.a).add(&Poly::constant(m.b.clone()));
    let n = cp_d.mul(&term_a).sub(&ap_b.mul(&term_c));
    (n, h1w)
}

/// The left-hand side of the substituted identity: `(cP + d) *
/// prod_{alpha in F_q} ((a - alpha c) P + (b - alpha d))`, kept as raw
/// (scale, translate) factors.
fn lhs_factors(
    ctx: &RelationContext,
    m: &MoebiusRep,
) -> Vec<(ExtFieldElement, ExtFieldElement)> {
    let mut parts = vec![(m.c.clone(), m.d.clone())];
    for alpha in &ctx.subfield {
        parts.push((
            m.a.sub(&alpha.mul(&m.c)),
            m.b.sub(&alpha.mul(&m.d)),
        ));
    }
    parts
}

/// Outcome of one substitution attempt.
pub enum SweepOutcome {
    Relation(Relation),
    /// N had an irreducible factor above the smoothness bound.
    NotSmooth,
    /// N vanished identically or g divides a translate; skipped.
    Degenerate,
    /// g itself divides N (only possible in corner cases); skipped.
    GDividesN,
}

/// Attempts to turn one Moebius substitution into a relation: succeeds iff
/// `N` factors with every irreducible part of degree <= `smoothness_degree`
/// or dividing h. Translate exponents are 0/1; leading coefficients land in
/// the lambda exponent; powers of h-factors shared between the two sides are
/// cancelled and the relation re-tagged for the reduced modulus.
pub fn try_relation(
    ctx: &RelationContext,
    m: &MoebiusRep,
    p: &Poly,
    smoothness_degree: usize,
    symbols: &mut SymbolIndex,
) -> Result<SweepOutcome> {
    let w = p.degree().expect("P nonzero");
    let (n, _d) = numerator_denominator(m, p, &ctx.sel.h0, &ctx.sel.h1);
    if n.is_zero() {
        return Ok(SweepOutcome::Degenerate);
    }

    // LHS bookkeeping: constants to lambda, translates to their g-free class.
    let mut lambda_exp = BigInt::zero();
    let mut betas: Vec<ExtFieldElement> = Vec::new();
    for (u, v) in lhs_factors(ctx, m) {
        if u.is_zero() {
            if v.is_zero() {
                return Ok(SweepOutcome::Degenerate);
            }
            lambda_exp += BigInt::from(ctx.lambda_log(&v));
        } else {
            lambda_exp += BigInt::from(ctx.lambda_log(&u));
            let beta = v.mul(&u.inverse().unwrap()).neg();
            betas.push(beta);
        }
    }
    // distinct translates: e_beta in {0, 1}
    debug_assert_eq!(
        betas.iter().map(|b| b.rank()).collect::<BTreeSet<_>>().len(),
        betas.len()
    );

    // RHS: factor N.
    let n_fac = poly_factor(&n)?;
    let mut rhs_valuations: BTreeMap<Poly, BigInt> = BTreeMap::new();
    let mut smooth_parts: Vec<(Poly, u32)> = Vec::new();
    for (f, mult) in &n_fac.factors {
        if f == &ctx.sel.g {
            return Ok(SweepOutcome::GDividesN);
        }
        if ctx.cofactor_factors().iter().any(|(c, _)| c == f) {
            *rhs_valuations.entry(f.clone()).or_default() += BigInt::from(*mult);
        } else if f.degree().unwrap() <= smoothness_degree {
            smooth_parts.push((f.clone(), *mult));
        } else {
            return Ok(SweepOutcome::NotSmooth);
        }
    }
    lambda_exp -= BigInt::from(ctx.lambda_log(&n_fac.unit));

    // Translate classes and their h-factor content.
    let mut terms: BTreeMap<usize, BigInt> = BTreeMap::new();
    let mut involved: BTreeSet<Poly> = BTreeSet::new();
    let mut lhs_valuations: BTreeMap<Poly, BigInt> = BTreeMap::new();
    for beta in &betas {
        let translate = p.sub(&Poly::constant(beta.clone()));
        let (class, val) = split_off_h_factors(ctx, &translate);
        if poly_divmod(&class, &ctx.sel.g)
            .map(|(_, r)| r.is_zero())
            .unwrap_or(false)
        {
            return Ok(SweepOutcome::Degenerate);
        }
        for (f, v) in val {
            *lhs_valuations.entry(f.clone()).or_default() += BigInt::from(v);
            involved.insert(f);
        }
        if !class.is_constant() {
            let ord = symbols.intern(class);
            *terms.entry(ord).or_default() += 1;
        }
        // class is monic by construction, no unit leaks
    }

    // Net trap exponents s_i = V_i(N) - sum_beta V_i(P - beta).
    for (f, _) in ctx.cofactor_factors() {
        let n_i = rhs_valuations.get(f).cloned().unwrap_or_default();
        let l_i = lhs_valuations.get(f).cloned().unwrap_or_default();
        if !n_i.is_zero() {
            involved.insert(f.clone());
        }
        let s_i = &n_i - &l_i;
        if !s_i.is_zero() {
            let ord = symbols.intern(f.clone());
            *terms.entry(ord).or_default() -= s_i;
        }
    }

    // Smooth factors move to the relation with negative exponent.
    for (f, mult) in smooth_parts {
        let ord = symbols.intern(f);
        *terms.entry(ord).or_default() -= BigInt::from(mult);
    }
    // h_1^w from the cleared denominator.
    *terms.entry(1).or_default() += BigInt::from(w);
    if !lambda_exp.is_zero() {
        *terms.entry(0).or_default() += lambda_exp;
    }
    terms.retain(|_, e| !e.is_zero());

    let tag = if involved.is_empty() {
        ModulusTag::H
    } else {
        ModulusTag::HHat
    };
    Ok(SweepOutcome::Relation(Relation {
        exponents: terms,
        tag,
        provenance: Provenance::Sweep { m_index: m.index },
        source: p.clone(),
        involved,
    }))
}

/// Divides out the full power of every cofactor factor of h, returning the
/// h-coprime class and the removed valuations.
pub fn split_off_h_factors(ctx: &RelationContext, p: &Poly) -> (Poly, Vec<(Poly, u32)>) {
    let mut class = p.clone();
    let mut vals = Vec::new();
    for (f, _) in ctx.cofactor_factors() {
        let mut v = 0u32;
        loop {
            let (q, r) = poly_divmod(&class, f).expect("nonzero factor");
            if r.is_zero() {
                class = q;
                v += 1;
            } else {
                break;
            }
        }
        if v > 0 {
            vals.push((f.clone(), v));
        }
    }
    (class, vals)
}

/// Factorbase relation set for one selected instance.
pub struct FactorbaseRelations {
    pub symbols: SymbolIndex,
    pub relations: Vec<Relation>,
    pub matrix: RelationMatrix,
    /// Modulus that every collected relation verifies against (h with the
    /// involved trap factors removed; g in the Kummer case).
    pub hhat: Poly,
    pub stats: SweepStats,
}

#[derive(Debug, Clone, Default)]
pub struct SweepStats {
    pub attempted: usize,
    pub not_smooth: usize,
    pub degenerate: usize,
    pub g_divides_n: usize,
    /// Relations touching symbols outside the factorbase (trap factors of
    /// degree >= 2); counted and dropped.
    pub foreign_symbols: usize,
    pub duplicates: usize,
}

/// Sweeps P = x over every coset representative with smoothness degree 1,
/// keeps the S-supported relations, and appends the always-true rows:
/// lambda's order, h_1's own factorization when it splits over S, and the
/// Kummer power relation when the selection is the Kummer one.
pub fn collect_factorbase_relations(ctx: &RelationContext) -> Result<FactorbaseRelations> {
    let field = ctx.field.clone();
    let symbols = SymbolIndex::factorbase(&field, ctx.sel.lambda.clone(), ctx.sel.h1.clone());
    let base_len = symbols.len();
    let x = Poly::x(&field);
    let mut stats = SweepStats::default();
    let mut relations: Vec<Relation> = Vec::new();
    let mut seen: BTreeSet<Vec<(usize, BigInt)>> = BTreeSet::new();
    let mut involved: BTreeSet<Poly> = BTreeSet::new();

    for m in &ctx.reps {
        stats.attempted += 1;
        // scratch index: rows that intern symbols outside S are dropped
        let mut scratch = symbols.clone();
        match try_relation(ctx, m, &x, 1, &mut scratch)? {
            SweepOutcome::NotSmooth => stats.not_smooth += 1,
            SweepOutcome::Degenerate => stats.degenerate += 1,
            SweepOutcome::GDividesN => stats.g_divides_n += 1,
            SweepOutcome::Relation(rel) => {
                if scratch.len() > base_len {
                    stats.foreign_symbols += 1;
                    continue;
                }
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

    // lambda^(q^2-1) = 1 always holds in F_h^x.
    let mut lam_order = BTreeMap::new();
    lam_order.insert(0usize, BigInt::from(field.unit_order()));
    relations.push(Relation {
        exponents: lam_order,
        tag: ModulusTag::H,
        provenance: Provenance::LambdaOrder,
        source: x.clone(),
        involved: BTreeSet::new(),
    });

    // Pin h_1: either a constant (pure lambda power) or a product of
    // factorbase linears.
    let h1 = ctx.sel.h1.clone();
    if h1.is_constant() {
        let mut e = BTreeMap::new();
        e.insert(1usize, BigInt::one());
        let c = h1.coeff(0);
        let k = ctx.lambda_log(&c);
        if k != 0 {
            e.insert(0usize, -BigInt::from(k));
        }
        relations.push(Relation {
            exponents: e,
            tag: ModulusTag::H,
            provenance: Provenance::H1Value,
            source: x.clone(),
            involved: BTreeSet::new(),
        });
    } else {
        let fac = poly_factor(&h1)?;
        if fac.factors.iter().all(|(f, _)| f.degree() == Some(1)) {
            let mut e: BTreeMap<usize, BigInt> = BTreeMap::new();
            e.insert(1usize, BigInt::one());
            let k = ctx.lambda_log(&fac.unit);
            if k != 0 {
                *e.entry(0).or_default() -= BigInt::from(k);
            }
            for (f, mult) in &fac.factors {
                let ord = symbols.ordinal_of(f).expect("linear is in S");
                *e.entry(ord).or_default() -= BigInt::from(*mult);
            }
            e.retain(|_, v| !v.is_zero());
            relations.push(Relation {
                exponents: e,
                tag: ModulusTag::H,
                provenance: Provenance::H1Value,
                source: x.clone(),
                involved: BTreeSet::new(),
            });
        }
    }

    // Kummer: x^(q-1) = lambda mod g lets x join the factorbase.
    if ctx.sel.kummer {
        let mut e = BTreeMap::new();
        let x_ord = symbols.ordinal_of(&x).expect("x is a monic linear");
        e.insert(x_ord, BigInt::from(field.q - 1));
        e.insert(0usize, -BigInt::one());
        involved.insert(x.clone());
        relations.push(Relation {
            exponents: e,
            tag: ModulusTag::HHat,
            provenance: Provenance::KummerPower,
            source: x.clone(),
            involved: BTreeSet::from([x.clone()]),
        });
    }

    let hhat = ctx.hhat_for(&involved);
    let mut matrix = RelationMatrix::new(symbols.len());
    for rel in &relations {
        matrix.push_row(
            rel.dense_row(symbols.len()),
            format!("m={}", rel.provenance.m_index()),
        );
    }
    Ok(FactorbaseRelations {
        symbols,
        relations,
        matrix,
        hhat,
        stats,
    })
}

impl FactorbaseRelations {
    /// The modulus a relation's tag refers to.
    pub fn tag_modulus<'a>(&'a self, rel: &Relation, h: &'a Poly) -> &'a Poly {
        match rel.tag {
            ModulusTag::H => h,
            ModulusTag::HHat => &self.hhat,
        }
    }

    /// Rebuild from parsed artifact parts (sweep statistics are not stored
    /// in the file format).
    pub fn from_parts(symbols: SymbolIndex, relations: Vec<Relation>, hhat: Poly) -> Self {
        let mut matrix = RelationMatrix::new(symbols.len());
        for rel in &relations {
            matrix.push_row(
                rel.dense_row(symbols.len()),
                format!("m={}", rel.provenance.m_index()),
            );
        }
        FactorbaseRelations {
            symbols,
            relations,
            matrix,
            hhat,
            stats: SweepStats::default(),
        }
    }
}
