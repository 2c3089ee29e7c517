//! Acceptance suite: one test per acceptance criterion, each printing a
//! PASS line (run with `--nocapture` to see them). Tolerances and limits
//! are pinned here, not deferred.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;
use subfield_dlog::arith::factor::{is_irreducible, poly_factor};
use subfield_dlog::arith::intfactor;
use subfield_dlog::arith::poly::{poly_gcd, Poly};
use subfield_dlog::descent::{
    descend_step, eliminate_step, full_descent, projection_exponent, verify_eliminations,
};
use subfield_dlog::dlp::{brute_force_dlog, Pipeline};
use subfield_dlog::error::Error;
use subfield_dlog::modlinalg::{
    decompose_and_solve, dlogs_agree_up_to_unit, dlogs_via_snf, modulus_split, rank_mod_ell,
    smith_normal_form, RelationMatrix,
};
use subfield_dlog::polyselect::{
    build_h, choose_embedding, is_c_good, select_kummer, EmbeddingParams, SelectedPolynomials,
    SelectionStrategy,
};
use subfield_dlog::relgen::{
    collect_factorbase_relations, verify_relation, ModulusTag, Provenance, RelationContext,
};
use subfield_dlog::ringstruct::{
    ell_primary_cyclic, poly_by_rank, unit_group_profile, ResidueRing,
};

fn pass(name: &str) {
    println!("[acceptance] {}: PASS", name);
}

fn crafted_selection(
    params: EmbeddingParams,
    field: subfield_dlog::arith::field::Field,
    h: Poly,
    g: Poly,
) -> SelectedPolynomials {
    // express h as h1 x^q - h0 with h1 = x^q (monic), h0 = x^{2q} - h
    let xq = Poly::monomial(&field, field.one(), params.q as usize);
    let h1 = xq.clone();
    let h0 = xq.mul(&xq).sub(&h);
    assert_eq!(build_h(&field, params.q, &h0, &h1), h);
    let cof = subfield_dlog::arith::poly::poly_divmod(&h, &g).unwrap().0;
    SelectedPolynomials {
        params,
        field: field.clone(),
        lambda: subfield_dlog::arith::field::find_multiplicative_generator(&field),
        h0,
        h1,
        h,
        g,
        cofactor_factorization: poly_factor(&cof).unwrap(),
        kummer: false,
    }
}

/// Criterion 1: Kummer end-to-end (p=3, n=2): all 80 units of F_81 solved
/// to exact equality with the brute-force oracle in under 10 seconds, with
/// the x^(q-1) = lambda relation present in the relation set, and the
/// factorbase dlogs mod 5 reproducing brute force in the 5-torsion.
#[test]
fn kummer_end_to_end() {
    let start = Instant::now();
    let pipe = Pipeline::build(3, 2, 1, 1, SelectionStrategy::Auto, None).unwrap();
    let field = pipe.field.clone();
    let lam = pipe.sel.lambda.clone();
    // pinned instance: h = x^3 - lambda x, g = x^2 - lambda
    let expect_h = Poly::monomial(&field, field.one(), 3)
        .sub(&Poly::monomial(&field, lam.clone(), 1));
    let expect_g = Poly::monomial(&field, field.one(), 2).sub(&Poly::constant(lam.clone()));
    assert_eq!(pipe.sel.h, expect_h);
    assert_eq!(pipe.sel.g, expect_g);
    assert_eq!(pipe.params.group_order(), BigUint::from(80u32));

    // the Kummer relation x^{q-1} = lambda appears in the relation set
    let x = Poly::x(&field);
    let x_ord = pipe.fb.symbols.ordinal_of(&x).unwrap();
    let kummer_rel = pipe
        .fb
        .relations
        .iter()
        .find(|r| r.provenance == Provenance::KummerPower)
        .expect("Kummer power relation present");
    assert_eq!(kummer_rel.exponents[&x_ord], BigInt::from(2));
    assert_eq!(kummer_rel.exponents[&0], BigInt::from(-1));

    // solve every unit of F_81 and compare with the oracle, exact equality
    let g = &pipe.sel.g;
    let order = pipe.params.group_order();
    let gen = pipe.generator.combined.clone();
    let mut solved = 0;
    for rank in 1..81u64 {
        let t = poly_by_rank(&field, rank, 2);
        let xlog = pipe.solve(&t, rank).unwrap();
        let oracle = brute_force_dlog(g, &gen, &t, &order).unwrap().unwrap();
        assert_eq!(xlog, oracle, "unit {:?}", t);
        solved += 1;
    }
    assert_eq!(solved, 80);

    // factorbase extraction mod L = 5 matches brute force in the 5-torsion
    let l = BigUint::from(5u32);
    let dec = decompose_and_solve(&pipe.fb.matrix, &l).unwrap();
    assert!(dec.violations.is_empty());
    let logs = dec.to_dlog_result(&l);
    let beta5 = subfield_dlog::descent::beta_l_element(&pipe.fb, &logs, &pipe.ctx, &l);
    let k = projection_exponent(&order, &l);
    for ord in 0..pipe.fb.symbols.len() {
        let s = pipe.fb.symbols.value(ord).rem(g);
        let projected = s.pow_mod(&k, g);
        // brute-force dlog within the 5-torsion
        let oracle = brute_force_dlog(g, &beta5, &projected, &BigUint::from(5u32))
            .unwrap()
            .expect("projection lies in <beta_5>");
        assert_eq!(logs.logs[ord], oracle);
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {:?}", elapsed);
    pass("Kummer end-to-end (80/80 units exact, Kummer relation present, dlogs mod 5 = brute force)");
}

/// Criterion 2: non-Kummer end-to-end (p=2, n=3): the modified polynomial
/// search finds a C-good h for some (C, D) <= (3, 3) (incrementing D, then
/// C); 50 random targets solved and verified against the oracle within 5
/// minutes. Measured factorbase ranks are reported, not assumed.
#[test]
fn non_kummer_end_to_end() {
    let start = Instant::now();
    let ladder = [
        (1u32, 1u32), (1, 2), (1, 3), (2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (3, 3),
    ];
    let mut pipe = None;
    let mut attempts = Vec::new();
    for (c, d) in ladder {
        match Pipeline::build(2, 3, c, d, SelectionStrategy::Search, None) {
            Ok(p) => {
                pipe = Some(p);
                break;
            }
            Err(Error::FailureExhausted { c, d, tried }) => {
                attempts.push(format!("C={} D={}: exhausted after {} candidates", c, d, tried));
            }
            Err(e) => panic!("unexpected failure: {}", e),
        }
    }
    let Some(pipe) = pipe else {
        // the criterion's alternate outcome: FailureExhausted with the log
        for line in &attempts {
            println!("[acceptance] enumeration log: {}", line);
        }
        pass("non-Kummer end-to-end (FailureExhausted reported with enumeration log)");
        return;
    };
    println!(
        "[acceptance] search succeeded at C={} D={} after exhausting {:?}",
        pipe.params.c, pipe.params.d, attempts
    );
    assert!(!pipe.sel.kummer);
    assert_eq!(pipe.params.q, 4);
    assert_eq!(pipe.params.m, 3);
    assert_eq!(pipe.params.group_order(), BigUint::from(4095u32));
    let (good, _) = is_c_good(&pipe.sel.h, pipe.params.m, pipe.params.c);
    assert!(good);

    // measured ranks, reported (the full-rank assumption is observed, not assumed)
    let split = subfield_dlog::ringstruct::smooth_split(
        &pipe.params.group_order(),
        &BigUint::from(3u32),
    );
    for ell in intfactor::prime_divisors(&split.nonsmooth) {
        let rank = rank_mod_ell(&pipe.fb.matrix, &ell);
        println!(
            "[acceptance] q=4 search instance: rank mod {} = {} (|S|-1 = {})",
            ell,
            rank,
            pipe.fb.symbols.len() - 1
        );
    }

    let g = &pipe.sel.g;
    let order = pipe.params.group_order();
    let gen = pipe.generator.combined.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(20260811);
    let mut solved = 0;
    while solved < 50 {
        let t = poly_by_rank(&pipe.field, rng.gen_range(1..4096), 3);
        if t.is_zero() || poly_gcd(&t, g).degree() != Some(0) {
            continue;
        }
        let xlog = pipe.solve(&t, 1000 + solved as u64).unwrap();
        let oracle = brute_force_dlog(g, &gen, &t, &order).unwrap().unwrap();
        assert_eq!(xlog, oracle, "target {:?}", t);
        solved += 1;
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {:?}", elapsed);
    pass("non-Kummer end-to-end (C-good found, 50/50 random targets exact)");
}

/// Criterion 3: the recursive elimination engine on 100 synthetic relation
/// matrices from known cyclic groups of order L <= 10^6 with the
/// factorization hidden from the engine: success exactly when the rank
/// condition holds, dlog vectors matching the construction up to a unit,
/// agreement with the SNF route on every solved instance, under 30 s total.
#[test]
fn recursive_elimination_engine() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(31337);
    let mut solved = 0;
    let mut refused = 0;
    for i in 0..100 {
        let l: u64 = match i % 4 {
            0 => rng.gen_range(2u64..1_000_000),
            1 => [997u64, 65536, 59049, 390625, 823543][rng.gen_range(0..5)],
            2 => 2u64.pow(rng.gen_range(1..20)) * 3u64.pow(rng.gen_range(0..8)),
            _ => {
                let p1 = [3u64, 5, 7, 11, 13][rng.gen_range(0..5)];
                let p2 = [17u64, 19, 23, 997][rng.gen_range(0..4)];
                p1 * p2 * rng.gen_range(1..40)
            }
        };
        let l = l.clamp(2, 1_000_000);
        let cols = rng.gen_range(2..9);
        let rows = cols + rng.gen_range(2..6);
        let (matrix, logs) = synthetic_cyclic_instance(&mut rng, cols, rows, l);
        let lb = BigUint::from(l);
        let rank_ok = intfactor::prime_divisors(&lb)
            .iter()
            .all(|p| rank_mod_ell(&matrix, p) == cols - 1);
        match decompose_and_solve(&matrix, &lb) {
            Ok(dec) => {
                assert!(rank_ok, "engine succeeded although the rank condition fails");
                assert!(dec.violations.is_empty());
                let got = dec.to_dlog_result(&lb);
                let expect = subfield_dlog::modlinalg::DlogResult {
                    modulus: lb.clone(),
                    generator_description: Vec::new(),
                    logs: logs.iter().map(|&x| BigUint::from(x % l)).collect(),
                };
                assert!(
                    dlogs_agree_up_to_unit(&got, &expect, &lb),
                    "dlogs mismatch at L = {}",
                    l
                );
                let snf = dlogs_via_snf(&matrix, &lb).unwrap();
                assert!(dlogs_agree_up_to_unit(&got, &snf, &lb), "SNF disagreement");
                solved += 1;
            }
            Err(_) => {
                assert!(!rank_ok, "engine failed although the rank condition holds");
                refused += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {:?}", elapsed);
    assert!(solved >= 60, "only {} of 100 instances were solvable", solved);
    pass(&format!(
        "recursive elimination engine (100 synthetic instances: {} solved + {} refused consistently, SNF agreement everywhere)",
        solved, refused
    ));
}

/// Criterion 4: rank/cyclicity equivalence on 200 random small systems:
/// rank mod l = |S| - 1 holds exactly when the quotient mod l is cyclic and
/// nontrivial, decided independently through SNF invariant factors.
#[test]
fn theorem_equivalence_property() {
    let mut rng = ChaCha8Rng::seed_from_u64(271828);
    let primes = [2u64, 3, 5, 7];
    let mut checked = 0;
    for i in 0..200 {
        let cols = rng.gen_range(2..6);
        let rows = rng.gen_range(1..7);
        let matrix = if i % 2 == 0 {
            // arbitrary small integer matrix
            let mut m = RelationMatrix::new(cols);
            for r in 0..rows {
                let row: Vec<BigInt> = (0..cols)
                    .map(|_| BigInt::from(rng.gen_range(-5i64..=5)))
                    .collect();
                m.push_row(row, format!("r{}", r));
            }
            m
        } else {
            // genuine relations of a known cyclic group
            let l = [30u64, 12, 7, 64, 90][rng.gen_range(0..5)];
            synthetic_cyclic_instance(&mut rng, cols, rows.max(2), l).0
        };
        let snf = smith_normal_form(&matrix);
        for ell in primes {
            let ellb = BigUint::from(ell);
            let rank = rank_mod_ell(&matrix, &ellb);
            // (Z^S / rows) tensor Z/l: each invariant factor d contributes
            // Z/gcd(l, d) (d = 0 contributes Z/l); cyclic nontrivial means
            // exactly one nontrivial summand
            let mut nontrivial = 0;
            for ix in 0..cols {
                let d = snf.invariant_factor(ix);
                if d.is_zero() || (&d % &ellb).is_zero() {
                    nontrivial += 1;
                }
            }
            let cyclic_nontrivial = nontrivial == 1;
            assert_eq!(
                rank == cols - 1,
                cyclic_nontrivial,
                "equivalence fails: cols={} ell={} rank={} nontrivial={}",
                cols,
                ell,
                rank,
                nontrivial
            );
            checked += 1;
        }
    }
    pass(&format!(
        "rank/cyclicity equivalence (200 systems x {} primes: zero counterexamples, {} checks)",
        primes.len(),
        checked
    ));
}

/// Criterion 5: obstruction reproduction on three constructed instances
/// (shared large prime or repeated factor): the l-primary part is not
/// cyclic AND the factorbase matrix rank stays below |S| - 1 mod l.
#[test]
fn obstruction_reproduction() {
    let mut exercised = 0;

    // (i) F_4: h = g * g' with two distinct irreducible quadratics; both
    // components have order 15 and share l = 5 > q^2 = 4.
    {
        let params = choose_embedding(2, 2, 1, 3).unwrap();
        let field = params.build_field().unwrap();
        let quads: Vec<Poly> = (0..16u64)
            .map(|r| poly_by_rank(&field, r, 2).add(&Poly::monomial(&field, field.one(), 2)))
            .filter(is_irreducible)
            .collect();
        let (g, g2) = (quads[0].clone(), quads[1].clone());
        check_obstructed_instance(params, field, g.mul(&g2), g, 5, "F_4 shared-order pair");
        exercised += 1;
    }

    // (ii) F_4: h = g * g1^2, a repeated cofactor factor; component orders
    // 15 and 240 share l = 5.
    {
        let params = choose_embedding(2, 2, 1, 5).unwrap();
        let field = params.build_field().unwrap();
        let quads: Vec<Poly> = (0..16u64)
            .map(|r| poly_by_rank(&field, r, 2).add(&Poly::monomial(&field, field.one(), 2)))
            .filter(is_irreducible)
            .collect();
        let (g, g1) = (quads[0].clone(), quads[2].clone());
        let h = g.mul(&g1).mul(&g1);
        check_obstructed_instance(params, field, h, g, 5, "F_4 repeated factor");
        exercised += 1;
    }

    // (iii) F_16: h = g * g' with two irreducible quartics; shared order
    // 65535 = 3 * 5 * 17 * 257 has l = 257 > q^2 = 16.
    {
        let params = choose_embedding(2, 4, 1, 7).unwrap();
        let field = params.build_field().unwrap();
        let mut quartics = Vec::new();
        for r in 0..u64::pow(256, 2) {
            let cand = poly_by_rank(&field, r, 4).add(&Poly::monomial(&field, field.one(), 4));
            if is_irreducible(&cand) {
                quartics.push(cand);
            }
            if quartics.len() == 2 {
                break;
            }
        }
        let (g, g2) = (quartics[0].clone(), quartics[1].clone());
        check_obstructed_instance(params, field, g.mul(&g2), g, 257, "F_16 shared-order pair");
        exercised += 1;
    }

    assert_eq!(exercised, 3);
    pass("obstruction reproduction (3 instances: non-cyclic l-part and rank < |S|-1 mod l)");
}

fn check_obstructed_instance(
    params: EmbeddingParams,
    field: subfield_dlog::arith::field::Field,
    h: Poly,
    g: Poly,
    ell: u64,
    label: &str,
) {
    let ellb = BigUint::from(ell);
    let ring = ResidueRing::new(h.clone()).unwrap();
    let profile = unit_group_profile(&ring);
    assert!(
        !ell_primary_cyclic(&ring, &profile, &ellb),
        "{}: l-part unexpectedly cyclic",
        label
    );
    let sel = crafted_selection(params, field, h, g);
    let ctx = RelationContext::new(&sel).unwrap();
    let fb = collect_factorbase_relations(&ctx).unwrap();
    let rank = rank_mod_ell(&fb.matrix, &ellb);
    assert!(
        rank < fb.symbols.len() - 1,
        "{}: rank mod {} = {} not deficient",
        label,
        ell,
        rank
    );
    println!(
        "[acceptance] {}: ell = {}, rank mod ell = {} < {}",
        label,
        ell,
        rank,
        fb.symbols.len() - 1
    );
}

/// Criterion 6: descent properties on the q=4 embedding. Degree halving and
/// hhat-verification on every node; the salvage path exercised end to end
/// (trap translates divided by their h-gcd, relations re-tagged modulo
/// hhat, elimination succeeding); and a constructed trap instance with
/// g_i in G_P (nonzero net exponent) eliminated successfully -- the latter
/// on the C-good q=3 instance, since on both q=4 instances the measured net
/// trap exponent is identically zero (exact cancellation; see the s-sweep
/// below), so G_P is empty there by its defining iff (nonzero net exponent).
#[test]
fn descent_properties() {
    // q = 4 Kummer instance, L = 455: the descent-viable instance.
    let params = choose_embedding(2, 3, 1, 1).unwrap();
    let field = params.build_field().unwrap();
    let sel = select_kummer(&params, &field).unwrap();
    let ctx = RelationContext::new(&sel).unwrap();
    let fb = collect_factorbase_relations(&ctx).unwrap();
    let l = BigUint::from(455u32);
    let dec = decompose_and_solve(&fb.matrix, &l).unwrap();
    assert!(dec.violations.is_empty());
    let logs = dec.to_dlog_result(&l);

    // (a) + (b): nodes satisfy degree halving; every relation verifies
    // modulo its hhat tag by direct ring multiplication.
    let mut nodes_checked = 0;
    let mut salvage_seen = false;
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let mut degrees_seen = std::collections::BTreeSet::new();
    while nodes_checked < 6 {
        let w = [2usize, 3][nodes_checked % 2];
        let mut coeffs: Vec<_> = (0..w)
            .map(|_| field.element_by_rank(rng.gen_range(0..field.q2())))
            .collect();
        coeffs.push(field.one());
        let p = Poly::from_coeffs(&field, coeffs);
        if p.degree() != Some(w) || poly_gcd(&p, &sel.h).degree() != Some(0) {
            continue;
        }
        if p.rem(&sel.g).is_constant() {
            continue;
        }
        let Ok(node) = descend_step(&ctx, &p) else {
            continue;
        };
        for child in node.children() {
            assert!(
                child.degree().unwrap() <= w.div_ceil(2),
                "degree halving violated: child {:?} of degree-{} node",
                child,
                w
            );
        }
        for rel in &node.relations {
            let modulus = match rel.tag {
                ModulusTag::H => &sel.h,
                ModulusTag::HHat => &node.hhat,
            };
            assert!(verify_relation(rel, &node.symbols, modulus).unwrap());
            if rel.tag == ModulusTag::HHat {
                salvage_seen = true;
                // a fortiori modulo g
                assert!(verify_relation(rel, &node.symbols, &sel.g).unwrap());
            }
        }
        if let Ok(ex) = eliminate_step(&node, &l) {
            verify_eliminations(&ctx, &node, &l, &ex).unwrap();
        }
        degrees_seen.insert(w);
        nodes_checked += 1;
    }
    assert!(salvage_seen, "no node exercised the hhat salvage");
    assert_eq!(degrees_seen.len(), 2);

    // constructed trap on q=4: the trap translate is divided by its gcd
    // with h/g, the relations hold modulo hhat = g, and the elimination
    // succeeds; the measured net exponents are all zero (exact
    // cancellation), so G_P stays empty here.
    let x = Poly::x(&field);
    let mut q4_trap_eliminated = false;
    let mut s_nonzero_q4 = 0usize;
    'outer: for r_rank in 1..8 {
        let lin = Poly::x_minus(&field.element_by_rank(r_rank));
        for b_rank in 1..field.q2() {
            let beta = field.element_by_rank(b_rank);
            let p = x.mul(&lin).add(&Poly::constant(beta.clone()));
            if poly_gcd(&p, &sel.h).degree() != Some(0) {
                continue;
            }
            let Ok(node) = descend_step(&ctx, &p) else {
                continue;
            };
            let translate = p.sub(&Poly::constant(beta));
            let (class, vals) = subfield_dlog::relgen::split_off_h_factors(&ctx, &translate);
            assert_eq!(vals, vec![(x.clone(), 1)], "translate divisible by the cofactor x");
            assert_eq!(class, lin);
            s_nonzero_q4 += node.g_p.len();
            let trap_used = node
                .relations
                .iter()
                .any(|r| r.involved.contains(&x) && r.tag == ModulusTag::HHat);
            if !trap_used {
                continue;
            }
            assert_eq!(node.hhat, sel.g);
            if let Ok(ex) = eliminate_step(&node, &l) {
                verify_eliminations(&ctx, &node, &l, &ex).unwrap();
                q4_trap_eliminated = true;
                break 'outer;
            }
        }
    }
    assert!(q4_trap_eliminated, "q=4 trap salvage did not eliminate");
    println!(
        "[acceptance] q=4 constructed traps: salvage + elimination ok; nonzero net exponents observed = {} (exact cancellation, G_P empty)",
        s_nonzero_q4
    );

    // (c) g_i in G_P with successful elimination, on the C-good q=3
    // instance where a nonzero net exponent is attainable.
    let q3 = trap_friendly_q3();
    let l5 = BigUint::from(5u32);
    let g1 = q3.cofactor_factors()[0].0.clone();
    let mut gp_eliminated = false;
    let f9 = q3.field.clone();
    let mut candidates: Vec<Poly> = Vec::new();
    for b in 1..f9.q2() {
        candidates.push(g1.add(&Poly::constant(f9.element_by_rank(b))));
    }
    for r in 0..f9.q2() {
        let lin = Poly::x_minus(&f9.element_by_rank(r));
        for b in 1..f9.q2() {
            candidates.push(g1.mul(&lin).add(&Poly::constant(f9.element_by_rank(b))));
        }
    }
    for p in candidates {
        if poly_gcd(&p, &q3.sel.h).degree() != Some(0) || p.rem(&q3.sel.g).is_constant() {
            continue;
        }
        let Ok(node) = descend_step(&q3, &p) else {
            continue;
        };
        if !node.g_p.contains(&g1) {
            continue;
        }
        let Ok(ex) = eliminate_step(&node, &l5) else {
            continue;
        };
        verify_eliminations(&q3, &node, &l5, &ex).unwrap();
        let ord = node.symbols.ordinal_of(&g1).unwrap();
        assert!(ex.contains_key(&ord), "g1 eliminated with the V block");
        println!(
            "[acceptance] trap instance P = {} puts g1 in G_P and eliminates (|T| = {}, |V| = {})",
            p.compact(),
            node.relations.len(),
            node.v_ordinals.len()
        );
        gp_eliminated = true;
        break;
    }
    assert!(gp_eliminated, "no constructed instance put g1 in G_P with elimination");

    // full descent sanity on the q=4 instance: 25 random targets against
    // the oracle in the 455-torsion, plus beta_L itself solving to 1.
    let g = &sel.g;
    let order = params.group_order();
    let beta = subfield_dlog::descent::beta_l_element(&fb, &logs, &ctx, &l);
    let (beta_log, _) = full_descent(&ctx, &fb, &logs, &beta, &l, 77).unwrap();
    assert_eq!(beta_log, BigUint::one());
    let k = projection_exponent(&order, &l);
    let mut rng = ChaCha8Rng::seed_from_u64(5150);
    let mut done = 0;
    while done < 25 {
        let t = poly_by_rank(&field, rng.gen_range(1..4096), 3);
        if t.is_zero() || poly_gcd(&t, g).degree() != Some(0) {
            continue;
        }
        let (xl, tree) = full_descent(&ctx, &fb, &logs, &t, &l, 900 + done as u64).unwrap();
        for node in &tree.nodes {
            assert!(node.max_child_degree <= node.smoothness_degree);
        }
        // depth bound: ceil(log2 w0) + 1 with w0 <= 2 here
        assert!(tree.max_depth <= 2, "depth {}", tree.max_depth);
        let oracle = brute_force_dlog(g, &beta, &t.pow_mod(&k, g), &l)
            .unwrap()
            .expect("projection generated by beta_L");
        assert_eq!(xl, oracle);
        done += 1;
    }
    pass("descent properties (halving + hhat verification + salvage exercised + G_P elimination + 25/25 oracle matches)");
}

/// The C-good q=3 instance on which a constructed trap attains a nonzero
/// net exponent (third candidate in enumeration order).
fn trap_friendly_q3() -> RelationContext {
    let params = choose_embedding(3, 2, 1, 1).unwrap();
    let field = params.build_field().unwrap();
    let h0 = subfield_dlog::arith::poly::parse_poly("[1,0] + [0,1]*x^1", &field).unwrap();
    let h1 = Poly::x(&field);
    let h = build_h(&field, params.q, &h0, &h1);
    let (good, report) = is_c_good(&h, params.m, params.c);
    assert!(good);
    let g = report.g.unwrap();
    let cof = subfield_dlog::arith::poly::poly_divmod(&h, &g).unwrap().0;
    let sel = SelectedPolynomials {
        params,
        field: field.clone(),
        lambda: subfield_dlog::arith::field::find_multiplicative_generator(&field),
        h0,
        h1,
        h,
        g,
        cofactor_factorization: poly_factor(&cof).unwrap(),
        kummer: false,
    };
    RelationContext::new(&sel).unwrap()
}

/// Criterion 7: modulus_split on every valid (r, L) with r, L <= 300,
/// against the trial-division factorization oracle. Zero failures.
#[test]
fn modulus_split_exhaustive() {
    let mut splits = 0;
    let mut refusals = 0;
    for l in 2u64..=300 {
        let lb = BigUint::from(l);
        let l_primes = intfactor::prime_divisors(&lb);
        for r in 1u64..=300 {
            let rb = BigUint::from(r);
            let dividing: Vec<&BigUint> =
                l_primes.iter().filter(|p| (&rb % *p).is_zero()).collect();
            let proper = !dividing.is_empty() && dividing.len() < l_primes.len();
            match modulus_split(&rb, &lb) {
                Ok((a, b)) => {
                    assert!(proper, "split produced for r={} L={}", r, l);
                    assert_eq!(&a * &b, lb);
                    assert!(a.gcd(&b).is_one());
                    // oracle: A carries exactly the L-primes dividing r
                    let mut expect_a = BigUint::one();
                    for (p, e) in intfactor::factorize(&lb) {
                        if (&rb % &p).is_zero() {
                            expect_a *= p.pow(e);
                        }
                    }
                    assert_eq!(a, expect_a, "r={} L={}", r, l);
                    splits += 1;
                }
                Err(_) => {
                    assert!(!proper, "no split for r={} L={}", r, l);
                    refusals += 1;
                }
            }
        }
    }
    pass(&format!(
        "modulus_split exhaustive (r, L <= 300: {} splits + {} refusals, all oracle-consistent)",
        splits, refusals
    ));
}

/// Synthetic relation matrix over a known cyclic group Z/L: rows orthogonal
/// to the hidden dlog vector, which includes a generator.
fn synthetic_cyclic_instance(
    rng: &mut ChaCha8Rng,
    cols: usize,
    rows: usize,
    l: u64,
) -> (RelationMatrix, Vec<u64>) {
    let mut logs: Vec<u64> = (0..cols).map(|_| rng.gen_range(0..l)).collect();
    logs[0] = 1;
    let mut m = RelationMatrix::new(cols);
    for i in 0..rows {
        let mut row: Vec<BigInt> = (0..cols)
            .map(|_| BigInt::from(rng.gen_range(-9i64..=9)))
            .collect();
        let mut acc = BigInt::zero();
        for (c, e) in row.iter().enumerate().skip(1) {
            acc += e * BigInt::from(logs[c]);
        }
        let l_int = BigInt::from(l);
        row[0] = ((-acc % &l_int) + &l_int) % &l_int;
        m.push_row(row, format!("syn{}", i));
    }
    (m, logs)
}
