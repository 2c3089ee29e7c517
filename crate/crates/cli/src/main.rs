//! Command-line surface for the subfield discrete-log pipeline.
//!
//! Exit codes: 0 success, 2 obstruction detected (selection conditions or
//! non-cyclic l-primary part, including an exhausted polynomial search),
//! 3 a heuristic rank check or verification failed, 4 I/O or parse error.

mod artifact;

use artifact::{content_hash, read_artifact, read_cached, stage_seed, write_artifact, MAGIC};
use clap::{Parser, Subcommand};
use num_bigint::BigUint;
use num_traits::One;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;
use subfield_dlog::arith::poly::{parse_poly, Poly};
use subfield_dlog::descent::{full_descent, DescentTree};
use subfield_dlog::dlp::{brute_force_dlog, Pipeline};
use subfield_dlog::error::Error;
use subfield_dlog::fileio;
use subfield_dlog::modlinalg::{
    decompose_and_solve, dlogs_via_snf, dlogs_agree_up_to_unit, rank_mod_ell,
};
use subfield_dlog::polyselect::{choose_embedding, select, SelectionStrategy};
use subfield_dlog::relgen::{collect_factorbase_relations, FactorbaseRelations, RelationContext};
use subfield_dlog::ringstruct::{
    check_selection_conditions, smooth_split, unit_group_profile, ResidueRing,
};

#[derive(Parser)]
#[command(name = "subfield-dlog", version, about = "discrete logarithms in subfields of residue class rings")]
struct Cli {
    /// Directory for cached pipeline artifacts.
    #[arg(long, global = true, default_value = "work")]
    workdir: PathBuf,
    /// Global seed; each stage derives its own named stream from it.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Print stage detail to stdout.
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the embedding parameters q, m for (p, n).
    Params {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: u32,
        #[arg(long = "C", default_value_t = 1)]
        c: u32,
        #[arg(long = "D", default_value_t = 1)]
        d: u32,
    },
    /// Select h = h1 x^q - h0 (Kummer construction or C-good search).
    Polyselect {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: u32,
        #[arg(long = "C", default_value_t = 1)]
        c: u32,
        #[arg(long = "D", default_value_t = 1)]
        d: u32,
        #[arg(long, default_value = "auto")]
        selection: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate factorbase relations for a selection.
    Relgen {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract factorbase discrete logs modulo L from a relation file.
    Linalg {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        relations: PathBuf,
        /// Modulus L, or "auto" for the non-smooth part of |F_g^x|.
        #[arg(long, default_value = "auto")]
        modulus: String,
        #[arg(long)]
        out: PathBuf,
        /// Also write the dense matrix file.
        #[arg(long)]
        matrix_out: Option<PathBuf>,
        /// Cross-check the elimination engine against the Smith normal form.
        #[arg(long)]
        snf_check: bool,
    },
    /// Descend a target onto the factorbase modulo the log file's L.
    Descent {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        relations: PathBuf,
        #[arg(long)]
        logs: PathBuf,
        #[arg(long)]
        target: String,
        #[arg(long)]
        dump_tree: Option<PathBuf>,
    },
    /// Full pipeline: select, relate, solve, verify; artifacts cached in
    /// the workdir.
    Solve {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: u32,
        #[arg(long = "C", default_value_t = 1)]
        c: u32,
        #[arg(long = "D", default_value_t = 1)]
        d: u32,
        #[arg(long)]
        target: String,
        #[arg(long)]
        base: Option<String>,
        #[arg(long, default_value = "auto")]
        selection: String,
        /// Override the torsion modulus L (must divide |F_g^x| and be
        /// coprime to its cofactor); "auto" takes the non-smooth part.
        #[arg(long, default_value = "auto")]
        modulus: String,
    },
    /// Replay a solution file against field arithmetic.
    Verify {
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Brute-force discrete log oracle (desk scale only).
    Oracle {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        base: String,
        #[arg(long)]
        target: String,
    },
    /// Unit-group profile and selection-condition report for a selection.
    Ringinfo {
        #[arg(long)]
        params: PathBuf,
        #[arg(long = "C")]
        c: Option<u32>,
    },
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Obstruction(_)
        | Error::FailureExhausted { .. }
        | Error::GDoesNotDivideH
        | Error::SnfDivisibility { .. }
        | Error::NoGeneratorColumn { .. } => 2,
        Error::RankDeficient { .. }
        | Error::DescentRankDeficient { .. }
        | Error::NoRelations { .. }
        | Error::DescentExhausted { .. }
        | Error::RandomizeExhausted { .. }
        | Error::NotInSubgroup => 3,
        _ => 4,
    }
}

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {}", err);
            std::process::exit(exit_code(&err));
        }
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::Parse(format!("io: {}", e))
}

fn read_body(path: &Path) -> Result<String, Error> {
    read_artifact(path)
        .map(|a| a.body)
        .ok_or_else(|| Error::Parse(format!("{}: missing, bad magic, or corrupt hash", path.display())))
}

fn parse_modulus(spec: &str, sel: &subfield_dlog::polyselect::SelectedPolynomials) -> Result<BigUint, Error> {
    if spec == "auto" {
        let split = smooth_split(&sel.params.group_order(), &sel.params.smoothness_bound());
        Ok(split.nonsmooth)
    } else {
        spec.parse::<BigUint>()
            .map_err(|_| Error::Parse(format!("bad modulus {:?}", spec)))
    }
}

fn run(cli: &Cli) -> Result<i32, Error> {
    match &cli.command {
        Command::Params { p, n, c, d } => {
            let params = choose_embedding(*p, *n, *c, *d)?;
            println!("p = {}", params.p);
            println!("n = {}", params.n);
            println!("q = {} (p^{})", params.q, params.e);
            println!("m = {}", params.m);
            println!("field = F_{}^2 = F_{}", params.q, params.q * params.q);
            println!("|F_g^x| = {}", params.group_order());
            println!("smoothness bound q^2C = {}", params.smoothness_bound());
            println!("kummer construction applies: {}", params.kummer_case());
            Ok(0)
        }
        Command::Polyselect { p, n, c, d, selection, out } => {
            let strategy: SelectionStrategy = selection.parse()?;
            let params = choose_embedding(*p, *n, *c, *d)?;
            let field = params.build_field()?;
            let sel = match select(&params, &field, strategy) {
                Ok(sel) => sel,
                Err(Error::FailureExhausted { c, d, tried }) => {
                    eprintln!(
                        "FailureExhausted: no C-good candidate at C={} D={} after {} candidates; try incrementing D, then C",
                        c, d, tried
                    );
                    return Err(Error::FailureExhausted { c, d, tried });
                }
                Err(e) => return Err(e),
            };
            let body = fileio::params_to_string(&sel);
            write_artifact(out, &body, None).map_err(io_err)?;
            println!("selection = {}", if sel.kummer { "kummer" } else { "search" });
            println!("h = {}", sel.h.canonical());
            println!("g = {}", sel.g.canonical());
            println!("wrote {}", out.display());
            Ok(0)
        }
        Command::Relgen { params, out } => {
            let sel = fileio::params_from_str(&read_body(params)?)?;
            fileio::validate_selection(&sel)?;
            let ctx = RelationContext::new(&sel)?;
            let fb = collect_factorbase_relations(&ctx)?;
            let body = fileio::relations_to_string(&fb.symbols, &fb.relations, &fb.hhat);
            let input = content_hash(&read_body(params)?);
            write_artifact(out, &body, Some(input)).map_err(io_err)?;
            println!(
                "relations = {} (|S| = {}, sweep stats: {:?})",
                fb.relations.len(),
                fb.symbols.len(),
                fb.stats
            );
            println!("wrote {}", out.display());
            Ok(0)
        }
        Command::Linalg { params, relations, modulus, out, matrix_out, snf_check } => {
            let sel = fileio::params_from_str(&read_body(params)?)?;
            let rel_body = read_body(relations)?;
            let (symbols, rels, _hhat) = fileio::relations_from_str(&rel_body, &sel)?;
            let matrix = fileio::matrix_from_relations(&symbols, &rels);
            if let Some(mpath) = matrix_out {
                write_artifact(mpath, &fileio::matrix_to_string(&matrix), Some(content_hash(&rel_body)))
                    .map_err(io_err)?;
                println!("wrote {}", mpath.display());
            }
            let l = parse_modulus(modulus, &sel)?;
            println!("L = {}", l);
            if l.is_one() {
                println!("L = 1: nothing to extract (smooth order)");
                return Ok(0);
            }
            for ell in subfield_dlog::arith::intfactor::prime_divisors(&l) {
                let rank = rank_mod_ell(&matrix, &ell);
                println!(
                    "rank mod {} = {} (|S| - 1 = {})",
                    ell,
                    rank,
                    symbols.len() - 1
                );
            }
            let dec = decompose_and_solve(&matrix, &l)?;
            if !dec.violations.is_empty() {
                println!("consistency violations: {}", dec.violations.len());
            }
            println!(
                "modulus factors: {:?}",
                dec.factors.iter().map(|f| f.modulus.to_string()).collect::<Vec<_>>()
            );
            let logs = dec.to_dlog_result(&l);
            if *snf_check {
                let snf_logs = dlogs_via_snf(&matrix, &l)?;
                let agree = dlogs_agree_up_to_unit(&logs, &snf_logs, &l);
                println!("snf cross-check: {}", if agree { "agree (up to unit)" } else { "DISAGREE" });
                if !agree {
                    return Err(Error::Obstruction("engine/SNF disagreement".into()));
                }
            }
            let body = fileio::dlogs_to_string(&logs, &symbols);
            let input = content_hash(&format!("{};L={}", content_hash(&rel_body), l));
            write_artifact(out, &body, Some(input)).map_err(io_err)?;
            println!("wrote {}", out.display());
            Ok(0)
        }
        Command::Descent { params, relations, logs, target, dump_tree } => {
            let sel = fileio::params_from_str(&read_body(params)?)?;
            let (symbols, rels, hhat) = fileio::relations_from_str(&read_body(relations)?, &sel)?;
            let fb = FactorbaseRelations::from_parts(symbols, rels, hhat);
            let fb_logs = fileio::dlogs_from_str(&read_body(logs)?)?;
            let ctx = RelationContext::new(&sel)?;
            let target_poly = parse_poly(target, &sel.field)?;
            let l = fb_logs.modulus.clone();
            let seed = stage_seed(cli.seed, "descent");
            let (log, tree) = full_descent(&ctx, &fb, &fb_logs, &target_poly, &l, seed)?;
            print!("{}", tree_text(&tree, &target_poly));
            println!("log_{{beta_L}}(target) = {} (mod {})", log, l);
            if let Some(path) = dump_tree {
                write_artifact(path, &tree_dump(&tree), None).map_err(io_err)?;
                println!("wrote {}", path.display());
            }
            Ok(0)
        }
        Command::Solve { p, n, c, d, target, base, selection, modulus } => {
            solve_pipeline(cli, *p, *n, *c, *d, target, base.as_deref(), selection, modulus)
        }
        Command::Verify { file } => {
            let path = file
                .clone()
                .unwrap_or_else(|| cli.workdir.join("solution.txt"));
            let sol = fileio::solution_from_str(&read_body(&path)?)?;
            let ok = fileio::replay_solution(&sol)?;
            if ok {
                println!("verified: generator^log = target in F_g");
                Ok(0)
            } else {
                println!("verification FAILED for {}", path.display());
                Ok(3)
            }
        }
        Command::Oracle { params, base, target } => {
            let sel = fileio::params_from_str(&read_body(params)?)?;
            let base = parse_poly(base, &sel.field)?;
            let target = parse_poly(target, &sel.field)?;
            let order = sel.params.group_order();
            match brute_force_dlog(&sel.g, &base, &target, &order)? {
                Some(k) => println!("log = {}", k),
                None => println!("none (target outside <base>)"),
            }
            Ok(0)
        }
        Command::Ringinfo { params, c } => {
            let sel = fileio::params_from_str(&read_body(params)?)?;
            let c = c.unwrap_or(sel.params.c);
            let ring = ResidueRing::new(sel.h.clone())?;
            let profile = unit_group_profile(&ring);
            println!("modulus h = {}", sel.h.canonical());
            println!("{:<40} {:>4} {:>12}", "component", "mult", "order");
            for (factor, mult, order) in &profile.component_orders {
                println!("{:<40} {:>4} {:>12}", factor.compact(), mult, order);
            }
            println!("total |F_h^x| = {}", profile.total_order);
            let report = check_selection_conditions(&sel.h, &sel.g, c)?;
            println!("conditions (C = {}):", c);
            println!(
                "  [{}] g^2 does not divide h",
                if report.g_square_not_dividing { "ok" } else { "FAIL" }
            );
            println!(
                "  [{}] gcd(|F_h/g^x|, |F_g^x|) = {} is q^2C-smooth",
                if report.gcd_smooth { "ok" } else { "FAIL" },
                report.shared_order_gcd
            );
            println!(
                "  [{}] l-primary parts cyclic for every l | L = {}",
                if report.ell_parts_cyclic { "ok" } else { "FAIL" },
                report.nonsmooth_part
            );
            for w in &report.witnesses {
                println!("  witness: {}", w);
            }
            // machine-readable component records
            for (factor, mult, order) in &profile.component_orders {
                println!("component factor={} mult={} order={}", factor.compact(), mult, order);
            }
            if report.all_hold() {
                Ok(0)
            } else {
                Ok(2)
            }
        }
    }
}

fn tree_text(tree: &DescentTree, target: &Poly) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "descent of {}", target.compact());
    let _ = writeln!(s, "attempts = {}, nodes = {}, max depth = {}", tree.attempts, tree.nodes.len(), tree.max_depth);
    for node in &tree.nodes {
        let indent = "  ".repeat(node.depth + 1);
        let _ = writeln!(
            s,
            "{}node P={} deg={} sd={} relations={} |V|={} G_P={:?} hhat={}",
            indent,
            node.p.compact(),
            node.degree,
            node.smoothness_degree,
            node.relation_count,
            node.v_count,
            node.g_p.iter().map(|f| f.compact()).collect::<Vec<_>>(),
            node.hhat.compact()
        );
        for child in &node.children {
            let _ = writeln!(s, "{}  child {}", indent, child.compact());
        }
    }
    for (sym, log) in &tree.resolved {
        let _ = writeln!(s, "resolved {} -> {}", sym.compact(), log);
    }
    s
}

fn tree_dump(tree: &DescentTree) -> String {
    let mut s = String::new();
    for node in &tree.nodes {
        let _ = writeln!(
            s,
            "node depth={} P={} deg={} sd={} relations={} v={} gp={} hhat={} children={}",
            node.depth,
            node.p.compact(),
            node.degree,
            node.smoothness_degree,
            node.relation_count,
            node.v_count,
            node.g_p.iter().map(|f| f.compact()).collect::<Vec<_>>().join(";"),
            node.hhat.compact(),
            node.children.iter().map(|c| c.compact()).collect::<Vec<_>>().join(";")
        );
    }
    for (sym, log) in &tree.resolved {
        let _ = writeln!(s, "resolved {} {}", sym.compact(), log);
    }
    s
}

#[allow(clippy::too_many_arguments)]
fn solve_pipeline(
    cli: &Cli,
    p: u64,
    n: u32,
    c: u32,
    d: u32,
    target: &str,
    base: Option<&str>,
    selection: &str,
    modulus: &str,
) -> Result<i32, Error> {
    let strategy: SelectionStrategy = selection.parse()?;
    std::fs::create_dir_all(&cli.workdir).map_err(io_err)?;
    let mut report = String::new();
    let _ = writeln!(report, "subfield-dlog pipeline report");
    let _ = writeln!(report, "p = {}", p);
    let _ = writeln!(report, "n = {}", n);
    let _ = writeln!(report, "C = {}", c);
    let _ = writeln!(report, "D = {}", d);
    let _ = writeln!(report, "seed = {}", cli.seed);

    // stage: selection (cached on the input key)
    let t0 = Instant::now();
    let sel_key = content_hash(&format!("p={} n={} C={} D={} selection={}", p, n, c, d, selection));
    let params_path = cli.workdir.join("params.txt");
    let (sel, sel_cached) = match read_cached(&params_path, sel_key) {
        Some(body) => (fileio::params_from_str(&body)?, true),
        None => {
            let params = choose_embedding(p, n, c, d)?;
            let field = params.build_field()?;
            let sel = select(&params, &field, strategy)?;
            write_artifact(&params_path, &fileio::params_to_string(&sel), Some(sel_key))
                .map_err(io_err)?;
            (sel, false)
        }
    };
    fileio::validate_selection(&sel)?;
    let t_select = t0.elapsed();
    let params_hash = content_hash(&fileio::params_to_string(&sel));
    let _ = writeln!(report, "selection = {}{}", if sel.kummer { "kummer" } else { "search" },
        if sel_cached { " (cached)" } else { "" });
    let _ = writeln!(report, "h = {}", sel.h.canonical());
    let _ = writeln!(report, "g = {}", sel.g.canonical());

    // stage: relations (cached on the params hash)
    let t0 = Instant::now();
    let rel_path = cli.workdir.join("relations.txt");
    let ctx_probe = RelationContext::new(&sel)?;
    let (fb, rel_cached) = match read_cached(&rel_path, params_hash) {
        Some(body) => {
            let (symbols, rels, hhat) = fileio::relations_from_str(&body, &sel)?;
            (FactorbaseRelations::from_parts(symbols, rels, hhat), true)
        }
        None => {
            let fb = collect_factorbase_relations(&ctx_probe)?;
            let body = fileio::relations_to_string(&fb.symbols, &fb.relations, &fb.hhat);
            write_artifact(&rel_path, &body, Some(params_hash)).map_err(io_err)?;
            (fb, false)
        }
    };
    let rel_body = fileio::relations_to_string(&fb.symbols, &fb.relations, &fb.hhat);
    let rel_hash = content_hash(&rel_body);
    let t_relgen = t0.elapsed();
    let _ = writeln!(report, "|S| = {}", fb.symbols.len());
    let _ = writeln!(report, "relations = {}{}", fb.relations.len(), if rel_cached { " (cached)" } else { "" });

    // matrix artifact for scripting
    write_artifact(
        &cli.workdir.join("matrix.txt"),
        &fileio::matrix_to_string(&fb.matrix),
        Some(rel_hash),
    )
    .map_err(io_err)?;

    // stage: linear algebra (cached on relations + L)
    let t0 = Instant::now();
    let l_override = match modulus {
        "auto" => None,
        other => Some(
            other
                .parse::<BigUint>()
                .map_err(|_| Error::Parse(format!("bad modulus {:?}", other)))?,
        ),
    };
    let split_preview = match &l_override {
        None => smooth_split(&sel.params.group_order(), &sel.params.smoothness_bound()).nonsmooth,
        Some(l) => l.clone(),
    };
    let logs_path = cli.workdir.join("logs.txt");
    let logs_key = content_hash(&format!("{:016x};L={}", rel_hash, split_preview));
    let cached_logs = if split_preview.is_one() {
        None
    } else {
        read_cached(&logs_path, logs_key).and_then(|body| fileio::dlogs_from_str(&body).ok())
    };
    let logs_were_cached = cached_logs.is_some();
    let pipe = Pipeline::from_selection_cached(
        sel.params.clone(),
        sel.field.clone(),
        sel.clone(),
        l_override,
        Some(fb),
        cached_logs,
    )?;
    if let Some(logs) = &pipe.fb_logs {
        if !logs_were_cached {
            let body = fileio::dlogs_to_string(logs, &pipe.fb.symbols);
            write_artifact(&logs_path, &body, Some(logs_key)).map_err(io_err)?;
        }
    }
    let t_linalg = t0.elapsed();
    let _ = writeln!(report, "v = {}", pipe.split.smooth);
    let _ = writeln!(report, "L = {}{}", pipe.split.nonsmooth, if logs_were_cached { " (logs cached)" } else { "" });
    let _ = writeln!(
        report,
        "conditions: g2_ok={} gcd_smooth={} ell_cyclic={}",
        pipe.conditions.g_square_not_dividing,
        pipe.conditions.gcd_smooth,
        pipe.conditions.ell_parts_cyclic
    );
    for (ell, rank) in &pipe.ranks {
        let _ = writeln!(
            report,
            "rank mod {} = {} (need {})",
            ell,
            rank,
            pipe.fb.symbols.len() - 1
        );
    }

    // stage: solve
    let t0 = Instant::now();
    let target_poly = parse_poly(target, &sel.field)?;
    let base_poly = match base {
        Some(b) => Some(parse_poly(b, &sel.field)?),
        None => None,
    };
    let solve_seed = stage_seed(cli.seed, "descent");
    let (log, trace) = pipe.solve_with_trace(&target_poly, solve_seed)?;
    let answer = match &base_poly {
        None => Some(log.clone()),
        Some(bp) => {
            let xb = pipe.solve(bp, stage_seed(cli.seed, "descent-base"))?;
            subfield_dlog::modlinalg::solve_dlog_ratio(
                &num_bigint::BigInt::from(log.clone()),
                &num_bigint::BigInt::from(xb),
                &pipe.params.group_order(),
            )
        }
    };
    let t_solve = t0.elapsed();
    if let Some(tree) = &trace {
        write_artifact(&cli.workdir.join("descent.txt"), &tree_dump(tree), Some(rel_hash))
            .map_err(io_err)?;
    }

    let _ = writeln!(
        report,
        "stage timings (ms): select={} relgen={} linalg={} solve={}",
        t_select.as_millis(),
        t_relgen.as_millis(),
        t_linalg.as_millis(),
        t_solve.as_millis()
    );
    match (&answer, &base_poly) {
        (Some(x), None) => {
            let _ = writeln!(report, "solved: target={} log={} verified=true", target_poly.compact(), x);
        }
        (Some(x), Some(b)) => {
            let _ = writeln!(
                report,
                "solved: target={} base={} log={} verified=true",
                target_poly.compact(),
                b.compact(),
                x
            );
        }
        (None, _) => {
            let _ = writeln!(report, "solved: target outside the subgroup generated by the base");
        }
    }

    // solution + report artifacts
    if let Some(x) = &answer {
        let sol = fileio::Solution {
            p,
            n,
            c,
            d,
            seed: cli.seed,
            selection: if sel.kummer { "kummer".into() } else { "search".into() },
            g: sel.g.canonical(),
            generator: match &base_poly {
                None => pipe.generator.combined.canonical(),
                Some(b) => b.canonical(),
            },
            target: target_poly.canonical(),
            base: base_poly.as_ref().map(|b| b.canonical()),
            log: x.clone(),
            order: pipe.params.group_order(),
        };
        write_artifact(&cli.workdir.join("solution.txt"), &fileio::solution_to_string(&sol), None)
            .map_err(io_err)?;
    }
    write_artifact(&cli.workdir.join("report.txt"), &report, None).map_err(io_err)?;
    if cli.verbose {
        print!("{}", report);
    } else {
        match &answer {
            Some(x) => println!("log = {}", x),
            None => println!("none (target outside <base>)"),
        }
    }
    let _ = MAGIC;
    Ok(match answer {
        Some(_) => 0,
        None => 0,
    })
}
