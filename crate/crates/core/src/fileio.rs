//! Line-oriented artifact formats shared between the library and the CLI.
//! These functions produce and parse file *bodies*; the CLI wraps them with
//! the magic/hash header lines. Every format round-trips exactly.

use crate::arith::factor::{poly_factor, PolyFactorization};
use crate::arith::field::find_multiplicative_generator;
use crate::arith::poly::{parse_poly, Poly};
use crate::error::{Error, Result};
use crate::modlinalg::{DlogResult, RelationMatrix};
use crate::polyselect::{choose_embedding, SelectedPolynomials};
use crate::relgen::{ModulusTag, Provenance, Relation, SymbolIndex};
use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

fn kv(line: &str) -> Option<(&str, &str)> {
    let (k, v) = line.split_once('=')?;
    Some((k.trim(), v.trim()))
}

fn required<'a>(map: &BTreeMap<&str, &'a str>, key: &str) -> Result<&'a str> {
    map.get(key)
        .copied()
        .ok_or_else(|| Error::Parse(format!("missing key {:?}", key)))
}

// ---------------------------------------------------------------------------
// params file: one "key = value" per line
// ---------------------------------------------------------------------------

pub fn params_to_string(sel: &SelectedPolynomials) -> String {
    let p = &sel.params;
    let mut s = String::new();
    let _ = writeln!(s, "p = {}", p.p);
    let _ = writeln!(s, "n = {}", p.n);
    let _ = writeln!(s, "q = {}", p.q);
    let _ = writeln!(s, "m = {}", p.m);
    let _ = writeln!(s, "C = {}", p.c);
    let _ = writeln!(s, "D = {}", p.d);
    let _ = writeln!(s, "h0 = {}", sel.h0.canonical());
    let _ = writeln!(s, "h1 = {}", sel.h1.canonical());
    let _ = writeln!(s, "h = {}", sel.h.canonical());
    let _ = writeln!(s, "g = {}", sel.g.canonical());
    let _ = writeln!(s, "cofactor = {}", factorization_to_string(&sel.cofactor_factorization));
    s
}

fn factorization_to_string(f: &PolyFactorization) -> String {
    let mut parts = vec![format!("{}", f.unit)];
    for (poly, mult) in &f.factors {
        parts.push(format!("({})^{}", poly.compact(), mult));
    }
    parts.join(" ; ")
}

fn factorization_from_str(
    s: &str,
    field: &crate::arith::field::Field,
) -> Result<PolyFactorization> {
    let mut parts = s.split(';').map(str::trim);
    let unit_str = parts
        .next()
        .ok_or_else(|| Error::Parse("empty factorization".into()))?;
    let unit_poly = parse_poly(unit_str, field)?;
    let unit = unit_poly.coeff(0);
    let mut factors = Vec::new();
    for part in parts {
        let inner = part
            .strip_prefix('(')
            .and_then(|p| p.rsplit_once(")^"))
            .ok_or_else(|| Error::Parse(format!("bad factor {:?}", part)))?;
        let poly = parse_poly(inner.0, field)?;
        let mult: u32 = inner
            .1
            .parse()
            .map_err(|_| Error::Parse(format!("bad multiplicity {:?}", inner.1)))?;
        factors.push((poly, mult));
    }
    Ok(PolyFactorization { unit, factors })
}

pub fn params_from_str(s: &str) -> Result<SelectedPolynomials> {
    let map: BTreeMap<&str, &str> = s.lines().filter_map(kv).collect();
    let p: u64 = required(&map, "p")?
        .parse()
        .map_err(|_| Error::Parse("bad p".into()))?;
    let n: u32 = required(&map, "n")?
        .parse()
        .map_err(|_| Error::Parse("bad n".into()))?;
    let c: u32 = required(&map, "C")?
        .parse()
        .map_err(|_| Error::Parse("bad C".into()))?;
    let d: u32 = required(&map, "D")?
        .parse()
        .map_err(|_| Error::Parse("bad D".into()))?;
    let params = choose_embedding(p, n, c, d)?;
    let q: u64 = required(&map, "q")?
        .parse()
        .map_err(|_| Error::Parse("bad q".into()))?;
    if q != params.q {
        return Err(Error::Parse(format!("q mismatch: {} vs {}", q, params.q)));
    }
    let field = params.build_field()?;
    let h0 = parse_poly(required(&map, "h0")?, &field)?;
    let h1 = parse_poly(required(&map, "h1")?, &field)?;
    let h = parse_poly(required(&map, "h")?, &field)?;
    let g = parse_poly(required(&map, "g")?, &field)?;
    let cofactor_factorization = factorization_from_str(required(&map, "cofactor")?, &field)?;
    let kummer = h == g.mul(&Poly::x(&field));
    let lambda = find_multiplicative_generator(&field);
    let rebuilt = crate::polyselect::build_h(&field, params.q, &h0, &h1);
    if rebuilt != h {
        return Err(Error::Parse("h does not equal h1*x^q - h0".into()));
    }
    Ok(SelectedPolynomials {
        params,
        field,
        lambda,
        h0,
        h1,
        h,
        g,
        cofactor_factorization,
        kummer,
    })
}

// ---------------------------------------------------------------------------
// relation file: symbol header then one record per relation
// ---------------------------------------------------------------------------

pub fn relations_to_string(symbols: &SymbolIndex, relations: &[Relation], hhat: &Poly) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "symbols = {}", symbols.len());
    let _ = writeln!(s, "hhat = {}", hhat.compact());
    for ord in 0..symbols.len() {
        let _ = writeln!(s, "symbol {} {}", ord, symbols.token(ord));
    }
    for rel in relations {
        let exps: Vec<String> = rel
            .exponents
            .iter()
            .map(|(c, e)| format!("{}:{}", c, e))
            .collect();
        let tag = match rel.tag {
            ModulusTag::H => "h",
            ModulusTag::HHat => "hhat",
        };
        let _ = writeln!(
            s,
            "m={} P={} mod={} exps={}",
            rel.provenance.m_index(),
            rel.source.compact(),
            tag,
            exps.join(",")
        );
    }
    s
}

pub fn relations_from_str(
    s: &str,
    sel: &SelectedPolynomials,
) -> Result<(SymbolIndex, Vec<Relation>, Poly)> {
    let field = sel.field.clone();
    let mut symbols = SymbolIndex::new(sel.lambda.clone(), sel.h1.clone());
    let mut relations = Vec::new();
    let mut hhat = sel.h.clone();
    let mut declared = 0usize;
    for line in s.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some((k, v)) = kv(line) {
            match k {
                "symbols" => {
                    declared = v
                        .parse()
                        .map_err(|_| Error::Parse("bad symbol count".into()))?;
                    continue;
                }
                "hhat" => {
                    hhat = parse_poly(v, &field)?;
                    continue;
                }
                _ => {}
            }
        }
        if let Some(rest) = line.strip_prefix("symbol ") {
            let (ord_str, token) = rest
                .split_once(' ')
                .ok_or_else(|| Error::Parse(format!("bad symbol line {:?}", line)))?;
            let ord: usize = ord_str
                .parse()
                .map_err(|_| Error::Parse("bad ordinal".into()))?;
            match token {
                "lambda" => {
                    if ord != 0 {
                        return Err(Error::Parse("lambda must be ordinal 0".into()));
                    }
                }
                "h1" => {
                    if ord != 1 {
                        return Err(Error::Parse("h1 must be ordinal 1".into()));
                    }
                }
                _ => {
                    let poly = parse_poly(token, &field)?;
                    let got = symbols.intern(poly);
                    if got != ord {
                        return Err(Error::Parse(format!(
                            "symbol {} listed out of order (expected ordinal {})",
                            token, got
                        )));
                    }
                }
            }
            continue;
        }
        // relation record
        let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
        for part in line.split_whitespace() {
            if let Some((k, v)) = part.split_once('=') {
                fields.insert(k, v);
            }
        }
        let m_index: i64 = required(&fields, "m")?
            .parse()
            .map_err(|_| Error::Parse("bad m index".into()))?;
        let source = parse_poly(required(&fields, "P")?, &field)?;
        let tag = match required(&fields, "mod")? {
            "h" => ModulusTag::H,
            "hhat" => ModulusTag::HHat,
            other => return Err(Error::Parse(format!("bad modulus tag {:?}", other))),
        };
        let mut exponents = BTreeMap::new();
        let exps = required(&fields, "exps")?;
        if !exps.is_empty() {
            for pair in exps.split(',') {
                let (ord, e) = pair
                    .split_once(':')
                    .ok_or_else(|| Error::Parse(format!("bad exponent pair {:?}", pair)))?;
                let ord: usize = ord.parse().map_err(|_| Error::Parse("bad ordinal".into()))?;
                let e: BigInt = e.parse().map_err(|_| Error::Parse("bad exponent".into()))?;
                exponents.insert(ord, e);
            }
        }
        let provenance = if m_index >= 0 {
            Provenance::Sweep {
                m_index: m_index as usize,
            }
        } else {
            Provenance::Added
        };
        relations.push(Relation {
            exponents,
            tag,
            provenance,
            source,
            involved: BTreeSet::new(),
        });
    }
    if symbols.len() != declared {
        return Err(Error::Parse(format!(
            "symbol count mismatch: declared {}, parsed {}",
            declared,
            symbols.len()
        )));
    }
    Ok((symbols, relations, hhat))
}

/// Dense matrix from parsed relations (row order preserved).
pub fn matrix_from_relations(symbols: &SymbolIndex, relations: &[Relation]) -> RelationMatrix {
    let mut matrix = RelationMatrix::new(symbols.len());
    for rel in relations {
        matrix.push_row(
            rel.dense_row(symbols.len()),
            format!("m={}", rel.provenance.m_index()),
        );
    }
    matrix
}

// ---------------------------------------------------------------------------
// matrix file
// ---------------------------------------------------------------------------

pub fn matrix_to_string(m: &RelationMatrix) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "cols={} rows={}", m.cols, m.rows.len());
    for row in &m.rows {
        let cells: Vec<String> = row.iter().map(|e| e.to_string()).collect();
        let _ = writeln!(s, "{}", cells.join(" "));
    }
    s
}

pub fn matrix_from_str(s: &str) -> Result<RelationMatrix> {
    let mut lines = s.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let fields: BTreeMap<&str, &str> = header.split_whitespace().filter_map(kv).collect();
    let cols: usize = required(&fields, "cols")?
        .parse()
        .map_err(|_| Error::Parse("bad cols".into()))?;
    let rows: usize = required(&fields, "rows")?
        .parse()
        .map_err(|_| Error::Parse("bad rows".into()))?;
    let mut matrix = RelationMatrix::new(cols);
    for (i, line) in lines.enumerate() {
        let row: std::result::Result<Vec<BigInt>, _> =
            line.split_whitespace().map(str::parse).collect();
        let row = row.map_err(|_| Error::Parse(format!("bad matrix row {}", i)))?;
        matrix.push_row(row, format!("row{}", i));
    }
    if matrix.rows.len() != rows {
        return Err(Error::Parse("row count mismatch".into()));
    }
    Ok(matrix)
}

// ---------------------------------------------------------------------------
// dlog result file
// ---------------------------------------------------------------------------

pub fn dlogs_to_string(logs: &DlogResult, symbols: &SymbolIndex) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "L={}", logs.modulus);
    let gen: Vec<String> = logs
        .generator_description
        .iter()
        .enumerate()
        .filter(|(_, e)| !e.is_zero())
        .map(|(c, e)| format!("{}:{}", c, e))
        .collect();
    let _ = writeln!(s, "generator={}", gen.join(","));
    for (ord, log) in logs.logs.iter().enumerate() {
        let _ = writeln!(s, "{} {} {}", symbols.token(ord), ord, log);
    }
    s
}

pub fn dlogs_from_str(s: &str) -> Result<DlogResult> {
    let mut modulus = None;
    let mut gen_pairs: Vec<(usize, BigUint)> = Vec::new();
    let mut logs: Vec<(usize, BigUint)> = Vec::new();
    for line in s.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(v) = line.strip_prefix("L=") {
            modulus = Some(
                v.parse::<BigUint>()
                    .map_err(|_| Error::Parse("bad L".into()))?,
            );
            continue;
        }
        if let Some(v) = line.strip_prefix("generator=") {
            if !v.is_empty() {
                for pair in v.split(',') {
                    let (c, e) = pair
                        .split_once(':')
                        .ok_or_else(|| Error::Parse("bad generator entry".into()))?;
                    gen_pairs.push((
                        c.parse().map_err(|_| Error::Parse("bad ordinal".into()))?,
                        e.parse().map_err(|_| Error::Parse("bad exponent".into()))?,
                    ));
                }
            }
            continue;
        }
        // "<token> <ordinal> <log>"
        let mut parts = line.split_whitespace();
        let _token = parts.next();
        let ord: usize = parts
            .next()
            .ok_or_else(|| Error::Parse("bad log line".into()))?
            .parse()
            .map_err(|_| Error::Parse("bad ordinal".into()))?;
        let log: BigUint = parts
            .next()
            .ok_or_else(|| Error::Parse("bad log line".into()))?
            .parse()
            .map_err(|_| Error::Parse("bad log".into()))?;
        logs.push((ord, log));
    }
    let modulus = modulus.ok_or_else(|| Error::Parse("missing L".into()))?;
    logs.sort_by_key(|(ord, _)| *ord);
    let count = logs.len();
    let mut log_vec = vec![BigUint::zero(); count];
    for (ord, log) in logs {
        if ord >= count {
            return Err(Error::Parse("non-contiguous ordinals".into()));
        }
        log_vec[ord] = log;
    }
    let mut generator_description = vec![BigUint::zero(); count];
    for (c, e) in gen_pairs {
        if c >= count {
            return Err(Error::Parse("generator ordinal out of range".into()));
        }
        generator_description[c] = e;
    }
    Ok(DlogResult {
        modulus,
        generator_description,
        logs: log_vec,
    })
}

// ---------------------------------------------------------------------------
// solution file (self-contained for arithmetic replay)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub p: u64,
    pub n: u32,
    pub c: u32,
    pub d: u32,
    pub seed: u64,
    pub selection: String,
    pub g: String,
    pub generator: String,
    pub target: String,
    pub base: Option<String>,
    pub log: BigUint,
    pub order: BigUint,
}

pub fn solution_to_string(sol: &Solution) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "p = {}", sol.p);
    let _ = writeln!(s, "n = {}", sol.n);
    let _ = writeln!(s, "C = {}", sol.c);
    let _ = writeln!(s, "D = {}", sol.d);
    let _ = writeln!(s, "seed = {}", sol.seed);
    let _ = writeln!(s, "selection = {}", sol.selection);
    let _ = writeln!(s, "g = {}", sol.g);
    let _ = writeln!(s, "generator = {}", sol.generator);
    let _ = writeln!(s, "target = {}", sol.target);
    if let Some(b) = &sol.base {
        let _ = writeln!(s, "base = {}", b);
    }
    let _ = writeln!(s, "log = {}", sol.log);
    let _ = writeln!(s, "order = {}", sol.order);
    s
}

pub fn solution_from_str(s: &str) -> Result<Solution> {
    let map: BTreeMap<&str, &str> = s.lines().filter_map(kv).collect();
    Ok(Solution {
        p: required(&map, "p")?
            .parse()
            .map_err(|_| Error::Parse("bad p".into()))?,
        n: required(&map, "n")?
            .parse()
            .map_err(|_| Error::Parse("bad n".into()))?,
        c: required(&map, "C")?
            .parse()
            .map_err(|_| Error::Parse("bad C".into()))?,
        d: required(&map, "D")?
            .parse()
            .map_err(|_| Error::Parse("bad D".into()))?,
        seed: required(&map, "seed")?
            .parse()
            .map_err(|_| Error::Parse("bad seed".into()))?,
        selection: required(&map, "selection")?.to_string(),
        g: required(&map, "g")?.to_string(),
        generator: required(&map, "generator")?.to_string(),
        target: required(&map, "target")?.to_string(),
        base: map.get("base").map(|s| s.to_string()),
        log: required(&map, "log")?
            .parse()
            .map_err(|_| Error::Parse("bad log".into()))?,
        order: required(&map, "order")?
            .parse()
            .map_err(|_| Error::Parse("bad order".into()))?,
    })
}

/// Replays a solution in field arithmetic: generator^log = target mod g.
pub fn replay_solution(sol: &Solution) -> Result<bool> {
    let params = choose_embedding(sol.p, sol.n, sol.c, sol.d)?;
    let field = params.build_field()?;
    let g = parse_poly(&sol.g, &field)?;
    let generator = parse_poly(&sol.generator, &field)?;
    let target = parse_poly(&sol.target, &field)?;
    Ok(generator.pow_mod(&sol.log, &g) == target.rem(&g))
}

/// Factorization sanity used by parsers: the stored cofactor must
/// re-multiply to h/g.
pub fn validate_selection(sel: &SelectedPolynomials) -> Result<()> {
    let (cof, rem) = crate::arith::poly::poly_divmod(&sel.h, &sel.g)?;
    if !rem.is_zero() {
        return Err(Error::Parse("g does not divide h".into()));
    }
    if sel.cofactor_factorization.product() != cof {
        return Err(Error::Parse(
            "cofactor factorization does not multiply back to h/g".into(),
        ));
    }
    let refactored = poly_factor(&cof)?;
    if refactored.factors != sel.cofactor_factorization.factors {
        return Err(Error::Parse("cofactor factorization not canonical".into()));
    }
    Ok(())
}
