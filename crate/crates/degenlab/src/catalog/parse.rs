//! Parser and serializer for the catalog text format.
//!
//! The format is line-oriented UTF-8 with `#` comments and `section ... end`
//! blocks; the machine-readable grammar ships as `catalog-format.ebnf` next
//! to this crate's manifest. The parser rejects unknown keys, duplicate
//! identifiers, and dimension mismatches with line-numbered errors.

use std::collections::{BTreeSet, HashSet};

use thiserror::Error;

use crate::algebra::{
    all_coords, coord_name, Identity, Node, ParamSpec, ProductKind, StructurePair,
    VarietyDef,
};
use crate::expr::{parse_ratfun, parse_scalar};
use crate::poly::{var, var_name, Poly, Var};
use crate::ratfun::RatFun;
use crate::scalar::Scalar;

use super::{
    AutFamily, AutMatrix, Catalog, CatalogEntry, ComponentClaim, DistinctClaim, DistinctModulo,
    FigureLabel, IsoEquality, IsoNote, NonDegenRow, NonDegenTarget, WitnessOrigin, WitnessRow,
};
use crate::algebra::BasisMatrix;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("schema error at line {line} ({field}): {msg}")]
    Schema {
        line: usize,
        field: String,
        msg: String,
    },
}

fn perr<T>(line: usize, msg: impl Into<String>) -> Result<T, CatalogError> {
    Err(CatalogError::Parse {
        line,
        msg: msg.into(),
    })
}

fn serr<T>(line: usize, field: &str, msg: impl Into<String>) -> Result<T, CatalogError> {
    Err(CatalogError::Schema {
        line,
        field: field.to_string(),
        msg: msg.into(),
    })
}

struct Lines<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(src: &'a str) -> Self {
        let mut lines = Vec::new();
        for (idx, raw) in src.lines().enumerate() {
            let noc = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            };
            let t = noc.trim();
            if !t.is_empty() {
                lines.push((idx + 1, t));
            }
        }
        Lines { lines, pos: 0 }
    }

    fn peek(&self) -> Option<(usize, &'a str)> {
        self.lines.get(self.pos).copied()
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        let r = self.peek();
        if r.is_some() {
            self.pos += 1;
        }
        r
    }
}

fn head_tail(line: &str) -> (&str, &str) {
    match line.find(char::is_whitespace) {
        Some(p) => (&line[..p], line[p..].trim_start()),
        None => (line, ""),
    }
}

fn words(s: &str) -> Vec<&str> {
    s.split_whitespace().collect()
}

/// Parses `name = expr` pairs separated by commas.
fn parse_bindings(src: &str, ln: usize) -> Result<Vec<(String, RatFun)>, CatalogError> {
    let mut out = Vec::new();
    for part in src.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let Some(eq) = part.find('=') else {
            return perr(ln, format!("expected 'name = expr' in '{part}'"));
        };
        let name = part[..eq].trim();
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return perr(ln, format!("bad binding name '{name}'"));
        }
        let rhs = parse_ratfun(part[eq + 1..].trim())
            .map_err(|e| CatalogError::Parse {
                line: ln,
                msg: e.to_string(),
            })?;
        out.push((name.to_string(), rhs));
    }
    Ok(out)
}

fn parse_poly_at(src: &str, ln: usize) -> Result<Poly, CatalogError> {
    crate::expr::parse_poly(src).map_err(|e| CatalogError::Parse {
        line: ln,
        msg: e.to_string(),
    })
}

fn parse_ratfun_at(src: &str, ln: usize) -> Result<RatFun, CatalogError> {
    parse_ratfun(src).map_err(|e| CatalogError::Parse {
        line: ln,
        msg: e.to_string(),
    })
}

fn parse_scalar_at(src: &str, ln: usize) -> Result<Scalar, CatalogError> {
    parse_scalar(src).map_err(|e| CatalogError::Parse {
        line: ln,
        msg: e.to_string(),
    })
}

/// Splits a comma-separated list of expressions respecting parentheses.
fn split_exprs(src: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, c) in src.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                out.push(src[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    let last = src[start..].trim();
    if !last.is_empty() {
        out.push(last);
    }
    out
}

/// Decomposes an e1/e2-linear expression into its coefficient pair.
fn parse_vector(src: &str, ln: usize) -> Result<[RatFun; 2], CatalogError> {
    let r = parse_ratfun_at(src, ln)?;
    let e1 = var("e1");
    let e2 = var("e2");
    if r.den().uses_var(e1) || r.den().uses_var(e2) {
        return perr(ln, "basis vectors e1/e2 may not appear in a denominator");
    }
    let num = r.num().clone();
    let den = r.den().clone();
    for (m, _) in num.terms() {
        if m.exponent(e1) + m.exponent(e2) != 1 {
            return perr(
                ln,
                format!("'{src}' is not linear homogeneous in e1, e2"),
            );
        }
    }
    let c1 = {
        let mut keep = Poly::zero();
        for (m, c) in num.terms() {
            if m.exponent(e1) == 1 {
                keep = &keep + &Poly::monomial(m.clone(), c.clone());
            }
        }
        keep.shift_down(e1, if keep.is_zero() { 0 } else { 1 })
    };
    let c2 = {
        let mut keep = Poly::zero();
        for (m, c) in num.terms() {
            if m.exponent(e2) == 1 {
                keep = &keep + &Poly::monomial(m.clone(), c.clone());
            }
        }
        keep.shift_down(e2, if keep.is_zero() { 0 } else { 1 })
    };
    Ok([
        RatFun::new(c1, den.clone()),
        RatFun::new(c2, den),
    ])
}

fn parse_matrix_line(src: &str, ln: usize) -> Result<[[RatFun; 2]; 2], CatalogError> {
    let rows: Vec<&str> = src.split(';').map(str::trim).collect();
    if rows.len() != 2 {
        return serr(ln, "matrix", format!("expected 2 rows, got {}", rows.len()));
    }
    let mut out = [
        [RatFun::zero(), RatFun::zero()],
        [RatFun::zero(), RatFun::zero()],
    ];
    for (i, row) in rows.iter().enumerate() {
        let cells = split_exprs(row);
        if cells.len() != 2 {
            return serr(
                ln,
                "matrix",
                format!("expected 2 entries per row, got {}", cells.len()),
            );
        }
        for (j, cell) in cells.iter().enumerate() {
            out[i][j] = parse_ratfun_at(cell, ln)?;
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Law expressions
// ---------------------------------------------------------------------------

#[derive(Clone)]
struct LawTerms(Vec<(Scalar, Option<Node>)>);

struct LawParser<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
}

impl<'a> LawParser<'a> {
    fn new(src: &'a str, line: usize) -> Self {
        LawParser {
            src: src.as_bytes(),
            pos: 0,
            line,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, CatalogError> {
        perr(self.line, msg)
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        if self.pos > start {
            Some(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
        } else {
            None
        }
    }

    fn number(&mut self) -> Option<i64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos > start {
            String::from_utf8_lossy(&self.src[start..self.pos]).parse().ok()
        } else {
            None
        }
    }

    fn expr(&mut self) -> Result<LawTerms, CatalogError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc.0.extend(t.0);
                }
                Some(b'-') => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc.0.extend(t.0.into_iter().map(|(c, n)| (-&c, n)));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<LawTerms, CatalogError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    acc = self.multiply(acc, rhs)?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    let scalar = self.as_scalar(&rhs)?;
                    if scalar.is_zero() {
                        return self.err("division by zero in law");
                    }
                    let inv = scalar.inv();
                    acc = LawTerms(acc.0.into_iter().map(|(c, n)| (&c * &inv, n)).collect());
                }
                _ => return Ok(acc),
            }
        }
    }

    fn multiply(&self, a: LawTerms, b: LawTerms) -> Result<LawTerms, CatalogError> {
        let mut out = Vec::new();
        for (ca, na) in &a.0 {
            for (cb, nb) in &b.0 {
                let c = ca * cb;
                let node = match (na, nb) {
                    (None, None) => None,
                    (Some(n), None) | (None, Some(n)) => Some(n.clone()),
                    (Some(_), Some(_)) => {
                        return perr(
                            self.line,
                            "nonlinear product of arguments outside dot/circ",
                        )
                    }
                };
                out.push((c, node));
            }
        }
        Ok(LawTerms(out))
    }

    fn as_scalar(&self, t: &LawTerms) -> Result<Scalar, CatalogError> {
        let mut acc = Scalar::zero();
        for (c, n) in &t.0 {
            if n.is_some() {
                return perr(self.line, "expected a scalar sub-expression");
            }
            acc += c;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<LawTerms, CatalogError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                let f = self.factor()?;
                Ok(LawTerms(f.0.into_iter().map(|(c, n)| (-&c, n)).collect()))
            }
            Some(b'+') => {
                self.pos += 1;
                self.factor()
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.number().ok_or(()).or_else(|_| self.err("bad number"))?;
                let mut value = Scalar::from_int(n);
                if self.peek() == Some(b'/') {
                    // Rational literal like 1/2 (only when followed by digits).
                    let save = self.pos;
                    self.pos += 1;
                    if let Some(d) = self.number() {
                        value = &value / &Scalar::from_int(d);
                    } else {
                        self.pos = save;
                    }
                }
                Ok(LawTerms(vec![(value, None)]))
            }
            Some(_) => {
                let Some(name) = self.ident() else {
                    return self.err("expected identifier");
                };
                match name.as_str() {
                    "dot" | "circ" => {
                        let kind = if name == "dot" {
                            ProductKind::Dot
                        } else {
                            ProductKind::Circ
                        };
                        if self.peek() != Some(b'(') {
                            return self.err(format!("expected '(' after {name}"));
                        }
                        self.pos += 1;
                        let left = self.expr()?;
                        if self.peek() != Some(b',') {
                            return self.err("expected ',' between product operands");
                        }
                        self.pos += 1;
                        let right = self.expr()?;
                        if self.peek() != Some(b')') {
                            return self.err("expected ')' closing product");
                        }
                        self.pos += 1;
                        let mut out = Vec::new();
                        for (cl, nl) in &left.0 {
                            for (cr, nr) in &right.0 {
                                let (Some(nl), Some(nr)) = (nl, nr) else {
                                    return self
                                        .err("product operands must involve the arguments");
                                };
                                out.push((
                                    cl * cr,
                                    Some(Node::Prod(
                                        kind,
                                        Box::new(nl.clone()),
                                        Box::new(nr.clone()),
                                    )),
                                ));
                            }
                        }
                        Ok(LawTerms(out))
                    }
                    _ if name.starts_with('x') && name.len() == 2 => {
                        let k = name.as_bytes()[1];
                        if !(b'1'..=b'3').contains(&k) {
                            return self.err(format!("unknown argument '{name}'"));
                        }
                        Ok(LawTerms(vec![(
                            Scalar::one(),
                            Some(Node::Arg(k - b'1')),
                        )]))
                    }
                    _ => self.err(format!("unknown name '{name}' in law")),
                }
            }
            None => self.err("unexpected end of law expression"),
        }
    }
}

fn parse_law(name: &str, src: &str, ln: usize) -> Result<Identity, CatalogError> {
    let mut p = LawParser::new(src, ln);
    let terms = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return perr(ln, "trailing input in law expression");
    }
    let mut out = Vec::new();
    for (c, n) in terms.0 {
        if c.is_zero() {
            continue;
        }
        let Some(node) = n else {
            return perr(ln, "law has a scalar term with no arguments");
        };
        out.push((c, node));
    }
    Identity::new(name, out).map_err(|e| CatalogError::Schema {
        line: ln,
        field: "law".to_string(),
        msg: e.to_string(),
    })
}

// ---------------------------------------------------------------------------
// Main parser
// ---------------------------------------------------------------------------

fn all_coord_names() -> HashSet<String> {
    all_coords()
        .into_iter()
        .map(|(p, i, j, k)| coord_name(p, i, j, k))
        .collect()
}

/// Parses a catalog from text.
pub fn load_catalog_str(src: &str) -> Result<Catalog, CatalogError> {
    let mut lines = Lines::new(src);
    let mut cat = Catalog::default();
    let mut seen_ids: HashSet<(String, String)> = HashSet::new();
    let coord_names = all_coord_names();

    while let Some((ln, line)) = lines.next() {
        let (head, tail) = head_tail(line);
        match head {
            "schema" => {
                if tail != "1" {
                    return serr(ln, "schema", format!("unsupported schema '{tail}'"));
                }
            }
            "variety" => {
                let name = tail.trim();
                if name.is_empty() || words(name).len() != 1 {
                    return perr(ln, "variety needs exactly one name");
                }
                if cat.variety(name).is_some() {
                    return serr(ln, "variety", format!("duplicate variety '{name}'"));
                }
                let mut dot_commutative = None;
                let mut laws = Vec::new();
                loop {
                    let Some((bln, bl)) = lines.next() else {
                        return perr(ln, "unterminated variety block");
                    };
                    if bl == "end" {
                        break;
                    }
                    let (k, rest) = head_tail(bl);
                    match k {
                        "dot" => {
                            dot_commutative = match rest.trim() {
                                "commutative" => Some(true),
                                "noncommutative" => Some(false),
                                other => {
                                    return serr(
                                        bln,
                                        "dot",
                                        format!("expected commutative|noncommutative, got '{other}'"),
                                    )
                                }
                            };
                        }
                        "law" => {
                            let Some(colon) = rest.find(':') else {
                                return perr(bln, "law needs 'law <name> : <expr>'");
                            };
                            let lname = rest[..colon].trim();
                            laws.push(parse_law(lname, rest[colon + 1..].trim(), bln)?);
                        }
                        other => return serr(bln, other, "unknown key in variety block"),
                    }
                }
                let Some(dot_commutative) = dot_commutative else {
                    return serr(ln, "dot", "variety must declare dot symmetry");
                };
                cat.varieties.push(VarietyDef {
                    name: name.to_string(),
                    dot_commutative,
                    laws,
                });
            }
            "algebra" => {
                let w = words(tail);
                if w.len() != 3 || w[1] != "variety" {
                    return perr(ln, "expected 'algebra <id> variety <name>'");
                }
                let (id, vname) = (w[0].to_string(), w[2].to_string());
                let Some(vdef) = cat.variety(&vname) else {
                    return serr(ln, "variety", format!("unknown variety '{vname}'"));
                };
                let dot_commutative = vdef.dot_commutative;
                if !seen_ids.insert((vname.clone(), id.clone())) {
                    return serr(ln, "algebra", format!("duplicate id '{id}' in '{vname}'"));
                }
                let mut pair = StructurePair::zero();
                let mut params = ParamSpec::default();
                let mut set_dot: HashSet<(usize, usize)> = HashSet::new();
                loop {
                    let Some((bln, bl)) = lines.next() else {
                        return perr(ln, "unterminated algebra block");
                    };
                    if bl == "end" {
                        break;
                    }
                    let (k, rest) = head_tail(bl);
                    match k {
                        "param" | "params" => {
                            for n in words(rest) {
                                params.names.push(var(n));
                            }
                        }
                        "exclude" => params.exclusions.push(parse_poly_at(rest, bln)?),
                        "dot" | "circ" => {
                            let Some(eq) = rest.find('=') else {
                                return perr(bln, "product line needs '='");
                            };
                            let idx = words(&rest[..eq]);
                            if idx.len() != 2 {
                                return serr(bln, k, "expected two basis indices");
                            }
                            let pi: usize = idx[0]
                                .parse::<usize>()
                                .ok()
                                .filter(|&v| (1..=2).contains(&v))
                                .ok_or(())
                                .or_else(|_| perr(bln, "basis index must be 1 or 2"))?;
                            let pj: usize = idx[1]
                                .parse::<usize>()
                                .ok()
                                .filter(|&v| (1..=2).contains(&v))
                                .ok_or(())
                                .or_else(|_| perr(bln, "basis index must be 1 or 2"))?;
                            let vec = parse_vector(rest[eq + 1..].trim(), bln)?;
                            let kind = if k == "dot" {
                                ProductKind::Dot
                            } else {
                                ProductKind::Circ
                            };
                            for (s, entry) in vec.iter().enumerate() {
                                let p = entry.as_poly().ok_or(()).or_else(|_| {
                                    perr(bln, "product entries must be polynomial in the parameters")
                                })?;
                                pair.product_mut(kind)[pi - 1][pj - 1][s] = p;
                            }
                            if kind == ProductKind::Dot {
                                set_dot.insert((pi - 1, pj - 1));
                            }
                        }
                        other => return serr(bln, other, "unknown key in algebra block"),
                    }
                }
                if dot_commutative {
                    // Omitted products recovered from commutativity.
                    for i in 0..2 {
                        for j in 0..2 {
                            if set_dot.contains(&(i, j)) && !set_dot.contains(&(j, i)) {
                                for s in 0..2 {
                                    pair.dot[j][i][s] = pair.dot[i][j][s].clone();
                                }
                            }
                        }
                    }
                }
                pair.params = params;
                cat.entries.push(CatalogEntry {
                    variety: vname,
                    id,
                    pair,
                });
            }
            "witness" => {
                let w = words(tail);
                if w.len() != 4 || w[2] != "->" {
                    return perr(ln, "expected 'witness <variety> <src> -> <tgt>'");
                }
                let (vname, src_id, tgt_id) = (w[0].to_string(), w[1].to_string(), w[3].to_string());
                let mut lemma = None;
                let mut origin = WitnessOrigin::Table;
                let mut symbols: Vec<Var> = Vec::new();
                let mut conditions = Vec::new();
                let mut source_bindings: Vec<(Var, RatFun)> = Vec::new();
                let mut target_bindings: Vec<(Var, RatFun)> = Vec::new();
                let mut basis: Option<BasisMatrix> = None;
                loop {
                    let Some((bln, bl)) = lines.next() else {
                        return perr(ln, "unterminated witness block");
                    };
                    if bl == "end" {
                        break;
                    }
                    let (k, rest) = head_tail(bl);
                    match k {
                        "lemma" => lemma = Some(rest.trim().to_string()),
                        "origin" => {
                            origin = match rest.trim() {
                                "table" => WitnessOrigin::Table,
                                "family" => WitnessOrigin::Family,
                                "figure" => WitnessOrigin::Figure,
                                "scaling" => WitnessOrigin::Scaling,
                                "corollary" => WitnessOrigin::Corollary,
                                other => {
                                    return serr(bln, "origin", format!("unknown origin '{other}'"))
                                }
                            }
                        }
                        "symbols" => symbols.extend(words(rest).iter().map(|n| var(n))),
                        "require" => conditions.push(parse_poly_at(rest, bln)?),
                        "source" => {
                            for (n, e) in parse_bindings(rest, bln)? {
                                source_bindings.push((var(&n), e));
                            }
                        }
                        "target" => {
                            for (n, e) in parse_bindings(rest, bln)? {
                                target_bindings.push((var(&n), e));
                            }
                        }
                        "basis" => {
                            let parts: Vec<&str> = rest.split(';').map(str::trim).collect();
                            if parts.len() != 2 {
                                return serr(
                                    bln,
                                    "basis",
                                    format!("expected 2 basis vectors, got {}", parts.len()),
                                );
                            }
                            let r0 = parse_vector(parts[0], bln)?;
                            let r1 = parse_vector(parts[1], bln)?;
                            basis = Some(BasisMatrix { rows: [r0, r1] });
                        }
                        other => return serr(bln, other, "unknown key in witness block"),
                    }
                }
                let Some(basis) = basis else {
                    return serr(ln, "basis", "witness needs a basis line");
                };
                cat.witnesses.push(WitnessRow {
                    variety: vname,
                    source: src_id,
                    target: tgt_id,
                    lemma,
                    origin,
                    symbols,
                    source_bindings,
                    target_bindings,
                    conditions,
                    basis,
                });
            }
            "nondegen" => {
                let w = words(tail);
                if w.len() != 2 {
                    return perr(ln, "expected 'nondegen <variety> <source>'");
                }
                let (vname, src_id) = (w[0].to_string(), w[1].to_string());
                let mut lemma = None;
                let mut source_bindings = Vec::new();
                let mut source_conditions = Vec::new();
                let mut free: Vec<Var> = Vec::new();
                let mut relations = Vec::new();
                let mut targets = Vec::new();
                loop {
                    let Some((bln, bl)) = lines.next() else {
                        return perr(ln, "unterminated nondegen block");
                    };
                    if bl == "end" {
                        break;
                    }
                    let (k, rest) = head_tail(bl);
                    match k {
                        "lemma" => lemma = Some(rest.trim().to_string()),
                        "bind" => {
                            for (n, e) in parse_bindings(rest, bln)? {
                                let p = e.as_poly().ok_or(()).or_else(|_| {
                                    perr(bln, "source re-bindings must be polynomial")
                                })?;
                                source_bindings.push((var(&n), p));
                            }
                        }
                        "srequire" => source_conditions.push(parse_poly_at(rest, bln)?),
                        "free" => {
                            for n in words(rest) {
                                if !coord_names.contains(n) {
                                    return serr(
                                        bln,
                                        "free",
                                        format!("'{n}' is not a coordinate name"),
                                    );
                                }
                                free.push(var(n));
                            }
                        }
                        "relation" => relations.push(parse_poly_at(rest, bln)?),
                        "target" => {
                            targets.push(parse_nondegen_target(rest, bln)?);
                        }
                        other => return serr(bln, other, "unknown key in nondegen block"),
                    }
                }
                cat.nondegens.push(NonDegenRow {
                    variety: vname,
                    source: src_id,
                    lemma,
                    source_bindings,
                    source_conditions,
                    free,
                    relations,
                    targets,
                });
            }
            "figure" => {
                let vname = tail.trim().to_string();
                loop {
                    let Some((bln, bl)) = lines.next() else {
                        return perr(ln, "unterminated figure block");
                    };
                    if bl == "end" {
                        break;
                    }
                    let (k, rest) = head_tail(bl);
                    if k != "level" {
                        return serr(bln, k, "unknown key in figure block");
                    }
                    let segments: Vec<&str> = rest.split(';').map(str::trim).collect();
                    let first = words(segments[0]);
                    if first.len() != 3 || first[1] != "=" {
                        return perr(bln, "expected 'level <id> = <n>'");
                    }
                    let id = first[0].to_string();
                    let dim: usize = first[2]
                        .parse()
                        .ok()
                        .ok_or(())
                        .or_else(|_| perr(bln, "bad dimension"))?;
                    if dim > 4 {
                        return serr(bln, "level", "orbit dimension must be in 0..=4");
                    }
                    let mut binds = Vec::new();
                    let mut require = Vec::new();
                    for seg in &segments[1..] {
                        let (sk, srest) = head_tail(seg);
                        match sk {
                            "at" => {
                                for (n, e) in parse_bindings(srest, bln)? {
                                    let s = e
                                        .as_poly()
                                        .and_then(|p| p.as_constant())
                                        .ok_or(())
                                        .or_else(|_| perr(bln, "'at' values must be scalars"))?;
                                    binds.push((var(&n), s));
                                }
                            }
                            "require" => {
                                for e in split_exprs(srest) {
                                    require.push(parse_poly_at(e, bln)?);
                                }
                            }
                            other => return serr(bln, other, "unknown segment in level line"),
                        }
                    }
                    cat.figures.push(FigureLabel {
                        variety: vname.clone(),
                        id,
                        dim,
                        binds,
                        require,
                    });
                }
            }
            "components" => {
                let Some(eq) = tail.find('=') else {
                    return perr(ln, "expected 'components <variety> = <ids>'");
                };
                let vname = tail[..eq].trim().to_string();
                let ids: Vec<String> = tail[eq + 1..]
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect();
                if ids.is_empty() {
                    return serr(ln, "components", "empty component list");
                }
                cat.components.push(ComponentClaim {
                    variety: vname,
                    components: ids,
                });
            }
            "autgroup" => {
                let base = tail.trim().to_string();
                let mut families = Vec::new();
                let mut derdim = None;
                loop {
                    let Some((bln, bl)) = lines.next() else {
                        return perr(ln, "unterminated autgroup block");
                    };
                    if bl == "end" {
                        break;
                    }
                    let (k, rest) = head_tail(bl);
                    match k {
                        "derdim" => {
                            derdim = Some(rest.parse::<usize>().ok().ok_or(()).or_else(|_| {
                                perr(bln, "derdim must be an integer")
                            })?)
                        }
                        "family" => {
                            let mut params = Vec::new();
                            let mut exclusions = Vec::new();
                            let mut matrix = None;
                            loop {
                                let Some((fln, fl)) = lines.next() else {
                                    return perr(bln, "unterminated family block");
                                };
                                if fl == "end" {
                                    break;
                                }
                                let (fk, frest) = head_tail(fl);
                                match fk {
                                    "param" | "params" => {
                                        params.extend(words(frest).iter().map(|n| var(n)))
                                    }
                                    "exclude" => exclusions.push(parse_poly_at(frest, fln)?),
                                    "matrix" => matrix = Some(parse_matrix_line(frest, fln)?),
                                    other => {
                                        return serr(fln, other, "unknown key in family block")
                                    }
                                }
                            }
                            let Some(matrix) = matrix else {
                                return serr(bln, "matrix", "family needs a matrix");
                            };
                            families.push(AutMatrix {
                                params,
                                exclusions,
                                matrix,
                            });
                        }
                        other => return serr(bln, other, "unknown key in autgroup block"),
                    }
                }
                let Some(derdim) = derdim else {
                    return serr(ln, "derdim", "autgroup needs derdim");
                };
                cat.autgroups.push(AutFamily {
                    base,
                    families,
                    derdim,
                });
            }
            "iso" => {
                let w = words(tail);
                if w.len() != 2 {
                    return perr(ln, "expected 'iso <variety> <id>'");
                }
                let (vname, id) = (w[0].to_string(), w[1].to_string());
                let mut param_map = Vec::new();
                let mut matrix = None;
                loop {
                    let Some((bln, bl)) = lines.next() else {
                        return perr(ln, "unterminated iso block");
                    };
                    if bl == "end" {
                        break;
                    }
                    let (k, rest) = head_tail(bl);
                    match k {
                        "map" => {
                            for (n, e) in parse_bindings(rest, bln)? {
                                let p = e.as_poly().ok_or(()).or_else(|_| {
                                    perr(bln, "iso parameter maps must be polynomial")
                                })?;
                                param_map.push((var(&n), p));
                            }
                        }
                        "matrix" => matrix = Some(parse_matrix_line(rest, bln)?),
                        other => return serr(bln, other, "unknown key in iso block"),
                    }
                }
                let Some(matrix) = matrix else {
                    return serr(ln, "matrix", "iso needs a matrix");
                };
                cat.isos.push(IsoNote {
                    variety: vname,
                    id,
                    param_map,
                    matrix,
                });
            }
            "isoeq" => {
                let Some(epos) = tail.find(" equals ") else {
                    return perr(ln, "expected '... equals ...'");
                };
                let left_src = &tail[..epos];
                let right_src = &tail[epos + " equals ".len()..];
                let lw = words(left_src);
                if lw.is_empty() {
                    return perr(ln, "isoeq needs '<variety> <id> [at binds]'");
                }
                let vname = lw[0].to_string();
                let parse_side = |src: &str| -> Result<(String, Vec<(Var, Scalar)>), CatalogError> {
                    let w = words(src);
                    if w.is_empty() {
                        return perr(ln, "isoeq side needs an id");
                    }
                    let id = w[0].to_string();
                    let mut binds = Vec::new();
                    if w.len() > 1 {
                        if w[1] != "at" {
                            return perr(ln, "expected 'at' in isoeq side");
                        }
                        let at_src = src[src.find("at").unwrap() + 2..].trim();
                        for (n, e) in parse_bindings(at_src, ln)? {
                            let s = e
                                .as_poly()
                                .and_then(|p| p.as_constant())
                                .ok_or(())
                                .or_else(|_| perr(ln, "isoeq binds must be scalars"))?;
                            binds.push((var(&n), s));
                        }
                    }
                    Ok((id, binds))
                };
                let (left, left_binds) = parse_side(&left_src[vname.len()..])?;
                let (right, right_binds) = parse_side(right_src)?;
                cat.iso_equalities.push(IsoEquality {
                    variety: vname,
                    left,
                    left_binds,
                    right,
                    right_binds,
                });
            }
            "distinct" => {
                let w = words(tail);
                if w.len() != 2 && !(w.len() == 4 && w[2] == "modulo") {
                    return perr(ln, "expected 'distinct <variety> <id> [modulo swap|negation]'");
                }
                let modulo = if w.len() == 4 {
                    match w[3] {
                        "swap" => DistinctModulo::Swap,
                        "negation" => DistinctModulo::Negation,
                        other => {
                            return serr(ln, "modulo", format!("unknown identification '{other}'"))
                        }
                    }
                } else {
                    DistinctModulo::Nothing
                };
                cat.distincts.push(DistinctClaim {
                    variety: w[0].to_string(),
                    id: w[1].to_string(),
                    modulo,
                });
            }
            other => return serr(ln, other, "unknown top-level statement"),
        }
    }

    validate(&cat)?;
    Ok(cat)
}

fn parse_nondegen_target(src: &str, ln: usize) -> Result<NonDegenTarget, CatalogError> {
    let segments: Vec<&str> = src.split(';').map(str::trim).collect();
    let mut first = words(segments[0]);
    if first.is_empty() {
        return perr(ln, "target needs an id");
    }
    let target = first.remove(0).to_string();
    let mut symbols = Vec::new();
    let mut bindings: Vec<(Var, RatFun)> = Vec::new();
    let mut i = 0;
    while i < first.len() {
        match first[i] {
            "params" => {
                i += 1;
                while i < first.len() && first[i] != "at" {
                    symbols.push(var(first[i]));
                    i += 1;
                }
            }
            "at" => {
                // Everything after 'at' is comma-separated bindings.
                let at_pos = segments[0].find(" at ").unwrap_or(0);
                for (n, e) in parse_bindings(&segments[0][at_pos + 4..], ln)? {
                    bindings.push((var(&n), e));
                }
                i = first.len();
            }
            other => return perr(ln, format!("unknown token '{other}' in target")),
        }
    }
    let mut require = Vec::new();
    let mut require_any = Vec::new();
    for seg in &segments[1..] {
        let (k, rest) = head_tail(seg);
        match k {
            "require" => {
                for e in split_exprs(rest) {
                    require.push(parse_poly_at(e, ln)?);
                }
            }
            "require_any" => {
                let mut group = Vec::new();
                for e in split_exprs(rest) {
                    group.push(parse_poly_at(e, ln)?);
                }
                if group.is_empty() {
                    return perr(ln, "empty require_any group");
                }
                require_any.push(group);
            }
            other => return perr(ln, format!("unknown segment '{other}' in target")),
        }
    }
    Ok(NonDegenTarget {
        target,
        symbols,
        bindings,
        require,
        require_any,
    })
}

/// Cross-reference validation after parsing.
fn validate(cat: &Catalog) -> Result<(), CatalogError> {
    let find = |v: &str, id: &str| cat.entry(v, id).is_some();
    for w in &cat.witnesses {
        if cat.variety(&w.variety).is_none() {
            return serr(0, "witness", format!("unknown variety '{}'", w.variety));
        }
        for (label, id) in [("source", &w.source), ("target", &w.target)] {
            if !find(&w.variety, id) {
                return serr(
                    0,
                    "witness",
                    format!("{label} '{id}' not in variety '{}'", w.variety),
                );
            }
        }
        let sp = &cat.entry(&w.variety, &w.source).unwrap().pair.params;
        let bound: BTreeSet<Var> = w.source_bindings.iter().map(|(v, _)| *v).collect();
        for p in &sp.names {
            if !bound.contains(p) {
                return serr(
                    0,
                    "witness",
                    format!(
                        "{}: source parameter '{}' unbound",
                        w.key(),
                        var_name(*p)
                    ),
                );
            }
        }
        let tp = &cat.entry(&w.variety, &w.target).unwrap().pair.params;
        let tbound: BTreeSet<Var> = w.target_bindings.iter().map(|(v, _)| *v).collect();
        for p in &tp.names {
            if !tbound.contains(p) {
                return serr(
                    0,
                    "witness",
                    format!(
                        "{}: target parameter '{}' unbound",
                        w.key(),
                        var_name(*p)
                    ),
                );
            }
        }
    }
    for r in &cat.nondegens {
        if !find(&r.variety, &r.source) {
            return serr(
                0,
                "nondegen",
                format!("source '{}' not in variety '{}'", r.source, r.variety),
            );
        }
        for t in &r.targets {
            if !find(&r.variety, &t.target) {
                return serr(
                    0,
                    "nondegen",
                    format!("target '{}' not in variety '{}'", t.target, r.variety),
                );
            }
            // Target parameters are either bound by name or matched
            // positionally against the fresh symbols.
            let tp = &cat.entry(&r.variety, &t.target).unwrap().pair.params;
            let explicit: BTreeSet<Var> = t.bindings.iter().map(|(v, _)| *v).collect();
            let unbound = tp.names.iter().filter(|p| !explicit.contains(p)).count();
            if unbound > t.symbols.len() {
                return serr(
                    0,
                    "nondegen",
                    format!(
                        "{}->{}: {} target parameters unbound but only {} symbols",
                        r.source,
                        t.target,
                        unbound,
                        t.symbols.len()
                    ),
                );
            }
        }
    }
    for f in &cat.figures {
        if !find(&f.variety, &f.id) {
            return serr(
                0,
                "figure",
                format!("label '{}' not in variety '{}'", f.id, f.variety),
            );
        }
    }
    for c in &cat.components {
        for id in &c.components {
            if !find(&c.variety, id) {
                return serr(
                    0,
                    "components",
                    format!("component '{}' not in variety '{}'", id, c.variety),
                );
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Serializer
// ---------------------------------------------------------------------------

fn write_vector(v: &[RatFun; 2]) -> String {
    if v[0].is_zero() && v[1].is_zero() {
        return "0".to_string();
    }
    let mut parts = Vec::new();
    for (name, r) in [("e1", &v[0]), ("e2", &v[1])] {
        if !r.is_zero() {
            parts.push(format!("({})*{}", r, name));
        }
    }
    parts.join(" + ")
}

fn write_node(n: &Node) -> String {
    match n {
        Node::Arg(a) => format!("x{}", a + 1),
        Node::Prod(kind, l, r) => {
            let k = match kind {
                ProductKind::Dot => "dot",
                ProductKind::Circ => "circ",
            };
            format!("{k}({}, {})", write_node(l), write_node(r))
        }
    }
}

fn write_law(id: &Identity) -> String {
    let mut out = String::new();
    for (i, (c, n)) in id.terms.iter().enumerate() {
        let node = write_node(n);
        let piece = if c.is_one() {
            node
        } else {
            format!("({})*{}", c, node)
        };
        if i == 0 {
            out.push_str(&piece);
        } else {
            out.push_str(" + ");
            out.push_str(&piece);
        }
    }
    out
}

fn write_bindings<T: std::fmt::Display>(binds: &[(Var, T)]) -> String {
    binds
        .iter()
        .map(|(v, e)| format!("{} = {}", var_name(*v), e))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Serializes a catalog in the canonical text form; loading the result
/// reproduces the catalog.
pub fn save_catalog(cat: &Catalog) -> String {
    let mut s = String::new();
    s.push_str("# degenlab catalog\nschema 1\n");
    for v in &cat.varieties {
        s.push_str(&format!("\nvariety {}\n", v.name));
        s.push_str(&format!(
            "  dot {}\n",
            if v.dot_commutative {
                "commutative"
            } else {
                "noncommutative"
            }
        ));
        for law in &v.laws {
            s.push_str(&format!("  law {} : {}\n", law.name, write_law(law)));
        }
        s.push_str("end\n");
    }
    for e in &cat.entries {
        s.push_str(&format!("\nalgebra {} variety {}\n", e.id, e.variety));
        if !e.pair.params.names.is_empty() {
            let names: Vec<String> = e.pair.params.names.iter().map(|v| var_name(*v)).collect();
            s.push_str(&format!("  params {}\n", names.join(" ")));
        }
        for x in &e.pair.params.exclusions {
            s.push_str(&format!("  exclude {x}\n"));
        }
        for kind in ProductKind::BOTH {
            let table = e.pair.product(kind);
            let tag = match kind {
                ProductKind::Dot => "dot",
                ProductKind::Circ => "circ",
            };
            for i in 0..2 {
                for j in 0..2 {
                    let v = [
                        RatFun::from_poly(table[i][j][0].clone()),
                        RatFun::from_poly(table[i][j][1].clone()),
                    ];
                    if !v[0].is_zero() || !v[1].is_zero() {
                        s.push_str(&format!(
                            "  {tag} {} {} = {}\n",
                            i + 1,
                            j + 1,
                            write_vector(&v)
                        ));
                    }
                }
            }
        }
        s.push_str("end\n");
    }
    for w in &cat.witnesses {
        s.push_str(&format!(
            "\nwitness {} {} -> {}\n",
            w.variety, w.source, w.target
        ));
        if let Some(l) = &w.lemma {
            s.push_str(&format!("  lemma {l}\n"));
        }
        let origin = match w.origin {
            WitnessOrigin::Table => "table",
            WitnessOrigin::Family => "family",
            WitnessOrigin::Figure => "figure",
            WitnessOrigin::Scaling => "scaling",
            WitnessOrigin::Corollary => "corollary",
        };
        s.push_str(&format!("  origin {origin}\n"));
        if !w.symbols.is_empty() {
            let names: Vec<String> = w.symbols.iter().map(|v| var_name(*v)).collect();
            s.push_str(&format!("  symbols {}\n", names.join(" ")));
        }
        for c in &w.conditions {
            s.push_str(&format!("  require {c}\n"));
        }
        if !w.source_bindings.is_empty() {
            s.push_str(&format!("  source {}\n", write_bindings(&w.source_bindings)));
        }
        if !w.target_bindings.is_empty() {
            s.push_str(&format!("  target {}\n", write_bindings(&w.target_bindings)));
        }
        s.push_str(&format!(
            "  basis {} ; {}\n",
            write_vector(&w.basis.rows[0]),
            write_vector(&w.basis.rows[1])
        ));
        s.push_str("end\n");
    }
    for r in &cat.nondegens {
        s.push_str(&format!("\nnondegen {} {}\n", r.variety, r.source));
        if let Some(l) = &r.lemma {
            s.push_str(&format!("  lemma {l}\n"));
        }
        if !r.source_bindings.is_empty() {
            s.push_str(&format!("  bind {}\n", write_bindings(&r.source_bindings)));
        }
        for c in &r.source_conditions {
            s.push_str(&format!("  srequire {c}\n"));
        }
        if !r.free.is_empty() {
            let names: Vec<String> = r.free.iter().map(|v| var_name(*v)).collect();
            s.push_str(&format!("  free {}\n", names.join(" ")));
        }
        for rel in &r.relations {
            s.push_str(&format!("  relation {rel}\n"));
        }
        for t in &r.targets {
            let mut line = format!("  target {}", t.target);
            if !t.symbols.is_empty() {
                let names: Vec<String> = t.symbols.iter().map(|v| var_name(*v)).collect();
                line.push_str(&format!(" params {}", names.join(" ")));
            }
            if !t.bindings.is_empty() {
                line.push_str(&format!(" at {}", write_bindings(&t.bindings)));
            }
            for req in &t.require {
                line.push_str(&format!(" ; require {req}"));
            }
            for group in &t.require_any {
                let parts: Vec<String> = group.iter().map(|p| p.to_string()).collect();
                line.push_str(&format!(" ; require_any {}", parts.join(", ")));
            }
            s.push_str(&line);
            s.push('\n');
        }
        s.push_str("end\n");
    }
    // Figures grouped by variety, order preserved.
    let mut fig_varieties: Vec<&str> = Vec::new();
    for f in &cat.figures {
        if !fig_varieties.contains(&f.variety.as_str()) {
            fig_varieties.push(&f.variety);
        }
    }
    for v in fig_varieties {
        s.push_str(&format!("\nfigure {v}\n"));
        for f in cat.figures.iter().filter(|f| f.variety == v) {
            let mut line = format!("  level {} = {}", f.id, f.dim);
            if !f.binds.is_empty() {
                line.push_str(&format!(" ; at {}", write_bindings(&f.binds)));
            }
            if !f.require.is_empty() {
                let parts: Vec<String> = f.require.iter().map(|p| p.to_string()).collect();
                line.push_str(&format!(" ; require {}", parts.join(", ")));
            }
            s.push_str(&line);
            s.push('\n');
        }
        s.push_str("end\n");
    }
    for c in &cat.components {
        s.push_str(&format!(
            "\ncomponents {} = {}\n",
            c.variety,
            c.components.join(", ")
        ));
    }
    for g in &cat.autgroups {
        s.push_str(&format!("\nautgroup {}\n", g.base));
        for fam in &g.families {
            s.push_str("  family\n");
            if !fam.params.is_empty() {
                let names: Vec<String> = fam.params.iter().map(|v| var_name(*v)).collect();
                s.push_str(&format!("    params {}\n", names.join(" ")));
            }
            for x in &fam.exclusions {
                s.push_str(&format!("    exclude {x}\n"));
            }
            s.push_str(&format!(
                "    matrix {}, {} ; {}, {}\n",
                fam.matrix[0][0], fam.matrix[0][1], fam.matrix[1][0], fam.matrix[1][1]
            ));
            s.push_str("  end\n");
        }
        s.push_str(&format!("  derdim {}\n", g.derdim));
        s.push_str("end\n");
    }
    for n in &cat.isos {
        s.push_str(&format!("\niso {} {}\n", n.variety, n.id));
        s.push_str(&format!("  map {}\n", write_bindings(&n.param_map)));
        s.push_str(&format!(
            "  matrix {}, {} ; {}, {}\n",
            n.matrix[0][0], n.matrix[0][1], n.matrix[1][0], n.matrix[1][1]
        ));
        s.push_str("end\n");
    }
    for e in &cat.iso_equalities {
        let side = |id: &str, binds: &[(Var, Scalar)]| {
            if binds.is_empty() {
                id.to_string()
            } else {
                format!("{id} at {}", write_bindings(binds))
            }
        };
        s.push_str(&format!(
            "\nisoeq {} {} equals {}\n",
            e.variety,
            side(&e.left, &e.left_binds),
            side(&e.right, &e.right_binds)
        ));
    }
    for d in &cat.distincts {
        let tail = match d.modulo {
            DistinctModulo::Nothing => String::new(),
            DistinctModulo::Swap => " modulo swap".to_string(),
            DistinctModulo::Negation => " modulo negation".to_string(),
        };
        s.push_str(&format!("\ndistinct {} {}{}\n", d.variety, d.id, tail));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINI: &str = r#"
# tiny catalog
schema 1

variety leibniz_poisson_mini
  dot commutative
  law dot_commutative : dot(x1,x2) - dot(x2,x1)
  law compat : circ(dot(x1,x2),x3) - dot(circ(x1,x3),x2) - dot(x1,circ(x2,x3))
end

algebra C8 variety leibniz_poisson_mini
end

algebra L5 variety leibniz_poisson_mini
  param alpha
  dot 1 1 = e1
  dot 1 2 = e2
  circ 2 1 = alpha*e2
end

witness leibniz_poisson_mini L5 -> C8
  origin scaling
  symbols alpha
  source alpha = alpha
  basis t*e1 ; t*e2
end

nondegen leibniz_poisson_mini L5
  free a111 a112 a122 a212 b112 b212
  relation a111 - a122
  target C8
end

figure leibniz_poisson_mini
  level C8 = 0
  level L5 = 3
end

components leibniz_poisson_mini = L5
"#;

    #[test]
    fn parses_minimal_catalog() {
        let cat = load_catalog_str(MINI).unwrap();
        assert_eq!(cat.varieties.len(), 1);
        assert_eq!(cat.entries.len(), 2);
        let l5 = cat.entry("leibniz_poisson_mini", "L5").unwrap();
        // Commutative completion filled dot 2 1.
        assert_eq!(l5.pair.dot[1][0][1], Poly::one());
        assert_eq!(cat.witnesses.len(), 1);
        assert_eq!(cat.nondegens.len(), 1);
    }

    #[test]
    fn roundtrips_minimal_catalog() {
        let cat = load_catalog_str(MINI).unwrap();
        let text = save_catalog(&cat);
        let again = load_catalog_str(&text).unwrap();
        assert_eq!(cat, again);
    }

    #[test]
    fn rejects_duplicate_ids() {
        let bad = format!("{MINI}\nalgebra L5 variety leibniz_poisson_mini\nend\n");
        let err = load_catalog_str(&bad).unwrap_err();
        assert!(matches!(err, CatalogError::Schema { .. }), "{err}");
    }

    #[test]
    fn rejects_wrong_basis_dimension() {
        let bad = MINI.replace("basis t*e1 ; t*e2", "basis t*e1 ; t*e2 ; e1");
        let err = load_catalog_str(&bad).unwrap_err();
        assert!(matches!(err, CatalogError::Schema { .. }), "{err}");
    }

    #[test]
    fn rejects_unknown_keys() {
        let bad = MINI.replace("origin scaling", "flavor vanilla");
        assert!(load_catalog_str(&bad).is_err());
    }

    #[test]
    fn law_parser_handles_coefficients() {
        let id = parse_law("t", "2*dot(circ(x1,x2),x3) - circ(dot(x1,x3),x2)", 1).unwrap();
        assert_eq!(id.arity, 3);
        assert_eq!(id.terms.len(), 2);
        assert_eq!(id.terms[0].0, Scalar::from_int(2));
        assert_eq!(id.terms[1].0, Scalar::from_int(-1));
    }
}
