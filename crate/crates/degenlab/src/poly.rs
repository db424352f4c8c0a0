//! Sparse multivariate polynomials over Q(i).
//!
//! Variables are interned names; monomials are sorted sparse exponent
//! vectors compared in graded reverse lexicographic order, so every
//! polynomial has a unique canonical representation (no zero coefficients,
//! terms keyed by monomial in a `BTreeMap`).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{OnceLock, RwLock};

use num::{Signed, Zero};
use smallvec::SmallVec;

use crate::scalar::Scalar;

/// An interned variable name.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Var(pub u32);

struct VarTable {
    names: Vec<String>,
    index: HashMap<String, u32>,
}

fn table() -> &'static RwLock<VarTable> {
    static TABLE: OnceLock<RwLock<VarTable>> = OnceLock::new();
    TABLE.get_or_init(|| {
        RwLock::new(VarTable {
            names: Vec::new(),
            index: HashMap::new(),
        })
    })
}

/// Interns `name` and returns its variable handle.
pub fn var(name: &str) -> Var {
    {
        let t = table().read().unwrap();
        if let Some(&i) = t.index.get(name) {
            return Var(i);
        }
    }
    let mut t = table().write().unwrap();
    if let Some(&i) = t.index.get(name) {
        return Var(i);
    }
    let i = t.names.len() as u32;
    t.names.push(name.to_string());
    t.index.insert(name.to_string(), i);
    Var(i)
}

pub fn var_name(v: Var) -> String {
    table().read().unwrap().names[v.0 as usize].clone()
}

/// Sparse monomial: (variable, exponent) pairs sorted by variable, all
/// exponents positive. The empty monomial is 1.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Monomial(SmallVec<[(u32, u32); 4]>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(SmallVec::new())
    }

    pub fn var(v: Var) -> Self {
        Monomial(SmallVec::from_slice(&[(v.0, 1)]))
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn exponent(&self, v: Var) -> u32 {
        self.0
            .iter()
            .find(|&&(w, _)| w == v.0)
            .map(|&(_, e)| e)
            .unwrap_or(0)
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.0.iter().map(|&(w, _)| Var(w))
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = SmallVec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            let (va, ea) = self.0[i];
            let (vb, eb) = other.0[j];
            match va.cmp(&vb) {
                std::cmp::Ordering::Less => {
                    out.push((va, ea));
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push((vb, eb));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((va, ea + eb));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().all(|&(v, e)| other.exponent(Var(v)) >= e)
    }

    /// `other / self`; caller must ensure divisibility.
    pub fn div(&self, other: &Monomial) -> Monomial {
        debug_assert!(self.divides(other));
        let mut out = SmallVec::new();
        for &(v, e) in other.0.iter() {
            let d = e - self.exponent(Var(v));
            if d > 0 {
                out.push((v, d));
            }
        }
        Monomial(out)
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        let mut vars: BTreeSet<u32> = BTreeSet::new();
        vars.extend(self.0.iter().map(|&(v, _)| v));
        vars.extend(other.0.iter().map(|&(v, _)| v));
        let mut out = SmallVec::new();
        for v in vars {
            let e = self.exponent(Var(v)).max(other.exponent(Var(v)));
            out.push((v, e));
        }
        Monomial(out)
    }

    pub fn coprime(&self, other: &Monomial) -> bool {
        self.0.iter().all(|&(v, _)| other.exponent(Var(v)) == 0)
    }
}

impl Ord for Monomial {
    /// Graded reverse lexicographic order (grevlex) with variables ordered by
    /// interner index.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            o => return o,
        }
        // Equal degree: scan variables from the highest index downward; the
        // first place the exponents differ decides, the SMALLER exponent
        // there belonging to the LARGER monomial.
        let (mut i, mut j) = (self.0.len(), other.0.len());
        loop {
            match (i, j) {
                (0, 0) => return Ordering::Equal,
                (0, _) => {
                    // self has exponent 0 on other's remaining (higher) vars:
                    // difference is negative there, so self is larger.
                    return Ordering::Greater;
                }
                (_, 0) => return Ordering::Less,
                _ => {}
            }
            let (va, ea) = self.0[i - 1];
            let (vb, eb) = other.0[j - 1];
            match va.cmp(&vb) {
                std::cmp::Ordering::Greater => return Ordering::Less, // self has the higher var
                std::cmp::Ordering::Less => return Ordering::Greater,
                std::cmp::Ordering::Equal => {
                    match ea.cmp(&eb) {
                        std::cmp::Ordering::Greater => return Ordering::Less,
                        std::cmp::Ordering::Less => return Ordering::Greater,
                        std::cmp::Ordering::Equal => {}
                    }
                    i -= 1;
                    j -= 1;
                }
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse multivariate polynomial with Gaussian-rational coefficients.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Scalar>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(Scalar::one())
    }

    pub fn constant(c: Scalar) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::one(), c);
        }
        Poly { terms }
    }

    pub fn from_int(n: i64) -> Self {
        Poly::constant(Scalar::from_int(n))
    }

    pub fn variable(v: Var) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::var(v), Scalar::one());
        Poly { terms }
    }

    pub fn named(name: &str) -> Self {
        Poly::variable(var(name))
    }

    pub fn monomial(m: Monomial, c: Scalar) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.len() <= 1 && self.terms.keys().all(Monomial::is_one)
    }

    /// The constant value of a constant polynomial.
    pub fn as_constant(&self) -> Option<Scalar> {
        if self.terms.is_empty() {
            Some(Scalar::zero())
        } else if self.is_constant() {
            self.terms.values().next().cloned()
        } else {
            None
        }
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Leading term under grevlex (largest monomial). None for zero.
    pub fn leading(&self) -> Option<(&Monomial, &Scalar)> {
        self.terms.iter().next_back()
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut s = BTreeSet::new();
        for m in self.terms.keys() {
            s.extend(m.vars());
        }
        s
    }

    pub fn uses_var(&self, v: Var) -> bool {
        self.terms.keys().any(|m| m.exponent(v) > 0)
    }

    fn insert_term(&mut self, m: Monomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = &*e.get() + &c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn scale(&self, c: &Scalar) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, a)| (m.clone(), a * c))
                .collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &Scalar) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(k, a)| (k.mul(m), a * c))
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Substitutes polynomials for variables. Unbound variables are kept.
    pub fn substitute(&self, bindings: &HashMap<Var, Poly>) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut term = Poly::constant(c.clone());
            let mut residual = Monomial::one();
            for v in m.vars() {
                let e = m.exponent(v);
                if let Some(p) = bindings.get(&v) {
                    term = &term * &p.pow(e);
                } else {
                    residual = residual.mul(&Monomial(SmallVec::from_slice(&[(v.0, e)])));
                }
            }
            out = &out + &term.mul_monomial(&residual, &Scalar::one());
        }
        out
    }

    /// Full evaluation at a scalar point; every variable must be bound.
    pub fn eval(&self, point: &HashMap<Var, Scalar>) -> Scalar {
        let mut acc = Scalar::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for v in m.vars() {
                let val = point
                    .get(&v)
                    .unwrap_or_else(|| panic!("unbound variable {}", var_name(v)));
                t = &t * &val.pow(m.exponent(v));
            }
            acc += &t;
        }
        acc
    }

    /// Minimal exponent of `v` across all terms (the `v`-adic valuation).
    /// Returns None for the zero polynomial.
    pub fn valuation(&self, v: Var) -> Option<u32> {
        self.terms.keys().map(|m| m.exponent(v)).min()
    }

    /// Divides out `v^k`; caller must ensure every term has exponent >= k.
    pub fn shift_down(&self, v: Var, k: u32) -> Poly {
        if k == 0 {
            return self.clone();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut out = SmallVec::new();
                    for &(w, e) in m.0.iter() {
                        if w == v.0 {
                            debug_assert!(e >= k);
                            if e > k {
                                out.push((w, e - k));
                            }
                        } else {
                            out.push((w, e));
                        }
                    }
                    (Monomial(out), c.clone())
                })
                .collect(),
        }
    }

    /// Sets `v = 0`: keeps only the terms free of `v`.
    pub fn at_zero(&self, v: Var) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.exponent(v) == 0)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Formal partial derivative with respect to `v`.
    pub fn derivative(&self, v: Var) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(v);
            if e == 0 {
                continue;
            }
            let mut reduced = SmallVec::new();
            for &(w, exp) in m.0.iter() {
                if w == v.0 {
                    if exp > 1 {
                        reduced.push((w, exp - 1));
                    }
                } else {
                    reduced.push((w, exp));
                }
            }
            out.insert_term(Monomial(reduced), c * &Scalar::from_int(e as i64));
        }
        out
    }

    /// Greatest monomial dividing every term (1 for the zero polynomial).
    pub fn content_monomial(&self) -> Monomial {
        let mut it = self.terms.keys();
        let mut acc = match it.next() {
            Some(m) => m.clone(),
            None => return Monomial::one(),
        };
        for m in it {
            let mut out = SmallVec::new();
            for &(v, e) in acc.0.iter() {
                let e2 = m.exponent(Var(v)).min(e);
                if e2 > 0 {
                    out.push((v, e2));
                }
            }
            acc = Monomial(out);
            if acc.is_one() {
                break;
            }
        }
        acc
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.insert_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.insert_term(m.clone(), -c);
        }
        out
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.insert_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

macro_rules! forward_owned_poly {
    ($trait:ident, $method:ident) => {
        impl $trait for Poly {
            type Output = Poly;
            fn $method(self, rhs: Poly) -> Poly {
                (&self).$method(&rhs)
            }
        }
    };
}
forward_owned_poly!(Add, add);
forward_owned_poly!(Sub, sub);
forward_owned_poly!(Mul, mul);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

fn fmt_monomial(m: &Monomial, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    // Sort factors by name so output does not depend on interning order.
    let mut factors: Vec<(String, u32)> =
        m.0.iter().map(|&(v, e)| (var_name(Var(v)), e)).collect();
    factors.sort();
    let mut first = true;
    for (name, e) in factors {
        if !first {
            write!(f, "*")?;
        }
        first = false;
        write!(f, "{name}")?;
        if e > 1 {
            write!(f, "^{e}")?;
        }
    }
    Ok(())
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        // Highest monomial first for readability.
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            let (neg, mag) = if c.is_real() && c.re.is_negative() {
                (true, -c)
            } else {
                (false, c.clone())
            };
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            first = false;
            let needs_parens = !mag.is_real() && !mag.re.is_zero();
            if m.is_one() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                fmt_monomial(m, f)?;
            } else {
                if needs_parens {
                    write!(f, "({mag})*")?;
                } else {
                    write!(f, "{mag}*")?;
                }
                fmt_monomial(m, f)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(name: &str) -> Poly {
        Poly::named(name)
    }

    #[test]
    fn grevlex_orders_by_degree_first() {
        let x = Monomial::var(var("x"));
        let y = Monomial::var(var("y"));
        let x2 = x.mul(&x);
        assert!(x2 > y);
        assert!(x2 > x);
    }

    #[test]
    fn grevlex_ties_break_reverse_lex() {
        // With x before y in the variable order, grevlex has x^2 > x*y > y^2.
        let x = Monomial::var(var("gx"));
        let y = Monomial::var(var("gy"));
        let x2 = x.mul(&x);
        let xy = x.mul(&y);
        let y2 = y.mul(&y);
        assert!(x2 > xy);
        assert!(xy > y2);
    }

    #[test]
    fn arithmetic_and_display() {
        let t = p("t");
        let a = p("alpha");
        let q = &(&t * &a) + &Poly::from_int(3);
        assert_eq!(q.to_string(), "alpha*t + 3");
        let z = &q - &q;
        assert!(z.is_zero());
    }

    #[test]
    fn substitute_is_evaluation_homomorphism() {
        // substitute((t-1)*t^3, {t -> 2}) computed against direct arithmetic.
        let t = var("t");
        let q = &(&p("t") - &Poly::one()) * &p("t").pow(3);
        let mut b = HashMap::new();
        b.insert(t, Poly::from_int(2));
        let r = q.substitute(&b);
        let direct = Scalar::from_int((2 - 1) * 8);
        assert_eq!(r.as_constant().unwrap(), direct);
    }

    #[test]
    fn substitute_distributes() {
        let (x, y) = (var("sx"), var("sy"));
        let f = &(&p("sx") + &p("sy")) * &(&p("sx") - &p("sy"));
        let mut b = HashMap::new();
        b.insert(x, &p("t") + &Poly::one());
        b.insert(y, p("t"));
        let lhs = f.substitute(&b);
        let g = &p("sx") * &p("sx");
        let h = &p("sy") * &p("sy");
        let rhs = &g.substitute(&b) - &h.substitute(&b);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn valuation_and_shift() {
        let t = var("t");
        let q = &(&p("t").pow(2) * &p("alpha")) + &p("t").pow(3);
        assert_eq!(q.valuation(t), Some(2));
        let s = q.shift_down(t, 2);
        assert_eq!(s.at_zero(t), p("alpha"));
    }
}
