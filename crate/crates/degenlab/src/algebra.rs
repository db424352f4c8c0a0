//! Structure constants of two-dimensional bilinear pairs and the identity
//! machinery for every Poisson-type variety in the catalog.
//!
//! A pair is stored as two 2x2x2 tables of parameter polynomials: `dot`
//! carries the constants of the first product, `circ` those of the second
//! (the bracket, when the variety is bracket-flavored). Identities are
//! multilinear expression trees over formal arguments `x1..xn` and the two
//! products; by multilinearity an identity holds if and only if it expands
//! to zero on every tuple of basis vectors.

use std::collections::HashMap;

use thiserror::Error;

use crate::poly::{var, Poly, Var};
use crate::ratfun::{substitute_poly, RatFun};
use crate::scalar::Scalar;

pub const DIM: usize = 2;

/// 2x2x2 table indexed `[i][j][k]`: coefficient of `e_{k+1}` in
/// `e_{i+1} * e_{j+1}`.
pub type Table<T> = [[[T; DIM]; DIM]; DIM];

pub fn table_map<T, U>(t: &Table<T>, mut f: impl FnMut(&T) -> U) -> Table<U> {
    std::array::from_fn(|i| std::array::from_fn(|j| std::array::from_fn(|k| f(&t[i][j][k]))))
}

pub fn zero_table() -> Table<Poly> {
    table_map(&std::array::from_fn(|_| {
        std::array::from_fn(|_| std::array::from_fn(|_| ()))
    }), |_| Poly::zero())
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum ProductKind {
    Dot,
    Circ,
}

impl ProductKind {
    pub const BOTH: [ProductKind; 2] = [ProductKind::Dot, ProductKind::Circ];
}

/// Canonical ASCII name of a structure-constant coordinate: `a221` is the
/// coefficient of e1 in e2.e2, `b121` the coefficient of e1 in e1 o e2.
pub fn coord_name(p: ProductKind, i: usize, j: usize, k: usize) -> String {
    let tag = match p {
        ProductKind::Dot => 'a',
        ProductKind::Circ => 'b',
    };
    format!("{}{}{}{}", tag, i + 1, j + 1, k + 1)
}

pub fn coord_var(p: ProductKind, i: usize, j: usize, k: usize) -> Var {
    var(&coord_name(p, i, j, k))
}

/// All 16 coordinates in canonical order (dot first, then circ; indices
/// big-endian in i, j, k).
pub fn all_coords() -> Vec<(ProductKind, usize, usize, usize)> {
    let mut out = Vec::with_capacity(16);
    for p in ProductKind::BOTH {
        for i in 0..DIM {
            for j in 0..DIM {
                for k in 0..DIM {
                    out.push((p, i, j, k));
                }
            }
        }
    }
    out
}

/// Declared parameters of a family together with its non-vanishing
/// exclusions (`alpha != 0` is recorded as the polynomial `alpha`).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParamSpec {
    pub names: Vec<Var>,
    pub exclusions: Vec<Poly>,
}

/// Structure constants of a bilinear pair with polynomial entries in the
/// declared parameters.
#[derive(Clone, PartialEq, Eq)]
pub struct StructurePair {
    pub dot: Table<Poly>,
    pub circ: Table<Poly>,
    pub params: ParamSpec,
}

impl StructurePair {
    pub fn zero() -> Self {
        StructurePair {
            dot: zero_table(),
            circ: zero_table(),
            params: ParamSpec::default(),
        }
    }

    pub fn product(&self, p: ProductKind) -> &Table<Poly> {
        match p {
            ProductKind::Dot => &self.dot,
            ProductKind::Circ => &self.circ,
        }
    }

    pub fn product_mut(&mut self, p: ProductKind) -> &mut Table<Poly> {
        match p {
            ProductKind::Dot => &mut self.dot,
            ProductKind::Circ => &mut self.circ,
        }
    }

    pub fn is_product_zero(&self, p: ProductKind) -> bool {
        let t = self.product(p);
        (0..DIM).all(|i| (0..DIM).all(|j| (0..DIM).all(|k| t[i][j][k].is_zero())))
    }

    /// Substitutes parameter bindings into every entry.
    pub fn substitute(&self, bindings: &HashMap<Var, Poly>) -> StructurePair {
        StructurePair {
            dot: table_map(&self.dot, |p| p.substitute(bindings)),
            circ: table_map(&self.circ, |p| p.substitute(bindings)),
            params: ParamSpec {
                names: self
                    .params
                    .names
                    .iter()
                    .copied()
                    .filter(|v| !bindings.contains_key(v))
                    .collect(),
                exclusions: self
                    .params
                    .exclusions
                    .iter()
                    .map(|p| p.substitute(bindings))
                    .collect(),
            },
        }
    }

    /// Substitutes rational functions for the parameters (used by witness
    /// rows whose parametrized index is a Laurent expression in t).
    pub fn substitute_ratfun(
        &self,
        bindings: &HashMap<Var, RatFun>,
    ) -> (Table<RatFun>, Table<RatFun>) {
        (
            table_map(&self.dot, |p| substitute_poly(p, bindings)),
            table_map(&self.circ, |p| substitute_poly(p, bindings)),
        )
    }

    /// Fully evaluates the entries at a scalar parameter point.
    pub fn eval(&self, point: &HashMap<Var, Scalar>) -> StructurePair {
        let bindings: HashMap<Var, Poly> = point
            .iter()
            .map(|(v, s)| (*v, Poly::constant(s.clone())))
            .collect();
        self.substitute(&bindings)
    }
}

impl std::fmt::Debug for StructurePair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts = Vec::new();
        for (p, i, j, k) in all_coords() {
            let e = &self.product(p)[i][j][k];
            if !e.is_zero() {
                parts.push(format!("{}={}", coord_name(p, i, j, k), e));
            }
        }
        write!(f, "StructurePair{{{}}}", parts.join(", "))
    }
}

/// A node of a multilinear identity: a formal argument or a product of two
/// sub-expressions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node {
    Arg(u8),
    Prod(ProductKind, Box<Node>, Box<Node>),
}

impl Node {
    fn collect_args(&self, out: &mut Vec<u8>) {
        match self {
            Node::Arg(a) => out.push(*a),
            Node::Prod(_, l, r) => {
                l.collect_args(out);
                r.collect_args(out);
            }
        }
    }
}

/// A multilinear identity `sum_i coeff_i * node_i = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Identity {
    pub name: String,
    pub arity: u8,
    pub terms: Vec<(Scalar, Node)>,
}

#[derive(Debug, Error)]
pub enum IdentityError {
    #[error("law '{0}' is not multilinear: a term uses arguments {1:?}")]
    NotMultilinear(String, Vec<u8>),
    #[error("law '{0}' has no terms")]
    Empty(String),
}

impl Identity {
    /// Validates multilinearity: each term must use x1..x_arity exactly once.
    pub fn new(name: &str, terms: Vec<(Scalar, Node)>) -> Result<Self, IdentityError> {
        if terms.is_empty() {
            return Err(IdentityError::Empty(name.to_string()));
        }
        let mut arity = 0u8;
        for (_, node) in &terms {
            let mut args = Vec::new();
            node.collect_args(&mut args);
            let mut sorted = args.clone();
            sorted.sort_unstable();
            let n = sorted.len() as u8;
            if sorted != (0..n).collect::<Vec<_>>() {
                return Err(IdentityError::NotMultilinear(name.to_string(), args));
            }
            arity = arity.max(n);
        }
        // All terms must use the same argument set.
        for (_, node) in &terms {
            let mut args = Vec::new();
            node.collect_args(&mut args);
            if args.len() as u8 != arity {
                return Err(IdentityError::NotMultilinear(name.to_string(), args));
            }
        }
        Ok(Identity {
            name: name.to_string(),
            arity,
            terms,
        })
    }
}

fn eval_node(s: &StructurePair, node: &Node, tuple: &[usize]) -> [Poly; DIM] {
    match node {
        Node::Arg(a) => {
            let mut v = [Poly::zero(), Poly::zero()];
            v[tuple[*a as usize]] = Poly::one();
            v
        }
        Node::Prod(kind, l, r) => {
            let lv = eval_node(s, l, tuple);
            let rv = eval_node(s, r, tuple);
            let c = s.product(*kind);
            let mut out = [Poly::zero(), Poly::zero()];
            for i in 0..DIM {
                if lv[i].is_zero() {
                    continue;
                }
                for j in 0..DIM {
                    if rv[j].is_zero() {
                        continue;
                    }
                    let coeff = &lv[i] * &rv[j];
                    for k in 0..DIM {
                        if !c[i][j][k].is_zero() {
                            out[k] = &out[k] + &(&coeff * &c[i][j][k]);
                        }
                    }
                }
            }
            out
        }
    }
}

/// Expands an identity on one tuple of basis vectors; the result is the
/// coefficient vector of left-minus-right, a pair of parameter polynomials.
pub fn expand_identity(s: &StructurePair, id: &Identity, tuple: &[usize]) -> [Poly; DIM] {
    assert_eq!(tuple.len(), id.arity as usize, "tuple length != arity");
    let mut acc = [Poly::zero(), Poly::zero()];
    for (c, node) in &id.terms {
        let v = eval_node(s, node, tuple);
        for k in 0..DIM {
            acc[k] = &acc[k] + &v[k].scale(c);
        }
    }
    acc
}

/// Defining laws of one variety. `dot_commutative` records whether omitted
/// dot products in multiplication tables are recovered by commutativity.
#[derive(Clone, Debug)]
pub struct VarietyDef {
    pub name: String,
    pub dot_commutative: bool,
    pub laws: Vec<Identity>,
}

/// One violated law: which identity, on which basis tuple, with which
/// nonzero residual vector.
#[derive(Clone, Debug)]
pub struct Violation {
    pub law: String,
    pub tuple: Vec<usize>,
    pub residual: [Poly; DIM],
}

/// Checks every law of `v` on every basis tuple, identically in the
/// parameters. Empty result means the pair lies in the variety.
pub fn check_variety(s: &StructurePair, v: &VarietyDef) -> Vec<Violation> {
    let mut out = Vec::new();
    for law in &v.laws {
        let n = law.arity as usize;
        for mask in 0..(1usize << n) {
            let tuple: Vec<usize> = (0..n).map(|b| (mask >> b) & 1).collect();
            let residual = expand_identity(s, law, &tuple);
            if residual.iter().any(|p| !p.is_zero()) {
                out.push(Violation {
                    law: law.name.clone(),
                    tuple,
                    residual,
                });
            }
        }
    }
    out
}

/// A 2x2 basis-change matrix; row `i` holds the coefficients of the new
/// basis vector `E_{i+1}` in the old basis.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisMatrix {
    pub rows: [[RatFun; DIM]; DIM],
}

#[derive(Debug, Error)]
#[error("basis matrix is singular (determinant is identically zero)")]
pub struct SingularBasis;

impl BasisMatrix {
    pub fn identity() -> Self {
        BasisMatrix {
            rows: [
                [RatFun::one(), RatFun::zero()],
                [RatFun::zero(), RatFun::one()],
            ],
        }
    }

    pub fn from_scalars(m: [[Scalar; DIM]; DIM]) -> Self {
        BasisMatrix {
            rows: [
                [
                    RatFun::constant(m[0][0].clone()),
                    RatFun::constant(m[0][1].clone()),
                ],
                [
                    RatFun::constant(m[1][0].clone()),
                    RatFun::constant(m[1][1].clone()),
                ],
            ],
        }
    }

    pub fn det(&self) -> RatFun {
        &(&self.rows[0][0] * &self.rows[1][1]) - &(&self.rows[0][1] * &self.rows[1][0])
    }

    /// Matrix product `self * other` (apply `other` first, then `self`, in
    /// the row-vector convention used by basis changes).
    pub fn compose(&self, other: &BasisMatrix) -> BasisMatrix {
        let mut rows = [
            [RatFun::zero(), RatFun::zero()],
            [RatFun::zero(), RatFun::zero()],
        ];
        for i in 0..DIM {
            for j in 0..DIM {
                let mut acc = RatFun::zero();
                for k in 0..DIM {
                    acc = &acc + &(&self.rows[i][k] * &other.rows[k][j]);
                }
                rows[i][j] = acc;
            }
        }
        BasisMatrix { rows }
    }

    pub fn substitute(&self, bindings: &HashMap<Var, RatFun>) -> BasisMatrix {
        BasisMatrix {
            rows: [
                [
                    self.rows[0][0].substitute(bindings),
                    self.rows[0][1].substitute(bindings),
                ],
                [
                    self.rows[1][0].substitute(bindings),
                    self.rows[1][1].substitute(bindings),
                ],
            ],
        }
    }
}

/// Structure constants of both products in the new basis `E_i = sum_j m[i][j] e_j`.
///
/// For each pair of new basis vectors the product is computed in the old
/// basis and re-expressed through the inverse matrix; everything stays an
/// exact rational function.
pub fn change_basis(
    dot: &Table<RatFun>,
    circ: &Table<RatFun>,
    m: &BasisMatrix,
) -> Result<(Table<RatFun>, Table<RatFun>), SingularBasis> {
    let det = m.det();
    if det.is_zero() {
        return Err(SingularBasis);
    }
    // inv[r][s]: coefficients of e_r in the new basis.
    let inv = [
        [
            &m.rows[1][1] / &det,
            &(-&m.rows[0][1]) / &det,
        ],
        [
            &(-&m.rows[1][0]) / &det,
            &m.rows[0][0] / &det,
        ],
    ];
    let transform = |c: &Table<RatFun>| -> Table<RatFun> {
        std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                // Product E_i * E_j in the old basis.
                let mut old = [RatFun::zero(), RatFun::zero()];
                for p in 0..DIM {
                    if m.rows[i][p].is_zero() {
                        continue;
                    }
                    for q in 0..DIM {
                        if m.rows[j][q].is_zero() {
                            continue;
                        }
                        let w = &m.rows[i][p] * &m.rows[j][q];
                        for (r, slot) in old.iter_mut().enumerate() {
                            if !c[p][q][r].is_zero() {
                                *slot = &*slot + &(&w * &c[p][q][r]);
                            }
                        }
                    }
                }
                std::array::from_fn(|s| {
                    let mut acc = RatFun::zero();
                    for r in 0..DIM {
                        if !old[r].is_zero() {
                            acc = &acc + &(&old[r] * &inv[r][s]);
                        }
                    }
                    acc
                })
            })
        })
    };
    Ok((transform(dot), transform(circ)))
}

/// Applies `change_basis` to a parameter-polynomial pair via a scalar
/// matrix, returning a polynomial pair (the division by the constant
/// determinant is exact).
pub fn change_basis_scalar(
    s: &StructurePair,
    m: [[Scalar; DIM]; DIM],
) -> Result<StructurePair, SingularBasis> {
    let bm = BasisMatrix::from_scalars(m);
    let lift = |t: &Table<Poly>| table_map(t, |p| RatFun::from_poly(p.clone()));
    let (dot, circ) = change_basis(&lift(&s.dot), &lift(&s.circ), &bm)?;
    let lower = |t: &Table<RatFun>| -> Table<Poly> {
        table_map(t, |r| {
            r.as_poly()
                .expect("constant-matrix basis change must stay polynomial")
        })
    };
    Ok(StructurePair {
        dot: lower(&dot),
        circ: lower(&circ),
        params: s.params.clone(),
    })
}

/// Polynomial form of the GL(2) action used by the solver: the transformed
/// coordinate `c~[i][j][s]` equals `gd * sum g[i][p] g[j][q] c[p][q][r] adj[r][s]`,
/// where `gd` stands for the inverse determinant (`det(g)*gd = 1` is added
/// as an equation by callers).
pub fn act_polynomial(c: &Table<Poly>, g: &[[Poly; DIM]; DIM], gd: &Poly) -> Table<Poly> {
    let adj = [
        [g[1][1].clone(), -&g[0][1]],
        [-&g[1][0], g[0][0].clone()],
    ];
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let mut old = [Poly::zero(), Poly::zero()];
            for p in 0..DIM {
                for q in 0..DIM {
                    if c[p][q][0].is_zero() && c[p][q][1].is_zero() {
                        continue;
                    }
                    let w = &g[i][p] * &g[j][q];
                    for (r, slot) in old.iter_mut().enumerate() {
                        if !c[p][q][r].is_zero() {
                            *slot = &*slot + &(&w * &c[p][q][r]);
                        }
                    }
                }
            }
            std::array::from_fn(|s| {
                let mut acc = Poly::zero();
                for r in 0..DIM {
                    if !old[r].is_zero() {
                        acc = &acc + &(&old[r] * &adj[r][s]);
                    }
                }
                &acc * gd
            })
        })
    })
}

/// The generic pair whose entries are the 16 coordinate variables.
pub fn generic_pair() -> StructurePair {
    StructurePair {
        dot: std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                std::array::from_fn(|k| Poly::variable(coord_var(ProductKind::Dot, i, j, k)))
            })
        }),
        circ: std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                std::array::from_fn(|k| Poly::variable(coord_var(ProductKind::Circ, i, j, k)))
            })
        }),
        params: ParamSpec::default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arg(i: u8) -> Node {
        Node::Arg(i)
    }

    fn dot(l: Node, r: Node) -> Node {
        Node::Prod(ProductKind::Dot, Box::new(l), Box::new(r))
    }

    fn circ(l: Node, r: Node) -> Node {
        Node::Prod(ProductKind::Circ, Box::new(l), Box::new(r))
    }

    fn one() -> Scalar {
        Scalar::one()
    }

    fn minus_one() -> Scalar {
        Scalar::from_int(-1)
    }

    /// dot-associativity: (x1.x2).x3 - x1.(x2.x3)
    fn assoc() -> Identity {
        Identity::new(
            "dot_associative",
            vec![
                (one(), dot(dot(arg(0), arg(1)), arg(2))),
                (minus_one(), dot(arg(0), dot(arg(1), arg(2)))),
            ],
        )
        .unwrap()
    }

    /// Leibniz compatibility: [x1.x2, x3] - [x1,x3].x2 - x1.[x2,x3]
    fn leibniz_compat() -> Identity {
        Identity::new(
            "compat",
            vec![
                (one(), circ(dot(arg(0), arg(1)), arg(2))),
                (minus_one(), dot(circ(arg(0), arg(2)), arg(1))),
                (minus_one(), dot(arg(0), circ(arg(1), arg(2)))),
            ],
        )
        .unwrap()
    }

    /// L4: e1.e1 = e1, e2.e2 = e2, zero bracket.
    fn l4() -> StructurePair {
        let mut s = StructurePair::zero();
        s.dot[0][0][0] = Poly::one();
        s.dot[1][1][1] = Poly::one();
        s
    }

    #[test]
    fn multilinearity_enforced() {
        // x1.x1 is not multilinear.
        assert!(Identity::new("bad", vec![(one(), dot(arg(0), arg(0)))]).is_err());
    }

    #[test]
    fn compat_vanishes_on_l4() {
        let id = leibniz_compat();
        let r = expand_identity(&l4(), &id, &[0, 0, 0]);
        assert!(r[0].is_zero() && r[1].is_zero());
        // Zero pair satisfies everything.
        let z = StructurePair::zero();
        for mask in 0..8usize {
            let tuple = [(mask) & 1, (mask >> 1) & 1, (mask >> 2) & 1];
            let r = expand_identity(&z, &id, &tuple);
            assert!(r[0].is_zero() && r[1].is_zero());
        }
    }

    #[test]
    fn associativity_defect_detected() {
        // e1.e1 = e2, e2.e2 = e1 is not associative: brute-force expansion
        // gives (e1.e1).e1 = e2.e1 = 0 vs e1.(e1.e1) = e1.e2 = 0 on (1,1,1)
        // but (e1.e1).e2=e2.e2=e1 vs e1.(e1.e2)=0 witnesses on (e1,e1,e2).
        let mut s = StructurePair::zero();
        s.dot[0][0][1] = Poly::one();
        s.dot[1][1][0] = Poly::one();
        let id = assoc();
        let any_nonzero = (0..8usize).any(|mask| {
            let tuple = [(mask) & 1, (mask >> 1) & 1, (mask >> 2) & 1];
            let r = expand_identity(&s, &id, &tuple);
            !(r[0].is_zero() && r[1].is_zero())
        });
        assert!(any_nonzero);
    }

    #[test]
    fn change_basis_l4_row() {
        // L4 with E1 = e1 + e2, E2 = t e2: dot becomes E1E1=E1, E1E2=E2,
        // E2E2=t*E2; bracket stays zero.
        let t = RatFun::from_poly(Poly::named("t"));
        let m = BasisMatrix {
            rows: [
                [RatFun::one(), RatFun::one()],
                [RatFun::zero(), t.clone()],
            ],
        };
        let s = l4();
        let lift = |t: &Table<Poly>| table_map(t, |p| RatFun::from_poly(p.clone()));
        let (dot, circ) = change_basis(&lift(&s.dot), &lift(&s.circ), &m).unwrap();
        assert_eq!(dot[0][0][0], RatFun::one());
        assert_eq!(dot[0][0][1], RatFun::zero());
        assert_eq!(dot[0][1][1], RatFun::one());
        assert_eq!(dot[0][1][0], RatFun::zero());
        assert_eq!(dot[1][1][1], t);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    assert!(circ[i][j][k].is_zero());
                }
            }
        }
    }

    #[test]
    fn identity_matrix_preserves_constants() {
        let s = l4();
        let out = change_basis_scalar(&s, [
            [Scalar::one(), Scalar::zero()],
            [Scalar::zero(), Scalar::one()],
        ])
        .unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn nilpotent_scaling() {
        // L1 ([e1,e1]=e2) with E1 = t e1, E2 = t^2 e2 gives [E1,E1] = E2,
        // by hand expansion: [te1,te1] = t^2 e2 = E2.
        let mut s = StructurePair::zero();
        s.circ[0][0][1] = Poly::one();
        let t = RatFun::from_poly(Poly::named("t"));
        let m = BasisMatrix {
            rows: [
                [t.clone(), RatFun::zero()],
                [RatFun::zero(), &t * &t],
            ],
        };
        let lift = |tab: &Table<Poly>| table_map(tab, |p| RatFun::from_poly(p.clone()));
        let (_, circ) = change_basis(&lift(&s.dot), &lift(&s.circ), &m).unwrap();
        assert_eq!(circ[0][0][1], RatFun::one());
        assert_eq!(circ[0][0][0], RatFun::zero());
    }

    #[test]
    fn singular_matrix_rejected() {
        let m = BasisMatrix {
            rows: [
                [RatFun::one(), RatFun::one()],
                [RatFun::one(), RatFun::one()],
            ],
        };
        let s = l4();
        let lift = |tab: &Table<Poly>| table_map(tab, |p| RatFun::from_poly(p.clone()));
        assert!(change_basis(&lift(&s.dot), &lift(&s.circ), &m).is_err());
    }

    #[test]
    fn basis_change_is_right_action() {
        // Applying m1 then m2 equals applying m2*m1 (rows-as-basis-vectors
        // convention), on random-ish constant matrices.
        let mats = [
            [[2, 1], [1, 1]],
            [[1, 0], [3, -1]],
            [[0, 2], [-1, 5]],
        ];
        let mut s = l4();
        s.circ[0][1][0] = Poly::from_int(3);
        for a in &mats {
            for b in &mats {
                let to_scalar =
                    |m: &[[i64; 2]; 2]| m.map(|row| row.map(Scalar::from_int));
                let first = change_basis_scalar(&s, to_scalar(a)).unwrap();
                let two_step = change_basis_scalar(&first, to_scalar(b)).unwrap();
                let ma = BasisMatrix::from_scalars(to_scalar(a));
                let mb = BasisMatrix::from_scalars(to_scalar(b));
                let prod = mb.compose(&ma);
                let lift = |t: &Table<Poly>| table_map(t, |p| RatFun::from_poly(p.clone()));
                let (dot, circ) = change_basis(&lift(&s.dot), &lift(&s.circ), &prod).unwrap();
                let lower = |t: &Table<RatFun>| table_map(t, |r| r.as_poly().unwrap());
                assert_eq!(lower(&dot), two_step.dot);
                assert_eq!(lower(&circ), two_step.circ);
            }
        }
    }

    #[test]
    fn anticommutative_implies_jacobi() {
        // Generic 2-dimensional anticommutative bracket: [e1,e2] = a e1 + b e2,
        // [e2,e1] = -[e1,e2], squares zero. The Jacobi identity expands to
        // zero identically, so every 2-dimensional anticommutative algebra is
        // a Lie algebra.
        let mut s = StructurePair::zero();
        let a = Poly::named("ja");
        let b = Poly::named("jb");
        s.circ[0][1][0] = a.clone();
        s.circ[0][1][1] = b.clone();
        s.circ[1][0][0] = -&a;
        s.circ[1][0][1] = -&b;
        let jacobi = Identity::new(
            "jacobi",
            vec![
                (one(), circ(circ(arg(0), arg(1)), arg(2))),
                (one(), circ(circ(arg(1), arg(2)), arg(0))),
                (one(), circ(circ(arg(2), arg(0)), arg(1))),
            ],
        )
        .unwrap();
        for mask in 0..8usize {
            let tuple = [(mask) & 1, (mask >> 1) & 1, (mask >> 2) & 1];
            let r = expand_identity(&s, &jacobi, &tuple);
            assert!(r[0].is_zero() && r[1].is_zero(), "tuple {tuple:?}: {r:?}");
        }
    }
}
