//! Derivation algebras, orbit dimensions, and cheap isomorphism invariants.
//!
//! A derivation of a bilinear pair is a linear map satisfying the Leibniz
//! rule for both products; the GL(2)-orbit of a structure has dimension
//! `4 - dim Der`. The derivation space is the kernel of an explicit 16x4
//! linear system over Q(i), solved exactly by Gaussian elimination.

use std::collections::HashMap;

use crate::algebra::{ProductKind, StructurePair, DIM};
use crate::poly::Poly;
use crate::scalar::Scalar;

/// Basis of the derivation Lie algebra, each matrix `m` acting by
/// `D(e_i) = sum_k m[i][k] e_k`.
#[derive(Clone, Debug)]
pub struct DerivationSpace {
    pub dimension: usize,
    pub basis: Vec<[[Scalar; DIM]; DIM]>,
}

fn as_scalar_table(s: &StructurePair, p: ProductKind) -> [[[Scalar; DIM]; DIM]; DIM] {
    let t = s.product(p);
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            std::array::from_fn(|k| {
                t[i][j][k]
                    .as_constant()
                    .expect("structure constants must be concrete scalars")
            })
        })
    })
}

/// Rows of the derivation system for one product: for each `(i, j, k)`,
/// `sum_r c[i][j][r] m[r][k] - sum_p m[i][p] c[p][j][k] - sum_q m[j][q] c[i][q][k] = 0`,
/// in the unknowns `m[0][0], m[0][1], m[1][0], m[1][1]`.
fn derivation_rows(c: &[[[Scalar; DIM]; DIM]; DIM], rows: &mut Vec<[Scalar; 4]>) {
    let idx = |r: usize, k: usize| r * DIM + k;
    for i in 0..DIM {
        for j in 0..DIM {
            for k in 0..DIM {
                let mut row = std::array::from_fn::<Scalar, 4, _>(|_| Scalar::zero());
                for r in 0..DIM {
                    row[idx(r, k)] += &c[i][j][r];
                }
                for p in 0..DIM {
                    row[idx(i, p)] -= &c[p][j][k];
                }
                for q in 0..DIM {
                    row[idx(j, q)] -= &c[i][q][k];
                }
                if row.iter().any(|s| !s.is_zero()) {
                    rows.push(row);
                }
            }
        }
    }
}

/// Exact kernel of a small dense system via Gauss-Jordan elimination.
/// Returns the kernel basis vectors.
pub fn kernel(rows: &[[Scalar; 4]]) -> Vec<[Scalar; 4]> {
    let mut m: Vec<[Scalar; 4]> = rows.to_vec();
    let n = 4usize;
    let mut pivot_cols = Vec::new();
    let mut rank = 0usize;
    for col in 0..n {
        // Find a pivot row.
        let Some(p) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let inv = m[rank][col].inv();
        for x in m[rank].iter_mut() {
            *x = &*x * &inv;
        }
        for r in 0..m.len() {
            if r != rank && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in 0..n {
                    let sub = &m[rank][c] * &f;
                    m[r][c] -= &sub;
                }
            }
        }
        pivot_cols.push(col);
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    let free_cols: Vec<usize> = (0..n).filter(|c| !pivot_cols.contains(c)).collect();
    let mut basis = Vec::new();
    for &fc in &free_cols {
        let mut v = std::array::from_fn::<Scalar, 4, _>(|_| Scalar::zero());
        v[fc] = Scalar::one();
        for (r, &pc) in pivot_cols.iter().enumerate() {
            v[pc] = -&m[r][fc];
        }
        basis.push(v);
    }
    basis
}

/// Rank of a rectangular matrix over Q(i) by Gaussian elimination.
pub fn rank(rows: &[Vec<Scalar>]) -> usize {
    let mut m: Vec<Vec<Scalar>> = rows.to_vec();
    let ncols = m.first().map_or(0, Vec::len);
    let mut r = 0usize;
    for col in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][col].inv();
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][col].is_zero() {
                let f = m[i][col].clone();
                for c in 0..ncols {
                    let sub = &m[r][c] * &f;
                    m[i][c] -= &sub;
                }
            }
        }
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

/// Solves the 16-equation linear system for the derivation matrices of a
/// concrete pair.
pub fn derivation_space(s: &StructurePair) -> DerivationSpace {
    let mut rows = Vec::new();
    derivation_rows(&as_scalar_table(s, ProductKind::Dot), &mut rows);
    derivation_rows(&as_scalar_table(s, ProductKind::Circ), &mut rows);
    let basis = kernel(&rows);
    DerivationSpace {
        dimension: basis.len(),
        basis: basis
            .into_iter()
            .map(|v| [[v[0].clone(), v[1].clone()], [v[2].clone(), v[3].clone()]])
            .collect(),
    }
}

/// `dim O(s) = 4 - dim Der(s)`.
pub fn orbit_dimension(s: &StructurePair) -> usize {
    4 - derivation_space(s).dimension
}

/// Checks the Leibniz rule of a candidate derivation matrix on every basis
/// pair and product; used by the property tests.
pub fn is_derivation(s: &StructurePair, m: &[[Scalar; DIM]; DIM]) -> bool {
    for p in ProductKind::BOTH {
        let c = as_scalar_table(s, p);
        for i in 0..DIM {
            for j in 0..DIM {
                for k in 0..DIM {
                    // D(e_i * e_j)_k = sum_r c[i][j][r] m[r][k]
                    let mut lhs = Scalar::zero();
                    for r in 0..DIM {
                        lhs += &(&c[i][j][r] * &m[r][k]);
                    }
                    let mut rhs = Scalar::zero();
                    for q in 0..DIM {
                        rhs += &(&m[i][q] * &c[q][j][k]);
                        rhs += &(&m[j][q] * &c[i][q][k]);
                    }
                    if lhs != rhs {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Fast isomorphism-separating invariants of a concrete pair. All fields
/// are exact and basis-independent, so a mismatch proves non-isomorphism.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheapInvariants {
    pub dot_commutative: bool,
    pub circ_commutative: bool,
    pub dot_anticommutative: bool,
    pub circ_anticommutative: bool,
    /// Rank of each product as a linear map V (x) V -> V; equals the
    /// dimension of the square span.
    pub dot_rank: usize,
    pub circ_rank: usize,
    /// Dimension of the two-sided annihilator of each product.
    pub dot_annihilator: usize,
    pub circ_annihilator: usize,
    /// Dimension of the joint annihilator of both products.
    pub joint_annihilator: usize,
}

fn product_rank(c: &[[[Scalar; DIM]; DIM]; DIM]) -> usize {
    // The 4x2 matrix of output coefficients, one row per input pair.
    let mut rows = Vec::new();
    for i in 0..DIM {
        for j in 0..DIM {
            rows.push([
                c[i][j][0].clone(),
                c[i][j][1].clone(),
                Scalar::zero(),
                Scalar::zero(),
            ]);
        }
    }
    2 - kernel_rank_defect(&rows, 2)
}

/// Kernel dimension of the first `cols` columns (zero-padded helper reusing
/// the 4-wide elimination).
fn kernel_rank_defect(rows: &[[Scalar; 4]], cols: usize) -> usize {
    let basis = kernel(rows);
    // kernel() works on 4 columns; the padded columns are always free, so
    // subtract them out.
    basis.len() - (4 - cols)
}

fn annihilator_dim(tables: &[&[[[Scalar; DIM]; DIM]; DIM]]) -> usize {
    // x = x0 e0 + x1 e1 with x * e_j = 0 and e_j * x = 0 for all j and all
    // listed products.
    let mut rows = Vec::new();
    for c in tables {
        for j in 0..DIM {
            for k in 0..DIM {
                // (x * e_j)_k = sum_i x_i c[i][j][k]
                rows.push([
                    c[0][j][k].clone(),
                    c[1][j][k].clone(),
                    Scalar::zero(),
                    Scalar::zero(),
                ]);
                // (e_j * x)_k = sum_i x_i c[j][i][k]
                rows.push([
                    c[j][0][k].clone(),
                    c[j][1][k].clone(),
                    Scalar::zero(),
                    Scalar::zero(),
                ]);
            }
        }
    }
    kernel_rank_defect(&rows, 2)
}

pub fn cheap_invariants(s: &StructurePair) -> CheapInvariants {
    let d = as_scalar_table(s, ProductKind::Dot);
    let c = as_scalar_table(s, ProductKind::Circ);
    let comm = |t: &[[[Scalar; DIM]; DIM]; DIM]| {
        (0..DIM).all(|i| (0..DIM).all(|j| (0..DIM).all(|k| t[i][j][k] == t[j][i][k])))
    };
    let anticomm = |t: &[[[Scalar; DIM]; DIM]; DIM]| {
        (0..DIM).all(|i| (0..DIM).all(|j| (0..DIM).all(|k| t[i][j][k] == -&t[j][i][k])))
    };
    CheapInvariants {
        dot_commutative: comm(&d),
        circ_commutative: comm(&c),
        dot_anticommutative: anticomm(&d),
        circ_anticommutative: anticomm(&c),
        dot_rank: product_rank(&d),
        circ_rank: product_rank(&c),
        dot_annihilator: annihilator_dim(&[&d]),
        circ_annihilator: annihilator_dim(&[&c]),
        joint_annihilator: annihilator_dim(&[&d, &c]),
    }
}

/// Evaluates a parametric pair at a scalar point given by name.
pub fn eval_at(s: &StructurePair, point: &[(&str, Scalar)]) -> StructurePair {
    let map: HashMap<_, _> = point
        .iter()
        .map(|(n, v)| (crate::poly::var(n), Poly::constant(v.clone())))
        .collect();
    s.substitute(&map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Poly;

    fn pair(dot: &[(usize, usize, usize, i64)], circ: &[(usize, usize, usize, i64)]) -> StructurePair {
        let mut s = StructurePair::zero();
        for &(i, j, k, v) in dot {
            s.dot[i][j][k] = Poly::from_int(v);
        }
        for &(i, j, k, v) in circ {
            s.circ[i][j][k] = Poly::from_int(v);
        }
        s
    }

    #[test]
    fn zero_pair_has_full_derivation_algebra() {
        let z = StructurePair::zero();
        assert_eq!(derivation_space(&z).dimension, 4);
        assert_eq!(orbit_dimension(&z), 0);
    }

    #[test]
    fn l4_is_rigidly_four_dimensional() {
        // L4: e1.e1 = e1, e2.e2 = e2 has no nonzero derivations.
        let s = pair(&[(0, 0, 0, 1), (1, 1, 1, 1)], &[]);
        assert_eq!(derivation_space(&s).dimension, 0);
        assert_eq!(orbit_dimension(&s), 4);
    }

    #[test]
    fn l2_orbit_dimension() {
        // L2: [e1,e2] = e1 (zero dot) sits at level 3.
        let s = pair(&[], &[(0, 1, 0, 1)]);
        assert_eq!(orbit_dimension(&s), 3);
    }

    #[test]
    fn t7_at_3_has_two_derivations() {
        // T7^alpha: e1.e1 = e2, [e1,e1] = alpha e2; at alpha = 3 the
        // derivation algebra is 2-dimensional, orbit dimension 2.
        let s = pair(&[(0, 0, 1, 1)], &[(0, 0, 1, 3)]);
        let d = derivation_space(&s);
        assert_eq!(d.dimension, 2);
        assert_eq!(orbit_dimension(&s), 2);
        for m in &d.basis {
            assert!(is_derivation(&s, m));
        }
    }

    #[test]
    fn cheap_invariants_flags() {
        // Zero products have rank 0 and full annihilator.
        let z = StructurePair::zero();
        let inv = cheap_invariants(&z);
        assert_eq!(inv.dot_rank, 0);
        assert_eq!(inv.joint_annihilator, 2);

        // L3's bracket ([e1,e2]=e2, [e2,e1]=-e2) is anticommutative.
        let l3 = pair(&[], &[(0, 1, 1, 1), (1, 0, 1, -1)]);
        let inv = cheap_invariants(&l3);
        assert!(inv.circ_anticommutative);
        assert!(!inv.circ_commutative);
        assert_eq!(inv.circ_rank, 1);
    }
}
