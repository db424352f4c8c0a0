//! Independent verification oracles.
//!
//! These deliberately re-derive quantities along different algorithmic
//! routes than the main implementation so that agreement is meaningful:
//! rank via minors instead of elimination, solvability via grid search
//! instead of Groebner bases.

use std::collections::HashMap;

use crate::algebra::{ProductKind, StructurePair, DIM};
use crate::poly::Var;
use crate::scalar::Scalar;
use crate::solver::PolySystem;

/// Determinant of a small square matrix by Laplace expansion.
fn det(m: &[Vec<Scalar>]) -> Scalar {
    let n = m.len();
    if n == 0 {
        return Scalar::one();
    }
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = Scalar::zero();
    for (j, entry) in m[0].iter().enumerate() {
        if entry.is_zero() {
            continue;
        }
        let minor: Vec<Vec<Scalar>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|&(c, _)| c != j)
                    .map(|(_, v)| v.clone())
                    .collect()
            })
            .collect();
        let term = entry * &det(&minor);
        if j % 2 == 0 {
            acc += &term;
        } else {
            acc -= &term;
        }
    }
    acc
}

/// Rank of a rectangular matrix as the size of its largest nonsingular
/// minor. Exponential, but the matrices here are at most 16x4.
pub fn rank_by_minors(rows: &[Vec<Scalar>]) -> usize {
    let nr = rows.len();
    let nc = rows.first().map_or(0, Vec::len);
    let max = nr.min(nc);
    for size in (1..=max).rev() {
        for rsel in combinations(nr, size) {
            for csel in combinations(nc, size) {
                let sub: Vec<Vec<Scalar>> = rsel
                    .iter()
                    .map(|&r| csel.iter().map(|&c| rows[r][c].clone()).collect())
                    .collect();
                if !det(&sub).is_zero() {
                    return size;
                }
            }
        }
    }
    0
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Derivation dimension by an independent route: build the same 16x4 linear
/// system row by row but compute `4 - rank` with the minor oracle rather
/// than by elimination.
pub fn derivation_dimension_by_minors(s: &StructurePair) -> usize {
    let mut rows: Vec<Vec<Scalar>> = Vec::new();
    for p in ProductKind::BOTH {
        let t = s.product(p);
        let c = |i: usize, j: usize, k: usize| -> Scalar {
            t[i][j][k].as_constant().expect("concrete pair required")
        };
        let idx = |r: usize, k: usize| r * DIM + k;
        for i in 0..DIM {
            for j in 0..DIM {
                for k in 0..DIM {
                    let mut row = vec![Scalar::zero(); 4];
                    for r in 0..DIM {
                        row[idx(r, k)] += &c(i, j, r);
                    }
                    for q in 0..DIM {
                        row[idx(i, q)] -= &c(q, j, k);
                        row[idx(j, q)] -= &c(i, q, k);
                    }
                    rows.push(row);
                }
            }
        }
    }
    4 - rank_by_minors(&rows)
}

/// One-sided solvability oracle: searches a finite grid of rational points
/// for a common zero satisfying the inequations. Finding one proves the
/// system nonempty; finding none proves nothing.
pub fn grid_has_solution(sys: &PolySystem, grid: &[Scalar]) -> bool {
    let vars: Vec<Var> = sys.vars().into_iter().collect();
    if vars.is_empty() {
        return sys.equations.iter().all(Poly::is_zero)
            && sys.inequations.iter().all(|p| !p.is_zero());
    }
    let mut idx = vec![0usize; vars.len()];
    loop {
        let point: HashMap<Var, Scalar> = vars
            .iter()
            .zip(&idx)
            .map(|(v, &i)| (*v, grid[i].clone()))
            .collect();
        let ok = sys.equations.iter().all(|p| p.eval(&point).is_zero())
            && sys.inequations.iter().all(|p| !p.eval(&point).is_zero());
        if ok {
            return true;
        }
        // Odometer increment.
        let mut c = 0;
        loop {
            idx[c] += 1;
            if idx[c] < grid.len() {
                break;
            }
            idx[c] = 0;
            c += 1;
            if c == vars.len() {
                return false;
            }
        }
    }
}

use crate::poly::Poly;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_poly;

    #[test]
    fn minor_rank_matches_known_matrices() {
        let z = vec![vec![Scalar::zero(); 3]; 2];
        assert_eq!(rank_by_minors(&z), 0);
        let id2 = vec![
            vec![Scalar::one(), Scalar::zero()],
            vec![Scalar::zero(), Scalar::one()],
        ];
        assert_eq!(rank_by_minors(&id2), 2);
        let singular = vec![
            vec![Scalar::from_int(1), Scalar::from_int(2)],
            vec![Scalar::from_int(2), Scalar::from_int(4)],
        ];
        assert_eq!(rank_by_minors(&singular), 1);
    }

    #[test]
    fn grid_finds_planted_roots() {
        let sys = PolySystem::new(vec![parse_poly("x^2 - 4").unwrap()], vec![]);
        let grid: Vec<Scalar> = [-2i64, -1, 0, 1, 2].iter().map(|&n| Scalar::from_int(n)).collect();
        assert!(grid_has_solution(&sys, &grid));
        let none = PolySystem::new(vec![parse_poly("x^2 - 3").unwrap()], vec![]);
        assert!(!grid_has_solution(&none, &grid));
    }
}
