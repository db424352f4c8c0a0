//! Exact polynomial-system engine.
//!
//! Buchberger's algorithm over Q(i) with the graded reverse lexicographic
//! order decides solvability over the complex numbers through the weak
//! Nullstellensatz: a system has no solution iff its reduced Groebner basis
//! is `{1}`. Non-vanishing constraints enter through the Rabinowitsch trick
//! (a fresh variable z with `z*p - 1 = 0`), which keeps the emptiness
//! question purely ideal-theoretic.
//!
//! Pair selection uses the normal strategy (smallest lcm in the monomial
//! order) plus Buchberger's coprime-leading-term criterion; this is adequate
//! for the small systems (at most six variables) produced by the isomorphism
//! and orbit-membership tests.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::algebra::{act_polynomial, all_coords, coord_var, ProductKind, StructurePair, Table};
use crate::invariants::cheap_invariants;
use crate::poly::{var, Monomial, Poly, Var};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
}

/// Caps on the Buchberger run; defaults are sized for the six-variable
/// systems this crate generates.
#[derive(Clone, Copy, Debug)]
pub struct Limits {
    pub max_pairs: usize,
    pub max_basis: usize,
    pub max_degree: u32,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_pairs: 100_000,
            max_basis: 600,
            max_degree: 80,
        }
    }
}

/// A finite polynomial system: equations `= 0` and inequations `!= 0`.
#[derive(Clone, Debug, Default)]
pub struct PolySystem {
    pub equations: Vec<Poly>,
    pub inequations: Vec<Poly>,
}

impl PolySystem {
    pub fn new(equations: Vec<Poly>, inequations: Vec<Poly>) -> Self {
        PolySystem {
            equations,
            inequations,
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut s = BTreeSet::new();
        for p in self.equations.iter().chain(&self.inequations) {
            s.extend(p.vars());
        }
        s
    }

    /// Eliminates inequations via Rabinowitsch variables, returning plain
    /// ideal generators.
    fn generators(&self) -> Vec<Poly> {
        let mut gens = self.equations.clone();
        let used = self.vars();
        let mut counter = 0usize;
        for p in &self.inequations {
            let z = loop {
                let cand = var(&format!("zrab{counter}"));
                counter += 1;
                if !used.contains(&cand) {
                    break cand;
                }
            };
            gens.push(&(&Poly::variable(z) * p) - &Poly::one());
        }
        gens
    }
}

/// A reduced Groebner basis (monic, auto-reduced, sorted by leading term).
#[derive(Clone, Debug)]
pub struct GroebnerBasis {
    pub polys: Vec<Poly>,
}

impl GroebnerBasis {
    pub fn is_trivial(&self) -> bool {
        self.polys.len() == 1 && self.polys[0] == Poly::one()
    }

    /// Full normal form of `f` modulo the basis.
    pub fn reduce(&self, f: &Poly) -> Poly {
        reduce_full(f, &self.polys)
    }

    /// Ideal membership via reduction to zero.
    pub fn contains(&self, f: &Poly) -> bool {
        self.reduce(f).is_zero()
    }
}

fn make_monic(p: &Poly) -> Poly {
    match p.leading() {
        Some((_, c)) if !c.is_one() => p.scale(&c.inv()),
        _ => p.clone(),
    }
}

/// Full multivariate division: returns the normal form of `f` with respect
/// to `basis` (no term of the result is divisible by any leading term).
pub fn reduce_full(f: &Poly, basis: &[Poly]) -> Poly {
    let mut work = f.clone();
    let mut out = Poly::zero();
    'outer: while !work.is_zero() {
        let (lm, lc) = {
            let (m, c) = work.leading().unwrap();
            (m.clone(), c.clone())
        };
        for g in basis {
            if let Some((gm, gc)) = g.leading() {
                if gm.divides(&lm) {
                    let q = gm.div(&lm);
                    let coeff = &lc / gc;
                    work = &work - &g.mul_monomial(&q, &coeff);
                    continue 'outer;
                }
            }
        }
        // Leading term irreducible: move it to the result.
        out = &out + &Poly::monomial(lm.clone(), lc.clone());
        work = &work - &Poly::monomial(lm, lc);
    }
    out
}

/// Computes the reduced Groebner basis of the system's saturated ideal.
pub fn buchberger(sys: &PolySystem, limits: &Limits) -> Result<GroebnerBasis, SolverError> {
    let trivial = GroebnerBasis {
        polys: vec![Poly::one()],
    };
    let mut basis: Vec<Poly> = Vec::new();
    for g in sys.generators() {
        if g.is_zero() {
            continue;
        }
        if g.is_constant() {
            return Ok(trivial);
        }
        basis.push(make_monic(&g));
    }
    basis.sort_by(|a, b| a.leading().unwrap().0.cmp(b.leading().unwrap().0));
    basis.dedup();

    // Pair queue keyed by (lcm degree, lcm, i, j): the normal selection
    // strategy processes the smallest lcm first.
    let mut pairs: BTreeSet<(u32, Monomial, usize, usize)> = BTreeSet::new();
    fn add_pairs(
        pairs: &mut BTreeSet<(u32, Monomial, usize, usize)>,
        basis: &[Poly],
        new_idx: usize,
    ) {
        let lt_new = basis[new_idx].leading().unwrap().0.clone();
        for (i, g) in basis.iter().enumerate().take(new_idx) {
            let lt_i = g.leading().unwrap().0;
            if lt_i.coprime(&lt_new) {
                continue; // Buchberger's first criterion
            }
            let l = lt_i.lcm(&lt_new);
            pairs.insert((l.degree(), l, i, new_idx));
        }
    }
    for i in 0..basis.len() {
        add_pairs(&mut pairs, &basis, i);
    }

    let mut processed = 0usize;
    while let Some(entry) = pairs.iter().next().cloned() {
        pairs.remove(&entry);
        let (_, lcm, i, j) = entry;
        processed += 1;
        if processed > limits.max_pairs {
            return Err(SolverError::ResourceLimit(format!(
                "pair budget {} exhausted",
                limits.max_pairs
            )));
        }
        let s = {
            let (gi, gj) = (&basis[i], &basis[j]);
            let (mi, ci) = gi.leading().unwrap();
            let (mj, cj) = gj.leading().unwrap();
            &gi.mul_monomial(&mi.div(&lcm), &ci.inv()) - &gj.mul_monomial(&mj.div(&lcm), &cj.inv())
        };
        let r = reduce_full(&s, &basis);
        if r.is_zero() {
            continue;
        }
        if r.is_constant() {
            return Ok(trivial);
        }
        if r.degree() > limits.max_degree {
            return Err(SolverError::ResourceLimit(format!(
                "degree {} exceeds cap {}",
                r.degree(),
                limits.max_degree
            )));
        }
        basis.push(make_monic(&r));
        if basis.len() > limits.max_basis {
            return Err(SolverError::ResourceLimit(format!(
                "basis size cap {} exceeded",
                limits.max_basis
            )));
        }
        add_pairs(&mut pairs, &basis, basis.len() - 1);
    }

    // Inter-reduce to the canonical reduced basis: drop elements whose
    // leading term another element's leading term divides, then take full
    // normal forms.
    let mut kept: Vec<Poly> = Vec::new();
    'keep: for (i, g) in basis.iter().enumerate() {
        let lt = g.leading().unwrap().0;
        for (k, h) in basis.iter().enumerate() {
            if k != i {
                let lt_h = h.leading().unwrap().0;
                if lt_h.divides(lt) && (lt_h != lt || k < i) {
                    continue 'keep;
                }
            }
        }
        kept.push(g.clone());
    }
    let snapshot = kept.clone();
    let mut final_basis = Vec::new();
    for (i, g) in snapshot.iter().enumerate() {
        let others: Vec<Poly> = snapshot
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != i)
            .map(|(_, h)| h.clone())
            .collect();
        let r = reduce_full(g, &others);
        if !r.is_zero() {
            final_basis.push(make_monic(&r));
        }
    }
    final_basis.sort_by(|a, b| a.leading().unwrap().0.cmp(b.leading().unwrap().0));
    final_basis.dedup();
    Ok(GroebnerBasis { polys: final_basis })
}

/// Weak Nullstellensatz: the system has no solution over the complex
/// numbers iff 1 lies in the (Rabinowitsch-saturated) ideal.
pub fn is_empty_over_c(sys: &PolySystem, limits: &Limits) -> Result<bool, SolverError> {
    Ok(buchberger(sys, limits)?.is_trivial())
}

/// The four generic basis-change variables plus the inverse-determinant
/// variable, in a fixed order.
pub fn gl_vars() -> ([[Poly; 2]; 2], Poly, Var) {
    let g = [
        [Poly::named("g11"), Poly::named("g12")],
        [Poly::named("g21"), Poly::named("g22")],
    ];
    let gd = Poly::named("gd");
    (g, gd, var("gd"))
}

fn det_poly(g: &[[Poly; 2]; 2]) -> Poly {
    &(&g[0][0] * &g[1][1]) - &(&g[0][1] * &g[1][0])
}

/// Builds the isomorphism system "some basis change carries `a` to `b`":
/// sixteen coordinate equations plus `det(g)*gd = 1`, in five variables.
pub fn isomorphism_system(a: &StructurePair, b: &StructurePair) -> PolySystem {
    let (g, gd, _) = gl_vars();
    let ta = act_polynomial(&a.dot, &g, &gd);
    let ca = act_polynomial(&a.circ, &g, &gd);
    let mut eqs = Vec::with_capacity(17);
    for (p, i, j, k) in all_coords() {
        let lhs = match p {
            ProductKind::Dot => &ta[i][j][k],
            ProductKind::Circ => &ca[i][j][k],
        };
        let rhs = &b.product(p)[i][j][k];
        eqs.push(lhs - rhs);
    }
    eqs.push(&(&det_poly(&g) * &gd) - &Poly::one());
    PolySystem::new(eqs, Vec::new())
}

/// Decides whether two concrete pairs are isomorphic (lie in the same
/// GL(2)-orbit). Cheap invariants are consulted first; a mismatch settles
/// the question without running Buchberger.
pub fn are_isomorphic(
    a: &StructurePair,
    b: &StructurePair,
    limits: &Limits,
) -> Result<bool, SolverError> {
    assert!(
        a.params.names.is_empty() && b.params.names.is_empty(),
        "are_isomorphic needs concrete pairs"
    );
    if cheap_invariants(a) != cheap_invariants(b) {
        return Ok(false);
    }
    Ok(!is_empty_over_c(&isomorphism_system(a, b), limits)?)
}

/// Strips unit factors (powers of the inverse-determinant variable) from an
/// equation; `gd` is invertible on the solution set, so this preserves the
/// zero locus while keeping degrees small.
fn strip_gd(p: &Poly, gd: Var) -> Poly {
    match p.valuation(gd) {
        Some(k) if k > 0 => p.shift_down(gd, k),
        _ => p.clone(),
    }
}

/// Decides whether the GL(2)-orbit of `target` meets the Zariski-closed set
/// with the given free coordinates and relation polynomials (every
/// coordinate not listed free and not mentioned in a relation is zero on
/// the set, following the tables' convention).
pub fn orbit_meets_set(
    target: &StructurePair,
    free: &BTreeSet<Var>,
    relations: &[Poly],
    limits: &Limits,
) -> Result<bool, SolverError> {
    assert!(
        target.params.names.is_empty(),
        "orbit_meets_set needs a concrete target"
    );
    let (g, gd, gd_var) = gl_vars();
    let transformed = transformed_coordinates(&target.dot, &target.circ, &g, &gd);
    let mut eqs = Vec::new();
    for (p, i, j, k) in all_coords() {
        let v = coord_var(p, i, j, k);
        if !free.contains(&v) {
            eqs.push(strip_gd(&transformed[&v], gd_var));
        }
    }
    for r in relations {
        eqs.push(strip_gd(&r.substitute(&transformed), gd_var));
    }
    eqs.push(&(&det_poly(&g) * &gd) - &Poly::one());
    let sys = PolySystem::new(eqs, Vec::new());
    Ok(!is_empty_over_c(&sys, limits)?)
}

/// Map from each coordinate variable to its polynomial image under the
/// generic basis change `(g, gd)`; shared with the invariance check.
pub fn transformed_coordinates(
    target_dot: &Table<Poly>,
    target_circ: &Table<Poly>,
    g: &[[Poly; 2]; 2],
    gd: &Poly,
) -> std::collections::HashMap<Var, Poly> {
    let td = act_polynomial(target_dot, g, gd);
    let tc = act_polynomial(target_circ, g, gd);
    let mut out = std::collections::HashMap::new();
    for (p, i, j, k) in all_coords() {
        let v = coord_var(p, i, j, k);
        let val = match p {
            ProductKind::Dot => td[i][j][k].clone(),
            ProductKind::Circ => tc[i][j][k].clone(),
        };
        out.insert(v, val);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_poly;
    use crate::scalar::Scalar;

    fn sys(eqs: &[&str]) -> PolySystem {
        PolySystem::new(
            eqs.iter().map(|s| parse_poly(s).unwrap()).collect(),
            Vec::new(),
        )
    }

    #[test]
    fn basis_of_x2_minus_1_and_x_minus_1() {
        let gb = buchberger(&sys(&["x^2 - 1", "x - 1"]), &Limits::default()).unwrap();
        assert_eq!(gb.polys, vec![parse_poly("x - 1").unwrap()]);
    }

    #[test]
    fn inconsistent_system_collapses_to_one() {
        let gb = buchberger(&sys(&["x*y - 1", "x"]), &Limits::default()).unwrap();
        assert!(gb.is_trivial());
    }

    #[test]
    fn gl2_slice_is_nonempty() {
        // det constraint with g11 = 2 has solutions, e.g. g11=2, g12=g21=0,
        // g22=1/2; the hand solution is checked against the system first.
        let system = sys(&["g11*g22 - g12*g21 - 1", "g11 - 2"]);
        let mut point = std::collections::HashMap::new();
        point.insert(var("g11"), Scalar::from_int(2));
        point.insert(var("g12"), Scalar::zero());
        point.insert(var("g21"), Scalar::zero());
        point.insert(var("g22"), Scalar::from_ratio(1, 2));
        for eq in &system.equations {
            assert!(eq.eval(&point).is_zero());
        }
        assert!(!is_empty_over_c(&system, &Limits::default()).unwrap());
    }

    #[test]
    fn emptiness_examples() {
        assert!(is_empty_over_c(&sys(&["x", "x - 1"]), &Limits::default()).unwrap());
        // x^2 + 1 has the root i over the complex numbers.
        assert!(!is_empty_over_c(&sys(&["x^2 + 1"]), &Limits::default()).unwrap());
    }

    #[test]
    fn rabinowitsch_inequations() {
        // x = 0 and x != 0 is unsatisfiable; x*y = 1 with x != 0 is fine.
        let s1 = PolySystem::new(vec![parse_poly("x").unwrap()], vec![parse_poly("x").unwrap()]);
        assert!(is_empty_over_c(&s1, &Limits::default()).unwrap());
        let s2 = PolySystem::new(
            vec![parse_poly("x*y - 1").unwrap()],
            vec![parse_poly("x").unwrap()],
        );
        assert!(!is_empty_over_c(&s2, &Limits::default()).unwrap());
    }

    #[test]
    fn members_reduce_to_zero() {
        let system = sys(&["x^2 + y^2 - 1", "x - y"]);
        let gb = buchberger(&system, &Limits::default()).unwrap();
        for eq in &system.equations {
            assert!(gb.contains(eq), "input {eq} must reduce to zero");
        }
        // S-polynomials of the returned basis reduce to zero.
        for i in 0..gb.polys.len() {
            for j in (i + 1)..gb.polys.len() {
                let (gi, gj) = (&gb.polys[i], &gb.polys[j]);
                let (mi, ci) = gi.leading().unwrap();
                let (mj, cj) = gj.leading().unwrap();
                let l = mi.lcm(mj);
                let s = &gi.mul_monomial(&mi.div(&l), &ci.inv())
                    - &gj.mul_monomial(&mj.div(&l), &cj.inv());
                assert!(gb.contains(&s));
            }
        }
    }

    #[test]
    fn reduced_basis_is_deterministic() {
        let a = buchberger(&sys(&["x^2 - y", "x*y - 1"]), &Limits::default()).unwrap();
        let b = buchberger(&sys(&["x^2 - y", "x*y - 1"]), &Limits::default()).unwrap();
        assert_eq!(a.polys, b.polys);
    }

    #[test]
    fn self_isomorphism_and_a_known_non_isomorphism() {
        // L1 ([e1,e1]=e2) is isomorphic to itself; L1 and L2 ([e1,e2]=e1)
        // are distinct orbits.
        let mut l1 = StructurePair::zero();
        l1.circ[0][0][1] = Poly::one();
        let mut l2 = StructurePair::zero();
        l2.circ[0][1][0] = Poly::one();
        let limits = Limits::default();
        assert!(are_isomorphic(&l1, &l1, &limits).unwrap());
        assert!(!are_isomorphic(&l1, &l2, &limits).unwrap());
    }
}
