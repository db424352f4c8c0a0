//! Verification of degeneration witnesses and certification of
//! non-degenerations.
//!
//! A witness row is verified symbolically: the parametrized index is
//! substituted into the source constants, the basis change is performed
//! over exact rational functions, each of the sixteen constants gets its
//! Laurent limit at t = 0, and the limits must match the target constants
//! identically in the row's surviving symbols.
//!
//! A non-degeneration row is certified in three steps following the
//! closed-set method: the source representative must lie in the set
//! identically in its parameters, the set must be stable under one
//! triangular orientation (decided by ideal membership of the transformed
//! defining equations), and the target orbit must miss the set at every
//! sampled parameter value (Groebner emptiness).

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::algebra::{
    all_coords, change_basis, coord_name, coord_var, BasisMatrix, ProductKind, StructurePair,
    Table,
};
use crate::catalog::{Catalog, NonDegenRow, WitnessRow};
use crate::poly::{var, var_name, Poly, Var};
use crate::ratfun::{LimitError, RatFun};
use crate::scalar::Scalar;
use crate::solver::{
    buchberger, orbit_meets_set, reduce_full, transformed_coordinates, Limits, PolySystem,
    SolverError,
};

/// Primary parameter samples; small heights keep the Groebner systems fast
/// while avoiding the extra symmetry at 0 and 1.
pub fn sample_pool() -> Vec<Scalar> {
    vec![
        Scalar::from_int(-1),
        Scalar::from_ratio(1, 3),
        Scalar::from_int(2),
        Scalar::from_ratio(5, 2),
        Scalar::from_int(3),
        Scalar::from_int(7),
    ]
}

/// Reserve pool drawn from when a declared sample violates a side
/// condition; 0 and 1 first, per the convention that they are sampled
/// whenever not excluded.
pub fn reserve_pool() -> Vec<Scalar> {
    vec![
        Scalar::from_int(0),
        Scalar::from_int(1),
        Scalar::from_int(-2),
        Scalar::from_ratio(1, 5),
        Scalar::from_int(4),
        Scalar::from_int(-3),
        Scalar::from_int(11),
    ]
}

#[derive(Debug, Error)]
pub enum WitnessError {
    #[error("unknown entry {0}")]
    UnknownEntry(String),
    #[error("basis matrix is singular")]
    SingularBasis,
    #[error("pole at t = 0 in coordinate {coord}")]
    PoleAtZero { coord: String },
    #[error("mismatch at coordinate {coord}: limit {got}, target {want}")]
    MismatchAt {
        coord: String,
        got: String,
        want: String,
    },
    #[error("{0}")]
    BadRow(String),
}

/// A verified degeneration: the row plus the per-coordinate limit log.
#[derive(Clone, Debug)]
pub struct DegenCertificate {
    pub key: String,
    /// Exact limit of every coordinate, in canonical text form.
    pub limits: Vec<(String, String)>,
    /// Set when the row only verified after the bounded repair search; the
    /// repaired basis is recorded alongside the transcribed one.
    pub repaired_basis: Option<BasisMatrix>,
}

fn binding_map(bindings: &[(Var, RatFun)]) -> HashMap<Var, RatFun> {
    bindings.iter().cloned().collect()
}

fn verify_witness_with_basis(
    catalog: &Catalog,
    row: &WitnessRow,
    basis: &BasisMatrix,
) -> Result<Vec<(String, String)>, WitnessError> {
    let source = catalog
        .entry(&row.variety, &row.source)
        .ok_or_else(|| WitnessError::UnknownEntry(format!("{}:{}", row.variety, row.source)))?;
    let target = catalog
        .entry(&row.variety, &row.target)
        .ok_or_else(|| WitnessError::UnknownEntry(format!("{}:{}", row.variety, row.target)))?;
    let t = var("t");
    for c in &row.conditions {
        if c.is_zero() {
            return Err(WitnessError::BadRow("zero side condition".to_string()));
        }
    }
    let (sdot, scirc) = source.pair.substitute_ratfun(&binding_map(&row.source_bindings));
    let (tdot, tcirc) = target.pair.substitute_ratfun(&binding_map(&row.target_bindings));
    for table in [&tdot, &tcirc] {
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    if table[i][j][k].num().uses_var(t) || table[i][j][k].den().uses_var(t) {
                        return Err(WitnessError::BadRow(
                            "target bindings must not involve t".to_string(),
                        ));
                    }
                }
            }
        }
    }
    let (cdot, ccirc) = change_basis(&sdot, &scirc, basis).map_err(|_| WitnessError::SingularBasis)?;
    let mut limits = Vec::with_capacity(16);
    for (p, i, j, k) in all_coords() {
        let name = coord_name(p, i, j, k);
        let value = match p {
            ProductKind::Dot => &cdot[i][j][k],
            ProductKind::Circ => &ccirc[i][j][k],
        };
        let lim = value.limit_at_zero(t).map_err(|e| match e {
            LimitError::PoleAtZero { .. } => WitnessError::PoleAtZero {
                coord: name.clone(),
            },
            LimitError::NotScalar(s) => WitnessError::BadRow(s),
        })?;
        let want = match p {
            ProductKind::Dot => &tdot[i][j][k],
            ProductKind::Circ => &tcirc[i][j][k],
        };
        if &lim != want {
            return Err(WitnessError::MismatchAt {
                coord: name,
                got: lim.to_string(),
                want: want.to_string(),
            });
        }
        limits.push((name, lim.to_string()));
    }
    Ok(limits)
}

/// Verifies one witness row identically in its symbols.
pub fn verify_degeneration(
    catalog: &Catalog,
    row: &WitnessRow,
) -> Result<DegenCertificate, WitnessError> {
    verify_witness_with_basis(catalog, row, &row.basis).map(|limits| DegenCertificate {
        key: row.key(),
        limits,
        repaired_basis: None,
    })
}

/// Bounded errata repair: rescales each basis entry by one of
/// `1, -1, t, -t, 1/t, -1/t` (sign flips and t-exponent adjustments) and
/// retries. A repaired witness is reported alongside, never replacing, the
/// transcribed one.
pub fn repair_witness(catalog: &Catalog, row: &WitnessRow) -> Option<DegenCertificate> {
    let t = RatFun::from_poly(Poly::named("t"));
    let factors = [
        RatFun::one(),
        -&RatFun::one(),
        t.clone(),
        -&t,
        t.inv(),
        -&t.inv(),
    ];
    for mask in 1..(6usize.pow(4)) {
        let mut m = mask;
        let mut rows = row.basis.rows.clone();
        for slot in rows.iter_mut().flatten() {
            let f = &factors[m % 6];
            m /= 6;
            if !slot.is_zero() {
                *slot = &*slot * f;
            }
        }
        let candidate = BasisMatrix { rows };
        if let Ok(limits) = verify_witness_with_basis(catalog, row, &candidate) {
            return Some(DegenCertificate {
                key: row.key(),
                limits,
                repaired_basis: Some(candidate),
            });
        }
    }
    None
}

/// Outcome of a degeneration row: verified as transcribed, verified only
/// after repair (errata candidate), or failed outright.
#[derive(Clone, Debug)]
pub enum WitnessOutcome {
    Verified(DegenCertificate),
    ErrataRepaired(DegenCertificate, String),
    Failed(String),
}

pub fn verify_or_repair(catalog: &Catalog, row: &WitnessRow) -> WitnessOutcome {
    match verify_degeneration(catalog, row) {
        Ok(cert) => WitnessOutcome::Verified(cert),
        Err(e) => match repair_witness(catalog, row) {
            Some(cert) => WitnessOutcome::ErrataRepaired(cert, e.to_string()),
            None => WitnessOutcome::Failed(e.to_string()),
        },
    }
}

// ---------------------------------------------------------------------------
// Closed invariant sets
// ---------------------------------------------------------------------------

/// Which triangular matrices stabilize the set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    Upper,
    Lower,
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Orientation::Upper => write!(f, "upper"),
            Orientation::Lower => write!(f, "lower"),
        }
    }
}

/// A Zariski-closed subset of the sixteen-dimensional structure-constant
/// space: `free` coordinates plus relation polynomials; every coordinate
/// neither free nor mentioned in a relation vanishes on the set.
#[derive(Clone, Debug)]
pub struct ClosedSetSpec {
    pub free: BTreeSet<Var>,
    pub relations: Vec<Poly>,
}

impl ClosedSetSpec {
    pub fn from_row(row: &NonDegenRow) -> Self {
        ClosedSetSpec {
            free: row.free.iter().copied().collect(),
            relations: row.relations.clone(),
        }
    }

    /// Coordinates forced to zero: not free and not mentioned in any
    /// relation.
    pub fn zero_coords(&self) -> Vec<Var> {
        let mut mentioned: BTreeSet<Var> = self.free.clone();
        for r in &self.relations {
            mentioned.extend(r.vars());
        }
        all_coords()
            .into_iter()
            .map(|(p, i, j, k)| coord_var(p, i, j, k))
            .filter(|v| !mentioned.contains(v))
            .collect()
    }

    /// Substitutes source-parameter samples into the relations.
    pub fn specialize(&self, point: &HashMap<Var, Poly>) -> ClosedSetSpec {
        ClosedSetSpec {
            free: self.free.clone(),
            relations: self.relations.iter().map(|r| r.substitute(point)).collect(),
        }
    }
}

#[derive(Debug, Error)]
pub enum InvarianceError {
    #[error("set not invariant under {orientation} triangular action: residual {residual} from {origin}")]
    NotInvariant {
        orientation: Orientation,
        origin: String,
        residual: String,
    },
    #[error("{0}")]
    Solver(#[from] SolverError),
}

/// Solves relations of the form `c*x = rest` (x a bare coordinate with a
/// scalar coefficient) into a substitution, shrinking the residual ideal.
fn solve_linear_relations(
    spec: &ClosedSetSpec,
) -> (HashMap<Var, Poly>, Vec<Poly>) {
    let coords: BTreeSet<Var> = all_coords()
        .into_iter()
        .map(|(p, i, j, k)| coord_var(p, i, j, k))
        .collect();
    let mut subs: HashMap<Var, Poly> = HashMap::new();
    let mut residual: Vec<Poly> = spec.relations.clone();
    loop {
        let mut progress = false;
        let mut next = Vec::new();
        for rel in residual.drain(..) {
            let rel = rel.substitute(&subs);
            if rel.is_zero() {
                continue;
            }
            // Look for a term that is a single coordinate variable with a
            // scalar coefficient not occurring elsewhere in the relation.
            let mut solved = None;
            for (m, c) in rel.terms() {
                if m.degree() != 1 {
                    continue;
                }
                let v = m.vars().next().unwrap();
                if !coords.contains(&v) {
                    continue;
                }
                let rest = &rel - &Poly::monomial(m.clone(), c.clone());
                if rest.uses_var(v) {
                    continue;
                }
                let value = rest.scale(&(-&c.inv()));
                solved = Some((v, value));
                break;
            }
            match solved {
                Some((v, value)) => {
                    // Fold the new substitution into the accumulated map.
                    let mut single = HashMap::new();
                    single.insert(v, value.clone());
                    for existing in subs.values_mut() {
                        *existing = existing.substitute(&single);
                    }
                    subs.insert(v, value);
                    progress = true;
                }
                None => next.push(rel),
            }
        }
        residual = next;
        if !progress {
            break;
        }
    }
    let residual = residual
        .iter()
        .map(|r| r.substitute(&subs))
        .filter(|r| !r.is_zero())
        .collect();
    (subs, residual)
}

/// Checks that the closed set is stable under the invertible triangular
/// matrices of one orientation.
///
/// A generic point of the set is transformed by a generic triangular
/// matrix (with a Rabinowitsch inverse-determinant variable), and every
/// defining equation of the set, evaluated on the transformed constants,
/// must lie in the ideal generated by the set's residual relations plus
/// `det*gd - 1`. Membership is decided by normal-form reduction against a
/// Groebner basis of that ideal.
pub fn check_invariance(
    spec: &ClosedSetSpec,
    orientation: Orientation,
    limits: &Limits,
) -> Result<(), InvarianceError> {
    let (subs, residual) = solve_linear_relations(spec);
    let zero_coords = spec.zero_coords();

    // Generic point of the set: zero coordinates vanish, solved coordinates
    // take their expressions, everything else stays a symbol.
    let mut point: HashMap<Var, Poly> = HashMap::new();
    for z in &zero_coords {
        point.insert(*z, Poly::zero());
    }
    for (v, e) in &subs {
        point.insert(*v, e.clone());
    }

    let entry = |p: ProductKind, i: usize, j: usize, k: usize| -> Poly {
        let v = coord_var(p, i, j, k);
        point
            .get(&v)
            .cloned()
            .unwrap_or_else(|| Poly::variable(v))
    };
    let dot: Table<Poly> =
        std::array::from_fn(|i| std::array::from_fn(|j| std::array::from_fn(|k| entry(ProductKind::Dot, i, j, k))));
    let circ: Table<Poly> =
        std::array::from_fn(|i| std::array::from_fn(|j| std::array::from_fn(|k| entry(ProductKind::Circ, i, j, k))));

    let g = match orientation {
        Orientation::Upper => [
            [Poly::named("g11"), Poly::named("g12")],
            [Poly::zero(), Poly::named("g22")],
        ],
        Orientation::Lower => [
            [Poly::named("g11"), Poly::zero()],
            [Poly::named("g21"), Poly::named("g22")],
        ],
    };
    let gd = Poly::named("gd");
    let transformed = transformed_coordinates(&dot, &circ, &g, &gd);

    // Ideal of the set (residual relations) saturated at the determinant.
    let det = &(&Poly::named("g11") * &Poly::named("g22")) * &gd;
    let det_rel = &det - &Poly::one();
    let mut gens = residual.clone();
    gens.push(det_rel);
    let gb = buchberger(&PolySystem::new(gens, Vec::new()), limits)?;

    let mut check = |f: &Poly, source: String| -> Result<(), InvarianceError> {
        let nf = reduce_full(f, &gb.polys);
        if nf.is_zero() {
            Ok(())
        } else {
            Err(InvarianceError::NotInvariant {
                orientation,
                origin: source,
                residual: nf.to_string(),
            })
        }
    };

    // Every zero coordinate must stay zero...
    for z in &zero_coords {
        check(&transformed[z], format!("{} = 0", var_name(*z)))?;
    }
    // ...and every relation must keep holding.
    for (n, rel) in spec.relations.iter().enumerate() {
        let moved = rel.substitute(&transformed);
        check(&moved, format!("relation #{n}"))?;
    }
    Ok(())
}

/// First orientation under which the set is invariant.
pub fn invariance_orientation(
    spec: &ClosedSetSpec,
    limits: &Limits,
) -> Result<Orientation, InvarianceError> {
    match check_invariance(spec, Orientation::Upper, limits) {
        Ok(()) => Ok(Orientation::Upper),
        Err(first) => match check_invariance(spec, Orientation::Lower, limits) {
            Ok(()) => Ok(Orientation::Lower),
            Err(_) => Err(first),
        },
    }
}

// ---------------------------------------------------------------------------
// Non-degeneration certification
// ---------------------------------------------------------------------------

/// Result of the membership + invariance + per-sample emptiness pipeline.
#[derive(Clone, Debug)]
pub struct NonDegenCertificate {
    pub key: String,
    pub membership: bool,
    pub orientation: Option<Orientation>,
    pub targets: Vec<TargetCertificate>,
}

#[derive(Clone, Debug)]
pub struct TargetCertificate {
    pub target: String,
    pub samples: usize,
    pub disjoint: bool,
    pub failures: Vec<String>,
}

impl NonDegenCertificate {
    pub fn certified(&self) -> bool {
        self.membership
            && self.orientation.is_some()
            && !self.targets.is_empty()
            && self.targets.iter().all(|t| t.disjoint && t.samples > 0)
    }
}

/// Checks that the source representative (with its parameters symbolic,
/// after the row's `bind` substitutions) lies in the set identically.
fn source_membership(catalog: &Catalog, row: &NonDegenRow, spec: &ClosedSetSpec) -> Result<(), String> {
    let entry = catalog
        .entry(&row.variety, &row.source)
        .ok_or_else(|| format!("unknown source {}", row.source))?;
    let binds: HashMap<Var, Poly> = row.source_bindings.iter().cloned().collect();
    let pair = entry.pair.substitute(&binds);
    let mut coord_values: HashMap<Var, Poly> = HashMap::new();
    for (p, i, j, k) in all_coords() {
        coord_values.insert(coord_var(p, i, j, k), pair.product(p)[i][j][k].clone());
    }
    for z in spec.zero_coords() {
        if !coord_values[&z].is_zero() {
            return Err(format!(
                "coordinate {} is {} on the representative but zero on the set",
                var_name(z),
                coord_values[&z]
            ));
        }
    }
    for (n, rel) in spec.relations.iter().enumerate() {
        let v = rel.substitute(&coord_values);
        if !v.is_zero() {
            return Err(format!("relation #{n} evaluates to {v} on the representative"));
        }
    }
    Ok(())
}

/// Picks `n` values for one parameter from the pools, subject to a filter.
fn pick_values(n: usize, ok: impl Fn(&Scalar) -> bool) -> Vec<Scalar> {
    let mut out = Vec::new();
    for s in sample_pool().into_iter().chain(reserve_pool()) {
        if ok(&s) {
            out.push(s);
            if out.len() == n {
                break;
            }
        }
    }
    out
}

fn eval_nonzero(polys: &[Poly], point: &HashMap<Var, Scalar>) -> bool {
    polys.iter().all(|p| !p.eval(point).is_zero())
}

fn cross_product(per_var: &[(Var, Vec<Scalar>)]) -> Vec<HashMap<Var, Scalar>> {
    let mut out = vec![HashMap::new()];
    for (v, values) in per_var {
        let mut next = Vec::new();
        for partial in &out {
            for val in values {
                let mut m = partial.clone();
                m.insert(*v, val.clone());
                next.push(m);
            }
        }
        out = next;
    }
    out
}

/// Number of sample values per free parameter used by the certification.
pub const SAMPLES_PER_PARAM: usize = 3;

/// Certifies one Arguments-table row at sampled parameter values.
pub fn verify_nondegeneration(
    catalog: &Catalog,
    row: &NonDegenRow,
    samples_per_param: usize,
    limits: &Limits,
) -> NonDegenCertificate {
    let spec = ClosedSetSpec::from_row(row);
    let membership = match source_membership(catalog, row, &spec) {
        Ok(()) => true,
        Err(_) => false,
    };
    let orientation = invariance_orientation(&spec, limits).ok();

    let source_entry = catalog.entry(&row.variety, &row.source);
    let mut targets = Vec::new();
    for tgt in &row.targets {
        let mut failures = Vec::new();
        let mut samples = 0usize;
        let mut disjoint = true;
        let (Some(source_entry), Some(target_entry)) =
            (source_entry, catalog.entry(&row.variety, &tgt.target))
        else {
            targets.push(TargetCertificate {
                target: tgt.target.clone(),
                samples: 0,
                disjoint: false,
                failures: vec!["unknown entry".to_string()],
            });
            continue;
        };

        // Effective source parameters after the row's bind substitutions.
        let bind_map: HashMap<Var, Poly> = row.source_bindings.iter().cloned().collect();
        let source_params: Vec<Var> = source_entry
            .pair
            .params
            .names
            .iter()
            .copied()
            .filter(|p| !bind_map.contains_key(p))
            .collect();
        // Fresh symbols of the target spec.
        let explicit: HashMap<Var, RatFun> = tgt.bindings.iter().cloned().collect();
        let target_params = &target_entry.pair.params.names;

        // Map target parameters to expressions over source params + symbols.
        let mut sym_iter = tgt.symbols.iter();
        let mut target_exprs: Vec<(Var, RatFun)> = Vec::new();
        let mut bind_ok = true;
        for p in target_params {
            if let Some(e) = explicit.get(p) {
                target_exprs.push((*p, e.clone()));
            } else if let Some(s) = sym_iter.next() {
                target_exprs.push((*p, RatFun::variable(*s)));
            } else {
                failures.push(format!("target parameter {} unbound", var_name(*p)));
                bind_ok = false;
            }
        }
        if !bind_ok {
            targets.push(TargetCertificate {
                target: tgt.target.clone(),
                samples: 0,
                disjoint: false,
                failures,
            });
            continue;
        }

        // Sample source parameters subject to the source's exclusions and
        // the row's source conditions.
        let source_excl = &source_entry.pair.params.exclusions;
        let source_values: Vec<(Var, Vec<Scalar>)> = source_params
            .iter()
            .map(|p| {
                let values = pick_values(samples_per_param, |s| {
                    let mut point = HashMap::new();
                    point.insert(*p, s.clone());
                    // Conditions touching several parameters are enforced on
                    // the full tuple below; here only single-var ones apply.
                    source_excl
                        .iter()
                        .chain(&row.source_conditions)
                        .filter(|c| {
                            let vs = c.vars();
                            vs.len() == 1 && vs.contains(p)
                        })
                        .all(|c| !c.eval(&point).is_zero())
                });
                (*p, values)
            })
            .collect();
        let mut source_tuples: Vec<HashMap<Var, Scalar>> = cross_product(&source_values)
            .into_iter()
            .filter(|tup| {
                source_excl
                    .iter()
                    .chain(&row.source_conditions)
                    .all(|c| c.vars().iter().all(|v| tup.contains_key(v)) && !c.eval(tup).is_zero()
                        || !c.vars().iter().all(|v| tup.contains_key(v)))
            })
            .collect();
        if source_params.is_empty() {
            source_tuples = vec![HashMap::new()];
        }

        for source_tuple in &source_tuples {
            // Bindings applied to the source before specializing the set.
            let mut full_source: HashMap<Var, Poly> = bind_map.clone();
            for (v, s) in source_tuple {
                full_source.insert(*v, Poly::constant(s.clone()));
            }
            // Resolve chained binds (beta = alpha with alpha sampled).
            let resolved: HashMap<Var, Poly> = full_source
                .iter()
                .map(|(v, p)| (*v, p.substitute(&full_source)))
                .collect();

            // Sample the target symbols under the row's require conditions.
            let sym_values: Vec<(Var, Vec<Scalar>)> = tgt
                .symbols
                .iter()
                .map(|s| {
                    let values = pick_values(samples_per_param, |val| {
                        let mut point: HashMap<Var, Scalar> = source_tuple.clone();
                        for (v, p) in &resolved {
                            if let Some(c) = p.as_constant() {
                                point.insert(*v, c);
                            }
                        }
                        point.insert(*s, val.clone());
                        tgt.require
                            .iter()
                            .filter(|c| c.vars().iter().all(|v| point.contains_key(v)))
                            .all(|c| !c.eval(&point).is_zero())
                    });
                    (*s, values)
                })
                .collect();
            let mut tuples = cross_product(&sym_values);
            if tgt.symbols.is_empty() {
                tuples = vec![HashMap::new()];
            }

            for sym_tuple in tuples {
                // Full evaluation point: source samples + symbol samples.
                let mut point: HashMap<Var, Scalar> = source_tuple.clone();
                for (v, p) in &resolved {
                    if let Some(c) = p.as_constant() {
                        point.insert(*v, c.clone());
                    }
                }
                for (v, s) in &sym_tuple {
                    point.insert(*v, s.clone());
                }
                // All require conditions must hold, and each require_any
                // group needs one nonzero member.
                if !tgt
                    .require
                    .iter()
                    .all(|c| c.vars().iter().all(|v| point.contains_key(v)) && !c.eval(&point).is_zero())
                {
                    continue;
                }
                if !tgt.require_any.iter().all(|group| {
                    group.iter().any(|c| {
                        c.vars().iter().all(|v| point.contains_key(v))
                            && !c.eval(&point).is_zero()
                    })
                }) {
                    continue;
                }
                // Target parameter values at this sample.
                let mut target_point: HashMap<Var, Poly> = HashMap::new();
                let scalar_point: HashMap<Var, RatFun> = point
                    .iter()
                    .map(|(v, s)| (*v, RatFun::constant(s.clone())))
                    .collect();
                let mut valid = true;
                for (p, e) in &target_exprs {
                    let val = e.substitute(&scalar_point);
                    match val.as_poly().and_then(|q| q.as_constant()) {
                        Some(c) => {
                            target_point.insert(*p, Poly::constant(c));
                        }
                        None => {
                            valid = false;
                        }
                    }
                }
                if !valid {
                    continue;
                }
                // Respect the target entry's own exclusions.
                let scalar_target: HashMap<Var, Scalar> = target_point
                    .iter()
                    .map(|(v, p)| (*v, p.as_constant().unwrap()))
                    .collect();
                if !target_entry
                    .pair
                    .params
                    .exclusions
                    .iter()
                    .all(|c| eval_nonzero(std::slice::from_ref(c), &scalar_target))
                {
                    continue;
                }

                let concrete_target = target_entry.pair.substitute(&target_point);
                let point_polys: HashMap<Var, Poly> = point
                    .iter()
                    .map(|(v, s)| (*v, Poly::constant(s.clone())))
                    .collect();
                let special = spec.specialize(&point_polys);
                samples += 1;
                match orbit_meets_set(&concrete_target, &special.free, &special.relations, limits)
                {
                    Ok(false) => {}
                    Ok(true) => {
                        disjoint = false;
                        failures.push(format!(
                            "orbit of {} meets the set at {:?}",
                            tgt.target,
                            render_point(&point)
                        ));
                    }
                    Err(e) => {
                        disjoint = false;
                        failures.push(format!("solver: {e}"));
                    }
                }
            }
        }
        targets.push(TargetCertificate {
            target: tgt.target.clone(),
            samples,
            disjoint,
            failures,
        });
    }

    NonDegenCertificate {
        key: row.key(),
        membership,
        orientation,
        targets,
    }
}

fn render_point(point: &HashMap<Var, Scalar>) -> Vec<String> {
    let mut parts: Vec<String> = point
        .iter()
        .map(|(v, s)| format!("{}={}", var_name(*v), s))
        .collect();
    parts.sort();
    parts
}

/// The product-by-product necessary condition: a pair with one identically
/// zero product cannot degenerate to a pair whose corresponding product is
/// nonzero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Componentwise {
    Possible,
    Impossible,
}

pub fn componentwise_filter(source: &StructurePair, target: &StructurePair) -> Componentwise {
    for p in ProductKind::BOTH {
        if source.is_product_zero(p) && !target.is_product_zero(p) {
            return Componentwise::Impossible;
        }
    }
    Componentwise::Possible
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::builtin_catalog;
    use crate::expr::parse_poly;

    fn find_row<'c>(cat: &'c Catalog, variety: &str, src: &str, tgt: &str) -> &'c WitnessRow {
        cat.witnesses
            .iter()
            .find(|w| w.variety == variety && w.source == src && w.target == tgt)
            .unwrap()
    }

    #[test]
    fn l4_to_l5_verifies() {
        let cat = builtin_catalog();
        let row = find_row(cat, "leibniz_poisson", "L4", "L5");
        verify_degeneration(cat, row).unwrap();
    }

    #[test]
    fn identity_basis_is_a_self_degeneration() {
        let cat = builtin_catalog();
        let entry = cat.entry("leibniz_poisson", "L4").unwrap();
        let row = WitnessRow {
            variety: "leibniz_poisson".to_string(),
            source: entry.id.clone(),
            target: entry.id.clone(),
            lemma: None,
            origin: crate::catalog::WitnessOrigin::Table,
            symbols: vec![],
            source_bindings: vec![],
            target_bindings: vec![],
            conditions: vec![],
            basis: BasisMatrix::identity(),
        };
        verify_degeneration(cat, &row).unwrap();
    }

    #[test]
    fn deliberately_broken_witness_is_rejected() {
        // L4 -> L5^0 with E2 = e2/t instead of t*e2 fails with a pole or
        // a mismatched limit.
        let cat = builtin_catalog();
        let mut row = find_row(cat, "leibniz_poisson", "L4", "L5").clone();
        row.basis.rows[1][1] = RatFun::new(Poly::one(), Poly::named("t"));
        let err = verify_degeneration(cat, &row).unwrap_err();
        assert!(matches!(
            err,
            WitnessError::PoleAtZero { .. } | WitnessError::MismatchAt { .. }
        ));
    }

    #[test]
    fn off_by_one_exponent_is_repaired() {
        // T4 -> T1 uses E2 = t^2 e2; knocking one power of t off is exactly
        // the class of typo the bounded search can undo.
        let cat = builtin_catalog();
        let mut row = find_row(cat, "transposed_leibniz_poisson", "T4", "T1").clone();
        row.basis.rows[1][1] = RatFun::from_poly(Poly::named("t"));
        assert!(verify_degeneration(cat, &row).is_err());
        let cert = repair_witness(cat, &row).expect("repair finds the missing factor of t");
        assert!(cert.repaired_basis.is_some());
    }

    #[test]
    fn invariance_of_the_l4_set() {
        let cat = builtin_catalog();
        let row = cat
            .nondegens
            .iter()
            .find(|r| r.variety == "leibniz_poisson" && r.source == "L4")
            .unwrap();
        let spec = ClosedSetSpec::from_row(row);
        invariance_orientation(&spec, &Limits::default()).unwrap();
    }

    #[test]
    fn whole_space_is_invariant() {
        let spec = ClosedSetSpec {
            free: all_coords()
                .into_iter()
                .map(|(p, i, j, k)| coord_var(p, i, j, k))
                .collect(),
            relations: vec![],
        };
        check_invariance(&spec, Orientation::Upper, &Limits::default()).unwrap();
        check_invariance(&spec, Orientation::Lower, &Limits::default()).unwrap();
    }

    #[test]
    fn lone_idempotent_line_is_not_invariant() {
        // C = {a111 free, everything else zero} is not stable: a lower
        // triangular change of e1.e1 = e1 creates e2-components.
        let spec = ClosedSetSpec {
            free: [var("a111")].into_iter().collect(),
            relations: vec![],
        };
        assert!(check_invariance(&spec, Orientation::Lower, &Limits::default()).is_err());
    }

    #[test]
    fn l4_does_not_degenerate_to_l1() {
        let cat = builtin_catalog();
        let row = cat
            .nondegens
            .iter()
            .find(|r| {
                r.variety == "leibniz_poisson"
                    && r.source == "L4"
                    && r.targets.iter().any(|t| t.target == "L1")
            })
            .unwrap();
        let cert = verify_nondegeneration(cat, row, SAMPLES_PER_PARAM, &Limits::default());
        assert!(cert.certified(), "{cert:?}");
    }

    #[test]
    fn full_space_certifies_nothing() {
        // A set containing the whole space passes membership and invariance
        // but fails the orbit-disjointness check for every target.
        let cat = builtin_catalog();
        let row = NonDegenRow {
            variety: "leibniz_poisson".to_string(),
            source: "L4".to_string(),
            lemma: None,
            source_bindings: vec![],
            source_conditions: vec![],
            free: all_coords()
                .into_iter()
                .map(|(p, i, j, k)| coord_var(p, i, j, k))
                .collect(),
            relations: vec![],
            targets: vec![crate::catalog::NonDegenTarget {
                target: "L1".to_string(),
                symbols: vec![],
                bindings: vec![],
                require: vec![],
                require_any: vec![],
            }],
        };
        let cert = verify_nondegeneration(cat, &row, SAMPLES_PER_PARAM, &Limits::default());
        assert!(cert.membership);
        assert!(cert.orientation.is_some());
        assert!(!cert.certified());
    }

    #[test]
    fn componentwise_examples() {
        let cat = builtin_catalog();
        let l1 = &cat.entry("leibniz_poisson", "L1").unwrap().pair;
        let l4 = &cat.entry("leibniz_poisson", "L4").unwrap().pair;
        let zero = StructurePair::zero();
        assert_eq!(componentwise_filter(l1, l4), Componentwise::Impossible);
        assert_eq!(componentwise_filter(&zero, &zero), Componentwise::Possible);
        // N01 (zero dot) cannot degenerate to N14^alpha (nonzero dot).
        let n01 = &cat.entry("novikov_poisson", "N01").unwrap().pair;
        let n14 = &cat.entry("novikov_poisson", "N14").unwrap().pair;
        assert_eq!(componentwise_filter(n01, n14), Componentwise::Impossible);
    }

    #[test]
    fn solved_relations_shrink() {
        let spec = ClosedSetSpec {
            free: [var("a111"), var("a112"), var("b112")].into_iter().collect(),
            relations: vec![parse_poly("b112 - 3*a112").unwrap()],
        };
        let (subs, residual) = solve_linear_relations(&spec);
        assert!(residual.is_empty());
        assert_eq!(subs[&var("b112")], parse_poly("3*a112").unwrap());
    }
}
