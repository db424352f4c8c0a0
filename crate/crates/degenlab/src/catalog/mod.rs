//! The catalog: every named algebra, variety, witness row, closed-set
//! certificate, figure label, component claim, and automorphism family,
//! encoded as data.
//!
//! The built-in catalog is an embedded text file in the same format
//! external catalogs use (see `catalog-format.ebnf` at the crate root), so
//! loading it exercises the parser on every run. Identifiers follow the
//! tables: entries keep their published names (`L5`, `N07`, `A15`, ...),
//! the zero pair is `C8` in every variety, and structure-constant
//! coordinates are `a<i><j><k>` for the first product and `b<i><j><k>` for
//! the second.

mod parse;

pub use parse::{load_catalog_str, save_catalog, CatalogError};

use std::collections::HashMap;
use std::sync::OnceLock;

use crate::algebra::{
    change_basis, check_variety, table_map, BasisMatrix, StructurePair, Table, VarietyDef,
};
use crate::invariants::derivation_space;
use crate::poly::{Poly, Var};
use crate::ratfun::RatFun;
use crate::scalar::Scalar;

/// One named algebra or parametric family in one variety.
#[derive(Clone, Debug, PartialEq)]
pub struct CatalogEntry {
    pub variety: String,
    pub id: String,
    pub pair: StructurePair,
}

impl CatalogEntry {
    pub fn is_family(&self) -> bool {
        !self.pair.params.names.is_empty()
    }
}

/// Provenance of a witness row.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessOrigin {
    /// A row of a primary-degeneration table.
    Table,
    /// A row of a family orbit-closure table (parametrized index).
    Family,
    /// An edge drawn in a figure whose parametrized basis is classical and
    /// not printed in the tables.
    Figure,
    /// The `E_i = t e_i` scaling onto the zero pair.
    Scaling,
    /// A row reused by a corollary variety.
    Corollary,
}

/// A degeneration witness: a parametrized basis (with optional parametrized
/// index) carrying the source structure onto the target as t -> 0.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessRow {
    pub variety: String,
    pub source: String,
    pub target: String,
    pub lemma: Option<String>,
    pub origin: WitnessOrigin,
    /// Free symbols of the row (surviving parameters, fresh target
    /// parameters, radical-rationalizing samplers).
    pub symbols: Vec<Var>,
    /// Bindings of every source parameter; Laurent expressions in t realize
    /// a parametrized index.
    pub source_bindings: Vec<(Var, RatFun)>,
    /// Bindings of every target parameter (t-free).
    pub target_bindings: Vec<(Var, RatFun)>,
    /// Side conditions, each required nonzero.
    pub conditions: Vec<Poly>,
    pub basis: BasisMatrix,
}

impl WitnessRow {
    pub fn key(&self) -> String {
        format!("{}:{}->{}", self.variety, self.source, self.target)
    }
}

/// One target of a non-degeneration row, with its fresh parameter symbols,
/// parameter bindings, and side conditions (`require` polynomials must all
/// be nonzero; each `require_any` group needs at least one nonzero member).
#[derive(Clone, Debug, PartialEq)]
pub struct NonDegenTarget {
    pub target: String,
    pub symbols: Vec<Var>,
    pub bindings: Vec<(Var, RatFun)>,
    pub require: Vec<Poly>,
    pub require_any: Vec<Vec<Poly>>,
}

/// An Arguments-table row: the invariant closed set certifying that the
/// source's orbit closure avoids each listed target.
#[derive(Clone, Debug, PartialEq)]
pub struct NonDegenRow {
    pub variety: String,
    pub source: String,
    pub lemma: Option<String>,
    /// Optional re-bindings of source parameters (diagonal sub-families).
    pub source_bindings: Vec<(Var, Poly)>,
    /// Conditions on the source parameters.
    pub source_conditions: Vec<Poly>,
    /// Free coordinates of the closed set; all other coordinates not
    /// mentioned in a relation are zero on the set.
    pub free: Vec<Var>,
    /// Relation polynomials over coordinates and source parameters.
    pub relations: Vec<Poly>,
    pub targets: Vec<NonDegenTarget>,
}

impl NonDegenRow {
    pub fn key(&self) -> String {
        format!("{}:{}", self.variety, self.source)
    }
}

/// An orbit-dimension label from one of the figures; `binds` pins special
/// members (for split nodes), `require` excludes strata.
#[derive(Clone, Debug, PartialEq)]
pub struct FigureLabel {
    pub variety: String,
    pub id: String,
    pub dim: usize,
    pub binds: Vec<(Var, Scalar)>,
    pub require: Vec<Poly>,
}

/// Claimed irreducible components of one variety.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentClaim {
    pub variety: String,
    pub components: Vec<String>,
}

/// One matrix family inside an automorphism group description.
#[derive(Clone, Debug, PartialEq)]
pub struct AutMatrix {
    pub params: Vec<Var>,
    pub exclusions: Vec<Poly>,
    pub matrix: [[RatFun; 2]; 2],
}

/// The published automorphism group of one base commutative associative
/// algebra, as a list of matrix families, together with the parameter count
/// cross-check (`derdim`).
#[derive(Clone, Debug, PartialEq)]
pub struct AutFamily {
    pub base: String,
    pub families: Vec<AutMatrix>,
    pub derdim: usize,
}

/// A stated identification inside a family: applying `matrix` to the entry
/// yields the entry at the mapped parameters, identically.
#[derive(Clone, Debug, PartialEq)]
pub struct IsoNote {
    pub variety: String,
    pub id: String,
    pub param_map: Vec<(Var, Poly)>,
    pub matrix: [[RatFun; 2]; 2],
}

/// A stated literal equality between two specializations.
#[derive(Clone, Debug, PartialEq)]
pub struct IsoEquality {
    pub variety: String,
    pub left: String,
    pub left_binds: Vec<(Var, Scalar)>,
    pub right: String,
    pub right_binds: Vec<(Var, Scalar)>,
}

/// Which non-trivial identification a family's members admit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistinctModulo {
    Nothing,
    /// Two-parameter families symmetric under swapping the parameters.
    Swap,
    /// One-parameter families symmetric under negating the parameter.
    Negation,
}

/// A section's claim that distinct parameters give non-isomorphic members.
#[derive(Clone, Debug, PartialEq)]
pub struct DistinctClaim {
    pub variety: String,
    pub id: String,
    pub modulo: DistinctModulo,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Catalog {
    pub varieties: Vec<VarietyDef>,
    pub entries: Vec<CatalogEntry>,
    pub witnesses: Vec<WitnessRow>,
    pub nondegens: Vec<NonDegenRow>,
    pub figures: Vec<FigureLabel>,
    pub components: Vec<ComponentClaim>,
    pub autgroups: Vec<AutFamily>,
    pub isos: Vec<IsoNote>,
    pub iso_equalities: Vec<IsoEquality>,
    pub distincts: Vec<DistinctClaim>,
}

impl PartialEq for VarietyDef {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.dot_commutative == other.dot_commutative
            && self.laws == other.laws
    }
}

impl Catalog {
    pub fn variety(&self, name: &str) -> Option<&VarietyDef> {
        self.varieties.iter().find(|v| v.name == name)
    }

    pub fn entry(&self, variety: &str, id: &str) -> Option<&CatalogEntry> {
        self.entries
            .iter()
            .find(|e| e.variety == variety && e.id == id)
    }

    pub fn entries_of(&self, variety: &str) -> Vec<&CatalogEntry> {
        self.entries
            .iter()
            .filter(|e| e.variety == variety)
            .collect()
    }

    pub fn variety_names(&self) -> Vec<&str> {
        self.varieties.iter().map(|v| v.name.as_str()).collect()
    }

    /// Stable content hash of the canonical serialization.
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let text = save_catalog(self);
        let mut h = Sha256::new();
        h.update(text.as_bytes());
        let out = h.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }
}

static BUILTIN_TEXT: &str = include_str!("builtin.cat");

/// The built-in catalog transcribing the published tables.
pub fn builtin_catalog() -> &'static Catalog {
    static CATALOG: OnceLock<Catalog> = OnceLock::new();
    CATALOG.get_or_init(|| load_catalog_str(BUILTIN_TEXT).expect("built-in catalog must parse"))
}

/// Result of checking one automorphism group description.
#[derive(Clone, Debug)]
pub struct AutReport {
    pub base: String,
    pub preserved: bool,
    pub param_count: usize,
    pub derivation_dim: usize,
    pub failures: Vec<String>,
}

impl AutReport {
    pub fn passed(&self) -> bool {
        self.preserved && self.param_count == self.derivation_dim && self.failures.is_empty()
    }
}

/// Verifies that each listed matrix family preserves the base algebra's
/// product identically in its parameters, and that the total parameter
/// count matches the derivation dimension of the base algebra (the Lie
/// algebra of the automorphism group).
pub fn verify_automorphisms(catalog: &Catalog, base: &str) -> AutReport {
    let mut failures = Vec::new();
    let Some(group) = catalog.autgroups.iter().find(|g| g.base == base) else {
        return AutReport {
            base: base.to_string(),
            preserved: false,
            param_count: 0,
            derivation_dim: 0,
            failures: vec![format!("no automorphism data for {base}")],
        };
    };
    let Some(entry) = catalog.entry("commutative_associative", base) else {
        return AutReport {
            base: base.to_string(),
            preserved: false,
            param_count: 0,
            derivation_dim: 0,
            failures: vec![format!("base algebra {base} not in catalog")],
        };
    };
    let lift = |t: &Table<Poly>| table_map(t, |p| RatFun::from_poly(p.clone()));
    let mut param_count = 0usize;
    for (n, fam) in group.families.iter().enumerate() {
        param_count = param_count.max(fam.params.len());
        let m = BasisMatrix {
            rows: fam.matrix.clone(),
        };
        match change_basis(&lift(&entry.pair.dot), &lift(&entry.pair.circ), &m) {
            Ok((dot, _)) => {
                for i in 0..2 {
                    for j in 0..2 {
                        for k in 0..2 {
                            let want = RatFun::from_poly(entry.pair.dot[i][j][k].clone());
                            if dot[i][j][k] != want {
                                failures.push(format!(
                                    "family {n}: product not preserved at ({i},{j},{k}): {} != {}",
                                    dot[i][j][k], want
                                ));
                            }
                        }
                    }
                }
            }
            Err(_) => failures.push(format!("family {n}: matrix is singular")),
        }
    }
    let derivation_dim = derivation_space(&entry.pair).dimension;
    AutReport {
        base: base.to_string(),
        preserved: failures.is_empty(),
        param_count,
        derivation_dim,
        failures,
    }
}

/// Checks one stated in-family identification symbolically.
pub fn verify_iso_note(catalog: &Catalog, note: &IsoNote) -> Result<(), String> {
    let entry = catalog
        .entry(&note.variety, &note.id)
        .ok_or_else(|| format!("unknown entry {}:{}", note.variety, note.id))?;
    let m = BasisMatrix {
        rows: note.matrix.clone(),
    };
    let lift = |t: &Table<Poly>| table_map(t, |p| RatFun::from_poly(p.clone()));
    let (dot, circ) = change_basis(&lift(&entry.pair.dot), &lift(&entry.pair.circ), &m)
        .map_err(|e| e.to_string())?;
    let map: HashMap<Var, Poly> = note.param_map.iter().cloned().collect();
    let mapped = entry.pair.substitute(&map);
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let wd = RatFun::from_poly(mapped.dot[i][j][k].clone());
                let wc = RatFun::from_poly(mapped.circ[i][j][k].clone());
                if dot[i][j][k] != wd || circ[i][j][k] != wc {
                    return Err(format!(
                        "identification fails at ({i},{j},{k}): dot {} vs {}, circ {} vs {}",
                        dot[i][j][k], wd, circ[i][j][k], wc
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Checks one stated literal equality of specializations.
pub fn verify_iso_equality(catalog: &Catalog, eq: &IsoEquality) -> Result<(), String> {
    let scalar_bind = |binds: &[(Var, Scalar)]| -> HashMap<Var, Poly> {
        binds
            .iter()
            .map(|(v, s)| (*v, Poly::constant(s.clone())))
            .collect()
    };
    let l = catalog
        .entry(&eq.variety, &eq.left)
        .ok_or_else(|| format!("unknown entry {}:{}", eq.variety, eq.left))?
        .pair
        .substitute(&scalar_bind(&eq.left_binds));
    let r = catalog
        .entry(&eq.variety, &eq.right)
        .ok_or_else(|| format!("unknown entry {}:{}", eq.variety, eq.right))?
        .pair
        .substitute(&scalar_bind(&eq.right_binds));
    if l.dot == r.dot && l.circ == r.circ {
        Ok(())
    } else {
        Err(format!("tables differ: {:?} vs {:?}", l, r))
    }
}

/// Runs `check_variety` on one entry, identically in its parameters.
pub fn check_entry(catalog: &Catalog, entry: &CatalogEntry) -> Vec<crate::algebra::Violation> {
    let v = catalog
        .variety(&entry.variety)
        .unwrap_or_else(|| panic!("entry {} references unknown variety", entry.id));
    check_variety(&entry.pair, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_parses_and_has_expected_shape() {
        let cat = builtin_catalog();
        // Transposed Leibniz-Poisson: T1..T8 plus the zero pair.
        let t = cat.entries_of("transposed_leibniz_poisson");
        assert_eq!(t.len(), 9);
        for v in cat.variety_names() {
            assert!(cat.entry(v, "C8").is_some(), "zero pair present in {v}");
        }
        // Commutative pre-Lie primary degeneration table has 27 rows.
        let cpl_rows = cat
            .witnesses
            .iter()
            .filter(|w| w.lemma.as_deref() == Some("degcpl"))
            .count();
        assert_eq!(cpl_rows, 27);
    }

    #[test]
    fn roundtrip_save_load_is_identity() {
        let cat = builtin_catalog();
        let text = save_catalog(cat);
        let again = load_catalog_str(&text).expect("serialized catalog reparses");
        assert_eq!(cat, &again);
    }

    #[test]
    fn automorphism_groups_verify() {
        let cat = builtin_catalog();
        for base in ["A01", "A02", "A03", "A04"] {
            let rep = verify_automorphisms(cat, base);
            assert!(rep.passed(), "{base}: {:?}", rep.failures);
        }
    }

    #[test]
    fn swap_on_a02_is_not_an_automorphism() {
        // e2 is not idempotent in A02, so the swap fails to preserve the
        // product.
        let cat = builtin_catalog();
        let entry = cat.entry("commutative_associative", "A02").unwrap();
        let swap = [
            [Scalar::zero(), Scalar::one()],
            [Scalar::one(), Scalar::zero()],
        ];
        let out = crate::algebra::change_basis_scalar(&entry.pair, swap).unwrap();
        assert_ne!(out.dot, entry.pair.dot);
    }

    #[test]
    fn stated_identifications_hold() {
        let cat = builtin_catalog();
        for note in &cat.isos {
            verify_iso_note(cat, note)
                .unwrap_or_else(|e| panic!("iso note {}:{} failed: {e}", note.variety, note.id));
        }
        for eq in &cat.iso_equalities {
            verify_iso_equality(cat, eq)
                .unwrap_or_else(|e| panic!("equality {} = {} failed: {e}", eq.left, eq.right));
        }
    }
}
