//! degenlab: exact verification of classification, degeneration, and
//! orbit-closure tables for two-dimensional Poisson-type algebras.
//!
//! The crate is organized around the data of a verification run:
//!
//! * [`scalar`], [`poly`], [`ratfun`] — exact arithmetic over Q(i), sparse
//!   multivariate polynomials, rational functions with Laurent limits.
//! * [`algebra`] — structure constants of bilinear pairs, multilinear
//!   identity expansion, and basis changes.
//! * [`catalog`] — the built-in encoding of every algebra, witness row,
//!   closed-set certificate, orbit-dimension label, and component claim,
//!   plus the text format for external catalogs.
//! * [`invariants`] — derivation algebras, orbit dimensions, and cheap
//!   isomorphism invariants.
//! * [`solver`] — Buchberger's algorithm and emptiness of polynomial
//!   systems over the complex numbers.
//! * [`degen`] — verification of degeneration witnesses and certification
//!   of non-degenerations via invariant closed sets.
//! * [`geometry`] — the degeneration graph, transitive closure,
//!   irreducible-component extraction, and DOT emission.
//! * [`report`] — deterministic, line-oriented verification reports.
//!
//! Heavy suites run data-parallel through [`par`] when the `parallel`
//! feature (default) is enabled; without it everything runs sequentially
//! on one thread.

pub mod algebra;
pub mod catalog;
pub mod degen;
pub mod expr;
pub mod geometry;
pub mod invariants;
pub mod oracle;
pub mod par;
pub mod poly;
pub mod ratfun;
pub mod report;
pub mod scalar;
pub mod solver;

pub use scalar::Scalar;
