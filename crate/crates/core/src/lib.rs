//! Baire-one functions as computable objects.
//!
//! Continuous functions are expression trees ([`continuous::ContinuousExpr`]);
//! Baire-one functions are sequences of them ([`baire::BaireSeq`]) evaluated
//! through a pointwise-limit engine. On top sit zero sets and separation
//! witnesses, the bounded/unbounded extension loops, an exact backend for
//! finite topological spaces, and a small scripting language.

pub mod baire;
pub mod continuous;
pub mod domain;
pub mod dsl;
pub mod extension;
pub mod finite_space;
pub mod library;
pub mod zero_sets;

pub use baire::{BaireSeq, ConvergenceReport, EvalConfig, Family, Modulus, SeqError, SeriesBounds};
pub use continuous::{ContinuousExpr, StdFn};
pub use domain::{Domain, Region};
pub use zero_sets::{SampledSet, SeparationWitness};
