//! Characteristic-dependent linear rank inequalities over prime fields:
//! exact subspace entropies, inequality generation from guide matrices, and
//! randomized and exhaustive verification.

pub mod exec;
pub mod expr;
pub mod generator;
pub mod gf;
pub mod guide;
pub mod selftest;
pub mod subspace;
pub mod verifier;

pub use exec::Execution;
pub use expr::{FamilyClass, NablaMode, RankExpr, Rational, TaggedInequality, Validity, VarSet};
pub use gf::{MatrixGf, PrimeField};
pub use guide::GuideMatrix;
pub use subspace::{Assignment, Subspace};
pub use verifier::{SamplingPolicy, TrialReport, Witness};
