//! Compact linearization of binary quadratic programs whose variables are
//! governed by linear equations with positive coefficients.
//!
//! The pipeline: describe an instance ([`model`]), choose multiplier sets
//! satisfying the coverage conditions ([`coverage`]), emit the compact or
//! standard linearization ([`linearizer`]), solve relaxations exactly
//! ([`optcore`]), and check the advertised guarantees on concrete instances
//! ([`verifier`]). [`zoo`] generates QAP, QTSP, and random test instances;
//! [`io`] reads/writes the instance format and exports LP files.

pub mod coverage;
pub mod io;
pub mod linearizer;
pub mod model;
pub mod optcore;
pub mod rat;
pub mod verifier;
pub mod zoo;

pub use coverage::{closure_disjoint, solve_selection, CoveragePlan};
pub use linearizer::{compact_linearize, relax, standard_linearize, LinModel};
pub use model::{validate_instance, Instance, Pair, VarId};
pub use optcore::{solve_lp, solve_milp};
pub use rat::{rat, ratio, Rat};
