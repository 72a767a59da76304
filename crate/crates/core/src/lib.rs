//! Low-adaptivity maximization of DR-submodular functions subject to
//! polymatroid or packing constraints.

pub mod error;
pub mod generators;
pub mod guess;
pub mod instance;
pub mod matrix;
pub mod objective;
pub mod oracle;
pub mod polymatroid;
pub mod report;
pub mod selftest;
pub mod softmax;
pub mod solver_matroid;
pub mod solver_packing;

pub use error::{Error, Result};
pub use guess::{
    build_ladder, solve_with_guessing, Constraint, GuessConfig, GuessLadder, RoundCounter,
};
pub use instance::{emit_instance, parse_instance, ConstraintModel, InstanceFile, ParseError};
pub use matrix::SparseMatrix;
pub use objective::{Coverage, DirectedCut, Linear, Objective, Sampled, SetFunction, WeightedArc};
pub use polymatroid::{PolymatroidInstance, PolymatroidKind, PolymatroidOracle, TightSet};
pub use report::{CheckTally, Diagnostics, GuessOutcome, SolveReport, Termination, REPORT_SCHEMA};
pub use softmax::SoftmaxParams;
pub use solver_matroid::{solve_matroid_monotone, solve_matroid_nonmonotone, MatroidSolverConfig};
pub use solver_packing::{
    normalize_packing, solve_packing_monotone, solve_packing_nonmonotone, NormalizationEvent,
    PackingInstance, PackingSolverConfig,
};
