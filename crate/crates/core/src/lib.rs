//! Exact computation of stratum correspondences on the special fiber of a
//! strictly semistable degeneration, their composition, and their action on
//! the E1 page of the weight spectral sequence.

pub mod chow;
pub mod engine;
pub mod format;
pub mod generators;
pub mod linalg;
pub mod report;
pub mod strata;
pub mod wss;

pub use chow::{ChowClass, ChowError, ChowPresentation, GradedMap, MapKind};
pub use engine::{
    act, check_composition, compose_level, compute_all_levels, compute_all_levels_with, transpose_check,
    CorrespondenceFamily, CycleComponent, EngineError, LevelOneInput, SolveOptions,
};
pub use linalg::{hnf, rank, solve_unique, Hnf, IntMatrix, Solve};
pub use strata::{position, IncidenceStructure, StratumKey, Violation};
