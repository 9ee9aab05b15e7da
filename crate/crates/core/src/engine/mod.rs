//! The prover: node universes, constraint derivation, propagation and
//! search, proof trees and their checker.

mod constraints;
mod proof;
mod search;
mod universe;

pub use constraints::{derive_constraints, Constraint, ConstraintSet};
pub use proof::{
    check_proof_table, export_proof, parse_proof, trim, Assignment, Claim, ExportFormat,
    Justification, ProofRow, ProofTree, Seeds, ValidationReport, Violation, ViolationKind,
};
pub use search::{
    enumerate_colorings, search, search_escalating, ColorState, Coloring, Enumeration, Escalation,
    Propagation, Propagator, SearchOptions, SearchOutcome, SearchResult, SearchStats, TrailEntry,
    MAX_COLORS,
};
pub use universe::{closure, generate_universe, Node, NodeUniverse, UniverseConfig, DEFAULT_BOUND};

/// Bumped whenever search output for the same input can change.
pub const ENGINE_VERSION: &str = "1";
