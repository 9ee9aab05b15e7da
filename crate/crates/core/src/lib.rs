//! Exact arithmetic, coloring families and a proof-producing search engine
//! for colorings of the nonzero rationals that avoid monochromatic
//! solutions of a linear equation.

pub mod colorings;
pub mod engine;
pub mod equations;
pub mod error;
pub mod ratcore;

pub use colorings::{
    canonicalize, find_monochromatic, strongly_free_check, ColoringReport, ColoringSpec,
    Permutation,
};
pub use engine::{
    check_proof_table, enumerate_colorings, search, NodeUniverse, ProofTree, SearchOptions,
    SearchOutcome, Seeds, UniverseConfig,
};
pub use equations::{parse_equation, LinearEquation, SolutionTuple};
pub use error::{Error, Result};
pub use ratcore::{rat, Rational};
