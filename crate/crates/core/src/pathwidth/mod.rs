//! Path decompositions, composition sequences and pathwidth oracles.

pub mod composition;
pub mod decomposition;
pub mod exact;
pub mod tree;

pub use composition::{
    composed_metric, composed_unit_graph, composition_to_decomposition,
    decomposition_to_composition, CompositionError, CompositionParseError, CompositionStep,
    LinearCompositionSequence,
};
pub use decomposition::{
    normalize_decomposition, normalize_to_width, validate_path_decomposition, DecompositionError,
    DecompositionParseError, PathDecomposition,
};
pub use exact::{
    exact_path_decomposition, exact_pathwidth, exact_pathwidth_with_limit, OracleError,
    DEFAULT_ORACLE_LIMIT,
};
pub use tree::{
    alpha_counts, forest_pathwidth, peel_path, tree_path_decomposition, tree_pathwidth, TreeError,
};
