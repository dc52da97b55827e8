//! Symmetric tensors, random tensor ensembles and trace invariants.

mod dist;
mod invariants;
mod network;
mod sym;

pub use dist::{
    random_orthogonal, sample_gote, sample_wigner, sample_wigner_with, substream,
    EntryDistribution, VarianceProfile,
};
pub use invariants::{
    balanced_invariant, exact_expected_trace_oracle, expected_injective_trace,
    expected_trace_partition, injective_trace, melonic_weight, resolvent_series,
    resolvent_series_from, BalancedInvariant, MAX_GROUPING_VERTICES, MAX_PARTITION_EDGES,
};
pub use network::{
    as_matrix, contract_network, trace_invariant, trace_invariant_naive, MAX_ASSIGNMENTS,
    MAX_INTERMEDIATE,
};
pub use sym::{contract, distinct_permutations, sym_len, SortedIndices, SymTensor, MAX_ORDER};

/// Trace values are plain doubles; exact expectations are accumulated with
/// compensated summation.
pub type TraceValue = f64;
