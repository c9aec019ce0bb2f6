//! Dependence measurement on metric and kernel representations of data.
//!
//! The library computes distance covariance/correlation and HSIC from a
//! shared pairwise-matrix core, exposes the exact transforms that connect the
//! two families (a bijective metric↔kernel map and a fixed-point map), and
//! builds permutation testing, property diagnostics, synthetic benchmarks,
//! and spectral clustering on top of that core.
//!
//! Everything downstream of a seed is deterministic: the same seed produces
//! bit-identical statistics, p-values, and cluster labels regardless of
//! thread count.

pub mod diagnostics;
pub mod error;
pub mod io;
pub mod matrices;
pub mod rng;
pub mod stats;
pub mod synth;
pub mod testing;
pub mod transforms;
pub mod cluster;

pub use cluster::{
    adjusted_rand_index, compare_transform_clustering, gaussian_mixture_demo, spectral_cluster,
    ClusterResult, TransformComparison,
};
pub use diagnostics::{
    audit_rank_preservation, audit_round_trip, audit_translation_invariance,
    check_negative_type, check_positive_definite, check_theorem1_biconditional, Property,
    PropertyReport, Theorem1Report, DEFAULT_EIG_TOL,
};
pub use error::{Error, Result};
pub use io::{
    data_csv_string, matrix_csv_string, read_data_csv, read_labels_csv, read_matrix_csv,
    write_data_csv, write_labels_csv, write_matrix_csv,
};
pub use matrices::{
    distance_matrix, kernel_matrix, median_pairwise_distance, Bandwidth, CenteredMatrix,
    Centering, DataMatrix, Kernel, MatrixKind, Metric, PairwiseMatrix, Side,
};
pub use stats::{
    apply_transform, biased_stat, corrected_unbiased_hsic, normalized_stat,
    normalized_unbiased_stat, stat_on_matrices, stat_pipeline, unbiased_stat, Representation,
    StatConfig, StatFamily, StatValue, StatVariant, VariantKind,
};
pub use synth::{estimate_power, generate, PowerReport, Relation, SimulationSpec};
pub use testing::{
    permutation_test, pvalue_equivalence_check, EquivalencePair, EquivalenceReport, TestResult,
};
pub use transforms::{
    bijective_scaled, bijective_to_kernel, bijective_to_metric, fixed_point_shift,
    fixed_point_to_kernel, fixed_point_to_metric, TransformKind, TransformSpec,
};
