//! Random-walk sampling of graphs that can only be read one neighborhood at
//! a time, with on-the-fly overlay rewiring that removes and replaces edges
//! to speed up mixing while never lowering conductance.
//!
//! Layers, bottom up:
//! - [`graph`]: base topology and the [`OverlayLedger`] that rewires it.
//! - [`access`]: the per-node query interface and its unique-query ledger.
//! - [`rewiring`]: local removal and replacement rules.
//! - [`samplers`]: SRW, MHRW, random jump and the rewiring walk.
//! - [`estimation`]: Geweke diagnostic, importance sampling, KL bias.
//! - [`spectral`]: exact conductance, cross-cutting oracle, SLEM, bounds.
//! - [`generators`]: barbell and latent-space graphs.
//! - [`experiment`]: paired comparisons and overlay verification.

pub mod access;
pub mod error;
pub mod estimation;
pub mod experiment;
pub mod generators;
pub mod graph;
pub mod rewiring;
pub mod samplers;
pub mod spectral;

pub use access::{
    load_edgelist, parse_edgelist, AccessLayer, AttributeTable, EdgeMode, NeighborhoodView,
    QueryLedger, DEGREE,
};
pub use error::{Error, Result};
pub use estimation::{
    geweke_z, importance_estimate, kl_bias, overlay_degree_estimate, Distribution, GewekeMonitor,
    GewekeResult, SampleEntry, SampleSet,
};
pub use experiment::{run_experiment, verify_overlay, ExperimentReport, ExperimentSpec, GraphSource, Truth};
pub use generators::{barbell, latent_space, removal_gain_factor, LatentSpaceConfig, Sharpness};
pub use graph::{common_neighbors, effective_neighbors, Decision, EdgeKey, Graph, NodeId, OverlayLedger};
pub use rewiring::{
    apply_removal, apply_replacement, is_removable, is_removable_with_degrees,
    replacement_candidate, RemovalVerdict, Rule,
};
pub use samplers::{run_walk, SamplerConfig, Scheme, WalkState, Walker};
pub use spectral::{
    conductance_exact, cross_cutting_oracle, mixing_bound, rpd_delta, slem_mixing_time, CutResult,
    SpectralReport,
};
