//! Cluster expansion of the Ursell function: labeled graphs, coefficient
//! functions, the truncated activity series and its bounds.

mod bounds;
mod expansion;
mod graphs;
mod montecarlo;

pub use bounds::{check_tree_graph_bound, check_ursell_decay, BoundConstants, BoundPoint, TreeGraphCheck, UrsellDecayCheck};
pub use expansion::{
    a3_analytic, default_a4_radii, ursell_derivative, ursell_truncated, ClusterCoefficients, ClusterExpansion,
};
pub(crate) use expansion::{autoconvolution_derivative, mayer_derivative, require_small_perturbation};
pub use graphs::{enumerate_connected_graphs, enumerate_trees, pair_list, LabeledGraph};
pub use montecarlo::{an_monte_carlo, graph_monte_carlo, GraphFamily, GraphSum, McConfig, McEstimate, McRun};
