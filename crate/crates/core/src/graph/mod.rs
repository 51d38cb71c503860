//! The bipartite membership graph and its one-mode projections.

mod build;
mod components;
mod export;
mod projection;

pub use build::{build_bipartite, BipartiteGraph, BuildMode, BuildOptions, AUTO_EXACT_PAIRS};
pub use components::{
    bipartite_components, components, degree_histogram, largest_component_fraction, ComponentPartition,
    DegreeHistogram,
};
pub use export::{edge_pieces, scene_svg, SceneStyle};
pub use projection::{project_onto_groups, project_onto_vertices, IntersectionGraph, Side};
