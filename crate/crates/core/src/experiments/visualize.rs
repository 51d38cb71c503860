use serde::{Deserialize, Serialize};

use super::{sample_instance, Artifact, ExperimentConfig, ExperimentKind};
use crate::graph::{edge_pieces, project_onto_vertices, scene_svg, IntersectionGraph, SceneStyle};
use crate::{Error, Result};

/// One sampled scene and its files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Visualization {
    pub vertex_count: usize,
    pub group_count: usize,
    pub edge_count: usize,
    /// Unwrapped (minimum-image) length of every drawn edge, in edge order.
    pub edge_lengths: Vec<f64>,
    pub svg: String,
    pub vertices_csv: String,
    pub groups_csv: String,
    pub edges_csv: String,
}

impl Visualization {
    pub fn artifacts(&self) -> Vec<Artifact> {
        vec![
            Artifact::new("scene.svg", self.svg.clone()),
            Artifact::new("vertices.csv", self.vertices_csv.clone()),
            Artifact::new("groups.csv", self.groups_csv.clone()),
            Artifact::new("edges.csv", self.edges_csv.clone()),
        ]
    }

    pub fn max_edge_length(&self) -> f64 {
        self.edge_lengths.iter().copied().fold(0.0, f64::max)
    }
}

fn drawn_lengths(graph: &IntersectionGraph, side: f64, points: &crate::geometry::PointCloud) -> Vec<f64> {
    graph
        .edges()
        .map(|(a, b, _)| {
            let (p, q) = edge_pieces(side, points.point(a), points.point(b))[0];
            (q[0] - p[0]).hypot(q[1] - p[1])
        })
        .collect()
}

/// Sample one instance and render `G_V` over both clouds.
pub fn export_visualization(config: &ExperimentConfig) -> Result<Visualization> {
    if config.kind != ExperimentKind::Visualize {
        return Err(Error::config("export_visualization needs a visualize config"));
    }
    config.validate()?;
    let torus = config.resolved_torus()?;
    let inst = sample_instance(
        &torus,
        &config.kernel,
        config.lambda.unwrap(),
        config.mu.unwrap(),
        &[],
        config.build,
        config.seed,
        &[0],
    )?;
    let graph = project_onto_vertices(&inst.bipartite);
    let svg = scene_svg(&inst.vertices, &inst.groups, Some(&graph), &SceneStyle::default())?;
    Ok(Visualization {
        vertex_count: inst.vertices.len(),
        group_count: inst.groups.len(),
        edge_count: graph.edge_count(),
        edge_lengths: drawn_lengths(&graph, torus.side(), &inst.vertices),
        svg,
        vertices_csv: inst.vertices.to_csv(),
        groups_csv: inst.groups.to_csv(),
        edges_csv: graph.to_csv(),
    })
}
