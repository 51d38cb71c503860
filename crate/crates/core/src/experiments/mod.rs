//! Reproducible experiment runners.
//!
//! Every random draw comes from a stream seeded by
//! `derive_seed(config.seed, path)`, where `path` names the task:
//!
//! | experiment | path |
//! |---|---|
//! | degree | `[replicate, tag]` |
//! | phase | `[lambda index, mu index, replicate, tag]` |
//! | joint groups, connection | `[probe index, replicate, tag]` |
//! | visualize | `[0, tag]` |
//!
//! with `tag` one of [`seeds::tag`]. Tasks run on a rayon pool and are
//! collected in task order, so outputs do not depend on the thread count.

mod config;
mod degree;
mod phase;
mod planted;
mod visualize;

use std::path::Path;

use serde::Serialize;

pub use config::{default_phase_values, ExperimentConfig, ExperimentKind};
pub use degree::{run_degree_experiment, DegreeReport};
pub use phase::{run_phase_sweep, CellFailure, PhaseGrid};
pub use planted::{
    run_connection_check, run_joint_groups_check, ConnectionProbe, ConnectionReport, JointGroupsReport, JointProbe,
};
pub use visualize::{export_visualization, Visualization};

use crate::geometry::{sample_poisson, PointCloud, Role, Torus};
use crate::graph::{build_bipartite, BipartiteGraph, BuildOptions};
use crate::kernels::KernelSpec;
use crate::seeds::{self, derive_seed};
use crate::{Error, Result};

/// A named output file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    pub fn new(name: impl Into<String>, contents: impl Into<String>) -> Self {
        Artifact {
            name: name.into(),
            contents: contents.into(),
        }
    }

    pub fn json<T: Serialize>(name: impl Into<String>, value: &T) -> Result<Self> {
        let mut contents = serde_json::to_string_pretty(value)?;
        contents.push('\n');
        Ok(Artifact::new(name, contents))
    }
}

/// Write artifacts into `dir`, creating it if needed.
pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for a in artifacts {
        let path = dir.join(&a.name);
        std::fs::write(&path, &a.contents).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

/// Result of any experiment.
#[derive(Clone, Debug)]
pub enum Outcome {
    Degree(DegreeReport),
    Phase(PhaseGrid),
    JointGroups(JointGroupsReport),
    Connection(ConnectionReport),
    Visualize(Visualization),
}

impl Outcome {
    pub fn artifacts(&self) -> Result<Vec<Artifact>> {
        match self {
            Outcome::Degree(r) => r.artifacts(),
            Outcome::Phase(g) => g.artifacts(),
            Outcome::JointGroups(r) => Ok(vec![Artifact::json("report.json", r)?]),
            Outcome::Connection(r) => Ok(vec![Artifact::json("report.json", r)?]),
            Outcome::Visualize(v) => Ok(v.artifacts()),
        }
    }

    /// False when a validation report contains a failed verdict.
    pub fn passed(&self) -> bool {
        match self {
            Outcome::JointGroups(r) => r.passed,
            Outcome::Connection(r) => r.passed,
            _ => true,
        }
    }
}

/// Run `config` on a pool of `threads` workers (all cores when `None`).
pub fn run(config: &ExperimentConfig, threads: Option<usize>) -> Result<Outcome> {
    config.validate()?;
    in_pool(threads, || match config.kind {
        ExperimentKind::Degree => run_degree_experiment(config).map(Outcome::Degree),
        ExperimentKind::Phase => run_phase_sweep(config).map(Outcome::Phase),
        ExperimentKind::JointGroups => run_joint_groups_check(config).map(Outcome::JointGroups),
        ExperimentKind::ConnectionCheck => run_connection_check(config).map(Outcome::Connection),
        ExperimentKind::Visualize => export_visualization(config).map(Outcome::Visualize),
    })?
}

/// Run `f` inside a dedicated rayon pool.
pub fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::config("thread count must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// One sampled instance: clouds, membership graph.
pub(crate) struct Instance {
    pub vertices: PointCloud,
    pub groups: PointCloud,
    pub bipartite: BipartiteGraph,
}

/// Sample `V`, `U` and `G_bi` with seeds under `path`; `planted` vertices are prepended.
#[allow(clippy::too_many_arguments)]
pub(crate) fn sample_instance(
    torus: &Torus,
    spec: &KernelSpec,
    lambda: f64,
    mu: f64,
    planted: &[Vec<f64>],
    build: crate::graph::BuildMode,
    base: u64,
    path: &[u64],
) -> Result<Instance> {
    let seed = |tag: u64| {
        let mut p = path.to_vec();
        p.push(tag);
        derive_seed(base, &p)
    };
    let mut vertices = sample_poisson(torus, Role::Vertex, lambda, seed(seeds::tag::VERTICES))?;
    if !planted.is_empty() {
        vertices = vertices.with_planted(planted)?;
    }
    let groups = sample_poisson(torus, Role::Group, mu, seed(seeds::tag::GROUPS))?;
    let bipartite = build_bipartite(
        &vertices,
        &groups,
        spec,
        torus,
        BuildOptions::new(build, seed(seeds::tag::MEMBERSHIP)),
    )?;
    Ok(Instance {
        vertices,
        groups,
        bipartite,
    })
}

/// Shortest round-trip decimal form, used for every number written to CSV.
pub(crate) fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x}")
    }
}
