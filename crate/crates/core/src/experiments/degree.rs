use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{sample_instance, Artifact, ExperimentConfig, ExperimentKind};
use crate::analytics::{self, DegreeBounds, OffspringMean};
use crate::graph::{degree_histogram, project_onto_vertices, BuildMode, DegreeHistogram};
use crate::stats::mean_stderr;
use crate::{Error, Result};

/// Pooled degree distribution of `G_V` and its theoretical counterparts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeReport {
    pub lambda: f64,
    pub mu: f64,
    pub norm_g: f64,
    pub replicates: usize,
    /// Build mode of each replicate after `Auto` resolution.
    pub build_modes: Vec<BuildMode>,
    pub vertex_count: u64,
    pub histogram: DegreeHistogram,
    /// Total degree over total vertex count.
    pub empirical_mean: f64,
    /// Mean degree of each replicate with at least one vertex.
    pub replicate_means: Vec<f64>,
    /// Standard error of the replicate means; absent with fewer than two.
    pub stderr: Option<f64>,
    pub theoretical_mean: Option<f64>,
    /// Set when the theoretical mean could not be computed.
    pub theoretical_error: Option<String>,
    pub bounds: Option<DegreeBounds>,
    pub isolated_fraction: f64,
    /// `exp(-mu ||g||)`, a lower bound on the isolated fraction.
    pub isolated_bound: f64,
    pub offspring: OffspringMean,
}

impl DegreeReport {
    pub fn artifacts(&self) -> Result<Vec<Artifact>> {
        Ok(vec![
            Artifact::new("histogram.csv", self.histogram.to_csv()),
            Artifact::json("report.json", self)?,
        ])
    }
}

/// Degree histogram of `G_V` pooled over replicates, with the expected degree
/// computed by quadrature.
pub fn run_degree_experiment(config: &ExperimentConfig) -> Result<DegreeReport> {
    if config.kind != ExperimentKind::Degree {
        return Err(Error::config("run_degree_experiment needs a degree config"));
    }
    config.validate()?;
    let torus = config.resolved_torus()?;
    let spec = &config.kernel;
    let (lambda, mu) = (config.lambda.unwrap(), config.mu.unwrap());
    let norm_g = spec.norm()?;

    let per_replicate: Vec<(DegreeHistogram, BuildMode)> = (0..config.replicates)
        .into_par_iter()
        .map(|r| {
            let inst = sample_instance(&torus, spec, lambda, mu, &[], config.build, config.seed, &[r as u64])?;
            let graph = project_onto_vertices(&inst.bipartite);
            Ok((degree_histogram(&graph), inst.bipartite.build_options().mode))
        })
        .collect::<Result<_>>()?;

    let mut histogram = DegreeHistogram::default();
    let mut replicate_means = Vec::new();
    let mut build_modes = Vec::new();
    for (h, mode) in &per_replicate {
        histogram.merge(h);
        if h.total() > 0 {
            replicate_means.push(h.mean());
        }
        build_modes.push(*mode);
    }
    let vertex_count = histogram.total();
    let (empirical_mean, isolated_fraction) = if vertex_count > 0 {
        (histogram.mean(), histogram.fraction(0))
    } else {
        (f64::NAN, f64::NAN)
    };
    let stderr = mean_stderr(&replicate_means).ok().map(|m| m.stderr);

    let (theoretical_mean, bounds, theoretical_error) = match analytics::profile_for(spec).and_then(|p| {
        let e = analytics::expected_degree(&p, lambda, mu, 1e-9)?;
        Ok((e, analytics::degree_bounds(&p, lambda, mu)?))
    }) {
        Ok((e, b)) => (Some(e), Some(b), None),
        Err(e) => (None, None, Some(e.to_string())),
    };

    Ok(DegreeReport {
        lambda,
        mu,
        norm_g,
        replicates: config.replicates,
        build_modes,
        vertex_count,
        histogram,
        empirical_mean,
        replicate_means,
        stderr,
        theoretical_mean,
        theoretical_error,
        bounds,
        isolated_fraction,
        isolated_bound: analytics::isolated_probability_bound(mu, norm_g)?,
        offspring: analytics::offspring_mean(lambda, mu, norm_g)?,
    })
}
