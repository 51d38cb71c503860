use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fmt_num, sample_instance, Artifact, ExperimentConfig, ExperimentKind};
use crate::analytics::offspring_mean;
use crate::graph::{largest_component_fraction, project_onto_vertices};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub lambda_index: usize,
    pub mu_index: usize,
    pub replicate: usize,
    pub message: String,
}

/// Mean largest-component fraction of `G_V` per `(lambda, mu)` cell.
///
/// Row `i` is `lambda_values[i]`, column `j` is `mu_values[j]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub lambda_values: Vec<f64>,
    pub mu_values: Vec<f64>,
    pub mean: Vec<Vec<f64>>,
    /// Sample standard deviation over `sqrt(replicates)`; `NaN` (null) below two replicates.
    pub stderr: Vec<Vec<f64>>,
    /// Successful replicates per cell.
    pub replicates: Vec<Vec<usize>>,
    /// Whether `lambda mu ||g||^2 < 1` in the cell.
    pub subcritical: Vec<Vec<bool>>,
    pub failures: Vec<CellFailure>,
}

impl PhaseGrid {
    /// `phase.csv`: `lambda\mu` header row, one row per lambda.
    pub fn to_csv(&self) -> String {
        matrix_csv(&self.lambda_values, &self.mu_values, &self.mean)
    }

    pub fn stderr_csv(&self) -> String {
        matrix_csv(&self.lambda_values, &self.mu_values, &self.stderr)
    }

    pub fn artifacts(&self) -> Result<Vec<Artifact>> {
        Ok(vec![
            Artifact::new("phase.csv", self.to_csv()),
            Artifact::new("phase_stderr.csv", self.stderr_csv()),
            Artifact::json("phase.json", self)?,
        ])
    }
}

fn matrix_csv(rows: &[f64], cols: &[f64], values: &[Vec<f64>]) -> String {
    let mut out = String::from("lambda\\mu");
    for c in cols {
        let _ = write!(out, ",{}", fmt_num(*c));
    }
    out.push('\n');
    for (r, row) in rows.iter().zip(values) {
        out.push_str(&fmt_num(*r));
        for v in row {
            let _ = write!(out, ",{}", fmt_num(*v));
        }
        out.push('\n');
    }
    out
}

/// Independent graph builds for every `(cell, replicate)` task on the current pool.
pub fn run_phase_sweep(config: &ExperimentConfig) -> Result<PhaseGrid> {
    if config.kind != ExperimentKind::Phase {
        return Err(Error::config("run_phase_sweep needs a phase config"));
    }
    config.validate()?;
    let torus = config.resolved_torus()?;
    let spec = &config.kernel;
    let norm = spec.norm()?;
    let lambdas = config.lambda_grid();
    let mus = config.mu_grid();
    let reps = config.replicates;

    let tasks: Vec<(usize, usize, usize)> = (0..lambdas.len())
        .flat_map(|i| (0..mus.len()).flat_map(move |j| (0..reps).map(move |r| (i, j, r))))
        .collect();
    let results: Vec<Result<f64>> = tasks
        .par_iter()
        .map(|&(i, j, r)| {
            let inst = sample_instance(
                &torus,
                spec,
                lambdas[i],
                mus[j],
                &[],
                config.build,
                config.seed,
                &[i as u64, j as u64, r as u64],
            )?;
            largest_component_fraction(&project_onto_vertices(&inst.bipartite))
        })
        .collect();

    let (n, m) = (lambdas.len(), mus.len());
    let mut samples = vec![vec![Vec::with_capacity(reps); m]; n];
    let mut failures = Vec::new();
    for (&(i, j, r), res) in tasks.iter().zip(results) {
        match res {
            Ok(x) => samples[i][j].push(x),
            Err(e) => failures.push(CellFailure {
                lambda_index: i,
                mu_index: j,
                replicate: r,
                message: e.to_string(),
            }),
        }
    }

    let mut mean = vec![vec![f64::NAN; m]; n];
    let mut stderr = vec![vec![f64::NAN; m]; n];
    let mut replicates = vec![vec![0; m]; n];
    let mut subcritical = vec![vec![false; m]; n];
    for i in 0..n {
        for j in 0..m {
            let xs = &samples[i][j];
            replicates[i][j] = xs.len();
            subcritical[i][j] = offspring_mean(lambdas[i], mus[j], norm)?.subcritical;
            if xs.is_empty() {
                continue;
            }
            let k = xs.len() as f64;
            let mu_hat = xs.iter().sum::<f64>() / k;
            mean[i][j] = mu_hat;
            if xs.len() >= 2 {
                let var = xs.iter().map(|x| (x - mu_hat).powi(2)).sum::<f64>() / (k - 1.0);
                stderr[i][j] = (var / k).sqrt();
            }
        }
    }
    Ok(PhaseGrid {
        lambda_values: lambdas,
        mu_values: mus,
        mean,
        stderr,
        replicates,
        subcritical,
        failures,
    })
}
