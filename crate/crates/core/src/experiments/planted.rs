//! Planted-pair experiments: two vertices at the origin and at `(t, 0, ...)`
//! inserted into an independently sampled background.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{sample_instance, ExperimentConfig, ExperimentKind};
use crate::analytics::{connection_probability, profile_for};
use crate::graph::{project_onto_vertices, DegreeHistogram};
use crate::stats::{
    count_moments, poisson_dispersion_test, poisson_mean_test, poisson_variance_test, wilson_interval, Outcome,
    TestVerdict,
};
use crate::{Error, Result};

fn planted_pair(d: usize, t: f64) -> Vec<Vec<f64>> {
    let mut far = vec![0.0; d];
    far[0] = t;
    vec![vec![0.0; d], far]
}

/// `N_{0,v}` for every replicate at every probe.
fn shared_counts(config: &ExperimentConfig, probes: &[f64]) -> Result<Vec<Vec<u64>>> {
    let torus = config.resolved_torus()?;
    let mu = config.mu.unwrap();
    let lambda = config.background_lambda();
    let tasks: Vec<(usize, usize)> = (0..probes.len())
        .flat_map(|p| (0..config.replicates).map(move |r| (p, r)))
        .collect();
    let counts: Vec<u64> = tasks
        .par_iter()
        .map(|&(p, r)| {
            let inst = sample_instance(
                &torus,
                &config.kernel,
                lambda,
                mu,
                &planted_pair(torus.dim(), probes[p]),
                config.build,
                config.seed,
                &[p as u64, r as u64],
            )?;
            Ok(project_onto_vertices(&inst.bipartite).shared_count(0, 1) as u64)
        })
        .collect::<Result<_>>()?;
    Ok(counts.chunks(config.replicates).map(<[u64]>::to_vec).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointProbe {
    pub t: f64,
    /// `mu f(t)`.
    pub expected: f64,
    pub mean: f64,
    pub variance: f64,
    /// `histogram.counts[k]` replicates had `k` shared groups.
    pub histogram: DegreeHistogram,
    pub verdicts: Vec<TestVerdict>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointGroupsReport {
    pub mu: f64,
    pub replicates: usize,
    pub alpha: f64,
    pub probes: Vec<JointProbe>,
    /// No verdict failed; inconclusive verdicts do not count against.
    pub passed: bool,
}

/// The number of groups shared by the planted pair against `Poisson(mu f(t))`.
pub fn run_joint_groups_check(config: &ExperimentConfig) -> Result<JointGroupsReport> {
    if config.kind != ExperimentKind::JointGroups {
        return Err(Error::config("run_joint_groups_check needs a joint_groups config"));
    }
    config.validate()?;
    let probes = config.probes.clone().unwrap();
    let mu = config.mu.unwrap();
    let profile = profile_for(&config.kernel)?;
    let counts = shared_counts(config, &probes)?;

    let mut report_probes = Vec::new();
    for (&t, xs) in probes.iter().zip(&counts) {
        let expected = mu * profile.eval(t)?;
        let (mean, variance) = count_moments(xs);
        let mut verdicts = vec![
            poisson_mean_test("mean_3sigma", xs, expected, 3.0),
            poisson_variance_test("variance_3sigma", xs, expected, 3.0),
        ];
        if xs.len() >= 30 {
            verdicts.push(poisson_dispersion_test(xs, config.alpha)?);
        }
        report_probes.push(JointProbe {
            t,
            expected,
            mean,
            variance,
            histogram: DegreeHistogram::from_degrees(xs.iter().map(|&x| x as usize)),
            verdicts,
        });
    }
    let passed = report_probes
        .iter()
        .flat_map(|p| &p.verdicts)
        .all(|v| v.outcome != Outcome::Fail);
    Ok(JointGroupsReport {
        mu,
        replicates: config.replicates,
        alpha: config.alpha,
        probes: report_probes,
        passed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectionProbe {
    pub t: f64,
    /// `f(t)`.
    pub f: f64,
    /// `1 - exp(-mu f(t))`.
    pub probability: f64,
    pub successes: u64,
    pub trials: u64,
    pub frequency: f64,
    pub wilson: (f64, f64),
    /// Theoretical probability inside the Wilson interval, or, where
    /// `f(t) = 0`, no edge in any replicate.
    pub verdict: TestVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectionReport {
    pub mu: f64,
    pub replicates: usize,
    pub confidence: f64,
    pub probes: Vec<ConnectionProbe>,
    /// Fraction of probes whose verdict passed.
    pub coverage: f64,
    /// Coverage of at least 95% and every zero-probability probe exact.
    pub passed: bool,
}

/// Empirical edge frequency of the planted pair against `1 - exp(-mu f(t))`.
pub fn run_connection_check(config: &ExperimentConfig) -> Result<ConnectionReport> {
    if config.kind != ExperimentKind::ConnectionCheck {
        return Err(Error::config("run_connection_check needs a connection_check config"));
    }
    config.validate()?;
    let probes = config.probes.clone().unwrap();
    let mu = config.mu.unwrap();
    let profile = profile_for(&config.kernel)?;
    let counts = shared_counts(config, &probes)?;

    let mut report_probes = Vec::new();
    for (&t, xs) in probes.iter().zip(&counts) {
        let f = profile.eval(t)?;
        let probability = connection_probability(&profile, mu, t)?;
        let trials = xs.len() as u64;
        let successes = xs.iter().filter(|&&n| n > 0).count() as u64;
        let frequency = successes as f64 / trials as f64;
        let wilson = wilson_interval(successes, trials, config.confidence)?;
        let verdict = if f == 0.0 {
            TestVerdict::within("zero_frequency", frequency, 0.0, 0.0, xs.len())
        } else {
            TestVerdict::within("wilson_covers_theory", probability, wilson.0, wilson.1, xs.len())
        };
        report_probes.push(ConnectionProbe {
            t,
            f,
            probability,
            successes,
            trials,
            frequency,
            wilson,
            verdict,
        });
    }
    let passing = report_probes.iter().filter(|p| p.verdict.passed()).count();
    let coverage = passing as f64 / report_probes.len() as f64;
    let zeros_exact = report_probes
        .iter()
        .filter(|p| p.f == 0.0)
        .all(|p| p.verdict.passed());
    Ok(ConnectionReport {
        mu,
        replicates: config.replicates,
        confidence: config.confidence,
        probes: report_probes,
        coverage,
        passed: coverage >= 0.95 && zeros_exact,
    })
}
