//! `geoig`: run experiments from JSON configs and write their outputs.
//!
//! Exit status is 0 on success, 2 for an unusable invocation or config and
//! 1 when a run fails after starting.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use geoig::analytics::{self, AnalyticsParams, Quantity};
use geoig::experiments::{self, Artifact, ExperimentConfig, ExperimentKind, Outcome};
use geoig::graph::project_onto_vertices;
use geoig::Error;

const DEFAULT_OUT: &str = "geoig-out";

#[derive(Parser, Debug)]
#[command(name = "geoig", version, about = "Geometric random intersection graphs on the torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample one instance and write points, memberships and edges.
    Sample(Common),
    /// Pooled degree histogram against the expected degree.
    Degrees(Common),
    /// Largest-component fraction over a (lambda, mu) grid.
    Phase(Common),
    /// Joint-groups or connection-probability validation report.
    Validate(Common),
    /// SVG scene with the underlying CSVs.
    Visualize(Common),
    /// One analytic quantity as a JSON record.
    Analytics {
        #[command(flatten)]
        common: Common,
        /// expected-degree, degree-bounds, offspring-mean, isolated-bound,
        /// connection-probability or kernel-norm.
        #[arg(long)]
        quantity: String,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        mu: Option<f64>,
        /// Probe distance for connection-probability.
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// JSON experiment config.
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicates: Option<usize>,
    /// Output directory; falls back to $GEOIG_OUTPUT_DIR, the config, then ./geoig-out.
    #[arg(long, env = "GEOIG_OUTPUT_DIR")]
    out: Option<PathBuf>,
    /// Worker threads; defaults to all cores. Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Serialize)]
struct FileEntry {
    name: String,
    bytes: usize,
    fnv1a64: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    status: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    seed: u64,
    config: &'a ExperimentConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    extra: Option<Value>,
    files: Vec<FileEntry>,
}

fn fnv1a64(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

/// Failure classes mapped to exit codes.
enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Json(_) | Error::DivergentNorm(_) | Error::DegenerateNorm(_) => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn load_config(common: &Common) -> Result<ExperimentConfig, Failure> {
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", common.config.display())))?;
    let mut config: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("{}: {e}", common.config.display())))?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(r) = common.replicates {
        config.replicates = r;
    }
    if let Some(out) = &common.out {
        config.output_dir = Some(out.clone());
    }
    config
        .validate()
        .map_err(|e| Failure::Usage(format!("{}: {e}", common.config.display())))?;
    if common.threads == Some(0) {
        return Err(Failure::Usage("--threads must be at least 1".into()));
    }
    Ok(config)
}

fn output_dir(config: &ExperimentConfig) -> PathBuf {
    config.output_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn expect_kind(config: &ExperimentConfig, command: &str, allowed: &[ExperimentKind]) -> Result<(), Failure> {
    if allowed.contains(&config.kind) {
        Ok(())
    } else {
        Err(Failure::Usage(format!(
            "`{command}` cannot run a {:?} config (expected one of {allowed:?})",
            config.kind
        )))
    }
}

fn write_manifest(
    dir: &Path,
    command: &str,
    config: &ExperimentConfig,
    artifacts: &[Artifact],
    error: Option<String>,
    extra: Option<Value>,
) -> Result<(), Failure> {
    let manifest = Manifest {
        tool: "geoig",
        version: env!("CARGO_PKG_VERSION"),
        command,
        status: if error.is_some() { "failed" } else { "ok" },
        error,
        seed: config.seed,
        config,
        extra,
        files: artifacts
            .iter()
            .map(|a| FileEntry {
                name: a.name.clone(),
                bytes: a.contents.len(),
                fnv1a64: fnv1a64(a.contents.as_bytes()),
            })
            .collect(),
    };
    let file = Artifact::json("manifest.json", &manifest).map_err(Failure::from)?;
    experiments::write_artifacts(dir, &[file]).map_err(Failure::from)
}

/// Sample one instance with the config's lambda and mu.
fn sample_artifacts(config: &ExperimentConfig) -> geoig::Result<Vec<Artifact>> {
    use geoig::geometry::{sample_poisson, Role};
    use geoig::graph::{build_bipartite, BuildOptions};
    use geoig::seeds::{derive_seed, tag};

    let (lambda, mu) = match (config.lambda, config.mu) {
        (Some(l), Some(m)) => (l, m),
        _ => return Err(Error::Config("`sample` needs \"lambda\" and \"mu\" in the config".into())),
    };
    let torus = config.resolved_torus()?;
    let v = sample_poisson(&torus, Role::Vertex, lambda, derive_seed(config.seed, &[0, tag::VERTICES]))?;
    let u = sample_poisson(&torus, Role::Group, mu, derive_seed(config.seed, &[0, tag::GROUPS]))?;
    let options = BuildOptions::new(config.build, derive_seed(config.seed, &[0, tag::MEMBERSHIP]));
    let bi = build_bipartite(&v, &u, &config.kernel, &torus, options)?;
    let mut memberships = String::from("vertex,group\n");
    for (i, list) in bi.all_memberships().iter().enumerate() {
        for g in list {
            memberships.push_str(&format!("{i},{g}\n"));
        }
    }
    Ok(vec![
        Artifact::new("vertices.csv", v.to_csv()),
        Artifact::new("groups.csv", u.to_csv()),
        Artifact::new("memberships.csv", memberships),
        Artifact::new("edges.csv", project_onto_vertices(&bi).to_csv()),
    ])
}

fn execute(command: Command) -> Result<(), Failure> {
    let (name, common) = match &command {
        Command::Sample(c) => ("sample", c),
        Command::Degrees(c) => ("degrees", c),
        Command::Phase(c) => ("phase", c),
        Command::Validate(c) => ("validate", c),
        Command::Visualize(c) => ("visualize", c),
        Command::Analytics { common, .. } => ("analytics", common),
    };
    let config = load_config(common)?;
    let dir = output_dir(&config);

    let result: Result<(Vec<Artifact>, Option<Value>), Failure> = match &command {
        Command::Sample(_) => sample_artifacts(&config).map(|a| (a, None)).map_err(Failure::from),
        Command::Analytics {
            quantity,
            lambda,
            mu,
            t,
            tol,
            ..
        } => {
            let quantity = Quantity::parse(quantity).map_err(Failure::from)?;
            let params = AnalyticsParams {
                lambda: lambda.or(config.lambda).unwrap_or(0.0),
                mu: mu.or(config.mu).unwrap_or(0.0),
                t: *t,
                tol: *tol,
            };
            analytics::evaluate(quantity, &config.kernel, &params)
                .map_err(Failure::from)
                .and_then(|record| {
                    println!("{}", serde_json::to_string(&record).map_err(|e| Failure::Runtime(e.to_string()))?);
                    let file = Artifact::json("analytics.json", &record).map_err(Failure::from)?;
                    Ok((vec![file], None))
                })
        }
        _ => {
            let allowed: &[ExperimentKind] = match &command {
                Command::Degrees(_) => &[ExperimentKind::Degree],
                Command::Phase(_) => &[ExperimentKind::Phase],
                Command::Validate(_) => &[ExperimentKind::JointGroups, ExperimentKind::ConnectionCheck],
                _ => &[ExperimentKind::Visualize],
            };
            expect_kind(&config, name, allowed)?;
            experiments::run(&config, common.threads)
                .and_then(|outcome| {
                    let extra = match &outcome {
                        Outcome::JointGroups(_) | Outcome::Connection(_) => Some(json!({"passed": outcome.passed()})),
                        _ => None,
                    };
                    if matches!(outcome, Outcome::JointGroups(_) | Outcome::Connection(_)) {
                        println!("{}", if outcome.passed() { "PASS" } else { "FAIL" });
                    }
                    Ok((outcome.artifacts()?, extra))
                })
                .map_err(Failure::from)
        }
    };

    let result = result.and_then(|(artifacts, extra)| {
        experiments::write_artifacts(&dir, &artifacts).map_err(Failure::from)?;
        Ok((artifacts, extra))
    });
    match result {
        Ok((artifacts, extra)) => write_manifest(&dir, name, &config, &artifacts, None, extra),
        Err(Failure::Runtime(msg)) => {
            // Best effort: the manifest records the failure.
            let _ = write_manifest(&dir, name, &config, &[], Some(msg.clone()), None);
            Err(Failure::Runtime(msg))
        }
        Err(usage) => Err(usage),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("{}", json!({"error": "config", "message": msg}));
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("{}", json!({"error": "runtime", "message": msg}));
            ExitCode::from(1)
        }
    }
}
