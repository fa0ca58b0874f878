//! Experiment runner for decision-dependent robust shortest paths.
//!
//! A [`RunConfig`] selects one of the six benchmark experiments, the
//! seven-node example table (`figure1`) or a single problem file
//! (`single`). Benchmarks write `exp<k>.csv` plus one `.dat` file per plot
//! series into the output directory.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use endoro_core::RobustLinearProblem;
use serde_json::json;
use thiserror::Error;

pub mod config;
pub mod experiments;
pub mod output;
pub mod report;
pub mod stats;

pub use config::{Experiment, FormulationChoice, RunConfig};
use experiments::{execute, Plan};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solve failure: {message}")]
    Solve {
        cell: Option<String>,
        instance_seed: Option<u64>,
        message: String,
    },
    #[error("output error: {0}")]
    Io(String),
}

impl RunError {
    pub fn solve(message: String) -> RunError {
        RunError::Solve { cell: None, instance_seed: None, message }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Solve { .. } | RunError::Io(_) => 3,
        }
    }

    /// One-line JSON description for stderr.
    pub fn record(&self) -> String {
        let value = match self {
            RunError::Config(m) => json!({"error": "config", "message": m}),
            RunError::Solve { cell, instance_seed, message } => json!({
                "error": "solve",
                "cell": cell,
                "instance_seed": instance_seed,
                "message": message,
            }),
            RunError::Io(m) => json!({"error": "io", "message": m}),
        };
        value.to_string()
    }
}

/// What a benchmark run produced.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub rows: usize,
}

/// Executes `config`, printing reports and progress to `out`.
///
/// A failed solve still writes every completed row before the error is
/// returned.
pub fn run(config: &RunConfig, out: &mut dyn Write) -> Result<RunSummary, RunError> {
    config.validate()?;
    let pool = match config.threads {
        Some(n) => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| RunError::Config(format!("threads: {e}")))?,
        ),
        None => None,
    };
    run_inner(config, pool.as_ref(), out)
}

fn print(out: &mut dyn Write, text: &str) -> Result<(), RunError> {
    out.write_all(text.as_bytes()).map_err(|e| RunError::Io(format!("stdout: {e}")))
}

fn run_inner(config: &RunConfig, pool: Option<&rayon::ThreadPool>, out: &mut dyn Write) -> Result<RunSummary, RunError> {
    let formulations = config.formulations();
    match config.experiment {
        Experiment::Figure1 => {
            print(out, &report::figure1(&formulations)?)?;
            Ok(RunSummary::default())
        }
        Experiment::Single => {
            let path = config.problem.as_ref().expect("validated");
            let text = fs::read_to_string(path)
                .map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
            let problem = RobustLinearProblem::from_json(&text)
                .map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
            print(out, &report::single(&problem, &formulations, config.node_limit)?)?;
            Ok(RunSummary::default())
        }
        Experiment::Bench(_) => {
            config.prepare_out_dir()?;
            let plan = Plan::new(config)?;
            let work = || execute(&plan, config.samples, config.node_limit);
            let (results, error) = match pool {
                Some(p) => p.install(work),
                None => work(),
            };
            let files = output::write_results(config, &plan, &results)?;
            for f in &files {
                print(out, &format!("wrote {}\n", f.display()))?;
            }
            if let Some(e) = error {
                let cell = serde_json::to_string(&plan.cells[e.cell]).ok();
                return Err(RunError::Solve { cell, instance_seed: Some(e.instance_seed), message: e.message });
            }
            Ok(RunSummary { files, rows: results.rows.len() })
        }
    }
}
