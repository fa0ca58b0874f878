use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use endoro_cli::{run, Experiment, FormulationChoice, RunConfig, RunError};

/// Robust shortest paths with decision-dependent uncertainty: benchmark
/// experiments, the seven-node example and single problem files.
///
/// Settings come from built-in defaults, then `--config`, then flags.
#[derive(Debug, Parser)]
#[command(name = "endoro", version)]
struct Args {
    /// JSON file with any of the settings below (kebab-case keys).
    #[arg(long)]
    config: Option<PathBuf>,
    /// 1-6, figure1 or single.
    #[arg(long)]
    experiment: Option<Experiment>,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    cost: Option<f64>,
    #[arg(long)]
    budget: Option<f64>,
    /// pibar, bigm, modbigm or all.
    #[arg(long)]
    formulation: Option<FormulationChoice>,
    /// Monte Carlo samples per solution (experiment 6).
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    node_limit: Option<usize>,
    /// Problem JSON for `--experiment single`.
    #[arg(long)]
    problem: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// Leave wall_time_s empty so reruns give byte-identical tables.
    #[arg(long)]
    omit_timing: bool,
}

impl Args {
    fn into_config(self) -> Result<RunConfig, RunError> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.experiment {
            c.experiment = v;
        }
        if self.nodes.is_some() {
            c.nodes = self.nodes;
        }
        if let Some(v) = self.instances {
            c.instances = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.gamma {
            c.gamma = v;
        }
        if self.cost.is_some() {
            c.cost = self.cost;
        }
        if self.budget.is_some() {
            c.budget = self.budget;
        }
        if self.formulation.is_some() {
            c.formulation = self.formulation;
        }
        if let Some(v) = self.samples {
            c.samples = v;
        }
        if let Some(v) = self.out_dir {
            c.out_dir = v;
        }
        if let Some(v) = self.node_limit {
            c.node_limit = v;
        }
        if self.problem.is_some() {
            c.problem = self.problem;
        }
        if self.threads.is_some() {
            c.threads = self.threads;
        }
        c.omit_timing |= self.omit_timing;
        Ok(c)
    }
}

fn main() -> ExitCode {
    let outcome = Args::parse().into_config().and_then(|config| run(&config, &mut std::io::stdout().lock()));
    match outcome {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
