//! The six benchmark experiments on random Euclidean graphs.
//!
//! Every experiment is a list of cells (one parameter combination each)
//! crossed with `instances` graphs. Instance `i` uses the same graph seed in
//! every cell of a run, so sweeps over cost or budget compare like with like.

use endoro_core::reformulate::Formulation;
use endoro_core::sp::{
    average_cost, compute_observables, expected_cost, generate_graph, solve_sp, solve_sp_stochastic,
    worst_case_cost, SpError, SpInstance, SpSolution,
};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Experiment, RunConfig};
use crate::RunError;

/// Largest objective difference tolerated between formulations.
pub const AGREEMENT_TOL: f64 = 1e-6;

pub const RNG_NAME: &str = "ChaCha8Rng";

/// Graph seed of instance `index`: the first output of ChaCha8 seeded with
/// `master` on stream `index`.
pub fn instance_seed(master: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index as u64);
    rng.next_u64()
}

fn monte_carlo_seed(instance_seed: u64) -> u64 {
    instance_seed ^ 0x9e37_79b9_7f4a_7c15
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub nodes: usize,
    pub gamma: f64,
    pub cost: f64,
    pub budget: f64,
}

impl Cell {
    pub fn instance(&self, seed: u64) -> Result<SpInstance, SpError> {
        Ok(SpInstance::uniform(generate_graph(self.nodes, seed)?, self.budget, self.gamma, self.cost))
    }
}

/// Solutions evaluated in experiment 6.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    /// Robust, reduction switched off.
    Ro,
    RoDdu,
    /// Expected cost, reduction switched off.
    So,
    SoDdu,
}

impl Model {
    pub const ALL: [Model; 4] = [Model::Ro, Model::RoDdu, Model::So, Model::SoDdu];

    pub fn name(self) -> &'static str {
        match self {
            Model::Ro => "ro",
            Model::RoDdu => "ro-ddu",
            Model::So => "so",
            Model::SoDdu => "so-ddu",
        }
    }
}

/// Horizontal axis of an experiment's plot data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Nodes,
    Cost,
    Budget,
}

impl Axis {
    pub fn of(self, cell: &Cell) -> f64 {
        match self {
            Axis::Nodes => cell.nodes as f64,
            Axis::Cost => cell.cost,
            Axis::Budget => cell.budget,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub experiment: u8,
    pub cells: Vec<Cell>,
    pub axis: Axis,
    pub formulations: Vec<Formulation>,
    pub seeds: Vec<u64>,
}

pub const SIZE_GRID: [usize; 7] = [20, 25, 30, 35, 40, 45, 50];
pub const COST_GRID: [f64; 11] = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];
pub const BUDGET_GRID: [f64; 12] = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 12.0, 16.0, 20.0];

impl Plan {
    pub fn new(config: &RunConfig) -> Result<Plan, RunError> {
        let Experiment::Bench(k) = config.experiment else {
            return Err(RunError::Config(format!("experiment {} is not a benchmark", config.experiment)));
        };
        let gamma = config.gamma;
        let cost = config.cost.unwrap_or(1.0);
        let budget = config.budget.unwrap_or(if k == 4 { 12.0 } else { 2.0 });
        let sizes: Vec<usize> = match config.nodes {
            Some(n) => vec![n],
            None if k == 1 => vec![50],
            None if k >= 4 => vec![30],
            None => SIZE_GRID.to_vec(),
        };
        let costs: Vec<f64> = match config.cost {
            Some(c) => vec![c],
            None => COST_GRID.to_vec(),
        };
        let budgets: Vec<f64> = match config.budget {
            Some(b) => vec![b],
            None => BUDGET_GRID.to_vec(),
        };
        let cell = |nodes, gamma, cost, budget| Cell { nodes, gamma, cost, budget };
        let (cells, axis) = match k {
            1 | 3 => (sizes.iter().map(|&n| cell(n, gamma, cost, budget)).collect(), Axis::Nodes),
            2 => {
                let mut cells = Vec::new();
                for g in [0.0, gamma] {
                    cells.extend(sizes.iter().map(|&n| cell(n, g, cost, budget)));
                }
                if gamma == 0.0 {
                    cells.truncate(sizes.len());
                }
                (cells, Axis::Nodes)
            }
            4 | 6 => (costs.iter().map(|&c| cell(sizes[0], gamma, c, budget)).collect(), Axis::Cost),
            5 => (budgets.iter().map(|&b| cell(sizes[0], gamma, cost, b)).collect(), Axis::Budget),
            _ => unreachable!("experiment numbers are validated on parsing"),
        };
        Ok(Plan {
            experiment: k,
            cells,
            axis,
            formulations: config.formulations(),
            seeds: (0..config.instances).map(|i| instance_seed(config.seed, i)).collect(),
        })
    }

    pub fn num_tasks(&self) -> usize {
        self.cells.len() * self.seeds.len()
    }
}

/// One line of the results table.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub cell: usize,
    pub instance_seed: u64,
    /// Formulation name, or `stochastic` for the expected-cost model.
    pub formulation: String,
    /// Set in experiment 6 only.
    pub model: Option<Model>,
    pub objective: f64,
    pub n_star: usize,
    pub n_tilde: usize,
    pub price: f64,
    pub benefit: f64,
    pub nodes_explored: usize,
    pub wall_time: f64,
}

/// Out-of-sample evaluation of one experiment-6 solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub cell: usize,
    pub instance_seed: u64,
    pub model: Model,
    pub worst_case: f64,
    /// Closed-form expectation.
    pub expected: f64,
    pub sampled_mean: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Results {
    pub rows: Vec<Row>,
    pub evaluations: Vec<Evaluation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskError {
    pub cell: usize,
    pub instance_seed: u64,
    pub message: String,
}

/// Runs every task of `plan`. Completed tasks are kept even when others
/// fail; the error of the first failing task in plan order is returned
/// alongside.
pub fn execute(plan: &Plan, samples: usize, node_limit: usize) -> (Results, Option<TaskError>) {
    let tasks: Vec<(usize, u64)> =
        (0..plan.cells.len()).flat_map(|c| plan.seeds.iter().map(move |&s| (c, s))).collect();
    let outcomes: Vec<Result<Results, TaskError>> = tasks
        .par_iter()
        .map(|&(cell, seed)| {
            run_task(plan, cell, seed, samples, node_limit).map_err(|message| TaskError {
                cell,
                instance_seed: seed,
                message,
            })
        })
        .collect();
    let mut all = Results::default();
    let mut first_error = None;
    for outcome in outcomes {
        match outcome {
            Ok(r) => {
                all.rows.extend(r.rows);
                all.evaluations.extend(r.evaluations);
            }
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    (all, first_error)
}

/// Reductions are worthless when no arc can be reduced; report none.
fn without_idle_reductions(mut sol: SpSolution, inst: &SpInstance) -> SpSolution {
    if inst.gamma.iter().all(|&g| g == 0.0) {
        sol.x.fill(0.0);
    }
    sol
}

fn solve(inst: &SpInstance, f: Formulation, node_limit: usize) -> Result<SpSolution, String> {
    solve_sp(inst, f, node_limit).map(|s| without_idle_reductions(s, inst)).map_err(|e| format!("{f}: {e}"))
}

fn solve_stochastic(inst: &SpInstance, node_limit: usize) -> Result<SpSolution, String> {
    solve_sp_stochastic(inst, node_limit)
        .map(|s| without_idle_reductions(s, inst))
        .map_err(|e| format!("stochastic: {e}"))
}

fn check_agreement(reference: &SpSolution, other: &SpSolution, f: Formulation, what: &str) -> Result<(), String> {
    let gap = (reference.objective - other.objective).abs();
    if gap > AGREEMENT_TOL {
        return Err(format!(
            "{what}: {f} objective {} differs from {} by {gap:e}",
            other.objective, reference.objective
        ));
    }
    Ok(())
}

fn run_task(plan: &Plan, cell: usize, seed: u64, samples: usize, node_limit: usize) -> Result<Results, String> {
    let c = &plan.cells[cell];
    let inst = c.instance(seed).map_err(|e| e.to_string())?;
    let first = plan.formulations[0];
    let nominal = solve(&inst.with_budget(0.0).with_gamma(0.0), first, node_limit)?;
    let mut out = Results::default();
    let row = |formulation: String, model, sol: &SpSolution, price, benefit| Row {
        cell,
        instance_seed: seed,
        formulation,
        model,
        objective: sol.objective,
        n_star: sol.n_star(),
        n_tilde: sol.n_tilde(),
        price,
        benefit,
        nodes_explored: sol.nodes_explored,
        wall_time: sol.wall_time,
    };

    if plan.experiment != 6 {
        let robust = solve(&inst.with_gamma(0.0), first, node_limit)?;
        let mut reference: Option<SpSolution> = None;
        for &f in &plan.formulations {
            let ddu = solve(&inst, f, node_limit)?;
            if let Some(r) = &reference {
                check_agreement(r, &ddu, f, "decision-dependent optimum")?;
            }
            let obs = compute_observables(&nominal, &robust, &ddu);
            out.rows.push(row(f.name().to_string(), None, &ddu, obs.price_of_robustness, obs.benefit_of_interaction));
            reference.get_or_insert(ddu);
        }
        return Ok(out);
    }

    let static_inst = inst.with_gamma(0.0);
    let mut robust: Option<(SpSolution, SpSolution)> = None;
    for &f in &plan.formulations {
        let ro = solve(&static_inst, f, node_limit)?;
        let ro_ddu = solve(&inst, f, node_limit)?;
        if let Some((r, rd)) = &robust {
            check_agreement(r, &ro, f, "static robust optimum")?;
            check_agreement(rd, &ro_ddu, f, "decision-dependent optimum")?;
        }
        let price = ro.objective - nominal.objective;
        out.rows.push(row(f.name().to_string(), Some(Model::Ro), &ro, price, 0.0));
        out.rows.push(row(f.name().to_string(), Some(Model::RoDdu), &ro_ddu, price, ro.objective - ro_ddu.objective));
        robust.get_or_insert((ro, ro_ddu));
    }
    let (ro, ro_ddu) = robust.expect("at least one formulation");
    let so = solve_stochastic(&static_inst, node_limit)?;
    let so_ddu = solve_stochastic(&inst, node_limit)?;
    let price = so.objective - nominal.objective;
    out.rows.push(row("stochastic".into(), Some(Model::So), &so, price, 0.0));
    out.rows.push(row("stochastic".into(), Some(Model::SoDdu), &so_ddu, price, so.objective - so_ddu.objective));

    for (model, sol) in Model::ALL.into_iter().zip([&ro, &ro_ddu, &so, &so_ddu]) {
        let err = |e: SpError| format!("evaluating {}: {e}", model.name());
        let mc = average_cost(&inst, &sol.x, &sol.y, samples, monte_carlo_seed(seed)).map_err(err)?;
        out.evaluations.push(Evaluation {
            cell,
            instance_seed: seed,
            model,
            worst_case: worst_case_cost(&inst, &sol.x, &sol.y).map_err(err)?,
            expected: expected_cost(&inst, &sol.x, &sol.y).map_err(err)?,
            sampled_mean: mc.mean,
            std_error: mc.std_error,
        });
    }
    Ok(out)
}
