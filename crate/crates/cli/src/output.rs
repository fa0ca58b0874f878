//! CSV tables and gnuplot data files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::config::RunConfig;
use crate::experiments::{Cell, Evaluation, Model, Plan, Results, Row, RNG_NAME};
use crate::stats::{summarize, Summary};
use crate::RunError;

pub const CSV_HEADER: [&str; 11] = [
    "experiment",
    "cell_params",
    "instance_seed",
    "formulation",
    "objective",
    "n_star",
    "n_tilde",
    "price",
    "benefit",
    "nodes_explored",
    "wall_time_s",
];

pub const EVAL_HEADER: [&str; 7] =
    ["cell_params", "instance_seed", "model", "worst_case", "expected", "sampled_mean", "std_error"];

#[derive(Serialize)]
struct CellParams<'a> {
    #[serde(flatten)]
    cell: &'a Cell,
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<Model>,
}

fn cell_params(cell: &Cell, model: Option<Model>) -> String {
    serde_json::to_string(&CellParams { cell, model }).expect("cell parameters serialize")
}

/// The single comment line above each CSV header. It is the only part of a
/// file that changes between identical runs.
pub fn metadata_line(config: &RunConfig) -> String {
    let created = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    format!(
        "# endoro {} experiment={} rng={RNG_NAME} seed={} instances={} created_unix={created}",
        env!("CARGO_PKG_VERSION"),
        config.experiment,
        config.seed,
        config.instances
    )
}

fn io_error(path: &Path) -> impl Fn(std::io::Error) -> RunError + '_ {
    move |e| RunError::Io(format!("{}: {e}", path.display()))
}

fn csv_error(path: &Path) -> impl Fn(csv::Error) -> RunError + '_ {
    move |e| RunError::Io(format!("{}: {e}", path.display()))
}

fn write_table(path: &Path, meta: &str, header: &[&str], records: &[Vec<String>]) -> Result<(), RunError> {
    let mut file = BufWriter::new(File::create(path).map_err(io_error(path))?);
    writeln!(file, "{meta}").map_err(io_error(path))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header).map_err(csv_error(path))?;
    for r in records {
        w.write_record(r).map_err(csv_error(path))?;
    }
    w.flush().map_err(io_error(path))?;
    Ok(())
}

pub fn row_record(plan: &Plan, row: &Row, omit_timing: bool) -> Vec<String> {
    vec![
        plan.experiment.to_string(),
        cell_params(&plan.cells[row.cell], row.model),
        row.instance_seed.to_string(),
        row.formulation.clone(),
        row.objective.to_string(),
        row.n_star.to_string(),
        row.n_tilde.to_string(),
        row.price.to_string(),
        row.benefit.to_string(),
        row.nodes_explored.to_string(),
        if omit_timing { String::new() } else { row.wall_time.to_string() },
    ]
}

fn eval_record(plan: &Plan, e: &Evaluation) -> Vec<String> {
    vec![
        cell_params(&plan.cells[e.cell], None),
        e.instance_seed.to_string(),
        e.model.name().to_string(),
        e.worst_case.to_string(),
        e.expected.to_string(),
        e.sampled_mean.to_string(),
        e.std_error.to_string(),
    ]
}

/// Median and quartiles of one metric against the experiment's axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, Summary)>,
}

fn collect_series<T>(
    name: String,
    plan: &Plan,
    items: &[T],
    cell_of: impl Fn(&T) -> usize,
    keep: impl Fn(&T) -> bool,
    value: impl Fn(&T) -> f64,
) -> Series {
    let mut points = Vec::new();
    for (c, cell) in plan.cells.iter().enumerate() {
        let values: Vec<f64> = items.iter().filter(|t| cell_of(t) == c && keep(t)).map(&value).collect();
        if let Some(s) = summarize(&values) {
            points.push((plan.axis.of(cell), s));
        }
    }
    Series { name, points }
}

type Metric = (&'static str, fn(&Row) -> f64);

const OBJECTIVE: Metric = ("objective", |r| r.objective);
const PRICE: Metric = ("price", |r| r.price);
const BENEFIT: Metric = ("benefit", |r| r.benefit);
const N_STAR: Metric = ("n_star", |r| r.n_star as f64);
const N_TILDE: Metric = ("n_tilde", |r| r.n_tilde as f64);

/// Plot series of an experiment. Apart from timings, only rows of the first
/// formulation enter, since the formulations agree on everything else.
pub fn plot_series(plan: &Plan, results: &Results) -> Vec<Series> {
    let k = plan.experiment;
    let first = plan.formulations[0].name();
    let rows = &results.rows;
    let mut out = Vec::new();
    let metric_series = |out: &mut Vec<Series>, metrics: &[Metric], suffix: &str, keep: &dyn Fn(&Row) -> bool| {
        for &(name, value) in metrics {
            out.push(collect_series(
                format!("exp{k}_{name}{suffix}"),
                plan,
                rows,
                |r| r.cell,
                |r| r.formulation == first && keep(r),
                value,
            ));
        }
    };
    match k {
        1 => {
            for f in &plan.formulations {
                let name = f.name();
                out.push(collect_series(
                    format!("exp1_wall_time_{name}"),
                    plan,
                    rows,
                    |r| r.cell,
                    |r| r.formulation == name,
                    |r| r.wall_time,
                ));
            }
        }
        2 => {
            let mut gammas: Vec<f64> = plan.cells.iter().map(|c| c.gamma).collect();
            gammas.dedup();
            for g in gammas {
                let keep = move |r: &Row| plan.cells[r.cell].gamma == g;
                metric_series(&mut out, &[OBJECTIVE, N_STAR], &format!("_gamma{g}"), &keep);
            }
        }
        3 => metric_series(&mut out, &[OBJECTIVE, N_STAR, N_TILDE], "", &|_| true),
        4 => metric_series(&mut out, &[OBJECTIVE, BENEFIT], "", &|_| true),
        5 => metric_series(&mut out, &[OBJECTIVE, PRICE, BENEFIT, N_STAR, N_TILDE], "", &|_| true),
        _ => {
            type Eval = (&'static str, fn(&Evaluation) -> f64);
            let evals: [Eval; 3] =
                [("worst_case", |e| e.worst_case), ("expected", |e| e.expected), ("sampled_mean", |e| e.sampled_mean)];
            for model in Model::ALL {
                for &(name, value) in &evals {
                    out.push(collect_series(
                        format!("exp6_{name}_{}", model.name()),
                        plan,
                        &results.evaluations,
                        |e| e.cell,
                        |e| e.model == model,
                        value,
                    ));
                }
            }
        }
    }
    out
}

pub fn write_series(path: &Path, series: &Series) -> Result<(), RunError> {
    let mut file = BufWriter::new(File::create(path).map_err(io_error(path))?);
    let mut text = String::from("# x median p25 p75\n");
    for (x, s) in &series.points {
        text.push_str(&format!("{x} {} {} {}\n", s.median, s.p25, s.p75));
    }
    file.write_all(text.as_bytes()).map_err(io_error(path))?;
    file.flush().map_err(io_error(path))
}

/// Writes the results table, the experiment-6 evaluation table and one data
/// file per plot series. Returns the paths written.
pub fn write_results(config: &RunConfig, plan: &Plan, results: &Results) -> Result<Vec<PathBuf>, RunError> {
    let k = plan.experiment;
    let meta = metadata_line(config);
    let mut written = Vec::new();
    let path = config.out_dir.join(format!("exp{k}.csv"));
    let records: Vec<Vec<String>> = results.rows.iter().map(|r| row_record(plan, r, config.omit_timing)).collect();
    write_table(&path, &meta, &CSV_HEADER, &records)?;
    written.push(path);
    if k == 6 {
        let path = config.out_dir.join("exp6_eval.csv");
        let records: Vec<Vec<String>> = results.evaluations.iter().map(|e| eval_record(plan, e)).collect();
        write_table(&path, &meta, &EVAL_HEADER, &records)?;
        written.push(path);
    }
    for s in plot_series(plan, results) {
        let path = config.out_dir.join(format!("{}.dat", s.name));
        write_series(&path, &s)?;
        written.push(path);
    }
    Ok(written)
}
