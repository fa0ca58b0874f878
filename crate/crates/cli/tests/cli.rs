use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;

use endoro_cli::experiments::{instance_seed, Plan};
use endoro_cli::{run, Experiment, FormulationChoice, RunConfig};

const BIN: &str = env!("CARGO_BIN_EXE_endoro");

fn data(name: &str) -> String {
    format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn endoro(args: &[&str]) -> std::process::Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

/// Rows of a results table, without the metadata line.
fn table(path: &Path) -> Vec<csv::StringRecord> {
    let text = fs::read_to_string(path).unwrap();
    assert!(text.starts_with("# endoro "), "metadata line missing");
    let body = text.split_once('\n').unwrap().1;
    let mut r = csv::Reader::from_reader(body.as_bytes());
    assert_eq!(r.headers().unwrap().iter().collect::<Vec<_>>(), endoro_cli::output::CSV_HEADER);
    r.records().map(|x| x.unwrap()).collect()
}

#[test]
fn experiment_one_with_all_formulations_writes_one_row_per_solve() {
    let dir = tempfile::tempdir().unwrap();
    let config = RunConfig {
        experiment: Experiment::Bench(1),
        nodes: Some(50),
        instances: 5,
        seed: 7,
        formulation: Some(FormulationChoice::All),
        out_dir: dir.path().to_path_buf(),
        ..RunConfig::default()
    };
    let summary = run(&config, &mut Vec::new()).unwrap();
    assert_eq!(summary.rows, 15);
    let rows = table(&dir.path().join("exp1.csv"));
    assert_eq!(rows.len(), 15);
    let mut by_instance: BTreeMap<String, Vec<(String, f64)>> = BTreeMap::new();
    for r in &rows {
        by_instance.entry(r[2].to_string()).or_default().push((r[3].to_string(), r[4].parse().unwrap()));
    }
    assert_eq!(by_instance.len(), 5);
    for solves in by_instance.values() {
        let names: Vec<&str> = solves.iter().map(|(f, _)| f.as_str()).collect();
        assert_eq!(names, ["pibar", "bigm", "modbigm"]);
        for (_, z) in solves {
            assert!((z - solves[0].1).abs() <= 1e-6, "{solves:?}");
        }
    }
    for f in ["pibar", "bigm", "modbigm"] {
        let dat = fs::read_to_string(dir.path().join(format!("exp1_wall_time_{f}.dat"))).unwrap();
        let lines: Vec<&str> = dat.lines().collect();
        assert_eq!(lines[0], "# x median p25 p75");
        assert_eq!(lines.len(), 2);
        assert!(lines[1].starts_with("50 "));
    }
}

#[test]
fn reruns_reproduce_the_table_body() {
    let bodies: Vec<String> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            let out = dir.path().to_str().unwrap();
            let o = endoro(&[
                "--experiment", "6", "--nodes", "12", "--instances", "3", "--seed", "11", "--samples", "500",
                "--threads", "2", "--omit-timing", "--out-dir", out,
            ]);
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
            let mut text = String::new();
            for name in ["exp6.csv", "exp6_eval.csv", "exp6_worst_case_ro-ddu.dat"] {
                let t = fs::read_to_string(dir.path().join(name)).unwrap();
                let body = if name.ends_with(".csv") { t.split_once('\n').unwrap().1.to_string() } else { t };
                text.push_str(&body);
            }
            text
        })
        .collect();
    assert_eq!(bodies[0], bodies[1]);
    assert!(!bodies[0].is_empty());
}

#[test]
fn timing_column_is_filled_unless_omitted() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = endoro(&["--experiment", "3", "--nodes", "10", "--instances", "2", "--out-dir", out]);
    assert!(o.status.success());
    for r in table(&dir.path().join("exp3.csv")) {
        assert!(r[10].parse::<f64>().unwrap() >= 0.0);
    }
}

#[test]
fn instance_seeds_are_per_index_and_shared_across_cells() {
    assert_eq!(instance_seed(7, 3), instance_seed(7, 3));
    assert_ne!(instance_seed(7, 3), instance_seed(7, 4));
    assert_ne!(instance_seed(7, 3), instance_seed(8, 3));
    let config = RunConfig { experiment: Experiment::Bench(4), instances: 4, seed: 7, ..RunConfig::default() };
    let plan = Plan::new(&config).unwrap();
    assert_eq!(plan.seeds, (0..4).map(|i| instance_seed(7, i)).collect::<Vec<_>>());
    assert_eq!(plan.cells.len(), 11);
    assert!(plan.cells.iter().all(|c| c.nodes == 30 && c.budget == 12.0 && c.gamma == 0.2));
}

#[test]
fn experiment_grids_follow_the_defaults() {
    let plan = |k, edit: fn(&mut RunConfig)| {
        let mut c = RunConfig { experiment: Experiment::Bench(k), ..RunConfig::default() };
        edit(&mut c);
        Plan::new(&c).unwrap()
    };
    let p1 = plan(1, |_| {});
    assert_eq!(p1.cells.len(), 1);
    assert_eq!((p1.cells[0].nodes, p1.cells[0].budget, p1.cells[0].cost, p1.cells[0].gamma), (50, 2.0, 1.0, 0.2));
    assert_eq!(p1.formulations.len(), 3);
    assert_eq!(plan(2, |_| {}).cells.len(), 14);
    assert_eq!(plan(2, |c| c.gamma = 0.0).cells.len(), 7);
    assert_eq!(plan(3, |_| {}).cells.len(), 7);
    assert_eq!(plan(3, |c| c.nodes = Some(22)).cells.len(), 1);
    let p5 = plan(5, |_| {});
    assert!(p5.cells.iter().all(|c| c.nodes == 30 && c.cost == 1.0));
    assert_eq!(p5.formulations.len(), 1);
    assert_eq!(plan(5, |c| c.budget = Some(3.0)).cells.len(), 1);
}

#[test]
fn figure1_prints_the_table() {
    let o = endoro(&["--experiment", "figure1"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for needle in ["A-C-B", "95.00", "127.00", "A-E-F-G-H-B", "97.40", "110.15", "A-E-C-B", "95.30", "108.10"] {
        assert!(text.contains(needle), "{needle} missing from\n{text}");
    }
    assert!(text.contains("price of robustness 15.15, benefit of interaction 2.05"));
}

#[test]
fn single_solves_and_audits_a_problem_file() {
    let o = endoro(&["--experiment", "single", "--formulation", "all", "--problem", &data("example.json")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    // Enumerating x and the binary y_2 by hand: x = 0, y = (0, 1) costs -1.
    assert_eq!(text.matches("z* = -1\n").count(), 3, "{text}");
    assert_eq!(text.matches("y* = [0, 1]").count(), 3);
    assert_eq!(text.matches("audit: robust feasible").count(), 3);
    assert_eq!(text.matches("big-M audit: pass").count(), 2);
}

#[test]
fn single_without_uncertain_rows_is_a_plain_lp() {
    let o = endoro(&["--experiment", "single", "--problem", &data("no_uncertainty.json")]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    // max y1 + y2 with y1 + 2 y2 <= 4 and y <= 3 sits at (3, 0.5).
    assert!(text.contains("z* = -3.5\n"), "{text}");
    assert!(text.contains("y* = [3, 0.5]"));
    assert!(text.contains("audit: robust feasible (min slack n/a)"));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad_key = dir.path().join("bad.json");
    fs::write(&bad_key, r#"{"experiment": 1, "colour": "red"}"#).unwrap();
    let cases: Vec<Vec<String>> = vec![
        vec!["--experiment".into(), "7".into()],
        vec!["--experiment".into(), "3".into(), "--gamma".into(), "1.5".into()],
        vec!["--experiment".into(), "3".into(), "--instances".into(), "0".into()],
        vec!["--experiment".into(), "single".into()],
        vec!["--experiment".into(), "single".into(), "--problem".into(), "/nonexistent.json".into()],
        vec!["--config".into(), bad_key.to_str().unwrap().into()],
        vec!["--formulation".into(), "dense".into()],
    ];
    for args in cases {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let o = endoro(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = endoro(&["--experiment", "3", "--gamma", "1.5"]);
    let record: serde_json::Value = serde_json::from_slice(o.stderr.trim_ascii()).unwrap();
    assert_eq!(record["error"], "config");
}

#[test]
fn solve_failures_exit_with_three_after_flushing_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = endoro(&[
        "--experiment", "3", "--nodes", "25", "--instances", "3", "--node-limit", "1", "--out-dir", out,
    ]);
    assert_eq!(o.status.code(), Some(3));
    let record: serde_json::Value = serde_json::from_slice(o.stderr.trim_ascii()).unwrap();
    assert_eq!(record["error"], "solve");
    assert!(record["message"].as_str().unwrap().contains("node limit"));
    assert!(record["instance_seed"].is_u64());
    // The table is written even though no task completed.
    assert!(table(&dir.path().join("exp3.csv")).len() < 3);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let out = dir.path().join("out");
    fs::write(
        &cfg,
        format!(
            r#"{{"experiment": 5, "nodes": 10, "instances": 1, "budget": 1.0, "out-dir": "{}"}}"#,
            out.display()
        ),
    )
    .unwrap();
    let o = endoro(&["--config", cfg.to_str().unwrap(), "--budget", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = table(&out.join("exp5.csv"));
    assert_eq!(rows.len(), 1);
    assert!(rows[0][1].contains(r#""budget":3.0"#), "{:?}", &rows[0]);
}

#[test]
fn config_json_uses_kebab_case_keys() {
    let c = RunConfig::from_json(r#"{"experiment": "figure1", "node-limit": 5, "out-dir": "x", "formulation": "bigm"}"#)
        .unwrap();
    assert_eq!(c.node_limit, 5);
    assert_eq!(c.formulation, Some(FormulationChoice::One(endoro_core::reformulate::Formulation::BigM)));
    assert_eq!(RunConfig::from_json(r#"{"experiment": 4}"#).unwrap().experiment, Experiment::Bench(4));
    assert!(RunConfig::from_json(r#"{"node_limit": 5}"#).is_err());
}
