//! Text reports for the `figure1` and `single` modes.

use std::fmt::Write;

use endoro_core::reformulate::{audit_bigm, build_counterpart, solve_counterpart, Formulation, Support};
use endoro_core::oracle::robust_feasible;
use endoro_core::sp::figure_one_table;
use endoro_core::RobustLinearProblem;
use endoro_solver::MilpStatus;

use crate::experiments::AGREEMENT_TOL;
use crate::RunError;

/// The three-scenario table on the seven-node example network, once per
/// formulation.
pub fn figure1(formulations: &[Formulation]) -> Result<String, RunError> {
    let mut out = String::new();
    for &f in formulations {
        let rows = figure_one_table(f).map_err(|e| RunError::solve(format!("{f}: {e}")))?;
        writeln!(out, "formulation {f}").unwrap();
        writeln!(out, "{:<12} {:<14} {:>10} {:>12}  reduced", "scenario", "path", "nominal", "worst-case").unwrap();
        for r in &rows {
            let reduced = if r.reduced.is_empty() { "-".to_string() } else { r.reduced.join(",") };
            writeln!(out, "{:<12} {:<14} {:>10.2} {:>12.2}  {reduced}", r.label, r.path, r.nominal, r.worst_case)
                .unwrap();
        }
        // Rows are nominal, static robust and decision-dependent, in order.
        let price = rows[1].worst_case - rows[0].nominal;
        let benefit = rows[1].worst_case - rows[2].worst_case;
        writeln!(out, "price of robustness {price:.2}, benefit of interaction {benefit:.2}").unwrap();
        writeln!(out).unwrap();
    }
    Ok(out)
}

fn vector(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
    format!("[{}]", parts.join(", "))
}

/// Solves `problem` in each formulation and audits the answer against the
/// exact worst case of every robust row.
pub fn single(problem: &RobustLinearProblem, formulations: &[Formulation], node_limit: usize) -> Result<String, RunError> {
    let mut out = String::new();
    let mut reference: Option<f64> = None;
    for &f in formulations {
        let cp = build_counterpart(problem, f, Support::Sparse).map_err(|e| RunError::solve(format!("{f}: {e}")))?;
        let sol = solve_counterpart(&cp, node_limit).map_err(|e| RunError::solve(format!("{f}: {e}")))?;
        writeln!(out, "formulation {f}").unwrap();
        if sol.status == MilpStatus::Infeasible {
            writeln!(out, "status infeasible").unwrap();
            continue;
        }
        if let Some(z) = reference {
            if (z - sol.objective).abs() > AGREEMENT_TOL {
                return Err(RunError::solve(format!("{f} objective {} differs from {z}", sol.objective)));
            }
        }
        reference.get_or_insert(sol.objective);
        writeln!(out, "z* = {}", sol.objective).unwrap();
        writeln!(out, "x* = {}", vector(&sol.x)).unwrap();
        writeln!(out, "y* = {}", vector(&sol.y)).unwrap();
        writeln!(out, "nodes {}, wall time {:.3} s", sol.nodes, sol.wall_time).unwrap();
        let report = robust_feasible(problem, &sol.x, &sol.y).map_err(|e| RunError::solve(format!("audit: {e}")))?;
        writeln!(
            out,
            "audit: {} (min slack {})",
            if report.feasible { "robust feasible" } else { "VIOLATED" },
            if report.rows.is_empty() { "n/a".to_string() } else { format!("{:e}", report.min_slack()) }
        )
        .unwrap();
        for (i, r) in report.rows.iter().enumerate() {
            writeln!(
                out,
                "  row {i}: certain {} + worst case {} <= {} (slack {:e})",
                r.certain, r.worst_case, r.rhs, r.slack
            )
            .unwrap();
        }
        if f != Formulation::PiBar {
            let audit = audit_bigm(problem, &cp, &sol).map_err(|e| RunError::solve(format!("audit: {e}")))?;
            writeln!(
                out,
                "big-M audit: {} (M = {}, exact-product violation {:e}, cap active {})",
                if audit.passes() { "pass" } else { "FAIL" },
                cp.big_m.unwrap_or(f64::NAN),
                audit.max_row_violation,
                audit.cap_active
            )
            .unwrap();
        }
        if !report.feasible {
            return Err(RunError::solve(format!("{f}: solution violates a robust row\n{out}")));
        }
    }
    Ok(out)
}
