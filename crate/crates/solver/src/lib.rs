//! Linear and mixed-binary programming for small to medium sparse models.
//!
//! [`solve_lp`] runs a two-phase bounded revised simplex over a sparse LU
//! basis factorization. [`solve_milp`] wraps it in a deterministic
//! best-bound branch and bound over binary variables, reoptimizing each node
//! with the dual simplex from its parent's basis.

mod lu;
mod milp;
mod problem;
mod simplex;

pub use milp::{solve_milp, solve_milp_with, MilpError, MilpResult, MilpStatus, MixedIntegerProgram, INTEGRALITY_TOL};
pub use problem::{Constraint, LinearProgram, LpError, LpResult, LpStatus, RowSense, Sense};

use simplex::{Engine, Outcome};

/// Tuning knobs that leave the optimum unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SimplexOptions {
    /// Consecutive degenerate pivots before switching to Bland's rule.
    /// Defaults to three times rows plus columns; `Some(0)` applies Bland's
    /// rule from the first pivot.
    pub bland_after: Option<usize>,
}

/// Solves `lp` to optimality, infeasibility or unboundedness.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpResult, LpError> {
    solve_lp_with(lp, &SimplexOptions::default())
}

pub fn solve_lp_with(lp: &LinearProgram, options: &SimplexOptions) -> Result<LpResult, LpError> {
    lp.validate()?;
    for j in 0..lp.num_vars() {
        if lp.lower[j] > lp.upper[j] {
            return Ok(empty_result(LpStatus::Infeasible));
        }
    }
    let mut engine = Engine::new(lp);
    engine.bland_after = options.bland_after;
    let outcome = engine.solve_cold()?;
    Ok(extract(lp, &mut engine, outcome))
}

fn empty_result(status: LpStatus) -> LpResult {
    LpResult {
        status,
        primal: Vec::new(),
        duals: Vec::new(),
        reduced_costs: Vec::new(),
        objective_value: f64::NAN,
    }
}

pub(crate) fn extract(lp: &LinearProgram, engine: &mut Engine, outcome: Outcome) -> LpResult {
    match outcome {
        Outcome::Infeasible => empty_result(LpStatus::Infeasible),
        Outcome::Unbounded => empty_result(LpStatus::Unbounded),
        Outcome::Optimal => {
            let s = lp.sense.sign();
            let primal = engine.primal();
            let (y, d) = engine.duals();
            LpResult {
                status: LpStatus::Optimal,
                objective_value: lp.objective_value(&primal),
                primal,
                duals: y.iter().map(|v| s * v).collect(),
                reduced_costs: d.iter().map(|v| s * v).collect(),
            }
        }
    }
}
