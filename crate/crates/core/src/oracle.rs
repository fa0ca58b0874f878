//! Exact evaluation of worst cases, and the satisfiability reduction.

use std::fmt;

use endoro_solver::{solve_lp, LinearProgram, LpError, LpStatus, RowSense, Sense};
use thiserror::Error;

use crate::matrix::Matrix;
use crate::model::{ModelError, PiBarUSet, PolyUSet, RobustLinearProblem, UncertaintySet, YDomain};
use crate::reformulate::{build_bigm_counterpart, solve_counterpart, ReformulateError, Support};

/// Row slack tolerance used by [`robust_feasible`].
pub const FEASIBILITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Reformulate(#[from] ReformulateError),
    #[error("uncertainty set is empty for the given decision")]
    EmptySet,
    #[error("worst case is unbounded")]
    Unbounded,
    #[error("coefficient vector has {got} entries, set dimension is {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("cnf parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("truth-table check supports at most 12 variables, got {0}")]
    TooManyVariables(usize),
}

/// Maximizer of `u . xi` over `U(x)` with the LP duals of its rows.
#[derive(Debug, Clone, PartialEq)]
pub struct WorstCase {
    pub value: f64,
    pub xi: Vec<f64>,
    /// Duals of the set's rows in order. For a PiBar set these are the rows
    /// of `D` followed by the per-component upper-bound rows.
    pub row_duals: Vec<f64>,
}

impl WorstCase {
    /// Duals of the trailing `n` upper-bound rows of a PiBar set.
    pub fn bound_duals(&self, n: usize) -> &[f64] {
        &self.row_duals[self.row_duals.len() - n..]
    }
}

/// Solves `max u . xi` over `set(x)`.
pub fn worst_case_value(x: &[f64], u: &[f64], set: &UncertaintySet) -> Result<WorstCase, OracleError> {
    if u.len() != set.dim() {
        return Err(OracleError::Dimension { expected: set.dim(), got: u.len() });
    }
    let region = set.instantiate(x)?;
    let r = region.maximize(u)?;
    match r.status {
        LpStatus::Infeasible => Err(OracleError::EmptySet),
        LpStatus::Unbounded => Err(OracleError::Unbounded),
        LpStatus::Optimal => Ok(WorstCase { value: r.objective_value, xi: r.primal, row_duals: r.duals }),
    }
}

/// Optimal value of the split problem over `(xi, zeta)`:
/// `max (u - pibar o x) . xi + u . zeta` subject to `D (xi + zeta) <= d`,
/// `0 <= xi <= w`, `0 <= zeta <= v`.
///
/// When `pibar` bounds the bound-row duals of the worst case, this equals
/// [`worst_case_value`] for binary `x`.
pub fn hbar_value(x: &[f64], u: &[f64], set: &PiBarUSet, pibar: &[f64]) -> Result<f64, OracleError> {
    set.validate()?;
    let n = set.dim();
    for len in [x.len(), u.len(), pibar.len()] {
        if len != n {
            return Err(OracleError::Dimension { expected: n, got: len });
        }
    }
    let mut objective: Vec<f64> = (0..n).map(|k| u[k] - pibar[k] * x[k]).collect();
    objective.extend_from_slice(u);
    let mut lp = LinearProgram::new(Sense::Maximize, objective);
    for k in 0..n {
        lp.upper[k] = set.reducible[k];
        lp.upper[n + k] = set.base[k];
    }
    for j in 0..set.lhs.rows() {
        let coeffs = (0..n)
            .filter(|&k| set.lhs.get(j, k) != 0.0)
            .flat_map(|k| [(k, set.lhs.get(j, k)), (n + k, set.lhs.get(j, k))])
            .collect();
        lp.add_constraint(coeffs, RowSense::Le, set.rhs[j]);
    }
    let r = solve_lp(&lp)?;
    match r.status {
        LpStatus::Optimal => Ok(r.objective_value),
        LpStatus::Infeasible => Err(OracleError::EmptySet),
        LpStatus::Unbounded => Err(OracleError::Unbounded),
    }
}

/// Per-row outcome of a robust feasibility check.
#[derive(Debug, Clone, PartialEq)]
pub struct RowAudit {
    pub certain: f64,
    pub worst_case: f64,
    pub rhs: f64,
    /// `rhs - certain - worst_case`; negative means violated.
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub rows: Vec<RowAudit>,
}

impl FeasibilityReport {
    pub fn min_slack(&self) -> f64 {
        self.rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min)
    }
}

/// Checks every robust row of `problem` at `(x, y)` against its exact
/// worst case, with tolerance [`FEASIBILITY_TOL`].
pub fn robust_feasible(problem: &RobustLinearProblem, x: &[f64], y: &[f64]) -> Result<FeasibilityReport, OracleError> {
    if x.len() != problem.n_x() {
        return Err(OracleError::Dimension { expected: problem.n_x(), got: x.len() });
    }
    if y.len() != problem.n_y() {
        return Err(OracleError::Dimension { expected: problem.n_y(), got: y.len() });
    }
    let mut rows = Vec::with_capacity(problem.rows.len());
    for row in &problem.rows {
        let certain = row.certain_lhs(x, y);
        let worst = worst_case_value(x, &row.exposed(y), &row.set)?.value;
        rows.push(RowAudit { certain, worst_case: worst, rhs: row.rhs, slack: row.rhs - certain - worst });
    }
    let feasible = rows.iter().all(|r| r.slack >= -FEASIBILITY_TOL);
    Ok(FeasibilityReport { feasible, rows })
}

/// A CNF formula whose clauses have exactly three literals. Literals are
/// nonzero, 1-based, and negative when negated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cnf3 {
    pub num_vars: usize,
    pub clauses: Vec<[i32; 3]>,
}

impl Cnf3 {
    /// Builds a formula, padding short clauses by repeating their last literal.
    pub fn new(num_vars: usize, clauses: &[Vec<i32>]) -> Result<Cnf3, OracleError> {
        let mut out = Vec::with_capacity(clauses.len());
        for (i, c) in clauses.iter().enumerate() {
            out.push(pad_clause(c, num_vars).map_err(|message| OracleError::Parse { line: i + 1, message })?);
        }
        Ok(Cnf3 { num_vars, clauses: out })
    }

    /// Parses DIMACS text (`p cnf V C` header, zero-terminated clauses).
    pub fn parse_dimacs(text: &str) -> Result<Cnf3, OracleError> {
        let mut header: Option<(usize, usize)> = None;
        let mut clauses = Vec::new();
        let mut current: Vec<i32> = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            let err = |message: String| OracleError::Parse { line: ln + 1, message };
            if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
                continue;
            }
            if line.starts_with('p') {
                let parts: Vec<&str> = line.split_whitespace().collect();
                if parts.len() != 4 || parts[1] != "cnf" {
                    return Err(err("malformed problem line".into()));
                }
                let v = parts[2].parse().map_err(|_| err("bad variable count".into()))?;
                let c = parts[3].parse().map_err(|_| err("bad clause count".into()))?;
                header = Some((v, c));
                continue;
            }
            let Some((nv, _)) = header else {
                return Err(err("clause before problem line".into()));
            };
            for tok in line.split_whitespace() {
                let lit: i32 = tok.parse().map_err(|_| err(format!("bad literal {tok:?}")))?;
                if lit == 0 {
                    clauses.push(pad_clause(&current, nv).map_err(err)?);
                    current.clear();
                } else {
                    current.push(lit);
                }
            }
        }
        let Some((nv, nc)) = header else {
            return Err(OracleError::Parse { line: 0, message: "missing problem line".into() });
        };
        if !current.is_empty() {
            clauses.push(pad_clause(&current, nv).map_err(|message| OracleError::Parse { line: 0, message })?);
        }
        if clauses.len() != nc {
            return Err(OracleError::Parse {
                line: 0,
                message: format!("header declares {nc} clauses, found {}", clauses.len()),
            });
        }
        Ok(Cnf3 { num_vars: nv, clauses })
    }

    /// Number of clauses satisfied by `assignment` (entries 0 or 1).
    pub fn satisfied_count(&self, assignment: &[bool]) -> usize {
        self.clauses
            .iter()
            .filter(|c| {
                c.iter().any(|&l| {
                    let v = assignment[l.unsigned_abs() as usize - 1];
                    if l > 0 {
                        v
                    } else {
                        !v
                    }
                })
            })
            .count()
    }

    /// Satisfiability by exhaustive enumeration.
    pub fn satisfiable_by_enumeration(&self) -> bool {
        let n = self.num_vars;
        (0u64..(1u64 << n)).any(|mask| {
            let a: Vec<bool> = (0..n).map(|j| (mask >> j) & 1 == 1).collect();
            self.satisfied_count(&a) == self.clauses.len()
        })
    }
}

impl fmt::Display for Cnf3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "p cnf {} {}", self.num_vars, self.clauses.len())?;
        for c in &self.clauses {
            writeln!(f, "{} {} {} 0", c[0], c[1], c[2])?;
        }
        Ok(())
    }
}

fn pad_clause(c: &[i32], num_vars: usize) -> Result<[i32; 3], String> {
    if c.is_empty() {
        return Err("empty clause".into());
    }
    if c.len() > 3 {
        return Err(format!("clause has {} literals", c.len()));
    }
    if let Some(&l) = c.iter().find(|&&l| l == 0 || l.unsigned_abs() as usize > num_vars) {
        return Err(format!("literal {l} out of range"));
    }
    let last = *c.last().unwrap();
    Ok([c[0], *c.get(1).unwrap_or(&last), *c.get(2).unwrap_or(&last)])
}

/// Robust problem whose optimum is minus the largest number of
/// simultaneously satisfiable clauses.
///
/// Variables: `x` (one per propositional variable), `y = (a-weights, z)`
/// with every weight pinned to 1 and `z >= 0`. The single robust row is
/// `z - a . y <= 0` for all `a` in `U(x)`, where `U(x)` asks each `a_i` to
/// lie in `[max of clause i's literal values, 1]`.
pub fn build_rosat(cnf: &Cnf3) -> RobustLinearProblem {
    let m = cnf.clauses.len();
    let n = cnf.num_vars;
    let k = 4 * m;
    let mut lhs = Matrix::zeros(k, m);
    let mut influence = Matrix::zeros(k, n);
    let mut rhs = vec![0.0; k];
    for (i, clause) in cnf.clauses.iter().enumerate() {
        for (t, &lit) in clause.iter().enumerate() {
            let r = 4 * i + t;
            let j = lit.unsigned_abs() as usize - 1;
            lhs.set(r, i, -1.0);
            if lit > 0 {
                influence.set(r, j, -1.0);
            } else {
                rhs[r] = -1.0;
                influence.set(r, j, 1.0);
            }
        }
        lhs.set(4 * i + 3, i, 1.0);
        rhs[4 * i + 3] = 1.0;
    }
    let mut exposure = Matrix::zeros(m, m + 1);
    for i in 0..m {
        exposure.set(i, i, -1.0);
    }
    let mut y_coeffs = vec![0.0; m + 1];
    y_coeffs[m] = 1.0;
    let mut f = vec![0.0; m + 1];
    f[m] = -1.0;
    let mut lower = vec![1.0; m + 1];
    let mut upper = vec![1.0; m + 1];
    lower[m] = 0.0;
    upper[m] = f64::INFINITY;
    RobustLinearProblem {
        c: vec![0.0; n],
        f,
        rows: vec![crate::model::RobustRow {
            x_coeffs: vec![0.0; n],
            y_coeffs,
            exposure: Some(exposure),
            rhs: 0.0,
            set: UncertaintySet::Poly(PolyUSet { lhs, rhs, influence, nonnegative: false }),
        }],
        x_constraints: Vec::new(),
        y_domain: YDomain { lower, upper, binary: Vec::new(), constraints: Vec::new() },
    }
}

/// Every dual of the reduction's set is at most 1 at some optimum, so twice
/// that is a valid linearization constant.
pub const ROSAT_BIG_M: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SatCheck {
    pub milp_objective: f64,
    pub satisfiable: bool,
    /// Whether `milp_objective == -clauses` coincides with satisfiability.
    pub agrees: bool,
}

/// Solves the reduction with the Big-M counterpart and compares against a
/// truth table.
pub fn sat_equivalence_check(cnf: &Cnf3) -> Result<SatCheck, OracleError> {
    if cnf.num_vars > 12 {
        return Err(OracleError::TooManyVariables(cnf.num_vars));
    }
    let problem = build_rosat(cnf);
    let cp = build_bigm_counterpart(&problem, ROSAT_BIG_M, Support::Sparse)?;
    let sol = solve_counterpart(&cp, 1_000_000)?;
    let satisfiable = cnf.satisfiable_by_enumeration();
    let hits_all = (sol.objective + cnf.clauses.len() as f64).abs() <= 1e-6;
    Ok(SatCheck { milp_objective: sol.objective, satisfiable, agrees: hits_all == satisfiable })
}
