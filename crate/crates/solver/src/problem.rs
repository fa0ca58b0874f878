use std::fmt;

use thiserror::Error;

/// Direction of optimization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

impl Sense {
    /// Multiplier turning this sense into minimization.
    pub fn sign(self) -> f64 {
        match self {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        }
    }
}

/// Relation between a row activity and its right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for RowSense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RowSense::Le => "<=",
            RowSense::Eq => "=",
            RowSense::Ge => ">=",
        })
    }
}

/// One linear row stored sparsely; column indices are unique after `normalize`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<(usize, f64)>, sense: RowSense, rhs: f64) -> Self {
        let mut row = Constraint { coeffs, sense, rhs };
        row.normalize();
        row
    }

    /// Merges duplicate columns and drops exact zeros.
    pub fn normalize(&mut self) {
        self.coeffs.sort_by_key(|&(j, _)| j);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(self.coeffs.len());
        for &(j, v) in &self.coeffs {
            match merged.last_mut() {
                Some(last) if last.0 == j => last.1 += v,
                _ => merged.push((j, v)),
            }
        }
        merged.retain(|&(_, v)| v != 0.0);
        self.coeffs = merged;
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, v)| v * x[j]).sum()
    }

    /// Amount by which `x` violates this row (zero when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let a = self.activity(x);
        match self.sense {
            RowSense::Le => (a - self.rhs).max(0.0),
            RowSense::Ge => (self.rhs - a).max(0.0),
            RowSense::Eq => (a - self.rhs).abs(),
        }
    }
}

/// A linear program over bounded real variables.
///
/// Rows are kept sparse; `from_dense` accepts the usual dense matrix form.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("structural mismatch: {0}")]
    Structural(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

/// Termination status of an LP solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of `solve_lp`.
///
/// `duals[i]` is the rate of change of the optimal objective (in the
/// problem's own sense) per unit increase of `rhs[i]`. `reduced_costs[j]`
/// equals `objective[j] - duals . column_j`. Vectors are empty unless the
/// status is optimal.
#[derive(Debug, Clone, PartialEq)]
pub struct LpResult {
    pub status: LpStatus,
    pub primal: Vec<f64>,
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub objective_value: f64,
}

impl LpResult {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// Objective of the dual solution: `rhs . duals` plus each reduced cost
    /// times the variable bound it prices. Infinite when a nonzero reduced
    /// cost prices an infinite bound.
    pub fn dual_objective(&self, lp: &LinearProgram) -> f64 {
        let s = lp.sense.sign();
        let mut total: f64 = lp
            .constraints
            .iter()
            .zip(&self.duals)
            .map(|(row, y)| row.rhs * y)
            .sum();
        for (j, &d) in self.reduced_costs.iter().enumerate() {
            let internal = s * d;
            if internal > 0.0 {
                total += d * lp.lower[j];
            } else if internal < 0.0 {
                total += d * lp.upper[j];
            }
        }
        total
    }
}

impl LinearProgram {
    /// Empty program with `objective.len()` variables bounded to `[0, inf)`.
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram {
            sense,
            objective,
            constraints: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    /// Builds a program from a dense row-major matrix.
    pub fn from_dense(
        sense: Sense,
        objective: Vec<f64>,
        matrix: &[Vec<f64>],
        senses: &[RowSense],
        rhs: &[f64],
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self, LpError> {
        let n = objective.len();
        if matrix.len() != senses.len() || matrix.len() != rhs.len() {
            return Err(LpError::Structural(format!(
                "{} matrix rows, {} senses, {} right-hand sides",
                matrix.len(),
                senses.len(),
                rhs.len()
            )));
        }
        let mut lp = LinearProgram {
            sense,
            objective,
            constraints: Vec::with_capacity(matrix.len()),
            lower,
            upper,
        };
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != n {
                return Err(LpError::Structural(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            let coeffs = row.iter().copied().enumerate().filter(|&(_, v)| v != 0.0).collect();
            lp.constraints.push(Constraint::new(coeffs, senses[i], rhs[i]));
        }
        lp.validate()?;
        Ok(lp)
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.constraints.len()
    }

    /// Appends a variable and returns its index.
    pub fn add_variable(&mut self, cost: f64, lower: f64, upper: f64) -> usize {
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.objective.len() - 1
    }

    /// Appends a row and returns its index.
    pub fn add_constraint(&mut self, coeffs: Vec<(usize, f64)>, sense: RowSense, rhs: f64) -> usize {
        self.constraints.push(Constraint::new(coeffs, sense, rhs));
        self.constraints.len() - 1
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.objective.len();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::Structural(format!(
                "{n} objective entries but {} lower and {} upper bounds",
                self.lower.len(),
                self.upper.len()
            )));
        }
        if let Some(j) = self.objective.iter().position(|c| !c.is_finite()) {
            return Err(LpError::Structural(format!("objective entry {j} is not finite")));
        }
        for j in 0..n {
            if self.lower[j].is_nan() || self.upper[j].is_nan() {
                return Err(LpError::Structural(format!("bound of variable {j} is NaN")));
            }
            if self.lower[j] == f64::INFINITY || self.upper[j] == f64::NEG_INFINITY {
                return Err(LpError::Structural(format!("variable {j} has an unattainable bound")));
            }
        }
        for (i, row) in self.constraints.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(LpError::Structural(format!("rhs of row {i} is not finite")));
            }
            for &(j, v) in &row.coeffs {
                if j >= n {
                    return Err(LpError::Structural(format!(
                        "row {i} references column {j} of {n}"
                    )));
                }
                if !v.is_finite() {
                    return Err(LpError::Structural(format!("row {i} has a non-finite coefficient")));
                }
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest row or bound violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self.constraints.iter().map(|r| r.violation(x)).fold(0.0, f64::max);
        let bounds = (0..self.num_vars())
            .map(|j| (self.lower[j] - x[j]).max(x[j] - self.upper[j]).max(0.0))
            .fold(0.0, f64::max);
        rows.max(bounds)
    }
}
