//! Robust linear problems whose uncertainty sets depend on binary decisions.

use endoro_solver::{solve_lp, LinearProgram, LpError, LpResult, LpStatus, RowSense, Sense};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid data: {0}")]
    Invalid(String),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Relation of a linear side constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

impl From<Relation> for RowSense {
    fn from(r: Relation) -> RowSense {
        match r {
            Relation::Le => RowSense::Le,
            Relation::Ge => RowSense::Ge,
            Relation::Eq => RowSense::Eq,
        }
    }
}

/// `{xi : D xi <= d + Delta x}`, optionally intersected with `xi >= 0`.
///
/// With `nonnegative`, the sign restriction is kept apart from the rows of
/// `D`, so dual constraints on `xi` become inequalities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyUSet {
    pub lhs: Matrix,
    pub rhs: Vec<f64>,
    pub influence: Matrix,
    #[serde(default)]
    pub nonnegative: bool,
}

/// `{xi : D xi <= d, 0 <= xi <= v + W (e - x)}` with `W = diag(w)`.
///
/// Component `k` of `xi` is controlled by `x_k`: choosing `x_k = 1` removes
/// the reducible part `w_k` of its upper bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiBarUSet {
    pub lhs: Matrix,
    pub rhs: Vec<f64>,
    pub base: Vec<f64>,
    pub reducible: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum UncertaintySet {
    Poly(PolyUSet),
    PiBar(PiBarUSet),
}

/// An explicit polytope `{xi : rows, xi >= 0 if nonnegative}` with every row
/// written as `a . xi <= b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    pub dim: usize,
    pub rows: Vec<(Vec<f64>, f64)>,
    pub nonnegative: bool,
}

impl Polytope {
    /// LP over this polytope with the given objective.
    pub fn to_lp(&self, sense: Sense, objective: &[f64]) -> LinearProgram {
        let mut lp = LinearProgram::new(sense, objective.to_vec());
        if !self.nonnegative {
            lp.lower = vec![f64::NEG_INFINITY; self.dim];
        }
        for (a, b) in &self.rows {
            let coeffs = a.iter().copied().enumerate().filter(|&(_, v)| v != 0.0).collect();
            lp.add_constraint(coeffs, RowSense::Le, *b);
        }
        lp
    }

    pub fn maximize(&self, objective: &[f64]) -> Result<LpResult, LpError> {
        solve_lp(&self.to_lp(Sense::Maximize, objective))
    }

    pub fn is_empty(&self) -> Result<bool, LpError> {
        let r = solve_lp(&self.to_lp(Sense::Minimize, &vec![0.0; self.dim]))?;
        Ok(r.status == LpStatus::Infeasible)
    }

    pub fn contains(&self, xi: &[f64], tol: f64) -> bool {
        if self.nonnegative && xi.iter().any(|&v| v < -tol) {
            return false;
        }
        self.rows.iter().all(|(a, b)| a.iter().zip(xi).map(|(u, v)| u * v).sum::<f64>() <= b + tol)
    }
}

impl PolyUSet {
    pub fn dim(&self) -> usize {
        self.lhs.cols()
    }

    pub fn num_rows(&self) -> usize {
        self.lhs.rows()
    }

    /// Checks internal shapes against uncertainty dimension `p` and
    /// influence dimension `n`.
    pub fn validate(&self, p: usize, n: usize) -> Result<(), ModelError> {
        let k = self.lhs.rows();
        if !self.lhs.has_width(p) {
            return Err(ModelError::Dimension(format!("D has {} columns, expected {p}", self.lhs.cols())));
        }
        if self.rhs.len() != k || self.influence.rows() != k {
            return Err(ModelError::Dimension(format!(
                "D has {k} rows but d has {} and Delta has {}",
                self.rhs.len(),
                self.influence.rows()
            )));
        }
        if !self.influence.has_width(n) {
            return Err(ModelError::Dimension(format!(
                "Delta has {} columns, expected {n}",
                self.influence.cols()
            )));
        }
        if !self.lhs.all_finite() || !self.influence.all_finite() || self.rhs.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::Invalid("set data must be finite".into()));
        }
        Ok(())
    }

    /// The region for a fixed influence vector.
    pub fn instantiate(&self, x: &[f64]) -> Result<Polytope, ModelError> {
        let width = if self.num_rows() == 0 { x.len() } else { self.influence.cols() };
        check_influence(x, width)?;
        let shift = self.influence.mul_vec(x);
        let rows = (0..self.num_rows())
            .map(|j| (self.lhs.row(j).to_vec(), self.rhs[j] + shift[j]))
            .collect();
        Ok(Polytope { dim: self.dim(), rows, nonnegative: self.nonnegative })
    }
}

impl PiBarUSet {
    pub fn dim(&self) -> usize {
        self.base.len()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let n = self.dim();
        if self.reducible.len() != n {
            return Err(ModelError::Dimension(format!("v has {n} entries but w has {}", self.reducible.len())));
        }
        if !self.lhs.has_width(n) || self.rhs.len() != self.lhs.rows() {
            return Err(ModelError::Dimension(format!(
                "D is {}x{} with {} right-hand sides for dimension {n}",
                self.lhs.rows(),
                self.lhs.cols(),
                self.rhs.len()
            )));
        }
        if self.base.iter().chain(&self.reducible).any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(ModelError::Invalid("v and w must be finite and nonnegative".into()));
        }
        if !self.lhs.all_finite() || self.rhs.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::Invalid("set data must be finite".into()));
        }
        Ok(())
    }

    /// Upper bound of component `k` under influence `x`.
    pub fn upper_bound(&self, k: usize, x: &[f64]) -> f64 {
        self.base[k] + self.reducible[k] * (1.0 - x[k])
    }

    pub fn instantiate(&self, x: &[f64]) -> Result<Polytope, ModelError> {
        self.validate()?;
        let n = self.dim();
        check_influence(x, n)?;
        let mut rows: Vec<(Vec<f64>, f64)> =
            (0..self.lhs.rows()).map(|j| (self.lhs.row(j).to_vec(), self.rhs[j])).collect();
        for k in 0..n {
            let mut e = vec![0.0; n];
            e[k] = 1.0;
            rows.push((e, self.upper_bound(k, x)));
        }
        Ok(Polytope { dim: n, rows, nonnegative: true })
    }

    /// Equivalent polyhedral form: the rows of `D` followed by one upper-bound
    /// row per component with influence `-diag(w)`; nonnegativity is kept as
    /// a sign restriction.
    pub fn to_poly(&self) -> PolyUSet {
        let n = self.dim();
        let m = self.lhs.rows();
        let mut lhs = Matrix::zeros(m + n, n);
        let mut influence = Matrix::zeros(m + n, n);
        let mut rhs = Vec::with_capacity(m + n);
        for j in 0..m {
            for k in 0..n {
                lhs.set(j, k, self.lhs.get(j, k));
            }
            rhs.push(self.rhs[j]);
        }
        for k in 0..n {
            lhs.set(m + k, k, 1.0);
            influence.set(m + k, k, -self.reducible[k]);
            rhs.push(self.base[k] + self.reducible[k]);
        }
        PolyUSet { lhs, rhs, influence, nonnegative: true }
    }
}

impl UncertaintySet {
    pub fn dim(&self) -> usize {
        match self {
            UncertaintySet::Poly(s) => s.dim(),
            UncertaintySet::PiBar(s) => s.dim(),
        }
    }

    pub fn instantiate(&self, x: &[f64]) -> Result<Polytope, ModelError> {
        match self {
            UncertaintySet::Poly(s) => s.instantiate(x),
            UncertaintySet::PiBar(s) => s.instantiate(x),
        }
    }

    /// Polyhedral form; PiBar sets are converted with [`PiBarUSet::to_poly`].
    pub fn to_poly(&self) -> PolyUSet {
        match self {
            UncertaintySet::Poly(s) => s.clone(),
            UncertaintySet::PiBar(s) => s.to_poly(),
        }
    }
}

/// Returns the polytope `U(x)` of `set`.
pub fn instantiate(set: &UncertaintySet, x: &[f64]) -> Result<Polytope, ModelError> {
    set.instantiate(x)
}

fn check_influence(x: &[f64], n: usize) -> Result<(), ModelError> {
    if x.len() != n {
        return Err(ModelError::Dimension(format!("influence vector has {} entries, expected {n}", x.len())));
    }
    if x.iter().any(|&v| !(-1e-9..=1.0 + 1e-9).contains(&v)) {
        return Err(ModelError::Invalid("influence entries must lie in [0, 1]".into()));
    }
    Ok(())
}

/// A row `a . x + g . y + xi . (E y) <= b` that must hold for every
/// `xi` in `set(x)`.
///
/// `exposure` is `E`, mapping `y` to the coefficients multiplied by the
/// uncertain vector; when absent it is the identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustRow {
    pub x_coeffs: Vec<f64>,
    #[serde(default)]
    pub y_coeffs: Vec<f64>,
    #[serde(default)]
    pub exposure: Option<Matrix>,
    pub rhs: f64,
    pub set: UncertaintySet,
}

impl RobustRow {
    /// The effective uncertain coefficient vector `E y`.
    pub fn exposed(&self, y: &[f64]) -> Vec<f64> {
        match &self.exposure {
            Some(e) => e.mul_vec(y),
            None => y.to_vec(),
        }
    }

    /// `a . x + g . y` (the certain part of the left-hand side).
    pub fn certain_lhs(&self, x: &[f64], y: &[f64]) -> f64 {
        let gy: f64 = self.y_coeffs.iter().zip(y).map(|(a, b)| a * b).sum();
        self.x_coeffs.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + gy
    }

    /// Nonzero entries `(y index, coefficient)` of row `k` of `E`.
    pub fn exposure_row(&self, k: usize) -> Vec<(usize, f64)> {
        match &self.exposure {
            Some(e) => e.row(k).iter().copied().enumerate().filter(|&(_, v)| v != 0.0).collect(),
            None => vec![(k, 1.0)],
        }
    }
}

/// Linear constraint over `x` alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XConstraint {
    pub coeffs: Vec<f64>,
    pub sense: Relation,
    pub rhs: f64,
}

/// Linear constraint over `(x, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YConstraint {
    #[serde(default)]
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub sense: Relation,
    pub rhs: f64,
}

/// Bounds, integrality and side constraints of `y`. Infinite bounds are
/// written as `null` in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YDomain {
    #[serde(with = "bound_vec_lower")]
    pub lower: Vec<f64>,
    #[serde(with = "bound_vec_upper")]
    pub upper: Vec<f64>,
    #[serde(default)]
    pub binary: Vec<bool>,
    #[serde(default)]
    pub constraints: Vec<YConstraint>,
}

impl YDomain {
    pub fn is_binary(&self, j: usize) -> bool {
        self.binary.get(j).copied().unwrap_or(false)
    }
}

/// `min c . x + f . y` subject to the robust rows, `x` binary with side
/// constraints, and `y` in its domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustLinearProblem {
    pub c: Vec<f64>,
    pub f: Vec<f64>,
    pub rows: Vec<RobustRow>,
    #[serde(default)]
    pub x_constraints: Vec<XConstraint>,
    pub y_domain: YDomain,
}

impl RobustLinearProblem {
    pub fn n_x(&self) -> usize {
        self.c.len()
    }

    pub fn n_y(&self) -> usize {
        self.f.len()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let (n, p) = (self.n_x(), self.n_y());
        let yd = &self.y_domain;
        if yd.lower.len() != p || yd.upper.len() != p || (!yd.binary.is_empty() && yd.binary.len() != p) {
            return Err(ModelError::Dimension(format!("y domain does not have {p} entries")));
        }
        if (0..p).any(|j| yd.lower[j] > yd.upper[j] || yd.lower[j].is_nan() || yd.upper[j].is_nan()) {
            return Err(ModelError::Invalid("y bounds are inconsistent".into()));
        }
        if self.c.iter().chain(&self.f).any(|v| !v.is_finite()) {
            return Err(ModelError::Invalid("objective must be finite".into()));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.x_coeffs.len() != n {
                return Err(ModelError::Dimension(format!("row {i}: a has {} entries, expected {n}", row.x_coeffs.len())));
            }
            if !row.y_coeffs.is_empty() && row.y_coeffs.len() != p {
                return Err(ModelError::Dimension(format!("row {i}: g has {} entries, expected {p}", row.y_coeffs.len())));
            }
            let dim = row.set.dim();
            match &row.exposure {
                Some(e) if e.rows() != dim || !e.has_width(p) => {
                    return Err(ModelError::Dimension(format!(
                        "row {i}: exposure is {}x{}, expected {dim}x{p}",
                        e.rows(),
                        e.cols()
                    )))
                }
                None if dim != p => {
                    return Err(ModelError::Dimension(format!(
                        "row {i}: set dimension {dim} differs from dim(y) = {p}"
                    )))
                }
                _ => {}
            }
            match &row.set {
                UncertaintySet::Poly(s) => s.validate(dim, n)?,
                UncertaintySet::PiBar(s) => {
                    s.validate()?;
                    if s.dim() != n {
                        return Err(ModelError::Dimension(format!(
                            "row {i}: PiBar set controls {} components but x has {n}",
                            s.dim()
                        )));
                    }
                }
            }
            if !row.rhs.is_finite() {
                return Err(ModelError::Invalid(format!("row {i}: rhs must be finite")));
            }
        }
        for (i, con) in self.x_constraints.iter().enumerate() {
            if con.coeffs.len() != n {
                return Err(ModelError::Dimension(format!("x constraint {i} has {} entries", con.coeffs.len())));
            }
        }
        for (i, con) in yd.constraints.iter().enumerate() {
            if (!con.x.is_empty() && con.x.len() != n) || con.y.len() != p {
                return Err(ModelError::Dimension(format!("y constraint {i} has mismatched widths")));
            }
        }
        Ok(())
    }

    /// Objective `c . x + f . y`.
    pub fn nominal_objective(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(&self.c, x) + dot(&self.f, y)
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let p: RobustLinearProblem =
            serde_json::from_str(text).map_err(|e| ModelError::Invalid(format!("json: {e}")))?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem serializes")
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

macro_rules! bound_vec_serde {
    ($name:ident, $inf:expr) => {
        mod $name {
            use serde::{Deserialize, Deserializer, Serialize, Serializer};

            pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
                let o: Vec<Option<f64>> = v.iter().map(|x| if x.is_finite() { Some(*x) } else { None }).collect();
                o.serialize(s)
            }

            pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
                let o = Vec::<Option<f64>>::deserialize(d)?;
                Ok(o.into_iter().map(|x| x.unwrap_or($inf)).collect())
            }
        }
    };
}

bound_vec_serde!(bound_vec_lower, f64::NEG_INFINITY);
bound_vec_serde!(bound_vec_upper, f64::INFINITY);
