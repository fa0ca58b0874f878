//! Exact mixed-binary counterparts of robust problems.
//!
//! Every builder lays the model out the same way: columns `[x | y | extra]`
//! and rows `[x constraints | y constraints | per-row blocks]`, so the
//! original decisions can be read off any incumbent by position.

use std::fmt;

use endoro_solver::{
    solve_lp, solve_milp, LinearProgram, LpStatus, MilpError, MilpResult, MilpStatus, MixedIntegerProgram, RowSense,
    Sense,
};
use thiserror::Error;

use crate::model::{dot, ModelError, PiBarUSet, RobustLinearProblem, UncertaintySet};
use crate::oracle::{robust_feasible, OracleError};

/// Safety factor applied to product bounds by [`choose_bigm`].
pub const BIGM_SAFETY: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReformulateError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Milp(#[from] MilpError),
    #[error("row {row}: uncertainty set is empty at {at}")]
    EmptySet { row: usize, at: &'static str },
    #[error("row {row}: D has negative entry {value} at ({set_row}, {component})")]
    NegativeLhs { row: usize, set_row: usize, component: usize, value: f64 },
    #[error("row {row}: uncertain coefficient {component} can be negative (y index {y_index})")]
    NegativeCoefficient { row: usize, component: usize, y_index: usize },
    #[error("row {row}: no finite bound on the dual of component {component}")]
    UnboundedDual { row: usize, component: usize },
    #[error("row {row}: formulation needs a PiBar uncertainty set")]
    NotPiBar { row: usize },
    #[error("expected {expected} pibar bounds, got {got}")]
    BoundCount { expected: usize, got: usize },
    #[error("row {row}: pibar bound has {got} entries, expected {expected}")]
    BoundLength { row: usize, expected: usize, got: usize },
    #[error("big-M constant must be finite and nonnegative, got {0}")]
    BadBigM(f64),
    #[error("oracle failure: {0}")]
    Oracle(String),
}

impl From<OracleError> for ReformulateError {
    fn from(e: OracleError) -> Self {
        ReformulateError::Oracle(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Formulation {
    PiBar,
    BigM,
    ModifiedBigM,
}

impl Formulation {
    pub const ALL: [Formulation; 3] = [Formulation::PiBar, Formulation::BigM, Formulation::ModifiedBigM];

    pub fn name(self) -> &'static str {
        match self {
            Formulation::PiBar => "pibar",
            Formulation::BigM => "bigm",
            Formulation::ModifiedBigM => "modbigm",
        }
    }

    pub fn parse(s: &str) -> Option<Formulation> {
        Formulation::ALL.into_iter().find(|f| f.name() == s)
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which `(set row, component)` products the Big-M builder linearizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Support {
    /// Every pair, and nonnegativity of the uncertain vector becomes explicit
    /// set rows. Dual rows are equalities.
    Dense,
    /// Only pairs with a nonzero influence entry. Nonnegativity stays a sign
    /// restriction, so dual rows are `>=`.
    Sparse,
}

/// Componentwise bound on the optimal duals of the upper-bound rows of a
/// PiBar set.
#[derive(Debug, Clone, PartialEq)]
pub struct PiBarBound {
    pub pibar: Vec<f64>,
}

/// A linearized product `coeff * dual * x[component]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Product {
    pub col: usize,
    pub dual_col: usize,
    pub set_row: usize,
    pub component: usize,
    pub coeff: f64,
}

/// Columns and rows emitted for one robust row.
#[derive(Debug, Clone, PartialEq)]
pub struct RowBlock {
    pub main_row: usize,
    /// For Big-M variants, one dual per row of the polyhedral set (plus the
    /// explicit sign rows under dense support). For the PiBar formulation,
    /// `t` followed by `s` and `r`.
    pub dual_cols: Vec<usize>,
    pub products: Vec<Product>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Counterpart {
    pub mip: MixedIntegerProgram,
    pub formulation: Formulation,
    pub support: Support,
    pub big_m: Option<f64>,
    pub n_x: usize,
    pub n_y: usize,
    pub base_rows: usize,
    pub blocks: Vec<RowBlock>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CounterpartSolution {
    pub status: MilpStatus,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub objective: f64,
    /// Full incumbent over all counterpart columns.
    pub incumbent: Vec<f64>,
    pub root_bound: f64,
    pub nodes: usize,
    pub wall_time: f64,
}

impl Counterpart {
    pub fn split(&self, incumbent: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (incumbent[..self.n_x].to_vec(), incumbent[self.n_x..self.n_x + self.n_y].to_vec())
    }
}

/// Solves a counterpart with the best-bound branch and bound.
pub fn solve_counterpart(cp: &Counterpart, node_limit: usize) -> Result<CounterpartSolution, ReformulateError> {
    let r: MilpResult = solve_milp(&cp.mip, node_limit)?;
    let (x, y) = if r.status == MilpStatus::Optimal { cp.split(&r.incumbent) } else { (Vec::new(), Vec::new()) };
    Ok(CounterpartSolution {
        status: r.status,
        x,
        y,
        objective: r.objective,
        incumbent: r.incumbent,
        root_bound: r.root_bound,
        nodes: r.nodes_explored,
        wall_time: r.wall_time,
    })
}

/// Columns for `x` and `y` plus their side constraints.
fn base_program(problem: &RobustLinearProblem) -> (LinearProgram, Vec<bool>) {
    let (n, p) = (problem.n_x(), problem.n_y());
    let mut objective = problem.c.clone();
    objective.extend_from_slice(&problem.f);
    let mut lp = LinearProgram::new(Sense::Minimize, objective);
    let yd = &problem.y_domain;
    let mut binary = vec![true; n];
    lp.upper[..n].fill(1.0);
    for j in 0..p {
        lp.lower[n + j] = yd.lower[j];
        lp.upper[n + j] = yd.upper[j];
        binary.push(yd.is_binary(j));
    }
    for con in &problem.x_constraints {
        lp.add_constraint(nonzeros(&con.coeffs, 0), con.sense.into(), con.rhs);
    }
    for con in &yd.constraints {
        let mut coeffs = nonzeros(&con.x, 0);
        coeffs.extend(nonzeros(&con.y, n));
        lp.add_constraint(coeffs, con.sense.into(), con.rhs);
    }
    (lp, binary)
}

fn nonzeros(v: &[f64], offset: usize) -> Vec<(usize, f64)> {
    v.iter().enumerate().filter(|(_, a)| **a != 0.0).map(|(j, &a)| (offset + j, a)).collect()
}

/// `a . x + g . y` as sparse coefficients.
fn certain_coeffs(problem: &RobustLinearProblem, i: usize) -> Vec<(usize, f64)> {
    let row = &problem.rows[i];
    let mut c = nonzeros(&row.x_coeffs, 0);
    c.extend(nonzeros(&row.y_coeffs, problem.n_x()));
    c
}

/// Checks that every set is nonempty at `x = 0` and `x = e`.
pub fn check_nonempty(problem: &RobustLinearProblem) -> Result<(), ReformulateError> {
    let n = problem.n_x();
    for (i, row) in problem.rows.iter().enumerate() {
        for (at, v) in [("x = 0", 0.0), ("x = e", 1.0)] {
            let region = row.set.instantiate(&vec![v; n])?;
            if region.is_empty().map_err(ModelError::from)? {
                return Err(ReformulateError::EmptySet { row: i, at });
            }
        }
    }
    Ok(())
}

/// Bound on the bound-row duals of row `row`, whose set must be PiBar.
///
/// The dual of component `k` never needs to exceed the largest value of its
/// uncertain coefficient over the relaxed `y` domain. That value is read
/// from the bounds of `y` when they are finite and otherwise found by LP.
pub fn estimate_pibar(problem: &RobustLinearProblem, row: usize) -> Result<PiBarBound, ReformulateError> {
    problem.validate()?;
    let r = &problem.rows[row];
    let UncertaintySet::PiBar(set) = &r.set else {
        return Err(ReformulateError::NotPiBar { row });
    };
    check_pibar_lhs(set, row)?;
    let yd = &problem.y_domain;
    let mut pibar = Vec::with_capacity(set.dim());
    for k in 0..set.dim() {
        let coeffs = r.exposure_row(k);
        if let Some(&(j, _)) = coeffs.iter().find(|&&(j, e)| e < 0.0 || yd.lower[j] < 0.0) {
            return Err(ReformulateError::NegativeCoefficient { row, component: k, y_index: j });
        }
        let boxed: f64 = coeffs.iter().map(|&(j, e)| e * yd.upper[j]).sum();
        let value = if boxed.is_finite() { boxed } else { max_over_y(problem, &coeffs, row, k)? };
        pibar.push(value.max(0.0));
    }
    Ok(PiBarBound { pibar })
}

/// Bounds for every row, in row order.
pub fn pibar_bounds(problem: &RobustLinearProblem) -> Result<Vec<PiBarBound>, ReformulateError> {
    (0..problem.rows.len()).map(|i| estimate_pibar(problem, i)).collect()
}

fn check_pibar_lhs(set: &PiBarUSet, row: usize) -> Result<(), ReformulateError> {
    for j in 0..set.lhs.rows() {
        for k in 0..set.lhs.cols() {
            let value = set.lhs.get(j, k);
            if value < 0.0 {
                return Err(ReformulateError::NegativeLhs { row, set_row: j, component: k, value });
            }
        }
    }
    Ok(())
}

fn max_over_y(
    problem: &RobustLinearProblem,
    coeffs: &[(usize, f64)],
    row: usize,
    component: usize,
) -> Result<f64, ReformulateError> {
    let (mut lp, _) = base_program(problem);
    lp.sense = Sense::Maximize;
    lp.objective.iter_mut().for_each(|c| *c = 0.0);
    for &(j, e) in coeffs {
        lp.objective[problem.n_x() + j] = e;
    }
    let r = solve_lp(&lp).map_err(ModelError::from)?;
    match r.status {
        LpStatus::Optimal => Ok(r.objective_value),
        LpStatus::Unbounded => Err(ReformulateError::UnboundedDual { row, component }),
        LpStatus::Infeasible => Err(ModelError::Invalid("y domain is empty".into()).into()),
    }
}

/// Counterpart that splits each PiBar set into a reducible and a base part,
/// so the only coupling with `x` is the term `pibar_k x_k`.
pub fn build_pibar_counterpart(
    problem: &RobustLinearProblem,
    bounds: &[PiBarBound],
) -> Result<Counterpart, ReformulateError> {
    problem.validate()?;
    if bounds.len() != problem.rows.len() {
        return Err(ReformulateError::BoundCount { expected: problem.rows.len(), got: bounds.len() });
    }
    check_nonempty(problem)?;
    let n = problem.n_x();
    let (mut lp, mut binary) = base_program(problem);
    let base_rows = lp.num_rows();
    let mut blocks = Vec::new();
    for (i, row) in problem.rows.iter().enumerate() {
        let UncertaintySet::PiBar(set) = &row.set else {
            return Err(ReformulateError::NotPiBar { row: i });
        };
        let pibar = &bounds[i].pibar;
        if pibar.len() != set.dim() {
            return Err(ReformulateError::BoundLength { row: i, expected: set.dim(), got: pibar.len() });
        }
        let m = set.lhs.rows();
        let t: Vec<usize> = (0..m).map(|_| lp.add_variable(0.0, 0.0, f64::INFINITY)).collect();
        let s: Vec<usize> = (0..n).map(|_| lp.add_variable(0.0, 0.0, f64::INFINITY)).collect();
        let r: Vec<usize> = (0..n).map(|_| lp.add_variable(0.0, 0.0, f64::INFINITY)).collect();
        binary.resize(lp.num_vars(), false);

        let mut main = certain_coeffs(problem, i);
        main.extend(t.iter().zip(&set.rhs).map(|(&c, &d)| (c, d)));
        main.extend(r.iter().zip(&set.reducible).map(|(&c, &w)| (c, w)));
        main.extend(s.iter().zip(&set.base).map(|(&c, &v)| (c, v)));
        main.retain(|&(_, a)| a != 0.0);
        let main_row = lp.add_constraint(main, RowSense::Le, row.rhs);

        for k in 0..n {
            let mut common: Vec<(usize, f64)> =
                (0..m).filter(|&j| set.lhs.get(j, k) != 0.0).map(|j| (t[j], set.lhs.get(j, k))).collect();
            common.extend(row.exposure_row(k).into_iter().map(|(l, e)| (n + l, -e)));
            let mut srow = common.clone();
            srow.push((s[k], 1.0));
            lp.add_constraint(srow, RowSense::Ge, 0.0);
            let mut rrow = common;
            rrow.push((r[k], 1.0));
            if pibar[k] != 0.0 {
                rrow.push((k, pibar[k]));
            }
            lp.add_constraint(rrow, RowSense::Ge, 0.0);
        }
        let mut dual_cols = t;
        dual_cols.extend(s);
        dual_cols.extend(r);
        blocks.push(RowBlock { main_row, dual_cols, products: Vec::new() });
    }
    Ok(Counterpart {
        mip: MixedIntegerProgram::new(lp, binary),
        formulation: Formulation::PiBar,
        support: Support::Sparse,
        big_m: None,
        n_x: n,
        n_y: problem.n_y(),
        base_rows,
        blocks,
    })
}

/// Set data in polyhedral form, with optional explicit sign rows.
struct PolyView {
    lhs: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    influence: Vec<Vec<f64>>,
    dim: usize,
    ge_duals: bool,
}

fn poly_view(set: &UncertaintySet, n: usize, support: Support) -> PolyView {
    let poly = set.to_poly();
    let dim = poly.dim();
    let mut lhs = poly.lhs.to_rows();
    let mut rhs = poly.rhs.clone();
    let mut influence: Vec<Vec<f64>> =
        if poly.num_rows() == 0 { Vec::new() } else { poly.influence.to_rows() };
    let mut ge_duals = poly.nonnegative;
    if support == Support::Dense && poly.nonnegative {
        for k in 0..dim {
            let mut row = vec![0.0; dim];
            row[k] = -1.0;
            lhs.push(row);
            rhs.push(0.0);
            influence.push(vec![0.0; n]);
        }
        ge_duals = false;
    }
    PolyView { lhs, rhs, influence, dim, ge_duals }
}

/// Emits `sum_j D_jc pi_j - (E y)_c (= or >=) 0` for each component `c`.
fn add_dual_rows(
    lp: &mut LinearProgram,
    view: &PolyView,
    pi: &[usize],
    problem: &RobustLinearProblem,
    i: usize,
) {
    let n = problem.n_x();
    let sense = if view.ge_duals { RowSense::Ge } else { RowSense::Eq };
    for c in 0..view.dim {
        let mut coeffs: Vec<(usize, f64)> =
            (0..pi.len()).filter(|&j| view.lhs[j][c] != 0.0).map(|j| (pi[j], view.lhs[j][c])).collect();
        coeffs.extend(problem.rows[i].exposure_row(c).into_iter().map(|(l, e)| (n + l, -e)));
        lp.add_constraint(coeffs, sense, 0.0);
    }
}

fn check_m(big_m: f64) -> Result<(), ReformulateError> {
    if !(big_m >= 0.0) || !big_m.is_finite() {
        return Err(ReformulateError::BadBigM(big_m));
    }
    Ok(())
}

/// Dualizes each set and linearizes every product `pi_j x_k` with `M`.
pub fn build_bigm_counterpart(
    problem: &RobustLinearProblem,
    big_m: f64,
    support: Support,
) -> Result<Counterpart, ReformulateError> {
    problem.validate()?;
    check_m(big_m)?;
    check_nonempty(problem)?;
    let n = problem.n_x();
    let (mut lp, mut binary) = base_program(problem);
    let base_rows = lp.num_rows();
    let mut blocks = Vec::new();
    for (i, row) in problem.rows.iter().enumerate() {
        let view = poly_view(&row.set, n, support);
        let kk = view.lhs.len();
        let pi: Vec<usize> = (0..kk).map(|_| lp.add_variable(0.0, 0.0, f64::INFINITY)).collect();
        let mut products = Vec::new();
        for j in 0..kk {
            for k in 0..n {
                let coeff = view.influence[j][k];
                if support == Support::Dense || coeff != 0.0 {
                    let col = lp.add_variable(0.0, 0.0, f64::INFINITY);
                    products.push(Product { col, dual_col: pi[j], set_row: j, component: k, coeff });
                }
            }
        }
        binary.resize(lp.num_vars(), false);

        let mut main = certain_coeffs(problem, i);
        main.extend((0..kk).filter(|&j| view.rhs[j] != 0.0).map(|j| (pi[j], view.rhs[j])));
        main.extend(products.iter().filter(|p| p.coeff != 0.0).map(|p| (p.col, p.coeff)));
        let main_row = lp.add_constraint(main, RowSense::Le, row.rhs);
        add_dual_rows(&mut lp, &view, &pi, problem, i);
        for p in &products {
            lp.add_constraint(vec![(p.col, 1.0), (p.component, -big_m)], RowSense::Le, 0.0);
            lp.add_constraint(vec![(p.col, 1.0), (p.dual_col, -1.0)], RowSense::Le, 0.0);
            lp.add_constraint(vec![(p.col, 1.0), (p.dual_col, -1.0), (p.component, -big_m)], RowSense::Ge, -big_m);
        }
        blocks.push(RowBlock { main_row, dual_cols: pi, products });
    }
    Ok(Counterpart {
        mip: MixedIntegerProgram::new(lp, binary),
        formulation: Formulation::BigM,
        support,
        big_m: Some(big_m),
        n_x: n,
        n_y: problem.n_y(),
        base_rows,
        blocks,
    })
}

/// Dualizes each set and bounds every product `Delta_jk pi_j x_k` from
/// below only.
///
/// An entry with `Delta_jk < 0` is rewritten through `x_k = 1 - (1 - x_k)`:
/// its constant part joins the coefficient of `pi_j` and the remainder is a
/// nonnegative product with `1 - x_k`. Every sign pattern is therefore
/// admissible.
pub fn build_modified_bigm_counterpart(
    problem: &RobustLinearProblem,
    big_m: f64,
) -> Result<Counterpart, ReformulateError> {
    problem.validate()?;
    check_m(big_m)?;
    check_nonempty(problem)?;
    let n = problem.n_x();
    let (mut lp, mut binary) = base_program(problem);
    let base_rows = lp.num_rows();
    let mut blocks = Vec::new();
    for (i, row) in problem.rows.iter().enumerate() {
        let view = poly_view(&row.set, n, Support::Sparse);
        let kk = view.lhs.len();
        let pi: Vec<usize> = (0..kk).map(|_| lp.add_variable(0.0, 0.0, f64::INFINITY)).collect();
        let mut products = Vec::new();
        let mut pi_coeff = view.rhs.clone();
        for j in 0..kk {
            for k in 0..n {
                let coeff = view.influence[j][k];
                if coeff != 0.0 {
                    let col = lp.add_variable(0.0, 0.0, f64::INFINITY);
                    products.push(Product { col, dual_col: pi[j], set_row: j, component: k, coeff });
                    if coeff < 0.0 {
                        pi_coeff[j] += coeff;
                    }
                }
            }
        }
        binary.resize(lp.num_vars(), false);

        let mut main = certain_coeffs(problem, i);
        main.extend((0..kk).filter(|&j| pi_coeff[j] != 0.0).map(|j| (pi[j], pi_coeff[j])));
        main.extend(products.iter().map(|p| (p.col, 1.0)));
        let main_row = lp.add_constraint(main, RowSense::Le, row.rhs);
        add_dual_rows(&mut lp, &view, &pi, problem, i);
        for p in &products {
            if p.coeff > 0.0 {
                lp.add_constraint(
                    vec![(p.col, 1.0), (p.dual_col, -p.coeff), (p.component, -big_m)],
                    RowSense::Ge,
                    -big_m,
                );
            } else {
                lp.add_constraint(
                    vec![(p.col, 1.0), (p.dual_col, p.coeff), (p.component, big_m)],
                    RowSense::Ge,
                    0.0,
                );
            }
        }
        blocks.push(RowBlock { main_row, dual_cols: pi, products });
    }
    Ok(Counterpart {
        mip: MixedIntegerProgram::new(lp, binary),
        formulation: Formulation::ModifiedBigM,
        support: Support::Sparse,
        big_m: Some(big_m),
        n_x: n,
        n_y: problem.n_y(),
        base_rows,
        blocks,
    })
}

/// Builds `formulation` with bounds and `M` chosen automatically.
pub fn build_counterpart(
    problem: &RobustLinearProblem,
    formulation: Formulation,
    support: Support,
) -> Result<Counterpart, ReformulateError> {
    match formulation {
        Formulation::PiBar => build_pibar_counterpart(problem, &pibar_bounds(problem)?),
        Formulation::BigM => build_bigm_counterpart(problem, choose_bigm(problem, formulation, support)?, support),
        Formulation::ModifiedBigM => {
            build_modified_bigm_counterpart(problem, choose_bigm(problem, formulation, support)?)
        }
    }
}

/// Linearization constant for `formulation`: [`BIGM_SAFETY`] times the
/// largest quantity each linearized product must be able to reach.
///
/// Standard Big-M caps every dual that appears in a product, so `M` must
/// dominate those duals. Modified Big-M caps `|Delta_jk| pi_j`. Duals are
/// bounded through [`estimate_pibar`], which needs PiBar sets; a general
/// polyhedral row is accepted only when none of its duals is linearized.
/// The PiBar formulation has no `M` and gets 0.
pub fn choose_bigm(
    problem: &RobustLinearProblem,
    formulation: Formulation,
    support: Support,
) -> Result<f64, ReformulateError> {
    problem.validate()?;
    let mut worst: f64 = 0.0;
    if formulation == Formulation::PiBar {
        return Ok(0.0);
    }
    let dense = formulation == Formulation::BigM && support == Support::Dense;
    for (i, row) in problem.rows.iter().enumerate() {
        match &row.set {
            UncertaintySet::PiBar(set) => {
                let pibar = estimate_pibar(problem, i)?.pibar;
                for k in 0..set.dim() {
                    match formulation {
                        Formulation::ModifiedBigM => worst = worst.max(pibar[k] * set.reducible[k]),
                        _ if dense || set.reducible[k] != 0.0 => worst = worst.max(pibar[k]),
                        _ => {}
                    }
                }
                if dense {
                    let t_bar: Vec<f64> = (0..set.lhs.rows())
                        .map(|j| {
                            (0..set.dim())
                                .filter(|&k| set.lhs.get(j, k) > 0.0)
                                .map(|k| pibar[k] / set.lhs.get(j, k))
                                .fold(0.0, f64::max)
                        })
                        .collect();
                    for (j, &tb) in t_bar.iter().enumerate() {
                        worst = worst.max(tb);
                        for k in 0..set.dim() {
                            // Duals of the explicit sign rows.
                            worst = worst.max(set.lhs.get(j, k) * tb + pibar[k]);
                        }
                    }
                }
            }
            UncertaintySet::Poly(set) => {
                let linearized = dense && set.num_rows() > 0 && problem.n_x() > 0;
                let coupled = set.num_rows() > 0 && (0..set.num_rows()).any(|j| set.influence.row(j).iter().any(|&d| d != 0.0));
                if linearized || coupled {
                    return Err(ReformulateError::UnboundedDual { row: i, component: 0 });
                }
            }
        }
    }
    Ok(BIGM_SAFETY * worst)
}

/// Which parts of a model [`formulation_size`] counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizeScope {
    /// The whole model, including `x`, `y` and their side constraints.
    Full,
    /// Only the columns and rows added for the robust rows.
    Counterpart,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FormulationSize {
    pub binaries: usize,
    pub continuous: usize,
    pub affine_rows: usize,
    /// Continuous columns restricted exactly to `[0, inf)`.
    pub sign_rows: usize,
}

pub fn mip_size(mip: &MixedIntegerProgram, first_col: usize, first_row: usize) -> FormulationSize {
    let lp = &mip.base;
    let mut size = FormulationSize { affine_rows: lp.num_rows() - first_row, ..Default::default() };
    for j in first_col..lp.num_vars() {
        if mip.binary[j] {
            size.binaries += 1;
        } else {
            size.continuous += 1;
            if lp.lower[j] == 0.0 && lp.upper[j] == f64::INFINITY {
                size.sign_rows += 1;
            }
        }
    }
    size
}

pub fn formulation_size(cp: &Counterpart, scope: SizeScope) -> FormulationSize {
    match scope {
        SizeScope::Full => mip_size(&cp.mip, 0, 0),
        SizeScope::Counterpart => mip_size(&cp.mip, cp.n_x + cp.n_y, cp.base_rows),
    }
}

/// Re-check of a Big-M style incumbent with exact products.
#[derive(Debug, Clone, PartialEq)]
pub struct BigMAudit {
    /// Largest violation of a robust row after replacing every linearized
    /// product by its exact value.
    pub max_row_violation: f64,
    /// The exact worst-case duals at the incumbent need a product above `M`,
    /// so the counterpart may have priced this decision too high.
    pub cap_active: bool,
    pub oracle_feasible: bool,
    pub oracle_min_slack: f64,
}

impl BigMAudit {
    pub fn passes(&self) -> bool {
        self.max_row_violation <= 1e-6 && !self.cap_active && self.oracle_feasible
    }
}

/// Audits an optimal incumbent of a Big-M or modified Big-M counterpart.
pub fn audit_bigm(
    problem: &RobustLinearProblem,
    cp: &Counterpart,
    sol: &CounterpartSolution,
) -> Result<BigMAudit, ReformulateError> {
    let big_m = cp.big_m.unwrap_or(f64::INFINITY);
    let v = &sol.incumbent;
    let (x, y) = (&sol.x, &sol.y);
    let mut max_row_violation: f64 = 0.0;
    let mut cap_active = false;
    for (i, block) in cp.blocks.iter().enumerate() {
        let row = &problem.rows[i];
        let view = poly_view(&row.set, cp.n_x, cp.support);
        let mut lhs = row.certain_lhs(x, y);
        for (j, &c) in block.dual_cols.iter().enumerate() {
            lhs += view.rhs[j] * v[c];
        }
        for p in &block.products {
            lhs += p.coeff * v[p.dual_col] * x[p.component];
        }
        max_row_violation = max_row_violation.max(lhs - row.rhs);

        let u = row.exposed(y);
        let exact = crate::oracle::worst_case_value(x, &u, &row.set)?.row_duals;
        let plain = exact.len();
        let mut duals = exact;
        // Duals of explicit sign rows are the surplus of the dual rows.
        for k in 0..view.lhs.len().saturating_sub(plain) {
            let surplus: f64 = (0..plain).map(|j| view.lhs[j][k] * duals[j]).sum::<f64>() - u[k];
            duals.push(surplus.max(0.0));
        }
        for p in &block.products {
            let reach = match cp.formulation {
                Formulation::ModifiedBigM => p.coeff.abs() * duals[p.set_row],
                _ => duals[p.set_row],
            };
            if reach > big_m * (1.0 + 1e-9) + 1e-9 {
                cap_active = true;
            }
        }
    }
    let report = robust_feasible(problem, x, y)?;
    Ok(BigMAudit {
        max_row_violation,
        cap_active,
        oracle_feasible: report.feasible,
        oracle_min_slack: report.min_slack(),
    })
}

/// Nominal objective of `(x, y)` for `problem`.
pub fn nominal_value(problem: &RobustLinearProblem, x: &[f64], y: &[f64]) -> f64 {
    dot(&problem.c, x) + dot(&problem.f, y)
}
