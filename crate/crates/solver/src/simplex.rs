//! Bounded revised simplex in computational form `[A | -I | R] z = 0`.
//!
//! Column `n + i` is the logical variable of row `i`, carrying the row's
//! bounds. Column `n + m + i` is the artificial of row `i`; artificials are
//! fixed at zero outside phase one.

use crate::lu::Factor;
use crate::problem::{LinearProgram, LpError, RowSense};

pub(crate) const FEAS_TOL: f64 = 1e-9;
pub(crate) const OPT_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const REFACTOR_ETAS: usize = 64;
const POLISH_ETAS: usize = 16;
/// Consecutive degenerate primal pivots before bounds are widened.
const PERTURB_AFTER: usize = 50;
const PERTURBATION: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum VarState {
    Basic,
    Lower,
    Upper,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Outcome {
    Optimal,
    Infeasible,
    Unbounded,
}

pub(crate) struct Engine {
    m: usize,
    n: usize,
    col_start: Vec<usize>,
    col_row: Vec<usize>,
    col_val: Vec<f64>,
    row_start: Vec<usize>,
    row_col: Vec<usize>,
    row_val: Vec<f64>,
    art_sign: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    obj: Vec<f64>,
    state: Vec<VarState>,
    head: Vec<usize>,
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
    factor: Factor,
    /// The factorization (with its etas) matches `head`.
    factor_current: bool,
    row_acc: Vec<f64>,
    row_seen: Vec<bool>,
    row_nz: Vec<usize>,
    perturbed: Vec<bool>,
    saved_bounds: Vec<(usize, f64, f64)>,
    iter_limit: usize,
    /// Pivots over the engine's lifetime.
    pub iterations: usize,
    solve_start: usize,
    /// Consecutive degenerate pivots tolerated before Bland's rule; `Some(0)`
    /// uses Bland's rule throughout.
    pub bland_after: Option<usize>,
}

impl Engine {
    /// Builds the computational form; objective is converted to minimization.
    pub fn new(lp: &LinearProgram) -> Engine {
        let m = lp.num_rows();
        let n = lp.num_vars();
        let mut counts = vec![0usize; n + 1];
        for row in &lp.constraints {
            for &(j, _) in &row.coeffs {
                counts[j + 1] += 1;
            }
        }
        for j in 0..n {
            counts[j + 1] += counts[j];
        }
        let col_start = counts.clone();
        let mut fill = counts;
        let nnz = col_start[n];
        let mut col_row = vec![0usize; nnz];
        let mut col_val = vec![0.0; nnz];
        for (i, row) in lp.constraints.iter().enumerate() {
            for &(j, v) in &row.coeffs {
                col_row[fill[j]] = i;
                col_val[fill[j]] = v;
                fill[j] += 1;
            }
        }
        let mut row_start = Vec::with_capacity(m + 1);
        let mut row_col = Vec::with_capacity(nnz);
        let mut row_val = Vec::with_capacity(nnz);
        row_start.push(0);
        for row in &lp.constraints {
            for &(j, v) in &row.coeffs {
                row_col.push(j);
                row_val.push(v);
            }
            row_start.push(row_col.len());
        }
        let ncols = n + 2 * m;
        let mut lower = Vec::with_capacity(ncols);
        let mut upper = Vec::with_capacity(ncols);
        lower.extend_from_slice(&lp.lower);
        upper.extend_from_slice(&lp.upper);
        for row in &lp.constraints {
            let (lo, hi) = match row.sense {
                RowSense::Le => (f64::NEG_INFINITY, row.rhs),
                RowSense::Ge => (row.rhs, f64::INFINITY),
                RowSense::Eq => (row.rhs, row.rhs),
            };
            lower.push(lo);
            upper.push(hi);
        }
        lower.extend(std::iter::repeat(0.0).take(m));
        upper.extend(std::iter::repeat(0.0).take(m));
        let s = lp.sense.sign();
        let obj: Vec<f64> = lp.objective.iter().map(|c| s * c).collect();
        let (factor, _) = Factor::new(m, |p, out| out.push((p, -1.0)));
        Engine {
            m,
            n,
            col_start,
            col_row,
            col_val,
            row_start,
            row_col,
            row_val,
            art_sign: vec![1.0; m],
            lower,
            upper,
            cost: vec![0.0; ncols],
            obj,
            state: vec![VarState::Lower; ncols],
            head: (n..n + m).collect(),
            x: vec![0.0; ncols],
            y: vec![0.0; m],
            d: vec![0.0; ncols],
            factor,
            factor_current: true,
            row_acc: vec![0.0; n],
            row_seen: vec![false; n],
            row_nz: Vec::new(),
            perturbed: vec![false; ncols],
            saved_bounds: Vec::new(),
            iter_limit: 50 * (m + n) + 20_000,
            iterations: 0,
            solve_start: 0,
            bland_after: None,
        }
    }

    fn ncols(&self) -> usize {
        self.n + 2 * self.m
    }

    #[inline]
    fn for_col<F: FnMut(usize, f64)>(&self, j: usize, mut f: F) {
        if j < self.n {
            for t in self.col_start[j]..self.col_start[j + 1] {
                f(self.col_row[t], self.col_val[t]);
            }
        } else if j < self.n + self.m {
            f(j - self.n, -1.0);
        } else {
            let i = j - self.n - self.m;
            f(i, self.art_sign[i]);
        }
    }

    #[inline]
    fn dot_col(&self, j: usize, v: &[f64]) -> f64 {
        if j < self.n {
            let mut s = 0.0;
            for t in self.col_start[j]..self.col_start[j + 1] {
                s += self.col_val[t] * v[self.col_row[t]];
            }
            s
        } else if j < self.n + self.m {
            -v[j - self.n]
        } else {
            let i = j - self.n - self.m;
            self.art_sign[i] * v[i]
        }
    }

    fn is_fixed(&self, j: usize) -> bool {
        self.lower[j] == self.upper[j]
    }

    fn nonbasic_state(&self, j: usize, hint: f64) -> VarState {
        let (lo, hi) = (self.lower[j], self.upper[j]);
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) => {
                if (hint - lo).abs() <= (hi - hint).abs() {
                    VarState::Lower
                } else {
                    VarState::Upper
                }
            }
            (true, false) => VarState::Lower,
            (false, true) => VarState::Upper,
            (false, false) => VarState::Zero,
        }
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.state[j] {
            VarState::Lower => self.lower[j],
            VarState::Upper => self.upper[j],
            VarState::Zero | VarState::Basic => 0.0,
        }
    }

    /// Sets the bounds of structural `j`, moving it to a bound if nonbasic.
    /// Primal values are stale until `compute_primal`.
    pub fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        self.lower[j] = lo;
        self.upper[j] = hi;
        if self.state[j] != VarState::Basic {
            let st = match self.state[j] {
                VarState::Upper if hi.is_finite() => VarState::Upper,
                _ => self.nonbasic_state(j, f64::NEG_INFINITY),
            };
            self.state[j] = st;
            self.x[j] = self.nonbasic_value(j);
        }
    }

    fn refactor(&mut self) {
        let (factor, replacements) = {
            let head = &self.head;
            let this = &*self;
            Factor::new(self.m, |p, out| this.for_col(head[p], |i, v| out.push((i, v))))
        };
        self.factor = factor;
        for (p, r) in replacements {
            let old = self.head[p];
            let logical = self.n + r;
            let col = if self.state[logical] == VarState::Basic {
                let art = self.n + self.m + r;
                self.art_sign[r] = -1.0;
                art
            } else {
                logical
            };
            self.state[old] = self.nonbasic_state(old, self.x[old]);
            self.x[old] = self.nonbasic_value(old);
            self.head[p] = col;
            self.state[col] = VarState::Basic;
        }
        self.factor_current = true;
        self.compute_primal();
    }

    /// Recomputes basic values from nonbasic ones.
    pub fn compute_primal(&mut self) {
        let mut rhs = vec![0.0; self.m];
        for j in 0..self.ncols() {
            if self.state[j] != VarState::Basic {
                let v = self.nonbasic_value(j);
                self.x[j] = v;
                if v != 0.0 {
                    self.for_col(j, |i, a| rhs[i] -= a * v);
                }
            }
        }
        self.factor.ftran(&mut rhs);
        for p in 0..self.m {
            self.x[self.head[p]] = rhs[p];
        }
    }

    fn compute_duals(&mut self) {
        let mut cb: Vec<f64> = self.head.iter().map(|&j| self.cost[j]).collect();
        self.factor.btran(&mut cb);
        self.y = cb;
        for j in 0..self.ncols() {
            self.d[j] = if self.state[j] == VarState::Basic {
                0.0
            } else {
                self.cost[j] - self.dot_col(j, &self.y)
            };
        }
    }

    fn ftran_col(&self, j: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.m];
        self.for_col(j, |i, a| v[i] += a);
        self.factor.ftran(&mut v);
        v
    }

    fn maybe_refactor(&mut self) -> bool {
        let big = self.factor.eta_nnz() > 4 * self.factor.factor_nnz() + 10 * self.m;
        if self.factor.num_etas() >= REFACTOR_ETAS || big {
            self.refactor();
            true
        } else {
            false
        }
    }

    fn tick(&mut self) -> Result<(), LpError> {
        self.iterations += 1;
        if self.iterations - self.solve_start > self.iter_limit {
            return Err(LpError::Numerical(format!(
                "iteration limit {} exceeded",
                self.iter_limit
            )));
        }
        Ok(())
    }

    fn set_phase_two_costs(&mut self) {
        for j in 0..self.ncols() {
            self.cost[j] = if j < self.n { self.obj[j] } else { 0.0 };
        }
    }

    /// Largest bound violation among basic variables.
    fn primal_infeasibility(&self) -> f64 {
        self.head
            .iter()
            .map(|&j| (self.lower[j] - self.x[j]).max(self.x[j] - self.upper[j]).max(0.0))
            .fold(0.0, f64::max)
    }

    fn dual_infeasibility(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.ncols() {
            if self.is_fixed(j) {
                continue;
            }
            let v = match self.state[j] {
                VarState::Basic => 0.0,
                VarState::Lower => -self.d[j],
                VarState::Upper => self.d[j],
                VarState::Zero => self.d[j].abs(),
            };
            worst = worst.max(v);
        }
        worst
    }

    /// Solves from the slack basis with a two-phase primal simplex.
    pub fn solve_cold(&mut self) -> Result<Outcome, LpError> {
        self.solve_start = self.iterations;
        let (n, m) = (self.n, self.m);
        for j in 0..n {
            self.state[j] = self.nonbasic_state(j, 0.0);
            self.x[j] = self.nonbasic_value(j);
        }
        for i in 0..m {
            let art = n + m + i;
            self.lower[art] = 0.0;
            self.upper[art] = 0.0;
            self.state[art] = VarState::Lower;
            self.x[art] = 0.0;
            self.art_sign[i] = 1.0;
        }
        let mut activity = vec![0.0; m];
        for j in 0..n {
            let v = self.x[j];
            if v != 0.0 {
                for t in self.col_start[j]..self.col_start[j + 1] {
                    activity[self.col_row[t]] += self.col_val[t] * v;
                }
            }
        }
        let mut any_artificial = false;
        for i in 0..m {
            let logical = n + i;
            let art = n + m + i;
            let a = activity[i];
            let (lo, hi) = (self.lower[logical], self.upper[logical]);
            let target = if a < lo - FEAS_TOL {
                Some((lo, VarState::Lower))
            } else if a > hi + FEAS_TOL {
                Some((hi, VarState::Upper))
            } else {
                None
            };
            match target {
                Some((bound, st)) => {
                    any_artificial = true;
                    let sign = if bound - a >= 0.0 { 1.0 } else { -1.0 };
                    self.art_sign[i] = sign;
                    self.state[logical] = if lo == hi { VarState::Lower } else { st };
                    self.x[logical] = bound;
                    self.upper[art] = f64::INFINITY;
                    self.state[art] = VarState::Basic;
                    self.x[art] = (bound - a) / sign;
                    self.head[i] = art;
                }
                None => {
                    self.state[logical] = VarState::Basic;
                    self.x[logical] = a;
                    self.head[i] = logical;
                }
            }
        }
        self.refactor();
        if any_artificial {
            for j in 0..self.ncols() {
                self.cost[j] = if j >= n + m && self.upper[j] > 0.0 { 1.0 } else { 0.0 };
            }
            self.primal_pass(false, false)?;
            self.refactor();
            let residual: f64 = (0..m).map(|i| self.x[n + m + i].max(0.0)).sum();
            let scale = 1.0 + activity.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if residual > 10.0 * FEAS_TOL * scale || self.primal_infeasibility() > 1e-7 {
                return Ok(Outcome::Infeasible);
            }
            for i in 0..m {
                let art = n + m + i;
                self.upper[art] = 0.0;
                if self.state[art] != VarState::Basic {
                    self.state[art] = VarState::Lower;
                    self.x[art] = 0.0;
                }
            }
            self.compute_primal();
        }
        self.set_phase_two_costs();
        let outcome = self.primal_simplex(false)?;
        if outcome != Outcome::Optimal {
            return Ok(outcome);
        }
        self.polish()
    }

    /// Reoptimizes after bound changes starting from the current basis.
    pub fn solve_warm(&mut self) -> Result<Outcome, LpError> {
        self.solve_start = self.iterations;
        for j in 0..self.n {
            if self.lower[j] > self.upper[j] + FEAS_TOL {
                return Ok(Outcome::Infeasible);
            }
        }
        self.set_phase_two_costs();
        if self.factor_current {
            self.compute_primal();
        } else {
            self.refactor();
        }
        self.compute_duals();
        if self.dual_infeasibility() <= OPT_TOL {
            match self.dual_simplex(true)? {
                Outcome::Optimal => self.polish(),
                other => Ok(other),
            }
        } else if self.primal_infeasibility() <= FEAS_TOL {
            match self.primal_simplex(true)? {
                Outcome::Optimal => self.polish(),
                other => Ok(other),
            }
        } else {
            self.solve_cold()
        }
    }

    /// Alternates primal and dual passes until both residuals are small
    /// after a fresh factorization.
    fn polish(&mut self) -> Result<Outcome, LpError> {
        for pass in 0..4 {
            // A short eta file is accurate enough to recompute residuals.
            if pass == 0 && self.factor.num_etas() <= POLISH_ETAS {
                self.compute_primal();
            } else {
                self.refactor();
            }
            self.compute_duals();
            let pinf = self.primal_infeasibility();
            let dinf = self.dual_infeasibility();
            if pinf <= FEAS_TOL && dinf <= OPT_TOL {
                return Ok(Outcome::Optimal);
            }
            if pinf > FEAS_TOL && dinf <= OPT_TOL {
                let out = self.dual_simplex(true)?;
                if out != Outcome::Optimal {
                    return Ok(out);
                }
            } else if pinf <= FEAS_TOL {
                let out = self.primal_simplex(true)?;
                if out != Outcome::Optimal {
                    return Ok(out);
                }
            } else {
                return Err(LpError::Numerical("basis lost primal and dual feasibility".into()));
            }
        }
        self.refactor();
        self.compute_duals();
        if self.primal_infeasibility() <= 1e-7 && self.dual_infeasibility() <= 1e-7 {
            Ok(Outcome::Optimal)
        } else {
            Err(LpError::Numerical("residuals did not settle".into()))
        }
    }

    /// Phase-two primal simplex. Stalling passes widen the bounds of basic
    /// variables slightly; the original bounds are restored at the end and
    /// the dual simplex removes the resulting small infeasibilities.
    fn primal_simplex(&mut self, fresh: bool) -> Result<Outcome, LpError> {
        let allow = self.bland_after != Some(0);
        let outcome = self.primal_pass(allow, fresh);
        if self.saved_bounds.is_empty() {
            return outcome;
        }
        for (j, lo, hi) in std::mem::take(&mut self.saved_bounds) {
            self.lower[j] = lo;
            self.upper[j] = hi;
            self.perturbed[j] = false;
        }
        let outcome = outcome?;
        self.compute_primal();
        if outcome != Outcome::Optimal || self.primal_infeasibility() <= FEAS_TOL {
            return Ok(outcome);
        }
        self.dual_simplex(false)
    }

    /// Widens the bounds of basic variables not already widened.
    fn perturb_basics(&mut self) {
        for p in 0..self.m {
            let j = self.head[p];
            if j >= self.n + self.m || self.perturbed[j] || self.is_fixed(j) {
                continue;
            }
            self.perturbed[j] = true;
            self.saved_bounds.push((j, self.lower[j], self.upper[j]));
            // Deterministic spread in [1, 2) so ties between rows break.
            let spread = 1.0 + ((j as f64) * 0.618_033_988_75).fract();
            if self.lower[j].is_finite() {
                self.lower[j] -= PERTURBATION * spread * (1.0 + self.lower[j].abs());
            }
            if self.upper[j].is_finite() {
                self.upper[j] += PERTURBATION * spread * (1.0 + self.upper[j].abs());
            }
        }
    }

    /// `fresh` means `y` and `d` already match the current basis and costs.
    fn primal_pass(&mut self, perturb: bool, mut fresh: bool) -> Result<Outcome, LpError> {
        let degenerate_limit = self.bland_after.unwrap_or(3 * (self.m + self.n));
        // Once engaged, Bland's rule stays on for the rest of the pass so a
        // degenerate vertex is not re-entered under Dantzig pricing.
        let mut degenerate = 0usize;
        let mut bland = degenerate_limit == 0;
        // Reduced costs are updated from the pivot row between
        // refactorizations and recomputed before optimality is declared.
        loop {
            if self.maybe_refactor() || !fresh {
                self.compute_duals();
                fresh = true;
            }
            let mut entering = None;
            let mut best = 0.0;
            for j in 0..self.ncols() {
                let st = self.state[j];
                if st == VarState::Basic || self.is_fixed(j) {
                    continue;
                }
                let dj = self.d[j];
                let dir = if dj < -OPT_TOL && matches!(st, VarState::Lower | VarState::Zero) {
                    1.0
                } else if dj > OPT_TOL && matches!(st, VarState::Upper | VarState::Zero) {
                    -1.0
                } else {
                    continue;
                };
                if bland {
                    entering = Some((j, dir));
                    break;
                }
                if dj.abs() > best {
                    best = dj.abs();
                    entering = Some((j, dir));
                }
            }
            let Some((q, dir)) = entering else {
                if fresh {
                    return Ok(Outcome::Optimal);
                }
                self.compute_duals();
                fresh = true;
                continue;
            };
            self.tick()?;
            let alpha = self.ftran_col(q);
            let flip = self.upper[q] - self.lower[q];
            let mut theta_h = f64::INFINITY;
            for p in 0..self.m {
                let a = alpha[p];
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                let j = self.head[p];
                let delta = -dir * a;
                let r = if delta < 0.0 {
                    if !self.lower[j].is_finite() {
                        continue;
                    }
                    (self.x[j] - self.lower[j] + FEAS_TOL) / -delta
                } else {
                    if !self.upper[j].is_finite() {
                        continue;
                    }
                    (self.upper[j] - self.x[j] + FEAS_TOL) / delta
                };
                theta_h = theta_h.min(r);
            }
            let mut leave: Option<(usize, f64)> = None;
            let mut leave_score = f64::NEG_INFINITY;
            for p in 0..self.m {
                let a = alpha[p];
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                let j = self.head[p];
                let delta = -dir * a;
                let r = if delta < 0.0 {
                    if !self.lower[j].is_finite() {
                        continue;
                    }
                    (self.x[j] - self.lower[j]) / -delta
                } else {
                    if !self.upper[j].is_finite() {
                        continue;
                    }
                    (self.upper[j] - self.x[j]) / delta
                };
                if r > theta_h {
                    continue;
                }
                let score = if bland { -(j as f64) } else { a.abs() };
                if score > leave_score {
                    leave_score = score;
                    leave = Some((p, r.max(0.0)));
                }
            }
            let step = match leave {
                Some((_, r)) if r < flip => r,
                _ if flip.is_finite() => flip,
                _ => return Ok(Outcome::Unbounded),
            };
            if step * self.d[q].abs() <= 1e-12 {
                degenerate += 1;
                if perturb && !bland && degenerate % PERTURB_AFTER == 0 {
                    self.perturb_basics();
                }
                if degenerate > degenerate_limit {
                    bland = true;
                }
            } else {
                degenerate = 0;
            }
            self.x[q] += dir * step;
            for p in 0..self.m {
                if alpha[p] != 0.0 {
                    self.x[self.head[p]] -= dir * alpha[p] * step;
                }
            }
            match leave {
                Some((p, r)) if r < flip => {
                    let mut rho = vec![0.0; self.m];
                    rho[p] = 1.0;
                    self.factor.btran(&mut rho);
                    let theta_d = self.d[q] / alpha[p];
                    for (j, a) in self.pivot_row(&rho) {
                        self.d[j] -= theta_d * a;
                    }
                    let j = self.head[p];
                    self.d[j] = -theta_d;
                    self.d[q] = 0.0;
                    fresh = false;
                    let delta = -dir * alpha[p];
                    if delta < 0.0 {
                        self.state[j] = VarState::Lower;
                        self.x[j] = self.lower[j];
                    } else {
                        self.state[j] = VarState::Upper;
                        self.x[j] = self.upper[j];
                    }
                    if self.is_fixed(j) {
                        self.state[j] = VarState::Lower;
                    }
                    self.head[p] = q;
                    self.state[q] = VarState::Basic;
                    self.factor.push_eta(p, &alpha);
                }
                _ => {
                    self.state[q] = if dir > 0.0 { VarState::Upper } else { VarState::Lower };
                    self.x[q] = self.nonbasic_value(q);
                }
            }
        }
    }

    /// Dual simplex from a dual feasible basis; `fresh` means `y` and `d`
    /// already match the current basis and costs.
    fn dual_simplex(&mut self, fresh: bool) -> Result<Outcome, LpError> {
        let degenerate_limit = self.bland_after.unwrap_or(3 * (self.m + self.n));
        let mut degenerate = 0usize;
        let mut bland = degenerate_limit == 0;
        if !fresh {
            self.compute_duals();
        }
        // Devex reference weights per basis position.
        let mut weight = vec![1.0; self.m];
        loop {
            self.tick()?;
            if self.maybe_refactor() {
                self.compute_duals();
            }
            let mut leave = None;
            let mut worst = 0.0;
            for p in 0..self.m {
                let j = self.head[p];
                let v = (self.lower[j] - self.x[j]).max(self.x[j] - self.upper[j]);
                if v <= FEAS_TOL {
                    continue;
                }
                if bland {
                    if leave.map_or(true, |(_, jj)| j < jj) {
                        leave = Some((p, j));
                    }
                } else if v * v > worst * weight[p] {
                    worst = v * v / weight[p];
                    leave = Some((p, j));
                }
            }
            let Some((r, jl)) = leave else {
                return Ok(Outcome::Optimal);
            };
            let to_lower = self.x[jl] < self.lower[jl];
            let sigma = if to_lower { 1.0 } else { -1.0 };
            let mut rho = vec![0.0; self.m];
            rho[r] = 1.0;
            self.factor.btran(&mut rho);
            let row = self.pivot_row(&rho);
            let mut theta_h = f64::INFINITY;
            for &(j, a) in &row {
                let st = self.state[j];
                let eligible = match st {
                    VarState::Lower => sigma * a < 0.0,
                    VarState::Upper => sigma * a > 0.0,
                    _ => true,
                };
                if !eligible {
                    continue;
                }
                let slack = match st {
                    VarState::Lower => self.d[j],
                    VarState::Upper => -self.d[j],
                    _ => self.d[j].abs(),
                };
                theta_h = theta_h.min((slack.max(0.0) + OPT_TOL) / a.abs());
            }
            let mut entering: Option<(usize, f64, f64)> = None;
            let mut score_best = f64::NEG_INFINITY;
            for &(j, a) in &row {
                let st = self.state[j];
                let eligible = match st {
                    VarState::Lower => sigma * a < 0.0,
                    VarState::Upper => sigma * a > 0.0,
                    _ => true,
                };
                if !eligible {
                    continue;
                }
                let slack = match st {
                    VarState::Lower => self.d[j],
                    VarState::Upper => -self.d[j],
                    _ => self.d[j].abs(),
                };
                let ratio = slack.max(0.0) / a.abs();
                if ratio > theta_h {
                    continue;
                }
                let score = if bland { -(j as f64) } else { a.abs() };
                if score > score_best {
                    score_best = score;
                    entering = Some((j, a, ratio));
                }
            }
            let Some((q, a_rq, t)) = entering else {
                return Ok(Outcome::Infeasible);
            };
            let alpha = self.ftran_col(q);
            if (alpha[r] - a_rq).abs() > 1e-7 * (1.0 + a_rq.abs()) {
                self.refactor();
                self.compute_duals();
                continue;
            }
            if t <= 1e-12 {
                degenerate += 1;
                if degenerate > degenerate_limit {
                    bland = true;
                }
            } else {
                degenerate = 0;
            }
            let theta_d = -sigma * t;
            for &(j, a) in &row {
                self.d[j] -= theta_d * a;
            }
            self.d[jl] = -theta_d;
            self.d[q] = 0.0;
            let bound = if to_lower { self.lower[jl] } else { self.upper[jl] };
            let delta_q = (self.x[jl] - bound) / alpha[r];
            self.x[q] += delta_q;
            for p in 0..self.m {
                if alpha[p] != 0.0 {
                    self.x[self.head[p]] -= alpha[p] * delta_q;
                }
            }
            self.x[jl] = bound;
            self.state[jl] = if to_lower || self.is_fixed(jl) {
                VarState::Lower
            } else {
                VarState::Upper
            };
            let (ar, wr) = (alpha[r], weight[r]);
            for p in 0..self.m {
                let a = alpha[p];
                if a != 0.0 && p != r {
                    weight[p] = weight[p].max((a / ar) * (a / ar) * wr);
                }
            }
            weight[r] = (wr / (ar * ar)).max(1.0);
            self.head[r] = q;
            self.state[q] = VarState::Basic;
            self.factor.push_eta(r, &alpha);
        }
    }

    /// Entries of `rho^T [A | -I | R]` above the pivot tolerance over
    /// nonbasic, non-fixed columns, in column order.
    fn pivot_row(&mut self, rho: &[f64]) -> Vec<(usize, f64)> {
        let (n, m) = (self.n, self.m);
        for (i, &r) in rho.iter().enumerate() {
            if r == 0.0 {
                continue;
            }
            for t in self.row_start[i]..self.row_start[i + 1] {
                let j = self.row_col[t];
                if !self.row_seen[j] {
                    self.row_seen[j] = true;
                    self.row_nz.push(j);
                }
                self.row_acc[j] += r * self.row_val[t];
            }
        }
        self.row_nz.sort_unstable();
        let mut row = Vec::with_capacity(self.row_nz.len());
        let keep = |j: usize, this: &Self| this.state[j] != VarState::Basic && !this.is_fixed(j);
        for &j in &self.row_nz {
            let a = self.row_acc[j];
            if a.abs() > PIVOT_TOL && keep(j, self) {
                row.push((j, a));
            }
        }
        for &j in &self.row_nz {
            self.row_acc[j] = 0.0;
            self.row_seen[j] = false;
        }
        self.row_nz.clear();
        for (i, &r) in rho.iter().enumerate() {
            if r.abs() > PIVOT_TOL && keep(n + i, self) {
                row.push((n + i, -r));
            }
        }
        for (i, &r) in rho.iter().enumerate() {
            let a = self.art_sign[i] * r;
            if a.abs() > PIVOT_TOL && keep(n + m + i, self) {
                row.push((n + m + i, a));
            }
        }
        row
    }

    /// Structural primal values.
    pub fn primal(&self) -> Vec<f64> {
        self.x[..self.n].to_vec()
    }

    /// Internal (minimization) objective.
    pub fn objective(&self) -> f64 {
        self.obj.iter().zip(&self.x).map(|(c, v)| c * v).sum()
    }

    /// Row duals and structural reduced costs in the internal sense.
    pub fn duals(&mut self) -> (Vec<f64>, Vec<f64>) {
        self.set_phase_two_costs();
        self.compute_duals();
        (self.y.clone(), self.d[..self.n].to_vec())
    }

    /// Snapshot of all column states.
    pub fn basis(&self) -> Vec<VarState> {
        self.state.clone()
    }

    /// Restores a snapshot taken from an engine of the same shape.
    pub fn restore(&mut self, basis: &[VarState]) -> bool {
        let count = basis.iter().filter(|s| **s == VarState::Basic).count();
        if count != self.m || basis.len() != self.ncols() {
            return false;
        }
        self.state.copy_from_slice(basis);
        self.factor_current = false;
        let mut p = 0;
        for j in 0..self.ncols() {
            if self.state[j] == VarState::Basic {
                self.head[p] = j;
                p += 1;
            } else {
                let st = match self.state[j] {
                    VarState::Upper if self.upper[j].is_finite() => VarState::Upper,
                    VarState::Lower if self.lower[j].is_finite() => VarState::Lower,
                    VarState::Zero if !self.lower[j].is_finite() && !self.upper[j].is_finite() => {
                        VarState::Zero
                    }
                    _ => self.nonbasic_state(j, 0.0),
                };
                self.state[j] = st;
            }
        }
        for i in 0..self.m {
            let art = self.n + self.m + i;
            self.upper[art] = 0.0;
        }
        true
    }
}

