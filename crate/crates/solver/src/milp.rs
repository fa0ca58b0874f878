use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::rc::Rc;
use std::time::Instant;

use thiserror::Error;

use crate::problem::{LinearProgram, LpError};
use crate::simplex::{Engine, Outcome, VarState};
use crate::SimplexOptions;

/// A binary value is accepted when within this distance of 0 or 1.
pub const INTEGRALITY_TOL: f64 = 1e-6;
const ABS_GAP: f64 = 1e-9;

/// A linear program whose masked variables are restricted to {0, 1}.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedIntegerProgram {
    pub base: LinearProgram,
    pub binary: Vec<bool>,
}

impl MixedIntegerProgram {
    pub fn new(base: LinearProgram, binary: Vec<bool>) -> Self {
        MixedIntegerProgram { base, binary }
    }

    pub fn num_binaries(&self) -> usize {
        self.binary.iter().filter(|b| **b).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MilpStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpResult {
    pub status: MilpStatus,
    /// Best integral solution, binaries rounded exactly; empty if infeasible.
    pub incumbent: Vec<f64>,
    /// Objective of `incumbent` in the problem's own sense.
    pub objective: f64,
    /// Objective of the root relaxation in the problem's own sense.
    pub root_bound: f64,
    pub nodes_explored: usize,
    /// Simplex pivots summed over all nodes.
    pub lp_iterations: usize,
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MilpError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("relaxation is unbounded")]
    Unbounded,
    #[error("node limit {limit} reached with gap {gap}")]
    NodeLimit {
        limit: usize,
        incumbent: Option<Vec<f64>>,
        objective: Option<f64>,
        bound: f64,
        gap: f64,
    },
}

struct Node {
    bound: f64,
    depth: usize,
    seq: usize,
    fixings: Rc<Vec<(usize, f64)>>,
    basis: Rc<Vec<VarState>>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    /// Max-heap order: lowest bound, then deepest, then earliest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.seq.cmp(&self.seq))
    }
}

/// Most fractional binary, ties to the lowest index.
fn branching_variable(x: &[f64], binary: &[bool]) -> Option<usize> {
    let mut best = None;
    let mut best_frac = INTEGRALITY_TOL;
    for (j, &is_bin) in binary.iter().enumerate() {
        if !is_bin {
            continue;
        }
        let frac = (x[j] - x[j].floor()).min(x[j].ceil() - x[j]);
        if frac > best_frac {
            best_frac = frac;
            best = Some(j);
        }
    }
    best
}

/// Best-bound branch and bound; explores at most `node_limit` nodes.
///
/// Every node's relaxation is solved to optimality with no cuts or primal
/// heuristics. A node is pruned when its bound is within `1e-9` of the
/// incumbent.
pub fn solve_milp(mip: &MixedIntegerProgram, node_limit: usize) -> Result<MilpResult, MilpError> {
    solve_milp_with(mip, node_limit, &SimplexOptions::default())
}

pub fn solve_milp_with(
    mip: &MixedIntegerProgram,
    node_limit: usize,
    options: &SimplexOptions,
) -> Result<MilpResult, MilpError> {
    let start = Instant::now();
    let lp = &mip.base;
    lp.validate()?;
    if mip.binary.len() != lp.num_vars() {
        return Err(LpError::Structural(format!(
            "binary mask has {} entries for {} variables",
            mip.binary.len(),
            lp.num_vars()
        ))
        .into());
    }
    let s = lp.sense.sign();
    let mut base_lower = lp.lower.clone();
    let mut base_upper = lp.upper.clone();
    for j in 0..lp.num_vars() {
        if mip.binary[j] {
            base_lower[j] = base_lower[j].max(0.0).ceil();
            base_upper[j] = base_upper[j].min(1.0).floor();
        }
    }
    let infeasible = |nodes: usize, root: f64, iterations: usize| MilpResult {
        status: MilpStatus::Infeasible,
        incumbent: Vec::new(),
        objective: f64::NAN,
        root_bound: root,
        nodes_explored: nodes,
        lp_iterations: iterations,
        wall_time: start.elapsed().as_secs_f64(),
    };
    if (0..lp.num_vars()).any(|j| base_lower[j] > base_upper[j]) {
        return Ok(infeasible(0, f64::NAN, 0));
    }
    let mut root_lp = lp.clone();
    root_lp.lower = base_lower.clone();
    root_lp.upper = base_upper.clone();
    let mut engine = Engine::new(&root_lp);
    engine.bland_after = options.bland_after;

    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    let mut nodes = 0usize;
    let mut incumbent: Option<(Vec<f64>, f64)> = None;
    let mut root_bound = f64::NAN;
    let mut last_basis: Option<Rc<Vec<VarState>>> = None;
    let mut applied: Vec<(usize, f64)> = Vec::new();

    let root_fix = Rc::new(Vec::new());
    heap.push(Node { bound: f64::NEG_INFINITY, depth: 0, seq, fixings: root_fix, basis: Rc::new(Vec::new()) });
    seq += 1;

    while let Some(node) = heap.pop() {
        if let Some((_, best)) = &incumbent {
            if node.bound >= best - ABS_GAP {
                continue;
            }
        }
        if nodes >= node_limit {
            let bound = heap.iter().map(|n| n.bound).fold(node.bound, f64::min);
            let (inc, obj) = match &incumbent {
                Some((x, v)) => (Some(x.clone()), Some(s * v)),
                None => (None, None),
            };
            let gap = match &incumbent {
                Some((_, v)) => v - bound,
                None => f64::INFINITY,
            };
            return Err(MilpError::NodeLimit { limit: node_limit, incumbent: inc, objective: obj, bound: s * bound, gap });
        }
        nodes += 1;

        for &(j, _) in &applied {
            engine.set_bounds(j, base_lower[j], base_upper[j]);
        }
        for &(j, v) in node.fixings.iter() {
            engine.set_bounds(j, v, v);
        }
        applied.clear();
        applied.extend(node.fixings.iter().copied());

        let outcome = if node.depth == 0 {
            engine.solve_cold()?
        } else {
            let warm = match &last_basis {
                Some(b) if Rc::ptr_eq(b, &node.basis) => true,
                _ => engine.restore(&node.basis),
            };
            if warm {
                engine.solve_warm()?
            } else {
                engine.solve_cold()?
            }
        };
        match outcome {
            Outcome::Unbounded => return Err(MilpError::Unbounded),
            Outcome::Infeasible => {
                last_basis = None;
                if node.depth == 0 {
                    return Ok(infeasible(nodes, f64::NAN, engine.iterations));
                }
                continue;
            }
            Outcome::Optimal => {}
        }
        let value = engine.objective();
        if node.depth == 0 {
            root_bound = s * value;
        }
        if let Some((_, best)) = &incumbent {
            if value >= best - ABS_GAP {
                last_basis = None;
                continue;
            }
        }
        let x = engine.primal();
        match branching_variable(&x, &mip.binary) {
            None => {
                let mut rounded = x;
                for j in 0..rounded.len() {
                    if mip.binary[j] {
                        rounded[j] = rounded[j].round();
                    }
                }
                let obj = s * lp.objective_value(&rounded);
                incumbent = Some((rounded, obj));
                last_basis = None;
            }
            Some(j) => {
                let basis = Rc::new(engine.basis());
                for v in [0.0, 1.0] {
                    let mut fix = (*node.fixings).clone();
                    fix.push((j, v));
                    heap.push(Node {
                        bound: value,
                        depth: node.depth + 1,
                        seq,
                        fixings: Rc::new(fix),
                        basis: basis.clone(),
                    });
                    seq += 1;
                }
                last_basis = Some(basis);
            }
        }
    }

    match incumbent {
        Some((x, obj)) => Ok(MilpResult {
            status: MilpStatus::Optimal,
            objective: s * obj,
            incumbent: x,
            root_bound,
            nodes_explored: nodes,
            lp_iterations: engine.iterations,
            wall_time: start.elapsed().as_secs_f64(),
        }),
        None => Ok(infeasible(nodes, root_bound, engine.iterations)),
    }
}
