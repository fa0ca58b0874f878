//! Shortest paths whose arc lengths `(1 + xi_a / 2) * len_a` are uncertain,
//! where paying `c_a` shrinks the range of `xi_a` by the fraction `gamma_a`.
//!
//! Every undirected edge `e` becomes the two arcs `2e` (first to second
//! endpoint) and `2e + 1` (reverse). Reduction, routing and uncertainty all
//! live on arcs.

use std::collections::VecDeque;

use endoro_solver::{solve_milp, LinearProgram, MilpError, MilpStatus, MixedIntegerProgram, RowSense, Sense};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::matrix::Matrix;
use crate::model::{
    PiBarUSet, Relation, RobustLinearProblem, RobustRow, UncertaintySet, XConstraint, YConstraint, YDomain,
};
use crate::oracle::{worst_case_value, OracleError};
use crate::reformulate::{mip_size, Formulation, FormulationSize, BIGM_SAFETY};

/// Side length of the square holding random nodes.
pub const AREA: f64 = 100.0;
/// Share of the complete graph's edges that is kept, shortest first.
pub const KEEP_FRACTION: f64 = 0.4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpError {
    #[error("graph needs at least two nodes, got {0}")]
    TooFewNodes(usize),
    #[error("source and target are disconnected")]
    Disconnected,
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("{expected} entries expected, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("routing vector is not a simple source-target path: {0}")]
    NotAPath(String),
    #[error("average evaluation needs at least one sample")]
    NoSamples,
    #[error("problem is infeasible")]
    Infeasible,
    #[error(transparent)]
    Milp(#[from] MilpError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    pub num_nodes: usize,
    /// Node coordinates; empty for hand-built graphs.
    pub coords: Vec<[f64; 2]>,
    pub edges: Vec<Edge>,
    pub source: usize,
    pub target: usize,
    /// Seed that produced the graph after connectivity retries.
    pub seed: u64,
    pub retries: u32,
}

impl Graph {
    pub fn from_edges(num_nodes: usize, edges: Vec<Edge>, source: usize, target: usize) -> Graph {
        Graph { num_nodes, coords: Vec::new(), edges, source, target, seed: 0, retries: 0 }
    }

    pub fn num_arcs(&self) -> usize {
        2 * self.edges.len()
    }

    /// `(tail, head, length)` of arc `a`.
    pub fn arc(&self, a: usize) -> (usize, usize, f64) {
        let e = &self.edges[a / 2];
        if a % 2 == 0 {
            (e.u, e.v, e.length)
        } else {
            (e.v, e.u, e.length)
        }
    }

    pub fn arc_lengths(&self) -> Vec<f64> {
        (0..self.num_arcs()).map(|a| self.arc(a).2).collect()
    }

    pub fn connected(&self, a: usize, b: usize) -> bool {
        let mut adj = vec![Vec::new(); self.num_nodes];
        for e in &self.edges {
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
        let mut seen = vec![false; self.num_nodes];
        let mut queue = VecDeque::from([a]);
        seen[a] = true;
        while let Some(i) = queue.pop_front() {
            for &j in &adj[i] {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        seen[b]
    }
}

/// Number of edges kept from the complete graph on `n` nodes.
pub fn kept_edges(n: usize) -> usize {
    (KEEP_FRACTION * (n * (n - 1) / 2) as f64).ceil() as usize
}

/// Random Euclidean graph: `n` uniform points in the square, the shortest
/// [`kept_edges`] edges of the complete graph, and the two furthest points
/// as source and target. A disconnected draw is redrawn with `seed + 1`.
pub fn generate_graph(n: usize, seed: u64) -> Result<Graph, SpError> {
    if n < 2 {
        return Err(SpError::TooFewNodes(n));
    }
    let mut retries = 0u32;
    let mut s = seed;
    loop {
        let g = draw_graph(n, s, retries);
        if g.connected(g.source, g.target) {
            return Ok(g);
        }
        s = s.wrapping_add(1);
        retries += 1;
    }
}

fn draw_graph(n: usize, seed: u64, retries: u32) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords: Vec<[f64; 2]> = (0..n).map(|_| [rng.random::<f64>() * AREA, rng.random::<f64>() * AREA]).collect();
    let dist = |i: usize, j: usize| (coords[i][0] - coords[j][0]).hypot(coords[i][1] - coords[j][1]);
    let mut all: Vec<Edge> = Vec::with_capacity(n * (n - 1) / 2);
    let (mut source, mut target, mut far) = (0, 1, f64::NEG_INFINITY);
    for i in 0..n {
        for j in i + 1..n {
            let length = dist(i, j);
            if length > far {
                (source, target, far) = (i, j, length);
            }
            all.push(Edge { u: i, v: j, length });
        }
    }
    // Stable sort keeps lexicographic order among equal lengths.
    all.sort_by(|a, b| a.length.total_cmp(&b.length));
    all.truncate(kept_edges(n));
    Graph { num_nodes: n, coords, edges: all, source, target, seed, retries }
}

/// Parameters of one robust shortest-path problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SpInstance {
    pub graph: Graph,
    /// Budget on the total normalized deviation.
    pub budget: f64,
    /// Per-arc share of the deviation range removed by reduction.
    pub gamma: Vec<f64>,
    /// Per-arc reduction cost.
    pub cost: Vec<f64>,
    /// Optional cap on the number of reduced arcs.
    pub max_reductions: Option<f64>,
}

impl SpInstance {
    pub fn uniform(graph: Graph, budget: f64, gamma: f64, cost: f64) -> SpInstance {
        let a = graph.num_arcs();
        SpInstance { graph, budget, gamma: vec![gamma; a], cost: vec![cost; a], max_reductions: None }
    }

    pub fn num_arcs(&self) -> usize {
        self.graph.num_arcs()
    }

    pub fn validate(&self) -> Result<(), SpError> {
        let a = self.num_arcs();
        for len in [self.gamma.len(), self.cost.len()] {
            if len != a {
                return Err(SpError::Dimension { expected: a, got: len });
            }
        }
        if !(self.budget >= 0.0) || !self.budget.is_finite() {
            return Err(SpError::Invalid(format!("budget {} must be finite and nonnegative", self.budget)));
        }
        if self.gamma.iter().any(|&g| !(0.0..1.0).contains(&g)) {
            return Err(SpError::Invalid("reduction fractions must lie in [0, 1)".into()));
        }
        if self.cost.iter().any(|&c| !(c >= 0.0) || !c.is_finite()) {
            return Err(SpError::Invalid("reduction costs must be finite and nonnegative".into()));
        }
        if self.graph.edges.iter().any(|e| !(e.length >= 0.0) || !e.length.is_finite()) {
            return Err(SpError::Invalid("edge lengths must be finite and nonnegative".into()));
        }
        if self.graph.source == self.graph.target
            || self.graph.source >= self.graph.num_nodes
            || self.graph.target >= self.graph.num_nodes
        {
            return Err(SpError::Invalid("source and target must be distinct nodes".into()));
        }
        if !self.graph.connected(self.graph.source, self.graph.target) {
            return Err(SpError::Disconnected);
        }
        Ok(())
    }

    /// Copy with a different budget.
    pub fn with_budget(&self, budget: f64) -> SpInstance {
        SpInstance { budget, ..self.clone() }
    }

    /// Copy with every reduction fraction set to `gamma`.
    pub fn with_gamma(&self, gamma: f64) -> SpInstance {
        SpInstance { gamma: vec![gamma; self.num_arcs()], ..self.clone() }
    }

    /// Copy with every reduction cost set to `cost`.
    pub fn with_cost(&self, cost: f64) -> SpInstance {
        SpInstance { cost: vec![cost; self.num_arcs()], ..self.clone() }
    }

    /// The uncertainty set over arcs.
    pub fn uncertainty_set(&self) -> PiBarUSet {
        let a = self.num_arcs();
        PiBarUSet {
            lhs: Matrix::from_rows(vec![vec![1.0; a]]).expect("one row"),
            rhs: vec![self.budget],
            base: self.gamma.iter().map(|g| 1.0 - g).collect(),
            reducible: self.gamma.clone(),
        }
    }
}

/// A shortest-path counterpart with columns `[x | y | extra]`, one `x` and
/// one `y` per arc.
#[derive(Debug, Clone, PartialEq)]
pub struct SpModel {
    pub mip: MixedIntegerProgram,
    pub formulation: Option<Formulation>,
    pub num_arcs: usize,
    pub big_m: Option<f64>,
}

impl SpModel {
    pub fn size(&self) -> FormulationSize {
        mip_size(&self.mip, 0, 0)
    }
}

/// Columns `x`, `y` with the routing rows and the optional reduction cap.
fn routing_program(inst: &SpInstance, y_cost: &[f64]) -> LinearProgram {
    let g = &inst.graph;
    let a = inst.num_arcs();
    let mut objective = inst.cost.clone();
    objective.extend_from_slice(y_cost);
    let mut lp = LinearProgram::new(Sense::Minimize, objective);
    lp.upper.fill(1.0);
    for (i, con) in flow_rows(g).into_iter().enumerate() {
        let coeffs = con.into_iter().map(|(arc, v)| (a + arc, v)).collect();
        lp.add_constraint(coeffs, RowSense::Eq, supply(g, i));
    }
    if let Some(k) = inst.max_reductions {
        lp.add_constraint((0..a).map(|j| (j, 1.0)).collect(), RowSense::Le, k);
    }
    lp
}

/// Out-flow minus in-flow per node, as arc coefficients.
fn flow_rows(g: &Graph) -> Vec<Vec<(usize, f64)>> {
    let mut rows = vec![Vec::new(); g.num_nodes];
    for arc in 0..g.num_arcs() {
        let (u, v, _) = g.arc(arc);
        rows[u].push((arc, 1.0));
        rows[v].push((arc, -1.0));
    }
    rows
}

fn supply(g: &Graph, node: usize) -> f64 {
    if node == g.source {
        1.0
    } else if node == g.target {
        -1.0
    } else {
        0.0
    }
}

/// Linearization constant for the direct shortest-path builders.
///
/// The duals of the arc bound rows never exceed half the arc length, so the
/// standard form needs the largest half length and the modified form the
/// largest reducible share of it, each times [`BIGM_SAFETY`].
pub fn sp_big_m(inst: &SpInstance, formulation: Formulation) -> f64 {
    let half = inst.graph.arc_lengths().into_iter().map(|l| l / 2.0);
    let worst = match formulation {
        Formulation::PiBar => 0.0,
        Formulation::BigM => half.fold(0.0, f64::max),
        Formulation::ModifiedBigM => half.zip(&inst.gamma).map(|(h, g)| h * g).fold(0.0, f64::max),
    };
    BIGM_SAFETY * worst
}

/// The robust counterpart of the shortest-path problem in `formulation`.
///
/// Common part: `min c.x + len.y + Gamma p + ...` with `p` the dual of the
/// budget row and `q` the duals of the arc bound rows, `p + q_a >= len_a y_a / 2`.
/// The PiBar bound on `q_a` is `len_a / 2`, written as `pibar = 1` times
/// the half length.
pub fn build_sp_robust(inst: &SpInstance, formulation: Formulation) -> Result<SpModel, SpError> {
    build_sp_robust_with_m(inst, formulation, sp_big_m(inst, formulation))
}

pub fn build_sp_robust_with_m(inst: &SpInstance, formulation: Formulation, big_m: f64) -> Result<SpModel, SpError> {
    inst.validate()?;
    let a = inst.num_arcs();
    let lengths = inst.graph.arc_lengths();
    let mut lp = routing_program(inst, &lengths);
    let p = lp.add_variable(inst.budget, 0.0, f64::INFINITY);
    let q: Vec<usize> = (0..a).map(|_| lp.add_variable(0.0, 0.0, f64::INFINITY)).collect();
    let r: Vec<usize> = (0..a).map(|_| lp.add_variable(0.0, 0.0, f64::INFINITY)).collect();
    let y = |arc: usize| a + arc;
    for arc in 0..a {
        let (h, g) = (lengths[arc] / 2.0, inst.gamma[arc]);
        match formulation {
            Formulation::PiBar => {
                lp.objective[q[arc]] = 1.0 - g;
                lp.objective[r[arc]] = g;
            }
            Formulation::BigM => {
                lp.objective[q[arc]] = 1.0;
                lp.objective[r[arc]] = -g;
            }
            Formulation::ModifiedBigM => {
                lp.objective[q[arc]] = 1.0 - g;
                lp.objective[r[arc]] = 1.0;
            }
        }
        lp.add_constraint(vec![(p, 1.0), (q[arc], 1.0), (y(arc), -h)], RowSense::Ge, 0.0);
        match formulation {
            Formulation::PiBar => {
                let pibar = 1.0;
                lp.add_constraint(
                    vec![(p, 1.0), (r[arc], 1.0), (y(arc), -h), (arc, pibar * h)],
                    RowSense::Ge,
                    0.0,
                );
            }
            Formulation::BigM => {
                // r = q x
                lp.add_constraint(vec![(r[arc], 1.0), (arc, -big_m)], RowSense::Le, 0.0);
                lp.add_constraint(vec![(q[arc], 1.0), (r[arc], -1.0), (arc, big_m)], RowSense::Le, big_m);
                lp.add_constraint(vec![(r[arc], 1.0), (q[arc], -1.0)], RowSense::Le, 0.0);
            }
            Formulation::ModifiedBigM => {
                // r >= gamma q (1 - x)
                lp.add_constraint(vec![(r[arc], 1.0), (q[arc], -g), (arc, big_m)], RowSense::Ge, 0.0);
            }
        }
    }
    let mut binary = vec![true; 2 * a];
    binary.resize(lp.num_vars(), false);
    Ok(SpModel {
        mip: MixedIntegerProgram::new(lp, binary),
        formulation: Some(formulation),
        num_arcs: a,
        big_m: (formulation != Formulation::PiBar).then_some(big_m),
    })
}

/// Expected-cost model under independent uniform deviations on
/// `[0, 1 - gamma_a x_a]`: `min c.x + 5/4 len.y - sum gamma_a len_a w_a / 4`
/// with `w = x y` linearized exactly.
pub fn build_sp_stochastic(inst: &SpInstance) -> Result<SpModel, SpError> {
    inst.validate()?;
    let a = inst.num_arcs();
    let lengths = inst.graph.arc_lengths();
    let y_cost: Vec<f64> = lengths.iter().map(|l| 1.25 * l).collect();
    let mut lp = routing_program(inst, &y_cost);
    for arc in 0..a {
        let w = lp.add_variable(-inst.gamma[arc] * lengths[arc] / 4.0, 0.0, f64::INFINITY);
        lp.add_constraint(vec![(w, 1.0), (arc, -1.0), (a + arc, -1.0)], RowSense::Ge, -1.0);
        lp.add_constraint(vec![(w, 1.0), (arc, -1.0)], RowSense::Le, 0.0);
        lp.add_constraint(vec![(w, 1.0), (a + arc, -1.0)], RowSense::Le, 0.0);
    }
    let mut binary = vec![true; 2 * a];
    binary.resize(lp.num_vars(), false);
    Ok(SpModel { mip: MixedIntegerProgram::new(lp, binary), formulation: None, num_arcs: a, big_m: None })
}

/// The same problem as a generic robust problem in epigraph form:
/// `y = (arcs, z)`, objective `c.x + len.y + z`, and the single robust row
/// `xi . (len o y / 2) - z <= 0`.
pub fn to_robust_problem(inst: &SpInstance) -> Result<RobustLinearProblem, SpError> {
    inst.validate()?;
    let a = inst.num_arcs();
    let g = &inst.graph;
    let lengths = g.arc_lengths();
    let mut f = lengths.clone();
    f.push(1.0);
    let mut exposure = Matrix::zeros(a, a + 1);
    for (arc, l) in lengths.iter().enumerate() {
        exposure.set(arc, arc, l / 2.0);
    }
    let mut y_coeffs = vec![0.0; a + 1];
    y_coeffs[a] = -1.0;
    let constraints = flow_rows(g)
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            let mut yv = vec![0.0; a + 1];
            for (arc, v) in row {
                yv[arc] = v;
            }
            YConstraint { x: Vec::new(), y: yv, sense: Relation::Eq, rhs: supply(g, i) }
        })
        .collect();
    let mut lower = vec![0.0; a + 1];
    let mut upper = vec![1.0; a + 1];
    lower[a] = 0.0;
    upper[a] = f64::INFINITY;
    let mut binary = vec![true; a + 1];
    binary[a] = false;
    Ok(RobustLinearProblem {
        c: inst.cost.clone(),
        f,
        rows: vec![RobustRow {
            x_coeffs: vec![0.0; a],
            y_coeffs,
            exposure: Some(exposure),
            rhs: 0.0,
            set: UncertaintySet::PiBar(inst.uncertainty_set()),
        }],
        x_constraints: inst
            .max_reductions
            .map(|k| XConstraint { coeffs: vec![1.0; a], sense: Relation::Le, rhs: k })
            .into_iter()
            .collect(),
        y_domain: YDomain { lower, upper, binary, constraints },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpSolution {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub objective: f64,
    pub formulation: Option<Formulation>,
    pub nodes_explored: usize,
    pub wall_time: f64,
    pub root_bound: f64,
}

impl SpSolution {
    /// Arcs on the path.
    pub fn n_star(&self) -> usize {
        self.y.iter().filter(|&&v| v > 0.5).count()
    }

    /// Reduced arcs on the path.
    pub fn n_tilde(&self) -> usize {
        self.x.iter().zip(&self.y).filter(|(&x, &y)| x > 0.5 && y > 0.5).count()
    }
}

pub fn solve_sp_model(model: &SpModel, node_limit: usize) -> Result<SpSolution, SpError> {
    let r = solve_milp(&model.mip, node_limit)?;
    if r.status == MilpStatus::Infeasible {
        return Err(SpError::Infeasible);
    }
    let a = model.num_arcs;
    Ok(SpSolution {
        x: r.incumbent[..a].to_vec(),
        y: r.incumbent[a..2 * a].to_vec(),
        objective: r.objective,
        formulation: model.formulation,
        nodes_explored: r.nodes_explored,
        wall_time: r.wall_time,
        root_bound: r.root_bound,
    })
}

pub fn solve_sp(inst: &SpInstance, formulation: Formulation, node_limit: usize) -> Result<SpSolution, SpError> {
    solve_sp_model(&build_sp_robust(inst, formulation)?, node_limit)
}

pub fn solve_sp_stochastic(inst: &SpInstance, node_limit: usize) -> Result<SpSolution, SpError> {
    solve_sp_model(&build_sp_stochastic(inst)?, node_limit)
}

/// Nodes of the path encoded by `y`, from source to target.
pub fn path_nodes(g: &Graph, y: &[f64]) -> Result<Vec<usize>, SpError> {
    if y.len() != g.num_arcs() {
        return Err(SpError::Dimension { expected: g.num_arcs(), got: y.len() });
    }
    let mut out = vec![None; g.num_nodes];
    let mut indeg = vec![0usize; g.num_nodes];
    let mut used = 0usize;
    for (arc, &v) in y.iter().enumerate() {
        if v > 0.5 {
            let (u, w, _) = g.arc(arc);
            if out[u].replace(w).is_some() {
                return Err(SpError::NotAPath(format!("node {u} has two outgoing arcs")));
            }
            indeg[w] += 1;
            used += 1;
        }
    }
    if indeg.iter().any(|&d| d > 1) {
        return Err(SpError::NotAPath("a node has two incoming arcs".into()));
    }
    let mut nodes = vec![g.source];
    let mut at = g.source;
    while at != g.target {
        at = out[at].ok_or_else(|| SpError::NotAPath(format!("path stops at node {at}")))?;
        nodes.push(at);
        if nodes.len() > g.num_nodes {
            return Err(SpError::NotAPath("cycle through the source".into()));
        }
    }
    if used != nodes.len() - 1 {
        return Err(SpError::NotAPath("arcs off the path are used".into()));
    }
    Ok(nodes)
}

/// `c.x + len.y`.
pub fn nominal_cost(inst: &SpInstance, x: &[f64], y: &[f64]) -> f64 {
    let lengths = inst.graph.arc_lengths();
    (0..inst.num_arcs()).map(|a| inst.cost[a] * x[a] + lengths[a] * y[a]).sum()
}

/// Nominal cost plus the largest deviation the set allows for `(x, y)`.
pub fn worst_case_cost(inst: &SpInstance, x: &[f64], y: &[f64]) -> Result<f64, SpError> {
    check_len(inst, x)?;
    check_len(inst, y)?;
    let lengths = inst.graph.arc_lengths();
    let u: Vec<f64> = (0..inst.num_arcs()).map(|a| lengths[a] * y[a] / 2.0).collect();
    let wc = worst_case_value(x, &u, &UncertaintySet::PiBar(inst.uncertainty_set()))?;
    Ok(nominal_cost(inst, x, y) + wc.value)
}

/// Exact expected cost under independent uniform deviations on
/// `[0, 1 - gamma_a x_a]`.
pub fn expected_cost(inst: &SpInstance, x: &[f64], y: &[f64]) -> Result<f64, SpError> {
    check_len(inst, x)?;
    check_len(inst, y)?;
    let lengths = inst.graph.arc_lengths();
    let dev: f64 = (0..inst.num_arcs()).map(|a| lengths[a] * y[a] * (1.0 - inst.gamma[a] * x[a]) / 4.0).sum();
    Ok(nominal_cost(inst, x, y) + dev)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarlo {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Sample mean of the realized cost with deviations drawn independently and
/// uniformly from `[0, 1 - gamma_a x_a]`.
pub fn average_cost(inst: &SpInstance, x: &[f64], y: &[f64], samples: usize, seed: u64) -> Result<MonteCarlo, SpError> {
    check_len(inst, x)?;
    check_len(inst, y)?;
    if samples == 0 {
        return Err(SpError::NoSamples);
    }
    let lengths = inst.graph.arc_lengths();
    let fixed: f64 = (0..inst.num_arcs()).map(|a| inst.cost[a] * x[a]).sum();
    let used: Vec<(f64, f64)> = (0..inst.num_arcs())
        .filter(|&a| y[a] != 0.0)
        .map(|a| (lengths[a] * y[a], 1.0 - inst.gamma[a] * x[a]))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..samples {
        let v: f64 = fixed + used.iter().map(|&(l, cap)| l * (1.0 + 0.5 * cap * rng.random::<f64>())).sum::<f64>();
        sum += v;
        sum_sq += v * v;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = if samples > 1 { ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    Ok(MonteCarlo { mean, std_error: (var / n).sqrt(), samples })
}

fn check_len(inst: &SpInstance, v: &[f64]) -> Result<(), SpError> {
    if v.len() != inst.num_arcs() {
        return Err(SpError::Dimension { expected: inst.num_arcs(), got: v.len() });
    }
    Ok(())
}

/// Path statistics of one decision-dependent solution against its nominal
/// and static robust references.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub n_star: usize,
    pub n_tilde: usize,
    pub z_star: f64,
    /// Static robust optimum minus nominal optimum.
    pub price_of_robustness: f64,
    /// Static robust optimum minus decision-dependent optimum.
    pub benefit_of_interaction: f64,
}

pub fn compute_observables(nominal: &SpSolution, robust: &SpSolution, ddu: &SpSolution) -> Observables {
    Observables {
        n_star: ddu.n_star(),
        n_tilde: ddu.n_tilde(),
        z_star: ddu.objective,
        price_of_robustness: robust.objective - nominal.objective,
        benefit_of_interaction: robust.objective - ddu.objective,
    }
}

/// Node names of [`figure_one`], by index.
pub const FIGURE_ONE_NODES: [&str; 7] = ["A", "B", "C", "E", "F", "G", "H"];

/// The seven-node network with source `A`, target `B`, budget 1, reduction
/// fraction 0.8, free reductions and at most one reduced arc.
pub fn figure_one() -> SpInstance {
    let id = |name: &str| FIGURE_ONE_NODES.iter().position(|&n| n == name).expect("known node");
    let edges = [
        ("A", "C", 31.0),
        ("C", "B", 64.0),
        ("A", "E", 15.3),
        ("E", "F", 23.0),
        ("F", "G", 20.6),
        ("G", "H", 25.5),
        ("H", "B", 13.0),
        ("E", "C", 16.0),
    ]
    .iter()
    .map(|&(u, v, length)| Edge { u: id(u), v: id(v), length })
    .collect();
    let graph = Graph::from_edges(FIGURE_ONE_NODES.len(), edges, id("A"), id("B"));
    let mut inst = SpInstance::uniform(graph, 1.0, 0.8, 0.0);
    inst.max_reductions = Some(1.0);
    inst
}

/// Node names along `y`.
pub fn figure_one_path(inst: &SpInstance, y: &[f64]) -> Result<String, SpError> {
    let nodes = path_nodes(&inst.graph, y)?;
    Ok(nodes.iter().map(|&i| FIGURE_ONE_NODES[i]).collect::<Vec<_>>().join("-"))
}

/// One row of the three-scenario comparison on [`figure_one`].
#[derive(Debug, Clone, PartialEq)]
pub struct FigureOneRow {
    pub label: &'static str,
    pub path: String,
    pub nominal: f64,
    pub worst_case: f64,
    pub reduced: Vec<String>,
}

/// Nominal, static robust and decision-dependent solutions of
/// [`figure_one`], each evaluated against the full budget.
pub fn figure_one_table(formulation: Formulation) -> Result<Vec<FigureOneRow>, SpError> {
    let inst = figure_one();
    let scenarios: [(&'static str, SpInstance); 3] = [
        ("nominal", inst.with_budget(0.0).with_gamma(0.0)),
        ("robust", inst.with_gamma(0.0)),
        ("endogenous", inst.clone()),
    ];
    let mut rows = Vec::new();
    for (label, scenario) in scenarios {
        let mut sol = solve_sp(&scenario, formulation, 100_000)?;
        if scenario.gamma.iter().all(|&g| g == 0.0) {
            // Reductions are free and useless here; report none.
            sol.x.fill(0.0);
        }
        let lengths = inst.graph.arc_lengths();
        let nominal: f64 = lengths.iter().zip(&sol.y).map(|(l, y)| l * y).sum();
        let worst_case = worst_case_cost(&inst, &sol.x, &sol.y)?;
        let reduced = (0..inst.num_arcs())
            .filter(|&a| sol.x[a] > 0.5)
            .map(|a| {
                let (u, v, _) = inst.graph.arc(a);
                format!("{}-{}", FIGURE_ONE_NODES[u], FIGURE_ONE_NODES[v])
            })
            .collect();
        rows.push(FigureOneRow { label, path: figure_one_path(&inst, &sol.y)?, nominal, worst_case, reduced });
    }
    Ok(rows)
}
