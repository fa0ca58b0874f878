use endoro_core::reformulate::{build_counterpart, solve_counterpart, Formulation, FormulationSize, Support};
use endoro_core::sp::*;
use endoro_solver::{solve_milp, MilpStatus};
use petgraph::algo::dijkstra;
use petgraph::graph::UnGraph;

const TOL: f64 = 1e-6;

#[test]
fn figure_one_table_in_every_formulation() {
    let expected = [
        ("nominal", "A-C-B", 95.0, 127.0),
        ("robust", "A-E-F-G-H-B", 97.4, 110.15),
        ("endogenous", "A-E-C-B", 95.3, 108.1),
    ];
    for f in Formulation::ALL {
        let rows = figure_one_table(f).unwrap();
        for (row, (label, path, nominal, worst)) in rows.iter().zip(expected) {
            assert_eq!(row.label, label);
            assert_eq!(row.path, path, "{f} {label}");
            assert!((row.nominal - nominal).abs() < TOL, "{f} {label}: {}", row.nominal);
            assert!((row.worst_case - worst).abs() < TOL, "{f} {label}: {}", row.worst_case);
        }
        assert_eq!(rows[2].reduced, vec!["C-B".to_string()], "{f}");
    }
}

#[test]
fn figure_one_observables() {
    let inst = figure_one();
    let nominal = solve_sp(&inst.with_budget(0.0).with_gamma(0.0), Formulation::PiBar, 1000).unwrap();
    let robust = solve_sp(&inst.with_gamma(0.0), Formulation::PiBar, 1000).unwrap();
    let ddu = solve_sp(&inst, Formulation::PiBar, 1000).unwrap();
    let o = compute_observables(&nominal, &robust, &ddu);
    assert!((o.price_of_robustness - 15.15).abs() < TOL);
    assert!((o.benefit_of_interaction - 2.05).abs() < TOL);
    assert_eq!((o.n_star, o.n_tilde), (3, 1));
}

#[test]
fn nominal_path_worst_case_uses_whole_budget_on_longest_arc() {
    let inst = figure_one();
    let sol = solve_sp(&inst.with_budget(0.0), Formulation::ModifiedBigM, 1000).unwrap();
    let x = vec![0.0; inst.num_arcs()];
    assert!((worst_case_cost(&inst, &x, &sol.y).unwrap() - 127.0).abs() < TOL);
}

#[test]
fn graph_recipe() {
    let g = generate_graph(2, 3).unwrap();
    assert_eq!(g.edges.len(), 1);
    assert_eq!(generate_graph(5, 11).unwrap().edges.len(), 4);
    assert!(matches!(generate_graph(1, 0), Err(SpError::TooFewNodes(1))));
    for n in [10, 23, 40] {
        let g = generate_graph(n, 99).unwrap();
        assert_eq!(g, generate_graph(n, 99).unwrap());
        assert_eq!(g.edges.len(), (0.4 * (n * (n - 1) / 2) as f64).ceil() as usize);
        let d = |i: usize, j: usize| (g.coords[i][0] - g.coords[j][0]).hypot(g.coords[i][1] - g.coords[j][1]);
        let far = d(g.source, g.target);
        for i in 0..n {
            for j in 0..n {
                assert!(d(i, j) <= far);
            }
        }
        let longest_kept = g.edges.iter().map(|e| e.length).fold(0.0, f64::max);
        let kept = g.edges.len();
        let shorter = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| d(i, j) < longest_kept).count();
        assert!(shorter < kept, "a shorter edge was dropped");
        assert!(g.coords.iter().flatten().all(|&c| (0.0..=100.0).contains(&c)));
    }
}

fn petgraph_distance(inst: &SpInstance) -> f64 {
    let g = &inst.graph;
    let mut pg = UnGraph::<(), f64>::new_undirected();
    let nodes: Vec<_> = (0..g.num_nodes).map(|_| pg.add_node(())).collect();
    for e in &g.edges {
        pg.add_edge(nodes[e.u], nodes[e.v], e.length);
    }
    dijkstra(&pg, nodes[g.source], Some(nodes[g.target]), |e| *e.weight())[&nodes[g.target]]
}

#[test]
fn zero_budget_is_the_classical_shortest_path() {
    for seed in 0..5 {
        let inst = SpInstance::uniform(generate_graph(14, seed).unwrap(), 0.0, 0.2, 1.0);
        let expected = petgraph_distance(&inst);
        for f in Formulation::ALL {
            let sol = solve_sp(&inst, f, 100_000).unwrap();
            assert!((sol.objective - expected).abs() < TOL, "{f}: {} vs {expected}", sol.objective);
            assert!(sol.x.iter().all(|&v| v == 0.0));
            path_nodes(&inst.graph, &sol.y).unwrap();
        }
    }
}

#[test]
fn table_three_sizes() {
    for (n, seed) in [(6, 1), (12, 2), (20, 3)] {
        let inst = SpInstance::uniform(generate_graph(n, seed).unwrap(), 2.0, 0.2, 1.0);
        let (v, a) = (n, inst.num_arcs());
        let common = |affine| FormulationSize { binaries: 2 * a, continuous: 2 * a + 1, affine_rows: affine, sign_rows: 2 * a + 1 };
        assert_eq!(build_sp_robust(&inst, Formulation::PiBar).unwrap().size(), common(v + 2 * a));
        assert_eq!(build_sp_robust(&inst, Formulation::BigM).unwrap().size(), common(v + 4 * a));
        assert_eq!(build_sp_robust(&inst, Formulation::ModifiedBigM).unwrap().size(), common(v + 2 * a));
    }
}

#[test]
fn big_m_constants() {
    let mut inst = SpInstance::uniform(generate_graph(8, 5).unwrap(), 2.0, 0.2, 1.0);
    inst.graph.edges[0].length = 140.0;
    assert!((sp_big_m(&inst, Formulation::ModifiedBigM) - 28.0).abs() < 1e-12);
    assert!((sp_big_m(&inst, Formulation::BigM) - 140.0).abs() < 1e-12);
    assert_eq!(sp_big_m(&inst.with_gamma(0.0), Formulation::ModifiedBigM), 0.0);
}

#[test]
fn direct_and_generic_counterparts_agree() {
    for seed in 0..6 {
        let inst = SpInstance::uniform(generate_graph(9, seed).unwrap(), 1.5, 0.5, 0.7);
        let direct = solve_sp(&inst, Formulation::PiBar, 100_000).unwrap().objective;
        let problem = to_robust_problem(&inst).unwrap();
        for f in Formulation::ALL {
            let cp = build_counterpart(&problem, f, Support::Sparse).unwrap();
            let s = solve_counterpart(&cp, 100_000).unwrap();
            assert!((s.objective - direct).abs() < TOL, "{f}: {} vs {direct}", s.objective);
            let a = inst.num_arcs();
            let worst = worst_case_cost(&inst, &s.x, &s.y[..a]).unwrap();
            assert!((worst - direct).abs() < TOL);
        }
    }
}

#[test]
fn stochastic_single_edge() {
    let g = Graph::from_edges(2, vec![Edge { u: 0, v: 1, length: 4.0 }], 0, 1);
    let mut inst = SpInstance::uniform(g, 1.0, 0.2, 0.0);
    inst.cost = vec![0.0, 5.0];
    let sol = solve_sp_stochastic(&inst, 100).unwrap();
    assert_eq!((sol.x[0], sol.y[0]), (1.0, 1.0));
    assert!((sol.objective - 4.8).abs() < 1e-12, "{}", sol.objective);
    assert!((expected_cost(&inst, &sol.x, &sol.y).unwrap() - 4.8).abs() < 1e-12);
}

#[test]
fn stochastic_product_linearization_is_exact() {
    let g = Graph::from_edges(2, vec![Edge { u: 0, v: 1, length: 4.0 }], 0, 1);
    let inst = SpInstance::uniform(g, 1.0, 0.2, 0.0);
    let model = build_sp_stochastic(&inst).unwrap();
    // Fix x and y on arc 0 and read back w.
    for (x, y) in [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)] {
        let mut mip = model.mip.clone();
        mip.base.lower[0] = x;
        mip.base.upper[0] = x;
        mip.base.lower[2] = y;
        mip.base.upper[2] = y;
        // Arc 1 unused; drop the routing requirement by letting y_0 be pinned.
        mip.base.constraints.drain(..2);
        let w_col = 4;
        let r = solve_milp(&mip, 100).unwrap();
        assert_eq!(r.status, MilpStatus::Optimal);
        assert!((r.incumbent[w_col] - x * y).abs() < 1e-9, "({x}, {y}) -> {}", r.incumbent[w_col]);
    }
}

#[test]
fn zero_gamma_stochastic_is_scaled_nominal() {
    let inst = SpInstance::uniform(generate_graph(12, 4).unwrap(), 2.0, 0.0, 1.0);
    let sol = solve_sp_stochastic(&inst, 100_000).unwrap();
    assert!(sol.x.iter().all(|&v| v == 0.0));
    assert!((sol.objective - 1.25 * petgraph_distance(&inst)).abs() < TOL);
}

#[test]
fn monte_carlo_matches_closed_form() {
    let inst = SpInstance::uniform(generate_graph(12, 8).unwrap(), 2.0, 0.3, 1.0);
    let sol = solve_sp(&inst, Formulation::PiBar, 100_000).unwrap();
    let exact = expected_cost(&inst, &sol.x, &sol.y).unwrap();
    let mc = average_cost(&inst, &sol.x, &sol.y, 100_000, 5).unwrap();
    assert!((mc.mean - exact).abs() <= 3.0 * mc.std_error, "{} vs {exact} (se {})", mc.mean, mc.std_error);
    assert_eq!(mc, average_cost(&inst, &sol.x, &sol.y, 100_000, 5).unwrap());
    assert!(matches!(average_cost(&inst, &sol.x, &sol.y, 0, 5), Err(SpError::NoSamples)));
    let zero = inst.with_gamma(0.0);
    let y = &sol.y;
    let x0 = vec![0.0; inst.num_arcs()];
    let nominal = nominal_cost(&zero, &x0, y);
    assert!((expected_cost(&zero, &x0, y).unwrap() - (1.25 * (nominal))).abs() < 1e-9);
}

#[test]
fn paths_are_checked() {
    let inst = figure_one();
    let mut y = vec![0.0; inst.num_arcs()];
    assert!(path_nodes(&inst.graph, &y).is_err());
    y[0] = 1.0; // A -> C
    y[2] = 1.0; // C -> B
    assert_eq!(path_nodes(&inst.graph, &y).unwrap(), vec![0, 2, 1]);
    y[9] = 1.0; // F -> E, a stray arc
    assert!(path_nodes(&inst.graph, &y).is_err());
}
