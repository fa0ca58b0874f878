use endoro_solver::{
    solve_lp, solve_milp, solve_milp_with, SimplexOptions, LinearProgram, LpStatus, MilpError, MilpStatus, MixedIntegerProgram, RowSense, Sense,
};
use proptest::prelude::*;

const INF: f64 = f64::INFINITY;

#[test]
fn binary_knapsack_pair() {
    let lp = LinearProgram::from_dense(
        Sense::Minimize,
        vec![-1.0, -1.0],
        &[vec![1.0, 1.0]],
        &[RowSense::Le],
        &[1.0],
        vec![0.0, 0.0],
        vec![1.0, 1.0],
    )
    .unwrap();
    let r = solve_milp(&MixedIntegerProgram::new(lp, vec![true, true]), 1000).unwrap();
    assert_eq!(r.status, MilpStatus::Optimal);
    assert!((r.objective + 1.0).abs() < 1e-12);
}

#[test]
fn fixed_binaries_reduce_to_lp() {
    let lp = LinearProgram::from_dense(
        Sense::Maximize,
        vec![3.0, 1.0, 2.0],
        &[vec![1.0, 2.0, 1.0]],
        &[RowSense::Le],
        &[2.5],
        vec![1.0, 0.0, 0.0],
        vec![1.0, INF, INF],
    )
    .unwrap();
    let relax = solve_lp(&lp).unwrap();
    let r = solve_milp(&MixedIntegerProgram::new(lp, vec![true, false, false]), 10).unwrap();
    assert!((r.objective - relax.objective_value).abs() < 1e-9);
    assert_eq!(r.nodes_explored, 1);
}

#[test]
fn infeasible_relaxation() {
    let lp = LinearProgram::from_dense(
        Sense::Minimize,
        vec![1.0],
        &[vec![1.0]],
        &[RowSense::Ge],
        &[2.0],
        vec![0.0],
        vec![1.0],
    )
    .unwrap();
    let r = solve_milp(&MixedIntegerProgram::new(lp, vec![true]), 10).unwrap();
    assert_eq!(r.status, MilpStatus::Infeasible);
}

#[test]
fn integer_infeasible_with_feasible_relaxation() {
    // x0 + x1 = 1, x0 - x1 = 0 has only the fractional point (1/2, 1/2)
    let lp = LinearProgram::from_dense(
        Sense::Minimize,
        vec![1.0, 1.0],
        &[vec![1.0, 1.0], vec![1.0, -1.0]],
        &[RowSense::Eq, RowSense::Eq],
        &[1.0, 0.0],
        vec![0.0, 0.0],
        vec![1.0, 1.0],
    )
    .unwrap();
    let r = solve_milp(&MixedIntegerProgram::new(lp, vec![true, true]), 100).unwrap();
    assert_eq!(r.status, MilpStatus::Infeasible);
}

#[test]
fn node_limit_reports_gap() {
    let n = 12;
    let w: Vec<f64> = (0..n).map(|j| 3.0 + ((j * 7) % 5) as f64 + 0.37 * j as f64).collect();
    let lp = LinearProgram::from_dense(
        Sense::Maximize,
        w.iter().map(|v| v + 0.5).collect(),
        &[w.clone()],
        &[RowSense::Le],
        &[w.iter().sum::<f64>() / 2.0 + 0.1],
        vec![0.0; n],
        vec![1.0; n],
    )
    .unwrap();
    match solve_milp(&MixedIntegerProgram::new(lp, vec![true; n]), 3) {
        Err(MilpError::NodeLimit { limit, gap, .. }) => {
            assert_eq!(limit, 3);
            assert!(gap > 0.0);
        }
        other => panic!("expected node limit, got {other:?}"),
    }
}

/// Optimum by enumerating every binary assignment and solving the rest as an LP.
fn brute_force(mip: &MixedIntegerProgram) -> Option<f64> {
    let bins: Vec<usize> = (0..mip.binary.len()).filter(|&j| mip.binary[j]).collect();
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << bins.len()) {
        let mut lp = mip.base.clone();
        for (k, &j) in bins.iter().enumerate() {
            let v = ((mask >> k) & 1) as f64;
            if v < lp.lower[j] || v > lp.upper[j] {
                lp.lower[j] = 1.0;
                lp.upper[j] = 0.0;
            } else {
                lp.lower[j] = v;
                lp.upper[j] = v;
            }
        }
        let r = solve_lp(&lp).unwrap();
        if r.status == LpStatus::Optimal {
            let v = r.objective_value;
            best = Some(match (best, lp.sense) {
                (None, _) => v,
                (Some(b), Sense::Minimize) => b.min(v),
                (Some(b), Sense::Maximize) => b.max(v),
            });
        }
    }
    best
}

fn random_mip(max_bin: usize) -> impl Strategy<Value = MixedIntegerProgram> {
    (1usize..=max_bin, 0usize..=4, 1usize..=6).prop_flat_map(|(nb, nc, m)| {
        let n = nb + nc;
        (
            prop::bool::ANY,
            prop::collection::vec(-9i32..=9, n),
            prop::collection::vec(prop::collection::vec(-5i32..=5, n), m),
            prop::collection::vec(0u8..3, m),
            prop::collection::vec(-4i32..=12, m),
        )
            .prop_map(move |(max, c, a, senses, b)| {
                let senses: Vec<RowSense> = senses
                    .iter()
                    .map(|s| match s {
                        0 | 2 => RowSense::Le,
                        _ => RowSense::Ge,
                    })
                    .collect();
                let mut lower = vec![0.0; n];
                let mut upper = vec![1.0; n];
                for j in nb..n {
                    lower[j] = -2.0;
                    upper[j] = 3.0;
                }
                let lp = LinearProgram::from_dense(
                    if max { Sense::Maximize } else { Sense::Minimize },
                    c.iter().map(|&v| v as f64 * 0.75).collect(),
                    &a.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect::<Vec<_>>(),
                    &senses,
                    &b.iter().map(|&v| v as f64 * 0.5).collect::<Vec<_>>(),
                    lower,
                    upper,
                )
                .unwrap();
                let binary = (0..n).map(|j| j < nb).collect();
                MixedIntegerProgram::new(lp, binary)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn matches_brute_force(mip in random_mip(8)) {
        let r = solve_milp(&mip, 100_000).unwrap();
        match brute_force(&mip) {
            None => prop_assert_eq!(r.status, MilpStatus::Infeasible),
            Some(v) => {
                prop_assert_eq!(r.status, MilpStatus::Optimal);
                prop_assert!((r.objective - v).abs() <= 1e-6, "{} vs {}", r.objective, v);
                prop_assert!(mip.base.max_violation(&r.incumbent) <= 1e-6);
                let relaxed_better = match mip.base.sense {
                    Sense::Minimize => r.root_bound <= r.objective + 1e-9,
                    Sense::Maximize => r.root_bound >= r.objective - 1e-9,
                };
                prop_assert!(relaxed_better);
            }
        }
    }

    #[test]
    fn matches_brute_force_under_blands_rule(mip in random_mip(6)) {
        let r = solve_milp_with(&mip, 100_000, &SimplexOptions { bland_after: Some(0) }).unwrap();
        match brute_force(&mip) {
            None => prop_assert_eq!(r.status, MilpStatus::Infeasible),
            Some(v) => {
                prop_assert_eq!(r.status, MilpStatus::Optimal);
                prop_assert!((r.objective - v).abs() <= 1e-6, "{} vs {}", r.objective, v);
            }
        }
    }

    #[test]
    fn deterministic(mip in random_mip(10)) {
        let a = solve_milp(&mip, 100_000).unwrap();
        let b = solve_milp(&mip, 100_000).unwrap();
        prop_assert_eq!(a.incumbent, b.incumbent);
        prop_assert_eq!(a.nodes_explored, b.nodes_explored);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn matches_brute_force_fifteen_binaries(mip in random_mip(15).prop_filter("wide", |m| m.num_binaries() >= 13)) {
        let r = solve_milp(&mip, 1_000_000).unwrap();
        match brute_force(&mip) {
            None => prop_assert_eq!(r.status, MilpStatus::Infeasible),
            Some(v) => prop_assert!((r.objective - v).abs() <= 1e-6),
        }
    }
}
