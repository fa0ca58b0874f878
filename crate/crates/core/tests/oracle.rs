use endoro_core::matrix::Matrix;
use endoro_core::model::*;
use endoro_core::oracle::*;
use endoro_core::reformulate::{build_bigm_counterpart, solve_counterpart, Support};
use proptest::prelude::*;

fn interval(base: f64, reducible: f64) -> PiBarUSet {
    PiBarUSet { lhs: Matrix::zeros(0, 1), rhs: vec![], base: vec![base], reducible: vec![reducible] }
}

#[test]
fn interval_worst_case_by_hand() {
    let set = interval(0.8, 0.2);
    let wc = |x: f64| worst_case_value(&[x], &[1.0], &UncertaintySet::PiBar(set.clone())).unwrap().value;
    assert!((wc(0.0) - 1.0).abs() < 1e-12);
    assert!((wc(1.0) - 0.8).abs() < 1e-12);
    assert!((hbar_value(&[1.0], &[1.0], &set, &[1.0]).unwrap() - 0.8).abs() < 1e-12);
    assert!((hbar_value(&[0.0], &[1.0], &set, &[1.0]).unwrap() - 1.0).abs() < 1e-12);
    // Without a penalty the split form cannot tell x apart from zero.
    assert!((hbar_value(&[1.0], &[1.0], &set, &[0.0]).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn zero_budget_has_zero_worst_case() {
    let set = PiBarUSet {
        lhs: Matrix::from_rows(vec![vec![1.0, 1.0, 1.0]]).unwrap(),
        rhs: vec![0.0],
        base: vec![0.5, 2.0, 1.0],
        reducible: vec![1.0, 1.0, 3.0],
    };
    for x in [[0.0, 0.0, 0.0], [1.0, 0.0, 1.0]] {
        let wc = worst_case_value(&x, &[3.0, 1.0, 2.0], &UncertaintySet::PiBar(set.clone())).unwrap();
        assert_eq!(wc.value, 0.0);
        assert!(wc.xi.iter().all(|&v| v.abs() < 1e-12));
    }
}

#[test]
fn dimension_and_emptiness_errors() {
    let set = UncertaintySet::PiBar(interval(0.8, 0.2));
    assert!(matches!(worst_case_value(&[0.0], &[1.0, 2.0], &set), Err(OracleError::Dimension { .. })));
    let empty = UncertaintySet::Poly(PolyUSet {
        lhs: Matrix::from_rows(vec![vec![1.0], vec![-1.0]]).unwrap(),
        rhs: vec![0.0, -1.0],
        influence: Matrix::zeros(2, 1),
        nonnegative: false,
    });
    assert!(matches!(worst_case_value(&[0.0], &[1.0], &empty), Err(OracleError::EmptySet)));
    let free = UncertaintySet::Poly(PolyUSet {
        lhs: Matrix::from_rows(vec![vec![-1.0]]).unwrap(),
        rhs: vec![0.0],
        influence: Matrix::zeros(1, 1),
        nonnegative: false,
    });
    assert!(matches!(worst_case_value(&[0.0], &[1.0], &free), Err(OracleError::Unbounded)));
}

#[derive(Debug, Clone)]
struct Case {
    set: PiBarUSet,
    u: Vec<f64>,
    x: Vec<f64>,
    slack: Vec<f64>,
}

fn case() -> impl Strategy<Value = Case> {
    (1usize..6, 0usize..4).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(prop_oneof![Just(0.0), 0.0..3.0f64], n * m),
            prop::collection::vec(0.0..5.0f64, m),
            prop::collection::vec(0.0..2.0f64, n),
            prop::collection::vec(0.0..2.0f64, n),
            prop::collection::vec(0.0..4.0f64, n),
            prop::collection::vec(prop::bool::ANY, n),
            prop::collection::vec(0.0..1.0f64, n),
        )
            .prop_map(move |(d, rhs, base, reducible, u, x, slack)| Case {
                set: PiBarUSet {
                    lhs: Matrix::from_rows((0..m).map(|j| d[j * n..(j + 1) * n].to_vec()).collect()).unwrap(),
                    rhs,
                    base,
                    reducible,
                },
                u,
                x: x.into_iter().map(|b| if b { 1.0 } else { 0.0 }).collect(),
                slack,
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    // With a nonnegative constraint matrix the bound-row duals never exceed
    // the objective, so any penalty at least that large is exact.
    #[test]
    fn split_form_matches_worst_case(c in case()) {
        let h = worst_case_value(&c.x, &c.u, &UncertaintySet::PiBar(c.set.clone())).unwrap().value;
        let pibar: Vec<f64> = c.u.iter().zip(&c.slack).map(|(u, s)| u + s).collect();
        let hbar = hbar_value(&c.x, &c.u, &c.set, &pibar).unwrap();
        prop_assert!((h - hbar).abs() <= 1e-7, "h = {h}, hbar = {hbar}");
    }

    #[test]
    fn split_form_never_underestimates(c in case()) {
        let h = worst_case_value(&c.x, &c.u, &UncertaintySet::PiBar(c.set.clone())).unwrap().value;
        let pibar: Vec<f64> = c.u.iter().zip(&c.slack).map(|(u, s)| u * s).collect();
        prop_assert!(hbar_value(&c.x, &c.u, &c.set, &pibar).unwrap() >= h - 1e-7);
    }

    #[test]
    fn reducing_more_never_hurts(c in case(), k in 0usize..6) {
        let set = UncertaintySet::PiBar(c.set.clone());
        let k = k % c.x.len();
        let mut more = c.x.clone();
        more[k] = 1.0;
        let before = worst_case_value(&c.x, &c.u, &set).unwrap().value;
        let after = worst_case_value(&more, &c.u, &set).unwrap().value;
        prop_assert!(after <= before + 1e-9);
    }

    #[test]
    fn polyhedral_form_has_the_same_worst_case(c in case()) {
        let a = worst_case_value(&c.x, &c.u, &UncertaintySet::PiBar(c.set.clone())).unwrap().value;
        let b = worst_case_value(&c.x, &c.u, &UncertaintySet::Poly(c.set.to_poly())).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-9);
    }

    #[test]
    fn worst_case_point_lies_in_the_set(c in case()) {
        let set = UncertaintySet::PiBar(c.set.clone());
        let wc = worst_case_value(&c.x, &c.u, &set).unwrap();
        prop_assert!(set.instantiate(&c.x).unwrap().contains(&wc.xi, 1e-9));
        let value: f64 = wc.xi.iter().zip(&c.u).map(|(a, b)| a * b).sum();
        prop_assert!((value - wc.value).abs() <= 1e-9);
    }
}

fn example_problem() -> RobustLinearProblem {
    RobustLinearProblem {
        c: vec![1.0, 2.0],
        f: vec![1.0, -1.0],
        rows: vec![RobustRow {
            x_coeffs: vec![0.5, 0.0],
            y_coeffs: vec![1.0, 0.0],
            exposure: None,
            rhs: 4.0,
            set: UncertaintySet::PiBar(PiBarUSet {
                lhs: Matrix::from_rows(vec![vec![1.0, 1.0]]).unwrap(),
                rhs: vec![1.5],
                base: vec![0.25, 0.5],
                reducible: vec![1.0, 0.5],
            }),
        }],
        x_constraints: vec![XConstraint { coeffs: vec![1.0, 1.0], sense: Relation::Le, rhs: 1.0 }],
        y_domain: YDomain {
            lower: vec![0.0, 0.0],
            upper: vec![2.0, 1.0],
            binary: vec![false, true],
            constraints: vec![YConstraint { x: vec![0.0, 0.0], y: vec![1.0, 1.0], sense: Relation::Ge, rhs: 1.0 }],
        },
    }
}

#[test]
fn json_round_trip() {
    let p = example_problem();
    let text = p.to_json();
    assert_eq!(RobustLinearProblem::from_json(&text).unwrap(), p);
    assert!(RobustLinearProblem::from_json("{\"c\": [1.0]}").is_err());
}

#[test]
fn pibar_to_poly_keeps_the_region() {
    let UncertaintySet::PiBar(set) = example_problem().rows[0].set.clone() else { unreachable!() };
    let poly = set.to_poly();
    for x in [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]] {
        let a = set.instantiate(&x).unwrap();
        let b = poly.instantiate(&x).unwrap();
        for i in 0..=10 {
            for j in 0..=10 {
                let xi = [i as f64 * 0.15, j as f64 * 0.1];
                assert_eq!(a.contains(&xi, 1e-12), b.contains(&xi, 1e-12), "{x:?} {xi:?}");
            }
        }
    }
}

#[test]
fn feasibility_audit_reacts_to_perturbation() {
    let p = example_problem();
    // x = (1, 0) caps xi_0 at its base 0.25, so the worst case is 0.25 y_0.
    let report = robust_feasible(&p, &[1.0, 0.0], &[2.0, 0.0]).unwrap();
    assert!(report.feasible);
    assert!((report.rows[0].worst_case - 0.5).abs() < 1e-9);
    assert!((report.min_slack() - (4.0 - 2.5 - 0.5)).abs() < 1e-9);
    // x = 0 lets xi_0 reach 1.25.
    let report = robust_feasible(&p, &[0.0, 0.0], &[2.0, 0.0]).unwrap();
    assert!(!report.feasible);
    assert!((report.min_slack() + 0.5).abs() < 1e-9);
    let mut tight = p.clone();
    tight.rows[0].rhs = 3.0 - 1e-3;
    let report = robust_feasible(&tight, &[1.0, 0.0], &[2.0, 0.0]).unwrap();
    assert!(!report.feasible);
    assert!((report.min_slack() + 1e-3).abs() < 1e-9);
    assert!(robust_feasible(&p, &[1.0], &[2.0, 0.0]).is_err());
}

// ---- RO-SAT ----

fn max_satisfiable(cnf: &Cnf3) -> usize {
    let n = cnf.num_vars;
    (0u64..(1u64 << n))
        .map(|mask| {
            let a: Vec<bool> = (0..n).map(|j| (mask >> j) & 1 == 1).collect();
            cnf.clauses
                .iter()
                .filter(|c| c.iter().any(|&l| (l > 0) == a[l.unsigned_abs() as usize - 1]))
                .count()
        })
        .max()
        .unwrap()
}

fn rosat_objective(cnf: &Cnf3) -> f64 {
    let cp = build_bigm_counterpart(&build_rosat(cnf), ROSAT_BIG_M, Support::Sparse).unwrap();
    solve_counterpart(&cp, 1_000_000).unwrap().objective
}

#[test]
fn rosat_single_clause() {
    let cnf = Cnf3::new(3, &[vec![1, 2, -3]]).unwrap();
    assert!((rosat_objective(&cnf) + 1.0).abs() < 1e-9);
    let check = sat_equivalence_check(&cnf).unwrap();
    assert!(check.satisfiable && check.agrees);
}

#[test]
fn rosat_contradiction() {
    let cnf = Cnf3::new(1, &[vec![1], vec![-1]]).unwrap();
    assert_eq!(cnf.clauses, vec![[1, 1, 1], [-1, -1, -1]]);
    let obj = rosat_objective(&cnf);
    assert!(obj > -2.0 + 1e-6);
    assert!((obj + 1.0).abs() < 1e-9);
    let check = sat_equivalence_check(&cnf).unwrap();
    assert!(!check.satisfiable && check.agrees);
}

#[test]
fn rosat_without_clauses() {
    let cnf = Cnf3::new(2, &[]).unwrap();
    assert_eq!(rosat_objective(&cnf), 0.0);
    assert!(sat_equivalence_check(&cnf).unwrap().agrees);
}

#[test]
fn rosat_every_single_clause_pattern() {
    // Three positions, each one of three variables with either sign.
    let lits = [1, 2, 3, -1, -2, -3];
    let mut seen = std::collections::HashSet::new();
    for &a in &lits {
        for &b in &lits {
            for &c in &lits {
                let cnf = Cnf3::new(3, &[vec![a, b, c]]).unwrap();
                seen.insert(cnf.clauses[0]);
                let check = sat_equivalence_check(&cnf).unwrap();
                assert!(check.agrees, "{a} {b} {c}: {check:?}");
                assert!((check.milp_objective + 1.0).abs() < 1e-9);
            }
        }
    }
    assert_eq!(seen.len(), 216);
}

#[test]
fn too_many_variables_for_the_truth_table() {
    let cnf = Cnf3::new(13, &[vec![13]]).unwrap();
    assert!(matches!(sat_equivalence_check(&cnf), Err(OracleError::TooManyVariables(13))));
}

#[test]
fn dimacs_parsing() {
    let text = "c comment\np cnf 3 2\n1 -2 3 0\n-1\n2 0\n";
    let cnf = Cnf3::parse_dimacs(text).unwrap();
    assert_eq!(cnf, Cnf3::new(3, &[vec![1, -2, 3], vec![-1, 2]]).unwrap());
    assert_eq!(Cnf3::parse_dimacs(&cnf.to_string()).unwrap(), cnf);
    assert!(matches!(Cnf3::parse_dimacs("p cnf 2 2\n1 2 0\n"), Err(OracleError::Parse { .. })));
    assert!(matches!(Cnf3::parse_dimacs("p cnf 2 1\n1 5 0\n"), Err(OracleError::Parse { .. })));
    assert!(matches!(Cnf3::parse_dimacs("p cnf 4 1\n1 2 3 4 0\n"), Err(OracleError::Parse { .. })));
    assert!(matches!(Cnf3::parse_dimacs("1 2 0\n"), Err(OracleError::Parse { .. })));
    assert!(matches!(Cnf3::parse_dimacs("p cnf 2 1\n1 x 0\n"), Err(OracleError::Parse { line: 2, .. })));
}

fn cnf(vars: std::ops::RangeInclusive<usize>, clauses: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Cnf3> {
    (vars, clauses).prop_flat_map(|(n, m)| {
        let lit = (1..=n as i32, prop::bool::ANY).prop_map(|(v, neg)| if neg { -v } else { v });
        prop::collection::vec(prop::collection::vec(lit, 1..=3), m)
            .prop_map(move |clauses| Cnf3::new(n, &clauses).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn rosat_counts_satisfiable_clauses(cnf in cnf(1..=6, 1..=14)) {
        let obj = rosat_objective(&cnf);
        prop_assert!(obj >= -(cnf.clauses.len() as f64) - 1e-9);
        prop_assert!((obj + max_satisfiable(&cnf) as f64).abs() <= 1e-6, "{obj} for\n{cnf}");
    }

    #[test]
    fn rosat_equivalence_on_ten_variables(cnf in cnf(10..=10, 20..=20)) {
        let check = sat_equivalence_check(&cnf).unwrap();
        prop_assert!(check.agrees, "{check:?}\n{cnf}");
    }
}
