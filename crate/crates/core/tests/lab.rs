use aocfgd::fractional::{gamma_alpha, FractionalConfig};
use aocfgd::lab::{
    adrs, comparison_table, comparison_to_csv, dominates, example1, example2, example2_pair,
    example3, fractional_critical_point, front_to_csv, iterations_to_target, nondominated,
    pareto_sweep, start_points, subgradient_baseline, terminal_for_critical_point,
    three_stage_schedule, verify_rate_theorem5, verify_staged_theorem6, FrontPoint, Method,
    StartLayout,
};
use aocfgd::model::{random_quadratic_mop, ObjectiveModel, QuadraticObjective};
use aocfgd::solver::{
    IterationRecord, IterationTrace, MultiplierMode, SolverConfig, StageSchedule, StepRule,
    TerminalMode, Termination,
};
use nalgebra::{dvector, DVector};
use proptest::prelude::*;

fn point(values: Vec<f64>, i: usize) -> FrontPoint {
    FrontPoint {
        values,
        x: dvector![0.0],
        start_index: i,
        norm_d: 0.0,
    }
}

/// Minimizer of `w f₁ + (1 − w) f₂` for the pair.
fn weighted_minimizer(w: f64) -> DVector<f64> {
    let (a, b) = (example2(), example1());
    let h = a.hessian() * w + b.hessian() * (1.0 - w);
    let g = a.linear() * w + b.linear() * (1.0 - w);
    h.lu().solve(&(-g)).unwrap()
}

/// Least-squares `w` with `w ∇f₁(x) + (1 − w) ∇f₂(x) ≈ 0`.
fn best_weight(x: &DVector<f64>) -> f64 {
    let (g1, g2) = (example2().gradient(x), example1().gradient(x));
    let diff = &g1 - &g2;
    -g2.dot(&diff) / diff.norm_squared()
}

/// Objective values along the weighted-sum curve, `w` on a uniform grid.
fn analytic_front(samples: usize) -> Vec<Vec<f64>> {
    (0..=samples)
        .map(|i| {
            let x = weighted_minimizer(i as f64 / samples as f64);
            vec![example2().value(&x), example1().value(&x)]
        })
        .collect()
}

#[test]
fn pair_front_lies_on_the_weighted_sum_curve() {
    let starts = start_points(
        &StartLayout::Random {
            lb: dvector![-3.0, -3.0],
            ub: dvector![3.0, 3.0],
            seed: 7,
        },
        40,
    )
    .unwrap();
    let schedule = three_stage_schedule([0.1, 0.01, 0.0], [50, 50, 1900]).unwrap();
    let front = pareto_sweep(
        &example2_pair(),
        None,
        &Method::Moaocfgd(schedule),
        &SolverConfig::default(),
        &starts,
    );
    assert!(front.failures.is_empty(), "{:?}", front.failures);
    assert!(front.points.len() > 5);
    let values: Vec<Vec<f64>> = front.points.iter().map(|p| p.values.clone()).collect();
    // every computed point is the weighted-sum minimizer for some w
    for p in &front.points {
        let w = best_weight(&p.x);
        assert!((0.0..=1.0).contains(&w), "weight {w}");
        assert!(
            (weighted_minimizer(w) - &p.x).amax() < 1e-3,
            "{:?} is off the front",
            p.x
        );
    }
    // and the sample spreads over it
    let coverage = adrs(&values, &analytic_front(200)).unwrap();
    assert!(coverage < 0.1, "ADRS {coverage}");
    assert_eq!(front_to_csv(&front).lines().count(), front.points.len() + 1);
}

#[test]
fn sweeps_are_reproducible() {
    let starts = start_points(
        &StartLayout::Segment {
            lb: dvector![-2.0, -2.0],
            ub: dvector![2.0, 3.0],
        },
        12,
    )
    .unwrap();
    let schedule = three_stage_schedule([0.1, 0.01, 0.0], [30, 30, 300]).unwrap();
    let method = Method::Moaocfgd(schedule);
    let run = || {
        front_to_csv(&pareto_sweep(
            &example2_pair(),
            None,
            &method,
            &SolverConfig::default(),
            &starts,
        ))
    };
    assert_eq!(run(), run());
    let mogd = || {
        front_to_csv(&pareto_sweep(
            &example2_pair(),
            None,
            &Method::Mogd,
            &SolverConfig::default(),
            &starts,
        ))
    };
    assert_eq!(mogd(), mogd());
}

#[test]
fn comparison_csv_is_reproducible_up_to_timing() {
    let mop = random_quadratic_mop(8, 8, 2, 3).unwrap();
    let cfg = SolverConfig {
        max_iterations: 300,
        ..SolverConfig::default()
    };
    let x0 = DVector::from_element(8, 1.01);
    let mask = |csv: String| -> String {
        csv.lines()
            .map(|l| {
                let mut cols: Vec<&str> = l.split(',').collect();
                cols[4] = "-";
                cols.join(",")
            })
            .collect::<Vec<_>>()
            .join("\n")
    };
    let a = comparison_table(&mop, &[0.25, 1.0], &cfg, &x0, 0.5).unwrap();
    let b = comparison_table(&mop, &[0.25, 1.0], &cfg, &x0, 0.5).unwrap();
    assert_eq!(a.len(), 4);
    assert_eq!(mask(comparison_to_csv(&a)), mask(comparison_to_csv(&b)));
    assert!(comparison_to_csv(&a)
        .starts_with("gamma,method,condition_number,iterations,wall_seconds,final_error\n"));
    for row in &a {
        assert!(row.condition_number >= 1.0);
        assert!(!matches!(row.termination, Termination::Error(_)));
    }
}

#[test]
fn subgradient_stops_at_a_zero_subgradient() {
    // the origin is the minimizer of the max function
    let f: ObjectiveModel = example3().into();
    let trace = subgradient_baseline(&f, &dvector![0.0, 0.0], 100, 1.0);
    assert!(matches!(trace.termination, Termination::Tolerance));
    assert_eq!(trace.records.len(), 1);
    // elsewhere it runs the full budget
    let trace = subgradient_baseline(&f, &dvector![3.0, 3.0], 50, 1.0);
    assert_eq!(trace.records.len(), 51);
    assert!(trace.records.iter().all(|r| r.norm_d > 0.0));
}

#[test]
fn iterations_to_target_reads_the_first_hit() {
    let record = |k: usize, f: f64| IterationRecord {
        k,
        stage: 0,
        eta: 1.0,
        backtracks: 0,
        t: -1.0,
        norm_d: 1.0,
        values: vec![f],
        x: dvector![0.0],
        multipliers: vec![1.0],
        elapsed_seconds: 0.0,
    };
    let trace = IterationTrace {
        records: vec![
            record(0, 5.0),
            record(1, 0.5),
            record(2, 1e-4),
            record(3, 0.0),
        ],
        stages: Vec::new(),
        termination: Termination::MaxIterations,
        warnings: Vec::new(),
    };
    assert_eq!(iterations_to_target(&trace, 0.0, 1e-3), Some(2));
    assert_eq!(iterations_to_target(&trace, 0.0, 1.0), Some(1));
    assert_eq!(iterations_to_target(&trace, -1.0, 1e-3), None);
}

#[test]
fn staged_bound_holds_and_is_nonnegative() {
    let mop = random_quadratic_mop(4, 6, 2, 12).unwrap();
    let schedule = StageSchedule::from_gammas(
        &[0.5, 0.7, 0.9],
        &[0.3, 0.05, 0.005],
        &[300, 300, 1500],
        TerminalMode::Fixed(DVector::zeros(4)),
    )
    .unwrap();
    let cfg = SolverConfig {
        tolerance: f64::MIN_POSITIVE,
        max_iterations: 100_000,
        step: StepRule::Fixed { eta: 1.0 },
        multipliers: MultiplierMode::Uniform,
        ..SolverConfig::default()
    };
    let rep =
        verify_staged_theorem6(&mop, &schedule, &cfg, &DVector::from_element(4, 2.0)).unwrap();
    assert!(rep.recursion_ok && rep.final_ok, "{:?}", rep.stages);
    assert!(rep.bound >= rep.final_error);
    assert!(rep.b_max > 0.0 && rep.c_const >= 0.0);
    for s in &rep.stages {
        assert!(s.r >= 0.0 && s.r < 1.0);
        assert!(s.epsilon >= 0.0 && s.end_error >= 0.0 && s.e >= 0.0 && s.lipschitz_bound >= 0.0);
    }
    // the check refuses live multipliers and backtracking
    let live = SolverConfig {
        multipliers: MultiplierMode::Live,
        ..cfg.clone()
    };
    assert!(verify_staged_theorem6(&mop, &schedule, &live, &DVector::zeros(4)).is_err());
    let armijo = SolverConfig {
        step: StepRule::Backtracking,
        ..cfg
    };
    assert!(verify_staged_theorem6(&mop, &schedule, &armijo, &DVector::zeros(4)).is_err());
}

#[test]
fn rate_check_contracts_to_the_tikhonov_point() {
    let mop = random_quadratic_mop(4, 3, 2, 2).unwrap();
    let frac = FractionalConfig::new(0.5, gamma_alpha(0.5) + 0.2, DVector::zeros(4)).unwrap();
    let rep = verify_rate_theorem5(
        &mop,
        &frac,
        1.0,
        &[0.5, 0.5],
        &DVector::from_element(4, 2.0),
        5_000,
    )
    .unwrap();
    assert!(rep.violation.is_none() && rep.monotone);
    assert!(rep.fixed_point_error < 1e-8);
    assert!(rep.predicted_rate < 1.0);
    // the observed slowest-mode ratio matches the spectral prediction
    assert!(
        (rep.fitted_rate - rep.predicted_rate).abs() < 1e-3,
        "{} vs {}",
        rep.fitted_rate,
        rep.predicted_rate
    );
}

#[test]
fn critical_point_and_terminal_are_inverse() {
    let q: QuadraticObjective = example1();
    let c = dvector![0.3, -0.8];
    let x = fractional_critical_point(&q, 0.5, &c).unwrap();
    assert!((terminal_for_critical_point(&q, 0.5, &x) - c).amax() < 1e-12);
}

#[test]
fn dominance_and_adrs_edge_cases() {
    assert!(dominates(&[1.0, 1.0], &[1.0, 2.0]));
    assert!(!dominates(&[1.0, 2.0], &[1.0, 2.0]));
    assert!(!dominates(&[0.0, 3.0], &[1.0, 2.0]));
    assert!(nondominated(&[]).is_empty());
    assert_eq!(adrs(&[], &[vec![0.0, 0.0]]).unwrap(), f64::INFINITY);
    assert!(adrs(&[vec![0.0]], &[vec![0.0, 0.0]]).is_err());
    // flat reference: unit scaling
    assert_eq!(adrs(&[vec![2.0, 0.0]], &[vec![0.0, 0.0]]).unwrap(), 2.0);
    assert!(start_points(
        &StartLayout::Segment {
            lb: dvector![1.0],
            ub: dvector![0.0]
        },
        3
    )
    .is_err());
    assert!(start_points(
        &StartLayout::Segment {
            lb: dvector![0.0],
            ub: dvector![1.0]
        },
        0
    )
    .is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nondominated_set_is_correct(
        raw in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0, -5.0f64..5.0), 1..30),
    ) {
        let pts: Vec<FrontPoint> = raw.iter().enumerate().map(|(i, (a, b, c))| point(vec![*a, *b, *c], i)).collect();
        let front = nondominated(&pts);
        prop_assert!(!front.is_empty());
        for p in &front {
            prop_assert!(!pts.iter().any(|q| dominates(&q.values, &p.values)));
        }
        for q in &pts {
            let covered = front.iter().any(|p| p.values == q.values || dominates(&p.values, &q.values))
                || front.iter().any(|p| p.values.iter().zip(&q.values).all(|(a, b)| (a - b).abs() <= 1e-9));
            prop_assert!(covered || pts.iter().any(|r| dominates(&r.values, &q.values)));
        }
        prop_assert!(front.windows(2).all(|w| w[0].values[0] <= w[1].values[0]));
    }

    #[test]
    fn adrs_properties(
        reference in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..15),
        front in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..15),
        extra in (-5.0f64..5.0, -5.0f64..5.0),
    ) {
        let reference: Vec<Vec<f64>> = reference.iter().map(|(a, b)| vec![*a, *b]).collect();
        let front: Vec<Vec<f64>> = front.iter().map(|(a, b)| vec![*a, *b]).collect();
        prop_assert_eq!(adrs(&reference, &reference).unwrap(), 0.0);
        let base = adrs(&front, &reference).unwrap();
        prop_assert!(base >= 0.0);
        // adding points can only help
        let mut more = front.clone();
        more.push(vec![extra.0, extra.1]);
        prop_assert!(adrs(&more, &reference).unwrap() <= base);
        // invariant under a common shift
        let shift = |v: &Vec<Vec<f64>>| v.iter().map(|p| vec![p[0] + 3.0, p[1] - 1.0]).collect::<Vec<_>>();
        let shifted = adrs(&shift(&front), &shift(&reference)).unwrap();
        prop_assert!((shifted - base).abs() <= 1e-12 * (1.0 + base));
    }
}
