use aocfgd::fractional::{gamma_alpha, FractionalConfig};
use aocfgd::model::{
    condition_number, instance_from_toml, instance_to_toml, quadratic_effective_gradient,
    random_quadratic_mop, tikhonov_solve, tikhonov_solve_with, ObjectiveModel, QuadraticMop,
    QuadraticObjective, Regularizer, SmoothObjective,
};
use aocfgd::Error;
use nalgebra::{dmatrix, dvector, DMatrix, DVector};
use proptest::prelude::*;
use std::sync::Arc;

fn weights(m: usize, raw: &[f64]) -> Vec<f64> {
    let w: Vec<f64> = raw.iter().take(m).map(|v| v + 0.05).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|v| v / s).collect()
}

/// `Σ λ_j f_j` and the regularizer penalty `Σ λ_j (x−c)ᵀ diag(A_j)(x−c)`.
fn split_objective(mop: &QuadraticMop, lambda: &[f64], x: &DVector<f64>) -> (f64, f64) {
    let data = (0..mop.num_objectives())
        .map(|j| lambda[j] * mop.objective(j).value(x))
        .sum();
    let r = x - mop.terminal();
    let penalty = (0..mop.num_objectives())
        .map(|j| lambda[j] * r.dot(&(mop.regularizer(j, Regularizer::HessianDiagonal) * &r)))
        .sum();
    (data, penalty)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn normal_equations_hold(
        seed in 0u64..10_000,
        n in 2usize..6,
        m in 1usize..4,
        gamma in 0.0f64..5.0,
        raw in proptest::collection::vec(0.0f64..1.0, 3),
    ) {
        let mop = random_quadratic_mop(n, n + 1, m, seed).unwrap();
        let lambda = weights(m, &raw);
        let c = DVector::from_fn(n, |i, _| 0.3 * i as f64 - 0.4);
        let sol = tikhonov_solve(&mop, gamma, &lambda, &c).unwrap();
        // Σ λ_j [A_j x + b_j + γ diag(A_j)(x − c)] = 0
        let residual = (0..m).fold(DVector::zeros(n), |acc, j| {
            acc + (mop.gram(j) * &sol.x_tik + mop.linear(j)
                + mop.regularizer(j, Regularizer::HessianDiagonal) * (&sol.x_tik - &c) * gamma)
                * lambda[j]
        });
        prop_assert!(residual.amax() <= 1e-8);
        prop_assert!(sol.kappa >= 1.0 && sol.sigma_max > 0.0);
    }

    #[test]
    fn tikhonov_path_is_monotone(seed in 0u64..10_000, n in 2usize..6) {
        let mop = random_quadratic_mop(n, n + 2, 2, seed)
            .unwrap()
            .with_terminal(DVector::from_element(n, 0.5))
            .unwrap();
        let lambda = [0.5, 0.5];
        let mut last: Option<(f64, f64)> = None;
        for gamma in [0.0, 0.01, 0.1, 0.5, 1.0, 5.0, 50.0] {
            let x = tikhonov_solve(&mop, gamma, &lambda, mop.terminal()).unwrap().x_tik;
            let (data, penalty) = split_objective(&mop, &lambda, &x);
            if let Some((d0, p0)) = last {
                prop_assert!(data >= d0 - 1e-10 * (1.0 + d0.abs()));
                prop_assert!(penalty <= p0 + 1e-10 * (1.0 + p0.abs()));
            }
            last = Some((data, penalty));
        }
    }

    #[test]
    fn solution_scales_with_data_and_terminal(seed in 0u64..10_000, s in 0.1f64..10.0, gamma in 0.0f64..3.0) {
        let mop = random_quadratic_mop(4, 5, 2, seed).unwrap();
        let c = dvector![0.2, -0.1, 0.4, 1.0];
        let scaled = QuadraticMop::new(
            mop.factors().to_vec(),
            mop.targets().iter().map(|y| y * s).collect(),
            c.clone() * s,
        )
        .unwrap();
        let lambda = [0.3, 0.7];
        let a = tikhonov_solve(&mop, gamma, &lambda, &c).unwrap().x_tik;
        let b = tikhonov_solve(&scaled, gamma, &lambda, scaled.terminal()).unwrap().x_tik;
        prop_assert!((b - a * s).amax() <= 1e-9 * s * (1.0 + s));
    }
}

#[test]
fn tikhonov_point_is_critical_for_the_fractional_gradient() {
    // x_Tik(γ) with γ = β − γ_α zeroes the λ-weighted modified gradient.
    let mop = random_quadratic_mop(5, 6, 3, 11).unwrap();
    let c = DVector::from_element(5, -0.2);
    let lambda = [0.2, 0.5, 0.3];
    let alpha = 0.6;
    let beta = gamma_alpha(alpha) + 0.25;
    let cfg = FractionalConfig::new(alpha, beta, c.clone()).unwrap();
    let x = tikhonov_solve(&mop, 0.25, &lambda, &c).unwrap().x_tik;
    let total = (0..3).fold(DVector::zeros(5), |acc, j| {
        acc + quadratic_effective_gradient(&mop, j, &cfg, &x).unwrap() * lambda[j]
    });
    assert!(total.amax() < 1e-10);
}

#[test]
fn closed_form_gradient_matches_quadrature() {
    let mop = random_quadratic_mop(3, 4, 2, 5).unwrap();
    let c = dvector![0.1, -0.5, 0.3];
    let x = dvector![0.8, -1.2, -0.4];
    let alpha = 0.4;
    let cfg = FractionalConfig::new(alpha, gamma_alpha(alpha) + 0.2, c).unwrap();
    for j in 0..2 {
        let f: ObjectiveModel = mop.objective(j).into();
        let quad = aocfgd::fractional::modified_fractional_gradient(&f, &cfg, &x).unwrap();
        let closed = quadratic_effective_gradient(&mop, j, &cfg, &x).unwrap();
        assert!((quad - closed).amax() <= 1e-9);
    }
}

#[test]
fn zero_gamma_recovers_the_planted_solution() {
    for seed in 0..5 {
        let mop = random_quadratic_mop(6, 8, 2, seed).unwrap();
        let x = tikhonov_solve(&mop, 0.0, &[0.4, 0.6], mop.terminal())
            .unwrap()
            .x_tik;
        assert!((x - mop.truth().unwrap()).amax() < 1e-10);
        for j in 0..2 {
            assert!(mop.objective(j).value(mop.truth().unwrap()).abs() < 1e-12);
        }
    }
}

#[test]
fn large_gamma_pulls_to_the_terminal() {
    let mop = random_quadratic_mop(4, 6, 2, 3).unwrap();
    let c = dvector![1.0, 2.0, -1.0, 0.5];
    let x = tikhonov_solve(&mop, 1e9, &[0.5, 0.5], &c).unwrap().x_tik;
    assert!((x - c).amax() < 1e-7);
}

#[test]
fn regularizer_shapes() {
    let w = dmatrix![1.0, 2.0; -1.0, 0.5];
    let mop =
        QuadraticMop::new(vec![w.clone()], vec![dvector![1.0, 1.0]], DVector::zeros(2)).unwrap();
    let a = &w * w.transpose();
    let rt = mop.rtilde(0);
    for i in 0..2 {
        assert!((rt[i] * rt[i] - a[(i, i)]).abs() < 1e-14);
    }
    assert_eq!(
        mop.regularizer(0, Regularizer::HessianDiagonal),
        DMatrix::from_diagonal(&a.diagonal())
    );
    assert_eq!(
        mop.regularizer(0, Regularizer::RootDiagonal),
        DMatrix::from_diagonal(&rt)
    );
    assert_eq!(
        mop.regularizer(0, Regularizer::OuterProduct),
        &rt * rt.transpose()
    );
    let root = tikhonov_solve_with(
        &mop,
        0.3,
        &[1.0],
        &DVector::zeros(2),
        Regularizer::RootDiagonal,
    )
    .unwrap();
    assert!(root.x_tik.iter().all(|v| v.is_finite()));
}

#[test]
fn singular_and_invalid_inputs() {
    // rank one data and no regularization
    let mop = QuadraticMop::new(
        vec![dmatrix![1.0; 1.0]],
        vec![dvector![1.0]],
        DVector::zeros(2),
    )
    .unwrap();
    assert!(matches!(
        tikhonov_solve(&mop, 0.0, &[1.0], mop.terminal()),
        Err(Error::Singular(_))
    ));
    assert!(matches!(
        tikhonov_solve(&mop, -1.0, &[1.0], mop.terminal()),
        Err(Error::Input(_))
    ));
    assert!(matches!(
        tikhonov_solve(&mop, 0.1, &[0.5], mop.terminal()),
        Err(Error::Input(_))
    ));
    assert!(condition_number(&dmatrix![1.0, 0.0; 0.0, 0.0])
        .unwrap()
        .is_infinite());
    assert!((condition_number(&dmatrix![4.0, 0.0; 0.0, 0.5]).unwrap() - 8.0).abs() < 1e-12);
    assert!(QuadraticMop::new(vec![], vec![], DVector::zeros(2)).is_err());
    assert!(random_quadratic_mop(0, 1, 1, 0).is_err());
}

#[test]
fn instance_files_round_trip() {
    let mop = random_quadratic_mop(3, 4, 2, 77).unwrap();
    let text = instance_to_toml(&mop).unwrap();
    let back = instance_from_toml(&text).unwrap();
    assert_eq!(back, mop);
    assert_eq!(instance_to_toml(&back).unwrap(), text);
    let wrong = text.replace("aocfgd-quadratic-mop", "something-else");
    assert!(matches!(instance_from_toml(&wrong), Err(Error::Format(_))));
    assert!(instance_from_toml("not toml at all = = =").is_err());
}

#[test]
fn generator_is_deterministic() {
    assert_eq!(
        random_quadratic_mop(4, 5, 3, 9).unwrap(),
        random_quadratic_mop(4, 5, 3, 9).unwrap()
    );
    assert_ne!(
        random_quadratic_mop(4, 5, 3, 9).unwrap(),
        random_quadratic_mop(4, 5, 3, 10).unwrap()
    );
}

#[test]
fn smooth_objective_checks_its_gradient() {
    let value: aocfgd::model::ValueFn = Arc::new(|x: &DVector<f64>| x[0] * x[0] + x[1]);
    let good: aocfgd::model::GradientFn = Arc::new(|x: &DVector<f64>| dvector![2.0 * x[0], 1.0]);
    let bad: aocfgd::model::GradientFn = Arc::new(|x: &DVector<f64>| dvector![x[0], 1.0]);
    assert!(SmoothObjective::new(2, value.clone(), good, None).is_ok());
    assert!(SmoothObjective::new(2, value, bad, None).is_err());
}

#[test]
fn quadratic_validation() {
    assert!(
        QuadraticObjective::new(dmatrix![1.0, 2.0; 0.0, 1.0], dvector![0.0, 0.0], 0.0).is_err()
    );
    assert!(QuadraticObjective::new(dmatrix![1.0], dvector![0.0, 0.0], 0.0).is_err());
    let q =
        QuadraticObjective::new(dmatrix![2.0, 1.0; 1.0, 2.0], dvector![1.0, -1.0], 3.0).unwrap();
    let x = dvector![0.5, -2.0];
    let h = 1e-6;
    let g = q.gradient(&x);
    for i in 0..2 {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += h;
        xm[i] -= h;
        assert!(((q.value(&xp) - q.value(&xm)) / (2.0 * h) - g[i]).abs() < 1e-6);
    }
    assert!(q.rounding_error(&x) > 0.0 && q.rounding_error(&x) < 1e-13);
}
