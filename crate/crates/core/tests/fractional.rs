//! Caputo kernel against oracles that share no code with the library:
//! a Lanczos gamma, singularity-subtracted composite Simpson, closed forms at
//! kinks, and the derivative relation between orders `α` and `1 + α`.

use aocfgd::fractional::{
    caputo_derivative_1d, caputo_derivative_poly, caputo_gradient, gamma_alpha,
    modified_fractional_gradient, FractionalConfig, LineFunction, ModifiedGradient, Univariate,
};
use aocfgd::lab::example3;
use aocfgd::model::{ObjectiveModel, QuadraticObjective, SmoothObjective};
use aocfgd::special::{gamma, gamma_ratio};
use aocfgd::Error;
use nalgebra::{dmatrix, dvector, DMatrix, DVector};
use proptest::prelude::*;
use std::sync::Arc;

/// Lanczos approximation, g = 7, n = 9.
fn lanczos_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * lanczos_gamma(1.0 - x));
    }
    let x = x - 1.0;
    let t = x + G + 0.5;
    let series = C[0] + (1..9).map(|i| C[i] / (x + i as f64)).sum::<f64>();
    (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * series
}

fn simpson(lo: f64, hi: f64, panels: usize, g: impl Fn(f64) -> f64) -> f64 {
    let h = (hi - lo) / panels as f64;
    let mut sum = g(lo) + g(hi);
    for i in 1..panels {
        sum += g(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0
}

/// `∫_lo^x (x−τ)^{−a} f'(τ) dτ` with the first two Taylor terms of `f'` at
/// `x` integrated exactly; the remainder is `O((x−τ)^{2−a})`.
fn kernel_integral_oracle(
    d1: impl Fn(f64) -> f64,
    d2: impl Fn(f64) -> f64,
    lo: f64,
    x: f64,
    a: f64,
) -> f64 {
    let len = x - lo;
    let (f1, f2) = (d1(x), d2(x));
    let rest = simpson(lo, x, 20_000, |t| {
        if t >= x {
            0.0
        } else {
            (x - t).powf(-a) * (d1(t) - f1 - f2 * (t - x))
        }
    });
    rest + f1 * len.powf(1.0 - a) / (1.0 - a) - f2 * len.powf(2.0 - a) / (2.0 - a)
}

fn caputo_oracle(
    d1: impl Fn(f64) -> f64,
    d2: impl Fn(f64) -> f64,
    c: f64,
    x: f64,
    alpha: f64,
) -> f64 {
    kernel_integral_oracle(d1, d2, c, x, alpha) / lanczos_gamma(1.0 - alpha)
}

#[test]
fn gamma_matches_lanczos() {
    for i in 1..200 {
        let x = i as f64 * 0.05;
        let (a, b) = (gamma(x), lanczos_gamma(x));
        assert!((a - b).abs() <= 1e-13 * b.abs(), "x = {x}: {a} vs {b}");
    }
    for (a, b) in [(3.0, 2.5), (1.5, 0.7), (20.0, 19.3)] {
        let r = lanczos_gamma(a) / lanczos_gamma(b);
        assert!((gamma_ratio(a, b) - r).abs() <= 1e-12 * r);
    }
}

#[test]
fn smooth_functions_match_subtracted_simpson() {
    let cases: Vec<(Box<dyn Fn(f64) -> f64>, Box<dyn Fn(f64) -> f64>)> = vec![
        (Box::new(f64::cos), Box::new(|t: f64| -t.sin())),
        (
            Box::new(|t: f64| 0.5 * (0.5 * t).exp()),
            Box::new(|t: f64| 0.25 * (0.5 * t).exp()),
        ),
        (
            Box::new(|t: f64| -2.0 * t / (1.0 + t * t).powi(2)),
            Box::new(|t: f64| (6.0 * t * t - 2.0) / (1.0 + t * t).powi(3)),
        ),
    ];
    for (d1, d2) in &cases {
        let f = Univariate::with_second(d1, d2);
        for alpha in [0.2, 0.5, 0.8] {
            for x in [0.8, 1.7, 2.5] {
                let c = 0.3;
                let got = caputo_derivative_1d(&f, c, x, alpha).unwrap();
                let want = caputo_oracle(d1, d2, c, x, alpha);
                assert!(
                    (got - want).abs() <= 1e-8 * (1.0 + want.abs()),
                    "alpha {alpha}, x {x}: {got} vs {want}"
                );
            }
        }
    }
}

#[test]
fn higher_order_relation() {
    // D^{1+α} f = d/dx D^α f − f'(c)(x−c)^{−α}/Γ(1−α)
    let f = Univariate::with_second(|t: f64| t.cos() + 0.3 * t * t, |t: f64| -t.sin() + 0.6 * t);
    let c = -0.4;
    for alpha in [0.3, 0.6] {
        for x in [0.5, 1.3] {
            let h = 1e-4;
            let slope = (caputo_derivative_1d(&f, c, x + h, alpha).unwrap()
                - caputo_derivative_1d(&f, c, x - h, alpha).unwrap())
                / (2.0 * h);
            let boundary = f.derivative(1, c) * (x - c).powf(-alpha) / lanczos_gamma(1.0 - alpha);
            let high = caputo_derivative_1d(&f, c, x, 1.0 + alpha).unwrap();
            assert!(
                (high - (slope - boundary)).abs() <= 1e-6 * (1.0 + high.abs()),
                "{high} vs {}",
                slope - boundary
            );
        }
    }
}

#[test]
fn max_function_kink_split() {
    let model: ObjectiveModel = example3().into();
    let base = dvector![1.0, 0.5];
    let line = model.line(&base, 0);
    // pieces tie where t² + 0.25 = 5t + 0.5
    let kink = (5.0 - 26f64.sqrt()) / 2.0;
    let (c, x) = (-1.0, 1.0);
    for alpha in [0.25, 0.5, 0.75] {
        let low = simpson(c, kink, 20_000, |t| (x - t).powf(-alpha) * 2.0 * t);
        let high = 5.0 * (x - kink).powf(1.0 - alpha) / (1.0 - alpha);
        let want = (low + high) / lanczos_gamma(1.0 - alpha);
        let got = caputo_derivative_1d(&line, c, x, alpha).unwrap();
        assert!(
            (got - want).abs() <= 1e-7 * (1.0 + want.abs()),
            "alpha {alpha}: {got} vs {want}"
        );

        // order 1+α: f'' = 2 below the kink, 0 above, plus the slope jump
        let jump = 5.0 - 2.0 * kink;
        let want2 = (2.0 * ((x - c).powf(1.0 - alpha) - (x - kink).powf(1.0 - alpha))
            / (1.0 - alpha)
            + jump * (x - kink).powf(-alpha))
            / lanczos_gamma(1.0 - alpha);
        let got2 = caputo_derivative_1d(&line, c, x, 1.0 + alpha).unwrap();
        assert!(
            (got2 - want2).abs() <= 1e-7 * (1.0 + want2.abs()),
            "order {}: {got2} vs {want2}",
            1.0 + alpha
        );
    }
}

#[test]
fn regularizer_sign_follows_beta_minus_gamma_alpha() {
    let a = dmatrix![4.0, 1.0, 0.5; 1.0, 3.0, -0.7; 0.5, -0.7, 2.0];
    let b = dvector![1.0, -2.0, 0.5];
    let q = QuadraticObjective::new(a.clone(), b, 0.0).unwrap();
    let f: ObjectiveModel = q.clone().into();
    let c = dvector![0.2, -0.3, 1.0];
    // coordinates on both sides of the terminal
    let x = dvector![1.1, -1.4, 0.4];
    for (alpha, beta) in [(0.5, 0.4), (0.7, 0.3), (0.3, 1.0)] {
        let got = ModifiedGradient::new(alpha, beta)
            .unwrap()
            .evaluate(&f, &c, &x)
            .unwrap();
        let d = DMatrix::from_diagonal(&a.diagonal());
        let minus = q.gradient(&x) + &d * (&x - &c) * (beta - gamma_alpha(alpha));
        let plus = q.gradient(&x) + &d * (&x - &c) * (beta + gamma_alpha(alpha));
        assert!(
            (&got - &minus).amax() <= 1e-9 * (1.0 + minus.amax()),
            "{got} vs {minus}"
        );
        assert!((&got - &plus).amax() > 1e-3);
    }
}

#[test]
fn classical_limit_of_the_modified_gradient() {
    let value: aocfgd::model::ValueFn =
        Arc::new(|x: &DVector<f64>| (0.5 * x[0]).exp() + x[0] * x[1].sin() + x[1] * x[1]);
    let grad: aocfgd::model::GradientFn = Arc::new(|x: &DVector<f64>| {
        dvector![
            0.5 * (0.5 * x[0]).exp() + x[1].sin(),
            x[0] * x[1].cos() + 2.0 * x[1]
        ]
    });
    let smooth = SmoothObjective::new(2, value.clone(), grad, None).unwrap();
    let f: ObjectiveModel = smooth.into();
    let x = dvector![0.7, -0.4];
    let cfg = FractionalConfig::new(1.0 - 1e-7, 0.0, dvector![0.1, 0.3]).unwrap();
    let got = modified_fractional_gradient(&f, &cfg, &x).unwrap();
    let h = 1e-6;
    for i in 0..2 {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += h;
        xm[i] -= h;
        let fd = (value(&xp) - value(&xm)) / (2.0 * h);
        assert!(
            (got[i] - fd).abs() <= 1e-4,
            "coordinate {i}: {} vs {fd}",
            got[i]
        );
    }
}

#[test]
fn quadratic_classical_limit_within_1e6() {
    let q =
        QuadraticObjective::new(dmatrix![2.0, 0.5; 0.5, 1.0], dvector![-1.0, 0.3], 0.0).unwrap();
    let f: ObjectiveModel = q.clone().into();
    let x = dvector![1.5, -0.5];
    let cfg = FractionalConfig::new(1.0 - 1e-7, 0.0, DVector::zeros(2)).unwrap();
    let got = modified_fractional_gradient(&f, &cfg, &x).unwrap();
    assert!((got - q.gradient(&x)).amax() <= 1e-6);
}

#[test]
fn terminal_point_is_regular() {
    let q =
        QuadraticObjective::new(dmatrix![2.0, 0.5; 0.5, 1.0], dvector![-1.0, 0.3], 0.0).unwrap();
    let f: ObjectiveModel = q.clone().into();
    let x = dvector![0.4, -0.2];
    let cfg = FractionalConfig::new(0.5, 0.9, x.clone()).unwrap();
    let got = modified_fractional_gradient(&f, &cfg, &x).unwrap();
    assert!((got - q.gradient(&x)).amax() <= 1e-12);
}

#[test]
fn cancelling_derivative_on_a_tiny_segment() {
    // f' vanishes to rounding at x: the rules disagree only by noise there
    let f: ObjectiveModel = aocfgd::lab::example2().into();
    let x = dvector![1.331640624999911, -0.1683593749999547];
    let c = dvector![1.3316406249985795, -0.16835937500095471];
    let cfg = FractionalConfig::new(0.6, gamma_alpha(0.6) + 0.05, c.clone()).unwrap();
    let got = modified_fractional_gradient(&f, &cfg, &x).unwrap();
    let q = aocfgd::lab::example2();
    let h = q.hessian().diagonal();
    let want = q.gradient(&x) + (&x - &c).component_mul(&h) * 0.05;
    assert!((got - want).amax() <= 1e-12);
}

#[test]
fn linear_objective_gradient() {
    let b = dvector![2.0, -3.0];
    let f: ObjectiveModel = QuadraticObjective::affine(b.clone(), 0.0).into();
    let x = dvector![0.64, 2.25];
    let cfg = FractionalConfig::new(0.5, 0.0, DVector::zeros(2)).unwrap();
    let got = caputo_gradient(&f, &cfg, &x).unwrap();
    for i in 0..2 {
        let want = b[i] * x[i].sqrt() / lanczos_gamma(1.5);
        assert!((got[i] - want).abs() <= 1e-12 * want.abs());
    }
}

#[test]
fn domain_and_order_errors() {
    let f = Univariate::new(|t: f64| t);
    assert!(matches!(
        caputo_derivative_1d(&f, 1.0, 1.0, 0.5),
        Err(Error::Domain(_))
    ));
    assert!(matches!(
        caputo_derivative_1d(&f, 1.0, 0.5, 0.5),
        Err(Error::Domain(_))
    ));
    for order in [0.0, 1.0, 2.0, -0.5, 2.5] {
        assert!(matches!(
            caputo_derivative_1d(&f, 0.0, 1.0, order),
            Err(Error::UnsupportedOrder(_))
        ));
    }
    let g: ObjectiveModel = QuadraticObjective::affine(dvector![1.0, 1.0], 0.0).into();
    let cfg = FractionalConfig::new(0.5, 0.0, dvector![0.0, 2.0]).unwrap();
    match caputo_gradient(&g, &cfg, &dvector![1.0, 1.0]) {
        Err(Error::Coordinate { index, .. }) => assert_eq!(index, 1),
        other => panic!("expected a coordinate error, got {other:?}"),
    }
}

fn monomial(p: i32, c: f64) -> Univariate<impl Fn(f64) -> f64, impl Fn(f64) -> f64> {
    Univariate::with_second(
        move |t: f64| p as f64 * (t - c).powi(p - 1),
        move |t: f64| {
            if p >= 2 {
                (p * (p - 1)) as f64 * (t - c).powi(p - 2)
            } else {
                0.0
            }
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn monomial_rule_matches_quadrature(
        p in 1i32..=4,
        alpha in prop_oneof![0.05f64..0.95, 1.05f64..1.95],
        h in 0.01f64..20.0,
        c in -3.0f64..3.0,
    ) {
        prop_assume!(alpha < 1.0 || p >= 2);
        let mut coeffs = vec![0.0; p as usize + 1];
        coeffs[p as usize] = 1.0;
        let closed = caputo_derivative_poly(&coeffs, c, c + h, alpha).unwrap();
        let quad = caputo_derivative_1d(&monomial(p, c), c, c + h, alpha).unwrap();
        prop_assert!((closed - quad).abs() <= 1e-8 * (1.0 + closed.abs()), "{} vs {}", closed, quad);
    }

    #[test]
    fn derivative_is_linear(
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        alpha in 0.05f64..0.95,
        x in 0.1f64..4.0,
    ) {
        let f = |t: f64| 1.0 + 2.0 * t - t * t;
        let g = |t: f64| 3.0 * t * t + 0.5 * t.powi(3);
        let combo = Univariate::new(move |t: f64| a * f(t) + b * g(t));
        let (df, dg) = (
            caputo_derivative_1d(&Univariate::new(f), 0.0, x, alpha).unwrap(),
            caputo_derivative_1d(&Univariate::new(g), 0.0, x, alpha).unwrap(),
        );
        let lhs = caputo_derivative_1d(&combo, 0.0, x, alpha).unwrap();
        let rhs = a * df + b * dg;
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + a.abs() * df.abs() + b.abs() * dg.abs()));
    }
}
