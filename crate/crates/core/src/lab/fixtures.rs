//! Small analytic problems with known answers.

use nalgebra::{dmatrix, dvector, DMatrix, DVector};

use crate::error::Result;
use crate::fractional::{gamma_alpha, ModifiedGradient};
use crate::model::{MaxOfQuadratics, ObjectiveModel, QuadraticObjective};
use crate::solver::{run_adaptive, IterationTrace, SolverConfig, StageSchedule, TerminalMode};

use super::baselines::{iterations_to_target, mogd_baseline, subgradient_baseline};

/// `4x₁² + x₂² − 2x₁x₂ − 3x₁ + 4x₂`.
pub fn example1() -> QuadraticObjective {
    QuadraticObjective::new(dmatrix![8.0, -2.0; -2.0, 2.0], dvector![-3.0, 4.0], 0.0)
        .expect("valid fixture")
}

/// `x₁² + 4x₂² − 2x₁x₂ − 3x₁ + 4x₂`.
pub fn example2() -> QuadraticObjective {
    QuadraticObjective::new(dmatrix![2.0, -2.0; -2.0, 8.0], dvector![-3.0, 4.0], 0.0)
        .expect("valid fixture")
}

/// `max{5x₁ + x₂, x₁² + x₂²}`.
pub fn example3() -> MaxOfQuadratics {
    let linear = QuadraticObjective::affine(dvector![5.0, 1.0], 0.0);
    let square = QuadraticObjective::new(DMatrix::identity(2, 2) * 2.0, dvector![0.0, 0.0], 0.0)
        .expect("valid fixture");
    MaxOfQuadratics::new(vec![linear, square]).expect("valid fixture")
}

/// Two-objective problem `(example2, example1)` with distinct minimizers.
pub fn example2_pair() -> Vec<ObjectiveModel> {
    vec![example2().into(), example1().into()]
}

/// Minimizer of a strictly convex quadratic.
pub fn quadratic_minimizer(q: &QuadraticObjective) -> Option<DVector<f64>> {
    q.hessian().clone().lu().solve(&(-q.linear()))
}

/// Root of the de-scaled fractional gradient `∇f − γ diag(A)(x − c) = 0`
/// (β = 0) of a quadratic.
pub fn fractional_critical_point(
    q: &QuadraticObjective,
    alpha: f64,
    terminal: &DVector<f64>,
) -> Option<DVector<f64>> {
    let g = gamma_alpha(alpha);
    let d = DMatrix::from_diagonal(&q.hessian().diagonal());
    let lhs = q.hessian() - &d * g;
    let rhs = -q.linear() - &d * terminal * g;
    lhs.lu().solve(&rhs)
}

/// Terminal for which `point` is the `β = 0` fractional critical point.
pub fn terminal_for_critical_point(
    q: &QuadraticObjective,
    alpha: f64,
    point: &DVector<f64>,
) -> DVector<f64> {
    let g = gamma_alpha(alpha);
    let grad = q.gradient(point);
    DVector::from_fn(point.len(), |i, _| {
        point[i] - grad[i] / (g * q.hessian()[(i, i)])
    })
}

/// Stage schedule `α = {0.5, 0.7, 0.9}` with the given regularizers.
pub fn three_stage_schedule(gammas: [f64; 3], iterations: [usize; 3]) -> Result<StageSchedule> {
    StageSchedule::from_gammas(
        &[0.5, 0.7, 0.9],
        &gammas,
        &iterations,
        TerminalMode::Fixed(DVector::zeros(2)),
    )
}

#[derive(Debug, Clone)]
pub struct Example1Report {
    pub classical_reference: DVector<f64>,
    pub classical_value_reference: f64,
    pub classical_found: DVector<f64>,
    pub classical_value_found: f64,
    pub fractional_point: DVector<f64>,
    pub fractional_value: f64,
    /// `‖modified gradient‖` at the fractional point, by quadrature.
    pub fractional_residual: f64,
    pub reported_point: DVector<f64>,
    pub reported_value: f64,
    pub value_at_reported_point: f64,
    pub recovered_terminal: DVector<f64>,
}

/// Classical and `α = 0.5` critical points of the first example, `c = 0`.
pub fn example1_report(cfg: &SolverConfig) -> Result<Example1Report> {
    let q = example1();
    let f: ObjectiveModel = q.clone().into();
    let trace = mogd_baseline(std::slice::from_ref(&f), &dvector![1.0, 1.0], cfg);
    let c = DVector::zeros(2);
    let fractional_point = fractional_critical_point(&q, 0.5, &c).expect("nonsingular");
    let engine = ModifiedGradient::new(0.5, 0.0)?;
    let fractional_residual = engine.evaluate(&f, &c, &fractional_point)?.norm();
    let reported_point = dvector![0.34313689, -0.12745096];
    Ok(Example1Report {
        classical_reference: quadratic_minimizer(&q).expect("nonsingular"),
        classical_value_reference: q.value(&quadratic_minimizer(&q).expect("nonsingular")),
        classical_found: trace.final_x().clone(),
        classical_value_found: trace.final_values()[0],
        fractional_value: q.value(&fractional_point),
        fractional_point,
        fractional_residual,
        value_at_reported_point: q.value(&reported_point),
        recovered_terminal: terminal_for_critical_point(&q, 0.5, &reported_point),
        reported_point,
        reported_value: -0.769607,
    })
}

/// Staged run on the second example from `(1, 1)` with `c = 0`.
pub fn example2_run(cfg: &SolverConfig, schedule: &StageSchedule) -> IterationTrace {
    run_adaptive(&[example2().into()], &dvector![1.0, 1.0], cfg, schedule)
}

#[derive(Debug, Clone)]
pub struct Example3Report {
    pub staged: IterationTrace,
    pub subgradient: IterationTrace,
    /// Steps until `f ≤ 1e-3`.
    pub staged_iterations: Option<usize>,
    pub subgradient_iterations: Option<usize>,
}

/// Staged descent against the subgradient method from `(3, 3)`.
pub fn example3_report(
    cfg: &SolverConfig,
    schedule: &StageSchedule,
    subgradient_steps: usize,
) -> Example3Report {
    let f: ObjectiveModel = example3().into();
    let x0 = dvector![3.0, 3.0];
    let staged = run_adaptive(std::slice::from_ref(&f), &x0, cfg, schedule);
    let subgradient = subgradient_baseline(&f, &x0, subgradient_steps, 1.0);
    Example3Report {
        staged_iterations: iterations_to_target(&staged, 0.0, 1e-3),
        subgradient_iterations: iterations_to_target(&subgradient, 0.0, 1e-3),
        staged,
        subgradient,
    }
}
