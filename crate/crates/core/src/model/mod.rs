//! Objective models and the quadratic least-squares family.

mod io;
mod objective;
mod quadratic;

pub use io::{instance_from_toml, instance_to_toml};
pub use objective::{
    CoordinateLine, GradientFn, HessianFn, MaxOfQuadratics, ObjectiveKind, ObjectiveModel,
    QuadraticObjective, SmoothObjective, ValueFn,
};
pub use quadratic::{
    condition_number, quadratic_effective_gradient, quadratic_effective_gradient_with,
    random_quadratic_mop, tikhonov_solve, tikhonov_solve_with, QuadraticMop, Regularizer,
    TikhonovSolution,
};
