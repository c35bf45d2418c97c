//! Side-by-side runs of the classical and fractional methods per regularizer.

use crate::clock::Stopwatch;
use std::fmt::Write as _;

use nalgebra::DVector;

use crate::error::Result;
use crate::fractional::{gamma_alpha, FractionalConfig};
use crate::model::{condition_number, tikhonov_solve, QuadraticMop, Regularizer};
use crate::solver::{run_single_stage, Merit, MultiplierMode, SolverConfig, Termination};

use super::baselines::mogd_baseline;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareMethod {
    Mogd,
    Moaocfgd,
}

impl CompareMethod {
    pub fn label(self) -> &'static str {
        match self {
            Self::Mogd => "MOGD",
            Self::Moaocfgd => "MOAOCFGD",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub gamma: f64,
    pub method: CompareMethod,
    /// `κ` of the method's system matrix under uniform multipliers.
    pub condition_number: f64,
    pub iterations: usize,
    pub wall_seconds: f64,
    /// Distance to the method's own fixed point: `x*` for the classical
    /// method, `x_Tik(γ, λ_final)` for the fractional one.
    pub final_error: f64,
    pub termination: Termination,
}

/// Both methods from `x0` for every `γ`. The fractional runs use order
/// `alpha` with `β = γ + (1−α)/(2−α)`, the instance's closed-form gradients
/// and the regularized Armijo merit.
pub fn comparison_table(
    mop: &QuadraticMop,
    gammas: &[f64],
    cfg: &SolverConfig,
    x0: &DVector<f64>,
    alpha: f64,
) -> Result<Vec<ComparisonRow>> {
    let m = mop.num_objectives();
    let uniform = vec![1.0 / m as f64; m];
    let objectives = mop.objectives();
    let truth = tikhonov_solve(mop, 0.0, &uniform, mop.terminal())?.x_tik;
    let kappa_classical = condition_number(&mop.weighted_gram(&uniform))?;
    let live = SolverConfig {
        multipliers: MultiplierMode::Live,
        ..cfg.clone()
    };
    let mut rows = Vec::with_capacity(2 * gammas.len());
    for &gamma in gammas {
        let start = Stopwatch::start();
        let trace = mogd_baseline(&objectives, x0, &live);
        let wall = start.seconds();
        rows.push(ComparisonRow {
            gamma,
            method: CompareMethod::Mogd,
            condition_number: kappa_classical,
            iterations: trace.iterations(),
            wall_seconds: wall,
            final_error: (trace.final_x() - &truth).norm(),
            termination: trace.termination.clone(),
        });

        let frac =
            FractionalConfig::new(alpha, gamma + gamma_alpha(alpha), mop.terminal().clone())?;
        let frac_cfg = SolverConfig {
            merit: Merit::Regularized,
            ..live.clone()
        };
        let start = Stopwatch::start();
        let trace = run_single_stage(
            &objectives,
            Some(mop),
            x0,
            &frac_cfg,
            &frac,
            cfg.max_iterations,
        );
        let wall = start.seconds();
        let effective = frac.gamma_alpha_beta();
        let a = mop.weighted_gram(&uniform)
            + mop.weighted_regularizer(&uniform, Regularizer::HessianDiagonal) * effective;
        let target = tikhonov_solve(
            mop,
            effective.max(0.0),
            &trace.last().multipliers,
            mop.terminal(),
        )?;
        rows.push(ComparisonRow {
            gamma,
            method: CompareMethod::Moaocfgd,
            condition_number: condition_number(&a)?,
            iterations: trace.iterations(),
            wall_seconds: wall,
            final_error: (trace.final_x() - &target.x_tik).norm(),
            termination: trace.termination.clone(),
        });
    }
    Ok(rows)
}

/// Columns `gamma, method, condition_number, iterations, wall_seconds, final_error`.
pub fn comparison_to_csv(rows: &[ComparisonRow]) -> String {
    let mut out =
        String::from("gamma,method,condition_number,iterations,wall_seconds,final_error\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.gamma,
            r.method.label(),
            r.condition_number,
            r.iterations,
            r.wall_seconds,
            r.final_error
        );
    }
    out
}
