//! Reference methods the fractional scheme is compared against.

use crate::clock::Stopwatch;

use nalgebra::DVector;

use crate::direction::solve_direction;
use crate::fractional::FractionalConfig;
use crate::model::ObjectiveModel;
use crate::solver::{run_single_stage, IterationRecord, IterationTrace, SolverConfig, Termination};

/// Steepest multi-objective descent: the same iteration with classical
/// gradients (`α = 1`, `β = 0`).
pub fn mogd_baseline(
    objectives: &[ObjectiveModel],
    x0: &DVector<f64>,
    cfg: &SolverConfig,
) -> IterationTrace {
    let frac = FractionalConfig::classical(x0.len());
    run_single_stage(objectives, None, x0, cfg, &frac, cfg.max_iterations)
}

/// Normalized subgradient method `x ← x − a/(k+1) · g/‖g‖` with `g` the
/// minimum-norm element of the hull of active-piece gradients. Stops early
/// only at a zero subgradient.
pub fn subgradient_baseline(
    f: &ObjectiveModel,
    x0: &DVector<f64>,
    steps: usize,
    a: f64,
) -> IterationTrace {
    let start = Stopwatch::start();
    let mut x = x0.clone();
    let mut records = Vec::with_capacity(steps + 1);
    let mut termination = Termination::MaxIterations;
    for k in 0..=steps {
        let active: Vec<DVector<f64>> = match f {
            ObjectiveModel::PiecewiseMax(m) => m
                .active_pieces(&x, 1e-9)
                .into_iter()
                .map(|i| m.pieces()[i].gradient(&x))
                .collect(),
            _ => vec![f.gradient(&x)],
        };
        let g = match solve_direction(&active) {
            Ok(dir) => -dir.direction,
            Err(e) => {
                termination = Termination::Error(e.to_string());
                break;
            }
        };
        let step = a / (k + 1) as f64;
        let norm = g.norm();
        let last = k == steps || norm == 0.0;
        records.push(IterationRecord {
            k,
            stage: 0,
            eta: if last { 0.0 } else { step },
            backtracks: 0,
            t: -norm * norm,
            norm_d: norm,
            values: vec![f.value(&x)],
            x: x.clone(),
            multipliers: vec![1.0],
            elapsed_seconds: start.seconds(),
        });
        if norm == 0.0 {
            termination = Termination::Tolerance;
            break;
        }
        if last {
            break;
        }
        x -= g * (step / norm);
    }
    IterationTrace {
        records,
        stages: Vec::new(),
        termination,
        warnings: Vec::new(),
    }
}

/// First iteration index with `f_1 ≤ f_min + tol`.
pub fn iterations_to_target(trace: &IterationTrace, f_min: f64, tol: f64) -> Option<usize> {
    trace
        .records
        .iter()
        .find(|r| r.values[0] <= f_min + tol)
        .map(|r| r.k)
}
