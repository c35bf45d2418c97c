//! Multi-start front generation and front-quality metrics.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{ObjectiveModel, QuadraticMop};
use crate::solver::{run_adaptive_with, IterationTrace, SolverConfig, StageSchedule};

use super::baselines::mogd_baseline;

const DOMINANCE_SLACK: f64 = 1e-9;

/// Placement of the start points.
#[derive(Debug, Clone, PartialEq)]
pub enum StartLayout {
    /// `count` points evenly spaced on the segment from `lb` to `ub`.
    Segment { lb: DVector<f64>, ub: DVector<f64> },
    /// Seeded uniform samples from the box `[lb, ub]`.
    Random {
        lb: DVector<f64>,
        ub: DVector<f64>,
        seed: u64,
    },
}

pub fn start_points(layout: &StartLayout, count: usize) -> Result<Vec<DVector<f64>>> {
    let (lb, ub) = match layout {
        StartLayout::Segment { lb, ub } | StartLayout::Random { lb, ub, .. } => (lb, ub),
    };
    if lb.len() != ub.len() || lb.iter().zip(ub.iter()).any(|(l, u)| !(l < u)) {
        return Err(Error::Input(
            "start bounds need lb < ub componentwise".into(),
        ));
    }
    if count == 0 {
        return Err(Error::Input("start count must be positive".into()));
    }
    Ok(match layout {
        StartLayout::Segment { .. } => (0..count)
            .map(|i| {
                let t = if count == 1 {
                    0.0
                } else {
                    i as f64 / (count - 1) as f64
                };
                lb + (ub - lb) * t
            })
            .collect(),
        StartLayout::Random { seed, .. } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..count)
                .map(|_| DVector::from_fn(lb.len(), |i, _| rng.random_range(lb[i]..ub[i])))
                .collect()
        }
    })
}

/// Method run from each start point.
#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    Moaocfgd(StageSchedule),
    Mogd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontPoint {
    pub values: Vec<f64>,
    pub x: DVector<f64>,
    pub start_index: usize,
    pub norm_d: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoFront {
    /// Nondominated, deduplicated, sorted by `f₁`.
    pub points: Vec<FrontPoint>,
    /// Final points of every converged run.
    pub candidates: Vec<FrontPoint>,
    /// `(start index, reason)` for runs that errored or did not converge.
    pub failures: Vec<(usize, String)>,
}

fn run_one(
    objectives: &[ObjectiveModel],
    mop: Option<&QuadraticMop>,
    method: &Method,
    cfg: &SolverConfig,
    x0: &DVector<f64>,
) -> IterationTrace {
    match method {
        Method::Moaocfgd(schedule) => run_adaptive_with(objectives, mop, x0, cfg, schedule),
        Method::Mogd => mogd_baseline(objectives, x0, cfg),
    }
}

/// Runs `method` from every start and keeps the nondominated final values.
pub fn pareto_sweep(
    objectives: &[ObjectiveModel],
    mop: Option<&QuadraticMop>,
    method: &Method,
    cfg: &SolverConfig,
    starts: &[DVector<f64>],
) -> ParetoFront {
    let objectives: Vec<ObjectiveModel> = match mop {
        Some(m) if objectives.is_empty() => m.objectives(),
        _ => objectives.to_vec(),
    };
    let job = |(i, x0): (usize, &DVector<f64>)| (i, run_one(&objectives, mop, method, cfg, x0));

    #[cfg(feature = "parallel")]
    let traces: Vec<(usize, IterationTrace)> = {
        use rayon::prelude::*;
        starts.par_iter().enumerate().map(job).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let traces: Vec<(usize, IterationTrace)> = starts.iter().enumerate().map(job).collect();

    let mut candidates = Vec::new();
    let mut failures = Vec::new();
    for (i, trace) in traces {
        if trace.converged() {
            let last = trace.last();
            candidates.push(FrontPoint {
                values: last.values.clone(),
                x: last.x.clone(),
                start_index: i,
                norm_d: last.norm_d,
            });
        } else {
            failures.push((i, trace.termination.label().to_string()));
        }
    }
    ParetoFront {
        points: nondominated(&candidates),
        candidates,
        failures,
    }
}

/// `a` dominates `b`: no worse everywhere and strictly better somewhere, up
/// to a `1e-9` slack.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| *x <= y + DOMINANCE_SLACK)
        && a.iter().zip(b).any(|(x, y)| *x < y - DOMINANCE_SLACK)
}

/// Nondominated subset with near-duplicates merged, sorted by `f₁`.
pub fn nondominated(points: &[FrontPoint]) -> Vec<FrontPoint> {
    let mut kept: Vec<FrontPoint> = Vec::new();
    for p in points {
        if points.iter().any(|q| dominates(&q.values, &p.values)) {
            continue;
        }
        let duplicate = kept.iter().any(|q| {
            q.values
                .iter()
                .zip(&p.values)
                .all(|(a, b)| (a - b).abs() <= DOMINANCE_SLACK)
        });
        if !duplicate {
            kept.push(p.clone());
        }
    }
    kept.sort_by(|a, b| {
        a.values[0]
            .total_cmp(&b.values[0])
            .then(a.start_index.cmp(&b.start_index))
    });
    kept
}

/// Mean over reference points of the smallest Chebyshev distance to the
/// front, each objective scaled by the reference range (unit when flat).
pub fn adrs(front: &[Vec<f64>], reference: &[Vec<f64>]) -> Result<f64> {
    let Some(first) = reference.first() else {
        return Err(Error::Input("ADRS needs a non-empty reference set".into()));
    };
    let k = first.len();
    if reference.iter().chain(front).any(|p| p.len() != k) {
        return Err(Error::Input("objective vectors differ in length".into()));
    }
    if front.is_empty() {
        return Ok(f64::INFINITY);
    }
    let ranges: Vec<f64> = (0..k)
        .map(|i| {
            let (lo, hi) = reference
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                    (lo.min(r[i]), hi.max(r[i]))
                });
            if hi > lo {
                hi - lo
            } else {
                1.0
            }
        })
        .collect();
    let total: f64 = reference
        .iter()
        .map(|r| {
            front
                .iter()
                .map(|p| {
                    (0..k)
                        .map(|i| (p[i] - r[i]).abs() / ranges[i])
                        .fold(0.0, f64::max)
                })
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    Ok(total / reference.len() as f64)
}

/// Front CSV: `f_1, …, f_m, start_index`.
pub fn front_to_csv(front: &ParetoFront) -> String {
    let m = front.points.first().map_or(2, |p| p.values.len());
    let mut out: String = (1..=m).map(|j| format!("f{j},")).collect();
    out.push_str("start_index\n");
    for p in &front.points {
        for v in &p.values {
            out.push_str(&format!("{v},"));
        }
        out.push_str(&format!("{}\n", p.start_index));
    }
    out
}
