//! Descent iteration with Armijo backtracking and staged fractional orders.
//!
//! Every iterate evaluates one modified fractional gradient per objective,
//! solves the direction subproblem and steps along `d`. A stage runs at fixed
//! `(α, β)`; a schedule chains stages, each starting where the previous one
//! stopped.

use crate::clock::Stopwatch;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::direction::{direction_from_multipliers, solve_direction, DirectionResult};
use crate::error::{Error, Result};
use crate::fractional::{effective_terminal, gamma_alpha, FractionalConfig, ModifiedGradient};
use crate::model::{ObjectiveModel, QuadraticMop, Regularizer};

pub const MAX_BACKTRACKS: usize = 60;

/// How the step length is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    /// First `η ∈ {1, r, r², …}` passing the Armijo test.
    Backtracking,
    /// `η_k = η / σ_max(A_{α,β})` with `0 ≤ η < 2`, computed once per stage.
    Fixed { eta: f64 },
}

/// Functions the Armijo test is applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Merit {
    /// The objectives `f_j` themselves.
    Objective,
    /// `f_j + (γ/2)(x−c)ᵀ diag(H_j)(x−c)` for constant-Hessian objectives,
    /// `f_j` otherwise. Its gradient is the modified fractional gradient of a
    /// quadratic, so the direction is a descent direction for it.
    Regularized,
}

/// Source of the multipliers that combine the objective gradients.
#[derive(Debug, Clone, PartialEq)]
pub enum MultiplierMode {
    /// Re-solve the direction subproblem at every iterate.
    Live,
    Uniform,
    /// Solve once at the first iterate of the run, then freeze.
    FirstIteration,
    Fixed(Vec<f64>),
}

/// How fractional gradients of general objectives are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GradientRoute {
    /// Closed form for quadratic objectives, quadrature for the rest.
    #[default]
    Auto,
    /// Singular-kernel quadrature for every objective.
    Quadrature,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub sigma: f64,
    pub backtrack: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub step: StepRule,
    pub merit: Merit,
    pub multipliers: MultiplierMode,
    pub route: GradientRoute,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            sigma: 1e-4,
            backtrack: 0.5,
            tolerance: 1e-4,
            max_iterations: 2000,
            step: StepRule::Backtracking,
            merit: Merit::Regularized,
            multipliers: MultiplierMode::Live,
            route: GradientRoute::Auto,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return Err(Error::Input(format!(
                "sigma must lie in (0, 1), got {}",
                self.sigma
            )));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::Input(format!(
                "backtrack ratio r must lie in (0, 1), got {}",
                self.backtrack
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Input(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Input("max_iterations must be positive".into()));
        }
        if let StepRule::Fixed { eta } = self.step {
            // eta = 0 is allowed and leaves the iterate in place
            if !(0.0..2.0).contains(&eta) {
                return Err(Error::Input(format!(
                    "fixed step eta must lie in [0, 2), got {eta}"
                )));
            }
        }
        if let MultiplierMode::Fixed(l) = &self.multipliers {
            let sum: f64 = l.iter().sum();
            if l.iter().any(|v| !(*v >= 0.0)) || (sum - 1.0).abs() > 1e-10 {
                return Err(Error::Input(
                    "fixed multipliers must lie on the unit simplex".into(),
                ));
            }
        }
        Ok(())
    }
}

/// One stage `(α_s, β_s, k_s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stage {
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
}

impl Stage {
    /// `γ_s = β_s − (1−α_s)/(2−α_s)`.
    pub fn gamma(&self) -> f64 {
        self.beta - gamma_alpha(self.alpha)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TerminalMode {
    Fixed(DVector<f64>),
    /// `c = x^(k−L)`; `initial` serves while `k < L`.
    Adaptive {
        memory: usize,
        initial: DVector<f64>,
    },
}

impl TerminalMode {
    fn dim(&self) -> usize {
        match self {
            Self::Fixed(c) => c.len(),
            Self::Adaptive { initial, .. } => initial.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageSchedule {
    stages: Vec<Stage>,
    terminal: TerminalMode,
}

impl StageSchedule {
    /// Requires `α_s ∈ (0, 1]`, `β_s ≥ (1−α_s)/(2−α_s)` and `k_s ≥ 1`.
    pub fn new(stages: Vec<Stage>, terminal: TerminalMode) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::Input("a schedule needs at least one stage".into()));
        }
        for (s, st) in stages.iter().enumerate() {
            if !(st.alpha > 0.0 && st.alpha <= 1.0) {
                return Err(Error::Input(format!(
                    "stage {s}: alpha must lie in (0, 1], got {}",
                    st.alpha
                )));
            }
            if !(st.beta >= gamma_alpha(st.alpha)) {
                return Err(Error::Input(format!(
                    "stage {s}: beta {} is below (1-alpha)/(2-alpha) = {}",
                    st.beta,
                    gamma_alpha(st.alpha)
                )));
            }
            if st.iterations == 0 {
                return Err(Error::Input(format!(
                    "stage {s}: iteration count must be positive"
                )));
            }
        }
        if let TerminalMode::Adaptive { memory: 0, .. } = terminal {
            return Err(Error::Input("memory length must be positive".into()));
        }
        Ok(Self { stages, terminal })
    }

    /// Stages with `β_s = (1−α_s)/(2−α_s) + γ_s`.
    pub fn from_gammas(
        alphas: &[f64],
        gammas: &[f64],
        iterations: &[usize],
        terminal: TerminalMode,
    ) -> Result<Self> {
        if alphas.len() != gammas.len() || alphas.len() != iterations.len() {
            return Err(Error::Input(
                "alphas, gammas and iterations differ in length".into(),
            ));
        }
        if gammas.iter().any(|g| !(*g >= 0.0)) {
            return Err(Error::Input(
                "stage regularizers must be nonnegative".into(),
            ));
        }
        let stages = alphas
            .iter()
            .zip(gammas)
            .zip(iterations)
            .map(|((a, g), k)| Stage {
                alpha: *a,
                beta: gamma_alpha(*a) + g,
                iterations: *k,
            })
            .collect();
        Self::new(stages, terminal)
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn terminal(&self) -> &TerminalMode {
        &self.terminal
    }

    pub fn gammas(&self) -> Vec<f64> {
        self.stages.iter().map(Stage::gamma).collect()
    }
}

/// State at one iterate and the step taken from it (`eta = 0` closes a stage).
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub stage: usize,
    pub eta: f64,
    pub backtracks: usize,
    pub t: f64,
    pub norm_d: f64,
    pub values: Vec<f64>,
    pub x: DVector<f64>,
    pub multipliers: Vec<f64>,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageSummary {
    pub index: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub start_k: usize,
    pub iterations: usize,
    pub converged: bool,
    pub step_scale: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    Tolerance,
    MaxIterations,
    Error(String),
}

impl Termination {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Tolerance => "tolerance",
            Self::MaxIterations => "max_iter",
            Self::Error(_) => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
    pub stages: Vec<StageSummary>,
    pub termination: Termination,
    pub warnings: Vec<String>,
}

impl IterationTrace {
    /// Number of steps taken.
    pub fn iterations(&self) -> usize {
        self.records.last().map_or(0, |r| r.k)
    }

    pub fn last(&self) -> &IterationRecord {
        self.records
            .last()
            .expect("a trace has at least one record")
    }

    pub fn final_x(&self) -> &DVector<f64> {
        &self.last().x
    }

    pub fn final_values(&self) -> &[f64] {
        &self.last().values
    }

    pub fn converged(&self) -> bool {
        self.termination == Termination::Tolerance
    }

    /// Columns `k, s, eta, t, norm_d, f_1..f_m, x_1..x_n`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,s,eta,t,norm_d");
        if let Some(r) = self.records.first() {
            for j in 1..=r.values.len() {
                let _ = write!(out, ",f_{j}");
            }
            for i in 1..=r.x.len() {
                let _ = write!(out, ",x_{i}");
            }
        }
        out.push('\n');
        for r in &self.records {
            let _ = write!(out, "{},{},{},{},{}", r.k, r.stage, r.eta, r.t, r.norm_d);
            for v in r.values.iter().chain(r.x.iter()) {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

/// Merit values used by the Armijo test.
fn merit_values(
    objectives: &[ObjectiveModel],
    merit: Merit,
    gamma: f64,
    terminal: &DVector<f64>,
    x: &DVector<f64>,
) -> Vec<f64> {
    objectives
        .iter()
        .map(|f| {
            let base = f.value(x);
            match (merit, f.constant_hessian()) {
                (Merit::Regularized, Some(h)) if gamma != 0.0 => {
                    let r = x - terminal;
                    let pull: f64 = r
                        .iter()
                        .zip(h.diagonal().iter())
                        .map(|(v, a)| a * v * v)
                        .sum();
                    base + 0.5 * gamma * pull
                }
                _ => base,
            }
        })
        .collect()
}

/// Armijo backtracking on the objectives themselves.
pub fn armijo_step(
    objectives: &[ObjectiveModel],
    x: &DVector<f64>,
    dir: &DirectionResult,
    cfg: &SolverConfig,
) -> Result<(f64, DVector<f64>)> {
    let (eta, next, _) = armijo_step_with(
        &|p| objectives.iter().map(|f| f.value(p)).collect(),
        x,
        dir,
        cfg,
    )?;
    Ok((eta, next))
}

/// Armijo backtracking on arbitrary merit functions. Returns the step, the
/// new point and the number of backtracks.
pub fn armijo_step_with(
    merit: &dyn Fn(&DVector<f64>) -> Vec<f64>,
    x: &DVector<f64>,
    dir: &DirectionResult,
    cfg: &SolverConfig,
) -> Result<(f64, DVector<f64>, usize)> {
    if !(dir.t_value < 0.0) {
        return Err(Error::Input(format!(
            "Armijo search needs t < 0, got {}",
            dir.t_value
        )));
    }
    let base = merit(x);
    let mut eta = 1.0;
    for backtracks in 0..=MAX_BACKTRACKS {
        let trial = x + &dir.direction * eta;
        let values = merit(&trial);
        let bound = cfg.sigma * eta * dir.t_value;
        if values.iter().zip(&base).all(|(v, b)| *v <= b + bound) {
            return Ok((eta, trial, backtracks));
        }
        eta *= cfg.backtrack;
    }
    Err(Error::LineSearch {
        backtracks: MAX_BACKTRACKS,
        t_value: dir.t_value,
    })
}

/// Per-stage gradient evaluation.
struct Evaluator<'a> {
    objectives: &'a [ObjectiveModel],
    mop: Option<&'a QuadraticMop>,
    frac: FractionalConfig,
    engine: Option<ModifiedGradient>,
    route: GradientRoute,
}

impl<'a> Evaluator<'a> {
    fn new(
        objectives: &'a [ObjectiveModel],
        mop: Option<&'a QuadraticMop>,
        frac: FractionalConfig,
        route: GradientRoute,
    ) -> Result<Self> {
        let engine = if mop.is_none() && !frac.is_classical() {
            Some(ModifiedGradient::new(frac.alpha(), frac.beta())?)
        } else {
            None
        };
        Ok(Self {
            objectives,
            mop,
            frac,
            engine,
            route,
        })
    }

    fn gradients(&self, x: &DVector<f64>, terminal: &DVector<f64>) -> Result<Vec<DVector<f64>>> {
        let gamma = self.frac.gamma_alpha_beta();
        if let Some(mop) = self.mop {
            return Ok((0..mop.num_objectives())
                .map(|j| {
                    let pull = mop.regularizer(j, Regularizer::HessianDiagonal) * (x - terminal);
                    mop.gram(j) * x + mop.linear(j) + pull * gamma
                })
                .collect());
        }
        self.objectives
            .iter()
            .map(|f| match (&self.engine, f.constant_hessian(), self.route) {
                (None, _, _) => Ok(f.gradient(x)),
                (Some(_), Some(h), GradientRoute::Auto) => {
                    let pull = (x - terminal).component_mul(&h.diagonal());
                    Ok(f.gradient(x) + pull * gamma)
                }
                (Some(engine), _, _) => engine.evaluate(f, terminal, x),
            })
            .collect()
    }

    /// `σ_max` of `Σ λ_j (A_j + γ diag(A_j))`.
    fn sigma_max(&self, multipliers: &[f64]) -> Result<f64> {
        let gamma = self.frac.gamma_alpha_beta();
        let matrix = if let Some(mop) = self.mop {
            mop.weighted_gram(multipliers)
                + mop.weighted_regularizer(multipliers, Regularizer::HessianDiagonal) * gamma
        } else {
            let n = self.objectives[0].dim();
            let mut acc = DMatrix::zeros(n, n);
            for (f, l) in self.objectives.iter().zip(multipliers) {
                let h = f.constant_hessian().ok_or_else(|| {
                    Error::Input("fixed-step mode needs objectives with constant Hessians".into())
                })?;
                acc += (h + DMatrix::from_diagonal(&h.diagonal()) * gamma) * *l;
            }
            acc
        };
        let s = matrix.singular_values().max();
        if !(s > 0.0) {
            return Err(Error::Singular(
                "A_{α,β} has no positive singular value".into(),
            ));
        }
        Ok(s)
    }
}

struct StagePlan {
    alpha: f64,
    beta: f64,
    iterations: usize,
}

/// One stage at fixed `(α, β)` from `x0`, at most `k_max` steps.
pub fn run_single_stage(
    objectives: &[ObjectiveModel],
    mop: Option<&QuadraticMop>,
    x0: &DVector<f64>,
    cfg: &SolverConfig,
    frac: &FractionalConfig,
    k_max: usize,
) -> IterationTrace {
    let terminal = match frac.memory_length() {
        Some(memory) => TerminalMode::Adaptive {
            memory,
            initial: frac.terminal().clone(),
        },
        None => TerminalMode::Fixed(frac.terminal().clone()),
    };
    let plan = [StagePlan {
        alpha: frac.alpha(),
        beta: frac.beta(),
        iterations: k_max,
    }];
    run_plans(objectives, mop, x0, cfg, &plan, &terminal)
}

pub fn run_adaptive(
    objectives: &[ObjectiveModel],
    x0: &DVector<f64>,
    cfg: &SolverConfig,
    schedule: &StageSchedule,
) -> IterationTrace {
    run_adaptive_with(objectives, None, x0, cfg, schedule)
}

/// Staged run; with `mop` the closed-form gradients of the instance are used.
pub fn run_adaptive_with(
    objectives: &[ObjectiveModel],
    mop: Option<&QuadraticMop>,
    x0: &DVector<f64>,
    cfg: &SolverConfig,
    schedule: &StageSchedule,
) -> IterationTrace {
    let plans: Vec<StagePlan> = schedule
        .stages
        .iter()
        .map(|s| StagePlan {
            alpha: s.alpha,
            beta: s.beta,
            iterations: s.iterations,
        })
        .collect();
    run_plans(objectives, mop, x0, cfg, &plans, &schedule.terminal)
}

fn failed(message: String) -> IterationTrace {
    IterationTrace {
        records: Vec::new(),
        stages: Vec::new(),
        termination: Termination::Error(message),
        warnings: Vec::new(),
    }
}

fn run_plans(
    objectives: &[ObjectiveModel],
    mop: Option<&QuadraticMop>,
    x0: &DVector<f64>,
    cfg: &SolverConfig,
    plans: &[StagePlan],
    terminal_mode: &TerminalMode,
) -> IterationTrace {
    if let Err(e) = cfg.validate() {
        return failed(e.to_string());
    }
    let objectives: Vec<ObjectiveModel> = match mop {
        Some(m) if objectives.is_empty() => m.objectives(),
        _ => objectives.to_vec(),
    };
    if objectives.is_empty() {
        return failed("no objectives".into());
    }
    let n = x0.len();
    if objectives.iter().any(|f| f.dim() != n) || terminal_mode.dim() != n {
        return failed("dimension mismatch between objectives, start point and terminal".into());
    }
    if let Some(m) = mop {
        if m.dim() != n || m.num_objectives() != objectives.len() {
            return failed("instance does not match the objectives".into());
        }
    }
    let m = objectives.len();

    let start = Stopwatch::start();
    let mut trace = IterationTrace {
        records: Vec::new(),
        stages: Vec::new(),
        termination: Termination::MaxIterations,
        warnings: Vec::new(),
    };
    let mut history: Vec<DVector<f64>> = vec![x0.clone()];
    let mut x = x0.clone();
    let mut k = 0usize;
    let mut frozen: Option<Vec<f64>> = match &cfg.multipliers {
        MultiplierMode::Uniform => Some(vec![1.0 / m as f64; m]),
        MultiplierMode::Fixed(l) if l.len() == m => Some(l.clone()),
        MultiplierMode::Fixed(_) => {
            return failed("fixed multipliers have the wrong length".into())
        }
        _ => None,
    };
    let mut clamped_total = 0usize;

    for (s, plan) in plans.iter().enumerate() {
        let base_terminal = match terminal_mode {
            TerminalMode::Fixed(c) => c.clone(),
            TerminalMode::Adaptive { initial, .. } => initial.clone(),
        };
        let frac = match FractionalConfig::new(plan.alpha, plan.beta, base_terminal.clone()) {
            Ok(f) => f,
            Err(e) => {
                trace.termination = Termination::Error(format!("stage {s}: {e}"));
                return trace;
            }
        };
        let gamma = frac.gamma_alpha_beta();
        let evaluator = match Evaluator::new(&objectives, mop, frac, cfg.route) {
            Ok(ev) => ev,
            Err(e) => {
                trace.termination = Termination::Error(format!("stage {s}: {e}"));
                return trace;
            }
        };
        let mut summary = StageSummary {
            index: s,
            alpha: plan.alpha,
            beta: plan.beta,
            gamma,
            start_k: k,
            iterations: 0,
            converged: false,
            step_scale: None,
        };
        let mut step_scale = None;
        let mut stage_steps = 0usize;
        let last_stage = s + 1 == plans.len();

        loop {
            let terminal = match terminal_mode {
                TerminalMode::Fixed(c) => c.clone(),
                TerminalMode::Adaptive { memory, initial } => {
                    let raw = if k >= *memory {
                        history[k - memory].clone()
                    } else {
                        initial.clone()
                    };
                    let (c, clamped) = effective_terminal(&raw, &x);
                    clamped_total += clamped.len();
                    c
                }
            };
            let solved = frozen.is_none();
            let step_result = (|| -> Result<(DirectionResult, Vec<f64>)> {
                let grads = evaluator.gradients(&x, &terminal)?;
                let dir = match &frozen {
                    Some(l) => direction_from_multipliers(&grads, l)?,
                    None => {
                        let d = solve_direction(&grads)?;
                        if cfg.multipliers == MultiplierMode::FirstIteration {
                            frozen = Some(d.multipliers.clone());
                        }
                        d
                    }
                };
                let values = objectives.iter().map(|f| f.value(&x)).collect();
                Ok((dir, values))
            })();
            let (dir, values) = match step_result {
                Ok(v) => v,
                Err(e) => {
                    trace.termination = Termination::Error(format!("stage {s}, k = {k}: {e}"));
                    summary.iterations = stage_steps;
                    trace.stages.push(summary);
                    return trace;
                }
            };
            let mut record = IterationRecord {
                k,
                stage: s,
                eta: 0.0,
                backtracks: 0,
                t: dir.t_value,
                norm_d: dir.norm(),
                values,
                x: x.clone(),
                multipliers: dir.multipliers.clone(),
                elapsed_seconds: start.seconds(),
            };
            let norm_d = record.norm_d;
            // t = -‖d‖² exactly at the dual optimum. A solved direction whose
            // predicted decrease is below the rounding of f cannot pass any
            // Armijo test, so the point is critical to working precision.
            let resolution = objectives
                .iter()
                .map(|f| f.rounding_error(&x))
                .fold(0.0, f64::max);
            let unresolved =
                solved && matches!(cfg.step, StepRule::Backtracking) && !(record.t < -resolution);
            if norm_d < cfg.tolerance || unresolved {
                trace.records.push(record);
                summary.converged = true;
                if last_stage {
                    trace.termination = Termination::Tolerance;
                }
                break;
            }
            if stage_steps >= plan.iterations || k >= cfg.max_iterations {
                trace.records.push(record);
                break;
            }
            let outcome = match cfg.step {
                StepRule::Backtracking => {
                    let merit = |p: &DVector<f64>| {
                        merit_values(&objectives, cfg.merit, gamma, &terminal, p)
                    };
                    armijo_step_with(&merit, &x, &dir, cfg)
                }
                StepRule::Fixed { eta } => {
                    if step_scale.is_none() {
                        let lambda = frozen.clone().unwrap_or_else(|| vec![1.0 / m as f64; m]);
                        match evaluator.sigma_max(&lambda) {
                            Ok(sm) => step_scale = Some(eta / sm),
                            Err(e) => {
                                trace.records.push(record);
                                trace.termination = Termination::Error(format!("stage {s}: {e}"));
                                summary.iterations = stage_steps;
                                trace.stages.push(summary);
                                return trace;
                            }
                        }
                        summary.step_scale = step_scale;
                    }
                    let h = step_scale.unwrap_or(0.0);
                    Ok((h, &x + &dir.direction * h, 0))
                }
            };
            match outcome {
                Ok((eta, next, backtracks)) => {
                    record.eta = eta;
                    record.backtracks = backtracks;
                    trace.records.push(record);
                    x = next;
                    k += 1;
                    stage_steps += 1;
                    history.push(x.clone());
                }
                Err(e) => {
                    trace.records.push(record);
                    trace.termination = Termination::Error(format!("stage {s}, k = {k}: {e}"));
                    summary.iterations = stage_steps;
                    trace.stages.push(summary);
                    return trace;
                }
            }
        }
        summary.iterations = stage_steps;
        trace.stages.push(summary);
        if k >= cfg.max_iterations && !matches!(trace.termination, Termination::Tolerance) {
            break;
        }
    }
    if clamped_total > 0 {
        trace.warnings.push(format!(
            "terminal clamped below the iterate in {clamped_total} coordinate evaluations"
        ));
    }
    trace
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::QuadraticObjective;
    use nalgebra::{dmatrix, dvector};

    fn half_norm() -> ObjectiveModel {
        QuadraticObjective::new(DMatrix::identity(2, 2), dvector![0.0, 0.0], 0.0)
            .unwrap()
            .into()
    }

    #[test]
    fn unit_step_on_half_norm() {
        let f = [half_norm()];
        let x = dvector![1.0, 0.0];
        let dir = solve_direction(&[f[0].gradient(&x)]).unwrap();
        assert_eq!(dir.t_value, -1.0);
        let cfg = SolverConfig {
            sigma: 0.5,
            ..SolverConfig::default()
        };
        let (eta, next) = armijo_step(&f, &x, &dir, &cfg).unwrap();
        assert_eq!(eta, 1.0);
        assert_eq!(next, dvector![0.0, 0.0]);
    }

    #[test]
    fn armijo_rejects_nonnegative_t() {
        let f = [half_norm()];
        let dir = solve_direction(&[dvector![0.0, 0.0]]).unwrap();
        let err = armijo_step(&f, &dvector![0.0, 0.0], &dir, &SolverConfig::default());
        assert!(matches!(err, Err(Error::Input(_))));
    }

    #[test]
    fn critical_start_stops_immediately() {
        let f = [half_norm()];
        let frac = FractionalConfig::classical(2);
        let trace = run_single_stage(
            &f,
            None,
            &dvector![0.0, 0.0],
            &SolverConfig::default(),
            &frac,
            10,
        );
        assert_eq!(trace.termination, Termination::Tolerance);
        assert_eq!(trace.iterations(), 0);
    }

    #[test]
    fn schedule_validation() {
        let c = TerminalMode::Fixed(dvector![0.0]);
        let low = Stage {
            alpha: 0.5,
            beta: 0.1,
            iterations: 5,
        };
        assert!(StageSchedule::new(vec![low], c.clone()).is_err());
        let ok = StageSchedule::from_gammas(&[0.5, 0.9], &[0.1, 0.0], &[3, 3], c).unwrap();
        assert!((ok.gammas()[0] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn config_validation_names_the_field() {
        let cfg = SolverConfig {
            sigma: 1.5,
            ..SolverConfig::default()
        };
        assert!(cfg.validate().unwrap_err().to_string().contains("sigma"));
    }

    #[test]
    fn csv_header_order() {
        let q: ObjectiveModel = QuadraticObjective::new(dmatrix![2.0], dvector![-2.0], 0.0)
            .unwrap()
            .into();
        let trace = run_single_stage(
            &[q],
            None,
            &dvector![3.0],
            &SolverConfig::default(),
            &FractionalConfig::classical(1),
            5,
        );
        assert!(trace.to_csv().starts_with("k,s,eta,t,norm_d,f_1,x_1\n"));
    }
}
