//! Numerical checks of the fixed-point and staged error theory on quadratic
//! instances.
//!
//! With frozen multipliers and step `η/σ_max` the iteration is
//! `x ← x − (η/σ_max)(A x − b)` for the SPD matrix `A = Σλ_j(A_j + γ diag(A_j))`,
//! so the error to the Tikhonov solution contracts by
//! `ρ = max_i |1 − η λ_i(A)/σ_max|` per step in the slowest mode.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fractional::FractionalConfig;
use crate::model::{tikhonov_solve, QuadraticMop, TikhonovSolution};
use crate::solver::{
    run_adaptive_with, run_single_stage, IterationTrace, MultiplierMode, SolverConfig,
    StageSchedule, StepRule, TerminalMode,
};

const CONSECUTIVE_GROWTH: usize = 50;
const RATIO_WINDOW: usize = 100;

fn contraction(a: &DMatrix<f64>, eta: f64, sigma_max: f64) -> f64 {
    a.clone()
        .symmetric_eigenvalues()
        .iter()
        .map(|l| (1.0 - eta * l / sigma_max).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone)]
pub struct Theorem5Report {
    pub errors: Vec<f64>,
    pub tikhonov: TikhonovSolution,
    pub eta: f64,
    pub predicted_rate: f64,
    /// Geometric mean of the last error ratios above the round-off floor.
    pub fitted_rate: f64,
    /// Coefficient of variation of those ratios.
    pub ratio_cv: f64,
    pub ratios_used: usize,
    pub fixed_point_error: f64,
    pub monotone: bool,
    /// Iteration at which the error, still above the round-off floor, had
    /// grown for 50 consecutive steps.
    pub violation: Option<usize>,
    /// `e₀² (1 + η/κ)^K`, the bound as literally stated; it grows with `K`.
    pub literal_bound: f64,
    pub trace: IterationTrace,
}

impl Theorem5Report {
    pub fn passes(&self, tol: f64, cv_limit: f64) -> bool {
        self.violation.is_none()
            && self.monotone
            && self.fixed_point_error <= tol
            && self.ratio_cv < cv_limit
    }
}

/// Frozen-multiplier fixed-step run against the closed-form Tikhonov solution.
pub fn verify_rate_theorem5(
    mop: &QuadraticMop,
    frac: &FractionalConfig,
    eta: f64,
    multipliers: &[f64],
    x0: &DVector<f64>,
    iterations: usize,
) -> Result<Theorem5Report> {
    let gamma = frac.gamma_alpha_beta();
    let tikhonov = tikhonov_solve(mop, gamma, multipliers, frac.terminal())?;
    let cfg = SolverConfig {
        tolerance: f64::MIN_POSITIVE,
        max_iterations: iterations,
        step: StepRule::Fixed { eta },
        multipliers: MultiplierMode::Fixed(multipliers.to_vec()),
        ..SolverConfig::default()
    };
    cfg.validate()?;
    let trace = run_single_stage(&[], Some(mop), x0, &cfg, frac, iterations);
    if let crate::solver::Termination::Error(e) = &trace.termination {
        return Err(Error::Input(format!("fixed-step run failed: {e}")));
    }
    let errors: Vec<f64> = trace
        .records
        .iter()
        .map(|r| (&r.x - &tikhonov.x_tik).norm())
        .collect();

    let floor = 1e-11 * (1.0 + tikhonov.x_tik.norm());
    let usable = errors.iter().take_while(|e| **e > floor).count();
    let ratios: Vec<f64> = errors[..usable].windows(2).map(|w| w[1] / w[0]).collect();
    let window = &ratios[ratios.len().saturating_sub(RATIO_WINDOW)..];
    let (fitted_rate, ratio_cv) = if window.is_empty() {
        (0.0, 0.0)
    } else {
        let mean = window.iter().sum::<f64>() / window.len() as f64;
        let var = window.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / window.len() as f64;
        let log_mean = window.iter().map(|r| r.ln()).sum::<f64>() / window.len() as f64;
        (
            log_mean.exp(),
            if mean > 0.0 { var.sqrt() / mean } else { 0.0 },
        )
    };

    // Drift below the floor is round-off, not divergence.
    let mut run = 0;
    let mut violation = None;
    for (k, w) in errors.windows(2).enumerate() {
        if w[0] <= floor {
            run = 0;
            continue;
        }
        run = if w[1] > w[0] { run + 1 } else { 0 };
        if run == CONSECUTIVE_GROWTH {
            violation = Some(k + 1);
            break;
        }
    }
    let monotone = ratios.iter().all(|r| *r <= 1.0 + 1e-12);
    let kappa = tikhonov.kappa;
    let e0 = errors[0];
    Ok(Theorem5Report {
        predicted_rate: contraction(&tikhonov.a_matrix, eta, tikhonov.sigma_max),
        fixed_point_error: *errors.last().expect("nonempty"),
        literal_bound: e0 * e0 * (1.0 + eta / kappa).powi(trace.iterations() as i32),
        ratios_used: window.len(),
        errors,
        tikhonov,
        eta,
        fitted_rate,
        ratio_cv,
        monotone,
        violation,
        trace,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageBound {
    pub gamma: f64,
    pub iterations: usize,
    /// `ρ_s^{k_s}`.
    pub r: f64,
    /// `‖x_s⁰ − x*_{γ_s}‖`.
    pub epsilon: f64,
    /// `‖x_s^{k_s} − x*_{γ_s}‖`.
    pub end_error: f64,
    /// `‖x*_{γ_s} − x*_{γ_{s+1}}‖`; zero for the last stage.
    pub e: f64,
    /// `C |γ_s − γ_{s+1}|`; zero for the last stage.
    pub lipschitz_bound: f64,
}

#[derive(Debug, Clone)]
pub struct Theorem6Report {
    pub stages: Vec<StageBound>,
    /// `sup_γ ‖M(γ)⁻¹‖ = 1/λ_min(Σλ_j A_j)`.
    pub b_max: f64,
    /// `B² ‖ΣA_j‖ ‖Σdiag(R̃_j)‖² ‖x* − c‖`.
    pub c_const: f64,
    pub final_error: f64,
    pub final_gamma: f64,
    /// Unrolled recursion bound on `‖x_final − x*‖`.
    pub bound: f64,
    pub recursion_ok: bool,
    pub lipschitz_ok: bool,
    pub final_ok: bool,
    pub trace: IterationTrace,
}

impl Theorem6Report {
    pub fn passes(&self) -> bool {
        self.recursion_ok && self.lipschitz_ok && self.final_ok
    }
}

/// Staged fixed-step run with frozen multipliers. Checks
/// `ε_{s+1} ≤ R_s ε_s + e_s + 1e-8`, `e_s ≤ C|γ_s − γ_{s+1}|` and
/// `‖x_final − x*‖ ≤ 1.1 C γ_final`.
pub fn verify_staged_theorem6(
    mop: &QuadraticMop,
    schedule: &StageSchedule,
    cfg: &SolverConfig,
    x0: &DVector<f64>,
) -> Result<Theorem6Report> {
    let StepRule::Fixed { eta } = cfg.step else {
        return Err(Error::Input("staged bound check needs a fixed step".into()));
    };
    let m = mop.num_objectives();
    let lambda = match &cfg.multipliers {
        MultiplierMode::Uniform => vec![1.0 / m as f64; m],
        MultiplierMode::Fixed(l) => l.clone(),
        _ => {
            return Err(Error::Input(
                "staged bound check needs frozen multipliers".into(),
            ))
        }
    };
    let TerminalMode::Fixed(c) = schedule.terminal() else {
        return Err(Error::Input(
            "staged bound check needs a fixed terminal".into(),
        ));
    };
    let cfg = SolverConfig {
        multipliers: MultiplierMode::Fixed(lambda.clone()),
        ..cfg.clone()
    };
    let trace = run_adaptive_with(&[], Some(mop), x0, &cfg, schedule);
    if let crate::solver::Termination::Error(e) = &trace.termination {
        return Err(Error::Input(format!("staged run failed: {e}")));
    }

    let gram = mop.weighted_gram(&lambda);
    let lambda_min = gram.clone().symmetric_eigenvalues().min();
    if !(lambda_min > 0.0) {
        return Err(Error::Singular("Σλ_j A_j is not positive definite".into()));
    }
    let b_max = 1.0 / lambda_min;
    let n = mop.dim();
    let sum_a = (0..m).fold(DMatrix::zeros(n, n), |acc, j| acc + mop.gram(j));
    let sum_r = (0..m).fold(DVector::zeros(n), |acc, j| acc + mop.rtilde(j));
    let solution = tikhonov_solve(mop, 0.0, &lambda, c)?.x_tik;
    let c_const = b_max
        * b_max
        * sum_a.singular_values().max()
        * sum_r.amax().powi(2)
        * (&solution - c).norm();

    let solutions: Vec<TikhonovSolution> = schedule
        .gammas()
        .iter()
        .map(|g| tikhonov_solve(mop, *g, &lambda, c))
        .collect::<Result<_>>()?;

    let mut stages = Vec::new();
    for (s, summary) in trace.stages.iter().enumerate() {
        let first = trace
            .records
            .iter()
            .find(|r| r.stage == s)
            .ok_or_else(|| Error::Input(format!("stage {s} has no records")))?;
        let last = trace
            .records
            .iter()
            .rev()
            .find(|r| r.stage == s)
            .expect("stage has a first record");
        let sol = &solutions[s];
        let rho = contraction(&sol.a_matrix, eta, sol.sigma_max);
        let (e, lipschitz_bound) = match solutions.get(s + 1) {
            Some(next) => (
                (&sol.x_tik - &next.x_tik).norm(),
                c_const * (sol.gamma - next.gamma).abs(),
            ),
            None => (0.0, 0.0),
        };
        stages.push(StageBound {
            gamma: sol.gamma,
            iterations: summary.iterations,
            r: rho.powi(summary.iterations as i32),
            epsilon: (&first.x - &sol.x_tik).norm(),
            end_error: (&last.x - &sol.x_tik).norm(),
            e,
            lipschitz_bound,
        });
    }

    let recursion_ok = stages
        .windows(2)
        .all(|w| w[1].epsilon <= w[0].r * w[0].epsilon + w[0].e + 1e-8)
        && stages.iter().all(|s| s.end_error <= s.r * s.epsilon + 1e-8);
    let lipschitz_ok = stages
        .iter()
        .all(|s| s.e <= s.lipschitz_bound * (1.0 + 1e-9) + 1e-14);
    let final_gamma = stages.last().map_or(0.0, |s| s.gamma);
    let final_error = (trace.final_x() - &solution).norm();
    let final_ok = final_error <= 1.1 * c_const * final_gamma;

    let mut bound = stages.first().map_or(0.0, |s| s.epsilon);
    for w in stages.windows(2) {
        bound = w[0].r * bound + w[0].lipschitz_bound;
    }
    if let Some(last) = stages.last() {
        bound = last.r * bound + c_const * last.gamma;
    }

    Ok(Theorem6Report {
        stages,
        b_max,
        c_const,
        final_error,
        final_gamma,
        bound,
        recursion_ok,
        lipschitz_ok,
        final_ok,
        trace,
    })
}
