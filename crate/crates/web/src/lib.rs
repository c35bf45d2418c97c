//! Browser bindings for the demo page. Every export returns flat `f64`
//! arrays so the page can plot without parsing; errors surface as strings.

// `!(a < b)` rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use aocfgd::fractional::{caputo_derivative_1d, gamma_alpha, FractionalConfig, Univariate};
use aocfgd::lab::{
    example2_pair, pareto_sweep, start_points, three_stage_schedule, verify_rate_theorem5, Method,
    StartLayout,
};
use aocfgd::model::random_quadratic_mop;
use aocfgd::solver::SolverConfig;
use nalgebra::DVector;
use wasm_bindgen::prelude::*;

const MAX_SAMPLES: usize = 2000;
const MAX_STARTS: usize = 500;
const MAX_ITERATIONS: usize = 50_000;

type Derivative = Box<dyn Fn(f64) -> f64>;

fn test_function(name: &str) -> Result<Univariate<Derivative, Derivative>, String> {
    let pair = |d1: Derivative, d2: Derivative| Univariate::with_second(d1, d2);
    Ok(match name {
        "square" => pair(Box::new(|t| 2.0 * t), Box::new(|_| 2.0)),
        "exp" => pair(Box::new(f64::exp), Box::new(f64::exp)),
        "sine" => pair(Box::new(f64::cos), Box::new(|t: f64| -t.sin())),
        // |t - 1|: slope jumps by 2 at t = 1.
        "kink" => pair(
            Box::new(|t: f64| if t < 1.0 { -1.0 } else { 1.0 }),
            Box::new(|_| 0.0),
        )
        .with_kinks(vec![1.0], vec![2.0]),
        other => {
            return Err(format!(
                "unknown function {other:?}; expected square, exp, sine or kink"
            ))
        }
    })
}

/// Caputo derivative of order `order` of `function` with lower terminal
/// `terminal`, sampled at `samples` evenly spaced points in `(terminal, x_max]`.
/// Returns `[x₀, D₀, x₁, D₁, …]`.
#[wasm_bindgen]
pub fn caputo_profile(
    function: &str,
    order: f64,
    terminal: f64,
    x_max: f64,
    samples: usize,
) -> Result<Vec<f64>, String> {
    let f = test_function(function)?;
    if !(x_max > terminal) || !x_max.is_finite() || !terminal.is_finite() {
        return Err("x_max must exceed the terminal".into());
    }
    if samples == 0 || samples > MAX_SAMPLES {
        return Err(format!("samples must lie in 1..={MAX_SAMPLES}"));
    }
    let h = (x_max - terminal) / samples as f64;
    let mut out = Vec::with_capacity(2 * samples);
    for i in 1..=samples {
        let x = terminal + h * i as f64;
        out.push(x);
        out.push(caputo_derivative_1d(&f, terminal, x, order).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

/// Nondominated final values `[f₁, f₂, …]` of the two-quadratic problem from
/// `starts` seeded starts in `[-3, 3]²`. The fractional method runs the
/// stages `α = 0.5, 0.7, 0.9` with regularizers `gamma, gamma/10, 0`;
/// `classical` runs steepest descent instead.
#[wasm_bindgen]
pub fn pareto_front(
    gamma: f64,
    starts: usize,
    seed: u32,
    classical: bool,
) -> Result<Vec<f64>, String> {
    if starts == 0 || starts > MAX_STARTS {
        return Err(format!("starts must lie in 1..={MAX_STARTS}"));
    }
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err("gamma must be nonnegative".into());
    }
    let method = if classical {
        Method::Mogd
    } else {
        Method::Moaocfgd(
            three_stage_schedule([gamma, gamma / 10.0, 0.0], [50, 50, 1900])
                .map_err(|e| e.to_string())?,
        )
    };
    let layout = StartLayout::Random {
        lb: DVector::from_element(2, -3.0),
        ub: DVector::from_element(2, 3.0),
        seed: seed.into(),
    };
    let x0s = start_points(&layout, starts).map_err(|e| e.to_string())?;
    let front = pareto_sweep(
        &example2_pair(),
        None,
        &method,
        &SolverConfig::default(),
        &x0s,
    );
    Ok(front
        .points
        .iter()
        .flat_map(|p| p.values.iter().copied())
        .collect())
}

/// Distance to the closed-form Tikhonov point along a frozen-multiplier
/// fixed-step run.
#[wasm_bindgen]
pub struct ErrorPath {
    errors: Vec<f64>,
    predicted_rate: f64,
    fitted_rate: f64,
}

#[wasm_bindgen]
impl ErrorPath {
    /// `‖x^(k) − x_Tik‖` for `k = 0, 1, …`.
    #[wasm_bindgen(getter)]
    pub fn errors(&self) -> Vec<f64> {
        self.errors.clone()
    }

    /// Spectral contraction factor of the fixed-step map.
    #[wasm_bindgen(getter)]
    pub fn predicted_rate(&self) -> f64 {
        self.predicted_rate
    }

    /// Geometric mean of the late error ratios.
    #[wasm_bindgen(getter)]
    pub fn fitted_rate(&self) -> f64 {
        self.fitted_rate
    }
}

/// Fixed-step run on a seeded random instance (`n = 5`, three data columns,
/// two objectives, multipliers `(½, ½)`, start `x = 2·1`, terminal `0`) with
/// fractional order `alpha` and regularizer `gamma`.
#[wasm_bindgen]
pub fn tikhonov_path(
    alpha: f64,
    gamma: f64,
    eta: f64,
    seed: u32,
    iterations: usize,
) -> Result<ErrorPath, String> {
    if iterations == 0 || iterations > MAX_ITERATIONS {
        return Err(format!("iterations must lie in 1..={MAX_ITERATIONS}"));
    }
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err("gamma must be positive".into());
    }
    let n = 5;
    let mop = random_quadratic_mop(n, 3, 2, seed.into()).map_err(|e| e.to_string())?;
    let frac = FractionalConfig::new(alpha, gamma_alpha(alpha) + gamma, DVector::zeros(n))
        .map_err(|e| e.to_string())?;
    let x0 = DVector::from_element(n, 2.0);
    let rep = verify_rate_theorem5(&mop, &frac, eta, &[0.5, 0.5], &x0, iterations)
        .map_err(|e| e.to_string())?;
    Ok(ErrorPath {
        errors: rep.errors,
        predicted_rate: rep.predicted_rate,
        fitted_rate: rep.fitted_rate,
    })
}
