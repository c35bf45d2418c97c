//! Caputo fractional derivatives and the modified fractional gradient.
//!
//! For an order `ν` with `n = ⌈ν⌉` the Caputo derivative with lower terminal
//! `c` is
//!
//! ```text
//! D^ν f(x) = 1/Γ(n-ν) ∫_c^x (x-τ)^(n-ν-1) f^(n)(τ) dτ .
//! ```
//!
//! The kernel exponent `μ = n-ν-1` lies in `(-1, 0)`, so the integrand is
//! weakly singular at `τ = x`. Writing `s = x - τ`, the segment touching
//! `s = 0` is integrated with a Gauss-Jacobi rule carrying the weight `s^μ`
//! exactly; the remaining segments (between declared kinks of `f'`) use the
//! substitution `u = s^(μ+1)` and Gauss-Legendre. Every segment is checked
//! against a coarser rule and bisected until both agree.

mod quadrature;

pub use quadrature::GaussRule;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::model::ObjectiveModel;
use crate::special::{gamma_ratio, ln_gamma};

const FINE_NODES: usize = 64;
const COARSE_NODES: usize = 32;
const SEGMENT_BUDGET: usize = 256;
const RELATIVE_TOL: f64 = 1e-13;
/// Rule disagreement up to this multiple of the integrated rounding error
/// of the integrand is noise, not truncation.
const NOISE_FACTOR: f64 = 8.0;

/// `(1 - α) / (2 - α)`.
pub fn gamma_alpha(alpha: f64) -> f64 {
    (1.0 - alpha) / (2.0 - alpha)
}

/// Fractional parameters for one objective family.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalConfig {
    alpha: f64,
    beta: f64,
    terminal: DVector<f64>,
    memory_length: Option<usize>,
}

impl FractionalConfig {
    pub fn new(alpha: f64, beta: f64, terminal: DVector<f64>) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Input(format!(
                "alpha must lie in (0, 1], got {alpha}"
            )));
        }
        if !beta.is_finite() || terminal.iter().any(|c| !c.is_finite()) {
            return Err(Error::Input("beta and the terminal must be finite".into()));
        }
        Ok(Self {
            alpha,
            beta,
            terminal,
            memory_length: None,
        })
    }

    /// `α = 1, β = 0`: the modified gradient is the classical gradient.
    pub fn classical(dim: usize) -> Self {
        Self {
            alpha: 1.0,
            beta: 0.0,
            terminal: DVector::zeros(dim),
            memory_length: None,
        }
    }

    /// Adaptive-terminal mode: the caller replaces the terminal with `x^(k-L)`.
    pub fn with_memory_length(mut self, length: usize) -> Result<Self> {
        if length == 0 {
            return Err(Error::Input("memory length must be positive".into()));
        }
        self.memory_length = Some(length);
        Ok(self)
    }

    pub fn with_terminal(mut self, terminal: DVector<f64>) -> Self {
        self.terminal = terminal;
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn terminal(&self) -> &DVector<f64> {
        &self.terminal
    }

    pub fn memory_length(&self) -> Option<usize> {
        self.memory_length
    }

    pub fn gamma_alpha(&self) -> f64 {
        gamma_alpha(self.alpha)
    }

    /// Regularization weight induced by `(α, β)`: `β - (1-α)/(2-α)`.
    pub fn gamma_alpha_beta(&self) -> f64 {
        self.beta - self.gamma_alpha()
    }

    /// `Γ(2-α)Γ(2)/Γ(3-α) + β = 1/(2-α) + β`.
    pub fn c2_coeff(&self) -> f64 {
        1.0 / (2.0 - self.alpha) + self.beta
    }

    pub fn is_classical(&self) -> bool {
        self.alpha == 1.0 && self.beta == 0.0
    }
}

/// A univariate function seen through its first two derivatives.
pub trait LineFunction {
    /// Right-sided derivative of order 1 or 2 at `t`.
    fn derivative(&self, order: u32, t: f64) -> f64;

    /// Points in the open interval `(lo, hi)` where `f'` jumps, increasing.
    fn kinks(&self, _lo: f64, _hi: f64) -> Vec<f64> {
        Vec::new()
    }

    /// `f'(t+) - f'(t-)`.
    fn slope_jump(&self, _at: f64) -> f64 {
        0.0
    }

    /// Absolute rounding error of `derivative(order, t)`. Quadrature stops
    /// refining once the rules agree to this level, since the integrand is
    /// not resolved any finer.
    fn rounding(&self, _order: u32, _t: f64) -> f64 {
        0.0
    }
}

/// Adapter turning derivative closures into a [`LineFunction`]. Without an
/// explicit second derivative, `f''` is a central difference of `f'` with
/// `h = 1e-5`.
pub struct Univariate<D1, D2 = fn(f64) -> f64> {
    first: D1,
    second: Option<D2>,
    kinks: Vec<f64>,
    jumps: Vec<f64>,
}

impl<D1: Fn(f64) -> f64> Univariate<D1> {
    pub fn new(first: D1) -> Self {
        Self {
            first,
            second: None,
            kinks: Vec::new(),
            jumps: Vec::new(),
        }
    }
}

impl<D1: Fn(f64) -> f64, D2: Fn(f64) -> f64> Univariate<D1, D2> {
    pub fn with_second(first: D1, second: D2) -> Self {
        Self {
            first,
            second: Some(second),
            kinks: Vec::new(),
            jumps: Vec::new(),
        }
    }

    /// Declares kinks of `f'` and the slope jump at each.
    pub fn with_kinks(mut self, kinks: Vec<f64>, jumps: Vec<f64>) -> Self {
        assert_eq!(kinks.len(), jumps.len());
        self.kinks = kinks;
        self.jumps = jumps;
        self
    }
}

impl<D1: Fn(f64) -> f64, D2: Fn(f64) -> f64> LineFunction for Univariate<D1, D2> {
    fn derivative(&self, order: u32, t: f64) -> f64 {
        match order {
            1 => (self.first)(t),
            2 => match &self.second {
                Some(s) => s(t),
                None => {
                    let h = 1e-5;
                    ((self.first)(t + h) - (self.first)(t - h)) / (2.0 * h)
                }
            },
            _ => panic!("only first and second derivatives are available"),
        }
    }

    fn kinks(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.kinks
            .iter()
            .copied()
            .filter(|k| *k > lo && *k < hi)
            .collect()
    }

    fn slope_jump(&self, at: f64) -> f64 {
        self.kinks
            .iter()
            .zip(&self.jumps)
            .find(|(k, _)| (**k - at).abs() <= 1e-14 * (1.0 + at.abs()))
            .map_or(0.0, |(_, j)| *j)
    }
}

/// An integration interval with the derivative order under the integral and
/// the interior kinks that split it.
#[derive(Debug, Clone, PartialEq)]
pub struct UnivariateSegment {
    lo: f64,
    hi: f64,
    integrand_order: u32,
    kinks: Vec<f64>,
}

impl UnivariateSegment {
    pub fn new(lo: f64, hi: f64, integrand_order: u32, kinks: Vec<f64>) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::Domain(format!("segment [{lo}, {hi}] is empty")));
        }
        if !(1..=2).contains(&integrand_order) {
            return Err(Error::Input("integrand order must be 1 or 2".into()));
        }
        if kinks.iter().any(|k| !(*k > lo && *k < hi)) {
            return Err(Error::Input(
                "kinks must lie strictly inside the segment".into(),
            ));
        }
        if kinks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Input("kinks must be strictly increasing".into()));
        }
        Ok(Self {
            lo,
            hi,
            integrand_order,
            kinks,
        })
    }

    pub fn endpoints(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn integrand_order(&self) -> u32 {
        self.integrand_order
    }

    pub fn kink_points(&self) -> &[f64] {
        &self.kinks
    }
}

/// Precomputed quadrature for one fractional order.
#[derive(Debug, Clone)]
pub struct CaputoKernel {
    order: f64,
    n: u32,
    mu: f64,
    fine: GaussRule,
    coarse: GaussRule,
}

impl CaputoKernel {
    pub fn new(order: f64) -> Result<Self> {
        let valid = (order > 0.0 && order < 1.0) || (order > 1.0 && order < 2.0);
        if !valid {
            return Err(Error::UnsupportedOrder(order));
        }
        let n = order.ceil() as u32;
        let mu = n as f64 - order - 1.0;
        Ok(Self {
            order,
            n,
            mu,
            // weight (1 + t)^mu on [-1, 1], i.e. s^mu with s = 0 at t = -1
            fine: GaussRule::jacobi(FINE_NODES, 0.0, mu),
            coarse: GaussRule::jacobi(COARSE_NODES, 0.0, mu),
        })
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    /// Caputo derivative with terminal `c < x`.
    pub fn derivative(&self, f: &dyn LineFunction, terminal: f64, x: f64) -> Result<f64> {
        if !(x > terminal) {
            return Err(Error::Domain(format!(
                "Caputo derivative needs x > c (x = {x}, c = {terminal})"
            )));
        }
        let integral = self.kernel_integral(f, terminal, x)?;
        let ln_norm = ln_gamma(self.n as f64 - self.order);
        Ok(integral * (-ln_norm).exp())
    }

    /// Mean of `f^(n)` (jumps of `f'` included for `n = 2`) under the
    /// probability density proportional to `|x - τ|^μ` on the interval
    /// between `c` and `x`. Dividing the Caputo derivative by that of the
    /// identity map leaves exactly this mean, which stays finite at `x = c`
    /// and extends to `x < c` through the right-sided derivative.
    pub fn weighted_mean(&self, f: &dyn LineFunction, terminal: f64, x: f64) -> Result<f64> {
        let length = (x - terminal).abs();
        if length == 0.0 {
            return Ok(f.derivative(self.n, x));
        }
        let integral = self.kernel_integral(f, terminal, x)?;
        let mass = length.powf(self.mu + 1.0) / (self.mu + 1.0);
        Ok(integral / mass)
    }

    /// `∫ |x-τ|^μ f^(n)(τ) dτ` over the interval between `c` and `x`.
    fn kernel_integral(&self, f: &dyn LineFunction, terminal: f64, x: f64) -> Result<f64> {
        let length = (x - terminal).abs();
        let side = if x >= terminal { 1.0 } else { -1.0 };
        let (lo, hi) = if side > 0.0 {
            (terminal, x)
        } else {
            (x, terminal)
        };
        let tau = |s: f64| x - side * s;

        // kinks as distances from x, increasing
        let mut kinks: Vec<f64> = f
            .kinks(lo, hi)
            .into_iter()
            .map(|k| (x - k).abs())
            .filter(|s| *s > 0.0 && *s < length)
            .collect();
        kinks.sort_by(f64::total_cmp);
        kinks.dedup();

        let g = |s: f64| (f.derivative(self.n, tau(s)), f.rounding(self.n, tau(s)));
        let mut total = Segment::default();
        let mut budget = SEGMENT_BUDGET;

        let mut edges = Vec::with_capacity(kinks.len() + 2);
        edges.push(0.0);
        edges.extend_from_slice(&kinks);
        edges.push(length);

        // singular segment at s = 0
        total.add(self.singular_segment(&g, edges[1], &mut budget)?);
        for w in edges.windows(2).skip(1) {
            total.add(self.regular_segment(&g, w[0], w[1], &mut budget)?);
        }
        if self.n == 2 {
            for &s in &kinks {
                let jump = s.powf(self.mu) * f.slope_jump(tau(s));
                total.value += jump;
                total.scale += jump.abs();
            }
        }
        if total.error > 1e-10 * total.scale.max(f64::MIN_POSITIVE)
            && total.error > NOISE_FACTOR * total.noise
        {
            return Err(Error::Accuracy {
                estimate: total.value,
                error_bound: total.error,
            });
        }
        Ok(total.value)
    }

    /// `∫_0^h s^μ g(s) ds`, bisected toward `s = 0` when the rules disagree.
    /// Returns `(value, error estimate, absolute scale)`.
    fn singular_segment(
        &self,
        g: &dyn Fn(f64) -> (f64, f64),
        h: f64,
        budget: &mut usize,
    ) -> Result<Segment> {
        take_budget(budget)?;
        let half = 0.5 * h;
        let factor = half.powf(self.mu + 1.0);
        let (mut abs_sum, mut noise_sum) = (0.0, 0.0);
        let fine = self.fine.apply(|t| {
            let (v, r) = g(half * (1.0 + t));
            abs_sum += v.abs();
            noise_sum += r;
            v
        });
        let coarse = self.coarse.apply(|t| g(half * (1.0 + t)).0);
        let mass = factor * self.fine.weights().iter().sum::<f64>() / FINE_NODES as f64;
        let segment = Segment {
            value: factor * fine,
            error: factor * (fine - coarse).abs(),
            scale: (mass * abs_sum).max((factor * fine).abs()),
            noise: mass * noise_sum,
        };
        if segment.settled() {
            return Ok(segment);
        }
        let mut split = self.singular_segment(g, half, budget)?;
        split.add(self.regular_segment(g, half, h, budget)?);
        Ok(split)
    }

    /// `∫_a^b s^μ g(s) ds` for `0 < a < b` through `u = s^(μ+1)`.
    fn regular_segment(
        &self,
        g: &dyn Fn(f64) -> (f64, f64),
        a: f64,
        b: f64,
        budget: &mut usize,
    ) -> Result<Segment> {
        let p = self.mu + 1.0;
        self.regular_u(g, a.powf(p), b.powf(p), budget)
    }

    fn regular_u(
        &self,
        g: &dyn Fn(f64) -> (f64, f64),
        ua: f64,
        ub: f64,
        budget: &mut usize,
    ) -> Result<Segment> {
        take_budget(budget)?;
        let p = self.mu + 1.0;
        let inv = 1.0 / p;
        let (fine_rule, coarse_rule) = quadrature::legendre_pair();
        let h = |u: f64| {
            let (v, r) = g(u.powf(inv));
            (v / p, r / p)
        };
        let (mut abs_acc, mut noise_acc) = (0.0, 0.0);
        let fine = fine_rule.integrate(ua, ub, |u| {
            let (v, r) = h(u);
            abs_acc += v.abs();
            noise_acc += r;
            v
        });
        let coarse = coarse_rule.integrate(ua, ub, |u| h(u).0);
        let width = (ub - ua) / FINE_NODES as f64;
        let segment = Segment {
            value: fine,
            error: (fine - coarse).abs(),
            scale: (width * abs_acc).max(fine.abs()),
            noise: width * noise_acc,
        };
        let mid = 0.5 * (ua + ub);
        if segment.settled() || !(mid > ua && mid < ub) {
            return Ok(segment);
        }
        let mut split = self.regular_u(g, ua, mid, budget)?;
        split.add(self.regular_u(g, mid, ub, budget)?);
        Ok(split)
    }
}

/// Partial quadrature result: value, rule disagreement, `∫ s^μ |g|` and
/// `∫ s^μ rounding(g)`.
#[derive(Debug, Default, Clone, Copy)]
struct Segment {
    value: f64,
    error: f64,
    scale: f64,
    noise: f64,
}

impl Segment {
    fn settled(&self) -> bool {
        self.error == 0.0
            || self.error <= RELATIVE_TOL * self.scale
            || self.error <= NOISE_FACTOR * self.noise
    }

    fn add(&mut self, other: Segment) {
        self.value += other.value;
        self.error += other.error;
        self.scale += other.scale;
        self.noise += other.noise;
    }
}

fn take_budget(budget: &mut usize) -> Result<()> {
    if *budget == 0 {
        return Err(Error::Accuracy {
            estimate: f64::NAN,
            error_bound: f64::INFINITY,
        });
    }
    *budget -= 1;
    Ok(())
}

/// Caputo derivative of order `order` of a univariate function at `x` with
/// lower terminal `terminal`.
pub fn caputo_derivative_1d(
    f: &dyn LineFunction,
    terminal: f64,
    x: f64,
    order: f64,
) -> Result<f64> {
    CaputoKernel::new(order)?.derivative(f, terminal, x)
}

/// Closed-form Caputo derivative of `Σ_p coeffs[p] (τ - c)^p` at `x`.
pub fn caputo_derivative_poly(coeffs: &[f64], terminal: f64, x: f64, order: f64) -> Result<f64> {
    let valid = (order > 0.0 && order < 1.0) || (order > 1.0 && order < 2.0);
    if !valid {
        return Err(Error::UnsupportedOrder(order));
    }
    if !(x > terminal) {
        return Err(Error::Domain(format!(
            "Caputo derivative needs x > c (x = {x}, c = {terminal})"
        )));
    }
    let n = order.ceil() as usize;
    let h = x - terminal;
    Ok(coeffs
        .iter()
        .enumerate()
        .skip(n)
        .map(|(p, a)| {
            let pf = p as f64;
            a * gamma_ratio(pf + 1.0, pf + 1.0 - order) * h.powf(pf - order)
        })
        .sum())
}

/// Terminal actually used at `x`: each `c_i` is clamped to lie strictly below
/// `x_i`. Returns the clamped terminal and the affected coordinates.
pub fn effective_terminal(terminal: &DVector<f64>, x: &DVector<f64>) -> (DVector<f64>, Vec<usize>) {
    let mut clamped = Vec::new();
    let c = DVector::from_fn(x.len(), |i, _| {
        let limit = x[i] - 1e-12 * x[i].abs().max(1.0);
        if terminal[i] > limit {
            clamped.push(i);
            limit
        } else {
            terminal[i]
        }
    });
    (c, clamped)
}

fn check_dims(f: &ObjectiveModel, cfg: &FractionalConfig, x: &DVector<f64>) -> Result<()> {
    if x.len() != f.dim() || cfg.terminal.len() != f.dim() {
        return Err(Error::Input(format!(
            "dimension mismatch: objective {}, point {}, terminal {}",
            f.dim(),
            x.len(),
            cfg.terminal.len()
        )));
    }
    Ok(())
}

/// Plain Caputo gradient `(D^α_{x_1} f, …, D^α_{x_n} f)`. Coordinates with
/// `x_i ≤ c_i` are a domain error, except in adaptive-terminal mode where the
/// terminal is clamped (see [`effective_terminal`]).
pub fn caputo_gradient(
    f: &ObjectiveModel,
    cfg: &FractionalConfig,
    x: &DVector<f64>,
) -> Result<DVector<f64>> {
    check_dims(f, cfg, x)?;
    let terminal = if cfg.memory_length.is_some() {
        effective_terminal(&cfg.terminal, x).0
    } else {
        cfg.terminal.clone()
    };
    if cfg.alpha == 1.0 {
        return Ok(f.gradient(x));
    }
    let kernel = CaputoKernel::new(cfg.alpha)?;
    let mut out = DVector::zeros(x.len());
    for i in 0..x.len() {
        let line = f.line(x, i);
        out[i] = kernel
            .derivative(&line, terminal[i], x[i])
            .map_err(|e| Error::Coordinate {
                index: i,
                source: Box::new(e),
            })?;
    }
    Ok(out)
}

/// Reusable evaluator for the modified fractional gradient at fixed `(α, β)`.
#[derive(Debug, Clone)]
pub struct ModifiedGradient {
    alpha: f64,
    beta: f64,
    kernels: Option<(CaputoKernel, CaputoKernel)>,
}

impl ModifiedGradient {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let kernels = if alpha < 1.0 {
            Some((CaputoKernel::new(alpha)?, CaputoKernel::new(1.0 + alpha)?))
        } else {
            None
        };
        Ok(Self {
            alpha,
            beta,
            kernels,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `diag(∇^α I)^(-1) [∇^α f + β diag(|x-c|) ∇^(1+α) f]` with the common
    /// diagonal factor cancelled. Coordinate `i` equals
    /// `E[f'] + β (x_i - c_i) E[f'']` under the kernel-weighted mean.
    pub fn evaluate(
        &self,
        f: &ObjectiveModel,
        terminal: &DVector<f64>,
        x: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        let mut out = DVector::zeros(x.len());
        for i in 0..x.len() {
            let line = f.line(x, i);
            let offset = x[i] - terminal[i];
            let wrap = |e| Error::Coordinate {
                index: i,
                source: Box::new(e),
            };
            out[i] = match &self.kernels {
                Some((first, second)) => {
                    let m1 = first
                        .weighted_mean(&line, terminal[i], x[i])
                        .map_err(wrap)?;
                    let m2 = if self.beta != 0.0 && offset != 0.0 {
                        second
                            .weighted_mean(&line, terminal[i], x[i])
                            .map_err(wrap)?
                    } else {
                        0.0
                    };
                    m1 + self.beta * offset * m2
                }
                None => {
                    let d1 = line.derivative(1, x[i]);
                    let d2 = if self.beta != 0.0 && offset != 0.0 {
                        line.derivative(2, x[i])
                    } else {
                        0.0
                    };
                    d1 + self.beta * offset * d2
                }
            };
        }
        Ok(out)
    }
}

/// Modified fractional gradient in cancelled form; see [`ModifiedGradient::evaluate`].
pub fn modified_fractional_gradient(
    f: &ObjectiveModel,
    cfg: &FractionalConfig,
    x: &DVector<f64>,
) -> Result<DVector<f64>> {
    check_dims(f, cfg, x)?;
    ModifiedGradient::new(cfg.alpha, cfg.beta)?.evaluate(f, &cfg.terminal, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::QuadraticObjective;
    use crate::special::gamma;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn constant_function_has_zero_derivative() {
        let f = Univariate::new(|_t: f64| 0.0);
        for alpha in [0.1, 0.5, 0.9] {
            assert_eq!(caputo_derivative_1d(&f, 0.0, 2.0, alpha).unwrap(), 0.0);
        }
    }

    #[test]
    fn identity_at_half_order() {
        // D^0.5 τ at x = 1, c = 0 is 1/Γ(1.5) = 2/√π
        let f = Univariate::new(|_t: f64| 1.0);
        let got = caputo_derivative_1d(&f, 0.0, 1.0, 0.5).unwrap();
        assert!((got - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-14);
        assert!((got - 1.0 / gamma(1.5)).abs() < 1e-14);
    }

    #[test]
    fn square_at_half_order() {
        let f = Univariate::new(|t: f64| 2.0 * t);
        let got = caputo_derivative_1d(&f, 0.0, 1.0, 0.5).unwrap();
        assert!((got - 1.5045055561).abs() < 1e-10);
        let poly = caputo_derivative_poly(&[0.0, 0.0, 1.0], 0.0, 1.0, 0.5).unwrap();
        assert!((poly - 1.5045055561).abs() < 1e-10);
    }

    #[test]
    fn domain_and_order_errors() {
        let f = Univariate::new(|_t: f64| 1.0);
        assert!(matches!(
            caputo_derivative_1d(&f, 1.0, 1.0, 0.5),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            caputo_derivative_1d(&f, 0.0, 1.0, 1.0),
            Err(Error::UnsupportedOrder(_))
        ));
        assert!(matches!(
            caputo_derivative_poly(&[1.0], 0.0, 1.0, 2.5),
            Err(Error::UnsupportedOrder(_))
        ));
    }

    #[test]
    fn identity_limit_approaches_one() {
        let got = caputo_derivative_poly(&[0.0, 1.0], 0.0, 3.7, 1.0 - 1e-9).unwrap();
        assert!((got - 1.0).abs() < 1e-8);
        assert_eq!(caputo_derivative_poly(&[4.2], 0.0, 3.7, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn second_order_branch_matches_monomial_rule() {
        // order 1.5 of τ³ at x - c = 2: Γ(4)/Γ(2.5) 2^1.5
        let f = Univariate::with_second(|t: f64| 3.0 * t * t, |t: f64| 6.0 * t);
        let got = caputo_derivative_1d(&f, 0.0, 2.0, 1.5).unwrap();
        let want = caputo_derivative_poly(&[0.0, 0.0, 0.0, 1.0], 0.0, 2.0, 1.5).unwrap();
        assert!((got - want).abs() < 1e-12 * want);
    }

    #[test]
    fn modified_gradient_is_finite_at_terminal() {
        let q = QuadraticObjective::new(dmatrix![2.0, 0.5; 0.5, 1.0], dvector![1.0, -1.0], 0.0)
            .unwrap();
        let f = ObjectiveModel::from(q.clone());
        let x = dvector![0.7, -0.2];
        let cfg = FractionalConfig::new(0.4, 0.8, x.clone()).unwrap();
        let g = modified_fractional_gradient(&f, &cfg, &x).unwrap();
        assert!((g - q.gradient(&x)).amax() < 1e-12);
    }

    #[test]
    fn clamp_moves_terminal_below_point() {
        let (c, clamped) = effective_terminal(&dvector![0.0, 5.0], &dvector![1.0, 2.0]);
        assert_eq!(clamped, vec![1]);
        assert_eq!(c[0], 0.0);
        assert!(c[1] < 2.0 && c[1] > 2.0 - 1e-9);
    }

    #[test]
    fn config_invariants() {
        assert!(FractionalConfig::new(0.0, 0.0, dvector![0.0]).is_err());
        assert!(FractionalConfig::new(1.2, 0.0, dvector![0.0]).is_err());
        let cfg = FractionalConfig::new(0.5, 1.0, dvector![0.0]).unwrap();
        assert!((cfg.gamma_alpha() - 1.0 / 3.0).abs() < 1e-15);
        assert!((cfg.c2_coeff() - (2.0 / 3.0 + 1.0)).abs() < 1e-15);
        // Γ(2-α)Γ(2)/Γ(3-α) = 1/(2-α)
        let direct = gamma_ratio(1.5, 2.5);
        assert!((direct - 2.0 / 3.0).abs() < 1e-14);
    }
}
