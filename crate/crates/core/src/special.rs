//! Gamma-function helpers. All ratios go through log-gamma.

/// Natural log of |Γ(x)|.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Γ(x) for positive `x`.
pub fn gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    ln_gamma(x).exp()
}

/// Γ(a) / Γ(b) for positive arguments.
pub fn gamma_ratio(a: f64, b: f64) -> f64 {
    (ln_gamma(a) - ln_gamma(b)).exp()
}
