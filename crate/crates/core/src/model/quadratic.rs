//! The least-squares family `f_j(x) = ½‖W_jᵀx − y_j‖²` and its Tikhonov
//! solutions.
//!
//! With `A_j = W_jW_jᵀ` and `b_j = −W_j y_j`, the de-scaled fractional gradient
//! of `f_j` at order `α` and weight `β` is exactly
//!
//! ```text
//! g_j(x) = A_j x + b_j + γ_{α,β} diag(A_j)(x − c),   γ_{α,β} = β − (1−α)/(2−α),
//! ```
//!
//! so a fixed point of the multiplier-weighted iteration is the minimizer of a
//! Tikhonov-regularized least-squares problem.

use nalgebra::{DMatrix, DVector, SVD};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fractional::FractionalConfig;
use crate::model::{ObjectiveModel, QuadraticObjective};

/// Shape of the per-objective regularizer `Reg_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Regularizer {
    /// `diag(A_j) = diag(R̃_j)²`; the shape induced by the fractional gradient.
    #[default]
    HessianDiagonal,
    /// `diag(R̃_j)`.
    RootDiagonal,
    /// `R̃_j R̃_jᵀ`.
    OuterProduct,
}

/// A multi-objective least-squares instance.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticMop {
    factors: Vec<DMatrix<f64>>,
    targets: Vec<DVector<f64>>,
    terminal: DVector<f64>,
    seed: Option<u64>,
    truth: Option<DVector<f64>>,
    grams: Vec<DMatrix<f64>>,
}

impl QuadraticMop {
    /// `factors[j]` is `n × m_j`, `targets[j]` has length `m_j`.
    pub fn new(
        factors: Vec<DMatrix<f64>>,
        targets: Vec<DVector<f64>>,
        terminal: DVector<f64>,
    ) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Input(
                "an instance needs at least one objective".into(),
            ));
        }
        if factors.len() != targets.len() {
            return Err(Error::Input(format!(
                "{} factors but {} targets",
                factors.len(),
                targets.len()
            )));
        }
        let n = terminal.len();
        if n == 0 {
            return Err(Error::Input("dimension must be positive".into()));
        }
        for (j, (w, y)) in factors.iter().zip(&targets).enumerate() {
            if w.nrows() != n {
                return Err(Error::Input(format!(
                    "factor {j} has {} rows, expected {n}",
                    w.nrows()
                )));
            }
            if w.ncols() != y.len() {
                return Err(Error::Input(format!(
                    "factor {j} has {} columns but target {j} has length {}",
                    w.ncols(),
                    y.len()
                )));
            }
            if w.iter().chain(y.iter()).any(|v| !v.is_finite()) {
                return Err(Error::Input(format!("objective {j} has non-finite data")));
            }
        }
        if terminal.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("terminal must be finite".into()));
        }
        let grams = factors.iter().map(|w| w * w.transpose()).collect();
        Ok(Self {
            factors,
            targets,
            terminal,
            seed: None,
            truth: None,
            grams,
        })
    }

    /// Records the generator seed and the point the targets were built from.
    pub fn with_provenance(mut self, seed: Option<u64>, truth: Option<DVector<f64>>) -> Self {
        self.seed = seed;
        self.truth = truth;
        self
    }

    pub fn with_terminal(mut self, terminal: DVector<f64>) -> Result<Self> {
        if terminal.len() != self.dim() {
            return Err(Error::Input("terminal dimension mismatch".into()));
        }
        self.terminal = terminal;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.terminal.len()
    }

    pub fn num_objectives(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[DMatrix<f64>] {
        &self.factors
    }

    pub fn targets(&self) -> &[DVector<f64>] {
        &self.targets
    }

    pub fn terminal(&self) -> &DVector<f64> {
        &self.terminal
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn truth(&self) -> Option<&DVector<f64>> {
        self.truth.as_ref()
    }

    /// `A_j = W_jW_jᵀ`.
    pub fn gram(&self, j: usize) -> &DMatrix<f64> {
        &self.grams[j]
    }

    /// `b_j = −W_j y_j`.
    pub fn linear(&self, j: usize) -> DVector<f64> {
        -(&self.factors[j] * &self.targets[j])
    }

    /// `R̃_j` with entries `sqrt((A_j)_ii)`.
    pub fn rtilde(&self, j: usize) -> DVector<f64> {
        self.grams[j].diagonal().map(|a| a.max(0.0).sqrt())
    }

    pub fn regularizer(&self, j: usize, shape: Regularizer) -> DMatrix<f64> {
        match shape {
            Regularizer::HessianDiagonal => DMatrix::from_diagonal(&self.grams[j].diagonal()),
            Regularizer::RootDiagonal => DMatrix::from_diagonal(&self.rtilde(j)),
            Regularizer::OuterProduct => {
                let r = self.rtilde(j);
                &r * r.transpose()
            }
        }
    }

    /// `f_j` as a quadratic objective, including the constant `½‖y_j‖²`.
    pub fn objective(&self, j: usize) -> QuadraticObjective {
        QuadraticObjective::new(
            self.grams[j].clone(),
            self.linear(j),
            0.5 * self.targets[j].norm_squared(),
        )
        .expect("Gram matrices are symmetric")
    }

    pub fn objectives(&self) -> Vec<ObjectiveModel> {
        (0..self.num_objectives())
            .map(|j| self.objective(j).into())
            .collect()
    }

    /// `Σ_j λ_j A_j`.
    pub fn weighted_gram(&self, multipliers: &[f64]) -> DMatrix<f64> {
        let n = self.dim();
        self.grams
            .iter()
            .zip(multipliers)
            .fold(DMatrix::zeros(n, n), |acc, (a, l)| acc + a * *l)
    }

    /// `Σ_j λ_j Reg_j`.
    pub fn weighted_regularizer(&self, multipliers: &[f64], shape: Regularizer) -> DMatrix<f64> {
        let n = self.dim();
        (0..self.num_objectives())
            .zip(multipliers)
            .fold(DMatrix::zeros(n, n), |acc, (j, l)| {
                acc + self.regularizer(j, shape) * *l
            })
    }

    fn check_multipliers(&self, multipliers: &[f64]) -> Result<()> {
        if multipliers.len() != self.num_objectives() {
            return Err(Error::Input(format!(
                "{} multipliers for {} objectives",
                multipliers.len(),
                self.num_objectives()
            )));
        }
        let sum: f64 = multipliers.iter().sum();
        if multipliers.iter().any(|l| !(*l >= -1e-12)) || (sum - 1.0).abs() > 1e-10 {
            return Err(Error::Input(
                "multipliers must lie on the unit simplex".into(),
            ));
        }
        Ok(())
    }
}

/// Seeded instance with entries of `x*` and every `W_j` uniform on `(−1, 1)`
/// and `y_j = W_jᵀx*`. Draw order: `x*`, then each `W_j` row by row.
pub fn random_quadratic_mop(n: usize, m_data: usize, m: usize, seed: u64) -> Result<QuadraticMop> {
    if n == 0 || m_data == 0 || m == 0 {
        return Err(Error::Input("n, m_data and m must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth: DVector<f64> =
        DVector::from_iterator(n, (0..n).map(|_| rng.random_range(-1.0..1.0)));
    let mut factors = Vec::with_capacity(m);
    let mut targets = Vec::with_capacity(m);
    for _ in 0..m {
        let mut w = DMatrix::zeros(n, m_data);
        for i in 0..n {
            for k in 0..m_data {
                w[(i, k)] = rng.random_range(-1.0..1.0);
            }
        }
        targets.push(w.transpose() * &truth);
        factors.push(w);
    }
    Ok(QuadraticMop::new(factors, targets, DVector::zeros(n))?
        .with_provenance(Some(seed), Some(truth)))
}

/// `g_j(x) = A_j x + b_j + γ_{α,β} diag(A_j)(x − c)` with `c` taken from `cfg`.
pub fn quadratic_effective_gradient(
    mop: &QuadraticMop,
    j: usize,
    cfg: &FractionalConfig,
    x: &DVector<f64>,
) -> Result<DVector<f64>> {
    quadratic_effective_gradient_with(mop, j, cfg, x, Regularizer::HessianDiagonal)
}

pub fn quadratic_effective_gradient_with(
    mop: &QuadraticMop,
    j: usize,
    cfg: &FractionalConfig,
    x: &DVector<f64>,
    shape: Regularizer,
) -> Result<DVector<f64>> {
    if j >= mop.num_objectives() {
        return Err(Error::Input(format!("objective index {j} out of range")));
    }
    if x.len() != mop.dim() || cfg.terminal().len() != mop.dim() {
        return Err(Error::Input("dimension mismatch".into()));
    }
    let gamma = cfg.gamma_alpha_beta();
    let pull = mop.regularizer(j, shape) * (x - cfg.terminal());
    Ok(mop.gram(j) * x + mop.linear(j) + pull * gamma)
}

/// Closed-form minimizer of `Σ_j λ_j [f_j(x) + (γ/2)(x−c)ᵀReg_j(x−c)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TikhonovSolution {
    pub gamma: f64,
    pub multipliers: Vec<f64>,
    pub x_tik: DVector<f64>,
    /// `A_{α,β} = Σ_j λ_j (A_j + γ Reg_j)`.
    pub a_matrix: DMatrix<f64>,
    pub sigma_max: f64,
    pub kappa: f64,
}

pub fn tikhonov_solve(
    mop: &QuadraticMop,
    gamma: f64,
    multipliers: &[f64],
    terminal: &DVector<f64>,
) -> Result<TikhonovSolution> {
    tikhonov_solve_with(
        mop,
        gamma,
        multipliers,
        terminal,
        Regularizer::HessianDiagonal,
    )
}

pub fn tikhonov_solve_with(
    mop: &QuadraticMop,
    gamma: f64,
    multipliers: &[f64],
    terminal: &DVector<f64>,
    shape: Regularizer,
) -> Result<TikhonovSolution> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::Input(format!(
            "gamma must be finite and nonnegative, got {gamma}"
        )));
    }
    if terminal.len() != mop.dim() {
        return Err(Error::Input("terminal dimension mismatch".into()));
    }
    mop.check_multipliers(multipliers)?;
    let reg = mop.weighted_regularizer(multipliers, shape);
    let a_matrix = mop.weighted_gram(multipliers) + &reg * gamma;
    let rhs = (0..mop.num_objectives())
        .zip(multipliers)
        .fold(DVector::zeros(mop.dim()), |acc, (j, l)| {
            acc - mop.linear(j) * *l
        })
        + &reg * terminal * gamma;

    let svd = SVD::new(a_matrix.clone(), true, true);
    let sigma_max = svd.singular_values.max();
    let sigma_min = svd.singular_values.min();
    if !(sigma_min > 1e-14 * sigma_max) {
        return Err(Error::Singular(format!(
            "regularized system has singular values in [{sigma_min:e}, {sigma_max:e}]"
        )));
    }
    let x_tik = svd
        .solve(&rhs, 0.0)
        .map_err(|e| Error::Singular(e.to_string()))?;
    Ok(TikhonovSolution {
        gamma,
        multipliers: multipliers.to_vec(),
        x_tik,
        a_matrix,
        sigma_max,
        kappa: sigma_max / sigma_min,
    })
}

/// `σ_max / σ_min` from a dense SVD; `+∞` for singular input.
pub fn condition_number(a: &DMatrix<f64>) -> Result<f64> {
    if a.is_empty() || a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input(
            "condition number needs a non-empty finite matrix".into(),
        ));
    }
    let s = a.singular_values();
    let (hi, lo) = (s.max(), s.min());
    if lo == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(hi / lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn identity_factor_hand_solve() {
        let mop = QuadraticMop::new(
            vec![DMatrix::identity(2, 2)],
            vec![dvector![1.0, 1.0]],
            dvector![0.0, 0.0],
        )
        .unwrap();
        let sol = tikhonov_solve(&mop, 1.0, &[1.0], &dvector![0.0, 0.0]).unwrap();
        assert!((sol.x_tik - dvector![0.5, 0.5]).amax() < 1e-14);
        assert!((sol.kappa - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_gamma_recovers_truth() {
        let mop = random_quadratic_mop(4, 6, 2, 3).unwrap();
        let sol = tikhonov_solve(&mop, 0.0, &[0.3, 0.7], mop.terminal()).unwrap();
        assert!((sol.x_tik - mop.truth().unwrap()).amax() < 1e-10);
    }

    #[test]
    fn large_gamma_pulls_to_terminal() {
        let mop = random_quadratic_mop(3, 5, 2, 9).unwrap();
        let c = dvector![0.2, -0.1, 0.4];
        let sol = tikhonov_solve(&mop, 1e8, &[0.5, 0.5], &c).unwrap();
        assert!((sol.x_tik - c).amax() < 1e-4);
    }

    #[test]
    fn rank_deficient_is_singular() {
        let mop = random_quadratic_mop(4, 2, 1, 1).unwrap();
        assert!(matches!(
            tikhonov_solve(&mop, 0.0, &[1.0], mop.terminal()),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn seeded_instances_repeat() {
        let a = random_quadratic_mop(2, 2, 2, 0).unwrap();
        let b = random_quadratic_mop(2, 2, 2, 0).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_quadratic_mop(2, 2, 2, 1).unwrap());
    }

    #[test]
    fn condition_numbers() {
        assert_eq!(condition_number(&DMatrix::identity(3, 3)).unwrap(), 1.0);
        assert!((condition_number(&dmatrix![10.0, 0.0; 0.0, 1.0]).unwrap() - 10.0).abs() < 1e-12);
        assert!(condition_number(&dmatrix![f64::NAN]).is_err());
        assert!(condition_number(&dmatrix![1.0, 1.0; 1.0, 1.0]).unwrap() > 1e15);
    }

    #[test]
    fn multipliers_must_be_on_simplex() {
        let mop = random_quadratic_mop(2, 3, 2, 0).unwrap();
        assert!(tikhonov_solve(&mop, 1.0, &[0.6, 0.6], mop.terminal()).is_err());
        assert!(tikhonov_solve(&mop, -1.0, &[0.5, 0.5], mop.terminal()).is_err());
    }
}
