//! Common descent direction from the min-norm dual.
//!
//! The primal problem `min t + ½‖d‖²  s.t.  g_jᵀd ≤ t` has the dual
//! `min ½‖Σ λ_j g_j‖²` over the unit simplex. With `Q = GᵀG` the dual is
//! solved by Wolfe's min-norm-point method; if that stalls numerically,
//! projected gradient with exact line search continues from its iterate.
//! Then `d = −Gλ` and `t = max_j g_jᵀd`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 10_000;
const GAP_TOL: f64 = 1e-12;
const GAP_FAIL: f64 = 1e-8;
const WOLFE_MAJOR: usize = 1_000;

/// Solution of the direction subproblem at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionResult {
    pub t_value: f64,
    pub direction: DVector<f64>,
    pub multipliers: Vec<f64>,
    /// Largest violation among stationarity, feasibility and complementarity.
    pub kkt_residual: f64,
    /// `t + ½‖d‖²`, never positive.
    pub theta: f64,
}

impl DirectionResult {
    pub fn norm(&self) -> f64 {
        self.direction.norm()
    }

    /// `½‖Gλ‖²`.
    pub fn dual_objective(&self) -> f64 {
        0.5 * self.direction.norm_squared()
    }
}

fn gradient_matrix(gradients: &[DVector<f64>]) -> Result<DMatrix<f64>> {
    let Some(first) = gradients.first() else {
        return Err(Error::Input("at least one gradient is required".into()));
    };
    let n = first.len();
    if gradients.iter().any(|g| g.len() != n) {
        return Err(Error::Input("gradients differ in length".into()));
    }
    if gradients
        .iter()
        .flat_map(|g| g.iter())
        .any(|v| !v.is_finite())
    {
        return Err(Error::Input("gradients must be finite".into()));
    }
    Ok(DMatrix::from_columns(gradients))
}

/// Euclidean projection onto `{λ ≥ 0, Σλ = 1}`.
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut shift = 0.0;
    for (k, u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - 1.0) / (k + 1) as f64;
        if u - candidate > 0.0 {
            shift = candidate;
        }
    }
    v.iter().map(|x| (x - shift).max(0.0)).collect()
}

/// Builds the full result for given multipliers.
pub fn direction_from_multipliers(
    gradients: &[DVector<f64>],
    multipliers: &[f64],
) -> Result<DirectionResult> {
    let g = gradient_matrix(gradients)?;
    if multipliers.len() != gradients.len() {
        return Err(Error::Input(
            "one multiplier per gradient is required".into(),
        ));
    }
    Ok(assemble(&g, multipliers.to_vec()))
}

fn assemble(g: &DMatrix<f64>, multipliers: Vec<f64>) -> DirectionResult {
    let lambda = DVector::from_column_slice(&multipliers);
    let direction = -(g * &lambda);
    let slopes = g.tr_mul(&direction);
    let t_value = slopes.max();
    let d2 = direction.norm_squared();

    // stationarity holds by construction; primal t = -‖d‖² at the optimum
    let scale = g
        .column_iter()
        .map(|c| c.norm_squared())
        .fold(1.0, f64::max);
    let simplex = (lambda.sum() - 1.0).abs() + lambda.iter().map(|l| (-l).max(0.0)).sum::<f64>();
    let complementarity = multipliers
        .iter()
        .zip(slopes.iter())
        .map(|(l, s)| (l * (s - t_value)).abs())
        .fold(0.0, f64::max);
    let dual_gap = (t_value + d2).abs();
    let kkt_residual = simplex.max((complementarity.max(dual_gap)) / scale);

    DirectionResult {
        t_value,
        direction,
        multipliers,
        kkt_residual,
        theta: (t_value + 0.5 * d2).min(0.0),
    }
}

/// Solves the direction subproblem for gradients `g_1, …, g_m`.
pub fn solve_direction(gradients: &[DVector<f64>]) -> Result<DirectionResult> {
    let g = gradient_matrix(gradients)?;
    let m = gradients.len();
    if m == 1 {
        return Ok(assemble(&g, vec![1.0]));
    }
    let q = g.tr_mul(&g);
    let q_scale = q.diagonal().max().max(1.0);
    let tol = GAP_TOL * q_scale;
    let mut lambda = wolfe_min_norm(&q, tol);
    let step = 1.0 / q_scale.max(q.diagonal().sum());

    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        let grad = &q * &lambda;
        gap = lambda.dot(&grad) - grad.min();
        if gap <= tol {
            break;
        }
        iterations += 1;
        let trial: Vec<f64> = (&lambda - &grad * step).iter().copied().collect();
        let projected = DVector::from_vec(project_to_simplex(&trial));
        let delta = &projected - &lambda;
        let curvature = delta.dot(&(&q * &delta));
        let slope = grad.dot(&delta);
        let tau = if curvature > 0.0 {
            (-slope / curvature).clamp(0.0, 1.0)
        } else {
            1.0
        };
        let next = &lambda + delta * tau;

        // Frank-Wolfe vertex step as a fallback when projection stalls
        let vertex = grad.imin();
        let mut fw = -&lambda;
        fw[vertex] += 1.0;
        let fw_curv = fw.dot(&(&q * &fw));
        let fw_slope = grad.dot(&fw);
        let fw_tau = if fw_curv > 0.0 {
            (-fw_slope / fw_curv).clamp(0.0, 1.0)
        } else {
            1.0
        };
        let fw_next = &lambda + fw * fw_tau;
        let value = |l: &DVector<f64>| l.dot(&(&q * l));
        lambda = if value(&fw_next) < value(&next) {
            fw_next
        } else {
            next
        };
    }
    if gap > GAP_FAIL * q_scale {
        return Err(Error::Subproblem { gap, iterations });
    }
    let multipliers = project_to_simplex(lambda.as_slice());
    let result = assemble(&g, multipliers);
    debug_assert!(
        result.kkt_residual <= 1e-8,
        "KKT residual {} exceeds 1e-8",
        result.kkt_residual
    );
    Ok(result)
}

/// Wolfe's method on the Gram matrix: the corral `S` stays affinely
/// independent and each minor cycle moves to the affine minimizer of `S` or
/// to the boundary of its hull. Returns the best iterate it reaches.
fn wolfe_min_norm(q: &DMatrix<f64>, tol: f64) -> DVector<f64> {
    let m = q.nrows();
    let start = q.diagonal().imin();
    let mut lambda = DVector::zeros(m);
    lambda[start] = 1.0;
    let mut corral = vec![start];
    for _ in 0..WOLFE_MAJOR {
        let grad = q * &lambda;
        let entering = grad.imin();
        if lambda.dot(&grad) - grad[entering] <= tol || corral.contains(&entering) {
            break;
        }
        corral.push(entering);
        loop {
            let Some(mu) = affine_minimizer(q, &corral) else {
                return lambda;
            };
            if mu.iter().all(|v| *v > 0.0) {
                lambda.fill(0.0);
                for (i, j) in corral.iter().enumerate() {
                    lambda[*j] = mu[i];
                }
                break;
            }
            // largest step toward mu that keeps the current weights nonnegative
            let theta = corral
                .iter()
                .zip(mu.iter())
                .filter(|(_, v)| **v <= 0.0)
                .map(|(j, v)| lambda[*j] / (lambda[*j] - v))
                .fold(1.0, f64::min);
            for (i, j) in corral.iter().enumerate() {
                lambda[*j] += theta * (mu[i] - lambda[*j]);
            }
            let tiny = 1e-15;
            corral.retain(|j| lambda[*j] > tiny);
            for j in 0..m {
                if !corral.contains(&j) {
                    lambda[j] = 0.0;
                }
            }
            if corral.is_empty() {
                return DVector::from_element(m, 1.0 / m as f64);
            }
        }
    }
    let total = lambda.sum();
    lambda / total
}

/// Weights of the min-norm point of the affine hull of the corral, from
/// `[Q_SS 1; 1ᵀ 0][μ; ν] = [0; 1]`.
fn affine_minimizer(q: &DMatrix<f64>, corral: &[usize]) -> Option<DVector<f64>> {
    let k = corral.len();
    let mut kkt = DMatrix::zeros(k + 1, k + 1);
    for (a, i) in corral.iter().enumerate() {
        for (b, j) in corral.iter().enumerate() {
            kkt[(a, b)] = q[(*i, *j)];
        }
        kkt[(a, k)] = 1.0;
        kkt[(k, a)] = 1.0;
    }
    let mut rhs = DVector::zeros(k + 1);
    rhs[k] = 1.0;
    let sol = kkt.lu().solve(&rhs)?;
    let mu = sol.rows(0, k).into_owned();
    let sum = mu.sum();
    (mu.iter().all(|v| v.is_finite()) && (sum - 1.0).abs() < 1e-6).then_some(mu)
}

/// Closed form for two objectives.
pub fn solve_direction_m2_closed_form(
    g1: &DVector<f64>,
    g2: &DVector<f64>,
) -> Result<DirectionResult> {
    let g = gradient_matrix(&[g1.clone(), g2.clone()])?;
    let diff = g2 - g1;
    let denom = diff.norm_squared();
    let l1 = if denom == 0.0 {
        1.0
    } else {
        (diff.dot(g2) / denom).clamp(0.0, 1.0)
    };
    Ok(assemble(&g, vec![l1, 1.0 - l1]))
}

/// Best point of the simplex lattice `{λ : resolution·λ ∈ ℕ^m}`.
pub fn brute_force_direction(
    gradients: &[DVector<f64>],
    resolution: usize,
) -> Result<DirectionResult> {
    let g = gradient_matrix(gradients)?;
    let m = gradients.len();
    if m > 6 {
        return Err(Error::Input(format!("brute force refused for m = {m} > 6")));
    }
    if resolution == 0 {
        return Err(Error::Input("resolution must be positive".into()));
    }
    let q = g.tr_mul(&g);
    let mut counts = vec![0usize; m];
    let mut best = (f64::INFINITY, vec![0usize; m]);
    if m == 1 {
        best.1[0] = resolution;
    } else {
        scan(&q, &mut counts, 0, resolution, &mut best);
    }
    let lambda = best
        .1
        .iter()
        .map(|k| *k as f64 / resolution as f64)
        .collect();
    Ok(assemble(&g, lambda))
}

/// Visits every lattice point with the first `index` counts fixed. The last
/// two counts `(k, r − k)` are swept with the quadratic expanded in `k`, so
/// each point costs O(1) while none is skipped.
fn scan(
    q: &DMatrix<f64>,
    counts: &mut [usize],
    index: usize,
    remaining: usize,
    best: &mut (f64, Vec<usize>),
) {
    let m = counts.len();
    if index + 2 < m {
        for k in 0..=remaining {
            counts[index] = k;
            scan(q, counts, index + 1, remaining - k, best);
        }
        return;
    }
    let (a, b) = (m - 2, m - 1);
    let prefix = |col: usize| -> f64 { (0..a).map(|i| q[(i, col)] * counts[i] as f64).sum() };
    let fixed: f64 = (0..a).map(|i| counts[i] as f64 * prefix(i)).sum();
    let (pa, pb) = (prefix(a), prefix(b));
    let r = remaining as f64;
    for k in 0..=remaining {
        let (u, w) = (k as f64, r - k as f64);
        let v = fixed
            + 2.0 * (pa * u + pb * w)
            + q[(a, a)] * u * u
            + 2.0 * q[(a, b)] * u * w
            + q[(b, b)] * w * w;
        if v < best.0 {
            best.0 = v;
            counts[a] = k;
            counts[b] = remaining - k;
            best.1.copy_from_slice(counts);
        }
    }
}
