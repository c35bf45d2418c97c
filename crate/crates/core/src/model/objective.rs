use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fractional::LineFunction;

pub type ValueFn = Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
pub type HessianFn = Arc<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;

/// `½ xᵀ A x + bᵀ x + c0` with symmetric `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticObjective {
    hessian: DMatrix<f64>,
    linear: DVector<f64>,
    constant: f64,
}

impl QuadraticObjective {
    pub fn new(hessian: DMatrix<f64>, linear: DVector<f64>, constant: f64) -> Result<Self> {
        let n = linear.len();
        if hessian.nrows() != n || hessian.ncols() != n {
            return Err(Error::Input(format!(
                "hessian is {}x{} but the linear term has length {n}",
                hessian.nrows(),
                hessian.ncols()
            )));
        }
        let scale = hessian.amax().max(1.0);
        if (&hessian - hessian.transpose()).amax() > 1e-12 * scale {
            return Err(Error::Input("quadratic hessian must be symmetric".into()));
        }
        if hessian.iter().chain(linear.iter()).any(|v| !v.is_finite()) || !constant.is_finite() {
            return Err(Error::Input("quadratic coefficients must be finite".into()));
        }
        Ok(Self {
            hessian,
            linear,
            constant,
        })
    }

    /// Affine function `bᵀx + c0`.
    pub fn affine(linear: DVector<f64>, constant: f64) -> Self {
        let n = linear.len();
        Self {
            hessian: DMatrix::zeros(n, n),
            linear,
            constant,
        }
    }

    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    pub fn hessian(&self) -> &DMatrix<f64> {
        &self.hessian
    }

    pub fn linear(&self) -> &DVector<f64> {
        &self.linear
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.hessian * x)) + self.linear.dot(x) + self.constant
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.hessian * x + &self.linear
    }

    /// Forward rounding bound of [`value`](Self::value):
    /// `(n + 2) ε (½|x|ᵀ|A||x| + |b|ᵀ|x| + |c0|)`.
    pub fn rounding_error(&self, x: &DVector<f64>) -> f64 {
        let ax = x.abs();
        let magnitude = 0.5 * ax.dot(&(self.hessian.abs() * &ax))
            + self.linear.abs().dot(&ax)
            + self.constant.abs();
        (self.dim() + 2) as f64 * f64::EPSILON * magnitude
    }

    /// Coefficients `(a2, a1, a0)` of `t ↦ f(x with x_i = t) = a2 t² + a1 t + a0`.
    fn along(&self, x: &DVector<f64>, i: usize) -> (f64, f64, f64) {
        let aii = self.hessian[(i, i)];
        // gradient component at x, then shift to the t-polynomial
        let gi = (self.hessian.row(i) * x)[0] + self.linear[i];
        let fx = self.value(x);
        let xi = x[i];
        // f(t) = fx + gi (t - xi) + ½ aii (t - xi)²
        let a2 = 0.5 * aii;
        let a1 = gi - aii * xi;
        let a0 = fx - gi * xi + 0.5 * aii * xi * xi;
        (a2, a1, a0)
    }
}

/// A smooth objective given by closures.
#[derive(Clone)]
pub struct SmoothObjective {
    dim: usize,
    value: ValueFn,
    gradient: GradientFn,
    hessian: Option<HessianFn>,
}

impl fmt::Debug for SmoothObjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothObjective")
            .field("dim", &self.dim)
            .field("has_hessian", &self.hessian.is_some())
            .finish()
    }
}

impl SmoothObjective {
    /// Builds the objective and checks the gradient against central
    /// differences of the value at 10 seeded points in `[-1, 1]^n`.
    pub fn new(
        dim: usize,
        value: ValueFn,
        gradient: GradientFn,
        hessian: Option<HessianFn>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Input("objective dimension must be positive".into()));
        }
        let obj = Self {
            dim,
            value,
            gradient,
            hessian,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let h = 1e-6;
        for _ in 0..10 {
            let x = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));
            let g = (obj.gradient)(&x);
            if g.len() != dim {
                return Err(Error::Input(format!(
                    "gradient has length {} but the dimension is {dim}",
                    g.len()
                )));
            }
            for i in 0..dim {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let fd = ((obj.value)(&xp) - (obj.value)(&xm)) / (2.0 * h);
                if (fd - g[i]).abs() > 1e-5 * (1.0 + g[i].abs()) {
                    return Err(Error::Input(format!(
                        "gradient component {i} disagrees with finite differences ({} vs {fd})",
                        g[i]
                    )));
                }
            }
        }
        Ok(obj)
    }
}

/// Pointwise maximum of quadratic pieces; nondifferentiable where pieces tie.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxOfQuadratics {
    pieces: Vec<QuadraticObjective>,
}

impl MaxOfQuadratics {
    pub fn new(pieces: Vec<QuadraticObjective>) -> Result<Self> {
        let Some(first) = pieces.first() else {
            return Err(Error::Input(
                "a max function needs at least one piece".into(),
            ));
        };
        let n = first.dim();
        if pieces.iter().any(|p| p.dim() != n) {
            return Err(Error::Input("all pieces must share a dimension".into()));
        }
        Ok(Self { pieces })
    }

    pub fn pieces(&self) -> &[QuadraticObjective] {
        &self.pieces
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        self.pieces
            .iter()
            .map(|p| p.value(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Indices of the pieces attaining the maximum within a relative tolerance.
    pub fn active_pieces(&self, x: &DVector<f64>, tol: f64) -> Vec<usize> {
        let values: Vec<f64> = self.pieces.iter().map(|p| p.value(x)).collect();
        let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let slack = tol * (1.0 + top.abs());
        values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v >= top - slack)
            .map(|(i, _)| i)
            .collect()
    }

    /// Index of the active piece; ties go to the lowest index.
    pub fn active_piece(&self, x: &DVector<f64>) -> usize {
        let mut best = 0;
        let mut top = f64::NEG_INFINITY;
        for (i, p) in self.pieces.iter().enumerate() {
            let v = p.value(x);
            if v > top {
                top = v;
                best = i;
            }
        }
        best
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.pieces[self.active_piece(x)].gradient(x)
    }

    /// Abscissae in `(lo, hi)` where the active piece changes along coordinate `i`.
    pub fn kinks_along(&self, x: &DVector<f64>, i: usize, lo: f64, hi: f64) -> Vec<f64> {
        let polys: Vec<(f64, f64, f64)> = self.pieces.iter().map(|p| p.along(x, i)).collect();
        kinks_of_max(&polys, lo, hi)
    }
}

fn eval_poly(p: (f64, f64, f64), t: f64) -> f64 {
    (p.0 * t + p.1) * t + p.2
}

fn argmax_at(polys: &[(f64, f64, f64)], t: f64) -> usize {
    let mut best = 0;
    let mut top = f64::NEG_INFINITY;
    for (i, p) in polys.iter().enumerate() {
        let v = eval_poly(*p, t);
        if v > top {
            top = v;
            best = i;
        }
    }
    best
}

/// Real roots of `a t² + b t + c` (degenerate cases included).
fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return Vec::new();
    }
    if a.abs() <= 1e-14 * scale {
        if b.abs() <= 1e-14 * scale {
            return Vec::new();
        }
        return vec![-c / b];
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    // stable form
    let q = -0.5 * (b + b.signum() * sq);
    let mut roots = Vec::with_capacity(2);
    if q != 0.0 {
        roots.push(q / a);
        roots.push(c / q);
    } else {
        roots.push(0.0);
    }
    roots
}

fn kinks_of_max(polys: &[(f64, f64, f64)], lo: f64, hi: f64) -> Vec<f64> {
    let mut candidates = Vec::new();
    for a in 0..polys.len() {
        for b in a + 1..polys.len() {
            let (pa, pb) = (polys[a], polys[b]);
            for r in quadratic_roots(pa.0 - pb.0, pa.1 - pb.1, pa.2 - pb.2) {
                if r > lo && r < hi {
                    candidates.push(r);
                }
            }
        }
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + a.abs()));
    // keep only candidates where the active piece actually changes
    let mut kinks = Vec::new();
    let mut edges = Vec::with_capacity(candidates.len() + 2);
    edges.push(lo);
    edges.extend_from_slice(&candidates);
    edges.push(hi);
    for (k, &cand) in candidates.iter().enumerate() {
        let left = argmax_at(polys, 0.5 * (edges[k] + cand));
        let right = argmax_at(polys, 0.5 * (cand + edges[k + 2]));
        if left != right {
            kinks.push(cand);
        }
    }
    kinks
}

/// Structural category of an objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveKind {
    Quadratic,
    Smooth,
    PiecewiseSmooth,
}

/// One objective `f_j` of a multi-objective problem.
#[derive(Debug, Clone)]
pub enum ObjectiveModel {
    Quadratic(QuadraticObjective),
    Smooth(SmoothObjective),
    PiecewiseMax(MaxOfQuadratics),
}

impl From<QuadraticObjective> for ObjectiveModel {
    fn from(q: QuadraticObjective) -> Self {
        Self::Quadratic(q)
    }
}

impl From<SmoothObjective> for ObjectiveModel {
    fn from(s: SmoothObjective) -> Self {
        Self::Smooth(s)
    }
}

impl From<MaxOfQuadratics> for ObjectiveModel {
    fn from(m: MaxOfQuadratics) -> Self {
        Self::PiecewiseMax(m)
    }
}

impl ObjectiveModel {
    pub fn dim(&self) -> usize {
        match self {
            Self::Quadratic(q) => q.dim(),
            Self::Smooth(s) => s.dim,
            Self::PiecewiseMax(m) => m.pieces[0].dim(),
        }
    }

    pub fn kind(&self) -> ObjectiveKind {
        match self {
            Self::Quadratic(_) => ObjectiveKind::Quadratic,
            Self::Smooth(_) => ObjectiveKind::Smooth,
            Self::PiecewiseMax(_) => ObjectiveKind::PiecewiseSmooth,
        }
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        match self {
            Self::Quadratic(q) => q.value(x),
            Self::Smooth(s) => (s.value)(x),
            Self::PiecewiseMax(m) => m.value(x),
        }
    }

    /// Classical gradient; for max functions, the gradient of the active piece.
    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            Self::Quadratic(q) => q.gradient(x),
            Self::Smooth(s) => (s.gradient)(x),
            Self::PiecewiseMax(m) => m.gradient(x),
        }
    }

    /// Bound on the rounding error of [`value`](Self::value) at `x`. Closure
    /// objectives report a few ulps of `|f(x)|`.
    pub fn rounding_error(&self, x: &DVector<f64>) -> f64 {
        match self {
            Self::Quadratic(q) => q.rounding_error(x),
            Self::Smooth(s) => 4.0 * f64::EPSILON * (s.value)(x).abs(),
            Self::PiecewiseMax(m) => m
                .pieces
                .iter()
                .map(|p| p.rounding_error(x))
                .fold(0.0, f64::max),
        }
    }

    pub fn hessian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        match self {
            Self::Quadratic(q) => Some(q.hessian.clone()),
            Self::Smooth(s) => s.hessian.as_ref().map(|h| h(x)),
            Self::PiecewiseMax(m) => Some(m.pieces[m.active_piece(x)].hessian.clone()),
        }
    }

    /// The Hessian when it does not depend on `x`.
    pub fn constant_hessian(&self) -> Option<&DMatrix<f64>> {
        match self {
            Self::Quadratic(q) => Some(&q.hessian),
            _ => None,
        }
    }

    /// Restriction `t ↦ f(x with coordinate i replaced by t)`.
    pub fn line(&self, x: &DVector<f64>, coord: usize) -> CoordinateLine<'_> {
        assert!(coord < self.dim(), "coordinate out of range");
        let kind = match self {
            Self::Quadratic(q) => LineKind::Poly(vec![q.along(x, coord)]),
            Self::PiecewiseMax(m) => {
                LineKind::Poly(m.pieces.iter().map(|p| p.along(x, coord)).collect())
            }
            Self::Smooth(_) => LineKind::Closure,
        };
        CoordinateLine {
            model: self,
            base: x.clone(),
            coord,
            kind,
        }
    }
}

enum LineKind {
    /// max over univariate quadratics `(a2, a1, a0)`
    Poly(Vec<(f64, f64, f64)>),
    Closure,
}

/// A coordinate restriction of an [`ObjectiveModel`].
pub struct CoordinateLine<'a> {
    model: &'a ObjectiveModel,
    base: DVector<f64>,
    coord: usize,
    kind: LineKind,
}

impl CoordinateLine<'_> {
    fn at(&self, t: f64) -> DVector<f64> {
        let mut x = self.base.clone();
        x[self.coord] = t;
        x
    }

    /// Right-sided derivatives `(f', f'')` of the active quadratic piece.
    fn poly_right(polys: &[(f64, f64, f64)], t: f64) -> (f64, f64) {
        let values: Vec<f64> = polys.iter().map(|p| eval_poly(*p, t)).collect();
        let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let slack = 1e-13 * (1.0 + top.abs());
        let mut best: Option<(f64, f64)> = None;
        for (p, v) in polys.iter().zip(&values) {
            if *v >= top - slack {
                let d1 = 2.0 * p.0 * t + p.1;
                let d2 = 2.0 * p.0;
                best = match best {
                    Some((b1, b2)) if b1 > d1 || (b1 == d1 && b2 >= d2) => Some((b1, b2)),
                    _ => Some((d1, d2)),
                };
            }
        }
        best.expect("at least one piece")
    }
}

impl LineFunction for CoordinateLine<'_> {
    fn derivative(&self, order: u32, t: f64) -> f64 {
        match &self.kind {
            LineKind::Poly(polys) => {
                let (d1, d2) = Self::poly_right(polys, t);
                match order {
                    1 => d1,
                    2 => d2,
                    _ => panic!("only first and second derivatives are available"),
                }
            }
            LineKind::Closure => {
                let ObjectiveModel::Smooth(s) = self.model else {
                    unreachable!()
                };
                match order {
                    1 => (s.gradient)(&self.at(t))[self.coord],
                    2 => match &s.hessian {
                        Some(h) => h(&self.at(t))[(self.coord, self.coord)],
                        None => {
                            let h = 1e-5;
                            let gp = (s.gradient)(&self.at(t + h))[self.coord];
                            let gm = (s.gradient)(&self.at(t - h))[self.coord];
                            (gp - gm) / (2.0 * h)
                        }
                    },
                    _ => panic!("only first and second derivatives are available"),
                }
            }
        }
    }

    fn rounding(&self, order: u32, t: f64) -> f64 {
        match (&self.kind, order) {
            // 2·a2·t + a1 in two roundings; f'' is exact
            (LineKind::Poly(polys), 1) => polys
                .iter()
                .map(|p| 2.0 * f64::EPSILON * (2.0 * (p.0 * t).abs() + p.1.abs()))
                .fold(0.0, f64::max),
            _ => 0.0,
        }
    }

    fn kinks(&self, lo: f64, hi: f64) -> Vec<f64> {
        match &self.kind {
            LineKind::Poly(polys) if polys.len() > 1 => kinks_of_max(polys, lo, hi),
            _ => Vec::new(),
        }
    }

    fn slope_jump(&self, at: f64) -> f64 {
        match &self.kind {
            LineKind::Poly(polys) if polys.len() > 1 => {
                let values: Vec<f64> = polys.iter().map(|p| eval_poly(*p, at)).collect();
                let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let slack = 1e-9 * (1.0 + top.abs());
                let slopes = polys
                    .iter()
                    .zip(&values)
                    .filter(|(_, v)| **v >= top - slack)
                    .map(|(p, _)| 2.0 * p.0 * at + p.1);
                let (lo, hi) = slopes.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
                    (lo.min(s), hi.max(s))
                });
                hi - lo
            }
            _ => 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    fn example3() -> MaxOfQuadratics {
        let lin = QuadraticObjective::affine(dvector![5.0, 1.0], 0.0);
        let sq = QuadraticObjective::new(DMatrix::identity(2, 2) * 2.0, dvector![0.0, 0.0], 0.0)
            .unwrap();
        MaxOfQuadratics::new(vec![lin, sq]).unwrap()
    }

    #[test]
    fn quadratic_value_and_gradient() {
        let q = QuadraticObjective::new(dmatrix![8.0, -2.0; -2.0, 2.0], dvector![-3.0, 4.0], 0.0)
            .unwrap();
        let x = dvector![1.0, 2.0];
        // 4 + 4 - 4 - 3 + 8
        assert!((q.value(&x) - 9.0).abs() < 1e-14);
        assert_eq!(q.gradient(&x), dvector![1.0, 6.0]);
    }

    #[test]
    fn asymmetric_hessian_rejected() {
        let err = QuadraticObjective::new(dmatrix![1.0, 2.0; 0.0, 1.0], dvector![0.0, 0.0], 0.0);
        assert!(matches!(err, Err(Error::Input(_))));
    }

    #[test]
    fn smooth_objective_rejects_wrong_gradient() {
        let value: ValueFn = Arc::new(|x: &DVector<f64>| x.norm_squared());
        let good: GradientFn = Arc::new(|x: &DVector<f64>| 2.0 * x);
        let bad: GradientFn = Arc::new(|x: &DVector<f64>| 3.0 * x);
        assert!(SmoothObjective::new(3, value.clone(), good, None).is_ok());
        assert!(SmoothObjective::new(3, value, bad, None).is_err());
    }

    #[test]
    fn max_function_kinks_along_first_coordinate() {
        let f = example3();
        // at (3,3): 5t + 3 vs t² + 9 cross at t = 2 and t = 3
        let x = dvector![3.0, 3.0];
        let kinks = f.kinks_along(&x, 0, 0.0, 4.0);
        assert_eq!(kinks.len(), 2);
        assert!((kinks[0] - 2.0).abs() < 1e-12 && (kinks[1] - 3.0).abs() < 1e-12);
        let model = ObjectiveModel::from(f);
        let line = model.line(&x, 0);
        // between the kinks the linear piece is active
        assert_eq!(line.derivative(1, 2.5), 5.0);
        assert_eq!(line.derivative(1, 1.0), 2.0);
        // right slope 2*2 = 4 vs left ... at t = 2: linear 5, quadratic 4
        assert!((line.slope_jump(2.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn line_restriction_matches_gradient() {
        let q = QuadraticObjective::new(dmatrix![2.0, -2.0; -2.0, 8.0], dvector![-3.0, 4.0], 0.5)
            .unwrap();
        let model = ObjectiveModel::from(q.clone());
        let x = dvector![0.3, -1.2];
        for i in 0..2 {
            let line = model.line(&x, i);
            assert!((line.derivative(1, x[i]) - q.gradient(&x)[i]).abs() < 1e-13);
            assert_eq!(line.derivative(2, 7.0), q.hessian()[(i, i)]);
        }
    }
}
