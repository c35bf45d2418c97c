//! TOML experiment files. Keys mirror the algorithm's symbols (`sigma`, `r`,
//! `epsilon`); every validation message starts with the offending key.

use std::fmt;
use std::path::Path;

use aocfgd::fractional::gamma_alpha;
use aocfgd::lab::{example1, example2, example2_pair, example3, StartLayout};
use aocfgd::model::{instance_from_toml, random_quadratic_mop, ObjectiveModel, QuadraticMop};
use aocfgd::solver::{
    GradientRoute, Merit, MultiplierMode, SolverConfig, Stage, StageSchedule, StepRule,
    TerminalMode,
};
use nalgebra::DVector;
use serde::Deserialize;

/// Configuration problem; maps to exit status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn invalid(field: &str, message: impl fmt::Display) -> ConfigError {
    ConfigError(format!("{field}: {message}"))
}

/// A scalar broadcast to every coordinate, or an explicit vector.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Point {
    Fill(f64),
    Vector(Vec<f64>),
}

impl Point {
    fn resolve(&self, n: usize, field: &str) -> Result<DVector<f64>, ConfigError> {
        let v = match self {
            Self::Fill(x) => DVector::from_element(n, *x),
            Self::Vector(v) if v.len() == n => DVector::from_vec(v.clone()),
            Self::Vector(v) => {
                return Err(invalid(
                    field,
                    format!("expected {n} entries, got {}", v.len()),
                ))
            }
        };
        if v.iter().any(|x| !x.is_finite()) {
            return Err(invalid(field, "entries must be finite"));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub instance: Option<InstanceSection>,
    #[serde(default)]
    pub solver: SolverSection,
    pub schedule: Option<ScheduleSection>,
    #[serde(default)]
    pub experiment: ExperimentSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSection {
    /// `example1`, `example2`, `example3`, `example2_pair`, `random` or `file`.
    pub kind: String,
    pub n: Option<usize>,
    pub m_data: Option<usize>,
    pub objectives: Option<usize>,
    pub seed: Option<u64>,
    pub path: Option<String>,
    pub terminal: Option<Point>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub sigma: f64,
    pub r: f64,
    pub epsilon: f64,
    pub max_iterations: usize,
    /// `armijo` or `fixed`.
    pub step: String,
    pub eta: Option<f64>,
    /// `regularized` or `objective`.
    pub merit: String,
    /// `live`, `uniform` or `first_iteration`; ignored when `lambda` is set.
    pub multipliers: String,
    pub lambda: Option<Vec<f64>>,
    /// `auto` or `quadrature`.
    pub route: String,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self {
            sigma: d.sigma,
            r: d.backtrack,
            epsilon: d.tolerance,
            max_iterations: d.max_iterations,
            step: "armijo".into(),
            eta: None,
            merit: "regularized".into(),
            multipliers: "live".into(),
            lambda: None,
            route: "auto".into(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub alphas: Vec<f64>,
    pub gammas: Option<Vec<f64>>,
    pub betas: Option<Vec<f64>>,
    pub iterations: Vec<usize>,
    /// Adaptive terminal `c = x^(k−memory)` when set.
    pub memory: Option<usize>,
    pub terminal: Option<Point>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    pub x0: Option<Point>,
    pub starts: usize,
    /// `segment` or `random`.
    pub layout: String,
    pub lb: Option<Point>,
    pub ub: Option<Point>,
    /// Regularizers of the comparison table.
    pub gammas: Vec<f64>,
    pub alpha: f64,
    /// Regularizer of the fixed-point rate check.
    pub gamma: f64,
    pub eta: f64,
    pub iterations: usize,
    /// Number of seeded instances in the theory checks.
    pub instances: usize,
    pub subgradient_steps: usize,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            x0: None,
            starts: 100,
            layout: "segment".into(),
            lb: None,
            ub: None,
            gammas: vec![0.15, 0.25, 0.5, 0.75, 1.0, 10.0],
            alpha: 0.5,
            gamma: 0.1,
            eta: 1.0,
            iterations: 20_000,
            instances: 20,
            subgradient_steps: 1000,
        }
    }
}

/// Objectives of the configured instance; `mop` is set for data-driven
/// quadratic instances.
#[derive(Debug, Clone)]
pub struct Problem {
    pub objectives: Vec<ObjectiveModel>,
    pub mop: Option<QuadraticMop>,
    pub terminal: DVector<f64>,
    pub label: String,
}

impl Problem {
    pub fn dim(&self) -> usize {
        self.terminal.len()
    }
}

pub fn load(path: &Path) -> Result<FileConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|e| ConfigError(format!("{}: {}", path.display(), e.0)))
}

pub fn parse(text: &str) -> Result<FileConfig, ConfigError> {
    let cfg: FileConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
    cfg.solver()?;
    if cfg.schedule.is_some() {
        let n = match cfg.problem(None, None) {
            Ok(p) => p.dim(),
            Err(_) => 1,
        };
        cfg.schedule(n, None)?;
    }
    Ok(cfg)
}

impl FileConfig {
    pub fn solver(&self) -> Result<SolverConfig, ConfigError> {
        let s = &self.solver;
        let step = match s.step.as_str() {
            "armijo" => StepRule::Backtracking,
            "fixed" => StepRule::Fixed {
                eta: s
                    .eta
                    .ok_or_else(|| invalid("solver.eta", "required when step = \"fixed\""))?,
            },
            other => return Err(invalid("solver.step", format!("unknown rule {other:?}"))),
        };
        let merit = match s.merit.as_str() {
            "regularized" => Merit::Regularized,
            "objective" => Merit::Objective,
            other => return Err(invalid("solver.merit", format!("unknown merit {other:?}"))),
        };
        let multipliers = match (&s.lambda, s.multipliers.as_str()) {
            (Some(l), _) => MultiplierMode::Fixed(l.clone()),
            (None, "live") => MultiplierMode::Live,
            (None, "uniform") => MultiplierMode::Uniform,
            (None, "first_iteration") => MultiplierMode::FirstIteration,
            (None, other) => {
                return Err(invalid(
                    "solver.multipliers",
                    format!("unknown mode {other:?}"),
                ))
            }
        };
        let route = match s.route.as_str() {
            "auto" => GradientRoute::Auto,
            "quadrature" => GradientRoute::Quadrature,
            other => return Err(invalid("solver.route", format!("unknown route {other:?}"))),
        };
        let cfg = SolverConfig {
            sigma: s.sigma,
            backtrack: s.r,
            tolerance: s.epsilon,
            max_iterations: s.max_iterations,
            step,
            merit,
            multipliers,
            route,
        };
        cfg.validate().map_err(|e| {
            let msg = e.to_string();
            let field = if msg.contains("sigma") {
                "solver.sigma"
            } else if msg.contains("backtrack") {
                "solver.r"
            } else if msg.contains("tolerance") {
                "solver.epsilon"
            } else if msg.contains("max_iterations") {
                "solver.max_iterations"
            } else if msg.contains("eta") {
                "solver.eta"
            } else {
                "solver.lambda"
            };
            invalid(field, msg)
        })?;
        Ok(cfg)
    }

    /// The configured instance; `seed` overrides `instance.seed`.
    pub fn problem(&self, seed: Option<u64>, base: Option<&Path>) -> Result<Problem, ConfigError> {
        let inst = self
            .instance
            .as_ref()
            .ok_or_else(|| invalid("instance", "section is required for this command"))?;
        let fixed =
            |objectives: Vec<ObjectiveModel>, label: &str| -> Result<Problem, ConfigError> {
                let n = objectives[0].dim();
                let terminal = match &inst.terminal {
                    Some(p) => p.resolve(n, "instance.terminal")?,
                    None => DVector::zeros(n),
                };
                Ok(Problem {
                    objectives,
                    mop: None,
                    terminal,
                    label: label.into(),
                })
            };
        let with_terminal = |mop: QuadraticMop| -> Result<QuadraticMop, ConfigError> {
            match &inst.terminal {
                Some(p) => {
                    let c = p.resolve(mop.dim(), "instance.terminal")?;
                    mop.with_terminal(c)
                        .map_err(|e| invalid("instance.terminal", e))
                }
                None => Ok(mop),
            }
        };
        let mop = match inst.kind.as_str() {
            "example1" => return fixed(vec![example1().into()], "example1"),
            "example2" => return fixed(vec![example2().into()], "example2"),
            "example3" => return fixed(vec![example3().into()], "example3"),
            "example2_pair" => return fixed(example2_pair(), "example2_pair"),
            "random" => {
                let n = inst
                    .n
                    .ok_or_else(|| invalid("instance.n", "required for kind = \"random\""))?;
                let m_data = inst.m_data.unwrap_or(n);
                let m = inst.objectives.unwrap_or(2);
                let seed = seed.or(inst.seed).unwrap_or(0);
                let mop = random_quadratic_mop(n, m_data, m, seed).map_err(|e| {
                    let field = if n == 0 {
                        "instance.n"
                    } else if m_data == 0 {
                        "instance.m_data"
                    } else {
                        "instance.objectives"
                    };
                    invalid(field, e)
                })?;
                with_terminal(mop)?
            }
            "file" => {
                let rel = inst
                    .path
                    .as_ref()
                    .ok_or_else(|| invalid("instance.path", "required for kind = \"file\""))?;
                let path = match base {
                    Some(dir) => dir.join(rel),
                    None => rel.into(),
                };
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| invalid("instance.path", format!("{}: {e}", path.display())))?;
                with_terminal(instance_from_toml(&text).map_err(|e| invalid("instance.path", e))?)?
            }
            other => return Err(invalid("instance.kind", format!("unknown kind {other:?}"))),
        };
        Ok(Problem {
            objectives: mop.objectives(),
            terminal: mop.terminal().clone(),
            label: format!("quadratic n={} m={}", mop.dim(), mop.num_objectives()),
            mop: Some(mop),
        })
    }

    /// Stage schedule in dimension `n`; the terminal defaults to the
    /// instance's.
    pub fn schedule(
        &self,
        n: usize,
        instance_terminal: Option<&DVector<f64>>,
    ) -> Result<StageSchedule, ConfigError> {
        let s = self
            .schedule
            .as_ref()
            .ok_or_else(|| invalid("schedule", "section is required for this command"))?;
        let k = s.alphas.len();
        if k == 0 {
            return Err(invalid("schedule.alphas", "at least one stage is required"));
        }
        if s.iterations.len() != k {
            return Err(invalid(
                "schedule.iterations",
                format!("expected {k} entries, got {}", s.iterations.len()),
            ));
        }
        let betas: Vec<f64> = match (&s.gammas, &s.betas) {
            (Some(_), Some(_)) => {
                return Err(invalid(
                    "schedule.betas",
                    "give either gammas or betas, not both",
                ))
            }
            (None, None) => return Err(invalid("schedule.gammas", "gammas or betas is required")),
            (Some(g), None) => {
                if g.len() != k {
                    return Err(invalid(
                        "schedule.gammas",
                        format!("expected {k} entries, got {}", g.len()),
                    ));
                }
                for (i, v) in g.iter().enumerate() {
                    if !(*v >= 0.0) {
                        return Err(invalid(
                            &format!("schedule.gammas[{i}]"),
                            format!("must be nonnegative, got {v}"),
                        ));
                    }
                }
                s.alphas
                    .iter()
                    .zip(g)
                    .map(|(a, g)| gamma_alpha(*a) + g)
                    .collect()
            }
            (None, Some(b)) => {
                if b.len() != k {
                    return Err(invalid(
                        "schedule.betas",
                        format!("expected {k} entries, got {}", b.len()),
                    ));
                }
                b.clone()
            }
        };
        let mut stages = Vec::with_capacity(k);
        for i in 0..k {
            let alpha = s.alphas[i];
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(invalid(
                    &format!("schedule.alphas[{i}]"),
                    format!("must lie in (0, 1], got {alpha}"),
                ));
            }
            if !(betas[i] >= gamma_alpha(alpha)) {
                return Err(invalid(
                    &format!("schedule.betas[{i}]"),
                    format!(
                        "beta {} is below (1-alpha)/(2-alpha) = {}",
                        betas[i],
                        gamma_alpha(alpha)
                    ),
                ));
            }
            if s.iterations[i] == 0 {
                return Err(invalid(
                    &format!("schedule.iterations[{i}]"),
                    "must be positive",
                ));
            }
            stages.push(Stage {
                alpha,
                beta: betas[i],
                iterations: s.iterations[i],
            });
        }
        let c = match (&s.terminal, instance_terminal) {
            (Some(p), _) => p.resolve(n, "schedule.terminal")?,
            (None, Some(c)) => c.clone(),
            (None, None) => DVector::zeros(n),
        };
        let terminal = match s.memory {
            Some(0) => return Err(invalid("schedule.memory", "must be positive")),
            Some(memory) => TerminalMode::Adaptive { memory, initial: c },
            None => TerminalMode::Fixed(c),
        };
        StageSchedule::new(stages, terminal).map_err(|e| invalid("schedule", e))
    }

    pub fn x0(&self, n: usize) -> Result<DVector<f64>, ConfigError> {
        self.experiment
            .x0
            .as_ref()
            .ok_or_else(|| invalid("experiment.x0", "a start point is required"))?
            .resolve(n, "experiment.x0")
    }

    /// Start layout for fronts; `seed` overrides the instance seed for
    /// random layouts.
    pub fn layout(&self, n: usize, seed: u64) -> Result<StartLayout, ConfigError> {
        let e = &self.experiment;
        let lb =
            e.lb.as_ref()
                .ok_or_else(|| invalid("experiment.lb", "required for fronts"))?
                .resolve(n, "experiment.lb")?;
        let ub =
            e.ub.as_ref()
                .ok_or_else(|| invalid("experiment.ub", "required for fronts"))?
                .resolve(n, "experiment.ub")?;
        if lb.iter().zip(ub.iter()).any(|(l, u)| !(l < u)) {
            return Err(invalid(
                "experiment.ub",
                "must exceed experiment.lb componentwise",
            ));
        }
        if e.starts == 0 {
            return Err(invalid("experiment.starts", "must be positive"));
        }
        match e.layout.as_str() {
            "segment" => Ok(StartLayout::Segment { lb, ub }),
            "random" => Ok(StartLayout::Random { lb, ub, seed }),
            other => Err(invalid(
                "experiment.layout",
                format!("unknown layout {other:?}"),
            )),
        }
    }

    pub fn instance_seed(&self) -> u64 {
        self.instance.as_ref().and_then(|i| i.seed).unwrap_or(0)
    }
}
