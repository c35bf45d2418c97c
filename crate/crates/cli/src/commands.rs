use std::fmt::Write as _;

use anyhow::Result;
use aocfgd::fractional::{gamma_alpha, FractionalConfig};
use aocfgd::lab::{
    adrs, comparison_table, comparison_to_csv, example1_report, example2_run, example3_report,
    front_to_csv, nondominated, pareto_sweep, start_points, three_stage_schedule,
    verify_rate_theorem5, verify_staged_theorem6, FrontPoint, Method, ParetoFront,
};
use aocfgd::model::random_quadratic_mop;
use aocfgd::solver::{run_adaptive_with, IterationTrace, MultiplierMode, StepRule, Termination};
use nalgebra::DVector;
use serde_json::{json, Map, Value};

use crate::config::{ConfigError, FileConfig};
use crate::output::RunWriter;
use crate::plot::{script, Figure};

/// Result of a command: named checks and the summary body.
pub struct Outcome {
    pub checks: Vec<(String, bool)>,
    pub summary: Map<String, Value>,
}

impl Outcome {
    fn new() -> Self {
        Self {
            checks: Vec::new(),
            summary: Map::new(),
        }
    }

    fn check(&mut self, name: impl Into<String>, pass: bool) {
        self.checks.push((name.into(), pass));
    }

    fn set(&mut self, key: &str, value: Value) {
        self.summary.insert(key.into(), value);
    }

    pub fn failures(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|(_, p)| !p)
            .map(|(n, _)| n.clone())
            .collect()
    }
}

pub struct Context<'a> {
    pub config: &'a FileConfig,
    pub config_dir: Option<&'a std::path::Path>,
    pub seed: Option<u64>,
    pub verbose: bool,
}

impl Context<'_> {
    fn log(&self, message: impl AsRef<str>) {
        if self.verbose {
            eprintln!("{}", message.as_ref());
        }
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or_else(|| self.config.instance_seed())
    }
}

fn vector(v: &DVector<f64>) -> Value {
    json!(v.as_slice())
}

fn trace_summary(trace: &IterationTrace) -> Value {
    let mut m = Map::new();
    m.insert("termination".into(), json!(trace.termination.label()));
    if let Termination::Error(e) = &trace.termination {
        m.insert("error".into(), json!(e));
    }
    if let Some(last) = trace.records.last() {
        m.insert("iterations".into(), json!(trace.iterations()));
        m.insert("final_x".into(), vector(&last.x));
        m.insert("final_values".into(), json!(last.values));
        m.insert("final_norm_d".into(), json!(last.norm_d));
    }
    if !trace.warnings.is_empty() {
        m.insert("warnings".into(), json!(trace.warnings));
    }
    Value::Object(m)
}

fn terminated_cleanly(trace: &IterationTrace) -> bool {
    !matches!(trace.termination, Termination::Error(_))
}

pub fn solve(ctx: &Context, out: &mut RunWriter) -> Result<Outcome> {
    let cfg = ctx.config;
    let problem = cfg.problem(ctx.seed, ctx.config_dir)?;
    let solver = cfg.solver()?;
    let schedule = cfg.schedule(problem.dim(), Some(&problem.terminal))?;
    let x0 = cfg.x0(problem.dim())?;
    ctx.log(format!("solve: {} from {:?}", problem.label, x0.as_slice()));
    let trace = run_adaptive_with(
        &problem.objectives,
        problem.mop.as_ref(),
        &x0,
        &solver,
        &schedule,
    );
    ctx.log(format!(
        "solve: {} after {} steps",
        trace.termination.label(),
        trace.iterations()
    ));
    out.add("trace.csv", trace.to_csv());
    out.add(
        "plot.py",
        script(&[Figure::Trace {
            file: "trace.csv",
            title: &problem.label,
        }]),
    );

    let mut outcome = Outcome::new();
    outcome.set("instance", json!(problem.label));
    outcome.set("run", trace_summary(&trace));
    let stages: Vec<Value> = trace
        .stages
        .iter()
        .map(|s| json!({"alpha": s.alpha, "beta": s.beta, "gamma": s.gamma, "iterations": s.iterations, "converged": s.converged}))
        .collect();
    outcome.set("stages", json!(stages));
    outcome.check("run terminated without error", terminated_cleanly(&trace));
    Ok(outcome)
}

fn front_summary(front: &ParetoFront) -> Value {
    json!({
        "points": front.points.len(),
        "converged_runs": front.candidates.len(),
        "failures": front.failures.iter().map(|(i, r)| json!({"start": i, "reason": r})).collect::<Vec<_>>(),
    })
}

pub fn pareto(ctx: &Context, out: &mut RunWriter) -> Result<Outcome> {
    let cfg = ctx.config;
    let problem = cfg.problem(ctx.seed, ctx.config_dir)?;
    if problem.objectives.len() < 2 {
        return Err(ConfigError("instance: a front needs at least two objectives".into()).into());
    }
    let solver = cfg.solver()?;
    let schedule = cfg.schedule(problem.dim(), Some(&problem.terminal))?;
    let layout = cfg.layout(problem.dim(), ctx.seed())?;
    let starts = start_points(&layout, cfg.experiment.starts)?;
    ctx.log(format!(
        "pareto: {} starts on {}",
        starts.len(),
        problem.label
    ));

    let fractional = pareto_sweep(
        &problem.objectives,
        problem.mop.as_ref(),
        &Method::Moaocfgd(schedule),
        &solver,
        &starts,
    );
    ctx.log(format!(
        "pareto: fractional front has {} points",
        fractional.points.len()
    ));
    let classical = pareto_sweep(
        &problem.objectives,
        problem.mop.as_ref(),
        &Method::Mogd,
        &solver,
        &starts,
    );
    ctx.log(format!(
        "pareto: classical front has {} points",
        classical.points.len()
    ));

    // Reference: nondominated union of both fronts.
    let union: Vec<FrontPoint> = fractional
        .points
        .iter()
        .chain(&classical.points)
        .cloned()
        .collect();
    let reference: Vec<Vec<f64>> = nondominated(&union).into_iter().map(|p| p.values).collect();
    let values = |f: &ParetoFront| {
        f.points
            .iter()
            .map(|p| p.values.clone())
            .collect::<Vec<_>>()
    };
    let score = |f: &ParetoFront| -> Value {
        if reference.is_empty() {
            Value::Null
        } else {
            json!(adrs(&values(f), &reference).unwrap_or(f64::INFINITY))
        }
    };

    out.add("front_moaocfgd.csv", front_to_csv(&fractional));
    out.add("front_mogd.csv", front_to_csv(&classical));
    let files = ["front_moaocfgd.csv", "front_mogd.csv"];
    out.add("plot.py", script(&[Figure::Fronts { files: &files }]));

    let mut outcome = Outcome::new();
    outcome.set("instance", json!(problem.label));
    outcome.set("starts", json!(starts.len()));
    outcome.set("moaocfgd", front_summary(&fractional));
    outcome.set("mogd", front_summary(&classical));
    outcome.set(
        "adrs",
        json!({
            "reference": "nondominated union of both fronts",
            "normalization": "per-objective range of the reference set, Chebyshev distance",
            "moaocfgd": score(&fractional),
            "mogd": score(&classical),
        }),
    );
    let errored = |f: &ParetoFront| f.failures.iter().filter(|(_, r)| r == "error").count();
    outcome.check(
        "fractional runs terminated without error",
        errored(&fractional) == 0,
    );
    outcome.check(
        "classical runs terminated without error",
        errored(&classical) == 0,
    );
    Ok(outcome)
}

pub fn compare(ctx: &Context, out: &mut RunWriter) -> Result<Outcome> {
    let cfg = ctx.config;
    let problem = cfg.problem(ctx.seed, ctx.config_dir)?;
    let Some(mop) = &problem.mop else {
        return Err(ConfigError(
            "instance.kind: the comparison needs a data-driven quadratic instance (random or file)"
                .into(),
        )
        .into());
    };
    let e = &cfg.experiment;
    if e.gammas.is_empty() || e.gammas.iter().any(|g| !(*g >= 0.0)) {
        return Err(ConfigError("experiment.gammas: needs nonnegative values".into()).into());
    }
    if !(e.alpha > 0.0 && e.alpha < 1.0) {
        return Err(ConfigError(format!(
            "experiment.alpha: must lie in (0, 1), got {}",
            e.alpha
        ))
        .into());
    }
    let solver = cfg.solver()?;
    let x0 = cfg.x0(problem.dim())?;
    ctx.log(format!(
        "compare: {} regularizers on {}",
        e.gammas.len(),
        problem.label
    ));
    let rows = comparison_table(mop, &e.gammas, &solver, &x0, e.alpha)?;
    out.add("comparison.csv", comparison_to_csv(&rows));
    out.add(
        "plot.py",
        script(&[Figure::Comparison {
            file: "comparison.csv",
        }]),
    );

    let mut outcome = Outcome::new();
    outcome.set("instance", json!(problem.label));
    outcome.set(
        "rows",
        json!(rows
            .iter()
            .map(|r| json!({
                "gamma": r.gamma,
                "method": r.method.label(),
                "iterations": r.iterations,
                "termination": r.termination.label(),
                "final_error": r.final_error,
            }))
            .collect::<Vec<_>>()),
    );
    outcome.check(
        "comparison runs terminated without error",
        rows.iter()
            .all(|r| !matches!(r.termination, Termination::Error(_))),
    );
    Ok(outcome)
}

fn instance_dims(cfg: &FileConfig) -> Result<(usize, usize, usize), ConfigError> {
    let inst = cfg
        .instance
        .as_ref()
        .ok_or_else(|| ConfigError("instance: section is required for this command".into()))?;
    if inst.kind != "random" {
        return Err(ConfigError(
            "instance.kind: theory checks run on seeded random instances".into(),
        ));
    }
    let n = inst
        .n
        .ok_or_else(|| ConfigError("instance.n: required for kind = \"random\"".into()))?;
    Ok((n, inst.m_data.unwrap_or(n), inst.objectives.unwrap_or(2)))
}

fn frozen_multipliers(mode: &MultiplierMode, m: usize) -> Result<Vec<f64>, ConfigError> {
    match mode {
        MultiplierMode::Fixed(l) if l.len() == m => Ok(l.clone()),
        MultiplierMode::Fixed(_) => {
            Err(ConfigError(format!("solver.lambda: expected {m} entries")))
        }
        MultiplierMode::Uniform => Ok(vec![1.0 / m as f64; m]),
        _ => Err(ConfigError(
            "solver.multipliers: theory checks need frozen multipliers (uniform or lambda)".into(),
        )),
    }
}

pub fn verify_t5(ctx: &Context, out: &mut RunWriter) -> Result<Outcome> {
    let cfg = ctx.config;
    let (n, m_data, m) = instance_dims(cfg)?;
    let e = &cfg.experiment;
    if e.instances == 0 {
        return Err(ConfigError("experiment.instances: must be positive".into()).into());
    }
    if !(e.gamma >= 0.0) {
        return Err(ConfigError("experiment.gamma: must be nonnegative".into()).into());
    }
    let lambda = frozen_multipliers(&cfg.solver()?.multipliers, m)?;
    let terminal = match &cfg.instance.as_ref().and_then(|i| i.terminal.clone()) {
        Some(_) => cfg.problem(Some(0), ctx.config_dir)?.terminal,
        None => DVector::zeros(n),
    };
    let frac = FractionalConfig::new(e.alpha, gamma_alpha(e.alpha) + e.gamma, terminal)
        .map_err(|err| ConfigError(format!("experiment.alpha: {err}")))?;
    let x0 = cfg.x0(n)?;

    let mut summary_csv = String::from("seed,predicted_rate,fitted_rate,ratio_cv,ratios_used,fixed_point_error,monotone,violation,pass\n");
    let mut errors_csv = String::from("seed,k,error\n");
    let mut outcome = Outcome::new();
    let base = ctx.seed();
    for seed in base..base + e.instances as u64 {
        let mop = random_quadratic_mop(n, m_data, m, seed)?;
        let rep = verify_rate_theorem5(&mop, &frac, e.eta, &lambda, &x0, e.iterations)?;
        let pass = rep.passes(1e-6, 0.05);
        ctx.log(format!(
            "verify-t5: seed {seed} rate {:.6} cv {:.2e} error {:.2e}",
            rep.fitted_rate, rep.ratio_cv, rep.fixed_point_error
        ));
        let _ = writeln!(
            summary_csv,
            "{seed},{},{},{},{},{},{},{},{}",
            rep.predicted_rate,
            rep.fitted_rate,
            rep.ratio_cv,
            rep.ratios_used,
            rep.fixed_point_error,
            rep.monotone,
            rep.violation.map_or(String::new(), |k| k.to_string()),
            pass
        );
        for (k, err) in rep.errors.iter().enumerate() {
            let _ = writeln!(errors_csv, "{seed},{k},{err}");
        }
        outcome.check(format!("fixed-point rate, seed {seed}"), pass);
    }
    out.add("t5_summary.csv", summary_csv);
    out.add("t5_errors.csv", errors_csv);
    out.add(
        "plot.py",
        script(&[Figure::Errors {
            file: "t5_errors.csv",
        }]),
    );
    outcome.set(
        "criteria",
        json!({"fixed_point_tolerance": 1e-6, "ratio_cv_limit": 0.05, "window": "last 100 ratios above the round-off floor"}),
    );
    Ok(outcome)
}

pub fn verify_t6(ctx: &Context, out: &mut RunWriter) -> Result<Outcome> {
    let cfg = ctx.config;
    let (n, m_data, m) = instance_dims(cfg)?;
    let e = &cfg.experiment;
    if e.instances == 0 {
        return Err(ConfigError("experiment.instances: must be positive".into()).into());
    }
    let solver = cfg.solver()?;
    if !matches!(solver.step, StepRule::Fixed { .. }) {
        return Err(
            ConfigError("solver.step: the staged bound needs step = \"fixed\"".into()).into(),
        );
    }
    frozen_multipliers(&solver.multipliers, m)?;
    let probe = cfg.problem(Some(0), ctx.config_dir)?;
    let schedule = cfg.schedule(n, Some(&probe.terminal))?;
    let x0 = cfg.x0(n)?;

    let mut stages_csv =
        String::from("seed,stage,gamma,iterations,r,epsilon,end_error,e,lipschitz_bound\n");
    let mut summary_csv = String::from(
        "seed,b_max,c_const,final_gamma,final_error,bound,recursion_ok,lipschitz_ok,final_ok\n",
    );
    let mut outcome = Outcome::new();
    let base = ctx.seed();
    for seed in base..base + e.instances as u64 {
        let mut mop = random_quadratic_mop(n, m_data, m, seed)?;
        if let Some(inst) = &cfg.instance {
            if inst.terminal.is_some() {
                mop = mop.with_terminal(probe.terminal.clone())?;
            }
        }
        let rep = verify_staged_theorem6(&mop, &schedule, &solver, &x0)?;
        ctx.log(format!(
            "verify-t6: seed {seed} final error {:.2e} bound {:.2e}",
            rep.final_error, rep.bound
        ));
        for (s, st) in rep.stages.iter().enumerate() {
            let _ = writeln!(
                stages_csv,
                "{seed},{s},{},{},{},{},{},{},{}",
                st.gamma, st.iterations, st.r, st.epsilon, st.end_error, st.e, st.lipschitz_bound
            );
        }
        let _ = writeln!(
            summary_csv,
            "{seed},{},{},{},{},{},{},{},{}",
            rep.b_max,
            rep.c_const,
            rep.final_gamma,
            rep.final_error,
            rep.bound,
            rep.recursion_ok,
            rep.lipschitz_ok,
            rep.final_ok
        );
        outcome.check(format!("staged recursion, seed {seed}"), rep.recursion_ok);
        outcome.check(
            format!("final error within 1.1 C gamma, seed {seed}"),
            rep.final_ok,
        );
        outcome.check(
            format!("stage gap within C |gamma step|, seed {seed}"),
            rep.lipschitz_ok,
        );
    }
    out.add("t6_stages.csv", stages_csv);
    out.add("t6_summary.csv", summary_csv);
    out.add(
        "plot.py",
        script(&[Figure::Stages {
            file: "t6_stages.csv",
        }]),
    );
    outcome.set(
        "criteria",
        json!({"recursion_slack": 1e-8, "final_factor": 1.1}),
    );
    Ok(outcome)
}

pub fn fixtures(ctx: &Context, out: &mut RunWriter) -> Result<Outcome> {
    let solver = ctx.config.solver()?;
    let mut outcome = Outcome::new();
    let mut report = String::from("check,value,reference,pass\n");
    let mut row = |outcome: &mut Outcome, name: &str, value: f64, reference: f64, pass: bool| {
        let _ = writeln!(report, "{name},{value},{reference},{pass}");
        outcome.check(name, pass);
        println!(
            "{:<44} {:>14.8} {:>14.8}  {}",
            name,
            value,
            reference,
            if pass { "PASS" } else { "FAIL" }
        );
    };

    let e1 = example1_report(&solver)?;
    ctx.log("fixtures: example 1");
    row(
        &mut outcome,
        "example1 classical distance to root",
        (&e1.classical_found - &e1.classical_reference).norm(),
        1e-4,
        (&e1.classical_found - &e1.classical_reference).norm() <= 1e-4,
    );
    row(
        &mut outcome,
        "example1 classical value",
        e1.classical_value_found,
        -4.083333,
        (e1.classical_value_found + 4.083333).abs() <= 1e-4,
    );
    let separation = (&e1.fractional_point - &e1.classical_found).norm();
    row(
        &mut outcome,
        "example1 fractional point separation",
        separation,
        0.1,
        separation > 0.1 && e1.fractional_residual < 1e-8,
    );

    let schedule = three_stage_schedule([0.1, 0.01, 0.0], [50, 50, 100])?;
    let e2 = example2_run(&solver, &schedule);
    let f2 = e2.records.last().map_or(f64::NAN, |r| r.values[0]);
    row(
        &mut outcome,
        "example2 staged value",
        f2,
        -2.333,
        (f2 + 2.333).abs() <= 0.01,
    );
    out.add("example2_trace.csv", e2.to_csv());

    let schedule = three_stage_schedule([0.01, 0.01, 0.01], [50, 50, 100])?;
    let e3 = example3_report(&solver, &schedule, ctx.config.experiment.subgradient_steps);
    let f3 = e3.staged.records.last().map_or(f64::NAN, |r| r.values[0]);
    let x3 = e3.staged.records.last().map_or(f64::NAN, |r| r.x.norm());
    row(
        &mut outcome,
        "example3 staged value",
        f3,
        0.0,
        f3.abs() <= 1e-3 && x3 <= 1e-3,
    );
    let staged = e3.staged_iterations.map_or(f64::INFINITY, |k| k as f64);
    let sub = e3
        .subgradient_iterations
        .map_or(f64::INFINITY, |k| k as f64);
    row(
        &mut outcome,
        "example3 iterations staged vs subgradient",
        staged,
        sub,
        staged < sub,
    );
    out.add("example3_staged.csv", e3.staged.to_csv());
    out.add("example3_subgradient.csv", e3.subgradient.to_csv());

    out.add("fixtures.csv", report);
    out.add(
        "plot.py",
        script(&[
            Figure::Trace {
                file: "example2_trace.csv",
                title: "example 2",
            },
            Figure::Trace {
                file: "example3_staged.csv",
                title: "example 3, staged",
            },
            Figure::Trace {
                file: "example3_subgradient.csv",
                title: "example 3, subgradient",
            },
        ]),
    );
    outcome.set(
        "example1",
        json!({
            "classical_found": vector(&e1.classical_found),
            "classical_root": vector(&e1.classical_reference),
            "fractional_point": vector(&e1.fractional_point),
            "fractional_value": e1.fractional_value,
        }),
    );
    outcome.set("example2", trace_summary(&e2));
    outcome.set(
        "example3",
        json!({
            "staged": trace_summary(&e3.staged),
            "staged_iterations_to_1e-3": e3.staged_iterations,
            "subgradient_iterations_to_1e-3": e3.subgradient_iterations,
        }),
    );
    Ok(outcome)
}
