//! Experiments: analytic fixtures, baselines, theory checks, fronts and
//! comparison tables.

mod baselines;
mod compare;
mod fixtures;
mod pareto;
mod theory;

pub use baselines::{iterations_to_target, mogd_baseline, subgradient_baseline};
pub use compare::{comparison_table, comparison_to_csv, CompareMethod, ComparisonRow};
pub use fixtures::{
    example1, example1_report, example2, example2_pair, example2_run, example3, example3_report,
    fractional_critical_point, quadratic_minimizer, terminal_for_critical_point,
    three_stage_schedule, Example1Report, Example3Report,
};
pub use pareto::{
    adrs, dominates, front_to_csv, nondominated, pareto_sweep, start_points, FrontPoint, Method,
    ParetoFront, StartLayout,
};
pub use theory::{
    verify_rate_theorem5, verify_staged_theorem6, StageBound, Theorem5Report, Theorem6Report,
};
