//! One experiment per subcommand.

use std::path::Path;

use quasilin_core::convection_profile::{classify_growth, GrowthKind};
use quasilin_core::discretization::{norm, NormKind};
use quasilin_core::estimates::{estimate_sobolev_constant, smallness_threshold, verify_bounds, EstimateReport};
use quasilin_core::solver::{
    fixed_point_iterate, random_dirichlet_seeds, solve_newton, solve_with_lower_order, truncation_sweep,
    uniqueness_experiment, FixedPointOptions, NewtonOptions, SolveReport,
};
use quasilin_core::{Field, HSpec};

use crate::config::{Realized, ScenarioConfig};
use crate::report::{OutputDir, Summary};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Solve,
    Sweep,
    FixedPoint,
    Classify,
    Threshold,
    Verify,
    Uniqueness,
}

/// What a run produced. `Err` from [`run_scenario`] is reserved for runs that
/// could not complete; a finished run with a failed check is reported here.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub summary: Summary,
    /// Some bound row or the ball check failed.
    pub bound_violated: bool,
}

/// Validates, computes, writes `summary.txt` and the command's CSV files into `out`.
///
/// Non-convergence still writes all files before returning the error.
pub fn run_scenario(cmd: Command, cfg: &ScenarioConfig, base: &Path, out: &Path) -> Result<Outcome, CliError> {
    check_solver(cfg)?;
    let dir = OutputDir::prepare(out)?;
    let mut summary = Summary::default();
    summary.push("command", format!("{cmd:?}").to_lowercase());
    let result = match cmd {
        Command::Classify => classify(cfg, &mut summary),
        Command::Threshold => threshold(cfg, &mut summary),
        _ => {
            let realized = cfg.realize(base)?;
            match cmd {
                Command::Solve => solve(cfg, &realized, &dir, &mut summary, false),
                Command::Verify => solve(cfg, &realized, &dir, &mut summary, true),
                Command::Sweep => sweep(cfg, &realized, &dir, &mut summary),
                Command::FixedPoint => fixed_point(cfg, &realized, base, &dir, &mut summary),
                Command::Uniqueness => uniqueness(cfg, &realized, &dir, &mut summary),
                Command::Classify | Command::Threshold => unreachable!(),
            }
        }
    };
    match result {
        Ok(bound_violated) => {
            dir.summary(&summary)?;
            Ok(Outcome { summary, bound_violated })
        }
        Err(e @ CliError::NonConvergence(_)) => {
            summary.push("converged", false);
            dir.summary(&summary)?;
            Err(e)
        }
        Err(e) => Err(e),
    }
}

fn check_solver(cfg: &ScenarioConfig) -> Result<(), CliError> {
    let s = &cfg.solver;
    if !(s.tol.is_finite() && s.tol > 0.0) {
        return Err(CliError::Validation(format!("solver.tol must be positive, got {}", s.tol)));
    }
    if s.max_iter == 0 {
        return Err(CliError::Validation("solver.max_iter must be at least 1".into()));
    }
    let sc = &cfg.scenario;
    if sc.levels.is_empty() || sc.levels.iter().any(|k| !(k.is_finite() && *k > 0.0)) {
        return Err(CliError::Validation("scenario.levels must be non-empty and positive".into()));
    }
    if sc.seeds == 0 {
        return Err(CliError::Validation("scenario.seeds must be at least 1".into()));
    }
    for (name, v) in [("alpha", sc.alpha), ("sobolev", sc.sobolev)] {
        if let Some(v) = v {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Validation(format!("scenario.{name} must be positive, got {v}")));
            }
        }
    }
    Ok(())
}

fn newton_options(cfg: &ScenarioConfig) -> NewtonOptions {
    NewtonOptions {
        tol: cfg.solver.tol,
        max_iter: cfg.solver.max_iter,
        ..NewtonOptions::default()
    }
}

fn record_solve(summary: &mut Summary, rep: &SolveReport) {
    summary.push("converged", rep.converged);
    summary.push("iterations", rep.iterations);
    summary.push("final_residual", rep.final_residual());
    eprintln!("wall time: {:.3} s", rep.wall_time.as_secs_f64());
}

fn not_converged(what: &str, rep: &SolveReport) -> CliError {
    CliError::NonConvergence(format!(
        "{what}: residual {:e} after {} iterations",
        rep.final_residual(),
        rep.iterations
    ))
}

fn solve(
    cfg: &ScenarioConfig,
    realized: &Realized,
    dir: &OutputDir,
    summary: &mut Summary,
    verify: bool,
) -> Result<bool, CliError> {
    let problem = &realized.problem;
    let rep = if matches!(problem.h, HSpec::PowerMu { .. }) {
        let lo = solve_with_lower_order(problem, cfg.solver.tol, cfg.solver.max_iter)?;
        summary.push("r", lo.r);
        summary.push("mu_l1", lo.mu_l1);
        summary.push("f_l1", lo.f_l1);
        lo.solve
    } else {
        solve_newton(problem, &Field::zeros(problem.mesh), cfg.solver.tol, cfg.solver.max_iter)?
    };
    record_solve(summary, &rep);
    dir.field("solution.csv", &rep.field)?;
    dir.trace("trace.csv", &rep)?;
    if let Some(exact) = &realized.exact {
        let err = rep.field.sub(exact).map_err(|e| CliError::Solver(e.to_string()))?;
        summary.push("error_l2", norm(&err, NormKind::Lq(2.0)));
        summary.push("error_linf", norm(&err, NormKind::Linf));
    }
    if !rep.converged {
        return Err(not_converged("solve", &rep));
    }
    let bounds = verify_bounds(problem, &rep.field, problem.exponents.as_ref(), cfg.scenario.sobolev)
        .map_err(|e| CliError::Solver(e.to_string()))?;
    dir.estimates(&bounds)?;
    Ok(verify && record_bounds(summary, &bounds))
}

/// Returns whether some row failed.
fn record_bounds(summary: &mut Summary, rep: &EstimateReport) -> bool {
    for row in &rep.rows {
        summary.push(&format!("bound.{}", row.id), if row.pass { "pass" } else { "fail" });
    }
    for (id, why) in &rep.skipped {
        summary.push(&format!("bound.{id}"), format!("skipped ({why})"));
    }
    summary.push("all_pass", rep.all_pass());
    !rep.all_pass()
}

fn sweep(cfg: &ScenarioConfig, realized: &Realized, dir: &OutputDir, summary: &mut Summary) -> Result<bool, CliError> {
    let rep = truncation_sweep(&realized.problem, &cfg.scenario.levels, cfg.solver.tol, cfg.solver.max_iter)?;
    dir.sweep(&rep)?;
    summary.push("levels", rep.entries.len());
    summary.push("stabilized", rep.stabilized);
    match rep.stabilization_level {
        Some(k) => summary.push("stabilization_level", k),
        None => summary.push("stabilization_level", "none"),
    }
    if let Some(bad) = rep.entries.iter().find(|e| !e.converged) {
        return Err(CliError::NonConvergence(format!("truncated solve at level {}", bad.level)));
    }
    summary.push("converged", true);
    Ok(false)
}

fn fixed_point(
    cfg: &ScenarioConfig,
    realized: &Realized,
    base: &Path,
    dir: &OutputDir,
    summary: &mut Summary,
) -> Result<bool, CliError> {
    let problem = &realized.problem;
    let v0 = match &cfg.scenario.v0 {
        Some(d) => d.realize_plain(problem.mesh, base, "v0")?,
        None => Field::zeros(problem.mesh),
    };
    if !v0.satisfies_dirichlet() {
        return Err(CliError::Validation("v0 must vanish on the boundary".into()));
    }
    if !(cfg.scenario.fixed_point_tol.is_finite() && cfg.scenario.fixed_point_tol > 0.0) {
        return Err(CliError::Validation("scenario.fixed_point_tol must be positive".into()));
    }
    let opts = FixedPointOptions {
        max_iters: cfg.scenario.max_iters,
        tol: cfg.scenario.fixed_point_tol,
        newton: NewtonOptions {
            tol: cfg.solver.tol.min(1e-12),
            max_iter: cfg.solver.max_iter,
            ..NewtonOptions::default()
        },
        sobolev: cfg.scenario.sobolev,
    };
    let rep = fixed_point_iterate(problem, &v0, &opts)?;
    dir.field("solution.csv", &rep.field)?;
    dir.fixed_point(&rep.norms, &rep.differences)?;
    summary.push("iterations", rep.iterations);
    if let Some(d) = rep.differences.last() {
        summary.push("last_difference", d);
    }
    if let Some(s) = rep.sobolev {
        summary.push("sobolev", s);
    }
    if let Some(b) = &rep.ball {
        summary.push("radius", b.radius);
        summary.push("a", b.a);
        summary.push("b", b.b);
    }
    match rep.inside_ball {
        Some(inside) => summary.push("inside_ball", inside),
        None => summary.push("inside_ball", "n/a"),
    }
    if let Some(why) = &rep.aborted {
        return Err(CliError::NonConvergence(format!("fixed-point iteration aborted: {why}")));
    }
    if !rep.converged {
        return Err(CliError::NonConvergence(format!(
            "fixed-point iteration: no difference below {} within {} iterations",
            opts.tol, opts.max_iters
        )));
    }
    summary.push("converged", true);
    Ok(rep.inside_ball == Some(false))
}

fn classify(cfg: &ScenarioConfig, summary: &mut Summary) -> Result<bool, CliError> {
    let h = cfg.problem.h.to_spec(cfg.problem.p);
    let class = classify_growth(&h, cfg.problem.p).map_err(|e| CliError::Validation(e.to_string()))?;
    summary.push("family", h.family_name());
    match class.kind {
        GrowthKind::Divergent => summary.push("class", "Divergent"),
        GrowthKind::Bounded { asymptote } => {
            summary.push("class", "Bounded");
            summary.push("asymptote", asymptote);
        }
    }
    summary.push("method", format!("{:?}", class.method));
    Ok(false)
}

fn threshold(cfg: &ScenarioConfig, summary: &mut Summary) -> Result<bool, CliError> {
    let rec = cfg
        .exponent_record()?
        .ok_or_else(|| CliError::Validation("threshold needs an [exponents] table".into()))?;
    let alpha = match cfg.scenario.alpha {
        Some(a) => a,
        None => cfg.operator(&cfg.mesh()?)?.alpha,
    };
    let sobolev = match cfg.scenario.sobolev {
        Some(s) => s,
        None => {
            let q = rec.require("p*")?;
            estimate_sobolev_constant(&cfg.mesh()?, rec.p, q)?
        }
    };
    let value = smallness_threshold(&rec, alpha, sobolev)?;
    summary.push("s", rec.require("s")?);
    summary.push("theta", rec.require("theta")?);
    summary.push("alpha", alpha);
    summary.push("sobolev", sobolev);
    summary.push("exact", rec.exact);
    summary.push("threshold", value);
    Ok(false)
}

fn uniqueness(
    cfg: &ScenarioConfig,
    realized: &Realized,
    dir: &OutputDir,
    summary: &mut Summary,
) -> Result<bool, CliError> {
    let problem = &realized.problem;
    let sc = &cfg.scenario;
    if !(sc.seed_amplitude.is_finite() && sc.seed_amplitude >= 0.0) {
        return Err(CliError::Validation("scenario.seed_amplitude must be non-negative".into()));
    }
    let seeds = random_dirichlet_seeds(problem.mesh, sc.seeds, sc.seed, sc.seed_amplitude);
    let rep = uniqueness_experiment(problem, &seeds, &newton_options(cfg))?;
    for (i, r) in rep.reports.iter().enumerate() {
        dir.trace(&format!("trace_seed_{i}.csv"), r)?;
    }
    if let Some(first) = rep.reports.iter().find(|r| r.converged) {
        dir.field("solution.csv", &first.field)?;
    }
    summary.push("seeds", sc.seeds);
    summary.push("converged_seeds", sc.seeds - rep.excluded.len());
    summary.push("max_distance", rep.max_distance);
    if rep.excluded.len() == sc.seeds {
        return Err(CliError::NonConvergence("no seed converged".into()));
    }
    Ok(false)
}
