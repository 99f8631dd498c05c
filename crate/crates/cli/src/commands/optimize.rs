//! `optimize`: numerical squeezing-phase search against the analytic rules.

use std::io::Write;
use std::path::Path;

use unravel_core::{export, search_squeezing, Objective, SearchOptions};

use super::{create, write_resolved_config, CmdError, EXIT_NUMERICAL, EXIT_OK};
use crate::config::ScenarioConfig;

pub fn run(cfg: &ScenarioConfig, out_dir: &Path) -> Result<i32, CmdError> {
    let opt = cfg.optimize.as_ref().ok_or_else(|| {
        CmdError::Config("optimize subcommand needs an [optimize] section".into())
    })?;
    let grid = cfg.grid()?;
    let coupled = cfg.coupled_indices();
    if coupled.is_empty() {
        return Err(CmdError::Config("no coupled qubit in the system".into()));
    }
    let base = cfg.base_modes(coupled[0])?.ok_or_else(|| {
        CmdError::Config("the analytic markov bath has no modes to optimize over".into())
    })?;
    let objective = match opt.objective.as_str() {
        "minimize" => Objective::MinimizeXbarAt(opt.target_time),
        "maximize" => Objective::MaximizeXbarAt(opt.target_time),
        other => return Err(CmdError::Config(format!("unknown objective \"{other}\""))),
    };
    let result = search_squeezing(
        &base,
        &grid,
        objective,
        &SearchOptions {
            n_starts: opt.n_starts,
            budget: opt.budget,
            epsilon: opt.epsilon,
            seed: cfg.seed,
            ..Default::default()
        },
    )?;

    let mut w = create(out_dir, "search_trace.csv")?;
    export::write_search_trace_csv(&result.trace, &mut w)?;
    w.flush()?;
    let json = serde_json::json!({
        "objective": opt.objective,
        "target_time": opt.target_time,
        "best_phases": result.best_phases,
        "magnitude": result.magnitude,
        "best_objective": result.best_objective,
        "analytic_phase_gap": result.analytic_phase_gap,
        "analytic_objective_gap": result.analytic_objective_gap,
        "budget_exhausted": result.budget_exhausted,
        "evals_used": result.evals_used,
        "magnitude_sweep": result.magnitude_sweep,
    });
    let mut w = create(out_dir, "search_result.json")?;
    writeln!(w, "{}", serde_json::to_string_pretty(&json).expect("json"))?;
    w.flush()?;
    write_resolved_config(cfg, out_dir)?;

    println!(
        "search: best bound {:.6}, phase gap {:.2e} rad, objective gap {:+.2e}, {} evals{}",
        result.best_objective,
        result.analytic_phase_gap,
        result.analytic_objective_gap,
        result.evals_used,
        if result.budget_exhausted {
            " (budget exhausted, best-so-far)"
        } else {
            ""
        }
    );
    let within =
        result.analytic_phase_gap < opt.gap_threshold && result.analytic_objective_gap > -1e-10;
    Ok(if within { EXIT_OK } else { EXIT_NUMERICAL })
}
