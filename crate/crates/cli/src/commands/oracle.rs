//! `oracle`: full Hilbert-space verification runs for a one-qubit dephasing
//! scenario with a small discrete bath.

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use unravel_core::{
    evolve_composite, oracle::ResidualOptions, quadrature_average, verify_sse_residual,
    CompositeState, FockBath, QuadratureSpec, C64,
};

use super::{all_squeezed_modes, create, write_resolved_config, CmdError, EXIT_NUMERICAL, EXIT_OK};
use crate::config::ScenarioConfig;

pub fn run(cfg: &ScenarioConfig, out_dir: &Path) -> Result<i32, CmdError> {
    let orc = cfg
        .oracle
        .as_ref()
        .ok_or_else(|| CmdError::Config("oracle subcommand needs an [oracle] section".into()))?;
    if cfg.system.n_qubits != 1 {
        return Err(CmdError::Config(
            "the oracle runs one system qubit against its bath; set n_qubits = 1".into(),
        ));
    }
    let grid = cfg.grid()?;
    let modes = all_squeezed_modes(cfg)?.remove(0);
    let bath = FockBath::new(modes.clone(), orc.n_max)?;
    let q = &cfg.system.qubits[0];
    if q.h_x != 0.0 || q.h_y != 0.0 {
        return Err(CmdError::Config(
            "oracle scenarios are dephasing: the local hamiltonian must be diagonal".into(),
        ));
    }
    let h_s = DMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(q.h_z, 0.0),
            C64::default(),
            C64::default(),
            C64::new(-q.h_z, 0.0),
        ],
    );
    let sigma_z = DMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(1.0, 0.0),
            C64::default(),
            C64::default(),
            C64::new(-1.0, 0.0),
        ],
    );
    let initial_system = cfg.initial_state();
    let initial = CompositeState::from_system_vacuum(&initial_system, &bath)?;

    let evo = evolve_composite(&h_s, &sigma_z, &bath, &grid, &initial, &Default::default())?;
    let final_state = evo.states.last().expect("nonempty grid");

    // Quadrature reconstruction at every requested squeezing.
    let spec = QuadratureSpec {
        nodes_per_axis: orc.quad_nodes,
    };
    let mut identity_residual = 0.0f64;
    let mut partial_trace_residual = 0.0f64;
    let mut rhos = Vec::new();
    for xi in &orc.xi {
        let label = vec![C64::new(xi[0], xi[1]); bath.n_modes()];
        let avg = quadrature_average(final_state, &label, &spec)?;
        identity_residual = identity_residual.max(avg.identity_residual);
        partial_trace_residual = partial_trace_residual.max(avg.partial_trace_residual);
        rhos.push(avg.rho);
    }
    let mut cross_xi_dev = 0.0f64;
    for pair in rhos.windows(2) {
        let d = (&pair[0] - &pair[1])
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        cross_xi_dev = cross_xi_dev.max(d);
    }

    // Microscopic residual of the stochastic equation, bath squeezing
    // included.
    let z_nodes: Vec<Vec<C64>> = orc
        .z_nodes
        .iter()
        .map(|n| vec![C64::new(n[0], n[1]); bath.n_modes()])
        .collect();
    let residual = verify_sse_residual(
        &h_s,
        &sigma_z,
        &bath,
        &initial_system,
        &orc.sample_times,
        &z_nodes,
        &ResidualOptions {
            fd_dt: orc.fd_dt,
            ..Default::default()
        },
    )?;

    let passed = evo.leakage_ok
        && identity_residual < orc.identity_tol
        && partial_trace_residual < orc.partial_trace_tol
        && cross_xi_dev < 2.0 * orc.partial_trace_tol
        && residual.max_residual < orc.residual_tol
        && residual.max_mode_identity_residual < orc.residual_tol;
    let report = serde_json::json!({
        "scenario": cfg.time_unit,
        "n_max": orc.n_max,
        "leakage": evo.leakage,
        "leakage_ok": evo.leakage_ok,
        "norm_drift": evo.norm_drift,
        "identity_residual": identity_residual,
        "partial_trace_residual": partial_trace_residual,
        "cross_xi_deviation": cross_xi_dev,
        "sse_residual": residual.max_residual,
        "mode_identity_residual": residual.max_mode_identity_residual,
        "cauchy_riemann_residual": residual.max_cauchy_riemann_residual,
        "xi_values_tested": orc.xi,
        "passed": passed,
    });
    let mut w = create(out_dir, "oracle_report.json")?;
    writeln!(
        w,
        "{}",
        serde_json::to_string_pretty(&report).expect("json")
    )?;
    w.flush()?;
    write_resolved_config(cfg, out_dir)?;

    println!(
        "oracle: leakage_ok {}, identity {:.3e}, partial trace {:.3e}, sse residual {:.3e}",
        evo.leakage_ok, identity_residual, partial_trace_residual, residual.max_residual
    );
    Ok(if passed { EXIT_OK } else { EXIT_NUMERICAL })
}
