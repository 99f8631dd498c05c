//! `correlations`: kernel and integrated-rate export per coupled qubit.

use std::io::Write;
use std::path::Path;

use unravel_core::{build_kernel, export, integrated_rates, markov_rates};

use super::{create, write_resolved_config, CmdError, EXIT_OK};
use crate::config::ScenarioConfig;

pub fn run(cfg: &ScenarioConfig, out_dir: &Path) -> Result<i32, CmdError> {
    let grid = cfg.grid()?;
    let coupled = cfg.coupled_indices();
    if coupled.is_empty() {
        return Err(CmdError::Config("no coupled qubit in the system".into()));
    }
    for (c, &q) in coupled.iter().enumerate() {
        if let Some(rate) = cfg.markov_rate(q) {
            // The delta kernel has no grid representation; emit the analytic
            // integrated rates instead.
            let rates = markov_rates(rate, &grid)?;
            let mut w = create(out_dir, &format!("rates_{c}.csv"))?;
            export::write_rates_csv(&rates, &mut w)?;
            w.flush()?;
            println!(
                "channel {c} (qubit {q}): markov delta kernel is not materializable on a grid; \
                 wrote integrated rates to rates_{c}.csv"
            );
            continue;
        }
        let modes = cfg
            .squeezed_modes(q)?
            .expect("non-markov baths always discretize");
        let kernel = build_kernel(&modes, &grid)?;
        let mut w = create(out_dir, &format!("kernel_{c}.csv"))?;
        export::write_kernel_csv(&kernel, &mut w)?;
        w.flush()?;
        let rates = integrated_rates(&kernel);
        let mut w = create(out_dir, &format!("rates_{c}.csv"))?;
        export::write_rates_csv(&rates, &mut w)?;
        w.flush()?;
        println!(
            "channel {c} (qubit {q}): {} modes, kernel_{c}.csv and rates_{c}.csv written",
            modes.len()
        );
    }
    write_resolved_config(cfg, out_dir)?;
    Ok(EXIT_OK)
}
