//! `sample`: noise realizations of the first coupled channel plus ensemble
//! statistics against the exact kernel.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use unravel_core::{
    build_kernel, export, noise::CorrelationAccumulator, CovarianceSampler, ModeSumSampler,
};

use super::{
    all_squeezed_modes, create, write_resolved_config, CmdError, EXIT_OK, EXIT_STATISTICAL,
};
use crate::config::ScenarioConfig;

pub fn run(cfg: &ScenarioConfig, out_dir: &Path) -> Result<i32, CmdError> {
    let grid = cfg.grid()?;
    let modes = all_squeezed_modes(cfg)?.remove(0);
    let kernel = build_kernel(&modes, &grid)?;
    let n = cfg.ensemble.n_samples.max(2);
    let seed = cfg.seed;

    enum Sampler {
        ModeSum(ModeSumSampler),
        Covariance(CovarianceSampler),
    }
    let sampler = match cfg.ensemble.sampler.as_str() {
        "modesum" => Sampler::ModeSum(ModeSumSampler::new(&modes, &grid)),
        "covariance" => Sampler::Covariance(CovarianceSampler::new(&kernel)?),
        other => {
            return Err(CmdError::Config(format!(
                "unknown sampler \"{other}\" (expected modesum or covariance)"
            )))
        }
    };
    let draw = |stream: u64| match &sampler {
        Sampler::ModeSum(s) => s.sample(seed, stream),
        Sampler::Covariance(s) => s.sample(seed, stream),
    };

    // Export the first few realizations.
    for k in 0..cfg.output.trajectory_norms.min(n) {
        let traj = draw(k as u64);
        let mut w = create(out_dir, &format!("noise_{k:03}.csv"))?;
        export::write_noise_csv(&traj, &mut w)?;
        w.flush()?;
    }

    // Parallel accumulation in fixed blocks, merged in order.
    let block = 512usize;
    let blocks: Vec<(u64, u64)> = (0..n as u64)
        .step_by(block)
        .map(|s| (s, (s + block as u64).min(n as u64)))
        .collect();
    let partials: Vec<CorrelationAccumulator> = blocks
        .par_iter()
        .map(|&(s, e)| {
            let mut acc = CorrelationAccumulator::new(&grid);
            for t in s..e {
                acc.add(&draw(t)).expect("same grid");
            }
            acc
        })
        .collect();
    let mut total = CorrelationAccumulator::new(&grid);
    for p in &partials {
        total.merge(p).expect("same grid");
    }
    let stats = total.finalize(&kernel)?;

    let mut w = create(out_dir, "ensemble_stats.csv")?;
    export::write_ensemble_stats_csv(&stats, &grid, &mut w)?;
    w.flush()?;
    let summary = serde_json::json!({
        "n_samples": stats.n_samples,
        "max_alpha_dev": stats.max_alpha_dev,
        "max_eta_dev": stats.max_eta_dev,
    });
    let mut w = create(out_dir, "ensemble_summary.json")?;
    writeln!(
        w,
        "{}",
        serde_json::to_string_pretty(&summary).expect("json")
    )?;
    w.flush()?;
    write_resolved_config(cfg, out_dir)?;

    // Sanity: the fraction of entries outside their five-standard-error
    // band should be vanishing.
    let points = grid.n_points();
    let mut outliers = 0usize;
    for i in 0..points {
        for j in 0..points {
            let da = (stats.est_alpha[(i, j)] - kernel.alpha()[(i, j)]).norm();
            if da > 5.0 * stats.se_alpha[(i, j)] + 1e-12 {
                outliers += 1;
            }
            let de = (stats.est_eta[(i, j)] - kernel.eta()[(i, j)]).norm();
            if de > 5.0 * stats.se_eta[(i, j)] + 1e-12 {
                outliers += 1;
            }
        }
    }
    let frac = outliers as f64 / (2 * points * points) as f64;
    println!(
        "{} samples ({}): max_alpha_dev {:.3e}, max_eta_dev {:.3e}, outlier fraction {:.2e}",
        stats.n_samples, cfg.ensemble.sampler, stats.max_alpha_dev, stats.max_eta_dev, frac
    );
    if frac > 1e-3 {
        eprintln!("ensemble statistics inconsistent with the kernel beyond sampling noise");
        return Ok(EXIT_STATISTICAL);
    }
    Ok(EXIT_OK)
}
