//! Plot-ready file formats.
//!
//! All CSV files use a header row and shortest-round-trip float formatting;
//! complex values are always split into separate `re_*` / `im_*` columns.
//! Files are deterministic byte-for-byte given identical inputs.

use std::io::{self, Write};

use nalgebra::DMatrix;

use crate::correlations::{CorrelationKernel, IntegratedRates};
use crate::entanglement::EntanglementReport;
use crate::grid::TimeGrid;
use crate::noise::{NoiseEnsembleStats, NoiseTrajectory};
use crate::optimize::TraceEntry;
use crate::sse::RelativeStateTrajectory;
use crate::C64;

/// `t,s,re_alpha,im_alpha,re_eta,im_eta`, row-major over the lower triangle
/// `s <= t`.
pub fn write_kernel_csv<W: Write>(kernel: &CorrelationKernel, w: &mut W) -> io::Result<()> {
    writeln!(w, "t,s,re_alpha,im_alpha,re_eta,im_eta")?;
    let grid = kernel.grid();
    for i in 0..grid.n_points() {
        for j in 0..=i {
            let a = kernel.alpha()[(i, j)];
            let e = kernel.eta()[(i, j)];
            writeln!(
                w,
                "{},{},{},{},{},{}",
                grid.time(i),
                grid.time(j),
                a.re,
                a.im,
                e.re,
                e.im
            )?;
        }
    }
    Ok(())
}

/// `t,re_a,im_a,re_e,im_e,gamma` per grid point.
pub fn write_rates_csv<W: Write>(rates: &IntegratedRates, w: &mut W) -> io::Result<()> {
    writeln!(w, "t,re_a,im_a,re_e,im_e,gamma")?;
    let grid = rates.grid();
    for k in 0..grid.n_points() {
        let a = rates.a()[k];
        let e = rates.e()[k];
        writeln!(
            w,
            "{},{},{},{},{},{}",
            grid.time(k),
            a.re,
            a.im,
            e.re,
            e.im,
            rates.gamma()[k]
        )?;
    }
    Ok(())
}

/// `t,re_z_star,im_z_star` per grid point.
pub fn write_noise_csv<W: Write>(trajectory: &NoiseTrajectory, w: &mut W) -> io::Result<()> {
    writeln!(w, "t,re_z_star,im_z_star")?;
    for (k, z) in trajectory.z_star().iter().enumerate() {
        writeln!(w, "{},{},{}", trajectory.grid().time(k), z.re, z.im)?;
    }
    Ok(())
}

/// Ensemble-statistics export mirroring the kernel CSV layout.
pub fn write_ensemble_stats_csv<W: Write>(
    stats: &NoiseEnsembleStats,
    grid: &TimeGrid,
    w: &mut W,
) -> io::Result<()> {
    writeln!(w, "t,s,re_est_alpha,im_est_alpha,re_est_eta,im_est_eta")?;
    for i in 0..grid.n_points() {
        for j in 0..=i {
            let a = stats.est_alpha[(i, j)];
            let e = stats.est_eta[(i, j)];
            writeln!(
                w,
                "{},{},{},{},{},{}",
                grid.time(i),
                grid.time(j),
                a.re,
                a.im,
                e.re,
                e.im
            )?;
        }
    }
    Ok(())
}

/// `t,norm_sq` per grid point.
pub fn write_norms_csv<W: Write>(
    trajectory: &RelativeStateTrajectory,
    w: &mut W,
) -> io::Result<()> {
    writeln!(w, "t,norm_sq")?;
    for (k, ns) in trajectory.norms_sq().iter().enumerate() {
        writeln!(w, "{},{}", trajectory.grid().time(k), ns)?;
    }
    Ok(())
}

/// Raw state dump: for each grid point in order, every amplitude as
/// little-endian `f64` pairs (re, im), row-major over the grid.
pub fn write_state_dump<W: Write>(
    trajectory: &RelativeStateTrajectory,
    w: &mut W,
) -> io::Result<()> {
    for state in trajectory.states() {
        for v in state.iter() {
            w.write_all(&v.re.to_le_bytes())?;
            w.write_all(&v.im.to_le_bytes())?;
        }
    }
    Ok(())
}

/// `t,i,j,re_rho,im_rho`, upper triangle `i <= j`, per grid point.
pub fn write_rho_csv<W: Write>(grid: &TimeGrid, rho: &[DMatrix<C64>], w: &mut W) -> io::Result<()> {
    writeln!(w, "t,i,j,re_rho,im_rho")?;
    for (k, m) in rho.iter().enumerate() {
        for i in 0..m.nrows() {
            for j in i..m.ncols() {
                let v = m[(i, j)];
                writeln!(w, "{},{},{},{},{}", grid.time(k), i, j, v.re, v.im)?;
            }
        }
    }
    Ok(())
}

/// `t,xbar,exact,gap,gamma_integral`; `exact` and `gap` are `nan` when no
/// exact reference is attached.
pub fn write_entanglement_csv<W: Write>(report: &EntanglementReport, w: &mut W) -> io::Result<()> {
    writeln!(w, "t,xbar,exact,gap,gamma_integral")?;
    for k in 0..report.grid.n_points() {
        let exact = report.exact_reference.as_ref().map(|e| e[k]);
        let (e, gap) = match exact {
            Some(e) => (e, report.xbar[k] - e),
            None => (f64::NAN, f64::NAN),
        };
        writeln!(
            w,
            "{},{},{},{},{}",
            report.grid.time(k),
            report.xbar[k],
            e,
            gap,
            report.gamma_integral[k]
        )?;
    }
    Ok(())
}

/// `t,xbar_opt,xbar_zero,exact` per grid point: the scenario-reproduction
/// data of the bound comparison figure.
pub fn write_fig_csv<W: Write>(
    grid: &TimeGrid,
    xbar_opt: &[f64],
    xbar_zero: &[f64],
    exact: &[f64],
    w: &mut W,
) -> io::Result<()> {
    writeln!(w, "t,xbar_opt,xbar_zero,exact")?;
    for k in 0..grid.n_points() {
        writeln!(
            w,
            "{},{},{},{}",
            grid.time(k),
            xbar_opt[k],
            xbar_zero[k],
            exact[k]
        )?;
    }
    Ok(())
}

/// `iteration,objective,phase_1..phase_n`.
pub fn write_search_trace_csv<W: Write>(trace: &[TraceEntry], w: &mut W) -> io::Result<()> {
    let n_phases = trace.first().map_or(0, |e| e.phases.len());
    write!(w, "iteration,objective")?;
    for k in 1..=n_phases {
        write!(w, ",phase_{k}")?;
    }
    writeln!(w)?;
    for e in trace {
        write!(w, "{},{}", e.iteration, e.objective)?;
        for p in &e.phases {
            write!(w, ",{p}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlations::{build_kernel, integrated_rates, ModeSet};
    use crate::noise::sample_noise_modesum;

    #[test]
    fn kernel_csv_row_count_is_triangular() {
        let modes = ModeSet::from_triples(&[(0.5, 1.0, C64::new(0.1, 0.0))]).unwrap();
        let grid = TimeGrid::new(0.1, 6).unwrap();
        let kernel = build_kernel(&modes, &grid).unwrap();
        let mut buf = Vec::new();
        write_kernel_csv(&kernel, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let n = grid.n_points();
        assert_eq!(text.lines().count(), 1 + n * (n + 1) / 2);
        assert!(text.starts_with("t,s,re_alpha,im_alpha,re_eta,im_eta"));
    }

    #[test]
    fn exports_are_deterministic() {
        let modes = ModeSet::from_triples(&[(0.5, 1.3, C64::new(0.2, 0.1))]).unwrap();
        let grid = TimeGrid::new(0.1, 8).unwrap();
        let traj = sample_noise_modesum(&modes, &grid, 7);
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_noise_csv(&traj, &mut a).unwrap();
        write_noise_csv(&traj, &mut b).unwrap();
        assert_eq!(a, b);
        let rates = integrated_rates(&build_kernel(&modes, &grid).unwrap());
        let mut r = Vec::new();
        write_rates_csv(&rates, &mut r).unwrap();
        assert_eq!(
            String::from_utf8(r).unwrap().lines().count(),
            1 + grid.n_points()
        );
    }
}
