//! Exact trajectory propagation for multi-qubit local pure dephasing.
//!
//! Each coupled qubit sees its own bath through `sigma_z`, and every local
//! Hamiltonian commutes with `sigma_z` on the coupled qubits. Under that
//! closure the linear stochastic equation for the unnormalized relative state
//! becomes
//!
//! ```text
//! d psi/dt = [-i H_S + sum_k sigma_z^(k) z*_{k,t} - sum_k (a_k(t) + e_k(t))] psi
//! ```
//!
//! with `a_k`, `e_k` the integrated kernel rates. All generators commute, so
//! the step map is the exact exponential with trapezoidal inner integrals:
//!
//! ```text
//! psi(t+dt) = exp(-i H_S dt)
//!           * exp(sum_k sigma_z^(k) I_k - sum_k c_k) psi(t)
//! ```
//!
//! where `I_k` and `c_k` are the per-step integrals of the noise and of the
//! drift `a_k + e_k`. Squared norms are tracked at every grid point; they are
//! the density factor of the generalized-measurement outcome probability.

use nalgebra::{DMatrix, DVector, Matrix2};
use rayon::prelude::*;

use crate::correlations::IntegratedRates;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::noise::{ModeSumSampler, NoiseTrajectory};
use crate::rng::channel_stream;
use crate::C64;

/// Default cap on the total qubit count (state dimension `2^N`).
pub const DEFAULT_MAX_QUBITS: usize = 12;

/// A register of `N` qubits, `M` of which couple to their own dephasing bath
/// through `sigma_z`.
#[derive(Debug, Clone)]
pub struct DephasingSystem {
    n_qubits: usize,
    coupled: Vec<usize>,
    local_h: Vec<Matrix2<C64>>,
}

impl DephasingSystem {
    /// `local_h[q]` is the 2x2 hermitian local Hamiltonian of qubit `q`.
    /// On coupled qubits it must commute with `sigma_z`, i.e. be diagonal;
    /// that is the validity condition of the exact propagator and is
    /// enforced here rather than checked dynamically.
    pub fn new(n_qubits: usize, coupled: Vec<usize>, local_h: Vec<Matrix2<C64>>) -> Result<Self> {
        Self::with_max_qubits(n_qubits, coupled, local_h, DEFAULT_MAX_QUBITS)
    }

    pub fn with_max_qubits(
        n_qubits: usize,
        coupled: Vec<usize>,
        local_h: Vec<Matrix2<C64>>,
        max_qubits: usize,
    ) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::Invalid("system needs at least one qubit".into()));
        }
        if n_qubits > max_qubits {
            return Err(Error::TooManyQubits {
                n: n_qubits,
                cap: max_qubits,
            });
        }
        if local_h.len() != n_qubits {
            return Err(Error::Dimension(format!(
                "expected {} local hamiltonians, got {}",
                n_qubits,
                local_h.len()
            )));
        }
        let mut seen = vec![false; n_qubits];
        for &q in &coupled {
            if q >= n_qubits {
                return Err(Error::Invalid(format!(
                    "coupled qubit index {q} out of range"
                )));
            }
            if seen[q] {
                return Err(Error::Invalid(format!("coupled qubit {q} listed twice")));
            }
            seen[q] = true;
        }
        for (q, h) in local_h.iter().enumerate() {
            let herm = (h[(0, 1)] - h[(1, 0)].conj())
                .norm()
                .max(h[(0, 0)].im.abs())
                .max(h[(1, 1)].im.abs());
            if herm > 1e-12 {
                return Err(Error::NotHermitian(herm));
            }
            if seen[q] && h[(0, 1)].norm() > 1e-14 {
                return Err(Error::NonCommutingHamiltonian { qubit: q });
            }
        }
        Ok(Self {
            n_qubits,
            coupled,
            local_h,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn coupled(&self) -> &[usize] {
        &self.coupled
    }

    pub fn n_channels(&self) -> usize {
        self.coupled.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn local_h(&self) -> &[Matrix2<C64>] {
        &self.local_h
    }

    /// Per-qubit step unitaries `exp(-i h dt)`, `None` where `h = 0`.
    fn step_unitaries(&self, dt: f64) -> Vec<Option<Matrix2<C64>>> {
        self.local_h
            .iter()
            .map(|h| {
                if h.iter().all(|v| v.norm() == 0.0) {
                    None
                } else {
                    Some(expm_2x2_hermitian(h, dt))
                }
            })
            .collect()
    }

    /// `sigma_z` eigenvalue of qubit `q` in basis state `idx` (qubit 0 is
    /// the most significant bit).
    #[inline]
    fn sign(&self, idx: usize, q: usize) -> f64 {
        if idx & (1 << (self.n_qubits - 1 - q)) == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// `exp(-i h dt)` for hermitian 2x2 `h`, via the Pauli decomposition.
fn expm_2x2_hermitian(h: &Matrix2<C64>, dt: f64) -> Matrix2<C64> {
    let c0 = 0.5 * (h[(0, 0)].re + h[(1, 1)].re);
    let vz = 0.5 * (h[(0, 0)].re - h[(1, 1)].re);
    let vx = h[(0, 1)].re;
    let vy = -h[(0, 1)].im;
    let vn = (vx * vx + vy * vy + vz * vz).sqrt();
    let phase = C64::new(0.0, -c0 * dt).exp();
    if vn == 0.0 {
        return Matrix2::new(phase, C64::default(), C64::default(), phase);
    }
    let (s, c) = ((vn * dt).sin(), (vn * dt).cos());
    let mi_s = C64::new(0.0, -s / vn);
    Matrix2::new(
        phase * (C64::new(c, 0.0) + mi_s * vz),
        phase * (mi_s * C64::new(vx, -vy)),
        phase * (mi_s * C64::new(vx, vy)),
        phase * (C64::new(c, 0.0) - mi_s * vz),
    )
}

use crate::linalg::apply_single_qubit;

/// Unnormalized relative-state trajectory: the state vector and its squared
/// norm at every grid point, together with the noise that drove it.
#[derive(Debug, Clone)]
pub struct RelativeStateTrajectory {
    grid: TimeGrid,
    states: Vec<DVector<C64>>,
    norms_sq: Vec<f64>,
    noise: Vec<NoiseTrajectory>,
}

impl RelativeStateTrajectory {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn states(&self) -> &[DVector<C64>] {
        &self.states
    }

    pub fn state(&self, k: usize) -> &DVector<C64> {
        &self.states[k]
    }

    pub fn norms_sq(&self) -> &[f64] {
        &self.norms_sq
    }

    pub fn noise(&self) -> &[NoiseTrajectory] {
        &self.noise
    }
}

/// Squared norm of the relative state at one grid index: the ratio of the
/// outcome probability density to the sampling density `p_xi`.
pub fn povm_density(trajectory: &RelativeStateTrajectory, t_index: usize) -> f64 {
    trajectory.norms_sq[t_index]
}

/// Propagate the exact dephasing step map along given noise realizations.
///
/// `noises[k]` and `rates[k]` belong to coupled qubit `system.coupled()[k]`;
/// all grids must agree and the initial state must be normalized.
pub fn propagate_dephasing(
    system: &DephasingSystem,
    initial: &DVector<C64>,
    noises: &[NoiseTrajectory],
    rates: &[IntegratedRates],
) -> Result<RelativeStateTrajectory> {
    if noises.len() != system.n_channels() || rates.len() != system.n_channels() {
        return Err(Error::Dimension(format!(
            "expected {} noise trajectories and rate sets",
            system.n_channels()
        )));
    }
    if initial.len() != system.dim() {
        return Err(Error::Dimension(format!(
            "initial state has dimension {}, system needs {}",
            initial.len(),
            system.dim()
        )));
    }
    let grid = if let Some(n0) = noises.first() {
        n0.grid().clone()
    } else {
        return Err(Error::Invalid(
            "dephasing system has no coupled qubit".into(),
        ));
    };
    for n in noises {
        if n.grid() != &grid {
            return Err(Error::GridMismatch);
        }
    }
    for r in rates {
        if r.grid() != &grid {
            return Err(Error::GridMismatch);
        }
    }
    let norm0 = initial.norm();
    if (norm0 - 1.0).abs() > 1e-9 {
        return Err(Error::UnnormalizedState((norm0 - 1.0).abs()));
    }

    let dt = grid.dt();
    let n_steps = grid.n_steps();
    let dim = system.dim();
    let unitaries = system.step_unitaries(dt);
    let drifts: Vec<Vec<C64>> = rates.iter().map(IntegratedRates::drift).collect();

    let mut states = Vec::with_capacity(n_steps + 1);
    let mut norms_sq = Vec::with_capacity(n_steps + 1);
    let mut psi = initial.clone();
    states.push(psi.clone());
    norms_sq.push(psi.norm_squared());

    for j in 0..n_steps {
        // Per-channel step integrals (trapezoid on grid samples).
        let mut plus = Vec::with_capacity(noises.len());
        let mut minus = Vec::with_capacity(noises.len());
        for (k, noise) in noises.iter().enumerate() {
            let zi = (noise.z_star()[j] + noise.z_star()[j + 1]) * (0.5 * dt);
            let ci = (drifts[k][j] + drifts[k][j + 1]) * (0.5 * dt);
            plus.push((zi - ci).exp());
            minus.push((-zi - ci).exp());
        }
        for idx in 0..dim {
            let mut factor = C64::new(1.0, 0.0);
            for (k, &q) in system.coupled().iter().enumerate() {
                factor *= if system.sign(idx, q) > 0.0 {
                    plus[k]
                } else {
                    minus[k]
                };
            }
            psi[idx] *= factor;
        }
        for (q, u) in unitaries.iter().enumerate() {
            if let Some(u) = u {
                apply_single_qubit(&mut psi, u, q, system.n_qubits());
            }
        }
        states.push(psi.clone());
        norms_sq.push(psi.norm_squared());
    }

    Ok(RelativeStateTrajectory {
        grid,
        states,
        norms_sq,
        noise: noises.to_vec(),
    })
}

/// Gaussian average of relative projectors over a list of trajectories.
#[derive(Debug, Clone)]
pub struct AveragedDensity {
    pub grid: TimeGrid,
    pub rho: Vec<DMatrix<C64>>,
    /// `|tr rho(t_k) - 1|` per grid point.
    pub trace_dev: Vec<f64>,
}

/// Mean of `|psi><psi|` over trajectories, without reweighting: the Gaussian
/// measure is already in the sampling.
pub fn average_density_matrix(trajectories: &[RelativeStateTrajectory]) -> Result<AveragedDensity> {
    let first = trajectories
        .first()
        .ok_or_else(|| Error::Invalid("need at least one trajectory".into()))?;
    let grid = first.grid().clone();
    let mut acc = DensityAccumulator::new(&grid, first.state(0).len());
    for t in trajectories {
        acc.add(t)?;
    }
    let e = acc.finalize()?;
    Ok(AveragedDensity {
        grid: e.grid.clone(),
        rho: e.rho,
        trace_dev: e.trace_dev,
    })
}

/// Streaming accumulator for ensemble averages of `|psi><psi|` with
/// per-entry standard errors; merges by moment addition.
#[derive(Debug, Clone)]
pub struct DensityAccumulator {
    grid: TimeGrid,
    dim: usize,
    n: usize,
    sum: Vec<DMatrix<C64>>,
    sumsq_re: Vec<DMatrix<f64>>,
    sumsq_im: Vec<DMatrix<f64>>,
    norm_sum: Vec<f64>,
    norm_sumsq: Vec<f64>,
}

impl DensityAccumulator {
    pub fn new(grid: &TimeGrid, dim: usize) -> Self {
        let n_points = grid.n_points();
        Self {
            grid: grid.clone(),
            dim,
            n: 0,
            sum: vec![DMatrix::zeros(dim, dim); n_points],
            sumsq_re: vec![DMatrix::zeros(dim, dim); n_points],
            sumsq_im: vec![DMatrix::zeros(dim, dim); n_points],
            norm_sum: vec![0.0; n_points],
            norm_sumsq: vec![0.0; n_points],
        }
    }

    pub fn n_samples(&self) -> usize {
        self.n
    }

    pub fn add(&mut self, trajectory: &RelativeStateTrajectory) -> Result<()> {
        if trajectory.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        if trajectory.state(0).len() != self.dim {
            return Err(Error::Dimension("trajectory dimension mismatch".into()));
        }
        self.n += 1;
        for (k, psi) in trajectory.states().iter().enumerate() {
            let sum = &mut self.sum[k];
            let sq_re = &mut self.sumsq_re[k];
            let sq_im = &mut self.sumsq_im[k];
            for i in 0..self.dim {
                for j in 0..self.dim {
                    let v = psi[i] * psi[j].conj();
                    sum[(i, j)] += v;
                    sq_re[(i, j)] += v.re * v.re;
                    sq_im[(i, j)] += v.im * v.im;
                }
            }
            let ns = trajectory.norms_sq()[k];
            self.norm_sum[k] += ns;
            self.norm_sumsq[k] += ns * ns;
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &DensityAccumulator) -> Result<()> {
        if other.grid != self.grid || other.dim != self.dim {
            return Err(Error::GridMismatch);
        }
        self.n += other.n;
        for k in 0..self.sum.len() {
            self.sum[k] += &other.sum[k];
            self.sumsq_re[k] += &other.sumsq_re[k];
            self.sumsq_im[k] += &other.sumsq_im[k];
            self.norm_sum[k] += other.norm_sum[k];
            self.norm_sumsq[k] += other.norm_sumsq[k];
        }
        Ok(())
    }

    pub fn finalize(&self) -> Result<EnsembleDensity> {
        if self.n == 0 {
            return Err(Error::Invalid("no trajectories accumulated".into()));
        }
        let inv = 1.0 / self.n as f64;
        let rho: Vec<DMatrix<C64>> = self.sum.iter().map(|m| m.map(|v| v * inv)).collect();
        let mut se_re = Vec::with_capacity(rho.len());
        let mut se_im = Vec::with_capacity(rho.len());
        for (k, mean) in rho.iter().enumerate() {
            let mut re = DMatrix::zeros(self.dim, self.dim);
            let mut im = DMatrix::zeros(self.dim, self.dim);
            for i in 0..self.dim {
                for j in 0..self.dim {
                    let m = mean[(i, j)];
                    let vr = (self.sumsq_re[k][(i, j)] * inv - m.re * m.re).max(0.0);
                    let vi = (self.sumsq_im[k][(i, j)] * inv - m.im * m.im).max(0.0);
                    re[(i, j)] = (vr * inv).sqrt();
                    im[(i, j)] = (vi * inv).sqrt();
                }
            }
            se_re.push(re);
            se_im.push(im);
        }
        let trace_dev: Vec<f64> = rho
            .iter()
            .map(|m| ((0..self.dim).map(|i| m[(i, i)]).sum::<C64>().re - 1.0).abs())
            .collect();
        let mean_norm_sq: Vec<f64> = self.norm_sum.iter().map(|s| s * inv).collect();
        let se_norm_sq: Vec<f64> = self
            .norm_sumsq
            .iter()
            .zip(&mean_norm_sq)
            .map(|(sq, m)| ((sq * inv - m * m).max(0.0) * inv).sqrt())
            .collect();
        Ok(EnsembleDensity {
            grid: self.grid.clone(),
            n_samples: self.n,
            rho,
            se_re,
            se_im,
            trace_dev,
            mean_norm_sq,
            se_norm_sq,
        })
    }
}

/// Finished ensemble average with uncertainty bands.
#[derive(Debug, Clone)]
pub struct EnsembleDensity {
    pub grid: TimeGrid,
    pub n_samples: usize,
    pub rho: Vec<DMatrix<C64>>,
    pub se_re: Vec<DMatrix<f64>>,
    pub se_im: Vec<DMatrix<f64>>,
    pub trace_dev: Vec<f64>,
    pub mean_norm_sq: Vec<f64>,
    pub se_norm_sq: Vec<f64>,
}

/// Options for [`dephasing_ensemble`].
#[derive(Debug, Clone)]
pub struct EnsembleOptions {
    pub n_samples: usize,
    pub seed: u64,
    /// Trajectories per accumulation block. Blocks are processed in parallel
    /// and merged in index order, so results do not depend on the thread
    /// count. The block size does affect rounding at the last bit; it is
    /// fixed by default for reproducibility across machines.
    pub block: usize,
}

impl EnsembleOptions {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        Self {
            n_samples,
            seed,
            block: 256,
        }
    }
}

/// Monte-Carlo ensemble of dephasing trajectories with streaming averaging:
/// noise per channel is drawn with `stream = trajectory * n_channels +
/// channel`, each trajectory is propagated and folded into a block
/// accumulator, and blocks merge in order.
pub fn dephasing_ensemble(
    system: &DephasingSystem,
    samplers: &[ModeSumSampler],
    rates: &[IntegratedRates],
    initial: &DVector<C64>,
    opts: &EnsembleOptions,
) -> Result<EnsembleDensity> {
    if samplers.len() != system.n_channels() {
        return Err(Error::Dimension(format!(
            "expected {} samplers, one per coupled qubit",
            system.n_channels()
        )));
    }
    if opts.n_samples == 0 {
        return Err(Error::Invalid("ensemble needs at least one sample".into()));
    }
    let grid = samplers
        .first()
        .map(|s| s.grid().clone())
        .ok_or_else(|| Error::Invalid("dephasing system has no coupled qubit".into()))?;
    let n_channels = system.n_channels() as u64;
    let blocks: Vec<(usize, usize)> = (0..opts.n_samples)
        .step_by(opts.block.max(1))
        .map(|start| (start, (start + opts.block.max(1)).min(opts.n_samples)))
        .collect();
    let partials: Vec<Result<DensityAccumulator>> = blocks
        .par_iter()
        .map(|&(start, end)| {
            let mut acc = DensityAccumulator::new(&grid, system.dim());
            for t in start..end {
                let noises: Vec<NoiseTrajectory> = samplers
                    .iter()
                    .enumerate()
                    .map(|(c, s)| {
                        s.sample(opts.seed, channel_stream(t as u64, n_channels, c as u64))
                    })
                    .collect();
                let traj = propagate_dephasing(system, initial, &noises, rates)?;
                acc.add(&traj)?;
            }
            Ok(acc)
        })
        .collect();
    let mut total = DensityAccumulator::new(&grid, system.dim());
    for p in partials {
        total.merge(&p?)?;
    }
    total.finalize()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlations::{build_kernel, integrated_rates, ModeSet};
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn qubit_system(h: Matrix2<C64>) -> DephasingSystem {
        DephasingSystem::new(1, vec![0], vec![h]).unwrap()
    }

    fn zero_h() -> Matrix2<C64> {
        Matrix2::zeros()
    }

    #[test]
    fn construction_validates() {
        // Non-diagonal local hamiltonian on a coupled qubit is rejected.
        let hx = Matrix2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0));
        assert!(matches!(
            DephasingSystem::new(1, vec![0], vec![hx]),
            Err(Error::NonCommutingHamiltonian { qubit: 0 })
        ));
        // ... but is fine on an uncoupled one.
        assert!(DephasingSystem::new(2, vec![0], vec![zero_h(), hx]).is_ok());
        // Cap on the register size.
        assert!(matches!(
            DephasingSystem::with_max_qubits(5, vec![0], vec![zero_h(); 5], 4),
            Err(Error::TooManyQubits { .. })
        ));
    }

    #[test]
    fn zero_coupling_is_unitary() {
        let h = Matrix2::new(c(0.7, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.7, 0.0));
        let system = qubit_system(h);
        let grid = TimeGrid::new(0.01, 200).unwrap();
        let modes = ModeSet::from_triples(&[(0.0, 1.0, c(0.0, 0.0))]).unwrap();
        let noise = crate::noise::sample_noise_modesum(&modes, &grid, 1);
        let rates = integrated_rates(&build_kernel(&modes, &grid).unwrap());
        let psi0 = DVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]);
        let traj = propagate_dephasing(&system, &psi0, &[noise], &[rates]).unwrap();
        for (k, ns) in traj.norms_sq().iter().enumerate() {
            assert_abs_diff_eq!(*ns, 1.0, epsilon = 1e-12);
            let t = grid.time(k);
            // exp(-i h t) on the diagonal hamiltonian.
            let expect0 = c(0.0, -0.7 * t).exp() * psi0[0];
            assert!((traj.state(k)[0] - expect0).norm() < 1e-10);
        }
        assert_abs_diff_eq!(povm_density(&traj, 0), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn constant_noise_closed_form() {
        // Single qubit, H = 0, one mode (g = 1, omega = 0, xi = 0) and a
        // pinned amplitude: psi(t) = exp(sigma_z z* t - t^2/2) psi(0), and
        // the trapezoid step map reproduces it exactly at any dt.
        let system = qubit_system(zero_h());
        let grid = TimeGrid::new(0.05, 40).unwrap();
        let modes = ModeSet::from_triples(&[(1.0, 0.0, c(0.0, 0.0))]).unwrap();
        let amp = c(0.4, -0.3);
        let noise = NoiseTrajectory::from_mode_amplitudes(&modes, &grid, &[amp]).unwrap();
        let z_star = noise.z_star()[0];
        let rates = integrated_rates(&build_kernel(&modes, &grid).unwrap());
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let psi0 = DVector::from_vec(vec![c(inv_sqrt2, 0.0), c(inv_sqrt2, 0.0)]);
        let traj = propagate_dephasing(&system, &psi0, &[noise], &[rates]).unwrap();
        for k in [0, 10, 25, 40] {
            let t = grid.time(k);
            let decay = (-0.5 * t * t).exp();
            let up = (z_star * t).exp() * decay * psi0[0];
            let dn = (-z_star * t).exp() * decay * psi0[1];
            assert!((traj.state(k)[0] - up).norm() < 1e-11, "k = {k}");
            assert!((traj.state(k)[1] - dn).norm() < 1e-11, "k = {k}");
        }
    }

    #[test]
    fn linearity_in_the_initial_state() {
        let system = qubit_system(zero_h());
        let grid = TimeGrid::new(0.02, 100).unwrap();
        let modes = ModeSet::from_triples(&[(0.8, 1.3, c(0.4, 0.1))]).unwrap();
        let noise = crate::noise::sample_noise_modesum(&modes, &grid, 7);
        let rates = integrated_rates(&build_kernel(&modes, &grid).unwrap());
        let psi0 = DVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]);
        let base = propagate_dephasing(
            &system,
            &psi0,
            std::slice::from_ref(&noise),
            std::slice::from_ref(&rates),
        )
        .unwrap();
        // Scaling the initial state (renormalizing for the precondition, then
        // comparing the unnormalized output against the scaled base run).
        let u = c(0.3, 0.4) / 0.5; // unit modulus
        let scaled0 = psi0.map(|v| v * u);
        let scaled = propagate_dephasing(&system, &scaled0, &[noise], &[rates]).unwrap();
        for k in [0, 50, 100] {
            for i in 0..2 {
                assert!((scaled.state(k)[i] - base.state(k)[i] * u).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn grid_refinement_second_order() {
        // On a smooth noise realization from a fixed mode draw, halving dt
        // changes the final state at O(dt^2).
        let system = qubit_system(zero_h());
        let modes =
            ModeSet::from_triples(&[(0.7, 2.1, c(0.3, 0.2)), (0.4, -1.2, c(0.0, 0.0))]).unwrap();
        let amps = vec![c(0.9, -0.2), c(-0.5, 0.7)];
        let psi0 = DVector::from_vec(vec![
            c(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            c(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        ]);
        let run = |n_steps: usize| {
            let grid = TimeGrid::new(2.0 / n_steps as f64, n_steps).unwrap();
            let noise = NoiseTrajectory::from_mode_amplitudes(&modes, &grid, &amps).unwrap();
            let rates = integrated_rates(&build_kernel(&modes, &grid).unwrap());
            let traj = propagate_dephasing(&system, &psi0, &[noise], &[rates]).unwrap();
            traj.state(n_steps).clone()
        };
        let coarse = run(100);
        let mid = run(200);
        let fine = run(400);
        let d1 = (&coarse - &mid).norm();
        let d2 = (&mid - &fine).norm();
        let ratio = d1 / d2;
        assert!(
            ratio > 2.5 && ratio < 6.0,
            "expected about 4x error reduction per halving, got {ratio}"
        );
    }

    #[test]
    fn averaged_density_trivial_and_trace() {
        let system = qubit_system(zero_h());
        let grid = TimeGrid::new(0.05, 20).unwrap();
        let modes = ModeSet::from_triples(&[(0.0, 1.0, c(0.0, 0.0))]).unwrap();
        let noise = crate::noise::sample_noise_modesum(&modes, &grid, 1);
        let rates = integrated_rates(&build_kernel(&modes, &grid).unwrap());
        let psi0 = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let traj = propagate_dephasing(&system, &psi0, &[noise], &[rates]).unwrap();
        let avg = average_density_matrix(&[traj]).unwrap();
        for (k, rho) in avg.rho.iter().enumerate() {
            assert!((rho[(0, 0)] - c(1.0, 0.0)).norm() < 1e-12);
            assert!(avg.trace_dev[k] < 1e-12);
        }
    }

    #[test]
    fn ensemble_dephasing_factor_and_martingale() {
        // One qubit, plus state: the averaged coherence decays by
        // exp(-Gamma(t)) with the closed-form exponent, independent of the
        // squeezing; the mean squared norm stays at one.
        let system = qubit_system(zero_h());
        let grid = TimeGrid::new(0.02, 75).unwrap();
        let base = ModeSet::from_triples(&[
            (0.55, 1.4, c(0.0, 0.0)),
            (0.35, 2.9, c(0.0, 0.0)),
            (0.25, 0.6, c(0.0, 0.0)),
        ])
        .unwrap();
        let squeezed = base
            .with_squeezing(|_, w| C64::from_polar(0.8, 0.9 * w), 1e-3)
            .unwrap();
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let psi0 = DVector::from_vec(vec![c(inv_sqrt2, 0.0), c(inv_sqrt2, 0.0)]);
        let n_samples = 30_000;
        let mut results = Vec::new();
        for modes in [&base, &squeezed] {
            let sampler = ModeSumSampler::new(modes, &grid);
            let rates = integrated_rates(&build_kernel(modes, &grid).unwrap());
            let e = dephasing_ensemble(
                &system,
                &[sampler],
                &[rates],
                &psi0,
                &EnsembleOptions::new(n_samples, 99),
            )
            .unwrap();
            // Mean squared norm = 1 (martingale) within 5 SE.
            for k in [25, 50, 75] {
                assert!(
                    (e.mean_norm_sq[k] - 1.0).abs() < 5.0 * e.se_norm_sq[k].max(1e-9),
                    "norm martingale at k = {k}: {} +- {}",
                    e.mean_norm_sq[k],
                    e.se_norm_sq[k]
                );
            }
            // Coherence decay matches the closed-form exponent within 5 SE.
            for k in [25, 75] {
                let expect = 0.5 * (-base.dephasing_exponent(grid.time(k))).exp();
                let got = e.rho[k][(0, 1)];
                let band = 5.0 * e.se_re[k][(0, 1)].hypot(e.se_im[k][(0, 1)]).max(1e-9);
                assert!(
                    (got - c(expect, 0.0)).norm() < band,
                    "coherence at k = {k}: {got} vs {expect} (band {band})"
                );
            }
            // Populations are frozen for pure dephasing.
            for k in [40, 75] {
                let se = 5.0 * e.se_re[k][(0, 0)].max(1e-9);
                assert!((e.rho[k][(0, 0)].re - 0.5).abs() < se);
            }
            results.push(e);
        }
        // Squeezing independence of the reduced state, entrywise 5 combined SE.
        let (a, b) = (&results[0], &results[1]);
        for k in [10, 40, 75] {
            for i in 0..2 {
                for j in 0..2 {
                    let d = (a.rho[k][(i, j)] - b.rho[k][(i, j)]).norm();
                    let band = a.se_re[k][(i, j)].hypot(a.se_im[k][(i, j)])
                        + b.se_re[k][(i, j)].hypot(b.se_im[k][(i, j)]);
                    assert!(
                        d < 5.0 * band.max(1e-9),
                        "entry ({i},{j}) at k={k}: {d} vs {band}"
                    );
                }
            }
        }
    }

    #[test]
    fn ensemble_is_deterministic() {
        let system = qubit_system(zero_h());
        let grid = TimeGrid::new(0.05, 10).unwrap();
        let modes = ModeSet::from_triples(&[(0.5, 1.0, c(0.2, 0.1))]).unwrap();
        let sampler = ModeSumSampler::new(&modes, &grid);
        let rates = integrated_rates(&build_kernel(&modes, &grid).unwrap());
        let psi0 = DVector::from_vec(vec![
            c(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            c(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        ]);
        let run = || {
            dephasing_ensemble(
                &system,
                std::slice::from_ref(&sampler),
                std::slice::from_ref(&rates),
                &psi0,
                &EnsembleOptions::new(2000, 5),
            )
            .unwrap()
        };
        let a = run();
        let b = run();
        for k in 0..grid.n_points() {
            for i in 0..2 {
                for j in 0..2 {
                    assert_eq!(a.rho[k][(i, j)].re.to_bits(), b.rho[k][(i, j)].re.to_bits());
                }
            }
        }
    }
}
