//! Realizations of the complex Gaussian process driving the unravelings.
//!
//! The target statistics on the grid are zero mean with
//! `<z_t conj(z_s)> = alpha(t, s)` and `<conj(z_t) conj(z_s)> = eta(t, s)`.
//! Two deliberately independent sampling paths are kept, each serving as the
//! other's oracle:
//!
//! * **mode sum** — draw one amplitude per bath mode from the squeezed
//!   Gaussian density `p_xi` and superpose,
//!   `conj(z_t) = -i sum_k g_k exp(i omega_k t) conj(z_k)`;
//! * **covariance factorization** — stack the grid samples into one complex
//!   Gaussian vector, build its augmented second-moment matrix from the
//!   kernels, factor, and transform i.i.d. normals. This path needs no mode
//!   realization and works for any consistent `alpha`/`eta` pair.
//!
//! The per-mode amplitude moments are `<z conj(z)> = 1`, `<z^2> = xi`,
//! forced by consistency between the mode superposition and the kernel
//! definitions; the unit tests pin them against direct numerical integration
//! of `p_xi`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::correlations::{CorrelationKernel, ModeSet};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::linalg::psd_factor;
use crate::rng::stream_rng;
use crate::C64;

/// Relative tolerance for clamping slightly negative eigenvalues of the
/// augmented covariance.
const PSD_REL_TOL: f64 = 1e-10;

/// One realization of the conjugated process `z*_t` on a grid.
#[derive(Debug, Clone)]
pub struct NoiseTrajectory {
    grid: TimeGrid,
    z_star: Vec<C64>,
    seed: u64,
    stream: u64,
    mode_amplitudes: Option<Vec<C64>>,
}

impl NoiseTrajectory {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// Grid samples of `z*_t`; length `n_steps + 1`.
    pub fn z_star(&self) -> &[C64] {
        &self.z_star
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Per-mode amplitudes that generated this trajectory, when mode-sum
    /// sampling was used.
    pub fn mode_amplitudes(&self) -> Option<&[C64]> {
        self.mode_amplitudes.as_deref()
    }

    /// Deterministic trajectory from explicit mode amplitudes (no sampling).
    /// Used to tie sampled trajectories to quadrature nodes of the oracle.
    pub fn from_mode_amplitudes(
        modes: &ModeSet,
        grid: &TimeGrid,
        amplitudes: &[C64],
    ) -> Result<Self> {
        if amplitudes.len() != modes.len() {
            return Err(Error::Dimension(format!(
                "expected {} mode amplitudes, got {}",
                modes.len(),
                amplitudes.len()
            )));
        }
        let z_star = superpose(modes, grid, amplitudes);
        Ok(Self {
            grid: grid.clone(),
            z_star,
            seed: 0,
            stream: 0,
            mode_amplitudes: Some(amplitudes.to_vec()),
        })
    }
}

/// Draw one amplitude from the squeezed density `p_xi`. In principal axes
/// (rotate by `arg(xi)/2`) the real and imaginary parts are independent
/// normals with variances `(1 + |xi|)/2` and `(1 - |xi|)/2`.
pub fn sample_squeezed_amplitude<R: Rng + ?Sized>(xi: C64, rng: &mut R) -> Result<C64> {
    let r = xi.norm();
    if !r.is_finite() || r >= 1.0 {
        return Err(Error::InvalidSqueezing { modulus: r });
    }
    let sx = (0.5 * (1.0 + r)).sqrt();
    let sy = (0.5 * (1.0 - r)).sqrt();
    let u: f64 = rng.sample(StandardNormal);
    let v: f64 = rng.sample(StandardNormal);
    Ok(C64::from_polar(1.0, 0.5 * xi.arg()) * C64::new(sx * u, sy * v))
}

/// One amplitude per mode, each from its own `p_xi`, deterministic in the
/// seed (stream 0 of the generator).
pub fn sample_mode_amplitudes(modes: &ModeSet, seed: u64) -> Vec<C64> {
    let mut rng = stream_rng(seed, 0);
    sample_mode_amplitudes_rng(modes, &mut rng)
}

pub fn sample_mode_amplitudes_rng<R: Rng + ?Sized>(modes: &ModeSet, rng: &mut R) -> Vec<C64> {
    modes
        .modes()
        .iter()
        .map(|m| sample_squeezed_amplitude(m.xi, rng).expect("mode set enforces |xi| < 1"))
        .collect()
}

fn superpose(modes: &ModeSet, grid: &TimeGrid, amplitudes: &[C64]) -> Vec<C64> {
    let n = grid.n_points();
    let mut z_star = vec![C64::default(); n];
    for (m, amp) in modes.modes().iter().zip(amplitudes) {
        let conj_amp = amp.conj();
        for (k, slot) in z_star.iter_mut().enumerate() {
            let phase = C64::new(0.0, -1.0) * m.g * C64::new(0.0, m.omega * grid.time(k)).exp();
            *slot += phase * conj_amp;
        }
    }
    z_star
}

/// Mode-sum sampler with a precomputed phase table, for ensembles.
#[derive(Debug, Clone)]
pub struct ModeSumSampler {
    modes: ModeSet,
    grid: TimeGrid,
    /// `coeff[k][t] = -i g_k exp(i omega_k t)`
    coeff: Vec<Vec<C64>>,
}

impl ModeSumSampler {
    pub fn new(modes: &ModeSet, grid: &TimeGrid) -> Self {
        let coeff = modes
            .modes()
            .iter()
            .map(|m| {
                (0..grid.n_points())
                    .map(|k| {
                        C64::new(0.0, -1.0) * m.g * C64::new(0.0, m.omega * grid.time(k)).exp()
                    })
                    .collect()
            })
            .collect();
        Self {
            modes: modes.clone(),
            grid: grid.clone(),
            coeff,
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn sample(&self, seed: u64, stream: u64) -> NoiseTrajectory {
        let mut rng = stream_rng(seed, stream);
        let amplitudes = sample_mode_amplitudes_rng(&self.modes, &mut rng);
        let mut z_star = vec![C64::default(); self.grid.n_points()];
        for (row, amp) in self.coeff.iter().zip(&amplitudes) {
            let conj_amp = amp.conj();
            for (slot, c) in z_star.iter_mut().zip(row) {
                *slot += c * conj_amp;
            }
        }
        NoiseTrajectory {
            grid: self.grid.clone(),
            z_star,
            seed,
            stream,
            mode_amplitudes: Some(amplitudes),
        }
    }
}

/// Single mode-sum draw (stream 0); deterministic given the seed.
pub fn sample_noise_modesum(modes: &ModeSet, grid: &TimeGrid, seed: u64) -> NoiseTrajectory {
    ModeSumSampler::new(modes, grid).sample(seed, 0)
}

/// Covariance-factorization sampler: draws the grid-sampled process directly
/// from the kernels, with no mode realization.
///
/// The stacked real vector `(Re z, Im z)` has covariance blocks determined by
/// `Gamma = alpha` and `C = conj(eta)` (the `<z z>` block):
/// `Rxx = (Re Gamma + Re C)/2`, `Ryy = (Re Gamma - Re C)/2`,
/// `Rxy = (Im C - Im Gamma)/2`, `Ryx = (Im C + Im Gamma)/2`.
/// An inconsistent `alpha`/`eta` pair shows up as an indefinite covariance
/// and is rejected with the most negative eigenvalue in the error.
#[derive(Debug, Clone)]
pub struct CovarianceSampler {
    grid: TimeGrid,
    factor: DMatrix<f64>,
}

impl CovarianceSampler {
    pub fn new(kernel: &CorrelationKernel) -> Result<Self> {
        let n = kernel.grid().n_points();
        let mut k = DMatrix::<f64>::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let gamma = kernel.alpha()[(i, j)];
                let c = kernel.eta()[(i, j)].conj();
                k[(i, j)] = 0.5 * (gamma.re + c.re);
                k[(i + n, j + n)] = 0.5 * (gamma.re - c.re);
                k[(i, j + n)] = 0.5 * (c.im - gamma.im);
                k[(i + n, j)] = 0.5 * (c.im + gamma.im);
            }
        }
        // Symmetrize rounding noise before factoring.
        let k = 0.5 * (&k + k.transpose());
        let factor = psd_factor(&k, PSD_REL_TOL)?;
        Ok(Self {
            grid: kernel.grid().clone(),
            factor,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn sample(&self, seed: u64, stream: u64) -> NoiseTrajectory {
        let mut rng = stream_rng(seed, stream);
        let m = self.grid.n_points();
        let u: Vec<f64> = (0..2 * m).map(|_| rng.sample(StandardNormal)).collect();
        let mut z_star = vec![C64::default(); m];
        for (i, slot) in z_star.iter_mut().enumerate() {
            let mut re = 0.0;
            let mut im = 0.0;
            for (j, uj) in u.iter().enumerate() {
                re += self.factor[(i, j)] * uj;
                im += self.factor[(i + m, j)] * uj;
            }
            *slot = C64::new(re, -im); // store the conjugate process
        }
        NoiseTrajectory {
            grid: self.grid.clone(),
            z_star,
            seed,
            stream,
            mode_amplitudes: None,
        }
    }
}

/// Single covariance-factorization draw (stream 0).
pub fn sample_noise_covariance(kernel: &CorrelationKernel, seed: u64) -> Result<NoiseTrajectory> {
    Ok(CovarianceSampler::new(kernel)?.sample(seed, 0))
}

/// Streaming second-moment estimator over noise trajectories. Partial
/// accumulators merge by moment addition, so ensembles may be built in
/// ordered blocks and combined deterministically.
#[derive(Debug, Clone)]
pub struct CorrelationAccumulator {
    grid: TimeGrid,
    n: usize,
    sum_mean: Vec<C64>,
    sum_alpha: DMatrix<C64>,
    sum_eta: DMatrix<C64>,
    sumsq_alpha_re: DMatrix<f64>,
    sumsq_alpha_im: DMatrix<f64>,
    sumsq_eta_re: DMatrix<f64>,
    sumsq_eta_im: DMatrix<f64>,
}

impl CorrelationAccumulator {
    pub fn new(grid: &TimeGrid) -> Self {
        let n = grid.n_points();
        Self {
            grid: grid.clone(),
            n: 0,
            sum_mean: vec![C64::default(); n],
            sum_alpha: DMatrix::zeros(n, n),
            sum_eta: DMatrix::zeros(n, n),
            sumsq_alpha_re: DMatrix::zeros(n, n),
            sumsq_alpha_im: DMatrix::zeros(n, n),
            sumsq_eta_re: DMatrix::zeros(n, n),
            sumsq_eta_im: DMatrix::zeros(n, n),
        }
    }

    pub fn n_samples(&self) -> usize {
        self.n
    }

    pub fn add(&mut self, trajectory: &NoiseTrajectory) -> Result<()> {
        if trajectory.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        let zs = trajectory.z_star();
        let n = zs.len();
        self.n += 1;
        for i in 0..n {
            self.sum_mean[i] += zs[i].conj(); // z_t = conj(z*_t)
            for j in 0..n {
                // alpha estimate: z_i conj(z_j) = conj(z*_i) z*_j
                let p = zs[i].conj() * zs[j];
                self.sum_alpha[(i, j)] += p;
                self.sumsq_alpha_re[(i, j)] += p.re * p.re;
                self.sumsq_alpha_im[(i, j)] += p.im * p.im;
                // eta estimate: conj(z_i) conj(z_j) = z*_i z*_j
                let q = zs[i] * zs[j];
                self.sum_eta[(i, j)] += q;
                self.sumsq_eta_re[(i, j)] += q.re * q.re;
                self.sumsq_eta_im[(i, j)] += q.im * q.im;
            }
        }
        Ok(())
    }

    /// Weighted moment addition; associative and order-independent up to
    /// floating-point reassociation.
    pub fn merge(&mut self, other: &CorrelationAccumulator) -> Result<()> {
        if other.grid != self.grid {
            return Err(Error::GridMismatch);
        }
        self.n += other.n;
        for (a, b) in self.sum_mean.iter_mut().zip(&other.sum_mean) {
            *a += b;
        }
        self.sum_alpha += &other.sum_alpha;
        self.sum_eta += &other.sum_eta;
        self.sumsq_alpha_re += &other.sumsq_alpha_re;
        self.sumsq_alpha_im += &other.sumsq_alpha_im;
        self.sumsq_eta_re += &other.sumsq_eta_re;
        self.sumsq_eta_im += &other.sumsq_eta_im;
        Ok(())
    }

    /// Finish the estimate and measure entrywise deviations against a
    /// reference kernel.
    pub fn finalize(&self, reference: &CorrelationKernel) -> Result<NoiseEnsembleStats> {
        if reference.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        if self.n < 1 {
            return Err(Error::Invalid(
                "estimator needs at least one trajectory".into(),
            ));
        }
        let n = self.grid.n_points();
        let inv = 1.0 / self.n as f64;
        let est_alpha = self.sum_alpha.map(|v| v * inv);
        let est_eta = self.sum_eta.map(|v| v * inv);
        let est_mean: Vec<C64> = self.sum_mean.iter().map(|v| v * inv).collect();
        let mut se_alpha = DMatrix::zeros(n, n);
        let mut se_eta = DMatrix::zeros(n, n);
        let mut max_alpha_dev = 0.0f64;
        let mut max_eta_dev = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let ma = est_alpha[(i, j)];
                let var_re = (self.sumsq_alpha_re[(i, j)] * inv - ma.re * ma.re).max(0.0);
                let var_im = (self.sumsq_alpha_im[(i, j)] * inv - ma.im * ma.im).max(0.0);
                se_alpha[(i, j)] = ((var_re + var_im) * inv).sqrt();
                let me = est_eta[(i, j)];
                let var_re = (self.sumsq_eta_re[(i, j)] * inv - me.re * me.re).max(0.0);
                let var_im = (self.sumsq_eta_im[(i, j)] * inv - me.im * me.im).max(0.0);
                se_eta[(i, j)] = ((var_re + var_im) * inv).sqrt();
                max_alpha_dev = max_alpha_dev.max((ma - reference.alpha()[(i, j)]).norm());
                max_eta_dev = max_eta_dev.max((me - reference.eta()[(i, j)]).norm());
            }
        }
        Ok(NoiseEnsembleStats {
            n_samples: self.n,
            est_alpha,
            est_eta,
            est_mean,
            se_alpha,
            se_eta,
            max_alpha_dev,
            max_eta_dev,
        })
    }
}

/// Empirical second moments of an ensemble, with entrywise standard errors
/// and maximum deviations from a reference kernel.
#[derive(Debug, Clone)]
pub struct NoiseEnsembleStats {
    pub n_samples: usize,
    pub est_alpha: DMatrix<C64>,
    pub est_eta: DMatrix<C64>,
    pub est_mean: Vec<C64>,
    /// Combined (re, im) standard error of each `est_alpha` entry.
    pub se_alpha: DMatrix<f64>,
    pub se_eta: DMatrix<f64>,
    pub max_alpha_dev: f64,
    pub max_eta_dev: f64,
}

/// Estimate correlations of a trajectory list against a reference kernel.
pub fn estimate_correlations(
    trajectories: &[NoiseTrajectory],
    reference: &CorrelationKernel,
) -> Result<NoiseEnsembleStats> {
    if trajectories.len() < 2 {
        return Err(Error::Invalid(
            "correlation estimation needs at least two trajectories".into(),
        ));
    }
    let mut acc = CorrelationAccumulator::new(trajectories[0].grid());
    for t in trajectories {
        acc.add(t)?;
    }
    acc.finalize(reference)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlations::build_kernel;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Direct 2D integration of `f(z) p_xi(z)` on a wide uniform grid; the
    /// independent oracle for the per-mode moments.
    fn density_moment<F: Fn(C64) -> C64>(xi: C64, f: F) -> C64 {
        let r = xi.norm();
        let half = 8.0;
        let steps = 400;
        let h = 2.0 * half / steps as f64;
        let norm = 1.0 / (std::f64::consts::PI * (1.0 - r * r).sqrt());
        let mut acc = C64::default();
        for i in 0..steps {
            let x = -half + (i as f64 + 0.5) * h;
            for j in 0..steps {
                let y = -half + (j as f64 + 0.5) * h;
                let z = c(x, y);
                let quad = z.norm_sqr() - (xi.conj() * z * z).re;
                let p = norm * (-quad / (1.0 - r * r)).exp();
                acc += f(z) * p;
            }
        }
        acc * (h * h)
    }

    #[test]
    fn squeezed_density_moments_from_quadrature() {
        for xi in [
            c(0.0, 0.0),
            c(0.6, 0.0),
            C64::from_polar(0.5, std::f64::consts::PI / 3.0),
        ] {
            let total = density_moment(xi, |_| c(1.0, 0.0));
            let zz = density_moment(xi, |z| z * z.conj());
            let z2 = density_moment(xi, |z| z * z);
            let mean = density_moment(xi, |z| z);
            assert_abs_diff_eq!(total.re, 1.0, epsilon = 1e-6);
            assert_abs_diff_eq!(zz.re, 1.0, epsilon = 1e-6);
            assert_abs_diff_eq!(zz.im, 0.0, epsilon = 1e-6);
            assert_abs_diff_eq!(z2.re, xi.re, epsilon = 1e-6);
            assert_abs_diff_eq!(z2.im, xi.im, epsilon = 1e-6);
            assert_abs_diff_eq!(mean.norm(), 0.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn sampler_matches_density_moments() {
        // Monte-Carlo second moments of the amplitude sampler against the
        // quadrature-verified values, for a rotated squeezing.
        let xi = C64::from_polar(0.55, 1.2);
        let mut rng = stream_rng(11, 0);
        let n = 200_000;
        let mut zz = C64::default();
        let mut z2 = C64::default();
        for _ in 0..n {
            let z = sample_squeezed_amplitude(xi, &mut rng).unwrap();
            zz += z * z.conj();
            z2 += z * z;
        }
        let zz = zz / n as f64;
        let z2 = z2 / n as f64;
        // 3 sigma with per-component variance about 1/sqrt(n).
        let tol = 3.5 / (n as f64).sqrt() * 2.0;
        assert_abs_diff_eq!(zz.re, 1.0, epsilon = tol);
        assert_abs_diff_eq!(z2.re, xi.re, epsilon = tol);
        assert_abs_diff_eq!(z2.im, xi.im, epsilon = tol);
    }

    #[test]
    fn rejects_unnormalizable_squeezing() {
        let mut rng = stream_rng(0, 0);
        assert!(sample_squeezed_amplitude(c(1.0, 0.0), &mut rng).is_err());
    }

    #[test]
    fn zero_coupling_gives_zero_noise() {
        let modes = ModeSet::from_triples(&[(0.0, 1.0, c(0.2, 0.0))]).unwrap();
        let grid = TimeGrid::new(0.1, 10).unwrap();
        let traj = sample_noise_modesum(&modes, &grid, 5);
        assert!(traj.z_star().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn single_stationary_mode_is_constant() {
        let modes = ModeSet::from_triples(&[(1.0, 0.0, c(0.0, 0.0))]).unwrap();
        let grid = TimeGrid::new(0.1, 16).unwrap();
        let traj = sample_noise_modesum(&modes, &grid, 9);
        let first = traj.z_star()[0];
        assert!(traj.z_star().iter().all(|z| (z - first).norm() < 1e-14));
    }

    #[test]
    fn seed_determinism_is_bitwise() {
        let modes =
            ModeSet::from_triples(&[(0.7, 1.3, c(0.4, 0.2)), (0.2, -0.8, c(0.0, 0.0))]).unwrap();
        let grid = TimeGrid::new(0.05, 32).unwrap();
        let a = sample_noise_modesum(&modes, &grid, 1234);
        let b = sample_noise_modesum(&modes, &grid, 1234);
        for (x, y) in a.z_star().iter().zip(b.z_star()) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
        let kernel = build_kernel(&modes, &grid).unwrap();
        let sampler = CovarianceSampler::new(&kernel).unwrap();
        let a = sampler.sample(77, 3);
        let b = sampler.sample(77, 3);
        for (x, y) in a.z_star().iter().zip(b.z_star()) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
        }
    }

    #[test]
    fn ensemble_mean_vanishes() {
        let modes =
            ModeSet::from_triples(&[(0.6, 0.9, c(0.3, -0.2)), (0.4, 2.1, c(0.0, 0.5))]).unwrap();
        let grid = TimeGrid::new(0.1, 12).unwrap();
        let sampler = ModeSumSampler::new(&modes, &grid);
        let n = 40_000;
        let mut mean = vec![C64::default(); grid.n_points()];
        for k in 0..n {
            for (m, z) in mean.iter_mut().zip(sampler.sample(3, k as u64).z_star()) {
                *m += z;
            }
        }
        // Component SE is about sqrt(alpha(t,t)/n).
        let se = (modes.alpha_at(0.0).re / n as f64).sqrt();
        for m in &mean {
            let m = m / n as f64;
            assert!(m.re.abs() < 4.0 * se && m.im.abs() < 4.0 * se);
        }
    }

    #[test]
    fn estimator_trivial_cases() {
        let modes = ModeSet::from_triples(&[(0.5, 1.0, c(0.2, 0.1))]).unwrap();
        let grid = TimeGrid::new(0.2, 6).unwrap();
        let kernel = build_kernel(&modes, &grid).unwrap();
        // Single trajectory duplicated: est_alpha is the rank-one outer
        // product z conj(z)^T exactly.
        let t = sample_noise_modesum(&modes, &grid, 4);
        let stats = estimate_correlations(&[t.clone(), t.clone()], &kernel).unwrap();
        for i in 0..grid.n_points() {
            for j in 0..grid.n_points() {
                let zi = t.z_star()[i].conj();
                let zj = t.z_star()[j];
                let expect = zi * zj;
                assert!((stats.est_alpha[(i, j)] - expect).norm() < 1e-14);
            }
        }
        // Zero-coupling ensemble: everything is exactly zero.
        let z_modes = ModeSet::from_triples(&[(0.0, 1.0, c(0.0, 0.0))]).unwrap();
        let z_kernel = build_kernel(&z_modes, &grid).unwrap();
        let ts: Vec<_> = (0..4)
            .map(|k| sample_noise_modesum(&z_modes, &grid, k))
            .collect();
        let stats = estimate_correlations(&ts, &z_kernel).unwrap();
        assert_eq!(stats.max_alpha_dev, 0.0);
        assert_eq!(stats.max_eta_dev, 0.0);
        // Fewer than two trajectories is rejected.
        assert!(estimate_correlations(&[t], &kernel).is_err());
    }

    #[test]
    fn accumulator_merge_equals_sequential() {
        let modes = ModeSet::from_triples(&[(0.6, 1.2, c(0.3, 0.1))]).unwrap();
        let grid = TimeGrid::new(0.1, 8).unwrap();
        let kernel = build_kernel(&modes, &grid).unwrap();
        let sampler = ModeSumSampler::new(&modes, &grid);
        let trajs: Vec<_> = (0..10u64).map(|k| sampler.sample(3, k)).collect();
        let mut whole = CorrelationAccumulator::new(&grid);
        for t in &trajs {
            whole.add(t).unwrap();
        }
        let mut left = CorrelationAccumulator::new(&grid);
        let mut right = CorrelationAccumulator::new(&grid);
        for t in &trajs[..4] {
            left.add(t).unwrap();
        }
        for t in &trajs[4..] {
            right.add(t).unwrap();
        }
        left.merge(&right).unwrap();
        let a = whole.finalize(&kernel).unwrap();
        let b = left.finalize(&kernel).unwrap();
        assert_eq!(a.n_samples, b.n_samples);
        for i in 0..grid.n_points() {
            for j in 0..grid.n_points() {
                assert!((a.est_alpha[(i, j)] - b.est_alpha[(i, j)]).norm() < 1e-14);
                assert!((a.est_eta[(i, j)] - b.est_eta[(i, j)]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn modesum_ensemble_matches_kernel() {
        let modes = ModeSet::from_triples(&[
            (0.8, 1.1, c(0.5, 0.0)),
            (0.5, 2.7, C64::from_polar(0.6, -0.9)),
            (0.3, 0.4, c(0.0, 0.0)),
        ])
        .unwrap();
        let grid = TimeGrid::new(0.15, 10).unwrap();
        let kernel = build_kernel(&modes, &grid).unwrap();
        let sampler = ModeSumSampler::new(&modes, &grid);
        let mut acc = CorrelationAccumulator::new(&grid);
        let n = 30_000;
        for k in 0..n {
            acc.add(&sampler.sample(21, k)).unwrap();
        }
        let stats = acc.finalize(&kernel).unwrap();
        // Central-limit budget: max deviation below 5 max|alpha| / sqrt(n).
        let max_alpha = kernel.alpha().iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(stats.max_alpha_dev < 5.0 * max_alpha / (n as f64).sqrt());
        // Entrywise four-standard-error band.
        for i in 0..grid.n_points() {
            for j in 0..grid.n_points() {
                let da = (stats.est_alpha[(i, j)] - kernel.alpha()[(i, j)]).norm();
                assert!(da <= 4.0 * stats.se_alpha[(i, j)] + 1e-12);
                let de = (stats.est_eta[(i, j)] - kernel.eta()[(i, j)]).norm();
                assert!(de <= 4.0 * stats.se_eta[(i, j)] + 1e-12);
            }
        }
    }

    #[test]
    fn covariance_sampler_zero_eta_estimates_vanish() {
        let modes = ModeSet::from_triples(&[(0.9, 1.5, c(0.0, 0.0))]).unwrap();
        let grid = TimeGrid::new(0.2, 8).unwrap();
        let kernel = build_kernel(&modes, &grid).unwrap();
        let sampler = CovarianceSampler::new(&kernel).unwrap();
        let mut acc = CorrelationAccumulator::new(&grid);
        for k in 0..20_000u64 {
            acc.add(&sampler.sample(8, k)).unwrap();
        }
        let stats = acc.finalize(&kernel).unwrap();
        for i in 0..grid.n_points() {
            for j in 0..grid.n_points() {
                assert!(stats.est_eta[(i, j)].norm() <= 4.0 * stats.se_eta[(i, j)] + 1e-12);
            }
        }
    }

    #[test]
    fn inconsistent_eta_is_rejected_as_indefinite() {
        // |eta| beyond what any |xi| < 1 permits: eta = -2 alpha scaled onto
        // a one-mode kernel corresponds to |<z^2>| = 2 > <|z|^2> = 1.
        let grid = TimeGrid::new(0.1, 6).unwrap();
        let omega = 1.3;
        let bad = CorrelationKernel::from_fn(
            grid,
            move |t, s| c(0.0, -omega * (t - s)).exp(),
            move |t, s| c(0.0, omega * (t + s)).exp() * -2.0,
        );
        match CovarianceSampler::new(&bad) {
            Err(Error::IndefiniteCovariance { min_eigenvalue, .. }) => {
                assert!(min_eigenvalue < 0.0);
            }
            other => panic!("expected indefinite covariance, got {other:?}"),
        }
    }

    #[test]
    fn wick_fourth_moment() {
        // E[z_t z*_t z_s z*_s] = alpha(t,t) alpha(s,s) + |alpha(t,s)|^2
        //                        + |<z_t z_s>|^2.
        let modes = ModeSet::from_triples(&[
            (0.7, 1.2, C64::from_polar(0.5, 0.7)),
            (0.5, -0.6, c(0.3, 0.0)),
        ])
        .unwrap();
        let grid = TimeGrid::new(0.3, 4).unwrap();
        let kernel = build_kernel(&modes, &grid).unwrap();
        let sampler = ModeSumSampler::new(&modes, &grid);
        let (ti, si) = (4, 1);
        let n = 200_000;
        let mut acc = 0.0;
        let mut acc_sq = 0.0;
        for k in 0..n {
            let zs = sampler.sample(17, k as u64);
            let z = |i: usize| zs.z_star()[i].conj();
            let v = (z(ti) * z(ti).conj() * z(si) * z(si).conj()).re;
            acc += v;
            acc_sq += v * v;
        }
        let mean = acc / n as f64;
        let se = ((acc_sq / n as f64 - mean * mean).max(0.0) / n as f64).sqrt();
        let a = kernel.alpha();
        let eta_prime = kernel.eta()[(ti, si)].conj(); // <z_t z_s>
        let expect =
            a[(ti, ti)].re * a[(si, si)].re + a[(ti, si)].norm_sqr() + eta_prime.norm_sqr();
        assert!(
            (mean - expect).abs() < 5.0 * se,
            "wick: mean {mean} expect {expect} se {se}"
        );
    }
}
