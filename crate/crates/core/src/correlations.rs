//! Bath descriptions and correlation kernels.
//!
//! A bath is a set of bosonic modes `(g, omega, xi)`: real coupling `g >= 0`,
//! angular frequency `omega`, and complex squeezing parameter `|xi| < 1`.
//! On a uniform time grid the mode set determines two kernels,
//!
//! ```text
//! alpha(t, s) =  sum_k g_k^2 exp(-i omega_k (t - s))        (hermitian)
//! eta(t, s)   = -sum_k conj(xi_k) g_k^2 exp(i omega_k (t + s))  (non-hermitian)
//! ```
//!
//! `alpha` is stationary and fixed by the microscopic couplings; `eta`
//! depends only on `t + s` and is selected by the squeezing. Continuum baths
//! enter through a midpoint frequency comb so that the kernels stay exactly
//! realizable by a finite mode set, which both the noise sampler and the
//! Fock-space oracle rely on.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::grid::{cumulative_trapezoid_c64, TimeGrid};
use crate::C64;

/// One bath mode: coupling amplitude, angular frequency, squeezing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub g: f64,
    pub omega: f64,
    pub xi: C64,
}

impl Mode {
    pub fn new(g: f64, omega: f64, xi: C64) -> Result<Self> {
        if !g.is_finite() || g < 0.0 {
            return Err(Error::InvalidModes(format!(
                "coupling amplitude must be finite and nonnegative, got {g}"
            )));
        }
        if !omega.is_finite() {
            return Err(Error::InvalidModes(format!(
                "frequency must be finite, got {omega}"
            )));
        }
        if !xi.norm().is_finite() || xi.norm() >= 1.0 {
            return Err(Error::InvalidSqueezing { modulus: xi.norm() });
        }
        Ok(Self { g, omega, xi })
    }
}

/// Discrete bath: a finite list of modes, optionally tagged with the comb
/// spacing it was discretized with (used for the recurrence-time check).
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    modes: Vec<Mode>,
    comb_spacing: Option<f64>,
}

impl ModeSet {
    pub fn new(modes: Vec<Mode>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidModes("mode set must not be empty".into()));
        }
        Ok(Self {
            modes,
            comb_spacing: None,
        })
    }

    /// Convenience constructor from `(g, omega, xi)` triples.
    pub fn from_triples(triples: &[(f64, f64, C64)]) -> Result<Self> {
        let modes = triples
            .iter()
            .map(|&(g, omega, xi)| Mode::new(g, omega, xi))
            .collect::<Result<Vec<_>>>()?;
        Self::new(modes)
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Comb spacing of a discretized continuum, if this set came from one.
    pub fn comb_spacing(&self) -> Option<f64> {
        self.comb_spacing
    }

    /// Copy of this mode set with every squeezing parameter replaced by
    /// `rule(mode_index, omega)`. Outputs with `|xi| >= 1` are clamped to
    /// modulus `1 - clamp_epsilon`.
    pub fn with_squeezing<F>(&self, mut rule: F, clamp_epsilon: f64) -> Result<ModeSet>
    where
        F: FnMut(usize, f64) -> C64,
    {
        if !(clamp_epsilon > 0.0 && clamp_epsilon < 1.0) {
            return Err(Error::Invalid(format!(
                "clamp epsilon must lie in (0, 1), got {clamp_epsilon}"
            )));
        }
        let modes = self
            .modes
            .iter()
            .enumerate()
            .map(|(k, m)| {
                let raw = rule(k, m.omega);
                let xi = clamp_squeezing(raw, clamp_epsilon);
                Mode::new(m.g, m.omega, xi)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ModeSet {
            modes,
            comb_spacing: self.comb_spacing,
        })
    }

    /// `alpha(tau)` evaluated directly from the mode sum.
    pub fn alpha_at(&self, tau: f64) -> C64 {
        self.modes
            .iter()
            .map(|m| C64::new(0.0, -m.omega * tau).exp() * (m.g * m.g))
            .sum()
    }

    /// `eta(t, s)` evaluated directly from the mode sum.
    pub fn eta_at(&self, t: f64, s: f64) -> C64 {
        -self
            .modes
            .iter()
            .map(|m| m.xi.conj() * C64::new(0.0, m.omega * (t + s)).exp() * (m.g * m.g))
            .sum::<C64>()
    }

    /// Decoherence exponent of a pure-dephasing qubit coupled to this bath:
    /// the closed-form double time integral of `4 Re alpha`, i.e.
    /// `Gamma(t) = sum_k 4 g_k^2 (1 - cos(omega_k t)) / omega_k^2`,
    /// independent of the squeezing. This is the displacement-operator
    /// solution of the independent-boson model and serves as an exact
    /// reference throughout the test suites.
    pub fn dephasing_exponent(&self, t: f64) -> f64 {
        self.modes
            .iter()
            .map(|m| {
                let g2 = m.g * m.g;
                if m.omega.abs() * t.abs() < 1e-8 {
                    // (1 - cos x)/x^2 -> 1/2 as x -> 0, times 4 g^2 t^2 / t^2
                    2.0 * g2 * t * t
                } else {
                    4.0 * g2 * (1.0 - (m.omega * t).cos()) / (m.omega * m.omega)
                }
            })
            .sum()
    }

    /// Closed form of the accumulated dephasing rate
    /// `int_0^T gamma(s) ds` with `gamma(s) = 4 Re int_0^s (alpha + eta)`,
    /// evaluated from the mode sum with the squeezing carried by each mode.
    /// With `w = int_0^T exp(i omega s) ds` the per-mode contribution is
    /// `2 g^2 (|w|^2 - Re(conj(xi) w^2))`.
    pub fn accumulated_rate(&self, target: f64) -> f64 {
        self.modes
            .iter()
            .map(|m| {
                let g2 = m.g * m.g;
                let w = phase_integral(m.omega, target);
                2.0 * g2 * ((w.norm_sqr()) - (m.xi.conj() * w * w).re)
            })
            .sum()
    }

    fn tag_comb(mut self, spacing: f64) -> Self {
        self.comb_spacing = Some(spacing);
        self
    }
}

/// `int_0^t exp(i omega s) ds`, with the `omega -> 0` limit handled.
pub(crate) fn phase_integral(omega: f64, t: f64) -> C64 {
    if omega.abs() * t.abs() < 1e-12 {
        C64::new(t, 0.5 * omega * t * t)
    } else {
        (C64::new(0.0, omega * t).exp() - 1.0) / C64::new(0.0, omega)
    }
}

/// Clamp `|xi| >= 1` to modulus `1 - eps`, preserving the phase.
pub(crate) fn clamp_squeezing(xi: C64, eps: f64) -> C64 {
    let r = xi.norm();
    if r >= 1.0 - f64::EPSILON {
        xi / r * (1.0 - eps)
    } else {
        xi
    }
}

/// Families of continuum spectral densities `J(omega)` on `omega > 0`.
///
/// The power-law families use `J(omega) = a * omega^p * exp(-omega/cutoff)`
/// with `p = 1` (ohmic) and `p = 3` (super-ohmic). `Markov` is flat,
/// `J = rate / (2 pi)`, whose wide-band limit is memoryless; it also enables
/// the analytic delta-kernel rates in [`markov_rates`].
#[derive(Debug, Clone, PartialEq)]
pub enum SpectralDensityModel {
    Markov {
        rate: f64,
    },
    Ohmic {
        amplitude: f64,
        cutoff: f64,
    },
    SuperOhmic {
        amplitude: f64,
        cutoff: f64,
    },
    /// Tabulated `(omega, J)` samples, linearly interpolated.
    CustomTable {
        points: Vec<(f64, f64)>,
    },
}

impl SpectralDensityModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Markov { rate } => {
                if !rate.is_finite() || *rate <= 0.0 {
                    return Err(Error::InvalidSpectralDensity(format!(
                        "markov rate must be positive, got {rate}"
                    )));
                }
            }
            Self::Ohmic { amplitude, cutoff } | Self::SuperOhmic { amplitude, cutoff } => {
                if !amplitude.is_finite()
                    || *amplitude <= 0.0
                    || !cutoff.is_finite()
                    || *cutoff <= 0.0
                {
                    return Err(Error::InvalidSpectralDensity(format!(
                        "amplitude and cutoff must be positive, got {amplitude}, {cutoff}"
                    )));
                }
            }
            Self::CustomTable { points } => {
                if points.len() < 2 {
                    return Err(Error::InvalidSpectralDensity(
                        "custom table needs at least two points".into(),
                    ));
                }
                let mut prev = f64::NEG_INFINITY;
                for &(w, j) in points {
                    if w <= prev {
                        return Err(Error::InvalidSpectralDensity(
                            "custom table frequencies must be strictly increasing".into(),
                        ));
                    }
                    if j < 0.0 {
                        return Err(Error::InvalidSpectralDensity(
                            "spectral density values must be nonnegative".into(),
                        ));
                    }
                    prev = w;
                }
            }
        }
        Ok(())
    }

    /// `J(omega)`; zero outside the tabulated range for custom tables.
    pub fn density(&self, omega: f64) -> f64 {
        match self {
            Self::Markov { rate } => rate / (2.0 * std::f64::consts::PI),
            Self::Ohmic { amplitude, cutoff } => amplitude * omega * (-omega / cutoff).exp(),
            Self::SuperOhmic { amplitude, cutoff } => {
                amplitude * omega.powi(3) * (-omega / cutoff).exp()
            }
            Self::CustomTable { points } => {
                if omega < points[0].0 || omega > points[points.len() - 1].0 {
                    return 0.0;
                }
                let idx = points.partition_point(|&(w, _)| w <= omega).max(1);
                let (w0, j0) = points[idx - 1];
                let (w1, j1) = points[(idx).min(points.len() - 1)];
                if w1 == w0 {
                    j0
                } else {
                    j0 + (j1 - j0) * (omega - w0) / (w1 - w0)
                }
            }
        }
    }
}

/// Discretize a continuum spectral density into a midpoint frequency comb:
/// `omega_k = (k - 1/2) d_omega` with `d_omega = omega_max / n_modes` and
/// `g_k^2 = J(omega_k) d_omega`. The squeezing of mode `k` is
/// `squeezing_rule(omega_k)`; outputs with `|xi| >= 1` are rejected.
///
/// The resulting discrete `alpha` approximates the continuum transform
/// `int d_omega J(omega) exp(-i omega (t-s))` up to the comb recurrence time
/// `2 pi / d_omega`, which [`build_kernel`] checks against the grid horizon.
pub fn discretize_spectral_density<F>(
    model: &SpectralDensityModel,
    omega_max: f64,
    n_modes: usize,
    squeezing_rule: F,
) -> Result<ModeSet>
where
    F: Fn(f64) -> C64,
{
    model.validate()?;
    if !omega_max.is_finite() || omega_max <= 0.0 {
        return Err(Error::InvalidSpectralDensity(format!(
            "omega_max must be positive, got {omega_max}"
        )));
    }
    if n_modes == 0 {
        return Err(Error::InvalidSpectralDensity(
            "n_modes must be at least 1".into(),
        ));
    }
    let d_omega = omega_max / n_modes as f64;
    let mut modes = Vec::with_capacity(n_modes);
    for k in 0..n_modes {
        let omega = (k as f64 + 0.5) * d_omega;
        let g = (model.density(omega).max(0.0) * d_omega).sqrt();
        let xi = squeezing_rule(omega);
        if !xi.norm().is_finite() || xi.norm() >= 1.0 {
            return Err(Error::InvalidSqueezing { modulus: xi.norm() });
        }
        modes.push(Mode::new(g, omega, xi)?);
    }
    Ok(ModeSet::new(modes)?.tag_comb(d_omega))
}

/// Like [`discretize_spectral_density`] but over a symmetric window
/// `[-omega_max, omega_max]`, for kernels whose density extends to negative
/// frequencies (e.g. the lorentzian comb realizing an exponential
/// `alpha(t-s)`).
pub fn discretize_symmetric<F, G>(
    density: F,
    omega_max: f64,
    n_modes: usize,
    squeezing_rule: G,
) -> Result<ModeSet>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> C64,
{
    if !omega_max.is_finite() || omega_max <= 0.0 {
        return Err(Error::InvalidSpectralDensity(format!(
            "omega_max must be positive, got {omega_max}"
        )));
    }
    if n_modes == 0 {
        return Err(Error::InvalidSpectralDensity(
            "n_modes must be at least 1".into(),
        ));
    }
    let d_omega = 2.0 * omega_max / n_modes as f64;
    let mut modes = Vec::with_capacity(n_modes);
    for k in 0..n_modes {
        let omega = -omega_max + (k as f64 + 0.5) * d_omega;
        let g = (density(omega).max(0.0) * d_omega).sqrt();
        let xi = squeezing_rule(omega);
        if !xi.norm().is_finite() || xi.norm() >= 1.0 {
            return Err(Error::InvalidSqueezing { modulus: xi.norm() });
        }
        modes.push(Mode::new(g, omega, xi)?);
    }
    Ok(ModeSet::new(modes)?.tag_comb(d_omega))
}

/// The two correlation kernels sampled on a uniform grid, stored as full
/// `(n_points x n_points)` matrices.
#[derive(Debug, Clone)]
pub struct CorrelationKernel {
    grid: TimeGrid,
    alpha: DMatrix<C64>,
    eta: DMatrix<C64>,
}

impl CorrelationKernel {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn alpha(&self) -> &DMatrix<C64> {
        &self.alpha
    }

    pub fn eta(&self) -> &DMatrix<C64> {
        &self.eta
    }

    /// Build a kernel from explicit matrices. Hermiticity of `alpha` and
    /// symmetry of `eta` are validated within `tol`.
    pub fn from_matrices(
        grid: TimeGrid,
        alpha: DMatrix<C64>,
        eta: DMatrix<C64>,
        tol: f64,
    ) -> Result<Self> {
        let n = grid.n_points();
        if alpha.nrows() != n || alpha.ncols() != n || eta.nrows() != n || eta.ncols() != n {
            return Err(Error::Dimension(format!(
                "kernel matrices must be {n} x {n} for this grid"
            )));
        }
        let defect = crate::linalg::max_hermiticity_defect(&alpha);
        let scale = alpha
            .iter()
            .map(|v| v.norm())
            .fold(0.0f64, f64::max)
            .max(1e-300);
        if defect > tol * scale {
            return Err(Error::NotHermitian(defect));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if (eta[(i, j)] - eta[(j, i)]).norm() > tol * scale.max(1.0) {
                    return Err(Error::Invalid(
                        "eta matrix must be symmetric (it depends only on t + s)".into(),
                    ));
                }
            }
        }
        Ok(Self { grid, alpha, eta })
    }

    /// Build a kernel by sampling closures `alpha(t, s)` and `eta(t, s)`.
    pub fn from_fn<A, E>(grid: TimeGrid, alpha_fn: A, eta_fn: E) -> Self
    where
        A: Fn(f64, f64) -> C64,
        E: Fn(f64, f64) -> C64,
    {
        let n = grid.n_points();
        let mut alpha = DMatrix::zeros(n, n);
        let mut eta = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                alpha[(i, j)] = alpha_fn(grid.time(i), grid.time(j));
                eta[(i, j)] = eta_fn(grid.time(i), grid.time(j));
            }
        }
        Self { grid, alpha, eta }
    }
}

/// Evaluate the mode-sum kernels on a grid.
///
/// If the mode set came from a frequency comb, the comb recurrence time
/// `2 pi / d_omega` must exceed the grid horizon, otherwise the discrete
/// kernel would revive spuriously inside the simulated window.
pub fn build_kernel(modes: &ModeSet, grid: &TimeGrid) -> Result<CorrelationKernel> {
    if let Some(d_omega) = modes.comb_spacing() {
        let recurrence = 2.0 * std::f64::consts::PI / d_omega;
        if recurrence <= grid.horizon() {
            return Err(Error::RecurrenceTime {
                recurrence,
                horizon: grid.horizon(),
            });
        }
    }
    let n = grid.n_points();
    let mut alpha = DMatrix::zeros(n, n);
    let mut eta = DMatrix::zeros(n, n);
    // alpha depends on i - j and eta on i + j only, so evaluate each mode sum
    // once per distinct value and fan out.
    let mut alpha_of_lag = vec![C64::default(); n];
    for (lag, slot) in alpha_of_lag.iter_mut().enumerate() {
        *slot = modes.alpha_at(grid.time(lag));
    }
    let mut eta_of_sum = vec![C64::default(); 2 * n - 1];
    for (s, slot) in eta_of_sum.iter_mut().enumerate() {
        *slot = modes.eta_at(grid.time(s), 0.0);
    }
    for i in 0..n {
        for j in 0..n {
            alpha[(i, j)] = if i >= j {
                alpha_of_lag[i - j]
            } else {
                alpha_of_lag[j - i].conj()
            };
            eta[(i, j)] = eta_of_sum[i + j];
        }
    }
    Ok(CorrelationKernel {
        grid: grid.clone(),
        alpha,
        eta,
    })
}

/// Time-local integrated rates derived from a kernel:
/// `a(t) = int_0^t alpha(t, s) ds`, `e(t) = int_0^t eta(t, s) ds`
/// (composite trapezoid on the grid), and the dephasing rate
/// `gamma(t) = 4 Re(a(t) + e(t))`.
#[derive(Debug, Clone)]
pub struct IntegratedRates {
    grid: TimeGrid,
    a: Vec<C64>,
    e: Vec<C64>,
    gamma: Vec<f64>,
}

impl IntegratedRates {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn a(&self) -> &[C64] {
        &self.a
    }

    pub fn e(&self) -> &[C64] {
        &self.e
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    /// `a(t) + e(t)` per grid point; the deterministic drift entering the
    /// dephasing propagator.
    pub fn drift(&self) -> Vec<C64> {
        self.a.iter().zip(&self.e).map(|(a, e)| a + e).collect()
    }

    /// Cumulative trapezoidal integral of `gamma`, entry `k` holding
    /// `int_0^{t_k} gamma(s) ds`.
    pub fn gamma_integral(&self) -> Vec<f64> {
        crate::grid::cumulative_trapezoid_f64(&self.gamma, self.grid.dt())
    }
}

/// Trapezoidal integrated rates of a grid kernel.
pub fn integrated_rates(kernel: &CorrelationKernel) -> IntegratedRates {
    let grid = kernel.grid().clone();
    let n = grid.n_points();
    let dt = grid.dt();
    let mut a = Vec::with_capacity(n);
    let mut e = Vec::with_capacity(n);
    for i in 0..n {
        let row_a: Vec<C64> = (0..=i).map(|j| kernel.alpha()[(i, j)]).collect();
        let row_e: Vec<C64> = (0..=i).map(|j| kernel.eta()[(i, j)]).collect();
        a.push(*cumulative_trapezoid_c64(&row_a, dt).last().unwrap());
        e.push(*cumulative_trapezoid_c64(&row_e, dt).last().unwrap());
    }
    let gamma = a.iter().zip(&e).map(|(a, e)| 4.0 * (a + e).re).collect();
    IntegratedRates { grid, a, e, gamma }
}

/// Analytic delta-kernel rates for a memoryless bath with decay rate
/// `rate`: `a(t) = rate / 2` (in the limiting sense at `t = 0`), `e = 0`,
/// `gamma = 2 rate`. The delta correlation is never materialized on a grid.
pub fn markov_rates(rate: f64, grid: &TimeGrid) -> Result<IntegratedRates> {
    if !rate.is_finite() || rate <= 0.0 {
        return Err(Error::InvalidSpectralDensity(format!(
            "markov rate must be positive, got {rate}"
        )));
    }
    let n = grid.n_points();
    Ok(IntegratedRates {
        grid: grid.clone(),
        a: vec![C64::new(0.5 * rate, 0.0); n],
        e: vec![C64::default(); n],
        gamma: vec![2.0 * rate; n],
    })
}
