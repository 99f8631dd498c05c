//! Brute-force ground truth in a truncated Fock space.
//!
//! For a handful of discrete modes the composite Schrödinger equation is
//! integrated directly in the interaction picture,
//!
//! ```text
//! i dPsi/dt = [H_S + sum_k g_k (L bdag_k e^{i w_k t} + Ldag b_k e^{-i w_k t})] Psi,
//! ```
//!
//! with the bath starting in the vacuum. Relative states are extracted by
//! contracting with dual squeezed Bargmann states, whose Fock coefficients
//! follow the two-term recurrence `c_{n+1} = (z c_n - xi sqrt(n) c_{n-1}) /
//! sqrt(n+1)`, `c_0 = 1`. Quadrature over the squeezed Gaussian measure then
//! reconstructs the reduced state, which must match the partial trace; the
//! same machinery verifies the stochastic equation term by term, including
//! the non-hermitian kernel contribution.

use nalgebra::{DMatrix, DVector};

use crate::correlations::{phase_integral, ModeSet};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::ode::{integrate, AdaptiveOptions};
use crate::quadrature::MultiModeRule;
use crate::C64;

/// Cap on mode count for composite evolution.
pub const MAX_EVOLVE_MODES: usize = 4;
/// Cap on mode count for quadrature-based checks (two complex planes).
pub const MAX_QUADRATURE_MODES: usize = 2;

/// A small discrete bath with a Fock-space truncation per mode.
#[derive(Debug, Clone)]
pub struct FockBath {
    modes: ModeSet,
    n_max: usize,
}

impl FockBath {
    pub fn new(modes: ModeSet, n_max: usize) -> Result<Self> {
        if modes.len() > MAX_EVOLVE_MODES {
            return Err(Error::TooManyModes {
                n: modes.len(),
                cap: MAX_EVOLVE_MODES,
            });
        }
        if n_max < 2 {
            return Err(Error::Invalid("fock truncation must be at least 2".into()));
        }
        Ok(Self { modes, n_max })
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    /// Occupation levels per mode, `n_max + 1`.
    pub fn fock_dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn bath_dim(&self) -> usize {
        self.fock_dim().pow(self.n_modes() as u32)
    }
}

/// Pure state of system plus truncated bath; amplitudes are stored with the
/// system index slowest and mode occupations row-major after it.
#[derive(Debug, Clone)]
pub struct CompositeState {
    sys_dim: usize,
    fock_dim: usize,
    n_modes: usize,
    amp: DVector<C64>,
    time: f64,
}

impl CompositeState {
    /// `psi_s (x) |0...0>`.
    pub fn from_system_vacuum(psi_s: &DVector<C64>, bath: &FockBath) -> Result<Self> {
        let norm = psi_s.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::UnnormalizedState((norm - 1.0).abs()));
        }
        let sys_dim = psi_s.len();
        let bath_dim = bath.bath_dim();
        let mut amp = DVector::zeros(sys_dim * bath_dim);
        for s in 0..sys_dim {
            amp[s * bath_dim] = psi_s[s];
        }
        Ok(Self {
            sys_dim,
            fock_dim: bath.fock_dim(),
            n_modes: bath.n_modes(),
            amp,
            time: 0.0,
        })
    }

    pub fn sys_dim(&self) -> usize {
        self.sys_dim
    }

    pub fn bath_dim(&self) -> usize {
        self.fock_dim.pow(self.n_modes as u32)
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amp
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn norm(&self) -> f64 {
        self.amp.norm()
    }

    /// Reduced system density matrix by partial trace over the bath.
    pub fn partial_trace(&self) -> DMatrix<C64> {
        let db = self.bath_dim();
        let mut rho = DMatrix::zeros(self.sys_dim, self.sys_dim);
        for s1 in 0..self.sys_dim {
            for s2 in 0..self.sys_dim {
                let mut acc = C64::default();
                for b in 0..db {
                    acc += self.amp[s1 * db + b] * self.amp[s2 * db + b].conj();
                }
                rho[(s1, s2)] = acc;
            }
        }
        rho
    }

    /// Population in the top two occupation levels of each mode; the
    /// truncation-quality diagnostic.
    pub fn top_level_population(&self) -> Vec<f64> {
        let db = self.bath_dim();
        let mut leak = vec![0.0; self.n_modes];
        for idx in 0..self.amp.len() {
            let b = idx % db;
            let p = self.amp[idx].norm_sqr();
            for (m, slot) in leak.iter_mut().enumerate() {
                let n = (b / self.fock_dim.pow((self.n_modes - 1 - m) as u32)) % self.fock_dim;
                if n + 2 >= self.fock_dim {
                    *slot += p;
                }
            }
        }
        leak
    }
}

/// Matrix-free application of the interaction-picture generator.
struct CompositeGenerator {
    h_s: DMatrix<C64>,
    l: DMatrix<C64>,
    l_dag: DMatrix<C64>,
    modes: Vec<(f64, f64)>, // (g, omega)
    sys_dim: usize,
    fock_dim: usize,
    strides: Vec<usize>,
    bath_dim: usize,
    scratch_l: DVector<C64>,
    scratch_ld: DVector<C64>,
}

impl CompositeGenerator {
    fn new(h_s: &DMatrix<C64>, l: &DMatrix<C64>, bath: &FockBath, sys_dim: usize) -> Self {
        let n_modes = bath.n_modes();
        let fock_dim = bath.fock_dim();
        let strides: Vec<usize> = (0..n_modes)
            .map(|m| fock_dim.pow((n_modes - 1 - m) as u32))
            .collect();
        let dim = sys_dim * bath.bath_dim();
        Self {
            h_s: h_s.clone(),
            l: l.clone(),
            l_dag: l.adjoint(),
            modes: bath
                .modes()
                .modes()
                .iter()
                .map(|m| (m.g, m.omega))
                .collect(),
            sys_dim,
            fock_dim,
            strides,
            bath_dim: bath.bath_dim(),
            scratch_l: DVector::zeros(dim),
            scratch_ld: DVector::zeros(dim),
        }
    }

    fn apply_system_op(&self, op: &DMatrix<C64>, psi: &DVector<C64>, out: &mut DVector<C64>) {
        let db = self.bath_dim;
        for s1 in 0..self.sys_dim {
            for b in 0..db {
                let mut acc = C64::default();
                for s2 in 0..self.sys_dim {
                    let v = op[(s1, s2)];
                    if v != C64::default() {
                        acc += v * psi[s2 * db + b];
                    }
                }
                out[s1 * db + b] = acc;
            }
        }
    }

    /// `out = -i H_I(t) psi`.
    fn apply(&mut self, t: f64, psi: &DVector<C64>, out: &mut DVector<C64>) {
        let mi = C64::new(0.0, -1.0);
        // System part.
        let db = self.bath_dim;
        for s1 in 0..self.sys_dim {
            for b in 0..db {
                let mut acc = C64::default();
                for s2 in 0..self.sys_dim {
                    let v = self.h_s[(s1, s2)];
                    if v != C64::default() {
                        acc += v * psi[s2 * db + b];
                    }
                }
                out[s1 * db + b] = mi * acc;
            }
        }
        if self.modes.is_empty() {
            return;
        }
        // Bath couplings: precompute L psi and Ldag psi once per call.
        let mut scratch_l = std::mem::replace(&mut self.scratch_l, DVector::zeros(0));
        let mut scratch_ld = std::mem::replace(&mut self.scratch_ld, DVector::zeros(0));
        self.apply_system_op(&self.l, psi, &mut scratch_l);
        self.apply_system_op(&self.l_dag, psi, &mut scratch_ld);
        for (m, &(g, omega)) in self.modes.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            let up = mi * g * C64::new(0.0, omega * t).exp(); // L bdag branch
            let dn = mi * g * C64::new(0.0, -omega * t).exp(); // Ldag b branch
            let stride = self.strides[m];
            let span = stride * self.fock_dim;
            for idx in 0..psi.len() {
                let n = (idx % span) / stride;
                // bdag: out[n] += sqrt(n) * (L psi)[n - 1]
                if n >= 1 {
                    out[idx] += up * (n as f64).sqrt() * scratch_l[idx - stride];
                }
                // b: out[n] += sqrt(n + 1) * (Ldag psi)[n + 1]
                if n + 1 < self.fock_dim {
                    out[idx] += dn * ((n + 1) as f64).sqrt() * scratch_ld[idx + stride];
                }
            }
        }
        self.scratch_l = scratch_l;
        self.scratch_ld = scratch_ld;
    }
}

#[derive(Debug, Clone)]
pub struct EvolveOptions {
    pub integrator: AdaptiveOptions,
    /// Flag threshold for the top-two-level population of any mode.
    pub leakage_threshold: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            integrator: AdaptiveOptions::default(),
            leakage_threshold: 1e-6,
        }
    }
}

/// Composite states at every grid time plus diagnostics.
#[derive(Debug, Clone)]
pub struct CompositeEvolution {
    pub grid: TimeGrid,
    pub states: Vec<CompositeState>,
    /// `max_k | ||Psi(t_k)|| - 1 |`.
    pub norm_drift: f64,
    /// Final-state top-two-level population per mode.
    pub leakage: Vec<f64>,
    pub leakage_ok: bool,
}

/// Integrate the composite Schrödinger equation across the grid, storing the
/// state at every grid point. The result is flagged (not failed) when the
/// truncation leaks.
pub fn evolve_composite(
    h_s: &DMatrix<C64>,
    l_op: &DMatrix<C64>,
    bath: &FockBath,
    grid: &TimeGrid,
    initial: &CompositeState,
    opts: &EvolveOptions,
) -> Result<CompositeEvolution> {
    let states = evolve_at_times(
        h_s,
        l_op,
        bath,
        &grid.times().collect::<Vec<_>>(),
        initial,
        opts,
    )?;
    let norm_drift = states
        .iter()
        .map(|s| (s.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    let leakage = states.last().expect("nonempty grid").top_level_population();
    let leakage_ok = leakage.iter().all(|&p| p < opts.leakage_threshold);
    Ok(CompositeEvolution {
        grid: grid.clone(),
        states,
        norm_drift,
        leakage,
        leakage_ok,
    })
}

/// Evolve through an increasing list of times (starting at the initial
/// state's time) and return the state at each of them.
pub fn evolve_at_times(
    h_s: &DMatrix<C64>,
    l_op: &DMatrix<C64>,
    bath: &FockBath,
    times: &[f64],
    initial: &CompositeState,
    opts: &EvolveOptions,
) -> Result<Vec<CompositeState>> {
    if h_s.nrows() != initial.sys_dim || l_op.nrows() != initial.sys_dim {
        return Err(Error::Dimension(
            "system operators must match the system dimension".into(),
        ));
    }
    let mut gen = CompositeGenerator::new(h_s, l_op, bath, initial.sys_dim);
    let mut out = Vec::with_capacity(times.len());
    let mut current = initial.clone();
    for &t in times {
        if t < current.time - 1e-12 {
            return Err(Error::Integration("times must be nondecreasing".into()));
        }
        let amp = integrate(
            |tt, y, dy| gen.apply(tt, y, dy),
            current.time,
            t,
            &current.amp,
            &opts.integrator,
        )?;
        current = CompositeState {
            amp,
            time: t,
            ..current
        };
        out.push(current.clone());
    }
    Ok(out)
}

/// Fock coefficients of the dual squeezed Bargmann state, evaluated directly
/// in the starred arguments: `d_n = c_n(z*, xi*)` with
/// `c_{n+1} = (z c_n - xi sqrt(n) c_{n-1}) / sqrt(n+1)`, `c_0 = 1`.
pub fn bargmann_dual_coeffs(z_star: C64, xi_star: C64, n_max: usize) -> Result<Vec<C64>> {
    let mut c = Vec::with_capacity(n_max + 1);
    c.push(C64::new(1.0, 0.0));
    let mut prev = C64::default();
    let mut cur = C64::new(1.0, 0.0);
    for n in 0..n_max {
        let next = (z_star * cur - xi_star * (n as f64).sqrt() * prev) / ((n + 1) as f64).sqrt();
        if !next.re.is_finite() || next.norm() > 1e100 {
            return Err(Error::ProjectionOverflow {
                z_abs: z_star.norm(),
            });
        }
        c.push(next);
        prev = cur;
        cur = next;
    }
    Ok(c)
}

/// Contract a composite state with dual Bargmann states given by their
/// starred labels; returns the unnormalized relative system state, an
/// analytic function of `z*` and `xi*`.
pub fn project_relative_state_dual(
    psi: &CompositeState,
    z_star: &[C64],
    xi_star: &[C64],
) -> Result<DVector<C64>> {
    if z_star.len() != psi.n_modes || xi_star.len() != psi.n_modes {
        return Err(Error::Dimension(format!(
            "expected {} mode labels",
            psi.n_modes
        )));
    }
    for xi in xi_star {
        if xi.norm() >= 1.0 {
            return Err(Error::InvalidSqueezing { modulus: xi.norm() });
        }
    }
    let duals: Vec<Vec<C64>> = z_star
        .iter()
        .zip(xi_star)
        .map(|(&z, &xi)| bargmann_dual_coeffs(z, xi, psi.fock_dim - 1))
        .collect::<Result<_>>()?;
    let db = psi.bath_dim();
    let mut rel = DVector::zeros(psi.sys_dim);
    for b in 0..db {
        let mut weight = C64::new(1.0, 0.0);
        let mut rem = b;
        for d in duals.iter().rev() {
            weight *= d[rem % psi.fock_dim];
            rem /= psi.fock_dim;
        }
        if weight == C64::default() {
            continue;
        }
        for s in 0..psi.sys_dim {
            rel[s] += weight * psi.amp[s * db + b];
        }
    }
    Ok(rel)
}

/// Contract with the dual of the ket labeled `(z, xi)`: the dual coefficients
/// are the conjugated ket coefficients.
pub fn project_relative_state(psi: &CompositeState, z: &[C64], xi: &[C64]) -> Result<DVector<C64>> {
    let z_star: Vec<C64> = z.iter().map(C64::conj).collect();
    let xi_star: Vec<C64> = xi.iter().map(C64::conj).collect();
    project_relative_state_dual(psi, &z_star, &xi_star)
}

#[derive(Debug, Clone)]
pub struct QuadratureSpec {
    pub nodes_per_axis: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { nodes_per_axis: 40 }
    }
}

/// Quadrature reconstruction of the reduced state from relative projectors.
#[derive(Debug, Clone)]
pub struct QuadratureAverage {
    pub rho: DMatrix<C64>,
    /// Max-abs deviation from the partial trace.
    pub partial_trace_residual: f64,
    /// `| sum_nodes w ||psi_rel||^2 - 1 |`, the completeness check.
    pub identity_residual: f64,
}

/// Average the relative projectors over the squeezed Gaussian measure with a
/// tensor Gauss–Hermite rule in principal axes. The squeezing used for the
/// expansion may differ from the bath's; the reduced state cannot depend
/// on it.
pub fn quadrature_average(
    psi: &CompositeState,
    xi: &[C64],
    spec: &QuadratureSpec,
) -> Result<QuadratureAverage> {
    if psi.n_modes > MAX_QUADRATURE_MODES {
        return Err(Error::TooManyModes {
            n: psi.n_modes,
            cap: MAX_QUADRATURE_MODES,
        });
    }
    if xi.len() != psi.n_modes {
        return Err(Error::Dimension(format!(
            "expected {} squeezing labels",
            psi.n_modes
        )));
    }
    let rule = MultiModeRule::new(xi, spec.nodes_per_axis)?;
    let xi_star: Vec<C64> = xi.iter().map(C64::conj).collect();
    let mut rho = DMatrix::<C64>::zeros(psi.sys_dim, psi.sys_dim);
    let mut identity = 0.0;
    for node in 0..rule.len() {
        let (z, w) = rule.node(node);
        let z_star: Vec<C64> = z.iter().map(C64::conj).collect();
        let rel = project_relative_state_dual(psi, &z_star, &xi_star)?;
        identity += w * rel.norm_squared();
        for i in 0..psi.sys_dim {
            for j in 0..psi.sys_dim {
                rho[(i, j)] += rel[i] * rel[j].conj() * w;
            }
        }
    }
    let exact = psi.partial_trace();
    let partial_trace_residual = (&rho - &exact).iter().map(|v| v.norm()).fold(0.0, f64::max);
    Ok(QuadratureAverage {
        rho,
        partial_trace_residual,
        identity_residual: (identity - 1.0).abs(),
    })
}

/// Exact coherence factor of a pure-dephasing qubit coupled to `modes`:
/// `exp(-Gamma(t))` with the closed-form independent-boson exponent.
pub fn exact_dephasing_factor(modes: &ModeSet, t: f64) -> f64 {
    (-modes.dephasing_exponent(t)).exp()
}

#[derive(Debug, Clone)]
pub struct ResidualOptions {
    pub evolve: EvolveOptions,
    /// Finite-difference step for the time derivative.
    pub fd_dt: f64,
    /// Finite-difference step for derivatives in the noise labels.
    pub fd_dz: f64,
}

impl Default for ResidualOptions {
    fn default() -> Self {
        Self {
            evolve: EvolveOptions::default(),
            fd_dt: 1e-3,
            fd_dz: 1e-3,
        }
    }
}

/// Residual report of the microscopic verification of the stochastic
/// equation for dephasing couplings.
#[derive(Debug, Clone)]
pub struct SseResidualReport {
    /// Max over nodes and sample times of `|| d psi/dt - RHS ||_inf`.
    pub max_residual: f64,
    /// Max residual of the per-mode derivative identity
    /// `d psi/d z*_k = -i g_k (int_0^t e^{i w_k s} ds) L psi`.
    pub max_mode_identity_residual: f64,
    /// Max Cauchy–Riemann residual of the projection in each `z*_k`.
    pub max_cauchy_riemann_residual: f64,
    pub sample_times: Vec<f64>,
}

/// Assemble both sides of the linear stochastic equation directly from the
/// composite evolution, at the given noise labels and sample times.
///
/// Valid for dephasing configurations: `L` hermitian with `L^2 = 1` and
/// `[H_S, L] = 0`, so the functional derivative closes as `L psi` and the
/// memory term becomes `-(a(t) + e(t)) psi` with the closed-form mode
/// integrals. The time derivative of the projected state is formed by a
/// five-point stencil; derivatives in the labels use the same stencil in the
/// starred arguments.
pub fn verify_sse_residual(
    h_s: &DMatrix<C64>,
    l_op: &DMatrix<C64>,
    bath: &FockBath,
    initial_system: &DVector<C64>,
    sample_times: &[f64],
    z_nodes: &[Vec<C64>],
    opts: &ResidualOptions,
) -> Result<SseResidualReport> {
    // Dephasing validity checks.
    let comm = (h_s * l_op - l_op * h_s)
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    if comm > 1e-12 {
        return Err(Error::Invalid(format!(
            "coupling operator must commute with the system hamiltonian (defect {comm:.3e})"
        )));
    }
    let l2 = l_op * l_op;
    let id_defect = (0..l_op.nrows())
        .flat_map(|i| (0..l_op.ncols()).map(move |j| (i, j)))
        .map(|(i, j)| {
            let expect = if i == j {
                C64::new(1.0, 0.0)
            } else {
                C64::default()
            };
            (l2[(i, j)] - expect).norm()
        })
        .fold(0.0, f64::max);
    if id_defect > 1e-12 {
        return Err(Error::Invalid(format!(
            "coupling operator must square to the identity (defect {id_defect:.3e})"
        )));
    }
    let herm = crate::linalg::max_hermiticity_defect(l_op);
    if herm > 1e-12 {
        return Err(Error::NotHermitian(herm));
    }
    let fd = opts.fd_dt;
    for &t in sample_times {
        if t < 2.0 * fd {
            return Err(Error::Invalid(format!(
                "sample time {t} too close to zero for the five-point stencil"
            )));
        }
    }
    // Times needed by all stencils, in one forward sweep.
    let mut stencil_times: Vec<f64> = sample_times
        .iter()
        .flat_map(|&t| [-2.0, -1.0, 0.0, 1.0, 2.0].map(|k| t + k * fd))
        .collect();
    stencil_times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let initial = CompositeState::from_system_vacuum(initial_system, bath)?;
    let states = evolve_at_times(h_s, l_op, bath, &stencil_times, &initial, &opts.evolve)?;

    let modes = bath.modes().modes();
    let xi_star: Vec<C64> = modes.iter().map(|m| m.xi.conj()).collect();
    let mut max_residual = 0.0f64;
    let mut max_mode = 0.0f64;
    let mut max_cr = 0.0f64;

    for (si, &t) in sample_times.iter().enumerate() {
        let stencil = &states[5 * si..5 * si + 5];
        // Closed-form integrated rates at t.
        let mut a_t = C64::default();
        let mut e_t = C64::default();
        for m in modes {
            let g2 = m.g * m.g;
            a_t += g2 * phase_integral(m.omega, t).conj();
            e_t +=
                -m.xi.conj() * g2 * C64::new(0.0, m.omega * t).exp() * phase_integral(m.omega, t);
        }
        for node in z_nodes {
            if node.len() != modes.len() {
                return Err(Error::Dimension("node must label every mode".into()));
            }
            let z_star: Vec<C64> = node.iter().map(C64::conj).collect();
            let rel: Vec<DVector<C64>> = stencil
                .iter()
                .map(|s| project_relative_state_dual(s, &z_star, &xi_star))
                .collect::<Result<_>>()?;
            // Five-point fourth-order time derivative.
            let dpsi = (&rel[0] - &rel[4] + (&rel[3] - &rel[1]) * C64::new(8.0, 0.0))
                * C64::new(1.0 / (12.0 * fd), 0.0);
            let psi_t = &rel[2];
            // Driving noise value at (z, t).
            let mut z_star_t = C64::default();
            for (m, zs) in modes.iter().zip(&z_star) {
                z_star_t += C64::new(0.0, -1.0) * m.g * C64::new(0.0, m.omega * t).exp() * zs;
            }
            let l_psi = l_op * psi_t;
            let rhs = (h_s * psi_t) * C64::new(0.0, -1.0) + &l_psi * z_star_t - psi_t * (a_t + e_t);
            let resid = (&dpsi - &rhs).iter().map(|v| v.norm()).fold(0.0, f64::max);
            max_residual = max_residual.max(resid);

            // Per-mode derivative identity and analyticity, at the center.
            let center = &stencil[2];
            for (k, m) in modes.iter().enumerate() {
                let h = opts.fd_dz;
                let eval = |shift: C64| -> Result<DVector<C64>> {
                    let mut zs = z_star.clone();
                    zs[k] += shift;
                    project_relative_state_dual(center, &zs, &xi_star)
                };
                let stencil_dir = |dir: C64| -> Result<DVector<C64>> {
                    let f_m2 = eval(dir * (-2.0 * h))?;
                    let f_m1 = eval(dir * -h)?;
                    let f_p1 = eval(dir * h)?;
                    let f_p2 = eval(dir * (2.0 * h))?;
                    Ok((f_m2 - f_p2 + (f_p1 - f_m1) * C64::new(8.0, 0.0))
                        * C64::new(1.0 / (12.0 * h), 0.0))
                };
                let d_re = stencil_dir(C64::new(1.0, 0.0))?;
                let expect = &l_psi * (C64::new(0.0, -m.g) * phase_integral(m.omega, t));
                let resid = (&d_re - &expect)
                    .iter()
                    .map(|v| v.norm())
                    .fold(0.0, f64::max);
                max_mode = max_mode.max(resid);
                // Cauchy–Riemann: the imaginary-direction derivative equals
                // i times the real-direction one for an analytic function.
                let d_im = stencil_dir(C64::new(0.0, 1.0))?;
                let cr = (&d_im - &d_re * C64::new(0.0, 1.0))
                    .iter()
                    .map(|v| v.norm())
                    .fold(0.0, f64::max);
                max_cr = max_cr.max(cr);
            }
        }
    }
    Ok(SseResidualReport {
        max_residual,
        max_mode_identity_residual: max_mode,
        max_cauchy_riemann_residual: max_cr,
        sample_times: sample_times.to_vec(),
    })
}
