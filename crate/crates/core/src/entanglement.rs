//! SL-invariant entanglement evaluation, the trajectory scaling relation,
//! and mean-entanglement bounds for dephasing channels.
//!
//! A pure-state measure enters through [`SlInvariantMeasure`]: any evaluator
//! that is homogeneous of degree two, `mu(u psi) = |u|^2 mu(psi)`, and
//! invariant under local determinant-one transformations qualifies, and the
//! admission gate [`check_sl_invariance`] tests exactly those two properties.
//! Two-qubit concurrence is the built-in example.
//!
//! For local dephasing the entanglement of a normalized relative state obeys
//! a scaling relation whose factor is independent of the noise outcome:
//! `x(z, t) = f(t) P(z, 0) / P(z, t)` with
//! `f(t) = prod_k exp(-1/2 int_0^t gamma_k)`. Averaging over outcomes turns
//! `f` into an upper bound on the entanglement of the reduced state, which
//! is what the squeezing optimization targets.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix2};

use crate::correlations::{
    build_kernel, integrated_rates, CorrelationKernel, IntegratedRates, ModeSet,
};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::linalg::{
    apply_single_qubit, hermitian_eigenvalues, hermitian_sqrt, max_hermiticity_defect,
};
use crate::rng::stream_rng;
use crate::sse::RelativeStateTrajectory;
use crate::C64;

/// Degree-two concurrence form of an unnormalized two-qubit state:
/// `|<conj(psi)| sigma_y x sigma_y |psi>| = 2 |psi_0 psi_3 - psi_1 psi_2|`.
/// For a normalized state this is the standard pure-state concurrence.
pub fn concurrence2(psi: &DVector<C64>) -> Result<f64> {
    if psi.len() != 4 {
        return Err(Error::Dimension(format!(
            "two-qubit concurrence needs dimension 4, got {}",
            psi.len()
        )));
    }
    Ok(2.0 * (psi[0] * psi[3] - psi[1] * psi[2]).norm())
}

/// Evaluator of an unnormalized pure state to a nonnegative real.
pub type MeasureFn = dyn Fn(&DVector<C64>) -> f64 + Send + Sync;

/// A pluggable SL-invariant pure-state measure: homogeneous of degree two
/// and invariant under local determinant-one transformations.
#[derive(Clone)]
pub struct SlInvariantMeasure {
    name: String,
    dim: usize,
    eval: Arc<MeasureFn>,
}

impl std::fmt::Debug for SlInvariantMeasure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SlInvariantMeasure({}, dim {})", self.name, self.dim)
    }
}

impl SlInvariantMeasure {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        eval: impl Fn(&DVector<C64>) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            dim,
            eval: Arc::new(eval),
        }
    }

    /// The built-in two-qubit concurrence.
    pub fn concurrence2() -> Self {
        Self::new("concurrence2", 4, |psi| {
            2.0 * (psi[0] * psi[3] - psi[1] * psi[2]).norm()
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, psi: &DVector<C64>) -> Result<f64> {
        if psi.len() != self.dim {
            return Err(Error::Dimension(format!(
                "measure {} expects dimension {}, got {}",
                self.name,
                self.dim,
                psi.len()
            )));
        }
        Ok((self.eval)(psi))
    }
}

fn sigma_y_sigma_y() -> DMatrix<C64> {
    let o = C64::default();
    let m = C64::new(-1.0, 0.0);
    let p = C64::new(1.0, 0.0);
    DMatrix::from_row_slice(4, 4, &[o, o, o, m, o, o, p, o, o, p, o, o, m, o, o, o])
}

/// Mixed-state two-qubit concurrence: `max(0, l1 - l2 - l3 - l4)` with the
/// decreasing square-rooted eigenvalues of `rho (Y rho* Y)`,
/// `Y = sigma_y x sigma_y`. The input must be hermitian with trace near one;
/// it is renormalized by its trace before evaluation.
pub fn wootters_concurrence(rho: &DMatrix<C64>) -> Result<f64> {
    if rho.nrows() != 4 || rho.ncols() != 4 {
        return Err(Error::Dimension(
            "two-qubit density matrix must be 4 x 4".into(),
        ));
    }
    let defect = max_hermiticity_defect(rho);
    let scale = rho
        .iter()
        .map(|v| v.norm())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    if defect > 1e-8 * scale.max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    let trace = (0..4).map(|i| rho[(i, i)].re).sum::<f64>();
    if (trace - 1.0).abs() > 0.1 {
        return Err(Error::TraceDeviation((trace - 1.0).abs()));
    }
    let rho = rho.map(|v| v / trace);
    let y = sigma_y_sigma_y();
    let rho_tilde = &y * rho.map(|v| v.conj()) * &y;
    let sqrt_rho = hermitian_sqrt(&rho, 1e-9)?;
    let m = &sqrt_rho * rho_tilde * &sqrt_rho;
    let lambdas: Vec<f64> = hermitian_eigenvalues(&m)?
        .into_iter()
        .map(|v| v.max(0.0).sqrt())
        .collect();
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}

/// Entanglement ratio of one trajectory at one grid index:
/// `mu(normalized psi(t)) / mu(normalized psi(0))`.
pub fn scaling_ratio(
    trajectory: &RelativeStateTrajectory,
    measure: &SlInvariantMeasure,
    t_index: usize,
) -> Result<f64> {
    let mu0 = measure.eval(trajectory.state(0))? / trajectory.norms_sq()[0];
    if mu0 < 1e-12 {
        return Err(Error::ZeroInitialEntanglement);
    }
    let mu_t = measure.eval(trajectory.state(t_index))? / trajectory.norms_sq()[t_index];
    Ok(mu_t / mu0)
}

/// Mean-entanglement bound per grid time, with the accumulated dephasing
/// rates that produced it.
#[derive(Debug, Clone)]
pub struct EntanglementReport {
    pub grid: TimeGrid,
    /// `prod_k exp(-1/2 int_0^t gamma_k(s) ds)` per grid point.
    pub xbar: Vec<f64>,
    pub xi_rule_descriptor: String,
    /// Summed accumulated rate `sum_k int_0^t gamma_k`.
    pub gamma_integral: Vec<f64>,
    /// Accumulated rate per channel.
    pub per_channel_gamma_integral: Vec<Vec<f64>>,
    pub exact_reference: Option<Vec<f64>>,
}

/// Bound from per-channel integrated rates (one entry per coupled qubit).
pub fn mean_entanglement_bound(
    rates: &[IntegratedRates],
    descriptor: impl Into<String>,
) -> Result<EntanglementReport> {
    let first = rates
        .first()
        .ok_or_else(|| Error::Invalid("bound needs at least one channel".into()))?;
    let grid = first.grid().clone();
    for r in rates {
        if r.grid() != &grid {
            return Err(Error::GridMismatch);
        }
    }
    let per_channel: Vec<Vec<f64>> = rates.iter().map(IntegratedRates::gamma_integral).collect();
    let n = grid.n_points();
    let mut total = vec![0.0; n];
    for ch in &per_channel {
        for (t, v) in total.iter_mut().zip(ch) {
            *t += v;
        }
    }
    let xbar = total.iter().map(|g| (-0.5 * g).exp()).collect();
    Ok(EntanglementReport {
        grid,
        xbar,
        xi_rule_descriptor: descriptor.into(),
        gamma_integral: total,
        per_channel_gamma_integral: per_channel,
        exact_reference: None,
    })
}

/// Bound from per-channel kernels.
pub fn mean_entanglement_bound_from_kernels(
    kernels: &[CorrelationKernel],
    descriptor: impl Into<String>,
) -> Result<EntanglementReport> {
    let rates: Vec<IntegratedRates> = kernels.iter().map(integrated_rates).collect();
    mean_entanglement_bound(&rates, descriptor)
}

/// Bound at a single target time through the full kernel pipeline, for
/// channels given as mode sets carrying their squeezing.
pub fn bound_at_target_pipeline(channels: &[ModeSet], dt: f64, target: f64) -> Result<f64> {
    let n_steps = (target / dt).round().max(1.0) as usize;
    let grid = TimeGrid::new(target / n_steps as f64, n_steps)?;
    let mut x = 1.0;
    for modes in channels {
        let rates = integrated_rates(&build_kernel(modes, &grid)?);
        x *= (-0.5 * rates.gamma_integral()[n_steps]).exp();
    }
    Ok(x)
}

/// Same bound from the closed-form per-mode integrals; the analytic oracle
/// for the pipeline and the fast path for target sweeps.
pub fn bound_at_target_closed_form(channels: &[ModeSet], target: f64) -> f64 {
    channels
        .iter()
        .map(|m| (-0.5 * m.accumulated_rate(target)).exp())
        .product()
}

/// Per-time comparison of a bound against an exact reference.
#[derive(Debug, Clone)]
pub struct BoundComparison {
    /// `(t, bound, exact, gap)` rows; `gap = bound - exact`.
    pub rows: Vec<(f64, f64, f64, f64)>,
    pub min_gap: f64,
    /// Times at which the bound undercuts the exact value beyond tolerance.
    pub violations: usize,
}

/// Tabulate bound minus exact per grid time, flagging violations of the
/// upper-bound property beyond `tol`.
pub fn bound_vs_exact(
    report: &EntanglementReport,
    exact: &[f64],
    tol: f64,
) -> Result<BoundComparison> {
    if exact.len() != report.xbar.len() {
        return Err(Error::GridMismatch);
    }
    let mut rows = Vec::with_capacity(exact.len());
    let mut min_gap = f64::INFINITY;
    let mut violations = 0;
    for (k, (&b, &e)) in report.xbar.iter().zip(exact).enumerate() {
        let gap = b - e;
        min_gap = min_gap.min(gap);
        if gap < -tol {
            violations += 1;
        }
        rows.push((report.grid.time(k), b, e, gap));
    }
    Ok(BoundComparison {
        rows,
        min_gap,
        violations,
    })
}

/// Worst deviations found by the measure admission gate.
#[derive(Debug, Clone, Copy)]
pub struct MeasureCheck {
    pub max_homogeneity_dev: f64,
    pub max_invariance_dev: f64,
}

/// Admission gate for pluggable measures: random rescalings test the
/// degree-two homogeneity, random local determinant-one transformations test
/// SL invariance. Deviations are relative to the measure value.
pub fn check_sl_invariance(
    measure: &SlInvariantMeasure,
    n_qubits: usize,
    trials: usize,
    seed: u64,
) -> Result<MeasureCheck> {
    if measure.dim() != 1 << n_qubits {
        return Err(Error::Dimension(
            "measure dimension must be 2^n_qubits".into(),
        ));
    }
    let mut rng = stream_rng(seed, 0);
    let mut homog: f64 = 0.0;
    let mut invar: f64 = 0.0;
    for _ in 0..trials {
        let psi = random_state(measure.dim(), &mut rng);
        let mu = measure.eval(&psi)?;
        if mu < 1e-6 {
            continue; // nearly separable draws have no scale to compare against
        }
        let u = random_complex(&mut rng) * 1.5;
        let mu_scaled = measure.eval(&psi.map(|v| v * u))?;
        homog = homog.max((mu_scaled - u.norm_sqr() * mu).abs() / mu.max(1e-12));
        let mut transformed = psi.clone();
        for q in 0..n_qubits {
            let a = random_sl2(&mut rng);
            apply_single_qubit(&mut transformed, &a, q, n_qubits);
        }
        let mu_t = measure.eval(&transformed)?;
        invar = invar.max((mu_t - mu).abs() / mu.max(1e-12));
    }
    Ok(MeasureCheck {
        max_homogeneity_dev: homog,
        max_invariance_dev: invar,
    })
}

fn random_complex<R: rand::Rng + ?Sized>(rng: &mut R) -> C64 {
    use rand_distr::StandardNormal;
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn random_state<R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<C64> {
    let mut v = DVector::from_fn(dim, |_, _| random_complex(rng));
    let n = v.norm();
    v /= C64::new(n, 0.0);
    v
}

/// Random 2x2 complex matrix normalized to determinant one; draws with a
/// small determinant are rejected to keep the conditioning sane.
fn random_sl2<R: rand::Rng + ?Sized>(rng: &mut R) -> Matrix2<C64> {
    loop {
        let m = Matrix2::new(
            random_complex(rng),
            random_complex(rng),
            random_complex(rng),
            random_complex(rng),
        );
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        if det.norm() > 0.3 {
            let s = det.sqrt();
            return m.map(|v| v / s);
        }
    }
}
