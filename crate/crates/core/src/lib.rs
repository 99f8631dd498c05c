//! Simulation toolkit for the family of Gaussian non-Markovian stochastic
//! Schrödinger equations parametrized by per-mode squeezing.
//!
//! A bosonic bath at zero temperature, linearly coupled to a system through an
//! operator `L`, admits an ensemble of pure-state trajectories whose Gaussian
//! average reproduces the reduced density matrix. Expanding the environment in
//! squeezed (rather than coherent) basis states yields a whole family of such
//! unravelings: the hermitian noise correlation `alpha(t,s)` is fixed by the
//! microscopic couplings, while the non-hermitian correlation `eta(t,s)` is
//! selected freely through the squeezing parameters `xi` of each bath mode.
//! The reduced dynamics never depends on `xi`, but per-trajectory quantities
//! do, which is what makes the squeezing worth optimizing.
//!
//! The crate is organized around that pipeline:
//!
//! * [`correlations`] — bath descriptions (discrete modes or discretized
//!   spectral densities) and the `alpha`/`eta` kernels on a time grid.
//! * [`noise`] — sampling of the complex Gaussian process driving the
//!   trajectories, by mode sums or by covariance factorization, plus
//!   ensemble statistics for verification.
//! * [`sse`] — exact propagation of unnormalized relative states for
//!   multi-qubit local pure dephasing, with squared-norm tracking.
//! * [`oracle`] — brute-force ground truth: full system+bath evolution in a
//!   truncated Fock space, squeezed-state projections, quadrature averages,
//!   and residual verification of the stochastic equation itself.
//! * [`entanglement`] — SL-invariant measures, the trajectory scaling
//!   relation, and mean-entanglement bounds for dephasing channels.
//! * [`optimize`] — analytic optimal/restoring squeezing rules and a
//!   numerical phase search that validates them.
//!
//! All physical rates and frequencies are expressed in one reciprocal-time
//! unit chosen by the caller; times are multiples of that unit.

pub mod correlations;
pub mod entanglement;
pub mod error;
pub mod export;
pub mod linalg;
pub mod noise;
pub mod ode;
pub mod optimize;
pub mod oracle;
pub mod quadrature;
pub mod rng;
pub mod sse;

mod grid;

pub use correlations::{
    build_kernel, discretize_spectral_density, integrated_rates, markov_rates, CorrelationKernel,
    IntegratedRates, Mode, ModeSet, SpectralDensityModel,
};
pub use entanglement::{
    bound_at_target_closed_form, bound_at_target_pipeline, bound_vs_exact, concurrence2,
    mean_entanglement_bound, mean_entanglement_bound_from_kernels, scaling_ratio,
    wootters_concurrence, BoundComparison, EntanglementReport, SlInvariantMeasure,
};
pub use error::{Error, Result};
pub use grid::TimeGrid;
pub use noise::{
    estimate_correlations, sample_mode_amplitudes, sample_noise_covariance, sample_noise_modesum,
    CorrelationAccumulator, CovarianceSampler, ModeSumSampler, NoiseEnsembleStats, NoiseTrajectory,
};
pub use optimize::{
    optimal_rule, restore_rule, search_squeezing, Objective, SearchOptions, SearchResult,
    SqueezingRule,
};
pub use oracle::{
    evolve_composite, exact_dephasing_factor, project_relative_state, quadrature_average,
    verify_sse_residual, CompositeEvolution, CompositeState, EvolveOptions, FockBath,
    QuadratureAverage, QuadratureSpec, SseResidualReport,
};
pub use sse::{
    average_density_matrix, dephasing_ensemble, povm_density, propagate_dephasing, AveragedDensity,
    DensityAccumulator, DephasingSystem, EnsembleDensity, EnsembleOptions, RelativeStateTrajectory,
};

/// Complex double-precision scalar used throughout the crate.
pub type C64 = num_complex::Complex64;
