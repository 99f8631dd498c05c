//! Acceptance suite: ten numbered end-to-end criteria at pinned tolerances.
//!
//! Every criterion is a pure function returning a pass/fail result with a
//! one-line detail; the `acceptance` subcommand and the `acceptance`
//! integration-test target both dispatch into this module, so there is a
//! single source of truth for the thresholds.
//!
//! The criteria use internally generated exact references (closed-form
//! dephasing factors, partial traces, analytic rules) — never digitized
//! curves — and fixed seeds, so a run is deterministic.

use std::time::Instant;

use nalgebra::{DMatrix, DVector, Matrix2};
use rayon::prelude::*;
use unravel_core::{
    bound_at_target_closed_form, bound_at_target_pipeline, build_kernel, concurrence2,
    correlations::discretize_symmetric, dephasing_ensemble, evolve_composite, integrated_rates,
    mean_entanglement_bound, noise::CorrelationAccumulator, optimal_rule, oracle::ResidualOptions,
    propagate_dephasing, quadrature_average, restore_rule, rng::purpose_seed, scaling_ratio,
    search_squeezing, sse::EnsembleOptions, verify_sse_residual, wootters_concurrence,
    CompositeState, CovarianceSampler, DephasingSystem, FockBath, ModeSet, ModeSumSampler,
    NoiseTrajectory, Objective, QuadratureSpec, SearchOptions, SlInvariantMeasure, SqueezingRule,
    TimeGrid, C64,
};

pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {:2} ({}): {} [{:.1}s] {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.seconds,
            self.detail
        )
    }
}

type Criterion = (usize, &'static str, fn() -> (bool, String));

pub fn criteria() -> Vec<Criterion> {
    vec![
        (
            1,
            "noise correlation fidelity",
            c1_noise_correlation_fidelity,
        ),
        (
            2,
            "squeezing independence of reduced dynamics",
            c2_xi_independence,
        ),
        (3, "oracle equivalence", c3_oracle_equivalence),
        (4, "stochastic equation residual", c4_sse_residual),
        (5, "scaling relation", c5_scaling_relation),
        (6, "tight bound reproduction", c6_tight_bound),
        (7, "multi-channel exponent", c7_multi_channel),
        (8, "entanglement restoration", c8_restoration),
        (9, "markov limit", c9_markov_limit),
        (10, "optimizer validation", c10_optimizer),
    ]
}

/// Run all criteria (or a single one), printing one line per criterion.
pub fn run(only: Option<usize>) -> Vec<CriterionResult> {
    let mut out = Vec::new();
    for (id, name, f) in criteria() {
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let start = Instant::now();
        let (passed, detail) = f();
        let result = CriterionResult {
            id,
            name,
            passed,
            detail,
            seconds: start.elapsed().as_secs_f64(),
        };
        println!("{}", result.line());
        out.push(result);
    }
    out
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn bell() -> DVector<C64> {
    let a = std::f64::consts::FRAC_1_SQRT_2;
    DVector::from_vec(vec![c(a, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(a, 0.0)])
}

fn plus_state() -> DVector<C64> {
    let a = std::f64::consts::FRAC_1_SQRT_2;
    DVector::from_vec(vec![c(a, 0.0), c(a, 0.0)])
}

fn sigma_z() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

fn one_qubit_system() -> DephasingSystem {
    DephasingSystem::new(1, vec![0], vec![Matrix2::zeros()]).expect("valid system")
}

fn two_qubit_system() -> DephasingSystem {
    DephasingSystem::new(2, vec![0], vec![Matrix2::zeros(), Matrix2::zeros()])
        .expect("valid system")
}

/// Parallel second-moment accumulation over `n` trajectories drawn from
/// `draw(stream)`, merged in fixed block order.
fn parallel_noise_stats<F>(grid: &TimeGrid, n: u64, draw: F) -> CorrelationAccumulator
where
    F: Fn(u64) -> NoiseTrajectory + Sync,
{
    let block = 1000u64;
    let blocks: Vec<(u64, u64)> = (0..n)
        .step_by(block as usize)
        .map(|s| (s, (s + block).min(n)))
        .collect();
    let partials: Vec<CorrelationAccumulator> = blocks
        .par_iter()
        .map(|&(s, e)| {
            let mut acc = CorrelationAccumulator::new(grid);
            for t in s..e {
                acc.add(&draw(t)).expect("same grid");
            }
            acc
        })
        .collect();
    let mut total = CorrelationAccumulator::new(grid);
    for p in &partials {
        total.merge(p).expect("same grid");
    }
    total
}

/// Criterion 1: empirical second moments of 1e5 mode-sum samples of a
/// three-mode squeezed bath match the kernels entrywise within four standard
/// errors, and the covariance-factorization sampler agrees with the mode-sum
/// sampler at second order.
fn c1_noise_correlation_fidelity() -> (bool, String) {
    let modes = ModeSet::from_triples(&[
        (0.8, 1.1, c(0.5, 0.0)),
        (0.5, 2.7, C64::from_polar(0.6, -0.9)),
        (0.3, 0.4, c(0.0, 0.0)),
    ])
    .expect("valid modes");
    let grid = TimeGrid::new(0.04, 50).expect("valid grid");
    let kernel = build_kernel(&modes, &grid).expect("kernel");
    let n = 100_000u64;

    let modesum = ModeSumSampler::new(&modes, &grid);
    let seed_m = purpose_seed(11, "acceptance-c1-modesum");
    let stats_m = parallel_noise_stats(&grid, n, |t| modesum.sample(seed_m, t))
        .finalize(&kernel)
        .expect("stats");

    let cov = CovarianceSampler::new(&kernel).expect("psd kernel");
    let seed_c = purpose_seed(11, "acceptance-c1-covariance");
    let stats_c = parallel_noise_stats(&grid, n, |t| cov.sample(seed_c, t))
        .finalize(&kernel)
        .expect("stats");

    let points = grid.n_points();
    let mut worst_sigma = 0.0f64;
    let mut worst_cross = 0.0f64;
    for i in 0..points {
        for j in 0..points {
            let da = (stats_m.est_alpha[(i, j)] - kernel.alpha()[(i, j)]).norm();
            worst_sigma = worst_sigma.max(da / stats_m.se_alpha[(i, j)].max(1e-12));
            let de = (stats_m.est_eta[(i, j)] - kernel.eta()[(i, j)]).norm();
            worst_sigma = worst_sigma.max(de / stats_m.se_eta[(i, j)].max(1e-12));
            let xa = (stats_m.est_alpha[(i, j)] - stats_c.est_alpha[(i, j)]).norm();
            let sa = stats_m.se_alpha[(i, j)]
                .hypot(stats_c.se_alpha[(i, j)])
                .max(1e-12);
            worst_cross = worst_cross.max(xa / sa);
            let xe = (stats_m.est_eta[(i, j)] - stats_c.est_eta[(i, j)]).norm();
            let se = stats_m.se_eta[(i, j)]
                .hypot(stats_c.se_eta[(i, j)])
                .max(1e-12);
            worst_cross = worst_cross.max(xe / se);
        }
    }
    let max_alpha = kernel.alpha().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let clt_bound = 5.0 * max_alpha / (n as f64).sqrt();
    let passed = worst_sigma <= 4.0
        && worst_cross <= 4.0
        && stats_m.max_alpha_dev < clt_bound
        && stats_m.max_eta_dev < clt_bound;
    (
        passed,
        format!(
            "worst entry {:.2} SE vs kernel, {:.2} SE cross-sampler; max devs {:.2e}/{:.2e} \
             (CLT budget {:.2e})",
            worst_sigma, worst_cross, stats_m.max_alpha_dev, stats_m.max_eta_dev, clt_bound
        ),
    )
}

/// Criterion 2: one dephasing qubit, one alpha, three squeezing rules (zero,
/// optimal, restore): the 1e5-trajectory averaged reduced states agree
/// entrywise within five combined standard errors.
fn c2_xi_independence() -> (bool, String) {
    let base = ModeSet::from_triples(&[
        (0.55, 1.4, c(0.0, 0.0)),
        (0.35, 2.9, c(0.0, 0.0)),
        (0.25, 0.6, c(0.0, 0.0)),
    ])
    .expect("valid modes");
    let grid = TimeGrid::new(0.01, 150).expect("valid grid");
    let target = grid.horizon();
    let eps = 1e-3;
    let rules = [
        SqueezingRule::Zero,
        SqueezingRule::OptimalAt {
            target,
            epsilon: eps,
        },
        SqueezingRule::RestoreAt {
            target,
            epsilon: eps,
        },
    ];
    let system = one_qubit_system();
    let n_samples = 100_000;
    let mut ensembles = Vec::new();
    for (r, rule) in rules.iter().enumerate() {
        let modes = rule.apply(&base, eps).expect("rule applies");
        let rates = integrated_rates(&build_kernel(&modes, &grid).expect("kernel"));
        let sampler = ModeSumSampler::new(&modes, &grid);
        let seed = purpose_seed(23 + r as u64, "acceptance-c2");
        let e = dephasing_ensemble(
            &system,
            &[sampler],
            &[rates],
            &plus_state(),
            &EnsembleOptions::new(n_samples, seed),
        )
        .expect("ensemble");
        ensembles.push(e);
    }
    let mut worst = 0.0f64;
    for a in 0..rules.len() {
        for b in (a + 1)..rules.len() {
            let (ea, eb) = (&ensembles[a], &ensembles[b]);
            for k in 0..grid.n_points() {
                for i in 0..2 {
                    for j in 0..2 {
                        let d = (ea.rho[k][(i, j)] - eb.rho[k][(i, j)]).norm();
                        let band = ea.se_re[k][(i, j)].hypot(ea.se_im[k][(i, j)])
                            + eb.se_re[k][(i, j)].hypot(eb.se_im[k][(i, j)]);
                        worst = worst.max(d / band.max(1e-12));
                    }
                }
            }
        }
    }
    (
        worst <= 5.0,
        format!("worst pairwise entry deviation {worst:.2} combined SE over three rules"),
    )
}

/// Criterion 3: one-mode composite evolution; quadrature averaging matches
/// the partial trace below 1e-8 and resolves the identity below 1e-8, for
/// both a plain and a squeezed expansion.
fn c3_oracle_equivalence() -> (bool, String) {
    let modes = ModeSet::from_triples(&[(0.5, 1.2, c(0.0, 0.0))]).expect("valid modes");
    let bath = FockBath::new(modes, 20).expect("bath");
    let grid = TimeGrid::new(0.05, 30).expect("grid");
    let initial = CompositeState::from_system_vacuum(&plus_state(), &bath).expect("initial");
    let evo = evolve_composite(
        &DMatrix::zeros(2, 2),
        &sigma_z(),
        &bath,
        &grid,
        &initial,
        &Default::default(),
    )
    .expect("evolution");
    if !evo.leakage_ok {
        return (false, format!("fock truncation leaked: {:?}", evo.leakage));
    }
    let spec = QuadratureSpec { nodes_per_axis: 40 };
    let xis = [
        c(0.0, 0.0),
        C64::from_polar(0.5, std::f64::consts::PI / 3.0),
    ];
    let mut max_identity = 0.0f64;
    let mut max_ptr = 0.0f64;
    let mut max_cross = 0.0f64;
    for k in [10usize, 20, 30] {
        let state = &evo.states[k];
        let mut rhos = Vec::new();
        for xi in xis {
            let avg = quadrature_average(state, &[xi], &spec).expect("quadrature");
            max_identity = max_identity.max(avg.identity_residual);
            max_ptr = max_ptr.max(avg.partial_trace_residual);
            rhos.push(avg.rho);
        }
        let d = (&rhos[0] - &rhos[1])
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        max_cross = max_cross.max(d);
    }
    let passed = max_identity < 1e-8 && max_ptr < 1e-8 && max_cross < 2e-8;
    (
        passed,
        format!(
            "identity residual {max_identity:.2e}, partial-trace residual {max_ptr:.2e}, \
             cross-squeezing deviation {max_cross:.2e}"
        ),
    )
}

/// Criterion 4: mode-resolved residual of the linear stochastic equation
/// below 1e-6 for one-mode dephasing at a 1e-3/omega stencil, with and
/// without squeezing (the non-hermitian kernel term included).
fn c4_sse_residual() -> (bool, String) {
    let omega = 1.0;
    let mut max_residual = 0.0f64;
    let mut max_mode = 0.0f64;
    let mut max_cr = 0.0f64;
    for xi in [
        c(0.0, 0.0),
        C64::from_polar(0.5, std::f64::consts::PI / 3.0),
    ] {
        let modes = ModeSet::from_triples(&[(0.6, omega, xi)]).expect("valid modes");
        let bath = FockBath::new(modes, 18).expect("bath");
        let report = verify_sse_residual(
            &DMatrix::zeros(2, 2),
            &sigma_z(),
            &bath,
            &plus_state(),
            &[0.5, 1.0],
            &[vec![c(0.6, -0.3)], vec![c(-0.8, 0.5)]],
            &ResidualOptions {
                fd_dt: 1e-3 / omega,
                ..Default::default()
            },
        )
        .expect("residual report");
        max_residual = max_residual.max(report.max_residual);
        max_mode = max_mode.max(report.max_mode_identity_residual);
        max_cr = max_cr.max(report.max_cauchy_riemann_residual);
    }
    let passed = max_residual < 1e-6 && max_mode < 1e-6;
    (
        passed,
        format!(
            "equation residual {max_residual:.2e}, mode identity {max_mode:.2e}, \
             analyticity {max_cr:.2e}"
        ),
    )
}

/// Criterion 5: the per-trajectory identity x = f P(0)/P(t) holds to 1e-8 on
/// 1e3 dephasing trajectories from a maximally entangled initial state.
fn c5_scaling_relation() -> (bool, String) {
    let grid = TimeGrid::new(0.01, 140).expect("grid");
    let target = grid.horizon();
    let base = ModeSet::from_triples(&[(0.6, 1.1, c(0.0, 0.0)), (0.35, 2.4, c(0.0, 0.0))])
        .expect("valid modes");
    let rule = optimal_rule(target, 1e-3).expect("rule");
    let modes = rule.apply(&base, 1e-3).expect("applies");
    let system = two_qubit_system();
    let rates = integrated_rates(&build_kernel(&modes, &grid).expect("kernel"));
    let report =
        mean_entanglement_bound(std::slice::from_ref(&rates), rule.descriptor()).expect("bound");
    let measure = SlInvariantMeasure::concurrence2();
    let sampler = ModeSumSampler::new(&modes, &grid);
    let seed = purpose_seed(5, "acceptance-c5");
    let mut max_dev = 0.0f64;
    for t in 0..1000u64 {
        let noise = sampler.sample(seed, t);
        let traj = propagate_dephasing(&system, &bell(), &[noise], std::slice::from_ref(&rates))
            .expect("trajectory");
        for k in (0..=140).step_by(10) {
            let x = scaling_ratio(&traj, &measure, k).expect("ratio");
            let p_ratio = traj.norms_sq()[k] / traj.norms_sq()[0];
            max_dev = max_dev.max((x * p_ratio - report.xbar[k]).abs());
        }
    }
    (
        max_dev < 1e-8,
        format!("max identity deviation {max_dev:.2e} over 1000 trajectories"),
    )
}

/// Criterion 6: two qubits, one coupled to an ohmic comb. Over 50 target
/// times, the per-target optimal bound matches the exactly computed
/// concurrence ratio within 1e-3 + O(eps), and the zero-squeezing bound
/// stays above the exact curve with a strictly positive gap at intermediate
/// times.
fn c6_tight_bound() -> (bool, String) {
    let eps = 1e-3;
    let base = unravel_core::discretize_spectral_density(
        &unravel_core::SpectralDensityModel::Ohmic {
            amplitude: 0.25,
            cutoff: 1.0,
        },
        12.0,
        240,
        |_| c(0.0, 0.0),
    )
    .expect("comb");
    let dt = 0.01;
    let tol = 1e-3 + 2.0 * eps;
    let mut worst = 0.0f64;
    let mut min_gap = f64::INFINITY;
    let mut min_mid_gap = f64::INFINITY;
    let targets: Vec<f64> = (1..=50).map(|j| 0.06 * j as f64).collect();
    let rows: Vec<(f64, f64, f64, f64)> = targets
        .par_iter()
        .map(|&t| {
            let tuned = optimal_rule(t, eps)
                .expect("rule")
                .apply(&base, eps)
                .expect("applies");
            let bound_opt =
                bound_at_target_pipeline(std::slice::from_ref(&tuned), dt, t).expect("bound");
            let bound_zero =
                bound_at_target_pipeline(std::slice::from_ref(&base), dt, t).expect("bound");
            // Exact reference through the mixed-state evaluation of the
            // dephased maximally entangled pair; the coherence factor is the
            // closed-form displacement solution.
            let kappa = (-base.dephasing_exponent(t)).exp();
            let mut rho = DMatrix::<C64>::zeros(4, 4);
            rho[(0, 0)] = c(0.5, 0.0);
            rho[(3, 3)] = c(0.5, 0.0);
            rho[(0, 3)] = c(0.5 * kappa, 0.0);
            rho[(3, 0)] = c(0.5 * kappa, 0.0);
            let exact = wootters_concurrence(&rho).expect("exact concurrence");
            (t, bound_opt, bound_zero, exact)
        })
        .collect();
    for &(t, bound_opt, bound_zero, exact) in &rows {
        worst = worst.max((bound_opt - exact).abs());
        let gap = bound_zero - exact;
        min_gap = min_gap.min(gap);
        let gamma = base.dephasing_exponent(t);
        if (0.3..=2.0).contains(&gamma) {
            min_mid_gap = min_mid_gap.min(gap);
        }
    }
    let passed = worst <= tol && min_gap >= 0.0 && min_mid_gap > 0.03;
    (
        passed,
        format!(
            "max |optimal bound - exact| {worst:.2e} (tol {tol:.1e}); zero-rule gap in \
             [{min_gap:.2e}, ...], intermediate-time gap > {min_mid_gap:.2e}"
        ),
    )
}

/// Criterion 7: three identical channels yield the single-channel bound
/// cubed, deterministically to 1e-10.
fn c7_multi_channel() -> (bool, String) {
    let grid = TimeGrid::new(0.01, 100).expect("grid");
    let modes = ModeSet::from_triples(&[
        (0.6, 1.1, C64::from_polar(0.7, 0.4)),
        (0.4, 2.3, C64::from_polar(0.5, -1.0)),
    ])
    .expect("valid modes");
    let rates = integrated_rates(&build_kernel(&modes, &grid).expect("kernel"));
    let single = mean_entanglement_bound(std::slice::from_ref(&rates), "one").expect("bound");
    let triple =
        mean_entanglement_bound(&[rates.clone(), rates.clone(), rates], "three").expect("bound");
    let mut worst = 0.0f64;
    for (x3, x1) in triple.xbar.iter().zip(&single.xbar) {
        worst = worst.max((x3 - x1.powi(3)).abs());
    }
    (
        worst < 1e-10,
        format!("max |triple - single^3| = {worst:.2e}"),
    )
}

/// Criterion 8: the restoring rule at eps = 1e-3 gives a bound of at least
/// 0.99 at the target and, on 1e3 sampled outcomes, the normalized relative
/// state carries the initial concurrence within 10 eps.
fn c8_restoration() -> (bool, String) {
    let eps = 1e-3;
    let grid = TimeGrid::new(0.01, 150).expect("grid");
    let target = grid.horizon();
    let base = ModeSet::from_triples(&[
        (0.45, 1.4, c(0.0, 0.0)),
        (0.28, 2.9, c(0.0, 0.0)),
        (0.2, 0.6, c(0.0, 0.0)),
    ])
    .expect("valid modes");
    let rule = restore_rule(target, eps).expect("rule");
    let modes = rule.apply(&base, eps).expect("applies");
    let rates = integrated_rates(&build_kernel(&modes, &grid).expect("kernel"));
    let report =
        mean_entanglement_bound(std::slice::from_ref(&rates), rule.descriptor()).expect("bound");
    let xbar_t = report.xbar[grid.n_steps()];
    // Monotone approach of the bound toward one as eps shrinks.
    let mut monotone = true;
    let mut prev = -f64::INFINITY;
    for e in [1e-1, 1e-2, 1e-3] {
        let m = restore_rule(target, e)
            .expect("rule")
            .apply(&base, e)
            .expect("applies");
        let x = bound_at_target_closed_form(std::slice::from_ref(&m), target);
        monotone &= x >= prev - 1e-15;
        prev = x;
    }
    let system = two_qubit_system();
    let sampler = ModeSumSampler::new(&modes, &grid);
    let seed = purpose_seed(8, "acceptance-c8");
    let mut max_dev = 0.0f64;
    for t in 0..1000u64 {
        let noise = sampler.sample(seed, t);
        let traj = propagate_dephasing(&system, &bell(), &[noise], std::slice::from_ref(&rates))
            .expect("trajectory");
        let psi = traj.state(grid.n_steps());
        let norm_sq = traj.norms_sq()[grid.n_steps()];
        let conc = concurrence2(psi).expect("concurrence") / norm_sq;
        max_dev = max_dev.max((conc - 1.0).abs());
    }
    let passed = xbar_t >= 0.99 && max_dev <= 10.0 * eps && monotone;
    (
        passed,
        format!(
            "bound at target {xbar_t:.6}; worst per-outcome concurrence deviation {max_dev:.2e} \
             (allowance {:.0e}); eps-monotone approach {monotone}",
            10.0 * eps
        ),
    )
}

/// Criterion 9: lorentzian kernels with shrinking memory time approach the
/// memoryless decay exp(-gamma_eff t) with gamma_eff = 2 rate, and the
/// averaged coherence is independent of the non-hermitian kernel choice
/// within five combined standard errors at every memory time.
fn c9_markov_limit() -> (bool, String) {
    let rate = 0.8;
    let gamma_eff = 2.0 * rate;
    let grid = TimeGrid::new(0.01, 150).expect("grid");
    let horizon = grid.horizon();
    let system = one_qubit_system();
    let n_samples = 20_000;
    let mut deviations = Vec::new();
    let mut worst_eta_sigma = 0.0f64;
    let mut worst_exact_sigma = 0.0f64;
    for (li, lambda) in [3.0, 8.0, 20.0].into_iter().enumerate() {
        let density = move |w: f64| {
            rate * lambda * lambda / (2.0 * std::f64::consts::PI * (lambda * lambda + w * w))
        };
        let omega_max = 60.0 * lambda;
        let n_modes = (omega_max as usize).max(60); // d_omega = 2
        let base =
            discretize_symmetric(density, omega_max, n_modes, |_| c(0.0, 0.0)).expect("comb");
        // Deterministic part: closed-form coherence of the comb versus the
        // memoryless decay.
        let dev = grid
            .times()
            .map(|t| ((-base.dephasing_exponent(t)).exp() - (-gamma_eff * t).exp()).abs())
            .fold(0.0, f64::max);
        deviations.push((lambda, dev));
        // Two non-hermitian kernel choices over the same alpha.
        let restore = restore_rule(horizon, 1e-3)
            .expect("rule")
            .apply(&base, 1e-3)
            .expect("applies");
        let mut ensembles = Vec::new();
        for (r, modes) in [&base, &restore].into_iter().enumerate() {
            let rates = integrated_rates(&build_kernel(modes, &grid).expect("kernel"));
            let sampler = ModeSumSampler::new(modes, &grid);
            let seed = purpose_seed(90 + 10 * li as u64 + r as u64, "acceptance-c9");
            ensembles.push(
                dephasing_ensemble(
                    &system,
                    &[sampler],
                    &[rates],
                    &plus_state(),
                    &EnsembleOptions::new(n_samples, seed),
                )
                .expect("ensemble"),
            );
        }
        let (ea, eb) = (&ensembles[0], &ensembles[1]);
        for k in 0..grid.n_points() {
            let d = (ea.rho[k][(0, 1)] - eb.rho[k][(0, 1)]).norm();
            let band = ea.se_re[k][(0, 1)].hypot(ea.se_im[k][(0, 1)])
                + eb.se_re[k][(0, 1)].hypot(eb.se_im[k][(0, 1)]);
            worst_eta_sigma = worst_eta_sigma.max(d / band.max(1e-12));
            // Both tie back to the closed-form comb coherence.
            let expect = 0.5 * (-base.dephasing_exponent(grid.time(k))).exp();
            for e in [ea, eb] {
                let d = (e.rho[k][(0, 1)] - c(expect, 0.0)).norm();
                let band = e.se_re[k][(0, 1)].hypot(e.se_im[k][(0, 1)]);
                worst_exact_sigma = worst_exact_sigma.max(d / band.max(1e-12));
            }
        }
    }
    let monotone = deviations.windows(2).all(|w| w[1].1 < w[0].1);
    let final_dev = deviations.last().expect("three memory times").1;
    let final_bound = 3.0 * rate / 20.0;
    let passed =
        monotone && final_dev < final_bound && worst_eta_sigma <= 5.0 && worst_exact_sigma <= 5.0;
    (
        passed,
        format!(
            "markov-limit deviations {:?} (monotone {monotone}, final < {final_bound:.2e}); \
             eta-independence worst {worst_eta_sigma:.2} SE; vs exact {worst_exact_sigma:.2} SE",
            deviations
                .iter()
                .map(|d| (d.0, (d.1 * 1e3).round() / 1e3))
                .collect::<Vec<_>>()
        ),
    )
}

/// Criterion 10: the phase search on three modes recovers the analytic
/// optimal phases within 1e-3 rad and never beats the analytic rule under
/// the exact objective.
fn c10_optimizer() -> (bool, String) {
    let base = ModeSet::from_triples(&[
        (0.6, 0.9, c(0.0, 0.0)),
        (0.4, 2.2, c(0.0, 0.0)),
        (0.3, 1.6, c(0.0, 0.0)),
    ])
    .expect("valid modes");
    let grid = TimeGrid::new(0.01, 150).expect("grid");
    let target = 1.5;
    let objective = Objective::MinimizeXbarAt(target);
    let opts = SearchOptions {
        n_starts: 3,
        budget: 100_000,
        seed: purpose_seed(10, "acceptance-c10"),
        ..Default::default()
    };
    let result = search_squeezing(&base, &grid, objective, &opts).expect("search");
    let found = base
        .with_squeezing(
            |k, _| C64::from_polar(result.magnitude, result.best_phases[k]),
            1e-6,
        )
        .expect("modes");
    let analytic = base
        .with_squeezing(
            |_, w| C64::from_polar(result.magnitude, objective.analytic_phase(w)),
            1e-6,
        )
        .expect("modes");
    let found_x = bound_at_target_closed_form(std::slice::from_ref(&found), target);
    let analytic_x = bound_at_target_closed_form(std::slice::from_ref(&analytic), target);
    let never_lower = found_x >= analytic_x - 1e-12;
    let passed = result.analytic_phase_gap < 1e-3 && never_lower && !result.budget_exhausted;
    (
        passed,
        format!(
            "phase gap {:.2e} rad; found bound {:.8} vs analytic {:.8} ({} evals)",
            result.analytic_phase_gap, found_x, analytic_x, result.evals_used
        ),
    )
}
