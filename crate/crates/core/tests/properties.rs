//! Property tests for the kernel structure and the measure axioms.

use nalgebra::DVector;
use proptest::prelude::*;
use unravel_core::{build_kernel, concurrence2, linalg, ModeSet, TimeGrid, C64};

fn mode_strategy() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    // (g, omega, |xi|, arg xi)
    (0.0..1.0f64, -3.0..3.0f64, 0.0..0.9f64, -3.1..3.1f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_structure_matches_mode_sums(
        raw in proptest::collection::vec(mode_strategy(), 1..4),
        dt in 0.01..0.2f64,
        n_steps in 2usize..24,
    ) {
        let triples: Vec<(f64, f64, C64)> = raw
            .iter()
            .map(|&(g, w, r, th)| (g, w, C64::from_polar(r, th)))
            .collect();
        let modes = ModeSet::from_triples(&triples).unwrap();
        let grid = TimeGrid::new(dt, n_steps).unwrap();
        let kernel = build_kernel(&modes, &grid).unwrap();
        let n = grid.n_points();
        for i in 0..n {
            for j in 0..n {
                // Hermiticity of alpha, symmetry of eta.
                prop_assert!((kernel.alpha()[(i, j)] - kernel.alpha()[(j, i)].conj()).norm() < 1e-12);
                prop_assert!((kernel.eta()[(i, j)] - kernel.eta()[(j, i)]).norm() < 1e-12);
                // Direct evaluation from the independent mode-sum formulas.
                let direct_a = modes.alpha_at(grid.time(i) - grid.time(j));
                prop_assert!((kernel.alpha()[(i, j)] - direct_a).norm() < 1e-10);
                let direct_e = modes.eta_at(grid.time(i), grid.time(j));
                prop_assert!((kernel.eta()[(i, j)] - direct_e).norm() < 1e-10);
            }
        }
        // Stationarity in the index difference, anti-stationarity in the sum.
        for i in 0..n.saturating_sub(1) {
            for j in 0..n.saturating_sub(1) {
                prop_assert!(
                    (kernel.alpha()[(i, j)] - kernel.alpha()[(i + 1, j + 1)]).norm() < 1e-12
                );
                if i < n - 1 && j >= 1 {
                    prop_assert!(
                        (kernel.eta()[(i, j)] - kernel.eta()[(i + 1, j - 1)]).norm() < 1e-12
                    );
                }
            }
        }
        // Gram positivity of alpha * dt.
        let scaled = kernel.alpha().map(|v| v * dt);
        let eigs = linalg::hermitian_eigenvalues(&scaled).unwrap();
        let max = eigs[0].max(1e-300);
        prop_assert!(eigs.iter().all(|v| *v > -1e-10 * max));
    }

    #[test]
    fn concurrence_is_degree_two_homogeneous(
        re in proptest::collection::vec(-1.0..1.0f64, 4),
        im in proptest::collection::vec(-1.0..1.0f64, 4),
        u_re in -2.0..2.0f64,
        u_im in -2.0..2.0f64,
    ) {
        let psi = DVector::from_iterator(4, re.iter().zip(&im).map(|(&a, &b)| C64::new(a, b)));
        let u = C64::new(u_re, u_im);
        let base = concurrence2(&psi).unwrap();
        let scaled = concurrence2(&psi.map(|v| v * u)).unwrap();
        prop_assert!((scaled - u.norm_sqr() * base).abs() < 1e-12 * (1.0 + base));
    }

    #[test]
    fn noise_is_bitwise_deterministic(seed in any::<u64>()) {
        let modes = ModeSet::from_triples(&[(0.7, 1.2, C64::new(0.3, 0.2))]).unwrap();
        let grid = TimeGrid::new(0.1, 8).unwrap();
        let a = unravel_core::sample_noise_modesum(&modes, &grid, seed);
        let b = unravel_core::sample_noise_modesum(&modes, &grid, seed);
        for (x, y) in a.z_star().iter().zip(b.z_star()) {
            prop_assert_eq!(x.re.to_bits(), y.re.to_bits());
            prop_assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }
}
