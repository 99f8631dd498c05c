//! Shared fixtures for the pipeline benchmarks.

use nalgebra::{DVector, Matrix2};
use unravel_core::{
    discretize_spectral_density, DephasingSystem, ModeSet, SpectralDensityModel, TimeGrid, C64,
};

pub fn ohmic_comb(n_modes: usize) -> ModeSet {
    discretize_spectral_density(
        &SpectralDensityModel::Ohmic {
            amplitude: 0.25,
            cutoff: 1.0,
        },
        12.0,
        n_modes,
        |_| C64::new(0.0, 0.0),
    )
    .expect("valid comb")
}

pub fn squeezed_comb(n_modes: usize) -> ModeSet {
    ohmic_comb(n_modes)
        .with_squeezing(|_, w| C64::from_polar(0.8, 0.9 * w), 1e-3)
        .expect("valid squeezing")
}

pub fn bench_grid() -> TimeGrid {
    TimeGrid::new(0.01, 256).expect("valid grid")
}

pub fn one_qubit() -> DephasingSystem {
    DephasingSystem::new(1, vec![0], vec![Matrix2::zeros()]).expect("valid system")
}

pub fn plus_state() -> DVector<C64> {
    let a = std::f64::consts::FRAC_1_SQRT_2;
    DVector::from_vec(vec![C64::new(a, 0.0), C64::new(a, 0.0)])
}
