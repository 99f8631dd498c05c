use crate::error::{Error, Result};

/// Uniform time grid `t_k = k * dt`, `k = 0..=n_steps`, starting at zero.
///
/// The grid spacing is the single accuracy knob for every trapezoidal time
/// integral in the crate.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    dt: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, n_steps: usize) -> Result<Self> {
        if !dt.is_finite() || dt <= 0.0 {
            return Err(Error::InvalidGrid(format!("dt must be positive, got {dt}")));
        }
        if n_steps == 0 {
            return Err(Error::InvalidGrid("n_steps must be at least 1".into()));
        }
        Ok(Self { dt, n_steps })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Number of grid points, `n_steps + 1`.
    pub fn n_points(&self) -> usize {
        self.n_steps + 1
    }

    /// Final time `T = n_steps * dt`.
    pub fn horizon(&self) -> f64 {
        self.dt * self.n_steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        self.dt * k as f64
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points()).map(|k| self.time(k))
    }

    /// Grid with the same horizon and `factor` times as many steps.
    pub fn refine(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::InvalidGrid(
                "refinement factor must be positive".into(),
            ));
        }
        Self::new(self.dt / factor as f64, self.n_steps * factor)
    }

    /// Index of the grid point closest to `t`, or an error if `t` lies
    /// outside the horizon.
    pub fn nearest_index(&self, t: f64) -> Result<usize> {
        if !t.is_finite() || t < -0.5 * self.dt || t > self.horizon() + 0.5 * self.dt {
            return Err(Error::InvalidGrid(format!(
                "time {t} outside grid horizon {}",
                self.horizon()
            )));
        }
        Ok(((t / self.dt).round() as usize).min(self.n_steps))
    }
}

/// Cumulative trapezoidal integral of samples on a grid; entry `k` holds
/// the integral from `t_0` to `t_k`.
pub(crate) fn cumulative_trapezoid_c64(values: &[crate::C64], dt: f64) -> Vec<crate::C64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = crate::C64::new(0.0, 0.0);
    out.push(acc);
    for w in values.windows(2) {
        acc += (w[0] + w[1]) * (0.5 * dt);
        out.push(acc);
    }
    out
}

pub(crate) fn cumulative_trapezoid_f64(values: &[f64], dt: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(acc);
    for w in values.windows(2) {
        acc += (w[0] + w[1]) * (0.5 * dt);
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_basics() {
        let g = TimeGrid::new(0.25, 8).unwrap();
        assert_eq!(g.n_points(), 9);
        assert!((g.horizon() - 2.0).abs() < 1e-15);
        assert!((g.time(3) - 0.75).abs() < 1e-15);
        assert_eq!(g.nearest_index(0.76).unwrap(), 3);
        assert!(TimeGrid::new(0.0, 4).is_err());
        assert!(TimeGrid::new(0.1, 0).is_err());
        assert!(g.nearest_index(3.0).is_err());
    }

    #[test]
    fn trapezoid_linear_is_exact() {
        let dt = 0.1;
        let vals: Vec<f64> = (0..=10).map(|k| 2.0 * (k as f64 * dt)).collect();
        let cum = cumulative_trapezoid_f64(&vals, dt);
        for (k, c) in cum.iter().enumerate() {
            let t = k as f64 * dt;
            assert!((c - t * t).abs() < 1e-14);
        }
    }
}
