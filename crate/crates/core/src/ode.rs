//! Adaptive Dormand–Prince 5(4) integration for complex state vectors.
//!
//! The embedded fourth-order solution drives the step-size controller; the
//! fifth-order solution is propagated (local extrapolation). First-same-as-
//! last is exploited, so an accepted step costs six derivative evaluations.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone)]
pub struct AdaptiveOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub initial_step: Option<f64>,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 10_000_000,
            initial_step: None,
        }
    }
}

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
/// Difference between the fifth- and fourth-order weights.
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

/// Integrate `dy/dt = f(t, y)` from `t0` to `t1`, landing on `t1` exactly.
pub fn integrate<F>(
    mut f: F,
    t0: f64,
    t1: f64,
    y0: &DVector<C64>,
    opts: &AdaptiveOptions,
) -> Result<DVector<C64>>
where
    F: FnMut(f64, &DVector<C64>, &mut DVector<C64>),
{
    if !t0.is_finite() || !t1.is_finite() || t1 < t0 {
        return Err(Error::Integration(format!("backward span {t0} -> {t1}")));
    }
    if t1 == t0 {
        return Ok(y0.clone());
    }
    let dim = y0.len();
    let span = t1 - t0;
    let mut h = opts.initial_step.unwrap_or(span / 100.0).min(span);
    let mut t = t0;
    let mut y = y0.clone();
    let mut k: Vec<DVector<C64>> = (0..7).map(|_| DVector::zeros(dim)).collect();
    let mut stage = DVector::zeros(dim);
    let mut y_next = DVector::zeros(dim);
    f(t, &y, &mut k[0]);

    for _ in 0..opts.max_steps {
        if t >= t1 {
            return Ok(y);
        }
        h = h.min(t1 - t);
        // Stages 2..7; the last stage lands on t + h and doubles as the
        // first stage of the next step when accepted.
        for s in 0..6 {
            stage.copy_from(&y);
            for (j, kj) in k.iter().take(s + 1).enumerate() {
                let a = A[s][j];
                if a != 0.0 {
                    stage.axpy(C64::new(a * h, 0.0), kj, C64::new(1.0, 0.0));
                }
            }
            f(t + C[s] * h, &stage, &mut k[s + 1]);
        }
        // Fifth-order solution is the last stage argument.
        y_next.copy_from(&y);
        for (j, kj) in k.iter().take(6).enumerate() {
            let a = A[5][j];
            if a != 0.0 {
                y_next.axpy(C64::new(a * h, 0.0), kj, C64::new(1.0, 0.0));
            }
        }
        // Scaled error estimate.
        let mut err_sq = 0.0;
        for i in 0..dim {
            let mut e = C64::default();
            for (j, kj) in k.iter().enumerate() {
                if E[j] != 0.0 {
                    e += kj[i] * E[j];
                }
            }
            let scale = opts.atol + opts.rtol * y[i].norm().max(y_next[i].norm());
            let r = e.norm() * h / scale;
            err_sq += r * r;
        }
        let err = (err_sq / dim as f64).sqrt();
        if err <= 1.0 {
            t += h;
            std::mem::swap(&mut y, &mut y_next);
            k.swap(0, 6); // first-same-as-last
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= factor;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            if h < 1e-14 * span {
                return Err(Error::Integration(format!(
                    "step size collapsed near t = {t} (error {err:.3e})"
                )));
            }
        }
    }
    Err(Error::Integration("step budget exhausted".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn scalar_phase_rotation() {
        let omega = 2.5;
        let y0 = DVector::from_vec(vec![C64::new(1.0, 0.0)]);
        let y = integrate(
            |_, y, out| out[0] = C64::new(0.0, -omega) * y[0],
            0.0,
            3.0,
            &y0,
            &AdaptiveOptions::default(),
        )
        .unwrap();
        let expect = C64::new(0.0, -omega * 3.0).exp();
        assert!((y[0] - expect).norm() < 1e-9);
        assert_abs_diff_eq!(y[0].norm(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn time_dependent_coefficient() {
        // y' = -i t y  =>  y(t) = exp(-i t^2 / 2).
        let y0 = DVector::from_vec(vec![C64::new(1.0, 0.0)]);
        let y = integrate(
            |t, y, out| out[0] = C64::new(0.0, -t) * y[0],
            0.0,
            2.0,
            &y0,
            &AdaptiveOptions::default(),
        )
        .unwrap();
        let expect = C64::new(0.0, -2.0).exp();
        assert!((y[0] - expect).norm() < 1e-9);
    }

    #[test]
    fn zero_span_is_identity() {
        let y0 = DVector::from_vec(vec![C64::new(0.3, 0.4)]);
        let y = integrate(
            |_, _, out| out[0] = C64::default(),
            1.0,
            1.0,
            &y0,
            &Default::default(),
        )
        .unwrap();
        assert_eq!(y[0], y0[0]);
    }
}
