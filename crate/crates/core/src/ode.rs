//! Dormand–Prince 5(4) embedded Runge–Kutta pair with PI step-size control.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
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
// fifth-order weights equal the last row of A (FSAL)
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
// B − B̂ (fifth minus embedded fourth order)
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;
const PI_ALPHA: f64 = 0.7 / 5.0;
const PI_BETA: f64 = 0.4 / 5.0;
const MAX_REJECTS: usize = 200;

/// Weighted max-norm: `max_i |err_i| / (atol + rtol · max(|y_i|, |ŷ_i|))`.
pub(crate) fn mixed_norm(atol: f64, rtol: f64, y: &[f64], y_new: &[f64], err: &[f64]) -> f64 {
    y.iter()
        .zip(y_new)
        .zip(err)
        .map(|((a, b), e)| e.abs() / (atol + rtol * a.abs().max(b.abs())))
        .fold(0.0, f64::max)
}

/// Adaptive integrator state for a right-hand side `f(t, y, dy)`.
pub(crate) struct Stepper<F>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    rhs: F,
    k: Vec<Vec<f64>>,
    stage: Vec<f64>,
    y_new: Vec<f64>,
    err: Vec<f64>,
    h: f64,
    h_max: f64,
    err_prev: f64,
    pub accepted: usize,
    pub rejected: usize,
}

impl<F> Stepper<F>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    pub fn new(rhs: F, dim: usize, h_init: f64, h_max: f64) -> Self {
        Self {
            rhs,
            k: vec![vec![0.0; dim]; 7],
            stage: vec![0.0; dim],
            y_new: vec![0.0; dim],
            err: vec![0.0; dim],
            h: h_init.min(h_max),
            h_max,
            err_prev: 1e-4,
            accepted: 0,
            rejected: 0,
        }
    }

    /// Change the step cap; the next proposal is clipped to it.
    pub fn set_h_max(&mut self, h_max: f64) {
        self.h_max = h_max;
        self.h = self.h.min(h_max);
    }

    fn attempt(&mut self, t: f64, y: &[f64], h: f64) {
        let dim = y.len();
        (self.rhs)(t, y, &mut self.k[0]);
        for s in 1..7 {
            for i in 0..dim {
                let mut acc = 0.0;
                for (j, a) in A[s].iter().enumerate().take(s) {
                    acc += a * self.k[j][i];
                }
                self.stage[i] = y[i] + h * acc;
            }
            let (head, tail) = self.k.split_at_mut(s);
            let _ = head;
            (self.rhs)(t + C[s] * h, &self.stage, &mut tail[0]);
        }
        for i in 0..dim {
            let mut acc = 0.0;
            let mut err = 0.0;
            for s in 0..7 {
                acc += B[s] * self.k[s][i];
                err += E[s] * self.k[s][i];
            }
            self.y_new[i] = y[i] + h * acc;
            self.err[i] = h * err;
        }
    }

    /// Take one accepted step from `(t, y)` without passing `t_limit`.
    /// `norm(y, y_new, err)` measures the local error (accept when ≤ 1).
    /// Returns the new time; the new state is written into `y`.
    pub fn advance<N>(&mut self, t: f64, y: &mut [f64], t_limit: f64, norm: N) -> Result<f64>
    where
        N: Fn(&[f64], &[f64], &[f64]) -> f64,
    {
        let mut rejects = 0;
        loop {
            let remaining = t_limit - t;
            // land exactly on the limit rather than a rounding error short of it
            let clipped = self.h >= remaining * (1.0 - 1e-8);
            let h = if clipped { remaining } else { self.h };
            if h <= f64::EPSILON * t.abs().max(1.0) * 4.0 {
                return Err(Error::StepUnderflow { t });
            }
            self.attempt(t, y, h);
            let raw = norm(y, &self.y_new, &self.err);
            let err = if raw.is_finite() { raw } else { f64::INFINITY };
            if err <= 1.0 {
                let fac = if err == 0.0 {
                    FAC_MAX
                } else {
                    (SAFETY * err.powf(-PI_ALPHA) * self.err_prev.powf(PI_BETA))
                        .clamp(FAC_MIN, FAC_MAX)
                };
                self.err_prev = err.max(1e-4);
                let proposed = (h * fac).min(self.h_max);
                // a step clipped at the limit must not shrink the proposal
                self.h = if clipped { self.h.max(proposed) } else { proposed };
                y.copy_from_slice(&self.y_new);
                self.accepted += 1;
                return Ok(if clipped { t_limit } else { t + h });
            }
            self.rejected += 1;
            rejects += 1;
            if rejects > MAX_REJECTS {
                return Err(Error::StepUnderflow { t });
            }
            let fac = if err.is_finite() {
                (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, 1.0)
            } else {
                FAC_MIN
            };
            self.h = h * fac;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        let mut st = Stepper::new(
            |_t, y: &[f64], dy: &mut [f64]| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            2,
            0.01,
            0.5,
        );
        let mut y = vec![1.0, 0.0];
        let mut t = 0.0;
        let end = 10.0;
        while t < end {
            t = st
                .advance(t, &mut y, end, |a, b, e| mixed_norm(1e-12, 1e-12, a, b, e))
                .unwrap();
        }
        assert_eq!(t, end);
        assert!((y[0] - end.cos()).abs() < 1e-9);
        assert!((y[1] + end.sin()).abs() < 1e-9);
    }

    #[test]
    fn order_of_accuracy() {
        // fixed-step error of y' = y on [0, 1] decays like h^5
        let run = |steps: usize| {
            let mut st = Stepper::new(|_t, y: &[f64], dy: &mut [f64]| dy[0] = y[0], 1, 1.0, 1.0);
            let h = 1.0 / steps as f64;
            let mut y = vec![1.0];
            let mut t = 0.0;
            for k in 0..steps {
                let target = (k + 1) as f64 * h;
                st.h = h;
                t = st.advance(t, &mut y, target, |_, _, _| 0.0).unwrap();
            }
            (y[0] - 1f64.exp()).abs()
        };
        let e1 = run(8);
        let e2 = run(16);
        let order = (e1 / e2).log2();
        assert!(order > 4.6 && order < 5.5, "observed order {order}");
    }
}
