//! Thin helpers over `rustfft` with the conventions used across the crate:
//! a grid function `x_j = Σ_k c_k e^{ikθ_j}` at `θ_j = 2πj/M` has
//! coefficients `c_k = (1/M) Σ_j x_j e^{−ikθ_j}`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::opcore::C64;

/// Planner plus plans cached by `(length, inverse)`.
type PlanCache = (FftPlanner<f64>, HashMap<(usize, bool), Arc<dyn Fft<f64>>>);

thread_local! {
    static PLANNER: RefCell<PlanCache> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut guard = p.borrow_mut();
        let (planner, cache) = &mut *guard;
        cache
            .entry((len, inverse))
            .or_insert_with(|| {
                if inverse {
                    planner.plan_fft_inverse(len)
                } else {
                    planner.plan_fft_forward(len)
                }
            })
            .clone()
    })
}

/// Grid samples to Fourier coefficients; output index `k mod M`.
pub fn coefficients(samples: &[C64]) -> Vec<C64> {
    let m = samples.len();
    let mut buf = samples.to_vec();
    if m == 0 {
        return buf;
    }
    plan(m, false).process(&mut buf);
    let inv = 1.0 / m as f64;
    buf.iter_mut().for_each(|x| *x *= inv);
    buf
}

/// Fourier coefficients (index `k mod M`) to grid samples.
pub fn synthesize(coeffs: &[C64]) -> Vec<C64> {
    let mut buf = coeffs.to_vec();
    if buf.is_empty() {
        return buf;
    }
    plan(buf.len(), true).process(&mut buf);
    buf
}

/// Signed frequency of FFT bin `j` on a grid of size `m`; the Nyquist bin maps to `m/2`.
pub fn frequency(j: usize, m: usize) -> i64 {
    if j <= m / 2 {
        j as i64
    } else {
        j as i64 - m as i64
    }
}

pub fn grid_angle(j: usize, m: usize) -> f64 {
    2.0 * std::f64::consts::PI * j as f64 / m as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_convention() {
        let m = 16;
        // x = e^{2iθ}
        let samples: Vec<C64> = (0..m)
            .map(|j| C64::from_polar(1.0, 2.0 * grid_angle(j, m)))
            .collect();
        let c = coefficients(&samples);
        assert!((c[2] - C64::new(1.0, 0.0)).norm() < 1e-14);
        let back = synthesize(&c);
        for (a, b) in back.iter().zip(&samples) {
            assert!((a - b).norm() < 1e-14);
        }
        assert_eq!(frequency(15, 16), -1);
        assert_eq!(frequency(8, 16), 8);
    }
}
