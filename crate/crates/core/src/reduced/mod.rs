//! The flow on the central manifold and its stability apparatus.
//!
//! On the manifold the slow variables are the normal velocities `w_k` and
//! normal offsets `y_k`; each agent's pair rotates with unit frequency while
//! its amplitude `a_k = |(w_k, y_k)|` drains through cubic terms. The
//! periodic coefficients, influence weights, and Lyapunov functions defined
//! here drive the `1/sqrt(t)` decay experiments.

mod cubic;
mod polar;

pub use crate::manifold::{quadratic_means, QuadraticMeans};
pub use cubic::{
    positive_antiderivative, Coeff, CubicSystem, SampledAntiderivative,
};
pub use polar::{
    extract_polar, influence_weights, lyapunov_generic, lyapunov_sample, polar_floor, polar_rhs,
    t_norm, LyapunovSample, PolarDeriv, PolarPath, PolarState, PolarSystem, Weights,
};

use crate::integrate::{OdeSystem, RhsError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReducedError {
    #[error("all amplitudes vanish; weights are undefined")]
    AllZeroAmplitudes,
    #[error("amplitude {value} at agent {agent} is negative")]
    NegativeAmplitude { agent: usize, value: f64 },
    #[error("length mismatch between amplitude and phase vectors ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("samples too coarse at sample {sample}, agent {agent}: phase moved {delta:.3} rad; refine the sampling")]
    CoarseSampling { sample: usize, agent: usize, delta: f64 },
}

/// Per-cycle damping coefficient of the amplitude equation; pi-periodic and
/// nonpositive.
pub fn damping_a(theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    -(c * c) * (17.0 / 25.0 * c * c - 12.0 / 25.0 * s * c + 8.0 / 25.0 * s * s)
}

/// Mean-field coupling coefficient of the amplitude equation; pi-periodic
/// and positive.
pub fn coupling_e(theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    43.0 / 100.0 * c * c + 2.0 / 100.0 * s * c + 57.0 / 100.0 * s * s
}

/// Quadratic tangential feedback of agent `k` on the manifold: the value of
/// the self-propulsion factor `1 - u_k^2 - w_k^2` expressed through the
/// manifold map, i.e. `-2 z_k - w_k^2` with `z` quadratic in `(w, y)`.
pub fn feedback_s(w: f64, y: f64, q: &QuadraticMeans) -> f64 {
    -(17.0 / 25.0 * w * w - 12.0 / 25.0 * w * y + 8.0 / 25.0 * y * y)
        + (43.0 / 100.0 * q.ww + 2.0 / 100.0 * q.wy + 57.0 / 100.0 * q.yy)
}

/// Positive pi-periodic antiderivative of `damping_a + 59/200`.
pub fn antideriv_b(theta: f64) -> f64 {
    1.0 - 17.0 / 100.0 * (2.0 * theta).sin() - 9.0 / 800.0 * (4.0 * theta).sin()
        - 3.0 / 25.0 * theta.cos().powi(4)
}

/// Positive pi-periodic antiderivative of
/// `(cos^2/2 + coupling_e/2)^2 - 437/1600`.
pub fn antideriv_c(theta: f64) -> f64 {
    1.0 + 43.0 / 400.0 * (2.0 * theta).sin() - 1.0 / 400.0 * (2.0 * theta).cos()
        + 231.0 / 40000.0 * (4.0 * theta).sin()
        - 43.0 / 160000.0 * (4.0 * theta).cos()
}

/// Central-manifold flow in Cartesian variables, on the zero-mean slice:
///
/// ```text
/// w_k' = -y_k - m + w_k s_k,    y_k' = w_k,    m = mean(s_k w_k)
/// ```
///
/// Writes the derivatives and returns the heading rate `m`.
pub fn central_rhs(w: &[f64], y: &[f64], dw: &mut [f64], dy: &mut [f64]) -> f64 {
    let n = w.len();
    let q = quadratic_means(w, y);
    let mut m = 0.0;
    for k in 0..n {
        m += feedback_s(w[k], y[k], &q) * w[k];
    }
    m /= n as f64;
    for k in 0..n {
        let s = feedback_s(w[k], y[k], &q);
        dw[k] = -y[k] - m + w[k] * s;
        dy[k] = w[k];
    }
    m
}

/// Central-manifold flow as an integrable system, layout `[w | y]`.
#[derive(Debug, Clone, Copy)]
pub struct CentralSystem {
    pub n: usize,
}

impl OdeSystem for CentralSystem {
    fn dim(&self) -> usize {
        2 * self.n
    }
    fn eval(&self, _t: f64, state: &[f64], dydt: &mut [f64]) -> Result<(), RhsError> {
        let n = self.n;
        let (w, y) = state.split_at(n);
        let (dw, dy) = dydt.split_at_mut(n);
        central_rhs(w, y, dw, dy);
        Ok(())
    }
}

#[cfg(test)]
mod tests;
