//! Polar form of the central-manifold flow, phase unwrapping through the
//! origin, influence weights, and the Lyapunov functions built on them.

use super::{antideriv_b, antideriv_c, coupling_e, damping_a, feedback_s, ReducedError};
use crate::integrate::{OdeSystem, RhsError};
use std::f64::consts::PI;

/// Amplitudes and continuous phase representatives of the manifold flow.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarState {
    pub t: f64,
    pub a: Vec<f64>,
    pub theta: Vec<f64>,
}

impl PolarState {
    pub fn new(t: f64, a: Vec<f64>, theta: Vec<f64>) -> Result<Self, ReducedError> {
        if a.len() != theta.len() {
            return Err(ReducedError::LengthMismatch(a.len(), theta.len()));
        }
        if let Some((agent, &value)) = a.iter().enumerate().find(|(_, &v)| v < 0.0) {
            return Err(ReducedError::NegativeAmplitude { agent, value });
        }
        Ok(Self { t, a, theta })
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    /// Largest amplitude.
    pub fn a_max(&self) -> f64 {
        self.a.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    pub fn to_cartesian(&self) -> (Vec<f64>, Vec<f64>) {
        let w = self.a.iter().zip(&self.theta).map(|(&a, &th)| a * th.cos()).collect();
        let y = self.a.iter().zip(&self.theta).map(|(&a, &th)| a * th.sin()).collect();
        (w, y)
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = self.a.clone();
        out.extend_from_slice(&self.theta);
        out
    }
}

/// Amplitude floor below which a phase is frozen: agents this much smaller
/// than `a_max^2.75` sit in the excepted set where the phase equation
/// degenerates.
pub fn polar_floor(a_max: f64) -> f64 {
    1e-3 * a_max.powf(2.75)
}

#[derive(Debug, Clone)]
pub struct PolarDeriv {
    pub a_dot: Vec<f64>,
    pub theta_dot: Vec<f64>,
    pub m: f64,
    /// Agents whose phase derivative was frozen at 1 (the degenerate set).
    pub frozen: Vec<bool>,
}

/// Polar form of the central-manifold flow:
///
/// ```text
/// a_k'  = -m cos(th_k) + a_k^3 A(th_k) + a_k cos^2(th_k) mean_l(a_l^2 E(th_l))
/// th_k' = 1 + (m / a_k) sin(th_k) - s_k sin(th_k) cos(th_k)
/// ```
///
/// Negative amplitudes are tolerated and mean the antipodal phase chart, so
/// trajectories may pass straight through the origin.
pub fn polar_rhs(a: &[f64], theta: &[f64]) -> PolarDeriv {
    let n = a.len();
    assert_eq!(n, theta.len());
    let mut w = vec![0.0; n];
    let mut y = vec![0.0; n];
    for k in 0..n {
        let (s, c) = theta[k].sin_cos();
        w[k] = a[k] * c;
        y[k] = a[k] * s;
    }
    let q = crate::manifold::quadratic_means(&w, &y);
    let mut m = 0.0;
    for k in 0..n {
        m += feedback_s(w[k], y[k], &q) * w[k];
    }
    m /= n as f64;
    let coupling: f64 =
        a.iter().zip(theta).map(|(&ak, &th)| ak * ak * coupling_e(th)).sum::<f64>() / n as f64;
    let a_max = a.iter().fold(0.0f64, |mx, &v| mx.max(v.abs()));
    let floor = polar_floor(a_max);
    let mut deriv = PolarDeriv {
        a_dot: vec![0.0; n],
        theta_dot: vec![0.0; n],
        m,
        frozen: vec![false; n],
    };
    for k in 0..n {
        let (s, c) = theta[k].sin_cos();
        deriv.a_dot[k] = -m * c + a[k].powi(3) * damping_a(theta[k]) + a[k] * c * c * coupling;
        if a[k].abs() < floor || a[k] == 0.0 {
            deriv.theta_dot[k] = 1.0;
            deriv.frozen[k] = true;
        } else {
            let s_k = feedback_s(w[k], y[k], &q);
            deriv.theta_dot[k] = 1.0 + m / a[k] * s - s_k * s * c;
        }
    }
    deriv
}

/// Polar flow as an integrable system, layout `[a | theta]`.
#[derive(Debug, Clone, Copy)]
pub struct PolarSystem {
    pub n: usize,
}

impl OdeSystem for PolarSystem {
    fn dim(&self) -> usize {
        2 * self.n
    }
    fn eval(&self, _t: f64, state: &[f64], dydt: &mut [f64]) -> Result<(), RhsError> {
        let n = self.n;
        let deriv = polar_rhs(&state[0..n], &state[n..2 * n]);
        dydt[0..n].copy_from_slice(&deriv.a_dot);
        dydt[n..2 * n].copy_from_slice(&deriv.theta_dot);
        Ok(())
    }
}

/// Amplitude/phase trajectory extracted from sampled Cartesian paths.
#[derive(Debug, Clone)]
pub struct PolarPath {
    pub times: Vec<f64>,
    /// Sample-major amplitudes, `a[i][k]`.
    pub a: Vec<Vec<f64>>,
    /// Sample-major unwrapped phases.
    pub theta: Vec<Vec<f64>>,
    /// `(sample, agent)` pairs where the phase jumped by pi through the
    /// origin.
    pub jumps: Vec<(usize, usize)>,
}

fn wrap_to_pi(angle: f64) -> f64 {
    let mut a = angle % (2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    } else if a <= -PI {
        a += 2.0 * PI;
    }
    a
}

/// Continuous polar representation of sampled `(w, y)` paths.
///
/// Away from the origin the phase is unwrapped in the usual way; a passage
/// through the origin inserts a jump of (approximately) pi chosen so the
/// double angle stays continuous. Steps of more than a quarter turn away
/// from a passage are rejected as undersampled.
pub fn extract_polar(
    times: &[f64],
    w: &[Vec<f64>],
    y: &[Vec<f64>],
) -> Result<PolarPath, ReducedError> {
    assert_eq!(times.len(), w.len());
    assert_eq!(times.len(), y.len());
    let samples = times.len();
    let n = w.first().map_or(0, |row| row.len());
    let mut a = vec![vec![0.0; n]; samples];
    let mut theta = vec![vec![0.0; n]; samples];
    let mut jumps = Vec::new();
    for agent in 0..n {
        let mut prev: Option<f64> = None;
        let mut prev_was_jump = false;
        let mut pending_zero_run: Vec<usize> = Vec::new();
        for i in 0..samples {
            let (wk, yk) = (w[i][agent], y[i][agent]);
            let radius = (wk * wk + yk * yk).sqrt();
            a[i][agent] = radius;
            if radius == 0.0 {
                // Phase undefined here; fill once a neighbor fixes it.
                pending_zero_run.push(i);
                continue;
            }
            let raw = yk.atan2(wk);
            let unwrapped = match prev {
                None => raw,
                Some(p) => {
                    let d = wrap_to_pi(raw - p);
                    if d.abs() < PI / 2.0 {
                        prev_was_jump = false;
                        p + d
                    } else if d.abs() >= 3.0 * PI / 4.0 && !prev_was_jump {
                        // An isolated near-pi step is an origin passage;
                        // repeated ones mean the rotation is undersampled.
                        jumps.push((i, agent));
                        prev_was_jump = true;
                        p + d
                    } else {
                        return Err(ReducedError::CoarseSampling {
                            sample: i,
                            agent,
                            delta: d.abs(),
                        });
                    }
                }
            };
            for &j in &pending_zero_run {
                theta[j][agent] = match prev {
                    Some(p) => p,
                    None => unwrapped,
                };
            }
            pending_zero_run.clear();
            theta[i][agent] = unwrapped;
            prev = Some(unwrapped);
        }
        // Identically zero (or trailing-zero) components: the conventional
        // representative rotates with unit speed.
        match prev {
            None => {
                for i in 0..samples {
                    theta[i][agent] = times[i];
                }
            }
            Some(p) => {
                for &j in &pending_zero_run {
                    theta[j][agent] = p;
                }
            }
        }
    }
    Ok(PolarPath { times: times.to_vec(), a, theta, jumps })
}

/// Lipschitz squash used by the influence weights: `r^2` inside the unit
/// interval, saturated at 1 outside.
pub fn t_norm(r: f64) -> f64 {
    if r.abs() >= 1.0 {
        1.0
    } else {
        r * r
    }
}

/// Influence weights and the induced large/small partition.
#[derive(Debug, Clone)]
pub struct Weights {
    pub t: Vec<f64>,
    /// Agents with `a_k >= a_max^2.75` (weight exactly 1).
    pub large: Vec<usize>,
    /// The rest, with weight `a_k^2 / a_max^5.5`.
    pub small: Vec<usize>,
}

/// Weights `T_k = t_norm(a_k / a_max^2.75)` diminishing the influence of
/// agents oscillating much closer to the origin than the largest one.
pub fn influence_weights(a: &[f64]) -> Result<Weights, ReducedError> {
    let a_max = a.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    if a_max == 0.0 {
        return Err(ReducedError::AllZeroAmplitudes);
    }
    let cut = a_max.powf(2.75);
    let mut weights = Weights { t: Vec::with_capacity(a.len()), large: Vec::new(), small: Vec::new() };
    for (k, &ak) in a.iter().enumerate() {
        weights.t.push(t_norm(ak.abs() / cut));
        if ak.abs() >= cut {
            weights.large.push(k);
        } else {
            weights.small.push(k);
        }
    }
    Ok(weights)
}

/// One evaluation of the Lyapunov machinery.
#[derive(Debug, Clone)]
pub struct LyapunovSample {
    /// Mean of the per-agent values.
    pub w: f64,
    pub w_k: Vec<f64>,
    pub t_k: Vec<f64>,
    pub large: Vec<usize>,
    pub small: Vec<usize>,
}

/// Weighted Lyapunov function of the polar flow:
///
/// ```text
/// W_k = a_k^2 / (2 a_k^2 (B(th_k) + mean_l T_l C(th_l)) + 1)
/// ```
///
/// with `B`, `C` the positive periodic antiderivatives and `T_l` the
/// influence weights.
pub fn lyapunov_sample(a: &[f64], theta: &[f64]) -> Result<LyapunovSample, ReducedError> {
    if a.len() != theta.len() {
        return Err(ReducedError::LengthMismatch(a.len(), theta.len()));
    }
    let n = a.len();
    let weights = influence_weights(a)?;
    let mean_tc: f64 = (0..n)
        .map(|l| weights.t[l] * antideriv_c(theta[l]))
        .sum::<f64>()
        / n as f64;
    let w_k: Vec<f64> = (0..n)
        .map(|k| {
            let a2 = a[k] * a[k];
            a2 / (2.0 * a2 * (antideriv_b(theta[k]) + mean_tc) + 1.0)
        })
        .collect();
    let w = w_k.iter().sum::<f64>() / n as f64;
    Ok(LyapunovSample { w, w_k, t_k: weights.t, large: weights.large, small: weights.small })
}

/// Unweighted variant for the generic cubic system: caller supplies the
/// per-agent antiderivative values `B_k(t)` and `C_l(t)`.
pub fn lyapunov_generic(x: &[f64], b_vals: &[f64], c_vals: &[f64]) -> (f64, Vec<f64>) {
    let n = x.len();
    assert_eq!(n, b_vals.len());
    assert_eq!(n, c_vals.len());
    let mean_c: f64 = c_vals.iter().sum::<f64>() / n as f64;
    let w_k: Vec<f64> = (0..n)
        .map(|k| {
            let x2 = x[k] * x[k];
            x2 / (2.0 * x2 * (b_vals[k] + mean_c) + 1.0)
        })
        .collect();
    let w = w_k.iter().sum::<f64>() / n as f64;
    (w, w_k)
}
