//! Scenario generation, decay-rate fitting, drift accounting, and
//! verification harnesses for the quantitative claims about the swarm.

mod probes;
mod scenario;

pub use probes::{
    decay_experiment, flocking_asymptote, roots_of_unity_residual, sharpness_report,
    stability_witness, symmetric_dichotomy_probe, DecayRates, Dichotomy, FlockingAsymptote,
    SharpnessReport, WitnessReport,
};
pub use scenario::{
    make_scenario, manifold_coeffs, on_manifold_frame, ScenarioConfig, ScenarioKind,
    ScenarioState,
};

use crate::integrate::{IntegrateError, Trajectory};
use crate::model::{frame_mean_field, FrameState, ModelError};
use crate::numerics::{self, LinearFit};
use crate::reduced::{lyapunov_sample, ReducedError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("power-law fit needs positive values, found {value} at t = {t}")]
    NonPositiveValue { t: f64, value: f64 },
    #[error("fit window [{lo}, {hi}] holds only {found} samples, need at least {need}")]
    ShortWindow { lo: f64, hi: f64, found: usize, need: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
    #[error(transparent)]
    Reduced(#[from] ReducedError),
}

/// A fitted power law `value ~ C t^slope` on a log-log window.
#[derive(Debug, Clone, Copy)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub window: (f64, f64),
    pub rms_residual: f64,
}

/// Least-squares line through `(log t, log value)` restricted to the window.
pub fn fit_power_law(
    times: &[f64],
    values: &[f64],
    window: (f64, f64),
) -> Result<DecayFit, AnalysisError> {
    assert_eq!(times.len(), values.len());
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for (&t, &v) in times.iter().zip(values) {
        if t < window.0 || t > window.1 {
            continue;
        }
        if !(v > 0.0) {
            return Err(AnalysisError::NonPositiveValue { t, value: v });
        }
        lx.push(t.ln());
        ly.push(v.ln());
    }
    if lx.len() < 20 {
        return Err(AnalysisError::ShortWindow {
            lo: window.0,
            hi: window.1,
            found: lx.len(),
            need: 20,
        });
    }
    let fit = numerics::linear_fit(&lx, &ly);
    Ok(DecayFit {
        slope: fit.slope,
        intercept: fit.intercept,
        window,
        rms_residual: fit.rms_residual,
    })
}

/// Per-sample mean-field diagnostics of a frame trajectory.
#[derive(Debug, Clone)]
pub struct FrameTrack {
    pub n: usize,
    pub times: Vec<f64>,
    /// Mean speed `|V| = mean(u)`.
    pub speed: Vec<f64>,
    /// Heading rate.
    pub m: Vec<f64>,
    /// Tangential acceleration of the mean velocity.
    pub s: Vec<f64>,
    /// Largest normal-plane amplitude `max_k |(w_k, y_k)|`.
    pub a_max: Vec<f64>,
    /// Weighted Lyapunov function of the normal-plane amplitudes.
    pub lyapunov: Vec<f64>,
    /// Heading accumulated by quadrature of `m`.
    pub theta: Vec<f64>,
}

/// Compute mean-field series along a frame trajectory.
pub fn frame_track(n: usize, traj: &Trajectory, theta0: f64) -> Result<FrameTrack, AnalysisError> {
    let len = traj.len();
    let mut track = FrameTrack {
        n,
        times: traj.times.clone(),
        speed: Vec::with_capacity(len),
        m: Vec::with_capacity(len),
        s: Vec::with_capacity(len),
        a_max: Vec::with_capacity(len),
        lyapunov: Vec::with_capacity(len),
        theta: Vec::new(),
    };
    for (i, state) in traj.states.iter().enumerate() {
        let fs = FrameState::from_flat(traj.times[i], n, state);
        let (speed, m, s) = frame_mean_field(&fs)?;
        track.speed.push(speed);
        track.m.push(m);
        track.s.push(s);
        let a: Vec<f64> = (0..n)
            .map(|k| (fs.w[k] * fs.w[k] + fs.y[k] * fs.y[k]).sqrt())
            .collect();
        let theta: Vec<f64> = (0..n).map(|k| fs.y[k].atan2(fs.w[k])).collect();
        track.a_max.push(a.iter().cloned().fold(0.0, f64::max));
        // The Lyapunov value only sees pi-periodic functions of the phase,
        // so the raw polar angle is enough here.
        track
            .lyapunov
            .push(lyapunov_sample(&a, &theta).map(|l| l.w).unwrap_or(0.0));
    }
    track.theta = numerics::cumulative_integral(&track.times, &track.m)
        .into_iter()
        .map(|v| theta0 + v)
        .collect();
    Ok(track)
}

/// Heading bookkeeping: limit estimate, drift budget, and the `sqrt(t)`
/// envelope of the remaining error.
#[derive(Debug, Clone)]
pub struct HeadingAccount {
    pub theta_inf: f64,
    /// `integral of |m|` over the whole track, bounding the total drift.
    pub total_abs_m: f64,
    /// Supremum of `sqrt(t) |theta - theta_inf|` over the early half of the
    /// window and over the late half.
    pub envelope_early: f64,
    pub envelope_late: f64,
}

pub fn heading_account(track: &FrameTrack, window: (f64, f64)) -> HeadingAccount {
    let len = track.times.len();
    let tail_start = len - (len / 10).max(1);
    let theta_inf =
        track.theta[tail_start..].iter().sum::<f64>() / (len - tail_start) as f64;
    let abs_m: Vec<f64> = track.m.iter().map(|v| v.abs()).collect();
    let total_abs_m = *numerics::cumulative_integral(&track.times, &abs_m)
        .last()
        .unwrap();
    let mid = (window.0 * window.1).sqrt();
    let mut envelope_early = 0.0f64;
    let mut envelope_late = 0.0f64;
    for (&t, &th) in track.times.iter().zip(&track.theta) {
        if t < window.0 || t > window.1 {
            continue;
        }
        let e = t.sqrt() * (th - theta_inf).abs();
        if t <= mid {
            envelope_early = envelope_early.max(e);
        } else {
            envelope_late = envelope_late.max(e);
        }
    }
    HeadingAccount { theta_inf, total_abs_m, envelope_early, envelope_late }
}

/// Speed-gap bookkeeping: power-law fit of `1 - |V|` and the cumulative lag
/// behind exact unit-speed motion.
#[derive(Debug, Clone)]
pub struct SpeedGapAccount {
    pub fit: DecayFit,
    /// Cumulative `integral (1 - |V|)`, the distance the center of mass has
    /// fallen behind rectilinear unit-speed motion.
    pub lag: Vec<f64>,
    /// Linear fit of the lag against `log t` over the window.
    pub lag_vs_log_t: LinearFit,
}

pub fn speed_gap_account(
    track: &FrameTrack,
    window: (f64, f64),
) -> Result<SpeedGapAccount, AnalysisError> {
    let gap: Vec<f64> = track.speed.iter().map(|&s| 1.0 - s).collect();
    let fit = fit_power_law(&track.times, &gap, window)?;
    let lag = numerics::cumulative_integral(&track.times, &gap);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for ((&t, &l), _) in track.times.iter().zip(&lag).zip(&track.speed) {
        if t >= window.0 && t <= window.1 {
            xs.push(t.ln());
            ys.push(l);
        }
    }
    let lag_vs_log_t = numerics::linear_fit(&xs, &ys);
    Ok(SpeedGapAccount { fit, lag, lag_vs_log_t })
}

/// Count maximal excursions of `m(t) t^{3/2}` above `threshold` inside the
/// window.
pub fn drift_excursions(
    times: &[f64],
    m: &[f64],
    window: (f64, f64),
    threshold: f64,
) -> usize {
    let mut count = 0;
    let mut inside = false;
    for (&t, &mv) in times.iter().zip(m) {
        if t < window.0 || t > window.1 {
            inside = false;
            continue;
        }
        let above = mv * t.powf(1.5) > threshold;
        if above && !inside {
            count += 1;
        }
        inside = above;
    }
    count
}

pub(crate) fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

#[cfg(test)]
mod tests;
