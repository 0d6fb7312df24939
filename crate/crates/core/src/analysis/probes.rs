//! Experiment drivers: decay-rate runs, the stability witness, the
//! sharpness counter, the flocking asymptote, and the structural verifiers.

use super::{
    drift_excursions, fit_power_law, frame_track, heading_account, make_scenario, median,
    speed_gap_account, AnalysisError, DecayFit, HeadingAccount, ScenarioConfig, ScenarioKind,
};
use crate::integrate::{integrate, IntegratorConfig};
use crate::model::{FrameSystem, PlanarVec, SwarmState, SwarmSystem};
use crate::numerics::{self, LinearFit};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Fitted decay rates of one seeded run near the rectilinear state.
#[derive(Debug, Clone)]
pub struct DecayRates {
    pub n: usize,
    pub amplitude: f64,
    pub seed: u64,
    /// Power-law fit of the largest normal amplitude (expected slope -1/2).
    pub a_fit: DecayFit,
    /// Power-law fit of `1 - |V|` (expected slope -1).
    pub speed_fit: DecayFit,
    pub heading: HeadingAccount,
    /// Window extremes of `sqrt(t) max_k(|r_k - R| + |r_k' - V|)`: the
    /// scaled total deviation must stay above a positive floor.
    pub scaled_deviation_min: f64,
    pub scaled_deviation_max: f64,
}

/// Integrate one random on-manifold perturbation and fit its decay rates
/// over the window.
pub fn decay_experiment(
    n: usize,
    amplitude: f64,
    seed: u64,
    window: (f64, f64),
    t_end: f64,
) -> Result<DecayRates, AnalysisError> {
    let frame = make_scenario(&ScenarioConfig {
        kind: ScenarioKind::RandomNearZf,
        n,
        amplitude,
        seed,
    })?
    .expect_frame();
    // Cap the sample count on long horizons; the fits do not need more.
    let stride = (t_end / 5e4).max(2.0);
    let cfg = IntegratorConfig::rk45(1e-9, 1e-12, t_end, stride);
    let traj = integrate(&FrameSystem { n }, 0.0, &frame.to_flat(), &cfg)?;
    let track = frame_track(n, &traj, 0.0)?;
    let a_fit = fit_power_law(&track.times, &track.a_max, window)?;
    let speed = speed_gap_account(&track, window)?;
    let heading = heading_account(&track, window);
    let mut scaled_min = f64::INFINITY;
    let mut scaled_max: f64 = 0.0;
    for ((&t, state), &speed_t) in traj.times.iter().zip(&traj.states).zip(&track.speed) {
        if t < window.0 || t > window.1 {
            continue;
        }
        let x_stored = &state[2 * n..3 * n - 1];
        let x_last: f64 = -x_stored.iter().sum::<f64>();
        let dev = (0..n)
            .map(|k| {
                let x = if k < n - 1 { x_stored[k] } else { x_last };
                let y = state[n + k];
                let du = state[3 * n - 1 + k] - speed_t;
                let w = state[k];
                (x * x + y * y).sqrt() + (du * du + w * w).sqrt()
            })
            .fold(0.0f64, f64::max);
        scaled_min = scaled_min.min(t.sqrt() * dev);
        scaled_max = scaled_max.max(t.sqrt() * dev);
    }
    Ok(DecayRates {
        n,
        amplitude,
        seed,
        a_fit,
        speed_fit: speed.fit,
        heading,
        scaled_deviation_min: scaled_min,
        scaled_deviation_max: scaled_max,
    })
}

/// Outcome of the heading-rate sharpness experiment.
#[derive(Debug, Clone)]
pub struct SharpnessReport {
    /// Number of maximal excursions of `m t^{3/2}` above the threshold.
    pub excursions: usize,
    pub threshold: f64,
    /// Run-calibrated scale `(n-1)(n-2) median(a_1 sqrt(t))^3`.
    pub calibration: f64,
}

/// Integrate the identical-block configuration and count the recurring
/// windows where the heading rate stays of order `t^{-3/2}`.
pub fn sharpness_report(
    n: usize,
    amplitude: f64,
    seed: u64,
    window: (f64, f64),
    t_end: f64,
) -> Result<SharpnessReport, AnalysisError> {
    let frame = make_scenario(&ScenarioConfig {
        kind: ScenarioKind::IdenticalBlock,
        n,
        amplitude,
        seed,
    })?
    .expect_frame();
    let cfg = IntegratorConfig::rk45(1e-9, 1e-12, t_end, 0.5);
    let traj = integrate(&FrameSystem { n }, 0.0, &frame.to_flat(), &cfg)?;
    let track = frame_track(n, &traj, 0.0)?;
    // Amplitude of the replicated block (its first member).
    let mut scaled: Vec<f64> = traj
        .times
        .iter()
        .zip(&traj.states)
        .filter(|(&t, _)| t >= window.0 && t <= window.1)
        .map(|(&t, s)| {
            let a1 = (s[0] * s[0] + s[n] * s[n]).sqrt();
            a1 * t.sqrt()
        })
        .collect();
    let calibration = ((n - 1) * (n - 2)) as f64 * median(&mut scaled).powi(3);
    let threshold = 0.05 * calibration;
    let excursions = drift_excursions(&track.times, &track.m, window, threshold);
    Ok(SharpnessReport { excursions, threshold, calibration })
}

/// Aggregate outcome of the seeded stability witness.
#[derive(Debug, Clone, Default)]
pub struct WitnessReport {
    pub runs: usize,
    pub violations: usize,
    /// Largest observed pairwise agent distance across all runs and times.
    pub worst_pair_distance: f64,
    /// Largest observed `| |V| - 1 |`.
    pub worst_speed_dev: f64,
    /// Largest observed `|r_k' - V(0)|`.
    pub worst_velocity_dev: f64,
}

/// Empirical witness for the stability of rectilinear motion: seeded random
/// on-manifold perturbations of size `delta` must keep pairwise distances,
/// the mean speed, and every velocity within `epsilon` of the unperturbed
/// data for the whole horizon. The agent count cycles through `ns` with the
/// seed, so disjoint seed ranges partition one experiment.
pub fn stability_witness(
    ns: &[usize],
    delta: f64,
    epsilon: f64,
    seeds: std::ops::Range<u64>,
    t_end: f64,
) -> Result<WitnessReport, AnalysisError> {
    let mut report =
        WitnessReport { runs: (seeds.end - seeds.start) as usize, ..Default::default() };
    for seed in seeds {
        let n = ns[(seed as usize) % ns.len()];
        // Normal amplitudes of delta/4 keep every hypothesis inside delta.
        let frame = make_scenario(&ScenarioConfig {
            kind: ScenarioKind::RandomNearZf,
            n,
            amplitude: delta / 4.0,
            seed,
        })?
        .expect_frame();
        let flat = frame.to_flat();
        debug_assert!(hypotheses_within(&flat, n, delta));
        let cfg = IntegratorConfig::rk45(1e-9, 1e-12, t_end, 1.0);
        let traj = integrate(&FrameSystem { n }, 0.0, &flat, &cfg)?;
        let track = frame_track(n, &traj, 0.0)?;
        let v0 = PlanarVec::new(track.speed[0], 0.0);
        let mut violated = false;
        for (i, state) in traj.states.iter().enumerate() {
            let pair = max_pair_distance_frame(state, n);
            let speed_dev = (track.speed[i] - 1.0).abs();
            let vel_dev = max_velocity_dev(state, n, track.theta[i], v0);
            report.worst_pair_distance = report.worst_pair_distance.max(pair);
            report.worst_speed_dev = report.worst_speed_dev.max(speed_dev);
            report.worst_velocity_dev = report.worst_velocity_dev.max(vel_dev);
            if pair >= epsilon || speed_dev >= epsilon || vel_dev >= epsilon {
                violated = true;
            }
        }
        if violated {
            report.violations += 1;
        }
    }
    Ok(report)
}

fn hypotheses_within(flat: &[f64], n: usize, delta: f64) -> bool {
    let speed = flat[3 * n - 1..4 * n - 1].iter().sum::<f64>() / n as f64;
    max_pair_distance_frame(flat, n) < delta
        && (speed - 1.0).abs() < delta
        && (0..n).all(|k| {
            let du = flat[3 * n - 1 + k] - speed;
            let w = flat[k];
            (du * du + w * w).sqrt() < delta
        })
}

/// Largest pairwise distance recoverable from frame coordinates.
fn max_pair_distance_frame(flat: &[f64], n: usize) -> f64 {
    let y = &flat[n..2 * n];
    let x_stored = &flat[2 * n..3 * n - 1];
    let x_last: f64 = -x_stored.iter().sum::<f64>();
    let x = |k: usize| if k < n - 1 { x_stored[k] } else { x_last };
    let mut worst = 0.0f64;
    for k1 in 0..n {
        for k2 in k1 + 1..n {
            let dx = x(k1) - x(k2);
            let dy = y[k1] - y[k2];
            worst = worst.max((dx * dx + dy * dy).sqrt());
        }
    }
    worst
}

fn max_velocity_dev(flat: &[f64], n: usize, theta: f64, v0: PlanarVec) -> f64 {
    let dir = PlanarVec::new(theta.cos(), theta.sin());
    let normal = dir.perp();
    (0..n)
        .map(|k| {
            let vel = dir * flat[3 * n - 1 + k] + normal * flat[k];
            (vel - v0).norm()
        })
        .fold(0.0, f64::max)
}

/// Limit data of a collapsed flock relaxing to unit speed.
#[derive(Debug, Clone)]
pub struct FlockingAsymptote {
    pub times: Vec<f64>,
    /// `|R(t) - R(0) - c_inf - t e^{i heading}|` per sample.
    pub gaps: Vec<f64>,
    pub c_inf: PlanarVec,
    /// Fitted exponential rate of `1 - |V|` (expected near -2); absent when
    /// the speed defect sits at rounding level from the start.
    pub rate: Option<LinearFit>,
}

/// Integrate a collapsed flock and account for its drift constant
/// `c_inf = integral (V - e^{i heading})`.
pub fn flocking_asymptote(
    n: usize,
    speed0: f64,
    heading: f64,
    t_end: f64,
) -> Result<FlockingAsymptote, AnalysisError> {
    if !(speed0 > 0.0) {
        return Err(AnalysisError::InvalidScenario(format!(
            "flocking run needs positive initial speed, got {speed0}"
        )));
    }
    let state = make_scenario(&ScenarioConfig {
        kind: ScenarioKind::FlockingCollapse { speed: speed0, heading },
        n,
        amplitude: 0.0,
        seed: 0,
    })?
    .expect_swarm();
    let cfg = IntegratorConfig::rk45(1e-10, 1e-13, t_end, 0.05);
    let traj = integrate(&SwarmSystem { n }, 0.0, &state.to_flat(), &cfg)?;
    let dir = PlanarVec::new(heading.cos(), heading.sin());
    let mean_v = |s: &[f64]| {
        let mut v = PlanarVec::ZERO;
        for k in 0..n {
            v = v + PlanarVec::new(s[2 * n + 2 * k], s[2 * n + 2 * k + 1]);
        }
        v * (1.0 / n as f64)
    };
    let dvx: Vec<f64> = traj.states.iter().map(|s| mean_v(s).x - dir.x).collect();
    let dvy: Vec<f64> = traj.states.iter().map(|s| mean_v(s).y - dir.y).collect();
    let ix = numerics::cumulative_integral(&traj.times, &dvx);
    let iy = numerics::cumulative_integral(&traj.times, &dvy);
    let c_inf = PlanarVec::new(*ix.last().unwrap(), *iy.last().unwrap());
    let r0 = PlanarVec::new(traj.states[0][0], traj.states[0][1]);
    let gaps: Vec<f64> = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(&t, s)| {
            let mut center = PlanarVec::ZERO;
            for k in 0..n {
                center = center + PlanarVec::new(s[2 * k], s[2 * k + 1]);
            }
            center = center * (1.0 / n as f64);
            (center - r0 - c_inf - dir * t).norm()
        })
        .collect();
    // Exponential rate of the speed defect, fitted where it is well above
    // rounding.
    let mut ts = Vec::new();
    let mut logs = Vec::new();
    for (&t, s) in traj.times.iter().zip(&traj.states) {
        let gap = 1.0 - mean_v(s).norm();
        if t >= 1.0 && t <= 8.0_f64.min(t_end / 2.0) && gap.abs() > 1e-13 {
            ts.push(t);
            logs.push(gap.abs().ln());
        }
    }
    let rate = (ts.len() >= 2).then(|| numerics::linear_fit(&ts, &logs));
    Ok(FlockingAsymptote { times: traj.times, gaps, c_inf, rate })
}

/// Which branch of the symmetric-configuration dichotomy a trajectory
/// approaches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dichotomy {
    /// The symmetric agents coincide.
    Collapse,
    /// The center of mass is (asymptotically) stationary.
    StationaryCenter,
    /// Neither branch visible on the horizon; numerically contradicts the
    /// dichotomy.
    Violated,
}

/// Integrate a `p`-fold symmetric configuration and classify its limit.
///
/// Also returns the largest symmetry defect observed along the flow, which
/// should stay at integrator tolerance since the symmetry is equivariant.
pub fn symmetric_dichotomy_probe(
    n: usize,
    p: usize,
    ring_radius: f64,
    tangential_speed: f64,
    radial_speed: f64,
    t_end: f64,
) -> Result<(Dichotomy, f64), AnalysisError> {
    let state = make_scenario(&ScenarioConfig {
        kind: ScenarioKind::PFoldSymmetric { p, ring_radius, tangential_speed, radial_speed },
        n,
        amplitude: 0.0,
        seed: 0,
    })?
    .expect_swarm();
    let cfg = IntegratorConfig::rk45(1e-9, 1e-12, t_end, 1.0);
    let traj = integrate(&SwarmSystem { n }, 0.0, &state.to_flat(), &cfg)?;
    let mut defect = 0.0f64;
    for s in &traj.states {
        defect = defect.max(symmetry_defect(s, n, p));
    }
    // Collapse branch: the symmetric agents coincide at the end.
    let last = traj.last_state();
    let mut pair = 0.0f64;
    for k1 in 0..p {
        for k2 in k1 + 1..p {
            let dx = last[2 * k1] - last[2 * k2];
            let dy = last[2 * k1 + 1] - last[2 * k2 + 1];
            pair = pair.max((dx * dx + dy * dy).sqrt());
        }
    }
    if pair < 1e-6 {
        return Ok((Dichotomy::Collapse, defect));
    }
    // Stationary branch: |V| stays small over the last 100 time units.
    let stationary = traj
        .times
        .iter()
        .zip(&traj.states)
        .filter(|(&t, _)| t >= t_end - 100.0)
        .all(|(_, s)| {
            let st = SwarmState::from_flat(0.0, n, s);
            st.mean_velocity().norm() < 1e-3
        });
    if stationary {
        Ok((Dichotomy::StationaryCenter, defect))
    } else {
        Ok((Dichotomy::Violated, defect))
    }
}

fn symmetry_defect(flat: &[f64], n: usize, p: usize) -> f64 {
    let state = SwarmState::from_flat(0.0, n, flat);
    let center = state.center_of_mass();
    let first = state.positions[0] - center;
    (0..p)
        .map(|k| {
            let rotated = first.rotated(2.0 * PI * k as f64 / p as f64);
            (state.positions[k] - center - rotated).norm()
        })
        .fold(0.0, f64::max)
}

/// Residuals of the roots-of-unity averaging identities behind the
/// symmetric-state dichotomy. With `m_k = m + e^{-i th_k}` running over the
/// `p`-th roots of unity, `alpha = 2|m|^2 + 1`, and `beta = m(|m|^2 - 1)`:
///
/// ```text
/// mean_k |m_k|^2            = |m|^2 + 1
/// mean_k e^{-i th_k} |m_k|^2 = m
/// mean_k m_k (alpha - |m_k|^2) = beta
/// ```
///
/// These hold for every complex `m`; they are what forces `alpha` and
/// `beta` to those values whenever the per-agent equations hold at all.
/// Returns the largest of the three residuals.
pub fn roots_of_unity_residual(m: Complex64, p: usize) -> Result<f64, AnalysisError> {
    if p < 3 {
        return Err(AnalysisError::InvalidScenario(format!(
            "identity needs p >= 3 roots of unity, got {p}"
        )));
    }
    let alpha = 2.0 * m.norm_sqr() + 1.0;
    let beta = m * (m.norm_sqr() - 1.0);
    let mut mean_norm = 0.0f64;
    let mut mean_conj = Complex64::new(0.0, 0.0);
    let mut mean_lhs = Complex64::new(0.0, 0.0);
    for k in 0..p {
        let root = Complex64::from_polar(1.0, -2.0 * PI * k as f64 / p as f64);
        let mk = m + root;
        mean_norm += mk.norm_sqr();
        mean_conj += root * mk.norm_sqr();
        mean_lhs += mk * (alpha - mk.norm_sqr());
    }
    let p = p as f64;
    let r1 = (mean_norm / p - (m.norm_sqr() + 1.0)).abs();
    let r2 = (mean_conj / p - m).norm();
    let r3 = (mean_lhs / p - beta).norm();
    Ok(r1.max(r2).max(r3))
}

