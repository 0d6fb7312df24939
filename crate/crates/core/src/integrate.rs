//! Deterministic time integration: classical fixed-step RK4 and an embedded
//! Dormand-Prince 5(4) pair with PI step control, both emitting samples at a
//! fixed stride.

use thiserror::Error;

/// Errors a right-hand side can raise during evaluation.
#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum RhsError {
    #[error("moving frame is singular: mean speed {mean_speed:e}")]
    SingularFrame { mean_speed: f64 },
    #[error("right-hand side produced a non-finite value")]
    NonFinite,
}

#[derive(Debug, Error)]
pub enum IntegrateError {
    #[error("invalid integrator configuration: {0}")]
    BadConfig(String),
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("state became non-finite at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("step budget exhausted at t = {t}")]
    MaxSteps { t: f64 },
    #[error("right-hand side failed at t = {t}: {source}")]
    Domain {
        t: f64,
        #[source]
        source: RhsError,
    },
}

/// An autonomous or time-dependent first-order system on flat state slices.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn eval(&self, t: f64, y: &[f64], dydt: &mut [f64]) -> Result<(), RhsError>;
}

impl<T: OdeSystem + ?Sized> OdeSystem for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, t: f64, y: &[f64], dydt: &mut [f64]) -> Result<(), RhsError> {
        (**self).eval(t, y, dydt)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Classical fourth-order Runge-Kutta with fixed step `dt`. The step is
    /// shrunk to the nearest divisor of the sample stride so samples land on
    /// exact step boundaries.
    FixedRk4 { dt: f64 },
    /// Dormand-Prince 5(4) embedded pair with PI step-size control.
    AdaptiveRk45 { rtol: f64, atol: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct IntegratorConfig {
    pub method: Method,
    pub t_end: f64,
    /// Time between emitted samples.
    pub sample_stride: f64,
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), IntegrateError> {
        if !(self.t_end > 0.0) {
            return Err(IntegrateError::BadConfig(format!("t_end = {} must be positive", self.t_end)));
        }
        if !(self.sample_stride > 0.0) {
            return Err(IntegrateError::BadConfig(format!(
                "sample_stride = {} must be positive",
                self.sample_stride
            )));
        }
        match self.method {
            Method::FixedRk4 { dt } if !(dt > 0.0) => {
                Err(IntegrateError::BadConfig(format!("dt = {dt} must be positive")))
            }
            Method::AdaptiveRk45 { rtol, atol } if !(rtol > 0.0 && atol > 0.0) => Err(
                IntegrateError::BadConfig(format!("tolerances must be positive, got ({rtol}, {atol})")),
            ),
            _ => Ok(()),
        }
    }

    pub fn rk4(dt: f64, t_end: f64, sample_stride: f64) -> Self {
        Self { method: Method::FixedRk4 { dt }, t_end, sample_stride }
    }

    pub fn rk45(rtol: f64, atol: f64, t_end: f64, sample_stride: f64) -> Self {
        Self { method: Method::AdaptiveRk45 { rtol, atol }, t_end, sample_stride }
    }
}

/// Sampled solution: strictly increasing times with one flat state per time.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> &[f64] {
        self.states.last().expect("trajectory has at least the initial sample")
    }

    /// One state component as a time series.
    pub fn component(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[i]).collect()
    }

    /// A derived scalar per sample.
    pub fn map_samples<F: FnMut(f64, &[f64]) -> f64>(&self, mut f: F) -> Vec<f64> {
        self.times
            .iter()
            .zip(&self.states)
            .map(|(&t, s)| f(t, s))
            .collect()
    }
}

const MAX_STEPS: u64 = 50_000_000;

/// Integrate `sys` from `(t0, y0)` to `t0 + cfg.t_end`, sampling every
/// `cfg.sample_stride`. The final time is always sampled.
pub fn integrate(
    sys: &dyn OdeSystem,
    t0: f64,
    y0: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Trajectory, IntegrateError> {
    cfg.validate()?;
    assert_eq!(y0.len(), sys.dim(), "initial state has wrong dimension");
    let mut sample_times: Vec<f64> = Vec::new();
    let n_whole = (cfg.t_end / cfg.sample_stride).floor() as usize;
    for i in 1..=n_whole {
        sample_times.push(t0 + i as f64 * cfg.sample_stride);
    }
    if sample_times.last().is_none_or(|&t| t < t0 + cfg.t_end - 1e-12 * cfg.t_end) {
        sample_times.push(t0 + cfg.t_end);
    }
    match cfg.method {
        Method::FixedRk4 { dt } => rk4_run(sys, t0, y0, &sample_times, cfg.sample_stride, dt),
        Method::AdaptiveRk45 { rtol, atol } => rk45_run(sys, t0, y0, &sample_times, rtol, atol),
    }
}

fn check_finite(t: f64, y: &[f64]) -> Result<(), IntegrateError> {
    if y.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(IntegrateError::NonFiniteState { t })
    }
}

fn rk4_run(
    sys: &dyn OdeSystem,
    t0: f64,
    y0: &[f64],
    sample_times: &[f64],
    stride: f64,
    dt: f64,
) -> Result<Trajectory, IntegrateError> {
    let dim = sys.dim();
    let steps_per_stride = (stride / dt).ceil().max(1.0) as usize;
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut traj = Trajectory { times: vec![t0], states: vec![y.clone()] };
    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut tmp = vec![0.0; dim];
    let mut steps: u64 = 0;
    for &t_target in sample_times {
        let span = t_target - t;
        let n_steps = ((span / stride) * steps_per_stride as f64).round().max(1.0) as usize;
        let h = span / n_steps as f64;
        for i in 0..n_steps {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(IntegrateError::MaxSteps { t });
            }
            let tn = t + i as f64 * h;
            let domain = |e| IntegrateError::Domain { t: tn, source: e };
            sys.eval(tn, &y, &mut k1).map_err(domain)?;
            for j in 0..dim {
                tmp[j] = y[j] + 0.5 * h * k1[j];
            }
            sys.eval(tn + 0.5 * h, &tmp, &mut k2).map_err(domain)?;
            for j in 0..dim {
                tmp[j] = y[j] + 0.5 * h * k2[j];
            }
            sys.eval(tn + 0.5 * h, &tmp, &mut k3).map_err(domain)?;
            for j in 0..dim {
                tmp[j] = y[j] + h * k3[j];
            }
            sys.eval(tn + h, &tmp, &mut k4).map_err(domain)?;
            for j in 0..dim {
                y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
        }
        t = t_target;
        check_finite(t, &y)?;
        traj.times.push(t);
        traj.states.push(y.clone());
    }
    Ok(traj)
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
// Difference between the fifth- and embedded fourth-order weights.
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

fn rk45_run(
    sys: &dyn OdeSystem,
    t0: f64,
    y0: &[f64],
    sample_times: &[f64],
    rtol: f64,
    atol: f64,
) -> Result<Trajectory, IntegrateError> {
    let dim = sys.dim();
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut traj = Trajectory { times: vec![t0], states: vec![y.clone()] };
    let mut k: Vec<Vec<f64>> = (0..7).map(|_| vec![0.0; dim]).collect();
    let mut tmp = vec![0.0; dim];
    let mut y_new = vec![0.0; dim];
    sys.eval(t, &y, &mut k[0])
        .map_err(|e| IntegrateError::Domain { t, source: e })?;
    let stride = sample_times
        .first()
        .map(|&s| s - t0)
        .unwrap_or(1.0)
        .max(1e-12);
    let mut h = stride.min(1e-3);
    let mut err_prev: f64 = 1.0;
    let mut steps: u64 = 0;
    for &t_target in sample_times {
        while t < t_target - 1e-12 * t_target.abs().max(1.0) {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(IntegrateError::MaxSteps { t });
            }
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(IntegrateError::StepUnderflow { t });
            }
            let h_step = h.min(t_target - t);
            let clipped = h_step < h;
            // Stage evaluations.
            let mut stage_err = None;
            for s in 0..6 {
                for j in 0..dim {
                    let mut acc = 0.0;
                    for (i, ki) in k.iter().enumerate().take(s + 1) {
                        acc += A[s][i] * ki[j];
                    }
                    tmp[j] = y[j] + h_step * acc;
                }
                if let Err(e) = sys.eval(t + C[s] * h_step, &tmp, &mut k[s + 1]) {
                    stage_err = Some(e);
                    break;
                }
            }
            if let Some(e) = stage_err {
                // A domain failure inside a trial step: shrink and retry, but
                // give up if already at the underflow limit.
                if h < 1e-12 * t.abs().max(1.0) {
                    return Err(IntegrateError::Domain { t, source: e });
                }
                h *= 0.25;
                continue;
            }
            // Fifth-order solution is the last row of A (FSAL pair).
            for j in 0..dim {
                let mut acc = 0.0;
                for (i, ki) in k.iter().enumerate().take(6) {
                    acc += A[5][i] * ki[j];
                }
                y_new[j] = y[j] + h_step * acc;
            }
            // Error estimate against the embedded fourth-order weights.
            let mut err_sq = 0.0;
            for j in 0..dim {
                let mut e = 0.0;
                for (i, ki) in k.iter().enumerate() {
                    e += E[i] * ki[j];
                }
                e *= h_step;
                let tol = atol + rtol * y[j].abs().max(y_new[j].abs());
                err_sq += (e / tol) * (e / tol);
            }
            let err = (err_sq / dim as f64).sqrt();
            if !err.is_finite() {
                return Err(IntegrateError::NonFiniteState { t });
            }
            let err = err.max(1e-30);
            if err <= 1.0 {
                t += h_step;
                std::mem::swap(&mut y, &mut y_new);
                let (head, tail) = k.split_at_mut(6);
                head[0].copy_from_slice(&tail[0]);
                // PI controller on accepted, unclipped steps; a step clipped
                // to a sample boundary says nothing about the error scale.
                if !clipped {
                    let scale =
                        (0.9 * err.powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0)).clamp(0.2, 5.0);
                    err_prev = err;
                    h = h_step * scale;
                }
            } else {
                h = h_step * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            }
        }
        t = t_target;
        check_finite(t, &y)?;
        traj.times.push(t);
        traj.states.push(y.clone());
        // FSAL cache refers to the end of the accepted step, which is the
        // sample point, so it stays valid across the sample boundary.
    }
    Ok(traj)
}

/// Write a numeric table as CSV with 17 significant digits, enough to
/// round-trip every double exactly.
pub fn write_csv<P: AsRef<std::path::Path>>(
    path: P,
    header: &[&str],
    rows: impl Iterator<Item = Vec<f64>>,
) -> std::io::Result<()> {
    use std::io::Write;
    let file = std::fs::File::create(path)?;
    let mut out = std::io::BufWriter::new(file);
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        let mut first = true;
        for v in row {
            if !first {
                write!(out, ",")?;
            }
            write!(out, "{v:.16e}")?;
            first = false;
        }
        writeln!(out)?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    struct Harmonic;
    impl OdeSystem for Harmonic {
        fn dim(&self) -> usize {
            2
        }
        fn eval(&self, _t: f64, y: &[f64], dydt: &mut [f64]) -> Result<(), RhsError> {
            dydt[0] = -y[1];
            dydt[1] = y[0];
            Ok(())
        }
    }

    struct LogisticSpeedSq;
    impl OdeSystem for LogisticSpeedSq {
        fn dim(&self) -> usize {
            1
        }
        fn eval(&self, _t: f64, y: &[f64], dydt: &mut [f64]) -> Result<(), RhsError> {
            dydt[0] = 2.0 * (1.0 - y[0]) * y[0];
            Ok(())
        }
    }

    #[test]
    fn harmonic_orbit_closes_at_tight_tolerance() {
        let cfg = IntegratorConfig::rk45(1e-10, 1e-12, 2.0 * PI, PI / 8.0);
        let traj = integrate(&Harmonic, 0.0, &[1.0, 0.0], &cfg).unwrap();
        let last = traj.last_state();
        let err = ((last[0] - 1.0).powi(2) + last[1].powi(2)).sqrt();
        assert!(err < 1e-8, "orbit closure error {err:e}");
    }

    #[test]
    fn squared_speed_follows_logistic_law() {
        // d(s)/dt = 2(1-s)s from s = 0.25 has s(t) = s0 / (s0 + (1-s0) e^{-2t}).
        let cfg = IntegratorConfig::rk45(1e-10, 1e-13, 5.0, 0.25);
        let traj = integrate(&LogisticSpeedSq, 0.0, &[0.25], &cfg).unwrap();
        for (&t, s) in traj.times.iter().zip(&traj.states) {
            let exact = 0.25 / (0.25 + 0.75 * (-2.0 * t).exp());
            assert!((s[0] - exact).abs() < 1e-8);
        }
    }

    #[test]
    fn rk4_error_shrinks_sixteenfold_when_step_halves() {
        let run = |dt: f64| {
            let cfg = IntegratorConfig::rk4(dt, 2.0 * PI, 2.0 * PI);
            let traj = integrate(&Harmonic, 0.0, &[1.0, 0.0], &cfg).unwrap();
            let last = traj.last_state();
            ((last[0] - 1.0).powi(2) + last[1].powi(2)).sqrt()
        };
        let ratio = run(2.0 * PI / 100.0) / run(2.0 * PI / 200.0);
        assert!(
            (10.0..24.0).contains(&ratio),
            "expected ~16x error reduction, got {ratio}"
        );
    }

    #[test]
    fn identical_runs_are_bit_identical() {
        let cfg = IntegratorConfig::rk45(1e-9, 1e-12, 10.0, 0.5);
        let a = integrate(&Harmonic, 0.0, &[1.0, 0.0], &cfg).unwrap();
        let b = integrate(&Harmonic, 0.0, &[1.0, 0.0], &cfg).unwrap();
        assert_eq!(a.states, b.states);
        assert_eq!(a.times, b.times);
    }

    #[test]
    fn bad_config_is_rejected() {
        let cfg = IntegratorConfig::rk4(-0.1, 1.0, 0.5);
        assert!(matches!(
            integrate(&Harmonic, 0.0, &[1.0, 0.0], &cfg),
            Err(IntegrateError::BadConfig(_))
        ));
    }

    #[test]
    fn final_time_is_always_sampled() {
        let cfg = IntegratorConfig::rk45(1e-8, 1e-10, 1.3, 0.5);
        let traj = integrate(&Harmonic, 0.0, &[1.0, 0.0], &cfg).unwrap();
        assert_eq!(traj.times.len(), 4); // 0, 0.5, 1.0, 1.3
        assert!((traj.times.last().unwrap() - 1.3).abs() < 1e-12);
    }
}
