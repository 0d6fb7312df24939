//! Generic non-autonomous system with cubic nonlinearities,
//!
//! ```text
//! x_k' = b_k(t) x_k^3 + c_k(t) x_k mean_l(d_l(t) x_l^2) + R_k(x, t)
//! ```
//!
//! the model class whose averaged coefficients decide whether the origin is
//! asymptotically stable with `1/sqrt(t)` decay.

use crate::integrate::{OdeSystem, RhsError};
use crate::numerics;

pub type Coeff = Box<dyn Fn(f64) -> f64 + Send + Sync>;
pub type Remainder = Box<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;

pub struct CubicSystem {
    pub n: usize,
    pub b: Vec<Coeff>,
    pub c: Vec<Coeff>,
    pub d: Vec<Coeff>,
    /// Optional higher-order remainder, added onto `dxdt`.
    pub remainder: Option<Remainder>,
}

impl CubicSystem {
    /// System with every agent sharing the same three coefficient functions.
    pub fn uniform(
        n: usize,
        b: impl Fn(f64) -> f64 + Send + Sync + Clone + 'static,
        c: impl Fn(f64) -> f64 + Send + Sync + Clone + 'static,
        d: impl Fn(f64) -> f64 + Send + Sync + Clone + 'static,
    ) -> Self {
        Self {
            n,
            b: (0..n).map(|_| Box::new(b.clone()) as Coeff).collect(),
            c: (0..n).map(|_| Box::new(c.clone()) as Coeff).collect(),
            d: (0..n).map(|_| Box::new(d.clone()) as Coeff).collect(),
            remainder: None,
        }
    }

    pub fn rhs(&self, t: f64, x: &[f64], dxdt: &mut [f64]) {
        let n = self.n;
        let mean_d: f64 = (0..n).map(|l| (self.d[l])(t) * x[l] * x[l]).sum::<f64>() / n as f64;
        for k in 0..n {
            dxdt[k] = (self.b[k])(t) * x[k].powi(3) + (self.c[k])(t) * x[k] * mean_d;
        }
        if let Some(r) = &self.remainder {
            r(t, x, dxdt);
        }
    }

    /// Stability margin `max_k mu(b_k) + mean_l mu((c_l + d_l)^2 / 4)` with
    /// means taken over one period of every coefficient.
    ///
    /// A negative margin certifies asymptotic stability of the origin.
    pub fn stability_margin_periodic(&self, period: f64) -> f64 {
        let samples = 1 << 12;
        let mean_sq: f64 = (0..self.n)
            .map(|l| {
                numerics::periodic_mean(
                    |t| {
                        let s = (self.c[l])(t) + (self.d[l])(t);
                        0.25 * s * s
                    },
                    period,
                    samples,
                )
            })
            .sum::<f64>()
            / self.n as f64;
        (0..self.n)
            .map(|k| numerics::periodic_mean(|t| (self.b[k])(t), period, samples))
            .fold(f64::NEG_INFINITY, f64::max)
            + mean_sq
    }

    /// Same margin with long-window averages, for coefficients without a
    /// common period. The window should cover many characteristic periods.
    pub fn stability_margin_window(&self, t_end: f64) -> f64 {
        let samples = 1 << 16;
        let mean_sq: f64 = (0..self.n)
            .map(|l| {
                numerics::window_mean(
                    |t| {
                        let s = (self.c[l])(t) + (self.d[l])(t);
                        0.25 * s * s
                    },
                    0.0,
                    t_end,
                    samples,
                )
            })
            .sum::<f64>()
            / self.n as f64;
        (0..self.n)
            .map(|k| numerics::window_mean(|t| (self.b[k])(t), 0.0, t_end, samples))
            .fold(f64::NEG_INFINITY, f64::max)
            + mean_sq
    }
}

impl OdeSystem for CubicSystem {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval(&self, t: f64, y: &[f64], dydt: &mut [f64]) -> Result<(), RhsError> {
        self.rhs(t, y, dydt);
        Ok(())
    }
}

/// A bounded antiderivative of `f - mean` sampled on a uniform grid and
/// shifted so its minimum is 1, hence strictly positive.
#[derive(Debug, Clone)]
pub struct SampledAntiderivative {
    t0: f64,
    dt: f64,
    values: Vec<f64>,
}

impl SampledAntiderivative {
    /// Piecewise-linear evaluation; clamps outside the sampled window.
    pub fn eval(&self, t: f64) -> f64 {
        let pos = (t - self.t0) / self.dt;
        if pos <= 0.0 {
            return self.values[0];
        }
        let i = pos.floor() as usize;
        if i + 1 >= self.values.len() {
            return *self.values.last().unwrap();
        }
        let frac = pos - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }

    pub fn min(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }
}

/// Numerically integrate `f - mean` over `[0, t_end]` and add the constant
/// that puts the minimum at 1.
pub fn positive_antiderivative(
    f: impl Fn(f64) -> f64,
    mean: f64,
    t_end: f64,
    samples: usize,
) -> SampledAntiderivative {
    let dt = t_end / samples as f64;
    let times: Vec<f64> = (0..=samples).map(|i| i as f64 * dt).collect();
    let values: Vec<f64> = times.iter().map(|&t| f(t) - mean).collect();
    let mut cum = numerics::cumulative_integral(&times, &values);
    let min = cum.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    for v in cum.iter_mut() {
        *v += 1.0 - min;
    }
    SampledAntiderivative { t0: 0.0, dt, values: cum }
}
