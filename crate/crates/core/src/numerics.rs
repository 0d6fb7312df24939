//! Small numerical utilities shared across the crate: finite differences,
//! quadrature, and least-squares fits.

/// Central finite difference of `f` at `x` with step `h`.
pub fn central_diff(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Mean of a periodic function over one period.
///
/// Uses the composite trapezoid rule, which converges spectrally for smooth
/// periodic integrands; `samples` around 2^12 reaches rounding level.
pub fn periodic_mean(f: impl Fn(f64) -> f64, period: f64, samples: usize) -> f64 {
    let h = period / samples as f64;
    let mut acc = 0.0;
    for i in 0..samples {
        acc += f(i as f64 * h);
    }
    acc / samples as f64
}

/// Mean of a not-necessarily-periodic function over the window `[t0, t1]`.
pub fn window_mean(f: impl Fn(f64) -> f64, t0: f64, t1: f64, samples: usize) -> f64 {
    let h = (t1 - t0) / samples as f64;
    let mut acc = 0.5 * (f(t0) + f(t1));
    for i in 1..samples {
        acc += f(t0 + i as f64 * h);
    }
    acc / samples as f64
}

/// Integral over `[a, b]` of the cubic interpolating the four nodes
/// `(ts[j], ys[j])`.
///
/// Works in coordinates local to the panel; expanding the Lagrange basis
/// around the raw abscissae would cancel catastrophically far from t = 0.
fn cubic_panel(ts: [f64; 4], ys: [f64; 4], a: f64, b: f64) -> f64 {
    let origin = ts[1];
    let ts = ts.map(|t| t - origin);
    let (a, b) = (a - origin, b - origin);
    let mut total = 0.0;
    for j in 0..4 {
        // Lagrange basis l_j expanded to monomial coefficients.
        let mut coeff = [1.0, 0.0, 0.0, 0.0];
        let mut denom = 1.0;
        for k in 0..4 {
            if k == j {
                continue;
            }
            denom *= ts[j] - ts[k];
            let mut next = [0.0; 4];
            // At most three linear factors, so degree stays within a cubic.
            for (d, &c) in coeff.iter().enumerate().take(3) {
                next[d + 1] += c;
                next[d] -= c * ts[k];
            }
            coeff = next;
        }
        let integral: f64 = (0..4)
            .map(|d| coeff[d] / (d as f64 + 1.0) * (b.powi(d as i32 + 1) - a.powi(d as i32 + 1)))
            .sum();
        total += ys[j] * integral / denom;
    }
    total
}

/// Cumulative integral of sampled data, fourth order on smooth samples.
///
/// Each interval is integrated with the cubic through its four nearest
/// sample points, matching the global order of the RK4/RK45 trajectories the
/// samples come from. Returns one value per sample, starting at zero.
pub fn cumulative_integral(times: &[f64], values: &[f64]) -> Vec<f64> {
    assert_eq!(times.len(), values.len());
    let n = times.len();
    let mut out = Vec::with_capacity(n);
    out.push(0.0);
    if n < 2 {
        return out;
    }
    if n < 4 {
        // Too few points for a cubic; trapezoid is the best available.
        for i in 1..n {
            let inc = 0.5 * (values[i] + values[i - 1]) * (times[i] - times[i - 1]);
            out.push(out[i - 1] + inc);
        }
        return out;
    }
    for i in 1..n {
        let lo = (i - 1).saturating_sub(1).min(n - 4);
        let ts = [times[lo], times[lo + 1], times[lo + 2], times[lo + 3]];
        let ys = [values[lo], values[lo + 1], values[lo + 2], values[lo + 3]];
        let inc = cubic_panel(ts, ys, times[i - 1], times[i]);
        out.push(out[i - 1] + inc);
    }
    out
}

/// Ordinary least-squares line through `(x, y)` samples.
#[derive(Debug, Clone, Copy)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub rms_residual: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2, "need at least two samples for a line");
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let r = yi - slope * xi - intercept;
            r * r
        })
        .sum();
    LinearFit {
        slope,
        intercept,
        rms_residual: (ss / n).sqrt(),
    }
}

/// Real roots of the monic cubic `x^3 + a2 x^2 + a1 x + a0`, ascending.
pub fn cubic_real_roots(a2: f64, a1: f64, a0: f64) -> Vec<f64> {
    // Depressed form t^3 + p t + q with x = t - a2/3.
    let shift = a2 / 3.0;
    let p = a1 - a2 * a2 / 3.0;
    let q = 2.0 * a2.powi(3) / 27.0 - a2 * a1 / 3.0 + a0;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    let mut roots = if disc > 1e-300 {
        let s = (-q / 2.0 + disc.sqrt()).cbrt();
        let t = (-q / 2.0 - disc.sqrt()).cbrt();
        vec![s + t - shift]
    } else if p.abs() < 1e-300 {
        vec![-shift]
    } else {
        // Three real roots: trigonometric form.
        let r = 2.0 * (-p / 3.0).sqrt();
        let phi = (3.0 * q / (p * r)).clamp(-1.0, 1.0).acos();
        (0..3)
            .map(|k| r * ((phi - 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos() - shift)
            .collect()
    };
    // One Newton polish per root.
    for root in roots.iter_mut() {
        for _ in 0..3 {
            let f = root.powi(3) + a2 * root.powi(2) + a1 * *root + a0;
            let df = 3.0 * root.powi(2) + 2.0 * a2 * *root + a1;
            if df.abs() > 1e-300 {
                *root -= f / df;
            }
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots
}

/// Central-difference Jacobian of a vector field, column by column.
pub fn fd_jacobian(
    mut f: impl FnMut(&[f64], &mut [f64]),
    x: &[f64],
    h: f64,
) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut jac = vec![vec![0.0; n]; n];
    let mut xp = x.to_vec();
    let mut fp = vec![0.0; n];
    let mut fm = vec![0.0; n];
    for j in 0..n {
        xp[j] = x[j] + h;
        f(&xp, &mut fp);
        xp[j] = x[j] - h;
        f(&xp, &mut fm);
        xp[j] = x[j];
        for i in 0..n {
            jac[i][j] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    jac
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn periodic_mean_hits_rounding_on_trig() {
        let m = periodic_mean(|t| t.cos() * t.cos(), 2.0 * PI, 1 << 12);
        assert!((m - 0.5).abs() < 1e-14);
    }

    #[test]
    fn cumulative_integral_is_fourth_order() {
        let f = |t: f64| (3.0 * t).sin();
        let exact = |t: f64| (1.0 - (3.0 * t).cos()) / 3.0;
        let mut errs = Vec::new();
        for &n in &[100usize, 200] {
            let times: Vec<f64> = (0..=n).map(|i| 2.0 * i as f64 / n as f64).collect();
            let values: Vec<f64> = times.iter().map(|&t| f(t)).collect();
            let cum = cumulative_integral(&times, &values);
            let err = cum
                .iter()
                .zip(&times)
                .map(|(&c, &t)| (c - exact(t)).abs())
                .fold(0.0f64, f64::max);
            errs.push(err);
        }
        let ratio = errs[0] / errs[1];
        assert!(ratio > 10.0, "order ratio {ratio} too low");
    }

    #[test]
    fn cubic_roots_match_factored_polynomial() {
        // (x - 1)(x + 2)(x - 0.5) = x^3 + 0.5x^2 - 2.5x + 1
        let roots = cubic_real_roots(0.5, -2.5, 1.0);
        assert_eq!(roots.len(), 3);
        for (r, expect) in roots.iter().zip(&[-2.0, 0.5, 1.0]) {
            assert!((r - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_fit_recovers_exact_line() {
        let x: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|&xi| 2.5 * xi - 1.0).collect();
        let fit = linear_fit(&x, &y);
        assert!((fit.slope - 2.5).abs() < 1e-12);
        assert!((fit.intercept + 1.0).abs() < 1e-12);
        assert!(fit.rms_residual < 1e-12);
    }
}
