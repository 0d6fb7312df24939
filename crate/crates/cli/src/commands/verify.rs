//! `verify`: named check suites with one PASS/FAIL line per check. Exit
//! status is nonzero iff any selected check fails.

use anyhow::{bail, Result};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;
use swarmlab_core::analysis::{
    decay_experiment, flocking_asymptote, make_scenario, roots_of_unity_residual,
    sharpness_report, stability_witness, ScenarioConfig, ScenarioKind,
};
use swarmlab_core::integrate::{integrate, IntegratorConfig};
use swarmlab_core::manifold::{
    char_poly, coeff_system_residual, frame_jacobian, frame_spectrum_product, pde_residual, rat,
    relative_jacobian, relative_spectrum_product, relative_x_jacobian,
    relative_x_spectrum_product, solve_coeffs,
};
use swarmlab_core::model::{
    equal_velocity_invariants, frame_to_swarm, helix_exact, swarm_rhs, swarm_rhs_3d,
    to_moving_frame, EqualVelocityAccelSystem, FrameState, FrameSystem, PlanarVec, SwarmState,
    SwarmSystem,
};
use swarmlab_core::numerics::periodic_mean;
use swarmlab_core::reduced::{antideriv_b, antideriv_c, coupling_e, damping_a, influence_weights};

pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &str, pass: bool, detail: String) -> Check {
    Check { name: name.to_string(), pass, detail }
}

pub const SUITES: &[&str] = &[
    "spectra",
    "manifold",
    "means",
    "antiderivatives",
    "exact",
    "consistency",
    "properties",
    "sharpness",
    "stability",
    "decay",
    "decay-stated",
    "all",
];

pub fn run(suite: &str) -> Result<u8> {
    let checks = match suite {
        "spectra" => spectra(),
        "manifold" => manifold(),
        "means" => means(),
        "antiderivatives" => antiderivatives(),
        "exact" => exact(),
        "consistency" => consistency()?,
        "properties" => properties()?,
        "sharpness" => sharpness()?,
        "stability" => stability()?,
        "decay" => decay(0.2, (6e4, 6e5), 6e5, false)?,
        "decay-stated" => decay(0.05, (1e2, 1e4), 1e4, true)?,
        "all" => {
            let mut all = spectra();
            all.extend(manifold());
            all.extend(means());
            all.extend(antiderivatives());
            all.extend(exact());
            all.extend(consistency()?);
            all.extend(properties()?);
            all.extend(sharpness()?);
            all.extend(stability()?);
            all.extend(decay(0.2, (6e4, 6e5), 6e5, false)?);
            all
        }
        other => bail!("unknown suite `{other}`; available: {}", SUITES.join(", ")),
    };
    let mut failed = 0usize;
    for c in &checks {
        println!("{} — {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
        if !c.pass {
            failed += 1;
        }
    }
    println!(
        "summary: suite={suite} total={} passed={} failed={failed}",
        checks.len(),
        checks.len() - failed
    );
    Ok(if failed == 0 { 0 } else { 1 })
}

fn spectra() -> Vec<Check> {
    let mut out = Vec::new();
    for n in 2..=6usize {
        let frame = char_poly(&frame_jacobian(n).unwrap()).unwrap();
        out.push(check(
            &format!("frame spectrum n={n}"),
            frame.poly == frame_spectrum_product(n),
            format!("det(xI - J) ={}", frame.poly),
        ));
        let rel = char_poly(&relative_jacobian(n).unwrap()).unwrap();
        out.push(check(
            &format!("relative spectrum n={n}"),
            rel.poly == relative_spectrum_product(n),
            "matches x (x^2+1)^(n-1) (x+2) (x+1)^(2n-2)".into(),
        ));
        let relx = char_poly(&relative_x_jacobian(n).unwrap()).unwrap();
        out.push(check(
            &format!("normal-free spectrum n={n}"),
            relx.poly == relative_x_spectrum_product(n),
            "matches (x+2)(x+1)^(2n-2)".into(),
        ));
    }
    out
}

fn manifold() -> Vec<Check> {
    let coeffs = solve_coeffs();
    let exact = coeffs.c_bar == [rat(-3, 8), rat(-1, 4), rat(-1, 8)]
        && coeffs.c_x == [rat(-11, 25), rat(-4, 25), rat(-14, 25)]
        && coeffs.c_z == [rat(-4, 25), rat(-6, 25), rat(4, 25)];
    let sys_res = coeff_system_residual(&coeffs);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.gen_range(2..8);
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
        worst = worst.max(pde_residual(&coeffs, &w, &y));
    }
    vec![
        check(
            "coefficient triples",
            exact,
            format!(
                "c_x = {:?}, c_z = {:?}, c_bar = {:?}",
                coeffs.c_x_f64(),
                coeffs.c_z_f64(),
                coeffs.c_bar_f64()
            ),
        ),
        check("linear-system residual", sys_res < 1e-12, format!("{sys_res:.2e}")),
        check("manifold PDE residual (100 points)", worst < 1e-12, format!("max {worst:.2e}")),
    ]
}

fn means() -> Vec<Check> {
    let samples = 1 << 13;
    let mu_a = periodic_mean(damping_a, PI, samples);
    let mu_e = periodic_mean(coupling_e, PI, samples);
    let mu_sq = periodic_mean(
        |th| {
            let h = 0.5 * th.cos().powi(2) + 0.5 * coupling_e(th);
            h * h
        },
        PI,
        samples,
    );
    let mu_shift = periodic_mean(|th| th.cos().powi(2) * coupling_e(th + PI / 2.0), PI, samples);
    vec![
        check("mu(A) = -0.295", (mu_a + 0.295).abs() < 1e-10, format!("{mu_a:.12}")),
        check("mu(E) = 0.5", (mu_e - 0.5).abs() < 1e-10, format!("{mu_e:.12}")),
        check(
            "mu(((cos^2+E)/2)^2) = 0.273125",
            (mu_sq - 0.273125).abs() < 1e-10,
            format!("{mu_sq:.12}"),
        ),
        check(
            "stability sum = -7/320",
            (mu_a + mu_sq + 7.0 / 320.0).abs() < 1e-10,
            format!("{:.12}", mu_a + mu_sq),
        ),
        check(
            "mu(cos^2 E(.+pi/2)) = 0.2675",
            (mu_shift - 0.2675).abs() < 1e-10,
            format!("{mu_shift:.12}"),
        ),
    ]
}

fn antiderivatives() -> Vec<Check> {
    let h = 1e-4;
    let mut worst_b: f64 = 0.0;
    let mut worst_c: f64 = 0.0;
    let mut min_b = f64::INFINITY;
    let mut min_c = f64::INFINITY;
    for i in 0..1000 {
        let th = PI * i as f64 / 1000.0;
        let db = (antideriv_b(th + h) - antideriv_b(th - h)) / (2.0 * h);
        worst_b = worst_b.max((db - (damping_a(th) + 59.0 / 200.0)).abs());
        let dc = (antideriv_c(th + h) - antideriv_c(th - h)) / (2.0 * h);
        let half = 0.5 * th.cos().powi(2) + 0.5 * coupling_e(th);
        worst_c = worst_c.max((dc - (half * half - 437.0 / 1600.0)).abs());
        min_b = min_b.min(antideriv_b(th));
        min_c = min_c.min(antideriv_c(th));
    }
    vec![
        check("dB/dth = A + 59/200", worst_b < 1e-6, format!("max err {worst_b:.2e}")),
        check(
            "dC/dth = ((cos^2+E)/2)^2 - 437/1600",
            worst_c < 1e-6,
            format!("max err {worst_c:.2e}"),
        ),
        check("B, C strictly positive", min_b > 0.0 && min_c > 0.0, format!("min B {min_b:.4}, min C {min_c:.4}")),
    ]
}

fn exact() -> Vec<Check> {
    let cfg = IntegratorConfig::rk45(1e-10, 1e-13, 100.0, 1.0);
    let mut out = Vec::new();

    let n = 4;
    let dir = PlanarVec::new(0.6f64.cos(), 0.6f64.sin());
    let state = SwarmState::new(0.0, vec![PlanarVec::new(1.0, -2.0); n], vec![dir; n]).unwrap();
    let traj = integrate(&SwarmSystem { n }, 0.0, &state.to_flat(), &cfg).unwrap();
    let mut drift: f64 = 0.0;
    for (&t, s) in traj.times.iter().zip(&traj.states) {
        for k in 0..n {
            drift = drift.max((s[2 * k] - (1.0 + t * dir.x)).abs());
            drift = drift.max((s[2 * k + 1] - (-2.0 + t * dir.y)).abs());
        }
    }
    out.push(check("translating drift to t=100", drift < 1e-8, format!("{drift:.2e}")));

    let n = 5;
    let center = PlanarVec::new(0.3, 0.8);
    let rot = make_scenario(&ScenarioConfig {
        kind: ScenarioKind::Rotating { angles: None, center },
        n,
        amplitude: 0.0,
        seed: 0,
    })
    .unwrap()
    .expect_swarm();
    let construction = swarm_rhs(&rot)
        .unwrap()
        .rddot
        .iter()
        .zip(&rot.positions)
        .map(|(&a, &r)| (a + (r - center)).norm())
        .fold(0.0, f64::max);
    let traj = integrate(&SwarmSystem { n }, 0.0, &rot.to_flat(), &cfg).unwrap();
    let mut drift: f64 = 0.0;
    for (&t, s) in traj.times.iter().zip(&traj.states) {
        for k in 0..n {
            let th = 2.0 * PI * k as f64 / n as f64 + t;
            drift = drift.max((s[2 * k] - (center.x + th.cos())).abs());
            drift = drift.max((s[2 * k + 1] - (center.y + th.sin())).abs());
        }
    }
    out.push(check(
        "rotating residual and drift",
        construction < 1e-12 && drift < 1e-8,
        format!("construction {construction:.2e}, drift {drift:.2e}"),
    ));

    let flock = flocking_asymptote(3, 0.5, 0.0, 40.0).unwrap();
    let rate = flock.rate.map(|f| f.slope).unwrap_or(f64::NAN);
    out.push(check(
        "flocking relaxation rate in [-2.2, -1.8]",
        (-2.2..=-1.8).contains(&rate),
        format!("{rate:.3}"),
    ));

    let n = 4;
    let angles: Vec<f64> = (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect();
    let helix = helix_exact(0.4, &angles).unwrap();
    let state0 = helix.state_at(0.0);
    let rhs = swarm_rhs_3d(&state0);
    let construction = rhs
        .iter()
        .zip(helix.accel_at(0.0))
        .flat_map(|(a, b)| (0..3).map(move |d| (a[d] - b[d]).abs()))
        .fold(0.0, f64::max);
    let traj = integrate(
        &swarmlab_core::model::Swarm3dSystem { n },
        0.0,
        &state0.to_flat(),
        &cfg,
    )
    .unwrap();
    let mut drift: f64 = 0.0;
    for (&t, s) in traj.times.iter().zip(&traj.states) {
        for (v, e) in s.iter().zip(helix.state_at(t).to_flat()) {
            drift = drift.max((v - e).abs());
        }
    }
    out.push(check(
        "helix residual and drift",
        construction < 1e-12 && drift < 1e-8,
        format!("construction {construction:.2e}, drift {drift:.2e}"),
    ));
    out
}

fn consistency() -> Result<Vec<Check>> {
    let n = 4;
    let frame0 = make_scenario(&ScenarioConfig {
        kind: ScenarioKind::RandomNearZf,
        n,
        amplitude: 0.05,
        seed: 3,
    })?
    .expect_frame();
    let theta0 = 0.3;
    let c0 = PlanarVec::new(0.5, -0.2);
    let physical0 = frame_to_swarm(&frame0, theta0, c0);
    let cfg = IntegratorConfig::rk45(1e-9, 1e-12, 20.0, 0.1);
    let physical = integrate(&SwarmSystem { n }, 0.0, &physical0.to_flat(), &cfg)?;
    let frame = integrate(&FrameSystem { n }, 0.0, &frame0.to_flat(), &cfg)?;
    let mut sup_gap: f64 = 0.0;
    let mut round_trip: f64 = 0.0;
    for ((&t, p_state), f_state) in physical.times.iter().zip(&physical.states).zip(&frame.states)
    {
        let swarm = SwarmState::from_flat(t, n, p_state);
        let (mapped, mf) = to_moving_frame(&swarm)?;
        let direct = FrameState::from_flat(t, n, f_state);
        for (a, b) in mapped.to_flat().iter().zip(direct.to_flat()) {
            sup_gap = sup_gap.max((a - b).abs());
        }
        let back = frame_to_swarm(&mapped, mf.theta, swarm.center_of_mass());
        for k in 0..n {
            round_trip = round_trip.max((back.positions[k] - swarm.positions[k]).norm());
            round_trip = round_trip.max((back.velocities[k] - swarm.velocities[k]).norm());
        }
    }
    Ok(vec![
        check("physical vs frame trajectory gap", sup_gap < 1e-6, format!("{sup_gap:.2e}")),
        check("algebraic round trip", round_trip < 1e-12, format!("{round_trip:.2e}")),
    ])
}

fn properties() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut ineq_ok = true;
    for _ in 0..10_000 {
        let d = rng.gen_range(1..=50);
        let p: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..10.0)).collect();
        let q: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..10.0)).collect();
        let r: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..10.0)).collect();
        let lhs: f64 = p.iter().zip(&q).map(|(a, b)| a * b).sum::<f64>()
            * p.iter().zip(&r).map(|(a, b)| a * b).sum::<f64>();
        let rhs: f64 = p.iter().map(|a| a * a).sum::<f64>()
            * q.iter().zip(&r).map(|(a, b)| (0.5 * a + 0.5 * b).powi(2)).sum::<f64>();
        ineq_ok &= lhs <= rhs * (1.0 + 1e-12) + 1e-12;
    }
    let mut worst_roots: f64 = 0.0;
    for p in 3..=8 {
        for _ in 0..50 {
            let m = C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            worst_roots = worst_roots.max(roots_of_unity_residual(m, p)?);
        }
    }
    let mut cap_ok = true;
    for _ in 0..10_000 {
        let d = rng.gen_range(1..=12);
        let a: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..0.9)).collect();
        let a_max = a.iter().fold(0.0f64, |m, &v| m.max(v));
        if a_max < 1e-9 {
            continue;
        }
        let weights = influence_weights(&a).unwrap();
        for (k, &ak) in a.iter().enumerate() {
            cap_ok &= ak * ak * (1.0 - weights.t[k]) <= a_max.powf(5.5) + 1e-15;
        }
    }
    let y0 = {
        let (vx, vy) = (1.02, 0.1);
        let f = 1.0 - vx * vx - vy * vy;
        [vx, vy, f * vx + 1e-3, f * vy - 5e-4]
    };
    let (q0x, q0y) = equal_velocity_invariants(y0[0], y0[1], y0[2], y0[3]);
    let cfg = IntegratorConfig::rk4(1e-3, 100.0, 1.0);
    let traj = integrate(&EqualVelocityAccelSystem, 0.0, &y0, &cfg)?;
    let mut drift: f64 = 0.0;
    for s in &traj.states {
        let (qx, qy) = equal_velocity_invariants(s[0], s[1], s[2], s[3]);
        drift = drift.max((qx - q0x).abs().max((qy - q0y).abs()));
    }
    Ok(vec![
        check("product-of-sums inequality (1e4 cases)", ineq_ok, "nonnegative triples, d <= 50".into()),
        check("roots-of-unity identity", worst_roots < 1e-12, format!("max residual {worst_roots:.2e}")),
        check("influence-weight cap (1e4 cases)", cap_ok, "a^2 (1 - T) <= a_M^5.5".into()),
        check("conserved offsets drift (RK4, t = 100)", drift < 1e-8, format!("{drift:.2e}")),
    ])
}

fn sharpness() -> Result<Vec<Check>> {
    let report = sharpness_report(4, 0.05, 7, (1e2, 1e4), 1e4)?;
    Ok(vec![check(
        "heading-rate excursions above threshold",
        report.excursions >= 10,
        format!("{} excursions above {:.2e}", report.excursions, report.threshold),
    )])
}

fn stability() -> Result<Vec<Check>> {
    let chunks: Vec<(u64, u64)> = (0..8).map(|i| (i * 25, 25)).collect();
    let reports = chunks
        .par_iter()
        .map(|&(offset, count)| stability_witness(&[3, 4, 8], 1e-2, 0.1, offset..offset + count, 1e3))
        .collect::<Result<Vec<_>, _>>()?;
    let violations: usize = reports.iter().map(|r| r.violations).sum();
    let worst = reports.iter().map(|r| r.worst_pair_distance).fold(0.0, f64::max);
    Ok(vec![check(
        "stability witness (200 runs, delta 1e-2, eps 0.1)",
        violations == 0,
        format!("{violations} violations, worst pairwise distance {worst:.2e}"),
    )])
}

fn median_of(mut values: Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values[values.len() / 2]
}

/// Decay-rate suite over the standard grid n x seeds. Per-seed slopes are
/// printed; the checks are per-n medians plus a decay bound on every run,
/// since individual seeds can linger in slow phase-locked transients.
/// `stated = true` selects the nominal pre-crossover window, which is known
/// not to reach the asymptotic rates and reports accordingly.
fn decay(amplitude: f64, window: (f64, f64), t_end: f64, stated: bool) -> Result<Vec<Check>> {
    let grid = [3usize, 4, 8];
    let jobs: Vec<(usize, u64)> =
        grid.iter().flat_map(|&n| (0..5u64).map(move |s| (n, s))).collect();
    let runs = jobs
        .par_iter()
        .map(|&(n, seed)| decay_experiment(n, amplitude, seed, window, t_end))
        .collect::<Result<Vec<_>, _>>()?;
    for r in &runs {
        println!(
            "  decay n={} seed={}: a_M slope {:+.3}, 1-|V| slope {:+.3}",
            r.n, r.seed, r.a_fit.slope, r.speed_fit.slope
        );
    }
    let mut out = Vec::new();
    for &n in &grid {
        let a_med = median_of(runs.iter().filter(|r| r.n == n).map(|r| r.a_fit.slope).collect());
        let v_med =
            median_of(runs.iter().filter(|r| r.n == n).map(|r| r.speed_fit.slope).collect());
        out.push(check(
            &format!("median decay slopes, n={n} (amplitude {amplitude}, window [{:.0e}, {:.0e}])", window.0, window.1),
            (-0.55..=-0.45).contains(&a_med) && (-1.15..=-0.85).contains(&v_med),
            format!("a_M median {a_med:+.3}, 1-|V| median {v_med:+.3}"),
        ));
    }
    out.push(check(
        "every run decays",
        runs.iter().all(|r| r.a_fit.slope <= -0.25),
        "a_M slope <= -0.25 for all seeds".into(),
    ));
    if stated {
        out.push(check(
            "stated-window note",
            false,
            "window [1e2, 1e4] at amplitude 0.05 precedes the 1/sqrt(t) crossover (~3e3); \
             the `decay` suite runs the same grid in the asymptotic regime"
                .into(),
        ));
    }
    Ok(out)
}
