use super::*;
use crate::integrate::{integrate, IntegratorConfig};
use crate::model::{swarm_rhs, to_moving_frame, EqualVelocitySystem, FrameSystem, PlanarVec};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

#[test]
fn power_law_fit_recovers_synthetic_exponents() {
    let times: Vec<f64> = (1..=2000).map(|i| i as f64 * 0.5).collect();
    let half: Vec<f64> = times.iter().map(|&t| 3.0 / t.sqrt()).collect();
    let fit = fit_power_law(&times, &half, (1.0, 1000.0)).unwrap();
    assert!((fit.slope + 0.5).abs() < 1e-6);
    assert!((fit.intercept - 3.0f64.ln()).abs() < 1e-6);
    assert!(fit.rms_residual < 1e-10);
    let whole: Vec<f64> = times.iter().map(|&t| 2.0 / t).collect();
    let fit = fit_power_law(&times, &whole, (1.0, 1000.0)).unwrap();
    assert!((fit.slope + 1.0).abs() < 1e-6);
}

#[test]
fn power_law_fit_rejects_bad_inputs() {
    let times: Vec<f64> = (1..=100).map(|i| i as f64).collect();
    let mut values: Vec<f64> = times.iter().map(|&t| 1.0 / t).collect();
    assert!(matches!(
        fit_power_law(&times, &values, (1.0, 5.0)),
        Err(AnalysisError::ShortWindow { .. })
    ));
    values[10] = 0.0;
    assert!(matches!(
        fit_power_law(&times, &values, (1.0, 100.0)),
        Err(AnalysisError::NonPositiveValue { .. })
    ));
}

#[test]
fn rotating_scenario_solves_the_model_exactly() {
    let state = make_scenario(&ScenarioConfig {
        kind: ScenarioKind::Rotating { angles: None, center: PlanarVec::new(0.7, -0.2) },
        n: 5,
        amplitude: 0.0,
        seed: 0,
    })
    .unwrap()
    .expect_swarm();
    let deriv = swarm_rhs(&state).unwrap();
    // Exact acceleration of e^{i th}e^{it} + c is -(r - c).
    for (a, &r) in deriv.rddot.iter().zip(&state.positions) {
        let exact = -(r - PlanarVec::new(0.7, -0.2));
        assert!((*a - exact).norm() < 1e-13);
    }
}

#[test]
fn rotating_scenario_rejects_unbalanced_angles() {
    let r = make_scenario(&ScenarioConfig {
        kind: ScenarioKind::Rotating { angles: Some(vec![0.0, 0.1, 0.2]), center: PlanarVec::ZERO },
        n: 3,
        amplitude: 0.0,
        seed: 0,
    });
    assert!(matches!(r, Err(AnalysisError::InvalidScenario(_))));
}

#[test]
fn symmetric_ring_needs_at_least_three_agents_within_the_swarm() {
    for (p, n) in [(2usize, 5usize), (6, 5)] {
        let r = make_scenario(&ScenarioConfig {
            kind: ScenarioKind::PFoldSymmetric {
                p,
                ring_radius: 1.0,
                tangential_speed: 1.0,
                radial_speed: 0.0,
            },
            n,
            amplitude: 0.0,
            seed: 0,
        });
        assert!(matches!(r, Err(AnalysisError::InvalidScenario(_))), "p = {p}, n = {n}");
    }
}

#[test]
fn collapsed_symmetric_ring_is_the_degenerate_branch() {
    let state = make_scenario(&ScenarioConfig {
        kind: ScenarioKind::PFoldSymmetric {
            p: 4,
            ring_radius: 0.0,
            tangential_speed: 0.0,
            radial_speed: 0.0,
        },
        n: 6,
        amplitude: 0.0,
        seed: 0,
    })
    .unwrap()
    .expect_swarm();
    assert!(state.max_pair_distance() == 0.0);
}

#[test]
fn random_near_rectilinear_meets_the_stability_hypotheses() {
    for seed in 0..20 {
        let delta = 1e-2;
        let frame = make_scenario(&ScenarioConfig {
            kind: ScenarioKind::RandomNearZf,
            n: 4,
            amplitude: delta / 4.0,
            seed,
        })
        .unwrap()
        .expect_frame();
        let a_max = frame
            .w
            .iter()
            .zip(&frame.y)
            .map(|(&w, &y)| (w * w + y * y).sqrt())
            .fold(0.0f64, f64::max);
        assert!((a_max - delta / 4.0).abs() < 1e-12, "amplitude normalization");
        assert!(frame.w.iter().sum::<f64>().abs() < 1e-12);
        assert!(frame.y.iter().sum::<f64>().abs() < 1e-12);
        assert!((frame.mean_u() - 1.0).abs() < delta);
        // On-manifold completion keeps the frame hypotheses within delta.
        for k in 0..4 {
            let du = frame.u[k] - frame.mean_u();
            assert!((du * du + frame.w[k] * frame.w[k]).sqrt() < delta);
        }
    }
}

#[test]
fn identical_block_replicates_all_but_one_agent() {
    let frame = make_scenario(&ScenarioConfig {
        kind: ScenarioKind::IdenticalBlock,
        n: 4,
        amplitude: 0.06,
        seed: 3,
    })
    .unwrap()
    .expect_frame();
    for k in 1..3 {
        assert_eq!(frame.w[0], frame.w[k]);
        assert_eq!(frame.y[0], frame.y[k]);
        assert_eq!(frame.u[0], frame.u[k]);
    }
    assert!((frame.w.iter().sum::<f64>()).abs() < 1e-15);
    let a_last = (frame.w[3].powi(2) + frame.y[3].powi(2)).sqrt();
    assert!((a_last - 0.06).abs() < 1e-12, "block amplitude normalization");
}

#[test]
fn mirror_scenario_has_identically_zero_heading_rate() {
    let state = make_scenario(&ScenarioConfig {
        kind: ScenarioKind::MirrorSymmetric,
        n: 6,
        amplitude: 0.05,
        seed: 11,
    })
    .unwrap()
    .expect_swarm();
    let (frame, mf) = to_moving_frame(&state).unwrap();
    assert!(mf.m.abs() < 1e-14);
    assert!(mf.v.y.abs() < 1e-14);
    let cfg = IntegratorConfig::rk45(1e-10, 1e-12, 50.0, 0.5);
    let traj = integrate(&FrameSystem { n: 6 }, 0.0, &frame.to_flat(), &cfg).unwrap();
    let track = frame_track(6, &traj, 0.0).unwrap();
    for (&m, &theta) in track.m.iter().zip(&track.theta) {
        assert!(m.abs() < 1e-9, "heading rate leaked: {m:e}");
        assert!(theta.abs() < 1e-9);
    }
}

#[test]
fn excursion_counter_sees_each_bump_once() {
    let times: Vec<f64> = (0..1000).map(|i| 100.0 + i as f64).collect();
    // m = (2 + sin t)/t^{3/2}: scaled signal oscillates in [1, 3].
    let m: Vec<f64> = times.iter().map(|&t| (2.0 + t.sin()) / t.powf(1.5)).collect();
    let n = drift_excursions(&times, &m, (100.0, 1100.0), 2.5);
    let expected = 1000.0 / (2.0 * PI);
    assert!((n as f64 - expected).abs() < 10.0, "counted {n}");
    assert_eq!(drift_excursions(&times, &m, (100.0, 1100.0), 10.0), 0);
}

#[test]
fn roots_identity_residuals() {
    // m = 0: alpha = 1, beta = 0, and the identity reduces to |root| = 1.
    assert!(roots_of_unity_residual(Complex64::new(0.0, 0.0), 5).unwrap() < 1e-15);
    for p in 3..=8 {
        let r = roots_of_unity_residual(Complex64::new(1.0, 0.0), p).unwrap();
        assert!(r < 1e-12, "p = {p}: {r:e}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let m = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let r = roots_of_unity_residual(m, 5).unwrap();
        assert!(r < 1e-12, "m = {m}: {r:e}");
    }
    assert!(roots_of_unity_residual(Complex64::new(1.0, 0.0), 2).is_err());
}

#[test]
fn collapsed_start_classifies_as_collapse() {
    let (outcome, defect) = symmetric_dichotomy_probe(5, 3, 0.0, 0.0, 0.0, 150.0).unwrap();
    assert_eq!(outcome, Dichotomy::Collapse);
    assert!(defect < 1e-9);
}

#[test]
fn rotating_ring_classifies_as_stationary_center() {
    // Tangential unit speeds on the unit ring: the center of mass is pinned.
    let (outcome, defect) = symmetric_dichotomy_probe(3, 3, 1.0, 1.0, 0.0, 150.0).unwrap();
    assert_eq!(outcome, Dichotomy::StationaryCenter);
    assert!(defect < 1e-6, "symmetry defect {defect:e}");
}

#[test]
fn unit_speed_flock_has_zero_drift_constant() {
    let result = flocking_asymptote(3, 1.0, 0.0, 10.0).unwrap();
    assert!(result.c_inf.norm() < 1e-12);
    assert!(result.gaps.iter().all(|&g| g < 1e-10));
}

#[test]
fn slow_flock_relaxes_at_the_logistic_rate() {
    let result = flocking_asymptote(2, 0.5, 0.0, 40.0).unwrap();
    let rate = result.rate.expect("speed defect is resolvable");
    assert!((-2.2..=-1.8).contains(&rate.slope), "fitted rate {}", rate.slope);
    // Residual motion gap far into the run is at quadrature level.
    let gap_at_20 = result
        .times
        .iter()
        .zip(&result.gaps)
        .find(|(&t, _)| t >= 20.0)
        .map(|(_, &g)| g)
        .unwrap();
    assert!(gap_at_20 < 1e-6, "gap {gap_at_20:e}");
}

#[test]
fn saddle_with_negative_offset_expels_nearby_data() {
    // With c0 = -1e-3 the near-unit fixed point has an unstable direction;
    // data displaced along it leaves the 0.05-ball around (1, 0). On the
    // unit circle with c0 = 0 nothing moves.
    let c0 = -1e-3;
    let v_star = crate::model::equal_velocity_fixed_points(c0)
        .into_iter()
        .find(|v| (v - 1.0).abs() < 0.1)
        .unwrap();
    let y0 = [v_star, 1e-3, c0];
    let cfg = IntegratorConfig::rk45(1e-10, 1e-12, 6000.0, 10.0);
    let traj = integrate(&EqualVelocitySystem, 0.0, &y0, &cfg).unwrap();
    let escaped = traj.states.iter().any(|s| {
        let dx = s[0] - 1.0;
        let dy = s[1];
        (dx * dx + dy * dy).sqrt() > 0.05
    });
    assert!(escaped, "trajectory stayed inside the 0.05-ball");

    let fixed = [0.6f64.cos(), 0.6f64.sin(), 0.0];
    let traj = integrate(&EqualVelocitySystem, 0.0, &fixed, &cfg).unwrap();
    for s in &traj.states {
        assert!((s[0] - fixed[0]).abs() + (s[1] - fixed[1]).abs() < 1e-9);
    }
}

#[test]
fn speed_gap_account_reports_logarithmic_lag_on_mirror_runs() {
    // The 1/t speed-gap asymptotics (and hence the log t lag) set in past
    // the crossover time 1/(K amplitude^2), so the window sits late.
    let state = make_scenario(&ScenarioConfig {
        kind: ScenarioKind::MirrorSymmetric,
        n: 4,
        amplitude: 0.05,
        seed: 2,
    })
    .unwrap()
    .expect_swarm();
    let (frame, _) = to_moving_frame(&state).unwrap();
    let cfg = IntegratorConfig::rk45(1e-9, 1e-12, 2e5, 10.0);
    let traj = integrate(&FrameSystem { n: 4 }, 0.0, &frame.to_flat(), &cfg).unwrap();
    let track = frame_track(4, &traj, 0.0).unwrap();
    let window = (3e4, 2e5);
    let account = speed_gap_account(&track, window).unwrap();
    assert!(
        (-1.2..=-0.7).contains(&account.fit.slope),
        "speed gap slope {}",
        account.fit.slope
    );
    // The lag keeps growing like log t: positive slope, decent fit.
    let fit = account.lag_vs_log_t;
    assert!(fit.slope > 0.0);
    let in_window: Vec<f64> = track
        .times
        .iter()
        .zip(&account.lag)
        .filter(|(&t, _)| t >= window.0 && t <= window.1)
        .map(|(_, &l)| l)
        .collect();
    let lag_range = in_window.last().unwrap() - in_window.first().unwrap();
    assert!(fit.rms_residual < 0.1 * lag_range.abs(), "lag not logarithmic");
}

#[test]
fn frame_track_matches_direct_mean_field() {
    let frame = make_scenario(&ScenarioConfig {
        kind: ScenarioKind::RandomNearZf,
        n: 3,
        amplitude: 0.05,
        seed: 9,
    })
    .unwrap()
    .expect_frame();
    let cfg = IntegratorConfig::rk45(1e-10, 1e-12, 10.0, 1.0);
    let traj = integrate(&FrameSystem { n: 3 }, 0.0, &frame.to_flat(), &cfg).unwrap();
    let track = frame_track(3, &traj, 0.25).unwrap();
    assert_eq!(track.times.len(), traj.len());
    assert!((track.theta[0] - 0.25).abs() < 1e-15);
    assert!(track.speed.iter().all(|&s| (s - 1.0).abs() < 0.1));
    assert!(track.a_max[0] <= 0.05 + 1e-12);
}

#[test]
fn translating_run_has_no_speed_gap() {
    let n = 3;
    let fs = swarmlab_model_rectilinear(n);
    let cfg = IntegratorConfig::rk45(1e-10, 1e-12, 100.0, 1.0);
    let traj = integrate(&FrameSystem { n }, 0.0, &fs, &cfg).unwrap();
    let track = frame_track(n, &traj, 0.0).unwrap();
    assert!(track.speed.iter().all(|&s| (s - 1.0).abs() < 1e-12));
    // The gap is identically zero, so a power-law fit is meaningless and
    // reports the nonpositive data instead of inventing a slope.
    assert!(matches!(
        speed_gap_account(&track, (10.0, 100.0)),
        Err(AnalysisError::NonPositiveValue { .. })
    ));
}

fn swarmlab_model_rectilinear(n: usize) -> Vec<f64> {
    crate::model::FrameState::rectilinear(n).to_flat()
}

#[test]
fn median_of_even_and_odd_sets() {
    assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
    assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
}
