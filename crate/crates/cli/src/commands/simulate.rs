//! `simulate`: integrate one configured system and emit a trajectory CSV
//! plus a manifest.

use crate::config::RunConfig;
use crate::manifest::RunManifest;
use anyhow::{bail, Context, Result};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use swarmlab_core::analysis::{frame_track, make_scenario, FrameTrack, ScenarioState};
use swarmlab_core::integrate::{integrate, write_csv, Trajectory};
use swarmlab_core::manifold::manifold_map;
use swarmlab_core::model::{
    frame_to_swarm, swarm_rhs, to_moving_frame, EqualVelocityAccelSystem, EqualVelocitySystem,
    FrameState, FrameSystem, PlanarVec, Swarm3dSystem, SwarmState, SwarmSystem, VelocityAccSystem,
};
use swarmlab_core::reduced::{central_rhs, lyapunov_sample, polar_rhs, CentralSystem, PolarSystem};

pub fn run(cfg: &RunConfig, out_dir: &Path) -> Result<PathBuf> {
    let start = std::time::Instant::now();
    let mut manifest = RunManifest::new("simulate", &cfg.canonical(), cfg.run.seed);
    let result = simulate_inner(cfg, out_dir, &mut manifest);
    manifest.wall_seconds = start.elapsed().as_secs_f64();
    if let Err(e) = &result {
        manifest.error = Some(format!("{e:#}"));
    }
    let manifest_path = manifest.write(out_dir)?;
    result.map(|_| manifest_path)
}

fn simulate_inner(cfg: &RunConfig, out_dir: &Path, manifest: &mut RunManifest) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let scenario = make_scenario(&cfg.scenario_config()?)?;
    let int_cfg = cfg.integrator_config()?;
    let theta0 = cfg.run.theta0;
    let n = cfg.scenario.n;
    let (header, rows) = match cfg.run.system.as_str() {
        "frame" => {
            let fs = as_frame(scenario, theta0)?;
            let traj = integrate(&FrameSystem { n }, 0.0, &fs.to_flat(), &int_cfg)?;
            let track = frame_track(n, &traj, theta0)?;
            frame_table(n, &traj, &track)
        }
        "main" => {
            let state = as_swarm(scenario, theta0)?;
            let traj = integrate(&SwarmSystem { n }, 0.0, &state.to_flat(), &int_cfg)?;
            // Mean-field diagnostics via the frame transform of each sample.
            let frame_states: Vec<Vec<f64>> = traj
                .states
                .iter()
                .zip(&traj.times)
                .map(|(s, &t)| {
                    let swarm = SwarmState::from_flat(t, n, s);
                    Ok(to_moving_frame(&swarm)?.0.to_flat())
                })
                .collect::<Result<_>>()?;
            let frame_traj = Trajectory { times: traj.times.clone(), states: frame_states };
            let track = frame_track(n, &frame_traj, theta0)?;
            main_table(n, &traj, &track)
        }
        "main3d" => {
            let state = match scenario {
                ScenarioState::Swarm3d(s) => s,
                _ => bail!("system `main3d` needs the helix-3d scenario"),
            };
            let traj = integrate(&Swarm3dSystem { n }, 0.0, &state.to_flat(), &int_cfg)?;
            spatial_table(n, &traj)
        }
        "central" => {
            let fs = as_frame(scenario, theta0)?;
            let mut state = fs.w.clone();
            state.extend_from_slice(&fs.y);
            let traj = integrate(&CentralSystem { n }, 0.0, &state, &int_cfg)?;
            central_table(n, &traj)
        }
        "polar" => {
            let fs = as_frame(scenario, theta0)?;
            let mut state: Vec<f64> = fs
                .w
                .iter()
                .zip(&fs.y)
                .map(|(&w, &y)| (w * w + y * y).sqrt())
                .collect();
            state.extend(fs.w.iter().zip(&fs.y).map(|(&w, &y)| y.atan2(w)));
            let traj = integrate(&PolarSystem { n }, 0.0, &state, &int_cfg)?;
            polar_table(n, &traj)
        }
        "velocity-acc" => {
            let state = as_swarm(scenario, theta0)?;
            let accel = swarm_rhs(&state)?.rddot;
            let mut flat = Vec::with_capacity(4 * n);
            for v in &state.velocities {
                flat.push(v.x);
                flat.push(v.y);
            }
            for a in &accel {
                flat.push(a.x);
                flat.push(a.y);
            }
            let traj = integrate(&VelocityAccSystem { n }, 0.0, &flat, &int_cfg)?;
            velocity_table(n, &traj)
        }
        "equal-av" => {
            let s = &cfg.scenario;
            let (vx, vy) = (s.speed * s.heading.cos(), s.speed * s.heading.sin());
            let f = 1.0 - vx * vx - vy * vy;
            let state = [vx, vy, f * vx + s.amplitude, f * vy];
            let traj = integrate(&EqualVelocityAccelSystem, 0.0, &state, &int_cfg)?;
            equal_av_table(&traj)
        }
        "equal-v" => {
            let s = &cfg.scenario;
            let state = [s.speed * s.heading.cos(), s.speed * s.heading.sin(), s.amplitude];
            let traj = integrate(&EqualVelocitySystem, 0.0, &state, &int_cfg)?;
            let header = vec!["t".into(), "vx".into(), "vy".into(), "c0".into()];
            let rows = raw_rows(&traj);
            (header, rows)
        }
        other => bail!("unknown system `{other}`"),
    };
    let csv_path = out_dir.join("trajectory.csv");
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(&csv_path, &header_refs, rows.into_iter())
        .with_context(|| format!("writing {}", csv_path.display()))?;
    manifest.record_output(&csv_path);
    println!("wrote {}", csv_path.display());
    Ok(())
}

fn as_frame(scenario: ScenarioState, _theta0: f64) -> Result<FrameState> {
    match scenario {
        ScenarioState::Frame(fs) => Ok(fs),
        ScenarioState::Swarm(s) => Ok(to_moving_frame(&s)?.0),
        ScenarioState::Swarm3d(_) => bail!("spatial scenarios have no planar frame"),
    }
}

fn as_swarm(scenario: ScenarioState, theta0: f64) -> Result<SwarmState> {
    match scenario {
        ScenarioState::Swarm(s) => Ok(s),
        ScenarioState::Frame(fs) => Ok(frame_to_swarm(&fs, theta0, PlanarVec::ZERO)),
        ScenarioState::Swarm3d(_) => bail!("spatial scenarios have no planar state"),
    }
}

fn raw_rows(traj: &Trajectory) -> Vec<Vec<f64>> {
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(&t, s)| {
            let mut row = Vec::with_capacity(1 + s.len());
            row.push(t);
            row.extend_from_slice(s);
            row
        })
        .collect()
}

/// Centered moving average over a `2 pi` time window.
fn window_mean_2pi(times: &[f64], values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut lo = 0usize;
    let mut hi = 0usize;
    for (i, &t) in times.iter().enumerate() {
        while times[lo] < t - PI {
            lo += 1;
        }
        while hi + 1 < times.len() && times[hi + 1] <= t + PI {
            hi += 1;
        }
        let slice = &values[lo..=hi.max(i)];
        out.push(slice.iter().sum::<f64>() / slice.len() as f64);
    }
    out
}

type Table = (Vec<String>, Vec<Vec<f64>>);

fn per_agent(names: &[&str], n: usize) -> Vec<String> {
    let mut cols = Vec::new();
    for name in names {
        let count = if *name == "x" { n - 1 } else { n };
        for k in 1..=count {
            cols.push(format!("{name}{k}"));
        }
    }
    cols
}

fn mean_field_columns() -> Vec<String> {
    ["V", "Theta", "m", "m_mean_2pi", "s", "a_M", "W"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

fn mean_field_values(track: &FrameTrack, m_mean: &[f64], i: usize) -> [f64; 7] {
    [
        track.speed[i],
        track.theta[i],
        track.m[i],
        m_mean[i],
        track.s[i],
        track.a_max[i],
        track.lyapunov[i],
    ]
}

fn frame_table(n: usize, traj: &Trajectory, track: &FrameTrack) -> Table {
    let mut header = vec!["t".to_string()];
    header.extend(per_agent(&["w", "y", "x", "u"], n));
    header.extend(per_agent(&["a"], n));
    header.extend(mean_field_columns());
    let m_mean = window_mean_2pi(&track.times, &track.m);
    let rows = traj
        .times
        .iter()
        .zip(&traj.states)
        .enumerate()
        .map(|(i, (&t, s))| {
            let mut row = Vec::with_capacity(header.len());
            row.push(t);
            row.extend_from_slice(s);
            for k in 0..n {
                row.push((s[k] * s[k] + s[n + k] * s[n + k]).sqrt());
            }
            row.extend_from_slice(&mean_field_values(track, &m_mean, i));
            row
        })
        .collect();
    (header, rows)
}

fn main_table(n: usize, traj: &Trajectory, track: &FrameTrack) -> Table {
    let mut header = vec!["t".to_string()];
    for k in 1..=n {
        header.push(format!("r{k}x"));
        header.push(format!("r{k}y"));
    }
    for k in 1..=n {
        header.push(format!("v{k}x"));
        header.push(format!("v{k}y"));
    }
    header.extend(mean_field_columns());
    let m_mean = window_mean_2pi(&track.times, &track.m);
    let rows = traj
        .times
        .iter()
        .zip(&traj.states)
        .enumerate()
        .map(|(i, (&t, s))| {
            let mut row = Vec::with_capacity(header.len());
            row.push(t);
            row.extend_from_slice(s);
            row.extend_from_slice(&mean_field_values(track, &m_mean, i));
            row
        })
        .collect();
    (header, rows)
}

fn spatial_table(n: usize, traj: &Trajectory) -> Table {
    let mut header = vec!["t".to_string()];
    for k in 1..=n {
        for d in ["x", "y", "z"] {
            header.push(format!("r{k}{d}"));
        }
    }
    for k in 1..=n {
        for d in ["x", "y", "z"] {
            header.push(format!("v{k}{d}"));
        }
    }
    (header, raw_rows(traj))
}

fn central_table(n: usize, traj: &Trajectory) -> Table {
    let mut header = vec!["t".to_string()];
    header.extend(per_agent(&["w", "y"], n));
    header.extend(["V", "m", "a_M", "W"].iter().map(|s| s.to_string()));
    let coeffs = swarmlab_core::analysis::manifold_coeffs();
    let rows = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(&t, s)| {
            let (w, y) = s.split_at(n);
            let mut dw = vec![0.0; n];
            let mut dy = vec![0.0; n];
            let m = central_rhs(w, y, &mut dw, &mut dy);
            let a: Vec<f64> = (0..n).map(|k| (w[k] * w[k] + y[k] * y[k]).sqrt()).collect();
            let th: Vec<f64> = (0..n).map(|k| y[k].atan2(w[k])).collect();
            let lyap = lyapunov_sample(&a, &th).map(|l| l.w).unwrap_or(0.0);
            let z_bar = manifold_map(coeffs, w, y).z_bar;
            let mut row = Vec::with_capacity(header.len());
            row.push(t);
            row.extend_from_slice(s);
            row.push(1.0 + z_bar);
            row.push(m);
            row.push(a.iter().cloned().fold(0.0, f64::max));
            row.push(lyap);
            row
        })
        .collect();
    (header, rows)
}

fn polar_table(n: usize, traj: &Trajectory) -> Table {
    let mut header = vec!["t".to_string()];
    header.extend(per_agent(&["a", "theta"], n));
    header.extend(["m", "a_M", "W"].iter().map(|s| s.to_string()));
    let rows = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(&t, s)| {
            let (a, th) = s.split_at(n);
            let deriv = polar_rhs(a, th);
            let abs_a: Vec<f64> = a.iter().map(|v| v.abs()).collect();
            let lyap = lyapunov_sample(&abs_a, th).map(|l| l.w).unwrap_or(0.0);
            let mut row = Vec::with_capacity(header.len());
            row.push(t);
            row.extend_from_slice(s);
            row.push(deriv.m);
            row.push(abs_a.iter().cloned().fold(0.0, f64::max));
            row.push(lyap);
            row
        })
        .collect();
    (header, rows)
}

fn velocity_table(n: usize, traj: &Trajectory) -> Table {
    let mut header = vec!["t".to_string()];
    for k in 1..=n {
        header.push(format!("v{k}x"));
        header.push(format!("v{k}y"));
    }
    for k in 1..=n {
        header.push(format!("a{k}x"));
        header.push(format!("a{k}y"));
    }
    (header, raw_rows(traj))
}

fn equal_av_table(traj: &Trajectory) -> Table {
    let header = ["t", "vx", "vy", "ax", "ay", "qx", "qy"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(&t, s)| {
            let (qx, qy) =
                swarmlab_core::model::equal_velocity_invariants(s[0], s[1], s[2], s[3]);
            vec![t, s[0], s[1], s[2], s[3], qx, qy]
        })
        .collect();
    (header, rows)
}
