//! Exact and randomized initial configurations for the experiments.

use super::AnalysisError;
use crate::manifold::{manifold_map, solve_coeffs, ManifoldCoeffs};
use crate::model::{helix_exact, FrameState, PlanarVec, SwarmState, SwarmState3D};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// The manifold coefficient triples, solved once and shared.
pub fn manifold_coeffs() -> &'static ManifoldCoeffs {
    static COEFFS: OnceLock<ManifoldCoeffs> = OnceLock::new();
    COEFFS.get_or_init(solve_coeffs)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioKind {
    /// Rectilinear unit-speed motion with random position and velocity
    /// offsets of size `amplitude`.
    TranslatingPerturbed { heading: f64 },
    /// Agents on the unit circle with tangential unit speeds; phase angles
    /// must have vanishing complex sum. `None` means equally spaced.
    Rotating { angles: Option<Vec<f64>>, center: PlanarVec },
    /// All agents coincident, sharing one velocity.
    FlockingCollapse { speed: f64, heading: f64 },
    /// First `p` agents in a `p`-fold symmetric ring, the rest at the
    /// center; `radial_speed` perturbs the ring symmetrically outward.
    PFoldSymmetric { p: usize, ring_radius: f64, tangential_speed: f64, radial_speed: f64 },
    /// Agent pairs mirrored across the direction of motion; forces the
    /// heading rate to vanish for all time. Needs even `n`.
    MirrorSymmetric,
    /// `n - 1` agents with identical initial conditions on the manifold,
    /// the configuration that makes the heading-rate envelope sharp.
    IdenticalBlock,
    /// Exact helix solution of the spatial model.
    Helix3d { epsilon: f64, angles: Option<Vec<f64>> },
    /// Normal-plane data drawn uniformly on the zero-sum slice with largest
    /// amplitude `amplitude`, completed to an on-manifold frame state.
    RandomNearZf,
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub n: usize,
    pub amplitude: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub enum ScenarioState {
    Swarm(SwarmState),
    Frame(FrameState),
    Swarm3d(SwarmState3D),
}

impl ScenarioState {
    pub fn expect_swarm(self) -> SwarmState {
        match self {
            ScenarioState::Swarm(s) => s,
            other => panic!("expected a physical state, got {other:?}"),
        }
    }

    pub fn expect_frame(self) -> FrameState {
        match self {
            ScenarioState::Frame(s) => s,
            other => panic!("expected a frame state, got {other:?}"),
        }
    }

    pub fn expect_swarm3d(self) -> SwarmState3D {
        match self {
            ScenarioState::Swarm3d(s) => s,
            other => panic!("expected a spatial state, got {other:?}"),
        }
    }
}

/// Complete normal-plane data `(w, y)` to a frame state on the quadratic
/// manifold: tangential offsets and velocities take their manifold values.
pub fn on_manifold_frame(w: Vec<f64>, y: Vec<f64>) -> FrameState {
    let point = manifold_map(manifold_coeffs(), &w, &y);
    let u = point.z.iter().map(|z| 1.0 + z).collect();
    FrameState { t: 0.0, w, y, x: point.x, u }
}

fn uniform_angles(n: usize) -> Vec<f64> {
    (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect()
}

fn check_angle_sum(angles: &[f64]) -> Result<(), AnalysisError> {
    let (sx, sy) = angles
        .iter()
        .fold((0.0, 0.0), |(sx, sy), th| (sx + th.cos(), sy + th.sin()));
    let defect = (sx * sx + sy * sy).sqrt();
    if defect > 1e-9 * angles.len() as f64 {
        return Err(AnalysisError::InvalidScenario(format!(
            "phase angles must sum to zero in the plane, |sum| = {defect:e}"
        )));
    }
    Ok(())
}

/// Draw a zero-mean vector with entries uniform in `[-1, 1]` before
/// projection.
fn zero_mean_uniform(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mean = v.iter().sum::<f64>() / n as f64;
    for x in v.iter_mut() {
        *x -= mean;
    }
    v
}

pub fn make_scenario(cfg: &ScenarioConfig) -> Result<ScenarioState, AnalysisError> {
    let n = cfg.n;
    if n < 2 {
        return Err(AnalysisError::InvalidScenario(format!("need n >= 2, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    match &cfg.kind {
        ScenarioKind::TranslatingPerturbed { heading } => {
            let dir = PlanarVec::new(heading.cos(), heading.sin());
            let mut positions = Vec::with_capacity(n);
            let mut velocities = Vec::with_capacity(n);
            for _ in 0..n {
                positions.push(PlanarVec::new(
                    cfg.amplitude * rng.gen_range(-1.0..1.0),
                    cfg.amplitude * rng.gen_range(-1.0..1.0),
                ));
                velocities.push(
                    dir + PlanarVec::new(
                        cfg.amplitude * rng.gen_range(-1.0..1.0),
                        cfg.amplitude * rng.gen_range(-1.0..1.0),
                    ),
                );
            }
            Ok(ScenarioState::Swarm(SwarmState::new(0.0, positions, velocities)?))
        }
        ScenarioKind::Rotating { angles, center } => {
            let angles = angles.clone().unwrap_or_else(|| uniform_angles(n));
            if angles.len() != n {
                return Err(AnalysisError::InvalidScenario(format!(
                    "{} angles for {n} agents",
                    angles.len()
                )));
            }
            check_angle_sum(&angles)?;
            let positions = angles
                .iter()
                .map(|&th| *center + PlanarVec::new(th.cos(), th.sin()))
                .collect();
            let velocities = angles
                .iter()
                .map(|&th| PlanarVec::new(-th.sin(), th.cos()))
                .collect();
            Ok(ScenarioState::Swarm(SwarmState::new(0.0, positions, velocities)?))
        }
        ScenarioKind::FlockingCollapse { speed, heading } => {
            let v = PlanarVec::new(heading.cos(), heading.sin()) * *speed;
            Ok(ScenarioState::Swarm(SwarmState::new(
                0.0,
                vec![PlanarVec::ZERO; n],
                vec![v; n],
            )?))
        }
        ScenarioKind::PFoldSymmetric { p, ring_radius, tangential_speed, radial_speed } => {
            let p = *p;
            if !(3..=n).contains(&p) {
                return Err(AnalysisError::InvalidScenario(format!(
                    "need 3 <= p <= n, got p = {p}, n = {n}"
                )));
            }
            let mut positions = Vec::with_capacity(n);
            let mut velocities = Vec::with_capacity(n);
            for k in 0..p {
                let th = 2.0 * PI * k as f64 / p as f64;
                let radial = PlanarVec::new(th.cos(), th.sin());
                positions.push(radial * *ring_radius);
                velocities.push(radial.perp() * *tangential_speed + radial * *radial_speed);
            }
            // Remaining agents sit at the center; p-fold rotational symmetry
            // about the center then requires they move with the (zero) mean
            // of the ring velocities.
            for _ in p..n {
                positions.push(PlanarVec::ZERO);
                velocities.push(PlanarVec::ZERO);
            }
            Ok(ScenarioState::Swarm(SwarmState::new(0.0, positions, velocities)?))
        }
        ScenarioKind::MirrorSymmetric => {
            if !n.is_multiple_of(2) {
                return Err(AnalysisError::InvalidScenario(format!(
                    "mirror symmetry needs an even agent count, got {n}"
                )));
            }
            let mut positions = Vec::with_capacity(n);
            let mut velocities = Vec::with_capacity(n);
            for _ in 0..n / 2 {
                let px = cfg.amplitude * rng.gen_range(-1.0..1.0);
                let py = cfg.amplitude * rng.gen_range(0.1..1.0);
                let vx = 1.0 + cfg.amplitude * rng.gen_range(-1.0..1.0);
                let vy = cfg.amplitude * rng.gen_range(-1.0..1.0);
                positions.push(PlanarVec::new(px, py));
                velocities.push(PlanarVec::new(vx, vy));
                positions.push(PlanarVec::new(px, -py));
                velocities.push(PlanarVec::new(vx, -vy));
            }
            Ok(ScenarioState::Swarm(SwarmState::new(0.0, positions, velocities)?))
        }
        ScenarioKind::IdenticalBlock => {
            // n - 1 equal agents; the zero-sum constraint pins the last one.
            let phase = rng.gen_range(0.0..2.0 * PI);
            let a1 = cfg.amplitude / (n - 1) as f64;
            let mut w = vec![a1 * phase.cos(); n - 1];
            let mut y = vec![a1 * phase.sin(); n - 1];
            w.push(-(n as f64 - 1.0) * a1 * phase.cos());
            y.push(-(n as f64 - 1.0) * a1 * phase.sin());
            Ok(ScenarioState::Frame(on_manifold_frame(w, y)))
        }
        ScenarioKind::Helix3d { epsilon, angles } => {
            let angles = angles.clone().unwrap_or_else(|| uniform_angles(n));
            check_angle_sum(&angles)?;
            let helix = helix_exact(*epsilon, &angles)?;
            Ok(ScenarioState::Swarm3d(helix.state_at(0.0)))
        }
        ScenarioKind::RandomNearZf => {
            let (w, y) = loop {
                let w = zero_mean_uniform(&mut rng, n);
                let y = zero_mean_uniform(&mut rng, n);
                let a_max = w
                    .iter()
                    .zip(&y)
                    .map(|(&wk, &yk)| (wk * wk + yk * yk).sqrt())
                    .fold(0.0f64, f64::max);
                if a_max > 1e-6 {
                    let scale = cfg.amplitude / a_max;
                    break (
                        w.into_iter().map(|v| v * scale).collect::<Vec<_>>(),
                        y.into_iter().map(|v| v * scale).collect::<Vec<_>>(),
                    );
                }
            };
            Ok(ScenarioState::Frame(on_manifold_frame(w, y)))
        }
    }
}
