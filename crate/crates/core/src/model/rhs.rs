//! Right-hand sides for the swarm model and its reformulations, both on
//! typed states and on flat slices for the integrator.

use super::{ModelError, PlanarVec, SwarmState, SwarmState3D, FrameState, SINGULAR_MEAN_SPEED};
use crate::integrate::{OdeSystem, RhsError};

/// Time derivative of a physical state: velocities and accelerations.
#[derive(Debug, Clone)]
pub struct SwarmDeriv {
    pub rdot: Vec<PlanarVec>,
    pub rddot: Vec<PlanarVec>,
}

/// Acceleration of each agent: self-propulsion toward unit speed plus
/// attraction to the center of mass.
pub fn swarm_rhs(state: &SwarmState) -> Result<SwarmDeriv, ModelError> {
    if !state.positions.iter().chain(&state.velocities).all(|v| v.is_finite()) {
        return Err(ModelError::NonFinite);
    }
    if state.n() < 2 {
        return Err(ModelError::TooFewAgents(state.n()));
    }
    let center = state.center_of_mass();
    let rddot = state
        .positions
        .iter()
        .zip(&state.velocities)
        .map(|(&r, &v)| v * (1.0 - v.norm_sq()) - (r - center))
        .collect();
    Ok(SwarmDeriv { rdot: state.velocities.clone(), rddot })
}

pub fn swarm_rhs_flat(n: usize, y: &[f64], dydt: &mut [f64]) {
    let (rx, ry) = (0, 1);
    let mut cx = 0.0;
    let mut cy = 0.0;
    for k in 0..n {
        cx += y[2 * k + rx];
        cy += y[2 * k + ry];
    }
    cx /= n as f64;
    cy /= n as f64;
    for k in 0..n {
        let vx = y[2 * n + 2 * k];
        let vy = y[2 * n + 2 * k + 1];
        let f = 1.0 - vx * vx - vy * vy;
        dydt[2 * k] = vx;
        dydt[2 * k + 1] = vy;
        dydt[2 * n + 2 * k] = f * vx - (y[2 * k] - cx);
        dydt[2 * n + 2 * k + 1] = f * vy - (y[2 * k + 1] - cy);
    }
}

/// Spatial analogue of [`swarm_rhs`], used by the helix check.
pub fn swarm_rhs_3d(state: &SwarmState3D) -> Vec<[f64; 3]> {
    let n = state.n();
    let mut center = [0.0; 3];
    for p in &state.positions {
        for d in 0..3 {
            center[d] += p[d] / n as f64;
        }
    }
    state
        .positions
        .iter()
        .zip(&state.velocities)
        .map(|(p, v)| {
            let speed_sq: f64 = v.iter().map(|c| c * c).sum();
            let f = 1.0 - speed_sq;
            [
                f * v[0] - (p[0] - center[0]),
                f * v[1] - (p[1] - center[1]),
                f * v[2] - (p[2] - center[2]),
            ]
        })
        .collect()
}

/// Second derivatives of the velocity variables: the system obtained by
/// differentiating the equations of motion once.
pub fn velocity_accel_rhs(
    v: &[PlanarVec],
    vdot: &[PlanarVec],
) -> Result<Vec<PlanarVec>, ModelError> {
    if v.len() != vdot.len() {
        return Err(ModelError::LengthMismatch { positions: v.len(), velocities: vdot.len() });
    }
    let n = v.len() as f64;
    let mut mean = PlanarVec::ZERO;
    for &vk in v {
        mean = mean + vk;
    }
    mean = mean * (1.0 / n);
    Ok(v.iter()
        .zip(vdot)
        .map(|(&vk, &ak)| ak * (1.0 - vk.norm_sq()) - vk * (2.0 * vk.dot(ak)) - (vk - mean))
        .collect())
}

/// Shared-velocity dynamics: all agents collapsed, tracking the common
/// velocity and acceleration. Returns `(vx', vy', ax', ay')`.
pub fn equal_velocity_accel_rhs(vx: f64, vy: f64, ax: f64, ay: f64) -> [f64; 4] {
    [
        ax,
        ay,
        (1.0 - 3.0 * vx * vx - vy * vy) * ax - 2.0 * vx * vy * ay,
        (1.0 - vx * vx - 3.0 * vy * vy) * ay - 2.0 * vx * vy * ax,
    ]
}

/// Conserved quantities of the shared-velocity system:
/// `q = a - (1 - vx^2 - vy^2) v` componentwise.
pub fn equal_velocity_invariants(vx: f64, vy: f64, ax: f64, ay: f64) -> (f64, f64) {
    let f = 1.0 - vx * vx - vy * vy;
    (ax - f * vx, ay - f * vy)
}

/// One-parameter reduction of the shared-velocity system on the level set
/// `q_y = 0`, `q_x = c0`. Returns `(vx', vy', c0')` with `c0' = 0`.
pub fn equal_velocity_rhs(vx: f64, vy: f64, c0: f64) -> [f64; 3] {
    let f = 1.0 - vx * vx - vy * vy;
    [f * vx + c0, f * vy, 0.0]
}

/// Fixed points `(v, 0)` of the reduced shared-velocity system, i.e. the
/// real solutions of `v (1 - v^2) = -c0`, ascending in `v`.
pub fn equal_velocity_fixed_points(c0: f64) -> Vec<f64> {
    // v^3 - v - c0 = 0
    crate::numerics::cubic_real_roots(0.0, -1.0, -c0)
}

/// Relative-coordinate form: offsets from the center of mass for the first
/// `n-1` agents plus all `n` velocities.
///
/// Flat layout `[sx (n-1) | sy (n-1) | vx (n-1) | vy (n-1) | vx_n | vy_n]`,
/// matching the column ordering of its Jacobian.
pub fn relative_rhs_flat(n: usize, y: &[f64], dydt: &mut [f64]) {
    let m = n - 1;
    let sx = &y[0..m];
    let sy = &y[m..2 * m];
    let vx = &y[2 * m..3 * m];
    let vy = &y[3 * m..4 * m];
    let vxn = y[4 * m];
    let vyn = y[4 * m + 1];
    let mean_vx = (vx.iter().sum::<f64>() + vxn) / n as f64;
    let mean_vy = (vy.iter().sum::<f64>() + vyn) / n as f64;
    for k in 0..m {
        dydt[k] = vx[k] - mean_vx;
        dydt[m + k] = vy[k] - mean_vy;
        let f = 1.0 - vx[k] * vx[k] - vy[k] * vy[k];
        dydt[2 * m + k] = f * vx[k] - sx[k];
        dydt[3 * m + k] = f * vy[k] - sy[k];
    }
    let fn_ = 1.0 - vxn * vxn - vyn * vyn;
    dydt[4 * m] = fn_ * vxn + sx.iter().sum::<f64>();
    dydt[4 * m + 1] = fn_ * vyn + sy.iter().sum::<f64>();
}

/// Restriction of [`relative_rhs_flat`] to vanishing normal components.
/// Flat layout `[sx (n-1) | vx (n-1) | vx_n]`.
pub fn relative_x_rhs_flat(n: usize, y: &[f64], dydt: &mut [f64]) {
    let m = n - 1;
    let sx = &y[0..m];
    let vx = &y[m..2 * m];
    let vxn = y[2 * m];
    let mean_vx = (vx.iter().sum::<f64>() + vxn) / n as f64;
    for k in 0..m {
        dydt[k] = vx[k] - mean_vx;
        dydt[m + k] = (1.0 - vx[k] * vx[k]) * vx[k] - sx[k];
    }
    dydt[2 * m] = (1.0 - vxn * vxn) * vxn + sx.iter().sum::<f64>();
}

/// Time derivative of a frame state.
#[derive(Debug, Clone)]
pub struct FrameDeriv {
    pub w: Vec<f64>,
    pub y: Vec<f64>,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub m: f64,
}

/// Mean speed, heading rate, and tangential acceleration of a frame state:
/// `(|V|, m, s)`. The mean speed is `mean(u)`.
pub fn frame_mean_field(fs: &FrameState) -> Result<(f64, f64, f64), ModelError> {
    let n = fs.n();
    let mean_u = fs.mean_u();
    if mean_u <= SINGULAR_MEAN_SPEED {
        return Err(ModelError::SingularFrame { mean_speed: mean_u });
    }
    let mut s = 0.0;
    let mut m = 0.0;
    for k in 0..n {
        let f = 1.0 - fs.u[k] * fs.u[k] - fs.w[k] * fs.w[k];
        s += f * fs.u[k];
        m += f * fs.w[k];
    }
    Ok((mean_u, m / (n as f64 * mean_u), s / n as f64))
}

/// Frame dynamics: the drift of the heading is folded into the coefficient
/// `m`, leaving a single fixed point for all translating states.
pub fn frame_rhs(fs: &FrameState) -> Result<FrameDeriv, ModelError> {
    let n = fs.n();
    let flat = fs.to_flat();
    let mut dflat = vec![0.0; flat.len()];
    let m = frame_rhs_flat(n, &flat, &mut dflat).map_err(|e| match e {
        RhsError::SingularFrame { mean_speed } => ModelError::SingularFrame { mean_speed },
        RhsError::NonFinite => ModelError::NonFinite,
    })?;
    Ok(FrameDeriv {
        w: dflat[0..n].to_vec(),
        y: dflat[n..2 * n].to_vec(),
        x: dflat[2 * n..3 * n - 1].to_vec(),
        u: dflat[3 * n - 1..4 * n - 1].to_vec(),
        m,
    })
}

/// Flat layout `[w (n) | y (n) | x (n-1) | u (n)]`. Returns the heading rate
/// `m` computed along the way.
pub fn frame_rhs_flat(n: usize, state: &[f64], dydt: &mut [f64]) -> Result<f64, RhsError> {
    let w = &state[0..n];
    let yv = &state[n..2 * n];
    let x = &state[2 * n..3 * n - 1];
    let u = &state[3 * n - 1..4 * n - 1];
    let mean_u = u.iter().sum::<f64>() / n as f64;
    if mean_u <= SINGULAR_MEAN_SPEED {
        return Err(RhsError::SingularFrame { mean_speed: mean_u });
    }
    let mut m = 0.0;
    for k in 0..n {
        m += (1.0 - u[k] * u[k] - w[k] * w[k]) * w[k];
    }
    m /= n as f64 * mean_u;
    let x_last = -x.iter().sum::<f64>();
    for k in 0..n {
        let f = 1.0 - u[k] * u[k] - w[k] * w[k];
        let xk = if k < n - 1 { x[k] } else { x_last };
        // w' and y' for every agent
        dydt[k] = f * w[k] - yv[k] - m * u[k];
        dydt[n + k] = w[k] - m * xk;
        if k < n - 1 {
            // x' and u' for the first n-1 agents
            dydt[2 * n + k] = u[k] - mean_u + m * yv[k];
            dydt[3 * n - 1 + k] = f * u[k] - xk + m * w[k];
        }
    }
    let fn_ = 1.0 - u[n - 1] * u[n - 1] - w[n - 1] * w[n - 1];
    dydt[4 * n - 2] = fn_ * u[n - 1] + x.iter().sum::<f64>() + m * w[n - 1];
    Ok(m)
}

// --- integrator adapters -------------------------------------------------

/// The physical swarm, `dim = 4n`.
#[derive(Debug, Clone, Copy)]
pub struct SwarmSystem {
    pub n: usize,
}

impl OdeSystem for SwarmSystem {
    fn dim(&self) -> usize {
        4 * self.n
    }
    fn eval(&self, _t: f64, y: &[f64], dydt: &mut [f64]) -> Result<(), RhsError> {
        swarm_rhs_flat(self.n, y, dydt);
        Ok(())
    }
}

/// The spatial swarm, `dim = 6n`.
#[derive(Debug, Clone, Copy)]
pub struct Swarm3dSystem {
    pub n: usize,
}

impl OdeSystem for Swarm3dSystem {
    fn dim(&self) -> usize {
        6 * self.n
    }
    fn eval(&self, t: f64, y: &[f64], dydt: &mut [f64]) -> Result<(), RhsError> {
        let state = SwarmState3D::from_flat(t, self.n, y);
        let accel = swarm_rhs_3d(&state);
        for k in 0..self.n {
            for d in 0..3 {
                dydt[3 * k + d] = state.velocities[k][d];
                dydt[3 * self.n + 3 * k + d] = accel[k][d];
            }
        }
        Ok(())
    }
}

/// Velocity-acceleration form, `dim = 4n`, layout `[v (2n) | vdot (2n)]`.
#[derive(Debug, Clone, Copy)]
pub struct VelocityAccSystem {
    pub n: usize,
}

impl OdeSystem for VelocityAccSystem {
    fn dim(&self) -> usize {
        4 * self.n
    }
    fn eval(&self, _t: f64, y: &[f64], dydt: &mut [f64]) -> Result<(), RhsError> {
        let n = self.n;
        let mut mean = PlanarVec::ZERO;
        for k in 0..n {
            mean = mean + PlanarVec::new(y[2 * k], y[2 * k + 1]);
        }
        mean = mean * (1.0 / n as f64);
        for k in 0..n {
            let v = PlanarVec::new(y[2 * k], y[2 * k + 1]);
            let a = PlanarVec::new(y[2 * n + 2 * k], y[2 * n + 2 * k + 1]);
            let dd = a * (1.0 - v.norm_sq()) - v * (2.0 * v.dot(a)) - (v - mean);
            dydt[2 * k] = a.x;
            dydt[2 * k + 1] = a.y;
            dydt[2 * n + 2 * k] = dd.x;
            dydt[2 * n + 2 * k + 1] = dd.y;
        }
        Ok(())
    }
}

/// Moving-frame dynamics, `dim = 4n - 1`.
#[derive(Debug, Clone, Copy)]
pub struct FrameSystem {
    pub n: usize,
}

impl OdeSystem for FrameSystem {
    fn dim(&self) -> usize {
        4 * self.n - 1
    }
    fn eval(&self, _t: f64, y: &[f64], dydt: &mut [f64]) -> Result<(), RhsError> {
        frame_rhs_flat(self.n, y, dydt).map(|_| ())
    }
}

/// Shared-velocity system, `dim = 4`.
#[derive(Debug, Clone, Copy)]
pub struct EqualVelocityAccelSystem;

impl OdeSystem for EqualVelocityAccelSystem {
    fn dim(&self) -> usize {
        4
    }
    fn eval(&self, _t: f64, y: &[f64], dydt: &mut [f64]) -> Result<(), RhsError> {
        dydt.copy_from_slice(&equal_velocity_accel_rhs(y[0], y[1], y[2], y[3]));
        Ok(())
    }
}

/// Reduced shared-velocity system, `dim = 3`.
#[derive(Debug, Clone, Copy)]
pub struct EqualVelocitySystem;

impl OdeSystem for EqualVelocitySystem {
    fn dim(&self) -> usize {
        3
    }
    fn eval(&self, _t: f64, y: &[f64], dydt: &mut [f64]) -> Result<(), RhsError> {
        dydt.copy_from_slice(&equal_velocity_rhs(y[0], y[1], y[2]));
        Ok(())
    }
}

/// Relative-coordinate system, `dim = 4n - 2`.
#[derive(Debug, Clone, Copy)]
pub struct RelativeSystem {
    pub n: usize,
}

impl OdeSystem for RelativeSystem {
    fn dim(&self) -> usize {
        4 * self.n - 2
    }
    fn eval(&self, _t: f64, y: &[f64], dydt: &mut [f64]) -> Result<(), RhsError> {
        relative_rhs_flat(self.n, y, dydt);
        Ok(())
    }
}

/// Normal-component-free relative system, `dim = 2n - 1`.
#[derive(Debug, Clone, Copy)]
pub struct RelativeXSystem {
    pub n: usize,
}

impl OdeSystem for RelativeXSystem {
    fn dim(&self) -> usize {
        2 * self.n - 1
    }
    fn eval(&self, _t: f64, y: &[f64], dydt: &mut [f64]) -> Result<(), RhsError> {
        relative_x_rhs_flat(self.n, y, dydt);
        Ok(())
    }
}
