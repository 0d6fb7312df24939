//! The physical swarm model and its equivalent formulations.
//!
//! `n` identical planar agents attract each other through their center of
//! mass and self-propel toward unit speed:
//!
//! ```text
//! r_k'' = (1 - |r_k'|^2) r_k' - (r_k - R),      R = mean of r_j
//! ```
//!
//! Besides the second-order system itself, this module provides the
//! velocity-acceleration form, the shared-velocity reductions, the
//! relative-coordinate form, and the moving frame attached to the mean
//! velocity `V` together with the reconstruction of physical trajectories
//! from frame trajectories.

mod rhs;

pub use rhs::{
    equal_velocity_accel_rhs, equal_velocity_fixed_points, equal_velocity_invariants,
    equal_velocity_rhs, frame_mean_field, frame_rhs, frame_rhs_flat, relative_rhs_flat,
    relative_x_rhs_flat, swarm_rhs, swarm_rhs_3d, swarm_rhs_flat, velocity_accel_rhs,
    EqualVelocityAccelSystem, EqualVelocitySystem, FrameDeriv, FrameSystem, RelativeSystem,
    RelativeXSystem, Swarm3dSystem, SwarmDeriv, SwarmSystem, VelocityAccSystem,
};

use thiserror::Error;

/// Mean speeds at or below this threshold make the moving frame singular.
pub const SINGULAR_MEAN_SPEED: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("state contains a non-finite entry")]
    NonFinite,
    #[error("positions and velocities have different lengths ({positions} vs {velocities})")]
    LengthMismatch { positions: usize, velocities: usize },
    #[error("need at least two agents, got {0}")]
    TooFewAgents(usize),
    #[error("moving frame undefined: mean speed {mean_speed:e} is at or below {SINGULAR_MEAN_SPEED:e}")]
    SingularFrame { mean_speed: f64 },
    #[error("phase angles must have vanishing complex sum, |sum| = {0:e}")]
    AngleSumNonzero(f64),
    #[error("helix pitch parameter must lie in (0, 1), got {0}")]
    PitchOutOfRange(f64),
    #[error("sample times must be strictly increasing (violated at index {0})")]
    NonMonotoneTimes(usize),
}

/// A planar vector.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlanarVec {
    pub x: f64,
    pub y: f64,
}

impl PlanarVec {
    pub const ZERO: PlanarVec = PlanarVec { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Counterclockwise quarter turn: `(x, y) -> (-y, x)`.
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Rotation by `angle` radians.
    pub fn rotated(self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl std::ops::Add for PlanarVec {
    type Output = PlanarVec;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for PlanarVec {
    type Output = PlanarVec;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Neg for PlanarVec {
    type Output = PlanarVec;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

impl std::ops::Mul<f64> for PlanarVec {
    type Output = PlanarVec;
    fn mul(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

/// Scalar projections of `a` onto the direction of `b` and its normal.
///
/// `comp` is the tangential component, `ort` the normal one; together they
/// recover `a = comp * b/|b| + ort * b_perp/|b|`.
pub fn comp(b: PlanarVec, a: PlanarVec) -> f64 {
    a.dot(b) / b.norm()
}

pub fn ort(b: PlanarVec, a: PlanarVec) -> f64 {
    a.dot(b.perp()) / b.norm()
}

/// Physical state of the swarm: positions and velocities of `n` agents.
#[derive(Debug, Clone, PartialEq)]
pub struct SwarmState {
    pub t: f64,
    pub positions: Vec<PlanarVec>,
    pub velocities: Vec<PlanarVec>,
}

impl SwarmState {
    pub fn new(
        t: f64,
        positions: Vec<PlanarVec>,
        velocities: Vec<PlanarVec>,
    ) -> Result<Self, ModelError> {
        if positions.len() != velocities.len() {
            return Err(ModelError::LengthMismatch {
                positions: positions.len(),
                velocities: velocities.len(),
            });
        }
        if positions.len() < 2 {
            return Err(ModelError::TooFewAgents(positions.len()));
        }
        if !positions.iter().chain(&velocities).all(|v| v.is_finite()) || !t.is_finite() {
            return Err(ModelError::NonFinite);
        }
        Ok(Self { t, positions, velocities })
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn center_of_mass(&self) -> PlanarVec {
        let mut r = PlanarVec::ZERO;
        for p in &self.positions {
            r = r + *p;
        }
        r * (1.0 / self.n() as f64)
    }

    pub fn mean_velocity(&self) -> PlanarVec {
        let mut v = PlanarVec::ZERO;
        for p in &self.velocities {
            v = v + *p;
        }
        v * (1.0 / self.n() as f64)
    }

    pub fn max_pair_distance(&self) -> f64 {
        let mut worst = 0.0f64;
        for k1 in 0..self.n() {
            for k2 in k1 + 1..self.n() {
                worst = worst.max((self.positions[k1] - self.positions[k2]).norm());
            }
        }
        worst
    }

    /// Flat layout `[r_1x, r_1y, ..., r_nx, r_ny, v_1x, ..., v_ny]`.
    pub fn to_flat(&self) -> Vec<f64> {
        let n = self.n();
        let mut out = Vec::with_capacity(4 * n);
        for p in &self.positions {
            out.push(p.x);
            out.push(p.y);
        }
        for v in &self.velocities {
            out.push(v.x);
            out.push(v.y);
        }
        out
    }

    pub fn from_flat(t: f64, n: usize, flat: &[f64]) -> Self {
        assert_eq!(flat.len(), 4 * n);
        let positions = (0..n)
            .map(|k| PlanarVec::new(flat[2 * k], flat[2 * k + 1]))
            .collect();
        let velocities = (0..n)
            .map(|k| PlanarVec::new(flat[2 * n + 2 * k], flat[2 * n + 2 * k + 1]))
            .collect();
        Self { t, positions, velocities }
    }
}

/// Mean-field summary of a state: mean velocity, its polar decomposition,
/// and the tangential/normal components of its acceleration.
///
/// `s = d|V|/dt` and `m = dTheta/dt`, where `Theta` is the heading of `V`.
#[derive(Debug, Clone, Copy)]
pub struct MeanField {
    pub v: PlanarVec,
    pub speed: f64,
    pub theta: f64,
    pub s: f64,
    pub m: f64,
}

/// Coordinates in the frame that translates with the center of mass and
/// rotates with the mean velocity.
///
/// Per agent: `x` tangential offset, `y` normal offset, `u` tangential
/// velocity, `w` normal velocity. The last tangential offset is not stored;
/// it is recovered from the zero-sum identity.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameState {
    pub t: f64,
    pub w: Vec<f64>,
    pub y: Vec<f64>,
    /// Tangential offsets of agents `1..n-1`.
    pub x: Vec<f64>,
    pub u: Vec<f64>,
}

impl FrameState {
    pub fn new(t: f64, w: Vec<f64>, y: Vec<f64>, x: Vec<f64>, u: Vec<f64>) -> Result<Self, ModelError> {
        let n = w.len();
        if y.len() != n || u.len() != n || x.len() + 1 != n {
            return Err(ModelError::LengthMismatch {
                positions: n,
                velocities: y.len().min(u.len()).min(x.len() + 1),
            });
        }
        if n < 2 {
            return Err(ModelError::TooFewAgents(n));
        }
        let finite = w.iter().chain(&y).chain(&x).chain(&u).all(|v| v.is_finite());
        if !finite || !t.is_finite() {
            return Err(ModelError::NonFinite);
        }
        Ok(Self { t, w, y, x, u })
    }

    /// The fixed point of the frame dynamics corresponding to unit-speed
    /// rectilinear motion: `w = y = x = 0`, `u = 1`.
    pub fn rectilinear(n: usize) -> Self {
        Self {
            t: 0.0,
            w: vec![0.0; n],
            y: vec![0.0; n],
            x: vec![0.0; n - 1],
            u: vec![1.0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.w.len()
    }

    pub fn dim(&self) -> usize {
        4 * self.n() - 1
    }

    /// Tangential offset of the last agent, `-sum x_k`.
    pub fn x_last(&self) -> f64 {
        -self.x.iter().sum::<f64>()
    }

    pub fn mean_u(&self) -> f64 {
        self.u.iter().sum::<f64>() / self.n() as f64
    }

    /// Flat layout `[w | y | x | u]` matching the Jacobian block ordering.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim());
        out.extend_from_slice(&self.w);
        out.extend_from_slice(&self.y);
        out.extend_from_slice(&self.x);
        out.extend_from_slice(&self.u);
        out
    }

    pub fn from_flat(t: f64, n: usize, flat: &[f64]) -> Self {
        assert_eq!(flat.len(), 4 * n - 1);
        Self {
            t,
            w: flat[0..n].to_vec(),
            y: flat[n..2 * n].to_vec(),
            x: flat[2 * n..3 * n - 1].to_vec(),
            u: flat[3 * n - 1..4 * n - 1].to_vec(),
        }
    }
}

/// Spatial swarm state used only for the exact helix solution.
#[derive(Debug, Clone, PartialEq)]
pub struct SwarmState3D {
    pub t: f64,
    pub positions: Vec<[f64; 3]>,
    pub velocities: Vec<[f64; 3]>,
}

impl SwarmState3D {
    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(6 * self.n());
        for p in &self.positions {
            out.extend_from_slice(p);
        }
        for v in &self.velocities {
            out.extend_from_slice(v);
        }
        out
    }

    pub fn from_flat(t: f64, n: usize, flat: &[f64]) -> Self {
        assert_eq!(flat.len(), 6 * n);
        let positions = (0..n)
            .map(|k| [flat[3 * k], flat[3 * k + 1], flat[3 * k + 2]])
            .collect();
        let velocities = (0..n)
            .map(|k| [flat[3 * n + 3 * k], flat[3 * n + 3 * k + 1], flat[3 * n + 3 * k + 2]])
            .collect();
        Self { t, positions, velocities }
    }
}

/// Transform a physical state into the moving frame.
///
/// Fails when the mean speed vanishes, since the frame direction is then
/// undefined. On the output, `sum w = sum y = 0` and `mean u = |V|` hold to
/// rounding.
pub fn to_moving_frame(state: &SwarmState) -> Result<(FrameState, MeanField), ModelError> {
    let n = state.n();
    let v = state.mean_velocity();
    let speed = v.norm();
    if speed <= SINGULAR_MEAN_SPEED {
        return Err(ModelError::SingularFrame { mean_speed: speed });
    }
    let center = state.center_of_mass();
    let mut w = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut x = Vec::with_capacity(n - 1);
    let mut u = Vec::with_capacity(n);
    for k in 0..n {
        let dr = state.positions[k] - center;
        if k < n - 1 {
            x.push(comp(v, dr));
        }
        y.push(ort(v, dr));
        u.push(comp(v, state.velocities[k]));
        w.push(ort(v, state.velocities[k]));
    }
    let mut s = 0.0;
    let mut m = 0.0;
    for k in 0..n {
        let f = 1.0 - u[k] * u[k] - w[k] * w[k];
        s += f * u[k];
        m += f * w[k];
    }
    s /= n as f64;
    m /= n as f64 * speed;
    let mean_field = MeanField {
        v,
        speed,
        theta: v.y.atan2(v.x),
        s,
        m,
    };
    Ok((FrameState { t: state.t, w, y, x, u }, mean_field))
}

/// Algebraic inverse of [`to_moving_frame`]: rebuild the physical state from
/// frame coordinates, a heading, and a center-of-mass location.
///
/// Exact up to rounding; all quadrature lives in [`reconstruct_flow`].
pub fn frame_to_swarm(fs: &FrameState, theta: f64, center: PlanarVec) -> SwarmState {
    let n = fs.n();
    let dir = PlanarVec::new(theta.cos(), theta.sin());
    let normal = dir.perp();
    let mut positions = Vec::with_capacity(n);
    let mut velocities = Vec::with_capacity(n);
    for k in 0..n {
        let xk = if k < n - 1 { fs.x[k] } else { fs.x_last() };
        positions.push(center + dir * xk + normal * fs.y[k]);
        velocities.push(dir * fs.u[k] + normal * fs.w[k]);
    }
    SwarmState { t: fs.t, positions, velocities }
}

/// A physical trajectory reconstructed from a frame trajectory.
#[derive(Debug, Clone)]
pub struct ReconstructedFlow {
    pub states: Vec<SwarmState>,
    /// Heading `Theta(t)` accumulated by quadrature of `m`.
    pub theta: Vec<f64>,
    /// Center-of-mass path.
    pub centers: Vec<PlanarVec>,
    /// `integral of |m| dt` over the sampled window, a bound on the total
    /// heading drift `|Theta(t) - Theta_0|`.
    pub total_abs_m: f64,
}

/// Rebuild physical trajectories from sampled frame states.
///
/// The heading is `Theta(t) = Theta_0 + integral of m`, and the center of
/// mass is `c_0 + integral of V`; both integrals use the sample grid with a
/// fourth-order composite rule so no second error scale is introduced.
pub fn reconstruct_flow(
    times: &[f64],
    states: &[FrameState],
    theta0: f64,
    c0: PlanarVec,
) -> Result<ReconstructedFlow, ModelError> {
    assert_eq!(times.len(), states.len());
    for i in 1..times.len() {
        if times[i] <= times[i - 1] {
            return Err(ModelError::NonMonotoneTimes(i));
        }
    }
    let mut m_series = Vec::with_capacity(times.len());
    let mut speed_series = Vec::with_capacity(times.len());
    for fs in states {
        let (speed, m, _s) = frame_mean_field(fs)?;
        m_series.push(m);
        speed_series.push(speed);
    }
    let theta: Vec<f64> = crate::numerics::cumulative_integral(times, &m_series)
        .into_iter()
        .map(|i| theta0 + i)
        .collect();
    let abs_m: Vec<f64> = m_series.iter().map(|m| m.abs()).collect();
    let total_abs_m = *crate::numerics::cumulative_integral(times, &abs_m)
        .last()
        .unwrap();
    let vx: Vec<f64> = speed_series
        .iter()
        .zip(&theta)
        .map(|(&sp, &th)| sp * th.cos())
        .collect();
    let vy: Vec<f64> = speed_series
        .iter()
        .zip(&theta)
        .map(|(&sp, &th)| sp * th.sin())
        .collect();
    let rx = crate::numerics::cumulative_integral(times, &vx);
    let ry = crate::numerics::cumulative_integral(times, &vy);
    let centers: Vec<PlanarVec> = rx
        .iter()
        .zip(&ry)
        .map(|(&x, &y)| c0 + PlanarVec::new(x, y))
        .collect();
    let states = states
        .iter()
        .zip(theta.iter().zip(&centers))
        .map(|(fs, (&th, &center))| frame_to_swarm(fs, th, center))
        .collect();
    Ok(ReconstructedFlow { states, theta, centers, total_abs_m })
}

/// Exact helix solution of the spatial model.
///
/// All agents move with unit speed on helices around the vertical axis; the
/// configuration stays at constant distance from the center of mass for all
/// times, so it never relaxes to a translating state.
#[derive(Debug, Clone)]
pub struct HelixTrajectory {
    pub epsilon: f64,
    pub thetas: Vec<f64>,
}

/// Build the helix solution. Requires `sum exp(i theta_k) = 0` (so the center
/// of mass stays on the axis) and `0 < epsilon < 1`.
pub fn helix_exact(epsilon: f64, thetas: &[f64]) -> Result<HelixTrajectory, ModelError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(ModelError::PitchOutOfRange(epsilon));
    }
    let (sx, sy) = thetas
        .iter()
        .fold((0.0, 0.0), |(sx, sy), th| (sx + th.cos(), sy + th.sin()));
    let defect = (sx * sx + sy * sy).sqrt();
    if defect > 1e-9 * thetas.len() as f64 {
        return Err(ModelError::AngleSumNonzero(defect));
    }
    Ok(HelixTrajectory { epsilon, thetas: thetas.to_vec() })
}

impl HelixTrajectory {
    pub fn n(&self) -> usize {
        self.thetas.len()
    }

    pub fn state_at(&self, t: f64) -> SwarmState3D {
        let e = self.epsilon;
        let vz = (1.0 - e * e).sqrt();
        let positions = self
            .thetas
            .iter()
            .map(|&th| [e * (t + th).cos(), e * (t + th).sin(), t * vz])
            .collect();
        let velocities = self
            .thetas
            .iter()
            .map(|&th| [-e * (t + th).sin(), e * (t + th).cos(), vz])
            .collect();
        SwarmState3D { t, positions, velocities }
    }

    /// Exact second derivative of the helix positions at time `t`.
    pub fn accel_at(&self, t: f64) -> Vec<[f64; 3]> {
        let e = self.epsilon;
        self.thetas
            .iter()
            .map(|&th| [-e * (t + th).cos(), -e * (t + th).sin(), 0.0])
            .collect()
    }
}
