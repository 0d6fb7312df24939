//! Numerical laboratory for a planar swarm of self-propelled agents with
//! all-to-all quadratic attraction.
//!
//! The crate is organized around successive reductions of the same dynamics:
//!
//! * [`model`] — the physical second-order system, its velocity-acceleration
//!   and relative-coordinate reformulations, and the moving frame attached to
//!   the mean velocity.
//! * [`manifold`] — exact rational Jacobians and characteristic polynomials
//!   of the reduced systems, plus the quadratic map of the central manifold.
//! * [`reduced`] — the flow on the central manifold in Cartesian and polar
//!   form, periodic coefficients, influence weights and Lyapunov functions,
//!   and the generic non-autonomous cubic system they instantiate.
//! * [`integrate`] — deterministic fixed-step and embedded adaptive
//!   Runge-Kutta integration with stride sampling.
//! * [`analysis`] — scenario generators, power-law decay fits, heading and
//!   speed-gap accounting, and structural verifiers.

pub mod analysis;
pub mod integrate;
pub mod manifold;
pub mod model;
pub mod numerics;
pub mod reduced;
