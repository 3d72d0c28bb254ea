//! Screw-theory kinematics and dynamics for open-chain robots.
//!
//! Everything is built on unit joint twists expressed in a single stationary
//! frame `{S}` at the home configuration `q = 0`. Forward kinematics is the
//! product of exponentials, the spatial and body Jacobians follow from the
//! adjoint map, and the mass matrix is assembled from body Jacobians and
//! generalized inertias. A modified Denavit-Hartenberg pipeline is included
//! as an independent reference implementation.
//!
//! The crate is `no_std` (it needs `alloc`); enable the default `std` feature
//! to get `std::error::Error` and faster `std` math.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod dh;
pub mod dynamics;
mod error;
pub mod kinematics;
pub mod model;
pub mod robots;
pub mod se3;
pub mod sim;

pub use error::{Error, Result};
pub use kinematics::{Jacobian, JacobianKind, Point, SpatialVelocity};
pub use model::{BodySpec, JointKind, JointSpec, JointState, RobotModel};
pub use se3::{Transform, Twist};

/// Tolerance on the norm of a unit axis.
pub const AXIS_TOLERANCE: f64 = 1e-9;
