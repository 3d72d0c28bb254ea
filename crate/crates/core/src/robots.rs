//! Built-in robots: a planar snake of identical bars, a cart-pole and a
//! Franka-style 7-DOF arm.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{Matrix3, Vector3};

use crate::model::{BodySpec, JointSpec, RobotModel, GRAVITY_3D, GRAVITY_PLANAR};
use crate::se3::Transform;
use crate::{Error, Result};

fn positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive, got {value}"
        )))
    }
}

/// Slender rod along x: zero axial moment, `m l^2 / 12` transverse.
fn rod_along_x(length: f64, mass: f64) -> Matrix3<f64> {
    let t = mass * length * length / 12.0;
    Matrix3::from_diagonal(&Vector3::new(0.0, t, t))
}

/// `n` identical uniform bars of length `l` and mass `m_each`, jointed about
/// z and stretched along x at home. Swings in the x-y plane.
pub fn make_snake(n: usize, l: f64, m_each: f64) -> Result<RobotModel> {
    if n == 0 {
        return Err(Error::InvalidParameter("snake needs at least one link".into()));
    }
    positive("link length", l)?;
    positive("link mass", m_each)?;
    let joints = (0..n)
        .map(|i| JointSpec::revolute(Vector3::z(), Vector3::new(i as f64 * l, 0.0, 0.0)))
        .collect();
    let bodies = (0..n)
        .map(|i| {
            BodySpec::new(
                m_each,
                Vector3::new(i as f64 * l + l / 2.0, 0.0, 0.0),
                rod_along_x(l, m_each),
            )
        })
        .collect();
    RobotModel::new(
        format!("snake{n}"),
        joints,
        bodies,
        Transform::from_translation(Vector3::new(n as f64 * l, 0.0, 0.0)),
        GRAVITY_PLANAR,
    )
}

/// Cart sliding along x carrying a pole hinged about z at the cart origin.
/// At `q = 0` the pole points up (+y); the end-effector is the pole tip.
pub fn make_cartpole(m_cart: f64, m_pole: f64, l: f64) -> Result<RobotModel> {
    positive("cart mass", m_cart)?;
    positive("pole mass", m_pole)?;
    positive("pole length", l)?;
    let t = m_pole * l * l / 12.0;
    let joints = alloc::vec![
        JointSpec::prismatic(Vector3::x()),
        JointSpec::revolute(Vector3::z(), Vector3::zeros()),
    ];
    let bodies = alloc::vec![
        BodySpec::new(m_cart, Vector3::zeros(), Matrix3::identity() * (0.1 * m_cart)),
        BodySpec::new(
            m_pole,
            Vector3::new(0.0, l / 2.0, 0.0),
            Matrix3::from_diagonal(&Vector3::new(t, 0.0, t)),
        ),
    ];
    RobotModel::new(
        "cartpole",
        joints,
        bodies,
        Transform::from_translation(Vector3::new(0.0, l, 0.0)),
        GRAVITY_PLANAR,
    )
}

/// Joint axes and axis points of the Franka arm at `q = 0` (manufacturer
/// kinematics), with `{S}` at the base and `{ee}` at the flange-side wrist
/// centre.
pub const FRANKA_JOINTS: [([f64; 3], [f64; 3]); 7] = [
    ([0.0, 0.0, 1.0], [0.0, 0.0, 0.333]),
    ([0.0, 1.0, 0.0], [0.0, 0.0, 0.333]),
    ([0.0, 0.0, 1.0], [0.0, 0.0, 0.649]),
    ([0.0, -1.0, 0.0], [0.0825, 0.0, 0.649]),
    ([0.0, 0.0, 1.0], [0.0, 0.0, 1.033]),
    ([0.0, -1.0, 0.0], [0.0, 0.0, 1.033]),
    ([0.0, 0.0, -1.0], [0.088, 0.0, 1.033]),
];

pub const FRANKA_EE_HOME: [f64; 3] = [0.088, 0.0, 1.033];

/// Placeholder inertial data: (mass, COM in `{S}` at home, principal moments).
/// Plausible magnitudes only; not identified parameters.
pub const FRANKA_BODIES: [(f64, [f64; 3], [f64; 3]); 7] = [
    (4.97, [0.0, -0.03, 0.28], [0.70, 0.70, 0.009]),
    (0.65, [0.0, 0.03, 0.40], [0.007, 0.028, 0.025]),
    (3.23, [0.04, 0.0, 0.60], [0.037, 0.036, 0.011]),
    (3.59, [0.04, 0.03, 0.70], [0.026, 0.019, 0.029]),
    (1.23, [0.0, 0.04, 0.85], [0.036, 0.029, 0.009]),
    (1.67, [0.05, 0.0, 1.03], [0.002, 0.004, 0.005]),
    (0.74, [0.088, 0.0, 0.98], [0.013, 0.012, 0.004]),
];

pub fn make_franka() -> RobotModel {
    let joints = FRANKA_JOINTS
        .iter()
        .map(|(axis, origin)| JointSpec::revolute(Vector3::from(*axis), Vector3::from(*origin)))
        .collect::<Vec<_>>();
    let bodies = FRANKA_BODIES
        .iter()
        .map(|(mass, com, moments)| {
            BodySpec::new(
                *mass,
                Vector3::from(*com),
                Matrix3::from_diagonal(&Vector3::from(*moments)),
            )
        })
        .collect::<Vec<_>>();
    RobotModel::new(
        "franka",
        joints,
        bodies,
        Transform::from_translation(Vector3::from(FRANKA_EE_HOME)),
        GRAVITY_3D,
    )
    .expect("built-in Franka parameters are valid")
}
