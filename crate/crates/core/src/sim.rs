//! Fixed-step forward-dynamics simulation and a task-space impedance law.
//!
//! The controller runs once per step at the start-of-step state and its
//! torque is held over the step (zero-order hold).

use alloc::vec::Vec;
use core::f64::consts::TAU;

#[cfg(not(feature = "std"))]
use nalgebra::ComplexField;
use nalgebra::{DVector, Matrix3, Vector3};

use crate::dynamics::{forward_dynamics, gravity_vector};
use crate::kinematics::{forward_kinematics, hybrid_jacobian, Point};
use crate::model::RobotModel;
use crate::se3::Transform;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    #[default]
    Rk4,
    SemiImplicitEuler,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub duration: f64,
    pub integrator: Integrator,
    pub record_stride: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            duration: 10.0,
            integrator: Integrator::Rk4,
            record_stride: 1,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter("dt must be positive".into()));
        }
        if !(self.duration.is_finite() && self.duration >= self.dt) {
            return Err(Error::InvalidParameter("duration must be at least dt".into()));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidParameter("record stride must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of integration steps, `round(duration / dt)`.
    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub q: DVector<f64>,
    pub qdot: DVector<f64>,
    /// Torque applied over the step starting at `t`.
    pub tau: DVector<f64>,
    pub ee: Transform,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub dof: usize,
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }
}

/// Point on a circle in the plane spanned by the orthonormal pair `(u, v)`.
pub fn circular_target_in_plane(
    center: &Vector3<f64>,
    radius: f64,
    period: f64,
    t: f64,
    u: &Vector3<f64>,
    v: &Vector3<f64>,
) -> Result<Vector3<f64>> {
    if !(period.is_finite() && period > 0.0) {
        return Err(Error::InvalidParameter("period must be positive".into()));
    }
    if radius.is_nan() || radius < 0.0 {
        return Err(Error::InvalidParameter("radius must be non-negative".into()));
    }
    let (s, c) = (TAU * t / period).sin_cos();
    Ok(center + radius * (c * u + s * v))
}

/// Circle in the x-y plane.
pub fn circular_target(center: &Vector3<f64>, radius: f64, period: f64, t: f64) -> Result<Vector3<f64>> {
    circular_target_in_plane(center, radius, period, t, &Vector3::x(), &Vector3::y())
}

/// Position goal with its own stiffness and damping, for a secondary point
/// such as an elbow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointTask {
    pub point: Point,
    pub target: Vector3<f64>,
    pub stiffness: Matrix3<f64>,
    pub damping: Matrix3<f64>,
}

/// `J_v^T (K (x* - x) - B J_v qdot)` at `point`.
fn task_torque(
    model: &RobotModel,
    q: &DVector<f64>,
    qdot: &DVector<f64>,
    task: &PointTask,
) -> Result<DVector<f64>> {
    let x = forward_kinematics(model, q, task.point)?.translation;
    let jv = hybrid_jacobian(model, q, task.point)?
        .matrix
        .rows(0, 3)
        .into_owned();
    let xdot: Vector3<f64> = (&jv * qdot).fixed_rows::<3>(0).into_owned();
    let force = task.stiffness * (task.target - x) - task.damping * xdot;
    Ok(jv.transpose() * force)
}

/// End-effector impedance with gravity compensation:
/// `tau = J_v^T (K (x* - x) - B xdot) + G(q)`, plus the same law for the
/// optional elbow task. `K` and `B` are expected symmetric positive
/// semidefinite.
pub fn impedance_torque(
    model: &RobotModel,
    q: &DVector<f64>,
    qdot: &DVector<f64>,
    target: &Vector3<f64>,
    stiffness: &Matrix3<f64>,
    damping: &Matrix3<f64>,
    elbow: Option<&PointTask>,
) -> Result<DVector<f64>> {
    model.check_q(q)?;
    model.check_qdot(qdot)?;
    let ee = PointTask {
        point: Point::EndEffector,
        target: *target,
        stiffness: *stiffness,
        damping: *damping,
    };
    let mut tau = task_torque(model, q, qdot, &ee)? + gravity_vector(model, q)?;
    if let Some(task) = elbow {
        tau += task_torque(model, q, qdot, task)?;
    }
    Ok(tau)
}

fn step(
    model: &RobotModel,
    integrator: Integrator,
    dt: f64,
    q: &DVector<f64>,
    qdot: &DVector<f64>,
    tau: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let accel = |q: &DVector<f64>, qd: &DVector<f64>| forward_dynamics(model, q, qd, tau);
    match integrator {
        Integrator::SemiImplicitEuler => {
            let qd = qdot + accel(q, qdot)? * dt;
            let qn = q + &qd * dt;
            Ok((qn, qd))
        }
        Integrator::Rk4 => {
            let h2 = 0.5 * dt;
            let a1 = accel(q, qdot)?;
            let (q2, v2) = (q + qdot * h2, qdot + &a1 * h2);
            let a2 = accel(&q2, &v2)?;
            let (q3, v3) = (q + &v2 * h2, qdot + &a2 * h2);
            let a3 = accel(&q3, &v3)?;
            let (q4, v4) = (q + &v3 * dt, qdot + &a3 * dt);
            let a4 = accel(&q4, &v4)?;
            let sixth = dt / 6.0;
            let qn = q + (qdot + &v2 * 2.0 + &v3 * 2.0 + &v4) * sixth;
            let qd = qdot + (a1 + a2 * 2.0 + a3 * 2.0 + a4) * sixth;
            Ok((qn, qd))
        }
    }
}

/// Integrates `qddot = forward_dynamics(q, qdot, controller(t, q, qdot))`
/// from `t = 0` for `config.steps()` steps. Samples are taken at every
/// `record_stride`-th step and at the final step.
pub fn simulate<C>(
    model: &RobotModel,
    mut controller: C,
    q0: &DVector<f64>,
    qdot0: &DVector<f64>,
    config: &SimConfig,
) -> Result<Trajectory>
where
    C: FnMut(f64, &DVector<f64>, &DVector<f64>) -> Result<DVector<f64>>,
{
    config.validate()?;
    model.check_q(q0)?;
    model.check_qdot(qdot0)?;
    let n = model.dof();
    let steps = config.steps();
    let mut traj = Trajectory {
        dof: n,
        samples: Vec::with_capacity(steps / config.record_stride + 2),
    };
    let mut q = q0.clone();
    let mut qdot = qdot0.clone();
    for k in 0..=steps {
        let t = k as f64 * config.dt;
        let tau = controller(t, &q, &qdot)?;
        Error::check_len("tau", n, tau.len())?;
        if k % config.record_stride == 0 || k == steps {
            traj.samples.push(Sample {
                t,
                q: q.clone(),
                qdot: qdot.clone(),
                tau: tau.clone(),
                ee: forward_kinematics(model, &q, Point::EndEffector)?,
            });
        }
        if k == steps {
            break;
        }
        let (qn, qd) = step(model, config.integrator, config.dt, &q, &qdot, &tau)?;
        if !(qn.iter().all(|x| x.is_finite()) && qd.iter().all(|x| x.is_finite())) {
            return Err(Error::NonFiniteState { step: k + 1 });
        }
        q = qn;
        qdot = qd;
    }
    Ok(traj)
}

/// Controller that applies zero torque.
pub fn passive(n: usize) -> impl FnMut(f64, &DVector<f64>, &DVector<f64>) -> Result<DVector<f64>> {
    move |_, _, _| Ok(DVector::zeros(n))
}
