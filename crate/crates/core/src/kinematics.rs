//! Product-of-exponentials forward kinematics and the spatial, body and
//! hybrid Jacobians, for any body and any point on a body.

use alloc::vec::Vec;

use nalgebra::{DVector, Matrix6xX, Vector3};

use crate::model::RobotModel;
use crate::se3::{exp_unit_twist, Transform, Twist};
use crate::Result;

/// A material point on the robot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    /// Origin of `{ee}`, carried by the last body.
    EndEffector,
    /// A point on body `body` (1-based), displaced by `offset` from the body
    /// frame origin. The offset is expressed in the body's home orientation.
    OnBody { body: usize, offset: Vector3<f64> },
}

impl Point {
    /// The origin of body frame `{C_body}`.
    pub fn com(body: usize) -> Self {
        Point::OnBody {
            body,
            offset: Vector3::zeros(),
        }
    }

    /// Resolves `(body_id, offset)` query arguments: the end-effector is
    /// selected when `body_id` is absent or equal to `dof` and the offset is
    /// zero.
    pub fn from_query(dof: usize, body: Option<usize>, offset: Vector3<f64>) -> Self {
        let body = body.unwrap_or(dof);
        if body == dof && offset == Vector3::zeros() {
            Point::EndEffector
        } else {
            Point::OnBody { body, offset }
        }
    }

    fn resolve(&self, model: &RobotModel) -> Result<(usize, Transform)> {
        match *self {
            Point::EndEffector => Ok((model.dof(), model.ee_home)),
            Point::OnBody { body, offset } => {
                let home = model.com_home(body)?;
                Ok((body, *home * Transform::from_translation(offset)))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JacobianKind {
    Spatial,
    Body,
    Hybrid,
}

/// A 6 x n Jacobian tagged with what it maps joint rates to.
#[derive(Debug, Clone, PartialEq)]
pub struct Jacobian {
    pub matrix: Matrix6xX<f64>,
    pub kind: JacobianKind,
    /// 1-based body the Jacobian refers to.
    pub body: usize,
    pub offset: Vector3<f64>,
}

impl Jacobian {
    pub fn column(&self, i: usize) -> Twist {
        let c = self.matrix.column(i);
        Twist::new(Vector3::new(c[0], c[1], c[2]), Vector3::new(c[3], c[4], c[5]))
    }

    pub fn dof(&self) -> usize {
        self.matrix.ncols()
    }

    fn set_column(&mut self, i: usize, twist: &Twist) {
        let mut c = self.matrix.column_mut(i);
        c.fixed_rows_mut::<3>(0).copy_from(&twist.linear);
        c.fixed_rows_mut::<3>(3).copy_from(&twist.angular);
    }
}

/// Linear velocity of a material point and angular velocity of its body,
/// both in `{S}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialVelocity {
    pub linear: Vector3<f64>,
    pub angular: Vector3<f64>,
}

/// `exp([eta_i] q_i)` for the first `count` joints.
pub(crate) fn joint_exponentials(model: &RobotModel, q: &DVector<f64>, count: usize) -> Vec<Transform> {
    model
        .twists
        .iter()
        .zip(model.joints.iter())
        .zip(q.iter())
        .take(count)
        .map(|((eta, joint), &qi)| exp_unit_twist(eta, joint.kind.into(), qi))
        .collect()
}

/// Spatial Jacobian columns `Ad_{H_{i-1}} eta_i` for the first `count`
/// joints, plus the product `exp([eta_1] q_1) ... exp([eta_count] q_count)`.
pub(crate) fn spatial_columns(model: &RobotModel, q: &DVector<f64>, count: usize) -> (Vec<Twist>, Transform) {
    let mut prefix = Transform::identity();
    let mut columns = Vec::with_capacity(count);
    for ((eta, joint), &qi) in model.twists.iter().zip(&model.joints).zip(q.iter()).take(count) {
        columns.push(prefix.act(eta));
        prefix = prefix * exp_unit_twist(eta, joint.kind.into(), qi);
    }
    (columns, prefix)
}

/// `H = exp([eta_1] q_1) ... exp([eta_b] q_b) H_home` for the queried point.
pub fn forward_kinematics(model: &RobotModel, q: &DVector<f64>, point: Point) -> Result<Transform> {
    model.check_q(q)?;
    let (body, home) = point.resolve(model)?;
    let prefix = model
        .twists
        .iter()
        .zip(&model.joints)
        .zip(q.iter())
        .take(body)
        .fold(Transform::identity(), |h, ((eta, joint), &qi)| {
            h * exp_unit_twist(eta, joint.kind.into(), qi)
        });
    Ok(prefix * home)
}

pub fn spatial_jacobian(model: &RobotModel, q: &DVector<f64>) -> Result<Jacobian> {
    model.check_q(q)?;
    let n = model.dof();
    let (columns, _) = spatial_columns(model, q, n);
    let mut jac = Jacobian {
        matrix: Matrix6xX::zeros(n),
        kind: JacobianKind::Spatial,
        body: n,
        offset: Vector3::zeros(),
    };
    for (i, c) in columns.iter().enumerate() {
        jac.set_column(i, c);
    }
    Ok(jac)
}

/// Body Jacobian of `{C_body}`. Column `i <= body` is
/// `Ad^{-1}_{iH_j H_B0} eta_i` with `iH_j = exp([eta_{i+1}] q_{i+1}) ... exp([eta_j] q_j)`;
/// later columns are zero.
pub fn body_jacobian(model: &RobotModel, q: &DVector<f64>, body: usize) -> Result<Jacobian> {
    model.check_q(q)?;
    model.check_body(body)?;
    let exps = joint_exponentials(model, q, body);
    let mut jac = Jacobian {
        matrix: Matrix6xX::zeros(model.dof()),
        kind: JacobianKind::Body,
        body,
        offset: Vector3::zeros(),
    };
    for (i, c) in body_columns(model, &exps, body).iter().enumerate() {
        jac.set_column(i, c);
    }
    Ok(jac)
}

/// Nonzero body Jacobian columns of `{C_body}`, given the joint exponentials
/// of at least the first `body` joints.
pub(crate) fn body_columns(model: &RobotModel, exps: &[Transform], body: usize) -> Vec<Twist> {
    let mut columns = alloc::vec![Twist::zero(); body];
    let mut suffix = model.bodies[body - 1].com_home;
    for i in (0..body).rev() {
        columns[i] = suffix.act_inverse(&model.twists[i]);
        suffix = exps[i] * suffix;
    }
    columns
}

/// Hybrid Jacobian `[[I, -[p]], [0, I]] S_J` at the queried point `p`, with
/// spatial columns beyond the point's body zeroed first.
pub fn hybrid_jacobian(model: &RobotModel, q: &DVector<f64>, point: Point) -> Result<Jacobian> {
    model.check_q(q)?;
    let (body, home) = point.resolve(model)?;
    let (columns, prefix) = spatial_columns(model, q, body);
    let p = prefix.transform_point(&home.translation);
    let offset = match point {
        Point::EndEffector => Vector3::zeros(),
        Point::OnBody { offset, .. } => offset,
    };
    let mut jac = Jacobian {
        matrix: Matrix6xX::zeros(model.dof()),
        kind: JacobianKind::Hybrid,
        body,
        offset,
    };
    for (i, c) in columns.iter().enumerate() {
        let col = Twist::new(c.linear - p.cross(&c.angular), c.angular);
        jac.set_column(i, &col);
    }
    Ok(jac)
}

/// `V = J qdot`, split into linear and angular parts.
pub fn spatial_velocity(jacobian: &Jacobian, qdot: &DVector<f64>) -> Result<SpatialVelocity> {
    crate::Error::check_len("qdot", jacobian.dof(), qdot.len())?;
    let v = &jacobian.matrix * qdot;
    Ok(SpatialVelocity {
        linear: Vector3::new(v[0], v[1], v[2]),
        angular: Vector3::new(v[3], v[4], v[5]),
    })
}
