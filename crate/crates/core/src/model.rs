//! Robot description: joints and their unit twists at the home configuration,
//! body inertial data, and the home pose of the end-effector.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{DVector, Matrix3, Matrix6, SymmetricEigen, Vector3};

use crate::se3::{is_rotation, Transform, Twist, UnitTwistKind};
use crate::{Error, Result, AXIS_TOLERANCE};

const INERTIA_TOLERANCE: f64 = 1e-9;

/// Standard gravity for spatial robots, m/s^2.
pub const GRAVITY_3D: Vector3<f64> = Vector3::new(0.0, 0.0, -9.81);
/// Standard gravity for planar robots moving in the x-y plane, m/s^2.
pub const GRAVITY_PLANAR: Vector3<f64> = Vector3::new(0.0, -9.81, 0.0);

/// 6x6 block-diagonal body inertia `diag(m I3, I)`.
pub type GeneralizedInertia = Matrix6<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum JointKind {
    Revolute,
    Prismatic,
}

impl From<JointKind> for UnitTwistKind {
    fn from(kind: JointKind) -> Self {
        match kind {
            JointKind::Revolute => UnitTwistKind::Revolute,
            JointKind::Prismatic => UnitTwistKind::Prismatic,
        }
    }
}

/// A joint at the home configuration, expressed in `{S}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointSpec {
    pub kind: JointKind,
    /// Unit axis of rotation or translation.
    pub axis: Vector3<f64>,
    /// Any point on the joint axis. Ignored for prismatic joints.
    pub origin: Vector3<f64>,
}

impl JointSpec {
    pub fn revolute(axis: Vector3<f64>, origin: Vector3<f64>) -> Self {
        Self {
            kind: JointKind::Revolute,
            axis,
            origin,
        }
    }

    pub fn prismatic(axis: Vector3<f64>) -> Self {
        Self {
            kind: JointKind::Prismatic,
            axis,
            origin: Vector3::zeros(),
        }
    }

    pub fn twist(&self) -> Result<Twist> {
        match self.kind {
            JointKind::Revolute => make_revolute_twist(&self.axis, &self.origin),
            JointKind::Prismatic => make_prismatic_twist(&self.axis),
        }
    }
}

/// Inertial data of one body.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodySpec {
    /// kg
    pub mass: f64,
    /// Pose of the body frame `{C_i}` in `{S}` at the home configuration.
    pub com_home: Transform,
    /// Rotational inertia about the COM, expressed in `{C_i}`, kg m^2.
    pub inertia: Matrix3<f64>,
}

impl BodySpec {
    pub fn new(mass: f64, com: Vector3<f64>, inertia: Matrix3<f64>) -> Self {
        Self {
            mass,
            com_home: Transform::from_translation(com),
            inertia,
        }
    }

    fn validate(&self, index: usize) -> Result<()> {
        let field = |name: &str| format!("bodies[{index}].{name}");
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return Err(Error::validation(
                field("mass"),
                format!("mass must be positive, got {}", self.mass),
            ));
        }
        if !self.com_home.translation.iter().all(|x| x.is_finite()) {
            return Err(Error::validation(field("com"), "non-finite position"));
        }
        if !is_rotation(&self.com_home.rotation, AXIS_TOLERANCE) {
            return Err(Error::validation(
                field("com_rotation"),
                "not a proper rotation matrix",
            ));
        }
        validate_inertia(&self.inertia).map_err(|m| Error::validation(field("inertia"), m))
    }
}

fn validate_inertia(inertia: &Matrix3<f64>) -> core::result::Result<(), String> {
    if !inertia.iter().all(|x| x.is_finite()) {
        return Err("non-finite entry".into());
    }
    let scale = inertia.amax().max(1.0);
    let asym = (inertia - inertia.transpose()).amax();
    if asym > INERTIA_TOLERANCE * scale {
        return Err(format!(
            "inertia tensor is not symmetric (max |I - I^T| = {asym:e})"
        ));
    }
    let principal = SymmetricEigen::new(*inertia).eigenvalues;
    let tol = INERTIA_TOLERANCE * scale;
    if principal.iter().any(|&l| l < -tol) {
        return Err("inertia tensor is not positive semidefinite".into());
    }
    for i in 0..3 {
        let (a, b, c) = (principal[i], principal[(i + 1) % 3], principal[(i + 2) % 3]);
        if a + b < c - tol {
            return Err("principal moments violate the triangle inequality".into());
        }
    }
    Ok(())
}

pub fn generalized_inertia(body: &BodySpec) -> GeneralizedInertia {
    let mut m = Matrix6::zeros();
    m.fixed_view_mut::<3, 3>(0, 0)
        .copy_from(&(Matrix3::identity() * body.mass));
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(&body.inertia);
    m
}

/// `(-w x p, w)` for a unit axis `w` through the point `p`.
pub fn make_revolute_twist(axis: &Vector3<f64>, point: &Vector3<f64>) -> Result<Twist> {
    check_axis(axis)?;
    Ok(Twist::new(-axis.cross(point), *axis))
}

/// `(v, 0)` for a unit translation axis `v`.
pub fn make_prismatic_twist(axis: &Vector3<f64>) -> Result<Twist> {
    check_axis(axis)?;
    Ok(Twist::new(*axis, Vector3::zeros()))
}

fn check_axis(axis: &Vector3<f64>) -> Result<()> {
    let norm = axis.norm();
    if (norm - 1.0).abs() <= AXIS_TOLERANCE {
        Ok(())
    } else {
        Err(Error::InvalidAxis { norm })
    }
}

/// An open-chain robot. Immutable once built; joint twists are computed at
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotModel {
    pub(crate) name: String,
    pub(crate) joints: Vec<JointSpec>,
    pub(crate) bodies: Vec<BodySpec>,
    pub(crate) twists: Vec<Twist>,
    pub(crate) ee_home: Transform,
    pub(crate) gravity: Vector3<f64>,
}

impl RobotModel {
    /// Validates every joint and body and caches the joint twists.
    pub fn new(
        name: impl Into<String>,
        joints: Vec<JointSpec>,
        bodies: Vec<BodySpec>,
        ee_home: Transform,
        gravity: Vector3<f64>,
    ) -> Result<Self> {
        if joints.len() != bodies.len() {
            return Err(Error::validation(
                "bodies",
                format!(
                    "expected one body per joint ({} joints, {} bodies)",
                    joints.len(),
                    bodies.len()
                ),
            ));
        }
        let mut twists = Vec::with_capacity(joints.len());
        for (i, joint) in joints.iter().enumerate() {
            if !joint.origin.iter().all(|x| x.is_finite()) {
                return Err(Error::validation(
                    format!("joints[{i}].origin"),
                    "non-finite position",
                ));
            }
            let twist = joint.twist().map_err(|e| match e {
                Error::InvalidAxis { norm } => Error::validation(
                    format!("joints[{i}].axis"),
                    format!("axis must be a unit vector, norm is {norm}"),
                ),
                other => other,
            })?;
            twists.push(twist);
        }
        for (i, body) in bodies.iter().enumerate() {
            body.validate(i)?;
        }
        if !ee_home.translation.iter().all(|x| x.is_finite()) {
            return Err(Error::validation("ee_home.position", "non-finite position"));
        }
        if !is_rotation(&ee_home.rotation, AXIS_TOLERANCE) {
            return Err(Error::validation(
                "ee_home.rotation",
                "not a proper rotation matrix",
            ));
        }
        if !gravity.iter().all(|x| x.is_finite()) {
            return Err(Error::validation("gravity", "non-finite entry"));
        }
        Ok(Self {
            name: name.into(),
            joints,
            bodies,
            twists,
            ee_home,
            gravity,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn joints(&self) -> &[JointSpec] {
        &self.joints
    }

    pub fn bodies(&self) -> &[BodySpec] {
        &self.bodies
    }

    /// Unit joint twists in `{S}` at the home configuration.
    pub fn joint_twists(&self) -> &[Twist] {
        &self.twists
    }

    pub fn joint_kinds(&self) -> impl Iterator<Item = JointKind> + '_ {
        self.joints.iter().map(|j| j.kind)
    }

    pub fn ee_home(&self) -> &Transform {
        &self.ee_home
    }

    pub fn gravity(&self) -> &Vector3<f64> {
        &self.gravity
    }

    /// Home pose of body `body` (1-based).
    pub fn com_home(&self, body: usize) -> Result<&Transform> {
        self.check_body(body)?;
        Ok(&self.bodies[body - 1].com_home)
    }

    pub fn with_gravity(mut self, gravity: Vector3<f64>) -> Self {
        self.gravity = gravity;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub(crate) fn check_body(&self, body: usize) -> Result<()> {
        if body == 0 || body > self.dof() {
            Err(Error::BodyOutOfRange {
                body,
                dof: self.dof(),
            })
        } else {
            Ok(())
        }
    }

    pub(crate) fn check_q(&self, q: &DVector<f64>) -> Result<()> {
        Error::check_len("q", self.dof(), q.len())
    }

    pub(crate) fn check_qdot(&self, qdot: &DVector<f64>) -> Result<()> {
        Error::check_len("qdot", self.dof(), qdot.len())
    }
}

/// Serially mounts `appendage` on the end-effector of `base`. `mount` is the
/// pose of the appendage's `{S}` relative to the base `{ee}` at home.
pub fn attach_serial(base: &RobotModel, appendage: &RobotModel, mount: &Transform) -> RobotModel {
    let h = base.ee_home * *mount;
    let mut joints = base.joints.clone();
    let mut bodies = base.bodies.clone();
    let mut twists = base.twists.clone();
    for joint in &appendage.joints {
        let moved = JointSpec {
            kind: joint.kind,
            axis: h.rotation * joint.axis,
            origin: h.transform_point(&joint.origin),
        };
        joints.push(moved);
        twists.push(h.act(&joint.twist().expect("validated joint")));
    }
    for body in &appendage.bodies {
        bodies.push(BodySpec {
            com_home: h * body.com_home,
            ..*body
        });
    }
    RobotModel {
        name: format!("{}+{}", base.name, appendage.name),
        joints,
        bodies,
        twists,
        ee_home: h * appendage.ee_home,
        gravity: base.gravity,
    }
}

/// Joint positions and rates for one model.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    pub q: DVector<f64>,
    pub qdot: DVector<f64>,
}

impl JointState {
    pub fn new(model: &RobotModel, q: DVector<f64>, qdot: DVector<f64>) -> Result<Self> {
        model.check_q(&q)?;
        model.check_qdot(&qdot)?;
        Ok(Self { q, qdot })
    }

    pub fn rest(model: &RobotModel) -> Self {
        Self {
            q: DVector::zeros(model.dof()),
            qdot: DVector::zeros(model.dof()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::forward_kinematics;
    use crate::robots::{make_cartpole, make_snake};
    use crate::se3::exp_twist;
    use crate::Point;
    use proptest::prelude::*;

    fn rod_inertia_about_center(length: f64, mass: f64) -> f64 {
        // Composite Simpson quadrature of the integral of x^2 dm over the bar.
        let steps = 1000;
        let h = length / steps as f64;
        let density = mass / length;
        let f = |x: f64| x * x * density;
        let mut sum = f(-length / 2.0) + f(length / 2.0);
        for k in 1..steps {
            let x = -length / 2.0 + k as f64 * h;
            sum += if k % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        sum * h / 3.0
    }

    #[test]
    fn revolute_twist_examples() {
        let t = make_revolute_twist(&Vector3::z(), &Vector3::new(0.0, 0.0, 5.0)).unwrap();
        assert_eq!(t, Twist::new(Vector3::zeros(), Vector3::z()));
        let t = make_revolute_twist(&Vector3::z(), &Vector3::x()).unwrap();
        assert_eq!(t, Twist::new(Vector3::new(0.0, -1.0, 0.0), Vector3::z()));
        let shifted = make_revolute_twist(&Vector3::z(), &Vector3::new(1.0, 0.0, 7.0)).unwrap();
        assert_eq!(t, shifted);
        assert!(matches!(
            make_revolute_twist(&Vector3::new(0.0, 0.0, 1.1), &Vector3::zeros()),
            Err(Error::InvalidAxis { .. })
        ));
    }

    #[test]
    fn prismatic_twist_examples() {
        let t = make_prismatic_twist(&Vector3::x()).unwrap();
        assert_eq!(t, Twist::new(Vector3::x(), Vector3::zeros()));
        assert_eq!(
            make_prismatic_twist(&Vector3::z()).unwrap(),
            Twist::new(Vector3::z(), Vector3::zeros())
        );
        assert_eq!(
            exp_twist(&t, 3.0).unwrap().translation,
            Vector3::new(3.0, 0.0, 0.0)
        );
        assert!(make_prismatic_twist(&Vector3::zeros()).is_err());
    }

    #[test]
    fn generalized_inertia_examples() {
        let unit = BodySpec::new(1.0, Vector3::zeros(), Matrix3::identity());
        assert_eq!(generalized_inertia(&unit), Matrix6::identity());

        let body = BodySpec::new(
            2.0,
            Vector3::zeros(),
            Matrix3::from_diagonal(&Vector3::new(1.0, 2.0, 3.0)),
        );
        let expected = Matrix6::from_diagonal(&nalgebra::Vector6::new(2.0, 2.0, 2.0, 1.0, 2.0, 3.0));
        assert_eq!(generalized_inertia(&body), expected);

        let izz = rod_inertia_about_center(1.0, 1.0);
        assert!((izz - 1.0 / 12.0).abs() < 1e-12);
        let bar = make_snake(1, 1.0, 1.0).unwrap();
        let m = generalized_inertia(&bar.bodies()[0]);
        assert_eq!(m[(0, 0)], 1.0);
        assert!((m[(5, 5)] - izz).abs() < 1e-12);
    }

    #[test]
    fn validation_names_the_offending_field() {
        let joint = JointSpec::revolute(Vector3::z(), Vector3::zeros());
        let body = BodySpec::new(1.0, Vector3::zeros(), Matrix3::identity() * 0.1);
        let build = |joints: Vec<JointSpec>, bodies: Vec<BodySpec>| {
            RobotModel::new("t", joints, bodies, Transform::identity(), GRAVITY_3D)
        };
        let field_of = |r: Result<RobotModel>| match r {
            Err(Error::Validation { field, .. }) => field,
            other => panic!("expected validation error, got {other:?}"),
        };

        let negative = BodySpec { mass: -1.0, ..body };
        assert_eq!(
            field_of(build(vec![joint, joint], vec![body, negative])),
            "bodies[1].mass"
        );

        let bad_axis = JointSpec::revolute(Vector3::new(0.0, 0.0, 2.0), Vector3::zeros());
        assert_eq!(field_of(build(vec![bad_axis], vec![body])), "joints[0].axis");

        let mut asym = body;
        asym.inertia[(0, 1)] = 0.05;
        assert_eq!(field_of(build(vec![joint], vec![asym])), "bodies[0].inertia");

        let triangle = BodySpec::new(
            1.0,
            Vector3::zeros(),
            Matrix3::from_diagonal(&Vector3::new(0.1, 0.1, 0.5)),
        );
        assert_eq!(field_of(build(vec![joint], vec![triangle])), "bodies[0].inertia");

        assert_eq!(field_of(build(vec![joint], vec![])), "bodies");
    }

    #[test]
    fn attach_snakes_matches_longer_snake() {
        let combined = attach_serial(
            &make_snake(2, 1.0, 1.0).unwrap(),
            &make_snake(3, 1.0, 1.0).unwrap(),
            &Transform::identity(),
        );
        let five = make_snake(5, 1.0, 1.0).unwrap();
        assert_eq!(combined.dof(), 5);
        let mut state = 7u64;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 2.0 * core::f64::consts::PI
        };
        for _ in 0..100 {
            let q = DVector::from_fn(5, |_, _| next());
            let a = forward_kinematics(&combined, &q, Point::EndEffector).unwrap();
            let b = forward_kinematics(&five, &q, Point::EndEffector).unwrap();
            assert!((a.to_matrix() - b.to_matrix()).amax() < 1e-12);
        }
    }

    #[test]
    fn attach_empty_appendage_shifts_ee() {
        let base = make_snake(2, 1.0, 1.0).unwrap();
        let empty = RobotModel::new("tool", vec![], vec![], Transform::identity(), GRAVITY_PLANAR).unwrap();
        let mount = Transform::new(
            crate::se3::rotation_exp(&Vector3::z(), 0.3).unwrap(),
            Vector3::new(0.1, 0.2, 0.0),
        );
        let out = attach_serial(&base, &empty, &mount);
        assert_eq!(out.joints(), base.joints());
        assert_eq!(out.bodies(), base.bodies());
        assert_eq!(out.ee_home, base.ee_home * mount);
    }

    #[test]
    fn cartpole_with_snake_is_mixed_chain() {
        let cartpole = make_cartpole(1.0, 1.0, 1.0).unwrap();
        let out = attach_serial(
            &cartpole,
            &make_snake(2, 1.0, 1.0).unwrap(),
            &Transform::identity(),
        );
        let kinds: Vec<_> = out.joint_kinds().collect();
        assert_eq!(
            kinds,
            [
                JointKind::Prismatic,
                JointKind::Revolute,
                JointKind::Revolute,
                JointKind::Revolute
            ]
        );
        for (joint, twist) in out.joints().iter().zip(out.joint_twists()) {
            let expected = joint.twist().unwrap();
            assert!((expected.to_vector() - twist.to_vector()).amax() < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn twist_is_independent_of_point_on_axis(
            (x, y, z) in (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
                .prop_filter("non-degenerate", |(x, y, z)| x * x + y * y + z * z > 1e-3),
            p in proptest::array::uniform3(-3.0..3.0f64),
            s in -5.0..5.0f64,
        ) {
            let axis = Vector3::new(x, y, z).normalize();
            let p = Vector3::from(p);
            let a = make_revolute_twist(&axis, &p).unwrap();
            let b = make_revolute_twist(&axis, &(p + axis * s)).unwrap();
            prop_assert!((a.to_vector() - b.to_vector()).amax() < 1e-12);
        }
    }
}
