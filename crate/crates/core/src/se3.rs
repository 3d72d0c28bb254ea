//! Rigid-body motion primitives on SE(3).
//!
//! Twists are stored as `(linear; angular)`, the ordering used throughout the
//! crate for joint twists, Jacobian columns and adjoint matrices.

use core::ops::Mul;

#[cfg(not(feature = "std"))]
use nalgebra::ComplexField;
use nalgebra::{Matrix3, Matrix4, Matrix6, Vector3, Vector6};

use crate::{Error, Result, AXIS_TOLERANCE};

/// Element of SO(3).
pub type Rotation = Matrix3<f64>;

/// 6x6 matrix representation of the adjoint map `Ad_H`.
pub type AdjointMatrix = Matrix6<f64>;

/// `[w]`, the matrix with `[w] p = w x p`.
pub fn skew(w: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

fn check_unit(axis: &Vector3<f64>) -> Result<()> {
    let norm = axis.norm();
    if (norm - 1.0).abs() <= AXIS_TOLERANCE {
        Ok(())
    } else {
        Err(Error::InvalidAxis { norm })
    }
}

/// Rodrigues' formula `I + sin(q)[w] + (1 - cos(q))[w]^2` for a unit axis.
pub fn rotation_exp(axis: &Vector3<f64>, q: f64) -> Result<Rotation> {
    check_unit(axis)?;
    Ok(rotation_exp_unit(axis, q))
}

pub(crate) fn rotation_exp_unit(axis: &Vector3<f64>, q: f64) -> Rotation {
    let w = skew(axis);
    let (s, c) = q.sin_cos();
    Matrix3::identity() + w * s + w * w * (1.0 - c)
}

/// `G(q) = I q + (1 - cos q)[w] + (q - sin q)[w]^2`, the matrix that maps the
/// linear part of a unit revolute twist to the translation of its exponential.
pub fn translation_kernel(axis: &Vector3<f64>, q: f64) -> Result<Matrix3<f64>> {
    check_unit(axis)?;
    Ok(translation_kernel_unit(axis, q))
}

fn translation_kernel_unit(axis: &Vector3<f64>, q: f64) -> Matrix3<f64> {
    let w = skew(axis);
    let (s, c) = q.sin_cos();
    Matrix3::identity() * q + w * (1.0 - c) + w * w * (q - s)
}

/// Homogeneous transformation, stored as rotation and translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transform {
    pub rotation: Rotation,
    pub translation: Vector3<f64>,
}

impl Default for Transform {
    fn default() -> Self {
        Self::identity()
    }
}

impl Transform {
    pub fn new(rotation: Rotation, translation: Vector3<f64>) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn identity() -> Self {
        Self::new(Matrix3::identity(), Vector3::zeros())
    }

    pub fn from_translation(translation: Vector3<f64>) -> Self {
        Self::new(Matrix3::identity(), translation)
    }

    pub fn from_rotation(rotation: Rotation) -> Self {
        Self::new(rotation, Vector3::zeros())
    }

    /// Rotation about x by `angle`.
    pub fn rot_x(angle: f64) -> Self {
        Self::from_rotation(rotation_exp_unit(&Vector3::x(), angle))
    }

    /// Rotation about z by `angle`.
    pub fn rot_z(angle: f64) -> Self {
        Self::from_rotation(rotation_exp_unit(&Vector3::z(), angle))
    }

    /// Matrix product semantics. No re-orthonormalization is applied.
    pub fn compose(&self, other: &Transform) -> Transform {
        Transform {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    /// `(R^T, -R^T p)`.
    pub fn inverse(&self) -> Transform {
        let rt = self.rotation.transpose();
        Transform {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    pub fn to_matrix(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    /// `[[R, [p]R], [0, R]]`.
    pub fn adjoint(&self) -> AdjointMatrix {
        let r = &self.rotation;
        let mut ad = Matrix6::zeros();
        ad.fixed_view_mut::<3, 3>(0, 0).copy_from(r);
        ad.fixed_view_mut::<3, 3>(0, 3)
            .copy_from(&(skew(&self.translation) * r));
        ad.fixed_view_mut::<3, 3>(3, 3).copy_from(r);
        ad
    }

    /// `Ad_H xi` without forming the 6x6 matrix.
    pub fn act(&self, xi: &Twist) -> Twist {
        let angular = self.rotation * xi.angular;
        Twist {
            linear: self.rotation * xi.linear + self.translation.cross(&angular),
            angular,
        }
    }

    /// `Ad_H^{-1} xi`, i.e. `Ad_{H^{-1}} xi`.
    pub fn act_inverse(&self, xi: &Twist) -> Twist {
        let rt = self.rotation.transpose();
        Twist {
            linear: rt * (xi.linear - self.translation.cross(&xi.angular)),
            angular: rt * xi.angular,
        }
    }
}

impl Mul for Transform {
    type Output = Transform;

    fn mul(self, rhs: Transform) -> Transform {
        self.compose(&rhs)
    }
}

impl<'a> Mul<&'a Transform> for &'a Transform {
    type Output = Transform;

    fn mul(self, rhs: &'a Transform) -> Transform {
        self.compose(rhs)
    }
}

pub fn adjoint(h: &Transform) -> AdjointMatrix {
    h.adjoint()
}

pub fn compose(h1: &Transform, h2: &Transform) -> Transform {
    h1.compose(h2)
}

pub fn inverse(h: &Transform) -> Transform {
    h.inverse()
}

/// Screw coordinates `(linear; angular)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Twist {
    pub linear: Vector3<f64>,
    pub angular: Vector3<f64>,
}

/// What kind of unit joint twist a [`Twist`] is.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitTwistKind {
    Revolute,
    Prismatic,
}

impl Twist {
    pub fn new(linear: Vector3<f64>, angular: Vector3<f64>) -> Self {
        Self { linear, angular }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_vector(v: &Vector6<f64>) -> Self {
        Self {
            linear: v.fixed_rows::<3>(0).into_owned(),
            angular: v.fixed_rows::<3>(3).into_owned(),
        }
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        let mut v = Vector6::zeros();
        v.fixed_rows_mut::<3>(0).copy_from(&self.linear);
        v.fixed_rows_mut::<3>(3).copy_from(&self.angular);
        v
    }

    /// Classifies the twist as a unit revolute (`|w| = 1`) or unit prismatic
    /// (`w = 0`, `|v| = 1`) joint twist.
    pub fn unit_kind(&self) -> Result<UnitTwistKind> {
        let w = self.angular.norm();
        if (w - 1.0).abs() <= AXIS_TOLERANCE {
            Ok(UnitTwistKind::Revolute)
        } else if w == 0.0 && (self.linear.norm() - 1.0).abs() <= AXIS_TOLERANCE {
            Ok(UnitTwistKind::Prismatic)
        } else {
            Err(Error::InvalidTwist)
        }
    }
}

/// `exp([eta] q)` for a unit joint twist.
pub fn exp_twist(eta: &Twist, q: f64) -> Result<Transform> {
    let kind = eta.unit_kind()?;
    Ok(exp_unit_twist(eta, kind, q))
}

pub(crate) fn exp_unit_twist(eta: &Twist, kind: UnitTwistKind, q: f64) -> Transform {
    match kind {
        UnitTwistKind::Revolute => Transform {
            rotation: rotation_exp_unit(&eta.angular, q),
            translation: translation_kernel_unit(&eta.angular, q) * eta.linear,
        },
        UnitTwistKind::Prismatic => Transform::from_translation(eta.linear * q),
    }
}

/// `R^T R = I` and `det R = 1` within `tol`.
pub fn is_rotation(r: &Rotation, tol: f64) -> bool {
    (r.transpose() * r - Matrix3::identity()).amax() <= tol && (r.determinant() - 1.0).abs() <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_2, PI};
    use proptest::prelude::*;

    fn assert_mat3_eq(a: &Matrix3<f64>, b: &Matrix3<f64>, tol: f64) {
        assert!((a - b).amax() <= tol, "{a} != {b}");
    }

    /// Truncated power series sum_{k>=0} q^{k+1} [w]^k / (k+1)!.
    fn kernel_series(axis: &Vector3<f64>, q: f64, terms: usize) -> Matrix3<f64> {
        let w = skew(axis);
        let mut power = Matrix3::identity();
        let mut coeff = q;
        let mut sum = Matrix3::zeros();
        for k in 0..terms {
            sum += power * coeff;
            power *= w;
            coeff *= q / (k as f64 + 2.0);
        }
        sum
    }

    fn unit_axis() -> impl Strategy<Value = Vector3<f64>> {
        (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
            .prop_filter("non-degenerate", |(x, y, z)| x * x + y * y + z * z > 1e-3)
            .prop_map(|(x, y, z)| Vector3::new(x, y, z).normalize())
    }

    fn transform() -> impl Strategy<Value = Transform> {
        (unit_axis(), -PI..PI, -2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64)
            .prop_map(|(axis, q, x, y, z)| Transform::new(rotation_exp_unit(&axis, q), Vector3::new(x, y, z)))
    }

    fn unit_twist() -> impl Strategy<Value = Twist> {
        prop_oneof![
            (unit_axis(), -2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64)
                .prop_map(|(w, x, y, z)| { Twist::new(-w.cross(&Vector3::new(x, y, z)), w) }),
            unit_axis().prop_map(|v| Twist::new(v, Vector3::zeros())),
        ]
    }

    #[test]
    fn skew_examples() {
        assert_eq!(skew(&Vector3::zeros()), Matrix3::zeros());
        assert_eq!(
            skew(&Vector3::z()),
            Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0)
        );
        assert_eq!(skew(&Vector3::z()) * Vector3::x(), Vector3::y());
    }

    #[test]
    fn rotation_exp_examples() {
        assert_eq!(rotation_exp(&Vector3::z(), 0.0).unwrap(), Matrix3::identity());
        assert_mat3_eq(
            &rotation_exp(&Vector3::z(), FRAC_PI_2).unwrap(),
            &Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0),
            1e-15,
        );
        assert_mat3_eq(
            &rotation_exp(&Vector3::x(), PI).unwrap(),
            &Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, -1.0)),
            1e-15,
        );
        assert!(matches!(
            rotation_exp(&Vector3::new(0.0, 0.0, 2.0), 1.0),
            Err(Error::InvalidAxis { .. })
        ));
    }

    #[test]
    fn translation_kernel_examples() {
        assert_eq!(translation_kernel(&Vector3::z(), 0.0).unwrap(), Matrix3::zeros());
        let expected = Matrix3::new(1.0, -1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, FRAC_PI_2);
        assert_mat3_eq(&kernel_series(&Vector3::z(), FRAC_PI_2, 20), &expected, 1e-14);
        assert_mat3_eq(
            &translation_kernel(&Vector3::z(), FRAC_PI_2).unwrap(),
            &expected,
            1e-15,
        );
        assert_eq!(
            translation_kernel(&Vector3::z(), 2.0).unwrap() * Vector3::z(),
            Vector3::new(0.0, 0.0, 2.0)
        );
        assert!(translation_kernel(&Vector3::new(0.5, 0.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn exp_twist_examples() {
        let prismatic = Twist::new(Vector3::x(), Vector3::zeros());
        let h = exp_twist(&prismatic, 2.0).unwrap();
        assert_eq!(h.rotation, Matrix3::identity());
        assert_eq!(h.translation, Vector3::new(2.0, 0.0, 0.0));

        let about_z = Twist::new(Vector3::zeros(), Vector3::z());
        let h = exp_twist(&about_z, FRAC_PI_2).unwrap();
        assert_eq!(h.rotation, rotation_exp(&Vector3::z(), FRAC_PI_2).unwrap());
        assert_eq!(h.translation, Vector3::zeros());

        // Revolute about z through (1, 0, 0); oracle is T(p) Rz(pi) T(-p).
        let offset = Twist::new(Vector3::new(0.0, -1.0, 0.0), Vector3::z());
        let h = exp_twist(&offset, PI).unwrap();
        let p = Vector3::x();
        let oracle = Transform::from_translation(p) * Transform::rot_z(PI) * Transform::from_translation(-p);
        assert!((h.to_matrix() - oracle.to_matrix()).amax() < 1e-15);
        assert!((h.transform_point(&Vector3::zeros()) - Vector3::new(2.0, 0.0, 0.0)).norm() < 1e-15);

        assert_eq!(
            exp_twist(&Twist::new(Vector3::x(), Vector3::x() * 0.5), 1.0),
            Err(Error::InvalidTwist)
        );
        assert_eq!(
            exp_twist(&Twist::new(Vector3::x() * 2.0, Vector3::zeros()), 1.0),
            Err(Error::InvalidTwist)
        );
    }

    #[test]
    fn adjoint_examples() {
        assert_eq!(Transform::identity().adjoint(), Matrix6::identity());

        let p = Vector3::z();
        let ad = Transform::from_translation(p).adjoint();
        let mut expected = Matrix6::identity();
        expected.fixed_view_mut::<3, 3>(0, 3).copy_from(&skew(&p));
        assert_eq!(ad, expected);

        let r = rotation_exp(&Vector3::z(), FRAC_PI_2).unwrap();
        let ad = Transform::from_rotation(r).adjoint();
        let mut expected = Matrix6::zeros();
        expected.fixed_view_mut::<3, 3>(0, 0).copy_from(&r);
        expected.fixed_view_mut::<3, 3>(3, 3).copy_from(&r);
        assert_eq!(ad, expected);
    }

    #[test]
    fn compose_and_inverse_examples() {
        let h = Transform::new(
            rotation_exp(&Vector3::z(), FRAC_PI_2).unwrap(),
            Vector3::new(1.0, 0.0, 0.0),
        );
        assert_eq!(compose(&Transform::identity(), &h), h);
        assert!((compose(&h, &inverse(&h)).to_matrix() - Matrix4::identity()).amax() < 1e-12);
        let t = compose(
            &Transform::from_translation(Vector3::x()),
            &Transform::from_translation(Vector3::y()),
        );
        assert_eq!(t.translation, Vector3::new(1.0, 1.0, 0.0));

        assert_eq!(inverse(&Transform::identity()), Transform::identity());
        assert_eq!(
            inverse(&Transform::from_translation(Vector3::new(1.0, 2.0, 3.0))),
            Transform::from_translation(Vector3::new(-1.0, -2.0, -3.0))
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn rotation_exp_is_rotation(axis in unit_axis(), q in -PI..PI) {
            let r = rotation_exp(&axis, q).unwrap();
            prop_assert!(is_rotation(&r, 1e-12));
            let back = r * rotation_exp(&axis, -q).unwrap();
            prop_assert!((back - Matrix3::identity()).amax() < 1e-12);
        }

        #[test]
        fn exp_twist_one_parameter_subgroup(eta in unit_twist(), a in -PI..PI, b in -PI..PI) {
            let lhs = exp_twist(&eta, a).unwrap() * exp_twist(&eta, b).unwrap();
            let rhs = exp_twist(&eta, a + b).unwrap();
            prop_assert!((lhs.to_matrix() - rhs.to_matrix()).amax() < 1e-12);
            prop_assert_eq!(exp_twist(&eta, 0.0).unwrap(), Transform::identity());
        }

        #[test]
        fn adjoint_is_homomorphism(h1 in transform(), h2 in transform()) {
            let lhs = (h1 * h2).adjoint();
            let rhs = h1.adjoint() * h2.adjoint();
            prop_assert!((lhs - rhs).amax() < 1e-12);
            let inv = h1.inverse().adjoint();
            prop_assert!((inv * h1.adjoint() - Matrix6::identity()).amax() < 1e-12);
        }

        #[test]
        fn act_matches_adjoint_matrix(h in transform(), v in proptest::array::uniform6(-2.0..2.0f64)) {
            let xi = Twist::from_vector(&Vector6::from_row_slice(&v));
            let direct = h.act(&xi).to_vector();
            prop_assert!((direct - h.adjoint() * xi.to_vector()).amax() < 1e-12);
            prop_assert!((h.act_inverse(&h.act(&xi)).to_vector() - xi.to_vector()).amax() < 1e-12);
        }

        #[test]
        fn translation_kernel_matches_series(axis in unit_axis(), q in -PI..PI) {
            let g = translation_kernel(&axis, q).unwrap();
            prop_assert!((g - kernel_series(&axis, q, 40)).amax() < 1e-12);
            prop_assert!((g * axis - axis * q).amax() < 1e-12);
        }

        #[test]
        fn rotation_exp_derivative_matches_finite_difference(axis in unit_axis(), q in -PI..PI) {
            let h = 1e-6;
            let fd = (rotation_exp(&axis, q + h).unwrap() - rotation_exp(&axis, q - h).unwrap()) / (2.0 * h);
            let analytic = skew(&axis) * rotation_exp(&axis, q).unwrap();
            prop_assert!((fd - analytic).amax() < 1e-6);
        }
    }
}
