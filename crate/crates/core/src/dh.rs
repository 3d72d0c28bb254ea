//! Modified Denavit-Hartenberg kinematics and dynamics.
//!
//! Kept independent of the twist pipeline: frames `{1}..{n}` are produced by
//! chaining DH transforms, the linear Jacobian of the end-effector is a
//! numerical derivative of its position, and the mass matrix splits into
//! translational and rotational parts with inertias rotated into `{S}`.

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use nalgebra::ComplexField;
use nalgebra::{DMatrix, DVector, Matrix3, Matrix6xX, Vector3};

use crate::dynamics::{christoffel_coriolis, MassMatrixPartials};
use crate::kinematics::{Jacobian, JacobianKind};
use crate::model::{BodySpec, JointKind, GRAVITY_PLANAR};
use crate::se3::Transform;
use crate::{Error, Result};

/// Step of the central difference used for the end-effector linear Jacobian.
pub const FD_STEP: f64 = 1e-7;

/// One row `(a, alpha, d, theta)` of a modified DH table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DhRow {
    /// Link length, m.
    pub a: f64,
    /// Link twist, rad.
    pub alpha: f64,
    /// Link offset, m.
    pub d: f64,
    /// Joint angle offset, rad.
    pub theta_offset: f64,
    pub kind: JointKind,
}

impl DhRow {
    pub fn revolute(a: f64, alpha: f64, d: f64, theta_offset: f64) -> Self {
        Self {
            a,
            alpha,
            d,
            theta_offset,
            kind: JointKind::Revolute,
        }
    }

    pub fn prismatic(a: f64, alpha: f64, d: f64, theta_offset: f64) -> Self {
        Self {
            a,
            alpha,
            d,
            theta_offset,
            kind: JointKind::Prismatic,
        }
    }
}

/// A DH chain `{S} -> {1} -> ... -> {n} -> {ee}`. Body `i` has its COM pose
/// expressed in frame `{i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DhModel {
    pub rows: Vec<DhRow>,
    /// `nH_ee`.
    pub tool: Transform,
    pub bodies: Vec<BodySpec>,
    pub gravity: Vector3<f64>,
}

impl DhModel {
    pub fn new(
        rows: Vec<DhRow>,
        tool: Transform,
        bodies: Vec<BodySpec>,
        gravity: Vector3<f64>,
    ) -> Result<Self> {
        Error::check_len("dh bodies", rows.len(), bodies.len())?;
        let finite = rows
            .iter()
            .all(|r| [r.a, r.alpha, r.d, r.theta_offset].iter().all(|x| x.is_finite()));
        if !finite {
            return Err(Error::InvalidParameter("non-finite DH parameter".into()));
        }
        Ok(Self {
            rows,
            tool,
            bodies,
            gravity,
        })
    }

    pub fn dof(&self) -> usize {
        self.rows.len()
    }

    fn check_q(&self, q: &DVector<f64>) -> Result<()> {
        Error::check_len("q", self.dof(), q.len())
    }
}

/// `Rot_x(alpha) Trans_x(a) Rot_z(theta) Trans_z(d)`, with the joint variable
/// added to `theta` (revolute) or `d` (prismatic).
pub fn dh_transform(row: &DhRow, q: f64) -> Transform {
    let (theta, d) = match row.kind {
        JointKind::Revolute => (row.theta_offset + q, row.d),
        JointKind::Prismatic => (row.theta_offset, row.d + q),
    };
    let (sa, ca) = row.alpha.sin_cos();
    let (st, ct) = theta.sin_cos();
    let twist = Transform::new(
        Matrix3::new(1.0, 0.0, 0.0, 0.0, ca, -sa, 0.0, sa, ca),
        Vector3::new(row.a, 0.0, 0.0),
    );
    let joint = Transform::new(
        Matrix3::new(ct, -st, 0.0, st, ct, 0.0, 0.0, 0.0, 1.0),
        Vector3::new(0.0, 0.0, d),
    );
    twist * joint
}

/// Poses of frames `{1}..{n}` in `{S}`.
pub fn dh_frames(dh: &DhModel, q: &DVector<f64>) -> Result<Vec<Transform>> {
    dh.check_q(q)?;
    let mut h = Transform::identity();
    Ok(dh
        .rows
        .iter()
        .zip(q.iter())
        .map(|(row, &qi)| {
            h = h * dh_transform(row, qi);
            h
        })
        .collect())
}

pub fn dh_forward_kinematics(dh: &DhModel, q: &DVector<f64>) -> Result<Transform> {
    dh.check_q(q)?;
    let h = dh
        .rows
        .iter()
        .zip(q.iter())
        .fold(Transform::identity(), |h, (row, &qi)| h * dh_transform(row, qi));
    Ok(h * dh.tool)
}

/// End-effector hybrid Jacobian: linear rows by central differences of the
/// end-effector position, angular rows `z_i` (revolute) or zero (prismatic).
pub fn dh_hybrid_jacobian(dh: &DhModel, q: &DVector<f64>) -> Result<Jacobian> {
    let frames = dh_frames(dh, q)?;
    let n = dh.dof();
    let mut matrix = Matrix6xX::zeros(n);
    for k in 0..n {
        let mut qp = q.clone();
        let mut qm = q.clone();
        qp[k] += FD_STEP;
        qm[k] -= FD_STEP;
        let step = qp[k] - qm[k];
        let dp = (dh_forward_kinematics(dh, &qp)?.translation - dh_forward_kinematics(dh, &qm)?.translation)
            / step;
        matrix.fixed_view_mut::<3, 1>(0, k).copy_from(&dp);
        if dh.rows[k].kind == JointKind::Revolute {
            let z = frames[k].rotation.column(2).into_owned();
            matrix.fixed_view_mut::<3, 1>(3, k).copy_from(&z);
        }
    }
    Ok(Jacobian {
        matrix,
        kind: JacobianKind::Hybrid,
        body: n,
        offset: Vector3::zeros(),
    })
}

/// Linear and angular Jacobian columns of the COM of each body, from the
/// joint axes `z_k` and origins `o_k` of the DH frames.
struct ComJacobians {
    /// `(J_v, J_w)` columns `0..=i` for body `i`.
    columns: Vec<Vec<(Vector3<f64>, Vector3<f64>)>>,
    /// `{C_i}` rotation in `{S}`.
    rotations: Vec<Matrix3<f64>>,
}

fn com_jacobians(dh: &DhModel, q: &DVector<f64>) -> Result<ComJacobians> {
    let frames = dh_frames(dh, q)?;
    let mut columns = Vec::with_capacity(dh.dof());
    let mut rotations = Vec::with_capacity(dh.dof());
    for (i, body) in dh.bodies.iter().enumerate() {
        let com = frames[i] * body.com_home;
        let p = com.translation;
        let cols = (0..=i)
            .map(|k| {
                let z = frames[k].rotation.column(2).into_owned();
                match dh.rows[k].kind {
                    JointKind::Revolute => (z.cross(&(p - frames[k].translation)), z),
                    JointKind::Prismatic => (z, Vector3::zeros()),
                }
            })
            .collect();
        columns.push(cols);
        rotations.push(com.rotation);
    }
    Ok(ComJacobians { columns, rotations })
}

/// `M = sum_i m_i J_v,i^T J_v,i + J_w,i^T (R_i I_i R_i^T) J_w,i`.
pub fn dh_mass_matrix(dh: &DhModel, q: &DVector<f64>) -> Result<DMatrix<f64>> {
    let jac = com_jacobians(dh, q)?;
    let n = dh.dof();
    let mut m = DMatrix::zeros(n, n);
    for (i, body) in dh.bodies.iter().enumerate() {
        let r = &jac.rotations[i];
        let inertia_s = r * body.inertia * r.transpose();
        let cols = &jac.columns[i];
        for a in 0..=i {
            for b in a..=i {
                let (va, wa) = &cols[a];
                let (vb, wb) = &cols[b];
                m[(a, b)] += body.mass * va.dot(vb) + wa.dot(&(inertia_s * wb));
            }
        }
    }
    for a in 0..n {
        for b in 0..a {
            m[(a, b)] = m[(b, a)];
        }
    }
    Ok(m)
}

/// `G = sum_i J_v,i^T (-m_i g)`.
pub fn dh_gravity_vector(dh: &DhModel, q: &DVector<f64>) -> Result<DVector<f64>> {
    let jac = com_jacobians(dh, q)?;
    let mut g = DVector::zeros(dh.dof());
    for (i, body) in dh.bodies.iter().enumerate() {
        let f = -dh.gravity * body.mass;
        for (k, (v, _)) in jac.columns[i].iter().enumerate() {
            g[k] += v.dot(&f);
        }
    }
    Ok(g)
}

/// Christoffel Coriolis matrix from central differences of [`dh_mass_matrix`].
pub fn dh_coriolis_matrix(dh: &DhModel, q: &DVector<f64>, qdot: &DVector<f64>) -> Result<DMatrix<f64>> {
    dh.check_q(q)?;
    Error::check_len("qdot", dh.dof(), qdot.len())?;
    let mut slices = Vec::with_capacity(q.len());
    for k in 0..q.len() {
        let h = 1e-6 * q[k].abs().max(1.0);
        let mut qp = q.clone();
        let mut qm = q.clone();
        qp[k] += h;
        qm[k] -= h;
        let step = qp[k] - qm[k];
        slices.push((dh_mass_matrix(dh, &qp)? - dh_mass_matrix(dh, &qm)?) / step);
    }
    christoffel_coriolis(&MassMatrixPartials::from_slices(slices), qdot)
}

/// DH counterpart of a planar snake of `n` uniform bars.
pub fn snake_to_dh(n: usize, l: f64, m_each: f64) -> Result<DhModel> {
    if n == 0 {
        return Err(Error::InvalidParameter("snake needs at least one link".into()));
    }
    if !(l > 0.0 && m_each > 0.0) {
        return Err(Error::InvalidParameter(
            "link length and mass must be positive".into(),
        ));
    }
    let rows = (0..n)
        .map(|i| DhRow::revolute(if i == 0 { 0.0 } else { l }, 0.0, 0.0, 0.0))
        .collect();
    let t = m_each * l * l / 12.0;
    let bodies = (0..n)
        .map(|_| {
            BodySpec::new(
                m_each,
                Vector3::new(l / 2.0, 0.0, 0.0),
                Matrix3::from_diagonal(&Vector3::new(0.0, t, t)),
            )
        })
        .collect();
    DhModel::new(
        rows,
        Transform::from_translation(Vector3::new(l, 0.0, 0.0)),
        bodies,
        GRAVITY_PLANAR,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{coriolis_matrix, gravity_vector, mass_matrix};
    use crate::kinematics::{forward_kinematics, hybrid_jacobian};
    use crate::robots::make_snake;
    use crate::Point;
    use core::f64::consts::{FRAC_PI_2, PI};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dv(v: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(v)
    }

    #[test]
    fn dh_transform_examples() {
        let zero = DhRow::revolute(0.0, 0.0, 0.0, 0.0);
        assert_eq!(dh_transform(&zero, 0.0), Transform::identity());
        let a = DhRow::revolute(1.0, 0.0, 0.0, 0.0);
        assert_eq!(dh_transform(&a, 0.0), Transform::from_translation(Vector3::x()));
        let h = dh_transform(&zero, FRAC_PI_2);
        assert!((h.rotation - Transform::rot_z(FRAC_PI_2).rotation).amax() < 1e-16);

        let row = DhRow::revolute(0.3, 0.7, -0.2, 0.0);
        let expected = Transform::rot_x(0.7)
            * Transform::from_translation(Vector3::new(0.3, 0.0, 0.0))
            * Transform::from_translation(Vector3::new(0.0, 0.0, -0.2));
        assert!((dh_transform(&row, 0.0).to_matrix() - expected.to_matrix()).amax() < 1e-16);

        let p = DhRow::prismatic(0.0, 0.0, 0.1, 0.0);
        assert!((dh_transform(&p, 0.4).translation - Vector3::new(0.0, 0.0, 0.5)).norm() < 1e-16);
    }

    #[test]
    fn dh_forward_kinematics_examples() {
        let dh = snake_to_dh(2, 1.0, 1.0).unwrap();
        assert_eq!(
            dh_forward_kinematics(&dh, &dv(&[0.0, 0.0])).unwrap().translation,
            Vector3::new(2.0, 0.0, 0.0)
        );
        let h = dh_forward_kinematics(&dh, &dv(&[FRAC_PI_2, -FRAC_PI_2])).unwrap();
        assert!((h.translation - Vector3::new(1.0, 1.0, 0.0)).norm() < 1e-15);

        let one = DhModel::new(
            alloc::vec![DhRow::revolute(0.0, 0.0, 0.0, 0.0)],
            Transform::from_translation(Vector3::x()),
            alloc::vec![BodySpec::new(1.0, Vector3::zeros(), Matrix3::identity())],
            GRAVITY_PLANAR,
        )
        .unwrap();
        let h = dh_forward_kinematics(&one, &dv(&[PI])).unwrap();
        assert!((h.translation - Vector3::new(-1.0, 0.0, 0.0)).norm() < 1e-15);
        assert!(dh_forward_kinematics(&one, &dv(&[0.0, 0.0])).is_err());
    }

    #[test]
    fn dh_hybrid_jacobian_examples() {
        let dh = snake_to_dh(1, 1.0, 1.0).unwrap();
        let j = dh_hybrid_jacobian(&dh, &dv(&[0.0])).unwrap();
        let c = j.column(0);
        assert!((c.linear - Vector3::y()).norm() < 1e-8);
        assert_eq!(c.angular, Vector3::z());

        let slider = DhModel::new(
            alloc::vec![DhRow::prismatic(0.0, 0.0, 0.0, 0.0)],
            Transform::identity(),
            alloc::vec![BodySpec::new(1.0, Vector3::zeros(), Matrix3::identity())],
            GRAVITY_PLANAR,
        )
        .unwrap();
        let c = dh_hybrid_jacobian(&slider, &dv(&[0.3])).unwrap().column(0);
        assert!((c.linear - Vector3::z()).norm() < 1e-8);
        assert_eq!(c.angular, Vector3::zeros());

        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let dh = snake_to_dh(3, 1.0, 1.0).unwrap();
        let model = make_snake(3, 1.0, 1.0).unwrap();
        for _ in 0..50 {
            let q = DVector::from_fn(3, |_, _| rng.random_range(-PI..PI));
            let a = dh_hybrid_jacobian(&dh, &q).unwrap().matrix;
            let b = hybrid_jacobian(&model, &q, Point::EndEffector).unwrap().matrix;
            assert!((a - b).amax() < 1e-5);
        }
    }

    #[test]
    fn dh_mass_matrix_examples() {
        let m = dh_mass_matrix(&snake_to_dh(1, 1.0, 1.0).unwrap(), &dv(&[0.8])).unwrap();
        assert!((m[(0, 0)] - 1.0 / 3.0).abs() < 1e-12);
        let m = dh_mass_matrix(&snake_to_dh(2, 1.0, 1.0).unwrap(), &dv(&[-0.6, 0.0])).unwrap();
        let expected = [[8.0 / 3.0, 5.0 / 6.0], [5.0 / 6.0, 1.0 / 3.0]];
        for r in 0..2 {
            for c in 0..2 {
                assert!((m[(r, c)] - expected[r][c]).abs() < 1e-12);
            }
        }
        let mut dh = snake_to_dh(3, 1.0, 1.0).unwrap();
        for b in &mut dh.bodies {
            b.mass = 0.0;
            b.inertia = Matrix3::zeros();
        }
        assert_eq!(
            dh_mass_matrix(&dh, &dv(&[0.1, 0.2, 0.3])).unwrap(),
            DMatrix::zeros(3, 3)
        );
    }

    #[test]
    fn snake_to_dh_structure() {
        let dh = snake_to_dh(1, 1.0, 1.0).unwrap();
        assert_eq!(dh.rows.len(), 1);
        assert_eq!(dh.tool, Transform::from_translation(Vector3::x()));
        assert!(snake_to_dh(0, 1.0, 1.0).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let dh = snake_to_dh(5, 1.0, 1.0).unwrap();
        let model = make_snake(5, 1.0, 1.0).unwrap();
        for _ in 0..100 {
            let q = DVector::from_fn(5, |_, _| rng.random_range(-PI..PI));
            let a = dh_forward_kinematics(&dh, &q).unwrap();
            let b = forward_kinematics(&model, &q, Point::EndEffector).unwrap();
            assert!((a.translation - b.translation).amax() < 1e-10);
            assert!((a.rotation - b.rotation).norm() < 1e-10);
        }
    }

    #[test]
    fn dh_gravity_and_coriolis_match_geometric_pipeline() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for n in [1usize, 3, 6] {
            let dh = snake_to_dh(n, 1.0, 1.0).unwrap();
            let model = make_snake(n, 1.0, 1.0).unwrap();
            for _ in 0..10 {
                let q = DVector::from_fn(n, |_, _| rng.random_range(-PI..PI));
                let qdot = DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
                let g = (dh_gravity_vector(&dh, &q).unwrap() - gravity_vector(&model, &q).unwrap()).amax();
                assert!(g < 1e-10);
                let c = (dh_coriolis_matrix(&dh, &q, &qdot).unwrap()
                    - coriolis_matrix(&model, &q, &qdot).unwrap())
                .amax();
                assert!(c < 1e-6);
                let m = (dh_mass_matrix(&dh, &q).unwrap() - mass_matrix(&model, &q).unwrap()).amax();
                assert!(m < 1e-9);
            }
        }
    }
}
