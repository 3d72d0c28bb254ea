//! Rigid-body dynamics of the chain: mass matrix from body Jacobians and
//! generalized inertias, gravity, Coriolis terms, energies and forward
//! dynamics.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen, Vector3};

use crate::kinematics::{body_columns, joint_exponentials};
use crate::model::RobotModel;
use crate::se3::{exp_unit_twist, Transform, Twist};
use crate::{Error, Result};

/// Forward dynamics refuses mass matrices with a larger condition number.
pub const MAX_CONDITION: f64 = 1e12;

/// `M_i xi` for `M_i = diag(m I3, I)`.
fn inertia_times(mass: f64, inertia: &nalgebra::Matrix3<f64>, xi: &Twist) -> Twist {
    Twist::new(xi.linear * mass, inertia * xi.angular)
}

fn dot(a: &Twist, b: &Twist) -> f64 {
    a.linear.dot(&b.linear) + a.angular.dot(&b.angular)
}

/// `M(q) = sum_i B_J_i^T M_i B_J_i`. Only the upper triangle is accumulated,
/// so the result is exactly symmetric.
pub fn mass_matrix(model: &RobotModel, q: &DVector<f64>) -> Result<DMatrix<f64>> {
    model.check_q(q)?;
    let n = model.dof();
    let exps = joint_exponentials(model, q, n);
    let mut m = DMatrix::zeros(n, n);
    for (j, body) in model.bodies.iter().enumerate() {
        let cols = body_columns(model, &exps, j + 1);
        let weighted: Vec<Twist> = cols
            .iter()
            .map(|c| inertia_times(body.mass, &body.inertia, c))
            .collect();
        for a in 0..=j {
            for b in a..=j {
                m[(a, b)] += dot(&cols[a], &weighted[b]);
            }
        }
    }
    mirror_upper(&mut m);
    Ok(m)
}

fn mirror_upper(m: &mut DMatrix<f64>) {
    for a in 0..m.nrows() {
        for b in 0..a {
            m[(a, b)] = m[(b, a)];
        }
    }
}

/// `dM/dq` as one n x n matrix per joint coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct MassMatrixPartials {
    slices: Vec<DMatrix<f64>>,
}

impl MassMatrixPartials {
    /// Slice `k` holds `dM / dq_k`. All slices must be square of side `len`.
    pub fn from_slices(slices: Vec<DMatrix<f64>>) -> Self {
        let n = slices.len();
        assert!(slices.iter().all(|s| s.nrows() == n && s.ncols() == n));
        Self { slices }
    }

    /// `dM_ij / dq_k`.
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.slices[k][(i, j)]
    }

    /// `dM / dq_k`.
    pub fn wrt(&self, k: usize) -> &DMatrix<f64> {
        &self.slices[k]
    }

    pub fn dof(&self) -> usize {
        self.slices.len()
    }
}

/// Central differences of [`mass_matrix`] with step `1e-6 max(1, |q_k|)`.
pub fn mass_matrix_partials(model: &RobotModel, q: &DVector<f64>) -> Result<MassMatrixPartials> {
    model.check_q(q)?;
    let mut slices = Vec::with_capacity(q.len());
    for k in 0..q.len() {
        let h = 1e-6 * q[k].abs().max(1.0);
        let mut qp = q.clone();
        let mut qm = q.clone();
        qp[k] += h;
        qm[k] -= h;
        let step = qp[k] - qm[k];
        slices.push((mass_matrix(model, &qp)? - mass_matrix(model, &qm)?) / step);
    }
    Ok(MassMatrixPartials { slices })
}

/// `[xi1, xi2] = ad_{xi1} xi2`.
fn bracket(a: &Twist, b: &Twist) -> Twist {
    Twist::new(
        a.angular.cross(&b.linear) - b.angular.cross(&a.linear),
        a.angular.cross(&b.angular),
    )
}

/// Exact `dM/dq`, using `d(B_J_i)/dq_k = ad_{B_J_i} B_J_k` for `i < k` on
/// each body Jacobian.
pub fn mass_matrix_partials_analytic(model: &RobotModel, q: &DVector<f64>) -> Result<MassMatrixPartials> {
    model.check_q(q)?;
    let n = model.dof();
    let exps = joint_exponentials(model, q, n);
    let mut slices = alloc::vec![DMatrix::zeros(n, n); n];
    for (j, body) in model.bodies.iter().enumerate() {
        let cols = body_columns(model, &exps, j + 1);
        let weighted: Vec<Twist> = cols
            .iter()
            .map(|c| inertia_times(body.mass, &body.inertia, c))
            .collect();
        for (k, slice) in slices.iter_mut().enumerate().take(j + 1).skip(1) {
            // Only columns a < k move with q_k.
            let moved: Vec<Twist> = (0..k).map(|a| bracket(&cols[a], &cols[k])).collect();
            for a in 0..=j {
                for b in a..=j {
                    let mut d = 0.0;
                    if a < k {
                        d += dot(&moved[a], &weighted[b]);
                    }
                    if b < k {
                        d += dot(&weighted[a], &moved[b]);
                    }
                    slice[(a, b)] += d;
                }
            }
        }
    }
    for s in &mut slices {
        mirror_upper(s);
    }
    Ok(MassMatrixPartials { slices })
}

/// Christoffel-symbol Coriolis matrix
/// `C_ij = sum_k 1/2 (dM_ij/dq_k + dM_ik/dq_j - dM_jk/dq_i) qdot_k`.
pub fn christoffel_coriolis(partials: &MassMatrixPartials, qdot: &DVector<f64>) -> Result<DMatrix<f64>> {
    let n = partials.dof();
    Error::check_len("qdot", n, qdot.len())?;
    let mut c = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut sum = 0.0;
            for k in 0..n {
                sum +=
                    0.5 * (partials.get(i, j, k) + partials.get(i, k, j) - partials.get(j, k, i)) * qdot[k];
            }
            c[(i, j)] = sum;
        }
    }
    Ok(c)
}

pub fn coriolis_matrix(model: &RobotModel, q: &DVector<f64>, qdot: &DVector<f64>) -> Result<DMatrix<f64>> {
    model.check_qdot(qdot)?;
    christoffel_coriolis(&mass_matrix_partials(model, q)?, qdot)
}

/// Home COM positions carried to configuration `q`, with the spatial
/// Jacobian columns computed along the way.
fn com_positions(model: &RobotModel, q: &DVector<f64>) -> (Vec<Twist>, Vec<Vector3<f64>>) {
    let n = model.dof();
    let mut prefix = Transform::identity();
    let mut columns = Vec::with_capacity(n);
    let mut coms = Vec::with_capacity(n);
    for (i, (joint, body)) in model.joints.iter().zip(&model.bodies).enumerate() {
        let eta = &model.twists[i];
        columns.push(prefix.act(eta));
        prefix = prefix * exp_unit_twist(eta, joint.kind.into(), q[i]);
        coms.push(prefix.transform_point(&body.com_home.translation));
    }
    (columns, coms)
}

/// `G(q) = sum_i J_v(C_i)^T (-m_i g)`, the gradient of [`potential_energy`].
pub fn gravity_vector(model: &RobotModel, q: &DVector<f64>) -> Result<DVector<f64>> {
    model.check_q(q)?;
    let n = model.dof();
    let (columns, coms) = com_positions(model, q);
    // Column k of the hybrid Jacobian at p_i has linear part v_k + w_k x p_i,
    // so the sum over bodies i >= k collapses to suffix sums of the weight
    // forces and of their moments about the origin.
    let mut force = Vector3::zeros();
    let mut moment = Vector3::zeros();
    let mut g = DVector::zeros(n);
    for k in (0..n).rev() {
        let f = -model.gravity * model.bodies[k].mass;
        force += f;
        moment += coms[k].cross(&f);
        g[k] = columns[k].linear.dot(&force) + columns[k].angular.dot(&moment);
    }
    Ok(g)
}

/// `V = sum_i -m_i g^T p_i(q)`.
pub fn potential_energy(model: &RobotModel, q: &DVector<f64>) -> Result<f64> {
    model.check_q(q)?;
    let (_, coms) = com_positions(model, q);
    Ok(model
        .bodies
        .iter()
        .zip(&coms)
        .map(|(b, p)| -b.mass * model.gravity.dot(p))
        .sum())
}

/// `1/2 qdot^T M(q) qdot`.
pub fn kinetic_energy(model: &RobotModel, q: &DVector<f64>, qdot: &DVector<f64>) -> Result<f64> {
    model.check_qdot(qdot)?;
    let m = mass_matrix(model, q)?;
    Ok(0.5 * qdot.dot(&(m * qdot)))
}

/// `qddot = M^{-1} (tau - C qdot - G)`, solved by Cholesky factorization.
pub fn forward_dynamics(
    model: &RobotModel,
    q: &DVector<f64>,
    qdot: &DVector<f64>,
    tau: &DVector<f64>,
) -> Result<DVector<f64>> {
    model.check_q(q)?;
    model.check_qdot(qdot)?;
    Error::check_len("tau", model.dof(), tau.len())?;
    let m = mass_matrix(model, q)?;
    let rhs = tau - coriolis_matrix(model, q, qdot)? * qdot - gravity_vector(model, q)?;
    solve_spd(m, rhs)
}

pub(crate) fn solve_spd(m: DMatrix<f64>, rhs: DVector<f64>) -> Result<DVector<f64>> {
    if m.is_empty() {
        return Ok(rhs);
    }
    let eig = SymmetricEigen::new(m.clone()).eigenvalues;
    let (lo, hi) = (eig.min(), eig.max());
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if condition.is_nan() || condition > MAX_CONDITION {
        return Err(Error::SingularInertia { condition });
    }
    let chol = m.cholesky().ok_or(Error::SingularInertia { condition })?;
    Ok(chol.solve(&rhs))
}
