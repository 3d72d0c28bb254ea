use core::f64::consts::PI;

use nalgebra::{DVector, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use screwchain::dynamics::mass_matrix;
use screwchain::kinematics::forward_kinematics;
use screwchain::model::attach_serial;
use screwchain::robots::{make_cartpole, make_franka, make_snake};
use screwchain::se3::rotation_exp;
use screwchain::{Point, Transform};

fn mount(axis: Vector3<f64>, angle: f64, offset: Vector3<f64>) -> Transform {
    Transform::new(rotation_exp(&axis.normalize(), angle).unwrap(), offset)
}

#[test]
fn attach_is_associative() {
    let a = make_cartpole(1.0, 0.5, 0.8).unwrap();
    let b = make_snake(2, 0.7, 1.3).unwrap();
    let c = make_franka();
    let m1 = mount(Vector3::new(1.0, 2.0, 0.5), 0.7, Vector3::new(0.1, 0.0, 0.2));
    let m2 = mount(Vector3::new(-0.3, 0.2, 1.0), -1.1, Vector3::new(0.0, 0.3, -0.1));

    let left = attach_serial(&attach_serial(&a, &b, &m1), &c, &m2);
    let right = attach_serial(&a, &attach_serial(&b, &c, &m2), &m1);
    assert_eq!(left.dof(), 11);
    assert_eq!(right.dof(), 11);

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let q = DVector::from_fn(11, |_, _| rng.random_range(-PI..PI));
        for point in [Point::EndEffector, Point::com(4), Point::com(11)] {
            let l = forward_kinematics(&left, &q, point).unwrap();
            let r = forward_kinematics(&right, &q, point).unwrap();
            assert!((l.to_matrix() - r.to_matrix()).amax() < 1e-10);
        }
    }
}

#[test]
fn attached_base_dynamics_see_the_appendage_load() {
    let base = make_snake(2, 1.0, 1.0).unwrap();
    let combined = attach_serial(&base, &make_snake(1, 1.0, 1.0).unwrap(), &Transform::identity());
    let q = DVector::from_vec(vec![0.3, -0.4, 0.0]);
    let m3 = mass_matrix(&combined, &q).unwrap();
    let m2 = mass_matrix(&base, &q.rows(0, 2).into_owned()).unwrap();
    assert!(m3[(0, 0)] > m2[(0, 0)]);
    assert_eq!(m3, mass_matrix(&make_snake(3, 1.0, 1.0).unwrap(), &q).unwrap());
}
