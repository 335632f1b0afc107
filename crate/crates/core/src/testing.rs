//! Seeded random generators for rotations, poses, and curves, shared by the
//! test suites and the embedded self-tests.

use crate::curve::PiecewiseGeodesicCurve;
use crate::lie::{exp_so3, AxisVector, Pose, Rotation};
use nalgebra::Vector3;
use rand::Rng;

/// Random axis-angle vector with norm uniform in (0, `max_norm`).
pub fn random_axis_vector(rng: &mut impl Rng, max_norm: f64) -> AxisVector {
    loop {
        let v = Vector3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v * (rng.gen_range(1e-3..1.0) * max_norm / n);
        }
    }
}

pub fn random_rotation(rng: &mut impl Rng, max_angle: f64) -> Rotation {
    exp_so3(&random_axis_vector(rng, max_angle))
}

pub fn random_pose(rng: &mut impl Rng, joints: usize, max_angle: f64) -> Pose {
    Pose::new((0..joints).map(|_| random_rotation(rng, max_angle)).collect())
}

/// Random piecewise-geodesic curve with uniform knots: a random start pose
/// followed by bounded random relative rotations, so every segment is
/// non-degenerate and stays clear of the angle-π branch.
pub fn random_curve(
    rng: &mut impl Rng,
    joints: usize,
    segments: usize,
) -> PiecewiseGeodesicCurve {
    let mut poses = vec![random_pose(rng, joints, 1.5)];
    for _ in 0..segments {
        let prev = poses.last().unwrap();
        let next = Pose::new(
            prev.rotations()
                .iter()
                .map(|r| {
                    let delta = random_axis_vector(rng, 1.2);
                    let delta = if delta.norm() < 0.1 {
                        delta.normalize() * 0.1
                    } else {
                        delta
                    };
                    exp_so3(&delta).compose(r)
                })
                .collect(),
        );
        poses.push(next);
    }
    PiecewiseGeodesicCurve::from_frames(poses, None).expect("valid random curve")
}
