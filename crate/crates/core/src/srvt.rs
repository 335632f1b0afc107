//! Square Root Velocity Transform and the pulled-back L2 distance.
//!
//! The transform maps a curve to its right-trivialized derivative divided by
//! the square root of its speed, q(t) = b(t)/√‖b(t)‖. For piecewise-geodesic
//! curves b is piecewise constant, so q is too, and every integral below is
//! a finite sum over interval refinements — no quadrature anywhere.
//!
//! Zero-velocity segments (speed ≤ [`SPEED_TOL`](crate::curve::SPEED_TOL))
//! are excised before the transform, with their time mass redistributed
//! proportionally so the domain stays [0,1]: the transform is undefined at
//! vanishing speed and mocap data contains pauses.

use crate::curve::{CurveError, PiecewiseGeodesicCurve, Reparameterization, SPEED_TOL};
use nalgebra::DVector;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SrvtError {
    #[error("curve has no segment with speed above {SPEED_TOL:.0e}; not an immersion")]
    NotImmersed,
    #[error("dimension mismatch: {a} vs {b}")]
    DimensionMismatch { a: usize, b: usize },
    #[error("joint weights: expected {expected} entries, got {got}")]
    BadWeights { expected: usize, got: usize },
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// A piecewise-constant ℝ^{3d}-valued function on [0,1] with no zero values:
/// the image of a curve under the SRVT.
#[derive(Debug, Clone, PartialEq)]
pub struct SrvRepresentation {
    times: Vec<f64>,
    values: Vec<DVector<f64>>,
}

impl SrvRepresentation {
    /// Builds a representation from interval boundaries (strictly increasing,
    /// spanning exactly [0,1]) and one value per interval.
    pub fn new(mut times: Vec<f64>, values: Vec<DVector<f64>>) -> Result<Self, SrvtError> {
        if times.len() < 2 || values.len() + 1 != times.len() {
            return Err(SrvtError::Curve(CurveError::TooFewFrames { got: times.len() }));
        }
        if times[0].abs() > 1e-12 || (times[times.len() - 1] - 1.0).abs() > 1e-12 {
            return Err(SrvtError::Curve(CurveError::NonMonotoneTimes));
        }
        times[0] = 0.0;
        *times.last_mut().unwrap() = 1.0;
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SrvtError::Curve(CurveError::NonMonotoneTimes));
        }
        let dim = values[0].len();
        if values.iter().any(|v| v.len() != dim) {
            return Err(SrvtError::DimensionMismatch {
                a: dim,
                b: values.iter().map(|v| v.len()).find(|&l| l != dim).unwrap(),
            });
        }
        Ok(SrvRepresentation { times, values })
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[DVector<f64>] {
        &self.values
    }

    /// Value on the interval containing `t`.
    pub fn value_at(&self, t: f64) -> &DVector<f64> {
        &self.values[crate::curve::segment_index(&self.times, t.clamp(0.0, 1.0))]
    }

    /// √(∫₀¹ ‖q(t)‖² dt), computed exactly.
    pub fn l2_norm(&self) -> f64 {
        let mut acc = 0.0;
        for (k, v) in self.values.iter().enumerate() {
            acc += v.norm_squared() * (self.times[k + 1] - self.times[k]);
        }
        acc.sqrt()
    }
}

/// The SRVT of a curve: on every non-degenerate segment, q = b/√‖b‖ where b
/// is the log-derivative slope.
pub fn srv_transform(c: &PiecewiseGeodesicCurve) -> Result<SrvRepresentation, SrvtError> {
    srv_transform_weighted(c, None)
}

/// [`srv_transform`] under a per-joint weighting of the Lie-algebra norm,
/// ‖b‖² = Σ_j w_j ‖b_j‖². Implemented by scaling joint j's coordinates by
/// √w_j, which turns the weighted norm into the plain Euclidean one.
pub fn srv_transform_weighted(
    c: &PiecewiseGeodesicCurve,
    joint_weights: Option<&[f64]>,
) -> Result<SrvRepresentation, SrvtError> {
    if let Some(w) = joint_weights {
        if w.len() != c.joint_count() {
            return Err(SrvtError::BadWeights {
                expected: c.joint_count(),
                got: w.len(),
            });
        }
    }
    let ld = c.log_derivative()?;
    let mut kept: Vec<(f64, DVector<f64>)> = Vec::with_capacity(ld.segment_count());
    for (k, slope) in ld.slopes().iter().enumerate() {
        let dt = ld.times()[k + 1] - ld.times()[k];
        let mut b = slope.clone();
        if let Some(w) = joint_weights {
            for (j, wj) in w.iter().enumerate() {
                let s = wj.sqrt();
                b[3 * j] *= s;
                b[3 * j + 1] *= s;
                b[3 * j + 2] *= s;
            }
        }
        if b.norm() > SPEED_TOL {
            kept.push((dt, b));
        }
    }
    if kept.is_empty() {
        return Err(SrvtError::NotImmersed);
    }
    let total: f64 = kept.iter().map(|(dt, _)| dt).sum();
    let mut times = Vec::with_capacity(kept.len() + 1);
    times.push(0.0);
    let mut values = Vec::with_capacity(kept.len());
    let mut acc = 0.0;
    for (dt, b) in kept {
        acc += dt / total;
        times.push(acc);
        // Stretching the interval by 1/total scales the velocity by total.
        let b = b * total;
        values.push(&b / b.norm().sqrt());
    }
    *times.last_mut().unwrap() = 1.0;
    Ok(SrvRepresentation { times, values })
}

/// Merged sorted boundary set of two representations.
fn merged_boundaries(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    out.extend_from_slice(a);
    out.extend_from_slice(b);
    out.sort_by(|x, y| x.partial_cmp(y).unwrap());
    out.dedup_by(|x, y| (*x - *y).abs() <= 1e-15);
    out
}

/// The pulled-back L2 distance √(∫₀¹ ‖q0(t) − q1(t)‖² dt), exact on the
/// common refinement of the two boundary sets.
pub fn l2_distance(q0: &SrvRepresentation, q1: &SrvRepresentation) -> Result<f64, SrvtError> {
    if q0.dim() != q1.dim() {
        return Err(SrvtError::DimensionMismatch {
            a: q0.dim(),
            b: q1.dim(),
        });
    }
    let grid = merged_boundaries(&q0.times, &q1.times);
    let mut acc = 0.0;
    for w in grid.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let diff = q0.value_at(mid) - q1.value_at(mid);
        acc += diff.norm_squared() * (w[1] - w[0]);
    }
    Ok(acc.sqrt())
}

/// The action of a reparameterization on SRV representations:
/// (q ∘ φ)·√φ̇, the transform-side counterpart of reparameterizing the curve.
pub fn warp_srv(
    q: &SrvRepresentation,
    phi: &Reparameterization,
) -> Result<SrvRepresentation, SrvtError> {
    let inv = phi.inverse();
    let preimages: Vec<f64> = q.times.iter().map(|&t| inv.evaluate(t)).collect();
    let grid = merged_boundaries(phi.breakpoints(), &preimages);
    let mut values = Vec::with_capacity(grid.len() - 1);
    for w in grid.windows(2) {
        let (fa, fb) = (phi.evaluate(w[0]), phi.evaluate(w[1]));
        let slope = (fb - fa) / (w[1] - w[0]);
        let mid = 0.5 * (fa + fb);
        values.push(q.value_at(mid) * slope.sqrt());
    }
    SrvRepresentation::new(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{exp_so3, Pose};
    use crate::test_util::{random_curve, random_pose};
    use approx::assert_relative_eq;
    use nalgebra::Vector3;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn segment_curve(v: Vector3<f64>) -> PiecewiseGeodesicCurve {
        PiecewiseGeodesicCurve::from_frames(
            vec![Pose::identity(1), Pose::new(vec![exp_so3(&v)])],
            None,
        )
        .unwrap()
    }

    #[test]
    fn unit_speed_segment_is_fixed_point() {
        let v = Vector3::new(1.0, 0.0, 0.0); // ‖b‖ = 1
        let q = srv_transform(&segment_curve(v)).unwrap();
        assert_eq!(q.values().len(), 1);
        assert_relative_eq!(q.values()[0][0], 1.0, epsilon = 1e-12);
        assert!(q.values()[0].as_slice()[1..].iter().all(|x| x.abs() <= 1e-13));
    }

    #[test]
    fn double_speed_scales_by_sqrt_two() {
        let v = Vector3::new(0.4, -0.2, 0.5);
        let single = segment_curve(v);
        // Same geodesic line traversed at twice the speed over [0,1].
        let double = PiecewiseGeodesicCurve::from_frames(
            vec![
                Pose::identity(1),
                Pose::new(vec![exp_so3(&v)]),
                Pose::new(vec![exp_so3(&(v * 2.0))]),
            ],
            None,
        )
        .unwrap();
        let q1 = srv_transform(&single).unwrap();
        let q2 = srv_transform(&double).unwrap();
        let expected = q1.value_at(0.3) * 2.0f64.sqrt();
        assert!((q2.value_at(0.3) - &expected).amax() <= 1e-12);
        assert!((q2.value_at(0.8) - &expected).amax() <= 1e-12);
    }

    #[test]
    fn zero_speed_segment_is_excised_with_time_redistributed() {
        let v = Vector3::new(0.7, 0.1, -0.4);
        let paused = PiecewiseGeodesicCurve::from_frames(
            vec![
                Pose::identity(1),
                Pose::new(vec![exp_so3(&v)]),
                Pose::new(vec![exp_so3(&v)]),
            ],
            Some(&[0.0, 0.5, 1.0]),
        )
        .unwrap();
        assert!(paused.has_zero_speed_segment());
        let q = srv_transform(&paused).unwrap();
        // The pause is dropped and the remaining half stretches over [0,1],
        // leaving the subcurve at its natural speed.
        assert_eq!(q.boundaries(), &[0.0, 1.0]);
        let expected = v / v.norm().sqrt();
        assert!((q.values()[0][0] - expected.x).abs() <= 1e-12);
        assert!((q.values()[0][1] - expected.y).abs() <= 1e-12);
        assert!((q.values()[0][2] - expected.z).abs() <= 1e-12);
    }

    #[test]
    fn constant_curve_is_not_immersed() {
        let p = Pose::identity(2);
        let c = PiecewiseGeodesicCurve::from_frames(vec![p.clone(), p], None).unwrap();
        assert!(matches!(srv_transform(&c), Err(SrvtError::NotImmersed)));
    }

    #[test]
    fn right_translation_invariance() {
        let mut rng = StdRng::seed_from_u64(41);
        let c = random_curve(&mut rng, 2, 5);
        let g = random_pose(&mut rng, 2, 2.0);
        let q0 = srv_transform(&c).unwrap();
        let q1 = srv_transform(&c.right_translate(&g).unwrap()).unwrap();
        for (a, b) in q0.values().iter().zip(q1.values()) {
            assert!((a - b).amax() <= 1e-12);
        }
        assert!(l2_distance(&q0, &q1).unwrap() <= 1e-12);
    }

    #[test]
    fn l2_distance_of_constants() {
        let u = nalgebra::dvector![1.0, 0.0, 2.0];
        let v = nalgebra::dvector![0.0, -1.0, 2.0];
        let qu = SrvRepresentation::new(vec![0.0, 1.0], vec![u.clone()]).unwrap();
        let qv = SrvRepresentation::new(vec![0.0, 1.0], vec![v.clone()]).unwrap();
        assert_eq!(l2_distance(&qu, &qu).unwrap(), 0.0);
        assert_relative_eq!(l2_distance(&qu, &qv).unwrap(), (&u - &v).norm(), epsilon = 1e-14);
    }

    #[test]
    fn l2_distance_translation_invariance_of_curves() {
        let mut rng = StdRng::seed_from_u64(42);
        let c0 = random_curve(&mut rng, 2, 4);
        let c1 = random_curve(&mut rng, 2, 5);
        let g = random_pose(&mut rng, 2, 2.0);
        let base = l2_distance(&srv_transform(&c0).unwrap(), &srv_transform(&c1).unwrap()).unwrap();
        let moved = l2_distance(
            &srv_transform(&c0.right_translate(&g).unwrap()).unwrap(),
            &srv_transform(&c1.right_translate(&g).unwrap()).unwrap(),
        )
        .unwrap();
        assert_relative_eq!(base, moved, epsilon = 1e-12);
    }

    #[test]
    fn l2_is_a_metric_on_random_triples() {
        let mut rng = StdRng::seed_from_u64(43);
        for _ in 0..10 {
            let qa = srv_transform(&random_curve(&mut rng, 1, 4)).unwrap();
            let qb = srv_transform(&random_curve(&mut rng, 1, 4)).unwrap();
            let qc = srv_transform(&random_curve(&mut rng, 1, 4)).unwrap();
            let dab = l2_distance(&qa, &qb).unwrap();
            let dba = l2_distance(&qb, &qa).unwrap();
            assert!((dab - dba).abs() <= 1e-12);
            assert!(dab <= l2_distance(&qa, &qc).unwrap() + l2_distance(&qc, &qb).unwrap() + 1e-12);
            assert!(dab >= 0.0);
        }
    }

    #[test]
    fn warp_with_identity_is_noop() {
        let mut rng = StdRng::seed_from_u64(44);
        let q = srv_transform(&random_curve(&mut rng, 2, 4)).unwrap();
        let w = warp_srv(&q, &Reparameterization::identity()).unwrap();
        for t in [0.1, 0.33, 0.68, 0.95] {
            assert!((w.value_at(t) - q.value_at(t)).amax() <= 1e-13);
        }
    }

    #[test]
    fn equivariance_matches_curve_reparameterization() {
        let mut rng = StdRng::seed_from_u64(45);
        for _ in 0..10 {
            let c = random_curve(&mut rng, 2, 5);
            let phi = Reparameterization::random(&mut rng, 8, 1.0 / 3.0);
            let lhs = warp_srv(&srv_transform(&c).unwrap(), &phi).unwrap();
            let rhs = srv_transform(&c.reparameterize(&phi).unwrap()).unwrap();
            let grid = merged_boundaries(lhs.boundaries(), rhs.boundaries());
            for w in grid.windows(2) {
                let mid = 0.5 * (w[0] + w[1]);
                assert!(
                    (lhs.value_at(mid) - rhs.value_at(mid)).amax() <= 1e-12,
                    "equivariance violated at t={mid}"
                );
            }
        }
    }

    #[test]
    fn warp_preserves_l2_norm() {
        let mut rng = StdRng::seed_from_u64(46);
        for _ in 0..10 {
            let q = srv_transform(&random_curve(&mut rng, 2, 5)).unwrap();
            let phi = Reparameterization::random(&mut rng, 8, 1.0 / 3.0);
            let w = warp_srv(&q, &phi).unwrap();
            assert_relative_eq!(w.l2_norm(), q.l2_norm(), epsilon = 1e-12);
        }
    }

    #[test]
    fn simultaneous_warp_preserves_distance() {
        let mut rng = StdRng::seed_from_u64(47);
        for _ in 0..10 {
            let q0 = srv_transform(&random_curve(&mut rng, 2, 4)).unwrap();
            let q1 = srv_transform(&random_curve(&mut rng, 2, 5)).unwrap();
            let phi = Reparameterization::random(&mut rng, 8, 1.0 / 3.0);
            let base = l2_distance(&q0, &q1).unwrap();
            let warped = l2_distance(
                &warp_srv(&q0, &phi).unwrap(),
                &warp_srv(&q1, &phi).unwrap(),
            )
            .unwrap();
            assert!((base - warped).abs() <= 1e-12);
        }
    }

    #[test]
    fn weighted_transform_scales_joints() {
        let mut rng = StdRng::seed_from_u64(48);
        let c = random_curve(&mut rng, 2, 3);
        let plain = srv_transform(&c).unwrap();
        let boosted = srv_transform_weighted(&c, Some(&[1.0, 1.0])).unwrap();
        for (a, b) in plain.values().iter().zip(boosted.values()) {
            assert!((a - b).amax() <= 1e-13);
        }
        assert!(matches!(
            srv_transform_weighted(&c, Some(&[1.0])),
            Err(SrvtError::BadWeights { .. })
        ));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let mut rng = StdRng::seed_from_u64(49);
        let q1 = srv_transform(&random_curve(&mut rng, 1, 3)).unwrap();
        let q2 = srv_transform(&random_curve(&mut rng, 2, 3)).unwrap();
        assert!(matches!(
            l2_distance(&q1, &q2),
            Err(SrvtError::DimensionMismatch { .. })
        ));
    }
}
