//! SO(3) and SO(3)^d primitives: hat/vee maps, exponential and logarithm,
//! geodesic interpolation, and componentwise pose operations.
//!
//! Conventions used throughout the crate:
//!
//! * angles are radians,
//! * `hat(v) * y == v × y`, so `hat((1,0,0))` generates a rotation about x,
//! * the canonical axis-angle representative has norm ≤ π.

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

/// Axis-angle vector: rotation axis scaled by the rotation angle (radians).
pub type AxisVector = Vector3<f64>;

/// Orthonormality tolerance for a valid [`Rotation`].
pub const ROTATION_TOL: f64 = 1e-9;

/// Drift threshold above which ingested matrices are re-orthonormalized.
pub const REORTHONORMALIZE_THRESHOLD: f64 = 1e-8;

// trace ≤ -1 + NEAR_PI_TRACE switches log_so3 to the symmetric-part branch.
const NEAR_PI_TRACE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LieError {
    #[error("rotation angle at π with no stable axis extraction")]
    AngleAtPi,
    #[error("matrix is not a rotation (drift {drift:.3e}, det {det:.3e})")]
    InvalidRotation { drift: f64, det: f64 },
    #[error("joint count mismatch: expected {expected}, got {got}")]
    JointCountMismatch { expected: usize, got: usize },
}

/// Maps an axis vector to the skew-symmetric matrix with `hat(v) * y = v × y`.
///
/// ```text
/// hat(v) = |  0   -v_z   v_y |
///          |  v_z   0   -v_x |
///          | -v_y  v_x    0  |
/// ```
#[inline]
pub fn hat(v: &AxisVector) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Inverse of [`hat`]: extracts the axis vector from a skew-symmetric matrix.
#[inline]
pub fn vee(m: &Matrix3<f64>) -> AxisVector {
    Vector3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)])
}

/// A rotation matrix in SO(3).
///
/// Invariants: columns orthonormal and determinant +1, both to [`ROTATION_TOL`].
/// Values built through this API keep the invariants; raw matrices enter
/// through [`Rotation::from_matrix`], which re-orthonormalizes when the drift
/// exceeds [`REORTHONORMALIZE_THRESHOLD`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(Matrix3<f64>);

impl Rotation {
    pub fn identity() -> Self {
        Rotation(Matrix3::identity())
    }

    /// Validates `m` as a rotation, projecting it back onto SO(3) if the
    /// orthonormality drift exceeds [`REORTHONORMALIZE_THRESHOLD`].
    pub fn from_matrix(m: Matrix3<f64>) -> Result<Self, LieError> {
        let det = m.determinant();
        let drift = orthonormality_drift(&m);
        if !drift.is_finite() || det <= 0.0 {
            return Err(LieError::InvalidRotation { drift, det });
        }
        if drift <= REORTHONORMALIZE_THRESHOLD {
            return Ok(Rotation(m));
        }
        let r = project_onto_so3(&m)?;
        Ok(r)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    /// Group product `self · other`.
    pub fn compose(&self, other: &Rotation) -> Rotation {
        Rotation(self.0 * other.0)
    }

    /// Inverse, i.e. the transpose.
    pub fn inverse(&self) -> Rotation {
        Rotation(self.0.transpose())
    }

    /// Rotation angle in [0, π]. Computed from both the symmetric and the
    /// skew part; acos of the trace alone loses half the digits near 0 and π.
    pub fn angle(&self) -> f64 {
        let c = ((self.0.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
        let s = vee(&(self.0 - self.0.transpose())).norm() / 2.0;
        s.atan2(c)
    }

    /// Max-norm of RᵀR − I.
    pub fn orthonormality_drift(&self) -> f64 {
        orthonormality_drift(&self.0)
    }
}

fn orthonormality_drift(m: &Matrix3<f64>) -> f64 {
    let gram = m.transpose() * m - Matrix3::identity();
    gram.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

// Polar projection: nearest rotation in Frobenius norm, via SVD.
fn project_onto_so3(m: &Matrix3<f64>) -> Result<Rotation, LieError> {
    let svd = m.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => {
            return Err(LieError::InvalidRotation {
                drift: orthonormality_drift(m),
                det: m.determinant(),
            })
        }
    };
    let mut r = u * v_t;
    if r.determinant() < 0.0 {
        // Flip the weakest singular direction to land in SO(3).
        let mut u = u;
        u.column_mut(2).neg_mut();
        r = u * v_t;
    }
    if orthonormality_drift(&r) > ROTATION_TOL {
        return Err(LieError::InvalidRotation {
            drift: orthonormality_drift(&r),
            det: r.determinant(),
        });
    }
    Ok(Rotation(r))
}

/// Exponential map so(3) → SO(3) (Rodrigues' formula).
///
/// The rotation angle equals `‖v‖` and the axis is parallel to `v`.
pub fn exp_so3(v: &AxisVector) -> Rotation {
    let theta2 = v.norm_squared();
    let theta = theta2.sqrt();
    let k = hat(v);
    // sin(θ)/θ and (1-cos(θ))/θ² with series fallbacks near zero.
    let (a, b) = if theta < 1e-4 {
        (
            1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0,
            0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0,
        )
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / theta2)
    };
    Rotation(Matrix3::identity() + a * k + b * (k * k))
}

/// Logarithm map SO(3) → so(3), returning the canonical representative with
/// norm ≤ π.
///
/// Near angle π (trace ≤ −1 + 1e-6) the axis is extracted from the symmetric
/// part of R, the only stable source there. The two antipodal axes are
/// disambiguated by the skew part when it is nonzero; at angle exactly π both
/// are equivalent and the representative with its first nonzero component
/// positive is returned.
pub fn log_so3(r: &Rotation) -> Result<AxisVector, LieError> {
    let m = r.matrix();
    let c = ((m.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    // w = sin(θ)·axis
    let w = vee(&(m - m.transpose())) / 2.0;
    let s = w.norm();
    let theta = s.atan2(c);

    if c > -1.0 + NEAR_PI_TRACE {
        if theta < 1e-8 {
            // θ/sin(θ) → 1; w itself is accurate to O(θ³).
            return Ok(w);
        }
        return Ok(w * (theta / s));
    }

    // Near π: (sym(R) − cI)/(1−c) = a·aᵀ exactly, for unit axis a.
    let sym = (m + m.transpose()) / 2.0;
    let outer = (sym - Matrix3::identity() * c) / (1.0 - c);
    let (pivot, _) = (0..3)
        .map(|i| (i, outer[(i, i)]))
        .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    if outer[(pivot, pivot)] <= 1e-8 {
        return Err(LieError::AngleAtPi);
    }
    let diag = outer[(pivot, pivot)].sqrt();
    let mut axis = Vector3::new(
        outer[(pivot, 0)] / diag,
        outer[(pivot, 1)] / diag,
        outer[(pivot, 2)] / diag,
    );
    axis.normalize_mut();
    if s > 1e-12 {
        if axis.dot(&w) < 0.0 {
            axis = -axis;
        }
    } else if let Some(first) = axis.iter().find(|x| x.abs() > 1e-12) {
        if *first < 0.0 {
            axis = -axis;
        }
    }
    Ok(axis * theta)
}

/// Geodesic from `a` to `b`: `exp(s·log(b·aᵀ))·a`, so the result equals `a`
/// at s=0 and `b` at s=1 and moves with constant angular speed.
pub fn geodesic_interp(a: &Rotation, b: &Rotation, s: f64) -> Result<Rotation, LieError> {
    let rel = log_so3(&b.compose(&a.inverse()))?;
    Ok(exp_so3(&(rel * s)).compose(a))
}

/// One animation frame: an element of SO(3)^d (`d` independently rotating
/// joints).
#[derive(Debug, Clone, PartialEq)]
pub struct Pose {
    rotations: Vec<Rotation>,
}

impl Pose {
    pub fn new(rotations: Vec<Rotation>) -> Self {
        Pose { rotations }
    }

    /// The group identity: every joint the identity rotation.
    pub fn identity(joint_count: usize) -> Self {
        Pose {
            rotations: vec![Rotation::identity(); joint_count],
        }
    }

    pub fn joint_count(&self) -> usize {
        self.rotations.len()
    }

    pub fn rotations(&self) -> &[Rotation] {
        &self.rotations
    }

    pub fn rotation(&self, joint: usize) -> &Rotation {
        &self.rotations[joint]
    }

    fn check_joints(&self, other: &Pose) -> Result<(), LieError> {
        if self.joint_count() != other.joint_count() {
            return Err(LieError::JointCountMismatch {
                expected: self.joint_count(),
                got: other.joint_count(),
            });
        }
        Ok(())
    }

    /// Componentwise group product `self · other`.
    pub fn compose(&self, other: &Pose) -> Result<Pose, LieError> {
        self.check_joints(other)?;
        Ok(Pose {
            rotations: self
                .rotations
                .iter()
                .zip(&other.rotations)
                .map(|(a, b)| a.compose(b))
                .collect(),
        })
    }

    /// Componentwise inverse.
    pub fn inverse(&self) -> Pose {
        Pose {
            rotations: self.rotations.iter().map(Rotation::inverse).collect(),
        }
    }

    /// Right translation `R_g(self) = self · g`.
    pub fn right_translate(&self, g: &Pose) -> Result<Pose, LieError> {
        self.compose(g)
    }

    /// Componentwise geodesic interpolation between two poses.
    pub fn interp(a: &Pose, b: &Pose, s: f64) -> Result<Pose, LieError> {
        a.check_joints(b)?;
        let rotations = a
            .rotations
            .iter()
            .zip(&b.rotations)
            .map(|(ra, rb)| geodesic_interp(ra, rb, s))
            .collect::<Result<_, _>>()?;
        Ok(Pose { rotations })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    pub(crate) fn random_axis_vector(rng: &mut impl Rng, max_norm: f64) -> AxisVector {
        loop {
            let v = Vector3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let n = v.norm();
            if n > 1e-3 && n <= 1.0 {
                return v * (rng.gen_range(0.0..1.0) * max_norm / n);
            }
        }
    }

    #[test]
    fn hat_of_zero_is_zero() {
        assert_eq!(hat(&Vector3::zeros()), Matrix3::zeros());
    }

    #[test]
    fn hat_convention() {
        let m = hat(&Vector3::new(1.0, 0.0, 0.0));
        let expected = Matrix3::new(0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0);
        assert_eq!(m, expected);
    }

    #[test]
    fn hat_matches_cross_product() {
        let v = Vector3::new(1.0, 2.0, 3.0);
        let y = Vector3::new(-0.4, 0.7, 0.1);
        assert_relative_eq!(hat(&v) * y, v.cross(&y), epsilon = 1e-15);
    }

    #[test]
    fn vee_inverts_hat() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..20 {
            let v = random_axis_vector(&mut rng, 3.0);
            assert_eq!(vee(&hat(&v)), v);
        }
    }

    #[test]
    fn exp_of_zero_is_identity() {
        assert_eq!(exp_so3(&Vector3::zeros()), Rotation::identity());
    }

    #[test]
    fn exp_quarter_turn_about_x() {
        let r = exp_so3(&Vector3::new(PI / 2.0, 0.0, 0.0));
        let expected = Matrix3::new(1.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0);
        assert_relative_eq!(*r.matrix(), expected, epsilon = 1e-15);
    }

    #[test]
    fn exp_angle_and_axis() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..50 {
            let v = random_axis_vector(&mut rng, PI - 1e-3);
            let r = exp_so3(&v);
            assert!(r.orthonormality_drift() < 1e-12);
            assert_relative_eq!(r.angle(), v.norm(), epsilon = 1e-9);
        }
    }

    #[test]
    fn log_of_identity_is_zero() {
        assert_eq!(log_so3(&Rotation::identity()).unwrap(), Vector3::zeros());
    }

    #[test]
    fn log_quarter_turn_about_x() {
        let r = exp_so3(&Vector3::new(PI / 2.0, 0.0, 0.0));
        let v = log_so3(&r).unwrap();
        assert_relative_eq!(v, Vector3::new(PI / 2.0, 0.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn log_exp_roundtrip() {
        let mut rng = StdRng::seed_from_u64(13);
        for _ in 0..200 {
            let v = random_axis_vector(&mut rng, PI - 1e-3);
            let back = log_so3(&exp_so3(&v)).unwrap();
            assert_relative_eq!(back, v, epsilon = 1e-9);
        }
    }

    #[test]
    fn log_near_pi_recovers_axis_angle() {
        // Compare against the axis extracted from the symmetric-part oracle
        // a·aᵀ = (sym(R) − cos(θ)I)/(1 − cos(θ)); for a z-rotation that is
        // diag(0,0,1), so the expected result is (0, 0, π − 1e-4).
        let theta = PI - 1e-4;
        let r = exp_so3(&Vector3::new(0.0, 0.0, theta));
        let v = log_so3(&r).unwrap();
        assert!((v - Vector3::new(0.0, 0.0, theta)).amax() <= 1e-7);

        // Negative-axis case must not collapse onto the positive one.
        let r = exp_so3(&Vector3::new(0.0, 0.0, -theta));
        let v = log_so3(&r).unwrap();
        assert!((v - Vector3::new(0.0, 0.0, -theta)).amax() <= 1e-7);
    }

    #[test]
    fn log_at_exactly_pi() {
        for axis in [
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(0.0, 1.0, 0.0),
            Vector3::new(1.0, 2.0, 2.0).normalize(),
            Vector3::new(-1.0, 0.4, 0.2).normalize(),
        ] {
            let r = exp_so3(&(axis * PI));
            let v = log_so3(&r).unwrap();
            assert_relative_eq!(v.norm(), PI, epsilon = 1e-9);
            // exp(v) must reproduce r even though the sign is canonicalized.
            assert_relative_eq!(*exp_so3(&v).matrix(), *r.matrix(), epsilon = 1e-9);
        }
    }

    #[test]
    fn geodesic_endpoints() {
        let mut rng = StdRng::seed_from_u64(17);
        let a = exp_so3(&random_axis_vector(&mut rng, 2.0));
        let b = exp_so3(&random_axis_vector(&mut rng, 2.0));
        assert_relative_eq!(
            *geodesic_interp(&a, &b, 0.0).unwrap().matrix(),
            *a.matrix(),
            epsilon = 1e-14
        );
        assert_relative_eq!(
            *geodesic_interp(&a, &b, 1.0).unwrap().matrix(),
            *b.matrix(),
            epsilon = 1e-12
        );
        assert_relative_eq!(
            *geodesic_interp(&a, &a, 0.37).unwrap().matrix(),
            *a.matrix(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn geodesic_same_axis_closed_form() {
        let a = Rotation::identity();
        let b = exp_so3(&Vector3::new(PI / 2.0, 0.0, 0.0));
        let mid = geodesic_interp(&a, &b, 0.5).unwrap();
        let expected = exp_so3(&Vector3::new(PI / 4.0, 0.0, 0.0));
        assert_relative_eq!(*mid.matrix(), *expected.matrix(), epsilon = 1e-14);
    }

    #[test]
    fn geodesic_time_reversal_symmetry() {
        let mut rng = StdRng::seed_from_u64(19);
        for _ in 0..20 {
            let a = exp_so3(&random_axis_vector(&mut rng, 2.0));
            let b = exp_so3(&random_axis_vector(&mut rng, 2.0));
            let s = rng.gen_range(0.0..1.0);
            let fwd = geodesic_interp(&a, &b, s).unwrap();
            let rev = geodesic_interp(&b, &a, 1.0 - s).unwrap();
            assert_relative_eq!(*fwd.matrix(), *rev.matrix(), epsilon = 1e-10);
        }
    }

    #[test]
    fn geodesic_constant_speed() {
        let mut rng = StdRng::seed_from_u64(23);
        let a = exp_so3(&random_axis_vector(&mut rng, 1.5));
        let b = exp_so3(&random_axis_vector(&mut rng, 1.5));
        let total = b.compose(&a.inverse()).angle();
        for k in 0..5 {
            let s0 = k as f64 / 5.0;
            let s1 = (k + 1) as f64 / 5.0;
            let r0 = geodesic_interp(&a, &b, s0).unwrap();
            let r1 = geodesic_interp(&a, &b, s1).unwrap();
            let step = r1.compose(&r0.inverse()).angle();
            assert_relative_eq!(step, total / 5.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn composition_drift_stays_small() {
        let mut rng = StdRng::seed_from_u64(29);
        let mut acc = Rotation::identity();
        for _ in 0..10_000 {
            acc = acc.compose(&exp_so3(&random_axis_vector(&mut rng, 2.5)));
        }
        assert!(acc.orthonormality_drift() < 1e-6);
    }

    #[test]
    fn from_matrix_reorthonormalizes_drifted_input() {
        let r = exp_so3(&Vector3::new(0.3, -0.8, 0.5));
        let drifted = r.matrix() + Matrix3::from_element(3e-6);
        let fixed = Rotation::from_matrix(drifted).unwrap();
        assert!(fixed.orthonormality_drift() <= ROTATION_TOL);
        assert!((fixed.matrix() - r.matrix()).amax() < 1e-4);
    }

    #[test]
    fn from_matrix_rejects_reflection() {
        let mut m = Matrix3::identity();
        m[(0, 0)] = -1.0;
        assert!(matches!(
            Rotation::from_matrix(m),
            Err(LieError::InvalidRotation { .. })
        ));
    }

    #[test]
    fn pose_identity_and_inverse() {
        let mut rng = StdRng::seed_from_u64(31);
        let p = Pose::new(
            (0..3)
                .map(|_| exp_so3(&random_axis_vector(&mut rng, 2.0)))
                .collect(),
        );
        let e = Pose::identity(3);
        assert_eq!(p.right_translate(&e).unwrap(), p);
        let prod = p.compose(&p.inverse()).unwrap();
        for r in prod.rotations() {
            assert_relative_eq!(*r.matrix(), Matrix3::identity(), epsilon = 1e-14);
        }
    }

    #[test]
    fn pose_interp_at_zero_returns_first() {
        let mut rng = StdRng::seed_from_u64(37);
        let a = Pose::new(
            (0..2)
                .map(|_| exp_so3(&random_axis_vector(&mut rng, 2.0)))
                .collect(),
        );
        let b = Pose::new(
            (0..2)
                .map(|_| exp_so3(&random_axis_vector(&mut rng, 2.0)))
                .collect(),
        );
        let p0 = Pose::interp(&a, &b, 0.0).unwrap();
        for (r, e) in p0.rotations().iter().zip(a.rotations()) {
            assert_relative_eq!(*r.matrix(), *e.matrix(), epsilon = 1e-14);
        }
    }

    #[test]
    fn pose_joint_count_mismatch() {
        let a = Pose::identity(2);
        let b = Pose::identity(3);
        assert!(matches!(
            a.compose(&b),
            Err(LieError::JointCountMismatch { expected: 2, got: 3 })
        ));
    }
}
