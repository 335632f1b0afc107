//! Piecewise-geodesic curves on SO(3)^d.
//!
//! A curve is a list of knot times on [0,1] and one pose per knot; between
//! knots every joint follows its geodesic at constant speed. This is the
//! curve model for animations: evaluation, normalization to curves starting
//! at the identity, reparameterization, and the right-trivialized
//! (Maurer–Cartan) derivative, which is piecewise constant by construction.

use crate::lie::{log_so3, LieError, Pose};
use nalgebra::DVector;
use rand::Rng;
use thiserror::Error;

/// Segments with speed at or below this are considered zero-velocity
/// (repeated frames, pauses in the capture).
pub const SPEED_TOL: f64 = 1e-8;

// Knots closer than this are merged when curves are re-knotted.
const KNOT_MERGE_TOL: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error("need at least 2 frames, got {got}")]
    TooFewFrames { got: usize },
    #[error("knot times must be strictly increasing")]
    NonMonotoneTimes,
    #[error("reparameterization must be a strictly increasing bijection of [0,1]")]
    NonMonotone,
    #[error("parameter {t} outside the curve domain [0,1]")]
    OutOfDomain { t: f64 },
    #[error("joint count mismatch: expected {expected}, got {got}")]
    JointCountMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Lie(#[from] LieError),
}

/// A piecewise-linear orientation-preserving bijection of [0,1], the
/// discrete stand-in for a smooth reparameterization.
#[derive(Debug, Clone, PartialEq)]
pub struct Reparameterization {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl Reparameterization {
    /// Builds a reparameterization from matching breakpoint/value lists.
    /// Both must be strictly increasing with endpoints 0 and 1 (an absolute
    /// slack of 1e-12 on the endpoints is snapped to exact).
    pub fn new(mut breakpoints: Vec<f64>, mut values: Vec<f64>) -> Result<Self, CurveError> {
        if breakpoints.len() < 2 || breakpoints.len() != values.len() {
            return Err(CurveError::NonMonotone);
        }
        for seq in [&mut breakpoints, &mut values] {
            let last = seq.len() - 1;
            if seq[0].abs() > 1e-12 || (seq[last] - 1.0).abs() > 1e-12 {
                return Err(CurveError::NonMonotone);
            }
            seq[0] = 0.0;
            seq[last] = 1.0;
            if seq.iter().any(|x| !x.is_finite()) || seq.windows(2).any(|w| w[1] <= w[0]) {
                return Err(CurveError::NonMonotone);
            }
        }
        Ok(Reparameterization { breakpoints, values })
    }

    pub fn identity() -> Self {
        Reparameterization {
            breakpoints: vec![0.0, 1.0],
            values: vec![0.0, 1.0],
        }
    }

    /// Random warp with up to `max_interior` interior breakpoints. Slopes
    /// stay within [((1−strength)/(1+strength))², ((1+strength)/(1−strength))²],
    /// so `strength = 1/3` bounds them to [1/4, 4].
    pub fn random(rng: &mut impl Rng, max_interior: usize, strength: f64) -> Self {
        assert!((0.0..1.0).contains(&strength));
        let n = rng.gen_range(0..=max_interior) + 1;
        let (lo, hi) = (1.0 - strength, 1.0 + strength);
        let mut xs = vec![0.0];
        let mut ys = vec![0.0];
        for _ in 0..n {
            xs.push(xs.last().unwrap() + rng.gen_range(lo..hi));
            ys.push(ys.last().unwrap() + rng.gen_range(lo..hi));
        }
        let (xt, yt) = (*xs.last().unwrap(), *ys.last().unwrap());
        for x in &mut xs {
            *x /= xt;
        }
        for y in &mut ys {
            *y /= yt;
        }
        Reparameterization::new(xs, ys).expect("generated warp is monotone")
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Piecewise-linear evaluation; the argument is clamped to [0,1].
    pub fn evaluate(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, 1.0);
        let i = segment_index(&self.breakpoints, s);
        if s == self.breakpoints[i] {
            return self.values[i];
        }
        let (s0, s1) = (self.breakpoints[i], self.breakpoints[i + 1]);
        let (v0, v1) = (self.values[i], self.values[i + 1]);
        v0 + (s - s0) / (s1 - s0) * (v1 - v0)
    }

    /// The inverse bijection (swap breakpoints and values).
    pub fn inverse(&self) -> Self {
        Reparameterization {
            breakpoints: self.values.clone(),
            values: self.breakpoints.clone(),
        }
    }
}

/// Index of the segment containing `t`: largest `i` with `times[i] <= t`,
/// capped at the last segment.
pub(crate) fn segment_index(times: &[f64], t: f64) -> usize {
    let i = times.partition_point(|&x| x <= t);
    i.saturating_sub(1).min(times.len() - 2)
}

/// The right-trivialized derivative of a piecewise-geodesic curve: one
/// constant slope in ℝ^{3d} per knot interval (coordinates of the
/// Maurer–Cartan form along the curve, stacked joint by joint).
#[derive(Debug, Clone, PartialEq)]
pub struct LogDerivative {
    times: Vec<f64>,
    slopes: Vec<DVector<f64>>,
}

impl LogDerivative {
    pub fn new(times: Vec<f64>, slopes: Vec<DVector<f64>>) -> Result<Self, CurveError> {
        if times.len() < 2 || slopes.len() + 1 != times.len() {
            return Err(CurveError::TooFewFrames { got: times.len() });
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CurveError::NonMonotoneTimes);
        }
        let dim = slopes[0].len();
        if slopes.iter().any(|b| b.len() != dim || b.iter().any(|x| !x.is_finite())) {
            return Err(CurveError::JointCountMismatch {
                expected: dim,
                got: slopes.iter().map(|b| b.len()).find(|&l| l != dim).unwrap_or(dim),
            });
        }
        Ok(LogDerivative { times, slopes })
    }

    /// Interval boundaries t₀ < … < t_m.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// One slope per interval.
    pub fn slopes(&self) -> &[DVector<f64>] {
        &self.slopes
    }

    pub fn dim(&self) -> usize {
        self.slopes[0].len()
    }

    pub fn segment_count(&self) -> usize {
        self.slopes.len()
    }
}

/// An animation modeled as a curve on SO(3)^d: knot times on [0,1] and one
/// pose per knot, geodesic in between.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseGeodesicCurve {
    times: Vec<f64>,
    poses: Vec<Pose>,
    zero_speed: bool,
}

impl PiecewiseGeodesicCurve {
    /// Builds a curve through the given frames. With no explicit times the
    /// knots are uniform on [0,1]; explicit times are shifted and scaled so
    /// the domain is exactly [0,1].
    pub fn from_frames(frames: Vec<Pose>, times: Option<&[f64]>) -> Result<Self, CurveError> {
        if frames.len() < 2 {
            return Err(CurveError::TooFewFrames { got: frames.len() });
        }
        let d = frames[0].joint_count();
        if let Some(bad) = frames.iter().find(|f| f.joint_count() != d) {
            return Err(CurveError::JointCountMismatch {
                expected: d,
                got: bad.joint_count(),
            });
        }
        let times = match times {
            None => uniform_times(frames.len()),
            Some(t) => {
                if t.len() != frames.len() || t.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(CurveError::NonMonotoneTimes);
                }
                let (t0, t1) = (t[0], t[t.len() - 1]);
                let mut scaled: Vec<f64> = t.iter().map(|x| (x - t0) / (t1 - t0)).collect();
                scaled[0] = 0.0;
                *scaled.last_mut().unwrap() = 1.0;
                scaled
            }
        };
        Ok(Self::from_parts(times, frames))
    }

    fn from_parts(times: Vec<f64>, poses: Vec<Pose>) -> Self {
        let zero_speed = (0..times.len() - 1).any(|k| {
            let dt = times[k + 1] - times[k];
            let speed2: f64 = poses[k]
                .rotations()
                .iter()
                .zip(poses[k + 1].rotations())
                .map(|(a, b)| {
                    let ang = b.compose(&a.inverse()).angle();
                    ang * ang
                })
                .sum();
            speed2.sqrt() / dt <= SPEED_TOL
        });
        PiecewiseGeodesicCurve { times, poses, zero_speed }
    }

    pub fn joint_count(&self) -> usize {
        self.poses[0].joint_count()
    }

    pub fn knot_times(&self) -> &[f64] {
        &self.times
    }

    pub fn knot_poses(&self) -> &[Pose] {
        &self.poses
    }

    pub fn segment_count(&self) -> usize {
        self.times.len() - 1
    }

    /// True if some segment has speed below [`SPEED_TOL`] (repeated frames).
    pub fn has_zero_speed_segment(&self) -> bool {
        self.zero_speed
    }

    /// Evaluates the curve. Knots return the stored pose exactly; inside a
    /// segment every joint is interpolated along its geodesic.
    pub fn evaluate(&self, t: f64) -> Result<Pose, CurveError> {
        if !(-1e-12..=1.0 + 1e-12).contains(&t) {
            return Err(CurveError::OutOfDomain { t });
        }
        let t = t.clamp(0.0, 1.0);
        let k = segment_index(&self.times, t);
        let local = (t - self.times[k]) / (self.times[k + 1] - self.times[k]);
        if local == 0.0 {
            return Ok(self.poses[k].clone());
        }
        if local == 1.0 {
            return Ok(self.poses[k + 1].clone());
        }
        Ok(Pose::interp(&self.poses[k], &self.poses[k + 1], local)?)
    }

    /// Right-translates the whole curve by the inverse of its initial pose,
    /// so the result starts at the group identity. Idempotent, and leaves
    /// the log-derivative unchanged.
    pub fn normalize_to_identity(&self) -> Self {
        let g = self.poses[0].inverse();
        let poses = self
            .poses
            .iter()
            .map(|p| p.right_translate(&g).expect("equal joint counts"))
            .collect();
        PiecewiseGeodesicCurve {
            times: self.times.clone(),
            poses,
            zero_speed: self.zero_speed,
        }
    }

    /// Right-translates every pose by `g`.
    pub fn right_translate(&self, g: &Pose) -> Result<Self, CurveError> {
        let poses = self
            .poses
            .iter()
            .map(|p| p.right_translate(g))
            .collect::<Result<_, _>>()?;
        Ok(PiecewiseGeodesicCurve {
            times: self.times.clone(),
            poses,
            zero_speed: self.zero_speed,
        })
    }

    /// Precomposition with a piecewise-linear reparameterization. The result
    /// is knotted at the union of φ's breakpoints and the φ-preimages of the
    /// original knots, so its segments are again exactly geodesic and
    /// `result(s) = self(φ(s))` pointwise.
    pub fn reparameterize(&self, phi: &Reparameterization) -> Result<Self, CurveError> {
        let inv = phi.inverse();
        let mut knots: Vec<f64> = phi.breakpoints().to_vec();
        knots.extend(self.times.iter().map(|&t| inv.evaluate(t)));
        knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        knots.dedup_by(|a, b| (*a - *b).abs() <= KNOT_MERGE_TOL);
        knots[0] = 0.0;
        *knots.last_mut().unwrap() = 1.0;
        let poses = knots
            .iter()
            .map(|&s| self.evaluate(phi.evaluate(s)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::from_parts(knots, poses))
    }

    /// The piecewise-constant right-trivialized derivative: on segment k,
    /// per joint j, `vee(log(g_{k+1,j} · g_{k,j}ᵀ)) / Δt_k`, stacked into
    /// ℝ^{3d} in joint order.
    pub fn log_derivative(&self) -> Result<LogDerivative, CurveError> {
        let d = self.joint_count();
        let mut slopes = Vec::with_capacity(self.segment_count());
        for k in 0..self.segment_count() {
            let dt = self.times[k + 1] - self.times[k];
            let mut b = DVector::zeros(3 * d);
            for (j, (a, g)) in self.poses[k]
                .rotations()
                .iter()
                .zip(self.poses[k + 1].rotations())
                .enumerate()
            {
                let v = log_so3(&g.compose(&a.inverse()))?;
                b[3 * j] = v.x / dt;
                b[3 * j + 1] = v.y / dt;
                b[3 * j + 2] = v.z / dt;
            }
            slopes.push(b);
        }
        Ok(LogDerivative {
            times: self.times.clone(),
            slopes,
        })
    }

    /// Time reversal t ↦ 1 − t.
    pub fn reverse(&self) -> Self {
        let times = self.times.iter().rev().map(|t| 1.0 - t).collect();
        let poses = self.poses.iter().rev().cloned().collect();
        PiecewiseGeodesicCurve {
            times,
            poses,
            zero_speed: self.zero_speed,
        }
    }

    /// Concatenation: `self` on [0,1/2], then `other` (right-translated so
    /// the junction matches) on [1/2,1]. The log-derivative of `other` is
    /// unchanged by the translation.
    pub fn concat(&self, other: &Self) -> Result<Self, CurveError> {
        if self.joint_count() != other.joint_count() {
            return Err(CurveError::JointCountMismatch {
                expected: self.joint_count(),
                got: other.joint_count(),
            });
        }
        let mut times: Vec<f64> = self.times.iter().map(|t| t / 2.0).collect();
        times.extend(other.times.iter().skip(1).map(|t| 0.5 + t / 2.0));
        let shift = other.poses[0]
            .inverse()
            .compose(self.poses.last().unwrap())?;
        let mut poses = self.poses.clone();
        for p in other.poses.iter().skip(1) {
            poses.push(p.right_translate(&shift)?);
        }
        Ok(Self::from_parts(times, poses))
    }

    /// Returns the same curve with an extra knot at `t` (carrying the
    /// interpolated pose). A no-op when `t` already is a knot.
    pub fn with_knot(&self, t: f64) -> Result<Self, CurveError> {
        if self.times.iter().any(|&x| (x - t).abs() <= KNOT_MERGE_TOL) {
            return Ok(self.clone());
        }
        let pose = self.evaluate(t)?;
        let k = segment_index(&self.times, t);
        let mut times = self.times.clone();
        let mut poses = self.poses.clone();
        times.insert(k + 1, t);
        poses.insert(k + 1, pose);
        Ok(PiecewiseGeodesicCurve {
            times,
            poses,
            zero_speed: self.zero_speed,
        })
    }
}

pub(crate) fn uniform_times(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}
