//! The canonical JSON clip format: per frame, per joint, one axis-angle
//! triple in radians. This is the interchange format between the parsers,
//! the synthetic generator, and the analysis pipeline.
//!
//! The optional `times` field carries non-uniform knot times for clips whose
//! frames are not equally spaced (reparameterized synthetic clips); when it
//! is absent frames are uniform on [0,1].

use super::MocapError;
use crate::curve::PiecewiseGeodesicCurve;
use crate::lie::{exp_so3, log_so3, Pose};
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipRecord {
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub joints: Vec<String>,
    /// `frames[frame][joint]` = axis-angle triple, radians.
    pub frames: Vec<Vec<[f64; 3]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frame_rate: Option<f64>,
}

impl ClipRecord {
    /// Reconstructs the curve: one rotation per joint per frame via the
    /// exponential map, knotted at `times` (uniform when absent).
    pub fn to_curve(&self) -> Result<PiecewiseGeodesicCurve, MocapError> {
        let d = self.joints.len();
        let mut poses = Vec::with_capacity(self.frames.len());
        for (f, frame) in self.frames.iter().enumerate() {
            if frame.len() != d {
                return Err(MocapError::BadClip {
                    id: self.id.clone(),
                    what: format!("frame {f} has {} joints, expected {d}", frame.len()),
                });
            }
            poses.push(Pose::new(
                frame
                    .iter()
                    .map(|v| exp_so3(&Vector3::new(v[0], v[1], v[2])))
                    .collect(),
            ));
        }
        Ok(PiecewiseGeodesicCurve::from_frames(
            poses,
            self.times.as_deref(),
        )?)
    }

    /// Restricts the clip to the named joints, in the order given.
    pub fn joint_subset(&self, names: &[String]) -> Result<ClipRecord, MocapError> {
        let indices: Vec<usize> = names
            .iter()
            .map(|n| {
                self.joints
                    .iter()
                    .position(|j| j == n)
                    .ok_or_else(|| MocapError::UnknownJoint { name: n.clone() })
            })
            .collect::<Result<_, _>>()?;
        Ok(ClipRecord {
            id: self.id.clone(),
            label: self.label.clone(),
            joints: names.to_vec(),
            frames: self
                .frames
                .iter()
                .map(|f| indices.iter().map(|&i| f[i]).collect())
                .collect(),
            times: self.times.clone(),
            frame_rate: self.frame_rate,
        })
    }

    /// Stores a curve as a clip: per knot, per joint, the logarithm of the
    /// rotation. Knot times are recorded only when they are not uniform.
    pub fn from_curve(
        id: impl Into<String>,
        label: Option<String>,
        joints: Vec<String>,
        curve: &PiecewiseGeodesicCurve,
    ) -> Result<Self, MocapError> {
        let id = id.into();
        if joints.len() != curve.joint_count() {
            return Err(MocapError::BadClip {
                id,
                what: format!(
                    "{} joint names for {} joints",
                    joints.len(),
                    curve.joint_count()
                ),
            });
        }
        let mut frames = Vec::with_capacity(curve.knot_poses().len());
        for pose in curve.knot_poses() {
            let mut frame = Vec::with_capacity(pose.joint_count());
            for r in pose.rotations() {
                let v = log_so3(r)?;
                frame.push([v.x, v.y, v.z]);
            }
            frames.push(frame);
        }
        let n = curve.knot_times().len();
        let uniform = curve
            .knot_times()
            .iter()
            .enumerate()
            .all(|(i, &t)| (t - i as f64 / (n - 1) as f64).abs() <= 1e-12);
        Ok(ClipRecord {
            id,
            label,
            joints,
            frames,
            times: if uniform {
                None
            } else {
                Some(curve.knot_times().to_vec())
            },
            frame_rate: None,
        })
    }
}

/// A collection of labeled clips; the unit the pipeline works on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct LabeledDataset {
    pub clips: Vec<ClipRecord>,
}

impl LabeledDataset {
    pub fn from_json(text: &str) -> Result<Self, MocapError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("dataset serializes")
    }

    pub fn ids(&self) -> Vec<String> {
        self.clips.iter().map(|c| c.id.clone()).collect()
    }

    /// Labels for classification; every clip must carry one.
    pub fn labels(&self) -> Result<Vec<String>, MocapError> {
        self.clips
            .iter()
            .map(|c| {
                c.label.clone().ok_or_else(|| MocapError::BadClip {
                    id: c.id.clone(),
                    what: "clip has no label".to_string(),
                })
            })
            .collect()
    }

    /// Sorted unique class names among the labeled clips.
    pub fn class_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self
            .clips
            .iter()
            .filter_map(|c| c.label.clone())
            .collect();
        names.sort();
        names.dedup();
        names
    }

    pub fn curves(&self) -> Result<Vec<PiecewiseGeodesicCurve>, MocapError> {
        self.clips.iter().map(|c| c.to_curve()).collect()
    }

    /// Curves restricted to a joint subset (all joints when `None`).
    pub fn curves_with_joints(
        &self,
        joints: Option<&[String]>,
    ) -> Result<Vec<PiecewiseGeodesicCurve>, MocapError> {
        match joints {
            None => self.curves(),
            Some(names) => self
                .clips
                .iter()
                .map(|c| c.joint_subset(names)?.to_curve())
                .collect(),
        }
    }
}
