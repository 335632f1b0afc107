//! Ingestion of CMU-format skeletons and animations (ASF/AMC), conversion to
//! pose sequences and curves, the canonical JSON clip format, and synthetic
//! labeled dataset generation.

mod amc;
mod asf;
mod clips;
mod synth;

pub use amc::parse_amc;
pub use asf::parse_asf;
pub use clips::{ClipRecord, LabeledDataset};
pub use synth::{synth_classes, SynthConfig};

use crate::curve::{CurveError, PiecewiseGeodesicCurve};
use crate::lie::{exp_so3, LieError, Pose, Rotation};
use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MocapError {
    #[error("missing required section :{name}")]
    MissingSection { name: &'static str },
    #[error("unknown dof token {token:?} (line {line})")]
    UnknownDof { token: String, line: usize },
    #[error("hierarchy references unknown joint {parent:?} (line {line})")]
    DanglingParent { parent: String, line: usize },
    #[error("joint {joint:?}: expected {expected} dof values, got {got} (line {line})")]
    DofCountMismatch {
        joint: String,
        expected: usize,
        got: usize,
        line: usize,
    },
    #[error("unknown joint {name:?}")]
    UnknownJoint { name: String },
    #[error("joint {joint:?} has no rotational dofs")]
    NoRotationalDofs { joint: String },
    #[error("frame indices must be contiguous from 1: expected {expected}, got {got} (line {line})")]
    NonContiguousFrames {
        expected: usize,
        got: usize,
        line: usize,
    },
    #[error("frame {frame} does not cover the same joints (missing {joint:?})")]
    InconsistentFrames { frame: usize, joint: String },
    #[error("animation needs at least 2 frames, got {got}")]
    TooFewFrames { got: usize },
    #[error("parse error (line {line}): {what}")]
    Parse { line: usize, what: String },
    #[error("bad clip JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("clip {id:?}: {what}")]
    BadClip { id: String, what: String },
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Lie(#[from] LieError),
}

/// Angle unit declared by a skeleton's `:units` section.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngleUnit {
    Degrees,
    Radians,
}

impl AngleUnit {
    pub fn to_radians(self, value: f64) -> f64 {
        match self {
            AngleUnit::Degrees => value.to_radians(),
            AngleUnit::Radians => value,
        }
    }

    pub fn from_radians(self, value: f64) -> f64 {
        match self {
            AngleUnit::Degrees => value.to_degrees(),
            AngleUnit::Radians => value,
        }
    }
}

/// One degree of freedom of a joint, in the order the skeleton declares.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dof {
    Rx,
    Ry,
    Rz,
    Tx,
    Ty,
    Tz,
    Length,
}

impl Dof {
    pub fn parse(token: &str, line: usize) -> Result<Self, MocapError> {
        match token.to_ascii_lowercase().as_str() {
            "rx" => Ok(Dof::Rx),
            "ry" => Ok(Dof::Ry),
            "rz" => Ok(Dof::Rz),
            "tx" => Ok(Dof::Tx),
            "ty" => Ok(Dof::Ty),
            "tz" => Ok(Dof::Tz),
            "l" => Ok(Dof::Length),
            _ => Err(MocapError::UnknownDof {
                token: token.to_string(),
                line,
            }),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Dof::Rx => "rx",
            Dof::Ry => "ry",
            Dof::Rz => "rz",
            Dof::Tx => "tx",
            Dof::Ty => "ty",
            Dof::Tz => "tz",
            Dof::Length => "l",
        }
    }

    pub fn is_rotational(&self) -> bool {
        matches!(self, Dof::Rx | Dof::Ry | Dof::Rz)
    }

    fn axis(&self) -> Option<usize> {
        match self {
            Dof::Rx => Some(0),
            Dof::Ry => Some(1),
            Dof::Rz => Some(2),
            _ => None,
        }
    }
}

/// One joint of a skeleton. Axis pre-rotation angles are kept in the file's
/// unit; conversion to radians happens where rotations are built.
#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    pub name: String,
    pub dof: Vec<Dof>,
    /// Axis pre-rotation angles, in the skeleton's angle unit.
    pub axis_angles: [f64; 3],
    /// Rotation-order string for the axis angles, e.g. "XYZ".
    pub axis_order: String,
    /// Parent joint name; `None` for the root.
    pub parent: Option<String>,
}

/// A parsed ASF skeleton: joints in declaration order, root first.
#[derive(Debug, Clone, PartialEq)]
pub struct Skeleton {
    pub angle_unit: AngleUnit,
    pub joints: Vec<Joint>,
}

impl Skeleton {
    pub fn joint(&self, name: &str) -> Option<&Joint> {
        self.joints.iter().find(|j| j.name == name)
    }

    pub fn joint_names(&self) -> Vec<&str> {
        self.joints.iter().map(|j| j.name.as_str()).collect()
    }
}

/// A parsed AMC animation: per frame, per joint, the dof values in the
/// skeleton's declared order, already converted to radians.
#[derive(Debug, Clone, PartialEq)]
pub struct AnimationClip {
    pub id: String,
    pub label: Option<String>,
    /// Frames per second; CMU ships 120 and AMC files do not declare it.
    pub frame_rate: f64,
    pub joint_order: Vec<String>,
    /// `frames[frame][joint][dof]`, joints aligned with `joint_order`.
    pub frames: Vec<Vec<Vec<f64>>>,
}

fn rotation_about_axis(axis: usize, angle: f64) -> Rotation {
    let mut v = Vector3::zeros();
    v[axis] = angle;
    exp_so3(&v)
}

/// Composes rotations listed first-to-last in application order: the first
/// listed rotation acts first, so it is the rightmost matrix factor.
fn compose_in_order(rotations: impl IntoIterator<Item = Rotation>) -> Rotation {
    let mut acc = Rotation::identity();
    for r in rotations {
        acc = r.compose(&acc);
    }
    acc
}

/// The axis pre-rotation matrix C of a joint.
fn axis_rotation(joint: &Joint, unit: AngleUnit) -> Result<Rotation, MocapError> {
    let letters: Vec<usize> = joint
        .axis_order
        .chars()
        .map(|c| match c.to_ascii_uppercase() {
            'X' => Ok(0),
            'Y' => Ok(1),
            'Z' => Ok(2),
            other => Err(MocapError::Parse {
                line: 0,
                what: format!("bad axis order letter {other:?} in joint {}", joint.name),
            }),
        })
        .collect::<Result<_, _>>()?;
    Ok(compose_in_order(
        letters
            .iter()
            .map(|&ax| rotation_about_axis(ax, unit.to_radians(joint.axis_angles[ax]))),
    ))
}

/// The joint names [`clip_to_curve`] will use: the requested subset, or by
/// default every skeleton joint with at least one rotational dof that
/// appears in the clip, in skeleton order.
pub fn selected_joint_names(
    clip: &AnimationClip,
    skeleton: &Skeleton,
    joints: Option<&[String]>,
) -> Result<Vec<String>, MocapError> {
    let names: Vec<String> = match joints {
        Some(requested) => {
            for n in requested {
                let j = skeleton
                    .joint(n)
                    .ok_or_else(|| MocapError::UnknownJoint { name: n.clone() })?;
                if !j.dof.iter().any(Dof::is_rotational) {
                    return Err(MocapError::NoRotationalDofs { joint: n.clone() });
                }
                if !clip.joint_order.iter().any(|c| c == n) {
                    return Err(MocapError::UnknownJoint { name: n.clone() });
                }
            }
            requested.to_vec()
        }
        None => skeleton
            .joints
            .iter()
            .filter(|j| j.dof.iter().any(Dof::is_rotational))
            .filter(|j| clip.joint_order.contains(&j.name))
            .map(|j| j.name.clone())
            .collect(),
    };
    if names.is_empty() {
        return Err(MocapError::NoRotationalDofs {
            joint: "<selection>".to_string(),
        });
    }
    Ok(names)
}

/// Converts one animation into a curve on SO(3)^d.
///
/// Per frame and joint, the dof angles are applied in the order the
/// skeleton's dof line lists them, each about the joint's local axis after
/// the ASF axis pre-rotation: with C the axis matrix and M the dof rotations
/// composed in listed order, the joint rotation is C·M·Cᵀ. (Example: dof
/// "rx rz" with values α, γ and axis order "XYZ" with angles (0,0,0) gives
/// M = Rz(γ)·Rx(α) and R = M.) Root translation dofs are discarded. `joints`
/// selects a subset; by default every joint with at least one rotational dof
/// that appears in the clip is used, in skeleton order.
pub fn clip_to_curve(
    clip: &AnimationClip,
    skeleton: &Skeleton,
    joints: Option<&[String]>,
) -> Result<PiecewiseGeodesicCurve, MocapError> {
    let names = selected_joint_names(clip, skeleton, joints)?;
    let selected: Vec<&Joint> = names
        .iter()
        .map(|n| skeleton.joint(n).expect("selection validated"))
        .collect();
    if clip.frames.len() < 2 {
        return Err(MocapError::TooFewFrames {
            got: clip.frames.len(),
        });
    }

    let axes: Vec<Rotation> = selected
        .iter()
        .map(|j| axis_rotation(j, skeleton.angle_unit))
        .collect::<Result<_, _>>()?;

    let mut poses = Vec::with_capacity(clip.frames.len());
    for frame in &clip.frames {
        let mut rotations = Vec::with_capacity(selected.len());
        for (joint, c) in selected.iter().zip(&axes) {
            let idx = clip
                .joint_order
                .iter()
                .position(|n| *n == joint.name)
                .expect("selection checked against clip");
            let values = &frame[idx];
            let m = compose_in_order(
                joint
                    .dof
                    .iter()
                    .zip(values)
                    .filter_map(|(d, &v)| d.axis().map(|ax| rotation_about_axis(ax, v))),
            );
            let raw = c.matrix() * m.matrix() * c.matrix().transpose();
            rotations.push(ingest_rotation(raw)?);
        }
        poses.push(Pose::new(rotations));
    }
    Ok(PiecewiseGeodesicCurve::from_frames(poses, None)?)
}

/// Ingestion policy: re-orthonormalize when the Euler-composition drift
/// exceeds the tolerance, then validate.
fn ingest_rotation(m: Matrix3<f64>) -> Result<Rotation, MocapError> {
    Ok(Rotation::from_matrix(m)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    pub(crate) const MINI_ASF: &str = r#"
# minimal two-bone skeleton
:version 1.10
:name mini
:units
  mass 1.0
  length 0.45
  angle deg
:documentation
  hand-written fixture
:root
  order TX TY TZ RX RY RZ
  axis XYZ
  position 0 0 0
  orientation 0 0 0
:bonedata
  begin
    id 1
    name upperarm
    direction 0 1 0
    length 2.5
    axis 0 0 30 XYZ
    dof rx rz
    limits (-180 180)
           (-180 180)
  end
  begin
    id 2
    name lowerarm
    direction 0 1 0
    length 2.0
    axis 0 0 0 XYZ
    dof ry
    limits (-170 170)
  end
:hierarchy
  begin
    root upperarm
    upperarm lowerarm
  end
"#;

    pub(crate) const MINI_AMC: &str = r#"
# matching motion
:FULLY-SPECIFIED
:DEGREES
1
root 0 0 0 0 0 0
upperarm 0 0
lowerarm 0
2
root 0 0 0 90 0 0
upperarm 45 10
lowerarm -20
"#;

    #[test]
    fn parse_mini_skeleton() {
        let s = parse_asf(MINI_ASF).unwrap();
        assert_eq!(s.angle_unit, AngleUnit::Degrees);
        assert_eq!(s.joints.len(), 3);
        assert_eq!(s.joints[0].name, "root");
        let upper = s.joint("upperarm").unwrap();
        assert_eq!(upper.dof, vec![Dof::Rx, Dof::Rz]);
        assert_eq!(upper.axis_angles, [0.0, 0.0, 30.0]);
        assert_eq!(upper.parent.as_deref(), Some("root"));
        assert_eq!(s.joint("lowerarm").unwrap().parent.as_deref(), Some("upperarm"));
    }

    #[test]
    fn parse_mini_clip() {
        let s = parse_asf(MINI_ASF).unwrap();
        let clip = parse_amc(MINI_AMC, &s).unwrap();
        assert_eq!(clip.frames.len(), 2);
        assert_eq!(clip.joint_order, vec!["root", "upperarm", "lowerarm"]);
        // 90 degrees stored as π/2 radians.
        assert_relative_eq!(clip.frames[1][0][3], PI / 2.0, epsilon = 1e-15);
        assert_relative_eq!(clip.frames[1][2][0], -20.0f64.to_radians(), epsilon = 1e-15);
    }

    #[test]
    fn zero_angles_give_constant_identity_curve() {
        let s = parse_asf(MINI_ASF).unwrap();
        let amc = ":FULLY-SPECIFIED\n1\nroot 0 0 0 0 0 0\nupperarm 0 0\nlowerarm 0\n2\nroot 0 0 0 0 0 0\nupperarm 0 0\nlowerarm 0\n";
        let clip = parse_amc(amc, &s).unwrap();
        let c = clip_to_curve(&clip, &s, None).unwrap();
        assert_eq!(c.joint_count(), 3);
        for p in c.knot_poses() {
            for r in p.rotations() {
                assert_relative_eq!(*r.matrix(), Matrix3::identity(), epsilon = 1e-12);
            }
        }
        assert!(c.has_zero_speed_segment());
    }

    #[test]
    fn single_rx_matches_exponential() {
        let s = parse_asf(MINI_ASF).unwrap();
        let amc = ":FULLY-SPECIFIED\n1\nroot 0 0 0 0 0 0\nupperarm 0 0\nlowerarm 0\n2\nroot 0 0 0 90 0 0\nupperarm 0 0\nlowerarm 0\n";
        let clip = parse_amc(amc, &s).unwrap();
        let c = clip_to_curve(&clip, &s, Some(&["root".to_string()])).unwrap();
        assert_eq!(c.joint_count(), 1);
        let expected = exp_so3(&Vector3::new(PI / 2.0, 0.0, 0.0));
        let last = c.evaluate(1.0).unwrap();
        assert_relative_eq!(*last.rotation(0).matrix(), *expected.matrix(), epsilon = 1e-12);
    }

    #[test]
    fn joint_subset_selects_d() {
        let s = parse_asf(MINI_ASF).unwrap();
        let clip = parse_amc(MINI_AMC, &s).unwrap();
        let c2 = clip_to_curve(
            &clip,
            &s,
            Some(&["upperarm".to_string(), "lowerarm".to_string()]),
        )
        .unwrap();
        assert_eq!(c2.joint_count(), 2);
        let all = clip_to_curve(&clip, &s, None).unwrap();
        assert_eq!(all.joint_count(), 3);
    }

    #[test]
    fn unknown_joint_rejected() {
        let s = parse_asf(MINI_ASF).unwrap();
        let clip = parse_amc(MINI_AMC, &s).unwrap();
        assert!(matches!(
            clip_to_curve(&clip, &s, Some(&["pinky".to_string()])),
            Err(MocapError::UnknownJoint { .. })
        ));
    }

    #[test]
    fn axis_prerotation_conjugates_dof_rotation() {
        // upperarm has axis (0,0,30°): rx spins about the pre-rotated x axis.
        let s = parse_asf(MINI_ASF).unwrap();
        let amc = ":FULLY-SPECIFIED\n1\nroot 0 0 0 0 0 0\nupperarm 0 0\nlowerarm 0\n2\nroot 0 0 0 0 0 0\nupperarm 90 0\nlowerarm 0\n";
        let clip = parse_amc(amc, &s).unwrap();
        let c = clip_to_curve(&clip, &s, Some(&["upperarm".to_string()])).unwrap();
        let last = c.evaluate(1.0).unwrap();
        let axis = exp_so3(&Vector3::new(0.0, 0.0, 30.0f64.to_radians()));
        let expected = axis
            .compose(&exp_so3(&Vector3::new(PI / 2.0, 0.0, 0.0)))
            .compose(&axis.inverse());
        assert_relative_eq!(*last.rotation(0).matrix(), *expected.matrix(), epsilon = 1e-12);
    }
}
