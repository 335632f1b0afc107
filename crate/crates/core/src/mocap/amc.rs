//! Parser and writer for AMC motion files.

use super::{AngleUnit, AnimationClip, MocapError, Skeleton};

/// Default CMU capture rate; AMC files carry no rate themselves.
pub const DEFAULT_FRAME_RATE: f64 = 120.0;

/// Parses an AMC file against its skeleton. Frame blocks start with a
/// 1-based contiguous frame index; each joint line carries exactly as many
/// values as the skeleton declares dofs for it, bound in the skeleton's dof
/// order. Angles are converted to radians according to the skeleton's units.
/// `:FULLY-SPECIFIED` / `:DEGREES` style headers are tolerated.
pub fn parse_amc(text: &str, skeleton: &Skeleton) -> Result<AnimationClip, MocapError> {
    let mut joint_order: Vec<String> = Vec::new();
    let mut frames: Vec<Vec<Vec<f64>>> = Vec::new();
    let mut current: Option<Vec<Option<Vec<f64>>>> = None;
    let mut current_line = 0usize;

    let flush = |current: Option<Vec<Option<Vec<f64>>>>,
                 frames: &mut Vec<Vec<Vec<f64>>>,
                 joint_order: &[String],
                 line: usize|
     -> Result<(), MocapError> {
        if let Some(frame) = current {
            let mut values = Vec::with_capacity(joint_order.len());
            for (slot, name) in frame.into_iter().zip(joint_order) {
                match slot {
                    Some(v) => values.push(v),
                    None => {
                        return Err(MocapError::InconsistentFrames {
                            frame: frames.len() + 1,
                            joint: name.clone(),
                        })
                    }
                }
            }
            let _ = line;
            frames.push(values);
        }
        Ok(())
    };

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let no_comment = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let t = no_comment.trim();
        if t.is_empty() || t.starts_with(':') {
            continue;
        }

        let mut parts = t.split_whitespace();
        let head = parts.next().unwrap();

        if head.chars().all(|c| c.is_ascii_digit()) {
            // New frame block.
            let idx: usize = head.parse().map_err(|_| MocapError::Parse {
                line,
                what: format!("bad frame index {head:?}"),
            })?;
            flush(current.take(), &mut frames, &joint_order, current_line)?;
            if idx != frames.len() + 1 {
                return Err(MocapError::NonContiguousFrames {
                    expected: frames.len() + 1,
                    got: idx,
                    line,
                });
            }
            current = Some(vec![None; joint_order.len()]);
            current_line = line;
            continue;
        }

        let frame = current.as_mut().ok_or(MocapError::Parse {
            line,
            what: "joint data before the first frame index".to_string(),
        })?;

        let joint = skeleton.joint(head).ok_or_else(|| MocapError::UnknownJoint {
            name: head.to_string(),
        })?;
        let values: Vec<f64> = parts
            .map(|p| {
                p.parse::<f64>().map_err(|_| MocapError::Parse {
                    line,
                    what: format!("expected a number, got {p:?}"),
                })
            })
            .collect::<Result<_, _>>()?;
        if values.len() != joint.dof.len() {
            return Err(MocapError::DofCountMismatch {
                joint: head.to_string(),
                expected: joint.dof.len(),
                got: values.len(),
                line,
            });
        }
        let values = values
            .into_iter()
            .zip(&joint.dof)
            .map(|(v, d)| {
                if d.is_rotational() {
                    skeleton.angle_unit.to_radians(v)
                } else {
                    v
                }
            })
            .collect();

        let slot = match joint_order.iter().position(|n| n == head) {
            Some(i) => i,
            None => {
                if frames.is_empty() {
                    joint_order.push(head.to_string());
                    frame.push(None);
                    joint_order.len() - 1
                } else {
                    return Err(MocapError::InconsistentFrames {
                        frame: frames.len() + 1,
                        joint: head.to_string(),
                    });
                }
            }
        };
        frame[slot] = Some(values);
    }
    flush(current.take(), &mut frames, &joint_order, current_line)?;

    if frames.len() < 2 {
        return Err(MocapError::TooFewFrames { got: frames.len() });
    }
    Ok(AnimationClip {
        id: String::new(),
        label: None,
        frame_rate: DEFAULT_FRAME_RATE,
        joint_order,
        frames,
    })
}

impl AnimationClip {
    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    /// Serializes back to AMC in the skeleton's angle unit; `parse_amc` of
    /// the output reproduces the clip (exactly for radian skeletons, to
    /// rounding for degree ones).
    pub fn to_amc(&self, skeleton: &Skeleton) -> String {
        let mut out = String::new();
        out.push_str(":FULLY-SPECIFIED\n");
        if skeleton.angle_unit == AngleUnit::Degrees {
            out.push_str(":DEGREES\n");
        }
        for (f, frame) in self.frames.iter().enumerate() {
            out.push_str(&format!("{}\n", f + 1));
            for (name, values) in self.joint_order.iter().zip(frame) {
                out.push_str(name);
                let dofs = skeleton.joint(name).map(|j| j.dof.as_slice()).unwrap_or(&[]);
                for (i, v) in values.iter().enumerate() {
                    let emit = if dofs.get(i).map(|d| d.is_rotational()).unwrap_or(false) {
                        skeleton.angle_unit.from_radians(*v)
                    } else {
                        *v
                    };
                    out.push_str(&format!(" {emit}"));
                }
                out.push('\n');
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::{MINI_AMC, MINI_ASF};
    use super::super::{parse_asf, AngleUnit};
    use super::*;

    #[test]
    fn wrong_value_count_is_an_error() {
        let s = parse_asf(MINI_ASF).unwrap();
        let amc = "1\nroot 0 0 0 0 0 0\nupperarm 1\nlowerarm 0\n";
        assert!(matches!(
            parse_amc(amc, &s),
            Err(MocapError::DofCountMismatch {
                expected: 2,
                got: 1,
                ..
            })
        ));
    }

    #[test]
    fn unknown_joint_is_an_error() {
        let s = parse_asf(MINI_ASF).unwrap();
        let amc = "1\nroot 0 0 0 0 0 0\ntail 1\n";
        assert!(matches!(parse_amc(amc, &s), Err(MocapError::UnknownJoint { .. })));
    }

    #[test]
    fn non_contiguous_frames_are_an_error() {
        let s = parse_asf(MINI_ASF).unwrap();
        let amc = "1\nroot 0 0 0 0 0 0\nupperarm 0 0\nlowerarm 0\n3\nroot 0 0 0 0 0 0\nupperarm 0 0\nlowerarm 0\n";
        assert!(matches!(
            parse_amc(amc, &s),
            Err(MocapError::NonContiguousFrames {
                expected: 2,
                got: 3,
                ..
            })
        ));
    }

    #[test]
    fn frame_missing_a_joint_is_an_error() {
        let s = parse_asf(MINI_ASF).unwrap();
        let amc = "1\nroot 0 0 0 0 0 0\nupperarm 0 0\nlowerarm 0\n2\nroot 0 0 0 0 0 0\nlowerarm 0\n";
        assert!(matches!(
            parse_amc(amc, &s),
            Err(MocapError::InconsistentFrames { .. })
        ));
    }

    #[test]
    fn single_frame_is_too_few() {
        let s = parse_asf(MINI_ASF).unwrap();
        let amc = "1\nroot 0 0 0 0 0 0\nupperarm 0 0\nlowerarm 0\n";
        assert!(matches!(parse_amc(amc, &s), Err(MocapError::TooFewFrames { got: 1 })));
    }

    #[test]
    fn degrees_convert_to_radians() {
        let s = parse_asf(MINI_ASF).unwrap();
        let clip = parse_amc(MINI_AMC, &s).unwrap();
        assert!((clip.frames[1][0][3] - std::f64::consts::PI / 2.0).abs() < 1e-15);
        // Root translations are untouched by the unit conversion.
        assert_eq!(clip.frames[1][0][0], 0.0);
    }

    #[test]
    fn roundtrip_exact_for_radian_skeletons() {
        let mut s = parse_asf(MINI_ASF).unwrap();
        s.angle_unit = AngleUnit::Radians;
        let amc = "1\nroot 0.1 0.2 0.3 0.4 0.5 0.6\nupperarm 0.25 -1.5\nlowerarm 0.75\n2\nroot 0 0 0 1 2 3\nupperarm 0.5 0.25\nlowerarm -0.125\n";
        let clip = parse_amc(amc, &s).unwrap();
        let again = parse_amc(&clip.to_amc(&s), &s).unwrap();
        assert_eq!(clip, again);
    }

    #[test]
    fn roundtrip_close_for_degree_skeletons() {
        let s = parse_asf(MINI_ASF).unwrap();
        let clip = parse_amc(MINI_AMC, &s).unwrap();
        let again = parse_amc(&clip.to_amc(&s), &s).unwrap();
        assert_eq!(clip.joint_order, again.joint_order);
        for (fa, fb) in clip.frames.iter().zip(&again.frames) {
            for (ja, jb) in fa.iter().zip(fb) {
                for (a, b) in ja.iter().zip(jb) {
                    assert!((a - b).abs() <= 1e-12);
                }
            }
        }
    }
}
