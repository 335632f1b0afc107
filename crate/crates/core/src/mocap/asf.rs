//! Parser and writer for the ASF skeleton format (the subset needed for
//! joint rotations: units, root, bonedata, hierarchy).

use super::{AngleUnit, Dof, Joint, MocapError, Skeleton};

struct Lines<'a> {
    items: Vec<(usize, &'a str)>,
    at: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let items = text
            .lines()
            .enumerate()
            .map(|(i, raw)| {
                let no_comment = match raw.find('#') {
                    Some(p) => &raw[..p],
                    None => raw,
                };
                (i + 1, no_comment.trim())
            })
            .filter(|(_, l)| !l.is_empty())
            .collect();
        Lines { items, at: 0 }
    }

    fn peek(&self) -> Option<(usize, &'a str)> {
        self.items.get(self.at).copied()
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        let item = self.peek();
        self.at += 1;
        item
    }
}

fn parse_f64(token: &str, line: usize) -> Result<f64, MocapError> {
    token.parse().map_err(|_| MocapError::Parse {
        line,
        what: format!("expected a number, got {token:?}"),
    })
}

/// Parses an ASF skeleton. Required sections are `:root` and `:hierarchy`;
/// `:units` defaults to degrees (the CMU convention) when absent, and
/// `:bonedata` may be missing for a root-only skeleton.
pub fn parse_asf(text: &str) -> Result<Skeleton, MocapError> {
    let mut lines = Lines::new(text);
    let mut angle_unit = AngleUnit::Degrees;
    let mut root: Option<Joint> = None;
    let mut bones: Vec<Joint> = Vec::new();
    let mut saw_hierarchy = false;
    let mut hierarchy: Vec<(usize, Vec<String>)> = Vec::new();

    while let Some((_line, text)) = lines.next() {
        if !text.starts_with(':') {
            continue; // stray content outside a known section
        }
        let section = text[1..].split_whitespace().next().unwrap_or("");
        match section {
            "units" => {
                while let Some((l, t)) = lines.peek() {
                    if t.starts_with(':') {
                        break;
                    }
                    lines.next();
                    let mut parts = t.split_whitespace();
                    if let (Some(key), Some(value)) = (parts.next(), parts.next()) {
                        if key == "angle" {
                            angle_unit = match value.to_ascii_lowercase().as_str() {
                                "deg" => AngleUnit::Degrees,
                                "rad" => AngleUnit::Radians,
                                other => {
                                    return Err(MocapError::Parse {
                                        line: l,
                                        what: format!("unknown angle unit {other:?}"),
                                    })
                                }
                            };
                        }
                    }
                }
            }
            "root" => {
                let mut joint = Joint {
                    name: "root".to_string(),
                    dof: Vec::new(),
                    axis_angles: [0.0; 3],
                    axis_order: "XYZ".to_string(),
                    parent: None,
                };
                while let Some((l, t)) = lines.peek() {
                    if t.starts_with(':') {
                        break;
                    }
                    lines.next();
                    let mut parts = t.split_whitespace();
                    match parts.next() {
                        Some("order") => {
                            joint.dof = parts.map(|p| Dof::parse(p, l)).collect::<Result<_, _>>()?;
                        }
                        Some("axis") => {
                            if let Some(order) = parts.next() {
                                joint.axis_order = order.to_string();
                            }
                        }
                        Some("orientation") => {
                            for slot in joint.axis_angles.iter_mut() {
                                if let Some(tok) = parts.next() {
                                    *slot = parse_f64(tok, l)?;
                                }
                            }
                        }
                        _ => {} // position and anything else: irrelevant here
                    }
                }
                root = Some(joint);
            }
            "bonedata" => {
                while let Some((_, t)) = lines.peek() {
                    if t.starts_with(':') {
                        break;
                    }
                    if t == "begin" {
                        lines.next();
                        bones.push(parse_bone(&mut lines)?);
                    } else {
                        lines.next();
                    }
                }
            }
            "hierarchy" => {
                saw_hierarchy = true;
                while let Some((l, t)) = lines.peek() {
                    if t.starts_with(':') {
                        break;
                    }
                    lines.next();
                    if t == "begin" || t == "end" {
                        continue;
                    }
                    let names: Vec<String> =
                        t.split_whitespace().map(|s| s.to_string()).collect();
                    hierarchy.push((l, names));
                }
            }
            _ => {} // version, name, documentation, ...
        }
    }

    let root = root.ok_or(MocapError::MissingSection { name: "root" })?;
    if !saw_hierarchy {
        return Err(MocapError::MissingSection { name: "hierarchy" });
    }

    let mut joints = vec![root];
    joints.extend(bones);

    for (line, names) in hierarchy {
        let (parent, children) = match names.split_first() {
            Some(split) => split,
            None => continue,
        };
        if !joints.iter().any(|j| j.name == *parent) {
            return Err(MocapError::DanglingParent {
                parent: parent.clone(),
                line,
            });
        }
        for child in children {
            match joints.iter_mut().find(|j| j.name == *child) {
                Some(j) => j.parent = Some(parent.clone()),
                None => {
                    return Err(MocapError::DanglingParent {
                        parent: child.clone(),
                        line,
                    })
                }
            }
        }
    }

    Ok(Skeleton { angle_unit, joints })
}

fn parse_bone(lines: &mut Lines<'_>) -> Result<Joint, MocapError> {
    let mut joint = Joint {
        name: String::new(),
        dof: Vec::new(),
        axis_angles: [0.0; 3],
        axis_order: "XYZ".to_string(),
        parent: None,
    };
    while let Some((l, t)) = lines.next() {
        if t == "end" {
            if joint.name.is_empty() {
                return Err(MocapError::Parse {
                    line: l,
                    what: "bone block without a name".to_string(),
                });
            }
            return Ok(joint);
        }
        let mut parts = t.split_whitespace();
        match parts.next() {
            Some("name") => {
                joint.name = parts.next().unwrap_or("").to_string();
            }
            Some("axis") => {
                for slot in joint.axis_angles.iter_mut() {
                    match parts.next() {
                        Some(tok) => *slot = parse_f64(tok, l)?,
                        None => {
                            return Err(MocapError::Parse {
                                line: l,
                                what: "axis needs three angles".to_string(),
                            })
                        }
                    }
                }
                if let Some(order) = parts.next() {
                    joint.axis_order = order.to_string();
                }
            }
            Some("dof") => {
                joint.dof = parts.map(|p| Dof::parse(p, l)).collect::<Result<_, _>>()?;
            }
            _ => {} // id, direction, length, limits, ...
        }
    }
    Err(MocapError::Parse {
        line: 0,
        what: "unterminated bone block".to_string(),
    })
}

impl Skeleton {
    /// Serializes the subset this crate understands; `parse_asf` of the
    /// output reproduces the skeleton.
    pub fn to_asf(&self) -> String {
        let mut out = String::new();
        out.push_str(":version 1.10\n:name serialized\n:units\n");
        out.push_str(&format!(
            "  angle {}\n",
            match self.angle_unit {
                AngleUnit::Degrees => "deg",
                AngleUnit::Radians => "rad",
            }
        ));
        let root = &self.joints[0];
        out.push_str(":root\n");
        out.push_str("  order");
        for d in &root.dof {
            out.push(' ');
            out.push_str(&d.as_str().to_ascii_uppercase());
        }
        out.push('\n');
        out.push_str(&format!("  axis {}\n", root.axis_order));
        out.push_str("  position 0 0 0\n");
        out.push_str(&format!(
            "  orientation {} {} {}\n",
            root.axis_angles[0], root.axis_angles[1], root.axis_angles[2]
        ));
        if self.joints.len() > 1 {
            out.push_str(":bonedata\n");
            for (i, j) in self.joints.iter().enumerate().skip(1) {
                out.push_str("  begin\n");
                out.push_str(&format!("    id {i}\n"));
                out.push_str(&format!("    name {}\n", j.name));
                out.push_str(&format!(
                    "    axis {} {} {} {}\n",
                    j.axis_angles[0], j.axis_angles[1], j.axis_angles[2], j.axis_order
                ));
                if !j.dof.is_empty() {
                    out.push_str("    dof");
                    for d in &j.dof {
                        out.push(' ');
                        out.push_str(d.as_str());
                    }
                    out.push('\n');
                }
                out.push_str("  end\n");
            }
        }
        out.push_str(":hierarchy\n  begin\n");
        for parent in &self.joints {
            let children: Vec<&str> = self
                .joints
                .iter()
                .filter(|j| j.parent.as_deref() == Some(parent.name.as_str()))
                .map(|j| j.name.as_str())
                .collect();
            if !children.is_empty() {
                out.push_str(&format!("    {} {}\n", parent.name, children.join(" ")));
            }
        }
        out.push_str("  end\n");
        out
    }
}
