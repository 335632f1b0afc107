//! Seeded synthetic labeled datasets: distinct per-class angular-velocity
//! programs, with per-clip random time warps and angle noise layered on top.
//! Stands in for real capture data so the whole pipeline can run and be
//! tested without external files.

use super::{ClipRecord, LabeledDataset, MocapError};
use crate::curve::{PiecewiseGeodesicCurve, Reparameterization};
use crate::lie::{exp_so3, Pose};
use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::f64::consts::TAU;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub classes: usize,
    pub clips_per_class: usize,
    /// Joint count d.
    pub joints: usize,
    /// Frames per class prototype.
    pub frames: usize,
    /// Standard deviation (radians) of the per-frame, per-joint angle noise.
    pub noise: f64,
    /// Apply a random time warp per clip. With warps on and noise zero,
    /// clips are exact reparameterizations of their class prototype.
    pub warps: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 7,
            classes: 3,
            clips_per_class: 10,
            joints: 5,
            frames: 60,
            noise: 0.05,
            warps: true,
        }
    }
}

/// The class program: a smooth so(3)-valued path per joint, sampled at the
/// frame times. All classes share the base frequency — tempo differences
/// would be (partially) removable by time warping — and differ in the path
/// geometry instead: the phase relation between coordinate components and
/// the harmonic content, which no reparameterization can change.
fn program(class: usize, joint: usize, t: f64) -> Vector3<f64> {
    let base = TAU * 2.0 * t;
    let jp = TAU * joint as f64 * 0.13;
    let delta = TAU * class as f64 / 3.0;
    let harmonic = 0.3 + 0.4 * (class as f64 * 0.618).fract();
    let a1 = 0.5 + 0.1 * (joint % 3) as f64;
    let a2 = 0.4 + 0.08 * (joint % 2) as f64;
    Vector3::new(
        a1 * (base + jp).sin(),
        a2 * ((base + jp + delta).sin() + harmonic * (2.0 * base + jp).sin()) / (1.0 + harmonic),
        0.3 * (base + jp + 2.0 * delta).cos(),
    )
}

fn prototype(cfg: &SynthConfig, class: usize) -> PiecewiseGeodesicCurve {
    let m = cfg.frames;
    let frames: Vec<Pose> = (0..m)
        .map(|i| {
            let t = i as f64 / (m - 1) as f64;
            Pose::new(
                (0..cfg.joints)
                    .map(|j| exp_so3(&program(class, j, t)))
                    .collect(),
            )
        })
        .collect();
    PiecewiseGeodesicCurve::from_frames(frames, None).expect("prototype is a valid curve")
}

/// Generates the dataset. Deterministic: the same config (including seed)
/// produces a bit-identical dataset.
pub fn synth_classes(cfg: &SynthConfig) -> Result<LabeledDataset, MocapError> {
    assert!(cfg.classes > 0 && cfg.clips_per_class > 0, "counts must be positive");
    assert!(cfg.joints > 0 && cfg.frames >= 2, "need joints and at least 2 frames");
    assert!(cfg.noise >= 0.0, "noise must be nonnegative");

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let joint_names: Vec<String> = (0..cfg.joints).map(|j| format!("j{j}")).collect();
    let mut clips = Vec::with_capacity(cfg.classes * cfg.clips_per_class);

    for class in 0..cfg.classes {
        let label = format!("class{class}");
        let proto = prototype(cfg, class);
        for i in 0..cfg.clips_per_class {
            let mut curve = if cfg.warps {
                let phi = Reparameterization::random(&mut rng, 6, 1.0 / 3.0);
                proto.reparameterize(&phi)?
            } else {
                proto.clone()
            };
            if cfg.noise > 0.0 {
                let normal = Normal::new(0.0, cfg.noise).expect("valid stddev");
                let times = curve.knot_times().to_vec();
                let poses: Vec<Pose> = curve
                    .knot_poses()
                    .iter()
                    .map(|p| {
                        Pose::new(
                            p.rotations()
                                .iter()
                                .map(|r| {
                                    let eps = Vector3::new(
                                        normal.sample(&mut rng),
                                        normal.sample(&mut rng),
                                        normal.sample(&mut rng),
                                    );
                                    exp_so3(&eps).compose(r)
                                })
                                .collect(),
                        )
                    })
                    .collect();
                curve = PiecewiseGeodesicCurve::from_frames(poses, Some(&times))?;
            }
            clips.push(ClipRecord::from_curve(
                format!("{label}_{i:02}"),
                Some(label.clone()),
                joint_names.clone(),
                &curve,
            )?);
        }
    }
    Ok(LabeledDataset { clips })
}
