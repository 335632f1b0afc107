//! Shape analysis for motion-capture animations modeled as piecewise-geodesic
//! curves on SO(3)^d.
//!
//! An animation is a sequence of frames, each frame one rotation per joint;
//! interpolating frames along per-joint geodesics gives a curve whose
//! right-trivialized derivative is piecewise constant. On top of that model
//! the crate provides two ways to compare *shapes* — curves up to
//! orientation-preserving reparameterization:
//!
//! * the elastic distance: the square root velocity transform ([`srvt`]),
//!   with the infimum over reparameterizations solved by a lattice dynamic
//!   program ([`reparam`]);
//! * the signature distance: truncated path signatures ([`tensor`],
//!   [`signature`]), which are reparameterization-invariant by construction,
//!   so no optimization is needed — distances are plain norms.
//!
//! [`mocap`] ingests ASF/AMC files and generates synthetic labeled datasets;
//! [`analysis`] builds distance matrices, MDS embeddings, and
//! classification/cluster statistics on either distance.

pub mod analysis;
pub mod curve;
pub mod lie;
pub mod mocap;
pub mod reparam;
pub mod selftest;
pub mod signature;
pub mod srvt;
pub mod tensor;
pub mod testing;

pub use curve::{LogDerivative, PiecewiseGeodesicCurve, Reparameterization};
pub use lie::{Pose, Rotation};

#[cfg(test)]
pub(crate) use testing as test_util;
