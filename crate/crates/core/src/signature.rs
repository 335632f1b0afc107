//! Signatures and log-signatures of piecewise-geodesic curves on SO(3)^d,
//! and the signature shape distance.
//!
//! The right-trivialized derivative of a piecewise-geodesic curve is
//! piecewise constant, so the signature over an interval is the ordered
//! product of segment exponentials exp_⊗(Δt_k·b_k) in the truncated tensor
//! algebra over ℝ^D with D = 3d. Partial segments contribute the exponential
//! of the overlapped fraction. Signatures computed this way are invariant
//! under reparameterization and under right translation of the curve.

use crate::curve::{CurveError, LogDerivative, PiecewiseGeodesicCurve};
use crate::tensor::{TensorError, TruncatedTensor};
use thiserror::Error;

/// Curves whose log-signature norm falls below this are treated as constant;
/// the normalized signature distance is undefined for them.
pub const ZERO_LOG_SIGNATURE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignatureError {
    #[error("bad interval [{s}, {t}]: need 0 <= s < t <= 1")]
    BadInterval { s: f64, t: f64 },
    #[error("signatures cover non-adjacent intervals [{0}, {1}] and [{2}, {3}]")]
    NonAdjacentIntervals(f64, f64, f64, f64),
    #[error("log-signature norm below {ZERO_LOG_SIGNATURE_TOL:.0e}; curve is constant")]
    ZeroLogSignature,
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// Alphabet letter (1-based) for coordinate `axis` (0=x, 1=y, 2=z) of joint
/// `joint` (0-based): the stacking order used throughout the crate.
pub fn letter(joint: usize, axis: usize) -> usize {
    3 * joint + axis + 1
}

/// The truncated signature of a curve over an interval: a group-like tensor
/// with scalar part 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Signature {
    tensor: TruncatedTensor,
    interval: (f64, f64),
}

impl Signature {
    pub fn tensor(&self) -> &TruncatedTensor {
        &self.tensor
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn dim(&self) -> usize {
        self.tensor.dim()
    }

    pub fn level(&self) -> usize {
        self.tensor.level()
    }
}

/// The logarithm of a signature: a tensor with zero scalar part (a free
/// Lie-algebra element in tensor coordinates).
#[derive(Debug, Clone, PartialEq)]
pub struct LogSignature {
    tensor: TruncatedTensor,
}

impl LogSignature {
    pub fn tensor(&self) -> &TruncatedTensor {
        &self.tensor
    }

    /// Euclidean norm over levels 1..=N.
    pub fn norm(&self) -> f64 {
        self.tensor.norm(false)
    }
}

/// Signature of `curve` over [s, t], truncated at `level`.
pub fn signature(
    curve: &PiecewiseGeodesicCurve,
    s: f64,
    t: f64,
    level: usize,
) -> Result<Signature, SignatureError> {
    let ld = curve.log_derivative()?;
    signature_of_log_derivative(&ld, s, t, level)
}

/// Signature of a piecewise-constant derivative over [s, t]: the ordered
/// product of exp_⊗((t′−s′)·b_k) over the overlapped (partial) segments.
pub fn signature_of_log_derivative(
    ld: &LogDerivative,
    s: f64,
    t: f64,
    level: usize,
) -> Result<Signature, SignatureError> {
    let (lo, hi) = (ld.times()[0], *ld.times().last().unwrap());
    if !(s < t && s >= lo - 1e-12 && t <= hi + 1e-12) {
        return Err(SignatureError::BadInterval { s, t });
    }
    let dim = ld.dim();
    let mut acc = TruncatedTensor::unit(dim, level)?;
    let mut step = TruncatedTensor::zeros(dim, level)?;
    let mut next = TruncatedTensor::zeros(dim, level)?;
    for k in 0..ld.segment_count() {
        let a = ld.times()[k].max(s);
        let b = ld.times()[k + 1].min(t);
        if b <= a {
            continue;
        }
        step.set_primitive_exp(ld.slopes()[k].as_slice(), b - a);
        acc.product_into(&step, &mut next);
        std::mem::swap(&mut acc, &mut next);
    }
    Ok(Signature {
        tensor: acc,
        interval: (s, t),
    })
}

/// Chen concatenation: for adjacent intervals [s,u] and [u,t] the product of
/// the two signatures equals the signature over [s,t].
pub fn chen_concat(left: &Signature, right: &Signature) -> Result<Signature, SignatureError> {
    if (left.interval.1 - right.interval.0).abs() > 1e-9 {
        return Err(SignatureError::NonAdjacentIntervals(
            left.interval.0,
            left.interval.1,
            right.interval.0,
            right.interval.1,
        ));
    }
    Ok(Signature {
        tensor: left.tensor.product(&right.tensor)?,
        interval: (left.interval.0, right.interval.1),
    })
}

/// Signature of the time-reversed path: the group inverse, so
/// `reverse_signature(s) ⊗ s` is the unit tensor.
pub fn reverse_signature(sig: &Signature) -> Result<Signature, SignatureError> {
    Ok(Signature {
        tensor: sig.tensor.group_inverse()?,
        interval: (1.0 - sig.interval.1, 1.0 - sig.interval.0),
    })
}

/// Log-signature of the whole curve, truncated at `level`.
pub fn log_signature(
    curve: &PiecewiseGeodesicCurve,
    level: usize,
) -> Result<LogSignature, SignatureError> {
    let sig = signature(curve, 0.0, 1.0, level)?;
    Ok(LogSignature {
        tensor: sig.tensor.log()?,
    })
}

/// One log-signature per joint (alphabet size 3 each) instead of one over
/// the stacked alphabet; a cheaper variant exposed for experimentation.
pub fn log_signature_per_joint(
    curve: &PiecewiseGeodesicCurve,
    level: usize,
) -> Result<Vec<LogSignature>, SignatureError> {
    let ld = curve.log_derivative()?;
    let d = curve.joint_count();
    let mut out = Vec::with_capacity(d);
    for j in 0..d {
        let slopes = ld
            .slopes()
            .iter()
            .map(|b| nalgebra::DVector::from_row_slice(&b.as_slice()[3 * j..3 * j + 3]))
            .collect();
        let joint_ld = LogDerivative::new(ld.times().to_vec(), slopes)?;
        let sig = signature_of_log_derivative(&joint_ld, 0.0, 1.0, level)?;
        out.push(LogSignature {
            tensor: sig.tensor().log()?,
        });
    }
    Ok(out)
}

fn normalized_difference_norm(
    l0: &LogSignature,
    l1: &LogSignature,
    level_weights: Option<&[f64]>,
) -> Result<f64, SignatureError> {
    let norm = |l: &LogSignature| match level_weights {
        Some(w) => l.tensor.weighted_norm(w),
        None => l.norm(),
    };
    let (n0, n1) = (norm(l0), norm(l1));
    if n0 < ZERO_LOG_SIGNATURE_TOL || n1 < ZERO_LOG_SIGNATURE_TOL {
        return Err(SignatureError::ZeroLogSignature);
    }
    let diff = l0.tensor.scale(1.0 / n0).sub(&l1.tensor.scale(1.0 / n1))?;
    Ok(match level_weights {
        Some(w) => diff.weighted_norm(w),
        None => diff.norm(false),
    })
}

/// Distance between normalized log-signatures computed beforehand.
pub fn d_sig_from_log_signatures(
    l0: &LogSignature,
    l1: &LogSignature,
) -> Result<f64, SignatureError> {
    normalized_difference_norm(l0, l1, None)
}

/// Signature shape distance: the norm of the difference of the two unit-
/// normalized log-signatures. Symmetric, valued in [0, 2], and invariant
/// under reparameterization and right translation of either curve.
pub fn d_sig(
    c0: &PiecewiseGeodesicCurve,
    c1: &PiecewiseGeodesicCurve,
    level: usize,
) -> Result<f64, SignatureError> {
    let l0 = log_signature(c0, level)?;
    let l1 = log_signature(c1, level)?;
    d_sig_from_log_signatures(&l0, &l1)
}

/// [`d_sig`] with one scale factor per tensor level, exposed for
/// experimenting with level weighting.
pub fn d_sig_weighted(
    c0: &PiecewiseGeodesicCurve,
    c1: &PiecewiseGeodesicCurve,
    level: usize,
    level_weights: &[f64],
) -> Result<f64, SignatureError> {
    let l0 = log_signature(c0, level)?;
    let l1 = log_signature(c1, level)?;
    normalized_difference_norm(&l0, &l1, Some(level_weights))
}
