//! Distance matrices over curve collections, classical (Torgerson) MDS,
//! leave-one-out nearest-neighbor classification, and silhouette scores.

use crate::curve::PiecewiseGeodesicCurve;
use crate::reparam::{optimal_reparam_dp, DpError, DpGrid};
use crate::signature::{d_sig_from_log_signatures, log_signature, LogSignature, SignatureError};
use crate::srvt::{l2_distance, SrvRepresentation, SrvtError};
use nalgebra::DMatrix;
use rayon::prelude::*;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MethodError {
    #[error(transparent)]
    Srvt(#[from] SrvtError),
    #[error(transparent)]
    Dp(#[from] DpError),
    #[error(transparent)]
    Signature(#[from] SignatureError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("{got} labels for {expected} points")]
    LabelMismatch { expected: usize, got: usize },
    #[error("class {label:?} needs at least 2 members (or at least 2 classes present)")]
    DegenerateClass { label: String },
    #[error("k must be at least 1")]
    BadNeighborCount,
    #[error("curves disagree on joint count")]
    JointCountMismatch,
    #[error("distance for pair ({i}, {j}) failed: {source}")]
    PairFailure {
        i: usize,
        j: usize,
        source: MethodError,
    },
    #[error("matrix is not symmetric/nonnegative/zero-diagonal: {detail}")]
    InvalidMatrix { detail: String },
}

/// Which shape distance fills the matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum DistanceMethod {
    /// Pulled-back L2 distance after normalizing both curves to start at the
    /// identity; no alignment.
    Srvt,
    /// Elastic distance: DP alignment on the given grid (symmetrized).
    SrvtDp { grid: DpGrid },
    /// Normalized log-signature distance at the given truncation level.
    Signature { level: usize },
}

impl DistanceMethod {
    pub fn tag(&self) -> &'static str {
        match self {
            DistanceMethod::Srvt => "srvt",
            DistanceMethod::SrvtDp { .. } => "srvt_dp",
            DistanceMethod::Signature { .. } => "signature",
        }
    }
}

/// Symmetric pairwise distances with clip ids and the method that built
/// them. The diagonal is exactly zero (skipped, not computed).
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    ids: Vec<String>,
    values: Vec<f64>,
    method: String,
    build_seconds: f64,
}

impl DistanceMatrix {
    /// Wraps an existing full matrix (row-major), validating symmetry to
    /// 1e-12, nonnegativity, and a zero diagonal.
    pub fn from_values(
        ids: Vec<String>,
        values: Vec<f64>,
        method: impl Into<String>,
    ) -> Result<Self, AnalysisError> {
        let n = ids.len();
        if values.len() != n * n {
            return Err(AnalysisError::InvalidMatrix {
                detail: format!("{} values for {} ids", values.len(), n),
            });
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(AnalysisError::InvalidMatrix {
                    detail: format!("nonzero diagonal at {i}"),
                });
            }
            for j in 0..i {
                let (a, b) = (values[i * n + j], values[j * n + i]);
                if (a - b).abs() > 1e-12 || a < 0.0 {
                    return Err(AnalysisError::InvalidMatrix {
                        detail: format!("entry ({i}, {j}) = {a}, ({j}, {i}) = {b}"),
                    });
                }
            }
        }
        Ok(DistanceMatrix {
            ids,
            values,
            method: method.into(),
            build_seconds: 0.0,
        })
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n() + j]
    }

    pub fn method(&self) -> &str {
        &self.method
    }

    /// Wall-clock seconds spent building the matrix (zero for loaded ones).
    pub fn build_seconds(&self) -> f64 {
        self.build_seconds
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

enum Prepared {
    Srv(Vec<SrvRepresentation>),
    Logs(Vec<LogSignature>),
}

/// Pairwise distance matrix over a curve collection. Cells are independent,
/// so pairs run in parallel when `parallel` is set; results are identical
/// either way. Signatures and SRV transforms are computed once per curve and
/// reused across pairs. Any failing pair aborts with its indices.
pub fn distance_matrix(
    curves: &[PiecewiseGeodesicCurve],
    ids: &[String],
    method: &DistanceMethod,
    parallel: bool,
) -> Result<DistanceMatrix, AnalysisError> {
    distance_matrix_weighted(curves, ids, method, parallel, None)
}

/// [`distance_matrix`] with an optional per-joint weighting of the
/// Lie-algebra norm. Weights apply to the SRVT-family methods; the
/// signature method has no norm on curves to weight.
pub fn distance_matrix_weighted(
    curves: &[PiecewiseGeodesicCurve],
    ids: &[String],
    method: &DistanceMethod,
    parallel: bool,
    joint_weights: Option<&[f64]>,
) -> Result<DistanceMatrix, AnalysisError> {
    let n = curves.len();
    if n < 2 {
        return Err(AnalysisError::TooFewPoints { needed: 2, got: n });
    }
    if ids.len() != n {
        return Err(AnalysisError::LabelMismatch {
            expected: n,
            got: ids.len(),
        });
    }
    let d = curves[0].joint_count();
    if curves.iter().any(|c| c.joint_count() != d) {
        return Err(AnalysisError::JointCountMismatch);
    }

    let started = Instant::now();

    let prep = |i: usize| -> Result<_, AnalysisError> {
        let wrap = |e: MethodError| AnalysisError::PairFailure { i, j: i, source: e };
        match method {
            DistanceMethod::Srvt | DistanceMethod::SrvtDp { .. } => {
                crate::srvt::srv_transform_weighted(
                    &curves[i].normalize_to_identity(),
                    joint_weights,
                )
                .map(Prep::Srv)
                .map_err(|e| wrap(e.into()))
            }
            DistanceMethod::Signature { level } => log_signature(&curves[i], *level)
                .map(Prep::Log)
                .map_err(|e| wrap(e.into())),
        }
    };

    enum Prep {
        Srv(SrvRepresentation),
        Log(LogSignature),
    }

    let prepared: Prepared = {
        let items: Vec<Prep> = if parallel {
            (0..n).into_par_iter().map(prep).collect::<Result<_, _>>()?
        } else {
            (0..n).map(prep).collect::<Result<_, _>>()?
        };
        if matches!(method, DistanceMethod::Signature { .. }) {
            Prepared::Logs(
                items
                    .into_iter()
                    .map(|p| match p {
                        Prep::Log(l) => l,
                        Prep::Srv(_) => unreachable!(),
                    })
                    .collect(),
            )
        } else {
            Prepared::Srv(
                items
                    .into_iter()
                    .map(|p| match p {
                        Prep::Srv(q) => q,
                        Prep::Log(_) => unreachable!(),
                    })
                    .collect(),
            )
        }
    };

    let cell = |i: usize, j: usize| -> Result<f64, AnalysisError> {
        let wrap = |e: MethodError| AnalysisError::PairFailure { i, j, source: e };
        match (&prepared, method) {
            (Prepared::Srv(qs), DistanceMethod::Srvt) => {
                l2_distance(&qs[i], &qs[j]).map_err(|e| wrap(e.into()))
            }
            (Prepared::Srv(qs), DistanceMethod::SrvtDp { grid }) => {
                let fwd = optimal_reparam_dp(&qs[i], &qs[j], grid)
                    .map_err(|e| wrap(e.into()))?
                    .distance;
                let bwd = optimal_reparam_dp(&qs[j], &qs[i], grid)
                    .map_err(|e| wrap(e.into()))?
                    .distance;
                Ok(fwd.min(bwd))
            }
            (Prepared::Logs(ls), DistanceMethod::Signature { .. }) => {
                d_sig_from_log_signatures(&ls[i], &ls[j]).map_err(|e| wrap(e.into()))
            }
            _ => unreachable!(),
        }
    };

    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let results: Vec<(usize, usize, f64)> = if parallel {
        pairs
            .par_iter()
            .map(|&(i, j)| cell(i, j).map(|v| (i, j, v)))
            .collect::<Result<_, _>>()?
    } else {
        pairs
            .iter()
            .map(|&(i, j)| cell(i, j).map(|v| (i, j, v)))
            .collect::<Result<_, _>>()?
    };

    let mut values = vec![0.0; n * n];
    for (i, j, v) in results {
        values[i * n + j] = v;
        values[j * n + i] = v;
    }
    Ok(DistanceMatrix {
        ids: ids.to_vec(),
        values,
        method: method.tag().to_string(),
        build_seconds: started.elapsed().as_secs_f64(),
    })
}

/// Classical MDS embedding with the eigenvalue spectrum kept for
/// diagnostics. Points are centered and each axis carries a deterministic
/// sign (first nonzero loading positive).
#[derive(Debug, Clone, PartialEq)]
pub struct MdsEmbedding {
    /// One point per input row, `dim` coordinates each.
    pub points: Vec<Vec<f64>>,
    /// Full spectrum of the double-centered matrix, descending.
    pub eigenvalues: Vec<f64>,
}

impl MdsEmbedding {
    /// Fraction of spectral mass on negative eigenvalues; nonzero means the
    /// distances are not exactly Euclidean-embeddable.
    pub fn negative_eigenvalue_mass(&self) -> f64 {
        let total: f64 = self.eigenvalues.iter().map(|l| l.abs()).sum();
        if total == 0.0 {
            return 0.0;
        }
        self.eigenvalues.iter().fold(0.0, |acc, l| acc + l.min(0.0).abs()) / total
    }
}

/// Classical (Torgerson) MDS: eigendecomposition of B = −½·J·D²·J, embedding
/// with the top `dim` eigenpairs scaled by √eigenvalue. Negative eigenvalues
/// are clamped to zero for the embedding and reported in the spectrum.
pub fn classical_mds(d: &DistanceMatrix, dim: usize) -> Result<MdsEmbedding, AnalysisError> {
    let n = d.n();
    if n < dim + 1 {
        return Err(AnalysisError::TooFewPoints {
            needed: dim + 1,
            got: n,
        });
    }
    // Double-center the squared distances.
    let mut b = DMatrix::<f64>::zeros(n, n);
    let sq = |i: usize, j: usize| d.get(i, j) * d.get(i, j);
    let mut row_means = vec![0.0; n];
    let mut grand = 0.0;
    for (i, mean) in row_means.iter_mut().enumerate() {
        let mut acc = 0.0;
        for j in 0..n {
            acc += sq(i, j);
        }
        *mean = acc / n as f64;
        grand += acc;
    }
    grand /= (n * n) as f64;
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] = -0.5 * (sq(i, j) - row_means[i] - row_means[j] + grand);
        }
    }

    let eig = b.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &c| eig.eigenvalues[c].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();

    let mut points = vec![vec![0.0; dim]; n];
    for (axis, &src) in order.iter().take(dim).enumerate() {
        let lambda = eig.eigenvalues[src].max(0.0);
        let scale = lambda.sqrt();
        let mut col: Vec<f64> = (0..n).map(|i| eig.eigenvectors[(i, src)]).collect();
        if let Some(first) = col.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                col.iter_mut().for_each(|x| *x = -*x);
            }
        }
        let mean: f64 = col.iter().sum::<f64>() / n as f64;
        for i in 0..n {
            points[i][axis] = (col[i] - mean) * scale;
        }
    }
    Ok(MdsEmbedding { points, eigenvalues })
}

/// Leave-one-out k-nearest-neighbor accuracy. Neighbor ties break by
/// smaller distance then lower index; vote ties go to the tied label whose
/// neighbor is nearest.
pub fn loo_knn_accuracy(
    d: &DistanceMatrix,
    labels: &[String],
    k: usize,
) -> Result<f64, AnalysisError> {
    let n = d.n();
    if labels.len() != n {
        return Err(AnalysisError::LabelMismatch {
            expected: n,
            got: labels.len(),
        });
    }
    if k == 0 {
        return Err(AnalysisError::BadNeighborCount);
    }
    let mut correct = 0usize;
    for i in 0..n {
        let mut others: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (d.get(i, j), j))
            .collect();
        others.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let neighbors = &others[..k.min(others.len())];

        let mut votes: Vec<(&str, usize)> = Vec::new();
        for &(_, j) in neighbors {
            match votes.iter_mut().find(|(l, _)| *l == labels[j]) {
                Some((_, c)) => *c += 1,
                None => votes.push((&labels[j], 1)),
            }
        }
        let top = votes.iter().map(|&(_, c)| c).max().unwrap();
        let predicted = neighbors
            .iter()
            .map(|&(_, j)| labels[j].as_str())
            .find(|l| votes.iter().any(|&(vl, c)| vl == *l && c == top))
            .unwrap();
        if predicted == labels[i] {
            correct += 1;
        }
    }
    Ok(correct as f64 / n as f64)
}

/// Mean silhouette coefficient computed directly from the distance matrix.
pub fn silhouette(d: &DistanceMatrix, labels: &[String]) -> Result<f64, AnalysisError> {
    let n = d.n();
    if labels.len() != n {
        return Err(AnalysisError::LabelMismatch {
            expected: n,
            got: labels.len(),
        });
    }
    let mut classes: Vec<&str> = labels.iter().map(|s| s.as_str()).collect();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(AnalysisError::DegenerateClass {
            label: classes.first().unwrap_or(&"").to_string(),
        });
    }
    for c in &classes {
        if labels.iter().filter(|l| l.as_str() == *c).count() < 2 {
            return Err(AnalysisError::DegenerateClass {
                label: c.to_string(),
            });
        }
    }

    let mut total = 0.0;
    for i in 0..n {
        let own = labels[i].as_str();
        let a = {
            let mates: Vec<usize> = (0..n)
                .filter(|&j| j != i && labels[j] == own)
                .collect();
            mates.iter().map(|&j| d.get(i, j)).sum::<f64>() / mates.len() as f64
        };
        let b = classes
            .iter()
            .filter(|&&c| c != own)
            .map(|&c| {
                let members: Vec<usize> = (0..n).filter(|&j| labels[j] == c).collect();
                members.iter().map(|&j| d.get(i, j)).sum::<f64>() / members.len() as f64
            })
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        total += if denom > 0.0 { (b - a) / denom } else { 0.0 };
    }
    Ok(total / n as f64)
}
