//! Dynamic-programming solver for the elastic shape distance: the infimum
//! over reparameterizations of the warped L2 objective
//! √∫‖q0(t) − q1(φ(t))·√φ̇‖² dt.
//!
//! The search space is the set of piecewise-linear warps whose graphs are
//! monotone lattice paths from (0,0) to (M,M) on an M×M grid, built from a
//! fixed set of strictly increasing steps. Every lattice edge carries the
//! exact integral of the objective over its time window (the integrands are
//! piecewise constant, so the integrals are finite sums), and the table is
//! filled with deterministic lexicographic tie-breaking.

use crate::curve::{PiecewiseGeodesicCurve, Reparameterization};
use crate::srvt::{srv_transform, SrvRepresentation, SrvtError};
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DpError {
    #[error("dimension mismatch: {a} vs {b}")]
    DimensionMismatch { a: usize, b: usize },
    #[error("grid size {size} too coarse; need at least 2")]
    GridTooCoarse { size: usize },
    #[error("step set is empty or contains a non-increasing step")]
    BadStepSet,
    #[error("no lattice path reaches (M, M) with the given step set")]
    NoFeasiblePath,
    #[error(transparent)]
    Srvt(#[from] SrvtError),
}

/// Lattice discretization of the warp search space.
#[derive(Debug, Clone, PartialEq)]
pub struct DpGrid {
    size: usize,
    steps: Vec<(usize, usize)>,
    penalty: f64,
}

impl DpGrid {
    /// Grid with an explicit step set. Every step must strictly increase
    /// both coordinates.
    pub fn new(size: usize, mut steps: Vec<(usize, usize)>) -> Result<Self, DpError> {
        if size < 2 {
            return Err(DpError::GridTooCoarse { size });
        }
        if steps.is_empty() || steps.iter().any(|&(a, b)| a == 0 || b == 0) {
            return Err(DpError::BadStepSet);
        }
        steps.sort_unstable();
        steps.dedup();
        Ok(DpGrid {
            size,
            steps,
            penalty: 0.0,
        })
    }

    /// Grid with the full step set {(i,j) : 1 ≤ i,j ≤ max_step}, bounding
    /// warp slopes to [1/max_step, max_step].
    pub fn with_max_step(size: usize, max_step: usize) -> Result<Self, DpError> {
        if max_step == 0 {
            return Err(DpError::BadStepSet);
        }
        let steps = (1..=max_step)
            .flat_map(|a| (1..=max_step).map(move |b| (a, b)))
            .collect();
        Self::new(size, steps)
    }

    /// Optional step penalty λ·Σ (φ(s_m) − s_m)² added to every edge over
    /// the grid nodes it spans. Zero by default; the plain objective carries
    /// no penalty.
    pub fn with_penalty(mut self, penalty: f64) -> Self {
        self.penalty = penalty;
        self
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn steps(&self) -> &[(usize, usize)] {
        &self.steps
    }
}

impl Default for DpGrid {
    fn default() -> Self {
        DpGrid::with_max_step(64, 4).expect("default grid is valid")
    }
}

/// Outcome of one DP alignment.
#[derive(Debug, Clone)]
pub struct AlignmentResult {
    /// The optimal piecewise-linear warp through the lattice.
    pub reparameterization: Reparameterization,
    /// √(optimal cost); the elastic distance for this grid.
    pub distance: f64,
    /// The optimal value of the DP table at (M, M).
    pub cost: f64,
}

/// Exact cost of the lattice edge (k,l) → (i,j): the integral of
/// ‖q0(t) − q1(φ(t))·√φ̇‖² over t ∈ [k/M, i/M] with φ the linear map onto
/// [l/M, j/M], plus the grid's step penalty when one is set.
#[allow(clippy::too_many_arguments)]
pub fn edge_cost(
    q0: &SrvRepresentation,
    q1: &SrvRepresentation,
    m: usize,
    k: usize,
    l: usize,
    i: usize,
    j: usize,
    penalty: f64,
    cuts: &mut Vec<f64>,
) -> f64 {
    let mf = m as f64;
    let (ta, tb) = (k as f64 / mf, i as f64 / mf);
    let (ua, ub) = (l as f64 / mf, j as f64 / mf);
    let slope = (ub - ua) / (tb - ta);
    let sqrt_slope = slope.sqrt();

    cuts.clear();
    cuts.push(ta);
    let b0 = q0.boundaries();
    let mut idx = b0.partition_point(|&x| x <= ta);
    while idx < b0.len() && b0[idx] < tb {
        cuts.push(b0[idx]);
        idx += 1;
    }
    let b1 = q1.boundaries();
    let mut idx = b1.partition_point(|&x| x <= ua);
    while idx < b1.len() && b1[idx] < ub {
        cuts.push(ta + (b1[idx] - ua) / slope);
        idx += 1;
    }
    cuts.push(tb);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // Cuts from the two sides that are mathematically the same point land a
    // few ulps apart; merging them avoids sliver intervals whose O(1)
    // integrand would pollute exactly-zero costs.
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-13);

    let mut acc = 0.0;
    for w in cuts.windows(2) {
        let dt = w[1] - w[0];
        if dt <= 0.0 {
            continue;
        }
        let mid = 0.5 * (w[0] + w[1]);
        let v0 = q0.value_at(mid);
        let v1 = q1.value_at(ua + (mid - ta) * slope);
        let mut d2 = 0.0;
        for (x, y) in v0.iter().zip(v1.iter()) {
            let d = x - sqrt_slope * y;
            d2 += d * d;
        }
        acc += d2 * dt;
    }

    if penalty > 0.0 {
        for node in (k + 1)..=i {
            let t = node as f64 / mf;
            let dev = ua + (t - ta) * slope - t;
            acc += penalty * dev * dev;
        }
    }
    acc
}

/// Globally optimal monotone lattice path from (0,0) to (M,M) for the given
/// grid and step set, minimizing the summed edge costs. Ties prefer the
/// predecessor with lexicographically smaller (k,l), so tables are
/// deterministic.
pub fn optimal_reparam_dp(
    q0: &SrvRepresentation,
    q1: &SrvRepresentation,
    grid: &DpGrid,
) -> Result<AlignmentResult, DpError> {
    if q0.dim() != q1.dim() {
        return Err(DpError::DimensionMismatch {
            a: q0.dim(),
            b: q1.dim(),
        });
    }
    let m = grid.size;
    let n = m + 1;
    let mut cost = vec![f64::INFINITY; n * n];
    let mut prev = vec![u32::MAX; n * n];
    cost[0] = 0.0;

    let mut cuts: Vec<f64> = Vec::with_capacity(64);
    for i in 0..=m {
        for j in 0..=m {
            if i == 0 && j == 0 {
                continue;
            }
            let mut best = f64::INFINITY;
            let mut best_prev = u32::MAX;
            for &(di, dj) in &grid.steps {
                if di > i || dj > j {
                    continue;
                }
                let (k, l) = (i - di, j - dj);
                let base = cost[k * n + l];
                if !base.is_finite() {
                    continue;
                }
                let cand = base + edge_cost(q0, q1, m, k, l, i, j, grid.penalty, &mut cuts);
                let id = (k * n + l) as u32;
                if cand < best || (cand == best && id < best_prev) {
                    best = cand;
                    best_prev = id;
                }
            }
            cost[i * n + j] = best;
            prev[i * n + j] = best_prev;
        }
    }

    let total = cost[m * n + m];
    if !total.is_finite() {
        return Err(DpError::NoFeasiblePath);
    }

    // Backtrack the node sequence and turn it into a piecewise-linear warp.
    let mut nodes = vec![(m, m)];
    let mut at = m * n + m;
    while at != 0 {
        at = prev[at] as usize;
        nodes.push((at / n, at % n));
    }
    nodes.reverse();
    let mf = m as f64;
    let breakpoints = nodes.iter().map(|&(i, _)| i as f64 / mf).collect();
    let values = nodes.iter().map(|&(_, j)| j as f64 / mf).collect();
    let reparameterization = Reparameterization::new(breakpoints, values)
        .expect("lattice path is strictly monotone");

    Ok(AlignmentResult {
        reparameterization,
        distance: total.max(0.0).sqrt(),
        cost: total,
    })
}

/// Elastic shape distance between two curves: normalize both to start at the
/// identity, transform, and align. The lattice DP is not symmetric in its
/// arguments, so the reported value is the minimum over both orders; see
/// [`shape_distance_one_sided`] for the raw one-sided value.
pub fn shape_distance(
    c0: &PiecewiseGeodesicCurve,
    c1: &PiecewiseGeodesicCurve,
    grid: &DpGrid,
) -> Result<f64, DpError> {
    let q0 = srv_transform(&c0.normalize_to_identity())?;
    let q1 = srv_transform(&c1.normalize_to_identity())?;
    let forward = optimal_reparam_dp(&q0, &q1, grid)?.distance;
    let backward = optimal_reparam_dp(&q1, &q0, grid)?.distance;
    Ok(forward.min(backward))
}

/// One-sided elastic distance: warps only the second argument.
pub fn shape_distance_one_sided(
    c0: &PiecewiseGeodesicCurve,
    c1: &PiecewiseGeodesicCurve,
    grid: &DpGrid,
) -> Result<f64, DpError> {
    let q0 = srv_transform(&c0.normalize_to_identity())?;
    let q1 = srv_transform(&c1.normalize_to_identity())?;
    Ok(optimal_reparam_dp(&q0, &q1, grid)?.distance)
}

/// Random grid-representable warp: a uniformly sampled monotone lattice path
/// using the grid's step set (restricted to moves that can still reach the
/// corner). Useful for exercising warp-recovery at exactly zero cost.
pub fn random_grid_reparam(grid: &DpGrid, rng: &mut impl Rng) -> Reparameterization {
    let m = grid.size;
    let n = m + 1;
    // reach[i*n+j] = can (i,j) still reach (m,m)?
    let mut reach = vec![false; n * n];
    reach[m * n + m] = true;
    for i in (0..=m).rev() {
        for j in (0..=m).rev() {
            if i == m && j == m {
                continue;
            }
            reach[i * n + j] = grid
                .steps
                .iter()
                .any(|&(a, b)| i + a <= m && j + b <= m && reach[(i + a) * n + j + b]);
        }
    }
    assert!(reach[0], "step set cannot reach the corner");

    let (mut i, mut j) = (0, 0);
    let mut xs = vec![0.0];
    let mut ys = vec![0.0];
    let mf = m as f64;
    while (i, j) != (m, m) {
        let options: Vec<(usize, usize)> = grid
            .steps
            .iter()
            .copied()
            .filter(|&(a, b)| i + a <= m && j + b <= m && reach[(i + a) * n + j + b])
            .collect();
        let (a, b) = options[rng.gen_range(0..options.len())];
        i += a;
        j += b;
        xs.push(i as f64 / mf);
        ys.push(j as f64 / mf);
    }
    Reparameterization::new(xs, ys).expect("lattice path is monotone")
}
