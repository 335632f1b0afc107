//! Embedded property suites for the CLI's `selftest` subcommand: seeded
//! spot-checks of the identities the library is built on.

use crate::curve::Reparameterization;
use crate::reparam::{optimal_reparam_dp, DpGrid};
use crate::signature::{d_sig, reverse_signature, signature};
use crate::srvt::{l2_distance, srv_transform, warp_srv};
use crate::tensor::TruncatedTensor;
use crate::testing::random_curve;
use rand::rngs::StdRng;
use rand::SeedableRng;

#[derive(Debug, Clone)]
pub struct SelfTestOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, worst: f64, tol: f64) -> SelfTestOutcome {
    SelfTestOutcome {
        name,
        passed: worst <= tol,
        detail: format!("worst {worst:.3e}, tolerance {tol:.0e}"),
    }
}

/// Runs every suite and reports one outcome per identity.
pub fn run_selftests() -> Vec<SelfTestOutcome> {
    let mut rng = StdRng::seed_from_u64(0x5e1f);
    let mut results = Vec::new();

    // Signature identities: Chen splitting, reversal, shuffle, warp invariance.
    let mut worst_chen = 0.0f64;
    let mut worst_rev = 0.0f64;
    let mut worst_shuffle = 0.0f64;
    let mut worst_dsig = 0.0f64;
    for _ in 0..10 {
        let c = random_curve(&mut rng, 2, 6);
        let whole = signature(&c, 0.0, 1.0, 3).unwrap();
        let left = signature(&c, 0.0, 0.41, 3).unwrap();
        let right = signature(&c, 0.41, 1.0, 3).unwrap();
        let glued = left.tensor().product(right.tensor()).unwrap();
        worst_chen = worst_chen.max(whole.tensor().sub(&glued).unwrap().norm(true));

        let rev = reverse_signature(&whole).unwrap();
        let unit = TruncatedTensor::unit(whole.dim(), whole.level()).unwrap();
        let prod = rev.tensor().product(whole.tensor()).unwrap();
        worst_rev = worst_rev.max(prod.sub(&unit).unwrap().norm(true));

        worst_shuffle = worst_shuffle.max(whole.tensor().shuffle_check());

        let phi = Reparameterization::random(&mut rng, 8, 1.0 / 3.0);
        let warped = c.reparameterize(&phi).unwrap();
        worst_dsig = worst_dsig.max(d_sig(&c, &warped, 3).unwrap());
    }
    results.push(outcome("signature.chen_split", worst_chen, 1e-12));
    results.push(outcome("signature.reversal_inverse", worst_rev, 1e-12));
    results.push(outcome("signature.shuffle_identities", worst_shuffle, 1e-10));
    results.push(outcome("signature.warp_invariance", worst_dsig, 1e-10));

    // SRVT: equivariance under warps and warp invariance of the L2 distance.
    let mut worst_equiv = 0.0f64;
    let mut worst_l2 = 0.0f64;
    for _ in 0..10 {
        let c = random_curve(&mut rng, 2, 5);
        let phi = Reparameterization::random(&mut rng, 8, 1.0 / 3.0);
        let lhs = warp_srv(&srv_transform(&c).unwrap(), &phi).unwrap();
        let rhs = srv_transform(&c.reparameterize(&phi).unwrap()).unwrap();
        worst_equiv = worst_equiv.max(l2_distance(&lhs, &rhs).unwrap());

        let other = random_curve(&mut rng, 2, 5);
        let q0 = srv_transform(&c).unwrap();
        let q1 = srv_transform(&other).unwrap();
        let base = l2_distance(&q0, &q1).unwrap();
        let warped = l2_distance(
            &warp_srv(&q0, &phi).unwrap(),
            &warp_srv(&q1, &phi).unwrap(),
        )
        .unwrap();
        worst_l2 = worst_l2.max((base - warped).abs());
    }
    results.push(outcome("srvt.equivariance", worst_equiv, 1e-12));
    results.push(outcome("srvt.l2_warp_invariance", worst_l2, 1e-12));

    // DP: optimum equals exhaustive enumeration on a small grid.
    let grid = DpGrid::new(4, vec![(1, 1), (1, 2), (2, 1)]).unwrap();
    let mut worst_dp = 0.0f64;
    for _ in 0..5 {
        let q0 = srv_transform(&random_curve(&mut rng, 1, 4)).unwrap();
        let q1 = srv_transform(&random_curve(&mut rng, 1, 5)).unwrap();
        let dp = optimal_reparam_dp(&q0, &q1, &grid).unwrap().cost;
        let brute = enumerate_min_cost(&q0, &q1, &grid);
        worst_dp = worst_dp.max((dp - brute).abs());
    }
    results.push(outcome("reparam.dp_vs_enumeration", worst_dp, 0.0));

    results
}

fn enumerate_min_cost(
    q0: &crate::srvt::SrvRepresentation,
    q1: &crate::srvt::SrvRepresentation,
    grid: &DpGrid,
) -> f64 {
    fn go(
        q0: &crate::srvt::SrvRepresentation,
        q1: &crate::srvt::SrvRepresentation,
        grid: &DpGrid,
        at: (usize, usize),
        acc: f64,
        best: &mut f64,
        cuts: &mut Vec<f64>,
    ) {
        let m = grid.size();
        if at == (m, m) {
            *best = best.min(acc);
            return;
        }
        for &(a, b) in grid.steps() {
            let (i, j) = (at.0 + a, at.1 + b);
            if i > m || j > m {
                continue;
            }
            let c = crate::reparam::edge_cost(q0, q1, m, at.0, at.1, i, j, 0.0, cuts);
            go(q0, q1, grid, (i, j), acc + c, best, cuts);
        }
    }
    let mut best = f64::INFINITY;
    let mut cuts = Vec::new();
    go(q0, q1, grid, (0, 0), 0.0, &mut best, &mut cuts);
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_selftests_pass() {
        for r in run_selftests() {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }
}
