//! Site-oriented percolation on `N`: level `m + 1` site `i` is reachable if
//! it is open and one of `i - 1`, `i` is reachable at level `m`.

use rand::Rng;
use serde_json::json;

use crate::estimators::check_replicates;
use crate::replicate;
use crate::rng;
use crate::stats::{config_digest, Estimate};
use crate::{Error, Result};

pub const MAX_EXACT_DEPTH: u32 = 5;

fn check_inputs(p_bond: f64, depth: u32) -> Result<()> {
    if !(0.0..=1.0).contains(&p_bond) {
        return Err(Error::InvalidArgument(format!("p_bond must lie in [0, 1], got {p_bond}")));
    }
    if depth == 0 {
        return Err(Error::InvalidArgument("depth must be at least 1".into()));
    }
    Ok(())
}

/// The uniforms of replicate `r`, level by level (`m = 1..=depth`, sites `0..=m`).
fn replicate_uniforms(master_seed: u64, r: u64, depth: u32) -> Vec<f64> {
    let mut stream = rng::substream(master_seed, &[rng::purpose::PERCOLATION, r]);
    let n = (depth * (depth + 3) / 2) as usize;
    (0..n).map(|_| stream.random::<f64>()).collect()
}

/// Whether the cluster of the origin reaches level `depth`, site `(m, i)`
/// being open iff its uniform is below `p_bond`.
fn reaches(uniforms: &[f64], p_bond: f64, depth: u32) -> bool {
    let mut alive = vec![true];
    let mut k = 0;
    for m in 1..=depth as usize {
        let mut next = vec![false; m + 1];
        for (i, slot) in next.iter_mut().enumerate() {
            let fed = alive.get(i).copied().unwrap_or(false) || (i > 0 && alive[i - 1]);
            *slot = fed && uniforms[k] < p_bond;
            k += 1;
        }
        if !next.iter().any(|&a| a) {
            return false;
        }
        alive = next;
    }
    true
}

/// Survival to `depth` at each value of `p_bond`, all on the same uniforms,
/// so the estimates are nondecreasing in `p_bond` replicate by replicate.
pub fn op_survival_curve(p_bonds: &[f64], depth: u32, replicates: u64, master_seed: u64) -> Result<Vec<Estimate>> {
    check_replicates(replicates)?;
    for &p in p_bonds {
        check_inputs(p, depth)?;
    }
    let digest = config_digest(&json!({
        "estimator": "op-survival", "p_bond": p_bonds, "depth": depth, "replicates": replicates,
    }));
    let hits = replicate::map(replicates, |r| {
        let u = replicate_uniforms(master_seed, r, depth);
        p_bonds.iter().map(|&p| reaches(&u, p, depth)).collect::<Vec<bool>>()
    });
    Ok((0..p_bonds.len())
        .map(|j| {
            let k = hits.iter().filter(|h| h[j]).count() as u64;
            Estimate::proportion(k, replicates, master_seed, &digest)
        })
        .collect())
}

pub fn op_survival(p_bond: f64, depth: u32, replicates: u64, master_seed: u64) -> Result<Estimate> {
    Ok(op_survival_curve(&[p_bond], depth, replicates, master_seed)?.remove(0))
}

/// Exact survival probability by enumerating every open/closed pattern of
/// the cone below `depth` (at most `2^20` patterns).
pub fn op_survival_exact(p_bond: f64, depth: u32) -> Result<f64> {
    check_inputs(p_bond, depth)?;
    if depth > MAX_EXACT_DEPTH {
        return Err(Error::InvalidArgument(format!("exact enumeration supports depth <= {MAX_EXACT_DEPTH}")));
    }
    let n = (depth * (depth + 3) / 2) as usize;
    let mut total = 0.0;
    let mut u = vec![0.0; n];
    for pattern in 0u32..1 << n {
        for (k, slot) in u.iter_mut().enumerate() {
            // Encode open as 0 and closed as 1, then threshold at 1/2.
            *slot = if pattern >> k & 1 == 1 { 0.0 } else { 1.0 };
        }
        let opened = pattern.count_ones() as i32;
        if reaches(&u, 0.5, depth) {
            total += p_bond.powi(opened) * (1.0 - p_bond).powi(n as i32 - opened);
        }
    }
    Ok(total)
}
