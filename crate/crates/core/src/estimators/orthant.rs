//! Monte Carlo check of the two orthant inequalities for the truncated
//! process started from `[-n, n]^d` with the all-zero background:
//!
//! * volume: `P[|C ∩ [0, L)^d| <= N] <= P[|C| <= 2^d N]^(2^-d)`, with
//!   `C = _L C_T`;
//! * side: `P[N_+ <= M]^(d 2^d) <= P[N <= M d 2^d]`, with the side counts
//!   of [`boundary_stats`].

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{check_horizon, check_replicates};
use crate::dynamics::boundary_stats;
use crate::events::EventLog;
use crate::lattice::{points_in, LatticeBox, Params};
use crate::replicate::{self, replicate_seed};
use crate::stats::config_digest;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrthantRow {
    /// `"volume"` or `"side"`.
    pub inequality: String,
    /// `N` for the volume inequality, `M` for the side inequality.
    pub level: u64,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`.
    pub margin: f64,
    /// Delta-method standard error of the margin.
    pub sigma: f64,
    /// `margin >= -3 sigma`.
    pub holds: bool,
    /// Both underlying indicators were constant over the replicates.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrthantReport {
    pub params: Params,
    pub n: u32,
    pub l: u32,
    pub t: f64,
    pub replicates: u64,
    pub master_seed: u64,
    pub config_digest: String,
    pub rows: Vec<OrthantRow>,
}

impl OrthantReport {
    pub fn all_hold(&self) -> bool {
        self.rows.iter().all(|r| r.holds)
    }
}

struct Sample {
    quadrant: usize,
    total: usize,
    n_count: usize,
    n_plus_count: usize,
}

/// Margin `g(a, b)` of two indicator means with gradient `(ga, gb)`.
fn margin_row(
    inequality: &str,
    level: u64,
    pairs: &[(bool, bool)],
    g: impl Fn(f64, f64) -> (f64, f64, f64, f64, f64),
) -> OrthantRow {
    let n = pairs.len() as f64;
    let a = pairs.iter().filter(|p| p.0).count() as f64 / n;
    let b = pairs.iter().filter(|p| p.1).count() as f64 / n;
    let ab = pairs.iter().filter(|p| p.0 && p.1).count() as f64 / n;
    let (var_a, var_b, cov) = (a * (1.0 - a), b * (1.0 - b), ab - a * b);
    let (lhs, rhs, margin, ga, gb) = g(a, b);
    let degenerate = var_a == 0.0 && var_b == 0.0;
    let var = if ga.is_finite() && gb.is_finite() {
        (ga * ga * var_a + gb * gb * var_b + 2.0 * ga * gb * cov).max(0.0) / n
    } else {
        0.0
    };
    let sigma = var.sqrt();
    OrthantRow {
        inequality: inequality.into(),
        level,
        lhs,
        rhs,
        margin,
        sigma,
        holds: margin >= -3.0 * sigma,
        degenerate,
    }
}

/// Estimates both sides of each inequality from one replicate ensemble
/// (box of half-width `L`, horizon `T`).
#[allow(clippy::too_many_arguments)]
pub fn check_orthant_inequalities(
    params: &Params,
    n: u32,
    l: u32,
    t: f64,
    volume_levels: &[u64],
    side_levels: &[u64],
    replicates: u64,
    master_seed: u64,
) -> Result<OrthantReport> {
    params.validate()?;
    check_replicates(replicates)?;
    check_horizon(t)?;
    if n >= l {
        return Err(Error::GeometryMisfit(format!("need n < L, got n = {n}, L = {l}")));
    }
    let d = params.d;
    let config_digest = config_digest(&json!({
        "estimator": "orthant", "params": params, "n": n, "L": l, "T": t,
        "N": volume_levels, "M": side_levels, "replicates": replicates,
    }));
    let lbox = LatticeBox::closed(l);
    let start = points_in(&vec![-(n as i32); d], &vec![n as i32; d]);
    let samples = replicate::try_map(replicates, |r| -> Result<Sample> {
        let log = EventLog::build(*params, lbox, t, replicate_seed(master_seed, r))?;
        let stats = boundary_stats(&log, &start, l, t)?;
        let lat = log.lattice();
        let total = stats.infected.iter().filter(|&&c| c).count();
        let quadrant = (0..lat.n_sites())
            .filter(|&i| stats.infected[i] && (0..d).all(|a| (0..l as i32).contains(&lat.coord(i, a))))
            .count();
        Ok(Sample { quadrant, total, n_count: stats.n_count, n_plus_count: stats.n_plus_count })
    })?;
    let two_d = 1u64 << d;
    let mut rows = Vec::new();
    for &big_n in volume_levels {
        let pairs: Vec<(bool, bool)> = samples
            .iter()
            .map(|s| (s.quadrant as u64 <= big_n, s.total as u64 <= two_d * big_n))
            .collect();
        let e = 1.0 / two_d as f64;
        rows.push(margin_row("volume", big_n, &pairs, |a, b| {
            let rhs = b.powf(e);
            (a, rhs, rhs - a, -1.0, e * b.powf(e - 1.0))
        }));
    }
    for &m in side_levels {
        let e = (d as u64 * two_d) as i32;
        let pairs: Vec<(bool, bool)> = samples
            .iter()
            .map(|s| (s.n_plus_count as u64 <= m, s.n_count as u64 <= m * d as u64 * two_d))
            .collect();
        rows.push(margin_row("side", m, &pairs, |a, b| {
            let lhs = a.powi(e);
            (lhs, b, b - lhs, -(e as f64) * a.powi(e - 1), 1.0)
        }));
    }
    Ok(OrthantReport {
        params: *params,
        n,
        l,
        t,
        replicates,
        master_seed,
        config_digest,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn huge_levels_are_trivially_tight() {
        let params = Params::new(1, 1.0, 1.0, 0.5, 0.5).unwrap();
        let report = check_orthant_inequalities(&params, 1, 4, 2.0, &[1000], &[1000], 200, 3).unwrap();
        for row in &report.rows {
            assert_eq!(row.lhs, 1.0);
            assert_eq!(row.rhs, 1.0);
            assert_eq!(row.margin, 0.0);
            assert!(row.holds && row.degenerate);
        }
    }

    #[test]
    fn rejects_misfit() {
        let params = Params::new(1, 1.0, 1.0, 0.5, 0.5).unwrap();
        assert!(check_orthant_inequalities(&params, 4, 4, 2.0, &[1], &[1], 10, 3).is_err());
        assert!(check_orthant_inequalities(&params, 1, 4, 0.0, &[1], &[1], 10, 3).is_err());
    }
}
