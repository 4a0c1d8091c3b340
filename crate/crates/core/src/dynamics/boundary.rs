//! Reachable points on the side of a space-time box.

use std::collections::BTreeMap;

use super::sweep::{ChangeKind, Mode, Sweep, SweepOptions};
use crate::events::EventLog;
use crate::lattice::Site;
use crate::{Error, Result};

/// Reach times on the side `{|x|_inf = L} x [0, T]` of a truncated run.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryStats {
    /// Boundary sites that are reached, with their sorted reach times.
    pub side_points: BTreeMap<Site, Vec<f64>>,
    /// Sum over side time-lines of the largest 1-separated subset.
    pub n_count: usize,
    /// Same count restricted to the face `x_1 = L`, `x_i >= 0` for `i > 1`.
    pub n_plus_count: usize,
    /// The truncated infected set at time `T`.
    pub infected: Vec<bool>,
}

/// Size of the largest subset of `times` (sorted ascending) whose elements
/// are pairwise at least 1 apart. Taking the earliest admissible time each
/// step is optimal for this interval-scheduling problem.
pub fn max_separated(times: &[f64]) -> usize {
    let mut last = f64::NEG_INFINITY;
    let mut count = 0;
    for &t in times {
        if t - last >= 1.0 {
            count += 1;
            last = t;
        }
    }
    count
}

/// Runs the `L`-truncated process from `A` with the all-zero background at
/// time 0 and records every arrow that lands on the side of `[-L, L]^d`
/// from an infected interior site by time `T`.
pub fn boundary_stats(log: &EventLog, a: &[Site], l: u32, t: f64) -> Result<BoundaryStats> {
    let lat = log.lattice();
    if l > lat.half_width() {
        return Err(Error::GeometryMisfit(format!(
            "L = {l} exceeds the box half-width {}",
            lat.half_width()
        )));
    }
    if !(t > 0.0 && t <= log.horizon()) {
        return Err(Error::InvalidWindow(format!("T = {t} outside (0, {}]", log.horizon())));
    }
    let mut infected = vec![false; lat.n_sites()];
    for site in a {
        if site.len() != lat.dim() || site.iter().any(|&c| c.unsigned_abs() >= l) {
            return Err(Error::GeometryMisfit(format!("site {site:?} is not strictly inside (-{l}, {l})^d")));
        }
        infected[lat.index(site)?] = true;
    }
    let beta0 = vec![false; lat.n_sites()];
    let mut sweep = Sweep::new(log, &beta0, &infected, 0.0, SweepOptions::new(log.params().p, Mode::Truncated(l)))?;
    let mut side_points: BTreeMap<Site, Vec<f64>> = BTreeMap::new();
    while let Some(change) = sweep.next_change(t) {
        if change.kind == ChangeKind::BoundaryHit {
            side_points.entry(lat.coords(change.site)).or_default().push(change.time);
        }
    }
    let l = l as i32;
    let mut n_count = 0;
    let mut n_plus_count = 0;
    for (site, times) in &mut side_points {
        times.dedup();
        let k = max_separated(times);
        n_count += k;
        if site[0] == l && site[1..].iter().all(|&c| c >= 0) {
            n_plus_count += k;
        }
    }
    Ok(BoundaryStats { side_points, n_count, n_plus_count, infected: sweep.infected().to_vec() })
}
