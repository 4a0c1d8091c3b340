//! Richardson growth from the origin against the agreement field.

use serde_json::json;

use super::{check_horizon, check_replicates};
use crate::background::agreement_time;
use crate::dynamics::{ChangeKind, Mode, Sweep, SweepOptions};
use crate::events::EventLog;
use crate::lattice::{LatticeBox, Params};
use crate::replicate::{self, replicate_seed};
use crate::stats::{config_digest, Estimate};
use crate::{Error, Result};

/// For each `n` in `starts`, estimates the probability that the Richardson
/// set grown from the origin stays inside the agreement field for every
/// `t` in `[n, horizon]`. All values of `n` share the replicate logs, so the
/// estimates are nondecreasing in `n` exactly.
///
/// Both sets only grow, so the event fails iff some site `x` reached at
/// time `tau(x) <= horizon` has agreement time later than `max(n, tau(x))`.
pub fn estimate_agreement_cover(
    params: &Params,
    starts: &[f64],
    horizon: f64,
    lbox: LatticeBox,
    replicates: u64,
    master_seed: u64,
) -> Result<Vec<(f64, Estimate)>> {
    params.validate()?;
    check_replicates(replicates)?;
    check_horizon(horizon)?;
    if starts.is_empty() || starts.iter().any(|&n| !(0.0..=horizon).contains(&n)) {
        return Err(Error::InvalidWindow(format!("start times {starts:?} must lie in [0, {horizon}]")));
    }
    let digest = config_digest(&json!({
        "estimator": "agreement-cover", "params": params, "starts": starts, "horizon": horizon,
        "box": lbox, "replicates": replicates,
    }));
    // Per replicate, the largest n at which the event still fails (or -inf).
    let worst = replicate::try_map(replicates, |r| -> Result<f64> {
        let log = EventLog::build(*params, lbox, horizon, replicate_seed(master_seed, r))?;
        let n_sites = log.lattice().n_sites();
        let origin = log.lattice().origin();
        let beta0 = vec![false; n_sites];
        let mut infected = vec![false; n_sites];
        infected[origin] = true;
        let mut sweep = Sweep::new(&log, &beta0, &infected, 0.0, SweepOptions::new(params.p, Mode::Richardson))?;
        let mut reached = vec![(origin, 0.0)];
        while let Some(change) = sweep.next_change(horizon) {
            if change.kind == ChangeKind::Infect {
                reached.push((change.site, change.time));
            }
        }
        // The event at n fails iff agreement(x) > max(n, tau(x)) for some x,
        // i.e. iff n < agreement(x) for some x with agreement(x) > tau(x).
        Ok(reached
            .iter()
            .filter_map(|&(x, tau)| {
                let a = agreement_time(&log, x).unwrap_or(f64::INFINITY);
                (a > tau).then_some(a)
            })
            .fold(f64::NEG_INFINITY, f64::max))
    })?;
    Ok(starts
        .iter()
        .map(|&n| {
            let k = worst.iter().filter(|&&w| w <= n).count() as u64;
            (n, Estimate::proportion(k, replicates, master_seed, &digest))
        })
        .collect())
}
