//! Replicated Monte Carlo estimators.
//!
//! Replicate `r` of an estimator with master seed `m` builds its event log
//! from [`replicate_seed`]`(m, r)` (or from a side-specific variant of it),
//! so every estimate is a pure function of its inputs and the master seed.

mod agreement;
pub(crate) mod cover;
mod fstc;
mod orthant;

pub use agreement::estimate_agreement_cover;
pub use fstc::{estimate_fstc, fstc_event, FstcVariant, FstcWitness};
pub use orthant::{check_orthant_inequalities, OrthantReport, OrthantRow};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::background::{sample_initial, BackgroundLaw, InitLaw};
use crate::dynamics::{simulate, simulate_at_p, Mode};
use crate::events::EventLog;
use crate::lattice::{Lattice, LatticeBox, Params, Site};
use crate::replicate::{self, replicate_seed};
use crate::rng;
use crate::stats::{config_digest, Estimate};
use crate::{Error, Result};

pub(crate) fn check_replicates(replicates: u64) -> Result<()> {
    if replicates == 0 {
        return Err(Error::InvalidArgument("at least one replicate is required".into()));
    }
    Ok(())
}

pub(crate) fn check_horizon(horizon: f64) -> Result<()> {
    if horizon > 0.0 && horizon.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidWindow(format!("horizon must be positive and finite, got {horizon}")))
    }
}

/// Fraction of replicates in which the infection survives to `horizon`.
pub fn estimate_survival(
    params: &Params,
    init: &InitLaw,
    lbox: LatticeBox,
    horizon: f64,
    replicates: u64,
    master_seed: u64,
) -> Result<Estimate> {
    params.validate()?;
    check_replicates(replicates)?;
    check_horizon(horizon)?;
    let lattice = Lattice::new(params.d, lbox)?;
    init.validate(&lattice)?;
    let digest = config_digest(&json!({
        "estimator": "survival", "params": params, "init": init, "box": lbox,
        "horizon": horizon, "replicates": replicates,
    }));
    if init.infected.is_empty() {
        return Ok(Estimate::proportion(0, replicates, master_seed, &digest));
    }
    let outcomes = replicate::try_map(replicates, |r| -> Result<bool> {
        let seed = replicate_seed(master_seed, r);
        let log = EventLog::build(*params, lbox, horizon, seed)?;
        let config = sample_initial(init, log.lattice(), params.p, seed)?;
        Ok(simulate(&log, &config, 0.0, Mode::Full)?.survived())
    })?;
    let k = outcomes.iter().filter(|&&s| s).count() as u64;
    Ok(Estimate::proportion(k, replicates, master_seed, &digest))
}

/// Fraction of replicates in which `event` holds for the infected set at
/// time `t`, started from `init` at time 0.
pub fn estimate_at_time<F>(
    params: &Params,
    init: &InitLaw,
    lbox: LatticeBox,
    t: f64,
    replicates: u64,
    master_seed: u64,
    event: F,
) -> Result<Estimate>
where
    F: Fn(&Lattice, &[bool]) -> bool + Sync + Send,
{
    params.validate()?;
    check_replicates(replicates)?;
    check_horizon(t)?;
    let lattice = Lattice::new(params.d, lbox)?;
    init.validate(&lattice)?;
    let digest = config_digest(&json!({
        "estimator": "at-time", "params": params, "init": init, "box": lbox, "t": t,
        "replicates": replicates,
    }));
    let outcomes = replicate::try_map(replicates, |r| -> Result<bool> {
        let seed = replicate_seed(master_seed, r);
        let log = EventLog::build(*params, lbox, t, seed)?;
        let config = sample_initial(init, log.lattice(), params.p, seed)?;
        Ok(event(log.lattice(), &simulate(&log, &config, 0.0, Mode::Full)?.infected_at(t)))
    })?;
    let k = outcomes.iter().filter(|&&s| s).count() as u64;
    Ok(Estimate::proportion(k, replicates, master_seed, &digest))
}

/// Single-site environment statistics at time `t`: the fraction of
/// replicates with background 1 when started from `initial`, and the
/// fraction in which the all-zero and all-one backgrounds have merged.
pub fn estimate_environment(
    params: &Params,
    t: f64,
    initial: bool,
    replicates: u64,
    master_seed: u64,
) -> Result<(Estimate, Estimate)> {
    params.validate()?;
    check_replicates(replicates)?;
    check_horizon(t)?;
    let digest = config_digest(&json!({
        "estimator": "environment", "params": params, "t": t, "initial": initial,
        "replicates": replicates,
    }));
    let lbox = LatticeBox::closed(0);
    let outcomes = replicate::try_map(replicates, |r| -> Result<(bool, bool)> {
        let log = EventLog::build(*params, lbox, t, replicate_seed(master_seed, r))?;
        let one = crate::background::background_at(&log, params.p, 0, initial, 0.0, t);
        Ok((one, crate::background::phi_field(&log, t)?[0]))
    })?;
    let ones = outcomes.iter().filter(|o| o.0).count() as u64;
    let merged = outcomes.iter().filter(|o| o.1).count() as u64;
    Ok((
        Estimate::proportion(ones, replicates, master_seed, &digest),
        Estimate::proportion(merged, replicates, master_seed, &digest),
    ))
}

/// Both sides of the duality identity and their difference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityEstimate {
    /// `P[C_t from A meets B]`.
    pub forward: Estimate,
    /// `P[C_t from B meets A]`.
    pub backward: Estimate,
    /// `forward - backward`.
    pub residual: Estimate,
}

fn side_key(start: &[Site], target: &[Site]) -> u64 {
    let mut tags: Vec<u64> = Vec::new();
    for set in [start, target] {
        tags.push(set.len() as u64);
        tags.extend(set.iter().flatten().map(|&c| c as i64 as u64));
    }
    rng::derive(0, &tags)
}

fn meets_probability(
    params: &Params,
    start: &[Site],
    target: &[Site],
    t: f64,
    lbox: LatticeBox,
    replicates: u64,
    master_seed: u64,
    digest: &str,
) -> Result<Estimate> {
    let key = side_key(start, target);
    let law = InitLaw::new(BackgroundLaw::Stationary, start.to_vec());
    let outcomes = replicate::try_map(replicates, |r| -> Result<bool> {
        let seed = rng::derive(master_seed, &[key, r]);
        let log = EventLog::build(*params, lbox, t, seed)?;
        let targets = crate::dynamics::site_indices(&log, target)?;
        let config = sample_initial(&law, log.lattice(), params.p, seed)?;
        let final_state = simulate(&log, &config, 0.0, Mode::Full)?.infected_at(t);
        Ok(targets.iter().any(|&i| final_state[i]))
    })?;
    let k = outcomes.iter().filter(|&&s| s).count() as u64;
    Ok(Estimate::proportion(k, replicates, master_seed, digest))
}

/// Estimates `P[C_t^A meets B] - P[C_t^B meets A]` with the background
/// started from its stationary law. Each side uses its own replicate
/// streams, keyed by the ordered pair of sets, so `A = B` gives exactly 0.
#[allow(clippy::too_many_arguments)]
pub fn estimate_duality_residual(
    params: &Params,
    a: &[Site],
    b: &[Site],
    t: f64,
    lbox: LatticeBox,
    background: &BackgroundLaw,
    replicates: u64,
    master_seed: u64,
) -> Result<DualityEstimate> {
    params.validate()?;
    check_replicates(replicates)?;
    check_horizon(t)?;
    match background {
        BackgroundLaw::Stationary => {}
        BackgroundLaw::Product(q) if *q == params.p => {}
        other => {
            return Err(Error::InvalidArgument(format!(
                "duality needs the stationary background law, got {other:?}"
            )))
        }
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("duality sets must be nonempty".into()));
    }
    let lattice = Lattice::new(params.d, lbox)?;
    for s in a.iter().chain(b) {
        lattice.index(s)?;
    }
    let digest = config_digest(&json!({
        "estimator": "duality", "params": params, "A": a, "B": b, "t": t, "box": lbox,
        "replicates": replicates,
    }));
    let forward = meets_probability(params, a, b, t, lbox, replicates, master_seed, &digest)?;
    let backward = meets_probability(params, b, a, t, lbox, replicates, master_seed, &digest)?;
    let residual = Estimate::difference(&forward, &backward, master_seed, &digest);
    Ok(DualityEstimate { forward, backward, residual })
}

/// `P[origin infected at t]` from the all-one background and full infection,
/// on a grid of times sharing one log per replicate.
pub fn upper_density_curve(
    params: &Params,
    t_grid: &[f64],
    lbox: LatticeBox,
    replicates: u64,
    master_seed: u64,
) -> Result<Vec<(f64, Estimate)>> {
    params.validate()?;
    check_replicates(replicates)?;
    if t_grid.is_empty() || t_grid.iter().any(|&t| !(t >= 0.0 && t.is_finite())) {
        return Err(Error::InvalidWindow(format!("bad time grid {t_grid:?}")));
    }
    let lattice = Lattice::new(params.d, lbox)?;
    let digest = config_digest(&json!({
        "estimator": "upper-density", "params": params, "t_grid": t_grid, "box": lbox,
        "replicates": replicates,
    }));
    let horizon = t_grid.iter().copied().fold(0.0, f64::max);
    let origin = lattice.origin();
    let hits: Vec<Vec<bool>> = if horizon == 0.0 {
        vec![vec![true; t_grid.len()]; replicates as usize]
    } else {
        replicate::try_map(replicates, |r| -> Result<Vec<bool>> {
            let log = EventLog::build(*params, lbox, horizon, replicate_seed(master_seed, r))?;
            let full = crate::background::Configuration::full(lattice.n_sites());
            let traj = simulate(&log, &full, 0.0, Mode::Full)?;
            Ok(t_grid.iter().map(|&t| traj.infected_at(t)[origin]).collect())
        })?
    };
    Ok(t_grid
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let k = hits.iter().filter(|h| h[j]).count() as u64;
            (t, Estimate::proportion(k, replicates, master_seed, &digest))
        })
        .collect())
}

/// Single-time version of [`upper_density_curve`].
pub fn estimate_upper_density(
    params: &Params,
    t: f64,
    lbox: LatticeBox,
    replicates: u64,
    master_seed: u64,
) -> Result<Estimate> {
    Ok(upper_density_curve(params, &[t], lbox, replicates, master_seed)?.remove(0).1)
}

/// Survival-to-horizon across a grid of `p` on shared logs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub grid: Vec<f64>,
    pub estimates: Vec<Estimate>,
    pub threshold: f64,
    /// Linear interpolation of the first upward crossing of `threshold`.
    pub pseudo_critical: Option<f64>,
    /// Set when `delta0 == delta1`: the infection does not depend on `p`.
    pub p_invariant: bool,
}

/// Index of the first grid value at which the run survives (`grid.len()` if
/// none). Survival is nondecreasing in `p` on a fixed log, so bisection
/// finds the same index as evaluating every grid point.
pub(crate) fn first_surviving(log: &EventLog, init: &InitLaw, grid: &[f64], seed: u64) -> Result<usize> {
    let survives = |p: f64| -> Result<bool> {
        let config = sample_initial(init, log.lattice(), p, seed)?;
        Ok(simulate_at_p(log, p, &config, 0.0, Mode::Full)?.survived())
    };
    let (mut lo, mut hi) = (0, grid.len());
    while lo < hi {
        let mid = (lo + hi) / 2;
        if survives(grid[mid])? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

fn crossing(grid: &[f64], values: &[f64], threshold: f64) -> Option<f64> {
    let i = values.iter().position(|&v| v >= threshold)?;
    if i == 0 {
        return None;
    }
    let (p0, p1, v0, v1) = (grid[i - 1], grid[i], values[i - 1], values[i]);
    Some(p0 + (threshold - v0) * (p1 - p0) / (v1 - v0))
}

/// Estimates survival to `horizon` at every `p` in `grid` from one event
/// log per replicate. The initial background law is read at each `p`
/// (use [`BackgroundLaw::Stationary`] to start from `Product(p)`).
#[allow(clippy::too_many_arguments)]
pub fn scan_critical(
    params: &Params,
    grid: &[f64],
    init: &InitLaw,
    lbox: LatticeBox,
    horizon: f64,
    replicates: u64,
    threshold: f64,
    master_seed: u64,
) -> Result<ScanResult> {
    params.validate()?;
    check_replicates(replicates)?;
    check_horizon(horizon)?;
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty p grid".into()));
    }
    if grid.iter().any(|p| !(0.0..=1.0).contains(p)) || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(format!("p grid must increase strictly within [0, 1]: {grid:?}")));
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidArgument(format!("threshold must lie in (0, 1), got {threshold}")));
    }
    let lattice = Lattice::new(params.d, lbox)?;
    init.validate(&lattice)?;
    let digest = config_digest(&json!({
        "estimator": "critical-scan", "params": params, "grid": grid, "init": init, "box": lbox,
        "horizon": horizon, "replicates": replicates, "threshold": threshold,
    }));
    let firsts = replicate::try_map(replicates, |r| -> Result<usize> {
        let seed = replicate_seed(master_seed, r);
        let log = EventLog::build(*params, lbox, horizon, seed)?;
        first_surviving(&log, init, grid, seed)
    })?;
    let estimates: Vec<Estimate> = (0..grid.len())
        .map(|i| {
            let k = firsts.iter().filter(|&&f| f <= i).count() as u64;
            Estimate::proportion(k, replicates, master_seed, &digest)
        })
        .collect();
    let p_invariant = params.delta0 == params.delta1;
    let values: Vec<f64> = estimates.iter().map(|e| e.value).collect();
    let pseudo_critical = if p_invariant { None } else { crossing(grid, &values, threshold) };
    Ok(ScanResult { grid: grid.to_vec(), estimates, threshold, pseudo_critical, p_invariant })
}

/// `P[|_L C_t| >= N]` for the `L`-truncated process from `A` with the
/// all-zero background, on the box of half-width `L`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_truncated_reach(
    params: &Params,
    a: &[Site],
    l: u32,
    t: f64,
    n_min: usize,
    replicates: u64,
    master_seed: u64,
) -> Result<Estimate> {
    params.validate()?;
    check_replicates(replicates)?;
    check_horizon(t)?;
    let lbox = LatticeBox::closed(l);
    let lattice = Lattice::new(params.d, lbox)?;
    for s in a {
        lattice.index(s)?;
    }
    let digest = config_digest(&json!({
        "estimator": "truncated-reach", "params": params, "A": a, "L": l, "t": t, "N": n_min,
        "replicates": replicates,
    }));
    let law = InitLaw::new(BackgroundLaw::AllZero, a.to_vec());
    let outcomes = replicate::try_map(replicates, |r| -> Result<bool> {
        let seed = replicate_seed(master_seed, r);
        let log = EventLog::build(*params, lbox, t, seed)?;
        let config = sample_initial(&law, log.lattice(), params.p, seed)?;
        let traj = simulate(&log, &config, 0.0, Mode::Truncated(l))?;
        Ok(traj.final_infected().iter().filter(|&&c| c).count() >= n_min)
    })?;
    let k = outcomes.iter().filter(|&&s| s).count() as u64;
    Ok(Estimate::proportion(k, replicates, master_seed, &digest))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_interpolates() {
        let grid = [0.0, 0.5, 1.0];
        assert_eq!(crossing(&grid, &[0.0, 0.2, 0.8], 0.5), Some(0.75));
        assert_eq!(crossing(&grid, &[0.0, 0.2, 0.4], 0.5), None);
        assert_eq!(crossing(&grid, &[0.6, 0.7, 0.8], 0.5), None);
    }

    #[test]
    fn side_keys_are_ordered_pairs() {
        let a = vec![vec![0]];
        let b = vec![vec![1]];
        assert_ne!(side_key(&a, &b), side_key(&b, &a));
        assert_eq!(side_key(&a, &a), side_key(&a, &a));
        assert_ne!(side_key(&[vec![0], vec![1]], &[]), side_key(&[vec![0]], &[vec![1]]));
    }

    #[test]
    fn empty_infection_never_survives() {
        let params = Params::new(1, 1.0, 1.0, 1.0, 0.5).unwrap();
        let init = InitLaw::new(BackgroundLaw::AllOne, vec![]);
        let e = estimate_survival(&params, &init, LatticeBox::closed(3), 2.0, 50, 1).unwrap();
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn duality_rejects_non_stationary_law() {
        let params = Params::new(1, 1.0, 2.0, 0.5, 0.5).unwrap();
        let a = vec![vec![0]];
        let bad = estimate_duality_residual(&params, &a, &a, 0.5, LatticeBox::closed(1), &BackgroundLaw::AllZero, 10, 1);
        assert!(bad.is_err());
        let mismatched = estimate_duality_residual(
            &params, &a, &a, 0.5, LatticeBox::closed(1), &BackgroundLaw::Product(0.3), 10, 1,
        );
        assert!(mismatched.is_err());
        let empty = estimate_duality_residual(&params, &a, &[], 0.5, LatticeBox::closed(1), &BackgroundLaw::Stationary, 10, 1);
        assert!(empty.is_err());
    }

    #[test]
    fn upper_density_at_time_zero_is_one() {
        let params = Params::new(1, 1.0, 2.0, 0.5, 0.5).unwrap();
        let e = estimate_upper_density(&params, 0.0, LatticeBox::closed(2), 20, 3).unwrap();
        assert_eq!(e.value, 1.0);
    }

    #[test]
    fn bisection_matches_full_grid() {
        let params = Params::new(1, 2.0, 3.0, 0.3, 0.5).unwrap();
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let init = InitLaw::new(BackgroundLaw::Stationary, vec![vec![0]]);
        for r in 0..40 {
            let seed = replicate_seed(5, r);
            let log = EventLog::build(params, LatticeBox::closed(8), 8.0, seed).unwrap();
            let first = first_surviving(&log, &init, &grid, seed).unwrap();
            let direct: Vec<bool> = grid
                .iter()
                .map(|&p| {
                    let config = sample_initial(&init, log.lattice(), p, seed).unwrap();
                    simulate_at_p(&log, p, &config, 0.0, Mode::Full).unwrap().survived()
                })
                .collect();
            let expected = direct.iter().position(|&s| s).unwrap_or(grid.len());
            assert_eq!(first, expected);
            assert!(direct[expected..].iter().all(|&s| s));
        }
    }
}
