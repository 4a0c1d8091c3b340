//! Crossing events of a single block.

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::geometry::BlockGeometry;
use crate::dynamics::{Mode, Region, Sweep, SweepOptions};
use crate::estimators::check_replicates;
use crate::estimators::cover::CoverTarget;
use crate::events::EventLog;
use crate::lattice::{points_in, LatticeBox, Params, Site};
use crate::replicate::{self, replicate_seed};
use crate::stats::{config_digest, Estimate};
use crate::{Error, Result};

/// Where the crossing landed: the earliest fully infected target cube,
/// lexicographically first among ties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockWitness {
    pub center: Site,
    pub time: f64,
}

/// Log window for a block: the centered box holding the region and the top
/// of the target window.
pub fn block_window(geom: &BlockGeometry) -> (LatticeBox, f64) {
    (LatticeBox::closed(geom.half_width()), geom.horizon())
}

fn check_start(geom: &BlockGeometry, x: &[i32], t: f64) -> Result<()> {
    let a = geom.a as i32;
    if x.len() != geom.d || x.iter().any(|c| c.abs() > a) || !(0.0..=geom.b).contains(&t) {
        return Err(Error::GeometryMisfit(format!(
            "start ({x:?}, {t}) outside [-{a}, {a}]^d x [0, {}]",
            geom.b
        )));
    }
    Ok(())
}

/// Runs one block on `log` (whose box must be centered on the block): the
/// cube `x + [-n, n]^d` is infected at time `t` with the all-zero
/// background, paths are confined to the region, and the first fully
/// infected target cube is reported.
pub fn block_event(
    log: &EventLog,
    geom: &BlockGeometry,
    region: &Region,
    start: (&[i32], f64),
) -> Result<Option<BlockWitness>> {
    let (x, t) = start;
    check_start(geom, x, t)?;
    let lat = log.lattice();
    if lat.dim() != geom.d || lat.half_width() < geom.half_width() || log.horizon() < geom.horizon() {
        return Err(Error::GeometryMisfit("log window does not hold the block region".into()));
    }
    let mut infected = vec![false; lat.n_sites()];
    for s in lat.cube(x, geom.n).expect("start cube lies in the first slab") {
        infected[s] = true;
    }
    let beta0 = vec![false; lat.n_sites()];
    let opts = SweepOptions { p: log.params().p, mode: Mode::Full, region: Some(region) };
    let mut sweep = Sweep::new(log, &beta0, &infected, t, opts)?;
    let target = CoverTarget::new(lat, &geom.target.lo, &geom.target.hi, geom.n);
    Ok(target
        .first_cover(&mut sweep, geom.target.t0, geom.target.t1)
        .map(|(time, pos)| BlockWitness { center: target.center(pos).clone(), time }))
}

/// Probability of the block crossing from `start`. Replicate logs depend
/// only on `(master_seed, r)` and the window, so geometries with equal
/// windows share them.
pub fn estimate_block_event(
    params: &Params,
    geom: &BlockGeometry,
    start: (&[i32], f64),
    replicates: u64,
    master_seed: u64,
) -> Result<Estimate> {
    params.validate()?;
    check_replicates(replicates)?;
    check_start(geom, start.0, start.1)?;
    if params.d != geom.d {
        return Err(Error::GeometryMisfit("geometry and parameters disagree on d".into()));
    }
    let digest = config_digest(&json!({
        "estimator": "block", "params": params, "geometry": geom, "start": [start.0, start.1],
        "replicates": replicates,
    }));
    let (lbox, horizon) = block_window(geom);
    let lattice = crate::lattice::Lattice::new(geom.d, lbox)?;
    let region = geom.region(&lattice);
    let hits = replicate::try_map(replicates, |r| -> Result<bool> {
        let log = EventLog::build(*params, lbox, horizon, replicate_seed(master_seed, r))?;
        Ok(block_event(&log, geom, &region, start)?.is_some())
    })?;
    let k = hits.iter().filter(|&&h| h).count() as u64;
    Ok(Estimate::proportion(k, replicates, master_seed, &digest))
}

/// Probability that the origin alone, with the all-zero background at time
/// 0, infects every site of `[0, 2n] x [-n, n]^(d-1)` at time 1, with paths
/// kept inside the first slab `[-5a, 5a]^d`.
pub fn estimate_brush(params: &Params, geom: &BlockGeometry, replicates: u64, master_seed: u64) -> Result<Estimate> {
    params.validate()?;
    check_replicates(replicates)?;
    let digest = config_digest(&json!({
        "estimator": "brush", "params": params, "n": geom.n, "a": geom.a, "replicates": replicates,
    }));
    let d = geom.d;
    let n = geom.n as i32;
    let lbox = LatticeBox::closed(5 * geom.a);
    let mut lo = vec![-n; d];
    lo[0] = 0;
    let mut hi = vec![n; d];
    hi[0] = 2 * n;
    let cells = points_in(&lo, &hi);
    let hits = replicate::try_map(replicates, |r| -> Result<bool> {
        let log = EventLog::build(*params, lbox, 1.0, replicate_seed(master_seed, r))?;
        let lat = log.lattice();
        let mut infected = vec![false; lat.n_sites()];
        infected[lat.origin()] = true;
        let beta0 = vec![false; lat.n_sites()];
        let mut sweep = Sweep::new(&log, &beta0, &infected, 0.0, SweepOptions::new(params.p, Mode::Full))?;
        sweep.advance_to(1.0);
        let state = sweep.infected();
        Ok(cells.iter().all(|c| state[lat.index(c).expect("cell inside slab")]))
    })?;
    let k = hits.iter().filter(|&&h| h).count() as u64;
    Ok(Estimate::proportion(k, replicates, master_seed, &digest))
}
