//! Block events of the finite space-time condition.

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::cover::CoverTarget;
use super::{check_horizon, check_replicates};
use crate::dynamics::{Mode, Sweep, SweepOptions};
use crate::events::EventLog;
use crate::lattice::{LatticeBox, Params, Site};
use crate::replicate::{self, replicate_seed};
use crate::stats::{config_digest, Estimate};
use crate::{Error, Result};

/// The three target events. In each, the process starts from `[-n, n]^d`
/// with the all-zero background and is truncated at level `trunc`; the
/// event asks for a fully infected translate `x + [-n, n]^d` with `x` in the
/// target set at some time in the window.
///
/// | variant | trunc        | window        | centers                              |
/// |---------|--------------|---------------|--------------------------------------|
/// | fstc1   | `L + n`      | `{T + 1}`     | `[0, L)^d`                           |
/// | fstc2   | `L + 2n + 1` | `[1, T + 1)`  | `{L + n} x [0, L)^(d-1)`             |
/// | fstc3   | `2L + 3n`    | `[T, 2T)`     | `[L + n, 2L + n] x [0, 2L)^(d-1)`    |
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FstcVariant {
    Fstc1,
    Fstc2,
    Fstc3,
}

struct Layout {
    trunc: u32,
    from: f64,
    until: f64,
    lo: Site,
    hi: Site,
}

impl FstcVariant {
    fn layout(self, d: usize, n: u32, l: u32, t: f64) -> Layout {
        let (n, l) = (n as i32, l as i32);
        let rest = |hi: i32| -> (Vec<i32>, Vec<i32>) { (vec![0; d - 1], vec![hi; d - 1]) };
        match self {
            FstcVariant::Fstc1 => Layout {
                trunc: (l + n) as u32,
                from: t + 1.0,
                until: t + 1.0,
                lo: vec![0; d],
                hi: vec![l - 1; d],
            },
            FstcVariant::Fstc2 => {
                let (lo_rest, hi_rest) = rest(l - 1);
                Layout {
                    trunc: (l + 2 * n + 1) as u32,
                    from: 1.0,
                    until: t + 1.0,
                    lo: [vec![l + n], lo_rest].concat(),
                    hi: [vec![l + n], hi_rest].concat(),
                }
            }
            FstcVariant::Fstc3 => {
                let (lo_rest, hi_rest) = rest(2 * l - 1);
                Layout {
                    trunc: (2 * l + 3 * n) as u32,
                    from: t,
                    until: 2.0 * t,
                    lo: [vec![l + n], lo_rest].concat(),
                    hi: [vec![2 * l + n], hi_rest].concat(),
                }
            }
        }
    }

    /// Box half-width and horizon a log needs for this variant.
    pub fn window(self, d: usize, n: u32, l: u32, t: f64) -> (u32, f64) {
        let layout = self.layout(d, n, l, t);
        (layout.trunc, layout.until)
    }
}

/// The earliest witnessing translate, lexicographically first among ties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FstcWitness {
    pub time: f64,
    pub center: Site,
}

fn check_geometry(n: u32, l: u32, t: f64) -> Result<()> {
    if n >= l {
        return Err(Error::GeometryMisfit(format!("need n < L, got n = {n}, L = {l}")));
    }
    check_horizon(t)
}

/// Evaluates the event on a given log.
pub fn fstc_event(log: &EventLog, n: u32, l: u32, t: f64, variant: FstcVariant) -> Result<Option<FstcWitness>> {
    check_geometry(n, l, t)?;
    let lat = log.lattice();
    let layout = variant.layout(lat.dim(), n, l, t);
    if lat.half_width() < layout.trunc || log.horizon() < layout.until {
        return Err(Error::GeometryMisfit(format!(
            "{variant:?} needs box half-width {} and horizon {}, log has {} and {}",
            layout.trunc,
            layout.until,
            lat.half_width(),
            log.horizon()
        )));
    }
    let target = CoverTarget::new(lat, &layout.lo, &layout.hi, n);
    let start = lat.cube(&vec![0; lat.dim()], n).expect("n < L fits the box");
    let mut infected = vec![false; lat.n_sites()];
    for s in start {
        infected[s] = true;
    }
    let beta0 = vec![false; lat.n_sites()];
    let mut sweep =
        Sweep::new(log, &beta0, &infected, 0.0, SweepOptions::new(log.params().p, Mode::Truncated(layout.trunc)))?;
    Ok(target
        .first_cover(&mut sweep, layout.from, layout.until)
        .map(|(time, pos)| FstcWitness { time, center: target.center(pos).clone() }))
}

/// Fraction of replicates in which the variant's event occurs. Replicate
/// `r` uses the same seed for every `(n, L, T)`, so runs at different sizes
/// share their randomness on common sites.
pub fn estimate_fstc(
    params: &Params,
    n: u32,
    l: u32,
    t: f64,
    variant: FstcVariant,
    replicates: u64,
    master_seed: u64,
) -> Result<Estimate> {
    params.validate()?;
    check_replicates(replicates)?;
    check_geometry(n, l, t)?;
    let (half_width, horizon) = variant.window(params.d, n, l, t);
    let digest = config_digest(&json!({
        "estimator": "fstc", "params": params, "n": n, "L": l, "T": t, "variant": variant,
        "replicates": replicates,
    }));
    let hits = replicate::try_map(replicates, |r| -> Result<bool> {
        let log = EventLog::build(*params, LatticeBox::closed(half_width), horizon, replicate_seed(master_seed, r))?;
        Ok(fstc_event(&log, n, l, t, variant)?.is_some())
    })?;
    let k = hits.iter().filter(|&&h| h).count() as u64;
    Ok(Estimate::proportion(k, replicates, master_seed, &digest))
}
