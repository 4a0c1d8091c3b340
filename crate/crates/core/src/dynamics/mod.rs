//! The infection process driven by an event log.
//!
//! A site `y` is infected at time `t` iff some initially infected `x` has a
//! `beta`-active path to `(y, t)`: a chain of arrows whose vertical segments
//! avoid every `Recovery1` ring and every `RecoveryExtra` ring that falls
//! while the background is 0. The forward sweep in [`sweep`] computes
//! exactly this set.

mod boundary;
pub mod sweep;

pub use boundary::{boundary_stats, max_separated, BoundaryStats};
pub use sweep::{Change, ChangeKind, Mode, Phase, Region, Sweep, SweepOptions};

use crate::background::{background_config, Configuration};
use crate::events::EventLog;
use crate::lattice::{Params, Site};
use crate::{Error, Result};

/// A change of one site's infection state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub time: f64,
    pub site: u32,
    pub infected: bool,
}

/// Piecewise-constant infection path, stored as the effective initial
/// configuration plus the jumps in time order.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub mode: Mode,
    pub p: f64,
    pub start: f64,
    pub horizon: f64,
    /// Initial configuration after dropping sites the mode forbids.
    pub initial: Configuration,
    pub jumps: Vec<Jump>,
    /// First time the infected set is empty, if that happens by `horizon`.
    pub extinction_time: Option<f64>,
}

impl Trajectory {
    pub fn jump_times(&self) -> impl Iterator<Item = f64> + '_ {
        self.jumps.iter().map(|j| j.time)
    }

    pub fn survived(&self) -> bool {
        self.extinction_time.is_none()
    }

    /// Infected set at time `t` (right-continuous).
    pub fn infected_at(&self, t: f64) -> Vec<bool> {
        let upto = self.jumps.partition_point(|j| j.time <= t);
        let mut state = self.initial.infected.clone();
        for j in &self.jumps[..upto] {
            state[j.site as usize] = j.infected;
        }
        state
    }

    pub fn final_infected(&self) -> Vec<bool> {
        self.infected_at(f64::INFINITY)
    }

    /// Full `(background, infection)` pair at time `t`.
    pub fn configuration_at(&self, log: &EventLog, t: f64) -> Configuration {
        Configuration {
            background: background_config(log, self.p, &self.initial.background, self.start, t),
            infected: self.infected_at(t),
        }
    }

    /// Calls `f(time, state)` for the initial state and after every jump.
    pub fn for_each_state(&self, mut f: impl FnMut(f64, &[bool])) {
        let mut state = self.initial.infected.clone();
        f(self.start, &state);
        for (k, j) in self.jumps.iter().enumerate() {
            state[j.site as usize] = j.infected;
            let last_at_time = self.jumps.get(k + 1).is_none_or(|next| next.time > j.time);
            if last_at_time {
                f(j.time, &state);
            }
        }
    }
}

/// Runs the process from `init` at time `from` to the log's horizon.
pub fn simulate(log: &EventLog, init: &Configuration, from: f64, mode: Mode) -> Result<Trajectory> {
    simulate_at_p(log, log.params().p, init, from, mode)
}

/// As [`simulate`], with the flip threshold `p` overriding the log's.
/// Arrows and recoveries are untouched, so runs at different `p` on one log
/// are coupled monotonically.
pub fn simulate_at_p(
    log: &EventLog,
    p: f64,
    init: &Configuration,
    from: f64,
    mode: Mode,
) -> Result<Trajectory> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParams(format!("p must lie in [0, 1], got {p}")));
    }
    let mut sweep = Sweep::new(log, &init.background, &init.infected, from, SweepOptions::new(p, mode))?;
    let initial = Configuration {
        background: init.background.clone(),
        infected: sweep.infected().to_vec(),
    };
    let mut jumps = Vec::new();
    let mut extinction_time = sweep.is_extinct().then_some(from);
    if extinction_time.is_none() {
        while let Some(change) = sweep.next_change(log.horizon()) {
            let infected = match change.kind {
                ChangeKind::Infect => true,
                ChangeKind::Recover => false,
                ChangeKind::BoundaryHit => continue,
            };
            jumps.push(Jump { time: change.time, site: change.site as u32, infected });
            if sweep.is_extinct() {
                extinction_time = Some(change.time);
                break;
            }
        }
    }
    Ok(Trajectory { mode, p, start: from, horizon: log.horizon(), initial, jumps, extinction_time })
}

/// Runs every initial configuration on the same log from time 0.
pub fn coupled_simulate(log: &EventLog, inits: &[Configuration], mode: Mode) -> Result<Vec<Trajectory>> {
    let n = log.lattice().n_sites();
    if let Some(bad) = inits.iter().find(|c| c.n_sites() != n || c.background.len() != n) {
        return Err(Error::BoxMismatch(format!(
            "initial configuration over {} sites, log box has {n}",
            bad.n_sites()
        )));
    }
    inits.iter().map(|init| simulate(log, init, 0.0, mode)).collect()
}

/// Whether there is a `beta0`-active path from `(from.0, from.1)` to
/// `(to.0, to.1)`, with the background started from `beta0` at time `from.1`.
pub fn active_path_exists(
    log: &EventLog,
    beta0: &[bool],
    from: (&[i32], f64),
    to: (&[i32], f64),
) -> Result<bool> {
    let lat = log.lattice();
    let (x, s) = from;
    let (y, t) = to;
    let xi = lat.index(x)?;
    let yi = lat.index(y)?;
    if !(s >= 0.0 && s < t && t <= log.horizon()) {
        return Err(Error::InvalidWindow(format!("need 0 <= s < t <= horizon, got s={s}, t={t}")));
    }
    let mut infected = vec![false; lat.n_sites()];
    infected[xi] = true;
    let mut sweep = Sweep::new(log, beta0, &infected, s, SweepOptions::new(log.params().p, Mode::Full))?;
    sweep.advance_to(t);
    Ok(sweep.infected()[yi])
}

/// `(delta1 / (delta0 + gamma + 2d))^m`: lower bound on the extinction
/// probability from any state with at most `m` infected sites.
pub fn extinction_lower_bound(params: &Params, m: i64) -> Result<f64> {
    let m = u32::try_from(m).map_err(|_| Error::InvalidArgument(format!("M must be nonnegative, got {m}")))?;
    Ok(params.extinction_lower_bound(m))
}

/// Indices of the given sites, failing on any site outside the box.
pub(crate) fn site_indices(log: &EventLog, sites: &[Site]) -> Result<Vec<usize>> {
    sites.iter().map(|s| log.lattice().index(s)).collect()
}
