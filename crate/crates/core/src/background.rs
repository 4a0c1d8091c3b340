//! The background environment: per-site two-state chains with flip-to-1
//! rate `gamma p` and flip-to-0 rate `gamma (1-p)`, realized from the
//! `BgFlip` clocks of an event log.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::events::{EventKind, EventLog};
use crate::lattice::{Lattice, Site};
use crate::rng;
use crate::{Error, Result};

/// A background/infection pair `(beta, eta)` over the sites of a box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    pub background: Vec<bool>,
    pub infected: Vec<bool>,
}

impl Configuration {
    pub fn empty(n_sites: usize) -> Self {
        Configuration { background: vec![false; n_sites], infected: vec![false; n_sites] }
    }

    pub fn full(n_sites: usize) -> Self {
        Configuration { background: vec![true; n_sites], infected: vec![true; n_sites] }
    }

    pub fn n_sites(&self) -> usize {
        self.infected.len()
    }

    pub fn infected_count(&self) -> usize {
        self.infected.iter().filter(|&&b| b).count()
    }

    /// Coordinatewise order on both components.
    pub fn le(&self, other: &Configuration) -> bool {
        bits_le(&self.background, &other.background) && bits_le(&self.infected, &other.infected)
    }
}

pub(crate) fn bits_le(a: &[bool], b: &[bool]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(&x, &y)| !x || y)
}

/// Law of the initial background.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackgroundLaw {
    AllZero,
    AllOne,
    /// i.i.d. Bernoulli(q).
    Product(f64),
    /// i.i.d. Bernoulli(p) at the `p` in force, i.e. the stationary law.
    Stationary,
    Explicit(Vec<bool>),
}

/// Initial law: a background law and a deterministic infected set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitLaw {
    pub background: BackgroundLaw,
    pub infected: Vec<Site>,
}

impl InitLaw {
    pub fn new(background: BackgroundLaw, infected: Vec<Site>) -> Self {
        InitLaw { background, infected }
    }

    pub fn validate(&self, lattice: &Lattice) -> Result<()> {
        for site in &self.infected {
            lattice.index(site)?;
        }
        match &self.background {
            BackgroundLaw::Product(q) if !(0.0..=1.0).contains(q) => {
                Err(Error::InvalidArgument(format!("product density {q} outside [0, 1]")))
            }
            BackgroundLaw::Explicit(bits) if bits.len() != lattice.n_sites() => Err(Error::BoxMismatch(
                format!("explicit background has {} sites, box has {}", bits.len(), lattice.n_sites()),
            )),
            _ => Ok(()),
        }
    }
}

/// Draws an initial configuration. Product laws threshold one uniform per
/// site, so for a fixed `seed` the sampled background is monotone in the
/// density (and, for [`BackgroundLaw::Stationary`], in `p`).
pub fn sample_initial(law: &InitLaw, lattice: &Lattice, p: f64, seed: u64) -> Result<Configuration> {
    law.validate(lattice)?;
    let n = lattice.n_sites();
    let background = match &law.background {
        BackgroundLaw::AllZero => vec![false; n],
        BackgroundLaw::AllOne => vec![true; n],
        BackgroundLaw::Explicit(bits) => bits.clone(),
        BackgroundLaw::Product(q) => product_bits(n, *q, seed),
        BackgroundLaw::Stationary => product_bits(n, p, seed),
    };
    let mut infected = vec![false; n];
    for site in &law.infected {
        infected[lattice.index(site)?] = true;
    }
    Ok(Configuration { background, infected })
}

fn product_bits(n: usize, q: f64, seed: u64) -> Vec<bool> {
    let mut stream = rng::substream(seed, &[rng::purpose::INITIAL]);
    (0..n).map(|_| stream.random::<f64>() < q).collect()
}

/// Piecewise-constant 0/1 path on `[start, horizon]`, stored as jump times.
#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundPath {
    pub start: f64,
    pub initial: bool,
    /// `(time, new_state)` at each actual change.
    pub jumps: Vec<(f64, bool)>,
}

impl BackgroundPath {
    pub fn at(&self, t: f64) -> bool {
        let k = self.jumps.partition_point(|&(s, _)| s <= t);
        if k == 0 {
            self.initial
        } else {
            self.jumps[k - 1].1
        }
    }
}

/// Background path at `site` started from `initial` at time `from`, using
/// only the flips in `(from, horizon]`.
pub fn background_path(log: &EventLog, site: &[i32], initial: bool, from: f64) -> Result<BackgroundPath> {
    let idx = log.lattice().index(site)?;
    check_time(log, from)?;
    let p = log.params().p;
    let mut state = initial;
    let mut jumps = Vec::new();
    for ev in &log.site_events(idx)[log.first_after(idx, from)..] {
        if let EventKind::BgFlip { mark } = ev.kind {
            let target = EventKind::flip_target(mark, p);
            if target != state {
                state = target;
                jumps.push((ev.time, state));
            }
        }
    }
    Ok(BackgroundPath { start: from, initial, jumps })
}

/// Background at site index `idx` and time `t`, started from `initial` at
/// time `from`, with flip threshold `p`.
#[inline]
pub fn background_at(log: &EventLog, p: f64, idx: usize, initial: bool, from: f64, t: f64) -> bool {
    let list = log.site_events(idx);
    let end = log.first_after(idx, t);
    for ev in list[..end].iter().rev() {
        if ev.time <= from {
            break;
        }
        if let EventKind::BgFlip { mark } = ev.kind {
            return EventKind::flip_target(mark, p);
        }
    }
    initial
}

/// Full background configuration at time `t` for a run started at `from`.
pub fn background_config(log: &EventLog, p: f64, initial: &[bool], from: f64, t: f64) -> Vec<bool> {
    (0..log.lattice().n_sites())
        .map(|idx| background_at(log, p, idx, initial[idx], from, t))
        .collect()
}

/// Exact transition probability of the two-state background chain.
pub fn background_transition_prob(gamma: f64, p: f64, t: f64, from: bool, to: bool) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidWindow(format!("time must be nonnegative, got {t}")));
    }
    if !(0.0..=1.0).contains(&p) || !(gamma > 0.0) {
        return Err(Error::InvalidParams(format!("gamma={gamma}, p={p}")));
    }
    let decay = (-gamma * t).exp();
    let to_one = if from { p + (1.0 - p) * decay } else { p * (1.0 - decay) };
    Ok(if to { to_one } else { 1.0 - to_one })
}

/// Time at which the backgrounds started from all zeros and all ones at
/// time 0 first agree at `idx`: the first flip of either kind.
pub fn agreement_time(log: &EventLog, idx: usize) -> Option<f64> {
    log.site_events(idx)
        .iter()
        .find(|e| matches!(e.kind, EventKind::BgFlip { .. }))
        .map(|e| e.time)
}

/// The agreement field at time `t`: 1 where the all-zero and all-one
/// backgrounds coincide. Once a site agrees it agrees forever.
pub fn phi_field(log: &EventLog, t: f64) -> Result<Vec<bool>> {
    check_time(log, t)?;
    Ok((0..log.lattice().n_sites())
        .map(|idx| agreement_time(log, idx).is_some_and(|a| a <= t))
        .collect())
}

fn check_time(log: &EventLog, t: f64) -> Result<()> {
    if t >= 0.0 && t <= log.horizon() {
        Ok(())
    } else {
        Err(Error::InvalidWindow(format!("time {t} outside [0, {}]", log.horizon())))
    }
}
