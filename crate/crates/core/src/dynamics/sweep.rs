//! Forward event sweep over an [`EventLog`].
//!
//! Only infected sites can change the infection state, so the sweep keeps a
//! priority queue holding the next clock ring of each infected site and
//! ignores everything else. Background values are looked up lazily when a
//! site becomes infected and then tracked through its own flip events.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use crate::background::background_at;
use crate::events::{EventKind, EventLog};
use crate::{Error, Result};

/// Which clocks and arrows the sweep uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// All paths inside the box.
    Full,
    /// Only paths staying in `(-L, L)^d`.
    Truncated(u32),
    /// Recoveries ignored.
    Richardson,
}

/// A space-time confinement: a sequence of phases, each a site mask valid on
/// `[previous.until, until)`. Infected sites outside the mask of a new phase
/// are removed when the phase starts.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub phases: Vec<Phase>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Phase {
    pub until: f64,
    pub mask: Vec<bool>,
}

impl Region {
    /// A time-independent spatial mask.
    pub fn fixed(mask: Vec<bool>) -> Self {
        Region { phases: vec![Phase { until: f64::INFINITY, mask }] }
    }

    fn phase_at(&self, t: f64) -> usize {
        self.phases
            .iter()
            .position(|ph| t < ph.until)
            .unwrap_or(self.phases.len() - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChangeKind {
    Infect,
    Recover,
    /// An arrow from the interior landed on the side `|x|_inf = L` of a
    /// truncated run. The state does not change.
    BoundaryHit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Change {
    pub time: f64,
    pub site: usize,
    pub kind: ChangeKind,
}

#[derive(Debug, Clone, Copy)]
pub struct SweepOptions<'r> {
    pub p: f64,
    pub mode: Mode,
    pub region: Option<&'r Region>,
}

impl SweepOptions<'_> {
    pub fn new(p: f64, mode: Mode) -> Self {
        SweepOptions { p, mode, region: None }
    }
}

type Entry = Reverse<(u64, u32, u32)>;

pub struct Sweep<'a> {
    log: &'a EventLog,
    p: f64,
    richardson: bool,
    interior: Option<(u32, Vec<u32>)>,
    region: Option<&'a Region>,
    phase: usize,
    start: f64,
    beta0: &'a [bool],
    infected: Vec<bool>,
    bg: Vec<bool>,
    cursor: Vec<u32>,
    generation: Vec<u32>,
    heap: BinaryHeap<Entry>,
    count: usize,
    now: f64,
    pending: VecDeque<Change>,
}

impl<'a> Sweep<'a> {
    /// Starts a sweep at time `start` with background `beta0` (the state at
    /// `start`) and the given infected set. Infected sites that are not
    /// allowed by the mode or region are dropped.
    pub fn new(
        log: &'a EventLog,
        beta0: &'a [bool],
        infected: &[bool],
        start: f64,
        opts: SweepOptions<'a>,
    ) -> Result<Self> {
        let n = log.lattice().n_sites();
        if beta0.len() != n || infected.len() != n {
            return Err(Error::BoxMismatch(format!(
                "configuration has {}/{} sites, log box has {n}",
                beta0.len(),
                infected.len()
            )));
        }
        if !(start >= 0.0 && start < log.horizon()) {
            return Err(Error::InvalidWindow(format!(
                "start time {start} must lie in [0, {})",
                log.horizon()
            )));
        }
        if let Some(region) = opts.region {
            if region.phases.is_empty() || region.phases.iter().any(|ph| ph.mask.len() != n) {
                return Err(Error::BoxMismatch("region masks do not match the box".into()));
            }
        }
        let interior = match opts.mode {
            Mode::Truncated(l) => {
                let lat = log.lattice();
                Some((l, (0..n).map(|i| lat.sup_norm(i)).collect()))
            }
            _ => None,
        };
        let phase = opts.region.map_or(0, |r| r.phase_at(start));
        let mut sweep = Sweep {
            log,
            p: opts.p,
            richardson: opts.mode == Mode::Richardson,
            interior,
            region: opts.region,
            phase,
            start,
            beta0,
            infected: vec![false; n],
            bg: vec![false; n],
            cursor: vec![0; n],
            generation: vec![0; n],
            heap: BinaryHeap::new(),
            count: 0,
            now: start,
            pending: VecDeque::new(),
        };
        for idx in (0..n).filter(|&i| infected[i]) {
            if sweep.allowed(idx) {
                sweep.infect(idx, start);
            }
        }
        Ok(sweep)
    }

    #[inline]
    fn allowed(&self, idx: usize) -> bool {
        if let Some((l, sup)) = &self.interior {
            if sup[idx] >= *l {
                return false;
            }
        }
        match self.region {
            Some(r) => r.phases[self.phase].mask[idx],
            None => true,
        }
    }

    #[inline]
    fn push_from(&mut self, idx: usize) {
        let list = self.log.site_events(idx);
        let c = self.cursor[idx] as usize;
        if c < list.len() {
            self.heap
                .push(Reverse((list[c].time.to_bits(), idx as u32, self.generation[idx])));
        }
    }

    fn infect(&mut self, idx: usize, t: f64) {
        self.infected[idx] = true;
        self.count += 1;
        self.bg[idx] = background_at(self.log, self.p, idx, self.beta0[idx], self.start, t);
        self.cursor[idx] = self.log.first_after(idx, t) as u32;
        self.push_from(idx);
    }

    fn heal(&mut self, idx: usize) {
        self.infected[idx] = false;
        self.count -= 1;
        self.generation[idx] = self.generation[idx].wrapping_add(1);
    }

    fn enter_next_phase(&mut self, at: f64) {
        self.phase += 1;
        let region = self.region.expect("phases only exist with a region");
        let mask = &region.phases[self.phase].mask;
        for idx in 0..self.infected.len() {
            if self.infected[idx] && !mask[idx] {
                self.heal(idx);
                self.pending.push_back(Change { time: at, site: idx, kind: ChangeKind::Recover });
            }
        }
    }

    /// Processes clock rings with time `<= until` and returns the first one
    /// that is observable, or `None` once the sweep has reached `until`.
    pub fn next_change(&mut self, until: f64) -> Option<Change> {
        loop {
            if let Some(change) = self.pending.pop_front() {
                return Some(change);
            }
            let next_time = self
                .heap
                .peek()
                .map_or(f64::INFINITY, |Reverse((bits, _, _))| f64::from_bits(*bits));
            if let Some(region) = self.region {
                if self.phase + 1 < region.phases.len() {
                    let boundary = region.phases[self.phase].until;
                    if boundary <= next_time.min(until) {
                        self.now = boundary;
                        self.enter_next_phase(boundary);
                        continue;
                    }
                }
            }
            if next_time > until {
                self.now = self.now.max(until);
                return None;
            }
            let Reverse((_, site, generation)) = self.heap.pop().expect("peeked");
            let x = site as usize;
            if generation != self.generation[x] {
                continue;
            }
            self.now = next_time;
            if let Some(change) = self.fire(x, next_time) {
                return Some(change);
            }
        }
    }

    fn fire(&mut self, x: usize, t: f64) -> Option<Change> {
        let ev = self.log.site_events(x)[self.cursor[x] as usize];
        let advance = |s: &mut Self| {
            s.cursor[x] += 1;
            s.push_from(x);
        };
        match ev.kind {
            EventKind::BgFlip { mark } => {
                self.bg[x] = EventKind::flip_target(mark, self.p);
                advance(self);
                None
            }
            EventKind::Recovery1 if !self.richardson => {
                self.heal(x);
                Some(Change { time: t, site: x, kind: ChangeKind::Recover })
            }
            EventKind::RecoveryExtra if !self.richardson && !self.bg[x] => {
                self.heal(x);
                Some(Change { time: t, site: x, kind: ChangeKind::Recover })
            }
            EventKind::Recovery1 | EventKind::RecoveryExtra => {
                advance(self);
                None
            }
            EventKind::Arrow(dir) => {
                advance(self);
                let y = self.log.lattice().neighbor(x, dir.index())?;
                if let Some((l, sup)) = &self.interior {
                    if sup[y] >= *l {
                        return (sup[y] == *l)
                            .then_some(Change { time: t, site: y, kind: ChangeKind::BoundaryHit });
                    }
                }
                if let Some(region) = self.region {
                    if !region.phases[self.phase].mask[y] {
                        return None;
                    }
                }
                if self.infected[y] {
                    return None;
                }
                self.infect(y, t);
                Some(Change { time: t, site: y, kind: ChangeKind::Infect })
            }
        }
    }

    /// Runs to `until`, discarding the changes.
    pub fn advance_to(&mut self, until: f64) {
        while self.next_change(until).is_some() {}
    }

    pub fn infected(&self) -> &[bool] {
        &self.infected
    }

    pub fn infected_count(&self) -> usize {
        self.count
    }

    pub fn is_extinct(&self) -> bool {
        self.count == 0 && self.pending.is_empty()
    }

    /// Time of the last processed ring (or `until` of the last exhausted call).
    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn log(&self) -> &'a EventLog {
        self.log
    }
}
