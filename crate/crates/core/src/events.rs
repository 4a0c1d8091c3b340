//! The graphical representation restricted to a finite space-time window.
//!
//! Each site carries independent Poisson clocks:
//!
//! | kind            | rate            | effect                                           |
//! |-----------------|-----------------|--------------------------------------------------|
//! | `BgFlip(mark)`  | `gamma`         | background jumps to 1 if `mark < p`, else to 0   |
//! | `Recovery1`     | `delta1`        | infected site recovers                            |
//! | `RecoveryExtra` | `delta0-delta1` | infected site recovers if its background is 0     |
//! | `Arrow(dir)`    | 1 per direction | infection may cross from the site to its neighbor |
//!
//! Splitting one rate-`gamma` clock by a uniform mark is equal in law to two
//! independent clocks of rates `gamma p` and `gamma (1-p)`, and it couples
//! all values of `p` monotonically on one log.

use std::cmp::Ordering;
use std::io::{Read, Write};

use rand::Rng;
use rand_distr::Exp1;

use crate::lattice::{Boundary, Lattice, LatticeBox, Params};
use crate::rng;
use crate::{Error, Result};

/// One of the `2d` unit directions. Even indices are `+e_{i}`, odd are `-e_{i}`,
/// with `i = index / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Direction(pub u8);

impl Direction {
    pub fn new(axis: usize, positive: bool) -> Self {
        Direction((2 * axis + usize::from(!positive)) as u8)
    }

    pub fn axis(self) -> usize {
        self.0 as usize / 2
    }

    pub fn is_positive(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn reversed(self) -> Self {
        Direction(self.0 ^ 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventKind {
    BgFlip { mark: f64 },
    Recovery1,
    RecoveryExtra,
    Arrow(Direction),
}

impl EventKind {
    /// Tie-break order for events at the same site and time.
    pub fn rank(&self) -> u16 {
        match self {
            EventKind::BgFlip { .. } => 0,
            EventKind::Recovery1 => 1,
            EventKind::RecoveryExtra => 2,
            EventKind::Arrow(dir) => 3 + dir.0 as u16,
        }
    }

    /// Background state a flip moves to under threshold `p`.
    #[inline]
    pub fn flip_target(mark: f64, p: f64) -> bool {
        mark < p
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
}

impl Event {
    fn order(&self, other: &Event) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then_with(|| self.kind.rank().cmp(&other.kind.rank()))
    }
}

/// Immutable realization of all clocks on `box x (0, horizon]`.
///
/// Events are stored site by site in time order (compressed rows).
#[derive(Debug, Clone, PartialEq)]
pub struct EventLog {
    params: Params,
    lattice: Lattice,
    horizon: f64,
    seed: u64,
    offsets: Vec<u32>,
    events: Vec<Event>,
}

const STREAM_BG: u64 = 0;
const STREAM_REC1: u64 = 1;
const STREAM_REC_EXTRA: u64 = 2;
const STREAM_ARROW: u64 = 3;

/// Stream id of one clock at one site. Keyed by coordinates, so a site sees
/// the same clocks in every box that contains it.
fn clock_stream_id(site: &[i32], clock: u64) -> u64 {
    let mut tags: Vec<u64> = site.iter().map(|&c| c as i64 as u64).collect();
    tags.push(site.len() as u64);
    tags.push(clock);
    rng::derive(0, &tags)
}

fn push_poisson(
    seed: u64,
    site: &[i32],
    clock: u64,
    rate: f64,
    horizon: f64,
    out: &mut Vec<Event>,
    mut kind: impl FnMut(&mut rand_chacha::ChaCha8Rng) -> EventKind,
) {
    if rate <= 0.0 {
        return;
    }
    let mut stream = rng::stream(seed, clock_stream_id(site, clock));
    let mut t = 0.0;
    loop {
        let gap: f64 = stream.sample(Exp1);
        t += gap / rate;
        if t > horizon {
            break;
        }
        if t > 0.0 {
            let kind = kind(&mut stream);
            out.push(Event { time: t, kind });
        }
    }
}

impl EventLog {
    /// Realizes every clock of every site of `lbox` on `(0, horizon]`.
    pub fn build(params: Params, lbox: LatticeBox, horizon: f64, seed: u64) -> Result<Self> {
        params.validate()?;
        check_horizon(horizon)?;
        let lattice = Lattice::new(params.d, lbox)?;
        let n = lattice.n_sites();
        let expected = (params.site_rate() * horizon * n as f64) as usize;
        let mut events = Vec::with_capacity(expected + expected / 8 + 16);
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0u32);
        let mut coords = vec![0; params.d];
        for idx in 0..n {
            coords.copy_from_slice(&lattice.coords(idx));
            let start = events.len();
            push_poisson(seed, &coords, STREAM_BG, params.gamma, horizon, &mut events, |s| {
                EventKind::BgFlip { mark: s.random::<f64>() }
            });
            push_poisson(seed, &coords, STREAM_REC1, params.delta1, horizon, &mut events, |_| {
                EventKind::Recovery1
            });
            push_poisson(
                seed,
                &coords,
                STREAM_REC_EXTRA,
                params.delta0 - params.delta1,
                horizon,
                &mut events,
                |_| EventKind::RecoveryExtra,
            );
            for dir in 0..params.directions() {
                let kind = EventKind::Arrow(Direction(dir as u8));
                push_poisson(seed, &coords, STREAM_ARROW + dir as u64, 1.0, horizon, &mut events, |_| {
                    kind
                });
            }
            events[start..].sort_unstable_by(Event::order);
            offsets.push(u32::try_from(events.len()).map_err(|_| {
                Error::InvalidParams("event log exceeds 2^32 events".into())
            })?);
        }
        Ok(EventLog { params, lattice, horizon, seed, offsets, events })
    }

    /// Assembles a log from explicit per-site event lists (fixtures, decoding).
    pub fn from_site_events(
        params: Params,
        lbox: LatticeBox,
        horizon: f64,
        seed: u64,
        per_site: Vec<Vec<Event>>,
    ) -> Result<Self> {
        params.validate()?;
        check_horizon(horizon)?;
        let lattice = Lattice::new(params.d, lbox)?;
        if per_site.len() != lattice.n_sites() {
            return Err(Error::BoxMismatch(format!(
                "expected {} site lists, got {}",
                lattice.n_sites(),
                per_site.len()
            )));
        }
        let mut offsets = vec![0u32];
        let mut events = Vec::new();
        for (idx, mut list) in per_site.into_iter().enumerate() {
            list.sort_by(Event::order);
            for ev in &list {
                if !(ev.time > 0.0 && ev.time <= horizon) {
                    return Err(Error::InvalidWindow(format!(
                        "event at site {idx} has time {} outside (0, {horizon}]",
                        ev.time
                    )));
                }
                if let EventKind::Arrow(dir) = ev.kind {
                    if dir.index() >= params.directions() {
                        return Err(Error::InvalidArgument(format!("direction {} in d={}", dir.0, params.d)));
                    }
                }
            }
            events.extend(list);
            offsets.push(events.len() as u32);
        }
        Ok(EventLog { params, lattice, horizon, seed, offsets, events })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn lattice_box(&self) -> LatticeBox {
        self.lattice.lattice_box()
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn total_events(&self) -> usize {
        self.events.len()
    }

    /// All events at site index `idx`, in time order.
    #[inline]
    pub fn site_events(&self, idx: usize) -> &[Event] {
        &self.events[self.offsets[idx] as usize..self.offsets[idx + 1] as usize]
    }

    /// Events at `site` with times in the half-open interval `(s, t]`.
    pub fn events_in(&self, site: &[i32], s: f64, t: f64) -> Result<&[Event]> {
        let idx = self.lattice.index(site)?;
        if !(s >= 0.0 && s < t && t <= self.horizon) {
            return Err(Error::InvalidWindow(format!(
                "interval ({s}, {t}] must satisfy 0 <= s < t <= {}",
                self.horizon
            )));
        }
        let all = self.site_events(idx);
        let lo = all.partition_point(|e| e.time <= s);
        let hi = all.partition_point(|e| e.time <= t);
        Ok(&all[lo..hi])
    }

    /// Index into `site_events(idx)` of the first event strictly after `t`.
    #[inline]
    pub(crate) fn first_after(&self, idx: usize, t: f64) -> usize {
        self.site_events(idx).partition_point(|e| e.time <= t)
    }

    /// Writes the binary fixture format.
    ///
    /// Layout (little-endian): `"CPRE"`, version `u16`, `d u32`, `gamma`,
    /// `delta0`, `delta1`, `p` as `f64`, `half_width u32`, boundary `u8`
    /// (0 closed, 1 periodic), `horizon f64`, `seed u64`, `n_sites u32`; then
    /// per site an event count `u32` followed by records `time f64`, tag `u8`
    /// (0 flip, 1 recovery, 2 extra recovery, 3 arrow) and a payload
    /// (`mark f64` for flips, direction `u8` for arrows).
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(self.params.d as u32).to_le_bytes())?;
        for x in [self.params.gamma, self.params.delta0, self.params.delta1, self.params.p] {
            w.write_all(&x.to_le_bytes())?;
        }
        let lbox = self.lattice_box();
        w.write_all(&lbox.half_width.to_le_bytes())?;
        w.write_all(&[match lbox.boundary {
            Boundary::Closed => 0u8,
            Boundary::Periodic => 1u8,
        }])?;
        w.write_all(&self.horizon.to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        w.write_all(&(self.lattice.n_sites() as u32).to_le_bytes())?;
        for idx in 0..self.lattice.n_sites() {
            let list = self.site_events(idx);
            w.write_all(&(list.len() as u32).to_le_bytes())?;
            for ev in list {
                w.write_all(&ev.time.to_le_bytes())?;
                match ev.kind {
                    EventKind::BgFlip { mark } => {
                        w.write_all(&[0])?;
                        w.write_all(&mark.to_le_bytes())?;
                    }
                    EventKind::Recovery1 => w.write_all(&[1])?,
                    EventKind::RecoveryExtra => w.write_all(&[2])?,
                    EventKind::Arrow(dir) => w.write_all(&[3, dir.0])?,
                }
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Decode("bad magic bytes".into()));
        }
        let version = u16::from_le_bytes(read_array(&mut r)?);
        if version != FORMAT_VERSION {
            return Err(Error::Decode(format!("unsupported version {version}")));
        }
        let d = u32::from_le_bytes(read_array(&mut r)?) as usize;
        let gamma = read_f64(&mut r)?;
        let delta0 = read_f64(&mut r)?;
        let delta1 = read_f64(&mut r)?;
        let p = read_f64(&mut r)?;
        let params = Params::new(d, gamma, delta0, delta1, p)?;
        let half_width = u32::from_le_bytes(read_array(&mut r)?);
        let boundary = match read_array::<1, _>(&mut r)?[0] {
            0 => Boundary::Closed,
            1 => Boundary::Periodic,
            b => return Err(Error::Decode(format!("unknown boundary tag {b}"))),
        };
        let horizon = read_f64(&mut r)?;
        let seed = u64::from_le_bytes(read_array(&mut r)?);
        let n_sites = u32::from_le_bytes(read_array(&mut r)?) as usize;
        let mut per_site = Vec::with_capacity(n_sites);
        for _ in 0..n_sites {
            let count = u32::from_le_bytes(read_array(&mut r)?) as usize;
            let mut list = Vec::with_capacity(count.min(1 << 20));
            for _ in 0..count {
                let time = read_f64(&mut r)?;
                let kind = match read_array::<1, _>(&mut r)?[0] {
                    0 => EventKind::BgFlip { mark: read_f64(&mut r)? },
                    1 => EventKind::Recovery1,
                    2 => EventKind::RecoveryExtra,
                    3 => EventKind::Arrow(Direction(read_array::<1, _>(&mut r)?[0])),
                    t => return Err(Error::Decode(format!("unknown event tag {t}"))),
                };
                list.push(Event { time, kind });
            }
            per_site.push(list);
        }
        EventLog::from_site_events(params, LatticeBox { half_width, boundary }, horizon, seed, per_site)
    }
}

const MAGIC: &[u8; 4] = b"CPRE";
const FORMAT_VERSION: u16 = 1;

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)
        .map_err(|e| Error::Decode(format!("truncated input: {e}")))?;
    Ok(buf)
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    Ok(f64::from_le_bytes(read_array(r)?))
}

fn check_horizon(horizon: f64) -> Result<()> {
    if horizon > 0.0 && horizon.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidWindow(format!("horizon must be positive and finite, got {horizon}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> Params {
        Params::new(1, 1.0, 2.0, 0.5, 0.5).unwrap()
    }

    #[test]
    fn rejects_empty_window() {
        assert!(EventLog::build(params(), LatticeBox::closed(1), 0.0, 1).is_err());
        assert!(EventLog::build(params(), LatticeBox::closed(1), -1.0, 1).is_err());
    }

    #[test]
    fn same_seed_same_log() {
        let a = EventLog::build(params(), LatticeBox::closed(3), 5.0, 11).unwrap();
        let b = EventLog::build(params(), LatticeBox::closed(3), 5.0, 11).unwrap();
        let c = EventLog::build(params(), LatticeBox::closed(3), 5.0, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn site_events_sorted_and_in_window() {
        let log = EventLog::build(params(), LatticeBox::closed(4), 3.0, 5).unwrap();
        for idx in 0..log.lattice().n_sites() {
            let list = log.site_events(idx);
            assert!(list.windows(2).all(|w| w[0].time < w[1].time));
            assert!(list.iter().all(|e| e.time > 0.0 && e.time <= 3.0));
        }
    }

    #[test]
    fn events_in_half_open() {
        let p = params();
        let list = vec![
            Event { time: 0.2, kind: EventKind::Recovery1 },
            Event { time: 0.7, kind: EventKind::Arrow(Direction(0)) },
            Event { time: 1.5, kind: EventKind::RecoveryExtra },
        ];
        let log = EventLog::from_site_events(p, LatticeBox::closed(0), 2.0, 0, vec![list]).unwrap();
        let got: Vec<f64> = log.events_in(&[0], 0.2, 1.5).unwrap().iter().map(|e| e.time).collect();
        assert_eq!(got, vec![0.7, 1.5]);
        assert!(log.events_in(&[0], 1.6, 2.0).unwrap().is_empty());
        assert_eq!(log.events_in(&[0], 0.0, 2.0).unwrap().len(), 3);
        assert!(log.events_in(&[1], 0.0, 1.0).is_err());
        assert!(log.events_in(&[0], 1.0, 1.0).is_err());
        assert!(log.events_in(&[0], 0.0, 2.5).is_err());
    }

    #[test]
    fn zero_rate_clock_is_silent() {
        let p = Params::new(1, 1.0, 1.0, 1.0, 0.5).unwrap();
        let log = EventLog::build(p, LatticeBox::closed(2), 20.0, 3).unwrap();
        for idx in 0..log.lattice().n_sites() {
            assert!(log.site_events(idx).iter().all(|e| e.kind != EventKind::RecoveryExtra));
        }
    }

    #[test]
    fn binary_round_trip_and_rejects_garbage() {
        let log = EventLog::build(params(), LatticeBox::periodic(2), 4.0, 99).unwrap();
        let mut buf = Vec::new();
        log.write_binary(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"CPRE");
        let back = EventLog::read_binary(buf.as_slice()).unwrap();
        assert_eq!(back, log);
        assert!(EventLog::read_binary(&buf[..buf.len() - 3]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(EventLog::read_binary(bad.as_slice()).is_err());
    }
}
