//! Detection of fully infected translates `x + [-n, n]^d` during a sweep.

use crate::dynamics::{ChangeKind, Sweep};
use crate::lattice::{points_in, Lattice, Site};

/// Candidate centers, in lexicographic order, with their cubes.
pub(crate) struct CoverTarget {
    centers: Vec<Site>,
    cubes: Vec<Vec<usize>>,
    /// For each site, the positions (into `centers`) of the cubes holding it.
    containing: Vec<Vec<u32>>,
}

impl CoverTarget {
    /// Centers in the axis box `[lo, hi]` whose cube of radius `n` fits the lattice.
    pub(crate) fn new(lattice: &Lattice, lo: &[i32], hi: &[i32], n: u32) -> Self {
        let mut centers = Vec::new();
        let mut cubes = Vec::new();
        let mut containing = vec![Vec::new(); lattice.n_sites()];
        for c in points_in(lo, hi) {
            if let Some(cube) = lattice.cube(&c, n) {
                let pos = centers.len() as u32;
                for &s in &cube {
                    containing[s].push(pos);
                }
                centers.push(c);
                cubes.push(cube);
            }
        }
        CoverTarget { centers, cubes, containing }
    }

    fn covered(&self, pos: usize, infected: &[bool]) -> bool {
        self.cubes[pos].iter().all(|&s| infected[s])
    }

    /// First covered center in the current state.
    pub(crate) fn first_covered(&self, infected: &[bool]) -> Option<usize> {
        (0..self.centers.len()).find(|&pos| self.covered(pos, infected))
    }

    pub(crate) fn center(&self, pos: usize) -> &Site {
        &self.centers[pos]
    }

    /// Earliest time in `[from, until)` (or exactly `from` when
    /// `from == until`) at which some target cube is fully infected, with
    /// the lexicographically first such center. The sweep must not have
    /// passed `from`.
    pub(crate) fn first_cover(&self, sweep: &mut Sweep<'_>, from: f64, until: f64) -> Option<(f64, usize)> {
        sweep.advance_to(from);
        if let Some(pos) = self.first_covered(sweep.infected()) {
            return Some((from, pos));
        }
        if until <= from {
            return None;
        }
        while let Some(change) = sweep.next_change(until) {
            if change.time >= until {
                break;
            }
            if change.kind != ChangeKind::Infect {
                if sweep.is_extinct() {
                    return None;
                }
                continue;
            }
            let infected = sweep.infected();
            let hit = self.containing[change.site]
                .iter()
                .map(|&p| p as usize)
                .filter(|&pos| self.covered(pos, infected))
                .min();
            if let Some(pos) = hit {
                return Some((change.time, pos));
            }
        }
        None
    }
}
