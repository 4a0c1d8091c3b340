//! Model parameters and the finite boxes the dynamics live on.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A lattice point of `Z^d`.
pub type Site = Vec<i32>;

/// Model parameters. The infection rate along each directed edge is 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub d: usize,
    pub gamma: f64,
    pub delta0: f64,
    pub delta1: f64,
    pub p: f64,
}

impl Params {
    pub fn new(d: usize, gamma: f64, delta0: f64, delta1: f64, p: f64) -> Result<Self> {
        let params = Params { d, gamma, delta0, delta1, p };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if self.d == 0 {
            return bad("dimension must be at least 1".into());
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma must be positive and finite, got {}", self.gamma));
        }
        if !(self.delta1 > 0.0 && self.delta1.is_finite()) {
            return bad(format!("delta1 must be positive and finite, got {}", self.delta1));
        }
        if !(self.delta0.is_finite() && self.delta0 >= self.delta1) {
            return bad(format!(
                "delta0 must be finite and at least delta1, got delta0={} delta1={}",
                self.delta0, self.delta1
            ));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return bad(format!("p must lie in [0, 1], got {}", self.p));
        }
        Ok(())
    }

    pub fn with_p(mut self, p: f64) -> Result<Self> {
        self.p = p;
        self.validate()?;
        Ok(self)
    }

    /// Number of arrow directions, `2d`.
    pub fn directions(&self) -> usize {
        2 * self.d
    }

    /// Total clock rate at a site: `gamma + delta0 + 2d`.
    pub fn site_rate(&self) -> f64 {
        self.gamma + self.delta0 + self.directions() as f64
    }

    /// Lower bound on the probability that a configuration with at most
    /// `m` infected sites dies out: `(delta1 / (delta0 + gamma + 2d))^m`.
    pub fn extinction_lower_bound(&self, m: u32) -> f64 {
        (self.delta1 / self.site_rate()).powi(m as i32)
    }

    /// Per-time-line variant used for side points of a space-time box:
    /// `(e^{-4d} delta1 / (delta0 + gamma + 2d))^k`.
    pub fn side_extinction_lower_bound(&self, k: u32) -> f64 {
        ((-4.0 * self.d as f64).exp() * self.delta1 / self.site_rate()).powi(k as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Arrows leaving the box are discarded.
    #[default]
    Closed,
    /// Coordinates wrap around.
    Periodic,
}

/// The site set `[-half_width, half_width]^d` together with a boundary rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeBox {
    pub half_width: u32,
    #[serde(default)]
    pub boundary: Boundary,
}

impl LatticeBox {
    pub fn closed(half_width: u32) -> Self {
        LatticeBox { half_width, boundary: Boundary::Closed }
    }

    pub fn periodic(half_width: u32) -> Self {
        LatticeBox { half_width, boundary: Boundary::Periodic }
    }
}

/// Indexed view of a box in a given dimension.
///
/// Sites are numbered little-endian in the axes: the first coordinate varies
/// fastest. Neighbor lookups are precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    d: usize,
    lbox: LatticeBox,
    side: usize,
    n_sites: usize,
    neighbors: Vec<u32>,
}

const NO_NEIGHBOR: u32 = u32::MAX;

impl Lattice {
    pub fn new(d: usize, lbox: LatticeBox) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParams("dimension must be at least 1".into()));
        }
        let side = 2 * lbox.half_width as usize + 1;
        let n_sites = side
            .checked_pow(d as u32)
            .filter(|&n| n < u32::MAX as usize)
            .ok_or_else(|| Error::InvalidParams(format!("box with side {side} in d={d} is too large")))?;
        let mut lattice = Lattice { d, lbox, side, n_sites, neighbors: Vec::new() };
        let mut neighbors = vec![NO_NEIGHBOR; n_sites * 2 * d];
        let mut coords = vec![0i32; d];
        for idx in 0..n_sites {
            lattice.fill_coords(idx, &mut coords);
            for dir in 0..2 * d {
                let axis = dir / 2;
                let step = if dir % 2 == 0 { 1 } else { -1 };
                let original = coords[axis];
                let mut moved = original + step;
                let hw = lbox.half_width as i32;
                if moved.abs() > hw {
                    match lbox.boundary {
                        Boundary::Closed => continue,
                        Boundary::Periodic => moved = if moved > hw { -hw } else { hw },
                    }
                }
                coords[axis] = moved;
                neighbors[idx * 2 * d + dir] = lattice.index_unchecked(&coords) as u32;
                coords[axis] = original;
            }
        }
        lattice.neighbors = neighbors;
        Ok(lattice)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn lattice_box(&self) -> LatticeBox {
        self.lbox
    }

    pub fn half_width(&self) -> u32 {
        self.lbox.half_width
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn contains(&self, site: &[i32]) -> bool {
        site.len() == self.d && site.iter().all(|c| c.unsigned_abs() <= self.lbox.half_width)
    }

    pub fn index(&self, site: &[i32]) -> Result<usize> {
        if !self.contains(site) {
            return Err(Error::SiteOutsideBox {
                site: site.to_vec(),
                half_width: self.lbox.half_width,
            });
        }
        Ok(self.index_unchecked(site))
    }

    fn index_unchecked(&self, site: &[i32]) -> usize {
        let hw = self.lbox.half_width as i32;
        site.iter()
            .rev()
            .fold(0usize, |acc, &c| acc * self.side + (c + hw) as usize)
    }

    fn fill_coords(&self, mut idx: usize, out: &mut [i32]) {
        let hw = self.lbox.half_width as i32;
        for c in out.iter_mut() {
            *c = (idx % self.side) as i32 - hw;
            idx /= self.side;
        }
    }

    pub fn coords(&self, idx: usize) -> Site {
        let mut out = vec![0; self.d];
        self.fill_coords(idx, &mut out);
        out
    }

    /// Coordinate of site `idx` along `axis` (0-based).
    #[inline]
    pub fn coord(&self, idx: usize, axis: usize) -> i32 {
        ((idx / self.side.pow(axis as u32)) % self.side) as i32 - self.lbox.half_width as i32
    }

    /// `|x|_inf` of site `idx`.
    pub fn sup_norm(&self, idx: usize) -> u32 {
        (0..self.d).map(|a| self.coord(idx, a).unsigned_abs()).max().unwrap_or(0)
    }

    /// The neighbor of `idx` in direction `dir`, if it exists in the box.
    #[inline]
    pub fn neighbor(&self, idx: usize, dir: usize) -> Option<usize> {
        let n = self.neighbors[idx * 2 * self.d + dir];
        (n != NO_NEIGHBOR).then_some(n as usize)
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.n_sites).map(|i| self.coords(i))
    }

    pub fn origin(&self) -> usize {
        self.index_unchecked(&vec![0; self.d])
    }

    /// Indices of the sites of the cube `center + [-r, r]^d`, or `None` if
    /// the cube is not contained in the box.
    pub fn cube(&self, center: &[i32], r: u32) -> Option<Vec<usize>> {
        let r = r as i32;
        let mut out = Vec::new();
        let mut offset = vec![-r; self.d];
        let mut point = vec![0; self.d];
        loop {
            for a in 0..self.d {
                point[a] = center[a] + offset[a];
            }
            if !self.contains(&point) {
                return None;
            }
            out.push(self.index_unchecked(&point));
            let mut axis = 0;
            loop {
                if axis == self.d {
                    return Some(out);
                }
                offset[axis] += 1;
                if offset[axis] <= r {
                    break;
                }
                offset[axis] = -r;
                axis += 1;
            }
        }
    }
}

/// Iterates the integer points of the axis-aligned box `[lo, hi]` in
/// lexicographic order (first coordinate most significant).
pub(crate) fn points_in(lo: &[i32], hi: &[i32]) -> Vec<Site> {
    let d = lo.len();
    if (0..d).any(|a| lo[a] > hi[a]) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut point = lo.to_vec();
    loop {
        out.push(point.clone());
        let mut axis = d;
        loop {
            if axis == 0 {
                return out;
            }
            axis -= 1;
            point[axis] += 1;
            if point[axis] <= hi[axis] {
                break;
            }
            point[axis] = lo[axis];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        let lat = Lattice::new(2, LatticeBox::closed(2)).unwrap();
        assert_eq!(lat.n_sites(), 25);
        for i in 0..lat.n_sites() {
            assert_eq!(lat.index(&lat.coords(i)).unwrap(), i);
            assert_eq!(lat.coord(i, 1), lat.coords(i)[1]);
        }
        assert_eq!(lat.coords(lat.origin()), vec![0, 0]);
    }

    #[test]
    fn closed_and_periodic_neighbors() {
        let closed = Lattice::new(1, LatticeBox::closed(1)).unwrap();
        let right = closed.index(&[1]).unwrap();
        assert_eq!(closed.neighbor(right, 0), None);
        assert_eq!(closed.neighbor(right, 1), Some(closed.origin()));

        let periodic = Lattice::new(1, LatticeBox::periodic(1)).unwrap();
        assert_eq!(periodic.neighbor(right, 0), Some(periodic.index(&[-1]).unwrap()));
    }

    #[test]
    fn params_validation() {
        assert!(Params::new(1, 1.0, 1.0, 2.0, 0.5).is_err());
        assert!(Params::new(0, 1.0, 2.0, 1.0, 0.5).is_err());
        assert!(Params::new(1, 0.0, 2.0, 1.0, 0.5).is_err());
        assert!(Params::new(1, 1.0, 2.0, 1.0, 1.5).is_err());
        assert!(Params::new(1, 1.0, 2.0, 1.0, 1.0).is_ok());
    }

    #[test]
    fn extinction_bounds() {
        let p = Params::new(1, 1.0, 2.0, 1.0, 0.5).unwrap();
        assert_eq!(p.extinction_lower_bound(0), 1.0);
        assert!((p.extinction_lower_bound(1) - 1.0 / 5.0).abs() < 1e-15);
        let q = Params::new(2, 2.0, 1.0, 1.0, 0.5).unwrap();
        assert!((q.extinction_lower_bound(2) - 1.0 / 49.0).abs() < 1e-15);
        let side = p.side_extinction_lower_bound(1);
        assert!((side - (-4.0f64).exp() / 5.0).abs() < 1e-15);
    }

    #[test]
    fn cube_and_points() {
        let lat = Lattice::new(2, LatticeBox::closed(3)).unwrap();
        assert_eq!(lat.cube(&[0, 0], 1).unwrap().len(), 9);
        assert!(lat.cube(&[3, 0], 1).is_none());
        let pts = points_in(&[0, -1], &[1, 0]);
        assert_eq!(pts, vec![vec![0, -1], vec![0, 0], vec![1, -1], vec![1, 0]]);
    }
}
