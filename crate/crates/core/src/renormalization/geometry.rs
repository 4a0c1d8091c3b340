//! The block region: a staircase of `k` space-time slabs, its mirror image
//! in the first coordinate, and the target window at the top.

use serde::{Deserialize, Serialize};

use crate::dynamics::{Phase, Region};
use crate::lattice::Lattice;
use crate::{Error, Result};

/// An axis box in space times a closed time interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slab {
    pub lo: Vec<i32>,
    pub hi: Vec<i32>,
    pub t0: f64,
    pub t1: f64,
}

impl Slab {
    pub fn contains_site(&self, x: &[i32]) -> bool {
        x.iter().zip(&self.lo).zip(&self.hi).all(|((&c, &lo), &hi)| lo <= c && c <= hi)
    }

    pub fn contains(&self, x: &[i32], t: f64) -> bool {
        self.t0 <= t && t <= self.t1 && self.contains_site(x)
    }

    fn mirrored(&self) -> Slab {
        let mut lo = self.lo.clone();
        let mut hi = self.hi.clone();
        lo[0] = -self.hi[0];
        hi[0] = -self.lo[0];
        Slab { lo, hi, t0: self.t0, t1: self.t1 }
    }
}

/// Slab `j` is `([-5a, 5a] + 2ja) x [-5a, 5a]^(d-1) x ([0, 6b] + 5jb)`;
/// target centers lie in `([-a, a] + 2ka) x [-a, a]^(d-1) x [5kb, (5k+1)b]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockGeometry {
    pub d: usize,
    pub n: u32,
    pub a: u32,
    pub b: f64,
    pub k: u32,
    pub slabs: Vec<Slab>,
    pub reflected: Vec<Slab>,
    pub target: Slab,
    /// Horizontal gap between the right edge of the first slab of the
    /// mirrored region (`x_1 = 5a`) and the left edge of the target window
    /// (`x_1 = (2k - 1)a`), clamped at 0.
    pub c_offset: f64,
    /// Whether this is the mirror image of the rightward block.
    pub mirrored: bool,
}

impl BlockGeometry {
    pub fn new(d: usize, n: u32, a: u32, b: f64, k: u32) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParams("dimension must be at least 1".into()));
        }
        if n >= a {
            return Err(Error::GeometryMisfit(format!("need n < a, got n = {n}, a = {a}")));
        }
        if k == 0 || !(b > 0.0 && b.is_finite()) {
            return Err(Error::GeometryMisfit(format!("need k >= 1 and b > 0, got k = {k}, b = {b}")));
        }
        let (ai, ki) = (a as i32, k as i32);
        let slabs: Vec<Slab> = (0..ki)
            .map(|j| {
                let mut lo = vec![-5 * ai; d];
                let mut hi = vec![5 * ai; d];
                lo[0] += 2 * j * ai;
                hi[0] += 2 * j * ai;
                let t0 = 5.0 * j as f64 * b;
                Slab { lo, hi, t0, t1: t0 + 6.0 * b }
            })
            .collect();
        let reflected = slabs.iter().map(Slab::mirrored).collect();
        let mut lo = vec![-ai; d];
        let mut hi = vec![ai; d];
        lo[0] = (2 * ki - 1) * ai;
        hi[0] = (2 * ki + 1) * ai;
        let target = Slab { lo, hi, t0: 5.0 * k as f64 * b, t1: (5.0 * k as f64 + 1.0) * b };
        let c_offset = ((2 * ki - 6) * ai).max(0) as f64;
        Ok(BlockGeometry { d, n, a, b, k, slabs, reflected, target, c_offset, mirrored: false })
    }

    /// The same block reflected in the first coordinate.
    pub fn mirror(&self) -> Self {
        BlockGeometry {
            slabs: self.reflected.clone(),
            reflected: self.slabs.clone(),
            target: self.target.mirrored(),
            mirrored: !self.mirrored,
            ..self.clone()
        }
    }

    /// Half-width of the smallest centered box holding the region.
    pub fn half_width(&self) -> u32 {
        5 * self.a + 2 * (self.k - 1) * self.a
    }

    /// Top of the target window.
    pub fn horizon(&self) -> f64 {
        self.target.t1
    }

    /// Whether `(x, t)` lies in the region.
    pub fn contains(&self, x: &[i32], t: f64) -> bool {
        self.slabs.iter().any(|s| s.contains(x, t))
    }

    /// The region as time phases of site masks over `lattice`.
    pub fn region(&self, lattice: &Lattice) -> Region {
        let mut breaks: Vec<f64> = self.slabs.iter().flat_map(|s| [s.t0, s.t1]).collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let coords: Vec<Vec<i32>> = lattice.sites().collect();
        let phases = breaks
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                let mask = coords
                    .iter()
                    .map(|x| self.slabs.iter().any(|s| s.t0 <= mid && mid <= s.t1 && s.contains_site(x)))
                    .collect();
                Phase { until: w[1], mask }
            })
            .collect();
        Region { phases }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeBox;

    #[test]
    fn single_slab() {
        let g = BlockGeometry::new(2, 1, 3, 2.0, 1).unwrap();
        assert_eq!(g.slabs.len(), 1);
        assert_eq!(g.slabs[0], Slab { lo: vec![-15, -15], hi: vec![15, 15], t0: 0.0, t1: 12.0 });
        assert_eq!(g.c_offset, 0.0);
        assert_eq!(g.target.lo, vec![3, -3]);
        assert_eq!(g.target.hi, vec![9, 3]);
    }

    #[test]
    fn offset_grows_with_k() {
        for a in 1..6 {
            for k in 6..=10 {
                let g = BlockGeometry::new(1, 0, a, 1.0, k).unwrap();
                assert!(g.c_offset >= 3.0 * a as f64);
            }
        }
    }

    #[test]
    fn mirror_is_involution() {
        let g = BlockGeometry::new(2, 1, 2, 0.5, 4).unwrap();
        let m = g.mirror();
        assert_ne!(m, g);
        assert_eq!(m.target.lo[0], -(g.target.hi[0]));
        assert_eq!(m.mirror(), g);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(BlockGeometry::new(1, 2, 2, 1.0, 1).is_err());
        assert!(BlockGeometry::new(1, 1, 2, 1.0, 0).is_err());
        assert!(BlockGeometry::new(1, 1, 2, 0.0, 1).is_err());
    }

    #[test]
    fn region_phases_follow_slabs() {
        let g = BlockGeometry::new(1, 0, 1, 1.0, 3).unwrap();
        let lat = Lattice::new(1, LatticeBox::closed(g.half_width())).unwrap();
        let region = g.region(&lat);
        // Breaks 0, 5, 6, 10, 11, 16.
        let untils: Vec<f64> = region.phases.iter().map(|p| p.until).collect();
        assert_eq!(untils, vec![5.0, 6.0, 10.0, 11.0, 16.0]);
        let allowed = |phase: usize, x: i32| region.phases[phase].mask[lat.index(&[x]).unwrap()];
        assert!(allowed(0, -5) && allowed(0, 5) && !allowed(0, 6));
        assert!(allowed(1, -5) && allowed(1, 7));
        assert!(!allowed(2, -4) && allowed(2, 7) && !allowed(2, 8));
        assert!(allowed(4, 9) && allowed(4, -1) && !allowed(4, -2));
        assert_eq!(g.horizon(), 16.0);
    }
}
