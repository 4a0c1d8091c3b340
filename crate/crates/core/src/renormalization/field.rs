//! The renormalized field `Z_m(i) = (X_m(i), Y_m(i))`.
//!
//! Cell `(i, m)` is anchored at `x_1 = 2ka(2i - m)`, time `5kbm`. An open
//! parent `(j, m)` runs a rightward block towards child `(j + 1, m + 1)` and
//! a mirrored block towards child `(j, m + 1)`, both started from its
//! witness and both driven by one fresh log owned by the parent. Children
//! sharing a parent are therefore dependent; children two apart are
//! conditionally independent given the previous level.

use serde::{Deserialize, Serialize};

use super::block::{block_event, block_window, BlockWitness};
use super::geometry::BlockGeometry;
use crate::events::EventLog;
use crate::lattice::{Lattice, Params};
use crate::replicate;
use crate::rng;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldCell {
    pub open: bool,
    /// Some parent was open, so the cell was attempted.
    pub eligible: bool,
    /// Absolute witness `(center, time)`; present iff `open`.
    pub witness: Option<BlockWitness>,
}

impl FieldCell {
    const CLOSED: FieldCell = FieldCell { open: false, eligible: false, witness: None };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenormField {
    pub levels: Vec<Vec<FieldCell>>,
}

impl RenormField {
    pub fn open_row(&self, m: usize) -> Vec<bool> {
        self.levels[m].iter().map(|c| c.open).collect()
    }

    pub fn row_density(&self, m: usize) -> f64 {
        let row = &self.levels[m];
        row.iter().filter(|c| c.open).count() as f64 / row.len() as f64
    }

    /// Whether some cell of the last level is open.
    pub fn survives(&self) -> bool {
        self.levels.last().is_some_and(|row| row.iter().any(|c| c.open))
    }
}

/// Anchor of cell `(i, m)` as `(first coordinate, time)`.
pub fn anchor(geom: &BlockGeometry, i: usize, m: usize) -> (i64, f64) {
    let x1 = 2 * geom.k as i64 * geom.a as i64 * (2 * i as i64 - m as i64);
    (x1, 5.0 * geom.k as f64 * geom.b * m as f64)
}

fn shift(w: &BlockWitness, dx: i64, dt: f64) -> Result<BlockWitness> {
    let mut center = w.center.clone();
    center[0] = i32::try_from(center[0] as i64 + dx).map_err(|_| Error::GeometryMisfit("field too wide".into()))?;
    Ok(BlockWitness { center, time: w.time + dt })
}

fn earlier(a: &BlockWitness, b: &BlockWitness) -> bool {
    (a.time, &a.center) < (b.time, &b.center)
}

/// Builds `rows` levels of `cols` cells from the single open cell `(0, 0)`
/// with witness at the origin, time 0.
pub fn build_renorm_field(
    params: &Params,
    geom: &BlockGeometry,
    rows: usize,
    cols: usize,
    master_seed: u64,
) -> Result<RenormField> {
    params.validate()?;
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidArgument("the field needs at least one row and one column".into()));
    }
    if params.d != geom.d {
        return Err(Error::GeometryMisfit("geometry and parameters disagree on d".into()));
    }
    let (lbox, horizon) = block_window(geom);
    let lattice = Lattice::new(geom.d, lbox)?;
    let mirror = geom.mirror();
    let regions = (geom.region(&lattice), mirror.region(&lattice));
    let mut levels = Vec::with_capacity(rows);
    let mut first = vec![FieldCell::CLOSED; cols];
    first[0] = FieldCell {
        open: true,
        eligible: true,
        witness: Some(BlockWitness { center: vec![0; geom.d], time: 0.0 }),
    };
    levels.push(first);
    for m in 0..rows - 1 {
        let parents = &levels[m];
        // (rightward outcome, leftward outcome) per parent, in absolute coordinates.
        let outcomes = replicate::try_map(cols as u64, |j| -> Result<(Option<BlockWitness>, Option<BlockWitness>)> {
            let j = j as usize;
            let Some(w) = &parents[j].witness else {
                return Ok((None, None));
            };
            let (ax, at) = anchor(geom, j, m);
            let rel = shift(w, -ax, -at)?;
            let seed = rng::derive(master_seed, &[rng::purpose::FIELD, m as u64, j as u64]);
            let log = EventLog::build(*params, lbox, horizon, seed)?;
            // Absorb rounding from the anchor arithmetic.
            let start = (rel.center.as_slice(), rel.time.clamp(0.0, geom.b));
            let right = if j + 1 < cols {
                block_event(&log, geom, &regions.0, start)?.map(|b| shift(&b, ax, at)).transpose()?
            } else {
                None
            };
            let left = block_event(&log, &mirror, &regions.1, start)?.map(|b| shift(&b, ax, at)).transpose()?;
            Ok((right, left))
        })?;
        let mut row = vec![FieldCell::CLOSED; cols];
        for (i, cell) in row.iter_mut().enumerate() {
            let from_left = i.checked_sub(1).and_then(|j| outcomes[j].0.as_ref());
            let from_self = outcomes[i].1.as_ref();
            cell.eligible = parents[i].open || (i > 0 && parents[i - 1].open);
            cell.witness = match (from_left, from_self) {
                (Some(a), Some(b)) => Some(if earlier(b, a) { b.clone() } else { a.clone() }),
                (Some(a), None) => Some(a.clone()),
                (None, Some(b)) => Some(b.clone()),
                (None, None) => None,
            };
            cell.open = cell.witness.is_some();
        }
        levels.push(row);
    }
    Ok(RenormField { levels })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchors_link_parents_to_children() {
        let g = BlockGeometry::new(1, 0, 2, 1.0, 3).unwrap();
        let shift_x = 2 * g.k as i64 * g.a as i64;
        for m in 0..4 {
            for i in 1..4 {
                assert_eq!(anchor(&g, i - 1, m).0 + shift_x, anchor(&g, i, m + 1).0);
                assert_eq!(anchor(&g, i, m).0 - shift_x, anchor(&g, i, m + 1).0);
            }
        }
        assert_eq!(anchor(&g, 0, 2).1, 30.0);
    }

    #[test]
    fn dead_blocks_stop_the_field() {
        let g = BlockGeometry::new(1, 0, 1, 1.0, 1).unwrap();
        let params = Params::new(1, 1.0, 100.0, 100.0, 0.5).unwrap();
        let f = build_renorm_field(&params, &g, 3, 3, 4).unwrap();
        assert!(f.levels[1].iter().all(|c| !c.open));
        assert!(f.levels[1][0].eligible && f.levels[1][1].eligible && !f.levels[1][2].eligible);
        assert!(!f.survives());
    }
}
