//! wasm-bindgen bindings for the static demo page in `www/`.
//!
//! Every export is a pure function of its arguments, so a given seed redraws
//! the same picture.

use cpree_core::background::{sample_initial, BackgroundLaw, InitLaw};
use cpree_core::dynamics::simulate;
use cpree_core::estimators::scan_critical;
use cpree_core::renormalization::{op_survival_curve, op_survival_exact, MAX_EXACT_DEPTH};
use cpree_core::{EventLog, LatticeBox, Mode, Params};
use wasm_bindgen::prelude::*;

fn js(e: cpree_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Cell code of the space-time raster: bit 0 is the background, bit 1 the
/// infection.
fn cell(background: bool, infected: bool) -> u8 {
    background as u8 | (infected as u8) << 1
}

/// Runs the one-dimensional process on `[-half_width, half_width]` from a
/// stationary environment with only the origin infected, and samples it at
/// `rows` evenly spaced times in `[0, horizon]`.
///
/// Returns `rows * (2 * half_width + 1)` cell codes, row-major with time
/// increasing.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn space_time(
    gamma: f64,
    delta0: f64,
    delta1: f64,
    p: f64,
    half_width: u32,
    horizon: f64,
    rows: u32,
    seed: u64,
) -> Result<Vec<u8>, JsError> {
    if rows == 0 {
        return Err(JsError::new("rows must be positive"));
    }
    let params = Params::new(1, gamma, delta0, delta1, p).map_err(js)?;
    let log = EventLog::build(params, LatticeBox::closed(half_width), horizon, seed).map_err(js)?;
    let law = InitLaw::new(BackgroundLaw::Stationary, vec![vec![0]]);
    let init = sample_initial(&law, log.lattice(), p, seed ^ 0x5eed).map_err(js)?;
    let run = simulate(&log, &init, 0.0, Mode::Full).map_err(js)?;
    let mut out = Vec::with_capacity(rows as usize * init.infected.len());
    for r in 0..rows {
        let t = horizon * r as f64 / (rows.max(2) - 1) as f64;
        let c = run.configuration_at(&log, t);
        out.extend(c.background.iter().zip(&c.infected).map(|(&b, &i)| cell(b, i)));
    }
    Ok(out)
}

/// Survival probability to `horizon` on the grid `p = 0, 1/steps, ..., 1`,
/// started from the origin in a stationary environment. Returns
/// `[value, ci_low, ci_high]` triples, followed by the interpolated
/// crossing of `threshold` (NaN if there is none).
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn p_scan(
    gamma: f64,
    delta0: f64,
    delta1: f64,
    half_width: u32,
    horizon: f64,
    steps: u32,
    replicates: u32,
    threshold: f64,
    seed: u64,
) -> Result<Vec<f64>, JsError> {
    let params = Params::new(1, gamma, delta0, delta1, 0.5).map_err(js)?;
    let grid: Vec<f64> = (0..=steps.max(1)).map(|i| i as f64 / steps.max(1) as f64).collect();
    let law = InitLaw::new(BackgroundLaw::Stationary, vec![vec![0]]);
    let scan = scan_critical(
        &params,
        &grid,
        &law,
        LatticeBox::closed(half_width),
        horizon,
        replicates as u64,
        threshold,
        seed,
    )
    .map_err(js)?;
    let mut out: Vec<f64> = scan.estimates.iter().flat_map(|e| [e.value, e.ci_low, e.ci_high]).collect();
    out.push(scan.pseudo_critical.unwrap_or(f64::NAN));
    Ok(out)
}

/// Oriented-percolation survival to `depth` at `p = 0, 1/steps, ..., 1`.
/// Returns `[value, ci_low, ci_high, exact]` quadruples; `exact` is NaN
/// when the depth is too large to enumerate.
#[wasm_bindgen]
pub fn op_curve(depth: u32, steps: u32, replicates: u32, seed: u64) -> Result<Vec<f64>, JsError> {
    let grid: Vec<f64> = (0..=steps.max(1)).map(|i| i as f64 / steps.max(1) as f64).collect();
    let curve = op_survival_curve(&grid, depth, replicates as u64, seed).map_err(js)?;
    let mut out = Vec::with_capacity(4 * grid.len());
    for (p, e) in grid.iter().zip(&curve) {
        let exact = if depth <= MAX_EXACT_DEPTH { op_survival_exact(*p, depth).map_err(js)? } else { f64::NAN };
        out.extend([e.value, e.ci_low, e.ci_high, exact]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raster_starts_from_the_origin() {
        let cells = space_time(1.0, 1.0, 0.5, 0.5, 5, 4.0, 10, 3).unwrap_or_else(|_| panic!());
        assert_eq!(cells.len(), 10 * 11);
        let infected: Vec<usize> = (0..11).filter(|&i| cells[i] & 2 != 0).collect();
        assert_eq!(infected, vec![5]);
        assert!(cells.iter().all(|&c| c < 4));
    }

    #[test]
    fn scan_layout() {
        let out = p_scan(2.0, 3.0, 0.3, 6, 6.0, 4, 50, 0.5, 1).unwrap_or_else(|_| panic!());
        assert_eq!(out.len(), 3 * 5 + 1);
    }

    #[test]
    fn op_curve_has_exact_column() {
        let out = op_curve(3, 4, 200, 2).unwrap_or_else(|_| panic!());
        assert_eq!(out.len(), 4 * 5);
        assert_eq!(out[3], 0.0);
        assert_eq!(out[19], 1.0);
    }
}
