//! Block construction and the comparison with oriented percolation.
//!
//! A block starts from a seeded cube near its anchor and succeeds when a
//! fully infected target cube appears near the top of its staircase region.
//! Successful blocks chain into a field indexed by `(i, m)` whose open cells
//! behave like a one-dependent percolation configuration.

mod block;
mod field;
mod geometry;
mod percolation;
mod report;

pub use block::{block_event, block_window, estimate_block_event, estimate_brush, BlockWitness};
pub use field::{anchor, build_renorm_field, FieldCell, RenormField};
pub use geometry::{BlockGeometry, Slab};
pub use percolation::{op_survival, op_survival_curve, op_survival_exact, MAX_EXACT_DEPTH};
pub use report::{domination_report, lag_correlations, lss_density_threshold, DominationReport, LagCorrelation};
