//! Exact event-driven Monte Carlo for the contact process in a randomly
//! evolving environment (CPREE) on finite boxes of `Z^d`.
//!
//! Every run is a deterministic function of a [`EventLog`]: the realized
//! Poisson clocks of the graphical representation on a space-time window.
//! Because the log does not depend on the state, any number of processes
//! (different initial configurations, truncations, values of `p`) can be
//! driven by the same log, which gives the monotone couplings used by the
//! estimators and the exact pathwise checks in the test suites.
//!
//! Module map:
//!
//! * [`lattice`] and [`events`]: parameters, boxes and the event log.
//! * [`background`]: the per-site two-state environment and the agreement
//!   field of the all-zero/all-one coupling.
//! * [`dynamics`]: the forward sweep (full, truncated, Richardson),
//!   trajectories and side-of-box statistics.
//! * [`oracle`]: exact uniformization of the finite-state chain on tiny
//!   lattices.
//! * [`estimators`]: replicated Monte Carlo estimates with Wilson intervals.
//! * [`renormalization`]: block geometry, block events, the one-dependent
//!   field and oriented percolation.

pub mod background;
pub mod dynamics;
mod error;
pub mod estimators;
pub mod events;
pub mod lattice;
pub mod oracle;
pub mod renormalization;
pub mod replicate;
pub mod rng;
pub mod stats;

pub use background::{Configuration, InitLaw};
pub use dynamics::{Mode, Trajectory};
pub use error::{Error, Result};
pub use events::{Direction, Event, EventKind, EventLog};
pub use lattice::{Boundary, Lattice, LatticeBox, Params, Site};
pub use stats::Estimate;
