//! Simulation and estimation toolkit for distributed quantum phase estimation
//! with GHZ-type photonic probes.
//!
//! The crate is organised bottom-up:
//!
//! * [`qstate`] holds the two state engines: an analytic product of GHZ
//!   blocks (with a per-block coherence factor) and a dense state vector used
//!   as a brute-force oracle for pure states.
//! * [`probes`] builds the named probe states from a [`probes::ModeLayout`].
//! * [`evolution`] applies the distributed phase encoding.
//! * [`measurement`] produces exact σx-basis outcome statistics and seeded
//!   multinomial shot samples.
//! * [`acquisition`] simulates pulsed pair sources with loss and
//!   post-selection on full coincidences.
//! * [`estimation`] contains Fisher matrices, Cramér–Rao bounds, fringe
//!   fitting and maximum-likelihood estimation.
//! * [`harness`] runs TOML-described scenarios and writes CSV/JSON/SVG.
//! * [`goldens`] verifies preset outputs against recorded digests.
//!
//! Basis convention: photon 1 is the most significant bit of an index,
//! `H = 0`, `V = 1`. In the σx basis bit `0` is the `+1` eigenvalue.

pub mod acquisition;
pub mod error;
pub mod estimation;
pub mod evolution;
pub mod goldens;
pub mod harness;
pub mod measurement;
pub mod probes;
pub mod qstate;
pub mod registry;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
