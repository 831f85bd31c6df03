//! System-level Monte Carlo simulator for integrated terrestrial (TN) and
//! LEO satellite (NTN) access networks under partial terrestrial failure.
//!
//! A run is a static snapshot: a perturbed hexagonal gNB layout and a user
//! population are drawn, gNBs fail independently, users attached to failed
//! sites are forced onto the satellite overlay, weak or overloaded survivors
//! are proactively offloaded, and throughput / PRR / latency are aggregated
//! over all users. The [`harness`] replicates snapshots with deterministic
//! per-run random streams and sweeps one parameter at a time.
//!
//! Module map:
//!
//! - [`scenario`]: geometry (gNB layout, uniform or panic-aware users)
//! - [`channel`]: path loss, noise, SINR and satellite slant geometry
//! - [`tn`]: load-aware terrestrial association, rate and latency
//! - [`ntn`]: constellation placement, max-RX association, feeder cap
//! - [`fallback`]: the disaster snapshot pipeline and KPI aggregation
//! - [`harness`]: Monte Carlo replication, sweeps and built-in presets
//! - [`config`], [`output`], [`cli`]: configuration documents, CSV/JSON
//!   emission and the thin `sim` command-line front end

pub mod channel;
pub mod cli;
pub mod config;
pub mod error;
pub mod fallback;
pub mod harness;
pub mod ntn;
pub mod output;
pub mod scenario;
pub mod streams;
pub mod tn;

pub use error::{Result, SimError};
pub use fallback::{SnapshotKpis, SnapshotOutcome};
pub use harness::{run_point, run_sweep, Preset, SweepParameter, SweepResult, SweepSpec};
pub use scenario::{Mode, Scenario};
