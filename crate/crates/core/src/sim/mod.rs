//! Monte Carlo harness: the end-to-end link, BER sweeps, delay-estimation
//! sweeps and constellation captures.
//!
//! Every random draw comes from a stream identified by
//! `(master seed, sweep point, frame)`, so results do not depend on thread
//! count or scheduling.

mod capture;
pub mod config;
mod link;
mod seed;
mod sweep;
mod tde_sweep;

pub use capture::{constellation_capture, ScatterRecord};
pub use config::ExperimentConfig;
pub use link::{run_link_trial, ChannelModel, Coding, FrameDiagnostics, LinkConfig, TrialOutcome};
pub use seed::TrialSeed;
pub use sweep::{ber_point, ber_sweep, ber_sweep_with, ber_upper_bound, BerPoint, StopRule};
pub use tde_sweep::{tde_sweep, tde_trial, TdeExperiment, TdeSummary, TdeSweep, TdeTrial};
