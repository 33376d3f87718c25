//! Finite-SNR Monte Carlo checks of DoF predictions.
//!
//! Channels are drawn as estimate plus independent error with per-entry
//! variance `P^-a`, so a precoder zero-forced on the estimate leaks
//! `E|h^H p|^2 = P^-a`. Plans from `misodof_core` are executed with ZF
//! precoders and successive decoding, and the mean rates are regressed on
//! `log2 P`.

pub mod channel;
pub mod sim;
pub mod slope;

pub use channel::{draw_channels, draw_channels_with, zf_direction, CVec, ChannelDraw};
pub use sim::{simulate_rates, MessageId, SimResult, MIN_TRIALS};
pub use slope::{estimate_slope, fit_slope, leakage_slope, measure_leakage, write_sim_csv, Slope, SlopeReport};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("PlanTopologyMismatch: {0}")]
    PlanTopologyMismatch(String),
    #[error("DegenerateNullSpace: {0}")]
    DegenerateNullSpace(String),
    #[error("InsufficientPoints: need at least 3 sweep points, got {0}")]
    InsufficientPoints(usize),
    #[error("TooFewTrials: need at least {min}, got {got}")]
    TooFewTrials { got: usize, min: usize },
    #[error("InvalidSnr: {0} (need P > 1, i.e. a positive dB value)")]
    InvalidSnr(f64),
    #[error("NoSuchLink: ({}, {}) carries no quality", .rx + 1, .tx + 1)]
    NoSuchLink { rx: usize, tx: usize },
}
