//! Monte Carlo engine: calibration, replicate execution over sweep grids,
//! summary statistics and CSV output.

mod experiment;
mod link;
mod report;
mod stats;

pub use experiment::{
    experiment_symbol_energy, run_experiment, CellResult, ExperimentSpec, GridPoint, PointResult, Scheme, SimResult,
};
pub use link::{calibrate_es, link_components, mmse_sinr, single_user_reference, snr_of, LinkComponents};
pub use report::{mean_over_users, samples_csv, to_csv, CSV_HEADER};
pub use stats::{cdf_summary, quantile_sorted, Quantiles, Summary, QUANTILE_LEVELS};

use crate::analysis::AnalysisError;
use crate::channel::ChannelError;
use crate::numerics::NumericsError;
use crate::phase_design::PhaseError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("{what}: expected {expected}, got {got}")]
    DimensionMismatch { what: &'static str, expected: usize, got: usize },
    #[error("reference single-user channel has zero mean SNR")]
    ZeroChannel,
    #[error("no samples")]
    Empty,
    #[error("sample {0} is not a number")]
    InvalidSample(f64),
    #[error("unknown scheme {0:?} (expected sd, esd, random, opt or random_mmse)")]
    UnknownScheme(String),
    #[error("invalid experiment: {}", .0.join("; "))]
    InvalidSpec(Vec<String>),
    #[error("worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Phase(#[from] PhaseError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}
