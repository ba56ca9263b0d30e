//! System configuration, array geometry and the stochastic channel model.

mod config;
mod geometry;
mod model;

pub use config::{equal_split, Angles, ConfigViolation, Layout, LinkBudget, SystemConfig};
pub use geometry::{
    grid_positions, layout_for, make_layout, path_loss, sinc, sinc_correlation, steering_vectors, upa_steering,
    ElementLayout,
};
pub use model::{
    ChannelModel, ChannelModelParams, ChannelRealization, UserGains, UserRealization, CORRELATION_CLIP_TOL,
};

use crate::numerics::NumericsError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChannelError {
    #[error("distance must be positive, got {0}")]
    NonpositiveDistance(f64),
    #[error("elements {0} and {1} share a position")]
    DuplicatePositions(usize, usize),
    #[error("subsurface sizes {sizes:?} do not partition {elements} elements")]
    SizeMismatch { sizes: Vec<usize>, elements: usize },
    #[error("unknown layout {0:?} (expected \"grouped\" or \"interleaved\")")]
    UnknownLayout(String),
    #[error("invalid rician factor {0}")]
    InvalidRicianFactor(f64),
    #[error("invalid configuration: {}", join(.0))]
    InvalidConfig(Vec<ConfigViolation>),
    #[error("invalid channel parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

fn join(v: &[ConfigViolation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}
