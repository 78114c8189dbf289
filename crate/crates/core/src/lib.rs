//! Inter-numerology crosstalk between co-channel LAA and Wi-Fi OFDM links.
//!
//! The pipeline resolves the relative timing of the two frames into sampling
//! segments, assembles the sampling matrix `K` that maps aggressor symbols to
//! victim time samples, folds in a multipath channel and the victim DFT, and
//! averages the resulting subcarrier coupling power over random draws.

pub mod basis;
pub mod channel;
pub mod error;
pub mod export;
pub mod matrices;
pub mod montecarlo;
pub mod oracle;
pub mod params;
pub mod timing;
pub mod verify;

pub use basis::SymbolVector;
pub use channel::{EffectiveChannel, MultipathChannel};
pub use error::{Error, Result};
pub use matrices::{SamplingMatrix, StackedSymbolVector};
pub use montecarlo::{run_campaign, Aggregation, CampaignConfig, Direction, InterferenceMap};
pub use params::OfdmNumerology;
pub use timing::{resolve_ap_layout, resolve_ue_layout, ApCase, ApLayout, Grid, Segment, UeLayout};

pub use nalgebra::DMatrix;
pub use num_complex::Complex64;

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
