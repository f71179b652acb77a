//! Monte Carlo simulation of two mmWave operators sharing spectrum and/or
//! infrastructure.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar for the common cases.

pub mod config;
pub mod engine;
pub mod geometry;
pub mod metrics_io;
pub mod mimo;
pub mod propagation;
pub mod scalar;

pub use config::{
    load_config, parse_config, save_config, validate, ArrayDims, ChannelModel, ConfigError, Scenario, Violation,
};
pub use engine::{run_campaign, run_campaign_with, run_drop, Execution};
pub use metrics_io::{campaign_curves, coverage, default_rate_grid, default_sinr_grid, export, ExportFormat, Metric};
pub use propagation::LinkState;
pub use scalar::Real;

pub type Config = config::SimulationConfig<f64>;
pub type ConfigF32 = config::SimulationConfig<f32>;
pub type ModelParams = config::ModelParams<f64>;
pub type DropResult = engine::DropResult<f64>;
pub type DropResultF32 = engine::DropResult<f32>;
pub type CoverageCurve = metrics_io::CoverageCurve<f64>;
pub type CoverageCurveF32 = metrics_io::CoverageCurve<f32>;
pub type Deployment = geometry::Deployment<f64>;
pub type ClusterSet = mimo::ClusterSet<f64>;
pub type Report = metrics_io::Report<f64>;
