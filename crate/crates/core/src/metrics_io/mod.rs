//! Coverage metrics, result export and plotting.

mod export;
mod plot;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::SimulationConfig;
use crate::engine::DropResult;
use crate::scalar::Real;

pub use export::{export, read_drops_csv, write_drops_csv, ExportError, ExportFormat, Report};
pub use plot::{emit_plot, render_svg, PlotError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("cell load must be at least 1")]
    ZeroLoad,
    #[error("coverage needs at least one sample")]
    EmptySamples,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Thresholds in dB.
    SinrDb,
    /// Thresholds in bit/s.
    RateBps,
}

impl Metric {
    pub fn file_tag(self) -> &'static str {
        match self {
            Metric::SinrDb => "sinr",
            Metric::RateBps => "rate",
        }
    }
}

/// Empirical complementary CDF over a threshold grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct CoverageCurve<T: Real> {
    /// Legend label, `scenario/model`.
    pub label: String,
    pub metric: Metric,
    pub thresholds: Vec<T>,
    pub coverage: Vec<T>,
    pub sample_count: usize,
}

impl<T: Real> CoverageCurve<T> {
    /// Coverage at an exact grid threshold.
    pub fn at(&self, threshold: T) -> Option<T> {
        self.thresholds
            .iter()
            .position(|t| *t == threshold)
            .map(|i| self.coverage[i])
    }
}

/// Shannon rate shared equally among `load` users with a half-duplex factor.
pub fn rate_of<T: Real>(sinr: T, bandwidth_hz: T, load: usize, half_duplex_factor: T) -> Result<T, MetricsError> {
    if load == 0 {
        return Err(MetricsError::ZeroLoad);
    }
    if !(sinr > T::zero()) {
        return Ok(T::zero());
    }
    Ok(half_duplex_factor * bandwidth_hz / T::lit(load as f64) * sinr.ln_1p() / T::LN_2())
}

/// Fraction of `samples` strictly above each threshold. Negative-infinity
/// samples (outage) are never covered.
pub fn coverage<T: Real>(
    samples: &[T],
    thresholds: &[T],
    metric: Metric,
    label: impl Into<String>,
) -> Result<CoverageCurve<T>, MetricsError> {
    if samples.is_empty() {
        return Err(MetricsError::EmptySamples);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("samples are not NaN"));
    let n = T::lit(sorted.len() as f64);
    let coverage = thresholds
        .iter()
        .map(|t| {
            let at_or_below = sorted.partition_point(|s| s <= t);
            T::lit((sorted.len() - at_or_below) as f64) / n
        })
        .collect();
    Ok(CoverageCurve {
        label: label.into(),
        metric,
        thresholds: thresholds.to_vec(),
        coverage,
        sample_count: samples.len(),
    })
}

/// `min, min+step, …` up to and including `max` (within rounding).
pub fn linear_grid<T: Real>(min: T, max: T, step: T) -> Vec<T> {
    let count = ((max - min) / step + T::lit(1e-9)).floor().to_usize().unwrap_or(0) + 1;
    (0..count).map(|i| min + step * T::lit(i as f64)).collect()
}

/// `count` log-spaced points from `min` to `max` inclusive.
pub fn log_grid<T: Real>(min: T, max: T, count: usize) -> Vec<T> {
    if count == 1 {
        return vec![min];
    }
    let (lo, hi) = (min.log10(), max.log10());
    let step = (hi - lo) / T::lit((count - 1) as f64);
    (0..count)
        .map(|i| T::lit(10.0).powf(lo + step * T::lit(i as f64)))
        .collect()
}

/// −20 to 60 dB in 1 dB steps.
pub fn default_sinr_grid<T: Real>() -> Vec<T> {
    linear_grid(T::lit(-20.0), T::lit(60.0), T::one())
}

/// 50 log-spaced points from 10⁵ to 10¹⁰ bit/s.
pub fn default_rate_grid<T: Real>() -> Vec<T> {
    log_grid(T::lit(1e5), T::lit(1e10), 50)
}

pub fn curve_label<T: Real>(config: &SimulationConfig<T>) -> String {
    format!("{}/{}", config.scenario, config.channel_model)
}

/// SINR and rate coverage of a campaign.
pub fn campaign_curves<T: Real>(
    config: &SimulationConfig<T>,
    results: &[DropResult<T>],
    sinr_grid: &[T],
    rate_grid: &[T],
) -> Result<[CoverageCurve<T>; 2], MetricsError> {
    let label = curve_label(config);
    let sinr: Vec<T> = results.iter().map(|r| r.sinr_db).collect();
    let rate: Vec<T> = results.iter().map(|r| r.rate_bps).collect();
    Ok([
        coverage(&sinr, sinr_grid, Metric::SinrDb, label.clone())?,
        coverage(&rate, rate_grid, Metric::RateBps, label)?,
    ])
}
