//! Simulation parameters, scenario/model selectors, validation and the
//! flat `key = value` configuration file format.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

/// Environment variable that overrides `seed` after a file is loaded.
pub const SEED_ENV_VAR: &str = "MMSHARE_SEED";

/// Resource-sharing configuration between the operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scenario {
    /// Orthogonal bands, separate infrastructure, closed access.
    NoSharing,
    /// Pooled spectrum and open access across both networks.
    SpectrumAccess,
    /// Pooled spectrum, separate infrastructure, closed access.
    Spectrum,
    /// Pooled spectrum on co-located sites, closed access.
    SpectrumInfra,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::NoSharing,
        Scenario::SpectrumAccess,
        Scenario::Spectrum,
        Scenario::SpectrumInfra,
    ];

    /// Short CLI tag (`s1`..`s4`).
    pub fn tag(self) -> &'static str {
        match self {
            Scenario::NoSharing => "s1",
            Scenario::SpectrumAccess => "s2",
            Scenario::Spectrum => "s3",
            Scenario::SpectrumInfra => "s4",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scenario::NoSharing => "NoSharing",
            Scenario::SpectrumAccess => "SpectrumAccess",
            Scenario::Spectrum => "Spectrum",
            Scenario::SpectrumInfra => "SpectrumInfra",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace(['_', '-', ' '], "");
        match norm.as_str() {
            "s1" | "1" | "nosharing" => Ok(Scenario::NoSharing),
            "s2" | "2" | "spectrumaccess" => Ok(Scenario::SpectrumAccess),
            "s3" | "3" | "spectrum" => Ok(Scenario::Spectrum),
            "s4" | "4" | "spectruminfra" | "spectruminfrastructure" => {
                Ok(Scenario::SpectrumInfra)
            }
            _ => Err(format!("unknown scenario `{s}`")),
        }
    }
}

/// Channel and antenna model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChannelModel {
    /// Simplified power-law pathloss with a rect-shaped beam pattern.
    Model1,
    /// Measurement-based three-state pathloss with cluster MIMO channel.
    Model2,
    /// Model 2 with the array back lobe suppressed.
    Model3,
    /// Model 1 pathloss with the Model 2 MIMO characterization.
    Model4,
}

impl ChannelModel {
    pub const ALL: [ChannelModel; 4] = [
        ChannelModel::Model1,
        ChannelModel::Model2,
        ChannelModel::Model3,
        ChannelModel::Model4,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ChannelModel::Model1 => "m1",
            ChannelModel::Model2 => "m2",
            ChannelModel::Model3 => "m3",
            ChannelModel::Model4 => "m4",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ChannelModel::Model1 => "Model1",
            ChannelModel::Model2 => "Model2",
            ChannelModel::Model3 => "Model3",
            ChannelModel::Model4 => "Model4",
        }
    }

    /// Models 1 and 4 use the simplified large-scale law (no outage, no shadowing).
    pub fn simplified_pathloss(self) -> bool {
        matches!(self, ChannelModel::Model1 | ChannelModel::Model4)
    }

    /// Models 2, 3 and 4 evaluate the cluster channel with steered arrays.
    pub fn uses_mimo_channel(self) -> bool {
        !matches!(self, ChannelModel::Model1)
    }

    pub fn suppresses_back_lobe(self) -> bool {
        matches!(self, ChannelModel::Model3)
    }
}

impl fmt::Display for ChannelModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChannelModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace(['_', '-', ' '], "");
        match norm.as_str() {
            "m1" | "1" | "model1" => Ok(ChannelModel::Model1),
            "m2" | "2" | "model2" => Ok(ChannelModel::Model2),
            "m3" | "3" | "model3" => Ok(ChannelModel::Model3),
            "m4" | "4" | "model4" => Ok(ChannelModel::Model4),
            _ => Err(format!("unknown channel model `{s}`")),
        }
    }
}

/// Planar array layout: `horizontal × vertical` elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrayDims {
    pub horizontal: usize,
    pub vertical: usize,
}

impl ArrayDims {
    pub const fn new(horizontal: usize, vertical: usize) -> Self {
        Self {
            horizontal,
            vertical,
        }
    }

    pub fn elements(&self) -> usize {
        self.horizontal * self.vertical
    }
}

impl fmt::Display for ArrayDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.horizontal, self.vertical)
    }
}

impl FromStr for ArrayDims {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (h, v) = s
            .split_once(['x', 'X', '*'])
            .ok_or_else(|| format!("expected `HxV`, got `{s}`"))?;
        let h = h.trim().parse().map_err(|e| format!("bad dimension `{h}`: {e}"))?;
        let v = v.trim().parse().map_err(|e| format!("bad dimension `{v}`: {e}"))?;
        Ok(Self::new(h, v))
    }
}

/// Log-distance pathloss `alpha + 10·beta·log10(d)` with Gaussian shadowing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PathlossParams<T: Real> {
    pub alpha_db: T,
    pub beta: T,
    pub sigma_db: T,
}

/// Two-level beam pattern used by Model 1 (aggregate TX+RX values).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RectPattern<T: Real> {
    pub half_beamwidth_deg: T,
    pub g_max_db: T,
    pub g_min_db: T,
}

impl<T: Real> RectPattern<T> {
    /// Probability that one side's main lobe covers a uniformly random direction.
    pub fn alignment_probability(&self) -> T {
        T::lit(2.0) * self.half_beamwidth_deg / T::lit(360.0)
    }
}

/// Power-law pathloss used by Models 1 and 4: `ref_loss + 10·n·log10(d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SimplifiedPathloss<T: Real> {
    pub ref_loss_db: T,
    pub exponent_los: T,
    pub exponent_nlos: T,
}

/// Angular spreads of the cluster model, in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct AngleSpread<T: Real> {
    /// Cluster centre elevations are uniform in `±elevation_max_deg`.
    pub elevation_max_deg: T,
    /// Subpath azimuth offsets are uniform in `±subpath_azimuth_deg`.
    pub subpath_azimuth_deg: T,
    /// Subpath elevation offsets are uniform in `±subpath_elevation_deg`.
    pub subpath_elevation_deg: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ModelParams<T: Real> {
    pub a_out: T,
    pub b_out: T,
    pub a_los: T,
    pub los: PathlossParams<T>,
    pub nlos: PathlossParams<T>,
    /// Poisson mean of the cluster count.
    pub cluster_mean: T,
    pub r_tau: T,
    pub zeta_db: T,
    pub rect: RectPattern<T>,
    pub simplified: SimplifiedPathloss<T>,
    pub angles: AngleSpread<T>,
    /// Panels per node; each panel covers `360/sectors` degrees of azimuth.
    pub sectors: usize,
}

impl<T: Real> Default for ModelParams<T> {
    fn default() -> Self {
        Self {
            a_out: T::lit(0.0334),
            b_out: T::lit(5.2),
            a_los: T::lit(0.0149),
            los: PathlossParams {
                alpha_db: T::lit(61.4),
                beta: T::lit(2.0),
                sigma_db: T::lit(5.8),
            },
            nlos: PathlossParams {
                alpha_db: T::lit(72.0),
                beta: T::lit(2.92),
                sigma_db: T::lit(8.7),
            },
            cluster_mean: T::lit(1.8),
            r_tau: T::lit(2.8),
            zeta_db: T::lit(4.0),
            rect: RectPattern {
                half_beamwidth_deg: T::lit(28.0),
                g_max_db: T::lit(26.0),
                g_min_db: T::lit(-4.0),
            },
            simplified: SimplifiedPathloss {
                ref_loss_db: T::lit(61.4),
                exponent_los: T::lit(2.0),
                exponent_nlos: T::lit(4.0),
            },
            angles: AngleSpread {
                elevation_max_deg: T::lit(30.0),
                subpath_azimuth_deg: T::lit(10.0),
                subpath_elevation_deg: T::lit(5.0),
            },
            sectors: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SimulationConfig<T: Real> {
    pub num_operators: usize,
    /// UEs per km², per operator.
    pub ue_density: T,
    /// BSs per km², per operator.
    pub bs_density: T,
    pub area_km2: T,
    pub tx_power_dbm: T,
    pub carrier_freq_hz: T,
    pub total_bandwidth_hz: T,
    pub noise_figure_db: T,
    pub tx_elements: usize,
    pub tx_array: ArrayDims,
    pub rx_elements: usize,
    pub rx_array: ArrayDims,
    pub half_duplex_factor: T,
    pub num_drops: usize,
    pub scenario: Scenario,
    pub channel_model: ChannelModel,
    pub rng_seed: u64,
    pub model_params: ModelParams<T>,
}

impl<T: Real> Default for SimulationConfig<T> {
    fn default() -> Self {
        Self {
            num_operators: 2,
            ue_density: T::lit(200.0),
            bs_density: T::lit(30.0),
            area_km2: T::lit(1.0),
            tx_power_dbm: T::lit(30.0),
            carrier_freq_hz: T::lit(28e9),
            total_bandwidth_hz: T::lit(1e9),
            noise_figure_db: T::lit(7.0),
            tx_elements: 64,
            tx_array: ArrayDims::new(8, 8),
            rx_elements: 16,
            rx_array: ArrayDims::new(4, 4),
            half_duplex_factor: T::lit(0.5),
            num_drops: 10_000,
            scenario: Scenario::NoSharing,
            channel_model: ChannelModel::Model3,
            rng_seed: 1,
            model_params: ModelParams::default(),
        }
    }
}

/// One violated invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config file not found: {}", .0.display())]
    NotFound(PathBuf),
    #[error("cannot read config {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid configuration: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

/// Lists every violated invariant; empty means valid.
pub fn validate<T: Real>(config: &SimulationConfig<T>) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut check = |ok: bool, field: &'static str, message: &str| {
        if !ok {
            out.push(Violation {
                field,
                message: message.to_string(),
            });
        }
    };
    let zero = T::zero();
    let p = &config.model_params;

    check(
        config.num_operators == 2,
        "num_operators",
        "the sharing scenarios are defined for exactly 2 operators",
    );
    check(config.ue_density > zero, "ue_density", "must be > 0");
    check(config.bs_density > zero, "bs_density", "must be > 0");
    check(config.area_km2 > zero, "area_km2", "must be > 0");
    check(config.tx_power_dbm.is_finite(), "tx_power_dbm", "must be finite");
    check(config.carrier_freq_hz > zero, "carrier_freq_hz", "must be > 0");
    check(
        config.total_bandwidth_hz > zero,
        "total_bandwidth_hz",
        "must be > 0",
    );
    check(
        config.noise_figure_db.is_finite(),
        "noise_figure_db",
        "must be finite",
    );
    check(
        config.tx_array.elements() == config.tx_elements && config.tx_elements > 0,
        "tx_array",
        "array dims product ≠ element count",
    );
    check(
        config.rx_array.elements() == config.rx_elements && config.rx_elements > 0,
        "rx_array",
        "array dims product ≠ element count",
    );
    check(config.num_drops > 0, "num_drops", "must be ≥ 1");
    check(
        config.half_duplex_factor > zero && config.half_duplex_factor <= T::one(),
        "half_duplex_factor",
        "must lie in (0, 1]",
    );

    check(p.a_out >= zero, "a_out", "must be ≥ 0");
    check(p.a_los >= zero, "a_los", "must be ≥ 0");
    check(p.b_out.is_finite(), "b_out", "must be finite");
    check(p.los.sigma_db >= zero, "los_sigma_db", "must be ≥ 0");
    check(p.nlos.sigma_db >= zero, "nlos_sigma_db", "must be ≥ 0");
    check(p.cluster_mean > zero, "lambda_k", "must be > 0");
    check(p.r_tau.is_finite(), "r_tau", "must be finite");
    check(p.zeta_db >= zero, "zeta_db", "must be ≥ 0");
    check(
        p.rect.half_beamwidth_deg > zero && p.rect.half_beamwidth_deg < T::lit(90.0),
        "theta_b_deg",
        "must lie in (0, 90) degrees",
    );
    check(
        p.rect.g_max_db > p.rect.g_min_db,
        "g_max_db",
        "must exceed g_min_db",
    );
    check(
        p.angles.elevation_max_deg >= zero
            && p.angles.subpath_azimuth_deg >= zero
            && p.angles.subpath_elevation_deg >= zero,
        "angle_spread",
        "angular spreads must be ≥ 0",
    );
    check(p.sectors >= 1, "sectors", "must be ≥ 1");
    out
}

impl<T: Real> SimulationConfig<T> {
    pub fn validate(&self) -> Vec<Violation> {
        validate(self)
    }

    /// Bandwidth of one operator's exclusive licence.
    pub fn per_operator_bandwidth_hz(&self) -> T {
        self.total_bandwidth_hz / T::lit(self.num_operators as f64)
    }

    /// `(key, value)` pairs in file order; the inverse of [`SimulationConfig::set`].
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let p = &self.model_params;
        vec![
            ("m", self.num_operators.to_string()),
            ("lambda_ue", self.ue_density.to_string()),
            ("lambda_bs", self.bs_density.to_string()),
            ("area_km2", self.area_km2.to_string()),
            ("p_tx_dbm", self.tx_power_dbm.to_string()),
            ("f_hz", self.carrier_freq_hz.to_string()),
            ("bw_hz", self.total_bandwidth_hz.to_string()),
            ("nf_db", self.noise_figure_db.to_string()),
            ("n_tx", self.tx_elements.to_string()),
            ("tx_dims", self.tx_array.to_string()),
            ("n_rx", self.rx_elements.to_string()),
            ("rx_dims", self.rx_array.to_string()),
            ("half_duplex", self.half_duplex_factor.to_string()),
            ("drops", self.num_drops.to_string()),
            ("scenario", self.scenario.to_string()),
            ("model", self.channel_model.to_string()),
            ("seed", self.rng_seed.to_string()),
            ("a_out", p.a_out.to_string()),
            ("b_out", p.b_out.to_string()),
            ("a_los", p.a_los.to_string()),
            ("los_alpha_db", p.los.alpha_db.to_string()),
            ("los_beta", p.los.beta.to_string()),
            ("los_sigma_db", p.los.sigma_db.to_string()),
            ("nlos_alpha_db", p.nlos.alpha_db.to_string()),
            ("nlos_beta", p.nlos.beta.to_string()),
            ("nlos_sigma_db", p.nlos.sigma_db.to_string()),
            ("lambda_k", p.cluster_mean.to_string()),
            ("r_tau", p.r_tau.to_string()),
            ("zeta_db", p.zeta_db.to_string()),
            ("theta_b_deg", p.rect.half_beamwidth_deg.to_string()),
            ("g_max_db", p.rect.g_max_db.to_string()),
            ("g_min_db", p.rect.g_min_db.to_string()),
            ("m1_ref_loss_db", p.simplified.ref_loss_db.to_string()),
            ("m1_n_los", p.simplified.exponent_los.to_string()),
            ("m1_n_nlos", p.simplified.exponent_nlos.to_string()),
            ("elevation_max_deg", p.angles.elevation_max_deg.to_string()),
            ("subpath_azimuth_deg", p.angles.subpath_azimuth_deg.to_string()),
            (
                "subpath_elevation_deg",
                p.angles.subpath_elevation_deg.to_string(),
            ),
            ("sectors", p.sectors.to_string()),
        ]
    }

    /// Assigns one key. Unknown keys are errors.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<V: FromStr>(v: &str) -> Result<V, String>
        where
            V::Err: fmt::Display,
        {
            v.parse::<V>().map_err(|e| format!("bad value `{v}`: {e}"))
        }
        let p = &mut self.model_params;
        match key {
            "m" => self.num_operators = num(value)?,
            "lambda_ue" => self.ue_density = num(value)?,
            "lambda_bs" => self.bs_density = num(value)?,
            "area_km2" => self.area_km2 = num(value)?,
            "p_tx_dbm" => self.tx_power_dbm = num(value)?,
            "f_hz" => self.carrier_freq_hz = num(value)?,
            "bw_hz" => self.total_bandwidth_hz = num(value)?,
            "nf_db" => self.noise_figure_db = num(value)?,
            "n_tx" => self.tx_elements = num(value)?,
            "tx_dims" => self.tx_array = value.parse()?,
            "n_rx" => self.rx_elements = num(value)?,
            "rx_dims" => self.rx_array = value.parse()?,
            "half_duplex" => self.half_duplex_factor = num(value)?,
            "drops" => self.num_drops = num(value)?,
            "scenario" => self.scenario = value.parse()?,
            "model" => self.channel_model = value.parse()?,
            "seed" => self.rng_seed = num(value)?,
            "a_out" => p.a_out = num(value)?,
            "b_out" => p.b_out = num(value)?,
            "a_los" => p.a_los = num(value)?,
            "los_alpha_db" => p.los.alpha_db = num(value)?,
            "los_beta" => p.los.beta = num(value)?,
            "los_sigma_db" => p.los.sigma_db = num(value)?,
            "nlos_alpha_db" => p.nlos.alpha_db = num(value)?,
            "nlos_beta" => p.nlos.beta = num(value)?,
            "nlos_sigma_db" => p.nlos.sigma_db = num(value)?,
            "lambda_k" => p.cluster_mean = num(value)?,
            "r_tau" => p.r_tau = num(value)?,
            "zeta_db" => p.zeta_db = num(value)?,
            "theta_b_deg" => p.rect.half_beamwidth_deg = num(value)?,
            "g_max_db" => p.rect.g_max_db = num(value)?,
            "g_min_db" => p.rect.g_min_db = num(value)?,
            "m1_ref_loss_db" => p.simplified.ref_loss_db = num(value)?,
            "m1_n_los" => p.simplified.exponent_los = num(value)?,
            "m1_n_nlos" => p.simplified.exponent_nlos = num(value)?,
            "elevation_max_deg" => p.angles.elevation_max_deg = num(value)?,
            "subpath_azimuth_deg" => p.angles.subpath_azimuth_deg = num(value)?,
            "subpath_elevation_deg" => p.angles.subpath_elevation_deg = num(value)?,
            "sectors" => p.sectors = num(value)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Renders the config in the file format accepted by [`parse_config`].
    pub fn to_config_string(&self) -> String {
        let mut s = String::from("# mmshare simulation config\n");
        for (k, v) in self.entries() {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        }
        s
    }

    /// Replaces the seed with the value of `MMSHARE_SEED`, if given.
    pub fn with_seed_override(mut self, raw: Option<&str>) -> Result<Self, ConfigError> {
        if let Some(raw) = raw {
            self.rng_seed = raw.trim().parse().map_err(|e| ConfigError::Parse {
                line: 0,
                message: format!("{SEED_ENV_VAR}=`{raw}`: {e}"),
            })?;
        }
        Ok(self)
    }
}

/// Parses config text. Missing keys keep their defaults; the result is validated.
pub fn parse_config<T: Real>(text: &str) -> Result<SimulationConfig<T>, ConfigError> {
    let mut config = SimulationConfig::<T>::default();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Parse {
            line: line_no,
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        config
            .set(key.trim(), value.trim())
            .map_err(|message| ConfigError::Parse {
                line: line_no,
                message,
            })?;
    }
    let violations = validate(&config);
    if violations.is_empty() {
        Ok(config)
    } else {
        Err(ConfigError::Invalid(violations))
    }
}

/// Reads and validates a config file, then applies `MMSHARE_SEED`.
pub fn load_config<T: Real>(path: impl AsRef<Path>) -> Result<SimulationConfig<T>, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            ConfigError::NotFound(path.to_path_buf())
        } else {
            ConfigError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })?;
    parse_config(&text)?.with_seed_override(std::env::var(SEED_ENV_VAR).ok().as_deref())
}

pub fn save_config<T: Real>(
    config: &SimulationConfig<T>,
    path: impl AsRef<Path>,
) -> std::io::Result<()> {
    std::fs::write(path, config.to_config_string())
}
