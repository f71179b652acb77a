//! Large-scale propagation: three-state link classification, pathloss,
//! shadowing and thermal noise.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ChannelModel, ModelParams};
use crate::scalar::Real;

/// Thermal noise power spectral density at room temperature.
pub const THERMAL_NOISE_DBM_PER_HZ: f64 = -174.0;

/// Links shorter than this are evaluated at this distance.
pub const MIN_DISTANCE_M: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LinkState {
    LoS,
    NLoS,
    Outage,
}

impl LinkState {
    pub fn name(self) -> &'static str {
        match self {
            LinkState::LoS => "los",
            LinkState::NLoS => "nlos",
            LinkState::Outage => "outage",
        }
    }
}

impl std::str::FromStr for LinkState {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "los" => Ok(LinkState::LoS),
            "nlos" => Ok(LinkState::NLoS),
            "outage" => Ok(LinkState::Outage),
            _ => Err(format!("unknown link state `{s}`")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PropagationError {
    #[error("distance must be positive, got {0} m")]
    NonPositiveDistance(f64),
    #[error("pathloss is undefined for a link in outage")]
    OutageState,
}

/// Per-link large-scale realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LargeScale<T> {
    pub state: LinkState,
    /// Infinite in outage.
    pub pathloss_db: T,
    pub shadowing_db: T,
    pub distance_m: T,
}

impl<T: Real> LargeScale<T> {
    pub fn outage(distance_m: T) -> Self {
        Self {
            state: LinkState::Outage,
            pathloss_db: T::infinity(),
            shadowing_db: T::zero(),
            distance_m,
        }
    }

    /// Pathloss plus shadowing; `None` for outage links.
    pub fn loss_db(&self) -> Option<T> {
        match self.state {
            LinkState::Outage => None,
            _ => Some(self.pathloss_db + self.shadowing_db),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateProbabilities<T> {
    pub outage: T,
    pub los: T,
    pub nlos: T,
}

/// Outage / LoS / NLoS probabilities at distance `d` (meters).
pub fn state_probabilities<T: Real>(
    d: T,
    params: &ModelParams<T>,
) -> Result<StateProbabilities<T>, PropagationError> {
    if !(d > T::zero()) {
        return Err(PropagationError::NonPositiveDistance(d.as_f64()));
    }
    let outage = (T::one() - (-params.a_out * d + params.b_out).exp()).max(T::zero());
    let los = (T::one() - outage) * (-params.a_los * d).exp();
    let nlos = T::one() - outage - los;
    Ok(StateProbabilities { outage, los, nlos })
}

/// Probabilities actually used by `model`: Models 1 and 4 have no outage
/// state, and its mass is reassigned proportionally to LoS/NLoS.
pub fn model_state_probabilities<T: Real>(
    d: T,
    model: ChannelModel,
    params: &ModelParams<T>,
) -> Result<StateProbabilities<T>, PropagationError> {
    let p = state_probabilities(d, params)?;
    if !model.simplified_pathloss() {
        return Ok(p);
    }
    let los = (-params.a_los * d).exp();
    Ok(StateProbabilities {
        outage: T::zero(),
        los,
        nlos: T::one() - los,
    })
}

/// Draws the link state from one uniform variate.
pub fn sample_state<T: Real, R: Rng + ?Sized>(
    d: T,
    model: ChannelModel,
    params: &ModelParams<T>,
    rng: &mut R,
) -> Result<LinkState, PropagationError> {
    let p = model_state_probabilities(d, model, params)?;
    let u = T::unit(rng);
    Ok(if u < p.outage {
        LinkState::Outage
    } else if u < p.outage + p.los {
        LinkState::LoS
    } else {
        LinkState::NLoS
    })
}

pub fn pathloss_db<T: Real>(
    d: T,
    state: LinkState,
    model: ChannelModel,
    params: &ModelParams<T>,
) -> Result<T, PropagationError> {
    if !(d > T::zero()) {
        return Err(PropagationError::NonPositiveDistance(d.as_f64()));
    }
    let ten = T::lit(10.0);
    let log_d = d.log10();
    if model.simplified_pathloss() {
        let s = &params.simplified;
        let n = match state {
            LinkState::LoS => s.exponent_los,
            LinkState::NLoS => s.exponent_nlos,
            LinkState::Outage => return Err(PropagationError::OutageState),
        };
        Ok(s.ref_loss_db + ten * n * log_d)
    } else {
        let pl = match state {
            LinkState::LoS => &params.los,
            LinkState::NLoS => &params.nlos,
            LinkState::Outage => return Err(PropagationError::OutageState),
        };
        Ok(pl.alpha_db + pl.beta * ten * log_d)
    }
}

/// Log-normal shadowing in dB. Models 1 and 4 carry none.
pub fn sample_shadowing<T: Real, R: Rng + ?Sized>(
    state: LinkState,
    model: ChannelModel,
    params: &ModelParams<T>,
    rng: &mut R,
) -> T {
    if model.simplified_pathloss() {
        return T::zero();
    }
    let sigma = match state {
        LinkState::LoS => params.los.sigma_db,
        LinkState::NLoS => params.nlos.sigma_db,
        LinkState::Outage => return T::zero(),
    };
    sigma * T::std_normal(rng)
}

/// Thermal noise power over `bw_hz` including the receiver noise figure.
pub fn noise_power_dbm<T: Real>(bw_hz: T, noise_figure_db: T) -> T {
    T::lit(THERMAL_NOISE_DBM_PER_HZ) + T::lit(10.0) * bw_hz.log10() + noise_figure_db
}

/// Samples state, pathloss and shadowing for one link.
pub fn realize_link<T: Real, R: Rng + ?Sized>(
    distance_m: T,
    model: ChannelModel,
    params: &ModelParams<T>,
    rng: &mut R,
) -> LargeScale<T> {
    let d = distance_m.max(T::lit(MIN_DISTANCE_M));
    // d >= 1 so neither call can fail
    let state = sample_state(d, model, params, rng).expect("positive distance");
    if state == LinkState::Outage {
        return LargeScale::outage(distance_m);
    }
    let pathloss_db = pathloss_db(d, state, model, params).expect("non-outage state");
    let shadowing_db = sample_shadowing(state, model, params, rng);
    LargeScale {
        state,
        pathloss_db,
        shadowing_db,
        distance_m,
    }
}
