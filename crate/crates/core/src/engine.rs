//! Per-drop SINR/rate evaluation and the Monte Carlo campaign.
//!
//! Every drop owns a fixed set of ChaCha streams keyed by
//! `(seed, drop index, purpose)`, so results do not depend on worker count
//! or scheduling, and two runs that differ only in the channel model see the
//! same deployment, large-scale draws and cluster sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ChannelModel, Scenario, SimulationConfig};
use crate::geometry::{associate, cell_loads, deploy, is_candidate, shares_band, Deployment};
use crate::metrics_io::rate_of;
use crate::mimo::{
    beamforming_vectors, link_gain_with, rect_gain, sample_cluster_set, sample_rect_gain, steering_weights,
    ArrayGeometry, Panel,
};
use crate::propagation::{noise_power_dbm, realize_link, LargeScale, LinkState};
use crate::scalar::Real;

const STREAMS_PER_DROP: u64 = 16;

/// Purpose tags of the per-drop random streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Deployment = 0,
    LargeScale = 1,
    Orientation = 2,
    Channel = 3,
    Scheduling = 4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DropStreams {
    pub seed: u64,
    pub drop: u64,
}

impl DropStreams {
    pub fn new(seed: u64, drop: u64) -> Self {
        Self { seed, drop }
    }

    pub fn rng(&self, purpose: Stream) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.drop * STREAMS_PER_DROP + purpose as u64);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterferenceRule {
    /// Only BSs of the typical UE's operator share its band.
    SameOperator,
    /// Every BS transmits in the pooled band.
    AllOperators,
}

/// Scenario-dependent bandwidth, access and interference rules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioSpec<T> {
    pub scenario: Scenario,
    pub bandwidth_hz: T,
    pub open_access: bool,
    pub interference: InterferenceRule,
}

impl<T: Real> ScenarioSpec<T> {
    pub fn new(config: &SimulationConfig<T>) -> Self {
        let scenario = config.scenario;
        let exclusive = scenario == Scenario::NoSharing;
        Self {
            scenario,
            bandwidth_hz: if exclusive {
                config.per_operator_bandwidth_hz()
            } else {
                config.total_bandwidth_hz
            },
            open_access: scenario == Scenario::SpectrumAccess,
            interference: if exclusive {
                InterferenceRule::SameOperator
            } else {
                InterferenceRule::AllOperators
            },
        }
    }
}

/// A transmitter as seen at the typical UE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceivedLink<T> {
    pub tx_power_dbm: T,
    /// Pathloss plus shadowing; `None` in outage.
    pub loss_db: Option<T>,
    pub gain: T,
}

impl<T: Real> ReceivedLink<T> {
    pub fn received_mw(&self) -> T {
        match self.loss_db {
            Some(loss) => (self.tx_power_dbm - loss).db_to_linear() * self.gain,
            None => T::zero(),
        }
    }
}

/// Linear SINR of `serving` against `interferers` and thermal noise.
pub fn sinr<T: Real>(serving: &ReceivedLink<T>, interferers: &[ReceivedLink<T>], noise_dbm: T) -> T {
    let interference = interferers.iter().fold(T::zero(), |acc, l| acc + l.received_mw());
    serving.received_mw() / (interference + noise_dbm.db_to_linear())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct DropResult<T: Real> {
    /// Negative infinity marks an outage.
    pub sinr_db: T,
    pub rate_bps: T,
    /// Users of the serving cell including the typical UE; 0 when unassociated.
    pub serving_load: usize,
    pub serving_state: LinkState,
}

impl<T: Real> DropResult<T> {
    pub fn outage(serving_load: usize) -> Self {
        Self {
            sinr_db: T::neg_infinity(),
            rate_bps: T::zero(),
            serving_load,
            serving_state: LinkState::Outage,
        }
    }

    pub fn is_outage(&self) -> bool {
        self.sinr_db == T::neg_infinity()
    }
}

/// Everything computed for one drop, before reduction to a [`DropResult`].
#[derive(Debug, Clone)]
pub struct DropRealization<T> {
    pub deployment: Deployment<T>,
    pub serving_bs: Option<usize>,
    pub serving_state: LinkState,
    /// `None` if unassociated or every serving cluster is suppressed.
    pub serving: Option<ReceivedLink<T>>,
    pub interferers: Vec<ReceivedLink<T>>,
    pub interferer_bss: Vec<usize>,
    /// UE each interferer beams toward (MIMO models); `None` for an idle BS.
    pub scheduled_ues: Vec<Option<usize>>,
    pub serving_load: usize,
    pub noise_dbm: T,
    pub bandwidth_hz: T,
}

impl<T: Real> DropRealization<T> {
    pub fn sinr(&self) -> Option<T> {
        self.serving.as_ref().map(|s| sinr(s, &self.interferers, self.noise_dbm))
    }

    pub fn result(&self, half_duplex_factor: T) -> DropResult<T> {
        match self.sinr() {
            Some(s) => DropResult {
                sinr_db: s.linear_to_db(),
                rate_bps: rate_of(s, self.bandwidth_hz, self.serving_load, half_duplex_factor)
                    .expect("serving cell holds the typical UE"),
                serving_load: self.serving_load,
                serving_state: self.serving_state,
            },
            None => DropResult::outage(self.serving_load),
        }
    }
}

/// BSs sharing the typical UE's band, excluding its server.
pub fn interferer_indices<T: Real>(deployment: &Deployment<T>, serving: usize, scenario: Scenario) -> Vec<usize> {
    let op = deployment.typical().operator;
    deployment
        .bss
        .iter()
        .enumerate()
        .filter(|(b, bs)| *b != serving && shares_band(scenario, op, bs.operator))
        .map(|(b, _)| b)
        .collect()
}

pub fn realize_drop<T: Real>(
    config: &SimulationConfig<T>,
    spec: &ScenarioSpec<T>,
    streams: &DropStreams,
) -> DropRealization<T> {
    let model = config.channel_model;
    let params = &config.model_params;
    let scenario = spec.scenario;
    let noise_dbm = noise_power_dbm(spec.bandwidth_hz, config.noise_figure_db);

    let mut deployment = deploy(config, &mut streams.rng(Stream::Deployment));
    let typical = *deployment.typical();
    let typical_idx = deployment.typical_ue;

    let mut ls_rng = streams.rng(Stream::LargeScale);
    let typical_links: Vec<Option<LargeScale<T>>> = deployment
        .bss
        .iter()
        .map(|bs| {
            let relevant = is_candidate(scenario, typical.operator, bs.operator)
                || shares_band(scenario, typical.operator, bs.operator);
            relevant.then(|| {
                realize_link(typical.position.distance(&bs.position), model, params, &mut ls_rng)
            })
        })
        .collect();

    deployment.association = associate(&deployment, scenario, |u, b| {
        if u == typical_idx {
            typical_links[b].and_then(|l| l.loss_db())
        } else {
            let d = deployment.ues[u].position.distance(&deployment.bss[b].position);
            realize_link(d, model, params, &mut ls_rng).loss_db()
        }
    });

    let mut out = DropRealization {
        serving_bs: deployment.serving_bs(),
        deployment,
        serving_state: LinkState::Outage,
        serving: None,
        interferers: Vec::new(),
        interferer_bss: Vec::new(),
        scheduled_ues: Vec::new(),
        serving_load: 0,
        noise_dbm,
        bandwidth_hz: spec.bandwidth_hz,
    };
    let Some(serving_bs) = out.serving_bs else {
        return out;
    };
    let dep = &out.deployment;
    let loads = cell_loads(dep.bss.len(), &dep.association);
    out.serving_load = loads[serving_bs];
    let serving_ls = typical_links[serving_bs].expect("serving BS is a candidate");
    out.serving_state = serving_ls.state;

    let interferer_bss: Vec<usize> = interferer_indices(dep, serving_bs, scenario)
        .into_iter()
        .filter(|b| typical_links[*b].is_some_and(|l| l.state != LinkState::Outage))
        .collect();

    let tx_power = config.tx_power_dbm;
    let link = |ls: &LargeScale<T>, gain: T| ReceivedLink {
        tx_power_dbm: tx_power,
        loss_db: ls.loss_db(),
        gain,
    };

    let mut sched_rng = streams.rng(Stream::Scheduling);
    if model == ChannelModel::Model1 {
        let rect = &params.rect;
        out.serving = Some(link(&serving_ls, rect_gain(true, true, rect).db_to_linear()));
        out.interferers = interferer_bss
            .iter()
            .map(|b| {
                let ls = typical_links[*b].expect("interferer link realized");
                link(&ls, sample_rect_gain(rect, &mut sched_rng).db_to_linear())
            })
            .collect();
        out.interferer_bss = interferer_bss;
        return out;
    }

    let sectors = params.sectors;
    let mut orient_rng = streams.rng(Stream::Orientation);
    let bs_orientation: Vec<T> = dep
        .bss
        .iter()
        .map(|_| T::uniform(&mut orient_rng, T::zero(), T::TAU()))
        .collect();
    let ue_orientation = T::uniform(&mut orient_rng, T::zero(), T::TAU());

    let mut ch_rng = streams.rng(Stream::Channel);
    let serving_set = sample_cluster_set(params, &mut ch_rng);
    let main = &serving_set.clusters[serving_set.strongest().expect("at least one cluster")];
    let tx = ArrayGeometry::new(
        config.tx_array,
        Panel::facing(bs_orientation[serving_bs], sectors, main.departure.azimuth),
    );
    let rx = ArrayGeometry::new(
        config.rx_array,
        Panel::facing(ue_orientation, sectors, main.arrival.azimuth),
    );
    let Ok(beams) = beamforming_vectors(&serving_set, &tx, &rx, model) else {
        out.serving_state = LinkState::Outage;
        return out;
    };
    let serving_gain = link_gain_with(&serving_set, &tx, &rx, &beams.tx, &beams.rx, model);
    out.serving = Some(link(&serving_ls, serving_gain));

    let mut served: Vec<Vec<usize>> = vec![Vec::new(); dep.bss.len()];
    for (u, a) in dep.association.iter().enumerate() {
        if let Some(b) = a {
            served[*b].push(u);
        }
    }
    let mut scheduled = Vec::with_capacity(interferer_bss.len());
    out.interferers = interferer_bss
        .iter()
        .map(|&b| {
            let ls = typical_links[b].expect("interferer link realized");
            let set = sample_cluster_set(params, &mut ch_rng);
            // the interferer steers toward one of its own users, or an
            // arbitrary direction when idle
            let users = &served[b];
            scheduled.push((!users.is_empty()).then(|| users[sched_rng.random_range(0..users.len())]));
            let scheduled_set = sample_cluster_set(params, &mut sched_rng);
            let target = &scheduled_set.clusters[scheduled_set.strongest().expect("non-empty")].departure;
            let tx_b = ArrayGeometry::new(
                config.tx_array,
                Panel::facing(bs_orientation[b], sectors, target.azimuth),
            );
            let w_tx = steering_weights(&tx_b, target);
            link(&ls, link_gain_with(&set, &tx_b, &rx, &w_tx, &beams.rx, model))
        })
        .collect();
    out.interferer_bss = interferer_bss;
    out.scheduled_ues = scheduled;
    out
}

pub fn run_drop<T: Real>(config: &SimulationConfig<T>, spec: &ScenarioSpec<T>, streams: &DropStreams) -> DropResult<T> {
    realize_drop(config, spec, streams).result(config.half_duplex_factor)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

/// Runs `num_drops` drops; results are ordered by drop index.
pub fn run_campaign<T: Real>(config: &SimulationConfig<T>) -> Vec<DropResult<T>> {
    run_campaign_with(config, Execution::Parallel)
}

pub fn run_campaign_with<T: Real>(config: &SimulationConfig<T>, execution: Execution) -> Vec<DropResult<T>> {
    let spec = ScenarioSpec::new(config);
    let seed = config.rng_seed;
    let drop = |i: usize| run_drop(config, &spec, &DropStreams::new(seed, i as u64));
    match execution {
        Execution::Serial => (0..config.num_drops).map(drop).collect(),
        Execution::Parallel => (0..config.num_drops).into_par_iter().map(drop).collect(),
    }
}
