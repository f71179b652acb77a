//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits non-zero if any fails.

use std::collections::HashMap;
use std::fs;
use std::time::Instant;

use mmshare::engine::{run_campaign_with, Execution};
use mmshare::metrics_io::{campaign_curves, coverage, default_rate_grid, default_sinr_grid, export, ExportFormat, Metric};
use mmshare::mimo::{
    beamforming_vectors, bf_gain, channel_matrix, sample_cluster_set, Angles, ArrayGeometry, Cluster, ClusterSet, Panel,
    Subpath,
};
use mmshare::propagation::{noise_power_dbm, pathloss_db, state_probabilities};
use mmshare::{ArrayDims, ChannelModel, Config, DropResult, LinkState, ModelParams, Scenario};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// Tolerances and sample sizes.
const PROB_TOL: f64 = 1e-4;
const PATHLOSS_TOL: f64 = 1e-9;
const NOISE_TOL_DB: f64 = 0.01;
const BF_GAIN_REL_TOL: f64 = 1e-9;
const POWER_SUM_TOL: f64 = 1e-9;
const CLUSTER_MEAN_REL_TOL: f64 = 0.02;
const POWER_SETS: usize = 10_000;
const COUNT_SETS: usize = 100_000;
/// Monte Carlo slack on coverage comparisons, in probability units.
const SLACK: f64 = 0.02;
const MEDIAN_REL_TOL: f64 = 0.15;
const DROPS: usize = 10_000;
const DOUBLED_BS_DENSITY: f64 = 60.0;
const DETERMINISM_DROPS: usize = 400;
const SEED: u64 = 20_240_601;

struct Report {
    failures: usize,
}

impl Report {
    fn check(&mut self, id: u32, name: &str, pass: bool, detail: String) {
        println!("[{}] criterion {id}: {name} — {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failures += 1;
        }
    }
}

type Key = (Scenario, ChannelModel, u64);

/// Campaign results cached by (scenario, model, λ_BS bits).
#[derive(Default)]
struct Campaigns {
    runs: HashMap<Key, Vec<DropResult>>,
}

impl Campaigns {
    fn get(&mut self, scenario: Scenario, model: ChannelModel, bs_density: f64) -> &[DropResult] {
        self.runs.entry((scenario, model, bs_density.to_bits())).or_insert_with(|| {
            let config = base_config(scenario, model, bs_density);
            let start = Instant::now();
            let r = run_campaign_with(&config, Execution::Parallel);
            eprintln!(
                "    ran {scenario}/{model} λ_BS={bs_density}: {} drops in {:.1}s",
                r.len(),
                start.elapsed().as_secs_f64()
            );
            r
        })
    }

    fn sinr_cov(&mut self, s: Scenario, m: ChannelModel, bs: f64, thresholds: &[f64]) -> Vec<f64> {
        let samples: Vec<f64> = self.get(s, m, bs).iter().map(|r| r.sinr_db).collect();
        coverage(&samples, thresholds, Metric::SinrDb, "").unwrap().coverage
    }

    fn rates(&mut self, s: Scenario, m: ChannelModel) -> Vec<f64> {
        self.get(s, m, BASE_BS).iter().map(|r| r.rate_bps).collect()
    }
}

const BASE_BS: f64 = 30.0;

fn base_config(scenario: Scenario, channel_model: ChannelModel, bs_density: f64) -> Config {
    Config {
        scenario,
        channel_model,
        bs_density,
        num_drops: DROPS,
        rng_seed: SEED,
        ..Config::default()
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn formula_oracles(report: &mut Report) {
    let p = ModelParams::default();
    let mut worst = 0.0f64;
    for (d, expected) in [(100.0, [0.0, 0.2254, 0.7746]), (200.0, [0.7724, 0.0116, 0.2160])] {
        let s = state_probabilities(d, &p).unwrap();
        for (got, want) in [s.outage, s.los, s.nlos].into_iter().zip(expected) {
            worst = worst.max((got - want).abs());
        }
    }
    let los = pathloss_db(100.0, LinkState::LoS, ChannelModel::Model2, &p).unwrap();
    let nlos = pathloss_db(100.0, LinkState::NLoS, ChannelModel::Model2, &p).unwrap();
    let noise: f64 = noise_power_dbm(1e9, 7.0);
    let pass = worst <= PROB_TOL
        && (los - 101.4).abs() <= PATHLOSS_TOL
        && (nlos - 130.4).abs() <= PATHLOSS_TOL
        && (noise + 77.0).abs() <= NOISE_TOL_DB;
    report.check(
        1,
        "formula oracles",
        pass,
        format!("max state-prob error {worst:.2e}, PL_LoS {los:.12}, PL_NLoS {nlos:.12}, noise {noise:.4} dBm"),
    );
}

fn mimo_oracles(report: &mut Report) {
    let tx = ArrayGeometry::new(ArrayDims::new(8, 8), Panel::new(0.0f64));
    let rx = ArrayGeometry::new(ArrayDims::new(4, 4), Panel::new(0.0));
    let dep = Angles::new(0.4, 0.1);
    let arr = Angles::new(-0.7, -0.2);
    let set = ClusterSet {
        clusters: vec![Cluster {
            departure: dep,
            arrival: arr,
            subpaths: vec![Subpath {
                departure: dep,
                arrival: arr,
                power: 1.0,
                phase: 1.3,
            }],
        }],
    };
    let h = channel_matrix(&set, &tx, &rx, ChannelModel::Model2);
    let pair = beamforming_vectors(&set, &tx, &rx, ChannelModel::Model2).unwrap();
    let gain: f64 = bf_gain(&h, &pair).unwrap();
    let gain_ok = ((gain - 1024.0) / 1024.0).abs() <= BF_GAIN_REL_TOL;

    let p = ModelParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst_sum = 0.0f64;
    let mut clusters = 0usize;
    for i in 0..COUNT_SETS {
        let set = sample_cluster_set(&p, &mut rng);
        if i < POWER_SETS {
            worst_sum = worst_sum.max((set.total_power() - 1.0).abs());
        }
        clusters += set.clusters.len();
    }
    let mean = clusters as f64 / COUNT_SETS as f64;
    // E[max(1, N)] for N ~ Poisson(1.8)
    let expected = 1.8 + (-1.8f64).exp();
    let mean_ok = ((mean - expected) / expected).abs() <= CLUSTER_MEAN_REL_TOL;
    report.check(
        2,
        "MIMO oracles",
        gain_ok && worst_sum <= POWER_SUM_TOL && mean_ok,
        format!(
            "rank-1 gain {gain:.9} ({:.3} dB), max |ΣP−1| {worst_sum:.2e}, mean clusters {mean:.4} vs {expected:.4}",
            10.0 * gain.log10()
        ),
    );
}

const SINR_CHECKPOINTS: [f64; 5] = [0.0, 5.0, 10.0, 15.0, 20.0];

fn scenario_two_dominates(report: &mut Report, runs: &mut Campaigns) {
    let m = ChannelModel::Model3;
    let s2 = runs.sinr_cov(Scenario::SpectrumAccess, m, BASE_BS, &SINR_CHECKPOINTS);
    let mut worst = f64::INFINITY;
    for other in [Scenario::NoSharing, Scenario::Spectrum, Scenario::SpectrumInfra] {
        let c = runs.sinr_cov(other, m, BASE_BS, &SINR_CHECKPOINTS);
        for (a, b) in s2.iter().zip(&c) {
            worst = worst.min(a - b);
        }
    }
    report.check(
        3,
        "scenario 2 SINR coverage dominates (Model 3)",
        worst >= -SLACK,
        format!("min margin over thresholds {{0,5,10,15,20}} dB = {:+.4}; S2 coverage {s2:.3?}", worst),
    );
}

fn rate_sinr_crossover(report: &mut Report, runs: &mut Campaigns) {
    let m = ChannelModel::Model3;
    let s1_sinr = runs.sinr_cov(Scenario::NoSharing, m, BASE_BS, &[10.0])[0];
    let s1_rates = runs.rates(Scenario::NoSharing, m);
    let rho = median(s1_rates.clone());
    let s1_rate = coverage(&s1_rates, &[rho], Metric::RateBps, "").unwrap().coverage[0];
    let mut pass = true;
    let mut detail = format!("S1: SINR cov@10dB {s1_sinr:.4}, rate cov@{rho:.3e} {s1_rate:.4}");
    for s in [Scenario::Spectrum, Scenario::SpectrumInfra] {
        let sinr = runs.sinr_cov(s, m, BASE_BS, &[10.0])[0];
        let rates = runs.rates(s, m);
        let rate = coverage(&rates, &[rho], Metric::RateBps, "").unwrap().coverage[0];
        pass &= sinr < s1_sinr && rate > s1_rate;
        detail += &format!("; {}: {sinr:.4} / {rate:.4}", s.tag());
    }
    report.check(4, "lower SINR but higher rate coverage for S3/S4 vs S1", pass, detail);
}

fn back_lobe_effect(report: &mut Report, runs: &mut Campaigns) {
    let grid = default_sinr_grid::<f64>();
    let mut worst = f64::INFINITY;
    let mut at = (Scenario::NoSharing, 0.0);
    for s in Scenario::ALL {
        let m2 = runs.sinr_cov(s, ChannelModel::Model2, BASE_BS, &grid);
        let m3 = runs.sinr_cov(s, ChannelModel::Model3, BASE_BS, &grid);
        for ((a, b), t) in m3.iter().zip(&m2).zip(&grid) {
            if a - b < worst {
                worst = a - b;
                at = (s, *t);
            }
        }
    }
    report.check(
        5,
        "Model 3 SINR coverage ≥ Model 2 (paired seeds, all scenarios)",
        worst >= -SLACK,
        format!("min margin {worst:+.4} at {} T={} dB", at.0.tag(), at.1),
    );
}

fn outage_saturation(report: &mut Report, runs: &mut Campaigns) {
    let s = Scenario::NoSharing;
    let t = [-20.0];
    let gap = |runs: &mut Campaigns, bs: f64| {
        let c: Vec<f64> = ChannelModel::ALL.iter().map(|m| runs.sinr_cov(s, *m, bs, &t)[0]).collect();
        (c.clone(), 0.5 * (c[0] + c[3]) - 0.5 * (c[1] + c[2]))
    };
    let (base, base_gap) = gap(runs, BASE_BS);
    let (dense, dense_gap) = gap(runs, DOUBLED_BS_DENSITY);
    let saturated = base[1] < 1.0 && base[2] < 1.0;
    let below = base[1].max(base[2]) < base[0].min(base[3]);
    report.check(
        6,
        "outage saturation at T = −20 dB",
        saturated && below && dense_gap < base_gap,
        format!(
            "λ_BS=30 M1..M4 {base:.4?} (gap {base_gap:+.4}); λ_BS=60 {dense:.4?} (gap {dense_gap:+.4})"
        ),
    );
}

fn infra_sharing_cost(report: &mut Report, runs: &mut Campaigns) {
    let m = ChannelModel::Model3;
    let s3 = median(runs.rates(Scenario::Spectrum, m));
    let s4 = median(runs.rates(Scenario::SpectrumInfra, m));
    let rel = (s4 - s3).abs() / s3;
    report.check(
        7,
        "scenario 4 median rate close to scenario 3",
        rel <= MEDIAN_REL_TOL,
        format!("S3 {s3:.4e} bit/s, S4 {s4:.4e} bit/s, rel diff {:.2}%", 100.0 * rel),
    );
}

fn exported_bytes(execution: Execution, format: ExportFormat) -> Vec<(String, Vec<u8>)> {
    let config = Config {
        scenario: Scenario::SpectrumInfra,
        channel_model: ChannelModel::Model3,
        num_drops: DETERMINISM_DROPS,
        rng_seed: SEED,
        ..Config::default()
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let results = pool.install(|| run_campaign_with(&config, execution));
    let curves = campaign_curves(&config, &results, &default_sinr_grid(), &default_rate_grid()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    export(&config, &results, &curves, dir.path(), format)
        .unwrap()
        .into_iter()
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect()
}

fn determinism(report: &mut Report) {
    let mut pass = true;
    let mut files = 0;
    for format in [ExportFormat::Csv, ExportFormat::Json] {
        let serial = exported_bytes(Execution::Serial, format);
        let parallel = exported_bytes(Execution::Parallel, format);
        pass &= serial == parallel && !serial.is_empty();
        files += serial.len();
    }
    report.check(
        8,
        "byte-identical exports, serial vs parallel",
        pass,
        format!("{files} files compared"),
    );
}

fn main() {
    let start = Instant::now();
    let mut report = Report { failures: 0 };
    let mut runs = Campaigns::default();
    formula_oracles(&mut report);
    mimo_oracles(&mut report);
    scenario_two_dominates(&mut report, &mut runs);
    rate_sinr_crossover(&mut report, &mut runs);
    back_lobe_effect(&mut report, &mut runs);
    outage_saturation(&mut report, &mut runs);
    infra_sharing_cost(&mut report, &mut runs);
    determinism(&mut report);
    println!(
        "acceptance: {} of 8 criteria failed ({:.0}s)",
        report.failures,
        start.elapsed().as_secs_f64()
    );
    if report.failures > 0 {
        std::process::exit(1);
    }
}
