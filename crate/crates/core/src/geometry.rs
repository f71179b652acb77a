//! Node deployment and UE–BS association.

use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::config::{Scenario, SimulationConfig};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point<T>) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Bs,
    Ue,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node<T> {
    pub position: Point<T>,
    pub operator: u8,
    pub kind: NodeKind,
}

/// One drop's node layout. The typical (probe) UE is always `ues[0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Deployment<T> {
    pub bss: Vec<Node<T>>,
    pub ues: Vec<Node<T>>,
    pub sites_colocated: bool,
    /// Serving BS per UE, filled by [`associate`].
    pub association: Vec<Option<usize>>,
    pub typical_ue: usize,
    /// Side of the square simulation area in meters.
    pub side_m: T,
}

impl<T: Real> Deployment<T> {
    pub fn typical(&self) -> &Node<T> {
        &self.ues[self.typical_ue]
    }

    pub fn serving_bs(&self) -> Option<usize> {
        self.association.get(self.typical_ue).copied().flatten()
    }
}

/// Whether a UE of `ue_operator` may attach to a BS of `bs_operator`.
pub fn is_candidate(scenario: Scenario, ue_operator: u8, bs_operator: u8) -> bool {
    scenario == Scenario::SpectrumAccess || ue_operator == bs_operator
}

/// Whether a BS of `bs_operator` shares the typical UE's band.
pub fn shares_band(scenario: Scenario, ue_operator: u8, bs_operator: u8) -> bool {
    scenario != Scenario::NoSharing || ue_operator == bs_operator
}

/// Square side in meters for an area given in km².
pub fn side_meters<T: Real>(area_km2: T) -> T {
    area_km2.sqrt() * T::lit(1000.0)
}

/// Homogeneous Poisson point process on the `[0, side]²` square (meters).
pub fn sample_ppp<T: Real, R: Rng + ?Sized>(density_per_km2: T, area_km2: T, rng: &mut R) -> Vec<Point<T>> {
    let mean = (density_per_km2 * area_km2).as_f64();
    if mean <= 0.0 {
        return Vec::new();
    }
    let count = Poisson::new(mean).expect("finite positive mean").sample(rng) as usize;
    let side = side_meters(area_km2);
    (0..count)
        .map(|_| Point::new(T::unit(rng) * side, T::unit(rng) * side))
        .collect()
}

fn tagged<T: Real>(points: Vec<Point<T>>, kind: NodeKind, operator_of: impl Fn(usize) -> u8) -> Vec<Node<T>> {
    points
        .into_iter()
        .enumerate()
        .map(|(i, position)| Node {
            position,
            operator: operator_of(i),
            kind,
        })
        .collect()
}

/// Samples BS and UE positions for one drop.
///
/// Scenario 2 draws one pooled network of `M·λ` densities; operator labels
/// are assigned round-robin and play no role in open-access association.
pub fn deploy<T: Real, R: Rng + ?Sized>(config: &SimulationConfig<T>, rng: &mut R) -> Deployment<T> {
    let area = config.area_km2;
    let side = side_meters(area);
    let ops = config.num_operators;
    let center = Point::new(side / T::lit(2.0), side / T::lit(2.0));
    let mut ues = vec![Node {
        position: center,
        operator: 0,
        kind: NodeKind::Ue,
    }];
    let mut bss = Vec::new();

    match config.scenario {
        Scenario::NoSharing | Scenario::Spectrum => {
            for op in 0..ops as u8 {
                bss.extend(tagged(sample_ppp(config.bs_density, area, rng), NodeKind::Bs, |_| op));
                ues.extend(tagged(sample_ppp(config.ue_density, area, rng), NodeKind::Ue, |_| op));
            }
        }
        Scenario::SpectrumAccess => {
            let m = T::lit(ops as f64);
            let op_of = |i: usize| (i % ops) as u8;
            bss = tagged(sample_ppp(m * config.bs_density, area, rng), NodeKind::Bs, op_of);
            ues.extend(tagged(sample_ppp(m * config.ue_density, area, rng), NodeKind::Ue, op_of));
        }
        Scenario::SpectrumInfra => {
            let sites = sample_ppp(config.bs_density, area, rng);
            for site in sites {
                for op in 0..ops as u8 {
                    bss.push(Node {
                        position: site,
                        operator: op,
                        kind: NodeKind::Bs,
                    });
                }
            }
            for op in 0..ops as u8 {
                ues.extend(tagged(sample_ppp(config.ue_density, area, rng), NodeKind::Ue, |_| op));
            }
        }
    }

    let n_ues = ues.len();
    Deployment {
        bss,
        ues,
        sites_colocated: config.scenario == Scenario::SpectrumInfra,
        association: vec![None; n_ues],
        typical_ue: 0,
        side_m: side,
    }
}

/// Minimum-loss association over candidate BSs.
///
/// `loss_db(ue, bs)` returns pathloss plus shadowing, or `None` for a link in
/// outage. Exact ties go to the lowest BS index. UEs with no usable candidate
/// stay unassociated.
pub fn associate<T: Real>(
    deployment: &Deployment<T>,
    scenario: Scenario,
    mut loss_db: impl FnMut(usize, usize) -> Option<T>,
) -> Vec<Option<usize>> {
    deployment
        .ues
        .iter()
        .enumerate()
        .map(|(u, ue)| {
            let mut best: Option<(usize, T)> = None;
            for (b, bs) in deployment.bss.iter().enumerate() {
                if !is_candidate(scenario, ue.operator, bs.operator) {
                    continue;
                }
                if let Some(loss) = loss_db(u, b) {
                    if best.is_none_or(|(_, l)| loss < l) {
                        best = Some((b, loss));
                    }
                }
            }
            best.map(|(b, _)| b)
        })
        .collect()
}

/// Number of UEs served by `bs`.
pub fn cell_load(bs: usize, association: &[Option<usize>]) -> usize {
    association.iter().filter(|a| **a == Some(bs)).count()
}

/// Loads of all BSs in one pass.
pub fn cell_loads(num_bss: usize, association: &[Option<usize>]) -> Vec<usize> {
    let mut loads = vec![0; num_bss];
    for b in association.iter().flatten() {
        loads[*b] += 1;
    }
    loads
}

/// Debug dump: `kind,operator,x_m,y_m,assoc_bs`.
pub fn write_deployment_csv<T: Real, W: Write>(deployment: &Deployment<T>, mut out: W) -> std::io::Result<()> {
    writeln!(out, "kind,operator,x_m,y_m,assoc_bs")?;
    for bs in &deployment.bss {
        writeln!(out, "bs,{},{},{},", bs.operator, bs.position.x, bs.position.y)?;
    }
    for (i, ue) in deployment.ues.iter().enumerate() {
        let assoc = deployment
            .association
            .get(i)
            .copied()
            .flatten()
            .map(|b| b.to_string())
            .unwrap_or_default();
        writeln!(out, "ue,{},{},{},{}", ue.operator, ue.position.x, ue.position.y, assoc)?;
    }
    Ok(())
}
