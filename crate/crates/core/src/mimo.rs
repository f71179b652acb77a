//! Cluster/subpath MIMO channel, uniform planar array signatures,
//! analog beamforming and beamforming gain.
//!
//! Angles are radians. Azimuths of a [`ClusterSet`] are in the global frame;
//! each array evaluates them relative to the boresight of its active
//! [`Panel`]. A planar array cannot tell a direction from its mirror image
//! behind the panel, which is the back lobe that Model 3 removes.

use std::io::Write;

use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use thiserror::Error;

use crate::config::{ArrayDims, ChannelModel, ModelParams, RectPattern};
use crate::scalar::Real;

/// Maximum number of subpaths per cluster.
pub const MAX_SUBPATHS: usize = 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MimoError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("every cluster lies in a suppressed back lobe")]
    AllClustersSuppressed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angles<T> {
    /// Horizontal angle.
    pub azimuth: T,
    /// Vertical angle.
    pub elevation: T,
}

impl<T> Angles<T> {
    pub fn new(azimuth: T, elevation: T) -> Self {
        Self { azimuth, elevation }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subpath<T> {
    pub departure: Angles<T>,
    pub arrival: Angles<T>,
    /// Normalized power; all subpaths of a set sum to one.
    pub power: T,
    /// Uniform phase standing in for the delay term at the carrier.
    pub phase: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster<T> {
    pub departure: Angles<T>,
    pub arrival: Angles<T>,
    pub subpaths: Vec<Subpath<T>>,
}

impl<T: Real> Cluster<T> {
    pub fn power(&self) -> T {
        self.subpaths.iter().fold(T::zero(), |acc, s| acc + s.power)
    }
}

/// Static snapshot of one link's scattering clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSet<T> {
    pub clusters: Vec<Cluster<T>>,
}

impl<T: Real> ClusterSet<T> {
    pub fn total_power(&self) -> T {
        self.clusters.iter().fold(T::zero(), |acc, c| acc + c.power())
    }

    pub fn subpaths(&self) -> impl Iterator<Item = &Subpath<T>> {
        self.clusters.iter().flat_map(|c| c.subpaths.iter())
    }

    /// Index of the highest-power cluster; ties go to the lowest index.
    pub fn strongest(&self) -> Option<usize> {
        self.strongest_where(|_| true)
    }

    fn strongest_where(&self, mut keep: impl FnMut(&Cluster<T>) -> bool) -> Option<usize> {
        let mut best: Option<(usize, T)> = None;
        for (i, c) in self.clusters.iter().enumerate() {
            if !keep(c) {
                continue;
            }
            let p = c.power();
            if best.is_none_or(|(_, bp)| p > bp) {
                best = Some((i, p));
            }
        }
        best.map(|(i, _)| i)
    }
}

/// `max(1, n)` applied to the Poisson cluster-count draw.
pub fn cluster_count(poisson_draw: u64) -> usize {
    poisson_draw.max(1) as usize
}

/// Unnormalized per-subpath power of a cluster with `subpaths` subpaths.
pub fn unnormalized_cluster_power<T: Real>(u: T, v: T, z_db: T, subpaths: usize, r_tau: T) -> T {
    u.powf(r_tau - T::one()) * T::lit(10.0).powf(-T::lit(0.1) * z_db + v) / T::lit(subpaths as f64)
}

/// Scales `weights` in place to sum to one.
pub fn normalize_powers<T: Real>(weights: &mut [T]) {
    let total = weights.iter().fold(T::zero(), |a, &w| a + w);
    for w in weights.iter_mut() {
        *w = *w / total;
    }
}

pub fn sample_cluster_set<T: Real, R: Rng + ?Sized>(params: &ModelParams<T>, rng: &mut R) -> ClusterSet<T> {
    let draw = Poisson::new(params.cluster_mean.as_f64())
        .expect("positive cluster mean")
        .sample(rng) as u64;
    let k = cluster_count(draw);
    let two_pi = T::TAU();
    let el_max = params.angles.elevation_max_deg.to_radians();
    let sub_az = params.angles.subpath_azimuth_deg.to_radians();
    let sub_el = params.angles.subpath_elevation_deg.to_radians();

    let mut clusters = Vec::with_capacity(k);
    for _ in 0..k {
        let l = rng.random_range(1..=MAX_SUBPATHS);
        // (0, 1] keeps U^(r_tau - 1) finite and nonzero
        let u = T::one() - T::unit(rng);
        let v = T::uniform(rng, T::zero(), T::lit(0.6));
        let z = params.zeta_db * T::std_normal(rng);
        let power = unnormalized_cluster_power(u, v, z, l, params.r_tau);
        let departure = Angles::new(T::uniform(rng, T::zero(), two_pi), T::uniform(rng, -el_max, el_max));
        let arrival = Angles::new(T::uniform(rng, T::zero(), two_pi), T::uniform(rng, -el_max, el_max));
        let subpaths = (0..l)
            .map(|_| Subpath {
                departure: Angles::new(
                    departure.azimuth + T::uniform(rng, -sub_az, sub_az),
                    departure.elevation + T::uniform(rng, -sub_el, sub_el),
                ),
                arrival: Angles::new(
                    arrival.azimuth + T::uniform(rng, -sub_az, sub_az),
                    arrival.elevation + T::uniform(rng, -sub_el, sub_el),
                ),
                power,
                phase: T::uniform(rng, T::zero(), two_pi),
            })
            .collect();
        clusters.push(Cluster {
            departure,
            arrival,
            subpaths,
        });
    }

    let total = clusters.iter().fold(T::zero(), |a, c| a + c.power());
    for s in clusters.iter_mut().flat_map(|c| c.subpaths.iter_mut()) {
        s.power = s.power / total;
    }
    ClusterSet { clusters }
}

/// Wraps an angle to `(-π, π]`.
pub fn wrap_angle<T: Real>(a: T) -> T {
    let two_pi = T::TAU();
    let mut w = a % two_pi;
    if w > T::PI() {
        w = w - two_pi;
    } else if w <= -T::PI() {
        w = w + two_pi;
    }
    w
}

/// One flat array face. Azimuths more than 90° off boresight are behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Panel<T> {
    pub boresight: T,
}

impl<T: Real> Panel<T> {
    pub fn new(boresight: T) -> Self {
        Self { boresight }
    }

    /// Of `sectors` panels spaced evenly from `orientation`, the one whose
    /// boresight is closest to `azimuth`.
    pub fn facing(orientation: T, sectors: usize, azimuth: T) -> Self {
        let width = T::TAU() / T::lit(sectors as f64);
        let offset = wrap_angle(azimuth - orientation);
        let idx = (offset / width).round();
        Self::new(wrap_angle(orientation + idx * width))
    }

    /// Angles in this panel's frame.
    pub fn local(&self, angles: &Angles<T>) -> Angles<T> {
        Angles::new(wrap_angle(angles.azimuth - self.boresight), angles.elevation)
    }

    pub fn is_behind(&self, azimuth: T) -> bool {
        (azimuth - self.boresight).cos() < T::zero()
    }
}

/// Array layout plus its active panel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry<T> {
    pub dims: ArrayDims,
    pub panel: Panel<T>,
}

impl<T: Real> ArrayGeometry<T> {
    pub fn new(dims: ArrayDims, panel: Panel<T>) -> Self {
        Self { dims, panel }
    }

    pub fn elements(&self) -> usize {
        self.dims.elements()
    }

    /// Signature toward a global-frame direction.
    pub fn signature(&self, angles: &Angles<T>) -> Vec<Complex<T>> {
        let local = self.panel.local(angles);
        spatial_signature(self.dims, local.azimuth, local.elevation)
    }
}

/// Half-wavelength UPA steering vector. Element `(p, q)` sits at index
/// `p·vertical + q` with phase `π·(p·sinθ·cosφ + q·sinφ)`.
pub fn spatial_signature<T: Real>(dims: ArrayDims, azimuth: T, elevation: T) -> Vec<Complex<T>> {
    let h_step = T::PI() * azimuth.sin() * elevation.cos();
    let v_step = T::PI() * elevation.sin();
    let vertical: Vec<Complex<T>> = (0..dims.vertical)
        .map(|q| Complex::from_polar(T::one(), v_step * T::lit(q as f64)))
        .collect();
    let mut out = Vec::with_capacity(dims.elements());
    for p in 0..dims.horizontal {
        let h = Complex::from_polar(T::one(), h_step * T::lit(p as f64));
        out.extend(vertical.iter().map(|v| h * v));
    }
    out
}

/// `√P · e^{jψ}`: static-snapshot small-scale coefficient.
pub fn small_scale_gain<T: Real>(power: T, phase: T) -> Complex<T> {
    Complex::from_polar(power.sqrt(), phase)
}

/// `aᴴ b`.
pub fn inner<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter()
        .zip(b)
        .fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| acc + x.conj() * y)
}

/// Row-major `n_rx × n_tx` complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex<T>>,
}

impl<T: Real> ChannelMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::new(T::zero(), T::zero()); rows * cols],
        }
    }

    pub fn get(&self, r: usize, c: usize) -> Complex<T> {
        self.data[r * self.cols + c]
    }

    pub fn frobenius_norm_sq(&self) -> T {
        self.data.iter().fold(T::zero(), |a, z| a + z.norm_sqr())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.re == T::zero() && z.im == T::zero())
    }

    /// `self · x`.
    pub fn apply(&self, x: &[Complex<T>]) -> Result<Vec<Complex<T>>, MimoError> {
        if x.len() != self.cols {
            return Err(MimoError::DimensionMismatch {
                expected: self.cols,
                got: x.len(),
            });
        }
        Ok(self
            .data
            .chunks(self.cols)
            .map(|row| {
                row.iter()
                    .zip(x)
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (h, v)| acc + h * v)
            })
            .collect())
    }
}

/// Whether a cluster contributes under `model` given the active panels.
pub fn cluster_survives<T: Real>(
    cluster: &Cluster<T>,
    tx: &ArrayGeometry<T>,
    rx: &ArrayGeometry<T>,
    model: ChannelModel,
) -> bool {
    !model.suppresses_back_lobe()
        || !(tx.panel.is_behind(cluster.departure.azimuth) || rx.panel.is_behind(cluster.arrival.azimuth))
}

/// `H = Σ g_kl · u_rx(arrival) · u_tx(departure)ᴴ` over surviving clusters.
pub fn channel_matrix<T: Real>(
    set: &ClusterSet<T>,
    tx: &ArrayGeometry<T>,
    rx: &ArrayGeometry<T>,
    model: ChannelModel,
) -> ChannelMatrix<T> {
    let mut h = ChannelMatrix::zeros(rx.elements(), tx.elements());
    for cluster in set.clusters.iter().filter(|c| cluster_survives(c, tx, rx, model)) {
        for s in &cluster.subpaths {
            let g = small_scale_gain(s.power, s.phase);
            let ur = rx.signature(&s.arrival);
            let ut = tx.signature(&s.departure);
            for (r, a) in ur.iter().enumerate() {
                let ga = g * a;
                let row = &mut h.data[r * h.cols..(r + 1) * h.cols];
                for (entry, b) in row.iter_mut().zip(&ut) {
                    *entry = *entry + ga * b.conj();
                }
            }
        }
    }
    h
}

/// Unit-norm transmit and receive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamPair<T> {
    pub tx: Vec<Complex<T>>,
    pub rx: Vec<Complex<T>>,
}

/// Unit-norm steering weights toward `angles`.
pub fn steering_weights<T: Real>(array: &ArrayGeometry<T>, angles: &Angles<T>) -> Vec<Complex<T>> {
    let scale = T::one() / T::lit(array.elements() as f64).sqrt();
    array.signature(angles).into_iter().map(|z| z * scale).collect()
}

/// Conjugate steering of both ends toward the strongest surviving cluster.
pub fn beamforming_vectors<T: Real>(
    set: &ClusterSet<T>,
    tx: &ArrayGeometry<T>,
    rx: &ArrayGeometry<T>,
    model: ChannelModel,
) -> Result<BeamPair<T>, MimoError> {
    let k = set
        .strongest_where(|c| cluster_survives(c, tx, rx, model))
        .ok_or(MimoError::AllClustersSuppressed)?;
    let c = &set.clusters[k];
    Ok(BeamPair {
        tx: steering_weights(tx, &c.departure),
        rx: steering_weights(rx, &c.arrival),
    })
}

/// `|w_rxᴴ H w_tx|²`.
pub fn bf_gain<T: Real>(h: &ChannelMatrix<T>, pair: &BeamPair<T>) -> Result<T, MimoError> {
    if pair.rx.len() != h.rows {
        return Err(MimoError::DimensionMismatch {
            expected: h.rows,
            got: pair.rx.len(),
        });
    }
    let hw = h.apply(&pair.tx)?;
    Ok(inner(&pair.rx, &hw).norm_sqr())
}

/// Same value as `bf_gain(channel_matrix(..), pair)` without forming `H`:
/// `|Σ g_kl (w_rxᴴ u_rx)(u_txᴴ w_tx)|²`.
pub fn link_gain<T: Real>(
    set: &ClusterSet<T>,
    tx: &ArrayGeometry<T>,
    rx: &ArrayGeometry<T>,
    pair: &BeamPair<T>,
    model: ChannelModel,
) -> T {
    link_gain_with(set, tx, rx, &pair.tx, &pair.rx, model)
}

pub fn link_gain_with<T: Real>(
    set: &ClusterSet<T>,
    tx: &ArrayGeometry<T>,
    rx: &ArrayGeometry<T>,
    w_tx: &[Complex<T>],
    w_rx: &[Complex<T>],
    model: ChannelModel,
) -> T {
    let mut acc = Complex::new(T::zero(), T::zero());
    for cluster in set.clusters.iter().filter(|c| cluster_survives(c, tx, rx, model)) {
        for s in &cluster.subpaths {
            let rx_resp = inner(w_rx, &rx.signature(&s.arrival));
            let tx_resp = inner(&tx.signature(&s.departure), w_tx);
            acc = acc + small_scale_gain(s.power, s.phase) * rx_resp * tx_resp;
        }
    }
    acc.norm_sqr()
}

/// Aggregate rect-pattern gain in dB; each side contributes half the
/// aggregate maximum when aligned and half the minimum otherwise.
pub fn rect_gain<T: Real>(tx_aligned: bool, rx_aligned: bool, rect: &RectPattern<T>) -> T {
    let half = T::lit(0.5);
    let side = |aligned: bool| if aligned { rect.g_max_db * half } else { rect.g_min_db * half };
    side(tx_aligned) + side(rx_aligned)
}

/// Rect gain of an interfering link with independently random alignment per side.
pub fn sample_rect_gain<T: Real, R: Rng + ?Sized>(rect: &RectPattern<T>, rng: &mut R) -> T {
    let p = rect.alignment_probability();
    let tx = T::unit(rng) < p;
    let rx = T::unit(rng) < p;
    rect_gain(tx, rx, rect)
}

/// Aggregate TX+RX gain (dB) of boresight-steered arrays versus the azimuth
/// of a single horizontal path, one row per degree in `[-180, 180]`.
pub fn write_pattern_sweep<T: Real, W: Write>(tx: ArrayDims, rx: ArrayDims, mut out: W) -> std::io::Result<()> {
    let tx = ArrayGeometry::new(tx, Panel::new(T::zero()));
    let rx = ArrayGeometry::new(rx, Panel::new(T::zero()));
    let boresight = Angles::new(T::zero(), T::zero());
    let wt = steering_weights(&tx, &boresight);
    let wr = steering_weights(&rx, &boresight);
    writeln!(out, "angle_deg,gain_db")?;
    for deg in -180..=180 {
        let dir = Angles::new(T::lit(deg as f64).to_radians(), T::zero());
        let g = inner(&wr, &rx.signature(&dir)).norm_sqr() * inner(&tx.signature(&dir), &wt).norm_sqr();
        writeln!(out, "{deg},{}", g.linear_to_db())?;
    }
    Ok(())
}
