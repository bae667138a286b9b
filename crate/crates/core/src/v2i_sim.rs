//! Vehicle-to-infrastructure protocol stages with and without sensing.
//!
//! Each stage runs single-threaded from the scenario seed. Latency models
//! are calibrated timing rules whose constants all live in the scenario:
//!
//! * initial access: a baseline burst sweep costs
//!   `mean_wait_fraction · ssb_period + burst_window · swept / n_ssb`; a
//!   sensing-assisted sweep costs `acquisition + ⌈K / ssb_per_slot⌉ · slot`,
//!   and falls back to the baseline burst when `K = n_ssb`.
//! * beam failure: the baseline counts `bfi_max_count` consecutive beam
//!   failure indications spaced `bfi_period_ms`; sensing confirms an echo
//!   anomaly on `confirm_slots` consecutive slots.
//! * connected mode: per-slot rate `min(log2(1 + SNR), cap)` scaled by the
//!   DATA share of an [`nr_grid`](crate::nr_grid) allocation.
//! * handover: RSRP comparison with hysteresis and time-to-trigger versus a
//!   tracker look-ahead that prepares the predicted target cell.

use std::collections::{BTreeMap, VecDeque};
use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{Matrix3, Matrix4, SMatrix, Vector3, Vector4};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{IsacError, Result};
use crate::nr_grid::{self, GridSpec, ReLabel};
use crate::seed;

type Matrix3x4 = SMatrix<f64, 3, 4>;

fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

fn rotate(v: [f64; 2], a: f64) -> [f64; 2] {
    let (s, c) = a.sin_cos();
    [v[0] * c - v[1] * s, v[0] * s + v[1] * c]
}

/// Displacement after `tau` seconds at constant turn rate `omega` (CCW positive).
fn arc_displacement(v: [f64; 2], omega: f64, tau: f64) -> [f64; 2] {
    if omega.abs() < 1e-12 {
        return [v[0] * tau, v[1] * tau];
    }
    let (s, c) = (omega * tau).sin_cos();
    let jv = [-v[1], v[0]];
    [(s * v[0] + (1.0 - c) * jv[0]) / omega, (s * v[1] + (1.0 - c) * jv[1]) / omega]
}

fn add(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] + b[0], a[1] + b[1]]
}

fn scale(a: [f64; 2], s: f64) -> [f64; 2] {
    [a[0] * s, a[1] * s]
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Maneuver {
    #[default]
    Straight,
    /// Constant-rate turn (CCW positive) over `[start_s, start_s + duration_s]`.
    Turn {
        rate_rad_s: f64,
        start_s: f64,
        duration_s: f64,
    },
    /// Sinusoidal lateral offset around the straight path.
    Weave { amplitude_m: f64, period_s: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleConfig {
    pub position_m: [f64; 2],
    pub velocity_mps: [f64; 2],
    #[serde(default)]
    pub maneuver: Maneuver,
}

impl VehicleConfig {
    /// True position and velocity at time `t` seconds.
    pub fn state_at(&self, t: f64) -> ([f64; 2], [f64; 2]) {
        let (p0, v) = (self.position_m, self.velocity_mps);
        match self.maneuver {
            Maneuver::Straight => (add(p0, scale(v, t)), v),
            Maneuver::Turn {
                rate_rad_s,
                start_s,
                duration_s,
            } => {
                if t <= start_s {
                    return (add(p0, scale(v, t)), v);
                }
                let ps = add(p0, scale(v, start_s));
                let tau = (t - start_s).min(duration_s);
                let p = add(ps, arc_displacement(v, rate_rad_s, tau));
                let vt = rotate(v, rate_rad_s * tau);
                let rest = (t - start_s - duration_s).max(0.0);
                (add(p, scale(vt, rest)), vt)
            }
            Maneuver::Weave { amplitude_m, period_s } => {
                let speed = v[0].hypot(v[1]);
                let n = if speed > 0.0 { [-v[1] / speed, v[0] / speed] } else { [0.0, 1.0] };
                let w = 2.0 * PI / period_s;
                let p = add(add(p0, scale(v, t)), scale(n, amplitude_m * (w * t).sin()));
                let vel = add(v, scale(n, amplitude_m * w * (w * t).cos()));
                (p, vel)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub t_s: f64,
    pub range_m: f64,
    /// Bearing from the sensor, `atan2(dy, dx)`.
    pub angle_rad: f64,
    pub radial_velocity_mps: f64,
}

impl Observation {
    pub fn exact(t_s: f64, sensor: [f64; 2], position: [f64; 2], velocity: [f64; 2]) -> Self {
        let d = [position[0] - sensor[0], position[1] - sensor[1]];
        let r = d[0].hypot(d[1]);
        Observation {
            t_s,
            range_m: r,
            angle_rad: d[1].atan2(d[0]),
            radial_velocity_mps: if r > 0.0 { (d[0] * velocity[0] + d[1] * velocity[1]) / r } else { 0.0 },
        }
    }

    fn perturbed<R: Rng + ?Sized>(mut self, cfg: &TrackerConfig, rng: &mut R) -> Self {
        let g = |rng: &mut R| -> f64 { rng.sample(StandardNormal) };
        self.range_m += cfg.sigma_range_m * g(rng);
        self.angle_rad += cfg.sigma_angle_deg.to_radians() * g(rng);
        self.radial_velocity_mps += cfg.sigma_velocity_mps * g(rng);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrackerConfig {
    pub sigma_range_m: f64,
    pub sigma_angle_deg: f64,
    pub sigma_velocity_mps: f64,
    /// White-acceleration spectral density, m²/s³.
    pub process_noise: f64,
    /// Lower bound on each measurement variance.
    pub variance_floor: f64,
    /// χ²(3) gate on the normalized innovation; 14.16 is the 3σ point.
    pub nis_threshold: f64,
    pub confirm_updates: usize,
    pub hold_updates: usize,
    /// Process-noise multiplier while a maneuver is flagged.
    pub maneuver_scale: f64,
    pub initial_speed_sigma_mps: f64,
    /// Track states used for the turn-rate estimate.
    pub turn_window: usize,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            sigma_range_m: 0.5,
            sigma_angle_deg: 0.5,
            sigma_velocity_mps: 0.2,
            process_noise: 0.5,
            variance_floor: 1e-12,
            nis_threshold: 14.16,
            confirm_updates: 2,
            hold_updates: 10,
            maneuver_scale: 100.0,
            initial_speed_sigma_mps: 30.0,
            turn_window: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrackState {
    pub t_s: f64,
    pub position: [f64; 2],
    pub velocity: [f64; 2],
    /// Normalized innovation squared of the update that produced this state.
    pub nis: f64,
    pub maneuver: bool,
    pub turn_rate_rad_s: f64,
}

impl TrackState {
    /// Constant-velocity extrapolation.
    pub fn predict(&self, horizon_s: f64) -> [f64; 2] {
        add(self.position, scale(self.velocity, horizon_s))
    }

    /// Constant-turn extrapolation with the estimated turn rate.
    pub fn predict_turning(&self, horizon_s: f64) -> [f64; 2] {
        add(self.position, arc_displacement(self.velocity, self.turn_rate_rad_s, horizon_s))
    }

    /// CT prediction while a maneuver is flagged, CV otherwise.
    pub fn predict_adaptive(&self, horizon_s: f64) -> [f64; 2] {
        if self.maneuver {
            self.predict_turning(horizon_s)
        } else {
            self.predict(horizon_s)
        }
    }
}

/// Constant-velocity EKF on range, bearing and radial velocity.
#[derive(Debug, Clone)]
pub struct Tracker {
    sensor: [f64; 2],
    cfg: TrackerConfig,
    x: Vector4<f64>,
    p: Matrix4<f64>,
    t: f64,
    started: bool,
    exceed: usize,
    quiet: usize,
    maneuver: bool,
    headings: VecDeque<(f64, f64)>,
}

impl Tracker {
    pub fn new(sensor: [f64; 2], cfg: TrackerConfig) -> Self {
        Tracker {
            sensor,
            cfg,
            x: Vector4::zeros(),
            p: Matrix4::identity(),
            t: 0.0,
            started: false,
            exceed: 0,
            quiet: 0,
            maneuver: false,
            headings: VecDeque::new(),
        }
    }

    fn r_diag(&self) -> Vector3<f64> {
        let f = self.cfg.variance_floor;
        Vector3::new(
            self.cfg.sigma_range_m.powi(2).max(f),
            self.cfg.sigma_angle_deg.to_radians().powi(2).max(f),
            self.cfg.sigma_velocity_mps.powi(2).max(f),
        )
    }

    fn initialize(&mut self, z: &Observation) {
        let (s, c) = z.angle_rad.sin_cos();
        let u = [c, s];
        let tan = [-s, c];
        let r = self.r_diag();
        self.x = Vector4::new(
            self.sensor[0] + z.range_m * c,
            self.sensor[1] + z.range_m * s,
            z.radial_velocity_mps * c,
            z.radial_velocity_mps * s,
        );
        let outer = |a: [f64; 2], b: [f64; 2]| nalgebra::Matrix2::new(a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]);
        let pos = outer(u, u) * r[0] + outer(tan, tan) * (z.range_m.powi(2) * r[1]).max(self.cfg.variance_floor);
        let vel = outer(u, u) * r[2] + outer(tan, tan) * self.cfg.initial_speed_sigma_mps.powi(2);
        self.p = Matrix4::zeros();
        self.p.fixed_view_mut::<2, 2>(0, 0).copy_from(&pos);
        self.p.fixed_view_mut::<2, 2>(2, 2).copy_from(&vel);
        self.t = z.t_s;
        self.started = true;
    }

    fn predict_to(&mut self, t: f64) {
        let dt = t - self.t;
        if dt <= 0.0 {
            return;
        }
        let mut f = Matrix4::identity();
        f[(0, 2)] = dt;
        f[(1, 3)] = dt;
        let q = self.cfg.process_noise * if self.maneuver { self.cfg.maneuver_scale } else { 1.0 };
        let (a, b, c) = (dt.powi(3) / 3.0 * q, dt.powi(2) / 2.0 * q, dt * q);
        let qm = Matrix4::new(a, 0.0, b, 0.0, 0.0, a, 0.0, b, b, 0.0, c, 0.0, 0.0, b, 0.0, c);
        self.x = f * self.x;
        self.p = f * self.p * f.transpose() + qm;
        self.t = t;
    }

    fn state(&self, nis: f64) -> TrackState {
        let turn_rate = match (self.headings.front(), self.headings.back()) {
            (Some(a), Some(b)) if b.0 > a.0 => wrap_angle(b.1 - a.1) / (b.0 - a.0),
            _ => 0.0,
        };
        TrackState {
            t_s: self.t,
            position: [self.x[0], self.x[1]],
            velocity: [self.x[2], self.x[3]],
            nis,
            maneuver: self.maneuver,
            turn_rate_rad_s: turn_rate,
        }
    }

    pub fn update(&mut self, z: &Observation) -> TrackState {
        if !self.started {
            self.initialize(z);
            self.headings.push_back((self.t, self.x[3].atan2(self.x[2])));
            return self.state(0.0);
        }
        self.predict_to(z.t_s);
        let (dx, dy) = (self.x[0] - self.sensor[0], self.x[1] - self.sensor[1]);
        let r = dx.hypot(dy).max(1e-9);
        let (vx, vy) = (self.x[2], self.x[3]);
        let vr = (dx * vx + dy * vy) / r;
        let h = Vector3::new(r, dy.atan2(dx), vr);
        let jac = Matrix3x4::new(
            dx / r,
            dy / r,
            0.0,
            0.0,
            -dy / (r * r),
            dx / (r * r),
            0.0,
            0.0,
            (vx - vr * dx / r) / r,
            (vy - vr * dy / r) / r,
            dx / r,
            dy / r,
        );
        let mut nu = Vector3::new(z.range_m, z.angle_rad, z.radial_velocity_mps) - h;
        nu[1] = wrap_angle(nu[1]);
        let rm = Matrix3::from_diagonal(&self.r_diag());
        let s = jac * self.p * jac.transpose() + rm;
        let s_inv = s.try_inverse().unwrap_or_else(Matrix3::identity);
        let k = self.p * jac.transpose() * s_inv;
        self.x += k * nu;
        let ikh = Matrix4::identity() - k * jac;
        self.p = ikh * self.p * ikh.transpose() + k * rm * k.transpose();
        let nis = (nu.transpose() * s_inv * nu)[(0, 0)];

        if nis > self.cfg.nis_threshold {
            self.exceed += 1;
            self.quiet = 0;
            if self.exceed >= self.cfg.confirm_updates {
                self.maneuver = true;
            }
        } else {
            self.exceed = 0;
            self.quiet += 1;
            if self.quiet >= self.cfg.hold_updates {
                self.maneuver = false;
            }
        }
        self.headings.push_back((self.t, self.x[3].atan2(self.x[2])));
        while self.headings.len() > self.cfg.turn_window.max(2) {
            self.headings.pop_front();
        }
        self.state(nis)
    }
}

/// Runs the tracker over an observation stream.
pub fn track_vehicle(observations: &[Observation], sensor: [f64; 2], cfg: &TrackerConfig) -> Result<Vec<TrackState>> {
    if observations.is_empty() {
        return Err(IsacError::Empty("observations"));
    }
    let mut tracker = Tracker::new(sensor, cfg.clone());
    Ok(observations.iter().map(|z| tracker.update(z)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GnbConfig {
    pub position_m: [f64; 2],
    #[serde(default = "d64")]
    pub n_beams: usize,
    #[serde(default = "d64")]
    pub n_antennas: usize,
    /// Codebook half-coverage around boresight.
    #[serde(default = "d60")]
    pub sector_deg: f64,
    #[serde(default)]
    pub boresight_deg: f64,
}

fn d64() -> usize {
    64
}

fn d60() -> f64 {
    60.0
}

impl GnbConfig {
    /// Angle of `p` from boresight.
    pub fn angle_of(&self, p: [f64; 2]) -> f64 {
        let a = (p[1] - self.position_m[1]).atan2(p[0] - self.position_m[0]);
        wrap_angle(a - self.boresight_deg.to_radians())
    }

    /// DFT codebook directions in sine space: `sin(sector)·(2b − N + 1)/N`.
    pub fn beam_sines(&self) -> Vec<f64> {
        let n = self.n_beams as f64;
        let s = self.sector_deg.to_radians().sin();
        (0..self.n_beams).map(|b| s * (2.0 * b as f64 - n + 1.0) / n).collect()
    }

    pub fn beam_spacing(&self) -> f64 {
        2.0 * self.sector_deg.to_radians().sin() / self.n_beams as f64
    }

    /// Null-to-null half width of a broadside beam in sine space.
    pub fn beamwidth_rad(&self) -> f64 {
        (2.0 / self.n_antennas as f64).asin()
    }

    pub fn nearest_beam(&self, angle: f64) -> usize {
        nearest_beams(&self.beam_sines(), angle.sin(), 1)[0]
    }

    /// Half-wavelength ULA gain toward `angle` when steered to `steer`; peaks at `n_antennas`.
    pub fn array_gain(&self, angle: f64, steer: f64) -> f64 {
        let psi = PI * (angle.sin() - steer.sin());
        let sum: Complex64 = (0..self.n_antennas)
            .map(|n| Complex64::from_polar(1.0, psi * n as f64))
            .sum();
        sum.norm_sqr() / self.n_antennas as f64
    }

    fn check_coverage(&self, angle: f64) -> Result<()> {
        if angle.abs() > self.sector_deg.to_radians() + 1e-12 {
            return Err(IsacError::Coverage {
                angle_deg: angle.to_degrees(),
                coverage_deg: self.sector_deg,
            });
        }
        Ok(())
    }
}

fn nearest_beams(sines: &[f64], u: f64, k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..sines.len()).collect();
    idx.sort_by(|&a, &b| (sines[a] - u).abs().total_cmp(&(sines[b] - u).abs()).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimingConfig {
    pub scs_khz: u32,
    pub ssb_period_ms: f64,
    pub burst_window_ms: f64,
    pub n_ssb: usize,
    pub ssb_per_slot: usize,
}

impl Default for TimingConfig {
    fn default() -> Self {
        TimingConfig {
            scs_khz: 120,
            ssb_period_ms: 20.0,
            burst_window_ms: 5.0,
            n_ssb: 64,
            ssb_per_slot: 2,
        }
    }
}

impl TimingConfig {
    pub fn slot_ms(&self) -> Result<f64> {
        nr_grid::slot_duration_ms(self.scs_khz)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkConfig {
    pub tx_power_dbm: f64,
    pub noise_dbm: f64,
    /// Path loss at 1 m.
    pub ref_loss_db: f64,
    pub pathloss_exponent: f64,
    pub rate_cap_bps_hz: f64,
    /// Rician K-factor in dB for per-slot block fading; `None` disables fading.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rician_k_db: Option<f64>,
}

impl Default for LinkConfig {
    fn default() -> Self {
        LinkConfig {
            tx_power_dbm: 30.0,
            noise_dbm: -70.0,
            ref_loss_db: 70.0,
            pathloss_exponent: 2.0,
            rate_cap_bps_hz: 7.6,
            rician_k_db: None,
        }
    }
}

impl LinkConfig {
    pub fn rx_power_dbm(&self, distance_m: f64) -> f64 {
        self.tx_power_dbm - self.ref_loss_db - 10.0 * self.pathloss_exponent * distance_m.max(1.0).log10()
    }

    pub fn snr_db(&self, distance_m: f64, gain: f64) -> f64 {
        self.rx_power_dbm(distance_m) - self.noise_dbm + 10.0 * gain.max(1e-30).log10()
    }

    /// Power gains `|h|²` for `n` fading blocks (all ones without fading).
    pub fn fading_gains<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        let Some(k_db) = self.rician_k_db else {
            return vec![1.0; n];
        };
        let k = 10f64.powf(k_db / 10.0);
        let los = (k / (k + 1.0)).sqrt();
        let nlos = (0.5 / (k + 1.0)).sqrt();
        (0..n)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(los + nlos * re, nlos * im).norm_sqr()
            })
            .collect()
    }

    pub fn rate(&self, snr_db: f64) -> f64 {
        (1.0 + 10f64.powf(snr_db / 10.0)).log2().min(self.rate_cap_bps_hz)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialAccessConfig {
    /// Expected wait for the next burst as a fraction of the SSB period.
    pub mean_wait_fraction: f64,
    /// Time to obtain the sensed angle from payload echoes.
    pub acquisition_ms: f64,
    pub angle_uncertainty_deg: f64,
    /// Overrides the count derived from the angle uncertainty.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub candidate_beams: Option<usize>,
    /// Standard deviation of the sensed angle.
    pub sensing_sigma_deg: f64,
}

impl Default for InitialAccessConfig {
    fn default() -> Self {
        InitialAccessConfig {
            mean_wait_fraction: 0.5,
            acquisition_ms: 1.0,
            angle_uncertainty_deg: 3.0,
            candidate_beams: None,
            sensing_sigma_deg: 0.3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Blockage {
    pub start_ms: f64,
    pub duration_ms: f64,
    #[serde(default = "d20")]
    pub attenuation_db: f64,
}

fn d20() -> f64 {
    20.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BeamFailureConfig {
    pub bfi_period_ms: f64,
    pub bfi_max_count: usize,
    /// Consecutive anomalous sensing slots before declaring failure.
    pub confirm_slots: usize,
    /// Drop below nominal that counts as an indication.
    pub threshold_drop_db: f64,
    pub rsrp_sigma_db: f64,
    pub echo_sigma_db: f64,
    pub window_ms: f64,
    pub baseline_recovery_ms: f64,
    pub sensing_recovery_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blockage: Option<Blockage>,
}

impl Default for BeamFailureConfig {
    fn default() -> Self {
        BeamFailureConfig {
            bfi_period_ms: 1.25,
            bfi_max_count: 4,
            confirm_slots: 20,
            threshold_drop_db: 10.0,
            rsrp_sigma_db: 1.0,
            echo_sigma_db: 1.0,
            window_ms: 40.0,
            baseline_recovery_ms: 2.0,
            sensing_recovery_ms: 0.125,
            blockage: Some(Blockage {
                start_ms: 10.0,
                duration_ms: 20.0,
                attenuation_db: 20.0,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectedConfig {
    #[serde(default = "d100")]
    pub duration_ms: f64,
    /// Allocation whose CSI-RS share the sensing mode omits.
    pub grid: GridSpec,
    /// Uplink CSI feedback share, paid only when CSI-RS is configured.
    #[serde(default)]
    pub feedback_fraction: f64,
    /// Baseline beam realignment period.
    #[serde(default = "d80")]
    pub csi_period_slots: usize,
    /// Sensing observation period.
    #[serde(default = "d1")]
    pub sensing_period_slots: usize,
    /// Both modes steer to the true angle every slot.
    #[serde(default)]
    pub ideal_alignment: bool,
}

fn d100() -> f64 {
    100.0
}

fn d80() -> usize {
    80
}

fn d1() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HandoverConfig {
    pub vehicle: VehicleConfig,
    /// Cell sites; cell 0 serves first. Coverage is nearest-site.
    pub cells: Vec<[f64; 2]>,
    #[serde(default = "d160")]
    pub ttt_ms: f64,
    #[serde(default = "d3")]
    pub hysteresis_db: f64,
    #[serde(default = "d1500")]
    pub look_ahead_ms: f64,
    #[serde(default = "d10")]
    pub update_ms: f64,
    #[serde(default = "d12")]
    pub duration_s: f64,
    #[serde(default = "d20")]
    pub preparation_ms: f64,
    #[serde(default = "d30")]
    pub execution_ms: f64,
    #[serde(default = "d1f")]
    pub rsrp_sigma_db: f64,
}

fn d160() -> f64 {
    160.0
}

fn d3() -> f64 {
    3.0
}

fn d1500() -> f64 {
    1500.0
}

fn d10() -> f64 {
    10.0
}

fn d12() -> f64 {
    12.0
}

fn d30() -> f64 {
    30.0
}

fn d1f() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct V2iScenario {
    #[serde(default)]
    pub name: String,
    /// Free-text provenance of the calibration constants.
    #[serde(default)]
    pub description: String,
    pub vehicle: VehicleConfig,
    pub gnb: GnbConfig,
    #[serde(default)]
    pub timing: TimingConfig,
    #[serde(default)]
    pub link: LinkConfig,
    #[serde(default)]
    pub tracking: TrackerConfig,
    #[serde(default)]
    pub initial_access: InitialAccessConfig,
    #[serde(default)]
    pub beam_failure: BeamFailureConfig,
    pub connected: ConnectedConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub handover: Option<HandoverConfig>,
    #[serde(default)]
    pub seed: u64,
}

impl V2iScenario {
    pub fn validate(&self) -> Result<()> {
        let t = &self.timing;
        if t.n_ssb == 0 || t.n_ssb > nr_grid::MAX_SSB {
            return Err(IsacError::invalid("n_ssb", "must lie in 1..=64"));
        }
        if !(t.burst_window_ms > 0.0 && t.burst_window_ms <= t.ssb_period_ms) {
            return Err(IsacError::invalid("burst_window_ms", "need 0 < window <= ssb_period"));
        }
        if t.ssb_per_slot == 0 {
            return Err(IsacError::invalid("ssb_per_slot", "must be >= 1"));
        }
        t.slot_ms()?;
        if self.gnb.n_beams == 0 || self.gnb.n_antennas == 0 {
            return Err(IsacError::invalid("gnb", "needs at least one beam and one antenna"));
        }
        if self.gnb.n_beams != t.n_ssb {
            return Err(IsacError::invalid("n_beams", "one SSB per codebook beam is assumed"));
        }
        if self.connected.csi_period_slots == 0 || self.connected.sensing_period_slots == 0 {
            return Err(IsacError::invalid("connected", "periods must be >= 1 slot"));
        }
        Ok(())
    }
}

const SCENARIO_PRESETS: [(&str, &str); 1] = [("paper-fr2-120khz", include_str!("../presets/paper-fr2-120khz.json"))];

pub fn scenario_preset_names() -> Vec<&'static str> {
    SCENARIO_PRESETS.iter().map(|(n, _)| *n).collect()
}

pub fn scenario_preset(name: &str) -> Result<V2iScenario> {
    let (_, text) = SCENARIO_PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| IsacError::invalid("preset", format!("unknown scenario preset `{name}`")))?;
    serde_json::from_str(text).map_err(|e| IsacError::invalid("preset", e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    InitialAccess,
    Connected,
    BeamFailure,
    Handover,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::InitialAccess => "initial_access",
            Stage::Connected => "connected",
            Stage::BeamFailure => "beam_failure",
            Stage::Handover => "handover",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Baseline,
    SensingAssisted,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Baseline => "baseline",
            Mode::SensingAssisted => "sensing_assisted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Event {
    pub t_ms: f64,
    pub kind: String,
    pub detail: String,
}

fn event(t_ms: f64, kind: &str, detail: impl Into<String>) -> Event {
    Event {
        t_ms,
        kind: kind.to_string(),
        detail: detail.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageResult {
    pub stage: Stage,
    pub mode: Mode,
    pub latency_ms: f64,
    pub overhead_fraction: f64,
    pub throughput_rel: f64,
    /// Time-ordered event log.
    pub events: Vec<Event>,
    /// Per-slot throughput in bit/s/Hz (connected stage only).
    pub trace: Vec<f64>,
    pub notes: BTreeMap<String, f64>,
}

impl StageResult {
    fn new(stage: Stage, mode: Mode) -> Self {
        StageResult {
            stage,
            mode,
            latency_ms: 0.0,
            overhead_fraction: 0.0,
            throughput_rel: 1.0,
            events: Vec::new(),
            trace: Vec::new(),
            notes: BTreeMap::new(),
        }
    }

    fn finish(mut self) -> Self {
        self.events.sort_by(|a, b| a.t_ms.total_cmp(&b.t_ms));
        self
    }

    pub fn note(&self, key: &str) -> Option<f64> {
        self.notes.get(key).copied()
    }
}

/// `100 · (1 − sensing / baseline)`.
pub fn reduction_pct(baseline: f64, sensing: f64) -> f64 {
    if baseline <= 0.0 {
        return 0.0;
    }
    100.0 * (1.0 - sensing / baseline)
}

/// One JSON object per event, tagged with its stage and mode.
pub fn write_events_jsonl<W: Write>(results: &[StageResult], mut w: W) -> std::io::Result<()> {
    #[derive(Serialize)]
    struct Line<'a> {
        stage: Stage,
        mode: Mode,
        #[serde(flatten)]
        event: &'a Event,
    }
    for r in results {
        for e in &r.events {
            let line = serde_json::to_string(&Line {
                stage: r.stage,
                mode: r.mode,
                event: e,
            })
            .map_err(std::io::Error::other)?;
            writeln!(w, "{line}")?;
        }
    }
    Ok(())
}

/// Beams swept by the sensing-assisted search.
pub fn candidate_beam_count(scn: &V2iScenario) -> usize {
    let ia = &scn.initial_access;
    let k = ia.candidate_beams.unwrap_or_else(|| {
        let width = 2.0 * ia.angle_uncertainty_deg.to_radians().sin();
        (width / scn.gnb.beam_spacing() - 1e-9).ceil() as usize
    });
    k.clamp(1, scn.timing.n_ssb)
}

/// Calibrated initial-access latency for `swept` beams.
pub fn initial_access_latency_ms(scn: &V2iScenario, mode: Mode, swept: usize) -> Result<f64> {
    let t = &scn.timing;
    let baseline = |b: usize| t.ssb_period_ms * scn.initial_access.mean_wait_fraction + t.burst_window_ms * b as f64 / t.n_ssb as f64;
    Ok(match mode {
        Mode::Baseline => baseline(swept),
        Mode::SensingAssisted if swept >= t.n_ssb => baseline(t.n_ssb),
        Mode::SensingAssisted => {
            let slots = swept.div_ceil(t.ssb_per_slot) as f64;
            (scn.initial_access.acquisition_ms + slots * t.slot_ms()?).min(baseline(t.n_ssb))
        }
    })
}

pub fn simulate_initial_access(scn: &V2iScenario, mode: Mode) -> Result<StageResult> {
    scn.validate()?;
    let mut res = StageResult::new(Stage::InitialAccess, mode);
    let (pos, _) = scn.vehicle.state_at(0.0);
    let angle = scn.gnb.angle_of(pos);
    scn.gnb.check_coverage(angle)?;
    let n = scn.timing.n_ssb;
    let best = scn.gnb.nearest_beam(angle);
    res.notes.insert("best_beam".into(), best as f64);
    let wait = scn.timing.ssb_period_ms * scn.initial_access.mean_wait_fraction;
    match mode {
        Mode::Baseline => {
            res.latency_ms = initial_access_latency_ms(scn, mode, n)?;
            res.events.push(event(0.0, "access_start", "waiting for SSB burst"));
            res.events.push(event(wait, "sweep_start", format!("{n} beams")));
            res.events.push(event(res.latency_ms, "beam_selected", format!("beam {best}")));
            res.notes.insert("swept_beams".into(), n as f64);
            res.notes.insert("candidate_beams".into(), n as f64);
            res.notes.insert("hit".into(), 1.0);
        }
        Mode::SensingAssisted => {
            let mut rng = seed::rng_for(scn.seed, 1);
            let noise: f64 = rng.sample(StandardNormal);
            let sensed = angle + scn.initial_access.sensing_sigma_deg.to_radians() * noise;
            let k = candidate_beam_count(scn);
            let candidates = nearest_beams(&scn.gnb.beam_sines(), sensed.sin(), k);
            let hit = candidates.contains(&best);
            let sensing = initial_access_latency_ms(scn, mode, k)?;
            res.events.push(event(0.0, "access_start", "sensing payload echoes"));
            res.events.push(event(
                scn.initial_access.acquisition_ms.min(sensing),
                "angle_sensed",
                format!("{:.3} deg, {k} candidate beams", sensed.to_degrees()),
            ));
            if hit {
                res.latency_ms = sensing;
                res.notes.insert("swept_beams".into(), k as f64);
                res.events.push(event(sensing, "beam_selected", format!("beam {best}")));
            } else {
                res.latency_ms = sensing + initial_access_latency_ms(scn, Mode::Baseline, n)?;
                res.notes.insert("swept_beams".into(), n as f64);
                res.events.push(event(sensing, "candidates_missed", "falling back to full sweep"));
                res.events.push(event(res.latency_ms, "beam_selected", format!("beam {best}")));
            }
            res.notes.insert("candidate_beams".into(), k as f64);
            res.notes.insert("hit".into(), if hit { 1.0 } else { 0.0 });
        }
    }
    res.overhead_fraction = res.notes["swept_beams"] / n as f64;
    Ok(res.finish())
}

/// Counts consecutive below-threshold measurements; returns declaration times.
fn indication_run(
    period_ms: f64,
    count: usize,
    window_ms: f64,
    drop_db: f64,
    sigma_db: f64,
    blockage: Option<&Blockage>,
    rng: &mut impl Rng,
) -> Vec<f64> {
    let periods = (window_ms / period_ms).floor() as usize;
    let mut run = 0;
    let mut declared = Vec::new();
    for j in 0..periods {
        let (a, b) = (j as f64 * period_ms, (j + 1) as f64 * period_ms);
        let blocked = blockage.map_or(0.0, |bl| {
            let overlap = (b.min(bl.start_ms + bl.duration_ms) - a.max(bl.start_ms)).max(0.0);
            overlap / period_ms * bl.attenuation_db
        });
        let noise: f64 = rng.sample(StandardNormal);
        let level = -blocked + sigma_db * noise;
        if level < -drop_db {
            run += 1;
            if run == count {
                declared.push(b);
            }
        } else {
            run = 0;
        }
    }
    declared
}

pub fn simulate_beam_failure(scn: &V2iScenario, mode: Mode) -> Result<StageResult> {
    scn.validate()?;
    let cfg = &scn.beam_failure;
    let mut res = StageResult::new(Stage::BeamFailure, mode);
    let mut rng = seed::rng_for(scn.seed, 2);
    let (period, count, sigma, recovery) = match mode {
        Mode::Baseline => (cfg.bfi_period_ms, cfg.bfi_max_count, cfg.rsrp_sigma_db, cfg.baseline_recovery_ms),
        Mode::SensingAssisted => (scn.timing.slot_ms()?, cfg.confirm_slots, cfg.echo_sigma_db, cfg.sensing_recovery_ms),
    };
    if count == 0 || !(period > 0.0) {
        return Err(IsacError::invalid("beam_failure", "indication count and period must be positive"));
    }
    let declared = indication_run(period, count, cfg.window_ms, cfg.threshold_drop_db, sigma, cfg.blockage.as_ref(), &mut rng);
    let start = cfg.blockage.map(|b| b.start_ms);
    if let Some(b) = &cfg.blockage {
        res.events.push(event(b.start_ms, "blockage_start", format!("{} dB", b.attenuation_db)));
        res.events.push(event(b.start_ms + b.duration_ms, "blockage_end", ""));
    }
    let mut false_alarms = 0;
    let mut detection = None;
    for &t in &declared {
        match start {
            Some(s) if t > s && detection.is_none() => detection = Some(t),
            Some(_) if detection.is_some() => {}
            _ => false_alarms += 1,
        }
        res.events.push(event(t, "failure_declared", mode.as_str()));
    }
    if let (Some(s), Some(t)) = (start, detection) {
        res.latency_ms = t - s;
        res.events.push(event(t + recovery, "recovered", "switched to candidate beam"));
        res.notes.insert("outage_ms".into(), res.latency_ms + recovery);
        res.notes.insert("detected".into(), 1.0);
    } else {
        res.notes.insert("detected".into(), 0.0);
    }
    res.notes.insert("false_alarms".into(), false_alarms as f64);
    res.notes.insert("declarations".into(), declared.len() as f64);
    Ok(res.finish())
}

/// DATA share per mode: `(baseline, sensing, csirs_share)`.
fn data_fractions(cfg: &ConnectedConfig) -> Result<(f64, f64, f64)> {
    let grid = cfg.grid.build()?;
    let allocation = (grid.len() - grid.reserved_count()) as f64;
    let pilots = nr_grid::pilot_fraction(&grid);
    let csirs = grid.count(ReLabel::Csirs) as f64 / allocation;
    if csirs == 0.0 {
        let d = 1.0 - pilots;
        return Ok((d, d, 0.0));
    }
    Ok((1.0 - pilots - cfg.feedback_fraction, 1.0 - (pilots - csirs), csirs))
}

/// Steering angles per slot for the baseline (CSI-period) and sensing (tracker) policies.
fn steering_traces(scn: &V2iScenario, slots: usize, slot_s: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let cfg = &scn.connected;
    let mut rng = seed::rng_for(scn.seed, 3);
    let mut tracker = Tracker::new(scn.gnb.position_m, scn.tracking.clone());
    let mut last: Option<TrackState> = None;
    let mut truth = Vec::with_capacity(slots);
    let mut base = Vec::with_capacity(slots);
    let mut sens = Vec::with_capacity(slots);
    let mut csi_angle = 0.0;
    for s in 0..slots {
        let t = s as f64 * slot_s;
        let (p, v) = scn.vehicle.state_at(t);
        let angle = scn.gnb.angle_of(p);
        truth.push(angle);
        if s % cfg.csi_period_slots == 0 {
            csi_angle = angle;
        }
        base.push(csi_angle);
        if s % cfg.sensing_period_slots == 0 {
            let z = Observation::exact(t, scn.gnb.position_m, p, v).perturbed(&scn.tracking, &mut rng);
            last = Some(tracker.update(&z));
        }
        let st = last.expect("first slot always observes");
        sens.push(scn.gnb.angle_of(st.predict(t - st.t_s)));
    }
    (truth, base, sens)
}

pub fn simulate_connected(scn: &V2iScenario, mode: Mode, duration_ms: f64) -> Result<StageResult> {
    scn.validate()?;
    let slot_ms = scn.timing.slot_ms()?;
    let slots = (duration_ms / slot_ms + 1e-9).floor() as usize;
    if slots == 0 {
        return Err(IsacError::invalid("duration_ms", "must cover at least one slot"));
    }
    let cfg = &scn.connected;
    let (data_b, data_s, csirs) = data_fractions(cfg)?;
    let (truth, base, sens) = steering_traces(scn, slots, slot_ms * 1e-3);
    // Both modes see the same fading draw.
    let fading = scn.link.fading_gains(slots, &mut seed::rng_for(scn.seed, 4));
    let rate = |s: usize, steer: f64| {
        let (p, _) = scn.vehicle.state_at(s as f64 * slot_ms * 1e-3);
        let d = distance(p, scn.gnb.position_m);
        scn.link.rate(scn.link.snr_db(d, fading[s] * scn.gnb.array_gain(truth[s], steer)))
    };
    let baseline_steer = if cfg.ideal_alignment { &truth } else { &base };
    let sensing_steer = if cfg.ideal_alignment || csirs == 0.0 { baseline_steer } else { &sens };
    let rate_b: Vec<f64> = (0..slots).map(|s| rate(s, baseline_steer[s])).collect();
    let (steer, data) = match mode {
        Mode::Baseline => (baseline_steer, data_b),
        Mode::SensingAssisted => (sensing_steer, data_s),
    };
    let rate_m: Vec<f64> = (0..slots).map(|s| rate(s, steer[s])).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let mut res = StageResult::new(Stage::Connected, mode);
    res.overhead_fraction = 1.0 - data;
    res.throughput_rel = data * mean(&rate_m) / mean(&rate_b);
    res.trace = rate_m.iter().map(|r| r * data).collect();
    res.notes.insert("data_fraction".into(), data);
    res.notes.insert("delta_overhead".into(), data_s - data_b);
    res.notes.insert("csirs_fraction".into(), csirs);
    res.notes.insert("mean_rate".into(), mean(&rate_m));
    res.notes.insert("baseline_mean_rate".into(), mean(&rate_b));
    res.notes.insert(
        "mean_pointing_error_deg".into(),
        mean(&truth.iter().zip(steer).map(|(a, b)| (a - b).abs().to_degrees()).collect::<Vec<_>>()),
    );
    res.events.push(event(0.0, "connected_start", format!("{slots} slots")));
    if mode == Mode::Baseline && csirs > 0.0 && !cfg.ideal_alignment {
        for s in (0..slots).step_by(cfg.csi_period_slots) {
            res.events.push(event(s as f64 * slot_ms, "beam_realigned", "CSI report"));
        }
    }
    res.events.push(event(slots as f64 * slot_ms, "connected_end", ""));
    Ok(res.finish())
}

fn nearest_cell(p: [f64; 2], cells: &[[f64; 2]]) -> usize {
    let mut best = 0;
    for (i, c) in cells.iter().enumerate() {
        if distance(p, *c) < distance(p, cells[best]) {
            best = i;
        }
    }
    best
}

/// Handover timeline for one mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HandoverReport {
    /// First update at which the vehicle is nearest to another cell.
    pub crossing_s: Option<f64>,
    pub target_cell: Option<usize>,
    /// Baseline trigger (RSRP + hysteresis held for TTT).
    pub trigger_s: Option<f64>,
    pub trigger_cell: Option<usize>,
    /// Cell prepared by the predictive logic at the crossing and when that preparation began.
    pub prepared_cell: Option<usize>,
    pub prepared_s: Option<f64>,
    pub preceded_crossing: bool,
    pub interruption_ms: f64,
    pub events: Vec<Event>,
}

pub fn run_handover(scn: &V2iScenario, mode: Mode) -> Result<HandoverReport> {
    let cfg = scn
        .handover
        .as_ref()
        .ok_or_else(|| IsacError::invalid("handover", "scenario has no handover block"))?;
    if cfg.cells.len() < 2 {
        return Err(IsacError::invalid("cells", "handover needs at least two cells"));
    }
    if !(cfg.update_ms > 0.0) {
        return Err(IsacError::invalid("update_ms", "must be > 0"));
    }
    let dt = cfg.update_ms * 1e-3;
    let steps = (cfg.duration_s / dt).floor() as usize;
    let serving = 0;
    let mut rsrp_rng = seed::rng_for(scn.seed, 40);
    let mut obs_rng = seed::rng_for(scn.seed, 41);
    let mut tracker = Tracker::new(cfg.cells[serving], scn.tracking.clone());
    let look_steps = (cfg.look_ahead_ms / cfg.update_ms).round() as usize;

    let mut crossing = None;
    let mut trigger: Option<(f64, usize)> = None;
    let mut held_since: Option<f64> = None;
    let mut prepared: Option<(usize, f64)> = None;
    let mut events = Vec::new();

    for i in 0..=steps {
        let t = i as f64 * dt;
        let (p, v) = cfg.vehicle.state_at(t);
        let nearest = nearest_cell(p, &cfg.cells);
        if crossing.is_none() && nearest != serving {
            crossing = Some((t, nearest));
            events.push(event(t * 1e3, "boundary_crossed", format!("into cell {nearest}")));
        }

        // Reactive trigger on noisy RSRP.
        if trigger.is_none() {
            let rsrp: Vec<f64> = cfg
                .cells
                .iter()
                .map(|c| {
                    let n: f64 = rsrp_rng.sample(StandardNormal);
                    scn.link.rx_power_dbm(distance(p, *c)) + cfg.rsrp_sigma_db * n
                })
                .collect();
            let (best, best_p) = rsrp
                .iter()
                .enumerate()
                .filter(|(c, _)| *c != serving)
                .fold((serving, f64::NEG_INFINITY), |acc, (c, &v)| if v > acc.1 { (c, v) } else { acc });
            if best_p > rsrp[serving] + cfg.hysteresis_db {
                let since = *held_since.get_or_insert(t);
                if t - since >= cfg.ttt_ms * 1e-3 - 1e-12 {
                    trigger = Some((t, best));
                    events.push(event(t * 1e3, "a3_trigger", format!("cell {best}")));
                }
            } else {
                held_since = None;
            }
        }

        // Predictive preparation until the crossing.
        if mode == Mode::SensingAssisted && crossing.map_or(true, |(tc, _)| t <= tc) {
            let z = Observation::exact(t, cfg.cells[serving], p, v).perturbed(&scn.tracking, &mut obs_rng);
            let st = tracker.update(&z);
            if i >= 2 {
                let predicted = (0..=look_steps)
                    .map(|h| nearest_cell(st.predict_adaptive(h as f64 * dt), &cfg.cells))
                    .find(|&c| c != serving);
                if let Some(c) = predicted {
                    if prepared.map_or(true, |(pc, _)| pc != c) {
                        prepared = Some((c, t));
                        events.push(event(t * 1e3, "prepare", format!("cell {c}")));
                    }
                }
            }
        }
        if crossing.is_some() && trigger.is_some() && (mode == Mode::Baseline || crossing.map_or(false, |(tc, _)| t > tc)) {
            break;
        }
    }

    let reactive = |tc: f64| {
        trigger.map_or(f64::INFINITY, |(tt, _)| {
            cfg.execution_ms + ((tt - tc) * 1e3 + cfg.preparation_ms).max(0.0)
        })
    };
    let (interruption, preceded, prepared_out) = match (crossing, mode) {
        (None, _) => (0.0, false, None),
        (Some((tc, _)), Mode::Baseline) => (reactive(tc), false, None),
        (Some((tc, target)), Mode::SensingAssisted) => match prepared {
            Some((c, tp)) if c == target => (
                cfg.execution_ms + ((tp - tc) * 1e3 + cfg.preparation_ms).max(0.0),
                tp < tc,
                prepared,
            ),
            _ => (reactive(tc), false, prepared),
        },
    };
    events.sort_by(|a, b| a.t_ms.total_cmp(&b.t_ms));
    Ok(HandoverReport {
        crossing_s: crossing.map(|c| c.0),
        target_cell: crossing.map(|c| c.1),
        trigger_s: trigger.map(|t| t.0),
        trigger_cell: trigger.map(|t| t.1),
        prepared_cell: prepared_out.map(|p| p.0),
        prepared_s: prepared_out.map(|p| p.1),
        preceded_crossing: preceded,
        interruption_ms: interruption,
        events,
    })
}

pub fn simulate_handover(scn: &V2iScenario, mode: Mode) -> Result<StageResult> {
    scn.validate()?;
    let rep = run_handover(scn, mode)?;
    let mut res = StageResult::new(Stage::Handover, mode);
    res.latency_ms = if rep.interruption_ms.is_finite() { rep.interruption_ms } else { 0.0 };
    res.events = rep.events.clone();
    let opt = |v: Option<f64>| v.unwrap_or(-1.0);
    res.notes.insert("handover".into(), if rep.crossing_s.is_some() { 1.0 } else { 0.0 });
    res.notes.insert("crossing_s".into(), opt(rep.crossing_s));
    res.notes.insert("trigger_s".into(), opt(rep.trigger_s));
    res.notes.insert("target_cell".into(), opt(rep.target_cell.map(|c| c as f64)));
    res.notes.insert("prepared_cell".into(), opt(rep.prepared_cell.map(|c| c as f64)));
    res.notes.insert("prepared_s".into(), opt(rep.prepared_s));
    res.notes.insert("preceded_crossing".into(), if rep.preceded_crossing { 1.0 } else { 0.0 });
    Ok(res.finish())
}

/// All four stages in both modes, baseline first.
pub fn simulate_all(scn: &V2iScenario) -> Result<Vec<StageResult>> {
    let mut out = Vec::new();
    for mode in [Mode::Baseline, Mode::SensingAssisted] {
        out.push(simulate_initial_access(scn, mode)?);
    }
    for mode in [Mode::Baseline, Mode::SensingAssisted] {
        out.push(simulate_connected(scn, mode, scn.connected.duration_ms)?);
    }
    for mode in [Mode::Baseline, Mode::SensingAssisted] {
        out.push(simulate_beam_failure(scn, mode)?);
    }
    if scn.handover.is_some() {
        for mode in [Mode::Baseline, Mode::SensingAssisted] {
            out.push(simulate_handover(scn, mode)?);
        }
    }
    Ok(out)
}
