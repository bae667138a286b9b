//! Point-target echoes over OFDM resource grids and periodogram estimation.
//!
//! The transmitter knows its own grid. Echoes are modeled per RE as
//! `Y[k, m] = Σ b·e^{j2π(m·T·ν − k·Δf·τ)}·X[k, m] + noise`; cyclic prefix and
//! inter-carrier interference are ignored. Unmasked REs are zero-filled
//! before the delay/Doppler transform.

use std::sync::Arc;

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{IsacError, Result};
use crate::nr_grid::{ReLabel, ResourceGrid};
use crate::seed;
use crate::sensing_stats::to_db;

pub const DEFAULT_THRESHOLD_FACTOR: f64 = 13.3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarrierParams {
    pub scs_khz: u32,
    pub n_subcarriers: usize,
    pub n_symbols: usize,
    pub symbol_duration_s: f64,
}

impl CarrierParams {
    pub fn for_grid(grid: &ResourceGrid) -> Self {
        CarrierParams {
            scs_khz: grid.scs_khz(),
            n_subcarriers: grid.subcarriers(),
            n_symbols: grid.ofdm_symbols(),
            symbol_duration_s: grid.symbol_duration_s(),
        }
    }

    pub fn subcarrier_spacing_hz(&self) -> f64 {
        f64::from(self.scs_khz) * 1e3
    }

    pub fn delay_bin_s(&self) -> f64 {
        1.0 / (self.n_subcarriers as f64 * self.subcarrier_spacing_hz())
    }

    pub fn doppler_bin_hz(&self) -> f64 {
        1.0 / (self.n_symbols as f64 * self.symbol_duration_s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Target {
    pub delay_s: f64,
    pub doppler_hz: f64,
    pub amplitude: Complex64,
}

impl Target {
    /// Target sitting at fractional delay/Doppler bin coordinates.
    pub fn at_bins(carrier: &CarrierParams, delay_bin: f64, doppler_bin: f64, amplitude: Complex64) -> Self {
        Target {
            delay_s: delay_bin * carrier.delay_bin_s(),
            doppler_hz: doppler_bin * carrier.doppler_bin_hz(),
            amplitude,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetScene {
    pub targets: Vec<Target>,
    /// Complex noise variance per RE.
    pub noise_power: f64,
    pub carrier: CarrierParams,
}

impl TargetScene {
    pub fn validate(&self) -> Result<()> {
        let c = &self.carrier;
        if !(self.noise_power >= 0.0) {
            return Err(IsacError::invalid("noise_power", "must be >= 0"));
        }
        if !(c.symbol_duration_s > 0.0) {
            return Err(IsacError::invalid("symbol_duration_s", "must be > 0"));
        }
        let max_delay = 1.0 / c.subcarrier_spacing_hz();
        let max_doppler = 1.0 / (2.0 * c.symbol_duration_s);
        for t in &self.targets {
            if !(0.0..max_delay).contains(&t.delay_s) {
                return Err(IsacError::invalid(
                    "delay_s",
                    format!("{} s outside the unambiguous range [0, {max_delay})", t.delay_s),
                ));
            }
            if !(t.doppler_hz.abs() < max_doppler) {
                return Err(IsacError::invalid(
                    "doppler_hz",
                    format!("|{}| Hz exceeds the unambiguous {max_doppler} Hz", t.doppler_hz),
                ));
            }
        }
        Ok(())
    }

    fn check_grid(&self, grid: &ResourceGrid) -> Result<()> {
        let g = CarrierParams::for_grid(grid);
        if g.scs_khz != self.carrier.scs_khz
            || g.n_subcarriers != self.carrier.n_subcarriers
            || g.n_symbols != self.carrier.n_symbols
        {
            return Err(IsacError::invalid("carrier", "scene carrier does not match the grid"));
        }
        Ok(())
    }
}

/// Echo of `grid` through `scene`; same RE layout as the grid.
pub fn apply_scene(grid: &ResourceGrid, scene: &TargetScene, seed: u64) -> Result<Vec<Complex64>> {
    scene.validate()?;
    scene.check_grid(grid)?;
    let c = &scene.carrier;
    let (n, m) = (c.n_subcarriers, c.n_symbols);
    let two_pi = 2.0 * std::f64::consts::PI;
    let ramps: Vec<(Vec<Complex64>, Vec<Complex64>)> = scene
        .targets
        .iter()
        .map(|t| {
            let f = (0..n)
                .map(|k| Complex64::from_polar(1.0, -two_pi * k as f64 * c.subcarrier_spacing_hz() * t.delay_s))
                .collect();
            let s = (0..m)
                .map(|l| t.amplitude * Complex64::from_polar(1.0, two_pi * l as f64 * c.symbol_duration_s * t.doppler_hz))
                .collect();
            (f, s)
        })
        .collect();
    let mut rng = seed::rng(seed);
    let sigma = (scene.noise_power / 2.0).sqrt();
    let x = grid.values();
    let mut y = Vec::with_capacity(x.len());
    for l in 0..m {
        for k in 0..n {
            let h: Complex64 = ramps.iter().map(|(f, s)| f[k] * s[l]).sum();
            let mut v = h * x[l * n + k];
            if sigma > 0.0 {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                v += Complex64::new(sigma * re, sigma * im);
            }
            y.push(v);
        }
    }
    Ok(y)
}

/// Which REs feed the estimator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensingMask {
    /// Every non-EMPTY RE.
    FullFrame,
    PilotsOnly,
    Labels(Vec<ReLabel>),
}

impl SensingMask {
    pub fn selects(&self, label: ReLabel) -> bool {
        match self {
            SensingMask::FullFrame => label != ReLabel::Empty,
            SensingMask::PilotsOnly => label.is_pilot(),
            SensingMask::Labels(ls) => ls.contains(&label),
        }
    }
}

/// Squared magnitude over delay × Doppler, scaled so a unit target on-grid peaks at one.
#[derive(Debug, Clone)]
pub struct DelayDopplerMap {
    pub n_delay: usize,
    pub n_doppler: usize,
    /// Row-major `[delay][doppler]`, Doppler bins in FFT order.
    pub power: Vec<f64>,
    pub masked: usize,
    pub allocation: usize,
}

impl DelayDopplerMap {
    pub fn at(&self, delay: usize, doppler: usize) -> f64 {
        self.power[delay * self.n_doppler + doppler]
    }

    /// Doppler FFT bin for a signed bin (wraps).
    pub fn doppler_index(&self, signed: i64) -> usize {
        signed.rem_euclid(self.n_doppler as i64) as usize
    }

    pub fn signed_doppler(&self, index: usize) -> i64 {
        let m = self.n_doppler as i64;
        let i = index as i64;
        if i >= (m + 1) / 2 {
            i - m
        } else {
            i
        }
    }

    pub fn median(&self) -> f64 {
        let mut v = self.power.clone();
        let mid = v.len() / 2;
        let (_, med, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
        *med
    }

    /// Largest value within ±`radius` bins (circular) of `(delay, doppler)`.
    pub fn neighborhood_max(&self, delay: i64, doppler: i64, radius: i64) -> f64 {
        let mut best = 0.0f64;
        for dd in -radius..=radius {
            for dv in -radius..=radius {
                let d = (delay + dd).rem_euclid(self.n_delay as i64) as usize;
                let v = (doppler + dv).rem_euclid(self.n_doppler as i64) as usize;
                best = best.max(self.at(d, v));
            }
        }
        best
    }

    pub fn used_re_fraction(&self) -> f64 {
        self.masked as f64 / self.allocation as f64
    }

    fn is_local_max(&self, d: usize, v: usize) -> bool {
        let p = self.at(d, v);
        if p <= 0.0 {
            return false;
        }
        for dd in [-1i64, 0, 1] {
            for dv in [-1i64, 0, 1] {
                if dd == 0 && dv == 0 {
                    continue;
                }
                let nd = (d as i64 + dd).rem_euclid(self.n_delay as i64) as usize;
                let nv = (v as i64 + dv).rem_euclid(self.n_doppler as i64) as usize;
                // Ties within rounding count as peaks.
                if self.at(nd, nv) > p * (1.0 + 1e-9) {
                    return false;
                }
            }
        }
        true
    }

    /// Local maxima sorted by descending power (ties by index).
    pub fn local_maxima(&self) -> Vec<(usize, usize)> {
        let mut peaks: Vec<(usize, usize)> = (0..self.n_delay)
            .flat_map(|d| (0..self.n_doppler).map(move |v| (d, v)))
            .filter(|&(d, v)| self.is_local_max(d, v))
            .collect();
        peaks.sort_by(|a, b| self.at(b.0, b.1).total_cmp(&self.at(a.0, a.1)));
        peaks
    }
}

/// Reusable FFT plans for one grid shape.
pub struct Periodogram {
    n: usize,
    m: usize,
    inv_delay: Arc<dyn Fft<f64>>,
    fwd_doppler: Arc<dyn Fft<f64>>,
}

impl Periodogram {
    pub fn new(n_subcarriers: usize, n_symbols: usize) -> Self {
        let mut planner = FftPlanner::new();
        Periodogram {
            n: n_subcarriers,
            m: n_symbols,
            inv_delay: planner.plan_fft_inverse(n_subcarriers),
            fwd_doppler: planner.plan_fft_forward(n_symbols),
        }
    }

    pub fn compute(&self, grid: &ResourceGrid, y: &[Complex64], mask: &SensingMask) -> Result<DelayDopplerMap> {
        let (n, m) = (self.n, self.m);
        if grid.subcarriers() != n || grid.ofdm_symbols() != m {
            return Err(IsacError::invalid("grid", "shape differs from the periodogram plan"));
        }
        if y.len() != n * m {
            return Err(IsacError::LengthMismatch {
                expected: n * m,
                actual: y.len(),
            });
        }
        let x = grid.values();
        let labels = grid.labels();
        let mut h = vec![Complex64::new(0.0, 0.0); n * m];
        let mut masked = 0;
        for l in 0..m {
            for k in 0..n {
                let i = l * n + k;
                if !mask.selects(labels[i]) {
                    continue;
                }
                if x[i].norm_sqr() == 0.0 {
                    return Err(IsacError::ZeroDivision {
                        symbol: l,
                        subcarrier: k,
                    });
                }
                h[i] = y[i] / x[i];
                masked += 1;
            }
        }
        if masked == 0 {
            return Err(IsacError::Empty("sensing mask"));
        }
        for row in h.chunks_exact_mut(n) {
            self.inv_delay.process(row);
        }
        let scale = 1.0 / (masked as f64 * masked as f64);
        let mut power = vec![0.0; n * m];
        let mut col = vec![Complex64::new(0.0, 0.0); m];
        for d in 0..n {
            for l in 0..m {
                col[l] = h[l * n + d];
            }
            self.fwd_doppler.process(&mut col);
            for (v, c) in col.iter().enumerate() {
                power[d * m + v] = c.norm_sqr() * scale;
            }
        }
        Ok(DelayDopplerMap {
            n_delay: n,
            n_doppler: m,
            power,
            masked,
            allocation: grid.len() - grid.reserved_count(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub delay_s: f64,
    pub doppler_hz: f64,
    pub peak_power: f64,
    pub delay_bin: f64,
    pub doppler_bin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Resolution {
    pub delay_bin_s: f64,
    pub doppler_bin_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensingReport {
    pub estimates: Vec<Estimate>,
    pub resolution: Resolution,
    pub used_re_fraction: f64,
}

/// Vertex offset of the parabola through `(−1, a)`, `(0, b)`, `(1, c)`.
fn quadratic_offset(a: f64, b: f64, c: f64) -> f64 {
    let den = a - 2.0 * b + c;
    if den >= 0.0 {
        return 0.0;
    }
    (0.5 * (a - c) / den).clamp(-0.5, 0.5)
}

fn interpolate(map: &DelayDopplerMap, d: usize, v: usize) -> (f64, f64) {
    let amp = |dd: i64, dv: i64| {
        let nd = (d as i64 + dd).rem_euclid(map.n_delay as i64) as usize;
        let nv = (v as i64 + dv).rem_euclid(map.n_doppler as i64) as usize;
        map.at(nd, nv).sqrt()
    };
    let b = amp(0, 0);
    let dd = if map.n_delay >= 3 { quadratic_offset(amp(-1, 0), b, amp(1, 0)) } else { 0.0 };
    let dv = if map.n_doppler >= 3 { quadratic_offset(amp(0, -1), b, amp(0, 1)) } else { 0.0 };
    (d as f64 + dd, map.signed_doppler(v) as f64 + dv)
}

/// Up to `n_targets` strongest local maxima of the masked periodogram.
pub fn periodogram_estimate(
    grid: &ResourceGrid,
    y: &[Complex64],
    mask: &SensingMask,
    n_targets: usize,
) -> Result<SensingReport> {
    let map = Periodogram::new(grid.subcarriers(), grid.ofdm_symbols()).compute(grid, y, mask)?;
    Ok(report_from_map(grid, &map, n_targets))
}

pub fn report_from_map(grid: &ResourceGrid, map: &DelayDopplerMap, n_targets: usize) -> SensingReport {
    let carrier = CarrierParams::for_grid(grid);
    let estimates = map
        .local_maxima()
        .into_iter()
        .take(n_targets)
        .map(|(d, v)| {
            let (db, vb) = interpolate(map, d, v);
            let db = db.rem_euclid(map.n_delay as f64);
            Estimate {
                delay_s: db * carrier.delay_bin_s(),
                doppler_hz: vb * carrier.doppler_bin_hz(),
                peak_power: map.at(d, v),
                delay_bin: db,
                doppler_bin: vb,
            }
        })
        .collect();
    SensingReport {
        estimates,
        resolution: Resolution {
            delay_bin_s: carrier.delay_bin_s(),
            doppler_bin_hz: carrier.doppler_bin_hz(),
        },
        used_re_fraction: map.used_re_fraction(),
    }
}

/// Circular distance between fractional bins.
pub fn bin_error(estimate: f64, truth: f64, bins: usize) -> f64 {
    let n = bins as f64;
    let d = (estimate - truth).rem_euclid(n);
    d.min(n - d)
}

/// Scene with the first target rescaled so the per-RE SNR is `snr_db`.
fn scene_at_snr(scene: &TargetScene, snr_db: f64) -> Result<TargetScene> {
    let t = scene
        .targets
        .first()
        .ok_or(IsacError::Empty("scene targets"))?;
    let mut s = scene.clone();
    let p = t.amplitude.norm_sqr();
    // A null target keeps unit noise so the curve measures false alarms.
    s.noise_power = if p > 0.0 { p / 10f64.powf(snr_db / 10.0) } else { 1.0 };
    Ok(s)
}

fn truth_bins(scene: &TargetScene) -> Result<(i64, i64)> {
    let t = scene
        .targets
        .first()
        .ok_or(IsacError::Empty("scene targets"))?;
    let c = &scene.carrier;
    Ok((
        (t.delay_s / c.delay_bin_s()).round() as i64,
        (t.doppler_hz / c.doppler_bin_hz()).round() as i64,
    ))
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionConfig {
    /// Threshold = factor × median of the delay–Doppler map.
    #[serde(default = "default_factor")]
    pub threshold_factor: f64,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_factor() -> f64 {
    DEFAULT_THRESHOLD_FACTOR
}

impl DetectionConfig {
    pub fn new(trials: usize, seed: u64) -> Self {
        DetectionConfig {
            threshold_factor: DEFAULT_THRESHOLD_FACTOR,
            trials,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectionPoint {
    pub snr_db: f64,
    pub pd: f64,
}

/// Per-trial (peak near truth, median floor) pairs; trial `t` uses seed `derive(seed, t)` at every SNR.
fn trial_maps<T: Send>(
    grid: &ResourceGrid,
    scene: &TargetScene,
    mask: &SensingMask,
    trials: usize,
    seed: u64,
    f: impl Fn(&DelayDopplerMap) -> T + Sync,
) -> Result<Vec<T>> {
    let plan = Periodogram::new(grid.subcarriers(), grid.ofdm_symbols());
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let y = apply_scene(grid, scene, seed::derive(seed, t as u64))?;
            plan.compute(grid, &y, mask).map(|m| f(&m))
        })
        .collect()
}

/// Pd versus per-RE SNR of the first scene target.
pub fn detection_rate(
    grid: &ResourceGrid,
    scene: &TargetScene,
    cfg: &DetectionConfig,
    mask: &SensingMask,
    snr_sweep_db: &[f64],
) -> Result<Vec<DetectionPoint>> {
    if cfg.trials < 100 {
        return Err(IsacError::invalid("trials", "detection curves need at least 100 trials"));
    }
    let (d0, v0) = truth_bins(scene)?;
    snr_sweep_db
        .iter()
        .map(|&snr| {
            let s = scene_at_snr(scene, snr)?;
            let hits = trial_maps(grid, &s, mask, cfg.trials, cfg.seed, |map| {
                map.neighborhood_max(d0, v0, 1) >= cfg.threshold_factor * map.median()
            })?;
            let pd = hits.iter().filter(|&&h| h).count() as f64 / cfg.trials as f64;
            Ok(DetectionPoint { snr_db: snr, pd })
        })
        .collect()
}

/// SNR where the curve first reaches `pd`, linearly interpolated.
pub fn snr_at_pd(curve: &[DetectionPoint], pd: f64) -> Option<f64> {
    if let Some(first) = curve.first() {
        if first.pd >= pd {
            return Some(first.snr_db);
        }
    }
    curve.windows(2).find_map(|w| {
        let (a, b) = (w[0], w[1]);
        (a.pd < pd && b.pd >= pd).then(|| a.snr_db + (pd - a.pd) / (b.pd - a.pd) * (b.snr_db - a.snr_db))
    })
}

/// Mean peak power near the first target over mean median floor, in dB.
pub fn peak_to_floor_db(
    grid: &ResourceGrid,
    scene: &TargetScene,
    mask: &SensingMask,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if trials == 0 {
        return Err(IsacError::invalid("trials", "must be >= 1"));
    }
    let (d0, v0) = truth_bins(scene)?;
    let pairs = trial_maps(grid, scene, mask, trials, seed, |map| (map.neighborhood_max(d0, v0, 1), map.median()))?;
    let (peak, floor) = pairs.iter().fold((0.0, 0.0), |(p, f), (a, b)| (p + a, f + b));
    Ok(to_db(peak / floor))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RmsePoint {
    pub snr_db: f64,
    pub delay_rmse_bins: f64,
    pub doppler_rmse_bins: f64,
}

/// Root-mean-square bin error of the strongest peak against the first target.
pub fn rmse_curve(
    grid: &ResourceGrid,
    scene: &TargetScene,
    mask: &SensingMask,
    snr_sweep_db: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<RmsePoint>> {
    if trials == 0 {
        return Err(IsacError::invalid("trials", "must be >= 1"));
    }
    let t = *scene.targets.first().ok_or(IsacError::Empty("scene targets"))?;
    let c = scene.carrier;
    let (td, tv) = (t.delay_s / c.delay_bin_s(), t.doppler_hz / c.doppler_bin_hz());
    snr_sweep_db
        .iter()
        .map(|&snr| {
            let s = scene_at_snr(scene, snr)?;
            let errs = trial_maps(grid, &s, mask, trials, seed, |map| {
                let r = report_from_map(grid, map, 1);
                let e = r.estimates[0];
                (
                    bin_error(e.delay_bin, td, map.n_delay),
                    bin_error(e.doppler_bin, tv, map.n_doppler),
                )
            })?;
            let n = trials as f64;
            Ok(RmsePoint {
                snr_db: snr,
                delay_rmse_bins: (errs.iter().map(|e| e.0 * e.0).sum::<f64>() / n).sqrt(),
                doppler_rmse_bins: (errs.iter().map(|e| e.1 * e.1).sum::<f64>() / n).sqrt(),
            })
        })
        .collect()
}
