//! Correlation statistics of random ISAC frames.
//!
//! Periodic ACF (P-ACF) for basis-only frames, aperiodic ACF for pulse-shaped
//! waveforms, the discrete ambiguity function, and a Monte-Carlo engine that
//! averages squared correlations over random payloads with optional coherent
//! integration. Power quantities are reported in dB as `10·log10`.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::constellation::{Constellation, SymbolSampler};
use crate::error::{IsacError, Result};
use crate::modulation::ModulationBasis;
use crate::pulse::{impulse_response, shape_with, PulseFilter};
use crate::seed;

/// Reported in place of `10·log10(0)`.
pub const DB_FLOOR: f64 = -300.0;

/// Default cap on `trials × K × samples-per-frame`.
pub const DEFAULT_BUDGET: u128 = 40_000_000_000;

/// Trials handled by one work unit; fixed so accumulation order never depends on thread count.
const CHUNK: usize = 16;

pub fn to_db(power: f64) -> f64 {
    if power > 0.0 {
        (10.0 * power.log10()).max(DB_FLOOR)
    } else {
        DB_FLOOR
    }
}

/// Periodic autocorrelation `R[l] = (1/N) Σₙ s[n]·conj(s[(n+l) mod N])`.
pub fn pacf(samples: &[Complex64]) -> Result<Vec<Complex64>> {
    if samples.len() < 2 {
        return Err(IsacError::invalid("samples", "P-ACF needs at least two samples"));
    }
    let plan = PeriodicPlan::new(samples.len());
    let mut buf = samples.to_vec();
    plan.pacf_in_place(&mut buf);
    Ok(buf)
}

struct PeriodicPlan {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
}

impl PeriodicPlan {
    fn new(n: usize) -> Self {
        PeriodicPlan {
            n,
            fwd: FftPlanner::new().plan_fft_forward(n),
        }
    }

    /// `R = FFT(|FFT(s)|²) / N²`.
    fn pacf_in_place(&self, buf: &mut [Complex64]) {
        self.fwd.process(buf);
        for v in buf.iter_mut() {
            *v = Complex64::new(v.norm_sqr(), 0.0);
        }
        self.fwd.process(buf);
        let s = 1.0 / (self.n as f64 * self.n as f64);
        for v in buf.iter_mut() {
            *v *= s;
        }
    }
}

struct AperiodicPlan {
    len: usize,
    size: usize,
    fwd: Arc<dyn Fft<f64>>,
}

impl AperiodicPlan {
    fn new(len: usize) -> Self {
        let size = (2 * len - 1).next_power_of_two();
        AperiodicPlan {
            len,
            size,
            fwd: FftPlanner::new().plan_fft_forward(size),
        }
    }

    /// Raw `c[l] = Σₙ w[n]·conj(w[n+l])` for `l = -(len-1) ..= len-1`, lag zero at index `len-1`.
    fn raw(&self, w: &[Complex64], scratch: &mut Vec<Complex64>, out: &mut [Complex64]) {
        scratch.clear();
        scratch.extend_from_slice(w);
        scratch.resize(self.size, Complex64::new(0.0, 0.0));
        self.fwd.process(scratch);
        for v in scratch.iter_mut() {
            *v = Complex64::new(v.norm_sqr(), 0.0);
        }
        self.fwd.process(scratch);
        let inv = 1.0 / self.size as f64;
        let m = self.len - 1;
        for l in 0..self.len {
            out[m + l] = scratch[l] * inv;
            out[m - l] = scratch[(self.size - l) % self.size] * inv;
        }
    }
}

/// Linear autocorrelation over lags `-(len-1) ..= len-1`, lag zero normalized to one.
///
/// Index `len - 1` of the result is lag zero.
pub fn aperiodic_acf(waveform: &[Complex64]) -> Result<Vec<Complex64>> {
    if waveform.is_empty() {
        return Err(IsacError::Empty("waveform"));
    }
    let plan = AperiodicPlan::new(waveform.len());
    let mut out = vec![Complex64::new(0.0, 0.0); 2 * waveform.len() - 1];
    let mut scratch = Vec::new();
    plan.raw(waveform, &mut scratch, &mut out);
    let c0 = out[waveform.len() - 1].re;
    if c0 <= 0.0 {
        return Err(IsacError::invalid("waveform", "zero-energy waveform"));
    }
    for v in &mut out {
        *v /= c0;
    }
    Ok(out)
}

/// Delay × Doppler ambiguity surface, normalized to `A[0, 0] = 1`.
#[derive(Debug, Clone, Serialize)]
pub struct AmbiguityMap {
    pub delays: usize,
    /// Integer Doppler bins (cycles per frame), ascending and centred on zero.
    pub dopplers: Vec<i64>,
    /// Row-major `[delay][doppler]` power.
    pub power: Vec<f64>,
}

impl AmbiguityMap {
    pub fn at(&self, delay: usize, doppler: i64) -> f64 {
        let col = self
            .dopplers
            .iter()
            .position(|&d| d == doppler)
            .expect("doppler bin present");
        self.power[delay * self.dopplers.len() + col]
    }

    pub fn zero_doppler_cut(&self) -> Vec<f64> {
        (0..self.delays).map(|l| self.at(l, 0)).collect()
    }
}

/// `A[l, ν] = |Σₙ s[n]·conj(s[(n+l) mod N])·e^{−j2πνn/N}|² / A[0, 0]`.
pub fn ambiguity_function(samples: &[Complex64], doppler_bins: usize) -> Result<AmbiguityMap> {
    let n = samples.len();
    if n < 2 {
        return Err(IsacError::invalid("samples", "ambiguity function needs at least two samples"));
    }
    if doppler_bins == 0 || doppler_bins > n {
        return Err(IsacError::invalid(
            "doppler_bins",
            format!("must lie in 1..={n}, got {doppler_bins}"),
        ));
    }
    let half = (doppler_bins / 2) as i64;
    let dopplers: Vec<i64> = (0..doppler_bins as i64).map(|i| i - half).collect();
    let fft = FftPlanner::new().plan_fft_forward(n);
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|l| {
            let mut p: Vec<Complex64> = (0..n).map(|i| samples[i] * samples[(i + l) % n].conj()).collect();
            fft.process(&mut p);
            dopplers
                .iter()
                .map(|&d| p[d.rem_euclid(n as i64) as usize].norm_sqr())
                .collect()
        })
        .collect();
    let peak = rows[0][half as usize];
    if peak <= 0.0 {
        return Err(IsacError::invalid("samples", "zero-energy frame"));
    }
    let power = rows.into_iter().flatten().map(|v| v / peak).collect();
    Ok(AmbiguityMap {
        delays: n,
        dopplers,
        power,
    })
}

/// Monte-Carlo configuration for [`avg_squared_acf`].
#[derive(Debug, Clone)]
pub struct AcfConfig {
    pub constellation: Constellation,
    pub basis: ModulationBasis,
    pub pulse: Option<PulseFilter>,
    pub trials: usize,
    /// Frames coherently averaged before squaring.
    pub integrations: usize,
    pub seed: u64,
    /// Mainlobe half-width in samples used for the per-trial ISL spread;
    /// defaults to one symbol (1 lag, or `L` lags when pulse-shaped).
    pub exclude_mainlobe_lags: Option<usize>,
    pub budget: u128,
}

impl AcfConfig {
    pub fn new(constellation: Constellation, basis: ModulationBasis, trials: usize, seed: u64) -> Self {
        AcfConfig {
            constellation,
            basis,
            pulse: None,
            trials,
            integrations: 1,
            seed,
            exclude_mainlobe_lags: None,
            budget: DEFAULT_BUDGET,
        }
    }

    pub fn with_pulse(mut self, pulse: PulseFilter) -> Self {
        self.pulse = Some(pulse);
        self
    }

    pub fn with_integrations(mut self, k: usize) -> Self {
        self.integrations = k;
        self
    }

    pub fn oversampling(&self) -> usize {
        self.pulse.as_ref().map_or(1, |p| p.oversampling)
    }

    pub fn default_exclusion(&self) -> usize {
        self.exclude_mainlobe_lags.unwrap_or(self.oversampling())
    }

    fn samples_per_frame(&self) -> usize {
        let n = self.basis.size();
        match &self.pulse {
            Some(p) => n * p.oversampling + p.span * p.oversampling,
            None => n,
        }
    }
}

/// Averaged squared-ACF statistics, normalized so the lag-zero mean is one.
#[derive(Debug, Clone, Serialize)]
pub struct AcfStats {
    /// Lags in samples; divide by `oversampling` for symbol periods.
    pub lags: Vec<i64>,
    pub oversampling: usize,
    pub mean_sq_acf: Vec<f64>,
    /// Across-trial variance of the per-trial squared ACF (same normalization).
    pub var_acf: Vec<f64>,
    pub psl_db: f64,
    pub isl_db: f64,
    pub trials: usize,
    pub integrations: usize,
    pub periodic: bool,
    /// Lag index where the "far" (sea-level) region starts.
    pub far_from_lag: usize,
    pub exclude_mainlobe_lags: usize,
    /// Per-trial ISL (linear) mean and standard deviation for `exclude_mainlobe_lags`.
    pub isl_trial_mean: f64,
    pub isl_trial_std: f64,
}

impl AcfStats {
    pub fn lag_symbols(&self) -> Vec<f64> {
        self.lags
            .iter()
            .map(|&l| l as f64 / self.oversampling as f64)
            .collect()
    }

    pub fn zero_index(&self) -> usize {
        self.lags.iter().position(|&l| l == 0).expect("lag zero present")
    }

    /// Mean linear power over the far region `|lag| >= far_from_lag`.
    pub fn far_floor(&self) -> f64 {
        mean_where(&self.lags, &self.mean_sq_acf, |l| l.unsigned_abs() as usize >= self.far_from_lag)
    }

    pub fn far_floor_db(&self) -> f64 {
        to_db(self.far_floor())
    }

    /// Half-width of the 3σ confidence interval on the mean per-trial ISL.
    pub fn isl_half_width(&self) -> f64 {
        3.0 * self.isl_trial_std / (self.trials as f64).sqrt()
    }
}

fn mean_where(lags: &[i64], values: &[f64], pred: impl Fn(i64) -> bool) -> f64 {
    let (sum, count) = lags
        .iter()
        .zip(values)
        .filter(|(l, _)| pred(**l))
        .fold((0.0, 0usize), |(s, c), (_, v)| (s + v, c + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// `E|R|² = |E R|² + Var R`, each normalized like [`AcfStats::mean_sq_acf`].
#[derive(Debug, Clone, Serialize)]
pub struct IcebergDecomposition {
    pub iceberg: Vec<f64>,
    pub sea_level: Vec<f64>,
    pub total: Vec<f64>,
}

#[derive(Clone)]
struct Accum {
    mean: Vec<Complex64>,
    sq: Vec<f64>,
    sq2: Vec<f64>,
    isl: f64,
    isl2: f64,
}

impl Accum {
    fn zeros(len: usize) -> Self {
        Accum {
            mean: vec![Complex64::new(0.0, 0.0); len],
            sq: vec![0.0; len],
            sq2: vec![0.0; len],
            isl: 0.0,
            isl2: 0.0,
        }
    }

    fn merge(&mut self, other: &Accum) {
        for (a, b) in self.mean.iter_mut().zip(&other.mean) {
            *a += b;
        }
        for (a, b) in self.sq.iter_mut().zip(&other.sq) {
            *a += b;
        }
        for (a, b) in self.sq2.iter_mut().zip(&other.sq2) {
            *a += b;
        }
        self.isl += other.isl;
        self.isl2 += other.isl2;
    }
}

/// Draws random frames for one configuration.
struct FrameSource {
    sampler: SymbolSampler,
    basis: ModulationBasis,
    taps: Option<(Vec<f64>, usize)>,
}

impl FrameSource {
    fn new(cfg: &AcfConfig) -> Result<Self> {
        let taps = match &cfg.pulse {
            Some(p) => Some((impulse_response(p)?, p.oversampling)),
            None => None,
        };
        Ok(FrameSource {
            sampler: SymbolSampler::new(&cfg.constellation),
            basis: cfg.basis.clone(),
            taps,
        })
    }

    fn frame(&self, seed: u64, buf: &mut Vec<Complex64>) -> Vec<Complex64> {
        let mut rng = seed::rng(seed);
        buf.resize(self.basis.size(), Complex64::new(0.0, 0.0));
        self.sampler.fill(&mut rng, buf);
        self.basis
            .forward_in_place(buf)
            .expect("frame length equals basis size");
        match &self.taps {
            Some((h, l)) => shape_with(h, *l, buf).expect("non-empty frame"),
            None => buf.clone(),
        }
    }
}

/// Lag ordering shared by the periodic statistics: `-⌊N/2⌋ ..= ⌈N/2⌉-1`.
fn periodic_lags(n: usize) -> Vec<i64> {
    let half = (n / 2) as i64;
    (0..n as i64).map(|i| i - half).collect()
}

/// Monte-Carlo averaged squared ACF with its iceberg / sea-level split.
///
/// Each trial coherently averages the complex ACF of `K` independent frames,
/// squares it, and the squares are averaged over trials. Frame `k` of trial
/// `t` uses seed `derive(derive(seed, t), k)`.
pub fn avg_squared_acf(cfg: &AcfConfig) -> Result<(AcfStats, IcebergDecomposition)> {
    if cfg.trials == 0 {
        return Err(IsacError::invalid("trials", "must be >= 1"));
    }
    if cfg.integrations == 0 {
        return Err(IsacError::invalid("integrations", "K must be >= 1"));
    }
    let n = cfg.basis.size();
    if n < 2 {
        return Err(IsacError::invalid("n", "frames need at least two symbols"));
    }
    if cfg.constellation.is_empty() {
        return Err(IsacError::Empty("constellation"));
    }
    let spf = cfg.samples_per_frame();
    let requested = cfg.trials as u128 * cfg.integrations as u128 * spf as u128;
    if requested > cfg.budget {
        return Err(IsacError::BudgetExceeded {
            requested,
            limit: cfg.budget,
        });
    }

    let source = FrameSource::new(cfg)?;
    let periodic = cfg.pulse.is_none();
    let (lags, nlags): (Vec<i64>, usize) = if periodic {
        (periodic_lags(n), n)
    } else {
        let m = spf as i64 - 1;
        ((-m..=m).collect(), 2 * spf - 1)
    };
    let exclusion = cfg.default_exclusion();
    if exclusion == 0 {
        return Err(IsacError::invalid("exclude_mainlobe_lags", "must be >= 1"));
    }
    let sidelobe: Vec<bool> = lags.iter().map(|l| l.unsigned_abs() as usize >= exclusion).collect();
    if !sidelobe.iter().any(|&s| s) {
        return Err(IsacError::invalid("exclude_mainlobe_lags", "exclusion window covers every lag"));
    }

    let periodic_plan = periodic.then(|| PeriodicPlan::new(n));
    let aperiodic_plan = (!periodic).then(|| AperiodicPlan::new(spf));
    let k = cfg.integrations;
    // Raw aperiodic ACFs are scaled by 1/(N·L) so the lag-zero mean is about one, like the P-ACF.
    let aperiodic_scale = 1.0 / (n * cfg.oversampling()) as f64;

    let chunks: Vec<(usize, usize)> = (0..cfg.trials)
        .step_by(CHUNK)
        .map(|s| (s, (s + CHUNK).min(cfg.trials)))
        .collect();
    let partials: Vec<Accum> = chunks
        .par_iter()
        .map(|&(start, end)| {
            let mut acc = Accum::zeros(nlags);
            let mut sym = Vec::with_capacity(n);
            let mut scratch = Vec::new();
            let mut one = vec![Complex64::new(0.0, 0.0); nlags];
            let mut avg = vec![Complex64::new(0.0, 0.0); nlags];
            for t in start..end {
                let trial_seed = seed::derive(cfg.seed, t as u64);
                avg.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
                for j in 0..k {
                    let mut w = source.frame(seed::derive(trial_seed, j as u64), &mut sym);
                    if let Some(plan) = &periodic_plan {
                        plan.pacf_in_place(&mut w);
                        for (i, lag) in lags.iter().enumerate() {
                            avg[i] += w[lag.rem_euclid(n as i64) as usize];
                        }
                    } else if let Some(plan) = &aperiodic_plan {
                        plan.raw(&w, &mut scratch, &mut one);
                        for (a, v) in avg.iter_mut().zip(&one) {
                            *a += v * aperiodic_scale;
                        }
                    }
                }
                let inv_k = 1.0 / k as f64;
                let mut isl = 0.0;
                for i in 0..nlags {
                    let r = avg[i] * inv_k;
                    let p = r.norm_sqr();
                    acc.mean[i] += r;
                    acc.sq[i] += p;
                    acc.sq2[i] += p * p;
                    if sidelobe[i] {
                        isl += p;
                    }
                }
                acc.isl += isl;
                acc.isl2 += isl * isl;
            }
            acc
        })
        .collect();
    let mut total = Accum::zeros(nlags);
    for p in &partials {
        total.merge(p);
    }

    let trials = cfg.trials as f64;
    let zero = lags.iter().position(|&l| l == 0).expect("lag zero");
    let norm = total.sq[zero] / trials;
    if norm <= 0.0 {
        return Err(IsacError::invalid("constellation", "frames carry no energy"));
    }
    let mut mean_sq = Vec::with_capacity(nlags);
    let mut var = Vec::with_capacity(nlags);
    let mut iceberg = Vec::with_capacity(nlags);
    let mut sea = Vec::with_capacity(nlags);
    for i in 0..nlags {
        let m = total.sq[i] / trials;
        let mean = total.mean[i] / trials;
        let ice = mean.norm_sqr();
        let v = if cfg.trials > 1 {
            ((total.sq2[i] / trials - m * m) * trials / (trials - 1.0)).max(0.0)
        } else {
            0.0
        };
        mean_sq.push(m / norm);
        var.push(v / (norm * norm));
        iceberg.push(ice / norm);
        sea.push(((m - ice) / norm).max(0.0));
    }
    let isl_mean = total.isl / trials / norm;
    let isl_var = if cfg.trials > 1 {
        ((total.isl2 / trials - (total.isl / trials).powi(2)) * trials / (trials - 1.0)).max(0.0)
    } else {
        0.0
    };
    let far_from = match &cfg.pulse {
        Some(p) => p.span * p.oversampling + 1,
        None => exclusion,
    };
    let mut stats = AcfStats {
        lags,
        oversampling: cfg.oversampling(),
        mean_sq_acf: mean_sq.clone(),
        var_acf: var,
        psl_db: DB_FLOOR,
        isl_db: DB_FLOOR,
        trials: cfg.trials,
        integrations: k,
        periodic,
        far_from_lag: far_from,
        exclude_mainlobe_lags: exclusion,
        isl_trial_mean: isl_mean,
        isl_trial_std: isl_var.sqrt() / norm,
    };
    let metrics = sidelobe_metrics(&stats, exclusion)?;
    stats.psl_db = metrics.psl_db;
    stats.isl_db = metrics.isl_db;
    Ok((
        stats,
        IcebergDecomposition {
            iceberg,
            sea_level: sea,
            total: mean_sq,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SidelobeMetrics {
    pub psl_db: f64,
    pub isl_db: f64,
}

/// Peak and integrated sidelobe levels of `mean_sq_acf` outside `|lag| < exclude`.
pub fn sidelobe_metrics(stats: &AcfStats, exclude_mainlobe_lags: usize) -> Result<SidelobeMetrics> {
    if exclude_mainlobe_lags == 0 {
        return Err(IsacError::invalid("exclude_mainlobe_lags", "must be >= 1"));
    }
    let side: Vec<f64> = stats
        .lags
        .iter()
        .zip(&stats.mean_sq_acf)
        .filter(|(l, _)| l.unsigned_abs() as usize >= exclude_mainlobe_lags)
        .map(|(_, v)| *v)
        .collect();
    if side.is_empty() {
        return Err(IsacError::invalid(
            "exclude_mainlobe_lags",
            "exclusion window covers every lag",
        ));
    }
    let peak = side.iter().copied().fold(0.0, f64::max);
    let sum: f64 = side.iter().sum();
    Ok(SidelobeMetrics {
        psl_db: to_db(peak),
        isl_db: to_db(sum),
    })
}

/// One entry of a basis ranking.
#[derive(Debug, Clone, Serialize)]
pub struct RankedBasis {
    pub label: String,
    pub isl_db: f64,
    /// Mean per-trial ISL (linear) and its 3σ confidence half-width.
    pub isl_linear: f64,
    pub half_width_linear: f64,
    pub half_width_db: f64,
    pub far_floor_db: f64,
}

impl RankedBasis {
    pub fn interval(&self) -> (f64, f64) {
        (self.isl_linear - self.half_width_linear, self.isl_linear + self.half_width_linear)
    }
}

/// Runs the same Monte-Carlo budget over each basis and sorts by ascending ISL.
pub fn rank_bases(
    constellation: &Constellation,
    bases: &[ModulationBasis],
    trials: usize,
    seed: u64,
) -> Result<Vec<RankedBasis>> {
    if bases.is_empty() {
        return Err(IsacError::Empty("bases"));
    }
    let mut ranked = Vec::with_capacity(bases.len());
    for b in bases {
        let cfg = AcfConfig::new(constellation.clone(), b.clone(), trials, seed);
        let (stats, _) = avg_squared_acf(&cfg)?;
        let hw = stats.isl_half_width();
        let isl = stats.isl_trial_mean;
        let half_width_db = if isl > 0.0 {
            10.0 / std::f64::consts::LN_10 * hw / isl
        } else {
            0.0
        };
        ranked.push(RankedBasis {
            label: b.label().to_string(),
            isl_db: to_db(isl),
            isl_linear: isl,
            half_width_linear: hw,
            half_width_db,
            far_floor_db: stats.far_floor_db(),
        });
    }
    ranked.sort_by(|a, b| a.isl_linear.total_cmp(&b.isl_linear));
    Ok(ranked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::{make_psk, make_qam, sample_symbols};
    use crate::modulation::{modulate, BasisKind};
    use crate::pulse::{pulse_acf, shape};

    /// O(N²) reference for the periodic ACF.
    fn pacf_direct(s: &[Complex64]) -> Vec<Complex64> {
        let n = s.len();
        (0..n)
            .map(|l| (0..n).map(|i| s[i] * s[(i + l) % n].conj()).sum::<Complex64>() / n as f64)
            .collect()
    }

    fn ofdm(n: usize) -> ModulationBasis {
        ModulationBasis::new(BasisKind::Ofdm, n).unwrap()
    }

    #[test]
    fn pacf_matches_direct_sum() {
        let x = sample_symbols(&make_qam(16).unwrap(), 50, 3).unwrap();
        let fast = pacf(&x).unwrap();
        for (a, b) in fast.iter().zip(pacf_direct(&x)) {
            assert!((a - b).norm() < 1e-12);
        }
        let ones = vec![Complex64::new(1.0, 0.0); 16];
        assert!(pacf(&ones).unwrap().iter().all(|r| (r - 1.0).norm() < 1e-12));
        assert!(pacf(&ones[..1]).is_err());
    }

    #[test]
    fn ofdm_pacf_is_dft_of_subcarrier_power() {
        let n = 256;
        let x = sample_symbols(&make_qam(16).unwrap(), n, 8).unwrap();
        let s = modulate(&ofdm(n), &x).unwrap().samples;
        let r = pacf(&s).unwrap();
        for l in 0..n {
            let expect: Complex64 = x
                .iter()
                .enumerate()
                .map(|(k, v)| v.norm_sqr() * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * (k * l) as f64 / n as f64))
                .sum::<Complex64>()
                / n as f64;
            assert!((r[l] - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn ofdm_psk_sidelobes_vanish() {
        for order in [2, 4, 8] {
            let x = sample_symbols(&make_psk(order).unwrap(), 1024, order as u64).unwrap();
            let r = pacf(&modulate(&ofdm(1024), &x).unwrap().samples).unwrap();
            assert!(r[1..].iter().all(|v| v.norm() < 1e-12));
        }
    }

    #[test]
    fn aperiodic_examples() {
        let mut imp = vec![Complex64::new(0.0, 0.0); 9];
        imp[4] = Complex64::new(1.0, 0.0);
        let a = aperiodic_acf(&imp).unwrap();
        assert!((a[8] - 1.0).norm() < 1e-12);
        assert!(a.iter().enumerate().all(|(i, v)| i == 8 || v.norm() < 1e-12));

        let n = 12;
        let rect = vec![Complex64::new(1.0, 0.0); n];
        let a = aperiodic_acf(&rect).unwrap();
        for (i, v) in a.iter().enumerate() {
            let lag = i as f64 - (n - 1) as f64;
            assert!((v.re - (1.0 - lag.abs() / n as f64)).abs() < 1e-12);
        }

        let p = PulseFilter::rrc(0.35).unwrap();
        let w = shape(&p, &[Complex64::new(1.0, 0.0)]).unwrap();
        let a = aperiodic_acf(&w).unwrap();
        let pa = pulse_acf(&p).unwrap();
        let z = w.len() - 1;
        for lag in -(pa.max_lag() as i64)..=pa.max_lag() as i64 {
            assert!((a[(z as i64 + lag) as usize].re - pa.at(lag)).abs() < 1e-12);
        }
    }

    #[test]
    fn ambiguity_consistency() {
        let n = 64;
        let x = sample_symbols(&make_qam(16).unwrap(), n, 1).unwrap();
        let s = modulate(&ofdm(n), &x).unwrap().samples;
        let af = ambiguity_function(&s, 16).unwrap();
        assert!((af.at(0, 0) - 1.0).abs() < 1e-15);
        let r = pacf(&s).unwrap();
        let r0 = r[0].norm_sqr();
        for (l, v) in af.zero_doppler_cut().iter().enumerate() {
            assert!((v - r[l].norm_sqr() / r0).abs() < 1e-12);
        }
        assert!(af.power.iter().all(|v| *v <= 1.0 + 1e-12));

        let q = sample_symbols(&make_psk(4).unwrap(), n, 1).unwrap();
        let af = ambiguity_function(&modulate(&ofdm(n), &q).unwrap().samples, 8).unwrap();
        assert!(af.zero_doppler_cut()[1..].iter().all(|v| *v < 1e-20));
        assert!(ambiguity_function(&s, 0).is_err());
    }

    #[test]
    fn sc_iid_sidelobe_is_one_over_n() {
        let n = 64;
        let cfg = AcfConfig::new(
            make_qam(16).unwrap(),
            ModulationBasis::new(BasisKind::Sc, n).unwrap(),
            10_000,
            5,
        );
        let (stats, _) = avg_squared_acf(&cfg).unwrap();
        // E|R[l]|² = 1/N for i.i.d. unit-power symbols; normalized by E|R[0]|² = 1 + (κ-1)/N.
        let expect = (1.0 / n as f64) / (1.0 + 0.32 / n as f64);
        let floor = stats.far_floor();
        assert!((floor / expect - 1.0).abs() < 0.03, "{floor} vs {expect}");
    }

    #[test]
    fn deterministic_and_budget() {
        let cfg = AcfConfig::new(make_qam(16).unwrap(), ofdm(64), 40, 9).with_integrations(3);
        let (a, _) = avg_squared_acf(&cfg).unwrap();
        let (b, _) = avg_squared_acf(&cfg).unwrap();
        assert_eq!(a.mean_sq_acf, b.mean_sq_acf);
        let mut big = cfg.clone();
        big.budget = 100;
        assert!(matches!(avg_squared_acf(&big), Err(IsacError::BudgetExceeded { .. })));
        let mut zero = cfg.clone();
        zero.trials = 0;
        assert!(avg_squared_acf(&zero).is_err());
    }

    #[test]
    fn sidelobe_metric_edges() {
        let cfg = AcfConfig::new(make_psk(4).unwrap(), ofdm(32), 10, 1);
        let (stats, _) = avg_squared_acf(&cfg).unwrap();
        let m = sidelobe_metrics(&stats, 1).unwrap();
        assert_eq!(m.psl_db, DB_FLOOR);
        assert!(sidelobe_metrics(&stats, 0).is_err());
        assert!(sidelobe_metrics(&stats, 17).is_err());
    }

    #[test]
    fn single_basis_ranking() {
        let r = rank_bases(&make_qam(16).unwrap(), &[ofdm(64)], 50, 1).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].label, "OFDM");
    }
}
