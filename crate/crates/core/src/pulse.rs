//! Pulse-shaping filters and their autocorrelation ("iceberg").
//!
//! Time is measured in symbol periods; a filter with oversampling `L` and
//! span `S` has `S·L + 1` taps at `t = (m − S·L/2) / L`.

use std::f64::consts::{FRAC_1_SQRT_2, LN_2, PI};
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{IsacError, Result};

/// Filter family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseKind {
    Sinc,
    Gaussian { bt: f64 },
    RaisedCosine { beta: f64 },
    RootRaisedCosine { beta: f64 },
}

pub const DEFAULT_BETA: f64 = 0.35;
pub const DEFAULT_BT: f64 = 0.3;
pub const DEFAULT_SPAN: usize = 16;
pub const DEFAULT_OVERSAMPLING: usize = 8;

/// A truncated, unit-energy pulse-shaping filter.
///
/// Serialized with the flat keys `{kind, beta, bt, span, oversampling}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PulseConfig", into = "PulseConfig")]
pub struct PulseFilter {
    pub kind: PulseKind,
    pub span: usize,
    pub oversampling: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PulseConfig {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bt: Option<f64>,
    #[serde(default = "default_span")]
    span: usize,
    #[serde(default = "default_oversampling")]
    oversampling: usize,
}

impl TryFrom<PulseConfig> for PulseFilter {
    type Error = IsacError;

    fn try_from(c: PulseConfig) -> Result<Self> {
        let kind = match c.kind.as_str() {
            "sinc" => PulseKind::Sinc,
            "gaussian" => PulseKind::Gaussian {
                bt: c.bt.unwrap_or(DEFAULT_BT),
            },
            "raised_cosine" | "rc" => PulseKind::RaisedCosine {
                beta: c.beta.unwrap_or(DEFAULT_BETA),
            },
            "root_raised_cosine" | "rrc" => PulseKind::RootRaisedCosine {
                beta: c.beta.unwrap_or(DEFAULT_BETA),
            },
            other => {
                return Err(IsacError::invalid(
                    "kind",
                    format!("unknown pulse `{other}` (expected sinc, gaussian, raised_cosine, root_raised_cosine)"),
                ))
            }
        };
        PulseFilter::new(kind, c.span, c.oversampling)
    }
}

impl From<PulseFilter> for PulseConfig {
    fn from(p: PulseFilter) -> Self {
        let (kind, beta, bt) = match p.kind {
            PulseKind::Sinc => ("sinc", None, None),
            PulseKind::Gaussian { bt } => ("gaussian", None, Some(bt)),
            PulseKind::RaisedCosine { beta } => ("raised_cosine", Some(beta), None),
            PulseKind::RootRaisedCosine { beta } => ("root_raised_cosine", Some(beta), None),
        };
        PulseConfig {
            kind: kind.to_string(),
            beta,
            bt,
            span: p.span,
            oversampling: p.oversampling,
        }
    }
}

fn default_span() -> usize {
    DEFAULT_SPAN
}

fn default_oversampling() -> usize {
    DEFAULT_OVERSAMPLING
}

impl PulseFilter {
    pub fn new(kind: PulseKind, span: usize, oversampling: usize) -> Result<Self> {
        let p = PulseFilter {
            kind,
            span,
            oversampling,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn rrc(beta: f64) -> Result<Self> {
        Self::new(
            PulseKind::RootRaisedCosine { beta },
            DEFAULT_SPAN,
            DEFAULT_OVERSAMPLING,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.span < 4 {
            return Err(IsacError::invalid("span", format!("must be >= 4, got {}", self.span)));
        }
        if self.oversampling < 4 {
            return Err(IsacError::invalid(
                "oversampling",
                format!("must be >= 4, got {}", self.oversampling),
            ));
        }
        if (self.span * self.oversampling) % 2 != 0 {
            return Err(IsacError::invalid("span", "span × oversampling must be even"));
        }
        match self.kind {
            PulseKind::Sinc => {}
            PulseKind::Gaussian { bt } => {
                if !(bt > 0.0) || !bt.is_finite() {
                    return Err(IsacError::invalid("bt", format!("must be > 0, got {bt}")));
                }
            }
            PulseKind::RaisedCosine { beta } | PulseKind::RootRaisedCosine { beta } => {
                if !(0.0..=1.0).contains(&beta) {
                    return Err(IsacError::invalid("beta", format!("must lie in [0, 1], got {beta}")));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.span * self.oversampling + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Tap times in symbol periods.
    pub fn tap_times(&self) -> Vec<f64> {
        let half = (self.span * self.oversampling / 2) as f64;
        let l = self.oversampling as f64;
        (0..self.len()).map(|m| (m as f64 - half) / l).collect()
    }
}

fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-12 {
        1.0
    } else {
        (PI * t).sin() / (PI * t)
    }
}

/// Raised-cosine pulse with `rc(0) = 1`.
pub fn raised_cosine(t: f64, beta: f64) -> f64 {
    if beta > 0.0 && (1.0 - (2.0 * beta * t).powi(2)).abs() < 1e-10 {
        return PI / 4.0 * sinc(1.0 / (2.0 * beta));
    }
    sinc(t) * (PI * beta * t).cos() / (1.0 - (2.0 * beta * t).powi(2))
}

/// Root-raised-cosine pulse (unit energy over the real line).
pub fn root_raised_cosine(t: f64, beta: f64) -> f64 {
    if t.abs() < 1e-12 {
        return 1.0 - beta + 4.0 * beta / PI;
    }
    if beta > 0.0 && (t.abs() - 1.0 / (4.0 * beta)).abs() < 1e-10 {
        let a = PI / (4.0 * beta);
        return beta * FRAC_1_SQRT_2 * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    ((PI * t * (1.0 - beta)).sin() + 4.0 * beta * t * (PI * t * (1.0 + beta)).cos())
        / (PI * t * (1.0 - (4.0 * beta * t).powi(2)))
}

fn gaussian(t: f64, bt: f64) -> f64 {
    (-2.0 * PI * PI * bt * bt * t * t / LN_2).exp()
}

/// Taps normalized so that `Σ h² / L = 1`.
pub fn impulse_response(p: &PulseFilter) -> Result<Vec<f64>> {
    p.validate()?;
    let mut h: Vec<f64> = p
        .tap_times()
        .into_iter()
        .map(|t| match p.kind {
            PulseKind::Sinc => sinc(t),
            PulseKind::Gaussian { bt } => gaussian(t, bt),
            PulseKind::RaisedCosine { beta } => raised_cosine(t, beta),
            PulseKind::RootRaisedCosine { beta } => root_raised_cosine(t, beta),
        })
        .collect();
    let energy: f64 = h.iter().map(|v| v * v).sum::<f64>() / p.oversampling as f64;
    let s = energy.sqrt().recip();
    for v in &mut h {
        *v *= s;
    }
    Ok(h)
}

/// Zero-stuffs by `L` and filters; output length `N·L + span·L`.
pub fn shape(p: &PulseFilter, samples: &[Complex64]) -> Result<Vec<Complex64>> {
    let h = impulse_response(p)?;
    shape_with(&h, p.oversampling, samples)
}

/// [`shape`] with precomputed taps.
pub fn shape_with(h: &[f64], oversampling: usize, samples: &[Complex64]) -> Result<Vec<Complex64>> {
    if samples.is_empty() {
        return Err(IsacError::Empty("samples to shape"));
    }
    let l = oversampling;
    let span_l = h.len() - 1;
    let mut out = vec![Complex64::new(0.0, 0.0); samples.len() * l + span_l];
    for (k, x) in samples.iter().enumerate() {
        let base = k * l;
        for (j, &tap) in h.iter().enumerate() {
            out[base + j] += x * tap;
        }
    }
    Ok(out)
}

/// Energy of an oversampled waveform in symbol-period units (`Σ|y|² / L`).
pub fn waveform_energy(waveform: &[Complex64], oversampling: usize) -> f64 {
    waveform.iter().map(|v| v.norm_sqr()).sum::<f64>() / oversampling as f64
}

/// Autocorrelation of the filter taps on a `1/L`-symbol lag grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseAcf {
    pub oversampling: usize,
    /// Values for lags `-(len-1) ..= len-1` samples; `values[max_lag]` is lag zero.
    pub values: Vec<f64>,
}

impl PulseAcf {
    pub fn max_lag(&self) -> usize {
        (self.values.len() - 1) / 2
    }

    pub fn at(&self, lag: i64) -> f64 {
        let idx = lag + self.max_lag() as i64;
        if idx < 0 || idx as usize >= self.values.len() {
            0.0
        } else {
            self.values[idx as usize]
        }
    }

    /// Lag axis in symbol periods.
    pub fn lags_symbols(&self) -> Vec<f64> {
        let m = self.max_lag() as i64;
        (-m..=m)
            .map(|k| k as f64 / self.oversampling as f64)
            .collect()
    }
}

/// Lag-zero-normalized filter autocorrelation.
pub fn pulse_acf(p: &PulseFilter) -> Result<PulseAcf> {
    let h = impulse_response(p)?;
    let n = h.len();
    let mut values = vec![0.0; 2 * n - 1];
    for lag in 0..n {
        let r: f64 = (0..n - lag).map(|i| h[i] * h[i + lag]).sum();
        values[n - 1 + lag] = r;
        values[n - 1 - lag] = r;
    }
    let r0 = values[n - 1];
    for v in &mut values {
        *v /= r0;
    }
    Ok(PulseAcf {
        oversampling: p.oversampling,
        values,
    })
}

/// Writes the taps as `time_symbols,tap` CSV.
pub fn write_impulse_csv<W: Write>(p: &PulseFilter, mut w: W) -> std::io::Result<()> {
    let h = impulse_response(p).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, e))?;
    writeln!(w, "time_symbols,tap")?;
    for (t, v) in p.tap_times().iter().zip(&h) {
        writeln!(w, "{t},{v}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::{make_psk, sample_symbols};

    fn filt(kind: PulseKind, span: usize, l: usize) -> PulseFilter {
        PulseFilter::new(kind, span, l).unwrap()
    }

    /// Full discrete convolution, independent of `pulse_acf`.
    fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }

    fn rrc_vs_rc_deviation(span: usize, beta: f64) -> f64 {
        let l = 8;
        let p = filt(PulseKind::RootRaisedCosine { beta }, span, l);
        let h = impulse_response(&p).unwrap();
        let c = convolve(&h, &h);
        let peak = c[(c.len() - 1) / 2];
        let mid = ((c.len() - 1) / 2) as f64;
        c.iter()
            .enumerate()
            .map(|(i, v)| (v / peak - raised_cosine((i as f64 - mid) / l as f64, beta)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn unit_energy_symmetry_and_peak() {
        for kind in [
            PulseKind::Sinc,
            PulseKind::Gaussian { bt: 0.3 },
            PulseKind::RaisedCosine { beta: 0.35 },
            PulseKind::RootRaisedCosine { beta: 0.35 },
            PulseKind::RootRaisedCosine { beta: 0.0 },
            PulseKind::RaisedCosine { beta: 1.0 },
        ] {
            let p = filt(kind, 16, 8);
            let h = impulse_response(&p).unwrap();
            assert_eq!(h.len(), 16 * 8 + 1);
            let e: f64 = h.iter().map(|v| v * v).sum::<f64>() / 8.0;
            assert!((e - 1.0).abs() < 1e-9);
            for i in 0..h.len() {
                assert!((h[i] - h[h.len() - 1 - i]).abs() < 1e-12, "{kind:?}");
            }
            let c = h.len() / 2;
            assert!(h.iter().all(|v| *v <= h[c] + 1e-15));
            assert!(h.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn singular_points_use_analytic_limits() {
        // β = 0.25 puts RC's singularity at t = ±2 and RRC's at t = ±1, both on the grid.
        let beta = 0.25;
        let eps = 1e-7;
        for t in [2.0, -2.0] {
            let near = 0.5 * (raised_cosine(t + eps, beta) + raised_cosine(t - eps, beta));
            assert!((raised_cosine(t, beta) - near).abs() < 1e-6);
        }
        for t in [1.0, -1.0] {
            let near = 0.5 * (root_raised_cosine(t + eps, beta) + root_raised_cosine(t - eps, beta));
            assert!((root_raised_cosine(t, beta) - near).abs() < 1e-6);
        }
        let near0 = root_raised_cosine(1e-7, beta);
        assert!((root_raised_cosine(0.0, beta) - near0).abs() < 1e-6);
    }

    #[test]
    fn nyquist_zeros() {
        for kind in [PulseKind::Sinc, PulseKind::RaisedCosine { beta: 0.35 }] {
            let p = filt(kind, 16, 8);
            let h = impulse_response(&p).unwrap();
            let c = h.len() / 2;
            for k in 1..=8 {
                assert!(h[c + 8 * k].abs() < 1e-9, "{kind:?} k={k}");
                assert!(h[c - 8 * k].abs() < 1e-9);
            }
        }
    }

    #[test]
    fn rrc_self_convolution_approaches_rc() {
        let d8 = rrc_vs_rc_deviation(8, 0.35);
        let d16 = rrc_vs_rc_deviation(16, 0.35);
        let d32 = rrc_vs_rc_deviation(32, 0.35);
        assert!(d8 > d16 && d16 > d32, "{d8} {d16} {d32}");
        // Plain truncation at ±8 symbols leaves ≈1.9e-3 at the edge of the span.
        assert!(d16 < 2e-3, "{d16}");
        assert!(d32 < 1e-3, "{d32}");
    }

    #[test]
    fn rrc_acf_is_rc() {
        let beta = 0.35;
        let p = filt(PulseKind::RootRaisedCosine { beta }, 32, 8);
        let acf = pulse_acf(&p).unwrap();
        let dev = acf
            .lags_symbols()
            .iter()
            .zip(&acf.values)
            .map(|(t, v)| (v - raised_cosine(*t, beta)).abs())
            .fold(0.0, f64::max);
        assert!(dev < 1e-3, "{dev}");
        let p16 = filt(PulseKind::RootRaisedCosine { beta }, 16, 8);
        let acf16 = pulse_acf(&p16).unwrap();
        let near = acf16
            .lags_symbols()
            .iter()
            .zip(&acf16.values)
            .filter(|(t, _)| t.abs() <= 2.0)
            .map(|(t, v)| (v - raised_cosine(*t, beta)).abs())
            .fold(0.0, f64::max);
        assert!(near < 1e-3, "{near}");
    }

    #[test]
    fn acf_normalized_symmetric_peak_at_zero() {
        for kind in [PulseKind::Gaussian { bt: 0.3 }, PulseKind::RootRaisedCosine { beta: 0.5 }] {
            let acf = pulse_acf(&filt(kind, 16, 8)).unwrap();
            assert_eq!(acf.at(0), 1.0);
            let m = acf.max_lag() as i64;
            for k in 1..=m {
                assert_eq!(acf.at(k), acf.at(-k));
                assert!(acf.at(k) <= 1.0);
            }
        }
    }

    #[test]
    fn sinc_acf_integer_lags_shrink_with_span() {
        let worst = |span: usize| {
            let acf = pulse_acf(&filt(PulseKind::Sinc, span, 8)).unwrap();
            (1..span as i64).map(|k| acf.at(8 * k).abs()).fold(0.0, f64::max)
        };
        let (w16, w32, w64) = (worst(16), worst(32), worst(64));
        assert!(w16 > w32 && w32 > w64);
        assert!(w64 < 0.03, "{w64}");
        // Near the mainlobe the truncated sinc keeps its Nyquist zeros closely.
        let acf = pulse_acf(&filt(PulseKind::Sinc, 64, 8)).unwrap();
        assert!(acf.at(8).abs() < 0.02 && acf.at(-8).abs() < 0.02);
    }

    #[test]
    fn shaping_examples() {
        let p = filt(PulseKind::RaisedCosine { beta: 0.35 }, 16, 8);
        let h = impulse_response(&p).unwrap();
        let one = shape(&p, &[Complex64::new(1.0, 0.0)]).unwrap();
        assert_eq!(one.len(), 8 + 128);
        for (a, b) in one.iter().zip(&h) {
            assert_eq!(a.re, *b);
        }
        let two = shape(&p, &[Complex64::new(1.0, 0.0); 2]).unwrap();
        let c = h.len() / 2;
        // Symbol instants carry equal values: no inter-symbol interference.
        assert!((two[c].re - h[c]).abs() < 1e-9);
        assert!((two[c + 8].re - h[c]).abs() < 1e-9);
        assert!(shape(&p, &[]).is_err());
    }

    #[test]
    fn white_qpsk_energy_preserved() {
        let p = PulseFilter::rrc(0.35).unwrap();
        let x = sample_symbols(&make_psk(4).unwrap(), 1024, 3).unwrap();
        let y = shape(&p, &x).unwrap();
        let ein: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        let rel = (waveform_energy(&y, 8) - ein).abs() / ein;
        assert!(rel < 1e-3, "{rel}");
    }

    #[test]
    fn invalid_parameters() {
        assert!(PulseFilter::new(PulseKind::RootRaisedCosine { beta: 1.2 }, 16, 8).is_err());
        assert!(PulseFilter::new(PulseKind::Gaussian { bt: 0.0 }, 16, 8).is_err());
        assert!(PulseFilter::new(PulseKind::Sinc, 2, 8).is_err());
        assert!(PulseFilter::new(PulseKind::Sinc, 16, 2).is_err());
    }

    #[test]
    fn config_keys() {
        let p: PulseFilter =
            serde_json::from_str(r#"{"kind":"root_raised_cosine","beta":0.35,"span":16,"oversampling":8}"#).unwrap();
        assert_eq!(p, PulseFilter::rrc(0.35).unwrap());
        assert!(serde_json::from_str::<PulseFilter>(r#"{"kind":"rrc","betta":0.3}"#).is_err());
        assert!(serde_json::from_str::<PulseFilter>(r#"{"kind":"rrc","beta":1.5}"#).is_err());
        let g: PulseFilter = serde_json::from_str(r#"{"kind":"gaussian"}"#).unwrap();
        assert_eq!(g.kind, PulseKind::Gaussian { bt: DEFAULT_BT });
        let mut buf = Vec::new();
        write_impulse_csv(&p, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 129);
        assert!(text.starts_with("time_symbols,tap\n-8,"));
    }
}
