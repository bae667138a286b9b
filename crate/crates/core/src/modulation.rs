//! Orthonormal modulation bases: SC, OFDM, CDMA, OTFS and AFDM.
//!
//! Each basis is an N×N unitary `U`; a frame of symbols `x` is transmitted as
//! `s = U x` and recovered with `x = Uᴴ s`. No cyclic prefix is added here.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{IsacError, Result};
use crate::seed;

/// Which transform a [`ModulationBasis`] realizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BasisKind {
    /// Identity: symbols are sent back to back.
    Sc,
    /// Unitary IDFT.
    Ofdm,
    /// Walsh–Hadamard spreading followed by a seeded ±1 scrambler.
    Cdma { scramble_seed: u64 },
    /// ISFFT onto an `m_delay × n_doppler` grid followed by a per-symbol IDFT.
    Otfs { m_delay: usize, n_doppler: usize },
    /// Chirp-domain transform `Λ_{c1}ᴴ Fᴴ Λ_{c2}ᴴ`.
    Afdm { c1: f64, c2: f64 },
}

impl BasisKind {
    pub fn label(&self) -> &'static str {
        match self {
            BasisKind::Sc => "SC",
            BasisKind::Ofdm => "OFDM",
            BasisKind::Cdma { .. } => "CDMA",
            BasisKind::Otfs { .. } => "OTFS",
            BasisKind::Afdm { .. } => "AFDM",
        }
    }
}

/// Default AFDM chirp rate `(2α + 1) / (2N)` with `α = 1`.
pub fn afdm_default_c1(n: usize) -> f64 {
    3.0 / (2.0 * n as f64)
}

/// Flat configuration keys used by experiment files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisConfig {
    pub kind: String,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_delay: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_doppler: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scramble_seed: Option<u64>,
}

impl BasisConfig {
    pub fn simple(kind: &str, n: usize) -> Self {
        BasisConfig {
            kind: kind.to_string(),
            n,
            m_delay: None,
            n_doppler: None,
            c1: None,
            c2: None,
            scramble_seed: None,
        }
    }

    /// Resolves defaults: OTFS picks the most square factorization with
    /// `m_delay >= n_doppler`, AFDM uses `c1 = 3/(2N)`, `c2 = 0`, CDMA seed 1.
    pub fn resolve(&self) -> Result<BasisKind> {
        let kind = match self.kind.to_ascii_lowercase().as_str() {
            "sc" => BasisKind::Sc,
            "ofdm" => BasisKind::Ofdm,
            "cdma" => BasisKind::Cdma {
                scramble_seed: self.scramble_seed.unwrap_or(1),
            },
            "otfs" => {
                let (m, nd) = match (self.m_delay, self.n_doppler) {
                    (Some(m), Some(nd)) => (m, nd),
                    (Some(m), None) if m > 0 => (m, self.n / m),
                    (None, Some(nd)) if nd > 0 => (self.n / nd, nd),
                    _ => square_split(self.n),
                };
                BasisKind::Otfs {
                    m_delay: m,
                    n_doppler: nd,
                }
            }
            "afdm" => BasisKind::Afdm {
                c1: self.c1.unwrap_or_else(|| afdm_default_c1(self.n)),
                c2: self.c2.unwrap_or(0.0),
            },
            other => {
                return Err(IsacError::invalid(
                    "kind",
                    format!("unknown basis `{other}` (expected sc, ofdm, cdma, otfs, afdm)"),
                ))
            }
        };
        Ok(kind)
    }

    /// The fully-resolved configuration, for metadata echoes.
    pub fn resolved(&self) -> Result<BasisConfig> {
        let mut out = BasisConfig::simple(&self.kind.to_ascii_lowercase(), self.n);
        match self.resolve()? {
            BasisKind::Cdma { scramble_seed } => out.scramble_seed = Some(scramble_seed),
            BasisKind::Otfs { m_delay, n_doppler } => {
                out.m_delay = Some(m_delay);
                out.n_doppler = Some(n_doppler);
            }
            BasisKind::Afdm { c1, c2 } => {
                out.c1 = Some(c1);
                out.c2 = Some(c2);
            }
            BasisKind::Sc | BasisKind::Ofdm => {}
        }
        Ok(out)
    }

    pub fn build(&self) -> Result<ModulationBasis> {
        ModulationBasis::new(self.resolve()?, self.n)
    }
}

fn square_split(n: usize) -> (usize, usize) {
    let mut nd = (n as f64).sqrt().floor() as usize;
    while nd > 1 && n % nd != 0 {
        nd -= 1;
    }
    (n / nd.max(1), nd.max(1))
}

enum Plan {
    Identity,
    Ofdm {
        fwd: Arc<dyn Fft<f64>>,
        inv: Arc<dyn Fft<f64>>,
    },
    Cdma {
        scrambler: Vec<f64>,
    },
    Otfs {
        m: usize,
        nd: usize,
        fwd_m: Arc<dyn Fft<f64>>,
        inv_m: Arc<dyn Fft<f64>>,
        fwd_n: Arc<dyn Fft<f64>>,
        inv_n: Arc<dyn Fft<f64>>,
    },
    Afdm {
        fwd: Arc<dyn Fft<f64>>,
        inv: Arc<dyn Fft<f64>>,
        /// `e^{+j2π c1 n²}`, the diagonal of `Λ_{c1}ᴴ`.
        chirp1: Vec<Complex64>,
        /// `e^{+j2π c2 n²}`, the diagonal of `Λ_{c2}ᴴ`.
        chirp2: Vec<Complex64>,
    },
}

/// An N×N unitary modulation transform, cheap to clone and share across threads.
#[derive(Clone)]
pub struct ModulationBasis {
    kind: BasisKind,
    n: usize,
    plan: Arc<Plan>,
}

impl fmt::Debug for ModulationBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModulationBasis")
            .field("kind", &self.kind)
            .field("n", &self.n)
            .finish()
    }
}

fn chirp(c: f64, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|i| {
            let i = i as f64;
            // Reduce the phase in cycles first to keep precision for large n.
            let cycles = (c * i * i).fract();
            Complex64::from_polar(1.0, 2.0 * PI * cycles)
        })
        .collect()
}

impl ModulationBasis {
    pub fn new(kind: BasisKind, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(IsacError::invalid("n", "basis size must be positive"));
        }
        let mut planner = FftPlanner::<f64>::new();
        let plan = match kind {
            BasisKind::Sc => Plan::Identity,
            BasisKind::Ofdm => Plan::Ofdm {
                fwd: planner.plan_fft_forward(n),
                inv: planner.plan_fft_inverse(n),
            },
            BasisKind::Cdma { scramble_seed } => {
                if !n.is_power_of_two() {
                    return Err(IsacError::invalid(
                        "n",
                        format!("CDMA needs a power-of-two size, got {n}"),
                    ));
                }
                let mut rng = seed::rng(scramble_seed);
                let scrambler = (0..n)
                    .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
                    .collect();
                Plan::Cdma { scrambler }
            }
            BasisKind::Otfs { m_delay, n_doppler } => {
                if m_delay == 0 || n_doppler == 0 || m_delay * n_doppler != n {
                    return Err(IsacError::invalid(
                        "n",
                        format!("OTFS needs n = m_delay × n_doppler, got {n} vs {m_delay}×{n_doppler}"),
                    ));
                }
                Plan::Otfs {
                    m: m_delay,
                    nd: n_doppler,
                    fwd_m: planner.plan_fft_forward(m_delay),
                    inv_m: planner.plan_fft_inverse(m_delay),
                    fwd_n: planner.plan_fft_forward(n_doppler),
                    inv_n: planner.plan_fft_inverse(n_doppler),
                }
            }
            BasisKind::Afdm { c1, c2 } => {
                if !c1.is_finite() || !c2.is_finite() {
                    return Err(IsacError::invalid("c1/c2", "chirp parameters must be finite"));
                }
                Plan::Afdm {
                    fwd: planner.plan_fft_forward(n),
                    inv: planner.plan_fft_inverse(n),
                    chirp1: chirp(c1, n),
                    chirp2: chirp(c2, n),
                }
            }
        };
        Ok(ModulationBasis {
            kind,
            n,
            plan: Arc::new(plan),
        })
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn label(&self) -> &'static str {
        self.kind.label()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(IsacError::LengthMismatch {
                expected: self.n,
                actual: len,
            });
        }
        Ok(())
    }

    /// `buf ← U · buf`.
    pub fn forward_in_place(&self, buf: &mut [Complex64]) -> Result<()> {
        self.check_len(buf.len())?;
        let n = self.n;
        match &*self.plan {
            Plan::Identity => {}
            Plan::Ofdm { inv, .. } => {
                inv.process(buf);
                scale(buf, (n as f64).sqrt().recip());
            }
            Plan::Cdma { scrambler } => {
                walsh_hadamard(buf);
                let s = (n as f64).sqrt().recip();
                for (v, d) in buf.iter_mut().zip(scrambler) {
                    *v *= d * s;
                }
            }
            Plan::Otfs {
                m,
                nd,
                fwd_m,
                inv_m,
                inv_n,
                ..
            } => {
                // Input layout: buf[k*m + l] = x[delay l, doppler k].
                // ISFFT: DFT along delay, IDFT along Doppler -> X[subcarrier, time].
                for row in buf.chunks_exact_mut(*m) {
                    fwd_m.process(row);
                }
                along_columns(buf, *m, *nd, inv_n.as_ref());
                scale(buf, ((*m * *nd) as f64).sqrt().recip());
                // Heisenberg with a rectangular pulse: IDFT over subcarriers per time symbol.
                for row in buf.chunks_exact_mut(*m) {
                    inv_m.process(row);
                }
                scale(buf, (*m as f64).sqrt().recip());
            }
            Plan::Afdm {
                inv, chirp1, chirp2, ..
            } => {
                for (v, c) in buf.iter_mut().zip(chirp2) {
                    *v *= c;
                }
                inv.process(buf);
                let s = (n as f64).sqrt().recip();
                for (v, c) in buf.iter_mut().zip(chirp1) {
                    *v *= c * s;
                }
            }
        }
        Ok(())
    }

    /// `buf ← Uᴴ · buf`.
    pub fn inverse_in_place(&self, buf: &mut [Complex64]) -> Result<()> {
        self.check_len(buf.len())?;
        let n = self.n;
        match &*self.plan {
            Plan::Identity => {}
            Plan::Ofdm { fwd, .. } => {
                fwd.process(buf);
                scale(buf, (n as f64).sqrt().recip());
            }
            Plan::Cdma { scrambler } => {
                for (v, d) in buf.iter_mut().zip(scrambler) {
                    *v *= *d;
                }
                walsh_hadamard(buf);
                scale(buf, (n as f64).sqrt().recip());
            }
            Plan::Otfs {
                m,
                nd,
                fwd_m,
                inv_m,
                fwd_n,
                ..
            } => {
                // Wigner transform, then SFFT back to the delay-Doppler grid.
                for row in buf.chunks_exact_mut(*m) {
                    fwd_m.process(row);
                }
                scale(buf, (*m as f64).sqrt().recip());
                along_columns(buf, *m, *nd, fwd_n.as_ref());
                for row in buf.chunks_exact_mut(*m) {
                    inv_m.process(row);
                }
                scale(buf, ((*m * *nd) as f64).sqrt().recip());
            }
            Plan::Afdm {
                fwd, chirp1, chirp2, ..
            } => {
                for (v, c) in buf.iter_mut().zip(chirp1) {
                    *v *= c.conj();
                }
                fwd.process(buf);
                let s = (n as f64).sqrt().recip();
                for (v, c) in buf.iter_mut().zip(chirp2) {
                    *v *= c.conj() * s;
                }
            }
        }
        Ok(())
    }

    /// Materializes `U` column by column.
    pub fn basis_matrix(&self) -> BasisMatrix {
        let n = self.n;
        let cols: Vec<Vec<Complex64>> = (0..n)
            .into_par_iter()
            .map(|j| {
                let mut e = vec![Complex64::new(0.0, 0.0); n];
                e[j] = Complex64::new(1.0, 0.0);
                self.forward_in_place(&mut e).expect("length matches");
                e
            })
            .collect();
        BasisMatrix {
            n,
            data: cols.concat(),
        }
    }
}

fn scale(buf: &mut [Complex64], s: f64) {
    for v in buf.iter_mut() {
        *v *= s;
    }
}

/// Applies `fft` along the strided columns of a `rows × width` row-major block.
fn along_columns(buf: &mut [Complex64], width: usize, rows: usize, fft: &dyn Fft<f64>) {
    let mut col = vec![Complex64::new(0.0, 0.0); rows];
    for c in 0..width {
        for r in 0..rows {
            col[r] = buf[r * width + c];
        }
        fft.process(&mut col);
        for r in 0..rows {
            buf[r * width + c] = col[r];
        }
    }
}

/// Unnormalized in-place fast Walsh–Hadamard transform (Sylvester ordering).
fn walsh_hadamard(buf: &mut [Complex64]) {
    let n = buf.len();
    let mut h = 1;
    while h < n {
        for start in (0..n).step_by(2 * h) {
            for i in start..start + h {
                let (a, b) = (buf[i], buf[i + h]);
                buf[i] = a + b;
                buf[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// A dense N×N matrix stored column-major.
#[derive(Debug, Clone)]
pub struct BasisMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl BasisMatrix {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[col * self.n + row]
    }

    pub fn column(&self, col: usize) -> &[Complex64] {
        &self.data[col * self.n..(col + 1) * self.n]
    }

    /// `max |UᴴU − I|` over all entries.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.n;
        (0..n)
            .into_par_iter()
            .map(|i| {
                let ci = self.column(i);
                let mut worst = 0.0f64;
                for j in i..n {
                    let cj = self.column(j);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (a, b) in ci.iter().zip(cj) {
                        acc += a.conj() * b;
                    }
                    if i == j {
                        acc -= 1.0;
                    }
                    worst = worst.max(acc.norm());
                }
                worst
            })
            .reduce(|| 0.0, f64::max)
    }

    /// `max |A − B|` entrywise.
    pub fn max_abs_diff(&self, other: &BasisMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// A modulated frame: symbols and the time samples that carry them.
#[derive(Debug, Clone)]
pub struct BasebandFrame {
    pub symbols: Vec<Complex64>,
    pub samples: Vec<Complex64>,
    pub basis: ModulationBasis,
}

impl BasebandFrame {
    pub fn symbol_energy(&self) -> f64 {
        self.symbols.iter().map(|x| x.norm_sqr()).sum()
    }

    pub fn sample_energy(&self) -> f64 {
        self.samples.iter().map(|x| x.norm_sqr()).sum()
    }
}

/// `samples = U · symbols`.
pub fn modulate(basis: &ModulationBasis, symbols: &[Complex64]) -> Result<BasebandFrame> {
    let mut samples = symbols.to_vec();
    basis.forward_in_place(&mut samples)?;
    Ok(BasebandFrame {
        symbols: symbols.to_vec(),
        samples,
        basis: basis.clone(),
    })
}

/// `symbols = Uᴴ · samples`.
pub fn demodulate(basis: &ModulationBasis, samples: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut out = samples.to_vec();
    basis.inverse_in_place(&mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::{make_qam, sample_symbols};

    fn all_kinds(n: usize) -> Vec<BasisKind> {
        let (m, nd) = square_split(n);
        vec![
            BasisKind::Sc,
            BasisKind::Ofdm,
            BasisKind::Cdma { scramble_seed: 3 },
            BasisKind::Otfs {
                m_delay: m,
                n_doppler: nd,
            },
            BasisKind::Afdm {
                c1: afdm_default_c1(n),
                c2: 0.0,
            },
        ]
    }

    fn max_err(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn sc_is_identity() {
        let b = ModulationBasis::new(BasisKind::Sc, 16).unwrap();
        let x = sample_symbols(&make_qam(16).unwrap(), 16, 1).unwrap();
        assert_eq!(modulate(&b, &x).unwrap().samples, x);
    }

    #[test]
    fn ofdm_unit_symbol_and_impulse() {
        let n = 64;
        let b = ModulationBasis::new(BasisKind::Ofdm, n).unwrap();
        let mut e0 = vec![Complex64::new(0.0, 0.0); n];
        e0[0] = Complex64::new(1.0, 0.0);
        let s = modulate(&b, &e0).unwrap().samples;
        for v in &s {
            assert!((v - Complex64::new(1.0 / (n as f64).sqrt(), 0.0)).norm() < 1e-15);
        }
        let ones = vec![Complex64::new(1.0, 0.0); n];
        let s = modulate(&b, &ones).unwrap().samples;
        assert!((s[0] - Complex64::new((n as f64).sqrt(), 0.0)).norm() < 1e-12);
        assert!(s[1..].iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn ofdm_matches_explicit_idft() {
        let n = 32;
        let u = ModulationBasis::new(BasisKind::Ofdm, n).unwrap().basis_matrix();
        for r in 0..n {
            for c in 0..n {
                let expect = Complex64::from_polar(
                    1.0 / (n as f64).sqrt(),
                    2.0 * PI * (r * c) as f64 / n as f64,
                );
                assert!((u.get(r, c) - expect).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn cdma_matches_explicit_hadamard() {
        let n = 32;
        let b = ModulationBasis::new(BasisKind::Cdma { scramble_seed: 9 }, n).unwrap();
        let u = b.basis_matrix();
        let Plan::Cdma { scrambler } = &*b.plan else { unreachable!() };
        for r in 0..n {
            for c in 0..n {
                let h = if (r & c).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                let expect = scrambler[r] * h / (n as f64).sqrt();
                assert!((u.get(r, c).re - expect).abs() < 1e-14 && u.get(r, c).im == 0.0);
            }
        }
        let other = ModulationBasis::new(BasisKind::Cdma { scramble_seed: 10 }, n).unwrap();
        assert!(u.max_abs_diff(&other.basis_matrix()) > 0.1);
        assert!(ModulationBasis::new(BasisKind::Cdma { scramble_seed: 1 }, 48).is_err());
    }

    #[test]
    fn otfs_matches_per_delay_idft_over_doppler() {
        // The ISFFT/Heisenberg chain collapses to an IDFT along Doppler for every delay tap.
        let (m, nd) = (8, 4);
        let b = ModulationBasis::new(BasisKind::Otfs { m_delay: m, n_doppler: nd }, m * nd).unwrap();
        let x = sample_symbols(&make_qam(16).unwrap(), m * nd, 4).unwrap();
        let s = modulate(&b, &x).unwrap().samples;
        for n in 0..nd {
            for t in 0..m {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..nd {
                    acc += x[k * m + t] * Complex64::from_polar(1.0, 2.0 * PI * (n * k) as f64 / nd as f64);
                }
                acc /= (nd as f64).sqrt();
                assert!((s[n * m + t] - acc).norm() < 1e-12);
            }
        }
        assert!(ModulationBasis::new(BasisKind::Otfs { m_delay: 8, n_doppler: 3 }, 32).is_err());
    }

    #[test]
    fn afdm_matches_explicit_formula() {
        let n = 16;
        let (c1, c2) = (afdm_default_c1(n), 0.013);
        let u = ModulationBasis::new(BasisKind::Afdm { c1, c2 }, n).unwrap().basis_matrix();
        for r in 0..n {
            for c in 0..n {
                let phase = c1 * (r * r) as f64 + c2 * (c * c) as f64 + (r * c) as f64 / n as f64;
                let expect = Complex64::from_polar(1.0 / (n as f64).sqrt(), 2.0 * PI * phase);
                assert!((u.get(r, c) - expect).norm() < 1e-12);
            }
        }
        let ofdm = ModulationBasis::new(BasisKind::Ofdm, 64).unwrap().basis_matrix();
        let afdm0 = ModulationBasis::new(BasisKind::Afdm { c1: 0.0, c2: 0.0 }, 64)
            .unwrap()
            .basis_matrix();
        assert!(ofdm.max_abs_diff(&afdm0) < 1e-12);
        assert_eq!(ofdm.unitarity_residual(), afdm0.unitarity_residual());
    }

    #[test]
    fn round_trips_and_energy() {
        let c = make_qam(16).unwrap();
        for n in [64usize, 256] {
            for kind in all_kinds(n) {
                let b = ModulationBasis::new(kind, n).unwrap();
                let x = sample_symbols(&c, n, 11).unwrap();
                let frame = modulate(&b, &x).unwrap();
                let rel = (frame.sample_energy() - frame.symbol_energy()).abs() / frame.symbol_energy();
                assert!(rel < 1e-12, "{kind:?}");
                let back = demodulate(&b, &frame.samples).unwrap();
                assert!(max_err(&back, &x) < 1e-10, "{kind:?}");
            }
        }
    }

    #[test]
    fn specific_round_trips() {
        let c = make_qam(16).unwrap();
        let b = ModulationBasis::new(BasisKind::Afdm { c1: 3.0 / 2048.0, c2: 1e-4 }, 1024).unwrap();
        let x = sample_symbols(&c, 1024, 2).unwrap();
        assert!(max_err(&demodulate(&b, &modulate(&b, &x).unwrap().samples).unwrap(), &x) < 1e-10);
        let b = ModulationBasis::new(BasisKind::Otfs { m_delay: 64, n_doppler: 16 }, 1024).unwrap();
        assert!(max_err(&demodulate(&b, &modulate(&b, &x).unwrap().samples).unwrap(), &x) < 1e-10);
    }

    #[test]
    fn length_mismatch() {
        let b = ModulationBasis::new(BasisKind::Ofdm, 8).unwrap();
        assert!(matches!(
            modulate(&b, &[Complex64::new(1.0, 0.0); 7]),
            Err(IsacError::LengthMismatch { expected: 8, actual: 7 })
        ));
        assert!(demodulate(&b, &[Complex64::new(1.0, 0.0); 9]).is_err());
    }

    #[test]
    fn config_resolution() {
        let cfg: BasisConfig = serde_json::from_str(r#"{"kind":"otfs","n":1024}"#).unwrap();
        assert_eq!(cfg.resolve().unwrap(), BasisKind::Otfs { m_delay: 32, n_doppler: 32 });
        let cfg: BasisConfig = serde_json::from_str(r#"{"kind":"afdm","n":1024}"#).unwrap();
        assert_eq!(cfg.resolve().unwrap(), BasisKind::Afdm { c1: 3.0 / 2048.0, c2: 0.0 });
        assert!(serde_json::from_str::<BasisConfig>(r#"{"kind":"sc","n":4,"bogus":1}"#).is_err());
        assert!(BasisConfig::simple("fsk", 4).resolve().is_err());
    }
}
