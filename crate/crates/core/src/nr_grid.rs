//! NR-like time–frequency resource grids.
//!
//! Sequence generators follow TS 38.211: the length-31 Gold sequence of
//! §5.2.1, PSS (§7.4.2.2), SSS (§7.4.2.3), PBCH DMRS (§7.4.1.4), PDSCH DMRS
//! (§7.4.1.1) and CSI-RS (§7.4.1.5) scrambling. PBCH payload bits are random.
//! Slots always hold 14 OFDM symbols.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::constellation::{Constellation, SymbolSampler};
use crate::error::{IsacError, Result};
use crate::seed;

pub const SYMBOLS_PER_SLOT: usize = 14;
pub const SSB_SUBCARRIERS: usize = 240;
pub const SSB_SYMBOLS: usize = 4;
pub const MAX_SSB: usize = 64;
const SUBCARRIERS_PER_PRB: usize = 12;
const NC: usize = 1600;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ReLabel {
    Pss,
    Sss,
    Pbch,
    Dmrs,
    Csirs,
    Srs,
    Data,
    Empty,
}

impl ReLabel {
    pub const ALL: [ReLabel; 8] = [
        ReLabel::Pss,
        ReLabel::Sss,
        ReLabel::Pbch,
        ReLabel::Dmrs,
        ReLabel::Csirs,
        ReLabel::Srs,
        ReLabel::Data,
        ReLabel::Empty,
    ];

    pub fn is_pilot(self) -> bool {
        !matches!(self, ReLabel::Data | ReLabel::Empty)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ReLabel::Pss => "PSS",
            ReLabel::Sss => "SSS",
            ReLabel::Pbch => "PBCH",
            ReLabel::Dmrs => "DMRS",
            ReLabel::Csirs => "CSIRS",
            ReLabel::Srs => "SRS",
            ReLabel::Data => "DATA",
            ReLabel::Empty => "EMPTY",
        }
    }
}

impl fmt::Display for ReLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Numerology index μ for a subcarrier spacing.
pub fn numerology(scs_khz: u32) -> Result<u32> {
    match scs_khz {
        15 => Ok(0),
        30 => Ok(1),
        60 => Ok(2),
        120 => Ok(3),
        other => Err(IsacError::invalid(
            "scs_khz",
            format!("must be one of 15, 30, 60, 120; got {other}"),
        )),
    }
}

pub fn slot_duration_ms(scs_khz: u32) -> Result<f64> {
    Ok(1.0 / f64::from(1u32 << numerology(scs_khz)?))
}

/// OFDM symbol duration including its share of cyclic prefix.
pub fn symbol_duration_s(scs_khz: u32) -> Result<f64> {
    Ok(slot_duration_ms(scs_khz)? * 1e-3 / SYMBOLS_PER_SLOT as f64)
}

/// Subcarrier × OFDM-symbol grid; RE `(symbol, subcarrier)` lives at `symbol * subcarriers + subcarrier`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceGrid {
    subcarriers: usize,
    ofdm_symbols: usize,
    scs_khz: u32,
    labels: Vec<ReLabel>,
    values: Vec<Complex64>,
    reserved: Vec<bool>,
}

impl ResourceGrid {
    pub fn new(subcarriers: usize, ofdm_symbols: usize, scs_khz: u32) -> Result<Self> {
        numerology(scs_khz)?;
        if subcarriers == 0 || ofdm_symbols == 0 {
            return Err(IsacError::invalid("grid", "needs at least one subcarrier and one symbol"));
        }
        let n = subcarriers * ofdm_symbols;
        Ok(ResourceGrid {
            subcarriers,
            ofdm_symbols,
            scs_khz,
            labels: vec![ReLabel::Empty; n],
            values: vec![Complex64::new(0.0, 0.0); n],
            reserved: vec![false; n],
        })
    }

    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    pub fn ofdm_symbols(&self) -> usize {
        self.ofdm_symbols
    }

    pub fn scs_khz(&self) -> u32 {
        self.scs_khz
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of (possibly partial) slots.
    pub fn slots(&self) -> usize {
        self.ofdm_symbols.div_ceil(SYMBOLS_PER_SLOT)
    }

    pub fn symbol_duration_s(&self) -> f64 {
        symbol_duration_s(self.scs_khz).expect("validated at construction")
    }

    pub fn index(&self, symbol: usize, subcarrier: usize) -> usize {
        debug_assert!(symbol < self.ofdm_symbols && subcarrier < self.subcarriers);
        symbol * self.subcarriers + subcarrier
    }

    pub fn label(&self, symbol: usize, subcarrier: usize) -> ReLabel {
        self.labels[self.index(symbol, subcarrier)]
    }

    pub fn value(&self, symbol: usize, subcarrier: usize) -> Complex64 {
        self.values[self.index(symbol, subcarrier)]
    }

    pub fn is_reserved(&self, symbol: usize, subcarrier: usize) -> bool {
        self.reserved[self.index(symbol, subcarrier)]
    }

    pub fn labels(&self) -> &[ReLabel] {
        &self.labels
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn reserved(&self) -> &[bool] {
        &self.reserved
    }

    pub fn count(&self, label: ReLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    pub fn reserved_count(&self) -> usize {
        self.reserved.iter().filter(|&&r| r).count()
    }

    pub fn label_counts(&self) -> BTreeMap<ReLabel, usize> {
        let mut m: BTreeMap<ReLabel, usize> = ReLabel::ALL.iter().map(|&l| (l, 0)).collect();
        for l in &self.labels {
            *m.get_mut(l).expect("all labels present") += 1;
        }
        m
    }

    pub fn pilot_count(&self) -> usize {
        self.labels.iter().filter(|l| l.is_pilot()).count()
    }

    /// Writes all placements or none; occupied or reserved REs raise [`IsacError::Collision`].
    fn place(&mut self, label: ReLabel, items: &[(usize, usize, Complex64)]) -> Result<usize> {
        for &(sym, k, _) in items {
            let i = self.index(sym, k);
            if self.labels[i] != ReLabel::Empty || self.reserved[i] {
                let existing = if self.reserved[i] {
                    "reserved".to_string()
                } else {
                    self.labels[i].to_string()
                };
                return Err(IsacError::Collision {
                    symbol: sym,
                    subcarrier: k,
                    existing,
                });
            }
        }
        let mut seen = std::collections::HashSet::with_capacity(items.len());
        for &(sym, k, _) in items {
            if !seen.insert((sym, k)) {
                return Err(IsacError::Collision {
                    symbol: sym,
                    subcarrier: k,
                    existing: label.to_string(),
                });
            }
        }
        for &(sym, k, v) in items {
            let i = self.index(sym, k);
            self.labels[i] = label;
            self.values[i] = v;
        }
        Ok(items.len())
    }

    fn reserve(&mut self, symbol: usize, subcarrier: usize) {
        let i = self.index(symbol, subcarrier);
        self.reserved[i] = true;
    }

    /// CSV rows `symbol_index,subcarrier,label,re,im`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "symbol_index,subcarrier,label,re,im")?;
        for sym in 0..self.ofdm_symbols {
            for k in 0..self.subcarriers {
                let i = self.index(sym, k);
                let v = self.values[i];
                writeln!(w, "{sym},{k},{},{},{}", self.labels[i], v.re, v.im)?;
            }
        }
        Ok(())
    }
}

/// Pseudo-random sequence `c(n)` of TS 38.211 §5.2.1 as bits.
pub fn gold_bits(c_init: u32, length: usize) -> Vec<u8> {
    let mut x1: u32 = 1;
    let mut x2: u32 = c_init & 0x7fff_ffff;
    let mut out = Vec::with_capacity(length);
    for n in 0..NC + length {
        if n >= NC {
            out.push(((x1 ^ x2) & 1) as u8);
        }
        let f1 = (x1 ^ (x1 >> 3)) & 1;
        let f2 = (x2 ^ (x2 >> 1) ^ (x2 >> 2) ^ (x2 >> 3)) & 1;
        x1 = (x1 >> 1) | (f1 << 30);
        x2 = (x2 >> 1) | (f2 << 30);
    }
    out
}

/// Gold sequence mapped to ±1 (`1 − 2c`).
pub fn gold_sequence(c_init: u32, length: usize) -> Result<Vec<f64>> {
    if length == 0 {
        return Err(IsacError::invalid("length", "must be >= 1"));
    }
    Ok(gold_bits(c_init, length)
        .into_iter()
        .map(|b| 1.0 - 2.0 * f64::from(b))
        .collect())
}

/// `r(m) = ((1 − 2c(2m)) + j(1 − 2c(2m+1))) / √2`.
pub fn gold_qpsk(c_init: u32, length: usize) -> Vec<Complex64> {
    let c = gold_bits(c_init, 2 * length);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    c.chunks_exact(2)
        .map(|p| Complex64::new(s * (1.0 - 2.0 * f64::from(p[0])), s * (1.0 - 2.0 * f64::from(p[1]))))
        .collect()
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `x[n] = exp(−jπ·u·n(n+1)/Nzc)`.
pub fn zadoff_chu(root: u32, length: usize) -> Result<Vec<Complex64>> {
    if length == 0 || length % 2 == 0 {
        return Err(IsacError::invalid("length", format!("Nzc must be odd, got {length}")));
    }
    if gcd(u64::from(root), length as u64) != 1 {
        return Err(IsacError::invalid(
            "root",
            format!("gcd({root}, {length}) must be 1"),
        ));
    }
    let nzc = length as u64;
    let u = u64::from(root) % nzc;
    Ok((0..nzc)
        .map(|n| {
            // n(n+1) is even, so reduce u·n(n+1)/2 modulo Nzc before scaling.
            let e = (u * ((n * (n + 1) / 2) % nzc)) % nzc;
            Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * e as f64 / nzc as f64)
        })
        .collect())
}

fn m_sequence(init: [u8; 7], taps: (usize, usize)) -> [u8; 127] {
    let mut x = [0u8; 127 + 7];
    x[..7].copy_from_slice(&init);
    for i in 0..127 {
        x[i + 7] = (x[i + taps.0] + x[i + taps.1]) % 2;
    }
    let mut out = [0u8; 127];
    out.copy_from_slice(&x[..127]);
    out
}

/// PSS `d(n) = 1 − 2x((n + 43·N_ID2) mod 127)`, §7.4.2.2.
pub fn pss_sequence(n_id2: u32) -> Result<Vec<f64>> {
    if n_id2 > 2 {
        return Err(IsacError::invalid("n_id2", "must be 0, 1 or 2"));
    }
    let x = m_sequence([0, 1, 1, 0, 1, 1, 1], (4, 0));
    Ok((0..127)
        .map(|n| 1.0 - 2.0 * f64::from(x[(n + 43 * n_id2 as usize) % 127]))
        .collect())
}

/// SSS product sequence, §7.4.2.3.
pub fn sss_sequence(n_id1: u32, n_id2: u32) -> Result<Vec<f64>> {
    if n_id1 > 335 || n_id2 > 2 {
        return Err(IsacError::invalid("n_id", "N_ID1 must be < 336 and N_ID2 < 3"));
    }
    let x0 = m_sequence([1, 0, 0, 0, 0, 0, 0], (4, 0));
    let x1 = m_sequence([1, 0, 0, 0, 0, 0, 0], (1, 0));
    let m0 = (15 * (n_id1 / 112) + 5 * n_id2) as usize;
    let m1 = (n_id1 % 112) as usize;
    Ok((0..127)
        .map(|n| {
            (1.0 - 2.0 * f64::from(x0[(n + m0) % 127])) * (1.0 - 2.0 * f64::from(x1[(n + m1) % 127]))
        })
        .collect())
}

/// SS/PBCH burst configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BurstConfig {
    pub n_ssb: usize,
    #[serde(default = "default_period")]
    pub period_ms: f64,
    #[serde(default = "default_window")]
    pub window_ms: f64,
    pub scs_khz: u32,
    /// Physical cell identity `N_ID = 3·N_ID1 + N_ID2`.
    #[serde(default)]
    pub cell_id: u32,
    /// Lowest SSB subcarrier.
    #[serde(default)]
    pub subcarrier_offset: usize,
    #[serde(default)]
    pub pbch_seed: u64,
}

fn default_period() -> f64 {
    20.0
}

fn default_window() -> f64 {
    5.0
}

impl BurstConfig {
    pub fn new(n_ssb: usize, scs_khz: u32) -> Self {
        BurstConfig {
            n_ssb,
            period_ms: default_period(),
            window_ms: default_window(),
            scs_khz,
            cell_id: 0,
            subcarrier_offset: 0,
            pbch_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        numerology(self.scs_khz)?;
        if self.n_ssb > MAX_SSB {
            return Err(IsacError::invalid("n_ssb", format!("at most {MAX_SSB}, got {}", self.n_ssb)));
        }
        if !(self.period_ms > 0.0) || !(self.window_ms > 0.0) || self.window_ms > self.period_ms {
            return Err(IsacError::invalid("window_ms", "need 0 < window_ms <= period_ms"));
        }
        if self.cell_id >= 1008 {
            return Err(IsacError::invalid("cell_id", "must be < 1008"));
        }
        Ok(())
    }

    /// OFDM symbols spanned by the burst window.
    pub fn window_symbols(&self) -> Result<usize> {
        let slot = slot_duration_ms(self.scs_khz)?;
        Ok((self.window_ms / slot * SYMBOLS_PER_SLOT as f64).round() as usize)
    }
}

/// First OFDM symbol of each candidate SSB within a half frame (TS 38.213 §4.1).
pub fn ssb_start_symbols(scs_khz: u32, n_ssb: usize) -> Result<Vec<usize>> {
    let all: Vec<usize> = match scs_khz {
        15 | 30 => (0..4).flat_map(|n| [2 + 14 * n, 8 + 14 * n]).collect(),
        120 => [0usize, 1, 2, 3, 5, 6, 7, 8, 10, 11, 12, 13, 15, 16, 17, 18]
            .iter()
            .flat_map(|n| [4, 8, 16, 20].map(|o| o + 28 * n))
            .collect(),
        other => {
            return Err(IsacError::invalid(
                "scs_khz",
                format!("no SSB pattern for {other} kHz (supported: 15, 30, 120)"),
            ))
        }
    };
    if n_ssb > all.len() {
        return Err(IsacError::invalid(
            "n_ssb",
            format!("{scs_khz} kHz pattern holds at most {} blocks", all.len()),
        ));
    }
    Ok(all[..n_ssb].to_vec())
}

/// Places one SS/PBCH block with its first symbol at `start`.
fn place_ssb(grid: &mut ResourceGrid, cfg: &BurstConfig, block: usize, start: usize) -> Result<()> {
    let k0 = cfg.subcarrier_offset;
    let n_id1 = cfg.cell_id / 3;
    let n_id2 = cfg.cell_id % 3;
    let nu = (cfg.cell_id % 4) as usize;
    let pss = pss_sequence(n_id2)?;
    let sss = sss_sequence(n_id1, n_id2)?;
    let i_ssb = (block % 8) as u32;
    let c_init = (1 << 11) * (i_ssb + 1) * (cfg.cell_id / 4 + 1) + (1 << 6) * (i_ssb + 1) + cfg.cell_id % 4;
    let dmrs = gold_qpsk(c_init, 144);
    let mut rng = seed::rng_for(cfg.pbch_seed, block as u64);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut qpsk = || {
        let b: u8 = rng.gen_range(0..4);
        Complex64::new(
            if b & 1 == 0 { s } else { -s },
            if b & 2 == 0 { s } else { -s },
        )
    };

    let mut pss_items = Vec::with_capacity(127);
    let mut sss_items = Vec::with_capacity(127);
    let mut pbch_items = Vec::with_capacity(576);
    let mut guards = Vec::new();
    let mut m = 0;
    for l in 0..SSB_SYMBOLS {
        let sym = start + l;
        for k in 0..SSB_SUBCARRIERS {
            let pbch_here = match l {
                1 | 3 => true,
                2 => k < 48 || k >= 192,
                _ => false,
            };
            if pbch_here {
                let v = if k % 4 == nu {
                    m += 1;
                    dmrs[m - 1]
                } else {
                    qpsk()
                };
                pbch_items.push((sym, k0 + k, v));
            } else if (56..183).contains(&k) {
                let item = |seq: &[f64]| (sym, k0 + k, Complex64::new(seq[k - 56], 0.0));
                if l == 0 {
                    pss_items.push(item(&pss));
                } else {
                    sss_items.push(item(&sss));
                }
            } else {
                guards.push((sym, k0 + k));
            }
        }
    }
    grid.place(ReLabel::Pss, &pss_items)?;
    grid.place(ReLabel::Sss, &sss_items)?;
    grid.place(ReLabel::Pbch, &pbch_items)?;
    for (sym, k) in guards {
        grid.reserve(sym, k);
    }
    Ok(())
}

/// Builds a grid holding one SS/PBCH burst; REs outside the blocks stay EMPTY.
pub fn build_ssb_burst(cfg: &BurstConfig, subcarriers: usize, ofdm_symbols: usize) -> Result<ResourceGrid> {
    cfg.validate()?;
    let mut grid = ResourceGrid::new(subcarriers, ofdm_symbols, cfg.scs_khz)?;
    add_ssb_burst(&mut grid, cfg)?;
    Ok(grid)
}

pub fn add_ssb_burst(grid: &mut ResourceGrid, cfg: &BurstConfig) -> Result<usize> {
    cfg.validate()?;
    if cfg.scs_khz != grid.scs_khz {
        return Err(IsacError::invalid("scs_khz", "burst and grid numerology differ"));
    }
    if cfg.n_ssb == 0 {
        return Ok(0);
    }
    if cfg.subcarrier_offset + SSB_SUBCARRIERS > grid.subcarriers {
        return Err(IsacError::invalid(
            "subcarriers",
            format!("SSB needs subcarriers {}..{}", cfg.subcarrier_offset, cfg.subcarrier_offset + SSB_SUBCARRIERS),
        ));
    }
    let starts = ssb_start_symbols(cfg.scs_khz, cfg.n_ssb)?;
    let window = cfg.window_symbols()?;
    let last_end = starts.last().map_or(0, |s| s + SSB_SYMBOLS);
    if last_end > window {
        return Err(IsacError::invalid(
            "n_ssb",
            format!("burst ends at symbol {last_end}, beyond the {window}-symbol window"),
        ));
    }
    if last_end > grid.ofdm_symbols {
        return Err(IsacError::invalid(
            "ofdm_symbols",
            format!("burst ends at symbol {last_end}, grid has {}", grid.ofdm_symbols),
        ));
    }
    for (b, &s) in starts.iter().enumerate() {
        place_ssb(grid, cfg, b, s)?;
    }
    Ok(cfg.n_ssb)
}

fn check_slot_symbols(name: &'static str, symbols: &[usize]) -> Result<()> {
    if let Some(s) = symbols.iter().find(|&&s| s >= SYMBOLS_PER_SLOT) {
        return Err(IsacError::invalid(name, format!("symbol {s} outside the 14-symbol slot")));
    }
    Ok(())
}

/// Type-1 (comb-2) PDSCH DMRS, repeated in every slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DmrsConfig {
    #[serde(default = "default_dmrs_positions")]
    pub positions: Vec<usize>,
    #[serde(default)]
    pub additional: Vec<usize>,
    #[serde(default)]
    pub n_id: u32,
    /// Comb phase Δ ∈ {0, 1}.
    #[serde(default)]
    pub comb_offset: usize,
}

fn default_dmrs_positions() -> Vec<usize> {
    vec![2]
}

impl Default for DmrsConfig {
    fn default() -> Self {
        DmrsConfig {
            positions: default_dmrs_positions(),
            additional: Vec::new(),
            n_id: 0,
            comb_offset: 0,
        }
    }
}

impl DmrsConfig {
    pub fn symbols(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.positions.iter().chain(&self.additional).copied().collect();
        s.sort_unstable();
        s.dedup();
        s
    }
}

/// Places DMRS on every second subcarrier of the configured symbols of each slot.
pub fn place_dmrs(grid: &mut ResourceGrid, cfg: &DmrsConfig) -> Result<usize> {
    check_slot_symbols("positions", &cfg.positions)?;
    check_slot_symbols("additional", &cfg.additional)?;
    if cfg.comb_offset > 1 {
        return Err(IsacError::invalid("comb_offset", "type-1 DMRS comb offset is 0 or 1"));
    }
    let per_symbol = (grid.subcarriers + 1 - cfg.comb_offset) / 2;
    let mut items = Vec::new();
    for slot in 0..grid.slots() {
        for &l in &cfg.symbols() {
            let sym = slot * SYMBOLS_PER_SLOT + l;
            if sym >= grid.ofdm_symbols {
                continue;
            }
            let c_init = ((1u64 << 17) * (SYMBOLS_PER_SLOT * slot + l + 1) as u64 * (2 * u64::from(cfg.n_id) + 1)
                + 2 * u64::from(cfg.n_id))
                % (1 << 31);
            let r = gold_qpsk(c_init as u32, per_symbol);
            for (m, v) in r.into_iter().enumerate() {
                items.push((sym, 2 * m + cfg.comb_offset, v));
            }
        }
    }
    grid.place(ReLabel::Dmrs, &items)
}

/// Slots `s` with `(s − offset) mod period = 0`.
fn occasions(n_slots: usize, period: usize, offset: usize) -> Vec<usize> {
    if period > n_slots {
        log::warn!("periodicity of {period} slots exceeds the {n_slots}-slot grid; nothing placed");
        return Vec::new();
    }
    (0..n_slots).filter(|s| s % period == offset % period).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsirsConfig {
    /// REs per PRB per occasion: 0.5, 1 or 3.
    pub density: f64,
    pub period_slots: usize,
    /// Defaults to the last slot of each period.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slot_offset: Option<usize>,
    #[serde(default = "default_csirs_symbol")]
    pub symbol: usize,
    #[serde(default)]
    pub n_id: u32,
    #[serde(default)]
    pub subcarrier_offset: usize,
}

fn default_csirs_symbol() -> usize {
    6
}

impl CsirsConfig {
    pub fn new(density: f64, period_slots: usize) -> Self {
        CsirsConfig {
            density,
            period_slots,
            slot_offset: None,
            symbol: default_csirs_symbol(),
            n_id: 0,
            subcarrier_offset: 0,
        }
    }
}

/// Places single-port CSI-RS on the configured occasions.
pub fn place_csirs(grid: &mut ResourceGrid, cfg: &CsirsConfig) -> Result<usize> {
    let offsets: &[usize] = if cfg.density == 3.0 {
        &[0, 4, 8]
    } else if cfg.density == 1.0 || cfg.density == 0.5 {
        &[0]
    } else {
        return Err(IsacError::invalid("density", format!("must be 0.5, 1 or 3, got {}", cfg.density)));
    };
    if cfg.period_slots == 0 {
        return Err(IsacError::invalid("period_slots", "must be >= 1"));
    }
    check_slot_symbols("symbol", &[cfg.symbol])?;
    if cfg.subcarrier_offset >= 4 {
        return Err(IsacError::invalid("subcarrier_offset", "must be < 4"));
    }
    let prb_step = if cfg.density == 0.5 { 2 } else { 1 };
    let n_prb = grid.subcarriers / SUBCARRIERS_PER_PRB;
    let offset = cfg.slot_offset.unwrap_or(cfg.period_slots - 1);
    let mut items = Vec::new();
    for slot in occasions(grid.slots(), cfg.period_slots, offset) {
        let sym = slot * SYMBOLS_PER_SLOT + cfg.symbol;
        if sym >= grid.ofdm_symbols {
            continue;
        }
        let c_init = ((1u64 << 10) * (SYMBOLS_PER_SLOT * slot + cfg.symbol + 1) as u64 * (2 * u64::from(cfg.n_id) + 1)
            + u64::from(cfg.n_id))
            % (1 << 31);
        let ks: Vec<usize> = (0..n_prb)
            .step_by(prb_step)
            .flat_map(|p| offsets.iter().map(move |o| p * SUBCARRIERS_PER_PRB + cfg.subcarrier_offset + o))
            .collect();
        let r = gold_qpsk(c_init as u32, ks.len());
        items.extend(ks.into_iter().zip(r).map(|(k, v)| (sym, k, v)));
    }
    grid.place(ReLabel::Csirs, &items)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SrsConfig {
    /// Transmission comb: 2, 4 or 8.
    pub comb: usize,
    #[serde(default)]
    pub comb_offset: usize,
    #[serde(default = "default_srs_start")]
    pub start_symbol: usize,
    #[serde(default = "one")]
    pub n_symbols: usize,
    pub period_slots: usize,
    #[serde(default)]
    pub slot_offset: usize,
    /// Zadoff–Chu root.
    #[serde(default = "default_srs_root")]
    pub root: u32,
}

fn default_srs_start() -> usize {
    13
}

fn one() -> usize {
    1
}

fn default_srs_root() -> u32 {
    25
}

impl SrsConfig {
    pub fn new(comb: usize, period_slots: usize) -> Self {
        SrsConfig {
            comb,
            comb_offset: 0,
            start_symbol: default_srs_start(),
            n_symbols: 1,
            period_slots,
            slot_offset: 0,
            root: default_srs_root(),
        }
    }
}

fn largest_prime_at_most(n: usize) -> usize {
    (2..=n)
        .rev()
        .find(|&p| (2..).take_while(|d| d * d <= p).all(|d| p % d != 0))
        .unwrap_or(1)
}

/// SRS values: a Zadoff–Chu sequence of the largest prime length not above
/// the comb's RE count, cyclically extended.
fn srs_sequence(root: u32, len: usize) -> Vec<Complex64> {
    let nzc = largest_prime_at_most(len);
    if nzc < 3 {
        return vec![Complex64::new(1.0, 0.0); len];
    }
    let u = match root as usize % nzc {
        0 => 1,
        u => u as u32,
    };
    let zc = zadoff_chu(u, nzc).expect("prime length and nonzero root");
    (0..len).map(|n| zc[n % nzc]).collect()
}

pub fn place_srs(grid: &mut ResourceGrid, cfg: &SrsConfig) -> Result<usize> {
    if ![2, 4, 8].contains(&cfg.comb) {
        return Err(IsacError::invalid("comb", format!("must be 2, 4 or 8, got {}", cfg.comb)));
    }
    if cfg.comb_offset >= cfg.comb {
        return Err(IsacError::invalid("comb_offset", "must be below the comb size"));
    }
    if cfg.period_slots == 0 {
        return Err(IsacError::invalid("period_slots", "must be >= 1"));
    }
    if cfg.n_symbols == 0 || cfg.start_symbol + cfg.n_symbols > SYMBOLS_PER_SLOT {
        return Err(IsacError::invalid("n_symbols", "SRS symbols must fit inside one slot"));
    }
    let ks: Vec<usize> = (cfg.comb_offset..grid.subcarriers).step_by(cfg.comb).collect();
    let seq = srs_sequence(cfg.root, ks.len());
    let mut items = Vec::new();
    for slot in occasions(grid.slots(), cfg.period_slots, cfg.slot_offset) {
        for l in cfg.start_symbol..cfg.start_symbol + cfg.n_symbols {
            let sym = slot * SYMBOLS_PER_SLOT + l;
            if sym >= grid.ofdm_symbols {
                continue;
            }
            items.extend(ks.iter().zip(&seq).map(|(&k, &v)| (sym, k, v)));
        }
    }
    grid.place(ReLabel::Srs, &items)
}

/// Turns every non-reserved EMPTY RE into DATA carrying an i.i.d. symbol.
pub fn fill_payload(grid: &mut ResourceGrid, constellation: &Constellation, seed: u64) -> Result<usize> {
    if constellation.is_empty() {
        return Err(IsacError::Empty("constellation"));
    }
    let sampler = SymbolSampler::new(constellation);
    let mut rng = seed::rng(seed);
    let mut filled = 0;
    for i in 0..grid.labels.len() {
        if grid.labels[i] == ReLabel::Empty && !grid.reserved[i] {
            grid.labels[i] = ReLabel::Data;
            grid.values[i] = sampler.draw(&mut rng);
            filled += 1;
        }
    }
    Ok(filled)
}

/// Pilot REs over the allocation. Reserved EMPTY REs (SSB guard bands) are
/// outside the allocation; every other RE, EMPTY or not, counts.
pub fn pilot_fraction(grid: &ResourceGrid) -> f64 {
    let allocation = grid.len() - grid.reserved_count();
    if allocation == 0 {
        return 0.0;
    }
    grid.pilot_count() as f64 / allocation as f64
}

/// Complete grid description, as shipped in presets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub subcarriers: usize,
    pub ofdm_symbols: usize,
    pub scs_khz: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ssb: Option<BurstConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dmrs: Option<DmrsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csirs: Option<CsirsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub srs: Option<SrsConfig>,
}

impl GridSpec {
    /// SSB first, then DMRS, CSI-RS and SRS; payload is left EMPTY.
    pub fn build(&self) -> Result<ResourceGrid> {
        let mut grid = ResourceGrid::new(self.subcarriers, self.ofdm_symbols, self.scs_khz)?;
        if let Some(ssb) = &self.ssb {
            add_ssb_burst(&mut grid, ssb)?;
        }
        if let Some(d) = &self.dmrs {
            place_dmrs(&mut grid, d)?;
        }
        if let Some(c) = &self.csirs {
            place_csirs(&mut grid, c)?;
        }
        if let Some(s) = &self.srs {
            place_srs(&mut grid, s)?;
        }
        Ok(grid)
    }
}

const GRID_PRESETS: [(&str, &str); 3] = [
    ("typical-nr-slot", include_str!("../presets/typical-nr-slot.json")),
    ("fr2-64ssb-burst", include_str!("../presets/fr2-64ssb-burst.json")),
    ("pilot-10pct", include_str!("../presets/pilot-10pct.json")),
];

pub fn grid_preset_names() -> Vec<&'static str> {
    GRID_PRESETS.iter().map(|(n, _)| *n).collect()
}

pub fn grid_preset(name: &str) -> Result<GridSpec> {
    let (_, text) = GRID_PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| IsacError::invalid("preset", format!("unknown grid preset `{name}`")))?;
    serde_json::from_str(text).map_err(|e| IsacError::invalid("preset", e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::make_qam;

    /// Bit-array transcription of the two LFSR recurrences.
    fn gold_oracle(c_init: u32, len: usize) -> Vec<u8> {
        let n = NC + len + 31;
        let mut x1 = vec![0u8; n];
        let mut x2 = vec![0u8; n];
        x1[0] = 1;
        for i in 0..31 {
            x2[i] = ((c_init >> i) & 1) as u8;
        }
        for i in 0..n - 31 {
            x1[i + 31] = (x1[i + 3] + x1[i]) % 2;
            x2[i + 31] = (x2[i + 3] + x2[i + 2] + x2[i + 1] + x2[i]) % 2;
        }
        (0..len).map(|i| (x1[i + NC] + x2[i + NC]) % 2).collect()
    }

    #[test]
    fn gold_matches_oracle() {
        for c in [0u32, 1, 0x12345, 0x7fff_ffff, 2_000_000_007 % (1 << 31)] {
            assert_eq!(gold_bits(c, 300), gold_oracle(c, 300));
        }
        assert_eq!(gold_bits(1, 8), vec![0, 0, 0, 0, 0, 0, 1, 0]);
        assert_eq!(gold_bits(0x12345, 8), vec![1, 1, 0, 1, 0, 1, 1, 0]);
    }

    #[test]
    fn gold_zero_init_is_shifted_x1() {
        let len = 64;
        let mut x1 = vec![0u8; NC + len + 31];
        x1[0] = 1;
        for i in 0..NC + len {
            x1[i + 31] = (x1[i + 3] + x1[i]) % 2;
        }
        assert_eq!(gold_bits(0, len), x1[NC..NC + len].to_vec());
    }

    #[test]
    fn gold_is_balanced() {
        let s = gold_sequence(0x2f3a, 10_000).unwrap();
        assert!((s.iter().sum::<f64>() / s.len() as f64).abs() < 0.05);
        assert!(gold_sequence(1, 0).is_err());
    }

    #[test]
    fn zadoff_chu_is_ideal() {
        let x = zadoff_chu(25, 139).unwrap();
        assert!(x.iter().all(|v| (v.norm() - 1.0).abs() < 1e-12));
        let n = x.len();
        for l in 1..n {
            let r: Complex64 = (0..n).map(|i| x[i] * x[(i + l) % n].conj()).sum();
            assert!(r.norm() / n as f64 <= 1e-12, "lag {l}: {}", r.norm());
        }
        assert!(zadoff_chu(139, 139).is_err());
        assert!(zadoff_chu(1, 138).is_err());
    }

    #[test]
    fn pss_sss_are_bpsk_and_distinct() {
        let p: Vec<Vec<f64>> = (0..3).map(|i| pss_sequence(i).unwrap()).collect();
        for s in &p {
            assert_eq!(s.len(), 127);
            assert!(s.iter().all(|v| v.abs() == 1.0));
        }
        // Cyclic shifts of one m-sequence: cross-correlation is −1.
        let cross: f64 = p[0].iter().zip(&p[1]).map(|(a, b)| a * b).sum();
        assert_eq!(cross, -1.0);
        let a = sss_sequence(0, 0).unwrap();
        let b = sss_sequence(5, 1).unwrap();
        assert_ne!(a, b);
        assert!(sss_sequence(336, 0).is_err());
    }

    #[test]
    fn single_ssb_footprint() {
        let g = build_ssb_burst(&BurstConfig::new(1, 30), 240, 14).unwrap();
        assert_eq!(g.count(ReLabel::Pss), 127);
        assert_eq!(g.count(ReLabel::Sss), 127);
        assert_eq!(g.count(ReLabel::Pbch), 576);
        assert_eq!(g.reserved_count(), 240 * 4 - 127 - 127 - 576);
        let block: Vec<usize> = (2..6).collect();
        for sym in 0..14 {
            for k in 0..240 {
                let inside = block.contains(&sym);
                let touched = g.label(sym, k) != ReLabel::Empty || g.is_reserved(sym, k);
                assert_eq!(inside, touched);
            }
        }
        assert!((pilot_fraction(&g) - (830.0 / (240.0 * 14.0 - 130.0))).abs() < 1e-15);
    }

    #[test]
    fn ssb_only_grid_is_all_pilot() {
        let g = build_ssb_burst(&BurstConfig::new(1, 30), 240, 14).unwrap();
        let mut only = ResourceGrid::new(240, 4, 30).unwrap();
        for sym in 0..4 {
            for k in 0..240 {
                let i = g.index(sym + 2, k);
                let j = only.index(sym, k);
                only.labels[j] = g.labels[i];
                only.values[j] = g.values[i];
                only.reserved[j] = g.reserved[i];
            }
        }
        assert_eq!(pilot_fraction(&only), 1.0);
    }

    #[test]
    fn fr2_burst_fits_window() {
        let cfg = BurstConfig::new(64, 120);
        assert_eq!(cfg.window_symbols().unwrap(), 560);
        let starts = ssb_start_symbols(120, 64).unwrap();
        assert_eq!(*starts.last().unwrap() + 4, 528);
        let g = build_ssb_burst(&cfg, 240, 560).unwrap();
        assert_eq!(g.count(ReLabel::Pss), 64 * 127);
        assert!(build_ssb_burst(&BurstConfig::new(65, 120), 240, 560).is_err());
        assert!(ssb_start_symbols(60, 1).is_err());
        let mut short = cfg.clone();
        short.window_ms = 2.0;
        assert!(build_ssb_burst(&short, 240, 560).is_err());
    }

    #[test]
    fn zero_ssb_is_empty() {
        let g = build_ssb_burst(&BurstConfig::new(0, 120), 240, 56).unwrap();
        assert_eq!(g.count(ReLabel::Empty), g.len());
    }

    #[test]
    fn dmrs_counts_and_collisions() {
        let mut g = ResourceGrid::new(12, 14, 30).unwrap();
        assert_eq!(place_dmrs(&mut g, &DmrsConfig::default()).unwrap(), 6);
        let mut g3 = ResourceGrid::new(12, 14, 30).unwrap();
        let cfg = DmrsConfig {
            positions: vec![2, 3],
            additional: vec![11],
            ..DmrsConfig::default()
        };
        assert_eq!(place_dmrs(&mut g3, &cfg).unwrap(), 18);

        let mut g = build_ssb_burst(&BurstConfig::new(1, 30), 240, 14).unwrap();
        let before = g.clone();
        let err = place_dmrs(&mut g, &DmrsConfig::default()).unwrap_err();
        assert!(matches!(err, IsacError::Collision { symbol: 2, .. }));
        assert_eq!(g, before);
    }

    #[test]
    fn csirs_and_srs_counts() {
        let mut g = ResourceGrid::new(48, 14 * 20, 30).unwrap();
        assert_eq!(place_csirs(&mut g, &CsirsConfig::new(1.0, 10)).unwrap(), 4 * 2);
        let mut g = ResourceGrid::new(48, 14 * 20, 30).unwrap();
        assert_eq!(place_csirs(&mut g, &CsirsConfig::new(3.0, 5)).unwrap(), 12 * 4);
        let mut g = ResourceGrid::new(48, 14 * 20, 30).unwrap();
        assert_eq!(place_csirs(&mut g, &CsirsConfig::new(0.5, 20)).unwrap(), 2);

        let mut g = ResourceGrid::new(48, 14, 30).unwrap();
        assert_eq!(place_srs(&mut g, &SrsConfig::new(4, 1)).unwrap(), 12);
        let mut g = ResourceGrid::new(48, 14 * 2, 30).unwrap();
        assert_eq!(place_srs(&mut g, &SrsConfig::new(4, 5)).unwrap(), 0);
        assert_eq!(place_csirs(&mut g, &CsirsConfig::new(1.0, 5)).unwrap(), 0);
        assert!(place_srs(&mut g, &SrsConfig::new(3, 1)).is_err());
        assert!(place_csirs(&mut g, &CsirsConfig::new(2.0, 1)).is_err());
    }

    #[test]
    fn payload_partition() {
        let q = make_qam(16).unwrap();
        let mut g = ResourceGrid::new(24, 28, 30).unwrap();
        fill_payload(&mut g, &q, 1).unwrap();
        assert_eq!(g.count(ReLabel::Data), g.len());
        assert_eq!(pilot_fraction(&g), 0.0);

        let spec = grid_preset("typical-nr-slot").unwrap();
        let mut a = spec.build().unwrap();
        let rho = pilot_fraction(&a);
        fill_payload(&mut a, &q, 3).unwrap();
        let data = a.count(ReLabel::Data) as f64 / (a.len() - a.reserved_count()) as f64;
        assert!((data - (1.0 - rho)).abs() < 1e-15);
        let mut b = spec.build().unwrap();
        fill_payload(&mut b, &q, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn presets_load() {
        for name in grid_preset_names() {
            let g = grid_preset(name).unwrap().build().unwrap();
            let total: usize = g.label_counts().values().sum();
            assert_eq!(total, g.len());
        }
        let typical = pilot_fraction(&grid_preset("typical-nr-slot").unwrap().build().unwrap());
        assert!((0.05..=0.15).contains(&typical), "{typical}");
        let ten = pilot_fraction(&grid_preset("pilot-10pct").unwrap().build().unwrap());
        assert!((ten - 0.10).abs() < 1e-12, "{ten}");
        assert!(grid_preset("nope").is_err());
    }

    #[test]
    fn csv_header_and_rows() {
        let g = ResourceGrid::new(2, 1, 15).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "symbol_index,subcarrier,label,re,im\n0,0,EMPTY,0,0\n0,1,EMPTY,0,0\n"
        );
    }
}
