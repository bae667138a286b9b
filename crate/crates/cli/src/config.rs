//! Run configuration: strict JSON with per-experiment parameter blocks.

use std::path::{Path, PathBuf};

use isac_core::constellation::{apply_shaping, make_apsk, make_psk, make_qam, ApskRing, Constellation, ShapingSpec};
use isac_core::modulation::BasisConfig;
use isac_core::nr_grid::{grid_preset, GridSpec};
use isac_core::pulse::PulseFilter;
use isac_core::radar_channel::SensingMask;
use isac_core::v2i_sim::{scenario_preset, V2iScenario};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Acf,
    Ambiguity,
    Kurtosis,
    RankBases,
    NrGrid,
    Estimate,
    Detect,
    V2i,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::Acf => "acf",
            Experiment::Ambiguity => "ambiguity",
            Experiment::Kurtosis => "kurtosis",
            Experiment::RankBases => "rank-bases",
            Experiment::NrGrid => "nr-grid",
            Experiment::Estimate => "estimate",
            Experiment::Detect => "detect",
            Experiment::V2i => "v2i",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acf: Option<AcfBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ambiguity: Option<AmbiguityBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kurtosis: Option<KurtosisBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_bases: Option<RankBasesBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nr_grid: Option<NrGridBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimate: Option<EstimateBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detect: Option<DetectBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v2i: Option<V2iBlock>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Constellation by family name; `shaping` re-weights the base points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstellationSpec {
    /// `psk`, `qam` or `apsk`.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rings: Option<Vec<ApskRing>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shaping: Option<ShapingSpec>,
}

impl ConstellationSpec {
    pub fn build(&self) -> Result<Constellation, CliError> {
        let order = || self.order.ok_or_else(|| CliError::field("order", format!("required for `{}`", self.kind)));
        let base = match self.kind.to_ascii_lowercase().as_str() {
            "psk" => make_psk(order()?),
            "qam" => make_qam(order()?),
            "apsk" => make_apsk(
                self.rings
                    .as_deref()
                    .ok_or_else(|| CliError::field("rings", "required for `apsk`"))?,
            ),
            other => return Err(CliError::field("kind", format!("unknown constellation `{other}` (psk, qam, apsk)"))),
        }
        .map_err(CliError::from_core_config)?;
        match &self.shaping {
            Some(s) => apply_shaping(&base, s).map_err(CliError::from_core_config),
            None => Ok(base),
        }
    }
}

fn default_trials() -> usize {
    1000
}

fn default_integrations() -> Vec<usize> {
    vec![1]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcfBlock {
    pub constellation: ConstellationSpec,
    pub bases: Vec<BasisConfig>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// One curve per basis and K.
    #[serde(default = "default_integrations")]
    pub integrations: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulse: Option<PulseFilter>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exclude_mainlobe_lags: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u128>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmbiguityBlock {
    pub constellation: ConstellationSpec,
    pub basis: BasisConfig,
    #[serde(default = "default_doppler_bins")]
    pub doppler_bins: usize,
}

fn default_doppler_bins() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KurtosisBlock {
    pub constellations: Vec<ConstellationSpec>,
    /// Empirical check sample count; 0 skips it.
    #[serde(default)]
    pub samples: usize,
    /// Maxwell–Boltzmann λ sweep applied to each constellation.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mb_lambdas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankBasesBlock {
    pub constellation: ConstellationSpec,
    pub bases: Vec<BasisConfig>,
    #[serde(default = "default_trials")]
    pub trials: usize,
}

/// Either a named grid preset or an inline grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<GridSpec>,
}

impl GridSource {
    pub fn resolve(&self) -> Result<GridSpec, CliError> {
        match (&self.preset, &self.spec) {
            (Some(name), None) => grid_preset(name).map_err(|e| CliError::field("preset", e.to_string())),
            (None, Some(spec)) => Ok(spec.clone()),
            _ => Err(CliError::field("grid", "give exactly one of `preset` or `spec`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NrGridBlock {
    pub grid: GridSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<ConstellationSpec>,
}

/// Target placed in units of delay and Doppler bins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub delay_bin: f64,
    pub doppler_bin: f64,
    /// Complex amplitude `[re, im]`.
    #[serde(default = "unit_amplitude")]
    pub amplitude: [f64; 2],
}

fn unit_amplitude() -> [f64; 2] {
    [1.0, 0.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateBlock {
    pub grid: GridSource,
    pub payload: ConstellationSpec,
    pub targets: Vec<TargetSpec>,
    /// Per-RE SNR of the first target; omitted means noiseless.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    #[serde(default = "default_mask")]
    pub mask: SensingMask,
    #[serde(default = "default_n_targets")]
    pub n_targets: usize,
}

fn default_mask() -> SensingMask {
    SensingMask::FullFrame
}

fn default_n_targets() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectBlock {
    pub grid: GridSource,
    pub payload: ConstellationSpec,
    pub target: TargetSpec,
    pub masks: Vec<SensingMask>,
    /// SNR sweep `[start, stop, step]` in dB, inclusive.
    pub snr_db: [f64; 3],
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_threshold")]
    pub threshold_factor: f64,
    /// Pd level reported in the summary.
    #[serde(default = "default_pd")]
    pub pd_target: f64,
}

fn default_threshold() -> f64 {
    isac_core::radar_channel::DEFAULT_THRESHOLD_FACTOR
}

fn default_pd() -> f64 {
    0.9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct V2iBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<V2iScenario>,
    /// Seeds for the handover Monte-Carlo summary; 0 skips it.
    #[serde(default)]
    pub handover_seeds: usize,
}

impl V2iBlock {
    pub fn resolve(&self) -> Result<V2iScenario, CliError> {
        match (&self.preset, &self.scenario) {
            (Some(name), None) => scenario_preset(name).map_err(|e| CliError::field("preset", e.to_string())),
            (None, Some(s)) => Ok(s.clone()),
            _ => Err(CliError::field("v2i", "give exactly one of `preset` or `scenario`")),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(CliError::parse)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks that the block for the chosen experiment is present and sane.
    pub fn validate(&self) -> Result<(), CliError> {
        let missing = || CliError::field(block_name(self.experiment), "block required for this experiment");
        let positive = |name: &str, v: usize| {
            if v == 0 {
                Err(CliError::field(name, "must be >= 1"))
            } else {
                Ok(())
            }
        };
        match self.experiment {
            Experiment::Acf => {
                let b = self.acf.as_ref().ok_or_else(missing)?;
                positive("trials", b.trials)?;
                if b.bases.is_empty() {
                    return Err(CliError::field("bases", "needs at least one basis"));
                }
                if b.integrations.is_empty() || b.integrations.contains(&0) {
                    return Err(CliError::field("integrations", "values must be >= 1"));
                }
                b.constellation.build()?;
                for basis in &b.bases {
                    basis.resolve().map_err(CliError::from_core_config)?;
                }
            }
            Experiment::Ambiguity => {
                let b = self.ambiguity.as_ref().ok_or_else(missing)?;
                positive("doppler_bins", b.doppler_bins)?;
                b.constellation.build()?;
                b.basis.resolve().map_err(CliError::from_core_config)?;
            }
            Experiment::Kurtosis => {
                let b = self.kurtosis.as_ref().ok_or_else(missing)?;
                if b.constellations.is_empty() {
                    return Err(CliError::field("constellations", "needs at least one constellation"));
                }
                for c in &b.constellations {
                    c.build()?;
                }
            }
            Experiment::RankBases => {
                let b = self.rank_bases.as_ref().ok_or_else(missing)?;
                positive("trials", b.trials)?;
                if b.trials < 2 {
                    return Err(CliError::field("trials", "ranking needs >= 2 trials for confidence intervals"));
                }
                if b.bases.is_empty() {
                    return Err(CliError::field("bases", "needs at least one basis"));
                }
                b.constellation.build()?;
            }
            Experiment::NrGrid => {
                let b = self.nr_grid.as_ref().ok_or_else(missing)?;
                b.grid.resolve()?;
                if let Some(p) = &b.payload {
                    p.build()?;
                }
            }
            Experiment::Estimate => {
                let b = self.estimate.as_ref().ok_or_else(missing)?;
                b.grid.resolve()?;
                b.payload.build()?;
                if b.targets.is_empty() {
                    return Err(CliError::field("targets", "needs at least one target"));
                }
                positive("n_targets", b.n_targets)?;
            }
            Experiment::Detect => {
                let b = self.detect.as_ref().ok_or_else(missing)?;
                b.grid.resolve()?;
                b.payload.build()?;
                if b.masks.is_empty() {
                    return Err(CliError::field("masks", "needs at least one mask"));
                }
                if b.trials < 100 {
                    return Err(CliError::field("trials", "detection curves need at least 100 trials"));
                }
                let [start, stop, step] = b.snr_db;
                if !(step > 0.0) || !(stop >= start) {
                    return Err(CliError::field("snr_db", "expected [start, stop, step] with step > 0 and stop >= start"));
                }
                if !(0.0..=1.0).contains(&b.pd_target) {
                    return Err(CliError::field("pd_target", "must lie in [0, 1]"));
                }
            }
            Experiment::V2i => {
                let b = self.v2i.as_ref().ok_or_else(missing)?;
                b.resolve()?.validate().map_err(CliError::from_core_config)?;
            }
        }
        Ok(())
    }

    /// Applies command-line overrides; `trials` reaches every block that has one.
    pub fn apply_overrides(&mut self, seed: Option<u64>, trials: Option<usize>, out: Option<&Path>) {
        if let Some(s) = seed {
            self.seed = s;
        }
        if let Some(dir) = out {
            self.output_dir = dir.to_path_buf();
        }
        if let Some(t) = trials {
            if let Some(b) = &mut self.acf {
                b.trials = t;
            }
            if let Some(b) = &mut self.rank_bases {
                b.trials = t;
            }
            if let Some(b) = &mut self.detect {
                b.trials = t;
            }
        }
    }

    /// Fills defaults that depend on other fields so the metadata echo is complete.
    pub fn resolved(&self) -> Result<RunConfig, CliError> {
        let mut out = self.clone();
        let resolve_bases = |bases: &mut Vec<BasisConfig>| -> Result<(), CliError> {
            for b in bases.iter_mut() {
                *b = b.resolved().map_err(CliError::from_core_config)?;
            }
            Ok(())
        };
        if let Some(b) = &mut out.acf {
            resolve_bases(&mut b.bases)?;
        }
        if let Some(b) = &mut out.rank_bases {
            resolve_bases(&mut b.bases)?;
        }
        if let Some(b) = &mut out.ambiguity {
            b.basis = b.basis.resolved().map_err(CliError::from_core_config)?;
        }
        for grid in [
            out.nr_grid.as_mut().map(|b| &mut b.grid),
            out.estimate.as_mut().map(|b| &mut b.grid),
            out.detect.as_mut().map(|b| &mut b.grid),
        ]
        .into_iter()
        .flatten()
        {
            if grid.preset.is_some() {
                grid.spec = Some(grid.resolve()?);
                grid.preset = None;
            }
        }
        if let Some(b) = &mut out.v2i {
            if b.preset.is_some() {
                b.scenario = Some(b.resolve()?);
                b.preset = None;
            }
        }
        Ok(out)
    }
}

fn block_name(e: Experiment) -> &'static str {
    match e {
        Experiment::Acf => "acf",
        Experiment::Ambiguity => "ambiguity",
        Experiment::Kurtosis => "kurtosis",
        Experiment::RankBases => "rank_bases",
        Experiment::NrGrid => "nr_grid",
        Experiment::Estimate => "estimate",
        Experiment::Detect => "detect",
        Experiment::V2i => "v2i",
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config { field: None, message: format!("{}: {e}", path.display()) })?;
    RunConfig::from_json(&text)
}
