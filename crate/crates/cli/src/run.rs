//! Experiment dispatch and artifact emission.
//!
//! CSV numbers use Rust's shortest round-trip decimal form so reruns diff cleanly.
//! Power quantities in dB are `10·log10` of linear power.

use std::fs;
use std::path::{Path, PathBuf};

use isac_core::constellation::{apply_shaping, kurtosis, sample_kurtosis, sample_symbols, KurtosisClass, ShapingSpec};
use isac_core::modulation::modulate;
use isac_core::nr_grid::{fill_payload, pilot_fraction, ResourceGrid};
use isac_core::radar_channel::{
    apply_scene, detection_rate, snr_at_pd, CarrierParams, DetectionConfig, Periodogram, SensingMask, Target,
    TargetScene,
};
use isac_core::sensing_stats::{ambiguity_function, avg_squared_acf, rank_bases, to_db, AcfConfig};
use isac_core::v2i_sim::{reduction_pct, run_handover, simulate_all, write_events_jsonl, Mode, Stage};
use isac_core::Complex64;
use serde::Serialize;

use crate::config::{
    AcfBlock, AmbiguityBlock, ConstellationSpec, DetectBlock, EstimateBlock, GridSource, KurtosisBlock, NrGridBlock,
    RankBasesBlock, RunConfig, TargetSpec, V2iBlock,
};
use crate::svg::{write_heatmap_svg, write_svg, Heatmap, PlotStyle, Series};
use crate::{CliError, VERSION};

pub const DB_CONVENTION: &str = "power_db = 10*log10(linear power); ACF curves are normalized to a lag-0 mean of 1";
pub const CSV_NUMBER_FORMAT: &str = "shortest round-trip decimal";
const DB_PLOT_FLOOR: f64 = -80.0;

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub files: Vec<String>,
}

#[derive(Serialize)]
struct Metadata<'a> {
    tool: &'static str,
    version: &'static str,
    experiment: &'static str,
    seed: u64,
    db_convention: &'static str,
    csv_number_format: &'static str,
    outputs: &'a [String],
    config: &'a RunConfig,
}

/// Files produced by one experiment, in write order.
#[derive(Default)]
struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    fn svg(&mut self, plot: bool, name: &str, doc: impl FnOnce() -> Result<String, CliError>) -> Result<(), CliError> {
        if plot {
            self.add(name, doc()?.into_bytes());
        }
        Ok(())
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn csv_bytes(header: &[&str], rows: Vec<Vec<String>>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| CliError::runtime("csv", e))?;
    for r in rows {
        w.write_record(&r).map_err(|e| CliError::runtime("csv", e))?;
    }
    w.into_inner().map_err(|e| CliError::runtime("csv", e))
}

fn core(context: &str) -> impl Fn(isac_core::IsacError) -> CliError + '_ {
    move |e| CliError::runtime(context, e)
}

fn block<'a, T>(b: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
    b.as_ref()
        .ok_or_else(|| CliError::field(name, "block required for this experiment"))
}

/// Runs `cfg`, writing artifacts and `metadata.json` into its output directory.
pub fn run_experiment(cfg: &RunConfig, plot: bool) -> Result<RunSummary, CliError> {
    cfg.validate()?;
    let resolved = cfg.resolved()?;
    use crate::config::Experiment as E;
    let artifacts = match cfg.experiment {
        E::Acf => run_acf(block(&cfg.acf, "acf")?, cfg.seed, plot)?,
        E::Ambiguity => run_ambiguity(block(&cfg.ambiguity, "ambiguity")?, cfg.seed, plot)?,
        E::Kurtosis => run_kurtosis(block(&cfg.kurtosis, "kurtosis")?, cfg.seed, plot)?,
        E::RankBases => run_rank(block(&cfg.rank_bases, "rank_bases")?, cfg.seed, plot)?,
        E::NrGrid => run_nr_grid(block(&cfg.nr_grid, "nr_grid")?, cfg.seed, plot)?,
        E::Estimate => run_estimate(block(&cfg.estimate, "estimate")?, cfg.seed, plot)?,
        E::Detect => run_detect(block(&cfg.detect, "detect")?, cfg.seed, plot)?,
        E::V2i => run_v2i(block(&cfg.v2i, "v2i")?, cfg.seed, plot)?,
    };

    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).map_err(|e| CliError::runtime(&dir.display().to_string(), e))?;
    let mut files = Vec::new();
    for (name, bytes) in &artifacts.files {
        write_file(dir, name, bytes)?;
        files.push(name.clone());
    }
    let meta = Metadata {
        tool: "isac-lab",
        version: VERSION,
        experiment: cfg.experiment.as_str(),
        seed: cfg.seed,
        db_convention: DB_CONVENTION,
        csv_number_format: CSV_NUMBER_FORMAT,
        outputs: &files,
        config: &resolved,
    };
    let text = serde_json::to_vec_pretty(&meta).map_err(|e| CliError::runtime("metadata", e))?;
    write_file(dir, "metadata.json", &text)?;
    files.push("metadata.json".into());
    Ok(RunSummary {
        output_dir: dir.clone(),
        files,
    })
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| CliError::runtime(&path.display().to_string(), e))
}

fn run_acf(b: &AcfBlock, seed: u64, plot: bool) -> Result<Artifacts, CliError> {
    let c = b.constellation.build()?;
    let mut out = Artifacts::default();
    let mut summary = Vec::new();
    let mut curves = Vec::new();
    let mut layers = Vec::new();
    let multi_k = b.integrations.len() > 1;
    for basis_cfg in &b.bases {
        let basis = basis_cfg.build().map_err(CliError::from_core_config)?;
        for &k in &b.integrations {
            let mut acf = AcfConfig::new(c.clone(), basis.clone(), b.trials, seed).with_integrations(k);
            if let Some(p) = &b.pulse {
                acf = acf.with_pulse(p.clone());
            }
            acf.exclude_mainlobe_lags = b.exclude_mainlobe_lags;
            if let Some(budget) = b.budget {
                acf.budget = budget;
            }
            let (stats, d) = avg_squared_acf(&acf).map_err(core("acf"))?;
            let label = if multi_k { format!("{} K={k}", basis.label()) } else { basis.label().to_string() };
            let x = stats.lag_symbols();
            let rows = (0..x.len())
                .map(|i| {
                    vec![
                        num(x[i]),
                        num(to_db(stats.mean_sq_acf[i])),
                        num(to_db(d.iceberg[i])),
                        num(to_db(d.sea_level[i])),
                        num(stats.var_acf[i]),
                    ]
                })
                .collect();
            out.add(
                format!("acf_{}_k{k}.csv", basis.label().to_ascii_lowercase()),
                csv_bytes(&["lag", "mean_sq_acf_db", "iceberg_db", "sea_level_db", "var"], rows)?,
            );
            summary.push(vec![
                basis.label().to_string(),
                k.to_string(),
                stats.trials.to_string(),
                num(stats.psl_db),
                num(stats.isl_db),
                num(stats.far_floor_db()),
            ]);
            curves.push(Series {
                label: label.clone(),
                x: x.clone(),
                y: stats.mean_sq_acf.iter().map(|&v| to_db(v)).collect(),
            });
            layers.push(Series {
                label: format!("{label} iceberg"),
                x: x.clone(),
                y: d.iceberg.iter().map(|&v| to_db(v)).collect(),
            });
            layers.push(Series {
                label: format!("{label} sea level"),
                x,
                y: d.sea_level.iter().map(|&v| to_db(v)).collect(),
            });
        }
    }
    out.add(
        "summary.csv",
        csv_bytes(&["basis", "integrations", "trials", "psl_db", "isl_db", "far_floor_db"], summary)?,
    );
    let mut style = PlotStyle::new("Average squared ACF", "lag (symbols)", "power (dB)");
    style.y_min = Some(DB_PLOT_FLOOR);
    out.svg(plot, "acf.svg", || write_svg(&curves, &style))?;
    if b.pulse.is_some() || multi_k {
        let mut style = PlotStyle::new("Iceberg and sea level", "lag (symbols)", "power (dB)");
        style.y_min = Some(DB_PLOT_FLOOR);
        out.svg(plot, "iceberg_sea_level.svg", || write_svg(&layers, &style))?;
    }
    Ok(out)
}

fn run_ambiguity(b: &AmbiguityBlock, seed: u64, plot: bool) -> Result<Artifacts, CliError> {
    let c = b.constellation.build()?;
    let basis = b.basis.build().map_err(CliError::from_core_config)?;
    let symbols = sample_symbols(&c, basis.size(), seed).map_err(core("ambiguity"))?;
    let frame = modulate(&basis, &symbols).map_err(core("ambiguity"))?;
    let amb = ambiguity_function(&frame.samples, b.doppler_bins).map_err(core("ambiguity"))?;
    let nd = amb.dopplers.len();
    let mut rows = Vec::with_capacity(amb.delays * nd);
    for l in 0..amb.delays {
        for (j, v) in amb.dopplers.iter().enumerate() {
            rows.push(vec![l.to_string(), v.to_string(), num(to_db(amb.power[l * nd + j]))]);
        }
    }
    let mut out = Artifacts::default();
    out.add("ambiguity.csv", csv_bytes(&["delay", "doppler", "power_db"], rows)?);
    let mut style = PlotStyle::new(&format!("Ambiguity surface ({})", basis.label()), "Doppler bin", "delay (samples)");
    style.y_min = Some(DB_PLOT_FLOOR);
    out.svg(plot, "ambiguity.svg", || {
        write_heatmap_svg(
            &Heatmap {
                rows: amb.delays,
                cols: nd,
                values: amb.power.iter().map(|&v| to_db(v)).collect(),
                x_range: (amb.dopplers[0] as f64, amb.dopplers[nd - 1] as f64),
                y_range: (0.0, amb.delays as f64 - 1.0),
            },
            &style,
        )
    })?;
    Ok(out)
}

fn class_name(k: f64) -> &'static str {
    match KurtosisClass::of(k) {
        KurtosisClass::SubGaussian => "sub-gaussian",
        KurtosisClass::Gaussian => "gaussian",
        KurtosisClass::SuperGaussian => "super-gaussian",
    }
}

fn run_kurtosis(b: &KurtosisBlock, seed: u64, plot: bool) -> Result<Artifacts, CliError> {
    let mut rows = Vec::new();
    let mut sweeps = Vec::new();
    for (i, spec) in b.constellations.iter().enumerate() {
        let base = spec.build()?;
        let sampled = |c: &isac_core::constellation::Constellation, j: u64| -> Result<String, CliError> {
            if b.samples == 0 {
                return Ok(String::new());
            }
            let s = sample_symbols(c, b.samples, seed.wrapping_add(1000 * i as u64 + j)).map_err(core("kurtosis"))?;
            Ok(num(sample_kurtosis(&s)))
        };
        let k = kurtosis(&base);
        rows.push(vec![base.name().to_string(), String::new(), num(k), class_name(k).into(), sampled(&base, 0)?]);
        let mut sweep = Series {
            label: base.name().to_string(),
            x: Vec::new(),
            y: Vec::new(),
        };
        for (j, &lambda) in b.mb_lambdas.iter().enumerate() {
            let shaped = apply_shaping(&base, &ShapingSpec::MaxwellBoltzmann { lambda }).map_err(CliError::from_core_config)?;
            let ks = kurtosis(&shaped);
            rows.push(vec![
                base.name().to_string(),
                num(lambda),
                num(ks),
                class_name(ks).into(),
                sampled(&shaped, j as u64 + 1)?,
            ]);
            sweep.x.push(lambda);
            sweep.y.push(ks);
        }
        if !sweep.x.is_empty() {
            sweeps.push(sweep);
        }
    }
    let mut out = Artifacts::default();
    out.add(
        "kurtosis.csv",
        csv_bytes(&["constellation", "mb_lambda", "kurtosis", "class", "sample_kurtosis"], rows)?,
    );
    if !sweeps.is_empty() {
        let style = PlotStyle::new("Kurtosis under Maxwell-Boltzmann shaping", "lambda", "kurtosis");
        out.svg(plot, "kurtosis.svg", || write_svg(&sweeps, &style))?;
    }
    Ok(out)
}

fn run_rank(b: &RankBasesBlock, seed: u64, plot: bool) -> Result<Artifacts, CliError> {
    let c = b.constellation.build()?;
    let bases = b
        .bases
        .iter()
        .map(|x| x.build().map_err(CliError::from_core_config))
        .collect::<Result<Vec<_>, _>>()?;
    let ranked = rank_bases(&c, &bases, b.trials, seed).map_err(core("rank-bases"))?;
    let rows = ranked
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let (lo, hi) = r.interval();
            vec![
                (i + 1).to_string(),
                r.label.clone(),
                num(r.isl_db),
                num(r.isl_linear),
                num(lo),
                num(hi),
                num(r.half_width_db),
                num(r.far_floor_db),
            ]
        })
        .collect();
    let mut out = Artifacts::default();
    out.add(
        "ranking.csv",
        csv_bytes(
            &["rank", "basis", "isl_db", "isl_linear", "ci_low", "ci_high", "half_width_db", "far_floor_db"],
            rows,
        )?,
    );
    let series: Vec<Series> = ranked
        .iter()
        .enumerate()
        .map(|(i, r)| Series {
            label: r.label.clone(),
            x: vec![(i + 1) as f64],
            y: vec![r.isl_db],
        })
        .collect();
    let style = PlotStyle::new("Integrated sidelobe level by basis", "rank", "ISL (dB)");
    out.svg(plot, "ranking.svg", || write_svg(&series, &style))?;
    Ok(out)
}

fn build_grid(src: &GridSource, payload: Option<&ConstellationSpec>, seed: u64) -> Result<ResourceGrid, CliError> {
    let mut grid = src.resolve()?.build().map_err(CliError::from_core_config)?;
    if let Some(p) = payload {
        fill_payload(&mut grid, &p.build()?, seed).map_err(core("payload"))?;
    }
    Ok(grid)
}

fn run_nr_grid(b: &NrGridBlock, seed: u64, plot: bool) -> Result<Artifacts, CliError> {
    let grid = build_grid(&b.grid, b.payload.as_ref(), seed)?;
    let mut csv = Vec::new();
    grid.write_csv(&mut csv).map_err(|e| CliError::runtime("grid csv", e))?;
    let total = grid.len() as f64;
    let rows = grid
        .label_counts()
        .into_iter()
        .map(|(l, n)| vec![l.as_str().to_string(), n.to_string(), num(n as f64 / total)])
        .collect();
    let mut out = Artifacts::default();
    out.add("grid.csv", csv);
    out.add("label_counts.csv", csv_bytes(&["label", "count", "fraction"], rows)?);
    out.add(
        "grid_summary.csv",
        csv_bytes(
            &["subcarriers", "ofdm_symbols", "scs_khz", "slots", "reserved", "pilot_fraction"],
            vec![vec![
                grid.subcarriers().to_string(),
                grid.ofdm_symbols().to_string(),
                grid.scs_khz().to_string(),
                grid.slots().to_string(),
                grid.reserved_count().to_string(),
                num(pilot_fraction(&grid)),
            ]],
        )?,
    );
    let style = PlotStyle::new("Resource grid labels (pilots bright, payload mid, empty dark)", "OFDM symbol", "subcarrier");
    out.svg(plot, "grid.svg", || {
        let mut values = vec![0.0; grid.len()];
        for s in 0..grid.ofdm_symbols() {
            for k in 0..grid.subcarriers() {
                let l = grid.label(s, k);
                values[k * grid.ofdm_symbols() + s] = if l.is_pilot() {
                    2.0
                } else if l == isac_core::nr_grid::ReLabel::Empty {
                    0.0
                } else {
                    1.0
                };
            }
        }
        write_heatmap_svg(
            &Heatmap {
                rows: grid.subcarriers(),
                cols: grid.ofdm_symbols(),
                values,
                x_range: (0.0, grid.ofdm_symbols() as f64 - 1.0),
                y_range: (0.0, grid.subcarriers() as f64 - 1.0),
            },
            &style,
        )
    })?;
    Ok(out)
}

fn scene_for(grid: &ResourceGrid, targets: &[TargetSpec], snr_db: Option<f64>) -> TargetScene {
    let carrier = CarrierParams::for_grid(grid);
    let targets: Vec<Target> = targets
        .iter()
        .map(|t| Target::at_bins(&carrier, t.delay_bin, t.doppler_bin, Complex64::new(t.amplitude[0], t.amplitude[1])))
        .collect();
    let noise_power = match (snr_db, targets.first()) {
        (Some(snr), Some(t)) => t.amplitude.norm_sqr() / 10f64.powf(snr / 10.0),
        _ => 0.0,
    };
    TargetScene {
        targets,
        noise_power,
        carrier,
    }
}

fn mask_name(m: &SensingMask) -> String {
    match m {
        SensingMask::FullFrame => "full_frame".into(),
        SensingMask::PilotsOnly => "pilots_only".into(),
        SensingMask::Labels(ls) => ls.iter().map(|l| l.as_str()).collect::<Vec<_>>().join("+"),
    }
}

fn run_estimate(b: &EstimateBlock, seed: u64, plot: bool) -> Result<Artifacts, CliError> {
    let grid = build_grid(&b.grid, Some(&b.payload), seed)?;
    let scene = scene_for(&grid, &b.targets, b.snr_db);
    let y = apply_scene(&grid, &scene, seed).map_err(CliError::from_core_config)?;
    let map = Periodogram::new(grid.subcarriers(), grid.ofdm_symbols())
        .compute(&grid, &y, &b.mask)
        .map_err(core("periodogram"))?;
    let report = isac_core::radar_channel::report_from_map(&grid, &map, b.n_targets);
    let rows = report
        .estimates
        .iter()
        .enumerate()
        .map(|(i, e)| {
            vec![
                (i + 1).to_string(),
                num(e.delay_s),
                num(e.doppler_hz),
                num(e.delay_bin),
                num(e.doppler_bin),
                num(to_db(e.peak_power)),
            ]
        })
        .collect();
    let truth = scene
        .targets
        .iter()
        .zip(&b.targets)
        .map(|(t, s)| {
            vec![
                num(t.delay_s),
                num(t.doppler_hz),
                num(s.delay_bin),
                num(s.doppler_bin),
                num(to_db(t.amplitude.norm_sqr())),
            ]
        })
        .collect();
    let mut out = Artifacts::default();
    out.add(
        "estimates.csv",
        csv_bytes(&["rank", "delay_s", "doppler_hz", "delay_bin", "doppler_bin", "peak_power_db"], rows)?,
    );
    out.add(
        "targets.csv",
        csv_bytes(&["delay_s", "doppler_hz", "delay_bin", "doppler_bin", "power_db"], truth)?,
    );
    out.add(
        "resolution.csv",
        csv_bytes(
            &["mask", "delay_bin_s", "doppler_bin_hz", "used_re_fraction"],
            vec![vec![
                mask_name(&b.mask),
                num(report.resolution.delay_bin_s),
                num(report.resolution.doppler_bin_hz),
                num(report.used_re_fraction),
            ]],
        )?,
    );
    let mut style = PlotStyle::new("Delay-Doppler periodogram", "Doppler bin", "delay bin");
    style.y_min = Some(to_db(map.power.iter().cloned().fold(0.0, f64::max)) - 60.0);
    out.svg(plot, "delay_doppler.svg", || {
        // Reorder Doppler columns from FFT order to centred order.
        let nv = map.n_doppler;
        let order: Vec<usize> = (0..nv).map(|j| (j + nv.div_ceil(2)) % nv).collect();
        let mut values = Vec::with_capacity(map.power.len());
        for d in 0..map.n_delay {
            for &v in &order {
                values.push(to_db(map.at(d, v)));
            }
        }
        write_heatmap_svg(
            &Heatmap {
                rows: map.n_delay,
                cols: nv,
                values,
                x_range: (map.signed_doppler(order[0]) as f64, map.signed_doppler(order[nv - 1]) as f64),
                y_range: (0.0, map.n_delay as f64 - 1.0),
            },
            &style,
        )
    })?;
    Ok(out)
}

fn sweep(spec: [f64; 3]) -> Vec<f64> {
    let [start, stop, step] = spec;
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    (0..n).map(|i| start + i as f64 * step).collect()
}

fn run_detect(b: &DetectBlock, seed: u64, plot: bool) -> Result<Artifacts, CliError> {
    let grid = build_grid(&b.grid, Some(&b.payload), seed)?;
    let scene = scene_for(&grid, std::slice::from_ref(&b.target), None);
    let cfg = DetectionConfig {
        threshold_factor: b.threshold_factor,
        trials: b.trials,
        seed,
    };
    let snrs = sweep(b.snr_db);
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    let mut series = Vec::new();
    let mut reference: Option<f64> = None;
    for mask in &b.masks {
        let curve = detection_rate(&grid, &scene, &cfg, mask, &snrs).map_err(core("detect"))?;
        let name = mask_name(mask);
        for p in &curve {
            rows.push(vec![name.clone(), num(p.snr_db), num(p.pd)]);
        }
        let at = snr_at_pd(&curve, b.pd_target);
        if reference.is_none() {
            reference = at;
        }
        let shift = match (at, reference) {
            (Some(a), Some(r)) => num(a - r),
            _ => String::new(),
        };
        let used = Periodogram::new(grid.subcarriers(), grid.ofdm_symbols())
            .compute(&grid, grid.values(), mask)
            .map(|m| m.used_re_fraction())
            .map_err(core("detect"))?;
        summary.push(vec![name.clone(), num(used), num(b.pd_target), at.map(num).unwrap_or_default(), shift]);
        series.push(Series {
            label: name,
            x: curve.iter().map(|p| p.snr_db).collect(),
            y: curve.iter().map(|p| p.pd).collect(),
        });
    }
    let mut out = Artifacts::default();
    out.add("detection.csv", csv_bytes(&["mask", "snr_db", "pd"], rows)?);
    out.add(
        "detection_summary.csv",
        csv_bytes(&["mask", "used_re_fraction", "pd_target", "snr_at_pd_db", "shift_db"], summary)?,
    );
    let style = PlotStyle::new("Detection probability", "per-RE SNR (dB)", "Pd");
    out.svg(plot, "detection.svg", || write_svg(&series, &style))?;
    Ok(out)
}

fn run_v2i(b: &V2iBlock, seed: u64, plot: bool) -> Result<Artifacts, CliError> {
    let mut scn = b.resolve()?;
    scn.seed = seed;
    let results = simulate_all(&scn).map_err(core("v2i"))?;
    let baseline_latency = |stage: Stage| {
        results
            .iter()
            .find(|r| r.stage == stage && r.mode == Mode::Baseline)
            .map(|r| r.latency_ms)
    };
    let rows = results
        .iter()
        .map(|r| {
            let red = match (r.mode, baseline_latency(r.stage)) {
                (Mode::SensingAssisted, Some(base)) => reduction_pct(base, r.latency_ms),
                _ => 0.0,
            };
            vec![
                r.stage.as_str().to_string(),
                r.mode.as_str().to_string(),
                num(r.latency_ms),
                num(r.overhead_fraction),
                num(r.throughput_rel),
                num(red),
            ]
        })
        .collect();
    let mut out = Artifacts::default();
    out.add(
        "stages.csv",
        csv_bytes(&["stage", "mode", "latency_ms", "overhead", "throughput_rel", "reduction_pct"], rows)?,
    );
    let mut events = Vec::new();
    write_events_jsonl(&results, &mut events).map_err(|e| CliError::runtime("events", e))?;
    out.add("events.jsonl", events);

    if b.handover_seeds > 0 && scn.handover.is_some() {
        let mut rows = Vec::new();
        for s in 0..b.handover_seeds as u64 {
            let mut seeded = scn.clone();
            seeded.seed = isac_core::seed::derive(seed, s);
            let base = run_handover(&seeded, Mode::Baseline).map_err(core("handover"))?;
            let sens = run_handover(&seeded, Mode::SensingAssisted).map_err(core("handover"))?;
            let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
            let cell = |v: Option<usize>| v.map(|c| c.to_string()).unwrap_or_default();
            rows.push(vec![
                s.to_string(),
                opt(sens.crossing_s),
                cell(sens.target_cell),
                cell(sens.prepared_cell),
                opt(sens.prepared_s),
                sens.preceded_crossing.to_string(),
                opt(base.trigger_s),
                num(base.interruption_ms),
                num(sens.interruption_ms),
            ]);
        }
        out.add(
            "handover_seeds.csv",
            csv_bytes(
                &[
                    "seed_index",
                    "crossing_s",
                    "target_cell",
                    "prepared_cell",
                    "prepared_s",
                    "preceded_crossing",
                    "baseline_trigger_s",
                    "baseline_interruption_ms",
                    "sensing_interruption_ms",
                ],
                rows,
            )?,
        );
    }

    let slot_ms = scn.timing.slot_ms().map_err(core("v2i"))?;
    let traces: Vec<Series> = results
        .iter()
        .filter(|r| r.stage == Stage::Connected && !r.trace.is_empty())
        .map(|r| Series {
            label: r.mode.as_str().to_string(),
            x: (0..r.trace.len()).map(|i| i as f64 * slot_ms).collect(),
            y: r.trace.clone(),
        })
        .collect();
    if !traces.is_empty() {
        let style = PlotStyle::new("Connected-mode throughput", "time (ms)", "throughput (bit/s/Hz)");
        out.svg(plot, "throughput.svg", || write_svg(&traces, &style))?;
    }
    Ok(out)
}
