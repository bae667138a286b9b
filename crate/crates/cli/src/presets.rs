//! Run configurations shipped with the binary.

use crate::config::RunConfig;
use crate::CliError;

const PRESETS: [(&str, &str); 10] = [
    ("acf-bases", include_str!("../presets/acf-bases.json")),
    ("acf-integration", include_str!("../presets/acf-integration.json")),
    ("kurtosis-anchors", include_str!("../presets/kurtosis-anchors.json")),
    ("ambiguity-ofdm", include_str!("../presets/ambiguity-ofdm.json")),
    ("rank-bases", include_str!("../presets/rank-bases.json")),
    ("nr-grid-typical", include_str!("../presets/nr-grid-typical.json")),
    ("nr-grid-fr2-burst", include_str!("../presets/nr-grid-fr2-burst.json")),
    ("estimate-two-targets", include_str!("../presets/estimate-two-targets.json")),
    ("detect-pilot-vs-full", include_str!("../presets/detect-pilot-vs-full.json")),
    ("paper-fr2-120khz", include_str!("../presets/paper-fr2-120khz.json")),
];

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

/// Accepts the bare name or the name with a `.json` suffix.
pub fn preset_text(name: &str) -> Option<&'static str> {
    let name = name.strip_suffix(".json").unwrap_or(name);
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn preset(name: &str) -> Result<RunConfig, CliError> {
    let text = preset_text(name).ok_or_else(|| CliError::Config {
        field: None,
        message: format!("no config file or preset named `{name}` (see `isac-lab presets list`)"),
    })?;
    RunConfig::from_json(text)
}
