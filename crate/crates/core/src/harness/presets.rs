//! Bundled scenarios and figure reproduction.

use super::config::ScenarioConfig;
use super::{run, HarnessError, RunReport};

macro_rules! presets {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../../presets/", $name, ".toml")))),*]
    };
}

/// `(name, TOML text)` for every bundled scenario.
pub const PRESETS: &[(&str, &str)] = presets![
    "fig3_individual",
    "fig4_mepe",
    "fig4_meps",
    "fig4_mspe",
    "fig5_mepc",
    "ext1_mode2",
    "ext1_mode3",
    "postselected_mepe",
];

/// Presets run by each figure id.
pub const FIGURES: &[(&str, &[&str])] = &[
    ("fig3", &["fig3_individual"]),
    ("fig4", &["fig4_mepe", "fig4_meps", "fig4_mspe"]),
    ("fig5", &["fig5_mepc"]),
    ("ext1", &["ext1_mode2", "ext1_mode3"]),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// Parses a bundled preset, optionally replacing its seed.
pub fn preset_config(name: &str, seed: Option<u64>) -> Result<ScenarioConfig, HarnessError> {
    let text = preset(name).ok_or_else(|| HarnessError::Config(format!("no preset named {name:?}")))?;
    let mut cfg = ScenarioConfig::from_toml(text)
        .map_err(|e| HarnessError::Config(format!("preset {name}: {e}")))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

pub fn run_preset(name: &str, seed: Option<u64>) -> Result<RunReport, HarnessError> {
    run(&preset_config(name, seed)?.validate()?)
}

/// Runs every preset behind `figure`, in a fixed order.
pub fn reproduce(figure: &str, seed: Option<u64>) -> Result<Vec<RunReport>, HarnessError> {
    let (_, names) = FIGURES
        .iter()
        .find(|(id, _)| id.eq_ignore_ascii_case(figure))
        .ok_or_else(|| HarnessError::UnknownFigure(figure.to_string()))?;
    names.iter().map(|n| run_preset(n, seed)).collect()
}
