//! Bundled scenario files. Full-size presets use the reference array sizes;
//! `desk_*` presets shrink the arrays so a run takes seconds.

use super::config::ScenarioConfig;
use crate::error::{Error, Result};

pub const PRESETS: &[(&str, &str)] = &[
    ("indoor_panel_10_10", include_str!("../../presets/indoor_panel_10_10.toml")),
    ("indoor_panel_25_10", include_str!("../../presets/indoor_panel_25_10.toml")),
    ("indoor_n_ris", include_str!("../../presets/indoor_n_ris.toml")),
    ("eight_panels_near_bs", include_str!("../../presets/eight_panels_near_bs.toml")),
    ("eight_panels_spread", include_str!("../../presets/eight_panels_spread.toml")),
    ("four_panels_quant", include_str!("../../presets/four_panels_quant.toml")),
    ("multihop_100ghz", include_str!("../../presets/multihop_100ghz.toml")),
    ("desk_indoor", include_str!("../../presets/desk_indoor.toml")),
    ("desk_multihop", include_str!("../../presets/desk_multihop.toml")),
];

pub fn preset_text(name: &str) -> Option<&'static str> {
    let name = name.strip_suffix(".toml").unwrap_or(name);
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn preset(name: &str) -> Result<ScenarioConfig> {
    let text = preset_text(name).ok_or_else(|| Error::config("preset", format!("no preset named '{name}'")))?;
    ScenarioConfig::from_toml_str(text)
}
