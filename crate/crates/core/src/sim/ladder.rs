//! The five-rung lifetime ladder, from an always-on radio to rotating heads.

use rayon::prelude::*;

use super::config::{Mode, ScenarioConfig};
use super::engine::run_scenario;
use super::profile::EnergyProfile;
use crate::error::Result;

/// Rung names in ladder order; also the preset file stems.
pub const RUNGS: [&str; 5] = [
    "lora_every_second",
    "duty_cycled_lora",
    "isa",
    "isa_ci",
    "isa_ci_cas",
];

/// Built-in configuration of one rung.
pub fn rung_config(mode: Mode) -> ScenarioConfig {
    let nodes = if mode.uses_ci() { 2 } else { 1 };
    let mut c = ScenarioConfig::default().with_line(nodes, 1.0);
    c.mode = mode;
    c.profile = EnergyProfile::lifetime_preset();
    c.record_events = false;
    c
}

/// All rungs in order.
pub fn ladder_configs() -> Vec<(&'static str, ScenarioConfig)> {
    RUNGS
        .iter()
        .map(|&name| {
            let mode = name.parse().expect("rung names are modes");
            (name, rung_config(mode))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RungResult {
    pub name: String,
    pub mode: Mode,
    pub nodes: usize,
    pub first_death_s: Option<f64>,
    pub last_death_s: Option<f64>,
    /// Lifetime with only leakage drawing on the battery.
    pub leakage_bound_s: f64,
}

impl RungResult {
    /// Network lifetime: the first death, or the horizon if nobody died.
    pub fn lifetime_s(&self, horizon_s: f64) -> f64 {
        self.first_death_s.unwrap_or(horizon_s)
    }
}

pub fn leakage_bound_s(config: &ScenarioConfig) -> f64 {
    config.battery_coulombs() / config.profile.leakage_current
}

/// Runs every rung in parallel; results keep the input order.
pub fn run_ladder(rungs: &[(&str, ScenarioConfig)]) -> Result<Vec<RungResult>> {
    rungs
        .par_iter()
        .map(|(name, cfg)| {
            let r = run_scenario(cfg)?;
            Ok(RungResult {
                name: name.to_string(),
                mode: cfg.mode,
                nodes: cfg.node_count(),
                first_death_s: r.first_death_s(),
                last_death_s: r.last_death_s(),
                leakage_bound_s: leakage_bound_s(cfg),
            })
        })
        .collect()
}
