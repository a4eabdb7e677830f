//! Simulated cluster lifetime against the closed-form lifetime models.

use super::config::{LoraCost, Mode, ScenarioConfig, StopRule, Workload};
use super::engine::run_scenario;
use crate::energy::{network_lifetime_ci, network_lifetime_ci_cas, CiEnergyParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crosscheck {
    /// First-death lifetime from the simulator, seconds.
    pub simulated: f64,
    /// Closed-form lifetime, seconds.
    pub closed_form: f64,
    pub relative_error: f64,
}

fn distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

/// Checks that `config` describes one cluster that repeats the same
/// anomaly cycle until its first node dies. The reason names the first
/// condition that fails.
pub fn check_stationary(config: &ScenarioConfig) -> Result<()> {
    let refuse = |why: &str| Err(Error::NonStationary(why.to_string()));
    if !config.mode.uses_ci() {
        return refuse("mode must be isa_ci or isa_ci_cas");
    }
    if config.workload != Workload::SquareWave || config.noise != 0.0 {
        return refuse("workload must be a noise-free square wave");
    }
    let m = config.anomaly_magnitude;
    if m / (1.0 + m) <= config.thresholds.anomaly_x {
        return refuse("anomaly magnitude does not trigger on both edges");
    }
    if !config.relays.is_empty() {
        return refuse("relays are not part of the closed form");
    }
    if config.lora_cost != LoraCost::Measured {
        return refuse("lora_cost must be measured");
    }
    if config.node_count() > config.cluster.max_members {
        return refuse("nodes do not fit in one cluster");
    }
    if config.heartbeat > 0.0 && config.heartbeat < config.anomaly_period {
        return refuse("heartbeat shorter than the anomaly period adds uplinks");
    }
    let ps = &config.positions;
    for (i, &a) in ps.iter().enumerate() {
        if ps[i + 1..]
            .iter()
            .any(|&b| distance(a, b) > config.cluster.ble_range)
        {
            return refuse("nodes are not all within BLE range");
        }
    }
    let range = crate::energy::lora_range(&config.lora, &config.link, &config.receiver)?;
    if ps.iter().any(|&p| distance(p, config.hub) > range) {
        return refuse("hub is not within direct LoRa range");
    }
    Ok(())
}

/// Closed-form energies for one anomaly cycle of `config`.
pub fn cycle_energies(config: &ScenarioConfig) -> CiEnergyParams {
    let p = &config.profile;
    let v = p.supply_voltage;
    let period = config.anomaly_period;
    let samples = period / config.sample_period;
    let leak = p.leakage_current * period;
    CiEnergyParams {
        e_long_range: p.lora_uplink_energy(),
        e_short_range: p.ble_event.charge() * v,
        e_compute_ci: (p.isa_ci_compute.charge() * samples + leak) * v,
        e_compute_ci_cas: (p.isa_ci_cas_compute.charge() * samples + leak) * v,
        battery_energy: config.battery_coulombs() * v,
        cluster_size: config.node_count() as u32,
    }
}

/// Runs `config` to its first death and compares with the fixed-head or
/// rotating-head closed form for its mode.
pub fn lifetime_crosscheck(config: &ScenarioConfig) -> Result<Crosscheck> {
    check_stationary(config)?;
    let params = cycle_energies(config);
    let closed_form = match config.mode {
        Mode::IsaCiCas => network_lifetime_ci_cas(&params, config.anomaly_period)?,
        _ => network_lifetime_ci(&params, config.anomaly_period)?,
    };
    let mut cfg = config.clone();
    cfg.stop = StopRule::FirstDeath;
    cfg.record_events = false;
    cfg.duration = cfg.duration.max(3.0 * closed_form);
    let result = run_scenario(&cfg)?;
    let simulated = result
        .first_death_s()
        .ok_or_else(|| Error::NonStationary("no node died within the horizon".into()))?;
    Ok(Crosscheck {
        simulated,
        closed_form,
        relative_error: (simulated - closed_form).abs() / closed_form,
    })
}
