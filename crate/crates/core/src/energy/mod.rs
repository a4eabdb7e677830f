//! Closed-form energy, range and lifetime models.
//!
//! Everything here is a pure function of its inputs. Energies are in joules,
//! charges in coulombs, powers in watts and times in seconds; voltages are
//! always carried explicitly.

mod ci;
mod duty;
mod link;
mod lora;

pub use ci::{
    ci_savings, network_lifetime_ci, network_lifetime_ci_cas, network_lifetime_no_ci,
    CiEnergyParams,
};
pub use duty::{duty_cycle_energy, info_loss, DutyCycleParams};
pub use link::{
    fspl, landauer_limit, min_comm_energy, min_comm_energy_for_sensitivity, required_tx_power,
    LinkParams, PathGain, ReceiverParams,
};
pub use lora::{
    battery_bits, lora_airtime, lora_energy_per_bit, lora_energy_per_bit_multihop,
    lora_packet_bytes, lora_range, multihop_benefit, trx_power, CodeRate, LoRaParams,
};

/// Default supply voltage of the reference node, volts.
pub const DEFAULT_SUPPLY_VOLTAGE: f64 = 3.7;
