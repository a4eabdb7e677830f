use crate::error::{Error, Result};

/// Attocoulombs per coulomb. Ledgers count integer attocoulombs so that
/// battery drawdown and category sums agree exactly.
pub const AC_PER_COULOMB: f64 = 1e18;

pub fn to_attocoulombs(coulombs: f64) -> i128 {
    (coulombs * AC_PER_COULOMB).round() as i128
}

pub fn to_coulombs(ac: i128) -> f64 {
    ac as f64 / AC_PER_COULOMB
}

/// A constant current drawn for a fixed time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Draw {
    /// Amperes.
    pub current: f64,
    /// Seconds.
    pub duration: f64,
}

impl Draw {
    pub const fn new(current: f64, duration: f64) -> Self {
        Self { current, duration }
    }

    pub fn charge(&self) -> f64 {
        self.current * self.duration
    }
}

/// Leakage current giving the measured idle floor.
pub const LEAKAGE_MEASURED: f64 = 28e-6;
/// Leakage current consistent with a 115-day leakage-only lifetime of a
/// 230 mAh cell.
pub const LEAKAGE_LIFETIME: f64 = 83.3e-6;

/// Per-event current and duration costs of the reference node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyProfile {
    pub supply_voltage: f64,
    pub lora_tx: Draw,
    pub lora_rx: Draw,
    /// Joules of radio setup charged with every measured LoRa uplink.
    pub lora_overhead: f64,
    pub ble_event: Draw,
    pub isa_compute: Draw,
    pub isa_ci_compute: Draw,
    pub isa_ci_cas_compute: Draw,
    pub leakage_current: f64,
}

impl Default for EnergyProfile {
    fn default() -> Self {
        Self {
            supply_voltage: 3.7,
            lora_tx: Draw::new(72.5e-3, 130e-3),
            lora_rx: Draw::new(12.5e-3, 60e-3),
            lora_overhead: 12.4e-3,
            ble_event: Draw::new(8.1e-3, 12e-3),
            isa_compute: Draw::new(3.6e-3, 130e-6),
            isa_ci_compute: Draw::new(3.61e-3, 135e-6),
            isa_ci_cas_compute: Draw::new(3.65e-3, 150e-6),
            leakage_current: LEAKAGE_MEASURED,
        }
    }
}

impl EnergyProfile {
    /// The profile with the lifetime-consistent leakage.
    pub fn lifetime_preset() -> Self {
        Self {
            leakage_current: LEAKAGE_LIFETIME,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.supply_voltage > 0.0) {
            return Err(Error::invalid("supply_voltage", "must be > 0"));
        }
        let draws = [
            ("lora_tx", self.lora_tx),
            ("lora_rx", self.lora_rx),
            ("ble_event", self.ble_event),
            ("isa_compute", self.isa_compute),
            ("isa_ci_compute", self.isa_ci_compute),
            ("isa_ci_cas_compute", self.isa_ci_cas_compute),
        ];
        for (name, d) in draws {
            if !(d.current >= 0.0 && d.duration >= 0.0) {
                return Err(Error::invalid(name, "current and duration must be >= 0"));
            }
        }
        if !(self.lora_overhead >= 0.0) || !(self.leakage_current >= 0.0) {
            return Err(Error::invalid(
                "leakage_current",
                "overhead and leakage must be >= 0",
            ));
        }
        Ok(())
    }

    /// Charge of one measured LoRa uplink: transmit, receive window and
    /// setup overhead.
    pub fn lora_uplink_charge(&self) -> f64 {
        self.lora_tx.charge() + self.lora_rx.charge() + self.lora_overhead / self.supply_voltage
    }

    pub fn lora_uplink_energy(&self) -> f64 {
        self.lora_uplink_charge() * self.supply_voltage
    }

    /// Average current of back-to-back receive and transmit windows.
    pub fn continuous_lora_current(&self) -> f64 {
        (self.lora_tx.charge() + self.lora_rx.charge())
            / (self.lora_tx.duration + self.lora_rx.duration)
    }
}
