use crate::error::{Error, Result};

/// Periodic transmit-every-N-seconds operation without local storage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DutyCycleParams {
    /// Seconds between transmissions (`N`).
    pub period: f64,
    pub bits_per_sample: f64,
    /// Radio bit rate used to turn `bits_per_sample` into on-time.
    pub data_rate: f64,
    /// Current with the radio on, amperes.
    pub on_current: f64,
    /// Computation plus leakage current with the radio off, amperes.
    pub compute_leak_current: f64,
    /// Power-on (and power-off) transient, seconds.
    pub transition_time: f64,
    /// Accounting horizon (`n_sec`), seconds.
    pub horizon: f64,
    pub supply_voltage: f64,
}

impl DutyCycleParams {
    /// SX1272 LoRa radio on the nRF52 node: 72.5 mA on, 28 uA leakage plus the
    /// 0.468 uA average of one 3.6 mA x 130 us ISA cycle per second, a 1 ms
    /// transient and one 24-byte record per transmission at the SF7 bit rate,
    /// accounted over one day.
    pub fn lora_reference(period: f64) -> Self {
        Self {
            period,
            bits_per_sample: 24.0 * 8.0,
            data_rate: 5_468.75,
            on_current: 72.5e-3,
            compute_leak_current: 28e-6 + 3.6e-3 * 130e-6,
            transition_time: 1e-3,
            horizon: 86_400.0,
            supply_voltage: 3.7,
        }
    }

    pub fn with_period(mut self, period: f64) -> Self {
        self.period = period;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.period >= 1.0) {
            return Err(Error::invalid("period", "must be >= 1 s"));
        }
        if !(self.horizon > 0.0) {
            return Err(Error::invalid("horizon", "must be > 0"));
        }
        if !(self.data_rate > 0.0) {
            return Err(Error::invalid("data_rate", "must be > 0"));
        }
        if self.transition_time < 0.0 || self.bits_per_sample < 0.0 {
            return Err(Error::invalid("transition_time", "must be >= 0"));
        }
        if self.on_current < self.compute_leak_current {
            return Err(Error::invalid(
                "on_current",
                "must not be below the compute/leakage current",
            ));
        }
        Ok(())
    }

    /// Transmissions inside the horizon; a period longer than the horizon
    /// still yields one transmission.
    pub fn transmissions(&self) -> f64 {
        if self.period > self.horizon {
            1.0
        } else {
            self.horizon / self.period
        }
    }

    /// Radio on-time `T_on` over the horizon.
    pub fn on_time(&self) -> f64 {
        self.bits_per_sample / self.data_rate * self.transmissions()
    }
}

/// Energy over the horizon: on-window, off-window leakage and two transients
/// per transmission.
pub fn duty_cycle_energy(p: &DutyCycleParams) -> Result<f64> {
    p.validate()?;
    let on = p.on_time();
    if on > p.horizon {
        return Err(Error::invalid(
            "bits_per_sample",
            "radio on-time exceeds the accounting horizon",
        ));
    }
    let off = p.horizon - on;
    let charge = on * p.on_current
        + off * p.compute_leak_current
        + 2.0 * p.transition_time * p.on_current * p.transmissions();
    Ok(charge * p.supply_voltage)
}

/// Fraction of samples lost when only the latest sample of each period is sent.
pub fn info_loss(period: f64, sample_period: f64) -> Result<f64> {
    if !(sample_period > 0.0) {
        return Err(Error::invalid("sample_period", "must be > 0"));
    }
    if !(period > 0.0) {
        return Err(Error::invalid("period", "must be > 0"));
    }
    Ok((1.0 - sample_period / period).max(0.0))
}
