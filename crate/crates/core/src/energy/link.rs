use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};
use crate::units::{db_to_linear, linear_to_db, wavelength, BOLTZMANN, ROOM_TEMPERATURE_K};

/// Geometry and antennas of a single radio link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    pub carrier_frequency: f64,
    pub distance: f64,
    /// Path-loss exponent (2 for free space).
    pub path_loss_exponent: f64,
    pub tx_antenna_gain_db: f64,
    pub rx_antenna_gain_db: f64,
}

impl LinkParams {
    /// 2.45 GHz BLE link over 10 m with 2 dB antennas on both ends.
    pub fn ble_reference() -> Self {
        Self {
            carrier_frequency: 2.45e9,
            distance: 10.0,
            path_loss_exponent: 2.0,
            tx_antenna_gain_db: 2.0,
            rx_antenna_gain_db: 2.0,
        }
    }

    /// 915 MHz LoRa link with the exponent that reproduces the reference
    /// 1.25 km (SF7) and 4 km (SF12) ranges.
    pub fn lora_reference() -> Self {
        Self {
            carrier_frequency: 915e6,
            distance: 1_000.0,
            path_loss_exponent: 2.83,
            tx_antenna_gain_db: 0.0,
            rx_antenna_gain_db: 0.0,
        }
    }

    pub fn with_distance(mut self, distance: f64) -> Self {
        self.distance = distance;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_frequency > 0.0) || !self.carrier_frequency.is_finite() {
            return Err(Error::invalid("carrier_frequency", "must be > 0"));
        }
        if !(self.distance > 0.0) || !self.distance.is_finite() {
            return Err(Error::invalid("distance", "must be > 0"));
        }
        let n = self.path_loss_exponent;
        if !(2.0..=4.0).contains(&n) {
            return Err(Error::invalid(
                "path_loss_exponent",
                format!("{n} outside the accepted range [2, 4]"),
            ));
        }
        if n > 3.0 {
            log::warn!("path-loss exponent {n} is above the typical 2..3 range");
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        wavelength(self.carrier_frequency)
    }

    /// Combined linear antenna gain G_tx * G_rx.
    pub fn antenna_gain(&self) -> f64 {
        db_to_linear(self.tx_antenna_gain_db + self.rx_antenna_gain_db)
    }
}

/// Receiver noise and modulation requirements plus transmitter efficiency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceiverParams {
    pub noise_figure_db: f64,
    pub required_snr_db: f64,
    pub bandwidth: f64,
    pub data_rate: f64,
    /// Transmitter efficiency in (0, 1].
    pub tx_efficiency: f64,
    pub temperature: f64,
}

impl ReceiverParams {
    /// LoRa receiver at 125 kHz with NF = 3.5 dB and a 15 dB SNR requirement.
    pub fn lora_reference() -> Self {
        Self {
            noise_figure_db: 3.5,
            required_snr_db: 15.0,
            bandwidth: 125e3,
            data_rate: 5_468.75,
            tx_efficiency: 1.0,
            temperature: ROOM_TEMPERATURE_K,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth > 0.0) {
            return Err(Error::invalid("bandwidth", "must be > 0"));
        }
        if !(self.data_rate > 0.0) {
            return Err(Error::invalid("data_rate", "must be > 0"));
        }
        if !(self.tx_efficiency > 0.0 && self.tx_efficiency <= 1.0) {
            return Err(Error::invalid("tx_efficiency", "must lie in (0, 1]"));
        }
        if !(self.temperature > 0.0) {
            return Err(Error::invalid("temperature", "must be > 0 K"));
        }
        Ok(())
    }

    /// Thermal-noise-limited sensitivity kT * NF * SNR * BW, in watts.
    pub fn sensitivity(&self) -> f64 {
        BOLTZMANN
            * self.temperature
            * db_to_linear(self.noise_figure_db)
            * db_to_linear(self.required_snr_db)
            * self.bandwidth
    }
}

/// Link gain as a linear factor (<= 1 for practical links) and as a loss in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathGain {
    pub linear: f64,
    /// Positive number means loss.
    pub loss_db: f64,
}

/// Friis link gain `G_tx * G_rx * (lambda / (4 pi d))^n`.
pub fn fspl(link: &LinkParams) -> Result<PathGain> {
    link.validate()?;
    let ratio = link.wavelength() / (4.0 * PI * link.distance);
    let linear = link.antenna_gain() * ratio.powf(link.path_loss_exponent);
    Ok(PathGain {
        linear,
        loss_db: -linear_to_db(linear),
    })
}

/// Landauer bound `kT ln 2` on the energy to erase one bit.
pub fn landauer_limit(temperature: f64) -> Result<f64> {
    if !(temperature > 0.0) || !temperature.is_finite() {
        return Err(Error::invalid("temperature", "must be > 0 K"));
    }
    Ok(BOLTZMANN * temperature * LN_2)
}

/// Minimum transmit power that still reaches `sensitivity` over `gain`.
pub fn required_tx_power(sensitivity: f64, gain: &PathGain) -> f64 {
    sensitivity / gain.linear
}

/// Channel-limited energy per bit for an explicitly given receiver sensitivity.
pub fn min_comm_energy_for_sensitivity(
    sensitivity: f64,
    gain: &PathGain,
    tx_efficiency: f64,
    data_rate: f64,
) -> Result<f64> {
    if !(data_rate > 0.0) {
        return Err(Error::invalid("data_rate", "must be > 0"));
    }
    if !(tx_efficiency > 0.0 && tx_efficiency <= 1.0) {
        return Err(Error::invalid("tx_efficiency", "must lie in (0, 1]"));
    }
    Ok(sensitivity / (gain.linear * tx_efficiency * data_rate))
}

/// Channel-limited energy per bit with a thermal-noise receiver.
pub fn min_comm_energy(link: &LinkParams, rx: &ReceiverParams) -> Result<f64> {
    rx.validate()?;
    let gain = fspl(link)?;
    min_comm_energy_for_sensitivity(rx.sensitivity(), &gain, rx.tx_efficiency, rx.data_rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{dbm_to_watts, watts_to_dbm};

    #[test]
    fn ble_reference_loss_is_about_57_db() {
        let g = fspl(&LinkParams::ble_reference()).unwrap();
        assert!((g.loss_db - 57.0).abs() <= 1.5, "loss {}", g.loss_db);
    }

    #[test]
    fn unit_ratio_distance_has_zero_loss() {
        let f = 1e9;
        let link = LinkParams {
            carrier_frequency: f,
            distance: wavelength(f) / (4.0 * PI),
            path_loss_exponent: 2.0,
            tx_antenna_gain_db: 0.0,
            rx_antenna_gain_db: 0.0,
        };
        assert!(fspl(&link).unwrap().loss_db.abs() < 1e-9);
    }

    #[test]
    fn doubling_distance_adds_6_02_db() {
        let a = LinkParams::ble_reference();
        let b = a.with_distance(20.0);
        let diff = fspl(&b).unwrap().loss_db - fspl(&a).unwrap().loss_db;
        assert!((diff - 20.0 * 2f64.log10()).abs() < 1e-9);
        assert!((diff - 6.02).abs() < 0.01);
    }

    #[test]
    fn zero_distance_or_frequency_rejected() {
        let mut l = LinkParams::ble_reference();
        l.distance = 0.0;
        assert!(matches!(
            fspl(&l),
            Err(Error::InvalidParameter {
                name: "distance",
                ..
            })
        ));
        let mut l = LinkParams::ble_reference();
        l.carrier_frequency = 0.0;
        assert!(fspl(&l).is_err());
        let mut l = LinkParams::ble_reference();
        l.path_loss_exponent = 4.5;
        assert!(fspl(&l).is_err());
    }

    #[test]
    fn landauer_room_temperature() {
        let e = landauer_limit(298.0).unwrap();
        assert!(((e - 2.85e-21) / 2.85e-21).abs() < 0.01);
        let e2 = landauer_limit(596.0).unwrap();
        assert!((e2 / e - 2.0).abs() < 1e-12);
        assert!(landauer_limit(1e-9).unwrap() < 1e-31);
        assert!(landauer_limit(0.0).is_err());
        assert!(landauer_limit(-3.0).is_err());
    }

    #[test]
    fn ble_floor_needs_minus_43_dbm() {
        let gain = PathGain {
            linear: db_to_linear(-57.0),
            loss_db: 57.0,
        };
        let ptx = required_tx_power(dbm_to_watts(-100.0), &gain);
        assert!((watts_to_dbm(ptx) + 43.0).abs() < 1e-9);
        let e = min_comm_energy_for_sensitivity(dbm_to_watts(-100.0), &gain, 1.0, 1e6).unwrap();
        assert!((e - 50.119e-15).abs() < 0.001e-15, "{e}");
        let half = min_comm_energy_for_sensitivity(dbm_to_watts(-100.0), &gain, 0.5, 1e6).unwrap();
        assert!((half / e - 2.0).abs() < 1e-12);
    }

    #[test]
    fn thermal_receiver_energy_scales_inversely_with_efficiency() {
        let link = LinkParams::ble_reference();
        let mut rx = ReceiverParams {
            noise_figure_db: 6.0,
            required_snr_db: 8.0,
            bandwidth: 1e6,
            data_rate: 1e6,
            tx_efficiency: 1.0,
            temperature: 298.0,
        };
        let full = min_comm_energy(&link, &rx).unwrap();
        rx.tx_efficiency = 0.5;
        let half = min_comm_energy(&link, &rx).unwrap();
        assert!((half / full - 2.0).abs() < 1e-12);
        rx.data_rate = 0.0;
        assert!(min_comm_energy(&link, &rx).is_err());
    }
}
