use crate::error::{Error, Result};

/// Fixed per-device broadcast offsets after an anomaly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotSchedule {
    /// Slot width in seconds: one BLE event plus a guard gap.
    pub slot: f64,
    /// Length of one BLE broadcast event in seconds.
    pub event_len: f64,
    pub max_nodes: u32,
}

impl Default for SlotSchedule {
    fn default() -> Self {
        Self {
            slot: 0.020,
            event_len: 0.012,
            max_nodes: 256,
        }
    }
}

impl SlotSchedule {
    pub fn delay(&self, device_id: u32) -> Result<f64> {
        if device_id >= self.max_nodes {
            return Err(Error::invalid(
                "device_id",
                format!("{device_id} exceeds {} configured nodes", self.max_nodes),
            ));
        }
        Ok(f64::from(device_id) * self.slot)
    }

    /// Slot start in integer microseconds.
    pub fn delay_us(&self, device_id: u32) -> Result<u64> {
        self.delay(device_id).map(|d| (d * 1e6).round() as u64)
    }
}

/// Offset of `device_id`'s broadcast with the default 20 ms slot.
pub fn broadcast_slot_delay(device_id: u32) -> Result<f64> {
    SlotSchedule::default().delay(device_id)
}
