use crate::error::{Error, Result};

/// Anomaly threshold `x` and compression threshold `y`, as fractions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub anomaly_x: f64,
    pub compress_y: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            anomaly_x: 0.10,
            compress_y: 0.02,
        }
    }
}

impl Thresholds {
    pub fn new(anomaly_x: f64, compress_y: f64) -> Result<Self> {
        let t = Self {
            anomaly_x,
            compress_y,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.anomaly_x > 0.0 && self.anomaly_x < 1.0) {
            return Err(Error::invalid("anomaly_x", "must lie in (0, 1)"));
        }
        if !(self.compress_y > 0.0 && self.compress_y < 1.0) {
            return Err(Error::invalid("compress_y", "must lie in (0, 1)"));
        }
        if self.compress_y > self.anomaly_x {
            log::warn!(
                "compression threshold {} exceeds anomaly threshold {}",
                self.compress_y,
                self.anomaly_x
            );
        }
        Ok(())
    }
}

/// True when `value` moved away from `reference` by more than `threshold`
/// (relative); a zero reference falls back to an absolute comparison
/// against `threshold * full_scale`.
#[inline]
pub fn exceeds_relative(value: f64, reference: f64, threshold: f64, full_scale: f64) -> bool {
    let delta = (value - reference).abs();
    if reference == 0.0 {
        delta > threshold * full_scale
    } else {
        delta / reference.abs() > threshold
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_and_zero_fallback() {
        assert!(exceeds_relative(22.5, 20.0, 0.10, 100.0));
        assert!(!exceeds_relative(21.9, 20.0, 0.10, 100.0));
        assert!(!exceeds_relative(22.0, 20.0, 0.10, 100.0));
        assert!(exceeds_relative(-22.5, -20.0, 0.10, 100.0));
        assert!(!exceeds_relative(5.0, 0.0, 0.10, 100.0));
        assert!(exceeds_relative(10.5, 0.0, 0.10, 100.0));
    }

    #[test]
    fn validation() {
        assert!(Thresholds::new(0.1, 0.02).is_ok());
        assert!(Thresholds::new(0.02, 0.1).is_ok());
        assert!(Thresholds::new(0.0, 0.02).is_err());
        assert!(Thresholds::new(0.1, 1.5).is_err());
    }
}
