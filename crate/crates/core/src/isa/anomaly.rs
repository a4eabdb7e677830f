use super::threshold::exceeds_relative;
use crate::error::{Error, Result};
use crate::trace::{Channel, SensorSample, SensorTrace};

/// A detected jump of more than `x` away from the previous anomaly reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnomalyEvent {
    pub node_id: u32,
    pub channel: Channel,
    pub value_before: f64,
    pub anomaly_time: f64,
    pub value_after: f64,
}

/// Streaming anomaly detector for one channel of one node.
///
/// The first sample only initialises the reference. Afterwards an event fires
/// whenever a sample leaves the reference by more than `x`, and the
/// reference moves to that sample.
#[derive(Debug, Clone, PartialEq)]
pub struct AnomalyDetector {
    node_id: u32,
    channel: Channel,
    threshold: f64,
    full_scale: f64,
    reference: Option<f64>,
}

impl AnomalyDetector {
    pub fn new(node_id: u32, channel: Channel, threshold: f64) -> Result<Self> {
        Self::with_full_scale(node_id, channel, threshold, channel.full_scale())
    }

    pub fn with_full_scale(
        node_id: u32,
        channel: Channel,
        threshold: f64,
        full_scale: f64,
    ) -> Result<Self> {
        if !(threshold > 0.0) {
            return Err(Error::invalid("anomaly_x", "must be > 0"));
        }
        Ok(Self {
            node_id,
            channel,
            threshold,
            full_scale,
            reference: None,
        })
    }

    pub fn reference(&self) -> Option<f64> {
        self.reference
    }

    pub fn push(&mut self, sample: &SensorSample) -> Option<AnomalyEvent> {
        let reference = match self.reference {
            None => {
                self.reference = Some(sample.value);
                return None;
            }
            Some(r) => r,
        };
        if exceeds_relative(sample.value, reference, self.threshold, self.full_scale) {
            self.reference = Some(sample.value);
            Some(AnomalyEvent {
                node_id: self.node_id,
                channel: self.channel,
                value_before: reference,
                anomaly_time: sample.timestamp,
                value_after: sample.value,
            })
        } else {
            None
        }
    }
}

/// Runs the detector over a whole trace.
pub fn detect_anomaly(node_id: u32, trace: &SensorTrace, x: f64) -> Result<Vec<AnomalyEvent>> {
    if trace.is_empty() {
        return Err(Error::invalid("trace", "must not be empty"));
    }
    let mut det = AnomalyDetector::new(node_id, trace.channel(), x)?;
    Ok(trace.samples().iter().filter_map(|s| det.push(s)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tr(values: &[f64]) -> SensorTrace {
        SensorTrace::from_values(Channel::Temperature, 0.0, 1.0, values).unwrap()
    }

    #[test]
    fn constant_trace_has_no_events() {
        assert!(detect_anomaly(0, &tr(&[20.0; 50]), 0.1).unwrap().is_empty());
    }

    #[test]
    fn single_jump() {
        let ev = detect_anomaly(4, &tr(&[20.0, 20.1, 22.5]), 0.10).unwrap();
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].anomaly_time, 2.0);
        assert_eq!(ev[0].value_before, 20.0);
        assert_eq!(ev[0].value_after, 22.5);
        assert_eq!(ev[0].node_id, 4);
    }

    #[test]
    fn reference_moves_to_event_value() {
        // 25 (+25%) fires, 26 is +4% of 25 and does not, 20 is -20% and fires
        let ev = detect_anomaly(0, &tr(&[20.0, 25.0, 26.0, 20.0]), 0.10).unwrap();
        assert_eq!(ev.len(), 2);
        assert_eq!(ev[1].value_before, 25.0);
        assert_eq!(ev[1].anomaly_time, 3.0);
    }

    #[test]
    fn zero_reference_uses_full_scale() {
        let t = SensorTrace::from_values(Channel::Nitrate, 0.0, 1.0, &[0.0, 50.0, 120.0]).unwrap();
        // 10% of 1000 mV = 100 mV
        let ev = detect_anomaly(0, &t, 0.10).unwrap();
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].value_after, 120.0);
    }

    #[test]
    fn empty_trace_and_bad_threshold_rejected() {
        let empty = SensorTrace::new(Channel::Temperature, vec![]).unwrap();
        assert!(detect_anomaly(0, &empty, 0.1).is_err());
        assert!(detect_anomaly(0, &tr(&[1.0]), 0.0).is_err());
    }
}
