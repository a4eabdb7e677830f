use super::threshold::exceeds_relative;
use crate::error::{Error, Result};
use crate::trace::{Channel, SensorSample, SensorTrace};

/// Samples kept by the temporal compressor.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressedSeries {
    pub channel: Channel,
    pub kept: Vec<SensorSample>,
    pub source_count: usize,
    pub threshold_y: f64,
}

impl CompressedSeries {
    pub fn compression_ratio(&self) -> f64 {
        if self.kept.is_empty() {
            return 1.0;
        }
        self.source_count as f64 / self.kept.len() as f64
    }
}

/// Streaming compressor: keeps a sample when it differs from the last kept
/// sample by more than `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Compressor {
    channel: Channel,
    threshold: f64,
    full_scale: f64,
    last_kept: Option<f64>,
    kept: Vec<SensorSample>,
    seen: usize,
}

impl Compressor {
    pub fn new(channel: Channel, threshold: f64) -> Result<Self> {
        Self::with_full_scale(channel, threshold, channel.full_scale())
    }

    pub fn with_full_scale(channel: Channel, threshold: f64, full_scale: f64) -> Result<Self> {
        if !(threshold > 0.0) {
            return Err(Error::invalid("compress_y", "must be > 0"));
        }
        Ok(Self {
            channel,
            threshold,
            full_scale,
            last_kept: None,
            kept: Vec::new(),
            seen: 0,
        })
    }

    /// Feeds one sample; returns true when it was kept.
    pub fn push(&mut self, sample: &SensorSample) -> bool {
        self.seen += 1;
        let keep = match self.last_kept {
            None => true,
            Some(last) => exceeds_relative(sample.value, last, self.threshold, self.full_scale),
        };
        if keep {
            self.last_kept = Some(sample.value);
            self.kept.push(*sample);
        }
        keep
    }

    /// Counts `n` samples known to repeat the previous value without storing them.
    pub fn skip_repeats(&mut self, n: usize) {
        self.seen += n;
    }

    pub fn last_kept(&self) -> Option<f64> {
        self.last_kept
    }

    pub fn pending(&self) -> &[SensorSample] {
        &self.kept
    }

    /// Drains the kept samples accumulated since the previous drain. The
    /// reference value is preserved so compression continues seamlessly.
    pub fn drain(&mut self) -> CompressedSeries {
        let series = CompressedSeries {
            channel: self.channel,
            kept: std::mem::take(&mut self.kept),
            source_count: self.seen,
            threshold_y: self.threshold,
        };
        self.seen = 0;
        series
    }

    pub fn finish(self) -> CompressedSeries {
        CompressedSeries {
            channel: self.channel,
            kept: self.kept,
            source_count: self.seen,
            threshold_y: self.threshold,
        }
    }
}

pub fn compress(trace: &SensorTrace, y: f64) -> Result<CompressedSeries> {
    if trace.is_empty() {
        return Err(Error::invalid("trace", "must not be empty"));
    }
    let mut c = Compressor::new(trace.channel(), y)?;
    for s in trace.samples() {
        c.push(s);
    }
    Ok(c.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tr(values: &[f64]) -> SensorTrace {
        SensorTrace::from_values(Channel::Temperature, 0.0, 1.0, values).unwrap()
    }

    #[test]
    fn constant_trace_keeps_first_only() {
        let c = compress(&tr(&[21.0; 37]), 0.02).unwrap();
        assert_eq!(c.kept.len(), 1);
        assert_eq!(c.compression_ratio(), 37.0);
    }

    #[test]
    fn tiny_threshold_keeps_everything() {
        let values: Vec<f64> = (0..20).map(|i| 20.0 + 0.5 * i as f64).collect();
        let c = compress(&tr(&values), 0.001).unwrap();
        assert_eq!(c.kept.len(), 20);
        assert_eq!(c.compression_ratio(), 1.0);
    }

    #[test]
    fn relative_to_last_kept_not_previous_sample() {
        // small steps accumulate until they cross 2% from the last kept value
        let values = [100.0, 101.0, 102.0, 102.5, 103.0, 104.5, 104.6];
        let c = compress(&tr(&values), 0.02).unwrap();
        let kept: Vec<f64> = c.kept.iter().map(|s| s.value).collect();
        assert_eq!(kept, vec![100.0, 102.5, 104.6]);
    }

    #[test]
    fn drain_preserves_reference() {
        let mut c = Compressor::new(Channel::Humidity, 0.05).unwrap();
        for (i, v) in [50.0, 60.0, 61.0].iter().enumerate() {
            c.push(&SensorSample::new(i as f64, *v, Channel::Humidity));
        }
        let first = c.drain();
        assert_eq!(first.kept.len(), 2);
        assert_eq!(first.source_count, 3);
        assert!(!c.push(&SensorSample::new(3.0, 62.0, Channel::Humidity)));
        c.skip_repeats(5);
        let second = c.drain();
        assert!(second.kept.is_empty());
        assert_eq!(second.source_count, 6);
    }
}
