use super::compress::CompressedSeries;
use crate::error::{Error, Result};
use crate::trace::{SensorSample, SensorTrace};

/// Zero-order hold: each timestamp takes the most recent kept value at or before it.
pub fn reconstruct(c: &CompressedSeries, timestamps: &[f64]) -> Result<SensorTrace> {
    let first = match c.kept.first() {
        Some(s) => s.timestamp,
        None => return Err(Error::invalid("compressed", "series has no kept samples")),
    };
    let mut out = Vec::with_capacity(timestamps.len());
    for &t in timestamps {
        let idx = c.kept.partition_point(|s| s.timestamp <= t);
        if idx == 0 {
            return Err(Error::BeforeFirstSample {
                requested: t,
                first,
            });
        }
        out.push(SensorSample::new(t, c.kept[idx - 1].value, c.channel));
    }
    SensorTrace::new(c.channel, out)
}

/// Pearson correlation outcome; a constant reference signal has none.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Correlation {
    Value(f64),
    ConstantSignal,
}

impl Correlation {
    pub fn value(self) -> Option<f64> {
        match self {
            Correlation::Value(v) => Some(v),
            Correlation::ConstantSignal => None,
        }
    }
}

impl std::fmt::Display for Correlation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Correlation::Value(v) => write!(f, "{v:.6}"),
            Correlation::ConstantSignal => f.write_str("constant-signal"),
        }
    }
}

/// Pearson correlation of `reference` against `other`.
///
/// A zero-variance `reference` yields [`Correlation::ConstantSignal`]; a
/// zero-variance `other` against a varying reference carries no linear
/// information and yields 0.
pub fn pearson(reference: &[f64], other: &[f64]) -> Result<Correlation> {
    if reference.len() != other.len() {
        return Err(Error::invalid("series", "lengths differ"));
    }
    if reference.is_empty() {
        return Err(Error::invalid("series", "empty"));
    }
    let n = reference.len() as f64;
    let ma = reference.iter().sum::<f64>() / n;
    let mb = other.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (a, b) in reference.iter().zip(other) {
        let (da, db) = (a - ma, b - mb);
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if saa == 0.0 {
        return Ok(Correlation::ConstantSignal);
    }
    if sbb == 0.0 {
        return Ok(Correlation::Value(0.0));
    }
    Ok(Correlation::Value(
        (sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityMetrics {
    pub compression_ratio: f64,
    pub correlation: Correlation,
}

/// Compression ratio and correlation of `original` with its reconstruction.
pub fn fidelity_metrics(original: &SensorTrace, c: &CompressedSeries) -> Result<FidelityMetrics> {
    if original.channel() != c.channel {
        return Err(Error::invalid(
            "channel",
            "original and compressed channels differ",
        ));
    }
    if c.kept.is_empty() {
        return Err(Error::invalid("compressed", "series has no kept samples"));
    }
    let ts: Vec<f64> = original.timestamps().collect();
    let rec = reconstruct(c, &ts)?;
    let a: Vec<f64> = original.values().collect();
    let b: Vec<f64> = rec.values().collect();
    Ok(FidelityMetrics {
        compression_ratio: c.source_count as f64 / c.kept.len() as f64,
        correlation: pearson(&a, &b)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isa::compress;
    use crate::trace::Channel;

    fn tr(values: &[f64]) -> SensorTrace {
        SensorTrace::from_values(Channel::Temperature, 0.0, 1.0, values).unwrap()
    }

    #[test]
    fn lossless_when_everything_kept() {
        let t = tr(&[1.0, 2.0, 3.0, 5.0, 8.0]);
        let c = compress(&t, 0.01).unwrap();
        let ts: Vec<f64> = t.timestamps().collect();
        assert_eq!(reconstruct(&c, &ts).unwrap(), t);
        let m = fidelity_metrics(&t, &c).unwrap();
        assert_eq!(m.compression_ratio, 1.0);
        assert_eq!(m.correlation, Correlation::Value(1.0));
    }

    #[test]
    fn single_point_holds_constant() {
        let t = tr(&[7.0, 7.01, 6.99, 7.0]);
        let c = compress(&t, 0.05).unwrap();
        let rec = reconstruct(&c, &[0.0, 0.5, 3.0, 10.0]).unwrap();
        assert!(rec.values().all(|v| v == 7.0));
    }

    #[test]
    fn before_first_kept_is_an_error() {
        let t = SensorTrace::from_values(Channel::Temperature, 5.0, 1.0, &[1.0, 2.0]).unwrap();
        let c = compress(&t, 0.01).unwrap();
        assert!(matches!(
            reconstruct(&c, &[4.0]),
            Err(Error::BeforeFirstSample { .. })
        ));
    }

    #[test]
    fn constant_original_reports_marker() {
        let t = tr(&[3.0; 10]);
        let c = compress(&t, 0.02).unwrap();
        let m = fidelity_metrics(&t, &c).unwrap();
        assert_eq!(m.compression_ratio, 10.0);
        assert_eq!(m.correlation, Correlation::ConstantSignal);
    }

    #[test]
    fn pearson_known_values() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let r = |b: &[f64]| pearson(&a, b).unwrap().value().unwrap();
        assert!((r(&[2.0, 4.0, 6.0, 8.0]) - 1.0).abs() < 1e-12);
        assert!((r(&[4.0, 3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
        assert_eq!(pearson(&a, &[1.0; 4]).unwrap(), Correlation::Value(0.0));
        assert!(pearson(&a, &[1.0]).is_err());
    }
}
