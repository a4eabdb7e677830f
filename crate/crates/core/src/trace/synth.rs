use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::types::{Channel, SensorTrace};
use crate::error::{Error, Result};

/// An injected excursion: a linear ramp over `rise_s` to `magnitude`
/// (relative to baseline), a hold until `start_s + duration_s`, then
/// exponential decay with time constant `recovery_tau_s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnomalySpec {
    pub start_s: f64,
    pub duration_s: f64,
    pub rise_s: f64,
    pub magnitude: f64,
    pub recovery_tau_s: f64,
}

impl AnomalySpec {
    /// A step excursion: full magnitude from `start_s`.
    pub fn step(start_s: f64, duration_s: f64, magnitude: f64, recovery_tau_s: f64) -> Self {
        Self {
            start_s,
            duration_s,
            rise_s: 0.0,
            magnitude,
            recovery_tau_s,
        }
    }

    /// Relative offset contributed at time `t`.
    pub fn offset(&self, t: f64) -> f64 {
        let end = self.start_s + self.duration_s;
        if t < self.start_s {
            0.0
        } else if t < end {
            let since = t - self.start_s;
            if self.rise_s > 0.0 && since < self.rise_s {
                self.magnitude * since / self.rise_s
            } else {
                self.magnitude
            }
        } else if self.recovery_tau_s > 0.0 {
            self.magnitude * (-(t - end) / self.recovery_tau_s).exp()
        } else {
            0.0
        }
    }

    /// Earliest time the noiseless offset reaches `x` in magnitude.
    pub fn threshold_crossing(&self, x: f64) -> Option<f64> {
        let m = self.magnitude.abs();
        if m <= x {
            return None;
        }
        let ramp = self.rise_s.min(self.duration_s).max(0.0);
        Some(self.start_s + ramp * x / m)
    }

    fn validate(&self, duration: f64) -> Result<()> {
        if !self.magnitude.is_finite() || self.magnitude <= -1.0 {
            return Err(Error::invalid("magnitude", format!("{}", self.magnitude)));
        }
        if self.start_s < 0.0 || self.start_s > duration || self.duration_s < 0.0 {
            return Err(Error::invalid(
                "anomaly",
                format!("start {} s outside 0..{duration} s", self.start_s),
            ));
        }
        if self.rise_s < 0.0 || self.recovery_tau_s < 0.0 {
            return Err(Error::invalid("anomaly", "negative rise or recovery"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelBaseline {
    pub channel: Channel,
    pub baseline: f64,
}

/// Recipe for a deterministic synthetic trace set.
///
/// Each sample is `baseline * (1 + sum of anomaly offsets) * (1 + u)` with
/// `u` uniform in `[-noise, noise]`, drawn from a ChaCha8 stream seeded by
/// `seed`. Channels draw from the stream in channel order, sample-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub channels: Vec<ChannelBaseline>,
    pub noise: f64,
    pub anomalies: Vec<AnomalySpec>,
    pub duration_s: f64,
    pub sample_period_s: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn constant(channel: Channel, baseline: f64, samples: usize) -> Self {
        Self {
            channels: vec![ChannelBaseline { channel, baseline }],
            noise: 0.0,
            anomalies: Vec::new(),
            duration_s: samples as f64,
            sample_period_s: 1.0,
            seed: 0,
        }
    }

    /// The 100-sample temperature profile used as the compression reference:
    /// 20 degC with 0.3 % noise and a +15 % heating ramp over 24..30 s.
    pub fn golden() -> Self {
        Self {
            channels: vec![ChannelBaseline {
                channel: Channel::Temperature,
                baseline: 20.0,
            }],
            noise: 0.003,
            anomalies: vec![AnomalySpec {
                start_s: 24.0,
                duration_s: 6.0,
                rise_s: 6.0,
                magnitude: 0.15,
                recovery_tau_s: GOLDEN_RECOVERY_TAU_S,
            }],
            duration_s: 100.0,
            sample_period_s: 1.0,
            seed: GOLDEN_SEED,
        }
    }

    pub fn sample_count(&self) -> usize {
        (self.duration_s / self.sample_period_s).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_period_s > 0.0) || !(self.duration_s > 0.0) {
            return Err(Error::invalid(
                "sample_period_s",
                "period and duration must be positive",
            ));
        }
        if !(0.0..1.0).contains(&self.noise) {
            return Err(Error::invalid(
                "noise",
                format!("{} outside [0, 1)", self.noise),
            ));
        }
        for a in &self.anomalies {
            a.validate(self.duration_s)?;
        }
        Ok(())
    }

    /// Noiseless value of `baseline` at time `t`.
    pub fn shape(&self, baseline: f64, t: f64) -> f64 {
        baseline * (1.0 + self.anomalies.iter().map(|a| a.offset(t)).sum::<f64>())
    }
}

pub(crate) const GOLDEN_SEED: u64 = 7934;
pub(crate) const GOLDEN_RECOVERY_TAU_S: f64 = 20.0;

pub fn generate(spec: &SynthSpec) -> Result<Vec<SensorTrace>> {
    spec.validate()?;
    let n = spec.sample_count();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut columns: Vec<Vec<(f64, f64)>> = vec![Vec::with_capacity(n); spec.channels.len()];
    for i in 0..n {
        let t = i as f64 * spec.sample_period_s;
        for (col, ch) in columns.iter_mut().zip(&spec.channels) {
            let u = if spec.noise > 0.0 {
                rng.gen_range(-spec.noise..=spec.noise)
            } else {
                0.0
            };
            col.push((t, spec.shape(ch.baseline, t) * (1.0 + u)));
        }
    }
    spec.channels
        .iter()
        .zip(columns)
        .map(|(ch, col)| SensorTrace::from_pairs(ch.channel, col))
        .collect()
}
