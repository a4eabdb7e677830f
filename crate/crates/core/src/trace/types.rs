use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Physical quantity measured by one sensor front-end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    Temperature,
    Humidity,
    Nitrate,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::Temperature, Channel::Humidity, Channel::Nitrate];

    pub fn index(self) -> u8 {
        match self {
            Channel::Temperature => 0,
            Channel::Humidity => 1,
            Channel::Nitrate => 2,
        }
    }

    pub fn from_index(i: u8) -> Option<Self> {
        Self::ALL.get(usize::from(i)).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Channel::Temperature => "temperature",
            Channel::Humidity => "humidity",
            Channel::Nitrate => "nitrate",
        }
    }

    /// Full-scale value used when a relative change has a zero reference:
    /// 100 degC, 100 %RH, 1000 mV.
    pub fn full_scale(self) -> f64 {
        match self {
            Channel::Temperature => 100.0,
            Channel::Humidity => 100.0,
            Channel::Nitrate => 1000.0,
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "temperature" => Ok(Channel::Temperature),
            "humidity" => Ok(Channel::Humidity),
            "nitrate" => Ok(Channel::Nitrate),
            other => Err(Error::UnknownChannel(other.to_string())),
        }
    }
}

/// A timestamped reading, in seconds and channel units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorSample {
    pub timestamp: f64,
    pub value: f64,
    pub channel: Channel,
}

impl SensorSample {
    pub fn new(timestamp: f64, value: f64, channel: Channel) -> Self {
        Self {
            timestamp,
            value,
            channel,
        }
    }
}

/// Single-channel series with strictly increasing timestamps and finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorTrace {
    channel: Channel,
    samples: Vec<SensorSample>,
}

impl SensorTrace {
    pub fn new(channel: Channel, samples: Vec<SensorSample>) -> Result<Self> {
        for (i, s) in samples.iter().enumerate() {
            if s.channel != channel {
                return Err(Error::invalid(
                    "channel",
                    format!("sample {i} is {} in a {channel} trace", s.channel),
                ));
            }
            if !s.value.is_finite() || !s.timestamp.is_finite() {
                return Err(Error::invalid("value", format!("sample {i} is not finite")));
            }
            if i > 0 && s.timestamp <= samples[i - 1].timestamp {
                return Err(Error::invalid(
                    "timestamp",
                    format!("sample {i} does not increase ({} s)", s.timestamp),
                ));
            }
        }
        Ok(Self { channel, samples })
    }

    /// Builds a trace from `(timestamp, value)` pairs.
    pub fn from_pairs(
        channel: Channel,
        pairs: impl IntoIterator<Item = (f64, f64)>,
    ) -> Result<Self> {
        let samples = pairs
            .into_iter()
            .map(|(t, v)| SensorSample::new(t, v, channel))
            .collect();
        Self::new(channel, samples)
    }

    /// Samples at `t0, t0 + dt, ...`.
    pub fn from_values(channel: Channel, t0: f64, dt: f64, values: &[f64]) -> Result<Self> {
        Self::from_pairs(
            channel,
            values
                .iter()
                .enumerate()
                .map(|(i, &v)| (t0 + dt * i as f64, v)),
        )
    }

    pub fn channel(&self) -> Channel {
        self.channel
    }

    pub fn samples(&self) -> &[SensorSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.value)
    }

    pub fn timestamps(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.timestamp)
    }

    pub fn into_samples(self) -> Vec<SensorSample> {
        self.samples
    }
}
