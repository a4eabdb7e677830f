//! Per-node sample sources for the simulator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{ScenarioConfig, TraceExtend, Workload};
use crate::error::{Error, Result};
use crate::trace::{self, Channel, SensorTrace, TraceSet};

/// Random-access sample values on the simulator's 1-tick grid.
pub trait TraceSource: Send + Sync {
    /// Value of `channel` at sample index `tick` for sensing node `node`.
    fn sample(&self, node: usize, channel: Channel, tick: u64) -> Result<f64>;

    /// How many ticks after `tick` repeat the values at `tick` on every
    /// channel. Lets the simulator skip runs of identical samples.
    fn quiet_run(&self, _node: usize, _tick: u64) -> u64 {
        0
    }
}

/// Effectively unbounded quiet run.
pub const FOREVER: u64 = u64::MAX / 4;

/// Square-wave excursions on constant baselines: every `period_ticks` the
/// level toggles between the baseline and `baseline * (1 + magnitude)`.
/// Optional uniform noise is drawn per (node, channel, tick).
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSource {
    pub baselines: [f64; 3],
    pub magnitude: f64,
    pub period_ticks: u64,
    pub noise: f64,
    pub seed: u64,
}

impl SyntheticSource {
    pub fn constant(baselines: [f64; 3]) -> Self {
        Self {
            baselines,
            magnitude: 0.0,
            period_ticks: 1,
            noise: 0.0,
            seed: 0,
        }
    }

    fn level(&self, tick: u64) -> f64 {
        if self.magnitude != 0.0 && (tick / self.period_ticks) % 2 == 1 {
            1.0 + self.magnitude
        } else {
            1.0
        }
    }

    fn noise_at(&self, node: usize, channel: Channel, tick: u64) -> f64 {
        if self.noise == 0.0 {
            return 0.0;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(node as u64 * 3 + u64::from(channel.index()));
        rng.set_word_pos(u128::from(tick) * 16);
        rng.gen_range(-self.noise..=self.noise)
    }
}

impl TraceSource for SyntheticSource {
    fn sample(&self, node: usize, channel: Channel, tick: u64) -> Result<f64> {
        let base = self.baselines[usize::from(channel.index())];
        Ok(base * self.level(tick) * (1.0 + self.noise_at(node, channel, tick)))
    }

    fn quiet_run(&self, _node: usize, tick: u64) -> u64 {
        if self.noise != 0.0 {
            0
        } else if self.magnitude == 0.0 {
            FOREVER
        } else {
            self.period_ticks - 1 - tick % self.period_ticks
        }
    }
}

/// A recorded trace set replayed identically on every node. Channels the
/// set lacks hold their baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordedSource {
    columns: [Vec<f64>; 3],
    /// `runs[i]`: ticks after `i` that repeat tick `i` on all channels.
    runs: Vec<u64>,
    len: u64,
    extend: TraceExtend,
}

impl RecordedSource {
    /// Samples `set` onto the tick grid by zero-order hold.
    pub fn new(
        set: &TraceSet,
        baselines: [f64; 3],
        sample_period: f64,
        extend: TraceExtend,
    ) -> Result<Self> {
        let end = set
            .iter()
            .filter_map(|t| t.samples().last().map(|s| s.timestamp))
            .fold(None, |m: Option<f64>, t| Some(m.map_or(t, |m| m.max(t))))
            .ok_or_else(|| Error::Config("trace set is empty".into()))?;
        let start = set
            .iter()
            .filter_map(|t| t.samples().first().map(|s| s.timestamp))
            .fold(f64::INFINITY, f64::min);
        let len = ((end - start) / sample_period).floor() as u64 + 1;
        let columns = Channel::ALL.map(|ch| match set.get(ch) {
            Some(t) => resample(t, start, sample_period, len),
            None => vec![baselines[usize::from(ch.index())]; len as usize],
        });
        let mut runs = vec![0u64; len as usize];
        for i in (0..len as usize).rev().skip(1) {
            if columns.iter().all(|c| c[i] == c[i + 1]) {
                runs[i] = runs[i + 1] + 1;
            }
        }
        Ok(Self {
            columns,
            runs,
            len,
            extend,
        })
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn index(&self, node: usize, tick: u64) -> Result<usize> {
        if tick < self.len {
            return Ok(tick as usize);
        }
        match self.extend {
            TraceExtend::Fail => Err(Error::TraceUnderrun {
                node: node as u32,
                time_s: tick as f64,
            }),
            TraceExtend::Hold => Ok(self.len as usize - 1),
            TraceExtend::Repeat => Ok((tick % self.len) as usize),
        }
    }
}

fn resample(t: &SensorTrace, start: f64, period: f64, len: u64) -> Vec<f64> {
    let s = t.samples();
    (0..len)
        .map(|k| {
            let at = start + k as f64 * period;
            let i = s.partition_point(|x| x.timestamp <= at + 1e-9);
            s[i.saturating_sub(1)].value
        })
        .collect()
}

impl TraceSource for RecordedSource {
    fn sample(&self, node: usize, channel: Channel, tick: u64) -> Result<f64> {
        let i = self.index(node, tick)?;
        Ok(self.columns[usize::from(channel.index())][i])
    }

    fn quiet_run(&self, _node: usize, tick: u64) -> u64 {
        if tick >= self.len - 1 {
            return match self.extend {
                TraceExtend::Hold => FOREVER,
                _ => 0,
            };
        }
        let run = self.runs[tick as usize];
        if self.extend == TraceExtend::Hold && tick + run == self.len - 1 {
            FOREVER
        } else {
            run
        }
    }
}

/// The source described by a scenario's workload keys.
pub fn source_for(config: &ScenarioConfig) -> Result<Box<dyn TraceSource>> {
    let period_ticks = (config.anomaly_period / config.sample_period)
        .round()
        .max(1.0) as u64;
    match config.workload {
        Workload::SquareWave => Ok(Box::new(SyntheticSource {
            baselines: config.baselines,
            magnitude: config.anomaly_magnitude,
            period_ticks,
            noise: config.noise,
            seed: config.seed,
        })),
        Workload::Constant => Ok(Box::new(SyntheticSource {
            noise: config.noise,
            seed: config.seed,
            ..SyntheticSource::constant(config.baselines)
        })),
        Workload::Golden => {
            let set = TraceSet::from(trace::fixtures::golden_trace()?);
            Ok(Box::new(RecordedSource::new(
                &set,
                config.baselines,
                config.sample_period,
                config.trace_extend,
            )?))
        }
        Workload::File => {
            let path = config
                .trace_file
                .as_ref()
                .ok_or_else(|| Error::Config("workload = file needs trace_file".into()))?;
            let set = trace::parse_path(path)?;
            Ok(Box::new(RecordedSource::new(
                &set,
                config.baselines,
                config.sample_period,
                config.trace_extend,
            )?))
        }
    }
}
