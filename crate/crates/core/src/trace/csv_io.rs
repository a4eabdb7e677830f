use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use super::types::{Channel, SensorSample, SensorTrace};
use crate::error::{Error, Result};

const HEADER: [&str; 3] = ["timestamp_s", "channel", "value"];

/// Traces keyed by channel, in channel order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TraceSet {
    traces: BTreeMap<Channel, SensorTrace>,
}

impl TraceSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, trace: SensorTrace) {
        self.traces.insert(trace.channel(), trace);
    }

    pub fn get(&self, channel: Channel) -> Option<&SensorTrace> {
        self.traces.get(&channel)
    }

    pub fn channels(&self) -> impl Iterator<Item = Channel> + '_ {
        self.traces.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = &SensorTrace> {
        self.traces.values()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }
}

impl From<SensorTrace> for TraceSet {
    fn from(t: SensorTrace) -> Self {
        let mut s = TraceSet::new();
        s.insert(t);
        s
    }
}

/// Formats `v` with `digits` significant digits, dropping trailing zeros.
pub fn format_significant(v: f64, digits: i32) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 { "0".into() } else { v.to_string() };
    }
    let exp = v.abs().log10().floor() as i32;
    let decimals = digits - 1 - exp;
    if decimals <= 0 {
        let unit = 10f64.powi(-decimals);
        return format!("{:.0}", (v / unit).round() * unit);
    }
    let s = format!("{:.*}", decimals as usize, v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

pub fn parse<R: Read>(reader: R) -> Result<TraceSet> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers().map_err(|e| Error::Parse {
        line: 1,
        reason: e.to_string(),
    })?;
    if header.iter().collect::<Vec<_>>() != HEADER {
        return Err(Error::Parse {
            line: 1,
            reason: format!("expected header `{}`", HEADER.join(",")),
        });
    }
    let mut per_channel: BTreeMap<Channel, Vec<SensorSample>> = BTreeMap::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |reason: String| Error::Parse { line, reason };
        if record.len() != 3 {
            return Err(bad(format!("expected 3 fields, found {}", record.len())));
        }
        let timestamp: f64 = record[0]
            .parse()
            .map_err(|_| bad(format!("bad timestamp `{}`", &record[0])))?;
        let channel: Channel = record[1]
            .parse()
            .map_err(|_| bad(format!("unknown channel `{}`", &record[1])))?;
        let value: f64 = record[2]
            .parse()
            .map_err(|_| bad(format!("bad value `{}`", &record[2])))?;
        if !timestamp.is_finite() || !value.is_finite() {
            return Err(bad("non-finite field".into()));
        }
        let samples = per_channel.entry(channel).or_default();
        if let Some(prev) = samples.last() {
            if timestamp <= prev.timestamp {
                return Err(bad(format!(
                    "timestamp {timestamp} does not increase for {channel}"
                )));
            }
        }
        samples.push(SensorSample::new(timestamp, value, channel));
    }
    let mut set = TraceSet::new();
    for (channel, samples) in per_channel {
        set.insert(SensorTrace::new(channel, samples)?);
    }
    Ok(set)
}

pub fn parse_path(path: impl AsRef<Path>) -> Result<TraceSet> {
    let path = path.as_ref();
    let file =
        std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse(std::io::BufReader::new(file))
}

/// Writes all traces, channel by channel.
pub fn serialize<'a, W: Write>(
    out: W,
    traces: impl IntoIterator<Item = &'a SensorTrace>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(HEADER).map_err(io)?;
    for trace in traces {
        for s in trace.samples() {
            w.write_record([
                s.timestamp.to_string(),
                s.channel.name().to_string(),
                format_significant(s.value, 6),
            ])
            .map_err(io)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_path<'a>(
    path: impl AsRef<Path>,
    traces: impl IntoIterator<Item = &'a SensorTrace>,
) -> Result<()> {
    let file = std::fs::File::create(path.as_ref())?;
    serialize(std::io::BufWriter::new(file), traces)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_significant(20.031_234_5, 6), "20.0312");
        assert_eq!(format_significant(20.0, 6), "20");
        assert_eq!(format_significant(-0.000_123_456_78, 6), "-0.000123457");
        assert_eq!(format_significant(1_234_567.0, 6), "1234570");
        assert_eq!(format_significant(9.999_999_9, 6), "10");
        assert_eq!(format_significant(0.0, 6), "0");
    }

    #[test]
    fn header_only_is_empty_set() {
        let set = parse("timestamp_s,channel,value\n".as_bytes()).unwrap();
        assert!(set.is_empty());
    }

    #[test]
    fn duplicated_timestamp_names_line() {
        let csv =
            "timestamp_s,channel,value\n0,temperature,20\n1,temperature,21\n1,temperature,22\n";
        match parse(csv.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_channel_and_bad_header() {
        let csv = "timestamp_s,channel,value\n0,pressure,1\n";
        match parse(csv.as_bytes()) {
            Err(Error::Parse { line, reason }) => {
                assert_eq!(line, 2);
                assert!(reason.contains("pressure"));
            }
            other => panic!("{other:?}"),
        }
        assert!(parse("t,c,v\n0,temperature,1\n".as_bytes()).is_err());
        assert!(parse("".as_bytes()).is_err());
    }

    #[test]
    fn channels_interleave() {
        let csv = "timestamp_s,channel,value\n0,temperature,20\n0,humidity,40\n1,temperature,21\n1,humidity,41\n";
        let set = parse(csv.as_bytes()).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.get(Channel::Humidity).unwrap().len(), 2);
        let mut out = Vec::new();
        serialize(&mut out, set.iter()).unwrap();
        assert_eq!(parse(out.as_slice()).unwrap(), set);
    }
}
