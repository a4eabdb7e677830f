//! Tabular figure emitters. Every table is plain CSV with a fixed column
//! schema per key; rows come out in a deterministic order.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::energy::{
    battery_bits, ci_savings, duty_cycle_energy, info_loss, lora_airtime,
    lora_energy_per_bit_multihop, lora_packet_bytes, lora_range, network_lifetime_ci,
    network_lifetime_ci_cas, network_lifetime_no_ci, CiEnergyParams, DutyCycleParams, LinkParams,
    LoRaParams, ReceiverParams,
};
use crate::error::{Error, Result};
use crate::isa::{compress, fidelity_metrics};
use crate::sim::{ladder_configs, run_ladder};
use crate::trace::SensorTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FigureKey {
    DutyCycle,
    CiSavings,
    LifetimeVsN,
    SfRangeBits,
    CompressionTradeoff,
    LifetimeLadder,
}

impl FigureKey {
    pub const ALL: [FigureKey; 6] = [
        FigureKey::DutyCycle,
        FigureKey::CiSavings,
        FigureKey::LifetimeVsN,
        FigureKey::SfRangeBits,
        FigureKey::CompressionTradeoff,
        FigureKey::LifetimeLadder,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureKey::DutyCycle => "duty_cycle",
            FigureKey::CiSavings => "ci_savings",
            FigureKey::LifetimeVsN => "lifetime_vs_n",
            FigureKey::SfRangeBits => "sf_range_bits",
            FigureKey::CompressionTradeoff => "compression_tradeoff",
            FigureKey::LifetimeLadder => "lifetime_ladder",
        }
    }

    /// Column schema of the key's table.
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            FigureKey::DutyCycle => &["period_s", "energy_j", "info_loss", "energy_ratio"],
            FigureKey::CiSavings => &["n", "savings_j", "savings_per_node_j"],
            FigureKey::LifetimeVsN => &[
                "n",
                "no_ci_s",
                "ci_s",
                "ci_cas_s",
                "ci_ratio",
                "ci_cas_ratio",
            ],
            FigureKey::SfRangeBits => &[
                "sf",
                "hops",
                "hop_range_m",
                "reach_m",
                "packet_bytes",
                "airtime_s",
                "energy_per_bit_j",
                "battery_bits",
            ],
            FigureKey::CompressionTradeoff => &["y", "kept", "compression_ratio", "correlation"],
            FigureKey::LifetimeLadder => &[
                "rung",
                "nodes",
                "first_death_s",
                "last_death_s",
                "lifetime_h",
                "lifetime_d",
                "leakage_bound_d",
                "bound_fraction",
            ],
        }
    }
}

impl fmt::Display for FigureKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureKey::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let valid: Vec<_> = FigureKey::ALL.iter().map(|k| k.name()).collect();
                Error::Config(format!(
                    "unknown figure `{s}`; valid keys: {}",
                    valid.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    pub fn num(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Text(_) => None,
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Num(v) => write!(f, "{v}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureTable {
    pub key: FigureKey,
    pub rows: Vec<Vec<Cell>>,
}

impl FigureTable {
    fn new(key: FigureKey) -> Self {
        Self {
            key,
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.key.columns().len());
        self.rows.push(row);
    }

    pub fn columns(&self) -> &'static [&'static str] {
        self.key.columns()
    }

    /// Numeric column by name; text cells are skipped.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns().iter().position(|c| *c == name)?;
        Some(self.rows.iter().filter_map(|r| r[i].num()).collect())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let io = |e: csv::Error| Error::Io(e.to_string());
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.columns()).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_string))
                .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

/// Parameters shared by the sweeps. `n_range` is the cluster-size sweep for
/// the CI figures and the period sweep (in sample periods) for the
/// duty-cycle figure.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub n_range: Option<(u32, u32)>,
    pub sample_period: f64,
    pub ci_cycle: f64,
    pub lora: LoRaParams,
    pub link: LinkParams,
    pub receiver: ReceiverParams,
    pub max_hops: u32,
    pub battery_mah: f64,
    pub supply_voltage: f64,
    /// `(start, stop, step)` of the compression sweep.
    pub y_sweep: (f64, f64, f64),
    pub trace: Option<SensorTrace>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            n_range: None,
            sample_period: 1.0,
            ci_cycle: 1800.0,
            lora: LoRaParams::default(),
            link: LinkParams::lora_reference(),
            receiver: ReceiverParams::lora_reference(),
            max_hops: 3,
            battery_mah: 230.0,
            supply_voltage: 3.7,
            y_sweep: (0.005, 0.05, 0.005),
            trace: None,
        }
    }
}

pub fn duty_cycle(
    periods: impl IntoIterator<Item = u32>,
    sample_period: f64,
) -> Result<FigureTable> {
    let mut t = FigureTable::new(FigureKey::DutyCycle);
    let base = duty_cycle_energy(&DutyCycleParams::lora_reference(sample_period))?;
    for n in periods {
        let period = f64::from(n) * sample_period;
        let e = duty_cycle_energy(&DutyCycleParams::lora_reference(period))?;
        t.push(vec![
            period.into(),
            e.into(),
            info_loss(period, sample_period)?.into(),
            (base / e).into(),
        ]);
    }
    Ok(t)
}

pub fn ci_savings_table(sizes: impl IntoIterator<Item = u32>) -> Result<FigureTable> {
    let mut t = FigureTable::new(FigureKey::CiSavings);
    for n in sizes {
        let s = ci_savings(&CiEnergyParams::reference(n))?;
        t.push(vec![
            f64::from(n).into(),
            s.into(),
            (s / f64::from(n)).into(),
        ]);
    }
    Ok(t)
}

pub fn lifetime_vs_n(sizes: impl IntoIterator<Item = u32>, cycle: f64) -> Result<FigureTable> {
    let mut t = FigureTable::new(FigureKey::LifetimeVsN);
    for n in sizes {
        let p = CiEnergyParams::reference(n);
        let base = network_lifetime_no_ci(&p, cycle)?;
        let ci = network_lifetime_ci(&p, cycle)?;
        let cas = network_lifetime_ci_cas(&p, cycle)?;
        t.push(vec![
            f64::from(n).into(),
            base.into(),
            ci.into(),
            cas.into(),
            (ci / base).into(),
            (cas / base).into(),
        ]);
    }
    Ok(t)
}

pub fn sf_range_bits(opts: &SweepOptions) -> Result<FigureTable> {
    let mut t = FigureTable::new(FigureKey::SfRangeBits);
    for sf in 7..=12u8 {
        let p = opts.lora.with_sf(sf);
        let range = lora_range(&p, &opts.link, &opts.receiver)?;
        for hops in 1..=opts.max_hops {
            let epb = lora_energy_per_bit_multihop(&p, hops)?;
            t.push(vec![
                f64::from(sf).into(),
                f64::from(hops).into(),
                range.into(),
                (range * f64::from(hops)).into(),
                lora_packet_bytes(&p)?.into(),
                lora_airtime(&p)?.into(),
                epb.into(),
                battery_bits(opts.battery_mah, opts.supply_voltage, epb).into(),
            ]);
        }
    }
    Ok(t)
}

/// Inclusive `start:stop:step` grid, robust to rounding of the step.
pub fn grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::invalid("sweep", "needs start <= stop and step > 0"));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + step * i as f64).collect())
}

pub fn compression_tradeoff(trace: &SensorTrace, ys: &[f64]) -> Result<FigureTable> {
    let mut t = FigureTable::new(FigureKey::CompressionTradeoff);
    for &y in ys {
        let c = compress(trace, y)?;
        let m = fidelity_metrics(trace, &c)?;
        let corr = match m.correlation.value() {
            Some(r) => Cell::Num(r),
            None => Cell::Text("constant".into()),
        };
        t.push(vec![
            y.into(),
            (c.kept.len() as f64).into(),
            m.compression_ratio.into(),
            corr,
        ]);
    }
    Ok(t)
}

pub fn lifetime_ladder() -> Result<FigureTable> {
    let rungs = ladder_configs();
    let results = run_ladder(&rungs)?;
    let mut t = FigureTable::new(FigureKey::LifetimeLadder);
    for (r, (_, cfg)) in results.iter().zip(&rungs) {
        let life = r.lifetime_s(cfg.duration);
        let opt = |v: Option<f64>| v.map_or(Cell::Text(String::new()), Cell::Num);
        t.push(vec![
            Cell::Text(r.name.clone()),
            (r.nodes as f64).into(),
            opt(r.first_death_s),
            opt(r.last_death_s),
            (life / 3600.0).into(),
            (life / 86_400.0).into(),
            (r.leakage_bound_s / 86_400.0).into(),
            (life / r.leakage_bound_s).into(),
        ]);
    }
    Ok(t)
}

/// Builds the table for `key`.
pub fn figure(key: FigureKey, opts: &SweepOptions) -> Result<FigureTable> {
    let range = |default: (u32, u32)| {
        let (a, b) = opts.n_range.unwrap_or(default);
        a..=b
    };
    match key {
        FigureKey::DutyCycle => duty_cycle(range((1, 100)), opts.sample_period),
        FigureKey::CiSavings => ci_savings_table(range((1, 20))),
        FigureKey::LifetimeVsN => lifetime_vs_n(range((1, 20)), opts.ci_cycle),
        FigureKey::SfRangeBits => sf_range_bits(opts),
        FigureKey::CompressionTradeoff => {
            let trace = match &opts.trace {
                Some(t) => t.clone(),
                None => crate::trace::fixtures::golden_trace()?,
            };
            let (a, b, s) = opts.y_sweep;
            compression_tradeoff(&trace, &grid(a, b, s)?)
        }
        FigureKey::LifetimeLadder => lifetime_ladder(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_round_trip_and_unknown_lists_valid() {
        for k in FigureKey::ALL {
            assert_eq!(k.name().parse::<FigureKey>().unwrap(), k);
        }
        let e = "fig99".parse::<FigureKey>().unwrap_err().to_string();
        assert!(e.contains("duty_cycle") && e.contains("lifetime_ladder"));
    }

    #[test]
    fn grid_is_inclusive() {
        let g = grid(0.005, 0.05, 0.005).unwrap();
        assert_eq!(g.len(), 10);
        assert!((g[9] - 0.05).abs() < 1e-12);
        assert!(grid(1.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn ci_savings_is_affine() {
        let t = ci_savings_table(1..=20).unwrap();
        let s = t.column("savings_j").unwrap();
        let d: Vec<f64> = s.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(d.iter().all(|x| (x - d[0]).abs() < 1e-12));
    }

    #[test]
    fn csv_header_matches_schema() {
        let t = lifetime_vs_n(1..=3, 1800.0).unwrap();
        let csv = t.to_csv_string().unwrap();
        assert_eq!(
            csv.lines().next().unwrap(),
            FigureKey::LifetimeVsN.columns().join(",")
        );
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn constant_trace_marks_correlation() {
        let tr =
            SensorTrace::from_values(crate::Channel::Temperature, 0.0, 1.0, &[5.0; 10]).unwrap();
        let t = compression_tradeoff(&tr, &[0.02]).unwrap();
        assert_eq!(t.rows[0][3], Cell::Text("constant".into()));
        assert_eq!(t.rows[0][2], Cell::Num(10.0));
    }
}
