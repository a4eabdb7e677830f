//! Command-line front end. [`run`] takes the arguments and output streams
//! so it can be driven from tests; the binary is a thin wrapper.
//!
//! Exit codes: 0 on success, 1 for command-line usage errors, 2 for
//! anything that fails while running.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::energy::{
    battery_bits, lora_airtime, lora_energy_per_bit, lora_energy_per_bit_multihop,
    lora_packet_bytes, lora_range, multihop_benefit, CodeRate, LinkParams, LoRaParams,
    ReceiverParams,
};
use crate::error::{Error, Result};
use crate::figures::{compression_tradeoff, figure, grid, FigureKey, SweepOptions};
use crate::isa::{compress, detect_anomaly, fidelity_metrics};
use crate::sim::{info_retention, ladder_configs, run, source_for, Mode, ScenarioConfig};
use crate::trace::{self, format_significant, SensorTrace, TraceSet};
use crate::Channel;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "isa-mesh",
    version,
    about = "Sensor-mesh energy models, ISA codec and network simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// LoRa link budget: range, packet size, airtime, energy per bit.
    Budget(BudgetArgs),
    /// Anomaly detection and temporal compression of a trace file.
    Compress(CompressArgs),
    /// Run a scenario, or the five-rung lifetime ladder.
    Simulate(SimulateArgs),
    /// Emit a figure table as CSV.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct BudgetArgs {
    #[arg(long, default_value_t = 7, value_parser = clap::value_parser!(u8).range(7..=12))]
    sf: u8,
    /// Bandwidth in Hz.
    #[arg(long, default_value_t = 125e3)]
    bw: f64,
    #[arg(long, default_value = "4/5", value_parser = parse_code_rate)]
    cr: CodeRate,
    /// Payload bytes.
    #[arg(long, default_value_t = 240)]
    payload: u32,
    /// Transmit power, dBm.
    #[arg(long, default_value_t = 7.0)]
    ptx: f64,
    /// Consumed power while transmitting, W.
    #[arg(long = "pcons-tx", default_value_t = 95.4e-3)]
    pcons_tx: f64,
    /// Consumed power while receiving, W.
    #[arg(long = "pcons-rx", default_value_t = 15.2e-3)]
    pcons_rx: f64,
    #[arg(long = "n-hops", default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    n_hops: u32,
    /// Single-hop spreading factor to compare the multi-hop chain against.
    #[arg(long = "compare-sf", value_parser = clap::value_parser!(u8).range(7..=12))]
    compare_sf: Option<u8>,
    /// Path-loss exponent.
    #[arg(long, default_value_t = 2.83)]
    exponent: f64,
    /// Carrier frequency, Hz.
    #[arg(long, default_value_t = 915e6)]
    frequency: f64,
    /// Battery capacity for the bit budget, mAh.
    #[arg(long = "battery-mah", default_value_t = 230.0)]
    battery_mah: f64,
    #[arg(long, default_value_t = 3.7)]
    voltage: f64,
    /// Count the preamble in the packet size.
    #[arg(long)]
    preamble: bool,
    /// Machine-readable `quantity,value,unit` rows.
    #[arg(long)]
    csv: bool,
}

#[derive(Debug, Args)]
struct CompressArgs {
    /// Trace CSV (`timestamp_s,channel,value`).
    trace: PathBuf,
    /// Compression threshold.
    #[arg(long, default_value_t = 0.02)]
    y: f64,
    /// Anomaly threshold; detected events are reported on stderr.
    #[arg(long)]
    x: Option<f64>,
    /// Print compression ratio and correlation per channel on stderr.
    #[arg(long)]
    metrics: bool,
    /// `start:stop:step` sweep of y; prints a compression_tradeoff table.
    #[arg(long = "y-sweep")]
    y_sweep: Option<String>,
    /// Write kept points here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Scenario file (`key = value` lines); built-in defaults when omitted.
    config: Option<PathBuf>,
    /// Run the five built-in ladder rungs.
    #[arg(long, conflicts_with = "config")]
    ladder: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for events.csv and summary.csv (ladder.csv with --ladder).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    nodes: Option<usize>,
    /// Extra `key=value` overrides, applied in order.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Figure key.
    key: String,
    /// `a:b` sweep of the cluster size (duty_cycle: of the period in samples).
    #[arg(long)]
    n: Option<String>,
    /// Trace for compression_tradeoff; the golden trace when omitted.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// `start:stop:step` for compression_tradeoff.
    #[arg(long = "y-sweep")]
    y_sweep: Option<String>,
    /// Anomaly cycle of the CI lifetime models, seconds.
    #[arg(long, default_value_t = 1800.0)]
    cycle: f64,
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_code_rate(s: &str) -> std::result::Result<CodeRate, String> {
    CodeRate::parse(s).map_err(|e| e.to_string())
}

fn parse_range(flag: &str, s: &str) -> Result<(u32, u32)> {
    let bad = || {
        Error::Config(format!(
            "--{flag}: expected `a:b` with 1 <= a <= b, got `{s}`"
        ))
    };
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let a: u32 = a.trim().parse().map_err(|_| bad())?;
    let b: u32 = b.trim().parse().map_err(|_| bad())?;
    if a == 0 || a > b {
        return Err(bad());
    }
    Ok((a, b))
}

fn parse_sweep(flag: &str, s: &str) -> Result<(f64, f64, f64)> {
    let bad = || Error::Config(format!("--{flag}: expected `start:stop:step`, got `{s}`"));
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    match parts[..] {
        [a, b, c] if c > 0.0 && b >= a => Ok((a, b, c)),
        _ => Err(bad()),
    }
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let to_out = !e.use_stderr();
            let text = e.render().to_string();
            let _ = if to_out {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return if to_out { EXIT_OK } else { EXIT_USAGE };
        }
    };
    let result = match cli.command {
        Command::Budget(a) => budget(&a, out),
        Command::Compress(a) => compress_cmd(&a, out, err),
        Command::Simulate(a) => simulate(&a, out),
        Command::Sweep(a) => sweep(&a, out),
    };
    match result.and_then(|()| out.flush().map_err(Error::from)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_RUNTIME
        }
    }
}

fn budget(a: &BudgetArgs, out: &mut dyn Write) -> Result<()> {
    let lora = LoRaParams {
        spreading_factor: a.sf,
        bandwidth: a.bw,
        code_rate: a.cr,
        payload_bytes: a.payload,
        tx_power_dbm: a.ptx,
        tx_power_consumption: a.pcons_tx,
        rx_power_consumption: a.pcons_rx,
        include_preamble_in_packet: a.preamble,
        ..LoRaParams::default()
    };
    let link = LinkParams {
        carrier_frequency: a.frequency,
        path_loss_exponent: a.exponent,
        ..LinkParams::lora_reference()
    };
    let rx = ReceiverParams::lora_reference();
    let range = lora_range(&lora, &link, &rx)?;
    let epb = lora_energy_per_bit(&lora)?;
    let epb_chain = lora_energy_per_bit_multihop(&lora, a.n_hops)?;
    let mut rows: Vec<(&str, f64, &str)> = vec![
        ("spreading_factor", f64::from(a.sf), ""),
        ("range", range, "m"),
        ("reach", range * f64::from(a.n_hops), "m"),
        ("packet_bytes", lora_packet_bytes(&lora)?, "B"),
        ("airtime", lora_airtime(&lora)?, "s"),
        ("energy_per_bit", epb, "J/bit"),
        ("n_hops", f64::from(a.n_hops), ""),
        ("chain_energy_per_bit", epb_chain, "J/bit"),
        (
            "battery_bits",
            battery_bits(a.battery_mah, a.voltage, epb_chain),
            "bit",
        ),
    ];
    if let Some(sf) = a.compare_sf {
        let single = lora.with_sf(sf);
        rows.push(("compare_sf", f64::from(sf), ""));
        rows.push(("compare_range", lora_range(&single, &link, &rx)?, "m"));
        rows.push((
            "compare_energy_per_bit",
            lora_energy_per_bit(&single)?,
            "J/bit",
        ));
        rows.push((
            "multihop_benefit",
            multihop_benefit(sf, a.sf, a.n_hops, &lora)?,
            "x",
        ));
    }
    if a.csv {
        writeln!(out, "quantity,value,unit")?;
        for (q, v, u) in rows {
            writeln!(out, "{q},{v},{u}")?;
        }
    } else {
        for (q, v, u) in rows {
            writeln!(out, "{q:<24} {:>14} {u}", format_significant(v, 6))?;
        }
    }
    Ok(())
}

fn open_out(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| {
        Error::Io(format!("{}: {e}", path.display()))
    })?))
}

fn compress_cmd(a: &CompressArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let set = trace::parse_path(&a.trace)?;
    if let Some(spec) = &a.y_sweep {
        let (s, e, st) = parse_sweep("y-sweep", spec)?;
        let first = set
            .iter()
            .next()
            .ok_or_else(|| Error::Config("trace file has no samples".into()))?;
        let table = compression_tradeoff(first, &grid(s, e, st)?)?;
        return match &a.out {
            Some(p) => table.write_csv(open_out(p)?),
            None => table.write_csv(out),
        };
    }
    let mut kept = TraceSet::new();
    for t in set.iter() {
        let ch = t.channel();
        let c = compress(t, a.y)?;
        if a.metrics {
            let m = fidelity_metrics(t, &c)?;
            let corr = m
                .correlation
                .value()
                .map_or_else(|| "constant".to_string(), |r| format!("{r:.6}"));
            writeln!(
                err,
                "{}: samples={} kept={} compression_ratio={:.4} correlation={corr}",
                ch.name(),
                t.len(),
                c.kept.len(),
                m.compression_ratio
            )?;
        }
        if let Some(x) = a.x {
            for e in detect_anomaly(0, t, x)? {
                writeln!(
                    err,
                    "{}: anomaly at t={} before={} after={}",
                    ch.name(),
                    e.anomaly_time,
                    format_significant(e.value_before, 6),
                    format_significant(e.value_after, 6)
                )?;
            }
        }
        kept.insert(SensorTrace::new(ch, c.kept)?);
    }
    match &a.out {
        Some(p) => trace::serialize(open_out(p)?, kept.iter()),
        None => trace::serialize(out, kept.iter()),
    }
}

fn scenario(a: &SimulateArgs) -> Result<ScenarioConfig> {
    let mut c = match &a.config {
        Some(p) => ScenarioConfig::from_path(p)?,
        None => ScenarioConfig::default(),
    };
    if let Some(m) = &a.mode {
        c.set("mode", m)?;
    }
    if let Some(n) = a.nodes {
        c.set("nodes", &n.to_string())?;
    }
    if let Some(s) = a.seed {
        c.seed = s;
    }
    for kv in &a.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        c.set(k.trim(), v.trim())?;
    }
    c.validate()?;
    Ok(c)
}

fn simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<()> {
    if a.ladder {
        if a.mode.is_some() || a.nodes.is_some() || !a.set.is_empty() {
            return Err(Error::Config(
                "--ladder runs fixed presets; drop --mode, --nodes and --set".into(),
            ));
        }
        let table = figure(FigureKey::LifetimeLadder, &SweepOptions::default())?;
        if let Some(dir) = &a.out {
            table.write_csv(open_out(&dir.join("ladder.csv"))?)?;
        }
        return table.write_csv(out);
    }
    let c = scenario(a)?;
    let source = source_for(&c)?;
    let r = run(&c, source.as_ref())?;
    if let Some(dir) = &a.out {
        r.write_dir(dir)?;
    }
    let days =
        |s: Option<f64>| s.map_or_else(|| "alive".into(), |s| format!("{:.4} d", s / 86_400.0));
    writeln!(out, "mode              {}", c.mode)?;
    writeln!(out, "nodes             {}", c.node_count())?;
    writeln!(out, "seed              {}", c.seed)?;
    writeln!(out, "simulated         {:.4} d", r.end_s() / 86_400.0)?;
    writeln!(out, "first_death       {}", days(r.first_death_s()))?;
    writeln!(out, "last_death        {}", days(r.last_death_s()))?;
    writeln!(out, "frames_delivered  {}", r.frames_delivered)?;
    writeln!(out, "delivery_failures {}", r.delivery_failures)?;
    writeln!(out, "handovers         {}", r.handovers.len())?;
    writeln!(
        out,
        "info_retention    {:.6}",
        info_retention(&r, source.as_ref(), &c)?
    )?;
    if c.mode.uses_ci() && c.node_count() == 1 {
        writeln!(out, "cluster           singleton")?;
    }
    Ok(())
}

fn sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<()> {
    let key: FigureKey = a.key.parse()?;
    let mut opts = SweepOptions {
        ci_cycle: a.cycle,
        ..SweepOptions::default()
    };
    if let Some(n) = &a.n {
        opts.n_range = Some(parse_range("n", n)?);
    }
    if let Some(s) = &a.y_sweep {
        opts.y_sweep = parse_sweep("y-sweep", s)?;
    }
    if let Some(p) = &a.trace {
        let set = trace::parse_path(p)?;
        let t = set
            .get(Channel::Temperature)
            .or_else(|| set.iter().next())
            .ok_or_else(|| Error::Config("trace file has no samples".into()))?;
        opts.trace = Some(t.clone());
    }
    let table = figure(key, &opts)?;
    match &a.out {
        Some(p) => table.write_csv(open_out(p)?),
        None => table.write_csv(out),
    }
}

/// Presets shipped for the ladder rungs, by file stem.
pub fn ladder_presets() -> Vec<(&'static str, String)> {
    ladder_configs()
        .into_iter()
        .map(|(n, c)| (n, c.to_text()))
        .collect()
}

/// Modes accepted by `simulate --mode`.
pub fn mode_names() -> Vec<&'static str> {
    Mode::ALL.iter().map(|m| m.name()).collect()
}
