//! Acceptance criteria 1 to 10. Prints one PASS/FAIL line per criterion
//! and exits nonzero if any fails.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use isa_mesh::cli::run_cli;
use isa_mesh::energy::{
    duty_cycle_energy, info_loss, lora_energy_per_bit, lora_packet_bytes, lora_range,
    DutyCycleParams, LinkParams, LoRaParams, ReceiverParams,
};
use isa_mesh::figures::lifetime_vs_n;
use isa_mesh::isa::{compress, fidelity_metrics};
use isa_mesh::protocol::{elect_head, BatteryReport, BlePacket, ClusterState, PacketEvent};
use isa_mesh::sim::{
    ladder_configs, leakage_bound_s, lifetime_crosscheck, run_scenario, rung_config, Mode,
};
use isa_mesh::trace::fixtures;
use isa_mesh::{Channel, SensorTrace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = (bool, String);

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn c1_multihop_benefit() -> Outcome {
    let ((code, out), dt) = timed(|| {
        let mut out = Vec::new();
        let code = run_cli(
            [
                "isa-mesh",
                "budget",
                "--sf",
                "7",
                "--n-hops",
                "2",
                "--compare-sf",
                "10",
                "--csv",
            ],
            &mut out,
            &mut std::io::sink(),
        );
        (code, String::from_utf8(out).unwrap())
    });
    let benefit: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("multihop_benefit,"))
        .and_then(|r| r.split(',').next())
        .and_then(|v| v.parse().ok())
        .unwrap_or(f64::NAN);
    let ok = code == 0 && (benefit - 2.6).abs() <= 0.05 && dt < Duration::from_secs(1);
    (ok, format!("benefit {benefit:.4} in {dt:.2?}"))
}

fn c2_packet_bytes() -> Outcome {
    let p = LoRaParams::default();
    let b10 = lora_packet_bytes(&p.with_sf(10)).unwrap();
    let b7 = lora_packet_bytes(&p.with_sf(7)).unwrap();
    (
        b10 == 249.25 && b7 == 354.25,
        format!("SF10 {b10}, SF7 {b7}"),
    )
}

fn c3_range() -> Outcome {
    let (link, rx) = (
        LinkParams::lora_reference(),
        ReceiverParams::lora_reference(),
    );
    let r7 = lora_range(&LoRaParams::default().with_sf(7), &link, &rx).unwrap();
    let r12 = lora_range(&LoRaParams::default().with_sf(12), &link, &rx).unwrap();
    let ok = (r7 - 1250.0).abs() <= 125.0
        && (r12 - 4000.0).abs() <= 400.0
        && link.path_loss_exponent == 2.83;
    (ok, format!("SF7 {r7:.1} m, SF12 {r12:.1} m"))
}

fn c4_energy_per_bit() -> Outcome {
    let p = LoRaParams::default().with_sf(7);
    let e = lora_energy_per_bit(&p).unwrap() * 1e6;
    (
        p.payload_bytes == 240 && (18.0..=22.0).contains(&e),
        format!("{e:.3} uJ/bit"),
    )
}

fn c5_compression() -> Outcome {
    let (res, dt) = timed(|| {
        let t = fixtures::golden_trace().unwrap();
        let at = |y: f64| {
            let c = compress(&t, y).unwrap();
            let m = fidelity_metrics(&t, &c).unwrap();
            (
                m.compression_ratio,
                m.correlation.value().unwrap_or(f64::NAN),
            )
        };
        let base = at(0.02);
        let worst_high = (0..5)
            .map(|i| at(0.03 + 0.005 * f64::from(i)))
            .fold((f64::INFINITY, f64::INFINITY), |a, b| {
                (a.0.min(b.0), a.1.min(b.1))
            });
        (base, worst_high)
    });
    let ((ratio, corr), (min_ratio, min_corr)) = res;
    let ok = (ratio - 8.33).abs() <= 0.01
        && corr > 0.98
        && min_ratio > 12.0
        && min_corr > 0.9
        && dt < Duration::from_secs(1);
    (
        ok,
        format!("y=2%: ratio {ratio:.3}, r {corr:.4}; y in 3..5%: min ratio {min_ratio:.2}, min r {min_corr:.4}; {dt:.2?}"),
    )
}

fn c6_duty_cycle() -> Outcome {
    let loss = info_loss(100.0, 1.0).unwrap();
    let e1 = duty_cycle_energy(&DutyCycleParams::lora_reference(1.0)).unwrap();
    let e100 = duty_cycle_energy(&DutyCycleParams::lora_reference(100.0)).unwrap();
    let ratio = e1 / e100;
    (
        loss == 0.99 && (40.0..=100.0).contains(&ratio),
        format!("loss {loss}, energy ratio {ratio:.2}"),
    )
}

fn c7_ladder() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, cfg) in ladder_configs() {
        let (r, dt) = timed(|| run_scenario(&cfg).unwrap());
        let life = r.first_death_s().unwrap_or(cfg.duration);
        ok &= dt < Duration::from_secs(60);
        match cfg.mode {
            Mode::LoraEverySecond => {
                let h = life / 3600.0;
                ok &= (h - 4.3).abs() / 4.3 <= 0.10;
                detail.push(format!("{name} {h:.2} h ({dt:.1?})"));
            }
            Mode::IsaCiCas => {
                let d = life / 86_400.0;
                let bound = leakage_bound_s(&cfg);
                ok &= (d - 104.0).abs() / 104.0 <= 0.10 && life >= 0.9 * bound;
                detail.push(format!(
                    "{name} {d:.2} d = {:.1}% of bound ({dt:.1?})",
                    100.0 * life / bound
                ));
            }
            _ => detail.push(format!("{name} {:.2} d ({dt:.1?})", life / 86_400.0)),
        }
    }
    (ok, detail.join("; "))
}

fn c8_crosscheck() -> Outcome {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for mode in [Mode::IsaCi, Mode::IsaCiCas] {
        for n in [2, 4, 8] {
            let x = lifetime_crosscheck(&rung_config(mode).with_line(n, 1.0)).unwrap();
            ok &= x.relative_error <= 0.05;
            worst = worst.max(x.relative_error);
        }
    }
    (ok, format!("worst relative error {:.4}%", worst * 100.0))
}

fn random_packet(rng: &mut ChaCha8Rng) -> BlePacket {
    let finite = |rng: &mut ChaCha8Rng| loop {
        let v = f64::from_bits(rng.gen());
        if v.is_finite() {
            return v;
        }
    };
    BlePacket {
        channel: Channel::ALL[rng.gen_range(0..3)],
        seq: rng.gen(),
        device_id: rng.gen(),
        event: rng.gen_bool(0.7).then(|| PacketEvent {
            value_before: finite(rng),
            anomaly_time: rng.gen_range(0..u64::MAX),
            value_after: finite(rng),
        }),
        battery_uah: rng.gen_range(0..1u64 << 48),
        battery_saturated: rng.gen(),
    }
}

fn compression_triple_holds(values: &[f64], y: f64) -> bool {
    let t = SensorTrace::from_values(Channel::Humidity, 0.0, 1.0, values).unwrap();
    let c = compress(&t, y).unwrap();
    if c.kept.first().map(|s| s.value) != Some(values[0]) {
        return false;
    }
    let mut next = 1;
    let mut last = values[0];
    for (i, &v) in values.iter().enumerate().skip(1) {
        let rel = (v - last).abs() / last.abs();
        let kept = next < c.kept.len() && c.kept[next].timestamp == i as f64;
        if kept != (rel > y) {
            return false;
        }
        if kept {
            next += 1;
            last = v;
        }
    }
    next == c.kept.len()
}

fn scan_election(members: &[u32], reports: &[BatteryReport]) -> Option<u32> {
    let mut newest: BTreeMap<u32, (f64, f64)> = BTreeMap::new();
    for r in reports.iter().filter(|r| members.contains(&r.node_id)) {
        let e = newest
            .entry(r.node_id)
            .or_insert((r.reported_at, r.charge_remaining));
        if (r.reported_at, r.charge_remaining) > *e {
            *e = (r.reported_at, r.charge_remaining);
        }
    }
    let mut best: Option<(u32, f64)> = None;
    for (&id, &(_, q)) in &newest {
        if best.is_none_or(|(_, bq)| q > bq) {
            best = Some((id, q));
        }
    }
    best.map(|b| b.0)
}

fn c9_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE);
    let mut codec_fail = 0;
    for _ in 0..10_000 {
        let p = random_packet(&mut rng);
        if BlePacket::from_bytes(&p.to_bytes()).ok() != Some(p) {
            codec_fail += 1;
        }
    }
    let mut triple_fail = 0;
    for _ in 0..10_000 {
        let n = rng.gen_range(1..120);
        let values: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..500.0)).collect();
        if !compression_triple_holds(&values, rng.gen_range(0.001..0.2)) {
            triple_fail += 1;
        }
    }
    let mut elect_fail = 0;
    for _ in 0..10_000 {
        let mut members: Vec<u32> = (0..rng.gen_range(1..9))
            .map(|_| rng.gen_range(0..30))
            .collect();
        members.sort_unstable();
        members.dedup();
        let reports: Vec<BatteryReport> = (0..rng.gen_range(0..20))
            .map(|_| BatteryReport {
                node_id: rng.gen_range(0..30),
                charge_remaining: f64::from(rng.gen_range(0..50u32)) * 10.0,
                reported_at: f64::from(rng.gen_range(0..5u32)),
            })
            .collect();
        let cluster = ClusterState::new(members.clone(), 0.0, 900.0).unwrap();
        if elect_head(&cluster, &reports) != scan_election(&members, &reports) {
            elect_fail += 1;
        }
    }
    let mut ledger_worst: i128 = 0;
    let mut runs = 0;
    for mode in Mode::ALL {
        for nodes in [1, 3, 6] {
            let mut c = rung_config(*mode).with_line(nodes, 1.5);
            c.duration = 5.0 * 86_400.0;
            c.noise = 0.002;
            c.battery_mah = 2.0;
            let r = run_scenario(&c).unwrap();
            runs += 1;
            for n in &r.nodes {
                ledger_worst = ledger_worst.max(n.conservation_error_ac().abs());
            }
        }
    }
    let ledger_c = ledger_worst as f64 * 1e-18;
    let ok = codec_fail == 0 && triple_fail == 0 && elect_fail == 0 && ledger_c <= 1e-9;
    (
        ok,
        format!(
            "codec {codec_fail}/10000, triple {triple_fail}/10000, election {elect_fail}/10000 failures; \
             worst ledger gap {ledger_c:e} C over {runs} runs"
        ),
    )
}

fn c10_lifetime_ordering() -> Outcome {
    let t = lifetime_vs_n(1..=20, 1800.0).unwrap();
    let ci = t.column("ci_ratio").unwrap();
    let cas = t.column("ci_cas_ratio").unwrap();
    let ci_ok = ci.iter().all(|r| (r - 0.96).abs() <= 0.01);
    let cas_ok = cas.windows(2).all(|w| w[1] > w[0]) && cas[1..].iter().all(|&r| r > 1.0);
    (
        ci_ok && cas_ok,
        format!(
            "CI ratio {:.4}..{:.4}; CI+CAS {:.3} (n=2) to {:.3} (n=20)",
            ci.iter().cloned().fold(f64::INFINITY, f64::min),
            ci.iter().cloned().fold(0.0, f64::max),
            cas[1],
            cas[19]
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("multi-hop benefit", c1_multihop_benefit),
        ("packet bytes", c2_packet_bytes),
        ("LoRa range", c3_range),
        ("energy per bit", c4_energy_per_bit),
        ("compression", c5_compression),
        ("duty-cycle trade-off", c6_duty_cycle),
        ("lifetime ladder", c7_ladder),
        ("closed-form cross-check", c8_crosscheck),
        ("property suites", c9_properties),
        ("lifetime ordering vs cluster size", c10_lifetime_ordering),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (ok, detail) = check();
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {name}: {detail}",
            i + 1,
            if ok { "PASS" } else { "FAIL" }
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
