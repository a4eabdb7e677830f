//! How much of the sensed signal survives to the hub.

use super::config::ScenarioConfig;
use super::result::SimResult;
use super::source::TraceSource;
use crate::error::Result;
use crate::trace::Channel;

/// Weighted streaming Pearson correlation (West's update).
#[derive(Debug, Default, Clone, Copy)]
struct Pearson {
    w: f64,
    mean_x: f64,
    mean_y: f64,
    sxx: f64,
    syy: f64,
    sxy: f64,
}

impl Pearson {
    fn add(&mut self, x: f64, y: f64, weight: f64) {
        self.w += weight;
        let dx = x - self.mean_x;
        let dy = y - self.mean_y;
        self.mean_x += dx * weight / self.w;
        self.mean_y += dy * weight / self.w;
        self.sxx += weight * dx * (x - self.mean_x);
        self.syy += weight * dy * (y - self.mean_y);
        self.sxy += weight * dx * (y - self.mean_y);
    }

    /// None when the original is constant.
    fn value(&self) -> Option<f64> {
        let scale = self.mean_x.abs().max(1.0);
        if self.sxx <= 1e-24 * scale * scale * self.w {
            return None;
        }
        if self.syy <= 0.0 {
            return Some(0.0);
        }
        Some((self.sxy / (self.sxx * self.syy).sqrt()).clamp(-1.0, 1.0))
    }
}

/// Retention of one sensing node, or None if none of its data reached the
/// hub.
///
/// Raw-radio modes score the fraction of sensed samples that were
/// delivered. ISA modes score the lowest per-channel Pearson correlation
/// between the original samples and a zero-order-hold reconstruction of
/// what the hub received, over the span the hub covers. Channels whose
/// original is constant are skipped; a node with no varying channel
/// scores 1.
pub fn node_retention(
    result: &SimResult,
    source: &dyn TraceSource,
    node: usize,
) -> Result<Option<f64>> {
    let outcome = &result.nodes[node];
    if !result.mode.uses_isa() {
        if outcome.sensed_ticks == 0 || outcome.delivered_samples == 0 {
            return Ok(None);
        }
        return Ok(Some(
            outcome.delivered_samples as f64 / outcome.sensed_ticks as f64,
        ));
    }
    let Some(until) = result.hub.covered_until[node] else {
        return Ok(None);
    };
    let mut worst: Option<f64> = None;
    for ch in Channel::ALL {
        let hub = &result.hub.samples[node][usize::from(ch.index())];
        let Some(&(start, _)) = hub.first() else {
            continue;
        };
        let mut acc = Pearson::default();
        let mut next = 0;
        let mut held = hub[0].1;
        let mut tick = start;
        while tick <= until {
            while next < hub.len() && hub[next].0 <= tick {
                held = hub[next].1;
                next += 1;
            }
            let original = source.sample(node, ch, tick)?;
            let mut span = source.quiet_run(node, tick).min(until - tick);
            if let Some(&(t, _)) = hub.get(next) {
                span = span.min(t - tick - 1);
            }
            acc.add(original, held, (span + 1) as f64);
            tick += span + 1;
        }
        if let Some(r) = acc.value() {
            worst = Some(worst.map_or(r, |w: f64| w.min(r)));
        }
    }
    Ok(Some(worst.unwrap_or(1.0)))
}

/// Network retention: the minimum over nodes whose data reached the hub,
/// directly or through a cluster head. Zero if nothing arrived.
pub fn info_retention(
    result: &SimResult,
    source: &dyn TraceSource,
    config: &ScenarioConfig,
) -> Result<f64> {
    let mut worst: Option<f64> = None;
    for node in 0..config.node_count() {
        if let Some(r) = node_retention(result, source, node)? {
            worst = Some(worst.map_or(r, |w: f64| w.min(r)));
        }
    }
    Ok(worst.unwrap_or(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weighted_matches_repeated() {
        let mut a = Pearson::default();
        let mut b = Pearson::default();
        let pts = [(1.0, 2.0, 3), (4.0, 3.0, 1), (2.0, 2.5, 2)];
        for &(x, y, w) in &pts {
            a.add(x, y, w as f64);
            for _ in 0..w {
                b.add(x, y, 1.0);
            }
        }
        assert!((a.value().unwrap() - b.value().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn constant_original_is_skipped() {
        let mut a = Pearson::default();
        a.add(5.0, 1.0, 10.0);
        a.add(5.0, 2.0, 10.0);
        assert_eq!(a.value(), None);
    }
}
