use crate::error::{Error, Result};

/// Per-cycle energies of a cluster of nodes sharing one long-range uplink.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CiEnergyParams {
    /// One long-range (LoRa) uplink, joules.
    pub e_long_range: f64,
    /// One short-range (BLE) broadcast, joules.
    pub e_short_range: f64,
    /// Clustering computation per communication cycle, joules.
    pub e_compute_ci: f64,
    /// Clustering plus head-switching computation per cycle, joules.
    pub e_compute_ci_cas: f64,
    pub battery_energy: f64,
    pub cluster_size: u32,
}

impl CiEnergyParams {
    /// Measured nRF52 constants for a 30-minute cycle with 1 s compute ticks:
    /// 50 mJ LoRa, 359 uJ BLE, 1.4 mJ (804 nJ x 1800) clustering and
    /// 1.65 mJ (916 nJ x 1800) clustering with switching; 230 mAh at 3.7 V.
    pub fn reference(cluster_size: u32) -> Self {
        Self {
            e_long_range: 50e-3,
            e_short_range: 359e-6,
            e_compute_ci: 1.4e-3,
            e_compute_ci_cas: 1.65e-3,
            battery_energy: 230e-3 * 3600.0 * 3.7,
            cluster_size,
        }
    }

    pub fn with_cluster_size(mut self, n: u32) -> Self {
        self.cluster_size = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.e_long_range,
            self.e_short_range,
            self.e_compute_ci,
            self.e_compute_ci_cas,
            self.battery_energy,
        ];
        if all.iter().any(|e| !(*e >= 0.0) || !e.is_finite()) {
            return Err(Error::invalid(
                "energy",
                "all energies must be finite and >= 0",
            ));
        }
        if self.cluster_size == 0 {
            return Err(Error::invalid("cluster_size", "must be >= 1"));
        }
        Ok(())
    }
}

/// Energy saved per cycle by `n` nodes sharing one uplink; negative for `n = 1`.
pub fn ci_savings(p: &CiEnergyParams) -> Result<f64> {
    p.validate()?;
    let n = f64::from(p.cluster_size);
    Ok((n - 1.0) * p.e_long_range - n * (p.e_short_range + p.e_compute_ci))
}

/// Lifetime of a node that uplinks every cycle on its own.
pub fn network_lifetime_no_ci(p: &CiEnergyParams, cycle_period: f64) -> Result<f64> {
    p.validate()?;
    if !(p.e_long_range > 0.0) {
        return Err(Error::invalid("e_long_range", "zero denominator"));
    }
    Ok(cycle_period * p.battery_energy / p.e_long_range)
}

/// Lifetime with a fixed cluster head; the head is the bottleneck, so the
/// result does not depend on the cluster size.
pub fn network_lifetime_ci(p: &CiEnergyParams, cycle_period: f64) -> Result<f64> {
    p.validate()?;
    let denom = p.e_short_range + p.e_compute_ci + p.e_long_range;
    if !(denom > 0.0) {
        return Err(Error::invalid("energy", "zero denominator"));
    }
    Ok(cycle_period * p.battery_energy / denom)
}

/// Lifetime when the head role rotates so the uplink cost is shared by all members.
pub fn network_lifetime_ci_cas(p: &CiEnergyParams, cycle_period: f64) -> Result<f64> {
    p.validate()?;
    let n = f64::from(p.cluster_size);
    let denom = n * (p.e_short_range + p.e_compute_ci_cas) + p.e_long_range;
    if !(denom > 0.0) {
        return Err(Error::invalid("energy", "zero denominator"));
    }
    Ok(cycle_period * n * p.battery_energy / denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CYCLE: f64 = 1800.0;

    #[test]
    fn two_node_savings() {
        let s = ci_savings(&CiEnergyParams::reference(2)).unwrap();
        // (2-1)*50 mJ - 2*(0.359 + 1.4) mJ
        assert!((s - 46.482e-3).abs() < 1e-12);
    }

    #[test]
    fn singleton_cluster_is_pure_overhead() {
        let p = CiEnergyParams::reference(1);
        let s = ci_savings(&p).unwrap();
        assert!(s < 0.0);
        assert!((s + p.e_short_range + p.e_compute_ci).abs() < 1e-15);
    }

    #[test]
    fn per_node_savings_converge_to_reduction_factor() {
        let p = CiEnergyParams::reference(1_000_000);
        let per_node = ci_savings(&p).unwrap() / f64::from(p.cluster_size);
        let limit = p.e_long_range - p.e_short_range - p.e_compute_ci;
        assert!((per_node - limit).abs() / limit < 1e-4);
    }

    #[test]
    fn fixed_head_loses_about_four_percent() {
        let p = CiEnergyParams::reference(4);
        let ratio =
            network_lifetime_ci(&p, CYCLE).unwrap() / network_lifetime_no_ci(&p, CYCLE).unwrap();
        let expected = p.e_long_range / (p.e_long_range + p.e_short_range + p.e_compute_ci);
        assert!((ratio - expected).abs() < 1e-12);
        assert!((ratio - 0.96).abs() < 0.01);
    }

    #[test]
    fn free_clustering_matches_baseline() {
        let mut p = CiEnergyParams::reference(3);
        p.e_short_range = 0.0;
        p.e_compute_ci = 0.0;
        assert_eq!(
            network_lifetime_ci(&p, CYCLE).unwrap(),
            network_lifetime_no_ci(&p, CYCLE).unwrap()
        );
    }

    #[test]
    fn lifetime_is_linear_in_battery() {
        let p = CiEnergyParams::reference(5);
        let mut q = p;
        q.battery_energy *= 2.0;
        let a = network_lifetime_ci(&p, CYCLE).unwrap();
        let b = network_lifetime_ci(&q, CYCLE).unwrap();
        assert!((b / a - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cas_two_nodes() {
        let p = CiEnergyParams::reference(2);
        let ratio = network_lifetime_ci_cas(&p, CYCLE).unwrap()
            / network_lifetime_no_ci(&p, CYCLE).unwrap();
        let by_hand = 2.0 * 50.0 / (2.0 * (0.359 + 1.65) + 50.0);
        assert!((ratio - by_hand).abs() < 1e-12);
        assert!((ratio - 1.85).abs() < 0.01);
    }

    #[test]
    fn cas_singleton_equals_fixed_head_with_cas_compute() {
        let mut p = CiEnergyParams::reference(1);
        let cas = network_lifetime_ci_cas(&p, CYCLE).unwrap();
        p.e_compute_ci = p.e_compute_ci_cas;
        assert!((cas - network_lifetime_ci(&p, CYCLE).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn cas_large_cluster_improvement_factor() {
        let p = CiEnergyParams::reference(1_000_000);
        let ratio = network_lifetime_ci_cas(&p, CYCLE).unwrap()
            / network_lifetime_no_ci(&p, CYCLE).unwrap();
        let limit = p.e_long_range / (p.e_short_range + p.e_compute_ci_cas);
        assert!((ratio - limit).abs() / limit < 1e-3);
    }

    #[test]
    fn rejects_empty_cluster_and_zero_cost() {
        assert!(ci_savings(&CiEnergyParams::reference(0)).is_err());
        let mut p = CiEnergyParams::reference(2);
        p.e_long_range = 0.0;
        p.e_short_range = 0.0;
        p.e_compute_ci = 0.0;
        p.e_compute_ci_cas = 0.0;
        assert!(network_lifetime_ci(&p, CYCLE).is_err());
        assert!(network_lifetime_ci_cas(&p, CYCLE).is_err());
        assert!(network_lifetime_no_ci(&p, CYCLE).is_err());
    }
}
