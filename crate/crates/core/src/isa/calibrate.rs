use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::threshold::Thresholds;
use crate::error::{Error, Result};
use crate::trace::SensorTrace;

const MAX_ITERATIONS: usize = 100;

/// Result of a one-dimensional Lloyd k-means run. Clusters are sorted by centroid.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeans1d {
    pub centroids: Vec<f64>,
    /// Population standard deviation of each cluster.
    pub std_devs: Vec<f64>,
    pub counts: Vec<usize>,
    /// Cluster index (into the sorted clusters) of every input point.
    pub assignment: Vec<usize>,
    pub iterations: usize,
}

fn nearest(centroids: &[f64], x: f64) -> usize {
    let mut best = 0;
    for (i, c) in centroids.iter().enumerate().skip(1) {
        if (x - c).abs() < (x - centroids[best]).abs() {
            best = i;
        }
    }
    best
}

fn initial_centroids(data: &[f64], k: usize, seed: u64) -> Vec<f64> {
    let min = data.iter().copied().fold(f64::INFINITY, f64::min);
    let max = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if k == 1 {
        return vec![data.iter().sum::<f64>() / data.len() as f64];
    }
    if k == 2 {
        return vec![min, max];
    }
    // k-means++ seeding
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = vec![data[rng.gen_range(0..data.len())]];
    while centroids.len() < k {
        let weights: Vec<f64> = data
            .iter()
            .map(|&x| {
                let c = centroids[nearest(&centroids, x)];
                (x - c) * (x - c)
            })
            .collect();
        let total: f64 = weights.iter().sum();
        if total == 0.0 {
            centroids.push(max);
            continue;
        }
        let mut pick = rng.gen::<f64>() * total;
        let mut chosen = data.len() - 1;
        for (i, w) in weights.iter().enumerate() {
            if pick < *w {
                chosen = i;
                break;
            }
            pick -= w;
        }
        centroids.push(data[chosen]);
    }
    centroids
}

/// Lloyd's algorithm on scalars: min/max seeding for `k = 2`, seeded
/// k-means++ otherwise, at most 100 iterations.
pub fn kmeans_1d(data: &[f64], k: usize, seed: u64) -> Result<KMeans1d> {
    if k == 0 {
        return Err(Error::invalid("k", "must be >= 1"));
    }
    if data.len() < k {
        return Err(Error::invalid("data", format!("need at least {k} points")));
    }
    let mut centroids = initial_centroids(data, k, seed);
    let mut assignment: Vec<usize> = data.iter().map(|&x| nearest(&centroids, x)).collect();
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for (&x, &a) in data.iter().zip(&assignment) {
            sums[a] += x;
            counts[a] += 1;
        }
        for i in 0..k {
            if counts[i] > 0 {
                centroids[i] = sums[i] / counts[i] as f64;
            }
        }
        let next: Vec<usize> = data.iter().map(|&x| nearest(&centroids, x)).collect();
        if next == assignment {
            break;
        }
        assignment = next;
    }

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| centroids[a].total_cmp(&centroids[b]));
    let mut rank = vec![0; k];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    let assignment: Vec<usize> = assignment.iter().map(|&a| rank[a]).collect();
    let centroids: Vec<f64> = order.iter().map(|&i| centroids[i]).collect();
    let mut counts = vec![0usize; k];
    let mut sq = vec![0.0; k];
    for (&x, &a) in data.iter().zip(&assignment) {
        counts[a] += 1;
        sq[a] += (x - centroids[a]).powi(2);
    }
    let std_devs = sq
        .iter()
        .zip(&counts)
        .map(|(s, &c)| if c > 0 { (s / c as f64).sqrt() } else { 0.0 })
        .collect();
    Ok(KMeans1d {
        centroids,
        std_devs,
        counts,
        assignment,
        iterations,
    })
}

/// Thresholds from a set of absolute relative changes: `x` halfway between the
/// two lowest centroids, `y` one standard deviation above the low-change centroid.
pub fn thresholds_from_changes(changes: &[f64], k: usize, seed: u64) -> Result<Thresholds> {
    if k < 2 {
        return Err(Error::invalid("k", "need at least two clusters"));
    }
    let min = changes.iter().copied().fold(f64::INFINITY, f64::min);
    let max = changes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if changes.is_empty() || max - min <= f64::EPSILON * max.abs().max(1.0) {
        log::warn!("degenerate calibration history; falling back to default thresholds");
        return Ok(Thresholds::default());
    }
    let km = kmeans_1d(changes, k, seed)?;
    let anomaly_x = 0.5 * (km.centroids[0] + km.centroids[1]);
    let compress_y = km.centroids[0] + km.std_devs[0];
    Ok(Thresholds {
        anomaly_x,
        compress_y,
    })
}

/// Calibrates both thresholds from a history of readings.
pub fn calibrate_thresholds(history: &SensorTrace, k: usize, seed: u64) -> Result<Thresholds> {
    if history.len() < 2 * k {
        return Err(Error::invalid(
            "history",
            format!("need at least {} samples for k = {k}", 2 * k),
        ));
    }
    let scale = history.channel().full_scale();
    let values: Vec<f64> = history.values().collect();
    let changes: Vec<f64> = values
        .windows(2)
        .map(|w| {
            if w[0] == 0.0 {
                (w[1] - w[0]).abs() / scale
            } else {
                ((w[1] - w[0]) / w[0]).abs()
            }
        })
        .collect();
    thresholds_from_changes(&changes, k, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::Channel;

    #[test]
    fn two_points_two_clusters() {
        let t = thresholds_from_changes(&[0.01, 0.2], 2, 0).unwrap();
        assert!((t.anomaly_x - 0.105).abs() < 1e-15);
        assert_eq!(t.compress_y, 0.01);
    }

    #[test]
    fn constant_history_gives_defaults() {
        let h = SensorTrace::from_values(Channel::Temperature, 0.0, 1.0, &[20.0; 40]).unwrap();
        assert_eq!(
            calibrate_thresholds(&h, 2, 1).unwrap(),
            Thresholds::default()
        );
    }

    #[test]
    fn short_history_rejected() {
        let h =
            SensorTrace::from_values(Channel::Temperature, 0.0, 1.0, &[20.0, 21.0, 22.0]).unwrap();
        assert!(calibrate_thresholds(&h, 2, 1).is_err());
    }

    #[test]
    fn sorted_clusters_with_three_means() {
        let data = [0.0, 0.1, 0.05, 5.0, 5.2, 9.9, 10.0, 10.1];
        let km = kmeans_1d(&data, 3, 7).unwrap();
        assert_eq!(km.counts, vec![3, 2, 3]);
        assert!((km.centroids[1] - 5.1).abs() < 1e-12);
        assert!(km.centroids.windows(2).all(|w| w[0] < w[1]));
        // deterministic given the seed
        assert_eq!(km, kmeans_1d(&data, 3, 7).unwrap());
    }
}
