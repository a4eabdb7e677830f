//! In-sensor analytics: anomaly detection, temporal compression, zero-order
//! hold reconstruction, fidelity metrics and k-means threshold calibration.

mod anomaly;
mod calibrate;
mod compress;
mod fidelity;
mod threshold;

pub use anomaly::{detect_anomaly, AnomalyDetector, AnomalyEvent};
pub use calibrate::{calibrate_thresholds, kmeans_1d, thresholds_from_changes, KMeans1d};
pub use compress::{compress, CompressedSeries, Compressor};
pub use fidelity::{fidelity_metrics, pearson, reconstruct, Correlation, FidelityMetrics};
pub use threshold::{exceeds_relative, Thresholds};
