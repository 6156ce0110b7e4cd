//! Run reports and cluster-assignment files. Everything here serializes
//! with stable field order so identical runs produce identical bytes;
//! `wall_time_ms` is the one field that varies between reruns.

use serde::{Deserialize, Serialize};
use sfn::graph::NodeId;
use sfn::protocol::ClusterEntry;

#[derive(Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub mode: String,
    pub n: u32,
    pub gamma: f64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped_edges: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_distance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_cores: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cluster_sizes: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cluster_size_stats: Option<SizeStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub isolated: Option<u32>,
    pub wall_time_ms: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SizeStats {
    pub mean: f64,
    pub std: f64,
    pub variance: f64,
}

impl SizeStats {
    pub fn from_sizes(sizes: &[u32]) -> Option<SizeStats> {
        if sizes.is_empty() {
            return None;
        }
        let n = sizes.len() as f64;
        let mean = sizes.iter().map(|&s| s as f64).sum::<f64>() / n;
        let variance = sizes
            .iter()
            .map(|&s| (s as f64 - mean).powi(2))
            .sum::<f64>()
            / n;
        Some(SizeStats {
            mean,
            std: variance.sqrt(),
            variance,
        })
    }
}

/// Assignment file written by `sfn cluster`, shared by both modes.
#[derive(Debug, Serialize, Deserialize)]
pub struct ClusterFile {
    pub cores: Vec<CoreCluster>,
    pub isolated: Vec<NodeId>,
    pub params: ClusterParams,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CoreCluster {
    pub id: NodeId,
    pub cluster: Vec<ClusterEntry>,
    /// Cores this core heard announcements from (distributed mode only).
    pub core_tab: Vec<NodeId>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ClusterParams {
    pub mode: String,
    pub n_nodes: u32,
    pub threshold: u32,
    pub d_max: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_end: Option<f64>,
    pub seed: u64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_stats_variance_is_std_squared() {
        let stats = SizeStats::from_sizes(&[3, 5, 10, 2]).unwrap();
        assert!((stats.variance - stats.std * stats.std).abs() < 1e-12);
        assert!((stats.mean - 5.0).abs() < 1e-12);
        assert!(SizeStats::from_sizes(&[]).is_none());
    }
}
