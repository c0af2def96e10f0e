//! Candidate filtering and walking-distance clusters.
//!
//! Two preprocessing steps shrink and shape the candidate set:
//!
//! * **Radius filter** — only PoIs within a driving radius (km, great-circle)
//!   of the start location are candidates at all.
//! * **Clustering** — candidate locations are grouped by agglomerative
//!   clustering on symmetrized walking times, cut either at a walk-time
//!   threshold (default: the maximum acceptable walking time, so any two
//!   PoIs of one cluster are mutually walkable) or at a requested cluster
//!   count.
//!
//! During search the clusters act as an insertion gate
//! ([`insertion_allowed`]): each itinerary must visit every cluster as one
//! contiguous block, except the depot's own cluster which may open and close
//! the day. The gate prunes most candidate positions before any feasibility
//! arithmetic runs and keeps itineraries geographically coherent.
//!
//! Cluster assignments are pure functions of the instance and parameters, so
//! they can be cached in a sidecar file next to the instance, keyed by the
//! instance file's SHA-256 ([`load_or_build`]).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::geo::haversine_km;
use crate::instance::{Instance, PoiIdx};

/// Linkage rule for merging clusters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    /// Merge height = largest pairwise walk time (keeps clusters walkable).
    Complete,
    /// Merge height = mean pairwise walk time.
    Average,
}

/// Where to cut the merge tree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cut {
    /// Apply every merge whose height is at most this many walking minutes.
    WalkMinutes(f64),
    /// Merge until at most this many clusters remain.
    Count(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterParams {
    pub linkage: Linkage,
    pub cut: Cut,
}

impl ClusterParams {
    /// Default policy: complete linkage cut at the instance's maximum
    /// acceptable walking time.
    pub fn for_instance(inst: &Instance) -> Self {
        ClusterParams {
            linkage: Linkage::Complete,
            cut: Cut::WalkMinutes(inst.mobility.max_walking),
        }
    }
}

/// Cluster labels for every PoI of an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    /// Per-PoI label; `None` for candidates outside the driving radius
    /// (which are never inserted). Anchors carry the depot label.
    pub labels: Vec<Option<usize>>,
    /// Label of the start location's cluster.
    pub depot_label: usize,
    pub n_clusters: usize,
}

impl ClusterAssignment {
    pub fn label(&self, poi: PoiIdx) -> Option<usize> {
        self.labels[poi]
    }
}

/// Which PoIs lie within `radius_km` driving kilometres (great-circle) of
/// the start location. `None` keeps everything. Anchors are always kept.
pub fn radius_filter(inst: &Instance, radius_km: Option<f64>) -> Vec<bool> {
    let start = inst.poi(inst.start_poi);
    inst.pois
        .iter()
        .enumerate()
        .map(|(p, poi)| {
            inst.is_anchor(p)
                || radius_km.is_none_or(|r| {
                    haversine_km(start.lat, start.lon, poi.lat, poi.lon) <= r + 1e-9
                })
        })
        .collect()
}

/// Clusters the in-radius candidate locations by symmetrized walking time
/// and labels every PoI. Deterministic for a fixed instance and parameters.
pub fn build(inst: &Instance, radius_km: Option<f64>, params: &ClusterParams) -> ClusterAssignment {
    let eligible = radius_filter(inst, radius_km);

    // Cluster *locations*, not expanded time windows: PoIs sharing a
    // location always land in the same cluster.
    let start_loc = inst.poi(inst.start_poi).loc;
    let mut loc_of_point: Vec<usize> = vec![start_loc];
    let mut point_of_loc = vec![usize::MAX; inst.walk.n()];
    point_of_loc[start_loc] = 0;
    for p in inst.candidates() {
        if !eligible[p] {
            continue;
        }
        let loc = inst.pois[p].loc;
        if point_of_loc[loc] == usize::MAX {
            point_of_loc[loc] = loc_of_point.len();
            loc_of_point.push(loc);
        }
    }
    let n = loc_of_point.len();

    let point_labels = if n == 1 {
        vec![0]
    } else {
        // Condensed upper-triangle dissimilarities, row-major, as used by
        // the linkage implementation.
        let mut condensed = Vec::with_capacity(n * (n - 1) / 2);
        for a in 0..n {
            for b in a + 1..n {
                let (la, lb) = (loc_of_point[a], loc_of_point[b]);
                condensed.push(inst.walk.get(la, lb).max(inst.walk.get(lb, la)));
            }
        }
        let method = match params.linkage {
            Linkage::Complete => kodama::Method::Complete,
            Linkage::Average => kodama::Method::Average,
        };
        let dendrogram = kodama::linkage(&mut condensed, n, method);

        // Replay merges (they come sorted by height) through a union-find
        // until the cut says stop.
        let mut parent: Vec<usize> = (0..2 * n - 1).collect();
        fn root(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut remaining = n;
        for (step_idx, step) in dendrogram.steps().iter().enumerate() {
            match params.cut {
                Cut::WalkMinutes(t) => {
                    if step.dissimilarity > t {
                        break;
                    }
                }
                Cut::Count(c) => {
                    if remaining <= c.max(1) {
                        break;
                    }
                }
            }
            let merged = n + step_idx;
            let ra = root(&mut parent, step.cluster1);
            let rb = root(&mut parent, step.cluster2);
            parent[ra] = merged;
            parent[rb] = merged;
            remaining -= 1;
        }

        // Dense labels in order of first appearance over point indices.
        let mut label_of_root = std::collections::HashMap::new();
        let mut labels = Vec::with_capacity(n);
        for point in 0..n {
            let r = root(&mut parent, point);
            let next = label_of_root.len();
            labels.push(*label_of_root.entry(r).or_insert(next));
        }
        labels
    };

    let n_clusters = point_labels.iter().max().copied().unwrap_or(0) + 1;
    let depot_label = point_labels[0];
    let labels = (0..inst.pois.len())
        .map(|p| {
            if inst.is_anchor(p) {
                Some(depot_label)
            } else if eligible[p] {
                Some(point_labels[point_of_loc[inst.pois[p].loc]])
            } else {
                None
            }
        })
        .collect();
    ClusterAssignment {
        labels,
        depot_label,
        n_clusters,
    }
}

/// Cluster labels already present in one itinerary.
#[derive(Debug, Clone, PartialEq)]
pub struct UsedLabels {
    present: Vec<bool>,
    count: usize,
}

impl UsedLabels {
    pub fn new(n_clusters: usize) -> Self {
        UsedLabels {
            present: vec![false; n_clusters],
            count: 0,
        }
    }

    pub fn contains(&self, label: usize) -> bool {
        self.present[label]
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn insert(&mut self, label: usize) {
        if !self.present[label] {
            self.present[label] = true;
            self.count += 1;
        }
    }

    /// Rebuilds from an itinerary's visits (used after perturbation).
    pub fn rebuild(
        &mut self,
        assign: &ClusterAssignment,
        visit_pois: impl Iterator<Item = PoiIdx>,
    ) {
        self.present.iter_mut().for_each(|p| *p = false);
        self.count = 0;
        for poi in visit_pois {
            let label = assign
                .label(poi)
                .expect("routed PoIs always carry a cluster label");
            self.insert(label);
        }
    }
}

/// The cluster gate: may a PoI labelled `l_j` be inserted between visits
/// labelled `l_i` and `l_k` in an itinerary that already uses `used`?
///
/// Allowed when it extends an adjacent same-label block, when the tour is
/// still empty (both neighbours are the depot and only the depot's label is
/// used), or when a label not yet present bridges two different labels.
/// Together these keep every non-depot cluster contiguous within a tour.
pub fn insertion_allowed(
    assign: &ClusterAssignment,
    used: &UsedLabels,
    l_i: usize,
    l_j: usize,
    l_k: usize,
) -> bool {
    if l_i == l_j || l_k == l_j {
        return true;
    }
    if l_i == assign.depot_label && l_k == assign.depot_label && used.count() == 1 {
        return true;
    }
    l_i != l_k && !used.contains(l_j)
}

/// On-disk cache of a cluster assignment, keyed by the instance file's
/// SHA-256 plus the effective parameters.
#[derive(Debug, Serialize, Deserialize)]
struct SidecarFile {
    instance_sha256: String,
    radius_km: Option<f64>,
    params: ClusterParams,
    assignment: ClusterAssignment,
}

/// Where the sidecar for an instance file lives.
pub fn sidecar_path(instance_path: &Path) -> PathBuf {
    let mut name = instance_path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    name.push_str(".clusters.json");
    instance_path.with_file_name(name)
}

/// Loads a cached assignment if the sidecar matches the instance bytes and
/// parameters; otherwise clusters from scratch and refreshes the sidecar.
/// Cache trouble (missing, stale, unreadable, unwritable) silently falls
/// back to computing; the result is always correct.
pub fn load_or_build(
    inst: &Instance,
    radius_km: Option<f64>,
    params: &ClusterParams,
    instance_path: &Path,
) -> ClusterAssignment {
    let hash = match std::fs::read(instance_path) {
        Ok(bytes) => format!("{:x}", Sha256::digest(&bytes)),
        Err(_) => return build(inst, radius_km, params),
    };
    let sidecar = sidecar_path(instance_path);
    if let Ok(text) = std::fs::read_to_string(&sidecar) {
        if let Ok(cached) = serde_json::from_str::<SidecarFile>(&text) {
            if cached.instance_sha256 == hash
                && cached.radius_km == radius_km
                && cached.params == *params
                && cached.assignment.labels.len() == inst.pois.len()
            {
                return cached.assignment;
            }
        }
    }
    let assignment = build(inst, radius_km, params);
    let file = SidecarFile {
        instance_sha256: hash,
        radius_km,
        params: *params,
        assignment: assignment.clone(),
    };
    if let Ok(json) = serde_json::to_string(&file) {
        let _ = std::fs::write(&sidecar, json);
    }
    assignment
}
