//! Problem data: PoIs, time windows, travel matrices and preprocessing.
//!
//! An [`Instance`] is the fully preprocessed form the solver works on:
//!
//! * multi-window file entries are expanded into one candidate PoI per window,
//!   tied together by a *group* — at most one PoI of a group may be routed;
//! * both travel matrices satisfy the triangle inequality (metric closure is
//!   applied on load unless the file vouches for it);
//! * car transfer overhead (pickup + parking) is folded into every off-diagonal
//!   driving time once, so the solver never adds it again;
//! * two anchor PoIs (the tourist's start and end position for each day) are
//!   appended after the candidates.

mod generate;
mod io;

pub use generate::{generate_synthetic, GenerateParams};
pub use io::{load_instance, load_instance_file, InstanceFile, MobilityFile, PoiEntry};

use thiserror::Error;

/// Index into [`Instance::pois`] (window-expanded PoIs plus the two anchors).
pub type PoiIdx = usize;
/// Row/column index into the travel matrices (one per file entry/location).
pub type LocIdx = usize;

/// Errors raised while loading or validating an instance.
#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("failed to parse instance JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{which} matrix is not square: row {row} has {got} entries, expected {expected}")]
    MatrixNotSquare {
        which: &'static str,
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("{which} matrix has {got} rows but the instance lists {expected} PoIs")]
    MatrixSizeMismatch {
        which: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("{which} matrix entry ({i},{j}) = {value} is not a finite non-negative time")]
    BadTime {
        which: &'static str,
        i: usize,
        j: usize,
        value: f64,
    },
    #[error("PoI {id}: window [{open}, {close}] is invalid (need 0 <= open <= close)")]
    BadWindow { id: u64, open: f64, close: f64 },
    #[error("PoI {id} has no time windows")]
    NoWindows { id: u64 },
    #[error("PoI {id}: {field} = {value} must be finite and non-negative")]
    BadField {
        id: u64,
        field: &'static str,
        value: f64,
    },
    #[error("duplicate PoI id {0}")]
    DuplicateId(u64),
    #[error("start_index {0} is out of range ({1} PoIs)")]
    BadStartIndex(usize, usize),
    #[error("instance must cover at least 1 and at most 32 days, got {0}")]
    BadDayCount(usize),
    #[error("c_max = {0} must be a finite positive horizon")]
    BadHorizon(f64),
}

/// Square travel-time matrix in minutes, dense row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Matrix filled with `value` everywhere except a zero diagonal.
    pub fn filled(n: usize, value: f64) -> Self {
        let mut m = Matrix {
            n,
            data: vec![value; n * n],
        };
        for i in 0..n {
            m.set(i, i, 0.0);
        }
        m
    }

    /// Builds from row vectors, validating shape and entries.
    pub fn from_rows(which: &'static str, rows: &[Vec<f64>]) -> Result<Self, InstanceError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(InstanceError::MatrixNotSquare {
                    which,
                    row: i,
                    got: row.len(),
                    expected: n,
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(InstanceError::BadTime {
                        which,
                        i,
                        j,
                        value: v,
                    });
                }
                data.push(v);
            }
        }
        Ok(Matrix { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: LocIdx, j: LocIdx) -> f64 {
        debug_assert!(i < self.n && j < self.n);
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: LocIdx, j: LocIdx, value: f64) {
        debug_assert!(i < self.n && j < self.n);
        self.data[i * self.n + j] = value;
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].to_vec())
            .collect()
    }

    /// Replaces every entry with the shortest-path time over the matrix itself
    /// (Floyd–Warshall metric closure). Idempotent.
    pub fn metric_closure(&mut self) {
        let n = self.n;
        for k in 0..n {
            for i in 0..n {
                let ik = self.get(i, k);
                if ik.is_infinite() {
                    continue;
                }
                for j in 0..n {
                    let through = ik + self.get(k, j);
                    if through < self.get(i, j) {
                        self.set(i, j, through);
                    }
                }
            }
        }
    }

    /// True iff no entry can be improved by routing through an intermediate
    /// location (within `tol`).
    pub fn is_metric(&self, tol: f64) -> bool {
        let n = self.n;
        for k in 0..n {
            for i in 0..n {
                let ik = self.get(i, k);
                for j in 0..n {
                    if ik + self.get(k, j) < self.get(i, j) - tol {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Adds `overhead` to every off-diagonal entry (car pickup + parking time).
    pub fn fold_transfer(&mut self, overhead: f64) {
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    let v = self.get(i, j);
                    self.set(i, j, v + overhead);
                }
            }
        }
    }
}

/// Tourist mobility preferences and car transfer overheads, all in minutes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mobility {
    /// Longest leg the tourist is willing to walk.
    pub max_walking: f64,
    /// Below this driving time the tourist prefers to stay on foot.
    pub min_driving: f64,
    /// Time to pick the car up (folded into driving times on load).
    pub pickup: f64,
    /// Time to park (folded into driving times on load).
    pub parking: f64,
}

impl Default for Mobility {
    fn default() -> Self {
        Mobility {
            max_walking: 30.0,
            min_driving: 6.0,
            pickup: 5.0,
            parking: 10.0,
        }
    }
}

/// One visitable point of interest (a single time window on selected days).
#[derive(Debug, Clone)]
pub struct Poi {
    /// `id` of the file entry this PoI was expanded from.
    pub entry_id: u64,
    /// Which of the entry's windows this PoI carries.
    pub window_index: usize,
    /// Dense group index; at most one PoI per group may be routed.
    pub group: usize,
    /// Travel-matrix row shared by all PoIs of the same entry.
    pub loc: LocIdx,
    pub lat: f64,
    pub lon: f64,
    /// Profit collected when the visit is scheduled.
    pub score: f64,
    /// Visit duration in minutes.
    pub duration: f64,
    /// Window opening time (minutes from the start of the day).
    pub open: f64,
    /// Window closing time: the visit must *start* no later than this.
    pub close: f64,
    /// Bitmask of days on which this PoI is available.
    pub days: u32,
}

impl Poi {
    pub fn available_on(&self, day: usize) -> bool {
        self.days & (1 << day) != 0
    }
}

/// Fully preprocessed problem instance.
#[derive(Debug, Clone)]
pub struct Instance {
    /// Window-expanded PoIs; indices `0..start_poi` are candidates, then the
    /// start anchor at `start_poi` and the end anchor at `end_poi`.
    pub pois: Vec<Poi>,
    /// Walking times between locations, minutes, metric.
    pub walk: Matrix,
    /// Driving times between locations, minutes, metric, transfer-folded.
    pub drive: Matrix,
    pub mobility: Mobility,
    /// Daily time budget in minutes; every itinerary must return by `c_max`.
    pub c_max: f64,
    /// Number of daily itineraries.
    pub days: usize,
    /// Anchor PoI representing the tourist position a day starts from.
    pub start_poi: PoiIdx,
    /// Anchor PoI representing where the day must end (same location).
    pub end_poi: PoiIdx,
    /// Number of distinct PoI groups.
    pub n_groups: usize,
}

impl Instance {
    /// Number of candidate (non-anchor) PoIs.
    pub fn n_candidates(&self) -> usize {
        self.start_poi
    }

    /// Candidate PoI indices.
    pub fn candidates(&self) -> std::ops::Range<PoiIdx> {
        0..self.start_poi
    }

    pub fn is_anchor(&self, p: PoiIdx) -> bool {
        p >= self.start_poi
    }

    #[inline]
    pub fn poi(&self, p: PoiIdx) -> &Poi {
        &self.pois[p]
    }

    /// Walking minutes between two PoIs (by their locations).
    #[inline]
    pub fn walk_minutes(&self, a: PoiIdx, b: PoiIdx) -> f64 {
        self.walk.get(self.pois[a].loc, self.pois[b].loc)
    }

    /// Driving minutes between two PoIs, transfer overhead included.
    #[inline]
    pub fn drive_minutes(&self, a: PoiIdx, b: PoiIdx) -> f64 {
        self.drive.get(self.pois[a].loc, self.pois[b].loc)
    }

    /// Sum of scores over all candidates (upper bound for sanity checks).
    pub fn total_score(&self) -> f64 {
        self.pois[..self.n_candidates()]
            .iter()
            .map(|p| p.score)
            .sum()
    }
}
