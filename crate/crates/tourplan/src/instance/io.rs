//! Instance file schema (JSON) and the load/validate/preprocess pipeline.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Instance, InstanceError, Matrix, Mobility, Poi};

/// Mobility block of the instance file. All values are minutes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MobilityFile {
    pub max_walking_time: f64,
    pub min_driving_time: f64,
    pub pickup_time: f64,
    pub parking_time: f64,
}

impl Default for MobilityFile {
    fn default() -> Self {
        let m = Mobility::default();
        MobilityFile {
            max_walking_time: m.max_walking,
            min_driving_time: m.min_driving,
            pickup_time: m.pickup,
            parking_time: m.parking,
        }
    }
}

/// One PoI entry as stored on disk. An entry may list several opening
/// windows; each window becomes its own candidate PoI on load, and the
/// expanded PoIs share a group so at most one of them is ever visited.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PoiEntry {
    pub id: u64,
    /// Entries with the same `group_id` are mutually exclusive. Defaults to
    /// the entry's own `id` (each entry is its own group).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_id: Option<u64>,
    pub lat: f64,
    pub lon: f64,
    /// Profit collected when one of this entry's windows is visited.
    pub score: f64,
    /// Visit duration in minutes.
    pub visit_minutes: f64,
    /// Opening windows `[open, close]`; a visit must start within a window.
    pub windows: Vec<[f64; 2]>,
    /// Days (0-based) on which the PoI is open; omitted means every day.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub days: Option<Vec<usize>>,
}

/// On-disk instance representation.
///
/// Travel matrices are indexed by position in `pois` and hold raw minutes:
/// driving times exclude pickup/parking overhead (folded in on load) and
/// neither matrix needs to be metric unless `metric` says so.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    pub pois: Vec<PoiEntry>,
    pub walk_minutes: Vec<Vec<f64>>,
    pub drive_minutes: Vec<Vec<f64>>,
    #[serde(default)]
    pub mobility: MobilityFile,
    /// Daily time budget in minutes.
    pub c_max: f64,
    /// Number of daily itineraries to plan.
    #[serde(default = "one")]
    pub days: usize,
    /// Index into `pois` of the tourist's start/end location. That entry
    /// anchors every day and is not itself a candidate visit.
    #[serde(default)]
    pub start_index: usize,
    /// Set when the matrices are already shortest-path closed, to skip the
    /// cubic closure on load (the synthetic generator produces such files).
    #[serde(default)]
    pub metric: bool,
}

fn one() -> usize {
    1
}

impl InstanceFile {
    /// Validates, preprocesses and expands the file into a solver [`Instance`].
    pub fn into_instance(self) -> Result<Instance, InstanceError> {
        let n = self.pois.len();
        if self.start_index >= n {
            return Err(InstanceError::BadStartIndex(self.start_index, n));
        }
        if self.days == 0 || self.days > 32 {
            return Err(InstanceError::BadDayCount(self.days));
        }
        if !self.c_max.is_finite() || self.c_max <= 0.0 {
            return Err(InstanceError::BadHorizon(self.c_max));
        }

        let mut walk = Matrix::from_rows("walk", &self.walk_minutes)?;
        let mut drive = Matrix::from_rows("drive", &self.drive_minutes)?;
        for (which, m) in [("walk", &walk), ("drive", &drive)] {
            if m.n() != n {
                return Err(InstanceError::MatrixSizeMismatch {
                    which,
                    got: m.n(),
                    expected: n,
                });
            }
        }

        let mobility = Mobility {
            max_walking: self.mobility.max_walking_time,
            min_driving: self.mobility.min_driving_time,
            pickup: self.mobility.pickup_time,
            parking: self.mobility.parking_time,
        };
        for (field, value) in [
            ("max_walking_time", mobility.max_walking),
            ("min_driving_time", mobility.min_driving),
            ("pickup_time", mobility.pickup),
            ("parking_time", mobility.parking),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(InstanceError::BadField {
                    id: 0,
                    field,
                    value,
                });
            }
        }

        if !self.metric {
            walk.metric_closure();
            drive.metric_closure();
        }
        // Folding happens after the closure: shortest drive paths are computed
        // on pure driving times, then the one-off pickup+parking overhead is
        // charged per leg.
        drive.fold_transfer(mobility.pickup + mobility.parking);

        let mut seen_ids = std::collections::HashSet::new();
        let mut group_index = std::collections::HashMap::new();
        let mut pois = Vec::new();
        for (loc, entry) in self.pois.iter().enumerate() {
            if !seen_ids.insert(entry.id) {
                return Err(InstanceError::DuplicateId(entry.id));
            }
            if loc == self.start_index {
                continue; // the start entry is an anchor, not a candidate
            }
            for (field, value) in [
                ("score", entry.score),
                ("visit_minutes", entry.visit_minutes),
            ] {
                if !value.is_finite() || value < 0.0 {
                    return Err(InstanceError::BadField {
                        id: entry.id,
                        field,
                        value,
                    });
                }
            }
            if entry.windows.is_empty() {
                return Err(InstanceError::NoWindows { id: entry.id });
            }
            // Days beyond the planning horizon are not an error: sweeping
            // the day count over one instance must stay valid, so a PoI only
            // open on later days is simply never available on this trip.
            let mut days_mask: u32 = 0;
            match &entry.days {
                None => days_mask = (1u32 << self.days) - 1,
                Some(list) => {
                    for &d in list {
                        if d < self.days {
                            days_mask |= 1 << d;
                        }
                    }
                }
            }
            let group_key = entry.group_id.unwrap_or(entry.id);
            let next = group_index.len();
            let group = *group_index.entry(group_key).or_insert(next);
            for (w, &[open, close]) in entry.windows.iter().enumerate() {
                if !open.is_finite() || !close.is_finite() || open < 0.0 || close < open {
                    return Err(InstanceError::BadWindow {
                        id: entry.id,
                        open,
                        close,
                    });
                }
                pois.push(Poi {
                    entry_id: entry.id,
                    window_index: w,
                    group,
                    loc,
                    lat: entry.lat,
                    lon: entry.lon,
                    score: entry.score,
                    duration: entry.visit_minutes,
                    open,
                    close,
                    days: days_mask,
                });
            }
        }

        let n_groups = group_index.len();
        let start_entry = &self.pois[self.start_index];
        let start_poi = pois.len();
        let end_poi = start_poi + 1;
        let anchor = |open: f64, close: f64, window_index: usize| Poi {
            entry_id: start_entry.id,
            window_index,
            group: n_groups, // anchors share a reserved group of their own
            loc: self.start_index,
            lat: start_entry.lat,
            lon: start_entry.lon,
            score: 0.0,
            duration: 0.0,
            open,
            close,
            days: (1u32 << self.days) - 1,
        };
        // The day starts at time 0 sharp and must return by the budget.
        pois.push(anchor(0.0, 0.0, 0));
        pois.push(anchor(0.0, self.c_max, 1));

        Ok(Instance {
            pois,
            walk,
            drive,
            mobility,
            c_max: self.c_max,
            days: self.days,
            start_poi,
            end_poi,
            n_groups,
        })
    }
}

/// Reads an instance file without preprocessing it, so callers may first
/// override fields such as the number of days.
pub fn load_instance_file(path: &Path) -> Result<InstanceFile, InstanceError> {
    let text = std::fs::read_to_string(path).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}

/// Reads and preprocesses an instance file.
pub fn load_instance(path: &Path) -> Result<Instance, InstanceError> {
    load_instance_file(path)?.into_instance()
}
