//! Seeded synthetic instance generator.
//!
//! Places PoIs uniformly in a bounding box and derives travel times from
//! great-circle distances at fixed speeds, which makes both matrices metric
//! by construction (scaling a metric preserves the triangle inequality), so
//! generated files carry `metric: true` and skip the cubic closure on load.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{InstanceFile, MobilityFile, PoiEntry};
use crate::geo::haversine_km;

/// Knobs for [`generate_synthetic`]. Defaults model a compact city trip.
#[derive(Debug, Clone)]
pub struct GenerateParams {
    /// Number of candidate PoI entries (the start location is added on top).
    pub n_pois: usize,
    /// Number of daily itineraries.
    pub days: usize,
    /// RNG seed; equal seeds yield byte-identical files.
    pub seed: u64,
    /// Bounding box `(lat_min, lon_min, lat_max, lon_max)`.
    pub bbox: (f64, f64, f64, f64),
    /// Walking speed in km/h.
    pub walk_kmh: f64,
    /// Driving speed in km/h (raw times; transfer overhead stays separate).
    pub drive_kmh: f64,
    /// Daily time budget in minutes.
    pub c_max: f64,
    pub mobility: MobilityFile,
    /// Fraction of entries that get a second opening window.
    pub two_window_fraction: f64,
    /// Fraction of entries open only on a random subset of days.
    pub day_restricted_fraction: f64,
}

impl Default for GenerateParams {
    fn default() -> Self {
        GenerateParams {
            n_pois: 100,
            days: 1,
            seed: 0,
            // Roughly a 20 km x 16 km metropolitan area.
            bbox: (48.10, 11.45, 48.25, 11.72),
            walk_kmh: 5.0,
            drive_kmh: 25.0,
            c_max: 720.0,
            mobility: MobilityFile::default(),
            two_window_fraction: 0.25,
            day_restricted_fraction: 0.15,
        }
    }
}

/// Generates a deterministic synthetic instance file.
pub fn generate_synthetic(params: &GenerateParams) -> InstanceFile {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let (lat0, lon0, lat1, lon1) = params.bbox;
    let n = params.n_pois + 1; // plus the start location

    let mut points = Vec::with_capacity(n);
    // The start location sits at the box centre (a hotel downtown).
    points.push(((lat0 + lat1) / 2.0, (lon0 + lon1) / 2.0));
    for _ in 0..params.n_pois {
        points.push((rng.gen_range(lat0..lat1), rng.gen_range(lon0..lon1)));
    }

    let minutes = |km: f64, kmh: f64| (km / kmh * 60.0 * 100.0).round() / 100.0;
    let mut walk = vec![vec![0.0; n]; n];
    let mut drive = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let km = haversine_km(points[i].0, points[i].1, points[j].0, points[j].1);
            walk[i][j] = minutes(km, params.walk_kmh);
            drive[i][j] = minutes(km, params.drive_kmh);
        }
    }

    let mut pois = Vec::with_capacity(n);
    for (id, &(lat, lon)) in points.iter().enumerate() {
        if id == 0 {
            pois.push(PoiEntry {
                id: 0,
                group_id: None,
                lat,
                lon,
                score: 0.0,
                visit_minutes: 0.0,
                windows: vec![[0.0, 0.0]],
                days: None,
            });
            continue;
        }
        let score = rng.gen_range(1..=100) as f64;
        let visit_minutes = (rng.gen_range(2..=18) * 5) as f64; // 10..90 min
                                                                // Window grids are clamped so every window stays inside the daily
                                                                // budget whatever `c_max` is: opens sit at most 60 minutes before
                                                                // the budget runs out, closes never pass it.
        let clamp_open = |raw: f64| raw.min((params.c_max - 60.0).max(0.0));
        let windows = if rng.gen_bool(params.two_window_fraction) {
            // Morning and afternoon windows with a midday break.
            let open1 = clamp_open((rng.gen_range(0..=12) * 10) as f64);
            let close1 = (open1 + (rng.gen_range(6..=18) * 10) as f64).min(params.c_max);
            let open2 = close1 + (rng.gen_range(3..=9) * 10) as f64;
            let close2 = (open2 + (rng.gen_range(6..=18) * 10) as f64).min(params.c_max);
            if open2 < close2 {
                vec![[open1, close1], [open2, close2]]
            } else {
                vec![[open1, close1]]
            }
        } else {
            let open = clamp_open((rng.gen_range(0..=30) * 10) as f64);
            let close = (open + (rng.gen_range(9..=42) * 10) as f64).min(params.c_max);
            vec![[open, close]]
        };
        let days = if params.days > 1 && rng.gen_bool(params.day_restricted_fraction) {
            let open_days: Vec<usize> = (0..params.days).filter(|_| rng.gen_bool(0.5)).collect();
            if open_days.is_empty() {
                None // closed every day makes no sense; keep it always open
            } else {
                Some(open_days)
            }
        } else {
            None
        };
        pois.push(PoiEntry {
            id: id as u64,
            group_id: None,
            lat,
            lon,
            score,
            visit_minutes,
            windows,
            days,
        });
    }

    InstanceFile {
        pois,
        walk_minutes: walk,
        drive_minutes: drive,
        mobility: params.mobility.clone(),
        c_max: params.c_max,
        days: params.days,
        start_index: 0,
        metric: true,
    }
}
