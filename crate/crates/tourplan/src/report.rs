//! Solution files, independent validation, GeoJSON export, run manifests
//! and the benchmark harness.
//!
//! The validator never trusts the solver's incremental bookkeeping: it
//! resolves the visited PoIs, rebuilds every itinerary from the sequence and
//! modes alone, re-derives all times with the full O(n) pass, and compares.
//! A solution file that passes validation is feasible no matter which code
//! path produced it.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::clustering::ClusterAssignment;
use crate::instance::{Instance, PoiIdx};
use crate::schedule::{Itinerary, Mode, Solution};
use crate::search::{SolveConfig, SolveOutcome};

/// One visit in a solution file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VisitRecord {
    /// PoI id from the instance file.
    pub poi_id: u64,
    /// Which of the PoI's time windows this visit uses.
    pub window_index: usize,
    pub arrival: f64,
    pub start: f64,
    pub depart: f64,
    /// Mode of the arc to the next visit; `null` on the last visit.
    pub mode_to_next: Option<Mode>,
    /// Index of the pedestrian subtour within the day, if any.
    pub subtour: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DayRecord {
    pub day: usize,
    pub score: f64,
    pub violations: usize,
    pub duration: f64,
    pub visits: Vec<VisitRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Totals {
    pub score: f64,
    pub violations: usize,
    pub duration: f64,
}

/// The on-disk solution schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionFile {
    pub days: Vec<DayRecord>,
    pub totals: Totals,
}

/// Serializes a solution. Pure function of the solution and instance, so
/// identical solves produce byte-identical files.
pub fn to_solution_file(inst: &Instance, sol: &Solution) -> SolutionFile {
    let days: Vec<DayRecord> = sol
        .itineraries
        .iter()
        .enumerate()
        .map(|(day, it)| {
            let visits = it
                .visits
                .iter()
                .enumerate()
                .map(|(pos, v)| {
                    let poi = inst.poi(v.poi);
                    VisitRecord {
                        poi_id: poi.entry_id,
                        window_index: poi.window_index,
                        arrival: v.arrival,
                        start: v.start,
                        depart: v.start + poi.duration,
                        mode_to_next: (pos + 1 < it.visits.len()).then_some(v.mode),
                        subtour: v.subtour,
                    }
                })
                .collect();
            DayRecord {
                day,
                score: it.score(inst),
                violations: it.violation_count,
                duration: it.duration(),
                visits,
            }
        })
        .collect();
    let totals = Totals {
        score: days.iter().map(|d| d.score).sum(),
        violations: days.iter().map(|d| d.violations).sum(),
        duration: days.iter().map(|d| d.duration).sum(),
    };
    SolutionFile { days, totals }
}

pub fn write_solution(path: &Path, file: &SolutionFile) -> anyhow::Result<()> {
    let json = serde_json::to_string_pretty(file)?;
    std::fs::write(path, json)?;
    Ok(())
}

pub fn read_solution(path: &Path) -> anyhow::Result<SolutionFile> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Everything the validator found wrong; empty means the file is sound.
#[derive(Debug, Default)]
pub struct ValidationReport {
    pub failures: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.failures.is_empty()
    }

    fn fail(&mut self, msg: String) {
        self.failures.push(msg);
    }
}

/// Checks a solution file against its instance from first principles:
/// resolvable ids, anchored days, day availability, at most one visit per
/// PoI group, every time re-derived by the full recompute pass (windows and
/// budget included), violation counts, totals, and — when a cluster
/// assignment is supplied — cluster contiguity within each day.
pub fn validate(
    inst: &Instance,
    file: &SolutionFile,
    clusters: Option<&ClusterAssignment>,
) -> ValidationReport {
    let mut report = ValidationReport::default();

    // Resolve (poi_id, window_index) -> PoI.
    let mut by_key: HashMap<(u64, usize), PoiIdx> = HashMap::new();
    for p in inst.candidates() {
        by_key.insert((inst.pois[p].entry_id, inst.pois[p].window_index), p);
    }
    let anchor_id = inst.pois[inst.start_poi].entry_id;

    if file.days.len() != inst.days {
        report.fail(format!(
            "expected {} day records, found {}",
            inst.days,
            file.days.len()
        ));
        return report;
    }

    let mut group_seen: Vec<Option<(usize, u64)>> = vec![None; inst.n_groups];
    let mut total_score = 0.0;
    let mut total_violations = 0usize;
    let mut total_duration = 0.0;

    for (day_idx, day) in file.days.iter().enumerate() {
        if day.day != day_idx {
            report.fail(format!("day record {day_idx} labels itself {}", day.day));
        }
        if day.visits.len() < 2 {
            report.fail(format!("day {day_idx}: fewer than two visits"));
            continue;
        }
        let first = &day.visits[0];
        let last = day.visits.last().unwrap();
        if first.poi_id != anchor_id || last.poi_id != anchor_id {
            report.fail(format!(
                "day {day_idx}: itinerary must start and end at the start location (id {anchor_id})"
            ));
            continue;
        }

        // Resolve the sequence.
        let mut pois = vec![inst.start_poi];
        let mut modes = Vec::new();
        let mut resolved = true;
        for (pos, rec) in day.visits.iter().enumerate() {
            if pos > 0 && pos + 1 < day.visits.len() {
                match by_key.get(&(rec.poi_id, rec.window_index)) {
                    Some(&p) => {
                        pois.push(p);
                        if !inst.poi(p).available_on(day_idx) {
                            report.fail(format!(
                                "day {day_idx}: PoI {} window {} is not available on this day",
                                rec.poi_id, rec.window_index
                            ));
                        }
                        match group_seen[inst.poi(p).group] {
                            Some((other_day, other_id)) => report.fail(format!(
                                "day {day_idx}: PoI {} repeats group already visited on day {other_day} (id {other_id})",
                                rec.poi_id
                            )),
                            None => group_seen[inst.poi(p).group] = Some((day_idx, rec.poi_id)),
                        }
                    }
                    None => {
                        report.fail(format!(
                            "day {day_idx}: unknown PoI id {} window {}",
                            rec.poi_id, rec.window_index
                        ));
                        resolved = false;
                    }
                }
            }
            if pos + 1 < day.visits.len() {
                match rec.mode_to_next {
                    Some(m) => modes.push(m),
                    None => {
                        report.fail(format!(
                            "day {day_idx}: visit {pos} is missing its outbound mode"
                        ));
                        resolved = false;
                    }
                }
            } else if rec.mode_to_next.is_some() {
                report.fail(format!("day {day_idx}: last visit must not carry a mode"));
            }
        }
        if !resolved {
            continue;
        }
        pois.push(inst.end_poi);

        // Re-derive the whole schedule and compare.
        let mut rebuilt = Itinerary::from_sequence(inst, &pois, &modes);
        if let Err(e) = rebuilt.recompute_schedule(inst) {
            report.fail(format!("day {day_idx}: infeasible schedule: {e}"));
            continue;
        }
        for (pos, (rec, v)) in day.visits.iter().zip(&rebuilt.visits).enumerate() {
            let depart = v.start + inst.poi(v.poi).duration;
            for (name, got, want) in [
                ("arrival", rec.arrival, v.arrival),
                ("start", rec.start, v.start),
                ("depart", rec.depart, depart),
            ] {
                if (got - want).abs() > 1e-6 {
                    report.fail(format!(
                        "day {day_idx} visit {pos}: {name} {got} disagrees with recomputed {want}"
                    ));
                }
            }
            if rec.subtour != v.subtour {
                report.fail(format!(
                    "day {day_idx} visit {pos}: subtour {:?} disagrees with recomputed {:?}",
                    rec.subtour, v.subtour
                ));
            }
        }
        if day.violations != rebuilt.violation_count {
            report.fail(format!(
                "day {day_idx}: {} violations recorded, recompute finds {}",
                day.violations, rebuilt.violation_count
            ));
        }
        if (day.duration - rebuilt.duration()).abs() > 1e-6 {
            report.fail(format!(
                "day {day_idx}: duration {} disagrees with recomputed {}",
                day.duration,
                rebuilt.duration()
            ));
        }
        let score = rebuilt.score(inst);
        if (day.score - score).abs() > 1e-6 {
            report.fail(format!(
                "day {day_idx}: score {} disagrees with recomputed {score}",
                day.score
            ));
        }

        // Cluster contiguity: every non-depot cluster forms one block per
        // day; the depot's cluster may additionally open and close the day.
        if let Some(assign) = clusters {
            let labels: Option<Vec<usize>> = rebuilt.visits[1..rebuilt.visits.len() - 1]
                .iter()
                .map(|v| assign.label(v.poi))
                .collect();
            match labels {
                None => report.fail(format!(
                    "day {day_idx}: a visited PoI lies outside the clustered radius"
                )),
                Some(labels) => {
                    let mut blocks: HashMap<usize, usize> = HashMap::new();
                    let mut prev: Option<usize> = None;
                    for &l in &labels {
                        if prev != Some(l) {
                            *blocks.entry(l).or_insert(0) += 1;
                        }
                        prev = Some(l);
                    }
                    for (l, count) in blocks {
                        let limit = if l == assign.depot_label { 2 } else { 1 };
                        if count > limit {
                            report.fail(format!(
                                "day {day_idx}: cluster {l} appears in {count} separate blocks"
                            ));
                        }
                    }
                }
            }
        }

        total_score += score;
        total_violations += rebuilt.violation_count;
        total_duration += rebuilt.duration();
    }

    if (file.totals.score - total_score).abs() > 1e-6 {
        report.fail(format!(
            "totals.score {} disagrees with recomputed {total_score}",
            file.totals.score
        ));
    }
    if file.totals.violations != total_violations {
        report.fail(format!(
            "totals.violations {} disagrees with recomputed {total_violations}",
            file.totals.violations
        ));
    }
    if (file.totals.duration - total_duration).abs() > 1e-6 {
        report.fail(format!(
            "totals.duration {} disagrees with recomputed {total_duration}",
            file.totals.duration
        ));
    }
    report
}

/// Rebuilds an in-memory [`Solution`] from a solution file, re-deriving all
/// times from scratch. Fails when ids do not resolve, a mode is missing, or
/// a rebuilt day breaks a window or the daily budget.
pub fn solution_from_file(inst: &Instance, file: &SolutionFile) -> anyhow::Result<Solution> {
    let mut by_key: HashMap<(u64, usize), PoiIdx> = HashMap::new();
    for p in inst.candidates() {
        by_key.insert((inst.pois[p].entry_id, inst.pois[p].window_index), p);
    }
    anyhow::ensure!(
        file.days.len() == inst.days,
        "expected {} day records, found {}",
        inst.days,
        file.days.len()
    );
    let mut sol = Solution::empty(inst);
    for (day_idx, day) in file.days.iter().enumerate() {
        anyhow::ensure!(
            day.visits.len() >= 2,
            "day {day_idx}: fewer than two visits"
        );
        let mut pois = vec![inst.start_poi];
        let mut modes = Vec::new();
        for (pos, rec) in day.visits.iter().enumerate() {
            if pos > 0 && pos + 1 < day.visits.len() {
                let p = by_key
                    .get(&(rec.poi_id, rec.window_index))
                    .copied()
                    .ok_or_else(|| {
                        anyhow::anyhow!(
                            "day {day_idx}: unknown PoI id {} window {}",
                            rec.poi_id,
                            rec.window_index
                        )
                    })?;
                pois.push(p);
            }
            if pos + 1 < day.visits.len() {
                let mode = rec.mode_to_next.ok_or_else(|| {
                    anyhow::anyhow!("day {day_idx}: visit {pos} is missing its outbound mode")
                })?;
                modes.push(mode);
            }
        }
        pois.push(inst.end_poi);
        let mut it = Itinerary::from_sequence(inst, &pois, &modes);
        it.recompute_schedule(inst)
            .map_err(|e| anyhow::anyhow!("day {day_idx}: {e}"))?;
        sol.itineraries[day_idx] = it;
    }
    sol.recount(inst);
    Ok(sol)
}

/// GeoJSON rendering: one Point feature per visit (day, order, arrival,
/// outbound mode) and one LineString feature per leg (day, mode).
pub fn to_geojson(inst: &Instance, sol: &Solution) -> serde_json::Value {
    let mut features = Vec::new();
    for (day, it) in sol.itineraries.iter().enumerate() {
        for (order, v) in it.visits.iter().enumerate() {
            let poi = inst.poi(v.poi);
            features.push(serde_json::json!({
                "type": "Feature",
                "geometry": { "type": "Point", "coordinates": [poi.lon, poi.lat] },
                "properties": {
                    "day": day,
                    "order": order,
                    "poi_id": poi.entry_id,
                    "arrival": v.arrival,
                    "mode_to_next": (order + 1 < it.visits.len()).then_some(v.mode),
                },
            }));
        }
        for pos in 0..it.visits.len() - 1 {
            let a = inst.poi(it.visits[pos].poi);
            let b = inst.poi(it.visits[pos + 1].poi);
            features.push(serde_json::json!({
                "type": "Feature",
                "geometry": {
                    "type": "LineString",
                    "coordinates": [[a.lon, a.lat], [b.lon, b.lat]],
                },
                "properties": { "day": day, "mode": it.visits[pos].mode },
            }));
        }
    }
    serde_json::json!({ "type": "FeatureCollection", "features": features })
}

/// Aggregate how a solution spends the time budget.
#[derive(Debug, Clone, Serialize)]
pub struct Metrics {
    pub score: f64,
    pub violations: usize,
    pub pois_visited: usize,
    pub visit_minutes: f64,
    pub wait_minutes: f64,
    pub walk_minutes: f64,
    pub drive_minutes: f64,
    /// Shares of the total budget `days * c_max`, in percent.
    pub visit_share: f64,
    pub wait_share: f64,
    pub walk_share: f64,
    pub drive_share: f64,
}

/// Splits every leg into walking and driving minutes (the walk back to the
/// parked car counts as walking) and relates them to the total budget.
pub fn metrics_of(inst: &Instance, sol: &Solution) -> Metrics {
    let mut visit_minutes = 0.0;
    let mut wait_minutes = 0.0;
    let mut walk_minutes = 0.0;
    let mut drive_minutes = 0.0;
    let mut pois_visited = 0usize;
    for it in &sol.itineraries {
        for (pos, v) in it.visits.iter().enumerate() {
            visit_minutes += inst.poi(v.poi).duration;
            wait_minutes += v.wait;
            if !inst.is_anchor(v.poi) {
                pois_visited += 1;
            }
            if pos + 1 < it.visits.len() {
                let to = it.visits[pos + 1].poi;
                match v.mode {
                    Mode::Walk => walk_minutes += inst.walk_minutes(v.poi, to),
                    Mode::Drive => {
                        let pivot = it.pivot_poi(pos);
                        walk_minutes += inst.walk_minutes(v.poi, pivot);
                        drive_minutes += inst.drive_minutes(pivot, to);
                    }
                }
            }
        }
    }
    let budget = inst.days as f64 * inst.c_max;
    let share = |x: f64| {
        if budget > 0.0 {
            100.0 * x / budget
        } else {
            0.0
        }
    };
    Metrics {
        score: sol.total_score,
        violations: sol.violations(),
        pois_visited,
        visit_minutes,
        wait_minutes,
        walk_minutes,
        drive_minutes,
        visit_share: share(visit_minutes),
        wait_share: share(wait_minutes),
        walk_share: share(walk_minutes),
        drive_share: share(drive_minutes),
    }
}

/// Reproducibility sidecar for one solve run. Timestamps and timings make
/// this file run-specific; the solution file itself stays deterministic.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub instance_path: String,
    pub instance_sha256: Option<String>,
    pub days: usize,
    pub max_iter: usize,
    pub time_limit_secs: f64,
    pub radius_km: Option<f64>,
    pub clustering: bool,
    pub solver_version: String,
    pub started_unix_secs: f64,
    pub elapsed_secs: f64,
    pub iterations: usize,
    pub improvements: usize,
    pub no_improve_streak: usize,
    pub total_score: f64,
    pub violations: usize,
}

pub fn manifest_for(
    instance_path: &Path,
    inst: &Instance,
    cfg: &SolveConfig,
    outcome: &SolveOutcome,
    started_unix_secs: f64,
) -> RunManifest {
    let hash = std::fs::read(instance_path)
        .ok()
        .map(|bytes| format!("{:x}", Sha256::digest(&bytes)));
    RunManifest {
        instance_path: instance_path.display().to_string(),
        instance_sha256: hash,
        days: inst.days,
        max_iter: cfg.max_iter,
        time_limit_secs: cfg.time_limit_secs,
        radius_km: cfg.radius_km,
        clustering: cfg.clusters.is_some(),
        solver_version: env!("CARGO_PKG_VERSION").to_string(),
        started_unix_secs,
        elapsed_secs: outcome.elapsed_secs,
        iterations: outcome.iterations,
        improvements: outcome.improvements,
        no_improve_streak: outcome.no_improve_streak,
        total_score: outcome.solution.total_score,
        violations: outcome.solution.violations(),
    }
}

/// One benchmark grid cell.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRecord {
    pub instance: String,
    pub days: usize,
    pub radius_km: Option<f64>,
    pub clustering: bool,
    /// Candidate PoIs within the radius (expanded time windows).
    pub candidates: usize,
    pub score: f64,
    /// Gap to the best score over all cells with the same instance and
    /// day count, in percent.
    pub dev_percent: f64,
    pub time_secs: f64,
    pub visits: usize,
    pub iterations: usize,
    pub final_streak: usize,
    pub improvements: usize,
    pub violations: usize,
    pub drive_share: f64,
    pub walk_share: f64,
    pub visit_share: f64,
    pub wait_share: f64,
}

/// Fills `dev_percent` in place: each record is compared to the best score
/// among records sharing (instance, days).
pub fn compute_deviations(records: &mut [BenchRecord]) {
    let mut best: HashMap<(String, usize), f64> = HashMap::new();
    for r in records.iter() {
        let key = (r.instance.clone(), r.days);
        let entry = best.entry(key).or_insert(f64::NEG_INFINITY);
        *entry = entry.max(r.score);
    }
    for r in records.iter_mut() {
        let b = best[&(r.instance.clone(), r.days)];
        r.dev_percent = if b > 0.0 {
            100.0 * (b - r.score) / b
        } else {
            0.0
        };
    }
}

pub fn write_bench_csv(path: &Path, records: &[BenchRecord]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn bench_markdown(records: &[BenchRecord]) -> String {
    let mut out = String::from(
        "| instance | m | r (km) | clustering | PoIs | score | DEV % | time (s) | |S| | IT | IT_f | SOL | T^d % | T^w % | T % | W % |\n\
         |---|---|---|---|---|---|---|---|---|---|---|---|---|---|---|---|\n",
    );
    for r in records {
        let radius = r.radius_km.map_or("inf".to_string(), |v| format!("{v:.0}"));
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} | {:.1} | {:.2} | {:.2} | {} | {} | {} | {} | {:.1} | {:.1} | {:.1} | {:.1} |\n",
            r.instance,
            r.days,
            radius,
            if r.clustering { "on" } else { "off" },
            r.candidates,
            r.score,
            r.dev_percent,
            r.time_secs,
            r.visits,
            r.iterations,
            r.final_streak,
            r.improvements,
            r.drive_share,
            r.walk_share,
            r.visit_share,
            r.wait_share,
        ));
    }
    out
}
