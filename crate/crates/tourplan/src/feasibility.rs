//! Constant-time insertion feasibility.
//!
//! Inserting a PoI `j` between consecutive visits `i` and `k` is judged
//! without touching anything beyond a fixed handful of visit records. The
//! check classifies the insertion by how it reshapes pedestrian subtours:
//!
//! * **Basic** — the pivots of every later drive leg are unchanged, so the
//!   whole effect is one arrival shift at `k` bounded by `k`'s accumulated
//!   wait-plus-slack.
//! * **Advanced** — `k` sits in a subtour whose parked-car pivot changes.
//!   The shift is bounded inside the subtour via the subtour-scoped slack,
//!   and the drive leg leaving the subtour's last member `q` is re-priced
//!   with the new pivot, producing a second shift for everything after `q`.
//! * **Special** — `k` is not in a subtour but becomes walk-connected to
//!   `j`, forming a fresh subtour ending at `k`; like Advanced with `q = k`.
//!
//! All visit-record accesses inside this module run through an instrumented
//! accessor backed by a thread-local counter, so tests can assert the O(1)
//! contract directly: the number of reads per check does not grow with
//! itinerary length.

use std::cell::Cell;

use crate::instance::{Instance, PoiIdx};
use crate::schedule::{time_leq, travel_time, Itinerary, Mode, Visit};

thread_local! {
    static VISIT_READS: Cell<u64> = const { Cell::new(0) };
}

/// Resets the thread-local visit-read counter.
pub fn reset_visit_reads() {
    VISIT_READS.with(|c| c.set(0));
}

/// Number of visit records read by this thread since the last reset.
pub fn visit_reads() -> u64 {
    VISIT_READS.with(|c| c.get())
}

/// The single gate through which this module touches visit records.
#[inline]
fn v(it: &Itinerary, pos: usize) -> &Visit {
    VISIT_READS.with(|c| c.set(c.get() + 1));
    &it.visits[pos]
}

/// A candidate move: insert `poi` into itinerary `day` directly before the
/// visit currently at `position` (so between `position - 1` and `position`),
/// arriving by `mode_in` and leaving by `mode_out`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Candidate {
    pub day: usize,
    pub position: usize,
    pub poi: PoiIdx,
    pub mode_in: Mode,
    pub mode_out: Mode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertionKind {
    Basic,
    Advanced,
    Special,
}

/// Outcome of a constant-time insertion check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub kind: InsertionKind,
    /// Arrival delay imposed on `k` by routing through `j`.
    pub shift_j: f64,
    /// Start-time change of the subtour's last member `q` (zero for Basic).
    pub delta_k: f64,
    /// Arrival delay imposed on `q`'s successor by the re-priced drive leg
    /// (zero for Basic; equals `delta_k` when `q` has no successor).
    pub shift_q: f64,
    /// Total extra time the insertion consumes: `shift_j + shift_q`.
    pub combined_shift: f64,
    /// Mode-preference violations on the arcs this insertion creates.
    pub new_violations: usize,
    /// Net change of the itinerary's violation count (new arcs minus
    /// replaced arcs). Never positive for feasible insertions.
    pub violation_delta: i64,
    pub feasible: bool,
    /// Position of `q` before the insertion (`None` for Basic).
    pub q_pos: Option<usize>,
    /// Parked-car pivot of the re-priced `q -> successor` drive leg
    /// (`None` for Basic).
    pub new_pivot: Option<PoiIdx>,
}

/// Classifies an insertion from the replaced arc's mode, whether `k` lies in
/// a subtour, and the two new arc modes.
///
/// Panics on the structurally impossible combination of a walk arc into a
/// visit outside any subtour: walk-connected visits always share a subtour.
pub fn classify(mode_ik: Mode, k_in_subtour: bool, mode_in: Mode, mode_out: Mode) -> InsertionKind {
    if mode_ik == Mode::Walk && !k_in_subtour {
        unreachable!("walk arc into a visit outside any subtour: encoding is corrupt");
    }
    if mode_ik == mode_out && (mode_out == Mode::Drive || mode_in == Mode::Walk) {
        InsertionKind::Basic
    } else if k_in_subtour {
        InsertionKind::Advanced
    } else {
        InsertionKind::Special
    }
}

/// Decides in O(1) whether `cand` can be inserted without breaking any time
/// window, the daily budget, or increasing mode-preference violations, and
/// prices the move. Reads a bounded number of visit records regardless of
/// itinerary length.
///
/// New arcs are priced with hard preference checking: a violating component
/// costs [`BIG_M`](crate::schedule::BIG_M) minutes and is therefore rejected
/// by the same window arithmetic that rejects ordinary lateness. Replaced
/// arcs contribute their *actual* stored durations, so pre-existing
/// violations neither mask nor inflate the price of the move.
pub fn check_insertion(inst: &Instance, it: &Itinerary, cand: &Candidate) -> Evaluation {
    debug_assert!(cand.position >= 1 && cand.position < it.visits.len());
    let i = v(it, cand.position - 1);
    let k = v(it, cand.position);
    let j = cand.poi;
    let poi_i = inst.poi(i.poi);
    let poi_j = inst.poi(j);
    let poi_k = inst.poi(k.poi);

    // Where the car is parked while the tourist stands at `i`.
    let pivot_i = match i.subtour {
        Some(h) => v(it, it.subtours[h].first).poi,
        None => i.poi,
    };
    // Where it is parked once the tourist stands at `j`.
    let car_at_j = match cand.mode_in {
        Mode::Drive => j,
        Mode::Walk => pivot_i,
    };

    let leg_ij = travel_time(inst, i.poi, j, cand.mode_in, true, Some(pivot_i));
    let leg_jk = travel_time(inst, j, k.poi, cand.mode_out, true, Some(car_at_j));

    // The replaced arc's actual duration, recovered from stored times.
    let t_ik = k.arrival - i.start - poi_i.duration;

    let arrival_j = i.start + poi_i.duration + leg_ij.minutes;
    let wait_j = (poi_j.open - arrival_j).max(0.0);
    let start_j = arrival_j.max(poi_j.open);
    let shift_j = leg_ij.minutes + wait_j + poi_j.duration + leg_jk.minutes - t_ik;
    let window_j_ok = time_leq(start_j, poi_j.close);

    let kind = classify(i.mode, k.subtour.is_some(), cand.mode_in, cand.mode_out);
    let mut new_violations = (leg_ij.violated as usize) + (leg_jk.violated as usize);
    // The i -> k arc disappears in every case.
    let mut violation_delta = new_violations as i64 - i.violated as i64;

    match kind {
        InsertionKind::Basic => {
            let feasible = window_j_ok && time_leq(shift_j, k.wait + k.max_shift);
            Evaluation {
                kind,
                shift_j,
                delta_k: 0.0,
                shift_q: 0.0,
                combined_shift: shift_j,
                new_violations,
                violation_delta,
                feasible,
                q_pos: None,
                new_pivot: None,
            }
        }
        InsertionKind::Advanced | InsertionKind::Special => {
            // Last member of the subtour that absorbs the shift, and the
            // first visit reached by car after it.
            let (q_pos, shift_bound, delta_k) = match kind {
                InsertionKind::Advanced => {
                    let q_pos = it.subtours[k.subtour.unwrap()].last;
                    let delta_k = if shift_j >= 0.0 {
                        (shift_j - k.sub_wait).max(0.0)
                    } else {
                        -(k.max_decrease.min(-shift_j))
                    };
                    (q_pos, k.wait + k.sub_max_shift, delta_k)
                }
                InsertionKind::Special => {
                    // `k` becomes the last member of a brand-new subtour, so
                    // the subtour-scoped slack degenerates to its own window.
                    let delta_k = if shift_j >= 0.0 {
                        (shift_j - k.wait).max(0.0)
                    } else {
                        -(((k.arrival - poi_k.open).max(0.0)).min(-shift_j))
                    };
                    (cand.position, k.wait + (poi_k.close - k.start), delta_k)
                }
                InsertionKind::Basic => unreachable!(),
            };

            // Pivot of the re-priced drive leg out of `q` after insertion.
            let new_pivot = match cand.mode_out {
                Mode::Drive => k.poi,
                Mode::Walk => car_at_j,
            };

            let q = if q_pos == cand.position {
                k
            } else {
                v(it, q_pos)
            };
            let (shift_q, leg_qb_violated, old_qb_violated) = if q_pos + 1 < it.visits.len() {
                let b = v(it, q_pos + 1);
                let leg_qb = travel_time(inst, q.poi, b.poi, Mode::Drive, true, Some(new_pivot));
                let t_qb = b.arrival - q.start - inst.poi(q.poi).duration;
                (leg_qb.minutes + delta_k - t_qb, leg_qb.violated, q.violated)
            } else {
                // `q` is the itinerary's last visit: no downstream arc, the
                // whole tail effect is the start-time change of `q` itself.
                (delta_k, false, false)
            };

            new_violations += leg_qb_violated as usize;
            violation_delta += leg_qb_violated as i64 - old_qb_violated as i64;

            let downstream_ok = if q_pos + 1 < it.visits.len() {
                let b = v(it, q_pos + 1);
                time_leq(shift_q, b.wait + b.max_shift)
            } else {
                true
            };
            let feasible = window_j_ok && time_leq(shift_j, shift_bound) && downstream_ok;

            Evaluation {
                kind,
                shift_j,
                delta_k,
                shift_q,
                combined_shift: shift_j + shift_q,
                new_violations,
                violation_delta,
                feasible,
                q_pos: Some(q_pos),
                new_pivot: Some(new_pivot),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{InstanceFile, MobilityFile, PoiEntry};

    #[test]
    fn classification_covers_every_arc_and_subtour_combination() {
        use InsertionKind::*;
        use Mode::*;
        // (replaced arc mode, k in subtour, mode_in, mode_out) -> kind
        let table = [
            // Walk arc into k: i and k share a subtour.
            ((Walk, true, Walk, Walk), Basic),
            ((Walk, true, Walk, Drive), Advanced),
            ((Walk, true, Drive, Walk), Advanced),
            ((Walk, true, Drive, Drive), Advanced),
            // Drive arc into a subtour head.
            ((Drive, true, Walk, Walk), Advanced),
            ((Drive, true, Walk, Drive), Basic),
            ((Drive, true, Drive, Walk), Advanced),
            ((Drive, true, Drive, Drive), Basic),
            // Drive arc into a visit outside subtours.
            ((Drive, false, Walk, Walk), Special),
            ((Drive, false, Walk, Drive), Basic),
            ((Drive, false, Drive, Walk), Special),
            ((Drive, false, Drive, Drive), Basic),
        ];
        for ((ik, sub, min, mout), want) in table {
            assert_eq!(
                classify(ik, sub, min, mout),
                want,
                "{ik:?} {sub} {min:?} {mout:?}"
            );
        }
    }

    #[test]
    #[should_panic(expected = "encoding is corrupt")]
    fn walk_arc_without_subtour_is_rejected() {
        classify(Mode::Walk, false, Mode::Walk, Mode::Walk);
    }

    /// Line of PoIs where both matrices are multiples of the step distance.
    fn line_instance() -> Instance {
        let entry = |id: u64, open: f64, close: f64, dur: f64| PoiEntry {
            id,
            group_id: None,
            lat: 0.0,
            lon: id as f64 * 0.01,
            score: 10.0,
            visit_minutes: dur,
            windows: vec![[open, close]],
            days: None,
        };
        let step = |a: usize, b: usize, per: f64| (a as f64 - b as f64).abs() * per;
        InstanceFile {
            pois: vec![
                entry(0, 0.0, 0.0, 0.0),
                entry(1, 0.0, 500.0, 10.0),
                entry(2, 0.0, 500.0, 10.0),
                entry(3, 0.0, 500.0, 10.0),
            ],
            walk_minutes: (0..4)
                .map(|a| (0..4).map(|b| step(a, b, 12.0)).collect())
                .collect(),
            drive_minutes: (0..4)
                .map(|a| (0..4).map(|b| step(a, b, 3.0)).collect())
                .collect(),
            mobility: MobilityFile {
                max_walking_time: 15.0,
                min_driving_time: 1.0,
                pickup_time: 1.0,
                parking_time: 1.0,
            },
            c_max: 600.0,
            days: 1,
            start_index: 0,
            metric: true,
        }
        .into_instance()
        .unwrap()
    }

    #[test]
    fn basic_insertion_prices_the_detour_exactly() {
        let inst = line_instance();
        let (p1, p2, p3) = (0, 1, 2);
        let s = inst.start_poi;
        let e = inst.end_poi;
        // s -D-> p1 -D-> p3 -D-> e, all drive-preferred? walk(1 step)=12<=15,
        // folded drive(1 step)=5: tie walking loses (12 > 5)... walk wins only
        // when <= drive, here 12 > 5 so Drive is preferred on every arc.
        let it = Itinerary::from_sequence(
            &inst,
            &[s, p1, p3, e],
            &[Mode::Drive, Mode::Drive, Mode::Drive],
        );
        assert_eq!(it.violation_count, 0);
        // Insert p2 between p1 and p3 by car: Basic (Drive == Drive).
        let cand = Candidate {
            day: 0,
            position: 2,
            poi: p2,
            mode_in: Mode::Drive,
            mode_out: Mode::Drive,
        };
        reset_visit_reads();
        let eval = check_insertion(&inst, &it, &cand);
        assert!(visit_reads() <= 8, "O(1) contract: read {}", visit_reads());
        assert_eq!(eval.kind, InsertionKind::Basic);
        // Replaced drive 3*2+2=8; new legs 5 each; visit 10: shift 12.
        assert_eq!(eval.shift_j, 5.0 + 10.0 + 5.0 - 8.0);
        assert_eq!(eval.combined_shift, eval.shift_j);
        assert!(eval.feasible);
        assert_eq!(eval.new_violations, 0);
    }

    #[test]
    fn drive_legs_out_of_subtours_walk_back_to_the_pivot() {
        let inst = line_instance();
        let (p1, p2, p3) = (0, 1, 2);
        let s = inst.start_poi;
        let e = inst.end_poi;
        // Walk preference needs a shorter step: rebuild with 4-min walks.
        // Here instead force modes and only inspect pricing of a checked
        // insertion whose new arcs are clean: insert p2 after the subtour
        // {p1, p3}? Simpler: tour s -D-> p1 -W-> p2 -D-> e with the walk
        // violating preference (12 > 5): the stored times stay real, and a
        // checked insertion between p2 and e must use them.
        let it = Itinerary::from_sequence(
            &inst,
            &[s, p1, p2, e],
            &[Mode::Drive, Mode::Walk, Mode::Drive],
        );
        assert_eq!(
            it.violation_count, 2,
            "walk arc and its walk-back both break preference"
        );
        // Insert p3 between p2 and e by (Drive, Drive): Basic. The i -> j leg
        // drives from the pivot p1: walk back 12 (violating, priced M under
        // check) — so the candidate must be infeasible, proving the pivot
        // walk-back is part of the check.
        let cand = Candidate {
            day: 0,
            position: 3,
            poi: p3,
            mode_in: Mode::Drive,
            mode_out: Mode::Drive,
        };
        let eval = check_insertion(&inst, &it, &cand);
        assert!(!eval.feasible);
        assert!(eval.shift_j > 1e6, "violating walk-back must price at M");
        assert!(eval.new_violations > 0);
    }

    /// Six locations on a line, one step = 4 min walking / 6 min driving
    /// (no transfer overhead). One step prefers walking, two or more drive.
    fn subtour_instance() -> Instance {
        let entry = |id: u64| PoiEntry {
            id,
            group_id: None,
            lat: 0.0,
            lon: id as f64 * 0.01,
            score: 10.0,
            visit_minutes: if id == 0 { 0.0 } else { 10.0 },
            windows: vec![[0.0, if id == 0 { 0.0 } else { 500.0 }]],
            days: None,
        };
        let step = |a: usize, b: usize, per: f64| (a as f64 - b as f64).abs() * per;
        InstanceFile {
            pois: (0..6).map(entry).collect(),
            walk_minutes: (0..6)
                .map(|a| (0..6).map(|b| step(a, b, 4.0)).collect())
                .collect(),
            drive_minutes: (0..6)
                .map(|a| (0..6).map(|b| step(a, b, 6.0)).collect())
                .collect(),
            mobility: MobilityFile {
                max_walking_time: 5.0,
                min_driving_time: 1.0,
                pickup_time: 0.0,
                parking_time: 0.0,
            },
            c_max: 600.0,
            days: 1,
            start_index: 0,
            metric: true,
        }
        .into_instance()
        .unwrap()
    }

    #[test]
    fn advanced_insertion_splits_the_subtour_and_reprices_the_exit_leg() {
        let inst = subtour_instance();
        // Candidate PoI indices: entry id i at loc i -> poi index i - 1.
        let (p2, p3, p5) = (1, 2, 4);
        let s = inst.start_poi;
        let e = inst.end_poi;
        // s -D-> p2 -W-> p3 -D-> e: subtour {p2, p3} with pivot p2; the exit
        // leg walks back 4 then drives 12; every arc is preference-clean.
        let it = Itinerary::from_sequence(
            &inst,
            &[s, p2, p3, e],
            &[Mode::Drive, Mode::Walk, Mode::Drive],
        );
        assert_eq!(it.violation_count, 0);
        assert_eq!(it.subtours.len(), 1);
        assert_eq!(it.visits[3].arrival, 52.0);

        // Splitting the subtour: insert far-away p5 between p2 and p3 by
        // car. The replaced arc is a walk, so k = p3 keeps its subtour but
        // its pivot changes — Advanced with q = k and a re-priced exit leg.
        let cand = Candidate {
            day: 0,
            position: 2,
            poi: p5,
            mode_in: Mode::Drive,
            mode_out: Mode::Drive,
        };
        let eval = check_insertion(&inst, &it, &cand);
        assert_eq!(eval.kind, InsertionKind::Advanced);
        assert!(eval.feasible);
        // New legs 18 and 12, visit 10, replaced walk 4: shift at k = 36.
        assert_eq!(eval.shift_j, 36.0);
        // k is its subtour's last member with no wait: the full shift
        // reaches its start time.
        assert_eq!(eval.delta_k, 36.0);
        // Exit leg now starts from a car parked at p3 itself: 18 instead of
        // the old 16, plus the start-time change.
        assert_eq!(eval.new_pivot, Some(p3));
        assert_eq!(eval.shift_q, 18.0 + 36.0 - 16.0);
        assert_eq!(eval.combined_shift, 36.0 + 38.0);
        assert_eq!(eval.new_violations, 0);

        // Cross-check both shifts against the rebuilt schedule.
        let spliced = Itinerary::from_sequence(
            &inst,
            &[s, p2, p5, p3, e],
            &[Mode::Drive, Mode::Drive, Mode::Drive, Mode::Drive],
        );
        assert_eq!(
            spliced.visits[3].arrival - it.visits[2].arrival,
            eval.shift_j
        );
        assert_eq!(
            spliced.visits[4].arrival - it.visits[3].arrival,
            eval.shift_q
        );

        // A one-step walk insertion whose second leg walks two steps: the
        // long walk violates preference and prices at M under checking.
        let cand = Candidate {
            day: 0,
            position: 2,
            poi: 0, // p1 at loc 1
            mode_in: Mode::Walk,
            mode_out: Mode::Walk,
        };
        let eval = check_insertion(&inst, &it, &cand);
        // Walk arc replaced by walks with both ends in the same subtour:
        // pivots never change, hence Basic — but infeasible via M.
        assert_eq!(eval.kind, InsertionKind::Basic);
        assert!(!eval.feasible);
        assert!(eval.shift_j > 1e6);
        assert!(eval.new_violations > 0);
    }

    #[test]
    fn read_count_is_independent_of_itinerary_length() {
        let inst = line_instance();
        let s = inst.start_poi;
        let e = inst.end_poi;
        let short = Itinerary::from_sequence(
            &inst,
            &[s, 0, 2, e],
            &[Mode::Drive, Mode::Drive, Mode::Drive],
        );
        // A longer tour cycling the same three candidates (re-visits are not
        // legal moves, but the encoding doesn't care — perfect for measuring).
        let mut pois = vec![s];
        let mut modes = Vec::new();
        for r in 0..30 {
            pois.push(r % 3);
            modes.push(Mode::Drive);
        }
        pois.push(e);
        modes.push(Mode::Drive);
        let long = Itinerary::from_sequence(&inst, &pois, &modes);

        let cand = |position| Candidate {
            day: 0,
            position,
            poi: 1,
            mode_in: Mode::Drive,
            mode_out: Mode::Drive,
        };
        reset_visit_reads();
        check_insertion(&inst, &short, &cand(2));
        let short_reads = visit_reads();
        reset_visit_reads();
        check_insertion(&inst, &long, &cand(17));
        let long_reads = visit_reads();
        assert_eq!(short_reads, long_reads);
        assert!(long_reads <= 8);
    }
}
