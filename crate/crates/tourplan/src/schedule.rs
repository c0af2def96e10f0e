//! Annotated itinerary encoding: visits, subtours, travel times and the
//! full recompute pass.
//!
//! Each daily itinerary is a sequence of [`Visit`]s from a start anchor to an
//! end anchor. Consecutive visits are connected by a transport mode; maximal
//! runs of `Walk` arcs form *pedestrian subtours*: the car stays parked at the
//! subtour's first PoI (the *pivot*), and a `Drive` arc leaving a subtour
//! member first walks back to the pivot before driving on.
//!
//! Besides arrival/start times every visit carries slack annotations
//! (`wait`, `max_shift`, and the subtour-scoped `sub_wait`, `sub_max_shift`,
//! `max_decrease`) that let insertion feasibility be decided in constant
//! time. [`Itinerary::recompute_schedule`] derives all of them from scratch
//! in O(n); the incremental updates in the search module must always agree
//! with it.

use serde::{Deserialize, Serialize};

use crate::instance::{Instance, PoiIdx};

/// Sentinel travel time for a leg that breaks a mode preference while hard
/// checking is on: large enough that any downstream time window rejects it,
/// yet finite so the arithmetic around it stays exact.
pub const BIG_M: f64 = 1e7;

/// Slack for time comparisons, absorbing float noise on non-integer
/// instances. Every feasibility decision and audit uses the same epsilon so
/// the constant-time checks and the full recompute can never disagree.
pub const TIME_EPS: f64 = 1e-9;

/// `a <= b` up to [`TIME_EPS`].
#[inline]
pub fn time_leq(a: f64, b: f64) -> bool {
    a <= b + TIME_EPS
}

/// Transport mode of one arc between consecutive visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Walk,
    Drive,
}

/// The mode a tourist prefers between two PoIs: drive when the walk is too
/// long, walk when the drive is trivially short, otherwise whichever is
/// quicker. Degenerate same-location pairs come out as `Walk`.
pub fn preferred_mode(inst: &Instance, from: PoiIdx, to: PoiIdx) -> Mode {
    let tw = inst.walk_minutes(from, to);
    let td = inst.drive_minutes(from, to);
    if tw > inst.mobility.max_walking {
        Mode::Drive
    } else if td <= inst.mobility.min_driving || tw <= td {
        Mode::Walk
    } else {
        Mode::Drive
    }
}

/// Travel time of one arc plus whether it violates mode preferences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Leg {
    pub minutes: f64,
    pub violated: bool,
}

/// Computes the travel time from `i` to `k` under a prescribed `mode`.
///
/// For a `Drive` arc, `pivot` is where the car is parked: the first PoI of
/// `i`'s subtour, or `i` itself when `i` is not in a subtour. The leg then
/// walks `i -> pivot` and drives `pivot -> k`. For `Walk` arcs `pivot` is
/// ignored (pass `None`).
///
/// A leg violates preferences when walking is prescribed where driving is
/// preferred, or (for drive arcs) when either component disagrees: the
/// walk-back `i -> pivot` must itself be walk-preferred and the drive
/// `pivot -> k` drive-preferred. With `check` set, each violating component
/// prices at [`BIG_M`] instead of its true duration, so the caller's time
/// window arithmetic rejects it; without `check` the true time is returned
/// and the violation is merely flagged.
pub fn travel_time(
    inst: &Instance,
    i: PoiIdx,
    k: PoiIdx,
    mode: Mode,
    check: bool,
    pivot: Option<PoiIdx>,
) -> Leg {
    match mode {
        Mode::Walk => {
            let violated = preferred_mode(inst, i, k) != Mode::Walk;
            let minutes = if check && violated {
                BIG_M
            } else {
                inst.walk_minutes(i, k)
            };
            Leg { minutes, violated }
        }
        Mode::Drive => {
            let p = pivot.expect("drive arcs need the parked-car pivot");
            let back_violated = preferred_mode(inst, i, p) != Mode::Walk;
            let drive_violated = preferred_mode(inst, p, k) != Mode::Drive;
            let tw = if check && back_violated {
                BIG_M
            } else {
                inst.walk_minutes(i, p)
            };
            let td = if check && drive_violated {
                BIG_M
            } else {
                inst.drive_minutes(p, k)
            };
            Leg {
                minutes: tw + td,
                violated: back_violated || drive_violated,
            }
        }
    }
}

/// One scheduled visit with its slack annotations.
#[derive(Debug, Clone, PartialEq)]
pub struct Visit {
    pub poi: PoiIdx,
    /// Mode of the outbound arc to the successor. The last visit of an
    /// itinerary has no successor; its value is meaningless there.
    pub mode: Mode,
    /// Whether the outbound arc violates the tourist's mode preference.
    pub violated: bool,
    /// Index into [`Itinerary::subtours`], or `None` when this visit is not
    /// part of any pedestrian subtour.
    pub subtour: Option<usize>,
    /// Arrival time in minutes from the start of the day.
    pub arrival: f64,
    /// Start of the visit: `max(arrival, open)`.
    pub start: f64,
    /// Waiting time before opening: `max(0, open - arrival)`.
    pub wait: f64,
    /// Largest delay of `start` that keeps every later visit feasible.
    pub max_shift: f64,
    /// Waits summed from here to the end of the own subtour (own included);
    /// zero outside subtours.
    pub sub_wait: f64,
    /// Like `max_shift` but scoped to the own subtour's windows only; zero
    /// outside subtours.
    pub sub_max_shift: f64,
    /// Largest arrival decrease this visit can propagate to the end of its
    /// subtour; zero outside subtours.
    pub max_decrease: f64,
}

/// A maximal run of walk-connected visits, stored as a position span.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Subtour {
    /// Position of the first member (the pivot where the car is parked).
    pub first: usize,
    /// Position of the last member; its outbound arc (if any) is a drive.
    pub last: usize,
}

/// One day's schedule, start anchor to end anchor.
#[derive(Debug, Clone, PartialEq)]
pub struct Itinerary {
    pub visits: Vec<Visit>,
    /// Registered subtours in visiting order.
    pub subtours: Vec<Subtour>,
    /// Number of arcs whose prescribed mode violates preferences.
    pub violation_count: usize,
}

/// A schedule constraint found by [`Itinerary::recompute_schedule`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScheduleError {
    #[error("visit at position {position} starts at {start} after closing time {close}")]
    WindowViolated {
        position: usize,
        start: f64,
        close: f64,
    },
    #[error("itinerary lasts {duration} min, over the {c_max} min budget")]
    BudgetExceeded { duration: f64, c_max: f64 },
}

impl Itinerary {
    /// Fresh itinerary containing only the two anchors, scheduled.
    pub fn empty(inst: &Instance) -> Self {
        let mode = preferred_mode(inst, inst.start_poi, inst.end_poi);
        let mut it = Itinerary::from_sequence(inst, &[inst.start_poi, inst.end_poi], &[mode]);
        it.recompute_schedule(inst)
            .expect("anchor-only itinerary is always feasible");
        it
    }

    /// Builds an itinerary from an ordered PoI sequence (anchors included)
    /// and one mode per arc, fully annotated. Panics if lengths mismatch.
    pub fn from_sequence(inst: &Instance, pois: &[PoiIdx], modes: &[Mode]) -> Self {
        assert_eq!(
            pois.len(),
            modes.len() + 1,
            "need exactly one mode per consecutive pair"
        );
        let visits = pois
            .iter()
            .enumerate()
            .map(|(pos, &poi)| Visit {
                poi,
                mode: modes.get(pos).copied().unwrap_or(Mode::Drive),
                violated: false,
                subtour: None,
                arrival: 0.0,
                start: 0.0,
                wait: 0.0,
                max_shift: 0.0,
                sub_wait: 0.0,
                sub_max_shift: 0.0,
                max_decrease: 0.0,
            })
            .collect();
        let mut it = Itinerary {
            visits,
            subtours: Vec::new(),
            violation_count: 0,
        };
        let _ = it.recompute_schedule(inst);
        it
    }

    pub fn is_empty_tour(&self) -> bool {
        self.visits.len() == 2
    }

    /// Number of candidate visits (everything between the anchors).
    pub fn candidate_count(&self) -> usize {
        self.visits.len() - 2
    }

    /// Start time of the end anchor — total itinerary duration.
    pub fn duration(&self) -> f64 {
        self.visits.last().map_or(0.0, |v| v.start)
    }

    pub fn score(&self, inst: &Instance) -> f64 {
        self.visits.iter().map(|v| inst.poi(v.poi).score).sum()
    }

    /// The PoI where the car is parked for a drive leaving position `pos`:
    /// the pivot of `pos`'s subtour, or the visit's own PoI.
    pub fn pivot_poi(&self, pos: usize) -> PoiIdx {
        match self.visits[pos].subtour {
            Some(h) => self.visits[self.subtours[h].first].poi,
            None => self.visits[pos].poi,
        }
    }

    /// Rescans arcs and rebuilds the subtour registry: every maximal run of
    /// consecutive `Walk` arcs spans one subtour of two or more visits.
    pub fn rebuild_subtours(&mut self) {
        self.subtours.clear();
        for v in &mut self.visits {
            v.subtour = None;
        }
        let n = self.visits.len();
        let mut arc = 0;
        while arc + 1 < n {
            if self.visits[arc].mode != Mode::Walk {
                arc += 1;
                continue;
            }
            let first = arc;
            while arc + 1 < n && self.visits[arc].mode == Mode::Walk {
                arc += 1;
            }
            let h = self.subtours.len();
            self.subtours.push(Subtour { first, last: arc });
            for v in &mut self.visits[first..=arc] {
                v.subtour = Some(h);
            }
        }
    }

    /// Recomputes every annotation from scratch (the O(n) reference pass):
    /// subtour registry, arrivals and waits forward, then `max_shift` and the
    /// subtour-scoped slacks backward. Returns the first hard-constraint
    /// breach, if any; annotations are filled either way.
    pub fn recompute_schedule(&mut self, inst: &Instance) -> Result<(), ScheduleError> {
        self.rebuild_subtours();
        let n = self.visits.len();

        // Forward: arrivals, starts, waits, violation flags.
        self.visits[0].arrival = 0.0;
        let first_open = inst.poi(self.visits[0].poi).open;
        self.visits[0].start = first_open.max(0.0);
        self.visits[0].wait = (first_open - 0.0).max(0.0);
        self.violation_count = 0;
        for pos in 0..n - 1 {
            let mode = self.visits[pos].mode;
            let pivot = match mode {
                Mode::Drive => Some(self.pivot_poi(pos)),
                Mode::Walk => None,
            };
            let leg = travel_time(
                inst,
                self.visits[pos].poi,
                self.visits[pos + 1].poi,
                mode,
                false,
                pivot,
            );
            self.visits[pos].violated = leg.violated;
            self.violation_count += leg.violated as usize;
            let depart = self.visits[pos].start + inst.poi(self.visits[pos].poi).duration;
            let arrival = depart + leg.minutes;
            let open = inst.poi(self.visits[pos + 1].poi).open;
            self.visits[pos + 1].arrival = arrival;
            self.visits[pos + 1].start = arrival.max(open);
            self.visits[pos + 1].wait = (open - arrival).max(0.0);
        }
        self.visits[n - 1].violated = false;
        self.recompute_slacks_to_start(inst, n - 1);

        // Hard-constraint audit.
        self.audit(inst)
    }

    /// Recomputes `max_shift` and the subtour-scoped slacks for positions
    /// `from` down to the start. Arrivals, waits and the subtour registry
    /// must already be correct, and everything after `from` untouched by the
    /// triggering change, since position `from` seeds from `from + 1`'s
    /// stored values. Incremental moves call this from the position where
    /// their forward shift petered out.
    pub fn recompute_slacks_to_start(&mut self, inst: &Instance, from: usize) {
        let n = self.visits.len();
        for pos in (0..=from).rev() {
            let poi = inst.poi(self.visits[pos].poi);
            let own_slack = poi.close - self.visits[pos].start;
            self.visits[pos].max_shift = if pos + 1 == n {
                own_slack
            } else {
                own_slack.min(self.visits[pos + 1].wait + self.visits[pos + 1].max_shift)
            };
            match self.visits[pos].subtour {
                None => {
                    self.visits[pos].sub_wait = 0.0;
                    self.visits[pos].sub_max_shift = 0.0;
                    self.visits[pos].max_decrease = 0.0;
                }
                Some(h) => {
                    let own_decrease = (self.visits[pos].arrival - poi.open).max(0.0);
                    if pos == self.subtours[h].last {
                        self.visits[pos].sub_wait = self.visits[pos].wait;
                        self.visits[pos].sub_max_shift = own_slack;
                        self.visits[pos].max_decrease = own_decrease;
                    } else {
                        let next_wait = self.visits[pos + 1].wait;
                        let next_sms = self.visits[pos + 1].sub_max_shift;
                        let next_sw = self.visits[pos + 1].sub_wait;
                        let next_me = self.visits[pos + 1].max_decrease;
                        self.visits[pos].sub_wait = self.visits[pos].wait + next_sw;
                        self.visits[pos].sub_max_shift = own_slack.min(next_wait + next_sms);
                        self.visits[pos].max_decrease = next_me.min(own_decrease);
                    }
                }
            }
        }
    }

    /// Checks every hard constraint on the (already annotated) schedule.
    pub fn audit(&self, inst: &Instance) -> Result<(), ScheduleError> {
        for (pos, v) in self.visits.iter().enumerate() {
            let close = inst.poi(v.poi).close;
            if !time_leq(v.start, close) {
                return Err(ScheduleError::WindowViolated {
                    position: pos,
                    start: v.start,
                    close,
                });
            }
        }
        let duration = self.duration();
        if !time_leq(duration, inst.c_max) {
            return Err(ScheduleError::BudgetExceeded {
                duration,
                c_max: inst.c_max,
            });
        }
        Ok(())
    }
}

/// A full multi-day plan.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub itineraries: Vec<Itinerary>,
    /// One flag per PoI group: set when some window of the group is routed.
    pub routed_groups: Vec<bool>,
    pub total_score: f64,
}

impl Solution {
    /// Empty plan: one anchor-only itinerary per day.
    pub fn empty(inst: &Instance) -> Self {
        Solution {
            itineraries: (0..inst.days).map(|_| Itinerary::empty(inst)).collect(),
            routed_groups: vec![false; inst.n_groups],
            total_score: 0.0,
        }
    }

    pub fn violations(&self) -> usize {
        self.itineraries.iter().map(|it| it.violation_count).sum()
    }

    /// `true` when `self` beats `other`: higher score, ties broken by fewer
    /// mode-preference violations.
    pub fn better_than(&self, other: &Solution) -> bool {
        if self.total_score != other.total_score {
            return self.total_score > other.total_score;
        }
        self.violations() < other.violations()
    }

    /// Re-derives score and routed groups from the actual routes (used by
    /// tests and the validator to cross-check incremental bookkeeping).
    pub fn recount(&mut self, inst: &Instance) {
        self.routed_groups = vec![false; inst.n_groups];
        self.total_score = 0.0;
        for it in &self.itineraries {
            for v in &it.visits {
                let poi = inst.poi(v.poi);
                if !inst.is_anchor(v.poi) {
                    self.routed_groups[poi.group] = true;
                    self.total_score += poi.score;
                }
            }
        }
    }
}
