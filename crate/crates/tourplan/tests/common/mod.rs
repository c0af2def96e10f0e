//! Shared test support: a hand-checkable fixture whose every time value was
//! worked out on paper, and an independent reference implementation of the
//! timing rules coded straight from their definitions (no reuse of the
//! library's scheduling internals), so the two sides can meaningfully
//! disagree.

#![allow(dead_code)]

pub mod fixture {
    use tourplan::instance::{Instance, InstanceFile, MobilityFile, PoiEntry, PoiIdx};
    use tourplan::schedule::{Itinerary, Mode, Subtour};

    /// An 11-location instance small enough to schedule by hand.
    ///
    /// Location 0 hosts the start/end anchor. Locations 1..=8 are the stops
    /// of the reference tour in visiting order. Locations 9 and 10 are two
    /// probe PoIs used by the insertion tests: 9 sits far from everything
    /// except the start, 10 sits right next to stops 2 and 3.
    pub struct Fixture {
        pub inst: Instance,
        /// Candidate indices of the tour stops, visiting order.
        pub stops: [PoiIdx; 8],
        /// Probe PoI at location 9.
        pub probe_far: PoiIdx,
        /// Probe PoI at location 10.
        pub probe_near: PoiIdx,
    }

    /// Walk times: symmetric, start 120 from everything, unrelated pairs 150.
    /// Several values sit exactly on shortest paths through other locations,
    /// so surviving the metric closure is itself part of the design.
    const WALK_PAIRS: &[(usize, usize, f64)] = &[
        (1, 2, 90.0),
        (1, 3, 75.0),
        (1, 4, 70.0),
        (1, 5, 30.0),
        (1, 6, 40.0),
        (1, 7, 58.0),
        (1, 8, 57.0),
        (1, 9, 42.0),
        (1, 10, 87.0),
        (2, 3, 20.0),
        (2, 4, 25.0),
        (2, 5, 65.0),
        (2, 8, 92.0),
        (2, 9, 53.0),
        (2, 10, 3.0),
        (3, 4, 5.0),
        (3, 9, 33.0),
        (3, 10, 23.0),
        (4, 5, 40.0),
        (4, 9, 28.0),
        (4, 10, 28.0),
        (5, 6, 10.0),
        (5, 7, 28.0),
        (5, 8, 27.0),
        (5, 9, 12.0),
        (5, 10, 68.0),
        (6, 7, 20.0),
        (6, 8, 27.0),
        (7, 8, 7.0),
        (9, 10, 56.0),
    ];

    /// Drive times: directed, unspecified pairs 70. The first block carries
    /// the legs the hand-worked schedules use; the rest pins down preferred
    /// modes and shortest paths.
    const DRIVE_ENTRIES: &[(usize, usize, f64)] = &[
        (0, 1, 25.0),
        (1, 2, 15.0),
        (2, 5, 5.0),
        (5, 0, 5.0),
        (1, 5, 2.0),
        (0, 9, 25.0),
        (9, 1, 25.0),
        (1, 10, 8.0),
        (10, 5, 8.0),
        (2, 0, 6.0),
        (2, 3, 22.0),
        (3, 4, 20.0),
        (4, 2, 30.0),
        (5, 6, 18.0),
        (6, 7, 26.0),
        (7, 8, 16.0),
        (8, 5, 30.0),
        (4, 9, 31.0),
        (9, 5, 19.0),
        (10, 2, 7.0),
        (4, 10, 32.0),
        (5, 2, 14.0),
        (5, 10, 9.0),
        (2, 1, 17.0),
        (5, 1, 20.0),
        (1, 9, 30.0),
        (1, 0, 28.0),
        (9, 0, 27.0),
    ];

    /// Drive entries shortened by the metric closure on purpose (a faster
    /// two-leg route exists); everything else must survive verbatim.
    const DRIVE_SHORTENED: &[(usize, usize)] = &[(1, 0), (9, 0)];

    /// Stop opening windows, visiting order.
    const STOP_WINDOWS: [[f64; 2]; 8] = [
        [0.0, 75.0],
        [50.0, 115.0],
        [60.0, 95.0],
        [60.0, 115.0],
        [80.0, 135.0],
        [150.0, 175.0],
        [90.0, 245.0],
        [90.0, 245.0],
    ];

    pub const C_MAX: f64 = 320.0;
    pub const VISIT_MINUTES: f64 = 5.0;
    pub const SCORE: f64 = 10.0;

    pub fn build() -> Fixture {
        let n = 11;
        let mut walk = vec![vec![150.0; n]; n];
        let mut drive = vec![vec![70.0; n]; n];
        for x in 0..n {
            walk[x][x] = 0.0;
            drive[x][x] = 0.0;
        }
        walk[0][1..].fill(120.0);
        for row in walk.iter_mut().skip(1) {
            row[0] = 120.0;
        }
        for &(a, b, t) in WALK_PAIRS {
            walk[a][b] = t;
            walk[b][a] = t;
        }
        for &(a, b, t) in DRIVE_ENTRIES {
            drive[a][b] = t;
        }

        let entry = |id: u64, loc: usize, windows: Vec<[f64; 2]>, dur: f64, score: f64| PoiEntry {
            id,
            group_id: None,
            lat: 48.0 + loc as f64 * 0.001,
            lon: 11.0 + loc as f64 * 0.001,
            score,
            visit_minutes: dur,
            windows,
            days: None,
        };
        let mut pois = vec![entry(0, 0, vec![[0.0, 0.0]], 0.0, 0.0)];
        for (stop, window) in STOP_WINDOWS.iter().enumerate() {
            pois.push(entry(
                stop as u64 + 1,
                stop + 1,
                vec![*window],
                VISIT_MINUTES,
                SCORE,
            ));
        }
        pois.push(entry(100, 9, vec![[0.0, 300.0]], VISIT_MINUTES, SCORE));
        pois.push(entry(101, 10, vec![[0.0, 300.0]], VISIT_MINUTES, SCORE));

        let inst = InstanceFile {
            pois,
            walk_minutes: walk.clone(),
            drive_minutes: drive.clone(),
            mobility: MobilityFile {
                max_walking_time: 30.0,
                min_driving_time: 2.0,
                pickup_time: 0.0,
                parking_time: 0.0,
            },
            c_max: C_MAX,
            days: 1,
            start_index: 0,
            metric: false, // the loader must run the closure
        }
        .into_instance()
        .unwrap();

        // The hand-worked schedules assume these exact times, so the fixture
        // checks itself: the closure must keep every authored value.
        for &(a, b, t) in WALK_PAIRS {
            assert_eq!(inst.walk.get(a, b), t, "walk {a}->{b} changed by closure");
            assert_eq!(inst.walk.get(b, a), t, "walk {b}->{a} changed by closure");
        }
        for x in 1..n {
            assert_eq!(inst.walk.get(0, x), 120.0);
        }
        for &(a, b, t) in DRIVE_ENTRIES {
            if DRIVE_SHORTENED.contains(&(a, b)) {
                assert!(inst.drive.get(a, b) < t);
            } else {
                assert_eq!(inst.drive.get(a, b), t, "drive {a}->{b} changed by closure");
            }
        }

        let by_id = |id: u64| {
            inst.candidates()
                .find(|&p| inst.poi(p).entry_id == id)
                .unwrap()
        };
        let stops = std::array::from_fn(|s| by_id(s as u64 + 1));
        let probe_far = by_id(100);
        let probe_near = by_id(101);
        Fixture {
            inst,
            stops,
            probe_far,
            probe_near,
        }
    }

    impl Fixture {
        /// The hand-scheduled tour: two drive hops out, a two-stop walking
        /// leg, a drive to a four-stop walking leg, and a drive home.
        pub fn reference_tour(&self) -> Itinerary {
            use Mode::{Drive as D, Walk as W};
            let s = self.inst.start_poi;
            let e = self.inst.end_poi;
            let p = &self.stops;
            Itinerary::from_sequence(
                &self.inst,
                &[s, p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7], e],
                &[D, D, W, W, D, W, W, W, D],
            )
        }
    }

    /// One expected row of an annotated schedule.
    #[derive(Debug, Clone, Copy)]
    pub struct Row {
        pub arrival: f64,
        pub start: f64,
        pub wait: f64,
        pub max_shift: f64,
        pub subtour: Option<usize>,
        pub sub_wait: f64,
        pub sub_max_shift: f64,
        pub max_decrease: f64,
        pub violated: bool,
    }

    // One positional argument per table column keeps the golden tables readable.
    #[allow(clippy::too_many_arguments)]
    const fn row(
        arrival: f64,
        start: f64,
        wait: f64,
        max_shift: f64,
        subtour: Option<usize>,
        sub_wait: f64,
        sub_max_shift: f64,
        max_decrease: f64,
    ) -> Row {
        Row {
            arrival,
            start,
            wait,
            max_shift,
            subtour,
            sub_wait,
            sub_max_shift,
            max_decrease,
            violated: false,
        }
    }

    /// Expected annotations of the freshly built reference tour. Every value
    /// is integer, so the comparisons are exact.
    pub const REFERENCE_ROWS: [Row; 10] = [
        row(0.0, 0.0, 0.0, 0.0, None, 0.0, 0.0, 0.0),
        row(25.0, 25.0, 0.0, 20.0, None, 0.0, 0.0, 0.0),
        row(45.0, 50.0, 5.0, 15.0, Some(0), 5.0, 20.0, 0.0),
        row(75.0, 75.0, 0.0, 15.0, Some(0), 0.0, 20.0, 15.0),
        row(85.0, 85.0, 0.0, 15.0, Some(0), 0.0, 30.0, 25.0),
        row(120.0, 120.0, 0.0, 15.0, Some(1), 15.0, 15.0, 0.0),
        row(135.0, 150.0, 15.0, 25.0, Some(1), 15.0, 25.0, 0.0),
        row(175.0, 175.0, 0.0, 58.0, Some(1), 0.0, 58.0, 85.0),
        row(187.0, 187.0, 0.0, 58.0, Some(1), 0.0, 58.0, 97.0),
        row(224.0, 224.0, 0.0, 96.0, None, 0.0, 0.0, 0.0),
    ];

    /// Expected annotations after inserting the near probe between the first
    /// and second stop by (Drive, Walk): the probe joins the first walking
    /// leg, whose parked car moves to the probe's location, delaying the
    /// whole leg's exit drive by 6 minutes which the slack before stop 6
    /// absorbs.
    pub const POST_INSERTION_ROWS: [Row; 11] = [
        row(0.0, 0.0, 0.0, 0.0, None, 0.0, 0.0, 0.0),
        row(25.0, 25.0, 0.0, 13.0, None, 0.0, 0.0, 0.0),
        row(38.0, 38.0, 0.0, 13.0, Some(0), 4.0, 24.0, 0.0),
        row(46.0, 50.0, 4.0, 9.0, Some(0), 4.0, 20.0, 0.0),
        row(75.0, 75.0, 0.0, 9.0, Some(0), 0.0, 20.0, 15.0),
        row(85.0, 85.0, 0.0, 9.0, Some(0), 0.0, 30.0, 25.0),
        row(126.0, 126.0, 0.0, 9.0, Some(1), 9.0, 9.0, 0.0),
        row(141.0, 150.0, 9.0, 25.0, Some(1), 9.0, 25.0, 0.0),
        row(175.0, 175.0, 0.0, 58.0, Some(1), 0.0, 58.0, 85.0),
        row(187.0, 187.0, 0.0, 58.0, Some(1), 0.0, 58.0, 97.0),
        row(224.0, 224.0, 0.0, 96.0, None, 0.0, 0.0, 0.0),
    ];

    /// Expected annotations after removing the first walking leg (positions
    /// 2..=4) from a fresh reference tour: the reconnect drives stop 1 to
    /// stop 5 in 2 minutes (a -88 shift absorbed by stop 5's opening time),
    /// and that drive breaks the mode preference — the 30-minute walk ties
    /// the walking cap and the 2-minute drive ties the drive floor, so
    /// walking is preferred and the arc counts as the tour's one violation.
    pub const POST_REMOVAL_ROWS: [Row; 7] = [
        row(0.0, 0.0, 0.0, 0.0, None, 0.0, 0.0, 0.0),
        Row {
            arrival: 25.0,
            start: 25.0,
            wait: 0.0,
            max_shift: 50.0,
            subtour: None,
            sub_wait: 0.0,
            sub_max_shift: 0.0,
            max_decrease: 0.0,
            violated: true,
        },
        row(32.0, 80.0, 48.0, 55.0, Some(0), 103.0, 55.0, 0.0),
        row(95.0, 150.0, 55.0, 25.0, Some(0), 55.0, 25.0, 0.0),
        row(175.0, 175.0, 0.0, 58.0, Some(0), 0.0, 58.0, 85.0),
        row(187.0, 187.0, 0.0, 58.0, Some(0), 0.0, 58.0, 97.0),
        row(224.0, 224.0, 0.0, 96.0, None, 0.0, 0.0, 0.0),
    ];

    pub fn assert_rows(it: &Itinerary, rows: &[Row]) {
        assert_eq!(it.visits.len(), rows.len(), "tour length");
        for (pos, (v, want)) in it.visits.iter().zip(rows).enumerate() {
            assert_eq!(v.arrival, want.arrival, "arrival at position {pos}");
            assert_eq!(v.start, want.start, "start at position {pos}");
            assert_eq!(v.wait, want.wait, "wait at position {pos}");
            assert_eq!(v.max_shift, want.max_shift, "max_shift at position {pos}");
            assert_eq!(v.subtour, want.subtour, "subtour at position {pos}");
            assert_eq!(v.sub_wait, want.sub_wait, "sub_wait at position {pos}");
            assert_eq!(
                v.sub_max_shift, want.sub_max_shift,
                "sub_max_shift at position {pos}"
            );
            assert_eq!(
                v.max_decrease, want.max_decrease,
                "max_decrease at position {pos}"
            );
            assert_eq!(v.violated, want.violated, "violated at position {pos}");
        }
    }

    pub fn assert_subtours(it: &Itinerary, want: &[(usize, usize)]) {
        let got: Vec<(usize, usize)> = it.subtours.iter().map(|s| (s.first, s.last)).collect();
        assert_eq!(got, want, "subtour registry");
        for (h, &Subtour { first, last }) in it.subtours.iter().enumerate() {
            for pos in first..=last {
                assert_eq!(it.visits[pos].subtour, Some(h));
            }
        }
    }
}

pub mod reference {
    //! Naive re-derivation of every schedule rule, O(n) per arc where the
    //! library is O(1): preferred modes, parked-car pivots found by walking
    //! the mode sequence backwards, and all slack chains computed by fresh
    //! backward sweeps. Only instance *data* accessors are shared with the
    //! library; every decision is re-implemented here.

    use tourplan::feasibility::{Candidate, Evaluation};
    use tourplan::instance::{Instance, PoiIdx};
    use tourplan::schedule::{Itinerary, Mode};

    const EPS: f64 = 1e-9;
    /// Comparison slack for cross-checking incremental float arithmetic.
    pub const TOL: f64 = 1e-6;

    pub fn walk_preferred(inst: &Instance, from: PoiIdx, to: PoiIdx) -> bool {
        let tw = inst.walk_minutes(from, to);
        let td = inst.drive_minutes(from, to);
        if tw > inst.mobility.max_walking {
            false
        } else if td <= inst.mobility.min_driving {
            true
        } else {
            tw <= td
        }
    }

    /// Position of the parked car for the arc leaving `pos`: walk the mode
    /// sequence backwards over walk arcs.
    pub fn pivot_position(modes: &[Mode], pos: usize) -> usize {
        let mut f = pos;
        while f > 0 && modes[f - 1] == Mode::Walk {
            f -= 1;
        }
        f
    }

    /// True travel minutes of arc `pos` and whether it breaks preferences.
    pub fn arc(inst: &Instance, pois: &[PoiIdx], modes: &[Mode], pos: usize) -> (f64, bool) {
        let from = pois[pos];
        let to = pois[pos + 1];
        match modes[pos] {
            Mode::Walk => (inst.walk_minutes(from, to), !walk_preferred(inst, from, to)),
            Mode::Drive => {
                let pivot = pois[pivot_position(modes, pos)];
                let minutes = inst.walk_minutes(from, pivot) + inst.drive_minutes(pivot, to);
                let violated =
                    !walk_preferred(inst, from, pivot) || walk_preferred(inst, pivot, to);
                (minutes, violated)
            }
        }
    }

    /// A full schedule derived from scratch.
    pub struct Annotated {
        pub arrival: Vec<f64>,
        pub start: Vec<f64>,
        pub wait: Vec<f64>,
        pub max_shift: Vec<f64>,
        pub sub_wait: Vec<f64>,
        pub sub_max_shift: Vec<f64>,
        pub max_decrease: Vec<f64>,
        pub subtour_of: Vec<Option<usize>>,
        pub violated: Vec<bool>,
        pub violations: usize,
        pub windows_ok: bool,
        pub budget_ok: bool,
    }

    impl Annotated {
        pub fn feasible(&self) -> bool {
            self.windows_ok && self.budget_ok
        }
    }

    pub fn annotate(inst: &Instance, pois: &[PoiIdx], modes: &[Mode]) -> Annotated {
        let n = pois.len();
        assert_eq!(n, modes.len() + 1);
        let open = |pos: usize| inst.poi(pois[pos]).open;
        let close = |pos: usize| inst.poi(pois[pos]).close;

        let mut arrival = vec![0.0; n];
        let mut start = vec![0.0; n];
        let mut wait = vec![0.0; n];
        let mut violated = vec![false; n];
        let mut violations = 0;
        let mut windows_ok = true;
        for pos in 0..n {
            if pos > 0 {
                let (t, _) = arc(inst, pois, modes, pos - 1);
                arrival[pos] = start[pos - 1] + inst.poi(pois[pos - 1]).duration + t;
            }
            start[pos] = arrival[pos].max(open(pos));
            wait[pos] = start[pos] - arrival[pos];
            if start[pos] > close(pos) + EPS {
                windows_ok = false;
            }
            if pos + 1 < n {
                let (_, v) = arc(inst, pois, modes, pos);
                violated[pos] = v;
                violations += v as usize;
            }
        }
        let budget_ok = start[n - 1] <= inst.c_max + EPS;

        // Maximal runs of walk arcs.
        let mut subtour_of = vec![None; n];
        let mut runs = Vec::new();
        let mut pos = 0;
        while pos < modes.len() {
            if modes[pos] == Mode::Walk {
                let first = pos;
                while pos < modes.len() && modes[pos] == Mode::Walk {
                    pos += 1;
                }
                subtour_of[first..=pos].fill(Some(runs.len()));
                runs.push((first, pos));
            } else {
                pos += 1;
            }
        }

        let mut max_shift = vec![0.0; n];
        max_shift[n - 1] = close(n - 1) - start[n - 1];
        for pos in (0..n - 1).rev() {
            max_shift[pos] = (close(pos) - start[pos]).min(wait[pos + 1] + max_shift[pos + 1]);
        }

        let mut sub_wait = vec![0.0; n];
        let mut sub_max_shift = vec![0.0; n];
        let mut max_decrease = vec![0.0; n];
        for &(first, last) in &runs {
            sub_wait[last] = wait[last];
            sub_max_shift[last] = close(last) - start[last];
            max_decrease[last] = (arrival[last] - open(last)).max(0.0);
            for pos in (first..last).rev() {
                sub_wait[pos] = wait[pos] + sub_wait[pos + 1];
                sub_max_shift[pos] =
                    (close(pos) - start[pos]).min(wait[pos + 1] + sub_max_shift[pos + 1]);
                max_decrease[pos] = max_decrease[pos + 1].min((arrival[pos] - open(pos)).max(0.0));
            }
        }

        Annotated {
            arrival,
            start,
            wait,
            max_shift,
            sub_wait,
            sub_max_shift,
            max_decrease,
            subtour_of,
            violated,
            violations,
            windows_ok,
            budget_ok,
        }
    }

    /// PoI sequence and arc modes of a built itinerary.
    pub fn sequence_of(it: &Itinerary) -> (Vec<PoiIdx>, Vec<Mode>) {
        let pois: Vec<PoiIdx> = it.visits.iter().map(|v| v.poi).collect();
        let modes: Vec<Mode> = it.visits[..it.visits.len() - 1]
            .iter()
            .map(|v| v.mode)
            .collect();
        (pois, modes)
    }

    /// Every annotation of `it` must equal the from-scratch derivation.
    pub fn assert_matches(inst: &Instance, it: &Itinerary) {
        let (pois, modes) = sequence_of(it);
        let ann = annotate(inst, &pois, &modes);
        assert!(ann.windows_ok, "library kept an infeasible window");
        assert!(ann.budget_ok, "library kept a blown budget");
        assert_eq!(it.violation_count, ann.violations, "violation count");
        for (pos, v) in it.visits.iter().enumerate() {
            assert_eq!(v.subtour, ann.subtour_of[pos], "subtour at {pos}");
            if pos + 1 < it.visits.len() {
                assert_eq!(v.violated, ann.violated[pos], "violated flag at {pos}");
            }
            for (got, want, what) in [
                (v.arrival, ann.arrival[pos], "arrival"),
                (v.start, ann.start[pos], "start"),
                (v.wait, ann.wait[pos], "wait"),
                (v.max_shift, ann.max_shift[pos], "max_shift"),
                (v.sub_wait, ann.sub_wait[pos], "sub_wait"),
                (v.sub_max_shift, ann.sub_max_shift[pos], "sub_max_shift"),
                (v.max_decrease, ann.max_decrease[pos], "max_decrease"),
            ] {
                assert!(
                    (got - want).abs() <= TOL,
                    "{what} at {pos}: library {got} vs reference {want}"
                );
            }
        }
    }

    /// Splices `poi` before position `pos`, arriving by `mode_in` and
    /// leaving by `mode_out`.
    pub fn splice(
        pois: &[PoiIdx],
        modes: &[Mode],
        pos: usize,
        poi: PoiIdx,
        mode_in: Mode,
        mode_out: Mode,
    ) -> (Vec<PoiIdx>, Vec<Mode>) {
        let mut new_pois = pois.to_vec();
        new_pois.insert(pos, poi);
        let mut new_modes = modes.to_vec();
        new_modes[pos - 1] = mode_in;
        new_modes.insert(pos, mode_out);
        (new_pois, new_modes)
    }

    /// Arcs whose travel time or preference status the insertion can change:
    /// the two fresh arcs around the inserted visit, plus the first drive
    /// arc after it if its parked-car pivot moved (later arcs keep their
    /// walking runs and therefore their pivots).
    fn affected_arcs(
        old_pois: &[PoiIdx],
        old_modes: &[Mode],
        new_pois: &[PoiIdx],
        new_modes: &[Mode],
        pos: usize,
    ) -> Vec<usize> {
        let mut affected = vec![pos - 1, pos];
        for arc_idx in pos + 1..new_modes.len() {
            match new_modes[arc_idx] {
                Mode::Walk => continue,
                Mode::Drive => {
                    let new_pivot = new_pois[pivot_position(new_modes, arc_idx)];
                    let old_pivot = old_pois[pivot_position(old_modes, arc_idx - 1)];
                    if new_pivot != old_pivot {
                        affected.push(arc_idx);
                    }
                    break;
                }
            }
        }
        affected
    }

    /// Re-derives the verdict and the exact shifts of an insertion by fully
    /// rescheduling the spliced tour, then checks the constant-time
    /// evaluation against them field by field.
    pub fn verify_evaluation(
        inst: &Instance,
        pois: &[PoiIdx],
        modes: &[Mode],
        cand: &Candidate,
        eval: &Evaluation,
    ) {
        let (pos, poi) = (cand.position, cand.poi);
        let (mode_in, mode_out) = (cand.mode_in, cand.mode_out);
        let base = annotate(inst, pois, modes);
        assert!(base.feasible(), "verify_evaluation needs a feasible base");
        let (new_pois, new_modes) = splice(pois, modes, pos, poi, mode_in, mode_out);
        let spliced = annotate(inst, &new_pois, &new_modes);

        let clean = affected_arcs(pois, modes, &new_pois, &new_modes, pos)
            .into_iter()
            .all(|arc_idx| !spliced.violated[arc_idx]);
        let want_feasible = spliced.feasible() && clean;
        assert_eq!(
            eval.feasible, want_feasible,
            "verdict for poi {poi} at {pos} ({mode_in:?},{mode_out:?}): \
             windows {} budget {} clean {}",
            spliced.windows_ok, spliced.budget_ok, clean
        );
        if !eval.feasible {
            return;
        }

        let approx = |got: f64, want: f64, what: &str| {
            assert!(
                (got - want).abs() <= TOL,
                "{what} for poi {poi} at {pos} ({mode_in:?},{mode_out:?}): \
                 constant-time {got} vs rescheduled {want}"
            );
        };
        // The visit displaced by the insertion sits one position later now.
        approx(
            eval.shift_j,
            spliced.arrival[pos + 1] - base.arrival[pos],
            "shift_j",
        );
        match eval.q_pos {
            None => {
                assert_eq!(eval.shift_q, 0.0, "basic insertions price no exit leg");
                assert_eq!(eval.delta_k, 0.0);
            }
            Some(q) => {
                approx(
                    eval.delta_k,
                    spliced.start[q + 1] - base.start[q],
                    "delta_k (start-time change of the subtour's last member)",
                );
                if q + 1 < pois.len() {
                    approx(
                        eval.shift_q,
                        spliced.arrival[q + 2] - base.arrival[q + 1],
                        "shift_q (arrival change after the re-priced exit leg)",
                    );
                } else {
                    approx(
                        eval.shift_q,
                        spliced.start[q + 1] - base.start[q],
                        "shift_q",
                    );
                }
            }
        }
        approx(
            eval.combined_shift,
            eval.shift_j + eval.shift_q,
            "combined_shift",
        );
        assert_eq!(
            eval.new_violations, 0,
            "feasible insertions create clean arcs"
        );
        assert_eq!(
            eval.violation_delta,
            spliced.violations as i64 - base.violations as i64,
            "violation_delta"
        );
    }
}
