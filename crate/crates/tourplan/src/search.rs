//! Move application and the iterated local search.
//!
//! The solver alternates two phases. The *insertion phase* repeatedly picks,
//! over all unrouted PoIs, positions and mode pairs, the feasible insertion
//! with the best score-per-minute ratio and applies it until nothing fits.
//! The *perturbation* then removes a block of `rho` consecutive visits
//! starting at rotating offset `sigma` from every itinerary, and the cycle
//! repeats until enough unimproved rounds or the time budget pass.
//!
//! Applying a move never reschedules the whole day: the evaluated shifts are
//! propagated forward visit by visit, each one absorbing what it can of the
//! shift in its waiting slack, and propagation stops at the first visit past
//! the structural change that absorbs it completely. Slack annotations are
//! then rebuilt backwards from the stop position only. Removals reconnect
//! the kept neighbours with a shift that is never positive (driving chains
//! the removed legs' car trajectory on metric matrices), so they cannot
//! break feasibility; the propagation machinery is shared with insertions.

use std::time::{Duration, Instant};

use crate::clustering::{insertion_allowed, ClusterAssignment, UsedLabels};
use crate::feasibility::{check_insertion, Candidate, Evaluation};
use crate::instance::{Instance, PoiIdx};
use crate::schedule::{travel_time, Itinerary, Mode, Solution, Visit, BIG_M, TIME_EPS};

/// Mode pairs in candidate-enumeration order (ties resolve to the earliest).
pub const MODE_PAIRS: [(Mode, Mode); 4] = [
    (Mode::Walk, Mode::Walk),
    (Mode::Walk, Mode::Drive),
    (Mode::Drive, Mode::Walk),
    (Mode::Drive, Mode::Drive),
];

/// Solver knobs. Defaults: 150 unimproved iterations or 60 s, whichever
/// comes first; no radius filter; no clustering.
#[derive(Debug, Clone)]
pub struct SolveConfig {
    /// Stop after this many consecutive iterations without improvement.
    pub max_iter: usize,
    /// Wall-clock budget in seconds.
    pub time_limit_secs: f64,
    /// Candidate radius around the start location, in kilometres.
    pub radius_km: Option<f64>,
    /// Cluster assignment enabling the contiguity gate.
    pub clusters: Option<ClusterAssignment>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            max_iter: 150,
            time_limit_secs: 60.0,
            radius_km: None,
            clusters: None,
        }
    }
}

/// Result of a solve, with search statistics.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub solution: Solution,
    /// Insertion phases run (initial construction included).
    pub iterations: usize,
    /// Improving solutions found.
    pub improvements: usize,
    /// Consecutive unimproved iterations at termination.
    pub no_improve_streak: usize,
    pub elapsed_secs: f64,
}

/// What a move application did, for tests and diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ApplyReport {
    /// Position where the forward shift propagation stopped.
    pub forward_stop: usize,
}

/// Shift handed to the next visit when this visit's arrival moves by
/// `incoming`: positive shifts are damped by the old waiting slack, negative
/// ones by how far the old start sat above the opening time.
#[inline]
fn propagated_shift(incoming: f64, old_wait: f64, open: f64, old_start: f64) -> f64 {
    if incoming > 0.0 {
        (incoming - old_wait).max(0.0)
    } else if incoming < 0.0 {
        (open - old_start).max(incoming)
    } else {
        0.0
    }
}

/// Propagates an arrival shift forward from `from` (whose arrival changes by
/// `incoming`). At `repriced` — the last member of a subtour whose outgoing
/// drive leg changed — the start time still moves by the ordinary propagated
/// amount, but the shift handed onward is `handoff` (it also reflects the
/// leg's new duration). Returns the position where propagation stopped.
fn forward_update(
    it: &mut Itinerary,
    inst: &Instance,
    from: usize,
    incoming: f64,
    repriced: Option<(usize, f64)>,
    expected_start_change: f64,
) -> usize {
    let n = it.visits.len();
    let mut shift = incoming;
    for pos in from..n {
        let v = &mut it.visits[pos];
        let open = inst.poi(v.poi).open;
        v.arrival += shift;
        let start_change = propagated_shift(shift, v.wait, open, v.start);
        v.start += start_change;
        v.wait = (open - v.arrival).max(0.0);
        debug_assert!(
            (v.start - v.arrival.max(open)).abs() <= 1e-6,
            "start must stay max(arrival, open)"
        );
        let handoff = match repriced {
            Some((q, h)) if q == pos => {
                debug_assert!(
                    (start_change - expected_start_change).abs() <= 1e-6,
                    "constant-time start-change prediction mismatch: {start_change} vs {expected_start_change}"
                );
                h
            }
            _ => start_change,
        };
        if handoff == 0.0 && repriced.is_none_or(|(q, _)| pos >= q) {
            return pos;
        }
        shift = handoff;
    }
    n - 1
}

/// Splices `cand` (already verified feasible) into its itinerary and repairs
/// all annotations incrementally.
pub fn apply_insertion(
    inst: &Instance,
    it: &mut Itinerary,
    cand: &Candidate,
    eval: &Evaluation,
) -> ApplyReport {
    debug_assert!(eval.feasible, "only feasible insertions may be applied");
    let pos = cand.position;
    let i_pos = pos - 1;
    let poi_j = inst.poi(cand.poi);

    // Re-derive the new legs with real (unchecked) times. For a feasible
    // insertion they equal the checked prices and are preference-clean.
    let pivot_i = it.pivot_poi(i_pos);
    let car_at_j = match cand.mode_in {
        Mode::Drive => cand.poi,
        Mode::Walk => pivot_i,
    };
    let leg_ij = travel_time(
        inst,
        it.visits[i_pos].poi,
        cand.poi,
        cand.mode_in,
        false,
        Some(pivot_i),
    );
    let leg_jk = travel_time(
        inst,
        cand.poi,
        it.visits[pos].poi,
        cand.mode_out,
        false,
        Some(car_at_j),
    );
    debug_assert!(leg_ij.minutes < BIG_M && !leg_ij.violated);
    debug_assert!(leg_jk.minutes < BIG_M && !leg_jk.violated);

    let old_violations = it.violation_count as i64;

    let arrival = it.visits[i_pos].start + inst.poi(it.visits[i_pos].poi).duration + leg_ij.minutes;
    it.visits[i_pos].mode = cand.mode_in;
    it.visits[i_pos].violated = leg_ij.violated;
    it.visits.insert(
        pos,
        Visit {
            poi: cand.poi,
            mode: cand.mode_out,
            violated: leg_jk.violated,
            subtour: None,
            arrival,
            start: arrival.max(poi_j.open),
            wait: (poi_j.open - arrival).max(0.0),
            max_shift: 0.0,
            sub_wait: 0.0,
            sub_max_shift: 0.0,
            max_decrease: 0.0,
        },
    );
    it.rebuild_subtours();

    // The drive leg leaving the affected subtour's last member `q` now
    // starts from a different parked-car position: refresh its flag.
    let repriced = eval.q_pos.map(|q_pre| {
        let q = q_pre + 1; // everything from `pos` slid one to the right
        if q + 1 < it.visits.len() {
            let leg = travel_time(
                inst,
                it.visits[q].poi,
                it.visits[q + 1].poi,
                Mode::Drive,
                false,
                Some(
                    eval.new_pivot
                        .expect("advanced/special carry the new pivot"),
                ),
            );
            debug_assert!(!leg.violated, "feasible insertions only create clean arcs");
            it.visits[q].violated = leg.violated;
        }
        (q, eval.shift_q)
    });

    let stop = forward_update(it, inst, pos + 1, eval.shift_j, repriced, eval.delta_k);
    it.recompute_slacks_to_start(inst, stop);

    it.violation_count = it.visits[..it.visits.len() - 1]
        .iter()
        .filter(|v| v.violated)
        .count();
    debug_assert_eq!(
        it.violation_count as i64,
        old_violations + eval.violation_delta,
        "violation bookkeeping must match the constant-time prediction"
    );
    debug_assert!(it.violation_count as i64 <= old_violations);
    ApplyReport { forward_stop: stop }
}

/// What a removal did.
#[derive(Debug, Clone)]
pub struct RemovalReport {
    /// PoIs actually removed (the requested block, possibly widened to keep
    /// the walk structure consistent).
    pub removed: Vec<PoiIdx>,
    pub forward_stop: usize,
}

/// Removes the visits at positions `first..=last` (candidates only; anchors
/// are untouchable), widening the cut when it would otherwise slice a
/// pedestrian subtour apart, and reconnects the kept neighbours.
///
/// The reconnect mode keeps walking only when both kept neighbours belonged
/// to one subtour; everything else reconnects by car. On metric travel
/// matrices the reconnect shift is never positive, so feasibility is
/// preserved. The single degenerate exception (the cut strands visits that
/// walked into the end anchor, leaving the car behind) clears the whole
/// itinerary instead — a strictly larger removal, still deterministic.
pub fn apply_removal(
    inst: &Instance,
    it: &mut Itinerary,
    first: usize,
    last: usize,
) -> RemovalReport {
    debug_assert!(first >= 1 && last <= it.visits.len() - 2 && first <= last);
    let mut i_pos = first - 1;
    let mut k_pos = last + 1;
    let s_i = it.visits[i_pos].subtour;
    let s_k = it.visits[k_pos].subtour;

    // Reconnect mode from the *original* boundaries: only a cut strictly
    // inside one subtour keeps walking.
    let mode = if s_i == s_k && s_i.is_some() {
        Mode::Walk
    } else {
        Mode::Drive
    };

    // Widen the cut to whole subtours when it would split one: the kept
    // left boundary retreats to its subtour's pivot, the kept right
    // boundary advances past its subtour's last member.
    if s_i != s_k {
        if let Some(h) = s_i {
            if i_pos != it.subtours[h].last {
                i_pos = it.subtours[h].first;
            }
        }
        if let Some(h) = s_k {
            if k_pos != it.subtours[h].first {
                if it.subtours[h].last + 1 >= it.visits.len() {
                    // The subtour reaches the end anchor: there is no visit
                    // "after" it to reconnect to. Clear the itinerary.
                    return clear_itinerary(inst, it);
                }
                k_pos = it.subtours[h].last + 1;
            }
        }
    }

    let pivot = match mode {
        Mode::Drive => Some(it.pivot_poi(i_pos)),
        Mode::Walk => None,
    };
    let leg = travel_time(
        inst,
        it.visits[i_pos].poi,
        it.visits[k_pos].poi,
        mode,
        false,
        pivot,
    );
    let t_old =
        it.visits[k_pos].arrival - it.visits[i_pos].start - inst.poi(it.visits[i_pos].poi).duration;
    let shift = leg.minutes - t_old;
    if shift > TIME_EPS {
        // Unreachable on metric matrices except via the stranded-car corner
        // handled above; kept as a deterministic safety net for data that
        // lied about being metric.
        return clear_itinerary(inst, it);
    }

    let removed: Vec<PoiIdx> = it.visits.drain(i_pos + 1..k_pos).map(|v| v.poi).collect();
    it.visits[i_pos].mode = mode;
    it.visits[i_pos].violated = leg.violated;
    it.rebuild_subtours();

    let stop = forward_update(it, inst, i_pos + 1, shift, None, 0.0);
    it.recompute_slacks_to_start(inst, stop);
    it.violation_count = it.visits[..it.visits.len() - 1]
        .iter()
        .filter(|v| v.violated)
        .count();
    debug_assert!(it.audit(inst).is_ok(), "removals must preserve feasibility");
    RemovalReport {
        removed,
        forward_stop: stop,
    }
}

fn clear_itinerary(inst: &Instance, it: &mut Itinerary) -> RemovalReport {
    let removed = it.visits[1..it.visits.len() - 1]
        .iter()
        .map(|v| v.poi)
        .collect();
    *it = Itinerary::empty(inst);
    RemovalReport {
        removed,
        forward_stop: 0,
    }
}

/// Per-day gate state while clustering is active.
struct GateState {
    used: Vec<UsedLabels>,
}

impl GateState {
    fn new(assign: &ClusterAssignment, sol: &Solution) -> Self {
        let mut used = Vec::with_capacity(sol.itineraries.len());
        for it in &sol.itineraries {
            let mut u = UsedLabels::new(assign.n_clusters);
            u.rebuild(assign, it.visits.iter().map(|v| v.poi));
            used.push(u);
        }
        GateState { used }
    }
}

/// The best feasible insertion of one PoI, with its selection keys.
struct BestForPoi {
    cand: Candidate,
    eval: Evaluation,
    rank: usize,
}

fn keys_of(eval: &Evaluation, cand: &Candidate, rank: usize) -> (f64, i64, usize, usize, usize) {
    (
        eval.combined_shift,
        eval.violation_delta,
        cand.day,
        cand.position,
        rank,
    )
}

/// One insertion round: the argmax over PoIs of `score^2 / combined_shift`
/// among each PoI's cheapest feasible insertion. Returns `None` when no
/// candidate fits anywhere.
fn select_best_insertion(
    inst: &Instance,
    sol: &Solution,
    eligible: &[bool],
    clusters: Option<&ClusterAssignment>,
    gate: Option<&GateState>,
) -> Option<(Candidate, Evaluation)> {
    let mut best_per_poi: Vec<Option<BestForPoi>> = Vec::new();
    best_per_poi.resize_with(inst.n_candidates(), || None);

    for (day, it) in sol.itineraries.iter().enumerate() {
        for position in 1..it.visits.len() {
            let (label_i, label_k) = match clusters {
                Some(assign) => (
                    assign.label(it.visits[position - 1].poi),
                    assign.label(it.visits[position].poi),
                ),
                None => (None, None),
            };
            for j in inst.candidates() {
                if !eligible[j] || sol.routed_groups[inst.poi(j).group] {
                    continue;
                }
                if !inst.poi(j).available_on(day) {
                    continue;
                }
                if let (Some(assign), Some(state)) = (clusters, gate) {
                    let l_j = assign.label(j).expect("eligible PoIs carry labels");
                    let (l_i, l_k) = (label_i.unwrap(), label_k.unwrap());
                    if !insertion_allowed(assign, &state.used[day], l_i, l_j, l_k) {
                        continue;
                    }
                }
                for (rank, (mode_in, mode_out)) in MODE_PAIRS.into_iter().enumerate() {
                    let cand = Candidate {
                        day,
                        position,
                        poi: j,
                        mode_in,
                        mode_out,
                    };
                    let eval = check_insertion(inst, it, &cand);
                    if !eval.feasible {
                        continue;
                    }
                    let better = match &best_per_poi[j] {
                        None => true,
                        Some(cur) => {
                            keys_of(&eval, &cand, rank) < keys_of(&cur.eval, &cur.cand, cur.rank)
                        }
                    };
                    if better {
                        best_per_poi[j] = Some(BestForPoi { cand, eval, rank });
                    }
                }
            }
        }
    }

    let mut winner: Option<(f64, BestForPoi)> = None;
    for (j, entry) in best_per_poi.into_iter().enumerate() {
        let Some(entry) = entry else { continue };
        let score = inst.poi(j).score;
        let ratio = if entry.eval.combined_shift > TIME_EPS {
            score * score / entry.eval.combined_shift
        } else {
            f64::INFINITY
        };
        let better = match &winner {
            None => true,
            Some((best_ratio, cur)) => {
                if ratio != *best_ratio {
                    ratio > *best_ratio
                } else {
                    let a = (
                        entry.eval.violation_delta,
                        entry.cand.day,
                        entry.cand.position,
                        entry.cand.poi,
                        entry.rank,
                    );
                    let b = (
                        cur.eval.violation_delta,
                        cur.cand.day,
                        cur.cand.position,
                        cur.cand.poi,
                        cur.rank,
                    );
                    a < b
                }
            }
        };
        if better {
            winner = Some((ratio, entry));
        }
    }
    winner.map(|(_, w)| (w.cand, w.eval))
}

/// Greedy insertion to a local optimum (bounded by `deadline`).
fn insertion_phase(
    inst: &Instance,
    sol: &mut Solution,
    eligible: &[bool],
    clusters: Option<&ClusterAssignment>,
    gate: &mut Option<GateState>,
    deadline: Instant,
) {
    loop {
        if Instant::now() >= deadline {
            return;
        }
        let Some((cand, eval)) =
            select_best_insertion(inst, sol, eligible, clusters, gate.as_ref())
        else {
            return;
        };
        apply_insertion(inst, &mut sol.itineraries[cand.day], &cand, &eval);
        let poi = inst.poi(cand.poi);
        sol.routed_groups[poi.group] = true;
        sol.total_score += poi.score;
        if let (Some(assign), Some(state)) = (clusters, gate.as_mut()) {
            let label = assign.label(cand.poi).expect("inserted PoIs carry labels");
            state.used[cand.day].insert(label);
        }
    }
}

/// Removes `rho` consecutive candidates starting at rotating offset `sigma`
/// from every itinerary (clamped at the tail; empty days are skipped).
fn perturb(inst: &Instance, sol: &mut Solution, rho: usize, sigma: usize) {
    for day in 0..sol.itineraries.len() {
        let size = sol.itineraries[day].candidate_count();
        if size == 0 {
            continue;
        }
        let first = (sigma % size) + 1;
        let last = (first + rho - 1).min(size);
        let report = apply_removal(inst, &mut sol.itineraries[day], first, last);
        for poi in report.removed {
            let p = inst.poi(poi);
            sol.routed_groups[p.group] = false;
            sol.total_score -= p.score;
        }
    }
}

/// Which PoIs may be routed at all under the config's radius filter and
/// cluster assignment.
fn eligibility(inst: &Instance, cfg: &SolveConfig) -> Vec<bool> {
    let mut eligible = crate::clustering::radius_filter(inst, cfg.radius_km);
    if let Some(assign) = &cfg.clusters {
        for p in inst.candidates() {
            eligible[p] = eligible[p] && assign.label(p).is_some();
        }
    }
    eligible
}

/// Iterated local search: construct, then perturb-and-reinsert until
/// `max_iter` consecutive unimproved iterations or the time budget is spent.
/// Deterministic: no randomness is consumed at solve time, so equal inputs
/// yield equal solutions whenever the iteration cap binds before the clock.
pub fn solve(inst: &Instance, cfg: &SolveConfig) -> SolveOutcome {
    let started = Instant::now();
    let deadline = started + Duration::from_secs_f64(cfg.time_limit_secs.max(0.0));
    let eligible = eligibility(inst, cfg);
    let clusters = cfg.clusters.as_ref();

    let mut current = Solution::empty(inst);
    let mut gate = clusters.map(|assign| GateState::new(assign, &current));
    let mut best = current.clone();
    let mut sigma = 1usize;
    let mut rho = 1usize;
    let mut counter = 0usize;
    let mut iterations = 0usize;
    let mut improvements = 0usize;

    loop {
        insertion_phase(inst, &mut current, &eligible, clusters, &mut gate, deadline);
        iterations += 1;
        if current.better_than(&best) {
            best = current.clone();
            rho = 1;
            counter = 0;
            improvements += 1;
        } else {
            counter += 1;
        }
        rho += 1;

        let sizes = current.itineraries.iter().map(|it| it.candidate_count());
        let biggest = sizes.clone().max().unwrap_or(0);
        let smallest = sizes.min().unwrap_or(0);
        if rho >= biggest {
            rho = (smallest / 2).max(1);
        }
        sigma = (sigma + rho) % smallest.max(1);

        if counter >= cfg.max_iter || Instant::now() >= deadline {
            break;
        }
        perturb(inst, &mut current, rho, sigma);
        if let (Some(assign), Some(state)) = (clusters, gate.as_mut()) {
            for (day, it) in current.itineraries.iter().enumerate() {
                state.used[day].rebuild(assign, it.visits.iter().map(|v| v.poi));
            }
        }
    }

    SolveOutcome {
        solution: best,
        iterations,
        improvements,
        no_improve_streak: counter,
        elapsed_secs: started.elapsed().as_secs_f64(),
    }
}
