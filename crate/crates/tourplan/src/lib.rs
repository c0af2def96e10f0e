//! Multi-day tourist itinerary planning over a mixed walk-and-drive road network.
//!
//! Given a set of points of interest (PoIs) with scores, opening hours and visit
//! durations, plus pairwise walking and driving times, this crate builds `m` daily
//! itineraries that maximize the total collected score. The tourist moves by car
//! between distant stops and on foot inside pedestrian areas; whenever the car is
//! parked, the walk segment forms a *subtour* and the tourist must eventually walk
//! back to the parked car before driving on.
//!
//! The solver is an iterated local search: a greedy insertion phase grows the
//! itineraries one visit at a time, and a perturbation phase removes consecutive
//! runs of visits to escape local optima. Insertion feasibility is decided in
//! constant time per candidate thanks to per-visit slack bookkeeping
//! ([`schedule::Visit`]): each visit caches how far it can slip before some later
//! opening/closing constraint breaks, both along the whole itinerary and within
//! its walking subtour.
//!
//! Module map:
//!
//! * [`instance`] — problem data: PoIs, time windows, travel matrices,
//!   preprocessing (metric closure, car transfer folding, window expansion),
//!   JSON I/O and the synthetic instance generator.
//! * [`schedule`] — the annotated itinerary encoding and the full O(n)
//!   re-derivation of all annotations from scratch (used as the reference path).
//! * [`feasibility`] — O(1) insertion classification and feasibility checks.
//! * [`search`] — insertion/removal application, the insertion phase, the
//!   perturbation phase, and the iterated-local-search driver.
//! * [`clustering`] — radius filtering and agglomerative clustering of candidate
//!   PoIs, plus the cluster-contiguity insertion gate.
//! * [`report`] — solution JSON, run manifests, validation, GeoJSON export and
//!   the benchmark harness.

pub mod clustering;
pub mod feasibility;
pub mod geo;
pub mod instance;
pub mod report;
pub mod schedule;
pub mod search;

pub use instance::{Instance, Mobility, Poi};
pub use schedule::{Itinerary, Mode, Solution, Visit};
pub use search::{solve, SolveConfig, SolveOutcome};
