//! Round-based engines: single-departure RAPTOR, range RAPTOR and the
//! one-to-many range variant with destination-list pruning.
//!
//! Labels are kept per round and are cumulative: `labels[k][s]` is the best
//! known arrival at `s` using at most `k` rides. Round 0 holds the walk from
//! the source. Range runs process departures latest first and keep every
//! label, so the per-round form is what keeps fewer-ride journeys of earlier
//! departures from being pruned by many-ride labels of later ones.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::pareto::{self, ParetoSet};
use crate::timetable::{RouteId, StopId, Time, Timetable, TimetableError, TripId, INFINITY};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RaptorCounters {
    pub rounds: usize,
    pub routes_scanned: usize,
    pub label_updates: usize,
}

impl std::ops::AddAssign for RaptorCounters {
    fn add_assign(&mut self, o: Self) {
        self.rounds += o.rounds;
        self.routes_scanned += o.routes_scanned;
        self.label_updates += o.label_updates;
    }
}

/// How a label was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parent {
    None,
    Source,
    /// Copied from the previous round.
    Carry,
    Ride {
        route: RouteId,
        trip: TripId,
        board: usize,
    },
    Walk {
        from: StopId,
    },
}

#[derive(Clone, Copy, Debug)]
pub struct RaptorOptions {
    pub max_transfers: usize,
    /// Shrink the working destination list during a run.
    pub prune_destinations: bool,
    /// Record parent pointers for journey reconstruction.
    pub record_parents: bool,
}

impl RaptorOptions {
    pub fn new(max_transfers: usize) -> Self {
        RaptorOptions {
            max_transfers,
            prune_destinations: true,
            record_parents: false,
        }
    }
}

/// Reusable search state for one source.
pub struct RaptorSearch<'a> {
    tt: &'a Timetable,
    opts: RaptorOptions,
    route_filter: Option<&'a [bool]>,
    labels: Vec<Vec<Time>>,
    parents: Vec<Vec<Parent>>,
    marked: Vec<bool>,
    in_dlist: Vec<bool>,
    pub counters: RaptorCounters,
}

impl<'a> RaptorSearch<'a> {
    pub fn new(tt: &'a Timetable, opts: RaptorOptions) -> Self {
        let rounds = opts.max_transfers + 2;
        let n = tt.num_stops();
        RaptorSearch {
            tt,
            opts,
            route_filter: None,
            labels: vec![vec![INFINITY; n]; rounds],
            parents: if opts.record_parents {
                vec![vec![Parent::None; n]; rounds]
            } else {
                Vec::new()
            },
            marked: vec![false; n],
            in_dlist: vec![false; n],
            counters: RaptorCounters::default(),
        }
    }

    /// Only routes flagged `true` are collected for scanning.
    pub fn with_route_filter(mut self, flags: &'a [bool]) -> Self {
        self.route_filter = Some(flags);
        self
    }

    fn set(&mut self, k: usize, s: StopId, t: Time, p: Parent) {
        self.labels[k][s] = t;
        if self.opts.record_parents {
            self.parents[k][s] = p;
        }
    }

    fn dlist_max(&self, dlist: &[StopId], k: usize) -> Time {
        dlist.iter().map(|&d| self.labels[k][d]).max().unwrap_or(0)
    }

    /// One departure. Labels from previous (later) departures are kept.
    pub fn run(&mut self, s_o: StopId, tau: Time, dlist: &[StopId]) {
        let tt = self.tt;
        let rounds = self.labels.len();
        let mut marked_list = Vec::new();
        for (s, f) in tt.walk_from(s_o) {
            let a = tau.saturating_add(f);
            if a < self.labels[0][s] {
                self.set(0, s, a, Parent::Source);
                self.counters.label_updates += 1;
            }
            if !self.marked[s] {
                self.marked[s] = true;
                marked_list.push(s);
            }
        }
        for &d in dlist {
            self.in_dlist[d] = true;
        }
        let mut working: Vec<StopId> = dlist.to_vec();
        let mut queue: BTreeMap<RouteId, usize> = BTreeMap::new();

        for k in 1..rounds {
            if marked_list.is_empty() {
                break;
            }
            self.counters.rounds += 1;
            let (prev, cur) = self.labels.split_at_mut(k);
            let (prev, cur) = (&prev[k - 1], &mut cur[0]);
            for s in 0..prev.len() {
                if prev[s] < cur[s] {
                    cur[s] = prev[s];
                    if self.opts.record_parents {
                        self.parents[k][s] = Parent::Carry;
                    }
                }
            }
            if self.opts.prune_destinations {
                let min_marked = marked_list
                    .iter()
                    .map(|&s| self.labels[k - 1][s])
                    .min()
                    .unwrap_or(INFINITY);
                // A destination reached no later than every stop still being
                // expanded cannot improve.
                working.retain(|&d| self.labels[k][d] > min_marked);
                for d in dlist {
                    self.in_dlist[*d] = false;
                }
                for &d in &working {
                    self.in_dlist[d] = true;
                }
                if working.is_empty() {
                    for &s in &marked_list {
                        self.marked[s] = false;
                    }
                    marked_list.clear();
                    break;
                }
            }
            let mut bound = self.dlist_max(&working, k);

            queue.clear();
            for &s in &marked_list {
                self.marked[s] = false;
                for &(r, i) in tt.stop_routes(s) {
                    if i + 1 == tt.routes[r].len() {
                        continue;
                    }
                    if let Some(flags) = self.route_filter {
                        if !flags[r] {
                            continue;
                        }
                    }
                    queue
                        .entry(r)
                        .and_modify(|e| *e = (*e).min(i))
                        .or_insert(i);
                }
            }
            marked_list.clear();

            for (&r, &start) in &queue {
                self.counters.routes_scanned += 1;
                let route = &tt.routes[r];
                let mut current: Option<(TripId, usize)> = None;
                for j in start..route.len() {
                    let s = route.stops[j];
                    if let Some((t, board)) = current {
                        let a = tt.trips[t].arrivals[j];
                        if a < self.labels[k][s].min(bound) {
                            self.set(k, s, a, Parent::Ride { route: r, trip: t, board });
                            self.counters.label_updates += 1;
                            if !self.marked[s] {
                                self.marked[s] = true;
                                marked_list.push(s);
                            }
                            if self.in_dlist[s] {
                                bound = self.dlist_max(&working, k);
                            }
                        }
                    }
                    if j + 1 < route.len() {
                        let ready = self.labels[k - 1][s];
                        let can_improve = match current {
                            None => ready < INFINITY,
                            Some((t, _)) => ready <= tt.trips[t].departures[j],
                        };
                        if can_improve {
                            if let Some(t) = tt.earliest_trip(r, j, ready) {
                                if current.is_none_or(|(c, _)| t < c) {
                                    current = Some((t, j));
                                }
                            }
                        }
                    }
                }
            }

            let ridden: Vec<StopId> = marked_list.clone();
            for s in ridden {
                let here = self.labels[k][s];
                for &(s2, f) in tt.footpaths.neighbors(s) {
                    let a = here.saturating_add(f);
                    if a < self.labels[k][s2].min(bound) {
                        self.set(k, s2, a, Parent::Walk { from: s });
                        self.counters.label_updates += 1;
                        if !self.marked[s2] {
                            self.marked[s2] = true;
                            marked_list.push(s2);
                        }
                        if self.in_dlist[s2] {
                            bound = self.dlist_max(&working, k);
                        }
                    }
                }
            }
        }
        for &s in &marked_list {
            self.marked[s] = false;
        }
        for &d in dlist {
            self.in_dlist[d] = false;
        }
    }

    /// Labels indexed by transfer count for `d`.
    pub fn transfer_labels(&self, d: StopId) -> Vec<Time> {
        let mut out = Vec::with_capacity(self.labels.len() - 1);
        let mut best = self.labels[0][d];
        for k in 1..self.labels.len() {
            best = best.min(self.labels[k][d]);
            out.push(best);
        }
        out
    }

    pub fn pareto(&self, d: StopId) -> ParetoSet {
        pareto::from_labels(&self.transfer_labels(d))
    }

    /// Routes and trips on the journey behind the label at `(k, s)`.
    pub fn journey(&self, k: usize, s: StopId) -> Vec<(RouteId, TripId)> {
        assert!(self.opts.record_parents, "parents not recorded");
        let mut out = Vec::new();
        let (mut k, mut s) = (k, s);
        let limit = self.labels.len() * (self.tt.num_stops() + 2);
        for _ in 0..limit {
            match self.parents[k][s] {
                Parent::None | Parent::Source => break,
                Parent::Carry => k -= 1,
                Parent::Walk { from } => s = from,
                Parent::Ride { route, trip, board } => {
                    out.push((route, trip));
                    s = self.tt.routes[route].stops[board];
                    k -= 1;
                }
            }
        }
        out.reverse();
        out
    }

    /// Journeys for each Pareto entry towards `d`, as ride lists.
    pub fn pareto_journeys(&self, d: StopId) -> Vec<Vec<(RouteId, TripId)>> {
        self.pareto(d)
            .iter()
            .map(|&(a, n)| {
                let k = (0..=n + 1)
                    .find(|&k| self.labels[k][d] == a)
                    .unwrap_or(n + 1);
                self.journey(k, d)
            })
            .collect()
    }
}

/// Distinct source departure times (latest first): every trip departure
/// from a stop walkable from `s_o`, minus the walk.
pub fn departure_times(tt: &Timetable, s_o: StopId) -> Vec<Time> {
    let mut out = BTreeSet::new();
    for (s, f) in tt.walk_from(s_o) {
        for &(r, i) in tt.stop_routes(s) {
            let route = &tt.routes[r];
            if i + 1 == route.len() {
                continue;
            }
            for t in route.trips() {
                if let Some(dep) = tt.trips[t].departures[i].checked_sub(f) {
                    out.insert(dep);
                }
            }
        }
    }
    out.into_iter().rev().collect()
}

/// Per-departure rows, in the order of the input departure list.
pub type Profile = Vec<(Time, ParetoSet)>;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct OtmResult {
    pub profiles: BTreeMap<StopId, Profile>,
    pub counters: RaptorCounters,
}

/// Bicriterion query for one departure.
pub fn raptor_query(
    tt: &Timetable,
    s_o: StopId,
    s_d: StopId,
    tau: Time,
    max_transfers: usize,
) -> Result<ParetoSet, TimetableError> {
    Ok(raptor_query_counted(tt, s_o, s_d, tau, max_transfers, None)?.0)
}

/// `raptor_query` plus counters, optionally restricted to flagged routes.
pub fn raptor_query_counted(
    tt: &Timetable,
    s_o: StopId,
    s_d: StopId,
    tau: Time,
    max_transfers: usize,
    route_filter: Option<&[bool]>,
) -> Result<(ParetoSet, RaptorCounters), TimetableError> {
    tt.check_stop(s_o)?;
    tt.check_stop(s_d)?;
    let mut search = RaptorSearch::new(tt, RaptorOptions::new(max_transfers));
    if let Some(f) = route_filter {
        search = search.with_route_filter(f);
    }
    search.run(s_o, tau, &[s_d]);
    Ok((search.pareto(s_d), search.counters))
}

/// One-to-many range query over `tlist` (processed latest first).
pub fn otm_rraptor(
    tt: &Timetable,
    s_o: StopId,
    dlist: &[StopId],
    max_transfers: usize,
    tlist: &[Time],
) -> Result<OtmResult, TimetableError> {
    otm_rraptor_with(tt, s_o, dlist, tlist, RaptorOptions::new(max_transfers))
}

pub fn otm_rraptor_with(
    tt: &Timetable,
    s_o: StopId,
    dlist: &[StopId],
    tlist: &[Time],
    opts: RaptorOptions,
) -> Result<OtmResult, TimetableError> {
    tt.check_stop(s_o)?;
    for &d in dlist {
        tt.check_stop(d)?;
    }
    let mut dlist = dlist.to_vec();
    dlist.sort_unstable();
    dlist.dedup();
    let mut order: Vec<Time> = tlist.to_vec();
    order.sort_unstable_by(|a, b| b.cmp(a));
    order.dedup();
    let mut search = RaptorSearch::new(tt, opts);
    let mut rows: BTreeMap<Time, Vec<ParetoSet>> = BTreeMap::new();
    for &tau in &order {
        search.run(s_o, tau, &dlist);
        rows.insert(tau, dlist.iter().map(|&d| search.pareto(d)).collect());
    }
    let mut profiles = BTreeMap::new();
    for (x, &d) in dlist.iter().enumerate() {
        let profile: Profile = tlist
            .iter()
            .map(|tau| (*tau, rows[tau][x].clone()))
            .collect();
        profiles.insert(d, profile);
    }
    Ok(OtmResult {
        profiles,
        counters: search.counters,
    })
}

/// Range query for a single destination.
pub fn rraptor(
    tt: &Timetable,
    s_o: StopId,
    s_d: StopId,
    max_transfers: usize,
    tlist: &[Time],
) -> Result<Profile, TimetableError> {
    let mut res = otm_rraptor(tt, s_o, &[s_d], max_transfers, tlist)?;
    Ok(res.profiles.remove(&s_d).unwrap_or_default())
}
