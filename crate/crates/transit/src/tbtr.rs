//! Trip-based engines: single-departure query, range query and the
//! one-to-many range query with destination pruning.
//!
//! Reached-index labels are kept per round (`ind[n][t]`: earliest stop index
//! at which trip `t` was reached with at most `n` transfers) so that range
//! runs can keep them across departures without losing fewer-transfer
//! journeys of earlier departures.

use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use crate::pareto::{self, ParetoSet};
use crate::raptor::Profile;
use crate::timetable::{StopId, Time, Timetable, TimetableError, TripId, INFINITY};
use crate::transfers::TripTransferSet;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TbtrCounters {
    pub rounds: usize,
    pub segments_scanned: usize,
    pub transfers_examined: usize,
    pub label_updates: usize,
}

impl std::ops::AddAssign for TbtrCounters {
    fn add_assign(&mut self, o: Self) {
        self.rounds += o.rounds;
        self.segments_scanned += o.segments_scanned;
        self.transfers_examined += o.transfers_examined;
        self.label_updates += o.label_updates;
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TbtrOptions {
    pub max_transfers: usize,
    /// Replace the working destination list by the round's scope.
    pub prune_destinations: bool,
    /// Record segment parents and every destination hit that reaches or
    /// ties the best label, for journey reconstruction.
    pub record_journeys: bool,
}

impl TbtrOptions {
    pub fn new(max_transfers: usize) -> Self {
        TbtrOptions {
            max_transfers,
            prune_destinations: true,
            record_journeys: false,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Segment {
    trip: TripId,
    board: usize,
    end: usize,
    parent: Option<usize>,
}

#[derive(Clone, Copy, Debug)]
struct Hit {
    slot: usize,
    round: usize,
    arrival: Time,
    segment: usize,
}

/// A reconstructed journey: trips in riding order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Journey {
    pub arrival: Time,
    pub transfers: usize,
    pub trips: Vec<TripId>,
}

/// Search state for a fixed destination list.
pub struct TbtrSearch<'a> {
    tt: &'a Timetable,
    transfers: &'a TripTransferSet,
    opts: TbtrOptions,
    trip_filter: Option<&'a [bool]>,
    ind: Vec<Vec<usize>>,
    dests: Vec<StopId>,
    /// Per route: `(stop index, walk to destination, slot)` sorted by index.
    targets: Vec<Vec<(usize, Time, usize)>>,
    best: Vec<Vec<Time>>,
    segments: Vec<Segment>,
    hits: Vec<Hit>,
    pub counters: TbtrCounters,
}

impl<'a> TbtrSearch<'a> {
    pub fn new(
        tt: &'a Timetable,
        transfers: &'a TripTransferSet,
        dlist: &[StopId],
        opts: TbtrOptions,
    ) -> Self {
        let rounds = opts.max_transfers + 1;
        let ind = vec![
            tt.trips.iter().map(|t| t.arrivals.len() - 1).collect::<Vec<_>>();
            rounds
        ];
        let mut targets = vec![Vec::new(); tt.num_routes()];
        for (slot, &d) in dlist.iter().enumerate() {
            for (s, f) in tt.walk_from(d) {
                for &(r, i) in tt.stop_routes(s) {
                    if i > 0 {
                        targets[r].push((i, f, slot));
                    }
                }
            }
        }
        for l in &mut targets {
            l.sort_unstable();
        }
        TbtrSearch {
            tt,
            transfers,
            opts,
            trip_filter: None,
            ind,
            dests: dlist.to_vec(),
            targets,
            best: vec![vec![INFINITY; rounds]; dlist.len()],
            segments: Vec::new(),
            hits: Vec::new(),
            counters: TbtrCounters::default(),
        }
    }

    /// Only trips flagged `true` are ever enqueued; a transfer to an
    /// unflagged trip moves to the next flagged trip of its route.
    pub fn with_trip_filter(mut self, flags: &'a [bool]) -> Self {
        self.trip_filter = Some(flags);
        self
    }

    pub fn destinations(&self) -> &[StopId] {
        &self.dests
    }

    fn lower(&mut self, slot: usize, from_round: usize, a: Time) {
        for b in &mut self.best[slot][from_round..] {
            if a < *b {
                *b = a;
            }
        }
    }

    fn enqueue(
        &mut self,
        queue: &mut Vec<usize>,
        t: TripId,
        j: usize,
        n: usize,
        parent: Option<usize>,
    ) {
        let route = &self.tt.routes[self.tt.trips[t].route];
        let t = match self.trip_filter {
            // Waiting for a later flagged trip of the same route is always
            // possible, so an unflagged target hands over to it.
            Some(flags) => match (t..route.first_trip + route.num_trips).find(|&u| flags[u]) {
                Some(u) => u,
                None => return,
            },
            None => t,
        };
        let end = self.ind[n][t];
        if j >= end {
            return;
        }
        self.segments.push(Segment {
            trip: t,
            board: j,
            end,
            parent,
        });
        queue.push(self.segments.len() - 1);
        for later in t..route.first_trip + route.num_trips {
            if self.ind[n][later] <= j {
                break;
            }
            for m in n..self.ind.len() {
                if self.ind[m][later] <= j {
                    break;
                }
                self.ind[m][later] = j;
            }
        }
    }

    fn working_max(&self, working: &[usize], n: usize) -> Time {
        working.iter().map(|&x| self.best[x][n]).max().unwrap_or(0)
    }

    /// One departure; labels from previous (later) departures are kept.
    pub fn run(&mut self, s_o: StopId, tau: Time) {
        let tt = self.tt;
        let record = self.opts.record_journeys;
        let last_round = self.opts.max_transfers;
        self.segments.clear();
        self.hits.clear();

        let mut slot_of = BTreeMap::new();
        for (slot, &d) in self.dests.iter().enumerate() {
            slot_of.entry(d).or_insert_with(Vec::new).push(slot);
        }
        for (s, f) in tt.walk_from(s_o) {
            if let Some(slots) = slot_of.get(&s) {
                for &slot in slots {
                    if tau + f < self.best[slot][0] {
                        self.counters.label_updates += 1;
                    }
                    self.lower(slot, 0, tau + f);
                }
            }
        }

        let mut queue = Vec::new();
        for (s, f) in tt.walk_from(s_o) {
            for &(r, i) in tt.stop_routes(s) {
                if i + 1 == tt.routes[r].len() {
                    continue;
                }
                if let Some(t) = tt.earliest_trip(r, i, tau + f) {
                    self.enqueue(&mut queue, t, i, 0, None);
                }
            }
        }

        let mut working: Vec<usize> = (0..self.dests.len()).collect();
        let mut active = vec![true; self.dests.len()];
        let mut seen = HashSet::new();
        let mut n = 0;
        while !queue.is_empty() && n <= last_round {
            self.counters.rounds += 1;
            let mut next = Vec::new();
            seen.clear();
            let mut bound = self.working_max(&working, n);
            let mut first_arrival = INFINITY;
            for q in 0..queue.len() {
                let seg = self.segments[queue[q]];
                self.counters.segments_scanned += 1;
                let trip = &tt.trips[seg.trip];
                let targets = &self.targets[trip.route];
                let from = targets.partition_point(|e| e.0 <= seg.board);
                let mut touched = false;
                for e in from..targets.len() {
                    let (i, delta, slot) = targets[e];
                    if i > seg.end {
                        break;
                    }
                    if !active[slot] {
                        continue;
                    }
                    let a = trip.arrivals[i] + delta;
                    let current = self.best[slot][n];
                    if a < current {
                        self.counters.label_updates += 1;
                        let mut b = n;
                        while b < self.best[slot].len() && a < self.best[slot][b] {
                            self.best[slot][b] = a;
                            b += 1;
                        }
                        touched = true;
                    }
                    if record && a <= current {
                        self.hits.push(Hit {
                            slot,
                            round: n,
                            arrival: a,
                            segment: queue[q],
                        });
                    }
                }
                if touched {
                    bound = self.working_max(&working, n);
                }
                let next_arrival = trip.arrivals[seg.board + 1];
                first_arrival = first_arrival.min(next_arrival);
                let open = if record {
                    next_arrival <= bound
                } else {
                    next_arrival < bound
                };
                if open && n < last_round {
                    for x in self.transfers.between(seg.trip, seg.board + 1, seg.end) {
                        self.counters.transfers_examined += 1;
                        if seen.insert((x.to_trip, x.to_index)) {
                            self.enqueue(&mut next, x.to_trip, x.to_index, n + 1, Some(queue[q]));
                        }
                    }
                }
            }
            if self.opts.prune_destinations {
                // Later rounds only reach stops after some segment's first
                // alighting; destinations already at or before that are
                // settled for this departure.
                working.retain(|&x| {
                    let keep = if record {
                        first_arrival <= self.best[x][n]
                    } else {
                        first_arrival < self.best[x][n]
                    };
                    active[x] = keep;
                    keep
                });
            }
            queue = next;
            n += 1;
        }
    }

    pub fn pareto_slot(&self, slot: usize) -> ParetoSet {
        pareto::from_labels(&self.best[slot])
    }

    pub fn pareto(&self, d: StopId) -> ParetoSet {
        match self.dests.iter().position(|&x| x == d) {
            Some(slot) => self.pareto_slot(slot),
            None => Vec::new(),
        }
    }

    fn trace(&self, mut seg: usize) -> Vec<TripId> {
        let mut out = vec![self.segments[seg].trip];
        while let Some(p) = self.segments[seg].parent {
            out.push(self.segments[p].trip);
            seg = p;
        }
        out.reverse();
        out
    }

    /// Journeys found by the last run that attain a Pareto entry of `slot`.
    /// Entries inherited from earlier runs without a tie in this run have no
    /// journey here.
    pub fn journeys(&self, slot: usize) -> Vec<Journey> {
        assert!(self.opts.record_journeys, "journeys not recorded");
        let set = self.pareto_slot(slot);
        let mut out: Vec<Journey> = Vec::new();
        for h in self.hits.iter().filter(|h| h.slot == slot) {
            if set.contains(&(h.arrival, h.round)) {
                let j = Journey {
                    arrival: h.arrival,
                    transfers: h.round,
                    trips: self.trace(h.segment),
                };
                if !out.contains(&j) {
                    out.push(j);
                }
            }
        }
        out
    }
}

/// Bicriterion query for one departure.
pub fn tbtr_query(
    tt: &Timetable,
    transfers: &TripTransferSet,
    s_o: StopId,
    s_d: StopId,
    tau: Time,
    max_transfers: usize,
) -> Result<ParetoSet, TimetableError> {
    Ok(tbtr_query_counted(tt, transfers, s_o, s_d, tau, max_transfers, None)?.0)
}

/// `tbtr_query` plus counters, optionally restricted to flagged trips.
pub fn tbtr_query_counted(
    tt: &Timetable,
    transfers: &TripTransferSet,
    s_o: StopId,
    s_d: StopId,
    tau: Time,
    max_transfers: usize,
    trip_filter: Option<&[bool]>,
) -> Result<(ParetoSet, TbtrCounters), TimetableError> {
    tt.check_stop(s_o)?;
    tt.check_stop(s_d)?;
    let mut search = TbtrSearch::new(tt, transfers, &[s_d], TbtrOptions::new(max_transfers));
    if let Some(f) = trip_filter {
        search = search.with_trip_filter(f);
    }
    search.run(s_o, tau);
    Ok((search.pareto_slot(0), search.counters))
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TbtrOtmResult {
    pub profiles: BTreeMap<StopId, Profile>,
    pub counters: TbtrCounters,
}

/// One-to-many range query over `tlist` (processed latest first).
pub fn otm_rtbtr(
    tt: &Timetable,
    transfers: &TripTransferSet,
    s_o: StopId,
    dlist: &[StopId],
    max_transfers: usize,
    tlist: &[Time],
) -> Result<TbtrOtmResult, TimetableError> {
    otm_rtbtr_with(tt, transfers, s_o, dlist, tlist, TbtrOptions::new(max_transfers))
}

pub fn otm_rtbtr_with(
    tt: &Timetable,
    transfers: &TripTransferSet,
    s_o: StopId,
    dlist: &[StopId],
    tlist: &[Time],
    opts: TbtrOptions,
) -> Result<TbtrOtmResult, TimetableError> {
    tt.check_stop(s_o)?;
    for &d in dlist {
        tt.check_stop(d)?;
    }
    let mut dlist = dlist.to_vec();
    dlist.sort_unstable();
    dlist.dedup();
    let mut order = tlist.to_vec();
    order.sort_unstable_by(|a, b| b.cmp(a));
    order.dedup();
    let mut search = TbtrSearch::new(tt, transfers, &dlist, opts);
    let mut rows: BTreeMap<Time, Vec<ParetoSet>> = BTreeMap::new();
    for &tau in &order {
        search.run(s_o, tau);
        rows.insert(tau, (0..dlist.len()).map(|x| search.pareto_slot(x)).collect());
    }
    let mut profiles = BTreeMap::new();
    for (x, &d) in dlist.iter().enumerate() {
        let profile: Profile = tlist.iter().map(|tau| (*tau, rows[tau][x].clone())).collect();
        profiles.insert(d, profile);
    }
    Ok(TbtrOtmResult {
        profiles,
        counters: search.counters,
    })
}

/// Range query for a single destination.
pub fn rtbtr(
    tt: &Timetable,
    transfers: &TripTransferSet,
    s_o: StopId,
    s_d: StopId,
    max_transfers: usize,
    tlist: &[Time],
) -> Result<Profile, TimetableError> {
    let mut res = otm_rtbtr(tt, transfers, s_o, &[s_d], max_transfers, tlist)?;
    Ok(res.profiles.remove(&s_d).unwrap_or_default())
}
