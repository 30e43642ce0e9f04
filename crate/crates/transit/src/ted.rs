//! Layered time-expanded graph: the brute-force reference for every engine.
//!
//! Each layer holds departure, arrival and waiting nodes. Riding and waiting
//! stay in a layer; alighting and walking to another boarding point moves one
//! layer up, so layer `n` is reached with exactly `n` transfers.

use crate::pareto::{self, ParetoSet};
use crate::timetable::{StopId, Time, Timetable, TripId, INFINITY};

/// Journeys arriving later than this after the query time are discarded.
pub const HORIZON: Time = 24 * 3600;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Departure { trip: TripId, index: usize },
    Arrival { trip: TripId, index: usize },
    Wait { stop: StopId },
}

#[derive(Clone, Debug)]
pub struct TeGraph {
    layers: usize,
    /// Transfer edges stay in layer 0 (unbounded transfers).
    single_layer: bool,
    time: Vec<Time>,
    kind: Vec<NodeKind>,
    ride: Vec<Vec<usize>>,
    transfer: Vec<Vec<usize>>,
    /// Wait nodes per stop, ascending in time.
    waits: Vec<Vec<usize>>,
}

impl TeGraph {
    /// Graph with `max_transfers + 1` layers.
    pub fn build(tt: &Timetable, max_transfers: usize) -> Self {
        Self::build_inner(tt, max_transfers + 1, false)
    }

    /// One layer with transfers inside it: earliest arrival only.
    pub fn build_single_criterion(tt: &Timetable) -> Self {
        Self::build_inner(tt, 1, true)
    }

    fn build_inner(tt: &Timetable, layers: usize, single_layer: bool) -> Self {
        let mut time = Vec::new();
        let mut kind = Vec::new();
        let mut dep_node = Vec::with_capacity(tt.num_trips());
        let mut arr_node = Vec::with_capacity(tt.num_trips());
        for (t, trip) in tt.trips.iter().enumerate() {
            let len = trip.len();
            let mut d = vec![usize::MAX; len];
            let mut a = vec![usize::MAX; len];
            for i in 0..len {
                if i + 1 < len {
                    d[i] = time.len();
                    time.push(trip.departures[i]);
                    kind.push(NodeKind::Departure { trip: t, index: i });
                }
                if i > 0 {
                    a[i] = time.len();
                    time.push(trip.arrivals[i]);
                    kind.push(NodeKind::Arrival { trip: t, index: i });
                }
            }
            dep_node.push(d);
            arr_node.push(a);
        }
        // Distinct departure times per stop, each a waiting node.
        let mut boardings: Vec<Vec<(Time, usize)>> = vec![Vec::new(); tt.num_stops()];
        for (t, trip) in tt.trips.iter().enumerate() {
            for i in 0..trip.len() - 1 {
                boardings[tt.trip_stop(t, i)].push((trip.departures[i], dep_node[t][i]));
            }
        }
        let mut waits = vec![Vec::new(); tt.num_stops()];
        let mut ride: Vec<Vec<usize>> = vec![Vec::new(); time.len()];
        for (s, list) in boardings.iter_mut().enumerate() {
            list.sort_unstable();
            for &(tm, dep) in list.iter() {
                let need_new = waits[s]
                    .last()
                    .is_none_or(|&w: &usize| time[w] != tm);
                if need_new {
                    let w = time.len();
                    time.push(tm);
                    kind.push(NodeKind::Wait { stop: s });
                    ride.push(Vec::new());
                    if let Some(&prev) = waits[s].last() {
                        ride[prev].push(w);
                    }
                    waits[s].push(w);
                }
                let w = *waits[s].last().unwrap();
                ride[w].push(dep);
            }
        }
        for (t, trip) in tt.trips.iter().enumerate() {
            for i in 0..trip.len() - 1 {
                ride[dep_node[t][i]].push(arr_node[t][i + 1]);
                if i > 0 {
                    ride[arr_node[t][i]].push(dep_node[t][i]);
                }
            }
        }
        let mut transfer = vec![Vec::new(); time.len()];
        for (t, trip) in tt.trips.iter().enumerate() {
            for i in 1..trip.len() {
                let at = tt.trip_stop(t, i);
                let node = arr_node[t][i];
                for (s, f) in tt.walk_from(at) {
                    let ready = trip.arrivals[i].saturating_add(f);
                    let k = waits[s].partition_point(|&w| time[w] < ready);
                    if k < waits[s].len() {
                        transfer[node].push(waits[s][k]);
                    }
                }
            }
        }
        TeGraph {
            layers,
            single_layer,
            time,
            kind,
            ride,
            transfer,
            waits,
        }
    }

    pub fn num_layers(&self) -> usize {
        self.layers
    }

    pub fn nodes_per_layer(&self) -> usize {
        self.time.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.layers * self.time.len()
    }

    pub fn num_wait_nodes(&self) -> usize {
        self.waits.iter().map(Vec::len).sum()
    }

    /// Number of edges crossing from one layer to the next.
    pub fn num_layer_edges(&self) -> usize {
        if self.single_layer {
            0
        } else {
            (self.layers - 1) * self.transfer.iter().map(Vec::len).sum::<usize>()
        }
    }

    /// Best arrival at `s_d` per layer (`INFINITY` when unreached).
    pub fn arrivals_per_layer(
        &self,
        tt: &Timetable,
        s_o: StopId,
        s_d: StopId,
        tau: Time,
    ) -> Vec<Time> {
        let n = self.time.len();
        let mut best = vec![INFINITY; self.layers];
        if let Some(f) = tt.walk_time(s_o, s_d) {
            best[0] = tau.saturating_add(f);
        }
        let mut reached = vec![false; self.layers * n];
        let mut stack = Vec::new();
        for (s, f) in tt.walk_from(s_o) {
            let ready = tau.saturating_add(f);
            let k = self.waits[s].partition_point(|&w| self.time[w] < ready);
            if let Some(&w) = self.waits[s].get(k) {
                if !reached[w] {
                    reached[w] = true;
                    stack.push(w);
                }
            }
        }
        while let Some(x) = stack.pop() {
            let (layer, local) = (x / n, x % n);
            let mut visit = |y: usize, stack: &mut Vec<usize>| {
                if !reached[y] {
                    reached[y] = true;
                    stack.push(y);
                }
            };
            for &y in &self.ride[local] {
                visit(layer * n + y, &mut stack);
            }
            if self.single_layer {
                for &y in &self.transfer[local] {
                    visit(y, &mut stack);
                }
            } else if layer + 1 < self.layers {
                for &y in &self.transfer[local] {
                    visit((layer + 1) * n + y, &mut stack);
                }
            }
            if let NodeKind::Arrival { trip, index } = self.kind[local] {
                let at = tt.trip_stop(trip, index);
                if let Some(f) = tt.walk_time(at, s_d) {
                    let a = self.time[local].saturating_add(f);
                    best[layer] = best[layer].min(a);
                }
            }
        }
        let limit = tau.saturating_add(HORIZON);
        for b in &mut best {
            if *b > limit {
                *b = INFINITY;
            }
        }
        best
    }

    pub fn pareto(&self, tt: &Timetable, s_o: StopId, s_d: StopId, tau: Time) -> ParetoSet {
        pareto::from_labels(&self.arrivals_per_layer(tt, s_o, s_d, tau))
    }
}

/// Exact bicriterion Pareto set: builds the layered graph and searches it.
pub fn oracle_pareto(
    tt: &Timetable,
    s_o: StopId,
    s_d: StopId,
    tau: Time,
    max_transfers: usize,
) -> ParetoSet {
    TeGraph::build(tt, max_transfers).pareto(tt, s_o, s_d, tau)
}

/// Earliest arrival regardless of transfers.
pub fn oracle_earliest_arrival(tt: &Timetable, s_o: StopId, s_d: StopId, tau: Time) -> Time {
    TeGraph::build_single_criterion(tt).arrivals_per_layer(tt, s_o, s_d, tau)[0]
}

/// Enumerates every journey (any boardable trip, any alighting index) up to
/// `max_transfers + 1` rides. Exponential; for tiny instances only.
pub fn exhaustive_pareto(
    tt: &Timetable,
    s_o: StopId,
    s_d: StopId,
    tau: Time,
    max_transfers: usize,
) -> ParetoSet {
    let limit = tau.saturating_add(HORIZON);
    let mut best = vec![INFINITY; max_transfers + 1];
    fn explore(
        tt: &Timetable,
        at: StopId,
        now: Time,
        rides: usize,
        s_d: StopId,
        limit: Time,
        best: &mut Vec<Time>,
    ) {
        if let Some(f) = tt.walk_time(at, s_d) {
            let a = now.saturating_add(f);
            let n = rides.saturating_sub(1);
            if a <= limit && a < best[n] {
                best[n] = a;
            }
        }
        if rides == best.len() {
            return;
        }
        for (s, f) in tt.walk_from(at) {
            let ready = now.saturating_add(f);
            for &(r, j) in tt.stop_routes(s) {
                let route = &tt.routes[r];
                if j + 1 == route.len() {
                    continue;
                }
                for t in route.trips() {
                    let trip = &tt.trips[t];
                    if trip.departures[j] < ready {
                        continue;
                    }
                    for k in j + 1..route.len() {
                        if trip.arrivals[k] > limit {
                            break;
                        }
                        explore(tt, route.stops[k], trip.arrivals[k], rides + 1, s_d, limit, best);
                    }
                }
            }
        }
    }
    explore(tt, s_o, tau, 0, s_d, limit, &mut best);
    pareto::from_labels(&best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timetable::test_support::build;

    fn line() -> Timetable {
        // 0 -> 1 -> 2 on route 0, 2 -> 3 on route 1, walk 1 - 4 (60 s),
        // route 2: 4 -> 3 slow.
        build(
            5,
            &[
                (&[0, 1, 2], &[&[100, 200, 300], &[400, 500, 600]]),
                (&[2, 3], &[&[350, 450], &[650, 750]]),
                (&[4, 3], &[&[270, 900]]),
            ],
            &[(1, 4, 60)],
        )
    }

    #[test]
    fn direct_and_transfer_journeys() {
        let tt = line();
        assert_eq!(oracle_pareto(&tt, 0, 2, 0, 3), vec![(300, 0)]);
        // Via route 1 with one transfer; the walk to route 2 is slower.
        assert_eq!(oracle_pareto(&tt, 0, 3, 0, 3), vec![(450, 1)]);
        assert_eq!(oracle_pareto(&tt, 0, 3, 0, 0), vec![]);
        assert_eq!(oracle_pareto(&tt, 0, 4, 0, 3), vec![(260, 0)]);
    }

    #[test]
    fn same_stop_is_zero_length() {
        let tt = line();
        assert_eq!(oracle_pareto(&tt, 2, 2, 1234, 4), vec![(1234, 0)]);
    }

    #[test]
    fn walking_only_counts_as_zero_transfers() {
        let tt = line();
        assert_eq!(oracle_pareto(&tt, 1, 4, 50, 2), vec![(110, 0)]);
    }

    #[test]
    fn unreachable_is_empty() {
        let tt = line();
        assert_eq!(oracle_pareto(&tt, 3, 0, 0, 4), vec![]);
    }

    #[test]
    fn node_count_formula() {
        let tt = line();
        let g = TeGraph::build(&tt, 2);
        let events = tt.num_stop_events();
        let per_layer = 2 * (events - tt.num_trips()) + g.num_wait_nodes();
        assert_eq!(g.nodes_per_layer(), per_layer);
        assert_eq!(g.num_nodes(), 3 * per_layer);
        assert_eq!(TeGraph::build(&tt, 0).num_layer_edges(), 0);
    }

    #[test]
    fn single_criterion_matches_best_pareto_entry() {
        let tt = line();
        for (o, d) in [(0, 3), (0, 2), (1, 3), (4, 3)] {
            let set = oracle_pareto(&tt, o, d, 0, 10);
            let want = set.last().map_or(INFINITY, |e| e.0);
            assert_eq!(oracle_earliest_arrival(&tt, o, d, 0), want);
        }
    }

    #[test]
    fn exhaustive_agrees_on_line() {
        let tt = line();
        for o in 0..5 {
            for d in 0..5 {
                for tau in [0, 150, 380] {
                    assert_eq!(
                        exhaustive_pareto(&tt, o, d, tau, 2),
                        oracle_pareto(&tt, o, d, tau, 2),
                        "{o}->{d}@{tau}"
                    );
                }
            }
        }
    }
}
