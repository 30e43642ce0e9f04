//! Timetable model: stops, routes, trips and a closed footpath graph.

mod footpaths;
pub mod gtfs;
pub mod snapshot;

use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use footpaths::{build_footpaths, haversine_m, ClosureStats, FootpathError, FootpathGraph};

/// Seconds since midnight of the service day. Values past 24h are kept.
pub type Time = u32;
pub type StopId = usize;
pub type RouteId = usize;
pub type TripId = usize;

pub const INFINITY: Time = Time::MAX;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TimetableError {
    #[error("unknown stop id {0}")]
    UnknownStop(StopId),
    #[error("invalid timetable: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stop {
    pub code: String,
    pub lat: f64,
    pub lon: f64,
}

/// Trips of a route occupy the contiguous id range
/// `first_trip..first_trip + num_trips`, ordered by departure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Route {
    pub code: String,
    pub stops: Vec<StopId>,
    pub first_trip: TripId,
    pub num_trips: usize,
}

impl Route {
    pub fn len(&self) -> usize {
        self.stops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stops.is_empty()
    }

    pub fn trips(&self) -> Range<TripId> {
        self.first_trip..self.first_trip + self.num_trips
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trip {
    pub code: String,
    pub route: RouteId,
    pub arrivals: Vec<Time>,
    pub departures: Vec<Time>,
}

impl Trip {
    pub fn len(&self) -> usize {
        self.arrivals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrivals.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimetableStats {
    pub stops: usize,
    pub routes: usize,
    pub trips: usize,
    pub footpaths: usize,
    pub stopevents: usize,
}

#[derive(Clone, Debug)]
pub struct Timetable {
    pub stops: Vec<Stop>,
    pub routes: Vec<Route>,
    pub trips: Vec<Trip>,
    pub footpaths: FootpathGraph,
    /// Minimum change time per stop. The engines assume zero; `validate`
    /// rejects anything else.
    pub change_times: Vec<Time>,
    stop_routes: Vec<Vec<(RouteId, usize)>>,
}

impl Timetable {
    /// Assembles a timetable and checks every structural invariant.
    pub fn new(
        stops: Vec<Stop>,
        routes: Vec<Route>,
        trips: Vec<Trip>,
        footpaths: FootpathGraph,
    ) -> Result<Self, TimetableError> {
        let mut stop_routes = vec![Vec::new(); stops.len()];
        for (r, route) in routes.iter().enumerate() {
            for (i, &s) in route.stops.iter().enumerate() {
                if s >= stops.len() {
                    return Err(TimetableError::Invalid(format!(
                        "route {r} references stop {s}"
                    )));
                }
                stop_routes[s].push((r, i));
            }
        }
        let change_times = vec![0; stops.len()];
        let tt = Timetable {
            stops,
            routes,
            trips,
            footpaths,
            change_times,
            stop_routes,
        };
        tt.validate()?;
        Ok(tt)
    }

    pub fn num_stops(&self) -> usize {
        self.stops.len()
    }

    pub fn num_routes(&self) -> usize {
        self.routes.len()
    }

    pub fn num_trips(&self) -> usize {
        self.trips.len()
    }

    /// Every (route, index) pair at which a stop is served.
    pub fn stop_routes(&self, s: StopId) -> &[(RouteId, usize)] {
        &self.stop_routes[s]
    }

    /// Stops reachable on foot from `s`, including `s` itself at zero cost.
    pub fn walk_from(&self, s: StopId) -> impl Iterator<Item = (StopId, Time)> + '_ {
        std::iter::once((s, 0)).chain(self.footpaths.neighbors(s).iter().copied())
    }

    /// Walking time between two stops, zero for the same stop.
    pub fn walk_time(&self, a: StopId, b: StopId) -> Option<Time> {
        if a == b {
            Some(0)
        } else {
            self.footpaths.duration(a, b)
        }
    }

    /// N(s): footpath neighbours plus `s`, sorted.
    pub fn neighborhood(&self, s: StopId) -> Result<Vec<StopId>, TimetableError> {
        if s >= self.stops.len() {
            return Err(TimetableError::UnknownStop(s));
        }
        let mut out: Vec<StopId> = self.walk_from(s).map(|(x, _)| x).collect();
        out.sort_unstable();
        Ok(out)
    }

    pub fn check_stop(&self, s: StopId) -> Result<(), TimetableError> {
        if s < self.stops.len() {
            Ok(())
        } else {
            Err(TimetableError::UnknownStop(s))
        }
    }

    pub fn trip_stop(&self, t: TripId, i: usize) -> StopId {
        self.routes[self.trips[t].route].stops[i]
    }

    /// Earliest trip of route `r` departing stop index `i` at or after
    /// `time`; ties go to the lowest trip id.
    pub fn earliest_trip(&self, r: RouteId, i: usize, time: Time) -> Option<TripId> {
        let route = &self.routes[r];
        let trips = &self.trips[route.trips()];
        let k = trips.partition_point(|t| t.departures[i] < time);
        (k < trips.len()).then(|| route.first_trip + k)
    }

    pub fn stop_by_code(&self, code: &str) -> Option<StopId> {
        self.stops.iter().position(|s| s.code == code)
    }

    pub fn trip_by_code(&self, code: &str) -> Option<TripId> {
        self.trips.iter().position(|t| t.code == code)
    }

    pub fn num_stop_events(&self) -> usize {
        self.trips.iter().map(Trip::len).sum()
    }

    /// Stop events (arrivals and departures of all trips) at each stop.
    pub fn events_per_stop(&self) -> Vec<usize> {
        let mut out = vec![0usize; self.stops.len()];
        for route in &self.routes {
            for &s in &route.stops {
                out[s] += route.num_trips;
            }
        }
        out
    }

    pub fn stats(&self) -> TimetableStats {
        TimetableStats {
            stops: self.stops.len(),
            routes: self.routes.len(),
            trips: self.trips.len(),
            footpaths: self.footpaths.num_edges(),
            stopevents: self.num_stop_events(),
        }
    }

    /// The same stops and footpaths with only the listed routes.
    pub fn restrict_routes(&self, keep: &[RouteId]) -> Timetable {
        let mut routes = Vec::with_capacity(keep.len());
        let mut trips = Vec::new();
        for &r in keep {
            let route = &self.routes[r];
            routes.push(Route {
                first_trip: trips.len(),
                ..route.clone()
            });
            trips.extend(self.trips[route.trips()].iter().map(|t| Trip {
                route: routes.len() - 1,
                ..t.clone()
            }));
        }
        Timetable::new(self.stops.clone(), routes, trips, self.footpaths.clone())
            .expect("a route subset keeps every invariant")
    }

    /// Re-checks the route, trip, footpath and index invariants.
    pub fn validate(&self) -> Result<(), TimetableError> {
        let bad = |m: String| Err(TimetableError::Invalid(m));
        let mut expected_first = 0;
        for (r, route) in self.routes.iter().enumerate() {
            if route.stops.len() < 2 {
                return bad(format!("route {r} has fewer than two stops"));
            }
            if route.first_trip != expected_first || route.num_trips == 0 {
                return bad(format!("route {r} trip range is not contiguous"));
            }
            expected_first += route.num_trips;
            for t in route.trips() {
                let trip = self.trips.get(t).ok_or_else(|| {
                    TimetableError::Invalid(format!("route {r} references trip {t}"))
                })?;
                if trip.route != r {
                    return bad(format!("trip {t} does not point back to route {r}"));
                }
                if trip.arrivals.len() != route.len() || trip.departures.len() != route.len() {
                    return bad(format!("trip {t} length differs from route {r}"));
                }
                for i in 0..route.len() {
                    if trip.departures[i] < trip.arrivals[i] {
                        return bad(format!("trip {t} departs before arriving at index {i}"));
                    }
                    if i > 0 && trip.arrivals[i] <= trip.arrivals[i - 1] {
                        return bad(format!("trip {t} arrivals not increasing at index {i}"));
                    }
                    if i > 0 && trip.arrivals[i] < trip.departures[i - 1] {
                        return bad(format!("trip {t} arrives before departing at index {i}"));
                    }
                }
                if t > route.first_trip {
                    let prev = &self.trips[t - 1];
                    for i in 0..route.len() {
                        if prev.arrivals[i] > trip.arrivals[i]
                            || prev.departures[i] > trip.departures[i]
                        {
                            return bad(format!("trip {t} overtakes trip {} at index {i}", t - 1));
                        }
                    }
                }
            }
        }
        if expected_first != self.trips.len() {
            return bad("trips not covered by routes".into());
        }
        if self.footpaths.num_stops() != self.stops.len() {
            return bad("footpath graph size differs from stop count".into());
        }
        self.footpaths.validate().map_err(TimetableError::Invalid)?;
        for (s, entries) in self.stop_routes.iter().enumerate() {
            for &(r, i) in entries {
                if self.routes[r].stops[i] != s {
                    return bad(format!("stop index entry ({r},{i}) does not serve stop {s}"));
                }
            }
        }
        if self.change_times.iter().any(|&c| c != 0) {
            return bad("non-zero change times are not supported by the engines".into());
        }
        Ok(())
    }
}
