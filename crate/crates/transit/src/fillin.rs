//! Cutstop profile-query workloads and the fill-in trip and route sets.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, Read, Write};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::partition::{Layout, NestedLayout, PartitionLayout};
use crate::raptor::{departure_times, RaptorOptions, RaptorSearch};
use crate::tbtr::{TbtrOptions, TbtrSearch};
use crate::timetable::{RouteId, StopId, Timetable, TripId};
use crate::TripTransferSet;

/// Profile queries grouped by source: `(source, destinations)`.
pub type Workload = Vec<(StopId, Vec<StopId>)>;

/// Number of ordered source-destination pairs.
pub fn count_pairs(workload: &Workload) -> usize {
    workload.iter().map(|(_, d)| d.len()).sum()
}

fn group(pairs: BTreeMap<StopId, BTreeSet<StopId>>) -> Workload {
    pairs
        .into_iter()
        .filter(|(_, d)| !d.is_empty())
        .map(|(s, d)| (s, d.into_iter().collect()))
        .collect()
}

/// Every ordered pair of distinct cutstops.
pub fn enumerate_pqueries_standard(layout: &PartitionLayout) -> Workload {
    let cut = layout.cutstops();
    cut.iter()
        .map(|&c| (c, cut.iter().copied().filter(|&x| x != c).collect::<Vec<_>>()))
        .filter(|(_, d)| !d.is_empty())
        .collect()
}

/// Ordered pairs among level-1 cutstops, plus per parent both directions
/// between its level-1 and level-2 cutstops and the ordered pairs among its
/// level-2 cutstops. The last are needed even with two children: a journey
/// inside one child can detour through its sibling.
pub fn enumerate_pqueries_multilevel(tt: &Timetable, nested: &NestedLayout) -> Workload {
    let mut pairs: BTreeMap<StopId, BTreeSet<StopId>> = BTreeMap::new();
    let level1 = nested.level1_cutstops();
    for &a in &level1 {
        for &b in &level1 {
            if a != b {
                pairs.entry(a).or_default().insert(b);
            }
        }
    }
    for q in 1..=nested.top.p {
        let inner = nested.level2_cutstops(q);
        if inner.is_empty() {
            continue;
        }
        let border: Vec<StopId> = level1
            .iter()
            .copied()
            .filter(|&s| nested.top.incident_cells(tt, s).contains(&q))
            .collect();
        for &a in &border {
            for &b in &inner {
                pairs.entry(a).or_default().insert(b);
                pairs.entry(b).or_default().insert(a);
            }
        }
        for &a in &inner {
            for &b in &inner {
                if a != b {
                    pairs.entry(a).or_default().insert(b);
                }
            }
        }
    }
    group(pairs)
}

pub fn enumerate_pqueries(tt: &Timetable, layout: &Layout) -> Workload {
    match layout {
        Layout::Standard(l) => enumerate_pqueries_standard(l),
        Layout::Nested(n) => enumerate_pqueries_multilevel(tt, n),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FillinEngine {
    /// One-to-many range trip-based search; yields trips.
    Tbtr,
    /// One-to-many range round-based search; yields routes.
    Raptor,
}

impl std::str::FromStr for FillinEngine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "tbtr" | "otm-rtbtr" => Ok(FillinEngine::Tbtr),
            "raptor" | "otm-rraptor" => Ok(FillinEngine::Raptor),
            _ => Err(format!("fill-in engine must be tbtr or raptor, got {s:?}")),
        }
    }
}

/// Sorted fill-in ids. The trip-based flavor also lists the routes of its
/// trips; the round-based flavor has no trips.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FillIn {
    pub trips: Vec<TripId>,
    pub routes: Vec<RouteId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FillInStats {
    pub engine: FillinEngine,
    pub pqueries: usize,
    pub sources: usize,
    /// Fill-in trips as a percentage of all trips (routes for the
    /// round-based flavor).
    pub size_pct: f64,
    pub seconds: f64,
}

fn tbtr_source(
    tt: &Timetable,
    transfers: &TripTransferSet,
    source: StopId,
    dests: &[StopId],
    max_transfers: usize,
) -> BTreeSet<TripId> {
    let opts = TbtrOptions {
        record_journeys: true,
        ..TbtrOptions::new(max_transfers)
    };
    let mut search = TbtrSearch::new(tt, transfers, dests, opts);
    let mut trips = BTreeSet::new();
    for tau in departure_times(tt, source) {
        search.run(source, tau);
        for slot in 0..dests.len() {
            for j in search.journeys(slot) {
                trips.extend(j.trips);
            }
        }
    }
    trips
}

fn raptor_source(
    tt: &Timetable,
    source: StopId,
    dests: &[StopId],
    max_transfers: usize,
) -> BTreeSet<RouteId> {
    let opts = RaptorOptions {
        record_parents: true,
        ..RaptorOptions::new(max_transfers)
    };
    let mut search = RaptorSearch::new(tt, opts);
    let mut routes = BTreeSet::new();
    for tau in departure_times(tt, source) {
        search.run(source, tau, dests);
        for &d in dests {
            for j in search.pareto_journeys(d) {
                routes.extend(j.into_iter().map(|(r, _)| r));
            }
        }
    }
    routes
}

/// Runs one range query per workload source and collects every trip (or
/// route) on the Pareto-optimal journeys found.
pub fn compute_fillin(
    tt: &Timetable,
    transfers: &TripTransferSet,
    workload: &Workload,
    engine: FillinEngine,
    max_transfers: usize,
) -> (FillIn, FillInStats) {
    let start = Instant::now();
    let parts: Vec<BTreeSet<usize>> = workload
        .par_iter()
        .map(|(source, dests)| match engine {
            FillinEngine::Tbtr => tbtr_source(tt, transfers, *source, dests, max_transfers),
            FillinEngine::Raptor => raptor_source(tt, *source, dests, max_transfers),
        })
        .collect();
    let ids: BTreeSet<usize> = parts.into_iter().flatten().collect();
    let fill = match engine {
        FillinEngine::Tbtr => {
            let routes: BTreeSet<RouteId> = ids.iter().map(|&t| tt.trips[t].route).collect();
            FillIn {
                trips: ids.into_iter().collect(),
                routes: routes.into_iter().collect(),
            }
        }
        FillinEngine::Raptor => FillIn {
            trips: Vec::new(),
            routes: ids.into_iter().collect(),
        },
    };
    let (size, total) = match engine {
        FillinEngine::Tbtr => (fill.trips.len(), tt.num_trips()),
        FillinEngine::Raptor => (fill.routes.len(), tt.num_routes()),
    };
    let stats = FillInStats {
        engine,
        pqueries: count_pairs(workload),
        sources: workload.len(),
        size_pct: if total == 0 { 0.0 } else { 100.0 * size as f64 / total as f64 },
        seconds: start.elapsed().as_secs_f64(),
    };
    (fill, stats)
}

/// Text form: a `trips` line and a `routes` line, each followed by the ids.
pub fn write_fillin(fill: &FillIn, mut out: impl Write) -> io::Result<()> {
    for (name, ids) in [("trips", &fill.trips), ("routes", &fill.routes)] {
        write!(out, "{name}")?;
        for id in ids {
            write!(out, " {id}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn read_fillin(mut input: impl Read) -> io::Result<FillIn> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    let bad = |msg: String| io::Error::new(io::ErrorKind::InvalidData, msg);
    let mut fill = FillIn::default();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let mut parts = line.split_whitespace();
        let target = match parts.next() {
            Some("trips") => &mut fill.trips,
            Some("routes") => &mut fill.routes,
            other => return Err(bad(format!("unexpected fill-in line start {other:?}"))),
        };
        for x in parts {
            target.push(x.parse().map_err(|_| bad(format!("bad id {x}")))?);
        }
    }
    Ok(fill)
}
