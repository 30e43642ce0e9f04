//! Deterministic synthetic networks and query sampling.

use std::collections::HashSet;

use log::warn;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::timetable::gtfs::{build_timetable, BuildOptions, GtfsError, RawEvent, RawFeed, RawStop, RawTrip};
use crate::timetable::{StopId, Time, Timetable};

/// Grid spacing in metres.
pub const SPACING_M: f64 = 400.0;
const FIRST_SERVICE: Time = 5 * 3600;
const LAST_SERVICE: Time = 26 * 3600;
/// Period the trips of one route are spread over at least.
const SERVICE_SPAN: Time = 18 * 3600;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthParams {
    pub stops: usize,
    pub routes: usize,
    pub trips_per_route: usize,
    pub footpath_density: f64,
    pub seed: u64,
    /// Separate grids joined by intercity lines; 1 for a single grid.
    pub towns: usize,
}

impl SynthParams {
    pub fn new(stops: usize, routes: usize, trips_per_route: usize, footpath_density: f64, seed: u64) -> Self {
        SynthParams {
            stops,
            routes,
            trips_per_route,
            footpath_density,
            seed,
            towns: 1,
        }
    }
}

/// Independent random stream derived from a seed and a stream name.
pub fn stream(seed: u64, name: &str) -> ChaCha8Rng {
    // FNV-1a over the name, folded into the seed.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(seed ^ h)
}

fn to_coord(x: f64, y: f64) -> (f64, f64) {
    let lat0: f64 = 52.0;
    let lat = lat0 + y / 111_320.0;
    let lon = 5.0 + x / (111_320.0 * lat0.to_radians().cos());
    (lat, lon)
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Gap between neighbouring towns in metres.
const TOWN_GAP_M: f64 = 2000.0;

struct Town {
    first: usize,
    len: usize,
    side: usize,
}

impl Town {
    fn neighbors(&self, s: usize) -> Vec<usize> {
        let i = s - self.first;
        let (col, row) = (i % self.side, i / self.side);
        let mut out = Vec::new();
        if col > 0 {
            out.push(s - 1);
        }
        if col + 1 < self.side && i + 1 < self.len {
            out.push(s + 1);
        }
        if row > 0 {
            out.push(s - self.side);
        }
        if i + self.side < self.len {
            out.push(s + self.side);
        }
        out
    }

    fn stops(&self) -> std::ops::Range<usize> {
        self.first..self.first + self.len
    }
}

/// Jittered grid stops, random-walk routes with periodic trips between 05:00
/// and 26:00, and walking links between nearby stops. Routes mostly run
/// straight; every route after the first in a town starts at a stop an
/// earlier route serves and turns towards unserved stops where it can.
/// Every line runs in both directions. With several towns, each gets its
/// own grid and two-stop intercity lines join them into one network.
pub fn generate(p: &SynthParams) -> RawFeed {
    let num_towns = p.towns.max(1);
    assert!(p.stops >= 2 * num_towns && p.routes.div_ceil(2) >= num_towns && p.trips_per_route >= 1);
    let mut rng = stream(p.seed, "instance");
    let towns: Vec<Town> = (0..num_towns)
        .map(|t| {
            let first = t * p.stops / num_towns;
            let len = (t + 1) * p.stops / num_towns - first;
            Town {
                first,
                len,
                side: (len as f64).sqrt().ceil() as usize,
            }
        })
        .collect();
    let town_cols = (num_towns as f64).sqrt().ceil() as usize;
    let block = towns.iter().map(|t| t.side).max().unwrap_or(1) as f64 * SPACING_M + TOWN_GAP_M;
    let mut pos = Vec::with_capacity(p.stops);
    for (t, town) in towns.iter().enumerate() {
        let (ox, oy) = ((t % town_cols) as f64 * block, (t / town_cols) as f64 * block);
        for i in 0..town.len {
            let (col, row) = ((i % town.side) as f64, (i / town.side) as f64);
            pos.push((
                ox + col * SPACING_M + rng.gen_range(-100.0..100.0),
                oy + row * SPACING_M + rng.gen_range(-100.0..100.0),
            ));
        }
    }
    let stops = pos
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| {
            let (lat, lon) = to_coord(x, y);
            RawStop {
                code: format!("S{i}"),
                lat: (lat * 1e6).round() / 1e6,
                lon: (lon * 1e6).round() / 1e6,
            }
        })
        .collect();

    // Lines run in both directions; the last one only outbound when the
    // route count is odd.
    let lines = p.routes.div_ceil(2);
    let intercity = if num_towns > 1 {
        (num_towns - 1).max(lines / 8).min(lines.saturating_sub(num_towns))
    } else {
        0
    };
    let local = lines - intercity;
    let mut served = vec![false; p.stops];
    let mut paths: Vec<Vec<usize>> = Vec::with_capacity(p.routes);
    for r in 0..local {
        let town = &towns[r % num_towns];
        let want = rng.gen_range(4..=town.side + 4).min(town.len);
        let served_here: Vec<usize> = town.stops().filter(|&s| served[s]).collect();
        let start = match served_here.choose(&mut rng) {
            Some(&s) => s,
            None => rng.gen_range(town.stops()),
        };
        let mut path = vec![start];
        while path.len() < want {
            let here = *path.last().expect("non-empty");
            let mut options: Vec<usize> = town
                .neighbors(here)
                .into_iter()
                .filter(|s| !path.contains(s))
                .collect();
            // Lines mostly keep their heading; turns favour unserved stops.
            if path.len() >= 2 && rng.gen_bool(0.75) {
                let straight = (2 * here).checked_sub(path[path.len() - 2]);
                if let Some(s) = straight.filter(|s| options.contains(s)) {
                    path.push(s);
                    continue;
                }
            }
            if options.iter().any(|&s| !served[s]) {
                options.retain(|&s| !served[s]);
            }
            match options.choose(&mut rng) {
                Some(&next) => path.push(next),
                None => break,
            }
        }
        if path.len() < 2 {
            let other = town.first + (path[0] - town.first + 1) % town.len;
            path.push(other);
        }
        for &s in &path {
            served[s] = true;
        }
        paths.push(path);
    }
    for x in 0..intercity {
        // The first lines chain every town to an earlier one.
        let (a, b) = if x + 1 < num_towns {
            (x + 1, rng.gen_range(0..=x))
        } else {
            let a = rng.gen_range(0..num_towns);
            let b = (a + rng.gen_range(1..num_towns)) % num_towns;
            (a, b)
        };
        let ends: Vec<usize> = [a, b]
            .iter()
            .map(|&t| {
                let choices: Vec<usize> = towns[t].stops().filter(|&s| served[s]).collect();
                *choices.choose(&mut rng).expect("every town has a local route")
            })
            .collect();
        paths.push(ends);
    }

    let directed: Vec<Vec<usize>> = paths
        .iter()
        .flat_map(|path| [path.clone(), path.iter().rev().copied().collect()])
        .take(p.routes)
        .collect();

    let mut trips = Vec::new();
    for (r, path) in directed.iter().enumerate() {
        let hops: Vec<Time> = path
            .windows(2)
            .map(|w| (dist(pos[w[0]], pos[w[1]]) / 8.0).ceil() as Time + rng.gen_range(0..=60))
            .collect();
        let dwell: Vec<Time> = path
            .iter()
            .map(|_| if rng.gen_bool(0.3) { 20 } else { 0 })
            .collect();
        let first = FIRST_SERVICE + rng.gen_range(0..7200);
        // Stretched when needed so the trips cover the service day.
        let spread = (SERVICE_SPAN / p.trips_per_route as Time).div_ceil(60) * 60;
        let headway = (rng.gen_range(6..=30) * 60).max(spread);
        for k in 0..p.trips_per_route {
            let mut time = first + k as Time * headway;
            let mut events = Vec::with_capacity(path.len());
            for (x, &s) in path.iter().enumerate() {
                if x > 0 {
                    time += hops[x - 1];
                }
                let arrival = time;
                let departure = if x + 1 < path.len() { time + dwell[x] } else { time };
                events.push(RawEvent {
                    stop: s,
                    arrival,
                    departure,
                });
                time = departure;
            }
            if time > LAST_SERVICE {
                break;
            }
            trips.push(RawTrip {
                code: format!("R{r}_T{k}"),
                route_code: format!("R{r}"),
                events,
            });
        }
    }

    let mut transfers = Vec::new();
    for a in 0..p.stops {
        for b in a + 1..p.stops {
            let d = dist(pos[a], pos[b]);
            if d <= 1.5 * SPACING_M && rng.gen_bool(p.footpath_density.clamp(0.0, 1.0)) {
                transfers.push((a, b, d.ceil().max(1.0) as Time));
            }
        }
    }

    let mut warnings = Vec::new();
    let unserved = served.iter().filter(|&&x| !x).count();
    if unserved * 2 > p.stops {
        let msg = format!("{unserved} of {} stops are not served by any route", p.stops);
        warn!("{msg}");
        warnings.push(msg);
    }
    RawFeed {
        stops,
        trips,
        transfers: Some(transfers),
        warnings,
    }
}

pub fn synth_timetable(p: &SynthParams) -> Result<Timetable, GtfsError> {
    Ok(build_timetable(&generate(p), &BuildOptions::default())?.0)
}

/// Uniform stop pairs with distinct ends and departures from 04:00 to 24:00.
pub fn sample_queries(tt: &Timetable, count: usize, seed: u64) -> Vec<(StopId, StopId, Time)> {
    let mut rng = stream(seed, "queries");
    let n = tt.num_stops();
    if n < 2 {
        return Vec::new();
    }
    (0..count)
        .map(|_| {
            let o = rng.gen_range(0..n);
            let mut d = rng.gen_range(0..n - 1);
            if d >= o {
                d += 1;
            }
            (o, d, rng.gen_range(4 * 3600..24 * 3600))
        })
        .collect()
}

/// Distinct random stops, at most `count`.
pub fn sample_stops(tt: &Timetable, count: usize, rng: &mut impl Rng) -> Vec<StopId> {
    let mut all: Vec<StopId> = (0..tt.num_stops()).collect();
    all.shuffle(rng);
    all.truncate(count);
    let set: HashSet<_> = all.iter().copied().collect();
    debug_assert_eq!(set.len(), all.len());
    all
}
