//! GTFS subset reader and the route canonicalisation pipeline.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io;
use std::path::{Path, PathBuf};

use chrono::{Datelike, NaiveDate};
use log::warn;
use thiserror::Error;

use super::{
    build_footpaths, ClosureStats, FootpathError, FootpathGraph, Route, Stop, StopId, Time,
    Timetable, TimetableError, Trip,
};
use crate::{format_time, parse_time};

#[derive(Debug, Error)]
pub enum GtfsError {
    #[error("missing required file {0}")]
    MissingFile(PathBuf),
    #[error("{file}:{line}: {msg}")]
    Malformed {
        file: String,
        line: u64,
        msg: String,
    },
    #[error("no stop events")]
    NoStopEvents,
    #[error("csv error in {file}: {source}")]
    Csv {
        file: String,
        #[source]
        source: csv::Error,
    },
    #[error(transparent)]
    Footpaths(#[from] FootpathError),
    #[error(transparent)]
    Timetable(#[from] TimetableError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RawStop {
    pub code: String,
    pub lat: f64,
    pub lon: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RawEvent {
    pub stop: StopId,
    pub arrival: Time,
    pub departure: Time,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawTrip {
    pub code: String,
    pub route_code: String,
    pub events: Vec<RawEvent>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawFeed {
    pub stops: Vec<RawStop>,
    pub trips: Vec<RawTrip>,
    /// Verbatim `transfers.txt` rows (self-transfers dropped), if present.
    pub transfers: Option<Vec<(StopId, StopId, Time)>>,
    pub warnings: Vec<String>,
}

struct Table {
    name: String,
    headers: HashMap<String, usize>,
    rows: Vec<(u64, csv::StringRecord)>,
}

impl Table {
    fn open(dir: &Path, name: &str, required: bool) -> Result<Option<Table>, GtfsError> {
        let path = dir.join(name);
        if !path.exists() {
            return if required {
                Err(GtfsError::MissingFile(path))
            } else {
                Ok(None)
            };
        }
        let csv_err = |source| GtfsError::Csv {
            file: name.to_string(),
            source,
        };
        let file = File::open(&path).map_err(|e| csv_err(e.into()))?;
        let mut rdr = csv::ReaderBuilder::new()
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(file);
        let headers = rdr
            .headers()
            .map_err(csv_err)?
            .iter()
            .enumerate()
            // Strip a UTF-8 byte order mark some feeds carry.
            .map(|(i, h)| (h.trim_start_matches('\u{feff}').to_string(), i))
            .collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(csv_err)?;
            let line = rec.position().map_or(0, |p| p.line());
            rows.push((line, rec));
        }
        Ok(Some(Table {
            name: name.to_string(),
            headers,
            rows,
        }))
    }

    fn column(&self, col: &str) -> Result<usize, GtfsError> {
        self.headers.get(col).copied().ok_or_else(|| GtfsError::Malformed {
            file: self.name.clone(),
            line: 1,
            msg: format!("missing column {col}"),
        })
    }

    fn malformed(&self, line: u64, msg: impl Into<String>) -> GtfsError {
        GtfsError::Malformed {
            file: self.name.clone(),
            line,
            msg: msg.into(),
        }
    }
}

fn field(rec: &csv::StringRecord, i: usize) -> &str {
    rec.get(i).unwrap_or("")
}

fn active_services(dir: &Path, day: NaiveDate) -> Result<Option<HashSet<String>>, GtfsError> {
    let Some(cal) = Table::open(dir, "calendar.txt", false)? else {
        return Ok(None);
    };
    let sid = cal.column("service_id")?;
    let start = cal.column("start_date")?;
    let end = cal.column("end_date")?;
    let weekday = [
        "monday",
        "tuesday",
        "wednesday",
        "thursday",
        "friday",
        "saturday",
        "sunday",
    ][day.weekday().num_days_from_monday() as usize];
    let wd = cal.column(weekday)?;
    let mut out = HashSet::new();
    for (line, rec) in &cal.rows {
        let parse = |i| {
            NaiveDate::parse_from_str(field(rec, i), "%Y%m%d")
                .map_err(|_| cal.malformed(*line, "bad date"))
        };
        if field(rec, wd) == "1" && parse(start)? <= day && day <= parse(end)? {
            out.insert(field(rec, sid).to_string());
        }
    }
    Ok(Some(out))
}

/// Reads stops, routes, trips and stop_times (plus optional calendar and
/// transfers) from a GTFS directory. Trips with fewer than two stop events
/// are dropped with a warning.
pub fn load_gtfs(dir: &Path, service_day: Option<NaiveDate>) -> Result<RawFeed, GtfsError> {
    let mut feed = RawFeed::default();

    let stops = Table::open(dir, "stops.txt", true)?.expect("required");
    let (c_id, c_lat, c_lon) = (
        stops.column("stop_id")?,
        stops.column("stop_lat")?,
        stops.column("stop_lon")?,
    );
    let mut stop_index = HashMap::new();
    for (line, rec) in &stops.rows {
        let code = field(rec, c_id).to_string();
        let coord = |i| {
            field(rec, i)
                .parse::<f64>()
                .map_err(|_| stops.malformed(*line, "bad coordinate"))
        };
        let stop = RawStop {
            code: code.clone(),
            lat: coord(c_lat)?,
            lon: coord(c_lon)?,
        };
        if stop_index.insert(code, feed.stops.len()).is_some() {
            return Err(stops.malformed(*line, "duplicate stop_id"));
        }
        feed.stops.push(stop);
    }

    let routes = Table::open(dir, "routes.txt", true)?.expect("required");
    routes.column("route_id")?;

    let services = match service_day {
        Some(day) => active_services(dir, day)?,
        None => None,
    };
    let trips = Table::open(dir, "trips.txt", true)?.expect("required");
    let (c_trip, c_route, c_service) = (
        trips.column("trip_id")?,
        trips.column("route_id")?,
        trips.column("service_id")?,
    );
    let mut trip_index = HashMap::new();
    let mut inactive = HashSet::new();
    for (line, rec) in &trips.rows {
        let code = field(rec, c_trip).to_string();
        if let Some(active) = &services {
            if !active.contains(field(rec, c_service)) {
                inactive.insert(code);
                continue;
            }
        }
        if trip_index.insert(code.clone(), feed.trips.len()).is_some() {
            return Err(trips.malformed(*line, "duplicate trip_id"));
        }
        feed.trips.push(RawTrip {
            code,
            route_code: field(rec, c_route).to_string(),
            events: Vec::new(),
        });
    }

    let st = Table::open(dir, "stop_times.txt", true)?.expect("required");
    if st.rows.is_empty() {
        return Err(GtfsError::NoStopEvents);
    }
    let (c_trip, c_arr, c_dep, c_stop, c_seq) = (
        st.column("trip_id")?,
        st.column("arrival_time")?,
        st.column("departure_time")?,
        st.column("stop_id")?,
        st.column("stop_sequence")?,
    );
    let mut sequenced: Vec<Vec<(u32, RawEvent)>> = vec![Vec::new(); feed.trips.len()];
    for (line, rec) in &st.rows {
        let trip_code = field(rec, c_trip);
        let Some(&t) = trip_index.get(trip_code) else {
            if inactive.contains(trip_code) {
                continue;
            }
            return Err(st.malformed(*line, format!("unknown trip_id {trip_code}")));
        };
        let stop = *stop_index
            .get(field(rec, c_stop))
            .ok_or_else(|| st.malformed(*line, "unknown stop_id"))?;
        let seq: u32 = field(rec, c_seq)
            .parse()
            .map_err(|_| st.malformed(*line, "bad stop_sequence"))?;
        let (a, d) = (field(rec, c_arr), field(rec, c_dep));
        let time = |s: &str| parse_time(s).ok_or_else(|| st.malformed(*line, "bad time"));
        let (arrival, departure) = match (a.is_empty(), d.is_empty()) {
            (false, false) => (time(a)?, time(d)?),
            (false, true) => (time(a)?, time(a)?),
            (true, false) => (time(d)?, time(d)?),
            (true, true) => return Err(st.malformed(*line, "missing arrival and departure")),
        };
        sequenced[t].push((
            seq,
            RawEvent {
                stop,
                arrival,
                departure,
            },
        ));
    }
    if sequenced.iter().all(Vec::is_empty) {
        return Err(GtfsError::NoStopEvents);
    }
    let mut kept = Vec::with_capacity(feed.trips.len());
    for (mut trip, mut events) in feed.trips.drain(..).zip(sequenced) {
        if events.len() < 2 {
            let msg = format!("trip {} has {} stop event(s); dropped", trip.code, events.len());
            warn!("{msg}");
            feed.warnings.push(msg);
            continue;
        }
        events.sort_by_key(|e| e.0);
        trip.events = events.into_iter().map(|e| e.1).collect();
        kept.push(trip);
    }
    feed.trips = kept;

    if let Some(tr) = Table::open(dir, "transfers.txt", false)? {
        let (c_from, c_to) = (tr.column("from_stop_id")?, tr.column("to_stop_id")?);
        let c_time = tr.column("min_transfer_time")?;
        let mut edges = Vec::new();
        for (line, rec) in &tr.rows {
            let lookup = |i| {
                stop_index
                    .get(field(rec, i))
                    .copied()
                    .ok_or_else(|| tr.malformed(*line, "unknown stop_id"))
            };
            let (a, b) = (lookup(c_from)?, lookup(c_to)?);
            if a == b {
                continue;
            }
            let secs = match field(rec, c_time) {
                "" => 0,
                s => s
                    .parse::<Time>()
                    .map_err(|_| tr.malformed(*line, "bad min_transfer_time"))?,
            };
            edges.push((a, b, secs));
        }
        feed.transfers = Some(edges);
    }
    Ok(feed)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalTrip {
    pub code: String,
    pub arrivals: Vec<Time>,
    pub departures: Vec<Time>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalRoute {
    pub code: String,
    pub stops: Vec<StopId>,
    pub trips: Vec<CanonicalTrip>,
}

fn trip_is_consistent(events: &[RawEvent]) -> bool {
    events.iter().all(|e| e.departure >= e.arrival)
        && events
            .windows(2)
            .all(|w| w[1].arrival > w[0].arrival && w[1].arrival >= w[0].departure)
}

/// Groups trips by their exact ordered stop sequence (the feed's route_id
/// only names the group) and sorts each group by first departure. Trips
/// whose own times run backwards are dropped with a warning.
pub fn canonicalize_routes(raw: &RawFeed) -> (Vec<CanonicalRoute>, Vec<String>) {
    let mut warnings = Vec::new();
    let mut by_seq: HashMap<Vec<StopId>, usize> = HashMap::new();
    let mut routes: Vec<CanonicalRoute> = Vec::new();
    let mut code_uses: HashMap<&str, usize> = HashMap::new();
    for trip in &raw.trips {
        if !trip_is_consistent(&trip.events) {
            let msg = format!("trip {} has non-increasing times; dropped", trip.code);
            warn!("{msg}");
            warnings.push(msg);
            continue;
        }
        let seq: Vec<StopId> = trip.events.iter().map(|e| e.stop).collect();
        let r = *by_seq.entry(seq.clone()).or_insert_with(|| {
            let uses = code_uses.entry(trip.route_code.as_str()).or_default();
            let code = if *uses == 0 {
                trip.route_code.clone()
            } else {
                format!("{}#{}", trip.route_code, uses)
            };
            *uses += 1;
            routes.push(CanonicalRoute {
                code,
                stops: seq,
                trips: Vec::new(),
            });
            routes.len() - 1
        });
        routes[r].trips.push(CanonicalTrip {
            code: trip.code.clone(),
            arrivals: trip.events.iter().map(|e| e.arrival).collect(),
            departures: trip.events.iter().map(|e| e.departure).collect(),
        });
    }
    for route in &mut routes {
        route.trips.sort_by(|a, b| {
            (a.departures[0], &a.arrivals, &a.code).cmp(&(b.departures[0], &b.arrivals, &b.code))
        });
    }
    (routes, warnings)
}

/// Greedy keep-first: a trip survives only if it does not overtake the last
/// kept trip at any index (arrivals and departures both non-decreasing).
pub fn remove_overtaking_trips(routes: Vec<CanonicalRoute>) -> (Vec<CanonicalRoute>, usize) {
    let mut dropped = 0;
    let routes = routes
        .into_iter()
        .map(|mut route| {
            let mut kept: Vec<CanonicalTrip> = Vec::with_capacity(route.trips.len());
            for trip in route.trips {
                let fifo = kept.last().is_none_or(|prev| {
                    (0..trip.arrivals.len()).all(|i| {
                        prev.arrivals[i] <= trip.arrivals[i]
                            && prev.departures[i] <= trip.departures[i]
                    })
                });
                if fifo {
                    kept.push(trip);
                } else {
                    dropped += 1;
                }
            }
            route.trips = kept;
            route
        })
        .collect();
    (routes, dropped)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BuildOptions {
    pub walk_threshold_s: Time,
    pub walk_speed_mps: f64,
    pub component_cap: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            walk_threshold_s: 300,
            walk_speed_mps: 1.0,
            component_cap: 300,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BuildReport {
    pub closure: ClosureStats,
    pub dropped_overtaking: usize,
    pub warnings: Vec<String>,
}

/// Full pipeline from a raw feed to a validated timetable.
pub fn build_timetable(
    raw: &RawFeed,
    opts: &BuildOptions,
) -> Result<(Timetable, BuildReport), GtfsError> {
    let (routes, mut warnings) = canonicalize_routes(raw);
    let (routes, dropped) = remove_overtaking_trips(routes);
    warnings.extend(raw.warnings.iter().cloned());
    let (footpaths, closure) = match &raw.transfers {
        Some(edges) => FootpathGraph::from_edges(raw.stops.len(), edges.iter().copied())
            .closed(opts.component_cap)?,
        None => {
            let coords: Vec<(f64, f64)> = raw.stops.iter().map(|s| (s.lat, s.lon)).collect();
            build_footpaths(
                &coords,
                opts.walk_threshold_s,
                opts.walk_speed_mps,
                opts.component_cap,
            )?
        }
    };
    let stops = raw
        .stops
        .iter()
        .map(|s| Stop {
            code: s.code.clone(),
            lat: s.lat,
            lon: s.lon,
        })
        .collect();
    let mut out_routes = Vec::with_capacity(routes.len());
    let mut out_trips = Vec::new();
    for route in routes {
        let r = out_routes.len();
        out_routes.push(Route {
            code: route.code,
            stops: route.stops,
            first_trip: out_trips.len(),
            num_trips: route.trips.len(),
        });
        out_trips.extend(route.trips.into_iter().map(|t| Trip {
            code: t.code,
            route: r,
            arrivals: t.arrivals,
            departures: t.departures,
        }));
    }
    let tt = Timetable::new(stops, out_routes, out_trips, footpaths)?;
    let report = BuildReport {
        closure,
        dropped_overtaking: dropped,
        warnings,
    };
    Ok((tt, report))
}

/// Feed that rebuilds `tt`, footpaths given explicitly.
pub fn raw_feed(tt: &Timetable) -> RawFeed {
    RawFeed {
        stops: tt
            .stops
            .iter()
            .map(|s| RawStop {
                code: s.code.clone(),
                lat: s.lat,
                lon: s.lon,
            })
            .collect(),
        trips: tt
            .trips
            .iter()
            .map(|t| RawTrip {
                code: t.code.clone(),
                route_code: tt.routes[t.route].code.clone(),
                events: tt.routes[t.route]
                    .stops
                    .iter()
                    .zip(t.arrivals.iter().zip(&t.departures))
                    .map(|(&stop, (&arrival, &departure))| RawEvent {
                        stop,
                        arrival,
                        departure,
                    })
                    .collect(),
            })
            .collect(),
        transfers: Some(tt.footpaths.edges().collect()),
        warnings: Vec::new(),
    }
}

fn csv_writer(dir: &Path, name: &str) -> io::Result<csv::Writer<File>> {
    Ok(csv::Writer::from_writer(File::create(dir.join(name))?))
}

/// Writes `raw` as a GTFS directory with one all-week service.
pub fn write_gtfs(raw: &RawFeed, dir: &Path) -> io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut w = csv_writer(dir, "agency.txt")?;
    w.write_record(["agency_id", "agency_name", "agency_url", "agency_timezone"])?;
    w.write_record(["A", "Transit", "http://example.invalid", "UTC"])?;
    w.flush()?;

    let mut w = csv_writer(dir, "stops.txt")?;
    w.write_record(["stop_id", "stop_name", "stop_lat", "stop_lon"])?;
    for s in &raw.stops {
        w.write_record([
            s.code.as_str(),
            s.code.as_str(),
            &format!("{:.6}", s.lat),
            &format!("{:.6}", s.lon),
        ])?;
    }
    w.flush()?;

    let mut w = csv_writer(dir, "routes.txt")?;
    w.write_record(["route_id", "agency_id", "route_short_name", "route_type"])?;
    let mut seen = HashSet::new();
    for t in &raw.trips {
        if seen.insert(t.route_code.as_str()) {
            w.write_record([t.route_code.as_str(), "A", t.route_code.as_str(), "3"])?;
        }
    }
    w.flush()?;

    let mut w = csv_writer(dir, "calendar.txt")?;
    w.write_record([
        "service_id", "monday", "tuesday", "wednesday", "thursday", "friday", "saturday",
        "sunday", "start_date", "end_date",
    ])?;
    w.write_record(["ALL", "1", "1", "1", "1", "1", "1", "1", "20000101", "20991231"])?;
    w.flush()?;

    let mut w = csv_writer(dir, "trips.txt")?;
    w.write_record(["route_id", "service_id", "trip_id"])?;
    for t in &raw.trips {
        w.write_record([t.route_code.as_str(), "ALL", t.code.as_str()])?;
    }
    w.flush()?;

    let mut w = csv_writer(dir, "stop_times.txt")?;
    w.write_record([
        "trip_id",
        "arrival_time",
        "departure_time",
        "stop_id",
        "stop_sequence",
    ])?;
    for t in &raw.trips {
        for (k, e) in t.events.iter().enumerate() {
            w.write_record([
                t.code.as_str(),
                &format_time(e.arrival),
                &format_time(e.departure),
                raw.stops[e.stop].code.as_str(),
                &(k + 1).to_string(),
            ])?;
        }
    }
    w.flush()?;

    if let Some(edges) = &raw.transfers {
        let mut w = csv_writer(dir, "transfers.txt")?;
        w.write_record(["from_stop_id", "to_stop_id", "transfer_type", "min_transfer_time"])?;
        for &(a, b, secs) in edges {
            w.write_record([
                raw.stops[a].code.as_str(),
                raw.stops[b].code.as_str(),
                "2",
                &secs.to_string(),
            ])?;
        }
        w.flush()?;
    }
    Ok(())
}

/// `load_gtfs` followed by `build_timetable`.
pub fn read_timetable(
    dir: &Path,
    service_day: Option<NaiveDate>,
    opts: &BuildOptions,
) -> Result<(Timetable, BuildReport), GtfsError> {
    build_timetable(&load_gtfs(dir, service_day)?, opts)
}
