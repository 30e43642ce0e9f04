//! Binary timetable snapshot.
//!
//! Layout (little endian): magic `TTBL`, `u32` version, then four sections
//! (stops, routes, trips, footpaths), each a `u64` byte length followed by
//! its payload. Strings are `u32` length + UTF-8 bytes.
//!
//! * stops: `u32` count, then per stop: code, `f64` lat, `f64` lon
//! * routes: `u32` count, then per route: code, `u32` stop count, stop ids,
//!   `u32` first trip, `u32` trip count
//! * trips: `u32` count, then per trip: code, `u32` route, `u32` length,
//!   arrivals, departures
//! * footpaths: `u32` stop count, then per stop: `u32` degree and
//!   `(u32 neighbour, u32 seconds)` pairs

use std::io::{self, Read, Write};

use serde::Serialize;

use super::{ClosureStats, FootpathGraph, Route, Stop, Timetable, TimetableStats, Trip};
use crate::binio::{invalid_data, In, Out};

pub const MAGIC: &[u8; 4] = b"TTBL";
pub const VERSION: u32 = 1;

pub fn write_snapshot<W: Write>(tt: &Timetable, w: W) -> io::Result<()> {
    let mut out = Out::new(w);
    out.bytes(MAGIC)?;
    out.u32(VERSION)?;

    let mut buf = Out::new(Vec::new());
    buf.usize(tt.stops.len())?;
    for s in &tt.stops {
        buf.str(&s.code)?;
        buf.f64(s.lat)?;
        buf.f64(s.lon)?;
    }
    out.section(&buf.into_inner())?;

    let mut buf = Out::new(Vec::new());
    buf.usize(tt.routes.len())?;
    for r in &tt.routes {
        buf.str(&r.code)?;
        buf.usize(r.stops.len())?;
        for &s in &r.stops {
            buf.usize(s)?;
        }
        buf.usize(r.first_trip)?;
        buf.usize(r.num_trips)?;
    }
    out.section(&buf.into_inner())?;

    let mut buf = Out::new(Vec::new());
    buf.usize(tt.trips.len())?;
    for t in &tt.trips {
        buf.str(&t.code)?;
        buf.usize(t.route)?;
        buf.usize(t.len())?;
        for &a in &t.arrivals {
            buf.u32(a)?;
        }
        for &d in &t.departures {
            buf.u32(d)?;
        }
    }
    out.section(&buf.into_inner())?;

    let mut buf = Out::new(Vec::new());
    buf.usize(tt.stops.len())?;
    for s in 0..tt.stops.len() {
        let list = tt.footpaths.neighbors(s);
        buf.usize(list.len())?;
        for &(b, d) in list {
            buf.usize(b)?;
            buf.u32(d)?;
        }
    }
    out.section(&buf.into_inner())
}

pub fn read_snapshot<R: Read>(r: R) -> io::Result<Timetable> {
    let mut inp = In::new(r);
    inp.expect_magic(MAGIC)?;
    let version = inp.u32()?;
    if version != VERSION {
        return Err(invalid_data(format!("unsupported snapshot version {version}")));
    }

    let sec = inp.section()?;
    let mut s = In::new(sec.as_slice());
    let n = s.usize()?;
    let mut stops = Vec::with_capacity(n);
    for _ in 0..n {
        stops.push(Stop {
            code: s.str()?,
            lat: s.f64()?,
            lon: s.f64()?,
        });
    }

    let sec = inp.section()?;
    let mut s = In::new(sec.as_slice());
    let n = s.usize()?;
    let mut routes = Vec::with_capacity(n);
    for _ in 0..n {
        let code = s.str()?;
        let len = s.usize()?;
        let stops = (0..len).map(|_| s.usize()).collect::<io::Result<_>>()?;
        routes.push(Route {
            code,
            stops,
            first_trip: s.usize()?,
            num_trips: s.usize()?,
        });
    }

    let sec = inp.section()?;
    let mut s = In::new(sec.as_slice());
    let n = s.usize()?;
    let mut trips = Vec::with_capacity(n);
    for _ in 0..n {
        let code = s.str()?;
        let route = s.usize()?;
        let len = s.usize()?;
        let arrivals = (0..len).map(|_| s.u32()).collect::<io::Result<_>>()?;
        let departures = (0..len).map(|_| s.u32()).collect::<io::Result<_>>()?;
        trips.push(Trip {
            code,
            route,
            arrivals,
            departures,
        });
    }

    let sec = inp.section()?;
    let mut s = In::new(sec.as_slice());
    let n = s.usize()?;
    let mut adj = Vec::with_capacity(n);
    for _ in 0..n {
        let deg = s.usize()?;
        let list = (0..deg)
            .map(|_| Ok((s.usize()?, s.u32()?)))
            .collect::<io::Result<Vec<_>>>()?;
        adj.push(list);
    }
    Timetable::new(stops, routes, trips, FootpathGraph::from_adjacency(adj))
        .map_err(|e| invalid_data(e.to_string()))
}

#[derive(Serialize)]
struct Sidecar<'a> {
    #[serde(flatten)]
    stats: TimetableStats,
    closure: &'a ClosureStats,
}

/// JSON statistics written next to a snapshot.
pub fn stats_json(tt: &Timetable, closure: &ClosureStats) -> String {
    let sidecar = Sidecar {
        stats: tt.stats(),
        closure,
    };
    serde_json::to_string_pretty(&sidecar).expect("serialisable")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timetable::test_support::build;

    #[test]
    fn snapshot_round_trip() {
        let tt = build(
            4,
            &[(&[0, 1, 2], &[&[10, 20, 30], &[40, 50, 60]]), (&[3, 1], &[&[5, 25]])],
            &[(2, 3, 90)],
        );
        let mut bytes = Vec::new();
        write_snapshot(&tt, &mut bytes).unwrap();
        assert_eq!(&bytes[..4], b"TTBL");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), VERSION);
        let back = read_snapshot(bytes.as_slice()).unwrap();
        assert_eq!(back.stops, tt.stops);
        assert_eq!(back.routes, tt.routes);
        assert_eq!(back.trips, tt.trips);
        assert_eq!(back.footpaths, tt.footpaths);
        let mut again = Vec::new();
        write_snapshot(&back, &mut again).unwrap();
        assert_eq!(bytes, again);
    }

    #[test]
    fn bad_magic_rejected() {
        assert!(read_snapshot(&b"XXXX\x01\0\0\0"[..]).is_err());
    }

    #[test]
    fn sidecar_uses_table_column_names() {
        let tt = build(2, &[(&[0, 1], &[&[10, 20]])], &[]);
        let v: serde_json::Value =
            serde_json::from_str(&stats_json(&tt, &ClosureStats::default())).unwrap();
        for key in ["stops", "routes", "trips", "footpaths", "stopevents"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["stopevents"], 2);
    }
}
