//! Bicriterion (arrival time, transfers) journey planning over GTFS-like
//! timetables.
//!
//! The stack: timetable model, a time-expanded oracle, RAPTOR and trip-based
//! engines with range and one-to-many variants, trip-transfer preprocessing,
//! route-hypergraph partitioning, fill-in computation and the partition-pruned
//! engines built on top of it.

mod binio;
pub mod bench;
pub mod fillin;
pub mod hyp;
pub mod pareto;
pub mod partition;
pub mod raptor;
pub mod synth;
pub mod tbtr;
pub mod ted;
pub mod timetable;
pub mod transfers;

pub use pareto::ParetoSet;
pub use timetable::{RouteId, StopId, Time, Timetable, TripId, INFINITY};
pub use transfers::TripTransferSet;


/// Formats seconds past midnight as `HH:MM:SS` (hours may exceed 23).
pub fn format_time(t: Time) -> String {
    if t == INFINITY {
        return "inf".to_string();
    }
    format!("{:02}:{:02}:{:02}", t / 3600, (t / 60) % 60, t % 60)
}

/// Parses `H:MM:SS` / `HH:MM:SS` or `HH:MM`; hours may exceed 23.
pub fn parse_time(s: &str) -> Option<Time> {
    let mut parts = s.trim().split(':');
    let h: Time = parts.next()?.trim().parse().ok()?;
    let m: Time = parts.next()?.trim().parse().ok()?;
    let sec: Time = match parts.next() {
        Some(p) => p.trim().parse().ok()?,
        None => 0,
    };
    if parts.next().is_some() || m >= 60 || sec >= 60 {
        return None;
    }
    Some(h * 3600 + m * 60 + sec)
}
