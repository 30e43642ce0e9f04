//! Trip-transfer preprocessing: generation, U-turn removal and reduction to
//! transfers that improve some arrival.

use std::io::{self, Read, Write};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::binio::{invalid_data, In, Out};
use crate::timetable::{StopId, Time, Timetable, TripId, INFINITY};

/// Transfer from stop index `from_index` of the owning trip to `to_trip`,
/// boarding at `to_index`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transfer {
    pub from_index: usize,
    pub to_trip: TripId,
    pub to_index: usize,
}

/// Outgoing transfers per trip, sorted by `(from_index, to_trip, to_index)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TripTransferSet {
    lists: Vec<Vec<Transfer>>,
}

impl TripTransferSet {
    pub fn empty(num_trips: usize) -> Self {
        TripTransferSet {
            lists: vec![Vec::new(); num_trips],
        }
    }

    /// Builds a set from unsorted per-trip lists; duplicates are dropped.
    pub fn from_lists(mut lists: Vec<Vec<Transfer>>) -> Self {
        for l in &mut lists {
            l.sort_unstable();
            l.dedup();
        }
        TripTransferSet { lists }
    }

    pub fn num_trips(&self) -> usize {
        self.lists.len()
    }

    pub fn len(&self) -> usize {
        self.lists.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn from_trip(&self, t: TripId) -> &[Transfer] {
        &self.lists[t]
    }

    /// Transfers of `t` leaving at stop indices in `lo..=hi`.
    pub fn between(&self, t: TripId, lo: usize, hi: usize) -> &[Transfer] {
        let l = &self.lists[t];
        let a = l.partition_point(|x| x.from_index < lo);
        let b = l.partition_point(|x| x.from_index <= hi);
        &l[a..b.max(a)]
    }

    pub fn contains(&self, t: TripId, x: &Transfer) -> bool {
        self.lists[t].binary_search(x).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = (TripId, &Transfer)> {
        self.lists
            .iter()
            .enumerate()
            .flat_map(|(t, l)| l.iter().map(move |x| (t, x)))
    }

    fn retain(&self, keep: impl Fn(TripId, &Transfer) -> bool + Sync) -> Self {
        let lists = self
            .lists
            .par_iter()
            .enumerate()
            .map(|(t, l)| l.iter().copied().filter(|x| keep(t, x)).collect())
            .collect();
        TripTransferSet { lists }
    }

    /// Checks every transfer for feasibility against `tt`.
    pub fn validate(&self, tt: &Timetable) -> Result<(), String> {
        if self.lists.len() != tt.num_trips() {
            return Err("trip count mismatch".into());
        }
        for (t, x) in self.iter() {
            let from = &tt.trips[t];
            let Some(to) = tt.trips.get(x.to_trip) else {
                return Err(format!("trip {t}: unknown target trip {}", x.to_trip));
            };
            if x.from_index == 0 || x.from_index >= from.arrivals.len() {
                return Err(format!("trip {t}: bad source index {}", x.from_index));
            }
            if x.to_index + 1 >= to.departures.len() {
                return Err(format!("trip {t}: bad target index {}", x.to_index));
            }
            let a = tt.trip_stop(t, x.from_index);
            let b = tt.trip_stop(x.to_trip, x.to_index);
            let Some(f) = tt.walk_time(a, b) else {
                return Err(format!("trip {t}: stops {a} and {b} not walkable"));
            };
            if from.arrivals[x.from_index] + f > to.departures[x.to_index] {
                return Err(format!("trip {t}: transfer to {} infeasible", x.to_trip));
            }
        }
        Ok(())
    }
}

/// All transfers to the earliest catchable trip of every route through a
/// walkable stop, skipping ones that stay on the same route forward.
pub fn generate_transfers(tt: &Timetable) -> TripTransferSet {
    let lists = (0..tt.num_trips())
        .into_par_iter()
        .map(|t| {
            let trip = &tt.trips[t];
            let mut out = Vec::new();
            for i in 1..trip.arrivals.len() {
                let here = tt.trip_stop(t, i);
                for (s, f) in tt.walk_from(here) {
                    let ready = trip.arrivals[i] + f;
                    for &(r, j) in tt.stop_routes(s) {
                        if j + 1 == tt.routes[r].len() {
                            continue;
                        }
                        let Some(t2) = tt.earliest_trip(r, j, ready) else {
                            continue;
                        };
                        if r != trip.route || t2 < t || j < i {
                            out.push(Transfer {
                                from_index: i,
                                to_trip: t2,
                                to_index: j,
                            });
                        }
                    }
                }
            }
            out
        })
        .collect();
    TripTransferSet::from_lists(lists)
}

/// Drops transfers that merely undo the previous hop: getting off at `i` to
/// ride back to the stop just passed, when the other trip could have been
/// boarded there.
pub fn remove_uturns(tt: &Timetable, set: &TripTransferSet) -> TripTransferSet {
    set.retain(|t, x| {
        let (i, j) = (x.from_index, x.to_index);
        let to = &tt.trips[x.to_trip];
        if j + 1 >= to.arrivals.len() || tt.trip_stop(t, i - 1) != tt.trip_stop(x.to_trip, j + 1)
        {
            return true;
        }
        let from = &tt.trips[t];
        // At the first stop the rider was there by the departure, not the
        // arrival.
        let there = if i == 1 {
            from.departures[0]
        } else {
            from.arrivals[i - 1]
        };
        there > to.departures[j + 1]
    })
}

struct Labels {
    time: Vec<Time>,
    stamp: Vec<u32>,
    current: u32,
}

impl Labels {
    fn new(n: usize) -> Self {
        Labels {
            time: vec![INFINITY; n],
            stamp: vec![0; n],
            current: 0,
        }
    }

    fn reset(&mut self) {
        self.current = self.current.wrapping_add(1);
        if self.current == 0 {
            self.stamp.iter_mut().for_each(|x| *x = 0);
            self.current = 1;
        }
    }

    fn get(&self, s: StopId) -> Time {
        if self.stamp[s] == self.current {
            self.time[s]
        } else {
            INFINITY
        }
    }

    /// Lowers the label; true if it improved.
    fn improve(&mut self, s: StopId, t: Time) -> bool {
        if t < self.get(s) {
            self.time[s] = t;
            self.stamp[s] = self.current;
            true
        } else {
            false
        }
    }
}

/// Keeps only transfers that improve the arrival at some stop compared with
/// staying seated or with transfers further down the trip.
pub fn reduce_transfers(tt: &Timetable, set: &TripTransferSet) -> TripTransferSet {
    let n = tt.num_stops();
    let lists = (0..tt.num_trips())
        .into_par_iter()
        .map_init(
            || Labels::new(n),
            |labels, t| {
                labels.reset();
                let trip = &tt.trips[t];
                let mut kept = Vec::new();
                for i in (1..trip.arrivals.len()).rev() {
                    for (s, f) in tt.walk_from(tt.trip_stop(t, i)) {
                        labels.improve(s, trip.arrivals[i] + f);
                    }
                    for x in set.between(t, i, i) {
                        let to = &tt.trips[x.to_trip];
                        let mut keep = false;
                        for k in x.to_index + 1..to.arrivals.len() {
                            for (s, f) in tt.walk_from(tt.trip_stop(x.to_trip, k)) {
                                keep |= labels.improve(s, to.arrivals[k] + f);
                            }
                        }
                        if keep {
                            kept.push(*x);
                        }
                    }
                }
                kept.sort_unstable();
                kept
            },
        )
        .collect();
    TripTransferSet { lists }
}

#[derive(Clone, Debug, Serialize)]
pub struct StageStats {
    pub name: &'static str,
    pub size: usize,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PreprocessReport {
    pub stages: Vec<StageStats>,
}

/// The three stages with sizes and timings.
pub fn preprocess(tt: &Timetable) -> (TripTransferSet, PreprocessReport) {
    let mut stages = Vec::new();
    let clock = Instant::now();
    let generated = generate_transfers(tt);
    stages.push(StageStats {
        name: "generate",
        size: generated.len(),
        seconds: clock.elapsed().as_secs_f64(),
    });
    let clock = Instant::now();
    let no_uturns = remove_uturns(tt, &generated);
    stages.push(StageStats {
        name: "uturn",
        size: no_uturns.len(),
        seconds: clock.elapsed().as_secs_f64(),
    });
    let clock = Instant::now();
    let reduced = reduce_transfers(tt, &no_uturns);
    stages.push(StageStats {
        name: "reduce",
        size: reduced.len(),
        seconds: clock.elapsed().as_secs_f64(),
    });
    (reduced, PreprocessReport { stages })
}

const MAGIC: &[u8; 4] = b"TTRS";
const VERSION: u32 = 1;

fn put_varint(buf: &mut Vec<u8>, mut v: u64) {
    while v >= 0x80 {
        buf.push((v as u8) | 0x80);
        v >>= 7;
    }
    buf.push(v as u8);
}

fn get_varint(buf: &[u8], pos: &mut usize) -> io::Result<u64> {
    let mut v = 0u64;
    for shift in (0..64).step_by(7) {
        let b = *buf
            .get(*pos)
            .ok_or_else(|| invalid_data("truncated transfer list"))?;
        *pos += 1;
        v |= u64::from(b & 0x7f) << shift;
        if b & 0x80 == 0 {
            return Ok(v);
        }
    }
    Err(invalid_data("varint too long"))
}

/// Header, trip count, then per trip a varint list: count, then per transfer
/// the source-index delta, target-trip delta (within equal source index,
/// else absolute) and target index.
pub fn write_transfers<W: Write>(set: &TripTransferSet, w: W) -> io::Result<()> {
    let mut out = Out::new(w);
    out.bytes(MAGIC)?;
    out.u32(VERSION)?;
    out.usize(set.lists.len())?;
    let mut buf = Vec::new();
    for l in &set.lists {
        buf.clear();
        put_varint(&mut buf, l.len() as u64);
        let (mut prev_i, mut prev_t) = (0usize, 0usize);
        for x in l {
            let di = x.from_index - prev_i;
            put_varint(&mut buf, di as u64);
            let base = if di == 0 { prev_t } else { 0 };
            put_varint(&mut buf, (x.to_trip - base) as u64);
            put_varint(&mut buf, x.to_index as u64);
            prev_i = x.from_index;
            prev_t = x.to_trip;
        }
        out.section(&buf)?;
    }
    Ok(())
}

pub fn read_transfers<R: Read>(r: R) -> io::Result<TripTransferSet> {
    let mut inp = In::new(r);
    inp.expect_magic(MAGIC)?;
    if inp.u32()? != VERSION {
        return Err(invalid_data("unsupported transfer file version"));
    }
    let trips = inp.usize()?;
    let mut lists = Vec::with_capacity(trips);
    for _ in 0..trips {
        let buf = inp.section()?;
        let mut pos = 0;
        let n = get_varint(&buf, &mut pos)? as usize;
        let mut l = Vec::with_capacity(n.min(buf.len()));
        let (mut prev_i, mut prev_t) = (0usize, 0usize);
        for _ in 0..n {
            let di = get_varint(&buf, &mut pos)? as usize;
            let from_index = prev_i + di;
            let base = if di == 0 { prev_t } else { 0 };
            let to_trip = base + get_varint(&buf, &mut pos)? as usize;
            let to_index = get_varint(&buf, &mut pos)? as usize;
            l.push(Transfer {
                from_index,
                to_trip,
                to_index,
            });
            prev_i = from_index;
            prev_t = to_trip;
        }
        if pos != buf.len() {
            return Err(invalid_data("trailing bytes in transfer list"));
        }
        lists.push(l);
    }
    Ok(TripTransferSet { lists })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timetable::test_support::build;

    fn tr(from_index: usize, to_trip: TripId, to_index: usize) -> Transfer {
        Transfer {
            from_index,
            to_trip,
            to_index,
        }
    }

    #[test]
    fn single_trip_has_no_transfers() {
        let tt = build(3, &[(&[0, 1, 2], &[&[0, 60, 120]])], &[]);
        assert!(generate_transfers(&tt).is_empty());
    }

    #[test]
    fn earliest_trip_of_other_route() {
        // Route 0: 0 -> 1 -> 2. Route 1: 1 -> 3 with trips at 100 and 200.
        let tt = build(
            4,
            &[
                (&[0, 1, 2], &[&[0, 90, 150]]),
                (&[1, 3], &[&[100, 160], &[200, 260]]),
            ],
            &[],
        );
        let set = generate_transfers(&tt);
        assert_eq!(set.from_trip(0), &[tr(1, 1, 0)]);
        // Trips 1 and 2 end at stop 3 where nothing departs.
        assert!(set.from_trip(1).is_empty());
        set.validate(&tt).unwrap();
    }

    #[test]
    fn same_route_earlier_trip_via_footpath() {
        // The later trip reaches stop 1 at 150; walking to stop 3 beats the
        // earlier trip there (departs 300), so that transfer is needed.
        let tt = build(
            5,
            &[(
                &[0, 1, 2, 3, 4],
                &[&[0, 100, 200, 300, 400], &[50, 150, 250, 350, 450]],
            )],
            &[(1, 3, 10)],
        );
        let set = generate_transfers(&tt);
        assert!(set.from_trip(1).contains(&tr(1, 0, 3)));
        set.validate(&tt).unwrap();
    }

    #[test]
    fn same_route_rules() {
        // Two trips on 0 -> 1 -> 2 -> 3 with a walk from 2 back to 1. From
        // trip 0 at stop 2 we may board the later trip 1 at the earlier
        // index 1 (j < i), never trip 0 or 1 at a later index.
        let tt = build(
            4,
            &[(&[0, 1, 2, 3], &[&[0, 10, 20, 30], &[40, 50, 60, 70]])],
            &[(1, 2, 5)],
        );
        let set = generate_transfers(&tt);
        assert_eq!(set.from_trip(0), &[tr(2, 1, 1)]);
        for x in set.from_trip(1) {
            assert!(x.to_index < x.from_index);
        }
    }

    #[test]
    fn uturn_removed_only_when_stop_matches() {
        // Trip 0 runs 0 -> 1 -> 2; trip 1 runs 3 -> 1 -> 0 (back towards 0).
        // Transfer at stop 1 to ride back to 0 is a U-turn.
        let tt = build(
            4,
            &[
                (&[0, 1, 2], &[&[0, 100, 200]]),
                (&[2, 1, 0], &[&[210, 300, 400]]),
                (&[4 - 1, 0], &[&[500, 600]]),
            ],
            &[],
        );
        let set = TripTransferSet::from_lists(vec![
            vec![tr(2, 1, 0)],
            vec![],
            vec![],
        ]);
        // Trip 0 at index 2 (stop 2) to trip 1 index 0 (stop 2); trip 1's
        // next stop (1) equals trip 0's previous stop (1) and trip 0 was
        // there at 100 before trip 1 leaves it at 300.
        assert!(remove_uturns(&tt, &set).is_empty());

        let set = TripTransferSet::from_lists(vec![vec![tr(2, 2, 0)], vec![], vec![]]);
        let kept = remove_uturns(&tt, &set);
        assert_eq!(kept, set);
    }

    #[test]
    fn reduction_drops_slower_parallel_trip() {
        // Route 0: 0 -> 1 -> 2 -> 3. Route 1: 1 -> 2 -> 3 departing later and
        // arriving later everywhere: never worth switching.
        let tt = build(
            4,
            &[
                (&[0, 1, 2, 3], &[&[0, 100, 200, 300]]),
                (&[1, 2, 3], &[&[110, 250, 400]]),
            ],
            &[],
        );
        let generated = generate_transfers(&tt);
        assert!(generated.from_trip(0).contains(&tr(1, 1, 0)));
        let reduced = reduce_transfers(&tt, &generated);
        assert!(reduced.from_trip(0).is_empty());
    }

    #[test]
    fn reduction_keeps_useful_branch() {
        let tt = build(
            4,
            &[
                (&[0, 1, 2], &[&[0, 100, 200]]),
                (&[1, 3], &[&[110, 250]]),
            ],
            &[],
        );
        let reduced = reduce_transfers(&tt, &generate_transfers(&tt));
        assert_eq!(reduced.from_trip(0), &[tr(1, 1, 0)]);
    }

    #[test]
    fn empty_stays_empty() {
        let tt = build(2, &[(&[0, 1], &[&[0, 60]])], &[]);
        let set = TripTransferSet::empty(1);
        assert!(reduce_transfers(&tt, &set).is_empty());
        assert!(remove_uturns(&tt, &set).is_empty());
    }

    #[test]
    fn file_round_trip() {
        let set = TripTransferSet::from_lists(vec![
            vec![tr(1, 7, 0), tr(1, 3, 2), tr(4, 1, 0)],
            vec![],
            vec![tr(2, 300, 9)],
        ]);
        let mut bytes = Vec::new();
        write_transfers(&set, &mut bytes).unwrap();
        assert_eq!(&bytes[..4], b"TTRS");
        let back = read_transfers(&bytes[..]).unwrap();
        assert_eq!(back, set);
        let mut again = Vec::new();
        write_transfers(&back, &mut again).unwrap();
        assert_eq!(bytes, again);
        assert!(read_transfers(&b"XXXX"[..]).is_err());
    }

    #[test]
    fn between_slices_by_source_index() {
        let set = TripTransferSet::from_lists(vec![vec![tr(1, 0, 0), tr(2, 0, 0), tr(2, 1, 0), tr(4, 0, 0)]]);
        assert_eq!(set.between(0, 2, 3).len(), 2);
        assert_eq!(set.between(0, 3, 3).len(), 0);
        assert_eq!(set.between(0, 0, 9).len(), 4);
    }
}
