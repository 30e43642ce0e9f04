//! Partition-pruned queries: trip-based and round-based searches that only
//! touch fill-in trips (routes) and those of the source and target cells.

use std::collections::BTreeSet;

use crate::fillin::FillIn;
use crate::pareto::ParetoSet;
use crate::partition::Layout;
use crate::raptor::{raptor_query_counted, RaptorCounters};
use crate::tbtr::{tbtr_query_counted, TbtrCounters};
use crate::timetable::{StopId, Time, Timetable, TimetableError};
use crate::TripTransferSet;

/// Stop cells of source and target (0 for a cutstop) and the leaf cells
/// whose routes are opened for each.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Labels {
    pub source_cell: usize,
    pub target_cell: usize,
    pub source_routes: BTreeSet<usize>,
    pub target_routes: BTreeSet<usize>,
}

/// Cells opened for stop `s`: its own leaf cell, nothing for a cutstop.
fn opened_cells(layout: &Layout, s: StopId) -> BTreeSet<usize> {
    match layout.leaf().stop_cells[s] {
        0 => BTreeSet::new(),
        c => BTreeSet::from([c]),
    }
}

pub fn labeling(
    tt: &Timetable,
    layout: &Layout,
    s_o: StopId,
    s_d: StopId,
) -> Result<Labels, TimetableError> {
    tt.check_stop(s_o)?;
    tt.check_stop(s_d)?;
    let leaf = layout.leaf();
    if leaf.stop_cells.len() != tt.num_stops() || leaf.route_cells.len() != tt.num_routes() {
        return Err(TimetableError::Invalid(
            "layout does not match the timetable".into(),
        ));
    }
    Ok(Labels {
        source_cell: leaf.stop_cells[s_o],
        target_cell: leaf.stop_cells[s_d],
        source_routes: opened_cells(layout, s_o),
        target_routes: opened_cells(layout, s_d),
    })
}

/// Layout plus fill-in; flags are rebuilt for every query.
pub struct HypContext<'a> {
    tt: &'a Timetable,
    layout: &'a Layout,
    fill_trips: Vec<bool>,
    fill_routes: Vec<bool>,
}

impl<'a> HypContext<'a> {
    pub fn new(tt: &'a Timetable, layout: &'a Layout, fill: &FillIn) -> Self {
        let mut fill_trips = vec![false; tt.num_trips()];
        for &t in &fill.trips {
            fill_trips[t] = true;
        }
        let mut fill_routes = vec![false; tt.num_routes()];
        for &r in &fill.routes {
            fill_routes[r] = true;
        }
        HypContext {
            tt,
            layout,
            fill_trips,
            fill_routes,
        }
    }

    fn open(&self, s_o: StopId, s_d: StopId) -> Result<Vec<bool>, TimetableError> {
        let labels = labeling(self.tt, self.layout, s_o, s_d)?;
        let cells = &self.layout.leaf().route_cells;
        Ok(cells
            .iter()
            .map(|c| labels.source_routes.contains(c) || labels.target_routes.contains(c))
            .collect())
    }

    pub fn route_flags(&self, s_o: StopId, s_d: StopId) -> Result<Vec<bool>, TimetableError> {
        let mut flags = self.open(s_o, s_d)?;
        for (f, &x) in flags.iter_mut().zip(&self.fill_routes) {
            *f |= x;
        }
        Ok(flags)
    }

    pub fn trip_flags(&self, s_o: StopId, s_d: StopId) -> Result<Vec<bool>, TimetableError> {
        let open = self.open(s_o, s_d)?;
        Ok(self
            .tt
            .trips
            .iter()
            .enumerate()
            .map(|(t, trip)| self.fill_trips[t] || open[trip.route])
            .collect())
    }
}

pub fn hyptbtr_query(
    tt: &Timetable,
    transfers: &TripTransferSet,
    ctx: &HypContext<'_>,
    s_o: StopId,
    s_d: StopId,
    tau: Time,
    max_transfers: usize,
) -> Result<(ParetoSet, TbtrCounters), TimetableError> {
    let flags = ctx.trip_flags(s_o, s_d)?;
    tbtr_query_counted(tt, transfers, s_o, s_d, tau, max_transfers, Some(&flags))
}

pub fn hypraptor_query(
    tt: &Timetable,
    ctx: &HypContext<'_>,
    s_o: StopId,
    s_d: StopId,
    tau: Time,
    max_transfers: usize,
) -> Result<(ParetoSet, RaptorCounters), TimetableError> {
    let flags = ctx.route_flags(s_o, s_d)?;
    raptor_query_counted(tt, s_o, s_d, tau, max_transfers, Some(&flags))
}
