//! Route hypergraph partitioning and the stop cells derived from it.

pub mod exact;
pub mod hmetis;
pub mod hypergraph;
pub mod multilevel;

use std::collections::BTreeSet;

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::timetable::{RouteId, StopId, Timetable};
pub use hypergraph::{Hypergraph, NodeKind, WeightScheme};

#[derive(Debug, Error, PartialEq)]
pub enum PartitionError {
    #[error("exact solver is limited to {max} nodes, got {nodes}")]
    TooLarge { nodes: usize, max: usize },
    #[error("bounds must have one entry per cell")]
    BadBounds,
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("cannot split {nodes} nodes into {cells} cells")]
    TooManyCells { cells: usize, nodes: usize },
    #[error("epsilon must lie strictly between 0 and 1, got {0}")]
    BadEpsilon(f64),
    #[error("node {node} weighs {weight}, above the cell bound {bound}")]
    NodeTooHeavy { node: usize, weight: f64, bound: f64 },
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
}

/// Route cells `1..=p` and stop cells `0..=p`, cell 0 holding the cutstops.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionLayout {
    pub p: usize,
    pub route_cells: Vec<usize>,
    /// `(a, b, cell)` per footpath pseudoroute.
    pub footpath_cells: Vec<(StopId, StopId, usize)>,
    pub stop_cells: Vec<usize>,
}

impl PartitionLayout {
    /// Layout from 0-based cells per hypergraph node.
    pub fn from_node_cells(tt: &Timetable, hg: &Hypergraph, cells: &[usize], p: usize) -> Self {
        let mut route_cells = vec![1; tt.num_routes()];
        let mut footpath_cells = Vec::new();
        for (v, kind) in hg.kinds.iter().enumerate() {
            match *kind {
                NodeKind::Route(r) => route_cells[r] = cells[v] + 1,
                NodeKind::Footpath(a, b) => footpath_cells.push((a, b, cells[v] + 1)),
            }
        }
        Self::assemble(tt, p, route_cells, footpath_cells)
    }

    fn assemble(
        tt: &Timetable,
        p: usize,
        route_cells: Vec<usize>,
        footpath_cells: Vec<(StopId, StopId, usize)>,
    ) -> Self {
        let mut incident: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); tt.num_stops()];
        for (s, set) in incident.iter_mut().enumerate() {
            for &(r, _) in tt.stop_routes(s) {
                set.insert(route_cells[r]);
            }
        }
        for &(a, b, c) in &footpath_cells {
            incident[a].insert(c);
            incident[b].insert(c);
        }
        let stop_cells = incident
            .iter()
            .map(|set| match set.len() {
                0 => 1,
                1 => *set.iter().next().expect("one cell"),
                _ => 0,
            })
            .collect();
        PartitionLayout {
            p,
            route_cells,
            footpath_cells,
            stop_cells,
        }
    }

    pub fn cutstops(&self) -> Vec<StopId> {
        (0..self.stop_cells.len())
            .filter(|&s| self.stop_cells[s] == 0)
            .collect()
    }

    /// Stops of cell `c`, 0 being the cutstops.
    pub fn stop_cell(&self, c: usize) -> Vec<StopId> {
        (0..self.stop_cells.len())
            .filter(|&s| self.stop_cells[s] == c)
            .collect()
    }

    pub fn routes_of(&self, c: usize) -> Vec<RouteId> {
        (0..self.route_cells.len())
            .filter(|&r| self.route_cells[r] == c)
            .collect()
    }

    /// Cutstop count and its share of all stops in percent.
    pub fn scut(&self) -> (usize, f64) {
        let n = self.cutstops().len();
        let pct = if self.stop_cells.is_empty() {
            0.0
        } else {
            100.0 * n as f64 / self.stop_cells.len() as f64
        };
        (n, pct)
    }

    /// Cells of the routes and footpaths touching `s`.
    pub fn incident_cells(&self, tt: &Timetable, s: StopId) -> BTreeSet<usize> {
        let mut out: BTreeSet<usize> = tt
            .stop_routes(s)
            .iter()
            .map(|&(r, _)| self.route_cells[r])
            .collect();
        for &(a, b, c) in &self.footpath_cells {
            if a == s || b == s {
                out.insert(c);
            }
        }
        out
    }
}

/// Stop cells for given route cells (`1..=p`). A footpath takes the cell
/// shared by all routes at both ends, or the smallest cell among them.
pub fn derive_cells(tt: &Timetable, route_cells: &[usize], p: usize) -> PartitionLayout {
    let footpath_cells = tt
        .footpaths
        .edges()
        .map(|(a, b, _)| {
            let cells: BTreeSet<usize> = tt
                .stop_routes(a)
                .iter()
                .chain(tt.stop_routes(b))
                .map(|&(r, _)| route_cells[r])
                .collect();
            (a, b, cells.iter().next().copied().unwrap_or(1))
        })
        .collect();
    PartitionLayout::assemble(tt, p, route_cells.to_vec(), footpath_cells)
}

/// Parent cells split into `child_p` children each. Leaf cell of child `c`
/// (1-based) under parent `q` is `(q - 1) * child_p + c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NestedLayout {
    pub top: PartitionLayout,
    pub child_p: usize,
    pub leaf: PartitionLayout,
    /// Parents kept whole because they could not be split.
    pub unsplit: Vec<usize>,
}

impl NestedLayout {
    pub fn level1_cutstops(&self) -> Vec<StopId> {
        self.top.cutstops()
    }

    /// Cutstops introduced by splitting parent `q`.
    pub fn level2_cutstops(&self, q: usize) -> Vec<StopId> {
        (0..self.leaf.stop_cells.len())
            .filter(|&s| self.leaf.stop_cells[s] == 0 && self.top.stop_cells[s] == q)
            .collect()
    }

    /// Nested layout from leaf route cells; parents follow from
    /// `parent_of_leaf`. Leaf footpaths take cells as in `derive_cells` and
    /// their parent at the top level.
    pub fn from_route_cells(tt: &Timetable, leaf_cells: &[usize], top_p: usize, child_p: usize) -> Self {
        let leaf = derive_cells(tt, leaf_cells, top_p * child_p);
        let parent = |c: usize| (c - 1) / child_p + 1;
        let top_routes = leaf_cells.iter().map(|&c| parent(c)).collect();
        let top_walks = leaf.footpath_cells.iter().map(|&(a, b, c)| (a, b, parent(c))).collect();
        NestedLayout {
            top: PartitionLayout::assemble(tt, top_p, top_routes, top_walks),
            child_p,
            leaf,
            unsplit: Vec::new(),
        }
    }

    pub fn parent_of_leaf(&self, c: usize) -> usize {
        (c - 1) / self.child_p + 1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Layout {
    Standard(PartitionLayout),
    Nested(NestedLayout),
}

impl Layout {
    /// Finest-level layout.
    pub fn leaf(&self) -> &PartitionLayout {
        match self {
            Layout::Standard(l) => l,
            Layout::Nested(n) => &n.leaf,
        }
    }
}

/// `P` for a flat `P`-way layout, `AxB` for `A` parents split `B` ways.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartitionSpec {
    Flat(usize),
    Nested(usize, usize),
}

impl PartitionSpec {
    pub fn leaf_cells(&self) -> usize {
        match *self {
            PartitionSpec::Flat(p) => p,
            PartitionSpec::Nested(a, b) => a * b,
        }
    }
}

impl std::str::FromStr for PartitionSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |x: &str| match x.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(format!("bad partition count {x:?}")),
        };
        match s.split_once(['x', 'X']) {
            Some((a, b)) => Ok(PartitionSpec::Nested(num(a)?, num(b)?)),
            None => Ok(PartitionSpec::Flat(num(s)?)),
        }
    }
}

impl std::fmt::Display for PartitionSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PartitionSpec::Flat(p) => write!(f, "{p}"),
            PartitionSpec::Nested(a, b) => write!(f, "{a}x{b}"),
        }
    }
}

/// Stored layout with the settings that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayoutFile {
    pub scheme: WeightScheme,
    pub epsilon: f64,
    pub seed: u64,
    pub scut: usize,
    pub scut_pct: f64,
    pub layout: Layout,
}

impl LayoutFile {
    pub fn new(layout: Layout, scheme: WeightScheme, epsilon: f64, seed: u64) -> Self {
        let (scut, scut_pct) = layout.leaf().scut();
        LayoutFile {
            scheme,
            epsilon,
            seed,
            scut,
            scut_pct,
            layout,
        }
    }
}

/// Standard `p`-way layout of the timetable's hypergraph.
pub fn partition_timetable(
    tt: &Timetable,
    hg: &Hypergraph,
    p: usize,
    epsilon: f64,
    seed: u64,
) -> Result<PartitionLayout, PartitionError> {
    let cells = multilevel::partition_multilevel(hg, p, epsilon, seed)?;
    Ok(PartitionLayout::from_node_cells(tt, hg, &cells, p))
}

/// Two-level layout: `top_p` parents, each split into `child_p` children.
pub fn nested_partition(
    hg: &Hypergraph,
    tt: &Timetable,
    top_p: usize,
    child_p: usize,
    epsilon: f64,
    seed: u64,
) -> Result<NestedLayout, PartitionError> {
    let top_cells = multilevel::partition_multilevel(hg, top_p, epsilon, seed)?;
    let top = PartitionLayout::from_node_cells(tt, hg, &top_cells, top_p);
    let mut leaf_cells = vec![0; hg.num_nodes()];
    let mut unsplit = Vec::new();
    for q in 0..top_p {
        let members: Vec<usize> = (0..hg.num_nodes()).filter(|&v| top_cells[v] == q).collect();
        let sub = hg.induced(&members);
        let child_seed = seed.wrapping_add(q as u64 + 1);
        let children = if child_p <= 1 {
            Ok(vec![0; members.len()])
        } else {
            multilevel::partition_multilevel(&sub, child_p, epsilon, child_seed)
        };
        let children = match children {
            Ok(c) => c,
            Err(e) => {
                warn!("parent cell {} kept unsplit: {e}", q + 1);
                unsplit.push(q + 1);
                vec![0; members.len()]
            }
        };
        for (i, &v) in members.iter().enumerate() {
            leaf_cells[v] = q * child_p + children[i];
        }
    }
    let leaf = PartitionLayout::from_node_cells(tt, hg, &leaf_cells, top_p * child_p);
    Ok(NestedLayout {
        top,
        child_p,
        leaf,
        unsplit,
    })
}

pub fn build_layout(
    tt: &Timetable,
    scheme: WeightScheme,
    spec: PartitionSpec,
    epsilon: f64,
    seed: u64,
) -> Result<Layout, PartitionError> {
    let hg = Hypergraph::build(tt, scheme);
    Ok(match spec {
        PartitionSpec::Flat(p) => Layout::Standard(partition_timetable(tt, &hg, p, epsilon, seed)?),
        PartitionSpec::Nested(a, b) => Layout::Nested(nested_partition(&hg, tt, a, b, epsilon, seed)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timetable::test_support::build;

    fn chain() -> Timetable {
        // Routes 0-1-2, 2-3-4, 4-5-0 and 1-6 with a walk 3-6.
        build(
            7,
            &[
                (&[0, 1, 2], &[&[0, 60, 120]]),
                (&[2, 3, 4], &[&[0, 60, 120]]),
                (&[4, 5, 0], &[&[0, 60, 120]]),
                (&[1, 6], &[&[0, 60]]),
            ],
            &[(3, 6, 100)],
        )
    }

    #[test]
    fn stop_cells_partition_stops() {
        let tt = chain();
        let l = derive_cells(&tt, &[1, 2, 2, 1], 2);
        // The walk touches cells 1 and 2, so it takes cell 1 and makes
        // stop 3 a cutstop.
        assert_eq!(l.footpath_cells, vec![(3, 6, 1)]);
        assert_eq!(l.cutstops(), vec![0, 2, 3]);
        assert_eq!(l.stop_cell(1), vec![1, 6]);
        assert_eq!(l.stop_cell(2), vec![4, 5]);
        let total: usize = (0..=2).map(|c| l.stop_cell(c).len()).sum();
        assert_eq!(total, tt.num_stops());
    }

    #[test]
    fn one_cell_has_no_cutstops() {
        let tt = chain();
        let l = derive_cells(&tt, &[1; 4], 1);
        assert!(l.cutstops().is_empty());
        assert_eq!(l.scut(), (0, 0.0));
    }

    #[test]
    fn nested_levels_are_disjoint() {
        let tt = chain();
        let hg = Hypergraph::build(&tt, WeightScheme::Sc1);
        let n = nested_partition(&hg, &tt, 2, 2, 0.5, 3).unwrap();
        let l1: BTreeSet<_> = n.level1_cutstops().into_iter().collect();
        for q in 1..=2 {
            for s in n.level2_cutstops(q) {
                assert!(!l1.contains(&s));
            }
        }
        for s in 0..tt.num_stops() {
            if n.top.stop_cells[s] == 0 {
                assert_eq!(n.leaf.stop_cells[s], 0);
            }
        }
    }

    #[test]
    fn specs_parse() {
        assert_eq!("6".parse::<PartitionSpec>(), Ok(PartitionSpec::Flat(6)));
        assert_eq!("3x2".parse::<PartitionSpec>(), Ok(PartitionSpec::Nested(3, 2)));
        assert_eq!(PartitionSpec::Nested(3, 2).to_string(), "3x2");
        assert!("0".parse::<PartitionSpec>().is_err());
        assert!("2x".parse::<PartitionSpec>().is_err());
    }

    #[test]
    fn layout_json_round_trip() {
        let tt = chain();
        let l = Layout::Standard(derive_cells(&tt, &[1, 2, 2, 1], 2));
        let file = LayoutFile::new(l, WeightScheme::Sc3, 0.2, 1);
        let text = serde_json::to_string(&file).unwrap();
        assert_eq!(serde_json::from_str::<LayoutFile>(&text).unwrap(), file);
    }
}
