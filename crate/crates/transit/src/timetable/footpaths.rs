use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{StopId, Time};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FootpathError {
    #[error(
        "footpath component of {size} stops (containing stop {stop}) exceeds the cap of {cap}; \
         lower the walking threshold"
    )]
    ComponentTooLarge { size: usize, cap: usize, stop: StopId },
    #[error("walking threshold must be positive")]
    BadThreshold,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosureStats {
    /// Components with at least two stops.
    pub components: usize,
    pub largest_component: usize,
    pub input_edges: usize,
    pub closed_edges: usize,
    /// Input edges whose duration the closure shortened.
    pub shortened: usize,
}

/// Symmetric walking graph; adjacency lists sorted by neighbour id.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct FootpathGraph {
    adj: Vec<Vec<(StopId, Time)>>,
}

impl FootpathGraph {
    pub fn empty(num_stops: usize) -> Self {
        FootpathGraph {
            adj: vec![Vec::new(); num_stops],
        }
    }

    /// Symmetrises the given edges, keeping the shorter duration when both
    /// directions (or duplicates) appear. Self-loops are dropped.
    pub fn from_edges(
        num_stops: usize,
        edges: impl IntoIterator<Item = (StopId, StopId, Time)>,
    ) -> Self {
        let mut adj: Vec<Vec<(StopId, Time)>> = vec![Vec::new(); num_stops];
        for (a, b, d) in edges {
            if a == b {
                continue;
            }
            adj[a].push((b, d));
            adj[b].push((a, d));
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup_by_key(|e| e.0);
        }
        FootpathGraph { adj }
    }

    /// Raw adjacency, used by the snapshot reader. No checks.
    pub(crate) fn from_adjacency(adj: Vec<Vec<(StopId, Time)>>) -> Self {
        FootpathGraph { adj }
    }

    pub fn num_stops(&self) -> usize {
        self.adj.len()
    }

    /// Undirected edge count.
    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, s: StopId) -> &[(StopId, Time)] {
        &self.adj[s]
    }

    pub fn duration(&self, a: StopId, b: StopId) -> Option<Time> {
        let list = &self.adj[a];
        list.binary_search_by_key(&b, |e| e.0).ok().map(|k| list[k].1)
    }

    pub fn edges(&self) -> impl Iterator<Item = (StopId, StopId, Time)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(a, l)| l.iter().filter(move |e| e.0 > a).map(move |&(b, d)| (a, b, d)))
    }

    fn components(&self) -> Vec<Vec<StopId>> {
        let n = self.adj.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] || self.adj[start].is_empty() {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut k = 0;
            while k < comp.len() {
                for &(b, _) in &self.adj[comp[k]] {
                    if !seen[b] {
                        seen[b] = true;
                        comp.push(b);
                    }
                }
                k += 1;
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Min-plus transitive closure per connected component: each component
    /// becomes a clique weighted by shortest walking sums.
    pub fn closed(&self, cap: usize) -> Result<(FootpathGraph, ClosureStats), FootpathError> {
        let comps = self.components();
        if let Some(c) = comps.iter().find(|c| c.len() > cap) {
            return Err(FootpathError::ComponentTooLarge {
                size: c.len(),
                cap,
                stop: c[0],
            });
        }
        let closed: Vec<Vec<(StopId, StopId, Time)>> = comps
            .par_iter()
            .map(|comp| {
                let m = comp.len();
                let mut dist = vec![u64::MAX; m * m];
                for (x, &a) in comp.iter().enumerate() {
                    dist[x * m + x] = 0;
                    for &(b, d) in &self.adj[a] {
                        let y = comp.binary_search(&b).expect("neighbour in component");
                        dist[x * m + y] = dist[x * m + y].min(d as u64);
                    }
                }
                for k in 0..m {
                    for i in 0..m {
                        let dik = dist[i * m + k];
                        if dik == u64::MAX {
                            continue;
                        }
                        for j in 0..m {
                            let dkj = dist[k * m + j];
                            if dkj != u64::MAX && dik + dkj < dist[i * m + j] {
                                dist[i * m + j] = dik + dkj;
                            }
                        }
                    }
                }
                let mut edges = Vec::with_capacity(m * (m - 1) / 2);
                for i in 0..m {
                    for j in i + 1..m {
                        let d = dist[i * m + j].min(Time::MAX as u64 - 1) as Time;
                        edges.push((comp[i], comp[j], d));
                    }
                }
                edges
            })
            .collect();
        let graph = FootpathGraph::from_edges(self.adj.len(), closed.into_iter().flatten());
        let shortened = self
            .edges()
            .filter(|&(a, b, d)| graph.duration(a, b).is_some_and(|c| c < d))
            .count();
        let stats = ClosureStats {
            components: comps.len(),
            largest_component: comps.iter().map(Vec::len).max().unwrap_or(0),
            input_edges: self.num_edges(),
            closed_edges: graph.num_edges(),
            shortened,
        };
        Ok((graph, stats))
    }

    /// Symmetry, no self-loops, transitive closure and triangle inequality.
    pub fn validate(&self) -> Result<(), String> {
        for (a, list) in self.adj.iter().enumerate() {
            if list.windows(2).any(|w| w[0].0 >= w[1].0) {
                return Err(format!("footpaths of stop {a} not sorted or duplicated"));
            }
            for &(b, d) in list {
                if b == a {
                    return Err(format!("self-loop at stop {a}"));
                }
                if b >= self.adj.len() {
                    return Err(format!("footpath to unknown stop {b}"));
                }
                if self.duration(b, a) != Some(d) {
                    return Err(format!("footpath {a}-{b} not symmetric"));
                }
                for &(c, d2) in &self.adj[b] {
                    if c == a {
                        continue;
                    }
                    match self.duration(a, c) {
                        None => return Err(format!("footpaths {a}-{b}-{c} not closed")),
                        Some(direct) if direct as u64 > d as u64 + d2 as u64 => {
                            return Err(format!("triangle inequality fails on {a}-{b}-{c}"))
                        }
                        _ => {}
                    }
                }
            }
        }
        Ok(())
    }
}

/// Great-circle distance in metres.
pub fn haversine_m(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    const R: f64 = 6_371_000.0;
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * R * h.sqrt().min(1.0).asin()
}

/// Edges between stops whose walking time (distance / speed, rounded up)
/// is within the threshold, then closed.
pub fn build_footpaths(
    coords: &[(f64, f64)],
    walk_threshold_s: Time,
    walk_speed_mps: f64,
    component_cap: usize,
) -> Result<(FootpathGraph, ClosureStats), FootpathError> {
    if walk_threshold_s == 0 || walk_speed_mps <= 0.0 {
        return Err(FootpathError::BadThreshold);
    }
    let max_m = walk_threshold_s as f64 * walk_speed_mps;
    // One degree of latitude is ~111 km; skip pairs further apart than that
    // bound in latitude alone.
    let lat_window = max_m / 111_000.0 + 1e-9;
    let mut order: Vec<usize> = (0..coords.len()).collect();
    order.sort_by(|&a, &b| coords[a].0.total_cmp(&coords[b].0).then(a.cmp(&b)));
    let mut edges = Vec::new();
    for x in 0..order.len() {
        let a = order[x];
        for &b in &order[x + 1..] {
            if coords[b].0 - coords[a].0 > lat_window {
                break;
            }
            let dist = haversine_m(coords[a].0, coords[a].1, coords[b].0, coords[b].1);
            let secs = (dist / walk_speed_mps).ceil().max(1.0);
            if secs <= walk_threshold_s as f64 {
                edges.push((a.min(b), a.max(b), secs as Time));
            }
        }
    }
    FootpathGraph::from_edges(coords.len(), edges).closed(component_cap)
}
