use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::timetable::{RouteId, StopId, Timetable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightScheme {
    Sc1,
    Sc2,
    Sc3,
}

impl std::str::FromStr for WeightScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "sc1" => Ok(WeightScheme::Sc1),
            "sc2" => Ok(WeightScheme::Sc2),
            "sc3" => Ok(WeightScheme::Sc3),
            _ => Err(format!("unknown weight scheme {s}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Route(RouteId),
    /// Footpath between two stops, `a < b`, treated as a two-stop route.
    Footpath(StopId, StopId),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Hyperedge {
    /// Sorted node ids.
    pub pins: Vec<usize>,
    pub weight: f64,
    /// Stops whose intersections were merged into this edge.
    pub stops: Vec<StopId>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Hypergraph {
    pub kinds: Vec<NodeKind>,
    pub node_weights: Vec<f64>,
    pub edges: Vec<Hyperedge>,
}

/// `ln(1 + x)`, so stops without events weigh zero.
fn log_weight(events: usize) -> f64 {
    (events as f64).ln_1p()
}

impl Hypergraph {
    /// Hand-built hypergraph; edges with fewer than two distinct pins are
    /// dropped and edges with equal pin sets merged.
    pub fn from_parts(node_weights: Vec<f64>, edges: Vec<(Vec<usize>, f64)>) -> Self {
        let kinds = (0..node_weights.len()).map(NodeKind::Route).collect();
        let edges = edges
            .into_iter()
            .map(|(pins, weight)| Hyperedge {
                pins,
                weight,
                stops: Vec::new(),
            })
            .collect();
        Self::normalized(kinds, node_weights, edges)
    }

    fn normalized(kinds: Vec<NodeKind>, node_weights: Vec<f64>, edges: Vec<Hyperedge>) -> Self {
        let mut merged: BTreeMap<Vec<usize>, Hyperedge> = BTreeMap::new();
        for mut e in edges {
            e.pins.sort_unstable();
            e.pins.dedup();
            if e.pins.len() < 2 {
                continue;
            }
            match merged.get_mut(&e.pins) {
                Some(m) => {
                    m.weight += e.weight;
                    m.stops.extend(e.stops);
                }
                None => {
                    merged.insert(e.pins.clone(), e);
                }
            }
        }
        Hypergraph {
            kinds,
            node_weights,
            edges: merged.into_values().collect(),
        }
    }

    pub fn build(tt: &Timetable, scheme: WeightScheme) -> Self {
        let events = tt.events_per_stop();
        let mut kinds: Vec<NodeKind> = (0..tt.num_routes()).map(NodeKind::Route).collect();
        kinds.extend(tt.footpaths.edges().map(|(a, b, _)| NodeKind::Footpath(a, b)));
        let node_weights = kinds
            .iter()
            .map(|k| match (scheme, k) {
                (WeightScheme::Sc1, _) => 1.0,
                (_, NodeKind::Route(r)) => {
                    (tt.routes[*r].len() * tt.routes[*r].num_trips) as f64
                }
                (_, NodeKind::Footpath(..)) => 0.0,
            })
            .collect();
        let mut pins: Vec<Vec<usize>> = vec![Vec::new(); tt.num_stops()];
        for (v, k) in kinds.iter().enumerate() {
            match *k {
                NodeKind::Route(r) => {
                    for &s in &tt.routes[r].stops {
                        pins[s].push(v);
                    }
                }
                NodeKind::Footpath(a, b) => {
                    pins[a].push(v);
                    pins[b].push(v);
                }
            }
        }
        let edges = pins
            .into_iter()
            .enumerate()
            .map(|(s, pins)| {
                let weight = match scheme {
                    WeightScheme::Sc1 => 1.0,
                    WeightScheme::Sc2 => log_weight(events[s]),
                    WeightScheme::Sc3 => {
                        log_weight(tt.walk_from(s).map(|(x, _)| events[x]).sum())
                    }
                };
                Hyperedge {
                    pins,
                    weight,
                    stops: vec![s],
                }
            })
            .collect();
        Self::normalized(kinds, node_weights, edges)
    }

    pub fn num_nodes(&self) -> usize {
        self.kinds.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn total_node_weight(&self) -> f64 {
        self.node_weights.iter().sum()
    }

    pub fn total_edge_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// Edge ids per node.
    pub fn incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.num_nodes()];
        for (e, edge) in self.edges.iter().enumerate() {
            for &v in &edge.pins {
                inc[v].push(e);
            }
        }
        inc
    }

    /// Total weight of edges whose pins lie in more than one cell.
    pub fn cut_weight(&self, cells: &[usize]) -> f64 {
        self.edges
            .iter()
            .filter(|e| e.pins.iter().any(|&v| cells[v] != cells[e.pins[0]]))
            .map(|e| e.weight)
            .sum()
    }

    pub fn cell_weights(&self, cells: &[usize], p: usize) -> Vec<f64> {
        let mut w = vec![0.0; p];
        for (v, &c) in cells.iter().enumerate() {
            w[c] += self.node_weights[v];
        }
        w
    }

    /// Sub-hypergraph on `nodes` (in the given order); edges keep only pins
    /// inside and are dropped below two pins.
    pub fn induced(&self, nodes: &[usize]) -> Hypergraph {
        let mut local = vec![usize::MAX; self.num_nodes()];
        for (i, &v) in nodes.iter().enumerate() {
            local[v] = i;
        }
        let edges = self
            .edges
            .iter()
            .map(|e| Hyperedge {
                pins: e
                    .pins
                    .iter()
                    .filter(|&&v| local[v] != usize::MAX)
                    .map(|&v| local[v])
                    .collect(),
                weight: e.weight,
                stops: e.stops.clone(),
            })
            .collect();
        Self::normalized(
            nodes.iter().map(|&v| self.kinds[v]).collect(),
            nodes.iter().map(|&v| self.node_weights[v]).collect(),
            edges,
        )
    }

    /// Merges nodes by `map` (fine node -> coarse node).
    pub fn contract(&self, map: &[usize], coarse_nodes: usize) -> Hypergraph {
        let mut weights = vec![0.0; coarse_nodes];
        let mut kinds = vec![None; coarse_nodes];
        for (v, &c) in map.iter().enumerate() {
            weights[c] += self.node_weights[v];
            kinds[c].get_or_insert(self.kinds[v]);
        }
        let edges = self
            .edges
            .iter()
            .map(|e| Hyperedge {
                pins: e.pins.iter().map(|&v| map[v]).collect(),
                weight: e.weight,
                stops: e.stops.clone(),
            })
            .collect();
        Self::normalized(
            kinds.into_iter().map(|k| k.expect("every coarse node has a member")).collect(),
            weights,
            edges,
        )
    }
}
