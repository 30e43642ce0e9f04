//! Branch and bound for the uncut-weight maximisation on tiny hypergraphs.

use super::hypergraph::Hypergraph;
use super::PartitionError;

pub const MAX_EXACT_NODES: usize = 25;

#[derive(Clone, Debug, PartialEq)]
pub struct ExactSolution {
    pub cells: Vec<usize>,
    /// Total weight of uncut edges.
    pub objective: f64,
    pub cut: f64,
}

const EPS: f64 = 1e-9;

struct Search<'a> {
    hg: &'a Hypergraph,
    inc: Vec<Vec<usize>>,
    p: usize,
    lower: &'a [f64],
    upper: &'a [f64],
    cells: Vec<usize>,
    load: Vec<f64>,
    /// Per edge: assigned pins per cell, and the number of cells touched.
    counts: Vec<Vec<usize>>,
    touched: Vec<usize>,
    cut: f64,
    suffix_weight: Vec<f64>,
    best: Option<(f64, Vec<usize>)>,
}

impl Search<'_> {
    fn feasible_rest(&self, v: usize) -> bool {
        let missing: f64 = (0..self.p)
            .map(|c| (self.lower[c] - self.load[c]).max(0.0))
            .sum();
        missing <= self.suffix_weight[v] + EPS
    }

    fn go(&mut self, v: usize) {
        if let Some((best, _)) = &self.best {
            if self.cut >= *best - EPS {
                return;
            }
        }
        if v == self.hg.num_nodes() {
            if (0..self.p).all(|c| self.load[c] >= self.lower[c] - EPS) {
                self.best = Some((self.cut, self.cells.clone()));
            }
            return;
        }
        if !self.feasible_rest(v) {
            return;
        }
        let w = self.hg.node_weights[v];
        for c in 0..self.p {
            if self.load[c] + w > self.upper[c] + EPS {
                continue;
            }
            self.cells[v] = c;
            self.load[c] += w;
            let before = self.cut;
            for i in 0..self.inc[v].len() {
                let e = self.inc[v][i];
                if self.counts[e][c] == 0 {
                    self.touched[e] += 1;
                    if self.touched[e] == 2 {
                        self.cut += self.hg.edges[e].weight;
                    }
                }
                self.counts[e][c] += 1;
            }
            self.go(v + 1);
            for i in 0..self.inc[v].len() {
                let e = self.inc[v][i];
                self.counts[e][c] -= 1;
                if self.counts[e][c] == 0 {
                    self.touched[e] -= 1;
                }
            }
            self.cut = before;
            self.load[c] -= w;
        }
    }
}

/// Optimal assignment with cell weights in `lower[c]..=upper[c]`; among
/// optima the lexicographically smallest assignment is returned.
pub fn partition_exact(
    hg: &Hypergraph,
    p: usize,
    lower: &[f64],
    upper: &[f64],
) -> Result<ExactSolution, PartitionError> {
    let n = hg.num_nodes();
    if n > MAX_EXACT_NODES {
        return Err(PartitionError::TooLarge { nodes: n, max: MAX_EXACT_NODES });
    }
    if p == 0 || lower.len() != p || upper.len() != p {
        return Err(PartitionError::BadBounds);
    }
    if (0..p).any(|c| lower[c] > upper[c]) {
        return Err(PartitionError::Infeasible("a lower bound exceeds its upper bound".into()));
    }
    let mut suffix_weight = vec![0.0; n + 1];
    for v in (0..n).rev() {
        suffix_weight[v] = suffix_weight[v + 1] + hg.node_weights[v];
    }
    let mut s = Search {
        hg,
        inc: hg.incidence(),
        p,
        lower,
        upper,
        cells: vec![0; n],
        load: vec![0.0; p],
        counts: vec![vec![0; p]; hg.num_edges()],
        touched: vec![0; hg.num_edges()],
        cut: 0.0,
        suffix_weight,
        best: None,
    };
    s.go(0);
    match s.best {
        Some((_, cells)) => {
            let cut = hg.cut_weight(&cells);
            Ok(ExactSolution {
                objective: hg.total_edge_weight() - cut,
                cut,
                cells,
            })
        }
        None => Err(PartitionError::Infeasible(
            "no assignment satisfies the cell weight bounds".into(),
        )),
    }
}

/// Reference: every one of the `p^n` assignments.
pub fn exhaustive_best(hg: &Hypergraph, p: usize, lower: &[f64], upper: &[f64]) -> Option<f64> {
    let n = hg.num_nodes();
    let mut cells = vec![0usize; n];
    let mut best: Option<f64> = None;
    loop {
        let w = hg.cell_weights(&cells, p);
        if (0..p).all(|c| w[c] >= lower[c] - EPS && w[c] <= upper[c] + EPS) {
            let obj = hg.total_edge_weight() - hg.cut_weight(&cells);
            if best.is_none_or(|b| obj > b) {
                best = Some(obj);
            }
        }
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            cells[i] += 1;
            if cells[i] < p {
                break;
            }
            cells[i] = 0;
            i += 1;
        }
    }
}
