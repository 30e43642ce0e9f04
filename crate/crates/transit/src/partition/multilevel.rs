//! Multilevel partitioner: heavy-edge coarsening, greedy growth on the
//! coarsest level and Fiduccia-Mattheyses refinement while uncoarsening.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use super::hypergraph::Hypergraph;
use super::PartitionError;
use crate::synth::stream;

const EPS: f64 = 1e-9;
pub const FM_PASSES: usize = 16;
const RESTARTS: usize = 16;
/// Edges larger than this are ignored when rating contraction partners.
const RATING_PIN_CAP: usize = 64;

/// Allowed cell weight range `(1 - epsilon, 1 + epsilon) * total / p`.
pub fn balance_bounds(total: f64, p: usize, epsilon: f64) -> (f64, f64) {
    let avg = total / p as f64;
    ((1.0 - epsilon) * avg, (1.0 + epsilon) * avg)
}

struct State<'a> {
    hg: &'a Hypergraph,
    inc: Vec<Vec<usize>>,
    p: usize,
    lower: f64,
    upper: f64,
    cells: Vec<usize>,
    load: Vec<f64>,
    counts: Vec<Vec<u32>>,
    spans: Vec<u32>,
    cut: f64,
}

impl<'a> State<'a> {
    fn new(hg: &'a Hypergraph, p: usize, lower: f64, upper: f64, cells: Vec<usize>) -> Self {
        let mut s = State {
            hg,
            inc: hg.incidence(),
            p,
            lower,
            upper,
            load: vec![0.0; p],
            counts: vec![vec![0; p]; hg.num_edges()],
            spans: vec![0; hg.num_edges()],
            cut: 0.0,
            cells,
        };
        for v in 0..hg.num_nodes() {
            let c = s.cells[v];
            s.load[c] += hg.node_weights[v];
            for &e in &s.inc[v] {
                if s.counts[e][c] == 0 {
                    s.spans[e] += 1;
                }
                s.counts[e][c] += 1;
            }
        }
        s.cut = hg.cut_weight(&s.cells);
        s
    }

    fn balanced(&self) -> bool {
        self.load
            .iter()
            .all(|&l| l >= self.lower - EPS && l <= self.upper + EPS)
    }

    /// Cut reduction from moving `v` to `to`.
    fn gain(&self, v: usize, to: usize) -> f64 {
        let from = self.cells[v];
        let mut g = 0.0;
        for &e in &self.inc[v] {
            let before = self.spans[e];
            let after = before - u32::from(self.counts[e][from] == 1)
                + u32::from(self.counts[e][to] == 0);
            let w = self.hg.edges[e].weight;
            if before >= 2 && after < 2 {
                g += w;
            } else if before < 2 && after >= 2 {
                g -= w;
            }
        }
        g
    }

    fn apply(&mut self, v: usize, to: usize) {
        let g = self.gain(v, to);
        let from = self.cells[v];
        let w = self.hg.node_weights[v];
        for &e in &self.inc[v] {
            self.counts[e][from] -= 1;
            if self.counts[e][from] == 0 {
                self.spans[e] -= 1;
            }
            if self.counts[e][to] == 0 {
                self.spans[e] += 1;
            }
            self.counts[e][to] += 1;
        }
        self.load[from] -= w;
        self.load[to] += w;
        self.cells[v] = to;
        self.cut -= g;
    }

    fn move_allowed(&self, v: usize, to: usize) -> bool {
        let from = self.cells[v];
        let w = self.hg.node_weights[v];
        if from == to || self.load[to] + w > self.upper + EPS {
            return false;
        }
        // An underfull source may not shrink further unless it is already
        // below the bound because of an infeasible start.
        self.load[from] - w >= self.lower - EPS || w == 0.0
    }

    fn best_move(&self, locked: &[bool]) -> Option<(f64, usize, usize)> {
        let mut best: Option<(f64, usize, usize)> = None;
        for v in 0..self.cells.len() {
            if locked[v] {
                continue;
            }
            for to in 0..self.p {
                if !self.move_allowed(v, to) {
                    continue;
                }
                let g = self.gain(v, to);
                if best.is_none_or(|(b, _, _)| g > b + EPS) {
                    best = Some((g, v, to));
                }
            }
        }
        best
    }

    fn refine(&mut self, passes: usize) {
        for _ in 0..passes {
            let mut locked = vec![false; self.cells.len()];
            let mut history: Vec<(usize, usize)> = Vec::new();
            let start = self.cut;
            let mut best = self.cut;
            let mut best_len = 0;
            while let Some((_, v, to)) = self.best_move(&locked) {
                history.push((v, self.cells[v]));
                self.apply(v, to);
                locked[v] = true;
                if self.cut < best - EPS {
                    best = self.cut;
                    best_len = history.len();
                }
            }
            while history.len() > best_len {
                let (v, from) = history.pop().expect("non-empty");
                self.apply(v, from);
            }
            if best_len == 0 || best >= start - EPS {
                break;
            }
        }
    }

    /// Moves nodes out of overfull and into underfull cells, cheapest first.
    fn rebalance(&mut self) {
        for _ in 0..4 * self.cells.len() + 4 {
            if self.balanced() {
                return;
            }
            let over = (0..self.p).find(|&c| self.load[c] > self.upper + EPS);
            let under = (0..self.p).find(|&c| self.load[c] < self.lower - EPS);
            let mut best: Option<(f64, usize, usize)> = None;
            for v in 0..self.cells.len() {
                let from = self.cells[v];
                let w = self.hg.node_weights[v];
                for to in 0..self.p {
                    if to == from || w == 0.0 {
                        continue;
                    }
                    let ok = match (over, under) {
                        (Some(o), _) => from == o && self.load[to] + w <= self.upper + EPS,
                        (None, Some(u)) => {
                            to == u && self.load[from] - w >= self.lower - EPS
                        }
                        (None, None) => false,
                    };
                    if ok {
                        let g = self.gain(v, to);
                        if best.is_none_or(|(b, _, _)| g > b + EPS) {
                            best = Some((g, v, to));
                        }
                    }
                }
            }
            match best {
                Some((_, v, to)) => self.apply(v, to),
                None => return,
            }
        }
    }
}

fn greedy_growth(hg: &Hypergraph, inc: &[Vec<usize>], p: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = hg.num_nodes();
    let target = hg.total_node_weight() / p as f64;
    let mut cells = vec![usize::MAX; n];
    let mut conn = vec![0.0; n];
    for c in 0..p.saturating_sub(1) {
        let free: Vec<usize> = (0..n).filter(|&v| cells[v] == usize::MAX).collect();
        let Some(&seed) = free.choose(rng) else {
            break;
        };
        conn.iter_mut().for_each(|x| *x = 0.0);
        let mut load = 0.0;
        let mut next = Some(seed);
        while let Some(v) = next {
            cells[v] = c;
            load += hg.node_weights[v];
            for &e in &inc[v] {
                for &u in &hg.edges[e].pins {
                    conn[u] += hg.edges[e].weight;
                }
            }
            if load >= target - EPS {
                break;
            }
            next = None;
            let mut best = f64::NEG_INFINITY;
            for u in 0..n {
                if cells[u] == usize::MAX
                    && load + hg.node_weights[u] <= target + EPS
                    && conn[u] > best
                {
                    best = conn[u];
                    next = Some(u);
                }
            }
        }
    }
    for c in cells.iter_mut() {
        if *c == usize::MAX {
            *c = p - 1;
        }
    }
    cells
}

fn coarsen(hg: &Hypergraph, inc: &[Vec<usize>], limit: f64, rng: &mut ChaCha8Rng) -> Option<(Vec<usize>, usize)> {
    let n = hg.num_nodes();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut map = vec![usize::MAX; n];
    let mut next_id = 0;
    let mut score = vec![0.0; n];
    let mut touched = Vec::new();
    for &u in &order {
        if map[u] != usize::MAX {
            continue;
        }
        for &e in &inc[u] {
            let pins = &hg.edges[e].pins;
            if pins.len() > RATING_PIN_CAP {
                continue;
            }
            let r = hg.edges[e].weight / (pins.len() - 1) as f64;
            for &v in pins {
                if v != u && map[v] == usize::MAX {
                    if score[v] == 0.0 {
                        touched.push(v);
                    }
                    score[v] += r;
                }
            }
        }
        let mut partner = None;
        let mut best = 0.0;
        for &v in &touched {
            if hg.node_weights[u] + hg.node_weights[v] <= limit + EPS
                && (score[v] > best + EPS || (partner.is_some() && (score[v] - best).abs() <= EPS && Some(v) < partner))
            {
                best = score[v];
                partner = Some(v);
            }
        }
        for &v in &touched {
            score[v] = 0.0;
        }
        touched.clear();
        map[u] = next_id;
        if let Some(v) = partner {
            map[v] = next_id;
        }
        next_id += 1;
    }
    if next_id as f64 > 0.95 * n as f64 {
        None
    } else {
        Some((map, next_id))
    }
}

/// Balanced `p`-way partition of `hg` minimising the cut weight.
pub fn partition_multilevel(
    hg: &Hypergraph,
    p: usize,
    epsilon: f64,
    seed: u64,
) -> Result<Vec<usize>, PartitionError> {
    let n = hg.num_nodes();
    if p == 0 || p > n.max(1) {
        return Err(PartitionError::TooManyCells { cells: p, nodes: n });
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(PartitionError::BadEpsilon(epsilon));
    }
    if p == 1 {
        return Ok(vec![0; n]);
    }
    let (lower, upper) = balance_bounds(hg.total_node_weight(), p, epsilon);
    for (v, &w) in hg.node_weights.iter().enumerate() {
        if w > upper + EPS {
            return Err(PartitionError::NodeTooHeavy {
                node: v,
                weight: w,
                bound: upper,
            });
        }
    }
    let mut rng = stream(seed, "partition");

    let mut levels: Vec<Hypergraph> = vec![hg.clone()];
    let mut maps: Vec<Vec<usize>> = Vec::new();
    let stop_at = (8 * p).max(50);
    loop {
        let top = levels.last().expect("non-empty");
        if top.num_nodes() <= stop_at {
            break;
        }
        let inc = top.incidence();
        match coarsen(top, &inc, upper / 2.0, &mut rng) {
            Some((map, count)) => {
                let coarse = top.contract(&map, count);
                maps.push(map);
                levels.push(coarse);
            }
            None => break,
        }
    }

    let coarsest = levels.last().expect("non-empty");
    let inc = coarsest.incidence();
    let mut best: Option<(bool, f64, Vec<usize>)> = None;
    for _ in 0..RESTARTS {
        let cells = greedy_growth(coarsest, &inc, p, &mut rng);
        let mut s = State::new(coarsest, p, lower, upper, cells);
        s.rebalance();
        s.refine(FM_PASSES);
        let key = (s.balanced(), s.cut);
        let better = match &best {
            None => true,
            Some((b, c, _)) => (key.0 && !*b) || (key.0 == *b && key.1 < *c - EPS),
        };
        if better {
            best = Some((key.0, key.1, s.cells));
        }
    }
    let mut cells = best.expect("at least one restart").2;

    for level in (0..maps.len()).rev() {
        let fine = &levels[level];
        let projected: Vec<usize> = maps[level].iter().map(|&c| cells[c]).collect();
        let mut s = State::new(fine, p, lower, upper, projected);
        s.rebalance();
        s.refine(FM_PASSES);
        cells = s.cells;
    }
    let s = State::new(hg, p, lower, upper, cells);
    if !s.balanced() {
        return Err(PartitionError::Infeasible(format!(
            "no {p}-way partition within epsilon {epsilon} was found"
        )));
    }
    Ok(s.cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::exact::partition_exact;
    use rand::Rng;

    fn two_clusters() -> Hypergraph {
        Hypergraph::from_parts(
            vec![1.0; 6],
            vec![
                (vec![0, 1, 2], 4.0),
                (vec![3, 4, 5], 4.0),
                (vec![0, 1], 2.0),
                (vec![4, 5], 2.0),
                (vec![2, 3], 1.0),
            ],
        )
    }

    #[test]
    fn finds_the_obvious_split() {
        let hg = two_clusters();
        let cells = partition_multilevel(&hg, 2, 0.2, 1).unwrap();
        assert_eq!(hg.cut_weight(&cells), 1.0);
        assert_eq!(cells[0], cells[2]);
        assert_ne!(cells[0], cells[3]);
    }

    #[test]
    fn deterministic_for_seed() {
        let hg = two_clusters();
        assert_eq!(
            partition_multilevel(&hg, 3, 0.3, 9).unwrap(),
            partition_multilevel(&hg, 3, 0.3, 9).unwrap()
        );
    }

    #[test]
    fn single_cell() {
        let cells = partition_multilevel(&two_clusters(), 1, 0.2, 0).unwrap();
        assert!(cells.iter().all(|&c| c == 0));
    }

    #[test]
    fn errors() {
        let hg = two_clusters();
        assert!(matches!(
            partition_multilevel(&hg, 7, 0.2, 0),
            Err(PartitionError::TooManyCells { .. })
        ));
        let heavy = Hypergraph::from_parts(vec![10.0, 1.0, 1.0], vec![]);
        assert!(matches!(
            partition_multilevel(&heavy, 2, 0.2, 0),
            Err(PartitionError::NodeTooHeavy { node: 0, .. })
        ));
    }

    #[test]
    fn balance_respected_on_larger_instance() {
        let mut rng = stream(4, "test");
        let n = 120;
        let edges = (0..200)
            .map(|_| {
                let a = rng.gen_range(0..n);
                let b = (a + rng.gen_range(1..6)) % n;
                (vec![a, b], f64::from(rng.gen_range(1u8..5)))
            })
            .collect();
        let hg = Hypergraph::from_parts(vec![1.0; n], edges);
        let cells = partition_multilevel(&hg, 4, 0.1, 2).unwrap();
        let (lo, hi) = balance_bounds(n as f64, 4, 0.1);
        for w in hg.cell_weights(&cells, 4) {
            assert!(w >= lo - 1e-9 && w <= hi + 1e-9);
        }
    }

    #[test]
    fn matches_exact_on_small_clusters() {
        let hg = two_clusters();
        let (lo, hi) = balance_bounds(6.0, 2, 0.2);
        let exact = partition_exact(&hg, 2, &[lo; 2], &[hi; 2]).unwrap();
        let cells = partition_multilevel(&hg, 2, 0.2, 3).unwrap();
        assert_eq!(hg.cut_weight(&cells), exact.cut);
    }
}
