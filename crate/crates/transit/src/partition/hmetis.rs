//! hMETIS hypergraph files (format code 11: edge and node weights) and
//! partition label files.
//!
//! hMETIS wants positive integer weights. Weights are written unchanged when
//! all of a kind are integral and at least 1, otherwise scaled by 1000,
//! rounded and clamped to at least 1.

use std::fmt::Write as _;

use super::hypergraph::Hypergraph;
use super::PartitionError;

const SCALE: f64 = 1000.0;

fn integer_weights(ws: &[f64]) -> Vec<u64> {
    let integral = ws.iter().all(|&w| w >= 1.0 && w.fract() == 0.0);
    ws.iter()
        .map(|&w| {
            let x = if integral { w } else { (w * SCALE).round() };
            (x as u64).max(1)
        })
        .collect()
}

pub fn export(hg: &Hypergraph) -> String {
    let edge_w = integer_weights(&hg.edges.iter().map(|e| e.weight).collect::<Vec<_>>());
    let node_w = integer_weights(&hg.node_weights);
    let mut out = format!("{} {} 11\n", hg.num_edges(), hg.num_nodes());
    for (e, w) in hg.edges.iter().zip(&edge_w) {
        let _ = write!(out, "{w}");
        for &v in &e.pins {
            let _ = write!(out, " {}", v + 1);
        }
        out.push('\n');
    }
    for w in node_w {
        let _ = writeln!(out, "{w}");
    }
    out
}

fn format_err(line: usize, msg: impl Into<String>) -> PartitionError {
    PartitionError::Format {
        line,
        msg: msg.into(),
    }
}

fn numbers(line: usize, text: &str) -> Result<Vec<u64>, PartitionError> {
    text.split_whitespace()
        .map(|x| x.parse().map_err(|_| format_err(line, format!("not a number: {x}"))))
        .collect()
}

/// Reads format codes 0, 1, 10 and 11; `%` lines are comments.
pub fn import_hypergraph(text: &str) -> Result<Hypergraph, PartitionError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));
    let (hl, header) = lines.next().ok_or_else(|| format_err(1, "missing header"))?;
    let head = numbers(hl, header)?;
    let (num_edges, num_nodes, fmt) = match head.as_slice() {
        [e, v] => (*e as usize, *v as usize, 0),
        [e, v, f] => (*e as usize, *v as usize, *f),
        _ => return Err(format_err(hl, "header needs 2 or 3 fields")),
    };
    let edge_weighted = fmt % 10 == 1;
    let node_weighted = fmt / 10 == 1;
    if fmt > 11 || fmt % 10 > 1 {
        return Err(format_err(hl, format!("unknown format code {fmt}")));
    }
    let mut edges = Vec::with_capacity(num_edges);
    for _ in 0..num_edges {
        let (l, text) = lines.next().ok_or_else(|| format_err(hl, "too few edge lines"))?;
        let mut nums = numbers(l, text)?;
        let weight = if edge_weighted {
            if nums.is_empty() {
                return Err(format_err(l, "missing edge weight"));
            }
            nums.remove(0) as f64
        } else {
            1.0
        };
        let mut pins = Vec::with_capacity(nums.len());
        for x in nums {
            if x == 0 || x as usize > num_nodes {
                return Err(format_err(l, format!("pin {x} out of range 1..={num_nodes}")));
            }
            pins.push(x as usize - 1);
        }
        edges.push((pins, weight));
    }
    let mut node_weights = vec![1.0; num_nodes];
    if node_weighted {
        for w in node_weights.iter_mut() {
            let (l, text) = lines.next().ok_or_else(|| format_err(hl, "too few node weight lines"))?;
            match numbers(l, text)?.as_slice() {
                [x] => *w = *x as f64,
                _ => return Err(format_err(l, "expected one node weight")),
            }
        }
    }
    if let Some((l, _)) = lines.next() {
        return Err(format_err(l, "trailing content"));
    }
    Ok(Hypergraph::from_parts(node_weights, edges))
}

/// One 0-based cell label per line, as written by hMETIS and KaHyPar.
pub fn import_partition(text: &str, num_nodes: usize, p: usize) -> Result<Vec<usize>, PartitionError> {
    let mut cells = Vec::with_capacity(num_nodes);
    for (i, l) in text.lines().enumerate() {
        let l = l.trim();
        if l.is_empty() {
            continue;
        }
        let c: usize = l
            .parse()
            .map_err(|_| format_err(i + 1, format!("not a cell label: {l}")))?;
        if c >= p {
            return Err(format_err(i + 1, format!("cell {c} out of range 0..{p}")));
        }
        cells.push(c);
    }
    if cells.len() != num_nodes {
        return Err(format_err(
            text.lines().count(),
            format!("expected {num_nodes} labels, found {}", cells.len()),
        ));
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integral_weights_kept_fractional_scaled() {
        assert_eq!(integer_weights(&[1.0, 3.0]), vec![1, 3]);
        assert_eq!(integer_weights(&[0.5, 2.0, 0.0]), vec![500, 2000, 1]);
    }

    #[test]
    fn reads_unweighted_files() {
        let hg = import_hypergraph("% comment\n2 3\n1 2\n2 3\n").unwrap();
        assert_eq!(hg.node_weights, vec![1.0; 3]);
        assert_eq!(hg.total_edge_weight(), 2.0);
    }

    #[test]
    fn rejects_bad_pins() {
        assert!(matches!(
            import_hypergraph("1 2 1\n3 1 3\n"),
            Err(PartitionError::Format { line: 2, .. })
        ));
    }

    #[test]
    fn partition_labels() {
        assert_eq!(import_partition("0\n1\n1\n", 3, 2).unwrap(), vec![0, 1, 1]);
        assert!(import_partition("0\n2\n", 2, 2).is_err());
        assert!(import_partition("0\n", 2, 2).is_err());
    }
}
