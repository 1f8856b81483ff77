use std::collections::BTreeSet;

use super::canon::{canonical_form, ColoredGraph};
use super::{LevelStructure, MarkedDualGraph};
use crate::error::GraphError;

/// Default bound on the number of candidate level maps examined.
pub const DEFAULT_ENUMERATION_CAP: u128 = 2_000_000;

/// Number of surjections from `n` vertices onto `k <= max_levels` levels
/// (ordered set partitions; the Fubini number when unbounded).
pub fn ordered_partition_count(n: usize, max_levels: Option<usize>) -> u128 {
    let kmax = max_levels.unwrap_or(n).min(n);
    // surj(n, k) = sum_j (-1)^j C(k, j) (k - j)^n
    (1..=kmax)
        .map(|k| {
            let mut total: i128 = 0;
            let mut binom: i128 = 1;
            for j in 0..=k {
                let term = binom * (k as i128 - j as i128).pow(n as u32);
                total += if j % 2 == 0 { term } else { -term };
                binom = binom * (k - j) as i128 / (j + 1) as i128;
            }
            total as u128
        })
        .sum()
}

/// The colored graph used for isomorphism of level graphs: vertices are
/// colored by genus and level, legs by their mu-label.
pub fn level_graph_colors(graph: &MarkedDualGraph, levels: Option<&LevelStructure>) -> ColoredGraph {
    ColoredGraph {
        vertex_colors: (0..graph.vertex_count())
            .map(|v| {
                let l = levels.map_or(0, |ls| ls.level(v));
                format!("g{}|l{}", graph.vertices()[v].genus, l)
            })
            .collect(),
        edges: graph
            .edges()
            .iter()
            .map(|e| (e.ends, [String::new(), String::new()], String::new()))
            .collect(),
        legs: graph.legs().iter().map(|l| (l.vertex, l.mu.to_string())).collect(),
    }
}

/// Every normalized level structure on `graph`, one per isomorphism class of
/// level graphs (respecting genus, mu-labels and levels). Candidates are
/// generated in lexicographic order of their depth vectors, grouped by the
/// number of levels, and the first representative of each class is kept.
pub fn enumerate_level_structures(
    graph: &MarkedDualGraph,
    max_levels: Option<usize>,
    cap: u128,
) -> Result<Vec<LevelStructure>, GraphError> {
    let n = graph.vertex_count();
    if n == 0 {
        return Err(GraphError::Empty);
    }
    let needed = ordered_partition_count(n, max_levels);
    if needed > cap {
        return Err(GraphError::EnumerationCap { needed, cap });
    }
    let kmax = max_levels.unwrap_or(n).min(n).max(1);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for k in 1..=kmax {
        let mut depth = vec![0usize; n];
        loop {
            let used: BTreeSet<usize> = depth.iter().copied().collect();
            if used.len() == k {
                let raw: Vec<i64> = depth.iter().map(|&d| -(d as i64)).collect();
                let ls = LevelStructure::normalized(&raw);
                if seen.insert(canonical_form(&level_graph_colors(graph, Some(&ls)))) {
                    out.push(ls);
                }
            }
            if !increment(&mut depth, k) {
                break;
            }
        }
    }
    Ok(out)
}

/// Odometer step in base `k`, last position fastest.
fn increment(depth: &mut [usize], k: usize) -> bool {
    for i in (0..depth.len()).rev() {
        depth[i] += 1;
        if depth[i] < k {
            return true;
        }
        depth[i] = 0;
    }
    false
}
