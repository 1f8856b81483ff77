//! Canonical forms of colored multigraphs with legs.
//!
//! Vertices carry a color, every edge carries a label and one label per
//! half-edge, and legs carry labels. Colors are refined by
//! Weisfeiler-Leman rounds; the canonical code is then the least encoding
//! over all vertex orders compatible with the refined classes.

use std::collections::{BTreeMap, BTreeSet};

/// A graph with string colors on vertices, edges, half-edges and legs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ColoredGraph {
    pub vertex_colors: Vec<String>,
    /// `(ends, half labels, edge label)`; half label `i` sits at `ends[i]`.
    pub edges: Vec<([usize; 2], [String; 2], String)>,
    pub legs: Vec<(usize, String)>,
}

/// Palette of color strings plus the minimal integer code; equal forms
/// mean isomorphic colored graphs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalForm {
    pub palette: Vec<String>,
    pub code: Vec<i64>,
}

pub fn canonical_form(g: &ColoredGraph) -> CanonicalForm {
    let palette: Vec<String> = g
        .vertex_colors
        .iter()
        .chain(g.edges.iter().flat_map(|(_, h, e)| h.iter().chain(std::iter::once(e))))
        .chain(g.legs.iter().map(|(_, l)| l))
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let idx = |s: &String| palette.binary_search(s).unwrap() as i64;
    let n = g.vertex_colors.len();
    let vcol: Vec<i64> = g.vertex_colors.iter().map(idx).collect();
    let edges: Vec<([usize; 2], [i64; 2], i64)> = g
        .edges
        .iter()
        .map(|(ends, h, e)| (*ends, [idx(&h[0]), idx(&h[1])], idx(e)))
        .collect();
    let legs: Vec<(usize, i64)> = g.legs.iter().map(|(v, l)| (*v, idx(l))).collect();

    let classes = refine(n, &vcol, &edges, &legs);
    let mut blocks: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..n {
        blocks.entry(classes[v]).or_default().push(v);
    }
    let blocks: Vec<Vec<usize>> = blocks.into_values().collect();

    let mut best: Option<Vec<i64>> = None;
    let mut pos = vec![0usize; n];
    search_orders(&blocks, 0, 0, &mut pos, &mut |pos| {
        let code = encode(pos, &vcol, &edges, &legs);
        if best.as_ref().is_none_or(|b| code < *b) {
            best = Some(code);
        }
    });
    CanonicalForm {
        palette,
        code: best.unwrap_or_else(|| vec![0]),
    }
}

/// The integer code alone (palette-relative).
pub fn canonical_encoding(g: &ColoredGraph) -> Vec<i64> {
    canonical_form(g).code
}

pub fn isomorphic(a: &ColoredGraph, b: &ColoredGraph) -> bool {
    a.vertex_colors.len() == b.vertex_colors.len()
        && a.edges.len() == b.edges.len()
        && a.legs.len() == b.legs.len()
        && canonical_form(a) == canonical_form(b)
}

type Signature = (usize, Vec<(i64, i64, i64, usize)>);

fn refine(n: usize, vcol: &[i64], edges: &[([usize; 2], [i64; 2], i64)], legs: &[(usize, i64)]) -> Vec<usize> {
    let initial: Vec<(i64, Vec<i64>)> = (0..n)
        .map(|v| {
            let mut ls: Vec<i64> = legs.iter().filter(|l| l.0 == v).map(|l| l.1).collect();
            ls.sort();
            (vcol[v], ls)
        })
        .collect();
    let mut classes = rank(&initial);
    loop {
        let sigs: Vec<Signature> = (0..n)
            .map(|v| {
                let mut nb = Vec::new();
                for (ends, h, e) in edges {
                    for side in 0..2 {
                        if ends[side] == v {
                            nb.push((*e, h[side], h[1 - side], classes[ends[1 - side]]));
                        }
                    }
                }
                nb.sort();
                (classes[v], nb)
            })
            .collect();
        let next = rank(&sigs);
        let count = |c: &[usize]| c.iter().collect::<BTreeSet<_>>().len();
        if count(&next) == count(&classes) {
            return next;
        }
        classes = next;
    }
}

fn rank<T: Ord + Clone>(items: &[T]) -> Vec<usize> {
    let sorted: Vec<T> = items.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    items.iter().map(|x| sorted.binary_search(x).unwrap()).collect()
}

fn search_orders(
    blocks: &[Vec<usize>],
    b: usize,
    offset: usize,
    pos: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]),
) {
    if b == blocks.len() {
        visit(pos);
        return;
    }
    let block = &blocks[b];
    let mut perm: Vec<usize> = (0..block.len()).collect();
    loop {
        for (i, &v) in block.iter().enumerate() {
            pos[v] = offset + perm[i];
        }
        search_orders(blocks, b + 1, offset + block.len(), pos, visit);
        if !next_permutation(&mut perm) {
            break;
        }
    }
}

pub(crate) fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

fn encode(pos: &[usize], vcol: &[i64], edges: &[([usize; 2], [i64; 2], i64)], legs: &[(usize, i64)]) -> Vec<i64> {
    let n = pos.len();
    let mut at = vec![0usize; n];
    for v in 0..n {
        at[pos[v]] = v;
    }
    let mut code = vec![n as i64];
    code.extend(at.iter().map(|&v| vcol[v]));
    let mut ls: Vec<(i64, i64)> = legs.iter().map(|&(v, l)| (pos[v] as i64, l)).collect();
    ls.sort();
    code.push(ls.len() as i64);
    for (p, l) in ls {
        code.extend([p, l]);
    }
    let mut es: Vec<[i64; 5]> = edges
        .iter()
        .map(|(ends, h, e)| {
            let a = (pos[ends[0]] as i64, h[0]);
            let b = (pos[ends[1]] as i64, h[1]);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            [lo.0, lo.1, hi.0, hi.1, *e]
        })
        .collect();
    es.sort();
    code.push(es.len() as i64);
    for e in es {
        code.extend(e);
    }
    code
}
