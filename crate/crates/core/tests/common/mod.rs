//! Seeded random generators shared by the property tests.

#![allow(dead_code)]

use std::collections::{BTreeMap, VecDeque};

use drclosure::ev::ValueAssignment;
use drclosure::graph::GraphBuilder;
use drclosure::homology::{z_legs, RelativeCycle};
use drclosure::linalg::q;
use drclosure::twr::{PointKind, PointRef};
use drclosure::{Decoration, HalfEdge, LevelStructure, LinearForm, MarkedDualGraph, PointOrder};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Plain connected multigraph data; vertex `i` is named `v{i}`.
#[derive(Debug, Clone, Default)]
pub struct Shape {
    pub genus: Vec<u32>,
    pub edges: Vec<(usize, usize)>,
    pub legs: Vec<(usize, i64)>,
}

impl Shape {
    pub fn build(&self) -> MarkedDualGraph {
        let mut b = GraphBuilder::new();
        for (i, &g) in self.genus.iter().enumerate() {
            b = b.vertex(&format!("v{i}"), g);
        }
        for (k, &(a, z)) in self.edges.iter().enumerate() {
            b = b.edge(&format!("e{k}"), &format!("v{a}"), &format!("v{z}"));
        }
        for (k, &(v, mu)) in self.legs.iter().enumerate() {
            b = b.leg(&format!("l{k}"), &format!("v{v}"), mu);
        }
        b.build().expect("generated graph is well formed")
    }
}

/// A random spanning tree plus extra edges (loops and parallel edges allowed).
pub fn random_edges(rng: &mut ChaCha8Rng, n: usize, extra: usize) -> Vec<(usize, usize)> {
    let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (rng.gen_range(0..i), i)).collect();
    for _ in 0..rng.gen_range(0..=extra) {
        edges.push((rng.gen_range(0..n), rng.gen_range(0..n)));
    }
    for e in edges.iter_mut() {
        if rng.gen_bool(0.5) {
            *e = (e.1, e.0);
        }
    }
    edges.shuffle(rng);
    edges
}

/// A connected graph with up to `max_v` vertices and random legs of label in `-3..=3`.
pub fn random_shape(rng: &mut ChaCha8Rng, max_v: usize) -> Shape {
    let n = rng.gen_range(1..=max_v);
    let edges = random_edges(rng, n, 4);
    let legs = (0..rng.gen_range(0..=4))
        .map(|_| (rng.gen_range(0..n), rng.gen_range(-3..=3)))
        .collect();
    Shape {
        genus: (0..n).map(|_| rng.gen_range(0..=2)).collect(),
        edges,
        legs,
    }
}

pub fn random_levels(rng: &mut ChaCha8Rng, n: usize) -> LevelStructure {
    let raw: Vec<i64> = (0..n).map(|_| -rng.gen_range(0..n as i64)).collect();
    LevelStructure::normalized(&raw)
}

fn split(mut total: i64, rng: &mut ChaCha8Rng) -> Vec<i64> {
    let mut parts = Vec::new();
    while total > 0 {
        let k = rng.gen_range(1..=total.min(4));
        parts.push(k);
        total -= k;
    }
    parts
}

fn finite(rng: &mut ChaCha8Rng, ords: std::ops::RangeInclusive<i64>) -> PointOrder {
    let ord_df = rng.gen_range(ords);
    let kind = if rng.gen_bool(0.25) {
        PointKind::Zero
    } else {
        PointKind::Regular
    };
    PointOrder { ord_df, kind }
}

/// A stable graph with a level structure and a decoration passing TWR validation.
///
/// Poles sit only on the lower side of vertical edges; the legs are then
/// chosen to balance degrees and zero masses vertex by vertex, and genera
/// are raised until Riemann-Hurwitz leaves room and every vertex is stable.
pub fn random_twr(rng: &mut ChaCha8Rng, max_v: usize) -> (MarkedDualGraph, LevelStructure, Decoration) {
    let n = rng.gen_range(1..=max_v);
    let edges = random_edges(rng, n, 2);
    let levels = random_levels(rng, n);
    let mut halves = Vec::new();
    for &(a, z) in &edges {
        let (la, lz) = (levels.level(a), levels.level(z));
        let pair = if la == lz || rng.gen_bool(0.2) {
            [finite(rng, 0..=2), finite(rng, 0..=2)]
        } else {
            let m = rng.gen_range(1..=4);
            let lower = PointOrder::pole(m);
            let upper = finite(rng, m - 1..=(m + 1).min(6));
            if la < lz {
                [lower, upper]
            } else {
                [upper, lower]
            }
        };
        halves.push(pair);
    }

    let mut legs: Vec<(usize, i64)> = Vec::new();
    let mut leg_orders: Vec<PointOrder> = Vec::new();
    let mut push = |legs: &mut Vec<(usize, i64)>, v: usize, mu: i64, o: PointOrder| {
        legs.push((v, mu));
        leg_orders.push(o);
    };
    for v in 0..n {
        let mut degree = 0;
        let mut zeros = 0;
        for (e, &(a, z)) in edges.iter().enumerate() {
            for (side, end) in [a, z].into_iter().enumerate() {
                if end == v {
                    let o = halves[e][side];
                    match o.kind {
                        PointKind::Pole => degree += o.mult(),
                        PointKind::Zero => zeros += o.mult(),
                        PointKind::Regular => {}
                    }
                }
            }
        }
        let marked = rng.gen_bool(0.5);
        let floor = if marked { zeros + 1 } else { zeros.max(1) };
        let target = degree.max(floor) + if degree == 0 { rng.gen_range(0..=1) } else { 0 };
        for m in split(target - degree, rng) {
            push(&mut legs, v, -m, PointOrder::pole(m));
        }
        if marked {
            for m in split(target - zeros, rng) {
                push(&mut legs, v, m, PointOrder::zero(m));
            }
        }
        if rng.gen_bool(0.2) {
            push(&mut legs, v, 0, PointOrder::regular(rng.gen_range(1..=2)));
        }
    }

    let mut genus = vec![0u32; n];
    for v in 0..n {
        let mut ord_sum: i64 = leg_orders
            .iter()
            .zip(&legs)
            .filter(|(_, l)| l.0 == v)
            .map(|(o, _)| o.ord_df)
            .sum();
        let mut valence = legs.iter().filter(|l| l.0 == v).count() as i64;
        for (e, &(a, z)) in edges.iter().enumerate() {
            for (side, end) in [a, z].into_iter().enumerate() {
                if end == v {
                    ord_sum += halves[e][side].ord_df;
                    valence += 1;
                }
            }
        }
        let mut g = ((ord_sum + 2).max(0) + 1) / 2 + rng.gen_range(0..=1);
        while 2 * g - 2 + valence <= 0 {
            g += 1;
        }
        genus[v] = g as u32;
    }

    let graph = Shape { genus, edges, legs }.build();
    let mut dec = Decoration::from_halves(&graph, halves);
    dec.legs = leg_orders;
    (graph, levels, dec)
}

/// Every node and leg regular, so every finite point carries an unknown.
pub fn all_regular(g: &MarkedDualGraph) -> Decoration {
    let mut dec = Decoration::from_halves(g, vec![[PointOrder::regular(1); 2]; g.edge_count()]);
    dec.legs = g.legs().iter().map(|_| PointOrder::regular(1)).collect();
    dec
}

/// A closed walk (or a path between two points of `Z`) inside `Γ_{<=i}`,
/// together with its level-`i` value computed directly from the walk: each
/// departure from a level-`i` vertex adds the value at the point left, each
/// arrival subtracts the value at the point reached.
pub struct Walk {
    pub chain: RelativeCycle,
    pub value: LinearForm,
}

pub struct Walker<'a> {
    pub g: &'a MarkedDualGraph,
    pub levels: &'a LevelStructure,
    pub values: &'a ValueAssignment,
    pub i: i64,
    pub walk: Walk,
}

impl<'a> Walker<'a> {
    pub fn new(g: &'a MarkedDualGraph, levels: &'a LevelStructure, values: &'a ValueAssignment, i: i64) -> Self {
        Walker {
            g,
            levels,
            values,
            i,
            walk: Walk {
                chain: RelativeCycle::zero(g),
                value: LinearForm::zero(),
            },
        }
    }

    fn inside(&self, v: usize) -> bool {
        self.levels.level(v) <= self.i
    }

    fn allowed(&self, e: usize) -> bool {
        self.g.edges()[e].ends.iter().all(|&v| self.inside(v))
    }

    fn touch(&mut self, v: usize, p: PointRef, sign: i64) {
        if self.levels.level(v) == self.i {
            let x = self.values.get(p).expect("finite point").clone();
            self.walk.value.add_scaled(&x, &q(sign));
        }
    }

    fn cross(&mut self, e: usize, from: usize) -> usize {
        let ends = self.g.edges()[e].ends;
        let s = if ends[0] == from { 0 } else { 1 };
        self.walk.chain.edges[e] += if s == 0 { 1 } else { -1 };
        self.touch(from, PointRef::Half(HalfEdge::new(e, s)), 1);
        let to = ends[1 - s];
        self.touch(to, PointRef::Half(HalfEdge::new(e, 1 - s)), -1);
        to
    }

    fn neighbours(&self, v: usize) -> Vec<usize> {
        (0..self.g.edge_count())
            .filter(|&e| self.allowed(e) && self.g.edges()[e].ends.contains(&v))
            .collect()
    }

    /// Edges of a shortest path from `from` to `to` inside `Γ_{<=i}`.
    fn route(&self, from: usize, to: usize) -> Vec<usize> {
        let mut prev: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            for e in self.neighbours(v) {
                let ends = self.g.edges()[e].ends;
                let w = if ends[0] == v { ends[1] } else { ends[0] };
                if w != from && !prev.contains_key(&w) {
                    prev.insert(w, (v, e));
                    queue.push_back(w);
                }
            }
        }
        let mut path = Vec::new();
        let mut cur = to;
        while cur != from {
            let (p, e) = prev[&cur];
            path.push(e);
            cur = p;
        }
        path.reverse();
        path
    }

    fn follow(&mut self, mut at: usize, path: &[usize]) -> usize {
        for &e in path {
            at = self.cross(e, at);
        }
        at
    }

    fn reachable(&self, from: usize, to: usize) -> bool {
        from == to || {
            let mut seen = vec![false; self.g.vertex_count()];
            let mut stack = vec![from];
            seen[from] = true;
            while let Some(v) = stack.pop() {
                for e in self.neighbours(v) {
                    for &w in &self.g.edges()[e].ends {
                        if !seen[w] {
                            seen[w] = true;
                            stack.push(w);
                        }
                    }
                }
            }
            seen[to]
        }
    }

    pub fn run(mut self, rng: &mut ChaCha8Rng) -> Walk {
        let zs: Vec<usize> = z_legs(self.g)
            .into_iter()
            .filter(|&l| self.inside(self.g.legs()[l].vertex))
            .collect();
        let here: Vec<usize> = (0..self.g.vertex_count())
            .filter(|&v| self.levels.level(v) == self.i)
            .collect();
        let from_leg = !zs.is_empty() && rng.gen_bool(0.5);
        let start = if from_leg {
            let l = zs[rng.gen_range(0..zs.len())];
            let v = self.g.legs()[l].vertex;
            self.walk.chain.legs[l] -= 1;
            self.touch(v, PointRef::Leg(l), -1);
            v
        } else {
            here[rng.gen_range(0..here.len())]
        };
        let mut at = start;
        for _ in 0..rng.gen_range(0..10) {
            let out = self.neighbours(at);
            if out.is_empty() {
                break;
            }
            let e = out[rng.gen_range(0..out.len())];
            // a loop may be run either way round
            let ends = self.g.edges()[e].ends;
            let from = if ends[0] == ends[1] && rng.gen_bool(0.5) {
                ends[1]
            } else {
                at
            };
            if ends[0] == ends[1] && from == ends[1] {
                self.walk.chain.edges[e] -= 1;
                self.touch(at, PointRef::Half(HalfEdge::new(e, 1)), 1);
                self.touch(at, PointRef::Half(HalfEdge::new(e, 0)), -1);
            } else {
                at = self.cross(e, at);
            }
        }
        let exits: Vec<usize> = zs
            .iter()
            .copied()
            .filter(|&l| self.reachable(at, self.g.legs()[l].vertex))
            .collect();
        if from_leg {
            let l = exits[rng.gen_range(0..exits.len())];
            let v = self.g.legs()[l].vertex;
            let path = self.route(at, v);
            self.follow(at, &path);
            self.walk.chain.legs[l] += 1;
            self.touch(v, PointRef::Leg(l), 1);
        } else {
            let path = self.route(at, start);
            self.follow(at, &path);
        }
        self.walk
    }
}
