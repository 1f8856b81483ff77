//! Realizability of branched covers of the line with prescribed ramification,
//! decided in the permutation model, plus exact genus-0 functions.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_traits::{One, Zero};

use crate::error::HurwitzError;
use crate::ev::ValueAssignment;
use crate::graph::MarkedDualGraph;
use crate::linalg::{ConstraintSpace, LinearForm, Q};
use crate::twr::{Decoration, PointKind, PointRef};

pub const DEFAULT_HURWITZ_CAP: u32 = 6;
/// Largest degree the brute force accepts at all, whatever the configuration.
pub const HARD_HURWITZ_CAP: u32 = 8;

/// Degree cap from `DR_HURWITZ_CAP`, clamped to the hard limit.
pub fn hurwitz_cap() -> u32 {
    std::env::var("DR_HURWITZ_CAP")
        .ok()
        .and_then(|s| s.trim().parse::<u32>().ok())
        .map_or(DEFAULT_HURWITZ_CAP, |c| c.clamp(1, HARD_HURWITZ_CAP))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HurwitzProblem {
    pub degree: u32,
    pub genus: u32,
    pub profiles: Vec<Vec<u32>>,
}

impl HurwitzProblem {
    pub fn new(degree: u32, genus: u32, profiles: Vec<Vec<u32>>) -> Self {
        HurwitzProblem {
            degree,
            genus,
            profiles,
        }
    }

    fn profiles_valid(&self) -> bool {
        self.profiles
            .iter()
            .all(|p| p.iter().all(|&x| x >= 1) && p.iter().sum::<u32>() == self.degree)
    }

    fn check_profiles(&self) -> Result<(), HurwitzError> {
        match self
            .profiles
            .iter()
            .find(|p| p.contains(&0) || p.iter().sum::<u32>() != self.degree)
        {
            Some(p) => Err(HurwitzError::BadProfile {
                profile: p.clone(),
                degree: self.degree,
            }),
            None => Ok(()),
        }
    }
}

/// Riemann-Hurwitz: `sum (d - #parts) = 2d - 2 + 2g`, with every profile a partition of `d`.
pub fn rh_check(p: &HurwitzProblem) -> bool {
    if p.degree == 0 || !p.profiles_valid() {
        return false;
    }
    let lhs: i64 = p.profiles.iter().map(|q| p.degree as i64 - q.len() as i64).sum();
    lhs == 2 * p.degree as i64 - 2 + 2 * p.genus as i64
}

type Perm = Vec<u8>;

fn compose(a: &[u8], b: &[u8]) -> Perm {
    // (a * b)(x) = a(b(x)): apply b first
    b.iter().map(|&x| a[x as usize]).collect()
}

fn inverse(a: &[u8]) -> Perm {
    let mut out = vec![0u8; a.len()];
    for (i, &x) in a.iter().enumerate() {
        out[x as usize] = i as u8;
    }
    out
}

pub(crate) fn cycle_type(a: &[u8]) -> Vec<u32> {
    let mut seen = vec![false; a.len()];
    let mut out = Vec::new();
    for s in 0..a.len() {
        if seen[s] {
            continue;
        }
        let mut len = 0;
        let mut x = s;
        while !seen[x] {
            seen[x] = true;
            x = a[x] as usize;
            len += 1;
        }
        out.push(len);
    }
    out.sort_unstable_by(|a, b| b.cmp(a));
    out
}

fn sorted_desc(p: &[u32]) -> Vec<u32> {
    let mut q = p.to_vec();
    q.sort_unstable_by(|a, b| b.cmp(a));
    q
}

/// The permutation whose cycles are consecutive runs of the given lengths.
fn representative(profile: &[u32]) -> Perm {
    let d: u32 = profile.iter().sum();
    let mut out: Perm = (0..d as u8).collect();
    let mut start = 0u8;
    for &len in profile {
        let len = len as u8;
        for i in 0..len {
            out[(start + i) as usize] = start + (i + 1) % len;
        }
        start += len;
    }
    out
}

fn conjugacy_class(d: usize, profile: &[u32]) -> Vec<Perm> {
    let mut p: Vec<usize> = (0..d).collect();
    let mut out = Vec::new();
    loop {
        let perm: Perm = p.iter().map(|&x| x as u8).collect();
        if cycle_type(&perm) == profile {
            out.push(perm);
        }
        if !crate::graph::next_permutation(&mut p) {
            break;
        }
    }
    out
}

/// Block labels (least element of each block) after joining with the cycles of `a`.
fn join_orbits(blocks: &[u8], a: &[u8]) -> Vec<u8> {
    let mut parent: Vec<usize> = blocks.iter().map(|&b| b as usize).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        parent[x] = r;
        r
    }
    for (x, &y) in a.iter().enumerate() {
        let (rx, ry) = (find(&mut parent, x), find(&mut parent, y as usize));
        if rx != ry {
            let (lo, hi) = if rx < ry { (rx, ry) } else { (ry, rx) };
            parent[hi] = lo;
        }
    }
    (0..a.len()).map(|x| find(&mut parent, x) as u8).collect()
}

fn pack(p: &[u8]) -> u64 {
    p.iter().fold(0u64, |acc, &x| (acc << 4) | x as u64)
}

/// Whether a connected cover with the given branch profiles exists.
pub fn exists(p: &HurwitzProblem) -> Result<bool, HurwitzError> {
    exists_with_cap(p, hurwitz_cap())
}

pub fn exists_with_cap(p: &HurwitzProblem, cap: u32) -> Result<bool, HurwitzError> {
    p.check_profiles()?;
    let cap = cap.min(HARD_HURWITZ_CAP);
    if !rh_check(p) {
        return Ok(false);
    }
    let d = p.degree;
    let mut profiles: Vec<Vec<u32>> = p
        .profiles
        .iter()
        .map(|q| sorted_desc(q))
        .filter(|q| q.iter().any(|&x| x > 1))
        .collect();
    if profiles.is_empty() {
        return Ok(d == 1);
    }
    if d > cap {
        return Err(HurwitzError::CapExceeded { degree: d, cap });
    }
    let du = d as usize;
    // the largest class is never enumerated: it is determined by the product
    let class_size = |q: &Vec<u32>| {
        let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
        for &x in q {
            *counts.entry(x).or_default() += 1;
        }
        let z: u128 = counts
            .iter()
            .map(|(&k, &m)| (k as u128).pow(m) * (1..=m as u128).product::<u128>())
            .product();
        (1..=du as u128).product::<u128>() / z
    };
    profiles.sort_by_key(|q| (class_size(q), q.clone()));
    let last = profiles.pop().unwrap();
    if profiles.is_empty() {
        return Ok(false);
    }
    let first = representative(&profiles[0]);
    let identity: Vec<u8> = (0..d as u8).collect();
    let mut states: Vec<(Perm, Vec<u8>)> = vec![(first.clone(), join_orbits(&identity, &first))];
    for q in &profiles[1..] {
        let class = conjugacy_class(du, q);
        let mut seen = HashSet::new();
        let mut next = Vec::new();
        for (prod, blocks) in &states {
            for s in &class {
                let np = compose(prod, s);
                let nb = join_orbits(blocks, s);
                if seen.insert((pack(&np), pack(&nb))) {
                    next.push((np, nb));
                }
            }
        }
        states = next;
    }
    Ok(states
        .iter()
        .any(|(prod, blocks)| blocks.iter().all(|&b| b == 0) && cycle_type(&inverse(prod)) == last))
}

/// The branch data of one component, with the sources of its profiles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentProblem {
    pub problem: HurwitzProblem,
    /// Points over each profile, in profile order (empty for residual simple branching).
    pub fibers: Vec<Vec<PointRef>>,
}

fn pad(mults: &[i64], d: i64) -> Result<Vec<u32>, HurwitzError> {
    let mut out: Vec<u32> = mults.iter().map(|&m| m as u32).collect();
    let s: i64 = mults.iter().sum();
    if s > d {
        return Err(HurwitzError::BadProfile {
            profile: sorted_desc(&out),
            degree: d as u32,
        });
    }
    out.extend(std::iter::repeat_n(1, (d - s) as usize));
    Ok(sorted_desc(&out))
}

/// Branch data of `f_v`: poles over infinity, zeros over 0, one fiber for each
/// group of points whose values the constraint space forces to coincide, and
/// simple branching for whatever ramification remains.
pub fn component_problem(
    graph: &MarkedDualGraph,
    dec: &Decoration,
    v: usize,
    values: &ValueAssignment,
    space: &ConstraintSpace,
) -> Result<ComponentProblem, HurwitzError> {
    let vid = graph.vertices()[v].id.clone();
    let b = dec.balance(graph, v);
    if b.zero_mass > b.degree || (b.marked_zero && b.zero_mass != b.degree) || b.degree < 1 {
        return Err(HurwitzError::DegreeMismatch {
            vertex: vid,
            zeros: b.zero_mass,
            poles: b.degree,
        });
    }
    let d = b.degree;
    let points = dec.points_at(graph, v);
    let mut profiles = Vec::new();
    let mut fibers = Vec::new();
    let of_kind =
        |k: PointKind| -> Vec<PointRef> { points.iter().copied().filter(|&p| dec.order_at(p).kind == k).collect() };
    let poles = of_kind(PointKind::Pole);
    profiles.push(pad(
        &poles.iter().map(|&p| dec.order_at(p).mult()).collect::<Vec<_>>(),
        d,
    )?);
    fibers.push(poles);
    let zeros = of_kind(PointKind::Zero);
    if !zeros.is_empty() {
        profiles.push(pad(
            &zeros.iter().map(|&p| dec.order_at(p).mult()).collect::<Vec<_>>(),
            d,
        )?);
        fibers.push(zeros);
    }

    // finite non-zero points, grouped by forced coincidence of values
    let regular = of_kind(PointKind::Regular);
    let mut groups: Vec<Vec<PointRef>> = Vec::new();
    for &p in &regular {
        let value = values.get(p);
        if let Some(f) = value {
            if space.forces_zero(f) {
                return Err(HurwitzError::Invalid(format!(
                    "vertex `{vid}`: point `{}` is forced to be a zero of f",
                    dec.point_id(graph, p)
                )));
            }
        }
        let home = groups.iter_mut().find(|g| {
            let (Some(a), Some(f)) = (values.get(g[0]), value) else {
                return false;
            };
            space.forces_zero(&(a - f))
        });
        match home {
            Some(g) => g.push(p),
            None => groups.push(vec![p]),
        }
    }
    for g in groups {
        let mults: Vec<i64> = g.iter().map(|&p| dec.order_at(p).mult()).collect();
        if g.len() >= 2 || mults[0] >= 2 {
            profiles.push(pad(&mults, d)?);
            fibers.push(g);
        }
    }
    let genus = graph.vertices()[v].genus;
    let used: i64 = profiles.iter().map(|q| d - q.len() as i64).sum();
    let residual = 2 * d - 2 + 2 * genus as i64 - used;
    if residual < 0 {
        return Err(HurwitzError::NegativeResidual { vertex: vid, residual });
    }
    for _ in 0..residual {
        profiles.push(pad(&[2], d)?);
        fibers.push(Vec::new());
    }
    Ok(ComponentProblem {
        problem: HurwitzProblem::new(d as u32, genus, profiles),
        fibers,
    })
}

/// A point of the projective line.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Coord {
    Finite(Q),
    Infinity,
}

/// Dense polynomial, constant term first.
fn poly_mul_linear(p: &[Q], a: &Q) -> Vec<Q> {
    // p(z) * (z - a)
    let mut out = vec![Q::zero(); p.len() + 1];
    for (i, c) in p.iter().enumerate() {
        out[i + 1] += c;
        out[i] -= c * a;
    }
    out
}

fn poly_eval(p: &[Q], z: &Q) -> Q {
    p.iter().rev().fold(Q::zero(), |acc, c| acc * z + c)
}

/// Multiplicity of `a` as a root, by repeated synthetic division.
fn root_multiplicity(p: &[Q], a: &Q) -> u32 {
    let mut p = p.to_vec();
    let mut m = 0;
    while p.len() > 1 && poly_eval(&p, a).is_zero() {
        // divide by (z - a)
        let n = p.len() - 1;
        let mut q = vec![Q::zero(); n];
        let mut carry = Q::zero();
        for i in (0..n).rev() {
            carry = &p[i + 1] + &carry * a;
            q[i] = carry.clone();
        }
        p = q;
        m += 1;
    }
    m
}

/// `c * prod (z - a_i)^{m_i} / prod (z - b_j)^{n_j}` with finite zeros `a_i`
/// and finite poles `b_j`; a point at infinity absorbs the degree difference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Genus0Realization {
    pub zeros: Vec<(Coord, u32)>,
    pub poles: Vec<(Coord, u32)>,
    pub scale: Q,
    numerator: Vec<Q>,
    denominator: Vec<Q>,
}

pub fn realize_genus0(
    zeros: &[(Coord, u32)],
    poles: &[(Coord, u32)],
    scale: Q,
) -> Result<Genus0Realization, HurwitzError> {
    let mut seen = BTreeSet::new();
    for (c, _) in zeros.iter().chain(poles) {
        if !seen.insert(c.clone()) {
            let name = match c {
                Coord::Finite(q) => q.to_string(),
                Coord::Infinity => "infinity".into(),
            };
            return Err(HurwitzError::CoordinateCollision(name));
        }
    }
    let zsum: i64 = zeros.iter().map(|z| z.1 as i64).sum();
    let psum: i64 = poles.iter().map(|z| z.1 as i64).sum();
    if zsum != psum {
        return Err(HurwitzError::DegreeMismatch {
            vertex: "genus-0 component".into(),
            zeros: zsum,
            poles: psum,
        });
    }
    if scale.is_zero() {
        return Err(HurwitzError::Invalid("scale must be non-zero".into()));
    }
    let build = |pts: &[(Coord, u32)]| {
        let mut p = vec![Q::one()];
        for (c, m) in pts {
            if let Coord::Finite(a) = c {
                for _ in 0..*m {
                    p = poly_mul_linear(&p, a);
                }
            }
        }
        p
    };
    Ok(Genus0Realization {
        zeros: zeros.to_vec(),
        poles: poles.to_vec(),
        scale,
        numerator: build(zeros),
        denominator: build(poles),
    })
}

impl Genus0Realization {
    pub fn degree(&self) -> u32 {
        self.poles.iter().map(|p| p.1).sum()
    }

    pub fn value_at(&self, z: &Coord) -> Result<Q, HurwitzError> {
        if self.poles.iter().any(|(c, _)| c == z) {
            return Err(HurwitzError::Invalid("value requested at a pole".into()));
        }
        match z {
            Coord::Finite(a) => Ok(&self.scale * poly_eval(&self.numerator, a) / poly_eval(&self.denominator, a)),
            Coord::Infinity => {
                if self.zeros.iter().any(|(c, _)| *c == Coord::Infinity) {
                    Ok(Q::zero())
                } else {
                    // equal degrees: ratio of leading coefficients (both monic)
                    Ok(self.scale.clone())
                }
            }
        }
    }

    /// `ord_z f`: positive at zeros, negative at poles, checked against the
    /// expanded polynomials at finite points.
    pub fn order_at(&self, z: &Coord) -> i64 {
        match z {
            Coord::Finite(a) => {
                root_multiplicity(&self.numerator, a) as i64 - root_multiplicity(&self.denominator, a) as i64
            }
            Coord::Infinity => (self.denominator.len() as i64) - (self.numerator.len() as i64),
        }
    }

    /// `mult_z f`: the order of `f - f(z)` at a finite-valued point, or of
    /// `f` at a zero.
    pub fn local_multiplicity(&self, z: &Coord) -> Result<u32, HurwitzError> {
        let v = self.value_at(z)?;
        // f - v = (scale * N - v * D) / D
        let n = self.numerator.len().max(self.denominator.len());
        let g: Vec<Q> = (0..n)
            .map(|i| {
                let a = self.numerator.get(i).cloned().unwrap_or_else(Q::zero);
                let b = self.denominator.get(i).cloned().unwrap_or_else(Q::zero);
                &self.scale * a - &v * b
            })
            .collect();
        match z {
            Coord::Finite(a) => Ok(root_multiplicity(&g, a)),
            Coord::Infinity => {
                if let Some((_, m)) = self.zeros.iter().find(|(c, _)| *c == Coord::Infinity) {
                    return Ok(*m);
                }
                let deg_g = g.iter().rposition(|c| !c.is_zero()).map_or(0, |d| d as i64);
                Ok((self.denominator.len() as i64 - 1 - deg_g) as u32)
            }
        }
    }

    /// The same function with the scale replaced.
    pub fn rescaled(&self, scale: Q) -> Self {
        Genus0Realization { scale, ..self.clone() }
    }

    /// Linear form with the value at `z` as a constant.
    pub fn value_form(&self, z: &Coord) -> Result<LinearForm, HurwitzError> {
        self.value_at(z).map(LinearForm::constant)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::q;

    fn hp(d: u32, g: u32, profiles: &[&[u32]]) -> HurwitzProblem {
        HurwitzProblem::new(d, g, profiles.iter().map(|p| p.to_vec()).collect())
    }

    #[test]
    fn riemann_hurwitz_examples() {
        assert!(!rh_check(&hp(4, 0, &[&[2, 1, 1], &[2, 1, 1], &[2, 1, 1]])));
        let mut profiles: Vec<&[u32]> = vec![&[3], &[1, 1, 1]];
        profiles.extend([&[2u32, 1][..]; 4]);
        assert!(rh_check(&hp(3, 1, &profiles)));
        assert!(rh_check(&hp(1, 0, &[])));
        assert!(!rh_check(&hp(3, 0, &[&[2, 2]])));
    }

    #[test]
    fn existence_examples() {
        assert!(exists(&hp(2, 0, &[&[2], &[2]])).unwrap());
        let mut profiles: Vec<&[u32]> = vec![&[3], &[1, 1, 1]];
        profiles.extend([&[2u32, 1][..]; 4]);
        assert!(exists(&hp(3, 1, &profiles)).unwrap());
        let klein = hp(4, 0, &[&[2, 2], &[2, 2], &[3, 1]]);
        assert!(rh_check(&klein));
        assert!(!exists(&klein).unwrap());
        assert!(exists(&hp(1, 0, &[])).unwrap());
        assert!(!exists(&hp(2, 0, &[])).unwrap());
    }

    #[test]
    fn z_to_the_d() {
        for d in 1..=6 {
            assert!(exists(&hp(d, 0, &[&[d], &[d]])).unwrap(), "d = {d}");
        }
    }

    #[test]
    fn disconnected_data_fails() {
        // (2,2) twice in degree 4 with genus -1 would need two components; RH already says no
        assert!(!exists(&hp(4, 0, &[&[2, 2], &[2, 2]])).unwrap());
    }

    #[test]
    fn cap_is_enforced() {
        let p = hp(7, 0, &[&[7], &[7]]);
        assert_eq!(
            exists_with_cap(&p, 6).unwrap_err(),
            HurwitzError::CapExceeded { degree: 7, cap: 6 }
        );
        assert!(exists_with_cap(&p, 7).unwrap());
    }

    #[test]
    fn bad_profiles_are_rejected() {
        let err = exists(&hp(3, 0, &[&[2, 2]])).unwrap_err();
        assert!(matches!(err, HurwitzError::BadProfile { .. }));
    }

    #[test]
    fn genus0_values() {
        let f = realize_genus0(
            &[(Coord::Finite(q(1)), 1), (Coord::Finite(q(-1)), 1)],
            &[(Coord::Infinity, 2)],
            q(1),
        )
        .unwrap();
        assert_eq!(f.value_at(&Coord::Finite(q(0))).unwrap(), q(-1));
        assert_eq!(f.value_at(&Coord::Finite(q(1))).unwrap(), q(0));
        assert_eq!(f.order_at(&Coord::Finite(q(1))), 1);
        assert_eq!(f.order_at(&Coord::Infinity), -2);
        let sq = realize_genus0(&[(Coord::Finite(q(0)), 2)], &[(Coord::Infinity, 2)], q(1)).unwrap();
        assert_eq!(sq.value_at(&Coord::Finite(q(2))).unwrap(), q(4));
        assert_eq!(sq.order_at(&Coord::Finite(q(0))), 2);
        assert_eq!(sq.local_multiplicity(&Coord::Finite(q(0))).unwrap(), 2);
        assert_eq!(sq.local_multiplicity(&Coord::Finite(q(1))).unwrap(), 1);
        // z^2 + 1/z^2 style: (z^2 - 1)^2 / z^2 has a double value 0 at 1 and -1, and f(i) ...
        let g = realize_genus0(
            &[(Coord::Finite(q(1)), 2)],
            &[(Coord::Finite(q(0)), 1), (Coord::Infinity, 1)],
            q(1),
        )
        .unwrap();
        // (z - 1)^2 / z = z - 2 + 1/z is critical at z = -1 as well
        assert_eq!(g.local_multiplicity(&Coord::Finite(q(-1))).unwrap(), 2);
        assert_eq!(g.local_multiplicity(&Coord::Finite(q(2))).unwrap(), 1);
        assert_eq!(sq.rescaled(q(3)).value_at(&Coord::Finite(q(2))).unwrap(), q(12));
    }

    #[test]
    fn genus0_errors() {
        let c = realize_genus0(&[(Coord::Finite(q(1)), 1)], &[(Coord::Finite(q(1)), 1)], q(1));
        assert!(matches!(c, Err(HurwitzError::CoordinateCollision(_))));
        let m = realize_genus0(&[(Coord::Finite(q(1)), 2)], &[(Coord::Infinity, 1)], q(1));
        assert!(matches!(m, Err(HurwitzError::DegreeMismatch { .. })));
        let f = realize_genus0(&[(Coord::Finite(q(0)), 1)], &[(Coord::Infinity, 1)], q(1)).unwrap();
        assert!(f.value_at(&Coord::Infinity).is_err());
    }

    #[test]
    fn finite_poles_and_value_at_infinity() {
        // f = 2 (z - 1) / (z - 3)
        let f = realize_genus0(&[(Coord::Finite(q(1)), 1)], &[(Coord::Finite(q(3)), 1)], q(2)).unwrap();
        assert_eq!(f.value_at(&Coord::Infinity).unwrap(), q(2));
        assert_eq!(f.value_at(&Coord::Finite(q(2))).unwrap(), q(-2));
        assert_eq!(f.order_at(&Coord::Finite(q(3))), -1);
    }
}
