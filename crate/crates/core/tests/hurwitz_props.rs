use std::time::{Duration, Instant};

use drclosure::hurwitz::{exists, exists_with_cap, rh_check, HurwitzProblem, HARD_HURWITZ_CAP};

type Perm = Vec<usize>;

fn permutations(d: usize) -> Vec<Perm> {
    fn go(prefix: &mut Perm, used: &mut [bool], out: &mut Vec<Perm>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for x in 0..used.len() {
            if !used[x] {
                used[x] = true;
                prefix.push(x);
                go(prefix, used, out);
                prefix.pop();
                used[x] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; d], &mut out);
    out
}

fn cycle_type(p: &Perm) -> Vec<u32> {
    let mut seen = vec![false; p.len()];
    let mut t = Vec::new();
    for s in 0..p.len() {
        let mut len = 0;
        let mut x = s;
        while !seen[x] {
            seen[x] = true;
            x = p[x];
            len += 1;
        }
        if len > 0 {
            t.push(len);
        }
    }
    t.sort_unstable_by(|a, b| b.cmp(a));
    t
}

fn then(a: &Perm, b: &Perm) -> Perm {
    a.iter().map(|&x| b[x]).collect()
}

fn transitive(ps: &[&Perm], d: usize) -> bool {
    let mut seen = vec![false; d];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(x) = stack.pop() {
        for p in ps {
            if !seen[p[x]] {
                seen[p[x]] = true;
                stack.push(p[x]);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Existence by brute force over tuples `s_1 ... s_k` with product one.
fn naive(d: usize, genus: u32, profiles: &[Vec<u32>]) -> bool {
    let ramification: i64 = profiles.iter().map(|p| (d - p.len()) as i64).sum();
    if ramification != 2 * d as i64 - 2 + 2 * genus as i64 {
        return false;
    }
    let all = permutations(d);
    let classes: Vec<Vec<&Perm>> = profiles
        .iter()
        .map(|q| {
            let mut q = q.clone();
            q.sort_unstable_by(|a, b| b.cmp(a));
            all.iter().filter(|p| cycle_type(p) == q).collect()
        })
        .collect();
    let (last, rest) = classes.split_last().unwrap();
    let mut chosen: Vec<&Perm> = Vec::new();
    fn go<'a>(rest: &[Vec<&'a Perm>], last: &[&'a Perm], chosen: &mut Vec<&'a Perm>, d: usize) -> bool {
        match rest.split_first() {
            None => {
                let prod = chosen.iter().fold((0..d).collect::<Perm>(), |acc, p| then(&acc, p));
                let mut inv = vec![0; d];
                for (i, &x) in prod.iter().enumerate() {
                    inv[x] = i;
                }
                last.iter().any(|p| **p == inv) && {
                    let mut all = chosen.clone();
                    all.push(last.iter().find(|p| ***p == inv).unwrap());
                    transitive(&all, d)
                }
            }
            Some((class, tail)) => class.iter().any(|p| {
                chosen.push(p);
                let hit = go(tail, last, chosen, d);
                chosen.pop();
                hit
            }),
        }
    }
    go(rest, last, &mut chosen, d)
}

fn partitions(n: u32, max: u32) -> Vec<Vec<u32>> {
    if n == 0 {
        return vec![vec![]];
    }
    (1..=n.min(max))
        .rev()
        .flat_map(|k| {
            partitions(n - k, k).into_iter().map(move |mut p| {
                p.insert(0, k);
                p
            })
        })
        .collect()
}

/// Multisets of `k` profiles of degree `d`, as non-decreasing index sequences.
fn profile_tuples(d: u32, k: usize) -> Vec<Vec<Vec<u32>>> {
    let parts = partitions(d, d);
    let mut out = Vec::new();
    let mut idx = vec![0usize; k];
    loop {
        out.push(idx.iter().map(|&i| parts[i].clone()).collect());
        let Some(pos) = (0..k).rev().find(|&j| idx[j] + 1 < parts.len()) else {
            return out;
        };
        idx[pos] += 1;
        for j in pos + 1..k {
            idx[j] = idx[pos];
        }
    }
}

/// Returns how many problems were compared and how many of them exist.
fn sweep(max_degree: u32, max_k: usize, genera: std::ops::RangeInclusive<u32>) -> (usize, usize) {
    let (mut checked, mut found) = (0, 0);
    for d in 1..=max_degree {
        for k in 1..=max_k {
            for profiles in profile_tuples(d, k) {
                for g in genera.clone() {
                    let p = HurwitzProblem::new(d, g, profiles.clone());
                    let got = exists_with_cap(&p, HARD_HURWITZ_CAP).unwrap();
                    if got {
                        assert!(rh_check(&p), "{p:?} exists without Riemann-Hurwitz");
                    }
                    assert_eq!(got, naive(d as usize, g, &profiles), "{p:?}");
                    checked += 1;
                    found += got as usize;
                }
            }
        }
    }
    (checked, found)
}

#[test]
fn small_degrees_agree_with_brute_force() {
    let (checked, found) = sweep(4, 4, 0..=2);
    assert!(checked > 500 && found > 20, "{checked} problems, {found} realizable");
}

#[test]
fn degree_five_with_three_branch_points_agrees_with_brute_force() {
    let (_, found) = sweep(5, 3, 0..=1);
    assert!(found > 0);
}

#[test]
fn low_degree_genus_zero_is_decided_by_riemann_hurwitz() {
    for d in 1..=3 {
        for k in 1..=5 {
            for profiles in profile_tuples(d, k) {
                let p = HurwitzProblem::new(d, 0, profiles);
                assert_eq!(exists(&p).unwrap(), rh_check(&p), "{p:?}");
            }
        }
    }
}

#[test]
fn the_degree_four_exception() {
    let p = HurwitzProblem::new(4, 0, vec![vec![2, 2], vec![2, 2], vec![3, 1]]);
    assert!(rh_check(&p));
    assert!(!exists(&p).unwrap());
}

#[test]
fn elliptic_triple_cover_is_quick() {
    let mut profiles = vec![vec![3], vec![1, 1, 1]];
    profiles.extend(std::iter::repeat(vec![2, 1]).take(4));
    let p = HurwitzProblem::new(3, 1, profiles);
    let t = Instant::now();
    assert!(exists(&p).unwrap());
    assert!(t.elapsed() < Duration::from_secs(1));
}
