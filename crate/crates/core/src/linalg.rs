//! Exact linear algebra: integer kernels, rational row reduction, and affine
//! solution spaces of systems of linear forms in named unknowns.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::EvError;

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn parse_rational(s: &str) -> Option<Q> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num = BigInt::from_str(num).ok()?;
    let den = BigInt::from_str(den).ok()?;
    if den.is_zero() {
        return None;
    }
    Some(Q::new(num, den))
}

/// Basis of the integer kernel `{x in Z^ncols : A x = 0}`.
///
/// The transpose of `A` is brought to echelon form by unimodular row
/// operations tracked in an identity block; rows whose `A`-part vanishes
/// span the kernel lattice.
pub fn integer_kernel(rows: &[Vec<i64>], ncols: usize) -> Vec<Vec<i64>> {
    let m = rows.len();
    let mut work: Vec<Vec<i128>> = (0..ncols)
        .map(|j| {
            let mut r: Vec<i128> = rows.iter().map(|row| row[j] as i128).collect();
            r.extend((0..ncols).map(|k| i128::from(k == j)));
            r
        })
        .collect();
    let mut rank = 0;
    for c in 0..m {
        loop {
            let pivot = (rank..ncols)
                .filter(|&r| work[r][c] != 0)
                .min_by_key(|&r| work[r][c].abs());
            let Some(p) = pivot else { break };
            work.swap(rank, p);
            let mut done = true;
            for r in rank + 1..ncols {
                if work[r][c] != 0 {
                    let f = work[r][c].div_euclid(work[rank][c]);
                    for k in 0..m + ncols {
                        let sub = f * work[rank][k];
                        work[r][k] -= sub;
                    }
                    if work[r][c] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                rank += 1;
                break;
            }
        }
    }
    work[rank..]
        .iter()
        .map(|r| {
            let v: Vec<i64> = r[m..].iter().map(|&x| x as i64).collect();
            normalize_sign(v)
        })
        .collect()
}

fn normalize_sign(v: Vec<i64>) -> Vec<i64> {
    match v.iter().find(|&&x| x != 0) {
        Some(&x) if x < 0 => v.into_iter().map(|x| -x).collect(),
        _ => v,
    }
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(m: &mut Vec<Vec<Q>>) -> Vec<usize> {
    let ncols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for k in 0..ncols {
                    let sub = &f * &m[r][k];
                    m[i][k] = &m[i][k] - sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    m.truncate(r);
    pivots
}

/// Rank of an integer matrix over the rationals.
pub fn rank_i64(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<Q>> = rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect();
    rref(&mut m).len()
}

/// An affine-linear form `c + sum a_j x_j` in named unknowns.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct LinearForm {
    constant: Q,
    terms: BTreeMap<String, Q>,
}

impl LinearForm {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Q) -> Self {
        LinearForm {
            constant: c,
            terms: BTreeMap::new(),
        }
    }

    pub fn unknown(name: &str) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(name.to_string(), Q::one());
        LinearForm {
            constant: Q::zero(),
            terms,
        }
    }

    pub fn constant_term(&self) -> &Q {
        &self.constant
    }

    pub fn terms(&self) -> &BTreeMap<String, Q> {
        &self.terms
    }

    pub fn coefficient(&self, name: &str) -> Q {
        self.terms.get(name).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn unknowns(&self) -> impl Iterator<Item = &str> {
        self.terms.keys().map(|s| s.as_str())
    }

    pub fn add_scaled(&mut self, other: &LinearForm, k: &Q) {
        if k.is_zero() {
            return;
        }
        self.constant += &other.constant * k;
        for (name, a) in &other.terms {
            let entry = self.terms.entry(name.clone()).or_insert_with(Q::zero);
            *entry += a * k;
            if entry.is_zero() {
                self.terms.remove(name);
            }
        }
    }

    pub fn scaled(&self, k: &Q) -> LinearForm {
        let mut out = LinearForm::zero();
        out.add_scaled(self, k);
        out
    }

    /// Substitutes values for unknowns; unknowns missing from `values` stay symbolic.
    pub fn substitute(&self, values: &BTreeMap<String, LinearForm>) -> LinearForm {
        let mut out = LinearForm::constant(self.constant.clone());
        for (name, a) in &self.terms {
            match values.get(name) {
                Some(v) => out.add_scaled(v, a),
                None => out.add_scaled(&LinearForm::unknown(name), a),
            }
        }
        out
    }

    /// Renames unknowns; names absent from the map are kept.
    pub fn rename(&self, map: &BTreeMap<String, String>) -> LinearForm {
        let mut out = LinearForm::constant(self.constant.clone());
        for (name, a) in &self.terms {
            let n = map.get(name).unwrap_or(name);
            out.add_scaled(&LinearForm::unknown(n), a);
        }
        out
    }

    /// Integer coefficient vector over `unknowns`, made primitive with a
    /// positive leading entry. The constant term is appended last.
    pub fn primitive_vector(&self, unknowns: &[String]) -> Vec<BigInt> {
        let mut entries: Vec<Q> = unknowns.iter().map(|u| self.coefficient(u)).collect();
        entries.push(self.constant.clone());
        let lcm = entries.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let mut ints: Vec<BigInt> = entries
            .iter()
            .map(|x| (x * Q::from_integer(lcm.clone())).to_integer())
            .collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
        if !g.is_zero() {
            for x in ints.iter_mut() {
                *x = &*x / &g;
            }
        }
        if ints.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
            for x in ints.iter_mut() {
                *x = -&*x;
            }
        }
        ints
    }
}

impl std::ops::Add for &LinearForm {
    type Output = LinearForm;
    fn add(self, rhs: &LinearForm) -> LinearForm {
        let mut out = self.clone();
        out.add_scaled(rhs, &Q::one());
        out
    }
}

impl std::ops::Sub for &LinearForm {
    type Output = LinearForm;
    fn sub(self, rhs: &LinearForm) -> LinearForm {
        let mut out = self.clone();
        out.add_scaled(rhs, &-Q::one());
        out
    }
}

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut emit = |f: &mut fmt::Formatter<'_>, c: &Q, name: Option<&str>| -> fmt::Result {
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            match name {
                Some(n) if mag.is_one() => write!(f, "?{n}"),
                Some(n) => write!(f, "{mag}*?{n}"),
                None => write!(f, "{mag}"),
            }
        };
        for (name, c) in &self.terms {
            emit(f, c, Some(name))?;
        }
        if !self.constant.is_zero() || self.terms.is_empty() {
            emit(f, &self.constant, None)?;
        }
        Ok(())
    }
}

impl FromStr for LinearForm {
    type Err = EvError;

    /// Parses the format produced by `Display`: terms `[-]coef*?name`,
    /// `[-]?name` or `[-]p/q`, joined by whitespace-separated `+` / `-`.
    fn from_str(s: &str) -> Result<Self, EvError> {
        let bad = || EvError::BadValue(s.to_string());
        let mut out = LinearForm::zero();
        let mut sign = Q::one();
        let mut expect_term = true;
        for tok in s.split_whitespace() {
            if !expect_term {
                sign = match tok {
                    "+" => Q::one(),
                    "-" => -Q::one(),
                    _ => return Err(bad()),
                };
                expect_term = true;
                continue;
            }
            let (neg, body) = match tok.strip_prefix('-') {
                Some(rest) => (true, rest),
                None => (false, tok.strip_prefix('+').unwrap_or(tok)),
            };
            let mut k = if neg { -sign.clone() } else { sign.clone() };
            let term = if let Some(name) = body.strip_prefix('?') {
                if name.is_empty() {
                    return Err(bad());
                }
                LinearForm::unknown(name)
            } else if let Some((coef, name)) = body.split_once("*?") {
                k *= parse_rational(coef).ok_or_else(bad)?;
                if name.is_empty() {
                    return Err(bad());
                }
                LinearForm::unknown(name)
            } else {
                LinearForm::constant(parse_rational(body).ok_or_else(bad)?)
            };
            out.add_scaled(&term, &k);
            expect_term = false;
        }
        if expect_term {
            return Err(bad());
        }
        Ok(out)
    }
}

/// The solution set of `{form = 0}` for a list of forms, kept as the reduced
/// echelon form of the augmented matrix over a sorted list of unknowns.
/// Two systems with the same unknowns have the same solutions iff their
/// canonical rows agree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSpace {
    unknowns: Vec<String>,
    /// Rows of `[A | c]` for `A x + c = 0`, in RREF.
    rows: Vec<Vec<Q>>,
    consistent: bool,
}

impl ConstraintSpace {
    pub fn new(forms: &[LinearForm]) -> Self {
        let unknowns: BTreeSet<String> = forms.iter().flat_map(|f| f.unknowns().map(str::to_string)).collect();
        Self::over(forms, &unknowns.into_iter().collect::<Vec<_>>())
    }

    /// Builds the space over an explicit unknown list (which must contain
    /// every unknown used by `forms`).
    pub fn over(forms: &[LinearForm], unknowns: &[String]) -> Self {
        let mut sorted = unknowns.to_vec();
        sorted.sort();
        sorted.dedup();
        let mut rows: Vec<Vec<Q>> = forms
            .iter()
            .map(|f| {
                let mut r: Vec<Q> = sorted.iter().map(|u| f.coefficient(u)).collect();
                r.push(f.constant_term().clone());
                r
            })
            .collect();
        for f in forms {
            debug_assert!(f
                .unknowns()
                .all(|u| sorted.binary_search_by(|x| x.as_str().cmp(u)).is_ok()));
        }
        let pivots = rref(&mut rows);
        let consistent = !pivots.contains(&sorted.len());
        ConstraintSpace {
            unknowns: sorted,
            rows,
            consistent,
        }
    }

    pub fn unknowns(&self) -> &[String] {
        &self.unknowns
    }

    pub fn is_consistent(&self) -> bool {
        self.consistent
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Dimension of the affine solution space, `None` when empty.
    pub fn dimension(&self) -> Option<usize> {
        self.consistent.then(|| self.unknowns.len() - self.rows.len())
    }

    /// The canonical defining forms (one per RREF row).
    pub fn forms(&self) -> Vec<LinearForm> {
        self.rows
            .iter()
            .map(|r| {
                let mut f = LinearForm::constant(r[self.unknowns.len()].clone());
                for (u, a) in self.unknowns.iter().zip(r) {
                    f.add_scaled(&LinearForm::unknown(u), a);
                }
                f
            })
            .collect()
    }

    /// Re-expresses the space over a larger unknown set.
    pub fn extended(&self, unknowns: &[String]) -> Self {
        let mut all: Vec<String> = self.unknowns.clone();
        all.extend(unknowns.iter().cloned());
        Self::over(&self.forms(), &all)
    }

    /// Whether both spaces have the same solutions over the union of their unknowns.
    pub fn same_solutions(&self, other: &ConstraintSpace) -> bool {
        if !self.consistent || !other.consistent {
            return self.consistent == other.consistent;
        }
        let a = self.extended(&other.unknowns);
        let b = other.extended(&self.unknowns);
        a == b
    }

    /// Projection of the solution set onto the `keep` unknowns (eliminating the rest).
    pub fn project(&self, keep: &[String]) -> ConstraintSpace {
        let keep: BTreeSet<&String> = keep.iter().collect();
        let (elim, kept): (Vec<String>, Vec<String>) = self.unknowns.iter().cloned().partition(|u| !keep.contains(u));
        let order: Vec<&String> = elim.iter().chain(kept.iter()).collect();
        let mut rows: Vec<Vec<Q>> = self
            .rows
            .iter()
            .map(|r| {
                let mut out: Vec<Q> = order
                    .iter()
                    .map(|u| r[self.unknowns.binary_search(u).unwrap()].clone())
                    .collect();
                out.push(r[self.unknowns.len()].clone());
                out
            })
            .collect();
        let pivots = rref(&mut rows);
        let forms: Vec<LinearForm> = rows
            .iter()
            .zip(&pivots)
            .filter(|(_, &p)| p >= elim.len())
            .map(|(r, _)| {
                let mut f = LinearForm::constant(r[order.len()].clone());
                for (i, u) in kept.iter().enumerate() {
                    f.add_scaled(&LinearForm::unknown(u), &r[elim.len() + i]);
                }
                f
            })
            .collect();
        ConstraintSpace::over(&forms, &kept)
    }

    /// Whether the space forces `form = 0` for every solution.
    pub fn forces_zero(&self, form: &LinearForm) -> bool {
        if !self.consistent {
            return true;
        }
        let mut extra = self.forms();
        extra.push(form.clone());
        let mut all = self.unknowns.clone();
        all.extend(form.unknowns().map(str::to_string));
        let with = ConstraintSpace::over(&extra, &all);
        with.consistent && with.rank() == self.extended(&all).rank()
    }

    /// Particular solution plus a basis of the homogeneous solutions.
    pub fn solve(&self) -> Option<AffineSpace> {
        if !self.consistent {
            return None;
        }
        let n = self.unknowns.len();
        let pivots: Vec<usize> = self
            .rows
            .iter()
            .map(|r| r.iter().position(|x| !x.is_zero()).unwrap())
            .collect();
        let mut particular = vec![Q::zero(); n];
        for (r, &p) in self.rows.iter().zip(&pivots) {
            particular[p] = -r[n].clone();
        }
        let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
        let basis = free
            .iter()
            .map(|&fc| {
                let mut v = vec![Q::zero(); n];
                v[fc] = Q::one();
                for (r, &p) in self.rows.iter().zip(&pivots) {
                    v[p] = -r[fc].clone();
                }
                v
            })
            .collect();
        Some(AffineSpace {
            unknowns: self.unknowns.clone(),
            particular,
            basis,
        })
    }
}

/// `particular + span(basis)` over the listed unknowns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineSpace {
    pub unknowns: Vec<String>,
    pub particular: Vec<Q>,
    pub basis: Vec<Vec<Q>>,
}

impl AffineSpace {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }
}

/// Solves `forms = 0`; `None` when inconsistent.
pub fn solve_constraints(forms: &[LinearForm]) -> Option<AffineSpace> {
    ConstraintSpace::new(forms).solve()
}
