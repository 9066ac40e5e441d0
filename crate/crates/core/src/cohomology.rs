//! Persistent cohomology of a Rips filtration over `Z/q`.
//!
//! Edges are reduced against their coboundaries in decreasing filtration
//! order. Edges that merge connected components (found with union-find) are
//! cleared up front, since their coboundary columns would reduce to zero.
//! The accumulated column operations give, for every 1-dimensional class, a
//! cocycle whose restriction to `R_s` is closed for every `s` in
//! `(birth, death]`.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::filtration::{RipsFiltration, Triangle};
use crate::union_find::UnionFind;
use crate::{Error, NoQualifyingClass, Result};

/// An odd prime modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Prime(u32);

impl Prime {
    pub fn new(q: u32) -> Result<Self> {
        if q <= 2 || !is_prime(q) {
            return Err(Error::arg(format!("coefficient modulus must be a prime > 2, got {q}")));
        }
        Ok(Self(q))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.0 as u64) as u32
    }

    fn inv(self, a: u32) -> u32 {
        // Fermat: a^(q-2)
        let mut base = a % self.0;
        let mut exp = self.0 - 2;
        let mut acc = 1;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n as u64 {
        if (n as u64).is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Edge cochain with values in `Z/q`, keyed by `(i, j)` with `i < j`.
/// Zero values are not stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModCochain {
    prime: u32,
    values: BTreeMap<(u32, u32), u32>,
}

impl ModCochain {
    pub fn zero(prime: Prime) -> Self {
        Self {
            prime: prime.get(),
            values: BTreeMap::new(),
        }
    }

    /// Builds a cochain from oriented edge values; `(j, i)` entries are negated.
    pub fn from_entries(prime: Prime, entries: impl IntoIterator<Item = ((u32, u32), i64)>) -> Self {
        let mut c = Self::zero(prime);
        for ((i, j), v) in entries {
            c.add(i, j, v);
        }
        c
    }

    fn add(&mut self, i: u32, j: u32, v: i64) {
        let q = self.prime as i64;
        let (key, v) = if i < j { ((i, j), v) } else { ((j, i), -v) };
        let cur = self.values.get(&key).copied().unwrap_or(0) as i64;
        let next = (cur + v).rem_euclid(q) as u32;
        if next == 0 {
            self.values.remove(&key);
        } else {
            self.values.insert(key, next);
        }
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    pub fn values(&self) -> &BTreeMap<(u32, u32), u32> {
        &self.values
    }

    /// Value on the oriented edge `[i, j]`.
    pub fn get(&self, i: u32, j: u32) -> u32 {
        if i < j {
            self.values.get(&(i, j)).copied().unwrap_or(0)
        } else {
            let v = self.values.get(&(j, i)).copied().unwrap_or(0);
            (self.prime - v) % self.prime
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// `(δc)([i, j, k]) = c[j, k] - c[i, k] + c[i, j]` in `Z/q`.
    pub fn coboundary_on(&self, t: &Triangle) -> u32 {
        let q = self.prime as u64;
        let s = self.get(t.j, t.k) as u64 + (q - self.get(t.i, t.k) as u64) + self.get(t.i, t.j) as u64;
        (s % q) as u32
    }

    /// First triangle of `filt` on which the coboundary is nonzero.
    pub fn cocycle_violation(&self, filt: &RipsFiltration) -> Option<Triangle> {
        filt.triangles().iter().find(|t| self.coboundary_on(t) != 0).copied()
    }

    /// Keeps only the values on edges of `filt`.
    pub fn restricted_to(&self, filt: &RipsFiltration) -> Self {
        let edges = filt.edge_index();
        Self {
            prime: self.prime,
            values: self
                .values
                .iter()
                .filter(|(k, _)| edges.contains_key(k))
                .map(|(&k, &v)| (k, v))
                .collect(),
        }
    }

    /// `Σ cᵢ · xᵢ` over cochains sharing one prime.
    pub fn linear_combination(terms: &[(i64, &ModCochain)]) -> Result<Self> {
        let first = terms.first().ok_or_else(|| Error::arg("empty linear combination"))?;
        let prime = Prime::new(first.1.prime)?;
        let mut out = Self::zero(prime);
        for &(coef, c) in terms {
            if c.prime != out.prime {
                return Err(Error::arg("cannot combine cochains over different primes"));
            }
            for (&(i, j), &v) in &c.values {
                out.add(i, j, coef.rem_euclid(prime.get() as i64) * v as i64);
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PersistencePair {
    pub dim: u8,
    pub birth: f64,
    /// `None` for classes alive at the filtration threshold.
    pub death: Option<f64>,
    /// Vertices of the simplex whose entry creates the class.
    pub birth_simplex: Vec<u32>,
    /// Vertices of the simplex whose entry kills the class.
    pub death_simplex: Option<Vec<u32>>,
    /// Representative cocycle (dimension 1 only).
    pub representative: Option<ModCochain>,
}

impl PersistencePair {
    pub fn persistence(&self) -> Option<f64> {
        self.death.map(|d| d - self.birth)
    }

    pub fn is_finite(&self) -> bool {
        self.death.is_some()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PersistenceResult {
    pub prime: Prime,
    pub threshold: f64,
    /// Dimension 0 first, then dimension 1; each sorted by `(birth, death)`
    /// with infinite deaths last.
    pub pairs: Vec<PersistencePair>,
}

impl PersistenceResult {
    pub fn dim(&self, dim: u8) -> impl Iterator<Item = &PersistencePair> {
        self.pairs.iter().filter(move |p| p.dim == dim)
    }
}

type Column = Vec<(u32, u32)>;

/// `a + factor·b` over `Z/q` for index-sorted sparse columns.
fn axpy(a: &[(u32, u32)], factor: u32, b: &[(u32, u32)], q: Prime) -> Column {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut x, mut y) = (0, 0);
    while x < a.len() || y < b.len() {
        let take_a = y == b.len() || (x < a.len() && a[x].0 < b[y].0);
        let take_b = x == a.len() || (y < b.len() && b[y].0 < a[x].0);
        if take_a {
            out.push(a[x]);
            x += 1;
        } else if take_b {
            out.push((b[y].0, q.mul(factor, b[y].1)));
            y += 1;
        } else {
            let v = (a[x].1 + q.mul(factor, b[y].1)) % q.get();
            if v != 0 {
                out.push((a[x].0, v));
            }
            x += 1;
            y += 1;
        }
    }
    out
}

/// Dimension 0 and 1 persistence diagram of `filt` over `Z/q`.
///
/// Pairs with `birth == death` are omitted. Every dimension-1 pair carries a
/// representative cocycle.
pub fn persistent_cohomology(filt: &RipsFiltration, q: u32) -> Result<PersistenceResult> {
    let prime = Prime::new(q)?;
    let edges = filt.edges();
    let n = filt.vertex_count();
    let mut pairs = Vec::new();

    // dimension 0: every vertex is born at 0, an edge joining two components kills one
    let mut uf = UnionFind::new(n);
    let mut cleared = vec![false; edges.len()];
    for (idx, e) in edges.iter().enumerate() {
        let (ri, rj) = (uf.find(e.i as usize), uf.find(e.j as usize));
        if uf.union(ri, rj) {
            cleared[idx] = true;
            if e.diameter > 0.0 {
                pairs.push(PersistencePair {
                    dim: 0,
                    birth: 0.0,
                    death: Some(e.diameter),
                    birth_simplex: vec![ri.max(rj) as u32],
                    death_simplex: Some(vec![e.i, e.j]),
                    representative: None,
                });
            }
        }
    }
    let (labels, components) = uf.labels();
    let mut first_vertex = vec![u32::MAX; components];
    for (v, &c) in labels.iter().enumerate() {
        first_vertex[c] = first_vertex[c].min(v as u32);
    }
    for v in first_vertex {
        pairs.push(PersistencePair {
            dim: 0,
            birth: 0.0,
            death: None,
            birth_simplex: vec![v],
            death_simplex: None,
            representative: None,
        });
    }

    // dimension 1
    let edge_index = filt.edge_index();
    let mut coboundary: Vec<Column> = vec![Vec::new(); edges.len()];
    for (t_idx, t) in filt.triangles().iter().enumerate() {
        let [ij, ik, jk] = t.faces();
        coboundary[edge_index[&ij]].push((t_idx as u32, 1));
        coboundary[edge_index[&ik]].push((t_idx as u32, q - 1));
        coboundary[edge_index[&jk]].push((t_idx as u32, 1));
    }
    let to_cochain = |col: &Column| -> ModCochain {
        ModCochain::from_entries(
            prime,
            col.iter().map(|&(e, v)| {
                let edge = &edges[e as usize];
                ((edge.i, edge.j), v as i64)
            }),
        )
    };

    const NONE: u32 = u32::MAX;
    let mut pivot_owner = vec![NONE; filt.triangles().len()];
    let mut reduced: Vec<(Column, Column)> = Vec::new();
    for e in (0..edges.len()).rev() {
        if cleared[e] {
            continue;
        }
        let edge = edges[e];
        let mut r = std::mem::take(&mut coboundary[e]);
        let mut v: Column = vec![(e as u32, 1)];
        loop {
            let Some(&(pivot, coef)) = r.first() else {
                pairs.push(PersistencePair {
                    dim: 1,
                    birth: edge.diameter,
                    death: None,
                    birth_simplex: vec![edge.i, edge.j],
                    death_simplex: None,
                    representative: Some(to_cochain(&v)),
                });
                break;
            };
            let owner = pivot_owner[pivot as usize];
            if owner == NONE {
                let t = filt.triangles()[pivot as usize];
                if t.diameter > edge.diameter {
                    pairs.push(PersistencePair {
                        dim: 1,
                        birth: edge.diameter,
                        death: Some(t.diameter),
                        birth_simplex: vec![edge.i, edge.j],
                        death_simplex: Some(vec![t.i, t.j, t.k]),
                        representative: Some(to_cochain(&v)),
                    });
                }
                pivot_owner[pivot as usize] = reduced.len() as u32;
                reduced.push((r, v));
                break;
            }
            let (ro, vo) = &reduced[owner as usize];
            let factor = q - prime.mul(coef, prime.inv(ro[0].1));
            r = axpy(&r, factor, ro, prime);
            v = axpy(&v, factor, vo, prime);
        }
    }

    pairs.sort_by(|a, b| {
        a.dim
            .cmp(&b.dim)
            .then(a.birth.total_cmp(&b.birth))
            .then(match (a.death, b.death) {
                (Some(x), Some(y)) => x.total_cmp(&y),
                (Some(_), None) => std::cmp::Ordering::Less,
                (None, Some(_)) => std::cmp::Ordering::Greater,
                (None, None) => std::cmp::Ordering::Equal,
            })
            .then(a.birth_simplex.cmp(&b.birth_simplex))
    });
    Ok(PersistenceResult {
        prime,
        threshold: filt.threshold(),
        pairs,
    })
}

/// The pair's representative restricted to `R_scale`, verified closed there.
///
/// If the stored representative fails verification the reduction is rerun on
/// the truncated filtration and the cocycle of the class born on the same
/// edge is used instead.
pub fn representative_at_scale(pair: &PersistencePair, filt: &RipsFiltration, scale: f64) -> Result<ModCochain> {
    if pair.dim != 1 {
        return Err(Error::arg("representatives exist only for 1-dimensional pairs"));
    }
    let in_range = pair.birth < scale && pair.death.is_none_or(|d| scale <= d);
    if !in_range {
        return Err(Error::arg(format!(
            "scale {scale} is outside the lifetime ({}, {}] of the class",
            pair.birth,
            pair.death.map_or("inf".into(), |d| d.to_string())
        )));
    }
    let truncated = filt.restrict(scale)?;
    let rep = pair
        .representative
        .as_ref()
        .ok_or_else(|| Error::arg("pair carries no representative"))?;
    let candidate = rep.restricted_to(&truncated);
    if candidate.cocycle_violation(&truncated).is_none() {
        return Ok(candidate);
    }
    let rerun = persistent_cohomology(&truncated, rep.prime())?;
    let found = rerun
        .dim(1)
        .find(|p| p.birth_simplex == pair.birth_simplex)
        .and_then(|p| p.representative.clone())
        .filter(|c| c.cocycle_violation(&truncated).is_none())
        .ok_or_else(|| {
            Error::Inconsistent(format!(
                "no valid representative for the class born on edge {:?} at scale {scale}",
                pair.birth_simplex
            ))
        });
    found
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassSelector {
    /// The qualifying class of largest persistence.
    MostPersistent,
    /// Position in [`ranked_classes`] order (0 = most persistent overall).
    Rank(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScaleChoice {
    /// Index into the `pairs` slice the choice was made from.
    pub pair_index: usize,
    pub birth: f64,
    pub death: f64,
    pub t: f64,
    pub alpha: f64,
}

/// Indices of the finite 1-dimensional pairs, by decreasing persistence, then
/// increasing birth, then input order.
pub fn ranked_classes(pairs: &[PersistencePair]) -> Vec<usize> {
    let mut idx: Vec<usize> = pairs
        .iter()
        .enumerate()
        .filter(|(_, p)| p.dim == 1 && p.is_finite())
        .map(|(k, _)| k)
        .collect();
    idx.sort_by(|&a, &b| {
        let (pa, pb) = (&pairs[a], &pairs[b]);
        pb.persistence()
            .unwrap()
            .total_cmp(&pa.persistence().unwrap())
            .then(pa.birth.total_cmp(&pb.birth))
            .then(a.cmp(&b))
    });
    idx
}

/// `max{birth, r_L} < death / 2`.
pub fn qualifies(pair: &PersistencePair, coverage_radius: f64) -> bool {
    match pair.death {
        Some(death) if pair.dim == 1 => pair.birth.max(coverage_radius) < death / 2.0,
        _ => false,
    }
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t < 1.0 {
        Ok(())
    } else {
        Err(Error::arg(format!("t must lie in the open interval (0, 1), got {t}")))
    }
}

/// `α = t·max{birth, r_L} + (1 − t)·death/2`, with no qualification check.
pub fn interpolated_scale(birth: f64, death: f64, coverage_radius: f64, t: f64) -> f64 {
    t * birth.max(coverage_radius) + (1.0 - t) * death / 2.0
}

pub fn choose_scale(
    pairs: &[PersistencePair],
    coverage_radius: f64,
    t: f64,
    selector: ClassSelector,
) -> Result<ScaleChoice> {
    check_t(t)?;
    let ranked = ranked_classes(pairs);
    let no_class = |candidate: Option<usize>, reason: String| {
        Error::NoQualifyingClass(Box::new(NoQualifyingClass {
            candidate: candidate.map(|k| (pairs[k].birth, pairs[k].death.unwrap())),
            coverage_radius,
            reason,
        }))
    };
    let chosen = match selector {
        ClassSelector::MostPersistent => ranked
            .iter()
            .copied()
            .find(|&k| qualifies(&pairs[k], coverage_radius))
            .ok_or_else(|| {
                no_class(
                    ranked.first().copied(),
                    "no 1-dimensional pair satisfies max{a, r_L} < b/2".into(),
                )
            })?,
        ClassSelector::Rank(r) => {
            let k = *ranked.get(r).ok_or_else(|| {
                Error::arg(format!("class {r} requested but only {} finite classes exist", ranked.len()))
            })?;
            if !qualifies(&pairs[k], coverage_radius) {
                return Err(no_class(Some(k), format!("class {r} violates max{{a, r_L}} < b/2")));
            }
            k
        }
    };
    let p = &pairs[chosen];
    let death = p.death.unwrap();
    Ok(ScaleChoice {
        pair_index: chosen,
        birth: p.birth,
        death,
        t,
        alpha: interpolated_scale(p.birth, death, coverage_radius, t),
    })
}

/// A single scale at which all `pairs` are alive:
/// `α = t·max{births, r_L} + (1 − t)·min{deaths}/2`, provided
/// `max{births, r_L} < min{deaths}/2`.
pub fn joint_scale(pairs: &[&PersistencePair], coverage_radius: f64, t: f64) -> Result<f64> {
    check_t(t)?;
    if pairs.is_empty() {
        return Err(Error::arg("no classes given"));
    }
    let mut lo = coverage_radius;
    let mut hi = f64::INFINITY;
    for p in pairs {
        let death = p
            .death
            .filter(|_| p.dim == 1)
            .ok_or_else(|| Error::arg("joint scale needs finite 1-dimensional pairs"))?;
        lo = lo.max(p.birth);
        hi = hi.min(death);
    }
    if lo < hi / 2.0 {
        Ok(t * lo + (1.0 - t) * hi / 2.0)
    } else {
        Err(Error::NoQualifyingClass(Box::new(NoQualifyingClass {
            candidate: Some((lo, hi)),
            coverage_radius,
            reason: "the classes are not jointly alive at any admissible scale".into(),
        })))
    }
}

/// Groups pairs by dimension and `(birth, death)` for diagram comparison.
pub fn diagram_multiset(pairs: &[PersistencePair]) -> HashMap<(u8, u64, Option<u64>), usize> {
    let mut out = HashMap::new();
    for p in pairs {
        *out.entry((p.dim, p.birth.to_bits(), p.death.map(f64::to_bits))).or_insert(0) += 1;
    }
    out
}
