//! Integer lift of a `Z/q` cocycle by centered residues.

use std::collections::BTreeMap;

use crate::cohomology::{ModCochain, Prime};
use crate::filtration::{RipsFiltration, Triangle};
use crate::{Error, Result};

/// Integer edge cochain on `R_scale`, keyed by `(i, j)` with `i < j`.
/// The value on `[j, i]` is the negation of the value on `[i, j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegerCochain {
    values: BTreeMap<(u32, u32), i64>,
    scale: f64,
}

impl IntegerCochain {
    pub fn new(values: BTreeMap<(u32, u32), i64>, scale: f64) -> Self {
        Self { values, scale }
    }

    pub fn values(&self) -> &BTreeMap<(u32, u32), i64> {
        &self.values
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn get(&self, i: u32, j: u32) -> i64 {
        if i < j {
            self.values.get(&(i, j)).copied().unwrap_or(0)
        } else {
            -self.values.get(&(j, i)).copied().unwrap_or(0)
        }
    }

    /// `η[j, k] − η[i, k] + η[i, j]`, exactly.
    pub fn coboundary_on(&self, t: &Triangle) -> i64 {
        self.get(t.j, t.k) - self.get(t.i, t.k) + self.get(t.i, t.j)
    }

    pub fn cocycle_violation(&self, filt: &RipsFiltration) -> Option<(Triangle, i64)> {
        filt.triangles()
            .iter()
            .map(|t| (*t, self.coboundary_on(t)))
            .find(|&(_, v)| v != 0)
    }

    pub fn reduce_mod(&self, prime: Prime) -> ModCochain {
        ModCochain::from_entries(prime, self.values.iter().map(|(&k, &v)| (k, v)))
    }
}

/// Centered residue: `v` if `v ≤ (q−1)/2`, otherwise `v − q`.
pub fn centered_residue(value: u32, q: u32) -> i64 {
    if value <= (q - 1) / 2 {
        value as i64
    } else {
        value as i64 - q as i64
    }
}

/// Lifts `eta` edgewise to `{−(q−1)/2, …, (q−1)/2}` and checks that the
/// result is a cocycle over the integers on every triangle of `filt`.
pub fn lift_cocycle(eta: &ModCochain, filt: &RipsFiltration) -> Result<IntegerCochain> {
    let q = eta.prime();
    let edges = filt.edge_index();
    let values = eta
        .values()
        .iter()
        .filter(|(k, _)| edges.contains_key(k))
        .map(|(&k, &v)| (k, centered_residue(v, q)))
        .filter(|&(_, v)| v != 0)
        .collect();
    let lifted = IntegerCochain::new(values, filt.threshold());
    if let Some((t, value)) = lifted.cocycle_violation(filt) {
        return Err(Error::LiftFailure {
            triangle: (t.i as usize, t.j as usize, t.k as usize),
            value,
            prime: q,
        });
    }
    Ok(lifted)
}
