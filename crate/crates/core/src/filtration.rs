//! Vietoris–Rips filtration on a landmark set, up to dimension 2.
//!
//! A simplex belongs to the complex at scale `s` when its diameter is
//! strictly below `s`. Edges and triangles are kept sorted by
//! `(diameter, vertices)` so reduction order is fully determined.

use std::cmp::Ordering;
use std::collections::HashMap;

use crate::metric::DistanceMatrix;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub i: u32,
    pub j: u32,
    pub diameter: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Triangle {
    pub i: u32,
    pub j: u32,
    pub k: u32,
    pub diameter: f64,
}

impl Triangle {
    /// Faces as `(i, j)`, `(i, k)`, `(j, k)`.
    pub fn faces(&self) -> [(u32, u32); 3] {
        [(self.i, self.j), (self.i, self.k), (self.j, self.k)]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RipsFiltration {
    vertex_count: usize,
    edges: Vec<Edge>,
    triangles: Vec<Triangle>,
    threshold: f64,
    max_dim: usize,
}

fn edge_order(a: &Edge, b: &Edge) -> Ordering {
    a.diameter
        .total_cmp(&b.diameter)
        .then(a.i.cmp(&b.i))
        .then(a.j.cmp(&b.j))
}

fn triangle_order(a: &Triangle, b: &Triangle) -> Ordering {
    a.diameter
        .total_cmp(&b.diameter)
        .then(a.i.cmp(&b.i))
        .then(a.j.cmp(&b.j))
        .then(a.k.cmp(&b.k))
}

/// All simplices of dimension `≤ max_dim` (1 or 2) with diameter `< threshold`.
pub fn build_rips(distances: &DistanceMatrix, threshold: f64, max_dim: usize) -> Result<RipsFiltration> {
    if !(threshold > 0.0) {
        return Err(Error::arg(format!("filtration threshold must be positive, got {threshold}")));
    }
    if !(1..=2).contains(&max_dim) {
        return Err(Error::arg(format!("max_dim must be 1 or 2, got {max_dim}")));
    }
    let n = distances.len();
    if n > u32::MAX as usize {
        return Err(Error::arg("too many vertices"));
    }
    let mut edges = Vec::new();
    let mut neighbors: Vec<Vec<u32>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = distances.get(i, j);
            if d < threshold {
                edges.push(Edge { i: i as u32, j: j as u32, diameter: d });
                neighbors[i].push(j as u32);
            }
        }
    }
    let mut triangles = Vec::new();
    if max_dim == 2 {
        for i in 0..n {
            let nbrs = &neighbors[i];
            for (a, &j) in nbrs.iter().enumerate() {
                let dij = distances.get(i, j as usize);
                for &k in &nbrs[a + 1..] {
                    let djk = distances.get(j as usize, k as usize);
                    if djk < threshold {
                        let dik = distances.get(i, k as usize);
                        triangles.push(Triangle {
                            i: i as u32,
                            j,
                            k,
                            diameter: dij.max(dik).max(djk),
                        });
                    }
                }
            }
        }
    }
    edges.sort_by(edge_order);
    triangles.sort_by(triangle_order);
    Ok(RipsFiltration {
        vertex_count: n,
        edges,
        triangles,
        threshold,
        max_dim,
    })
}

impl RipsFiltration {
    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    /// The sub-filtration of simplices with diameter `< scale`.
    pub fn restrict(&self, scale: f64) -> Result<RipsFiltration> {
        if scale > self.threshold {
            return Err(Error::arg(format!(
                "cannot restrict to {scale}: filtration only built up to {}",
                self.threshold
            )));
        }
        // sorted by diameter, so the kept simplices form a prefix
        let ne = self.edges.partition_point(|e| e.diameter < scale);
        let nt = self.triangles.partition_point(|t| t.diameter < scale);
        Ok(RipsFiltration {
            vertex_count: self.vertex_count,
            edges: self.edges[..ne].to_vec(),
            triangles: self.triangles[..nt].to_vec(),
            threshold: scale,
            max_dim: self.max_dim,
        })
    }

    /// Map from `(i, j)`, `i < j`, to the edge's position in [`Self::edges`].
    pub fn edge_index(&self) -> HashMap<(u32, u32), usize> {
        self.edges
            .iter()
            .enumerate()
            .map(|(idx, e)| ((e.i, e.j), idx))
            .collect()
    }
}
