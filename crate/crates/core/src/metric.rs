//! Distance sources: explicit matrices and Euclidean point clouds.

use crate::{Error, Result};

/// Relative tolerance under which `(i, j)` and `(j, i)` entries are averaged.
pub const ASYMMETRY_TOLERANCE: f64 = 1e-9;
/// Absolute tolerance on diagonal entries of an explicit matrix.
pub const DIAGONAL_TOLERANCE: f64 = 1e-12;

/// Dense symmetric matrix with zero diagonal, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    /// Validates a square matrix and symmetrizes entries that agree to within
    /// [`ASYMMETRY_TOLERANCE`] (relative).
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Validation("matrix is empty".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Validation(format!(
                    "matrix is not square: row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::Validation(format!("entry ({i}, {j}) is not finite")));
                }
                if v < 0.0 {
                    return Err(Error::Validation(format!("entry ({i}, {j}) = {v} is negative")));
                }
            }
            if row[i].abs() > DIAGONAL_TOLERANCE {
                return Err(Error::Validation(format!(
                    "diagonal entry ({i}, {i}) = {} is not zero",
                    row[i]
                )));
            }
        }
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (rows[i][j], rows[j][i]);
                if (a - b).abs() > ASYMMETRY_TOLERANCE * a.max(b) {
                    return Err(Error::Validation(format!(
                        "entries ({i}, {j}) = {a} and ({j}, {i}) = {b} are asymmetric"
                    )));
                }
                let v = if a == b { a } else { 0.5 * (a + b) };
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Ok(Self { n, data })
    }

    /// Builds a matrix from a symmetric distance rule evaluated on the upper
    /// triangle only, so the result is exactly symmetric.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Self { n, data }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Largest entry, i.e. the diameter of the metric space.
    pub fn diameter(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }
}

/// Points of a fixed dimension, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(Error::arg(format!(
                    "point {i} has dimension {}, expected {dim}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::arg(format!("point {i} has a non-finite coordinate")));
            }
            coords.extend(row);
        }
        Ok(Self { dim, coords })
    }

    pub fn len(&self) -> usize {
        self.coords.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim.max(1))
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Uniform access to the pairwise distances of a finite metric space.
///
/// Point-cloud distances are evaluated lazily; nothing of size `n × n` is
/// materialized for them.
#[derive(Clone, Debug, PartialEq)]
pub enum DistanceSource {
    Matrix(DistanceMatrix),
    Cloud(PointCloud),
}

/// A point to measure distances from: a data index, or (point clouds only) a
/// raw ambient vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum QueryPoint<'a> {
    Index(usize),
    Vector(&'a [f64]),
}

impl DistanceSource {
    pub fn len(&self) -> usize {
        match self {
            DistanceSource::Matrix(m) => m.len(),
            DistanceSource::Cloud(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> &'static str {
        match self {
            DistanceSource::Matrix(_) => "explicit-matrix",
            DistanceSource::Cloud(_) => "point-cloud",
        }
    }

    pub fn as_cloud(&self) -> Option<&PointCloud> {
        match self {
            DistanceSource::Cloud(c) => Some(c),
            DistanceSource::Matrix(_) => None,
        }
    }

    /// Distance between two data points. Panics on out-of-range indices.
    #[inline]
    pub fn between(&self, i: usize, j: usize) -> f64 {
        match self {
            DistanceSource::Matrix(m) => m.get(i, j),
            DistanceSource::Cloud(c) => {
                if i == j {
                    0.0
                } else {
                    euclidean(c.point(i), c.point(j))
                }
            }
        }
    }

    fn check_query(&self, q: QueryPoint<'_>) -> Result<()> {
        match (self, q) {
            (_, QueryPoint::Index(i)) if i >= self.len() => Err(Error::arg(format!(
                "index {i} out of range for {} points",
                self.len()
            ))),
            (_, QueryPoint::Index(_)) => Ok(()),
            (DistanceSource::Matrix(_), QueryPoint::Vector(_)) => Err(Error::UnsupportedQuery(
                "raw-vector queries need a point-cloud source".into(),
            )),
            (DistanceSource::Cloud(c), QueryPoint::Vector(v)) if v.len() != c.dim() => {
                Err(Error::UnsupportedQuery(format!(
                    "query has dimension {}, cloud has dimension {}",
                    v.len(),
                    c.dim()
                )))
            }
            (DistanceSource::Cloud(_), QueryPoint::Vector(_)) => Ok(()),
        }
    }

    pub fn distance(&self, a: QueryPoint<'_>, b: QueryPoint<'_>) -> Result<f64> {
        self.check_query(a)?;
        self.check_query(b)?;
        Ok(self.distance_unchecked(a, b))
    }

    /// Distances from `q` to each of `targets`, validating `q` once.
    pub fn distances_to(&self, q: QueryPoint<'_>, targets: &[usize]) -> Result<Vec<f64>> {
        self.check_query(q)?;
        Ok(targets
            .iter()
            .map(|&t| self.distance_unchecked(q, QueryPoint::Index(t)))
            .collect())
    }

    fn distance_unchecked(&self, a: QueryPoint<'_>, b: QueryPoint<'_>) -> f64 {
        match (a, b) {
            (QueryPoint::Index(i), QueryPoint::Index(j)) => self.between(i, j),
            (QueryPoint::Index(i), QueryPoint::Vector(v))
            | (QueryPoint::Vector(v), QueryPoint::Index(i)) => match self {
                DistanceSource::Cloud(c) => euclidean(c.point(i), v),
                DistanceSource::Matrix(_) => unreachable!("checked above"),
            },
            (QueryPoint::Vector(u), QueryPoint::Vector(v)) => euclidean(u, v),
        }
    }

    /// Materializes the distances among `indices`.
    pub fn submatrix(&self, indices: &[usize]) -> DistanceMatrix {
        DistanceMatrix::from_fn(indices.len(), |a, b| self.between(indices[a], indices[b]))
    }
}
