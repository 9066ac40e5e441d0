//! Deterministic synthetic data sets: noisy circle, flat torus in `C²`, and
//! the Klein bottle with a quotient metric.
//!
//! The Klein bottle is `S¹×S¹ / (z, w) ∼ (−z, w̄)`. Its distance is the
//! quotient of the chordal `C²` distance of the torus under that involution,
//! `d([p], [p']) = min{‖P − P'‖, ‖P − ι(P')‖}`, which is a metric because the
//! involution is an isometry of order two.

use std::f64::consts::{PI, TAU};

use crate::metric::{euclidean, DistanceMatrix, DistanceSource, PointCloud};
use crate::rng::SeededRng;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    NoisyCircle,
    Torus,
    KleinBottle,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthSpec {
    pub shape: Shape,
    pub n: usize,
    /// Normal noise level; used by the circle only.
    pub noise_sigma: f64,
    pub seed: u64,
}

/// A generated data set with the parameters each point was drawn from:
/// one angle per point for the circle, `(φ₁, φ₂)` for the torus and Klein
/// bottle.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthData {
    pub source: DistanceSource,
    pub parameters: Vec<Vec<f64>>,
}

pub fn generate(spec: &SynthSpec) -> Result<SynthData> {
    if spec.n == 0 {
        return Err(Error::arg("synthetic data sets need at least one point"));
    }
    match spec.shape {
        Shape::NoisyCircle => gen_noisy_circle(spec.n, spec.noise_sigma, spec.seed),
        Shape::Torus => Ok(gen_torus(spec.n, spec.seed)),
        Shape::KleinBottle => Ok(gen_klein(spec.n, spec.seed)),
    }
}

/// `(1 + εᵢ)(cos tᵢ, sin tᵢ)` with `tᵢ` uniform in `[0, 2π)` and `εᵢ ~ N(0, σ²)`.
pub fn gen_noisy_circle(n: usize, sigma: f64, seed: u64) -> Result<SynthData> {
    if !(sigma >= 0.0) {
        return Err(Error::arg(format!("noise sigma must be nonnegative, got {sigma}")));
    }
    let mut rng = SeededRng::new(seed);
    let mut rows = Vec::with_capacity(n);
    let mut parameters = Vec::with_capacity(n);
    for _ in 0..n {
        let t = TAU * rng.uniform();
        let r = 1.0 + sigma * rng.standard_normal();
        rows.push(vec![r * t.cos(), r * t.sin()]);
        parameters.push(vec![t]);
    }
    Ok(SynthData {
        source: DistanceSource::Cloud(PointCloud::from_rows(rows)?),
        parameters,
    })
}

pub fn torus_point(phi1: f64, phi2: f64) -> Vec<f64> {
    vec![phi1.cos(), phi1.sin(), phi2.cos(), phi2.sin()]
}

/// Rows `(cos φ₁, sin φ₁, cos φ₂, sin φ₂)` with `(φ₁, φ₂)` uniform on `[0, 2π)²`.
pub fn gen_torus(n: usize, seed: u64) -> SynthData {
    let mut rng = SeededRng::new(seed);
    let mut rows = Vec::with_capacity(n);
    let mut parameters = Vec::with_capacity(n);
    for _ in 0..n {
        let (a, b) = (TAU * rng.uniform(), TAU * rng.uniform());
        rows.push(torus_point(a, b));
        parameters.push(vec![a, b]);
    }
    SynthData {
        source: DistanceSource::Cloud(PointCloud::from_rows(rows).expect("fixed dimension")),
        parameters,
    }
}

/// Quotient distance between the Klein bottle classes of `(a, b)` and `(c, d)`.
pub fn klein_distance(p: (f64, f64), q: (f64, f64)) -> f64 {
    let lift = torus_point(p.0, p.1);
    let direct = euclidean(&lift, &torus_point(q.0, q.1));
    // (−z, w̄): z-angle shifted by π, w-angle negated
    let flipped = euclidean(&lift, &torus_point(q.0 + PI, -q.1));
    direct.min(flipped)
}

/// Parameters uniform on `[0, π) × [0, 2π)`, distances by [`klein_distance`].
pub fn gen_klein(n: usize, seed: u64) -> SynthData {
    let mut rng = SeededRng::new(seed);
    let parameters: Vec<Vec<f64>> = (0..n)
        .map(|_| vec![PI * rng.uniform(), TAU * rng.uniform()])
        .collect();
    let matrix = DistanceMatrix::from_fn(n, |i, j| {
        klein_distance((parameters[i][0], parameters[i][1]), (parameters[j][0], parameters[j][1]))
    });
    SynthData {
        source: DistanceSource::Matrix(matrix),
        parameters,
    }
}
