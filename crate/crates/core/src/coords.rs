//! Evaluation of the circular coordinate through the landmark partition of unity.
//!
//! For a point `b` in the ball `B_α(ℓ_j)` the coordinate is
//! `2π·(τ_j + Σ_k φ_k(b)·θ_jk)` reduced to `(−π, π]`, where
//! `φ_k(b) ∝ |α − d(ℓ_k, b)|₊`. Any covering landmark `j` gives the same angle
//! when `θ − dτ` is an integer cocycle on `R_{2α}`; the nearest one is used.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::filtration::RipsFiltration;
use crate::harmonic::HarmonicPair;
use crate::lift::IntegerCochain;
use crate::metric::{DistanceSource, QueryPoint};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CoordinateMode {
    /// `θ, τ` from harmonic smoothing.
    Harmonic,
    /// The lifted integer cocycle directly, with `τ = 0`.
    Integer,
}

/// Everything needed to evaluate one circular coordinate.
///
/// Only the landmarks and the cochains on `R_{2α}` are stored.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordinateModel {
    /// Data indices of the landmarks; landmark `k` is `landmarks[k]`.
    pub landmarks: Vec<usize>,
    pub alpha: f64,
    pub tau: Vec<f64>,
    /// Edge values keyed by `(i, j)`, `i < j`, over landmark positions.
    pub theta: HashMap<(u32, u32), f64>,
    pub mode: CoordinateMode,
    pub prime: u32,
    pub class_label: String,
}

/// Per-query angle in `(−π, π]`, or `None` where no ball covers the query.
pub type AngleAssignment = Vec<Option<f64>>;

impl CoordinateModel {
    pub fn harmonic(
        landmarks: Vec<usize>,
        alpha: f64,
        filt_2alpha: &RipsFiltration,
        pair: &HarmonicPair,
        prime: u32,
        class_label: impl Into<String>,
    ) -> Self {
        let theta = filt_2alpha
            .edges()
            .iter()
            .zip(&pair.theta)
            .map(|(e, &v)| ((e.i, e.j), v))
            .collect();
        Self {
            landmarks,
            alpha,
            tau: pair.tau.clone(),
            theta,
            mode: CoordinateMode::Harmonic,
            prime,
            class_label: class_label.into(),
        }
    }

    pub fn integer(
        landmarks: Vec<usize>,
        alpha: f64,
        filt_2alpha: &RipsFiltration,
        eta: &IntegerCochain,
        prime: u32,
        class_label: impl Into<String>,
    ) -> Self {
        let theta = filt_2alpha
            .edges()
            .iter()
            .map(|e| ((e.i, e.j), eta.get(e.i, e.j) as f64))
            .collect();
        Self {
            tau: vec![0.0; landmarks.len()],
            landmarks,
            alpha,
            theta,
            mode: CoordinateMode::Integer,
            prime,
            class_label: class_label.into(),
        }
    }

    /// `θ_jk` on the oriented edge `[j, k]`; `None` if `{j, k}` is not an edge.
    pub fn theta_between(&self, j: usize, k: usize) -> Option<f64> {
        if j == k {
            return Some(0.0);
        }
        let (a, b) = (j as u32, k as u32);
        if a < b {
            self.theta.get(&(a, b)).copied()
        } else {
            self.theta.get(&(b, a)).map(|v| -v)
        }
    }
}

/// Weights `φ_k(b) = |α − d_k|₊ / Σ|α − d_k'|₊` from distances to each landmark.
fn weights_from_distances(alpha: f64, distances: &[f64]) -> Result<Vec<(usize, f64)>> {
    let raw: Vec<(usize, f64)> = distances
        .iter()
        .enumerate()
        .filter(|(_, &d)| d < alpha)
        .map(|(k, &d)| (k, alpha - d))
        .collect();
    let total: f64 = raw.iter().map(|(_, w)| w).sum();
    if raw.is_empty() || !(total > 0.0) {
        return Err(Error::NotCovered);
    }
    Ok(raw.into_iter().map(|(k, w)| (k, w / total)).collect())
}

/// Sparse partition of unity at `b`, indexed by landmark position.
pub fn partition_of_unity(
    model: &CoordinateModel,
    b: QueryPoint<'_>,
    src: &DistanceSource,
) -> Result<Vec<(usize, f64)>> {
    let distances = src.distances_to(b, &model.landmarks)?;
    weights_from_distances(model.alpha, &distances)
}

/// Reduces an angle to `(−π, π]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let turns = angle / TAU;
    let mut frac = turns - turns.round();
    if frac <= -0.5 {
        frac += 1.0;
    }
    let a = TAU * frac;
    if a > PI {
        a - TAU
    } else if a <= -PI {
        a + TAU
    } else {
        a
    }
}

/// Angle in `(−π, π]` as a fraction of a turn in `[0, 1)`.
pub fn angle_to_turns(angle: f64) -> f64 {
    let t = angle / TAU;
    let t = t - t.floor();
    if t >= 1.0 {
        0.0
    } else {
        t
    }
}

fn evaluate_with(model: &CoordinateModel, phi: &[(usize, f64)], j: usize) -> Result<f64> {
    let mut value = model.tau[j];
    for &(k, w) in phi {
        let theta = model.theta_between(j, k).ok_or_else(|| {
            Error::Inconsistent(format!(
                "landmarks {j} and {k} both cover the query but {{{j}, {k}}} is not an edge of R_2α"
            ))
        })?;
        value += w * theta;
    }
    Ok(wrap_angle(TAU * value))
}

/// The coordinate at `b`, using the nearest covering landmark as base index.
pub fn evaluate(model: &CoordinateModel, b: QueryPoint<'_>, src: &DistanceSource) -> Result<f64> {
    let distances = src.distances_to(b, &model.landmarks)?;
    let phi = weights_from_distances(model.alpha, &distances)?;
    let mut nearest = 0;
    for (k, &d) in distances.iter().enumerate() {
        if d < distances[nearest] {
            nearest = k;
        }
    }
    evaluate_with(model, &phi, nearest)
}

/// The coordinate at `b` computed with landmark position `j` as base index.
/// `b` must lie in the ball of landmark `j`.
pub fn evaluate_from(model: &CoordinateModel, b: QueryPoint<'_>, src: &DistanceSource, j: usize) -> Result<f64> {
    let distances = src.distances_to(b, &model.landmarks)?;
    let dj = *distances
        .get(j)
        .ok_or_else(|| Error::arg(format!("landmark {j} out of range")))?;
    if !(dj < model.alpha) {
        return Err(Error::NotCovered);
    }
    let phi = weights_from_distances(model.alpha, &distances)?;
    evaluate_with(model, &phi, j)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Targets {
    AllData,
    Indices(Vec<usize>),
    Vectors(Vec<Vec<f64>>),
}

/// Evaluates every target in order; uncovered targets become `None`.
pub fn evaluate_all(model: &CoordinateModel, src: &DistanceSource, targets: &Targets) -> Result<AngleAssignment> {
    let one = |q: QueryPoint<'_>| match evaluate(model, q, src) {
        Ok(a) => Ok(Some(a)),
        Err(Error::NotCovered) => Ok(None),
        Err(e) => Err(e),
    };
    match targets {
        Targets::AllData => (0..src.len()).map(|i| one(QueryPoint::Index(i))).collect(),
        Targets::Indices(ix) => ix.iter().map(|&i| one(QueryPoint::Index(i))).collect(),
        Targets::Vectors(vs) => vs.iter().map(|v| one(QueryPoint::Vector(v))).collect(),
    }
}

/// Pointwise `Σ cᵢ·angleᵢ` in the circle group; `None` wherever any input is.
pub fn combine(assignments: &[AngleAssignment], coefficients: &[i64]) -> Result<AngleAssignment> {
    if assignments.is_empty() || assignments.len() != coefficients.len() {
        return Err(Error::arg("need one coefficient per angle assignment"));
    }
    let len = assignments[0].len();
    if assignments.iter().any(|a| a.len() != len) {
        return Err(Error::arg("angle assignments have different lengths"));
    }
    Ok((0..len)
        .map(|i| {
            assignments
                .iter()
                .zip(coefficients)
                .try_fold(0.0, |acc, (a, &c)| a[i].map(|x| acc + c as f64 * x))
                .map(wrap_angle)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::PointCloud;
    use proptest::prelude::*;

    fn line_source(xs: &[f64]) -> DistanceSource {
        DistanceSource::Cloud(PointCloud::from_rows(xs.iter().map(|&x| vec![x]).collect()).unwrap())
    }

    fn model(landmarks: Vec<usize>, alpha: f64, tau: Vec<f64>, theta: &[((u32, u32), f64)]) -> CoordinateModel {
        CoordinateModel {
            landmarks,
            alpha,
            tau,
            theta: theta.iter().copied().collect(),
            mode: CoordinateMode::Harmonic,
            prime: 47,
            class_label: "0".into(),
        }
    }

    #[test]
    fn single_ball() {
        let src = line_source(&[0.0, 10.0]);
        let m = model(vec![0, 1], 1.0, vec![0.1, 0.0], &[]);
        let phi = partition_of_unity(&m, QueryPoint::Index(0), &src).unwrap();
        assert_eq!(phi, vec![(0, 1.0)]);
        let a = evaluate(&m, QueryPoint::Index(0), &src).unwrap();
        assert!((a - TAU * 0.1).abs() < 1e-12);
    }

    #[test]
    fn midpoint_splits_evenly() {
        let src = line_source(&[0.0, 1.0, 0.5]);
        let m = model(vec![0, 1], 1.0, vec![0.0, 0.0], &[((0, 1), 0.0)]);
        let phi = partition_of_unity(&m, QueryPoint::Index(2), &src).unwrap();
        assert_eq!(phi, vec![(0, 0.5), (1, 0.5)]);
    }

    #[test]
    fn two_thirds_one_third() {
        // d₁ = α/2, d₂ = 3α/4 → (α/2) / (α/2 + α/4) = 2/3
        let alpha = 2.0;
        let src = line_source(&[0.0, 2.5, 1.0, 10.0]);
        let m = model(vec![0, 1, 3], alpha, vec![0.0; 3], &[((0, 1), 0.0)]);
        let phi = partition_of_unity(&m, QueryPoint::Index(2), &src).unwrap();
        assert_eq!(phi.len(), 2);
        assert!((phi[0].1 - 2.0 / 3.0).abs() < 1e-15);
        assert!((phi[1].1 - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn uncovered_query() {
        let src = line_source(&[0.0, 5.0]);
        let m = model(vec![0], 1.0, vec![0.0], &[]);
        assert!(matches!(
            partition_of_unity(&m, QueryPoint::Index(1), &src),
            Err(Error::NotCovered)
        ));
        let far = [100.0];
        let out = evaluate_all(&m, &src, &Targets::Vectors(vec![far.to_vec(), vec![0.2]])).unwrap();
        assert_eq!(out[0], None);
        assert!(out[1].is_some());
    }

    #[test]
    fn zero_cochains_give_zero() {
        let src = line_source(&[0.0, 0.5, 1.0, 0.3]);
        let m = model(vec![0, 2], 0.8, vec![0.0, 0.0], &[((0, 1), 0.0)]);
        let out = evaluate_all(&m, &src, &Targets::AllData).unwrap();
        assert!(out.iter().all(|a| *a == Some(0.0)));
        let out = evaluate_all(&m, &src, &Targets::Indices(vec![0, 2])).unwrap();
        assert!(out.iter().all(Option::is_some));
    }

    #[test]
    fn base_index_independence() {
        // θ₀₁ = η₀₁ + τ₁ − τ₀ with η₀₁ = 1
        let src = line_source(&[0.0, 1.0, 0.4]);
        let tau = vec![0.1, 0.4];
        let theta01 = 1.0 + (tau[1] - tau[0]);
        let m = model(vec![0, 1], 1.0, tau, &[((0, 1), theta01)]);
        let a0 = evaluate_from(&m, QueryPoint::Index(2), &src, 0).unwrap();
        let a1 = evaluate_from(&m, QueryPoint::Index(2), &src, 1).unwrap();
        assert!(wrap_angle(a0 - a1).abs() < 1e-12);
    }

    #[test]
    fn missing_edge_is_inconsistent() {
        let src = line_source(&[0.0, 1.0, 0.5]);
        let m = model(vec![0, 1], 1.0, vec![0.0, 0.0], &[]);
        assert!(matches!(
            evaluate(&m, QueryPoint::Index(2), &src),
            Err(Error::Inconsistent(_))
        ));
    }

    #[test]
    fn combine_arithmetic() {
        let a = vec![Some(PI / 2.0), None, Some(1.0)];
        assert_eq!(combine(std::slice::from_ref(&a), &[1]).unwrap(), a);
        let both = combine(&[a.clone(), a.clone()], &[1, 1]).unwrap();
        assert!((both[0].unwrap() - PI).abs() < 1e-15);
        assert_eq!(both[1], None);
        assert!(combine(&[a.clone(), vec![None]], &[1, 1]).is_err());
        assert!(combine(&[a], &[1, 2]).is_err());
    }

    #[test]
    fn wrapping() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(TAU + 0.5) - 0.5).abs() < 1e-12);
        assert_eq!(angle_to_turns(0.0), 0.0);
        assert!((angle_to_turns(-PI / 2.0) - 0.75).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn partition_sums_to_one(
            xs in prop::collection::vec(-5.0f64..5.0, 2..20),
            q in -5.0f64..5.0,
            alpha in 0.1f64..3.0,
        ) {
            let src = line_source(&xs);
            let landmarks: Vec<usize> = (0..xs.len()).collect();
            let m = model(landmarks, alpha, vec![0.0; xs.len()], &[]);
            let qv = [q];
            match partition_of_unity(&m, QueryPoint::Vector(&qv), &src) {
                Ok(phi) => {
                    let total: f64 = phi.iter().map(|p| p.1).sum();
                    prop_assert!((total - 1.0).abs() <= 1e-12);
                    prop_assert!(phi.iter().all(|p| p.1 > 0.0));
                    let support: Vec<usize> = phi.iter().map(|p| p.0).collect();
                    let expected: Vec<usize> = (0..xs.len()).filter(|&k| (xs[k] - q).abs() < alpha).collect();
                    prop_assert_eq!(support, expected);
                }
                Err(Error::NotCovered) => prop_assert!(xs.iter().all(|x| (x - q).abs() >= alpha)),
                Err(e) => prop_assert!(false, "{}", e),
            }
        }

        #[test]
        fn wrapped_angles_stay_in_range(x in -1e4f64..1e4) {
            let a = wrap_angle(x);
            prop_assert!(a > -PI && a <= PI);
            let t = angle_to_turns(a);
            prop_assert!((0.0..1.0).contains(&t));
        }
    }
}
