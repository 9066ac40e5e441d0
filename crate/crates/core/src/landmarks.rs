//! Landmark selection and coverage radius.

use serde::Serialize;

use crate::metric::DistanceSource;
use crate::rng::SeededRng;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingMethod {
    Maxmin,
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LandmarkSet {
    /// Distinct data indices, in selection order.
    pub indices: Vec<usize>,
    /// `max_x min_ℓ d(x, ℓ)` over all data points.
    pub coverage_radius: f64,
    pub method: SamplingMethod,
    /// Start index for maxmin, seed for random sampling.
    pub seed_or_start: u64,
}

impl LandmarkSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

fn check_count(src: &DistanceSource, count: usize) -> Result<()> {
    if count == 0 || count > src.len() {
        return Err(Error::arg(format!(
            "landmark count must be in 1..={}, got {count}",
            src.len()
        )));
    }
    Ok(())
}

/// Relative tolerance under which two maxmin candidates count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Greedy farthest-point sampling starting at `start`.
///
/// Each new landmark maximizes the distance to its nearest already chosen
/// landmark; ties (within [`TIE_TOLERANCE`]) go to the lowest index.
pub fn maxmin_landmarks(src: &DistanceSource, count: usize, start: usize) -> Result<LandmarkSet> {
    check_count(src, count)?;
    let n = src.len();
    if start >= n {
        return Err(Error::arg(format!("start index {start} out of range for {n} points")));
    }
    let mut chosen = vec![false; n];
    let mut nearest: Vec<f64> = (0..n).map(|x| src.between(x, start)).collect();
    chosen[start] = true;
    let mut indices = Vec::with_capacity(count);
    indices.push(start);
    while indices.len() < count {
        let max = (0..n).filter(|&x| !chosen[x]).map(|x| nearest[x]).fold(f64::NEG_INFINITY, f64::max);
        let floor = max - TIE_TOLERANCE * max.abs().max(1.0);
        let best = (0..n)
            .find(|&x| !chosen[x] && nearest[x] >= floor)
            .expect("count <= n leaves an unchosen point");
        chosen[best] = true;
        indices.push(best);
        for (x, slot) in nearest.iter_mut().enumerate() {
            let d = src.between(x, best);
            if d < *slot {
                *slot = d;
            }
        }
    }
    let coverage_radius = nearest.iter().copied().fold(0.0, f64::max);
    Ok(LandmarkSet {
        indices,
        coverage_radius,
        method: SamplingMethod::Maxmin,
        seed_or_start: start as u64,
    })
}

/// `count` distinct indices by a partial Fisher–Yates shuffle driven by
/// [`SeededRng`].
pub fn random_landmarks(src: &DistanceSource, count: usize, seed: u64) -> Result<LandmarkSet> {
    check_count(src, count)?;
    let n = src.len();
    let mut rng = SeededRng::new(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..count {
        let r = k + rng.below((n - k) as u64) as usize;
        perm.swap(k, r);
    }
    perm.truncate(count);
    let coverage_radius = coverage_radius(src, &perm);
    Ok(LandmarkSet {
        indices: perm,
        coverage_radius,
        method: SamplingMethod::Random,
        seed_or_start: seed,
    })
}

/// Hausdorff distance from the whole data set to `landmarks`.
pub fn coverage_radius(src: &DistanceSource, landmarks: &[usize]) -> f64 {
    (0..src.len())
        .map(|x| {
            landmarks
                .iter()
                .map(|&l| src.between(x, l))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}
