//! Weighted harmonic smoothing of an integer cocycle.
//!
//! Given an integer cocycle `η` on `R_ε` (ε = 2α), finds the vertex cochain
//! `τ` minimizing `Σ_e w(e)·(η + dτ)(e)²` and returns `θ = η + dτ`, the
//! representative of the real class of `η` with smallest weighted norm.
//! Among minimizers, `τ` is normalized to vertex-weighted mean zero on each
//! connected component, which is the minimum-norm choice for the
//! vertex-weighted inner product. Vertex weights only affect that
//! normalization, never `θ`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::filtration::RipsFiltration;
use crate::lift::IntegerCochain;
use crate::lsqr::lsqr;
use crate::union_find::UnionFind;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeWeightRule {
    /// `w(ℓ, ℓ') = |ε − d(ℓ, ℓ')|₊` with ε the filtration threshold.
    /// Selected on the command line as `paper`.
    #[serde(rename = "paper")]
    Distance,
    Uniform,
}

#[derive(Clone, Debug, PartialEq)]
pub enum VertexWeights {
    Uniform,
    Custom(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightScheme {
    pub vertex: VertexWeights,
    pub edge_rule: EdgeWeightRule,
}

impl Default for WeightScheme {
    fn default() -> Self {
        Self {
            vertex: VertexWeights::Uniform,
            edge_rule: EdgeWeightRule::Distance,
        }
    }
}

pub fn distance_edge_weight(epsilon: f64, distance: f64) -> f64 {
    (epsilon - distance).max(0.0)
}

impl WeightScheme {
    /// One weight per edge of `filt`, at `ε = filt.threshold()`.
    pub fn edge_weights(&self, filt: &RipsFiltration) -> Result<Vec<f64>> {
        let eps = filt.threshold();
        let weights: Vec<f64> = filt
            .edges()
            .iter()
            .map(|e| match self.edge_rule {
                EdgeWeightRule::Distance => distance_edge_weight(eps, e.diameter),
                EdgeWeightRule::Uniform => 1.0,
            })
            .collect();
        if let Some(k) = weights.iter().position(|&w| !(w > 0.0)) {
            let e = filt.edges()[k];
            return Err(Error::arg(format!("edge ({}, {}) has non-positive weight", e.i, e.j)));
        }
        Ok(weights)
    }

    pub fn vertex_weights(&self, n: usize) -> Result<Vec<f64>> {
        match &self.vertex {
            VertexWeights::Uniform => Ok(vec![1.0; n]),
            VertexWeights::Custom(w) => {
                if w.len() != n {
                    return Err(Error::arg(format!("expected {n} vertex weights, got {}", w.len())));
                }
                if w.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
                    return Err(Error::arg("vertex weights must be positive and finite"));
                }
                Ok(w.clone())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    Iterative,
    DenseSvd,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub solver: Solver,
    /// Relative tolerance for the iterative solve.
    pub tolerance: f64,
    /// Iteration cap; `None` means `10·(vertices + edges)`.
    pub max_iterations: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            solver: Solver::Iterative,
            tolerance: 1e-10,
            max_iterations: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicPair {
    /// One value per landmark vertex.
    pub tau: Vec<f64>,
    /// One value per edge, aligned with `filt.edges()`.
    pub theta: Vec<f64>,
    /// Achieved objective `Σ w θ²`.
    pub residual: f64,
    /// Relative weighted normal-equation residual, see [`normal_equation_residual`].
    pub normal_residual: f64,
    pub iterations: usize,
    pub solver: Solver,
}

/// `(dτ)[i, j] = τ(j) − τ(i)` on every edge of `filt`.
pub fn coboundary_apply(tau: &[f64], filt: &RipsFiltration) -> Vec<f64> {
    filt.edges()
        .iter()
        .map(|e| tau[e.j as usize] - tau[e.i as usize])
        .collect()
}

/// `dᵀ y` for an edge cochain `y`.
fn coboundary_transpose(y: &[f64], filt: &RipsFiltration, out: &mut [f64]) {
    out.iter_mut().for_each(|x| *x = 0.0);
    for (e, &v) in filt.edges().iter().zip(y) {
        out[e.j as usize] += v;
        out[e.i as usize] -= v;
    }
}

/// `‖dᵀWθ‖₂ / (‖W^½ d‖_F · ‖W^½ η‖₂)`: the optimality gap of `θ` relative
/// to the size of the problem data. Zero when `η` vanishes.
pub fn normal_equation_residual(theta: &[f64], eta: &[f64], weights: &[f64], filt: &RipsFiltration) -> f64 {
    let wtheta: Vec<f64> = theta.iter().zip(weights).map(|(t, w)| t * w).collect();
    let mut grad = vec![0.0; filt.vertex_count()];
    coboundary_transpose(&wtheta, filt, &mut grad);
    let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    let op_norm = (2.0 * weights.iter().sum::<f64>()).sqrt();
    let data_norm = eta.iter().zip(weights).map(|(e, w)| w * e * e).sum::<f64>().sqrt();
    if op_norm * data_norm == 0.0 {
        0.0
    } else {
        grad_norm / (op_norm * data_norm)
    }
}

/// Connected-component label of every vertex of `filt`'s 1-skeleton.
pub fn vertex_components(filt: &RipsFiltration) -> (Vec<usize>, usize) {
    let mut uf = UnionFind::new(filt.vertex_count());
    for e in filt.edges() {
        uf.union(e.i as usize, e.j as usize);
    }
    uf.labels()
}

fn center_per_component(tau: &mut [f64], vertex_weights: &[f64], filt: &RipsFiltration) {
    let (labels, count) = vertex_components(filt);
    let mut sums = vec![0.0; count];
    let mut mass = vec![0.0; count];
    for (v, &c) in labels.iter().enumerate() {
        sums[c] += vertex_weights[v] * tau[v];
        mass[c] += vertex_weights[v];
    }
    for (v, &c) in labels.iter().enumerate() {
        tau[v] -= sums[c] / mass[c];
    }
}

pub fn harmonic_smooth(
    eta: &IntegerCochain,
    filt: &RipsFiltration,
    weights: &WeightScheme,
    options: &SolverOptions,
) -> Result<HarmonicPair> {
    let n = filt.vertex_count();
    let edges = filt.edges();
    let w = weights.edge_weights(filt)?;
    let nu = weights.vertex_weights(n)?;
    let sqrt_w: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
    let eta_values: Vec<f64> = edges.iter().map(|e| eta.get(e.i, e.j) as f64).collect();
    // min ‖W^½(η + dτ)‖  ⇔  min ‖Aτ − b‖ with A = W^½ d, b = −W^½ η
    let b: Vec<f64> = eta_values.iter().zip(&sqrt_w).map(|(e, s)| -e * s).collect();

    let (mut tau, iterations) = match options.solver {
        Solver::Iterative => {
            let cap = options.max_iterations.unwrap_or(10 * (n + edges.len()));
            let apply = |x: &[f64], y: &mut [f64]| {
                for ((slot, e), s) in y.iter_mut().zip(edges).zip(&sqrt_w) {
                    *slot = s * (x[e.j as usize] - x[e.i as usize]);
                }
            };
            let apply_t = |y: &[f64], x: &mut [f64]| {
                let scaled: Vec<f64> = y.iter().zip(&sqrt_w).map(|(a, s)| a * s).collect();
                coboundary_transpose(&scaled, filt, x);
            };
            let out = lsqr(n, &b, apply, apply_t, options.tolerance, options.tolerance, cap);
            if !out.converged {
                let theta: Vec<f64> = eta_values
                    .iter()
                    .zip(coboundary_apply(&out.x, filt))
                    .map(|(e, d)| e + d)
                    .collect();
                return Err(Error::Convergence {
                    iterations: out.iterations,
                    relative_residual: normal_equation_residual(&theta, &eta_values, &w, filt),
                });
            }
            (out.x, out.iterations)
        }
        Solver::DenseSvd => (dense_min_norm(&b, &sqrt_w, filt)?, 0),
    };

    center_per_component(&mut tau, &nu, filt);
    let theta: Vec<f64> = eta_values
        .iter()
        .zip(coboundary_apply(&tau, filt))
        .map(|(e, d)| e + d)
        .collect();
    let residual = theta.iter().zip(&w).map(|(t, wt)| wt * t * t).sum();
    let normal_residual = normal_equation_residual(&theta, &eta_values, &w, filt);
    Ok(HarmonicPair {
        tau,
        theta,
        residual,
        normal_residual,
        iterations,
        solver: options.solver,
    })
}

/// Least-squares `τ` through an SVD of `W^½ d`.
///
/// One vertex per component is pinned to zero first so the factored matrix
/// has full column rank; the SVD loses several digits when the constant
/// null vectors are left in. The gauge is fixed afterwards by centering.
fn dense_min_norm(b: &[f64], sqrt_w: &[f64], filt: &RipsFiltration) -> Result<Vec<f64>> {
    let n = filt.vertex_count();
    let m = filt.edges().len();
    let (labels, components) = vertex_components(filt);
    let mut seen = vec![false; components];
    let mut column = vec![None; n];
    let mut free = 0;
    for v in 0..n {
        if std::mem::replace(&mut seen[labels[v]], true) {
            column[v] = Some(free);
            free += 1;
        }
    }
    if m == 0 || free == 0 {
        return Ok(vec![0.0; n]);
    }
    let mut a = DMatrix::<f64>::zeros(m, free);
    for (r, (e, s)) in filt.edges().iter().zip(sqrt_w).enumerate() {
        if let Some(c) = column[e.i as usize] {
            a[(r, c)] = -s;
        }
        if let Some(c) = column[e.j as usize] {
            a[(r, c)] = *s;
        }
    }
    let svd = a.clone().svd(true, true);
    let (u, v_t) = match (&svd.u, &svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::Inconsistent("dense SVD did not return singular vectors".into())),
    };
    if svd.singular_values.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::Inconsistent("pinned coboundary matrix is rank deficient".into()));
    }
    let solve = |rhs: &DVector<f64>| {
        let mut x = DVector::<f64>::zeros(free);
        for (k, &sigma) in svd.singular_values.iter().enumerate() {
            x += v_t.row(k).transpose() * (u.column(k).dot(rhs) / sigma);
        }
        x
    };
    let b = DVector::from_column_slice(b);
    let mut x = solve(&b);
    // one refinement step against the rounding of the factorization
    let r = &b - &a * &x;
    x += solve(&r);
    Ok((0..n).map(|v| column[v].map_or(0.0, |c| x[c])).collect())
}
