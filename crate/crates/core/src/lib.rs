//! Sparse circle-valued coordinates for finite metric data.
//!
//! The pipeline selects a small landmark subset, computes the 1-dimensional
//! persistent cohomology of the landmark Rips filtration over a prime field,
//! lifts a persistent class to an integer cocycle, smooths it to its weighted
//! harmonic representative, and finally evaluates the induced circle-valued
//! map on every point covered by the landmark balls.
//!
//! The stages are exposed individually so they can be inspected or tested in
//! isolation:
//!
//! * [`metric`] and [`io`]: distance sources and CSV/JSON serialization.
//! * [`landmarks`]: maxmin and seeded random landmark selection.
//! * [`filtration`]: Rips filtration on the landmarks, simplices of dimension ≤ 2.
//! * [`cohomology`]: persistent cohomology over `Z/q` with representative cocycles,
//!   plus scale selection.
//! * [`lift`]: centered-residue integer lift of a `Z/q` cocycle.
//! * [`harmonic`]: weighted least-squares smoothing to the harmonic representative.
//! * [`coords`]: partition of unity and evaluation of the circular coordinate.
//! * [`synth`]: deterministic synthetic data sets (noisy circle, torus, Klein bottle).
//! * [`pipeline`]: end-to-end orchestration with run metadata.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cohomology;
pub mod coords;
mod error;
pub mod filtration;
pub mod harmonic;
pub mod io;
pub mod landmarks;
pub mod lift;
mod lsqr;
pub mod metric;
pub mod pipeline;
pub mod rng;
pub mod svg;
pub mod synth;
mod union_find;

pub use error::{Error, NoQualifyingClass, Result};
