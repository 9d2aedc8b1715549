//! Numerical Lorentz–Finsler geometry.
//!
//! Metric families are evaluated on Taylor jets ([`jets`]), which feed an
//! exact-derivative curvature pipeline ([`geometry`]). On top of it sit causal
//! cone tests, Killing and staticity checks, Berwald detection, indicatrix
//! averaging and geodesic integration.

pub mod averaging;
pub mod berwald;
pub mod cones;
pub mod error;
pub mod geodesics;
pub mod geometry;
pub mod jets;
pub mod linalg;
pub mod metrics;
pub mod sampling;
pub mod symmetry;

pub use error::{Error, Result};
pub use jets::{Jet, JetSpace};
pub use metrics::{
    Drift, MatrixField, Metric, MetricDescriptor, MetricKind, MetricSpec, OneForm, ScalarField,
    TangentPoint, VectorField,
};
