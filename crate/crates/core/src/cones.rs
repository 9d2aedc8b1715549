//! Causal character of tangent vectors for splitting families and
//! quadratic Lorentzian metrics.
//!
//! For `L = -Λτ² + 2bτ + F²` the roots in `τ` are
//! `τ± = b/Λ ± sqrt(b²/Λ² + F²/Λ)`; the future cone `T` is `τ > τ+` and its
//! opposite component is `τ < τ-`.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::{eval_energy, Metric, MetricKind, SplitCoefficients};
use crate::sampling;

/// `|L| ≤ NULL_BAND · (τ² + |y|²)` counts as null.
pub const NULL_BAND: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CausalClass {
    TimelikeFuture,
    TimelikeOther,
    Null,
    Spacelike,
    NonSmoothLocus,
    Zero,
}

impl CausalClass {
    pub fn is_timelike(self) -> bool {
        matches!(self, CausalClass::TimelikeFuture | CausalClass::TimelikeOther)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeResult {
    pub class: CausalClass,
    /// `L(x, y)` by direct evaluation.
    pub l_value: f64,
    /// `(τ+, τ-)` at the given spatial part.
    pub boundary_tau: Option<(f64, f64)>,
}

fn split(metric: &dyn Metric, x: &[f64], ys: &[f64]) -> Result<SplitCoefficients> {
    match metric.splitting(x, ys) {
        Some(r) => r,
        None => Err(Error::Unsupported(
            "cone classification needs a splitting family or a Lorentzian metric with g_00 < 0".into(),
        )),
    }
}

/// `(τ+, τ-)` for the coefficients of a splitting.
pub fn boundary_tau(c: &SplitCoefficients) -> (f64, f64) {
    let shift = c.drift / c.lapse;
    let root = (shift * shift + c.spatial / c.lapse).max(0.0).sqrt();
    (shift + root, shift - root)
}

/// Classify `y ∈ T_xM̃` using the closed-form cone boundary.
pub fn classify(metric: &dyn Metric, x: &[f64], y: &[f64]) -> Result<ConeResult> {
    if metric.kind() != MetricKind::Spacetime {
        return Err(Error::Unsupported("cone classification applies to spacetimes".into()));
    }
    let scale = y.iter().map(|v| v * v).sum::<f64>();
    if scale == 0.0 {
        return Ok(ConeResult { class: CausalClass::Zero, l_value: 0.0, boundary_tau: None });
    }
    let c = split(metric, x, &y[1..])?;
    let (tp, tm) = boundary_tau(&c);
    let l_value = eval_energy(metric, x, y)?;
    let tau = y[0];
    let closed = -c.lapse * (tau - tp) * (tau - tm);
    let class = if !metric.smooth_at(x, y) {
        CausalClass::NonSmoothLocus
    } else if closed.abs() <= NULL_BAND * scale {
        CausalClass::Null
    } else if tau > tp {
        CausalClass::TimelikeFuture
    } else if tau < tm {
        CausalClass::TimelikeOther
    } else {
        CausalClass::Spacelike
    };
    Ok(ConeResult { class, l_value, boundary_tau: Some((tp, tm)) })
}

/// Whether `y` lies in the future cone `T_x` (time axis included).
pub fn in_future_cone(metric: &dyn Metric, x: &[f64], y: &[f64]) -> Result<bool> {
    let c = split(metric, x, &y[1..])?;
    Ok(y[0] > boundary_tau(&c).0)
}

/// Whether `y` lies in the past component `τ < τ-`.
pub fn in_past_cone(metric: &dyn Metric, x: &[f64], y: &[f64]) -> Result<bool> {
    let c = split(metric, x, &y[1..])?;
    Ok(y[0] < boundary_tau(&c).1)
}

/// Random vector of the future (`future = true`) or past component at `x`.
pub fn sample_cone_vector(
    metric: &dyn Metric,
    x: &[f64],
    future: bool,
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    let n = metric.dimension() - 1;
    let ys = sampling::gaussian(rng, n);
    let c = split(metric, x, &ys)?;
    let (tp, tm) = boundary_tau(&c);
    let margin = rng.random_range(1e-3..2.0) * (1.0 + (tp - tm).abs());
    let tau = if future { tp + margin } else { tm - margin };
    let mut y = vec![tau];
    y.extend(ys);
    Ok(y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConvexityReport {
    /// Pairs drawn inside one component (future and past combined).
    pub pairs: usize,
    /// Same-component pairs whose midpoint left the component.
    pub violations: usize,
    /// Mixed pairs (one future, one past vector) whose midpoint left both.
    pub cross_component_exits: usize,
    pub cross_pairs: usize,
}

/// Midpoint test of convexity for the future cone and, when `with_past`,
/// for the past component; `cross_pairs` mixed pairs are probed as well.
pub fn cone_convexity_probe(
    metric: &dyn Metric,
    x: &[f64],
    samples: usize,
    with_past: bool,
    cross_pairs: usize,
    rng: &mut impl Rng,
) -> Result<ConvexityReport> {
    let mut report = ConvexityReport { pairs: 0, violations: 0, cross_component_exits: 0, cross_pairs };
    let mid = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(u, v)| 0.5 * (u + v)).collect() };
    for k in 0..samples {
        let future = !with_past || k % 2 == 0;
        let a = sample_cone_vector(metric, x, future, rng)?;
        let b = sample_cone_vector(metric, x, future, rng)?;
        let m = mid(&a, &b);
        let inside = if future { in_future_cone(metric, x, &m)? } else { in_past_cone(metric, x, &m)? };
        let l = eval_energy(metric, x, &m)?;
        report.pairs += 1;
        if !inside || !(l < 0.0) {
            report.violations += 1;
        }
    }
    for _ in 0..cross_pairs {
        let a = sample_cone_vector(metric, x, true, rng)?;
        let b = sample_cone_vector(metric, x, false, rng)?;
        let m = mid(&a, &b);
        if !in_future_cone(metric, x, &m)? && !in_past_cone(metric, x, &m)? {
            report.cross_component_exits += 1;
        }
    }
    Ok(report)
}
