//! Metric families and the [`Metric`] evaluation contract.
//!
//! Spacetime families return the Lorentz–Finsler function `L(x, y)`;
//! positive-definite base families return the Finsler norm `F(x, y)` through
//! [`MetricSpec::norm`] and its square through [`Metric::energy`]. Every
//! evaluator runs on jets, so the geometry pipeline differentiates them
//! exactly.
//!
//! Splitting families use coordinates `(t, x¹..xⁿ)` with fiber coordinates
//! `(τ, y¹..yⁿ)`; their coefficient fields live on the base and see only the
//! spatial coordinates.

mod descriptor;
pub mod fields;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use descriptor::MetricDescriptor;
pub use fields::{MatrixField, OneForm, ScalarField, Term, VectorField};

use crate::error::{Error, Result};
use crate::jets::{Jet, JetSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    /// Lorentz–Finsler `L` on a spacetime chart.
    Spacetime,
    /// Positive-definite Finsler `F` on a base chart; the energy is `F²`.
    Base,
}

/// A point `(x, y)` of the tangent bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl TangentPoint {
    pub fn new(x: impl Into<Vec<f64>>, y: impl Into<Vec<f64>>) -> Self {
        TangentPoint { x: x.into(), y: y.into() }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn with_y(&self, y: Vec<f64>) -> Self {
        TangentPoint { x: self.x.clone(), y }
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        self.with_y(self.y.iter().map(|v| v * lambda).collect())
    }
}

/// Coefficients of `L = -Λ τ² + 2 b τ + F²` at fixed `(x, y_spatial)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCoefficients {
    pub lapse: f64,
    pub drift: f64,
    pub spatial: f64,
}

/// Evaluation contract shared by the built-in families and external evaluators.
///
/// `energy` must be positively homogeneous of degree two in `y` and must
/// propagate jets faithfully: any derivative it cannot supply (a kink, a
/// chart boundary) is reported as an error, never as a NaN.
pub trait Metric: Send + Sync {
    fn dimension(&self) -> usize;

    fn kind(&self) -> MetricKind;

    /// `L(x, y)` for spacetimes, `F²(x, y)` for base metrics.
    fn energy(&self, x: &[Jet], y: &[Jet]) -> Result<Jet>;

    /// `∂L/∂y^i` along a jet-valued `y(x)`; only first fiber derivatives are taken.
    fn y_gradient(&self, x: &[Jet], y: &[Jet]) -> Result<Vec<Jet>> {
        generic_y_gradient(self, x, y)
    }

    /// Quadratic-in-`τ` decomposition, for families that split as `ℝ × M`.
    fn splitting(&self, _x: &[f64], _y_spatial: &[f64]) -> Option<Result<SplitCoefficients>> {
        None
    }

    /// Whether `L` is at least C¹ along the line bundle spanned by `∂_t`.
    fn c1_on_time_axis(&self) -> bool {
        true
    }

    /// Whether the energy is smooth (C⁴) in a neighborhood of `(x, y)`, `y ≠ 0`.
    fn smooth_at(&self, _x: &[f64], _y: &[f64]) -> bool {
        true
    }
}

/// First fiber derivatives by perturbing `y` with fresh zero-valued slots.
///
/// The jets in `x` and `y` must not depend on the fiber slots `d..2d`.
pub fn generic_y_gradient<M: Metric + ?Sized>(
    metric: &M,
    x: &[Jet],
    y: &[Jet],
) -> Result<Vec<Jet>> {
    let d = metric.dimension();
    let space = x[0].space().clone();
    let order = y.iter().chain(x).map(Jet::order).min().unwrap_or(0);
    let shifted: Vec<Jet> = (0..d)
        .map(|m| Jet::variable(&space, order, d + m, 0.0).map(|v| &y[m] + &v))
        .collect::<Result<_>>()?;
    let l = metric.energy(x, &shifted)?;
    Ok((0..d).map(|m| l.d(d + m)).collect())
}

/// Lift `(x, y)` into a `2d`-variable jet space of the given order.
pub fn lift_point(p: &TangentPoint, order: usize) -> Result<(Vec<Jet>, Vec<Jet>)> {
    let d = p.dim();
    if p.y.len() != d {
        return Err(Error::InvalidSpec(format!(
            "point has {} base and {} fiber coordinates",
            d,
            p.y.len()
        )));
    }
    let space = JetSpace::shared(2 * d, order);
    let x = (0..d)
        .map(|i| Jet::variable(&space, order, i, p.x[i]))
        .collect::<Result<_>>()?;
    let y = (0..d)
        .map(|i| Jet::variable(&space, order, d + i, p.y[i]))
        .collect::<Result<_>>()?;
    Ok((x, y))
}

/// Plain value of the energy at `(x, y)`.
pub fn eval_energy<M: Metric + ?Sized>(metric: &M, x: &[f64], y: &[f64]) -> Result<f64> {
    let d = metric.dimension();
    if x.len() != d || y.len() != d {
        return Err(Error::InvalidSpec(format!(
            "expected {d} coordinates, got x:{} y:{}",
            x.len(),
            y.len()
        )));
    }
    let space = JetSpace::shared(2 * d, 0);
    let xj: Vec<Jet> = x.iter().map(|&v| Jet::constant(&space, 0, v)).collect();
    let yj: Vec<Jet> = y.iter().map(|&v| Jet::constant(&space, 0, v)).collect();
    Ok(metric.energy(&xj, &yj)?.value())
}

/// Fiberwise positively homogeneous drift `b(x, y)` of a stationary splitting.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Drift {
    /// `b = ω_x(y)`.
    OneForm(OneForm),
    /// `b = c(x) · sqrt(k_x(y, y))` with `k` positive semi-definite.
    Norm { factor: ScalarField, metric: MatrixField },
}

impl Drift {
    fn eval(&self, x: &[Jet], y: &[Jet]) -> Result<Jet> {
        match self {
            Drift::OneForm(w) => Ok(w.apply(x, y)),
            Drift::Norm { factor, metric } => {
                if factor.is_zero() {
                    return Ok(Jet::constant(x[0].space(), y[0].order(), 0.0));
                }
                let k = metric.quadratic(x, y)?;
                Ok(factor.eval(x) * k.sqrt().map_err(non_smooth("drift norm"))?)
            }
        }
    }

    fn is_linear(&self) -> bool {
        match self {
            Drift::OneForm(_) => true,
            Drift::Norm { factor, .. } => factor.is_zero(),
        }
    }
}

fn non_smooth(what: &'static str) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Domain { op, value } => {
            Error::NonSmooth(format!("{what}: {op} at base value {value:e}"))
        }
        other => other,
    }
}

/// Declarative metric families.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum MetricSpec {
    /// `L = h_x(y, y)` with `h` of signature `(-, +, .., +)`.
    LorentzianQuadratic { h: MatrixField },
    /// `F = sqrt(a_x(y, y))`.
    RiemannianBase { a: MatrixField },
    /// `F = sqrt(a_x(y, y)) + β_x(y)`.
    RandersBase { a: MatrixField, beta: OneForm },
    /// `F = β + sqrt(β² + F₀²/Λ)` with `β = ω/Λ`.
    FOmega { lambda: ScalarField, omega: OneForm, base: Box<MetricSpec> },
    /// Same norm as [`MetricSpec::FOmega`] with `β` given directly: `G + β`
    /// where `G = sqrt(F₀²/Λ + β²)`.
    GPlusBeta { lambda: ScalarField, beta: OneForm, base: Box<MetricSpec> },
    /// `L = -Λ(x)τ² + 2 b(x, y) τ + F²(x, y)`.
    StationarySplitting { lambda: ScalarField, drift: Drift, base: Box<MetricSpec> },
    /// `L = -τ² + F²(x, y)`.
    StandardStaticProduct { base: Box<MetricSpec> },
    /// `L = -τ² + F_ω²(x, y)`.
    FOmegaStatic { lambda: ScalarField, omega: OneForm, base: Box<MetricSpec> },
    /// Finsler perturbation of Schwarzschild with parameter ε.
    RutzSchwarzschild { mass: f64, epsilon: f64 },
}

impl MetricSpec {
    pub fn minkowski(dim: usize) -> Self {
        MetricSpec::LorentzianQuadratic { h: MatrixField::Minkowski { dim } }
    }

    pub fn schwarzschild(mass: f64) -> Self {
        MetricSpec::LorentzianQuadratic { h: MatrixField::Schwarzschild { mass } }
    }

    pub fn euclidean(dim: usize) -> Self {
        MetricSpec::RiemannianBase { a: MatrixField::Euclidean { dim } }
    }

    pub fn round_sphere(radius: f64) -> Self {
        MetricSpec::RiemannianBase { a: MatrixField::RoundSphere { radius } }
    }

    pub fn randers(a: MatrixField, beta: OneForm) -> Self {
        MetricSpec::RandersBase { a, beta }
    }

    pub fn static_product(base: MetricSpec) -> Self {
        MetricSpec::StandardStaticProduct { base: Box::new(base) }
    }

    pub fn stationary(lambda: ScalarField, drift: Drift, base: MetricSpec) -> Self {
        MetricSpec::StationarySplitting { lambda, drift, base: Box::new(base) }
    }

    pub fn f_omega_static(lambda: ScalarField, omega: OneForm, base: MetricSpec) -> Self {
        MetricSpec::FOmegaStatic { lambda, omega, base: Box::new(base) }
    }

    pub fn rutz(mass: f64, epsilon: f64) -> Self {
        MetricSpec::RutzSchwarzschild { mass, epsilon }
    }

    pub fn family(&self) -> &'static str {
        match self {
            MetricSpec::LorentzianQuadratic { .. } => "lorentzian_quadratic",
            MetricSpec::RiemannianBase { .. } => "riemannian_base",
            MetricSpec::RandersBase { .. } => "randers_base",
            MetricSpec::FOmega { .. } => "f_omega",
            MetricSpec::GPlusBeta { .. } => "g_plus_beta",
            MetricSpec::StationarySplitting { .. } => "stationary_splitting",
            MetricSpec::StandardStaticProduct { .. } => "standard_static_product",
            MetricSpec::FOmegaStatic { .. } => "f_omega_static",
            MetricSpec::RutzSchwarzschild { .. } => "rutz_schwarzschild",
        }
    }

    /// Base metric of a splitting family (`F` in `-Λτ² + 2bτ + F²`).
    pub fn spatial_base(&self) -> Option<MetricSpec> {
        match self {
            MetricSpec::StationarySplitting { base, .. } | MetricSpec::StandardStaticProduct { base } => {
                Some((**base).clone())
            }
            MetricSpec::FOmegaStatic { lambda, omega, base } => Some(MetricSpec::FOmega {
                lambda: lambda.clone(),
                omega: omega.clone(),
                base: base.clone(),
            }),
            _ => None,
        }
    }

    /// Structural checks that do not depend on a point.
    pub fn validate(&self) -> Result<()> {
        let dim = self.dimension();
        if !(2..=4).contains(&dim) {
            return Err(Error::InvalidSpec(format!("dimension {dim} outside [2, 4]")));
        }
        let expect_base = |base: &MetricSpec, n: usize| -> Result<()> {
            if base.kind() != MetricKind::Base {
                return Err(Error::InvalidSpec(format!(
                    "{} is not a positive-definite base family",
                    base.family()
                )));
            }
            base.validate()?;
            if base.dimension() != n {
                return Err(Error::InvalidSpec(format!(
                    "base dimension {} does not match {n}",
                    base.dimension()
                )));
            }
            Ok(())
        };
        let forms_fit = |w: &OneForm, n: usize| -> Result<()> {
            if w.dim() != n {
                return Err(Error::InvalidSpec(format!(
                    "one-form has {} components, expected {n}",
                    w.dim()
                )));
            }
            Ok(())
        };
        match self {
            MetricSpec::LorentzianQuadratic { h } => h.validate(),
            MetricSpec::RiemannianBase { a } => a.validate(),
            MetricSpec::RandersBase { a, beta } => {
                a.validate()?;
                forms_fit(beta, a.dim())
            }
            MetricSpec::FOmega { omega: w, base, .. } | MetricSpec::GPlusBeta { beta: w, base, .. } => {
                expect_base(base, dim)?;
                forms_fit(w, dim)
            }
            MetricSpec::StationarySplitting { drift, base, .. } => {
                expect_base(base, dim - 1)?;
                match drift {
                    Drift::OneForm(w) => forms_fit(w, dim - 1),
                    Drift::Norm { metric, .. } => {
                        metric.validate()?;
                        if metric.dim() != dim - 1 {
                            return Err(Error::InvalidSpec("drift metric dimension mismatch".into()));
                        }
                        Ok(())
                    }
                }
            }
            MetricSpec::StandardStaticProduct { base } => expect_base(base, dim - 1),
            MetricSpec::FOmegaStatic { omega, base, .. } => {
                expect_base(base, dim - 1)?;
                forms_fit(omega, dim - 1)
            }
            MetricSpec::RutzSchwarzschild { mass, .. } => {
                if !(*mass > 0.0) {
                    return Err(Error::InvalidSpec(format!("mass must be positive, got {mass}")));
                }
                Ok(())
            }
        }
    }

    /// `F(x, y)` as a jet for base families.
    pub fn norm(&self, x: &[Jet], y: &[Jet]) -> Result<Jet> {
        let f = match self {
            MetricSpec::RiemannianBase { a } => a.quadratic(x, y)?.sqrt().map_err(non_smooth("norm"))?,
            MetricSpec::RandersBase { a, beta } => {
                let alpha = a.quadratic(x, y)?.sqrt().map_err(non_smooth("Randers α"))?;
                let f = alpha + beta.apply(x, y);
                if !(f.value() > 0.0) {
                    return Err(Error::NotPositive(f.value()));
                }
                f
            }
            MetricSpec::FOmega { lambda, omega, base } => {
                let lam = positive_lapse(lambda, x)?;
                let b = omega.apply(x, y).try_div(&lam)?;
                shifted_norm(&b, &lam, base, x, y)?
            }
            MetricSpec::GPlusBeta { lambda, beta, base } => {
                let lam = positive_lapse(lambda, x)?;
                let b = beta.apply(x, y);
                shifted_norm(&b, &lam, base, x, y)?
            }
            _ => {
                return Err(Error::Unsupported(format!(
                    "{} is a spacetime family; it has no base norm",
                    self.family()
                )))
            }
        };
        Ok(f)
    }

    /// `L(x, y)` at a point.
    pub fn eval_l(&self, p: &TangentPoint) -> Result<f64> {
        if self.kind() != MetricKind::Spacetime {
            return Err(Error::Unsupported(format!("{} has no spacetime function L", self.family())));
        }
        eval_energy(self, &p.x, &p.y)
    }

    /// `F(x, y)` at a point; `y` must be nonzero.
    pub fn eval_f(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let d = self.dimension();
        if x.len() != d || y.len() != d {
            return Err(Error::InvalidSpec(format!("expected {d} coordinates")));
        }
        if y.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidSpec("F is evaluated on the slit bundle; y = 0".into()));
        }
        let space = JetSpace::shared(2 * d, 0);
        let xj: Vec<Jet> = x.iter().map(|&v| Jet::constant(&space, 0, v)).collect();
        let yj: Vec<Jet> = y.iter().map(|&v| Jet::constant(&space, 0, v)).collect();
        Ok(self.norm(&xj, &yj)?.value())
    }

    fn split_parts(&self) -> Option<(ScalarField, Option<&Drift>, MetricSpec)> {
        match self {
            MetricSpec::StationarySplitting { lambda, drift, base } => {
                Some((lambda.clone(), Some(drift), (**base).clone()))
            }
            MetricSpec::StandardStaticProduct { base } => {
                Some((ScalarField::constant(1.0), None, (**base).clone()))
            }
            MetricSpec::FOmegaStatic { .. } => {
                Some((ScalarField::constant(1.0), None, self.spatial_base()?))
            }
            _ => None,
        }
    }
}

fn positive_lapse(lambda: &ScalarField, x: &[Jet]) -> Result<Jet> {
    let lam = lambda.eval(x);
    if !(lam.value() > 0.0) {
        return Err(Error::Chart(format!("Λ = {} is not positive", lam.value())));
    }
    Ok(lam)
}

/// `β + sqrt(β² + F₀²/Λ)`.
fn shifted_norm(b: &Jet, lam: &Jet, base: &MetricSpec, x: &[Jet], y: &[Jet]) -> Result<Jet> {
    let f2 = base.energy(x, y)?;
    let inner = b * b + f2.try_div(lam)?;
    Ok(b + inner.sqrt().map_err(non_smooth("F_ω"))?)
}

impl Metric for MetricSpec {
    fn dimension(&self) -> usize {
        match self {
            MetricSpec::LorentzianQuadratic { h } => h.dim(),
            MetricSpec::RiemannianBase { a } | MetricSpec::RandersBase { a, .. } => a.dim(),
            MetricSpec::FOmega { base, .. } | MetricSpec::GPlusBeta { base, .. } => base.dimension(),
            MetricSpec::StationarySplitting { base, .. }
            | MetricSpec::StandardStaticProduct { base }
            | MetricSpec::FOmegaStatic { base, .. } => base.dimension() + 1,
            MetricSpec::RutzSchwarzschild { .. } => 4,
        }
    }

    fn kind(&self) -> MetricKind {
        match self {
            MetricSpec::RiemannianBase { .. }
            | MetricSpec::RandersBase { .. }
            | MetricSpec::FOmega { .. }
            | MetricSpec::GPlusBeta { .. } => MetricKind::Base,
            _ => MetricKind::Spacetime,
        }
    }

    fn energy(&self, x: &[Jet], y: &[Jet]) -> Result<Jet> {
        match self {
            MetricSpec::LorentzianQuadratic { h } => h.quadratic(x, y),
            MetricSpec::RiemannianBase { a } => a.quadratic(x, y),
            MetricSpec::RandersBase { .. } | MetricSpec::FOmega { .. } | MetricSpec::GPlusBeta { .. } => {
                let f = self.norm(x, y)?;
                Ok(&f * &f)
            }
            MetricSpec::StationarySplitting { lambda, drift, base } => {
                let (xs, ys) = (&x[1..], &y[1..]);
                let lam = positive_lapse(lambda, xs)?;
                let tau = &y[0];
                let b = drift.eval(xs, ys)?;
                let f2 = base.energy(xs, ys)?;
                Ok(-(lam * (tau * tau)) + (b * tau) * 2.0 + f2)
            }
            MetricSpec::StandardStaticProduct { .. } | MetricSpec::FOmegaStatic { .. } => {
                let base = self.spatial_base().expect("splitting family has a base");
                let f2 = base.energy(&x[1..], &y[1..])?;
                Ok(f2 - &y[0] * &y[0])
            }
            MetricSpec::RutzSchwarzschild { mass, epsilon } => {
                if *epsilon == 0.0 {
                    return fields::schwarzschild_energy(*mass, x, y);
                }
                let eps = *epsilon;
                let extra = |f: &Jet| -> Result<Jet> {
                    let s = fields::sphere_part(x, y).sqrt().map_err(non_smooth("Rutz angular norm"))?;
                    Ok((f * &y[0]) * &s * eps)
                };
                fields::schwarzschild_energy_with(*mass, x, y, Some(&extra))
            }
        }
    }

    fn y_gradient(&self, x: &[Jet], y: &[Jet]) -> Result<Vec<Jet>> {
        let Some((lambda, drift, _)) = self.split_parts() else {
            return generic_y_gradient(self, x, y);
        };
        if !y[1..].iter().all(Jet::is_zero) {
            return generic_y_gradient(self, x, y);
        }
        // y(x) stays on the time axis: F² has zero gradient there and b is
        // differentiable only when linear.
        let xs = &x[1..];
        let tau = &y[0];
        let lam = positive_lapse(&lambda, xs)?;
        let mut grad = vec![-(lam * tau) * 2.0];
        match drift {
            Some(Drift::OneForm(w)) => {
                grad.extend(w.components(xs).into_iter().map(|c| (c * tau) * 2.0));
            }
            Some(d) if !d.is_linear() => {
                return Err(Error::NonSmooth(
                    "drift is not differentiable along the time axis".into(),
                ))
            }
            _ => {
                let zero = Jet::constant(x[0].space(), tau.order(), 0.0);
                grad.extend(std::iter::repeat(zero).take(xs.len()));
            }
        }
        Ok(grad)
    }

    fn splitting(&self, x: &[f64], ys: &[f64]) -> Option<Result<SplitCoefficients>> {
        let d = self.dimension();
        let space = JetSpace::shared(2 * d, 0);
        let cj = |v: &[f64]| -> Vec<Jet> { v.iter().map(|&c| Jet::constant(&space, 0, c)).collect() };
        match self {
            MetricSpec::LorentzianQuadratic { h } => {
                let m = match h.matrix_f64(x) {
                    Ok(m) => m,
                    Err(e) => return Some(Err(e)),
                };
                if !(m[0][0] < 0.0) {
                    return None;
                }
                let drift = (1..d).map(|a| m[0][a] * ys[a - 1]).sum();
                let mut spatial = 0.0;
                for a in 1..d {
                    for b in 1..d {
                        spatial += m[a][b] * ys[a - 1] * ys[b - 1];
                    }
                }
                Some(Ok(SplitCoefficients { lapse: -m[0][0], drift, spatial }))
            }
            MetricSpec::RutzSchwarzschild { mass, epsilon } => {
                let (r, th) = (x[1], x[2]);
                if let Err(e) = fields::schwarzschild_chart(*mass, x) {
                    return Some(Err(e));
                }
                let f = 1.0 - 2.0 * mass / r;
                let k = ys[1] * ys[1] + th.sin().powi(2) * ys[2] * ys[2];
                Some(Ok(SplitCoefficients {
                    lapse: f,
                    drift: 0.5 * epsilon * f * k.sqrt(),
                    spatial: ys[0] * ys[0] / f + r * r * k,
                }))
            }
            _ => {
                let (lambda, drift, base) = self.split_parts()?;
                let (xs, yj) = (cj(&x[1..]), cj(ys));
                let run = || -> Result<SplitCoefficients> {
                    let lam = positive_lapse(&lambda, &xs)?.value();
                    let b = match drift {
                        Some(dr) => dr.eval(&xs, &yj)?.value(),
                        None => 0.0,
                    };
                    let f2 = base.energy(&xs, &yj)?.value();
                    Ok(SplitCoefficients { lapse: lam, drift: b, spatial: f2 })
                };
                Some(run())
            }
        }
    }

    fn c1_on_time_axis(&self) -> bool {
        match self {
            MetricSpec::StationarySplitting { drift, .. } => drift.is_linear(),
            MetricSpec::RutzSchwarzschild { epsilon, .. } => *epsilon == 0.0,
            _ => true,
        }
    }

    fn smooth_at(&self, x: &[f64], y: &[f64]) -> bool {
        let spatial_zero = y.len() > 1 && y[1..].iter().all(|&v| v == 0.0);
        let quadratic_base = |b: &MetricSpec| matches!(b, MetricSpec::RiemannianBase { .. });
        match self {
            MetricSpec::StationarySplitting { drift, base, .. } => {
                if spatial_zero {
                    return quadratic_base(base) && drift.is_linear();
                }
                match drift {
                    Drift::Norm { factor, metric } if !factor.is_zero() => {
                        let d = metric.dim();
                        let space = JetSpace::shared(2 * (d + 1), 0);
                        let cj = |v: &[f64]| -> Vec<Jet> {
                            v.iter().map(|&c| Jet::constant(&space, 0, c)).collect()
                        };
                        metric
                            .quadratic(&cj(&x[1..]), &cj(&y[1..]))
                            .map(|k| k.value() > 0.0)
                            .unwrap_or(false)
                    }
                    _ => true,
                }
            }
            MetricSpec::StandardStaticProduct { base } => !spatial_zero || quadratic_base(base),
            MetricSpec::FOmegaStatic { .. } => !spatial_zero,
            MetricSpec::RutzSchwarzschild { epsilon, .. } => {
                *epsilon == 0.0 || y[2] != 0.0 || y[3] != 0.0
            }
            _ => true,
        }
    }
}

impl<M: Metric + ?Sized> Metric for Arc<M> {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn kind(&self) -> MetricKind {
        (**self).kind()
    }
    fn energy(&self, x: &[Jet], y: &[Jet]) -> Result<Jet> {
        (**self).energy(x, y)
    }
    fn y_gradient(&self, x: &[Jet], y: &[Jet]) -> Result<Vec<Jet>> {
        (**self).y_gradient(x, y)
    }
    fn splitting(&self, x: &[f64], ys: &[f64]) -> Option<Result<SplitCoefficients>> {
        (**self).splitting(x, ys)
    }
    fn c1_on_time_axis(&self) -> bool {
        (**self).c1_on_time_axis()
    }
    fn smooth_at(&self, x: &[f64], y: &[f64]) -> bool {
        (**self).smooth_at(x, y)
    }
}

/// Build the base norm `F_ω = ω/Λ + sqrt(ω²/Λ² + F²/Λ)`.
pub fn build_f_omega(lambda: ScalarField, omega: OneForm, base: MetricSpec) -> Result<MetricSpec> {
    let spec = MetricSpec::FOmega { lambda, omega, base: Box::new(base) };
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn minkowski_unit_time_vector() {
        let m = MetricSpec::minkowski(4);
        let p = TangentPoint::new(vec![0.0; 4], vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(m.eval_l(&p).unwrap(), -1.0);
    }

    #[test]
    fn rutz_unperturbed_value() {
        let m = MetricSpec::rutz(1.0, 0.0);
        let p = TangentPoint::new(vec![0.0, 4.0, FRAC_PI_2, 0.0], vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(m.eval_l(&p).unwrap(), -0.5);
        let bad = TangentPoint::new(vec![0.0, 2.0, FRAC_PI_2, 0.0], vec![1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(m.eval_l(&bad), Err(Error::Chart(_))));
    }

    #[test]
    fn euclidean_and_randers_norms() {
        let e = MetricSpec::euclidean(2);
        assert_eq!(e.eval_f(&[0.3, -1.0], &[3.0, 4.0]).unwrap(), 5.0);
        let r = MetricSpec::randers(MatrixField::Euclidean { dim: 2 }, OneForm::constant(&[0.5, 0.0]));
        assert_eq!(r.eval_f(&[0.0, 0.0], &[1.0, 0.0]).unwrap(), 1.5);
        let strong = MetricSpec::randers(MatrixField::Euclidean { dim: 2 }, OneForm::constant(&[1.5, 0.0]));
        assert!(matches!(strong.eval_f(&[0.0, 0.0], &[-1.0, 0.0]), Err(Error::NotPositive(_))));
    }

    #[test]
    fn f_omega_collapses_and_scales() {
        let e = MetricSpec::euclidean(2);
        let plain = build_f_omega(ScalarField::constant(1.0), OneForm::zero(2), e.clone()).unwrap();
        assert_eq!(plain.eval_f(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        let scaled = build_f_omega(ScalarField::constant(4.0), OneForm::zero(2), e.clone()).unwrap();
        assert_eq!(scaled.eval_f(&[0.0, 0.0], &[1.0, 0.0]).unwrap(), 0.5);
        let shifted = build_f_omega(ScalarField::constant(1.0), OneForm::constant(&[0.3, 0.0]), e).unwrap();
        let v = shifted.eval_f(&[0.0, 0.0], &[1.0, 0.0]).unwrap();
        assert!((v - 1.344_030_650_891_055).abs() < 1e-12);
    }

    #[test]
    fn stationary_splitting_reduces_to_minkowski() {
        let m = MetricSpec::stationary(
            ScalarField::constant(1.0),
            Drift::OneForm(OneForm::zero(2)),
            MetricSpec::euclidean(2),
        );
        let p = TangentPoint::new(vec![0.0; 3], vec![2.0, 1.0, 1.0]);
        assert_eq!(m.eval_l(&p).unwrap(), -2.0);
        assert_eq!(m.eval_l(&p.scaled(3.0)).unwrap(), -18.0);
    }

    #[test]
    fn kind_mismatch_is_rejected() {
        let e = MetricSpec::euclidean(2);
        assert!(e.eval_l(&TangentPoint::new(vec![0.0; 2], vec![1.0, 0.0])).is_err());
        let m = MetricSpec::minkowski(3);
        assert!(m.eval_f(&[0.0; 3], &[1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn static_product_base_must_be_positive_definite() {
        let bad = MetricSpec::static_product(MetricSpec::minkowski(2));
        assert!(bad.validate().is_err());
        let ok = MetricSpec::static_product(MetricSpec::round_sphere(1.0));
        ok.validate().unwrap();
        assert_eq!(ok.dimension(), 3);
    }
}
