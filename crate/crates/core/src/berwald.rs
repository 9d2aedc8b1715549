//! Berwald detection and the constructions built on Berwald base metrics.
//!
//! A metric is Berwald when its spray is quadratic in `y`, i.e. all third
//! fiber derivatives of `G^i` vanish and the Chern symbols do not depend on
//! `y`. Both are sampled over random unit directions.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Matrix, Pipeline};
use crate::jets::{Jet, JetSpace};
use crate::metrics::{Metric, MetricKind, MetricSpec, OneForm, ScalarField, TangentPoint};
use crate::sampling;

/// Threshold on the homogenized third derivatives and on the symbol spread.
pub const BERWALD_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct BerwaldReport {
    pub berwald: bool,
    /// `max |y| |∂³G^i/∂y^j∂y^k∂y^l|` over sampled unit directions.
    pub max_third_deriv: f64,
    /// Largest range of any `Γ^i_{jk}` across the sampled directions.
    pub gamma_spread: f64,
    pub samples: usize,
    /// Directions discarded as inadmissible (non-smooth, degenerate, off-chart).
    pub rejected: usize,
}

/// Random admissible direction at `x`: unit in the chart norm, with `τ ≥ 0`
/// for spacetimes.
pub fn sample_direction(metric: &dyn Metric, rng: &mut impl Rng) -> Vec<f64> {
    let mut y = sampling::unit_vector(rng, metric.dimension());
    if metric.kind() == MetricKind::Spacetime {
        y[0] = y[0].abs();
    }
    y
}

pub fn is_berwald(
    metric: &dyn Metric,
    x: &[f64],
    samples: usize,
    rng: &mut impl Rng,
) -> Result<BerwaldReport> {
    let d = metric.dimension();
    let mut max_third = 0.0_f64;
    let mut lo = vec![f64::INFINITY; d * d * d];
    let mut hi = vec![f64::NEG_INFINITY; d * d * d];
    let mut used = 0;
    let mut rejected = 0;
    while used < samples {
        if rejected > 20 * samples.max(1) {
            return Err(Error::NonSmooth(format!(
                "no admissible directions found at {x:?} after {rejected} attempts"
            )));
        }
        let y = sample_direction(metric, rng);
        let p = TangentPoint::new(x.to_vec(), y);
        let pipe = match Pipeline::new(metric, &p, 5) {
            Ok(pipe) => pipe,
            Err(e) if e.is_inadmissible() => {
                rejected += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        used += 1;
        for i in 0..d {
            for j in 0..d {
                let nij = &pipe.n[i * d + j];
                for k in 0..d {
                    let nk = nij.d(d + k);
                    for l in k..d {
                        max_third = max_third.max(nk.d(d + l).value().abs());
                    }
                }
            }
        }
        for (idx, g) in pipe.gamma.iter().enumerate() {
            lo[idx] = lo[idx].min(g.value());
            hi[idx] = hi[idx].max(g.value());
        }
    }
    let gamma_spread = lo.iter().zip(&hi).fold(0.0_f64, |m, (a, b)| m.max(b - a));
    Ok(BerwaldReport {
        berwald: max_third <= BERWALD_TOLERANCE && gamma_spread <= BERWALD_TOLERANCE,
        max_third_deriv: max_third,
        gamma_spread,
        samples: used,
        rejected,
    })
}

/// Berwald check with a private, fixed random stream.
pub fn is_berwald_seeded(metric: &dyn Metric, x: &[f64], samples: usize, seed: u64) -> Result<BerwaldReport> {
    is_berwald(metric, x, samples, &mut sampling::rng(seed, 0))
}

#[derive(Debug, Clone, Serialize)]
pub struct ParallelReport {
    /// `max |(Dβ)_ij|`.
    pub residual: f64,
    /// `(Dβ)_ij = ∂β_i/∂x^j - Γ^k_{ji} β_k`.
    pub d_beta: Matrix,
}

/// Covariant derivative of `β` under the (y-independent) connection of a
/// Berwald base metric.
pub fn parallel_one_form_residual(
    base: &dyn Metric,
    beta: &OneForm,
    x: &[f64],
    y: &[f64],
) -> Result<ParallelReport> {
    let d = base.dimension();
    if beta.dim() != d {
        return Err(Error::InvalidSpec(format!("one-form has {} components, expected {d}", beta.dim())));
    }
    let check = is_berwald_seeded(base, x, 12, 0x5eed)?;
    if !check.berwald {
        return Err(Error::NotBerwald { x: x.to_vec(), third: check.max_third_deriv.max(check.gamma_spread) });
    }
    let pipe = Pipeline::new(base, &TangentPoint::new(x.to_vec(), y.to_vec()), 3)?;
    let space = JetSpace::shared(d, 1);
    let xj: Vec<Jet> = (0..d)
        .map(|i| Jet::variable(&space, 1, i, x[i]))
        .collect::<Result<_>>()?;
    let b = beta.components(&xj);
    let mut d_beta = vec![vec![0.0; d]; d];
    let mut residual = 0.0_f64;
    for i in 0..d {
        for j in 0..d {
            let mut v = b[i].d(j).value();
            for k in 0..d {
                v -= pipe.gamma[(k * d + j) * d + i].value() * b[k].value();
            }
            d_beta[i][j] = v;
            residual = residual.max(v.abs());
        }
    }
    Ok(ParallelReport { residual, d_beta })
}

/// The metric `G + β` together with any hypothesis violations seen on the
/// check points.
#[derive(Debug, Clone)]
pub struct GPlusBeta {
    pub spec: MetricSpec,
    /// `F/√Λ`, whose spray `G + β` should share.
    pub reference: MetricSpec,
    pub warnings: Vec<String>,
}

/// Parallel-form tolerance in the hypothesis check.
pub const PARALLEL_TOLERANCE: f64 = 1e-8;

pub fn build_g_plus_beta(
    base: MetricSpec,
    lambda: ScalarField,
    beta: OneForm,
    check_points: &[Vec<f64>],
) -> Result<GPlusBeta> {
    let spec = MetricSpec::GPlusBeta { lambda: lambda.clone(), beta: beta.clone(), base: Box::new(base.clone()) };
    spec.validate()?;
    let d = spec.dimension();
    let reference = MetricSpec::GPlusBeta { lambda, beta: OneForm::zero(d), base: Box::new(base) };
    let mut warnings = Vec::new();
    for (n, x) in check_points.iter().enumerate() {
        let y = sample_direction(&reference, &mut sampling::rng(0xbe7a, n as u64));
        match parallel_one_form_residual(&reference, &beta, x, &y) {
            Ok(r) if r.residual > PARALLEL_TOLERANCE => {
                warnings.push(format!("Dβ = {:.3e} at {x:?}: β is not parallel", r.residual))
            }
            Ok(_) => {}
            Err(Error::NotBerwald { third, .. }) => {
                warnings.push(format!("F/√Λ is not Berwald at {x:?} ({third:.3e})"))
            }
            Err(e) => warnings.push(format!("hypothesis check failed at {x:?}: {e}")),
        }
    }
    Ok(GPlusBeta { spec, reference, warnings })
}

#[derive(Debug, Clone, Serialize)]
pub struct StructureReport {
    pub points: usize,
    /// `max |G̃⁰|`.
    pub time_spray: f64,
    /// `max |G̃^α - G^α|`.
    pub spray_gap: f64,
    /// `max |Γ̃⁰_{jk}|`.
    pub time_symbols: f64,
    /// `max |Γ̃^α_{0k}|`.
    pub mixed_symbols: f64,
    /// `max |P̃|`, reported when the base is Berwald.
    pub landsberg: Option<f64>,
    /// `max |R̃ - R|`.
    pub ricci_gap: f64,
    pub passed: bool,
}

/// Product-structure identities of a standard static spacetime at the
/// given points `((t, x), (τ, y))`.
pub fn static_product_structure_check(spec: &MetricSpec, points: &[TangentPoint]) -> Result<StructureReport> {
    let MetricSpec::StandardStaticProduct { base } = spec else {
        return Err(Error::Unsupported("structure check needs a standard static product".into()));
    };
    let d = spec.dimension();
    let n = d - 1;
    let mut rep = StructureReport {
        points: points.len(),
        time_spray: 0.0,
        spray_gap: 0.0,
        time_symbols: 0.0,
        mixed_symbols: 0.0,
        landsberg: None,
        ricci_gap: 0.0,
        passed: false,
    };
    let mut landsberg = 0.0_f64;
    let mut all_berwald = true;
    for (idx, p) in points.iter().enumerate() {
        let full = crate::geometry::curvature(spec, p)?;
        let bp = TangentPoint::new(p.x[1..].to_vec(), p.y[1..].to_vec());
        let part = crate::geometry::curvature(base.as_ref(), &bp)?;
        rep.time_spray = rep.time_spray.max(full.spray[0].abs());
        for a in 0..n {
            rep.spray_gap = rep.spray_gap.max((full.spray[a + 1] - part.spray[a]).abs());
        }
        for j in 0..d {
            for k in 0..d {
                rep.time_symbols = rep.time_symbols.max(full.gamma[0][j][k].abs());
            }
        }
        for a in 1..d {
            for k in 0..d {
                rep.mixed_symbols = rep.mixed_symbols.max(full.gamma[a][0][k].abs());
            }
        }
        rep.ricci_gap = rep.ricci_gap.max((full.ricci_scalar - part.ricci_scalar).abs());
        if all_berwald {
            all_berwald = is_berwald_seeded(base.as_ref(), &bp.x, 8, idx as u64)?.berwald;
        }
        landsberg = landsberg.max(full.landsberg.iter().flatten().flatten().fold(0.0_f64, |m, v| m.max(v.abs())));
    }
    if all_berwald {
        rep.landsberg = Some(landsberg);
    }
    rep.passed = rep.time_spray <= 1e-8
        && rep.spray_gap <= 1e-8
        && rep.time_symbols <= 1e-8
        && rep.mixed_symbols <= 1e-8
        && rep.ricci_gap <= 1e-8
        && rep.landsberg.is_none_or(|p| p <= 1e-9);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::MatrixField;

    fn flat_randers(beta: OneForm) -> MetricSpec {
        MetricSpec::randers(MatrixField::Euclidean { dim: 2 }, beta)
    }

    #[test]
    fn minkowski_and_constant_randers_are_berwald() {
        let mut r = sampling::rng(3, 0);
        let m = is_berwald(&MetricSpec::minkowski(3), &[0.1, 0.2, 0.3], 10, &mut r).unwrap();
        assert!(m.berwald && m.max_third_deriv == 0.0 && m.gamma_spread == 0.0);
        let f = is_berwald(&flat_randers(OneForm::constant(&[0.3, 0.1])), &[0.5, 0.5], 10, &mut r).unwrap();
        assert!(f.berwald);
    }

    #[test]
    fn sheared_randers_is_not_berwald() {
        let beta = OneForm(vec![ScalarField::monomial(0.2, &[0, 1]), ScalarField::zero()]);
        let rep = is_berwald_seeded(&flat_randers(beta), &[0.3, 0.7], 20, 1).unwrap();
        assert!(!rep.berwald);
        assert!(rep.max_third_deriv > 1e-4);
    }

    #[test]
    fn flat_parallel_forms() {
        let e = MetricSpec::euclidean(2);
        let r = parallel_one_form_residual(&e, &OneForm::constant(&[0.3, 0.0]), &[0.2, 0.1], &[1.0, 0.0]).unwrap();
        assert_eq!(r.residual, 0.0);
        let sheared = OneForm(vec![ScalarField::coordinate(1), ScalarField::zero()]);
        let r = parallel_one_form_residual(&e, &sheared, &[0.2, 0.1], &[1.0, 0.0]).unwrap();
        assert_eq!(r.d_beta[0][1], 1.0);
        assert_eq!(r.residual, 1.0);
    }

    #[test]
    fn non_berwald_base_refused() {
        let beta = OneForm(vec![ScalarField::monomial(0.2, &[0, 1]), ScalarField::zero()]);
        let r = parallel_one_form_residual(&flat_randers(beta), &OneForm::zero(2), &[0.3, 0.7], &[1.0, 0.0]);
        assert!(matches!(r, Err(Error::NotBerwald { .. })));
    }

    #[test]
    fn g_plus_beta_collapses() {
        let built = build_g_plus_beta(
            MetricSpec::euclidean(2),
            ScalarField::constant(1.0),
            OneForm::zero(2),
            &[vec![0.0, 0.0]],
        )
        .unwrap();
        assert!(built.warnings.is_empty());
        let v = built.spec.eval_f(&[0.0, 0.0], &[3.0, 4.0]).unwrap();
        assert!((v - 5.0).abs() < 1e-15);
        let bad = build_g_plus_beta(
            MetricSpec::euclidean(2),
            ScalarField::constant(1.0),
            OneForm(vec![ScalarField::coordinate(1), ScalarField::zero()]),
            &[vec![0.0, 0.0]],
        )
        .unwrap();
        assert_eq!(bad.warnings.len(), 1);
    }

    #[test]
    fn euclidean_static_product_structure() {
        let spec = MetricSpec::static_product(MetricSpec::euclidean(2));
        let pts = [TangentPoint::new(vec![0.0, 1.0, 2.0], vec![2.0, 0.5, 0.3])];
        let rep = static_product_structure_check(&spec, &pts).unwrap();
        assert!(rep.passed);
        assert_eq!(rep.landsberg, Some(0.0));
    }
}
