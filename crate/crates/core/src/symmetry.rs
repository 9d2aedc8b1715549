//! Killing fields and staticity.
//!
//! A vector field `K` is Killing when its complete lift annihilates `L`:
//! `K^c(L) = K^h ∂L/∂x^h + (∂K^h/∂x^i) y^i ∂L/∂y^h = 0`. A timelike Killing
//! field is static when `ker θ`, `θ = ∂L/∂y(x, K(x))`, is integrable, which
//! by Frobenius is `θ ∧ dθ = 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Matrix;
use crate::jets::{Jet, JetSpace};
use crate::metrics::{lift_point, Metric, TangentPoint, VectorField};

fn check_field(metric: &dyn Metric, k: &VectorField) -> Result<()> {
    if k.dim() != metric.dimension() {
        return Err(Error::InvalidSpec(format!(
            "vector field has {} components, metric dimension is {}",
            k.dim(),
            metric.dimension()
        )));
    }
    Ok(())
}

/// Values `K^h(x)` and the Jacobian `∂K^h/∂x^i` at `h*d + i`.
fn field_jacobian(k: &VectorField, x: &[Jet]) -> (Vec<f64>, Vec<f64>) {
    let d = k.dim();
    let comps = k.eval(x);
    let jac = (0..d * d).map(|hi| comps[hi / d].d(hi % d).value()).collect();
    (comps.iter().map(Jet::value).collect(), jac)
}

/// `K^c(L)` at `(x, y)`.
pub fn killing_residual(metric: &dyn Metric, k: &VectorField, p: &TangentPoint) -> Result<f64> {
    check_field(metric, k)?;
    let d = metric.dimension();
    let (x, y) = lift_point(p, 1)?;
    let l = metric.energy(&x, &y)?;
    let (kv, jac) = field_jacobian(k, &x);
    let mut r = 0.0;
    for h in 0..d {
        r += kv[h] * l.d(h).value();
        let lift: f64 = (0..d).map(|i| jac[h * d + i] * p.y[i]).sum();
        r += lift * l.d(d + h).value();
    }
    Ok(r)
}

/// `K^c(g_lj) + ∂_l K^h g_hj + ∂_j K^h g_lh`, the Lie derivative of the
/// fundamental tensor.
pub fn lie_derivative_g_residual(
    metric: &dyn Metric,
    k: &VectorField,
    p: &TangentPoint,
) -> Result<Matrix> {
    check_field(metric, k)?;
    let d = metric.dimension();
    let (x, y) = lift_point(p, 3)?;
    let l = metric.energy(&x, &y)?;
    let g: Vec<Jet> = (0..d * d).map(|lj| l.d(d + lj / d).d(d + lj % d) * 0.5).collect();
    let (kv, jac) = field_jacobian(k, &x);
    let lift: Vec<f64> = (0..d).map(|h| (0..d).map(|i| jac[h * d + i] * p.y[i]).sum()).collect();
    let mut out = vec![vec![0.0; d]; d];
    for l_ in 0..d {
        for j in 0..d {
            let glj = &g[l_ * d + j];
            let mut v = 0.0;
            for h in 0..d {
                v += kv[h] * glj.d(h).value() + lift[h] * glj.d(d + h).value();
                v += jac[h * d + l_] * g[h * d + j].value() + jac[h * d + j] * g[l_ * d + h].value();
            }
            out[l_][j] = v;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrobeniusReport {
    /// `L(x, K(x))`.
    pub l_value: f64,
    pub theta: Vec<f64>,
    /// `dθ_jk = ∂_j θ_k - ∂_k θ_j`.
    pub dtheta: Matrix,
    /// `max |θ_i dθ_jk + θ_j dθ_ki + θ_k dθ_ij|` over `i < j < k`.
    pub residual: f64,
}

/// Frobenius test of `ker ∂L/∂y(x, K(x))` at `x`.
///
/// Only first fiber derivatives are taken at `K(x)`, so families that are
/// merely C¹ along `K` are accepted.
pub fn static_frobenius_residual(
    metric: &dyn Metric,
    k: &VectorField,
    x: &[f64],
) -> Result<FrobeniusReport> {
    check_field(metric, k)?;
    let d = metric.dimension();
    if x.len() != d {
        return Err(Error::InvalidSpec(format!("expected {d} coordinates")));
    }
    let space = JetSpace::shared(2 * d, 2);
    let xj: Vec<Jet> = (0..d)
        .map(|i| Jet::variable(&space, 2, i, x[i]))
        .collect::<Result<_>>()?;
    let kj = k.eval(&xj);
    let theta = metric.y_gradient(&xj, &kj)?;
    // Euler: θ(K) = 2L, which avoids evaluating a base norm at zero
    let l_value = 0.5 * theta.iter().zip(&kj).map(|(t, k)| t.value() * k.value()).sum::<f64>();
    if !(l_value < 0.0) {
        return Err(Error::NotTimelike(l_value));
    }
    let dtheta: Matrix = (0..d)
        .map(|j| (0..d).map(|kk| theta[kk].d(j).value() - theta[j].d(kk).value()).collect())
        .collect();
    let th: Vec<f64> = theta.iter().map(Jet::value).collect();
    let mut residual = 0.0_f64;
    for i in 0..d {
        for j in (i + 1)..d {
            for kk in (j + 1)..d {
                let w = th[i] * dtheta[j][kk] + th[j] * dtheta[kk][i] + th[kk] * dtheta[i][j];
                residual = residual.max(w.abs());
            }
        }
    }
    Ok(FrobeniusReport { l_value, theta: th, dtheta, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{Drift, MatrixField, MetricSpec, OneForm, ScalarField};

    #[test]
    fn time_translation_on_static_product_over_randers() {
        let base = MetricSpec::randers(MatrixField::Euclidean { dim: 2 }, OneForm::constant(&[0.3, 0.1]));
        let f = static_frobenius_residual(&MetricSpec::static_product(base), &VectorField::coordinate(3, 0), &[0.0, 0.5, 0.2])
            .unwrap();
        assert_eq!(f.l_value, -1.0);
        assert_eq!(f.residual, 0.0);
    }

    #[test]
    fn time_translation_on_static_product() {
        let m = MetricSpec::static_product(MetricSpec::round_sphere(1.0));
        let k = VectorField::coordinate(3, 0);
        let p = TangentPoint::new(vec![0.4, 1.0, 0.3], vec![2.0, 0.3, -0.7]);
        assert_eq!(killing_residual(&m, &k, &p).unwrap(), 0.0);
        let lie = lie_derivative_g_residual(&m, &k, &p).unwrap();
        assert!(lie.iter().flatten().all(|v| *v == 0.0));
        let f = static_frobenius_residual(&m, &k, &[0.4, 1.0, 0.3]).unwrap();
        assert_eq!(f.theta, vec![-2.0, 0.0, 0.0]);
        assert_eq!(f.residual, 0.0);
    }

    #[test]
    fn euclidean_rotation_and_dilation() {
        let m = MetricSpec::euclidean(2);
        let p = TangentPoint::new(vec![0.3, -1.2], vec![0.8, 0.5]);
        let rot = VectorField::rotation(2, 0, 1);
        assert!(killing_residual(&m, &rot, &p).unwrap().abs() < 1e-15);
        let lie = lie_derivative_g_residual(&m, &rot, &p).unwrap();
        assert!(lie.iter().flatten().all(|v| v.abs() < 1e-15));

        let axis = VectorField::axis_dilation(2, 0);
        assert!((killing_residual(&m, &axis, &p).unwrap() - 2.0 * 0.8 * 0.8).abs() < 1e-15);
        let dil = lie_derivative_g_residual(&m, &VectorField::dilation(2), &p).unwrap();
        assert_eq!(dil, vec![vec![2.0, 0.0], vec![0.0, 2.0]]);
    }

    #[test]
    fn rotating_drift_is_not_static() {
        let w = OneForm(vec![ScalarField::coordinate(1), ScalarField::zero()]);
        let m = MetricSpec::stationary(ScalarField::constant(1.0), Drift::OneForm(w), MetricSpec::euclidean(2));
        let f = static_frobenius_residual(&m, &VectorField::coordinate(3, 0), &[0.0, 0.5, 0.7]).unwrap();
        assert_eq!(f.theta, vec![-2.0, 1.4, 0.0]);
        assert_eq!(f.dtheta[2][1], 2.0);
        assert_eq!(f.residual, 4.0);
    }

    #[test]
    fn spacelike_field_rejected() {
        let m = MetricSpec::minkowski(3);
        let r = static_frobenius_residual(&m, &VectorField::coordinate(3, 1), &[0.0; 3]);
        assert!(matches!(r, Err(Error::NotTimelike(_))));
    }
}
