mod common;

use std::f64::consts::FRAC_PI_2;

use finsler::geodesics::{conservation_check, integrate, ExitKind, GeodesicState, Trajectory};
use finsler::metrics::{eval_energy, MatrixField, MetricSpec, OneForm, ScalarField};

fn state(x: &[f64], y: &[f64]) -> GeodesicState {
    GeodesicState { s: 0.0, x: x.to_vec(), y: y.to_vec() }
}

#[test]
fn circular_orbit_follows_kepler_frequency() {
    let m = MetricSpec::schwarzschild(1.0);
    let omega = 6.0_f64.powf(-1.5);
    let t = integrate(&m, &state(&[0.0, 6.0, FRAC_PI_2, 0.0], &[1.0, 0.0, 0.0, omega]), 20.0, 1e-2).unwrap();
    assert!(t.exit.is_none());
    for p in &t.samples {
        assert!((p.x[1] - 6.0).abs() < 1e-9);
        assert!((p.x[3] - omega * p.s).abs() < 1e-9);
        assert!((p.x[0] - p.s).abs() < 1e-9);
    }
}

fn eccentric() -> GeodesicState {
    state(&[0.0, 8.0, FRAC_PI_2, 0.0], &[1.0, 0.05, 0.0, 0.04])
}

#[test]
fn rk4_order_under_step_halving() {
    let m = MetricSpec::schwarzschild(1.0);
    let e: Vec<f64> = [0.8, 0.4, 0.2]
        .iter()
        .map(|&h| conservation_check(&integrate(&m, &eccentric(), 40.0, h).unwrap()))
        .collect();
    for w in e.windows(2) {
        let ratio = w[0] / w[1];
        assert!((12.0..=20.0).contains(&ratio), "{e:?}");
    }
}

/// Largest distance from a sample of `a` to the polyline through `b`.
fn one_sided_hausdorff(a: &Trajectory, b: &Trajectory) -> f64 {
    let seg = |p: &[f64], u: &[f64], v: &[f64]| -> f64 {
        let d: Vec<f64> = u.iter().zip(v).map(|(s, t)| t - s).collect();
        let dd: f64 = d.iter().map(|c| c * c).sum();
        let t = if dd == 0.0 {
            0.0
        } else {
            (p.iter().zip(u).zip(&d).map(|((pi, ui), di)| (pi - ui) * di).sum::<f64>() / dd).clamp(0.0, 1.0)
        };
        p.iter().zip(u).zip(&d).map(|((pi, ui), di)| (pi - ui - t * di).powi(2)).sum::<f64>().sqrt()
    };
    a.samples
        .iter()
        .map(|p| b.samples.windows(2).map(|w| seg(&p.x, &w[0].x, &w[1].x)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

#[test]
fn affine_reparametrization_traces_the_same_curve() {
    let base = common::rotating_randers();
    let spec = MetricSpec::static_product(base);
    let init = state(&[0.0, 0.1, -0.2, 0.3], &[2.0, 0.6, 0.3, -0.5]);
    let lambda = 2.0;
    let fast = GeodesicState { y: init.y.iter().map(|v| v * lambda).collect(), ..init.clone() };
    let a = integrate(&spec, &init, 1.0, 1e-3).unwrap();
    let b = integrate(&spec, &fast, 1.0 / lambda, 1e-3).unwrap();
    let h = one_sided_hausdorff(&a, &b).max(one_sided_hausdorff(&b, &a));
    assert!(h <= 1e-6, "{h}");
    // and ṫ stays constant on a static product
    assert!(a.samples.iter().all(|p| (p.y[0] - 2.0).abs() < 1e-10));
}

#[test]
fn null_geodesic_on_f_omega_static_stays_null() {
    let spec = MetricSpec::f_omega_static(
        ScalarField::polynomial(&[(1.0, &[]), (0.1, &[0, 2])]),
        OneForm(vec![ScalarField::monomial(0.3, &[0, 1]), 0.0.into(), 0.1.into()]),
        MetricSpec::euclidean(3),
    );
    let x = [0.0, 0.2, -0.1, 0.3];
    let ys = [0.6, 0.8, 0.1];
    // L = -τ² + F_ω², so τ = F_ω(ys) is null
    let MetricSpec::FOmegaStatic { lambda, omega, base } = &spec else { unreachable!() };
    let f = MetricSpec::FOmega { lambda: lambda.clone(), omega: omega.clone(), base: base.clone() }
        .eval_f(&x[1..], &ys)
        .unwrap();
    let y = [f, ys[0], ys[1], ys[2]];
    assert!(eval_energy(&spec, &x, &y).unwrap().abs() < 1e-15);
    let t = integrate(&spec, &state(&x, &y), 2.0, 1e-3).unwrap();
    assert!(t.exit.is_none());
    assert!(t.samples.iter().all(|p| p.l.abs() <= 1e-8));
}

#[test]
fn flat_randers_geodesics_are_straight() {
    let spec = MetricSpec::randers(MatrixField::Euclidean { dim: 2 }, OneForm::constant(&[0.1, 0.3]));
    let t = integrate(&spec, &state(&[0.0, 0.0], &[1.0, 0.5]), 1.0, 0.25).unwrap();
    assert_eq!(t.last().x, vec![1.0, 0.5]);
    assert_eq!(t.last().y, vec![1.0, 0.5]);
}

#[test]
fn infall_exits_the_chart() {
    let m = MetricSpec::schwarzschild(1.0);
    let t = integrate(&m, &state(&[0.0, 2.5, FRAC_PI_2, 0.0], &[2.0, -1.0, 0.0, 0.0]), 50.0, 1e-2).unwrap();
    let exit = t.exit.unwrap();
    assert!(matches!(exit.kind, ExitKind::Chart | ExitKind::Cone | ExitKind::Singular));
    assert!(t.samples.iter().all(|p| p.x[1] > 2.0));
}

#[test]
fn rejects_bad_steps() {
    let m = MetricSpec::minkowski(2);
    assert!(integrate(&m, &state(&[0.0; 2], &[1.0, 0.0]), 1.0, 0.0).is_err());
    assert!(integrate(&m, &state(&[0.0; 2], &[1.0, 0.0]), 1.0, f64::NAN).is_err());
}
