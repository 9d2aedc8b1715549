//! Fixtures shared by the integration tests: a catalogue of metrics with
//! sampling boxes, admissible point sampling and a finite-difference oracle.
#![allow(dead_code)]

use finsler::metrics::{eval_energy, Drift, MatrixField, MetricSpec, OneForm, ScalarField, TangentPoint};
use finsler::sampling::{self, SampleRng};
use finsler::{Metric, MetricKind};

pub mod oracles;

pub struct Case {
    pub name: &'static str,
    pub spec: MetricSpec,
    pub x_box: Vec<(f64, f64)>,
}

fn sf(terms: &[(f64, &[u32])]) -> ScalarField {
    ScalarField::polynomial(terms)
}

pub fn schwarzschild_box() -> Vec<(f64, f64)> {
    vec![(-1.0, 1.0), (3.0, 10.0), (0.5, 2.6), (0.0, 6.0)]
}

/// `β = 0.3 dz` on the round sphere times a line; Berwald with the Levi-Civita
/// connection of the product.
pub fn sphere_line_randers() -> MetricSpec {
    MetricSpec::randers(MatrixField::SphereTimesLine { radius: 1.0 }, OneForm::constant(&[0.0, 0.0, 0.3]))
}

/// `a = (1 + u²) du² + 2u du dv + dv²` is flat, `w = v + u²/2` being a
/// second Cartesian coordinate; `β = (c₁ + c₂u) du + c₂ dv = c₁ du + c₂ dw`
/// is parallel.
pub fn shear_flat_randers(c1: f64, c2: f64) -> MetricSpec {
    let a = MatrixField::Explicit {
        matrix: vec![
            vec![sf(&[(1.0, &[0]), (1.0, &[2])]), ScalarField::coordinate(0)],
            vec![ScalarField::coordinate(0), 1.0.into()],
        ],
    };
    MetricSpec::randers(a, OneForm(vec![sf(&[(c1, &[0]), (c2, &[1])]), c2.into()]))
}

/// Randers with a non-closed, non-parallel `β = 0.2 x¹ dx⁰` on Euclidean space.
pub fn rotating_randers() -> MetricSpec {
    MetricSpec::randers(
        MatrixField::Euclidean { dim: 3 },
        OneForm(vec![ScalarField::monomial(0.2, &[0, 1]), 0.1.into(), ScalarField::monomial(0.15, &[1])]),
    )
}

/// One representative per family, plus the Lorentzian presets.
pub fn catalogue() -> Vec<Case> {
    let unit = vec![(-1.0, 1.0); 3];
    let st = |b: &[(f64, f64)]| {
        let mut v = vec![(-1.0, 1.0)];
        v.extend_from_slice(b);
        v
    };
    let sphere_line_box = vec![(0.5, 2.6), (0.0, 6.0), (-1.0, 1.0)];
    vec![
        Case { name: "minkowski", spec: MetricSpec::minkowski(4), x_box: vec![(-1.0, 1.0); 4] },
        Case { name: "schwarzschild", spec: MetricSpec::schwarzschild(1.0), x_box: schwarzschild_box() },
        Case {
            name: "riemannian_sphere",
            spec: MetricSpec::round_sphere(1.0),
            x_box: vec![(0.5, 2.6), (0.0, 6.0)],
        },
        Case { name: "randers_rotating", spec: rotating_randers(), x_box: unit.clone() },
        Case { name: "randers_sphere_line", spec: sphere_line_randers(), x_box: sphere_line_box.clone() },
        Case {
            name: "f_omega",
            spec: MetricSpec::FOmega {
                lambda: sf(&[(1.0, &[]), (0.1, &[2])]),
                omega: OneForm(vec![ScalarField::monomial(0.2, &[0, 1]), 0.1.into(), 0.0.into()]),
                base: Box::new(MetricSpec::euclidean(3)),
            },
            x_box: unit.clone(),
        },
        Case {
            name: "g_plus_beta",
            spec: MetricSpec::GPlusBeta {
                lambda: 2.0.into(),
                beta: OneForm::constant(&[0.2, 0.0, -0.1]),
                base: Box::new(sphere_line_randers()),
            },
            x_box: sphere_line_box.clone(),
        },
        Case {
            name: "stationary_one_form",
            spec: MetricSpec::stationary(
                sf(&[(1.0, &[]), (0.1, &[2])]),
                Drift::OneForm(OneForm(vec![ScalarField::monomial(0.3, &[0, 1]), 0.0.into(), 0.2.into()])),
                rotating_randers(),
            ),
            x_box: st(&unit),
        },
        Case {
            name: "stationary_norm_drift",
            spec: MetricSpec::stationary(
                1.5.into(),
                Drift::Norm { factor: sf(&[(0.2, &[]), (0.05, &[1])]), metric: MatrixField::Euclidean { dim: 3 } },
                MetricSpec::euclidean(3),
            ),
            x_box: st(&unit),
        },
        Case { name: "static_product", spec: MetricSpec::static_product(sphere_line_randers()), x_box: st(&sphere_line_box) },
        Case {
            name: "f_omega_static",
            spec: MetricSpec::f_omega_static(
                sf(&[(1.0, &[]), (0.1, &[0, 2])]),
                OneForm(vec![ScalarField::monomial(0.3, &[0, 1]), 0.0.into(), 0.1.into()]),
                MetricSpec::euclidean(3),
            ),
            x_box: st(&unit),
        },
        Case { name: "rutz", spec: MetricSpec::rutz(1.0, 0.01), x_box: schwarzschild_box() },
    ]
}

/// `(x, y)` with `x` uniform in the box and `y` Gaussian, avoiding the null
/// band, the non-smooth locus and fiber directions close to it.
pub fn admissible_point(case: &Case, rng: &mut SampleRng) -> TangentPoint {
    let d = case.spec.dimension();
    loop {
        let x = sampling::uniform_in(rng, &case.x_box);
        let y = sampling::gaussian(rng, d);
        let y2: f64 = y.iter().map(|v| v * v).sum();
        if y2 < 0.25 {
            continue;
        }
        if matches!(case.spec, MetricSpec::RutzSchwarzschild { .. }) && (y[2].abs() < 0.2 || y[3].abs() < 0.2) {
            continue;
        }
        if case.spec.kind() == MetricKind::Spacetime && d == 4 && y[1..].iter().map(|v| v * v).sum::<f64>() < 0.04 {
            continue;
        }
        if !case.spec.smooth_at(&x, &y) {
            continue;
        }
        match eval_energy(&case.spec, &x, &y) {
            Ok(l) if case.spec.kind() == MetricKind::Base || l.abs() > 1e-3 * y2 => {
                return TangentPoint::new(x, y);
            }
            _ => continue,
        }
    }
}

/// Product of central differences `Π_s (f(z + h e_s) - f(z - h e_s)) / 2h`,
/// one factor per entry of `slots`.
fn central(f: &dyn Fn(&[f64]) -> f64, z: &[f64], slots: &[usize], h: f64) -> f64 {
    let k = slots.len();
    let mut acc = 0.0;
    for mask in 0..(1u32 << k) {
        let mut p = z.to_vec();
        let mut sign = 1.0;
        for (b, &s) in slots.iter().enumerate() {
            if mask & (1 << b) != 0 {
                p[s] -= h;
                sign = -sign;
            } else {
                p[s] += h;
            }
        }
        acc += sign * f(&p);
    }
    acc / (2.0 * h).powi(k as i32)
}

/// Mixed partial by central differences with one Richardson extrapolation.
pub fn fd_partial(f: &dyn Fn(&[f64]) -> f64, z: &[f64], slots: &[usize], h: f64) -> f64 {
    if slots.is_empty() {
        return f(z);
    }
    (4.0 * central(f, z, slots, h / 2.0) - central(f, z, slots, h)) / 3.0
}

/// Mixed partial with two Richardson levels, for points where the energy
/// varies on a scale close to `h`.
pub fn fd_partial_fine(f: &dyn Fn(&[f64]) -> f64, z: &[f64], slots: &[usize], h: f64) -> f64 {
    if slots.is_empty() {
        return f(z);
    }
    (16.0 * fd_partial(f, z, slots, h / 2.0) - fd_partial(f, z, slots, h)) / 15.0
}

/// `L` (or `F²`) as a function of the concatenated `(x, y)`.
pub fn energy_fn(metric: &dyn Metric) -> impl Fn(&[f64]) -> f64 + '_ {
    move |z: &[f64]| {
        let d = metric.dimension();
        eval_energy(metric, &z[..d], &z[d..]).expect("stencil stays in the admissible region")
    }
}

/// All non-decreasing slot lists of length `1..=order` over `nvars` slots.
pub fn multi_indices(nvars: usize, order: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut frontier: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..order {
        let mut next = Vec::new();
        for m in &frontier {
            let start = m.last().copied().unwrap_or(0);
            for s in start..nvars {
                let mut v = m.clone();
                v.push(s);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

pub fn max_abs<'a>(v: impl IntoIterator<Item = &'a f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}
