//! The Riemannian metric obtained by averaging the fundamental tensor of a
//! positive-definite Finsler metric over its indicatrix.
//!
//! `h_x = ∫_{S_x} g(x, y) dλ(y) / ∫_{S_x} dλ(y)` where `S_x = {F(x, ·) = 1}`
//! and `dλ` is induced by the Lebesgue measure of the fiber: by default the
//! cone measure `ι_y(dy¹∧…∧dyⁿ)`, which every linear map rescales by a
//! constant, so parallel transport of a Berwald metric preserves `h`. The
//! Euclidean surface measure of the fiber coordinates is available as an
//! alternative; it is chart dependent and does not have that property. The
//! indicatrix is parametrized radially, `u ↦ u / F(x, u)` over the unit
//! sphere, and `dλ` comes from the Jacobian of that map. Derivatives of `h`
//! in `x` are central differences at a fixed quadrature rule.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Matrix, Pipeline, Tensor3};
use crate::jets::{Jet, JetSpace};
use crate::linalg;
use crate::metrics::{Metric, MetricKind, TangentPoint};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    /// `|det(y, ∂y/∂a₁, …)|`, the Lebesgue volume of the cone over a patch.
    #[default]
    Cone,
    /// Gram determinant of `∂y/∂a`, the Euclidean area of the patch.
    Surface,
}

#[derive(Debug, Clone, Serialize)]
pub struct AverageOptions {
    /// Largest entrywise change accepted between successive refinements.
    pub tol: f64,
    /// Starting node count (φ nodes for n = 2, Gauss nodes in cos θ for n = 3).
    pub start_nodes: usize,
    pub max_nodes: usize,
    /// Orthogonal matrix applied to the unit-sphere parametrization.
    pub rotation: Option<Matrix>,
    pub measure: Measure,
}

impl Default for AverageOptions {
    fn default() -> Self {
        AverageOptions { tol: 1e-8, start_nodes: 32, max_nodes: 1 << 15, rotation: None, measure: Measure::Cone }
    }
}

impl AverageOptions {
    /// Tolerance tight enough for nested finite differences.
    pub fn for_differencing() -> Self {
        AverageOptions { tol: 1e-13, ..Default::default() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AveragedMetric {
    pub x: Vec<f64>,
    pub h: Matrix,
    /// `trapezoid` on the circle, `gauss_legendre_x_trapezoid` on the sphere.
    pub scheme: &'static str,
    pub nodes: usize,
    /// Entrywise change from the previous refinement.
    pub refinement_gap: f64,
    /// `∫ dλ`, the area of the indicatrix.
    pub area: f64,
}

fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

struct Sampler<'a> {
    metric: &'a dyn Metric,
    x: Vec<Jet>,
    space: std::sync::Arc<JetSpace>,
    n: usize,
    measure: Measure,
}

impl<'a> Sampler<'a> {
    fn new(metric: &'a dyn Metric, x: &[f64], measure: Measure) -> Sampler<'a> {
        let n = metric.dimension();
        let space = JetSpace::shared(n, 2);
        let xj = x.iter().map(|&v| Jet::constant(&space, 2, v)).collect();
        Sampler { metric, x: xj, space, n, measure }
    }

    /// `g(x, u)` (row-major) and the measure element of `∂y/∂a` for the
    /// tangent vectors `ua` of the unit-sphere parametrization at `u`.
    fn node(&self, u: &[f64], ua: &[Vec<f64>]) -> Result<(Vec<f64>, f64)> {
        let n = self.n;
        let y: Vec<Jet> = (0..n)
            .map(|i| Jet::variable(&self.space, 2, i, u[i]))
            .collect::<Result<_>>()?;
        let f2 = self.metric.energy(&self.x, &y)?;
        let grad: Vec<Jet> = (0..n).map(|i| f2.d(i)).collect();
        let g: Vec<f64> = (0..n * n).map(|ij| 0.5 * grad[ij / n].d(ij % n).value()).collect();
        let f = f2.value().sqrt();
        if !(f > 0.0) {
            return Err(Error::NotPositive(f));
        }
        // ∂y/∂a = u_a/F - u (∇F·u_a)/F², ∇F = ∇F²/(2F)
        let tangents: Vec<Vec<f64>> = ua
            .iter()
            .map(|t| {
                let dfa: f64 = (0..n).map(|i| grad[i].value() * t[i]).sum::<f64>() / (2.0 * f);
                (0..n).map(|i| t[i] / f - u[i] * dfa / (f * f)).collect()
            })
            .collect();
        let element = match (self.measure, tangents.len()) {
            (Measure::Cone, _) => {
                let mut m: Vec<f64> = u.iter().map(|v| v / f).collect();
                m.extend(tangents.iter().flatten());
                linalg::det(&m, n).abs()
            }
            (Measure::Surface, 1) => tangents[0].iter().map(|v| v * v).sum::<f64>().sqrt(),
            (Measure::Surface, 2) => {
                let (a, b) = (&tangents[0], &tangents[1]);
                let c = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
                c.iter().map(|v| v * v).sum::<f64>().sqrt()
            }
            (Measure::Surface, k) => unreachable!("indicatrix of dimension {k}"),
        };
        Ok((g, element))
    }
}

fn rotate(r: &Option<Matrix>, v: Vec<f64>) -> Vec<f64> {
    match r {
        None => v,
        Some(m) => m.iter().map(|row| row.iter().zip(&v).map(|(a, b)| a * b).sum()).collect(),
    }
}

/// Quadrature with a fixed rule; returns `(∫ g dλ, ∫ dλ)`.
fn integrate(metric: &dyn Metric, x: &[f64], nodes: usize, opts: &AverageOptions) -> Result<(Vec<f64>, f64)> {
    let rotation = &opts.rotation;
    let s = Sampler::new(metric, x, opts.measure);
    let n = s.n;
    let mut contributions: Vec<Vec<f64>> = vec![Vec::new(); n * n + 1];
    let mut push = |g: Vec<f64>, w: f64| {
        for (k, v) in g.into_iter().enumerate() {
            contributions[k].push(v * w);
        }
        contributions[n * n].push(w);
    };
    match n {
        2 => {
            let dphi = 2.0 * std::f64::consts::PI / nodes as f64;
            for k in 0..nodes {
                let phi = k as f64 * dphi;
                let u = rotate(rotation, vec![phi.cos(), phi.sin()]);
                let ut = rotate(rotation, vec![-phi.sin(), phi.cos()]);
                let (g, el) = s.node(&u, &[ut])?;
                push(g, el * dphi);
            }
        }
        3 => {
            let rule = GaussLegendre::new(NonZeroUsize::new(nodes).expect("positive node count"));
            let nphi = 2 * nodes;
            let dphi = 2.0 * std::f64::consts::PI / nphi as f64;
            for &(t, wt) in rule.as_node_weight_pairs() {
                let st = (1.0 - t * t).sqrt();
                for k in 0..nphi {
                    let phi = k as f64 * dphi;
                    let (c, sn) = (phi.cos(), phi.sin());
                    let u = rotate(rotation, vec![st * c, st * sn, t]);
                    let u_t = rotate(rotation, vec![-t / st * c, -t / st * sn, 1.0]);
                    let u_phi = rotate(rotation, vec![-st * sn, st * c, 0.0]);
                    let (g, el) = s.node(&u, &[u_t, u_phi])?;
                    push(g, el * wt * dphi);
                }
            }
        }
        _ => return Err(Error::Unsupported(format!("averaging over a {n}-dimensional base"))),
    }
    let sums: Vec<f64> = contributions.iter().map(|c| pairwise_sum(c)).collect();
    Ok((sums[..n * n].to_vec(), sums[n * n]))
}

fn check_base(metric: &dyn Metric) -> Result<()> {
    if metric.kind() != MetricKind::Base {
        return Err(Error::Unsupported("only positive-definite base metrics are averaged".into()));
    }
    Ok(())
}

/// `h_x` with a fixed node count.
pub fn average_metric_fixed(metric: &dyn Metric, x: &[f64], nodes: usize, opts: &AverageOptions) -> Result<Matrix> {
    check_base(metric)?;
    let n = metric.dimension();
    let (num, area) = integrate(metric, x, nodes, opts)?;
    Ok((0..n).map(|i| (0..n).map(|j| num[i * n + j] / area).collect()).collect())
}

/// `h_x`, doubling the node count until successive results agree.
pub fn average_metric(metric: &dyn Metric, x: &[f64], opts: &AverageOptions) -> Result<AveragedMetric> {
    check_base(metric)?;
    let n = metric.dimension();
    let mut nodes = opts.start_nodes.max(2);
    let mut prev: Option<Matrix> = None;
    let mut gap = f64::INFINITY;
    loop {
        let (num, area) = integrate(metric, x, nodes, opts)?;
        let h: Matrix = (0..n).map(|i| (0..n).map(|j| num[i * n + j] / area).collect()).collect();
        if let Some(p) = &prev {
            gap = max_diff(p, &h);
            if gap < opts.tol {
                return Ok(AveragedMetric {
                    x: x.to_vec(),
                    h,
                    scheme: if n == 2 { "trapezoid" } else { "gauss_legendre_x_trapezoid" },
                    nodes,
                    refinement_gap: gap,
                    area,
                });
            }
        }
        if nodes * 2 > opts.max_nodes {
            return Err(Error::QuadratureNotConverged { gap, nodes });
        }
        prev = Some(h);
        nodes *= 2;
    }
}

fn max_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.iter().flatten().zip(b.iter().flatten()).fold(0.0, |m, (u, v)| m.max((u - v).abs()))
}

fn shifted(x: &[f64], steps: &[(usize, f64)]) -> Vec<f64> {
    let mut v = x.to_vec();
    for &(i, s) in steps {
        v[i] += s;
    }
    v
}

/// Levi-Civita symbols `Γ^a_{bc}` of `h` from `h` and its first derivatives.
fn levi_civita(h: &Matrix, dh: &[Matrix]) -> Result<Tensor3> {
    let n = h.len();
    let flat: Vec<f64> = h.iter().flatten().copied().collect();
    let inv = linalg::inverse(&flat, n).map_err(|e| Error::IllConditioned(e.to_string()))?;
    let mut gamma = vec![vec![vec![0.0; n]; n]; n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                gamma[a][b][c] = 0.5
                    * (0..n)
                        .map(|e| inv[a * n + e] * (dh[b][e][c] + dh[c][e][b] - dh[e][b][c]))
                        .sum::<f64>();
            }
        }
    }
    Ok(gamma)
}

fn christoffel_at(metric: &dyn Metric, x: &[f64], step: f64, nodes: usize, opts: &AverageOptions) -> Result<Tensor3> {
    let n = metric.dimension();
    let h = average_metric_fixed(metric, x, nodes, opts)?;
    let dh: Vec<Matrix> = (0..n)
        .map(|c| {
            let hp = average_metric_fixed(metric, &shifted(x, &[(c, step)]), nodes, opts)?;
            let hm = average_metric_fixed(metric, &shifted(x, &[(c, -step)]), nodes, opts)?;
            Ok((0..n)
                .map(|i| (0..n).map(|j| (hp[i][j] - hm[i][j]) / (2.0 * step)).collect())
                .collect())
        })
        .collect::<Result<_>>()?;
    levi_civita(&h, &dh)
}

#[derive(Debug, Clone, Serialize)]
pub struct ChristoffelOfH {
    pub gamma: Tensor3,
    pub nodes: usize,
    pub fd_step: f64,
    /// Largest change when the step is halved.
    pub halving_gap: f64,
}

/// Christoffel symbols of `h` at `x` by central differences.
pub fn christoffel_of_h(metric: &dyn Metric, x: &[f64], fd_step: f64, opts: &AverageOptions) -> Result<ChristoffelOfH> {
    let nodes = average_metric(metric, x, opts)?.nodes;
    let gamma = christoffel_at(metric, x, fd_step, nodes, opts)?;
    let half = christoffel_at(metric, x, fd_step / 2.0, nodes, opts)?;
    let halving_gap = gamma
        .iter()
        .flatten()
        .flatten()
        .zip(half.iter().flatten().flatten())
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(ChristoffelOfH { gamma, nodes, fd_step, halving_gap })
}

fn ricci_at(metric: &dyn Metric, x: &[f64], step: f64, nodes: usize, opts: &AverageOptions) -> Result<Matrix> {
    let n = metric.dimension();
    let g0 = christoffel_at(metric, x, step, nodes, opts)?;
    // dg[a] = ∂_a Γ
    let dg: Vec<Tensor3> = (0..n)
        .map(|a| {
            let gp = christoffel_at(metric, &shifted(x, &[(a, step)]), step, nodes, opts)?;
            let gm = christoffel_at(metric, &shifted(x, &[(a, -step)]), step, nodes, opts)?;
            Ok((0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| (0..n).map(|k| (gp[i][j][k] - gm[i][j][k]) / (2.0 * step)).collect())
                        .collect()
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut ric = vec![vec![0.0; n]; n];
    for b in 0..n {
        for c in 0..n {
            let mut v = 0.0;
            for a in 0..n {
                v += dg[a][a][b][c] - dg[c][a][a][b];
                for d in 0..n {
                    v += g0[a][a][d] * g0[d][b][c] - g0[a][c][d] * g0[d][a][b];
                }
            }
            ric[b][c] = v;
        }
    }
    Ok(ric)
}

#[derive(Debug, Clone, Serialize)]
pub struct RicciOfH {
    /// `Ric(h)` by differencing the Christoffel symbols of `h`.
    pub ricci: Matrix,
    /// `½ ∂²R/∂y^α∂y^β` of the Finsler metric at the reference direction.
    pub ricci_from_spray: Matrix,
    pub reference_y: Vec<f64>,
    /// `max |Ric(h) - ½ ∂²R/∂y∂y|`.
    pub difference: f64,
    pub halving_gap: f64,
    pub nodes: usize,
    pub fd_step: f64,
}

/// Ricci tensor of `h` at `x`, compared with the fiber Hessian of the Finsler
/// Ricci scalar at `y_ref`.
pub fn ricci_of_h(
    metric: &dyn Metric,
    x: &[f64],
    y_ref: &[f64],
    fd_step: f64,
    opts: &AverageOptions,
) -> Result<RicciOfH> {
    let n = metric.dimension();
    let nodes = average_metric(metric, x, opts)?.nodes;
    let ricci = ricci_at(metric, x, fd_step, nodes, opts)?;
    let half = ricci_at(metric, x, fd_step / 2.0, nodes, opts)?;
    let halving_gap = max_diff(&ricci, &half);
    let scale = ricci.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
    if halving_gap > 0.1 * (1.0 + scale) {
        return Err(Error::NoiseDominated { gap: halving_gap, scale });
    }
    let pipe = Pipeline::new(metric, &TangentPoint::new(x.to_vec(), y_ref.to_vec()), 6)?;
    let (r2, _) = pipe.riemann_r2();
    let r = crate::jets::sum((0..n).map(|i| r2[i * n + i].clone())).unwrap();
    let ricci_from_spray: Matrix = (0..n)
        .map(|a| (0..n).map(|b| 0.5 * r.d(n + a).d(n + b).value()).collect())
        .collect();
    let difference = max_diff(&ricci, &ricci_from_spray);
    Ok(RicciOfH { ricci, ricci_from_spray, reference_y: y_ref.to_vec(), difference, halving_gap, nodes, fd_step })
}
