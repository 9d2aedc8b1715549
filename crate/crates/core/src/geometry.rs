//! Connection and curvature of a Finsler or Lorentz–Finsler function.
//!
//! All quantities are built as jets in `(x, y)`: the fundamental tensor and
//! spray carry `K-2` orders of derivatives, the nonlinear connection and
//! Chern symbols `K-3`, curvature and Landsberg `K-4`. Horizontal
//! derivatives `δ/δx^k = ∂/∂x^k - N^m_k ∂/∂y^m` are then exact jet
//! operations. Order 4 suffices for curvature, 5 for the third fiber
//! derivatives of the spray and 6 for the field equation.
//!
//! Index layout is row-major: `g[i*d + j]`, `Γ^i_{jk}` at `(i*d + j)*d + k`,
//! `R^i_{jkl}` at `((i*d + j)*d + k)*d + l`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::jets::Jet;
use crate::linalg;
use crate::metrics::{lift_point, Metric, TangentPoint};

/// Relative agreement demanded between the two curvature paths.
pub const DUAL_PATH_TOLERANCE: f64 = 1e-6;

/// `|L| ≤ NULL_BAND · |y|²` counts as a null direction.
pub const NULL_BAND: f64 = 1e-10;

/// Jets of the connection data at one point of the tangent bundle.
pub struct Pipeline {
    pub d: usize,
    pub order: usize,
    pub point: TangentPoint,
    pub x: Vec<Jet>,
    pub y: Vec<Jet>,
    pub l: Jet,
    pub g: Vec<Jet>,
    pub g_inv: Vec<Jet>,
    pub spray: Vec<Jet>,
    /// `N^i_j` at `i*d + j`; empty below order 3.
    pub n: Vec<Jet>,
    /// Chern symbols; empty below order 3.
    pub gamma: Vec<Jet>,
}

impl Pipeline {
    /// Evaluate `L`, `g`, `g⁻¹`, `G` and, from order 3, `N` and `Γ`.
    pub fn new(metric: &dyn Metric, p: &TangentPoint, order: usize) -> Result<Pipeline> {
        let d = metric.dimension();
        if p.x.len() != d || p.y.len() != d {
            return Err(Error::InvalidSpec(format!(
                "point dimension {} does not match metric dimension {d}",
                p.x.len()
            )));
        }
        if p.y.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidSpec("y = 0 is outside the slit tangent bundle".into()));
        }
        assert!(order >= 2, "the pipeline needs at least second derivatives");
        let (x, y) = lift_point(p, order)?;
        let l = metric.energy(&x, &y)?;
        let ly: Vec<Jet> = (0..d).map(|j| l.d(d + j)).collect();
        let mut g: Vec<Jet> = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                g.push(if j < i { g[j * d + i].clone() } else { ly[i].d(d + j) * 0.5 });
            }
        }
        let g_inv = linalg::inverse_jets(&g, d)?;
        let w: Vec<Jet> = (0..d)
            .map(|j| {
                let mut acc = -l.d(j);
                for k in 0..d {
                    acc = acc + ly[j].d(k) * &y[k];
                }
                acc
            })
            .collect();
        let spray = (0..d)
            .map(|i| contract(&g_inv[i * d..(i + 1) * d], &w) * 0.25)
            .collect();
        let mut pipe = Pipeline {
            d,
            order,
            point: p.clone(),
            x,
            y,
            l,
            g,
            g_inv,
            spray,
            n: Vec::new(),
            gamma: Vec::new(),
        };
        if order >= 3 {
            pipe.n = (0..d * d).map(|ij| pipe.spray[ij / d].d(d + ij % d)).collect();
            pipe.gamma = pipe.chern();
        }
        Ok(pipe)
    }

    /// `δf/δx^k = ∂f/∂x^k - N^m_k ∂f/∂y^m`.
    pub fn delta(&self, f: &Jet, k: usize) -> Jet {
        let d = self.d;
        let mut acc = f.d(k);
        for m in 0..d {
            let fy = f.d(d + m);
            if !fy.is_zero() && !self.n[m * d + k].is_zero() {
                acc = acc - &self.n[m * d + k] * &fy;
            }
        }
        acc
    }

    fn chern(&self) -> Vec<Jet> {
        let d = self.d;
        // dg[(a*d + l)*d + k] = δ_a g_lk
        let mut dg: Vec<Jet> = Vec::with_capacity(d * d * d);
        for a in 0..d {
            for l in 0..d {
                for k in 0..d {
                    dg.push(if k < l { dg[(a * d + k) * d + l].clone() } else { self.delta(&self.g[l * d + k], a) });
                }
            }
        }
        let dgi = |a: usize, l: usize, k: usize| &dg[(a * d + l) * d + k];
        let mut lowered = Vec::with_capacity(d * d * d);
        for l in 0..d {
            for j in 0..d {
                for k in 0..d {
                    lowered.push((dgi(j, l, k) - dgi(l, j, k) + dgi(k, l, j)) * 0.5);
                }
            }
        }
        let mut gamma: Vec<Option<Jet>> = vec![None; d * d * d];
        for i in 0..d {
            for j in 0..d {
                for k in j..d {
                    let col: Vec<&Jet> = (0..d).map(|l| &lowered[(l * d + j) * d + k]).collect();
                    let v = contract_refs(&self.g_inv[i * d..(i + 1) * d], &col);
                    gamma[(i * d + k) * d + j] = Some(v.clone());
                    gamma[(i * d + j) * d + k] = Some(v);
                }
            }
        }
        gamma.into_iter().map(Option::unwrap).collect()
    }

    fn need(&self, order: usize, what: &str) {
        assert!(self.order >= order, "{what} needs a pipeline of order {order}, got {}", self.order);
    }

    /// `R^i_{jkl}` from the Chern symbols.
    pub fn hh_curvature(&self) -> Vec<Jet> {
        self.need(4, "hh-curvature");
        let d = self.d;
        let gm = |i: usize, j: usize, k: usize| &self.gamma[(i * d + j) * d + k];
        // dgam[((k*d + i)*d + j)*d + l] = δ_k Γ^i_jl
        let mut dgam: Vec<Jet> = Vec::with_capacity(d.pow(4));
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    for l in 0..d {
                        dgam.push(if l < j {
                            dgam[((k * d + i) * d + l) * d + j].clone()
                        } else {
                            self.delta(gm(i, j, l), k)
                        });
                    }
                }
            }
        }
        let dg = |k: usize, i: usize, j: usize, l: usize| &dgam[((k * d + i) * d + j) * d + l];
        let zero = Jet::constant(self.l.space(), self.order - 4, 0.0);
        let mut r = Vec::with_capacity(d.pow(4));
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        if k == l {
                            r.push(zero.clone());
                            continue;
                        }
                        if l < k {
                            let v: &Jet = &r[((i * d + j) * d + l) * d + k];
                            r.push(-v);
                            continue;
                        }
                        let mut acc = dg(k, i, j, l) - dg(l, i, j, k);
                        for m in 0..d {
                            acc = acc + gm(m, j, l) * gm(i, m, k) - gm(m, j, k) * gm(i, m, l);
                        }
                        r.push(acc);
                    }
                }
            }
        }
        r
    }

    /// `R^i_k` from the spray; also returns the largest summand magnitude.
    pub fn riemann_r2(&self) -> (Vec<Jet>, f64) {
        self.need(4, "Riemann curvature");
        let d = self.d;
        let mut out = Vec::with_capacity(d * d);
        let mut term_scale = 0.0_f64;
        for i in 0..d {
            for k in 0..d {
                let nik = &self.n[i * d + k];
                let a = self.spray[i].d(k) * 2.0;
                let mut b = Jet::constant(self.l.space(), self.order - 4, 0.0);
                let mut c = b.clone();
                let mut e = b.clone();
                for m in 0..d {
                    b = b + nik.d(m) * &self.y[m];
                    c = c + nik.d(d + m) * &self.spray[m];
                    e = e + &self.n[i * d + m] * &self.n[m * d + k];
                }
                let c = c * 2.0;
                term_scale = term_scale
                    .max(a.value().abs())
                    .max(b.value().abs())
                    .max(c.value().abs())
                    .max(e.value().abs());
                out.push(a - b + c - e);
            }
        }
        (out, term_scale)
    }

    /// `P^i_{jk} = ∂²G^i/∂y^j∂y^k - Γ^i_{jk}` and `P_i = P^l_{li}`.
    pub fn landsberg(&self) -> (Vec<Jet>, Vec<Jet>) {
        self.need(4, "Landsberg tensor");
        let d = self.d;
        let mut p = Vec::with_capacity(d * d * d);
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    p.push(self.n[i * d + j].d(d + k) - &self.gamma[(i * d + j) * d + k]);
                }
            }
        }
        let trace = (0..d)
            .map(|i| crate::jets::sum((0..d).map(|l| p[(l * d + l) * d + i].clone())).unwrap())
            .collect();
        (p, trace)
    }
}

fn contract(a: &[Jet], b: &[Jet]) -> Jet {
    let refs: Vec<&Jet> = b.iter().collect();
    contract_refs(a, &refs)
}

fn contract_refs(a: &[Jet], b: &[&Jet]) -> Jet {
    let mut acc: Option<Jet> = None;
    for (u, v) in a.iter().zip(b) {
        if u.is_zero() || v.is_zero() {
            continue;
        }
        let t = u * *v;
        acc = Some(match acc {
            Some(s) => s + t,
            None => t,
        });
    }
    acc.unwrap_or_else(|| {
        let order = a[0].order().min(b[0].order());
        Jet::constant(a[0].space(), order, 0.0)
    })
}

pub type Matrix = Vec<Vec<f64>>;
pub type Tensor3 = Vec<Vec<Vec<f64>>>;
pub type Tensor4 = Vec<Vec<Vec<Vec<f64>>>>;

fn matrix(v: &[Jet], d: usize) -> Matrix {
    (0..d).map(|i| (0..d).map(|j| v[i * d + j].value()).collect()).collect()
}

fn tensor3(v: &[Jet], d: usize) -> Tensor3 {
    (0..d).map(|i| matrix(&v[i * d * d..(i + 1) * d * d], d)).collect()
}

fn tensor4(v: &[Jet], d: usize) -> Tensor4 {
    let s = d * d * d;
    (0..d).map(|i| tensor3(&v[i * s..(i + 1) * s], d)).collect()
}

/// Field-equation residual, absolute and divided by `1 + |R|/|L|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldEquation {
    pub residual: f64,
    pub normalized: f64,
}

/// Every connection and curvature quantity at one `(x, y)`.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureReport {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub l: f64,
    pub g: Matrix,
    pub g_inv: Matrix,
    pub spray: Vec<f64>,
    pub n: Matrix,
    pub gamma: Tensor3,
    pub r4: Tensor4,
    pub r2: Matrix,
    pub ricci_scalar: f64,
    pub landsberg: Tensor3,
    pub landsberg_trace: Vec<f64>,
    /// `max |R^i_{jkl} y^j y^l - R^i_k|`.
    pub dual_path_gap: f64,
    pub fieldeq: Option<FieldEquation>,
}

impl CurvatureReport {
    /// Largest `|R^i_k|`, the scale of the dual-path comparison.
    pub fn r2_scale(&self) -> f64 {
        self.r2.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn report(pipe: &Pipeline, with_fieldeq: bool) -> Result<CurvatureReport> {
    let d = pipe.d;
    let r4 = pipe.hh_curvature();
    let (r2, term_scale) = pipe.riemann_r2();
    let (p, p_trace) = pipe.landsberg();
    let y = &pipe.point.y;
    let mut gap = 0.0_f64;
    let mut scale = 0.0_f64;
    for i in 0..d {
        for k in 0..d {
            let mut c = 0.0;
            for j in 0..d {
                for l in 0..d {
                    c += r4[((i * d + j) * d + k) * d + l].value() * y[j] * y[l];
                }
            }
            let v = r2[i * d + k].value();
            gap = gap.max((c - v).abs());
            scale = scale.max(v.abs()).max(c.abs());
        }
    }
    let y2: f64 = y.iter().map(|v| v * v).sum();
    if gap > DUAL_PATH_TOLERANCE * scale + 1e-10 * term_scale + 1e-13 * y2 {
        return Err(Error::Inconsistent(format!(
            "R^i_jkl y^j y^l differs from R^i_k by {gap:e} (scale {scale:e})"
        )));
    }
    let ricci = crate::jets::sum((0..d).map(|i| r2[i * d + i].clone())).unwrap();
    let fieldeq = if with_fieldeq {
        Some(field_equation(pipe, &ricci, &p_trace)?)
    } else {
        None
    };
    Ok(CurvatureReport {
        x: pipe.point.x.clone(),
        y: y.clone(),
        l: pipe.l.value(),
        g: matrix(&pipe.g, d),
        g_inv: matrix(&pipe.g_inv, d),
        spray: pipe.spray.iter().map(Jet::value).collect(),
        n: matrix(&pipe.n, d),
        gamma: tensor3(&pipe.gamma, d),
        r4: tensor4(&r4, d),
        r2: matrix(&r2, d),
        ricci_scalar: ricci.value(),
        landsberg: tensor3(&p, d),
        landsberg_trace: p_trace.iter().map(Jet::value).collect(),
        dual_path_gap: gap,
        fieldeq,
    })
}

fn field_equation(pipe: &Pipeline, ricci: &Jet, p_trace: &[Jet]) -> Result<FieldEquation> {
    let d = pipe.d;
    let l = pipe.l.value();
    let y2: f64 = pipe.point.y.iter().map(|v| v * v).sum();
    if l.abs() <= NULL_BAND * y2 {
        return Err(Error::NullDirection(l));
    }
    let gi = |i: usize, j: usize| pipe.g_inv[i * d + j].value();
    // a[i*d + j] = δP_i/δx^j - P_h Γ^h_ij, carried to first order
    let mut a = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let mut acc = pipe.delta(&p_trace[i], j);
            for h in 0..d {
                acc = acc - &p_trace[h] * &pipe.gamma[(h * d + i) * d + j];
            }
            a.push(acc);
        }
    }
    let mut ryy = 0.0;
    let mut rest = 0.0;
    for i in 0..d {
        let q = crate::jets::sum((0..d).map(|k| &pipe.y[k] * &a[i * d + k])).unwrap();
        for j in 0..d {
            let gij = gi(i, j);
            ryy += gij * ricci.d(d + i).d(d + j).value();
            let inner = a[i * d + j].value() - p_trace[i].value() * p_trace[j].value()
                + q.d(d + j).value();
            rest += gij * inner;
        }
    }
    let r = ricci.value();
    let residual = 3.0 * r / l - 0.5 * ryy - rest;
    Ok(FieldEquation { residual, normalized: residual / (1.0 + r.abs() / l.abs()) })
}

/// Full report at order 4 (no field equation).
pub fn curvature(metric: &dyn Metric, p: &TangentPoint) -> Result<CurvatureReport> {
    report(&Pipeline::new(metric, p, 4)?, false)
}

/// Full report at order 6, including the field-equation residual.
pub fn curvature_with_fieldeq(metric: &dyn Metric, p: &TangentPoint) -> Result<CurvatureReport> {
    report(&Pipeline::new(metric, p, 6)?, true)
}

/// `g_ij = ½ ∂²L/∂y^i∂y^j`.
pub fn fundamental_tensor(metric: &dyn Metric, p: &TangentPoint) -> Result<Matrix> {
    let pipe = Pipeline::new(metric, p, 2)?;
    Ok(matrix(&pipe.g, pipe.d))
}

/// Spray coefficients `G^i`.
pub fn spray(metric: &dyn Metric, p: &TangentPoint) -> Result<Vec<f64>> {
    let pipe = Pipeline::new(metric, p, 2)?;
    Ok(pipe.spray.iter().map(Jet::value).collect())
}

/// Spray values only, skipping jet inversion; the geodesic right-hand side.
pub fn spray_values(metric: &dyn Metric, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let d = metric.dimension();
    let (xj, yj) = lift_point(&TangentPoint::new(x.to_vec(), y.to_vec()), 2)?;
    let l = metric.energy(&xj, &yj)?;
    let mut g = vec![0.0; d * d];
    let mut w = vec![0.0; d];
    for j in 0..d {
        let lyj = l.d(d + j);
        for i in 0..d {
            g[i * d + j] = 0.5 * lyj.d(d + i).value();
        }
        w[j] = (0..d).map(|k| lyj.d(k).value() * y[k]).sum::<f64>() - l.d(j).value();
    }
    let inv = linalg::inverse(&g, d)?;
    Ok((0..d)
        .map(|i| 0.25 * (0..d).map(|j| inv[i * d + j] * w[j]).sum::<f64>())
        .collect())
}

pub fn nonlinear_connection(metric: &dyn Metric, p: &TangentPoint) -> Result<Matrix> {
    let pipe = Pipeline::new(metric, p, 3)?;
    Ok(matrix(&pipe.n, pipe.d))
}

pub fn chern_symbols(metric: &dyn Metric, p: &TangentPoint) -> Result<Tensor3> {
    let pipe = Pipeline::new(metric, p, 3)?;
    Ok(tensor3(&pipe.gamma, pipe.d))
}

pub fn hh_curvature(metric: &dyn Metric, p: &TangentPoint) -> Result<Tensor4> {
    Ok(curvature(metric, p)?.r4)
}

pub fn riemann_r2(metric: &dyn Metric, p: &TangentPoint) -> Result<Matrix> {
    Ok(curvature(metric, p)?.r2)
}

/// Finsler Ricci scalar `R = R^i_i`.
pub fn ricci_scalar(metric: &dyn Metric, p: &TangentPoint) -> Result<f64> {
    Ok(curvature(metric, p)?.ricci_scalar)
}

pub fn landsberg(metric: &dyn Metric, p: &TangentPoint) -> Result<(Tensor3, Vec<f64>)> {
    let r = curvature(metric, p)?;
    Ok((r.landsberg, r.landsberg_trace))
}

pub fn fieldeq_residual(metric: &dyn Metric, p: &TangentPoint) -> Result<FieldEquation> {
    Ok(curvature_with_fieldeq(metric, p)?.fieldeq.expect("requested"))
}
