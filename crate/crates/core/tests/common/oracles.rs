//! Independent references: Levi-Civita symbols by differencing a metric
//! field, closed-form Schwarzschild connection and curvature, and the
//! closed-form Randers fundamental tensor.

use finsler::geometry::{Matrix, Tensor3};
use nalgebra::DMatrix;

use super::fd_partial;

pub type Tensor4 = Vec<Vec<Vec<Vec<f64>>>>;
pub type Gamma<'a> = dyn Fn(&[f64]) -> Tensor3 + 'a;

pub fn inverse(m: &Matrix) -> Matrix {
    let d = m.len();
    let inv = DMatrix::from_fn(d, d, |i, j| m[i][j]).try_inverse().expect("invertible");
    (0..d).map(|i| (0..d).map(|j| inv[(i, j)]).collect()).collect()
}

/// Levi-Civita symbols of a metric field by differencing its components.
pub fn lc_oracle(metric: &dyn Fn(&[f64]) -> Matrix, x: &[f64]) -> Tensor3 {
    let d = x.len();
    let g = metric(x);
    let gi = inverse(&g);
    // dg[k][i][j] = ∂_k g_ij
    let dg: Vec<Matrix> = (0..d)
        .map(|k| {
            (0..d)
                .map(|i| (0..d).map(|j| fd_partial(&|z: &[f64]| metric(z)[i][j], x, &[k], 1e-3)).collect())
                .collect()
        })
        .collect();
    let mut gamma = vec![vec![vec![0.0; d]; d]; d];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                gamma[i][j][k] =
                    0.5 * (0..d).map(|l| gi[i][l] * (dg[j][l][k] + dg[k][l][j] - dg[l][j][k])).sum::<f64>();
            }
        }
    }
    gamma
}

/// `R^i_{jkl} = ∂_kΓ^i_{jl} - ∂_lΓ^i_{jk} + Γ^m_{jl}Γ^i_{mk} - Γ^m_{jk}Γ^i_{ml}` given
/// `dgam[k][i][j][l] = ∂_kΓ^i_{jl}`.
pub fn riemann_from(g0: &Tensor3, dgam: &[Tensor3]) -> Tensor4 {
    let d = g0.len();
    let mut r = vec![vec![vec![vec![0.0; d]; d]; d]; d];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    let mut v = dgam[k][i][j][l] - dgam[l][i][j][k];
                    for m in 0..d {
                        v += g0[m][j][l] * g0[i][m][k] - g0[m][j][k] * g0[i][m][l];
                    }
                    r[i][j][k][l] = v;
                }
            }
        }
    }
    r
}

/// Riemann tensor with `∂Γ` from one Richardson-extrapolated difference per component.
pub fn riemann_oracle(gamma: &Gamma<'_>, x: &[f64]) -> Tensor4 {
    let d = x.len();
    let dgam: Vec<Tensor3> = (0..d)
        .map(|k| {
            let h = 1e-3;
            let at = |s: f64| {
                let mut z = x.to_vec();
                z[k] += s;
                gamma(&z)
            };
            let (p1, m1, p2, m2) = (at(h), at(-h), at(h / 2.0), at(-h / 2.0));
            (0..d)
                .map(|i| {
                    (0..d)
                        .map(|j| {
                            (0..d)
                                .map(|l| {
                                    let c1 = (p1[i][j][l] - m1[i][j][l]) / (2.0 * h);
                                    let c2 = (p2[i][j][l] - m2[i][j][l]) / h;
                                    (4.0 * c2 - c1) / 3.0
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    riemann_from(&gamma(x), &dgam)
}

fn sym_set(g: &mut Tensor3, i: usize, j: usize, k: usize, v: f64) {
    g[i][j][k] = v;
    g[i][k][j] = v;
}

/// Schwarzschild metric in `(t, r, θ, φ)`.
pub fn schwarzschild_matrix(m: f64, x: &[f64]) -> Matrix {
    let (r, th) = (x[1], x[2]);
    let f = 1.0 - 2.0 * m / r;
    let mut g = vec![vec![0.0; 4]; 4];
    g[0][0] = -f;
    g[1][1] = 1.0 / f;
    g[2][2] = r * r;
    g[3][3] = r * r * th.sin().powi(2);
    g
}

pub fn schwarzschild_gamma(m: f64) -> impl Fn(&[f64]) -> Tensor3 {
    move |x: &[f64]| {
        let (r, th) = (x[1], x[2]);
        let f = 1.0 - 2.0 * m / r;
        let mut g = vec![vec![vec![0.0; 4]; 4]; 4];
        sym_set(&mut g, 0, 0, 1, m / (r * r * f));
        sym_set(&mut g, 1, 0, 0, m * f / (r * r));
        sym_set(&mut g, 1, 1, 1, -m / (r * r * f));
        sym_set(&mut g, 1, 2, 2, -r * f);
        sym_set(&mut g, 1, 3, 3, -r * f * th.sin().powi(2));
        sym_set(&mut g, 2, 1, 2, 1.0 / r);
        sym_set(&mut g, 2, 3, 3, -th.sin() * th.cos());
        sym_set(&mut g, 3, 1, 3, 1.0 / r);
        sym_set(&mut g, 3, 2, 3, th.cos() / th.sin());
        g
    }
}

/// `∂_kΓ^i_{jl}` of Schwarzschild, differentiated by hand.
pub fn schwarzschild_dgamma(m: f64, x: &[f64]) -> Vec<Tensor3> {
    let (r, th) = (x[1], x[2]);
    let (s, c) = (th.sin(), th.cos());
    let q = r * (r - 2.0 * m);
    let mut dr = vec![vec![vec![0.0; 4]; 4]; 4];
    sym_set(&mut dr, 0, 0, 1, -m * (2.0 * r - 2.0 * m) / (q * q));
    sym_set(&mut dr, 1, 0, 0, m * (6.0 * m - 2.0 * r) / r.powi(4));
    sym_set(&mut dr, 1, 1, 1, m * (2.0 * r - 2.0 * m) / (q * q));
    sym_set(&mut dr, 1, 2, 2, -1.0);
    sym_set(&mut dr, 1, 3, 3, -s * s);
    sym_set(&mut dr, 2, 1, 2, -1.0 / (r * r));
    sym_set(&mut dr, 3, 1, 3, -1.0 / (r * r));
    let mut dth = vec![vec![vec![0.0; 4]; 4]; 4];
    sym_set(&mut dth, 1, 3, 3, -(r - 2.0 * m) * 2.0 * s * c);
    sym_set(&mut dth, 2, 3, 3, -(c * c - s * s));
    sym_set(&mut dth, 3, 2, 3, -1.0 / (s * s));
    let zero = vec![vec![vec![0.0; 4]; 4]; 4];
    vec![zero.clone(), dr, dth, zero]
}

pub fn schwarzschild_riemann(m: f64, x: &[f64]) -> Tensor4 {
    riemann_from(&schwarzschild_gamma(m)(x), &schwarzschild_dgamma(m, x))
}

/// `R_{abcd}R^{abcd}` from a mixed `R^a_{bcd}` and the metric.
pub fn kretschmann(r: &Tensor4, g: &Matrix) -> f64 {
    let d = g.len();
    let gi = inverse(g);
    // all-lower R_{abcd} = g_{ae} R^e_{bcd}; all-upper via three more raisings
    let low = |a: usize, b: usize, c: usize, e: usize| (0..d).map(|m| g[a][m] * r[m][b][c][e]).sum::<f64>();
    let mut lower = vec![vec![vec![vec![0.0; d]; d]; d]; d];
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for e in 0..d {
                    lower[a][b][c][e] = low(a, b, c, e);
                }
            }
        }
    }
    let mut k = 0.0;
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for e in 0..d {
                    // the metric is diagonal in every use, but raise generally
                    let mut up = 0.0;
                    for p in 0..d {
                        for q in 0..d {
                            for s in 0..d {
                                up += gi[b][p] * gi[c][q] * gi[e][s] * r[a][p][q][s];
                            }
                        }
                    }
                    k += lower[a][b][c][e] * up;
                }
            }
        }
    }
    k
}

pub fn gap3(a: &Tensor3, b: &Tensor3) -> f64 {
    a.iter()
        .flatten()
        .flatten()
        .zip(b.iter().flatten().flatten())
        .fold(0.0, |m, (u, v)| m.max((u - v).abs()))
}

pub fn gap4(a: &Tensor4, b: &Tensor4) -> f64 {
    a.iter()
        .flatten()
        .flatten()
        .flatten()
        .zip(b.iter().flatten().flatten().flatten())
        .fold(0.0, |m, (u, v)| m.max((u - v).abs()))
}

/// `g_ij = (F/α)(a_ij - ŷ_i ŷ_j) + (b_i + ŷ_i)(b_j + ŷ_j)` with `ŷ_i = y_i/α`, for Euclidean `a`.
pub fn randers_g(b: &[f64], y: &[f64]) -> Matrix {
    let d = y.len();
    let alpha = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let f = alpha + b.iter().zip(y).map(|(u, v)| u * v).sum::<f64>();
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let (yi, yj) = (y[i] / alpha, y[j] / alpha);
                    let a = if i == j { 1.0 } else { 0.0 };
                    f / alpha * (a - yi * yj) + (b[i] + yi) * (b[j] + yj)
                })
                .collect()
        })
        .collect()
}
