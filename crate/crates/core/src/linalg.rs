//! Small dense linear algebra on `f64` and on jets, row-major `d×d`.

use crate::error::{Error, Result};
use crate::jets::Jet;

/// Relative threshold below which a determinant counts as zero.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

/// Determinant by partial-pivot elimination.
pub fn det(m: &[f64], d: usize) -> f64 {
    let mut a = m.to_vec();
    let mut det = 1.0;
    for c in 0..d {
        let p = (c..d)
            .max_by(|&i, &j| a[i * d + c].abs().total_cmp(&a[j * d + c].abs()))
            .unwrap();
        if a[p * d + c] == 0.0 {
            return 0.0;
        }
        if p != c {
            for k in 0..d {
                a.swap(p * d + k, c * d + k);
            }
            det = -det;
        }
        let piv = a[c * d + c];
        det *= piv;
        for r in (c + 1)..d {
            let f = a[r * d + c] / piv;
            for k in c..d {
                a[r * d + k] -= f * a[c * d + k];
            }
        }
    }
    det
}

/// Fail with [`Error::Degenerate`] when `|det m| < 1e-12 · (max|m_ij|)^d`.
pub fn check_nondegenerate(m: &[f64], d: usize) -> Result<f64> {
    let scale = m.iter().fold(0.0_f64, |s, v| s.max(v.abs()));
    let det = det(m, d);
    if !det.is_finite() || det.abs() < DEGENERACY_THRESHOLD * scale.powi(d as i32) || scale == 0.0 {
        return Err(Error::Degenerate { det, scale });
    }
    Ok(det)
}

/// Inverse by Gauss–Jordan elimination with partial pivoting.
pub fn inverse(m: &[f64], d: usize) -> Result<Vec<f64>> {
    check_nondegenerate(m, d)?;
    let mut a = m.to_vec();
    let mut inv: Vec<f64> = (0..d * d).map(|i| if i / d == i % d { 1.0 } else { 0.0 }).collect();
    for c in 0..d {
        let p = (c..d)
            .max_by(|&i, &j| a[i * d + c].abs().total_cmp(&a[j * d + c].abs()))
            .unwrap();
        for k in 0..d {
            a.swap(p * d + k, c * d + k);
            inv.swap(p * d + k, c * d + k);
        }
        let piv = a[c * d + c];
        for k in 0..d {
            a[c * d + k] /= piv;
            inv[c * d + k] /= piv;
        }
        for r in 0..d {
            if r != c {
                let f = a[r * d + c];
                if f != 0.0 {
                    for k in 0..d {
                        a[r * d + k] -= f * a[c * d + k];
                        inv[r * d + k] -= f * inv[c * d + k];
                    }
                }
            }
        }
    }
    Ok(inv)
}

/// Inverse of a jet-valued matrix; pivots are chosen on base values.
pub fn inverse_jets(m: &[Jet], d: usize) -> Result<Vec<Jet>> {
    let values: Vec<f64> = m.iter().map(Jet::value).collect();
    check_nondegenerate(&values, d)?;
    let space = m[0].space().clone();
    let order = m.iter().map(Jet::order).min().unwrap_or(0);
    let mut a: Vec<Jet> = m.to_vec();
    let mut inv: Vec<Jet> = (0..d * d)
        .map(|i| Jet::constant(&space, order, if i / d == i % d { 1.0 } else { 0.0 }))
        .collect();
    for c in 0..d {
        let p = (c..d)
            .max_by(|&i, &j| a[i * d + c].value().abs().total_cmp(&a[j * d + c].value().abs()))
            .unwrap();
        for k in 0..d {
            a.swap(p * d + k, c * d + k);
            inv.swap(p * d + k, c * d + k);
        }
        let r_piv = a[c * d + c].recip()?;
        for k in 0..d {
            a[c * d + k] = &a[c * d + k] * &r_piv;
            inv[c * d + k] = &inv[c * d + k] * &r_piv;
        }
        for r in 0..d {
            if r == c || a[r * d + c].is_zero() {
                continue;
            }
            let f = a[r * d + c].clone();
            for k in 0..d {
                if !a[c * d + k].is_zero() {
                    a[r * d + k] = &a[r * d + k] - &(&f * &a[c * d + k]);
                }
                if !inv[c * d + k].is_zero() {
                    inv[r * d + k] = &inv[r * d + k] - &(&f * &inv[c * d + k]);
                }
            }
        }
    }
    Ok(inv)
}

pub fn matmul(a: &[f64], b: &[f64], d: usize) -> Vec<f64> {
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for k in 0..d {
            let aik = a[i * d + k];
            for j in 0..d {
                out[i * d + j] += aik * b[k * d + j];
            }
        }
    }
    out
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn symmetric_eigenvalues(m: &[f64], d: usize) -> Vec<f64> {
    let mut a = m.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..d)
            .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * d + j] * a[i * d + j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[p * d + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * d + q] - a[p * d + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = a[k * d + p];
                    let akq = a[k * d + q];
                    a[k * d + p] = c * akp - s * akq;
                    a[k * d + q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[p * d + k];
                    let aqk = a[q * d + k];
                    a[p * d + k] = c * apk - s * aqk;
                    a[q * d + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..d).map(|i| a[i * d + i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::JetSpace;

    #[test]
    fn inverse_roundtrip() {
        let m = [2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0];
        let inv = inverse(&m, 3).unwrap();
        let id = matmul(&m, &inv, 3);
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((id[i * 3 + j] - e).abs() < 1e-14);
            }
        }
        assert!((det(&m, 3) - 18.0).abs() < 1e-12);
    }

    #[test]
    fn needs_pivoting() {
        let m = [0.0, 1.0, 1.0, 0.0];
        assert_eq!(inverse(&m, 2).unwrap(), vec![0.0, 1.0, 1.0, 0.0]);
        assert_eq!(det(&m, 2), -1.0);
    }

    #[test]
    fn degenerate_detected() {
        assert!(matches!(inverse(&[1.0, 2.0, 2.0, 4.0], 2), Err(Error::Degenerate { .. })));
        assert!(matches!(inverse(&[0.0; 4], 2), Err(Error::Degenerate { .. })));
    }

    #[test]
    fn jet_inverse_derivatives() {
        // inverse of [[u, 1], [1, 2]] is [[2, -1], [-1, u]] / (2u - 1)
        let space = JetSpace::shared(1, 3);
        let u = Jet::variable(&space, 3, 0, 1.5).unwrap();
        let c = |v| Jet::constant(&space, 3, v);
        let inv = inverse_jets(&[u.clone(), c(1.0), c(1.0), c(2.0)], 2).unwrap();
        // d/du [2/(2u-1)] = -4/(2u-1)^2 = -1 at u = 1.5
        assert!((inv[0].value() - 1.0).abs() < 1e-14);
        assert!((inv[0].partial(&[0]).unwrap() + 1.0).abs() < 1e-14);
        // d²/du² = 16/(2u-1)^3 = 2
        assert!((inv[0].partial(&[0, 0]).unwrap() - 2.0).abs() < 1e-13);
        // u/(2u-1): derivative -1/(2u-1)^2 = -0.25
        assert!((inv[3].partial(&[0]).unwrap() + 0.25).abs() < 1e-14);
    }

    #[test]
    fn jacobi_eigenvalues() {
        let ev = symmetric_eigenvalues(&[2.0, 1.0, 1.0, 2.0], 2);
        assert!((ev[0] - 1.0).abs() < 1e-12 && (ev[1] - 3.0).abs() < 1e-12);
    }
}
