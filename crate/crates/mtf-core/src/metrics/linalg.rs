//! Symmetric eigendecomposition via cyclic Jacobi rotations.

use alloc::vec::Vec;

use crate::math;

/// Eigenvalues and (column) eigenvectors of a symmetric matrix, ascending.
pub struct SymEigen {
    pub values: Vec<f64>,
    /// Row-major n x n; column j is the eigenvector of `values[j]`.
    pub vectors: Vec<f64>,
}

/// Cyclic Jacobi. Converges quadratically; plenty for the 64x64 SPD
/// matrices the Fréchet distance needs.
pub fn sym_eigen(a: &[f64], n: usize) -> SymEigen {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut v = alloc::vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let off = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[i * n + j] * m[i * n + j];
                }
            }
        }
        s
    };
    let frob: f64 = m.iter().map(|x| x * x).sum();
    let tol = 1e-24 * frob.max(1e-300);

    for _sweep in 0..100 {
        if off(&m) <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = {
                    let s = if theta >= 0.0 { 1.0 } else { -1.0 };
                    s / (theta.abs() + math::sqrt(theta * theta + 1.0))
                };
                let c = 1.0 / math::sqrt(t * t + 1.0);
                let s = t * c;

                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = alloc::vec![0.0; n * n];
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            vectors[r * n + new_col] = v[r * n + old_col];
        }
    }
    SymEigen { values, vectors }
}

/// C = A * B for row-major n x n matrices.
pub fn matmul_square(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = alloc::vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    c
}

/// Symmetric square root of a positive semi-definite matrix; eigenvalues
/// in [-clamp_tol, 0) clamp to zero, anything lower reports as None.
pub fn sqrtm_psd(a: &[f64], n: usize, clamp_tol: f64) -> Option<Vec<f64>> {
    let eig = sym_eigen(a, n);
    let mut roots = Vec::with_capacity(n);
    for &l in &eig.values {
        if l < -clamp_tol {
            return None;
        }
        roots.push(math::sqrt(l.max(0.0)));
    }
    // V * diag(sqrt(l)) * V^T
    let mut out = alloc::vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += eig.vectors[i * n + k] * roots[k] * eig.vectors[j * n + k];
            }
            out[i * n + j] = s;
        }
    }
    Some(out)
}
