//! Dense linear algebra kernels: symmetric eigendecomposition via cyclic
//! Jacobi rotations and Householder QR with a fixed sign convention.
//!
//! Problem sizes here stay small (vocabulary at most 256), so cubic dense
//! methods are adequate and keep the crate free of native LAPACK backends.

use ndarray::{Array1, Array2};

/// Eigendecomposition of a symmetric matrix.
///
/// Returns `(eigenvalues, eigenvectors)` sorted by descending eigenvalue;
/// column `j` of the eigenvector matrix pairs with eigenvalue `j`.
/// The input must be symmetric; only the given entries are read as-is.
pub fn symmetric_eigen(a: &Array2<f64>) -> (Array1<f64>, Array2<f64>) {
    let d = a.nrows();
    assert_eq!(d, a.ncols(), "symmetric_eigen requires a square matrix");
    let mut m = a.clone();
    let mut v: Array2<f64> = Array2::eye(d);
    let scale = frobenius(a).max(f64::MIN_POSITIVE);
    let tol = 1e-15 * scale;

    // Cyclic sweeps; each rotation zeroes one off-diagonal pair.
    for _ in 0..60 {
        let mut off = 0.0;
        for p in 0..d {
            for q in (p + 1)..d {
                off += m[[p, q]] * m[[p, q]];
            }
        }
        if (2.0 * off).sqrt() <= tol {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = m[[p, q]];
                if apq.abs() <= tol * 1e-3 {
                    continue;
                }
                let theta = (m[[q, q]] - m[[p, p]]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..d {
                    let mip = m[[i, p]];
                    let miq = m[[i, q]];
                    m[[i, p]] = c * mip - s * miq;
                    m[[i, q]] = s * mip + c * miq;
                }
                for i in 0..d {
                    let mpi = m[[p, i]];
                    let mqi = m[[q, i]];
                    m[[p, i]] = c * mpi - s * mqi;
                    m[[q, i]] = s * mpi + c * mqi;
                }
                for i in 0..d {
                    let vip = v[[i, p]];
                    let viq = v[[i, q]];
                    v[[i, p]] = c * vip - s * viq;
                    v[[i, q]] = s * vip + c * viq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| m[[j, j]].partial_cmp(&m[[i, i]]).unwrap());
    let mut values = Array1::zeros(d);
    let mut vectors = Array2::zeros((d, d));
    for (dst, &src) in order.iter().enumerate() {
        values[dst] = m[[src, src]];
        for i in 0..d {
            vectors[[i, dst]] = v[[i, src]];
        }
    }
    (values, vectors)
}

/// Householder QR of a square matrix, returning the orthogonal factor with
/// the sign convention diag(R) >= 0. The factor is orthonormal even when the
/// input is rank deficient.
pub fn qr_orthonormal(a: &Array2<f64>) -> Array2<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "qr_orthonormal requires a square matrix");
    let mut r = a.clone();
    let mut q: Array2<f64> = Array2::eye(n);

    for j in 0..n {
        let mut norm = 0.0;
        for i in j..n {
            norm += r[[i, j]] * r[[i, j]];
        }
        let norm = norm.sqrt();
        if norm <= f64::MIN_POSITIVE {
            continue;
        }
        let alpha = if r[[j, j]] >= 0.0 { -norm } else { norm };
        let mut v = vec![0.0; n - j];
        v[0] = r[[j, j]] - alpha;
        for i in (j + 1)..n {
            v[i - j] = r[[i, j]];
        }
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 <= f64::MIN_POSITIVE {
            continue;
        }
        // Apply H = I - 2 v v^T / (v^T v) to the trailing block of R.
        for col in j..n {
            let mut dot = 0.0;
            for i in j..n {
                dot += v[i - j] * r[[i, col]];
            }
            let f = 2.0 * dot / vnorm2;
            for i in j..n {
                r[[i, col]] -= f * v[i - j];
            }
        }
        // Accumulate Q := Q H.
        for row in 0..n {
            let mut dot = 0.0;
            for i in j..n {
                dot += q[[row, i]] * v[i - j];
            }
            let f = 2.0 * dot / vnorm2;
            for i in j..n {
                q[[row, i]] -= f * v[i - j];
            }
        }
    }

    for j in 0..n {
        if r[[j, j]] < 0.0 {
            for i in 0..n {
                q[[i, j]] = -q[[i, j]];
            }
        }
    }
    q
}

/// Frobenius norm.
pub fn frobenius(a: &Array2<f64>) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn eigen_recovers_diagonal() {
        let a = array![[3.0, 0.0], [0.0, -1.0]];
        let (vals, vecs) = symmetric_eigen(&a);
        assert!((vals[0] - 3.0).abs() < 1e-12);
        assert!((vals[1] + 1.0).abs() < 1e-12);
        assert!((vecs[[0, 0]].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigen_reconstructs_input() {
        let a = array![
            [4.0, 1.0, 0.5],
            [1.0, 3.0, -0.25],
            [0.5, -0.25, 1.0]
        ];
        let (vals, vecs) = symmetric_eigen(&a);
        let mut recon = Array2::<f64>::zeros((3, 3));
        for t in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    recon[[i, j]] += vals[t] * vecs[[i, t]] * vecs[[j, t]];
                }
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                assert!((recon[[i, j]] - a[[i, j]]).abs() < 1e-10);
            }
        }
        assert!(vals[0] >= vals[1] && vals[1] >= vals[2]);
    }

    #[test]
    fn qr_factor_is_orthonormal() {
        let a = array![
            [1.0, 2.0, 3.0],
            [-1.0, 0.5, 0.0],
            [4.0, -2.0, 1.0]
        ];
        let q = qr_orthonormal(&a);
        let qtq = q.t().dot(&q);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((qtq[[i, j]] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn qr_sign_convention_is_deterministic() {
        let a = array![[-2.0, 0.0], [0.0, 5.0]];
        let q = qr_orthonormal(&a);
        // diag(R) >= 0 forces the first column to flip sign.
        assert!((q[[0, 0]] + 1.0).abs() < 1e-12);
        assert!((q[[1, 1]] - 1.0).abs() < 1e-12);
    }
}
