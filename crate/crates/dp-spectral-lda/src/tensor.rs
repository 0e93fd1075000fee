//! Dense third-order tensor utilities shared by the moment and spectral
//! stages. Tensors are `ndarray::Array3<f64>` in row-major layout; all
//! routines are deterministic sequential loops.

use ndarray::{Array1, Array2, Array3, ArrayView1};

/// Outer product of two vectors.
pub fn outer2(a: ArrayView1<f64>, b: ArrayView1<f64>) -> Array2<f64> {
    let (n, m) = (a.len(), b.len());
    let mut out = Array2::zeros((n, m));
    for i in 0..n {
        for j in 0..m {
            out[[i, j]] = a[i] * b[j];
        }
    }
    out
}

/// Outer product of three vectors.
pub fn outer3(a: ArrayView1<f64>, b: ArrayView1<f64>, c: ArrayView1<f64>) -> Array3<f64> {
    let (n, m, p) = (a.len(), b.len(), c.len());
    let mut out = Array3::zeros((n, m, p));
    for i in 0..n {
        for j in 0..m {
            let ab = a[i] * b[j];
            for l in 0..p {
                out[[i, j, l]] = ab * c[l];
            }
        }
    }
    out
}

/// Symmetrize a square matrix by averaging with its transpose.
pub fn symmetrize_matrix(m: &Array2<f64>) -> Array2<f64> {
    let d = m.nrows();
    let mut out = Array2::zeros((d, d));
    for i in 0..d {
        for j in 0..d {
            out[[i, j]] = 0.5 * (m[[i, j]] + m[[j, i]]);
        }
    }
    out
}

/// Symmetrize a cubic tensor by averaging over all six index permutations.
pub fn symmetrize_tensor(t: &Array3<f64>) -> Array3<f64> {
    let d = t.dim().0;
    let mut out = Array3::zeros((d, d, d));
    for i in 0..d {
        for j in 0..d {
            for l in 0..d {
                out[[i, j, l]] = (t[[i, j, l]]
                    + t[[i, l, j]]
                    + t[[j, i, l]]
                    + t[[j, l, i]]
                    + t[[l, i, j]]
                    + t[[l, j, i]])
                    / 6.0;
            }
        }
    }
    out
}

/// Maximum deviation from permutation symmetry relative to the largest
/// absolute entry. Returns 0 for the zero tensor.
pub fn symmetry_defect(t: &Array3<f64>) -> f64 {
    let d = t.dim().0;
    let scale = t.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            for l in 0..d {
                let v = t[[i, j, l]];
                for w in [t[[i, l, j]], t[[j, i, l]], t[[j, l, i]], t[[l, i, j]], t[[l, j, i]]] {
                    worst = worst.max((v - w).abs());
                }
            }
        }
    }
    worst / scale
}

/// Entrywise l1 norm of a matrix.
pub fn l1_matrix(m: &Array2<f64>) -> f64 {
    m.iter().map(|x| x.abs()).sum()
}

/// Entrywise l1 norm of a tensor.
pub fn l1_tensor(t: &Array3<f64>) -> f64 {
    t.iter().map(|x| x.abs()).sum()
}

/// Contract a tensor with the same matrix along every mode:
/// out[i,j,l] = sum_{a,b,c} t[a,b,c] w[a,i] w[b,j] w[c,l].
///
/// Implemented as three successive single-mode contractions so the cost is
/// O(d^3 k + d^2 k^2 + d k^3) rather than O(d^3 k^3).
pub fn contract_all_modes(t: &Array3<f64>, w: &Array2<f64>) -> Array3<f64> {
    let (d0, d1, d2) = t.dim();
    let k = w.ncols();
    assert_eq!(w.nrows(), d0);
    assert_eq!(d0, d1);
    assert_eq!(d1, d2);
    let d = d0;

    // Mode 0: (d,d,d) -> (k,d,d)
    let mut t1: Array3<f64> = Array3::zeros((k, d, d));
    for a in 0..d {
        for i in 0..k {
            let wai = w[[a, i]];
            if wai == 0.0 {
                continue;
            }
            for j in 0..d {
                for l in 0..d {
                    t1[[i, j, l]] += t[[a, j, l]] * wai;
                }
            }
        }
    }
    // Mode 1: (k,d,d) -> (k,k,d)
    let mut t2: Array3<f64> = Array3::zeros((k, k, d));
    for b in 0..d {
        for j in 0..k {
            let wbj = w[[b, j]];
            if wbj == 0.0 {
                continue;
            }
            for i in 0..k {
                for l in 0..d {
                    t2[[i, j, l]] += t1[[i, b, l]] * wbj;
                }
            }
        }
    }
    // Mode 2: (k,k,d) -> (k,k,k)
    let mut t3: Array3<f64> = Array3::zeros((k, k, k));
    for c in 0..d {
        for l in 0..k {
            let wcl = w[[c, l]];
            if wcl == 0.0 {
                continue;
            }
            for i in 0..k {
                for j in 0..k {
                    t3[[i, j, l]] += t2[[i, j, c]] * wcl;
                }
            }
        }
    }
    t3
}

/// Bilinear map T(I, v, v): out[a] = sum_{b,c} t[a,b,c] v[b] v[c].
pub fn apply_bilinear(t: &Array3<f64>, v: ArrayView1<f64>) -> Array1<f64> {
    let d = t.dim().0;
    let mut out = Array1::zeros(d);
    for a in 0..d {
        let mut acc = 0.0;
        for b in 0..d {
            let vb = v[b];
            if vb == 0.0 {
                continue;
            }
            for c in 0..d {
                acc += t[[a, b, c]] * vb * v[c];
            }
        }
        out[a] = acc;
    }
    out
}

/// Trilinear form T(u, v, w).
pub fn apply_trilinear(
    t: &Array3<f64>,
    u: ArrayView1<f64>,
    v: ArrayView1<f64>,
    w: ArrayView1<f64>,
) -> f64 {
    let d = t.dim().0;
    let mut acc = 0.0;
    for a in 0..d {
        let ua = u[a];
        if ua == 0.0 {
            continue;
        }
        for b in 0..d {
            let uv = ua * v[b];
            if uv == 0.0 {
                continue;
            }
            for c in 0..d {
                acc += t[[a, b, c]] * uv * w[c];
            }
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn symmetrize_tensor_averages_permutations() {
        let mut t = Array3::zeros((2, 2, 2));
        t[[0, 0, 1]] = 6.0;
        let s = symmetrize_tensor(&t);
        assert!((s[[0, 0, 1]] - 2.0).abs() < 1e-15);
        assert!((s[[0, 1, 0]] - 2.0).abs() < 1e-15);
        assert!((s[[1, 0, 0]] - 2.0).abs() < 1e-15);
        assert!(s[[1, 1, 0]].abs() < 1e-15);
        assert!(symmetry_defect(&s) < 1e-15);
    }

    #[test]
    fn contraction_matches_rank_one_identity() {
        // T = v ox v ox v contracts to (W^T v) ox^3.
        let v = array![1.0, -2.0, 0.5];
        let t = outer3(v.view(), v.view(), v.view());
        let w = array![[0.2, 1.0], [0.4, -0.3], [-1.0, 0.7]];
        let got = contract_all_modes(&t, &w);
        let wv = w.t().dot(&v);
        let want = outer3(wv.view(), wv.view(), wv.view());
        for i in 0..2 {
            for j in 0..2 {
                for l in 0..2 {
                    assert!((got[[i, j, l]] - want[[i, j, l]]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn bilinear_and_trilinear_agree() {
        let v = array![0.3, 0.7];
        let mut t = Array3::zeros((2, 2, 2));
        for (idx, val) in t.iter_mut().enumerate() {
            *val = idx as f64 * 0.17 - 0.4;
        }
        let u = apply_bilinear(&t, v.view());
        let direct = apply_trilinear(&t, v.view(), v.view(), v.view());
        let via_bilinear = u.dot(&v);
        assert!((direct - via_bilinear).abs() < 1e-12);
    }
}
