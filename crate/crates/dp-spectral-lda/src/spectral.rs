//! Spectral decomposition stages: whitening from the second moment, tensor
//! contraction into the whitened space, simultaneous power iteration, and
//! the inverse map back to topic distributions.

use ndarray::{Array1, Array2, Array3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::corpus::LdaModel;
use crate::error::{Error, Result};
use crate::linalg::{qr_orthonormal, symmetric_eigen};
use crate::tensor::{apply_bilinear, apply_trilinear, contract_all_modes, symmetry_defect};

/// Singular values at or below this threshold count as rank collapse.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Default iteration cap for the power method.
pub const DEFAULT_MAX_ITERS: usize = 500;

/// Default subspace-change tolerance for the power method.
pub const DEFAULT_POWER_TOL: f64 = 1e-10;

/// Whitening transform derived from a second-moment matrix.
///
/// `w` maps word space to the k-dimensional whitened space, `w_pinv` is its
/// pseudo-inverse, and `singular_values` holds the top min(d, k+1) singular
/// values of the symmetrized source matrix in descending order (the extra
/// value past k feeds the sensitivity bounds; it is 0 when k = d).
#[derive(Debug, Clone)]
pub struct Whitening {
    pub w: Array2<f64>,
    pub w_pinv: Array2<f64>,
    pub singular_values: Vec<f64>,
    pub k: usize,
}

impl Whitening {
    pub fn sigma_1(&self) -> f64 {
        self.singular_values[0]
    }

    pub fn sigma_k(&self) -> f64 {
        self.singular_values[self.k - 1]
    }

    /// Singular value k+1, or 0 when the matrix has no residual spectrum.
    pub fn sigma_k1(&self) -> f64 {
        self.singular_values.get(self.k).copied().unwrap_or(0.0)
    }
}

/// Whitening from the top-k eigenpairs of the symmetrized input:
/// W = U_k diag(sigma_i^{-1/2}), W^+ = diag(sigma_i^{1/2}) U_k^T, so
/// W^T M2_k W = I_k for the rank-k truncation M2_k.
pub fn whiten(m2: &Array2<f64>, k: usize) -> Result<Whitening> {
    let d = m2.nrows();
    if m2.ncols() != d {
        return Err(Error::ShapeMismatch(format!(
            "second moment must be square, got {}x{}",
            d,
            m2.ncols()
        )));
    }
    if k == 0 || k > d {
        return Err(Error::InvalidArgument(format!("need 1 <= k <= d, got k={} d={}", k, d)));
    }
    let sym = crate::tensor::symmetrize_matrix(m2);
    let (values, vectors) = symmetric_eigen(&sym);
    let sigma_k = values[k - 1];
    if !(sigma_k > RANK_TOLERANCE) {
        return Err(Error::RankDeficient { k, value: sigma_k });
    }
    let mut w = Array2::zeros((d, k));
    let mut w_pinv = Array2::zeros((k, d));
    for j in 0..k {
        let s = values[j];
        let inv_root = 1.0 / s.sqrt();
        let root = s.sqrt();
        for i in 0..d {
            w[[i, j]] = vectors[[i, j]] * inv_root;
            w_pinv[[j, i]] = vectors[[i, j]] * root;
        }
    }
    let mut singular_values: Vec<f64> = values.iter().take(k).copied().collect();
    if k < d {
        singular_values.push(values[k].max(0.0));
    }
    Ok(Whitening { w, w_pinv, singular_values, k })
}

/// Contract a third-moment tensor with the whitening map on every mode,
/// producing the k x k x k whitened tensor.
pub fn whiten_tensor(m3: &Array3<f64>, wh: &Whitening) -> Result<Array3<f64>> {
    let (d0, d1, d2) = m3.dim();
    if d0 != d1 || d1 != d2 || d0 != wh.w.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "tensor {}x{}x{} does not match whitening rows {}",
            d0,
            d1,
            d2,
            wh.w.nrows()
        )));
    }
    Ok(contract_all_modes(m3, &wh.w))
}

/// Result of the simultaneous power iteration: orthonormal eigenvector
/// columns paired with nonnegative eigenvalues, sorted by descending
/// eigenvalue, plus convergence diagnostics. Non-convergence is reported in
/// the flag, not as an error.
#[derive(Debug, Clone)]
pub struct SpectralFactors {
    pub vectors: Array2<f64>,
    pub eigenvalues: Array1<f64>,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// Simultaneous power iteration on a symmetric k x k x k tensor.
///
/// Starts from the QR factor of a seeded Gaussian matrix, repeatedly maps
/// every column through v -> T(I, v, v) and re-orthonormalizes with the
/// deterministic QR sign convention. Stops when the per-column projector
/// change sqrt(sum_j |v'_j v'_j^T - v_j v_j^T|_F^2) drops to `tol` (the
/// projector form ignores sign flips) or after `max_iters` sweeps.
pub fn simultaneous_power(
    t: &Array3<f64>,
    max_iters: usize,
    tol: f64,
    seed: u64,
) -> Result<SpectralFactors> {
    let (k0, k1, k2) = t.dim();
    if k0 != k1 || k1 != k2 {
        return Err(Error::ShapeMismatch(format!("tensor must be cubic, got {}x{}x{}", k0, k1, k2)));
    }
    let k = k0;
    if k == 0 {
        return Err(Error::InvalidArgument("tensor must be nonempty".into()));
    }
    if symmetry_defect(t) > 1e-8 {
        return Err(Error::NotSymmetric);
    }
    if max_iters == 0 || !(tol > 0.0) {
        return Err(Error::InvalidArgument("need max_iters >= 1 and tol > 0".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut init = Array2::zeros((k, k));
    for i in 0..k {
        for j in 0..k {
            init[[i, j]] = StandardNormal.sample(&mut rng);
        }
    }
    let mut v = qr_orthonormal(&init);

    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    while iterations < max_iters {
        let mut u = Array2::zeros((k, k));
        for j in 0..k {
            let col = apply_bilinear(t, v.column(j));
            u.column_mut(j).assign(&col);
        }
        let v_new = qr_orthonormal(&u);
        let mut change = 0.0;
        for j in 0..k {
            for a in 0..k {
                for b in 0..k {
                    let p_new = v_new[[a, j]] * v_new[[b, j]];
                    let p_old = v[[a, j]] * v[[b, j]];
                    change += (p_new - p_old) * (p_new - p_old);
                }
            }
        }
        residual = change.sqrt();
        v = v_new;
        iterations += 1;
        if residual <= tol {
            converged = true;
            break;
        }
    }

    // Sign convention: eigenvalues nonnegative; a zero eigenvalue leaves the
    // sign fixed by the first nonzero coordinate.
    let mut eigenvalues = Array1::zeros(k);
    for j in 0..k {
        let lam = apply_trilinear(t, v.column(j), v.column(j), v.column(j));
        if lam < 0.0 {
            for i in 0..k {
                v[[i, j]] = -v[[i, j]];
            }
            eigenvalues[j] = -lam;
        } else if lam == 0.0 {
            if let Some(first) = v.column(j).iter().find(|x| **x != 0.0) {
                if *first < 0.0 {
                    for i in 0..k {
                        v[[i, j]] = -v[[i, j]];
                    }
                }
            }
            eigenvalues[j] = 0.0;
        } else {
            eigenvalues[j] = lam;
        }
    }

    // Stable sort by descending eigenvalue keeps QR order on ties.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eigenvalues[b].partial_cmp(&eigenvalues[a]).unwrap());
    let mut vectors = Array2::zeros((k, k));
    let mut values = Array1::zeros(k);
    for (dst, &src) in order.iter().enumerate() {
        values[dst] = eigenvalues[src];
        vectors.column_mut(dst).assign(&v.column(src));
    }

    Ok(SpectralFactors { vectors, eigenvalues: values, iterations, residual, converged })
}

/// Smallest quarter-gap of the eigenvalue sequence, treating the value after
/// the last as 0: min_i (lambda_i - lambda_{i+1}) / 4.
pub fn spectral_gap(eigenvalues: &Array1<f64>) -> f64 {
    let k = eigenvalues.len();
    let mut gap = f64::INFINITY;
    for i in 0..k {
        let next = if i + 1 < k { eigenvalues[i + 1] } else { 0.0 };
        gap = gap.min((eigenvalues[i] - next) / 4.0);
    }
    gap
}

/// Map whitened factors back to topic space.
///
/// Each eigenpair scales to a topic column via the pseudo-inverse transpose;
/// columns are clipped to nonnegative and renormalized onto the simplex, and
/// the recovered weights are rescaled to sum to alpha0.
pub fn unwhiten(factors: &SpectralFactors, wh: &Whitening, alpha0: f64) -> Result<LdaModel> {
    if !(alpha0 > 0.0) {
        return Err(Error::InvalidArgument(format!("alpha0 must be positive, got {}", alpha0)));
    }
    let k = factors.vectors.ncols();
    if k != wh.k {
        return Err(Error::ShapeMismatch(format!(
            "factor count {} does not match whitening rank {}",
            k, wh.k
        )));
    }
    for (i, &lam) in factors.eigenvalues.iter().enumerate() {
        if !(lam > 0.0) {
            return Err(Error::NonPositiveEigenvalue { index: i, value: lam });
        }
    }
    let d = wh.w_pinv.ncols();
    let c_alpha = (alpha0 + 2.0) / (2.0 * ((alpha0 + 1.0) * alpha0).sqrt());

    let mut topics = Array2::zeros((d, k));
    let mut alpha = Array1::zeros(k);
    for i in 0..k {
        let lam = factors.eigenvalues[i];
        let scale = c_alpha * lam;
        // raw column = scale * (W^+)^T v_i
        let mut col = Array1::zeros(d);
        for w in 0..d {
            let mut acc = 0.0;
            for j in 0..k {
                acc += wh.w_pinv[[j, w]] * factors.vectors[[j, i]];
            }
            col[w] = scale * acc;
        }
        col.mapv_inplace(|x| x.max(0.0));
        let sum = col.sum();
        if !(sum > 0.0) {
            return Err(Error::TopicCollapsed { index: i });
        }
        topics.column_mut(i).assign(&(&col / sum));
        alpha[i] = 4.0 * (alpha0 + 1.0) * alpha0 / ((alpha0 + 2.0).powi(2) * lam * lam);
    }
    let s = alpha.sum();
    alpha *= alpha0 / s;
    Ok(LdaModel { topics, alpha, alpha0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::outer3;
    use ndarray::array;

    fn example_m2() -> Array2<f64> {
        array![
            [0.30, 0.10, 0.02],
            [0.10, 0.25, 0.05],
            [0.02, 0.05, 0.20]
        ]
    }

    #[test]
    fn whitening_identity_holds() {
        let m2 = example_m2();
        for k in 1..=3usize {
            let wh = whiten(&m2, k).unwrap();
            // Rank-k truncation from the stored eigenpairs: W^T M2_k W = I.
            // Reconstruct via the whitening itself: w_pinv holds sqrt-scaled
            // eigenvectors, so M2_k = w_pinv^T w_pinv.
            let m2k = wh.w_pinv.t().dot(&wh.w_pinv);
            let ident = wh.w.t().dot(&m2k).dot(&wh.w);
            for i in 0..k {
                for j in 0..k {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((ident[[i, j]] - want).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn whitening_truncation_is_best_rank_k() {
        // The k=d whitening reproduces the full matrix.
        let m2 = example_m2();
        let wh = whiten(&m2, 3).unwrap();
        let recon = wh.w_pinv.t().dot(&wh.w_pinv);
        for i in 0..3 {
            for j in 0..3 {
                assert!((recon[[i, j]] - m2[[i, j]]).abs() < 1e-10);
            }
        }
        assert_eq!(wh.singular_values.len(), 3);
    }

    #[test]
    fn whiten_rejects_rank_deficiency() {
        let m2 = array![[1.0, 0.0], [0.0, 0.0]];
        match whiten(&m2, 2) {
            Err(Error::RankDeficient { k: 2, .. }) => {}
            other => panic!("unexpected {:?}", other),
        }
        assert!(whiten(&m2, 1).is_ok());
    }

    #[test]
    fn pinv_identities() {
        let m2 = example_m2();
        let wh = whiten(&m2, 2).unwrap();
        // W^+ W = I_k
        let id = wh.w_pinv.dot(&wh.w);
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((id[[i, j]] - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn power_method_recovers_orthogonal_decomposition() {
        // T = 3 e1^3 + 1.5 e2^3 + 0.5 e3^3 rotated by a known orthogonal map.
        let q = qr_orthonormal(&array![
            [0.8, -0.3, 0.1],
            [0.2, 0.9, -0.4],
            [-0.1, 0.2, 0.7]
        ]);
        let lams = [3.0, 1.5, 0.5];
        let mut t = Array3::zeros((3, 3, 3));
        for (idx, &lam) in lams.iter().enumerate() {
            let v = q.column(idx).to_owned();
            t = t + &(outer3(v.view(), v.view(), v.view()) * lam);
        }
        let f = simultaneous_power(&t, DEFAULT_MAX_ITERS, DEFAULT_POWER_TOL, 4).unwrap();
        assert!(f.converged, "residual {}", f.residual);
        for (idx, &lam) in lams.iter().enumerate() {
            assert!((f.eigenvalues[idx] - lam).abs() < 1e-8, "eigenvalue {}", idx);
            let dot: f64 = f
                .vectors
                .column(idx)
                .iter()
                .zip(q.column(idx).iter())
                .map(|(a, b)| a * b)
                .sum();
            assert!((dot.abs() - 1.0).abs() < 1e-7, "vector {} dot {}", idx, dot);
        }
    }

    #[test]
    fn power_method_rejects_asymmetric_input() {
        let mut t = Array3::zeros((2, 2, 2));
        t[[0, 0, 1]] = 1.0;
        match simultaneous_power(&t, 10, 1e-8, 0) {
            Err(Error::NotSymmetric) => {}
            other => panic!("unexpected {:?}", other),
        }
    }

    #[test]
    fn power_method_flags_non_convergence() {
        let v = array![1.0, 0.0];
        let w = array![0.0, 1.0];
        let t = outer3(v.view(), v.view(), v.view()) * 1.0
            + outer3(w.view(), w.view(), w.view()) * 1.0;
        // One iteration cannot meet a tolerance this tight from random init.
        let f = simultaneous_power(&t, 1, 1e-16, 9).unwrap();
        assert!(!f.converged);
        assert_eq!(f.iterations, 1);
        assert!(f.residual > 1e-16);
    }

    #[test]
    fn spectral_gap_uses_quarter_differences() {
        let vals = array![2.0, 1.0, 0.2];
        // gaps: (2-1)/4, (1-0.2)/4, (0.2-0)/4 -> min is 0.05
        assert!((spectral_gap(&vals) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn unwhiten_rejects_nonpositive_eigenvalues() {
        let m2 = example_m2();
        let wh = whiten(&m2, 2).unwrap();
        let f = SpectralFactors {
            vectors: Array2::eye(2),
            eigenvalues: array![1.0, -0.5],
            iterations: 1,
            residual: 0.0,
            converged: true,
        };
        match unwhiten(&f, &wh, 1.0) {
            Err(Error::NonPositiveEigenvalue { index: 1, .. }) => {}
            other => panic!("unexpected {:?}", other),
        }
    }
}
