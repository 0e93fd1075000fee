//! Noise mechanisms, budget accounting, and the two-phase calibration that
//! releases private lower bounds for data-dependent sensitivities.
//!
//! All randomness flows through seeded ChaCha streams; Laplace draws go
//! through an explicit inverse-CDF map so tests can force exact quantiles.

use std::fmt::Write as _;

use ndarray::{Array1, Array2, Array3};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// An (epsilon, delta) privacy budget for one mechanism invocation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivacyParams {
    pub epsilon: f64,
    pub delta: f64,
    /// Permit epsilon > 1 in the Gaussian calibration. The closed form is
    /// only a valid guarantee for epsilon <= 1, so this is an explicit
    /// escape hatch, not a default.
    pub allow_large_epsilon: bool,
}

impl PrivacyParams {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be positive and finite, got {}",
                epsilon
            )));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::InvalidArgument(format!(
                "delta must lie in [0, 1), got {}",
                delta
            )));
        }
        Ok(PrivacyParams { epsilon, delta, allow_large_epsilon: false })
    }

    pub fn with_large_epsilon(mut self) -> Self {
        self.allow_large_epsilon = true;
        self
    }
}

/// Gaussian mechanism noise scale: sigma = sensitivity * sqrt(2 ln(1.25/delta)) / epsilon.
/// Requires delta > 0 and, unless overridden, epsilon <= 1.
pub fn gaussian_sigma(sensitivity: f64, params: &PrivacyParams) -> Result<f64> {
    if !(sensitivity >= 0.0) || !sensitivity.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "sensitivity must be nonnegative and finite, got {}",
            sensitivity
        )));
    }
    if !(params.delta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "gaussian mechanism needs delta > 0, got {}",
            params.delta
        )));
    }
    if params.epsilon > 1.0 && !params.allow_large_epsilon {
        return Err(Error::InvalidArgument(format!(
            "gaussian calibration requires epsilon <= 1 (got {}); set the large-epsilon override to proceed",
            params.epsilon
        )));
    }
    Ok(sensitivity * (2.0 * (1.25 / params.delta).ln()).sqrt() / params.epsilon)
}

/// Laplace mechanism scale: b = sensitivity / epsilon.
pub fn laplace_scale(sensitivity: f64, epsilon: f64) -> Result<f64> {
    if !(sensitivity >= 0.0) || !sensitivity.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "sensitivity must be nonnegative and finite, got {}",
            sensitivity
        )));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {}", epsilon)));
    }
    Ok(sensitivity / epsilon)
}

/// Inverse CDF of the centered Laplace distribution with the given scale,
/// evaluated at u in (0, 1). u = 0.5 maps to 0; tests can force any quantile.
pub fn laplace_from_uniform(u: f64, scale: f64) -> f64 {
    let centered = u - 0.5;
    -scale * centered.signum() * (1.0 - 2.0 * centered.abs()).ln()
}

/// One centered Laplace draw via the inverse CDF.
pub fn sample_laplace(scale: f64, rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.random::<f64>().clamp(1e-16, 1.0 - 1e-16);
    laplace_from_uniform(u, scale)
}

/// Deterministic per-role sub-seed derivation (SplitMix64 of base xor role),
/// so each noise application consumes an independent stream.
pub fn derive_seed(base: u64, role: u64) -> u64 {
    let mut z = base ^ role.wrapping_mul(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn normal(sigma: f64) -> Result<Normal<f64>> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "noise scale must be nonnegative and finite, got {}",
            sigma
        )));
    }
    Normal::new(0.0, sigma).map_err(|e| Error::InvalidArgument(e.to_string()))
}

/// Add iid Gaussian noise to every entry of a vector. sigma = 0 copies.
pub fn perturb_vector(x: &Array1<f64>, sigma: f64, seed: u64) -> Result<Array1<f64>> {
    let dist = normal(sigma)?;
    if sigma == 0.0 {
        return Ok(x.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(x.mapv(|v| v + dist.sample(&mut rng)))
}

/// Add symmetric Gaussian noise to a symmetric matrix: one draw per
/// unordered index pair, mirrored, so the output stays exactly symmetric.
pub fn perturb_symmetric_matrix(x: &Array2<f64>, sigma: f64, seed: u64) -> Result<Array2<f64>> {
    let dist = normal(sigma)?;
    let d = x.nrows();
    if x.ncols() != d {
        return Err(Error::ShapeMismatch(format!("matrix must be square, got {}x{}", d, x.ncols())));
    }
    if sigma == 0.0 {
        return Ok(x.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = x.clone();
    for i in 0..d {
        for j in i..d {
            let z = dist.sample(&mut rng);
            out[[i, j]] += z;
            if i != j {
                out[[j, i]] += z;
            }
        }
    }
    Ok(out)
}

/// Add symmetric Gaussian noise to a symmetric tensor: one draw per
/// canonical multiset i <= j <= l, copied onto every distinct permutation.
pub fn perturb_symmetric_tensor(x: &Array3<f64>, sigma: f64, seed: u64) -> Result<Array3<f64>> {
    let dist = normal(sigma)?;
    let (d0, d1, d2) = x.dim();
    if d0 != d1 || d1 != d2 {
        return Err(Error::ShapeMismatch(format!(
            "tensor must be cubic, got {}x{}x{}",
            d0, d1, d2
        )));
    }
    if sigma == 0.0 {
        return Ok(x.clone());
    }
    let d = d0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = x.clone();
    for i in 0..d {
        for j in i..d {
            for l in j..d {
                let z = dist.sample(&mut rng);
                let mut seen: Vec<(usize, usize, usize)> = Vec::with_capacity(6);
                for perm in [
                    (i, j, l),
                    (i, l, j),
                    (j, i, l),
                    (j, l, i),
                    (l, i, j),
                    (l, j, i),
                ] {
                    if !seen.contains(&perm) {
                        out[[perm.0, perm.1, perm.2]] += z;
                        seen.push(perm);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// One privacy charge against the budget.
#[derive(Debug, Clone, PartialEq)]
pub struct Charge {
    pub label: String,
    pub epsilon: f64,
    pub delta: f64,
}

/// Ordered record of privacy charges; totals compose by exact summation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BudgetLedger {
    charges: Vec<Charge>,
}

impl BudgetLedger {
    pub fn new() -> Self {
        BudgetLedger { charges: Vec::new() }
    }

    pub fn charge(&mut self, label: &str, epsilon: f64, delta: f64) {
        self.charges.push(Charge { label: label.to_string(), epsilon, delta });
    }

    pub fn extend(&mut self, charges: &[Charge]) {
        self.charges.extend_from_slice(charges);
    }

    pub fn charges(&self) -> &[Charge] {
        &self.charges
    }

    pub fn is_empty(&self) -> bool {
        self.charges.is_empty()
    }

    /// Render as CSV: header, one line per charge, and a totals row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,epsilon,delta\n");
        for c in &self.charges {
            let _ = writeln!(out, "{},{},{}", c.label, c.epsilon, c.delta);
        }
        let (eps, delta) = compose(self);
        let _ = writeln!(out, "total,{},{}", eps, delta);
        out
    }
}

/// Basic composition: sum the epsilons and deltas in charge order.
pub fn compose(ledger: &BudgetLedger) -> (f64, f64) {
    let mut eps = 0.0;
    let mut delta = 0.0;
    for c in &ledger.charges {
        eps += c.epsilon;
        delta += c.delta;
    }
    (eps, delta)
}

/// The shift subtracted from a Laplace-noised lower bound so it stays below
/// the true value except with probability 2 delta1^2.
pub fn calibration_shift(n_docs: usize, eps1: f64, delta1: f64) -> Result<f64> {
    if n_docs == 0 {
        return Err(Error::InvalidArgument("need at least one document".into()));
    }
    if !(eps1 > 0.0) {
        return Err(Error::InvalidArgument(format!("eps1 must be positive, got {}", eps1)));
    }
    if !(delta1 > 0.0 && delta1 < 1.0) {
        return Err(Error::InvalidArgument(format!("delta1 must lie in (0, 1), got {}", delta1)));
    }
    Ok(2.0 / (n_docs as f64 * eps1) * (1.0 / (2.0 * delta1)).ln())
}

/// Request to release a private lower bound of the eigenvalue gap alongside
/// the singular-value bound.
#[derive(Debug, Clone, Copy)]
pub struct GapRelease {
    pub gamma_s: f64,
    pub eps: f64,
    pub delta: f64,
}

/// Outcome of the two-phase calibration.
#[derive(Debug, Clone)]
pub struct CalibrationResult {
    /// Private lower bound of the k-th singular value.
    pub sigma_k_tilde: f64,
    /// Private lower bound of the eigenvalue gap, when requested.
    pub gap_tilde: Option<f64>,
    /// Local sensitivity evaluated at the released lower bounds.
    pub local_sensitivity: f64,
    /// Gaussian noise scale calibrated to that sensitivity.
    pub noise_sigma: f64,
    /// Charges incurred: the releases, then the mechanism itself.
    pub charges: Vec<Charge>,
}

/// Two-phase calibration: privately lower-bound the data-dependent spectral
/// quantities with shifted Laplace releases, evaluate the local-sensitivity
/// template at the released bounds, and calibrate Gaussian noise to it.
///
/// sigma_hat = sigma_k + Lap(1/(N eps1)); the released bound subtracts
/// 2/(N eps1) ln(1/(2 delta1)) and clamps at zero; the gap release works the
/// same way with its own budget. A zero released bound is a typed failure
/// because the local sensitivity is unbounded there.
pub fn calibrate_procedure1<F>(
    ls_template: F,
    sigma_k: f64,
    n_docs: usize,
    eps1: f64,
    delta1: f64,
    gap: Option<GapRelease>,
    mech: &PrivacyParams,
    mech_label: &str,
    seed: u64,
) -> Result<CalibrationResult>
where
    F: Fn(f64, Option<f64>) -> Result<f64>,
{
    if n_docs == 0 {
        return Err(Error::InvalidArgument("need at least one document".into()));
    }
    let n = n_docs as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let scale = laplace_scale(1.0, n * eps1)?;
    let sigma_hat = sigma_k + sample_laplace(scale, &mut rng);
    let sigma_tilde = (sigma_hat - calibration_shift(n_docs, eps1, delta1)?).max(0.0);
    if sigma_tilde == 0.0 {
        return Err(Error::CalibrationCollapsed { quantity: "sigma_k" });
    }
    let mut charges = vec![Charge {
        label: "e1".into(),
        epsilon: eps1,
        delta: delta1,
    }];

    let gap_tilde = match gap {
        Some(g) => {
            let gscale = laplace_scale(1.0, n * g.eps)?;
            let gap_hat = g.gamma_s + sample_laplace(gscale, &mut rng);
            let gt = (gap_hat - calibration_shift(n_docs, g.eps, g.delta)?).max(0.0);
            if gt == 0.0 {
                return Err(Error::GapCollapsed);
            }
            charges.push(Charge { label: "e1p".into(), epsilon: g.eps, delta: g.delta });
            Some(gt)
        }
        None => None,
    };

    let local_sensitivity = ls_template(sigma_tilde, gap_tilde)?;
    let noise_sigma = gaussian_sigma(local_sensitivity, mech)?;
    charges.push(Charge { label: mech_label.into(), epsilon: mech.epsilon, delta: mech.delta });

    Ok(CalibrationResult { sigma_k_tilde: sigma_tilde, gap_tilde, local_sensitivity, noise_sigma, charges })
}
