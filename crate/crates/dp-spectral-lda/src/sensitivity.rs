//! Closed-form sensitivity bounds for every privatized quantity. All bounds
//! are worst-case over corpora differing in one document, measured in the
//! entrywise l1 norm for moment arrays and the l2 norm for released scalars
//! and vectors.

use crate::error::{Error, Result};

/// The privatized edges of the release graph. Labels name the quantity that
/// crosses the privacy boundary on that edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeId {
    /// Released lower bound of the k-th singular value.
    SigmaK,
    /// Released lower bound of the eigenvalue gap.
    Gap,
    /// Noised third-moment tensor.
    M3,
    /// Noised second moment feeding the whitening map.
    M2Whiten,
    /// Noised whitened tensor.
    WhitenedTensor,
    /// Noised decomposition output (whitened eigenpairs).
    Decomposition,
    /// Noised second moment feeding the inverse whitening map.
    M2Unwhiten,
    /// Noised final model (topics and weights).
    FinalOutput,
}

impl EdgeId {
    pub fn label(&self) -> &'static str {
        match self {
            EdgeId::SigmaK => "e1",
            EdgeId::Gap => "e1p",
            EdgeId::M3 => "e3",
            EdgeId::M2Whiten => "e4",
            EdgeId::WhitenedTensor => "e6",
            EdgeId::Decomposition => "e7",
            EdgeId::M2Unwhiten => "e8",
            EdgeId::FinalOutput => "e9",
        }
    }
}

/// Spectral quantities the data-dependent bounds are evaluated at.
#[derive(Debug, Clone, Copy)]
pub struct SpectralContext {
    pub alpha0: f64,
    pub n_docs: usize,
    pub k: usize,
    /// Largest singular value of the second moment.
    pub sigma_1: f64,
    /// k-th singular value of the second moment.
    pub sigma_k: f64,
    /// (k+1)-th singular value of the second moment (0 past full rank).
    pub sigma_k1: f64,
    /// Largest whitened-tensor eigenvalue.
    pub sigma1_t: f64,
    /// Quarter of the smallest eigenvalue gap of the whitened tensor.
    pub gamma_s: f64,
}

fn check_docs(n_docs: usize, minimum: usize) -> Result<f64> {
    if n_docs < minimum {
        return Err(Error::InvalidArgument(format!(
            "sensitivity needs at least {} documents, got {}",
            minimum, n_docs
        )));
    }
    Ok(n_docs as f64)
}

fn check_alpha0(alpha0: f64) -> Result<()> {
    if !alpha0.is_finite() || alpha0 < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "alpha0 must be finite and nonnegative, got {}",
            alpha0
        )));
    }
    Ok(())
}

/// l1 sensitivity of the corrected second-moment estimator.
pub fn sens_m2(alpha0: f64, n_docs: usize) -> Result<f64> {
    check_alpha0(alpha0)?;
    let n = check_docs(n_docs, 2)?;
    Ok(2.0 / n + 4.0 * alpha0 / ((alpha0 + 1.0) * n))
}

/// l1 sensitivity of the corrected third-moment estimator.
pub fn sens_m3(alpha0: f64, n_docs: usize) -> Result<f64> {
    check_alpha0(alpha0)?;
    let n = check_docs(n_docs, 3)?;
    Ok(2.0 / n
        + 4.0 * alpha0 / ((alpha0 + 2.0) * n)
        + 12.0 * alpha0 * alpha0 / ((alpha0 + 1.0) * (alpha0 + 2.0)) * (n - 1.0)
            / (n * (n - 2.0)))
}

/// Sensitivity of the whitened tensor, combining the second-moment
/// perturbation pushed through the whitening map with the third-moment
/// perturbation contracted into the whitened space.
pub fn sens_whitened_tensor(ctx: &SpectralContext) -> Result<f64> {
    check_alpha0(ctx.alpha0)?;
    let n = check_docs(ctx.n_docs, 3)?;
    let half_spectrum = 0.5 * (ctx.sigma_k + ctx.sigma_k1);
    if !(half_spectrum > 0.0) {
        return Err(Error::DegenerateSpectrum(ctx.sigma_k + ctx.sigma_k1));
    }
    let a0 = ctx.alpha0;
    let k = ctx.k as f64;
    let b_t = 1.0
        + 6.0 * a0 / (a0 + 2.0) * n / (n - 1.0)
        + 6.0 * a0 * a0 / ((a0 + 1.0) * (a0 + 2.0)) * n.powi(3) / (n * (n - 1.0) * (n - 2.0));
    let sm2 = sens_m2(ctx.alpha0, ctx.n_docs)?;
    let sm3 = sens_m3(ctx.alpha0, ctx.n_docs)?;
    let whiten_leg = b_t * (2.0 * k).powf(1.5) * sm2.powi(3)
        / (ctx.sigma_k * half_spectrum.sqrt()).powi(3);
    let tensor_leg = sm3 * k.powf(1.5) / half_spectrum.powf(1.5);
    Ok(whiten_leg + tensor_leg)
}

/// Sensitivity of the decomposition output given the whitened-tensor
/// sensitivity and the eigenvalue gap.
pub fn sens_decomposition_output(delta_t: f64, k: usize, gamma_s: f64) -> Result<f64> {
    if !(gamma_s > 0.0) {
        return Err(Error::DegenerateGap(gamma_s));
    }
    if !(delta_t >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tensor sensitivity must be nonnegative, got {}",
            delta_t
        )));
    }
    Ok(2.0 * (k as f64).sqrt() * delta_t / gamma_s)
}

/// Sensitivity of the final model output, propagating the decomposition and
/// whitening perturbations through the inverse map.
pub fn sens_final_output(ctx: &SpectralContext) -> Result<f64> {
    if !(ctx.alpha0 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha0 must be positive, got {}",
            ctx.alpha0
        )));
    }
    if !(ctx.gamma_s > 0.0) {
        return Err(Error::DegenerateGap(ctx.gamma_s));
    }
    let delta_t = sens_whitened_tensor(ctx)?;
    let decomp = sens_decomposition_output(delta_t, ctx.k, ctx.gamma_s)?;
    let sm2 = sens_m2(ctx.alpha0, ctx.n_docs)?;
    let a0 = ctx.alpha0;
    let c_alpha = (a0 + 2.0) / (2.0 * ((a0 + 1.0) * a0).sqrt());
    let term1 = c_alpha * ctx.sigma1_t * ctx.sigma_1.sqrt() * decomp;
    let term2 = c_alpha * ctx.sigma1_t * (ctx.sigma_1.sqrt() / ctx.sigma_k) * sm2;
    let term3 = c_alpha * (ctx.sigma_1 + sm2).sqrt() * decomp;
    Ok(term1 + term2 + term3)
}

/// Sensitivity of any single singular value of the second moment.
pub fn sens_sigma_k(n_docs: usize) -> Result<f64> {
    let n = check_docs(n_docs, 1)?;
    Ok(2.0 / n)
}

/// Sensitivity of the eigenvalue gap.
pub fn sens_gap(n_docs: usize) -> Result<f64> {
    let n = check_docs(n_docs, 1)?;
    Ok(2.0 / n)
}

/// Per-entry sensitivity of the topic-word sufficient statistics.
pub fn sens_suffstats(vocab: usize, n_docs: usize) -> Result<f64> {
    if vocab == 0 {
        return Err(Error::InvalidArgument("vocabulary must be nonempty".into()));
    }
    let n = check_docs(n_docs, 1)?;
    Ok(vocab as f64 / n)
}
