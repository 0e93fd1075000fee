//! End-to-end fits: the non-private spectral pipeline and the four noise
//! placements, each with its own budget layout and dataflow.
//!
//! Noise is only ever injected on the edges a configuration declares; the
//! applied scales are recorded per edge in the diagnostics so tests can
//! assert the dataflow matches the declaration. Ledger charges follow the
//! order noise is applied, so composed totals are reproducible sums.

use std::fmt::Write as _;

use ndarray::{Array1, Array2, Array3};

use crate::corpus::{validate, Corpus, LdaModel};
use crate::error::{Error, Result};
use crate::moments::{m1_hat, m2_hat, m3_hat};
use crate::privacy::{
    calibrate_procedure1, derive_seed, gaussian_sigma, perturb_symmetric_matrix,
    perturb_symmetric_tensor, perturb_vector, BudgetLedger, GapRelease, PrivacyParams,
};
use crate::sensitivity::{
    sens_m2, sens_m3, sens_whitened_tensor, sens_decomposition_output, sens_final_output,
    EdgeId, SpectralContext,
};
use crate::spectral::{
    simultaneous_power, spectral_gap, unwhiten, whiten, whiten_tensor, SpectralFactors,
    Whitening, DEFAULT_MAX_ITERS, DEFAULT_POWER_TOL,
};

/// Which fit variant ran.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfigId {
    NonPrivate,
    Config1,
    Config2,
    Config3,
    Config4,
}

impl ConfigId {
    pub fn label(&self) -> &'static str {
        match self {
            ConfigId::NonPrivate => "none",
            ConfigId::Config1 => "1",
            ConfigId::Config2 => "2",
            ConfigId::Config3 => "3",
            ConfigId::Config4 => "4",
        }
    }

    /// The edges this configuration adds noise on, in application order.
    pub fn noised_edges(&self) -> &'static [EdgeId] {
        match self {
            ConfigId::NonPrivate => &[],
            ConfigId::Config1 => &[EdgeId::M3, EdgeId::M2Whiten, EdgeId::M2Unwhiten],
            ConfigId::Config2 => &[EdgeId::WhitenedTensor, EdgeId::M2Unwhiten],
            ConfigId::Config3 => &[EdgeId::Decomposition, EdgeId::M2Unwhiten],
            ConfigId::Config4 => &[EdgeId::FinalOutput],
        }
    }
}

/// Budget for one shifted-Laplace release inside the calibration.
#[derive(Debug, Clone, Copy)]
pub struct CalibBudget {
    pub eps: f64,
    pub delta: f64,
}

/// Budgets for the moment-noising configuration: third moment, whitening
/// copy, and inverse-whitening copy of the second moment.
#[derive(Debug, Clone)]
pub struct Config1Budgets {
    pub e3: PrivacyParams,
    pub e4: PrivacyParams,
    pub e8: PrivacyParams,
}

/// Budgets for the whitened-tensor configuration.
#[derive(Debug, Clone)]
pub struct Config2Budgets {
    pub sigma_release: CalibBudget,
    pub e6: PrivacyParams,
    pub e8: PrivacyParams,
}

/// Budgets for the decomposition-output configuration.
#[derive(Debug, Clone)]
pub struct Config3Budgets {
    pub sigma_release: CalibBudget,
    pub gap_release: CalibBudget,
    pub e7: PrivacyParams,
    pub e8: PrivacyParams,
}

/// Budgets for the final-output configuration.
#[derive(Debug, Clone)]
pub struct Config4Budgets {
    pub sigma_release: CalibBudget,
    pub gap_release: CalibBudget,
    pub e9: PrivacyParams,
}

/// Fit variant selector with its budgets.
#[derive(Debug, Clone)]
pub enum FitConfig {
    NonPrivate,
    Config1(Config1Budgets),
    Config2(Config2Budgets),
    Config3(Config3Budgets),
    Config4(Config4Budgets),
}

impl FitConfig {
    pub fn id(&self) -> ConfigId {
        match self {
            FitConfig::NonPrivate => ConfigId::NonPrivate,
            FitConfig::Config1(_) => ConfigId::Config1,
            FitConfig::Config2(_) => ConfigId::Config2,
            FitConfig::Config3(_) => ConfigId::Config3,
            FitConfig::Config4(_) => ConfigId::Config4,
        }
    }
}

/// Corpus moment estimates bundled with the document count the sensitivity
/// bounds refer to.
#[derive(Debug, Clone)]
pub struct MomentSet {
    pub m1: Array1<f64>,
    pub m2: Array2<f64>,
    pub m3: Array3<f64>,
    pub n_docs: usize,
}

/// Compute the corpus moments once; validates the corpus first.
pub fn compute_moments(corpus: &Corpus, alpha0: f64) -> Result<MomentSet> {
    validate(corpus)?;
    Ok(MomentSet {
        m1: m1_hat(corpus)?,
        m2: m2_hat(corpus, alpha0)?,
        m3: m3_hat(corpus, alpha0)?,
        n_docs: corpus.n_docs(),
    })
}

/// Per-fit diagnostics: the spectrum the pipeline ran on, released bounds,
/// applied noise scales by edge, and power-iteration convergence.
#[derive(Debug, Clone)]
pub struct Diagnostics {
    /// sigma_1 .. sigma_{k+1} of the second moment used for whitening
    /// (the noisy copy when that copy drives the pipeline).
    pub singular_values: Vec<f64>,
    /// Quarter eigenvalue gap of the decomposition actually used.
    pub gamma_s: Option<f64>,
    /// Released singular-value lower bound, when a calibration ran.
    pub sigma_k_tilde: Option<f64>,
    /// Released gap lower bound, when requested.
    pub gap_tilde: Option<f64>,
    /// Noise standard deviation per privatized edge, in application order.
    pub noise_sigmas: Vec<(EdgeId, f64)>,
    pub power_iterations: usize,
    pub power_residual: f64,
    pub power_converged: bool,
}

impl Diagnostics {
    /// Render as key=value lines; absent optional fields are omitted.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let svs: Vec<String> = self.singular_values.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "singular_values={}", svs.join("|"));
        if let Some(g) = self.gamma_s {
            let _ = writeln!(out, "gamma_s={}", g);
        }
        if let Some(s) = self.sigma_k_tilde {
            let _ = writeln!(out, "sigma_k_tilde={}", s);
        }
        if let Some(g) = self.gap_tilde {
            let _ = writeln!(out, "gap_tilde={}", g);
        }
        for (edge, sigma) in &self.noise_sigmas {
            let _ = writeln!(out, "noise_sigma_{}={}", edge.label(), sigma);
        }
        let _ = writeln!(out, "power_iterations={}", self.power_iterations);
        let _ = writeln!(out, "power_residual={}", self.power_residual);
        let _ = writeln!(out, "power_converged={}", self.power_converged);
        out
    }
}

/// A fitted model with its privacy ledger and diagnostics.
#[derive(Debug, Clone)]
pub struct FitReport {
    pub model: LdaModel,
    pub ledger: BudgetLedger,
    pub diagnostics: Diagnostics,
}

// Seed roles: one independent stream per noise site.
const ROLE_POWER: u64 = 0;
const ROLE_CALIBRATION: u64 = 1;
const ROLE_E3: u64 = 3;
const ROLE_E4: u64 = 4;
const ROLE_E6: u64 = 6;
const ROLE_E7_VECTORS: u64 = 7;
const ROLE_E7_VALUES: u64 = 71;
const ROLE_E8: u64 = 8;
const ROLE_E9_TOPICS: u64 = 9;
const ROLE_E9_ALPHA: u64 = 91;

fn check_fit_args(d: usize, k: usize, alpha0: f64) -> Result<()> {
    if k == 0 || k > d {
        return Err(Error::InvalidArgument(format!("need 1 <= k <= d, got k={} d={}", k, d)));
    }
    if !(alpha0 > 0.0) {
        return Err(Error::InvalidArgument(format!("alpha0 must be positive, got {}", alpha0)));
    }
    Ok(())
}

/// Whitening of a privatized second moment: rank collapse is a typed
/// pipeline failure rather than an input error.
fn whiten_private(m2: &Array2<f64>, k: usize) -> Result<Whitening> {
    whiten(m2, k).map_err(|e| match e {
        Error::RankDeficient { k, .. } => Error::PrivatizedSpectrumCollapsed { k },
        other => other,
    })
}

fn power_seed(seed: u64) -> u64 {
    derive_seed(seed, ROLE_POWER)
}

/// Fit on precomputed moments. The non-private path runs whitening, tensor
/// contraction, simultaneous power iteration, and the inverse map; the
/// private paths inject noise on their declared edges only.
pub fn fit_moments(
    moments: &MomentSet,
    k: usize,
    alpha0: f64,
    config: &FitConfig,
    seed: u64,
) -> Result<FitReport> {
    check_fit_args(moments.m2.nrows(), k, alpha0)?;
    match config {
        FitConfig::NonPrivate => fit_moments_nonprivate(moments, k, alpha0, seed),
        FitConfig::Config1(b) => fit_moments_config1(moments, k, alpha0, b, seed),
        FitConfig::Config2(b) => fit_moments_config2(moments, k, alpha0, b, seed),
        FitConfig::Config3(b) => fit_moments_config3(moments, k, alpha0, b, seed),
        FitConfig::Config4(b) => fit_moments_config4(moments, k, alpha0, b, seed),
    }
}

/// Validate the corpus, estimate moments, and fit with the given variant.
pub fn fit(
    corpus: &Corpus,
    k: usize,
    alpha0: f64,
    config: &FitConfig,
    seed: u64,
) -> Result<FitReport> {
    check_fit_args(corpus.vocab_size(), k, alpha0)?;
    let moments = compute_moments(corpus, alpha0)?;
    fit_moments(&moments, k, alpha0, config, seed)
}

/// Non-private spectral fit.
pub fn fit_nonprivate(corpus: &Corpus, k: usize, alpha0: f64, seed: u64) -> Result<FitReport> {
    fit(corpus, k, alpha0, &FitConfig::NonPrivate, seed)
}

/// Noise the raw moments, then run the clean pipeline on them.
pub fn fit_config1(
    corpus: &Corpus,
    k: usize,
    alpha0: f64,
    budgets: &Config1Budgets,
    seed: u64,
) -> Result<FitReport> {
    fit(corpus, k, alpha0, &FitConfig::Config1(budgets.clone()), seed)
}

/// Noise the whitened tensor at a privately calibrated scale.
pub fn fit_config2(
    corpus: &Corpus,
    k: usize,
    alpha0: f64,
    budgets: &Config2Budgets,
    seed: u64,
) -> Result<FitReport> {
    fit(corpus, k, alpha0, &FitConfig::Config2(budgets.clone()), seed)
}

/// Noise the decomposition output at a privately calibrated scale.
pub fn fit_config3(
    corpus: &Corpus,
    k: usize,
    alpha0: f64,
    budgets: &Config3Budgets,
    seed: u64,
) -> Result<FitReport> {
    fit(corpus, k, alpha0, &FitConfig::Config3(budgets.clone()), seed)
}

/// Noise the final model at a privately calibrated scale.
pub fn fit_config4(
    corpus: &Corpus,
    k: usize,
    alpha0: f64,
    budgets: &Config4Budgets,
    seed: u64,
) -> Result<FitReport> {
    fit(corpus, k, alpha0, &FitConfig::Config4(budgets.clone()), seed)
}

fn fit_moments_nonprivate(
    moments: &MomentSet,
    k: usize,
    alpha0: f64,
    seed: u64,
) -> Result<FitReport> {
    let wh = whiten(&moments.m2, k)?;
    let t = whiten_tensor(&moments.m3, &wh)?;
    let factors = simultaneous_power(&t, DEFAULT_MAX_ITERS, DEFAULT_POWER_TOL, power_seed(seed))?;
    let model = unwhiten(&factors, &wh, alpha0)?;
    let diagnostics = Diagnostics {
        singular_values: wh.singular_values.clone(),
        gamma_s: Some(spectral_gap(&factors.eigenvalues)),
        sigma_k_tilde: None,
        gap_tilde: None,
        noise_sigmas: Vec::new(),
        power_iterations: factors.iterations,
        power_residual: factors.residual,
        power_converged: factors.converged,
    };
    Ok(FitReport { model, ledger: BudgetLedger::new(), diagnostics })
}

fn fit_moments_config1(
    moments: &MomentSet,
    k: usize,
    alpha0: f64,
    budgets: &Config1Budgets,
    seed: u64,
) -> Result<FitReport> {
    let n = moments.n_docs;
    let sm2 = sens_m2(alpha0, n)?;
    let sm3 = sens_m3(alpha0, n)?;
    let mut ledger = BudgetLedger::new();
    let mut noise_sigmas = Vec::new();

    let sigma3 = gaussian_sigma(sm3, &budgets.e3)?;
    let noisy_m3 = perturb_symmetric_tensor(&moments.m3, sigma3, derive_seed(seed, ROLE_E3))?;
    ledger.charge(EdgeId::M3.label(), budgets.e3.epsilon, budgets.e3.delta);
    noise_sigmas.push((EdgeId::M3, sigma3));

    let sigma4 = gaussian_sigma(sm2, &budgets.e4)?;
    let m2_whiten = perturb_symmetric_matrix(&moments.m2, sigma4, derive_seed(seed, ROLE_E4))?;
    ledger.charge(EdgeId::M2Whiten.label(), budgets.e4.epsilon, budgets.e4.delta);
    noise_sigmas.push((EdgeId::M2Whiten, sigma4));

    let sigma8 = gaussian_sigma(sm2, &budgets.e8)?;
    let m2_unwhiten = perturb_symmetric_matrix(&moments.m2, sigma8, derive_seed(seed, ROLE_E8))?;
    ledger.charge(EdgeId::M2Unwhiten.label(), budgets.e8.epsilon, budgets.e8.delta);
    noise_sigmas.push((EdgeId::M2Unwhiten, sigma8));

    let wh = whiten_private(&m2_whiten, k)?;
    let t = whiten_tensor(&noisy_m3, &wh)?;
    let factors = simultaneous_power(&t, DEFAULT_MAX_ITERS, DEFAULT_POWER_TOL, power_seed(seed))?;
    let wh_inv = whiten_private(&m2_unwhiten, k)?;
    let model = unwhiten(&factors, &wh_inv, alpha0)?;

    let diagnostics = Diagnostics {
        singular_values: wh.singular_values.clone(),
        gamma_s: Some(spectral_gap(&factors.eigenvalues)),
        sigma_k_tilde: None,
        gap_tilde: None,
        noise_sigmas,
        power_iterations: factors.iterations,
        power_residual: factors.residual,
        power_converged: factors.converged,
    };
    Ok(FitReport { model, ledger, diagnostics })
}

fn fit_moments_config2(
    moments: &MomentSet,
    k: usize,
    alpha0: f64,
    budgets: &Config2Budgets,
    seed: u64,
) -> Result<FitReport> {
    let n = moments.n_docs;
    let wh = whiten(&moments.m2, k)?;
    let t = whiten_tensor(&moments.m3, &wh)?;

    // Local sensitivity of the whitened tensor at the released bound, with
    // the unreleased sigma_{k+1} pessimistically set to zero.
    let template = |sigma_k: f64, _gap: Option<f64>| {
        sens_whitened_tensor(&SpectralContext {
            alpha0,
            n_docs: n,
            k,
            sigma_1: wh.sigma_1(),
            sigma_k,
            sigma_k1: 0.0,
            sigma1_t: 0.0,
            gamma_s: 0.0,
        })
    };
    let cal = calibrate_procedure1(
        template,
        wh.sigma_k(),
        n,
        budgets.sigma_release.eps,
        budgets.sigma_release.delta,
        None,
        &budgets.e6,
        EdgeId::WhitenedTensor.label(),
        derive_seed(seed, ROLE_CALIBRATION),
    )?;

    let noisy_t = perturb_symmetric_tensor(&t, cal.noise_sigma, derive_seed(seed, ROLE_E6))?;
    let mut ledger = BudgetLedger::new();
    ledger.extend(&cal.charges);
    let mut noise_sigmas = vec![(EdgeId::WhitenedTensor, cal.noise_sigma)];

    let sm2 = sens_m2(alpha0, n)?;
    let sigma8 = gaussian_sigma(sm2, &budgets.e8)?;
    let m2_unwhiten = perturb_symmetric_matrix(&moments.m2, sigma8, derive_seed(seed, ROLE_E8))?;
    ledger.charge(EdgeId::M2Unwhiten.label(), budgets.e8.epsilon, budgets.e8.delta);
    noise_sigmas.push((EdgeId::M2Unwhiten, sigma8));

    let factors = simultaneous_power(&noisy_t, DEFAULT_MAX_ITERS, DEFAULT_POWER_TOL, power_seed(seed))?;
    let wh_inv = whiten_private(&m2_unwhiten, k)?;
    let model = unwhiten(&factors, &wh_inv, alpha0)?;

    let diagnostics = Diagnostics {
        singular_values: wh.singular_values.clone(),
        gamma_s: Some(spectral_gap(&factors.eigenvalues)),
        sigma_k_tilde: Some(cal.sigma_k_tilde),
        gap_tilde: None,
        noise_sigmas,
        power_iterations: factors.iterations,
        power_residual: factors.residual,
        power_converged: factors.converged,
    };
    Ok(FitReport { model, ledger, diagnostics })
}

fn fit_moments_config3(
    moments: &MomentSet,
    k: usize,
    alpha0: f64,
    budgets: &Config3Budgets,
    seed: u64,
) -> Result<FitReport> {
    let n = moments.n_docs;
    let wh = whiten(&moments.m2, k)?;
    let t = whiten_tensor(&moments.m3, &wh)?;
    let factors = simultaneous_power(&t, DEFAULT_MAX_ITERS, DEFAULT_POWER_TOL, power_seed(seed))?;
    let gamma_s = spectral_gap(&factors.eigenvalues);

    let template = |sigma_k: f64, gap: Option<f64>| {
        let delta_t = sens_whitened_tensor(&SpectralContext {
            alpha0,
            n_docs: n,
            k,
            sigma_1: wh.sigma_1(),
            sigma_k,
            sigma_k1: 0.0,
            sigma1_t: 0.0,
            gamma_s: 0.0,
        })?;
        sens_decomposition_output(delta_t, k, gap.expect("gap release requested"))
    };
    let cal = calibrate_procedure1(
        template,
        wh.sigma_k(),
        n,
        budgets.sigma_release.eps,
        budgets.sigma_release.delta,
        Some(GapRelease {
            gamma_s,
            eps: budgets.gap_release.eps,
            delta: budgets.gap_release.delta,
        }),
        &budgets.e7,
        EdgeId::Decomposition.label(),
        derive_seed(seed, ROLE_CALIBRATION),
    )?;

    // Flatten the eigenvector columns, noise everything at the calibrated
    // scale, and rebuild the factor set.
    let flat: Array1<f64> = Array1::from_iter(factors.vectors.t().iter().copied());
    let noisy_flat = perturb_vector(&flat, cal.noise_sigma, derive_seed(seed, ROLE_E7_VECTORS))?;
    let mut noisy_vectors = factors.vectors.clone();
    let mut idx = 0;
    for j in 0..k {
        for i in 0..k {
            noisy_vectors[[i, j]] = noisy_flat[idx];
            idx += 1;
        }
    }
    let noisy_values =
        perturb_vector(&factors.eigenvalues, cal.noise_sigma, derive_seed(seed, ROLE_E7_VALUES))?;
    let noisy_factors = SpectralFactors {
        vectors: noisy_vectors,
        eigenvalues: noisy_values,
        iterations: factors.iterations,
        residual: factors.residual,
        converged: factors.converged,
    };

    let mut ledger = BudgetLedger::new();
    ledger.extend(&cal.charges);
    let mut noise_sigmas = vec![(EdgeId::Decomposition, cal.noise_sigma)];

    let sm2 = sens_m2(alpha0, n)?;
    let sigma8 = gaussian_sigma(sm2, &budgets.e8)?;
    let m2_unwhiten = perturb_symmetric_matrix(&moments.m2, sigma8, derive_seed(seed, ROLE_E8))?;
    ledger.charge(EdgeId::M2Unwhiten.label(), budgets.e8.epsilon, budgets.e8.delta);
    noise_sigmas.push((EdgeId::M2Unwhiten, sigma8));

    let wh_inv = whiten_private(&m2_unwhiten, k)?;
    let model = unwhiten(&noisy_factors, &wh_inv, alpha0)?;

    let diagnostics = Diagnostics {
        singular_values: wh.singular_values.clone(),
        gamma_s: Some(gamma_s),
        sigma_k_tilde: Some(cal.sigma_k_tilde),
        gap_tilde: cal.gap_tilde,
        noise_sigmas,
        power_iterations: factors.iterations,
        power_residual: factors.residual,
        power_converged: factors.converged,
    };
    Ok(FitReport { model, ledger, diagnostics })
}

fn fit_moments_config4(
    moments: &MomentSet,
    k: usize,
    alpha0: f64,
    budgets: &Config4Budgets,
    seed: u64,
) -> Result<FitReport> {
    let n = moments.n_docs;
    let wh = whiten(&moments.m2, k)?;
    let t = whiten_tensor(&moments.m3, &wh)?;
    let factors = simultaneous_power(&t, DEFAULT_MAX_ITERS, DEFAULT_POWER_TOL, power_seed(seed))?;
    let gamma_s = spectral_gap(&factors.eigenvalues);
    let clean_model = unwhiten(&factors, &wh, alpha0)?;

    let sigma1_t = factors.eigenvalues[0];
    let template = |sigma_k: f64, gap: Option<f64>| {
        sens_final_output(&SpectralContext {
            alpha0,
            n_docs: n,
            k,
            sigma_1: wh.sigma_1(),
            sigma_k,
            sigma_k1: 0.0,
            sigma1_t,
            gamma_s: gap.expect("gap release requested"),
        })
    };
    let cal = calibrate_procedure1(
        template,
        wh.sigma_k(),
        n,
        budgets.sigma_release.eps,
        budgets.sigma_release.delta,
        Some(GapRelease {
            gamma_s,
            eps: budgets.gap_release.eps,
            delta: budgets.gap_release.delta,
        }),
        &budgets.e9,
        EdgeId::FinalOutput.label(),
        derive_seed(seed, ROLE_CALIBRATION),
    )?;

    let d = clean_model.vocab_size();
    let flat: Array1<f64> = Array1::from_iter(clean_model.topics.t().iter().copied());
    let noisy_flat = perturb_vector(&flat, cal.noise_sigma, derive_seed(seed, ROLE_E9_TOPICS))?;
    let mut topics = Array2::zeros((d, k));
    let mut idx = 0;
    for j in 0..k {
        for i in 0..d {
            topics[[i, j]] = noisy_flat[idx];
            idx += 1;
        }
    }
    // Re-project each noised topic onto the simplex.
    for j in 0..k {
        let mut col = topics.column_mut(j);
        col.mapv_inplace(|x| x.max(0.0));
        let s = col.sum();
        if !(s > 0.0) {
            return Err(Error::TopicCollapsed { index: j });
        }
        col.mapv_inplace(|x| x / s);
    }
    let alpha =
        perturb_vector(&clean_model.alpha, cal.noise_sigma, derive_seed(seed, ROLE_E9_ALPHA))?;

    let mut ledger = BudgetLedger::new();
    ledger.extend(&cal.charges);
    let noise_sigmas = vec![(EdgeId::FinalOutput, cal.noise_sigma)];

    let model = LdaModel { topics, alpha, alpha0 };
    let diagnostics = Diagnostics {
        singular_values: wh.singular_values.clone(),
        gamma_s: Some(gamma_s),
        sigma_k_tilde: Some(cal.sigma_k_tilde),
        gap_tilde: cal.gap_tilde,
        noise_sigmas,
        power_iterations: factors.iterations,
        power_residual: factors.residual,
        power_converged: factors.converged,
    };
    Ok(FitReport { model, ledger, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate_synthetic, random_model};
    use crate::moments::population_moments;
    use crate::eval::recovery_error;
    use crate::privacy::compose;

    fn population_momentset(model: &LdaModel) -> MomentSet {
        let (m1, m2, m3) = population_moments(model).unwrap();
        MomentSet { m1, m2, m3, n_docs: 1000 }
    }

    #[test]
    fn nonprivate_fit_recovers_population_model() {
        let model = random_model(3, 8, 1.5, 21).unwrap();
        let ms = population_momentset(&model);
        let report = fit_moments(&ms, 3, 1.5, &FitConfig::NonPrivate, 7).unwrap();
        assert!(report.ledger.is_empty());
        let (_, mean) = recovery_error(&report.model, &model).unwrap();
        assert!(mean < 1e-6, "mean error {}", mean);
        // Alpha comes back in decomposition order; compare under the match.
        let perm = crate::eval::match_topics(&report.model, &model).unwrap();
        for i in 0..3 {
            let da = (report.model.alpha[perm[i]] - model.alpha[i]).abs();
            assert!(da < 1e-6, "alpha error {} at topic {}", da, i);
        }
    }

    #[test]
    fn fit_rejects_bad_arguments() {
        let model = random_model(2, 4, 1.0, 3).unwrap();
        let corpus = generate_synthetic(&model, 10, 5, 1).unwrap();
        assert!(fit_nonprivate(&corpus, 0, 1.0, 0).is_err());
        assert!(fit_nonprivate(&corpus, 5, 1.0, 0).is_err());
        assert!(fit_nonprivate(&corpus, 2, 0.0, 0).is_err());
    }

    #[test]
    fn config1_charges_declared_edges_in_order() {
        let model = random_model(2, 6, 1.0, 5).unwrap();
        let corpus = generate_synthetic(&model, 400, 8, 2).unwrap();
        let budgets = Config1Budgets {
            e3: PrivacyParams::new(0.4, 1e-6).unwrap(),
            e4: PrivacyParams::new(0.3, 1e-6).unwrap(),
            e8: PrivacyParams::new(0.3, 1e-6).unwrap(),
        };
        let report = fit_config1(&corpus, 2, 1.0, &budgets, 11).unwrap();
        let labels: Vec<&str> = report.ledger.charges().iter().map(|c| c.label.as_str()).collect();
        assert_eq!(labels, vec!["e3", "e4", "e8"]);
        let edges: Vec<EdgeId> = report.diagnostics.noise_sigmas.iter().map(|(e, _)| *e).collect();
        assert_eq!(edges, ConfigId::Config1.noised_edges());
        let (eps, _) = compose(&report.ledger);
        assert_eq!(eps, 0.4 + 0.3 + 0.3);
    }

    #[test]
    fn zero_noise_limits_match_nonprivate() {
        let model = random_model(3, 10, 1.0, 17).unwrap();
        let corpus = generate_synthetic(&model, 600, 12, 4).unwrap();
        let clean = fit_nonprivate(&corpus, 3, 1.0, 55).unwrap();

        // The calibrated sensitivities divide by sigma_k^3 and the gap, so
        // they can reach 1e8 on small corpora; epsilon must dwarf that for
        // the absolute noise to vanish.
        let huge = 1e18;
        let loose = |eps: f64| PrivacyParams::new(eps, 1e-6).unwrap().with_large_epsilon();
        let b1 = Config1Budgets { e3: loose(huge), e4: loose(huge), e8: loose(huge) };
        let r1 = fit_config1(&corpus, 3, 1.0, &b1, 55).unwrap();
        let (_, err1) = recovery_error(&r1.model, &clean.model).unwrap();
        assert!(err1 < 1e-6, "config1 error {}", err1);

        let b2 = Config2Budgets {
            sigma_release: CalibBudget { eps: huge, delta: 1e-6 },
            e6: loose(huge),
            e8: loose(huge),
        };
        let r2 = fit_config2(&corpus, 3, 1.0, &b2, 55).unwrap();
        let (_, err2) = recovery_error(&r2.model, &clean.model).unwrap();
        assert!(err2 < 1e-6, "config2 error {}", err2);

        let b3 = Config3Budgets {
            sigma_release: CalibBudget { eps: huge, delta: 1e-6 },
            gap_release: CalibBudget { eps: huge, delta: 1e-6 },
            e7: loose(huge),
            e8: loose(huge),
        };
        let r3 = fit_config3(&corpus, 3, 1.0, &b3, 55).unwrap();
        let (_, err3) = recovery_error(&r3.model, &clean.model).unwrap();
        assert!(err3 < 1e-6, "config3 error {}", err3);

        let b4 = Config4Budgets {
            sigma_release: CalibBudget { eps: huge, delta: 1e-6 },
            gap_release: CalibBudget { eps: huge, delta: 1e-6 },
            e9: loose(huge),
        };
        let r4 = fit_config4(&corpus, 3, 1.0, &b4, 55).unwrap();
        let (_, err4) = recovery_error(&r4.model, &clean.model).unwrap();
        assert!(err4 < 1e-6, "config4 error {}", err4);
    }

    #[test]
    fn config_budget_totals_are_exact_sums() {
        // The release budget must be big enough that the shifted lower
        // bound stays positive at this corpus size.
        let model = random_model(2, 6, 0.8, 9).unwrap();
        let corpus = generate_synthetic(&model, 2000, 10, 6).unwrap();
        let b2 = Config2Budgets {
            sigma_release: CalibBudget { eps: 4.0, delta: 1e-7 },
            e6: PrivacyParams::new(0.5, 1e-6).unwrap(),
            e8: PrivacyParams::new(0.25, 1e-6).unwrap(),
        };
        let report = fit_config2(&corpus, 2, 0.8, &b2, 77).unwrap();
        let (eps, delta) = compose(&report.ledger);
        assert_eq!(eps, 4.0 + 0.5 + 0.25);
        assert_eq!(delta, 1e-7 + 1e-6 + 1e-6);
        let labels: Vec<&str> = report.ledger.charges().iter().map(|c| c.label.as_str()).collect();
        assert_eq!(labels, vec!["e1", "e6", "e8"]);
        assert!(report.diagnostics.sigma_k_tilde.unwrap() > 0.0);
    }
}
