//! Grid sweeps over composite privacy budgets: parse a key=value spec,
//! enumerate (config, epsilon, split, repeat) cells deterministically, fit
//! each cell, and report rows as schema-stable CSV.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use crate::corpus::{generate_synthetic, load_bow, parse_model, random_model, Corpus, LdaModel};
use crate::error::{Error, Result};
use crate::eval::{dp_loglik, recovery_error};
use crate::pipeline::{
    compute_moments, fit_moments, CalibBudget, Config1Budgets, Config2Budgets, Config3Budgets,
    Config4Budgets, ConfigId, FitConfig, MomentSet,
};
use crate::privacy::{derive_seed, PrivacyParams};

pub const SWEEP_CSV_HEADER: &str =
    "config,composite_eps,split,repeat,mean_error,dp_loglik,wall_ms,status";

const ROLE_SYNTH_MODEL: u64 = 0;
const ROLE_SYNTH_DOCS: u64 = 1;
const ROLE_EVAL_NOISE: u64 = 2;

/// How a composite budget is divided across a configuration's charges.
#[derive(Debug, Clone, PartialEq)]
pub enum SplitSpec {
    /// Equal fractions across however many charges the config has.
    Even,
    /// Explicit fractions; applies only to configs with that many charges.
    Explicit(Vec<f64>),
}

impl SplitSpec {
    pub fn label(&self) -> String {
        match self {
            SplitSpec::Even => "even".to_string(),
            SplitSpec::Explicit(fs) => {
                fs.iter().map(|f| f.to_string()).collect::<Vec<_>>().join("|")
            }
        }
    }

    fn fractions(&self, arity: usize) -> Option<Vec<f64>> {
        match self {
            SplitSpec::Even => {
                if arity == 0 {
                    Some(Vec::new())
                } else {
                    Some(vec![1.0 / arity as f64; arity])
                }
            }
            SplitSpec::Explicit(fs) => {
                if fs.len() == arity {
                    Some(fs.clone())
                } else {
                    None
                }
            }
        }
    }
}

/// Where the sweep corpus comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepSource {
    CorpusFile { path: PathBuf, truth: Option<PathBuf>, k: usize, alpha0: f64 },
    Synthetic { k: usize, d: usize, alpha0: f64, docs: usize, doc_len: usize, seed: u64 },
}

/// Parsed sweep specification.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub eps_grid: Vec<f64>,
    pub delta: f64,
    pub configs: Vec<ConfigId>,
    pub splits: Vec<SplitSpec>,
    pub repeats: usize,
    pub seed: u64,
    pub dp_eps: f64,
    pub dp_delta: f64,
    pub source: SweepSource,
}

fn parse_config_token(tok: &str) -> Result<ConfigId> {
    match tok {
        "none" => Ok(ConfigId::NonPrivate),
        "1" => Ok(ConfigId::Config1),
        "2" => Ok(ConfigId::Config2),
        "3" => Ok(ConfigId::Config3),
        "4" => Ok(ConfigId::Config4),
        other => Err(Error::InvalidArgument(format!("unknown config '{}'", other))),
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| Error::InvalidArgument(format!("{}: not a number: '{}'", key, value)))
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|_| Error::InvalidArgument(format!("{}: not an integer: '{}'", key, value)))
}

fn parse_u64(key: &str, value: &str) -> Result<u64> {
    value
        .parse::<u64>()
        .map_err(|_| Error::InvalidArgument(format!("{}: not an integer: '{}'", key, value)))
}

/// Parse a sweep spec from key=value lines. `#` starts a comment; blank
/// lines are skipped. Corpus source is either `corpus=` (with `k=` and
/// `alpha0=`, optionally `truth_model=`) or the `synth_*` family.
pub fn parse_sweep_spec(text: &str) -> Result<SweepSpec> {
    let mut eps_grid: Option<Vec<f64>> = None;
    let mut delta = 1e-6;
    let mut configs = vec![
        ConfigId::Config1,
        ConfigId::Config2,
        ConfigId::Config3,
        ConfigId::Config4,
    ];
    let mut splits = vec![SplitSpec::Even];
    let mut repeats = 1usize;
    let mut seed = 0u64;
    let mut dp_eps = 1.0;
    let mut dp_delta = 1e-6;
    let mut corpus_path: Option<PathBuf> = None;
    let mut truth_path: Option<PathBuf> = None;
    let mut k: Option<usize> = None;
    let mut alpha0: Option<f64> = None;
    let mut synth_k: Option<usize> = None;
    let mut synth_d: Option<usize> = None;
    let mut synth_alpha0: Option<f64> = None;
    let mut synth_docs: Option<usize> = None;
    let mut synth_doc_len: Option<usize> = None;
    let mut synth_seed = 0u64;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: lineno + 1,
            message: format!("expected key=value, got '{}'", line),
        })?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "eps_grid" => {
                let mut grid = Vec::new();
                for tok in value.split(',') {
                    let e = parse_f64(key, tok.trim())?;
                    if !(e > 0.0) {
                        return Err(Error::Validation(format!(
                            "eps_grid entries must be positive, got {}",
                            e
                        )));
                    }
                    grid.push(e);
                }
                eps_grid = Some(grid);
            }
            "delta" => delta = parse_f64(key, value)?,
            "configs" => {
                let mut list = Vec::new();
                for tok in value.split(',') {
                    list.push(parse_config_token(tok.trim())?);
                }
                configs = list;
            }
            "splits" => {
                let mut list = Vec::new();
                for item in value.split(',') {
                    let item = item.trim();
                    if item == "even" {
                        list.push(SplitSpec::Even);
                        continue;
                    }
                    let fractions: Result<Vec<f64>> =
                        item.split(':').map(|t| parse_f64("splits", t.trim())).collect();
                    let fractions = fractions?;
                    let sum: f64 = fractions.iter().sum();
                    if (sum - 1.0).abs() > 1e-12 {
                        return Err(Error::Validation(format!(
                            "split fractions must sum to 1, got {} in '{}'",
                            sum, item
                        )));
                    }
                    if fractions.iter().any(|&f| !(f > 0.0)) {
                        return Err(Error::Validation(format!(
                            "split fractions must be positive in '{}'",
                            item
                        )));
                    }
                    list.push(SplitSpec::Explicit(fractions));
                }
                splits = list;
            }
            "repeats" => repeats = parse_usize(key, value)?,
            "seed" => seed = parse_u64(key, value)?,
            "dp_eps" => dp_eps = parse_f64(key, value)?,
            "dp_delta" => dp_delta = parse_f64(key, value)?,
            "corpus" => corpus_path = Some(PathBuf::from(value)),
            "truth_model" => truth_path = Some(PathBuf::from(value)),
            "k" => k = Some(parse_usize(key, value)?),
            "alpha0" => alpha0 = Some(parse_f64(key, value)?),
            "synth_k" => synth_k = Some(parse_usize(key, value)?),
            "synth_d" => synth_d = Some(parse_usize(key, value)?),
            "synth_alpha0" => synth_alpha0 = Some(parse_f64(key, value)?),
            "synth_docs" => synth_docs = Some(parse_usize(key, value)?),
            "synth_doc_len" => synth_doc_len = Some(parse_usize(key, value)?),
            "synth_seed" => synth_seed = parse_u64(key, value)?,
            other => {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("unknown key '{}'", other),
                })
            }
        }
    }

    let eps_grid = eps_grid
        .ok_or_else(|| Error::Validation("sweep spec needs eps_grid=".to_string()))?;
    if eps_grid.is_empty() {
        return Err(Error::Validation("eps_grid must not be empty".to_string()));
    }
    if repeats == 0 {
        return Err(Error::Validation("repeats must be at least 1".to_string()));
    }
    if configs.is_empty() {
        return Err(Error::Validation("configs must not be empty".to_string()));
    }

    let source = if let Some(path) = corpus_path {
        let k = k.ok_or_else(|| Error::Validation("corpus mode needs k=".to_string()))?;
        let alpha0 =
            alpha0.ok_or_else(|| Error::Validation("corpus mode needs alpha0=".to_string()))?;
        SweepSource::CorpusFile { path, truth: truth_path, k, alpha0 }
    } else {
        let need = |name: &str| Error::Validation(format!("synthetic mode needs {}=", name));
        SweepSource::Synthetic {
            k: synth_k.ok_or_else(|| need("synth_k"))?,
            d: synth_d.ok_or_else(|| need("synth_d"))?,
            alpha0: synth_alpha0.ok_or_else(|| need("synth_alpha0"))?,
            docs: synth_docs.ok_or_else(|| need("synth_docs"))?,
            doc_len: synth_doc_len.ok_or_else(|| need("synth_doc_len"))?,
            seed: synth_seed,
        }
    };

    Ok(SweepSpec {
        eps_grid,
        delta,
        configs,
        splits,
        repeats,
        seed,
        dp_eps,
        dp_delta,
        source,
    })
}

/// Materialized sweep input: the corpus, the reference model when known,
/// and the fit arguments.
pub struct SweepInput {
    pub corpus: Corpus,
    pub truth: Option<LdaModel>,
    pub k: usize,
    pub alpha0: f64,
}

/// Load or synthesize the sweep corpus.
pub fn load_sweep_input(spec: &SweepSpec) -> Result<SweepInput> {
    match &spec.source {
        SweepSource::CorpusFile { path, truth, k, alpha0 } => {
            let corpus = load_bow(path)?;
            let truth = match truth {
                Some(p) => Some(parse_model(&std::fs::read_to_string(p)?)?),
                None => None,
            };
            Ok(SweepInput { corpus, truth, k: *k, alpha0: *alpha0 })
        }
        SweepSource::Synthetic { k, d, alpha0, docs, doc_len, seed } => {
            let model = random_model(*k, *d, *alpha0, derive_seed(*seed, ROLE_SYNTH_MODEL))?;
            let corpus =
                generate_synthetic(&model, *docs, *doc_len, derive_seed(*seed, ROLE_SYNTH_DOCS))?;
            Ok(SweepInput { corpus, truth: Some(model), k: *k, alpha0: *alpha0 })
        }
    }
}

/// Number of ledger charges a configuration takes its split over.
pub fn budget_arity(config: ConfigId) -> usize {
    match config {
        ConfigId::NonPrivate => 0,
        ConfigId::Config1 => 3,
        ConfigId::Config2 => 3,
        ConfigId::Config3 => 4,
        ConfigId::Config4 => 3,
    }
}

/// Build the per-edge budgets for one grid cell. Per-edge epsilons from a
/// large composite may exceed the small-epsilon regime, so the override is
/// enabled; the ledger still records the exact charges.
pub fn build_fit_config(
    config: ConfigId,
    eps: f64,
    delta: f64,
    fractions: &[f64],
) -> Result<FitConfig> {
    let params = |f: f64| -> Result<PrivacyParams> {
        Ok(PrivacyParams::new(f * eps, f * delta)?.with_large_epsilon())
    };
    let calib = |f: f64| CalibBudget { eps: f * eps, delta: f * delta };
    match config {
        ConfigId::NonPrivate => Ok(FitConfig::NonPrivate),
        ConfigId::Config1 => Ok(FitConfig::Config1(Config1Budgets {
            e3: params(fractions[0])?,
            e4: params(fractions[1])?,
            e8: params(fractions[2])?,
        })),
        ConfigId::Config2 => Ok(FitConfig::Config2(Config2Budgets {
            sigma_release: calib(fractions[0]),
            e6: params(fractions[1])?,
            e8: params(fractions[2])?,
        })),
        ConfigId::Config3 => Ok(FitConfig::Config3(Config3Budgets {
            sigma_release: calib(fractions[0]),
            gap_release: calib(fractions[1]),
            e7: params(fractions[2])?,
            e8: params(fractions[3])?,
        })),
        ConfigId::Config4 => Ok(FitConfig::Config4(Config4Budgets {
            sigma_release: calib(fractions[0]),
            gap_release: calib(fractions[1]),
            e9: params(fractions[2])?,
        })),
    }
}

/// One sweep result row.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub config: ConfigId,
    pub composite_eps: f64,
    pub split_label: String,
    pub repeat: usize,
    pub mean_error: Option<f64>,
    pub dp_loglik: Option<f64>,
    pub wall_ms: u64,
    pub status: String,
}

/// Sweep results: all rows plus the preferred split per configuration.
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    /// (config, split label) pairs: lowest matched error when the truth is
    /// known, highest DP log-likelihood otherwise.
    pub best_splits: Vec<(ConfigId, String)>,
}

fn sanitize_status(s: &str) -> String {
    s.chars()
        .map(|c| match c {
            ',' => ';',
            '\n' | '\r' => ' ',
            other => other,
        })
        .collect()
}

/// The splits that apply to a config: explicit splits of matching arity,
/// or the even split when none match (so every requested config runs).
fn applicable_splits(config: ConfigId, splits: &[SplitSpec]) -> Vec<SplitSpec> {
    let arity = budget_arity(config);
    let matching: Vec<SplitSpec> =
        splits.iter().filter(|s| s.fractions(arity).is_some()).cloned().collect();
    if matching.is_empty() {
        vec![SplitSpec::Even]
    } else {
        matching
    }
}

/// Run every cell of the sweep. Individual fit failures become rows with
/// an error status; the sweep continues. Moments are computed once.
pub fn run_sweep(input: &SweepInput, spec: &SweepSpec) -> Result<SweepOutcome> {
    let moments: MomentSet = compute_moments(&input.corpus, input.alpha0)?;
    let dp_params = PrivacyParams::new(spec.dp_eps, spec.dp_delta)?.with_large_epsilon();
    let mut rows = Vec::new();
    let mut cell_index: u64 = 0;
    for &config in &spec.configs {
        let arity = budget_arity(config);
        for split in &applicable_splits(config, &spec.splits) {
            let fractions = split.fractions(arity).expect("split filtered to match arity");
            let split_label = split.label();
            for &eps in &spec.eps_grid {
                for repeat in 0..spec.repeats {
                    let cell_seed = spec.seed ^ cell_index;
                    cell_index += 1;
                    let started = Instant::now();
                    let fit_config = build_fit_config(config, eps, spec.delta, &fractions)?;
                    let outcome = fit_moments(&moments, input.k, input.alpha0, &fit_config, cell_seed);
                    let (mean_error, dp_value, status) = match outcome {
                        Ok(report) => {
                            let mean_error = match &input.truth {
                                Some(truth) => Some(recovery_error(&report.model, truth)?.1),
                                None => None,
                            };
                            let dp = dp_loglik(
                                &input.corpus,
                                &report.model,
                                &dp_params,
                                derive_seed(cell_seed, ROLE_EVAL_NOISE),
                            )?;
                            (mean_error, Some(dp.value), "ok".to_string())
                        }
                        Err(e) => (None, None, sanitize_status(&e.to_string())),
                    };
                    let wall_ms = started.elapsed().as_millis() as u64;
                    rows.push(SweepRow {
                        config,
                        composite_eps: eps,
                        split_label: split_label.clone(),
                        repeat,
                        mean_error,
                        dp_loglik: dp_value,
                        wall_ms,
                        status,
                    });
                }
            }
        }
    }

    let truth_known = input.truth.is_some();
    let mut best_splits = Vec::new();
    for &config in &spec.configs {
        let mut scores: Vec<(String, f64, usize)> = Vec::new();
        for row in rows.iter().filter(|r| r.config == config && r.status == "ok") {
            let metric = if truth_known { row.mean_error } else { row.dp_loglik };
            let Some(m) = metric else { continue };
            match scores.iter_mut().find(|(label, _, _)| *label == row.split_label) {
                Some((_, sum, n)) => {
                    *sum += m;
                    *n += 1;
                }
                None => scores.push((row.split_label.clone(), m, 1)),
            }
        }
        let best = scores
            .iter()
            .map(|(label, sum, n)| (label.clone(), sum / *n as f64))
            .reduce(|a, b| {
                let better = if truth_known { b.1 < a.1 } else { b.1 > a.1 };
                if better {
                    b
                } else {
                    a
                }
            });
        if let Some((label, _)) = best {
            best_splits.push((config, label));
        }
    }

    Ok(SweepOutcome { rows, best_splits })
}

fn opt_field(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Render rows as CSV with the fixed header.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            row.config.label(),
            row.composite_eps,
            row.split_label,
            row.repeat,
            opt_field(row.mean_error),
            opt_field(row.dp_loglik),
            row.wall_ms,
            row.status
        );
    }
    out
}
