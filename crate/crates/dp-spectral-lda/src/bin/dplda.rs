//! Command-line front end: corpus synthesis, private and non-private
//! fits, model evaluation, and budget grid sweeps.
//!
//! Exit codes: 0 on success, 2 on argument or input errors, 3 on typed
//! pipeline failures (rank collapse, calibration collapse, and kin).

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use dp_spectral_lda::corpus::{
    drop_short, format_model, generate_synthetic, load_bow, parse_model, random_model, save_bow,
};
use dp_spectral_lda::error::{Error, Result};
use dp_spectral_lda::eval::{dp_loglik, recovery_error};
use dp_spectral_lda::pipeline::{
    fit, CalibBudget, Config1Budgets, Config2Budgets, Config3Budgets, Config4Budgets, FitConfig,
};
use dp_spectral_lda::privacy::PrivacyParams;
use dp_spectral_lda::sweep::{load_sweep_input, parse_sweep_spec, run_sweep, sweep_csv};

#[derive(Parser)]
#[command(name = "dplda", version, about = "Differentially private spectral topic model fitting")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic corpus from a random model.
    Synth(SynthArgs),
    /// Fit a topic model, optionally under one of the private configurations.
    Fit(Box<FitArgs>),
    /// Evaluate a model against a reference model or a corpus.
    Eval(EvalArgs),
    /// Run a privacy-budget grid sweep from a spec file.
    Sweep(SweepArgs),
}

#[derive(clap::Args)]
struct SynthArgs {
    /// Number of topics.
    #[arg(long)]
    k: usize,
    /// Vocabulary size.
    #[arg(long)]
    d: usize,
    /// Dirichlet concentration total.
    #[arg(long)]
    alpha0: f64,
    /// Number of documents.
    #[arg(long)]
    docs: usize,
    /// Tokens per document.
    #[arg(long)]
    doc_len: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output corpus file.
    #[arg(long)]
    out: PathBuf,
    /// Optionally save the generating model for later evaluation.
    #[arg(long)]
    model_out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct FitArgs {
    /// Input corpus file.
    #[arg(long)]
    input: PathBuf,
    /// Number of topics.
    #[arg(long)]
    k: usize,
    /// Dirichlet concentration total.
    #[arg(long)]
    alpha0: f64,
    /// Noise placement: 1|2|3|4|none.
    #[arg(long)]
    config: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Default delta for any per-edge delta not given explicitly.
    #[arg(long, default_value_t = 1e-6)]
    delta: f64,
    /// Budget for the third-moment release (config 1).
    #[arg(long = "eps-e3")]
    eps_e3: Option<f64>,
    #[arg(long = "delta-e3")]
    delta_e3: Option<f64>,
    /// Budget for the whitening-side second-moment release (config 1).
    #[arg(long = "eps-e4")]
    eps_e4: Option<f64>,
    #[arg(long = "delta-e4")]
    delta_e4: Option<f64>,
    /// Budget for the whitened-tensor release (config 2).
    #[arg(long = "eps-e6")]
    eps_e6: Option<f64>,
    #[arg(long = "delta-e6")]
    delta_e6: Option<f64>,
    /// Budget for the decomposition-output release (config 3).
    #[arg(long = "eps-e7")]
    eps_e7: Option<f64>,
    #[arg(long = "delta-e7")]
    delta_e7: Option<f64>,
    /// Budget for the unwhitening-side second-moment release (configs 1-3).
    #[arg(long = "eps-e8")]
    eps_e8: Option<f64>,
    #[arg(long = "delta-e8")]
    delta_e8: Option<f64>,
    /// Budget for the final-output release (config 4).
    #[arg(long = "eps-e9")]
    eps_e9: Option<f64>,
    #[arg(long = "delta-e9")]
    delta_e9: Option<f64>,
    /// Budget for the private singular-value lower bound (configs 2-4).
    #[arg(long)]
    eps1: Option<f64>,
    #[arg(long)]
    delta1: Option<f64>,
    /// Budget for the private gap lower bound (configs 3-4).
    #[arg(long = "eps1p")]
    eps1p: Option<f64>,
    #[arg(long = "delta1p")]
    delta1p: Option<f64>,
    /// Write the fitted model here instead of stdout.
    #[arg(long)]
    out_model: Option<PathBuf>,
    /// Write the budget ledger CSV here instead of stdout.
    #[arg(long)]
    out_ledger: Option<PathBuf>,
    /// Permit per-edge epsilon above 1 in the Gaussian mechanism.
    #[arg(long)]
    allow_large_epsilon: bool,
    /// Drop documents shorter than 3 tokens instead of failing.
    #[arg(long)]
    drop_short: bool,
}

#[derive(clap::Args)]
struct EvalArgs {
    /// Model to evaluate.
    #[arg(long)]
    model: PathBuf,
    /// Reference model: report matched per-topic and mean errors.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Corpus: report the privatized log-likelihood.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    dp_eps: f64,
    #[arg(long, default_value_t = 1e-6)]
    dp_delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    allow_large_epsilon: bool,
}

#[derive(clap::Args)]
struct SweepArgs {
    /// Sweep spec file (key=value lines).
    #[arg(long)]
    spec: PathBuf,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

fn need(flag: &str, value: Option<f64>) -> Result<f64> {
    value.ok_or_else(|| {
        Error::InvalidArgument(format!("--{} is required for the chosen config", flag))
    })
}

fn build_fit_config(args: &FitArgs) -> Result<FitConfig> {
    let edge = |eps: f64, delta: Option<f64>| -> Result<PrivacyParams> {
        let p = PrivacyParams::new(eps, delta.unwrap_or(args.delta))?;
        Ok(if args.allow_large_epsilon { p.with_large_epsilon() } else { p })
    };
    let calib = |eps: f64, delta: Option<f64>| CalibBudget {
        eps,
        delta: delta.unwrap_or(args.delta),
    };
    match args.config.as_str() {
        "none" => Ok(FitConfig::NonPrivate),
        "1" => Ok(FitConfig::Config1(Config1Budgets {
            e3: edge(need("eps-e3", args.eps_e3)?, args.delta_e3)?,
            e4: edge(need("eps-e4", args.eps_e4)?, args.delta_e4)?,
            e8: edge(need("eps-e8", args.eps_e8)?, args.delta_e8)?,
        })),
        "2" => Ok(FitConfig::Config2(Config2Budgets {
            sigma_release: calib(need("eps1", args.eps1)?, args.delta1),
            e6: edge(need("eps-e6", args.eps_e6)?, args.delta_e6)?,
            e8: edge(need("eps-e8", args.eps_e8)?, args.delta_e8)?,
        })),
        "3" => Ok(FitConfig::Config3(Config3Budgets {
            sigma_release: calib(need("eps1", args.eps1)?, args.delta1),
            gap_release: calib(need("eps1p", args.eps1p)?, args.delta1p),
            e7: edge(need("eps-e7", args.eps_e7)?, args.delta_e7)?,
            e8: edge(need("eps-e8", args.eps_e8)?, args.delta_e8)?,
        })),
        "4" => Ok(FitConfig::Config4(Config4Budgets {
            sigma_release: calib(need("eps1", args.eps1)?, args.delta1),
            gap_release: calib(need("eps1p", args.eps1p)?, args.delta1p),
            e9: edge(need("eps-e9", args.eps_e9)?, args.delta_e9)?,
        })),
        other => Err(Error::InvalidArgument(format!(
            "--config must be one of 1|2|3|4|none, got '{}'",
            other
        ))),
    }
}

fn emit(path: &Option<PathBuf>, content: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, content).map_err(Error::from),
        None => {
            print!("{}", content);
            Ok(())
        }
    }
}

fn run_synth(args: &SynthArgs) -> Result<()> {
    let model = random_model(args.k, args.d, args.alpha0, args.seed)?;
    let corpus = generate_synthetic(&model, args.docs, args.doc_len, args.seed.wrapping_add(1))?;
    save_bow(&corpus, &args.out)?;
    if let Some(model_path) = &args.model_out {
        std::fs::write(model_path, format_model(&model))?;
    }
    println!(
        "wrote {} docs over {} words to {}",
        corpus.n_docs(),
        corpus.vocab_size(),
        args.out.display()
    );
    Ok(())
}

fn run_fit(args: &FitArgs) -> Result<()> {
    let config = build_fit_config(args)?;
    let mut corpus = load_bow(&args.input)?;
    if args.drop_short {
        let (kept, dropped) = drop_short(&corpus)?;
        if dropped > 0 {
            eprintln!("dropped {} short documents", dropped);
        }
        corpus = kept;
    }
    let report = fit(&corpus, args.k, args.alpha0, &config, args.seed)?;
    emit(&args.out_model, &format_model(&report.model))?;
    emit(&args.out_ledger, &report.ledger.to_csv())?;
    print!("{}", report.diagnostics.to_kv());
    Ok(())
}

fn run_eval(args: &EvalArgs) -> Result<()> {
    let model = parse_model(&std::fs::read_to_string(&args.model)?)?;
    match (&args.truth, &args.corpus) {
        (Some(truth_path), None) => {
            let truth = parse_model(&std::fs::read_to_string(truth_path)?)?;
            let (per_topic, mean) = recovery_error(&model, &truth)?;
            for (i, e) in per_topic.iter().enumerate() {
                println!("topic_error_{}={}", i + 1, e);
            }
            println!("mean_error={}", mean);
            Ok(())
        }
        (None, Some(corpus_path)) => {
            let corpus = load_bow(corpus_path)?;
            let params = PrivacyParams::new(args.dp_eps, args.dp_delta)?;
            let params = if args.allow_large_epsilon { params.with_large_epsilon() } else { params };
            let result = dp_loglik(&corpus, &model, &params, args.seed)?;
            println!("dp_loglik={}", result.value);
            println!("noise_sigma={}", result.noise_sigma);
            println!("floored_words={}", result.floored_words);
            println!(
                "charge={},{},{}",
                result.charge.label, result.charge.epsilon, result.charge.delta
            );
            Ok(())
        }
        _ => Err(Error::InvalidArgument(
            "eval needs exactly one of --truth or --corpus".to_string(),
        )),
    }
}

fn run_sweep_cmd(args: &SweepArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.spec)?;
    let spec = parse_sweep_spec(&text)?;
    let input = load_sweep_input(&spec)?;
    let outcome = run_sweep(&input, &spec)?;
    std::fs::write(&args.out, sweep_csv(&outcome.rows))?;
    println!("rows={}", outcome.rows.len());
    for (config, split) in &outcome.best_splits {
        println!("best_split_config_{}={}", config.label(), split);
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.cmd {
        Cmd::Synth(args) => run_synth(args),
        Cmd::Fit(args) => run_fit(args),
        Cmd::Eval(args) => run_eval(args),
        Cmd::Sweep(args) => run_sweep_cmd(args),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {}", e);
        std::process::exit(i32::from(e.exit_code()));
    }
}
