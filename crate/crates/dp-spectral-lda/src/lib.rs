//! Differentially private spectral estimation for latent Dirichlet
//! allocation.
//!
//! The pipeline estimates low-order word co-occurrence moments from a
//! bag-of-words corpus, whitens the second moment, decomposes the whitened
//! third moment by simultaneous tensor power iteration, and maps the
//! factors back to topic/concentration parameters. Privacy comes from
//! Gaussian noise injected at one of four places in that dataflow, each
//! with a matching sensitivity bound and an exact budget ledger.
//!
//! Start with the runnable examples, one per capability:
//!
//! * `cargo run --example synthesize` - generate a corpus from a random
//!   model and round-trip the file formats.
//! * `cargo run --example exact_recovery` - population moments in, exact
//!   parameters out.
//! * `cargo run --example estimate_moments` - empirical moment estimators
//!   and their agreement with population values.
//! * `cargo run --example sensitivity_bounds` - the closed-form adjacency
//!   sensitivities and how they shrink with corpus size.
//! * `cargo run --example calibrate_noise` - private lower bounds for the
//!   spectrum and gap, and the noise scales they imply.
//! * `cargo run --example private_fit` - the four private configurations
//!   on one corpus with their ledgers.
//! * `cargo run --example epsilon_sweep` - a small grid sweep written as
//!   CSV.
//!
//! The same capabilities are scriptable through the `dplda` binary
//! (`synth`, `fit`, `eval`, `sweep` subcommands).

pub mod corpus;
pub mod error;
pub mod eval;
pub mod linalg;
pub mod moments;
pub mod pipeline;
pub mod privacy;
pub mod sensitivity;
pub mod spectral;
pub mod sweep;
pub mod tensor;

pub use corpus::{Corpus, LdaModel};
pub use error::{Error, Result};
pub use pipeline::{FitConfig, FitReport};
