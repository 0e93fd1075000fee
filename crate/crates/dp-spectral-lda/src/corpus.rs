//! Corpus and model types, their text file formats, validation, and
//! synthetic corpus generation.
//!
//! Bag-of-words file: first line `N d`, then one `docId wordId count` triple
//! per line, ids 1-based, counts >= 1. Duplicate (doc, word) pairs are
//! aggregated. Documents materialize in order of first appearance; a declared
//! id that never appears is simply absent. `save_bow` writes the actual
//! document count, so save/load round-trips exactly.
//!
//! Model file: first line `d k alpha0`, then k topic-weight lines, then d
//! lines of k per-topic word probabilities (row w column i is the probability
//! of word w under topic i).

use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};

/// Maximum supported vocabulary size; third moments are dense d^3 arrays.
pub const MAX_VOCAB: usize = 256;

/// A bag-of-words corpus: one row of word counts per document.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    /// Document-by-word counts; rebuild via from_counts to re-check the
    /// shape and vocabulary cap after editing.
    pub counts: Array2<u64>,
}

impl Corpus {
    /// Build a corpus from a dense document-by-word count matrix.
    pub fn from_counts(counts: Array2<u64>) -> Result<Self> {
        if counts.ncols() == 0 || counts.nrows() == 0 {
            return Err(Error::Validation("corpus must have at least one document and one word".into()));
        }
        if counts.ncols() > MAX_VOCAB {
            return Err(Error::InvalidArgument(format!(
                "vocabulary size {} exceeds the dense-tensor limit {}",
                counts.ncols(),
                MAX_VOCAB
            )));
        }
        Ok(Corpus { counts })
    }

    pub fn n_docs(&self) -> usize {
        self.counts.nrows()
    }

    pub fn vocab_size(&self) -> usize {
        self.counts.ncols()
    }

    /// Count vector of one document.
    pub fn doc(&self, n: usize) -> ArrayView1<'_, u64> {
        self.counts.row(n)
    }

    /// Token count of one document.
    pub fn doc_len(&self, n: usize) -> u64 {
        self.counts.row(n).sum()
    }

    pub fn total_tokens(&self) -> u64 {
        self.counts.sum()
    }

    /// Per-word total counts across all documents.
    pub fn word_totals(&self) -> Array1<f64> {
        let mut out = Array1::zeros(self.vocab_size());
        for row in self.counts.rows() {
            for (w, &c) in row.iter().enumerate() {
                out[w] += c as f64;
            }
        }
        out
    }
}

/// A topic model: per-topic word distributions, topic weights, and their sum.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaModel {
    /// d x k matrix; column i is the word distribution of topic i.
    pub topics: Array2<f64>,
    /// Positive topic weights, length k.
    pub alpha: Array1<f64>,
    /// Concentration, normally the sum of the weights.
    pub alpha0: f64,
}

impl LdaModel {
    pub fn vocab_size(&self) -> usize {
        self.topics.nrows()
    }

    pub fn n_topics(&self) -> usize {
        self.topics.ncols()
    }

    /// Mixing proportions alpha_i / alpha0.
    pub fn weights(&self) -> Array1<f64> {
        &self.alpha / self.alpha0
    }
}

/// Load a bag-of-words corpus from `N d` / `docId wordId count` text.
pub fn load_bow(path: &Path) -> Result<Corpus> {
    let text = std::fs::read_to_string(path)?;
    parse_bow(&text)
}

/// Parse the bag-of-words format from a string. See the module docs.
pub fn parse_bow(text: &str) -> Result<Corpus> {
    let mut lines = text.lines().enumerate();
    let (first_no, first) = loop {
        match lines.next() {
            Some((no, line)) if !line.trim().is_empty() => break (no + 1, line),
            Some(_) => continue,
            None => {
                return Err(Error::Parse { line: 1, message: "empty file".into() });
            }
        }
    };
    let header: Vec<&str> = first.split_whitespace().collect();
    if header.len() != 2 {
        return Err(Error::Parse {
            line: first_no,
            message: format!("expected header `N d`, got {:?}", first),
        });
    }
    let n_decl: usize = header[0].parse().map_err(|_| Error::Parse {
        line: first_no,
        message: format!("bad document count {:?}", header[0]),
    })?;
    let d: usize = header[1].parse().map_err(|_| Error::Parse {
        line: first_no,
        message: format!("bad vocabulary size {:?}", header[1]),
    })?;
    if d == 0 || d > MAX_VOCAB {
        return Err(Error::Parse {
            line: first_no,
            message: format!("vocabulary size {} out of range 1..={}", d, MAX_VOCAB),
        });
    }

    // doc id -> dense row index in order of first appearance
    let mut row_of = vec![usize::MAX; n_decl + 1];
    let mut rows: Vec<Vec<u64>> = Vec::new();
    for (no, line) in lines {
        let line_no = no + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let parts: Vec<&str> = trimmed.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected `docId wordId count`, got {:?}", trimmed),
            });
        }
        let doc: usize = parts[0].parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("bad document id {:?}", parts[0]),
        })?;
        let word: usize = parts[1].parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("bad word id {:?}", parts[1]),
        })?;
        let count: u64 = parts[2].parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("bad count {:?}", parts[2]),
        })?;
        if doc == 0 || doc > n_decl {
            return Err(Error::Parse {
                line: line_no,
                message: format!("document id {} outside 1..={}", doc, n_decl),
            });
        }
        if word == 0 || word > d {
            return Err(Error::Parse {
                line: line_no,
                message: format!("word id {} outside 1..={}", word, d),
            });
        }
        if count == 0 {
            return Err(Error::Parse {
                line: line_no,
                message: "count must be at least 1".into(),
            });
        }
        if row_of[doc] == usize::MAX {
            row_of[doc] = rows.len();
            rows.push(vec![0; d]);
        }
        rows[row_of[doc]][word - 1] += count;
    }

    if rows.is_empty() {
        return Err(Error::Parse { line: first_no, message: "no documents: N=0".into() });
    }
    let n = rows.len();
    let mut counts = Array2::zeros((n, d));
    for (i, row) in rows.iter().enumerate() {
        for (w, &c) in row.iter().enumerate() {
            counts[[i, w]] = c;
        }
    }
    Corpus::from_counts(counts)
}

/// Write a corpus in the bag-of-words format.
pub fn save_bow(corpus: &Corpus, path: &Path) -> Result<()> {
    std::fs::write(path, format_bow(corpus))?;
    Ok(())
}

/// Render a corpus to the bag-of-words format.
pub fn format_bow(corpus: &Corpus) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", corpus.n_docs(), corpus.vocab_size());
    for n in 0..corpus.n_docs() {
        for (w, &c) in corpus.doc(n).iter().enumerate() {
            if c > 0 {
                let _ = writeln!(out, "{} {} {}", n + 1, w + 1, c);
            }
        }
    }
    out
}

/// Load a model from its text format.
pub fn load_model(path: &Path) -> Result<LdaModel> {
    let text = std::fs::read_to_string(path)?;
    parse_model(&text)
}

/// Parse the model format from a string. See the module docs.
pub fn parse_model(text: &str) -> Result<LdaModel> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (no, header) = lines
        .next()
        .ok_or(Error::Parse { line: 1, message: "empty file".into() })?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 3 {
        return Err(Error::Parse {
            line: no + 1,
            message: format!("expected header `d k alpha0`, got {:?}", header),
        });
    }
    let d: usize = parts[0].parse().map_err(|_| Error::Parse {
        line: no + 1,
        message: format!("bad vocabulary size {:?}", parts[0]),
    })?;
    let k: usize = parts[1].parse().map_err(|_| Error::Parse {
        line: no + 1,
        message: format!("bad topic count {:?}", parts[1]),
    })?;
    let alpha0: f64 = parts[2].parse().map_err(|_| Error::Parse {
        line: no + 1,
        message: format!("bad alpha0 {:?}", parts[2]),
    })?;
    if d == 0 || k == 0 {
        return Err(Error::Parse { line: no + 1, message: "d and k must be positive".into() });
    }

    let mut alpha = Array1::zeros(k);
    for i in 0..k {
        let (no, line) = lines.next().ok_or(Error::Parse {
            line: 0,
            message: format!("missing topic weight line {}", i + 1),
        })?;
        alpha[i] = line.trim().parse().map_err(|_| Error::Parse {
            line: no + 1,
            message: format!("bad topic weight {:?}", line.trim()),
        })?;
    }
    let mut topics = Array2::zeros((d, k));
    for w in 0..d {
        let (no, line) = lines.next().ok_or(Error::Parse {
            line: 0,
            message: format!("missing word row {}", w + 1),
        })?;
        let vals: Vec<&str> = line.split_whitespace().collect();
        if vals.len() != k {
            return Err(Error::Parse {
                line: no + 1,
                message: format!("expected {} values, got {}", k, vals.len()),
            });
        }
        for (i, v) in vals.iter().enumerate() {
            topics[[w, i]] = v.parse().map_err(|_| Error::Parse {
                line: no + 1,
                message: format!("bad probability {:?}", v),
            })?;
        }
    }
    Ok(LdaModel { topics, alpha, alpha0 })
}

/// Write a model in its text format; floats use the shortest round-trip form.
pub fn save_model(model: &LdaModel, path: &Path) -> Result<()> {
    std::fs::write(path, format_model(model))?;
    Ok(())
}

/// Render a model to its text format.
pub fn format_model(model: &LdaModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {} {}", model.vocab_size(), model.n_topics(), model.alpha0);
    for i in 0..model.n_topics() {
        let _ = writeln!(out, "{}", model.alpha[i]);
    }
    for w in 0..model.vocab_size() {
        let row: Vec<String> = (0..model.n_topics()).map(|i| model.topics[[w, i]].to_string()).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

/// Check the estimator preconditions: at least 3 documents, every document
/// at least 3 tokens. Errors name the offending documents (1-based).
pub fn validate(corpus: &Corpus) -> Result<()> {
    if corpus.n_docs() < 3 {
        return Err(Error::Validation(format!(
            "need at least 3 documents, got {}",
            corpus.n_docs()
        )));
    }
    let short: Vec<String> = (0..corpus.n_docs())
        .filter(|&n| corpus.doc_len(n) < 3)
        .map(|n| (n + 1).to_string())
        .collect();
    if !short.is_empty() {
        return Err(Error::Validation(format!(
            "documents shorter than 3 tokens: {}",
            short.join(", ")
        )));
    }
    Ok(())
}

/// Drop documents shorter than 3 tokens; returns the filtered corpus and the
/// number of documents removed.
pub fn drop_short(corpus: &Corpus) -> Result<(Corpus, usize)> {
    let keep: Vec<usize> = (0..corpus.n_docs()).filter(|&n| corpus.doc_len(n) >= 3).collect();
    let dropped = corpus.n_docs() - keep.len();
    if keep.is_empty() {
        return Err(Error::Validation("all documents are shorter than 3 tokens".into()));
    }
    let mut counts = Array2::zeros((keep.len(), corpus.vocab_size()));
    for (i, &n) in keep.iter().enumerate() {
        counts.row_mut(i).assign(&corpus.doc(n));
    }
    Ok((Corpus::from_counts(counts)?, dropped))
}

/// Draw from a Dirichlet distribution via normalized Gamma variates.
pub fn sample_dirichlet(alpha: ArrayView1<f64>, rng: &mut ChaCha8Rng) -> Array1<f64> {
    let mut draw = Array1::zeros(alpha.len());
    for (i, &a) in alpha.iter().enumerate() {
        let g = Gamma::new(a, 1.0).expect("positive shape");
        draw[i] = g.sample(rng).max(f64::MIN_POSITIVE);
    }
    let s = draw.sum();
    draw / s
}

/// Inverse-CDF draw from a categorical distribution given by `p` (sums to 1).
fn sample_categorical(p: ArrayView1<f64>, rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &pi) in p.iter().enumerate() {
        acc += pi;
        if u < acc {
            return i;
        }
    }
    p.len() - 1
}

/// Generate a random model: topic columns drawn from a sparse Dirichlet so
/// single words can dominate a topic, weights drawn uniformly and scaled to
/// sum to alpha0. Deterministic given the seed.
pub fn random_model(k: usize, d: usize, alpha0: f64, seed: u64) -> Result<LdaModel> {
    if k == 0 || d == 0 || k > d {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= k <= d, got k={} d={}",
            k, d
        )));
    }
    if d > MAX_VOCAB {
        return Err(Error::InvalidArgument(format!(
            "vocabulary size {} exceeds the dense-tensor limit {}",
            d, MAX_VOCAB
        )));
    }
    if !(alpha0 > 0.0) {
        return Err(Error::InvalidArgument(format!("alpha0 must be positive, got {}", alpha0)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut topics = Array2::zeros((d, k));
    let base = Array1::from_elem(d, 0.5);
    for i in 0..k {
        let col = sample_dirichlet(base.view(), &mut rng);
        topics.column_mut(i).assign(&col);
    }
    let mut alpha = Array1::zeros(k);
    for i in 0..k {
        alpha[i] = rng.random_range(0.5..1.5);
    }
    let s = alpha.sum();
    alpha *= alpha0 / s;
    Ok(LdaModel { topics, alpha, alpha0 })
}

/// Sample a synthetic corpus from a model: per document a topic mixture from
/// the Dirichlet weights, then `doc_len` tokens each drawn topic-then-word.
pub fn generate_synthetic(
    model: &LdaModel,
    n_docs: usize,
    doc_len: usize,
    seed: u64,
) -> Result<Corpus> {
    if n_docs < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 documents, got {}",
            n_docs
        )));
    }
    if doc_len < 3 {
        return Err(Error::InvalidArgument(format!(
            "documents need at least 3 tokens, got {}",
            doc_len
        )));
    }
    if !(model.alpha0 > 0.0) || model.alpha.iter().any(|&a| !(a > 0.0)) {
        return Err(Error::InvalidArgument("topic weights must be positive".into()));
    }
    let d = model.vocab_size();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = Array2::zeros((n_docs, d));
    for n in 0..n_docs {
        let theta = sample_dirichlet(model.alpha.view(), &mut rng);
        for _ in 0..doc_len {
            let z = sample_categorical(theta.view(), &mut rng);
            let w = sample_categorical(model.topics.column(z), &mut rng);
            counts[[n, w]] += 1;
        }
    }
    Corpus::from_counts(counts)
}
