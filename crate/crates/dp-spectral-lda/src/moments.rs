//! Word-count moment estimators: per-document summaries, bias-corrected
//! corpus estimators, and closed-form population moments.
//!
//! Per-document summaries are unbiased estimates of E[theta], E[theta (x)
//! theta], E[theta (x)^3] pushed through the topic matrix; the corpus
//! estimators correct those with cross-document terms weighted by alpha0 so
//! their expectations match the population moments exactly. Accumulation is
//! sequential over documents in corpus order, so results are deterministic.

use ndarray::{Array1, Array2, Array3, ArrayView1};

use crate::corpus::{Corpus, LdaModel};
use crate::error::{Error, Result};
use crate::tensor::{symmetrize_matrix, symmetrize_tensor};

/// Moment summaries of a single document. Each is a probability array:
/// entries are nonnegative and sum to 1.
#[derive(Debug, Clone)]
pub struct DocMoments {
    pub m1: Array1<f64>,
    pub m2: Array2<f64>,
    pub m3: Array3<f64>,
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

/// Sparse support of a count vector: (word, count) for positive counts.
fn support(counts: ArrayView1<u64>) -> Vec<(usize, f64)> {
    counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(w, &c)| (w, c as f64))
        .collect()
}

/// Moment summaries of one document; the document needs at least 3 tokens.
///
/// m1 = c / l; m2 has entries (c_i c_j - [i=j] c_i) / (l (l-1));
/// m3 subtracts all repeated-token patterns and normalizes by l (l-1) (l-2),
/// so each array averages distinct-position token tuples only.
pub fn doc_moments(counts: ArrayView1<u64>) -> Result<DocMoments> {
    let d = counts.len();
    let l = counts.iter().map(|&c| c as f64).sum::<f64>();
    if l < 3.0 {
        return Err(Error::Validation(format!(
            "document has {} tokens, need at least 3",
            l
        )));
    }
    let sup = support(counts);

    let mut m1 = Array1::zeros(d);
    for &(i, ci) in &sup {
        m1[i] = ci / l;
    }

    let pair_norm = l * (l - 1.0);
    let mut m2 = Array2::zeros((d, d));
    for &(i, ci) in &sup {
        for &(j, cj) in &sup {
            m2[[i, j]] = (ci * cj - if i == j { ci } else { 0.0 }) / pair_norm;
        }
    }

    let triple_norm = l * (l - 1.0) * (l - 2.0);
    let mut m3 = Array3::zeros((d, d, d));
    for &(i, ci) in &sup {
        for &(j, cj) in &sup {
            let cij = ci * cj;
            for &(m, cm) in &sup {
                m3[[i, j, m]] = cij * cm;
            }
        }
    }
    for &(i, ci) in &sup {
        m3[[i, i, i]] += 2.0 * ci;
        for &(j, cj) in &sup {
            let cij = ci * cj;
            m3[[i, i, j]] -= cij;
            m3[[i, j, j]] -= cij;
            m3[[j, i, j]] -= cij;
        }
    }
    m3.mapv_inplace(|x| x / triple_norm);

    Ok(DocMoments { m1, m2, m3 })
}

/// First-moment estimate: average of the per-document summaries.
pub fn m1_hat(corpus: &Corpus) -> Result<Array1<f64>> {
    let n = corpus.n_docs() as f64;
    let mut acc = Array1::zeros(corpus.vocab_size());
    for idx in 0..corpus.n_docs() {
        let l = corpus.doc_len(idx) as f64;
        if l < 1.0 {
            return Err(Error::Validation(format!("document {} is empty", idx + 1)));
        }
        for &(i, ci) in &support(corpus.doc(idx)) {
            acc[i] += ci / l;
        }
    }
    Ok(acc / n)
}

/// Second-moment estimate with the cross-document correction; unbiased for
/// the population second moment at the given alpha0. Needs at least 2
/// documents of at least 2 tokens each.
pub fn m2_hat(corpus: &Corpus, alpha0: f64) -> Result<Array2<f64>> {
    check_alpha0(alpha0)?;
    let d = corpus.vocab_size();
    let n = corpus.n_docs();
    if n < 2 {
        return Err(Error::Validation(format!("need at least 2 documents, got {}", n)));
    }
    let nf = n as f64;

    let mut within: Array2<f64> = Array2::zeros((d, d));
    let mut s1: Array1<f64> = Array1::zeros(d);
    let mut pair_self: Array2<f64> = Array2::zeros((d, d));
    for idx in 0..n {
        let l = corpus.doc_len(idx) as f64;
        if l < 2.0 {
            return Err(Error::Validation(format!(
                "document {} has {} tokens, need at least 2",
                idx + 1,
                l
            )));
        }
        let sup = support(corpus.doc(idx));
        let pair_norm = l * (l - 1.0);
        for &(i, ci) in &sup {
            s1[i] += ci / l;
            for &(j, cj) in &sup {
                within[[i, j]] += (ci * cj - if i == j { ci } else { 0.0 }) / pair_norm;
                pair_self[[i, j]] += (ci / l) * (cj / l);
            }
        }
    }

    let mut out = within / nf;
    if alpha0 > 0.0 {
        let coef = alpha0 / (alpha0 + 1.0) / (nf * (nf - 1.0));
        for i in 0..d {
            for j in 0..d {
                out[[i, j]] -= coef * (s1[i] * s1[j] - pair_self[[i, j]]);
            }
        }
    }
    Ok(symmetrize_matrix(&out))
}

/// Third-moment estimate with pair and triple cross-document corrections;
/// unbiased for the population third moment at the given alpha0. Needs at
/// least 3 documents of at least 3 tokens each.
pub fn m3_hat(corpus: &Corpus, alpha0: f64) -> Result<Array3<f64>> {
    check_alpha0(alpha0)?;
    let d = corpus.vocab_size();
    let n = corpus.n_docs();
    if n < 3 {
        return Err(Error::Validation(format!("need at least 3 documents, got {}", n)));
    }
    let nf = n as f64;

    // Single pass accumulating every per-document quantity the corrections need.
    let mut within: Array3<f64> = Array3::zeros((d, d, d)); // sum of per-doc third summaries
    let mut pair_sum: Array2<f64> = Array2::zeros((d, d)); // sum of per-doc second summaries
    let mut s1: Array1<f64> = Array1::zeros(d); // sum of per-doc first summaries
    let mut cross_sum: Array2<f64> = Array2::zeros((d, d)); // sum of a_n (x) a_n
    let mut pair_first: Array3<f64> = Array3::zeros((d, d, d)); // sum of m2_n (x) a_n
    let mut cube_self: Array3<f64> = Array3::zeros((d, d, d)); // sum of a_n (x) a_n (x) a_n

    for idx in 0..n {
        let l = corpus.doc_len(idx) as f64;
        if l < 3.0 {
            return Err(Error::Validation(format!(
                "document {} has {} tokens, need at least 3",
                idx + 1,
                l
            )));
        }
        let sup = support(corpus.doc(idx));
        let pair_norm = l * (l - 1.0);
        let triple_norm = pair_norm * (l - 2.0);

        for &(i, ci) in &sup {
            let ai = ci / l;
            s1[i] += ai;
            within[[i, i, i]] += 2.0 * ci / triple_norm;
            for &(j, cj) in &sup {
                let aj = cj / l;
                let m2ij = (ci * cj - if i == j { ci } else { 0.0 }) / pair_norm;
                pair_sum[[i, j]] += m2ij;
                cross_sum[[i, j]] += ai * aj;
                within[[i, i, j]] -= ci * cj / triple_norm;
                within[[i, j, j]] -= ci * cj / triple_norm;
                within[[j, i, j]] -= ci * cj / triple_norm;
                for &(m, cm) in &sup {
                    within[[i, j, m]] += ci * cj * cm / triple_norm;
                    pair_first[[i, j, m]] += m2ij * (cm / l);
                    cube_self[[i, j, m]] += ai * aj * (cm / l);
                }
            }
        }
    }

    let mut out = within / nf;

    if alpha0 > 0.0 {
        // Pair correction: mean over ordered document pairs of m2_n (x) a_m,
        // folded in over the three tensor positions of the first-moment leg.
        let coef_pair = alpha0 / (alpha0 + 2.0) / (nf * (nf - 1.0));
        let mut b1: Array3<f64> = Array3::zeros((d, d, d));
        for i in 0..d {
            for j in 0..d {
                let pij = pair_sum[[i, j]];
                for m in 0..d {
                    b1[[i, j, m]] = -coef_pair * (pij * s1[m] - pair_first[[i, j, m]]);
                }
            }
        }
        for i in 0..d {
            for j in 0..d {
                for m in 0..d {
                    out[[i, j, m]] += b1[[i, j, m]] + b1[[i, m, j]] + b1[[m, i, j]];
                }
            }
        }

        // Triple correction: mean over distinct document triples of
        // a_n (x) a_m (x) a_p via inclusion-exclusion on the full cube.
        let coef_triple =
            2.0 * alpha0 * alpha0 / ((alpha0 + 1.0) * (alpha0 + 2.0)) / (nf * (nf - 1.0) * (nf - 2.0));
        for i in 0..d {
            for j in 0..d {
                for m in 0..d {
                    let distinct = s1[i] * s1[j] * s1[m]
                        - cross_sum[[i, j]] * s1[m]
                        - cross_sum[[i, m]] * s1[j]
                        - cross_sum[[j, m]] * s1[i]
                        + 2.0 * cube_self[[i, j, m]];
                    out[[i, j, m]] += coef_triple * distinct;
                }
            }
        }
    }

    Ok(symmetrize_tensor(&out))
}

/// Population moments of a model: weighted sums of rank-one powers of the
/// topic columns with Dirichlet mixture weights.
pub fn population_moments(model: &LdaModel) -> Result<(Array1<f64>, Array2<f64>, Array3<f64>)> {
    let a0 = model.alpha0;
    if !(a0 > 0.0) {
        return Err(Error::InvalidArgument(format!("alpha0 must be positive, got {}", a0)));
    }
    let d = model.vocab_size();
    let k = model.n_topics();
    let mut m1 = Array1::zeros(d);
    let mut m2 = Array2::zeros((d, d));
    let mut m3 = Array3::zeros((d, d, d));
    for t in 0..k {
        let mu = model.topics.column(t);
        let w1 = model.alpha[t] / a0;
        let w2 = model.alpha[t] / (a0 * (a0 + 1.0));
        let w3 = 2.0 * model.alpha[t] / (a0 * (a0 + 1.0) * (a0 + 2.0));
        for i in 0..d {
            m1[i] += w1 * mu[i];
            for j in 0..d {
                m2[[i, j]] += w2 * mu[i] * mu[j];
                for l in 0..d {
                    m3[[i, j, l]] += w3 * mu[i] * mu[j] * mu[l];
                }
            }
        }
    }
    Ok((m1, m2, m3))
}

/// Raw moments E[theta], E[theta (x) theta], E[theta (x)^3] of a Dirichlet
/// distribution with the given positive parameter vector.
pub fn dirichlet_moments(alpha: ArrayView1<f64>) -> Result<(Array1<f64>, Array2<f64>, Array3<f64>)> {
    if alpha.iter().any(|&a| !(a > 0.0)) {
        return Err(Error::InvalidArgument("dirichlet parameters must be positive".into()));
    }
    let k = alpha.len();
    let a0: f64 = alpha.sum();
    let denom1 = a0;
    let denom2 = a0 * (a0 + 1.0);
    let denom3 = a0 * (a0 + 1.0) * (a0 + 2.0);

    let mut m1 = Array1::zeros(k);
    for i in 0..k {
        m1[i] = alpha[i] / denom1;
    }
    let mut m2 = Array2::zeros((k, k));
    for i in 0..k {
        for j in 0..k {
            m2[[i, j]] = (alpha[i] * alpha[j] + if i == j { alpha[i] } else { 0.0 }) / denom2;
        }
    }
    let mut m3 = Array3::zeros((k, k, k));
    for i in 0..k {
        for j in 0..k {
            for l in 0..k {
                let mut v = alpha[i] * alpha[j] * alpha[l];
                if i == j {
                    v += alpha[i] * alpha[l];
                }
                if j == l {
                    v += alpha[j] * alpha[i];
                }
                if i == l {
                    v += alpha[i] * alpha[j];
                }
                if i == j && j == l {
                    v += 2.0 * alpha[i];
                }
                m3[[i, j, l]] = v / denom3;
            }
        }
    }
    Ok((m1, m2, m3))
}
