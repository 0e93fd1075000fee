//! Model evaluation: permutation-matched topic recovery error and a
//! privatized token log-likelihood built from perturbed sufficient
//! statistics.

use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::corpus::{Corpus, LdaModel};
use crate::error::{Error, Result};
use crate::privacy::{gaussian_sigma, Charge, PrivacyParams};
use crate::sensitivity::sens_suffstats;

/// Floor for log arguments when a counted word has no mass under the model.
const LOG_FLOOR: f64 = 1e-12;

/// Minimum-cost perfect assignment on a square cost matrix.
/// Returns `assign` with `assign[row] = column`.
pub fn hungarian(cost: &Array2<f64>) -> Vec<usize> {
    let n = cost.nrows();
    assert_eq!(n, cost.ncols(), "cost matrix must be square");
    // Shortest-augmenting-path formulation with row/column potentials,
    // 1-based with a virtual index 0.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[[i0 - 1, j - 1]] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            assign[p[j] - 1] = j - 1;
        }
    }
    assign
}

fn check_same_shape(estimated: &LdaModel, truth: &LdaModel) -> Result<()> {
    if estimated.vocab_size() != truth.vocab_size() || estimated.n_topics() != truth.n_topics() {
        return Err(Error::ShapeMismatch(format!(
            "models disagree: estimated {}x{}, truth {}x{}",
            estimated.vocab_size(),
            estimated.n_topics(),
            truth.vocab_size(),
            truth.n_topics()
        )));
    }
    Ok(())
}

/// Match estimated topics to reference topics: returns `perm` with
/// `perm[i]` the estimated column paired with reference topic `i`,
/// minimizing the total pairwise l2 distance.
pub fn match_topics(estimated: &LdaModel, truth: &LdaModel) -> Result<Vec<usize>> {
    check_same_shape(estimated, truth)?;
    let k = truth.n_topics();
    let cost = Array2::from_shape_fn((k, k), |(i, j)| {
        let diff = &estimated.topics.column(j) - &truth.topics.column(i);
        diff.mapv(|x| x * x).sum().sqrt()
    });
    Ok(hungarian(&cost))
}

/// Per-topic and mean l2 error under the optimal topic matching.
pub fn recovery_error(estimated: &LdaModel, truth: &LdaModel) -> Result<(Vec<f64>, f64)> {
    let perm = match_topics(estimated, truth)?;
    let k = truth.n_topics();
    let mut per_topic = Vec::with_capacity(k);
    for i in 0..k {
        let diff = &estimated.topics.column(perm[i]) - &truth.topics.column(i);
        per_topic.push(diff.mapv(|x| x * x).sum().sqrt());
    }
    let mean = per_topic.iter().sum::<f64>() / k as f64;
    Ok((per_topic, mean))
}

/// Privatized log-likelihood result.
#[derive(Debug, Clone)]
pub struct DpLoglik {
    pub value: f64,
    pub noise_sigma: f64,
    /// Words with positive count but no mass under any topic.
    pub floored_words: usize,
    pub charge: Charge,
}

/// Expected per-topic word counts under the prior-mean mixture:
/// S[i,w] = t_w * (alpha_i/alpha0) * mu_{i,w} / m(w), with m the mixture
/// marginal. Also returns m and the floored-word count.
fn suffstat_scores(corpus: &Corpus, model: &LdaModel) -> (Array2<f64>, Array1<f64>, usize) {
    let d = model.vocab_size();
    let k = model.n_topics();
    let weights = model.weights();
    let totals = corpus.word_totals();
    let marginal = Array1::from_shape_fn(d, |w| {
        (0..k).map(|i| weights[i] * model.topics[[w, i]]).sum::<f64>()
    });
    let mut floored = 0usize;
    for w in 0..d {
        if totals[w] > 0.0 && marginal[w] < LOG_FLOOR {
            floored += 1;
        }
    }
    let scores = Array2::from_shape_fn((k, d), |(i, w)| {
        if marginal[w] <= 0.0 {
            0.0
        } else {
            totals[w] * weights[i] * model.topics[[w, i]] / marginal[w]
        }
    });
    (scores, marginal, floored)
}

/// Log-likelihood from sufficient statistics perturbed at a given noise
/// scale; `noise_sigma = 0` gives the deterministic value. Returns the
/// value and the floored-word count.
pub fn dp_loglik_at_scale(
    corpus: &Corpus,
    model: &LdaModel,
    noise_sigma: f64,
    seed: u64,
) -> Result<(f64, usize)> {
    if corpus.vocab_size() != model.vocab_size() {
        return Err(Error::ShapeMismatch(format!(
            "corpus vocabulary {} does not match model vocabulary {}",
            corpus.vocab_size(),
            model.vocab_size()
        )));
    }
    if !(noise_sigma >= 0.0) || !noise_sigma.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "noise sigma must be finite and nonnegative, got {}",
            noise_sigma
        )));
    }
    let (scores, marginal, floored) = suffstat_scores(corpus, model);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, noise_sigma)
        .map_err(|e| Error::InvalidArgument(format!("bad noise scale: {}", e)))?;
    let mut value = 0.0;
    let (k, d) = (scores.nrows(), scores.ncols());
    for w in 0..d {
        let mut column = 0.0;
        for i in 0..k {
            let noised = scores[[i, w]] + normal.sample(&mut rng);
            column += noised.max(0.0);
        }
        value += column * marginal[w].max(LOG_FLOOR).ln();
    }
    Ok((value, floored))
}

/// Privatized log-likelihood: per-entry Gaussian noise at the
/// sufficient-statistic sensitivity times the mechanism multiplier.
/// Charges exactly one (epsilon, delta) entry.
pub fn dp_loglik(
    corpus: &Corpus,
    model: &LdaModel,
    params: &PrivacyParams,
    seed: u64,
) -> Result<DpLoglik> {
    let sens = sens_suffstats(corpus.vocab_size(), corpus.n_docs())?;
    let noise_sigma = gaussian_sigma(sens, params)?;
    let (value, floored_words) = dp_loglik_at_scale(corpus, model, noise_sigma, seed)?;
    Ok(DpLoglik {
        value,
        noise_sigma,
        floored_words,
        charge: Charge {
            label: "eval".to_string(),
            epsilon: params.epsilon,
            delta: params.delta,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::random_model;
    use ndarray::array;

    fn toy_model(topics: Array2<f64>, alpha: Array1<f64>) -> LdaModel {
        let alpha0 = alpha.sum();
        LdaModel { topics, alpha, alpha0 }
    }

    #[test]
    fn self_match_is_identity_with_zero_error() {
        let model = random_model(4, 9, 2.0, 3).unwrap();
        let perm = match_topics(&model, &model).unwrap();
        assert_eq!(perm, vec![0, 1, 2, 3]);
        let (per_topic, mean) = recovery_error(&model, &model).unwrap();
        assert!(per_topic.iter().all(|&e| e == 0.0));
        assert_eq!(mean, 0.0);
    }

    #[test]
    fn swapped_columns_match_with_swap() {
        let truth = random_model(3, 7, 1.0, 8).unwrap();
        let mut swapped = truth.clone();
        let c0 = truth.topics.column(0).to_owned();
        let c2 = truth.topics.column(2).to_owned();
        swapped.topics.column_mut(0).assign(&c2);
        swapped.topics.column_mut(2).assign(&c0);
        let perm = match_topics(&swapped, &truth).unwrap();
        assert_eq!(perm, vec![2, 1, 0]);
        let (_, mean) = recovery_error(&swapped, &truth).unwrap();
        assert!(mean < 1e-14);
    }

    #[test]
    fn disjoint_support_column_costs_sqrt_two() {
        let truth = toy_model(
            array![[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]],
            array![1.0, 1.0],
        );
        let mut est = truth.clone();
        est.topics.column_mut(1).assign(&array![0.0, 0.0, 1.0]);
        let (per_topic, _) = recovery_error(&est, &truth).unwrap();
        assert!((per_topic[0] - 0.0).abs() < 1e-15);
        assert!((per_topic[1] - 2.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn match_rejects_shape_mismatch() {
        let a = random_model(2, 5, 1.0, 0).unwrap();
        let b = random_model(3, 5, 1.0, 0).unwrap();
        assert!(match_topics(&a, &b).is_err());
        let c = random_model(2, 6, 1.0, 0).unwrap();
        assert!(match_topics(&a, &c).is_err());
    }

    #[test]
    fn hungarian_beats_greedy_on_crafted_instance() {
        // Greedy row-by-row picks (0,0) then is forced into 10.0; the
        // optimal assignment crosses over.
        let cost = array![[1.0, 2.0], [1.0, 10.0]];
        let assign = hungarian(&cost);
        assert_eq!(assign, vec![1, 0]);
    }

    #[test]
    fn uniform_single_topic_loglik_is_tokens_times_log_d() {
        let d = 6;
        let topics = Array2::from_elem((d, 1), 1.0 / d as f64);
        let model = toy_model(topics, array![2.0]);
        let counts = ndarray::arr2(&[[3u64, 0, 1, 2, 0, 4], [1, 1, 1, 1, 1, 1]]);
        let corpus = crate::corpus::Corpus::from_counts(counts.to_owned()).unwrap();
        let total = corpus.total_tokens() as f64;
        let (value, floored) = dp_loglik_at_scale(&corpus, &model, 0.0, 1).unwrap();
        let expected = total * (1.0 / d as f64).ln();
        assert!((value - expected).abs() < 1e-9, "value {} expected {}", value, expected);
        assert_eq!(floored, 0);
    }

    #[test]
    fn loglik_is_linear_in_counts_without_noise() {
        let model = random_model(3, 5, 1.0, 4).unwrap();
        let counts = ndarray::arr2(&[[2u64, 1, 0, 3, 1], [0, 4, 2, 0, 1], [1, 1, 1, 1, 1]]);
        let corpus1 = crate::corpus::Corpus::from_counts(counts.to_owned()).unwrap();
        let corpus2 = crate::corpus::Corpus::from_counts(counts.mapv(|c| 2 * c)).unwrap();
        let (v1, _) = dp_loglik_at_scale(&corpus1, &model, 0.0, 0).unwrap();
        let (v2, _) = dp_loglik_at_scale(&corpus2, &model, 0.0, 0).unwrap();
        assert!((v2 - 2.0 * v1).abs() < 1e-9 * v1.abs().max(1.0));
    }

    #[test]
    fn dp_loglik_charges_once_and_is_seed_deterministic() {
        let model = random_model(2, 4, 1.0, 6).unwrap();
        let counts = ndarray::arr2(&[[2u64, 1, 1, 0], [1, 0, 2, 1], [1, 1, 1, 1]]);
        let corpus = crate::corpus::Corpus::from_counts(counts).unwrap();
        let params = PrivacyParams::new(0.7, 1e-6).unwrap();
        let a = dp_loglik(&corpus, &model, &params, 42).unwrap();
        let b = dp_loglik(&corpus, &model, &params, 42).unwrap();
        let c = dp_loglik(&corpus, &model, &params, 43).unwrap();
        assert_eq!(a.value, b.value);
        assert_ne!(a.value, c.value);
        assert_eq!(a.charge.epsilon, 0.7);
        assert_eq!(a.charge.delta, 1e-6);
        assert!(a.noise_sigma > 0.0);
    }

    #[test]
    fn zero_mass_counted_word_is_floored_and_warned() {
        // Word 3 has positive count but zero probability under every topic.
        let topics = array![[0.5, 0.2], [0.3, 0.4], [0.2, 0.4], [0.0, 0.0]];
        let model = toy_model(topics, array![1.0, 1.0]);
        let counts = ndarray::arr2(&[[2u64, 1, 0, 1], [1, 2, 1, 0], [1, 1, 1, 1]]);
        let corpus = crate::corpus::Corpus::from_counts(counts).unwrap();
        let (value, floored) = dp_loglik_at_scale(&corpus, &model, 0.0, 0).unwrap();
        assert_eq!(floored, 1);
        assert!(value.is_finite());
    }
}
