//! Property tests: structural invariants that must hold for arbitrary
//! valid inputs.

use dp_spectral_lda::corpus::{format_bow, format_model, parse_bow, parse_model, Corpus, LdaModel};
use dp_spectral_lda::eval::hungarian;
use dp_spectral_lda::moments::doc_moments;
use dp_spectral_lda::privacy::{perturb_symmetric_matrix, perturb_symmetric_tensor};
use ndarray::{Array1, Array2, Array3};
use proptest::prelude::*;

fn count_vector() -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(0u64..5, 2..6).prop_filter("needs 3 tokens", |v| {
        v.iter().sum::<u64>() >= 3
    })
}

fn count_matrix() -> impl Strategy<Value = Vec<Vec<u64>>> {
    (2usize..5, 1usize..5).prop_flat_map(|(d, n)| {
        prop::collection::vec(prop::collection::vec(0u64..4, d..=d), n..=n)
            .prop_filter("nonempty docs", |rows| rows.iter().all(|r| r.iter().sum::<u64>() >= 1))
    })
}

proptest! {
    #[test]
    fn doc_summaries_are_probability_arrays(counts in count_vector()) {
        let arr = Array1::from_vec(counts);
        let m = doc_moments(arr.view()).unwrap();
        prop_assert!((m.m1.sum() - 1.0).abs() < 1e-12);
        prop_assert!((m.m2.sum() - 1.0).abs() < 1e-12);
        prop_assert!((m.m3.sum() - 1.0).abs() < 1e-12);
        prop_assert!(m.m1.iter().all(|&x| x >= 0.0));
        prop_assert!(m.m2.iter().all(|&x| x >= 0.0));
        prop_assert!(m.m3.iter().all(|&x| x >= 0.0));
        // Symmetry of the pair summary.
        let d = m.m2.nrows();
        for i in 0..d {
            for j in 0..d {
                prop_assert!((m.m2[[i, j]] - m.m2[[j, i]]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn matrix_perturbation_stays_symmetric(seed in any::<u64>(), sigma in 0.0f64..10.0, d in 2usize..6) {
        let base = Array2::from_shape_fn((d, d), |(i, j)| ((i * 7 + j * 3) % 5) as f64);
        let sym = (&base + &base.t()) / 2.0;
        let noisy = perturb_symmetric_matrix(&sym, sigma, seed).unwrap();
        for i in 0..d {
            for j in 0..d {
                prop_assert_eq!(noisy[[i, j]], noisy[[j, i]]);
            }
        }
    }

    #[test]
    fn tensor_perturbation_stays_fully_symmetric(seed in any::<u64>(), sigma in 0.0f64..10.0, d in 2usize..5) {
        let mut base = Array3::<f64>::zeros((d, d, d));
        for i in 0..d {
            for j in 0..d {
                for l in 0..d {
                    let mut idx = [i, j, l];
                    idx.sort_unstable();
                    base[[i, j, l]] = (idx[0] * 9 + idx[1] * 4 + idx[2]) as f64;
                }
            }
        }
        let noisy = perturb_symmetric_tensor(&base, sigma, seed).unwrap();
        for i in 0..d {
            for j in 0..d {
                for l in 0..d {
                    prop_assert_eq!(noisy[[i, j, l]], noisy[[i, l, j]]);
                    prop_assert_eq!(noisy[[i, j, l]], noisy[[j, i, l]]);
                    prop_assert_eq!(noisy[[i, j, l]], noisy[[l, j, i]]);
                }
            }
        }
    }

    #[test]
    fn bag_of_words_round_trips(rows in count_matrix()) {
        let n = rows.len();
        let d = rows[0].len();
        let mut counts = Array2::<u64>::zeros((n, d));
        for (i, row) in rows.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                counts[[i, j]] = c;
            }
        }
        let corpus = Corpus::from_counts(counts.clone()).unwrap();
        let text = format_bow(&corpus);
        let back = parse_bow(&text).unwrap();
        prop_assert_eq!(back.counts, counts);
    }

    #[test]
    fn model_file_round_trips(seed_vals in prop::collection::vec(0.01f64..1.0, 6)) {
        let d = 3;
        let k = 2;
        let mut topics = Array2::<f64>::zeros((d, k));
        for j in 0..k {
            let col: Vec<f64> = (0..d).map(|i| seed_vals[j * d + i]).collect();
            let s: f64 = col.iter().sum();
            for i in 0..d {
                topics[[i, j]] = col[i] / s;
            }
        }
        let alpha = Array1::from_vec(vec![0.7, 0.3]);
        let model = LdaModel { topics: topics.clone(), alpha, alpha0: 1.0 };
        let text = format_model(&model);
        let back = parse_model(&text).unwrap();
        prop_assert_eq!(back.topics, topics);
        prop_assert_eq!(back.alpha0, 1.0);
    }

    #[test]
    fn assignment_never_beaten_by_random_permutation(
        vals in prop::collection::vec(0.0f64..100.0, 16),
        shuffle_seed in any::<u64>(),
    ) {
        let cost = Array2::from_shape_fn((4, 4), |(i, j)| vals[i * 4 + j]);
        let assign = hungarian(&cost);
        let best: f64 = assign.iter().enumerate().map(|(i, &j)| cost[[i, j]]).sum();
        // Compare against an arbitrary permutation derived from the seed.
        let mut perm: Vec<usize> = (0..4).collect();
        let mut s = shuffle_seed;
        for i in (1..4).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let j = (s >> 33) as usize % (i + 1);
            perm.swap(i, j);
        }
        let other: f64 = perm.iter().enumerate().map(|(i, &j)| cost[[i, j]]).sum();
        prop_assert!(best <= other + 1e-9);
    }
}
