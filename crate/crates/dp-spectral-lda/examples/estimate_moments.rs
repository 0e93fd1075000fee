//! Empirical moment estimators converge to the population moments as the
//! corpus grows.

use dp_spectral_lda::corpus::{generate_synthetic, random_model};
use dp_spectral_lda::moments::{m1_hat, m2_hat, m3_hat, population_moments};

fn main() {
    let alpha0 = 1.0;
    let model = random_model(2, 6, alpha0, 3).expect("model");
    let (p1, p2, p3) = population_moments(&model).expect("population");

    println!("{:>8} {:>12} {:>12} {:>12}", "docs", "m1 max err", "m2 max err", "m3 max err");
    for n in [100usize, 1000, 10000] {
        let corpus = generate_synthetic(&model, n, 9, 11).expect("corpus");
        let e1 = m1_hat(&corpus).expect("m1");
        let e2 = m2_hat(&corpus, alpha0).expect("m2");
        let e3 = m3_hat(&corpus, alpha0).expect("m3");

        let d1 = (&e1 - &p1).mapv(f64::abs).fold(0.0f64, |a, &b| a.max(b));
        let d2 = (&e2 - &p2).mapv(f64::abs).fold(0.0f64, |a, &b| a.max(b));
        let d3 = (&e3 - &p3).mapv(f64::abs).fold(0.0f64, |a, &b| a.max(b));
        println!("{:>8} {:>12.2e} {:>12.2e} {:>12.2e}", n, d1, d2, d3);
    }

    println!("\nper-document summaries are exactly simplex-normalized:");
    let corpus = generate_synthetic(&model, 3, 9, 11).expect("corpus");
    let doc = dp_spectral_lda::moments::doc_moments(corpus.doc(0)).expect("doc");
    println!("  m1 sums to {}", doc.m1.sum());
    println!("  m2 sums to {}", doc.m2.sum());
    println!("  m3 sums to {}", doc.m3.sum());
}
