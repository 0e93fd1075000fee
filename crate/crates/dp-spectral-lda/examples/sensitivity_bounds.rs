//! The closed-form adjacency sensitivities, how they shrink with corpus
//! size, and an empirical spot check that swapping one document never
//! exceeds them.

use dp_spectral_lda::corpus::{generate_synthetic, random_model, Corpus};
use dp_spectral_lda::moments::{m2_hat, m3_hat};
use dp_spectral_lda::sensitivity::{sens_m2, sens_m3, sens_sigma_k, sens_suffstats};
use dp_spectral_lda::tensor::{l1_matrix, l1_tensor};

fn main() {
    let alpha0 = 1.0;
    println!("{:>8} {:>12} {:>12} {:>12} {:>12}", "docs", "m2 bound", "m3 bound", "sigma_k", "suffstats");
    for n in [30usize, 300, 3000, 30000] {
        println!(
            "{:>8} {:>12.3e} {:>12.3e} {:>12.3e} {:>12.3e}",
            n,
            sens_m2(alpha0, n).unwrap(),
            sens_m3(alpha0, n).unwrap(),
            sens_sigma_k(n).unwrap(),
            sens_suffstats(8, n).unwrap(),
        );
    }

    // Adjacent corpora: replace one document, measure the actual moment
    // movement against the bound.
    let model = random_model(2, 8, alpha0, 5).expect("model");
    let n = 30;
    let base = generate_synthetic(&model, n, 6, 21).expect("base");
    let other = generate_synthetic(&model, n, 6, 22).expect("other");

    let mut worst2: f64 = 0.0;
    let mut worst3: f64 = 0.0;
    for swap in 0..10 {
        let mut counts = base.counts.clone();
        counts.row_mut(swap).assign(&other.counts.row(swap));
        let adjacent = Corpus::from_counts(counts).expect("adjacent");

        let d2 = l1_matrix(&(&m2_hat(&adjacent, alpha0).unwrap() - &m2_hat(&base, alpha0).unwrap()));
        let d3 = l1_tensor(&(&m3_hat(&adjacent, alpha0).unwrap() - &m3_hat(&base, alpha0).unwrap()));
        worst2 = worst2.max(d2);
        worst3 = worst3.max(d3);
    }
    let b2 = sens_m2(alpha0, n).unwrap();
    let b3 = sens_m3(alpha0, n).unwrap();
    println!("\nworst observed over 10 one-document swaps at N={}:", n);
    println!("  |dM2|_1 = {:.4e}  vs bound {:.4e}  (ratio {:.2})", worst2, b2, worst2 / b2);
    println!("  |dM3|_1 = {:.4e}  vs bound {:.4e}  (ratio {:.2})", worst3, b3, worst3 / b3);
    assert!(worst2 <= b2 && worst3 <= b3);
}
