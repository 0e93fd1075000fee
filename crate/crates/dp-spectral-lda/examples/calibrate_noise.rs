//! Privately release a lower bound for the k-th singular value, evaluate
//! the local sensitivity there, and see the implied noise scale shrink as
//! the release budget grows.

use dp_spectral_lda::corpus::{generate_synthetic, random_model};
use dp_spectral_lda::moments::m2_hat;
use dp_spectral_lda::privacy::{calibrate_procedure1, calibration_shift, PrivacyParams};
use dp_spectral_lda::sensitivity::{sens_whitened_tensor, SpectralContext};
use dp_spectral_lda::spectral::whiten;

fn main() {
    let (k, alpha0, n) = (3, 1.0, 20000);
    let model = random_model(k, 16, alpha0, 2).expect("model");
    let corpus = generate_synthetic(&model, n, 10, 8).expect("corpus");
    let m2 = m2_hat(&corpus, alpha0).expect("m2");
    let wh = whiten(&m2, k).expect("whiten");
    println!("clean spectrum: {:?}", wh.singular_values);

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

    println!(
        "\n{:>6} {:>12} {:>14} {:>14} {:>14}",
        "eps1", "shift", "sigma_k_tilde", "sensitivity", "noise sigma"
    );
    for eps1 in [0.25, 1.0, 4.0] {
        let mech = PrivacyParams::new(0.5, 1e-6).expect("params");
        match calibrate_procedure1(template, wh.sigma_k(), n, eps1, 1e-6, None, &mech, "e6", 99) {
            Ok(cal) => println!(
                "{:>6} {:>12.4e} {:>14.6} {:>14.4e} {:>14.4e}",
                eps1,
                calibration_shift(n, eps1, 1e-6).unwrap(),
                cal.sigma_k_tilde,
                cal.local_sensitivity,
                cal.noise_sigma
            ),
            Err(e) => println!("{:>6} release failed: {}", eps1, e),
        }
    }
    println!("\nsmaller shifts leave a larger certified sigma_k, so the");
    println!("sensitivity bound and the noise both fall as eps1 grows");
}
