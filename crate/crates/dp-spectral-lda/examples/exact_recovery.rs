//! Population moments in, exact parameters out: the spectral pipeline is
//! an exact inverse of the moment map when no sampling or noise is
//! involved.

use dp_spectral_lda::corpus::random_model;
use dp_spectral_lda::eval::{match_topics, recovery_error};
use dp_spectral_lda::moments::population_moments;
use dp_spectral_lda::pipeline::{fit_moments, FitConfig, MomentSet};

fn main() {
    for (k, d, alpha0) in [(2, 8, 0.5), (3, 12, 1.0), (5, 16, 10.0)] {
        let model = random_model(k, d, alpha0, 1234 + k as u64).expect("model");
        let (m1, m2, m3) = population_moments(&model).expect("moments");
        let moments = MomentSet { m1, m2, m3, n_docs: 1000 };

        let report =
            fit_moments(&moments, k, alpha0, &FitConfig::NonPrivate, 5).expect("fit");
        let (per_topic, mean) = recovery_error(&report.model, &model).expect("error");
        let perm = match_topics(&report.model, &model).expect("match");
        let alpha_err: f64 = (0..k)
            .map(|i| (report.model.alpha[perm[i]] - model.alpha[i]).abs())
            .fold(0.0, f64::max);

        println!("k={} d={} alpha0={}", k, d, alpha0);
        println!("  topic errors   = {:?}", per_topic);
        println!("  mean error     = {:.3e}", mean);
        println!("  max alpha error= {:.3e}", alpha_err);
        println!("  power steps    = {} (residual {:.1e})",
            report.diagnostics.power_iterations, report.diagnostics.power_residual);
        assert!(mean < 1e-6 && alpha_err < 1e-6);
    }
    println!("\nall three models recovered to numerical precision");
}
