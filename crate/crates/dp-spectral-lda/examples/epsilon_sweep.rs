//! A small budget grid sweep through the library API, printed as the same
//! CSV the command-line tool writes.

use dp_spectral_lda::sweep::{load_sweep_input, parse_sweep_spec, run_sweep, sweep_csv};

fn main() {
    let spec_text = "\
eps_grid=0.5,1,2
configs=none,1
repeats=2
seed=11
delta=1e-6
synth_k=2
synth_d=10
synth_alpha0=1.0
synth_docs=4000
synth_doc_len=8
synth_seed=5
";
    let spec = parse_sweep_spec(spec_text).expect("spec");
    let input = load_sweep_input(&spec).expect("input");
    let outcome = run_sweep(&input, &spec).expect("sweep");

    print!("{}", sweep_csv(&outcome.rows));
    println!();
    for (config, split) in &outcome.best_splits {
        println!("best split for config {}: {}", config.label(), split);
    }
    println!("\nrerunning the same spec reproduces every column except wall_ms");
}
