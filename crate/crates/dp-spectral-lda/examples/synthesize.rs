//! Generate a corpus from a random topic model and round-trip the file
//! formats.

use dp_spectral_lda::corpus::{
    format_bow, format_model, generate_synthetic, parse_bow, parse_model, random_model,
};

fn main() {
    let model = random_model(3, 10, 1.0, 42).expect("model");
    println!("model: d={} k={} alpha0={}", model.vocab_size(), model.n_topics(), model.alpha0);
    println!("alpha = {:?}", model.alpha.to_vec());

    let corpus = generate_synthetic(&model, 500, 12, 7).expect("corpus");
    println!(
        "corpus: {} docs, {} tokens, vocabulary {}",
        corpus.n_docs(),
        corpus.total_tokens(),
        corpus.vocab_size()
    );

    let bow = format_bow(&corpus);
    let reparsed = parse_bow(&bow).expect("round trip");
    assert_eq!(reparsed.counts, corpus.counts);
    println!("bag-of-words round trip: {} bytes, identical counts", bow.len());

    let text = format_model(&model);
    let remodel = parse_model(&text).expect("model round trip");
    assert_eq!(remodel.topics, model.topics);
    println!("model round trip: {} bytes, identical parameters", text.len());

    println!("\nfirst lines of the corpus file:");
    for line in bow.lines().take(5) {
        println!("  {}", line);
    }
}
