//! Generate a synthetic corpus from a hidden log-linear model, write it as
//! JSON Lines, read it back and pull out the parsebank.
//!
//!     cargo run --example synthetic_corpus

use forestlm::corpus::{
    corpus_stats, extract_parsebank, generate_synthetic, read_corpus, write_corpus, LoadOptions,
    SyntheticConfig,
};

fn main() -> forestlm::Result<()> {
    let cfg = SyntheticConfig {
        n_sentences: 500,
        ambiguity_range: (1, 6),
        n_features: 5,
        seed: 42,
        ..Default::default()
    };
    let (corpus, hidden) = generate_synthetic(&cfg, None)?;
    println!("hidden parameters: {:.3?}", hidden.true_params);

    let st = corpus_stats(&corpus);
    println!(
        "{} sentences, mean ambiguity {:.2}, universe of {} parses",
        st.n_sentences, st.mean_ambiguity, st.universe_size
    );

    let first = &corpus.entries()[0];
    println!(
        "\n{} ({} parses, gold {:?})",
        first.sentence_id,
        first.ambiguity(),
        first.gold_index
    );
    for (p, prob) in first.parses.iter().zip(hidden.conditional(first)) {
        println!(
            "  {:<4} p = {prob:.3}  features {:?}",
            p.parse_id,
            p.precomputed_features.as_ref().unwrap()
        );
    }

    // round trip through the on-disk format
    let mut buf = Vec::new();
    write_corpus(&corpus, &mut buf)?;
    let back = read_corpus(buf.as_slice(), LoadOptions::default())?;
    assert_eq!(back.len(), corpus.len());
    println!("\nserialized to {} bytes and read back", buf.len());

    let pb = extract_parsebank(&corpus)?;
    println!("parsebank: {} unambiguous sentences", pb.len());
    Ok(())
}
