//! Score a parse universe with a log-linear model: normalization, the
//! conditional distribution over one parse set, disambiguation and the
//! model's feature expectations.
//!
//!     cargo run --example log_linear_model

use std::sync::Arc;

use forestlm::corpus::{generate_synthetic, SyntheticConfig};
use forestlm::model::{model_expectation, Decision, LogLinearModel};
use forestlm::properties::{
    add_correction, build_registry, FeaturizedCorpus, PropertyKind, RegistryConfig,
};

fn main() -> forestlm::Result<()> {
    let cfg = SyntheticConfig {
        n_sentences: 200,
        n_features: 4,
        seed: 3,
        ..Default::default()
    };
    let (corpus, hidden) = generate_synthetic(&cfg, None)?;
    let flat = RegistryConfig {
        enabled_kinds: Default::default(),
        include_lexicalized: false,
    };
    let reg = build_registry(&corpus, &flat, None)?;
    let reg = Arc::new(add_correction(&reg, &corpus, None)?);
    let fc = FeaturizedCorpus::build(&corpus, &reg, None, true)?;

    // plug the hidden parameters into the registry's layout
    let mut lambda = vec![0.0; reg.len()];
    for (i, &t) in hidden.true_params.iter().enumerate() {
        if let Some(j) = reg.index_of(PropertyKind::Precomputed, &i.to_string()) {
            lambda[j] = t;
        }
    }
    let model = LogLinearModel::new(
        reg.clone(),
        lambda,
        forestlm::model::Reference::Uniform,
        fc.n_parses(),
    )?;

    let dist = model.normalize(&fc)?;
    println!(
        "log Z = {:.4}, total mass {:.12}",
        dist.log_z(),
        dist.total()
    );

    let s = fc.sentences.iter().position(|s| s.len() > 2).unwrap();
    let sent = &fc.sentences[s];
    println!(
        "\nconditional over {} ({} parses):",
        sent.sentence_id,
        sent.len()
    );
    let truth = hidden.conditional(&corpus.entries()[s]);
    for ((id, p), t) in sent.parse_ids.iter().zip(dist.conditional(s)?).zip(truth) {
        println!("  {id:<4} model {p:.4}  hidden {t:.4}");
    }
    match model.disambiguate(sent, 1e-9)? {
        Decision::Unique(j) => println!("picks {} (gold {:?})", sent.parse_ids[j], sent.gold_index),
        Decision::DontKnow(tied) => println!("tie between {tied:?}"),
    }

    let zero = LogLinearModel::zeros(reg.clone(), fc.n_parses())?;
    let undecided = fc
        .sentences
        .iter()
        .filter(|s| matches!(zero.disambiguate(s, 1e-9), Ok(Decision::DontKnow(_))))
        .count();
    println!(
        "\nall-zero model leaves {undecided} of {} sentences undecided",
        fc.sentences.len()
    );

    let e = model_expectation(&fc, &dist)?;
    println!("expected features: {:.3?}", e);
    Ok(())
}
