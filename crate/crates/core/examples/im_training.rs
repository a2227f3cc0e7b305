//! Fit a model to ambiguous data with iterative maximization and compare it
//! with a model fitted to the unambiguous part only.
//!
//!     cargo run --release --example im_training

use std::sync::Arc;

use forestlm::corpus::{extract_parsebank, generate_synthetic, Corpus, SyntheticConfig};
use forestlm::evaluation::{evaluate, Task};
use forestlm::model::LogLinearModel;
use forestlm::properties::{add_correction, build_registry, FeaturizedCorpus, RegistryConfig};
use forestlm::trainer::{train, TrainingConfig};

fn fit(corpus: &Corpus, cfg: &TrainingConfig) -> forestlm::Result<LogLinearModel> {
    let flat = RegistryConfig {
        enabled_kinds: Default::default(),
        include_lexicalized: false,
    };
    let reg = build_registry(corpus, &flat, None)?;
    let reg = Arc::new(add_correction(&reg, corpus, None)?);
    let fc = FeaturizedCorpus::build(corpus, &reg, None, true)?;
    let (model, trace) = train(&fc, reg, cfg)?;
    println!(
        "  {} iterations, L {:.5} -> {:.5}, converged: {}",
        trace.records.len(),
        trace.initial_likelihood(),
        trace.final_likelihood(),
        trace.converged
    );
    for r in trace.records.iter().step_by(50) {
        println!(
            "    iter {:>4}  L {:.6}  max|gamma| {:.2e}",
            r.iteration, r.log_likelihood, r.max_gamma
        );
    }
    Ok(model)
}

fn main() -> forestlm::Result<()> {
    let synth = SyntheticConfig {
        n_sentences: 2000,
        seed: 0,
        ..Default::default()
    };
    let (train_corpus, hidden) = generate_synthetic(&synth, None)?;
    let (test_corpus, _) = generate_synthetic(
        &SyntheticConfig {
            n_sentences: 500,
            ambiguity_range: (2, 8),
            seed: 1000,
            ..synth.clone()
        },
        Some(hidden.true_params.clone()),
    )?;
    let train_corpus = train_corpus.aggregate_duplicates()?;
    let cfg = TrainingConfig {
        max_iterations: 2000,
        ..Default::default()
    };

    println!("all {} sentence types:", train_corpus.len());
    let im = fit(&train_corpus, &cfg)?;
    let pb_corpus = extract_parsebank(&train_corpus)?;
    println!("parsebank of {} types:", pb_corpus.len());
    let pb = fit(&pb_corpus, &cfg)?;

    for (name, m) in [("ambiguous data", &im), ("parsebank", &pb)] {
        let test = FeaturizedCorpus::build(&test_corpus, m.registry(), None, false)?;
        let out = evaluate(m, &test, Task::ExactMatch, 1e-9)?;
        println!(
            "{name:<15} precision {:.3}",
            out.precision.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
