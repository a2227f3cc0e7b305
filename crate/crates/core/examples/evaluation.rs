//! Exact-match and frame-match evaluation of a trained model, a random
//! baseline and a sweep over training checkpoints.
//!
//!     cargo run --release --example evaluation

use std::sync::Arc;

use forestlm::corpus::{generate_synthetic, SyntheticConfig};
use forestlm::evaluation::{
    evaluate, random_baseline, render_table, sweep_checkpoints, sweep_csv, sweep_peak, Task,
};
use forestlm::properties::{add_correction, build_registry, FeaturizedCorpus, RegistryConfig};
use forestlm::trainer::{train, TrainingConfig};

fn main() -> forestlm::Result<()> {
    let synth = SyntheticConfig {
        n_sentences: 1000,
        seed: 11,
        ..Default::default()
    };
    let (train_corpus, hidden) = generate_synthetic(&synth, None)?;
    let (test_corpus, _) = generate_synthetic(
        &SyntheticConfig {
            n_sentences: 300,
            ambiguity_range: (2, 8),
            seed: 12,
            ..synth.clone()
        },
        Some(hidden.true_params),
    )?;

    let flat = RegistryConfig {
        enabled_kinds: Default::default(),
        include_lexicalized: false,
    };
    let reg = build_registry(&train_corpus, &flat, None)?;
    let reg = Arc::new(add_correction(&reg, &train_corpus, None)?);
    let fc = FeaturizedCorpus::build(&train_corpus, &reg, None, true)?;
    let cfg = TrainingConfig {
        max_iterations: 60,
        checkpoint_every: 10,
        ..Default::default()
    };
    let (model, trace) = train(&fc, reg.clone(), &cfg)?;
    let test = FeaturizedCorpus::build(&test_corpus, &reg, None, false)?;

    for task in [Task::ExactMatch, Task::FrameMatch] {
        let out = evaluate(&model, &test, task, 1e-9)?;
        print!("{}", render_table(&out));
        let base = random_baseline(&model, &test, task, 100, 0, 1e-9)?;
        println!(
            "random baseline: {:.3} +- {:.3} over {} models\n",
            base.mean_precision, base.stdev, base.n_defined
        );
    }

    let rows = sweep_checkpoints(&model, &trace.checkpoints, &test, Task::ExactMatch, 1e-9)?;
    print!("{}", sweep_csv(&rows));
    if let Some(best) = sweep_peak(&rows) {
        println!("best precision at iteration {}", best.iteration);
    }
    Ok(())
}
