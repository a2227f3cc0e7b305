//! Uniform start against random starts on the same data.
//!
//!     cargo run --release --example init_comparison

use std::sync::Arc;

use forestlm::corpus::{generate_synthetic, SyntheticConfig};
use forestlm::properties::{add_correction, build_registry, FeaturizedCorpus, RegistryConfig};
use forestlm::trainer::{compare_inits, TrainingConfig, MONOTONICITY_SLACK};

fn main() -> forestlm::Result<()> {
    let (corpus, _) = generate_synthetic(
        &SyntheticConfig {
            n_sentences: 1000,
            seed: 7,
            ..Default::default()
        },
        None,
    )?;
    let flat = RegistryConfig {
        enabled_kinds: Default::default(),
        include_lexicalized: false,
    };
    let reg = build_registry(&corpus, &flat, None)?;
    let reg = Arc::new(add_correction(&reg, &corpus, None)?);
    let fc = FeaturizedCorpus::build(&corpus, &reg, None, true)?;

    for (label, cfg) in [
        (
            "after 20 iterations",
            TrainingConfig {
                max_iterations: 20,
                likelihood_tolerance: f64::MIN_POSITIVE,
                ..Default::default()
            },
        ),
        (
            "at convergence",
            TrainingConfig {
                max_iterations: 20_000,
                likelihood_tolerance: 1e-12,
                ..Default::default()
            },
        ),
    ] {
        let r = compare_inits(&fc, reg.clone(), &cfg, 20, 1.0, 1, MONOTONICITY_SLACK)?;
        let best = r
            .random_final_ls
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        let worst = r
            .random_final_ls
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        println!("{label}:");
        println!(
            "  uniform  L0 {:.5}  L {:.10}",
            r.uniform_initial_l, r.uniform_final_l
        );
        println!("  random   L  in [{worst:.10}, {best:.10}]");
        println!(
            "  uniform at least as good in {:.0}% of runs",
            100.0 * r.win_rate
        );
    }
    Ok(())
}
