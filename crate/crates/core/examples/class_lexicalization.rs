//! Cluster verb-noun pairs into latent classes, smooth their frequencies
//! and turn them into lexicalized parse properties.
//!
//!     cargo run --example class_lexicalization

use forestlm::corpus::{ParseRecord, Relation, SentenceEntry, Voice};
use forestlm::lexicalization::{
    build_freq_table, lexicalized_properties, train_clusters, ClusterConfig, PairCounts,
    RelationSpec,
};

fn reading(id: &str, verb: &str, noun: &str) -> ParseRecord {
    ParseRecord {
        parse_id: id.into(),
        cstructure: None,
        fstructure: None,
        relations: vec![Relation {
            relation: "OBJ".into(),
            verb: verb.into(),
            noun: noun.into(),
            voice: Voice::Active,
            verb_position: 1,
        }],
        frame: None,
        precomputed_features: Some(Default::default()),
    }
}

fn main() -> forestlm::Result<()> {
    let mut counts = PairCounts::new();
    for (v, n, c) in [
        ("trinken", "Bier", 9),
        ("trinken", "Wein", 6),
        ("trinken", "Wasser", 4),
        ("kaufen", "Bier", 3),
        ("kaufen", "Buch", 5),
        ("lesen", "Buch", 8),
        ("lesen", "Zeitung", 7),
        ("kaufen", "Zeitung", 2),
    ] {
        counts.add(v, n, c);
    }

    let (model, trace) = train_clusters(
        &counts,
        &ClusterConfig {
            n_classes: 2,
            seed: 1,
            ..Default::default()
        },
    )?;
    println!(
        "EM: {} steps, log-likelihood {:.4} -> {:.4}",
        trace.len() - 1,
        trace[0],
        trace.last().unwrap()
    );
    println!("class priors {:.3?}", model.priors());
    for c in 0..2 {
        println!(
            "  class {c}: verbs {:.2?} nouns {:.2?}",
            model.verb_given_class(c),
            model.noun_given_class(c)
        );
    }
    println!("  verbs {:?} nouns {:?}", model.verbs(), model.nouns());

    let table = build_freq_table(&model, &counts);
    println!("\n{:<8} {:<8} {:>3} {:>8}", "verb", "noun", "f", "f_c");
    for (v, n, f, fc) in table.iter() {
        println!("{v:<8} {n:<8} {f:>3} {fc:>8.3}");
    }
    // unseen pair: only the class model speaks
    println!(
        "{:<8} {:<8} {:>3} {:>8.3}",
        "kaufen",
        "Wein",
        0,
        table.get("kaufen", "Wein")
    );
    for (v, n) in [("trinken", "Bier"), ("kaufen", "Bier"), ("kaufen", "Wein")] {
        println!("p(c | {v}, {n}) = {:.4?}", model.class_membership(v, n));
    }

    // two readings differ only in which noun is the object
    let entry = SentenceEntry {
        sentence_id: "s".into(),
        tokens: ["Bier", "trinkt", "Hans"].map(String::from).into(),
        weight: 1.0,
        gold_index: Some(0),
        parses: vec![
            reading("obj=Bier", "trinken", "Bier"),
            reading("obj=Hans", "trinken", "Hans"),
        ],
    };
    let props = lexicalized_properties(&entry, &table, &RelationSpec::default());
    for (p, f) in entry.parses.iter().zip(props) {
        println!("\n{}: {:?}", p.parse_id, f);
    }
    Ok(())
}
