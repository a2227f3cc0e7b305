//! Instantiate property templates over c-/f-structures, add the correction
//! property and print the resulting feature vectors.
//!
//!     cargo run --example structural_properties

use forestlm::corpus::{CTree, Corpus, FStructure, ParseRecord, SentenceEntry};
use forestlm::properties::{
    add_correction, build_registry, select_properties, FeaturizedCorpus, RegistryConfig,
};

fn parse(id: &str, tree: CTree, pairs: &[(&str, &str)]) -> ParseRecord {
    ParseRecord {
        parse_id: id.into(),
        cstructure: Some(tree),
        fstructure: Some(FStructure {
            pairs: pairs
                .iter()
                .map(|(a, v)| (a.to_string(), v.to_string()))
                .collect(),
            functions: vec!["SUBJ".into(), "OBJ".into()],
        }),
        relations: vec![],
        frame: None,
        precomputed_features: None,
    }
}

fn main() -> forestlm::Result<()> {
    let leaf = CTree::leaf;
    // "Hans sah den Mann": object attached to the verb vs. inside the subject
    let flat = CTree::node(
        "S",
        vec![
            CTree::node("NP:SUBJ", vec![leaf("Hans")]),
            CTree::node(
                "VP",
                vec![
                    leaf("sah"),
                    CTree::node("NP:OBJ", vec![leaf("den"), leaf("Mann")]),
                ],
            ),
        ],
    );
    let nested = CTree::node(
        "S",
        vec![
            CTree::node(
                "NP:SUBJ",
                vec![leaf("Hans"), CTree::node("VP", vec![leaf("sah")])],
            ),
            CTree::node("NP", vec![leaf("den"), leaf("Mann")]),
        ],
    );
    let corpus = Corpus::new(vec![SentenceEntry {
        sentence_id: "s1".into(),
        tokens: ["Hans", "sah", "den", "Mann"].map(String::from).into(),
        weight: 1.0,
        gold_index: Some(0),
        parses: vec![
            parse("p0", flat, &[("TENSE", "past"), ("CASE", "acc")]),
            parse("p1", nested, &[("TENSE", "past")]),
        ],
    }])?;

    let reg = build_registry(&corpus, &RegistryConfig::default(), None)?;
    println!("{} properties instantiated:", reg.len());
    for d in reg.descriptors() {
        println!(
            "  [{:>2}] {:<24} {:<28} active on {}",
            d.index,
            format!("{:?}", d.kind),
            d.key,
            d.activation_count
        );
    }

    let kept = select_properties(&reg, 2)?;
    println!("\n{} properties active on at least 2 parses", kept.len());

    let reg = add_correction(&reg, &corpus, None)?;
    println!("\ncorrection constant K = {}", reg.correction_k().unwrap());
    let fc = FeaturizedCorpus::build(&corpus, &reg, None, true)?;
    for (id, f) in fc.sentences[0]
        .parse_ids
        .iter()
        .zip(&fc.sentences[0].features)
    {
        println!("  {id}: total {} over {} nonzero entries", f.sum(), f.len());
    }
    Ok(())
}
