use std::fs;
use std::path::{Path, PathBuf};

use forestlm::cli::{main_from, RunManifest, MANIFEST_FILE};
use forestlm::corpus::{load_corpus, LoadOptions};
use forestlm::lexicalization::LexFrequencyTable;

struct Sandbox {
    dir: tempfile::TempDir,
}

impl Sandbox {
    fn new() -> Self {
        Sandbox {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    fn arg(&self, rel: &str) -> String {
        self.path(rel).to_string_lossy().into_owned()
    }

    fn run(&self, args: &[&str]) -> i32 {
        main_from(std::iter::once("forestlm").chain(args.iter().copied()))
    }

    fn synth(&self, out: &str, extra: &[&str]) {
        let mut args = vec!["synth", "--seed", "5", "--out-dir"];
        let out = self.arg(out);
        args.push(&out);
        args.extend_from_slice(extra);
        if !extra.contains(&"--sentences") {
            args.extend_from_slice(&["--sentences", "200"]);
        }
        assert_eq!(self.run(&args), 0);
    }
}

fn n_entries(path: &Path) -> usize {
    let opts = LoadOptions {
        normalize_weights: false,
        ..LoadOptions::default()
    };
    load_corpus(path, opts).unwrap().len()
}

#[test]
fn synth_split_sizes_and_determinism() {
    let sb = Sandbox::new();
    sb.synth("a", &["--split", "0.8"]);
    sb.synth("b", &["--split", "0.8"]);
    assert_eq!(n_entries(&sb.path("a/train.jsonl")), 160);
    assert_eq!(n_entries(&sb.path("a/test.jsonl")), 40);
    for f in ["train.jsonl", "test.jsonl", "hidden_model.json"] {
        assert_eq!(
            fs::read(sb.path("a").join(f)).unwrap(),
            fs::read(sb.path("b").join(f)).unwrap()
        );
    }

    sb.synth("odd", &["--sentences", "7", "--split", "0.5"]);
    assert_eq!(n_entries(&sb.path("odd/train.jsonl")), 3);
    assert_eq!(n_entries(&sb.path("odd/test.jsonl")), 4);
}

#[test]
fn synth_unambiguous_output() {
    let sb = Sandbox::new();
    sb.synth("pb", &["--ambiguity", "1", "1"]);
    let c = load_corpus(sb.path("pb/train.jsonl"), LoadOptions::default()).unwrap();
    assert!(c
        .entries()
        .iter()
        .all(|e| e.parses.len() == 1 && e.gold_index == Some(0)));
}

#[test]
fn synth_rejects_bad_ranges() {
    let sb = Sandbox::new();
    let out = sb.arg("x");
    assert_eq!(
        sb.run(&["synth", "--ambiguity", "4", "2", "--out-dir", &out]),
        1
    );
    assert_eq!(
        sb.run(&["synth", "--ambiguity", "0", "2", "--out-dir", &out]),
        1
    );
    assert_eq!(sb.run(&["synth", "--split", "1.5", "--out-dir", &out]), 1);
}

#[test]
fn train_on_parsebank_writes_monotone_trace() {
    let sb = Sandbox::new();
    sb.synth("d", &["--ambiguity", "1", "2"]);
    let (corpus, out) = (sb.arg("d/train.jsonl"), sb.arg("t"));
    assert_eq!(
        sb.run(&[
            "train",
            "--corpus",
            &corpus,
            "--parsebank",
            "--max-iterations",
            "40",
            "--out-dir",
            &out
        ]),
        0
    );
    let trace = fs::read_to_string(sb.path("t/trace.jsonl")).unwrap();
    let ls: Vec<f64> = trace
        .lines()
        .map(|l| {
            serde_json::from_str::<serde_json::Value>(l).unwrap()["L"]
                .as_f64()
                .unwrap()
        })
        .collect();
    assert!(ls.len() > 1);
    assert!(ls.windows(2).all(|w| w[1] >= w[0] - 1e-10));
    assert!(sb.path("t/model.json").exists());
    assert!(sb.path("t/checkpoints/checkpoint_00005.json").exists());
}

#[test]
fn random_init_is_reproducible() {
    let sb = Sandbox::new();
    sb.synth("d", &[]);
    let corpus = sb.arg("d/train.jsonl");
    for out in ["r1", "r2"] {
        let out = sb.arg(out);
        let args = [
            "train",
            "--corpus",
            &corpus,
            "--init",
            "random",
            "--seed",
            "7",
            "--max-iterations",
            "25",
            "--out-dir",
            &out,
        ];
        assert_eq!(sb.run(&args), 0);
    }
    assert_eq!(
        fs::read(sb.path("r1/model.json")).unwrap(),
        fs::read(sb.path("r2/model.json")).unwrap()
    );
}

#[test]
fn missing_corpus_is_a_data_error() {
    let sb = Sandbox::new();
    let (missing, out) = (sb.arg("nowhere.jsonl"), sb.arg("t"));
    assert_eq!(
        sb.run(&["train", "--corpus", &missing, "--out-dir", &out]),
        2
    );
    assert_eq!(
        sb.run(&["stats", "--corpus", &missing, "--out-dir", &out]),
        2
    );
}

#[test]
fn usage_and_config_errors_exit_1() {
    let sb = Sandbox::new();
    let out = sb.arg("t");
    assert_eq!(sb.run(&["frobnicate"]), 1);
    assert_eq!(sb.run(&["train", "--out-dir", &out]), 1);
    fs::write(sb.path("bad.toml"), "max_iterations = \"many\"\n").unwrap();
    let cfg = sb.arg("bad.toml");
    assert_eq!(sb.run(&["train", "--config", &cfg, "--out-dir", &out]), 1);
    sb.synth("d", &[]);
    let corpus = sb.arg("d/train.jsonl");
    assert_eq!(
        sb.run(&[
            "train",
            "--corpus",
            &corpus,
            "--threads",
            "0",
            "--out-dir",
            &out
        ]),
        1
    );
    assert_eq!(
        sb.run(&[
            "train",
            "--corpus",
            &corpus,
            "--kinds",
            "production",
            "--out-dir",
            &out
        ]),
        1,
        "structural kinds on a corpus without structures"
    );
}

#[test]
fn config_file_layers_under_flags() {
    let sb = Sandbox::new();
    sb.synth("d", &[]);
    let toml = format!(
        "corpus = {:?}\nmax_iterations = 3\ncheckpoint_every = 1\n",
        sb.arg("d/train.jsonl")
    );
    fs::write(sb.path("t.toml"), toml).unwrap();
    let (cfg, out) = (sb.arg("t.toml"), sb.arg("t"));
    assert_eq!(
        sb.run(&[
            "train",
            "--config",
            &cfg,
            "--max-iterations",
            "2",
            "--out-dir",
            &out
        ]),
        0
    );
    let trace = fs::read_to_string(sb.path("t/trace.jsonl")).unwrap();
    assert_eq!(trace.lines().count(), 3);
    assert!(sb.path("t/checkpoints/checkpoint_00001.json").exists());
}

#[test]
fn eval_reports_sweeps_and_baselines() {
    let sb = Sandbox::new();
    sb.synth("d", &[]);
    let (corpus, test, tout) = (sb.arg("d/train.jsonl"), sb.arg("d/test.jsonl"), sb.arg("t"));
    assert_eq!(
        sb.run(&[
            "train",
            "--corpus",
            &corpus,
            "--max-iterations",
            "20",
            "--out-dir",
            &tout
        ]),
        0
    );
    let (model, cps) = (sb.arg("t/model.json"), sb.arg("t/checkpoints"));
    for out in ["e1", "e2"] {
        let out = sb.arg(out);
        let args = [
            "eval",
            "--model",
            &model,
            "--corpus",
            &test,
            "--task",
            "exact",
            "--task",
            "frame",
            "--baseline",
            "100",
            "--seed",
            "3",
            "--checkpoints",
            &cps,
            "--out-dir",
            &out,
        ];
        assert_eq!(sb.run(&args), 0);
    }
    let text = fs::read_to_string(sb.path("e1/report.txt")).unwrap();
    assert_eq!(text.matches("task ").count(), 2);
    let csv = fs::read_to_string(sb.path("e1/sweep_exact_match.csv")).unwrap();
    assert_eq!(
        csv.lines().count(),
        1 + 4,
        "header plus checkpoints 5, 10, 15, 20"
    );
    for f in [
        "report_exact_match.json",
        "report_frame_match.json",
        "baseline_exact_match.json",
        "sweep_frame_match.csv",
    ] {
        assert_eq!(
            fs::read(sb.path("e1").join(f)).unwrap(),
            fs::read(sb.path("e2").join(f)).unwrap(),
            "{f}"
        );
    }
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(sb.path("e1/report_exact_match.json")).unwrap())
            .unwrap();
    for key in [
        "task",
        "counts",
        "precision",
        "effectiveness",
        "per_sentence",
    ] {
        assert!(report.get(key).is_some(), "{key}");
    }
}

#[test]
fn cluster_single_class_identity_and_empty_counts() {
    let sb = Sandbox::new();
    fs::write(
        sb.path("pairs.tsv"),
        "lesen\tBuch\t4\ntrinken\tBier\t2\nlesen\tZeitung\t1\n",
    )
    .unwrap();
    let (counts, out) = (sb.arg("pairs.tsv"), sb.arg("c"));
    assert_eq!(
        sb.run(&[
            "cluster",
            "--counts",
            &counts,
            "--classes",
            "1",
            "--out-dir",
            &out
        ]),
        0
    );
    let table =
        LexFrequencyTable::from_json(&fs::read_to_string(sb.path("c/lex_table.json")).unwrap())
            .unwrap();
    assert_eq!(table.len(), 3);
    assert!(table.iter().all(|(_, _, f, fc)| fc == f as f64 + 1.0));

    fs::write(sb.path("empty.tsv"), "").unwrap();
    let empty = sb.arg("empty.tsv");
    assert_eq!(
        sb.run(&["cluster", "--counts", &empty, "--out-dir", &out]),
        2
    );
}

#[test]
fn lexicalized_training_end_to_end() {
    let sb = Sandbox::new();
    sb.synth("d", &[]);
    let (corpus, test) = (sb.arg("d/train.jsonl"), sb.arg("d/test.jsonl"));
    let (cout, tout, eout) = (sb.arg("c"), sb.arg("t"), sb.arg("e"));
    assert_eq!(
        sb.run(&[
            "cluster",
            "--corpus",
            &corpus,
            "--classes",
            "4",
            "--seed",
            "11",
            "--out-dir",
            &cout
        ]),
        0
    );
    let table = sb.arg("c/lex_table.json");
    assert_eq!(
        sb.run(&[
            "train",
            "--corpus",
            &corpus,
            "--lexicalized",
            &table,
            "--max-iterations",
            "10",
            "--out-dir",
            &tout
        ]),
        0
    );
    let model = sb.arg("t/model.json");
    assert_eq!(
        sb.run(&[
            "eval",
            "--model",
            &model,
            "--corpus",
            &test,
            "--out-dir",
            &eout
        ]),
        1,
        "table missing"
    );
    assert_eq!(
        sb.run(&[
            "eval",
            "--model",
            &model,
            "--corpus",
            &test,
            "--lex-table",
            &table,
            "--out-dir",
            &eout
        ]),
        0
    );
}

#[test]
fn manifest_digests_verify_and_detect_tampering() {
    let sb = Sandbox::new();
    sb.synth("d", &[]);
    let (corpus, out) = (sb.arg("d/train.jsonl"), sb.arg("s"));
    assert_eq!(
        sb.run(&["stats", "--corpus", &corpus, "--out-dir", &out]),
        0
    );
    let m = RunManifest::load(&sb.path("s").join(MANIFEST_FILE)).unwrap();
    assert_eq!(m.command, "stats");
    assert_eq!(m.inputs.len(), 1);
    m.verify(&sb.path("s")).unwrap();
    fs::write(sb.path("s/stats.json"), "{}").unwrap();
    assert!(m.verify(&sb.path("s")).is_err());
}
