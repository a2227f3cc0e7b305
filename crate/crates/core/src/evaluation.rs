//! Exact-match and frame-match evaluation.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Decision, LogLinearModel};
use crate::properties::{FeaturizedCorpus, FeaturizedSentence};
use crate::trainer::Checkpoint;

pub const DEFAULT_BASELINE_MODELS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    ExactMatch,
    FrameMatch,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::ExactMatch => "exact_match",
            Task::FrameMatch => "frame_match",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Correct,
    Incorrect,
    DontKnow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceVerdict {
    pub sentence_id: String,
    pub verdict: Verdict,
    /// Parse ids tied at the top; a single id for a unique decision.
    pub chosen: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub correct: usize,
    pub incorrect: usize,
    pub dont_know: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOutcome {
    pub task: Task,
    pub counts: Counts,
    /// `None` when no sentence was decided.
    pub precision: Option<f64>,
    pub effectiveness: f64,
    pub per_sentence: Vec<SentenceVerdict>,
}

impl EvalOutcome {
    pub fn from_verdicts(task: Task, per_sentence: Vec<SentenceVerdict>) -> Self {
        let mut counts = Counts {
            correct: 0,
            incorrect: 0,
            dont_know: 0,
        };
        for v in &per_sentence {
            match v.verdict {
                Verdict::Correct => counts.correct += 1,
                Verdict::Incorrect => counts.incorrect += 1,
                Verdict::DontKnow => counts.dont_know += 1,
            }
        }
        let decided = counts.correct + counts.incorrect;
        let total = decided + counts.dont_know;
        EvalOutcome {
            task,
            counts,
            precision: (decided > 0).then(|| counts.correct as f64 / decided as f64),
            effectiveness: if total > 0 {
                counts.correct as f64 / total as f64
            } else {
                0.0
            },
            per_sentence,
        }
    }

    pub fn n_sentences(&self) -> usize {
        self.per_sentence.len()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Data(e.to_string()))
    }
}

fn judge(sentence: &FeaturizedSentence, decision: Decision, task: Task) -> Result<SentenceVerdict> {
    let gold = sentence
        .gold_index
        .ok_or_else(|| Error::Data(format!("{}: missing gold_index", sentence.sentence_id)))?;
    if gold >= sentence.len() {
        return Err(Error::Data(format!(
            "{}: gold_index {gold} out of range",
            sentence.sentence_id
        )));
    }
    let frame = |j: usize| -> Result<&str> {
        sentence.frames[j].as_deref().ok_or_else(|| {
            Error::Data(format!(
                "{}/{}: missing frame on frame-match task",
                sentence.sentence_id, sentence.parse_ids[j]
            ))
        })
    };
    let top = match &decision {
        Decision::Unique(j) => vec![*j],
        Decision::DontKnow(ts) => ts.clone(),
    };
    let verdict = match (task, &decision) {
        (Task::ExactMatch, Decision::Unique(j)) => {
            if *j == gold {
                Verdict::Correct
            } else {
                Verdict::Incorrect
            }
        }
        (Task::ExactMatch, Decision::DontKnow(_)) => Verdict::DontKnow,
        (Task::FrameMatch, _) => {
            let gold_frame = frame(gold)?;
            let first = frame(top[0])?;
            let mut shared = true;
            for &j in &top[1..] {
                shared &= frame(j)? == first;
            }
            if !shared {
                Verdict::DontKnow
            } else if first == gold_frame {
                Verdict::Correct
            } else {
                Verdict::Incorrect
            }
        }
    };
    Ok(SentenceVerdict {
        sentence_id: sentence.sentence_id.clone(),
        verdict,
        chosen: top.iter().map(|&j| sentence.parse_ids[j].clone()).collect(),
    })
}

/// Disambiguates every test sentence and scores the decisions.
pub fn evaluate(
    model: &LogLinearModel,
    test: &FeaturizedCorpus,
    task: Task,
    tie_epsilon: f64,
) -> Result<EvalOutcome> {
    if test.dim != model.lambda().len() {
        return Err(Error::Dimension {
            expected: model.lambda().len(),
            found: test.dim,
        });
    }
    let verdicts = test
        .sentences
        .iter()
        .map(|s| judge(s, model.disambiguate(s, tie_epsilon)?, task))
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalOutcome::from_verdicts(task, verdicts))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub task: Task,
    pub n_models: usize,
    /// Models with at least one decided sentence; the statistics are over
    /// these.
    pub n_defined: usize,
    pub mean_precision: f64,
    pub stdev: f64,
}

/// Precision of `n_models` models with `lambda_i ~ U[-1, 1]`.
pub fn random_baseline(
    model: &LogLinearModel,
    test: &FeaturizedCorpus,
    task: Task,
    n_models: usize,
    seed: u64,
    tie_epsilon: f64,
) -> Result<BaselineReport> {
    if n_models < 1 {
        return Err(Error::Config("baseline needs at least one model".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = model.lambda().len();
    let mut precisions = Vec::with_capacity(n_models);
    for _ in 0..n_models {
        let lambda: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let m = model.with_lambda(lambda)?;
        if let Some(p) = evaluate(&m, test, task, tie_epsilon)?.precision {
            precisions.push(p);
        }
    }
    let n = precisions.len();
    let mean = if n > 0 {
        precisions.iter().sum::<f64>() / n as f64
    } else {
        f64::NAN
    };
    let stdev = if n > 1 {
        (precisions.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(BaselineReport {
        task,
        n_models,
        n_defined: n,
        mean_precision: mean,
        stdev,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub iteration: usize,
    pub precision: Option<f64>,
    pub effectiveness: f64,
}

/// One evaluation per checkpoint, ordered by iteration.
pub fn sweep_checkpoints(
    model: &LogLinearModel,
    checkpoints: &[Checkpoint],
    test: &FeaturizedCorpus,
    task: Task,
    tie_epsilon: f64,
) -> Result<Vec<SweepRow>> {
    if checkpoints.is_empty() {
        return Err(Error::Data("no checkpoints to sweep".into()));
    }
    let mut sorted: Vec<&Checkpoint> = checkpoints.iter().collect();
    sorted.sort_by_key(|c| c.iteration);
    sorted
        .into_iter()
        .map(|c| {
            let m = model.with_lambda(c.lambda.clone())?;
            let o = evaluate(&m, test, task, tie_epsilon)?;
            Ok(SweepRow {
                iteration: c.iteration,
                precision: o.precision,
                effectiveness: o.effectiveness,
            })
        })
        .collect()
}

/// Row with the highest precision; the earliest wins ties.
pub fn sweep_peak(rows: &[SweepRow]) -> Option<&SweepRow> {
    rows.iter().filter(|r| r.precision.is_some()).fold(
        None,
        |best: Option<&SweepRow>, r| match best {
            Some(b) if b.precision >= r.precision => Some(b),
            _ => Some(r),
        },
    )
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("iteration,precision,effectiveness\n");
    for r in rows {
        let p = r.precision.map_or(String::new(), |p| p.to_string());
        let _ = writeln!(out, "{},{},{}", r.iteration, p, r.effectiveness);
    }
    out
}

fn percent(x: Option<f64>) -> String {
    x.map_or("undefined".into(), |v| format!("{:.2}%", 100.0 * v))
}

/// Plain-text report block.
pub fn render_table(outcome: &EvalOutcome) -> String {
    let c = outcome.counts;
    let mut s = String::new();
    let _ = writeln!(s, "task           {}", outcome.task.as_str());
    let _ = writeln!(s, "sentences      {}", outcome.n_sentences());
    let _ = writeln!(s, "correct        {}", c.correct);
    let _ = writeln!(s, "incorrect      {}", c.incorrect);
    let _ = writeln!(s, "don't know     {}", c.dont_know);
    let _ = writeln!(s, "precision      {}", percent(outcome.precision));
    let _ = writeln!(s, "effectiveness  {}", percent(Some(outcome.effectiveness)));
    s
}
