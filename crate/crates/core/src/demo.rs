//! Anonymised-messages demonstration: author prediction from message
//! properties, and learning author writing tendencies from observations of
//! received message sets.
//!
//! Three authors exchange messages quantified by three boolean properties.
//! The ground truth model fixes each author's tendencies and relates every
//! author to the other two, fifty-fifty. Prediction scores how often the
//! most probable author of a sampled message set is the real one; learning
//! starts every tendency at 50% and recovers the truth purely from
//! observations shaped like "someone I conversed with wrote all of these".

use std::ops::RangeInclusive;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ast::Formula;
use crate::eval::{EvalContext, ModelContext};
use crate::learn::{observe, LearnError};
use crate::model::{BeliefModel, ConceptStrategy, ModelError, RoleEntry};

pub const AUTHORS: [&str; 3] = ["Alice", "Bob", "Jeff"];
pub const CONCEPTS: [&str; 3] = ["uses_emoji", "capitalises_first_word", "is_positive"];
pub const ROLE: &str = "conversed_with";

/// True writing tendencies as (author, capitalises, is_positive, uses_emoji).
const TRUTH: [(&str, f64, f64, f64); 3] = [
    ("Bob", 0.40, 0.15, 0.90),
    ("Alice", 0.80, 0.40, 0.10),
    ("Jeff", 0.50, 0.50, 0.50),
];

/// The observable properties of one message.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Message {
    pub uses_emoji: bool,
    pub capitalises_first_word: bool,
    pub is_positive: bool,
}

/// The three authors with their true tendencies; each author converses with
/// the other two at 50% each (never with themselves, no null entry).
pub fn ground_truth_model() -> BeliefModel {
    let mut builder = BeliefModel::builder();
    for (author, capitalises, positive, emoji) in TRUTH {
        let mut individual = builder.individual(author);
        individual
            .concept("capitalises_first_word", capitalises)
            .concept("is_positive", positive)
            .concept("uses_emoji", emoji)
            .role(ROLE, peer_entries(author));
    }
    builder.build().expect("ground truth model is valid")
}

/// A fresh model for tendency learning: every tendency starts at 50% with a
/// statistical strategy attached, roles are the ground truth and unlearnt.
pub fn learning_model(decay_rate: f64, decay_rate_for_decay_rate: f64) -> BeliefModel {
    let mut builder = BeliefModel::builder();
    for (author, ..) in TRUTH {
        let mut individual = builder.individual(author);
        individual.role(ROLE, peer_entries(author));
        for concept in CONCEPTS {
            individual.concept(concept, 0.5).learn_concept(
                concept,
                ConceptStrategy::Statistical {
                    decay_rate,
                    decay_rate_for_decay_rate,
                },
            );
        }
    }
    builder.build().expect("learning model is valid")
}

fn peer_entries(author: &str) -> Vec<RoleEntry> {
    AUTHORS
        .iter()
        .filter(|other| **other != author)
        .map(|other| RoleEntry::to(*other, 0.5))
        .collect()
}

/// Samples `count` messages with each property drawn independently from the
/// author's tendencies in `model`.
pub fn sample_message_set<R: Rng + ?Sized>(
    model: &BeliefModel,
    author: &str,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Message>, ModelError> {
    let emoji = model.concept_value(author, "uses_emoji")?;
    let capitalises = model.concept_value(author, "capitalises_first_word")?;
    let positive = model.concept_value(author, "is_positive")?;
    Ok((0..count)
        .map(|_| Message {
            uses_emoji: rng.random::<f64>() < emoji,
            capitalises_first_word: rng.random::<f64>() < capitalises,
            is_positive: rng.random::<f64>() < positive,
        })
        .collect())
}

fn literal(symbol: &str, present: bool) -> Formula {
    let atom = Formula::atom(symbol);
    if present {
        atom
    } else {
        atom.negate()
    }
}

fn message_conjunction(message: &Message) -> Formula {
    literal("uses_emoji", message.uses_emoji)
        .and(literal(
            "capitalises_first_word",
            message.capitalises_first_word,
        ))
        .and(literal("is_positive", message.is_positive))
}

fn message_set_body(messages: &[Message]) -> Formula {
    assert!(
        !messages.is_empty(),
        "a message set holds at least one message"
    );
    messages
        .iter()
        .map(message_conjunction)
        .reduce(|acc, next| acc.and(next))
        .expect("non-empty message set")
}

/// The observation for a received message set: the conjunction of every
/// message's literals, marginalised over who it was conversed with.
pub fn message_set_to_formula(messages: &[Message]) -> Formula {
    Formula::expect(ROLE, message_set_body(messages))
}

/// An author prediction: the winner and the posterior it was drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub author: String,
    pub posterior: Vec<(String, f64)>,
}

fn argmax_prediction(posterior: Vec<(String, f64)>) -> Prediction {
    // Strict comparison over name-sorted candidates: ties go to the
    // lexicographically smallest author, deterministically.
    let mut sorted = posterior.clone();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    let mut best = sorted[0].clone();
    for candidate in &sorted[1..] {
        if candidate.1 > best.1 {
            best = candidate.clone();
        }
    }
    Prediction {
        author: best.0,
        posterior,
    }
}

/// Predicts which individual in `model` wrote `messages`, scoring every
/// individual by its probability of producing the set (a uniform-prior
/// selection posterior over all authors).
pub fn predict_author(model: &BeliefModel, messages: &[Message]) -> Result<Prediction, LearnError> {
    let body = message_set_body(messages);
    let mut posterior = Vec::new();
    let mut total = 0.0;
    for name in model.names() {
        let ctx = ModelContext::new(model, name)?;
        let score = ctx.eval(&body)?;
        posterior.push((name.to_string(), score));
        total += score;
    }
    if total > 0.0 {
        for (_, p) in &mut posterior {
            *p /= total;
        }
    } else {
        let uniform = 1.0 / posterior.len() as f64;
        for (_, p) in &mut posterior {
            *p = uniform;
        }
    }
    Ok(argmax_prediction(posterior))
}

/// Predicts the sender from a recipient's point of view: the selection
/// posterior over the recipient's role, so only individuals the recipient
/// converses with are candidates.
pub fn predict_author_for_recipient(
    model: &BeliefModel,
    recipient: &str,
    role: &str,
    messages: &[Message],
) -> Result<Prediction, LearnError> {
    let ctx = ModelContext::new(model, recipient)?;
    let dist = model.role_distribution(recipient, role)?;
    let body = message_set_body(messages);
    let posterior =
        crate::learn::role_selection_posterior(&ctx, dist, &body, &Formula::Always, 1.0)?;
    Ok(argmax_prediction(posterior))
}

/// Accuracy of one `(author, message count)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionCell {
    pub author: String,
    pub k: usize,
    pub n: usize,
    pub accuracy_pct: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionReport {
    pub seed: u64,
    pub sets_per_cell: usize,
    pub cells: Vec<PredictionCell>,
}

impl PredictionReport {
    pub fn accuracy(&self, author: &str, k: usize) -> Option<f64> {
        self.cells
            .iter()
            .find(|c| c.author == author && c.k == k)
            .map(|c| c.accuracy_pct)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("author,k,n,accuracy_pct\n");
        for cell in &self.cells {
            out.push_str(&format!(
                "{},{},{},{:.4}\n",
                cell.author, cell.k, cell.n, cell.accuracy_pct
            ));
        }
        out
    }
}

/// For every author and every message count in `k_range`, samples
/// `sets_per_cell` message sets from that author and scores how often the
/// predicted author is the true one. Deterministic per seed.
pub fn run_prediction_experiment(
    model: &BeliefModel,
    sets_per_cell: usize,
    k_range: RangeInclusive<usize>,
    seed: u64,
) -> Result<PredictionReport, LearnError> {
    let authors: Vec<String> = model.names().map(str::to_string).collect();
    let mut cells = Vec::new();
    let mut cell_index = 0u64;
    for author in &authors {
        for k in k_range.clone() {
            let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, cell_index));
            cell_index += 1;
            let mut correct = 0usize;
            for _ in 0..sets_per_cell {
                let messages = sample_message_set(model, author, k, &mut rng)?;
                let prediction = predict_author(model, &messages)?;
                if prediction.author == *author {
                    correct += 1;
                }
            }
            cells.push(PredictionCell {
                author: author.clone(),
                k,
                n: sets_per_cell,
                accuracy_pct: 100.0 * correct as f64 / sets_per_cell as f64,
            });
        }
    }
    Ok(PredictionReport {
        seed,
        sets_per_cell,
        cells,
    })
}

/// Configuration for the tendency-learning experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct LearningConfig {
    pub trials: usize,
    pub observations_per_trial: usize,
    pub messages_per_observation: RangeInclusive<usize>,
    pub decay_rate: f64,
    pub decay_rate_for_decay_rate: f64,
}

impl Default for LearningConfig {
    fn default() -> Self {
        LearningConfig {
            trials: 100,
            observations_per_trial: 500,
            messages_per_observation: 2..=4,
            decay_rate: 0.95,
            decay_rate_for_decay_rate: 0.95,
        }
    }
}

/// Learnt tendency of one author across trials, in percent.
#[derive(Debug, Clone, PartialEq)]
pub struct LearntTendency {
    pub author: String,
    pub concept: String,
    pub mean_pct: f64,
    pub std_pct: f64,
    pub truth_pct: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearningReport {
    pub seed: u64,
    pub trials: usize,
    pub observations_per_trial: usize,
    pub rows: Vec<LearntTendency>,
}

impl LearningReport {
    pub fn row(&self, author: &str, concept: &str) -> Option<&LearntTendency> {
        self.rows
            .iter()
            .find(|r| r.author == author && r.concept == concept)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("author,concept,mean_pct,std_pct,truth_pct\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{:.4},{:.4},{:.1}\n",
                row.author, row.concept, row.mean_pct, row.std_pct, row.truth_pct
            ));
        }
        out
    }
}

/// Runs repeated learning trials. Each trial starts a fresh model with all
/// tendencies at 50%, then for every observation samples a recipient
/// uniformly, a sender from the recipient's true role, a message count, and
/// the messages themselves from the sender's true tendencies; the recipient
/// then observes the marginalised conjunction. Rows report the mean and
/// standard deviation of the final learnt tendencies across trials.
pub fn run_learning_experiment(
    config: &LearningConfig,
    seed: u64,
) -> Result<LearningReport, LearnError> {
    let truth = ground_truth_model();
    let authors: Vec<String> = truth.names().map(str::to_string).collect();
    let mut finals: Vec<Vec<f64>> = Vec::with_capacity(config.trials);

    for trial in 0..config.trials {
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, trial as u64));
        let mut model = learning_model(config.decay_rate, config.decay_rate_for_decay_rate);
        for _ in 0..config.observations_per_trial {
            let recipient = &authors[rng.random_range(0..authors.len())];
            let sender = truth
                .role_distribution(recipient, ROLE)?
                .sample_non_null(&mut rng)
                .expect("ground truth roles are never vacuous")
                .to_string();
            let count = rng.random_range(config.messages_per_observation.clone());
            let messages = sample_message_set(&truth, &sender, count, &mut rng)?;
            observe(&mut model, recipient, &message_set_to_formula(&messages))?;
        }
        let mut values = Vec::new();
        for author in &authors {
            for concept in CONCEPTS {
                values.push(100.0 * model.concept_value(author, concept)?);
            }
        }
        finals.push(values);
    }

    let mut rows = Vec::new();
    let mut column = 0;
    for author in &authors {
        for concept in CONCEPTS {
            let samples: Vec<f64> = finals.iter().map(|trial| trial[column]).collect();
            column += 1;
            let (mean, std) = mean_and_std(&samples);
            rows.push(LearntTendency {
                author: author.clone(),
                concept: concept.to_string(),
                mean_pct: mean,
                std_pct: std,
                truth_pct: 100.0 * truth.concept_value(author, concept)?,
            });
        }
    }
    Ok(LearningReport {
        seed,
        trials: config.trials,
        observations_per_trial: config.observations_per_trial,
        rows,
    })
}

fn mean_and_std(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let variance = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, variance.sqrt())
}

/// Splitmix-style derivation of per-cell and per-trial RNG seeds, so cells
/// are independent and reorderable without touching each other's streams.
fn stream_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
