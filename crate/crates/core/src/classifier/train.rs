use std::collections::{BTreeMap, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::eval::{evaluate, EvalReport};
use super::model::{BiEncoderModel, Features, TrainConfig, TrainingPair};
use crate::dataset::{balance_indices, resolve_epoch, Example};
use crate::error::{Error, Result};
use crate::labels::{Dimension, GenderLabel};
use crate::seeds;
use crate::textkit::{mask_text, Lexicon, MaskMode};

/// One line of the training log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    /// Mean cross-entropy over the epoch's (example, dimension) pairs.
    pub loss: f64,
    pub valid_avg: f64,
    /// `<dim>_<label>` → accuracy on the validation data.
    #[serde(flatten)]
    pub accuracies: BTreeMap<String, f64>,
    pub pairs: usize,
    /// Fraction of distinct training features sharing a bucket with another.
    pub collision_rate: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters from the epoch with the best validation average.
    pub model: BiEncoderModel,
    pub log: Vec<EpochLog>,
    pub best_epoch: usize,
    /// Pairs dropped because the label has no class on that dimension
    /// (neutral on TO or AS).
    pub skipped_unsupported: usize,
    /// True when validation fell back to the training data.
    pub validated_on_train: bool,
}

fn epoch_rng(seed: u64, epoch: usize) -> ChaCha8Rng {
    let s = seeds::stable_hash(
        seeds::derive_seed(seed, seeds::SHUFFLE),
        &(epoch as u64).to_le_bytes(),
    );
    ChaCha8Rng::seed_from_u64(s)
}

/// Fraction of distinct feature keys that collide in the hash table.
fn collision_rate(model: &BiEncoderModel, examples: &[Example]) -> f64 {
    use crate::textkit::tokenize;
    let mut keys: HashSet<String> = HashSet::new();
    for e in examples {
        let toks = tokenize(&e.text);
        for t in &toks {
            keys.insert(format!("u\u{1f}{}", t.surface));
        }
        for w in toks.windows(2) {
            keys.insert(format!("b\u{1f}{}\u{1f}{}", w[0].surface, w[1].surface));
        }
    }
    if keys.is_empty() {
        return 0.0;
    }
    let mut per_bucket: HashMap<u64, usize> = HashMap::new();
    for k in &keys {
        let b = seeds::stable_hash(model.hash_seed, k.as_bytes()) % model.feature_dim() as u64;
        *per_bucket.entry(b).or_default() += 1;
    }
    let colliding: usize = per_bucket.values().filter(|&&n| n > 1).sum();
    colliding as f64 / keys.len() as f64
}

fn flatten(report: &EvalReport) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for (dim, r) in &report.dimensions {
        for label in GenderLabel::CLASSES {
            if let Some(a) = r.accuracy(label) {
                out.insert(format!("{}_{}", dim.key(), label), a);
            }
        }
    }
    out
}

/// Trains a bi-encoder by plain SGD on the in-dimension softmax cross-entropy.
///
/// Each epoch resolves unknown TO/AS labels as [`crate::dataset::epoch_view`]
/// does, balances each task dimension as [`crate::dataset::oversample_balance`]
/// does, and shuffles all
/// (example, dimension) pairs together. The returned model holds the
/// parameters of the epoch with the best validation average per-class
/// accuracy (earliest epoch on ties). Without usable validation data the
/// training data stands in.
pub fn train(
    train_data: &[Example],
    valid_data: &[Example],
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    if train_data.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut model = BiEncoderModel::new(config.clone())?;
    let features: Vec<Features> = train_data.iter().map(|e| model.features(&e.text)).collect();
    let collisions = collision_rate(&model, train_data);

    // Validation must have at least one known label on a task dimension.
    let has_labels = |data: &[Example]| {
        data.iter()
            .any(|e| config.tasks.iter().any(|&d| e.labels[d].is_known()))
    };
    let validated_on_train = !has_labels(valid_data);
    let valid: &[Example] = if validated_on_train {
        train_data
    } else {
        valid_data
    };

    let mut log = Vec::new();
    let mut best: Option<(f64, usize, BiEncoderModel)> = None;
    let mut skipped_unsupported = 0;
    let mut since_best = 0;

    for epoch in 0..config.epochs {
        let view: Vec<Example> = train_data
            .iter()
            .map(|e| resolve_epoch(e, epoch, config.seed))
            .collect();
        let mut pairs: Vec<(usize, Dimension, GenderLabel)> = Vec::new();
        for &dim in &config.tasks {
            let labels: Vec<GenderLabel> = view.iter().map(|e| e.labels[dim]).collect();
            for idx in balance_indices(&labels) {
                let label = labels[idx];
                if !label.is_known() {
                    continue;
                }
                if !dim.candidate_labels().contains(&label) {
                    if epoch == 0 {
                        skipped_unsupported += 1;
                    }
                    continue;
                }
                pairs.push((idx, dim, label));
            }
        }
        pairs.shuffle(&mut epoch_rng(config.seed, epoch));

        let mut total_loss = 0.0;
        for &(idx, dimension, target) in &pairs {
            let (loss, grads) = model.pair_loss_and_gradients(&TrainingPair {
                features: &features[idx],
                dimension,
                target,
            })?;
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch });
            }
            total_loss += loss;
            model.apply(&grads, config.learning_rate);
        }
        if !model.all_finite() {
            return Err(Error::Diverged { epoch });
        }
        let loss = if pairs.is_empty() {
            0.0
        } else {
            total_loss / pairs.len() as f64
        };

        let report = match evaluate(&model, valid) {
            Ok(r) => Some(r),
            Err(Error::EmptyEvaluation) => None,
            Err(e) => return Err(e),
        };
        let valid_avg = report.as_ref().map(|r| r.all_avg).unwrap_or(0.0);
        log::info!(
            "epoch {epoch}: loss {loss:.6} valid_avg {valid_avg:.4} pairs {}",
            pairs.len()
        );
        log.push(EpochLog {
            epoch,
            loss,
            valid_avg,
            accuracies: report.as_ref().map(flatten).unwrap_or_default(),
            pairs: pairs.len(),
            collision_rate: collisions,
        });

        let improved = best.as_ref().is_none_or(|(score, _, _)| valid_avg > *score);
        if improved {
            best = Some((valid_avg, epoch, model.clone()));
            since_best = 0;
        } else {
            since_best += 1;
            if config.patience.is_some_and(|p| since_best >= p) {
                break;
            }
        }
    }

    let (best_epoch, model) = match best {
        Some((_, epoch, m)) => (epoch, m),
        None => (0, model),
    };
    Ok(TrainOutcome {
        model,
        log,
        best_epoch,
        skipped_unsupported,
        validated_on_train,
    })
}

fn masked(data: &[Example], lexicon: &Lexicon, mode: MaskMode) -> Vec<Example> {
    data.iter()
        .map(|e| {
            let mut e = e.clone();
            e.text = mask_text(&e.text, lexicon, mode);
            e
        })
        .collect()
}

/// Masks gendered words (and optionally names) in every text, then trains and
/// evaluates on the masked data.
pub fn ablation_masked_train(
    train_data: &[Example],
    valid_data: &[Example],
    eval_data: &[Example],
    config: &TrainConfig,
    mode: MaskMode,
    lexicon: &Lexicon,
) -> Result<(TrainOutcome, EvalReport)> {
    let outcome = train(
        &masked(train_data, lexicon, mode),
        &masked(valid_data, lexicon, mode),
        config,
    )?;
    let report = evaluate(&outcome.model, &masked(eval_data, lexicon, mode))?;
    Ok((outcome, report))
}
