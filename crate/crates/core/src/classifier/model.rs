use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::{ClassId, Dimension, GenderLabel};
use crate::seeds;
use crate::textkit::tokenize;

/// Training hyperparameters. Stored verbatim in the model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Number of hash buckets for unigram and bigram features.
    pub feature_dim: usize,
    pub embed_dim: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    /// Dimensions the model is trained on; one entry for single-task models.
    pub tasks: Vec<Dimension>,
    pub seed: u64,
    /// Half-width of the uniform initialization interval.
    pub init_scale: f64,
    /// Stop after this many epochs without validation improvement.
    pub patience: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            feature_dim: 1 << 18,
            embed_dim: 32,
            learning_rate: 0.5,
            epochs: 20,
            tasks: Dimension::ALL.to_vec(),
            seed: 0,
            init_scale: 0.1,
            patience: None,
        }
    }
}

impl TrainConfig {
    pub fn single_task(dim: Dimension) -> Self {
        TrainConfig {
            tasks: vec![dim],
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.feature_dim == 0 || self.feature_dim > u32::MAX as usize {
            return Err(Error::Config("feature_dim must be in 1..=2^32-1".into()));
        }
        if self.embed_dim == 0 || self.embed_dim > u32::MAX as usize {
            return Err(Error::Config("embed_dim must be positive".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config(
                "learning_rate must be positive and finite".into(),
            ));
        }
        if !(self.init_scale.is_finite() && self.init_scale >= 0.0) {
            return Err(Error::Config(
                "init_scale must be non-negative and finite".into(),
            ));
        }
        if self.tasks.is_empty() {
            return Err(Error::Config(
                "at least one task dimension is required".into(),
            ));
        }
        let mut seen = self.tasks.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.tasks.len() {
            return Err(Error::Config("duplicate task dimension".into()));
        }
        Ok(())
    }
}

/// Hashed feature counts of one text, sorted by bucket.
#[derive(Debug, Clone, PartialEq)]
pub struct Features {
    pub buckets: Vec<(usize, u32)>,
    /// Total number of features (unigrams + bigrams), the mean-pooling divisor.
    pub total: u32,
}

/// Bag-of-hashed-n-grams text encoder plus one embedding per class. A class
/// scores `encode(text) · class_embedding`.
#[derive(Debug, Clone, PartialEq)]
pub struct BiEncoderModel {
    pub config: TrainConfig,
    pub hash_seed: u64,
    /// `feature_dim × embed_dim`, row-major.
    pub(crate) feature_embeddings: Vec<f32>,
    /// `9 × embed_dim`, rows in [`ClassId::all`] order. Rows of classes
    /// outside the model's tasks stay zero.
    pub(crate) class_embeddings: Vec<f32>,
}

pub(crate) fn dot(a: &[f64], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * *y as f64).sum()
}

/// Numerically stable softmax.
pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let z: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / z).collect()
}

/// Index of the first maximum; earlier candidates win ties.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

impl BiEncoderModel {
    /// Randomly initialized model for `config`.
    pub fn new(config: TrainConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = seeds::rng(config.seed, seeds::INIT);
        let hash_seed = seeds::derive_seed(config.seed, "hash");
        let a = config.init_scale as f32;
        let mut draw = |n: usize| -> Vec<f32> {
            (0..n)
                .map(|_| {
                    if a > 0.0 {
                        rng.random_range(-a..=a)
                    } else {
                        0.0
                    }
                })
                .collect()
        };
        let feature_embeddings = draw(config.feature_dim * config.embed_dim);
        let mut class_embeddings = draw(9 * config.embed_dim);
        for c in ClassId::all() {
            if !config.tasks.contains(&c.dimension)
                || !c.dimension.candidate_labels().contains(&c.label)
            {
                let k = c.index() * config.embed_dim;
                class_embeddings[k..k + config.embed_dim].fill(0.0);
            }
        }
        Ok(BiEncoderModel {
            config,
            hash_seed,
            feature_embeddings,
            class_embeddings,
        })
    }

    pub fn feature_dim(&self) -> usize {
        self.config.feature_dim
    }

    pub fn embed_dim(&self) -> usize {
        self.config.embed_dim
    }

    pub fn tasks(&self) -> &[Dimension] {
        &self.config.tasks
    }

    pub fn supports(&self, dim: Dimension) -> bool {
        self.config.tasks.contains(&dim)
    }

    pub fn is_single_task(&self) -> bool {
        self.config.tasks.len() == 1
    }

    /// Classes this model can rank.
    pub fn classes(&self) -> Vec<ClassId> {
        self.config
            .tasks
            .iter()
            .flat_map(|d| d.candidates())
            .collect()
    }

    pub fn feature_row(&self, bucket: usize) -> &[f32] {
        let d = self.embed_dim();
        &self.feature_embeddings[bucket * d..(bucket + 1) * d]
    }

    pub fn feature_row_mut(&mut self, bucket: usize) -> &mut [f32] {
        let d = self.embed_dim();
        &mut self.feature_embeddings[bucket * d..(bucket + 1) * d]
    }

    pub fn class_embedding(&self, class: ClassId) -> &[f32] {
        let d = self.embed_dim();
        let k = class.index() * d;
        &self.class_embeddings[k..k + d]
    }

    pub fn class_embedding_mut(&mut self, class: ClassId) -> &mut [f32] {
        let d = self.embed_dim();
        let k = class.index() * d;
        &mut self.class_embeddings[k..k + d]
    }

    pub fn all_finite(&self) -> bool {
        self.feature_embeddings
            .iter()
            .chain(&self.class_embeddings)
            .all(|x| x.is_finite())
    }

    fn bucket(&self, key: &str) -> usize {
        (seeds::stable_hash(self.hash_seed, key.as_bytes()) % self.config.feature_dim as u64)
            as usize
    }

    /// Hashed unigrams and bigrams of the tokenized text.
    pub fn features(&self, text: &str) -> Features {
        let tokens = tokenize(text);
        let mut counts: BTreeMap<usize, u32> = BTreeMap::new();
        let mut total = 0;
        for t in &tokens {
            *counts
                .entry(self.bucket(&format!("u\u{1f}{}", t.surface)))
                .or_default() += 1;
            total += 1;
        }
        for w in tokens.windows(2) {
            let key = format!("b\u{1f}{}\u{1f}{}", w[0].surface, w[1].surface);
            *counts.entry(self.bucket(&key)).or_default() += 1;
            total += 1;
        }
        Features {
            buckets: counts.into_iter().collect(),
            total,
        }
    }

    pub(crate) fn encode_features(&self, f: &Features) -> Vec<f64> {
        let mut v = vec![0.0; self.embed_dim()];
        if f.total == 0 {
            return v;
        }
        for &(b, c) in &f.buckets {
            let w = c as f64 / f.total as f64;
            for (acc, x) in v.iter_mut().zip(self.feature_row(b)) {
                *acc += w * *x as f64;
            }
        }
        v
    }

    /// Mean of the embedding rows of the text's hashed unigrams and bigrams;
    /// the zero vector for empty text.
    pub fn encode_text(&self, text: &str) -> Vec<f64> {
        self.encode_features(&self.features(text))
    }

    fn check_candidate(&self, c: ClassId) -> Result<()> {
        if !self.supports(c.dimension) {
            return Err(Error::UnsupportedDimension(c.dimension));
        }
        if !c.dimension.candidate_labels().contains(&c.label) {
            return Err(Error::UnsupportedClass(c));
        }
        Ok(())
    }

    /// Dot-product score of each candidate class, in candidate order.
    pub fn score_classes(&self, text: &str, candidates: &[ClassId]) -> Result<Vec<(ClassId, f64)>> {
        if candidates.is_empty() {
            return Err(Error::NoCandidates);
        }
        for &c in candidates {
            self.check_candidate(c)?;
        }
        let v = self.encode_text(text);
        Ok(candidates
            .iter()
            .map(|&c| (c, dot(&v, self.class_embedding(c))))
            .collect())
    }

    /// Softmax distribution over the dimension's candidate labels.
    pub fn probabilities(&self, text: &str, dim: Dimension) -> Result<Vec<(GenderLabel, f64)>> {
        let scored = self.score_classes(text, &dim.candidates())?;
        let scores: Vec<f64> = scored.iter().map(|(_, s)| *s).collect();
        Ok(scored
            .iter()
            .zip(softmax(&scores))
            .map(|((c, _), p)| (c.label, p))
            .collect())
    }

    /// Argmax label and its probability. Ties go to masculine, then feminine,
    /// then neutral.
    pub fn predict(&self, text: &str, dim: Dimension) -> Result<(GenderLabel, f64)> {
        let probs = self.probabilities(text, dim)?;
        let p: Vec<f64> = probs.iter().map(|(_, p)| *p).collect();
        Ok(probs[argmax(&p)])
    }

    /// Top class when ranking every class the model knows.
    pub fn predict_any(&self, text: &str) -> Result<ClassId> {
        let scored = self.score_classes(text, &self.classes())?;
        let scores: Vec<f64> = scored.iter().map(|(_, s)| *s).collect();
        Ok(scored[argmax(&scores)].0)
    }

    /// P(ABOUT:masculine) for the text.
    pub fn about_masculine_probability(&self, text: &str) -> Result<f64> {
        Ok(self.probabilities(text, Dimension::About)?[0].1)
    }
}

/// Gradient of a summed cross-entropy loss with respect to touched parameters.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Gradients {
    pub features: BTreeMap<usize, Vec<f64>>,
    pub classes: BTreeMap<ClassId, Vec<f64>>,
}

impl Gradients {
    fn add_feature(&mut self, bucket: usize, scale: f64, g: &[f64]) {
        let row = self
            .features
            .entry(bucket)
            .or_insert_with(|| vec![0.0; g.len()]);
        for (r, x) in row.iter_mut().zip(g) {
            *r += scale * x;
        }
    }

    fn add_class(&mut self, class: ClassId, scale: f64, g: &[f64]) {
        let row = self
            .classes
            .entry(class)
            .or_insert_with(|| vec![0.0; g.len()]);
        for (r, x) in row.iter_mut().zip(g) {
            *r += scale * x;
        }
    }
}

/// One supervised (text, dimension, label) pair.
#[derive(Debug, Clone)]
pub struct TrainingPair<'a> {
    pub features: &'a Features,
    pub dimension: Dimension,
    pub target: GenderLabel,
}

impl BiEncoderModel {
    /// Cross-entropy of the in-dimension softmax and its gradient for a
    /// single pair.
    pub(crate) fn pair_loss_and_gradients(
        &self,
        pair: &TrainingPair<'_>,
    ) -> Result<(f64, Gradients)> {
        let candidates = pair.dimension.candidates();
        let target = candidates
            .iter()
            .position(|c| c.label == pair.target)
            .ok_or(Error::UnsupportedClass(ClassId {
                dimension: pair.dimension,
                label: pair.target,
            }))?;
        for &c in &candidates {
            self.check_candidate(c)?;
        }
        let v = self.encode_features(pair.features);
        let scores: Vec<f64> = candidates
            .iter()
            .map(|&c| dot(&v, self.class_embedding(c)))
            .collect();
        let p = softmax(&scores);
        let loss = -p[target].ln();

        let mut grads = Gradients::default();
        let mut dv = vec![0.0; self.embed_dim()];
        for (i, &c) in candidates.iter().enumerate() {
            let g = p[i] - if i == target { 1.0 } else { 0.0 };
            grads.add_class(c, g, &v);
            for (d, x) in dv.iter_mut().zip(self.class_embedding(c)) {
                *d += g * *x as f64;
            }
        }
        if pair.features.total > 0 {
            for &(b, c) in &pair.features.buckets {
                grads.add_feature(b, c as f64 / pair.features.total as f64, &dv);
            }
        }
        Ok((loss, grads))
    }

    /// Summed loss and gradient over `(text, dimension, label)` triples.
    pub fn loss_and_gradients(
        &self,
        batch: &[(&str, Dimension, GenderLabel)],
    ) -> Result<(f64, Gradients)> {
        let mut total = 0.0;
        let mut grads = Gradients::default();
        for &(text, dimension, target) in batch {
            let features = self.features(text);
            let (l, g) = self.pair_loss_and_gradients(&TrainingPair {
                features: &features,
                dimension,
                target,
            })?;
            total += l;
            for (b, row) in g.features {
                grads.add_feature(b, 1.0, &row);
            }
            for (c, row) in g.classes {
                grads.add_class(c, 1.0, &row);
            }
        }
        Ok((total, grads))
    }

    pub(crate) fn apply(&mut self, grads: &Gradients, lr: f64) {
        for (&b, g) in &grads.features {
            for (p, x) in self.feature_row_mut(b).iter_mut().zip(g) {
                *p = (*p as f64 - lr * x) as f32;
            }
        }
        for (&c, g) in &grads.classes {
            for (p, x) in self.class_embedding_mut(c).iter_mut().zip(g) {
                *p = (*p as f64 - lr * x) as f32;
            }
        }
    }
}
