//! A control-token-conditioned n-gram language model and a top-k sampler with
//! repeated n-gram blocking.

use std::collections::{BTreeSet, HashMap};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::control::{parse_line, ControlToken};
use crate::error::{Error, Result};
use crate::seeds;
use crate::textkit::tokenize;

pub const END_TOKEN: &str = "</s>";
const END: u32 = 0;
const PAD: u32 = u32::MAX;

/// `P(w | control, previous order-2 words)` with additive smoothing over the
/// observed vocabulary. The control token is always the first context token.
#[derive(Debug, Clone)]
pub struct ControlLM {
    order: usize,
    alpha: f64,
    /// Index 0 is the end-of-utterance token; the rest are sorted.
    vocab: Vec<String>,
    counts: HashMap<(ControlToken, Vec<u32>), HashMap<u32, u32>>,
}

impl ControlLM {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    fn context(&self, history: &[u32]) -> Vec<u32> {
        let n = self.order - 2;
        let mut ctx = vec![PAD; n.saturating_sub(history.len())];
        ctx.extend_from_slice(&history[history.len().saturating_sub(n)..]);
        ctx
    }

    /// Next-token distribution over the vocabulary (index 0 = end token).
    /// An unseen context, including an unseen control token, is uniform.
    pub fn next_distribution(&self, control: ControlToken, history: &[u32]) -> Vec<f64> {
        let v = self.vocab.len() as f64;
        let seen = self.counts.get(&(control, self.context(history)));
        let total: u32 = seen.map(|m| m.values().sum()).unwrap_or(0);
        let denom = total as f64 + self.alpha * v;
        (0..self.vocab.len() as u32)
            .map(|w| {
                let c = seen.and_then(|m| m.get(&w)).copied().unwrap_or(0);
                (c as f64 + self.alpha) / denom
            })
            .collect()
    }

    pub fn token_id(&self, word: &str) -> Option<u32> {
        self.vocab
            .binary_search_by(|w| w.as_str().cmp(word))
            .ok()
            .map(|i| i as u32)
            .or_else(|| {
                // the end token is not in sorted position
                (word == END_TOKEN).then_some(END)
            })
    }
}

/// Estimates the model from control-corpus lines (`DIM:label utterance`).
pub fn train_controlled_lm<S: AsRef<str>>(control_corpus: &[S], order: usize) -> Result<ControlLM> {
    train_controlled_lm_smoothed(control_corpus, order, 1.0)
}

pub fn train_controlled_lm_smoothed<S: AsRef<str>>(
    control_corpus: &[S],
    order: usize,
    alpha: f64,
) -> Result<ControlLM> {
    if control_corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if order < 2 {
        return Err(Error::Config(format!(
            "n-gram order must be at least 2 (got {order})"
        )));
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::Config("smoothing constant must be positive".into()));
    }
    let mut lines = Vec::with_capacity(control_corpus.len());
    for (i, line) in control_corpus.iter().enumerate() {
        let (token, rest) = parse_line(line.as_ref()).ok_or_else(|| Error::MalformedRecord {
            source_name: "control corpus".into(),
            line: i + 1,
            message: "line does not start with a DIM:label control token".into(),
        })?;
        let words: Vec<String> = tokenize(rest).into_iter().map(|t| t.surface).collect();
        lines.push((token, words));
    }
    let words: BTreeSet<&str> = lines
        .iter()
        .flat_map(|(_, w)| w.iter().map(String::as_str))
        .collect();
    let mut vocab = vec![END_TOKEN.to_string()];
    vocab.extend(
        words
            .into_iter()
            .filter(|w| *w != END_TOKEN)
            .map(str::to_string),
    );
    let mut lm = ControlLM {
        order,
        alpha,
        vocab,
        counts: HashMap::new(),
    };
    for (token, words) in &lines {
        let mut history: Vec<u32> = Vec::with_capacity(words.len());
        let ids: Vec<u32> = words
            .iter()
            .map(|w| lm.token_id(w).expect("word in vocabulary"))
            .chain(std::iter::once(END))
            .collect();
        for id in ids {
            let ctx = lm.context(&history);
            *lm.counts
                .entry((*token, ctx))
                .or_default()
                .entry(id)
                .or_default() += 1;
            history.push(id);
        }
    }
    Ok(lm)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerateConfig {
    /// Sample among the k most probable next tokens.
    pub k: usize,
    /// No n-gram of this length may occur twice in the output.
    pub block_n: usize,
    /// The end token is masked until this many tokens exist.
    pub min_tokens: usize,
    pub max_tokens: usize,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        GenerateConfig {
            k: 10,
            block_n: 3,
            min_tokens: 20,
            max_tokens: 60,
        }
    }
}

/// Whether appending `next` would repeat an n-gram already in `out`.
pub fn completes_repeat(out: &[u32], next: u32, n: usize) -> bool {
    if out.len() < n - 1 {
        return false;
    }
    let prefix = &out[out.len() - (n - 1)..];
    out.windows(n)
        .any(|w| w[..n - 1] == *prefix && w[n - 1] == next)
}

/// Token ids of one sampled utterance.
pub fn generate_ids(
    lm: &ControlLM,
    control: ControlToken,
    config: &GenerateConfig,
    seed: u64,
) -> Result<Vec<u32>> {
    if config.k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if config.block_n < 2 {
        return Err(Error::Config("block_n must be at least 2".into()));
    }
    let mut rng = seeds::rng(seed, seeds::SAMPLING);
    let mut out: Vec<u32> = Vec::new();
    while out.len() < config.max_tokens {
        let dist = lm.next_distribution(control, &out);
        let end_allowed = out.len() >= config.min_tokens;
        let mut ranked: Vec<u32> = (0..dist.len() as u32)
            .filter(|&w| w != END || end_allowed)
            .collect();
        ranked.sort_by(|&a, &b| {
            dist[b as usize]
                .total_cmp(&dist[a as usize])
                .then(a.cmp(&b))
        });
        let blocked = |w: u32| w != END && completes_repeat(&out, w, config.block_n);

        let allowed: Vec<u32> = ranked
            .iter()
            .take(config.k)
            .copied()
            .filter(|&w| !blocked(w))
            .collect();
        let next = if allowed.is_empty() {
            match ranked.iter().copied().find(|&w| !blocked(w)) {
                Some(w) => w,
                None => break,
            }
        } else {
            let mass: f64 = allowed.iter().map(|&w| dist[w as usize]).sum();
            let mut r = rng.random::<f64>() * mass;
            let mut pick = *allowed.last().expect("non-empty");
            for &w in &allowed {
                r -= dist[w as usize];
                if r < 0.0 {
                    pick = w;
                    break;
                }
            }
            pick
        };
        if next == END {
            break;
        }
        out.push(next);
    }
    Ok(out)
}

/// Samples one utterance under `control`: top-k sampling, n-gram blocking,
/// forced continuation up to `min_tokens`, stop at the end token or
/// `max_tokens`. Deterministic for a given seed.
pub fn generate(
    lm: &ControlLM,
    control: ControlToken,
    config: &GenerateConfig,
    seed: u64,
) -> Result<String> {
    let ids = generate_ids(lm, control, config, seed)?;
    let words: Vec<&str> = ids.iter().map(|&i| lm.vocab[i as usize].as_str()).collect();
    Ok(words.join(" "))
}
