//! Tokenization, lexicon handling, gendered-word counting, masking, and the
//! corpus-level over-representation statistic.

mod lexicon;
mod tokenize;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

pub use lexicon::{Lexicon, LexiconPaths, NameEntry, PronounInventory};
pub use tokenize::{detokenize, tokenize, Token, MASK_TOKEN};

use crate::error::{Error, Result};
use crate::labels::GenderLabel;

/// Default corpus-frequency floor for over-representation tables.
pub const DEFAULT_MIN_COUNT: u64 = 500;

/// Occurrence counts of explicitly masculine and feminine words.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenderedCounts {
    pub masculine: u64,
    pub feminine: u64,
}

impl GenderedCounts {
    pub fn total(&self) -> u64 {
        self.masculine + self.feminine
    }
}

impl std::ops::Add for GenderedCounts {
    type Output = GenderedCounts;
    fn add(self, rhs: Self) -> Self {
        GenderedCounts {
            masculine: self.masculine + rhs.masculine,
            feminine: self.feminine + rhs.feminine,
        }
    }
}

impl std::iter::Sum for GenderedCounts {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(GenderedCounts::default(), |a, b| a + b)
    }
}

pub fn count_gendered(tokens: &[Token], lexicon: &Lexicon) -> GenderedCounts {
    let mut counts = GenderedCounts::default();
    for t in tokens {
        match lexicon.word_gender(&t.surface) {
            Some(GenderLabel::Masculine) => counts.masculine += 1,
            Some(GenderLabel::Feminine) => counts.feminine += 1,
            _ => {}
        }
    }
    counts
}

/// Word-list baseline: the majority of explicitly gendered words decides;
/// ties (including no gendered words at all) are neutral.
pub fn word_list_label(tokens: &[Token], lexicon: &Lexicon) -> GenderLabel {
    let c = count_gendered(tokens, lexicon);
    match c.masculine.cmp(&c.feminine) {
        std::cmp::Ordering::Greater => GenderLabel::Masculine,
        std::cmp::Ordering::Less => GenderLabel::Feminine,
        std::cmp::Ordering::Equal => GenderLabel::Neutral,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskMode {
    None,
    Words,
    WordsAndNames,
}

impl std::str::FromStr for MaskMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "none" => Ok(MaskMode::None),
            "words" => Ok(MaskMode::Words),
            "words_and_names" => Ok(MaskMode::WordsAndNames),
            other => Err(format!(
                "unknown mask mode `{other}` (none, words, words_and_names)"
            )),
        }
    }
}

/// Replaces gendered words (and optionally known names) with [`MASK_TOKEN`].
/// Length and positions are preserved.
pub fn mask_gendered(tokens: &[Token], lexicon: &Lexicon, mask_names: bool) -> Vec<Token> {
    tokens
        .iter()
        .map(|t| {
            let hit = lexicon.word_gender(&t.surface).is_some()
                || (mask_names && lexicon.name_table.contains_key(&t.surface));
            if hit {
                Token::new(MASK_TOKEN, t.index)
            } else {
                t.clone()
            }
        })
        .collect()
}

/// Tokenizes, masks per `mode`, and joins back into text.
pub fn mask_text(text: &str, lexicon: &Lexicon, mode: MaskMode) -> String {
    match mode {
        MaskMode::None => text.to_string(),
        MaskMode::Words => detokenize(&mask_gendered(&tokenize(text), lexicon, false)),
        MaskMode::WordsAndNames => detokenize(&mask_gendered(&tokenize(text), lexicon, true)),
    }
}

/// Keeps only tokens whose part-of-speech tag is in `allowed`.
pub fn filter_by_pos(tokens: &[Token], tags: &[String], allowed: &BTreeSet<String>) -> Vec<Token> {
    tokens
        .iter()
        .zip(tags)
        .filter(|(_, tag)| allowed.contains(tag.as_str()))
        .map(|(t, _)| t.clone())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordStats {
    pub word: String,
    pub gender: GenderLabel,
    /// P(word | gender) / P(word).
    pub ratio: f64,
    /// Total corpus occurrences across all gender classes.
    pub count: u64,
}

/// Per-gender over-representation ranking.
///
/// For every word with total count `>= min_count` and every gender `g` with
/// at least one token, `ratio = (count(w, g) / count(*, g)) / (count(w) / count(*))`.
/// Unknown-labeled documents and punctuation tokens are left out of every
/// count. Output is grouped masculine, feminine, neutral; each group is sorted
/// by descending ratio, ties broken alphabetically.
pub fn overrepresentation(
    corpus: &[(Vec<Token>, GenderLabel)],
    min_count: u64,
) -> Result<Vec<WordStats>> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if min_count == 0 {
        return Err(Error::InvalidMinCount);
    }
    let mut by_word: HashMap<&str, [u64; 3]> = HashMap::new();
    let mut class_totals = [0u64; 3];
    for (tokens, label) in corpus {
        let g = match label {
            GenderLabel::Masculine => 0,
            GenderLabel::Feminine => 1,
            GenderLabel::Neutral => 2,
            GenderLabel::Unknown => continue,
        };
        for t in tokens.iter().filter(|t| !t.is_punctuation()) {
            by_word.entry(t.surface.as_str()).or_default()[g] += 1;
            class_totals[g] += 1;
        }
    }
    let grand_total: u64 = class_totals.iter().sum();
    if grand_total == 0 {
        return Err(Error::EmptyCorpus);
    }

    let frequent: BTreeMap<&str, [u64; 3]> = by_word
        .into_iter()
        .filter(|(_, c)| c.iter().sum::<u64>() >= min_count)
        .collect();

    let mut out = Vec::new();
    for (g, gender) in GenderLabel::CLASSES.iter().enumerate() {
        if class_totals[g] == 0 {
            continue;
        }
        let mut group: Vec<WordStats> = frequent
            .iter()
            .map(|(word, c)| {
                let count: u64 = c.iter().sum();
                let p_given = c[g] as f64 / class_totals[g] as f64;
                let p = count as f64 / grand_total as f64;
                WordStats {
                    word: word.to_string(),
                    gender: *gender,
                    ratio: p_given / p,
                    count,
                }
            })
            .collect();
        group.sort_by(|a, b| {
            b.ratio
                .total_cmp(&a.ratio)
                .then_with(|| a.word.cmp(&b.word))
        });
        out.extend(group);
    }
    Ok(out)
}
