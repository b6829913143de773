//! Rule-based gender annotators: pronoun majority, baby-name lookup, kinship
//! terms, persona self-descriptions, next/last-speaker addressee labels, and
//! confidence-based retention of externally scored records.
//!
//! Every annotator answers `unknown` when its evidence conflicts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::GenderLabel;
use crate::textkit::{tokenize, Lexicon, Token};

/// A confidence cut-off strictly above 0.5 and at most 1.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Threshold(f64);

impl Threshold {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.5 && value <= 1.0 {
            Ok(Threshold(value))
        } else {
            Err(Error::InvalidThreshold(value))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Threshold {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Threshold::new(v)
    }
}

impl From<Threshold> for f64 {
    fn from(t: Threshold) -> f64 {
        t.0
    }
}

impl Default for Threshold {
    fn default() -> Self {
        Threshold(0.9)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnotateConfig {
    /// Name-table confidence needed before a name decides a gender.
    pub name_threshold: Threshold,
    /// Label assigned when they-forms win the pronoun count: neutral or unknown.
    pub they_maps_to: GenderLabel,
}

impl Default for AnnotateConfig {
    fn default() -> Self {
        AnnotateConfig {
            name_threshold: Threshold::default(),
            they_maps_to: GenderLabel::Neutral,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Utterance {
    pub text: String,
    pub speaker_id: Option<String>,
    pub conversation_id: Option<String>,
    pub turn_index: Option<usize>,
}

impl Utterance {
    pub fn new(text: impl Into<String>) -> Self {
        Utterance {
            text: text.into(),
            ..Default::default()
        }
    }
}

/// Counts he-, she- and they-forms; a strict majority decides.
pub fn pronoun_majority_label(
    tokens: &[Token],
    lexicon: &Lexicon,
    config: &AnnotateConfig,
) -> GenderLabel {
    let inv = &lexicon.pronouns;
    let (mut he, mut she, mut they) = (0usize, 0usize, 0usize);
    for t in tokens {
        let s = t.surface.as_str();
        if inv.masculine.contains(s) {
            he += 1;
        } else if inv.feminine.contains(s) {
            she += 1;
        } else if inv.neutral.contains(s) {
            they += 1;
        }
    }
    if he > she && he > they {
        GenderLabel::Masculine
    } else if she > he && she > they {
        GenderLabel::Feminine
    } else if they > he && they > she {
        config.they_maps_to
    } else {
        GenderLabel::Unknown
    }
}

pub fn name_gender_label(name: &str, lexicon: &Lexicon, threshold: Threshold) -> GenderLabel {
    match lexicon.name_table.get(&name.trim().to_lowercase()) {
        Some(e) if e.prob_masculine >= threshold.get() => GenderLabel::Masculine,
        Some(e) if e.prob_masculine <= 1.0 - threshold.get() => GenderLabel::Feminine,
        _ => GenderLabel::Unknown,
    }
}

/// Collapses a set of observed genders: exactly one gender wins, anything
/// else (none, or both) is unknown.
fn agree(mut labels: impl Iterator<Item = GenderLabel>) -> GenderLabel {
    let Some(first) = labels.next() else {
        return GenderLabel::Unknown;
    };
    if labels.all(|l| l == first) {
        first
    } else {
        GenderLabel::Unknown
    }
}

pub fn kinship_label(tokens: &[Token], lexicon: &Lexicon) -> GenderLabel {
    agree(
        tokens
            .iter()
            .filter_map(|t| lexicon.kinship.get(&t.surface).copied()),
    )
}

fn gendered_noun(surface: &str, lexicon: &Lexicon) -> Option<GenderLabel> {
    lexicon
        .kinship
        .get(surface)
        .copied()
        .or_else(|| lexicon.word_gender(surface))
}

/// Labels found by `i am a|an ... <gendered noun>` in one line: for each
/// occurrence, the first gendered noun before the clause ends.
fn self_descriptions(tokens: &[Token], lexicon: &Lexicon) -> Vec<GenderLabel> {
    let s: Vec<&str> = tokens.iter().map(|t| t.surface.as_str()).collect();
    let mut found = Vec::new();
    for i in 0..s.len().saturating_sub(2) {
        let starts = (s[i] == "i" && s[i + 1] == "am") || s[i] == "i'm";
        if !starts {
            continue;
        }
        let article_at = if s[i] == "i'm" { i + 1 } else { i + 2 };
        if !matches!(s.get(article_at), Some(&"a") | Some(&"an")) {
            continue;
        }
        for (j, w) in s.iter().enumerate().skip(article_at + 1) {
            if tokens[j].is_punctuation() {
                break;
            }
            if let Some(g) = gendered_noun(w, lexicon) {
                found.push(g);
                break;
            }
        }
    }
    found
}

/// Names following `my name is`.
fn stated_names(tokens: &[Token]) -> Vec<&str> {
    let s: Vec<&str> = tokens.iter().map(|t| t.surface.as_str()).collect();
    s.windows(4)
        .filter(|w| w[0] == "my" && w[1] == "name" && w[2] == "is")
        .map(|w| w[3])
        .collect()
}

/// Resolves a persona's gender. Self-descriptions ("i am a old woman") are
/// tried first across all lines; stated names ("my name is bob") only when no
/// self-description matched. Conflicting matches within a tier give unknown.
pub fn persona_gender<S: AsRef<str>>(
    persona_lines: &[S],
    lexicon: &Lexicon,
    config: &AnnotateConfig,
) -> GenderLabel {
    let tokenized: Vec<Vec<Token>> = persona_lines.iter().map(|l| tokenize(l.as_ref())).collect();

    let described: Vec<GenderLabel> = tokenized
        .iter()
        .flat_map(|t| self_descriptions(t, lexicon))
        .collect();
    if !described.is_empty() {
        return agree(described.into_iter());
    }

    let named: Vec<GenderLabel> = tokenized
        .iter()
        .flat_map(|t| stated_names(t))
        .map(|n| name_gender_label(n, lexicon, config.name_threshold))
        .filter(|g| g.is_known())
        .collect();
    agree(named.into_iter())
}

/// Addressee labels for a conversation: the gender of the next speaker when a
/// later turn by someone else exists, otherwise the gender of the previous
/// other speaker, otherwise unknown.
///
/// Turns by the same speaker id are skipped when looking for the addressee;
/// turns without a speaker id are treated as distinct speakers.
pub fn dialogue_to_labels(conversation: &[(Utterance, GenderLabel)]) -> Vec<GenderLabel> {
    let other =
        |i: usize, j: usize| match (&conversation[i].0.speaker_id, &conversation[j].0.speaker_id) {
            (Some(a), Some(b)) => a != b,
            _ => true,
        };
    (0..conversation.len())
        .map(|i| {
            let next = (i + 1..conversation.len()).find(|&j| other(i, j));
            let prev = || (0..i).rev().find(|&j| other(i, j));
            next.or_else(prev)
                .map(|j| conversation[j].1)
                .unwrap_or(GenderLabel::Unknown)
        })
        .collect()
}

/// Keeps records whose externally supplied masculine probability is at least
/// `threshold` (masculine) or at most `1 - threshold` (feminine).
pub fn confident_retention(
    records: Vec<(Utterance, f64)>,
    threshold: Threshold,
) -> Result<Vec<(Utterance, GenderLabel)>> {
    let t = threshold.get();
    let mut kept = Vec::new();
    for (utt, prob) in records {
        if !(0.0..=1.0).contains(&prob) {
            return Err(Error::InvalidProbability(prob));
        }
        if prob >= t {
            kept.push((utt, GenderLabel::Masculine));
        } else if prob <= 1.0 - t {
            kept.push((utt, GenderLabel::Feminine));
        }
    }
    Ok(kept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textkit::NameEntry;
    use GenderLabel::*;

    fn lex() -> Lexicon {
        Lexicon::builtin()
    }

    fn pron(s: &str) -> GenderLabel {
        pronoun_majority_label(&tokenize(s), &lex(), &AnnotateConfig::default())
    }

    #[test]
    fn pronoun_majority() {
        assert_eq!(pron("He wrote books. He died in 1901."), Masculine);
        assert_eq!(pron("She met him."), Unknown);
        assert_eq!(pron("They identify as nonbinary. They perform."), Neutral);
        assert_eq!(pron("She said she would."), Feminine);
        assert_eq!(pron("No pronouns at all."), Unknown);
        // he=2, she=2, they=1: tie for the max
        assert_eq!(pron("he he she she they"), Unknown);
        let cfg = AnnotateConfig {
            they_maps_to: Unknown,
            ..Default::default()
        };
        assert_eq!(
            pronoun_majority_label(&tokenize("they them"), &lex(), &cfg),
            Unknown
        );
    }

    #[test]
    fn names() {
        let mut l = lex();
        l.name_table.insert(
            "x".into(),
            NameEntry {
                prob_masculine: 1.0,
                count: 1,
            },
        );
        l.name_table.insert(
            "y".into(),
            NameEntry {
                prob_masculine: 0.55,
                count: 1,
            },
        );
        l.name_table.insert(
            "z".into(),
            NameEntry {
                prob_masculine: 0.05,
                count: 1,
            },
        );
        let t = Threshold::new(0.9).unwrap();
        assert_eq!(name_gender_label("X", &l, t), Masculine);
        assert_eq!(name_gender_label("y", &l, t), Unknown);
        assert_eq!(name_gender_label("z", &l, t), Feminine);
        assert_eq!(name_gender_label("nobody", &l, t), Unknown);
    }

    #[test]
    fn threshold_bounds() {
        assert!(Threshold::new(0.5).is_err());
        assert!(Threshold::new(1.01).is_err());
        assert!(Threshold::new(1.0).is_ok());
        assert_eq!(
            Threshold::new(0.4).unwrap_err().to_string(),
            "threshold must exceed 0.5 (got 0.4)"
        );
    }

    #[test]
    fn kinship() {
        let l = lex();
        assert_eq!(
            kinship_label(&tokenize("my daughter arrived"), &l),
            Feminine
        );
        assert_eq!(
            kinship_label(&tokenize("his son and daughter"), &l),
            Unknown
        );
        assert_eq!(kinship_label(&tokenize("the car arrived"), &l), Unknown);
        assert_eq!(kinship_label(&tokenize("father and son"), &l), Masculine);
    }

    #[test]
    fn personas() {
        let l = lex();
        let c = AnnotateConfig::default();
        assert_eq!(persona_gender(&["i am a old woman"], &l, &c), Feminine);
        assert_eq!(persona_gender(&["my name is bob"], &l, &c), Masculine);
        assert_eq!(persona_gender(&["i like turtles"], &l, &c), Unknown);
        assert_eq!(
            persona_gender(&["I'm an engineer and a mother of two."], &l, &c),
            Feminine
        );
        // self-description outranks the stated name
        assert_eq!(
            persona_gender(&["my name is bob", "i am a proud grandmother"], &l, &c),
            Feminine
        );
        // ambiguous name falls through to unknown
        assert_eq!(persona_gender(&["my name is alex"], &l, &c), Unknown);
        // conflicting self-descriptions
        assert_eq!(
            persona_gender(&["i am a man", "i am a woman"], &l, &c),
            Unknown
        );
        // a gendered word after the clause ends does not count
        assert_eq!(
            persona_gender(&["i am a teacher. my wife cooks"], &l, &c),
            Unknown
        );
    }

    fn turn(speaker: &str, g: GenderLabel) -> (Utterance, GenderLabel) {
        (
            Utterance {
                text: "hi".into(),
                speaker_id: Some(speaker.into()),
                ..Default::default()
            },
            g,
        )
    }

    #[test]
    fn addressee_labels() {
        let conv = vec![
            turn("a", Masculine),
            turn("b", Feminine),
            turn("a", Masculine),
        ];
        assert_eq!(dialogue_to_labels(&conv), [Feminine, Masculine, Feminine]);
        let conv = vec![turn("a", Masculine), turn("b", Feminine)];
        assert_eq!(dialogue_to_labels(&conv), [Feminine, Masculine]);
        assert_eq!(dialogue_to_labels(&[turn("a", Masculine)]), [Unknown]);
        assert!(dialogue_to_labels(&[]).is_empty());
        // a speaker never addresses themself
        let conv = vec![
            turn("a", Masculine),
            turn("a", Masculine),
            turn("b", Feminine),
        ];
        assert_eq!(dialogue_to_labels(&conv), [Feminine, Feminine, Masculine]);
    }

    #[test]
    fn retention() {
        let t = Threshold::new(0.9).unwrap();
        let recs = vec![
            (Utterance::new("a"), 0.97),
            (Utterance::new("b"), 0.5),
            (Utterance::new("c"), 0.05),
        ];
        let kept = confident_retention(recs, t).unwrap();
        let got: Vec<_> = kept.iter().map(|(u, g)| (u.text.as_str(), *g)).collect();
        assert_eq!(got, [("a", Masculine), ("c", Feminine)]);
        assert!(confident_retention(vec![(Utterance::new("x"), 1.2)], t).is_err());
    }
}
