use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classifier::BiEncoderModel;
use crate::error::{Error, Result};
use crate::labels::{Dimension, GenderLabel};
use crate::textkit::{count_gendered, tokenize, word_list_label, GenderedCounts, Lexicon};

/// A `DIM:label` token prepended to a training utterance, e.g. `ABOUT:feminine`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct ControlToken {
    pub dimension: Dimension,
    pub label: GenderLabel,
}

impl ControlToken {
    pub fn new(dimension: Dimension, label: GenderLabel) -> Result<Self> {
        if label == GenderLabel::Unknown {
            return Err(Error::Config(
                "control tokens cannot carry the unknown label".into(),
            ));
        }
        Ok(ControlToken { dimension, label })
    }
}

impl fmt::Display for ControlToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.dimension.upper(), self.label)
    }
}

impl FromStr for ControlToken {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (dim, label) = s
            .split_once(':')
            .ok_or_else(|| format!("expected DIM:label, got `{s}`"))?;
        if dim != dim.to_ascii_uppercase() || label != label.to_ascii_lowercase() {
            return Err(format!(
                "control token `{s}` must be DIM:label (upper/lower case)"
            ));
        }
        ControlToken::new(dim.parse()?, label.parse()?).map_err(|e| e.to_string())
    }
}

impl From<ControlToken> for String {
    fn from(c: ControlToken) -> String {
        c.to_string()
    }
}

impl TryFrom<String> for ControlToken {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

/// Prefixes an utterance with its control token.
pub fn render_line(token: ControlToken, utterance: &str) -> String {
    format!("{token} {utterance}")
}

/// Splits a control-corpus line into its token and the original utterance.
pub fn parse_line(line: &str) -> Option<(ControlToken, &str)> {
    let (head, rest) = line.split_once(' ').unwrap_or((line, ""));
    Some((head.parse().ok()?, rest))
}

/// Labels each utterance with the classifier's argmax on `dimension`.
pub fn build_control_corpus<S: AsRef<str>>(
    utterances: &[S],
    model: &BiEncoderModel,
    dimension: Dimension,
) -> Result<Vec<String>> {
    utterances
        .iter()
        .map(|u| {
            let (label, _) = model.predict(u.as_ref(), dimension)?;
            Ok(render_line(ControlToken { dimension, label }, u.as_ref()))
        })
        .collect()
}

/// Word-list baseline: labels come from [`word_list_label`].
pub fn build_control_corpus_wordlist<S: AsRef<str>>(
    utterances: &[S],
    lexicon: &Lexicon,
    dimension: Dimension,
) -> Vec<String> {
    utterances
        .iter()
        .map(|u| {
            let label = word_list_label(&tokenize(u.as_ref()), lexicon);
            render_line(ControlToken { dimension, label }, u.as_ref())
        })
        .collect()
}

/// What a generation was conditioned on: a classifier-derived control token,
/// or a word-list-baseline token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum GenControl {
    Classifier(ControlToken),
    WordList(GenderLabel),
}

impl fmt::Display for GenControl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenControl::Classifier(t) => t.fmt(f),
            GenControl::WordList(l) => write!(f, "WORDLIST:{l}"),
        }
    }
}

impl FromStr for GenControl {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.strip_prefix("WORDLIST:") {
            Some(label) => Ok(GenControl::WordList(label.parse()?)),
            None => Ok(GenControl::Classifier(s.parse()?)),
        }
    }
}

impl From<GenControl> for String {
    fn from(c: GenControl) -> String {
        c.to_string()
    }
}

impl TryFrom<String> for GenControl {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenStats {
    pub control: GenControl,
    pub generations: usize,
    pub gendered_word_count: u64,
    pub masculine: u64,
    pub feminine: u64,
    /// 100 · masculine / (masculine + feminine); absent with no gendered words.
    pub pct_masculine: Option<f64>,
}

/// Gendered-word totals per control value, in control order.
pub fn generation_stats(generations: &[(GenControl, String)], lexicon: &Lexicon) -> Vec<GenStats> {
    let mut per: BTreeMap<GenControl, (usize, GenderedCounts)> = BTreeMap::new();
    for (control, text) in generations {
        let entry = per.entry(*control).or_default();
        entry.0 += 1;
        entry.1 = entry.1 + count_gendered(&tokenize(text), lexicon);
    }
    per.into_iter()
        .map(|(control, (n, c))| GenStats {
            control,
            generations: n,
            gendered_word_count: c.total(),
            masculine: c.masculine,
            feminine: c.feminine,
            pct_masculine: (c.total() > 0).then(|| 100.0 * c.masculine as f64 / c.total() as f64),
        })
        .collect()
}

pub fn generation_stats_table(stats: &[GenStats]) -> String {
    let mut out = format!(
        "{:<20} {:>6} {:>10} {:>8}\n",
        "control", "n", "gendered", "%masc"
    );
    for s in stats {
        let pct = s
            .pct_masculine
            .map(|p| format!("{p:.2}"))
            .unwrap_or_else(|| "-".into());
        out.push_str(&format!(
            "{:<20} {:>6} {:>10} {:>8}\n",
            s.control.to_string(),
            s.generations,
            s.gendered_word_count,
            pct
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn control_token_rendering() {
        let t = ControlToken::new(Dimension::About, GenderLabel::Feminine).unwrap();
        assert_eq!(t.to_string(), "ABOUT:feminine");
        assert_eq!(
            "AS:masculine".parse::<ControlToken>().unwrap().dimension,
            Dimension::As
        );
        assert!("about:feminine".parse::<ControlToken>().is_err());
        assert!("ABOUT:Feminine".parse::<ControlToken>().is_err());
        assert!("ABOUT:unknown".parse::<ControlToken>().is_err());
        assert_eq!(render_line(t, "hello"), "ABOUT:feminine hello");
        assert_eq!(
            parse_line("ABOUT:feminine hello there"),
            Some((t, "hello there"))
        );
        assert_eq!(parse_line("ABOUT:feminine"), Some((t, "")));
    }

    #[test]
    fn wordlist_corpus() {
        let lex = Lexicon::builtin();
        let out = build_control_corpus_wordlist(
            &["he and his dog", "the weather", "he met her"],
            &lex,
            Dimension::To,
        );
        assert_eq!(
            out,
            [
                "TO:masculine he and his dog",
                "TO:neutral the weather",
                "TO:neutral he met her"
            ]
        );
        assert!(build_control_corpus_wordlist::<&str>(&[], &lex, Dimension::To).is_empty());
    }

    #[test]
    fn stats_arithmetic() {
        let lex = Lexicon::builtin();
        let c = GenControl::Classifier("ABOUT:masculine".parse().unwrap());
        let w = GenControl::WordList(GenderLabel::Feminine);
        let gens = vec![
            (c, "he said his brother".to_string()),
            (c, "she laughed".to_string()),
            (w, "nothing here".to_string()),
        ];
        let s = generation_stats(&gens, &lex);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].control, c);
        assert_eq!(
            (s[0].gendered_word_count, s[0].pct_masculine),
            (4, Some(75.0))
        );
        assert_eq!((s[1].gendered_word_count, s[1].pct_masculine), (0, None));
        assert_eq!(w.to_string().parse::<GenControl>().unwrap(), w);
        assert!(generation_stats_table(&s).contains("WORDLIST:feminine"));
    }
}
