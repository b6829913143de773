use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::classifier::BiEncoderModel;
use crate::error::{Error, Result};
use crate::labels::{Dimension, GenderLabel};
use crate::stats::{welch_t_test, WelchTest};
use crate::textkit::{tokenize, Lexicon};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffensiveDimReport {
    /// Share of masculine among masculine+feminine labels, in percent.
    pub pct_masculine_safe: Option<f64>,
    pub pct_masculine_offensive: Option<f64>,
    pub gendered_safe: usize,
    pub gendered_offensive: usize,
    /// Welch test of safe vs offensive masculine indicators; positive t means
    /// the safe class is more masculine.
    pub test: Option<WelchTest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffensiveReport {
    pub dimensions: BTreeMap<Dimension, OffensiveDimReport>,
}

fn indicators(labels: &[GenderLabel]) -> Vec<f64> {
    labels
        .iter()
        .filter_map(|l| match l {
            GenderLabel::Masculine => Some(1.0),
            GenderLabel::Feminine => Some(0.0),
            _ => None,
        })
        .collect()
}

fn pct(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| 100.0 * xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Builds the report from labels already assigned per dimension.
pub fn offensive_report_from_labels(
    labels: &BTreeMap<Dimension, (Vec<GenderLabel>, Vec<GenderLabel>)>,
) -> OffensiveReport {
    let dimensions = labels
        .iter()
        .map(|(&dim, (safe, offensive))| {
            let (s, o) = (indicators(safe), indicators(offensive));
            let test = welch_t_test(&s, &o);
            if test.is_none() {
                log::warn!(
                    "{dim}: t-test omitted ({} safe, {} offensive gendered utterances)",
                    s.len(),
                    o.len()
                );
            }
            let report = OffensiveDimReport {
                pct_masculine_safe: pct(&s),
                pct_masculine_offensive: pct(&o),
                gendered_safe: s.len(),
                gendered_offensive: o.len(),
                test,
            };
            (dim, report)
        })
        .collect();
    OffensiveReport { dimensions }
}

/// Labels every utterance on all three dimensions with the model's argmax and
/// compares masculine shares between the safe and offensive sets.
pub fn offensive_analysis<S: AsRef<str>>(
    safe: &[S],
    offensive: &[S],
    model: &BiEncoderModel,
) -> Result<OffensiveReport> {
    for dim in Dimension::ALL {
        if !model.supports(dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
    }
    let label_all = |xs: &[S], dim| -> Result<Vec<GenderLabel>> {
        xs.iter()
            .map(|u| Ok(model.predict(u.as_ref(), dim)?.0))
            .collect()
    };
    let mut labels = BTreeMap::new();
    for dim in Dimension::ALL {
        labels.insert(dim, (label_all(safe, dim)?, label_all(offensive, dim)?));
    }
    Ok(offensive_report_from_labels(&labels))
}

pub fn offensive_table(report: &OffensiveReport) -> String {
    let fmt_pct = |p: Option<f64>| p.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into());
    let mut out = format!(
        "{:<6} {:>8} {:>10} {:>9} {:>10}\n",
        "dim", "safe%", "offensive%", "t", "p"
    );
    for (dim, r) in &report.dimensions {
        let (t, p) = match &r.test {
            Some(w) => (format!("{:.3}", w.t), format!("{:.3e}", w.p)),
            None => ("-".into(), "-".into()),
        };
        let _ = writeln!(
            out,
            "{:<6} {:>8} {:>10} {:>9} {:>10}",
            dim.upper(),
            fmt_pct(r.pct_masculine_safe),
            fmt_pct(r.pct_masculine_offensive),
            t,
            p
        );
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WordAnalysisOptions {
    pub prob_threshold: f64,
    pub min_len: usize,
    pub top_n: usize,
}

impl Default for WordAnalysisOptions {
    fn default() -> Self {
        WordAnalysisOptions {
            prob_threshold: 0.7,
            min_len: 3,
            top_n: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenderedWords {
    pub masculine: Vec<(String, u64)>,
    pub feminine: Vec<(String, u64)>,
}

fn top_words(counts: HashMap<String, u64>, top_n: usize) -> Vec<(String, u64)> {
    let mut v: Vec<_> = counts.into_iter().collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v.truncate(top_n);
    v
}

/// Most frequent content words in utterances the model assigns to ABOUT
/// masculine or ABOUT feminine with probability above the threshold.
pub fn gendered_word_analysis<S: AsRef<str>>(
    utterances: &[S],
    model: &BiEncoderModel,
    lexicon: &Lexicon,
    options: &WordAnalysisOptions,
) -> Result<GenderedWords> {
    if !(options.prob_threshold > 0.0 && options.top_n > 0) {
        return Err(Error::Config(
            "prob_threshold and top_n must be positive".into(),
        ));
    }
    let mut masc = HashMap::new();
    let mut fem = HashMap::new();
    for u in utterances {
        let probs = model.probabilities(u.as_ref(), Dimension::About)?;
        let p = |l: GenderLabel| probs.iter().find(|(x, _)| *x == l).map_or(0.0, |(_, p)| *p);
        let target = if p(GenderLabel::Masculine) > options.prob_threshold {
            &mut masc
        } else if p(GenderLabel::Feminine) > options.prob_threshold {
            &mut fem
        } else {
            continue;
        };
        for t in tokenize(u.as_ref()) {
            if t.is_punctuation()
                || t.surface.chars().count() < options.min_len
                || lexicon.is_stopword(&t.surface)
            {
                continue;
            }
            *target.entry(t.surface).or_insert(0) += 1;
        }
    }
    Ok(GenderedWords {
        masculine: top_words(masc, options.top_n),
        feminine: top_words(fem, options.top_n),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use GenderLabel::*;

    #[test]
    fn null_case_and_sign() {
        let same = vec![Masculine, Feminine, Masculine, Neutral];
        let mut labels = BTreeMap::new();
        labels.insert(Dimension::About, (same.clone(), same));
        labels.insert(Dimension::To, (vec![Masculine; 10], vec![Feminine; 10]));
        labels.insert(Dimension::As, (vec![Masculine], vec![Feminine, Masculine]));
        let r = offensive_report_from_labels(&labels);
        let about = r.dimensions[&Dimension::About].test.unwrap();
        assert_eq!((about.t, about.p), (0.0, 1.0));
        let to = &r.dimensions[&Dimension::To];
        assert_eq!(
            (to.pct_masculine_safe, to.pct_masculine_offensive),
            (Some(100.0), Some(0.0))
        );
        assert!(to.test.unwrap().t > 0.0);
        assert!(r.dimensions[&Dimension::As].test.is_none());
        assert!(offensive_table(&r).contains("ABOUT"));
    }
}
