use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::classifier::BiEncoderModel;
use crate::error::{Error, Result};
use crate::labels::Dimension;

/// Minimum paragraph count for a document to appear in the ranked extremes.
pub const DEFAULT_MIN_PARAGRAPHS: usize = 25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    #[serde(default)]
    pub title: String,
    pub paragraphs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenderednessScore {
    pub doc_id: String,
    /// P(ABOUT:masculine) per paragraph, in document order.
    pub paragraph_scores: Vec<f64>,
    pub median_score: f64,
    pub paragraph_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub documents: usize,
    pub mean: f64,
    pub median: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenderednessRanking {
    /// Every scored document, in input order.
    pub scores: Vec<GenderednessScore>,
    /// Documents with at least `min_paragraphs` paragraphs, lowest median first.
    pub most_feminine: Vec<GenderednessScore>,
    /// The same documents, highest median first.
    pub most_masculine: Vec<GenderednessScore>,
    /// Mean and median of the document medians over all scored documents.
    pub aggregate: Option<ScoreSummary>,
    /// Documents without paragraphs.
    pub skipped: Vec<String>,
}

/// Exact median; the mean of the two middle values for even lengths.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    })
}

pub fn summarize(medians: &[f64]) -> Option<ScoreSummary> {
    Some(ScoreSummary {
        documents: medians.len(),
        mean: medians.iter().sum::<f64>() / medians.len() as f64,
        median: median(medians)?,
    })
}

/// Scores one document from precomputed paragraph probabilities.
pub fn score_paragraphs(doc_id: &str, paragraph_scores: Vec<f64>) -> Option<GenderednessScore> {
    let median_score = median(&paragraph_scores)?;
    Some(GenderednessScore {
        doc_id: doc_id.to_string(),
        paragraph_count: paragraph_scores.len(),
        paragraph_scores,
        median_score,
    })
}

/// Masculine genderedness of each document: the median over its paragraphs
/// of P(ABOUT:masculine).
pub fn document_genderedness(
    documents: &[Document],
    model: &BiEncoderModel,
    min_paragraphs: usize,
) -> Result<GenderednessRanking> {
    if !model.supports(Dimension::About) {
        return Err(Error::UnsupportedDimension(Dimension::About));
    }
    let mut scores = Vec::new();
    let mut skipped = Vec::new();
    for doc in documents {
        let paragraph_scores = doc
            .paragraphs
            .iter()
            .map(|p| model.about_masculine_probability(p))
            .collect::<Result<Vec<f64>>>()?;
        match score_paragraphs(&doc.doc_id, paragraph_scores) {
            Some(s) => scores.push(s),
            None => {
                log::warn!("document {} has no paragraphs; skipped", doc.doc_id);
                skipped.push(doc.doc_id.clone());
            }
        }
    }
    Ok(rank(scores, min_paragraphs, skipped))
}

pub fn rank(
    scores: Vec<GenderednessScore>,
    min_paragraphs: usize,
    skipped: Vec<String>,
) -> GenderednessRanking {
    let mut eligible: Vec<GenderednessScore> = scores
        .iter()
        .filter(|s| s.paragraph_count >= min_paragraphs)
        .cloned()
        .collect();
    eligible.sort_by(|a, b| {
        a.median_score
            .total_cmp(&b.median_score)
            .then_with(|| a.doc_id.cmp(&b.doc_id))
    });
    let most_feminine = eligible.clone();
    eligible.reverse();
    let medians: Vec<f64> = scores.iter().map(|s| s.median_score).collect();
    GenderednessRanking {
        aggregate: summarize(&medians),
        scores,
        most_feminine,
        most_masculine: eligible,
        skipped,
    }
}

/// `doc_id<TAB>median<TAB>paragraph_count` lines, most masculine first.
pub fn ranking_tsv(ranking: &GenderednessRanking) -> String {
    let mut out = String::new();
    for s in &ranking.most_masculine {
        let _ = writeln!(
            out,
            "{}\t{}\t{}",
            s.doc_id, s.median_score, s.paragraph_count
        );
    }
    out
}
