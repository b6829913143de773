use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::BiEncoderModel;
use crate::dataset::{Confidence, Example};
use crate::error::{Error, Result};
use crate::labels::{Dimension, GenderLabel};

/// Per-class accuracies for one dimension. A class with no examples has no
/// accuracy; `avg` is the mean of the defined ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimReport {
    pub accuracy_m: Option<f64>,
    pub accuracy_f: Option<f64>,
    pub accuracy_n: Option<f64>,
    pub count_m: usize,
    pub count_f: usize,
    pub count_n: usize,
    pub avg: f64,
}

impl DimReport {
    pub fn accuracy(&self, label: GenderLabel) -> Option<f64> {
        match label {
            GenderLabel::Masculine => self.accuracy_m,
            GenderLabel::Feminine => self.accuracy_f,
            GenderLabel::Neutral => self.accuracy_n,
            GenderLabel::Unknown => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub dimensions: BTreeMap<Dimension, DimReport>,
    /// Mean of the per-dimension averages.
    pub all_avg: f64,
}

/// How predictions are drawn for evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalOptions {
    /// Rank all of the model's classes instead of the in-dimension set; a
    /// prediction is correct only if the top class is the gold dimension and label.
    pub nine_way: bool,
    /// Only evaluate examples annotated with `certain` confidence (if they carry one).
    pub certain_only: bool,
}

/// One gold label and what the model answered for it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Judgement {
    pub dimension: Dimension,
    pub gold: GenderLabel,
    /// `None` when the prediction does not name a label on `dimension`.
    pub predicted: Option<GenderLabel>,
}

/// Aggregates judgements into per-class accuracies. Unknown gold labels are
/// ignored.
pub fn report_from_judgements(judgements: &[Judgement]) -> Result<EvalReport> {
    // [dimension][class] -> (correct, total)
    let mut tally = [[(0usize, 0usize); 3]; 3];
    for j in judgements {
        let class = match j.gold {
            GenderLabel::Masculine => 0,
            GenderLabel::Feminine => 1,
            GenderLabel::Neutral => 2,
            GenderLabel::Unknown => continue,
        };
        let cell = &mut tally[j.dimension.index()][class];
        cell.1 += 1;
        if j.predicted == Some(j.gold) {
            cell.0 += 1;
        }
    }
    let mut dimensions = BTreeMap::new();
    for dim in Dimension::ALL {
        let t = tally[dim.index()];
        let acc = |(c, n): (usize, usize)| (n > 0).then(|| c as f64 / n as f64);
        let accs = [acc(t[0]), acc(t[1]), acc(t[2])];
        let defined: Vec<f64> = accs.iter().flatten().copied().collect();
        if defined.is_empty() {
            continue;
        }
        dimensions.insert(
            dim,
            DimReport {
                accuracy_m: accs[0],
                accuracy_f: accs[1],
                accuracy_n: accs[2],
                count_m: t[0].1,
                count_f: t[1].1,
                count_n: t[2].1,
                avg: defined.iter().sum::<f64>() / defined.len() as f64,
            },
        );
    }
    if dimensions.is_empty() {
        return Err(Error::EmptyEvaluation);
    }
    let all_avg = dimensions.values().map(|d| d.avg).sum::<f64>() / dimensions.len() as f64;
    Ok(EvalReport {
        dimensions,
        all_avg,
    })
}

fn judge(
    model: &BiEncoderModel,
    data: &[Example],
    dims: &[Dimension],
    predict_with: impl Fn(Dimension) -> Dimension,
    options: EvalOptions,
) -> Result<Vec<Judgement>> {
    let mut out = Vec::new();
    for e in data {
        if options.certain_only && e.confidence.is_some_and(|c| c != Confidence::Certain) {
            continue;
        }
        for &dim in dims {
            let gold = e.labels[dim];
            if !gold.is_known() {
                continue;
            }
            let predicted = if options.nine_way {
                let top = model.predict_any(&e.text)?;
                (top.dimension == predict_with(dim)).then_some(top.label)
            } else {
                Some(model.predict(&e.text, predict_with(dim))?.0)
            };
            out.push(Judgement {
                dimension: dim,
                gold,
                predicted,
            });
        }
    }
    Ok(out)
}

/// In-dimension evaluation on every dimension the model was trained for.
pub fn evaluate(model: &BiEncoderModel, data: &[Example]) -> Result<EvalReport> {
    evaluate_with(model, data, EvalOptions::default())
}

pub fn evaluate_with(
    model: &BiEncoderModel,
    data: &[Example],
    options: EvalOptions,
) -> Result<EvalReport> {
    report_from_judgements(&judge(model, data, model.tasks(), |d| d, options)?)
}

/// Evaluates a single-task model's predictions against the gold labels of
/// every dimension present in `data`.
pub fn evaluate_cross_dimension(
    model: &BiEncoderModel,
    data: &[Example],
    options: EvalOptions,
) -> Result<EvalReport> {
    let task = match model.tasks() {
        [only] => *only,
        _ => {
            return Err(Error::Config(
                "cross-dimension evaluation needs a single-task model".into(),
            ))
        }
    };
    report_from_judgements(&judge(model, data, &Dimension::ALL, |_| task, options)?)
}

fn pct(x: Option<f64>) -> String {
    x.map(|v| format!("{:.2}", 100.0 * v))
        .unwrap_or_else(|| "-".to_string())
}

/// Aligned text grid: one row per dimension, masculine / feminine / neutral /
/// average columns in percent.
impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<6} {:>8} {:>8} {:>8} {:>8}",
            "dim", "M", "F", "N", "avg"
        )?;
        for (dim, r) in &self.dimensions {
            writeln!(
                f,
                "{:<6} {:>8} {:>8} {:>8} {:>8}",
                dim.upper(),
                pct(r.accuracy_m),
                pct(r.accuracy_f),
                pct(r.accuracy_n),
                pct(Some(r.avg))
            )?;
        }
        writeln!(f, "{:<6} {:>35}", "all", pct(Some(self.all_avg)))
    }
}
