//! Labeled examples and the unknown-label machinery used during training:
//! ABOUT imputation, per-epoch masculine/feminine assignment for unknown TO/AS
//! labels, oversampling, splits, and the canonical and MDGender JSONL formats.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::classifier::BiEncoderModel;
use crate::error::{Error, Result};
use crate::labels::{DimMap, Dimension, GenderLabel};
use crate::seeds;

/// Where a label came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelOrigin {
    Gold,
    #[default]
    Rule,
    Imputed,
    Flipped,
}

/// Annotator confidence attached to MDGender rewrites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Confidence {
    Certain,
    PrettySure,
    Unsure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    /// Stable identifier; drives the per-example label assignment in [`epoch_view`].
    pub id: String,
    pub text: String,
    pub labels: DimMap<GenderLabel>,
    pub origin: DimMap<LabelOrigin>,
    /// Dataset name.
    pub source: String,
    pub confidence: Option<Confidence>,
    /// Conversation or document key; grouped examples never straddle splits.
    pub group: Option<String>,
}

impl Example {
    pub fn new(id: impl Into<String>, text: impl Into<String>, source: impl Into<String>) -> Self {
        Example {
            id: id.into(),
            text: text.into(),
            labels: DimMap::splat(GenderLabel::Unknown),
            origin: DimMap::splat(LabelOrigin::Rule),
            source: source.into(),
            confidence: None,
            group: None,
        }
    }

    pub fn with_label(mut self, dim: Dimension, label: GenderLabel, origin: LabelOrigin) -> Self {
        self.labels[dim] = label;
        self.origin[dim] = origin;
        self
    }

    pub fn label(&self, dim: Dimension) -> GenderLabel {
        self.labels[dim]
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct OriginRecord {
    #[serde(default)]
    about: LabelOrigin,
    #[serde(default)]
    to: LabelOrigin,
    #[serde(default, rename = "as")]
    as_: LabelOrigin,
}

/// One line of the canonical corpus format.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct CanonicalRecord {
    text: String,
    #[serde(default = "unknown")]
    about: GenderLabel,
    #[serde(default = "unknown")]
    to: GenderLabel,
    #[serde(default = "unknown", rename = "as")]
    as_: GenderLabel,
    #[serde(default)]
    origin: OriginRecord,
    #[serde(default)]
    source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    group: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    confidence: Option<Confidence>,
}

fn unknown() -> GenderLabel {
    GenderLabel::Unknown
}

impl From<&Example> for CanonicalRecord {
    fn from(e: &Example) -> Self {
        CanonicalRecord {
            text: e.text.clone(),
            about: e.labels[Dimension::About],
            to: e.labels[Dimension::To],
            as_: e.labels[Dimension::As],
            origin: OriginRecord {
                about: e.origin[Dimension::About],
                to: e.origin[Dimension::To],
                as_: e.origin[Dimension::As],
            },
            source: Some(e.source.clone()),
            id: Some(e.id.clone()),
            group: e.group.clone(),
            confidence: e.confidence,
        }
    }
}

fn malformed(source: &str, line: usize, message: impl std::fmt::Display) -> Error {
    Error::MalformedRecord {
        source_name: source.to_string(),
        line,
        message: message.to_string(),
    }
}

/// Reads a canonical corpus. Missing labels default to unknown, missing ids
/// to `<source>:<line>`, missing sources to `source_name`.
pub fn read_corpus<R: BufRead>(reader: R, source_name: &str) -> Result<Vec<Example>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| malformed(source_name, lineno, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: CanonicalRecord =
            serde_json::from_str(&line).map_err(|e| malformed(source_name, lineno, e))?;
        if rec.text.trim().is_empty() {
            return Err(malformed(source_name, lineno, "empty text"));
        }
        let source = rec.source.unwrap_or_else(|| source_name.to_string());
        let mut labels = DimMap::splat(GenderLabel::Unknown);
        labels[Dimension::About] = rec.about;
        labels[Dimension::To] = rec.to;
        labels[Dimension::As] = rec.as_;
        let mut origin = DimMap::splat(LabelOrigin::Rule);
        origin[Dimension::About] = rec.origin.about;
        origin[Dimension::To] = rec.origin.to;
        origin[Dimension::As] = rec.origin.as_;
        out.push(Example {
            id: rec.id.unwrap_or_else(|| format!("{source}:{lineno}")),
            text: rec.text,
            labels,
            origin,
            source,
            confidence: rec.confidence,
            group: rec.group,
        });
    }
    Ok(out)
}

pub fn load_corpus(path: &Path) -> Result<Vec<Example>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("corpus");
    read_corpus(BufReader::new(file), name)
}

pub fn write_corpus<W: Write>(examples: &[Example], mut writer: W) -> Result<()> {
    for e in examples {
        let line = serde_json::to_string(&CanonicalRecord::from(e))?;
        writeln!(writer, "{line}").map_err(|err| Error::io("<output>", err))?;
    }
    Ok(())
}

/// One record produced by a source's annotation rules.
#[derive(Debug, Clone, Default)]
pub struct SourceRecord {
    /// 1-based line in the source file, for error messages.
    pub line: usize,
    pub id: Option<String>,
    pub text: String,
    pub labels: BTreeMap<Dimension, GenderLabel>,
    pub group: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct AnnotatedSource {
    pub name: String,
    pub records: Vec<SourceRecord>,
}

/// Unifies annotated sources into examples. Dimensions a source has no
/// evidence for become unknown; every label carries origin `rule`.
pub fn assemble(sources: &[AnnotatedSource]) -> Result<Vec<Example>> {
    let mut out = Vec::new();
    for src in sources {
        for rec in &src.records {
            if rec.text.trim().is_empty() {
                return Err(malformed(&src.name, rec.line, "empty text"));
            }
            let id = rec
                .id
                .clone()
                .unwrap_or_else(|| format!("{}:{}", src.name, rec.line));
            let mut ex = Example::new(id, rec.text.clone(), src.name.clone());
            for (&dim, &label) in &rec.labels {
                ex.labels[dim] = label;
            }
            ex.group = rec.group.clone();
            out.push(ex);
        }
    }
    Ok(out)
}

/// Fills every unknown ABOUT label with the model's argmax. The model must
/// have been trained only on examples whose ABOUT label is known.
pub fn impute_about(examples: &[Example], model: &BiEncoderModel) -> Result<Vec<Example>> {
    if !model.supports(Dimension::About) {
        return Err(Error::UnsupportedDimension(Dimension::About));
    }
    examples
        .iter()
        .map(|e| {
            let mut e = e.clone();
            if e.labels[Dimension::About] == GenderLabel::Unknown {
                let (label, _) = model.predict(&e.text, Dimension::About)?;
                e.labels[Dimension::About] = label;
                e.origin[Dimension::About] = LabelOrigin::Imputed;
            }
            Ok(e)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochView {
    pub epoch: usize,
    pub seed: u64,
    pub examples: Vec<Example>,
}

/// Epoch-0 label for an unknown TO/AS dimension of `id`.
fn base_assignment(seed: u64, id: &str, dim: Dimension) -> GenderLabel {
    let key = format!("{}\u{1f}{id}", dim.key());
    if seeds::stable_hash(seeds::derive_seed(seed, seeds::FLIP), key.as_bytes()) & 1 == 0 {
        GenderLabel::Masculine
    } else {
        GenderLabel::Feminine
    }
}

/// Labels of `e` for one epoch: unknown (or previously flipped) TO/AS labels
/// take the epoch-0 assignment, flipped on odd epochs.
pub(crate) fn resolve_epoch(e: &Example, epoch: usize, seed: u64) -> Example {
    let mut e = e.clone();
    for dim in [Dimension::To, Dimension::As] {
        let unresolved =
            e.labels[dim] == GenderLabel::Unknown || e.origin[dim] == LabelOrigin::Flipped;
        if unresolved {
            let base = base_assignment(seed, &e.id, dim);
            e.labels[dim] = if epoch % 2 == 1 { base.flipped() } else { base };
            e.origin[dim] = LabelOrigin::Flipped;
        }
    }
    e
}

/// Resolves unknown TO/AS labels for one epoch. The epoch-0 label is a hash of
/// (seed, example id, dimension); odd epochs flip it, so across any 2k
/// consecutive epochs each such example is masculine exactly k times.
/// ABOUT unknowns are left untouched (they are imputed, not flipped).
pub fn epoch_view(examples: &[Example], epoch: usize, seed: u64) -> EpochView {
    EpochView {
        epoch,
        seed,
        examples: examples
            .iter()
            .map(|e| resolve_epoch(e, epoch, seed))
            .collect(),
    }
}

fn class_slot(label: GenderLabel) -> Option<usize> {
    match label {
        GenderLabel::Masculine => Some(0),
        GenderLabel::Feminine => Some(1),
        GenderLabel::Neutral => Some(2),
        GenderLabel::Unknown => None,
    }
}

/// Indices into `labels` after balancing: every original index in order,
/// then round-robin duplicates of each minority class (masculine first).
pub(crate) fn balance_indices(labels: &[GenderLabel]) -> Vec<usize> {
    let mut members: [Vec<usize>; 3] = Default::default();
    for (i, &l) in labels.iter().enumerate() {
        if let Some(slot) = class_slot(l) {
            members[slot].push(i);
        }
    }
    let target = members.iter().map(Vec::len).max().unwrap_or(0);
    let mut out: Vec<usize> = (0..labels.len()).collect();
    for class in members.iter().filter(|c| !c.is_empty()) {
        out.extend((0..target - class.len()).map(|k| class[k % class.len()]));
    }
    out
}

/// Duplicates minority-class examples round-robin until masculine, feminine
/// and neutral counts on `dim` all equal the largest count. Empty classes stay
/// empty; unknown-labeled examples are kept but not counted. Duplicates are
/// appended after the original examples, masculine first.
pub fn oversample_balance(view: &EpochView, dim: Dimension) -> EpochView {
    let labels: Vec<GenderLabel> = view.examples.iter().map(|e| e.labels[dim]).collect();
    EpochView {
        epoch: view.epoch,
        seed: view.seed,
        examples: balance_indices(&labels)
            .into_iter()
            .map(|i| view.examples[i].clone())
            .collect(),
    }
}

/// Per-class counts (masculine, feminine, neutral) on one dimension.
pub fn class_counts(examples: &[Example], dim: Dimension) -> [usize; 3] {
    let mut c = [0; 3];
    for e in examples {
        if let Some(slot) = class_slot(e.labels[dim]) {
            c[slot] += 1;
        }
    }
    c
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: Vec<Example>,
    pub valid: Vec<Example>,
    pub test: Vec<Example>,
}

/// Deterministic shuffled partition. Examples sharing a `group` land in the
/// same part; a group goes to the part in which its first example would fall.
pub fn split(examples: &[Example], fractions: (f64, f64, f64), seed: u64) -> Result<Split> {
    let (ft, fv, fs) = fractions;
    let positive = ft > 0.0 && fv > 0.0 && fs > 0.0;
    if !positive || ((ft + fv + fs) - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidFractions(fractions));
    }
    let n = examples.len();
    let n_train = ((ft * n as f64).round() as usize).min(n);
    let n_valid = ((fv * n as f64).round() as usize).min(n - n_train);

    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut by_key: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, e) in examples.iter().enumerate() {
        match &e.group {
            Some(key) => {
                let g = *by_key.entry(key.as_str()).or_insert_with(|| {
                    groups.push(Vec::new());
                    groups.len() - 1
                });
                groups[g].push(i);
            }
            None => groups.push(vec![i]),
        }
    }
    groups.shuffle(&mut seeds::rng(seed, seeds::SPLIT));

    let mut out = Split {
        train: Vec::new(),
        valid: Vec::new(),
        test: Vec::new(),
    };
    let mut offset = 0;
    for g in groups {
        let part = if offset < n_train {
            &mut out.train
        } else if offset < n_train + n_valid {
            &mut out.valid
        } else {
            &mut out.test
        };
        offset += g.len();
        part.extend(g.into_iter().map(|i| examples[i].clone()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MdGenderRecord {
    text: String,
    dim: Dimension,
    gender: GenderLabel,
    confidence: Confidence,
}

/// Reads MDGender rewrites: one gold-labeled dimension per record, masculine
/// or feminine only.
pub fn read_mdgender<R: BufRead>(reader: R, source_name: &str) -> Result<Vec<Example>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| malformed(source_name, lineno, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: MdGenderRecord =
            serde_json::from_str(&line).map_err(|e| malformed(source_name, lineno, e))?;
        if !matches!(rec.gender, GenderLabel::Masculine | GenderLabel::Feminine) {
            return Err(malformed(
                source_name,
                lineno,
                format!("gender must be masculine or feminine, got {}", rec.gender),
            ));
        }
        let mut ex = Example::new(format!("{source_name}:{lineno}"), rec.text, source_name)
            .with_label(rec.dim, rec.gender, LabelOrigin::Gold);
        ex.confidence = Some(rec.confidence);
        out.push(ex);
    }
    Ok(out)
}

pub fn load_mdgender(path: &Path) -> Result<Vec<Example>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_mdgender(BufReader::new(file), "mdgender")
}

/// Writes examples carrying exactly one known label in MDGender form.
pub fn write_mdgender<W: Write>(examples: &[Example], mut writer: W) -> Result<()> {
    for e in examples {
        let (dim, gender) = e
            .labels
            .iter()
            .find(|(_, l)| l.is_known())
            .map(|(d, l)| (d, *l))
            .ok_or_else(|| Error::Config(format!("example {} has no labeled dimension", e.id)))?;
        let rec = MdGenderRecord {
            text: e.text.clone(),
            dim,
            gender,
            confidence: e.confidence.unwrap_or(Confidence::Certain),
        };
        writeln!(writer, "{}", serde_json::to_string(&rec)?)
            .map_err(|err| Error::io("<output>", err))?;
    }
    Ok(())
}
