//! The label vocabulary shared by every stage: the three conversational
//! dimensions, the four-valued gender label, and classifier class ids.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The conversational role a gender label attaches to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dimension {
    /// Topic of the text (who is being spoken about).
    About,
    /// Addressee of the text.
    To,
    /// Author / speaker of the text.
    As,
}

impl Dimension {
    pub const ALL: [Dimension; 3] = [Dimension::About, Dimension::To, Dimension::As];

    pub fn index(self) -> usize {
        match self {
            Dimension::About => 0,
            Dimension::To => 1,
            Dimension::As => 2,
        }
    }

    /// Lowercase key used in JSON records.
    pub fn key(self) -> &'static str {
        match self {
            Dimension::About => "about",
            Dimension::To => "to",
            Dimension::As => "as",
        }
    }

    /// Uppercase form used in control tokens and report headers.
    pub fn upper(self) -> &'static str {
        match self {
            Dimension::About => "ABOUT",
            Dimension::To => "TO",
            Dimension::As => "AS",
        }
    }

    /// Classes the classifier ranks for this dimension. TO and AS have no
    /// neutral training data, so only ABOUT carries a neutral class.
    pub fn candidate_labels(self) -> &'static [GenderLabel] {
        match self {
            Dimension::About => &[
                GenderLabel::Masculine,
                GenderLabel::Feminine,
                GenderLabel::Neutral,
            ],
            Dimension::To | Dimension::As => &[GenderLabel::Masculine, GenderLabel::Feminine],
        }
    }

    pub fn candidates(self) -> Vec<ClassId> {
        self.candidate_labels()
            .iter()
            .map(|&label| ClassId {
                dimension: self,
                label,
            })
            .collect()
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.upper())
    }
}

impl FromStr for Dimension {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "about" => Ok(Dimension::About),
            "to" => Ok(Dimension::To),
            "as" => Ok(Dimension::As),
            other => Err(format!(
                "unknown dimension `{other}` (expected about, to or as)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenderLabel {
    Masculine,
    Feminine,
    Neutral,
    /// Gender exists but cannot be inferred from the text. Never a prediction target.
    Unknown,
}

impl GenderLabel {
    pub const ALL: [GenderLabel; 4] = [
        GenderLabel::Masculine,
        GenderLabel::Feminine,
        GenderLabel::Neutral,
        GenderLabel::Unknown,
    ];

    /// The three labels a classifier can be evaluated on.
    pub const CLASSES: [GenderLabel; 3] = [
        GenderLabel::Masculine,
        GenderLabel::Feminine,
        GenderLabel::Neutral,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GenderLabel::Masculine => "masculine",
            GenderLabel::Feminine => "feminine",
            GenderLabel::Neutral => "neutral",
            GenderLabel::Unknown => "unknown",
        }
    }

    pub fn is_known(self) -> bool {
        self != GenderLabel::Unknown
    }

    /// masculine <-> feminine; other labels unchanged.
    pub fn flipped(self) -> Self {
        match self {
            GenderLabel::Masculine => GenderLabel::Feminine,
            GenderLabel::Feminine => GenderLabel::Masculine,
            other => other,
        }
    }
}

impl fmt::Display for GenderLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GenderLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "masculine" => Ok(GenderLabel::Masculine),
            "feminine" => Ok(GenderLabel::Feminine),
            "neutral" => Ok(GenderLabel::Neutral),
            "unknown" => Ok(GenderLabel::Unknown),
            other => Err(format!("unknown gender label `{other}`")),
        }
    }
}

/// One rankable class: a dimension paired with a non-unknown label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClassId {
    pub dimension: Dimension,
    pub label: GenderLabel,
}

impl ClassId {
    /// All nine dimension/label pairs, in canonical order.
    pub fn all() -> Vec<ClassId> {
        Dimension::ALL
            .iter()
            .flat_map(|&dimension| {
                GenderLabel::CLASSES
                    .iter()
                    .map(move |&label| ClassId { dimension, label })
            })
            .collect()
    }

    /// Position in the canonical nine-class order.
    pub fn index(self) -> usize {
        let label = match self.label {
            GenderLabel::Masculine => 0,
            GenderLabel::Feminine => 1,
            GenderLabel::Neutral => 2,
            GenderLabel::Unknown => unreachable!("unknown is not a class"),
        };
        self.dimension.index() * 3 + label
    }

    pub fn from_index(index: usize) -> Option<ClassId> {
        ClassId::all().get(index).copied()
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.dimension.upper(), self.label)
    }
}

impl FromStr for ClassId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (dim, label) = s
            .split_once(':')
            .ok_or_else(|| format!("expected DIM:label, got `{s}`"))?;
        let dimension: Dimension = dim.parse()?;
        let label: GenderLabel = label.parse()?;
        if label == GenderLabel::Unknown {
            return Err("unknown is not a class".to_string());
        }
        Ok(ClassId { dimension, label })
    }
}

/// A value per dimension, indexable by [`Dimension`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct DimMap<T>(pub [T; 3]);

impl<T: Copy> DimMap<T> {
    pub fn splat(value: T) -> Self {
        DimMap([value; 3])
    }
}

impl<T> DimMap<T> {
    pub fn iter(&self) -> impl Iterator<Item = (Dimension, &T)> {
        Dimension::ALL.iter().map(move |&d| (d, &self.0[d.index()]))
    }
}

impl<T> std::ops::Index<Dimension> for DimMap<T> {
    type Output = T;
    fn index(&self, dim: Dimension) -> &T {
        &self.0[dim.index()]
    }
}

impl<T> std::ops::IndexMut<Dimension> for DimMap<T> {
    fn index_mut(&mut self, dim: Dimension) -> &mut T {
        &mut self.0[dim.index()]
    }
}
