//! Gender annotation, classification and auditing along three conversational
//! dimensions: who the text is ABOUT, who it is spoken TO, and who it is
//! spoken AS.
//!
//! * [`textkit`]: tokenization, lexicons, gendered-word counts, masking,
//!   over-representation statistics
//! * [`annotate`]: rule-based labelers for building weakly supervised corpora
//! * [`dataset`]: examples, unknown-label handling, splits, file formats
//! * [`classifier`]: the bi-encoder ranking classifier and its evaluation
//! * [`apps`]: document genderedness, controlled generation, offensive-content analysis
//! * [`cli`]: the `gdim` command line

pub mod annotate;
pub mod apps;
pub mod classifier;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod labels;
pub mod seeds;
pub mod stats;
pub mod textkit;

pub use error::{Error, Result};
pub use labels::{ClassId, DimMap, Dimension, GenderLabel};
