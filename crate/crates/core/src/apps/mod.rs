//! Downstream uses of a trained classifier: document genderedness auditing,
//! control-token corpora with a small controllable generator, and
//! safe-vs-offensive comparisons.

mod control;
mod genderedness;
mod lm;
mod offensive;

pub use control::{
    build_control_corpus, build_control_corpus_wordlist, generation_stats, generation_stats_table,
    parse_line, render_line, ControlToken, GenControl, GenStats,
};
pub use genderedness::{
    document_genderedness, median, rank, ranking_tsv, score_paragraphs, summarize, Document,
    GenderednessRanking, GenderednessScore, ScoreSummary, DEFAULT_MIN_PARAGRAPHS,
};
pub use lm::{
    completes_repeat, generate, generate_ids, train_controlled_lm, train_controlled_lm_smoothed,
    ControlLM, GenerateConfig, END_TOKEN,
};
pub use offensive::{
    gendered_word_analysis, offensive_analysis, offensive_report_from_labels, offensive_table,
    GenderedWords, OffensiveDimReport, OffensiveReport, WordAnalysisOptions,
};
