//! Score-and-rank bi-encoder classifier over the about/to/as dimensions.
//!
//! Text is encoded as the mean of learned embeddings of its hashed unigrams
//! and bigrams; every class has its own embedding, and a class's score is the
//! dot product of the two. Predictions are a softmax over the in-dimension
//! class scores.

mod eval;
mod io;
mod model;
mod train;

pub use eval::{
    evaluate, evaluate_cross_dimension, evaluate_with, report_from_judgements, DimReport,
    EvalOptions, EvalReport, Judgement,
};
pub use io::{FORMAT_VERSION, MAGIC};
pub use model::{softmax, BiEncoderModel, Features, Gradients, TrainConfig};
pub use train::{ablation_masked_train, train, EpochLog, TrainOutcome};
