//! Treebank linearization toolkit: CoNLL-U handling, tree-to-label
//! encodings, PoS-noise injection calibrated on real tagger mistakes, and
//! attachment scoring.

pub mod conllu;
pub mod error;
pub mod labels;
pub mod linearize;
pub mod metrics;
pub mod noise;
pub mod seeding;
pub mod synth;
pub mod tagger;

pub use conllu::{parse_conllu, write_conllu, DepTree, Token, Treebank};
pub use error::{Error, Result};
pub use linearize::{EncodedSentence, Encoding, Labels, RepairStats};
pub use metrics::{attachment_scores, EvalResult};
pub use noise::{
    build_plan, corrupt, tagging_accuracy, CorruptOptions, CorruptionPlan, Eligibility,
    ErrorModel,
};
