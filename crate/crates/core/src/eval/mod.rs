//! Long-form evaluation: hypothesis resegmentation, corpus BLEU, lagging
//! metrics and boundary matching.

mod bleu;
mod boundary;
mod latency;
mod longform;
mod mwer;

pub use bleu::{corpus_bleu, tokenize, BleuScore, Tokenizer};
pub use boundary::{boundary_prf, Prf};
pub use latency::{average_lagging, laal};
pub use longform::{
    evaluate_stream, split_words, timed_words, CorpusEval, RefSegment, StreamEval, TimedWord,
};
pub use mwer::{edit_distance, mwer_resegment, Resegmentation};
