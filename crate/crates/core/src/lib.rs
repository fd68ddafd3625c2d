//! Weighted deep bibliographic coupling over citation graphs, and the
//! pipeline that turns a thematic sample of papers into a local map of
//! science: sample, similarity, distance inversion, t-SNE embedding,
//! Mean-Shift clustering and keyword extraction.

pub mod coupling;
pub mod error;
pub mod graph;
pub mod keywords;
pub mod mapping;
pub mod matrix;
pub mod par;
pub mod pipeline;
pub mod plot;
pub mod rwr;
pub mod sampling;
pub mod synth;

pub use error::{Error, Result};
pub use graph::{CitationGraph, Corpus, Direction, NodeIx, PaperId, PaperMeta, PaperRecord};
pub use par::Exec;
