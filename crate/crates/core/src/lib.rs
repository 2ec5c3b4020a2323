//! Building blocks for turning raw Chinese social-media text into masked
//! language model pretraining data with lexicon-guided whole-word masking.
//!
//! The pipeline runs [`clean`] → [`segment`] → [`chunker`] → [`masker`];
//! [`lexicon`] supplies and expands the domain word list that steers
//! masking, and [`metrics`] holds the downstream evaluation toolkit.

pub mod chunker;
pub mod clean;
pub mod error;
pub mod lexicon;
pub mod masker;
pub mod metrics;
pub mod segment;

pub use error::{Error, Result};
