//! # rasum
//!
//! Reader-aware multi-document summarization. A topic (a set of news
//! documents plus reader comments) goes through four stages:
//!
//! 1. [`corpus`] loads the XML topic directory, tokenizes it, builds a
//!    vocabulary of unigrams, bigrams and named-entity terms, and produces
//!    binary bag-of-words matrices for news and comment sentences.
//! 2. [`vae`] and [`salience`] train a variational auto-encoder jointly with
//!    a set of latent aspect vectors that reconstruct every sentence in the
//!    latent, hidden and term spaces. Comment sentences enter every term
//!    through a per-sentence gate computed by [`weights`]. The norm of each
//!    row of the news reconstruction matrix is that sentence's salience.
//! 3. [`phrase`] extracts noun and verb phrases and scores them; [`ilp`]
//!    picks a non-redundant subset under a word budget and renders it.
//! 4. [`rouge`] scores the result against reference summaries.
//!
//! [`pipeline`] wires these together; [`config::RunConfig`] holds the knobs.

pub mod checkpoint;
pub mod config;
pub mod corpus;
pub mod error;
pub mod ilp;
pub mod linalg;
pub mod phrase;
pub mod pipeline;
pub mod rouge;
pub mod salience;
pub mod stem;
pub mod vae;
pub mod weights;

pub use config::RunConfig;
pub use error::{Error, Result};
