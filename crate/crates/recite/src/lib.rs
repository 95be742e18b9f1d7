//! recite — a harness that measures how much of a document corpus a chat
//! model can reproduce when queried for it one sentence at a time.
//!
//! The library is organized around the stages of an extraction run:
//! [`corpus`] ingests and segments articles, [`prompts`] renders every
//! message sent to the model, [`modelclient`] talks to a provider (or the
//! built-in deterministic mock), [`textmatch`] and [`metrics`] turn raw
//! responses into scores, [`pipeline`] orchestrates the filtering rounds,
//! [`quotecheck`] runs the generate-from-summary control, and [`report`]
//! renders tables, distributions, and per-article highlights.

pub mod corpus;
pub mod error;
pub mod metrics;
pub mod modelclient;
pub mod pipeline;
pub mod prompts;
pub mod quotecheck;
pub mod report;
pub mod synth;
pub mod textmatch;

pub use error::{Error, Result};
