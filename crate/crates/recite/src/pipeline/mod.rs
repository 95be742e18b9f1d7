//! Orchestration of the extraction protocol: a full first sweep, a
//! prompt-variant second round on the articles that produced near-hits, a
//! multi-turn final round, the post-cutoff baseline, refusal exclusion, and
//! the strategy-overlap analysis.

mod rounds;
mod store;

pub use rounds::{
    baseline_sanity_warnings, overlap_analysis, OverlapReport, Pipeline, PipelineOptions,
    StrategyOverlap,
};
pub use store::{attempt_key, Exclusion, RunStore};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::AttemptMatch;
use crate::modelclient::GenerationParams;
use crate::prompts::PromptStrategy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Round {
    One,
    Two,
    Final,
    Baseline,
}

impl Round {
    pub fn slug(&self) -> &'static str {
        match self {
            Round::One => "round1",
            Round::Two => "round2",
            Round::Final => "final",
            Round::Baseline => "baseline",
        }
    }
}

impl std::fmt::Display for Round {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.slug())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SentenceWindow {
    FirstN(usize),
    All,
}

impl SentenceWindow {
    /// Target sentence indices for an article of `sentence_count`
    /// sentences. The first-N window targets successors of the first N
    /// sentences (indices 1..=N); the full window targets every index.
    pub fn targets(&self, sentence_count: usize) -> Vec<usize> {
        match self {
            SentenceWindow::FirstN(n) => (1..=*n).filter(|&i| i < sentence_count).collect(),
            SentenceWindow::All => (0..sentence_count).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoundConfig {
    pub round: Round,
    pub strategies: Vec<PromptStrategy>,
    pub sentence_window: SentenceWindow,
    pub samples_per_sentence: usize,
    pub params: GenerationParams,
}

impl RoundConfig {
    pub fn round_one() -> Self {
        RoundConfig {
            round: Round::One,
            strategies: vec![PromptStrategy::Simple],
            sentence_window: SentenceWindow::FirstN(10),
            samples_per_sentence: 3,
            params: GenerationParams::sweep(),
        }
    }

    pub fn round_two() -> Self {
        RoundConfig {
            round: Round::Two,
            strategies: PromptStrategy::ROUND_TWO.to_vec(),
            sentence_window: SentenceWindow::FirstN(10),
            samples_per_sentence: 1,
            params: GenerationParams::sweep(),
        }
    }

    pub fn final_round() -> Self {
        RoundConfig {
            round: Round::Final,
            strategies: vec![PromptStrategy::MultiTurn],
            sentence_window: SentenceWindow::All,
            samples_per_sentence: 1,
            params: GenerationParams::near_greedy(),
        }
    }

    pub fn baseline() -> Self {
        RoundConfig {
            round: Round::Baseline,
            ..Self::round_one()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::BadRoundConfig(msg.to_string()));
        match self.round {
            Round::One | Round::Baseline => {
                if self.sentence_window != SentenceWindow::FirstN(10) {
                    return bad("sweep rounds use the first-10 sentence window");
                }
                if self.samples_per_sentence != 3 {
                    return bad("sweep rounds take 3 samples per sentence");
                }
                if self.params.temperature != 0.0 || self.params.top_p != 0.9 {
                    return bad("sweep rounds run at temperature 0, top_p 0.9");
                }
            }
            Round::Two => {
                if self.samples_per_sentence != 1 {
                    return bad("round two runs a single iteration");
                }
                if self.strategies != PromptStrategy::ROUND_TWO {
                    return bad("round two runs SIMPLE, ICL, ICL-v2, ICL-v3");
                }
            }
            Round::Final => {
                if self.strategies != [PromptStrategy::MultiTurn] {
                    return bad("the final round uses multi-turn prompting");
                }
                if self.sentence_window != SentenceWindow::All {
                    return bad("the final round covers all sentences");
                }
                if self.params.temperature != 1e-6 {
                    return bad("the final round runs at temperature 1e-6");
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttemptKind {
    Identify,
    FollowUp,
}

/// One model query for one target under one strategy, as persisted in the
/// append-only attempt log.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub article_id: String,
    pub kind: AttemptKind,
    pub sentence_index: Option<usize>,
    pub strategy: PromptStrategy,
    pub round: Round,
    pub sample_number: usize,
    pub transcript_digest: String,
    pub raw_response: String,
    pub extracted_answer: String,
    #[serde(rename = "match")]
    pub match_outcome: Option<AttemptMatch>,
    pub refusal: bool,
    pub identified: Option<bool>,
    pub error: Option<String>,
    pub timestamp: String,
}
