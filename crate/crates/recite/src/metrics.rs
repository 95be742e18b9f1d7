//! Scoring: from raw model responses to per-attempt outcomes, per-article
//! scorecards, and per-round aggregates.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::SentenceRecord;
use crate::error::{Error, Result};
use crate::pipeline::Round;
use crate::prompts::PromptStrategy;
use crate::textmatch::{bitap_search, common_runs, is_word_token, k_for, tokenize};

/// Outcomes of one model response against one target sentence.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttemptMatch {
    /// The answer reproduces the target sentence exactly (token-level).
    pub exact_positional: bool,
    /// Errors of the best match of the target inside the answer, if within
    /// the K budget.
    pub bitap_positional: Option<usize>,
    /// Best-matching qualified sentence at or after the target:
    /// `(sentence_index, errors)`.
    pub bitap_nonpositional: Option<(usize, usize)>,
    /// Word tokens covered by common runs between answer and article window.
    pub trm_tokens: usize,
}

/// Per-article scores for one strategy in one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArticleScorecard {
    pub article_id: String,
    pub strategy: PromptStrategy,
    pub round: Round,
    pub emp_score: f64,
    pub bitap_pos_score: f64,
    pub bitap_nonpos_score: f64,
    pub trm_score: f64,
    pub bitap_pos_noquote_score: f64,
    /// Number of attempted qualified targets (the score denominator).
    pub qualified_count: usize,
    /// Set when the article is excluded from aggregates because the model
    /// refused under this strategy.
    pub excluded_refusal: bool,
}

impl ArticleScorecard {
    pub fn metric(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Trm => self.trm_score,
            Metric::Emp => self.emp_score,
            Metric::BitapPositional => self.bitap_pos_score,
            Metric::BitapNonPositional => self.bitap_nonpos_score,
            Metric::BitapPositionalNoQuotes => self.bitap_pos_noquote_score,
        }
    }
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum,
)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Trm,
    Emp,
    BitapPositional,
    BitapNonPositional,
    BitapPositionalNoQuotes,
}

impl Metric {
    /// The four headline metrics in table order.
    pub const TABLE: [Metric; 4] = [
        Metric::Trm,
        Metric::Emp,
        Metric::BitapPositional,
        Metric::BitapNonPositional,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Metric::Trm => "TRM",
            Metric::Emp => "EMP",
            Metric::BitapPositional => "BITAP (positional)",
            Metric::BitapNonPositional => "BITAP (non-positional)",
            Metric::BitapPositionalNoQuotes => "BITAP (positional, no quotes)",
        }
    }
}

/// Non-zero count, percentage, and mean of one metric over the articles of
/// a round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub non_zero_count: usize,
    pub non_zero_percent: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundSummary {
    pub model: String,
    pub strategy: PromptStrategy,
    pub round: Round,
    pub article_count: usize,
    pub metrics: BTreeMap<Metric, MetricSummary>,
}

/// Pull the answer text out of a raw model response.
///
/// Prefers the body between the first pair of triple-quote fences (``` or
/// \"\"\"). A lone fence yields everything after it. With no fence at all,
/// known lead-in lines and surrounding quotation marks are stripped.
pub fn extract_answer(raw_response: &str) -> String {
    let backtick = raw_response.find("```");
    let triple_quote = raw_response.find("\"\"\"");
    let fence = match (backtick, triple_quote) {
        (Some(b), Some(q)) => Some(if b <= q { ("```", b) } else { ("\"\"\"", q) }),
        (Some(b), None) => Some(("```", b)),
        (None, Some(q)) => Some(("\"\"\"", q)),
        (None, None) => None,
    };
    if let Some((marker, open)) = fence {
        let body_start = open + marker.len();
        let rest = &raw_response[body_start..];
        let body = match rest.find(marker) {
            Some(close) => &rest[..close],
            None => rest,
        };
        return body.trim().to_string();
    }
    strip_lead_in(raw_response)
}

fn strip_lead_in(text: &str) -> String {
    let mut remainder = text.trim();
    // Lead-ins end with a colon: "Sure! Here is the sentence ...:" or
    // "The third sentence of the article ... is:".
    if let Some(colon) = remainder.find(':') {
        let head = remainder[..colon].to_lowercase();
        let looks_like_lead_in = head.contains("here is the sentence")
            || head.contains("here's the sentence")
            || (head.contains("sentence") && head.contains(" is"))
            || (head.starts_with("the ") && head.contains("article"));
        if looks_like_lead_in {
            remainder = remainder[colon + 1..].trim();
        }
    }
    let mut s = remainder.to_string();
    // Surrounding quotation marks, straight or curly.
    loop {
        let t = s.trim();
        let stripped = t
            .strip_prefix('"')
            .and_then(|x| x.strip_suffix('"'))
            .or_else(|| {
                t.strip_prefix('\u{201C}')
                    .and_then(|x| x.strip_suffix('\u{201D}'))
            });
        match stripped {
            Some(inner) if !inner.is_empty() => s = inner.to_string(),
            _ => break,
        }
    }
    s.trim().to_string()
}

/// Score one extracted answer against its target sentence.
///
/// `subsequent_qualified` holds the qualified sentences of the article with
/// index >= the target's, in order (the target itself first); it is both the
/// non-positional search window and the source window for token runs.
pub fn score_attempt(
    answer: &str,
    target: &SentenceRecord,
    subsequent_qualified: &[&SentenceRecord],
    p: f64,
    min_run: usize,
) -> Result<AttemptMatch> {
    if !target.qualified {
        return Err(Error::UnqualifiedTarget {
            article_id: target.article_id.clone(),
            index: target.index,
        });
    }
    debug_assert!(
        subsequent_qualified.first().map(|s| s.index) == Some(target.index),
        "window must start at the target sentence"
    );
    let answer_tokens = tokenize(answer);

    let exact_positional = !answer_tokens.is_empty() && answer_tokens == target.tokens;

    let k = k_for(p, target.tokens.len())?;
    let bitap_positional = bitap_search(&target.tokens, &answer_tokens, k)?.map(|m| m.errors);

    let mut bitap_nonpositional: Option<(usize, usize)> = None;
    for sentence in subsequent_qualified {
        let k = k_for(p, sentence.tokens.len())?;
        if let Some(m) = bitap_search(&sentence.tokens, &answer_tokens, k)? {
            let candidate = (sentence.index, m.errors);
            let better = match bitap_nonpositional {
                None => true,
                Some((best_idx, best_err)) => {
                    m.errors < best_err || (m.errors == best_err && sentence.index < best_idx)
                }
            };
            if better {
                bitap_nonpositional = Some(candidate);
            }
        }
    }

    let window_tokens: Vec<String> = subsequent_qualified
        .iter()
        .flat_map(|s| s.tokens.iter().cloned())
        .collect();
    let runs = common_runs(&answer_tokens, &window_tokens, min_run);
    let trm_tokens = runs
        .iter()
        .map(|r| {
            r.gen_span()
                .filter(|&i| is_word_token(&answer_tokens[i]))
                .count()
        })
        .sum();

    Ok(AttemptMatch {
        exact_positional,
        bitap_positional,
        bitap_nonpositional,
        trm_tokens,
    })
}

/// Collapse several samples of the same target into one outcome: a target
/// counts as matched under a metric if any sample matched.
pub fn collapse_samples(samples: &[AttemptMatch]) -> AttemptMatch {
    let mut out = AttemptMatch {
        exact_positional: samples.iter().any(|m| m.exact_positional),
        bitap_positional: samples.iter().filter_map(|m| m.bitap_positional).min(),
        bitap_nonpositional: None,
        trm_tokens: samples.iter().map(|m| m.trm_tokens).max().unwrap_or(0),
    };
    for m in samples {
        if let Some((idx, err)) = m.bitap_nonpositional {
            let better = match out.bitap_nonpositional {
                None => true,
                Some((bi, be)) => err < be || (err == be && idx < bi),
            };
            if better {
                out.bitap_nonpositional = Some((idx, err));
            }
        }
    }
    out
}

/// Aggregate collapsed attempts into a per-article scorecard.
///
/// `attempts[i]` is the collapsed outcome for `attempted_targets[i]`, which
/// indexes into `article`. With `exclude_quotes`, quote-dominated targets
/// leave both numerator and denominator of the no-quotes positional ratio.
pub fn score_article(
    attempts: &[AttemptMatch],
    article: &[SentenceRecord],
    attempted_targets: &[usize],
    exclude_quotes: bool,
) -> ArticleScorecard {
    assert_eq!(
        attempts.len(),
        attempted_targets.len(),
        "one collapsed attempt per attempted target"
    );
    let article_id = article
        .first()
        .map(|s| s.article_id.clone())
        .unwrap_or_default();
    let total = attempted_targets.len();
    if total == 0 {
        log::warn!("article {article_id:?}: no attempted qualified targets; all scores zero");
        return ArticleScorecard {
            article_id,
            strategy: PromptStrategy::Simple,
            round: Round::One,
            emp_score: 0.0,
            bitap_pos_score: 0.0,
            bitap_nonpos_score: 0.0,
            trm_score: 0.0,
            bitap_pos_noquote_score: 0.0,
            qualified_count: 0,
            excluded_refusal: false,
        };
    }

    let exact = attempts.iter().filter(|m| m.exact_positional).count();
    let pos = attempts
        .iter()
        .filter(|m| m.bitap_positional.is_some())
        .count();
    let nonpos = attempts
        .iter()
        .filter(|m| m.bitap_nonpositional.is_some())
        .count();

    let denom = total as f64;
    let trm_tokens: usize = attempts.iter().map(|m| m.trm_tokens).sum();
    let trm_words: usize = attempted_targets
        .iter()
        .map(|&i| article[i].word_count)
        .sum();
    let trm_score = if trm_words == 0 {
        0.0
    } else {
        (trm_tokens as f64 / trm_words as f64).min(1.0)
    };

    let bitap_pos_noquote_score = if exclude_quotes {
        let mut kept = 0usize;
        let mut matched = 0usize;
        for (m, &idx) in attempts.iter().zip(attempted_targets) {
            if article[idx].is_quote_sentence() {
                continue;
            }
            kept += 1;
            if m.bitap_positional.is_some() {
                matched += 1;
            }
        }
        if kept == 0 {
            0.0
        } else {
            matched as f64 / kept as f64
        }
    } else {
        pos as f64 / denom
    };

    ArticleScorecard {
        article_id,
        strategy: PromptStrategy::Simple,
        round: Round::One,
        emp_score: exact as f64 / denom,
        bitap_pos_score: pos as f64 / denom,
        bitap_nonpos_score: nonpos as f64 / denom,
        trm_score,
        bitap_pos_noquote_score,
        qualified_count: total,
        excluded_refusal: false,
    }
}

/// Summarize one (model, strategy, round) slice of scorecards. Inputs must
/// already have refusal-excluded articles removed.
pub fn summarize_round(
    model: &str,
    strategy: PromptStrategy,
    round: Round,
    scorecards: &[ArticleScorecard],
) -> Result<RoundSummary> {
    if scorecards.is_empty() {
        return Err(Error::EmptyRound);
    }
    let n = scorecards.len();
    let mut metrics = BTreeMap::new();
    for metric in [
        Metric::Trm,
        Metric::Emp,
        Metric::BitapPositional,
        Metric::BitapNonPositional,
        Metric::BitapPositionalNoQuotes,
    ] {
        let values: Vec<f64> = scorecards.iter().map(|c| c.metric(metric)).collect();
        let non_zero_count = values.iter().filter(|&&v| v > 0.0).count();
        let mean = values.iter().sum::<f64>() / n as f64;
        metrics.insert(
            metric,
            MetricSummary {
                non_zero_count,
                non_zero_percent: non_zero_count as f64 / n as f64,
                mean,
            },
        );
    }
    Ok(RoundSummary {
        model: model.to_string(),
        strategy,
        round,
        article_count: n,
        metrics,
    })
}

/// Ids of articles whose metric strictly exceeds the threshold.
pub fn threshold_filter(
    scorecards: &[ArticleScorecard],
    metric: Metric,
    threshold: f64,
) -> Vec<String> {
    scorecards
        .iter()
        .filter(|c| c.metric(metric) > threshold)
        .map(|c| c.article_id.clone())
        .collect()
}
