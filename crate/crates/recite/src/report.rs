//! Presentation artifacts: round summary tables, score distributions with
//! the 20% threshold, per-article highlight views, and the overlap report.
//! Every number here is recomputable from persisted scorecards.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{Article, SentenceRecord};
use crate::error::{Error, Result};
use crate::metrics::{collapse_samples, ArticleScorecard, AttemptMatch, Metric, RoundSummary};
use crate::pipeline::{AttemptKind, AttemptRecord, Round};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableCell {
    pub non_zero_count: usize,
    pub non_zero_percent: f64,
    pub mean: f64,
}

impl TableCell {
    /// "2 (50.00%)"
    pub fn non_zero_text(&self) -> String {
        format!(
            "{} ({:.2}%)",
            self.non_zero_count,
            self.non_zero_percent * 100.0
        )
    }

    /// "25.0000%"
    pub fn mean_text(&self) -> String {
        format!("{:.4}%", self.mean * 100.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub label: String,
    pub article_count: usize,
    pub cells: BTreeMap<Metric, TableCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTable {
    pub round: Round,
    pub rows: Vec<TableRow>,
}

/// Lay out round summaries as a table: one row per model (per strategy in
/// the prompt-variant round), non-zero and mean columns per metric.
pub fn emit_round_table(summaries: &[RoundSummary], layout: Round) -> Result<RoundTable> {
    if summaries.is_empty() {
        return Err(Error::EmptyRound);
    }
    let rows = summaries
        .iter()
        .map(|s| {
            let label = match layout {
                Round::Two => s.strategy.label().to_string(),
                _ => s.model.clone(),
            };
            let cells = Metric::TABLE
                .iter()
                .filter_map(|m| {
                    s.metrics.get(m).map(|v| {
                        (
                            *m,
                            TableCell {
                                non_zero_count: v.non_zero_count,
                                non_zero_percent: v.non_zero_percent,
                                mean: v.mean,
                            },
                        )
                    })
                })
                .collect();
            TableRow {
                label,
                article_count: s.article_count,
                cells,
            }
        })
        .collect();
    Ok(RoundTable {
        round: layout,
        rows,
    })
}

impl RoundTable {
    pub fn to_text(&self) -> String {
        let mut columns = vec![format!("{} articles", self.round.slug())];
        for m in Metric::TABLE {
            columns.push(format!("{} Non-Zero", m.label()));
            columns.push(format!("{} Mean", m.label()));
        }
        let mut grid: Vec<Vec<String>> = vec![columns];
        for row in &self.rows {
            let mut line = vec![format!("{} ({})", row.label, row.article_count)];
            for m in Metric::TABLE {
                match row.cells.get(&m) {
                    Some(cell) => {
                        line.push(cell.non_zero_text());
                        line.push(cell.mean_text());
                    }
                    None => {
                        line.push("-".into());
                        line.push("-".into());
                    }
                }
            }
            grid.push(line);
        }
        render_grid(&grid)
    }

    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("label,article_count,metric,non_zero_count,non_zero_percent,mean\n");
        for row in &self.rows {
            for m in Metric::TABLE {
                if let Some(cell) = row.cells.get(&m) {
                    out.push_str(&format!(
                        "{},{},{},{},{:.6},{:.6}\n",
                        row.label,
                        row.article_count,
                        m.label(),
                        cell.non_zero_count,
                        cell.non_zero_percent,
                        cell.mean
                    ));
                }
            }
        }
        out
    }
}

fn render_grid(grid: &[Vec<String>]) -> String {
    let cols = grid.iter().map(Vec::len).max().unwrap_or(0);
    let mut widths = vec![0usize; cols];
    for row in grid {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    for (r, row) in grid.iter().enumerate() {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(i, cell)| format!("{:width$}", cell, width = widths[i]))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
        if r == 0 {
            out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (cols - 1)));
            out.push('\n');
        }
    }
    out
}

pub const DISTRIBUTION_BIN_WIDTH: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub metric: Metric,
    pub threshold: f64,
    pub bins: Vec<DistributionBin>,
    pub above_threshold_ids: Vec<String>,
}

/// Histogram of a metric over scorecards, with the articles strictly above
/// the threshold called out.
pub fn emit_distribution(
    scorecards: &[ArticleScorecard],
    metric: Metric,
    threshold: f64,
) -> Distribution {
    let bin_count = (1.0 / DISTRIBUTION_BIN_WIDTH).round() as usize;
    let mut bins: Vec<DistributionBin> = (0..bin_count)
        .map(|i| DistributionBin {
            lo: i as f64 * DISTRIBUTION_BIN_WIDTH,
            hi: (i + 1) as f64 * DISTRIBUTION_BIN_WIDTH,
            count: 0,
        })
        .collect();
    for card in scorecards {
        let v = card.metric(metric).clamp(0.0, 1.0);
        let idx = ((v / DISTRIBUTION_BIN_WIDTH) as usize).min(bin_count - 1);
        bins[idx].count += 1;
    }
    let mut above: Vec<String> = scorecards
        .iter()
        .filter(|c| c.metric(metric) > threshold)
        .map(|c| c.article_id.clone())
        .collect();
    above.sort();
    Distribution {
        metric,
        threshold,
        bins,
        above_threshold_ids: above,
    }
}

/// Articles violating the expected ordering: an exact-match score above the
/// threshold whose positional score is not. Empty by the metric ordering
/// invariant.
pub fn threshold_ordering_violations(
    scorecards: &[ArticleScorecard],
    threshold: f64,
) -> Vec<String> {
    scorecards
        .iter()
        .filter(|c| c.emp_score > threshold && c.bitap_pos_score <= threshold)
        .map(|c| c.article_id.clone())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SentenceMark {
    Exact,
    Near,
    Elsewhere,
    Miss,
    Unqualified,
    Unattempted,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SentenceHighlight {
    pub index: usize,
    pub mark: SentenceMark,
    pub errors: Option<usize>,
    pub text: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttemptTrailEntry {
    pub sentence_index: usize,
    pub sample_number: usize,
    pub refusal: bool,
    pub exact: bool,
    pub bitap_errors: Option<usize>,
    pub answer: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HighlightReport {
    pub article_id: String,
    pub title: String,
    pub sentences: Vec<SentenceHighlight>,
    pub trail: Vec<AttemptTrailEntry>,
}

/// Annotate an article with per-sentence match marks and the raw attempt
/// trail behind them.
pub fn emit_article_highlight(
    article: &Article,
    sentences: &[SentenceRecord],
    attempts: &[&AttemptRecord],
) -> HighlightReport {
    let mut by_sentence: BTreeMap<usize, Vec<AttemptMatch>> = BTreeMap::new();
    let mut trail = Vec::new();
    for attempt in attempts {
        if attempt.kind != AttemptKind::FollowUp {
            continue;
        }
        let Some(index) = attempt.sentence_index else {
            continue;
        };
        if let Some(m) = &attempt.match_outcome {
            by_sentence.entry(index).or_default().push(m.clone());
        }
        trail.push(AttemptTrailEntry {
            sentence_index: index,
            sample_number: attempt.sample_number,
            refusal: attempt.refusal,
            exact: attempt
                .match_outcome
                .as_ref()
                .is_some_and(|m| m.exact_positional),
            bitap_errors: attempt
                .match_outcome
                .as_ref()
                .and_then(|m| m.bitap_positional),
            answer: attempt.extracted_answer.clone(),
        });
    }
    let highlights = sentences
        .iter()
        .map(|s| {
            let (mark, errors) = if !s.qualified {
                (SentenceMark::Unqualified, None)
            } else {
                match by_sentence.get(&s.index).map(|v| collapse_samples(v)) {
                    None => (SentenceMark::Unattempted, None),
                    Some(m) if m.exact_positional => (SentenceMark::Exact, Some(0)),
                    Some(m) => match m.bitap_positional {
                        Some(e) => (SentenceMark::Near, Some(e)),
                        None if m.bitap_nonpositional.is_some() => (
                            SentenceMark::Elsewhere,
                            m.bitap_nonpositional.map(|(_, e)| e),
                        ),
                        None => (SentenceMark::Miss, None),
                    },
                }
            };
            SentenceHighlight {
                index: s.index,
                mark,
                errors,
                text: s.raw_text.clone(),
            }
        })
        .collect();
    HighlightReport {
        article_id: article.id.clone(),
        title: article.title.clone(),
        sentences: highlights,
        trail,
    }
}

impl HighlightReport {
    pub fn to_text(&self) -> String {
        let mut out = format!("# {} ({})\n\n", self.title, self.article_id);
        for s in &self.sentences {
            let tag = match s.mark {
                SentenceMark::Exact => "[EXACT]".to_string(),
                SentenceMark::Near => format!("[NEAR {}]", s.errors.unwrap_or(0)),
                SentenceMark::Elsewhere => "[ELSEWHERE]".to_string(),
                SentenceMark::Miss => "[MISS]".to_string(),
                SentenceMark::Unqualified => "[  -  ]".to_string(),
                SentenceMark::Unattempted => "[  ?  ]".to_string(),
            };
            out.push_str(&format!("{tag} {}\n", s.text));
        }
        out.push_str("\nAttempt trail:\n");
        for t in &self.trail {
            out.push_str(&format!(
                "  s{} sample {}: {}{}{}\n",
                t.sentence_index,
                t.sample_number,
                if t.refusal { "refusal " } else { "" },
                if t.exact {
                    "exact".to_string()
                } else {
                    match t.bitap_errors {
                        Some(e) => format!("near ({e} errors)"),
                        None => "no positional match".to_string(),
                    }
                },
                if t.answer.is_empty() {
                    String::new()
                } else {
                    format!(" :: {}", t.answer)
                }
            ));
        }
        out
    }
}
