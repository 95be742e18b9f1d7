//! The quote control: generate an article from its summary alone, compare
//! quotations on both sides, and flag ground-truth quotes the model can
//! produce without the article. Feeds the no-quotes view of the positional
//! score.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Article;
use crate::error::{Error, Result};
use crate::metrics::{extract_answer, ArticleScorecard};
use crate::modelclient::{ChatClient, ChatMessage, GenerationParams};
use crate::prompts::{render_generation_request, HELPFUL_BASIC_SYSTEM};
use crate::textmatch::{bitap_search, k_for, normalize_quotes, word_count, TokenSeq};

/// Quotes shorter than this many words are ignored.
pub const MIN_QUOTE_WORDS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuoteOrigin {
    GroundTruth,
    Generated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuoteSpan {
    pub text: String,
    pub tokens: TokenSeq,
    pub origin: QuoteOrigin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuoteFlag {
    pub text: String,
    pub generic: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuoteCheckOutcome {
    pub article_id: String,
    pub generated_text: String,
    pub ground_quotes: Vec<QuoteSpan>,
    pub generated_quotes: Vec<QuoteSpan>,
    pub flags: Vec<QuoteFlag>,
    pub has_generic_quote: bool,
}

/// Corpus style label used in the generation prompt.
pub fn style_label(source_label: &str) -> &str {
    match source_label.to_ascii_uppercase().as_str() {
        "NYT" => "New York Times",
        "WSJ" => "Wall Street Journal",
        _ => source_label,
    }
}

/// One completion producing a full article from the summary alone.
pub fn generate_styled_article(
    article: &Article,
    client: &dyn ChatClient,
    params: &GenerationParams,
) -> Result<String> {
    let summary = article
        .summary
        .as_deref()
        .ok_or_else(|| Error::SummaryUnavailable(article.id.clone()))?;
    let request = render_generation_request(summary, style_label(&article.source_label))?;
    let messages = [
        ChatMessage::system(HELPFUL_BASIC_SYSTEM),
        ChatMessage::user(request),
    ];
    let response = client.complete(&messages, params)?;
    if crate::prompts::detect_refusal(&response) {
        return Err(Error::ControlUnavailable(article.id.clone()));
    }
    if !response.contains("```") && !response.contains("\"\"\"") {
        log::warn!(
            "generated article for {} is not fenced; using the full response",
            article.id
        );
    }
    Ok(extract_answer(&response))
}

fn make_span(text: &str, origin: QuoteOrigin) -> Option<QuoteSpan> {
    let trimmed = text.trim();
    let tokens = match origin {
        QuoteOrigin::GroundTruth => TokenSeq::source(trimmed),
        QuoteOrigin::Generated => TokenSeq::generation(trimmed),
    };
    if word_count(&tokens.tokens) < MIN_QUOTE_WORDS {
        return None;
    }
    Some(QuoteSpan {
        text: trimmed.to_string(),
        tokens,
        origin,
    })
}

/// All maximal quoted spans in a text.
///
/// Generated articles wrap quotes in curly quotes per the generation
/// prompt, so only curly pairs count there (outermost pairing when nested).
/// Ground-truth text pairs straight or curly delimiters by alternation.
/// A trailing unpaired delimiter drops its span with a warning.
pub fn extract_quotes(text: &str, origin: QuoteOrigin) -> Vec<QuoteSpan> {
    let mut spans = Vec::new();
    match origin {
        QuoteOrigin::Generated => {
            let mut depth = 0usize;
            let mut start = None;
            for (i, c) in text.char_indices() {
                match c {
                    '\u{201C}' => {
                        if depth == 0 {
                            start = Some(i + c.len_utf8());
                        }
                        depth += 1;
                    }
                    '\u{201D}' if depth > 0 => {
                        depth -= 1;
                        if depth == 0 {
                            if let Some(s) = start.take() {
                                spans.extend(make_span(&text[s..i], origin));
                            }
                        }
                    }
                    _ => {}
                }
            }
            if start.is_some() && depth > 0 {
                log::warn!("unpaired curly quote; trailing span dropped");
            }
        }
        QuoteOrigin::GroundTruth => {
            let normalized: String = text.chars().map(normalize_quotes).collect();
            let mut inside = false;
            let mut current = String::new();
            for c in normalized.chars() {
                if c == '"' {
                    if inside {
                        spans.extend(make_span(&current, origin));
                        current.clear();
                    }
                    inside = !inside;
                } else if inside {
                    current.push(c);
                }
            }
            if inside {
                log::warn!("unpaired quote delimiter; trailing span dropped");
            }
        }
    }
    spans
}

/// A ground-truth quote is generic when some generated quote matches it
/// within the K budget for its length.
pub fn flag_generic_quotes(
    ground: &[QuoteSpan],
    generated: &[QuoteSpan],
    p: f64,
) -> Result<Vec<QuoteFlag>> {
    let mut flags = Vec::with_capacity(ground.len());
    for g in ground {
        let k = k_for(p, g.tokens.len())?;
        let mut generic = false;
        for cand in generated {
            if bitap_search(&g.tokens.tokens, &cand.tokens.tokens, k)?.is_some() {
                generic = true;
                break;
            }
        }
        flags.push(QuoteFlag {
            text: g.text.clone(),
            generic,
        });
    }
    Ok(flags)
}

/// Run the whole control for one article.
pub fn run_quote_control(
    article: &Article,
    client: &dyn ChatClient,
    params: &GenerationParams,
    p: f64,
) -> Result<QuoteCheckOutcome> {
    let generated_text = generate_styled_article(article, client, params)?;
    let ground_quotes = extract_quotes(&article.body, QuoteOrigin::GroundTruth);
    let generated_quotes = extract_quotes(&generated_text, QuoteOrigin::Generated);
    let flags = flag_generic_quotes(&ground_quotes, &generated_quotes, p)?;
    let has_generic_quote = flags.iter().any(|f| f.generic);
    Ok(QuoteCheckOutcome {
        article_id: article.id.clone(),
        generated_text,
        ground_quotes,
        generated_quotes,
        flags,
        has_generic_quote,
    })
}

/// A final-round scorecard annotated with the generic-quote verdict, ready
/// for the no-quotes distribution view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedScorecard {
    pub scorecard: ArticleScorecard,
    pub generic_quote_flag: bool,
}

pub fn recompute_noquote_scores(
    scorecards: &[ArticleScorecard],
    flags: &BTreeMap<String, bool>,
) -> Vec<AnnotatedScorecard> {
    scorecards
        .iter()
        .map(|card| AnnotatedScorecard {
            generic_quote_flag: flags.get(&card.article_id).copied().unwrap_or(false),
            scorecard: card.clone(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{segment_sentences, CutoffClass, SentenceRecord};
    use crate::metrics::{score_article, score_attempt, AttemptMatch};
    use chrono::NaiveDate;

    struct CannedClient(String);

    impl ChatClient for CannedClient {
        fn complete(&self, _: &[ChatMessage], _: &GenerationParams) -> crate::Result<String> {
            Ok(self.0.clone())
        }
    }

    fn quoteless_article(summary: Option<&str>) -> Article {
        Article {
            id: "g1".into(),
            source_label: "NYT".into(),
            title: "Some Title".into(),
            authors: vec!["A B".into()],
            publish_date: NaiveDate::from_ymd_opt(2021, 1, 1).unwrap(),
            section: "US".into(),
            body: "A body sentence with at least eight words inside.".into(),
            cutoff_class: CutoffClass::PreCutoff,
            summary: summary.map(str::to_string),
        }
    }

    #[test]
    fn generation_requires_a_summary() {
        let client = CannedClient("```anything```".into());
        let article = quoteless_article(None);
        let err =
            generate_styled_article(&article, &client, &GenerationParams::sweep()).unwrap_err();
        assert!(matches!(err, Error::SummaryUnavailable(_)), "{err}");
    }

    #[test]
    fn refusal_marks_the_control_unavailable() {
        let client = CannedClient("I cannot fulfill this request.".into());
        let article = quoteless_article(Some("a piece about market conditions"));
        let err =
            generate_styled_article(&article, &client, &GenerationParams::sweep()).unwrap_err();
        assert!(matches!(err, Error::ControlUnavailable(_)), "{err}");
    }

    #[test]
    fn unfenced_generation_falls_back_to_full_text() {
        let client = CannedClient("Headline here. The body follows without fences.".into());
        let article = quoteless_article(Some("a piece about market conditions"));
        let text = generate_styled_article(&article, &client, &GenerationParams::sweep()).unwrap();
        assert!(text.contains("The body follows without fences."));
    }

    #[test]
    fn curly_spans_extracted_from_generated_text() {
        let text = "Intro words here. \u{201C}the first quoted span has five words\u{201D} middle \u{201C}another quoted span with enough words\u{201D} end.";
        let spans = extract_quotes(text, QuoteOrigin::Generated);
        assert_eq!(spans.len(), 2);
        assert_eq!(spans[0].text, "the first quoted span has five words");
    }

    #[test]
    fn no_quotes_means_no_spans() {
        assert!(
            extract_quotes("Nothing quoted in here at all.", QuoteOrigin::Generated).is_empty()
        );
        assert!(
            extract_quotes("Nothing quoted in here at all.", QuoteOrigin::GroundTruth).is_empty()
        );
    }

    #[test]
    fn short_spans_are_discarded() {
        let text = "He said \"too short\" and then \"this span is long enough to count\" after.";
        let spans = extract_quotes(text, QuoteOrigin::GroundTruth);
        assert_eq!(spans.len(), 1);
        assert!(spans[0].text.starts_with("this span"));
    }

    #[test]
    fn unpaired_trailing_quote_is_dropped() {
        let text =
            "Good \"span with enough words to keep\" then \"dangling unpaired tail words here";
        let spans = extract_quotes(text, QuoteOrigin::GroundTruth);
        assert_eq!(spans.len(), 1);
    }

    #[test]
    fn nested_curly_quotes_use_outermost_pairing() {
        let text = "\u{201C}outer span begins \u{201C}inner part\u{201D} and keeps going to the end\u{201D}";
        let spans = extract_quotes(text, QuoteOrigin::Generated);
        assert_eq!(spans.len(), 1);
        assert!(spans[0].text.contains("inner part"));
    }

    #[test]
    fn identical_quotes_are_generic() {
        let ground = extract_quotes(
            "\"the market will remain strong through next year\"",
            QuoteOrigin::GroundTruth,
        );
        let generated = extract_quotes(
            "\u{201C}the market will remain strong through next year\u{201D}",
            QuoteOrigin::Generated,
        );
        let flags = flag_generic_quotes(&ground, &generated, 0.1).unwrap();
        assert!(flags[0].generic);
    }

    #[test]
    fn disjoint_quotes_are_not_generic() {
        let ground = extract_quotes(
            "\"the market will remain strong through next year\"",
            QuoteOrigin::GroundTruth,
        );
        let generated = extract_quotes(
            "\u{201C}completely unrelated words about other topics entirely\u{201D}",
            QuoteOrigin::Generated,
        );
        let flags = flag_generic_quotes(&ground, &generated, 0.1).unwrap();
        assert!(!flags[0].generic);
    }

    #[test]
    fn one_substitution_in_twenty_words_is_generic() {
        // K = floor(0.1 * 20) = 2, and the DP distance of one substituted
        // word is 1.
        let words: Vec<String> = (0..20).map(|i| format!("qw{i}")).collect();
        let ground_text = format!("\"{}\"", words.join(" "));
        let mut altered = words.clone();
        altered[7] = "different".into();
        let generated_text = format!("\u{201C}{}\u{201D}", altered.join(" "));
        let ground = extract_quotes(&ground_text, QuoteOrigin::GroundTruth);
        let generated = extract_quotes(&generated_text, QuoteOrigin::Generated);
        assert_eq!(ground[0].tokens.len(), 20);
        let flags = flag_generic_quotes(&ground, &generated, 0.1).unwrap();
        assert!(flags[0].generic);
    }

    #[test]
    fn raising_p_never_unflags() {
        let ground = extract_quotes(
            "\"alpha beta gamma delta epsilon zeta eta theta\"",
            QuoteOrigin::GroundTruth,
        );
        let generated = extract_quotes(
            "\u{201C}alpha beta gamma delta epsilon zeta other theta\u{201D}",
            QuoteOrigin::Generated,
        );
        let mut last = false;
        for p in [0.0, 0.05, 0.1, 0.2, 0.5, 1.0] {
            let generic = flag_generic_quotes(&ground, &generated, p).unwrap()[0].generic;
            assert!(generic >= last, "p={p} unflagged a quote");
            last = generic;
        }
    }

    fn sentences(body: &str) -> Vec<SentenceRecord> {
        let article = Article {
            id: "q1".into(),
            source_label: "NYT".into(),
            title: "T".into(),
            authors: vec!["A B".into()],
            publish_date: NaiveDate::from_ymd_opt(2021, 1, 1).unwrap(),
            section: "US".into(),
            body: body.into(),
            cutoff_class: CutoffClass::PreCutoff,
            summary: None,
        };
        segment_sentences(&article)
    }

    /// The no-quotes score produced inside `score_article` must equal a
    /// from-scratch positional score over the filtered target set.
    #[test]
    fn noquote_score_equals_filtered_recomputation() {
        let body = "He said, \"quoted words one fill most of this sentence here\" now. \
                    Plain sentence alpha bravo charlie delta echo foxtrot golf hotel. \
                    He said, \"quoted words two fill most of this sentence here\" now. \
                    Plain sentence india juliet kilo lima mike november oscar papa.";
        let recs = sentences(body);
        assert_eq!(recs.len(), 4);
        let targets: Vec<usize> = (0..4).collect();
        let mut attempts = Vec::new();
        for r in &recs {
            let window: Vec<&SentenceRecord> = recs
                .iter()
                .filter(|s| s.qualified && s.index >= r.index)
                .collect();
            // Quote sentences answered exactly; plain ones answered with noise.
            let answer = if r.is_quote_sentence() {
                r.raw_text.clone()
            } else {
                "zz zz zz zz zz zz zz zz".to_string()
            };
            attempts.push(score_attempt(&answer, r, &window, 0.1, 3).unwrap());
        }
        let full = score_article(&attempts, &recs, &targets, true);

        let filtered: Vec<usize> = targets
            .iter()
            .copied()
            .filter(|&i| !recs[i].is_quote_sentence())
            .collect();
        let filtered_attempts: Vec<AttemptMatch> =
            filtered.iter().map(|&i| attempts[i].clone()).collect();
        let scratch = score_article(&filtered_attempts, &recs, &filtered, true);
        assert_eq!(full.bitap_pos_noquote_score, scratch.bitap_pos_score);
        // Only the quote sentences matched, so the no-quotes view is zero.
        assert_eq!(full.bitap_pos_noquote_score, 0.0);
        assert!(full.bitap_pos_score > 0.0);
    }

    #[test]
    fn annotation_carries_flags() {
        let card = ArticleScorecard {
            article_id: "q1".into(),
            strategy: crate::prompts::PromptStrategy::MultiTurn,
            round: crate::pipeline::Round::Final,
            emp_score: 0.0,
            bitap_pos_score: 0.4,
            bitap_nonpos_score: 0.4,
            trm_score: 0.2,
            bitap_pos_noquote_score: 0.4,
            qualified_count: 5,
            excluded_refusal: false,
        };
        let mut flags = BTreeMap::new();
        flags.insert("q1".to_string(), true);
        let annotated = recompute_noquote_scores(std::slice::from_ref(&card), &flags);
        assert!(annotated[0].generic_quote_flag);
        assert_eq!(annotated[0].scorecard, card);
    }
}
