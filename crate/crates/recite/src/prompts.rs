//! Every message the harness sends: system prompts, identify queries,
//! follow-up queries, multi-turn prefilled transcripts, summary and
//! article-generation requests, plus refusal and identification checks.
//!
//! Templates live under `templates/` and use `{placeholder}` substitution.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::corpus::Article;
use crate::error::{Error, Result};
use crate::modelclient::ChatMessage;

pub const SIMPLE_SYSTEM_TEMPLATE: &str = include_str!("../templates/simple_system.txt");
pub const ICL_SYSTEM_TEMPLATE: &str = include_str!("../templates/icl_system.txt");
pub const ICL_V2_SYSTEM_TEMPLATE: &str = include_str!("../templates/icl_v2_system.txt");
pub const ICL_V3_SYSTEM_TEMPLATE: &str = include_str!("../templates/icl_v3_system.txt");
pub const IDENTIFY_QUERY_TEMPLATE: &str = include_str!("../templates/identify_query.txt");
pub const FOLLOWUP_AFTER_TEMPLATE: &str = include_str!("../templates/followup_after.txt");
pub const FOLLOWUP_FIRST_TEMPLATE: &str = include_str!("../templates/followup_first.txt");
pub const FOLLOWUP_NEXT_TEMPLATE: &str = include_str!("../templates/followup_next.txt");
pub const IDENTIFY_RESPONSE_TEMPLATE: &str = include_str!("../templates/identify_response.txt");
pub const SUMMARY_REQUEST_TEMPLATE: &str = include_str!("../templates/summary_request.txt");
pub const GENERATION_REQUEST_TEMPLATE: &str = include_str!("../templates/generation_request.txt");

pub const HELPFUL_BASIC_SYSTEM: &str = "You are a helpful assistant.";

/// Longest article excerpt embedded in a summary request.
const SUMMARY_EXCERPT_BUDGET: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PromptStrategy {
    Simple,
    Icl,
    IclV2,
    IclV3,
    MultiTurn,
    HelpfulBasic,
}

impl PromptStrategy {
    /// The strategies exercised in the prompt-variant round.
    pub const ROUND_TWO: [PromptStrategy; 4] = [
        PromptStrategy::Simple,
        PromptStrategy::Icl,
        PromptStrategy::IclV2,
        PromptStrategy::IclV3,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            PromptStrategy::Simple => "SIMPLE",
            PromptStrategy::Icl => "ICL",
            PromptStrategy::IclV2 => "ICL-v2",
            PromptStrategy::IclV3 => "ICL-v3",
            PromptStrategy::MultiTurn => "Multi-Turn",
            PromptStrategy::HelpfulBasic => "Helpful-Basic",
        }
    }
}

impl std::fmt::Display for PromptStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// The model identity spliced into system prompt placeholders.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelProfile {
    pub name: String,
    pub vendor: String,
    pub knowledge_cutoff: NaiveDate,
    pub current_date: NaiveDate,
    #[serde(default)]
    pub provider_endpoint: Option<String>,
}

impl Default for ModelProfile {
    fn default() -> Self {
        ModelProfile {
            name: "AcmeChat".into(),
            vendor: "Acme AI".into(),
            knowledge_cutoff: NaiveDate::from_ymd_opt(2023, 10, 1).unwrap(),
            current_date: NaiveDate::from_ymd_opt(2024, 8, 9).unwrap(),
            provider_endpoint: None,
        }
    }
}

impl ModelProfile {
    pub fn validate(&self) -> Result<()> {
        if self.knowledge_cutoff >= self.current_date {
            return Err(Error::BadParams(
                "knowledge_cutoff must precede current_date".into(),
            ));
        }
        Ok(())
    }
}

fn month_year(d: NaiveDate) -> String {
    d.format("%B %Y").to_string()
}

fn month_day_year(d: NaiveDate) -> String {
    d.format("%B %-d, %Y").to_string()
}

/// Substitute `{name}` placeholders; an unknown placeholder or an empty
/// value is an error naming the placeholder.
fn fill(template: &str, values: &[(&str, &str)]) -> Result<String> {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let close = after
            .find('}')
            .ok_or_else(|| Error::MissingPlaceholder("unclosed brace".into()))?;
        let name = &after[..close];
        let value = values
            .iter()
            .find(|(k, _)| *k == name)
            .map(|(_, v)| *v)
            .ok_or_else(|| Error::MissingPlaceholder(name.to_string()))?;
        if value.trim().is_empty() {
            return Err(Error::MissingPlaceholder(name.to_string()));
        }
        out.push_str(value);
        rest = &after[close + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

/// Render the system prompt for a strategy. Multi-turn runs pair with the
/// plain helper prompt.
pub fn render_system(strategy: PromptStrategy, profile: &ModelProfile) -> Result<String> {
    match strategy {
        PromptStrategy::Simple => fill(
            SIMPLE_SYSTEM_TEMPLATE,
            &[
                ("model_name", profile.name.as_str()),
                ("vendor", profile.vendor.as_str()),
                ("knowledge_cutoff", &month_year(profile.knowledge_cutoff)),
                ("current_date", &month_day_year(profile.current_date)),
            ],
        ),
        PromptStrategy::Icl => Ok(ICL_SYSTEM_TEMPLATE.to_string()),
        PromptStrategy::IclV2 => Ok(ICL_V2_SYSTEM_TEMPLATE.to_string()),
        PromptStrategy::IclV3 => Ok(ICL_V3_SYSTEM_TEMPLATE.to_string()),
        PromptStrategy::MultiTurn | PromptStrategy::HelpfulBasic => {
            Ok(HELPFUL_BASIC_SYSTEM.to_string())
        }
    }
}

/// Guess which strategy produced a system prompt; used by the mock to apply
/// strategy-targeted behavior.
pub fn classify_system_prompt(text: &str) -> Option<PromptStrategy> {
    if text.trim() == HELPFUL_BASIC_SYSTEM {
        return Some(PromptStrategy::HelpfulBasic);
    }
    if text.contains("Never ever hallucinate fake information") {
        return Some(PromptStrategy::Simple);
    }
    if text.contains("You are a highly precise and detail-oriented assistant") {
        return Some(PromptStrategy::IclV3);
    }
    if text.contains("you must identify and supply the subsequent sentence") {
        // v2 extends example 1 with a second retrieval turn.
        if text.contains("```Additionally, they engage more effectively") {
            return Some(PromptStrategy::IclV2);
        }
        return Some(PromptStrategy::Icl);
    }
    None
}

/// The opening query: a summary plus a source hint, asking for title,
/// author, and publishing date.
pub fn render_identify_query(summary: &str, source_abbrev: &str) -> Result<String> {
    if summary.trim().is_empty() {
        return Err(Error::EmptySummary);
    }
    fill(
        IDENTIFY_QUERY_TEMPLATE,
        &[("summary", summary), ("source_abbrev", source_abbrev)],
    )
}

/// The assistant turn confirming article metadata, used to prefill
/// multi-turn transcripts.
pub fn render_identify_response(article: &Article) -> String {
    let authors = article.authors.join(" and ");
    fill(
        IDENTIFY_RESPONSE_TEMPLATE,
        &[
            ("title", article.title.as_str()),
            ("authors", authors.as_str()),
            ("publish_date", &month_day_year(article.publish_date)),
        ],
    )
    .expect("identify response template placeholders are fixed")
}

/// The three shapes of next-sentence query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FollowupQuery {
    /// Quote the previous sentence and ask for the one after it.
    AfterSentence(String),
    /// Ask for the first sentence of the article.
    FirstSentence,
    /// Ask for the sentence after the one just produced.
    NextAfterPrevious,
}

pub fn render_followup_query(query: &FollowupQuery) -> Result<String> {
    match query {
        FollowupQuery::AfterSentence(previous) => fill(
            FOLLOWUP_AFTER_TEMPLATE,
            &[("previous_sentence", previous.as_str())],
        ),
        FollowupQuery::FirstSentence => Ok(FOLLOWUP_FIRST_TEMPLATE.to_string()),
        FollowupQuery::NextAfterPrevious => Ok(FOLLOWUP_NEXT_TEMPLATE.to_string()),
    }
}

/// Build the prefilled multi-turn transcript asking for sentence
/// `target_index`: identify exchange, then ground-truth answers for every
/// earlier sentence, then the final query. `2 + 2*target_index + 1`
/// messages, system prompt not included.
pub fn render_multiturn_transcript(
    article: &Article,
    sentences: &[crate::corpus::SentenceRecord],
    target_index: usize,
) -> Result<Vec<ChatMessage>> {
    if target_index >= sentences.len() {
        return Err(Error::TargetOutOfRange {
            index: target_index,
            count: sentences.len(),
        });
    }
    let summary = article
        .summary
        .as_deref()
        .ok_or_else(|| Error::SummaryUnavailable(article.id.clone()))?;
    let mut messages = Vec::with_capacity(2 * target_index + 3);
    messages.push(ChatMessage::user(render_identify_query(
        summary,
        &article.source_label,
    )?));
    messages.push(ChatMessage::assistant(render_identify_response(article)));
    for (i, sentence) in sentences.iter().take(target_index).enumerate() {
        let query = if i == 0 {
            FollowupQuery::FirstSentence
        } else {
            FollowupQuery::NextAfterPrevious
        };
        messages.push(ChatMessage::user(render_followup_query(&query)?));
        messages.push(ChatMessage::assistant(format!(
            "```{}```",
            sentence.raw_text
        )));
    }
    let final_query = if target_index == 0 {
        FollowupQuery::FirstSentence
    } else {
        FollowupQuery::NextAfterPrevious
    };
    messages.push(ChatMessage::user(render_followup_query(&final_query)?));
    Ok(messages)
}

/// Ask for a one-sentence identifying summary that avoids title, author,
/// and publication year.
pub fn render_summary_request(article: &Article) -> Result<String> {
    if article.body.trim().is_empty() {
        return Err(Error::EmptyBody);
    }
    let excerpt = if article.body.len() > SUMMARY_EXCERPT_BUDGET {
        let mut end = SUMMARY_EXCERPT_BUDGET;
        while !article.body.is_char_boundary(end) {
            end -= 1;
        }
        format!("{} [truncated]", &article.body[..end])
    } else {
        article.body.clone()
    };
    fill(
        SUMMARY_REQUEST_TEMPLATE,
        &[("body_excerpt", excerpt.as_str())],
    )
}

/// Ask for a fresh article written from the summary alone, in the corpus
/// style, with source quotes wrapped in curly quotes.
pub fn render_generation_request(summary: &str, style_label: &str) -> Result<String> {
    if summary.trim().is_empty() {
        return Err(Error::EmptySummary);
    }
    fill(
        GENERATION_REQUEST_TEMPLATE,
        &[("summary", summary), ("style_label", style_label)],
    )
}

/// Stock denial phrases; any hit marks the response as a refusal.
pub const DEFAULT_REFUSAL_PHRASES: [&str; 6] = [
    "i'm unable",
    "i am unable",
    "i can't assist with that",
    "i cannot fulfill this request",
    "i cannot help with that request",
    "i can't browse the internet",
];

#[derive(Debug, Clone)]
pub struct RefusalDetector {
    phrases: Vec<String>,
}

impl Default for RefusalDetector {
    fn default() -> Self {
        RefusalDetector {
            phrases: DEFAULT_REFUSAL_PHRASES
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }
}

impl RefusalDetector {
    pub fn with_phrases(phrases: Vec<String>) -> Self {
        RefusalDetector {
            phrases: phrases.into_iter().map(|p| p.to_lowercase()).collect(),
        }
    }

    pub fn is_refusal(&self, text: &str) -> bool {
        let lowered: String = text
            .chars()
            .map(crate::textmatch::normalize_quotes)
            .collect::<String>()
            .to_lowercase();
        self.phrases.iter().any(|p| lowered.contains(p.as_str()))
    }
}

/// Refusal check with the built-in phrase list.
pub fn detect_refusal(text: &str) -> bool {
    RefusalDetector::default().is_refusal(text)
}

/// Outcome of checking an identify response against article metadata.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentificationCheck {
    pub title_matched: bool,
    pub author_matched: bool,
    /// Recorded but not required for a positive identification.
    pub date_matched: bool,
}

impl IdentificationCheck {
    pub fn verified(&self) -> bool {
        self.title_matched && self.author_matched
    }
}

fn alnum_lower(text: &str) -> String {
    text.chars()
        .map(crate::textmatch::normalize_quotes)
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect::<String>()
        .to_lowercase()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// True iff the response names the article title (punctuation-insensitive)
/// and at least one author surname.
pub fn verify_identification(response: &str, article: &Article) -> IdentificationCheck {
    let haystack = alnum_lower(response);
    let title = alnum_lower(&article.title);
    let title_matched = !title.is_empty() && haystack.contains(&title);
    let author_matched = article.authors.iter().any(|a| {
        a.split_whitespace()
            .last()
            .map(|surname| haystack.contains(&alnum_lower(surname)))
            .unwrap_or(false)
    });
    let date_matched = haystack.contains(&article.publish_date.format("%Y").to_string());
    IdentificationCheck {
        title_matched,
        author_matched,
        date_matched,
    }
}

/// True when a candidate summary gives away title words, an author surname,
/// or the publication year.
pub fn summary_leaks(summary: &str, article: &Article) -> bool {
    let hay = alnum_lower(summary);
    let words: Vec<&str> = hay.split_whitespace().collect();
    for token in alnum_lower(&article.title).split_whitespace() {
        if token.len() >= 4 && words.contains(&token) {
            return true;
        }
    }
    for author in &article.authors {
        if let Some(surname) = author.split_whitespace().last() {
            if words.contains(&alnum_lower(surname).as_str()) {
                return true;
            }
        }
    }
    words.contains(&article.publish_date.format("%Y").to_string().as_str())
}
