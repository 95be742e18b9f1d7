//! Article ingestion, sentence segmentation, and sentence qualification.
//!
//! A corpus file is UTF-8 with one JSON object per line:
//! `{id, source_label, title, authors[], publish_date, section, body, summary?}`.
//! The cutoff class of each article is derived from the cutoff date given at
//! ingestion time and drives the split between main runs and the baseline.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textmatch::{normalize_quotes, tokenize, word_count};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffClass {
    PreCutoff,
    PostCutoff,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Article {
    pub id: String,
    pub source_label: String,
    pub title: String,
    pub authors: Vec<String>,
    pub publish_date: NaiveDate,
    pub section: String,
    pub body: String,
    pub cutoff_class: CutoffClass,
    pub summary: Option<String>,
}

/// One sentence of an article, with everything the metrics need.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub article_id: String,
    pub index: usize,
    pub raw_text: String,
    pub tokens: Vec<String>,
    pub word_count: usize,
    pub qualified: bool,
    pub boilerplate_hit: Option<String>,
    pub quote_fraction: f64,
}

impl SentenceRecord {
    /// True when the sentence is dominated by quoted material; such
    /// sentences are dropped from the no-quotes metric variant.
    pub fn is_quote_sentence(&self) -> bool {
        self.quote_fraction >= 0.5
    }
}

/// A set of formulaic publisher phrases that disqualify a sentence.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoilerplateSet {
    pub source_label: String,
    pub phrases: Vec<String>,
}

const NYT_PHRASES: &str = include_str!("../assets/nyt_boilerplate.txt");
const WSJ_PHRASES: &str = include_str!("../assets/wsj_boilerplate.txt");

impl BoilerplateSet {
    pub fn parse(source_label: &str, text: &str) -> Self {
        let phrases = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| l.to_lowercase())
            .collect();
        BoilerplateSet {
            source_label: source_label.to_string(),
            phrases,
        }
    }

    pub fn nyt() -> Self {
        Self::parse("NYT", NYT_PHRASES)
    }

    pub fn wsj() -> Self {
        Self::parse("WSJ", WSJ_PHRASES)
    }

    pub fn empty(source_label: &str) -> Self {
        BoilerplateSet {
            source_label: source_label.to_string(),
            phrases: Vec::new(),
        }
    }

    pub fn from_file(source_label: &str, path: &Path) -> Result<Self> {
        Ok(Self::parse(source_label, &fs::read_to_string(path)?))
    }

    /// Pick the built-in set matching a corpus label, if any.
    pub fn builtin_for(source_label: &str) -> Option<Self> {
        match source_label.to_ascii_uppercase().as_str() {
            "NYT" => Some(Self::nyt()),
            "WSJ" => Some(Self::wsj()),
            _ => None,
        }
    }

    /// First phrase contained (case-insensitively) in the text, if any.
    pub fn hit(&self, raw_text: &str) -> Option<&str> {
        let lowered = raw_text.to_lowercase();
        self.phrases
            .iter()
            .find(|p| lowered.contains(p.as_str()))
            .map(String::as_str)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub articles: Vec<Article>,
}

impl Corpus {
    pub fn get(&self, id: &str) -> Option<&Article> {
        self.articles.iter().find(|a| a.id == id)
    }

    pub fn pre_cutoff(&self) -> impl Iterator<Item = &Article> {
        self.articles
            .iter()
            .filter(|a| a.cutoff_class == CutoffClass::PreCutoff)
    }

    pub fn post_cutoff(&self) -> impl Iterator<Item = &Article> {
        self.articles
            .iter()
            .filter(|a| a.cutoff_class == CutoffClass::PostCutoff)
    }
}

#[derive(Deserialize)]
struct RawRecord {
    id: String,
    source_label: String,
    title: String,
    authors: Vec<String>,
    publish_date: String,
    section: String,
    body: String,
    #[serde(default)]
    summary: Option<String>,
}

/// Read a corpus file, classifying each article against `cutoff_date`.
/// Articles published strictly after the cutoff become the baseline set.
pub fn ingest_corpus(path: &Path, cutoff_date: NaiveDate) -> Result<Corpus> {
    let text = fs::read_to_string(path)?;
    ingest_corpus_str(&text, cutoff_date)
}

pub fn ingest_corpus_str(text: &str, cutoff_date: NaiveDate) -> Result<Corpus> {
    let mut articles = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line_number = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = serde_json::from_str(line).map_err(|e| Error::MalformedRecord {
            line: line_number,
            message: e.to_string(),
        })?;
        if raw.body.trim().is_empty() {
            return Err(Error::MalformedRecord {
                line: line_number,
                message: format!("article {:?} has an empty body", raw.id),
            });
        }
        let publish_date =
            NaiveDate::parse_from_str(&raw.publish_date, "%Y-%m-%d").map_err(|_| {
                Error::BadDate {
                    line: line_number,
                    value: raw.publish_date.clone(),
                }
            })?;
        if let Some(&first_line) = seen.get(&raw.id) {
            return Err(Error::DuplicateArticle {
                id: raw.id,
                first_line,
                dup_line: line_number,
            });
        }
        seen.insert(raw.id.clone(), line_number);
        let cutoff_class = if publish_date > cutoff_date {
            CutoffClass::PostCutoff
        } else {
            CutoffClass::PreCutoff
        };
        articles.push(Article {
            id: raw.id,
            source_label: raw.source_label,
            title: raw.title,
            authors: raw.authors,
            publish_date,
            section: raw.section,
            body: raw.body,
            cutoff_class,
            summary: raw.summary,
        });
    }
    if articles.is_empty() {
        log::warn!("corpus file is empty; nothing ingested");
    }
    Ok(Corpus { articles })
}

/// Serialize a corpus back to the one-record-per-line format.
pub fn write_corpus_jsonl(corpus: &Corpus) -> String {
    let mut out = String::new();
    for a in &corpus.articles {
        let rec = serde_json::json!({
            "id": a.id,
            "source_label": a.source_label,
            "title": a.title,
            "authors": a.authors,
            "publish_date": a.publish_date.format("%Y-%m-%d").to_string(),
            "section": a.section,
            "body": a.body,
            "summary": a.summary,
        });
        out.push_str(&rec.to_string());
        out.push('\n');
    }
    out
}

/// Abbreviations treated as sentence-internal, matched against the word
/// ending at a candidate terminator.
const ABBREVIATIONS: [&str; 12] = [
    "Mr.", "Mrs.", "Ms.", "Dr.", "U.S.", "N.Y.P.D.", "a.m.", "p.m.", "Inc.", "Co.", "Sept.", "No.",
];

fn is_abbreviation(word: &str) -> bool {
    if ABBREVIATIONS.iter().any(|a| a.eq_ignore_ascii_case(word)) {
        return true;
    }
    // Single-letter initials such as "F." in "Dermot F. Shea".
    let mut chars = word.chars();
    matches!((chars.next(), chars.next(), chars.next()),
             (Some(c), Some('.'), None) if c.is_alphabetic())
}

fn is_closing_trailer(c: char) -> bool {
    matches!(normalize_quotes(c), '"' | '\'' | ')' | ']' | '}')
}

fn starts_new_sentence(c: char) -> bool {
    let n = normalize_quotes(c);
    n.is_uppercase() || n.is_ascii_digit() || n == '"' || n == '\''
}

/// Split a body into sentence spans. A boundary is a `.`, `?` or `!`
/// (optionally followed by closing quotes or brackets) followed by
/// whitespace and an uppercase letter, digit, or opening quote, except when
/// the word before the terminator is a known abbreviation or initial.
fn sentence_spans(body: &str) -> Vec<(usize, usize)> {
    let chars: Vec<(usize, char)> = body.char_indices().collect();
    let n = chars.len();
    let mut spans = Vec::new();
    let mut start = 0usize; // index into chars
    let mut i = 0usize;
    while i < n {
        let c = chars[i].1;
        if c == '.' || c == '?' || c == '!' {
            // Consume the terminator plus any closing trailers.
            let mut j = i + 1;
            while j < n && is_closing_trailer(chars[j].1) {
                j += 1;
            }
            let ws_start = j;
            let mut k = j;
            while k < n && chars[k].1.is_whitespace() {
                k += 1;
            }
            let has_ws = k > ws_start;
            let next_starts = k < n && starts_new_sentence(chars[k].1);
            let abbreviated = c == '.' && {
                let mut w = i;
                while w > start && !chars[w - 1].1.is_whitespace() {
                    w -= 1;
                }
                let word: String = chars[w..=i].iter().map(|&(_, ch)| ch).collect();
                is_abbreviation(&word)
            };
            if (k == n || (has_ws && next_starts)) && !abbreviated {
                spans.push((start, j));
                start = k;
                i = k;
                continue;
            }
        }
        i += 1;
    }
    if start < n {
        spans.push((start, n));
    }
    spans
        .into_iter()
        .map(|(s, e)| {
            let byte_start = chars[s].0;
            let byte_end = if e < n { chars[e].0 } else { body.len() };
            (byte_start, byte_end)
        })
        .filter(|(s, e)| !body[*s..*e].trim().is_empty())
        .collect()
}

/// Fraction of word tokens lying inside paired double-quote spans.
/// An unpaired opening quote extends to the end of the sentence.
pub fn detect_quote_fraction(raw_text: &str) -> f64 {
    let normalized: String = raw_text.chars().map(normalize_quotes).collect();
    let mut inside = false;
    let mut quoted = 0usize;
    let mut total = 0usize;
    for segment in normalized.split('"') {
        let words = word_count(&tokenize(segment));
        total += words;
        if inside {
            quoted += words;
        }
        inside = !inside;
    }
    if total == 0 {
        0.0
    } else {
        quoted as f64 / total as f64
    }
}

/// Deterministically segment an article body into sentence records.
/// Qualification here reflects only the word-count rule; run [`qualify`]
/// with a boilerplate set to finish the job.
pub fn segment_sentences(article: &Article) -> Vec<SentenceRecord> {
    sentence_spans(&article.body)
        .into_iter()
        .enumerate()
        .map(|(index, (s, e))| {
            let raw_text = article.body[s..e].trim().to_string();
            let tokens = tokenize(&raw_text);
            let words = word_count(&tokens);
            let quote_fraction = detect_quote_fraction(&raw_text);
            SentenceRecord {
                article_id: article.id.clone(),
                index,
                raw_text,
                word_count: words,
                qualified: words >= 8,
                boilerplate_hit: None,
                tokens,
                quote_fraction,
            }
        })
        .collect()
}

/// Apply the qualification rule: at least eight words and no boilerplate
/// phrase. Records the matched phrase and returns the verdict.
pub fn qualify(sentence: &mut SentenceRecord, boilerplate: &BoilerplateSet) -> bool {
    sentence.boilerplate_hit = boilerplate.hit(&sentence.raw_text).map(str::to_string);
    sentence.qualified = sentence.word_count >= 8 && sentence.boilerplate_hit.is_none();
    sentence.qualified
}

/// Segment and fully qualify an article in one step.
pub fn segment_and_qualify(article: &Article, boilerplate: &BoilerplateSet) -> Vec<SentenceRecord> {
    let mut records = segment_sentences(article);
    for r in &mut records {
        qualify(r, boilerplate);
    }
    records
}

#[cfg(test)]
mod tests {
    use super::*;

    fn article(body: &str) -> Article {
        Article {
            id: "t1".into(),
            source_label: "NYT".into(),
            title: "Test".into(),
            authors: vec!["Pat Example".into()],
            publish_date: NaiveDate::from_ymd_opt(2021, 4, 19).unwrap(),
            section: "Well".into(),
            body: body.into(),
            cutoff_class: CutoffClass::PreCutoff,
            summary: None,
        }
    }

    #[test]
    fn splits_on_terminator_before_uppercase() {
        let a = article("It wasn't burnout — we still had energy. It wasn't depression — we didn't feel hopeless.");
        let recs = segment_sentences(&a);
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].index, 0);
        assert_eq!(recs[1].index, 1);
        assert_eq!(recs[0].raw_text, "It wasn't burnout — we still had energy.");
    }

    #[test]
    fn short_sentence_is_unqualified() {
        let a = article("Meh.");
        let recs = segment_sentences(&a);
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].word_count, 1);
        assert!(!recs[0].qualified);
    }

    #[test]
    fn nine_word_sentence_qualifies() {
        let a = article("The quick brown fox jumps over the lazy dog.");
        let recs = segment_sentences(&a);
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].word_count, 9);
        assert!(recs[0].qualified);
    }

    #[test]
    fn abbreviations_do_not_split() {
        let a = article("The N.Y.P.D. Disbands the units on Sept. 5 at 6 a.m. and Mr. Shea spoke. Dermot F. Shea agreed.");
        let recs = segment_sentences(&a);
        assert_eq!(recs.len(), 2);
        assert!(recs[0].raw_text.ends_with("spoke."));
        assert_eq!(recs[1].raw_text, "Dermot F. Shea agreed.");
    }

    #[test]
    fn quoted_terminator_splits_after_closing_quote() {
        let a = article("She asked \"How are you?\" Then she left quickly.");
        let recs = segment_sentences(&a);
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].raw_text, "She asked \"How are you?\"");
    }

    #[test]
    fn segmentation_is_idempotent() {
        let body = "At first, I didn't recognize the symptoms that we all had in common. Friends mentioned that they were having trouble concentrating. Colleagues reported that even with vaccines on the horizon, they weren't excited about 2021.";
        let a = article(body);
        let first = segment_sentences(&a);
        let rejoined = first
            .iter()
            .map(|r| r.raw_text.clone())
            .collect::<Vec<_>>()
            .join(" ");
        let second = segment_sentences(&article(&rejoined));
        assert_eq!(
            first.iter().map(|r| &r.raw_text).collect::<Vec<_>>(),
            second.iter().map(|r| &r.raw_text).collect::<Vec<_>>()
        );
    }

    #[test]
    fn every_char_accounted_for() {
        let body = "One sentence here. Another one follows! And a third?";
        let spans = sentence_spans(body);
        let mut covered = vec![false; body.len()];
        for (s, e) in &spans {
            for c in covered.iter_mut().take(*e).skip(*s) {
                *c = true;
            }
        }
        for (i, c) in body.char_indices() {
            if !covered[i] {
                assert!(c.is_whitespace(), "uncovered non-whitespace at {i}");
            }
        }
    }

    #[test]
    fn boilerplate_disqualifies() {
        let mut rec = segment_sentences(&article(
            "This copy is for your personal, non-commercial use only.",
        ))
        .remove(0);
        let verdict = qualify(&mut rec, &BoilerplateSet::wsj());
        assert!(!verdict);
        assert_eq!(
            rec.boilerplate_hit.as_deref(),
            Some("this copy is for your personal, non-commercial")
        );
    }

    #[test]
    fn word_count_thresholds() {
        let mut seven = segment_sentences(&article("One two three four five six seven.")).remove(0);
        let mut eight =
            segment_sentences(&article("One two three four five six seven eight.")).remove(0);
        let bp = BoilerplateSet::nyt();
        assert!(!qualify(&mut seven, &bp));
        assert!(qualify(&mut eight, &bp));
    }

    #[test]
    fn boilerplate_matching_is_case_insensitive() {
        let body = "FOLLOW THE NEW YORK TIMES OPINION SECTION ON FACEBOOK TODAY PLEASE NOW.";
        let mut rec = segment_sentences(&article(body)).remove(0);
        assert!(!qualify(&mut rec, &BoilerplateSet::nyt()));
    }

    #[test]
    fn quote_fraction_counts_quoted_words() {
        assert_eq!(
            detect_quote_fraction("He said, \"the market is strong today here.\""),
            0.75
        );
        assert_eq!(detect_quote_fraction("No quotes at all here."), 0.0);
        assert_eq!(
            detect_quote_fraction("\"Fully quoted sentence right here.\""),
            1.0
        );
    }

    #[test]
    fn unpaired_quote_extends_to_end() {
        // 2 of 4 words fall after the unpaired opening quote.
        assert_eq!(detect_quote_fraction("He said \"something very odd"), 0.6);
    }

    #[test]
    fn curly_quotes_count_too() {
        let f = detect_quote_fraction("He said, \u{201C}the market is strong today here.\u{201D}");
        assert_eq!(f, 0.75);
    }

    #[test]
    fn ingest_classifies_by_cutoff() {
        let lines = [
            r#"{"id":"a1","source_label":"NYT","title":"T1","authors":["A"],"publish_date":"2021-05-01","section":"US","body":"Body one is long enough to count fine."}"#,
            r#"{"id":"a2","source_label":"NYT","title":"T2","authors":["B"],"publish_date":"2022-06-01","section":"US","body":"Body two is long enough to count fine."}"#,
            r#"{"id":"a3","source_label":"NYT","title":"T3","authors":["C"],"publish_date":"2024-01-15","section":"US","body":"Body three is long enough to count fine."}"#,
        ]
        .join("\n");
        let cutoff = NaiveDate::from_ymd_opt(2023, 10, 31).unwrap();
        let corpus = ingest_corpus_str(&lines, cutoff).unwrap();
        assert_eq!(corpus.articles.len(), 3);
        let classes: Vec<_> = corpus.articles.iter().map(|a| a.cutoff_class).collect();
        assert_eq!(
            classes,
            vec![
                CutoffClass::PreCutoff,
                CutoffClass::PreCutoff,
                CutoffClass::PostCutoff
            ]
        );
    }

    #[test]
    fn duplicate_id_is_rejected_by_name() {
        let lines = [
            r#"{"id":"a1","source_label":"NYT","title":"T1","authors":["A"],"publish_date":"2021-05-01","section":"US","body":"Body."}"#,
            r#"{"id":"a1","source_label":"NYT","title":"T2","authors":["B"],"publish_date":"2022-06-01","section":"US","body":"Body."}"#,
        ]
        .join("\n");
        let cutoff = NaiveDate::from_ymd_opt(2023, 10, 31).unwrap();
        let err = ingest_corpus_str(&lines, cutoff).unwrap_err();
        assert!(
            err.to_string().contains("a1"),
            "error should cite the id: {err}"
        );
    }

    #[test]
    fn empty_file_gives_empty_corpus() {
        let cutoff = NaiveDate::from_ymd_opt(2023, 10, 31).unwrap();
        let corpus = ingest_corpus_str("", cutoff).unwrap();
        assert!(corpus.articles.is_empty());
    }

    #[test]
    fn bad_date_names_the_line() {
        let line = r#"{"id":"a1","source_label":"NYT","title":"T","authors":["A"],"publish_date":"April 2021","section":"US","body":"Body."}"#;
        let cutoff = NaiveDate::from_ymd_opt(2023, 10, 31).unwrap();
        let err = ingest_corpus_str(line, cutoff).unwrap_err();
        assert!(matches!(err, Error::BadDate { line: 1, .. }), "{err}");
    }

    #[test]
    fn malformed_record_names_the_line() {
        let text = "\n{not json}\n";
        let cutoff = NaiveDate::from_ymd_opt(2023, 10, 31).unwrap();
        let err = ingest_corpus_str(text, cutoff).unwrap_err();
        assert!(
            matches!(err, Error::MalformedRecord { line: 2, .. }),
            "{err}"
        );
    }

    #[test]
    fn qualification_is_pure() {
        let mut rec =
            segment_sentences(&article("One two three four five six seven eight nine.")).remove(0);
        let bp = BoilerplateSet::nyt();
        let v1 = qualify(&mut rec, &bp);
        let snapshot = rec.clone();
        let v2 = qualify(&mut rec, &bp);
        assert_eq!(v1, v2);
        assert_eq!(snapshot.qualified, rec.qualified);
        assert_eq!(snapshot.boilerplate_hit, rec.boilerplate_hit);
    }
}
