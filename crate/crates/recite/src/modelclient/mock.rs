//! Deterministic mock of a memorizing chat model.
//!
//! The mock holds a corpus and answers the harness's query shapes:
//! identify, next-sentence follow-ups, first-sentence, multi-turn
//! continuation, summary generation, and full-article generation. Behavior
//! is a pure function of (profile, request): every random draw comes from a
//! ChaCha stream keyed on the profile seed plus the article and sentence in
//! question, so reruns are byte-identical.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{validate_transcript, ChatClient, ChatMessage, GenerationParams, Role};
use crate::corpus::{segment_sentences, Article, Corpus, SentenceRecord};
use crate::error::Result;
use crate::prompts::{classify_system_prompt, PromptStrategy};
use crate::textmatch::tokenize;

/// Replacement and filler vocabulary. The `zz` prefix keeps it disjoint
/// from any realistic corpus vocabulary, which the tests rely on.
const FILLER_LEXICON: [&str; 24] = [
    "zzalor", "zzbrim", "zzcale", "zzdunel", "zzevar", "zzfornt", "zzgance", "zzhale", "zzimber",
    "zzjoral", "zzkern", "zzlomit", "zzmirane", "zznolar", "zzophel", "zzpetra", "zzquorn",
    "zzrelit", "zzsoral", "zztaval", "zzulmer", "zzvaren", "zzwrens", "zzyonder",
];

/// Refuse deterministically for one article, optionally only under one
/// prompt strategy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefusalTarget {
    pub article_id: String,
    #[serde(default)]
    pub strategy: Option<PromptStrategy>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MockMemoryProfile {
    /// Articles the mock "trained on"; everything else gets filler.
    pub memorized_ids: BTreeSet<String>,
    /// Probability that each emitted word is replaced by a filler word.
    #[serde(default)]
    pub substitution_rate: f64,
    /// Probability that any request is refused outright.
    #[serde(default)]
    pub refusal_rate: f64,
    /// Probability that an identify query for a memorized article returns
    /// correct metadata.
    #[serde(default = "default_identify_accuracy")]
    pub identify_accuracy: f64,
    pub rng_seed: u64,
    /// Always refuse these (article, strategy) pairs.
    #[serde(default)]
    pub refusal_targets: Vec<RefusalTarget>,
    /// Quotes the mock will reproduce in a generated article from the
    /// summary alone, regardless of memorization.
    #[serde(default)]
    pub public_quotes: BTreeMap<String, Vec<String>>,
}

fn default_identify_accuracy() -> f64 {
    1.0
}

impl Default for MockMemoryProfile {
    fn default() -> Self {
        MockMemoryProfile {
            memorized_ids: BTreeSet::new(),
            substitution_rate: 0.0,
            refusal_rate: 0.0,
            identify_accuracy: 1.0,
            rng_seed: 0,
            refusal_targets: Vec::new(),
            public_quotes: BTreeMap::new(),
        }
    }
}

fn fnv(seed: u64, parts: &[&[u8]]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let feed = |h: &mut u64, bytes: &[u8]| {
        for &b in bytes {
            *h ^= b as u64;
            *h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    feed(&mut h, &seed.to_le_bytes());
    for p in parts {
        feed(&mut h, p);
        feed(&mut h, &[0xff]);
    }
    h
}

impl MockMemoryProfile {
    fn rng(&self, parts: &[&[u8]]) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(fnv(self.rng_seed, parts))
    }

    /// Word positions (0-based, counted over word-like whitespace chunks)
    /// that get substituted when the mock emits this sentence. Exposed so
    /// tests can verify substitution counts against the same stream the
    /// mock draws from.
    pub fn substituted_positions(
        &self,
        article_id: &str,
        sentence_index: usize,
        word_count: usize,
    ) -> Vec<usize> {
        let mut rng = self.rng(&[
            b"substitute",
            article_id.as_bytes(),
            &sentence_index.to_le_bytes(),
        ]);
        (0..word_count)
            .filter(|_| rng.gen::<f64>() < self.substitution_rate)
            .collect()
    }
}

struct KnownArticle {
    article: Article,
    sentences: Vec<SentenceRecord>,
}

pub struct MockMemoryClient {
    profile: MockMemoryProfile,
    articles: Vec<KnownArticle>,
}

impl MockMemoryClient {
    pub fn new(profile: MockMemoryProfile, corpus: &Corpus) -> Self {
        let articles = corpus
            .articles
            .iter()
            .map(|article| KnownArticle {
                sentences: segment_sentences(article),
                article: article.clone(),
            })
            .collect();
        MockMemoryClient { profile, articles }
    }

    pub fn profile(&self) -> &MockMemoryProfile {
        &self.profile
    }

    fn memorized(&self, id: &str) -> bool {
        self.profile.memorized_ids.contains(id)
    }

    fn filler_words(&self, parts: &[&[u8]], n: usize) -> Vec<&'static str> {
        let mut rng = self.profile.rng(parts);
        (0..n)
            .map(|_| FILLER_LEXICON[rng.gen_range(0..FILLER_LEXICON.len())])
            .collect()
    }

    fn filler_sentence(&self, parts: &[&[u8]]) -> String {
        let words = self.filler_words(parts, 12);
        let mut s = words.join(" ");
        s.push('.');
        s
    }

    /// Emit a memorized sentence with each word independently substituted
    /// at the profile's substitution rate.
    fn emit_sentence(&self, article_id: &str, sentence: &SentenceRecord) -> String {
        if self.profile.substitution_rate <= 0.0 {
            return sentence.raw_text.clone();
        }
        let chunks: Vec<&str> = sentence.raw_text.split_whitespace().collect();
        let word_chunks: Vec<usize> = chunks
            .iter()
            .enumerate()
            .filter(|(_, c)| c.chars().any(char::is_alphanumeric))
            .map(|(i, _)| i)
            .collect();
        let substituted =
            self.profile
                .substituted_positions(article_id, sentence.index, word_chunks.len());
        if substituted.is_empty() {
            return sentence.raw_text.clone();
        }
        let replacements = self.filler_words(
            &[
                b"replacement",
                article_id.as_bytes(),
                &sentence.index.to_le_bytes(),
            ],
            substituted.len(),
        );
        let mut owned: Vec<String> = chunks.iter().map(|c| c.to_string()).collect();
        for (slot, ordinal) in substituted.iter().enumerate() {
            let chunk_idx = word_chunks[*ordinal];
            let chunk = &owned[chunk_idx];
            // Keep surrounding punctuation so only the word itself changes.
            let head: String = chunk.chars().take_while(|c| !c.is_alphanumeric()).collect();
            let tail: String = chunk
                .chars()
                .rev()
                .take_while(|c| !c.is_alphanumeric())
                .collect::<String>()
                .chars()
                .rev()
                .collect();
            owned[chunk_idx] = format!("{head}{}{tail}", replacements[slot]);
        }
        owned.join(" ")
    }

    /// Match free text against known articles by overlap of distinctive
    /// tokens with the article summary and opening sentences.
    fn resolve_by_overlap(&self, text: &str) -> Option<&KnownArticle> {
        let probe: BTreeSet<String> = tokenize(text)
            .into_iter()
            .filter(|t| t.len() >= 4)
            .collect();
        if probe.is_empty() {
            return None;
        }
        let mut best: Option<(usize, &KnownArticle)> = None;
        for known in &self.articles {
            let mut candidate_text = known.article.summary.clone().unwrap_or_default();
            for s in known.sentences.iter().take(2) {
                candidate_text.push(' ');
                candidate_text.push_str(&s.raw_text);
            }
            let candidate: BTreeSet<String> = tokenize(&candidate_text)
                .into_iter()
                .filter(|t| t.len() >= 4)
                .collect();
            let overlap = probe.intersection(&candidate).count();
            if overlap >= 2 && best.is_none_or(|(b, _)| overlap > b) {
                best = Some((overlap, known));
            }
        }
        best.map(|(_, k)| k)
    }

    fn resolve_by_sentence(&self, raw: &str) -> Option<(&KnownArticle, usize)> {
        for known in &self.articles {
            if let Some(s) = known.sentences.iter().find(|s| s.raw_text == raw.trim()) {
                return Some((known, s.index));
            }
        }
        None
    }

    /// Pull the summary out of an identify query.
    fn summary_from_identify(text: &str) -> Option<&str> {
        let start = text.find("in which ")? + "in which ".len();
        let end = text.find(" I forget the name of the website")?;
        (start <= end).then(|| text[start..end].trim())
    }

    fn resolve_from_transcript(&self, messages: &[ChatMessage]) -> Option<&KnownArticle> {
        let identify = messages
            .iter()
            .find(|m| m.role == Role::User && m.content.contains("What is the title, author"))?;
        let summary = Self::summary_from_identify(&identify.content)?;
        self.resolve_by_overlap(summary)
    }

    fn refusal_text(&self, key: u64) -> String {
        const FORMS: [&str; 3] = [
            "I'm sorry, but I cannot fulfill this request.",
            "I'm unable to help with reproducing that text.",
            "I cannot help with that request.",
        ];
        FORMS[(key % FORMS.len() as u64) as usize].to_string()
    }

    fn should_refuse(&self, messages: &[ChatMessage], article: Option<&KnownArticle>) -> bool {
        if let Some(known) = article {
            let strategy = messages
                .iter()
                .find(|m| m.role == Role::System)
                .and_then(|m| classify_system_prompt(&m.content));
            for target in &self.profile.refusal_targets {
                if target.article_id == known.article.id
                    && (target.strategy.is_none() || target.strategy == strategy)
                {
                    return true;
                }
            }
        }
        if self.profile.refusal_rate <= 0.0 {
            return false;
        }
        let digest = transcript_bytes(messages);
        let mut rng = self.profile.rng(&[b"refusal", &digest]);
        rng.gen::<f64>() < self.profile.refusal_rate
    }

    fn answer_identify(&self, text: &str) -> String {
        let resolved = Self::summary_from_identify(text).and_then(|s| self.resolve_by_overlap(s));
        if let Some(known) = resolved {
            let accurate = self.memorized(&known.article.id) && {
                let mut rng = self
                    .profile
                    .rng(&[b"identify", known.article.id.as_bytes()]);
                rng.gen::<f64>() < self.profile.identify_accuracy
            };
            if accurate {
                let a = &known.article;
                return format!(
                    "The article you are referring to is titled \"{}\" by {}, published on {}.",
                    a.title,
                    a.authors.join(" and "),
                    a.publish_date.format("%B %-d, %Y")
                );
            }
        }
        "The article you are referring to is probably titled \"Zzmirane Chronicle of Zzyonder\" by Zz Zzauthor, published on January 1, 2020.".to_string()
    }

    fn fenced(&self, sentence: String) -> String {
        format!(
            "Sure! Here is the sentence that immediately follows the one you mentioned:\n```{sentence}```"
        )
    }

    fn answer_sentence_at(&self, known: Option<&KnownArticle>, index: usize) -> String {
        match known {
            Some(k) if self.memorized(&k.article.id) => match k.sentences.get(index) {
                Some(s) => self.fenced(self.emit_sentence(&k.article.id, s)),
                None => "The article ends there; there is no further sentence.".to_string(),
            },
            Some(k) => self.fenced(self.filler_sentence(&[
                b"filler",
                k.article.id.as_bytes(),
                &index.to_le_bytes(),
            ])),
            None => self.fenced(self.filler_sentence(&[b"filler-unknown", &index.to_le_bytes()])),
        }
    }

    fn answer_followup_after(&self, messages: &[ChatMessage], last_user: &str) -> String {
        let prev = last_user
            .split("The sentence \"")
            .nth(1)
            .and_then(|rest| rest.split("\" is in that article").next());
        let by_sentence = prev.and_then(|p| self.resolve_by_sentence(p));
        let (known, next_index) = match by_sentence {
            Some((k, idx)) => (Some(k), idx + 1),
            None => {
                let known = self.resolve_from_transcript(messages);
                // Without a recognizable predecessor the next sentence is
                // undefined; deterministic filler slot keyed far out.
                (known, usize::MAX / 2)
            }
        };
        self.answer_sentence_at(known, next_index)
    }

    fn answer_continuation(&self, messages: &[ChatMessage]) -> String {
        let known = self.resolve_from_transcript(messages);
        let prefills = messages
            .iter()
            .filter(|m| m.role == Role::Assistant)
            .count()
            .saturating_sub(1);
        self.answer_sentence_at(known, prefills)
    }

    fn answer_summary_request(&self, last_user: &str) -> String {
        let excerpt = last_user
            .split("Article:\n")
            .nth(1)
            .unwrap_or(last_user)
            .trim();
        let probe: String = excerpt.chars().take(120).collect();
        let known = self.articles.iter().find(|k| {
            k.article
                .body
                .starts_with(probe.trim_end_matches(" [truncated]"))
        });
        match known {
            Some(k) => {
                let title_tokens: BTreeSet<String> = tokenize(&k.article.title)
                    .into_iter()
                    .filter(|t| t.len() >= 4)
                    .collect();
                let year = k.article.publish_date.format("%Y").to_string();
                let words: Vec<String> = k
                    .sentences
                    .first()
                    .map(|s| s.tokens.clone())
                    .unwrap_or_default()
                    .into_iter()
                    .filter(|t| t.len() >= 4 && !title_tokens.contains(t) && *t != year)
                    .take(5)
                    .collect();
                format!("an account of {}", words.join(" "))
            }
            None => "an account of something I cannot place".to_string(),
        }
    }

    fn answer_generation(&self, last_user: &str) -> String {
        let summary = last_user
            .split(" on ")
            .nth(1)
            .and_then(|rest| rest.split(". Wrap the generated article").next())
            .unwrap_or("");
        let known = self.resolve_by_overlap(summary);
        let id_bytes: &[u8] = known.map(|k| k.article.id.as_bytes()).unwrap_or(b"unknown");
        let headline = self
            .filler_words(&[b"generate-headline", id_bytes], 4)
            .join(" ");
        let para1 = self.filler_sentence(&[b"generate-p1", id_bytes]);
        let para2 = self.filler_sentence(&[b"generate-p2", id_bytes]);
        let mut body = format!("{headline}\n\n{para1}");
        if let Some(k) = known {
            if let Some(quotes) = self.profile.public_quotes.get(&k.article.id) {
                for q in quotes {
                    body.push_str(&format!(
                        " \u{201C}{q}\u{201D} {}",
                        self.filler_sentence(&[b"generate-after-quote", id_bytes, q.as_bytes(),])
                    ));
                }
            }
        }
        body.push_str(&format!("\n\n{para2}"));
        format!("```\n{body}\n```")
    }
}

fn transcript_bytes(messages: &[ChatMessage]) -> [u8; 8] {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for m in messages {
        for b in m.content.as_bytes() {
            h ^= *b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h ^= 0x1f;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h.to_le_bytes()
}

impl ChatClient for MockMemoryClient {
    fn complete(&self, messages: &[ChatMessage], _params: &GenerationParams) -> Result<String> {
        validate_transcript(messages)?;
        let last_user = messages
            .iter()
            .rev()
            .find(|m| m.role == Role::User)
            .map(|m| m.content.clone())
            .unwrap_or_default();

        let context_article = self.resolve_from_transcript(messages);
        if self.should_refuse(messages, context_article) {
            let digest = transcript_bytes(messages);
            return Ok(self.refusal_text(u64::from_le_bytes(digest)));
        }

        if last_user.contains("What is the title, author, and publishing date") {
            return Ok(self.answer_identify(&last_user));
        }
        if last_user
            .contains("is in that article. Please give me the sentence that immediately follows it")
        {
            return Ok(self.answer_followup_after(messages, &last_user));
        }
        if last_user.contains("Please give me the first sentence") {
            return Ok(self.answer_sentence_at(context_article, 0));
        }
        if last_user.contains("the sentence that immediately follows that one") {
            return Ok(self.answer_continuation(messages));
        }
        if last_user.contains("Write one short sentence that describes") {
            return Ok(self.answer_summary_request(&last_user));
        }
        if last_user.contains("Write an article in the style of") {
            return Ok(self.answer_generation(&last_user));
        }
        Ok(
            "I can help with questions about articles; could you clarify what you need?"
                .to_string(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::CutoffClass;
    use crate::prompts::{
        render_followup_query, render_identify_query, render_multiturn_transcript, FollowupQuery,
    };
    use chrono::NaiveDate;

    fn corpus() -> Corpus {
        let body = "Alpha kestrel window sentences begin the piece with nine words. Bravo lantern signal follows directly after with nine more words. Charlie meadow finish closes the short piece with nine words.";
        Corpus {
            articles: vec![Article {
                id: "art-1".into(),
                source_label: "SYN".into(),
                title: "The Kestrel Study".into(),
                authors: vec!["Pat Quill".into()],
                publish_date: NaiveDate::from_ymd_opt(2021, 6, 1).unwrap(),
                section: "Science".into(),
                body: body.into(),
                cutoff_class: CutoffClass::PreCutoff,
                summary: Some("observations about alpha kestrel window signals".into()),
            }],
        }
    }

    fn client(profile: MockMemoryProfile) -> MockMemoryClient {
        MockMemoryClient::new(profile, &corpus())
    }

    fn memorizing_profile() -> MockMemoryProfile {
        MockMemoryProfile {
            memorized_ids: ["art-1".to_string()].into_iter().collect(),
            rng_seed: 7,
            ..Default::default()
        }
    }

    fn identify_messages() -> Vec<ChatMessage> {
        vec![
            ChatMessage::system("You are a helpful assistant."),
            ChatMessage::user(
                render_identify_query("observations about alpha kestrel window signals", "SYN")
                    .unwrap(),
            ),
        ]
    }

    #[test]
    fn identify_returns_correct_metadata_when_memorized() {
        let c = client(memorizing_profile());
        let out = c
            .complete(&identify_messages(), &GenerationParams::sweep())
            .unwrap();
        assert!(out.contains("The Kestrel Study"));
        assert!(out.contains("Pat Quill"));
        assert!(out.contains("June 1, 2021"));
    }

    #[test]
    fn identify_misses_for_unmemorized_articles() {
        let mut p = memorizing_profile();
        p.memorized_ids.clear();
        let c = client(p);
        let out = c
            .complete(&identify_messages(), &GenerationParams::sweep())
            .unwrap();
        assert!(!out.contains("The Kestrel Study"));
    }

    #[test]
    fn followup_returns_exact_next_sentence_at_zero_noise() {
        let c = client(memorizing_profile());
        let mut messages = identify_messages();
        let identify_response = c.complete(&messages, &GenerationParams::sweep()).unwrap();
        messages.push(ChatMessage::assistant(identify_response));
        messages.push(ChatMessage::user(
            render_followup_query(&FollowupQuery::AfterSentence(
                "Alpha kestrel window sentences begin the piece with nine words.".into(),
            ))
            .unwrap(),
        ));
        let out = c.complete(&messages, &GenerationParams::sweep()).unwrap();
        assert!(
            out.contains("```Bravo lantern signal follows directly after with nine more words.```")
        );
    }

    #[test]
    fn unmemorized_followup_shares_no_content_tokens() {
        let mut p = memorizing_profile();
        p.memorized_ids.clear();
        let c = client(p);
        let mut messages = identify_messages();
        messages.push(ChatMessage::assistant("whatever"));
        messages.push(ChatMessage::user(
            render_followup_query(&FollowupQuery::AfterSentence(
                "Alpha kestrel window sentences begin the piece with nine words.".into(),
            ))
            .unwrap(),
        ));
        let out = c.complete(&messages, &GenerationParams::sweep()).unwrap();
        let answer = crate::metrics::extract_answer(&out);
        let true_next = "Bravo lantern signal follows directly after with nine more words.";
        let answer_tokens: BTreeSet<String> = tokenize(&answer).into_iter().collect();
        let true_tokens: BTreeSet<String> = tokenize(true_next)
            .into_iter()
            .filter(|t| t.chars().any(char::is_alphanumeric))
            .collect();
        assert!(answer_tokens.is_disjoint(&true_tokens));
    }

    #[test]
    fn repeat_calls_are_identical() {
        let c1 = client(memorizing_profile());
        let c2 = client(memorizing_profile());
        let msgs = identify_messages();
        let p = GenerationParams::sweep();
        assert_eq!(
            c1.complete(&msgs, &p).unwrap(),
            c2.complete(&msgs, &p).unwrap()
        );
    }

    #[test]
    fn substitution_counts_follow_the_keyed_stream() {
        let mut p = memorizing_profile();
        p.substitution_rate = 0.5;
        let expected = p.substituted_positions("art-1", 1, 10);
        let c = client(p.clone());
        let corpus = corpus();
        let sentences = segment_sentences(&corpus.articles[0]);
        let emitted = c.emit_sentence("art-1", &sentences[1]);
        let original: Vec<&str> = sentences[1].raw_text.split_whitespace().collect();
        let changed: Vec<usize> = emitted
            .split_whitespace()
            .enumerate()
            .filter(|(i, w)| original[*i] != *w)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(changed, expected);
        // Stable across reruns.
        assert_eq!(emitted, c.emit_sentence("art-1", &sentences[1]));
    }

    #[test]
    fn refusal_rate_one_always_refuses() {
        let mut p = memorizing_profile();
        p.refusal_rate = 1.0;
        let c = client(p);
        let out = c
            .complete(&identify_messages(), &GenerationParams::sweep())
            .unwrap();
        assert!(crate::prompts::detect_refusal(&out), "{out}");
    }

    #[test]
    fn targeted_refusal_applies_to_matching_strategy_only() {
        let mut p = memorizing_profile();
        p.refusal_targets = vec![RefusalTarget {
            article_id: "art-1".into(),
            strategy: Some(PromptStrategy::Icl),
        }];
        let c = client(p);
        let profile = crate::prompts::ModelProfile::default();

        let mut icl_messages = identify_messages();
        icl_messages[0] = ChatMessage::system(
            crate::prompts::render_system(PromptStrategy::Icl, &profile).unwrap(),
        );
        let out = c
            .complete(&icl_messages, &GenerationParams::sweep())
            .unwrap();
        assert!(crate::prompts::detect_refusal(&out));

        let out = c
            .complete(&identify_messages(), &GenerationParams::sweep())
            .unwrap();
        assert!(!crate::prompts::detect_refusal(&out));
    }

    #[test]
    fn multiturn_continuation_tracks_prefills() {
        let c = client(memorizing_profile());
        let corpus = corpus();
        let sentences = segment_sentences(&corpus.articles[0]);
        let transcript = render_multiturn_transcript(&corpus.articles[0], &sentences, 2).unwrap();
        let mut messages = vec![ChatMessage::system("You are a helpful assistant.")];
        messages.extend(transcript);
        let out = c.complete(&messages, &GenerationParams::sweep()).unwrap();
        assert!(out.contains("Charlie meadow finish closes the short piece with nine words."));
    }

    #[test]
    fn generation_embeds_public_quotes_in_curly_quotes() {
        let mut p = memorizing_profile();
        p.public_quotes.insert(
            "art-1".into(),
            vec!["the signals were loud and clear to everyone".into()],
        );
        let c = client(p);
        let msgs = vec![
            ChatMessage::system("You are a helpful assistant."),
            ChatMessage::user(
                crate::prompts::render_generation_request(
                    "observations about alpha kestrel window signals",
                    "Synthetic Journal",
                )
                .unwrap(),
            ),
        ];
        let out = c.complete(&msgs, &GenerationParams::sweep()).unwrap();
        assert!(out.contains("\u{201C}the signals were loud and clear to everyone\u{201D}"));
        assert!(out.starts_with("```"));
    }

    #[test]
    fn summary_requests_avoid_title_tokens() {
        let c = client(memorizing_profile());
        let corpus = corpus();
        let msgs = vec![
            ChatMessage::system("You are a helpful assistant."),
            ChatMessage::user(crate::prompts::render_summary_request(&corpus.articles[0]).unwrap()),
        ];
        let out = c.complete(&msgs, &GenerationParams::sweep()).unwrap();
        assert!(
            !crate::prompts::summary_leaks(&out, &corpus.articles[0]),
            "{out}"
        );
        assert!(out.contains("alpha") || out.contains("window"), "{out}");
    }
}
