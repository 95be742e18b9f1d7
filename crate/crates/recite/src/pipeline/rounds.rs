//! The round runner: dispatches attempts, persists them, scores articles,
//! and applies the selection rules between rounds.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::corpus::{Article, BoilerplateSet, Corpus, SentenceRecord};
use crate::error::{Error, Result};
use crate::metrics::{
    collapse_samples, extract_answer, score_article, score_attempt, summarize_round,
    ArticleScorecard, AttemptMatch, RoundSummary,
};
use crate::modelclient::{ChatClient, ChatMessage, GenerationParams};
use crate::prompts::{
    render_followup_query, render_identify_query, render_multiturn_transcript,
    render_summary_request, render_system, summary_leaks, FollowupQuery, ModelProfile,
    PromptStrategy, RefusalDetector, HELPFUL_BASIC_SYSTEM,
};
use crate::quotecheck::{self, QuoteCheckOutcome};

use super::store::{attempt_key, Exclusion, RunStore};
use super::{AttemptKind, AttemptRecord, Round, RoundConfig};

#[derive(Debug, Clone)]
pub struct PipelineOptions {
    /// Error fraction for the K budget.
    pub p: f64,
    /// Minimum common-run length for the token-range score.
    pub min_run: usize,
    /// Worker threads per article.
    pub max_in_flight: usize,
    /// Row label used in summaries and tables.
    pub model_name: String,
    /// Extra boilerplate phrases appended to the built-in sets.
    pub extra_boilerplate: Vec<String>,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            p: 0.1,
            min_run: 3,
            max_in_flight: 1,
            model_name: "mock".into(),
            extra_boilerplate: Vec::new(),
        }
    }
}

pub struct Pipeline<'a> {
    corpus: &'a Corpus,
    client: &'a dyn ChatClient,
    store: RunStore,
    profile: ModelProfile,
    options: PipelineOptions,
    refusals: RefusalDetector,
    sentences: BTreeMap<String, Vec<SentenceRecord>>,
    summaries: BTreeMap<String, String>,
}

impl<'a> Pipeline<'a> {
    pub fn new(
        corpus: &'a Corpus,
        client: &'a dyn ChatClient,
        store: RunStore,
        profile: ModelProfile,
        options: PipelineOptions,
    ) -> Self {
        let mut sentences = BTreeMap::new();
        for article in &corpus.articles {
            let mut boilerplate = BoilerplateSet::builtin_for(&article.source_label)
                .unwrap_or_else(|| BoilerplateSet::empty(&article.source_label));
            boilerplate
                .phrases
                .extend(options.extra_boilerplate.iter().map(|p| p.to_lowercase()));
            sentences.insert(
                article.id.clone(),
                crate::corpus::segment_and_qualify(article, &boilerplate),
            );
        }
        Pipeline {
            corpus,
            client,
            store,
            profile,
            options,
            refusals: RefusalDetector::default(),
            sentences,
            summaries: BTreeMap::new(),
        }
    }

    pub fn store(&self) -> &RunStore {
        &self.store
    }

    pub fn sentences_for(&self, article_id: &str) -> Option<&[SentenceRecord]> {
        self.sentences.get(article_id).map(Vec::as_slice)
    }

    /// Resolve the article summary used in identify queries: the corpus
    /// value when it passes the leak check, otherwise up to three
    /// model-generated candidates.
    pub fn ensure_summary(&mut self, article: &Article) -> Result<String> {
        if let Some(s) = self.summaries.get(&article.id) {
            return Ok(s.clone());
        }
        if let Some(s) = &article.summary {
            if !summary_leaks(s, article) {
                self.summaries.insert(article.id.clone(), s.clone());
                return Ok(s.clone());
            }
            log::warn!(
                "summary provided for {} leaks identifying details; regenerating",
                article.id
            );
        }
        let mut request = render_summary_request(article)?;
        for _ in 0..3 {
            let messages = [
                ChatMessage::system(HELPFUL_BASIC_SYSTEM),
                ChatMessage::user(request.clone()),
            ];
            let raw = match self.client.complete(&messages, &GenerationParams::sweep()) {
                Ok(r) => r,
                Err(Error::Aborted(m)) => return Err(Error::Aborted(m)),
                Err(e) => {
                    log::warn!("summary generation for {} failed: {e}", article.id);
                    continue;
                }
            };
            let candidate = extract_answer(&raw);
            if !candidate.is_empty()
                && !self.refusals.is_refusal(&candidate)
                && !summary_leaks(&candidate, article)
            {
                self.summaries.insert(article.id.clone(), candidate.clone());
                return Ok(candidate);
            }
            request.push_str(
                "\nThe previous summary revealed identifying details; avoid the title, the author, and the publication year.",
            );
        }
        Err(Error::SummaryUnavailable(article.id.clone()))
    }

    fn digest(messages: &[ChatMessage]) -> String {
        let mut hasher = Sha256::new();
        hasher.update(
            serde_json::to_string(messages)
                .unwrap_or_default()
                .as_bytes(),
        );
        hex::encode(&hasher.finalize()[..8])
    }

    /// Execute one attempt, or serve it from the resumed log. Only an
    /// abort error propagates; provider failures are recorded on the
    /// attempt itself.
    #[allow(clippy::too_many_arguments)]
    fn execute_attempt(
        &self,
        round: Round,
        strategy: PromptStrategy,
        article: &Article,
        kind: AttemptKind,
        sentence_index: Option<usize>,
        sample_number: usize,
        messages: &[ChatMessage],
        params: &GenerationParams,
    ) -> Result<AttemptRecord> {
        let key = attempt_key(
            round,
            strategy,
            &article.id,
            kind,
            sentence_index,
            sample_number,
        );
        if let Some(existing) = self.store.lookup(&key) {
            return Ok(existing.clone());
        }
        let mut record = AttemptRecord {
            article_id: article.id.clone(),
            kind,
            sentence_index,
            strategy,
            round,
            sample_number,
            transcript_digest: Self::digest(messages),
            raw_response: String::new(),
            extracted_answer: String::new(),
            match_outcome: None,
            refusal: false,
            identified: None,
            error: None,
            timestamp: chrono::Utc::now().to_rfc3339(),
        };
        match self.client.complete(messages, params) {
            Ok(raw) => {
                record.refusal = self.refusals.is_refusal(&raw);
                record.extracted_answer = if record.refusal {
                    String::new()
                } else {
                    extract_answer(&raw)
                };
                if kind == AttemptKind::Identify {
                    record.identified =
                        Some(crate::prompts::verify_identification(&raw, article).verified());
                }
                if kind == AttemptKind::FollowUp && !record.refusal {
                    if let Some(index) = sentence_index {
                        let sentences = &self.sentences[&article.id];
                        if sentences.get(index).is_some_and(|s| s.qualified) {
                            let window: Vec<&SentenceRecord> = sentences
                                .iter()
                                .filter(|s| s.qualified && s.index >= index)
                                .collect();
                            record.match_outcome = Some(score_attempt(
                                &record.extracted_answer,
                                &sentences[index],
                                &window,
                                self.options.p,
                                self.options.min_run,
                            )?);
                        }
                    }
                }
                record.raw_response = raw;
            }
            Err(Error::Aborted(m)) => return Err(Error::Aborted(m)),
            Err(e) => {
                log::warn!("attempt {key} failed: {e}");
                record.error = Some(e.to_string());
            }
        }
        Ok(record)
    }

    /// Run one article under one strategy and score it.
    fn run_article(
        &mut self,
        config: &RoundConfig,
        strategy: PromptStrategy,
        article: &Article,
    ) -> Result<Option<ArticleScorecard>> {
        let summary = match self.ensure_summary(article) {
            Ok(s) => s,
            Err(Error::Aborted(m)) => return Err(Error::Aborted(m)),
            Err(e) => {
                log::warn!("skipping {}: {e}", article.id);
                self.store.record_exclusion(&Exclusion {
                    article_id: article.id.clone(),
                    strategy,
                    round: config.round,
                    reason: format!("no usable summary: {e}"),
                })?;
                return Ok(None);
            }
        };
        let system = render_system(strategy, &self.profile)?;
        let sentences = self.sentences[&article.id].clone();

        // Identify first; its response is the assistant turn of every
        // follow-up transcript in the sweep rounds.
        let identify_messages = vec![
            ChatMessage::system(system.clone()),
            ChatMessage::user(render_identify_query(&summary, &article.source_label)?),
        ];
        let identify = self.execute_attempt(
            config.round,
            strategy,
            article,
            AttemptKind::Identify,
            None,
            0,
            &identify_messages,
            &config.params,
        )?;
        if identify.identified == Some(false) {
            log::debug!(
                "article {}: identification not verified under {}; continuing",
                article.id,
                strategy.label()
            );
        }
        // An errored or empty identify response would leave a hole in the
        // follow-up transcripts; fall back to the synthesized turn.
        let identify_response = if identify.raw_response.is_empty() {
            crate::prompts::render_identify_response(article)
        } else {
            identify.raw_response.clone()
        };

        let targets = config.sentence_window.targets(sentences.len());
        let mut work: Vec<(usize, usize, Vec<ChatMessage>)> = Vec::new();
        for &target in &targets {
            for sample in 0..config.samples_per_sentence {
                let messages = if strategy == PromptStrategy::MultiTurn {
                    let mut article_with_summary = article.clone();
                    article_with_summary.summary = Some(summary.clone());
                    let mut m = vec![ChatMessage::system(system.clone())];
                    m.extend(render_multiturn_transcript(
                        &article_with_summary,
                        &sentences,
                        target,
                    )?);
                    m
                } else {
                    let previous = &sentences[target - 1].raw_text;
                    vec![
                        ChatMessage::system(system.clone()),
                        identify_messages[1].clone(),
                        ChatMessage::assistant(identify_response.clone()),
                        ChatMessage::user(render_followup_query(&FollowupQuery::AfterSentence(
                            previous.clone(),
                        ))?),
                    ]
                };
                work.push((target, sample, messages));
            }
        }

        let this = &*self;
        let results = parallel_map(
            &work,
            self.options.max_in_flight,
            |(target, sample, messages)| {
                this.execute_attempt(
                    config.round,
                    strategy,
                    article,
                    AttemptKind::FollowUp,
                    Some(*target),
                    *sample,
                    messages,
                    &config.params,
                )
            },
        );
        let mut records = vec![identify];
        for r in results {
            records.push(r?);
        }
        self.store.append(&records)?;

        let errored = records.iter().filter(|r| r.error.is_some()).count();
        if errored == records.len() {
            self.store.record_exclusion(&Exclusion {
                article_id: article.id.clone(),
                strategy,
                round: config.round,
                reason: "all attempts errored".into(),
            })?;
            return Ok(None);
        }

        let refused = records.iter().any(|r| r.refusal);
        let attempted_qualified: Vec<usize> = targets
            .iter()
            .copied()
            .filter(|&i| sentences[i].qualified)
            .collect();
        let collapsed: Vec<AttemptMatch> = attempted_qualified
            .iter()
            .map(|&index| {
                let samples: Vec<AttemptMatch> = records
                    .iter()
                    .filter(|r| r.sentence_index == Some(index))
                    .filter_map(|r| r.match_outcome.clone())
                    .collect();
                collapse_samples(&samples)
            })
            .collect();
        let mut card = score_article(&collapsed, &sentences, &attempted_qualified, true);
        card.article_id = article.id.clone();
        card.strategy = strategy;
        card.round = config.round;
        card.excluded_refusal = refused;
        if refused {
            self.store.record_exclusion(&Exclusion {
                article_id: article.id.clone(),
                strategy,
                round: config.round,
                reason: "model refusal".into(),
            })?;
        }
        self.store.write_scorecard(&card)?;
        Ok(Some(card))
    }

    fn run_strategy(
        &mut self,
        config: &RoundConfig,
        strategy: PromptStrategy,
        articles: &[&Article],
    ) -> Result<Vec<ArticleScorecard>> {
        let mut cards = Vec::new();
        for article in articles {
            if let Some(card) = self.run_article(config, strategy, article)? {
                cards.push(card);
            }
        }
        let included: Vec<ArticleScorecard> = cards
            .iter()
            .filter(|c| !c.excluded_refusal)
            .cloned()
            .collect();
        if !included.is_empty() {
            let summary =
                summarize_round(&self.options.model_name, strategy, config.round, &included)?;
            self.store.write_summary(&summary)?;
        }
        Ok(cards)
    }

    /// Full sweep over the pre-cutoff corpus.
    pub fn run_round_one(&mut self) -> Result<Vec<ArticleScorecard>> {
        let config = RoundConfig::round_one();
        config.validate()?;
        let articles: Vec<&Article> = self.corpus.pre_cutoff().collect();
        self.run_strategy(&config, PromptStrategy::Simple, &articles)
    }

    /// Articles whose first-round non-positional score shows a near-hit.
    pub fn select_round_two(scorecards: &[ArticleScorecard]) -> Vec<String> {
        scorecards
            .iter()
            .filter(|c| !c.excluded_refusal && c.bitap_nonpos_score > 0.0)
            .map(|c| c.article_id.clone())
            .collect()
    }

    /// Re-test the selected articles under every prompt strategy.
    pub fn run_round_two(
        &mut self,
        selected: &[String],
    ) -> Result<BTreeMap<PromptStrategy, Vec<ArticleScorecard>>> {
        let config = RoundConfig::round_two();
        config.validate()?;
        let articles = self.articles_for(selected)?;
        let mut by_strategy = BTreeMap::new();
        for strategy in PromptStrategy::ROUND_TWO {
            let cards = self.run_strategy(&config, strategy, &articles)?;
            by_strategy.insert(strategy, cards);
        }
        Ok(by_strategy)
    }

    /// Union of articles with a near-hit under at least one second-round
    /// strategy.
    pub fn select_final(
        by_strategy: &BTreeMap<PromptStrategy, Vec<ArticleScorecard>>,
    ) -> Vec<String> {
        let mut ids = BTreeSet::new();
        for cards in by_strategy.values() {
            for c in cards {
                if !c.excluded_refusal && c.bitap_nonpos_score > 0.0 {
                    ids.insert(c.article_id.clone());
                }
            }
        }
        ids.into_iter().collect()
    }

    /// Multi-turn deep extraction over every sentence of the selected
    /// articles.
    pub fn run_final(&mut self, selected: &[String]) -> Result<Vec<ArticleScorecard>> {
        let config = RoundConfig::final_round();
        config.validate()?;
        let articles = self.articles_for(selected)?;
        self.run_strategy(&config, PromptStrategy::MultiTurn, &articles)
    }

    /// The identical sweep over post-cutoff articles; their scores validate
    /// the metrics.
    pub fn run_baseline(&mut self) -> Result<RoundSummary> {
        let config = RoundConfig::baseline();
        config.validate()?;
        let articles: Vec<&Article> = self.corpus.post_cutoff().collect();
        if articles.is_empty() {
            return Err(Error::EmptyBaseline);
        }
        let cards = self.run_strategy(&config, PromptStrategy::Simple, &articles)?;
        let included: Vec<ArticleScorecard> = cards
            .iter()
            .filter(|c| !c.excluded_refusal)
            .cloned()
            .collect();
        let summary = summarize_round(
            &self.options.model_name,
            PromptStrategy::Simple,
            Round::Baseline,
            &included,
        )?;
        for warning in baseline_sanity_warnings(&summary) {
            log::warn!("{warning}");
        }
        Ok(summary)
    }

    /// Generate-from-summary control for the selected articles.
    pub fn run_quote_control(&mut self, selected: &[String]) -> Result<Vec<QuoteCheckOutcome>> {
        let params = GenerationParams::sweep();
        let mut outcomes = Vec::new();
        for id in selected {
            let article = self
                .corpus
                .get(id)
                .ok_or_else(|| Error::UnknownArticle(id.clone()))?
                .clone();
            let summary = self.ensure_summary(&article)?;
            let mut with_summary = article.clone();
            with_summary.summary = Some(summary);
            match quotecheck::run_quote_control(
                &with_summary,
                &self.client,
                &params,
                self.options.p,
            ) {
                Ok(outcome) => {
                    self.store.write_json(
                        &format!("quotecheck/{}.json", sanitize_id(id)),
                        &serde_json::to_value(&outcome)?,
                    )?;
                    outcomes.push(outcome);
                }
                Err(Error::Aborted(m)) => return Err(Error::Aborted(m)),
                Err(e) => {
                    log::warn!("quote control unavailable for {id}: {e}");
                    self.store.write_json(
                        &format!("quotecheck/{}.json", sanitize_id(id)),
                        &serde_json::json!({ "article_id": id, "control_unavailable": e.to_string() }),
                    )?;
                }
            }
        }
        Ok(outcomes)
    }

    fn articles_for(&self, ids: &[String]) -> Result<Vec<&'a Article>> {
        ids.iter()
            .map(|id| {
                self.corpus
                    .get(id)
                    .ok_or_else(|| Error::UnknownArticle(id.clone()))
            })
            .collect()
    }
}

fn sanitize_id(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '-'
            }
        })
        .collect()
}

/// Warnings when the post-cutoff baseline shows nonzero extraction.
pub fn baseline_sanity_warnings(summary: &RoundSummary) -> Vec<String> {
    let mut warnings = Vec::new();
    for (metric, m) in &summary.metrics {
        if m.non_zero_count > 0 || m.mean > 0.0 {
            warnings.push(format!(
                "baseline sanity tripwire: post-cutoff {} is nonzero ({} articles, mean {:.4})",
                metric.label(),
                m.non_zero_count,
                m.mean
            ));
        }
    }
    warnings
}

#[derive(Debug, Clone, Serialize)]
pub struct StrategyOverlap {
    pub strategy: String,
    pub matched: BTreeSet<String>,
    pub exclusive_count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct OverlapReport {
    pub union: BTreeSet<String>,
    pub union_size: usize,
    pub per_strategy: Vec<StrategyOverlap>,
    /// Pairwise intersection sizes keyed "A & B".
    pub pairwise: BTreeMap<String, usize>,
}

/// Which articles produced near-hits under which strategies, and how much
/// the strategies agree.
pub fn overlap_analysis(
    by_strategy: &BTreeMap<PromptStrategy, Vec<ArticleScorecard>>,
) -> OverlapReport {
    let sets: BTreeMap<PromptStrategy, BTreeSet<String>> = by_strategy
        .iter()
        .map(|(s, cards)| {
            let matched = cards
                .iter()
                .filter(|c| !c.excluded_refusal && c.bitap_nonpos_score > 0.0)
                .map(|c| c.article_id.clone())
                .collect();
            (*s, matched)
        })
        .collect();
    let union: BTreeSet<String> = sets.values().flatten().cloned().collect();
    let per_strategy = sets
        .iter()
        .map(|(strategy, matched)| {
            let exclusive_count = matched
                .iter()
                .filter(|id| {
                    sets.iter()
                        .all(|(other, set)| other == strategy || !set.contains(*id))
                })
                .count();
            StrategyOverlap {
                strategy: strategy.label().to_string(),
                matched: matched.clone(),
                exclusive_count,
            }
        })
        .collect();
    let mut pairwise = BTreeMap::new();
    let keys: Vec<PromptStrategy> = sets.keys().copied().collect();
    for (i, a) in keys.iter().enumerate() {
        for b in keys.iter().skip(i + 1) {
            let count = sets[a].intersection(&sets[b]).count();
            pairwise.insert(format!("{} & {}", a.label(), b.label()), count);
        }
    }
    OverlapReport {
        union_size: union.len(),
        union,
        per_strategy,
        pairwise,
    }
}

/// Bounded-parallelism map preserving input order.
fn parallel_map<T: Sync, R: Send>(
    items: &[T],
    workers: usize,
    f: impl Fn(&T) -> R + Sync,
) -> Vec<R> {
    if items.is_empty() {
        return Vec::new();
    }
    let workers = workers.max(1).min(items.len());
    if workers == 1 {
        return items.iter().map(&f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<R>>> = items.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= items.len() {
                    break;
                }
                let result = f(&items[i]);
                *slots[i].lock().unwrap() = Some(result);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().unwrap().expect("worker filled every slot"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::Round;

    fn card(id: &str, strategy: PromptStrategy, nonpos: f64, excluded: bool) -> ArticleScorecard {
        ArticleScorecard {
            article_id: id.into(),
            strategy,
            round: Round::Two,
            emp_score: 0.0,
            bitap_pos_score: 0.0,
            bitap_nonpos_score: nonpos,
            trm_score: 0.0,
            bitap_pos_noquote_score: 0.0,
            qualified_count: 5,
            excluded_refusal: excluded,
        }
    }

    #[test]
    fn overlap_report_counts_union_and_exclusives() {
        // SIMPLE = {1, 2}, ICL = {2, 3}: union 3, SIMPLE-exclusive 1.
        let mut by_strategy = BTreeMap::new();
        by_strategy.insert(
            PromptStrategy::Simple,
            vec![
                card("1", PromptStrategy::Simple, 0.1, false),
                card("2", PromptStrategy::Simple, 0.2, false),
            ],
        );
        by_strategy.insert(
            PromptStrategy::Icl,
            vec![
                card("2", PromptStrategy::Icl, 0.1, false),
                card("3", PromptStrategy::Icl, 0.1, false),
            ],
        );
        let report = overlap_analysis(&by_strategy);
        assert_eq!(report.union_size, 3);
        let simple = report
            .per_strategy
            .iter()
            .find(|s| s.strategy == "SIMPLE")
            .unwrap();
        assert_eq!(simple.exclusive_count, 1);
        assert_eq!(report.pairwise["SIMPLE & ICL"], 1);
    }

    #[test]
    fn overlap_identical_sets_have_no_exclusives() {
        let mut by_strategy = BTreeMap::new();
        for s in [PromptStrategy::Simple, PromptStrategy::Icl] {
            by_strategy.insert(s, vec![card("1", s, 0.1, false), card("2", s, 0.1, false)]);
        }
        let report = overlap_analysis(&by_strategy);
        assert_eq!(report.union_size, 2);
        for s in &report.per_strategy {
            assert_eq!(s.exclusive_count, 0);
        }
    }

    #[test]
    fn overlap_disjoint_sets_sum_to_union() {
        let mut by_strategy = BTreeMap::new();
        by_strategy.insert(
            PromptStrategy::Simple,
            vec![card("1", PromptStrategy::Simple, 0.1, false)],
        );
        by_strategy.insert(
            PromptStrategy::Icl,
            vec![card("2", PromptStrategy::Icl, 0.1, false)],
        );
        let report = overlap_analysis(&by_strategy);
        assert_eq!(report.union_size, 2);
        assert_eq!(report.pairwise["SIMPLE & ICL"], 0);
    }

    #[test]
    fn excluded_articles_never_reach_selection() {
        let cards = vec![
            card("a", PromptStrategy::Simple, 0.5, true),
            card("b", PromptStrategy::Simple, 0.5, false),
            card("c", PromptStrategy::Simple, 0.0, false),
        ];
        assert_eq!(Pipeline::select_round_two(&cards), vec!["b".to_string()]);
    }

    #[test]
    fn parallel_map_preserves_order() {
        let items: Vec<usize> = (0..100).collect();
        let out = parallel_map(&items, 8, |&i| i * 2);
        assert_eq!(out, (0..100).map(|i| i * 2).collect::<Vec<_>>());
    }
}
