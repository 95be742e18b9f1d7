//! Run-state directory: `config.json`, the append-only `attempts.log`
//! (one JSON record per line), `scorecards/`, `summaries/`, and the
//! exclusion log. Reopening with `resume` replays the attempt log so
//! finished work is never redone.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::metrics::{ArticleScorecard, RoundSummary};
use crate::prompts::PromptStrategy;

use super::{AttemptKind, AttemptRecord, Round};

/// Unique key of an attempt within a run.
pub fn attempt_key(
    round: Round,
    strategy: PromptStrategy,
    article_id: &str,
    kind: AttemptKind,
    sentence_index: Option<usize>,
    sample_number: usize,
) -> String {
    let slot = match (kind, sentence_index) {
        (AttemptKind::Identify, _) => "identify".to_string(),
        (AttemptKind::FollowUp, Some(i)) => format!("s{i}"),
        (AttemptKind::FollowUp, None) => "s?".to_string(),
    };
    format!(
        "{}/{}/{}/{}/{}",
        round.slug(),
        strategy.label(),
        article_id,
        slot,
        sample_number
    )
}

fn record_key(r: &AttemptRecord) -> String {
    attempt_key(
        r.round,
        r.strategy,
        &r.article_id,
        r.kind,
        r.sentence_index,
        r.sample_number,
    )
}

fn sanitize(id: &str) -> String {
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

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub article_id: String,
    pub strategy: PromptStrategy,
    pub round: Round,
    pub reason: String,
}

pub struct RunStore {
    run_dir: PathBuf,
    log: File,
    existing: BTreeMap<String, AttemptRecord>,
}

impl RunStore {
    /// Open (or create) a run directory. With `resume`, previously logged
    /// attempts are loaded and will be served instead of re-executed.
    pub fn open(run_dir: &Path, resume: bool) -> Result<Self> {
        fs::create_dir_all(run_dir)?;
        fs::create_dir_all(run_dir.join("scorecards"))?;
        fs::create_dir_all(run_dir.join("summaries"))?;
        let log_path = run_dir.join("attempts.log");
        let mut existing = BTreeMap::new();
        if resume && log_path.exists() {
            let reader = BufReader::new(File::open(&log_path)?);
            for line in reader.lines() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let record: AttemptRecord = serde_json::from_str(&line)?;
                existing.insert(record_key(&record), record);
            }
        } else if log_path.exists() {
            fs::remove_file(&log_path)?;
        }
        let log = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&log_path)?;
        Ok(RunStore {
            run_dir: run_dir.to_path_buf(),
            log,
            existing,
        })
    }

    pub fn run_dir(&self) -> &Path {
        &self.run_dir
    }

    pub fn lookup(&self, key: &str) -> Option<&AttemptRecord> {
        self.existing.get(key)
    }

    /// Append records not already present, in the order given.
    pub fn append(&mut self, records: &[AttemptRecord]) -> Result<()> {
        for record in records {
            let key = record_key(record);
            if self.existing.contains_key(&key) {
                continue;
            }
            let mut line = serde_json::to_string(record)?;
            line.push('\n');
            self.log.write_all(line.as_bytes())?;
            self.existing.insert(key, record.clone());
        }
        self.log.flush()?;
        Ok(())
    }

    pub fn attempts(&self) -> impl Iterator<Item = &AttemptRecord> {
        self.existing.values()
    }

    pub fn write_config(&self, config: &serde_json::Value) -> Result<()> {
        fs::write(
            self.run_dir.join("config.json"),
            serde_json::to_string_pretty(config)?,
        )?;
        Ok(())
    }

    pub fn write_scorecard(&self, card: &ArticleScorecard) -> Result<()> {
        let name = format!(
            "{}_{}_{}.json",
            card.round.slug(),
            sanitize(card.strategy.label()),
            sanitize(&card.article_id)
        );
        fs::write(
            self.run_dir.join("scorecards").join(name),
            serde_json::to_string_pretty(card)?,
        )?;
        Ok(())
    }

    /// All persisted scorecards for a round, optionally narrowed to one
    /// strategy.
    pub fn load_scorecards(
        &self,
        round: Round,
        strategy: Option<PromptStrategy>,
    ) -> Result<Vec<ArticleScorecard>> {
        let mut cards = Vec::new();
        for entry in fs::read_dir(self.run_dir.join("scorecards"))? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let card: ArticleScorecard = serde_json::from_str(&fs::read_to_string(&path)?)?;
            if card.round == round && strategy.is_none_or(|s| card.strategy == s) {
                cards.push(card);
            }
        }
        cards.sort_by(|a, b| a.article_id.cmp(&b.article_id));
        Ok(cards)
    }

    pub fn write_summary(&self, summary: &RoundSummary) -> Result<()> {
        let name = format!(
            "{}_{}.json",
            summary.round.slug(),
            sanitize(summary.strategy.label())
        );
        fs::write(
            self.run_dir.join("summaries").join(name),
            serde_json::to_string_pretty(summary)?,
        )?;
        Ok(())
    }

    pub fn load_summaries(&self, round: Round) -> Result<Vec<RoundSummary>> {
        let mut out = Vec::new();
        for entry in fs::read_dir(self.run_dir.join("summaries"))? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let summary: RoundSummary = serde_json::from_str(&fs::read_to_string(&path)?)?;
            if summary.round == round {
                out.push(summary);
            }
        }
        out.sort_by_key(|s| s.strategy);
        Ok(out)
    }

    pub fn record_exclusion(&mut self, exclusion: &Exclusion) -> Result<()> {
        let path = self.run_dir.join("exclusions.log");
        let mut file = OpenOptions::new().create(true).append(true).open(path)?;
        let mut line = serde_json::to_string(exclusion)?;
        line.push('\n');
        file.write_all(line.as_bytes())?;
        Ok(())
    }

    pub fn load_exclusions(&self) -> Result<Vec<Exclusion>> {
        let path = self.run_dir.join("exclusions.log");
        if !path.exists() {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        for line in BufReader::new(File::open(path)?).lines() {
            let line = line?;
            if !line.trim().is_empty() {
                out.push(serde_json::from_str(&line)?);
            }
        }
        Ok(out)
    }

    /// Write an auxiliary JSON artifact (overlap report, quote-control
    /// outputs) under the run directory.
    pub fn write_json(&self, relative: &str, value: &serde_json::Value) -> Result<()> {
        let path = self.run_dir.join(relative);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, serde_json::to_string_pretty(value)?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::AttemptMatch;

    fn record(article: &str, index: usize, sample: usize) -> AttemptRecord {
        AttemptRecord {
            article_id: article.to_string(),
            kind: AttemptKind::FollowUp,
            sentence_index: Some(index),
            strategy: PromptStrategy::Simple,
            round: Round::One,
            sample_number: sample,
            transcript_digest: "d".into(),
            raw_response: "r".into(),
            extracted_answer: "a".into(),
            match_outcome: Some(AttemptMatch::default()),
            refusal: false,
            identified: None,
            error: None,
            timestamp: "t".into(),
        }
    }

    #[test]
    fn append_skips_duplicates_and_resume_reloads() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = RunStore::open(dir.path(), false).unwrap();
        store
            .append(&[record("a", 1, 0), record("a", 1, 1)])
            .unwrap();
        store
            .append(&[record("a", 1, 0), record("a", 2, 0)])
            .unwrap();
        drop(store);

        let store = RunStore::open(dir.path(), true).unwrap();
        assert_eq!(store.attempts().count(), 3);
        assert!(store
            .lookup(&attempt_key(
                Round::One,
                PromptStrategy::Simple,
                "a",
                AttemptKind::FollowUp,
                Some(2),
                0
            ))
            .is_some());
    }

    #[test]
    fn scorecards_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let store = RunStore::open(dir.path(), false).unwrap();
        let card = ArticleScorecard {
            article_id: "a/b weird id".into(),
            strategy: PromptStrategy::Icl,
            round: Round::Two,
            emp_score: 0.5,
            bitap_pos_score: 0.5,
            bitap_nonpos_score: 0.5,
            trm_score: 0.25,
            bitap_pos_noquote_score: 0.5,
            qualified_count: 4,
            excluded_refusal: false,
        };
        store.write_scorecard(&card).unwrap();
        let cards = store
            .load_scorecards(Round::Two, Some(PromptStrategy::Icl))
            .unwrap();
        assert_eq!(cards, vec![card]);
        assert!(store.load_scorecards(Round::One, None).unwrap().is_empty());
    }
}
