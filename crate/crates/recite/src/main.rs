//! Command-line entry point: ingest a corpus, run the extraction rounds
//! against a provider or the offline mock, and render reports from the
//! persisted run state.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};

use recite::corpus::{ingest_corpus, write_corpus_jsonl, Corpus};
use recite::metrics::Metric;
use recite::modelclient::{
    CachedClient, ChatClient, HttpChatClient, MockMemoryClient, MockMemoryProfile, ProviderConfig,
    ResponseCache,
};
use recite::pipeline::{overlap_analysis, Pipeline, PipelineOptions, Round, RunStore};
use recite::prompts::{ModelProfile, PromptStrategy};
use recite::quotecheck::recompute_noquote_scores;
use recite::report::{emit_article_highlight, emit_distribution, emit_round_table};
use recite::synth;

#[derive(Parser)]
#[command(
    name = "recite",
    version,
    about = "Measure sentence-level recitation of a corpus by a chat model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Corpus file, one JSON record per line.
    #[arg(long)]
    corpus: PathBuf,
    /// Knowledge-cutoff date separating main articles from the baseline.
    #[arg(long, default_value = "2023-10-31")]
    cutoff_date: String,
    /// `mock` or `http`.
    #[arg(long, default_value = "mock")]
    provider: String,
    /// Mock memory profile (JSON) or provider config (JSON) per --provider.
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Model identity spliced into system prompts (JSON).
    #[arg(long)]
    model_profile: Option<PathBuf>,
    #[arg(long, default_value = "runs/run")]
    run_dir: PathBuf,
    /// Error fraction for the K budget.
    #[arg(long, default_value_t = 0.1)]
    p: f64,
    /// Minimum common-run length for the token-range score.
    #[arg(long, default_value_t = 3)]
    min_run: usize,
    #[arg(long, default_value_t = 1)]
    max_in_flight: usize,
    /// Reuse any attempts already in the run directory.
    #[arg(long)]
    resume: bool,
    /// Extra boilerplate phrases, one per line, `#` comments.
    #[arg(long)]
    boilerplate: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a corpus file and snapshot it into the run directory.
    Ingest(RunArgs),
    /// Full first sweep over the pre-cutoff corpus.
    Round1(RunArgs),
    /// Prompt-variant round on the articles round 1 flagged.
    Round2(RunArgs),
    /// Multi-turn deep extraction on the articles round 2 flagged.
    Final(RunArgs),
    /// The identical sweep over post-cutoff articles.
    Baseline(RunArgs),
    /// Generate-from-summary quote control for the final-round articles.
    Quotecheck(RunArgs),
    /// Run every stage in order.
    All(RunArgs),
    /// Render tables, distributions, and highlights from a run directory.
    Report {
        #[arg(long, default_value = "runs/run")]
        run_dir: PathBuf,
        /// Corpus file; defaults to the snapshot inside the run directory.
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, default_value = "2023-10-31")]
        cutoff_date: String,
        #[arg(long, default_value = "text")]
        format: String,
        #[arg(long, value_enum, default_value_t = Metric::BitapPositional)]
        metric: Metric,
        #[arg(long, default_value_t = 0.2)]
        threshold: f64,
    },
    /// Write a synthetic demo corpus and mock profile.
    Demo {
        #[arg(long, default_value = "demo")]
        out: PathBuf,
    },
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Ingest(args) => cmd_ingest(&args),
        Command::Round1(args) => with_pipeline(&args, true, |p| {
            let cards = p.run_round_one()?;
            let summaries = p.store().load_summaries(Round::One)?;
            print_table(&summaries, Round::One)?;
            println!(
                "round 1 complete: {} articles scored, {} with near-hits",
                cards.len(),
                Pipeline::select_round_two(&cards).len()
            );
            Ok(())
        }),
        Command::Round2(args) => with_pipeline(&args, false, |p| {
            let round1 = p.store().load_scorecards(Round::One, None)?;
            anyhow::ensure!(
                !round1.is_empty(),
                "no round-1 scorecards in the run directory"
            );
            let selected = Pipeline::select_round_two(&round1);
            if selected.is_empty() {
                println!("round 1 produced no near-hits; nothing to re-test");
                return Ok(());
            }
            let by_strategy = p.run_round_two(&selected)?;
            let overlap = overlap_analysis(&by_strategy);
            p.store()
                .write_json("overlap.json", &serde_json::to_value(&overlap)?)?;
            let summaries = p.store().load_summaries(Round::Two)?;
            print_table(&summaries, Round::Two)?;
            println!(
                "round 2 complete on {} articles; near-hit union {}",
                selected.len(),
                overlap.union_size
            );
            Ok(())
        }),
        Command::Final(args) => with_pipeline(&args, false, |p| {
            let selected = final_selection(p)?;
            if selected.is_empty() {
                println!("round 2 produced no near-hits; nothing to extract");
                return Ok(());
            }
            p.run_final(&selected)?;
            let summaries = p.store().load_summaries(Round::Final)?;
            print_table(&summaries, Round::Final)?;
            Ok(())
        }),
        Command::Baseline(args) => with_pipeline(&args, false, |p| {
            let summary = p.run_baseline()?;
            print_table(&[summary], Round::Baseline)?;
            Ok(())
        }),
        Command::Quotecheck(args) => with_pipeline(&args, false, run_quotecheck),
        Command::All(args) => with_pipeline(&args, true, |p| {
            let cards = p.run_round_one()?;
            print_table(&p.store().load_summaries(Round::One)?, Round::One)?;
            let baseline = p.run_baseline()?;
            print_table(&[baseline], Round::Baseline)?;
            let selected = Pipeline::select_round_two(&cards);
            if selected.is_empty() {
                println!("round 1 produced no near-hits; stopping after the baseline");
                return Ok(());
            }
            let by_strategy = p.run_round_two(&selected)?;
            let overlap = overlap_analysis(&by_strategy);
            p.store()
                .write_json("overlap.json", &serde_json::to_value(&overlap)?)?;
            print_table(&p.store().load_summaries(Round::Two)?, Round::Two)?;
            let final_ids = Pipeline::select_final(&by_strategy);
            if final_ids.is_empty() {
                println!("round 2 produced no near-hits; stopping");
                return Ok(());
            }
            p.run_final(&final_ids)?;
            print_table(&p.store().load_summaries(Round::Final)?, Round::Final)?;
            run_quotecheck(p)?;
            println!(
                "run complete; see {} for artifacts",
                p.store().run_dir().display()
            );
            Ok(())
        }),
        Command::Report {
            run_dir,
            corpus,
            cutoff_date,
            format,
            metric,
            threshold,
        } => cmd_report(
            &run_dir,
            corpus.as_deref(),
            &cutoff_date,
            &format,
            metric,
            threshold,
        ),
        Command::Demo { out } => cmd_demo(&out),
    }
}

fn parse_cutoff(text: &str) -> anyhow::Result<NaiveDate> {
    NaiveDate::parse_from_str(text, "%Y-%m-%d")
        .with_context(|| format!("cutoff date {text:?} is not YYYY-MM-DD"))
}

fn load_corpus(args: &RunArgs) -> anyhow::Result<Corpus> {
    let cutoff = parse_cutoff(&args.cutoff_date)?;
    Ok(ingest_corpus(&args.corpus, cutoff)?)
}

/// Mock profile used when none is supplied: memorize every fifth
/// pre-cutoff article with light substitution noise.
fn default_mock_profile(corpus: &Corpus) -> MockMemoryProfile {
    let memorized = corpus
        .pre_cutoff()
        .enumerate()
        .filter(|(i, _)| i % 5 == 0)
        .map(|(_, a)| a.id.clone())
        .collect();
    MockMemoryProfile {
        memorized_ids: memorized,
        substitution_rate: 0.02,
        rng_seed: 17,
        ..Default::default()
    }
}

/// Returns the client plus the row label for summaries, and caps the
/// worker count at the provider's `max_in_flight` when one is configured.
fn build_client(
    args: &RunArgs,
    corpus: &Corpus,
) -> anyhow::Result<(Box<dyn ChatClient>, String, usize)> {
    match args.provider.as_str() {
        "mock" => {
            let profile = match &args.profile {
                Some(path) => serde_json::from_str(&fs::read_to_string(path)?)
                    .with_context(|| format!("parsing mock profile {}", path.display()))?,
                None => default_mock_profile(corpus),
            };
            Ok((
                Box::new(MockMemoryClient::new(profile, corpus)),
                "mock".to_string(),
                args.max_in_flight,
            ))
        }
        "http" => {
            let path = args
                .profile
                .as_ref()
                .context("--provider http requires --profile with a provider config")?;
            let config: ProviderConfig = serde_json::from_str(&fs::read_to_string(path)?)
                .with_context(|| format!("parsing provider config {}", path.display()))?;
            let model = config.model.clone();
            let workers = args.max_in_flight.min(config.max_in_flight.max(1));
            let cache = ResponseCache::new(args.run_dir.join("cache"));
            Ok((
                Box::new(CachedClient::new(HttpChatClient::new(config)?, cache)),
                model,
                workers,
            ))
        }
        other => bail!("unknown provider {other:?}; use mock or http"),
    }
}

fn load_model_profile(args: &RunArgs) -> anyhow::Result<ModelProfile> {
    let profile: ModelProfile = match &args.model_profile {
        Some(path) => serde_json::from_str(&fs::read_to_string(path)?)
            .with_context(|| format!("parsing model profile {}", path.display()))?,
        None => ModelProfile::default(),
    };
    profile.validate()?;
    Ok(profile)
}

fn with_pipeline(
    args: &RunArgs,
    fresh_ok: bool,
    body: impl FnOnce(&mut Pipeline) -> anyhow::Result<()>,
) -> anyhow::Result<()> {
    let corpus = load_corpus(args)?;
    let (client, model_name, max_in_flight) = build_client(args, &corpus)?;
    // Stages that extend an existing run always reuse its log; a fresh
    // sweep starts over unless --resume asks otherwise.
    let resume = args.resume || !fresh_ok;
    let store = RunStore::open(&args.run_dir, resume)?;
    store.write_config(&serde_json::json!({
        "corpus": args.corpus.display().to_string(),
        "cutoff_date": args.cutoff_date,
        "provider": args.provider,
        "p": args.p,
        "min_run": args.min_run,
        "model": model_name,
    }))?;
    fs::write(
        args.run_dir.join("corpus.jsonl"),
        write_corpus_jsonl(&corpus),
    )?;
    let extra_boilerplate = match &args.boilerplate {
        Some(path) => fs::read_to_string(path)?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_string)
            .collect(),
        None => Vec::new(),
    };
    let options = PipelineOptions {
        p: args.p,
        min_run: args.min_run,
        max_in_flight,
        model_name,
        extra_boilerplate,
    };
    let profile = load_model_profile(args)?;
    let mut pipeline = Pipeline::new(&corpus, client.as_ref(), store, profile, options);
    body(&mut pipeline)
}

fn final_selection(p: &mut Pipeline) -> anyhow::Result<Vec<String>> {
    let mut by_strategy = BTreeMap::new();
    for strategy in PromptStrategy::ROUND_TWO {
        by_strategy.insert(
            strategy,
            p.store().load_scorecards(Round::Two, Some(strategy))?,
        );
    }
    Ok(Pipeline::select_final(&by_strategy))
}

fn run_quotecheck(p: &mut Pipeline) -> anyhow::Result<()> {
    let final_cards = p.store().load_scorecards(Round::Final, None)?;
    anyhow::ensure!(
        !final_cards.is_empty(),
        "no final-round scorecards; run the final round first"
    );
    let ids: Vec<String> = final_cards.iter().map(|c| c.article_id.clone()).collect();
    let outcomes = p.run_quote_control(&ids)?;
    let flags: BTreeMap<String, bool> = outcomes
        .iter()
        .map(|o| (o.article_id.clone(), o.has_generic_quote))
        .collect();
    let annotated = recompute_noquote_scores(&final_cards, &flags);
    p.store().write_json(
        "quotecheck/annotated_scorecards.json",
        &serde_json::to_value(&annotated)?,
    )?;
    let distribution = emit_distribution(&final_cards, Metric::BitapPositionalNoQuotes, 0.2);
    p.store().write_json(
        "quotecheck/noquote_distribution.json",
        &serde_json::to_value(&distribution)?,
    )?;
    println!(
        "quote control complete: {} of {} articles have generic quotes",
        flags.values().filter(|v| **v).count(),
        flags.len()
    );
    Ok(())
}

fn print_table(summaries: &[recite::metrics::RoundSummary], round: Round) -> anyhow::Result<()> {
    if summaries.is_empty() {
        println!("(no summaries for {round})");
        return Ok(());
    }
    let table = emit_round_table(summaries, round)?;
    println!("{}", table.to_text());
    Ok(())
}

fn cmd_ingest(args: &RunArgs) -> anyhow::Result<()> {
    let corpus = load_corpus(args)?;
    fs::create_dir_all(&args.run_dir)?;
    fs::write(
        args.run_dir.join("corpus.jsonl"),
        write_corpus_jsonl(&corpus),
    )?;
    let pre = corpus.pre_cutoff().count();
    let post = corpus.post_cutoff().count();
    println!(
        "ingested {} articles ({pre} pre-cutoff, {post} post-cutoff) into {}",
        corpus.articles.len(),
        args.run_dir.display()
    );
    Ok(())
}

fn cmd_report(
    run_dir: &Path,
    corpus_path: Option<&Path>,
    cutoff_date: &str,
    format: &str,
    metric: Metric,
    threshold: f64,
) -> anyhow::Result<()> {
    let store = RunStore::open(run_dir, true)?;
    for round in [Round::One, Round::Baseline, Round::Two, Round::Final] {
        let summaries = store.load_summaries(round)?;
        if summaries.is_empty() {
            continue;
        }
        let table = emit_round_table(&summaries, round)?;
        match format {
            "json" => println!("{}", serde_json::to_string_pretty(&table)?),
            "csv" => println!("{}", table.to_csv()),
            _ => println!("{}", table.to_text()),
        }
    }

    let final_cards = store.load_scorecards(Round::Final, None)?;
    if !final_cards.is_empty() {
        let distribution = emit_distribution(&final_cards, metric, threshold);
        store.write_json("distribution.json", &serde_json::to_value(&distribution)?)?;
        println!(
            "{} articles above the {:.0}% threshold on {}: {:?}",
            distribution.above_threshold_ids.len(),
            threshold * 100.0,
            metric.label(),
            distribution.above_threshold_ids
        );
    }

    // Highlights need article bodies: prefer the snapshot in the run dir.
    let snapshot = run_dir.join("corpus.jsonl");
    let corpus_file = corpus_path.unwrap_or(&snapshot);
    if corpus_file.exists() && !final_cards.is_empty() {
        let corpus = ingest_corpus(corpus_file, parse_cutoff(cutoff_date)?)?;
        let highlights_dir = run_dir.join("highlights");
        fs::create_dir_all(&highlights_dir)?;
        for card in &final_cards {
            let Some(article) = corpus.get(&card.article_id) else {
                continue;
            };
            let sentences = recite::corpus::segment_sentences(article);
            let attempts: Vec<_> = store
                .attempts()
                .filter(|a| a.round == Round::Final && a.article_id == card.article_id)
                .collect();
            let report = emit_article_highlight(article, &sentences, &attempts);
            let safe: String = card
                .article_id
                .chars()
                .map(|c| {
                    if c.is_alphanumeric() || c == '-' || c == '_' {
                        c
                    } else {
                        '-'
                    }
                })
                .collect();
            fs::write(highlights_dir.join(format!("{safe}.txt")), report.to_text())?;
            fs::write(
                highlights_dir.join(format!("{safe}.json")),
                serde_json::to_string_pretty(&report)?,
            )?;
        }
        println!("highlights written to {}", highlights_dir.display());
    }
    Ok(())
}

fn cmd_demo(out: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(out)?;
    let corpus = synth::synth_corpus(25, 10, 12, 12);
    fs::write(out.join("corpus.jsonl"), write_corpus_jsonl(&corpus))?;
    let profile = default_mock_profile(&corpus);
    fs::write(
        out.join("mock_profile.json"),
        serde_json::to_string_pretty(&profile)?,
    )?;
    println!("demo corpus and mock profile written to {}", out.display());
    println!(
        "try: recite all --corpus {}/corpus.jsonl --provider mock --profile {}/mock_profile.json --run-dir runs/demo",
        out.display(),
        out.display()
    );
    Ok(())
}
