//! Deterministic synthetic corpora for offline runs, demos, and tests.
//!
//! Every article gets a disjoint vocabulary (`w<article>s<sentence>t<word>`),
//! so cross-article matches cannot happen by accident, and a summary built
//! from its own body words, so the mock can resolve identify queries.

use chrono::NaiveDate;

use crate::corpus::{Article, Corpus, CutoffClass};

/// Number ordinal -> deterministic pre/post-cutoff publish date.
fn publish_date(ordinal: usize, pre: bool) -> NaiveDate {
    let base = if pre {
        NaiveDate::from_ymd_opt(2021, 3, 1).unwrap()
    } else {
        NaiveDate::from_ymd_opt(2024, 2, 1).unwrap()
    };
    base + chrono::Duration::days((ordinal % 300) as i64)
}

/// Build one synthetic article with `sentences` sentences of `words` words
/// each.
pub fn synth_article(ordinal: usize, pre: bool, sentences: usize, words: usize) -> Article {
    assert!(sentences >= 1 && words >= 2);
    let mut body = String::new();
    for s in 0..sentences {
        if s > 0 {
            body.push(' ');
        }
        for w in 0..words {
            let token = format!("w{ordinal}s{s}t{w}");
            if w == 0 {
                let mut chars = token.chars();
                let first = chars.next().unwrap().to_uppercase().to_string();
                body.push_str(&first);
                body.push_str(chars.as_str());
            } else {
                body.push(' ');
                body.push_str(&token);
            }
        }
        body.push('.');
    }
    let summary = format!(
        "the report examining w{ordinal}s0t1 and w{ordinal}s0t2 alongside w{ordinal}s1t1 patterns"
    );
    Article {
        id: format!("syn-{ordinal:03}"),
        source_label: "SYN".into(),
        title: format!("Dispatch Number {ordinal}"),
        authors: vec![format!("Jordan Byline{ordinal}")],
        publish_date: publish_date(ordinal, pre),
        section: "Synthetic".into(),
        body,
        cutoff_class: if pre {
            CutoffClass::PreCutoff
        } else {
            CutoffClass::PostCutoff
        },
        summary: Some(summary),
    }
}

/// A corpus of `pre` pre-cutoff and `post` post-cutoff articles.
pub fn synth_corpus(pre: usize, post: usize, sentences: usize, words: usize) -> Corpus {
    let mut articles = Vec::with_capacity(pre + post);
    for n in 0..pre {
        articles.push(synth_article(n, true, sentences, words));
    }
    for n in 0..post {
        articles.push(synth_article(pre + n, false, sentences, words));
    }
    Corpus { articles }
}

/// Append a quotation-bearing sentence to an article body. The quote
/// dominates the sentence, so it counts as a quote sentence for the
/// no-quotes metric variant.
pub fn append_quote_sentence(article: &mut Article, quote: &str) {
    article.body.push_str(&format!(
        " He told the assembled reporters, \"{quote}\" before leaving."
    ));
}

/// An article whose only qualified sentences are quote-dominated; every
/// match against it is a quote match.
pub fn quote_dominated_article(ordinal: usize, quote_sentences: usize) -> Article {
    assert!(quote_sentences >= 1);
    let mut body = String::new();
    for s in 0..quote_sentences {
        if s > 0 {
            body.push(' ');
        }
        body.push_str(&format!(
            "He said, \"q{ordinal}s{s}a quoted q{ordinal}s{s}b remark q{ordinal}s{s}c spanning q{ordinal}s{s}d words q{ordinal}s{s}e here\" then."
        ));
        body.push_str(" Short aside only.");
    }
    let summary = format!(
        "the briefing quoting q{ordinal}s0a and q{ordinal}s0b alongside q{ordinal}s0c remarks"
    );
    Article {
        id: format!("syn-quote-{ordinal:03}"),
        source_label: "SYN".into(),
        title: format!("Quoted Briefing {ordinal}"),
        authors: vec![format!("Jordan Byline{ordinal}")],
        publish_date: publish_date(ordinal, true),
        section: "Synthetic".into(),
        body,
        cutoff_class: CutoffClass::PreCutoff,
        summary: Some(summary),
    }
}
