//! Word-level tokenization and approximate-matching primitives.

pub mod bitap;
pub mod dp;
pub mod runs;
pub mod tokenize;

pub use bitap::{bitap_search, k_for, BitapMatch, MAX_BITAP_PATTERN};
pub use dp::{levenshtein, min_distance_over_substrings};
pub use runs::{common_runs, total_run_tokens, TokenRun};
pub use tokenize::{is_word_token, normalize_quotes, tokenize, word_count, TokenOrigin, TokenSeq};

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn pattern_strategy() -> impl Strategy<Value = Vec<u8>> {
        proptest::collection::vec(0u8..3, 1..=6)
    }

    fn text_strategy() -> impl Strategy<Value = Vec<u8>> {
        proptest::collection::vec(0u8..3, 0..=10)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        /// Bit-parallel result agrees with the DP oracle on verdict and
        /// error count for small alphabets.
        #[test]
        fn bitap_matches_dp_oracle(pattern in pattern_strategy(), text in text_strategy(), k in 0usize..=2) {
            let (dist, _) = min_distance_over_substrings(&pattern, &text);
            let found = bitap_search(&pattern, &text, k).unwrap();
            if dist <= k {
                let m = found.expect("oracle says match");
                prop_assert_eq!(m.errors, dist);
            } else {
                prop_assert!(found.is_none());
            }
        }

        /// K = 0 reduces to exact substring search.
        #[test]
        fn zero_budget_is_exact_substring_search(pattern in pattern_strategy(), text in text_strategy()) {
            let found = bitap_search(&pattern, &text, 0).unwrap();
            let naive = (pattern.len()..=text.len())
                .any(|end| text[end - pattern.len()..end] == pattern[..]);
            prop_assert_eq!(found.is_some(), naive);
            if let Some(m) = found {
                prop_assert_eq!(m.errors, 0);
            }
        }

        /// A larger budget never loses a match and never worsens the errors.
        #[test]
        fn budget_monotonicity(pattern in pattern_strategy(), text in text_strategy(), k in 0usize..=2) {
            if let Some(m) = bitap_search(&pattern, &text, k).unwrap() {
                let m2 = bitap_search(&pattern, &text, k + 1).unwrap().expect("monotone");
                prop_assert!(m2.errors <= m.errors);
            }
        }

        /// Selected runs cover at most min(|gen|, |src|) tokens and stay
        /// disjoint in both sequences.
        #[test]
        fn run_totals_bounded(gen in proptest::collection::vec(0u8..4, 0..=16),
                              src in proptest::collection::vec(0u8..4, 0..=16),
                              min_run in 1usize..=3) {
            let runs = common_runs(&gen, &src, min_run);
            prop_assert!(total_run_tokens(&runs) <= gen.len().min(src.len()));
            let mut gen_seen = vec![false; gen.len()];
            let mut src_seen = vec![false; src.len()];
            for r in &runs {
                prop_assert!(r.len >= min_run);
                for g in r.gen_span() {
                    prop_assert!(!gen_seen[g]);
                    gen_seen[g] = true;
                }
                for s in r.src_span() {
                    prop_assert!(!src_seen[s]);
                    src_seen[s] = true;
                }
            }
        }

        /// Tokenization is deterministic.
        #[test]
        fn tokenize_deterministic(s in "\\PC{0,60}") {
            prop_assert_eq!(tokenize(&s), tokenize(&s));
        }
    }
}
