//! Non-overlapping common token runs between a generation and a source text,
//! the raw material of the token-range score.

use serde::{Deserialize, Serialize};

/// A maximal run of identical tokens shared by generation and source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenRun {
    pub gen_start: usize,
    pub src_start: usize,
    pub len: usize,
}

impl TokenRun {
    pub fn gen_span(&self) -> std::ops::Range<usize> {
        self.gen_start..self.gen_start + self.len
    }

    pub fn src_span(&self) -> std::ops::Range<usize> {
        self.src_start..self.src_start + self.len
    }
}

/// Greedy longest-first selection of maximal common runs of at least
/// `min_run` tokens. Selected runs never overlap one another in either
/// sequence; ties break on earlier source start, then earlier generation
/// start. Candidates that would overlap a selected run are discarded whole.
pub fn common_runs<T: Eq>(generation: &[T], source: &[T], min_run: usize) -> Vec<TokenRun> {
    assert!(min_run >= 1, "min_run must be at least 1");
    let mut candidates: Vec<TokenRun> = Vec::new();
    for i in 0..generation.len() {
        for j in 0..source.len() {
            if generation[i] != source[j] {
                continue;
            }
            // Only start at the head of a maximal diagonal run.
            if i > 0 && j > 0 && generation[i - 1] == source[j - 1] {
                continue;
            }
            let mut len = 0;
            while i + len < generation.len()
                && j + len < source.len()
                && generation[i + len] == source[j + len]
            {
                len += 1;
            }
            if len >= min_run {
                candidates.push(TokenRun {
                    gen_start: i,
                    src_start: j,
                    len,
                });
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.len
            .cmp(&a.len)
            .then(a.src_start.cmp(&b.src_start))
            .then(a.gen_start.cmp(&b.gen_start))
    });

    let mut gen_taken = vec![false; generation.len()];
    let mut src_taken = vec![false; source.len()];
    let mut selected = Vec::new();
    'outer: for run in candidates {
        for g in run.gen_span() {
            if gen_taken[g] {
                continue 'outer;
            }
        }
        for s in run.src_span() {
            if src_taken[s] {
                continue 'outer;
            }
        }
        for g in run.gen_span() {
            gen_taken[g] = true;
        }
        for s in run.src_span() {
            src_taken[s] = true;
        }
        selected.push(run);
    }
    selected
}

/// Total tokens covered by the selected runs.
pub fn total_run_tokens(runs: &[TokenRun]) -> usize {
    runs.iter().map(|r| r.len).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strs(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn identical_sequences_form_one_run() {
        let s = strs(&["a", "b", "c", "d", "e", "f", "g", "h", "i", "j"]);
        let runs = common_runs(&s, &s, 3);
        assert_eq!(
            runs,
            vec![TokenRun {
                gen_start: 0,
                src_start: 0,
                len: 10
            }]
        );
    }

    #[test]
    fn disjoint_vocabularies_share_nothing() {
        let gen = strs(&["a", "b", "c"]);
        let src = strs(&["x", "y", "z"]);
        assert!(common_runs(&gen, &src, 1).is_empty());
    }

    #[test]
    fn split_runs_are_counted_separately() {
        // Brute-force enumeration of common runs gives [a,b,c]@(0,0) and
        // [d,e,f]@(4,4); the greedy rule selects both for a total of 6.
        let gen = strs(&["a", "b", "c", "x", "d", "e", "f"]);
        let src = strs(&["a", "b", "c", "q", "d", "e", "f"]);
        let runs = common_runs(&gen, &src, 3);
        assert_eq!(runs.len(), 2);
        assert_eq!(total_run_tokens(&runs), 6);
    }

    #[test]
    fn short_runs_fall_below_threshold() {
        let gen = strs(&["a", "b", "z", "c"]);
        let src = strs(&["a", "b", "y", "c"]);
        assert!(common_runs(&gen, &src, 3).is_empty());
        assert_eq!(total_run_tokens(&common_runs(&gen, &src, 2)), 2);
    }

    #[test]
    fn overlapping_candidates_are_discarded() {
        // The long run claims the generation span; the shorter echo of the
        // same tokens elsewhere in the source cannot reuse it.
        let gen = strs(&["a", "b", "c", "d", "e"]);
        let src = strs(&["c", "d", "e", "a", "b", "c", "d", "e"]);
        let runs = common_runs(&gen, &src, 3);
        assert_eq!(
            runs,
            vec![TokenRun {
                gen_start: 0,
                src_start: 3,
                len: 5
            }]
        );
    }

    #[test]
    fn runs_never_overlap_in_either_sequence() {
        let gen = strs(&["a", "b", "a", "b", "a", "b"]);
        let src = strs(&["a", "b", "a", "b"]);
        let runs = common_runs(&gen, &src, 2);
        let mut gen_seen = vec![false; gen.len()];
        let mut src_seen = vec![false; src.len()];
        for r in &runs {
            for g in r.gen_span() {
                assert!(!gen_seen[g]);
                gen_seen[g] = true;
            }
            for s in r.src_span() {
                assert!(!src_seen[s]);
                src_seen[s] = true;
            }
        }
        assert!(total_run_tokens(&runs) <= gen.len().min(src.len()));
    }
}
