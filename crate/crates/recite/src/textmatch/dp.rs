//! Dynamic-programming edit distance, used both as the reference oracle for
//! the bit-parallel matcher and as the fallback path for patterns wider than
//! one machine word.

/// Levenshtein distance between two token slices.
pub fn levenshtein<T: Eq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, ai) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, bj) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ai != bj);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Minimum edit distance between `pattern` and any substring of `text`
/// (the empty substring included), with the smallest exclusive end position
/// among minimal-distance matches.
///
/// Runs in O(|pattern| * |text|).
pub fn min_distance_over_substrings<T: Eq>(pattern: &[T], text: &[T]) -> (usize, usize) {
    let m = pattern.len();
    // Column for the empty text prefix: distance to pattern prefixes is all
    // deletions; the empty substring ends at position 0.
    let mut prev: Vec<usize> = (0..=m).collect();
    let mut best = (m, 0);
    let mut cur = vec![0usize; m + 1];
    for (j, tj) in text.iter().enumerate() {
        cur[0] = 0; // substring may start anywhere
        for (i, pi) in pattern.iter().enumerate() {
            let sub = prev[i] + usize::from(pi != tj);
            cur[i + 1] = sub.min(prev[i + 1] + 1).min(cur[i] + 1);
        }
        if cur[m] < best.0 {
            best = (cur[m], j + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    best
}
