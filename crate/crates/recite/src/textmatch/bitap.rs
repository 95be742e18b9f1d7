//! Bit-parallel approximate matching of a token pattern inside a token text,
//! allowing up to K errors (insertions, deletions, substitutions).
//!
//! The classic formulation only certifies "within K errors"; metrics here
//! need the exact minimum, so one pass keeps K+1 state words and reads off
//! the smallest error level whose final bit is set at each text position.
//! Patterns wider than one machine word fall back to the DP search, which is
//! required to agree with the bit-parallel path.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use super::dp;
use crate::error::{Error, Result};

/// Word width of the bit-parallel path.
pub const MAX_BITAP_PATTERN: usize = u64::BITS as usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitapMatch {
    /// Exclusive end position of the best match in the text.
    pub end_index: usize,
    /// Exact minimum edit distance of the best match; `<= K` by construction.
    pub errors: usize,
}

/// Find the substring of `text` closest to `pattern` within `k` errors.
///
/// Returns the match with minimal errors, ties broken by smallest end
/// position, or `None` when no substring comes within `k`.
pub fn bitap_search<T: Eq + Hash>(
    pattern: &[T],
    text: &[T],
    k: usize,
) -> Result<Option<BitapMatch>> {
    if pattern.is_empty() {
        return Err(Error::EmptyPattern);
    }
    let m = pattern.len();
    if m > MAX_BITAP_PATTERN {
        let (dist, end) = dp::min_distance_over_substrings(pattern, text);
        return Ok((dist <= k).then_some(BitapMatch {
            end_index: end,
            errors: dist,
        }));
    }

    let k = k.min(m); // distances never exceed the pattern length
    let masks = build_masks(pattern);
    let high_bit = 1u64 << (m - 1);

    // r[d] bit i set <=> pattern[..=i] matches some suffix of the consumed
    // text with at most d errors. Before any text, prefixes of length <= d
    // are reachable by deletion alone.
    let mut r: Vec<u64> = (0..=k)
        .map(|d| if d >= 64 { u64::MAX } else { (1u64 << d) - 1 })
        .collect();

    // The empty substring at position 0 matches with m errors.
    let mut best: Option<BitapMatch> = (m <= k).then_some(BitapMatch {
        end_index: 0,
        errors: m,
    });

    for (j, c) in text.iter().enumerate() {
        let mask = masks.get(c).copied().unwrap_or(0);
        let mut prev_old = r[0];
        r[0] = ((r[0] << 1) | 1) & mask;
        for d in 1..=k {
            let old = r[d];
            r[d] = (((old << 1) | 1) & mask)      // match
                | ((prev_old << 1) | 1)           // substitution
                | prev_old                        // insertion into pattern
                | ((r[d - 1] << 1) | 1); // deletion from pattern
            prev_old = old;
        }
        if let Some(level) = (0..=k).find(|&d| r[d] & high_bit != 0) {
            if best.is_none_or(|b| level < b.errors) {
                best = Some(BitapMatch {
                    end_index: j + 1,
                    errors: level,
                });
                if level == 0 {
                    break; // cannot improve on an exact match
                }
            }
        }
    }
    Ok(best)
}

fn build_masks<T: Eq + Hash>(pattern: &[T]) -> HashMap<&T, u64> {
    let mut masks: HashMap<&T, u64> = HashMap::with_capacity(pattern.len());
    for (i, t) in pattern.iter().enumerate() {
        *masks.entry(t).or_insert(0) |= 1u64 << i;
    }
    masks
}

/// K budget for a pattern of `pattern_length` tokens at error fraction `p`:
/// `K = floor(p * length)`.
pub fn k_for(p: f64, pattern_length: usize) -> Result<usize> {
    debug_assert!((0.0..=1.0).contains(&p), "p must lie in [0,1]");
    if pattern_length == 0 {
        return Err(Error::ZeroPatternLength);
    }
    Ok((p * pattern_length as f64).floor() as usize)
}
