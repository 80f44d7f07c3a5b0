//! Fuzzy string similarity on a 0–100 scale.
//!
//! The distance behind both scores counts an insertion or deletion as 1 and
//! a substitution as 2, which makes it `|a| + |b| - 2·LCS(a, b)`. The LCS is
//! computed with a bit-parallel row update when the shorter string fits in
//! a machine word, and with a rolling DP row otherwise.

use alloc::vec;
use alloc::vec::Vec;

/// `round_half_up(100 · (1 − d/(|a|+|b|)))`; two empty strings score 100.
pub fn fuzzy_ratio(a: &str, b: &str) -> u8 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    ratio_chars(&a, &b)
}

/// Best [`fuzzy_ratio`] between the shorter string and any equally long
/// window of the longer one.
pub fn fuzzy_partial_ratio(a: &str, b: &str) -> u8 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    partial_ratio_chars(&a, &b)
}

pub fn ratio_chars(a: &[char], b: &[char]) -> u8 {
    let total = a.len() + b.len();
    if total == 0 {
        return 100;
    }
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    scale(lcs_len(short, long), total)
}

pub fn partial_ratio_chars(a: &[char], b: &[char]) -> u8 {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return if long.is_empty() { 100 } else { 0 };
    }
    let total = 2 * short.len();
    let mut best = 0;
    if let Some(masks) = PatternMasks::new(short) {
        for window in long.windows(short.len()) {
            best = best.max(scale(masks.lcs(window), total));
            if best == 100 {
                break;
            }
        }
    } else {
        for window in long.windows(short.len()) {
            best = best.max(scale(lcs_dp(short, window), total));
            if best == 100 {
                break;
            }
        }
    }
    best
}

fn scale(lcs: usize, total: usize) -> u8 {
    // 100·(total − d)/total with d = total − 2·lcs, rounded half up.
    ((400 * lcs + total) / (2 * total)) as u8
}

fn lcs_len(short: &[char], long: &[char]) -> usize {
    match PatternMasks::new(short) {
        Some(masks) => masks.lcs(long),
        None => lcs_dp(short, long),
    }
}

/// Per-character match masks over a pattern of at most 64 characters.
struct PatternMasks {
    entries: Vec<(char, u64)>,
    len: usize,
}

impl PatternMasks {
    fn new(pattern: &[char]) -> Option<Self> {
        if pattern.len() > 64 {
            return None;
        }
        let mut entries: Vec<(char, u64)> = Vec::new();
        for (i, &c) in pattern.iter().enumerate() {
            match entries.iter_mut().find(|(k, _)| *k == c) {
                Some((_, m)) => *m |= 1 << i,
                None => entries.push((c, 1 << i)),
            }
        }
        Some(PatternMasks {
            entries,
            len: pattern.len(),
        })
    }

    fn mask(&self, c: char) -> u64 {
        self.entries
            .iter()
            .find(|(k, _)| *k == c)
            .map_or(0, |&(_, m)| m)
    }

    fn lcs(&self, text: &[char]) -> usize {
        let mut v = !0u64;
        for &c in text {
            let u = v & self.mask(c);
            v = v.wrapping_add(u) | (v - u);
        }
        let live = if self.len == 64 {
            !0
        } else {
            (1u64 << self.len) - 1
        };
        self.len - (v & live).count_ones() as usize
    }
}

fn lcs_dp(a: &[char], b: &[char]) -> usize {
    let mut row = vec![0usize; b.len() + 1];
    for &ca in a {
        let mut diag = 0;
        for (j, &cb) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if ca == cb { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[b.len()]
}
