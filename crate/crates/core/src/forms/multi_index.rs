use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Largest supported ambient dimension (one bit per differential).
pub const MAX_DIM: usize = 32;

/// Strictly increasing multi-index `K = (k_1 < … < k_p)` with 1-based entries.
///
/// Stored as a bitmask: entry `k` occupies bit `k - 1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct MultiIndex(u32);

impl MultiIndex {
    pub const EMPTY: MultiIndex = MultiIndex(0);

    /// Builds from entries, which must be strictly increasing and in `1..=n`.
    pub fn new(entries: &[usize], n: usize) -> Result<Self> {
        if n > MAX_DIM {
            return Err(Error::domain(format!("ambient dimension {n} exceeds {MAX_DIM}")));
        }
        let mut bits = 0u32;
        let mut prev = 0usize;
        for &k in entries {
            if k == 0 || k > n {
                return Err(Error::domain(format!("index {k} outside 1..={n}")));
            }
            if k <= prev {
                return Err(Error::domain(format!("entries not strictly increasing: {entries:?}")));
            }
            bits |= 1 << (k - 1);
            prev = k;
        }
        Ok(MultiIndex(bits))
    }

    /// Builds from entries in any order, returning the sorted index and the
    /// sign of the sorting permutation, or `None` on a repeated entry.
    pub fn from_unsorted(entries: &[usize]) -> Option<(Self, i32)> {
        let mut bits = 0u32;
        let mut sign = 1;
        for &k in entries {
            debug_assert!((1..=MAX_DIM).contains(&k));
            let b = 1u32 << (k - 1);
            if bits & b != 0 {
                return None;
            }
            // entries already placed above k must be jumped over
            if (bits & !((b << 1).wrapping_sub(1))).count_ones() % 2 == 1 {
                sign = -sign;
            }
            bits |= b;
        }
        Some((MultiIndex(bits), sign))
    }

    pub fn single(k: usize) -> Self {
        debug_assert!((1..=MAX_DIM).contains(&k));
        MultiIndex(1 << (k - 1))
    }

    /// `(1, 2, …, p)`.
    pub fn leading(p: usize) -> Self {
        if p == 0 {
            MultiIndex(0)
        } else {
            MultiIndex(u32::MAX >> (32 - p))
        }
    }

    pub(crate) fn from_bits(bits: u32) -> Self {
        MultiIndex(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, k: usize) -> bool {
        (1..=MAX_DIM).contains(&k) && self.0 & (1 << (k - 1)) != 0
    }

    pub fn max_entry(self) -> usize {
        (32 - self.0.leading_zeros()) as usize
    }

    pub fn entries(self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let k = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(k + 1)
            }
        })
    }

    pub fn without(self, k: usize) -> Self {
        MultiIndex(self.0 & !(1 << (k - 1)))
    }

    pub fn with(self, k: usize) -> Self {
        MultiIndex(self.0 | (1 << (k - 1)))
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    /// Number of entries strictly below `k`.
    pub fn count_below(self, k: usize) -> usize {
        (self.0 & ((1u32 << (k - 1)) - 1)).count_ones() as usize
    }

    /// All multi-indices of length `p` in `1..=n`, in lexicographic order.
    pub fn all(n: usize, p: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        if p > n {
            return out;
        }
        let mut cur = Vec::with_capacity(p);
        fn rec(start: usize, n: usize, p: usize, cur: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
            if cur.len() == p {
                out.push(MultiIndex(cur.iter().fold(0, |b, &k| b | (1 << (k - 1)))));
                return;
            }
            for k in start..=n {
                cur.push(k);
                rec(k + 1, n, p, cur, out);
                cur.pop();
            }
        }
        rec(1, n, p, &mut cur, &mut out);
        out
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.iter().cmp(other.iter()))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.entries())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("1");
        }
        let parts: Vec<String> = self.iter().map(|k| format!("dt{k}")).collect();
        f.write_str(&parts.join("^"))
    }
}

/// Sign of `dt_a ∧ dt_b` relative to `dt_{a ∪ b}`, or 0 when they overlap.
///
/// Equals `(-1)^{#{(x, y) : x ∈ a, y ∈ b, x > y}}`.
pub fn merge_sign(a: MultiIndex, b: MultiIndex) -> i32 {
    if !a.is_disjoint(b) {
        return 0;
    }
    let mut inversions = 0u32;
    for y in b.iter() {
        inversions += a.0.checked_shr(y as u32).unwrap_or(0).count_ones();
    }
    if inversions.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Sign carrying `(mu, J∖{mu})` to `J` sorted increasingly: `(-1)^(pos-1)`.
pub fn wedge_sign(mu: usize, j: MultiIndex) -> Result<i32> {
    if !j.contains(mu) {
        return Err(Error::domain(format!("{mu} is not an entry of {j:?}")));
    }
    Ok(merge_sign(MultiIndex::single(mu), j.without(mu)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(e: &[usize]) -> MultiIndex {
        MultiIndex::new(e, 8).unwrap()
    }

    #[test]
    fn wedge_sign_table() {
        assert_eq!(wedge_sign(1, mi(&[1, 2])).unwrap(), 1);
        assert_eq!(wedge_sign(2, mi(&[1, 2])).unwrap(), -1);
        // second position: one transposition
        assert_eq!(wedge_sign(3, mi(&[1, 3, 5])).unwrap(), -1);
        assert_eq!(wedge_sign(5, mi(&[1, 3, 5])).unwrap(), 1);
        assert!(wedge_sign(2, mi(&[1, 3])).is_err());
    }

    #[test]
    fn sign_matches_bubble_count() {
        for bits in 0u32..256 {
            let j = MultiIndex(bits);
            for mu in j.iter() {
                let mut seq = vec![mu];
                seq.extend(j.without(mu).iter());
                let mut swaps = 0;
                for a in 0..seq.len() {
                    for b in a + 1..seq.len() {
                        if seq[a] > seq[b] {
                            swaps += 1;
                        }
                    }
                }
                let expect = if swaps % 2 == 0 { 1 } else { -1 };
                assert_eq!(wedge_sign(mu, j).unwrap(), expect);
                assert_eq!(MultiIndex::from_unsorted(&seq).unwrap(), (j, expect));
            }
        }
    }

    #[test]
    fn construction_rejects_bad_entries() {
        assert!(MultiIndex::new(&[2, 1], 3).is_err());
        assert!(MultiIndex::new(&[1, 1], 3).is_err());
        assert!(MultiIndex::new(&[4], 3).is_err());
        assert!(MultiIndex::new(&[0], 3).is_err());
        assert_eq!(MultiIndex::new(&[], 3).unwrap(), MultiIndex::EMPTY);
        assert!(MultiIndex::from_unsorted(&[2, 2]).is_none());
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(MultiIndex::all(5, 2).len(), 10);
        assert_eq!(MultiIndex::all(3, 0), vec![MultiIndex::EMPTY]);
        assert!(MultiIndex::all(2, 3).is_empty());
        let all = MultiIndex::all(4, 2);
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(all, sorted);
        assert_eq!(MultiIndex::leading(3), mi(&[1, 2, 3]));
        assert_eq!(mi(&[2, 5]).count_below(5), 1);
    }
}
