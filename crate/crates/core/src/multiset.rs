use std::fmt;

use crate::error::{invalid, Result};

/// A finite multiset of positive integers, stored as ascending
/// `(value, multiplicity)` pairs.
///
/// Iteration is always in ascending order of value, so two equal multisets
/// serialize identically.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct DenomMultiset {
    counts: Vec<(u64, u32)>,
    len: usize,
}

impl DenomMultiset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_elements<I, T>(seq: I) -> Result<Self>
    where
        I: IntoIterator<Item = T>,
        T: TryInto<u64> + Copy + fmt::Display,
    {
        let mut values = Vec::new();
        for x in seq {
            match x.try_into() {
                Ok(v) if v >= 1 => values.push(v),
                _ => return invalid(format!("denominator {x} is not a positive integer")),
            }
        }
        Ok(Self::from_values(values))
    }

    pub(crate) fn from_values(mut values: Vec<u64>) -> Self {
        values.sort_unstable();
        let mut counts: Vec<(u64, u32)> = Vec::new();
        for v in values {
            match counts.last_mut() {
                Some((last, k)) if *last == v => *k += 1,
                _ => counts.push((v, 1)),
            }
        }
        Self::from_sorted_counts(counts)
    }

    /// Builds from ascending, distinct values with nonzero multiplicities.
    pub(crate) fn from_sorted_counts(counts: Vec<(u64, u32)>) -> Self {
        debug_assert!(counts.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(counts.iter().all(|&(v, k)| v >= 1 && k >= 1));
        let len = counts.iter().map(|&(_, k)| k as usize).sum();
        DenomMultiset { counts, len }
    }

    /// `{lo, lo+1, ..., hi}`.
    pub fn range(lo: u64, hi: u64) -> Self {
        let lo = lo.max(1);
        if hi < lo {
            return Self::new();
        }
        Self::from_sorted_counts((lo..=hi).map(|v| (v, 1)).collect())
    }

    /// Total number of elements, counted with multiplicity.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn distinct_len(&self) -> usize {
        self.counts.len()
    }

    pub fn multiplicity(&self, value: u64) -> u32 {
        match self.counts.binary_search_by_key(&value, |&(v, _)| v) {
            Ok(i) => self.counts[i].1,
            Err(_) => 0,
        }
    }

    pub fn contains(&self, value: u64) -> bool {
        self.multiplicity(value) > 0
    }

    /// Ascending `(value, multiplicity)` pairs.
    pub fn iter_counts(
        &self,
    ) -> impl DoubleEndedIterator<Item = (u64, u32)> + ExactSizeIterator + '_ {
        self.counts.iter().copied()
    }

    pub(crate) fn counts(&self) -> &[(u64, u32)] {
        &self.counts
    }

    /// Every element, repeated by multiplicity, ascending.
    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.counts
            .iter()
            .flat_map(|&(v, k)| std::iter::repeat_n(v, k as usize))
    }

    pub fn to_vec(&self) -> Vec<u64> {
        self.iter().collect()
    }

    pub fn min_element(&self) -> Result<u64> {
        match self.counts.first() {
            Some(&(v, _)) => Ok(v),
            None => invalid("minimum of an empty multiset"),
        }
    }

    pub fn max_element(&self) -> Option<u64> {
        self.counts.last().map(|&(v, _)| v)
    }

    pub fn is_submultiset_of(&self, other: &DenomMultiset) -> bool {
        let mut j = 0;
        for &(v, k) in &self.counts {
            while j < other.counts.len() && other.counts[j].0 < v {
                j += 1;
            }
            match other.counts.get(j) {
                Some(&(w, m)) if w == v && m >= k => {}
                _ => return false,
            }
        }
        true
    }

    /// `self \ other`, subtracting multiplicities. Fails unless `other` is a
    /// submultiset of `self`.
    pub fn remove_submultiset(&self, other: &DenomMultiset) -> Result<DenomMultiset> {
        if !other.is_submultiset_of(self) {
            return invalid("removed multiset is not contained in the denominator multiset");
        }
        Ok(self.difference_unchecked(other))
    }

    pub(crate) fn difference_unchecked(&self, other: &DenomMultiset) -> DenomMultiset {
        if other.is_empty() {
            return self.clone();
        }
        let mut counts = Vec::with_capacity(self.counts.len());
        let mut j = 0;
        for &(v, k) in &self.counts {
            while j < other.counts.len() && other.counts[j].0 < v {
                j += 1;
            }
            let taken = match other.counts.get(j) {
                Some(&(w, m)) if w == v => m,
                _ => 0,
            };
            debug_assert!(taken <= k);
            if k > taken {
                counts.push((v, k - taken));
            }
        }
        Self::from_sorted_counts(counts)
    }

    /// Multiset sum: multiplicities add.
    pub fn union(&self, other: &DenomMultiset) -> DenomMultiset {
        if other.is_empty() {
            return self.clone();
        }
        if self.is_empty() {
            return other.clone();
        }
        if other.counts.len() * 8 < self.counts.len() {
            let mut out = self.clone();
            for &(v, k) in &other.counts {
                match out.counts.binary_search_by_key(&v, |&(w, _)| w) {
                    Ok(i) => out.counts[i].1 += k,
                    Err(i) => out.counts.insert(i, (v, k)),
                }
            }
            out.len += other.len;
            return out;
        }
        let mut counts = Vec::with_capacity(self.counts.len() + other.counts.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.counts, &other.counts);
        while i < a.len() || j < b.len() {
            match (a.get(i), b.get(j)) {
                (Some(&(v, k)), Some(&(w, m))) if v == w => {
                    counts.push((v, k + m));
                    i += 1;
                    j += 1;
                }
                (Some(&(v, k)), Some(&(w, _))) if v < w => {
                    counts.push((v, k));
                    i += 1;
                }
                (Some(_), Some(&(w, m))) => {
                    counts.push((w, m));
                    j += 1;
                }
                (Some(&(v, k)), None) => {
                    counts.push((v, k));
                    i += 1;
                }
                (None, Some(&(w, m))) => {
                    counts.push((w, m));
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        Self::from_sorted_counts(counts)
    }

    /// Largest `s` such that `p^s` divides some element; 0 if none is a
    /// multiple of `p`.
    pub fn max_power_dividing(&self, p: u64) -> u32 {
        self.counts
            .iter()
            .map(|&(v, _)| crate::arith::valuation_u64(v, p))
            .max()
            .unwrap_or(0)
    }

    /// Splits into (multiples of `q`, everything else).
    pub fn partition_multiples(&self, q: u64) -> (DenomMultiset, DenomMultiset) {
        let (m, n): (Vec<_>, Vec<_>) = self.counts.iter().partition(|&&(v, _)| v % q == 0);
        (Self::from_sorted_counts(m), Self::from_sorted_counts(n))
    }

    /// Splits off the ascending prefix of values satisfying `pred`.
    pub(crate) fn split_prefix(
        &self,
        mut pred: impl FnMut(u64) -> bool,
    ) -> (DenomMultiset, DenomMultiset) {
        let cut = self.counts.iter().take_while(|&&(v, _)| pred(v)).count();
        (
            Self::from_sorted_counts(self.counts[..cut].to_vec()),
            Self::from_sorted_counts(self.counts[cut..].to_vec()),
        )
    }

    /// Distinct submultisets: the product of `(multiplicity + 1)`, saturating.
    pub fn submultiset_count(&self) -> u128 {
        self.counts
            .iter()
            .fold(1u128, |acc, &(_, k)| acc.saturating_mul(k as u128 + 1))
    }
}

impl fmt::Display for DenomMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in self.iter() {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for DenomMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        let mut first = true;
        for v in self.iter() {
            if !first {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
            first = false;
        }
        f.write_str("}")
    }
}

/// Canonical ordering for representations: lexicographic on the ascending
/// element sequence.
pub fn canonical_cmp(a: &DenomMultiset, b: &DenomMultiset) -> std::cmp::Ordering {
    a.iter().cmp(b.iter())
}

impl Ord for DenomMultiset {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        canonical_cmp(self, other)
    }
}

impl PartialOrd for DenomMultiset {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
