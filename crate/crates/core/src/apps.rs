//! Drivers for dense representations: the smallest possible largest
//! denominator `G(r)` of a representation of `r` by distinct denominators,
//! and witnesses for second-largest denominators of representations of 1.

use std::fmt;

use num_integer::Integer;

use crate::arith::{factorize_u64, valuation_u64, Rational};
use crate::error::{invalid, Result};
use crate::multiset::DenomMultiset;
use crate::search::{ufrac_early_stopping_with, ufrac_with, SearchOptions, SearchStats};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GValue {
    pub g: u64,
    /// Every witness when requested, otherwise the first one found.
    pub witnesses: Vec<DenomMultiset>,
    pub complete: bool,
    pub stats: SearchStats,
}

/// Smallest `n` in `[n_start, n_max]` such that `{1..n}` contains a
/// representation of `r`.
pub fn compute_g(
    r: &Rational,
    n_start: u64,
    n_max: u64,
    all_witnesses: bool,
) -> Result<Option<GValue>> {
    compute_g_with(
        r,
        n_start,
        n_max,
        all_witnesses,
        &mut SearchOptions::default(),
    )
}

pub fn compute_g_with(
    r: &Rational,
    n_start: u64,
    n_max: u64,
    all_witnesses: bool,
    opts: &mut SearchOptions<'_>,
) -> Result<Option<GValue>> {
    if !r.is_positive() {
        return invalid(format!("target {r} must be positive"));
    }
    if n_start < 1 || n_start > n_max {
        return invalid(format!("invalid range {n_start}..{n_max}"));
    }
    let mut stats = SearchStats::default();
    for n in n_start..=n_max {
        let denoms = DenomMultiset::range(1, n);
        let (first, run) = ufrac_early_stopping_with(&denoms, r, opts)?;
        accumulate(&mut stats, &run);
        let Some(first) = first else {
            continue;
        };
        let witnesses = if all_witnesses {
            let (all, run) = ufrac_with(&denoms, r, opts)?;
            accumulate(&mut stats, &run);
            all
        } else {
            vec![first]
        };
        return Ok(Some(GValue {
            g: n,
            witnesses,
            complete: all_witnesses,
            stats,
        }));
    }
    Ok(None)
}

fn accumulate(total: &mut SearchStats, run: &SearchStats) {
    total.branches_expanded += run.branches_expanded;
    total.representations += run.representations;
    total.max_stack_depth = total.max_stack_depth.max(run.max_stack_depth);
}

/// `1 - 1/d - 1/(c d)`.
pub fn second_largest_target(d: u64, c: u64) -> Rational {
    let cd = c as u128 * d as u128;
    Rational::new(cd - c as u128 - 1, cd).expect("nonzero denominator")
}

/// Candidates `c` in `[2, c_max]` ordered by the largest prime-power factor
/// of the denominator of `1 - 1/d - 1/(cd)`, ties by smaller `c`.
pub fn rank_c(d: u64, c_max: u64) -> Vec<(u64, u64)> {
    if c_max < 2 || d == 0 {
        return Vec::new();
    }
    let spf = smallest_prime_factors(c_max as usize);
    let d_factors = factorize_u64(d);
    let mut ranked = Vec::with_capacity(c_max as usize - 1);
    let mut merged: Vec<(u64, u32)> = Vec::new();
    for c in 2..=c_max {
        merged.clear();
        merged.extend_from_slice(&d_factors);
        let mut rest = c as usize;
        while rest > 1 {
            let p = spf[rest] as u64;
            let mut e = 0;
            while rest as u64 % p == 0 {
                rest /= p as usize;
                e += 1;
            }
            match merged.iter_mut().find(|(q, _)| *q == p) {
                Some((_, k)) => *k += e,
                None => merged.push((p, e)),
            }
        }
        let cd = c as u128 * d as u128;
        let common = (cd - c as u128 - 1).gcd(&cd);
        let worst = merged
            .iter()
            .map(|&(p, e)| {
                let cancelled = valuation_u128(common, p);
                (p as u128).pow(e - cancelled)
            })
            .max()
            .unwrap_or(1);
        ranked.push((c, u64::try_from(worst).unwrap_or(u64::MAX)));
    }
    ranked.sort_by_key(|&(c, pp)| (pp, c));
    ranked
}

fn valuation_u128(mut n: u128, p: u64) -> u32 {
    if n <= u64::MAX as u128 {
        return valuation_u64(n as u64, p);
    }
    let p = p as u128;
    let mut e = 0;
    while n % p == 0 {
        n /= p;
        e += 1;
    }
    e
}

fn smallest_prime_factors(n: usize) -> Vec<u32> {
    let mut spf = vec![0u32; n + 1];
    for i in 2..=n {
        if spf[i] == 0 {
            let mut j = i;
            while j <= n {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    spf
}

/// Best `c` per [`rank_c`].
pub fn choose_c(d: u64, c_max: u64) -> Result<u64> {
    if c_max < 2 {
        return invalid(format!("c_max {c_max} leaves no candidates"));
    }
    Ok(rank_c(d, c_max)[0].0)
}

/// Looks for a representation of 1 whose two largest denominators are `d`
/// and `c d`, with every other denominator in `2..=min(bound, d - 1)`.
pub fn second_largest_witness(d: u64, c: u64, bound: u64) -> Result<Option<DenomMultiset>> {
    second_largest_witness_with(d, c, bound, &mut SearchOptions::default())
}

pub fn second_largest_witness_with(
    d: u64,
    c: u64,
    bound: u64,
    opts: &mut SearchOptions<'_>,
) -> Result<Option<DenomMultiset>> {
    if d < 5 {
        return invalid(format!("second-largest denominator {d} must be at least 5"));
    }
    if c < 2 {
        return invalid(format!("multiplier {c} must be at least 2"));
    }
    let top = bound.min(d - 1);
    if top < 2 {
        return Ok(None);
    }
    let target = second_largest_target(d, c);
    let (found, _) = ufrac_early_stopping_with(&DenomMultiset::range(2, top), &target, opts)?;
    Ok(found.map(|rest| rest.union(&DenomMultiset::from_sorted_counts(vec![(d, 1), (c * d, 1)]))))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConjectureOutcome {
    Found {
        c: u64,
        bound: u64,
        witness: DenomMultiset,
    },
    Failed,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjectureRow {
    pub d: u64,
    pub outcome: ConjectureOutcome,
}

impl fmt::Display for ConjectureRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.outcome {
            ConjectureOutcome::Found { c, witness, .. } => {
                write!(f, "{}, {}, {:?}", self.d, c, witness)
            }
            ConjectureOutcome::Failed => write!(f, "{}, -, none", self.d),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConjectureConfig {
    pub c_max: u64,
    /// Denominator bounds to try, in order, for each candidate `c`.
    pub bounds: Vec<u64>,
    /// How many of the best-ranked `c` to try before giving up on a `d`.
    pub candidates: usize,
}

impl Default for ConjectureConfig {
    fn default() -> Self {
        ConjectureConfig {
            c_max: 1000,
            bounds: vec![100],
            candidates: 10,
        }
    }
}

/// For each `d` in `[d_lo, d_hi]`, tries the best-ranked multipliers and
/// the bound schedule until a witness turns up.
pub fn verify_conjecture_range(
    d_lo: u64,
    d_hi: u64,
    config: &ConjectureConfig,
) -> Result<Vec<ConjectureRow>> {
    let mut rows = Vec::new();
    if d_lo > d_hi {
        return Ok(rows);
    }
    if d_lo < 5 {
        return invalid(format!("range must start at 5 or above, got {d_lo}"));
    }
    for d in d_lo..=d_hi {
        rows.push(ConjectureRow {
            d,
            outcome: verify_one(d, config)?,
        });
    }
    Ok(rows)
}

fn verify_one(d: u64, config: &ConjectureConfig) -> Result<ConjectureOutcome> {
    for (c, _) in rank_c(d, config.c_max).into_iter().take(config.candidates) {
        for &bound in &config.bounds {
            if let Some(witness) = second_largest_witness(d, c, bound)? {
                return Ok(ConjectureOutcome::Found { c, bound, witness });
            }
        }
    }
    Ok(ConjectureOutcome::Failed)
}

/// Whether `w` is a representation of 1 by distinct denominators whose
/// second-largest element is `d`.
pub fn is_second_largest_witness(w: &DenomMultiset, d: u64) -> bool {
    let elems = w.to_vec();
    let distinct = elems.windows(2).all(|p| p[0] < p[1]);
    distinct
        && elems.len() >= 2
        && elems[elems.len() - 2] == d
        && crate::arith::reciprocal_sum(w) == Rational::one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::largest_prime_power_u64;

    fn ms(v: &[u64]) -> DenomMultiset {
        DenomMultiset::from_values(v.to_vec())
    }

    fn rank_by_brute_force(d: u64, c_max: u64) -> Vec<(u64, u64)> {
        let mut v: Vec<(u64, u64)> = (2..=c_max)
            .map(|c| {
                let den = second_largest_target(d, c).denom().clone();
                (c, largest_prime_power_u64(u64::try_from(den).unwrap()))
            })
            .collect();
        v.sort_by_key(|&(c, pp)| (pp, c));
        v
    }

    #[test]
    fn ranking_agrees_with_direct_factorization() {
        for d in [5, 6, 7, 11, 12, 30, 97, 6000] {
            assert_eq!(rank_c(d, 300), rank_by_brute_force(d, 300), "d = {d}");
        }
    }

    #[test]
    fn choose_c_small() {
        assert_eq!(choose_c(5, 1000).unwrap(), 4);
        let pp = |d, c| {
            largest_prime_power_u64(
                u64::try_from(second_largest_target(d, c).denom().clone()).unwrap(),
            )
        };
        let c6 = choose_c(6, 1000).unwrap();
        assert_eq!(pp(6, c6), pp(6, 2));
        assert_eq!(choose_c(17, 2).unwrap(), 2);
        assert!(choose_c(17, 1).is_err());
    }

    #[test]
    fn known_witnesses() {
        assert_eq!(
            second_largest_witness(5, 4, 100).unwrap(),
            Some(ms(&[2, 4, 5, 20]))
        );
        assert_eq!(
            second_largest_witness(7, 6, 100).unwrap(),
            Some(ms(&[2, 3, 7, 42]))
        );
    }

    #[test]
    fn witness_argument_checks() {
        assert!(second_largest_witness(4, 2, 100).is_err());
        assert!(second_largest_witness(10, 1, 100).is_err());
        assert_eq!(second_largest_witness(5, 4, 1).unwrap(), None);
    }

    #[test]
    fn conjecture_rows() {
        assert!(verify_conjecture_range(7, 5, &ConjectureConfig::default())
            .unwrap()
            .is_empty());
        let rows = verify_conjecture_range(12, 12, &ConjectureConfig::default()).unwrap();
        assert_eq!(rows.len(), 1);
        match &rows[0].outcome {
            ConjectureOutcome::Found { c, witness, .. } => {
                assert_eq!(*c, 2);
                assert_eq!(witness, &ms(&[2, 4, 8, 12, 24]));
            }
            ConjectureOutcome::Failed => panic!("no witness for 12"),
        }
        assert_eq!(rows[0].to_string(), "12, 2, {2,4,8,12,24}");
    }

    #[test]
    fn g_small() {
        let g = compute_g(&Rational::one(), 1, 10, true).unwrap().unwrap();
        assert_eq!((g.g, g.witnesses.clone()), (1, vec![ms(&[1])]));
        let g = compute_g(&Rational::from(2), 1, 10, true).unwrap().unwrap();
        assert_eq!((g.g, g.witnesses.clone()), (6, vec![ms(&[1, 2, 3, 6])]));
        assert_eq!(compute_g(&Rational::from(2), 1, 5, false).unwrap(), None);
        assert!(compute_g(&Rational::zero(), 1, 5, false).is_err());
        assert!(compute_g(&Rational::one(), 5, 4, false).is_err());
    }

    #[test]
    fn witness_check() {
        assert!(is_second_largest_witness(&ms(&[2, 4, 5, 20]), 5));
        assert!(!is_second_largest_witness(&ms(&[2, 4, 5, 20]), 4));
        assert!(!is_second_largest_witness(&ms(&[2, 2]), 2));
    }
}
