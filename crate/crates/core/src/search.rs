//! Depth-first driver over branches, the early-stopping variant, and an
//! exhaustive reference enumerator used to cross-check them.

use std::ops::ControlFlow;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::arith::Rational;
use crate::branch::Branch;
use crate::error::{invalid, Error, Result};
use crate::kill::kill;
use crate::multiset::DenomMultiset;

/// Counters reported by a search run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub branches_expanded: u64,
    pub representations: u64,
    pub max_stack_depth: usize,
}

/// Knobs for a search run. The progress callback only observes counters.
pub struct SearchOptions<'a> {
    /// Recompute every branch's cached fields after each expansion and
    /// check that each child has strictly fewer unexamined denominators.
    pub check_invariants: bool,
    pub progress_every: u64,
    pub progress: Option<Box<dyn FnMut(&SearchStats) + 'a>>,
}

impl Default for SearchOptions<'_> {
    fn default() -> Self {
        SearchOptions {
            check_invariants: false,
            progress_every: 100_000,
            progress: None,
        }
    }
}

impl<'a> SearchOptions<'a> {
    pub fn checked() -> Self {
        SearchOptions {
            check_invariants: true,
            ..Default::default()
        }
    }

    pub fn with_progress(mut self, every: u64, f: impl FnMut(&SearchStats) + 'a) -> Self {
        self.progress_every = every.max(1);
        self.progress = Some(Box::new(f));
        self
    }
}

/// Runs the depth-first search, handing each representation to `on_found`
/// in discovery order. Returning `ControlFlow::Break` stops the search.
pub fn search(
    denoms: &DenomMultiset,
    r: &Rational,
    opts: &mut SearchOptions<'_>,
    mut on_found: impl FnMut(DenomMultiset) -> ControlFlow<()>,
) -> Result<SearchStats> {
    if r.is_negative() {
        return invalid(format!("target {r} is negative"));
    }
    let mut stats = SearchStats::default();
    let root = Branch::new(denoms.clone(), r.clone());
    if root.diff().is_negative() {
        return Ok(stats);
    }
    let Some(root) = root.reduce_or_drop() else {
        return Ok(stats);
    };
    let mut stack = vec![root];
    while let Some(br) = stack.pop() {
        stats.branches_expanded += 1;
        if opts.check_invariants {
            br.check_invariants()?;
        }
        let result = kill(&br);
        if opts.check_invariants {
            for child in result.representations.iter().chain(&result.pending) {
                child.check_invariants()?;
            }
            if let Some(bad) = result
                .pending
                .iter()
                .find(|c| c.denoms().len() >= br.denoms().len())
            {
                return Err(Error::Internal(format!(
                    "no progress from {br:?} to {bad:?}"
                )));
            }
        }
        for found in result.representations {
            if opts.check_invariants && !found.is_representation() {
                return Err(Error::Internal(format!("not a representation: {found:?}")));
            }
            stats.representations += 1;
            if on_found(found.representation()).is_break() {
                return Ok(stats);
            }
        }
        // First pending branch is explored next.
        stack.extend(result.pending.into_iter().rev());
        stats.max_stack_depth = stats.max_stack_depth.max(stack.len());
        if let Some(cb) = opts.progress.as_mut() {
            if stats.branches_expanded % opts.progress_every == 0 {
                cb(&stats);
            }
        }
    }
    Ok(stats)
}

/// All submultisets of `denoms` whose reciprocal sum is `r`, each ascending,
/// in canonical order.
pub fn ufrac(denoms: &DenomMultiset, r: &Rational) -> Result<Vec<DenomMultiset>> {
    ufrac_with(denoms, r, &mut SearchOptions::default()).map(|(v, _)| v)
}

pub fn ufrac_with(
    denoms: &DenomMultiset,
    r: &Rational,
    opts: &mut SearchOptions<'_>,
) -> Result<(Vec<DenomMultiset>, SearchStats)> {
    let mut found = Vec::new();
    let stats = search(denoms, r, opts, |rep| {
        found.push(rep);
        ControlFlow::Continue(())
    })?;
    found.sort();
    if found.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Internal(
            "search produced a duplicate representation".into(),
        ));
    }
    Ok((found, stats))
}

/// The first representation in depth-first order, if any exists.
pub fn ufrac_early_stopping(denoms: &DenomMultiset, r: &Rational) -> Result<Option<DenomMultiset>> {
    ufrac_early_stopping_with(denoms, r, &mut SearchOptions::default()).map(|(v, _)| v)
}

pub fn ufrac_early_stopping_with(
    denoms: &DenomMultiset,
    r: &Rational,
    opts: &mut SearchOptions<'_>,
) -> Result<(Option<DenomMultiset>, SearchStats)> {
    let mut first = None;
    let stats = search(denoms, r, opts, |rep| {
        first = Some(rep);
        ControlFlow::Break(())
    })?;
    Ok((first, stats))
}

/// Upper bound on distinct submultisets the exhaustive enumerator accepts.
pub const BRUTE_FORCE_LIMIT: u128 = 1 << 20;

/// Exhaustive enumeration of distinct submultisets by per-value counts.
///
/// Works over the common denominator `L = lcm(D)`: a submultiset
/// represents `r` iff its integer weights `L/d` sum to `r * L`.
pub fn brute_force_oracle(denoms: &DenomMultiset, r: &Rational) -> Result<Vec<DenomMultiset>> {
    let total = denoms.submultiset_count();
    if total > BRUTE_FORCE_LIMIT {
        return Err(Error::ResourceLimit(format!(
            "{total} submultisets exceeds the limit of {BRUTE_FORCE_LIMIT}"
        )));
    }
    let items: Vec<(u64, u32)> = denoms.iter_counts().collect();
    let lcm = items
        .iter()
        .fold(BigInt::one(), |acc, &(v, _)| acc.lcm(&BigInt::from(v)));
    let scaled = r.numer() * &lcm;
    if r.is_negative() || !(&scaled % r.denom()).is_zero() {
        return Ok(Vec::new());
    }
    let goal = scaled / r.denom();
    let weights: Vec<BigInt> = items.iter().map(|&(v, _)| &lcm / BigInt::from(v)).collect();

    let mut out = Vec::new();
    let mut counts = vec![0u32; items.len()];
    loop {
        let sum: BigInt = counts
            .iter()
            .zip(&weights)
            .map(|(&k, w)| w * BigInt::from(k))
            .sum();
        if sum == goal {
            out.push(DenomMultiset::from_sorted_counts(
                items
                    .iter()
                    .zip(&counts)
                    .filter(|(_, &k)| k > 0)
                    .map(|(&(v, _), &k)| (v, k))
                    .collect(),
            ));
        }
        // odometer increment
        let mut i = 0;
        loop {
            if i == items.len() {
                out.sort();
                return Ok(out);
            }
            if counts[i] < items[i].1 {
                counts[i] += 1;
                break;
            }
            counts[i] = 0;
            i += 1;
        }
    }
}
