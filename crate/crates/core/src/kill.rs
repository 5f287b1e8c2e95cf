//! One expansion step of the search: given a branch, produce the
//! representations it already witnesses and the subbranches still to be
//! explored.
//!
//! When `diff` has a nontrivial denominator with greatest prime power
//! `p^t`, let `p^s` be the largest power of `p` dividing an element of `D`
//! and write the multiples of `p^s` as `c_j p^s` with `p` not dividing
//! `c_j`. Removing a submultiset `M'` of those multiples clears `p^s` from
//! the denominator exactly when the inverses `c_j^{-1}` over `M'` sum to
//! the target residue computed by [`compute_pre_aim`]. Every subbranch
//! removes one such `M'` and reserves the rest of the multiples.

use std::collections::HashSet;

use crate::arith::{inverse_u64, valuation_u64};
use crate::branch::Branch;
use crate::error::{Error, Result};
use crate::multiset::DenomMultiset;

/// Target residue for the removed multiples of `p^s`, or a marker that no
/// removal can clear `p^t` from the denominator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PreAim {
    Unsolvable,
    Solvable { p: u64, s: u32, t: u32, aim: u64 },
}

#[derive(Clone, Debug, Default)]
pub struct KillResult {
    /// Branches with `diff = 0`.
    pub representations: Vec<Branch>,
    pub pending: Vec<Branch>,
}

impl KillResult {
    fn empty() -> Self {
        Self::default()
    }
}

pub fn kill(br: &Branch) -> KillResult {
    if br.diff_is_zero() {
        KillResult {
            representations: vec![br.clone()],
            pending: Vec::new(),
        }
    } else if br.diff_is_negative() || br.r_is_negative() {
        KillResult::empty()
    } else if br.diff_is_integer() {
        kill_when_diff_is_integer(br)
    } else {
        kill_when_diff_is_not_integer(br)
    }
}

/// Branches on the smallest denominator `l`: one child commits one copy of
/// `l`, the other discards every copy. Splitting by count this way keeps
/// repeated denominators from producing the same representation twice.
pub fn kill_when_diff_is_integer(br: &Branch) -> KillResult {
    let Some(&(smallest, copies)) = br.denoms().counts().first() else {
        return KillResult::empty();
    };
    let remove_all = || {
        let mut child = br.clone();
        child.remove_raw(&DenomMultiset::from_sorted_counts(vec![(smallest, copies)]));
        child.reduce_or_drop()
    };
    let reserve_one = || {
        let mut child = br.clone();
        child.reserve_raw(&DenomMultiset::from_sorted_counts(vec![(smallest, 1)]));
        child.reduce_or_drop()
    };
    let mut out = KillResult::empty();
    match br.cmp_r_unit(smallest) {
        std::cmp::Ordering::Less => {
            out.pending.extend(remove_all());
        }
        std::cmp::Ordering::Equal => {
            let reserved = br
                .reserved()
                .union(&DenomMultiset::from_sorted_counts(vec![(smallest, 1)]));
            out.representations.push(br.promoted(reserved));
            out.pending.extend(remove_all());
        }
        std::cmp::Ordering::Greater => {
            out.pending.extend(reserve_one());
            out.pending.extend(remove_all());
        }
    }
    out
}

/// Residue the inverse-sum of removed multiples must hit, together with the
/// prime data it was computed from.
///
/// With `diff = m / (n p^t)`, the target is `m p^{s-t} n^{-1} mod p`; it is
/// unsolvable when no element of `D` is divisible by `p^t`.
pub fn compute_pre_aim(br: &Branch) -> PreAim {
    // A prime that does not fit in a word divides no element.
    let Some((Some(p), t)) = br.gpp_raw() else {
        return PreAim::Unsolvable;
    };
    let s = br.denoms().max_power_dividing(p);
    if s < t {
        return PreAim::Unsolvable;
    }
    if s > t {
        return PreAim::Solvable { p, s, t, aim: 0 };
    }
    let aim = br.diff_unit_residue().expect("word-sized prime");
    PreAim::Solvable { p, s, t, aim }
}

enum ResidueSet {
    Dense(Vec<bool>),
    Sparse(HashSet<u64>),
}

impl ResidueSet {
    fn contains(&self, x: u64) -> bool {
        match self {
            ResidueSet::Dense(v) => v[x as usize],
            ResidueSet::Sparse(h) => h.contains(&x),
        }
    }
}

const DENSE_TABLE_LIMIT: u64 = 1 << 24;

/// Calls `emit` with the count vector (one entry per distinct value of `m`)
/// of every submultiset whose inverse-sum is `aim` modulo `p`, in
/// lexicographic order of the count vectors.
fn for_each_subset_aim(
    m: &DenomMultiset,
    p: u64,
    s: u32,
    aim: u64,
    mut emit: impl FnMut(&[u32]),
) -> Result<()> {
    let ps = p
        .checked_pow(s)
        .ok_or_else(|| Error::Internal(format!("{p}^{s} overflows")))?;
    let items: Vec<(u64, u32)> = m
        .iter_counts()
        .map(|(v, k)| {
            if v % ps != 0 || valuation_u64(v, p) != s {
                return Err(Error::Internal(format!(
                    "{v} is not an exact multiple of {p}^{s}"
                )));
            }
            let c = (v / ps) % p;
            Ok((inverse_u64(c, p).expect("p does not divide c"), k))
        })
        .collect::<Result<_>>()?;

    // reachable[i]: residues attainable using items i.. only.
    let dense = p.saturating_mul(items.len() as u64 + 1) <= DENSE_TABLE_LIMIT;
    let mut reachable: Vec<ResidueSet> = Vec::with_capacity(items.len() + 1);
    if dense {
        let mut base = vec![false; p as usize];
        base[0] = true;
        reachable.push(ResidueSet::Dense(base));
        for &(a, k) in items.iter().rev() {
            let ResidueSet::Dense(prev) = reachable.last().unwrap() else {
                unreachable!()
            };
            let mut next = prev.clone();
            let mut shift = 0u64;
            for _ in 0..k {
                shift = (shift + a) % p;
                for (x, &hit) in prev.iter().enumerate() {
                    if hit {
                        next[((x as u64 + shift) % p) as usize] = true;
                    }
                }
            }
            reachable.push(ResidueSet::Dense(next));
        }
    } else {
        reachable.push(ResidueSet::Sparse(HashSet::from([0])));
        for &(a, k) in items.iter().rev() {
            let ResidueSet::Sparse(prev) = reachable.last().unwrap() else {
                unreachable!()
            };
            let mut next = prev.clone();
            let mut shift = 0u64;
            for _ in 0..k {
                shift = ((shift as u128 + a as u128) % p as u128) as u64;
                next.extend(
                    prev.iter()
                        .map(|&x| ((x as u128 + shift as u128) % p as u128) as u64),
                );
            }
            reachable.push(ResidueSet::Sparse(next));
        }
    }
    reachable.reverse();

    fn walk(
        i: usize,
        need: u64,
        p: u64,
        items: &[(u64, u32)],
        reachable: &[ResidueSet],
        counts: &mut Vec<u32>,
        emit: &mut dyn FnMut(&[u32]),
    ) {
        if i == items.len() {
            debug_assert_eq!(need, 0);
            emit(counts);
            return;
        }
        let (a, k) = items[i];
        let mut rest = need;
        for x in 0..=k {
            if reachable[i + 1].contains(rest) {
                counts.push(x);
                walk(i + 1, rest, p, items, reachable, counts, emit);
                counts.pop();
            }
            rest = ((rest as u128 + p as u128 - a as u128) % p as u128) as u64;
        }
    }

    if reachable[0].contains(aim) {
        let mut counts = Vec::with_capacity(items.len());
        walk(0, aim, p, &items, &reachable, &mut counts, &mut emit);
    }
    Ok(())
}

/// Every distinct submultiset `M'` of `m` satisfying the congruence for
/// `pre`, ordered lexicographically by count vector (ascending values).
pub fn generate_subsets_aim(m: &DenomMultiset, pre: &PreAim) -> Result<Vec<DenomMultiset>> {
    let PreAim::Solvable { p, s, aim, .. } = *pre else {
        return Err(Error::Internal(
            "subset generation needs a solvable pre-aim".into(),
        ));
    };
    let mut out = Vec::new();
    for_each_subset_aim(m, p, s, aim, |counts| out.push(select(m, counts)))?;
    Ok(out)
}

fn select(m: &DenomMultiset, counts: &[u32]) -> DenomMultiset {
    DenomMultiset::from_sorted_counts(
        m.iter_counts()
            .zip(counts)
            .filter(|(_, &x)| x > 0)
            .map(|((v, _), &x)| (v, x))
            .collect(),
    )
}

/// The subbranches for a non-integral `diff` before any reduction: one per
/// admissible removal set, removing it and reserving the other multiples
/// of `p^s`.
pub fn split_on_prime_power(br: &Branch) -> Result<Vec<Branch>> {
    let mut out = Vec::new();
    visit_split(br, |mut child| {
        child.refresh_gpp();
        out.push(child)
    })?;
    Ok(out)
}

fn visit_split(br: &Branch, mut visit: impl FnMut(Branch)) -> Result<()> {
    let pre = compute_pre_aim(br);
    let PreAim::Solvable { p, s, aim, .. } = pre else {
        return Ok(());
    };
    let ps = p.pow(s);
    let (multiples, rest) = br.denoms().partition_multiples(ps);
    for_each_subset_aim(&multiples, p, s, aim, |counts| {
        let mut removed = Vec::new();
        let mut kept = Vec::new();
        for ((v, k), &x) in multiples.iter_counts().zip(counts) {
            if x > 0 {
                removed.push((v, x));
            }
            if x < k {
                kept.push((v, k - x));
            }
        }
        let removed = DenomMultiset::from_sorted_counts(removed);
        let kept = DenomMultiset::from_sorted_counts(kept);
        visit(br.split_child(rest.clone(), &removed, &kept));
    })
}

pub fn kill_when_diff_is_not_integer(br: &Branch) -> KillResult {
    let mut out = KillResult::empty();
    let outcome = visit_split(br, |child| {
        if let Some(child) = child.reduce_or_drop() {
            if child.diff_is_zero() {
                out.representations.push(child);
            } else {
                out.pending.push(child);
            }
        }
    });
    // Only a precondition failure inside subset generation can error, and
    // the partition above guarantees it.
    debug_assert!(outcome.is_ok(), "{outcome:?}");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{mod_small, Rational};

    fn ms(v: &[u64]) -> DenomMultiset {
        DenomMultiset::from_values(v.to_vec())
    }

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn reps(res: &KillResult) -> Vec<DenomMultiset> {
        let mut v: Vec<_> = res
            .representations
            .iter()
            .map(|b| b.representation())
            .collect();
        v.sort();
        v
    }

    #[test]
    fn kill_trivial_cases() {
        let done = Branch::new(ms(&[2, 3, 6]), Rational::one());
        let res = kill(&done);
        assert_eq!(res.representations.len(), 1);
        assert!(res.pending.is_empty());

        let neg = Branch::new(ms(&[3]), q("2/3"));
        assert_eq!(neg.diff(), q("-1/3"));
        let res = kill(&neg);
        assert!(res.representations.is_empty() && res.pending.is_empty());

        let res = kill(&Branch::new(ms(&[2, 2, 4, 4]), q("9/8")));
        assert!(res.representations.is_empty() && res.pending.is_empty());
    }

    #[test]
    fn integer_case_equal_promotes() {
        let br = Branch::new(ms(&[1, 2, 3, 6]), Rational::one());
        assert_eq!(br.diff(), Rational::one());
        let res = kill_when_diff_is_integer(&br);
        assert_eq!(reps(&res), vec![ms(&[1])]);
        assert_eq!(res.pending.len(), 1);
        let next = &res.pending[0];
        next.check_invariants().unwrap();
        assert!(next.diff().is_zero());
        assert_eq!(next.representation(), ms(&[2, 3, 6]));
    }

    #[test]
    fn integer_case_duplicates_collapse() {
        let br = Branch::new(ms(&[1, 1]), Rational::one());
        let res = kill_when_diff_is_integer(&br);
        assert_eq!(reps(&res), vec![ms(&[1])]);
        // the remove-all child has diff = -1 and is dropped
        assert!(res.pending.is_empty());
    }

    #[test]
    fn integer_case_below_unit_removes_all_copies() {
        let br = Branch::new(ms(&[3, 3, 3]), Rational::zero());
        let res = kill_when_diff_is_integer(&br);
        assert!(res.representations.is_empty());
        assert_eq!(res.pending.len(), 1);
        let next = &res.pending[0];
        assert!(next.diff().is_zero());
        assert!(next.representation().is_empty());
    }

    #[test]
    fn integer_case_greater_branches_twice() {
        // D = {2,2,3,3,6,6}, r = 1, diff = 1; l = 2 with r > 1/2
        let br = Branch::new(ms(&[2, 2, 3, 3, 6, 6]), Rational::one());
        assert_eq!(br.diff(), Rational::one());
        let res = kill_when_diff_is_integer(&br);
        assert!(res.representations.is_empty());
        assert_eq!(res.pending.len(), 2);
        for b in &res.pending {
            b.check_invariants().unwrap();
            assert!(b.denoms().len() < br.denoms().len());
        }
        assert_eq!(res.pending[0].reserved().multiplicity(2), 1);
        assert_eq!(res.pending[1].reserved().multiplicity(2), 0);
        assert!(!res.pending[1].denoms().contains(2));
    }

    #[test]
    fn pre_aim_cases() {
        let br = Branch::new(ms(&[1, 7, 14, 21, 28]), Rational::one());
        assert_eq!(
            compute_pre_aim(&br),
            PreAim::Solvable {
                p: 7,
                s: 1,
                t: 1,
                aim: 5
            }
        );

        let br = Branch::new(ms(&[2, 2, 4, 4]), q("9/8"));
        assert_eq!(compute_pre_aim(&br), PreAim::Unsolvable);

        let br = Branch::new(ms(&[2, 3]), q("1/7"));
        assert_eq!(br.diff(), q("29/42"));
        assert_eq!(compute_pre_aim(&br), PreAim::Unsolvable);

        // t < s: D = {4, 4}, r = 0, diff = 1/2
        let br = Branch::new(ms(&[4, 4]), Rational::zero());
        assert_eq!(
            compute_pre_aim(&br),
            PreAim::Solvable {
                p: 2,
                s: 2,
                t: 1,
                aim: 0
            }
        );
    }

    #[test]
    fn subsets_for_worked_example() {
        let pre = PreAim::Solvable {
            p: 7,
            s: 1,
            t: 1,
            aim: 5,
        };
        let got = generate_subsets_aim(&ms(&[7, 14, 21, 28]), &pre).unwrap();
        assert_eq!(got, vec![ms(&[21]), ms(&[7, 14]), ms(&[7, 14, 21, 28])]);
    }

    #[test]
    fn subsets_with_multiplicity() {
        let pre = PreAim::Solvable {
            p: 3,
            s: 1,
            t: 1,
            aim: 2,
        };
        assert_eq!(
            generate_subsets_aim(&ms(&[3, 3]), &pre).unwrap(),
            vec![ms(&[3, 3])]
        );
        let pre = PreAim::Solvable {
            p: 7,
            s: 1,
            t: 1,
            aim: 3,
        };
        assert!(generate_subsets_aim(&ms(&[7]), &pre).unwrap().is_empty());
    }

    #[test]
    fn subsets_aim_zero_includes_empty() {
        let pre = PreAim::Solvable {
            p: 2,
            s: 2,
            t: 1,
            aim: 0,
        };
        let got = generate_subsets_aim(&ms(&[4, 4]), &pre).unwrap();
        assert_eq!(got, vec![ms(&[]), ms(&[4, 4])]);
    }

    #[test]
    fn subsets_reject_bad_multiples() {
        let pre = PreAim::Solvable {
            p: 2,
            s: 1,
            t: 1,
            aim: 1,
        };
        assert!(generate_subsets_aim(&ms(&[4]), &pre).is_err());
        assert!(generate_subsets_aim(&ms(&[3]), &pre).is_err());
        assert!(generate_subsets_aim(&ms(&[2]), &PreAim::Unsolvable).is_err());
    }

    #[test]
    fn subsets_large_prime_sparse_table() {
        // p above the dense limit once multiplied by the item count
        let p = 16_777_259u64; // prime
        let pre = PreAim::Solvable {
            p,
            s: 1,
            t: 1,
            aim: 2,
        };
        let m = ms(&[p, p]);
        assert_eq!(generate_subsets_aim(&m, &pre).unwrap(), vec![ms(&[p, p])]);
    }

    #[test]
    fn split_children_before_reduce() {
        let br = Branch::new(ms(&[1, 7, 14, 21, 28]), Rational::one());
        let children = split_on_prime_power(&br).unwrap();
        let rows: Vec<(Vec<u64>, Vec<u64>, String, String)> = children
            .iter()
            .map(|c| {
                c.check_invariants().unwrap();
                (
                    c.denoms().to_vec(),
                    c.reserved().to_vec(),
                    c.r().to_string(),
                    c.diff().to_string(),
                )
            })
            .collect();
        assert_eq!(
            rows,
            vec![
                (vec![1], vec![7, 14, 28], "3/4".into(), "1/4".into()),
                (vec![1], vec![21, 28], "11/12".into(), "1/12".into()),
                (vec![1], vec![], "1".into(), "0".into()),
            ]
        );
    }

    #[test]
    fn non_integer_example_one() {
        let br = Branch::new(ms(&[2, 3, 4, 12]), q("1/3"));
        let children = split_on_prime_power(&br).unwrap();
        let removed: Vec<DenomMultiset> = children
            .iter()
            .map(|c| ms(&[3, 12]).difference_unchecked(&c.reserved().clone()))
            .collect();
        assert_eq!(removed, vec![ms(&[12]), ms(&[3])]);
        // Reduction resolves both children: removing {3} leaves {2,4} with
        // r = 1/4, giving {4,12}; removing {12} reserves 3 with r = 0.
        let res = kill_when_diff_is_not_integer(&br);
        assert_eq!(reps(&res), vec![ms(&[3]), ms(&[4, 12])]);
        assert!(res.pending.is_empty());
    }

    #[test]
    fn non_integer_unsolvable() {
        let res = kill_when_diff_is_not_integer(&Branch::new(ms(&[2, 2, 4, 4]), q("9/8")));
        assert!(res.representations.is_empty() && res.pending.is_empty());
    }

    #[test]
    fn example_three_after_reduction() {
        let br = Branch::new(ms(&[1, 7, 14, 21, 28]), Rational::one());
        let res = kill(&br);
        assert_eq!(reps(&res), vec![ms(&[1])]);
        assert!(res.pending.is_empty());
    }

    #[test]
    fn children_clear_prime_power() {
        let br = Branch::new(DenomMultiset::range(1, 30), q("3/2"));
        let Some(gpp) = br.gpp() else { panic!() };
        let p = gpp.prime_u64().unwrap();
        let PreAim::Solvable { s, .. } = compute_pre_aim(&br) else {
            panic!()
        };
        let ps = p.pow(s);
        let res = kill(&br);
        for child in res.pending.iter() {
            child.check_invariants().unwrap();
            assert!(child.denoms().iter().all(|d| d % ps != 0));
            assert_ne!(mod_small(child.diff().denom().magnitude(), ps), 0);
            assert!(child.denoms().len() < br.denoms().len());
        }
    }
}
