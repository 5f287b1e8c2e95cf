//! Search nodes and their state transitions.
//!
//! A [`Branch`] carries the unexamined denominators `D`, the reserved
//! denominators, the original and residual targets, the current
//! difference `R(D) - r`, and the greatest prime power of that difference's
//! denominator. Reserving a submultiset lowers `r` and leaves `diff` alone;
//! removing one lowers `diff` and leaves `r` alone.
//!
//! Internally `r` and `diff` are kept as integer numerators over a common
//! denominator shared by every branch descending from the same root.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::arith::{greatest_prime_power, reciprocal_sum, PrimePower, Rational};
use crate::error::{invalid, Error, Result};
use crate::frame::Frame;
use crate::multiset::DenomMultiset;

#[derive(Clone)]
pub struct Branch {
    frame: Arc<Frame>,
    denoms: DenomMultiset,
    reserved: DenomMultiset,
    r_num: BigInt,
    diff_num: BigInt,
    /// Prime index into the frame and exponent.
    gpp: Option<(usize, u32)>,
}

impl Branch {
    /// Fresh branch for target `r` over `denoms`, nothing reserved.
    pub fn new(denoms: DenomMultiset, r: Rational) -> Self {
        let frame = Arc::new(Frame::new(&denoms, &r));
        let r_num = frame.numerator_of(&r);
        let diff_num = frame.weighted_sum(&denoms) - &r_num;
        let gpp = frame.greatest_prime_power(&diff_num);
        Branch {
            frame,
            denoms,
            reserved: DenomMultiset::new(),
            r_num,
            diff_num,
            gpp,
        }
    }

    pub fn denoms(&self) -> &DenomMultiset {
        &self.denoms
    }

    pub fn reserved(&self) -> &DenomMultiset {
        &self.reserved
    }

    pub fn original_r(&self) -> &Rational {
        self.frame.original_r()
    }

    pub fn r(&self) -> Rational {
        self.frame.to_rational(&self.r_num)
    }

    pub fn diff(&self) -> Rational {
        self.frame.to_rational(&self.diff_num)
    }

    pub fn gpp(&self) -> Option<PrimePower> {
        self.gpp.map(|(i, t)| self.frame.prime_power(i, t))
    }

    pub(crate) fn diff_is_zero(&self) -> bool {
        self.diff_num.is_zero()
    }

    pub(crate) fn diff_is_negative(&self) -> bool {
        self.diff_num.is_negative()
    }

    pub(crate) fn diff_is_integer(&self) -> bool {
        self.gpp.is_none()
    }

    pub(crate) fn r_is_negative(&self) -> bool {
        self.r_num.is_negative()
    }

    /// Compares `r` with `1/d`; `d` must come from the root's denominators.
    pub(crate) fn cmp_r_unit(&self, d: u64) -> Ordering {
        self.r_num.cmp(self.frame.weight(d))
    }

    /// The greatest prime power as (prime if word-sized, exponent).
    pub(crate) fn gpp_raw(&self) -> Option<(Option<u64>, u32)> {
        self.gpp.map(|(i, t)| (self.frame.small_prime(i), t))
    }

    /// With `diff = m / (c p^t)` for the greatest prime power `p^t`, the
    /// residue `m c^{-1} mod p`.
    pub(crate) fn diff_unit_residue(&self) -> Option<u64> {
        let (i, t) = self.gpp?;
        self.frame.small_prime(i)?;
        Some(self.frame.unit_residue(&self.diff_num, i, t))
    }

    /// The multiset of denominators this branch stands for once `diff` is 0.
    pub fn representation(&self) -> DenomMultiset {
        self.reserved.union(&self.denoms)
    }

    pub fn is_representation(&self) -> bool {
        self.diff_is_zero() && !self.r_is_negative()
    }

    pub fn reserve(&self, e: &DenomMultiset) -> Result<Branch> {
        if !e.is_submultiset_of(&self.denoms) {
            return invalid("reserved multiset is not contained in the branch denominators");
        }
        let mut next = self.clone();
        next.reserve_raw(e);
        next.refresh_gpp();
        Ok(next)
    }

    pub fn remove(&self, e: &DenomMultiset) -> Result<Branch> {
        if !e.is_submultiset_of(&self.denoms) {
            return invalid("removed multiset is not contained in the branch denominators");
        }
        let mut next = self.clone();
        next.remove_raw(e);
        next.refresh_gpp();
        Ok(next)
    }

    /// Applies the forced moves until neither applies: elements with
    /// `1/d > r` are removed, then elements with `1/d > diff` are reserved.
    /// The result may have a negative `r` or `diff`.
    pub fn reduce(&self) -> Branch {
        let mut next = self.clone();
        next.reduce_raw(false);
        next.refresh_gpp();
        next
    }

    /// Like [`Branch::reduce`], but gives up as soon as `r` or `diff` goes
    /// negative. Neither quantity ever increases during reduction, so such a
    /// branch would be discarded anyway.
    pub(crate) fn reduce_or_drop(mut self) -> Option<Branch> {
        if !self.reduce_raw(true) {
            return None;
        }
        self.refresh_gpp();
        Some(self)
    }

    /// Returns `false` if stopped early on an infeasible state.
    fn reduce_raw(&mut self, stop_when_infeasible: bool) -> bool {
        loop {
            if stop_when_infeasible && (self.r_is_negative() || self.diff_is_negative()) {
                return false;
            }
            let Some(&(smallest, _)) = self.denoms.counts().first() else {
                return true;
            };
            let frame = Arc::clone(&self.frame);
            // 1/d > q  <=>  L/d > q L
            if &self.r_num < frame.weight(smallest) {
                let (forced, rest) = self.denoms.split_prefix(|d| &self.r_num < frame.weight(d));
                self.diff_num -= frame.weighted_sum(&forced);
                self.denoms = rest;
            } else if &self.diff_num < frame.weight(smallest) {
                let (forced, rest) = self
                    .denoms
                    .split_prefix(|d| &self.diff_num < frame.weight(d));
                self.r_num -= frame.weighted_sum(&forced);
                self.reserved = self.reserved.union(&forced);
                self.denoms = rest;
            } else {
                return true;
            }
        }
    }

    pub(crate) fn reserve_raw(&mut self, e: &DenomMultiset) {
        if e.is_empty() {
            return;
        }
        self.denoms = self.denoms.difference_unchecked(e);
        self.reserved = self.reserved.union(e);
        self.r_num -= self.frame.weighted_sum(e);
    }

    pub(crate) fn remove_raw(&mut self, e: &DenomMultiset) {
        if e.is_empty() {
            return;
        }
        self.denoms = self.denoms.difference_unchecked(e);
        self.diff_num -= self.frame.weighted_sum(e);
    }

    /// Child over `rest` after removing `removed` and reserving `kept`; the
    /// caller must refresh `gpp` (reduction does).
    pub(crate) fn split_child(
        &self,
        rest: DenomMultiset,
        removed: &DenomMultiset,
        kept: &DenomMultiset,
    ) -> Branch {
        let diff_num = if removed.is_empty() {
            self.diff_num.clone()
        } else {
            &self.diff_num - self.frame.weighted_sum(removed)
        };
        let (reserved, r_num) = if kept.is_empty() {
            (self.reserved.clone(), self.r_num.clone())
        } else {
            (
                self.reserved.union(kept),
                &self.r_num - self.frame.weighted_sum(kept),
            )
        };
        Branch {
            frame: Arc::clone(&self.frame),
            denoms: rest,
            reserved,
            r_num,
            diff_num,
            gpp: None,
        }
    }

    /// Representation found: `r` hit zero with everything else dropped.
    pub(crate) fn promoted(&self, reserved: DenomMultiset) -> Branch {
        Branch {
            frame: Arc::clone(&self.frame),
            denoms: DenomMultiset::new(),
            reserved,
            r_num: BigInt::zero(),
            diff_num: BigInt::zero(),
            gpp: None,
        }
    }

    pub(crate) fn refresh_gpp(&mut self) {
        self.gpp = self.frame.greatest_prime_power(&self.diff_num);
    }

    /// Recomputes every cached field from `D`, the reserved set and the
    /// original target with plain rational arithmetic, and reports the
    /// first mismatch.
    pub fn check_invariants(&self) -> Result<()> {
        let r = self.original_r() - &reciprocal_sum(&self.reserved);
        if r != self.r() {
            return Err(Error::Internal(format!(
                "r is {} but should be {r}: {self:?}",
                self.r()
            )));
        }
        let diff = reciprocal_sum(&self.denoms) - &r;
        if diff != self.diff() {
            return Err(Error::Internal(format!(
                "diff is {} but should be {diff}: {self:?}",
                self.diff()
            )));
        }
        if greatest_prime_power(&diff) != self.gpp() {
            return Err(Error::Internal(format!("stale gpp: {self:?}")));
        }
        Ok(())
    }
}

pub fn make_branch(denoms: DenomMultiset, r: Rational) -> Branch {
    Branch::new(denoms, r)
}

impl PartialEq for Branch {
    fn eq(&self, other: &Self) -> bool {
        self.denoms == other.denoms
            && self.reserved == other.reserved
            && self.original_r() == other.original_r()
            && self.r() == other.r()
            && self.diff() == other.diff()
    }
}

impl Eq for Branch {}

impl fmt::Debug for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "D={:?} rsvd={:?} r={} original-r={} diff={}",
            self.denoms,
            self.reserved,
            self.r(),
            self.original_r(),
            self.diff()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn ms(v: &[u64]) -> DenomMultiset {
        DenomMultiset::from_values(v.to_vec())
    }

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn gpp_value(br: &Branch) -> Option<u64> {
        br.gpp().map(|g| g.value().to_u64().unwrap())
    }

    /// Branch with an explicit reserved set, built through the public API.
    fn with_reserved(d: &[u64], reserved: &[u64], original: &str) -> Branch {
        let all = ms(d).union(&ms(reserved));
        Branch::new(all, q(original))
            .reserve(&ms(reserved))
            .unwrap()
    }

    #[test]
    fn construction() {
        let br = Branch::new(ms(&[2, 3, 4, 12]), q("1/3"));
        assert_eq!(br.diff(), q("5/6"));
        assert_eq!(gpp_value(&br), Some(3));
        br.check_invariants().unwrap();

        let empty = Branch::new(ms(&[]), Rational::zero());
        assert!(empty.diff().is_zero());
        assert!(empty.gpp().is_none());

        let br = Branch::new(ms(&[1, 7, 14, 21, 28]), Rational::one());
        assert_eq!(br.diff(), q("25/84"));
        assert_eq!(gpp_value(&br), Some(7));
    }

    #[test]
    fn reserve_keeps_diff() {
        let br = Branch::new(ms(&[2, 3, 4, 12]), q("1/3"));
        let next = br.reserve(&ms(&[12])).unwrap();
        assert_eq!(next.denoms(), &ms(&[2, 3, 4]));
        assert_eq!(next.r(), q("1/4"));
        assert_eq!(next.diff(), q("5/6"));
        next.check_invariants().unwrap();
        assert_eq!(br.reserve(&ms(&[])).unwrap(), br);
        assert!(br.reserve(&ms(&[5])).is_err());
    }

    #[test]
    fn remove_lowers_diff() {
        let br = Branch::new(ms(&[2, 3, 4, 12]), q("1/3"));
        assert_eq!(br.remove(&ms(&[3])).unwrap().diff(), q("1/2"));
        assert_eq!(br.remove(&ms(&[12])).unwrap().diff(), q("3/4"));
        assert_eq!(br.remove(&ms(&[])).unwrap(), br);
        assert!(br.remove(&ms(&[2, 2])).is_err());
    }

    #[test]
    fn reserve_then_remove() {
        let br = Branch::new(ms(&[1, 7, 14, 21, 28]), Rational::one());
        let next = br
            .reserve(&ms(&[7, 14, 28]))
            .unwrap()
            .remove(&ms(&[21]))
            .unwrap();
        assert_eq!(next.r(), q("3/4"));
        assert_eq!(next.diff(), q("1/4"));
        assert_eq!(next.denoms(), &ms(&[1]));
        next.check_invariants().unwrap();
    }

    #[test]
    fn reduce_forces_removal_then_representation() {
        let br = with_reserved(&[2, 4], &[12], "1/3");
        assert_eq!(br.r(), q("1/4"));
        assert_eq!(br.diff(), q("1/2"));
        let red = br.reduce();
        red.check_invariants().unwrap();
        assert!(red.diff().is_zero());
        assert_eq!(red.representation(), ms(&[4, 12]));
    }

    #[test]
    fn reduce_alternates_rules() {
        let br = Branch::new(ms(&[2, 3]), q("1/2"));
        assert_eq!(br.diff(), q("1/3"));
        let red = br.reduce();
        red.check_invariants().unwrap();
        assert!(red.r().is_zero());
        assert!(red.diff().is_zero());
        assert!(red.denoms().is_empty());
        assert_eq!(red.representation(), ms(&[2]));
    }

    #[test]
    fn reduce_fixpoint_untouched() {
        // max reciprocal 1/5 <= min(r, diff)
        let br = Branch::new(ms(&[5, 6, 7, 8]), q("1/4"));
        assert!(br.diff() >= q("1/5"));
        assert_eq!(br.reduce(), br);
    }

    #[test]
    fn reduce_boundary_is_not_forced() {
        // 1/3 == r is left for the kill step
        let br = Branch::new(ms(&[3, 4, 5]), q("1/3"));
        let red = br.reduce();
        assert!(red.denoms().contains(3));
    }

    #[test]
    fn reduce_or_drop_drops_infeasible() {
        // r = 1/12 forces removal of {2, 3}, making diff negative.
        let br = Branch::new(ms(&[2, 3]), q("1/12"));
        assert!(br.clone().reduce_or_drop().is_none());
        let full = br.reduce();
        assert!(full.diff().is_negative());
    }

    #[test]
    fn debug_lists_fields() {
        let br = Branch::new(ms(&[1, 7]), Rational::one());
        assert_eq!(
            format!("{br:?}"),
            "D={1,7} rsvd={} r=1 original-r=1 diff=1/7"
        );
    }
}
