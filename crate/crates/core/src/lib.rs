//! Enumerates the submultisets of a finite multiset of positive integers
//! whose reciprocals sum to a given rational number.
//!
//! The search repeatedly picks the largest prime power `p^t` in the
//! denominator of `R(D) - r`, and splits on which multiples of `p^s` to drop
//! so that the power disappears from the denominator. Admissible drop sets
//! are exactly the solutions of a small subset-sum problem modulo `p`.
//!
//! ```
//! use ufrac::{ufrac, DenomMultiset, Rational};
//!
//! let d = DenomMultiset::from_elements([2, 3, 4, 12]).unwrap();
//! let r: Rational = "1/3".parse().unwrap();
//! let reps = ufrac(&d, &r).unwrap();
//! assert_eq!(reps.len(), 2);
//! ```

pub mod apps;
pub mod arith;
pub mod branch;
mod error;
mod frame;
pub mod kill;
pub mod multiset;
pub mod search;

pub use arith::{
    delta, greatest_prime_power, make_rational, mod_inverse, reciprocal_sum, PrimePower, Rational,
};
pub use branch::{make_branch, Branch};
pub use error::{Error, Result};
pub use kill::{
    compute_pre_aim, generate_subsets_aim, kill, kill_when_diff_is_integer,
    kill_when_diff_is_not_integer, split_on_prime_power, KillResult, PreAim,
};
pub use multiset::DenomMultiset;
pub use search::{
    brute_force_oracle, search, ufrac, ufrac_early_stopping, ufrac_early_stopping_with, ufrac_with,
    SearchOptions, SearchStats,
};
