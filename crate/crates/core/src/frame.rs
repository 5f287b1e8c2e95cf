//! Fixed common denominator shared by every branch of one search.
//!
//! All quantities a branch tracks are sums of `1/d` for `d` in the input
//! multiset plus the target, so they are integers over
//! `L = lcm(D, denominator(r))`. Keeping numerators over `L` turns every
//! update into an integer subtraction, and the prime-power structure of a
//! reduced denominator can be read off the numerator's residues modulo the
//! prime powers of `L`.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::{factorize, factorize_u64, inverse_u64, mod_small, PrimePower, Rational};
use crate::multiset::DenomMultiset;

pub(crate) struct FramePrime {
    prime: BigUint,
    small: Option<u64>,
    /// Exponent of the prime in `L`.
    exponent: u32,
    /// `p^exponent`, when it fits in a word.
    full: Option<u64>,
    /// `(L / p^exponent) mod p`, when `p` fits in a word.
    cofactor_mod_p: u64,
}

pub(crate) struct Frame {
    scale: BigInt,
    /// `(value, L / value)`, ascending by value.
    weights: Vec<(u64, BigInt)>,
    primes: Vec<FramePrime>,
    /// Products of word-sized prime powers, with the primes they cover.
    groups: Vec<(u64, Vec<usize>)>,
    /// Primes whose full power in `L` does not fit in a word.
    wide: Vec<usize>,
    original_r: Rational,
}

impl Frame {
    pub(crate) fn new(denoms: &DenomMultiset, r: &Rational) -> Frame {
        let mut exps: Vec<(BigUint, u32)> = Vec::new();
        let mut absorb = |p: BigUint, e: u32| match exps.iter_mut().find(|(q, _)| *q == p) {
            Some((_, k)) => *k = (*k).max(e),
            None => exps.push((p, e)),
        };
        for (v, _) in denoms.iter_counts() {
            for (p, e) in factorize_u64(v) {
                absorb(BigUint::from(p), e);
            }
        }
        for (p, e) in factorize(r.denom().magnitude()) {
            absorb(p, e);
        }
        exps.sort();

        let scale_u: BigUint = exps.iter().fold(BigUint::one(), |acc, (p, e)| {
            acc * num_traits::pow(p.clone(), *e as usize)
        });
        let scale = BigInt::from(scale_u.clone());

        let primes: Vec<FramePrime> = exps
            .into_iter()
            .map(|(prime, exponent)| {
                let small = prime.to_u64();
                let full = small.and_then(|p| p.checked_pow(exponent));
                let cofactor_mod_p = match small {
                    Some(p) => {
                        let pe = num_traits::pow(prime.clone(), exponent as usize);
                        mod_small(&(&scale_u / pe), p)
                    }
                    None => 0,
                };
                FramePrime {
                    prime,
                    small,
                    exponent,
                    full,
                    cofactor_mod_p,
                }
            })
            .collect();

        let mut groups: Vec<(u64, Vec<usize>)> = Vec::new();
        let mut wide = Vec::new();
        for (i, fp) in primes.iter().enumerate() {
            let Some(pe) = fp.full else {
                wide.push(i);
                continue;
            };
            match groups
                .last_mut()
                .and_then(|(m, idx)| m.checked_mul(pe).map(|n| (m, idx, n)))
            {
                Some((m, idx, n)) => {
                    *m = n;
                    idx.push(i);
                }
                None => groups.push((pe, vec![i])),
            }
        }

        let weights = denoms
            .iter_counts()
            .map(|(v, _)| (v, &scale / BigInt::from(v)))
            .collect();

        Frame {
            scale,
            weights,
            primes,
            groups,
            wide,
            original_r: r.clone(),
        }
    }

    pub(crate) fn original_r(&self) -> &Rational {
        &self.original_r
    }

    /// `L / v`; `v` must be one of the frame's values.
    pub(crate) fn weight(&self, v: u64) -> &BigInt {
        let i = self
            .weights
            .binary_search_by_key(&v, |(w, _)| *w)
            .unwrap_or_else(|_| panic!("{v} is not a denominator of this search"));
        &self.weights[i].1
    }

    /// `L * R(e)`.
    pub(crate) fn weighted_sum(&self, e: &DenomMultiset) -> BigInt {
        let mut acc = BigInt::zero();
        for (v, k) in e.iter_counts() {
            if k == 1 {
                acc += self.weight(v);
            } else {
                acc += self.weight(v) * BigInt::from(k);
            }
        }
        acc
    }

    /// `q * L`; `q`'s denominator must divide `L`.
    pub(crate) fn numerator_of(&self, q: &Rational) -> BigInt {
        let (quot, rem) = self.scale.div_rem(q.denom());
        debug_assert!(rem.is_zero());
        q.numer() * quot
    }

    pub(crate) fn to_rational(&self, n: &BigInt) -> Rational {
        Rational::new(n.clone(), self.scale.clone()).expect("scale is positive")
    }

    /// Exponent of prime `idx` in the reduced denominator of `n / L`.
    fn residual_exponent(&self, idx: usize, low_valuation: u32) -> u32 {
        self.primes[idx].exponent - low_valuation
    }

    /// Largest prime power (by value) dividing the reduced denominator of
    /// `n / L`, as (prime index, exponent).
    pub(crate) fn greatest_prime_power(&self, n: &BigInt) -> Option<(usize, u32)> {
        if n.is_zero() {
            return None;
        }
        let mag = n.magnitude();
        let mut best: Option<(u64, usize, u32)> = None;
        for (modulus, members) in &self.groups {
            let x = mod_small(mag, *modulus);
            for &i in members {
                let fp = &self.primes[i];
                let p = fp.small.unwrap();
                let mut rest = x % fp.full.unwrap();
                let mut val = 0;
                while val < fp.exponent && rest % p == 0 {
                    // rest == 0 means divisible by the full power
                    if rest == 0 {
                        val = fp.exponent;
                        break;
                    }
                    rest /= p;
                    val += 1;
                }
                let t = self.residual_exponent(i, val);
                if t == 0 {
                    continue;
                }
                let value = p.pow(t);
                if best.is_none_or(|(b, _, _)| value > b) {
                    best = Some((value, i, t));
                }
            }
        }
        let mut wide_best: Option<(BigUint, usize, u32)> = None;
        for &i in &self.wide {
            let fp = &self.primes[i];
            let mut val = 0;
            let mut rest = mag.clone();
            while val < fp.exponent && (&rest % &fp.prime).is_zero() {
                rest /= &fp.prime;
                val += 1;
            }
            let t = self.residual_exponent(i, val);
            if t == 0 {
                continue;
            }
            let value = num_traits::pow(fp.prime.clone(), t as usize);
            if wide_best.as_ref().is_none_or(|(b, _, _)| value > *b) {
                wide_best = Some((value, i, t));
            }
        }
        match (best, wide_best) {
            (Some((v, i, t)), Some((w, j, u))) => {
                if BigUint::from(v) > w {
                    Some((i, t))
                } else {
                    Some((j, u))
                }
            }
            (Some((_, i, t)), None) => Some((i, t)),
            (None, Some((_, j, u))) => Some((j, u)),
            (None, None) => None,
        }
    }

    pub(crate) fn prime_power(&self, idx: usize, t: u32) -> PrimePower {
        PrimePower::new(self.primes[idx].prime.clone(), t).expect("frame primes are prime")
    }

    pub(crate) fn small_prime(&self, idx: usize) -> Option<u64> {
        self.primes[idx].small
    }

    /// For `n / L` in lowest terms `m / (c p^t)` with `p` not dividing `c`,
    /// returns `m * c^{-1} mod p`. Any factor cancelled while reducing is
    /// coprime to `p` and drops out of the ratio.
    pub(crate) fn unit_residue(&self, n: &BigInt, idx: usize, t: u32) -> u64 {
        let fp = &self.primes[idx];
        let p = fp.small.expect("word-sized prime");
        let shift = fp.exponent - t;
        let mag = n.magnitude();
        let stripped = match p.checked_pow(shift + 1) {
            Some(m) => mod_small(mag, m) / p.pow(shift),
            None => {
                let ps = num_traits::pow(BigUint::from(p), shift as usize);
                mod_small(&(mag / ps), p)
            }
        };
        let inv = inverse_u64(fp.cofactor_mod_p, p).expect("cofactor is coprime to p");
        ((stripped as u128 * inv as u128) % p as u128) as u64
    }
}
