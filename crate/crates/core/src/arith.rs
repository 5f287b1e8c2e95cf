//! Exact rational arithmetic and the number-theoretic helpers the search
//! relies on: reduced fractions, prime-power extraction from denominators,
//! and modular inverses.
//!
//! Nothing in this module touches floating point.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{invalid, Result};
use crate::multiset::DenomMultiset;

/// An exact fraction, always kept in lowest terms with a positive denominator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self> {
        let den = den.into();
        if den.is_zero() {
            return invalid("zero denominator");
        }
        Ok(Rational(BigRational::new(num.into(), den)))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    /// `count / value`, the contribution of `count` copies of `1/value`.
    pub fn unit_multiple(value: u64, count: u32) -> Self {
        debug_assert!(value > 0);
        Rational(BigRational::new(BigInt::from(count), BigInt::from(value)))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    /// Whether `1/d > self`.
    pub fn below_unit(&self, d: u64) -> bool {
        if !self.is_positive() {
            return true;
        }
        // num/den < 1/d  <=>  num * d < den
        self.numer() * BigInt::from(d) < *self.denom()
    }

    /// Compares `self` with `1/d`.
    pub fn cmp_unit(&self, d: u64) -> Ordering {
        (self.numer() * BigInt::from(d)).cmp(self.denom())
    }
}

pub fn make_rational(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Rational> {
    Rational::new(num, den)
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom().is_one() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse = |t: &str| {
            t.trim()
                .parse::<BigInt>()
                .map_err(|_| crate::Error::InvalidInput(format!("not a rational number: {s:?}")))
        };
        match s.split_once('/') {
            Some((n, d)) => Rational::new(parse(n)?, parse(d)?),
            None => Ok(Rational::from_integer(parse(s)?)),
        }
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl $tr<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl $tr<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

/// Sum of `1/d` over `denoms`, counted with multiplicity. The empty multiset
/// sums to zero.
pub fn reciprocal_sum(denoms: &DenomMultiset) -> Rational {
    let terms: Vec<Rational> = denoms
        .iter_counts()
        .map(|(v, k)| Rational::unit_multiple(v, k))
        .collect();
    balanced_sum(terms)
}

// Pairwise summation keeps intermediate denominators small, which matters
// once the multiset has a few hundred entries.
fn balanced_sum(mut terms: Vec<Rational>) -> Rational {
    if terms.is_empty() {
        return Rational::zero();
    }
    while terms.len() > 1 {
        let mut next = Vec::with_capacity(terms.len().div_ceil(2));
        let mut it = terms.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(a + b),
                None => next.push(a),
            }
        }
        terms = next;
    }
    terms.pop().unwrap()
}

/// `R(D) - r`.
pub fn delta(denoms: &DenomMultiset, r: &Rational) -> Rational {
    reciprocal_sum(denoms) - r
}

/// A prime power `p^e` with `e >= 1`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PrimePower {
    prime: BigUint,
    exponent: u32,
    value: BigUint,
}

impl PrimePower {
    pub fn new(prime: impl Into<BigUint>, exponent: u32) -> Result<Self> {
        let prime = prime.into();
        if exponent == 0 {
            return invalid("prime power exponent must be at least 1");
        }
        if !is_prime_big(&prime) {
            return invalid(format!("{prime} is not prime"));
        }
        Ok(Self::new_unchecked(prime, exponent))
    }

    fn new_unchecked(prime: BigUint, exponent: u32) -> Self {
        let value = num_traits::pow(prime.clone(), exponent as usize);
        PrimePower {
            prime,
            exponent,
            value,
        }
    }

    pub fn prime(&self) -> &BigUint {
        &self.prime
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn prime_u64(&self) -> Option<u64> {
        self.prime.to_u64()
    }
}

impl fmt::Debug for PrimePower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}", self.prime, self.exponent)
    }
}

impl fmt::Display for PrimePower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// The largest (by value) full prime-power factor of `q`'s denominator, or
/// `None` when `q` is an integer.
pub fn greatest_prime_power(q: &Rational) -> Option<PrimePower> {
    let den = q.denom().magnitude();
    if den.is_one() {
        return None;
    }
    factorize(den)
        .into_iter()
        .map(|(p, e)| PrimePower::new_unchecked(p, e))
        .max_by(|a, b| a.value.cmp(&b.value))
}

const SIEVE_LIMIT: u32 = 1_000_000;

pub(crate) fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let n = SIEVE_LIMIT as usize;
        let mut composite = vec![false; n + 1];
        let mut primes = Vec::new();
        for i in 2..=n {
            if !composite[i] {
                primes.push(i as u32);
                let mut j = i * i;
                while j <= n {
                    composite[j] = true;
                    j += i;
                }
            }
        }
        primes
    })
}

/// `n mod m` for a word-sized modulus.
pub(crate) fn mod_small(n: &BigUint, m: u64) -> u64 {
    let m128 = m as u128;
    let mut rem: u128 = 0;
    for digit in n.iter_u64_digits().rev() {
        rem = ((rem << 64) | digit as u128) % m128;
    }
    rem as u64
}

/// Full factorization of `n` as ascending `(prime, exponent)` pairs.
///
/// Trial division by the primes below 10^6 handles everything the search
/// produces; larger cofactors go through Pollard's rho.
pub fn factorize(n: &BigUint) -> Vec<(BigUint, u32)> {
    let mut out = Vec::new();
    if n.is_zero() {
        return out;
    }
    let mut cof = n.clone();
    for (idx, &p) in small_primes().iter().enumerate() {
        if cof.is_one() {
            return out;
        }
        if let Some(c) = cof.to_u64() {
            for (q, e) in factorize_u64_from(c, idx) {
                out.push((BigUint::from(q), e));
            }
            return out;
        }
        let p = p as u64;
        if mod_small(&cof, p) == 0 {
            let mut e = 0;
            while mod_small(&cof, p) == 0 {
                cof /= p;
                e += 1;
            }
            out.push((BigUint::from(p), e));
        }
    }
    if !cof.is_one() {
        let mut large = Vec::new();
        split_large(cof, &mut large);
        large.sort();
        let mut i = 0;
        while i < large.len() {
            let mut j = i;
            while j < large.len() && large[j] == large[i] {
                j += 1;
            }
            out.push((large[i].clone(), (j - i) as u32));
            i = j;
        }
    }
    out
}

pub fn factorize_u64(n: u64) -> Vec<(u64, u32)> {
    if n <= 1 {
        return Vec::new();
    }
    factorize_u64_from(n, 0)
}

fn factorize_u64_from(mut n: u64, start: usize) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    for &p in &small_primes()[start..] {
        let p = p as u64;
        if p * p > n {
            break;
        }
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
    }
    if n > 1 {
        let limit = SIEVE_LIMIT as u64;
        if n < limit * limit || is_prime_u64(n) {
            out.push((n, 1));
        } else {
            let mut parts = Vec::new();
            split_large(BigUint::from(n), &mut parts);
            parts.sort();
            let mut i = 0;
            while i < parts.len() {
                let mut j = i;
                while j < parts.len() && parts[j] == parts[i] {
                    j += 1;
                }
                out.push((parts[i].to_u64().unwrap(), (j - i) as u32));
                i = j;
            }
        }
    }
    out
}

/// Largest prime-power factor of `n` (1 for `n = 1`).
pub fn largest_prime_power_u64(n: u64) -> u64 {
    factorize_u64(n)
        .into_iter()
        .map(|(p, e)| p.pow(e))
        .max()
        .unwrap_or(1)
}

fn split_large(n: BigUint, out: &mut Vec<BigUint>) {
    if n.is_one() {
        return;
    }
    if is_prime_big(&n) {
        out.push(n);
        return;
    }
    let d = pollard_rho(&n);
    let rest = &n / &d;
    split_large(d, out);
    split_large(rest, out);
}

fn pollard_rho(n: &BigUint) -> BigUint {
    let two = BigUint::from(2u32);
    if n.is_even() {
        return two;
    }
    let mut c = BigUint::one();
    loop {
        let f = |x: &BigUint| (x * x + &c) % n;
        let mut x = two.clone();
        let mut y = two.clone();
        let mut d = BigUint::one();
        while d.is_one() {
            x = f(&x);
            y = f(&f(&y));
            let diff = if x > y { &x - &y } else { &y - &x };
            d = diff.gcd(n);
        }
        if &d != n {
            return d;
        }
        c += 1u32;
    }
}

const MR_BASES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        b %= n;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        acc
    };
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &MR_BASES[..12] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Miller-Rabin with the first thirteen prime bases; deterministic below
/// 3.3 * 10^24.
pub fn is_prime_big(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    for &p in &MR_BASES {
        if mod_small(n, p) == 0 {
            return false;
        }
    }
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'witness: for &a in &MR_BASES {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// The inverse of `a` modulo the prime `p`, in `[1, p-1]`.
pub fn mod_inverse(a: impl Into<BigInt>, p: u64) -> Result<u64> {
    if p < 2 {
        return invalid(format!("modulus {p} is not prime"));
    }
    let a = a.into();
    let residue = mod_small(a.magnitude(), p);
    let residue = if a.sign() == Sign::Minus && residue != 0 {
        p - residue
    } else {
        residue
    };
    match inverse_u64(residue, p) {
        Some(x) => Ok(x),
        None => invalid(format!("{a} is not invertible modulo {p}")),
    }
}

pub(crate) fn inverse_u64(a: u64, p: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128 % p as i128, p as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(p as i128) as u64)
}

/// Exponent of the prime `p` in `n`.
pub(crate) fn valuation_u64(mut n: u64, p: u64) -> u32 {
    let mut e = 0;
    while n > 0 && n % p == 0 {
        n /= p;
        e += 1;
    }
    e
}
