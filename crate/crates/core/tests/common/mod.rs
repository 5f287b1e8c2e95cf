//! Randomized checks shared by the property tests and the acceptance run.
//! Each returns a short summary on success and the first counterexample on
//! failure.

#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ufrac::{
    brute_force_oracle, mod_inverse, reciprocal_sum, ufrac_early_stopping, ufrac_with,
    DenomMultiset, Rational, SearchOptions,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Values in 1..=30, at most 12 elements, each value at most 3 times.
pub fn random_multiset(rng: &mut impl Rng) -> DenomMultiset {
    let size = rng.gen_range(0..=12);
    let mut counts: BTreeMap<u64, u32> = BTreeMap::new();
    while counts.values().sum::<u32>() < size {
        let v = rng.gen_range(1..=30);
        let k = counts.entry(v).or_insert(0);
        if *k < 3 {
            *k += 1;
        }
    }
    DenomMultiset::from_elements(
        counts
            .into_iter()
            .flat_map(|(v, k)| std::iter::repeat_n(v, k as usize)),
    )
    .unwrap()
}

/// A target `a/b` with `b <= 60` and `0 <= a <= 4b`. Half of the time it is
/// taken from the reciprocal sum of a random submultiset when that sum fits
/// those bounds, so that instances with solutions are well represented.
pub fn random_target(rng: &mut impl Rng, d: &DenomMultiset) -> Rational {
    if rng.gen_bool(0.5) {
        let picked: Vec<u64> = d.iter().filter(|_| rng.gen_bool(0.5)).collect();
        let q = reciprocal_sum(&DenomMultiset::from_elements(picked).unwrap());
        if q.denom() <= &BigInt::from(60) && q.numer() <= &(q.denom() * 4) {
            return q;
        }
    }
    let b: i64 = rng.gen_range(1..=60);
    let a: i64 = rng.gen_range(0..=4 * b);
    Rational::new(a, b).unwrap()
}

fn render(reps: &[DenomMultiset]) -> String {
    reps.iter().map(|r| format!("{r}\n")).collect()
}

/// Search with invariant checking against the exhaustive enumerator, plus
/// soundness, strict canonical order, byte-identical reruns and
/// early-stopping consistency on every instance.
pub fn check_oracle_equivalence(instances: usize, seed: u64) -> Result<String, String> {
    let mut rng = rng(seed);
    let mut with_solutions = 0;
    let mut total_reps = 0;
    for i in 0..instances {
        let d = random_multiset(&mut rng);
        let r = random_target(&mut rng, &d);
        let ctx = || format!("instance {i}: D = {d:?}, r = {r}");

        let (got, _) = ufrac_with(&d, &r, &mut SearchOptions::checked())
            .map_err(|e| format!("{}: {e}", ctx()))?;
        let want = brute_force_oracle(&d, &r).map_err(|e| format!("{}: {e}", ctx()))?;
        if got != want {
            return Err(format!("{}: search {got:?} vs oracle {want:?}", ctx()));
        }
        if let Some(bad) = got
            .iter()
            .find(|w| reciprocal_sum(w) != r || !w.is_submultiset_of(&d))
        {
            return Err(format!("{}: unsound output {bad:?}", ctx()));
        }
        if got.windows(2).any(|w| w[0] >= w[1]) {
            return Err(format!("{}: output not strictly increasing", ctx()));
        }
        let (again, _) = ufrac_with(&d, &r, &mut SearchOptions::default()).unwrap();
        if render(&got) != render(&again) {
            return Err(format!("{}: rerun differs", ctx()));
        }
        match ufrac_early_stopping(&d, &r).unwrap() {
            Some(first) if !got.contains(&first) => {
                return Err(format!(
                    "{}: early stop returned {first:?}, not a member",
                    ctx()
                ))
            }
            None if !got.is_empty() => return Err(format!("{}: early stop found nothing", ctx())),
            Some(_) if got.is_empty() => unreachable!(),
            _ => {}
        }
        if !got.is_empty() {
            with_solutions += 1;
        }
        total_reps += got.len();
    }
    Ok(format!(
        "{instances} instances, {with_solutions} solvable, {total_reps} representations"
    ))
}

/// For `p^s` with `p <= 97`, `s <= 3`, `p` coprime to `n` and every `c_j`:
/// `p^s` divides the denominator of `m/(n p^s) - sum_{j in J} 1/(c_j p^s)`
/// exactly when `m n^{-1} != sum_{j in J} c_j^{-1} (mod p)`.
pub fn check_divisibility_congruence(instances: usize, seed: u64) -> Result<String, String> {
    const PRIMES: [u64; 25] = [
        2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
        97,
    ];
    let mut rng = rng(seed);
    let mut checked = 0u64;
    let mut divisible = 0u64;
    let coprime = |rng: &mut ChaCha8Rng, p: u64| loop {
        let x: u64 = rng.gen_range(1..=10_000);
        if x % p != 0 {
            return x;
        }
    };
    for _ in 0..instances {
        let p = *PRIMES.choose(&mut rng).unwrap();
        let s: u32 = rng.gen_range(1..=3);
        let ps = p.pow(s);
        let m: i64 = rng.gen_range(-10_000..=10_000);
        let n = coprime(&mut rng, p);
        let c: Vec<u64> = (0..6).map(|_| coprime(&mut rng, p)).collect();
        let base = Rational::new(m, BigInt::from(n) * BigInt::from(ps)).unwrap();
        let lhs_mod = (m.rem_euclid(p as i64) as u64 * mod_inverse(n, p).unwrap()) % p;
        for mask in 0u32..64 {
            let mut q = base.clone();
            let mut rhs_mod = 0;
            for (j, &cj) in c.iter().enumerate() {
                if mask & (1 << j) != 0 {
                    q = &q - &Rational::new(1, BigInt::from(cj) * BigInt::from(ps)).unwrap();
                    rhs_mod = (rhs_mod + mod_inverse(cj, p).unwrap()) % p;
                }
            }
            let divides = (q.denom() % BigInt::from(ps)).is_zero();
            if divides != (lhs_mod != rhs_mod) {
                return Err(format!(
                    "p = {p}, s = {s}, m = {m}, n = {n}, c = {c:?}, J = {mask:#b}: difference {q}"
                ));
            }
            checked += 1;
            divisible += divides as u64;
        }
    }
    Ok(format!(
        "{instances} instances, {checked} subsets, {divisible} with p^s in the denominator"
    ))
}

/// `a * a^{-1} = 1 (mod p)` for random primes below 10^6.
pub fn check_mod_inverse(instances: usize, seed: u64) -> Result<String, String> {
    let mut rng = rng(seed);
    for _ in 0..instances {
        let p = loop {
            let p: u64 = rng.gen_range(2..1_000_000);
            if ufrac::arith::is_prime_u64(p) {
                break p;
            }
        };
        let a: i64 = rng.gen_range(-1_000_000_000..=1_000_000_000);
        if a.rem_euclid(p as i64) == 0 {
            if mod_inverse(a, p).is_ok() {
                return Err(format!("inverse of {a} mod {p} should not exist"));
            }
            continue;
        }
        let x = mod_inverse(a, p).map_err(|e| e.to_string())?;
        if x == 0 || x >= p || (a.rem_euclid(p as i64) as u128 * x as u128) % p as u128 != 1 {
            return Err(format!("bad inverse {x} of {a} mod {p}"));
        }
    }
    Ok(format!("{instances} pairs"))
}
