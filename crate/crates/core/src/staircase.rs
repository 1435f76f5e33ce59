//! Combinatorics of monomial ideals: standard-monomial counts and
//! independent variable sets of a leading-term ideal.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Removes generators divisible by another generator; sorts for determinism.
pub fn minimalize(gens: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let mut sorted: Vec<Vec<u64>> = gens.to_vec();
    sorted.sort_by_key(|g| (g.iter().sum::<u64>(), g.clone()));
    sorted.dedup();
    let mut out: Vec<Vec<u64>> = Vec::new();
    for g in sorted {
        if !out.iter().any(|h| divides(h, &g)) {
            out.push(g);
        }
    }
    out
}

fn divides(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

/// Number of monomials outside the monomial ideal generated by `gens`
/// in `nvars` variables.
///
/// Works by slicing along the last variable: monomials with that exponent
/// equal to `k` are counted by the ideal `(I : x^k)` restricted to the other
/// variables, which only changes at exponents occurring in the generators.
/// Errors if some variable has no pure power in the ideal (infinite count).
pub fn count_standard_monomials(gens: &[Vec<u64>], nvars: usize) -> Result<BigUint> {
    if let Some(v) = unbounded_variable(gens, nvars) {
        return Err(Error::Domain(format!(
            "quotient has infinite length: variable {v} has no pure power in the leading ideal"
        )));
    }
    Ok(count_rec(&minimalize(gens), nvars))
}

/// First variable with no pure power among `gens`, unless the ideal is the unit ideal.
pub fn unbounded_variable(gens: &[Vec<u64>], nvars: usize) -> Option<usize> {
    if gens.iter().any(|g| g.iter().all(|e| *e == 0)) {
        return None;
    }
    (0..nvars).find(|&v| {
        !gens.iter().any(|g| g[v] > 0 && g.iter().enumerate().all(|(i, e)| i == v || *e == 0))
    })
}

fn count_rec(gens: &[Vec<u64>], nvars: usize) -> BigUint {
    if gens.iter().any(|g| g[..nvars].iter().all(|e| *e == 0)) {
        return BigUint::zero();
    }
    if nvars == 0 {
        return BigUint::one();
    }
    let v = nvars - 1;
    if nvars == 1 {
        let a = gens.iter().map(|g| g[0]).min().expect("bounded variable");
        return BigUint::from(a);
    }
    let pure = gens
        .iter()
        .filter(|g| g[..v].iter().all(|e| *e == 0))
        .map(|g| g[v])
        .min()
        .expect("bounded variable");
    let mut breaks: Vec<u64> = gens.iter().map(|g| g[v]).filter(|e| *e < pure).collect();
    breaks.push(0);
    breaks.push(pure);
    breaks.sort_unstable();
    breaks.dedup();
    let mut total = BigUint::zero();
    for w in breaks.windows(2) {
        let (k, next) = (w[0], w[1]);
        let slice: Vec<Vec<u64>> = gens.iter().filter(|g| g[v] <= k).map(|g| g[..v].to_vec()).collect();
        let slice = minimalize(&slice);
        let c = count_rec(&slice, v);
        total += c * BigUint::from(next - k);
    }
    total
}

/// Largest set of variables containing the support of no generator.
/// The size of such a set is the Krull dimension of `S / I`.
pub fn max_independent_set(gens: &[Vec<u64>], nvars: usize) -> Vec<usize> {
    let supports: Vec<u64> = minimalize(gens)
        .iter()
        .map(|g| g.iter().enumerate().filter(|(_, e)| **e > 0).fold(0u64, |acc, (i, _)| acc | (1 << i)))
        .collect();
    let mut best: Option<u64> = None;
    for mask in 0u64..(1u64 << nvars) {
        if supports.iter().any(|s| s & !mask == 0) {
            continue;
        }
        let better = match best {
            None => true,
            Some(b) => mask.count_ones() > b.count_ones(),
        };
        if better {
            best = Some(mask);
        }
    }
    match best {
        None => Vec::new(),
        Some(b) => (0..nvars).filter(|i| b & (1 << i) != 0).collect(),
    }
}
