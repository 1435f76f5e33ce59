//! Seeded random instance generators shared by the randomized checks.

use std::sync::Arc;

use rand::Rng;

use crate::poly::{Monomial, PolyRing, Polynomial};

/// A polynomial with up to `max_terms` terms of total degree at most `max_degree`.
pub fn random_poly<R: Rng>(ring: &Arc<PolyRing>, rng: &mut R, max_terms: usize, max_degree: u64) -> Polynomial {
    let n = ring.nvars();
    let p = ring.characteristic() as u64;
    let count = rng.gen_range(0..=max_terms);
    ring.from_terms((0..count).map(|_| {
        let mut budget = rng.gen_range(0..=max_degree);
        let mut exps = vec![0u64; n];
        for e in exps.iter_mut() {
            let take = rng.gen_range(0..=budget);
            *e = take;
            budget -= take;
        }
        // shuffle which variables receive the larger exponents
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            exps.swap(i, j);
        }
        (Monomial::from_exponents(&exps).unwrap(), ring.field().element(rng.gen_range(1..p.max(2))))
    }))
}

/// A random polynomial with no constant term.
pub fn random_poly_in_max_ideal<R: Rng>(
    ring: &Arc<PolyRing>,
    rng: &mut R,
    max_terms: usize,
    max_degree: u64,
) -> Polynomial {
    let f = random_poly(ring, rng, max_terms, max_degree);
    let c = f.constant_term();
    f.sub(&ring.constant(c)).expect("same ring")
}

/// Brute-force list of standard monomials of a monomial ideal, by scanning the
/// box bounded by the pure powers. Returns `None` if the box exceeds `limit`
/// cells or some variable is unbounded.
pub fn enumerate_standard_monomials(gens: &[Vec<u64>], nvars: usize, limit: u64) -> Option<Vec<Vec<u64>>> {
    let bounds: Vec<u64> = (0..nvars)
        .map(|v| {
            gens.iter()
                .filter(|g| g.iter().enumerate().all(|(i, e)| i == v || *e == 0))
                .map(|g| g[v])
                .min()
        })
        .collect::<Option<_>>()?;
    let cells = bounds.iter().try_fold(1u64, |acc, b| acc.checked_mul(*b))?;
    if cells > limit {
        return None;
    }
    let mut out = Vec::new();
    let mut cur = vec![0u64; nvars];
    'outer: loop {
        if !gens.iter().any(|g| g.iter().zip(&cur).all(|(a, b)| a <= b)) {
            out.push(cur.clone());
        }
        for i in 0..nvars {
            cur[i] += 1;
            if cur[i] < bounds[i] {
                continue 'outer;
            }
            cur[i] = 0;
        }
        break;
    }
    Some(out)
}

/// A homogeneous polynomial of the given degree with up to `max_terms` terms.
pub fn random_homogeneous<R: Rng>(ring: &Arc<PolyRing>, rng: &mut R, max_terms: usize, degree: u64) -> Polynomial {
    let n = ring.nvars();
    let p = ring.characteristic() as u64;
    let count = rng.gen_range(1..=max_terms.max(1));
    ring.from_terms((0..count).map(|_| {
        let mut exps = vec![0u64; n];
        for _ in 0..degree {
            exps[rng.gen_range(0..n)] += 1;
        }
        (Monomial::from_exponents(&exps).unwrap(), ring.field().element(rng.gen_range(1..p.max(2))))
    }))
}

fn monomials_of_degree(n: usize, d: u64) -> Vec<Vec<u64>> {
    if n == 0 {
        return if d == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in (0..=d).rev() {
        for mut rest in monomials_of_degree(n - 1, d - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Membership oracle for homogeneous ideals: `f` (homogeneous of degree `d`)
/// lies in `(gens)` iff it is in the span of `m * g` with `deg m + deg g = d`.
/// Decided by Gaussian elimination over F_p.
pub fn in_ideal_by_linear_algebra(f: &Polynomial, gens: &[Polynomial]) -> bool {
    let ring = f.ring();
    let field = ring.field();
    let Some(d) = f.total_degree() else { return true };
    let basis = monomials_of_degree(ring.nvars(), d);
    let index = |m: &Monomial| basis.iter().position(|b| b.as_slice() == m.exponents()).expect("homogeneous");
    let to_row = |p: &Polynomial| {
        let mut row = vec![field.zero(); basis.len()];
        for (m, c) in p.terms() {
            row[index(m)] = *c;
        }
        row
    };
    let mut rows = Vec::new();
    for g in gens {
        let Some(dg) = g.total_degree() else { continue };
        if dg > d {
            continue;
        }
        for m in monomials_of_degree(ring.nvars(), d - dg) {
            let m = Monomial::from_exponents(&m).unwrap();
            rows.push(to_row(&g.mul_term(field.one(), &m).unwrap()));
        }
    }
    let rank_without = crate::field::matrix_rank(&mut rows.clone(), field);
    rows.push(to_row(f));
    crate::field::matrix_rank(&mut rows, field) == rank_without
}
