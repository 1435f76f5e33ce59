//! Arithmetic in the prime field F_p for a prime chosen at runtime.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest prime characteristic accepted (exclusive).
pub const MAX_PRIME: u64 = 1 << 31;

/// A prime field F_p.
///
/// Elements are plain `u32` residues in `[0, p)`; the config performs the
/// arithmetic so polynomial code can keep coefficients unboxed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldConfig {
    p: u32,
}

/// An element of F_p, always fully reduced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FieldElement(u32);

impl FieldElement {
    pub fn value(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Deterministic Miller-Rabin, exact for all `n < 3.3 * 10^24` with these bases.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for small in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(small) {
            return n == small;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        b %= n;
        while e > 0 {
            if e & 1 == 1 {
                r = mulmod(r, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        r
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
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

/// Returns `q = p^e`, refusing anything that does not fit in 63 bits.
pub fn frobenius_exponent(p: u64, e: u32) -> Result<u64> {
    let mut q: u64 = 1;
    for _ in 0..e {
        q = q
            .checked_mul(p)
            .filter(|v| *v < (1u64 << 63))
            .ok_or(Error::Capacity {
                what: format!("{p}^{e}"),
                limit: "2^63".into(),
            })?;
    }
    Ok(q)
}

impl FieldConfig {
    pub fn new(p: u64) -> Result<Self> {
        if p >= MAX_PRIME || !is_prime(p) {
            return Err(Error::Domain(format!(
                "characteristic {p} is not a prime below 2^31"
            )));
        }
        Ok(FieldConfig { p: p as u32 })
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement(0)
    }

    pub fn one(&self) -> FieldElement {
        FieldElement(1)
    }

    pub fn element(&self, v: u64) -> FieldElement {
        FieldElement((v % self.p as u64) as u32)
    }

    /// Reduces a signed integer into `[0, p)`.
    pub fn from_i64(&self, v: i64) -> FieldElement {
        FieldElement(v.rem_euclid(self.p as i64) as u32)
    }

    /// Reduces a big integer literal into the field.
    pub fn from_bigint(&self, v: &num_bigint::BigInt) -> FieldElement {
        use num_traits::ToPrimitive;
        let p = num_bigint::BigInt::from(self.p);
        let r = ((v % &p) + &p) % &p;
        FieldElement(r.to_u32().expect("residue below p"))
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let s = a.0 as u64 + b.0 as u64;
        FieldElement((s % self.p as u64) as u32)
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let s = a.0 as u64 + self.p as u64 - b.0 as u64;
        FieldElement((s % self.p as u64) as u32)
    }

    pub fn neg(&self, a: FieldElement) -> FieldElement {
        if a.0 == 0 {
            a
        } else {
            FieldElement(self.p - a.0)
        }
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(((a.0 as u64 * b.0 as u64) % self.p as u64) as u32)
    }

    pub fn pow(&self, a: FieldElement, mut e: u64) -> FieldElement {
        let mut base = a;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via the extended Euclidean algorithm.
    pub fn inverse(&self, a: FieldElement) -> Result<FieldElement> {
        if a.0 == 0 {
            return Err(Error::DivisionByZero);
        }
        let (mut r0, mut r1) = (self.p as i64, a.0 as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(self.from_i64(t0))
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        Ok(self.mul(a, self.inverse(b)?))
    }

    /// Iterates over all field elements in increasing order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..self.p).map(FieldElement)
    }
}

/// Rank of a dense matrix over F_p (destroys the input).
pub fn matrix_rank(rows: &mut [Vec<FieldElement>], field: FieldConfig) -> usize {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..ncols {
        let Some(pivot) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, pivot);
        let inv = field.inverse(rows[r][c]).unwrap();
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let factor = field.mul(rows[i][c], inv);
                for k in c..ncols {
                    let sub = field.mul(factor, rows[r][k]);
                    rows[i][k] = field.sub(rows[i][k], sub);
                }
            }
        }
        r += 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(p: u64) -> FieldConfig {
        FieldConfig::new(p).unwrap()
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(f(5).inverse(FieldElement(2)).unwrap(), FieldElement(3));
        assert_eq!(f(7).inverse(FieldElement(1)).unwrap(), FieldElement(1));
        assert_eq!(f(3).inverse(FieldElement(2)).unwrap(), FieldElement(2));
        assert!(matches!(
            f(3).inverse(FieldElement(0)),
            Err(Error::DivisionByZero)
        ));
    }

    #[test]
    fn frobenius_exponent_examples() {
        assert_eq!(frobenius_exponent(5, 0).unwrap(), 1);
        assert_eq!(frobenius_exponent(3, 4).unwrap(), 81);
        assert_eq!(frobenius_exponent(2, 62).unwrap(), 1 << 62);
        match frobenius_exponent(2, 63) {
            Err(Error::Capacity { limit, .. }) => assert_eq!(limit, "2^63"),
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_composites() {
        assert!(FieldConfig::new(1).is_err());
        assert!(FieldConfig::new(9).is_err());
        assert!(FieldConfig::new(1 << 31).is_err());
        assert!(FieldConfig::new(2_147_483_647).is_ok());
    }

    #[test]
    fn primality_matches_trial_division() {
        let trial = |n: u64| n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d));
        for n in 0..5000 {
            assert_eq!(is_prime(n), trial(n), "n = {n}");
        }
    }

    proptest! {
        #[test]
        fn inverse_is_involution(pi in 0usize..6, a in 1u64..1_000_000) {
            let p = [2u64, 3, 5, 7, 101, 2_147_483_647][pi];
            let k = f(p);
            let a = k.element(a);
            prop_assume!(!a.is_zero());
            let inv = k.inverse(a).unwrap();
            prop_assert_eq!(k.mul(a, inv), k.one());
            prop_assert_eq!(k.inverse(inv).unwrap(), a);
        }

        #[test]
        fn field_axioms(pi in 0usize..5, a in any::<u32>(), b in any::<u32>(), c in any::<u32>()) {
            let k = f([2u64, 3, 5, 13, 65_521][pi]);
            let (a, b, c) = (k.element(a as u64), k.element(b as u64), k.element(c as u64));
            prop_assert_eq!(k.mul(k.mul(a, b), c), k.mul(a, k.mul(b, c)));
            prop_assert_eq!(k.add(k.add(a, b), c), k.add(a, k.add(b, c)));
            prop_assert_eq!(k.mul(a, k.add(b, c)), k.add(k.mul(a, b), k.mul(a, c)));
            prop_assert_eq!(k.sub(k.add(a, b), b), a);
            prop_assert_eq!(k.add(a, k.neg(a)), k.zero());
        }
    }
}
