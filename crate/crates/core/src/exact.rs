//! Exact rationals with a stable JSON encoding `{"num": "..", "den": ".."}`.

use std::fmt;
use std::ops::Deref;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Exact(pub BigRational);

impl Exact {
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Self {
        Exact(BigRational::new(num.into(), den.into()))
    }

    pub fn integer(v: impl Into<BigInt>) -> Self {
        Exact(BigRational::from_integer(v.into()))
    }

    pub fn zero() -> Self {
        Exact(BigRational::zero())
    }

    pub fn one() -> Self {
        Exact(BigRational::one())
    }

    /// `count / q^d`.
    pub fn normalized_length(count: &BigUint, q: u64, d: usize) -> Self {
        let den = BigInt::from(q).pow(d as u32);
        Exact(BigRational::new(BigInt::from(count.clone()), den))
    }

    /// `p^(-e)`.
    pub fn inverse_power(p: u64, e: u32) -> Self {
        Exact(BigRational::new(BigInt::one(), BigInt::from(p).pow(e)))
    }

    pub fn abs_diff(&self, other: &Exact) -> Exact {
        Exact((&self.0 - &other.0).abs())
    }

    pub fn into_inner(self) -> BigRational {
        self.0
    }
}

impl Deref for Exact {
    type Target = BigRational;
    fn deref(&self) -> &BigRational {
        &self.0
    }
}

impl From<BigRational> for Exact {
    fn from(v: BigRational) -> Self {
        Exact(v)
    }
}

impl From<u64> for Exact {
    fn from(v: u64) -> Self {
        Exact::integer(v)
    }
}

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Wire {
    num: String,
    den: String,
}

impl Serialize for Exact {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        Wire { num: self.0.numer().to_string(), den: self.0.denom().to_string() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Exact {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = Wire::deserialize(d)?;
        let num: BigInt = w.num.parse().map_err(D::Error::custom)?;
        let den: BigInt = w.den.parse().map_err(D::Error::custom)?;
        if den.is_zero() {
            return Err(D::Error::custom("zero denominator"));
        }
        Ok(Exact(BigRational::new(num, den)))
    }
}

/// Largest `p^e |v_e - v_{e+1}|` over consecutive entries of `(e, v_e)`;
/// `None` with fewer than two entries.
pub fn adjacent_gap_constant(p: u64, values: &[(u32, Exact)]) -> Option<Exact> {
    values
        .windows(2)
        .filter(|w| w[1].0 == w[0].0 + 1)
        .map(|w| {
            let scale = BigRational::from_integer(BigInt::from(p).pow(w[0].0));
            Exact(scale * (&w[0].1 .0 - &w[1].1 .0).abs())
        })
        .max()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wire_format() {
        let v = Exact::new(-10, 6);
        let json = serde_json::to_string(&v).unwrap();
        assert_eq!(json, r#"{"num":"-5","den":"3"}"#);
        assert_eq!(serde_json::from_str::<Exact>(&json).unwrap(), v);
        assert!(serde_json::from_str::<Exact>(r#"{"num":"1","den":"0"}"#).is_err());
        assert_eq!(v.to_string(), "-5/3");
        assert_eq!(Exact::integer(4).to_string(), "4");
    }

    #[test]
    fn gap_constant_for_node_sequence() {
        // (2q - 1)/q at p = 3
        let vals: Vec<(u32, Exact)> =
            (1..=3).map(|e| { let q = 3i64.pow(e); (e, Exact::new(2 * q - 1, q)) }).collect();
        assert_eq!(adjacent_gap_constant(3, &vals), Some(Exact::new(2, 3)));
        assert_eq!(adjacent_gap_constant(3, &vals[..1]), None);
    }
}
