//! Power series over F_p truncated at an absolute precision.
//!
//! A series with precision `N` is known modulo `t^N`; results of arithmetic
//! carry the precision that is actually determined by the operands.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::{FieldConfig, FieldElement};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedSeries {
    field: FieldConfig,
    coeffs: Vec<FieldElement>,
}

impl TruncatedSeries {
    /// Series with the given leading coefficients, known modulo `t^prec`.
    pub fn new(field: FieldConfig, coeffs: &[FieldElement], prec: usize) -> Self {
        let mut c: Vec<FieldElement> = coeffs.iter().copied().take(prec).collect();
        c.resize(prec, field.zero());
        TruncatedSeries { field, coeffs: c }
    }

    pub fn zero(field: FieldConfig, prec: usize) -> Self {
        TruncatedSeries { field, coeffs: vec![field.zero(); prec] }
    }

    pub fn one(field: FieldConfig, prec: usize) -> Self {
        Self::monomial(field, 0, field.one(), prec)
    }

    /// `c t^k`.
    pub fn monomial(field: FieldConfig, k: usize, c: FieldElement, prec: usize) -> Self {
        let mut s = Self::zero(field, prec);
        if k < prec {
            s.coeffs[k] = c;
        }
        s
    }

    pub fn field(&self) -> FieldConfig {
        self.field
    }

    pub fn precision(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficient of `t^i`; `None` beyond the precision.
    pub fn coeff(&self, i: usize) -> Option<FieldElement> {
        self.coeffs.get(i).copied()
    }

    pub fn coefficients(&self) -> &[FieldElement] {
        &self.coeffs
    }

    /// Exact valuation, or `None` if the series vanishes to its precision.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    /// Lower bound on the valuation: exact when certified, the precision otherwise.
    pub fn valuation_bound(&self) -> usize {
        self.valuation().unwrap_or(self.precision())
    }

    pub fn with_precision(&self, prec: usize) -> Self {
        Self::new(self.field, &self.coeffs, prec.min(self.precision()))
    }

    pub fn add(&self, other: &Self) -> Self {
        let prec = self.precision().min(other.precision());
        let coeffs = (0..prec).map(|i| self.field.add(self.coeffs[i], other.coeffs[i])).collect();
        TruncatedSeries { field: self.field, coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        TruncatedSeries { field: self.field, coeffs: self.coeffs.iter().map(|c| self.field.neg(*c)).collect() }
    }

    pub fn scale(&self, c: FieldElement) -> Self {
        TruncatedSeries { field: self.field, coeffs: self.coeffs.iter().map(|a| self.field.mul(*a, c)).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let prec = (self.valuation_bound() + other.precision()).min(other.valuation_bound() + self.precision());
        let f = self.field;
        let mut out = vec![f.zero(); prec];
        for (i, a) in self.coeffs.iter().enumerate().take(prec) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(prec - i) {
                if !b.is_zero() {
                    out[i + j] = f.add(out[i + j], f.mul(*a, *b));
                }
            }
        }
        TruncatedSeries { field: f, coeffs: out }
    }

    /// Multiplication by `t^k`.
    pub fn shift_up(&self, k: usize) -> Self {
        let mut coeffs = vec![self.field.zero(); k];
        coeffs.extend_from_slice(&self.coeffs);
        TruncatedSeries { field: self.field, coeffs }
    }

    /// Division by `t^k`; the first `k` coefficients must be known zeros.
    pub fn shift_down(&self, k: usize) -> Result<Self> {
        if self.coeffs.iter().take(k).any(|c| !c.is_zero()) {
            return Err(Error::Domain(format!("series is not divisible by t^{k}")));
        }
        Ok(TruncatedSeries { field: self.field, coeffs: self.coeffs.iter().skip(k).copied().collect() })
    }

    pub fn pow(&self, k: u64) -> Self {
        let mut acc = Self::one(self.field, self.precision().max(1) + self.valuation_bound() * k as usize);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Inverse of a unit (nonzero constant term).
    pub fn inverse(&self) -> Result<Self> {
        let f = self.field;
        let prec = self.precision();
        let a0 = match self.coeff(0) {
            Some(c) if !c.is_zero() => c,
            _ => return Err(Error::DivisionByZero),
        };
        let inv0 = f.inverse(a0)?;
        let mut out = vec![f.zero(); prec];
        out[0] = inv0;
        for n in 1..prec {
            let mut s = f.zero();
            for k in 1..=n {
                s = f.add(s, f.mul(self.coeffs[k], out[n - k]));
            }
            out[n] = f.neg(f.mul(s, inv0));
        }
        Ok(TruncatedSeries { field: f, coeffs: out })
    }

    /// `self / other` where the result is a power series, i.e.
    /// `v(self) >= v(other)`; `other` needs a certified valuation.
    pub fn div(&self, other: &Self) -> Result<Self> {
        let v = other.valuation().ok_or(Error::Precision { have: other.precision(), required: other.precision() + 1 })?;
        if self.precision() <= v {
            return Ok(Self::zero(self.field, 0));
        }
        let num = self.shift_down(v)?;
        let den = other.shift_down(v)?.inverse()?;
        Ok(num.mul(&den))
    }

    /// `f(g)` for `g` without constant term; `self` is read up to its precision.
    pub fn compose(&self, g: &Self) -> Result<Self> {
        let vg = match g.coeff(0) {
            Some(c) if c.is_zero() => g.valuation_bound().max(1),
            _ => return Err(Error::Domain("inner series must have zero constant term".into())),
        };
        let cap = self.precision() * vg;
        let mut acc = Self::zero(self.field, cap.min(g.precision() + (self.precision().saturating_sub(1)) * vg));
        let mut power = Self::one(self.field, acc.precision());
        for c in &self.coeffs {
            if !c.is_zero() {
                acc = acc.add(&power.scale(*c));
            }
            power = power.mul(g);
            if power.valuation_bound() >= acc.precision() {
                break;
            }
        }
        Ok(acc.with_precision(cap))
    }

    /// The `n`-th root congruent to 1 of a series with constant term 1,
    /// by Newton iteration; requires `p ∤ n`.
    pub fn root_of_one_unit(&self, n: u64) -> Result<Self> {
        let f = self.field;
        if n == 0 || n.is_multiple_of(f.characteristic() as u64) {
            return Err(Error::Domain(format!("root of order {n} is not tame in characteristic {}", f.characteristic())));
        }
        if self.coeff(0) != Some(f.one()) {
            return Err(Error::Domain("series does not have constant term 1".into()));
        }
        let prec = self.precision();
        let n_inv = f.inverse(f.element(n))?;
        let mut w = Self::one(f, prec);
        let mut known = 1;
        while known < prec {
            known = (2 * known).min(prec);
            // w <- w - (w^n - a) / (n w^{n-1})
            let wn1 = w.pow(n - 1).with_precision(prec);
            let wn = wn1.mul(&w).with_precision(prec);
            let corr = wn.sub(self).mul(&wn1.inverse()?).scale(n_inv);
            w = w.sub(&corr).with_precision(prec);
        }
        debug_assert_eq!(w.pow(n).with_precision(prec), *self);
        Ok(w)
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*t")?,
                _ => write!(f, "{c}*t^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(t^{})", self.precision())
    }
}

/// Valuation of the determinant of a square matrix over `F_p[[T]]`, by
/// elimination with a pivot of least valuation. Errors if some pivot cannot
/// be certified at the available precision.
pub fn determinant_valuation(mut m: Vec<Vec<TruncatedSeries>>) -> Result<usize> {
    let n = m.len();
    let mut total = 0;
    for k in 0..n {
        let mut best: Option<(usize, usize, usize)> = None;
        for (i, row) in m.iter().enumerate().skip(k) {
            for (j, a) in row.iter().enumerate().skip(k) {
                if let Some(v) = a.valuation() {
                    if best.is_none_or(|b| v < b.0) {
                        best = Some((v, i, j));
                    }
                }
            }
        }
        let Some((v, pi, pj)) = best else {
            let have = m[k..].iter().flat_map(|r| r[k..].iter()).map(|a| a.precision()).min().unwrap_or(0);
            return Err(Error::Precision { have, required: 2 * have.max(1) });
        };
        // every uncertified entry must be known beyond the pivot valuation
        if m[k..].iter().flat_map(|r| r[k..].iter()).any(|a| a.valuation().is_none() && a.precision() <= v) {
            let have = m[k..].iter().flat_map(|r| r[k..].iter()).map(|a| a.precision()).min().unwrap_or(0);
            return Err(Error::Precision { have, required: 2 * have.max(1) });
        }
        m.swap(k, pi);
        for row in m.iter_mut() {
            row.swap(k, pj);
        }
        total += v;
        let pivot = m[k][k].clone();
        for i in k + 1..n {
            let factor = m[i][k].div(&pivot)?;
            for j in k..n {
                let sub = factor.mul(&m[k][j]);
                m[i][j] = m[i][j].sub(&sub);
            }
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(p: u64, c: &[u64], prec: usize) -> TruncatedSeries {
        let f = FieldConfig::new(p).unwrap();
        let coeffs: Vec<FieldElement> = c.iter().map(|v| f.element(*v)).collect();
        TruncatedSeries::new(f, &coeffs, prec)
    }

    #[test]
    fn precision_propagates() {
        let a = s(5, &[0, 0, 1], 10);
        let b = s(5, &[1, 1], 6);
        let c = a.mul(&b);
        assert_eq!(c.precision(), 8);
        assert_eq!(c.valuation(), Some(2));
        assert_eq!(a.add(&b).precision(), 6);
        assert_eq!(s(5, &[], 4).valuation(), None);
    }

    #[test]
    fn inverse_and_division() {
        let b = s(7, &[1, 3, 2], 12);
        let prod = b.mul(&b.inverse().unwrap());
        assert_eq!(prod, TruncatedSeries::one(b.field(), 12));
        let a = s(7, &[0, 0, 0, 5, 1], 12);
        let t2 = s(7, &[0, 0, 2], 12);
        let q = a.div(&t2).unwrap();
        assert_eq!(q.mul(&t2).with_precision(q.precision()), a.with_precision(q.precision()));
    }

    #[test]
    fn newton_roots() {
        for (p, n) in [(5u64, 2u64), (2, 3), (7, 3), (3, 5)] {
            let a = s(p, &[1, 1, 0, 2, 1], 20);
            let w = a.root_of_one_unit(n).unwrap();
            assert_eq!(w.pow(n).with_precision(20), a);
        }
        assert!(s(5, &[1, 1], 8).root_of_one_unit(5).is_err());
    }

    #[test]
    fn composition() {
        // (1 + T)∘(t^2) = 1 + t^2
        let f = s(3, &[1, 1], 5);
        let g = s(3, &[0, 0, 1], 30);
        let c = f.compose(&g).unwrap();
        assert_eq!(c.precision(), 10);
        assert_eq!(c, s(3, &[1, 0, 1], 10));
    }

    #[test]
    fn determinant_of_diagonal_and_triangular() {
        let f = FieldConfig::new(5).unwrap();
        let t = |k: usize| TruncatedSeries::monomial(f, k, f.one(), 30);
        let z = TruncatedSeries::zero(f, 30);
        let m = vec![vec![z.clone(), t(3)], vec![t(6), t(1)]];
        assert_eq!(determinant_valuation(m).unwrap(), 9);
        let short = vec![vec![TruncatedSeries::zero(f, 4)]];
        assert!(matches!(determinant_valuation(short), Err(Error::Precision { .. })));
    }
}
