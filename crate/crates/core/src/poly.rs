//! Sparse multivariate polynomials over F_p.
//!
//! A [`Polynomial`] keeps its terms sorted in descending order for the
//! monomial order of its [`PolyRing`], so the leading term is always the
//! first entry. Coefficients are never zero; the zero polynomial has no terms.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::field::{FieldConfig, FieldElement};

/// Hard cap on a single exponent.
pub const MAX_EXPONENT: u64 = 1 << 40;

pub type Exponents = SmallVec<[u64; 4]>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(Exponents);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(SmallVec::from_elem(0, nvars))
    }

    pub fn from_exponents(exps: &[u64]) -> Result<Self> {
        if let Some(e) = exps.iter().find(|e| **e > MAX_EXPONENT) {
            return Err(Error::Capacity {
                what: format!("exponent {e}"),
                limit: format!("{MAX_EXPONENT}"),
            });
        }
        Ok(Monomial(SmallVec::from_slice(exps)))
    }

    /// The monomial `x_i^k` in `nvars` variables.
    pub fn var_power(nvars: usize, i: usize, k: u64) -> Self {
        let mut m = Self::one(nvars);
        m.0[i] = k;
        m
    }

    pub fn exponents(&self) -> &[u64] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn total_degree(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|e| *e == 0)
    }

    pub fn checked_mul(&self, other: &Monomial) -> Result<Monomial> {
        let mut out = self.0.clone();
        for (a, b) in out.iter_mut().zip(other.0.iter()) {
            let s = *a + *b;
            if s > MAX_EXPONENT {
                return Err(Error::Capacity {
                    what: format!("exponent {a} + {b}"),
                    limit: format!("{MAX_EXPONENT}"),
                });
            }
            *a = s;
        }
        Ok(Monomial(out))
    }

    pub fn checked_pow(&self, k: u64) -> Result<Monomial> {
        let mut out = self.0.clone();
        for a in out.iter_mut() {
            *a = a
                .checked_mul(k)
                .filter(|v| *v <= MAX_EXPONENT)
                .ok_or_else(|| Error::Capacity {
                    what: format!("exponent {a} * {k}"),
                    limit: format!("{MAX_EXPONENT}"),
                })?;
        }
        Ok(Monomial(out))
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    /// `other / self`, assuming `self` divides `other`.
    pub fn quotient_of(&self, other: &Monomial) -> Monomial {
        Monomial(other.0.iter().zip(self.0.iter()).map(|(b, a)| b - a).collect())
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(other.0.iter()).map(|(a, b)| *a.max(b)).collect())
    }

    pub fn gcd_is_one(&self, other: &Monomial) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| *a == 0 || *b == 0)
    }
}

/// Monomial orders; all are multiplicative well-orders.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum MonomialOrder {
    #[default]
    Grevlex,
    Lex,
    /// Grevlex on the first `k` variables, ties broken by grevlex on the rest.
    /// Any monomial involving the first block dominates every monomial free of it.
    Elimination(usize),
}

fn grevlex(a: &[u64], b: &[u64]) -> Ordering {
    let da: u64 = a.iter().sum();
    let db: u64 = b.iter().sum();
    match da.cmp(&db) {
        Ordering::Equal => {}
        o => return o,
    }
    for (x, y) in a.iter().zip(b.iter()).rev() {
        if x != y {
            // smaller exponent in the last differing variable wins
            return y.cmp(x);
        }
    }
    Ordering::Equal
}

impl MonomialOrder {
    /// Compares two monomials, checking that their variable counts agree.
    pub fn compare(&self, a: &Monomial, b: &Monomial) -> Result<Ordering> {
        if a.nvars() != b.nvars() {
            return Err(Error::Structural(format!(
                "monomials in {} and {} variables",
                a.nvars(),
                b.nvars()
            )));
        }
        Ok(self.cmp(a, b))
    }

    #[inline]
    pub fn cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        match *self {
            MonomialOrder::Grevlex => grevlex(&a.0, &b.0),
            MonomialOrder::Lex => a.0.cmp(&b.0),
            MonomialOrder::Elimination(k) => {
                let k = k.min(a.0.len());
                grevlex(&a.0[..k], &b.0[..k]).then_with(|| grevlex(&a.0[k..], &b.0[k..]))
            }
        }
    }
}

/// Ring context: variable names, coefficient field and the active order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyRing {
    vars: Vec<String>,
    field: FieldConfig,
    order: MonomialOrder,
}

impl PolyRing {
    pub fn new<S: AsRef<str>>(field: FieldConfig, vars: &[S], order: MonomialOrder) -> Result<Arc<Self>> {
        let vars: Vec<String> = vars.iter().map(|v| v.as_ref().trim().to_string()).collect();
        for (i, v) in vars.iter().enumerate() {
            let valid = v.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                && v.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !valid {
                return Err(Error::Domain(format!("invalid variable name {v:?}")));
            }
            if vars[..i].contains(v) {
                return Err(Error::Domain(format!("duplicate variable {v}")));
            }
        }
        Ok(Arc::new(PolyRing { vars, field, order }))
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn field(&self) -> FieldConfig {
        self.field
    }

    pub fn order(&self) -> MonomialOrder {
        self.order
    }

    pub fn characteristic(&self) -> u32 {
        self.field.characteristic()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    /// Same variables and field, different order.
    pub fn with_order(&self, order: MonomialOrder) -> Arc<Self> {
        Arc::new(PolyRing { order, ..self.clone() })
    }

    /// Prepends fresh variables (named from `names`), used for elimination.
    pub fn with_prefix_vars(&self, names: &[&str], order: MonomialOrder) -> Result<Arc<Self>> {
        let mut vars: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        vars.extend(self.vars.iter().cloned());
        PolyRing::new(self.field, &vars, order)
    }

    /// True when the two contexts describe the same polynomial ring (order may differ).
    pub fn same_ring(&self, other: &PolyRing) -> bool {
        self.vars == other.vars && self.field == other.field
    }

    pub fn zero(self: &Arc<Self>) -> Polynomial {
        Polynomial { ring: self.clone(), terms: Vec::new() }
    }

    pub fn one(self: &Arc<Self>) -> Polynomial {
        self.constant(self.field.one())
    }

    pub fn constant(self: &Arc<Self>, c: FieldElement) -> Polynomial {
        self.term(c, Monomial::one(self.nvars()))
    }

    pub fn term(self: &Arc<Self>, c: FieldElement, m: Monomial) -> Polynomial {
        debug_assert_eq!(m.nvars(), self.nvars());
        let terms = if c.is_zero() { Vec::new() } else { vec![(m, c)] };
        Polynomial { ring: self.clone(), terms }
    }

    pub fn monomial(self: &Arc<Self>, m: Monomial) -> Polynomial {
        self.term(self.field.one(), m)
    }

    pub fn var(self: &Arc<Self>, i: usize) -> Polynomial {
        self.monomial(Monomial::var_power(self.nvars(), i, 1))
    }

    pub fn var_power(self: &Arc<Self>, i: usize, k: u64) -> Polynomial {
        self.monomial(Monomial::var_power(self.nvars(), i, k))
    }

    /// Builds a polynomial from arbitrary (possibly repeated, zero) terms.
    pub fn from_terms(self: &Arc<Self>, terms: impl IntoIterator<Item = (Monomial, FieldElement)>) -> Polynomial {
        Polynomial::normalize(self.clone(), terms.into_iter().collect())
    }

    pub fn parse(self: &Arc<Self>, text: &str) -> Result<Polynomial> {
        crate::parse::parse_polynomial(text, self)
    }
}

#[derive(Clone, Debug)]
pub struct Polynomial {
    ring: Arc<PolyRing>,
    terms: Vec<(Monomial, FieldElement)>,
}

impl PartialEq for Polynomial {
    fn eq(&self, other: &Self) -> bool {
        self.ring.same_ring(&other.ring) && {
            if self.ring.order == other.ring.order {
                self.terms == other.terms
            } else {
                self.terms == other.with_ring(&self.ring).terms
            }
        }
    }
}

impl Eq for Polynomial {}

impl Polynomial {
    fn normalize(ring: Arc<PolyRing>, mut terms: Vec<(Monomial, FieldElement)>) -> Polynomial {
        let order = ring.order;
        let field = ring.field;
        terms.sort_by(|a, b| order.cmp(&b.0, &a.0));
        let mut out: Vec<(Monomial, FieldElement)> = Vec::with_capacity(terms.len());
        for (m, c) in terms {
            match out.last_mut() {
                Some((lm, lc)) if *lm == m => *lc = field.add(*lc, c),
                _ => {
                    if let Some((_, lc)) = out.last() {
                        if lc.is_zero() {
                            out.pop();
                        }
                    }
                    out.push((m, c));
                }
            }
        }
        if let Some((_, lc)) = out.last() {
            if lc.is_zero() {
                out.pop();
            }
        }
        Polynomial { ring, terms: out }
    }

    pub(crate) fn from_sorted_unchecked(ring: Arc<PolyRing>, terms: Vec<(Monomial, FieldElement)>) -> Polynomial {
        Polynomial { ring, terms }
    }

    pub fn ring(&self) -> &Arc<PolyRing> {
        &self.ring
    }

    pub fn field(&self) -> FieldConfig {
        self.ring.field
    }

    pub fn terms(&self) -> &[(Monomial, FieldElement)] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<(Monomial, FieldElement)> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn leading_term(&self) -> Option<(&Monomial, FieldElement)> {
        self.terms.first().map(|(m, c)| (m, *c))
    }

    pub fn leading_monomial(&self) -> Option<&Monomial> {
        self.terms.first().map(|(m, _)| m)
    }

    pub fn leading_coefficient(&self) -> Option<FieldElement> {
        self.terms.first().map(|(_, c)| *c)
    }

    /// Nonzero constant polynomial.
    pub fn is_unit(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_one()
    }

    pub fn constant_term(&self) -> FieldElement {
        match self.terms.last() {
            Some((m, c)) if m.is_one() => *c,
            _ => self.ring.field.zero(),
        }
    }

    /// Maximum total degree of a term; `None` for zero.
    pub fn total_degree(&self) -> Option<u64> {
        self.terms.iter().map(|(m, _)| m.total_degree()).max()
    }

    /// Minimum total degree of a term (the order of vanishing at the origin).
    pub fn order_at_origin(&self) -> Option<u64> {
        self.terms.iter().map(|(m, _)| m.total_degree()).min()
    }

    /// Re-expresses the polynomial in a ring with the same variables but another order.
    pub fn with_ring(&self, ring: &Arc<PolyRing>) -> Polynomial {
        debug_assert!(self.ring.same_ring(ring));
        if Arc::ptr_eq(&self.ring, ring) || self.ring.order == ring.order {
            return Polynomial { ring: ring.clone(), terms: self.terms.clone() };
        }
        let mut terms = self.terms.clone();
        let order = ring.order;
        terms.sort_by(|a, b| order.cmp(&b.0, &a.0));
        Polynomial { ring: ring.clone(), terms }
    }

    /// Embeds into a ring with `k` extra leading variables (see [`PolyRing::with_prefix_vars`]).
    pub fn lift_into_prefixed(&self, ring: &Arc<PolyRing>, k: usize) -> Polynomial {
        debug_assert_eq!(ring.nvars(), self.ring.nvars() + k);
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut e: Exponents = SmallVec::from_elem(0, k);
                e.extend_from_slice(m.exponents());
                (Monomial(e), *c)
            })
            .collect();
        Polynomial::normalize(ring.clone(), terms)
    }

    /// Drops the first `k` variables, which must not occur.
    pub fn project_from_prefixed(&self, ring: &Arc<PolyRing>, k: usize) -> Polynomial {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                debug_assert!(m.exponents()[..k].iter().all(|e| *e == 0));
                (Monomial(SmallVec::from_slice(&m.exponents()[k..])), *c)
            })
            .collect();
        Polynomial::normalize(ring.clone(), terms)
    }

    fn check_ring(&self, other: &Polynomial) -> Result<()> {
        if self.ring.same_ring(&other.ring) {
            Ok(())
        } else {
            Err(Error::RingMismatch(format!(
                "F_{}[{}] vs F_{}[{}]",
                self.ring.characteristic(),
                self.ring.vars.join(","),
                other.ring.characteristic(),
                other.ring.vars.join(",")
            )))
        }
    }

    fn aligned<'a>(&self, other: &'a Polynomial) -> std::borrow::Cow<'a, Polynomial> {
        if self.ring.order == other.ring.order {
            std::borrow::Cow::Borrowed(other)
        } else {
            std::borrow::Cow::Owned(other.with_ring(&self.ring))
        }
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_ring(other)?;
        Ok(self.add_scaled(&self.aligned(other), self.field().one()))
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_ring(other)?;
        Ok(self.add_scaled(&self.aligned(other), self.field().neg(self.field().one())))
    }

    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_ring(other)?;
        let other = self.aligned(other);
        let field = self.field();
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                terms.push((ma.checked_mul(mb)?, field.mul(*ca, *cb)));
            }
        }
        Ok(Polynomial::normalize(self.ring.clone(), terms))
    }

    pub fn neg(&self) -> Polynomial {
        let field = self.field();
        Polynomial {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), field.neg(*c))).collect(),
        }
    }

    pub fn scale(&self, c: FieldElement) -> Polynomial {
        if c.is_zero() {
            return self.ring.zero();
        }
        let field = self.field();
        Polynomial {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(m, a)| (m.clone(), field.mul(*a, c))).collect(),
        }
    }

    /// Scales so the leading coefficient is 1.
    pub fn monic(&self) -> Polynomial {
        match self.leading_coefficient() {
            None => self.clone(),
            Some(lc) => self.scale(self.field().inverse(lc).expect("nonzero leading coefficient")),
        }
    }

    /// `self * c * m`. Multiplying by a monomial preserves term order.
    pub fn mul_term(&self, c: FieldElement, m: &Monomial) -> Result<Polynomial> {
        if c.is_zero() {
            return Ok(self.ring.zero());
        }
        let field = self.field();
        let mut terms = Vec::with_capacity(self.terms.len());
        for (a, b) in &self.terms {
            terms.push((a.checked_mul(m)?, field.mul(*b, c)));
        }
        Ok(Polynomial { ring: self.ring.clone(), terms })
    }

    /// `self + c * other`, both already in the same order. Linear merge.
    pub(crate) fn add_scaled(&self, other: &Polynomial, c: FieldElement) -> Polynomial {
        let field = self.field();
        let order = self.ring.order;
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < other.terms.len() {
            let (ma, ca) = &self.terms[i];
            let (mb, cb) = &other.terms[j];
            match order.cmp(ma, mb) {
                Ordering::Greater => {
                    out.push((ma.clone(), *ca));
                    i += 1;
                }
                Ordering::Less => {
                    let v = field.mul(*cb, c);
                    if !v.is_zero() {
                        out.push((mb.clone(), v));
                    }
                    j += 1;
                }
                Ordering::Equal => {
                    let v = field.add(*ca, field.mul(*cb, c));
                    if !v.is_zero() {
                        out.push((ma.clone(), v));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(self.terms[i..].iter().cloned());
        for (mb, cb) in &other.terms[j..] {
            let v = field.mul(*cb, c);
            if !v.is_zero() {
                out.push((mb.clone(), v));
            }
        }
        Polynomial { ring: self.ring.clone(), terms: out }
    }

    /// `self - c * m * other`, fused for reduction loops.
    pub(crate) fn sub_term_mul(&self, c: FieldElement, m: &Monomial, other: &Polynomial) -> Result<Polynomial> {
        let shifted = other.mul_term(c, m)?;
        Ok(self.add_scaled(&shifted, self.field().neg(self.field().one())))
    }

    pub fn pow(&self, mut k: u64) -> Result<Polynomial> {
        let mut acc = self.ring.one();
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// `self^q` for `q` a power of the characteristic, via the Frobenius
    /// endomorphism: each monomial is raised to the `q` and coefficients are fixed.
    pub fn frobenius_power(&self, q: u64) -> Result<Polynomial> {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| Ok((m.checked_pow(q)?, *c)))
            .collect::<Result<Vec<_>>>()?;
        // raising to the q-th power is monotone for every order here
        Ok(Polynomial { ring: self.ring.clone(), terms })
    }

    pub fn evaluate(&self, point: &[FieldElement]) -> FieldElement {
        let field = self.field();
        let mut acc = field.zero();
        for (m, c) in &self.terms {
            let mut v = *c;
            for (x, e) in point.iter().zip(m.exponents()) {
                if *e > 0 {
                    v = field.mul(v, field.pow(*x, *e));
                }
            }
            acc = field.add(acc, v);
        }
        acc
    }

    pub fn derivative(&self, var: usize) -> Polynomial {
        let field = self.field();
        let terms = self
            .terms
            .iter()
            .filter_map(|(m, c)| {
                let e = m.exponents()[var];
                if e == 0 {
                    return None;
                }
                let coeff = field.mul(*c, field.element(e));
                if coeff.is_zero() {
                    return None;
                }
                let mut m = m.clone();
                m.0[var] -= 1;
                Some((m, coeff))
            })
            .collect();
        Polynomial::normalize(self.ring.clone(), terms)
    }

    /// Substitutes `x_i -> x_i + shift_i`.
    pub fn shift(&self, shift: &[FieldElement]) -> Result<Polynomial> {
        let ring = &self.ring;
        let binoms: Vec<Polynomial> = (0..ring.nvars())
            .map(|i| ring.var(i).add(&ring.constant(shift[i])))
            .collect::<Result<_>>()?;
        let mut acc = ring.zero();
        for (m, c) in &self.terms {
            let mut t = ring.constant(*c);
            for (i, e) in m.exponents().iter().enumerate() {
                if *e == 0 {
                    continue;
                }
                if shift[i].is_zero() {
                    t = t.mul_term(field_one(ring), &Monomial::var_power(ring.nvars(), i, *e))?;
                } else {
                    t = t.mul(&binoms[i].pow(*e)?)?;
                }
            }
            acc = acc.add(&t)?;
        }
        Ok(acc)
    }

    /// Exact division by `d`; `None` if `d` does not divide `self`.
    pub fn exact_div(&self, d: &Polynomial) -> Result<Option<Polynomial>> {
        self.check_ring(d)?;
        let d = self.aligned(d);
        let (lm, lc) = match d.leading_term() {
            None => return Err(Error::DivisionByZero),
            Some((m, c)) => (m.clone(), c),
        };
        let field = self.field();
        let inv = field.inverse(lc)?;
        let mut rem = self.clone();
        let mut quot = Vec::new();
        while let Some((m, c)) = rem.leading_term() {
            if !lm.divides(m) {
                return Ok(None);
            }
            let qm = lm.quotient_of(m);
            let qc = field.mul(c, inv);
            rem = rem.sub_term_mul(qc, &qm, &d)?;
            quot.push((qm, qc));
        }
        Ok(Some(Polynomial::normalize(self.ring.clone(), quot)))
    }
}

fn field_one(ring: &PolyRing) -> FieldElement {
    ring.field.one()
}

impl fmt::Display for Polynomial {
    /// Canonical form: descending terms, explicit `*` and `^`, coefficients in `[0, p)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            let mut factors = Vec::new();
            if c.value() != 1 || m.is_one() {
                factors.push(c.value().to_string());
            }
            for (i, e) in m.exponents().iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(self.ring.vars[i].clone()),
                    _ => factors.push(format!("{}^{}", self.ring.vars[i], e)),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ring(p: u64, vars: &[&str]) -> Arc<PolyRing> {
        PolyRing::new(FieldConfig::new(p).unwrap(), vars, MonomialOrder::Grevlex).unwrap()
    }

    fn mono(e: &[u64]) -> Monomial {
        Monomial::from_exponents(e).unwrap()
    }

    #[test]
    fn compare_examples() {
        let g = MonomialOrder::Grevlex;
        assert_eq!(g.compare(&mono(&[0, 2, 0]), &mono(&[1, 0, 1])).unwrap(), Ordering::Greater);
        let l = MonomialOrder::Lex;
        assert_eq!(l.compare(&mono(&[1, 0, 0]), &mono(&[0, 5, 0])).unwrap(), Ordering::Greater);
        for o in [g, l, MonomialOrder::Elimination(1)] {
            assert_eq!(o.compare(&mono(&[3, 1, 4]), &mono(&[3, 1, 4])).unwrap(), Ordering::Equal);
        }
        assert!(matches!(g.compare(&mono(&[1]), &mono(&[1, 0])), Err(Error::Structural(_))));
    }

    #[test]
    fn elimination_order_eliminates() {
        let o = MonomialOrder::Elimination(1);
        // t beats any power of the remaining variables
        assert_eq!(o.cmp(&mono(&[1, 0, 0]), &mono(&[0, 50, 50])), Ordering::Greater);
        assert_eq!(o.cmp(&mono(&[0, 2, 0]), &mono(&[0, 1, 1])), Ordering::Greater);
    }

    #[test]
    fn arithmetic_examples() {
        let r = ring(3, &["x", "y"]);
        let f = r.parse("x + y").unwrap();
        let g = r.parse("-x - y").unwrap();
        assert!(f.add(&g).unwrap().is_zero());

        let r = ring(5, &["x", "y"]);
        let prod = r.parse("(x+y)*(x-y)").unwrap();
        assert_eq!(prod, r.parse("x^2 - y^2").unwrap());

        let big = r.var_power(0, 1 << 40);
        assert!(matches!(big.mul(&big), Err(Error::Capacity { .. })));
    }

    #[test]
    fn ring_mismatch() {
        let a = ring(5, &["x", "y"]).var(0);
        let b = ring(7, &["x", "y"]).var(0);
        let c = ring(5, &["x", "z"]).var(0);
        assert!(matches!(a.add(&b), Err(Error::RingMismatch(_))));
        assert!(matches!(a.mul(&c), Err(Error::RingMismatch(_))));
    }

    #[test]
    fn exact_division() {
        let r = ring(5, &["x", "y"]);
        let f = r.parse("x^3*y - x*y^3").unwrap();
        let d = r.parse("x*y").unwrap();
        assert_eq!(f.exact_div(&d).unwrap().unwrap(), r.parse("x^2 - y^2").unwrap());
        assert!(r.parse("x + 1").unwrap().exact_div(&d).unwrap().is_none());
    }

    #[test]
    fn shift_and_derivative() {
        let r = ring(5, &["x", "y"]);
        let f = r.parse("y^2 - x^3").unwrap();
        let one = r.field().one();
        let g = f.shift(&[one, one]).unwrap();
        assert_eq!(g, r.parse("(y+1)^2 - (x+1)^3").unwrap());
        assert!(g.constant_term().is_zero());
        assert_eq!(f.derivative(0), r.parse("-3*x^2").unwrap());
        // d/dx x^5 = 5x^4 = 0 in characteristic 5
        assert!(r.parse("x^5").unwrap().derivative(0).is_zero());
    }

    fn small_poly(r: Arc<PolyRing>) -> impl Strategy<Value = Polynomial> {
        let n = r.nvars();
        prop::collection::vec((prop::collection::vec(0u64..4, n), 0u64..50), 0..6)
            .prop_map(move |ts| r.from_terms(ts.into_iter().map(|(e, c)| (mono(&e), r.field().element(c)))))
    }

    proptest! {
        #[test]
        fn ring_axioms(
            (f, g, h) in {
                let r = ring(7, &["x", "y", "z"]);
                (small_poly(r.clone()), small_poly(r.clone()), small_poly(r))
            }
        ) {
            prop_assert_eq!(f.mul(&g).unwrap(), g.mul(&f).unwrap());
            prop_assert_eq!(f.mul(&g).unwrap().mul(&h).unwrap(), f.mul(&g.mul(&h).unwrap()).unwrap());
            prop_assert_eq!(
                f.mul(&g.add(&h).unwrap()).unwrap(),
                f.mul(&g).unwrap().add(&f.mul(&h).unwrap()).unwrap()
            );
            prop_assert_eq!(f.add(&g).unwrap().sub(&g).unwrap(), f.clone());
        }

        #[test]
        fn frobenius_matches_power(pi in 0usize..3, seed in any::<u64>()) {
            let p = [2u64, 3, 5][pi];
            let r = ring(p, &["x", "y"]);
            let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
            let f = crate::testing::random_poly(&r, &mut rng, 4, 3);
            prop_assert_eq!(f.pow(p).unwrap(), f.frobenius_power(p).unwrap());
            prop_assert_eq!(f.pow(p * p).unwrap(), f.frobenius_power(p * p).unwrap());
        }

        #[test]
        fn orders_are_multiplicative(
            a in prop::collection::vec(0u64..6, 3),
            b in prop::collection::vec(0u64..6, 3),
            c in prop::collection::vec(0u64..6, 3),
        ) {
            let (a, b, c) = (mono(&a), mono(&b), mono(&c));
            for o in [MonomialOrder::Grevlex, MonomialOrder::Lex, MonomialOrder::Elimination(1), MonomialOrder::Elimination(2)] {
                let before = o.cmp(&a, &b);
                let after = o.cmp(&a.checked_mul(&c).unwrap(), &b.checked_mul(&c).unwrap());
                prop_assert_eq!(before, after);
                prop_assert_eq!(o.cmp(&a, &b), o.cmp(&b, &a).reverse());
            }
        }
    }
}
