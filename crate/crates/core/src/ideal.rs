//! Gröbner bases and the ideal calculus built on them.
//!
//! Buchberger's algorithm with the normal selection strategy and the
//! Gebauer–Möller installation of critical pairs. Every entry point takes a
//! [`Budget`]; running out of it is an [`Error::Budget`], never a hang.

use std::cmp::Ordering;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::field::frobenius_exponent;
use crate::poly::{Monomial, MonomialOrder, PolyRing, Polynomial};
use crate::staircase;

/// Resource limits for a single computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Critical pairs processed per Gröbner basis.
    pub max_pairs: u64,
    /// Largest total degree allowed for a basis element.
    pub max_degree: u64,
    pub deadline: Option<Instant>,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_pairs: 1_000_000, max_degree: 1_000_000, deadline: None }
    }
}

impl Budget {
    pub fn with_time_limit(mut self, limit: Duration) -> Self {
        self.deadline = Some(Instant::now() + limit);
        self
    }

    fn check_time(&self) -> Result<()> {
        match self.deadline {
            Some(d) if Instant::now() > d => Err(Error::Budget("deadline reached".into())),
            _ => Ok(()),
        }
    }
}

/// A list of generators; zero generators are dropped.
#[derive(Clone, Debug)]
pub struct IdealBasis {
    ring: Arc<PolyRing>,
    generators: Vec<Polynomial>,
}

impl IdealBasis {
    pub fn new(ring: &Arc<PolyRing>, generators: impl IntoIterator<Item = Polynomial>) -> Result<Self> {
        let mut gens = Vec::new();
        for g in generators {
            if !g.ring().same_ring(ring) {
                return Err(Error::RingMismatch(format!("generator {g} not in F_{}[{}]", ring.characteristic(), ring.vars().join(","))));
            }
            if !g.is_zero() {
                gens.push(g.with_ring(ring));
            }
        }
        Ok(IdealBasis { ring: ring.clone(), generators: gens })
    }

    pub fn zero(ring: &Arc<PolyRing>) -> Self {
        IdealBasis { ring: ring.clone(), generators: Vec::new() }
    }

    pub fn unit(ring: &Arc<PolyRing>) -> Self {
        IdealBasis { ring: ring.clone(), generators: vec![ring.one()] }
    }

    /// The maximal ideal of the origin, `(x_1, ..., x_n)`.
    pub fn maximal_at_origin(ring: &Arc<PolyRing>) -> Self {
        IdealBasis { ring: ring.clone(), generators: (0..ring.nvars()).map(|i| ring.var(i)).collect() }
    }

    /// `(x_1^q, ..., x_n^q)`.
    pub fn frobenius_maximal(ring: &Arc<PolyRing>, q: u64) -> Self {
        IdealBasis { ring: ring.clone(), generators: (0..ring.nvars()).map(|i| ring.var_power(i, q)).collect() }
    }

    pub fn parse<S: AsRef<str>>(ring: &Arc<PolyRing>, gens: &[S]) -> Result<Self> {
        let polys = gens.iter().map(|g| ring.parse(g.as_ref())).collect::<Result<Vec<_>>>()?;
        IdealBasis::new(ring, polys)
    }

    pub fn ring(&self) -> &Arc<PolyRing> {
        &self.ring
    }

    pub fn generators(&self) -> &[Polynomial] {
        &self.generators
    }

    pub fn is_zero(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn sum(&self, other: &IdealBasis) -> Result<IdealBasis> {
        IdealBasis::new(&self.ring, self.generators.iter().chain(&other.generators).cloned())
    }

    pub fn with_generator(&self, g: Polynomial) -> Result<IdealBasis> {
        IdealBasis::new(&self.ring, self.generators.iter().cloned().chain(std::iter::once(g)))
    }

    pub fn product(&self, other: &IdealBasis) -> Result<IdealBasis> {
        let mut gens = Vec::new();
        for f in &self.generators {
            for g in &other.generators {
                gens.push(f.mul(g)?);
            }
        }
        IdealBasis::new(&self.ring, gens)
    }

    /// Applies `f -> f(x + shift)` to every generator.
    pub fn shift(&self, shift: &[crate::field::FieldElement]) -> Result<IdealBasis> {
        let gens = self.generators.iter().map(|g| g.shift(shift)).collect::<Result<Vec<_>>>()?;
        IdealBasis::new(&self.ring, gens)
    }
}

impl std::fmt::Display for IdealBasis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let gens: Vec<String> = self.generators.iter().map(|g| g.to_string()).collect();
        write!(f, "({})", gens.join(", "))
    }
}

#[derive(Clone, Debug)]
pub struct GroebnerBasis {
    ring: Arc<PolyRing>,
    elements: Vec<Polynomial>,
    reduced: bool,
}

impl PartialEq for GroebnerBasis {
    fn eq(&self, other: &Self) -> bool {
        self.ring.same_ring(&other.ring) && self.ring.order() == other.ring.order() && self.elements == other.elements
    }
}

impl GroebnerBasis {
    pub fn ring(&self) -> &Arc<PolyRing> {
        &self.ring
    }

    pub fn order(&self) -> MonomialOrder {
        self.ring.order()
    }

    pub fn elements(&self) -> &[Polynomial] {
        &self.elements
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    pub fn is_unit(&self) -> bool {
        self.elements.iter().any(|g| g.is_unit())
    }

    pub fn is_zero_ideal(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn leading_exponents(&self) -> Vec<Vec<u64>> {
        self.elements.iter().map(|g| g.leading_monomial().expect("nonzero").exponents().to_vec()).collect()
    }

    pub fn normal_form(&self, f: &Polynomial) -> Result<Polynomial> {
        let refs: Vec<&Polynomial> = self.elements.iter().collect();
        normal_form(&f.with_ring(&self.ring), &refs)
    }

    pub fn contains(&self, f: &Polynomial) -> Result<bool> {
        Ok(self.normal_form(f)?.is_zero())
    }

    pub fn contains_ideal(&self, other: &IdealBasis) -> Result<bool> {
        for g in other.generators() {
            if !self.contains(g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn to_ideal(&self) -> IdealBasis {
        IdealBasis { ring: self.ring.clone(), generators: self.elements.clone() }
    }

    /// Krull dimension of `S / I`.
    pub fn dimension(&self) -> Result<usize> {
        if self.is_unit() {
            return Err(Error::Domain("dimension of the unit ideal is undefined".into()));
        }
        Ok(staircase::max_independent_set(&self.leading_exponents(), self.ring.nvars()).len())
    }

    /// Dimension of `S / I` over F_p, as a count of standard monomials.
    pub fn colength(&self) -> Result<BigUint> {
        let lead = self.leading_exponents();
        if let Some(v) = staircase::unbounded_variable(&lead, self.ring.nvars()) {
            return Err(Error::Domain(format!(
                "quotient has infinite length: {} is unbounded modulo the leading ideal",
                self.ring.vars()[v]
            )));
        }
        staircase::count_standard_monomials(&lead, self.ring.nvars())
    }

    /// Checks Buchberger's criterion directly: every S-polynomial reduces to zero.
    pub fn verify_s_pairs(&self) -> Result<bool> {
        let refs: Vec<&Polynomial> = self.elements.iter().collect();
        for i in 0..self.elements.len() {
            for j in i + 1..self.elements.len() {
                let s = s_polynomial(&self.elements[i], &self.elements[j])?;
                if !normal_form(&s, &refs)?.is_zero() {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

fn s_polynomial(f: &Polynomial, g: &Polynomial) -> Result<Polynomial> {
    let (mf, cf) = f.leading_term().expect("nonzero");
    let (mg, cg) = g.leading_term().expect("nonzero");
    let l = mf.lcm(mg);
    let field = f.field();
    let a = f.mul_term(field.inverse(cf)?, &mf.quotient_of(&l))?;
    let b = g.mul_term(field.inverse(cg)?, &mg.quotient_of(&l))?;
    Ok(a.add_scaled(&b, field.neg(field.one())))
}

/// Full reduction of `f` by `divisors` (all in the same ring and order).
pub(crate) fn normal_form(f: &Polynomial, divisors: &[&Polynomial]) -> Result<Polynomial> {
    let field = f.field();
    let mut rest = f.clone();
    let mut remainder: Vec<(Monomial, crate::field::FieldElement)> = Vec::new();
    let lead: Vec<(Monomial, crate::field::FieldElement)> = divisors
        .iter()
        .map(|g| {
            let (m, c) = g.leading_term().expect("nonzero divisor");
            (m.clone(), field.inverse(c).expect("nonzero"))
        })
        .collect();
    while let Some((m, c)) = rest.leading_term() {
        match lead.iter().position(|(lm, _)| lm.divides(m)) {
            Some(k) => {
                let factor = lead[k].0.quotient_of(m);
                let coeff = field.mul(c, lead[k].1);
                rest = rest.sub_term_mul(coeff, &factor, divisors[k])?;
            }
            None => {
                remainder.push((m.clone(), c));
                let mut terms = rest.into_terms();
                terms.remove(0);
                rest = f.ring().from_terms_sorted(terms);
            }
        }
    }
    Ok(f.ring().from_terms_sorted(remainder))
}

struct Pair {
    i: usize,
    j: usize,
    lcm: Monomial,
}

/// Reduced Gröbner basis of `ideal` under `order`.
pub fn groebner(ideal: &IdealBasis, order: MonomialOrder, budget: &Budget) -> Result<GroebnerBasis> {
    let ring = ideal.ring.with_order(order);
    let mut inputs: Vec<Polynomial> = ideal.generators.iter().map(|g| g.with_ring(&ring).monic()).collect();
    if let Some(u) = inputs.iter().find(|g| g.is_unit()) {
        return Ok(GroebnerBasis { ring: ring.clone(), elements: vec![u.clone()], reduced: true });
    }
    inputs.sort_by(|a, b| order.cmp(a.leading_monomial().unwrap(), b.leading_monomial().unwrap()));

    let mut polys: Vec<Polynomial> = Vec::new();
    let mut active: Vec<bool> = Vec::new();
    let mut pairs: Vec<Pair> = Vec::new();
    let mut processed: u64 = 0;

    for f in inputs {
        let divisors: Vec<&Polynomial> = polys.iter().zip(&active).filter(|(_, a)| **a).map(|(p, _)| p).collect();
        let h = normal_form(&f, &divisors)?;
        if h.is_zero() {
            continue;
        }
        if h.is_unit() {
            return Ok(GroebnerBasis { ring: ring.clone(), elements: vec![ring.one()], reduced: true });
        }
        install(h.monic(), &mut polys, &mut active, &mut pairs, budget)?;
    }

    while !pairs.is_empty() {
        budget.check_time()?;
        processed += 1;
        if processed > budget.max_pairs {
            return Err(Error::Budget(format!("more than {} critical pairs", budget.max_pairs)));
        }
        // normal strategy: smallest lcm first, ties by index
        let k = (0..pairs.len())
            .min_by(|&a, &b| {
                order
                    .cmp(&pairs[a].lcm, &pairs[b].lcm)
                    .then_with(|| (pairs[a].j, pairs[a].i).cmp(&(pairs[b].j, pairs[b].i)))
            })
            .unwrap();
        let pair = pairs.swap_remove(k);
        let s = s_polynomial(&polys[pair.i], &polys[pair.j])?;
        let divisors: Vec<&Polynomial> = polys.iter().zip(&active).filter(|(_, a)| **a).map(|(p, _)| p).collect();
        let h = normal_form(&s, &divisors)?;
        if h.is_zero() {
            continue;
        }
        if h.is_unit() {
            return Ok(GroebnerBasis { ring: ring.clone(), elements: vec![ring.one()], reduced: true });
        }
        install(h.monic(), &mut polys, &mut active, &mut pairs, budget)?;
    }

    let minimal: Vec<Polynomial> = polys.into_iter().zip(active).filter(|(_, a)| *a).map(|(p, _)| p).collect();
    Ok(GroebnerBasis { elements: interreduce(minimal)?, ring, reduced: true })
}

/// Gebauer–Möller update: adds `h` to the basis, pruning redundant pairs.
fn install(
    h: Polynomial,
    polys: &mut Vec<Polynomial>,
    active: &mut Vec<bool>,
    pairs: &mut Vec<Pair>,
    budget: &Budget,
) -> Result<()> {
    let deg = h.total_degree().unwrap_or(0);
    if deg > budget.max_degree {
        return Err(Error::Budget(format!("basis element of degree {deg} exceeds {}", budget.max_degree)));
    }
    let hn = polys.len();
    let lh = h.leading_monomial().unwrap().clone();

    // candidate pairs (g, h) for active g
    let cands: Vec<(usize, Monomial, bool)> = (0..hn)
        .filter(|&g| active[g])
        .map(|g| {
            let lg = polys[g].leading_monomial().unwrap();
            (g, lg.lcm(&lh), lg.gcd_is_one(&lh))
        })
        .collect();

    // chain criterion among the new pairs
    let mut kept: Vec<usize> = Vec::new();
    for (k, (_, l, coprime)) in cands.iter().enumerate() {
        let dominated = !coprime
            && (cands[k + 1..].iter().any(|(_, l2, _)| l2.divides(l))
                || kept.iter().any(|&k2| cands[k2].1.divides(l)));
        if !dominated {
            kept.push(k);
        }
    }
    // product criterion
    let new_pairs: Vec<Pair> = kept
        .into_iter()
        .filter(|&k| !cands[k].2)
        .map(|k| Pair { i: cands[k].0, j: hn, lcm: cands[k].1.clone() })
        .collect();

    // old pairs made redundant by h
    pairs.retain(|p| {
        if !lh.divides(&p.lcm) {
            return true;
        }
        let li = polys[p.i].leading_monomial().unwrap().lcm(&lh);
        let lj = polys[p.j].leading_monomial().unwrap().lcm(&lh);
        li == p.lcm || lj == p.lcm
    });
    pairs.extend(new_pairs);

    for g in 0..hn {
        if active[g] && lh.divides(polys[g].leading_monomial().unwrap()) {
            active[g] = false;
        }
    }
    polys.push(h);
    active.push(true);
    Ok(())
}

fn interreduce(mut basis: Vec<Polynomial>) -> Result<Vec<Polynomial>> {
    if basis.is_empty() {
        return Ok(basis);
    }
    let order = basis[0].ring().order();
    basis.sort_by(|a, b| order.cmp(a.leading_monomial().unwrap(), b.leading_monomial().unwrap()));
    let mut out = Vec::with_capacity(basis.len());
    for i in 0..basis.len() {
        let others: Vec<&Polynomial> = basis.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, g)| g).collect();
        let (lm, lc) = basis[i].leading_term().unwrap();
        let tail = basis[i].sub(&basis[i].ring().term(lc, lm.clone()))?;
        let tail = normal_form(&tail, &others)?;
        let g = tail.add(&basis[i].ring().term(lc, lm.clone()))?.monic();
        out.push(g);
    }
    Ok(out)
}

/// Reduced Gröbner basis in the default (grevlex) order.
pub fn groebner_default(ideal: &IdealBasis, budget: &Budget) -> Result<GroebnerBasis> {
    groebner(ideal, MonomialOrder::Grevlex, budget)
}

/// `I^[q]`: generated by the q-th powers of the generators.
pub fn bracket_power(ideal: &IdealBasis, q: u64) -> Result<IdealBasis> {
    let p = ideal.ring.characteristic() as u64;
    let mut power = 1u64;
    let mut e = 0;
    while power < q {
        e += 1;
        power = frobenius_exponent(p, e)?;
    }
    if power != q {
        return Err(Error::Domain(format!("{q} is not a power of the characteristic {p}")));
    }
    let gens = ideal.generators.iter().map(|g| g.frobenius_power(q)).collect::<Result<Vec<_>>>()?;
    IdealBasis::new(&ideal.ring, gens)
}

/// Eliminates the first `k` variables of `ideal.ring()`, returning an ideal
/// in `target` (the ring of the remaining variables).
pub fn eliminate_prefix(ideal: &IdealBasis, k: usize, target: &Arc<PolyRing>, budget: &Budget) -> Result<IdealBasis> {
    let gb = groebner(ideal, MonomialOrder::Elimination(k), budget)?;
    let kept = gb
        .elements()
        .iter()
        .filter(|g| g.terms().iter().all(|(m, _)| m.exponents()[..k].iter().all(|e| *e == 0)))
        .map(|g| g.project_from_prefixed(target, k))
        .collect::<Vec<_>>();
    IdealBasis::new(target, kept)
}

/// `I ∩ J` via `t·I + (1 - t)·J` and elimination of `t`.
pub fn intersection(a: &IdealBasis, b: &IdealBasis, budget: &Budget) -> Result<IdealBasis> {
    let ring = a.ring();
    if a.is_zero() || b.is_zero() {
        return Ok(IdealBasis::zero(ring));
    }
    let ext = ring.with_prefix_vars(&["__t"], MonomialOrder::Elimination(1))?;
    let t = ext.var(0);
    let one_minus_t = ext.one().sub(&t)?;
    let mut gens = Vec::new();
    for g in a.generators() {
        gens.push(t.mul(&g.lift_into_prefixed(&ext, 1))?);
    }
    for g in b.generators() {
        gens.push(one_minus_t.mul(&g.lift_into_prefixed(&ext, 1))?);
    }
    let target = ring.with_order(MonomialOrder::Grevlex);
    let out = eliminate_prefix(&IdealBasis::new(&ext, gens)?, 1, &target, budget)?;
    IdealBasis::new(ring, out.generators().iter().map(|g| g.with_ring(ring)))
}

/// `(J : k)` for a single polynomial `k`.
pub fn colon_element(j: &IdealBasis, k: &Polynomial, budget: &Budget) -> Result<IdealBasis> {
    let ring = j.ring();
    if k.is_zero() {
        return Ok(IdealBasis::unit(ring));
    }
    if k.is_unit() {
        return Ok(j.clone());
    }
    let gb = groebner_default(j, budget)?;
    if gb.contains(k)? {
        return Ok(IdealBasis::unit(ring));
    }
    let inter = intersection(&gb.to_ideal(), &IdealBasis::new(ring, [k.clone()])?, budget)?;
    let mut quotients = Vec::new();
    for g in inter.generators() {
        match g.exact_div(k)? {
            Some(q) => quotients.push(q),
            None => return Err(Error::Structural(format!("{k} does not divide intersection generator {g}"))),
        }
    }
    IdealBasis::new(ring, quotients)
}

/// `(J : K) = ∩_k (J : k)` over the generators of `K`.
pub fn colon(j: &IdealBasis, k: &IdealBasis, budget: &Budget) -> Result<IdealBasis> {
    let ring = j.ring();
    let mut acc: Option<IdealBasis> = None;
    for g in k.generators() {
        let c = colon_element(j, g, budget)?;
        acc = Some(match acc {
            None => c,
            Some(prev) => {
                let prev_gb = groebner_default(&prev, budget)?;
                let c_gb = groebner_default(&c, budget)?;
                if prev_gb.is_unit() {
                    c_gb.to_ideal()
                } else if c_gb.is_unit() {
                    prev_gb.to_ideal()
                } else {
                    intersection(&prev_gb.to_ideal(), &c_gb.to_ideal(), budget)?
                }
            }
        });
    }
    Ok(acc.unwrap_or_else(|| IdealBasis::unit(ring)))
}

pub fn dimension(ideal: &IdealBasis, budget: &Budget) -> Result<usize> {
    groebner_default(ideal, budget)?.dimension()
}

pub fn colength(ideal: &IdealBasis, budget: &Budget) -> Result<BigUint> {
    groebner_default(ideal, budget)?.colength()
}

/// Equality of ideals, via reduced Gröbner bases.
pub fn ideals_equal(a: &IdealBasis, b: &IdealBasis, budget: &Budget) -> Result<bool> {
    Ok(groebner_default(a, budget)? == groebner_default(b, budget)?)
}

impl PolyRing {
    pub(crate) fn from_terms_sorted(
        self: &Arc<Self>,
        terms: Vec<(Monomial, crate::field::FieldElement)>,
    ) -> Polynomial {
        debug_assert!(terms.windows(2).all(|w| self.order().cmp(&w[0].0, &w[1].0) == Ordering::Greater));
        Polynomial::from_sorted_unchecked(self.clone(), terms)
    }
}
