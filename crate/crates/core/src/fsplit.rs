//! F-splitting ideals and numbers via Fedder's criterion, F-purity verdicts
//! and F-purity exponents.

use num_bigint::BigUint;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::Exact;
use crate::field::frobenius_exponent;
use crate::hk::{summarize, Interval};
use crate::ideal::{bracket_power, colon, groebner_default, Budget, IdealBasis};
use crate::local::LocalRingPresentation;
use crate::poly::Polynomial;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SplittingSample {
    pub e: u32,
    pub q: u64,
    /// Generators of the preimage in `S` of `I_F^e(R)`, in translated coordinates.
    pub splitting_ideal: Vec<String>,
    #[serde(with = "crate::local::biguint_string")]
    pub colength: BigUint,
    pub s_e: Exact,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SplittingReport {
    pub characteristic: u64,
    pub dimension: usize,
    pub samples: Vec<SplittingSample>,
    pub empirical_c: Option<Exact>,
    pub interval: Option<Interval>,
    pub truncated: bool,
    pub truncation_reason: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PurityVerdict {
    #[serde(rename = "is_F_pure")]
    pub is_f_pure: bool,
    /// A generator of `(I^[p] : I)` outside `m^[p]`, when one exists.
    pub witness: Option<String>,
    /// How the verdict was reached.
    pub certificate: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PurityExponent {
    Exponent(u32),
    /// No splitting found for `e <= cap`; the true value may be larger or infinite.
    ExceedsCap(u32),
}

pub const DEFAULT_EXPONENT_CAP: u32 = 4;

/// Membership in `m^[q] = (x_1^q, ..., x_n^q)`: every term has some exponent `>= q`.
pub fn in_frobenius_maximal(f: &Polynomial, q: u64) -> bool {
    f.terms().iter().all(|(m, _)| m.exponents().iter().any(|e| *e >= q))
}

/// `J_e = (I^[q] : I)` in translated coordinates, with generators reduced
/// modulo `m^[q]` (terms with an exponent `>= q` dropped). For a principal
/// ideal `(f)` this is `(f^{q-1})`.
pub fn fedder_ideal(pres: &LocalRingPresentation, q: u64, budget: &Budget) -> Result<IdealBasis> {
    let pres = pres.translate_to_origin()?;
    let ring = pres.ring();
    let gb = groebner_default(pres.ideal(), budget)?;
    let gens = gb.elements();
    let j = match gens.len() {
        0 => return Ok(IdealBasis::unit(ring)),
        1 => vec![gens[0].pow(q - 1)?],
        _ => {
            let i = gb.to_ideal();
            colon(&bracket_power(&i, q)?, &i, budget)?.generators().to_vec()
        }
    };
    let reduced = j.iter().map(|g| truncate_below(g, q)).filter(|g| !g.is_zero());
    IdealBasis::new(ring, reduced)
}

/// Drops the terms of `f` lying in `m^[q]`.
pub fn truncate_below(f: &Polynomial, q: u64) -> Polynomial {
    f.ring().from_terms(f.terms().iter().filter(|(m, _)| m.exponents().iter().all(|e| *e < q)).cloned())
}

/// Preimage in `S` of `I_F^e(R)`: `c` with `c J_e ⊆ m^[q]`, i.e. `(m^[q] : J_e)`.
pub fn splitting_ideal(pres: &LocalRingPresentation, e: u32, budget: &Budget) -> Result<IdealBasis> {
    let q = frobenius_exponent(pres.characteristic(), e)?;
    let j = fedder_ideal(pres, q, budget)?;
    let ring = pres.ring();
    let mq = IdealBasis::frobenius_maximal(ring, q);
    let out = colon(&mq, &j, budget)?;
    Ok(groebner_default(&out, budget)?.to_ideal())
}

/// `s_e = l(R / I_F^e(R)) / q^d`.
pub fn splitting_number(pres: &LocalRingPresentation, e: u32, budget: &Budget) -> Result<SplittingSample> {
    let q = frobenius_exponent(pres.characteristic(), e)?;
    let split = splitting_ideal(pres, e, budget)?;
    let translated = pres.translate_to_origin()?;
    let colength = groebner_default(&split.sum(translated.ideal())?, budget)?.colength()?;
    Ok(SplittingSample {
        e,
        q,
        splitting_ideal: split.generators().iter().map(|g| g.to_string()).collect(),
        s_e: Exact::normalized_length(&colength, q, pres.dimension()),
        colength,
    })
}

/// `s_1, ..., s_{e_max}` with the same gap constant and tail interval as for `λ_e`.
pub fn splitting_sequence(pres: &LocalRingPresentation, e_max: u32, budget: &Budget) -> Result<SplittingReport> {
    if e_max == 0 {
        return Err(Error::Precondition("e_max must be at least 1".into()));
    }
    let results: Vec<Result<SplittingSample>> =
        (1..=e_max).into_par_iter().map(|e| splitting_number(pres, e, budget)).collect();
    let mut samples = Vec::new();
    let mut truncation_reason = None;
    for r in results {
        match r {
            Ok(s) => samples.push(s),
            Err(err @ (Error::Budget(_) | Error::Capacity { .. })) => {
                truncation_reason = Some(err.to_string());
                break;
            }
            Err(err) => return Err(err),
        }
    }
    if samples.is_empty() {
        return Err(Error::Budget(truncation_reason.unwrap_or_default()));
    }
    let p = pres.characteristic();
    let values: Vec<(u32, Exact)> = samples.iter().map(|s| (s.e, s.s_e.clone())).collect();
    let (empirical_c, interval, _) = summarize(p, &values);
    Ok(SplittingReport {
        characteristic: p,
        dimension: pres.dimension(),
        samples,
        empirical_c,
        interval,
        truncated: truncation_reason.is_some(),
        truncation_reason,
    })
}

/// Fedder: `R` is F-pure iff `(I^[p] : I) ⊄ m^[p]`.
pub fn fedder_test(pres: &LocalRingPresentation, budget: &Budget) -> Result<PurityVerdict> {
    let p = pres.characteristic();
    let j = fedder_ideal(pres, p, budget)?;
    let gb = groebner_default(&j, budget)?;
    let witness = gb.elements().iter().find(|g| !in_frobenius_maximal(g, p));
    Ok(match witness {
        Some(g) => PurityVerdict {
            is_f_pure: true,
            witness: Some(g.to_string()),
            certificate: format!("generator of (I^[{p}] : I) outside m^[{p}]"),
        },
        None => PurityVerdict {
            is_f_pure: false,
            witness: None,
            certificate: format!("all {} Groebner generators of (I^[{p}] : I) lie in m^[{p}]", gb.elements().len()),
        },
    })
}

/// Smallest `e <= cap` with `c J_e ⊄ m^[q]`; `c` is in the original coordinates.
pub fn fpurity_exponent(pres: &LocalRingPresentation, c: &Polynomial, cap: u32, budget: &Budget) -> Result<PurityExponent> {
    if cap == 0 {
        return Err(Error::Precondition("exponent cap must be at least 1".into()));
    }
    let c = pres.translate_polynomial(c)?;
    for e in 1..=cap {
        let q = frobenius_exponent(pres.characteristic(), e)?;
        let j = fedder_ideal(pres, q, budget)?;
        for g in j.generators() {
            if !in_frobenius_maximal(&c.mul(g)?, q) {
                return Ok(PurityExponent::Exponent(e));
            }
        }
    }
    Ok(PurityExponent::ExceedsCap(cap))
}

impl SplittingSample {
    pub fn is_positive(&self) -> bool {
        !self.colength.is_zero()
    }
}
