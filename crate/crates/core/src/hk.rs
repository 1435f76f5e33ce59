//! Hilbert–Kunz sequences, the tail interval for `e_HK`, and numerical checks
//! of the uniform length bounds for Frobenius powers of ideals.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::One;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{adjacent_gap_constant, Exact};
use crate::field::frobenius_exponent;
use crate::ideal::{bracket_power, colon_element, groebner_default, ideals_equal, Budget, IdealBasis};
use crate::local::{lambda, FrobeniusSample, LocalRingPresentation};
use crate::poly::{PolyRing, Polynomial};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: Exact,
    pub upper: Exact,
}

impl Interval {
    pub fn contains(&self, v: &Exact) -> bool {
        self.lower <= *v && *v <= self.upper
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lower <= other.lower && other.upper <= self.upper
    }

    pub fn width(&self) -> Exact {
        Exact(&self.upper.0 - &self.lower.0)
    }
}

/// `λ_1, ..., λ_E` with the adjacent-gap constant and the tail interval.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HKReport {
    pub characteristic: u64,
    pub dimension: usize,
    pub samples: Vec<FrobeniusSample>,
    /// `max_e p^e |λ_e - λ_{e+1}|`; absent with a single sample.
    pub empirical_c: Option<Exact>,
    /// `λ_E ± C p^{-E} / (1 - 1/p)` at the largest computed `E`.
    pub ehk_interval: Option<Interval>,
    /// Smallest `e` from which every computed `λ_e` lies in the interval.
    pub stabilization_index: Option<u32>,
    pub truncated: bool,
    pub truncation_reason: Option<String>,
}

/// Tail bound `C p^{-E} / (1 - 1/p) = C p^{1-E} / (p - 1)`.
pub fn tail_width(p: u64, e: u32, c: &Exact) -> Exact {
    let pe = BigInt::from(p).pow(e);
    Exact(&c.0 * BigRational::new(BigInt::from(p), pe * BigInt::from(p - 1)))
}

/// Interval `center ± tail_width(p, e, c)`.
pub fn tail_interval(p: u64, e: u32, center: &Exact, c: &Exact) -> Interval {
    let w = tail_width(p, e, c);
    Interval { lower: Exact(&center.0 - &w.0), upper: Exact(&center.0 + &w.0) }
}

/// Assembles the report fields from values `(e, v_e)` in increasing `e`.
pub(crate) fn summarize(p: u64, values: &[(u32, Exact)]) -> (Option<Exact>, Option<Interval>, Option<u32>) {
    let c = adjacent_gap_constant(p, values);
    let interval = match (&c, values.last()) {
        (Some(c), Some((e, v))) => Some(tail_interval(p, *e, v, c)),
        _ => None,
    };
    let stab = interval.as_ref().map(|iv| {
        let mut idx = values.last().map(|(e, _)| *e).unwrap_or(0);
        for (e, v) in values.iter().rev() {
            if !iv.contains(v) {
                break;
            }
            idx = *e;
        }
        idx
    });
    (c, interval, stab)
}

/// Computes `λ_1..λ_{e_max}` concurrently. A budget failure at some `e`
/// truncates the report to the samples below it.
pub fn hk_sequence(pres: &LocalRingPresentation, e_max: u32, budget: &Budget) -> Result<HKReport> {
    if e_max == 0 {
        return Err(Error::Precondition("e_max must be at least 1".into()));
    }
    let pres = pres.translate_to_origin()?;
    let results: Vec<Result<FrobeniusSample>> = (1..=e_max).into_par_iter().map(|e| lambda(&pres, e, budget)).collect();
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
    let values: Vec<(u32, Exact)> = samples.iter().map(|s| (s.e, s.lambda.clone())).collect();
    let (empirical_c, ehk_interval, stabilization_index) = summarize(p, &values);
    Ok(HKReport {
        characteristic: p,
        dimension: pres.dimension(),
        samples,
        empirical_c,
        ehk_interval,
        stabilization_index,
        truncated: truncation_reason.is_some(),
        truncation_reason,
    })
}

/// Constants of the single-normalization bound: `m` module generators of the
/// normalization over the parameter ring, discriminant valuation `Δ`, and for
/// the module variant the nilpotency index `e0` and filtration length `b`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub m: u64,
    pub delta: u64,
    pub e0: u32,
    pub b: u64,
    /// True when the constants were supplied by hand rather than derived from
    /// a tame-curve presentation.
    pub conditional: bool,
}

impl BoundConstants {
    pub fn new(m: u64, delta: u64) -> Self {
        BoundConstants { m, delta, e0: 0, b: 1, conditional: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundVariant {
    /// `m Δ p^{-e} l(J/I)`.
    Single,
    /// `(1 + (1 + p^{e-e'}) p^{e0} b) b m Δ p^{-e} l(J/I)`.
    Module,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCheck {
    pub e: u32,
    pub e_prime: u32,
    pub lhs: Exact,
    pub rhs: Exact,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub constants: BoundConstants,
    pub variant: BoundVariant,
    pub pairs: Vec<PairCheck>,
}

impl BoundCheck {
    pub fn violations(&self) -> usize {
        self.pairs.iter().filter(|c| !c.pass).count()
    }
}

/// An ideal `I` and element `u` of `R` (given by representatives in `S`)
/// with `(I : u) = m` in `R`, checked on construction.
#[derive(Clone, Debug)]
pub struct SoclePair {
    pres: LocalRingPresentation,
    i: IdealBasis,
    u: Polynomial,
}

impl SoclePair {
    /// `I` and `u` are in the original coordinates of `pres`.
    pub fn new(pres: &LocalRingPresentation, i: &IdealBasis, u: &Polynomial, budget: &Budget) -> Result<Self> {
        let i = pres.translate_ideal(i)?;
        let u = pres.translate_polynomial(u)?;
        let pres = pres.translate_to_origin()?;
        let ring = pres.ring().clone();
        let full = pres.ideal().sum(&i)?;
        let colon = colon_element(&full, &u, budget)?;
        let target = pres.ideal().sum(&IdealBasis::maximal_at_origin(&ring))?;
        if !ideals_equal(&colon, &target, budget)? {
            return Err(Error::Domain("(I : u) is not the maximal ideal of the origin".into()));
        }
        Ok(SoclePair { pres, i, u })
    }

    /// The pair `(m, 1)`, for which `J = R` and the lengths are `l(R/m^[q])`.
    pub fn maximal(pres: &LocalRingPresentation) -> Result<Self> {
        let pres = pres.translate_to_origin()?;
        let ring = pres.ring().clone();
        Ok(SoclePair { i: IdealBasis::maximal_at_origin(&ring), u: ring.one(), pres })
    }

    pub fn ideal(&self) -> &IdealBasis {
        &self.i
    }

    pub fn element(&self) -> &Polynomial {
        &self.u
    }

    /// `l(J^[q] / I^[q])` with `J = I + (u)`, as `l(R/I^[q]) - l(R/J^[q])`.
    pub fn bracket_length(&self, q: u64, budget: &Budget) -> Result<BigUint> {
        let iq = self.pres.ideal().sum(&bracket_power(&self.i, q)?)?;
        let jq = iq.with_generator(self.u.frobenius_power(q)?)?;
        let a = groebner_default(&iq, budget)?.colength()?;
        let b = groebner_default(&jq, budget)?.colength()?;
        Ok(a - b)
    }

    /// `l(R / (I^[q] :_R u^q))`.
    pub fn colon_length(&self, q: u64, budget: &Budget) -> Result<BigUint> {
        let iq = self.pres.ideal().sum(&bracket_power(&self.i, q)?)?;
        let c = colon_element(&iq, &self.u.frobenius_power(q)?, budget)?;
        groebner_default(&self.pres.ideal().sum(&c)?, budget)?.colength()
    }
}

/// Both sides of `R/(I^[q] : u^q) ≅ J^[q]/I^[q]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasicLengthCheck {
    pub q: u64,
    #[serde(with = "crate::local::biguint_string")]
    pub colon_length: BigUint,
    #[serde(with = "crate::local::biguint_string")]
    pub bracket_length: BigUint,
    pub equal: bool,
}

pub fn basic_length_identity(pair: &SoclePair, q: u64, budget: &Budget) -> Result<BasicLengthCheck> {
    let colon_length = pair.colon_length(q, budget)?;
    let bracket_length = pair.bracket_length(q, budget)?;
    Ok(BasicLengthCheck { q, equal: colon_length == bracket_length, colon_length, bracket_length })
}

fn normalized(pair: &SoclePair, e: u32, budget: &Budget) -> Result<Exact> {
    let q = frobenius_exponent(pair.pres.characteristic(), e)?;
    Ok(Exact::normalized_length(&pair.bracket_length(q, budget)?, q, pair.pres.dimension()))
}

fn pair_rhs(p: u64, e: u32, e_prime: u32, constants: &BoundConstants, variant: BoundVariant) -> Exact {
    let base = BigRational::from_integer(BigInt::from(constants.m) * BigInt::from(constants.delta))
        * Exact::inverse_power(p, e).0;
    match variant {
        BoundVariant::Single => Exact(base),
        BoundVariant::Module => {
            let b = BigRational::from_integer(BigInt::from(constants.b));
            let ratio = Exact::inverse_power(p, e_prime - e).0;
            let pe0 = BigRational::from_integer(BigInt::from(p).pow(constants.e0));
            let factor = BigRational::one() + (BigRational::one() + ratio) * pe0 * &b;
            Exact(factor * b * base)
        }
    }
}

/// One `(e, e')` instance of the uniform bound; `l(J/I) = 1` by the socle condition.
pub fn verify_pair_bound(
    pair: &SoclePair,
    e: u32,
    e_prime: u32,
    constants: &BoundConstants,
    variant: BoundVariant,
    budget: &Budget,
) -> Result<PairCheck> {
    check_exponents(e, e_prime)?;
    let a = normalized(pair, e, budget)?;
    let b = normalized(pair, e_prime, budget)?;
    Ok(pair_check(pair.pres.characteristic(), e, e_prime, &a, &b, constants, variant))
}

/// Every pair `1 <= e <= e' <= e_max`, sharing the per-`e` lengths.
pub fn verify_all_pairs(
    pair: &SoclePair,
    e_max: u32,
    constants: &BoundConstants,
    variant: BoundVariant,
    budget: &Budget,
) -> Result<BoundCheck> {
    let values: Vec<Exact> =
        (1..=e_max).into_par_iter().map(|e| normalized(pair, e, budget)).collect::<Result<_>>()?;
    let p = pair.pres.characteristic();
    let mut pairs = Vec::new();
    for e in 1..=e_max {
        for e_prime in e..=e_max {
            let (a, b) = (&values[e as usize - 1], &values[e_prime as usize - 1]);
            pairs.push(pair_check(p, e, e_prime, a, b, constants, variant));
        }
    }
    Ok(BoundCheck { constants: constants.clone(), variant, pairs })
}

fn check_exponents(e: u32, e_prime: u32) -> Result<()> {
    if e == 0 || e > e_prime {
        return Err(Error::Precondition(format!("need 1 <= e <= e', got e = {e}, e' = {e_prime}")));
    }
    Ok(())
}

fn pair_check(
    p: u64,
    e: u32,
    e_prime: u32,
    a: &Exact,
    b: &Exact,
    constants: &BoundConstants,
    variant: BoundVariant,
) -> PairCheck {
    let lhs = a.abs_diff(b);
    let rhs = pair_rhs(p, e, e_prime, constants, variant);
    PairCheck { e, e_prime, pass: lhs <= rhs, lhs, rhs }
}

/// `colength((F) + m^[q]) <= n q^{d-1}` in the polynomial ring itself.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypersurfaceCheck {
    pub n: u64,
    pub q: u64,
    #[serde(with = "crate::local::biguint_string")]
    pub colength: BigUint,
    #[serde(with = "crate::local::biguint_string")]
    pub bound: BigUint,
    pub pass: bool,
}

/// Requires `F` not in `m^{n+1}`, i.e. some term of degree at most `n`.
pub fn hypersurface_bound(ring: &std::sync::Arc<PolyRing>, f: &Polynomial, n: u64, e: u32, budget: &Budget) -> Result<HypersurfaceCheck> {
    match f.order_at_origin() {
        Some(ord) if ord <= n => {}
        _ => return Err(Error::Precondition(format!("{f} lies in m^{}", n + 1))),
    }
    let q = frobenius_exponent(ring.characteristic() as u64, e)?;
    let ideal = IdealBasis::frobenius_maximal(ring, q).with_generator(f.clone())?;
    let colength = groebner_default(&ideal, budget)?.colength()?;
    let d = ring.nvars() as u32;
    let bound = BigUint::from(n) * BigUint::from(q).pow(d.saturating_sub(1));
    Ok(HypersurfaceCheck { n, q, pass: colength <= bound, colength, bound })
}

/// A random `m`-primary ideal `I` of the polynomial ring (at the origin)
/// together with `u` in the socle of `S/I`, so that `(I : u) = m`.
pub fn random_socle_pair<R: Rng>(ring: &std::sync::Arc<PolyRing>, rng: &mut R, budget: &Budget) -> Result<(IdealBasis, Polynomial)> {
    let n = ring.nvars();
    loop {
        let mut gens: Vec<Polynomial> = (0..n).map(|i| ring.var_power(i, rng.gen_range(1..=4))).collect();
        for _ in 0..rng.gen_range(0..=2) {
            gens.push(crate::testing::random_poly_in_max_ideal(ring, rng, 3, 4));
        }
        let i = IdealBasis::new(ring, gens)?;
        let gb = groebner_default(&i, budget)?;
        if gb.is_unit() {
            continue;
        }
        let socle = crate::ideal::colon(&gb.to_ideal(), &IdealBasis::maximal_at_origin(ring), budget)?;
        let mut candidates = Vec::new();
        for g in socle.generators() {
            let r = gb.normal_form(g)?;
            if !r.is_zero() {
                candidates.push(r);
            }
        }
        if candidates.is_empty() {
            continue;
        }
        let field = ring.field();
        let mut u = ring.zero();
        for c in &candidates {
            u = u.add(&c.scale(field.element(rng.gen_range(0..field.characteristic() as u64))))?;
        }
        let u = gb.normal_form(&u)?;
        if u.is_zero() {
            continue;
        }
        return Ok((i, u));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldConfig;
    use crate::poly::MonomialOrder;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ring(p: u64, vars: &[&str]) -> std::sync::Arc<PolyRing> {
        PolyRing::new(FieldConfig::new(p).unwrap(), vars, MonomialOrder::Grevlex).unwrap()
    }

    fn pres(p: u64, vars: &[&str], gens: &[&str]) -> LocalRingPresentation {
        let r = ring(p, vars);
        LocalRingPresentation::at_origin(IdealBasis::parse(&r, gens).unwrap(), &Budget::default()).unwrap()
    }

    #[test]
    fn regular_report_is_degenerate() {
        let r = hk_sequence(&pres(5, &["x", "y"], &[]), 2, &Budget::default()).unwrap();
        assert!(r.samples.iter().all(|s| s.lambda == Exact::one()));
        assert_eq!(r.empirical_c, Some(Exact::zero()));
        assert_eq!(r.ehk_interval, Some(Interval { lower: Exact::one(), upper: Exact::one() }));
    }

    #[test]
    fn node_report_matches_closed_form() {
        let r = hk_sequence(&pres(3, &["x", "y"], &["x*y"]), 3, &Budget::default()).unwrap();
        for s in &r.samples {
            let q = s.q as i64;
            assert_eq!(s.lambda, Exact::new(2 * q - 1, q));
        }
        assert_eq!(r.empirical_c, Some(Exact::new(2, 3)));
        let iv = r.ehk_interval.clone().unwrap();
        // width C p^{1-E}/(p-1) on each side = 1/27
        assert_eq!(iv, Interval { lower: Exact::new(52, 27), upper: Exact::integer(2) });
        let shorter = hk_sequence(&pres(3, &["x", "y"], &["x*y"]), 2, &Budget::default()).unwrap();
        assert!(shorter.ehk_interval.unwrap().contains_interval(&iv));
        assert_eq!(r.stabilization_index, Some(3));
    }

    #[test]
    fn single_sample_has_no_interval() {
        let r = hk_sequence(&pres(3, &["x", "y"], &["x*y"]), 1, &Budget::default()).unwrap();
        assert_eq!(r.empirical_c, None);
        assert_eq!(r.ehk_interval, None);
    }

    #[test]
    fn truncation_on_budget() {
        let b = Budget { max_pairs: 0, ..Budget::default() };
        let err = hk_sequence(&pres(3, &["x", "y"], &["x*y - x^3", "y^2 - x*y^2"]), 2, &b);
        assert!(matches!(err, Err(Error::Budget(_))));
    }

    #[test]
    fn hypersurface_bound_examples() {
        let r = ring(5, &["x", "y"]);
        let b = Budget::default();
        let c = hypersurface_bound(&r, &r.parse("x^2").unwrap(), 2, 1, &b).unwrap();
        assert_eq!((c.colength.clone(), c.bound.clone(), c.pass), (10u32.into(), 10u32.into(), true));
        let c = hypersurface_bound(&r, &r.parse("x").unwrap(), 1, 2, &b).unwrap();
        assert_eq!(c.colength, 25u32.into());
        assert_eq!(c.colength, c.bound);
        let c = hypersurface_bound(&r, &r.parse("1 + x").unwrap(), 0, 1, &b).unwrap();
        assert_eq!(c.colength, 0u32.into());
        assert!(c.pass);
        assert!(matches!(hypersurface_bound(&r, &r.parse("x^3").unwrap(), 2, 1, &b), Err(Error::Precondition(_))));
    }

    #[test]
    fn node_pairs_pass_with_tame_constants() {
        let b = Budget::default();
        let pair = SoclePair::maximal(&pres(5, &["x", "y"], &["x*y"])).unwrap();
        let check = verify_all_pairs(&pair, 3, &BoundConstants::new(2, 8), BoundVariant::Single, &b).unwrap();
        assert_eq!(check.pairs.len(), 6);
        assert_eq!(check.violations(), 0);
        let one = verify_pair_bound(&pair, 1, 2, &BoundConstants::new(2, 8), BoundVariant::Single, &b).unwrap();
        // |9/5 - 49/25| = 4/25 against 16/5
        assert_eq!(one.lhs, Exact::new(4, 25));
        assert_eq!(one.rhs, Exact::new(16, 5));
        assert!(verify_pair_bound(&pair, 2, 1, &BoundConstants::new(2, 8), BoundVariant::Single, &b).is_err());
    }

    #[test]
    fn module_variant_dominates_single() {
        let c = BoundConstants { m: 2, delta: 9, e0: 1, b: 2, conditional: true };
        let single = pair_rhs(5, 1, 2, &c, BoundVariant::Single);
        let module = pair_rhs(5, 1, 2, &c, BoundVariant::Module);
        // (1 + (1 + 1/5) * 5 * 2) * 2 = 26
        assert_eq!(module, Exact(single.0 * BigRational::from_integer(26.into())));
    }

    #[test]
    fn socle_pairs_satisfy_length_identity() {
        let r = ring(3, &["x", "y"]);
        let b = Budget::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let regular = LocalRingPresentation::at_origin(IdealBasis::zero(&r), &b).unwrap();
        for _ in 0..5 {
            let (i, u) = random_socle_pair(&r, &mut rng, &b).unwrap();
            let pair = SoclePair::new(&regular, &i, &u, &b).unwrap();
            for q in [3, 9] {
                let c = basic_length_identity(&pair, q, &b).unwrap();
                assert!(c.equal, "{i} {u} {c:?}");
                // regular: Frobenius is flat, both sides are l(S/m^[q])
                assert_eq!(c.colon_length, BigUint::from(q * q));
            }
        }
        let not_socle = SoclePair::new(&regular, &IdealBasis::parse(&r, &["x^2", "y^2"]).unwrap(), &r.parse("x").unwrap(), &b);
        assert!(matches!(not_socle, Err(Error::Domain(_))));
    }
}
