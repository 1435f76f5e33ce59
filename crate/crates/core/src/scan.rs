//! Scans of closed points of `Spec S/I`: `λ_e` and `s_e` at each point, generic
//! values along subvarieties through witness points, and exact
//! semicontinuity verdicts.

use std::sync::Arc;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::Exact;
use crate::field::{frobenius_exponent, matrix_rank, FieldElement};
use crate::fsplit::splitting_number;
use crate::ideal::{bracket_power, groebner_default, Budget, IdealBasis};
use crate::local::{lambda, LocalRingPresentation};
use crate::poly::{Monomial, PolyRing, Polynomial};

/// Largest `p^n` for brute-force point enumeration.
pub const MAX_ENUMERATION: u64 = 1 << 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointRecord {
    pub point: Vec<u32>,
    pub dimension: usize,
    pub smooth: bool,
    pub lambda: Vec<Exact>,
    pub splitting: Vec<Exact>,
}

/// `special` is a specialization of `generic` (indices into the point list).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecializationPair {
    pub special: usize,
    pub generic: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenericValue {
    pub prime: Vec<String>,
    pub witness: Vec<u32>,
    pub lifts: Vec<String>,
    pub e: u32,
    #[serde(with = "crate::local::biguint_string")]
    pub colength: BigUint,
    pub value: Exact,
}

/// A declared subvariety with its generic values at several witnesses.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubvarietyRecord {
    pub prime: Vec<String>,
    pub values: Vec<GenericValue>,
    /// Indices of scanned points lying on the subvariety.
    pub points_on: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub invariant: String,
    pub e: u32,
    pub special: String,
    pub generic: String,
    pub special_value: Exact,
    pub generic_value: Exact,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdicts {
    pub upper_semicontinuous_lambda: bool,
    pub lower_semicontinuous_s: bool,
    pub generic_constancy: bool,
    pub violations: Vec<Violation>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanReport {
    pub characteristic: u64,
    pub variables: Vec<String>,
    pub generators: Vec<String>,
    pub e_values: Vec<u32>,
    pub points: Vec<PointRecord>,
    pub pairs: Vec<SpecializationPair>,
    pub subvarieties: Vec<SubvarietyRecord>,
    pub verdicts: Verdicts,
}

/// All `F_p`-rational points of `V(I)` for `n <= 4`.
pub fn rational_points(ideal: &IdealBasis) -> Result<Vec<Vec<FieldElement>>> {
    let ring = ideal.ring();
    let n = ring.nvars();
    let p = ring.characteristic() as u64;
    let total = (p as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if n > 4 || total > MAX_ENUMERATION as u128 {
        return Err(Error::Capacity { what: format!("enumeration of F_{p}^{n}"), limit: format!("n <= 4 and p^n <= {MAX_ENUMERATION}") });
    }
    let field = ring.field();
    let mut out = Vec::new();
    for idx in 0..total as u64 {
        let mut rest = idx;
        let pt: Vec<FieldElement> = (0..n)
            .map(|_| {
                let c = field.element(rest % p);
                rest /= p;
                c
            })
            .collect();
        if ideal.generators().iter().all(|g| g.evaluate(&pt).is_zero()) {
            out.push(pt);
        }
    }
    Ok(out)
}

fn point_values(pt: &[FieldElement]) -> Vec<u32> {
    pt.iter().map(|c| c.value()).collect()
}

fn point_label(pt: &[u32]) -> String {
    let parts: Vec<String> = pt.iter().map(|c| c.to_string()).collect();
    format!("({})", parts.join(", "))
}

/// `λ_e` and `s_e`, `1 <= e <= e_max`, at each point.
pub fn scan_points(ideal: &IdealBasis, points: &[Vec<FieldElement>], e_max: u32, budget: &Budget) -> Result<ScanReport> {
    if e_max == 0 {
        return Err(Error::Precondition("e_max must be at least 1".into()));
    }
    let records: Vec<Result<PointRecord>> = points
        .par_iter()
        .map(|pt| {
            let pres = LocalRingPresentation::new(ideal.clone(), pt.clone(), budget)?;
            let mut lam = Vec::new();
            let mut split = Vec::new();
            for e in 1..=e_max {
                lam.push(lambda(&pres, e, budget)?.lambda);
                split.push(splitting_number(&pres, e, budget)?.s_e);
            }
            Ok(PointRecord {
                point: point_values(pt),
                dimension: pres.dimension(),
                smooth: pres.jacobian_report().smooth,
                lambda: lam,
                splitting: split,
            })
        })
        .collect();
    let points: Vec<PointRecord> = records.into_iter().collect::<Result<_>>()?;
    let ring = ideal.ring();
    let mut report = ScanReport {
        characteristic: ring.characteristic() as u64,
        variables: ring.vars().to_vec(),
        generators: ideal.generators().iter().map(|g| g.to_string()).collect(),
        e_values: (1..=e_max).collect(),
        pairs: default_pairs(&points),
        points,
        subvarieties: Vec::new(),
        verdicts: Verdicts::default(),
    };
    report.verdicts = semicontinuity_verdict(&report);
    Ok(report)
}

/// Every singular point against every smooth reference point of the same dimension.
fn default_pairs(points: &[PointRecord]) -> Vec<SpecializationPair> {
    let mut out = Vec::new();
    for (i, a) in points.iter().enumerate() {
        for (j, b) in points.iter().enumerate() {
            if !a.smooth && b.smooth && a.dimension == b.dimension {
                out.push(SpecializationPair { special: i, generic: j });
            }
        }
    }
    out
}

impl ScanReport {
    /// Replaces the specialization pairs and recomputes the verdicts.
    pub fn with_pairs(mut self, pairs: Vec<SpecializationPair>) -> Result<Self> {
        if let Some(bad) = pairs.iter().find(|p| p.special >= self.points.len() || p.generic >= self.points.len()) {
            return Err(Error::Structural(format!("pair {bad:?} refers to a point outside the scan")));
        }
        self.pairs = pairs;
        self.verdicts = semicontinuity_verdict(&self);
        Ok(self)
    }

    /// Adds a subvariety with its generic values and recomputes the verdicts.
    pub fn with_subvariety(mut self, record: SubvarietyRecord) -> Self {
        self.subvarieties.push(record);
        self.verdicts = semicontinuity_verdict(&self);
        self
    }
}

fn monomials_of_degree(nvars: usize, d: u64) -> Vec<Vec<u64>> {
    if nvars == 0 {
        return if d == 0 { vec![vec![]] } else { vec![] };
    }
    if nvars == 1 {
        return vec![vec![d]];
    }
    let mut out = Vec::new();
    for a in (0..=d).rev() {
        for mut rest in monomials_of_degree(nvars - 1, d - a) {
            rest.insert(0, a);
            out.push(rest);
        }
    }
    out
}

/// `m^N` for the maximal ideal at the origin.
pub fn maximal_power(ring: &Arc<PolyRing>, n: u64) -> Result<IdealBasis> {
    let gens = monomials_of_degree(ring.nvars(), n)
        .into_iter()
        .map(|e| Monomial::from_exponents(&e).map(|m| ring.monomial(m)))
        .collect::<Result<Vec<Polynomial>>>()?;
    IdealBasis::new(ring, gens)
}

/// Length of `(S/J)` localized at the origin, where the origin is an
/// isolated point of `V(J)`: `l(S/(J + m^N))` once it agrees for `N`, `N + 1`.
pub fn local_colength(j: &IdealBasis, budget: &Budget) -> Result<BigUint> {
    let ring = j.ring();
    if j.generators().iter().any(|g| !g.constant_term().is_zero()) {
        return Ok(BigUint::from(0u32));
    }
    let gb = groebner_default(j, budget)?;
    let mut n = gb.elements().iter().filter_map(|g| g.total_degree()).max().unwrap_or(1).max(1);
    loop {
        if n > budget.max_degree {
            return Err(Error::Budget(format!("local length did not stabilize below degree {}", budget.max_degree)));
        }
        let a = groebner_default(&gb.to_ideal().sum(&maximal_power(ring, n)?)?, budget)?.colength()?;
        let b = groebner_default(&gb.to_ideal().sum(&maximal_power(ring, n + 1)?)?, budget)?.colength()?;
        if a == b {
            return Ok(a);
        }
        n *= 2;
    }
}

fn jacobian_rank(gens: &[Polynomial], point: &[FieldElement], ring: &Arc<PolyRing>) -> usize {
    let n = ring.nvars();
    let mut rows: Vec<Vec<FieldElement>> =
        gens.iter().map(|g| (0..n).map(|i| g.derivative(i).evaluate(point)).collect()).collect();
    matrix_rank(&mut rows, ring.field())
}

/// `λ_e(R_p)` through a witness point `Q` of `V(p)`: with `h = |t|`,
/// `l(R_Q/(p^[q] + (t - t(Q))^q)) / q^{ht p + h}`.
pub fn generic_value(
    ideal: &IdealBasis,
    prime: &IdealBasis,
    witness: &[FieldElement],
    lifts: &[Polynomial],
    e: u32,
    budget: &Budget,
) -> Result<GenericValue> {
    let ring = ideal.ring();
    let pres = LocalRingPresentation::new(ideal.clone(), witness.to_vec(), budget)?;
    if let Some(g) = prime.generators().iter().find(|g| !g.evaluate(witness).is_zero()) {
        return Err(Error::Domain(format!("witness is not on V(p): {g} does not vanish there")));
    }
    if !groebner_default(prime, budget)?.contains_ideal(ideal)? {
        return Err(Error::Precondition("the prime does not contain the defining ideal".into()));
    }
    let h = lifts.len();
    let n = ring.nvars();
    let dim_p = groebner_default(&prime.shift(witness)?, budget)?.dimension()?;
    if dim_p != h {
        return Err(Error::Precondition(format!("V(p) has dimension {dim_p} but {h} parameter lifts were given")));
    }
    let rank_p = jacobian_rank(prime.generators(), witness, ring);
    let mut with_t = prime.generators().to_vec();
    with_t.extend_from_slice(lifts);
    let rank_all = jacobian_rank(&with_t, witness, ring);
    if rank_p + h != n || rank_all != n {
        return Err(Error::Precondition(format!(
            "Jacobian check failed at the witness: rank {rank_p} for p, {rank_all} with lifts, need {} and {n}",
            n - h
        )));
    }
    let d = pres.dimension();
    if d < h {
        return Err(Error::Precondition(format!("dim R = {d} is smaller than dim R/p = {h}")));
    }
    // t - t(Q) in translated coordinates
    let shifted_t: Vec<Polynomial> = lifts
        .iter()
        .map(|t| {
            let c = ring.constant(t.evaluate(witness));
            t.sub(&c).and_then(|f| f.shift(witness))
        })
        .collect::<Result<_>>()?;
    let i0 = ideal.shift(witness)?;
    let cut = i0.sum(&IdealBasis::new(ring, shifted_t.clone())?)?;
    let dim_cut = groebner_default(&cut, budget)?.dimension()?;
    if dim_cut + h != d {
        return Err(Error::Precondition(format!(
            "height condition fails: dim R/(t) = {dim_cut}, expected {}",
            d - h
        )));
    }
    let q = frobenius_exponent(ring.characteristic() as u64, e)?;
    let p0 = prime.shift(witness)?;
    let powers: Vec<Polynomial> = shifted_t.iter().map(|t| t.frobenius_power(q)).collect::<Result<_>>()?;
    let j = i0.sum(&bracket_power(&p0, q)?)?.sum(&IdealBasis::new(ring, powers)?)?;
    let colength = local_colength(&j, budget)?;
    Ok(GenericValue {
        prime: prime.generators().iter().map(|g| g.to_string()).collect(),
        witness: point_values(witness),
        lifts: lifts.iter().map(|g| g.to_string()).collect(),
        e,
        value: Exact::normalized_length(&colength, q, d),
        colength,
    })
}

/// Generic values of `p` at several witnesses, together with the scanned
/// points lying on `V(p)`.
pub fn subvariety_record(
    report: &ScanReport,
    ideal: &IdealBasis,
    prime: &IdealBasis,
    witnesses: &[(Vec<FieldElement>, Vec<Polynomial>)],
    budget: &Budget,
) -> Result<SubvarietyRecord> {
    let values: Vec<Result<GenericValue>> = witnesses
        .par_iter()
        .flat_map_iter(|(q, t)| report.e_values.iter().map(move |&e| (q, t, e)))
        .map(|(q, t, e)| generic_value(ideal, prime, q, t, e, budget))
        .collect();
    let values: Vec<GenericValue> = values.into_iter().collect::<Result<_>>()?;
    let field = ideal.ring().field();
    let points_on = report
        .points
        .iter()
        .enumerate()
        .filter(|(_, r)| {
            let pt: Vec<FieldElement> = r.point.iter().map(|c| field.element(*c as u64)).collect();
            prime.generators().iter().all(|g| g.evaluate(&pt).is_zero())
        })
        .map(|(i, _)| i)
        .collect();
    Ok(SubvarietyRecord { prime: prime.generators().iter().map(|g| g.to_string()).collect(), values, points_on })
}

/// Exact pairwise comparisons: `λ_e` non-decreasing and `s_e` non-increasing
/// under specialization, and agreement of generic values across witnesses.
pub fn semicontinuity_verdict(report: &ScanReport) -> Verdicts {
    let mut v = Verdicts { upper_semicontinuous_lambda: true, lower_semicontinuous_s: true, generic_constancy: true, ..Default::default() };
    for pair in &report.pairs {
        let (a, b) = (&report.points[pair.special], &report.points[pair.generic]);
        for (k, &e) in report.e_values.iter().enumerate() {
            if a.lambda[k] < b.lambda[k] {
                v.upper_semicontinuous_lambda = false;
                v.violations.push(Violation {
                    invariant: "lambda".into(),
                    e,
                    special: point_label(&a.point),
                    generic: point_label(&b.point),
                    special_value: a.lambda[k].clone(),
                    generic_value: b.lambda[k].clone(),
                });
            }
            if a.splitting[k] > b.splitting[k] {
                v.lower_semicontinuous_s = false;
                v.violations.push(Violation {
                    invariant: "s".into(),
                    e,
                    special: point_label(&a.point),
                    generic: point_label(&b.point),
                    special_value: a.splitting[k].clone(),
                    generic_value: b.splitting[k].clone(),
                });
            }
        }
    }
    for sub in &report.subvarieties {
        let label = format!("generic point of ({})", sub.prime.join(", "));
        for &e in &report.e_values {
            let vals: Vec<&GenericValue> = sub.values.iter().filter(|g| g.e == e).collect();
            if vals.windows(2).any(|w| w[0].value != w[1].value) {
                v.generic_constancy = false;
                v.notes.push(format!(
                    "witnesses disagree for {label} at e = {e}: outside the constructible neighborhood"
                ));
            }
            let Some(generic) = vals.iter().map(|g| &g.value).min() else { continue };
            let k = report.e_values.iter().position(|x| *x == e).unwrap();
            for &i in &sub.points_on {
                let pt = &report.points[i];
                if pt.lambda[k] < *generic {
                    v.upper_semicontinuous_lambda = false;
                    v.violations.push(Violation {
                        invariant: "lambda".into(),
                        e,
                        special: point_label(&pt.point),
                        generic: label.clone(),
                        special_value: pt.lambda[k].clone(),
                        generic_value: generic.clone(),
                    });
                }
            }
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldConfig;
    use crate::poly::MonomialOrder;

    fn setup(p: u64, vars: &[&str], gens: &[&str]) -> IdealBasis {
        let r = PolyRing::new(FieldConfig::new(p).unwrap(), vars, MonomialOrder::Grevlex).unwrap();
        IdealBasis::parse(&r, gens).unwrap()
    }

    fn pt(i: &IdealBasis, c: &[u64]) -> Vec<FieldElement> {
        c.iter().map(|v| i.ring().field().element(*v)).collect()
    }

    #[test]
    fn enumerates_points() {
        let cusp = setup(5, &["x", "y"], &["y^2 - x^3"]);
        let pts = rational_points(&cusp).unwrap();
        // y^2 = x^3 over F_5 has one point per value of the parameter s: (s^2, s^3)
        assert_eq!(pts.len(), 5);
        assert!(pts.contains(&pt(&cusp, &[1, 1])) && pts.contains(&pt(&cusp, &[4, 3])));
    }

    #[test]
    fn cusp_scan() {
        let cusp = setup(5, &["x", "y"], &["y^2 - x^3"]);
        let points = vec![pt(&cusp, &[0, 0]), pt(&cusp, &[1, 1]), pt(&cusp, &[4, 3])];
        let r = scan_points(&cusp, &points, 1, &Budget::default()).unwrap();
        assert_eq!(r.points[0].lambda[0], Exact::integer(2));
        assert_eq!(r.points[1].lambda[0], Exact::one());
        assert_eq!(r.points[2].lambda[0], Exact::one());
        assert!(r.points[0].lambda[0] > r.points[1].lambda[0]);
        assert_eq!(r.pairs.len(), 2);
        assert!(r.verdicts.upper_semicontinuous_lambda && r.verdicts.lower_semicontinuous_s);
        assert!(r.verdicts.violations.is_empty());
        assert!(scan_points(&cusp, &[pt(&cusp, &[1, 0])], 1, &Budget::default()).is_err());
    }

    #[test]
    fn reversed_pair_is_reported() {
        let cusp = setup(5, &["x", "y"], &["y^2 - x^3"]);
        let points = vec![pt(&cusp, &[0, 0]), pt(&cusp, &[1, 1])];
        let r = scan_points(&cusp, &points, 1, &Budget::default()).unwrap();
        let r = r.with_pairs(vec![SpecializationPair { special: 1, generic: 0 }]).unwrap();
        assert!(!r.verdicts.upper_semicontinuous_lambda);
        assert!(!r.verdicts.lower_semicontinuous_s);
        assert_eq!(r.verdicts.violations.len(), 2);
    }

    #[test]
    fn node_surface_line() {
        let b = Budget::default();
        let surf = setup(3, &["x", "y", "z"], &["x*y"]);
        let line = IdealBasis::parse(surf.ring(), &["x", "y"]).unwrap();
        let z = surf.ring().parse("z").unwrap();
        let origin = pt(&surf, &[0, 0, 0]);
        let g = generic_value(&surf, &line, &origin, std::slice::from_ref(&z), 1, &b).unwrap();
        assert_eq!(g.value, Exact::new(5, 3));
        // the node in two variables
        let node = setup(3, &["x", "y"], &["x*y"]);
        let direct = lambda(&LocalRingPresentation::at_origin(node, &b).unwrap(), 1, &b).unwrap();
        assert_eq!(g.value, direct.lambda);

        let points = vec![origin.clone(), pt(&surf, &[0, 0, 1]), pt(&surf, &[1, 0, 0])];
        let r = scan_points(&surf, &points, 1, &b).unwrap();
        assert_eq!(r.points[0].lambda, r.points[1].lambda);
        let wit = vec![(origin, vec![z.clone()]), (pt(&surf, &[0, 0, 2]), vec![z])];
        let rec = subvariety_record(&r, &surf, &line, &wit, &b).unwrap();
        assert_eq!(rec.points_on, vec![0, 1]);
        let r = r.with_subvariety(rec);
        assert!(r.verdicts.generic_constancy);
        assert!(r.verdicts.upper_semicontinuous_lambda && r.verdicts.lower_semicontinuous_s);
    }

    #[test]
    fn degenerate_generic_value_is_the_point_value() {
        let b = Budget::default();
        let cusp = setup(5, &["x", "y"], &["y^2 - x^3"]);
        let q = pt(&cusp, &[1, 1]);
        let m = IdealBasis::parse(cusp.ring(), &["x - 1", "y - 1"]).unwrap();
        let g = generic_value(&cusp, &m, &q, &[], 1, &b).unwrap();
        let pres = LocalRingPresentation::new(cusp.clone(), q, &b).unwrap();
        assert_eq!(g.value, lambda(&pres, 1, &b).unwrap().lambda);
    }

    #[test]
    fn witness_rejected_by_jacobian() {
        let b = Budget::default();
        let surf = setup(3, &["x", "y", "z"], &["x*y"]);
        let line = IdealBasis::parse(surf.ring(), &["x", "y"]).unwrap();
        let bad_lift = surf.ring().parse("z^3").unwrap();
        let origin = pt(&surf, &[0, 0, 0]);
        assert!(matches!(generic_value(&surf, &line, &origin, &[bad_lift], 1, &b), Err(Error::Precondition(_))));
        assert!(matches!(generic_value(&surf, &line, &pt(&surf, &[1, 0, 0]), &[], 1, &b), Err(Error::Domain(_))));
    }

    #[test]
    fn local_colength_ignores_other_points() {
        let b = Budget::default();
        let i = setup(5, &["x"], &["x^2*(x - 1)^3"]);
        assert_eq!(local_colength(&i, &b).unwrap(), 2u32.into());
        assert_eq!(groebner_default(&i, &b).unwrap().colength().unwrap(), 5u32.into());
    }
}
