//! Local rings `(S/I)` at an F_p-rational point and the Hilbert–Kunz function.

use std::sync::Arc;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::Exact;
use crate::field::{frobenius_exponent, FieldElement};
use crate::ideal::{groebner_default, Budget, IdealBasis};
use crate::poly::{PolyRing, Polynomial};

/// `R = (S/I)` localized at `point`.
///
/// The dimension is that of the quotient `S/I` after moving the point to the
/// origin. For inputs that are not equidimensional through the point this can
/// exceed the local dimension; callers are expected to supply equidimensional
/// presentations (see [`LocalRingPresentation::jacobian_report`]).
#[derive(Clone, Debug)]
pub struct LocalRingPresentation {
    ring: Arc<PolyRing>,
    ideal: IdealBasis,
    point: Vec<FieldElement>,
    dim: usize,
}

/// Rank of the Jacobian of the generators at the distinguished point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JacobianReport {
    pub rank: usize,
    pub nvars: usize,
    pub dimension: usize,
    /// `rank == nvars - dimension`: the local ring is regular.
    pub smooth: bool,
}

/// One term `λ_e = colength / q^d` of the Hilbert–Kunz sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrobeniusSample {
    pub e: u32,
    pub q: u64,
    #[serde(with = "biguint_string")]
    pub colength: BigUint,
    pub lambda: Exact,
}

pub(crate) mod biguint_string {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl LocalRingPresentation {
    /// Checks that `point` lies on `V(I)` and computes the dimension at it.
    pub fn new(ideal: IdealBasis, point: Vec<FieldElement>, budget: &Budget) -> Result<Self> {
        let ring = ideal.ring().clone();
        if point.len() != ring.nvars() {
            return Err(Error::Structural(format!(
                "point has {} coordinates, ring has {} variables",
                point.len(),
                ring.nvars()
            )));
        }
        if let Some(g) = ideal.generators().iter().find(|g| !g.evaluate(&point).is_zero()) {
            return Err(Error::Domain(format!("point is not on V(I): generator {g} does not vanish there")));
        }
        let translated = ideal.shift(&point)?;
        let dim = groebner_default(&translated, budget)?.dimension()?;
        Ok(LocalRingPresentation { ring, ideal, point, dim })
    }

    /// Presentation at the origin.
    pub fn at_origin(ideal: IdealBasis, budget: &Budget) -> Result<Self> {
        let n = ideal.ring().nvars();
        let zero = ideal.ring().field().zero();
        Self::new(ideal, vec![zero; n], budget)
    }

    pub fn ring(&self) -> &Arc<PolyRing> {
        &self.ring
    }

    pub fn ideal(&self) -> &IdealBasis {
        &self.ideal
    }

    pub fn point(&self) -> &[FieldElement] {
        &self.point
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn characteristic(&self) -> u64 {
        self.ring.characteristic() as u64
    }

    pub fn is_at_origin(&self) -> bool {
        self.point.iter().all(|c| c.is_zero())
    }

    /// Substitutes `x_i -> x_i + a_i` so the distinguished point becomes the origin.
    pub fn translate_to_origin(&self) -> Result<Self> {
        if self.is_at_origin() {
            return Ok(self.clone());
        }
        let ideal = self.ideal.shift(&self.point)?;
        let zero = self.ring.field().zero();
        Ok(LocalRingPresentation {
            ring: self.ring.clone(),
            ideal,
            point: vec![zero; self.ring.nvars()],
            dim: self.dim,
        })
    }

    /// Moves a polynomial given in the original coordinates to the translated ones.
    pub fn translate_polynomial(&self, f: &Polynomial) -> Result<Polynomial> {
        if self.is_at_origin() {
            Ok(f.clone())
        } else {
            f.shift(&self.point)
        }
    }

    pub fn translate_ideal(&self, i: &IdealBasis) -> Result<IdealBasis> {
        if self.is_at_origin() {
            Ok(i.clone())
        } else {
            i.shift(&self.point)
        }
    }

    /// Jacobian criterion at the distinguished point.
    pub fn jacobian_report(&self) -> JacobianReport {
        let n = self.ring.nvars();
        let field = self.ring.field();
        let mut rows: Vec<Vec<FieldElement>> = self
            .ideal
            .generators()
            .iter()
            .map(|g| (0..n).map(|i| g.derivative(i).evaluate(&self.point)).collect())
            .collect();
        let rank = crate::field::matrix_rank(&mut rows, field);
        JacobianReport { rank, nvars: n, dimension: self.dim, smooth: rank + self.dim == n }
    }

    /// `l(S/(I + m^[q]))` at the origin of the translated presentation.
    pub fn frobenius_colength(&self, q: u64, budget: &Budget) -> Result<BigUint> {
        let at_origin = self.translate_to_origin()?;
        let ideal = at_origin.ideal.sum(&IdealBasis::frobenius_maximal(&self.ring, q))?;
        groebner_default(&ideal, budget)?.colength()
    }
}

/// `λ_e(R) = l(R/m^[q]) / q^d` with `q = p^e`.
///
/// Since `V(m^[q])` is the origin, the global colength of `I + m^[q]` is the
/// local length; no saturation of `I` is needed.
pub fn lambda(pres: &LocalRingPresentation, e: u32, budget: &Budget) -> Result<FrobeniusSample> {
    let q = frobenius_exponent(pres.characteristic(), e)?;
    let colength = pres.frobenius_colength(q, budget)?;
    let lambda = Exact::normalized_length(&colength, q, pres.dimension());
    Ok(FrobeniusSample { e, q, colength, lambda })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldConfig;
    use crate::poly::MonomialOrder;

    fn pres(p: u64, vars: &[&str], gens: &[&str], point: &[u64]) -> Result<LocalRingPresentation> {
        let r = PolyRing::new(FieldConfig::new(p).unwrap(), vars, MonomialOrder::Grevlex).unwrap();
        let i = IdealBasis::parse(&r, gens).unwrap();
        let pt = point.iter().map(|v| r.field().element(*v)).collect();
        LocalRingPresentation::new(i, pt, &Budget::default())
    }

    #[test]
    fn translation_examples() {
        let p = pres(5, &["x", "y"], &["y^2 - x^3"], &[1, 1]).unwrap();
        let t = p.translate_to_origin().unwrap();
        let want = t.ring().parse("(y+1)^2 - (x+1)^3").unwrap();
        assert_eq!(t.ideal().generators()[0], want);
        assert!(t.ideal().generators()[0].constant_term().is_zero());
        assert!(t.is_at_origin());

        let o = pres(5, &["x", "y"], &["y^2 - x^3"], &[0, 0]).unwrap();
        assert_eq!(o.translate_to_origin().unwrap().ideal().generators(), o.ideal().generators());

        assert!(matches!(pres(5, &["x", "y"], &["x"], &[1, 0]), Err(Error::Domain(_))));
    }

    #[test]
    fn lambda_examples() {
        let b = Budget::default();
        let plane = pres(5, &["x", "y"], &[], &[0, 0]).unwrap();
        for e in 0..=2 {
            assert_eq!(lambda(&plane, e, &b).unwrap().lambda, Exact::one());
        }
        let node = pres(3, &["x", "y"], &["x*y"], &[0, 0]).unwrap();
        let s = lambda(&node, 1, &b).unwrap();
        assert_eq!(s.colength, 5u32.into());
        assert_eq!(s.lambda, Exact::new(5, 3));

        let cusp = pres(5, &["x", "y"], &["y^2 - x^3"], &[0, 0]).unwrap();
        let s = lambda(&cusp, 1, &b).unwrap();
        // staircase of (y^2 - x^3, x^5, y^5): x^a y^b with b < 2, a < 5
        assert_eq!(s.colength, 10u32.into());
        assert_eq!(s.lambda, Exact::integer(2));
    }

    #[test]
    fn jacobian_certifies_smoothness() {
        let cusp_origin = pres(5, &["x", "y"], &["y^2 - x^3"], &[0, 0]).unwrap();
        assert!(!cusp_origin.jacobian_report().smooth);
        let cusp_smooth = pres(5, &["x", "y"], &["y^2 - x^3"], &[1, 1]).unwrap();
        assert!(cusp_smooth.jacobian_report().smooth);
        let b = Budget::default();
        assert_eq!(lambda(&cusp_smooth, 1, &b).unwrap().lambda, Exact::one());
        assert_eq!(lambda(&cusp_smooth, 2, &b).unwrap().lambda, Exact::one());
    }
}
