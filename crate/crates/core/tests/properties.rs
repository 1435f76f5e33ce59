use std::sync::Arc;

use frobenius_core::field::FieldConfig;
use frobenius_core::ideal::{bracket_power, colon, groebner_default, Budget, IdealBasis};
use frobenius_core::poly::{MonomialOrder, PolyRing, Polynomial};
use frobenius_core::series::TruncatedSeries;
use frobenius_core::tame::{discriminant_valuation, tame_invariants, Branch, BranchCurve, NumericalSemigroup, DEFAULT_SEED};
use frobenius_core::testing::{enumerate_standard_monomials, in_ideal_by_linear_algebra, random_homogeneous, random_poly};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ring(p: u64, n: usize) -> Arc<PolyRing> {
    let names = ["x", "y", "z"];
    PolyRing::new(FieldConfig::new(p).unwrap(), &names[..n], MonomialOrder::Grevlex).unwrap()
}

fn prime() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![2u64, 3, 5, 7, 11, 101])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms(p in prime(), a in 0u64..1000, b in 0u64..1000, c in 0u64..1000) {
        let f = FieldConfig::new(p).unwrap();
        let (a, b, c) = (f.element(a), f.element(b), f.element(c));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.pow(a, p), a);
        if !a.is_zero() {
            prop_assert_eq!(f.mul(a, f.inverse(a).unwrap()), f.one());
        }
    }

    #[test]
    fn polynomial_identities(p in prime(), seed in any::<u64>()) {
        let r = ring(p, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_poly(&r, &mut rng, 4, 3);
        let g = random_poly(&r, &mut rng, 4, 3);
        let h = random_poly(&r, &mut rng, 4, 3);
        prop_assert_eq!(f.add(&g).unwrap().mul(&h).unwrap(), f.mul(&h).unwrap().add(&g.mul(&h).unwrap()).unwrap());
        if p <= 5 {
            prop_assert_eq!(f.add(&g).unwrap().pow(p).unwrap(), f.frobenius_power(p).unwrap().add(&g.frobenius_power(p).unwrap()).unwrap());
        }
        prop_assert_eq!(r.parse(&f.to_string()).unwrap(), f.clone());
        let shift: Vec<_> = (0..3).map(|i| r.field().element(seed.rotate_left(i * 7) % p)).collect();
        let back: Vec<_> = shift.iter().map(|c| r.field().neg(*c)).collect();
        prop_assert_eq!(f.shift(&shift).unwrap().shift(&back).unwrap(), f);
    }

    #[test]
    fn membership_matches_linear_algebra(p in prime(), seed in any::<u64>()) {
        let r = ring(p, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gens: Vec<Polynomial> = (0..3).map(|k| random_homogeneous(&r, &mut rng, 3, 2 + (k % 2))).collect();
        let gb = groebner_default(&IdealBasis::new(&r, gens.clone()).unwrap(), &Budget::default()).unwrap();
        prop_assert!(gb.verify_s_pairs().unwrap());
        for d in 2..=4 {
            let f = random_homogeneous(&r, &mut rng, 4, d);
            prop_assert_eq!(gb.contains(&f).unwrap(), in_ideal_by_linear_algebra(&f, &gens));
        }
    }

    #[test]
    fn colength_matches_enumeration(p in prime(), a in 1u64..6, b in 1u64..6, seed in any::<u64>()) {
        let r = ring(p, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut gens = vec![r.var_power(0, a), r.var_power(1, b)];
        gens.push(random_poly(&r, &mut rng, 3, 4));
        let gb = groebner_default(&IdealBasis::new(&r, gens).unwrap(), &Budget::default()).unwrap();
        let count = if gb.is_unit() {
            0
        } else {
            enumerate_standard_monomials(&gb.leading_exponents(), 2, 1 << 12).unwrap().len()
        };
        prop_assert_eq!(gb.colength().unwrap(), (count as u64).into());
        prop_assert!(count as u64 <= a * b);
    }

    #[test]
    fn colon_multiplies_into_the_ideal(p in prime(), seed in any::<u64>()) {
        let r = ring(p, 2);
        let b = Budget::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let j = IdealBasis::new(&r, [r.var_power(0, 3), r.var_power(1, 3), random_poly(&r, &mut rng, 2, 3)]).unwrap();
        let k = IdealBasis::new(&r, [random_poly(&r, &mut rng, 3, 2)]).unwrap();
        let c = colon(&j, &k, &b).unwrap();
        let gj = groebner_default(&j, &b).unwrap();
        for g in c.generators() {
            for h in k.generators() {
                prop_assert!(gj.contains(&g.mul(h).unwrap()).unwrap());
            }
        }
        prop_assert!(groebner_default(&c, &b).unwrap().contains_ideal(&j).unwrap());
    }

    #[test]
    fn bracket_power_is_generated_by_powers(p in prime(), seed in any::<u64>()) {
        let r = ring(p, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_poly(&r, &mut rng, 3, 2);
        let g = random_poly(&r, &mut rng, 3, 2);
        let i = IdealBasis::new(&r, [f.clone(), g.clone()]).unwrap();
        let br = groebner_default(&bracket_power(&i, p).unwrap(), &Budget::default()).unwrap();
        // (f + g)^p = f^p + g^p lies in I^[p]
        prop_assert!(br.contains(&f.add(&g).unwrap().pow(p).unwrap()).unwrap());
    }

    #[test]
    fn series_inverse_and_roots(p in prime(), seed in any::<u64>(), n in 1u64..6) {
        prop_assume!(n % p != 0);
        let f = FieldConfig::new(p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let prec = 24;
        let mut coeffs = vec![f.one()];
        coeffs.extend((1..prec).map(|_| f.element(rand::Rng::gen_range(&mut rng, 0..p))));
        let u = TruncatedSeries::new(f, &coeffs, prec);
        let one = TruncatedSeries::one(f, prec);
        let prod = u.mul(&u.inverse().unwrap());
        prop_assert_eq!(prod.coefficients(), one.coefficients());
        let root = u.root_of_one_unit(n).unwrap();
        let back = root.pow(n).with_precision(prec);
        prop_assert_eq!(back.coefficients(), u.coefficients());
    }

    #[test]
    fn semigroup_conductor(a in 2u64..8, b in 2u64..12) {
        prop_assume!(num_gcd(a, b) == 1);
        let s = NumericalSemigroup::new(&[a, b]).unwrap();
        // two generators: the Frobenius number is ab - a - b
        prop_assert_eq!(s.conductor(), a * b - a - b + 1);
        prop_assert_eq!(s.gaps().len() as u64, (a - 1) * (b - 1) / 2);
    }
}

fn num_gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        num_gcd(b, a % b)
    }
}

/// The discriminant valuation is `Δ = Σ (γ+1)^2` on small single-branch and
/// multi-branch curves over several primes.
#[test]
fn discriminant_equals_delta() {
    let cases: Vec<(u64, Vec<Branch>)> = vec![
        (2, vec![Branch { semigroup: vec![2, 3], cross_valuations: vec![] }]),
        (3, vec![Branch { semigroup: vec![2, 3], cross_valuations: vec![] }]),
        (7, vec![Branch { semigroup: vec![3, 4], cross_valuations: vec![] }]),
        (2, vec![Branch { semigroup: vec![2, 5], cross_valuations: vec![] }]),
        (3, vec![Branch { semigroup: vec![1], cross_valuations: vec![1] }; 3]),
        (
            5,
            vec![
                Branch { semigroup: vec![2, 3], cross_valuations: vec![2] },
                Branch { semigroup: vec![1], cross_valuations: vec![1] },
            ],
        ),
    ];
    for (p, branches) in cases {
        let curve = BranchCurve::new(p, branches).unwrap();
        let inv = tame_invariants(&curve).unwrap();
        for seed in [DEFAULT_SEED, 1, 2] {
            let d = discriminant_valuation(&curve, None, seed).unwrap();
            assert_eq!(d.valuation, inv.big_delta, "{curve}");
            assert_eq!(d.degree, inv.delta);
        }
    }
}
