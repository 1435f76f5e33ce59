//! One-dimensional complete local rings given by branch data: the tame
//! invariants `β, γ0, γ, δ, Δ`, a tame parameter, and the discriminant of the
//! resulting finite extension of `F_p[[T]]`, computed with truncated series.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{is_prime, FieldConfig, FieldElement};
use crate::series::{determinant_valuation, TruncatedSeries};

pub const MAX_BRANCHES: usize = 4;
/// Largest T-adic precision tried before giving up.
pub const MAX_PRECISION: usize = 1 << 12;
pub const DEFAULT_SEED: u64 = 0x7a3e;

/// A branch: the value semigroup of `A/p` inside its normalization `F_p[[τ]]`
/// and the valuations on this branch of declared elements of `A` that vanish
/// on every other branch.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Branch {
    pub semigroup: Vec<u64>,
    #[serde(default)]
    pub cross_valuations: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchCurve {
    pub p: u64,
    pub branches: Vec<Branch>,
}

/// Numerical semigroup given by generators with gcd 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NumericalSemigroup {
    generators: Vec<u64>,
    /// Membership for `0..conductor`.
    small: Vec<bool>,
}

impl NumericalSemigroup {
    pub fn new(generators: &[u64]) -> Result<Self> {
        if generators.is_empty() || generators.contains(&0) {
            return Err(Error::Structural("semigroup needs positive generators".into()));
        }
        let g = generators.iter().copied().fold(0, num_integer::gcd);
        if g != 1 {
            return Err(Error::Structural(format!(
                "semigroup generators {generators:?} have gcd {g}; the conductor would be infinite"
            )));
        }
        let lo = *generators.iter().min().unwrap();
        let hi = *generators.iter().max().unwrap();
        let bound = (lo * hi + 1) as usize;
        let mut member = vec![false; bound];
        member[0] = true;
        for n in 1..bound {
            member[n] = generators.iter().any(|&a| a as usize <= n && member[n - a as usize]);
        }
        let conductor = member.iter().rposition(|m| !m).map_or(0, |i| i + 1);
        member.truncate(conductor);
        let mut gens = generators.to_vec();
        gens.sort_unstable();
        gens.dedup();
        Ok(NumericalSemigroup { generators: gens, small: member })
    }

    pub fn generators(&self) -> &[u64] {
        &self.generators
    }

    /// Least `c` with `[c, ∞)` inside the semigroup.
    pub fn conductor(&self) -> u64 {
        self.small.len() as u64
    }

    pub fn contains(&self, n: u64) -> bool {
        n >= self.conductor() || self.small[n as usize]
    }

    pub fn gaps(&self) -> Vec<u64> {
        (0..self.conductor()).filter(|n| !self.contains(*n)).collect()
    }

    /// Least positive element.
    pub fn multiplicity(&self) -> u64 {
        (1..).find(|n| self.contains(*n)).unwrap()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchInvariants {
    pub beta: u64,
    pub gamma0: u64,
    pub gamma: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TameInvariants {
    pub p: u64,
    pub branches: Vec<BranchInvariants>,
    pub delta: u64,
    #[serde(rename = "Delta")]
    pub big_delta: u64,
}

/// Least `γ >= lower` with `p ∤ γ`.
pub fn minimal_tame_bound(p: u64, lower: u64) -> u64 {
    (lower..).find(|g| g % p != 0).unwrap()
}

impl BranchCurve {
    pub fn new(p: u64, branches: Vec<Branch>) -> Result<Self> {
        let c = BranchCurve { p, branches };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !is_prime(self.p) {
            return Err(Error::Structural(format!("{} is not prime", self.p)));
        }
        if self.branches.is_empty() || self.branches.len() > MAX_BRANCHES {
            return Err(Error::Structural(format!(
                "need between 1 and {MAX_BRANCHES} branches, got {}",
                self.branches.len()
            )));
        }
        let single = self.branches.len() == 1;
        for (i, b) in self.branches.iter().enumerate() {
            let s = NumericalSemigroup::new(&b.semigroup)?;
            if single && !b.cross_valuations.is_empty() {
                return Err(Error::Structural("a single branch takes no cross-vanishing valuations".into()));
            }
            if !single && b.cross_valuations.is_empty() {
                return Err(Error::Structural(format!("branch {i} needs cross-vanishing valuations")));
            }
            for &v in &b.cross_valuations {
                if v == 0 {
                    return Err(Error::Structural(format!(
                        "branch {i}: an element vanishing on another branch lies in the maximal ideal, valuation 0 is impossible"
                    )));
                }
                if !s.contains(v) {
                    return Err(Error::Structural(format!(
                        "branch {i}: cross valuation {v} is not in the value semigroup {:?}",
                        s.generators()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn semigroups(&self) -> Result<Vec<NumericalSemigroup>> {
        self.branches.iter().map(|b| NumericalSemigroup::new(&b.semigroup)).collect()
    }

    pub fn field(&self) -> Result<FieldConfig> {
        FieldConfig::new(self.p)
    }
}

/// `γ0` = conductor, `β` = least declared cross valuation (0 for one branch),
/// `γ` = least integer `>= γ0 + β` prime to `p`; `δ = Σγ`, `Δ = Σ(γ+1)^2`.
pub fn tame_invariants(curve: &BranchCurve) -> Result<TameInvariants> {
    curve.validate()?;
    let mut branches = Vec::new();
    for (b, s) in curve.branches.iter().zip(curve.semigroups()?) {
        let beta = b.cross_valuations.iter().copied().min().unwrap_or(0);
        let gamma0 = s.conductor();
        let gamma = minimal_tame_bound(curve.p, gamma0 + beta);
        branches.push(BranchInvariants { beta, gamma0, gamma });
    }
    let delta = branches.iter().map(|b| b.gamma).sum();
    let big_delta = branches.iter().map(|b| (b.gamma + 1).pow(2)).sum();
    Ok(TameInvariants { p: curve.p, branches, delta, big_delta })
}

/// Per-branch piece `t_p = s_p r_p` of the parameter.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParameterComponent {
    pub branch: usize,
    /// `v(s_p) = β`.
    pub cross_part: u64,
    /// `v(r_p) = γ - β`, at least the conductor.
    pub conductor_part: u64,
    /// Valuation of the realized parameter on this branch.
    pub valuation: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TameParameter {
    pub description: String,
    pub components: Vec<ParameterComponent>,
}

/// Realization of the curve inside `Π F_p[[τ_i]]` at a given T-adic precision.
struct Realization {
    field: FieldConfig,
    gammas: Vec<u64>,
    /// Image of `T` on each branch: `τ^γ (1 + τ r(τ))`.
    params: Vec<TruncatedSeries>,
    /// `x_p = τ^{γ+1} w` with `x_p^γ = T^{γ+1}`.
    xs: Vec<TruncatedSeries>,
}

fn random_one_unit<R: Rng>(field: FieldConfig, rng: &mut R, prec: usize) -> TruncatedSeries {
    let p = field.characteristic() as u64;
    let mut coeffs = vec![field.one()];
    coeffs.extend((1..prec).map(|_| field.element(rng.gen_range(0..p))));
    TruncatedSeries::new(field, &coeffs, prec)
}

fn branch_precision(gamma: u64, n: usize) -> usize {
    let g = gamma as usize;
    g * (n + 2) + g * (g + 1)
}

impl Realization {
    fn build(curve: &BranchCurve, inv: &TameInvariants, n: usize, seed: u64) -> Result<Self> {
        let field = curve.field()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = Vec::new();
        let mut xs = Vec::new();
        let mut gammas = Vec::new();
        for b in &inv.branches {
            let g = b.gamma;
            let prec = branch_precision(g, n);
            let unit = random_one_unit(field, &mut rng, prec);
            let t = unit.shift_up(g as usize).with_precision(prec);
            let w = unit.pow(g + 1).with_precision(prec).root_of_one_unit(g)?;
            let x = w.shift_up(g as usize + 1).with_precision(prec);
            params.push(t);
            xs.push(x);
            gammas.push(g);
        }
        Ok(Realization { field, gammas, params, xs })
    }

    /// The basis `x_p, ..., x_p^{γ(p)}` for every branch, as tuples.
    fn basis(&self) -> Vec<Vec<TruncatedSeries>> {
        let mut out = Vec::new();
        for (i, x) in self.xs.iter().enumerate() {
            for k in 1..=self.gammas[i] {
                let elt = (0..self.xs.len())
                    .map(|j| {
                        if j == i {
                            x.pow(k).with_precision(x.precision())
                        } else {
                            TruncatedSeries::zero(self.field, self.xs[j].precision())
                        }
                    })
                    .collect();
                out.push(elt);
            }
        }
        out
    }

    fn trace(&self, elt: &[TruncatedSeries]) -> Result<TruncatedSeries> {
        let mut acc: Option<TruncatedSeries> = None;
        for (i, f) in elt.iter().enumerate() {
            let tr = trace_over_parameter(f, &self.params[i], self.gammas[i])?;
            acc = Some(match acc {
                None => tr,
                Some(a) => a.add(&tr),
            });
        }
        Ok(acc.expect("at least one branch"))
    }

    fn trace_matrix(&self) -> Result<Vec<Vec<TruncatedSeries>>> {
        let basis = self.basis();
        let n = basis.len();
        let mut m = vec![vec![TruncatedSeries::zero(self.field, 0); n]; n];
        for i in 0..n {
            for j in i..n {
                let prod: Vec<TruncatedSeries> = basis[i].iter().zip(&basis[j]).map(|(a, b)| a.mul(b)).collect();
                let tr = self.trace(&prod)?;
                m[i][j] = tr.clone();
                m[j][i] = tr;
            }
        }
        Ok(m)
    }
}

/// Coordinates `a_0(T), ..., a_{γ-1}(T)` of `f(τ) = Σ a_l(t(τ)) τ^l`, where
/// `t` has valuation `γ`. `a_l` is determined modulo `T^{⌈(N - l)/γ⌉}` when
/// `f` is known modulo `τ^N`.
pub fn coordinates(f: &TruncatedSeries, t: &TruncatedSeries, gamma: u64) -> Result<Vec<TruncatedSeries>> {
    let field = f.field();
    let g = gamma as usize;
    if t.valuation() != Some(g) {
        return Err(Error::Domain(format!("parameter does not have valuation {gamma}")));
    }
    let n = f.precision().min(t.precision());
    let mut rest = f.coefficients()[..n].to_vec();
    let mut out: Vec<Vec<FieldElement>> = (0..g).map(|l| vec![field.zero(); (n.saturating_sub(l)).div_ceil(g)]).collect();
    // powers of t, as coefficient vectors known to at least n
    let mut powers: Vec<Vec<FieldElement>> = Vec::new();
    let mut cur = TruncatedSeries::one(field, n + g);
    while powers.len() * g < n {
        if cur.precision() < n {
            return Err(Error::Precision { have: t.precision(), required: n });
        }
        powers.push(cur.coefficients()[..n].to_vec());
        cur = cur.mul(t);
    }
    for k in 0..n {
        let c = rest[k];
        if c.is_zero() {
            continue;
        }
        let (j, l) = (k / g, k % g);
        out[l][j] = c;
        for (idx, pc) in powers[j].iter().enumerate() {
            if idx + l >= n {
                break;
            }
            if !pc.is_zero() {
                rest[idx + l] = field.sub(rest[idx + l], field.mul(c, *pc));
            }
        }
    }
    Ok(out.into_iter().map(|c| {
        let prec = c.len();
        TruncatedSeries::new(field, &c, prec)
    }).collect())
}

/// Trace of multiplication by `f` on `F_p[[τ]]` over `F_p[[T]]`, `T ↦ t(τ)`.
pub fn trace_over_parameter(f: &TruncatedSeries, t: &TruncatedSeries, gamma: u64) -> Result<TruncatedSeries> {
    let mut acc: Option<TruncatedSeries> = None;
    for l in 0..gamma as usize {
        let shifted = f.shift_up(l);
        let coords = coordinates(&shifted, t, gamma)?;
        let c = coords[l].clone();
        acc = Some(match acc {
            None => c,
            Some(a) => a.add(&c),
        });
    }
    Ok(acc.expect("gamma >= 1"))
}

/// Per-branch realization of the parameter with its certified valuations.
pub fn construct_parameter(curve: &BranchCurve, seed: u64) -> Result<TameParameter> {
    let inv = tame_invariants(curve)?;
    let real = Realization::build(curve, &inv, 4, seed)?;
    let mut components = Vec::new();
    let mut terms = Vec::new();
    for (i, (b, t)) in inv.branches.iter().zip(&real.params).enumerate() {
        let v = t.valuation().ok_or(Error::Precision { have: t.precision(), required: 2 * t.precision() })? as u64;
        if v != b.gamma {
            return Err(Error::Structural(format!("branch {i}: realized parameter has valuation {v}, expected {}", b.gamma)));
        }
        components.push(ParameterComponent { branch: i, cross_part: b.beta, conductor_part: b.gamma - b.beta, valuation: v });
        terms.push(if inv.branches.len() == 1 {
            format!("τ^{}", b.gamma)
        } else {
            format!("τ{}^{}", i + 1, b.gamma)
        });
    }
    Ok(TameParameter { description: format!("t = {}", terms.join(" + ")), components })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscriminantReport {
    /// T-adic valuation of `det Tr(e_i e_j)`.
    pub valuation: u64,
    /// Rank of the realized extension over `F_p[[T]]`.
    pub degree: u64,
    /// Precision at which the valuation was certified.
    pub precision: usize,
    pub attempts: u32,
}

/// Discriminant valuation of the basis `{x_p^k}`, starting at `precision`
/// (default `2Δ + 2`) and doubling while the valuation is not certified.
pub fn discriminant_valuation(curve: &BranchCurve, precision: Option<usize>, seed: u64) -> Result<DiscriminantReport> {
    let inv = tame_invariants(curve)?;
    let mut n = precision.unwrap_or(2 * inv.big_delta as usize + 2).max(1);
    let mut attempts = 0;
    loop {
        attempts += 1;
        let real = Realization::build(curve, &inv, n, seed)?;
        match determinant_valuation(real.trace_matrix()?) {
            Ok(v) => {
                let degree = real.params.iter().map(|t| t.valuation().unwrap_or(0) as u64).sum();
                return Ok(DiscriminantReport { valuation: v as u64, degree, precision: n, attempts });
            }
            Err(Error::Precision { .. }) if 2 * n <= MAX_PRECISION => n *= 2,
            Err(Error::Precision { .. }) => return Err(Error::Precision { have: n, required: 2 * n }),
            Err(e) => return Err(e),
        }
    }
}

/// Module and algebra generator counts of the glued model over `F_p[[T]]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorBound {
    pub module_generators: u64,
    /// `μ`: minimal number of `F_p[[T]]`-algebra generators.
    pub algebra_generators: u32,
    pub delta: u64,
    pub bound: u64,
    pub pass: bool,
}

/// Checks `#module generators <= δ^μ` on the model
/// `A = F_p ⊕ ⊕_i τ_i^{C_i}` (for one branch, `F_p[[τ^S]]`), where `C_i` is
/// the ideal of the value semigroup generated by the cross valuations and
/// `T = (τ_i^{γ_i})_i`. Counts are `dim A/TA` and `dim m/(m^2 + TA)`.
pub fn generator_bound_check(curve: &BranchCurve) -> Result<GeneratorBound> {
    let inv = tame_invariants(curve)?;
    let sgs = curve.semigroups()?;
    let single = sgs.len() == 1;
    let window = sgs
        .iter()
        .zip(&inv.branches)
        .map(|(s, b)| 2 * (s.conductor() + b.beta + b.gamma) + 2)
        .max()
        .unwrap();
    let mut module = 0u64;
    let mut mu = 0i64;
    let mut t_in_span = true;
    for ((s, b), br) in sgs.iter().zip(&curve.branches).zip(&inv.branches) {
        let g = br.gamma;
        let in_c = |n: u64| -> bool {
            if single {
                s.contains(n)
            } else {
                b.cross_valuations.iter().any(|&c| n >= c && s.contains(n - c))
            }
        };
        let in_max = |n: u64| n > 0 && in_c(n);
        let in_sq = |n: u64| (1..n).any(|a| in_max(a) && in_max(n - a));
        let in_t = |n: u64| n >= g && in_c(n - g);
        module += (0..window).filter(|&n| in_c(n) && !in_t(n)).count() as u64;
        mu += (0..window).filter(|&n| in_max(n) && !in_sq(n) && !in_t(n)).count() as i64;
        if !single && !in_sq(g) {
            t_in_span = false;
        }
    }
    if !single && !t_in_span {
        mu -= 1;
    }
    let mu = mu.max(0) as u32;
    let bound = inv.delta.pow(mu);
    Ok(GeneratorBound { module_generators: module, algebra_generators: mu, delta: inv.delta, bound, pass: module <= bound })
}

/// One instance of the tame discriminant formula: `T ↦ τ^s u`, `y ∈ F_p[[τ]]`
/// with `v(y) = a` prime to `s` and `y^s = x ∈ F_p[[T]]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TameDiscTrial {
    pub p: u64,
    pub s: u64,
    pub a: u64,
    pub valuation: u64,
    pub expected: u64,
    pub pass: bool,
}

pub fn tame_disc_trial<R: Rng>(p: u64, s: u64, a: u64, rng: &mut R) -> Result<TameDiscTrial> {
    if s == 0 || s.is_multiple_of(p) || num_integer::gcd(a, s) != 1 || a == 0 {
        return Err(Error::Precondition(format!("need p ∤ s and gcd(a, s) = 1, got p = {p}, s = {s}, a = {a}")));
    }
    let field = FieldConfig::new(p)?;
    let expected = (s + 1) * a;
    let mut n = 2 * expected as usize + 2;
    loop {
        let mut trial_rng = ChaCha8Rng::seed_from_u64(rng.gen());
        match tame_disc_attempt(field, s, a, n, &mut trial_rng) {
            Ok(v) => return Ok(TameDiscTrial { p, s, a, valuation: v, expected, pass: v == expected }),
            Err(Error::Precision { .. }) if 2 * n <= MAX_PRECISION => n *= 2,
            Err(e) => return Err(e),
        }
    }
}

fn random_nonzero<R: Rng>(field: FieldConfig, rng: &mut R) -> FieldElement {
    field.element(rng.gen_range(1..field.characteristic() as u64))
}

fn tame_disc_attempt<R: Rng>(field: FieldConfig, s: u64, a: u64, n: usize, rng: &mut R) -> Result<u64> {
    let su = s as usize;
    let prec = su * (n + 2) + su * (a as usize + 1) * su;
    let c = random_nonzero(field, rng);
    let t = random_one_unit(field, rng, prec).scale(c).shift_up(su).with_precision(prec);
    // x = T^a g(T) with g(0) = r^s c^{-a}, so that x(t) / τ^{sa} has residue r^s
    let r = random_nonzero(field, rng);
    let g0 = field.mul(field.pow(r, s), field.pow(field.inverse(c)?, a));
    let tprec = prec / su + 1;
    let g = random_one_unit(field, rng, tprec).scale(g0);
    let x = g.shift_up(a as usize).with_precision(tprec);
    let xt = x.compose(&t)?.with_precision(prec);
    let h = xt.shift_down(su * a as usize)?.scale(field.inverse(field.pow(r, s))?);
    let y = h.root_of_one_unit(s)?.scale(r).shift_up(a as usize).with_precision(prec);
    let basis: Vec<TruncatedSeries> = (1..=s).map(|k| y.pow(k).with_precision(prec)).collect();
    let mut m = vec![vec![TruncatedSeries::zero(field, 0); su]; su];
    for i in 0..su {
        for j in i..su {
            let tr = trace_over_parameter(&basis[i].mul(&basis[j]), &t, s)?;
            m[i][j] = tr.clone();
            m[j][i] = tr;
        }
    }
    Ok(determinant_valuation(m)? as u64)
}

/// A random admissible `(p, s, a)` with `s <= 5`.
pub fn random_tame_disc_trial<R: Rng>(rng: &mut R) -> Result<TameDiscTrial> {
    let primes = [2u64, 3, 5, 7];
    loop {
        let p = primes[rng.gen_range(0..primes.len())];
        let s = rng.gen_range(1..=5u64);
        let a = rng.gen_range(1..=4u64);
        if s % p != 0 && num_integer::gcd(a, s) == 1 {
            return tame_disc_trial(p, s, a, rng);
        }
    }
}

/// Determinant by cofactor expansion; for the small matrices of the checks below.
pub fn determinant_series(m: &[Vec<TruncatedSeries>]) -> Result<TruncatedSeries> {
    let n = m.len();
    if n > 6 {
        return Err(Error::Capacity { what: format!("{n}x{n} cofactor expansion"), limit: "6x6".into() });
    }
    if n == 1 {
        return Ok(m[0][0].clone());
    }
    let mut acc: Option<TruncatedSeries> = None;
    for j in 0..n {
        let minor: Vec<Vec<TruncatedSeries>> =
            m[1..].iter().map(|row| row.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, a)| a.clone()).collect()).collect();
        let mut term = m[0][j].mul(&determinant_series(&minor)?);
        if j % 2 == 1 {
            term = term.neg();
        }
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term),
        });
    }
    Ok(acc.expect("nonempty matrix"))
}

/// Discriminant reduction check on the split étale algebra `F_p[[T]]^r`:
/// the constant term of `Disc(e)` equals the discriminant of the reduced basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionCheck {
    pub copies: usize,
    pub reduced_of_disc: u32,
    pub disc_of_reduced: u32,
    pub pass: bool,
}

pub fn disc_reduction_trial<R: Rng>(p: u64, copies: usize, rng: &mut R) -> Result<ReductionCheck> {
    let field = FieldConfig::new(p)?;
    let prec = 8;
    loop {
        // e_i = (e_i1, ..., e_ir); a basis iff the constant-term matrix is invertible
        let basis: Vec<Vec<TruncatedSeries>> = (0..copies)
            .map(|_| {
                (0..copies)
                    .map(|_| {
                        let c: Vec<FieldElement> = (0..prec).map(|_| field.element(rng.gen_range(0..p))).collect();
                        TruncatedSeries::new(field, &c, prec)
                    })
                    .collect()
            })
            .collect();
        let consts: Vec<Vec<FieldElement>> = basis.iter().map(|e| e.iter().map(|c| c.coeff(0).unwrap()).collect()).collect();
        if crate::field::matrix_rank(&mut consts.clone(), field) < copies {
            continue;
        }
        let trace = |a: &[TruncatedSeries], b: &[TruncatedSeries]| {
            a.iter().zip(b).map(|(x, y)| x.mul(y)).reduce(|u, v| u.add(&v)).unwrap()
        };
        let m: Vec<Vec<TruncatedSeries>> =
            (0..copies).map(|i| (0..copies).map(|j| trace(&basis[i], &basis[j])).collect()).collect();
        let disc = determinant_series(&m)?;
        let reduced_of_disc = disc.coeff(0).ok_or(Error::Precision { have: 0, required: 1 })?;
        let red: Vec<Vec<TruncatedSeries>> = consts
            .iter()
            .map(|row| row.iter().map(|c| TruncatedSeries::new(field, &[*c], 1)).collect())
            .collect();
        let mr: Vec<Vec<TruncatedSeries>> =
            (0..copies).map(|i| (0..copies).map(|j| trace(&red[i], &red[j])).collect()).collect();
        let disc_of_reduced = determinant_series(&mr)?.coeff(0).unwrap();
        return Ok(ReductionCheck {
            copies,
            reduced_of_disc: reduced_of_disc.value(),
            disc_of_reduced: disc_of_reduced.value(),
            pass: reduced_of_disc == disc_of_reduced,
        });
    }
}

/// For a single branch with basis `x, ..., x^γ` and `B = F_p[[T]][x]`:
/// the least `κ` with `T^κ B^{1/q} ⊆ A^{1/q}[B]`, checked on the spanning set
/// `(x^j)^{1/q}`, `j < γ`, compared with the discriminant valuation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CokernelCheck {
    pub q: u64,
    pub required_exponent: u64,
    pub disc_valuation: u64,
    pub pass: bool,
}

pub fn disc_kills_cokernel(curve: &BranchCurve, m: u32, seed: u64) -> Result<CokernelCheck> {
    let inv = tame_invariants(curve)?;
    if inv.branches.len() != 1 {
        return Err(Error::Precondition("cokernel check is implemented for a single branch".into()));
    }
    let q = crate::field::frobenius_exponent(curve.p, m)?;
    let g = inv.branches[0].gamma;
    let disc = discriminant_valuation(curve, None, seed)?.valuation;
    let mut n = 2 * (q as usize) * (disc as usize + 2);
    loop {
        match cokernel_attempt(curve, &inv, q, n, seed) {
            Ok(kappa) => {
                return Ok(CokernelCheck { q, required_exponent: kappa, disc_valuation: disc, pass: kappa <= disc });
            }
            Err(Error::Precision { .. }) if 2 * n <= MAX_PRECISION * g as usize => n *= 2,
            Err(e) => return Err(e),
        }
    }
}

fn cokernel_attempt(curve: &BranchCurve, inv: &TameInvariants, q: u64, n: usize, seed: u64) -> Result<u64> {
    let g = inv.branches[0].gamma;
    let gu = g as usize;
    // T-adic precision of the realization; x in τ, then σ = τ^{1/q}
    let real = Realization::build(curve, inv, n, seed)?;
    let t = &real.params[0];
    let x = &real.xs[0];
    let prec = t.precision();
    let field = real.field;
    // S = T^{1/q} ↦ t(σ): same coefficients
    let s_param = t.clone();
    let frob = |f: &TruncatedSeries| -> TruncatedSeries {
        // f(τ) = f(σ^q)
        let mut c = vec![field.zero(); f.precision() * q as usize];
        for (i, a) in f.coefficients().iter().enumerate() {
            c[i * q as usize] = *a;
        }
        let len = c.len();
        TruncatedSeries::new(field, &c, len).with_precision(prec)
    };
    let col = |f: &TruncatedSeries| coordinates(f, &s_param, g);
    let mut mat = vec![vec![TruncatedSeries::zero(field, 0); gu]; gu];
    for j in 0..gu {
        let xj = x.pow(j as u64).with_precision(prec);
        let c = col(&frob(&xj))?;
        for l in 0..gu {
            mat[l][j] = c[l].clone();
        }
    }
    let det = determinant_series(&mat)?;
    let vdet = det.valuation().ok_or(Error::Precision { have: det.precision(), required: 2 * det.precision() })?;
    let mut kappa = 0u64;
    for j in 0..gu {
        // (x^j)^{1/q} has the coefficients of x^j, read in σ
        let target = col(&x.pow(j as u64).with_precision(prec))?;
        for k in 0..gu {
            let mut mk = mat.clone();
            for l in 0..gu {
                mk[l][k] = target[l].clone();
            }
            let dk = determinant_series(&mk)?;
            let vk = match dk.valuation() {
                Some(v) => v,
                None if dk.precision() > vdet => continue,
                None => return Err(Error::Precision { have: dk.precision(), required: 2 * dk.precision() }),
            };
            if vk < vdet {
                kappa = kappa.max(((vdet - vk) as u64).div_ceil(q));
            }
        }
    }
    Ok(kappa)
}

impl fmt::Display for BranchCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "p {}", self.p)?;
        for b in &self.branches {
            let gens: Vec<String> = b.semigroup.iter().map(|g| g.to_string()).collect();
            write!(f, "branch {}", gens.join(" "))?;
            if !b.cross_valuations.is_empty() {
                let cv: Vec<String> = b.cross_valuations.iter().map(|g| g.to_string()).collect();
                write!(f, " cross {}", cv.join(" "))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Text form:
///
/// ```text
/// p 5
/// branch 2 3
/// ```
///
/// with one `branch <generators> [cross <valuations>]` line per branch;
/// `#` starts a comment.
impl FromStr for BranchCurve {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = None;
        let mut branches = Vec::new();
        let mut offset = 0;
        for line in s.lines() {
            let pos = offset;
            offset += line.len() + 1;
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let mut words = line.split_whitespace();
            let bad = |msg: String| Error::Parse { pos, msg };
            let num = |w: &str| w.parse::<u64>().map_err(|_| bad(format!("expected an integer, found {w:?}")));
            match words.next().unwrap() {
                "p" => {
                    let w = words.next().ok_or_else(|| bad("missing prime".into()))?;
                    p = Some(num(w)?);
                }
                "branch" => {
                    let mut semigroup = Vec::new();
                    let mut cross = Vec::new();
                    let mut in_cross = false;
                    for w in words {
                        if w == "cross" {
                            in_cross = true;
                        } else if in_cross {
                            cross.push(num(w)?);
                        } else {
                            semigroup.push(num(w)?);
                        }
                    }
                    branches.push(Branch { semigroup, cross_valuations: cross });
                }
                other => return Err(bad(format!("unknown keyword {other:?}"))),
            }
        }
        let p = p.ok_or(Error::Parse { pos: 0, msg: "missing `p` line".into() })?;
        BranchCurve::new(p, branches)
    }
}

impl BranchCurve {
    pub fn cusp(p: u64) -> Self {
        BranchCurve { p, branches: vec![Branch { semigroup: vec![2, 3], cross_valuations: vec![] }] }
    }

    /// Two smooth branches meeting transversally.
    pub fn node(p: u64) -> Self {
        let smooth = Branch { semigroup: vec![1], cross_valuations: vec![1] };
        BranchCurve { p, branches: vec![smooth.clone(), smooth] }
    }

    pub fn smooth(p: u64) -> Self {
        BranchCurve { p, branches: vec![Branch { semigroup: vec![1], cross_valuations: vec![] }] }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triple(inv: &TameInvariants) -> Vec<(u64, u64, u64)> {
        inv.branches.iter().map(|b| (b.gamma0, b.beta, b.gamma)).collect()
    }

    #[test]
    fn semigroup_basics() {
        let s = NumericalSemigroup::new(&[2, 3]).unwrap();
        assert_eq!(s.conductor(), 2);
        assert_eq!(s.gaps(), vec![1]);
        let s = NumericalSemigroup::new(&[3, 5]).unwrap();
        assert_eq!(s.gaps(), vec![1, 2, 4, 7]);
        assert_eq!(s.conductor(), 8);
        assert_eq!(NumericalSemigroup::new(&[1]).unwrap().conductor(), 0);
        assert!(NumericalSemigroup::new(&[2, 4]).is_err());
    }

    #[test]
    fn invariants_examples() {
        let c = tame_invariants(&BranchCurve::cusp(5)).unwrap();
        assert_eq!(triple(&c), vec![(2, 0, 2)]);
        assert_eq!((c.delta, c.big_delta), (2, 9));
        let c = tame_invariants(&BranchCurve::cusp(2)).unwrap();
        assert_eq!(triple(&c), vec![(2, 0, 3)]);
        assert_eq!((c.delta, c.big_delta), (3, 16));
        let n = tame_invariants(&BranchCurve::node(5)).unwrap();
        assert_eq!(triple(&n), vec![(0, 1, 1), (0, 1, 1)]);
        assert_eq!((n.delta, n.big_delta), (2, 8));
        let s = tame_invariants(&BranchCurve::smooth(3)).unwrap();
        assert_eq!((s.delta, s.big_delta), (1, 4));
    }

    #[test]
    fn gamma_is_minimal() {
        for p in [2, 3, 5, 7] {
            for lower in 0..30 {
                let g = minimal_tame_bound(p, lower);
                assert!(g >= lower && !g.is_multiple_of(p));
                assert!(g == lower || (g - 1).is_multiple_of(p) || g - 1 < lower);
            }
        }
    }

    #[test]
    fn validation_rejects_bad_data() {
        let bad_cross = BranchCurve {
            p: 5,
            branches: vec![Branch { semigroup: vec![2, 3], cross_valuations: vec![1] }, BranchCurve::smooth(5).branches[0].clone()],
        };
        assert!(tame_invariants(&bad_cross).is_err());
        assert!(BranchCurve::new(4, vec![Branch { semigroup: vec![1], cross_valuations: vec![] }]).is_err());
        assert!(BranchCurve::new(5, vec![]).is_err());
        let single_cross = BranchCurve { p: 5, branches: vec![Branch { semigroup: vec![1], cross_valuations: vec![1] }] };
        assert!(single_cross.validate().is_err());
    }

    #[test]
    fn parameter_valuations() {
        let p = construct_parameter(&BranchCurve::cusp(5), DEFAULT_SEED).unwrap();
        assert_eq!(p.components[0].valuation, 2);
        assert_eq!(p.description, "t = τ^2");
        let p = construct_parameter(&BranchCurve::cusp(2), DEFAULT_SEED).unwrap();
        assert_eq!(p.components[0].valuation, 3);
        let n = construct_parameter(&BranchCurve::node(3), DEFAULT_SEED).unwrap();
        assert_eq!(n.components.iter().map(|c| c.valuation).collect::<Vec<_>>(), vec![1, 1]);
    }

    #[test]
    fn trace_of_powers_of_tau() {
        // T = τ^3 exactly: Tr(τ^k) = 3 T^{k/3} if 3 | k, else 0
        let f = FieldConfig::new(5).unwrap();
        let t = TruncatedSeries::monomial(f, 3, f.one(), 40);
        for k in 0..9 {
            let tr = trace_over_parameter(&TruncatedSeries::monomial(f, k, f.one(), 40), &t, 3).unwrap();
            if k % 3 == 0 {
                assert_eq!(tr.valuation(), Some(k / 3));
                assert_eq!(tr.coeff(k / 3), Some(f.element(3)));
            } else {
                assert_eq!(tr.valuation(), None);
            }
        }
    }

    #[test]
    fn discriminant_examples() {
        for (curve, want) in [(BranchCurve::cusp(5), 9), (BranchCurve::node(5), 8), (BranchCurve::smooth(5), 4), (BranchCurve::cusp(2), 16)] {
            let r = discriminant_valuation(&curve, None, DEFAULT_SEED).unwrap();
            assert_eq!(r.valuation, want);
            assert_eq!(r.degree, tame_invariants(&curve).unwrap().delta);
        }
    }

    #[test]
    fn starting_precision_does_not_matter() {
        for n in [1, 3, 40] {
            let r = discriminant_valuation(&BranchCurve::cusp(2), Some(n), DEFAULT_SEED).unwrap();
            assert_eq!(r.valuation, 16);
            assert!(r.precision >= n);
        }
    }

    #[test]
    fn generator_bounds() {
        let c = generator_bound_check(&BranchCurve::cusp(5)).unwrap();
        assert_eq!((c.module_generators, c.algebra_generators, c.bound, c.pass), (2, 1, 2, true));
        let n = generator_bound_check(&BranchCurve::node(5)).unwrap();
        assert_eq!((n.module_generators, n.algebra_generators, n.bound, n.pass), (2, 1, 2, true));
        let s = generator_bound_check(&BranchCurve::smooth(5)).unwrap();
        assert_eq!((s.module_generators, s.bound, s.pass), (1, 1, true));
    }

    #[test]
    fn tame_disc_random_trials() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let t = random_tame_disc_trial(&mut rng).unwrap();
            assert!(t.pass, "{t:?}");
        }
        assert!(tame_disc_trial(5, 5, 1, &mut rng).is_err());
    }

    #[test]
    fn reduction_commutes_with_discriminant() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for copies in [2, 3] {
            for p in [2, 3, 7] {
                assert!(disc_reduction_trial(p, copies, &mut rng).unwrap().pass);
            }
        }
    }

    #[test]
    fn cusp_cokernel_is_killed() {
        let c = disc_kills_cokernel(&BranchCurve::cusp(5), 1, DEFAULT_SEED).unwrap();
        assert!(c.pass, "{c:?}");
        assert_eq!(c.disc_valuation, 9);
    }

    #[test]
    fn text_round_trip() {
        let node = BranchCurve::node(3);
        let text = node.to_string();
        assert_eq!(text.parse::<BranchCurve>().unwrap(), node);
        let c: BranchCurve = "# cusp\np 5\nbranch 2 3\n".parse().unwrap();
        assert_eq!(c, BranchCurve::cusp(5));
        assert!(matches!("p 5\nbranch 2 x".parse::<BranchCurve>(), Err(Error::Parse { .. })));
    }
}
