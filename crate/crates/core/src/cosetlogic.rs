//! Coset combinatorics in finite abelian p-groups `∏ Z/p^{a_j}`.
//!
//! Subgroups are given by generator lists. For the saturation criterion a
//! subgroup `M` is handled as the lattice `L_M = span(M) + K` in `Z^n`,
//! where `K = ⊕ p^{a_j} Z` is the relation lattice: sums, intersections and
//! memberships become lattice operations and `|M| = [L_M : K]` is a ratio of
//! Hermite pivots. The brute-force side materializes sets instead.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{OagError, Result};
use crate::lattice::{CoeffRing, Lattice};
use crate::scalar::factorize;

/// Ambients above this order are refused by the enumerating routines.
pub const BRUTE_LIMIT: u64 = 1_000_000;

/// An element of the ambient, one residue per cyclic factor.
pub type Tuple = Vec<i64>;

/// `∏_j Z/m_j` with every `m_j` a power of one prime `p`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct FiniteAmbient {
    moduli: Vec<u64>,
    prime: u64,
}

impl TryFrom<Vec<u64>> for FiniteAmbient {
    type Error = OagError;
    fn try_from(moduli: Vec<u64>) -> Result<Self> {
        FiniteAmbient::new(&moduli)
    }
}

impl From<FiniteAmbient> for Vec<u64> {
    fn from(a: FiniteAmbient) -> Self {
        a.moduli
    }
}

impl FiniteAmbient {
    pub fn new(moduli: &[u64]) -> Result<Self> {
        if moduli.is_empty() {
            return Err(OagError::InvalidAmbient("no cyclic factors".into()));
        }
        let mut prime = None;
        for &m in moduli {
            let f = factorize(m);
            if f.len() != 1 {
                return Err(OagError::InvalidAmbient(format!(
                    "{m} is not a prime power"
                )));
            }
            match prime {
                None => prime = Some(f[0].0),
                Some(p) if p != f[0].0 => {
                    return Err(OagError::InvalidAmbient(
                        "moduli are powers of different primes".into(),
                    ))
                }
                _ => {}
            }
        }
        Ok(FiniteAmbient {
            moduli: moduli.to_vec(),
            prime: prime.unwrap(),
        })
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn rank(&self) -> usize {
        self.moduli.len()
    }

    /// Group order, `None` on overflow.
    pub fn order(&self) -> Option<u64> {
        self.moduli
            .iter()
            .try_fold(1u64, |acc, &m| acc.checked_mul(m))
    }

    pub fn reduce(&self, t: &[i64]) -> Tuple {
        t.iter()
            .zip(&self.moduli)
            .map(|(x, &m)| x.mod_floor(&(m as i64)))
            .collect()
    }

    pub fn add(&self, a: &[i64], b: &[i64]) -> Tuple {
        self.reduce(&a.iter().zip(b).map(|(x, y)| x + y).collect::<Vec<_>>())
    }

    pub fn sub(&self, a: &[i64], b: &[i64]) -> Tuple {
        self.reduce(&a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>())
    }

    pub fn zero(&self) -> Tuple {
        vec![0; self.rank()]
    }

    fn check_tuple(&self, t: &[i64]) -> Result<()> {
        if t.len() != self.rank() {
            return Err(OagError::InvalidAmbient(format!(
                "tuple of length {} in an ambient of rank {}",
                t.len(),
                self.rank()
            )));
        }
        Ok(())
    }

    fn guard(&self) -> Result<u64> {
        match self.order() {
            Some(n) if n <= BRUTE_LIMIT => Ok(n),
            Some(n) => Err(OagError::AmbientTooLarge(n)),
            None => Err(OagError::AmbientTooLarge(u64::MAX)),
        }
    }

    /// Every element, in mixed-radix order.
    pub fn elements(&self) -> Result<Vec<Tuple>> {
        let n = self.guard()?;
        let mut out = Vec::with_capacity(n as usize);
        let mut cur = self.zero();
        loop {
            out.push(cur.clone());
            let mut j = self.rank();
            loop {
                if j == 0 {
                    return Ok(out);
                }
                j -= 1;
                cur[j] += 1;
                if cur[j] < self.moduli[j] as i64 {
                    break;
                }
                cur[j] = 0;
            }
        }
    }

    /// The subgroup generated by `gens`, as a set.
    pub fn span_set(&self, gens: &[Tuple]) -> Result<HashSet<Tuple>> {
        self.guard()?;
        let mut seen: HashSet<Tuple> = HashSet::new();
        let zero = self.zero();
        seen.insert(zero.clone());
        let mut frontier = vec![zero];
        while let Some(x) = frontier.pop() {
            for g in gens {
                let y = self.add(&x, g);
                if seen.insert(y.clone()) {
                    frontier.push(y);
                }
            }
        }
        Ok(seen)
    }

    /// `L_M = span(gens) + K` in `Z^n`.
    pub fn lattice(&self, gens: &[Tuple]) -> Lattice<BigInt> {
        let n = self.rank();
        let q = |x: i64| Ratio::from_integer(BigInt::from(x));
        let mut rows: Vec<Vec<Ratio<BigInt>>> = gens
            .iter()
            .map(|g| g.iter().map(|&x| q(x)).collect())
            .collect();
        for (j, &m) in self.moduli.iter().enumerate() {
            let mut r = vec![q(0); n];
            r[j] = q(m as i64);
            rows.push(r);
        }
        Lattice::from_generators(CoeffRing::Integers, n, rows)
    }

    /// `|M|` for `M` given by its lattice.
    pub fn subgroup_order(&self, l: &Lattice<BigInt>) -> u64 {
        let mut covol = BigInt::one();
        for (row, &col) in l.rows().iter().zip(l.pivots()) {
            covol *= row[col].to_integer();
        }
        let total: BigInt = self.moduli.iter().map(|&m| BigInt::from(m)).product();
        (total / covol).to_u64().expect("subgroup order fits")
    }

    fn tuple_in(&self, l: &Lattice<BigInt>, t: &[i64]) -> bool {
        let v: Vec<Ratio<BigInt>> = t
            .iter()
            .map(|&x| Ratio::from_integer(BigInt::from(x)))
            .collect();
        l.contains(&v)
    }

    /// Generators of the lattice, reduced into the ambient.
    pub fn lattice_generators(&self, l: &Lattice<BigInt>) -> Vec<Tuple> {
        l.rows()
            .iter()
            .map(|r| {
                self.reduce(
                    &r.iter()
                        .map(|c| c.to_integer().to_i64().expect("small"))
                        .collect::<Vec<_>>(),
                )
            })
            .filter(|t| t.iter().any(|&x| x != 0))
            .collect()
    }
}

/// A coset `rep + <gens>`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetSpec {
    pub rep: Tuple,
    pub gens: Vec<Tuple>,
}

impl CosetSpec {
    pub fn new(rep: Tuple, gens: Vec<Tuple>) -> Self {
        CosetSpec { rep, gens }
    }
}

/// `Y = (a_0 + M_0) \ ⋃_i (a_i + M_i)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetSystem {
    pub base: CosetSpec,
    pub exclusions: Vec<CosetSpec>,
}

/// The JSON file layout: a system, its ambient and the saturating subgroup.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetSystemFile {
    pub ambient: FiniteAmbient,
    pub base: CosetSpec,
    pub exclusions: Vec<CosetSpec>,
    pub gprime: Vec<Tuple>,
}

impl CosetSystemFile {
    pub fn system(&self) -> CosetSystem {
        CosetSystem {
            base: self.base.clone(),
            exclusions: self.exclusions.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// `witness ∈ a_i + M_i` but not in the base coset.
    Containment { exclusion: usize, witness: Tuple },
    /// `witness` lies in both exclusions.
    Disjointness {
        first: usize,
        second: usize,
        witness: Tuple,
    },
    /// Malformed data (tuple lengths).
    Malformed { message: String },
}

fn coset_set(amb: &FiniteAmbient, c: &CosetSpec) -> Result<Vec<Tuple>> {
    let m = amb.span_set(&c.gens)?;
    let mut out: Vec<Tuple> = m.iter().map(|x| amb.add(&c.rep, x)).collect();
    out.sort();
    Ok(out)
}

fn check_shapes(sys: &CosetSystem, amb: &FiniteAmbient) -> Result<()> {
    for c in std::iter::once(&sys.base).chain(&sys.exclusions) {
        amb.check_tuple(&c.rep)?;
        for g in &c.gens {
            amb.check_tuple(g)?;
        }
    }
    Ok(())
}

/// Checks `a_i + M_i ⊆ a_0 + M_0` and pairwise disjointness by enumeration.
/// Violations are returned, never raised.
pub fn validate_system(sys: &CosetSystem, amb: &FiniteAmbient) -> Vec<Violation> {
    if let Err(e) = check_shapes(sys, amb) {
        return vec![Violation::Malformed {
            message: e.to_string(),
        }];
    }
    let sets: Result<Vec<Vec<Tuple>>> = sys.exclusions.iter().map(|c| coset_set(amb, c)).collect();
    let (base, sets) = match (coset_set(amb, &sys.base), sets) {
        (Ok(b), Ok(s)) => (b.into_iter().collect::<HashSet<_>>(), s),
        (Err(e), _) | (_, Err(e)) => {
            return vec![Violation::Malformed {
                message: e.to_string(),
            }]
        }
    };
    let mut out = Vec::new();
    for (i, s) in sets.iter().enumerate() {
        if let Some(w) = s.iter().find(|x| !base.contains(*x)) {
            out.push(Violation::Containment {
                exclusion: i,
                witness: w.clone(),
            });
        }
    }
    for i in 0..sets.len() {
        let si: HashSet<&Tuple> = sets[i].iter().collect();
        for j in i + 1..sets.len() {
            if let Some(w) = sets[j].iter().find(|x| si.contains(x)) {
                out.push(Violation::Disjointness {
                    first: i,
                    second: j,
                    witness: w.clone(),
                });
            }
        }
    }
    out
}

/// `y ∈ Y + G'` by the saturation criterion: `y - a_0 ∈ M_0 + G'`, and the
/// sum of `1 / [M_0 ∩ G' : M_i ∩ G']` over the exclusions with
/// `y - a_i ∈ M_i + G'` is below 1. Computed with lattices and exact
/// rationals; every index ratio is checked to be a power of `p`.
pub fn saturation_membership(
    sys: &CosetSystem,
    amb: &FiniteAmbient,
    gprime: &[Tuple],
    y: &[i64],
) -> Result<bool> {
    check_shapes(sys, amb)?;
    amb.check_tuple(y)?;
    let lg = amb.lattice(gprime);
    let l0 = amb.lattice(&sys.base.gens);
    if !amb.tuple_in(&l0.join(&lg), &amb.sub(y, &sys.base.rep)) {
        return Ok(false);
    }
    let top = amb.subgroup_order(&l0.meet(&lg));
    let mut sum = Ratio::<u64>::zero();
    for ex in &sys.exclusions {
        let li = amb.lattice(&ex.gens);
        if !amb.tuple_in(&li.join(&lg), &amb.sub(y, &ex.rep)) {
            continue;
        }
        let bottom = amb.subgroup_order(&li.meet(&lg));
        if top % bottom != 0 {
            return Err(OagError::InvalidAmbient(format!(
                "exclusion subgroup is not inside the base: |M_0 ∩ G'| = {top}, |M_i ∩ G'| = {bottom}"
            )));
        }
        let ratio = top / bottom;
        assert!(
            is_power_of(ratio, amb.prime()),
            "index {ratio} is not a power of {}",
            amb.prime()
        );
        sum += Ratio::new(1, ratio);
        if sum >= Ratio::one() {
            return Ok(false);
        }
    }
    Ok(true)
}

fn is_power_of(mut x: u64, p: u64) -> bool {
    while x > 1 && x % p == 0 {
        x /= p;
    }
    x == 1
}

/// `y ∈ Y + G'` by materializing `Y` and `G'`.
pub fn brute_membership(
    sys: &CosetSystem,
    amb: &FiniteAmbient,
    gprime: &[Tuple],
    y: &[i64],
) -> Result<bool> {
    check_shapes(sys, amb)?;
    amb.check_tuple(y)?;
    let ys = brute_y(sys, amb)?;
    let g = amb.span_set(gprime)?;
    Ok(g.iter().any(|h| ys.contains(&amb.sub(y, h))))
}

/// The set `Y`.
pub fn brute_y(sys: &CosetSystem, amb: &FiniteAmbient) -> Result<HashSet<Tuple>> {
    let mut ys: HashSet<Tuple> = coset_set(amb, &sys.base)?.into_iter().collect();
    for ex in &sys.exclusions {
        for x in coset_set(amb, ex)? {
            ys.remove(&x);
        }
    }
    Ok(ys)
}

/// Smallest `N` such that for every multiset of `k` powers `q_i` of `n`,
/// `Σ 1/q_i ≥ 1` iff the partial sum over `q_i < n^N` is `≥ 1`.
///
/// Exponent bound for the search: to test a candidate `N` it suffices to
/// look at exponents in `[0, N]`. Lowering any exponent `≥ N` to exactly `N`
/// raises the full sum and leaves the partial sum unchanged, so a
/// counterexample with larger exponents yields one inside the box.
///
/// Termination: write `R` for the partial sum in a counterexample, so
/// `R < 1 ≤ Σ`. The dropped terms add at most `k·n^{-N}`. A sum of `j`
/// powers of `1/n` that stays below 1 is at most `1 - n^{-⌈j/(n-1)⌉}`
/// (carrying in base `n` never increases the term count, and
/// `1 - n^{-t}` needs `t(n-1)` digits), so a counterexample forces
/// `k·n^{-N} ≥ n^{-⌈k/(n-1)⌉}`. The scan therefore stops by
/// `N = ⌈k/(n-1)⌉ + ⌈log_n k⌉ + 1`.
pub fn threshold_n(n: u64, k: usize) -> u32 {
    assert!(n >= 2 && k >= 1);
    let mut log = 0u32;
    while (n as u128).pow(log) < k as u128 {
        log += 1;
    }
    let ceiling = (k as u64).div_ceil(n - 1) as u32 + log + 1;
    (1..=ceiling)
        .find(|&big_n| threshold_holds(n, k, big_n, big_n))
        .expect("threshold exists below the gap bound")
}

/// Whether the threshold property holds for `N` on all multisets of `k`
/// exponents in `[0, max_exp]`.
pub fn threshold_holds(n: u64, k: usize, big_n: u32, max_exp: u32) -> bool {
    let scale = max_exp.max(big_n);
    let unit = (n as u128).pow(scale);
    let mut exps = vec![0u32; k];
    loop {
        let mut full: u128 = 0;
        let mut part: u128 = 0;
        for &e in &exps {
            let term = (n as u128).pow(scale - e);
            full += term;
            if e < big_n {
                part += term;
            }
        }
        if (full >= unit) != (part >= unit) {
            return false;
        }
        // next nondecreasing exponent tuple
        let mut i = k;
        loop {
            if i == 0 {
                return true;
            }
            i -= 1;
            if exps[i] < max_exp {
                let v = exps[i] + 1;
                for e in exps[i..].iter_mut() {
                    *e = v;
                }
                break;
            }
        }
    }
}

/// Result of normalizing a boolean combination of cosets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Normalized {
    System { system: CosetSystem },
    EmptyIntersection,
}

/// Intersection of two cosets, if nonempty.
fn intersect(amb: &FiniteAmbient, a: &CosetSpec, b: &CosetSpec) -> Result<Option<CosetSpec>> {
    let la = amb.lattice(&a.gens);
    let lb = amb.lattice(&b.gens);
    let diff = amb.sub(&a.rep, &b.rep);
    if !amb.tuple_in(&la.join(&lb), &diff) {
        return Ok(None);
    }
    // find m ∈ M_a with a - b - m ∈ M_b; then a - m lies in both
    let ma = amb.span_set(&a.gens)?;
    let mut ms: Vec<&Tuple> = ma.iter().collect();
    ms.sort();
    let m = ms
        .into_iter()
        .find(|m| amb.tuple_in(&lb, &amb.sub(&diff, m)))
        .expect("a - b ∈ M_a + M_b");
    let rep = amb.sub(&a.rep, m);
    let gens = amb.lattice_generators(&la.meet(&lb));
    Ok(Some(CosetSpec::new(rep, gens)))
}

fn coset_within(amb: &FiniteAmbient, inner: &CosetSpec, outer: &CosetSpec) -> bool {
    let lo = amb.lattice(&outer.gens);
    lo.contains_lattice(&amb.lattice(&inner.gens))
        && amb.tuple_in(&lo, &amb.sub(&inner.rep, &outer.rep))
}

/// Turns `⋂ positives \ ⋃ negatives` into a coset system: the positives
/// meet in one base coset (or nothing), every negative is cut down to the
/// base, and negatives contained in another one are absorbed. Negatives
/// that overlap without nesting violate the precondition.
pub fn normalize_combination(
    positive: &[CosetSpec],
    negative: &[CosetSpec],
    amb: &FiniteAmbient,
) -> Result<Normalized> {
    let units = (0..amb.rank())
        .map(|j| {
            let mut e = amb.zero();
            e[j] = 1;
            e
        })
        .collect();
    let mut base = CosetSpec::new(amb.zero(), units);
    for c in positive {
        amb.check_tuple(&c.rep)?;
        match intersect(amb, &base, c)? {
            Some(b) => base = b,
            None => return Ok(Normalized::EmptyIntersection),
        }
    }
    base.rep = amb.reduce(&base.rep);
    let mut cut: Vec<CosetSpec> = Vec::new();
    for c in negative {
        amb.check_tuple(&c.rep)?;
        if let Some(e) = intersect(amb, &base, c)? {
            cut.push(e);
        }
    }
    let mut kept: Vec<CosetSpec> = Vec::new();
    for (i, c) in cut.iter().enumerate() {
        let absorbed = cut
            .iter()
            .enumerate()
            .any(|(j, d)| j != i && coset_within(amb, c, d) && (!coset_within(amb, d, c) || j < i));
        if !absorbed {
            kept.push(c.clone());
        }
    }
    let sys = CosetSystem {
        base,
        exclusions: kept,
    };
    if let Some(v) = validate_system(&sys, amb).into_iter().next() {
        return Err(OagError::ConstraintViolation(format!(
            "negative cosets neither nested nor disjoint: {v:?}"
        )));
    }
    Ok(Normalized::System { system: sys })
}

/// A random valid system: a base coset and up to `max_exclusions`
/// pairwise disjoint cosets of subgroups of `M_0` inside it.
pub fn random_system<R: Rng>(
    amb: &FiniteAmbient,
    max_exclusions: usize,
    rng: &mut R,
) -> Result<CosetSystem> {
    let random_tuple = |rng: &mut R| -> Tuple {
        amb.moduli
            .iter()
            .map(|&m| rng.gen_range(0..m as i64))
            .collect()
    };
    let ngens = rng.gen_range(1..=amb.rank() + 1);
    let base_gens: Vec<Tuple> = (0..ngens).map(|_| random_tuple(rng)).collect();
    let base = CosetSpec::new(random_tuple(rng), base_gens);
    let m0: Vec<Tuple> = {
        let mut v: Vec<Tuple> = amb.span_set(&base.gens)?.into_iter().collect();
        v.sort();
        v
    };
    let mut sys = CosetSystem {
        base,
        exclusions: Vec::new(),
    };
    let target = rng.gen_range(0..=max_exclusions);
    for _ in 0..4 * target + 4 {
        if sys.exclusions.len() >= target {
            break;
        }
        let k = rng.gen_range(0..=2);
        let gens: Vec<Tuple> = (0..k)
            .map(|_| m0[rng.gen_range(0..m0.len())].clone())
            .collect();
        let rep = amb.add(&sys.base.rep, &m0[rng.gen_range(0..m0.len())]);
        let cand = CosetSpec::new(rep, gens);
        let mut trial = sys.clone();
        trial.exclusions.push(cand);
        if validate_system(&trial, amb).is_empty() {
            sys = trial;
        }
    }
    Ok(sys)
}

/// A random subgroup of the ambient, by up to `rank` random generators.
pub fn random_subgroup<R: Rng>(amb: &FiniteAmbient, rng: &mut R) -> Vec<Tuple> {
    let k = rng.gen_range(0..=amb.rank());
    (0..k)
        .map(|_| {
            amb.moduli
                .iter()
                .map(|&m| rng.gen_range(0..m as i64))
                .collect()
        })
        .collect()
}
