//! Finitely generated submodules of `R^n` for `R = Z` or `R = Z_(p)`.
//!
//! Vectors are stored as rationals; the coefficient ring only decides which
//! rationals are scalars. Modules are kept in Hermite normal form (row echelon
//! with canonical pivots and reduced entries above them), so two modules are
//! equal iff their row lists are equal.

use num_traits::{One, Signed, Zero};

use crate::scalar::{int_valuation, mod_inverse, prime_power, qint, valuation, Scalar, Q};

/// The ring of scalars acting on a group's coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CoeffRing {
    Integers,
    /// Rationals whose denominator is prime to `p`.
    LocalAt(u64),
}

impl CoeffRing {
    pub fn contains<Z: Scalar>(self, a: &Q<Z>) -> bool {
        match self {
            CoeffRing::Integers => a.denom().is_one(),
            CoeffRing::LocalAt(p) => int_valuation(a.denom(), p).unwrap_or(0) == 0,
        }
    }

    pub fn is_unit<Z: Scalar>(self, a: &Q<Z>) -> bool {
        match self {
            CoeffRing::Integers => a.denom().is_one() && a.numer().abs().is_one(),
            CoeffRing::LocalAt(p) => !a.is_zero() && valuation(a, p) == Some(0),
        }
    }

    /// Whether `d` divides `a` in the ring (`d` nonzero, both ring elements).
    pub fn divides<Z: Scalar>(self, d: &Q<Z>, a: &Q<Z>) -> bool {
        if a.is_zero() {
            return true;
        }
        if d.is_zero() {
            return false;
        }
        self.contains(&(a / d))
    }

    fn norm<Z: Scalar>(self, a: &Q<Z>) -> Z {
        match self {
            CoeffRing::Integers => a.numer().abs(),
            CoeffRing::LocalAt(p) => Z::from_i64(valuation(a, p).unwrap_or(0)).unwrap(),
        }
    }

    /// Unit multiplier bringing a nonzero pivot to canonical form
    /// (positive integer, resp. a power of `p`).
    fn canonical_unit<Z: Scalar>(self, a: &Q<Z>) -> Q<Z> {
        match self {
            CoeffRing::Integers => {
                if a.is_negative() {
                    -Q::<Z>::one()
                } else {
                    Q::one()
                }
            }
            CoeffRing::LocalAt(p) => {
                let v = valuation(a, p).expect("zero pivot") as u32;
                qint::<Z>(prime_power(p, v)) / a
            }
        }
    }

    /// Quotient `q` such that `a - q*b` is the canonical residue of `a`
    /// modulo the canonical pivot `b`.
    fn canonical_quotient<Z: Scalar>(self, a: &Q<Z>, b: &Q<Z>) -> Q<Z> {
        match self {
            CoeffRing::Integers => qint(a.numer().div_floor(b.numer())),
            CoeffRing::LocalAt(p) => {
                let k = int_valuation(b.numer(), p).unwrap_or(0);
                let residue = if k == 0 {
                    Z::zero()
                } else {
                    let m: Z = prime_power(p, k);
                    let inv = mod_inverse(a.denom(), &m).expect("denominator prime to p");
                    (a.numer().mod_floor(&m) * inv).mod_floor(&m)
                };
                (a - qint::<Z>(residue)) / b
            }
        }
    }

    /// Euclidean step: `(q, r)` with `a = q*b + r` and `r` zero or of
    /// smaller norm than `b`.
    fn div_rem<Z: Scalar>(self, a: &Q<Z>, b: &Q<Z>) -> (Q<Z>, Q<Z>) {
        match self {
            CoeffRing::Integers => {
                let (q, r) = a.numer().div_mod_floor(b.numer());
                (qint(q), qint(r))
            }
            CoeffRing::LocalAt(p) => {
                if valuation(a, p) >= valuation(b, p) {
                    (a / b, Q::zero())
                } else {
                    (Q::zero(), a.clone())
                }
            }
        }
    }
}

fn axpy<Z: Scalar>(target: &mut [Q<Z>], q: &Q<Z>, row: &[Q<Z>]) {
    if q.is_zero() {
        return;
    }
    for (t, r) in target.iter_mut().zip(row) {
        if !r.is_zero() {
            *t = &*t - q * r;
        }
    }
}

/// A submodule of `R^dim` in Hermite normal form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Lattice<Z: Scalar = num_bigint::BigInt> {
    ring: CoeffRing,
    dim: usize,
    rows: Vec<Vec<Q<Z>>>,
    pivots: Vec<usize>,
}

impl<Z: Scalar> Lattice<Z> {
    pub fn zero(ring: CoeffRing, dim: usize) -> Self {
        Lattice {
            ring,
            dim,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    /// `R^dim` scaled by `c`.
    pub fn scaled_full(ring: CoeffRing, dim: usize, c: &Q<Z>) -> Self {
        let gens = (0..dim)
            .map(|i| {
                let mut v = vec![Q::zero(); dim];
                v[i] = c.clone();
                v
            })
            .collect();
        Self::from_generators(ring, dim, gens)
    }

    pub fn from_generators(ring: CoeffRing, dim: usize, gens: Vec<Vec<Q<Z>>>) -> Self {
        let mut pending: Vec<Vec<Q<Z>>> = gens
            .into_iter()
            .inspect(|g| debug_assert_eq!(g.len(), dim))
            .filter(|g| g.iter().any(|c| !c.is_zero()))
            .collect();
        let mut rows = Vec::new();
        let mut pivots = Vec::new();
        for col in 0..dim {
            let (mut active, rest): (Vec<_>, Vec<_>) =
                pending.into_iter().partition(|g| !g[col].is_zero());
            pending = rest;
            if active.is_empty() {
                continue;
            }
            // gcd elimination on this column
            loop {
                let (best, _) = active
                    .iter()
                    .enumerate()
                    .min_by(|(_, a), (_, b)| ring.norm(&a[col]).cmp(&ring.norm(&b[col])))
                    .unwrap();
                let pivot_row = active.swap_remove(best);
                let mut remaining = Vec::new();
                for mut g in active {
                    let (q, _) = ring.div_rem(&g[col], &pivot_row[col]);
                    axpy(&mut g, &q, &pivot_row);
                    if g[col].is_zero() {
                        if g.iter().any(|c| !c.is_zero()) {
                            pending.push(g);
                        }
                    } else {
                        remaining.push(g);
                    }
                }
                if remaining.is_empty() {
                    let u = ring.canonical_unit(&pivot_row[col]);
                    let row: Vec<Q<Z>> = pivot_row.iter().map(|c| c * &u).collect();
                    rows.push(row);
                    pivots.push(col);
                    break;
                }
                remaining.push(pivot_row);
                active = remaining;
            }
        }
        let mut lat = Lattice {
            ring,
            dim,
            rows,
            pivots,
        };
        lat.reduce_above();
        lat
    }

    fn reduce_above(&mut self) {
        for i in 0..self.rows.len() {
            let col = self.pivots[i];
            let (above, below) = self.rows.split_at_mut(i);
            let pivot_row = &below[0];
            for r in above.iter_mut() {
                if !r[col].is_zero() {
                    let q = self.ring.canonical_quotient(&r[col], &pivot_row[col]);
                    axpy(r, &q, pivot_row);
                }
            }
        }
    }

    pub fn ring(&self) -> CoeffRing {
        self.ring
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<Q<Z>>] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Canonical representative of `v` modulo the module.
    pub fn reduce(&self, v: &[Q<Z>]) -> Vec<Q<Z>> {
        let mut out = v.to_vec();
        for (row, &col) in self.rows.iter().zip(&self.pivots) {
            if !out[col].is_zero() {
                let q = self.ring.canonical_quotient(&out[col], &row[col]);
                axpy(&mut out, &q, row);
            }
        }
        out
    }

    pub fn contains(&self, v: &[Q<Z>]) -> bool {
        let mut cur = v.to_vec();
        for (row, &col) in self.rows.iter().zip(&self.pivots) {
            if cur[col].is_zero() {
                continue;
            }
            if !self.ring.divides(&row[col], &cur[col]) {
                return false;
            }
            let q = &cur[col] / &row[col];
            axpy(&mut cur, &q, row);
        }
        cur.iter().all(|c| c.is_zero())
    }

    pub fn contains_lattice(&self, other: &Lattice<Z>) -> bool {
        other.rows.iter().all(|r| self.contains(r))
    }

    /// First row of `other` not contained in `self`.
    pub fn first_missing<'a>(&self, other: &'a Lattice<Z>) -> Option<&'a [Q<Z>]> {
        other
            .rows
            .iter()
            .find(|r| !self.contains(r))
            .map(|r| r.as_slice())
    }

    pub fn join(&self, other: &Lattice<Z>) -> Lattice<Z> {
        let gens = self.rows.iter().chain(&other.rows).cloned().collect();
        Self::from_generators(self.ring, self.dim, gens)
    }

    /// Intersection via the Zassenhaus trick.
    pub fn meet(&self, other: &Lattice<Z>) -> Lattice<Z> {
        let n = self.dim;
        let mut gens = Vec::new();
        for r in &self.rows {
            let mut v = r.clone();
            v.extend(r.iter().cloned());
            gens.push(v);
        }
        for r in &other.rows {
            let mut v = r.clone();
            v.extend(std::iter::repeat(Q::zero()).take(n));
            gens.push(v);
        }
        let big = Self::from_generators(self.ring, 2 * n, gens);
        let inner = big
            .rows
            .iter()
            .zip(&big.pivots)
            .filter(|(_, &c)| c >= n)
            .map(|(r, _)| r[n..].to_vec())
            .collect();
        Self::from_generators(self.ring, n, inner)
    }

    pub fn scale(&self, c: &Q<Z>) -> Lattice<Z> {
        let gens = self
            .rows
            .iter()
            .map(|r| r.iter().map(|x| x * c).collect())
            .collect();
        Self::from_generators(self.ring, self.dim, gens)
    }

    /// `{v : c*v ∈ self}` intersected with `ambient`.
    pub fn colon(&self, ambient: &Lattice<Z>, c: &Q<Z>) -> Lattice<Z> {
        self.meet(&ambient.scale(c)).scale(&(Q::one() / c))
    }

    /// Coefficients `x` with `Σ x_i rows_i = v`, if `v` lies in the module.
    pub fn solve(&self, v: &[Q<Z>]) -> Option<Vec<Q<Z>>> {
        let mut cur = v.to_vec();
        let mut coeffs = vec![Q::zero(); self.rows.len()];
        for (i, (row, &col)) in self.rows.iter().zip(&self.pivots).enumerate() {
            if cur[col].is_zero() {
                continue;
            }
            if !self.ring.divides(&row[col], &cur[col]) {
                return None;
            }
            let q = &cur[col] / &row[col];
            axpy(&mut cur, &q, row);
            coeffs[i] = q;
        }
        cur.iter().all(|c| c.is_zero()).then_some(coeffs)
    }
}
