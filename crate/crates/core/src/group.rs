//! Group specifications and constructed group handles.
//!
//! Four concrete families are supported. All of them are subgroups of a
//! finitely supported coordinate space ordered lexicographically with index 0
//! most significant, so their convex subgroups are exactly the tails
//! `Tail(m) = {x : x_j = 0 for j < m}`.
//!
//! * `FreeLex(k)`: `Z^k`.
//! * `LocalLex(p)`: `⊕_ω Z_(p)`, rationals with denominators prime to `p`.
//! * `PolyMod(p, n)`: integer polynomials `q(t)` with `p^n | Σ q_i`.
//! * `PolyPart`: integer polynomials with `p_i^{n_i} | s_i(q)`, where `s_i`
//!   sums the coefficients over the partition cell
//!   `U_i = {m ≥ 1 : v_2(m) = i}`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{OagError, Result};
use crate::lattice::CoeffRing;
use crate::scalar::{int_divides, is_prime, prime_power, qint, valuation, Scalar, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellConstraint {
    pub p: u64,
    pub n: u32,
    pub cell: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GroupSpec {
    FreeLex {
        rank: usize,
    },
    LocalLex {
        p: u64,
    },
    PolyMod {
        p: u64,
        n: u32,
    },
    /// `default` constrains every cell that is not listed explicitly; without
    /// it unlisted cells are unconstrained.
    PolyPart {
        constraints: Vec<CellConstraint>,
        default: Option<(u64, u32)>,
    },
}

impl GroupSpec {
    pub fn free_lex(rank: usize) -> Self {
        GroupSpec::FreeLex { rank }
    }

    pub fn local_lex(p: u64) -> Self {
        GroupSpec::LocalLex { p }
    }

    pub fn poly_mod(p: u64, n: u32) -> Self {
        GroupSpec::PolyMod { p, n }
    }

    /// Constraints listed in order apply to cells `0, 1, 2, ...`.
    pub fn poly_part(pairs: &[(u64, u32)]) -> Self {
        GroupSpec::PolyPart {
            constraints: pairs
                .iter()
                .enumerate()
                .map(|(cell, &(p, n))| CellConstraint { p, n, cell })
                .collect(),
            default: None,
        }
    }

    /// Every cell constrained by `p^n | s_i`.
    pub fn poly_part_uniform(p: u64, n: u32) -> Self {
        GroupSpec::PolyPart {
            constraints: Vec::new(),
            default: Some((p, n)),
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            GroupSpec::FreeLex { .. } => "freelex",
            GroupSpec::LocalLex { .. } => "locallex",
            GroupSpec::PolyMod { .. } => "polymod",
            GroupSpec::PolyPart { .. } => "polypart",
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(OagError::InvalidSpec(m));
        match self {
            GroupSpec::FreeLex { rank } => {
                if *rank == 0 {
                    return bad("rank must be at least 1".into());
                }
            }
            GroupSpec::LocalLex { p } => {
                if !is_prime(*p) {
                    return bad(format!("{p} is not prime"));
                }
            }
            GroupSpec::PolyMod { p, n } => {
                if !is_prime(*p) {
                    return bad(format!("{p} is not prime"));
                }
                if *n == 0 {
                    return bad("exponent must be at least 1".into());
                }
            }
            GroupSpec::PolyPart {
                constraints,
                default,
            } => {
                let mut seen = std::collections::HashSet::new();
                for c in constraints {
                    if !is_prime(c.p) {
                        return bad(format!("{} is not prime", c.p));
                    }
                    if c.n == 0 {
                        return bad(format!("zero exponent on cell {}", c.cell));
                    }
                    if !seen.insert(c.cell) {
                        return bad(format!("duplicate cell {}", c.cell));
                    }
                }
                if let Some((p, n)) = default {
                    if !is_prime(*p) {
                        return bad(format!("{p} is not prime"));
                    }
                    if *n == 0 {
                        return bad("zero default exponent".into());
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::FreeLex { rank } => write!(f, "freelex({rank})"),
            GroupSpec::LocalLex { p } => write!(f, "locallex(p={p})"),
            GroupSpec::PolyMod { p, n } => write!(f, "polymod(p={p},n={n})"),
            GroupSpec::PolyPart {
                constraints,
                default,
            } => {
                let mut sorted = constraints.clone();
                sorted.sort_by_key(|c| c.cell);
                let contiguous = sorted.iter().enumerate().all(|(i, c)| c.cell == i);
                let mut parts: Vec<String> = sorted
                    .iter()
                    .map(|c| {
                        if contiguous {
                            format!("({},{})", c.p, c.n)
                        } else {
                            format!("{}:({},{})", c.cell, c.p, c.n)
                        }
                    })
                    .collect();
                if let Some((p, n)) = default {
                    parts.push(format!("*=({p},{n})"));
                }
                write!(f, "polypart({})", parts.join(","))
            }
        }
    }
}

/// A convex subgroup of one of the supported groups: a tail of the chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Convex {
    /// `{x : x_j = 0 for j < m}`; `Tail(0)` is the whole group.
    Tail(usize),
    /// The trivial subgroup `{0}`.
    Zero,
}

impl Convex {
    pub const FULL: Convex = Convex::Tail(0);

    /// Level in the chain; `None` for the trivial subgroup.
    pub fn level(self) -> Option<usize> {
        match self {
            Convex::Tail(m) => Some(m),
            Convex::Zero => None,
        }
    }

    /// `self ⊆ other`.
    pub fn is_contained_in(self, other: Convex) -> bool {
        match (self, other) {
            (_, Convex::Tail(0)) => true,
            (Convex::Zero, _) => true,
            (Convex::Tail(_), Convex::Zero) => false,
            (Convex::Tail(a), Convex::Tail(b)) => a >= b,
        }
    }

    pub fn smaller(self, other: Convex) -> Convex {
        if self.is_contained_in(other) {
            self
        } else {
            other
        }
    }

    pub fn larger(self, other: Convex) -> Convex {
        if self.is_contained_in(other) {
            other
        } else {
            self
        }
    }
}

impl fmt::Display for Convex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Convex::Tail(0) => write!(f, "full"),
            Convex::Tail(m) => write!(f, "tail({m})"),
            Convex::Zero => write!(f, "zero"),
        }
    }
}

/// A constructed group. Immutable; share it through [`GroupHandle`].
#[derive(Debug, PartialEq, Eq, Hash)]
pub struct Group {
    spec: GroupSpec,
}

pub type GroupHandle = Arc<Group>;

pub fn make_group(spec: GroupSpec) -> Result<GroupHandle> {
    spec.validate()?;
    let spec = match spec {
        GroupSpec::PolyPart {
            mut constraints,
            default,
        } => {
            constraints.sort_by_key(|c| c.cell);
            GroupSpec::PolyPart {
                constraints,
                default,
            }
        }
        other => other,
    };
    Ok(Arc::new(Group { spec }))
}

fn v2(m: usize) -> usize {
    m.trailing_zeros() as usize
}

impl Group {
    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    /// Number of coordinates, `None` for countably many.
    pub fn universe(&self) -> Option<usize> {
        match self.spec {
            GroupSpec::FreeLex { rank } => Some(rank),
            _ => None,
        }
    }

    pub fn coeff_ring(&self) -> CoeffRing {
        match self.spec {
            GroupSpec::LocalLex { p } => CoeffRing::LocalAt(p),
            _ => CoeffRing::Integers,
        }
    }

    /// Canonical form of a convex subgroup (FreeLex tails past the rank are `{0}`).
    pub fn normalize_convex(&self, c: Convex) -> Convex {
        match (c, self.universe()) {
            (Convex::Tail(m), Some(k)) if m >= k => Convex::Zero,
            _ => c,
        }
    }

    /// The convex chain is finite only for FreeLex; returns its length.
    pub fn chain_length(&self) -> Option<usize> {
        self.universe()
    }

    /// Partition cell of a coordinate, for the families with sum constraints.
    pub fn cell_of(&self, i: usize) -> Option<usize> {
        match self.spec {
            GroupSpec::PolyMod { .. } => Some(0),
            GroupSpec::PolyPart { .. } if i >= 1 => Some(v2(i)),
            _ => None,
        }
    }

    /// The constraint `(p, n)` on a cell, if any.
    pub fn cell_constraint(&self, cell: usize) -> Option<(u64, u32)> {
        match &self.spec {
            GroupSpec::PolyMod { p, n } if cell == 0 => Some((*p, *n)),
            GroupSpec::PolyPart {
                constraints,
                default,
            } => constraints
                .iter()
                .find(|c| c.cell == cell)
                .map(|c| (c.p, c.n))
                .or(*default),
            _ => None,
        }
    }

    pub fn is_constrained(&self, i: usize) -> bool {
        self.cell_of(i)
            .and_then(|c| self.cell_constraint(c))
            .is_some()
    }

    /// Smallest coordinate of `cell` that is `>= start`.
    pub fn next_in_cell(&self, cell: usize, start: usize) -> usize {
        match self.spec {
            GroupSpec::PolyMod { .. } => start,
            GroupSpec::PolyPart { .. } => {
                let step = 1usize << cell;
                let mut odd = start.div_ceil(step).max(1);
                if odd % 2 == 0 {
                    odd += 1;
                }
                odd * step
            }
            _ => start,
        }
    }

    /// Whether the group has any coefficient-sum constraints.
    pub fn has_cells(&self) -> bool {
        matches!(
            self.spec,
            GroupSpec::PolyMod { .. } | GroupSpec::PolyPart { .. }
        )
    }

    /// Checks that a canonical coordinate map is a member of the group.
    pub fn check_coords<Z: Scalar>(&self, coords: &BTreeMap<usize, Q<Z>>) -> Result<()> {
        let viol = |m: String| Err(OagError::ConstraintViolation(m));
        if let Some(k) = self.universe() {
            if let Some((&i, _)) = coords.iter().next_back() {
                if i >= k {
                    return viol(format!("coordinate {i} outside rank {k}"));
                }
            }
        }
        match self.coeff_ring() {
            CoeffRing::Integers => {
                for (i, c) in coords {
                    if !c.denom().is_one() {
                        return viol(format!("coefficient of index {i} is not an integer"));
                    }
                }
            }
            CoeffRing::LocalAt(p) => {
                for (i, c) in coords {
                    if valuation(&Q::<Z>::from_integer(c.denom().clone()), p).unwrap_or(0) > 0 {
                        return viol(format!("denominator at index {i} is divisible by {p}"));
                    }
                }
            }
        }
        if self.has_cells() {
            let mut sums: BTreeMap<usize, Z> = BTreeMap::new();
            for (i, c) in coords {
                if let Some(cell) = self.cell_of(*i) {
                    let e = sums.entry(cell).or_insert_with(Z::zero);
                    *e = e.clone() + c.numer().clone();
                }
            }
            for (cell, s) in sums {
                if let Some((p, n)) = self.cell_constraint(cell) {
                    let m: Z = prime_power(p, n);
                    if !int_divides(&m, &s) {
                        return viol(match self.spec {
                            GroupSpec::PolyMod { .. } => {
                                format!("{p}^{n} does not divide the coefficient sum {s}")
                            }
                            _ => format!("{p}^{n} does not divide the sum {s} over cell {cell}"),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Coordinate window used to decide questions about elements supported
    /// below `bound` and expressions whose tail levels are below `bound`.
    ///
    /// `extra = 0` gives the minimal window: `[0, bound)` plus, for every
    /// constrained cell that meets `[0, bound)`, its first coordinate at or
    /// past `bound`. Larger `extra` values add more coordinates per cell, more
    /// cells and more unconstrained coordinates; the windows are nested and
    /// exhaust the coordinate set.
    pub fn window(&self, bound: usize, extra: usize) -> Window {
        let bound = bound.max(1);
        let mut coords: Vec<usize> = Vec::new();
        match self.spec {
            GroupSpec::FreeLex { rank } => coords.extend(0..rank),
            GroupSpec::LocalLex { .. } => coords.extend(0..bound + extra),
            GroupSpec::PolyMod { .. } => coords.extend(0..bound + extra + 1),
            GroupSpec::PolyPart { .. } => {
                let base = bound + extra;
                coords.extend(0..base);
                // cells meeting [0, base): min element 2^c < base
                let mut meeting = 0;
                while (1usize << meeting) < base {
                    meeting += 1;
                }
                // cells past the listed constraints all look alike
                let listed_end = match &self.spec {
                    GroupSpec::PolyPart { constraints, .. } => {
                        constraints.iter().map(|c| c.cell + 1).max().unwrap_or(0)
                    }
                    _ => 0,
                };
                let ncells = if extra == 0 {
                    meeting
                } else {
                    meeting.max(listed_end) + extra
                };
                let per_cell = if extra == 0 { 1 } else { (extra + 1).min(3) };
                for c in 0..ncells {
                    if extra == 0 && self.cell_constraint(c).is_none() {
                        continue;
                    }
                    let mut at = base;
                    for _ in 0..per_cell {
                        let m = self.next_in_cell(c, at);
                        coords.push(m);
                        at = m + 1;
                    }
                }
                coords.sort_unstable();
                coords.dedup();
            }
        }
        Window::new(bound, coords)
    }

    /// Generators (as window vectors) of `Tail(m) ∩ span(window)` inside the
    /// group; `Convex::Zero` yields no generators.
    pub fn tail_generators<Z: Scalar>(&self, w: &Window, c: Convex) -> Vec<Vec<Q<Z>>> {
        let m = match self.normalize_convex(c) {
            Convex::Zero => return Vec::new(),
            Convex::Tail(m) => m,
        };
        let dim = w.dim();
        let unit = |i: usize| {
            let mut v = vec![Q::<Z>::zero(); dim];
            v[i] = Q::one();
            v
        };
        let mut gens = Vec::new();
        // coordinates of constrained cells, grouped
        let mut cells: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (pos, &i) in w.coords.iter().enumerate() {
            if i < m {
                continue;
            }
            match self
                .cell_of(i)
                .filter(|&c| self.cell_constraint(c).is_some())
            {
                Some(cell) => cells.entry(cell).or_default().push(pos),
                None => gens.push(unit(pos)),
            }
        }
        for (cell, positions) in cells {
            let (p, n) = self.cell_constraint(cell).unwrap();
            let rep = *positions.last().unwrap();
            for &pos in &positions {
                if pos != rep {
                    let mut v = unit(pos);
                    v[rep] = -Q::<Z>::one();
                    gens.push(v);
                }
            }
            let mut v = vec![Q::<Z>::zero(); dim];
            v[rep] = qint(prime_power(p, n));
            gens.push(v);
        }
        gens
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.spec.fmt(f)
    }
}

/// A finite set of coordinates, with positions for vector embedding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Window {
    bound: usize,
    coords: Vec<usize>,
    index: HashMap<usize, usize>,
}

impl Window {
    fn new(bound: usize, coords: Vec<usize>) -> Self {
        let index = coords.iter().enumerate().map(|(p, &i)| (i, p)).collect();
        Window {
            bound,
            coords,
            index,
        }
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[usize] {
        &self.coords
    }

    pub fn position(&self, coord: usize) -> Option<usize> {
        self.index.get(&coord).copied()
    }

    pub fn contains_support<'a>(&self, mut support: impl Iterator<Item = &'a usize>) -> bool {
        support.all(|i| self.index.contains_key(i))
    }
}
