//! Symbolic subgroups built from convex tails, and their membership engine.
//!
//! Membership is decided on a finite coordinate window. For an element `x`
//! and an expression `S` whose tail levels are below `b`, take the window
//! `W` from [`Group::window`] with bound `b' = max(b, support(x))`. Folding
//! every coordinate outside `W` onto a same-cell coordinate of `W` (or
//! zeroing it when the cell has none or is unconstrained) is a homomorphism
//! `G -> G ∩ Q^W` that fixes `Q^W`, maps every tail `Tail(j)` with `j < b'`
//! into itself, and preserves coordinatewise divisibility. It therefore maps
//! every expression into itself, so `S ∩ Q^W` is computed by the same
//! recursion on finitely generated modules: sums of windowed modules for
//! joins and shifts, intersections for meets, scaling for scales.
//!
//! Closed forms used for the sharp operator (all families):
//! `Tail(j) + l^s G = {x ∈ G : l^s | x_i for i < j}`, hence
//! `Tail(m)^[l^s] = Tail(m-1) + l^s G` for `m ≥ 1`, `G^[l^s] = G`, and in the
//! infinite families `Zero^[l^s] = {x ∈ G : l^s | x_i for all i}`.

use std::any::{Any, TypeId};
use std::cell::RefCell;
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::rc::Rc;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::element::Element;
use crate::error::{OagError, Result};
use crate::group::{Convex, Group, GroupHandle, GroupSpec, Window};
use crate::lattice::Lattice;
use crate::scalar::{prime_power, qint, Scalar, Q};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SubgroupExpr {
    Conv(Convex),
    /// `D^[p^s]`: intersection of `H + p^s G` over convex `H` strictly above `D`.
    Sharp(Convex, u64, u32),
    /// `S + p^k G`.
    Shift(Box<SubgroupExpr>, u64, u32),
    Meet(Box<SubgroupExpr>, Box<SubgroupExpr>),
    Join(Box<SubgroupExpr>, Box<SubgroupExpr>),
    /// `p^r S`.
    Scale(u64, u32, Box<SubgroupExpr>),
}

use SubgroupExpr::*;

impl SubgroupExpr {
    pub fn tail(m: usize) -> Self {
        Conv(Convex::Tail(m))
    }

    pub fn zero() -> Self {
        Conv(Convex::Zero)
    }

    pub fn full() -> Self {
        Conv(Convex::FULL)
    }

    pub fn conv(c: Convex) -> Self {
        Conv(c)
    }

    pub fn sharp(d: Convex, p: u64, s: u32) -> Self {
        Sharp(d, p, s)
    }

    pub fn shift(self, p: u64, k: u32) -> Self {
        Shift(Box::new(self), p, k)
    }

    pub fn meet(self, other: Self) -> Self {
        Meet(Box::new(self), Box::new(other))
    }

    pub fn join(self, other: Self) -> Self {
        Join(Box::new(self), Box::new(other))
    }

    pub fn scale(self, p: u64, r: u32) -> Self {
        Scale(p, r, Box::new(self))
    }

    /// `p^k G`.
    pub fn multiples(p: u64, k: u32) -> Self {
        Self::zero().shift(p, k)
    }

    /// `D^[p^s] + p^r G`.
    pub fn sharp_shift(d: Convex, p: u64, s: u32, r: u32) -> Self {
        Sharp(d, p, s).shift(p, r)
    }

    /// One past the largest finite tail level mentioned.
    pub fn level_bound(&self) -> usize {
        match self {
            Conv(c) | Sharp(c, _, _) => c.level().map_or(0, |m| m + 1),
            Shift(s, _, _) | Scale(_, _, s) => s.level_bound(),
            Meet(a, b) | Join(a, b) => a.level_bound().max(b.level_bound()),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Conv(_) | Sharp(..) => 0,
            Shift(s, _, _) | Scale(_, _, s) => 1 + s.depth(),
            Meet(a, b) | Join(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Checks tail levels against the group's chain.
    pub fn validate(&self, group: &Group) -> Result<()> {
        match self {
            Conv(c) | Sharp(c, _, _) => match (c, group.universe()) {
                (Convex::Tail(m), Some(k)) if *m > k => Err(OagError::UnknownConvex { level: *m }),
                _ => Ok(()),
            },
            Shift(s, _, _) | Scale(_, _, s) => s.validate(group),
            Meet(a, b) | Join(a, b) => {
                a.validate(group)?;
                b.validate(group)
            }
        }
    }

    /// Structural simplification: chain meets and joins, trivial shifts.
    pub fn simplify(&self, group: &Group) -> SubgroupExpr {
        match self {
            Conv(c) => Conv(group.normalize_convex(*c)),
            Sharp(c, p, s) => {
                let c = group.normalize_convex(*c);
                if *s == 0 || c == Convex::FULL {
                    Self::full()
                } else {
                    Sharp(c, *p, *s)
                }
            }
            Shift(inner, p, k) => {
                let inner = inner.simplify(group);
                if *k == 0 || inner == Self::full() {
                    Self::full()
                } else {
                    inner.shift(*p, *k)
                }
            }
            Scale(p, r, inner) => {
                let inner = inner.simplify(group);
                if *r == 0 || inner == Self::zero() {
                    inner
                } else {
                    inner.scale(*p, *r)
                }
            }
            Meet(a, b) => match (a.simplify(group), b.simplify(group)) {
                (Conv(x), Conv(y)) => Conv(x.smaller(y)),
                (a, b) if a == b => a,
                (a, b) => a.meet(b),
            },
            Join(a, b) => match (a.simplify(group), b.simplify(group)) {
                (Conv(x), Conv(y)) => Conv(x.larger(y)),
                (a, b) if a == b => a,
                (a, b) => a.join(b),
            },
        }
    }
}

impl fmt::Display for SubgroupExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Conv(c) => write!(f, "{c}"),
            Sharp(c, p, s) => write!(f, "sharp({c},{p},{s})"),
            Shift(x, p, k) => write!(f, "shift({x},{p},{k})"),
            Meet(a, b) => write!(f, "meet({a},{b})"),
            Join(a, b) => write!(f, "join({a},{b})"),
            Scale(p, r, x) => write!(f, "scale({p},{r},{x})"),
        }
    }
}

/// Evaluates expressions to modules on one coordinate window.
pub struct WindowEval<'g, Z: Scalar> {
    group: &'g Group,
    window: Window,
    full: Lattice<Z>,
}

impl<'g, Z: Scalar> WindowEval<'g, Z> {
    pub fn new(group: &'g Group, window: Window) -> Self {
        let full = Lattice::from_generators(
            group.coeff_ring(),
            window.dim(),
            group.tail_generators(&window, Convex::FULL),
        );
        WindowEval {
            group,
            window,
            full,
        }
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn full(&self) -> &Lattice<Z> {
        &self.full
    }

    pub fn convex(&self, c: Convex) -> Lattice<Z> {
        Lattice::from_generators(
            self.group.coeff_ring(),
            self.window.dim(),
            self.group.tail_generators(&self.window, c),
        )
    }

    fn power(p: u64, k: u32) -> Q<Z> {
        qint(prime_power(p, k))
    }

    /// `p^k G` on the window.
    pub fn multiples(&self, p: u64, k: u32) -> Lattice<Z> {
        self.full.scale(&Self::power(p, k))
    }

    pub fn module(&self, expr: &SubgroupExpr) -> Lattice<Z> {
        match expr {
            Conv(c) => self.convex(*c),
            Sharp(c, p, s) => {
                if *s == 0 {
                    return self.full.clone();
                }
                match self.group.normalize_convex(*c) {
                    Convex::Tail(0) => self.full.clone(),
                    Convex::Tail(m) => self
                        .convex(Convex::Tail(m - 1))
                        .join(&self.multiples(*p, *s)),
                    Convex::Zero => match self.group.universe() {
                        Some(k) => self
                            .convex(Convex::Tail(k - 1))
                            .join(&self.multiples(*p, *s)),
                        None => {
                            let ring = self.group.coeff_ring();
                            let divisible =
                                Lattice::scaled_full(ring, self.window.dim(), &Self::power(*p, *s));
                            self.full.meet(&divisible)
                        }
                    },
                }
            }
            Shift(inner, p, k) => {
                if *k == 0 {
                    return self.full.clone();
                }
                self.module(inner).join(&self.multiples(*p, *k))
            }
            Meet(a, b) => self.module(a).meet(&self.module(b)),
            Join(a, b) => self.module(a).join(&self.module(b)),
            Scale(p, r, inner) => self.module(inner).scale(&Self::power(*p, *r)),
        }
    }
}

fn membership_window(group: &Group, expr: &SubgroupExpr, support_end: usize) -> Window {
    group.window(expr.level_bound().max(support_end).max(1), 0)
}

/// Decides `x ∈ S`.
pub fn member<Z: Scalar>(expr: &SubgroupExpr, x: &Element<Z>) -> Result<bool> {
    let group = x.group();
    expr.validate(group)?;
    if x.is_zero() {
        return Ok(true);
    }
    let w = membership_window(group, expr, x.support_end());
    let v = x.to_window(&w).expect("window covers the support");
    Ok(cached_module::<Z>(group, expr, &w).contains(&v))
}

type ModuleKey = (TypeId, GroupSpec, SubgroupExpr, usize, Vec<usize>);

thread_local! {
    static MODULES: RefCell<HashMap<ModuleKey, Rc<dyn Any>>> = RefCell::new(HashMap::new());
}

/// Entries kept per thread before the module cache is flushed.
const MODULE_CACHE_LIMIT: usize = 4096;

/// `WindowEval::new(group, w).module(expr)`, memoized per thread.
pub(crate) fn cached_module<Z: Scalar>(
    group: &Group,
    expr: &SubgroupExpr,
    w: &Window,
) -> Rc<Lattice<Z>> {
    let key = (
        TypeId::of::<Z>(),
        group.spec().clone(),
        expr.clone(),
        w.bound(),
        w.coords().to_vec(),
    );
    if let Some(hit) = MODULES.with(|m| m.borrow().get(&key).cloned()) {
        return hit.downcast::<Lattice<Z>>().expect("keyed by scalar type");
    }
    let lat = Rc::new(WindowEval::<Z>::new(group, w.clone()).module(expr));
    MODULES.with(|m| {
        let mut m = m.borrow_mut();
        if m.len() >= MODULE_CACHE_LIMIT {
            m.clear();
        }
        m.insert(key, lat.clone());
    });
    lat
}

/// `x - y ∈ S`.
pub fn coset_eq<Z: Scalar>(expr: &SubgroupExpr, x: &Element<Z>, y: &Element<Z>) -> Result<bool> {
    member(expr, &x.sub(y)?)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubgroupEquality<Z: Scalar = num_bigint::BigInt> {
    EqualByNormalForm,
    /// An element of one side that is not in the other.
    NotEqual(Element<Z>),
    UndecidedAfterSampling,
}

/// Windows beyond this many coordinates fall back to sampling.
const EQ_WINDOW_GUARD: usize = 160;

/// Compares two expressions.
///
/// Both sides are evaluated to normal forms (Hermite forms of the windowed
/// modules) on a minimal window and on two enlarged windows that contain
/// at least two fresh coordinates of every cell meeting the tail range, of
/// every explicitly constrained cell and of one generic cell. Every
/// constraint involved is either a coordinatewise divisibility or a
/// cell sum, so cell-preserving permutations of the coordinates past the
/// tail range fix both sides; agreement on these windows therefore gives
/// agreement everywhere. A disagreement yields a witness element.
pub fn subgroup_eq<Z: Scalar>(
    group: &GroupHandle,
    a: &SubgroupExpr,
    b: &SubgroupExpr,
    samples: usize,
    seed: u64,
) -> Result<SubgroupEquality<Z>> {
    a.validate(group)?;
    b.validate(group)?;
    if a.simplify(group) == b.simplify(group) {
        return Ok(SubgroupEquality::EqualByNormalForm);
    }
    let bound = a.level_bound().max(b.level_bound()).max(1);
    for extra in 0..=2 {
        let w = group.window(bound, extra);
        if w.dim() > EQ_WINDOW_GUARD {
            return Ok(sample_compare(group, a, b, bound, samples, seed));
        }
        let ev = WindowEval::<Z>::new(group, w);
        let (la, lb) = (ev.module(a), ev.module(b));
        if la != lb {
            let row = lb
                .first_missing(&la)
                .or_else(|| la.first_missing(&lb))
                .expect("modules differ");
            return Ok(SubgroupEquality::NotEqual(Element::from_window(
                group,
                ev.window(),
                row,
            )));
        }
    }
    Ok(SubgroupEquality::EqualByNormalForm)
}

fn sample_compare<Z: Scalar>(
    group: &GroupHandle,
    a: &SubgroupExpr,
    b: &SubgroupExpr,
    bound: usize,
    samples: usize,
    seed: u64,
) -> SubgroupEquality<Z> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let x = Element::<Z>::random_with(group, bound + 2, 8, &mut rng);
        if member(a, &x).ok() != member(b, &x).ok() {
            return SubgroupEquality::NotEqual(x);
        }
    }
    SubgroupEquality::UndecidedAfterSampling
}

/// `H_{n,g}`, `H'_{n,g}` and `H'^+_{n,g}` for an element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpineTriple {
    pub s_point: Convex,
    pub t_point: Convex,
    pub t_plus_point: Convex,
    /// No spine member contains `g`, so `t_plus_point` is the whole group by
    /// convention.
    pub t_plus_empty: bool,
}

/// `g ∈ Tail(m) + nG` for an arbitrary modulus `n`.
fn in_tail_plus_multiple<Z: Scalar>(g: &Element<Z>, m: usize, n: u64) -> bool {
    let group = g.group();
    let w = group.window(g.support_end().max(m + 1), 0);
    let ev = WindowEval::<Z>::new(group, w);
    let lat = ev
        .convex(Convex::Tail(m))
        .join(&ev.full().scale(&qint(Z::from_prime(n))));
    lat.contains(&g.to_window(ev.window()).unwrap())
}

/// The largest convex subgroup `H` with `g ∉ H + nG`; `{0}` if none.
pub fn spine_point<Z: Scalar>(n: u64, g: &Element<Z>) -> Convex {
    let group = g.group();
    for m in 1..=g.support_end() {
        if !in_tail_plus_multiple(g, m, n) {
            return group.normalize_convex(Convex::Tail(m));
        }
    }
    Convex::Zero
}

/// `e_i`, repaired with a later coordinate of its cell when constrained.
pub(crate) fn unit_probe<Z: Scalar>(group: &GroupHandle, i: usize) -> Element<Z> {
    let mut pairs = vec![(i, Q::<Z>::one())];
    if let Some(cell) = group
        .cell_of(i)
        .filter(|&c| group.cell_constraint(c).is_some())
    {
        pairs.push((group.next_in_cell(cell, i + 1), -Q::<Z>::one()));
    }
    Element::from_coords(group, pairs).expect("probe is a group member")
}

/// Whether `Tail(j)` (`j ≥ 1`) belongs to the spine `S_n`.
pub fn spine_level_realized<Z: Scalar>(group: &GroupHandle, n: u64, j: usize) -> bool {
    if j == 0 || group.universe().is_some_and(|k| j > k) {
        return false;
    }
    let probe = unit_probe::<Z>(group, j - 1);
    spine_point(n, &probe) == group.normalize_convex(Convex::Tail(j))
}

/// Spine data of `g` for modulus `n`. Spine members are the realized
/// tails together with `{0}`.
pub fn spine_maps<Z: Scalar>(n: u64, g: &Element<Z>) -> SpineTriple {
    let group = g.group();
    let s_point = spine_point(n, g);
    let Some(f) = g.leading_index() else {
        return SpineTriple {
            s_point,
            t_point: Convex::Zero,
            t_plus_point: Convex::Zero,
            t_plus_empty: false,
        };
    };
    // members not containing g: Tail(j) with j > f, and {0}
    let limit = group.universe().unwrap_or(f + 4);
    let t_point = (f + 1..=limit)
        .find(|&j| spine_level_realized::<Z>(group, n, j))
        .map_or(Convex::Zero, |j| group.normalize_convex(Convex::Tail(j)));
    // members containing g: Tail(j) with 1 <= j <= f
    let above = (1..=f)
        .rev()
        .find(|&j| spine_level_realized::<Z>(group, n, j));
    SpineTriple {
        s_point,
        t_point,
        t_plus_point: above.map_or(Convex::FULL, Convex::Tail),
        t_plus_empty: above.is_none(),
    }
}

/// Outcome of trying to write `α^[p^s]` as `D + p^s G` with `D` convex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvexifyReport<Z: Scalar = num_bigint::BigInt> {
    pub convex: Option<Convex>,
    /// For every spine member `γ > α`, the classes `β + p^s G` with
    /// `γ > β > α` in the spine are unbounded (probed over a finite range).
    pub unbounded_between: bool,
    /// `α` is the intersection of the spine members above it.
    pub meet_from_above: bool,
    /// Some `a` has spine point `α` and lies outside `α + p^s G`.
    pub attained: Option<Element<Z>>,
}

impl<Z: Scalar> ConvexifyReport<Z> {
    pub fn all_conditions(&self) -> bool {
        self.unbounded_between && self.meet_from_above && self.attained.is_some()
    }
}

/// Probe depth for unboundedness of spine classes.
const CLASS_PROBE: usize = 6;

fn shift_eq<Z: Scalar>(group: &GroupHandle, a: &SubgroupExpr, b: &SubgroupExpr) -> bool {
    matches!(
        subgroup_eq::<Z>(group, a, b, 0, 0),
        Ok(SubgroupEquality::EqualByNormalForm)
    )
}

pub fn convexify_sharp<Z: Scalar>(
    group: &GroupHandle,
    alpha: Convex,
    p: u64,
    s: u32,
) -> ConvexifyReport<Z> {
    let alpha = group.normalize_convex(alpha);
    let target = SubgroupExpr::Sharp(alpha, p, s);
    let ps = p.pow(s);
    let top = match (alpha, group.universe()) {
        (_, Some(k)) => k,
        (Convex::Tail(m), None) => m + 2,
        (Convex::Zero, None) => 3,
    };
    let mut candidates: Vec<Convex> = vec![Convex::Zero];
    candidates.extend(
        (0..=top)
            .rev()
            .map(|j| group.normalize_convex(Convex::Tail(j))),
    );
    let mut seen = HashSet::new();
    candidates.retain(|c| seen.insert(*c));
    let convex = candidates
        .into_iter()
        .find(|d| shift_eq::<Z>(group, &SubgroupExpr::conv(*d).shift(p, s), &target));

    let realized = |j: usize| spine_level_realized::<Z>(group, p, j);
    // spine members strictly above alpha (levels only; G is never a member)
    let above: Vec<usize> = match alpha {
        Convex::Tail(m) => (1..m).filter(|&j| realized(j)).collect(),
        Convex::Zero => match group.universe() {
            Some(k) => (1..k).filter(|&j| realized(j)).collect(),
            None => (1..=CLASS_PROBE).filter(|&j| realized(j)).collect(),
        },
    };
    let infinite_below = alpha == Convex::Zero && group.universe().is_none();

    let meet_from_above = match alpha {
        Convex::Tail(0) => true,
        Convex::Tail(_) => false,
        Convex::Zero => infinite_below && !above.is_empty(),
    };

    let unbounded_between = if above.is_empty() {
        true
    } else if infinite_below {
        above.iter().take(3).all(|&gamma| {
            let levels: Vec<usize> = (gamma + 1..gamma + 1 + 4 * CLASS_PROBE)
                .filter(|&j| realized(j))
                .take(CLASS_PROBE)
                .collect();
            let mut distinct: Vec<SubgroupExpr> = Vec::new();
            for j in levels {
                let e = SubgroupExpr::tail(j).shift(p, s);
                if !distinct.iter().any(|d| shift_eq::<Z>(group, d, &e)) {
                    distinct.push(e);
                }
            }
            distinct.len() >= CLASS_PROBE
        })
    } else {
        false
    };

    let attained = attain_candidates::<Z>(group, alpha, p, s)
        .into_iter()
        .find(|a| {
            spine_point(ps, a) == alpha
                && !member(&SubgroupExpr::conv(alpha).shift(p, s), a).unwrap_or(true)
        });

    ConvexifyReport {
        convex,
        unbounded_between,
        meet_from_above,
        attained,
    }
}

fn attain_candidates<Z: Scalar>(
    group: &GroupHandle,
    alpha: Convex,
    p: u64,
    s: u32,
) -> Vec<Element<Z>> {
    let mut out = Vec::new();
    match alpha {
        Convex::Tail(0) => {}
        Convex::Tail(m) => out.push(unit_probe(group, m - 1)),
        Convex::Zero => {
            if let Some(k) = group.universe() {
                out.push(unit_probe(group, k - 1));
            }
            for cell in 0..8 {
                if let Some((q, n)) = group.cell_constraint(cell) {
                    if q == p {
                        let e = n.max(s);
                        let i = group.next_in_cell(cell, 0);
                        let c = qint::<Z>(prime_power(p, e));
                        if let Ok(a) = Element::from_coords(group, [(i, c)]) {
                            out.push(a);
                        }
                    }
                }
                if !matches!(group.spec(), crate::group::GroupSpec::PolyPart { .. }) {
                    break;
                }
            }
        }
    }
    out
}

/// Random expression of at most the given depth, for test-input generation.
/// Primes are drawn from `primes`, exponents from `1..=3`, tail levels from
/// `0..=max_level` or `{0}`.
pub fn random_expr<R: Rng>(
    group: &Group,
    depth: usize,
    primes: &[u64],
    max_level: usize,
    rng: &mut R,
) -> SubgroupExpr {
    let conv = |rng: &mut R| {
        let top = group.universe().map_or(max_level, |k| k.min(max_level));
        if rng.gen_bool(0.25) {
            Convex::Zero
        } else {
            group.normalize_convex(Convex::Tail(rng.gen_range(0..=top)))
        }
    };
    let prime = |rng: &mut R| primes[rng.gen_range(0..primes.len())];
    let leaf_or_node = if depth == 0 {
        rng.gen_range(0..2)
    } else {
        rng.gen_range(0..7)
    };
    match leaf_or_node {
        0 => Conv(conv(rng)),
        1 => Sharp(conv(rng), prime(rng), rng.gen_range(1..=3)),
        2 | 3 => random_expr(group, depth - 1, primes, max_level, rng)
            .shift(prime(rng), rng.gen_range(1..=2)),
        4 => random_expr(group, depth - 1, primes, max_level, rng).meet(random_expr(
            group,
            depth - 1,
            primes,
            max_level,
            rng,
        )),
        5 => random_expr(group, depth - 1, primes, max_level, rng).join(random_expr(
            group,
            depth - 1,
            primes,
            max_level,
            rng,
        )),
        _ => random_expr(group, depth - 1, primes, max_level, rng).scale(prime(rng), 1),
    }
}

/// Random member of `expr` supported below `support_bound`: a small
/// combination of the windowed module's basis.
pub fn random_member<Z: Scalar, R: Rng>(
    group: &GroupHandle,
    expr: &SubgroupExpr,
    support_bound: usize,
    rng: &mut R,
) -> Element<Z> {
    let w = group.window(support_bound.max(1), 0);
    let ev = WindowEval::<Z>::new(group, w);
    let lat = ev.module(expr);
    let mut v = vec![Q::<Z>::zero(); ev.window().dim()];
    for row in lat.rows() {
        let c: i64 = rng.gen_range(-1..=1);
        if c != 0 {
            let c = qint::<Z>(crate::scalar::int(c));
            for (t, r) in v.iter_mut().zip(row) {
                *t = &*t + &c * r;
            }
        }
    }
    Element::from_window(group, ev.window(), &v)
}
