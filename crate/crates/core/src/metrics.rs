//! Indices, `F_p`-dimensions and witness streams for pairs of subgroups.
//!
//! Every measurement runs on the growing coordinate windows of
//! [`Group::window`]. On a window `W` the subgroups become finitely generated
//! modules `A_W ⊇ B_W` (see [`WindowEval`]), and `A_W ∩ B = B_W`, so
//! `A_W / B_W` embeds into `A / B` and into `A_W' / B_W'` for larger windows.
//! The window index is read off the Hermite forms; an infinite window index
//! (rank drop) is certified at once. A finite value is accepted once three
//! consecutive windows agree: past the tail range the constraints are
//! coordinatewise divisibilities and cell sums, invariant under
//! cell-preserving permutations of fresh coordinates, so fresh coordinates
//! that add no classes never will. Growth past the cap is reported as
//! `AtLeast(cap)` together with that many pairwise inequivalent elements.

use std::collections::{HashSet, VecDeque};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::element::Element;
use crate::error::{OagError, Result};
use crate::group::{Group, GroupHandle};
use crate::lattice::Lattice;
use crate::scalar::{qint, Scalar, Q};
use crate::subgroup::{coset_eq, member, SubgroupExpr, WindowEval};

/// Default cap for index and dimension searches.
pub const DEFAULT_CAP: u64 = 32;

/// Windows larger than this stop the search.
const WINDOW_GUARD: usize = 200;

/// An index or dimension: exact, or a certified lower bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum IndexValue {
    Finite { value: u64 },
    AtLeast { bound: u64 },
}

impl IndexValue {
    pub fn finite(value: u64) -> Self {
        IndexValue::Finite { value }
    }

    pub fn at_least(bound: u64) -> Self {
        IndexValue::AtLeast { bound }
    }

    pub fn value(&self) -> Option<u64> {
        match self {
            IndexValue::Finite { value } => Some(*value),
            IndexValue::AtLeast { .. } => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, IndexValue::Finite { .. })
    }

    /// Product under the Finite/AtLeast semantics: finite factors multiply,
    /// and any `AtLeast` factor makes the product `AtLeast(cap)`.
    pub fn product(values: &[IndexValue], cap: u64) -> IndexValue {
        let mut acc: u64 = 1;
        for v in values {
            match v {
                IndexValue::Finite { value } => match acc.checked_mul(*value) {
                    Some(x) => acc = x,
                    None => return IndexValue::at_least(cap),
                },
                IndexValue::AtLeast { .. } => return IndexValue::at_least(cap),
            }
        }
        IndexValue::finite(acc)
    }
}

impl std::fmt::Display for IndexValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IndexValue::Finite { value } => write!(f, "Finite({value})"),
            IndexValue::AtLeast { bound } => write!(f, "AtLeast({bound})"),
        }
    }
}

/// A coset `rep + subgroup`.
#[derive(Clone, Debug)]
pub struct Coset<Z: Scalar = num_bigint::BigInt> {
    pub subgroup: SubgroupExpr,
    pub rep: Element<Z>,
}

impl<Z: Scalar> Coset<Z> {
    pub fn new(subgroup: SubgroupExpr, rep: Element<Z>) -> Self {
        Coset { subgroup, rep }
    }

    /// Same subgroup and representatives differing by a member.
    pub fn equals(&self, other: &Coset<Z>) -> Result<bool> {
        if self.subgroup != other.subgroup {
            return Ok(false);
        }
        coset_eq(&self.subgroup, &self.rep, &other.rep)
    }

    pub fn contains(&self, x: &Element<Z>) -> Result<bool> {
        coset_eq(&self.subgroup, x, &self.rep)
    }
}

/// The pair `A_W ⊇ B_W` on one window.
struct WindowPair<Z: Scalar> {
    window: crate::group::Window,
    a: Lattice<Z>,
    b: Lattice<Z>,
}

fn window_pair<Z: Scalar>(
    group: &Group,
    a: &SubgroupExpr,
    b: &SubgroupExpr,
    extra: usize,
) -> WindowPair<Z> {
    let bound = a.level_bound().max(b.level_bound()).max(1);
    let window = group.window(bound, extra);
    let ev = WindowEval::<Z>::new(group, window.clone());
    WindowPair {
        a: ev.module(a),
        b: ev.module(b),
        window,
    }
}

fn check_nested<Z: Scalar>(group: &GroupHandle, pair: &WindowPair<Z>) -> Result<()> {
    if let Some(row) = pair.a.first_missing(&pair.b) {
        let x = Element::from_window(group, &pair.window, row);
        return Err(OagError::NotNested(format!(
            "{x} lies in the smaller subgroup but not in the larger"
        )));
    }
    Ok(())
}

/// `[A_W : B_W]` from the Hermite forms; `None` when infinite.
fn window_index<Z: Scalar>(pair: &WindowPair<Z>) -> Option<u64> {
    if pair.a.rank() != pair.b.rank() {
        return None;
    }
    // equal ranks and B_W ⊆ A_W: same rational span, same pivot columns
    let mut ratio = Q::<Z>::one();
    for ((ra, rb), &col) in pair.a.rows().iter().zip(pair.b.rows()).zip(pair.b.pivots()) {
        ratio = ratio * (&rb[col] / &ra[col]).abs();
    }
    debug_assert!(ratio.is_integer());
    ratio.to_integer().to_u64()
}

/// Breadth-first closure of `{0}` under the generators of `A_W` (both
/// signs), modulo `B_W`, stopping at `limit` classes.
fn transversal_on<Z: Scalar>(pair: &WindowPair<Z>, limit: usize) -> Vec<Vec<Q<Z>>> {
    let dim = pair.window.dim();
    let mut gens: Vec<Vec<Q<Z>>> = Vec::new();
    for r in pair.a.rows() {
        gens.push(r.clone());
        gens.push(r.iter().map(|c| -c).collect());
    }
    let zero = vec![Q::<Z>::zero(); dim];
    let mut seen: HashSet<Vec<Q<Z>>> = HashSet::new();
    let mut reps = Vec::new();
    let mut queue = VecDeque::new();
    seen.insert(pair.b.reduce(&zero));
    reps.push(zero.clone());
    queue.push_back(zero);
    while let Some(cur) = queue.pop_front() {
        for g in &gens {
            if reps.len() >= limit {
                return reps;
            }
            let next: Vec<Q<Z>> = cur.iter().zip(g).map(|(x, y)| x + y).collect();
            let key = pair.b.reduce(&next);
            if seen.insert(key) {
                reps.push(next.clone());
                queue.push_back(next);
            }
        }
    }
    reps
}

/// Shared window loop: `measure` returns the window value (`None` for an
/// infinite one). Stops on three agreeing windows, on growth past `cap`,
/// or on an infinite window value.
fn stabilize<Z: Scalar>(
    group: &GroupHandle,
    a: &SubgroupExpr,
    b: &SubgroupExpr,
    cap: u64,
    measure: &mut dyn FnMut(&WindowPair<Z>) -> Result<Option<u64>>,
) -> Result<(IndexValue, WindowPair<Z>)> {
    a.validate(group)?;
    b.validate(group)?;
    stabilize_with(
        group,
        cap,
        &|extra| window_pair::<Z>(group, a, b, extra),
        measure,
    )
}

fn stabilize_with<Z: Scalar>(
    group: &GroupHandle,
    cap: u64,
    build: &dyn Fn(usize) -> WindowPair<Z>,
    measure: &mut dyn FnMut(&WindowPair<Z>) -> Result<Option<u64>>,
) -> Result<(IndexValue, WindowPair<Z>)> {
    let whole = group.universe().is_some();
    let mut history: Vec<u64> = Vec::new();
    let mut extra = 0;
    loop {
        let pair = build(extra);
        check_nested(group, &pair)?;
        let value = match measure(&pair)? {
            None => return Ok((IndexValue::at_least(cap), pair)),
            Some(v) => v,
        };
        if whole {
            // the window is the whole group
            return Ok((IndexValue::finite(value), pair));
        }
        let growing = history.last().is_some_and(|&last| value > last);
        if growing && value >= cap {
            return Ok((IndexValue::at_least(cap), pair));
        }
        history.push(value);
        let n = history.len();
        if n >= 3 && history[n - 3] == value && history[n - 2] == value {
            return Ok((IndexValue::finite(value), pair));
        }
        if pair.window.dim() > WINDOW_GUARD {
            let best = value.min(cap);
            return Ok((IndexValue::at_least(best), pair));
        }
        extra += 1;
    }
}

/// `[A : B]` for modules given window by window, `B_W ⊆ A_W`, with a
/// transversal of `A/B` (at most `cap` elements). `build(extra)` must return
/// the pair on `group.window(bound, extra)`.
pub(crate) fn windowed_index<Z: Scalar>(
    group: &GroupHandle,
    cap: u64,
    build: &dyn Fn(usize) -> (crate::group::Window, Lattice<Z>, Lattice<Z>),
) -> Result<(IndexValue, Vec<Element<Z>>)> {
    let wrap = |extra| {
        let (window, a, b) = build(extra);
        WindowPair { window, a, b }
    };
    let (value, pair) = stabilize_with::<Z>(group, cap, &wrap, &mut |pair| Ok(window_index(pair)))?;
    Ok((value, transversal_of(group, &pair, value, cap)))
}

fn transversal_of<Z: Scalar>(
    group: &GroupHandle,
    pair: &WindowPair<Z>,
    value: IndexValue,
    cap: u64,
) -> Vec<Element<Z>> {
    let limit = match value {
        IndexValue::Finite { value } => value.min(cap),
        IndexValue::AtLeast { bound } => bound,
    } as usize;
    transversal_on(pair, limit)
        .iter()
        .map(|v| Element::from_window(group, &pair.window, v))
        .collect()
}

/// `[A : B]` for `B ⊆ A`.
pub fn index<Z: Scalar>(
    group: &GroupHandle,
    a: &SubgroupExpr,
    b: &SubgroupExpr,
    cap: u64,
) -> Result<IndexValue> {
    Ok(stabilize::<Z>(group, a, b, cap, &mut |pair| Ok(window_index(pair)))?.0)
}

/// `[A : B]` together with pairwise inequivalent elements of `A`: a full
/// transversal when the index is finite and at most `cap`, otherwise `cap`
/// of them (fewer only when the window guard stopped the search).
pub fn index_with_transversal<Z: Scalar>(
    group: &GroupHandle,
    a: &SubgroupExpr,
    b: &SubgroupExpr,
    cap: u64,
) -> Result<(IndexValue, Vec<Element<Z>>)> {
    let (value, pair) = stabilize::<Z>(group, a, b, cap, &mut |pair| Ok(window_index(pair)))?;
    Ok((value, transversal_of(group, &pair, value, cap)))
}

/// `dim_{F_p} A / B` for an elementary abelian quotient.
pub fn fp_dimension<Z: Scalar>(
    group: &GroupHandle,
    a: &SubgroupExpr,
    b: &SubgroupExpr,
    p: u64,
    cap: u64,
) -> Result<IndexValue> {
    let pq = qint::<Z>(Z::from_prime(p));
    let (value, _) = stabilize::<Z>(group, a, b, cap, &mut |pair| {
        let mut span = pair.b.clone();
        let mut d = 0u64;
        for row in pair.a.rows() {
            let scaled: Vec<Q<Z>> = row.iter().map(|c| c * &pq).collect();
            if !pair.b.contains(&scaled) {
                let x = Element::from_window(group, &pair.window, row);
                return Err(OagError::NotElementaryAbelian(x.to_string()));
            }
            if !span.contains(row) {
                span = span.join(&Lattice::from_generators(
                    span.ring(),
                    span.dim(),
                    vec![row.clone()],
                ));
                d += 1;
            }
        }
        Ok(Some(d))
    })?;
    Ok(value)
}

/// `k` elements of `A`, pairwise inequivalent modulo `B`, each checked by
/// membership on emission. Candidates are the generators of `A` on growing
/// windows in Hermite order; once new windows stop contributing, the
/// breadth-first transversal of the last window fills in.
pub fn witness_stream<Z: Scalar>(
    group: &GroupHandle,
    a: &SubgroupExpr,
    b: &SubgroupExpr,
    k: usize,
) -> Result<Vec<Element<Z>>> {
    a.validate(group)?;
    b.validate(group)?;
    let mut out: Vec<Element<Z>> = Vec::new();
    if k == 0 {
        return Ok(out);
    }
    let offer = |x: Element<Z>, out: &mut Vec<Element<Z>>| -> Result<()> {
        if !member(a, &x)? {
            return Ok(());
        }
        for y in out.iter() {
            if coset_eq(b, &x, y)? {
                return Ok(());
            }
        }
        out.push(x);
        Ok(())
    };
    let mut extra = 0;
    let mut stale = 0;
    let last = loop {
        let pair = window_pair::<Z>(group, a, b, extra);
        let before = out.len();
        for row in pair.a.rows() {
            offer(Element::from_window(group, &pair.window, row), &mut out)?;
            if out.len() == k {
                return Ok(out);
            }
        }
        stale = if out.len() == before { stale + 1 } else { 0 };
        if group.universe().is_some() || stale >= 3 || pair.window.dim() > WINDOW_GUARD {
            break pair;
        }
        extra += 1;
    };
    for v in transversal_on(&last, 2 * k + 1) {
        offer(Element::from_window(group, &last.window, &v), &mut out)?;
        if out.len() == k {
            return Ok(out);
        }
    }
    Err(OagError::StreamExhausted(out.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{make_group, Convex, GroupSpec};
    use num_bigint::BigInt;

    type E = Element<BigInt>;

    fn sharp_shift(p: u64, s: u32, r: u32) -> SubgroupExpr {
        SubgroupExpr::sharp(Convex::Zero, p, s).shift(p, r)
    }

    #[test]
    fn free_lex_indices() {
        let g = make_group(GroupSpec::free_lex(3)).unwrap();
        let full = SubgroupExpr::full();
        assert_eq!(
            index::<BigInt>(&g, &full, &SubgroupExpr::multiples(2, 2), 32).unwrap(),
            IndexValue::finite(64)
        );
        let k = SubgroupExpr::tail(1).shift(2, 1);
        assert_eq!(
            index::<BigInt>(&g, &k, &SubgroupExpr::multiples(2, 1), 32).unwrap(),
            IndexValue::finite(4)
        );
        // G / Tail(1) is Z
        assert_eq!(
            index::<BigInt>(&g, &full, &SubgroupExpr::tail(1), 32).unwrap(),
            IndexValue::at_least(32)
        );
    }

    #[test]
    fn infinite_index_renders_as_lower_bound() {
        let g = make_group(GroupSpec::local_lex(2)).unwrap();
        let (v, reps) = index_with_transversal::<BigInt>(
            &g,
            &SubgroupExpr::full(),
            &SubgroupExpr::multiples(2, 1),
            32,
        )
        .unwrap();
        assert_eq!(v, IndexValue::at_least(32));
        assert_eq!(reps.len(), 32);
        let b = SubgroupExpr::multiples(2, 1);
        for i in 0..reps.len() {
            for j in 0..i {
                assert!(!coset_eq(&b, &reps[i], &reps[j]).unwrap());
            }
        }
    }

    #[test]
    fn not_nested_is_reported() {
        let g = make_group(GroupSpec::free_lex(2)).unwrap();
        let r = index::<BigInt>(
            &g,
            &SubgroupExpr::multiples(2, 1),
            &SubgroupExpr::full(),
            32,
        );
        assert!(matches!(r, Err(OagError::NotNested(_))));
    }

    #[test]
    fn poly_mod_dimensions() {
        let g = make_group(GroupSpec::poly_mod(2, 2)).unwrap();
        let d = |s| {
            fp_dimension::<BigInt>(&g, &sharp_shift(2, s, 1), &sharp_shift(2, s + 1, 1), 2, 32)
                .unwrap()
        };
        assert_eq!(d(2), IndexValue::finite(1));
        assert_eq!(d(1), IndexValue::finite(0));
        assert_eq!(d(3), IndexValue::finite(0));
    }

    #[test]
    fn poly_part_dimension_counts_cells() {
        let g = make_group(GroupSpec::poly_part(&[(2, 2), (2, 2), (3, 1)])).unwrap();
        let d = |p, s| {
            fp_dimension::<BigInt>(&g, &sharp_shift(p, s, 1), &sharp_shift(p, s + 1, 1), p, 32)
                .unwrap()
        };
        assert_eq!(d(2, 2), IndexValue::finite(2));
        assert_eq!(d(2, 1), IndexValue::finite(0));
        assert_eq!(d(3, 1), IndexValue::finite(1));
    }

    #[test]
    fn not_elementary_abelian() {
        let g = make_group(GroupSpec::free_lex(2)).unwrap();
        let r = fp_dimension::<BigInt>(
            &g,
            &SubgroupExpr::full(),
            &SubgroupExpr::multiples(2, 2),
            2,
            32,
        );
        assert!(matches!(r, Err(OagError::NotElementaryAbelian(_))));
    }

    #[test]
    fn witness_streams() {
        let g = make_group(GroupSpec::local_lex(2)).unwrap();
        let w =
            witness_stream::<BigInt>(&g, &SubgroupExpr::full(), &SubgroupExpr::multiples(2, 1), 5)
                .unwrap();
        let names: Vec<String> = w.iter().map(|x| x.to_string()).collect();
        assert_eq!(names, ["e0", "e1", "e2", "e3", "e4"]);
        assert!(witness_stream::<BigInt>(
            &g,
            &SubgroupExpr::full(),
            &SubgroupExpr::multiples(2, 1),
            0
        )
        .unwrap()
        .is_empty());
        let pp = make_group(GroupSpec::poly_part_uniform(2, 2)).unwrap();
        let (a, b) = (sharp_shift(2, 3, 1), sharp_shift(2, 3, 2));
        let w = witness_stream::<BigInt>(&pp, &a, &b, 8).unwrap();
        assert_eq!(w.len(), 8);
        for (i, x) in w.iter().enumerate() {
            assert!(member(&a, x).unwrap());
            for y in &w[..i] {
                assert!(!coset_eq(&b, x, y).unwrap());
            }
        }
        let f = make_group(GroupSpec::free_lex(2)).unwrap();
        let r =
            witness_stream::<BigInt>(&f, &SubgroupExpr::full(), &SubgroupExpr::multiples(2, 1), 5);
        assert_eq!(r.unwrap_err(), OagError::StreamExhausted(4));
    }

    #[test]
    fn coset_examples() {
        let g = make_group(GroupSpec::free_lex(2)).unwrap();
        let two = SubgroupExpr::multiples(2, 1);
        let x = E::from_ints(&g, &[1, 0]).unwrap();
        assert!(Coset::new(two.clone(), x.clone())
            .contains(&E::from_ints(&g, &[3, 2]).unwrap())
            .unwrap());
        assert!(coset_eq(&two, &x, &x).unwrap());
        let l = make_group(GroupSpec::local_lex(2)).unwrap();
        let a = E::parse("1/3*e0", &l).unwrap();
        let b = E::parse("e0", &l).unwrap();
        assert!(coset_eq(&two, &a, &b).unwrap());
    }

    #[test]
    fn serde_shape() {
        assert_eq!(
            serde_json::to_string(&IndexValue::finite(4)).unwrap(),
            r#"{"tag":"finite","value":4}"#
        );
        assert_eq!(
            serde_json::to_string(&IndexValue::at_least(32)).unwrap(),
            r#"{"tag":"at_least","bound":32}"#
        );
    }
}
