//! Projected linear functions `f^H`, their intersections and piecewise
//! combinations, plus the two executable counterexamples.
//!
//! `f^H(x̄)` is the set of cosets `y + H` with
//! `s·y ≡ Σ r_i x_i + g + k·1_D (mod H)`, where `D` is the convex part of
//! `H` and `1_D` the smallest positive element of `G/D` (0 when `G/D` is
//! dense). The solution set is `y_0 + (H : s)` for one solution `y_0`, so it
//! has `[(H : s) : H]` cosets.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::element::Element;
use crate::error::{OagError, Result};
use crate::group::{Convex, GroupHandle, GroupSpec, Window};
use crate::lattice::{CoeffRing, Lattice};
use crate::metrics::{index_with_transversal, windowed_index, Coset, IndexValue};
use crate::parse::{parse_group, parse_subgroup_expr};
use crate::scalar::{int, qint, valuation, Scalar, Q};
use crate::subgroup::{coset_eq, member, unit_probe, SubgroupExpr, WindowEval};

/// Cap on the solution cosets of a single leaf inside piecewise evaluation.
pub const LEAF_CAP: u64 = 1024;

/// `x̄ ↦ (1/s)(Σ r_i x_i + g + k)`, with `k` read as `k·1_D` once projected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearFn<Z: Scalar = BigInt> {
    pub coeffs: Vec<i64>,
    pub divisor: i64,
    pub offset: Element<Z>,
    pub shift: i64,
}

impl<Z: Scalar> LinearFn<Z> {
    pub fn new(coeffs: Vec<i64>, divisor: i64, offset: Element<Z>, shift: i64) -> Result<Self> {
        if divisor == 0 {
            return Err(OagError::ConstraintViolation(
                "divisor must be nonzero".into(),
            ));
        }
        Ok(LinearFn {
            coeffs,
            divisor,
            offset,
            shift,
        })
    }

    pub fn arity(&self) -> usize {
        self.coeffs.len()
    }

    pub fn group(&self) -> &GroupHandle {
        self.offset.group()
    }

    /// `Σ r_i x_i + g`.
    fn numerator(&self, xs: &[Element<Z>]) -> Result<Element<Z>> {
        if xs.len() != self.arity() {
            return Err(OagError::Arity {
                expected: self.arity(),
                got: xs.len(),
            });
        }
        let mut acc = self.offset.clone();
        for (r, x) in self.coeffs.iter().zip(xs) {
            acc = acc.add(&x.scalar_mul_i64(*r))?;
        }
        Ok(acc)
    }
}

/// A finite set of cosets of one subgroup.
#[derive(Clone, Debug)]
pub struct CosetSet<Z: Scalar = BigInt> {
    pub subgroup: SubgroupExpr,
    pub reps: Vec<Element<Z>>,
}

impl<Z: Scalar> CosetSet<Z> {
    pub fn empty(subgroup: SubgroupExpr) -> Self {
        CosetSet {
            subgroup,
            reps: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    /// Whether `x` lies in one of the cosets.
    pub fn contains(&self, x: &Element<Z>) -> Result<bool> {
        for r in &self.reps {
            if coset_eq(&self.subgroup, x, r)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    pub fn cosets(&self) -> Vec<Coset<Z>> {
        self.reps
            .iter()
            .map(|r| Coset::new(self.subgroup.clone(), r.clone()))
            .collect()
    }

    /// Same cosets of the same subgroup (compared structurally).
    pub fn same_as(&self, other: &CosetSet<Z>) -> Result<bool> {
        if self.len() != other.len() {
            return Ok(false);
        }
        if self.is_empty() {
            return Ok(true);
        }
        if self.subgroup != other.subgroup {
            return Ok(false);
        }
        for r in &other.reps {
            if !self.contains(r)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn dedup(mut self) -> Result<Self> {
        let mut kept: Vec<Element<Z>> = Vec::new();
        for r in self.reps.drain(..) {
            let mut seen = false;
            for k in &kept {
                if coset_eq(&self.subgroup, &r, k)? {
                    seen = true;
                    break;
                }
            }
            if !seen {
                kept.push(r);
            }
        }
        self.reps = kept;
        Ok(self)
    }
}

/// Convex part `D` of a target `D + p^r G` or `D^[p^s] + p^r G`.
fn admissible_convex(h: &SubgroupExpr) -> Result<Convex> {
    let bad = || OagError::InadmissibleTarget(h.to_string());
    match h {
        SubgroupExpr::Conv(d) | SubgroupExpr::Sharp(d, _, _) => Ok(*d),
        SubgroupExpr::Shift(inner, p, _) => match inner.as_ref() {
            SubgroupExpr::Conv(d) => Ok(*d),
            SubgroupExpr::Sharp(d, q, _) if q == p => Ok(*d),
            _ => Err(bad()),
        },
        _ => Err(bad()),
    }
}

/// A representative of the smallest positive element of `G/D`, if `G/D`
/// is discrete.
pub fn smallest_positive<Z: Scalar>(group: &GroupHandle, d: Convex) -> Option<Element<Z>> {
    if group.coeff_ring() != CoeffRing::Integers {
        return None;
    }
    let m = match (group.normalize_convex(d), group.universe()) {
        (Convex::Tail(m), _) => m,
        (Convex::Zero, Some(k)) => k,
        (Convex::Zero, None) => return None,
    };
    (m >= 1).then(|| unit_probe(group, m - 1))
}

/// `f^H`.
#[derive(Clone, Debug)]
pub struct ProjectedLinearFn<Z: Scalar = BigInt> {
    pub base: LinearFn<Z>,
    pub target: SubgroupExpr,
    /// `k·1_D`.
    pub bound_shift: Element<Z>,
    kernel: Arc<OnceLock<Result<(IndexValue, Vec<Element<Z>>)>>>,
}

pub fn project<Z: Scalar>(f: LinearFn<Z>, h: SubgroupExpr) -> Result<ProjectedLinearFn<Z>> {
    let group = f.group().clone();
    h.validate(&group)?;
    let d = admissible_convex(&h)?;
    let bound_shift = match smallest_positive::<Z>(&group, d) {
        Some(u) if f.shift != 0 => u.scalar_mul_i64(f.shift),
        _ => Element::zero(&group),
    };
    Ok(ProjectedLinearFn {
        base: f,
        target: h,
        bound_shift,
        kernel: Arc::new(OnceLock::new()),
    })
}

fn to_q<Z: Scalar>(v: i64) -> Q<Z> {
    qint(int::<Z>(v))
}

/// Finds `w` with `Σ q_i (u_i, w_i) = (v, w)` for some coefficients, where
/// `pairs` lists the `(u_i, w_i)`.
fn preimage<Z: Scalar>(
    ring: CoeffRing,
    dim: usize,
    pairs: Vec<(Vec<Q<Z>>, Vec<Q<Z>>)>,
    v: &[Q<Z>],
) -> Option<Vec<Q<Z>>> {
    let rows = pairs
        .into_iter()
        .map(|(u, w)| u.into_iter().chain(w).collect())
        .collect();
    let lat = Lattice::from_generators(ring, 2 * dim, rows);
    let mut t = v.to_vec();
    t.extend(std::iter::repeat_with(Q::<Z>::zero).take(dim));
    let r = lat.reduce(&t);
    if r[..dim].iter().any(|x| !x.is_zero()) {
        return None;
    }
    Some(r[dim..].iter().map(|x| -x).collect())
}

fn window_for<Z: Scalar>(
    group: &GroupHandle,
    exprs: &[&SubgroupExpr],
    elems: &[&Element<Z>],
) -> Window {
    let bound = exprs
        .iter()
        .map(|e| e.level_bound())
        .chain(elems.iter().map(|x| x.support_end()))
        .max()
        .unwrap_or(1)
        .max(1);
    group.window(bound, 0)
}

/// Some `y ∈ G` with `s·y - c ∈ H`.
fn solve_scaled<Z: Scalar>(
    group: &GroupHandle,
    h: &SubgroupExpr,
    s: i64,
    c: &Element<Z>,
) -> Option<Element<Z>> {
    let w = window_for(group, &[h], &[c]);
    let ev = WindowEval::<Z>::new(group, w.clone());
    let hl = ev.module(h);
    let sq = to_q::<Z>(s);
    let dim = w.dim();
    let zero = vec![Q::<Z>::zero(); dim];
    let mut pairs: Vec<(Vec<Q<Z>>, Vec<Q<Z>>)> = ev
        .full()
        .rows()
        .iter()
        .map(|f| (f.iter().map(|x| x * &sq).collect(), f.clone()))
        .collect();
    pairs.extend(hl.rows().iter().map(|r| (r.clone(), zero.clone())));
    let v = c.to_window(&w).expect("window covers the support");
    preimage(group.coeff_ring(), dim, pairs, &v).map(|y| Element::from_window(group, &w, &y))
}

/// Some element of `(a + A) ∩ (b + B)`.
pub fn coset_meet<Z: Scalar>(
    a: &Element<Z>,
    sa: &SubgroupExpr,
    b: &Element<Z>,
    sb: &SubgroupExpr,
) -> Result<Option<Element<Z>>> {
    let group = a.group().clone();
    let d = a.sub(b)?;
    let w = window_for(&group, &[sa, sb], &[&d]);
    let ev = WindowEval::<Z>::new(&group, w.clone());
    let dim = w.dim();
    let zero = vec![Q::<Z>::zero(); dim];
    let mut pairs: Vec<(Vec<Q<Z>>, Vec<Q<Z>>)> = ev
        .module(sa)
        .rows()
        .iter()
        .map(|u| (u.clone(), u.clone()))
        .collect();
    pairs.extend(
        ev.module(sb)
            .rows()
            .iter()
            .map(|r| (r.clone(), zero.clone())),
    );
    let v = d.to_window(&w).expect("window covers the support");
    // d = u + w with u ∈ A, w ∈ B; then a - u lies in both cosets
    Ok(preimage(group.coeff_ring(), dim, pairs, &v)
        .map(|u| a.sub(&Element::from_window(&group, &w, &u)).unwrap()))
}

impl<Z: Scalar> ProjectedLinearFn<Z> {
    pub fn arity(&self) -> usize {
        self.base.arity()
    }

    pub fn group(&self) -> &GroupHandle {
        self.base.group()
    }

    /// `[(H : s) : H]` with a transversal, computed once at `LEAF_CAP`.
    fn kernel(&self) -> Result<(IndexValue, Vec<Element<Z>>)> {
        self.kernel
            .get_or_init(|| {
                let group = self.group().clone();
                let h = self.target.clone();
                let s = to_q::<Z>(self.base.divisor);
                let bound = h.level_bound().max(1);
                windowed_index::<Z>(&group, LEAF_CAP, &|extra| {
                    let w = group.window(bound, extra);
                    let ev = WindowEval::<Z>::new(&group, w.clone());
                    let hl = ev.module(&h);
                    let colon = hl.colon(ev.full(), &s);
                    (w, colon, hl)
                })
            })
            .clone()
    }
}

/// All solution cosets of `f^H` at `x̄`, failing when there are more than
/// `cap`.
pub fn eval_projected<Z: Scalar>(
    pf: &ProjectedLinearFn<Z>,
    xs: &[Element<Z>],
    cap: u64,
) -> Result<CosetSet<Z>> {
    let c = pf.base.numerator(xs)?.add(&pf.bound_shift)?;
    let group = pf.group();
    let Some(y0) = solve_scaled(group, &pf.target, pf.base.divisor, &c) else {
        return Ok(CosetSet::empty(pf.target.clone()));
    };
    let (value, transversal) = if cap <= LEAF_CAP {
        pf.kernel()?
    } else {
        let s = to_q::<Z>(pf.base.divisor);
        let bound = pf.target.level_bound().max(1);
        windowed_index::<Z>(group, cap, &|extra| {
            let w = group.window(bound, extra);
            let ev = WindowEval::<Z>::new(group, w.clone());
            let hl = ev.module(&pf.target);
            (w, hl.colon(ev.full(), &s), hl)
        })?
    };
    match value {
        IndexValue::Finite { value } if value <= cap => {
            let reps = transversal
                .iter()
                .map(|t| y0.add(t))
                .collect::<Result<Vec<_>>>()?;
            Ok(CosetSet {
                subgroup: pf.target.clone(),
                reps,
            })
        }
        _ => Err(OagError::CapExceeded(cap as usize)),
    }
}

/// `h = f ∩ g`: `h(x̄) = y + (H ∩ K)` iff `f(x̄) ∋ y + H` and `g(x̄) ∋ y + K`.
#[derive(Clone, Debug)]
pub struct IntersectedFn<Z: Scalar = BigInt> {
    pub left: ProjectedLinearFn<Z>,
    pub right: ProjectedLinearFn<Z>,
}

pub fn intersect<Z: Scalar>(
    f: ProjectedLinearFn<Z>,
    g: ProjectedLinearFn<Z>,
) -> Result<IntersectedFn<Z>> {
    if f.group() != g.group() {
        return Err(OagError::GroupMismatch);
    }
    if f.arity() != g.arity() {
        return Err(OagError::Arity {
            expected: f.arity(),
            got: g.arity(),
        });
    }
    Ok(IntersectedFn { left: f, right: g })
}

impl<Z: Scalar> IntersectedFn<Z> {
    pub fn eval(&self, xs: &[Element<Z>], cap: u64) -> Result<CosetSet<Z>> {
        let a = eval_projected(&self.left, xs, cap)?;
        let b = eval_projected(&self.right, xs, cap)?;
        meet_sets(self.left.group(), &a, &b)
    }
}

fn meet_sets<Z: Scalar>(
    group: &GroupHandle,
    a: &CosetSet<Z>,
    b: &CosetSet<Z>,
) -> Result<CosetSet<Z>> {
    let subgroup = if a.subgroup == b.subgroup {
        a.subgroup.clone()
    } else {
        a.subgroup.clone().meet(b.subgroup.clone()).simplify(group)
    };
    let mut reps = Vec::new();
    for x in &a.reps {
        for y in &b.reps {
            if let Some(z) = coset_meet(x, &a.subgroup, y, &b.subgroup)? {
                reps.push(z);
            }
        }
    }
    CosetSet { subgroup, reps }.dedup()
}

type RefineCache<Z> = Mutex<HashMap<(SubgroupExpr, SubgroupExpr), (IndexValue, Vec<Element<Z>>)>>;

/// Evaluation context: refinement transversals depend only on the pair of
/// subgroups and are cached.
struct Refiner<'a, Z: Scalar> {
    group: &'a GroupHandle,
    cache: &'a RefineCache<Z>,
}

impl<Z: Scalar> Refiner<'_, Z> {
    /// The same set, as cosets of `q ⊆ a.subgroup`.
    fn refine(&self, a: &CosetSet<Z>, q: &SubgroupExpr) -> Result<CosetSet<Z>> {
        if &a.subgroup == q {
            return Ok(a.clone());
        }
        if a.is_empty() {
            return Ok(CosetSet::empty(q.clone()));
        }
        let key = (a.subgroup.clone(), q.clone());
        let cached = self.cache.lock().unwrap().get(&key).cloned();
        let (value, ts) = match cached {
            Some(v) => v,
            None => {
                let v = index_with_transversal::<Z>(self.group, &a.subgroup, q, LEAF_CAP)?;
                self.cache.lock().unwrap().insert(key, v.clone());
                v
            }
        };
        if !matches!(value, IndexValue::Finite { value } if value <= LEAF_CAP) {
            return Err(OagError::CapExceeded(LEAF_CAP as usize));
        }
        let mut reps = Vec::with_capacity(a.len() * ts.len());
        for r in &a.reps {
            for t in &ts {
                reps.push(r.add(t)?);
            }
        }
        Ok(CosetSet {
            subgroup: q.clone(),
            reps,
        })
    }

    fn common(&self, a: &SubgroupExpr, b: &SubgroupExpr) -> SubgroupExpr {
        if a == b {
            a.clone()
        } else {
            a.clone().meet(b.clone()).simplify(self.group)
        }
    }

    fn union(&self, a: CosetSet<Z>, b: CosetSet<Z>) -> Result<CosetSet<Z>> {
        if a.is_empty() {
            return Ok(b);
        }
        if b.is_empty() {
            return Ok(a);
        }
        let q = self.common(&a.subgroup, &b.subgroup);
        let mut out = self.refine(&a, &q)?;
        out.reps.extend(self.refine(&b, &q)?.reps);
        out.dedup()
    }

    fn minus(&self, a: CosetSet<Z>, b: CosetSet<Z>) -> Result<CosetSet<Z>> {
        if a.is_empty() || b.is_empty() {
            return Ok(a);
        }
        let q = self.common(&a.subgroup, &b.subgroup);
        let refined = self.refine(&a, &q)?;
        let mut reps = Vec::new();
        for z in refined.reps {
            // each coset of q lies inside or outside every coset of b.subgroup
            if !b.contains(&z)? {
                reps.push(z);
            }
        }
        Ok(CosetSet { subgroup: q, reps })
    }
}

/// Boolean combination of membership and order literals on `x̄`.
#[derive(Clone, Debug)]
pub enum Domain<Z: Scalar = BigInt> {
    All,
    /// `x_var ∈ rep + subgroup`.
    InCoset {
        var: usize,
        rep: Element<Z>,
        subgroup: SubgroupExpr,
    },
    /// `Σ c_i x_i + offset > 0`.
    Positive {
        coeffs: Vec<i64>,
        offset: Element<Z>,
    },
    Not(Box<Domain<Z>>),
    And(Vec<Domain<Z>>),
    Or(Vec<Domain<Z>>),
}

impl<Z: Scalar> Domain<Z> {
    pub fn holds(&self, xs: &[Element<Z>]) -> Result<bool> {
        Ok(match self {
            Domain::All => true,
            Domain::InCoset { var, rep, subgroup } => {
                let x = xs.get(*var).ok_or(OagError::Arity {
                    expected: var + 1,
                    got: xs.len(),
                })?;
                coset_eq(subgroup, x, rep)?
            }
            Domain::Positive { coeffs, offset } => {
                if coeffs.len() != xs.len() {
                    return Err(OagError::Arity {
                        expected: coeffs.len(),
                        got: xs.len(),
                    });
                }
                let mut acc = offset.clone();
                for (c, x) in coeffs.iter().zip(xs) {
                    acc = acc.add(&x.scalar_mul_i64(*c))?;
                }
                acc.compare(&Element::zero(offset.group()))?.is_gt()
            }
            Domain::Not(d) => !d.holds(xs)?,
            Domain::And(ds) => {
                for d in ds {
                    if !d.holds(xs)? {
                        return Ok(false);
                    }
                }
                true
            }
            Domain::Or(ds) => {
                for d in ds {
                    if d.holds(xs)? {
                        return Ok(true);
                    }
                }
                false
            }
        })
    }
}

/// Combination tree of projected leaves.
#[derive(Clone, Debug)]
pub enum Combination<Z: Scalar = BigInt> {
    Leaf(ProjectedLinearFn<Z>),
    Meet(Vec<Combination<Z>>),
    Union(Vec<Combination<Z>>),
    Minus(Box<Combination<Z>>, Box<Combination<Z>>),
}

impl<Z: Scalar> Combination<Z> {
    fn eval(&self, r: &Refiner<'_, Z>, xs: &[Element<Z>]) -> Result<CosetSet<Z>> {
        match self {
            Combination::Leaf(pf) => eval_projected(pf, xs, LEAF_CAP),
            Combination::Meet(parts) => {
                let mut it = parts.iter();
                let first = it
                    .next()
                    .ok_or_else(|| OagError::ConstraintViolation("empty meet".into()))?;
                let mut acc = first.eval(r, xs)?;
                for p in it {
                    acc = meet_sets(r.group, &acc, &p.eval(r, xs)?)?;
                }
                Ok(acc)
            }
            Combination::Union(parts) => {
                let mut acc = CosetSet::empty(SubgroupExpr::full());
                for p in parts {
                    acc = r.union(acc, p.eval(r, xs)?)?;
                }
                Ok(acc)
            }
            Combination::Minus(a, b) => r.minus(a.eval(r, xs)?, b.eval(r, xs)?),
        }
    }

    /// Subgroups met at the top of this tree (leaf targets under meets).
    pub fn meet_subgroups(&self) -> Vec<SubgroupExpr> {
        match self {
            Combination::Leaf(pf) => vec![pf.target.clone()],
            Combination::Meet(parts) => parts.iter().flat_map(|p| p.meet_subgroups()).collect(),
            Combination::Union(_) => Vec::new(),
            Combination::Minus(a, _) => a.meet_subgroups(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Piece<Z: Scalar = BigInt> {
    pub domain: Domain<Z>,
    pub tree: Combination<Z>,
}

/// A multi-valued function `G^d → (G/T)^{(≤e)}` given piecewise.
#[derive(Clone, Debug)]
pub struct PiecewiseFn<Z: Scalar = BigInt> {
    pub group: GroupHandle,
    pub arity: usize,
    pub pieces: Vec<Piece<Z>>,
    /// Multiplicity bound `e`.
    pub multiplicity: usize,
    /// Values are reported as cosets of this subgroup when given.
    pub target: Option<SubgroupExpr>,
    cache: Arc<RefineCache<Z>>,
}

impl<Z: Scalar> PiecewiseFn<Z> {
    pub fn new(
        group: GroupHandle,
        arity: usize,
        pieces: Vec<Piece<Z>>,
        multiplicity: usize,
        target: Option<SubgroupExpr>,
    ) -> Self {
        PiecewiseFn {
            group,
            arity,
            pieces,
            multiplicity,
            target,
            cache: Arc::default(),
        }
    }
}

/// Union over the pieces whose domain holds, as cosets of the refined
/// subgroup; at most `multiplicity` of them.
pub fn eval_piecewise<Z: Scalar>(f: &PiecewiseFn<Z>, xs: &[Element<Z>]) -> Result<CosetSet<Z>> {
    if xs.len() != f.arity {
        return Err(OagError::Arity {
            expected: f.arity,
            got: xs.len(),
        });
    }
    let r = Refiner {
        group: &f.group,
        cache: &f.cache,
    };
    let mut acc = CosetSet::empty(f.target.clone().unwrap_or_else(SubgroupExpr::full));
    for piece in &f.pieces {
        if piece.domain.holds(xs)? {
            acc = r.union(acc, piece.tree.eval(&r, xs)?)?;
        }
    }
    if let Some(t) = &f.target {
        acc = r.refine(&acc, t)?.dedup()?;
    }
    if acc.len() > f.multiplicity {
        return Err(OagError::MultiplicityExceeded {
            found: acc.len(),
            bound: f.multiplicity,
        });
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// JSON form

#[derive(Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
enum TreeWire {
    Leaf {
        coeffs: Vec<i64>,
        divisor: i64,
        offset: String,
        shift: i64,
        target: String,
    },
    Meet {
        args: Vec<TreeWire>,
    },
    Union {
        args: Vec<TreeWire>,
    },
    Minus {
        left: Box<TreeWire>,
        right: Box<TreeWire>,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
enum DomainWire {
    All,
    InCoset {
        var: usize,
        rep: String,
        subgroup: String,
    },
    Positive {
        coeffs: Vec<i64>,
        offset: String,
    },
    Not {
        arg: Box<DomainWire>,
    },
    And {
        args: Vec<DomainWire>,
    },
    Or {
        args: Vec<DomainWire>,
    },
}

#[derive(Serialize, Deserialize)]
struct PieceWire {
    domain: DomainWire,
    tree: TreeWire,
}

#[derive(Serialize, Deserialize)]
struct PiecewiseWire {
    group: String,
    arity: usize,
    multiplicity: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target: Option<String>,
    pieces: Vec<PieceWire>,
}

fn tree_to_wire<Z: Scalar>(t: &Combination<Z>) -> TreeWire {
    match t {
        Combination::Leaf(pf) => TreeWire::Leaf {
            coeffs: pf.base.coeffs.clone(),
            divisor: pf.base.divisor,
            offset: pf.base.offset.to_string(),
            shift: pf.base.shift,
            target: pf.target.to_string(),
        },
        Combination::Meet(ps) => TreeWire::Meet {
            args: ps.iter().map(tree_to_wire).collect(),
        },
        Combination::Union(ps) => TreeWire::Union {
            args: ps.iter().map(tree_to_wire).collect(),
        },
        Combination::Minus(a, b) => TreeWire::Minus {
            left: Box::new(tree_to_wire(a)),
            right: Box::new(tree_to_wire(b)),
        },
    }
}

fn domain_to_wire<Z: Scalar>(d: &Domain<Z>) -> DomainWire {
    match d {
        Domain::All => DomainWire::All,
        Domain::InCoset { var, rep, subgroup } => DomainWire::InCoset {
            var: *var,
            rep: rep.to_string(),
            subgroup: subgroup.to_string(),
        },
        Domain::Positive { coeffs, offset } => DomainWire::Positive {
            coeffs: coeffs.clone(),
            offset: offset.to_string(),
        },
        Domain::Not(d) => DomainWire::Not {
            arg: Box::new(domain_to_wire(d)),
        },
        Domain::And(ds) => DomainWire::And {
            args: ds.iter().map(domain_to_wire).collect(),
        },
        Domain::Or(ds) => DomainWire::Or {
            args: ds.iter().map(domain_to_wire).collect(),
        },
    }
}

fn tree_from_wire<Z: Scalar>(g: &GroupHandle, w: TreeWire) -> Result<Combination<Z>> {
    Ok(match w {
        TreeWire::Leaf {
            coeffs,
            divisor,
            offset,
            shift,
            target,
        } => {
            let f = LinearFn::new(coeffs, divisor, Element::parse(&offset, g)?, shift)?;
            Combination::Leaf(project(f, parse_subgroup_expr(&target, g)?)?)
        }
        TreeWire::Meet { args } => Combination::Meet(
            args.into_iter()
                .map(|a| tree_from_wire(g, a))
                .collect::<Result<_>>()?,
        ),
        TreeWire::Union { args } => Combination::Union(
            args.into_iter()
                .map(|a| tree_from_wire(g, a))
                .collect::<Result<_>>()?,
        ),
        TreeWire::Minus { left, right } => Combination::Minus(
            Box::new(tree_from_wire(g, *left)?),
            Box::new(tree_from_wire(g, *right)?),
        ),
    })
}

fn domain_from_wire<Z: Scalar>(g: &GroupHandle, w: DomainWire) -> Result<Domain<Z>> {
    Ok(match w {
        DomainWire::All => Domain::All,
        DomainWire::InCoset { var, rep, subgroup } => Domain::InCoset {
            var,
            rep: Element::parse(&rep, g)?,
            subgroup: parse_subgroup_expr(&subgroup, g)?,
        },
        DomainWire::Positive { coeffs, offset } => Domain::Positive {
            coeffs,
            offset: Element::parse(&offset, g)?,
        },
        DomainWire::Not { arg } => Domain::Not(Box::new(domain_from_wire(g, *arg)?)),
        DomainWire::And { args } => Domain::And(
            args.into_iter()
                .map(|a| domain_from_wire(g, a))
                .collect::<Result<_>>()?,
        ),
        DomainWire::Or { args } => Domain::Or(
            args.into_iter()
                .map(|a| domain_from_wire(g, a))
                .collect::<Result<_>>()?,
        ),
    })
}

impl<Z: Scalar> PiecewiseFn<Z> {
    pub fn to_json(&self) -> serde_json::Value {
        let wire = PiecewiseWire {
            group: self.group.spec().to_string(),
            arity: self.arity,
            multiplicity: self.multiplicity,
            target: self.target.as_ref().map(|t| t.to_string()),
            pieces: self
                .pieces
                .iter()
                .map(|p| PieceWire {
                    domain: domain_to_wire(&p.domain),
                    tree: tree_to_wire(&p.tree),
                })
                .collect(),
        };
        serde_json::to_value(wire).expect("plain data serializes")
    }

    pub fn from_json(value: serde_json::Value) -> Result<Self> {
        let wire: PiecewiseWire = serde_json::from_value(value)
            .map_err(|e| OagError::InvalidSpec(format!("piecewise function: {e}")))?;
        let g = parse_group(&wire.group)?;
        let target = wire
            .target
            .map(|t| parse_subgroup_expr(&t, &g))
            .transpose()?;
        let pieces = wire
            .pieces
            .into_iter()
            .map(|p| {
                Ok(Piece {
                    domain: domain_from_wire(&g, p.domain)?,
                    tree: tree_from_wire(&g, p.tree)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PiecewiseFn::new(
            g,
            wire.arity,
            pieces,
            wire.multiplicity,
            target,
        ))
    }
}

// ---------------------------------------------------------------------------
// The polypart counterexample

/// The prime `p` of a polypart group with every cell constrained by `(p, 2)`.
pub fn counterexample_prime(g: &GroupHandle) -> Result<u64> {
    let wrong = || {
        OagError::WrongFamily(format!(
            "{} is not polypart with every cell constrained by (p,2)",
            g.spec()
        ))
    };
    match g.spec() {
        GroupSpec::PolyPart {
            constraints,
            default: Some((p, 2)),
        } if constraints.iter().all(|c| c.p == *p && c.n == 2) => Ok(*p),
        _ => Err(wrong()),
    }
}

/// `f = f_1 ∩ f_2` with `f_1(x) = x + Zero^[p^2] + p^2 G` and
/// `f_2(x) = 0 + Zero^[p^3] + p G`, valued in `Zero^[p^3] + p^2 G`.
pub fn build_counterexample_72<Z: Scalar>(g: &GroupHandle) -> Result<PiecewiseFn<Z>> {
    let p = counterexample_prime(g)?;
    let zero = Element::zero(g);
    let f1 = project(
        LinearFn::new(vec![1], 1, zero.clone(), 0)?,
        SubgroupExpr::sharp_shift(Convex::Zero, p, 2, 2),
    )?;
    let f2 = project(
        LinearFn::new(vec![0], 1, zero, 0)?,
        SubgroupExpr::sharp_shift(Convex::Zero, p, 3, 1),
    )?;
    let tree = Combination::Meet(vec![Combination::Leaf(f1), Combination::Leaf(f2)]);
    Ok(PiecewiseFn::new(
        g.clone(),
        1,
        vec![Piece {
            domain: Domain::All,
            tree,
        }],
        1,
        Some(counterexample_target(p)),
    ))
}

/// `Zero^[p^3] + p^2 G`.
pub fn counterexample_target(p: u64) -> SubgroupExpr {
    SubgroupExpr::sharp_shift(Convex::Zero, p, 3, 2)
}

/// The domain `Zero^[p^2] + p G` of the counterexample.
pub fn counterexample_domain(p: u64) -> SubgroupExpr {
    SubgroupExpr::sharp_shift(Convex::Zero, p, 2, 1)
}

/// Where the agreement set of a candidate sits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confinement {
    pub subgroup: String,
    pub rep: String,
}

/// Three agreement points: `outside_first` is off the anchor's coset of
/// `Zero^[p^3] + pG`, `outside_second` off its coset of `Zero^[p^2] + p^2 G`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfinementViolation {
    pub anchor: String,
    pub outside_first: String,
    pub outside_second: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfinementReport {
    pub candidate: (i64, i64, String),
    pub agreement_size: usize,
    pub confined: Option<Confinement>,
    pub violation: Option<ConfinementViolation>,
}

impl ConfinementReport {
    pub fn passes(&self) -> bool {
        self.violation.is_none()
    }
}

/// The linear candidate `h(x) = (1/b)(a·x + g) + Zero^[p^3] + p^2 G`.
pub fn candidate_72<Z: Scalar>(
    group: &GroupHandle,
    a: i64,
    b: i64,
    g: &Element<Z>,
) -> Result<ProjectedLinearFn<Z>> {
    let p = counterexample_prime(group)?;
    project(
        LinearFn::new(vec![a], b, g.clone(), 0)?,
        counterexample_target(p),
    )
}

/// Agreement set `{x ∈ sample : ∅ ≠ h(x) ⊆ f(x)}` of a candidate and
/// whether it lies in one coset of `Zero^[p^3] + pG` or of
/// `Zero^[p^2] + p^2 G`.
pub fn confinement_check_72<Z: Scalar>(
    f: &PiecewiseFn<Z>,
    candidate: (i64, i64, &Element<Z>),
    sample: &[Element<Z>],
) -> Result<ConfinementReport> {
    let values = sample
        .iter()
        .map(|x| eval_piecewise(f, std::slice::from_ref(x)))
        .collect::<Result<Vec<_>>>()?;
    confinement_with_values(f, candidate, sample, &values)
}

/// As [`confinement_check_72`], with `f` already evaluated on the sample.
pub fn confinement_with_values<Z: Scalar>(
    f: &PiecewiseFn<Z>,
    (a, b, g): (i64, i64, &Element<Z>),
    sample: &[Element<Z>],
    values: &[CosetSet<Z>],
) -> Result<ConfinementReport> {
    let p = counterexample_prime(&f.group)?;
    let h = candidate_72(&f.group, a, b, g)?;
    // h(x) has [(T : b) : T] cosets, so it fits inside the single coset f(x)
    // only when that index is 1; then h(x) ⊆ f(x) iff b·y - (a·x + g) ∈ T
    // for the representative y of f(x)
    let t = counterexample_target(p);
    let (kernel, _) = h.kernel()?;
    let mut agreement: Vec<&Element<Z>> = Vec::new();
    if kernel == IndexValue::finite(1) {
        for (x, fx) in sample.iter().zip(values) {
            let Some(y) = fx.reps.first() else { continue };
            debug_assert_eq!(fx.subgroup, t);
            let c = x.scalar_mul_i64(a).add(g)?;
            if member(&t, &y.scalar_mul_i64(b).sub(&c)?)? {
                agreement.push(x);
            }
        }
    }
    let first = SubgroupExpr::sharp_shift(Convex::Zero, p, 3, 1);
    let second = SubgroupExpr::sharp_shift(Convex::Zero, p, 2, 2);
    let mut report = ConfinementReport {
        candidate: (a, b, g.to_string()),
        agreement_size: agreement.len(),
        confined: None,
        violation: None,
    };
    let Some(anchor) = agreement.first() else {
        return Ok(report);
    };
    let off = |s: &SubgroupExpr| -> Result<Option<&Element<Z>>> {
        for x in &agreement {
            if !coset_eq(s, x, anchor)? {
                return Ok(Some(*x));
            }
        }
        Ok(None)
    };
    match (off(&first)?, off(&second)?) {
        (None, _) => {
            report.confined = Some(Confinement {
                subgroup: first.to_string(),
                rep: anchor.to_string(),
            })
        }
        (_, None) => {
            report.confined = Some(Confinement {
                subgroup: second.to_string(),
                rep: anchor.to_string(),
            })
        }
        (Some(u), Some(v)) => {
            report.violation = Some(ConfinementViolation {
                anchor: anchor.to_string(),
                outside_first: u.to_string(),
                outside_second: v.to_string(),
            })
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// The locallex counterexample

fn check_locallex2(g: &GroupHandle) -> Result<()> {
    match g.spec() {
        GroupSpec::LocalLex { p: 2 } => Ok(()),
        other => Err(OagError::WrongFamily(format!(
            "{other} is not locallex(p=2)"
        ))),
    }
}

/// `Tail(i-1) + 2G`, `Tail(i) + 2G`.
fn alpha_pair(i: usize) -> (SubgroupExpr, SubgroupExpr) {
    (
        SubgroupExpr::tail(i - 1).shift(2, 1),
        SubgroupExpr::tail(i).shift(2, 1),
    )
}

/// The defining formula of `f_{α_i}`: `y - x ∈ Tail(i-1) + 2G` and
/// `y - x ∉ Tail(i) + 2G`.
pub fn f_alpha_73<Z: Scalar>(i: usize, x: &Element<Z>, y: &Element<Z>) -> Result<bool> {
    check_locallex2(x.group())?;
    if i == 0 {
        return Err(OagError::ConstraintViolation(
            "alpha index starts at 1".into(),
        ));
    }
    let (wide, narrow) = alpha_pair(i);
    let d = y.sub(x)?;
    Ok(member(&wide, &d)? && !member(&narrow, &d)?)
}

/// Whether `x ↦ x + g + Tail(i) + 2G` implements `f_{α_i}`: coordinates
/// `0..i-1` of `g` even and coordinate `i-1` odd (2-adic valuation of the
/// coefficient at least 1, resp. exactly 0).
pub fn translate_check_73<Z: Scalar>(g: &Element<Z>, i: usize) -> Result<bool> {
    check_locallex2(g.group())?;
    if i == 0 {
        return Err(OagError::ConstraintViolation(
            "alpha index starts at 1".into(),
        ));
    }
    let even = |c: &Q<Z>| valuation(c, 2).is_none_or(|v| v >= 1);
    Ok((0..i - 1).all(|j| even(&g.coeff(j))) && valuation(&g.coeff(i - 1), 2) == Some(0))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ConflictVerdict {
    Unsatisfiable {
        coordinate: usize,
    },
    /// A common translate exists (never for `i < j`).
    Satisfiable {
        witness: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConflictReport {
    pub i: usize,
    pub j: usize,
    pub verdict: ConflictVerdict,
    pub argument: String,
    /// Size of the `{0,1}` grid over coordinates `< j`.
    pub grid_checked: usize,
    /// Grid points passing both translate checks.
    pub grid_common: Vec<String>,
}

/// No single translate implements both `f_{α_i}` and `f_{α_j}` for `i < j`:
/// coordinate `i-1` must be odd for `i` and even for `j`.
pub fn conflict_73(i: usize, j: usize) -> Result<ConflictReport> {
    if i == 0 || i >= j {
        return Err(OagError::ConstraintViolation(format!(
            "need 1 <= i < j, got i={i}, j={j}"
        )));
    }
    if j > 20 {
        return Err(OagError::ConstraintViolation(format!(
            "grid over {j} coordinates is too large"
        )));
    }
    let g = crate::group::make_group(GroupSpec::LocalLex { p: 2 })?;
    let c = i - 1;
    let argument = format!(
        "f_alpha_{i} needs coordinate {c} of g odd; f_alpha_{j} needs coordinates 0..{} even, and {c} <= {}",
        j - 2,
        j - 2
    );
    let mut common = Vec::new();
    for bits in 0u64..(1 << j) {
        let vals: Vec<i64> = (0..j).map(|k| ((bits >> k) & 1) as i64).collect();
        let t = Element::<BigInt>::from_ints(&g, &vals)?;
        if translate_check_73(&t, i)? && translate_check_73(&t, j)? {
            common.push(t.to_string());
        }
    }
    let verdict = match common.first() {
        None => ConflictVerdict::Unsatisfiable { coordinate: c },
        Some(w) => ConflictVerdict::Satisfiable { witness: w.clone() },
    };
    Ok(ConflictReport {
        i,
        j,
        verdict,
        argument,
        grid_checked: 1 << j,
        grid_common: common,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::make_group;

    fn z() -> GroupHandle {
        make_group(GroupSpec::FreeLex { rank: 1 }).unwrap()
    }

    fn el(g: &GroupHandle, v: &[i64]) -> Element {
        Element::from_ints(g, v).unwrap()
    }

    fn four_z() -> SubgroupExpr {
        SubgroupExpr::multiples(2, 2)
    }

    fn ints(set: &CosetSet) -> Vec<i64> {
        let mut v: Vec<i64> = set
            .reps
            .iter()
            .map(|r| {
                let c = r.coeff(0).to_integer();
                let c: i64 = c.try_into().unwrap();
                c.rem_euclid(4)
            })
            .collect();
        v.sort();
        v
    }

    #[test]
    fn bound_shift_examples() {
        let g = z();
        let pf = project(
            LinearFn::new(vec![1], 1, el(&g, &[0]), 3).unwrap(),
            SubgroupExpr::zero(),
        )
        .unwrap();
        assert_eq!(pf.bound_shift, el(&g, &[3]));
        let loc = make_group(GroupSpec::LocalLex { p: 2 }).unwrap();
        let pf = project(
            LinearFn::new(vec![1], 1, Element::<BigInt>::zero(&loc), 3).unwrap(),
            SubgroupExpr::zero(),
        )
        .unwrap();
        assert!(pf.bound_shift.is_zero());
        let pf = project(
            LinearFn::new(vec![1], 1, el(&g, &[0]), 0).unwrap(),
            SubgroupExpr::tail(1),
        )
        .unwrap();
        assert!(pf.bound_shift.is_zero());
        let bad = SubgroupExpr::tail(1).meet(SubgroupExpr::multiples(2, 1));
        assert!(matches!(
            project(LinearFn::new(vec![1], 1, el(&g, &[0]), 0).unwrap(), bad),
            Err(OagError::InadmissibleTarget(_))
        ));
    }

    #[test]
    fn projected_examples() {
        let g = z();
        let id = project(
            LinearFn::new(vec![1], 1, el(&g, &[0]), 0).unwrap(),
            four_z(),
        )
        .unwrap();
        assert_eq!(
            ints(&eval_projected(&id, &[el(&g, &[3])], 8).unwrap()),
            vec![3]
        );
        let half = project(
            LinearFn::new(vec![1], 2, el(&g, &[0]), 0).unwrap(),
            four_z(),
        )
        .unwrap();
        assert_eq!(
            ints(&eval_projected(&half, &[el(&g, &[2])], 8).unwrap()),
            vec![1, 3]
        );
        assert!(eval_projected(&half, &[el(&g, &[1])], 8)
            .unwrap()
            .is_empty());
        assert_eq!(
            eval_projected(&half, &[el(&g, &[2])], 1).unwrap_err(),
            OagError::CapExceeded(1)
        );
        assert_eq!(
            eval_projected(&half, &[], 8).unwrap_err(),
            OagError::Arity {
                expected: 1,
                got: 0
            }
        );
        let shifted = project(
            LinearFn::new(vec![1], 1, el(&g, &[0]), 3).unwrap(),
            four_z(),
        )
        .unwrap();
        assert_eq!(
            ints(&eval_projected(&shifted, &[el(&g, &[2])], 8).unwrap()),
            vec![1]
        );
    }

    #[test]
    fn intersections() {
        let g = z();
        let zero = el(&g, &[0]);
        let even = project(
            LinearFn::new(vec![0], 1, zero.clone(), 0).unwrap(),
            SubgroupExpr::multiples(2, 1),
        )
        .unwrap();
        let one_mod_four = project(
            LinearFn::new(vec![0], 1, el(&g, &[1]), 0).unwrap(),
            four_z(),
        )
        .unwrap();
        let clash = intersect(even.clone(), one_mod_four).unwrap();
        for x in -3..4 {
            assert!(clash.eval(&[el(&g, &[x])], 8).unwrap().is_empty());
        }
        let id = project(LinearFn::new(vec![1], 1, zero, 0).unwrap(), four_z()).unwrap();
        let same = intersect(id.clone(), id.clone()).unwrap();
        for x in -3..4 {
            let xs = [el(&g, &[x])];
            let a = same.eval(&xs, 8).unwrap();
            assert!(a.same_as(&eval_projected(&id, &xs, 8).unwrap()).unwrap());
        }
    }

    #[test]
    fn counterexample_72_values() {
        let g = make_group(GroupSpec::poly_part_uniform(2, 2)).unwrap();
        let f = build_counterexample_72::<BigInt>(&g).unwrap();
        let t = counterexample_target(2);
        let two = Element::parse("2", &g).unwrap();
        let v = eval_piecewise(&f, std::slice::from_ref(&two)).unwrap();
        assert_eq!(v.subgroup, t);
        assert_eq!(v.len(), 1);
        assert!(coset_eq(&t, &v.reps[0], &two).unwrap());
        let four = Element::parse("4", &g).unwrap();
        let v = eval_piecewise(&f, std::slice::from_ref(&four)).unwrap();
        assert!(coset_eq(&t, &v.reps[0], &four).unwrap());
        // odd constant term: outside Zero^[4] + 2G
        let x = Element::parse("1 + t + 3*t^3", &g).unwrap();
        assert!(!member(&counterexample_domain(2), &x).unwrap());
        assert!(eval_piecewise(&f, &[x]).unwrap().is_empty());
        let wrong = make_group(GroupSpec::PolyMod { p: 2, n: 2 }).unwrap();
        assert!(matches!(
            build_counterexample_72::<BigInt>(&wrong),
            Err(OagError::WrongFamily(_))
        ));
    }

    #[test]
    fn intersection_on_the_polypart_group() {
        let g = make_group(GroupSpec::poly_part_uniform(2, 2)).unwrap();
        let zero = Element::<BigInt>::zero(&g);
        let f1 = project(
            LinearFn::new(vec![1], 1, zero.clone(), 0).unwrap(),
            SubgroupExpr::sharp_shift(Convex::Zero, 2, 2, 2),
        )
        .unwrap();
        let f2 = project(
            LinearFn::new(vec![0], 1, zero, 0).unwrap(),
            SubgroupExpr::sharp_shift(Convex::Zero, 2, 3, 1),
        )
        .unwrap();
        let h = intersect(f1, f2).unwrap();
        let four = Element::parse("4", &g).unwrap();
        let v = h.eval(std::slice::from_ref(&four), 8).unwrap();
        assert_eq!(v.len(), 1);
        assert!(coset_eq(&counterexample_target(2), &v.reps[0], &four).unwrap());
    }

    #[test]
    fn confinement_examples() {
        let g = make_group(GroupSpec::poly_part_uniform(2, 2)).unwrap();
        let f = build_counterexample_72::<BigInt>(&g).unwrap();
        let sample: Vec<Element> = [
            "0",
            "2",
            "4",
            "1",
            "4*t",
            "2*t + 2*t^3",
            "2 + 4*t^2",
            "2*t^2 + 2*t^6",
            "t + 3*t^3",
        ]
        .iter()
        .map(|s| Element::parse(s, &g).unwrap())
        .collect();
        let zero = Element::zero(&g);
        let r = confinement_check_72(&f, (1, 1, &zero), &sample).unwrap();
        assert!(r.passes());
        assert!(r.agreement_size >= 1);
        let off = Element::parse("2*t + 2*t^3", &g).unwrap();
        assert!(confinement_check_72(&f, (2, 1, &off), &sample)
            .unwrap()
            .passes());
    }

    #[test]
    fn translate_examples() {
        let g = make_group(GroupSpec::LocalLex { p: 2 }).unwrap();
        let e0 = Element::<BigInt>::basis(&g, 0).unwrap();
        let e1 = Element::<BigInt>::basis(&g, 1).unwrap();
        assert!(translate_check_73(&e0, 1).unwrap());
        assert!(!translate_check_73(&e0, 2).unwrap());
        assert!(translate_check_73(&e1, 2).unwrap());
        assert!(!translate_check_73(&e1, 1).unwrap());
        let third = Element::parse("2/3*e0 + 1/3*e1", &g).unwrap();
        assert!(translate_check_73::<BigInt>(&third, 2).unwrap());
    }

    #[test]
    fn conflict_examples() {
        let r = conflict_73(1, 2).unwrap();
        assert_eq!(r.verdict, ConflictVerdict::Unsatisfiable { coordinate: 0 });
        assert_eq!(r.grid_checked, 4);
        assert_eq!(
            conflict_73(2, 5).unwrap().verdict,
            ConflictVerdict::Unsatisfiable { coordinate: 1 }
        );
        assert!(conflict_73(3, 3).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let g = make_group(GroupSpec::poly_part_uniform(2, 2)).unwrap();
        let f = build_counterexample_72::<BigInt>(&g).unwrap();
        let json = f.to_json();
        assert_eq!(json["pieces"][0]["tree"]["op"], "meet");
        let back = PiecewiseFn::<BigInt>::from_json(json.clone()).unwrap();
        assert_eq!(back.to_json(), json);
    }
}
