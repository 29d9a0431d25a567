//! Brute-force membership oracle.
//!
//! Decides `x ∈ S` by searching for decomposition witnesses over a bounded
//! window and coefficient range, straight from the definitions: a sharp node
//! is the literal intersection of `Tail(j) + l^s G` over the strict convex
//! supergroups (for `{0}` in an infinite family, its limit past the
//! window, which is coordinatewise divisibility), a shift or join node is
//! an existential search. It shares nothing with the window-module engine
//! except the group predicate, and is meant as a test tool.
//!
//! Every node `S` carries a bracket `(L, P)` with
//! `P (Tail(L) ∩ G) ⊆ S ⊆ Tail(L)`, computed bottom-up. Witness coordinates
//! below `L` are forced, and the remaining ones only matter modulo `P`, so
//! searches range over coset representatives instead of a coefficient box.
//! When `P G ⊆ S` the question also splits over the primes of `P`. In
//! `LocalLex(p)` every node is a `Z_(p)`-module, so the element may be
//! scaled by a unit to clear denominators, primes other than `p` act
//! invertibly, and integer witnesses suffice.

use std::collections::HashMap;

use num_integer::Integer;

use crate::element::Element;
use crate::error::{OagError, Result};
use crate::group::{Convex, GroupHandle};
use crate::lattice::CoeffRing;
use crate::scalar::Scalar;
use crate::subgroup::SubgroupExpr;

/// Default cap on oracle node evaluations per query.
pub const ORACLE_BUDGET: usize = 4_000_000;

#[derive(Clone, Debug)]
enum Node {
    /// `Tail(m)`; `None` is `{0}`.
    Tail(Option<usize>),
    Shift(usize, u64, u32),
    Meet(Vec<usize>),
    Join(usize, usize),
    Scale(u64, u32, usize),
    /// `Tail(j) + l^s G` for `j` past every window coordinate; with cells
    /// unbounded the witness repairs cell sums beyond `j`, so this is
    /// coordinatewise divisibility.
    Divisible(u64, u32),
}

struct Oracle {
    group: GroupHandle,
    coords: Vec<usize>,
    /// Per position: the modulus `p^n` of its constrained cell, if any, and
    /// whether it is the last window coordinate of that cell.
    cell_mod: Vec<Option<(usize, i64, bool)>>,
    nodes: Vec<Node>,
    /// Per node `(L, P)` with `P (Tail(L) ∩ G) ⊆ S ⊆ Tail(L)`; `L = usize::MAX`
    /// stands for `{0}`.
    brackets: Vec<(usize, i64)>,
    /// Per node a depth `D` with `Tail(D) ∩ G ⊆ S`, `usize::MAX` if none.
    depths: Vec<usize>,
    /// Per node and window position a modulus `c` with `c | v_i` for every
    /// `v ∈ S`; `0` means the coordinate vanishes on `S`.
    boxes: Vec<Vec<i64>>,
    slack: i64,
    budget: usize,
    spent: usize,
    memo: HashMap<(usize, Vec<i64>), bool>,
}

fn lcm(a: i64, b: i64) -> i64 {
    a.lcm(&b)
}

/// Whether `h` meets every congruence `alpha h + beta ≡ 0 (mod c)`.
fn passes(filters: &[(i64, i64, i64)], h: i64) -> bool {
    filters.iter().all(|&(alpha, beta, c)| {
        let x = alpha * h + beta;
        if c == 0 {
            x == 0
        } else {
            x % c == 0
        }
    })
}

impl Oracle {
    fn unit(&self, l: u64) -> bool {
        matches!(self.group.coeff_ring(), CoeffRing::LocalAt(p) if p != l)
    }

    fn divisor(&self, l: u64, s: u32) -> i64 {
        if self.unit(l) {
            1
        } else {
            (l as i64).pow(s)
        }
    }

    fn local_part(&self, q: i64) -> i64 {
        match self.group.coeff_ring() {
            CoeffRing::LocalAt(p) => {
                let p = p as i64;
                let mut out = 1;
                let mut q = q;
                while q % p == 0 {
                    q /= p;
                    out *= p;
                }
                out
            }
            CoeffRing::Integers => q,
        }
    }

    fn lower(&mut self, e: &SubgroupExpr) -> usize {
        let node = match e {
            SubgroupExpr::Conv(c) => Node::Tail(self.group.normalize_convex(*c).level()),
            SubgroupExpr::Sharp(c, l, s) => {
                if *s == 0 {
                    Node::Tail(Some(0))
                } else {
                    match (self.group.normalize_convex(*c), self.group.universe()) {
                        // the chains below D are finite: intersect literally
                        (Convex::Tail(m), _) => self.sharp_levels(0..m, *l, *s),
                        (Convex::Zero, Some(k)) => self.sharp_levels(0..k, *l, *s),
                        // every Tail(j) + l^s G with j inside the window
                        // contains the limit, so the limit is the intersection
                        (Convex::Zero, None) => Node::Divisible(*l, *s),
                    }
                }
            }
            SubgroupExpr::Shift(inner, l, k) => {
                if *k == 0 {
                    Node::Tail(Some(0))
                } else {
                    let i = self.lower(inner);
                    Node::Shift(i, *l, *k)
                }
            }
            SubgroupExpr::Meet(a, b) => {
                let a = self.lower(a);
                let b = self.lower(b);
                Node::Meet(vec![a, b])
            }
            SubgroupExpr::Join(a, b) => {
                let a = self.lower(a);
                let b = self.lower(b);
                Node::Join(a, b)
            }
            SubgroupExpr::Scale(l, r, inner) => {
                let i = self.lower(inner);
                Node::Scale(*l, *r, i)
            }
        };
        self.push(node)
    }

    fn sharp_levels(&mut self, levels: std::ops::Range<usize>, l: u64, s: u32) -> Node {
        let parts = levels
            .map(|j| {
                let t = self.push(Node::Tail(Some(j)));
                self.push(Node::Shift(t, l, s))
            })
            .collect();
        Node::Meet(parts)
    }

    fn push(&mut self, node: Node) -> usize {
        let bracket = match &node {
            Node::Tail(m) => (m.unwrap_or(usize::MAX), 1),
            Node::Shift(t, l, k) => {
                let q = if self.unit(*l) {
                    1
                } else {
                    self.local_part((*l as i64).pow(*k))
                };
                match self.brackets[*t] {
                    (0, p) => (0, p.gcd(&q)),
                    _ => (0, q),
                }
            }
            Node::Meet(parts) => parts.iter().fold((0, 1), |(l, p), &i| {
                let (li, pi) = self.brackets[i];
                (l.max(li), lcm(p, pi))
            }),
            Node::Join(a, b) => {
                let (la, pa) = self.brackets[*a];
                let (lb, pb) = self.brackets[*b];
                match la.cmp(&lb) {
                    std::cmp::Ordering::Less => (la, pa),
                    std::cmp::Ordering::Greater => (lb, pb),
                    std::cmp::Ordering::Equal => (la, pa.gcd(&pb)),
                }
            }
            Node::Scale(l, r, t) => {
                let q = if self.unit(*l) {
                    1
                } else {
                    (*l as i64).pow(*r)
                };
                let (lt, pt) = self.brackets[*t];
                (lt, self.local_part(pt * q))
            }
            Node::Divisible(l, s) => (0, self.divisor(*l, *s)),
        };
        let depth = match &node {
            Node::Tail(m) => m.unwrap_or(usize::MAX),
            Node::Shift(t, _, _) => self.depths[*t],
            Node::Meet(parts) => parts.iter().map(|&i| self.depths[i]).max().unwrap_or(0),
            Node::Join(a, b) => self.depths[*a].min(self.depths[*b]),
            Node::Scale(l, _, t) if self.unit(*l) => self.depths[*t],
            Node::Scale(..) => usize::MAX,
            Node::Divisible(l, s) if self.divisor(*l, *s) == 1 => 0,
            Node::Divisible(..) => usize::MAX,
        };
        let n = self.coords.len();
        let bx: Vec<i64> = match &node {
            Node::Tail(m) => {
                let m = m.unwrap_or(usize::MAX);
                self.coords
                    .iter()
                    .map(|&i| if i < m { 0 } else { 1 })
                    .collect()
            }
            Node::Shift(t, l, k) => {
                let q = self.divisor(*l, *k);
                self.boxes[*t].iter().map(|c| c.gcd(&q)).collect()
            }
            Node::Meet(parts) => (0..n)
                .map(|pos| parts.iter().fold(1, |acc, &i| lcm(acc, self.boxes[i][pos])))
                .collect(),
            Node::Join(a, b) => (0..n)
                .map(|pos| self.boxes[*a][pos].gcd(&self.boxes[*b][pos]))
                .collect(),
            Node::Scale(l, r, t) => {
                let q = self.divisor(*l, *r);
                self.boxes[*t].iter().map(|c| c * q).collect()
            }
            Node::Divisible(l, s) => vec![self.divisor(*l, *s); n],
        };
        self.nodes.push(node);
        self.brackets.push(bracket);
        self.depths.push(depth);
        self.boxes.push(bx);
        self.nodes.len() - 1
    }

    fn in_group(&self, v: &[i64]) -> bool {
        let mut sums: HashMap<usize, (i64, i64)> = HashMap::new();
        for (pos, x) in v.iter().enumerate() {
            if let Some((cell, m, _)) = self.cell_mod[pos] {
                let e = sums.entry(cell).or_insert((0, m));
                e.0 += x;
            }
        }
        sums.values().all(|(s, m)| s % m == 0)
    }

    /// `v / q` when it is a group element.
    fn divide(&self, v: &[i64], q: i64) -> Option<Vec<i64>> {
        if v.iter().any(|x| x % q != 0) {
            return None;
        }
        let w: Vec<i64> = v.iter().map(|x| x / q).collect();
        self.in_group(&w).then_some(w)
    }

    /// Calls `f` on group elements of the window whose unfixed coordinates
    /// run over coset representatives of `G / M G` (widened by `slack`
    /// extra periods on the negative side), taken modulo `Tail(depth) ∩ G`.
    /// Stops at the first `true`.
    ///
    /// `filters[pos]` lists congruences `alpha h + beta ≡ 0 (mod c)` (with
    /// `c = 0` meaning equality) that a candidate coordinate `h` must meet.
    fn search(
        &mut self,
        modulus: i64,
        depth: usize,
        fixed: &[Option<i64>],
        filters: &[Vec<(i64, i64, i64)>],
        f: &mut dyn FnMut(&mut Self, &[i64]) -> Result<bool>,
    ) -> Result<bool> {
        let n = self.coords.len();
        let lo = -self.slack * modulus;
        let ranges: Vec<Vec<i64>> = (0..n)
            .map(|pos| {
                let r = match fixed[pos] {
                    Some(x) => vec![x],
                    None if matches!(self.cell_mod[pos], Some((_, _, true))) => return Vec::new(),
                    None if self.coords[pos] >= depth => vec![0],
                    None => (lo..modulus).collect(),
                };
                r.into_iter()
                    .filter(|&h| passes(&filters[pos], h))
                    .collect()
            })
            .collect();
        if (0..n).any(|pos| ranges[pos].is_empty() && !self.is_free_rep(pos, fixed)) {
            return Ok(false);
        }
        let mut cur = vec![0i64; n];
        self.enumerate(0, &mut cur, &ranges, modulus, depth, fixed, filters, f)
    }

    fn is_free_rep(&self, pos: usize, fixed: &[Option<i64>]) -> bool {
        fixed[pos].is_none() && matches!(self.cell_mod[pos], Some((_, _, true)))
    }

    fn enumerate(
        &mut self,
        pos: usize,
        cur: &mut Vec<i64>,
        ranges: &[Vec<i64>],
        modulus: i64,
        depth: usize,
        fixed: &[Option<i64>],
        filters: &[Vec<(i64, i64, i64)>],
        f: &mut dyn FnMut(&mut Self, &[i64]) -> Result<bool>,
    ) -> Result<bool> {
        if pos == cur.len() {
            if !self.in_group(cur) {
                return Ok(false);
            }
            self.spent += 1;
            if self.spent > self.budget {
                return Err(OagError::OracleBoundExceeded(self.budget));
            }
            return f(self, cur);
        }
        let choices: Vec<i64> = match (self.cell_mod[pos], fixed[pos]) {
            (Some((cell, m, true)), None) => {
                // the rep is the last window coordinate of its cell
                let rest: i64 = (0..pos)
                    .filter(|&q| matches!(self.cell_mod[q], Some((c, _, _)) if c == cell))
                    .map(|q| cur[q])
                    .sum();
                let base = (-rest).mod_floor(&m);
                let all: Vec<i64> = if self.coords[pos] >= depth {
                    vec![base]
                } else {
                    (-self.slack * modulus..modulus)
                        .map(|j| base + j * m)
                        .collect()
                };
                all.into_iter()
                    .filter(|&h| passes(&filters[pos], h))
                    .collect()
            }
            _ => ranges[pos].clone(),
        };
        for c in choices {
            cur[pos] = c;
            if self.enumerate(pos + 1, cur, ranges, modulus, depth, fixed, filters, f)? {
                cur[pos] = 0;
                return Ok(true);
            }
        }
        cur[pos] = 0;
        Ok(false)
    }

    fn mem(&mut self, id: usize, v: &[i64]) -> Result<bool> {
        if let Some(&b) = self.memo.get(&(id, v.to_vec())) {
            return Ok(b);
        }
        self.spent += 1;
        if self.spent > self.budget {
            return Err(OagError::OracleBoundExceeded(self.budget));
        }
        let (l, per) = self.brackets[id];
        if !v
            .iter()
            .zip(&self.boxes[id])
            .all(|(x, c)| passes(&[(1, 0, *c)], *x))
        {
            return Ok(false);
        }
        if l != usize::MAX && self.divide(v, per).is_some() {
            return Ok(true);
        }
        let d = self.depths[id];
        if (0..v.len()).all(|pos| self.coords[pos] >= d || v[pos] == 0) {
            return Ok(true);
        }
        let node = self.nodes[id].clone();
        let out = match node {
            Node::Tail(None) => v.iter().all(|x| *x == 0),
            Node::Tail(Some(m)) => self.coords.iter().zip(v).all(|(&i, x)| i >= m || *x == 0),
            Node::Meet(parts) => {
                let mut all = true;
                for p in parts {
                    if !self.mem(p, v)? {
                        all = false;
                        break;
                    }
                }
                all
            }
            Node::Scale(l, r, t) => {
                if self.unit(l) {
                    self.mem(t, v)?
                } else {
                    match self.divide(v, (l as i64).pow(r)) {
                        Some(w) => self.mem(t, &w)?,
                        None => false,
                    }
                }
            }
            Node::Shift(t, l, k) => {
                if self.unit(l) {
                    true
                } else {
                    self.shift_search(t, (l as i64).pow(k), v)?
                }
            }
            Node::Join(a, b) => self.join_search(a, b, v)?,
            Node::Divisible(l, s) => {
                let q = self.divisor(l, s);
                v.iter().all(|x| x % q == 0)
            }
        };
        self.memo.insert((id, v.to_vec()), out);
        Ok(out)
    }

    /// Runs `check` on each primary component `e v` of `v` modulo `period`,
    /// with `e` the idempotent of the prime power `p^a`. Valid for nodes
    /// containing `period * G`: such a node holds `v` iff it holds every
    /// component.
    fn by_primes(
        &mut self,
        period: i64,
        v: &[i64],
        check: &mut dyn FnMut(&mut Self, i64, i64, &[i64]) -> Result<bool>,
    ) -> Result<bool> {
        let parts = crate::scalar::factorize(period as u64);
        if parts.len() <= 1 {
            return check(self, period, 1, v);
        }
        for (p, a) in parts {
            let pa = (p as i64).pow(a);
            let rest = period / pa;
            // e = 1 mod p^a, e = 0 mod rest
            let inv = crate::scalar::mod_inverse(&rest, &pa).expect("coprime parts");
            let e = rest * inv;
            let vp: Vec<i64> = v.iter().map(|x| x * e).collect();
            if !check(self, pa, e, &vp)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `v ∈ T + q G`: search `g` with `v - q g ∈ T`. Coordinates below
    /// `L(T)` are forced; the rest only matter modulo `P(T) / gcd(P(T), q)`.
    fn shift_search(&mut self, t: usize, q: i64, v: &[i64]) -> Result<bool> {
        let (lt, pt) = self.brackets[t];
        if lt == 0 {
            // T + q G = T + gcd(P, q) G
            let q = pt.gcd(&q);
            return self.by_primes(pt, v, &mut |o, pa, e, vp| {
                let modulus = pa / pa.gcd(&q);
                let vp = vp.to_vec();
                let fixed = vec![None; vp.len()];
                let filters: Vec<_> = (0..vp.len())
                    .map(|pos| vec![(-q * e, vp[pos], o.boxes[t][pos])])
                    .collect();
                o.search(modulus, o.depths[t], &fixed, &filters, &mut |o, h| {
                    let cand: Vec<i64> = vp.iter().zip(h).map(|(x, y)| x - q * e * y).collect();
                    o.mem(t, &cand)
                })
            });
        }
        let mut fixed = vec![None; v.len()];
        for (pos, &i) in self.coords.iter().enumerate() {
            if i < lt {
                if v[pos] % q != 0 {
                    return Ok(false);
                }
                fixed[pos] = Some(v[pos] / q);
            }
        }
        let modulus = pt / pt.gcd(&q);
        let v = v.to_vec();
        let filters: Vec<_> = (0..v.len())
            .map(|pos| vec![(-q, v[pos], self.boxes[t][pos])])
            .collect();
        self.search(modulus, self.depths[t], &fixed, &filters, &mut |o, g| {
            let cand: Vec<i64> = v.iter().zip(g).map(|(x, y)| x - q * y).collect();
            o.mem(t, &cand)
        })
    }

    /// `v ∈ A + B`: search `a ∈ A` with `v - a ∈ B`. Coordinates of `a`
    /// below `L(A)` vanish, those below `L(B)` agree with `v`, and the rest
    /// only matter modulo `lcm(P(A), P(B))`.
    fn join_search(&mut self, a: usize, b: usize, v: &[i64]) -> Result<bool> {
        if self.mem(a, v)? || self.mem(b, v)? {
            return Ok(true);
        }
        let (mut a, mut b) = (a, b);
        if self.brackets[a].0 == 0 && self.brackets[b].1 == 1 {
            std::mem::swap(&mut a, &mut b);
        }
        let (la, pa) = self.brackets[a];
        let (lb, pb) = self.brackets[b];
        // With `B ⊇ P(B) G` and `A` either of the same kind or a plain tail,
        // the existence of `a` splits over the primes of the periods.
        if lb == 0 && (la == 0 || pa == 1) {
            return self.by_primes(lcm(pa, pb), v, &mut |o, m, e, vp| {
                let vp = vp.to_vec();
                let fixed: Vec<Option<i64>> =
                    o.coords.iter().map(|&i| (i < la).then_some(0)).collect();
                let filters: Vec<_> = (0..vp.len())
                    .map(|pos| vec![(e, 0, o.boxes[a][pos]), (-e, vp[pos], o.boxes[b][pos])])
                    .collect();
                o.search(
                    m,
                    o.depths[a].max(o.depths[b]),
                    &fixed,
                    &filters,
                    &mut |o, h| {
                        let x: Vec<i64> = h.iter().map(|y| e * y).collect();
                        if !o.mem(a, &x)? {
                            return Ok(false);
                        }
                        let rest: Vec<i64> = vp.iter().zip(&x).map(|(p, q)| p - q).collect();
                        o.mem(b, &rest)
                    },
                )
            });
        }
        let mut fixed = vec![None; v.len()];
        for (pos, &i) in self.coords.iter().enumerate() {
            match (i < la, i < lb) {
                (true, true) if v[pos] != 0 => return Ok(false),
                (true, _) => fixed[pos] = Some(0),
                (false, true) => fixed[pos] = Some(v[pos]),
                (false, false) => {}
            }
        }
        let v = v.to_vec();
        let filters: Vec<_> = (0..v.len())
            .map(|pos| vec![(1, 0, self.boxes[a][pos]), (-1, v[pos], self.boxes[b][pos])])
            .collect();
        self.search(
            lcm(pa, pb),
            self.depths[a].max(self.depths[b]),
            &fixed,
            &filters,
            &mut |o, x| {
                if !o.mem(a, x)? {
                    return Ok(false);
                }
                let rest: Vec<i64> = v.iter().zip(x).map(|(p, q)| p - q).collect();
                o.mem(b, &rest)
            },
        )
    }
}

/// Decides `x ∈ S` by bounded witness search.
///
/// The window is `[0, max(support(x), level bound) + support_slack)` plus one
/// further coordinate for every constrained cell meeting it. Witness
/// searches run over coset representatives of `G / P G` for the period `P`
/// of the node involved; `coeff_slack` widens them by that many extra
/// periods below zero, which is redundant but cheap for small periods.
pub fn member_oracle<Z: Scalar>(
    expr: &SubgroupExpr,
    x: &Element<Z>,
    support_slack: usize,
    coeff_slack: u64,
) -> Result<bool> {
    member_oracle_with_budget(expr, x, support_slack, coeff_slack, ORACLE_BUDGET)
}

pub fn member_oracle_with_budget<Z: Scalar>(
    expr: &SubgroupExpr,
    x: &Element<Z>,
    support_slack: usize,
    coeff_slack: u64,
    budget: usize,
) -> Result<bool> {
    let group = x.group().clone();
    expr.validate(&group)?;
    if x.is_zero() {
        return Ok(true);
    }
    // clear denominators (units in the local ring)
    let mut denom = Z::one();
    for c in x.coords().values() {
        denom = denom.lcm(c.denom());
    }
    let top = x.support_end().max(expr.level_bound()).max(1) + support_slack;
    let top = group.universe().map_or(top, |k| top.min(k));
    let mut coords: Vec<usize> = (0..top).collect();
    if group.has_cells() {
        let mut cells: Vec<usize> = coords.iter().filter_map(|&i| group.cell_of(i)).collect();
        cells.sort_unstable();
        cells.dedup();
        for c in cells {
            if group.cell_constraint(c).is_some() {
                coords.push(group.next_in_cell(c, top));
            }
        }
        coords.sort_unstable();
        coords.dedup();
    }
    let mut cell_mod = vec![None; coords.len()];
    for (pos, &i) in coords.iter().enumerate() {
        if let Some(cell) = group.cell_of(i) {
            if let Some((p, n)) = group.cell_constraint(cell) {
                let last =
                    coords.iter().rposition(|&j| group.cell_of(j) == Some(cell)) == Some(pos);
                cell_mod[pos] = Some((cell, (p as i64).pow(n), last));
            }
        }
    }
    let mut v = vec![0i64; coords.len()];
    for (i, c) in x.coords() {
        let scaled = c * num_rational::Ratio::from_integer(denom.clone());
        let pos = coords.binary_search(i).expect("support inside window");
        v[pos] = scaled
            .to_integer()
            .to_i64()
            .ok_or(OagError::OracleBoundExceeded(budget))?;
    }
    let mut o = Oracle {
        group: group.clone(),
        coords,
        cell_mod,
        nodes: Vec::new(),
        brackets: Vec::new(),
        depths: Vec::new(),
        boxes: Vec::new(),
        slack: coeff_slack as i64,
        budget,
        spent: 0,
        memo: HashMap::new(),
    };
    let root = o.lower(expr);
    o.mem(root, &v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{make_group, GroupSpec};
    use crate::subgroup::member;
    use num_bigint::BigInt;

    type E = Element<BigInt>;

    #[test]
    fn oracle_examples() {
        let pm = make_group(GroupSpec::poly_mod(2, 2)).unwrap();
        let sh = SubgroupExpr::sharp(Convex::Zero, 2, 2);
        assert!(member_oracle(&sh, &E::parse("4", &pm).unwrap(), 1, 0).unwrap());
        assert!(!member_oracle(&sh, &E::parse("2 + 2*t", &pm).unwrap(), 1, 0).unwrap());
        assert!(member_oracle(&sh, &E::zero(&pm), 0, 0).unwrap());
        let f3 = make_group(GroupSpec::free_lex(3)).unwrap();
        let s = SubgroupExpr::tail(1).shift(2, 1);
        assert!(member_oracle(&s, &E::from_ints(&f3, &[2, 1, 0]).unwrap(), 1, 0).unwrap());
    }

    #[test]
    fn oracle_matches_engine_on_joins() {
        let l3 = make_group(GroupSpec::local_lex(3)).unwrap();
        let e = SubgroupExpr::tail(2)
            .join(SubgroupExpr::multiples(3, 1))
            .meet(SubgroupExpr::sharp(Convex::Tail(1), 3, 2).scale(2, 1));
        for seed in 0..40 {
            let x = E::random(&l3, 3, 3, seed);
            assert_eq!(
                member(&e, &x).unwrap(),
                member_oracle(&e, &x, 1, 0).unwrap(),
                "{x}"
            );
        }
    }
}
