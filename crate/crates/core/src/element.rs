//! Elements: finitely supported exact coordinate vectors.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{parse_err, OagError, Result};
use crate::group::{GroupHandle, GroupSpec, Window};
use crate::lattice::CoeffRing;
use crate::scalar::{format_rational, int, prime_power, qint, Scalar, Q};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Element<Z: Scalar = num_bigint::BigInt> {
    coords: BTreeMap<usize, Q<Z>>,
    group: GroupHandle,
}

fn same_group(a: &GroupHandle, b: &GroupHandle) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(OagError::GroupMismatch)
    }
}

impl<Z: Scalar> Element<Z> {
    pub fn zero(group: &GroupHandle) -> Self {
        Element {
            coords: BTreeMap::new(),
            group: group.clone(),
        }
    }

    /// Builds a checked element from `(index, coefficient)` pairs; repeated
    /// indices are summed.
    pub fn from_coords(
        group: &GroupHandle,
        pairs: impl IntoIterator<Item = (usize, Q<Z>)>,
    ) -> Result<Self> {
        let mut coords: BTreeMap<usize, Q<Z>> = BTreeMap::new();
        for (i, c) in pairs {
            let e = coords.entry(i).or_insert_with(Q::zero);
            *e = &*e + c;
        }
        coords.retain(|_, c| !c.is_zero());
        group.check_coords(&coords)?;
        Ok(Element {
            coords,
            group: group.clone(),
        })
    }

    pub fn from_ints(group: &GroupHandle, values: &[i64]) -> Result<Self> {
        Self::from_coords(
            group,
            values
                .iter()
                .enumerate()
                .map(|(i, &v)| (i, qint(int::<Z>(v)))),
        )
    }

    /// Basis vector `e_i`; fails where `e_i` is not a group member.
    pub fn basis(group: &GroupHandle, i: usize) -> Result<Self> {
        Self::from_coords(group, [(i, Q::one())])
    }

    /// Unchecked constructor for values known to lie in the group.
    pub(crate) fn from_map_unchecked(
        group: &GroupHandle,
        mut coords: BTreeMap<usize, Q<Z>>,
    ) -> Self {
        coords.retain(|_, c| !c.is_zero());
        debug_assert!(group.check_coords(&coords).is_ok());
        Element {
            coords,
            group: group.clone(),
        }
    }

    pub fn group(&self) -> &GroupHandle {
        &self.group
    }

    pub fn coords(&self) -> &BTreeMap<usize, Q<Z>> {
        &self.coords
    }

    pub fn coeff(&self, i: usize) -> Q<Z> {
        self.coords.get(&i).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    /// One past the largest index in the support (0 for the zero element).
    pub fn support_end(&self) -> usize {
        self.coords.keys().next_back().map_or(0, |&i| i + 1)
    }

    /// Smallest index in the support.
    pub fn leading_index(&self) -> Option<usize> {
        self.coords.keys().next().copied()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_group(&self.group, &other.group)?;
        let mut coords = self.coords.clone();
        for (i, c) in &other.coords {
            let e = coords.entry(*i).or_insert_with(Q::zero);
            *e = &*e + c;
        }
        Ok(Self::from_map_unchecked(&self.group, coords))
    }

    pub fn neg(&self) -> Self {
        let coords = self.coords.iter().map(|(i, c)| (*i, -c)).collect();
        Element {
            coords,
            group: self.group.clone(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn scalar_mul(&self, c: &Z) -> Self {
        let c = qint(c.clone());
        let coords = self.coords.iter().map(|(i, x)| (*i, x * &c)).collect();
        Self::from_map_unchecked(&self.group, coords)
    }

    pub fn scalar_mul_i64(&self, c: i64) -> Self {
        self.scalar_mul(&int(c))
    }

    /// Lexicographic comparison, index 0 most significant.
    pub fn compare(&self, other: &Self) -> Result<Ordering> {
        same_group(&self.group, &other.group)?;
        let diff = self.sub(other)?;
        Ok(match diff.coords.values().next() {
            None => Ordering::Equal,
            Some(c) if c.is_positive() => Ordering::Greater,
            Some(_) => Ordering::Less,
        })
    }

    /// The `y` with `c*y = self`, if it is a group element.
    pub fn divide_exact(&self, c: &Z) -> Result<Self> {
        if c.is_zero() {
            return Err(OagError::NotDivisible("0".into()));
        }
        let c = qint(c.clone());
        let coords: BTreeMap<usize, Q<Z>> = self.coords.iter().map(|(i, x)| (*i, x / &c)).collect();
        self.group
            .check_coords(&coords)
            .map_err(|e| OagError::NotDivisible(format!("{c}: {e}")))?;
        Ok(Element {
            coords,
            group: self.group.clone(),
        })
    }

    /// Coordinates as a window vector; `None` if the support leaves the window.
    pub fn to_window(&self, w: &Window) -> Option<Vec<Q<Z>>> {
        let mut v = vec![Q::zero(); w.dim()];
        for (i, c) in &self.coords {
            v[w.position(*i)?] = c.clone();
        }
        Some(v)
    }

    /// Inverse of [`Element::to_window`] for vectors known to lie in the group.
    pub fn from_window(group: &GroupHandle, w: &Window, v: &[Q<Z>]) -> Self {
        let coords = w
            .coords()
            .iter()
            .zip(v)
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (*i, c.clone()))
            .collect();
        Self::from_map_unchecked(group, coords)
    }

    /// Converts between scalar types.
    pub fn convert<Y: Scalar>(&self) -> Element<Y> {
        let coords = self
            .coords
            .iter()
            .map(|(i, c)| {
                let n: Y = c
                    .numer()
                    .to_string()
                    .parse()
                    .ok()
                    .expect("coefficient fits");
                let d: Y = c
                    .denom()
                    .to_string()
                    .parse()
                    .ok()
                    .expect("coefficient fits");
                (*i, Q::new(n, d))
            })
            .collect();
        Element {
            coords,
            group: self.group.clone(),
        }
    }

    pub fn parse(text: &str, group: &GroupHandle) -> Result<Self> {
        let terms = parse_terms::<Z>(text)?;
        Self::from_coords(group, terms)
    }

    /// Deterministic pseudo-random group member with support in
    /// `[0, support_bound)` and integer parts bounded by `coeff_bound`.
    pub fn random(group: &GroupHandle, support_bound: usize, coeff_bound: u64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_with(group, support_bound, coeff_bound, &mut rng)
    }

    pub fn random_with<R: Rng>(
        group: &GroupHandle,
        support_bound: usize,
        coeff_bound: u64,
        rng: &mut R,
    ) -> Self {
        let limit = group
            .universe()
            .map_or(support_bound, |k| k.min(support_bound))
            .max(1);
        let cb = coeff_bound.max(1) as i64;
        let mut coords: BTreeMap<usize, Q<Z>> = BTreeMap::new();
        for i in 0..limit {
            if rng.gen_bool(0.5) {
                continue;
            }
            let num = rng.gen_range(-cb..=cb);
            let mut c = qint::<Z>(int(num));
            if let CoeffRing::LocalAt(p) = group.coeff_ring() {
                if rng.gen_bool(0.3) {
                    let mut d = rng.gen_range(2..=7u64);
                    while d % p == 0 {
                        d += 1;
                    }
                    c = c / qint::<Z>(int(d as i64));
                }
            }
            coords.insert(i, c);
        }
        // repair constrained cell sums on their last in-range coordinate
        if group.has_cells() {
            let mut last: BTreeMap<usize, usize> = BTreeMap::new();
            let mut sums: BTreeMap<usize, Z> = BTreeMap::new();
            for i in 0..limit {
                if let Some(cell) = group.cell_of(i) {
                    if group.cell_constraint(cell).is_some() {
                        last.insert(cell, i);
                        if let Some(c) = coords.get(&i) {
                            let s = sums.entry(cell).or_insert_with(Z::zero);
                            *s = s.clone() + c.numer().clone();
                        }
                    }
                }
            }
            for (cell, s) in sums {
                let (p, n) = group.cell_constraint(cell).unwrap();
                let m: Z = prime_power(p, n);
                let fix = s.mod_floor(&m);
                if !fix.is_zero() {
                    let i = last[&cell];
                    let e = coords.entry(i).or_insert_with(Q::zero);
                    *e = &*e - qint::<Z>(fix);
                }
            }
        }
        Self::from_map_unchecked(group, coords)
    }
}

fn uses_polynomial_notation(spec: &GroupSpec) -> bool {
    matches!(spec, GroupSpec::PolyMod { .. } | GroupSpec::PolyPart { .. })
}

impl<Z: Scalar> fmt::Display for Element<Z> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coords.is_empty() {
            return write!(f, "0");
        }
        let poly = uses_polynomial_notation(self.group.spec());
        for (k, (i, c)) in self.coords.iter().enumerate() {
            let mag = c.abs();
            if k == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let basis = match (poly, *i) {
                (true, 0) => None,
                (true, 1) => Some("t".to_string()),
                (true, i) => Some(format!("t^{i}")),
                (false, i) => Some(format!("e{i}")),
            };
            match basis {
                None => write!(f, "{}", format_rational(&mag))?,
                Some(b) if mag.is_one() => write!(f, "{b}")?,
                Some(b) => write!(f, "{}*{b}", format_rational(&mag))?,
            }
        }
        Ok(())
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn nat(&mut self) -> Option<(usize, &'a str)> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        (self.pos > start).then(|| {
            (
                start,
                std::str::from_utf8(&self.src[start..self.pos]).unwrap(),
            )
        })
    }
}

fn parse_index(lx: &mut Lexer<'_>) -> Result<usize> {
    match lx.nat() {
        Some((at, s)) => s.parse().or_else(|_| parse_err(at, "index too large")),
        None => parse_err(lx.pos, "expected an index"),
    }
}

fn parse_basis(lx: &mut Lexer<'_>) -> Result<Option<usize>> {
    match lx.peek() {
        Some(b'e') => {
            lx.pos += 1;
            parse_index(lx).map(Some)
        }
        Some(b't') => {
            lx.pos += 1;
            if lx.peek() == Some(b'^') {
                lx.pos += 1;
                parse_index(lx).map(Some)
            } else {
                Ok(Some(1))
            }
        }
        _ => Ok(None),
    }
}

/// Parses `term {(+|-) term}` into `(index, coefficient)` pairs.
pub(crate) fn parse_terms<Z: Scalar>(text: &str) -> Result<Vec<(usize, Q<Z>)>> {
    let mut lx = Lexer {
        src: text.as_bytes(),
        pos: 0,
    };
    let mut out = Vec::new();
    if lx.peek().is_none() {
        return Ok(out);
    }
    let mut first = true;
    loop {
        let mut negative = false;
        match lx.peek() {
            Some(b'+') if !first => lx.pos += 1,
            Some(b'-') => {
                negative = true;
                lx.pos += 1;
            }
            Some(_) if first => {}
            Some(_) => return parse_err(lx.pos, "expected '+' or '-'"),
            None => break,
        }
        first = false;
        let (index, coeff) = match parse_basis(&mut lx)? {
            Some(i) => (i, Q::<Z>::one()),
            None => {
                let Some((at, num)) = lx.nat() else {
                    return parse_err(lx.pos, "expected a coefficient or basis element");
                };
                let num: Z = num.parse().or_else(|_| parse_err(at, "bad integer"))?;
                let mut c = qint(num);
                if lx.peek() == Some(b'/') {
                    lx.pos += 1;
                    let Some((dat, den)) = lx.nat() else {
                        return parse_err(lx.pos, "expected a denominator");
                    };
                    let den: Z = den.parse().or_else(|_| parse_err(dat, "bad integer"))?;
                    if den.is_zero() {
                        return parse_err(dat, "zero denominator");
                    }
                    c = Q::new(c.to_integer(), den);
                }
                if lx.peek() == Some(b'*') {
                    lx.pos += 1;
                    match parse_basis(&mut lx)? {
                        Some(i) => (i, c),
                        None => return parse_err(lx.pos, "expected 'e<n>', 't' or 't^<n>'"),
                    }
                } else {
                    (0, c)
                }
            }
        };
        out.push((index, if negative { -coeff } else { coeff }));
        if lx.peek().is_none() {
            break;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::make_group;
    use num_bigint::BigInt;

    type E = Element<BigInt>;

    fn q(n: i64, d: i64) -> Q<BigInt> {
        Q::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn arithmetic_examples() {
        let g = make_group(GroupSpec::free_lex(3)).unwrap();
        let a = E::from_ints(&g, &[1, 0, 0]).unwrap();
        let b = E::from_ints(&g, &[0, 1, 0]).unwrap();
        assert_eq!(a.add(&b).unwrap(), E::from_ints(&g, &[1, 1, 0]).unwrap());
        assert_eq!(
            E::basis(&g, 1).unwrap().scalar_mul_i64(3),
            E::from_ints(&g, &[0, 3]).unwrap()
        );
        assert!(a.scalar_mul_i64(0).is_zero());

        let l = make_group(GroupSpec::local_lex(2)).unwrap();
        let x = E::from_coords(&l, [(0, q(1, 3))]).unwrap();
        let y = E::from_coords(&l, [(0, q(2, 3))]).unwrap();
        assert_eq!(x.add(&y).unwrap(), E::basis(&l, 0).unwrap());
        assert!(E::from_coords(&l, [(0, q(1, 2))]).is_err());
    }

    #[test]
    fn order_examples() {
        let g = make_group(GroupSpec::free_lex(2)).unwrap();
        let a = E::from_ints(&g, &[1, -5]).unwrap();
        let b = E::from_ints(&g, &[0, 100]).unwrap();
        assert_eq!(a.compare(&b).unwrap(), Ordering::Greater);
        assert_eq!(a.compare(&a).unwrap(), Ordering::Equal);
        let pm = make_group(GroupSpec::poly_mod(2, 1)).unwrap();
        let two = E::parse("2", &pm).unwrap();
        let two_t = E::parse("2*t", &pm).unwrap();
        assert_eq!(two.compare(&two_t).unwrap(), Ordering::Greater);
        let other = make_group(GroupSpec::free_lex(3)).unwrap();
        assert_eq!(a.compare(&E::zero(&other)), Err(OagError::GroupMismatch));
    }

    #[test]
    fn divide_examples() {
        let l = make_group(GroupSpec::local_lex(3)).unwrap();
        let x = E::from_ints(&l, &[9, 3]).unwrap();
        assert_eq!(
            x.divide_exact(&BigInt::from(3)).unwrap(),
            E::from_ints(&l, &[3, 1]).unwrap()
        );
        let pm = make_group(GroupSpec::poly_mod(2, 2)).unwrap();
        let y = E::parse("4 + 4*t", &pm).unwrap();
        assert_eq!(
            y.divide_exact(&BigInt::from(2)).unwrap(),
            E::parse("2+2*t", &pm).unwrap()
        );
        // 2 + 2t has sum 4; its half has sum 2
        let two = E::parse("2 + 2*t", &pm).unwrap();
        assert!(matches!(
            two.divide_exact(&BigInt::from(2)),
            Err(OagError::NotDivisible(_))
        ));
    }

    #[test]
    fn parse_examples() {
        let l = make_group(GroupSpec::local_lex(2)).unwrap();
        let x = E::parse("3*e0 + 1/5*e2", &l).unwrap();
        assert_eq!(x.coeff(0), q(3, 1));
        assert_eq!(x.coeff(2), q(1, 5));
        assert!(E::parse("", &l).unwrap().is_zero());
        let pm = make_group(GroupSpec::poly_mod(2, 2)).unwrap();
        assert!(matches!(
            E::parse("4 + 2*t^3", &pm),
            Err(OagError::ConstraintViolation(_))
        ));
        assert!(matches!(E::parse("3*", &l), Err(OagError::Parse { .. })));
        assert!(matches!(E::parse("e1 e2", &l), Err(OagError::Parse { .. })));
    }

    #[test]
    fn format_round_trip() {
        let pm = make_group(GroupSpec::poly_mod(2, 2)).unwrap();
        let x = E::parse("-2 + t - 3*t^4", &pm).unwrap();
        assert_eq!(x.to_string(), "-2 + t - 3*t^4");
        assert_eq!(E::parse(&x.to_string(), &pm).unwrap(), x);
        let l = make_group(GroupSpec::local_lex(3)).unwrap();
        let y = E::parse("-1/2*e1 + e3", &l).unwrap();
        assert_eq!(E::parse(&y.to_string(), &l).unwrap(), y);
        assert_eq!(E::zero(&l).to_string(), "0");
    }

    #[test]
    fn random_elements_respect_constraints() {
        let pm = make_group(GroupSpec::poly_mod(2, 2)).unwrap();
        for seed in 0..200 {
            let x = E::random(&pm, 6, 5, seed);
            assert!(pm.check_coords(x.coords()).is_ok());
            assert_eq!(x, E::random(&pm, 6, 5, seed));
        }
    }
}
