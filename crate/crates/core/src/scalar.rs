//! Integer scalar abstraction.
//!
//! Every coordinate in this crate is an exact rational `Ratio<Z>` whose
//! numerator and denominator live in some integer type `Z`. The default is
//! [`num_bigint::BigInt`]; machine integers work for small experiments but can
//! overflow on long echelon computations.

use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{FromPrimitive, Signed, ToPrimitive};

/// Integer types usable as the coefficient scalar.
pub trait Scalar:
    Integer
    + Signed
    + Clone
    + Hash
    + Debug
    + Display
    + FromPrimitive
    + ToPrimitive
    + FromStr
    + Send
    + Sync
    + 'static
{
    fn from_prime(p: u64) -> Self {
        Self::from_u64(p).expect("prime does not fit the scalar type")
    }
}

impl<T> Scalar for T where
    T: Integer
        + Signed
        + Clone
        + Hash
        + Debug
        + Display
        + FromPrimitive
        + ToPrimitive
        + FromStr
        + Send
        + Sync
        + 'static
{
}

/// Exact rational over the scalar `Z`.
pub type Q<Z = BigInt> = Ratio<Z>;

pub(crate) fn int<Z: Scalar>(v: i64) -> Z {
    Z::from_i64(v).expect("small integer does not fit the scalar type")
}

pub(crate) fn qint<Z: Scalar>(v: Z) -> Q<Z> {
    Ratio::from_integer(v)
}

/// `p^e` as a scalar.
pub fn prime_power<Z: Scalar>(p: u64, e: u32) -> Z {
    let base = Z::from_prime(p);
    let mut acc = Z::one();
    for _ in 0..e {
        acc = acc * base.clone();
    }
    acc
}

/// p-adic valuation of a nonzero integer.
pub fn int_valuation<Z: Scalar>(x: &Z, p: u64) -> Option<u32> {
    if x.is_zero() {
        return None;
    }
    let pz = Z::from_prime(p);
    let mut v = 0;
    let mut cur = x.clone();
    loop {
        let (q, r) = cur.div_rem(&pz);
        if !r.is_zero() {
            return Some(v);
        }
        cur = q;
        v += 1;
    }
}

/// p-adic valuation of a nonzero rational (may be negative).
pub fn valuation<Z: Scalar>(x: &Q<Z>, p: u64) -> Option<i64> {
    let vn = int_valuation(x.numer(), p)? as i64;
    let vd = int_valuation(x.denom(), p).unwrap_or(0) as i64;
    Some(vn - vd)
}

/// Whether `d` divides the integer `x` (any sign).
pub fn int_divides<Z: Scalar>(d: &Z, x: &Z) -> bool {
    if d.is_zero() {
        return x.is_zero();
    }
    x.mod_floor(d).is_zero()
}

/// Multiplicative inverse of `a` modulo `m` (`m > 1`, `gcd(a,m) = 1`).
pub(crate) fn mod_inverse<Z: Scalar>(a: &Z, m: &Z) -> Option<Z> {
    let a = a.mod_floor(m);
    let eg = a.extended_gcd(m);
    if !eg.gcd.is_one() {
        return None;
    }
    Some(eg.x.mod_floor(m))
}

/// Renders `x` as `a` or `a/b`.
pub fn format_rational<Z: Scalar>(x: &Q<Z>) -> String {
    if x.denom().is_one() {
        format!("{}", x.numer())
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Prime factorisation of a positive integer as `(prime, exponent)` pairs.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        let mut e = 0;
        while n % d == 0 {
            n /= d;
            e += 1;
        }
        if e > 0 {
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    #[test]
    fn valuations() {
        let x: Q<BigInt> = Ratio::new(BigInt::from(12), BigInt::from(5));
        assert_eq!(valuation(&x, 2), Some(2));
        assert_eq!(valuation(&x, 5), Some(-1));
        assert_eq!(valuation(&Q::<BigInt>::zero(), 3), None);
        assert_eq!(int_valuation(&-8i64, 2), Some(3));
    }

    #[test]
    fn inverses_and_primes() {
        assert_eq!(mod_inverse(&3i64, &8), Some(3));
        assert_eq!(mod_inverse(&2i64, &8), None);
        assert!(is_prime(2) && is_prime(97) && !is_prime(1) && !is_prime(91));
        assert_eq!(factorize(72), vec![(2, 3), (3, 2)]);
        assert_eq!(prime_power::<i64>(3, 4), 81);
    }
}
