//! The lemma registry. Each suite turns a [`Context`] into independent
//! grid points.

use num_bigint::BigInt;
use oag_core::group::{Convex, GroupHandle, GroupSpec};
use oag_core::metrics::{index, index_with_transversal, IndexValue};
use oag_core::subgroup::{convexify_sharp, SubgroupExpr};
use serde_json::{json, Value};

use crate::error::{Result, WorkbenchError};
use crate::runner::{Context, Job};

mod cosets;
mod examples;
mod indices;
mod infinite;
mod membership;

pub struct Suite {
    pub id: &'static str,
    pub summary: &'static str,
    pub needs_group: bool,
    pub uses_prime: bool,
    /// Group used when the case names none.
    pub default_group: Option<fn() -> GroupSpec>,
    pub plan: fn(&Context) -> Result<Vec<Job>>,
}

fn polypart22() -> GroupSpec {
    GroupSpec::poly_part_uniform(2, 2)
}

fn locallex2() -> GroupSpec {
    GroupSpec::local_lex(2)
}

const fn suite(
    id: &'static str,
    summary: &'static str,
    plan: fn(&Context) -> Result<Vec<Job>>,
) -> Suite {
    Suite {
        id,
        summary,
        needs_group: true,
        uses_prime: true,
        default_group: None,
        plan,
    }
}

pub static REGISTRY: &[Suite] = &[
    suite("keylemma", "D^[p^s] ∩ p^r G = p^r D^[p^(s-r)], elementwise", membership::keylemma),
    suite("equal-p-div", "L + pG = K + pG iff L + p^r G = K + p^r G for convex L ≤ K", membership::equal_p_div),
    suite("same-above", "spine classes between two convex subgroups count the same mod pG and mod p^s G", membership::same_above),
    suite("nonconvex-cond", "α^[p^s] avoids every D + p^s G iff the three spine conditions hold", membership::nonconvex_cond),
    suite("inf-right", "[α^[p^s] + p^(r-1) D : α^[p^s] + p^r D] is infinite when α^[p^s] is not convex-generated", infinite::inf_right),
    suite("left-nc", "indices over α^[p^s] + p^r G from convex and sharp subgroups above α are infinite", infinite::left_nc),
    suite("aps-quot", "[α^[p^(s-1)] + p^r G : α^[p^s] + p^r G] is the product of the one-step quotients", indices::aps_quot),
    suite("idx-pow", "[G : p^r G] = [G : pG]^r", indices::idx_pow),
    suite("desc-inf", "[K + p^r G : p^r G] is infinite iff [(K ∩ p^(r-1) G) + p^r G : p^r G] is", indices::desc_inf),
    suite("tower", "[α^[p^s] + p^r G : p^r G] is the product of [α^[p^(s-i)] + pG : pG]", indices::tower),
    Suite {
        needs_group: false,
        uses_prime: false,
        ..suite("qe32", "coset saturation criterion agrees with enumeration", cosets::qe32)
    },
    Suite {
        needs_group: false,
        uses_prime: false,
        ..suite("qe33", "power-sum thresholds hold and are minimal", cosets::qe33)
    },
    suite("dim71", "dimension profile of {0}^[p^s] + pG over PolyMod(p,n) is 1 exactly at s = n", examples::dim71),
    suite("dim72", "dimension profile over PolyPart counts the cells with constraint (p,s)", examples::dim72),
    Suite {
        default_group: Some(polypart22),
        ..suite("cex72", "the non-piecewise-linear function: domain, values and confinement of linear candidates", examples::cex72)
    },
    Suite {
        default_group: Some(locallex2),
        uses_prime: false,
        ..suite("cex73", "the non-uniformizable family: no common translate for two levels", examples::cex73)
    },
];

pub fn lookup(id: &str) -> Result<&'static Suite> {
    REGISTRY
        .iter()
        .find(|s| s.id == id)
        .ok_or_else(|| WorkbenchError::UnknownLemma(id.to_string()))
}

pub fn ids() -> impl Iterator<Item = &'static str> {
    REGISTRY.iter().map(|s| s.id)
}

// ---------------------------------------------------------------------------
// expression helpers shared by the suites

/// `α^[p^s]`, with `s = 0` giving the whole group.
pub(crate) fn sharp(alpha: Convex, p: u64, s: u32) -> SubgroupExpr {
    if s == 0 {
        SubgroupExpr::full()
    } else {
        SubgroupExpr::sharp(alpha, p, s)
    }
}

/// `e + p^r G`.
pub(crate) fn plus(e: SubgroupExpr, p: u64, r: u32) -> SubgroupExpr {
    if r == 0 {
        SubgroupExpr::full()
    } else {
        e.join(SubgroupExpr::multiples(p, r))
    }
}

/// `p^r e`.
pub(crate) fn scaled(e: SubgroupExpr, p: u64, r: u32) -> SubgroupExpr {
    if r == 0 {
        e
    } else {
        e.scale(p, r)
    }
}

pub(crate) fn idx(
    g: &GroupHandle,
    a: &SubgroupExpr,
    b: &SubgroupExpr,
    cap: u64,
) -> oag_core::Result<IndexValue> {
    index::<BigInt>(g, a, b, cap)
}

/// Same value under the Finite/AtLeast semantics: equal finite values or
/// two lower bounds.
pub(crate) fn agree(x: IndexValue, y: IndexValue) -> bool {
    match (x, y) {
        (IndexValue::Finite { value: a }, IndexValue::Finite { value: b }) => a == b,
        (IndexValue::AtLeast { .. }, IndexValue::AtLeast { .. }) => true,
        _ => false,
    }
}

/// `x ≤ y` where a lower bound on the right dominates everything.
pub(crate) fn at_most(x: IndexValue, y: IndexValue) -> bool {
    match (x, y) {
        (_, IndexValue::AtLeast { .. }) => true,
        (IndexValue::Finite { value: a }, IndexValue::Finite { value: b }) => a <= b,
        (IndexValue::AtLeast { .. }, IndexValue::Finite { .. }) => false,
    }
}

/// `[A : B]` rendered as infinite: `AtLeast` at both caps. A finite value
/// comes back with its full transversal as the witness.
pub(crate) fn expect_infinite(
    g: &GroupHandle,
    a: &SubgroupExpr,
    b: &SubgroupExpr,
    caps: [u64; 2],
) -> oag_core::Result<(Vec<IndexValue>, Option<Value>)> {
    let mut values = Vec::new();
    for cap in caps {
        let (v, reps) = index_with_transversal::<BigInt>(g, a, b, cap)?;
        values.push(v);
        if v.is_finite() {
            let reps: Vec<String> = reps.iter().map(|x| x.to_string()).collect();
            return Ok((
                values,
                Some(
                    json!({ "larger": a.to_string(), "smaller": b.to_string(), "transversal": reps }),
                ),
            ));
        }
    }
    Ok((values, None))
}

/// Whether `α^[p^s]` differs from every `D + p^s G`.
pub(crate) fn not_convex_generated(g: &GroupHandle, alpha: Convex, p: u64, s: u32) -> bool {
    convexify_sharp::<BigInt>(g, alpha, p, s).convex.is_none()
}

pub(crate) fn values_json(vs: &[IndexValue]) -> Value {
    json!(vs.iter().map(|v| v.to_string()).collect::<Vec<_>>())
}
