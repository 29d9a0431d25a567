use num_bigint::BigInt;
use oag_core::group::{Convex, GroupHandle};
use oag_core::subgroup::{
    convexify_sharp, member, random_member, spine_level_realized, subgroup_eq, SubgroupEquality,
    SubgroupExpr,
};
use oag_core::{Elem, OagError};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::{plus, scaled, sharp};
use crate::case::convex_chain;
use crate::error::Result;
use crate::report::CaseOutcome;
use crate::runner::{Context, Job};

/// Levels probed below `{0}` when the chain is infinite.
const SPINE_PROBE: usize = 6;

/// Plain random elements, multiples of `p^r` and members of either side,
/// so both sides of the equivalence are hit often.
fn sample(
    g: &GroupHandle,
    p: u64,
    r: u32,
    sides: [&SubgroupExpr; 2],
    rng: &mut ChaCha8Rng,
) -> Elem {
    let x = Elem::random_with(g, 6, 6, rng);
    match rng.gen_range(0..4) {
        0 => x,
        1 => x.scalar_mul(&BigInt::from(p).pow(r)),
        k => random_member(g, sides[k - 2], 6, rng),
    }
}

pub fn keylemma(ctx: &Context) -> Result<Vec<Job>> {
    let (g, p, samples) = (ctx.group(), ctx.p, ctx.case.samples);
    let mut jobs = Vec::new();
    for d in convex_chain(&g) {
        for s in 1..=ctx.case.s_max {
            for r in 1..=s.min(ctx.case.r_max) {
                let g = g.clone();
                let key = format!("D={d} r={r} s={s}");
                jobs.push(Job::new(key.clone(), move |rng| {
                    let whole = sharp(d, p, s);
                    let mult = SubgroupExpr::multiples(p, r);
                    let rest = sharp(d, p, s - r);
                    let left = whole.clone().meet(mult.clone());
                    let right = scaled(rest.clone(), p, r);
                    let pr = BigInt::from(p).pow(r);
                    let mut in_both = 0;
                    for _ in 0..samples {
                        let x = sample(&g, p, r, [&left, &right], rng);
                        let lhs = member(&whole, &x)? && member(&mult, &x)?;
                        let rhs = match x.divide_exact(&pr) {
                            Ok(y) => member(&rest, &y)?,
                            Err(OagError::NotDivisible(_)) => false,
                            Err(e) => return Err(e),
                        };
                        if lhs != rhs {
                            let detail = json!({ "left_side": lhs, "right_side": rhs });
                            return Ok(CaseOutcome::fail(key, detail, json!(x.to_string())));
                        }
                        in_both += usize::from(lhs);
                    }
                    Ok(CaseOutcome::pass(
                        key,
                        json!({ "samples": samples, "in_both": in_both }),
                    ))
                }));
            }
        }
    }
    Ok(jobs)
}

fn eq_outcome(e: &SubgroupEquality) -> Option<bool> {
    match e {
        SubgroupEquality::EqualByNormalForm => Some(true),
        SubgroupEquality::NotEqual(_) => Some(false),
        SubgroupEquality::UndecidedAfterSampling => None,
    }
}

pub fn equal_p_div(ctx: &Context) -> Result<Vec<Job>> {
    let (g, p, samples) = (ctx.group(), ctx.p, ctx.case.samples);
    let chain = convex_chain(&g);
    let mut jobs = Vec::new();
    for &l in &chain {
        for &k in &chain {
            if l == k || !l.is_contained_in(k) {
                continue;
            }
            for r in 2..=ctx.case.r_max.max(2) {
                let g = g.clone();
                let key = format!("L={l} K={k} r={r}");
                jobs.push(Job::new(key.clone(), move |rng| {
                    let seed = rng.gen();
                    let at = |c: Convex, e: u32| plus(SubgroupExpr::conv(c), p, e);
                    let one = subgroup_eq::<BigInt>(&g, &at(l, 1), &at(k, 1), samples, seed)?;
                    let many = subgroup_eq::<BigInt>(&g, &at(l, r), &at(k, r), samples, seed)?;
                    let detail = json!({ "equal_mod_p": eq_outcome(&one), "equal_mod_p^r": eq_outcome(&many) });
                    Ok(match (eq_outcome(&one), eq_outcome(&many)) {
                        (Some(a), Some(b)) if a == b => CaseOutcome::pass(key, detail),
                        (Some(_), Some(_)) => {
                            let w = [&one, &many].into_iter().find_map(|e| match e {
                                SubgroupEquality::NotEqual(x) => Some(x.to_string()),
                                _ => None,
                            });
                            CaseOutcome::fail(key, detail, json!(w))
                        }
                        _ => CaseOutcome::inconclusive(key, detail),
                    })
                }));
            }
        }
    }
    Ok(jobs)
}

/// Realized spine levels strictly between `d` (above) and `alpha` (below).
fn levels_between(g: &GroupHandle, p: u64, alpha: Convex, d: Convex) -> Vec<usize> {
    let lo = d.level().unwrap_or(usize::MAX);
    let hi = match (alpha.level(), g.universe()) {
        (Some(a), _) => a,
        (None, Some(k)) => k,
        (None, None) => lo + 1 + SPINE_PROBE,
    };
    (lo + 1..hi)
        .filter(|&j| spine_level_realized::<BigInt>(g, p, j))
        .collect()
}

/// Number of distinct `Tail(j) + p^s G` over the given levels; `None` if
/// some comparison was undecided.
fn distinct_classes(
    g: &GroupHandle,
    p: u64,
    s: u32,
    levels: &[usize],
) -> oag_core::Result<Option<usize>> {
    let mut reps: Vec<SubgroupExpr> = Vec::new();
    for &j in levels {
        let e = plus(SubgroupExpr::tail(j), p, s);
        let mut fresh = true;
        for r in &reps {
            match subgroup_eq::<BigInt>(g, r, &e, 0, 0)? {
                SubgroupEquality::EqualByNormalForm => fresh = false,
                SubgroupEquality::NotEqual(_) => {}
                SubgroupEquality::UndecidedAfterSampling => return Ok(None),
            }
        }
        if fresh {
            reps.push(e);
        }
    }
    Ok(Some(reps.len()))
}

pub fn same_above(ctx: &Context) -> Result<Vec<Job>> {
    let (g, p) = (ctx.group(), ctx.p);
    let chain = convex_chain(&g);
    let mut jobs = Vec::new();
    for &alpha in &chain {
        for &d in &chain {
            if alpha == d || !alpha.is_contained_in(d) {
                continue;
            }
            for s in 2..=ctx.case.s_max.max(2) {
                let g = g.clone();
                let key = format!("alpha={alpha} D={d} s={s}");
                jobs.push(Job::new(key.clone(), move |_| {
                    let levels = levels_between(&g, p, alpha, d);
                    let one = distinct_classes(&g, p, 1, &levels)?;
                    let many = distinct_classes(&g, p, s, &levels)?;
                    let detail =
                        json!({ "levels": levels, "classes_mod_p": one, "classes_mod_p^s": many });
                    Ok(match (one, many) {
                        (Some(a), Some(b)) => CaseOutcome::check(key, a == b, detail, || {
                            json!(levels
                                .iter()
                                .map(|j| format!("tail({j})"))
                                .collect::<Vec<_>>())
                        }),
                        _ => CaseOutcome::inconclusive(key, detail),
                    })
                }));
            }
        }
    }
    Ok(jobs)
}

pub fn nonconvex_cond(ctx: &Context) -> Result<Vec<Job>> {
    let (g, p, s_max) = (ctx.group(), ctx.p, ctx.case.s_max);
    let mut jobs = Vec::new();
    for alpha in convex_chain(&g) {
        let g = g.clone();
        let key = format!("alpha={alpha}");
        jobs.push(Job::new(key.clone(), move |_| {
            let mut rows = Vec::new();
            let mut shapes = Vec::new();
            for s in 1..=s_max {
                let rep = convexify_sharp::<BigInt>(&g, alpha, p, s);
                let nonconvex = rep.convex.is_none();
                let row = json!({
                    "s": s,
                    "convex": rep.convex.map(|c| c.to_string()),
                    "unbounded_between": rep.unbounded_between,
                    "meet_from_above": rep.meet_from_above,
                    "attained": rep.attained.as_ref().map(|a| a.to_string()),
                });
                if nonconvex != rep.all_conditions() {
                    return Ok(CaseOutcome::fail(key, json!(rows), row));
                }
                rows.push(row);
                shapes.push(nonconvex);
            }
            // for spine members the answer does not depend on s
            let in_spine = match alpha {
                Convex::Zero => true,
                Convex::Tail(j) => j > 0 && spine_level_realized::<BigInt>(&g, p, j),
            };
            let steady = shapes.windows(2).all(|w| w[0] == w[1]);
            Ok(CaseOutcome::check(
                key,
                !in_spine || steady,
                json!(rows),
                || json!(rows),
            ))
        }));
    }
    Ok(jobs)
}
