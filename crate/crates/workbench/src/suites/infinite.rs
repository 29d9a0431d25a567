use oag_core::group::{Convex, GroupHandle};
use oag_core::subgroup::SubgroupExpr;
use serde_json::{json, Value};

use super::{expect_infinite, not_convex_generated, plus, scaled, sharp, values_json};
use crate::case::convex_chain;
use crate::error::Result;
use crate::report::CaseOutcome;
use crate::runner::{Context, Job};

/// Checks that every listed quotient is infinite at both caps; the first
/// finite one fails the case.
fn all_infinite(
    g: &GroupHandle,
    key: String,
    quotients: &[(&str, SubgroupExpr, SubgroupExpr)],
    caps: [u64; 2],
) -> oag_core::Result<CaseOutcome> {
    let mut detail = serde_json::Map::new();
    for (name, a, b) in quotients {
        let (values, witness) = expect_infinite(g, a, b, caps)?;
        detail.insert(name.to_string(), values_json(&values));
        if let Some(w) = witness {
            return Ok(CaseOutcome::fail(key, Value::Object(detail), w));
        }
    }
    Ok(CaseOutcome::pass(key, Value::Object(detail)))
}

fn strictly_below(alpha: Convex, d: Convex) -> bool {
    alpha != d && alpha.is_contained_in(d)
}

pub fn inf_right(ctx: &Context) -> Result<Vec<Job>> {
    let (g, p, caps) = (ctx.group(), ctx.p, ctx.case.caps());
    let chain = convex_chain(&g);
    let mut jobs = Vec::new();
    for &alpha in &chain {
        for s in 1..=ctx.case.s_max {
            for &d in chain.iter().filter(|&&d| strictly_below(alpha, d)) {
                for r in 1..=s.min(ctx.case.r_max) {
                    let g = g.clone();
                    let key = format!("alpha={alpha} D={d} r={r} s={s}");
                    jobs.push(Job::new(key.clone(), move |_| {
                        if !not_convex_generated(&g, alpha, p, s) {
                            return Ok(CaseOutcome::pass(key, json!({ "premise": false })));
                        }
                        let h = sharp(alpha, p, s);
                        let dd = SubgroupExpr::conv(d);
                        let pd = |e: u32| scaled(dd.clone(), p, e);
                        let meet_d = |t: u32| sharp(alpha, p, t).meet(dd.clone()).join(pd(1));
                        let quotients = [
                            ("shifted", h.clone().join(pd(r - 1)), h.clone().join(pd(r))),
                            ("inside_d_lower", dd.clone(), meet_d(s - r + 1)),
                            ("inside_d", dd.clone(), meet_d(s)),
                        ];
                        all_infinite(&g, key, &quotients, caps)
                    }));
                }
            }
        }
    }
    Ok(jobs)
}

pub fn left_nc(ctx: &Context) -> Result<Vec<Job>> {
    let (g, p, caps) = (ctx.group(), ctx.p, ctx.case.caps());
    let chain = convex_chain(&g);
    let mut jobs = Vec::new();
    for &alpha in &chain {
        // convex K above alpha, and beta^[p^t] for beta above alpha
        let mut above: Vec<SubgroupExpr> = Vec::new();
        for &beta in chain.iter().filter(|&&b| strictly_below(alpha, b)) {
            above.push(SubgroupExpr::conv(beta));
            above.extend((1..=ctx.case.s_max).map(|t| sharp(beta, p, t)));
        }
        for s in 1..=ctx.case.s_max {
            for k in &above {
                for r in 1..=s.min(ctx.case.r_max) {
                    let (g, k) = (g.clone(), k.clone());
                    let key = format!("alpha={alpha} K={k} r={r} s={s}");
                    jobs.push(Job::new(key.clone(), move |_| {
                        if !not_convex_generated(&g, alpha, p, s) {
                            return Ok(CaseOutcome::pass(key, json!({ "premise": false })));
                        }
                        let base = plus(sharp(alpha, p, s), p, r);
                        let cut = k
                            .clone()
                            .meet(SubgroupExpr::multiples(p, r - 1))
                            .join(base.clone());
                        let quotients = [
                            ("from_k", plus(k.clone(), p, r), base.clone()),
                            ("from_cut", cut, base),
                        ];
                        all_infinite(&g, key, &quotients, caps)
                    }));
                }
            }
        }
    }
    Ok(jobs)
}
