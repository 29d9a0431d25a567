use oag_core::metrics::IndexValue;
use oag_core::subgroup::SubgroupExpr;
use serde_json::json;

use super::{agree, at_most, idx, plus, scaled, sharp, values_json};
use crate::case::convex_chain;
use crate::error::Result;
use crate::report::CaseOutcome;
use crate::runner::{Context, Job};

/// Compares `whole` with the product of `steps`. A mismatch is a failure;
/// the witness names the quotient and its factors.
fn product_case(
    key: String,
    whole: IndexValue,
    steps: &[IndexValue],
    cap: u64,
    what: &str,
) -> CaseOutcome {
    let prod = IndexValue::product(steps, cap);
    let detail = json!({ "whole": whole.to_string(), "product": prod.to_string(), "factors": values_json(steps) });
    CaseOutcome::check(
        key,
        agree(whole, prod),
        detail,
        || json!({ "quotient": what }),
    )
}

pub fn aps_quot(ctx: &Context) -> Result<Vec<Job>> {
    let (g, p, cap) = (ctx.group(), ctx.p, ctx.case.cap);
    let mut jobs = Vec::new();
    for alpha in convex_chain(&g) {
        for s in 2..=ctx.case.s_max {
            for r in 1..s.min(ctx.case.r_max + 1) {
                let g = g.clone();
                let key = format!("alpha={alpha} r={r} s={s}");
                jobs.push(Job::new(key.clone(), move |_| {
                    let quotient = |e: u32| -> oag_core::Result<IndexValue> {
                        idx(&g, &plus(sharp(alpha, p, s - 1), p, e), &plus(sharp(alpha, p, s), p, e), cap)
                    };
                    let whole = quotient(r)?;
                    let steps = (1..=r)
                        .map(|i| idx(&g, &plus(sharp(alpha, p, s - i), p, 1), &plus(sharp(alpha, p, s - i + 1), p, 1), cap))
                        .collect::<oag_core::Result<Vec<_>>>()?;
                    let what = format!("[{}^[p^{}] + p^{r}G : {}^[p^{s}] + p^{r}G]", alpha, s - 1, alpha);
                    let outcome = product_case(key.clone(), whole, &steps, cap, &what);
                    if outcome.status != crate::report::Status::Pass {
                        return Ok(outcome);
                    }
                    // the quotient only grows with the exponent
                    for i in 1..r {
                        let lower = quotient(i)?;
                        if !at_most(lower, whole) {
                            let detail = json!({ "exponent": i, "lower": lower.to_string(), "upper": whole.to_string() });
                            return Ok(CaseOutcome::fail(key, detail, json!({ "quotient": what })));
                        }
                    }
                    Ok(outcome)
                }));
            }
        }
    }
    Ok(jobs)
}

pub fn idx_pow(ctx: &Context) -> Result<Vec<Job>> {
    let (g, p, cap) = (ctx.group(), ctx.p, ctx.case.cap);
    let mut jobs = Vec::new();
    for r in 1..=ctx.case.r_max {
        let g = g.clone();
        let key = format!("r={r}");
        jobs.push(Job::new(key.clone(), move |_| {
            let full = SubgroupExpr::full();
            let base = idx(&g, &full, &SubgroupExpr::multiples(p, 1), cap)?;
            let whole = idx(&g, &full, &SubgroupExpr::multiples(p, r), cap)?;
            let layer = idx(
                &g,
                &SubgroupExpr::multiples(p, r - 1),
                &SubgroupExpr::multiples(p, r),
                cap,
            )?;
            let mut outcome = product_case(key, whole, &vec![base; r as usize], cap, "[G : p^r G]");
            if !agree(layer, base) {
                outcome.status = crate::report::Status::Fail;
                outcome.witness =
                    Some(json!({ "quotient": "[p^(r-1) G : p^r G]", "value": layer.to_string() }));
            }
            Ok(outcome)
        }));
    }
    Ok(jobs)
}

pub fn desc_inf(ctx: &Context) -> Result<Vec<Job>> {
    let (g, p, cap) = (ctx.group(), ctx.p, ctx.case.cap);
    let chain = convex_chain(&g);
    let mut ks: Vec<(SubgroupExpr, bool)> = chain
        .iter()
        .map(|&c| (SubgroupExpr::conv(c), true))
        .collect();
    for &alpha in &chain {
        ks.extend((1..=ctx.case.s_max).map(|s| (sharp(alpha, p, s), false)));
    }
    let mut jobs = Vec::new();
    for (k, convex) in ks {
        for r in 1..=ctx.case.r_max {
            let (g, k) = (g.clone(), k.clone());
            let key = format!("K={k} r={r}");
            jobs.push(Job::new(key.clone(), move |_| {
                let mult = SubgroupExpr::multiples(p, r);
                let left = idx(&g, &plus(k.clone(), p, r), &mult, cap)?;
                let cut = k
                    .clone()
                    .meet(SubgroupExpr::multiples(p, r - 1))
                    .join(mult.clone());
                let right = idx(&g, &cut, &mult, cap)?;
                let mut detail = json!({ "whole": left.to_string(), "cut": right.to_string() });
                if left.is_finite() != right.is_finite() {
                    return Ok(CaseOutcome::fail(
                        key,
                        detail,
                        json!({ "quotient": format!("[{k} + p^{r}G : p^{r}G]") }),
                    ));
                }
                if convex {
                    // [K + p^r G : p^r G] = [K : pK]^r and the cut layer is K / pK
                    let layer = idx(&g, &k, &scaled(k.clone(), p, 1), cap)?;
                    let power = IndexValue::product(&vec![layer; r as usize], cap);
                    detail["k_mod_pk"] = json!(layer.to_string());
                    if !agree(left, power) || !agree(right, layer) {
                        return Ok(CaseOutcome::fail(
                            key,
                            detail,
                            json!({ "quotient": format!("[{k} : p {k}]") }),
                        ));
                    }
                }
                Ok(CaseOutcome::pass(key, detail))
            }));
        }
    }
    Ok(jobs)
}

pub fn tower(ctx: &Context) -> Result<Vec<Job>> {
    let (g, p, cap) = (ctx.group(), ctx.p, ctx.case.cap);
    let mut jobs = Vec::new();
    for alpha in convex_chain(&g) {
        for s in 1..=ctx.case.s_max {
            for r in 1..=s.min(ctx.case.r_max) {
                let g = g.clone();
                let key = format!("alpha={alpha} r={r} s={s}");
                jobs.push(Job::new(key.clone(), move |_| {
                    let mult = |e: u32| SubgroupExpr::multiples(p, e);
                    let h = sharp(alpha, p, s);
                    let whole = idx(&g, &plus(h.clone(), p, r), &mult(r), cap)?;
                    let steps = (0..r)
                        .map(|i| idx(&g, &plus(sharp(alpha, p, s - i), p, 1), &mult(1), cap))
                        .collect::<oag_core::Result<Vec<_>>>()?;
                    let what = format!("[{h} + p^{r}G : p^{r}G]");
                    let outcome = product_case(key.clone(), whole, &steps, cap, &what);
                    if outcome.status != crate::report::Status::Pass {
                        return Ok(outcome);
                    }
                    // bounded by the r-th power of the lowest layer
                    let cut = idx(
                        &g,
                        &h.clone().meet(mult(r - 1)).join(mult(r)),
                        &mult(r),
                        cap,
                    )?;
                    let bound = IndexValue::product(&vec![cut; r as usize], cap);
                    if !at_most(whole, bound) {
                        let detail =
                            json!({ "whole": whole.to_string(), "layer_power": bound.to_string() });
                        return Ok(CaseOutcome::fail(key, detail, json!({ "quotient": what })));
                    }
                    Ok(outcome)
                }));
            }
        }
    }
    Ok(jobs)
}
