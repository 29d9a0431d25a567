use num_bigint::BigInt;
use oag_core::functions::{
    build_counterexample_72, confinement_with_values, conflict_73, counterexample_domain,
    counterexample_prime, counterexample_target, eval_piecewise, f_alpha_73, translate_check_73,
    ConflictVerdict,
};
use oag_core::group::{Convex, GroupHandle, GroupSpec};
use oag_core::metrics::{index_with_transversal, IndexValue};
use oag_core::subgroup::{coset_eq, member, random_member, SubgroupExpr};
use oag_core::{Elem, OagError};
use rand::Rng;
use serde_json::{json, Value};

use crate::error::Result;
use crate::profile::{dim_at, profile_pair};
use crate::report::CaseOutcome;
use crate::runner::{Context, Job};

/// A transversal of the profile quotient, as the witness for a wrong
/// dimension.
fn profile_witness(g: &GroupHandle, p: u64, s: u32, cap: u64) -> Value {
    let (a, b) = profile_pair(p, s);
    match index_with_transversal::<BigInt>(g, &a, &b, cap) {
        Ok((v, reps)) => json!({
            "index": v.to_string(),
            "transversal": reps.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
        }),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

/// Expected dimension: `Some(d)` finite, `None` infinite.
fn dim_case(ctx: &Context, s: u32, p: u64, expected: Option<u64>) -> Job {
    let (g, caps) = (ctx.group(), ctx.case.caps());
    let key = format!("s={s}");
    Job::new(key.clone(), move |_| {
        let got = dim_at(&g, p, s, caps[0])?;
        let mut detail = json!({ "dim": got.to_string(), "expected": expected.map_or("infinite".into(), |d| d.to_string()) });
        Ok(match (expected, got) {
            (Some(d), IndexValue::Finite { value }) => {
                CaseOutcome::check(key, d == value, detail, || {
                    profile_witness(&g, p, s, caps[0])
                })
            }
            (Some(_), IndexValue::AtLeast { .. }) => CaseOutcome::inconclusive(key, detail),
            (None, IndexValue::Finite { .. }) => {
                CaseOutcome::fail(key, detail, profile_witness(&g, p, s, caps[0]))
            }
            (None, IndexValue::AtLeast { .. }) => {
                let again = dim_at(&g, p, s, caps[1])?;
                detail["dim_at_second_cap"] = json!(again.to_string());
                CaseOutcome::check(key, !again.is_finite(), detail, || {
                    profile_witness(&g, p, s, caps[1])
                })
            }
        })
    })
}

pub fn dim71(ctx: &Context) -> Result<Vec<Job>> {
    let Some(GroupSpec::PolyMod { p, n }) = ctx.declared else {
        return Err(ctx.incompatible());
    };
    Ok((1..=ctx.case.s_max.max(1))
        .map(|s| dim_case(ctx, s, p, Some(u64::from(s == n))))
        .collect())
}

pub fn dim72(ctx: &Context) -> Result<Vec<Job>> {
    let Some(GroupSpec::PolyPart {
        constraints,
        default,
    }) = &ctx.declared
    else {
        return Err(ctx.incompatible());
    };
    let p = ctx.p;
    Ok((1..=ctx.case.s_max.max(1))
        .map(|s| {
            let count = constraints.iter().filter(|c| (c.p, c.n) == (p, s)).count() as u64;
            let expected = if *default == Some((p, s)) {
                None
            } else {
                Some(count)
            };
            dim_case(ctx, s, p, expected)
        })
        .collect())
}

pub fn cex72(ctx: &Context) -> Result<Vec<Job>> {
    let g = ctx.group();
    match counterexample_prime(&g) {
        Ok(_) => {}
        Err(OagError::WrongFamily(_)) => return Err(ctx.incompatible()),
        Err(e) => return Err(e.into()),
    }
    let samples = ctx.case.samples;
    let mut jobs = Vec::new();

    let gd = g.clone();
    jobs.push(Job::new("domain", move |rng| {
        let p = counterexample_prime(&gd)?;
        let f = build_counterexample_72::<BigInt>(&gd)?;
        let dom = counterexample_domain(p);
        let (mut inside, mut outside) = (0, 0);
        for _ in 0..samples {
            let x: Elem = if rng.gen_bool(0.5) {
                random_member(&gd, &dom, 6, rng)
            } else {
                Elem::random_with(&gd, 6, 3, rng)
            };
            let defined = !eval_piecewise(&f, std::slice::from_ref(&x))?.is_empty();
            let in_dom = member(&dom, &x)?;
            if defined != in_dom {
                let detail =
                    json!({ "defined": defined, "in_domain": in_dom, "domain": dom.to_string() });
                return Ok(CaseOutcome::fail("domain", detail, json!(x.to_string())));
            }
            if in_dom {
                inside += 1;
            } else {
                outside += 1;
            }
        }
        Ok(CaseOutcome::pass(
            "domain",
            json!({ "domain": dom.to_string(), "inside": inside, "outside": outside }),
        ))
    }));

    let gv = g.clone();
    jobs.push(Job::new("values", move |rng| {
        let p = counterexample_prime(&gv)?;
        let f = build_counterexample_72::<BigInt>(&gv)?;
        let target = counterexample_target(p);
        let first = SubgroupExpr::sharp_shift(Convex::Zero, p, 2, 2);
        let second = SubgroupExpr::sharp_shift(Convex::Zero, p, 3, 1);
        let (meet_index, _) = index_with_transversal::<BigInt>(
            &gv,
            &first.clone().meet(second.clone()),
            &target,
            32,
        )?;
        let mut detail = json!({ "meet_over_target": meet_index.to_string() });
        if meet_index != IndexValue::finite(1) {
            return Ok(CaseOutcome::fail(
                "values",
                detail,
                json!({ "quotient": "meet of leaf targets over target" }),
            ));
        }
        let points = samples.min(100);
        for _ in 0..points {
            let x: Elem = random_member(&gv, &counterexample_domain(p), 6, rng);
            let v = eval_piecewise(&f, std::slice::from_ref(&x))?;
            let ok = v.len() == 1 && {
                let y = &v.reps[0];
                coset_eq(&first, y, &x)? && member(&second, y)?
            };
            if !ok {
                return Ok(CaseOutcome::fail("values", detail, json!(x.to_string())));
            }
        }
        detail["points"] = json!(points);
        Ok(CaseOutcome::pass("values", detail))
    }));

    let gc = g.clone();
    jobs.push(Job::new("confinement", move |rng| {
        let p = counterexample_prime(&gc)?;
        let f = build_counterexample_72::<BigInt>(&gc)?;
        let dom = counterexample_domain(p);
        let sample: Vec<Elem> = (0..100)
            .map(|i| if i % 4 == 3 { Elem::random_with(&gc, 5, 3, rng) } else { random_member(&gc, &dom, 5, rng) })
            .collect();
        let values = sample.iter().map(|x| eval_piecewise(&f, std::slice::from_ref(x))).collect::<oag_core::Result<Vec<_>>>()?;
        let candidates = (samples / 5).max(1);
        let mut agreeing = 0;
        for k in 0..candidates {
            let a = rng.gen_range(-4..=4);
            let b = [1, -1, 2, -2, 3, 4][rng.gen_range(0..6)];
            // every third candidate is steered through a sample point
            let g0: Elem = if k % 3 == 0 {
                let x = &sample[rng.gen_range(0..sample.len())];
                x.scalar_mul_i64(b).sub(&x.scalar_mul_i64(a))?
            } else {
                Elem::random_with(&gc, 4, 3, rng)
            };
            let report = confinement_with_values(&f, (a, b, &g0), &sample, &values)?;
            if !report.passes() {
                return Ok(CaseOutcome::fail("confinement", json!({ "candidate": k }), json!(report)));
            }
            agreeing += usize::from(report.agreement_size >= 2);
        }
        let detail = json!({ "candidates": candidates, "points": sample.len(), "nontrivial_agreement": agreeing });
        Ok(CaseOutcome::pass("confinement", detail))
    }));
    Ok(jobs)
}

pub fn cex73(ctx: &Context) -> Result<Vec<Job>> {
    if !matches!(ctx.declared, Some(GroupSpec::LocalLex { p: 2 })) {
        return Err(ctx.incompatible());
    }
    let mut jobs = Vec::new();
    for j in 2..=ctx.case.j_max {
        for i in 1..j {
            let key = format!("conflict i={i:02} j={j:02}");
            jobs.push(Job::new(key.clone(), move |_| {
                let r = conflict_73(i, j)?;
                let ok = r.verdict == ConflictVerdict::Unsatisfiable { coordinate: i - 1 }
                    && r.grid_common.is_empty()
                    && r.grid_checked == 1 << j;
                let detail = json!({ "argument": r.argument, "grid_checked": r.grid_checked });
                Ok(CaseOutcome::check(key, ok, detail, || json!(r)))
            }));
        }
    }
    let (g, samples) = (ctx.group(), ctx.case.samples);
    jobs.push(Job::new("translate", move |rng| {
        for _ in 0..samples {
            let i = rng.gen_range(1..=5);
            let x: Elem = Elem::random_with(&g, 6, 3, rng);
            let t: Elem = Elem::random_with(&g, i + 1, 3, rng);
            let y = x.add(&t)?;
            let quick = translate_check_73(&t, i)?;
            let direct = f_alpha_73(i, &x, &y)?;
            if quick != direct {
                let detail = json!({ "i": i, "translate_check": quick, "direct": direct });
                return Ok(CaseOutcome::fail(
                    "translate",
                    detail,
                    json!({ "x": x.to_string(), "g": t.to_string() }),
                ));
            }
        }
        Ok(CaseOutcome::pass("translate", json!({ "pairs": samples })))
    }));
    Ok(jobs)
}
