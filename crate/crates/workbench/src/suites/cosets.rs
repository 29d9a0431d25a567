use oag_core::cosetlogic::{
    brute_membership, random_subgroup, random_system, saturation_membership, threshold_holds,
    threshold_n, validate_system, FiniteAmbient,
};
use serde_json::json;

use crate::error::Result;
use crate::report::CaseOutcome;
use crate::runner::{Context, Job};

pub const DEFAULT_AMBIENTS: [&[u64]; 4] = [&[4, 4], &[8], &[9, 3], &[8, 8]];

/// Saturating subgroups tried per system: the trivial one and random ones.
const GPRIMES: usize = 3;

pub fn qe32(ctx: &Context) -> Result<Vec<Job>> {
    let ambients: Vec<Vec<u64>> = if ctx.case.ambients.is_empty() {
        DEFAULT_AMBIENTS.iter().map(|m| m.to_vec()).collect()
    } else {
        ctx.case.ambients.clone()
    };
    let mut jobs = Vec::new();
    for moduli in ambients {
        let amb = FiniteAmbient::new(&moduli)?;
        let name = moduli
            .iter()
            .map(|m| m.to_string())
            .collect::<Vec<_>>()
            .join("x");
        for i in 0..ctx.case.samples {
            let amb = amb.clone();
            let key = format!("ambient={name} system={i:04}");
            jobs.push(Job::new(key.clone(), move |rng| {
                let sys = random_system(&amb, 4, rng)?;
                let problems = validate_system(&sys, &amb);
                if !problems.is_empty() {
                    return Ok(CaseOutcome::fail(key, json!({ "invalid": problems }), json!(sys)));
                }
                let elements = amb.elements()?;
                let mut gprimes = vec![Vec::new()];
                gprimes.extend((1..GPRIMES).map(|_| random_subgroup(&amb, rng)));
                for gp in &gprimes {
                    for y in &elements {
                        let fast = saturation_membership(&sys, &amb, gp, y)?;
                        let slow = brute_membership(&sys, &amb, gp, y)?;
                        if fast != slow {
                            let detail = json!({ "criterion": fast, "enumeration": slow });
                            return Ok(CaseOutcome::fail(key, detail, json!({ "system": sys, "gprime": gp, "y": y })));
                        }
                    }
                }
                let detail = json!({ "exclusions": sys.exclusions.len(), "gprimes": GPRIMES, "points": elements.len() });
                Ok(CaseOutcome::pass(key, detail))
            }));
        }
    }
    Ok(jobs)
}

/// Values settled by exhaustive search.
const KNOWN_THRESHOLDS: [((u64, usize), u32); 2] = [((2, 1), 1), ((2, 2), 2)];

pub fn qe33(_ctx: &Context) -> Result<Vec<Job>> {
    let mut jobs = Vec::new();
    for n in [2u64, 3] {
        for k in 1..=4usize {
            let key = format!("n={n} k={k}");
            jobs.push(Job::new(key.clone(), move |_| {
                let big_n = threshold_n(n, k);
                // recheck on a larger exponent box than the search used
                let wide = big_n + 2;
                let holds = threshold_holds(n, k, big_n, wide);
                let minimal = big_n == 1 || !threshold_holds(n, k, big_n - 1, wide);
                let expected = KNOWN_THRESHOLDS.iter().find(|(nk, _)| *nk == (n, k)).map(|&(_, v)| v);
                let matches = expected.is_none_or(|v| v == big_n);
                let detail = json!({ "threshold": big_n, "exponent_box": wide, "holds": holds, "minimal": minimal, "expected": expected });
                Ok(CaseOutcome::check(key, holds && minimal && matches, detail, || json!({ "n": n, "k": k, "N": big_n })))
            }));
        }
    }
    Ok(jobs)
}
