use std::time::Instant;

use oag_core::group::{make_group, GroupHandle, GroupSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::case::{mutate_constraint, natural_prime, LemmaCase};
use crate::error::{Result, WorkbenchError};
use crate::report::{CaseOutcome, Status, VerificationReport};
use crate::suites;

/// One grid point. The closure receives a generator seeded from the suite
/// seed and the key, so results do not depend on scheduling.
pub struct Job {
    pub key: String,
    pub run: Box<dyn FnOnce(&mut ChaCha8Rng) -> oag_core::Result<CaseOutcome> + Send>,
}

impl Job {
    pub fn new(
        key: impl Into<String>,
        run: impl FnOnce(&mut ChaCha8Rng) -> oag_core::Result<CaseOutcome> + Send + 'static,
    ) -> Self {
        Job {
            key: key.into(),
            run: Box::new(run),
        }
    }
}

/// What a suite sees: the group it computes in, the spec its expectations
/// come from (they differ only under mutation) and the prime.
#[derive(Clone)]
pub struct Context {
    pub case: LemmaCase,
    pub group: Option<GroupHandle>,
    pub declared: Option<GroupSpec>,
    pub p: u64,
}

impl Context {
    pub fn group(&self) -> GroupHandle {
        self.group.clone().expect("suite requires a group")
    }

    pub fn incompatible(&self) -> WorkbenchError {
        WorkbenchError::IncompatibleFamily {
            lemma: self.case.lemma.clone(),
            group: self
                .declared
                .as_ref()
                .map_or("no group".into(), |s| s.to_string()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    /// Upper bound on worker threads.
    pub jobs: usize,
    pub timing: bool,
    /// Compute in `mutate_constraint(group)` while keeping the declared
    /// group's expectations.
    pub mutate: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            jobs: 1,
            timing: false,
            mutate: false,
        }
    }
}

fn split_seed(seed: u64, key: &str) -> u64 {
    // FNV-1a over the key, then a splitmix64 finalizer
    let mut h: u64 = 0xcbf29ce484222325;
    for b in key.bytes() {
        h = (h ^ b as u64).wrapping_mul(0x100000001b3);
    }
    let mut z = seed ^ h;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

pub fn run_lemma_suite(case: &LemmaCase) -> Result<VerificationReport> {
    run_lemma_suite_with(case, &RunOptions::default())
}

pub fn run_lemma_suite_with(case: &LemmaCase, opts: &RunOptions) -> Result<VerificationReport> {
    let start = Instant::now();
    let suite = suites::lookup(&case.lemma)?;
    let declared = case
        .group
        .clone()
        .or_else(|| suite.default_group.map(|f| f()));
    let group = match &declared {
        Some(spec) if opts.mutate => Some(make_group(mutate_constraint(spec))?),
        Some(spec) => Some(make_group(spec.clone())?),
        None => None,
    };
    if suite.needs_group && group.is_none() {
        return Err(WorkbenchError::IncompatibleFamily {
            lemma: case.lemma.clone(),
            group: "no group".into(),
        });
    }
    let p = case.p.or(declared.as_ref().map(natural_prime)).unwrap_or(2);
    let ctx = Context {
        case: case.clone(),
        group,
        declared: declared.clone(),
        p,
    };
    let jobs = (suite.plan)(&ctx)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.max(1))
        .build()
        .expect("thread pool");
    let mut cases: Vec<CaseOutcome> = pool.install(|| {
        jobs.into_par_iter()
            .map(|job| {
                let mut rng = ChaCha8Rng::seed_from_u64(split_seed(case.seed, &job.key));
                let key = job.key.clone();
                (job.run)(&mut rng).unwrap_or_else(|e| {
                    CaseOutcome::fail(key, json!({ "error": e.to_string() }), json!(e.to_string()))
                })
            })
            .collect()
    });
    cases.sort_by(|a, b| a.key.cmp(&b.key));

    let count = |s: Status| cases.iter().filter(|c| c.status == s).count();
    let (passed, failed, inconclusive) = (
        count(Status::Pass),
        count(Status::Fail),
        count(Status::Inconclusive),
    );
    let verdict = cases.iter().map(|c| c.status).max().unwrap_or(Status::Pass);
    Ok(VerificationReport {
        lemma: case.lemma.clone(),
        group: declared.map(|s| s.to_string()),
        p: suite.uses_prime.then_some(p),
        seed: case.seed,
        samples: case.samples,
        caps: case.caps().to_vec(),
        verdict,
        passed,
        failed,
        inconclusive,
        cases,
        wall_time_ms: opts.timing.then(|| start.elapsed().as_millis() as u64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_split_by_key() {
        assert_eq!(split_seed(7, "a"), split_seed(7, "a"));
        assert_ne!(split_seed(7, "a"), split_seed(7, "b"));
        assert_ne!(split_seed(7, "a"), split_seed(8, "a"));
    }
}
