use oag_core::group::{Convex, GroupHandle, GroupSpec};
use serde::{Deserialize, Serialize};

pub const DEFAULT_SEED: u64 = 0x0a6;
pub const DEFAULT_CAP: u64 = 32;

/// One suite invocation: the lemma, the group and the parameter grid.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaCase {
    pub lemma: String,
    /// Suites that build their own structures (`qe32`, `qe33`) ignore it;
    /// the counterexample suites fall back to their fixed group.
    pub group: Option<GroupSpec>,
    /// Defaults to the natural prime of the group.
    pub p: Option<u64>,
    pub r_max: u32,
    pub s_max: u32,
    /// Random samples per grid point.
    pub samples: usize,
    pub seed: u64,
    /// First cap; suites that expect infinite indices retry at twice it.
    pub cap: u64,
    /// Largest `j` for the translate-conflict grid.
    pub j_max: usize,
    /// Moduli of the finite ambients for `qe32`; empty means the default four.
    pub ambients: Vec<Vec<u64>>,
}

impl LemmaCase {
    pub fn new(lemma: &str, group: Option<GroupSpec>) -> Self {
        LemmaCase {
            lemma: lemma.to_string(),
            group,
            p: None,
            r_max: 3,
            s_max: 3,
            samples: 200,
            seed: DEFAULT_SEED,
            cap: DEFAULT_CAP,
            j_max: 8,
            ambients: Vec::new(),
        }
    }

    pub fn caps(&self) -> [u64; 2] {
        [self.cap, self.cap * 2]
    }
}

/// The prime a family is built around; 2 for FreeLex.
pub fn natural_prime(spec: &GroupSpec) -> u64 {
    match spec {
        GroupSpec::FreeLex { .. } => 2,
        GroupSpec::LocalLex { p } | GroupSpec::PolyMod { p, .. } => *p,
        GroupSpec::PolyPart {
            constraints,
            default,
        } => constraints
            .first()
            .map(|c| c.p)
            .or(default.map(|d| d.0))
            .unwrap_or(2),
    }
}

/// `Tail(0..=3)` and `{0}`, normalized and without repeats.
pub fn convex_chain(g: &GroupHandle) -> Vec<Convex> {
    let top = g.universe().unwrap_or(3).min(3);
    let mut out: Vec<Convex> = Vec::new();
    for c in (0..=top).map(Convex::Tail).chain([Convex::Zero]) {
        let c = g.normalize_convex(c);
        if !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

/// The same family with one constraint modulus raised, for harness
/// self-tests. FreeLex and LocalLex have no constraint and come back
/// unchanged.
pub fn mutate_constraint(spec: &GroupSpec) -> GroupSpec {
    match spec.clone() {
        GroupSpec::PolyMod { p, n } => GroupSpec::PolyMod { p, n: n + 1 },
        GroupSpec::PolyPart {
            mut constraints,
            default,
        } => match constraints.first_mut() {
            Some(c) => {
                c.n += 1;
                GroupSpec::PolyPart {
                    constraints,
                    default,
                }
            }
            None => GroupSpec::PolyPart {
                constraints,
                default: default.map(|(p, n)| (p, n + 1)),
            },
        },
        other => other,
    }
}
