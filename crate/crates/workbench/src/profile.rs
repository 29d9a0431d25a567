use std::fmt::Write;

use num_bigint::BigInt;
use oag_core::group::{Convex, GroupHandle, GroupSpec};
use oag_core::metrics::{fp_dimension, IndexValue};
use oag_core::subgroup::SubgroupExpr;

use crate::error::{Result, WorkbenchError};

/// `{0}^[p^s] + pG ⊇ {0}^[p^(s+1)] + pG`, the pair whose quotient the
/// profile measures.
pub fn profile_pair(p: u64, s: u32) -> (SubgroupExpr, SubgroupExpr) {
    let at = |e: u32| SubgroupExpr::sharp(Convex::Zero, p, e).join(SubgroupExpr::multiples(p, 1));
    (at(s), at(s + 1))
}

pub fn dim_at(g: &GroupHandle, p: u64, s: u32, cap: u64) -> oag_core::Result<IndexValue> {
    let (a, b) = profile_pair(p, s);
    fp_dimension::<BigInt>(g, &a, &b, p, cap)
}

/// `dim_{F_p}` of the profile quotient for `s = 1..=smax`.
pub fn dim_profile(g: &GroupHandle, p: u64, smax: u32, cap: u64) -> Result<Vec<(u32, IndexValue)>> {
    if !matches!(
        g.spec(),
        GroupSpec::PolyMod { .. } | GroupSpec::PolyPart { .. }
    ) {
        return Err(WorkbenchError::IncompatibleFamily {
            lemma: "dim-profile".into(),
            group: g.spec().to_string(),
        });
    }
    (1..=smax).map(|s| Ok((s, dim_at(g, p, s, cap)?))).collect()
}

/// Header `s,dim_tag,dim_value`, one row per `s`.
pub fn profile_csv(rows: &[(u32, IndexValue)]) -> String {
    let mut out = String::from("s,dim_tag,dim_value\n");
    for (s, v) in rows {
        let (tag, value) = match v {
            IndexValue::Finite { value } => ("finite", value),
            IndexValue::AtLeast { bound } => ("at_least", bound),
        };
        writeln!(out, "{s},{tag},{value}").unwrap();
    }
    out
}
