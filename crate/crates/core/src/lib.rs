//! Exact computations in concrete ordered abelian groups: convex subgroups,
//! divisibility-shifted subgroups, indices, coset logic and projected linear
//! functions.

pub mod cosetlogic;
pub mod element;
pub mod error;
pub mod functions;
pub mod group;
pub mod lattice;
pub mod metrics;
pub mod oracle;
pub mod parse;
pub mod scalar;
pub mod subgroup;

pub use element::Element;
pub use error::{OagError, Result};
pub use group::{make_group, CellConstraint, Convex, Group, GroupHandle, GroupSpec, Window};
pub use lattice::{CoeffRing, Lattice};
pub use metrics::IndexValue;
pub use parse::{parse_group, parse_group_spec, parse_subgroup_expr};
pub use scalar::{Scalar, Q};
pub use subgroup::{member, SubgroupExpr};

/// Elements over arbitrary-precision integers.
pub type Elem = Element<num_bigint::BigInt>;
/// Elements over machine integers, for small fast experiments.
pub type Elem64 = Element<i64>;
