//! Lemma-verification registry, dimension profiles and report types for
//! the `oag` command line tool.

pub mod case;
pub mod error;
pub mod profile;
pub mod report;
pub mod runner;
pub mod suites;

pub use case::{LemmaCase, DEFAULT_CAP, DEFAULT_SEED};
pub use error::{Result, WorkbenchError};
pub use oag_core::parse::{parse_group, parse_group_spec, parse_subgroup_expr};
pub use profile::{dim_profile, profile_csv};
pub use report::{CaseOutcome, Status, VerificationReport};
pub use runner::{run_lemma_suite, run_lemma_suite_with, RunOptions};
