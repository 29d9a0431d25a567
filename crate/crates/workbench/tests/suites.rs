use oag_core::group::GroupSpec;
use oag_workbench::suites::{ids, REGISTRY};
use oag_workbench::{
    run_lemma_suite, run_lemma_suite_with, LemmaCase, RunOptions, Status, WorkbenchError,
};

fn small(lemma: &str, group: Option<GroupSpec>) -> LemmaCase {
    let mut case = LemmaCase::new(lemma, group);
    case.samples = 20;
    case.j_max = 4;
    case
}

/// A group every suite accepts, or none for the group-free ones.
fn group_for(id: &str) -> Option<GroupSpec> {
    match id {
        "qe32" | "qe33" => None,
        "dim72" | "cex72" => Some(GroupSpec::poly_part_uniform(2, 2)),
        "cex73" => Some(GroupSpec::local_lex(2)),
        _ => Some(GroupSpec::poly_mod(2, 2)),
    }
}

#[test]
fn every_suite_passes_on_a_small_run() {
    assert_eq!(ids().count(), 16);
    for suite in REGISTRY {
        let r = run_lemma_suite(&small(suite.id, group_for(suite.id))).unwrap();
        assert_eq!(
            r.verdict,
            Status::Pass,
            "{}: {:?}",
            suite.id,
            r.failures().next()
        );
        assert!(!r.cases.is_empty(), "{} planned nothing", suite.id);
        assert_eq!(r.passed, r.cases.len());
    }
}

#[test]
fn default_groups_fill_in() {
    for suite in REGISTRY.iter().filter(|s| s.default_group.is_some()) {
        let r = run_lemma_suite(&small(suite.id, None)).unwrap();
        assert!(r.group.is_some(), "{}", suite.id);
    }
}

#[test]
fn rejects_unknown_and_incompatible() {
    assert!(matches!(
        run_lemma_suite(&small("lemma-9.9", None)),
        Err(WorkbenchError::UnknownLemma(_))
    ));
    let r = run_lemma_suite(&small("dim71", Some(GroupSpec::free_lex(2))));
    assert!(matches!(r, Err(WorkbenchError::IncompatibleFamily { .. })));
    let r = run_lemma_suite(&small("keylemma", None));
    assert!(r.is_err(), "keylemma has no default group");
}

#[test]
fn thread_count_does_not_change_the_report() {
    let case = small("desc-inf", Some(GroupSpec::poly_part_uniform(2, 2)));
    let one = run_lemma_suite(&case).unwrap();
    let four = run_lemma_suite_with(
        &case,
        &RunOptions {
            jobs: 4,
            ..RunOptions::default()
        },
    )
    .unwrap();
    assert_eq!(
        serde_json::to_string(&one).unwrap(),
        serde_json::to_string(&four).unwrap()
    );
}

#[test]
fn mutation_breaks_the_dimension_suites() {
    let mutate = RunOptions {
        mutate: true,
        ..RunOptions::default()
    };
    for (lemma, group) in [
        ("dim71", GroupSpec::poly_mod(2, 2)),
        ("dim72", GroupSpec::poly_part_uniform(2, 2)),
    ] {
        let r = run_lemma_suite_with(&small(lemma, Some(group)), &mutate).unwrap();
        assert_eq!(r.verdict, Status::Fail, "{lemma}");
        assert!(r.failures().all(|c| c.witness.is_some()));
    }
}
