use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn oag(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oag"))
        .args(args)
        .env_remove("OAG_SEED")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

#[test]
fn member_prints_a_boolean() {
    let out = oag(&[
        "member",
        "--group",
        "freelex(3)",
        "--subgroup",
        "shift(tail(1),2,1)",
        "--element",
        "2*e0+1*e1",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "true\n");
    let out = oag(&[
        "member",
        "--group",
        "freelex(3)",
        "--subgroup",
        "shift(tail(1),2,1)",
        "--element",
        "1*e0",
    ]);
    assert_eq!(stdout(&out), "false\n");
}

#[test]
fn bad_input_exits_2() {
    let out = oag(&[
        "member",
        "--group",
        "polymod(p=4,n=1)",
        "--subgroup",
        "zero",
        "--element",
        "0",
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("not prime"));
    assert_eq!(code(&oag(&["verify", "--lemma", "no-such-lemma"])), 2);
    assert_eq!(
        code(&oag(&[
            "verify",
            "--lemma",
            "dim71",
            "--group",
            "freelex(2)"
        ])),
        2
    );
    assert_eq!(
        code(&oag(&[
            "index",
            "--group",
            "freelex(2)",
            "--larger",
            "full",
            "--smaller",
            "tail(7)"
        ])),
        2
    );
    assert_eq!(code(&oag(&["frobnicate"])), 2);
}

#[test]
fn dim_profile_csv() {
    let out = oag(&[
        "dim-profile",
        "--group",
        "polymod(p=2,n=2)",
        "--p",
        "2",
        "--smax",
        "4",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        stdout(&out),
        "s,dim_tag,dim_value\n1,finite,0\n2,finite,1\n3,finite,0\n4,finite,0\n"
    );
    let out = oag(&[
        "dim-profile",
        "--group",
        "polypart(*=(2,2))",
        "--p",
        "2",
        "--smax",
        "2",
    ]);
    assert_eq!(code(&out), 3);
    assert!(stdout(&out).contains("2,at_least,32"));
}

#[test]
fn index_reports_tagged_values() {
    let out = oag(&[
        "index",
        "--group",
        "freelex(2)",
        "--larger",
        "full",
        "--smaller",
        "shift(zero,3,1)",
    ]);
    assert_eq!(
        report(&out),
        serde_json::json!({ "tag": "finite", "value": 9 })
    );
    let out = oag(&[
        "index",
        "--group",
        "locallex(p=2)",
        "--larger",
        "full",
        "--smaller",
        "shift(zero,2,1)",
        "--cap",
        "64",
    ]);
    assert_eq!(
        report(&out),
        serde_json::json!({ "tag": "at_least", "bound": 64 })
    );
}

#[test]
fn verify_passes_on_a_local_group() {
    let out = oag(&[
        "verify",
        "--lemma",
        "keylemma",
        "--group",
        "locallex(p=3)",
        "--seed",
        "7",
        "--samples",
        "1000",
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let r = report(&out);
    assert_eq!(r["verdict"], "pass");
    assert_eq!(r["seed"], 7);
    assert_eq!(r["failed"], 0);
    assert!(r.get("wall_time_ms").map_or(true, Value::is_null));
}

#[test]
fn reports_are_reproducible() {
    let args = [
        "verify",
        "--lemma",
        "nonconvex-cond",
        "--group",
        "polymod(p=2,n=2)",
        "--samples",
        "50",
    ];
    let first = oag(&args);
    assert_eq!(code(&first), 0);
    assert_eq!(first.stdout, oag(&args).stdout);
    let mut parallel = args.to_vec();
    parallel.extend(["--jobs", "3"]);
    assert_eq!(first.stdout, oag(&parallel).stdout);
}

#[test]
fn seed_comes_from_the_environment() {
    let run = |seed: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_oag"))
            .args([
                "verify",
                "--lemma",
                "keylemma",
                "--group",
                "locallex(p=2)",
                "--samples",
                "20",
            ])
            .env("OAG_SEED", seed)
            .output()
            .unwrap();
        report(&out)
    };
    let (a, b) = (run("11"), run("12"));
    assert_eq!(a["seed"], 11);
    assert_eq!(b["seed"], 12);
    assert_eq!(a, run("11"));
}

#[test]
fn out_writes_the_report() {
    let path = scratch("cex73.json");
    let _ = std::fs::remove_file(&path);
    let out = oag(&[
        "counterexample",
        "cex73",
        "--samples",
        "20",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(r["lemma"], "cex73");
    assert_eq!(r["verdict"], "pass");
}

#[test]
fn mutated_constraint_is_caught() {
    let args = [
        "verify",
        "--lemma",
        "dim72",
        "--group",
        "polypart((2,2),(2,2),(3,1))",
        "--p",
        "2",
    ];
    assert_eq!(code(&oag(&args)), 0);
    let mut mutated = args.to_vec();
    mutated.push("--mutate-constraint");
    let out = oag(&mutated);
    assert_eq!(code(&out), 1);
    let r = report(&out);
    assert_eq!(r["verdict"], "fail");
    let failing: Vec<&Value> = r["cases"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["status"] == "fail")
        .collect();
    assert!(!failing.is_empty());
    assert!(failing.iter().all(|c| !c["witness"].is_null()));
}

#[test]
fn cosetlogic_commands() {
    let out = oag(&["cosetlogic", "threshold", "--n", "2", "--k", "2"]);
    assert_eq!(report(&out)["threshold"], 2);
    assert_eq!(
        code(&oag(&["cosetlogic", "threshold", "--n", "1", "--k", "2"])),
        2
    );

    let good = scratch("system_good.json");
    std::fs::write(
        &good,
        r#"{"ambient":[8],"base":{"rep":[0],"gens":[[1]]},"exclusions":[{"rep":[1],"gens":[[4]]}],"gprime":[[2]]}"#,
    )
    .unwrap();
    assert_eq!(
        code(&oag(&[
            "cosetlogic",
            "check",
            "--system",
            good.to_str().unwrap()
        ])),
        0
    );
    let out = oag(&[
        "cosetlogic",
        "member",
        "--system",
        good.to_str().unwrap(),
        "--y",
        "3",
    ]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r["member"], r["enumeration"]);

    let bad = scratch("system_bad.json");
    std::fs::write(
        &bad,
        r#"{"ambient":[8],"base":{"rep":[0],"gens":[[2]]},"exclusions":[{"rep":[1],"gens":[[4]]}],"gprime":[]}"#,
    )
    .unwrap();
    let out = oag(&["cosetlogic", "check", "--system", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert_eq!(report(&out)["violations"][0]["kind"], "containment");
}

#[test]
fn list_names_every_suite() {
    let text = stdout(&oag(&["verify", "--list"]));
    for id in ["keylemma", "qe32", "cex72", "cex73", "dim71", "dim72"] {
        assert!(text.lines().any(|l| l.starts_with(id)), "{id} missing");
    }
    assert_eq!(text.lines().count(), 16);
}
