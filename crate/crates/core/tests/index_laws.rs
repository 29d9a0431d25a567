use num_bigint::BigInt;
use oag_core::group::{make_group, Convex, GroupHandle, GroupSpec};
use oag_core::metrics::{fp_dimension, index, index_with_transversal, IndexValue};
use oag_core::subgroup::{coset_eq, member, random_expr, random_member, SubgroupExpr};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CAP: u64 = 32;

fn idx(g: &GroupHandle, a: &SubgroupExpr, b: &SubgroupExpr) -> IndexValue {
    index::<BigInt>(g, a, b, CAP).unwrap()
}

fn plus(e: SubgroupExpr, p: u64, r: u32) -> SubgroupExpr {
    e.join(SubgroupExpr::multiples(p, r))
}

fn sharp(a: Convex, p: u64, s: u32) -> SubgroupExpr {
    SubgroupExpr::sharp(a, p, s)
}

/// Both finite and equal, or both certified lower bounds.
fn agree(x: IndexValue, y: IndexValue) -> bool {
    match (x, y) {
        (IndexValue::Finite { value: a }, IndexValue::Finite { value: b }) => a == b,
        (IndexValue::AtLeast { .. }, IndexValue::AtLeast { .. }) => true,
        _ => false,
    }
}

fn chain(g: &GroupHandle) -> Vec<Convex> {
    let top = g.universe().unwrap_or(3).min(3);
    (0..=top)
        .map(Convex::Tail)
        .chain([Convex::Zero])
        .map(|c| g.normalize_convex(c))
        .collect()
}

/// Groups of the polynomial families with the primes worth testing.
fn poly_instances() -> Vec<(GroupHandle, u64)> {
    [
        (GroupSpec::poly_mod(2, 2), 2),
        (GroupSpec::poly_mod(2, 2), 3),
        (GroupSpec::poly_mod(3, 1), 3),
        (GroupSpec::poly_part(&[(2, 2), (2, 2), (3, 1)]), 2),
        (GroupSpec::poly_part(&[(2, 2), (2, 2), (3, 1)]), 3),
        (GroupSpec::poly_part_uniform(2, 2), 2),
    ]
    .into_iter()
    .map(|(s, p)| (make_group(s).unwrap(), p))
    .collect()
}

#[test]
fn free_lex_powers() {
    for k in 1..=4usize {
        let g = make_group(GroupSpec::free_lex(k)).unwrap();
        for p in [2u64, 3] {
            let base = idx(&g, &SubgroupExpr::full(), &SubgroupExpr::multiples(p, 1));
            for r in 1..=3u32 {
                let full = idx(&g, &SubgroupExpr::full(), &SubgroupExpr::multiples(p, r));
                assert_eq!(
                    full,
                    IndexValue::finite(p.pow(r * k as u32)),
                    "k={k} p={p} r={r}"
                );
                assert_eq!(full, IndexValue::product(&vec![base; r as usize], CAP));
                for m in 0..=k {
                    let v = idx(
                        &g,
                        &plus(SubgroupExpr::tail(m), p, r),
                        &SubgroupExpr::multiples(p, r),
                    );
                    assert_eq!(
                        v,
                        IndexValue::finite(p.pow(r * (k - m) as u32)),
                        "k={k} p={p} r={r} m={m}"
                    );
                }
            }
        }
    }
}

#[test]
fn finite_transversals_are_closed() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let groups: Vec<GroupHandle> = [
        GroupSpec::free_lex(3),
        GroupSpec::local_lex(3),
        GroupSpec::poly_mod(2, 2),
        GroupSpec::poly_part(&[(2, 2), (2, 2), (3, 1)]),
    ]
    .into_iter()
    .map(|s| make_group(s).unwrap())
    .collect();
    let mut checked = 0;
    for g in &groups {
        for _ in 0..25 {
            let a = random_expr(g, 2, &[2, 3], 3, &mut rng);
            for (p, r) in [(2u64, 1u32), (2, 2), (3, 1)] {
                let b = a.clone().meet(SubgroupExpr::multiples(p, r));
                let (value, reps) = index_with_transversal::<BigInt>(g, &a, &b, CAP).unwrap();
                let Some(k) = value.value().filter(|&k| k <= CAP) else {
                    continue;
                };
                checked += 1;
                assert_eq!(reps.len() as u64, k, "{g} [{a} : {b}]");
                for (i, x) in reps.iter().enumerate() {
                    assert!(member(&a, x).unwrap());
                    for y in &reps[..i] {
                        assert!(!coset_eq(&b, x, y).unwrap(), "{g} [{a} : {b}] {x} ~ {y}");
                    }
                }
                for _ in 0..5 {
                    let step = random_member::<BigInt, _>(g, &a, 6, &mut rng);
                    for x in &reps {
                        let moved = x.add(&step).unwrap();
                        assert!(
                            reps.iter().any(|y| coset_eq(&b, &moved, y).unwrap()),
                            "{g} [{a} : {b}] {moved}"
                        );
                    }
                }
            }
        }
    }
    assert!(checked >= 50, "only {checked} finite transversals");
}

#[test]
fn tower_law() {
    for (g, p) in poly_instances() {
        for alpha in chain(&g) {
            for s in 1..=3u32 {
                for r in 1..=s {
                    let whole = idx(
                        &g,
                        &plus(sharp(alpha, p, s), p, r),
                        &SubgroupExpr::multiples(p, r),
                    );
                    let steps: Vec<IndexValue> = (0..r)
                        .map(|i| {
                            idx(
                                &g,
                                &plus(sharp(alpha, p, s - i), p, 1),
                                &SubgroupExpr::multiples(p, 1),
                            )
                        })
                        .collect();
                    let prod = IndexValue::product(&steps, CAP);
                    assert!(
                        agree(whole, prod),
                        "{g} p={p} α={alpha} s={s} r={r}: {whole} vs {prod} from {steps:?}"
                    );
                }
            }
        }
    }
}

#[test]
fn descent_equivalence() {
    let mut cases: Vec<(GroupHandle, u64)> = poly_instances();
    cases.push((make_group(GroupSpec::local_lex(2)).unwrap(), 2));
    cases.push((make_group(GroupSpec::free_lex(3)).unwrap(), 2));
    for (g, p) in cases {
        let mut ks: Vec<SubgroupExpr> = chain(&g).into_iter().map(SubgroupExpr::conv).collect();
        for alpha in chain(&g) {
            ks.extend((1..=3).map(|s| sharp(alpha, p, s)));
        }
        for k in &ks {
            for r in 1..=3u32 {
                let mult = SubgroupExpr::multiples(p, r);
                let left = idx(&g, &plus(k.clone(), p, r), &mult);
                let cut = k
                    .clone()
                    .meet(SubgroupExpr::multiples(p, r - 1))
                    .join(mult.clone());
                let right = idx(&g, &cut, &mult);
                assert_eq!(
                    left.is_finite(),
                    right.is_finite(),
                    "{g} p={p} K={k} r={r}: {left} vs {right}"
                );
            }
        }
    }
}

#[test]
fn quotient_description_law() {
    for (g, p) in poly_instances() {
        for alpha in chain(&g) {
            for s in 2..=3u32 {
                for r in 1..s {
                    let whole = idx(
                        &g,
                        &plus(sharp(alpha, p, s - 1), p, r),
                        &plus(sharp(alpha, p, s), p, r),
                    );
                    let steps: Vec<IndexValue> = (1..=r)
                        .map(|i| {
                            let upper = if s - i == 0 {
                                SubgroupExpr::full()
                            } else {
                                sharp(alpha, p, s - i)
                            };
                            idx(
                                &g,
                                &plus(upper, p, 1),
                                &plus(sharp(alpha, p, s - i + 1), p, 1),
                            )
                        })
                        .collect();
                    let prod = IndexValue::product(&steps, CAP);
                    assert!(
                        agree(whole, prod),
                        "{g} p={p} α={alpha} s={s} r={r}: {whole} vs {prod} from {steps:?}"
                    );
                }
            }
        }
    }
}

#[test]
fn dimension_matches_index() {
    let mut both = 0;
    for (g, p) in poly_instances() {
        for alpha in chain(&g) {
            for s in 1..=4u32 {
                let a = plus(sharp(alpha, p, s), p, 1);
                let b = plus(sharp(alpha, p, s + 1), p, 1);
                let dim = fp_dimension::<BigInt>(&g, &a, &b, p, CAP).unwrap();
                let ix = idx(&g, &a, &b);
                assert_eq!(dim.is_finite(), ix.is_finite(), "{g} p={p} α={alpha} s={s}");
                if let (Some(d), Some(i)) = (dim.value(), ix.value()) {
                    assert_eq!(p.pow(d as u32), i);
                    both += 1;
                }
            }
        }
    }
    assert!(both > 0);
}
