use num_bigint::BigInt;
use oag_core::group::{make_group, Convex, GroupHandle, GroupSpec};
use oag_core::subgroup::{
    member, random_member, spine_maps, subgroup_eq, SubgroupEquality, SubgroupExpr,
};
use oag_core::Elem;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SAMPLES: usize = 200;

fn sharp(d: Convex, p: u64, s: u32) -> SubgroupExpr {
    if s == 0 {
        SubgroupExpr::full()
    } else {
        SubgroupExpr::sharp(d, p, s)
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

/// Mixes plain random elements, multiples of `p^r` and members of both
/// sides so that each side of an equivalence is hit often.
fn sample(g: &GroupHandle, p: u64, r: u32, sides: &[&SubgroupExpr], rng: &mut ChaCha8Rng) -> Elem {
    let x = Elem::random_with(g, 6, 6, rng);
    match rng.gen_range(0..4) {
        0 => x,
        1 => x.scalar_mul(&BigInt::from(p).pow(r)),
        k => random_member(g, sides[(k - 2) % sides.len()], 6, rng),
    }
}

#[test]
fn keylemma_membership_equivalence() {
    let families = [
        (GroupSpec::local_lex(2), 2),
        (GroupSpec::local_lex(3), 3),
        (GroupSpec::poly_mod(2, 2), 2),
        (GroupSpec::poly_part_uniform(2, 2), 2),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for (spec, p) in families {
        let g = make_group(spec).unwrap();
        for d in chain(&g) {
            for s in 1..=3u32 {
                for r in 1..=s {
                    let left = sharp(d, p, s).meet(SubgroupExpr::multiples(p, r));
                    let right = sharp(d, p, s - r).scale(p, r);
                    let pr = BigInt::from(p).pow(r);
                    let mut hits = 0;
                    for _ in 0..SAMPLES {
                        let x = sample(&g, p, r, &[&left, &right], &mut rng);
                        let lhs = member(&sharp(d, p, s), &x).unwrap()
                            && member(&SubgroupExpr::multiples(p, r), &x).unwrap();
                        let rhs = match x.divide_exact(&pr) {
                            Ok(y) => member(&sharp(d, p, s - r), &y).unwrap(),
                            Err(_) => false,
                        };
                        assert_eq!(lhs, rhs, "{g} D={d} r={r} s={s} x={x}");
                        hits += usize::from(lhs);
                    }
                    assert!(
                        hits > 0,
                        "{g} D={d} r={r} s={s}: no sample in the intersection"
                    );
                }
            }
        }
    }
}

fn implies(g: &GroupHandle, small: &SubgroupExpr, large: &SubgroupExpr, rng: &mut ChaCha8Rng) {
    for _ in 0..40 {
        let x = random_member::<BigInt, _>(g, small, 6, rng);
        assert!(
            member(large, &x).unwrap(),
            "{g}: {x} in {small} but not in {large}"
        );
    }
}

#[test]
fn sharp_is_monotone_and_ordered() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (spec, p) in [
        (GroupSpec::local_lex(2), 2),
        (GroupSpec::free_lex(3), 2),
        (GroupSpec::poly_mod(2, 2), 2),
        (GroupSpec::poly_part(&[(2, 2), (2, 2), (3, 1)]), 3),
    ] {
        let g = make_group(spec).unwrap();
        let cs = chain(&g);
        for (i, &alpha) in cs.iter().enumerate() {
            for &beta in &cs[..i] {
                if alpha == beta {
                    continue;
                }
                for s in 1..=3u32 {
                    implies(&g, &sharp(alpha, p, s), &sharp(beta, p, s), &mut rng);
                    for k in 1..=3u32 {
                        let plus = |e: SubgroupExpr| e.join(SubgroupExpr::multiples(p, k));
                        implies(
                            &g,
                            &plus(SubgroupExpr::conv(alpha)),
                            &plus(sharp(alpha, p, s)),
                            &mut rng,
                        );
                        implies(
                            &g,
                            &plus(sharp(alpha, p, s)),
                            &plus(sharp(alpha, p, s - 1)),
                            &mut rng,
                        );
                        // only for k < s is p^{s-1}G inside p^kG
                        if k < s {
                            implies(
                                &g,
                                &plus(sharp(alpha, p, s - 1)),
                                &plus(SubgroupExpr::conv(beta)),
                                &mut rng,
                            );
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn spine_conventions() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for spec in [
        GroupSpec::local_lex(2),
        GroupSpec::free_lex(3),
        GroupSpec::poly_mod(2, 2),
        GroupSpec::poly_part_uniform(3, 1),
    ] {
        let g = make_group(spec).unwrap();
        for n in [2u64, 3] {
            let zero = spine_maps(n, &Elem::zero(&g));
            assert_eq!((zero.s_point, zero.t_point), (Convex::Zero, Convex::Zero));
            for _ in 0..60 {
                let x = Elem::random_with(&g, 5, 5, &mut rng);
                let t = spine_maps(n, &x);
                let in_ng = member(&SubgroupExpr::multiples(n, 1), &x).unwrap();
                let outside = |c: Convex| {
                    !member(
                        &SubgroupExpr::conv(c).join(SubgroupExpr::multiples(n, 1)),
                        &x,
                    )
                    .unwrap()
                };
                if in_ng {
                    assert_eq!(t.s_point, Convex::Zero, "{g} n={n} x={x}");
                } else {
                    assert!(outside(t.s_point));
                    let m = t
                        .s_point
                        .level()
                        .unwrap_or_else(|| g.universe().unwrap_or(x.support_end()));
                    assert!(
                        m >= 1 && !outside(Convex::Tail(m - 1)),
                        "{g} n={n} x={x} {t:?}"
                    );
                }
                if x.is_zero() {
                    continue;
                }
                assert!(!member(&SubgroupExpr::conv(t.t_point), &x).unwrap());
                assert!(member(&SubgroupExpr::conv(t.t_plus_point), &x).unwrap());
                assert!(t.t_point.is_contained_in(t.t_plus_point) && t.t_point != t.t_plus_point);
                if t.t_plus_empty {
                    assert_eq!(t.t_plus_point, Convex::FULL);
                }
            }
        }
    }
}

#[test]
fn equal_mod_p_stays_equal_mod_powers() {
    for (spec, p) in [
        (GroupSpec::free_lex(4), 2),
        (GroupSpec::local_lex(2), 2),
        (GroupSpec::poly_mod(2, 2), 2),
        (GroupSpec::poly_part(&[(2, 2), (2, 2), (3, 1)]), 3),
        (GroupSpec::poly_part(&[(2, 2), (2, 2), (3, 1)]), 2),
        // 2 is a unit in the coefficients, so every tail is equal mod 2G
        (GroupSpec::local_lex(3), 2),
    ] {
        let g = make_group(spec).unwrap();
        let cs = chain(&g);
        let mut equal_pairs = 0;
        for &a in &cs {
            for &b in &cs {
                let at =
                    |c: Convex, r: u32| SubgroupExpr::conv(c).join(SubgroupExpr::multiples(p, r));
                let eq = |r: u32| subgroup_eq::<BigInt>(&g, &at(a, r), &at(b, r), 200, 1).unwrap();
                if eq(1) == SubgroupEquality::EqualByNormalForm {
                    equal_pairs += usize::from(a != b);
                    for r in 2..=3 {
                        assert_eq!(
                            eq(r),
                            SubgroupEquality::EqualByNormalForm,
                            "{g} {a} {b} r={r}"
                        );
                    }
                }
            }
        }
        if matches!(g.spec(), GroupSpec::LocalLex { p: 3 }) {
            assert!(equal_pairs > 0, "{g}: premise never held");
        }
    }
}
