mod common;

use hecke_core::builder::build_polygon;
use hecke_core::builtins::{fixture, gamma0_2, principal2};
use hecke_core::congruence::{is_congruence, level, lr, relations, Verdict};
use hecke_core::farey::FareySymbol;
use hecke_core::oracle::{MembershipOracle, OracleKind, OracleRegistry};
use hecke_core::perm::Perm;
use hecke_core::Error;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn verdict(congruence: bool) -> Verdict {
    if congruence {
        Verdict::Congruence
    } else {
        Verdict::NonCongruence
    }
}

fn modular_subgroup(rng: &mut impl Rng, max_index: usize) -> FareySymbol {
    let ctx = common::ctx(3);
    loop {
        let n = rng.gen_range(1..=max_index);
        if let Some((s, r)) = common::random_quotient(rng, 3, n) {
            let o = MembershipOracle::new(&ctx, OracleKind::PermQuotient { s, r, base: 0 }).unwrap();
            return build_polygon(&o, &ctx, 10 * n).unwrap();
        }
    }
}

#[test]
fn fixtures_and_families() {
    let rep = is_congruence(&fixture("q3-noncongruence").unwrap()).unwrap();
    assert_eq!((rep.level, rep.verdict), (11, Verdict::NonCongruence));
    assert!(rep.relations.iter().any(|(_, holds)| !holds));
    for sym in [principal2(3).unwrap(), gamma0_2(3).unwrap()] {
        let rep = is_congruence(&sym).unwrap();
        assert_eq!((rep.level, rep.verdict), (2, Verdict::Congruence), "{sym}");
    }
    assert!(matches!(is_congruence(&fixture("q4-genus1").unwrap()), Err(Error::UnsupportedQ(4))));
    assert!(matches!(level(&principal2(5).unwrap()), Err(Error::UnsupportedQ(5))));
}

#[test]
fn principal_congruence_subgroups() {
    let ctx = common::ctx(3);
    for n in [2, 3, 4, 5, 6, 7, 8, 10, 12] {
        for shape in ["principal", "upper0", "lower0"] {
            let o = OracleRegistry::default().build(&ctx, &format!("cong:n={n};shape={shape}")).unwrap();
            let sym = build_polygon(&o, &ctx, 2000).unwrap();
            let rep = is_congruence(&sym).unwrap();
            assert_eq!(rep.verdict, Verdict::Congruence, "{shape} mod {n}: {rep:?}");
            let want = common::wohlfahrt_congruence(&sym);
            assert_eq!((rep.level, true), want, "{shape} mod {n}");
            if shape == "principal" {
                assert_eq!(rep.level, n, "{shape} mod {n}");
            }
        }
    }
}

#[test]
fn level_is_the_order_of_f_t() {
    let sym = fixture("q3-noncongruence").unwrap();
    let (l, r) = lr(&sym).unwrap();
    assert!(l.pow(11).is_identity());
    assert_eq!(l.order(), level(&sym).unwrap());
    assert_eq!(relations(&l, &r, 11).len(), 1);
    assert_eq!(relations(&l, &r, 16).len(), 3);
    assert_eq!(relations(&l, &r, 12).len(), 7);
}

proptest! {
    #![proptest_config(common::proptest_config(96))]

    #[test]
    fn relations_agree_with_brute_force(seed in any::<u64>()) {
        let sym = modular_subgroup(&mut common::rng_from(seed), 12);
        let rep = is_congruence(&sym).unwrap();
        let (n, cong) = common::wohlfahrt_congruence(&sym);
        prop_assert_eq!(rep.level, n);
        prop_assert_eq!(rep.verdict, verdict(cong), "{}: {:?}", sym, rep.relations);
    }

    #[test]
    fn verdict_ignores_relabeling(seed in any::<u64>()) {
        let mut rng = common::rng_from(seed);
        let sym = modular_subgroup(&mut rng, 12);
        let (l, r) = lr(&sym).unwrap();
        let mut images: Vec<u32> = (0..l.degree() as u32).collect();
        images.shuffle(&mut rng);
        let k = Perm::from_images(images).unwrap();
        let (l2, r2) = (l.relabel(&k), r.relabel(&k));
        let n = l.order();
        prop_assert_eq!(l2.order(), n);
        let a: Vec<bool> = relations(&l, &r, n).into_iter().map(|(_, h)| h).collect();
        let b: Vec<bool> = relations(&l2, &r2, n).into_iter().map(|(_, h)| h).collect();
        prop_assert_eq!(a, b);
    }
}
