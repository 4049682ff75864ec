use num_rational::Rational64;
use num_traits::One;
use pingpong_core::boundary::{minimality_check, proximality_run, push_measure, random_measure, ProximalityBudget};
use pingpong_core::certify::{
    freeness_certificate, noloops_check, ENUMERATION_CAP,
};
use pingpong_core::isometry::{fixed_ends, is_loxodromic, subgroup_closure};
use pingpong_core::partner::{
    escape_search, loa_construct, pingpong_power, pnaive_pipeline, EscapeBudget, PipelineParams,
};
use pingpong_core::{ActionModel, GroupElement, TreeModel};
use proptest::prelude::*;

fn modular_subgroups(m: &TreeModel, words: &[&str]) -> Vec<Vec<GroupElement>> {
    words.iter().map(|w| vec![m.parse(w).unwrap()]).collect()
}

#[test]
fn escape_output_is_reverified() {
    let m = TreeModel::modular();
    for case in [&["s", "t"][..], &["tst^2"], &["s", "tst^2", "t^2st"], &["sts"]] {
        let hs = modular_subgroups(&m, case);
        let out = escape_search(&m, &hs, 6, 3, EscapeBudget::default()).unwrap();
        let (p, q) = fixed_ends(&m, &out.gamma).unwrap();
        assert_eq!((p.clone(), q.clone()), (out.plus.clone(), out.minus.clone()));
        for h in &hs {
            for x in subgroup_closure(&m, h, 64).unwrap().iter().filter(|x| !x.is_identity()) {
                let (hp, hq) = (m.act_end(x, &p), m.act_end(x, &q));
                assert!(!((hp == p && hq == q) || (hp == q && hq == p)), "{:?}", case);
            }
        }
    }
}

#[test]
fn power_is_monotone_in_region_radius() {
    let m = TreeModel::modular();
    let model: ActionModel = m.clone().into();
    for (gamma, case) in [("st", &["s", "t"][..]), ("st^2", &["tst^2"]), ("stst^2", &["s"])] {
        let hs = modular_subgroups(&m, case);
        let g = m.parse(gamma).unwrap();
        let mut prev: Option<(Vec<_>, u64)> = None;
        for r in 3..=7 {
            let p = pingpong_power(&model, &g, &hs, r, 3).unwrap();
            let ds: Vec<_> = p.per_subgroup.iter().map(|s| s.d_observed).collect();
            if let Some((pd, pn)) = &prev {
                assert!(ds.iter().zip(pd).all(|(a, b)| a >= b));
                assert!(p.power_n >= *pn);
            }
            prev = Some((ds, p.power_n));
        }
    }
}

#[test]
fn pipeline_is_deterministic() {
    let m = TreeModel::modular();
    let model: ActionModel = m.clone().into();
    let hs = modular_subgroups(&m, &["s", "t"]);
    let a = pnaive_pipeline(&model, &hs, PipelineParams::default()).unwrap();
    let b = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| pnaive_pipeline(&model, &hs, PipelineParams::default()).unwrap());
    assert_eq!(a, b);
    assert!(a.passed());
}

#[test]
fn freeness_certificates_are_monotone_in_bounds() {
    let m = TreeModel::modular();
    let gn = m.pow(&m.parse("st").unwrap(), 10);
    for h in ["s", "t"] {
        let h = vec![m.parse(h).unwrap()];
        assert!(freeness_certificate(&m, &gn, &h, 8, 3, ENUMERATION_CAP).unwrap().passed());
        for b in 1..8 {
            for e in 1..=3 {
                assert!(freeness_certificate(&m, &gn, &h, b, e, ENUMERATION_CAP).unwrap().passed());
            }
        }
    }
    // A failure persists when the bounds grow.
    let st = m.parse("st").unwrap();
    let s = vec![m.parse("s").unwrap()];
    let first = (1..=8).find(|&b| !freeness_certificate(&m, &st, &s, b, 3, ENUMERATION_CAP).unwrap().passed()).unwrap();
    for b in first..=8 {
        assert!(!freeness_certificate(&m, &st, &s, b, 3, ENUMERATION_CAP).unwrap().passed());
    }
}

#[test]
fn noloops_window_implies_star_for_pairs() {
    let f2 = TreeModel::free_group(2).unwrap();
    let u = f2.parse("aB").unwrap();
    let candidates: Vec<GroupElement> = ["a", "b", "ab", "Ab", "ba", "a^2"].iter().map(|w| f2.parse(w).unwrap()).collect();
    for n in 1..=2u64 {
        for g1 in &candidates {
            for g2 in &candidates {
                let pair = [g1.clone(), g2.clone()];
                if noloops_check(&f2, &u, &pair, n, 3 * n).unwrap().passed() {
                    let triple = [f2.pow(&u, n as i64), f2.pow(&u, 2 * n as i64), f2.pow(&u, 3 * n as i64)];
                    // Only the products in the order g1, g2 are implied.
                    let direct = |x1: &GroupElement, x2: &GroupElement| {
                        f2.product([&f2.inv(x1), g1, x1, &f2.inv(x2), g2, x2])
                    };
                    for i in 0..3 {
                        for j in (0..3).filter(|&j| j != i) {
                            assert!(!direct(&triple[i], &triple[j]).is_identity());
                        }
                    }
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn loa_output_survives_reverification(s1 in any::<u64>(), s2 in any::<u64>(), l1 in 1usize..6, l2 in 1usize..6) {
        let f2 = TreeModel::free_group(2).unwrap();
        let g1 = f2.random_element(l1, s1);
        let g2 = f2.random_element(l2, s2);
        let (p1, m1) = fixed_ends(&f2, &g1).unwrap();
        let (p2, m2) = fixed_ends(&f2, &g2).unwrap();
        prop_assume!(p1 != p2 && p1 != m2 && m1 != p2 && m1 != m2);
        let (u, v) = (m2.cylinder(2), p1.cylinder(2));
        let out = loa_construct(&f2, &g1, &g2, &u, &v, 10).unwrap();
        prop_assert!(is_loxodromic(&f2, &out.element).unwrap());
        let (p, q) = fixed_ends(&f2, &out.element).unwrap();
        prop_assert!(p.in_cylinder(&v) && q.in_cylinder(&u));
        // Independent recomputation: high powers push the base point deep
        // into the attracting cylinder.
        let deep = f2.orbit_path(&f2.pow(&out.element, 12));
        prop_assert!(deep.starts_with(v.labels()));
    }

    #[test]
    fn pushed_measures_keep_unit_mass(seed in any::<u64>(), len in 0usize..8, atoms in 1usize..5) {
        for t in [TreeModel::free_group(2).unwrap(), TreeModel::modular()] {
            let mu = random_measure(&t, atoms, seed);
            let g = t.random_element(len, seed.rotate_left(7));
            let pushed = push_measure(&t, &g, &mu).unwrap();
            prop_assert!(pushed.total_mass().is_one());
            prop_assert_eq!(push_measure(&t, &t.inv(&g), &pushed).unwrap(), mu);
        }
    }

    #[test]
    fn proximality_is_reproducible(seed in 0u64..1000) {
        let f2 = TreeModel::free_group(2).unwrap();
        let mu1 = random_measure(&f2, 3, seed);
        let mu2 = random_measure(&f2, 3, seed + 1);
        let zeta = random_measure(&f2, 1, seed + 2).atoms()[0].0.clone();
        let tol = Rational64::new(1, 100);
        let tr = proximality_run(&f2, &mu1, &mu2, &zeta, 3, tol, ProximalityBudget::default()).unwrap();
        if let Some(last) = tr.sequence.last() {
            for (mu, claimed) in [(&mu1, tr.steps.last().unwrap().masses.0), (&mu2, tr.steps.last().unwrap().masses.1)] {
                let mass = push_measure(&f2, last, mu).unwrap().mass_in(&tr.target);
                prop_assert_eq!(mass, claimed);
                prop_assert!(mass >= Rational64::one() - tol);
            }
        }
    }

    #[test]
    fn minimality_is_equivariant(seed in any::<u64>(), len in 0usize..4) {
        for t in [TreeModel::free_group(2).unwrap(), TreeModel::modular()] {
            let xi = random_measure(&t, 1, seed).atoms()[0].0.clone();
            let g = t.random_element(len, seed ^ 1);
            let a = minimality_check(&t, &xi, 2, 6 + len);
            let b = minimality_check(&t, &t.act_end(&g, &xi), 2, 6 + len);
            prop_assert!(a.passed() && b.passed());
        }
    }
}
