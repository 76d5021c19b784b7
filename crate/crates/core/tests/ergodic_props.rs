use ffcircle::ergodic::{
    build_translation_system, check_action_law, check_measure_preservation, convergence_probe, FiniteSystem,
};
use ffcircle::expsum::ExponentSystem;
use ffcircle::normalform::{reduce_to_normal_form, verify_normal_form, PolySpec};
use ffcircle::{Field, Poly};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_system(field: &Field, deg_h: usize, d: usize, actions: usize, rng: &mut impl Rng) -> FiniteSystem {
    let top = field.q_pow(deg_h) as u64;
    let mut h = field.poly_from_index(rng.gen_range(0..top));
    h = field.poly_add(&h, &field.poly_shift(&Poly::one(), deg_h));
    let dirs = (0..actions).map(|_| (0..d).map(|_| field.poly_from_index(rng.gen_range(0..top))).collect()).collect();
    build_translation_system(field, h, d, dirs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn systems_preserve_measure(seed in any::<u64>(), p in prop::sample::select(vec![2u32, 3]), deg_h in 1usize..3, d in 1usize..3) {
        let f = Field::prime(p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sys = random_system(&f, deg_h, d, 2, &mut rng);
        prop_assert!(check_action_law(&f, &sys).unwrap());
        let g: Vec<f64> = (0..sys.size()).map(|_| rng.gen_range(-3..4) as f64).collect();
        let samples: Vec<Poly> = (0..4).map(|_| f.poly_from_index(rng.gen_range(0..64))).collect();
        prop_assert!(check_measure_preservation(&f, &sys, &g, &samples).unwrap());
    }

    #[test]
    fn averages_stabilize(seed in any::<u64>(), p in prop::sample::select(vec![2u32, 3, 5]), deg_h in 1usize..4, r in 1u32..5) {
        let f = Field::prime(p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sys = random_system(&f, deg_h, 1, 1, &mut rng);
        let g: Vec<f64> = (0..sys.size()).map(|_| rng.gen_range(0..9) as f64).collect();
        let tr = convergence_probe(&f, &sys, &g, &ExponentSystem::new(&[r], p).unwrap(), deg_h + 2).unwrap();
        prop_assert!(tr.stabilization_index <= deg_h);
    }

    #[test]
    fn normal_form_regroups_every_term(seed in any::<u64>(), actions in 1usize..4) {
        let f = Field::prime(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw: Vec<Vec<(Poly, u32)>> = (0..actions)
            .map(|_| {
                let mut exps: Vec<u32> = (0..13).filter(|_| rng.gen_bool(0.3)).collect();
                exps.push(1 + rng.gen_range(0..12));
                exps.sort_unstable();
                exps.dedup();
                exps.into_iter().map(|e| (f.poly_from_index(rng.gen_range(1..8)), e)).collect()
            })
            .collect();
        let nonconstant = raw.iter().flatten().filter(|(_, e)| *e > 0).count();
        let spec = PolySpec::new(&f, raw.clone()).unwrap();
        let nf = reduce_to_normal_form(&f, &spec, false).unwrap();
        prop_assert_eq!(nf.classes.iter().map(|c| c.components.len()).sum::<usize>(), nonconstant);
        for class in &nf.classes {
            prop_assert!(class.r % 2 == 1);
            for c in &class.components {
                let original = c.p_power * class.r;
                prop_assert!(raw[c.action].iter().any(|(a, e)| *e as u64 == original && *a == c.coeff));
            }
        }
        let sys = random_system(&f, 3, 1, actions, &mut rng);
        let rep = verify_normal_form(&f, &nf, &spec, &sys, 30, 6, &mut rng).unwrap();
        prop_assert!(rep.pass, "{:?}", rep);
    }
}
