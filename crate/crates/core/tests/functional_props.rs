use ffcircle::arcs::Ratio;
use ffcircle::expsum::ExponentSystem;
use ffcircle::functionals::{
    hl_start, oscillation, projection_oscillation_check, vitali_select, weak_11_check, CutPoints, ValueSequence,
};
use ffcircle::operators::{GridFunction, OperatorParams};
use ffcircle::Field;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn seq() -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0).prop_map(|(a, b)| Complex64::new(a, b)), 8)
}

fn cuts() -> impl Strategy<Value = CutPoints> {
    prop::collection::btree_set(0usize..8, 2..6).prop_map(|s| CutPoints::new(s.into_iter().collect()).unwrap())
}

fn k1() -> ExponentSystem {
    ExponentSystem::new(&[1], 2).unwrap()
}

proptest! {
    #[test]
    fn oscillation_is_a_seminorm(a in seq(), b in seq(), c in -4.0f64..4.0, cuts in cuts()) {
        let sa = ValueSequence::new(0, a.clone());
        let sb = ValueSequence::new(0, b.clone());
        let sum = ValueSequence::new(0, a.iter().zip(&b).map(|(x, y)| x + y).collect());
        let scaled = ValueSequence::new(0, a.iter().map(|x| x * c).collect());
        let (oa, ob) = (oscillation(&sa, &cuts).unwrap(), oscillation(&sb, &cuts).unwrap());
        prop_assert!(oscillation(&sum, &cuts).unwrap() <= oa + ob + 1e-12);
        prop_assert!((oscillation(&scaled, &cuts).unwrap() - c.abs() * oa).abs() < 1e-9);
    }

    #[test]
    fn one_interval_is_bounded_by_differences(a in seq(), lo in 0usize..4, len in 1usize..4) {
        let cuts = CutPoints::new(vec![lo, lo + len]).unwrap();
        let osc = oscillation(&ValueSequence::new(0, a.clone()), &cuts).unwrap();
        let sup = a.iter().map(|x| x.norm()).fold(0.0, f64::max);
        let spread = a[lo..=lo + len].iter().flat_map(|x| a[lo..=lo + len].iter().map(move |y| (x - y).norm())).fold(0.0, f64::max);
        prop_assert!(osc <= spread + 1e-12);
        prop_assert!(osc <= 2.0 * sup + 1e-12);
    }

    #[test]
    fn vitali_is_disjoint_and_covers(reqs in prop::collection::vec((0u64..64, 0usize..4), 1..12), s in 0usize..2) {
        let f = Field::prime(2).unwrap();
        let params = OperatorParams::new(&f, &k1(), s, 4).unwrap().with_rho(Ratio::new(1, 2).unwrap());
        let start = hl_start(&params);
        let requests: Vec<(Vec<u64>, usize)> = reqs.iter().map(|&(x, n)| (vec![x], start + n)).collect();
        let sel = vitali_select(&f, &requests, &params).unwrap();
        prop_assert!(sel.disjoint && sel.covers);
        prop_assert!(!sel.selected.is_empty());
    }

    #[test]
    fn projection_oscillation_mechanism(seed in any::<u64>(), cuts in prop::collection::btree_set(1usize..9, 2..6)) {
        let f = Field::prime(2).unwrap();
        let g = GridFunction::random(&f, &[4], 0.6, false, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let params = OperatorParams::new(&f, &k1(), 0, 1).unwrap();
        let cuts = CutPoints::new(cuts.into_iter().collect()).unwrap();
        let rep = projection_oscillation_check(&f, &g, &params, &cuts).unwrap();
        prop_assert!(rep.pass, "{:?}", rep);
    }
}

#[test]
fn weak_11_on_every_indicator() {
    let f = Field::prime(2).unwrap();
    let all = [
        OperatorParams::new(&f, &k1(), 0, 1).unwrap(),
        OperatorParams::new(&f, &k1(), 1, 3).unwrap().with_rho(Ratio::new(1, 2).unwrap()),
    ];
    for params in &all {
        for mask in 1u32..256 {
            let mut g = GridFunction::zeros(&f, &[3]).unwrap();
            for x in 0..8u64 {
                if mask >> x & 1 == 1 {
                    g.set(&[x], Complex64::new(1.0, 0.0)).unwrap();
                }
            }
            let rep = weak_11_check(&f, &g, params, &[0.01, 0.1, 0.25, 0.5, 0.99]).unwrap();
            assert!(rep.pass, "s={} mask {mask:08b}: {rep:?}", params.s);
        }
    }
}
