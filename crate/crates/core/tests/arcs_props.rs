use ffcircle::arcs::{classify, in_major_box, ArcScale, Classification, Ratio};
use ffcircle::expsum::{ExponentSystem, Frequency};
use ffcircle::torus::TailSeries;
use ffcircle::Field;
use proptest::prelude::*;

proptest! {
    #[test]
    fn classification_is_consistent(raw in prop::collection::vec(0u32..2, 24), n in 2usize..8) {
        let f = Field::prime(2).unwrap();
        let sys = ExponentSystem::new(&[1], 2).unwrap();
        let scale = ArcScale::new(&sys, n).with_rho(Ratio::new(1, 2).unwrap());
        let mut t = TailSeries::zero(24);
        for (j, &c) in raw.iter().enumerate() {
            t.set_coeff(j + 1, c);
        }
        let alpha = vec![Frequency::Tail(t)];
        let hits: Vec<bool> = scale
            .centers(&f)
            .unwrap()
            .iter()
            .map(|c| in_major_box(&f, &alpha, c, &scale).unwrap())
            .collect();
        match classify(&f, &alpha, &scale).unwrap() {
            Classification::Major(c) => prop_assert!(in_major_box(&f, &alpha, &c, &scale).unwrap()),
            Classification::Minor => prop_assert!(hits.iter().all(|h| !h)),
        }
    }

    #[test]
    fn thresholds_match_rational_arithmetic(n in 1u64..1_000_000, rstar in 1u32..9, ord in -9_000_000i64..0, d in 0u64..200_000) {
        let exps: Vec<u32> = (1..=rstar).collect();
        let sys = ExponentSystem::new(&exps, 2).unwrap();
        let scale = ArcScale::new(&sys, n as usize);
        let r2 = 4 * (rstar as i128) * (rstar as i128);
        for (i, &r) in exps.iter().enumerate() {
            // ord < -r n + n / (4 r*^2)
            let exact = (ord as i128) * r2 < -(r as i128) * (n as i128) * r2 + n as i128;
            prop_assert_eq!(ord <= scale.ord_bound(i), exact);
            // the small box ord < -r n sits inside
            prop_assert!(scale.ord_bound(i) >= -(r as i64) * n as i64 - 1);
        }
        // deg h < n / (8 r*)
        prop_assert_eq!(scale.admits_degree(d as usize), (d as i128) * 8 * (rstar as i128) < n as i128);
    }
}
