use ffcircle::arcs::{centers_up_to, Ratio};
use ffcircle::expsum::{multiplier_m, ExponentSystem, Frequency};
use ffcircle::operators::{apply_c, apply_d, apply_m, build_g, fourier_at, GridFunction, OperatorParams};
use ffcircle::{Field, Poly};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn system(exps: &[u32], p: u32) -> ExponentSystem {
    ExponentSystem::new(exps, p).unwrap()
}

fn random_g(field: &Field, box_degs: &[usize], seed: u64) -> GridFunction {
    GridFunction::random(field, box_degs, 0.6, false, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn m_is_a_multiplier_at_rationals(seed in any::<u64>(), p in prop::sample::select(vec![2u32, 3]), n in 0usize..4) {
        let f = Field::prime(p).unwrap();
        for exps in [&[1u32][..], &[2]] {
            let sys = system(exps, p);
            let g = random_g(&f, &[3], seed);
            let mg = apply_m(&f, &g, &sys, n).unwrap();
            for c in centers_up_to(&f, 2, 1).unwrap() {
                let alpha = c.frequencies();
                let lhs = fourier_at(&f, &mg, &alpha).unwrap();
                let rhs = multiplier_m(&f, &alpha, &sys, n).unwrap() * fourier_at(&f, &g, &alpha).unwrap();
                prop_assert!((lhs - rhs).norm() < 1e-9, "center {} n {}", c, n);
            }
        }
    }

    #[test]
    fn plancherel(seed in any::<u64>(), p in prop::sample::select(vec![2u32, 3]), b in 1usize..4, k in 1usize..3) {
        let f = Field::prime(p).unwrap();
        let g = random_g(&f, &vec![b; k], seed);
        let tb = f.poly_shift(&Poly::one(), b);
        let nums = f.enumerate_degree_lt(b).unwrap();
        let mut total = 0.0;
        let mut idx = vec![0usize; k];
        loop {
            let alpha: Vec<Frequency> = idx.iter().map(|&i| Frequency::Rational { a: nums[i].clone(), h: tb.clone() }).collect();
            total += fourier_at(&f, &g, &alpha).unwrap().norm_sqr();
            let mut j = 0;
            while j < k {
                idx[j] += 1;
                if idx[j] < nums.len() {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
            if j == k {
                break;
            }
        }
        let rhs = total / f.q_pow(k * b) as f64;
        prop_assert!((g.norm2() - rhs).abs() < 1e-9 * (1.0 + rhs));
    }

    #[test]
    fn operators_contract(seed in any::<u64>(), n in 1usize..5) {
        let f = Field::prime(2).unwrap();
        let g = random_g(&f, &[4], seed);
        for exps in [&[1u32][..], &[3]] {
            let sys = system(exps, 2);
            prop_assert!(apply_m(&f, &g, &sys, n).unwrap().norm2() <= g.norm2() + 1e-12);
        }
        let sys = system(&[1], 2);
        for s in 0..2 {
            let params = OperatorParams::new(&f, &sys, s, n + 2).unwrap().with_rho(Ratio::new(1, 2).unwrap());
            prop_assert!(apply_d(&f, &g, &params).unwrap().norm2() <= g.norm2() + 1e-12);
            prop_assert!(build_g(&f, &g, &params).unwrap().norm2() <= g.norm2() + 1e-12);
        }
    }

    #[test]
    fn d_projections_are_monotone(seed in any::<u64>(), s in 0usize..2, n1 in 3usize..6, gap in 0usize..3) {
        let f = Field::prime(2).unwrap();
        let g = random_g(&f, &[4], seed);
        let params = OperatorParams::new(&f, &system(&[1], 2), s, n1).unwrap().with_rho(Ratio::new(1, 2).unwrap());
        let d1 = apply_d(&f, &g, &params).unwrap();
        prop_assert!(d1.max_abs_diff(&f, &apply_d(&f, &d1, &params).unwrap()).unwrap() < 1e-9);
        let later = params.at_n(n1 + gap);
        let d2 = apply_d(&f, &g, &later).unwrap();
        prop_assert!(d2.max_abs_diff(&f, &apply_d(&f, &d1, &later).unwrap()).unwrap() < 1e-9);
    }

    #[test]
    fn c_is_linear(s1 in any::<u64>(), s2 in any::<u64>(), re in -2.0f64..2.0, im in -2.0f64..2.0, n in 1usize..9) {
        let f = Field::prime(2).unwrap();
        let sys = system(&[1], 2);
        let (a, b) = (random_g(&f, &[3], s1), random_g(&f, &[3], s2));
        let z = Complex64::new(re, im);
        let mix = a.scale(z).add(&f, &b).unwrap();
        let lhs = apply_c(&f, &mix, &sys, n, None).unwrap().value;
        let rhs = apply_c(&f, &a, &sys, n, None).unwrap().value.scale(z).add(&f, &apply_c(&f, &b, &sys, n, None).unwrap().value).unwrap();
        prop_assert!(lhs.max_abs_diff(&f, &rhs).unwrap() < 1e-9);
    }
}
