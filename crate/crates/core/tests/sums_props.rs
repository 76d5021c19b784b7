use std::f64::consts::PI;

use ffcircle::expsum::{multiplier_m, weyl_sum, ExponentSystem, Frequency};
use ffcircle::torus::{character, expand_rational, residue_mul, scalar_mul, tail_add, tail_neg, TailSeries};
use ffcircle::{Field, Poly};
use num_complex::Complex64;
use proptest::prelude::*;

const PREC: usize = 16;

fn tail(field: &Field, raw: &[u32]) -> TailSeries {
    let mut t = TailSeries::zero(PREC);
    for (j, c) in raw.iter().enumerate().take(PREC) {
        t.set_coeff(j + 1, c % field.q());
    }
    t
}

fn raw_tail() -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0u32..16, PREC)
}

fn systems(p: u32) -> Vec<ExponentSystem> {
    [&[1u32][..], &[3], &[1, 2]].iter().map(|e| ExponentSystem::new(e, p).unwrap()).collect()
}

/// Direct floating summation of `sum_f e(sum_i f^{r_i} alpha_i)`.
fn direct_sum(field: &Field, alphas: &[TailSeries], system: &ExponentSystem, n: usize) -> Complex64 {
    let p = field.p() as f64;
    field
        .enumerate_degree_lt(n)
        .unwrap()
        .iter()
        .map(|f| {
            let mut res = 0;
            for (a, &r) in alphas.iter().zip(&system.exponents) {
                res = field.add(res, residue_mul(field, &field.poly_pow(f, r), a).unwrap());
            }
            Complex64::from_polar(1.0, 2.0 * PI * field.trace(res) as f64 / p)
        })
        .sum()
}

proptest! {
    #[test]
    fn character_is_multiplicative(p in prop::sample::select(vec![2u32, 3, 5]), a in raw_tail(), b in raw_tail()) {
        let f = Field::prime(p).unwrap();
        let (a, b) = (tail(&f, &a), tail(&f, &b));
        prop_assert_eq!(character(&f, &tail_add(&f, &a, &b)), character(&f, &a).mul(character(&f, &b)));
    }

    #[test]
    fn expansion_refines(p in prop::sample::select(vec![2u32, 3]), a in prop::collection::vec(0u32..9, 0..4),
                         h in prop::collection::vec(0u32..9, 1..4), n1 in 1usize..12, extra in 0usize..8) {
        let f = Field::prime(p).unwrap();
        let mut h = f.poly_from_codes(h.iter().map(|c| c % p).collect()).unwrap();
        h = f.poly_add(&f.poly_shift(&Poly::one(), h.degree().map(|d| d + 1).unwrap_or(0)), &h);
        let a = f.poly_from_codes(a.iter().map(|c| c % p).collect()).unwrap();
        let long = expand_rational(&f, &a, &h, n1 + extra).unwrap();
        prop_assert_eq!(long.truncate(n1), expand_rational(&f, &a, &h, n1).unwrap());
    }

    #[test]
    fn scalar_mul_distributes(p in prop::sample::select(vec![2u32, 3]), g in prop::collection::vec(0u32..9, 0..4),
                              a in raw_tail(), b in raw_tail()) {
        let f = Field::prime(p).unwrap();
        let g = f.poly_from_codes(g.iter().map(|c| c % p).collect()).unwrap();
        let (a, b) = (tail(&f, &a), tail(&f, &b));
        let lhs = scalar_mul(&f, &g, &tail_add(&f, &a, &b)).unwrap();
        let rhs = tail_add(&f, &scalar_mul(&f, &g, &a).unwrap(), &scalar_mul(&f, &g, &b).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn weyl_sums_match_direct_summation(p in prop::sample::select(vec![2u32, 3]), si in 0usize..3, n in 0usize..5,
                                        a in raw_tail(), b in raw_tail()) {
        let f = Field::prime(p).unwrap();
        let sys = &systems(p)[si];
        let alphas: Vec<TailSeries> = [a, b].iter().take(sys.k()).map(|r| tail(&f, r)).collect();
        let freqs: Vec<Frequency> = alphas.iter().cloned().map(Frequency::Tail).collect();
        let s = weyl_sum(&f, &freqs, sys, n).unwrap();
        let direct = direct_sum(&f, &alphas, sys, n);
        let scale = f.q_pow(n) as f64;
        prop_assert!((s.to_complex() - direct).norm() <= 1e-12 * scale);
        // |M| <= 1
        prop_assert!(multiplier_m(&f, &freqs, sys, n).unwrap().norm() <= 1.0 + 1e-12);
        // S(-alpha) is the conjugate of S(alpha)
        let neg: Vec<Frequency> = alphas.iter().map(|t| Frequency::Tail(tail_neg(&f, t))).collect();
        let sn = weyl_sum(&f, &neg, sys, n).unwrap();
        prop_assert!(sn.value_eq(&s.conj()));
    }
}

#[test]
fn multiplier_is_one_at_zero() {
    for p in [2u32, 3] {
        let f = Field::prime(p).unwrap();
        for sys in systems(p) {
            for n in 0..5 {
                let zero = vec![Frequency::zero(); sys.k()];
                assert!((multiplier_m(&f, &zero, &sys, n).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
            }
        }
    }
}
