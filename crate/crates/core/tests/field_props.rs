use ffcircle::{Field, FieldParams, Poly};
use proptest::prelude::*;

fn fields() -> Vec<Field> {
    ["2", "3", "5", "2,2", "3,2", "2,3"].iter().map(|s| Field::new(FieldParams::parse(s).unwrap()).unwrap()).collect()
}

fn poly(field: &Field, raw: &[u32]) -> Poly {
    field.poly_from_codes(raw.iter().map(|c| c % field.q()).collect()).unwrap()
}

fn raw() -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0u32..64, 0..7)
}

proptest! {
    #[test]
    fn ring_axioms(fi in 0usize..6, a in raw(), b in raw(), c in raw()) {
        let f = &fields()[fi];
        let (a, b, c) = (poly(f, &a), poly(f, &b), poly(f, &c));
        prop_assert_eq!(f.poly_add(&f.poly_add(&a, &b), &c), f.poly_add(&a, &f.poly_add(&b, &c)));
        prop_assert_eq!(f.poly_mul(&f.poly_mul(&a, &b), &c), f.poly_mul(&a, &f.poly_mul(&b, &c)));
        prop_assert_eq!(f.poly_mul(&a, &f.poly_add(&b, &c)), f.poly_add(&f.poly_mul(&a, &b), &f.poly_mul(&a, &c)));
        prop_assert_eq!(f.poly_mul(&a, &b), f.poly_mul(&b, &a));
        prop_assert_eq!(f.poly_add(&a, &f.poly_neg(&a)), Poly::zero());
        prop_assert_eq!(f.poly_sub(&f.poly_add(&a, &b), &b), a);
    }

    #[test]
    fn divmod_reconstructs(fi in 0usize..6, a in raw(), b in raw()) {
        let f = &fields()[fi];
        let (a, b) = (poly(f, &a), poly(f, &b));
        prop_assume!(!b.is_zero());
        let (q, r) = f.poly_divmod(&a, &b).unwrap();
        prop_assert_eq!(f.poly_add(&f.poly_mul(&q, &b), &r), a);
        prop_assert!(r.degree_i64() < b.degree_i64());
    }

    #[test]
    fn gcd_is_greatest(fi in 0usize..6, d in raw(), x in raw(), y in raw()) {
        let f = &fields()[fi];
        let (d, x, y) = (poly(f, &d), poly(f, &x), poly(f, &y));
        prop_assume!(!d.is_zero() && !(x.is_zero() && y.is_zero()));
        let (a, b) = (f.poly_mul(&d, &x), f.poly_mul(&d, &y));
        let g = f.gcd_monic(&[a.clone(), b.clone()]).unwrap();
        prop_assert!(g.is_monic());
        prop_assert!(f.poly_rem(&a, &g).unwrap().is_zero());
        prop_assert!(f.poly_rem(&b, &g).unwrap().is_zero());
        prop_assert!(f.poly_rem(&g, &d).unwrap().is_zero());
    }

    #[test]
    fn index_roundtrip(fi in 0usize..6, a in raw()) {
        let f = &fields()[fi];
        let a = poly(f, &a);
        let i = f.poly_index(&a).unwrap();
        prop_assert_eq!(f.poly_from_index(i), a.clone());
        prop_assert_eq!(f.idx_degree(i), a.degree());
    }
}

#[test]
fn enumeration_counts() {
    for f in fields() {
        for n in 0..4usize {
            let all = f.enumerate_degree_lt(n).unwrap();
            assert_eq!(all.len() as u128, f.q_pow(n));
            let distinct: std::collections::HashSet<_> = all.iter().cloned().collect();
            assert_eq!(distinct.len(), all.len());
            assert!(all.iter().all(|p| p.degree_i64() < n as i64));
        }
    }
}

#[test]
fn trace_is_additive() {
    for f in fields() {
        for x in 0..f.q() {
            for y in 0..f.q() {
                assert_eq!(f.trace(f.add(x, y)), (f.trace(x) + f.trace(y)) % f.p());
            }
        }
    }
}
