use flatcover::numfield::*;
use proptest::prelude::*;

fn fields() -> Vec<Field> {
    vec![
        Field::new(&[-2, 0, 1], (rat_int(1), rat_int(2))).unwrap(),
        Field::new(&[-1, -1, 1], (rat_int(1), rat_int(2))).unwrap(),
        Field::new(&[5, 0, -5, 0, 1], (rat(9, 5), rat_int(2))).unwrap(),
    ]
}

fn element(f: &Field, c: &[(i64, i64)]) -> FieldElement {
    let coords: Vec<Rational> = c.iter().take(f.degree()).map(|&(n, d)| rat(n, d)).collect();
    f.element(&coords)
}

fn coeffs() -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((-50i64..50, 1i64..12), 4)
}

#[test]
fn spec_examples() {
    let s2 = &fields()[0];
    let phi = &fields()[1];
    let r = s2.generator();
    assert_eq!(&r * &r, s2.from_i64(2));
    let a = &s2.one() + &r;
    let inv = a.inverse().unwrap();
    assert_eq!(inv, &r - &s2.one());
    assert_eq!(&inv * &a, s2.one());
    let p = phi.generator();
    assert_eq!(p.square(), &p + &phi.one());
    assert_eq!(s2.zero().sign(), 0);
    assert_eq!((&s2.one() - &r).sign(), -1);
    assert_eq!((&phi.from_i64(3) - &p.scale(&rat_int(2))).sign(), -1);
    assert_eq!(Field::new(&[0, 1], (rat_int(-1), rat_int(1))).unwrap().degree(), 1);

    let (lo, hi) = r.approx(20);
    assert!(s2.from_rational(lo.clone()) <= r && r <= s2.from_rational(hi.clone()));
    assert!(&hi - &lo <= rat(1, 1 << 20));
    let q = s2.from_ratio(3, 4);
    assert_eq!(q.approx(30), (rat(3, 4), rat(3, 4)));
    let (lo, hi) = p.approx(10);
    assert!(phi.from_rational(lo.clone()) <= p && p <= phi.from_rational(hi.clone()));
    assert!(&hi - &lo <= rat(1, 1024));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms(fi in 0usize..3, a in coeffs(), b in coeffs(), c in coeffs()) {
        let f = &fields()[fi];
        let (a, b, c) = (element(f, &a), element(f, &b), element(f, &c));
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        if !a.is_zero() {
            prop_assert_eq!(&a * &a.inverse().unwrap(), f.one());
        }
    }

    #[test]
    fn sign_is_multiplicative(fi in 0usize..3, a in coeffs(), b in coeffs()) {
        let f = &fields()[fi];
        let (a, b) = (element(f, &a), element(f, &b));
        prop_assert_eq!((&a * &b).sign(), a.sign() * b.sign());
        prop_assert_eq!(a.sign(), a.sign_exact());
    }

    #[test]
    fn approx_intervals_nest(fi in 0usize..3, a in coeffs(), lo in 2u32..20, extra in 1u32..20) {
        let f = &fields()[fi];
        let a = element(f, &a);
        let (l1, h1) = a.approx(lo);
        let (l2, h2) = a.approx(lo + extra);
        prop_assert!(l1 <= l2 && h2 <= h1);
        prop_assert!(f.from_rational(l2) <= a && a <= f.from_rational(h2));
    }

    #[test]
    fn literals_round_trip(fi in 0usize..3, a in coeffs()) {
        let f = &fields()[fi];
        let a = element(f, &a);
        prop_assert_eq!(f.parse(&a.to_string()).unwrap(), a);
    }
}
