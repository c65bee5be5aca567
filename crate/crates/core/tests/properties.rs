#![allow(clippy::eq_op)]

use num_bigint::BigInt;
use proptest::prelude::*;
use saito_forge_core::{parse_poly, Field, Monomial, Poly, Scalar, Var};

const FIELDS: [Field; 3] = [Field::Rationals, Field::Prime(1009), Field::Prime(2_305_843_009_213_693_951)];

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(1000)
}

fn scalar(field: Field) -> impl Strategy<Value = Scalar> {
    (-1_000_000i64..1_000_000, 1i64..1000).prop_map(move |(n, d)| {
        field
            .fraction(&BigInt::from(n), &BigInt::from(d))
            .unwrap_or_else(|_| field.from_i64(n))
    })
}

fn any_field() -> impl Strategy<Value = Field> {
    (0usize..FIELDS.len()).prop_map(|i| FIELDS[i])
}

fn poly(field: Field) -> impl Strategy<Value = Poly> {
    prop::collection::vec(((0u32..4, 0u32..4, 0u32..4), -20i64..20), 0..8).prop_map(move |terms| {
        Poly::from_terms(
            field,
            terms
                .into_iter()
                .map(|((a, b, c), k)| (Monomial::new(a, b, c), field.from_i64(k))),
        )
    })
}

fn form(field: Field, t: u32, nvars: usize) -> impl Strategy<Value = Poly> {
    let monos = Monomial::of_degree(t, nvars);
    prop::collection::vec(-20i64..20, monos.len())
        .prop_map(move |cs| Poly::from_terms(field, monos.iter().copied().zip(cs.into_iter().map(|c| field.from_i64(c)))))
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn field_axioms((f, a, b, c) in any_field().prop_flat_map(|f| (Just(f), scalar(f), scalar(f), scalar(f)))) {
        prop_assert_eq!((&a + &b) + c.clone(), &a + &(&b + &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a - &a, f.zero());
        if !a.is_zero() {
            prop_assert_eq!(&a * &a.inv().unwrap(), f.one());
            prop_assert_eq!(b.checked_div(&a).unwrap().checked_mul(&a).unwrap(), b.clone());
        }
    }

    #[test]
    fn scalar_round_trip((f, a) in any_field().prop_flat_map(|f| (Just(f), scalar(f)))) {
        prop_assert_eq!(f.parse_scalar(&a.to_string()).unwrap(), a);
    }

    #[test]
    fn parse_render_round_trip((f, p) in any_field().prop_flat_map(|f| (Just(f), poly(f)))) {
        prop_assert_eq!(parse_poly(&p.render(), f).unwrap(), p);
    }

    #[test]
    fn ring_axioms((p, q, r) in (poly(Field::Rationals), poly(Field::Rationals), poly(Field::Rationals))) {
        prop_assert_eq!(&p + &q, &q + &p);
        prop_assert_eq!(&p * &q, &q * &p);
        prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
        prop_assert_eq!(&p * &(&q + &r), &(&p * &q) + &(&p * &r));
        prop_assert!((&p - &p).is_zero());
        prop_assert_eq!(&p * &Poly::one(Field::Rationals), p.clone());
    }

    #[test]
    fn ring_axioms_mod_p((p, q, r) in (poly(Field::Prime(1009)), poly(Field::Prime(1009)), poly(Field::Prime(1009)))) {
        prop_assert_eq!(&(&p + &q) * &r, &(&p * &r) + &(&q * &r));
        prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
    }

    #[test]
    fn euler_identity((t, p) in (0u32..7).prop_flat_map(|t| (Just(t), form(Field::Rationals, t, 3)))) {
        if !p.is_zero() {
            prop_assert_eq!(p.euler_check().unwrap(), Field::Rationals.from_i64(t as i64));
        }
    }

    #[test]
    fn split_recomposition((m, p) in (1u32..7).prop_flat_map(|m| (Just(m), form(Field::Prime(1009), m, 2)))) {
        let f = Field::Prime(1009);
        let (qx, cx) = p.split_pure_power(Var::X, m);
        prop_assert_eq!(&qx.shift(1, 0, 0) + &Poly::term(cx, Monomial::new(0, m, 0)), p.clone());
        let (qy, cy) = p.split_pure_power(Var::Y, m);
        prop_assert_eq!(&qy.shift(0, 1, 0) + &Poly::term(cy, Monomial::new(m, 0, 0)), p.clone());
        prop_assert_eq!(qx.field(), f);
    }

    #[test]
    fn partials_commute(p in poly(Field::Rationals)) {
        for (a, b) in [(Var::X, Var::Y), (Var::X, Var::Z), (Var::Y, Var::Z)] {
            prop_assert_eq!(p.partial(a).partial(b), p.partial(b).partial(a));
        }
    }

    #[test]
    fn exact_division_recovers_factor((p, q) in (poly(Field::Rationals), poly(Field::Rationals))) {
        if !q.is_zero() {
            prop_assert_eq!((&p * &q).exact_div(&q), Some(p.clone()));
        }
    }
}
