use num_bigint::BigUint;
use proptest::prelude::*;

use typetwo::algebra::{qr, Poly, Q};
use typetwo::machine::{decode_guess, encode_guess};
use typetwo::reductions::{get_witness, structured_push_check, Agreement, DEPTH};
use typetwo::spaces::{delta_q_decode, delta_q_name, nu_q, nu_q_inv};
use typetwo::stream::{pair, pair_big, unpair, unpair_big, UPStream};

fn up(alphabet: u64) -> impl Strategy<Value = UPStream> {
    (prop::collection::vec(0..alphabet, 0..8), prop::collection::vec(0..alphabet, 1..5))
        .prop_map(|(u, v)| UPStream::from_u64(&u, &v))
}

fn rational() -> impl Strategy<Value = Q> {
    (-500i64..500, 1i64..200).prop_map(|(n, d)| qr(n, d))
}

proptest! {
    #[test]
    fn pairing_roundtrip(n in 0u64..1 << 30, m in 0u64..1 << 30) {
        prop_assert_eq!(unpair(pair(n, m)), (n, m));
    }

    #[test]
    fn unpair_is_onto(k in 0u64..1 << 60) {
        let (n, m) = unpair(k);
        prop_assert_eq!(pair(n, m), k);
    }

    #[test]
    fn big_pairing_agrees(n in 0u64..1 << 30, m in 0u64..1 << 30) {
        let k = pair_big(&BigUint::from(n), &BigUint::from(m));
        prop_assert_eq!(k.clone(), BigUint::from(pair(n, m)));
        prop_assert_eq!(unpair_big(&k), (BigUint::from(n), BigUint::from(m)));
    }

    #[test]
    fn canonical_form_names_the_same_sequence(s in up(3)) {
        let c = s.canonicalize();
        prop_assert_eq!(s.take(40), c.take(40));
        prop_assert_eq!(c.canonicalize(), c.clone());
        prop_assert!(c.prefix().len() <= s.prefix().len());
        prop_assert!(c.period().len() <= s.period().len());
    }

    #[test]
    fn unrolling_a_period_is_invisible(s in up(3), extra in 0usize..6) {
        let longer = UPStream::new(s.take(s.prefix().len() + extra), {
            let mut p = s.period().to_vec();
            let shift = extra % p.len();
            p.rotate_left(shift);
            p.extend_from_slice(&p.clone());
            p
        });
        prop_assert!(s.same_sequence(&longer));
    }

    #[test]
    fn nu_q_roundtrip(x in rational()) {
        prop_assert_eq!(nu_q(&nu_q_inv(&x)), x);
    }

    #[test]
    fn nu_q_inverse_is_least(k in 0u64..20_000) {
        let k = BigUint::from(k);
        prop_assert!(nu_q_inv(&nu_q(&k)) <= k);
    }

    #[test]
    fn delta_q_roundtrip(n in 0i64..60, d in 1i64..60, k in 0usize..10) {
        let r = qr(n, d);
        let name = delta_q_name(&r, k).unwrap();
        prop_assert_eq!(delta_q_decode(&name).unwrap(), r);
    }

    #[test]
    fn guess_codes_roundtrip(codes in prop::collection::vec(0u64..40, 0..6)) {
        if codes.len() <= 3 {
            prop_assert!(encode_guess(&codes).is_some());
        }
        if let Some(n) = encode_guess(&codes) {
            prop_assert_eq!(decode_guess(n), codes);
        }
    }

    #[test]
    fn guess_numbers_roundtrip(n in 0u64..1_000_000) {
        prop_assert_eq!(encode_guess(&decode_guess(n)), Some(n));
    }

    #[test]
    fn polynomial_division_identity(a in prop::collection::vec(-9i64..9, 1..7), b in prop::collection::vec(-9i64..9, 1..4)) {
        let (a, b) = (Poly::from_ints(&a), Poly::from_ints(&b));
        prop_assume!(!b.is_zero());
        let (quot, rem) = a.divmod(&b).unwrap();
        prop_assert_eq!(&(&quot * &b) + &rem, a);
        prop_assert!(rem.is_zero() || rem.degree() < b.degree());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn binary_witnesses_match_their_push(s in up(2), id in prop::sample::select(vec!["R11", "R12b", "R16", "R18", "R19", "R23"])) {
        let w = get_witness(id).unwrap();
        let x = w.source.parse_instance(&s.to_string()).unwrap();
        prop_assert!(matches!(structured_push_check(&w, &x, DEPTH), Agreement::Agree), "{} on {}", id, s);
    }

    #[test]
    fn sequence_witnesses_match_their_push(s in up(6), id in prop::sample::select(vec!["R1", "R3e", "R3f", "R5", "R6"])) {
        let w = get_witness(id).unwrap();
        let x = w.source.parse_instance(&s.to_string()).unwrap();
        prop_assert!(matches!(structured_push_check(&w, &x, DEPTH), Agreement::Agree), "{} on {}", id, s);
    }

    #[test]
    fn closed_set_witnesses_match_their_push(elems in prop::collection::btree_set(0u64..20, 1..5), id in prop::sample::select(vec!["R3a", "R3c", "R3d", "R3j", "R4a", "R15", "R22"])) {
        let body: Vec<String> = elems.iter().map(u64::to_string).collect();
        let lit = format!("set:{{{}}}", body.join(","));
        let w = get_witness(id).unwrap();
        let x = w.source.parse_instance(&lit).unwrap();
        prop_assert!(matches!(structured_push_check(&w, &x, DEPTH), Agreement::Agree), "{} on {}", id, lit);
    }
}
