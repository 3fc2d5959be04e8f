use proptest::prelude::*;

use pzeta_core::poly::{eval, parse_poly, specialize, AmbientPoly};
use pzeta_core::{AmbientField, FieldElement, FieldSpec, MultiPoly};

fn field_params() -> impl Strategy<Value = (u64, usize, usize)> {
    (prop::sample::select(vec![2u64, 3, 5, 7]), 1usize..=2, 1usize..=6)
        .prop_filter("small enough", |&(p, e, m)| (p as f64).powi((e * m) as i32) <= 1e6)
}

fn element(field: &AmbientField, coords: &[u32]) -> FieldElement {
    field.element(&coords[..field.degree()])
}

fn coords() -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0u32..1000, 12)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn field_axioms((p, e, m) in field_params(), a in coords(), b in coords(), c in coords()) {
        let f = AmbientField::new(&FieldSpec::new(p, e).unwrap(), m).unwrap();
        let (a, b, c) = (element(&f, &a), element(&f, &b), element(&f, &c));
        prop_assert_eq!(f.mul(&f.mul(&a, &b), &c), f.mul(&a, &f.mul(&b, &c)));
        prop_assert_eq!(f.add(&f.add(&a, &b), &c), f.add(&a, &f.add(&b, &c)));
        prop_assert_eq!(f.mul(&a, &f.add(&b, &c)), f.add(&f.mul(&a, &b), &f.mul(&a, &c)));
        prop_assert_eq!(f.mul(&a, &b), f.mul(&b, &a));
        prop_assert_eq!(f.add(&a, &f.neg(&a)), f.zero());
        if !a.is_zero() {
            prop_assert_eq!(f.mul(&a, &f.inv(&a).unwrap()), f.one());
        }
    }

    #[test]
    fn frobenius_is_an_automorphism((p, e, m) in field_params(), a in coords(), b in coords(), s in 0usize..6) {
        let f = AmbientField::new(&FieldSpec::new(p, e).unwrap(), m).unwrap();
        let (a, b) = (element(&f, &a), element(&f, &b));
        let fr = |x: &FieldElement| f.frob_q_power(x, s);
        prop_assert_eq!(fr(&f.add(&a, &b)), f.add(&fr(&a), &fr(&b)));
        prop_assert_eq!(fr(&f.mul(&a, &b)), f.mul(&fr(&a), &fr(&b)));
        let q = f.spec().q() as u128;
        prop_assert_eq!(fr(&a), f.pow(&a, q.pow(s as u32)));
    }

    #[test]
    fn eval_is_a_ring_homomorphism(
        p in prop::sample::select(vec![2u64, 3, 5]),
        ta in prop::collection::vec((prop::collection::vec(0u32..3, 2), 0u32..5), 0..5),
        tb in prop::collection::vec((prop::collection::vec(0u32..3, 2), 0u32..5), 0..5),
        pt in prop::collection::vec(coords(), 2),
    ) {
        let spec = FieldSpec::new(p, 1).unwrap();
        let f = AmbientField::new(&spec, 3).unwrap();
        let mk = |t: &[(Vec<u32>, u32)]| MultiPoly::from_terms(2, &spec, t.iter().map(|(m, c)| (m.clone(), vec![*c])));
        let (g, h) = (mk(&ta), mk(&tb));
        let point: Vec<FieldElement> = pt.iter().map(|c| element(&f, c)).collect();
        prop_assert_eq!(eval(&g.add(&h), &point, &f), f.add(&eval(&g, &point, &f), &eval(&h, &point, &f)));
        prop_assert_eq!(eval(&g.mul(&h), &point, &f), f.mul(&eval(&g, &point, &f), &eval(&h, &point, &f)));
        // specialize then evaluate = evaluate
        let sp = specialize(&g, 1, &point[0], &f);
        prop_assert_eq!(sp.eval(&point, &f), eval(&g, &point, &f));
        prop_assert_eq!(AmbientPoly::embed(&g, &f).eval(&point, &f), eval(&g, &point, &f));
    }

    #[test]
    fn print_then_parse_is_identity(
        p in prop::sample::select(vec![2u64, 3, 5]),
        e in 1usize..=2,
        terms in prop::collection::vec((prop::collection::vec(0u32..4, 3), prop::collection::vec(0u32..5, 2)), 0..6),
    ) {
        let spec = FieldSpec::new(p, e).unwrap();
        let g = MultiPoly::from_terms(3, &spec, terms);
        let printed = g.to_string();
        let back = parse_poly(&printed, 3, &spec).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(back.to_string(), printed);
    }
}

#[test]
fn subfield_membership_counts_and_bases() {
    for (p, e, m) in [(2u64, 1usize, 6usize), (3, 1, 4), (2, 2, 4), (5, 1, 4), (3, 2, 2), (7, 1, 4)] {
        let spec = FieldSpec::new(p, e).unwrap();
        let f = AmbientField::new(&spec, m).unwrap();
        let all: Vec<FieldElement> = f.enumerate_span(&f.subfield_basis(m).unwrap()).collect();
        assert_eq!(all.len() as u128, f.size());
        for s in (1..=m).filter(|s| m % s == 0) {
            let members: Vec<&FieldElement> = all.iter().filter(|a| f.is_in_subfield(a, s).unwrap()).collect();
            assert_eq!(members.len() as u128, spec.q().pow(s as u32) as u128, "p={p} e={e} m={m} s={s}");
            let mut span: Vec<FieldElement> = f.enumerate_span(&f.subfield_basis(s).unwrap()).collect();
            let mut expected: Vec<FieldElement> = members.into_iter().copied().collect();
            span.sort_by(|a, b| a.lex_cmp(b));
            expected.sort_by(|a, b| a.lex_cmp(b));
            assert_eq!(span, expected);
        }
    }
}

#[test]
fn construction_is_deterministic() {
    for (p, e, m) in [(2u64, 1usize, 8usize), (3, 2, 3), (5, 1, 5)] {
        let spec = FieldSpec::new(p, e).unwrap();
        let a = AmbientField::new(&spec, m).unwrap();
        let b = AmbientField::new(&FieldSpec::new(p, e).unwrap(), m).unwrap();
        assert_eq!(a.modulus(), b.modulus());
        assert_eq!(a.base_root(), b.base_root());
    }
}
