use proptest::prelude::*;

use jetlie_cli::dsl::{parse_document, print_document, Document};

fn coeff() -> impl Strategy<Value = String> {
    (-7i64..=7, 1i64..=5).prop_map(|(a, b)| if b == 1 { format!("{a}") } else { format!("{a}/{b}") })
}

fn term(names: &'static [&'static str]) -> impl Strategy<Value = String> {
    (coeff(), prop::collection::vec((0..names.len(), 1u32..=2), 0..3)).prop_map(move |(c, fs)| {
        let mut s = format!("({c})");
        for (i, e) in fs {
            s.push_str(&format!("*{}^{e}", names[i]));
        }
        s
    })
}

fn sum(names: &'static [&'static str]) -> impl Strategy<Value = String> {
    prop::collection::vec(term(names), 1..4).prop_map(|ts| ts.join(" + "))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn manifolds_round_trip(extra in sum(&["x1", "x2", "chi1"]), scale in coeff()) {
        let src = format!(
            "manifold {{ x: 2; u: 1; chi: 1; truncation: 5;\n omega u1 = nu1 + x1*chi1 + x2*({extra})*({scale}) ; }}"
        );
        let doc = parse_document(&src).unwrap();
        prop_assert!(matches!(doc, Document::Manifold(_)));
        let printed = print_document(&doc);
        let again = parse_document(&printed).unwrap();
        prop_assert_eq!(&again, &doc);
        prop_assert_eq!(print_document(&again), printed);
    }

    #[test]
    fn systems_round_trip(rhs in sum(&["x", "u", "u[x]"])) {
        let src = format!("system {{ independent: x; dependent: u; order: 2; eq u[x,x] = {rhs}; }}");
        let doc = parse_document(&src).unwrap();
        let printed = print_document(&doc);
        let again = parse_document(&printed).unwrap();
        prop_assert_eq!(&again, &doc);
        prop_assert_eq!(print_document(&again), printed);
    }

    #[test]
    fn equivalent_spellings_agree(a in coeff(), b in coeff()) {
        let one = format!("system {{ independent: x; dependent: u; order: 2; eq u[x,x] = ({a})*u[x] + ({b})*x*u; }}");
        let two = format!("system {{ independent: x; dependent: u; order: 2; eq u[x,x] = x*u*({b}) + u[x]*({a}); }}");
        prop_assert_eq!(parse_document(&one).unwrap(), parse_document(&two).unwrap());
    }
}
