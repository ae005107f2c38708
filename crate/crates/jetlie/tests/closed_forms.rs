use jetlie::prolong::closed::{closed_form_check, closed_form_check_with, supported_table, ClosedForm, Reading};

#[test]
fn every_tabulated_formula_matches_the_recursion() {
    let table = supported_table();
    assert!(table.len() >= 19);
    for (n, m, f) in table {
        let rep = closed_form_check(n, m, f).unwrap();
        assert!(rep.compared > 0);
        assert!(rep.is_match(), "{f} at (n, m) = ({n}, {m}): {:?}", rep.mismatches.first());
    }
}

#[test]
fn scalar_formulas_cover_orders_one_to_four() {
    for (f, k) in [
        (ClosedForm::R1, 1),
        (ClosedForm::R2, 2),
        (ClosedForm::R3, 3),
        (ClosedForm::R4, 4),
    ] {
        assert_eq!(f.order(), k);
        assert!(f.is_scalar());
        assert!(closed_form_check(1, 1, f).unwrap().is_match());
    }
}

#[test]
fn prose_reading_of_the_partial_sums_disagrees_in_several_variables() {
    let expect = [
        (3, 2, 1, 32),
        (3, 1, 2, 0),
        (3, 2, 2, 144),
        (4, 2, 1, 112),
        (4, 1, 2, 0),
        (4, 2, 2, 448),
    ];
    for (k, n, m, bad) in expect {
        let rep = closed_form_check_with(n, m, ClosedForm::GeneralPartial(k), Reading::Prose).unwrap();
        assert_eq!(rep.mismatches.len(), bad, "order {k}, (n, m) = ({n}, {m})");
        let display = closed_form_check_with(n, m, ClosedForm::GeneralPartial(k), Reading::Display).unwrap();
        assert!(display.is_match());
    }
}
