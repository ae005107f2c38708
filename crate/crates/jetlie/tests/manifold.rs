use jetlie::algebra::{Multiindex, Poly, Rat};
use jetlie::jet::JetCoord;
use jetlie::manifold::*;
use jetlie::prolong::VectorField;

fn build(n: usize, m: usize, p: usize, nt: u32, omega: &[&[(&[u16], (i64, i64))]]) -> ManifoldSpec {
    let vars = ManifoldSpec::variables(n, m, p);
    let comps = omega
        .iter()
        .map(|terms| {
            Poly::from_terms(
                &vars,
                terms
                    .iter()
                    .map(|(e, (a, b))| (Multiindex::from_slice(e), Rat::new(*a, *b))),
            )
        })
        .collect();
    ManifoldSpec::new(n, m, p, comps, nt).unwrap()
}

fn line() -> ManifoldSpec {
    build(1, 1, 1, 6, &[&[(&[0, 1, 0], (1, 1)), (&[1, 0, 1], (1, 1))]])
}

/// `u1 = ν1`, `u2 = ν2 + xχ`.
fn pair() -> ManifoldSpec {
    build(
        1,
        2,
        1,
        6,
        &[
            &[(&[0, 1, 0, 0], (1, 1))],
            &[(&[0, 0, 1, 0], (1, 1)), (&[1, 0, 0, 1], (1, 1))],
        ],
    )
}

fn test_manifolds() -> Vec<ManifoldSpec> {
    vec![
        line(),
        pair(),
        build(1, 1, 1, 6, &[&[(&[0, 1, 0], (1, 1))]]),
        build(1, 1, 1, 6, &[&[(&[0, 1, 0], (1, 1)), (&[1, 0, 1], (1, 1)), (&[2, 1, 1], (1, 1))]]),
        build(1, 1, 1, 6, &[&[(&[0, 1, 0], (1, 1)), (&[1, 0, 1], (1, 1)), (&[2, 0, 2], (1, 2))]]),
        build(2, 1, 1, 6, &[&[(&[0, 0, 1, 0], (1, 1)), (&[1, 0, 0, 1], (1, 1))]]),
        build(1, 1, 2, 6, &[&[(&[0, 1, 0, 0], (1, 1)), (&[1, 0, 1, 0], (1, 1)), (&[2, 0, 0, 1], (1, 1))]]),
        build(
            2,
            1,
            2,
            6,
            &[&[
                (&[0, 0, 1, 0, 0], (1, 1)),
                (&[1, 0, 0, 1, 0], (1, 1)),
                (&[0, 1, 0, 0, 1], (1, 1)),
                (&[1, 1, 1, 1, 0], (-1, 3)),
            ]],
        ),
    ]
}

#[test]
fn functional_equation_holds_on_all_test_manifolds() {
    for m in test_manifolds() {
        let d = dual_equations(&m).unwrap();
        assert!(dual_residual(&m, &d).iter().all(Poly::is_zero), "{m}");
    }
}

#[test]
fn dual_by_fixed_point() {
    let m = build(1, 1, 1, 5, &[&[(&[0, 1, 0], (1, 1)), (&[1, 0, 1], (1, 1)), (&[2, 1, 1], (1, 1))]]);
    let d = dual_equations(&m).unwrap();
    assert!(dual_residual(&m, &d).iter().all(Poly::is_zero));
    assert_eq!(d.truncation(), 5);
    let trivial = build(1, 1, 1, 4, &[&[(&[0, 1, 0], (1, 1))]]);
    assert_eq!(dual_equations(&trivial).unwrap().output(0).to_string(), "u1");
}

#[test]
fn swapping_twice_recovers_omega() {
    for m in test_manifolds() {
        let back = m.swapped().unwrap().swapped().unwrap();
        assert_eq!(back.omega(), m.omega(), "{m}");
    }
}

#[test]
fn pair_is_not_covering() {
    let c = covering_analysis(&pair(), None).unwrap();
    assert_eq!(c.dim, 4);
    assert!(!c.covering);
    assert_eq!(c.rank_profile.iter().max(), Some(&3));
    assert!(degeneracy_check(&pair(), 2).unwrap().is_none());
}

#[test]
fn inert_parameter_is_not_covering() {
    let m = build(1, 1, 1, 6, &[&[(&[0, 1, 0], (1, 1))]]);
    let c = covering_analysis(&m, Some(6)).unwrap();
    assert!(!c.covering);
    assert!(c.rank_profile.iter().all(|&r| r <= 2));
    let s = solvability_parameters(&m, 6).unwrap();
    assert!(!s.solvable);
    assert!(!solvability_variables(&m, 5).unwrap().solvable);
}

#[test]
fn chain_shapes() {
    let m = line();
    let g1 = chain_map(&m, 1, false).unwrap();
    let outs: Vec<String> = g1.composed.outputs().iter().map(|p| p.to_string()).collect();
    assert_eq!(outs, ["x_1", "0", "0", "0"]);
    let d1 = chain_map(&m, 1, true).unwrap();
    let outs: Vec<String> = d1.composed.outputs().iter().map(|p| p.to_string()).collect();
    assert_eq!(outs, ["0", "0", "0", "chi_1"]);
}

#[test]
fn dual_chain_with_frozen_first_block_is_the_chain() {
    for m in test_manifolds() {
        for k in 1..4 {
            let g = chain_map(&m, k, false).unwrap().composed;
            let d = chain_map(&m, k + 1, true).unwrap();
            let dv = d.composed.vars().clone();
            let first = &d.steps[0].vars;
            let mut args = vec![Poly::zero(g.vars()); dv.len()];
            let mut next = 0;
            for (i, a) in args.iter_mut().enumerate() {
                if !first.contains(&i) {
                    *a = Poly::var(g.vars(), next);
                    next += 1;
                }
            }
            let restricted = d.composed.substitute(&args, g.vars());
            assert_eq!(restricted, g.outputs(), "k = {k}, {m}");
        }
    }
}

#[test]
fn pde_examples() {
    let two = build(1, 1, 2, 6, &[&[(&[0, 1, 0, 0], (1, 1)), (&[1, 0, 1, 0], (1, 1)), (&[2, 0, 0, 1], (1, 1))]]);
    let s = jetlie::manifold::pde_from_manifold(&two).unwrap();
    assert_eq!(s.kappa(), 3);
    let eqs: Vec<(JetCoord, bool)> = s.equations().iter().map(|(c, f)| (c.clone(), f.is_zero())).collect();
    assert_eq!(eqs, vec![(JetCoord::new(0, &[0, 0, 0]), true)]);

    let curved = build(1, 1, 1, 6, &[&[(&[0, 1, 0], (1, 1)), (&[1, 0, 1], (1, 1)), (&[2, 0, 2], (1, 2))]]);
    let s = pde_from_manifold(&curved).unwrap();
    assert_eq!(s.kappa(), 2);
    assert!(!s.equations()[&JetCoord::new(0, &[0, 0])].is_zero());
}

#[test]
fn series_round_trip_reproduces_omega() {
    for m in test_manifolds() {
        if !solvability_parameters(&m, 5).unwrap().solvable {
            continue;
        }
        let r = round_trip_residual(&m).unwrap();
        assert!(r.iter().all(Poly::is_zero), "{m}: {r:?}");
    }
}

#[test]
fn lifts_annihilate_the_defining_equations() {
    let m = line();
    let b = m.base();
    let fields = [
        VectorField::dx(&b, 0),
        VectorField::du(&b, 0),
        VectorField::along_x(&b, 0, b.x(0)),
        VectorField::along_u(&b, 0, b.u(0)),
        VectorField::along_u(&b, 0, b.x(0)),
    ];
    for x in &fields {
        let l = lift_to_parameters(&m, x, 2).unwrap();
        assert!(l.unique);
        assert!(lift_residual(&m, x, &l).unwrap().iter().all(Poly::is_zero), "{x}");
    }
    let l = lift_to_parameters(&m, &VectorField::du(&b, 0), 2).unwrap();
    assert_eq!(l.pi[0].to_string(), "1");
    assert!(l.lambda[0].is_zero());
    let bad = VectorField::along_u(&b, 0, &b.x(0) * &b.x(0));
    assert!(matches!(
        lift_to_parameters(&m, &bad, 2),
        Err(jetlie::Error::Inconsistent(_))
    ));
}

#[test]
fn bounds() {
    assert_eq!(jet_bound(1, 1, 2, 2, 1, 3).unwrap(), (9, 770));
    let (_, b) = jet_bound(2, 2, 2, 1, 1, 1).unwrap();
    assert_eq!(b % 2, 0);
    assert!(jet_bound(0, 1, 1, 1, 1, 1).is_err());
}

#[test]
fn analysis_summary_of_degenerate_example() {
    let m = build(2, 1, 1, 6, &[&[(&[0, 0, 1, 0], (1, 1)), (&[1, 0, 0, 1], (1, 1))]]);
    let a = analyze(&m, None).unwrap();
    let s = a.summary();
    assert!(s[1].starts_with("not solvable with respect to the variables"));
    assert_eq!(s[2], "degenerate: witness d/dx2");
}
