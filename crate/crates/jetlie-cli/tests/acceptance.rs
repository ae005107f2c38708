//! Acceptance run: one PASS/FAIL line per criterion. All comparisons are exact
//! rational equalities (tolerance 0); randomized criteria use fixed ChaCha8 seeds.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use jetlie::algebra::{Multiindex, Poly, Rat};
use jetlie::determine::determining_system;
use jetlie::jet::{coords_up_to, JetCoord, SystemSpec};
use jetlie::manifold::{
    analyze, chain_map, dual_equations, dual_residual, jet_bound, lift_residual, lift_to_parameters,
    pde_from_manifold, round_trip_residual, ManifoldSpec,
};
use jetlie::prolong::closed::{closed_form_check, supported_table};
use jetlie::prolong::{prolong_coeff, BaseSpace, DerivSymbol, CoeffForm, VectorField};
use jetlie::solve::{ansatz_solve, match_solution_shape, theorem1_bound, Shape};
use jetlie::symfields::{
    closure_check, exp_flow, family_fields, finite_symmetry_check, generator_family,
    prolong_bracket_identity, sample_solutions, scalar_projective_map, Family,
};
use jetlie_cli::dsl::{parse_document, print_document, Document};

type Check = Result<String, String>;

const EXAMPLES: [(&str, &str); 10] = [
    ("cubics", include_str!("../examples/cubics.jet")),
    ("curved_line", include_str!("../examples/curved_line.jet")),
    ("degenerate_plane", include_str!("../examples/degenerate_plane.jet")),
    ("flat_second_order", include_str!("../examples/flat_second_order.jet")),
    ("line", include_str!("../examples/line.jet")),
    ("pair", include_str!("../examples/pair.jet")),
    ("parabolas", include_str!("../examples/parabolas.jet")),
    ("quadratic_slope", include_str!("../examples/quadratic_slope.jet")),
    ("third_order", include_str!("../examples/third_order.jet")),
    ("two_components", include_str!("../examples/two_components.jet")),
];

fn manifold(name: &str) -> ManifoldSpec {
    let src = EXAMPLES.iter().find(|(n, _)| *n == name).unwrap().1;
    match parse_document(src).unwrap() {
        Document::Manifold(m) => m,
        Document::System(_) => panic!("{name} is a system"),
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: jetlie::Error) -> String {
    e.to_string()
}

fn closed_forms() -> Check {
    let table = supported_table();
    let mut compared = 0;
    for (n, m, f) in &table {
        let rep = closed_form_check(*n, *m, *f).map_err(err)?;
        compared += rep.compared;
        ensure(rep.is_match(), || {
            format!("{f} at (n, m) = ({n}, {m}): {} mismatches", rep.mismatches.len())
        })?;
    }
    Ok(format!("{} tabulated formulas agree with the recursion on {compared} monomials", table.len()))
}

const DIMENSION_CASES: [(usize, usize, usize); 9] = [
    (1, 1, 2),
    (1, 1, 3),
    (1, 1, 4),
    (1, 1, 5),
    (2, 1, 2),
    (1, 2, 2),
    (2, 1, 3),
    (1, 2, 3),
    (2, 2, 2),
];

fn dimensions() -> Check {
    let mut out = Vec::new();
    for (n, m, k) in DIMENSION_CASES {
        let s = SystemSpec::homogeneous(n, m, k).map_err(err)?;
        let rep = ansatz_solve(&determining_system(&s).map_err(err)?, k.max(2) as u32).map_err(err)?;
        let bound = theorem1_bound(n, m, k).map_err(err)?;
        ensure(rep.dimension as u128 == bound && rep.stabilized, || {
            format!(
                "(n, m, kappa) = ({n}, {m}, {k}): dimension {} (stabilized: {}), bound {bound}",
                rep.dimension, rep.stabilized
            )
        })?;
        out.push(format!("({n},{m},{k})={bound}"));
    }
    Ok(format!("solver dimension equals the bound and stabilizes: {}", out.join(" ")))
}

fn shapes() -> Check {
    let cases = [
        (Shape::Eq46, 1, 1, 3),
        (Shape::Eq46, 1, 1, 4),
        (Shape::Eq46, 1, 1, 5),
        (Shape::Eq54, 2, 1, 2),
        (Shape::Eq54, 1, 2, 2),
        (Shape::Eq57, 2, 1, 3),
        (Shape::Eq57, 1, 2, 3),
    ];
    for (shape, n, m, k) in cases {
        let s = SystemSpec::homogeneous(n, m, k).map_err(err)?;
        let rep = ansatz_solve(&determining_system(&s).map_err(err)?, k as u32).map_err(err)?;
        let sm = match_solution_shape(&rep, shape, k).map_err(err)?;
        ensure(sm.matches, || {
            format!(
                "{shape:?} at ({n}, {m}, {k}): solver {} vs family {}",
                sm.solver_dimension, sm.family_dimension
            )
        })?;
    }
    Ok(format!("{} solution spaces equal the span of their closed-form family", cases.len()))
}

fn determining_equations() -> Check {
    let r = |xo: u16, uo: u16| DerivSymbol::r(0, &[xo], &[uo]);
    let q = |xo: u16, uo: u16| DerivSymbol::q(0, &[xo], &[uo]);
    for k in 3..6u16 {
        let s = SystemSpec::homogeneous(1, 1, k as usize).map_err(err)?;
        let b = s.base().clone();
        let d = determining_system(&s).map_err(err)?;
        let kk = k as i64;
        let c2 = kk * (kk - 1) / 2;
        let c3 = kk * (kk - 1) * (kk - 2) / 6;
        let expected: [Vec<(DerivSymbol, i64)>; 5] = [
            vec![(r(k, 0), 1)],
            vec![(r(2, 1), c2), (q(3, 0), -c3)],
            vec![(r(1, 1), kk), (q(2, 0), -c2)],
            vec![(r(0, 2), kk), (q(1, 1), -kk * kk)],
            vec![(q(0, 1), 1)],
        ];
        for (i, parts) in expected.iter().enumerate() {
            let mut f = CoeffForm::zero(&b.vars);
            for (sym, w) in parts {
                f.add_symbol(sym.clone(), &Poly::constant(&b.vars, Rat::from_int(*w)));
            }
            ensure(d.contains_equation(&f), || {
                format!("kappa = {k}: equation {} missing", i + 1)
            })?;
        }
    }
    Ok("all five equations present for kappa = 3, 4, 5".into())
}

fn eq58_dimension(n: usize, m: usize, k: usize) -> usize {
    let binom = |a: usize, b: usize| (0..b).fold(1usize, |acc, i| acc * (a - i) / (i + 1));
    n * n + 2 * n + m * m + m * binom(n + k - 1, k - 1)
}

fn closure() -> Check {
    let mut out = Vec::new();
    for (n, m) in [(1, 1), (2, 1), (1, 2)] {
        for (fam, k, want) in [
            (Family::Eq55, 2, (n + m) * (n + m + 2)),
            (Family::Eq58, 3, eq58_dimension(n, m, 3)),
        ] {
            let rep = closure_check(&family_fields(fam, n, m, k).map_err(err)?).map_err(err)?;
            ensure(rep.closed && rep.dimension == want, || {
                format!("{fam} at ({n}, {m}, {k}): closed {} dimension {} (want {want})", rep.closed, rep.dimension)
            })?;
            out.push(format!("{fam}({n},{m})={want}"));
        }
    }
    Ok(format!("families closed with expected dimensions: {}", out.join(" ")))
}

fn random_field(rng: &mut ChaCha8Rng, b: &BaseSpace) -> VectorField {
    let nv = b.n + b.m;
    let coeffs = (0..nv)
        .map(|_| {
            let mut p = Poly::zero(&b.vars);
            for _ in 0..rng.gen_range(0..=3) {
                let mut e = vec![0u16; nv];
                for _ in 0..rng.gen_range(0..=2) {
                    e[rng.gen_range(0..nv)] += 1;
                }
                let c = Rat::new(rng.gen_range(-4..=4), rng.gen_range(1..=3));
                p.add_term(Multiindex::from_slice(&e), &c);
            }
            p
        })
        .collect();
    VectorField::from_coeffs(b, coeffs)
}

fn random_identities() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6272_6163_6b65_74);
    let dims = [(1, 1), (2, 1), (1, 2), (2, 2)];
    for t in 0..25 {
        let (n, m) = dims[t % dims.len()];
        let b = BaseSpace::standard(n, m);
        let (x, y) = (random_field(&mut rng, &b), random_field(&mut rng, &b));
        ensure(prolong_bracket_identity(&x, &y, 2).map_err(err)?, || {
            format!("bracket identity fails for trial {t}: X = {x}, Y = {y}")
        })?;
    }
    for t in 0..25 {
        let (n, m) = dims[t % dims.len()];
        let b = BaseSpace::standard(n, m);
        let (x, y) = (random_field(&mut rng, &b), random_field(&mut rng, &b));
        let a = Rat::new(rng.gen_range(-5..=5), rng.gen_range(1..=4));
        let c = Rat::new(rng.gen_range(-5..=5), rng.gen_range(1..=4));
        let z = x.combine(&a, &y, &c);
        for coord in coords_up_to(n, m, 2).into_iter().filter(|c| c.order() > 0) {
            let ks = coord.index_vec();
            let lhs = prolong_coeff(&z, coord.comp(), &ks).map_err(err)?;
            let rhs = prolong_coeff(&x, coord.comp(), &ks)
                .map_err(err)?
                .scale(&a)
                .add(&prolong_coeff(&y, coord.comp(), &ks).map_err(err)?.scale(&c));
            ensure(lhs == rhs, || format!("linearity fails for trial {t} at {coord:?}"))?;
        }
    }
    Ok("25 prolonged-bracket identities and 25 linearity triples hold (kappa = 2, degree <= 2)".into())
}

fn finite_flows() -> Check {
    let params = [Rat::one(), Rat::from_int(-1), Rat::new(1, 2)];
    let mut count = 0;
    for (fam, k) in [(Family::Eq55, 2), (Family::Eq58, 3)] {
        for (n, m) in [(1, 1), (2, 1)] {
            let b = BaseSpace::standard(n, m);
            let sols = sample_solutions(&b, k);
            for g in generator_family(fam, n, m, k).map_err(err)? {
                for s in &params {
                    let h = exp_flow(&b, &g, s).map_err(err)?;
                    let rep = finite_symmetry_check(&h, k, &sols).map_err(err)?;
                    ensure(rep.passed && rep.exact, || {
                        format!("{fam} ({n},{m}) {g} at s = {s}: {}", rep.failures.join("; "))
                    })?;
                    count += 1;
                }
            }
        }
    }
    let one = Rat::one();
    let h = scalar_projective_map(&Rat::zero(), &one, &one, &one, &[], 3).map_err(err)?;
    let b = BaseSpace::standard(1, 1);
    let parabola = b.x(0).pow(2);
    let rep = finite_symmetry_check(&h, 3, &[vec![parabola.clone()]]).map_err(err)?;
    ensure(rep.passed && rep.exact && rep.transformed[0][0] == parabola, || {
        "projective map does not carry u = x^2 to u' = x'^2".into()
    })?;
    Ok(format!(
        "{count} flows (eq55 at kappa 2, eq58 at kappa 3) map 3 sample solutions to solutions; projective map carries u = x^2 to u' = x'^2"
    ))
}

fn manifold_facts() -> Check {
    for name in ["line", "curved_line", "parabolas", "cubics", "degenerate_plane", "pair"] {
        let m = manifold(name);
        let d = dual_equations(&m).map_err(err)?;
        ensure(dual_residual(&m, &d).iter().all(Poly::is_zero), || {
            format!("{name}: dual functional equation fails")
        })?;
    }
    for (name, k) in [("parabolas", 3), ("cubics", 4)] {
        let a = analyze(&manifold(name), None).map_err(err)?;
        let (l0, l0s) = (a.parameters.order, a.variables.order);
        ensure(a.parameters.solvable && a.variables.solvable && l0 == k - 1 && l0s == 1, || {
            format!("{name}: l0 = {l0}, l0* = {l0s}, want {} and 1", k - 1)
        })?;
    }
    let plane = analyze(&manifold("degenerate_plane"), None).map_err(err)?;
    ensure(!plane.variables.solvable, || "degenerate plane solvable in the variables".into())?;
    ensure(plane.degeneracy.map(|w| w.to_string()).as_deref() == Some("d/dx2"), || {
        "degenerate plane: witness d/dx2 not found".into()
    })?;
    let pair = analyze(&manifold("pair"), None).map_err(err)?;
    ensure(!pair.covering.covering && pair.covering.rank_profile.iter().max() == Some(&3), || {
        format!("pair: covering {} profile {:?}", pair.covering.covering, pair.covering.rank_profile)
    })?;
    let line = analyze(&manifold("line"), None).map_err(err)?;
    ensure(line.covering.covering && line.parameters.solvable && line.variables.solvable, || {
        "line should be covering and solvable both ways".into()
    })?;
    let lm = manifold("line");
    for k in 1..4 {
        let g = chain_map(&lm, k, false).map_err(err)?.composed;
        let d = chain_map(&lm, k + 1, true).map_err(err)?;
        let first = &d.steps[0].vars;
        let mut next = 0;
        let args: Vec<Poly> = (0..d.composed.vars().len())
            .map(|i| {
                if first.contains(&i) {
                    Poly::zero(g.vars())
                } else {
                    next += 1;
                    Poly::var(g.vars(), next - 1)
                }
            })
            .collect();
        ensure(d.composed.substitute(&args, g.vars()) == g.outputs(), || {
            format!("dual chain of length {} does not restrict to the chain", k + 1)
        })?;
    }
    let bound = jet_bound(1, 1, 2, 2, 1, 3).map_err(err)?;
    ensure(bound == (9, 770), || format!("jet bound {bound:?}"))?;
    Ok("dual residuals vanish to degree 6, l0 = kappa - 1 and l0* = 1 for kappa = 3, 4, witness d/dx2, pair stalls at rank 3 of 4, bound (9, 770)".into())
}

fn round_trips() -> Check {
    let line = manifold("line");
    let s = pde_from_manifold(&line).map_err(err)?;
    let uxx = JetCoord::new(0, &[0, 0]);
    ensure(s.kappa() == 2 && s.equations().len() == 1 && s.equations().get(&uxx).is_some_and(|f| f.is_zero()), || {
        "line does not give u_xx = 0".into()
    })?;
    for name in ["line", "parabolas", "curved_line"] {
        ensure(round_trip_residual(&manifold(name)).map_err(err)?.iter().all(Poly::is_zero), || {
            format!("{name}: series solution does not reproduce the manifold")
        })?;
    }
    let b = line.base();
    let lift = lift_to_parameters(&line, &VectorField::dx(&b, 0), 2).map_err(err)?;
    ensure(lift.unique && lift.pi[0].to_string() == "-chi1" && lift.lambda[0].is_zero(), || {
        format!("lift of d/dx: pi = {}, lambda = {}", lift.pi[0], lift.lambda[0])
    })?;
    let residual = lift_residual(&line, &VectorField::dx(&b, 0), &lift).map_err(err)?;
    ensure(residual.iter().all(Poly::is_zero), || "lift of d/dx is not tangent".into())?;
    let mut printed = BTreeMap::new();
    for (name, src) in EXAMPLES {
        let doc = parse_document(src).map_err(|e| format!("{name}: {e}"))?;
        let text = print_document(&doc);
        let again = parse_document(&text).map_err(|e| format!("{name}: {e}"))?;
        ensure(again == doc && print_document(&again) == text, || format!("{name}: DSL round trip differs"))?;
        printed.insert(name, text.len());
    }
    Ok(format!(
        "line gives u_xx = 0, series round trips vanish, lift of d/dx is -chi1 d/dnu1, {} inputs round-trip",
        printed.len()
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("closed-form prolongation table", closed_forms),
        ("symmetry dimensions at the bound", dimensions),
        ("solution shapes", shapes),
        ("determining equations of the homogeneous scalar system", determining_equations),
        ("bracket closure of the generator families", closure),
        ("random prolongation identities", random_identities),
        ("finite flows", finite_flows),
        ("manifold structure", manifold_facts),
        ("manifold and input round trips", round_trips),
    ];
    println!("tolerance: exact rational equality; random seeds fixed (ChaCha8)");
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{}] {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
