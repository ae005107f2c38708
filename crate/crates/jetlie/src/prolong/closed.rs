//! Hard-coded closed-form prolongation coefficients, compared against the
//! recursive construction.
//!
//! Scalar formulas (`n = m = 1`) are stored as coefficient tables. General
//! formulas are generated by summing Kronecker-delta expressions over every
//! index tuple exactly as written, so a wrong range shows up as a
//! coefficient mismatch instead of being silently absorbed.

use std::collections::BTreeMap;
use std::fmt;

use super::{BaseSpace, CoeffForm, DerivSymbol, JetPoly, Prolonger, SymKind, VectorField};
use crate::algebra::{binom_rat, Multiindex, Rat};
use crate::jet::{JetCoord, JetMonomial};
use crate::Error;

/// The catalogue of closed forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClosedForm {
    R1,
    R2,
    R3,
    R4,
    /// Partial scalar formula for `R^κ`, `κ ≥ 3`.
    PartialScalar(usize),
    GeneralR1,
    GeneralR2,
    GeneralR3,
    /// Partial formula `I_1 + … + I_9` for `R^j_{k_1..k_κ}`, `κ ≥ 3`.
    GeneralPartial(usize),
}

impl fmt::Display for ClosedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClosedForm::R1 => write!(f, "R1"),
            ClosedForm::R2 => write!(f, "R2"),
            ClosedForm::R3 => write!(f, "R3"),
            ClosedForm::R4 => write!(f, "R4"),
            ClosedForm::PartialScalar(k) => write!(f, "partial_R{k}"),
            ClosedForm::GeneralR1 => write!(f, "general_R1"),
            ClosedForm::GeneralR2 => write!(f, "general_R2"),
            ClosedForm::GeneralR3 => write!(f, "general_R3"),
            ClosedForm::GeneralPartial(k) => write!(f, "general_partial_{k}"),
        }
    }
}

impl ClosedForm {
    pub fn order(&self) -> usize {
        match self {
            ClosedForm::R1 | ClosedForm::GeneralR1 => 1,
            ClosedForm::R2 | ClosedForm::GeneralR2 => 2,
            ClosedForm::R3 | ClosedForm::GeneralR3 => 3,
            ClosedForm::R4 => 4,
            ClosedForm::PartialScalar(k) | ClosedForm::GeneralPartial(k) => *k,
        }
    }

    pub fn is_scalar(&self) -> bool {
        matches!(
            self,
            ClosedForm::R1
                | ClosedForm::R2
                | ClosedForm::R3
                | ClosedForm::R4
                | ClosedForm::PartialScalar(_)
        )
    }

    pub fn is_partial(&self) -> bool {
        matches!(self, ClosedForm::PartialScalar(_) | ClosedForm::GeneralPartial(_))
    }
}

/// How the circular-permutation ranges of the partial general formula are
/// read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Reading {
    /// Ranges as displayed in the formulas themselves, with index typos
    /// repaired.
    #[default]
    Display,
    /// Ranges as described in the accompanying prose: the `U_{l1} U_{l2..lκ}`
    /// rotation sum skips the identity, and the shuffle in the
    /// `U_{l1 l2} U_{l3..}` family permutes the `l`'s.
    Prose,
}

/// One differing coefficient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    pub j: usize,
    pub ks: Vec<usize>,
    pub monomial: String,
    pub expected: String,
    pub actual: String,
}

/// Outcome of a closed-form comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedFormReport {
    pub formula: ClosedForm,
    pub n: usize,
    pub m: usize,
    pub reading: Reading,
    /// Number of `(j, ks, monomial)` coefficients compared.
    pub compared: usize,
    pub mismatches: Vec<Mismatch>,
}

impl ClosedFormReport {
    pub fn is_match(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Compares the recursive coefficient with the closed form, display reading.
pub fn closed_form_check(n: usize, m: usize, formula: ClosedForm) -> Result<ClosedFormReport, Error> {
    closed_form_check_with(n, m, formula, Reading::Display)
}

/// Compares the recursive coefficient with the closed form under a chosen
/// reading of the summation ranges.
pub fn closed_form_check_with(
    n: usize,
    m: usize,
    formula: ClosedForm,
    reading: Reading,
) -> Result<ClosedFormReport, Error> {
    if n == 0 || m == 0 {
        return Err(Error::Domain("n and m must be positive".into()));
    }
    if formula.is_scalar() && (n, m) != (1, 1) {
        return Err(Error::Domain(format!("{formula} requires n = m = 1")));
    }
    if formula.is_partial() && formula.order() < 3 {
        return Err(Error::Domain(format!("{formula} requires order at least 3")));
    }
    let base = BaseSpace::standard(n, m);
    let field = VectorField::symbolic(&base);
    let mut prol = Prolonger::new(&field);
    let kappa = formula.order();
    let mut report = ClosedFormReport {
        formula,
        n,
        m,
        reading,
        compared: 0,
        mismatches: Vec::new(),
    };
    for j in 0..m {
        for ks in index_tuples(n, kappa) {
            let actual = prol.coeff(&JetCoord::new(j, &ks))?;
            let families = build(&base, formula, reading, j, &ks);
            compare(&base, j, &ks, &actual, &families, formula.is_partial(), &mut report);
        }
    }
    Ok(report)
}

/// Every supported `(n, m, formula)` combination exercised by the suite.
pub fn supported_table() -> Vec<(usize, usize, ClosedForm)> {
    let mut v = vec![
        (1, 1, ClosedForm::R1),
        (1, 1, ClosedForm::R2),
        (1, 1, ClosedForm::R3),
        (1, 1, ClosedForm::R4),
    ];
    for k in 3..=6 {
        v.push((1, 1, ClosedForm::PartialScalar(k)));
    }
    for (n, m) in [(1, 1), (2, 1), (1, 2), (2, 2)] {
        v.push((n, m, ClosedForm::GeneralR1));
        v.push((n, m, ClosedForm::GeneralR2));
        v.push((n, m, ClosedForm::GeneralR3));
    }
    for (n, m) in [(2, 1), (1, 2), (2, 2)] {
        for k in 3..=4 {
            v.push((n, m, ClosedForm::GeneralPartial(k)));
        }
    }
    v
}

/// A piece of a closed form: every monomial of one shape.
struct Family {
    name: &'static str,
    shape: Option<Vec<usize>>,
    poly: JetPoly,
}

fn shape_of(m: &JetMonomial) -> Vec<usize> {
    let mut s: Vec<usize> = m
        .factors()
        .iter()
        .flat_map(|(c, e)| std::iter::repeat(c.order()).take(*e as usize))
        .collect();
    s.sort_unstable();
    s
}

fn restrict(p: &JetPoly, shape: &[usize]) -> JetPoly {
    let mut out = JetPoly::zero(p.base());
    for (mono, f) in p.terms() {
        if shape_of(mono) == shape {
            out.add_term(mono.clone(), f);
        }
    }
    out
}

fn compare(
    base: &BaseSpace,
    j: usize,
    ks: &[usize],
    actual: &JetPoly,
    families: &[Family],
    partial: bool,
    report: &mut ClosedFormReport,
) {
    let push = |mono: &JetMonomial, e: &CoeffForm, a: &CoeffForm, rep: &mut ClosedFormReport| {
        rep.compared += 1;
        if e != a {
            rep.mismatches.push(Mismatch {
                j,
                ks: ks.to_vec(),
                monomial: mono.fmt_with(base.xnames(), base.unames()),
                expected: e.fmt_with(base),
                actual: a.fmt_with(base),
            });
        }
    };
    if !partial {
        let mut expected = JetPoly::zero(base);
        for f in families {
            expected = expected.add(&f.poly);
        }
        let monos: std::collections::BTreeSet<JetMonomial> = expected
            .terms()
            .chain(actual.terms())
            .map(|(m, _)| m.clone())
            .collect();
        for mono in &monos {
            push(mono, &expected.coeff(mono), &actual.coeff(mono), report);
        }
        return;
    }
    // Families of a coinciding shape describe the same monomials twice; they
    // must agree and are compared once.
    let mut seen: BTreeMap<Vec<usize>, (&'static str, JetPoly)> = BTreeMap::new();
    for f in families {
        let shape = f.shape.clone().expect("partial families carry a shape");
        if let Some((other, p)) = seen.get(&shape) {
            if *p != f.poly {
                report.mismatches.push(Mismatch {
                    j,
                    ks: ks.to_vec(),
                    monomial: format!("{} vs {} (coinciding families)", f.name, other),
                    expected: p.to_string(),
                    actual: f.poly.to_string(),
                });
            }
            continue;
        }
        seen.insert(shape, (f.name, f.poly.clone()));
    }
    for (shape, (_, expected)) in &seen {
        let got = restrict(actual, shape);
        let monos: std::collections::BTreeSet<JetMonomial> = expected
            .terms()
            .chain(got.terms())
            .map(|(m, _)| m.clone())
            .collect();
        for mono in &monos {
            push(mono, &expected.coeff(mono), &got.coeff(mono), report);
        }
    }
}

fn build(base: &BaseSpace, f: ClosedForm, reading: Reading, j: usize, ks: &[usize]) -> Vec<Family> {
    match f {
        ClosedForm::R1 => vec![table(base, R1_TABLE)],
        ClosedForm::R2 => vec![table(base, R2_TABLE)],
        ClosedForm::R3 => vec![table(base, R3_TABLE)],
        ClosedForm::R4 => vec![table(base, R4_TABLE)],
        ClosedForm::PartialScalar(k) => partial_scalar(base, k),
        ClosedForm::GeneralR1 => vec![general_r1(base, j, ks)],
        ClosedForm::GeneralR2 => vec![general_r2(base, j, ks)],
        ClosedForm::GeneralR3 => general_r3(base, j, ks),
        ClosedForm::GeneralPartial(k) => {
            debug_assert_eq!(k, ks.len());
            general_partial(base, j, ks, reading)
        }
    }
}

// Scalar tables: each row is a monomial `(U^1)^e1 (U^2)^e2 …` followed by
// its coefficient terms `(c, kind, x-order, u-order)`.
type Row = (&'static [u16], &'static [(i64, char, u16, u16)]);

const R1_TABLE: &[Row] = &[
    (&[], &[(1, 'R', 1, 0)]),
    (&[1], &[(1, 'R', 0, 1), (-1, 'Q', 1, 0)]),
    (&[2], &[(-1, 'Q', 0, 1)]),
];

const R2_TABLE: &[Row] = &[
    (&[], &[(1, 'R', 2, 0)]),
    (&[1], &[(2, 'R', 1, 1), (-1, 'Q', 2, 0)]),
    (&[2], &[(1, 'R', 0, 2), (-2, 'Q', 1, 1)]),
    (&[3], &[(-1, 'Q', 0, 2)]),
    (&[0, 1], &[(1, 'R', 0, 1), (-2, 'Q', 1, 0)]),
    (&[1, 1], &[(-3, 'Q', 0, 1)]),
];

const R3_TABLE: &[Row] = &[
    (&[], &[(1, 'R', 3, 0)]),
    (&[1], &[(3, 'R', 2, 1), (-1, 'Q', 3, 0)]),
    (&[2], &[(3, 'R', 1, 2), (-3, 'Q', 2, 1)]),
    (&[3], &[(1, 'R', 0, 3), (-3, 'Q', 1, 2)]),
    (&[4], &[(-1, 'Q', 0, 3)]),
    (&[0, 1], &[(3, 'R', 1, 1), (-3, 'Q', 2, 0)]),
    (&[1, 1], &[(3, 'R', 0, 2), (-9, 'Q', 1, 1)]),
    (&[2, 1], &[(-6, 'Q', 0, 2)]),
    (&[0, 2], &[(-3, 'Q', 0, 1)]),
    (&[0, 0, 1], &[(1, 'R', 0, 1), (-3, 'Q', 1, 0)]),
    (&[1, 0, 1], &[(-4, 'Q', 0, 1)]),
];

const R4_TABLE: &[Row] = &[
    (&[], &[(1, 'R', 4, 0)]),
    (&[1], &[(4, 'R', 3, 1), (-1, 'Q', 4, 0)]),
    (&[2], &[(6, 'R', 2, 2), (-4, 'Q', 3, 1)]),
    (&[3], &[(4, 'R', 1, 3), (-6, 'Q', 2, 2)]),
    (&[4], &[(1, 'R', 0, 4), (-4, 'Q', 1, 3)]),
    (&[5], &[(-1, 'Q', 0, 4)]),
    (&[0, 1], &[(6, 'R', 2, 1), (-4, 'Q', 3, 0)]),
    (&[1, 1], &[(12, 'R', 1, 2), (-18, 'Q', 2, 1)]),
    (&[2, 1], &[(6, 'R', 0, 3), (-24, 'Q', 1, 2)]),
    (&[3, 1], &[(-10, 'Q', 0, 3)]),
    (&[0, 2], &[(3, 'R', 0, 2), (-12, 'Q', 1, 1)]),
    (&[1, 2], &[(-15, 'Q', 0, 2)]),
    (&[0, 0, 1], &[(4, 'R', 1, 1), (-6, 'Q', 2, 0)]),
    (&[1, 0, 1], &[(4, 'R', 0, 2), (-16, 'Q', 1, 1)]),
    (&[2, 0, 1], &[(-10, 'Q', 0, 2)]),
    (&[0, 1, 1], &[(-10, 'Q', 0, 1)]),
    (&[0, 0, 0, 1], &[(1, 'R', 0, 1), (-4, 'Q', 1, 0)]),
    (&[1, 0, 0, 1], &[(-5, 'Q', 0, 1)]),
];

/// `U^λ` for `n = m = 1`.
fn scalar_u(order: usize) -> JetCoord {
    JetCoord::new(0, &vec![0; order])
}

fn scalar_monomial(exps: &[u16]) -> JetMonomial {
    let mut m = JetMonomial::one();
    for (i, &e) in exps.iter().enumerate() {
        if e > 0 {
            m = m.times_coord(&scalar_u(i + 1), e);
        }
    }
    m
}

fn scalar_sym(kind: char, a: u16, b: u16) -> DerivSymbol {
    match kind {
        'R' => DerivSymbol::r(0, &[a], &[b]),
        _ => DerivSymbol::q(0, &[a], &[b]),
    }
}

fn table(base: &BaseSpace, rows: &[Row]) -> Family {
    let mut p = JetPoly::zero(base);
    for (exps, terms) in rows {
        let mut f = CoeffForm::zero(&base.vars);
        for &(c, kind, a, b) in terms.iter() {
            f.add_symbol(scalar_sym(kind, a, b), &base.constant(Rat::from_int(c)));
        }
        p.add_term(scalar_monomial(exps), &f);
    }
    Family {
        name: "table",
        shape: None,
        poly: p,
    }
}

fn partial_scalar(base: &BaseSpace, k: usize) -> Vec<Family> {
    let kk = k as u64;
    let c = |p: u64, q: u64| binom_rat(p, q);
    let k16 = k as u16;
    let mut fams = Vec::new();
    let mut add = |name: &'static str, orders: &[usize], terms: Vec<(Rat, char, u16, u16)>| {
        let mut f = CoeffForm::zero(&base.vars);
        for (c, kind, a, b) in terms {
            f.add_symbol(scalar_sym(kind, a, b), &base.constant(c));
        }
        let mono = JetMonomial::from_factors(orders.iter().map(|&o| scalar_u(o)));
        let mut shape = orders.to_vec();
        shape.sort_unstable();
        fams.push(Family {
            name,
            shape: Some(shape),
            poly: JetPoly::monomial(base, mono, f),
        });
    };
    let one = Rat::one();
    let neg = |r: Rat| -r;
    add("ct", &[], vec![(one.clone(), 'R', k16, 0)]);
    add(
        "U1",
        &[1],
        vec![(c(kk, 1), 'R', k16 - 1, 1), (neg(one.clone()), 'Q', k16, 0)],
    );
    add(
        "U2",
        &[2],
        vec![(c(kk, 2), 'R', k16 - 2, 1), (neg(c(kk, 1)), 'Q', k16 - 1, 0)],
    );
    add(
        "U^(k-2)",
        &[k - 2],
        vec![(c(kk, 2), 'R', 2, 1), (neg(c(kk, 3)), 'Q', 3, 0)],
    );
    add(
        "U^(k-1)",
        &[k - 1],
        vec![(c(kk, 1), 'R', 1, 1), (neg(c(kk, 2)), 'Q', 2, 0)],
    );
    add(
        "U1 U^(k-1)",
        &[1, k - 1],
        vec![(c(kk, 1), 'R', 0, 2), (neg(Rat::from(kk * kk)), 'Q', 1, 1)],
    );
    // The coefficient of U^2 U^(κ-1) collapses for κ = 3, where the two
    // factors coincide.
    let c22 = if k == 3 { Rat::from_int(3) } else { c(kk + 1, 2) };
    add("U2 U^(k-1)", &[2, k - 1], vec![(neg(c22), 'Q', 0, 1)]);
    add(
        "U^k",
        &[k],
        vec![(one.clone(), 'R', 0, 1), (neg(c(kk, 1)), 'Q', 1, 0)],
    );
    add("U1 U^k", &[1, k], vec![(neg(c(kk + 1, 1)), 'Q', 0, 1)]);
    fams
}

/// Accumulates one family of the general formulas.
struct Acc<'a> {
    base: &'a BaseSpace,
    poly: JetPoly,
}

impl<'a> Acc<'a> {
    fn new(base: &'a BaseSpace) -> Acc<'a> {
        Acc {
            base,
            poly: JetPoly::zero(base),
        }
    }

    /// Adds `c · S · Π coords`.
    fn add(&mut self, c: i64, s: DerivSymbol, coords: &[JetCoord]) {
        let mono = JetMonomial::from_factors(coords.iter().cloned());
        let f = CoeffForm::symbol(&self.base.vars, s, Rat::from_int(c));
        self.poly.add_term(mono, &f);
    }

    fn done(self, name: &'static str, shape: &[usize]) -> Family {
        let mut s = shape.to_vec();
        s.sort_unstable();
        Family {
            name,
            shape: Some(s),
            poly: self.poly,
        }
    }

    fn whole(self, name: &'static str) -> Family {
        Family {
            name,
            shape: None,
            poly: self.poly,
        }
    }
}

fn multi(slots: usize, idx: &[usize]) -> Multiindex {
    let mut m = Multiindex::zero(slots);
    for &i in idx {
        m.set(i, m.get(i) + 1);
    }
    m
}

/// `R^j_{x_{xs} u^{us}}` with index lists.
fn rs(b: &BaseSpace, j: usize, xs: &[usize], us: &[usize]) -> DerivSymbol {
    DerivSymbol {
        kind: SymKind::R,
        comp: j,
        xo: multi(b.n, xs),
        uo: multi(b.m, us),
    }
}

/// `Q^l_{x_{xs} u^{us}}` with index lists.
fn qs(b: &BaseSpace, l: usize, xs: &[usize], us: &[usize]) -> DerivSymbol {
    DerivSymbol {
        kind: SymKind::Q,
        comp: l,
        xo: multi(b.n, xs),
        uo: multi(b.m, us),
    }
}

fn u(i: usize, ls: &[usize]) -> JetCoord {
    JetCoord::new(i, ls)
}

/// All tuples of length `len` over `0..n`.
pub(crate) fn index_tuples(n: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::with_capacity(out.len() * n);
        for t in &out {
            for k in 0..n {
                let mut t2 = t.clone();
                t2.push(k);
                next.push(t2);
            }
        }
        out = next;
    }
    out
}

/// Permutations `σ` of `0..p` increasing on `0..q` and on `q..p`.
fn shuffles(p: usize, q: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << p) {
        if mask.count_ones() as usize != q {
            continue;
        }
        let mut s: Vec<usize> = (0..p).filter(|i| mask & (1 << i) != 0).collect();
        s.extend((0..p).filter(|i| mask & (1 << i) == 0));
        out.push(s);
    }
    out.sort();
    out
}

/// The rotation `s ↦ s + r (mod p)` applied to a tuple.
fn rotate<T: Clone>(v: &[T], r: usize) -> Vec<T> {
    let p = v.len();
    (0..p).map(|s| v[(s + r) % p].clone()).collect()
}

/// `ks` picked through a permutation.
fn pick(ks: &[usize], sigma: &[usize]) -> Vec<usize> {
    sigma.iter().map(|&s| ks[s]).collect()
}

fn general_r1(b: &BaseSpace, j: usize, ks: &[usize]) -> Family {
    let (n, m) = (b.n, b.m);
    let k1 = ks[0];
    let mut a = Acc::new(b);
    a.add(1, rs(b, j, &[k1], &[]), &[]);
    for i1 in 0..m {
        for l1 in 0..n {
            if k1 == l1 {
                a.add(1, rs(b, j, &[], &[i1]), &[u(i1, &[l1])]);
            }
            if i1 == j {
                a.add(-1, qs(b, l1, &[k1], &[]), &[u(i1, &[l1])]);
            }
        }
    }
    for i1 in 0..m {
        for i2 in 0..m {
            for l1 in 0..n {
                for l2 in 0..n {
                    if i2 == j && k1 == l1 {
                        a.add(-1, qs(b, l2, &[], &[i1]), &[u(i1, &[l1]), u(i2, &[l2])]);
                    }
                }
            }
        }
    }
    a.whole("R_k1")
}

fn general_r2(b: &BaseSpace, j: usize, ks: &[usize]) -> Family {
    let (n, m) = (b.n, b.m);
    let (k1, k2) = (ks[0], ks[1]);
    let mut a = Acc::new(b);
    a.add(1, rs(b, j, &[k1, k2], &[]), &[]);
    for i1 in 0..m {
        for l1 in 0..n {
            let m1 = [u(i1, &[l1])];
            if k2 == l1 {
                a.add(1, rs(b, j, &[k1], &[i1]), &m1);
            }
            if k1 == l1 {
                a.add(1, rs(b, j, &[k2], &[i1]), &m1);
            }
            if i1 == j {
                a.add(-1, qs(b, l1, &[k1, k2], &[]), &m1);
            }
        }
    }
    for i1 in 0..m {
        for i2 in 0..m {
            for l in index_tuples(n, 2) {
                let (l1, l2) = (l[0], l[1]);
                let mono = [u(i1, &[l1]), u(i2, &[l2])];
                if (k1, k2) == (l1, l2) {
                    a.add(1, rs(b, j, &[], &[i1, i2]), &mono);
                }
                if i2 == j {
                    if k1 == l1 {
                        a.add(-1, qs(b, l2, &[k2], &[i1]), &mono);
                    }
                    if k2 == l1 {
                        a.add(-1, qs(b, l2, &[k1], &[i1]), &mono);
                    }
                }
            }
        }
    }
    for i in index_tuples(m, 3) {
        for l in index_tuples(n, 3) {
            if i[2] == j && (k1, k2) == (l[0], l[1]) {
                a.add(
                    -1,
                    qs(b, l[2], &[], &[i[0], i[1]]),
                    &[u(i[0], &[l[0]]), u(i[1], &[l[1]]), u(i[2], &[l[2]])],
                );
            }
        }
    }
    for i1 in 0..m {
        for l in index_tuples(n, 2) {
            let (l1, l2) = (l[0], l[1]);
            let mono = [u(i1, &[l1, l2])];
            if (k1, k2) == (l1, l2) {
                a.add(1, rs(b, j, &[], &[i1]), &mono);
            }
            if i1 == j {
                if k2 == l1 {
                    a.add(-1, qs(b, l2, &[k1], &[]), &mono);
                }
                if k1 == l1 {
                    a.add(-1, qs(b, l2, &[k2], &[]), &mono);
                }
            }
        }
    }
    for i1 in 0..m {
        for i2 in 0..m {
            for l in index_tuples(n, 3) {
                let (l1, l2, l3) = (l[0], l[1], l[2]);
                let mono = [u(i1, &[l1]), u(i2, &[l2, l3])];
                if i2 == j && (k1, k2) == (l1, l2) {
                    a.add(-1, qs(b, l3, &[], &[i1]), &mono);
                }
                if i2 == j && (k1, k2) == (l3, l1) {
                    a.add(-1, qs(b, l2, &[], &[i1]), &mono);
                }
                if i1 == j && (k1, k2) == (l2, l3) {
                    a.add(-1, qs(b, l1, &[], &[i2]), &mono);
                }
            }
        }
    }
    a.whole("R_k1k2")
}

fn general_r3(b: &BaseSpace, j: usize, ks: &[usize]) -> Vec<Family> {
    let (n, m) = (b.n, b.m);
    let (k1, k2, k3) = (ks[0], ks[1], ks[2]);
    let eq = |a: &[usize], bb: &[usize]| a == bb;

    // Polynomial in first-order coordinates only.
    let mut a = Acc::new(b);
    a.add(1, rs(b, j, &[k1, k2, k3], &[]), &[]);
    for i1 in 0..m {
        for l1 in 0..n {
            let mono = [u(i1, &[l1])];
            if k1 == l1 {
                a.add(1, rs(b, j, &[k2, k3], &[i1]), &mono);
            }
            if k2 == l1 {
                a.add(1, rs(b, j, &[k1, k3], &[i1]), &mono);
            }
            if k3 == l1 {
                a.add(1, rs(b, j, &[k1, k2], &[i1]), &mono);
            }
            if i1 == j {
                a.add(-1, qs(b, l1, &[k1, k2, k3], &[]), &mono);
            }
        }
    }
    for i in index_tuples(m, 2) {
        for l in index_tuples(n, 2) {
            let mono = [u(i[0], &[l[0]]), u(i[1], &[l[1]])];
            let uu = [i[0], i[1]];
            if eq(&[k1, k2], &l) {
                a.add(1, rs(b, j, &[k3], &uu), &mono);
            }
            if eq(&[k3, k1], &l) {
                a.add(1, rs(b, j, &[k2], &uu), &mono);
            }
            if eq(&[k2, k3], &l) {
                a.add(1, rs(b, j, &[k1], &uu), &mono);
            }
            if i[1] == j {
                if k1 == l[0] {
                    a.add(-1, qs(b, l[1], &[k2, k3], &[i[0]]), &mono);
                }
                if k2 == l[0] {
                    a.add(-1, qs(b, l[1], &[k1, k3], &[i[0]]), &mono);
                }
                if k3 == l[0] {
                    a.add(-1, qs(b, l[1], &[k1, k2], &[i[0]]), &mono);
                }
            }
        }
    }
    for i in index_tuples(m, 3) {
        for l in index_tuples(n, 3) {
            let mono = [u(i[0], &[l[0]]), u(i[1], &[l[1]]), u(i[2], &[l[2]])];
            if eq(&[k1, k2, k3], &l) {
                a.add(1, rs(b, j, &[], &i), &mono);
            }
            if i[2] == j {
                let uu = [i[0], i[1]];
                if eq(&[k1, k2], &l[..2]) {
                    a.add(-1, qs(b, l[2], &[k3], &uu), &mono);
                }
                if eq(&[k2, k3], &l[..2]) {
                    a.add(-1, qs(b, l[2], &[k1], &uu), &mono);
                }
                if eq(&[k1, k3], &l[..2]) {
                    a.add(-1, qs(b, l[2], &[k2], &uu), &mono);
                }
            }
        }
    }
    for i in index_tuples(m, 4) {
        for l in index_tuples(n, 4) {
            if i[3] == j && eq(&[k1, k2, k3], &l[..3]) {
                a.add(
                    -1,
                    qs(b, l[3], &[], &i[..3]),
                    &[
                        u(i[0], &[l[0]]),
                        u(i[1], &[l[1]]),
                        u(i[2], &[l[2]]),
                        u(i[3], &[l[3]]),
                    ],
                );
            }
        }
    }
    let part1 = a.whole("I");

    // Terms containing a second-order coordinate.
    let mut a = Acc::new(b);
    for i1 in 0..m {
        for l in index_tuples(n, 2) {
            let mono = [u(i1, &l)];
            if eq(&[k1, k2], &l) {
                a.add(1, rs(b, j, &[k3], &[i1]), &mono);
            }
            if eq(&[k3, k1], &l) {
                a.add(1, rs(b, j, &[k2], &[i1]), &mono);
            }
            if eq(&[k2, k3], &l) {
                a.add(1, rs(b, j, &[k1], &[i1]), &mono);
            }
            if i1 == j {
                if k1 == l[0] {
                    a.add(-1, qs(b, l[1], &[k2, k3], &[]), &mono);
                }
                if k2 == l[0] {
                    a.add(-1, qs(b, l[1], &[k1, k3], &[]), &mono);
                }
                if k3 == l[0] {
                    a.add(-1, qs(b, l[1], &[k1, k2], &[]), &mono);
                }
            }
        }
    }
    let kk = [k1, k2, k3];
    for i in index_tuples(m, 2) {
        for l in index_tuples(n, 3) {
            let (l1, l2, l3) = (l[0], l[1], l[2]);
            let mono = [u(i[0], &[l1]), u(i[1], &[l2, l3])];
            let uu = [i[0], i[1]];
            for up in [[l1, l2, l3], [l3, l1, l2], [l2, l3, l1]] {
                if kk == up {
                    a.add(1, rs(b, j, &[], &uu), &mono);
                }
            }
            if i[0] == j {
                if eq(&[k1, k2], &[l2, l3]) {
                    a.add(-1, qs(b, l1, &[k3], &[i[1]]), &mono);
                }
                if eq(&[k3, k1], &[l2, l3]) {
                    a.add(-1, qs(b, l1, &[k2], &[i[1]]), &mono);
                }
                if eq(&[k2, k3], &[l2, l3]) {
                    a.add(-1, qs(b, l1, &[k1], &[i[1]]), &mono);
                }
            }
            if i[1] == j {
                if eq(&[k1, k2], &[l1, l2]) {
                    a.add(-1, qs(b, l3, &[k3], &[i[0]]), &mono);
                }
                if eq(&[k3, k1], &[l1, l2]) {
                    a.add(-1, qs(b, l3, &[k2], &[i[0]]), &mono);
                }
                if eq(&[k2, k3], &[l1, l2]) {
                    a.add(-1, qs(b, l3, &[k1], &[i[0]]), &mono);
                }
                if eq(&[k1, k2], &[l3, l1]) {
                    a.add(-1, qs(b, l2, &[k3], &[i[0]]), &mono);
                }
                if eq(&[k3, k1], &[l3, l1]) {
                    a.add(-1, qs(b, l2, &[k2], &[i[0]]), &mono);
                }
                if eq(&[k2, k3], &[l3, l1]) {
                    a.add(-1, qs(b, l2, &[k1], &[i[0]]), &mono);
                }
            }
        }
    }
    for i in index_tuples(m, 3) {
        for l in index_tuples(n, 4) {
            let (l1, l2, l3, l4) = (l[0], l[1], l[2], l[3]);
            let mono = [u(i[0], &[l1]), u(i[1], &[l2]), u(i[2], &[l3, l4])];
            if i[2] == j {
                let uu = [i[0], i[1]];
                if kk == [l1, l2, l3] {
                    a.add(-1, qs(b, l4, &[], &uu), &mono);
                }
                if kk == [l1, l4, l2] {
                    a.add(-1, qs(b, l3, &[], &uu), &mono);
                }
                if kk == [l3, l1, l2] {
                    a.add(-1, qs(b, l4, &[], &uu), &mono);
                }
            }
            if i[0] == j {
                // The third entry carries u^{i2} u^{i3} like its siblings.
                let uu = [i[1], i[2]];
                if kk == [l3, l2, l4] {
                    a.add(-1, qs(b, l1, &[], &uu), &mono);
                }
                if kk == [l4, l3, l2] {
                    a.add(-1, qs(b, l1, &[], &uu), &mono);
                }
                if kk == [l2, l3, l4] {
                    a.add(-1, qs(b, l1, &[], &uu), &mono);
                }
            }
        }
    }
    for i in index_tuples(m, 2) {
        for l in index_tuples(n, 4) {
            let (l1, l2, l3, l4) = (l[0], l[1], l[2], l[3]);
            let mono = [u(i[0], &[l1, l2]), u(i[1], &[l3, l4])];
            if i[1] == j {
                for up in [[l1, l2, l3], [l3, l1, l2], [l2, l3, l1]] {
                    if kk == up {
                        a.add(-1, qs(b, l4, &[], &[i[0]]), &mono);
                    }
                }
            }
        }
    }
    let part2 = a.whole("II");

    // Terms containing a third-order coordinate.
    let mut a = Acc::new(b);
    for i1 in 0..m {
        for l in index_tuples(n, 3) {
            let mono = [u(i1, &l)];
            if kk == [l[0], l[1], l[2]] {
                a.add(1, rs(b, j, &[], &[i1]), &mono);
            }
            if i1 == j {
                if eq(&[k2, k3], &l[..2]) {
                    a.add(-1, qs(b, l[2], &[k1], &[]), &mono);
                }
                if eq(&[k3, k1], &l[..2]) {
                    a.add(-1, qs(b, l[2], &[k2], &[]), &mono);
                }
                if eq(&[k1, k2], &l[..2]) {
                    a.add(-1, qs(b, l[2], &[k3], &[]), &mono);
                }
            }
        }
    }
    for i in index_tuples(m, 2) {
        for l in index_tuples(n, 4) {
            let (l1, l2, l3, l4) = (l[0], l[1], l[2], l[3]);
            let mono = [u(i[0], &[l1]), u(i[1], &[l2, l3, l4])];
            if i[0] == j && kk == [l2, l3, l4] {
                a.add(-1, qs(b, l1, &[], &[i[1]]), &mono);
            }
            if i[1] == j {
                if kk == [l1, l2, l3] {
                    a.add(-1, qs(b, l4, &[], &[i[0]]), &mono);
                }
                if kk == [l4, l1, l2] {
                    a.add(-1, qs(b, l3, &[], &[i[0]]), &mono);
                }
                if kk == [l3, l4, l1] {
                    a.add(-1, qs(b, l2, &[], &[i[0]]), &mono);
                }
            }
        }
    }
    let part3 = a.whole("III");
    vec![part1, part2, part3]
}

fn general_partial(b: &BaseSpace, j: usize, ks: &[usize], reading: Reading) -> Vec<Family> {
    let (n, m) = (b.n, b.m);
    let k = ks.len();
    let mut fams = Vec::new();

    let mut a = Acc::new(b);
    a.add(1, rs(b, j, ks, &[]), &[]);
    fams.push(a.done("I1", &[]));

    // Linear terms in a single coordinate of order `ord`: the R part picks
    // `ord` of the k's for the jet and differentiates R in the others; the Q
    // part picks `ord - 1` of them.
    let linear = |name: &'static str, ord: usize| -> Family {
        let mut a = Acc::new(b);
        for i1 in 0..m {
            for l in index_tuples(n, ord) {
                let mono = [u(i1, &l)];
                for s in shuffles(k, ord) {
                    let p = pick(ks, &s);
                    if p[..ord] == l[..] {
                        a.add(1, rs(b, j, &p[ord..], &[i1]), &mono);
                    }
                }
                if i1 == j {
                    for s in shuffles(k, ord - 1) {
                        let p = pick(ks, &s);
                        if p[..ord - 1] == l[..ord - 1] {
                            a.add(-1, qs(b, l[ord - 1], &p[ord - 1..], &[]), &mono);
                        }
                    }
                }
            }
        }
        a.done(name, &[ord])
    };
    fams.push(linear("I2", 1));
    fams.push(linear("I3", 2));
    fams.push(linear("I4", k - 2));
    fams.push(linear("I5", k - 1));

    // U_{l1} U_{l2..lk}.
    let mut a = Acc::new(b);
    for i in index_tuples(m, 2) {
        let (i1, i2) = (i[0], i[1]);
        for l in index_tuples(n, k) {
            let mono = [u(i1, &[l[0]]), u(i2, &l[1..])];
            for r in 0..k {
                let rot = rotate(&l, r);
                if rot[..] == ks[..] {
                    a.add(1, rs(b, j, &[], &[i1, i2]), &mono);
                }
            }
            if i1 == j {
                for s in shuffles(k, k - 1) {
                    let p = pick(ks, &s);
                    if p[..k - 1] == l[1..] {
                        a.add(-1, qs(b, l[0], &[p[k - 1]], &[i2]), &mono);
                    }
                }
            }
            if i2 == j {
                let skip = match reading {
                    Reading::Display => 1,
                    Reading::Prose => 0,
                };
                for s in shuffles(k, k - 1) {
                    let p = pick(ks, &s);
                    for r in (0..k).filter(|&r| r != skip) {
                        let rot = rotate(&l, r);
                        if p[..k - 1] == rot[..k - 1] {
                            a.add(-1, qs(b, rot[k - 1], &[p[k - 1]], &[i1]), &mono);
                        }
                    }
                }
            }
        }
    }
    fams.push(a.done("I6", &[1, k - 1]));

    // U_{l1 l2} U_{l3..l(k+1)}.
    let mut a = Acc::new(b);
    for i in index_tuples(m, 2) {
        let (i1, i2) = (i[0], i[1]);
        for l in index_tuples(n, k + 1) {
            let mono = [u(i1, &l[..2]), u(i2, &l[2..])];
            // For k = 3 both groups list the same products of two
            // second-order coordinates; only the second one is kept.
            if i1 == j && k != 3 {
                for r in 0..k {
                    let rot = rotate(&l[1..], r);
                    if rot[..] == ks[..] {
                        a.add(-1, qs(b, l[0], &[], &[i2]), &mono);
                    }
                }
            }
            if i2 == j {
                for tau in shuffles(k, 2) {
                    let hit = match reading {
                        Reading::Display => (0..k).all(|s| l[s] == ks[tau[s]]),
                        Reading::Prose => (0..k).all(|s| l[tau[s]] == ks[s]),
                    };
                    if hit {
                        a.add(-1, qs(b, l[k], &[], &[i1]), &mono);
                    }
                }
            }
        }
    }
    fams.push(a.done("I7", &[2, k - 1]));

    let mut a = Acc::new(b);
    for i1 in 0..m {
        for l in index_tuples(n, k) {
            let mono = [u(i1, &l)];
            if l[..] == ks[..] {
                a.add(1, rs(b, j, &[], &[i1]), &mono);
            }
            if i1 == j {
                for s in shuffles(k, k - 1) {
                    let p = pick(ks, &s);
                    if p[..k - 1] == l[..k - 1] {
                        a.add(-1, qs(b, l[k - 1], &[p[k - 1]], &[]), &mono);
                    }
                }
            }
        }
    }
    fams.push(a.done("I8", &[k]));

    // U_{l1} U_{l2..l(k+1)}.
    let mut a = Acc::new(b);
    for i in index_tuples(m, 2) {
        let (i1, i2) = (i[0], i[1]);
        for l in index_tuples(n, k + 1) {
            let mono = [u(i1, &[l[0]]), u(i2, &l[1..])];
            if i1 == j && l[1..] == ks[..] {
                a.add(-1, qs(b, l[0], &[], &[i2]), &mono);
            }
            if i2 == j {
                for r in (0..=k).filter(|&r| r != 1) {
                    let rot = rotate(&l, r);
                    if rot[..k] == ks[..] {
                        a.add(-1, qs(b, rot[k], &[], &[i1]), &mono);
                    }
                }
            }
        }
    }
    fams.push(a.done("I9", &[1, k]));
    fams
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shuffle_counts() {
        assert_eq!(shuffles(4, 2).len(), 6);
        assert_eq!(shuffles(4, 1).len(), 4);
        assert_eq!(shuffles(3, 0), vec![vec![0, 1, 2]]);
        assert_eq!(rotate(&[1, 2, 3], 1), vec![2, 3, 1]);
    }

    #[test]
    fn scalar_tables_match() {
        for f in [ClosedForm::R1, ClosedForm::R2, ClosedForm::R3, ClosedForm::R4] {
            let r = closed_form_check(1, 1, f).unwrap();
            assert!(r.is_match(), "{f}: {:?}", r.mismatches);
        }
    }

    #[test]
    fn shape_checks() {
        assert!(closed_form_check(2, 1, ClosedForm::R2).is_err());
        assert!(closed_form_check(2, 1, ClosedForm::GeneralPartial(2)).is_err());
    }
}
