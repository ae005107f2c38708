//! Lie-algebra structure of vector fields, compatibility of prolongation with
//! brackets, and exact checks of finite (projective) symmetries.

use std::fmt;

use crate::algebra::linalg::{invert, solve_affine, LinearSolution, RowReducer, SparseRow};
use crate::algebra::{series, Multiindex, Poly, Rat, Vars};
use crate::prolong::{prolong_field, BaseSpace, JetPoly, VectorField};
use crate::solve::x_monomials;
use crate::Error;

/// The commutator `[X, Y]` of two concrete fields.
pub fn bracket(x: &VectorField, y: &VectorField) -> Result<VectorField, Error> {
    if x.is_symbolic() || y.is_symbolic() {
        return Err(Error::Domain("brackets need concrete fields".into()));
    }
    if x.base() != y.base() {
        return Err(Error::Domain("fields live on different base spaces".into()));
    }
    let b = x.base();
    let coeffs = (0..b.n + b.m)
        .map(|i| &x.apply(y.coeff(i)) - &y.apply(x.coeff(i)))
        .collect();
    Ok(VectorField::from_coeffs(b, coeffs))
}

/// Outcome of [`closure_check`].
#[derive(Clone, Debug)]
pub struct ClosureReport {
    pub closed: bool,
    /// Dimension of the span of the input fields.
    pub dimension: usize,
    /// Indices of the input fields forming the basis used below.
    pub basis: Vec<usize>,
    /// `constants[a][b][k]` with `[e_a, e_b] = Σ_k constants[a][b][k] e_k`
    /// over the basis; empty when not closed.
    pub structure_constants: Vec<Vec<Vec<Rat>>>,
    /// A pair of input indices whose bracket leaves the span.
    pub offending: Option<(usize, usize, VectorField)>,
}

fn fields_degree(fields: &[VectorField]) -> u32 {
    fields.iter().map(|f| f.degree()).max().unwrap_or(0)
}

/// Exact test of whether the span of `gens` is stable under brackets.
pub fn closure_check(gens: &[VectorField]) -> Result<ClosureReport, Error> {
    let deg = 2 * fields_degree(gens);
    let vec = |f: &VectorField| f.coefficient_vector(deg);
    let ncols = gens.first().map(|g| vec(g).len()).unwrap_or(0);
    let mut rr = RowReducer::new(ncols);
    let mut basis = Vec::new();
    for (i, g) in gens.iter().enumerate() {
        if rr.insert_dense(&vec(g)) {
            basis.push(i);
        }
    }
    let bvecs: Vec<Vec<Rat>> = basis.iter().map(|&i| vec(&gens[i])).collect();
    let r = basis.len();
    let mut constants = vec![vec![vec![Rat::zero(); r]; r]; r];
    for a in 0..r {
        for b in a + 1..r {
            let br = bracket(&gens[basis[a]], &gens[basis[b]])?;
            let w = vec(&br);
            let rows: Vec<(SparseRow, Rat)> = (0..ncols)
                .map(|t| {
                    let row: SparseRow = (0..r)
                        .filter(|&k| !bvecs[k][t].is_zero())
                        .map(|k| (k, bvecs[k][t].clone()))
                        .collect();
                    (row, w[t].clone())
                })
                .filter(|(row, v)| !row.is_empty() || !v.is_zero())
                .collect();
            match solve_affine(r, rows) {
                LinearSolution::Inconsistent => {
                    let offending = Some((basis[a], basis[b], br));
                    return Ok(ClosureReport {
                        closed: false,
                        dimension: r,
                        basis,
                        structure_constants: Vec::new(),
                        offending,
                    })
                }
                LinearSolution::Solved { particular, .. } => {
                    for k in 0..r {
                        constants[b][a][k] = -&particular[k];
                    }
                    constants[a][b] = particular;
                }
            }
        }
    }
    Ok(ClosureReport {
        closed: true,
        dimension: r,
        basis,
        structure_constants: constants,
        offending: None,
    })
}

/// Largest order accepted by [`prolong_bracket_identity`].
pub const BRACKET_IDENTITY_MAX_ORDER: usize = 3;

/// Checks `[X^{(κ)}, Y^{(κ)}] = [X, Y]^{(κ)}` coefficient by coefficient.
pub fn prolong_bracket_identity(x: &VectorField, y: &VectorField, kappa: usize) -> Result<bool, Error> {
    if kappa > BRACKET_IDENTITY_MAX_ORDER {
        return Err(Error::Resource(format!(
            "bracket identity is limited to order {BRACKET_IDENTITY_MAX_ORDER}; \
             check single coefficients with prolong_coeff for higher orders"
        )));
    }
    let z = bracket(x, y)?;
    let px = prolong_field(x, kappa)?;
    let py = prolong_field(y, kappa)?;
    let pz = prolong_field(&z, kappa)?;
    let b = x.base();
    let comm = |fx: &JetPoly, fy: &JetPoly| -> Result<JetPoly, Error> {
        Ok(px.apply(fy)?.sub(&py.apply(fx)?))
    };
    for i in 0..b.n + b.m {
        let (fx, fy, fz) = if i < b.n {
            (x.q_jet(i), y.q_jet(i), z.q_jet(i))
        } else {
            (x.r_jet(i - b.n), y.r_jet(i - b.n), z.r_jet(i - b.n))
        };
        if comm(&fx, &fy)? != fz {
            return Ok(false);
        }
    }
    for (c, fz) in &pz.coeffs {
        if comm(&px.coeffs[c], &py.coeffs[c])? != *fz {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A rational self-map of `(x, u)`-space, one `numerator / denominator` pair
/// per coordinate.
#[derive(Clone, PartialEq, Eq)]
pub struct RationalMap {
    base: BaseSpace,
    comps: Vec<(Poly, Poly)>,
}

fn homogenized(p: &Poly, nums: &[Poly], dens: &[Poly], d: &[u32], target: &Vars) -> Poly {
    let powers = |v: &Poly, e: u32| {
        let mut out = vec![Poly::one(target)];
        for k in 1..=e as usize {
            out.push(&out[k - 1] * v);
        }
        out
    };
    let npow: Vec<Vec<Poly>> = nums.iter().zip(d).map(|(a, &e)| powers(a, e)).collect();
    let dpow: Vec<Vec<Poly>> = dens.iter().zip(d).map(|(a, &e)| powers(a, e)).collect();
    let mut out = Poly::zero(target);
    for (m, c) in p.terms() {
        let mut t = Poly::constant(target, c.clone());
        for (i, &e) in m.exps().iter().enumerate() {
            let e = e as u32;
            if e > 0 {
                t = &t * &npow[i][e as usize];
            }
            if d[i] > e {
                t = &t * &dpow[i][(d[i] - e) as usize];
            }
        }
        out.add_scaled(&t, &Rat::one());
    }
    out
}

/// `(a/b)` evaluated at rational arguments `nums[i]/dens[i]`, as a single
/// fraction over `target`.
fn subst_fraction(a: &Poly, b: &Poly, nums: &[Poly], dens: &[Poly], target: &Vars) -> (Poly, Poly) {
    let d: Vec<u32> = (0..a.nvars())
        .map(|i| a.degree_in(i).max(b.degree_in(i)))
        .collect();
    (
        homogenized(a, nums, dens, &d, target),
        homogenized(b, nums, dens, &d, target),
    )
}

fn simplify(mut a: Poly, mut b: Poly, factors: &[Poly]) -> (Poly, Poly) {
    if let Some(q) = a.div_exact(&b) {
        return (q, Poly::one(b.vars()));
    }
    for f in factors {
        if f.is_constant() {
            continue;
        }
        loop {
            match (a.div_exact(f), b.div_exact(f)) {
                (Some(qa), Some(qb)) => {
                    a = qa;
                    b = qb;
                }
                _ => break,
            }
        }
    }
    let c = b.constant_term();
    if !c.is_zero() && !c.is_one() {
        let inv = c.recip().expect("nonzero");
        a = a.scale(&inv);
        b = b.scale(&inv);
    }
    (a, b)
}

impl RationalMap {
    /// Builds a map; every denominator must be nonzero at the origin.
    pub fn new(base: &BaseSpace, comps: Vec<(Poly, Poly)>) -> Result<RationalMap, Error> {
        if comps.len() != base.n + base.m {
            return Err(Error::Domain(format!(
                "rational map needs {} components",
                base.n + base.m
            )));
        }
        for (a, b) in &comps {
            if *a.vars() != base.vars || *b.vars() != base.vars {
                return Err(Error::Domain("rational map variable set mismatch".into()));
            }
            if b.constant_term().is_zero() {
                return Err(Error::Domain("denominator vanishes at the origin".into()));
            }
        }
        let comps = comps.into_iter().map(|(a, b)| simplify(a, b, &[])).collect();
        Ok(RationalMap {
            base: base.clone(),
            comps,
        })
    }

    /// A polynomial map.
    pub fn polynomial(base: &BaseSpace, comps: Vec<Poly>) -> Result<RationalMap, Error> {
        let one = Poly::one(&base.vars);
        RationalMap::new(base, comps.into_iter().map(|p| (p, one.clone())).collect())
    }

    pub fn identity(base: &BaseSpace) -> RationalMap {
        let comps = (0..base.n + base.m).map(|i| Poly::var(&base.vars, i)).collect();
        RationalMap::polynomial(base, comps).expect("identity")
    }

    pub fn base(&self) -> &BaseSpace {
        &self.base
    }

    pub fn components(&self) -> &[(Poly, Poly)] {
        &self.comps
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &RationalMap) -> Result<RationalMap, Error> {
        if self.base != inner.base {
            return Err(Error::Domain("maps live on different spaces".into()));
        }
        let nums: Vec<Poly> = inner.comps.iter().map(|c| c.0.clone()).collect();
        let dens: Vec<Poly> = inner.comps.iter().map(|c| c.1.clone()).collect();
        let comps = self
            .comps
            .iter()
            .map(|(a, b)| {
                let (p, q) = subst_fraction(a, b, &nums, &dens, &self.base.vars);
                simplify(p, q, &dens)
            })
            .collect::<Vec<_>>();
        RationalMap::new(&self.base, comps)
    }

    /// Equality as rational functions, by cross-multiplication.
    pub fn same_as(&self, other: &RationalMap) -> bool {
        self.base == other.base
            && self
                .comps
                .iter()
                .zip(&other.comps)
                .all(|((a, b), (c, d))| &(a * d) == &(b * c))
    }

    pub fn is_identity(&self) -> bool {
        self.same_as(&RationalMap::identity(&self.base))
    }

    /// Value at a point, `None` where a denominator vanishes.
    pub fn eval(&self, point: &[Rat]) -> Option<Vec<Rat>> {
        self.comps
            .iter()
            .map(|(a, b)| {
                let d = b.eval(point);
                if d.is_zero() {
                    None
                } else {
                    Some(&a.eval(point) * &d.recip().ok()?)
                }
            })
            .collect()
    }

    /// Jacobian matrix at the origin.
    pub fn jacobian_at_origin(&self) -> Vec<Vec<Rat>> {
        let k = self.base.n + self.base.m;
        self.comps
            .iter()
            .map(|(a, b)| {
                let (a0, b0) = (a.constant_term(), b.constant_term());
                let inv2 = (&b0 * &b0).recip().expect("nonzero");
                (0..k)
                    .map(|j| {
                        let e = Multiindex::unit(k, j);
                        let num = &(&a.coeff(&e) * &b0) - &(&a0 * &b.coeff(&e));
                        &num * &inv2
                    })
                    .collect()
            })
            .collect()
    }
}

impl fmt::Display for RationalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.base.vars.names();
        let parts: Vec<String> = self
            .comps
            .iter()
            .zip(names)
            .map(|((a, b), name)| {
                if b.is_constant() && b.constant_term().is_one() {
                    format!("{name} -> {a}")
                } else {
                    format!("{name} -> ({a})/({b})")
                }
            })
            .collect();
        write!(f, "{}", parts.join(", "))
    }
}

impl fmt::Debug for RationalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RationalMap({self})")
    }
}

/// The one-variable, one-function projective map
/// `(x, u) ↦ ((α₀+α₁x)/(1+εx), (βu+γ₀+..+γ_{κ−1}x^{κ−1})/(1+εx)^{κ−1})`.
pub fn scalar_projective_map(
    alpha0: &Rat,
    alpha1: &Rat,
    eps: &Rat,
    beta: &Rat,
    gamma: &[Rat],
    kappa: usize,
) -> Result<RationalMap, Error> {
    if kappa < 2 || gamma.len() > kappa {
        return Err(Error::Domain("need κ ≥ 2 and at most κ coefficients γ".into()));
    }
    let b = BaseSpace::standard(1, 1);
    let (x, u) = (b.x(0), b.u(0));
    let one = Poly::one(&b.vars);
    let mut den = one.clone();
    den.add_scaled(&x, eps);
    let mut nx = Poly::constant(&b.vars, alpha0.clone());
    nx.add_scaled(&x, alpha1);
    let mut nu = u.scale(beta);
    for (i, g) in gamma.iter().enumerate() {
        nu.add_scaled(&x.pow(i as u32), g);
    }
    RationalMap::new(&b, vec![(nx, den.clone()), (nu, den.pow(kappa as u32 - 1))])
}

/// The tabulated generators with explicitly known flows.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Generator {
    /// `∂/∂x_k`.
    TranslateX(usize),
    /// `x_from ∂/∂x_to`.
    LinearX { from: usize, to: usize },
    /// `u^from ∂/∂x_to`.
    UToX { from: usize, to: usize },
    /// `x_k (Σ x_l ∂/∂x_l + weight Σ u^j ∂/∂u^j)`.
    ProjectiveX { k: usize, weight: i64 },
    /// `u^i (Σ x_l ∂/∂x_l + Σ u^j ∂/∂u^j)`.
    ProjectiveU(usize),
    /// `u^from ∂/∂u^to`.
    LinearU { from: usize, to: usize },
    /// `x_{k1}..x_{kd} ∂/∂u^comp`, the translation `∂/∂u^comp` when empty.
    XMonomialU { comp: usize, xs: Vec<usize> },
}

impl Generator {
    /// Scalings take a multiplicative parameter.
    pub fn is_scaling(&self) -> bool {
        matches!(self, Generator::LinearX { from, to } | Generator::LinearU { from, to } if from == to)
    }

    /// Parameter of the composite flow `φ_s ∘ φ_t`.
    pub fn compose_params(&self, s: &Rat, t: &Rat) -> Rat {
        if self.is_scaling() {
            s * t
        } else {
            s + t
        }
    }

    /// Parameter of the inverse flow.
    pub fn inverse_param(&self, s: &Rat) -> Result<Rat, Error> {
        if self.is_scaling() {
            s.recip()
        } else {
            Ok(-s)
        }
    }

    fn check(&self, b: &BaseSpace) -> Result<(), Error> {
        let (n, m) = (b.n, b.m);
        let ok = match self {
            Generator::TranslateX(k) => *k < n,
            Generator::LinearX { from, to } => *from < n && *to < n,
            Generator::UToX { from, to } => *from < m && *to < n,
            Generator::ProjectiveX { k, .. } => *k < n,
            Generator::ProjectiveU(i) => *i < m,
            Generator::LinearU { from, to } => *from < m && *to < m,
            Generator::XMonomialU { comp, xs } => *comp < m && xs.iter().all(|&k| k < n),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("generator {self:?} out of range for n={n}, m={m}")))
        }
    }

    fn x_monomial(b: &BaseSpace, xs: &[usize]) -> Poly {
        let mut p = Poly::one(&b.vars);
        for &k in xs {
            p = &p * &b.x(k);
        }
        p
    }

    /// The vector field.
    pub fn field(&self, b: &BaseSpace) -> Result<VectorField, Error> {
        self.check(b)?;
        Ok(match self {
            Generator::TranslateX(k) => VectorField::dx(b, *k),
            Generator::LinearX { from, to } => VectorField::along_x(b, *to, b.x(*from)),
            Generator::UToX { from, to } => VectorField::along_x(b, *to, b.u(*from)),
            Generator::ProjectiveX { k, weight } => {
                let w = Rat::from_int(*weight);
                let q = (0..b.n).map(|l| &b.x(*k) * &b.x(l)).collect();
                let r = (0..b.m).map(|j| (&b.x(*k) * &b.u(j)).scale(&w)).collect();
                VectorField::concrete(b, q, r)?
            }
            Generator::ProjectiveU(i) => {
                let q = (0..b.n).map(|l| &b.u(*i) * &b.x(l)).collect();
                let r = (0..b.m).map(|j| &b.u(*i) * &b.u(j)).collect();
                VectorField::concrete(b, q, r)?
            }
            Generator::LinearU { from, to } => VectorField::along_u(b, *to, b.u(*from)),
            Generator::XMonomialU { comp, xs } => {
                VectorField::along_u(b, *comp, Generator::x_monomial(b, xs))
            }
        })
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::TranslateX(k) => write!(f, "d/dx{}", k + 1),
            Generator::LinearX { from, to } => write!(f, "x{}*d/dx{}", from + 1, to + 1),
            Generator::UToX { from, to } => write!(f, "u{}*d/dx{}", from + 1, to + 1),
            Generator::ProjectiveX { k, weight } => {
                write!(f, "x{}*(x.d/dx + {weight}*u.d/du)", k + 1)
            }
            Generator::ProjectiveU(i) => write!(f, "u{}*(x.d/dx + u.d/du)", i + 1),
            Generator::LinearU { from, to } => write!(f, "u{}*d/du{}", from + 1, to + 1),
            Generator::XMonomialU { comp, xs } => {
                for k in xs {
                    write!(f, "x{}*", k + 1)?;
                }
                write!(f, "d/du{}", comp + 1)
            }
        }
    }
}

/// The exact flow of a tabulated generator. Scalings use the multiplicative
/// parameter `λ = s ≠ 0` in place of `e^s`.
pub fn exp_flow(b: &BaseSpace, g: &Generator, s: &Rat) -> Result<RationalMap, Error> {
    g.check(b)?;
    let k = b.n + b.m;
    let one = Poly::one(&b.vars);
    let var = |i: usize| Poly::var(&b.vars, i);
    let mut comps: Vec<(Poly, Poly)> = (0..k).map(|i| (var(i), one.clone())).collect();
    let shift = |comps: &mut Vec<(Poly, Poly)>, i: usize, p: Poly| {
        comps[i].0.add_scaled(&p, s);
    };
    match g {
        Generator::TranslateX(l) => shift(&mut comps, *l, one.clone()),
        Generator::LinearX { from, to } | Generator::LinearU { from, to } => {
            let off = if matches!(g, Generator::LinearU { .. }) { b.n } else { 0 };
            if from == to {
                if s.is_zero() {
                    return Err(Error::Domain("scaling parameter must be nonzero".into()));
                }
                comps[off + to].0 = var(off + to).scale(s);
            } else {
                shift(&mut comps, off + to, var(off + from));
            }
        }
        Generator::UToX { from, to } => shift(&mut comps, *to, var(b.n + from)),
        Generator::XMonomialU { comp, xs } => {
            shift(&mut comps, b.n + comp, Generator::x_monomial(b, xs))
        }
        Generator::ProjectiveX { k: kx, weight } => {
            let mut den = one.clone();
            den.add_scaled(&var(*kx), &-s);
            let w = u32::try_from(*weight)
                .map_err(|_| Error::Unsupported("negative projective weight".into()))?;
            for (i, c) in comps.iter_mut().enumerate() {
                c.1 = if i < b.n { den.clone() } else { den.pow(w) };
            }
        }
        Generator::ProjectiveU(i) => {
            let mut den = one.clone();
            den.add_scaled(&var(b.n + i), &-s);
            for c in comps.iter_mut() {
                c.1 = den.clone();
            }
        }
    }
    RationalMap::new(b, comps)
}

/// The generator families of the homogeneous systems.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// Order two: `(n+m)(n+m+2)` projective generators.
    Eq55,
    /// Order at least three.
    Eq58,
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Family, Error> {
        match s {
            "eq55" => Ok(Family::Eq55),
            "eq58" => Ok(Family::Eq58),
            _ => Err(Error::Unsupported(format!(
                "unknown generator family {s:?} (expected eq55 or eq58)"
            ))),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Eq55 => "eq55",
            Family::Eq58 => "eq58",
        })
    }
}

/// The listed generators of a family, in a fixed order.
pub fn generator_family(fam: Family, n: usize, m: usize, kappa: usize) -> Result<Vec<Generator>, Error> {
    if n < 1 || m < 1 {
        return Err(Error::Domain("n and m must be at least 1".into()));
    }
    let mut out = Vec::new();
    for k in 0..n {
        out.push(Generator::TranslateX(k));
    }
    for from in 0..n {
        for to in 0..n {
            out.push(Generator::LinearX { from, to });
        }
    }
    match fam {
        Family::Eq55 => {
            if kappa != 2 {
                return Err(Error::UnsupportedShape("eq55 is the order-two family".into()));
            }
            for from in 0..m {
                for to in 0..n {
                    out.push(Generator::UToX { from, to });
                }
            }
            for k in 0..n {
                out.push(Generator::ProjectiveX { k, weight: 1 });
            }
            for i in 0..m {
                out.push(Generator::ProjectiveU(i));
            }
            for comp in 0..m {
                out.push(Generator::XMonomialU { comp, xs: vec![] });
                for k in 0..n {
                    out.push(Generator::XMonomialU { comp, xs: vec![k] });
                }
            }
            for from in 0..m {
                for to in 0..m {
                    out.push(Generator::LinearU { from, to });
                }
            }
        }
        Family::Eq58 => {
            if kappa < 3 {
                return Err(Error::UnsupportedShape("eq58 needs order at least 3".into()));
            }
            for k in 0..n {
                out.push(Generator::ProjectiveX {
                    k,
                    weight: kappa as i64 - 1,
                });
            }
            for from in 0..m {
                for to in 0..m {
                    out.push(Generator::LinearU { from, to });
                }
            }
            let b = BaseSpace::standard(n, m);
            for comp in 0..m {
                for d in 0..kappa as u32 {
                    for p in x_monomials(&b, d) {
                        let (mono, _) = p.leading().expect("monomial");
                        let mut xs = Vec::new();
                        for (k, &e) in mono.exps()[..n].iter().enumerate() {
                            xs.extend(std::iter::repeat(k).take(e as usize));
                        }
                        out.push(Generator::XMonomialU { comp, xs });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// The fields of a generator family.
pub fn family_fields(fam: Family, n: usize, m: usize, kappa: usize) -> Result<Vec<VectorField>, Error> {
    let b = BaseSpace::standard(n, m);
    generator_family(fam, n, m, kappa)?
        .iter()
        .map(|g| g.field(&b))
        .collect()
}

/// Three polynomial solutions of the homogeneous system of order `κ`,
/// kept away from the singular sets of the tabulated flows: zero, a graph of
/// small slope, and a shifted graph with a small quadratic part when `κ ≥ 3`.
pub fn sample_solutions(b: &BaseSpace, kappa: usize) -> Vec<Vec<Poly>> {
    let (n, m) = (b.n, b.m);
    let zero = vec![b.zero(); m];
    let slope: Vec<Poly> = (0..m)
        .map(|j| {
            let mut p = b.zero();
            for l in 0..n {
                p.add_scaled(&b.x(l), &Rat::new(1, (3 + 2 * l + j) as i64));
            }
            p
        })
        .collect();
    let shifted: Vec<Poly> = (0..m)
        .map(|j| {
            let mut p = b.constant(Rat::from_int(3 + j as i64));
            for l in 0..n {
                p.add_scaled(&b.x(l), &Rat::new(1, (7 + l) as i64));
            }
            if kappa >= 3 {
                p.add_scaled(&b.x(0).pow(2), &Rat::new(1, 4 + j as i64));
                if n >= 2 {
                    p.add_scaled(&(&b.x(0) * &b.x(1)), &Rat::new(-1, 6));
                }
            }
            p
        })
        .collect();
    vec![zero, slope, shifted]
}

/// Outcome of [`finite_symmetry_check`].
#[derive(Clone, Debug)]
pub struct FiniteReport {
    pub passed: bool,
    /// The transformed solutions `u'(x')`, as polynomials over the same
    /// variable names (only the x's occur); empty entries for failures.
    pub transformed: Vec<Vec<Poly>>,
    /// Series degree up to which the higher coefficients were checked.
    pub verification_degree: u32,
    /// Every transformed solution was also confirmed by an exact rational
    /// identity.
    pub exact: bool,
    pub failures: Vec<String>,
}

/// Checks that `h` maps the graph of each polynomial solution `u(x)` of
/// degree below `κ` to the graph of another such polynomial.
///
/// Each solution is a list of `m` polynomials over the base variables that
/// do not involve the u's.
pub fn finite_symmetry_check(
    h: &RationalMap,
    kappa: usize,
    solutions: &[Vec<Poly>],
) -> Result<FiniteReport, Error> {
    let b = h.base().clone();
    let (n, m) = (b.n, b.m);
    if invert(&h.jacobian_at_origin()).is_none() {
        return Err(Error::Domain("the map is singular at the origin".into()));
    }
    let xv = Vars::new(b.xnames());
    let v = 2 * kappa as u32;
    let mut report = FiniteReport {
        passed: true,
        transformed: Vec::new(),
        verification_degree: v,
        exact: true,
        failures: Vec::new(),
    };
    for (si, sol) in solutions.iter().enumerate() {
        if sol.len() != m {
            return Err(Error::Domain(format!("solution {si} needs {m} components")));
        }
        let mut args: Vec<Poly> = (0..n).map(|l| Poly::var(&xv, l)).collect();
        for p in sol {
            if *p.vars() != b.vars || (0..m).any(|j| p.degree_in(n + j) > 0) {
                return Err(Error::Domain(format!(
                    "solution {si} must be a polynomial in the x's only"
                )));
            }
            if p.degree().unwrap_or(0) as usize >= kappa {
                return Err(Error::Domain(format!("solution {si} has degree at least {kappa}")));
            }
            let zeros = vec![Poly::zero(&xv); m];
            let mut a = (0..n).map(|l| Poly::var(&xv, l)).collect::<Vec<_>>();
            a.extend(zeros);
            args.push(p.substitute(&a, &xv, None));
        }
        // Graph image as exact fractions in x.
        let frac: Vec<(Poly, Poly)> = h
            .components()
            .iter()
            .map(|(a, d)| (a.substitute(&args, &xv, None), d.substitute(&args, &xv, None)))
            .collect();
        if frac.iter().any(|(_, d)| d.constant_term().is_zero()) {
            return Err(Error::Domain(format!(
                "the map is undefined at the base point of solution {si}"
            )));
        }
        let mut phi = Vec::with_capacity(n);
        let mut phi0 = Vec::with_capacity(n);
        for (a, d) in &frac[..n] {
            let s = series::quotient(a, d, v)?;
            let c = s.constant_term();
            let mut t = s.clone();
            t.add_term(Multiindex::zero(n), &-c.clone());
            phi0.push(c);
            phi.push(t);
        }
        let xinv = match series::revert(&phi, v) {
            Ok(g) => g,
            Err(_) => {
                report.passed = false;
                report.failures.push(format!(
                    "solution {si}: the transformed graph is not a graph over x"
                ));
                report.transformed.push(Vec::new());
                continue;
            }
        };
        let mut polys_y = Vec::with_capacity(m);
        let mut ok = true;
        for (j, (a, d)) in frac[n..].iter().enumerate() {
            let num = a.substitute(&xinv, &xv, Some(v));
            let den = d.substitute(&xinv, &xv, Some(v));
            let s = series::quotient(&num, &den, v)?;
            if let Some((mono, _)) = s.terms().find(|(mono, _)| mono.order() as usize >= kappa) {
                ok = false;
                report.failures.push(format!(
                    "solution {si}: component {} has a term of degree {} in the transformed series",
                    j + 1,
                    mono.order()
                ));
                break;
            }
            polys_y.push(s);
        }
        if !ok {
            report.passed = false;
            report.transformed.push(Vec::new());
            continue;
        }
        // Recentre at the image of the base point: y = x' − φ(0).
        let recentre: Vec<Poly> = phi0
            .iter()
            .enumerate()
            .map(|(l, c)| {
                let mut p = Poly::var(&xv, l);
                p.add_term(Multiindex::zero(n), &-c.clone());
                p
            })
            .collect();
        let mut transformed = Vec::with_capacity(m);
        let nums: Vec<Poly> = frac[..n].iter().map(|f| f.0.clone()).collect();
        let dens: Vec<Poly> = frac[..n].iter().map(|f| f.1.clone()).collect();
        for (j, py) in polys_y.iter().enumerate() {
            let px = py.substitute(&recentre, &xv, None);
            let d: Vec<u32> = (0..n).map(|l| px.degree_in(l)).collect();
            let big_n = homogenized(&px, &nums, &dens, &d, &xv);
            let mut big_d = Poly::one(&xv);
            for l in 0..n {
                big_d = &big_d * &dens[l].pow(d[l]);
            }
            let (a, dd) = &frac[n + j];
            if &(a * &big_d) != &(dd * &big_n) {
                report.exact = false;
                report.passed = false;
                report.failures.push(format!(
                    "solution {si}: component {} fails the exact identity",
                    j + 1
                ));
            }
            let full: Vec<Poly> = (0..n).map(|l| b.x(l)).collect();
            transformed.push(px.substitute(&full, &b.vars, None));
        }
        report.transformed.push(transformed);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> BaseSpace {
        BaseSpace::standard(1, 1)
    }

    #[test]
    fn brackets() {
        let b = base();
        let dx = VectorField::dx(&b, 0);
        let xdx = VectorField::along_x(&b, 0, b.x(0));
        assert_eq!(bracket(&dx, &xdx).unwrap(), dx);
        let udu = VectorField::along_u(&b, 0, b.u(0));
        let du = VectorField::du(&b, 0);
        assert_eq!(bracket(&udu, &du).unwrap(), du.combine(&Rat::from_int(-1), &du, &Rat::zero()));
        let p = Generator::ProjectiveX { k: 0, weight: 2 }.field(&b).unwrap();
        let expect = VectorField::concrete(
            &b,
            vec![b.x(0).scale(&Rat::from_int(-2))],
            vec![b.u(0).scale(&Rat::from_int(-2))],
        )
        .unwrap();
        assert_eq!(bracket(&p, &dx).unwrap(), expect);
        assert!(bracket(&VectorField::symbolic(&b), &dx).is_err());
    }

    #[test]
    fn closure() {
        let b = base();
        let dx = VectorField::dx(&b, 0);
        let x2 = VectorField::along_x(&b, 0, b.x(0).pow(2));
        let r = closure_check(&[dx.clone(), x2]).unwrap();
        assert!(!r.closed && r.offending.is_some());
        let xdx = VectorField::along_x(&b, 0, b.x(0));
        let r = closure_check(&[dx, xdx]).unwrap();
        assert!(r.closed);
        assert_eq!(r.structure_constants[0][1], vec![Rat::one(), Rat::zero()]);
    }

    #[test]
    fn flows() {
        let b = base();
        let t = exp_flow(&b, &Generator::TranslateX(0), &Rat::from_int(3)).unwrap();
        assert_eq!(t.eval(&[Rat::zero(), Rat::one()]).unwrap(), vec![Rat::from_int(3), Rat::one()]);
        let s = Rat::new(1, 2);
        let g = Generator::ProjectiveX { k: 0, weight: 2 };
        let f = exp_flow(&b, &g, &s).unwrap();
        let inv = exp_flow(&b, &g, &g.inverse_param(&s).unwrap()).unwrap();
        assert!(f.compose(&inv).unwrap().is_identity());
        let f2 = exp_flow(&b, &g, &Rat::one()).unwrap();
        assert!(f.compose(&f).unwrap().same_as(&f2));
        assert!(bracket_identity_smoke());
    }

    fn bracket_identity_smoke() -> bool {
        let b = base();
        let x = VectorField::concrete(&b, vec![b.x(0).pow(2)], vec![&b.x(0) * &b.u(0)]).unwrap();
        let y = VectorField::along_u(&b, 0, b.u(0));
        prolong_bracket_identity(&x, &y, 2).unwrap()
    }

    #[test]
    fn projective_map_on_parabola() {
        let one = Rat::one();
        let h = scalar_projective_map(&Rat::zero(), &one, &one, &one, &[], 3).unwrap();
        let b = base();
        let rep = finite_symmetry_check(&h, 3, &[vec![b.x(0).pow(2)]]).unwrap();
        assert!(rep.passed && rep.exact);
        assert_eq!(rep.transformed[0][0], b.x(0).pow(2));
        let shear = RationalMap::polynomial(&b, vec![b.x(0), &b.u(0) + &b.x(0).pow(3)]).unwrap();
        assert!(!finite_symmetry_check(&shear, 3, &[vec![b.x(0)]]).unwrap().passed);
    }

    #[test]
    fn tabulated_flows_preserve_sample_solutions() {
        for (fam, kappa) in [(Family::Eq55, 2), (Family::Eq58, 3)] {
            for (n, m) in [(1, 1), (2, 1)] {
                let b = BaseSpace::standard(n, m);
                let sols = sample_solutions(&b, kappa);
                for g in generator_family(fam, n, m, kappa).unwrap() {
                    for s in [Rat::one(), Rat::from_int(-1), Rat::new(1, 2)] {
                        let h = exp_flow(&b, &g, &s).unwrap();
                        let rep = finite_symmetry_check(&h, kappa, &sols).unwrap();
                        assert!(rep.passed && rep.exact, "{g} s={s}: {:?}", rep.failures);
                    }
                }
            }
        }
    }
}
