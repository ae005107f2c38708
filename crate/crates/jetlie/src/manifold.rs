//! Submanifolds of solutions `u = Ω(x, ν, χ)` over truncated power series.
//!
//! A manifold is the graph of the general solution of a completely
//! integrable system, with `ν = u(0)` and `χ` the remaining initial data.
//! Every series is cut at a fixed total degree `N`; residual checks state
//! the order to which they hold.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::linalg::{invert, rank, solve_affine, LinearSolution, RowReducer, SparseRow};
use crate::algebra::{binom, multiindex_enumerate, multiindices_of_order, Multiindex, Poly, Rat, Vars};
use crate::jet::{coords_up_to, skeleton_build, JetCoord, JetMonomial, SystemSpec};
use crate::prolong::{BaseSpace, CoeffForm, JetPoly, VectorField};
use crate::Error;

const RANK_SAMPLES: usize = 3;
const RANK_SEED: u64 = 0x6a65_746c_6965;

fn indexed(prefix: &str, k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("{prefix}{i}")).collect()
}

fn vars_of(groups: &[Vec<String>]) -> Vars {
    let all: Vec<String> = groups.iter().flatten().cloned().collect();
    Vars::new(&all)
}

fn vars_equal_names(a: &Vars, b: &Vars) -> bool {
    a.names() == b.names()
}

/// A tuple of truncated power series in a common variable tuple.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SeriesMap {
    vars: Vars,
    labels: Vec<String>,
    outputs: Vec<Poly>,
    truncation: u32,
}

impl SeriesMap {
    pub fn new(
        vars: &Vars,
        labels: Vec<String>,
        outputs: Vec<Poly>,
        truncation: u32,
    ) -> Result<SeriesMap, Error> {
        if labels.len() != outputs.len() {
            return Err(Error::Domain("one label per output is required".into()));
        }
        if outputs.iter().any(|p| !vars_equal_names(p.vars(), vars)) {
            return Err(Error::Domain("outputs must use the declared variables".into()));
        }
        Ok(SeriesMap {
            vars: vars.clone(),
            labels,
            outputs: outputs.iter().map(|p| p.truncate(truncation)).collect(),
            truncation,
        })
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn outputs(&self) -> &[Poly] {
        &self.outputs
    }

    pub fn output(&self, i: usize) -> &Poly {
        &self.outputs[i]
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    pub fn eval(&self, point: &[Rat]) -> Vec<Rat> {
        self.outputs.iter().map(|p| p.eval(point)).collect()
    }

    /// Jacobian of the selected outputs at `point`.
    pub fn jacobian_at(&self, point: &[Rat], rows: &[usize]) -> Vec<Vec<Rat>> {
        rows.iter()
            .map(|&r| {
                (0..self.vars.len())
                    .map(|v| self.outputs[r].diff(v).eval(point))
                    .collect()
            })
            .collect()
    }

    /// Substitutes `args` (over `target`) for the variables of every output.
    pub fn substitute(&self, args: &[Poly], target: &Vars) -> Vec<Poly> {
        self.outputs
            .iter()
            .map(|p| p.substitute(args, target, Some(self.truncation)))
            .collect()
    }
}

impl fmt::Display for SeriesMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (l, p)) in self.labels.iter().zip(&self.outputs).enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{l} = {p}")?;
        }
        Ok(())
    }
}

/// The graph `u^j = Ω_j(x, ν, χ)` with `Ω_j(0, ν, χ) = ν^j`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ManifoldSpec {
    n: usize,
    m: usize,
    p: usize,
    vars: Vars,
    omega: Vec<Poly>,
    truncation: u32,
}

impl ManifoldSpec {
    /// Names `x1.., nu1.., chi1..` of the variables of `Ω`.
    pub fn variable_names(n: usize, m: usize, p: usize) -> Vec<String> {
        let mut v = indexed("x", n);
        v.extend(indexed("nu", m));
        v.extend(indexed("chi", p));
        v
    }

    pub fn variables(n: usize, m: usize, p: usize) -> Vars {
        Vars::new(&ManifoldSpec::variable_names(n, m, p))
    }

    /// Validates `Ω`. Each component may use any subset of the standard
    /// variable names; it is re-expressed over the full tuple and cut at
    /// degree `truncation`.
    pub fn new(
        n: usize,
        m: usize,
        p: usize,
        omega: Vec<Poly>,
        truncation: u32,
    ) -> Result<ManifoldSpec, Error> {
        if n == 0 || m == 0 || p == 0 {
            return Err(Error::Specification("n, m and p must all be at least 1".into()));
        }
        if truncation == 0 {
            return Err(Error::Specification("truncation must be at least 1".into()));
        }
        if omega.len() != m {
            return Err(Error::Specification(format!(
                "expected {m} components of omega, got {}",
                omega.len()
            )));
        }
        let vars = ManifoldSpec::variables(n, m, p);
        let mut comps = Vec::with_capacity(m);
        for w in &omega {
            let map = w
                .vars()
                .names()
                .iter()
                .map(|name| {
                    vars.index_of(name).ok_or_else(|| {
                        Error::Specification(format!("unknown manifold variable {name}"))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            comps.push(w.embed(&vars, &map).truncate(truncation));
        }
        let spec = ManifoldSpec {
            n,
            m,
            p,
            vars,
            omega: comps,
            truncation,
        };
        let mut args: Vec<Poly> = vec![Poly::zero(&spec.vars); n];
        args.extend((n..n + m + p).map(|i| Poly::var(&spec.vars, i)));
        for (j, w) in spec.omega.iter().enumerate() {
            let at0 = w.substitute(&args, &spec.vars, Some(truncation));
            if at0 != Poly::var(&spec.vars, spec.nu_index(j)) {
                return Err(Error::Specification(format!(
                    "omega component {} must reduce to nu{} at x = 0, got {at0}",
                    j + 1,
                    j + 1
                )));
            }
        }
        Ok(spec)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// `dim M = n + m + p`.
    pub fn dim(&self) -> usize {
        self.n + self.m + self.p
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn omega(&self) -> &[Poly] {
        &self.omega
    }

    pub fn nu_index(&self, j: usize) -> usize {
        self.n + j
    }

    pub fn chi_index(&self, q: usize) -> usize {
        self.n + self.m + q
    }

    /// The `(x, u)` space carrying point vector fields.
    pub fn base(&self) -> BaseSpace {
        BaseSpace::new(self.n, self.m, &indexed("x", self.n), &indexed("u", self.m))
    }

    pub fn omega_map(&self) -> SeriesMap {
        SeriesMap {
            vars: self.vars.clone(),
            labels: indexed("u", self.m),
            outputs: self.omega.clone(),
            truncation: self.truncation,
        }
    }

    /// The same manifold with the roles of `(x, u)` and `(χ, ν)` exchanged:
    /// its defining equations are the dual equations `ν = Ω*(χ, x, u)`.
    /// Requires `Ω(x, ν, 0) = ν`, the invariant of the swapped roles.
    pub fn swapped(&self) -> Result<ManifoldSpec, Error> {
        let (n, m, p) = (self.n, self.m, self.p);
        let mut args: Vec<Poly> = (0..n + m).map(|i| Poly::var(&self.vars, i)).collect();
        args.extend(std::iter::repeat(Poly::zero(&self.vars)).take(p));
        for (j, w) in self.omega.iter().enumerate() {
            if w.substitute(&args, &self.vars, Some(self.truncation)) != Poly::var(&self.vars, n + j) {
                return Err(Error::Specification(format!(
                    "swapping needs omega component {} to reduce to nu{} at chi = 0",
                    j + 1,
                    j + 1
                )));
            }
        }
        let dual = dual_equations(self)?;
        let target = ManifoldSpec::variables(p, m, n);
        let mut map = Vec::with_capacity(n + m + p);
        map.extend(0..p);
        map.extend((0..n).map(|l| p + m + l));
        map.extend((0..m).map(|j| p + j));
        let comps = dual.outputs.iter().map(|w| w.embed(&target, &map)).collect();
        ManifoldSpec::new(p, m, n, comps, self.truncation)
    }

    /// Same `Ω` with a different truncation.
    pub fn with_truncation(&self, truncation: u32) -> Result<ManifoldSpec, Error> {
        ManifoldSpec::new(self.n, self.m, self.p, self.omega.clone(), truncation)
    }

    fn x_multi(&self, beta: &Multiindex) -> Multiindex {
        beta.concat(&Multiindex::zero(self.m + self.p))
    }

    fn x_args(&self, target: &Vars, offset: usize) -> Vec<Poly> {
        (0..self.n).map(|l| Poly::var(target, offset + l)).collect()
    }
}

impl fmt::Display for ManifoldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "manifold n={} m={} p={} truncation={}",
            self.n, self.m, self.p, self.truncation
        )?;
        for (j, w) in self.omega.iter().enumerate() {
            write!(f, "\n  u{} = {w}", j + 1)?;
        }
        Ok(())
    }
}

/// Variables `chi1.., x1.., u1..` of the dual equations.
pub fn dual_variables(n: usize, m: usize, p: usize) -> Vars {
    vars_of(&[indexed("chi", p), indexed("x", n), indexed("u", m)])
}

/// The dual equations `ν = Ω*(χ, x, u)`, obtained by iterating
/// `ν ← u − (Ω(x, ν, χ) − ν)`.
pub fn dual_equations(spec: &ManifoldSpec) -> Result<SeriesMap, Error> {
    let (n, m, p) = (spec.n, spec.m, spec.p);
    let nt = spec.truncation;
    let w = dual_variables(n, m, p);
    let us: Vec<Poly> = (0..m).map(|j| Poly::var(&w, p + n + j)).collect();
    let mut args: Vec<Poly> = spec.x_args(&w, p);
    args.extend(us.iter().cloned());
    args.extend((0..p).map(|q| Poly::var(&w, q)));
    let mut nu = us.clone();
    let mut converged = false;
    for _ in 0..nt + 2 {
        args[n..n + m].clone_from_slice(&nu);
        let next: Vec<Poly> = spec
            .omega
            .iter()
            .enumerate()
            .map(|(j, om)| {
                let rest = &om.substitute(&args, &w, Some(nt)) - &nu[j];
                (&us[j] - &rest).truncate(nt)
            })
            .collect();
        if next == nu {
            converged = true;
            break;
        }
        nu = next;
    }
    if !converged {
        return Err(Error::Domain("dual equations did not stabilize".into()));
    }
    SeriesMap::new(&w, indexed("nu", m), nu, nt)
}

/// `u − Ω(x, Ω*(χ, x, u), χ)` cut at the truncation degree; zero when the
/// functional equation holds.
pub fn dual_residual(spec: &ManifoldSpec, dual: &SeriesMap) -> Vec<Poly> {
    let (n, p) = (spec.n, spec.p);
    let w = dual.vars().clone();
    let mut args = spec.x_args(&w, p);
    args.extend(dual.outputs().iter().cloned());
    args.extend((0..p).map(|q| Poly::var(&w, q)));
    spec.omega
        .iter()
        .enumerate()
        .map(|(j, om)| {
            (&Poly::var(&w, p + n + j) - &om.substitute(&args, &w, Some(spec.truncation)))
                .truncate(spec.truncation)
        })
        .collect()
}

/// Outcome of a solvability search.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Solvability {
    pub solvable: bool,
    /// The minimal order when solvable, otherwise the cap searched.
    pub order: usize,
    pub rank: usize,
    pub target: usize,
    /// Pairs `(component, multiindex)` whose rows raised the rank.
    pub witness: Vec<(usize, Multiindex)>,
}

/// Looks for `(j(q), β(q))` with `1 ≤ |β| ≤ order_cap` making the map
/// `(ν, χ) ↦ (Ω_j(0,ν,χ), ∂^β Ω_{j(q)}(0,ν,χ))` of full rank `m + p` at 0.
pub fn solvability_parameters(spec: &ManifoldSpec, order_cap: usize) -> Result<Solvability, Error> {
    if order_cap as u32 > spec.truncation {
        return Err(Error::Domain(format!(
            "order cap {order_cap} exceeds the truncation {}",
            spec.truncation
        )));
    }
    let (n, m, p) = (spec.n, spec.m, spec.p);
    let mut rr = RowReducer::new(p);
    let mut witness = Vec::new();
    let mut order = order_cap;
    'search: for d in 1..=order_cap as u32 {
        for beta in multiindices_of_order(n, d) {
            let fact = Rat::from(beta.factorial() as u64);
            for (j, om) in spec.omega.iter().enumerate() {
                let row: Vec<Rat> = (0..p)
                    .map(|q| {
                        let key = beta
                            .concat(&Multiindex::zero(m))
                            .concat(&Multiindex::unit(p, q));
                        &fact * &om.coeff(&key)
                    })
                    .collect();
                if rr.insert_dense(&row) {
                    witness.push((j, beta.clone()));
                    if rr.rank() == p {
                        order = d as usize;
                        break 'search;
                    }
                }
            }
        }
    }
    let solvable = rr.rank() == p;
    Ok(Solvability {
        solvable,
        order: if solvable { order } else { order_cap },
        rank: m + rr.rank(),
        target: m + p,
        witness,
    })
}

/// Smallest `k` such that `(x, u) ↦ (∂^γ_χ Ω*_j(0, x, u))_{|γ| ≤ k}` has
/// rank `n + m` at the origin.
pub fn solvability_variables(spec: &ManifoldSpec, order_cap: usize) -> Result<Solvability, Error> {
    if order_cap as u32 >= spec.truncation {
        return Err(Error::Domain(format!(
            "order cap {order_cap} must stay below the truncation {}",
            spec.truncation
        )));
    }
    let dual = dual_equations(spec)?;
    let (n, m, p) = (spec.n, spec.m, spec.p);
    let mut rr = RowReducer::new(n + m);
    let mut witness = Vec::new();
    for k in 0..=order_cap as u32 {
        for gamma in multiindices_of_order(p, k) {
            let fact = Rat::from(gamma.factorial() as u64);
            for (j, w) in dual.outputs().iter().enumerate() {
                let row: Vec<Rat> = (0..n + m)
                    .map(|c| &fact * &w.coeff(&gamma.concat(&Multiindex::unit(n + m, c))))
                    .collect();
                if rr.insert_dense(&row) {
                    witness.push((j, gamma.clone()));
                }
            }
        }
        if rr.rank() == n + m {
            return Ok(Solvability {
                solvable: true,
                order: k as usize,
                rank: n + m,
                target: n + m,
                witness,
            });
        }
    }
    Ok(Solvability {
        solvable: false,
        order: order_cap,
        rank: rr.rank(),
        target: n + m,
        witness,
    })
}

/// `x^a · Ω^b` over the manifold variables for `μ = (a, b)`.
fn graph_monomial(spec: &ManifoldSpec, mu: &Multiindex, powers: &mut BTreeMap<(usize, u16), Poly>, nt: u32) -> Poly {
    let mut acc = Poly::one(&spec.vars);
    for (i, &e) in mu.exps().iter().enumerate() {
        if e == 0 {
            continue;
        }
        let f = powers
            .entry((i, e))
            .or_insert_with(|| {
                if i < spec.n {
                    Poly::var(&spec.vars, i).pow(e as u32)
                } else {
                    let base = &spec.omega[i - spec.n];
                    let mut r = Poly::one(&spec.vars);
                    for _ in 0..e {
                        r = r.mul_trunc(base, nt);
                    }
                    r
                }
            })
            .clone();
        acc = acc.mul_trunc(&f, nt);
    }
    acc
}

/// Pulls a polynomial on `(x, u)` back to `M` through `u = Ω`.
fn pull_back(spec: &ManifoldSpec, f: &Poly, nt: u32) -> Poly {
    let mut args = spec.x_args(&spec.vars, 0);
    args.extend(spec.omega.iter().cloned());
    f.substitute(&args, &spec.vars, Some(nt))
}

fn add_columns(rows: &mut BTreeMap<(usize, Multiindex), SparseRow>, j: usize, col: usize, p: &Poly) {
    for (mono, c) in p.terms() {
        let row = rows.entry((j, mono.clone())).or_default();
        let e = row.entry(col).or_insert_with(Rat::zero);
        *e += c;
        if e.is_zero() {
            row.remove(&col);
        }
    }
}

/// Searches for a nonzero `X = Σ Q^l ∂x_l + Σ R^j ∂u^j` with polynomial
/// coefficients of degree at most `degree`, and zero parameter part, that
/// is tangent to `M` up to degree `N − 1`. The lowest-degree witness is
/// returned.
pub fn degeneracy_check(spec: &ManifoldSpec, degree: u32) -> Result<Option<VectorField>, Error> {
    if degree + 1 > spec.truncation {
        return Err(Error::Domain(format!(
            "degree {degree} must stay below the truncation {}",
            spec.truncation
        )));
    }
    let (n, m) = (spec.n, spec.m);
    let nt = spec.truncation - 1;
    let base = spec.base();
    let domega: Vec<Vec<Poly>> = spec
        .omega
        .iter()
        .map(|om| (0..n).map(|l| om.diff(l).truncate(nt)).collect())
        .collect();
    let mut powers = BTreeMap::new();
    for d in 0..=degree {
        let monos = multiindex_enumerate(n + m, d);
        let nm = monos.len();
        let basis: Vec<Poly> = monos
            .iter()
            .map(|mu| graph_monomial(spec, mu, &mut powers, nt))
            .collect();
        let mut rows: BTreeMap<(usize, Multiindex), SparseRow> = BTreeMap::new();
        for j in 0..m {
            for (k, b) in basis.iter().enumerate() {
                add_columns(&mut rows, j, (n + j) * nm + k, b);
                for l in 0..n {
                    add_columns(&mut rows, j, l * nm + k, &-b.mul_trunc(&domega[j][l], nt));
                }
            }
        }
        let mut rr = RowReducer::new((n + m) * nm);
        for r in rows.into_values() {
            rr.insert(r);
        }
        if let Some(v) = rr.nullspace().into_iter().next() {
            let coeffs: Vec<Poly> = (0..n + m)
                .map(|c| {
                    Poly::from_terms(
                        &base.vars,
                        monos
                            .iter()
                            .enumerate()
                            .map(|(k, mu)| (mu.clone(), v[c * nm + k].clone())),
                    )
                })
                .collect();
            return Ok(Some(VectorField::from_coeffs(&base, coeffs)));
        }
    }
    Ok(None)
}

/// Converts a polynomial in `(x, u, parametric jets)` into a jet polynomial.
fn flat_to_jet(base: &BaseSpace, params: &[JetCoord], f: &Poly) -> JetPoly {
    let nb = base.n + base.m;
    let mut out = JetPoly::zero(base);
    for (mono, c) in f.terms() {
        let jm = JetMonomial::from_factors(
            params
                .iter()
                .enumerate()
                .flat_map(|(q, pc)| std::iter::repeat(pc.clone()).take(mono.get(nb + q) as usize)),
        );
        let cst = Poly::monomial(&base.vars, mono.block(0, nb), c.clone());
        out.add_term(jm, &CoeffForm::from_poly(cst));
    }
    out
}

/// The system satisfied by the family `u = Ω(x, ν, χ)`.
///
/// The initial data `(ν, χ)` are recovered from `u` and the parametric jets
/// `∂^{β(q)} u^{j(q)}` of a minimal solvability witness by series
/// reversion; every other jet coordinate of order at most `κ = ℓ₀ + 1` is
/// then expressed through them. Requires `Ω(x, 0, 0) = 0`.
pub fn pde_from_manifold(spec: &ManifoldSpec) -> Result<SystemSpec, Error> {
    let (n, m, p) = (spec.n, spec.m, spec.p);
    let nt = spec.truncation;
    let sol = solvability_parameters(spec, nt as usize - 1)?;
    if !sol.solvable {
        return Err(Error::Domain(format!(
            "manifold is not solvable with respect to the parameters (rank {} of {})",
            sol.rank, sol.target
        )));
    }
    let mut zero_args = spec.x_args(&spec.vars, 0);
    zero_args.extend(std::iter::repeat(Poly::zero(&spec.vars)).take(m + p));
    if spec
        .omega
        .iter()
        .any(|om| !om.substitute(&zero_args, &spec.vars, Some(nt)).is_zero())
    {
        return Err(Error::Unsupported(
            "the family must contain u = 0, i.e. omega(x, 0, 0) = 0".into(),
        ));
    }
    let kappa = sol.order + 1;
    let base = spec.base();
    let params: Vec<JetCoord> = sol
        .witness
        .iter()
        .map(|(j, beta)| JetCoord::from_multiindex(*j, beta))
        .collect();
    let mut wnames: Vec<String> = base.vars.names().to_vec();
    wnames.extend(params.iter().map(|c| c.fmt_with(base.xnames(), base.unames())));
    let w = Vars::new(&wnames);

    let mut g: Vec<Poly> = spec.omega.clone();
    g.extend(
        sol.witness
            .iter()
            .map(|(j, beta)| spec.omega[*j].diff_multi(&spec.x_multi(beta))),
    );
    let k = m + p;
    let a: Vec<Vec<Rat>> = g
        .iter()
        .map(|gi| (0..k).map(|s| gi.coeff(&Multiindex::unit(n + k, n + s))).collect())
        .collect();
    let ainv = invert(&a).ok_or_else(|| Error::Domain("parameter map is singular".into()))?;
    let nonlin: Vec<Poly> = g
        .iter()
        .zip(&a)
        .map(|(gi, ai)| {
            let mut r = gi.clone();
            for (s, c) in ai.iter().enumerate() {
                r.add_term(Multiindex::unit(n + k, n + s), &-c.clone());
            }
            r
        })
        .collect();
    let targets: Vec<Poly> = (0..k).map(|r| Poly::var(&w, n + r)).collect();
    let mut args = spec.x_args(&w, 0);
    args.extend(std::iter::repeat(Poly::zero(&w)).take(k));
    let apply_inv = |v: &[Poly]| -> Vec<Poly> {
        (0..k)
            .map(|i| {
                let mut acc = Poly::zero(&w);
                for (j, vj) in v.iter().enumerate() {
                    acc.add_scaled(vj, &ainv[i][j]);
                }
                acc
            })
            .collect()
    };
    let mut y = apply_inv(&targets);
    for _ in 0..nt + 2 {
        args[n..].clone_from_slice(&y);
        let rest: Vec<Poly> = nonlin
            .iter()
            .zip(&targets)
            .map(|(nl, t)| t - &nl.substitute(&args, &w, Some(nt)))
            .collect();
        let next = apply_inv(&rest);
        if next == y {
            break;
        }
        y = next;
    }
    args[n..].clone_from_slice(&y);

    let mut eqs = BTreeMap::new();
    for c in coords_up_to(n, m, kappa) {
        if c.order() == 0 || params.contains(&c) {
            continue;
        }
        let alpha = c.multiindex(n);
        let rhs = spec.omega[c.comp()]
            .diff_multi(&spec.x_multi(&alpha))
            .substitute(&args, &w, Some(nt));
        eqs.insert(c, flat_to_jet(&base, &params, &rhs));
    }
    SystemSpec::new(base, kappa, eqs)
}

/// The general series solution of a system as a manifold: `ν = u(0)` and
/// `χ_q` the values at 0 of the parametric jets, in their listed order.
/// The truncation defaults to `2κ + 2`.
pub fn manifold_from_pde(spec: &SystemSpec, truncation: Option<u32>) -> Result<ManifoldSpec, Error> {
    let (n, m, kappa) = (spec.n(), spec.m(), spec.kappa());
    let nt = truncation.unwrap_or(2 * kappa as u32 + 2);
    let params = spec.parametric().to_vec();
    let p = params.len();
    if p == 0 {
        return Err(Error::Specification("system has no parametric coordinates".into()));
    }
    let skel = skeleton_build(spec)?;
    let base = spec.base().clone();
    let mvars = ManifoldSpec::variables(n, m, p);
    let mut eval_args: Vec<Poly> = vec![Poly::zero(&mvars); n];
    eval_args.extend((0..m).map(|j| Poly::var(&mvars, n + j)));
    let at_origin = |e: &JetPoly| -> Result<Poly, Error> {
        let mut out = Poly::zero(&mvars);
        for (mono, form) in e.terms() {
            let mut t = form.cst.substitute(&eval_args, &mvars, Some(nt));
            for (c, pow) in mono.factors() {
                let q = params.iter().position(|pc| pc == c).ok_or_else(|| {
                    Error::Domain(format!("non-parametric coordinate {c:?} left after reduction"))
                })?;
                t = t.mul_trunc(&Poly::var(&mvars, n + m + q).pow(*pow as u32), nt);
            }
            out.add_scaled(&t, &Rat::one());
        }
        Ok(out)
    };
    let mut exprs: BTreeMap<JetCoord, JetPoly> = BTreeMap::new();
    let mut omega: Vec<Poly> = (0..m).map(|j| Poly::var(&mvars, n + j)).collect();
    for order in 1..=nt as usize {
        for c in coords_up_to(n, m, order).into_iter().filter(|c| c.order() == order) {
            let e = if order <= kappa {
                if params.contains(&c) {
                    JetPoly::coord(&base, &c)
                } else {
                    spec.completed()
                        .get(&c)
                        .cloned()
                        .ok_or_else(|| Error::Domain(format!("coordinate {c:?} is not determined")))?
                }
            } else {
                let k = c.indices().next().expect("positive order");
                let parent = c.reduced(k).expect("index present");
                skel.reduce(&exprs[&parent].total_derivative(k))?
            };
            let e = e.truncate_weighted(nt - order as u32);
            let alpha = c.multiindex(n);
            let v = at_origin(&e)?;
            if !v.is_zero() {
                let inv = Rat::from(alpha.factorial() as u64).recip()?;
                let xa = Poly::monomial(&mvars, alpha.concat(&Multiindex::zero(m + p)), inv);
                omega[c.comp()].add_scaled(&v.mul_trunc(&xa, nt), &Rat::one());
            }
            exprs.insert(c, e);
        }
    }
    ManifoldSpec::new(n, m, p, omega, nt)
}

/// `Ω' − Ω` after expressing the parametric initial data of
/// `manifold_from_pde(pde_from_manifold(M))` through `(ν, χ)`; zero up to
/// the truncation when the round trip is faithful.
pub fn round_trip_residual(spec: &ManifoldSpec) -> Result<Vec<Poly>, Error> {
    let pde = pde_from_manifold(spec)?;
    let back = manifold_from_pde(&pde, Some(spec.truncation))?;
    let (n, m) = (spec.n, spec.m);
    let vars = &spec.vars;
    let mut at0 = vec![Poly::zero(vars); n];
    at0.extend((n..vars.len()).map(|i| Poly::var(vars, i)));
    let mut args = spec.x_args(vars, 0);
    args.extend((0..m).map(|j| Poly::var(vars, n + j)));
    for c in pde.parametric() {
        let d = spec.omega[c.comp()].diff_multi(&spec.x_multi(&c.multiindex(n)));
        args.push(d.substitute(&at0, vars, Some(spec.truncation)));
    }
    Ok(back
        .omega
        .iter()
        .zip(&spec.omega)
        .map(|(b, om)| (&b.substitute(&args, vars, Some(spec.truncation)) - om).truncate(spec.truncation))
        .collect())
}

/// The parameter part `Σ Π^j ∂ν^j + Σ Λ^q ∂χ_q` lifting a point field.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Lift {
    /// Variables `nu1.., chi1..` of `Π` and `Λ`.
    pub vars: Vars,
    pub pi: Vec<Poly>,
    pub lambda: Vec<Poly>,
    /// False when the homogeneous lift system has a nontrivial nullspace,
    /// a sign that `M` is degenerate.
    pub unique: bool,
}

fn lift_known_part(spec: &ManifoldSpec, x: &VectorField, nt: u32) -> Result<Vec<Poly>, Error> {
    let (n, m) = (spec.n, spec.m);
    let b = x.base();
    if b.n != n || b.m != m {
        return Err(Error::Domain(format!(
            "field on ({}, {}) does not match the manifold dimensions ({n}, {m})",
            b.n, b.m
        )));
    }
    if x.is_symbolic() {
        return Err(Error::Domain("lift needs a concrete vector field".into()));
    }
    let mb = spec.base();
    let ident: Vec<usize> = (0..n + m).collect();
    let pulled: Vec<Poly> = x
        .coeffs()
        .iter()
        .map(|c| pull_back(spec, &c.embed(&mb.vars, &ident), nt))
        .collect();
    Ok((0..m)
        .map(|j| {
            let mut k = pulled[n + j].clone();
            for l in 0..n {
                k.add_scaled(&pulled[l].mul_trunc(&spec.omega[j].diff(l), nt), &-Rat::one());
            }
            k.truncate(nt)
        })
        .collect())
}

fn param_embed(spec: &ManifoldSpec) -> Vec<usize> {
    (spec.n..spec.n + spec.m + spec.p).collect()
}

/// Finds the unique parameter part making `X + Σ Π ∂ν + Σ Λ ∂χ` tangent to
/// `M` up to degree `N − 1`, with `Π, Λ` polynomials of degree at most
/// `degree` in `(ν, χ)`.
pub fn lift_to_parameters(spec: &ManifoldSpec, x: &VectorField, degree: u32) -> Result<Lift, Error> {
    let (m, p) = (spec.m, spec.p);
    let nt = spec.truncation.saturating_sub(1);
    let known = lift_known_part(spec, x, nt)?;
    let pvars = vars_of(&[indexed("nu", m), indexed("chi", p)]);
    let monos = multiindex_enumerate(m + p, degree);
    let nm = monos.len();
    let emb = param_embed(spec);
    let dparam: Vec<Vec<Poly>> = spec
        .omega
        .iter()
        .map(|om| (0..m + p).map(|s| om.diff(spec.n + s).truncate(nt)).collect())
        .collect();
    let mut rows: BTreeMap<(usize, Multiindex), SparseRow> = BTreeMap::new();
    for j in 0..m {
        for (k, mu) in monos.iter().enumerate() {
            let mono = Poly::monomial(&pvars, mu.clone(), Rat::one()).embed(&spec.vars, &emb);
            for s in 0..m + p {
                add_columns(&mut rows, j, s * nm + k, &mono.mul_trunc(&dparam[j][s], nt));
            }
        }
    }
    let mut rhs: BTreeMap<(usize, Multiindex), Rat> = BTreeMap::new();
    for (j, kj) in known.iter().enumerate() {
        for (mono, c) in kj.terms() {
            rhs.insert((j, mono.clone()), c.clone());
            rows.entry((j, mono.clone())).or_default();
        }
    }
    let system: Vec<(SparseRow, Rat)> = rows
        .into_iter()
        .map(|(key, row)| {
            let b = rhs.get(&key).cloned().unwrap_or_else(Rat::zero);
            (row, b)
        })
        .collect();
    match solve_affine((m + p) * nm, system) {
        LinearSolution::Inconsistent => Err(Error::Inconsistent(
            "X is not a symmetry to this order".into(),
        )),
        LinearSolution::Solved {
            particular,
            nullspace,
        } => {
            let comp = |s: usize| {
                Poly::from_terms(
                    &pvars,
                    monos
                        .iter()
                        .enumerate()
                        .map(|(k, mu)| (mu.clone(), particular[s * nm + k].clone())),
                )
            };
            Ok(Lift {
                vars: pvars.clone(),
                pi: (0..m).map(comp).collect(),
                lambda: (m..m + p).map(comp).collect(),
                unique: nullspace.is_empty(),
            })
        }
    }
}

/// The combined field applied to `u − Ω(x, ν, χ)` on `M`, up to degree `N − 1`.
pub fn lift_residual(spec: &ManifoldSpec, x: &VectorField, lift: &Lift) -> Result<Vec<Poly>, Error> {
    let nt = spec.truncation.saturating_sub(1);
    let known = lift_known_part(spec, x, nt)?;
    let emb = param_embed(spec);
    let parts: Vec<Poly> = lift
        .pi
        .iter()
        .chain(&lift.lambda)
        .map(|c| c.embed(&spec.vars, &emb))
        .collect();
    Ok(known
        .into_iter()
        .enumerate()
        .map(|(j, mut k)| {
            for (s, c) in parts.iter().enumerate() {
                k.add_scaled(&c.mul_trunc(&spec.omega[j].diff(spec.n + s), nt), &-Rat::one());
            }
            k.truncate(nt)
        })
        .collect())
}

/// Which foliation a chain step flows along.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum StepKind {
    /// Frozen parameters: moves `x`, recomputes `u = Ω`.
    Variables,
    /// Frozen variables: moves `χ`, recomputes `ν = Ω*`.
    Parameters,
}

/// One flow of a chain together with the indices of its parameter block.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ChainStep {
    pub kind: StepKind,
    pub vars: Vec<usize>,
}

/// A composition of alternating flows starting at the origin.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ChainMap {
    pub steps: Vec<ChainStep>,
    /// Outputs `x.., u.., nu.., chi..` over the stacked step parameters.
    pub composed: SeriesMap,
}

fn chain_kinds(k: usize, dual_first: bool) -> Vec<StepKind> {
    (0..k)
        .map(|i| {
            if (i % 2 == 0) != dual_first {
                StepKind::Variables
            } else {
                StepKind::Parameters
            }
        })
        .collect()
}

fn chain_param_vars(spec: &ManifoldSpec, kinds: &[StepKind]) -> (Vars, Vec<ChainStep>) {
    let mut names = Vec::new();
    let mut steps = Vec::new();
    let (mut nx, mut nc) = (0, 0);
    for kind in kinds {
        let start = names.len();
        match kind {
            StepKind::Variables => {
                nx += 1;
                for l in 0..spec.n {
                    names.push(if spec.n == 1 {
                        format!("x_{nx}")
                    } else {
                        format!("x{}_{nx}", l + 1)
                    });
                }
            }
            StepKind::Parameters => {
                nc += 1;
                for q in 0..spec.p {
                    names.push(if spec.p == 1 {
                        format!("chi_{nc}")
                    } else {
                        format!("chi{}_{nc}", q + 1)
                    });
                }
            }
        }
        steps.push(ChainStep {
            kind: *kind,
            vars: (start..names.len()).collect(),
        });
    }
    (Vars::new(&names), steps)
}

fn chain_snapshots(spec: &ManifoldSpec, k: usize, dual_first: bool) -> Result<(Vec<ChainStep>, Vec<SeriesMap>), Error> {
    let (n, m, p) = (spec.n, spec.m, spec.p);
    let nt = spec.truncation;
    let dual = dual_equations(spec)?;
    let (pv, steps) = chain_param_vars(spec, &chain_kinds(k, dual_first));
    let zero = Poly::zero(&pv);
    let mut xs = vec![zero.clone(); n];
    let mut us = vec![zero.clone(); m];
    let mut nus = vec![zero.clone(); m];
    let mut chis = vec![zero; p];
    let mut labels = indexed("x", n);
    labels.extend(indexed("u", m));
    labels.extend(indexed("nu", m));
    labels.extend(indexed("chi", p));
    let mut snaps = Vec::with_capacity(k);
    for step in &steps {
        match step.kind {
            StepKind::Variables => {
                for (l, &v) in step.vars.iter().enumerate() {
                    xs[l] = &xs[l] + &Poly::var(&pv, v);
                }
                let args: Vec<Poly> = xs.iter().chain(&nus).chain(&chis).cloned().collect();
                us = spec.omega_map().substitute(&args, &pv);
            }
            StepKind::Parameters => {
                for (q, &v) in step.vars.iter().enumerate() {
                    chis[q] = &chis[q] + &Poly::var(&pv, v);
                }
                let args: Vec<Poly> = chis.iter().chain(&xs).chain(&us).cloned().collect();
                nus = dual.substitute(&args, &pv);
            }
        }
        let outs: Vec<Poly> = xs.iter().chain(&us).chain(&nus).chain(&chis).cloned().collect();
        snaps.push(SeriesMap::new(&pv, labels.clone(), outs, nt)?);
    }
    Ok((steps, snaps))
}

/// The `k`-th chain `Γ_k`, or the dual chain `Γ*_k` when `dual_first`.
pub fn chain_map(spec: &ManifoldSpec, k: usize, dual_first: bool) -> Result<ChainMap, Error> {
    if k == 0 {
        return Err(Error::Domain("chain length must be at least 1".into()));
    }
    let (steps, mut snaps) = chain_snapshots(spec, k, dual_first)?;
    Ok(ChainMap {
        steps,
        composed: snaps.pop().expect("k >= 1"),
    })
}

/// Ranks of the chains `Γ_1 .. Γ_kmax`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Covering {
    pub covering: bool,
    pub k_min: Option<usize>,
    pub rank_profile: Vec<usize>,
    pub dim: usize,
}

/// Default chain length cap `2(m + 2)`.
pub fn default_kmax(spec: &ManifoldSpec) -> usize {
    2 * (spec.m + 2)
}

fn sample_points(nvars: usize) -> Vec<Vec<Rat>> {
    let mut rng = ChaCha8Rng::seed_from_u64(RANK_SEED);
    (0..RANK_SAMPLES)
        .map(|_| {
            (0..nvars)
                .map(|_| {
                    let num: i64 = rng.gen_range(1..=6);
                    let sign = if rng.gen_bool(0.5) { -1 } else { 1 };
                    Rat::new(sign * num, 13)
                })
                .collect()
        })
        .collect()
}

/// Generic rank of each `Γ_k` on the coordinates `(x, ν, χ)` of `M`,
/// estimated as the maximal exact Jacobian rank over deterministic
/// pseudorandom rational points.
pub fn covering_analysis(spec: &ManifoldSpec, k_max: Option<usize>) -> Result<Covering, Error> {
    let k_max = k_max.unwrap_or_else(|| default_kmax(spec));
    if k_max == 0 {
        return Err(Error::Domain("k_max must be at least 1".into()));
    }
    let (n, m, p) = (spec.n, spec.m, spec.p);
    let (_, snaps) = chain_snapshots(spec, k_max, false)?;
    let rows: Vec<usize> = (0..n).chain(n + m..n + 2 * m + p).collect();
    let points = sample_points(snaps[0].vars().len());
    let dim = spec.dim();
    let mut profile = Vec::with_capacity(k_max);
    for s in &snaps {
        let r = points
            .iter()
            .map(|pt| rank(&s.jacobian_at(pt, &rows)))
            .max()
            .unwrap_or(0);
        profile.push(r);
    }
    let k_min = profile.iter().position(|&r| r == dim).map(|i| i + 1);
    Ok(Covering {
        covering: k_min.is_some(),
        k_min,
        rank_profile: profile,
        dim,
    })
}

/// `κ₀ = μ₀(ℓ₀ + ℓ₀*)` and the dimension bound
/// `(n+m)·C(n+m+κ₀, κ₀) + (m+p)·C(m+p+κ₀, κ₀)`.
pub fn jet_bound(
    n: u64,
    m: u64,
    p: u64,
    l0: u64,
    l0_star: u64,
    mu0: u64,
) -> Result<(u64, u128), Error> {
    if [n, m, p, l0, l0_star, mu0].contains(&0) {
        return Err(Error::Domain("all jet bound inputs must be at least 1".into()));
    }
    let overflow = || Error::Resource("jet bound overflows".into());
    let k0 = l0
        .checked_add(l0_star)
        .and_then(|s| s.checked_mul(mu0))
        .ok_or_else(overflow)?;
    let a = binom(n + m + k0, k0)?
        .checked_mul((n + m) as u128)
        .ok_or_else(overflow)?;
    let b = binom(m + p + k0, k0)?
        .checked_mul((m + p) as u128)
        .ok_or_else(overflow)?;
    Ok((k0, a.checked_add(b).ok_or_else(overflow)?))
}

/// Everything the analysis pipeline reports about a manifold.
#[derive(Clone, Debug)]
pub struct ManifoldAnalysis {
    pub dual: SeriesMap,
    pub dual_residual_zero: bool,
    pub parameters: Solvability,
    pub variables: Solvability,
    pub degeneracy_degree: u32,
    pub degeneracy: Option<VectorField>,
    pub covering: Covering,
}

impl ManifoldAnalysis {
    /// One sentence per finding.
    pub fn summary(&self) -> Vec<String> {
        let mut out = Vec::new();
        let solv = |s: &Solvability, what: &str, sym: &str| {
            if s.solvable {
                format!("solvable with respect to the {what} ({sym} = {})", s.order)
            } else {
                format!(
                    "not solvable with respect to the {what} (rank {} of {} up to order {})",
                    s.rank, s.target, s.order
                )
            }
        };
        out.push(solv(&self.parameters, "parameters", "l0"));
        out.push(solv(&self.variables, "variables", "l0*"));
        out.push(match &self.degeneracy {
            Some(w) => format!("degenerate: witness {w}"),
            None => format!(
                "no degeneracy witness up to degree {}",
                self.degeneracy_degree
            ),
        });
        let c = &self.covering;
        out.push(match c.k_min {
            Some(k) => format!("covering: chain rank reaches {} at k = {k}", c.dim),
            None => format!(
                "not covering up to k = {}: rank stalls at {} of {}",
                c.rank_profile.len(),
                c.rank_profile.iter().max().copied().unwrap_or(0),
                c.dim
            ),
        });
        out
    }
}

/// Runs duality, both solvability searches, the degeneracy search and the
/// covering analysis.
pub fn analyze(spec: &ManifoldSpec, k_max: Option<usize>) -> Result<ManifoldAnalysis, Error> {
    let nt = spec.truncation as usize;
    let dual = dual_equations(spec)?;
    let dual_residual_zero = dual_residual(spec, &dual).iter().all(Poly::is_zero);
    let parameters = solvability_parameters(spec, nt.saturating_sub(1))?;
    let variables = solvability_variables(spec, nt.saturating_sub(1))?;
    let degeneracy_degree = (spec.truncation / 2).clamp(0, 2);
    let degeneracy = degeneracy_check(spec, degeneracy_degree)?;
    let covering = covering_analysis(spec, k_max)?;
    Ok(ManifoldAnalysis {
        dual,
        dual_residual_zero,
        parameters,
        variables,
        degeneracy_degree,
        degeneracy,
        covering,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifold(n: usize, m: usize, p: usize, nt: u32, omega: &[&[(&[u16], Rat)]]) -> ManifoldSpec {
        let vars = ManifoldSpec::variables(n, m, p);
        let comps = omega
            .iter()
            .map(|terms| {
                Poly::from_terms(
                    &vars,
                    terms.iter().map(|(e, c)| (Multiindex::from_slice(e), c.clone())),
                )
            })
            .collect();
        ManifoldSpec::new(n, m, p, comps, nt).unwrap()
    }

    fn one() -> Rat {
        Rat::one()
    }

    /// `u = ν + xχ`.
    fn line() -> ManifoldSpec {
        manifold(1, 1, 1, 6, &[&[(&[0, 1, 0], one()), (&[1, 0, 1], one())]])
    }

    /// `u = ν + x1 χ` with `n = 2`.
    fn ex21() -> ManifoldSpec {
        manifold(2, 1, 1, 6, &[&[(&[0, 0, 1, 0], one()), (&[1, 0, 0, 1], one())]])
    }

    /// `u = ν + xχ1 + … + x^{k−1}χ_{k−1}`.
    fn ex24(kappa: usize) -> ManifoldSpec {
        let p = kappa - 1;
        let vars = ManifoldSpec::variables(1, 1, p);
        let mut om = Poly::var(&vars, 1);
        for q in 0..p {
            let mut e = Multiindex::zero(2 + p);
            e.set(0, q as u16 + 1);
            e.set(2 + q, 1);
            om.add_term(e, &one());
        }
        ManifoldSpec::new(1, 1, p, vec![om], 2 * kappa as u32 + 2).unwrap()
    }

    #[test]
    fn invariant_is_enforced() {
        let vars = ManifoldSpec::variables(1, 1, 1);
        let bad = &Poly::var(&vars, 1) + &Poly::var(&vars, 2);
        assert!(ManifoldSpec::new(1, 1, 1, vec![bad], 4).is_err());
    }

    #[test]
    fn dual_of_line() {
        let m = line();
        let d = dual_equations(&m).unwrap();
        assert_eq!(d.output(0).to_string(), "-chi1*x1 + u1");
        assert!(dual_residual(&m, &d).iter().all(Poly::is_zero));
    }

    #[test]
    fn solvability_examples() {
        let s = solvability_variables(&ex21(), 5).unwrap();
        assert!(!s.solvable);
        assert_eq!(s.rank, 2);
        for k in [3, 4] {
            let m = ex24(k);
            let sp = solvability_parameters(&m, 5).unwrap();
            assert!(sp.solvable);
            assert_eq!(sp.order, k - 1);
            let sv = solvability_variables(&m, 3).unwrap();
            assert!(sv.solvable);
            assert_eq!(sv.order, 1);
        }
    }

    #[test]
    fn degeneracy_examples() {
        let w = degeneracy_check(&ex21(), 2).unwrap().unwrap();
        assert_eq!(w.to_string(), "d/dx2");
        assert!(degeneracy_check(&line(), 2).unwrap().is_none());
    }

    #[test]
    fn chains_of_line() {
        let m = line();
        let g2 = chain_map(&m, 2, false).unwrap();
        let outs: Vec<String> = g2.composed.outputs().iter().map(|p| p.to_string()).collect();
        assert_eq!(outs, ["x_1", "0", "-x_1*chi_1", "chi_1"]);
        let c = covering_analysis(&m, None).unwrap();
        assert!(c.covering);
        assert_eq!(c.k_min, Some(3));
    }

    #[test]
    fn bound_examples() {
        assert_eq!(jet_bound(1, 1, 2, 2, 1, 3).unwrap(), (9, 770));
        assert_eq!(jet_bound(1, 1, 1, 1, 1, 1).unwrap(), (2, 24));
    }

    #[test]
    fn pde_of_line() {
        let s = pde_from_manifold(&line()).unwrap();
        assert_eq!(s.kappa(), 2);
        let eqs: Vec<(JetCoord, bool)> = s.equations().iter().map(|(c, f)| (c.clone(), f.is_zero())).collect();
        assert_eq!(eqs, vec![(JetCoord::new(0, &[0, 0]), true)]);
        assert!(round_trip_residual(&line()).unwrap().iter().all(Poly::is_zero));
    }

    #[test]
    fn lift_examples() {
        let m = line();
        let b = m.base();
        let l = lift_to_parameters(&m, &VectorField::dx(&b, 0), 2).unwrap();
        assert_eq!(l.pi[0].to_string(), "-chi1");
        assert!(l.lambda[0].is_zero());
        assert!(l.unique);
        let l = lift_to_parameters(&m, &VectorField::along_x(&b, 0, b.x(0)), 2).unwrap();
        assert!(l.pi[0].is_zero());
        assert_eq!(l.lambda[0].to_string(), "-chi1");
    }
}
