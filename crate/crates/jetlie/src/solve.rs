//! Exact solution of determining systems over polynomial ansätze, the
//! dimension bounds for homogeneous systems, and comparison against the
//! known general solutions.

use std::collections::BTreeMap;
use std::fmt;

use crate::algebra::linalg::{RowReducer, SparseRow};
use crate::algebra::{binom, multiindex_enumerate, Multiindex, Poly, Rat};
use crate::determine::DeterminingSystem;
use crate::prolong::{BaseSpace, SymKind, VectorField};
use crate::Error;

/// Polynomial symmetries found at a given ansatz degree.
#[derive(Clone, Debug)]
pub struct BasisReport {
    pub dimension: usize,
    pub generators: Vec<VectorField>,
    pub ansatz_degree: u32,
    /// The dimension does not grow when the degree is raised by one.
    pub stabilized: bool,
}

struct Ansatz {
    monos: Vec<Multiindex>,
    ncomp: usize,
}

impl Ansatz {
    fn new(base: &BaseSpace, degree: u32) -> Ansatz {
        Ansatz {
            monos: multiindex_enumerate(base.n + base.m, degree),
            ncomp: base.n + base.m,
        }
    }

    fn ncols(&self) -> usize {
        self.monos.len() * self.ncomp
    }

    fn col(&self, comp: usize, mono: usize) -> usize {
        comp * self.monos.len() + mono
    }
}

fn falling(mu: &Multiindex, alpha: &Multiindex) -> Option<Rat> {
    let mut acc: i64 = 1;
    for (&a, &b) in mu.exps().iter().zip(alpha.exps()) {
        if a < b {
            return None;
        }
        for t in 0..b {
            acc *= (a - t) as i64;
        }
    }
    Some(Rat::from_int(acc))
}

fn reduce_system(sys: &DeterminingSystem, ans: &Ansatz) -> Result<RowReducer, Error> {
    let n = sys.base.n;
    let mut rr = RowReducer::new(ans.ncols());
    for eq in &sys.equations {
        if !eq.cst.is_zero() {
            return Err(Error::Domain(
                "determining equation has a symbol-free part; the system is not linear homogeneous"
                    .into(),
            ));
        }
        let mut rows: BTreeMap<Multiindex, SparseRow> = BTreeMap::new();
        for (s, w) in &eq.lin {
            let comp = match s.kind {
                SymKind::Q => s.comp,
                SymKind::R => n + s.comp,
            };
            let alpha = s.full_multiindex();
            for (mi, mu) in ans.monos.iter().enumerate() {
                let Some(f) = falling(mu, &alpha) else {
                    continue;
                };
                let rest = mu.checked_sub(&alpha).expect("divisible");
                let col = ans.col(comp, mi);
                for (nu, c) in w.terms() {
                    let key = rest.add(nu);
                    let row = rows.entry(key).or_default();
                    let v = row.entry(col).or_insert_with(Rat::zero);
                    *v += &(&f * c);
                    if v.is_zero() {
                        row.remove(&col);
                    }
                }
            }
        }
        for (_, row) in rows {
            if !row.is_empty() {
                rr.insert(row);
            }
        }
    }
    Ok(rr)
}

fn field_from_vector(base: &BaseSpace, ans: &Ansatz, v: &[Rat]) -> VectorField {
    let coeffs = (0..ans.ncomp)
        .map(|comp| {
            Poly::from_terms(
                &base.vars,
                ans.monos
                    .iter()
                    .enumerate()
                    .map(|(mi, mu)| (mu.clone(), v[ans.col(comp, mi)].clone())),
            )
        })
        .collect();
    VectorField::from_coeffs(base, coeffs)
}

/// Dimension of the polynomial solution space at `degree`.
pub fn ansatz_dimension(sys: &DeterminingSystem, degree: u32) -> Result<usize, Error> {
    let ans = Ansatz::new(&sys.base, degree);
    let rr = reduce_system(sys, &ans)?;
    Ok(ans.ncols() - rr.rank())
}

/// Solves the determining system for fields whose coefficients are
/// polynomials of total degree at most `degree` in `(x, u)`.
pub fn ansatz_solve(sys: &DeterminingSystem, degree: u32) -> Result<BasisReport, Error> {
    let ans = Ansatz::new(&sys.base, degree);
    let rr = reduce_system(sys, &ans)?;
    let generators: Vec<VectorField> = rr
        .nullspace()
        .iter()
        .map(|v| field_from_vector(&sys.base, &ans, v))
        .collect();
    let next = ansatz_dimension(sys, degree + 1)?;
    Ok(BasisReport {
        dimension: generators.len(),
        stabilized: next == generators.len(),
        generators,
        ansatz_degree: degree,
    })
}

/// True when the solution dimension at `degree` equals that at `degree + 1`.
pub fn stabilization_check(sys: &DeterminingSystem, degree: u32) -> Result<bool, Error> {
    Ok(ansatz_dimension(sys, degree)? == ansatz_dimension(sys, degree + 1)?)
}

/// The dimension of the symmetry algebra of the homogeneous system of order
/// `κ`, which bounds it for every completely integrable system.
pub fn theorem1_bound(n: usize, m: usize, kappa: usize) -> Result<u128, Error> {
    if n < 1 || m < 1 {
        return Err(Error::Domain("n and m must be at least 1".into()));
    }
    let (n, m) = (n as u128, m as u128);
    match kappa {
        0 | 1 => Err(Error::Domain(format!("order {kappa} is below 2"))),
        2 => Ok((n + m + 2) * (n + m)),
        k => {
            let c = binom((n as usize + k - 1) as u64, (k - 1) as u64)?;
            Ok(n * n + 2 * n + m * m + m * c)
        }
    }
}

/// The known general solutions of homogeneous systems.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Shape {
    /// One variable, one unknown function, order at least three.
    Eq46,
    /// Order two, any dimensions.
    Eq54,
    /// Order at least three, any dimensions.
    Eq57,
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Shape::Eq46 => "eq46",
            Shape::Eq54 => "eq54",
            Shape::Eq57 => "eq57",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Shape, Error> {
        match s {
            "eq46" => Ok(Shape::Eq46),
            "eq54" => Ok(Shape::Eq54),
            "eq57" => Ok(Shape::Eq57),
            _ => Err(Error::Unsupported(format!(
                "unknown solution shape {s:?} (expected eq46, eq54 or eq57)"
            ))),
        }
    }
}

/// Monomials `x_{k1}..x_{kd}` with `k1 ≤ .. ≤ kd`, as polynomials on `base`.
pub(crate) fn x_monomials(base: &BaseSpace, d: u32) -> Vec<Poly> {
    let slots = base.n + base.m;
    crate::algebra::multiindices_of_order(base.n, d)
        .into_iter()
        .map(|a| {
            let mut e = a.exps().to_vec();
            e.resize(slots, 0);
            Poly::monomial(&base.vars, Multiindex::from_slice(&e), Rat::one())
        })
        .collect()
}

/// One field per free constant of the general solution.
pub fn shape_family(shape: Shape, n: usize, m: usize, kappa: usize) -> Result<Vec<VectorField>, Error> {
    let b = BaseSpace::standard(n, m);
    let mut out = Vec::new();
    match shape {
        Shape::Eq46 | Shape::Eq57 => {
            if shape == Shape::Eq46 && (n, m) != (1, 1) {
                return Err(Error::UnsupportedShape("eq46 describes n = m = 1".into()));
            }
            if kappa < 3 {
                return Err(Error::UnsupportedShape(format!("{shape} needs order at least 3")));
            }
            let km1 = Rat::from_int(kappa as i64 - 1);
            for l in 0..n {
                out.push(VectorField::dx(&b, l));
            }
            for l in 0..n {
                for k in 0..n {
                    out.push(VectorField::along_x(&b, l, b.x(k)));
                }
            }
            for k in 0..n {
                let mut q = vec![b.zero(); n];
                let mut r = vec![b.zero(); m];
                for (l, ql) in q.iter_mut().enumerate() {
                    *ql = &b.x(k) * &b.x(l);
                }
                for (j, rj) in r.iter_mut().enumerate() {
                    *rj = (&b.x(k) * &b.u(j)).scale(&km1);
                }
                out.push(VectorField::concrete(&b, q, r)?);
            }
            for j in 0..m {
                for i in 0..m {
                    out.push(VectorField::along_u(&b, j, b.u(i)));
                }
            }
            for d in 0..kappa as u32 {
                for j in 0..m {
                    for p in x_monomials(&b, d) {
                        out.push(VectorField::along_u(&b, j, p));
                    }
                }
            }
        }
        Shape::Eq54 => {
            if kappa != 2 {
                return Err(Error::UnsupportedShape("eq54 describes order 2".into()));
            }
            let euler = |p: &crate::algebra::Poly| -> VectorField {
                let q = (0..n).map(|l| &b.x(l) * p).collect();
                let r = (0..m).map(|j| &b.u(j) * p).collect();
                VectorField::concrete(&b, q, r).expect("shape")
            };
            for l in 0..n {
                out.push(VectorField::dx(&b, l));
                for k in 0..n {
                    out.push(VectorField::along_x(&b, l, b.x(k)));
                }
                for i in 0..m {
                    out.push(VectorField::along_x(&b, l, b.u(i)));
                }
            }
            for k in 0..n {
                out.push(euler(&b.x(k)));
            }
            for i in 0..m {
                out.push(euler(&b.u(i)));
            }
            for j in 0..m {
                out.push(VectorField::du(&b, j));
                for k in 0..n {
                    out.push(VectorField::along_u(&b, j, b.x(k)));
                }
                for i in 0..m {
                    out.push(VectorField::along_u(&b, j, b.u(i)));
                }
            }
        }
    }
    Ok(out)
}

/// Outcome of comparing a solver basis with a known family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShapeMatch {
    pub matches: bool,
    pub solver_dimension: usize,
    pub family_dimension: usize,
    /// A field of one side outside the span of the other, when they differ.
    pub offending: Option<String>,
}

/// Rank of a list of fields over a common monomial basis.
pub fn span_rank(fields: &[VectorField], degree: u32) -> usize {
    let mut rr = RowReducer::new(0);
    for f in fields {
        let v = f.coefficient_vector(degree);
        if rr.ncols() == 0 {
            rr = RowReducer::new(v.len());
        }
        rr.insert_dense(&v);
    }
    rr.rank()
}

fn span_of(fields: &[VectorField], degree: u32) -> RowReducer {
    let ncols = fields
        .first()
        .map(|f| f.coefficient_vector(degree).len())
        .unwrap_or(0);
    let mut rr = RowReducer::new(ncols);
    for f in fields {
        rr.insert_dense(&f.coefficient_vector(degree));
    }
    rr
}

fn dense_to_sparse(v: &[Rat]) -> SparseRow {
    v.iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| (i, c.clone()))
        .collect()
}

/// Exact span equality between the solver's generators and a known family.
pub fn match_solution_shape(
    report: &BasisReport,
    shape: Shape,
    kappa: usize,
) -> Result<ShapeMatch, Error> {
    let first = report
        .generators
        .first()
        .ok_or_else(|| Error::UnsupportedShape("empty basis".into()))?;
    let (n, m) = (first.base().n, first.base().m);
    let family = shape_family(shape, n, m, kappa)?;
    let deg = report
        .generators
        .iter()
        .chain(&family)
        .map(|f| f.degree())
        .max()
        .unwrap_or(0);
    let a = span_of(&report.generators, deg);
    let b = span_of(&family, deg);
    let mut offending = None;
    for f in &family {
        if !a.contains(dense_to_sparse(&f.coefficient_vector(deg))) {
            offending = Some(format!("family field {f} is not a solver solution"));
            break;
        }
    }
    if offending.is_none() {
        for g in &report.generators {
            if !b.contains(dense_to_sparse(&g.coefficient_vector(deg))) {
                offending = Some(format!("solver field {g} lies outside the family"));
                break;
            }
        }
    }
    Ok(ShapeMatch {
        matches: offending.is_none(),
        solver_dimension: a.rank(),
        family_dimension: b.rank(),
        offending,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::determine::{determining_system, is_symmetry};
    use crate::jet::SystemSpec;

    #[test]
    fn bounds() {
        assert_eq!(theorem1_bound(1, 1, 3).unwrap(), 7);
        assert_eq!(theorem1_bound(1, 1, 7).unwrap(), 11);
        assert_eq!(theorem1_bound(1, 3, 2).unwrap(), 24);
        assert_eq!(theorem1_bound(2, 1, 3).unwrap(), 15);
        assert!(theorem1_bound(1, 1, 1).is_err());
    }

    #[test]
    fn scalar_third_order() {
        let s = SystemSpec::homogeneous(1, 1, 3).unwrap();
        let sys = determining_system(&s).unwrap();
        let rep = ansatz_solve(&sys, 3).unwrap();
        assert_eq!(rep.dimension, 7);
        assert!(rep.stabilized);
        assert!(!stabilization_check(&sys, 1).unwrap());
        for g in &rep.generators {
            assert!(is_symmetry(&s, g).unwrap());
        }
        assert!(match_solution_shape(&rep, Shape::Eq46, 3).unwrap().matches);
        let mut bad = rep.clone();
        bad.generators.pop();
        let r = match_solution_shape(&bad, Shape::Eq46, 3).unwrap();
        assert!(!r.matches && r.offending.is_some());
    }

    #[test]
    fn family_sizes() {
        for (n, m) in [(1, 1), (2, 1), (1, 2), (2, 2)] {
            let f = shape_family(Shape::Eq54, n, m, 2).unwrap();
            assert_eq!(span_rank(&f, 2) as u128, theorem1_bound(n, m, 2).unwrap());
            for k in 3..5 {
                let f = shape_family(Shape::Eq57, n, m, k).unwrap();
                assert_eq!(span_rank(&f, k as u32) as u128, theorem1_bound(n, m, k).unwrap());
            }
        }
    }
}
