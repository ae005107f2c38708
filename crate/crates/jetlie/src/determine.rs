//! The Lie criterion: tangency of a prolonged field to the skeleton and the
//! linear determining system it imposes on `(Q, R)`.

use std::collections::BTreeMap;

use crate::algebra::linalg::{RowReducer, SparseRow};
use crate::algebra::Multiindex;
use crate::jet::{skeleton_build, JetCoord, JetMonomial, Skeleton, SystemSpec};
use crate::prolong::{BaseSpace, CoeffForm, DerivSymbol, JetPoly, Prolonger, VectorField};
use crate::Error;

/// Origin of one determining equation.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Provenance {
    /// The determined coordinate whose tangency condition produced it.
    pub coord: JetCoord,
    /// The jet monomial whose coefficient it is.
    pub monomial: JetMonomial,
    /// Further (coordinate, monomial) pairs giving the same equation up to
    /// a constant factor.
    pub duplicates: Vec<(JetCoord, JetMonomial)>,
}

/// Linear equations on `(Q, R)`, each required to vanish identically in
/// `(x, u)`.
#[derive(Clone, Debug)]
pub struct DeterminingSystem {
    pub base: BaseSpace,
    pub kappa: usize,
    pub equations: Vec<CoeffForm>,
    pub provenance: Vec<Provenance>,
}

impl DeterminingSystem {
    pub fn n(&self) -> usize {
        self.base.n
    }

    pub fn m(&self) -> usize {
        self.base.m
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    /// True when some equation equals `eq` up to a nonzero constant factor.
    pub fn contains_equation(&self, eq: &CoeffForm) -> bool {
        let target = eq.normalized();
        self.equations.iter().any(|e| e.normalized() == target)
    }

    /// True when `eq` is a constant-coefficient combination of the
    /// equations whose weights are all constants.
    pub fn implies(&self, eq: &CoeffForm) -> bool {
        let mut index = BTreeMap::new();
        let rows: Vec<SparseRow> = self
            .equations
            .iter()
            .filter(|e| e.cst.is_zero())
            .map(|e| form_row(e, &mut index))
            .collect();
        let target = form_row(eq, &mut index);
        let mut rr = RowReducer::new(index.len());
        for r in rows {
            rr.insert(r);
        }
        rr.contains(target)
    }

    /// Human-readable listing, one equation per line.
    pub fn render(&self) -> Vec<String> {
        self.equations
            .iter()
            .map(|e| format!("{} = 0", e.fmt_with(&self.base)))
            .collect()
    }
}

fn form_row(f: &CoeffForm, index: &mut BTreeMap<(DerivSymbol, Multiindex), usize>) -> SparseRow {
    let mut row = SparseRow::new();
    for (s, w) in &f.lin {
        for (mono, c) in w.terms() {
            let next = index.len();
            let k = *index.entry((s.clone(), mono.clone())).or_insert(next);
            row.insert(k, c.clone());
        }
    }
    row
}

fn tangency_for(
    skel: &Skeleton,
    pro: &mut Prolonger<'_>,
    c: &JetCoord,
    rhs: &JetPoly,
) -> Result<JetPoly, Error> {
    let x = pro.field().clone();
    let b = x.base();
    let mut t = pro.coeff(c)?;
    for l in 0..b.n {
        let d = rhs.d_base(l);
        if !d.is_zero() {
            t = t.sub(&x.q_jet(l).mul(&d)?);
        }
    }
    for j in 0..b.m {
        let d = rhs.d_base(b.n + j);
        if !d.is_zero() {
            t = t.sub(&x.r_jet(j).mul(&d)?);
        }
    }
    for p in rhs.coords() {
        let d = rhs.d_coord(&p);
        if !d.is_zero() {
            t = t.sub(&pro.coeff(&p)?.mul(&d)?);
        }
    }
    skel.reduce(&t)
}

/// Tangency polynomials of every determined coordinate of a system in any
/// accepted form, keyed by coordinate.
pub fn tangency_polynomials(
    spec: &SystemSpec,
    x: &VectorField,
) -> Result<BTreeMap<JetCoord, JetPoly>, Error> {
    if x.base() != spec.base() {
        return Err(Error::Domain("field and system live on different base spaces".into()));
    }
    let skel = skeleton_build(spec)?;
    let mut pro = Prolonger::new(x);
    let mut out = BTreeMap::new();
    for (c, rhs) in spec.completed() {
        out.insert(c.clone(), tangency_for(&skel, &mut pro, c, rhs)?);
    }
    Ok(out)
}

/// The tangency condition `R^j_K − X^{(κ)}(F^j_K)` on the skeleton for one
/// top-order coordinate of a full-form system.
pub fn tangency_polynomial(
    spec: &SystemSpec,
    x: &VectorField,
    coord: &JetCoord,
) -> Result<JetPoly, Error> {
    if !spec.is_full_form() {
        return Err(Error::UnsupportedShape(
            "tangency_polynomial needs a system determining exactly the top-order coordinates"
                .into(),
        ));
    }
    if x.base() != spec.base() {
        return Err(Error::Domain("field and system live on different base spaces".into()));
    }
    let rhs = spec.equations().get(coord).ok_or_else(|| {
        Error::Domain(format!("{coord:?} is not a determined coordinate of the system"))
    })?;
    let skel = skeleton_build(spec)?;
    let mut pro = Prolonger::new(x);
    tangency_for(&skel, &mut pro, coord, rhs)
}

/// True when the concrete field satisfies the Lie criterion identically.
pub fn is_symmetry(spec: &SystemSpec, x: &VectorField) -> Result<bool, Error> {
    if x.is_symbolic() {
        return Err(Error::Domain("symmetry test needs a concrete field".into()));
    }
    Ok(tangency_polynomials(spec, x)?.values().all(|t| t.is_zero()))
}

/// Extracts the determining equations of a system: the coefficients of
/// every jet monomial in every tangency polynomial, deduplicated up to
/// constant factors.
pub fn determining_system(spec: &SystemSpec) -> Result<DeterminingSystem, Error> {
    let x = VectorField::symbolic(spec.base());
    let tang = tangency_polynomials(spec, &x)?;
    let mut equations: Vec<CoeffForm> = Vec::new();
    let mut provenance: Vec<Provenance> = Vec::new();
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for (c, t) in &tang {
        for (mono, f) in t.terms() {
            if f.is_zero() {
                continue;
            }
            let key = format!("{:?}", f.normalized());
            match seen.get(&key) {
                Some(&i) => provenance[i].duplicates.push((c.clone(), mono.clone())),
                None => {
                    seen.insert(key, equations.len());
                    equations.push(f.clone());
                    provenance.push(Provenance {
                        coord: c.clone(),
                        monomial: mono.clone(),
                        duplicates: Vec::new(),
                    });
                }
            }
        }
    }
    Ok(DeterminingSystem {
        base: spec.base().clone(),
        kappa: spec.kappa(),
        equations,
        provenance,
    })
}

/// Disagreement between two derivations of the same jet coordinate.
#[derive(Clone, Debug)]
pub struct Residue {
    /// The common parent coordinate.
    pub parent: JetCoord,
    pub left: JetCoord,
    pub right: JetCoord,
    /// `D_k F_left − D_k' F_right` on the skeleton.
    pub value: JetPoly,
}

/// Compares, for every pair of determined coordinates of equal order with a
/// common parent, the two total-derivative extensions on the skeleton. All
/// residues vanishing is necessary for complete integrability.
pub fn integrability_residues(spec: &SystemSpec) -> Result<Vec<Residue>, Error> {
    let skel = skeleton_build(spec)?;
    let n = spec.n();
    let mut by_parent: BTreeMap<JetCoord, Vec<(usize, JetCoord)>> = BTreeMap::new();
    for c in spec.completed().keys() {
        for k in 0..n {
            let p = c.extended(k);
            let entry = by_parent.entry(p).or_default();
            if !entry.iter().any(|(_, d)| d == c) {
                entry.push((k, c.clone()));
            }
        }
    }
    let mut out = Vec::new();
    let mut ext: BTreeMap<(JetCoord, usize), JetPoly> = BTreeMap::new();
    let mut extend = |c: &JetCoord, k: usize| -> Result<JetPoly, Error> {
        if let Some(v) = ext.get(&(c.clone(), k)) {
            return Ok(v.clone());
        }
        let v = skel.reduce(&spec.completed()[c].total_derivative(k))?;
        ext.insert((c.clone(), k), v.clone());
        Ok(v)
    };
    for (parent, kids) in &by_parent {
        if kids.len() < 2 {
            continue;
        }
        let (k0, c0) = &kids[0];
        let a = extend(c0, *k0)?;
        for (k1, c1) in &kids[1..] {
            let b = extend(c1, *k1)?;
            out.push(Residue {
                parent: parent.clone(),
                left: c0.clone(),
                right: c1.clone(),
                value: a.sub(&b),
            });
        }
    }
    Ok(out)
}

/// True when every integrability residue vanishes.
pub fn residues_vanish(spec: &SystemSpec) -> Result<bool, Error> {
    Ok(integrability_residues(spec)?.iter().all(|r| r.value.is_zero()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Poly, Rat};
    use crate::prolong::prolong_coeff;

    fn r(xo: u16, uo: u16) -> DerivSymbol {
        DerivSymbol::r(0, &[xo], &[uo])
    }

    fn q(xo: u16, uo: u16) -> DerivSymbol {
        DerivSymbol::q(0, &[xo], &[uo])
    }

    fn form(b: &BaseSpace, parts: &[(DerivSymbol, i64)]) -> CoeffForm {
        let mut f = CoeffForm::zero(&b.vars);
        for (s, w) in parts {
            f.add_symbol(s.clone(), &Poly::constant(&b.vars, Rat::from_int(*w)));
        }
        f
    }

    #[test]
    fn second_order_homogeneous() {
        let s = SystemSpec::homogeneous(1, 1, 2).unwrap();
        let b = s.base().clone();
        let x = VectorField::symbolic(&b);
        let u2 = JetCoord::new(0, &[0, 0]);
        let t = tangency_polynomial(&s, &x, &u2).unwrap();
        let mut zero = BTreeMap::new();
        zero.insert(u2.clone(), JetPoly::zero(&b));
        let expect = prolong_coeff(&x, 0, &[0, 0]).unwrap().substitute(&zero).unwrap();
        assert_eq!(t, expect);
        let d = determining_system(&s).unwrap();
        assert_eq!(d.len(), 4);
        assert!(d.contains_equation(&form(&b, &[(r(2, 0), 1)])));
        assert!(d.contains_equation(&form(&b, &[(r(1, 1), 2), (q(2, 0), -1)])));
        assert!(d.contains_equation(&form(&b, &[(r(0, 2), 1), (q(1, 1), -2)])));
        assert!(d.contains_equation(&form(&b, &[(q(0, 2), 1)])));
    }

    #[test]
    fn inhomogeneous_example() {
        let b = BaseSpace::standard(1, 1);
        let u1 = JetCoord::new(0, &[0]);
        let u2 = JetCoord::new(0, &[0, 0]);
        let eqs = BTreeMap::from([(u2.clone(), JetPoly::coord(&b, &u1))]);
        let s = SystemSpec::new(b.clone(), 2, eqs).unwrap();
        let x = VectorField::symbolic(&b);
        let t = tangency_polynomial(&s, &x, &u2).unwrap();
        let r1 = prolong_coeff(&x, 0, &[0]).unwrap();
        let raw = prolong_coeff(&x, 0, &[0, 0]).unwrap().sub(&r1);
        let map = BTreeMap::from([(u2, JetPoly::coord(&b, &u1))]);
        assert_eq!(t, raw.substitute(&map).unwrap());
    }

    #[test]
    fn homogeneous_five_equations() {
        for k in 3..6u16 {
            let s = SystemSpec::homogeneous(1, 1, k as usize).unwrap();
            let b = s.base().clone();
            let d = determining_system(&s).unwrap();
            let kk = k as i64;
            let c2 = kk * (kk - 1) / 2;
            let c3 = kk * (kk - 1) * (kk - 2) / 6;
            assert!(d.contains_equation(&form(&b, &[(r(k, 0), 1)])));
            assert!(d.contains_equation(&form(&b, &[(r(2, 1), c2), (q(3, 0), -c3)])));
            assert!(d.contains_equation(&form(&b, &[(r(1, 1), kk), (q(2, 0), -c2)])));
            assert!(d.contains_equation(&form(&b, &[(r(0, 2), kk), (q(1, 1), -kk * kk)])));
            assert!(d.contains_equation(&form(&b, &[(q(0, 1), 1)])));
            assert!(d.equations.iter().all(|e| e.cst.is_zero()));
        }
    }

    #[test]
    fn residues() {
        let s = SystemSpec::homogeneous(2, 1, 2).unwrap();
        assert!(residues_vanish(&s).unwrap());
        let b = BaseSpace::standard(2, 1);
        let u = JetPoly::coord(&b, &JetCoord::new(0, &[]));
        let eqs = BTreeMap::from([
            (JetCoord::new(0, &[0, 0]), u.clone()),
            (JetCoord::new(0, &[0, 1]), JetPoly::zero(&b)),
            (JetCoord::new(0, &[1, 1]), u),
        ]);
        let s = SystemSpec::new(b, 2, eqs).unwrap();
        let res = integrability_residues(&s).unwrap();
        assert!(res.iter().any(|r| !r.value.is_zero()));
    }
}
