//! Total derivatives and prolongation of vector fields to jet space.

pub mod closed;
mod expr;

pub use expr::{BaseSpace, CoeffForm, DerivSymbol, JetPoly, SymKind, VectorField};

use std::collections::BTreeMap;

use crate::jet::{coords_up_to, JetCoord};
use crate::Error;

/// Environment variable overriding [`ProlongConfig::max_terms`].
pub const MAX_TERMS_ENV: &str = "JETLIE_MAX_TERMS";

/// Limits on prolongation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProlongConfig {
    /// Highest order accepted by [`prolong_coeff`].
    pub kappa_max: usize,
    /// Largest number of jet monomials allowed in one coefficient.
    pub max_terms: usize,
}

impl Default for ProlongConfig {
    fn default() -> ProlongConfig {
        let max_terms = std::env::var(MAX_TERMS_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(1_000_000);
        ProlongConfig {
            kappa_max: 8,
            max_terms,
        }
    }
}

/// Memoizing evaluator of prolongation coefficients for one field.
pub struct Prolonger<'a> {
    field: &'a VectorField,
    cfg: ProlongConfig,
    memo: BTreeMap<JetCoord, JetPoly>,
    dq: BTreeMap<usize, Vec<JetPoly>>,
}

impl<'a> Prolonger<'a> {
    pub fn new(field: &'a VectorField) -> Prolonger<'a> {
        Prolonger::with_config(field, ProlongConfig::default())
    }

    pub fn with_config(field: &'a VectorField, cfg: ProlongConfig) -> Prolonger<'a> {
        Prolonger {
            field,
            cfg,
            memo: BTreeMap::new(),
            dq: BTreeMap::new(),
        }
    }

    pub fn field(&self) -> &VectorField {
        self.field
    }

    fn dq(&mut self, k: usize) -> &[JetPoly] {
        let f = self.field;
        self.dq
            .entry(k)
            .or_insert_with(|| (0..f.base().n).map(|l| f.q_jet(l).total_derivative(k)).collect())
    }

    fn check(&self, c: &JetCoord) -> Result<(), Error> {
        let b = self.field.base();
        if c.comp() >= b.m || c.indices().any(|k| k >= b.n) {
            return Err(Error::Domain(format!("jet coordinate {c:?} out of range")));
        }
        if c.order() > self.cfg.kappa_max {
            return Err(Error::Resource(format!(
                "prolongation order {} exceeds the cap {}",
                c.order(),
                self.cfg.kappa_max
            )));
        }
        Ok(())
    }

    /// The coefficient of `∂/∂U^j_K`; order zero gives `R^j`.
    pub fn coeff(&mut self, c: &JetCoord) -> Result<JetPoly, Error> {
        self.check(c)?;
        self.coeff_inner(c)
    }

    fn coeff_inner(&mut self, c: &JetCoord) -> Result<JetPoly, Error> {
        if c.order() == 0 {
            return Ok(self.field.r_jet(c.comp()));
        }
        if let Some(p) = self.memo.get(c) {
            return Ok(p.clone());
        }
        let idx = c.index_vec();
        let k = *idx.last().expect("nonempty");
        let prev = c.reduced(k).expect("index present");
        let lower = self.coeff_inner(&prev)?;
        let mut out = lower.total_derivative(k);
        let n = self.field.base().n;
        let dq: Vec<JetPoly> = self.dq(k).to_vec();
        for (l, dql) in dq.iter().enumerate().take(n) {
            if dql.is_zero() {
                continue;
            }
            let u = JetPoly::coord(self.field.base(), &prev.extended(l));
            out = out.sub(&dql.mul(&u)?);
        }
        if out.len() > self.cfg.max_terms {
            return Err(Error::Resource(format!(
                "prolongation coefficient has {} terms, above the limit {} (set {MAX_TERMS_ENV} to raise it)",
                out.len(),
                self.cfg.max_terms
            )));
        }
        self.memo.insert(c.clone(), out.clone());
        Ok(out)
    }
}

/// The prolongation coefficient `R^j_{k1..kλ}` (zero-based indices).
pub fn prolong_coeff(x: &VectorField, j: usize, ks: &[usize]) -> Result<JetPoly, Error> {
    if ks.is_empty() {
        return Err(Error::Domain("prolongation needs at least one index".into()));
    }
    Prolonger::new(x).coeff(&JetCoord::new(j, ks))
}

/// The recursion applied to the indices in the given order, without
/// canonicalization or memoization.
pub fn prolong_coeff_ordered(x: &VectorField, j: usize, ks: &[usize]) -> Result<JetPoly, Error> {
    if ks.is_empty() {
        return Err(Error::Domain("prolongation needs at least one index".into()));
    }
    let b = x.base();
    if j >= b.m || ks.iter().any(|&k| k >= b.n) {
        return Err(Error::Domain("prolongation index out of range".into()));
    }
    let mut cur = x.r_jet(j);
    for (s, &k) in ks.iter().enumerate() {
        let prefix = &ks[..s];
        let mut next = cur.total_derivative(k);
        for l in 0..b.n {
            let dq = x.q_jet(l).total_derivative(k);
            let mut idx = prefix.to_vec();
            idx.push(l);
            next = next.sub(&dq.mul(&JetPoly::coord(b, &JetCoord::new(j, &idx)))?);
        }
        cur = next;
    }
    Ok(cur)
}

/// A vector field together with all its prolongation coefficients up to
/// order `κ`.
#[derive(Clone, Debug)]
pub struct ProlongedField {
    pub base: VectorField,
    pub kappa: usize,
    pub coeffs: BTreeMap<JetCoord, JetPoly>,
}

impl ProlongedField {
    pub fn coeff(&self, c: &JetCoord) -> Option<&JetPoly> {
        self.coeffs.get(c)
    }

    /// Applies the prolonged field to a function on jet space.
    pub fn apply(&self, f: &JetPoly) -> Result<JetPoly, Error> {
        let b = self.base.base();
        let mut out = JetPoly::zero(b);
        for l in 0..b.n {
            let d = f.d_base(l);
            if !d.is_zero() {
                out = out.add(&self.base.q_jet(l).mul(&d)?);
            }
        }
        for j in 0..b.m {
            let d = f.d_base(b.n + j);
            if !d.is_zero() {
                out = out.add(&self.base.r_jet(j).mul(&d)?);
            }
        }
        for c in f.coords() {
            let d = f.d_coord(&c);
            let coeff = self.coeffs.get(&c).ok_or_else(|| {
                Error::Domain(format!("coordinate {c:?} above the prolongation order"))
            })?;
            out = out.add(&coeff.mul(&d)?);
        }
        Ok(out)
    }
}

/// Prolongs `x` to order `κ`.
pub fn prolong_field(x: &VectorField, kappa: usize) -> Result<ProlongedField, Error> {
    if kappa < 1 {
        return Err(Error::Domain("prolongation order must be at least 1".into()));
    }
    let b = x.base();
    let mut p = Prolonger::new(x);
    let mut coeffs = BTreeMap::new();
    for c in coords_up_to(b.n, b.m, kappa) {
        let v = p.coeff(&c)?;
        coeffs.insert(c, v);
    }
    Ok(ProlongedField {
        base: x.clone(),
        kappa,
        coeffs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Poly, Rat};
    use crate::jet::JetMonomial;

    fn u(k: &[usize]) -> JetCoord {
        JetCoord::new(0, k)
    }

    #[test]
    fn constant_field_has_zero_prolongation() {
        let b = BaseSpace::standard(2, 1);
        let x = VectorField::dx(&b, 0);
        for ks in [&[0][..], &[1, 0], &[1, 1, 0]] {
            assert!(prolong_coeff(&x, 0, ks).unwrap().is_zero());
        }
        assert!(prolong_coeff(&x, 0, &[]).is_err());
    }

    #[test]
    fn first_order_symbolic() {
        let b = BaseSpace::standard(1, 1);
        let x = VectorField::symbolic(&b);
        let got = prolong_coeff(&x, 0, &[0]).unwrap();
        let v = &b.vars;
        let mut expect = JetPoly::symbol(&b, DerivSymbol::r(0, &[1], &[0]));
        let mut c1 = CoeffForm::symbol(v, DerivSymbol::r(0, &[0], &[1]), Rat::one());
        c1.add_symbol(DerivSymbol::q(0, &[1], &[0]), &Poly::constant(v, Rat::from_int(-1)));
        expect.add_term(JetMonomial::coord(u(&[0])), &c1);
        expect.add_term(
            JetMonomial::coord(u(&[0])).times_coord(&u(&[0]), 1),
            &CoeffForm::symbol(v, DerivSymbol::q(0, &[0], &[1]), Rat::from_int(-1)),
        );
        assert_eq!(got, expect);
    }

    #[test]
    fn scaling_examples() {
        let b = BaseSpace::standard(1, 1);
        let uu = VectorField::along_u(&b, 0, b.u(0));
        assert_eq!(
            prolong_coeff(&uu, 0, &[0, 0, 0]).unwrap(),
            JetPoly::coord(&b, &u(&[0, 0, 0]))
        );
        let xx = VectorField::along_x(&b, 0, b.x(0));
        let p = prolong_field(&xx, 2).unwrap();
        assert_eq!(p.coeffs[&u(&[0])], JetPoly::coord(&b, &u(&[0])).scale(&Rat::from_int(-1)));
        assert_eq!(p.coeffs[&u(&[0, 0])], JetPoly::coord(&b, &u(&[0, 0])).scale(&Rat::from_int(-2)));
        let du = prolong_field(&VectorField::du(&b, 0), 2).unwrap();
        assert!(du.coeffs.values().all(|c| c.is_zero()));
    }

    #[test]
    fn ordered_matches_memoized() {
        let b = BaseSpace::standard(2, 1);
        let x = VectorField::symbolic(&b);
        let a = prolong_coeff_ordered(&x, 0, &[1, 0, 1]).unwrap();
        let c = prolong_coeff(&x, 0, &[0, 1, 1]).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn term_cap_is_enforced() {
        let b = BaseSpace::standard(2, 2);
        let x = VectorField::symbolic(&b);
        let cfg = ProlongConfig {
            kappa_max: 8,
            max_terms: 5,
        };
        let mut p = Prolonger::with_config(&x, cfg);
        assert!(matches!(p.coeff(&u(&[0, 1])), Err(Error::Resource(_))));
    }
}
