//! Exact multivariate polynomials over the rationals.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use super::{Multiindex, Rat};
use crate::Error;

/// An ordered, immutable set of variable names shared between polynomials.
#[derive(Clone)]
pub struct Vars(Arc<[String]>);

impl Vars {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Vars {
        Vars(names.iter().map(|s| s.as_ref().to_string()).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.0[i]
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|s| s == name)
    }
}

impl PartialEq for Vars {
    fn eq(&self, other: &Vars) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for Vars {}

impl fmt::Debug for Vars {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

/// Polynomial with rational coefficients keyed by exponent vectors.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    vars: Vars,
    terms: BTreeMap<Multiindex, Rat>,
}

/// The ring operation selected by [`poly_arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolyOp {
    Add,
    Sub,
    Mul,
}

/// Checked polynomial arithmetic; errors when variable sets differ.
pub fn poly_arith(a: &Poly, b: &Poly, op: PolyOp) -> Result<Poly, Error> {
    if a.vars != b.vars {
        return Err(Error::Domain(format!(
            "variable sets differ: {:?} vs {:?}",
            a.vars, b.vars
        )));
    }
    Ok(match op {
        PolyOp::Add => a + b,
        PolyOp::Sub => a - b,
        PolyOp::Mul => a * b,
    })
}

impl Poly {
    pub fn zero(vars: &Vars) -> Poly {
        Poly {
            vars: vars.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: &Vars, c: Rat) -> Poly {
        let mut p = Poly::zero(vars);
        if !c.is_zero() {
            p.terms.insert(Multiindex::zero(vars.len()), c);
        }
        p
    }

    pub fn one(vars: &Vars) -> Poly {
        Poly::constant(vars, Rat::one())
    }

    /// The variable with index `i`.
    pub fn var(vars: &Vars, i: usize) -> Poly {
        Poly::monomial(vars, Multiindex::unit(vars.len(), i), Rat::one())
    }

    pub fn monomial(vars: &Vars, m: Multiindex, c: Rat) -> Poly {
        debug_assert_eq!(m.slots(), vars.len());
        let mut p = Poly::zero(vars);
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Multiindex, Rat)>>(vars: &Vars, it: I) -> Poly {
        let mut p = Poly::zero(vars);
        for (m, c) in it {
            p.add_term(m, &c);
        }
        p
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending graded order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Multiindex, &Rat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Multiindex) -> Rat {
        self.terms.get(m).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn constant_term(&self) -> Rat {
        self.coeff(&Multiindex::zero(self.nvars()))
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.is_zero())
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(|m| m.order())
    }

    /// Lowest total degree of a nonzero term.
    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().next().map(|m| m.order())
    }

    /// Degree in a single variable.
    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|m| m.get(i) as u32).max().unwrap_or(0)
    }

    pub fn add_term(&mut self, m: Multiindex, c: &Rat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, other: &Poly, c: &Rat) {
        debug_assert!(self.vars == other.vars, "variable sets differ");
        if c.is_zero() {
            return;
        }
        for (m, a) in &other.terms {
            self.add_term(m.clone(), &(a * c));
        }
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero(&self.vars);
        }
        Poly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    /// Multiplies by the monomial `c * x^m`.
    pub fn mul_monomial(&self, m: &Multiindex, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero(&self.vars);
        }
        Poly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(k, a)| (k.add(m), a * c)).collect(),
        }
    }

    /// Partial derivative with respect to variable index `i`.
    pub fn diff(&self, i: usize) -> Poly {
        let mut out = Poly::zero(&self.vars);
        for (m, c) in &self.terms {
            let e = m.get(i);
            if e > 0 {
                let mut k = m.clone();
                k.set(i, e - 1);
                out.terms.insert(k, c * Rat::from_int(e as i64));
            }
        }
        out
    }

    /// Partial derivative with respect to a named variable.
    pub fn diff_var(&self, name: &str) -> Result<Poly, Error> {
        let i = self
            .vars
            .index_of(name)
            .ok_or_else(|| Error::Domain(format!("unknown variable `{name}`")))?;
        Ok(self.diff(i))
    }

    /// Mixed partial derivative `∂^α`.
    pub fn diff_multi(&self, alpha: &Multiindex) -> Poly {
        let mut out = Poly::zero(&self.vars);
        for (m, c) in &self.terms {
            if let Some(k) = m.checked_sub(alpha) {
                let mut f = Rat::one();
                for i in 0..m.slots() {
                    for t in 0..alpha.get(i) {
                        f = &f * Rat::from_int((m.get(i) - t) as i64);
                    }
                }
                out.terms.insert(k, c * f);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one(&self.vars);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn eval(&self, point: &[Rat]) -> Rat {
        assert_eq!(point.len(), self.nvars());
        let mut acc = Rat::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.exps().iter().enumerate() {
                if e > 0 {
                    t = &t * point[i].pow(e as u32);
                }
            }
            acc += t;
        }
        acc
    }

    /// Drops every term of total degree above `n`.
    pub fn truncate(&self, n: u32) -> Poly {
        Poly {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.order() <= n)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Product keeping only terms of total degree at most `n`.
    pub fn mul_trunc(&self, other: &Poly, n: u32) -> Poly {
        debug_assert!(self.vars == other.vars, "variable sets differ");
        let mut out = Poly::zero(&self.vars);
        for (ma, ca) in &self.terms {
            let da = ma.order();
            if da > n {
                break;
            }
            for (mb, cb) in &other.terms {
                if da + mb.order() > n {
                    break;
                }
                out.add_term(ma.add(mb), &(ca * cb));
            }
        }
        out
    }

    /// Substitutes `args[i]` for variable `i`; all `args` share one target
    /// variable set. With `trunc = Some(n)` every intermediate product is cut
    /// at total degree `n`.
    pub fn substitute(&self, args: &[Poly], target: &Vars, trunc: Option<u32>) -> Poly {
        assert_eq!(args.len(), self.nvars());
        let mul = |a: &Poly, b: &Poly| match trunc {
            Some(n) => a.mul_trunc(b, n),
            None => a * b,
        };
        let mut powers: Vec<Vec<Poly>> = Vec::with_capacity(args.len());
        for (i, a) in args.iter().enumerate() {
            let dmax = self.degree_in(i);
            let mut v = vec![Poly::one(target)];
            for e in 1..=dmax as usize {
                let next = mul(&v[e - 1], a);
                v.push(next);
            }
            powers.push(v);
        }
        let mut out = Poly::zero(target);
        for (m, c) in &self.terms {
            let mut t = Poly::constant(target, c.clone());
            for (i, &e) in m.exps().iter().enumerate() {
                if e > 0 {
                    t = mul(&t, &powers[i][e as usize]);
                    if t.is_zero() {
                        break;
                    }
                }
            }
            out.add_scaled(&t, &Rat::one());
        }
        match trunc {
            Some(n) => out.truncate(n),
            None => out,
        }
    }

    /// Re-expresses the polynomial in a larger variable set; `map[i]` is the
    /// target index of variable `i`.
    pub fn embed(&self, target: &Vars, map: &[usize]) -> Poly {
        assert_eq!(map.len(), self.nvars());
        let mut out = Poly::zero(target);
        for (m, c) in &self.terms {
            let mut k = Multiindex::zero(target.len());
            for (i, &e) in m.exps().iter().enumerate() {
                k.set(map[i], k.get(map[i]) + e);
            }
            out.add_term(k, c);
        }
        out
    }

    /// Coefficient extraction: groups terms by the exponents of the selected
    /// variables. Returns pairs (selected exponents, remaining polynomial in
    /// the same variable set with the selected exponents removed).
    pub fn split_by(&self, selected: &[usize]) -> BTreeMap<Multiindex, Poly> {
        let mut out: BTreeMap<Multiindex, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let key = Multiindex::from_slice(
                &selected.iter().map(|&i| m.get(i)).collect::<Vec<_>>(),
            );
            let mut rest = m.clone();
            for &i in selected {
                rest.set(i, 0);
            }
            out.entry(key)
                .or_insert_with(|| Poly::zero(&self.vars))
                .add_term(rest, c);
        }
        out
    }

    /// Rebinds the polynomial to an equal variable set object.
    pub fn with_vars(&self, vars: &Vars) -> Poly {
        assert!(self.vars == *vars);
        Poly {
            vars: vars.clone(),
            terms: self.terms.clone(),
        }
    }

    /// Leading coefficient in descending graded order (highest term).
    pub fn leading(&self) -> Option<(&Multiindex, &Rat)> {
        self.terms.iter().next_back()
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        let (dl, dc) = d.leading()?;
        let (dl, dc) = (dl.clone(), dc.clone());
        let inv = dc.recip().ok()?;
        let mut rest = self.clone();
        let mut q = Poly::zero(&self.vars);
        while let Some((rl, rc)) = rest.leading() {
            let k = rl.checked_sub(&dl)?;
            let c = rc * &inv;
            rest.add_scaled(&d.mul_monomial(&k, &c), &-Rat::one());
            q.add_term(k, &c);
        }
        Some(q)
    }

    /// Lowest term in graded order.
    pub fn trailing(&self) -> Option<(&Multiindex, &Rat)> {
        self.terms.iter().next()
    }
}

fn combine(a: &Poly, b: &Poly, sign: &Rat) -> Poly {
    assert!(a.vars == b.vars, "variable sets differ: {:?} vs {:?}", a.vars, b.vars);
    let mut out = a.clone();
    out.add_scaled(b, sign);
    out
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        combine(self, rhs, &Rat::one())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        combine(self, rhs, &Rat::from_int(-1))
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        assert!(self.vars == rhs.vars, "variable sets differ: {:?} vs {:?}", self.vars, rhs.vars);
        let mut out = Poly::zero(&self.vars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.add(mb), &(ca * cb));
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&Rat::from_int(-1))
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, rhs: Poly) -> Poly {
        &self + &rhs
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        &self - &rhs
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

/// Writes `name^e` products for a monomial, `1` for the empty monomial.
pub fn fmt_monomial(m: &Multiindex, names: &[String]) -> String {
    let mut parts = Vec::new();
    for (i, &e) in m.exps().iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(names[i].clone()),
            _ => parts.push(format!("{}^{}", names[i], e)),
        }
    }
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

/// Formats `c * monomial` terms from highest to lowest degree.
pub fn fmt_terms<'a, I>(terms: I, names: &[String]) -> String
where
    I: Iterator<Item = (&'a Multiindex, &'a Rat)>,
{
    let mut s = String::new();
    for (m, c) in terms {
        let neg = c.is_negative();
        let a = c.abs();
        if s.is_empty() {
            if neg {
                s.push('-');
            }
        } else {
            s.push_str(if neg { " - " } else { " + " });
        }
        if m.is_zero() {
            s.push_str(&a.to_string());
        } else if a.is_one() {
            s.push_str(&fmt_monomial(m, names));
        } else {
            s.push_str(&format!("{}*{}", a, fmt_monomial(m, names)));
        }
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", fmt_terms(self.terms.iter().rev(), self.vars.names()))
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xu() -> Vars {
        Vars::new(&["x", "u"])
    }

    #[test]
    fn difference_of_squares() {
        let v = xu();
        let x = Poly::var(&v, 0);
        let one = Poly::one(&v);
        let p = &(&x + &one) * &(&x - &one);
        assert_eq!(p.to_string(), "x^2 - 1");
    }

    #[test]
    fn rational_product() {
        let v = xu();
        let x = Poly::var(&v, 0);
        let a = x.scale(&Rat::new(1, 2));
        let b = x.scale(&Rat::new(2, 3));
        assert_eq!((&a * &b).to_string(), "1/3*x^2");
    }

    #[test]
    fn derivatives() {
        let v = xu();
        let x = Poly::var(&v, 0);
        let u = Poly::var(&v, 1);
        let p = &(&x * &x) * &u;
        assert_eq!(p.diff_var("x").unwrap().to_string(), "2*x*u");
        assert!(Poly::constant(&v, Rat::from_int(5)).diff(0).is_zero());
        assert!(x.pow(3).diff(1).is_zero());
        assert!(p.diff_var("y").is_err());
        let a = Multiindex::from_slice(&[2, 1]);
        assert_eq!(p.diff_multi(&a).to_string(), "2");
    }

    #[test]
    fn mismatched_vars_error() {
        let a = Poly::var(&xu(), 0);
        let b = Poly::var(&Vars::new(&["y"]), 0);
        assert!(poly_arith(&a, &b, PolyOp::Add).is_err());
        assert!(poly_arith(&a, &a, PolyOp::Mul).is_ok());
    }

    #[test]
    fn substitution_and_truncation() {
        let v = xu();
        let x = Poly::var(&v, 0);
        let u = Poly::var(&v, 1);
        let p = &x * &u;
        let t = Vars::new(&["t"]);
        let tt = Poly::var(&t, 0);
        let q = p.substitute(&[tt.clone(), &tt + &Poly::one(&t)], &t, None);
        assert_eq!(q.to_string(), "t^2 + t");
        let r = p.substitute(&[tt.clone(), &tt + &Poly::one(&t)], &t, Some(1));
        assert_eq!(r.to_string(), "t");
    }
}
